use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum NumericError {
    #[error("gamma function pole at {0}")]
    GammaPole(f64),
    #[error("adaptive quadrature did not converge: value {value:e}, error estimate {error:e} after {intervals} panels")]
    QuadratureNonConvergence {
        value: f64,
        error: f64,
        intervals: usize,
    },
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LieError {
    #[error("matrix is not unimodular: |ad - bc - 1| = {0:e}")]
    NotUnimodular(f64),
    #[error("KAK is degenerate: L[4][4] - 1 = {0:e} is below the rotation threshold")]
    DegenerateRotation(f64),
    #[error("Poisson kernel needs 0 <= r < 1, got {0}")]
    RadiusOutOfRange(f64),
    #[error("matrix is not a Lorentz transformation: form residual {0:e}")]
    NotLorentz(f64),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum HarmonicError {
    #[error("invalid harmonic index a={a}, b={b}, c={c}")]
    InvalidIndex { a: i64, b: i64, c: i64 },
    #[error("c = {c} harmonic depends on the M-gauge at t = {t:e}")]
    GaugeDependent { c: i32, t: f64 },
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LineError {
    #[error("representation parameter s = {0} is outside (1, 2)")]
    ParameterOutOfRange(f64),
    #[error("invalid K-type l={l}, j={j}")]
    InvalidKType { l: i64, j: i64 },
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum OrbitError {
    #[error("quadruple {0:?} is not on the Descartes cone")]
    NotOnCone([i64; 4]),
    #[error("quadruple {root:?} is not a root: generator S{generator} lowers slot {generator} from {from} to {to}")]
    NonRootInput {
        root: [i64; 4],
        generator: usize,
        from: i64,
        to: i64,
    },
    #[error("curvature decreased along a reduced word ({parent} -> {child}); the start quadruple is not reduced")]
    NonMonotone { parent: i64, child: i64 },
    #[error("integer overflow past 128 bits")]
    Overflow,
    #[error("enumeration exceeded the cap of {cap} elements")]
    FrontierExplosion { cap: usize },
    #[error("duplicate group element produced by distinct reduced words")]
    DuplicateElement,
    #[error("generator {0} does not preserve the quadratic form")]
    NotAnIsometry(usize),
    #[error("generator {0} is not an involution")]
    NotInvolution(usize),
    #[error("need at least {needed} points spanning two decades, got {got} spanning {decades:.2}")]
    InsufficientRange {
        needed: usize,
        got: usize,
        decades: f64,
    },
    #[error("bound {0} exceeds the supported cap of 1e12")]
    BoundTooLarge(f64),
    #[error("invalid option: {0}")]
    InvalidOption(String),
    #[error("word depth exceeded {0}; the packing is probably periodic")]
    DepthExceeded(usize),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MeasureError {
    #[error("group ball has no non-degenerate elements")]
    EmptyBall,
    #[error("integrand (|z|^2+1)^delta is unbounded on the atom support (max {0:e}); restrict to one period")]
    Divergent(f64),
    #[error(transparent)]
    Harmonic(#[from] HarmonicError),
    #[error(transparent)]
    Lie(#[from] LieError),
}
