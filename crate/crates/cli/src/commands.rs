use std::f64::consts::FRAC_1_SQRT_2;
use std::path::Path;

use bisector_core::harmonics::BisectorIndex;
use bisector_core::lie::{kak, lorentz_norm, Lorentz, Vec3};
use bisector_core::line::{c_constant_residual, casimir_residual, check_ladder, k_casimir_residual};
use bisector_core::orbit::{
    apollonian_generators, chamber_margin, descartes_twice, enumerate_circles, fit_exponent, geometric_grid,
    group_ball, orbit_vectors, BallOptions, CircleOptions, CountCurve, ExponentFit, Quadruple, VectorNorm,
    VectorOptions, MAX_BOUND,
};
use bisector_core::ps::{
    aligned_conjugator, bisector_report, bisector_sum, c_p_estimate, moment, ps_approx, ps_approx_within, root_frame,
    MomentTable, PackingConstant, APOLLONIAN_DELTA, DEFAULT_S_OFFSET,
};
use num_complex::Complex64;
use serde::Serialize;

use crate::config::{
    BallArgs, BisectorArgs, Command, CpEstimateArgs, FitDeltaArgs, Format, KakArgs, LineVerifyArgs, NormChoice,
    PackCountArgs, PsMomentsArgs, RenderSvgArgs, VectorCountArgs,
};
use crate::error::CliError;
use crate::output::{csv_bytes, emit, json_bytes, read_count_csv};
use crate::svg::{packing_geometry, render_svg, SvgOptions};

/// Default conjugating boost for ball-based commands. Its basepoint sits
/// inside the reflection chamber, so ball enumeration is exact.
pub const DEFAULT_BOOST_DIR: [f64; 3] = [-0.807, -0.486, -0.334];
pub const DEFAULT_BOOST_T: f64 = 2.44;
/// Ball radius used to locate the measure's mean direction for alignment.
pub const ALIGN_PROBE_T: f64 = 2e4;
/// Largest tolerated tangency defect in rendered packings, relative to radius.
pub const TANGENCY_TOL: f64 = 1e-3;

pub fn execute(cmd: &Command) -> Result<(), CliError> {
    match cmd {
        Command::PackCount(a) => pack_count(a, None),
        Command::IdealCount(a) => pack_count(a, Some(3)),
        Command::FitDelta(a) => fit_delta(a),
        Command::VectorCount(a) => vector_count(a),
        Command::Ball(a) => ball(a),
        Command::PsMoments(a) => ps_moments(a),
        Command::Bisector(a) => bisector(a),
        Command::CPEstimate(a) => cp_estimate(a),
        Command::LineVerify(a) => line_verify(a),
        Command::Kak(a) => kak_cmd(a),
        Command::RenderSvg(a) => render(a),
    }
}

fn required<T>(v: Option<T>, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Config(format!("missing --{flag}")))
}

fn quadruple(v: &[i64], flag: &str) -> Result<Quadruple, CliError> {
    let arr: [i64; 4] = v
        .try_into()
        .map_err(|_| CliError::Config(format!("--{flag} needs four integers, got {}", v.len())))?;
    Ok(Quadruple::new(arr)?)
}

fn positive(x: f64, flag: &str) -> Result<f64, CliError> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(CliError::Config(format!("--{flag} must be positive and finite, got {x}")))
    }
}

fn integer_bound(t: f64) -> Result<i64, CliError> {
    let t = positive(t, "tmax")?;
    if t > MAX_BOUND {
        return Err(CliError::Config(format!("--tmax {t} exceeds {MAX_BOUND:e}")));
    }
    Ok(t.floor() as i64)
}

/// Log-spaced grid ending exactly at `t_max`.
fn grid(t_min: f64, t_max: f64, per_decade: usize) -> Result<Vec<f64>, CliError> {
    if per_decade == 0 {
        return Err(CliError::Config("--per-decade must be positive".into()));
    }
    let t_min = positive(t_min, "tmin")?;
    if t_min >= t_max {
        return Ok(vec![t_max]);
    }
    let mut g = geometric_grid(t_min, t_max, per_decade);
    if let Some(last) = g.last_mut() {
        *last = t_max;
    }
    Ok(g)
}

fn letter(s: &str) -> Result<usize, CliError> {
    let digits = s.trim().trim_start_matches(['S', 's']);
    match digits.parse::<usize>() {
        Ok(k @ 1..=4) => Ok(k - 1),
        _ => Err(CliError::Config(format!("--ideal-triangle expects S1..S4, got {s:?}"))),
    }
}

fn out_path(p: &Option<std::path::PathBuf>) -> Option<&Path> {
    p.as_deref()
}

#[derive(Serialize)]
struct CurvePoint {
    t: f64,
    n: u64,
}

#[derive(Serialize)]
struct PackReport {
    root: [i64; 4],
    t_max: i64,
    periodic: bool,
    include_bounding: bool,
    ideal_triangle: Option<String>,
    total: u64,
    max_depth: usize,
    quadruples_checked: u64,
    curve: Vec<CurvePoint>,
    /// `(curvature, multiplicity)`.
    histogram: Vec<(i64, u64)>,
}

fn pack_count(a: &PackCountArgs, default_excluded: Option<usize>) -> Result<(), CliError> {
    let root = quadruple(&required(a.root.clone(), "root")?, "root")?;
    let t_max = integer_bound(required(a.tmax, "tmax")?)?;
    let excluded = match &a.ideal_triangle {
        Some(s) => Some(letter(s)?),
        None => default_excluded,
    };
    let include_bounding = a.include_bounding.unwrap_or(false);
    let defaults = CircleOptions::default();
    let opts = CircleOptions {
        include_bounding,
        periodic: a.periodic,
        excluded_first: excluded,
        cap: a.cap.unwrap_or(defaults.cap),
        ..defaults
    };
    let count = enumerate_circles(root, t_max, &opts)?;
    let ts = grid(a.tmin.unwrap_or(10.0), t_max as f64, a.per_decade.unwrap_or(20))?;
    let curve: Vec<CurvePoint> = ts.iter().map(|&t| CurvePoint { t, n: count.count_at(t) }).collect();
    let bytes = match a.format.unwrap_or(Format::Csv) {
        Format::Csv => csv_bytes(&["T", "N"], curve.iter().map(|p| vec![p.t.to_string(), p.n.to_string()]))?,
        Format::Json => json_bytes(&PackReport {
            root: root.0,
            t_max,
            periodic: count.periodic,
            include_bounding,
            ideal_triangle: excluded.map(|k| format!("S{}", k + 1)),
            total: count.curvatures.len() as u64,
            max_depth: count.max_depth,
            quadruples_checked: count.quadruples_checked,
            curve,
            histogram: count.histogram(),
        })?,
    };
    emit(out_path(&a.out), &bytes)
}

#[derive(Serialize)]
struct FitReport {
    #[serde(flatten)]
    fit: ExponentFit,
    /// `max/min - 1` of `N/T^δ` over the top decade.
    band: f64,
    band_t_lo: f64,
    expect_delta: Option<f64>,
    tol: Option<f64>,
    max_band: Option<f64>,
    pass: bool,
}

/// Relative spread of `N/T^δ` over the top decade of a curve.
pub fn top_decade_band(points: &[(f64, u64)], delta: f64) -> (f64, f64) {
    let t_hi = points.iter().map(|p| p.0).fold(0.0, f64::max);
    let lo = t_hi / 10.0 * (1.0 - 1e-12);
    let ratios: Vec<f64> = points
        .iter()
        .filter(|p| p.0 >= lo && p.1 > 0)
        .map(|&(t, n)| n as f64 / t.powf(delta))
        .collect();
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max = ratios.iter().copied().fold(0.0, f64::max);
    (if ratios.is_empty() { f64::NAN } else { max / min - 1.0 }, lo)
}

fn fit_delta(a: &FitDeltaArgs) -> Result<(), CliError> {
    let input = required(a.input.clone(), "input")?;
    let points = read_count_csv(&input)?;
    let fit = fit_exponent(&CountCurve { points: points.clone() })?;
    let (band, band_t_lo) = top_decade_band(&points, fit.delta);
    let tol = a.expect_delta.map(|_| a.tol.unwrap_or(0.05));
    let mut failures = Vec::new();
    if let (Some(want), Some(tol)) = (a.expect_delta, tol) {
        if (fit.delta - want).abs() > tol {
            failures.push(format!("delta {:.5} is {:.5} away from {want}", fit.delta, (fit.delta - want).abs()));
        }
    }
    if let Some(mb) = a.max_band {
        if band.is_nan() || band > mb {
            failures.push(format!("top-decade band {band:.4} exceeds {mb}"));
        }
    }
    let report = FitReport {
        fit,
        band,
        band_t_lo,
        expect_delta: a.expect_delta,
        tol,
        max_band: a.max_band,
        pass: failures.is_empty(),
    };
    emit(out_path(&a.out), &json_bytes(&report)?)?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Tolerance(failures.join("; ")))
    }
}

fn vector_norm(n: Option<NormChoice>) -> VectorNorm {
    match n.unwrap_or(NormChoice::Linf) {
        NormChoice::Linf => VectorNorm::LInf,
        NormChoice::L2 => VectorNorm::L2,
    }
}

fn vector_count(a: &VectorCountArgs) -> Result<(), CliError> {
    let v = required(a.vector.clone(), "vector")?;
    let v: [i64; 4] = v
        .as_slice()
        .try_into()
        .map_err(|_| CliError::Config(format!("--vector needs four integers, got {}", v.len())))?;
    let wide = v.map(i128::from);
    if descartes_twice(wide) != Some(0) {
        return Err(bisector_core::error::OrbitError::NotOnCone(v).into());
    }
    let t_max = positive(required(a.tmax, "tmax")?, "tmax")?;
    let norm = vector_norm(a.norm);
    let defaults = VectorOptions::default();
    let opts = VectorOptions {
        slack: positive(a.slack.unwrap_or(defaults.slack), "slack")?,
        cap: a.cap.unwrap_or(defaults.cap),
    };
    let vectors = orbit_vectors(&apollonian_generators(), wide, t_max, &norm, &opts)?;
    let mut norms: Vec<f64> = vectors.iter().map(|w| norm.eval(w)).collect();
    norms.sort_by(f64::total_cmp);
    let ts = grid(a.tmin.unwrap_or(10.0), t_max, a.per_decade.unwrap_or(20))?;
    let rows = ts.iter().map(|&t| vec![t.to_string(), norms.partition_point(|&x| x < t).to_string()]);
    emit(out_path(&a.out), &csv_bytes(&["T", "N"], rows)?)
}

fn conjugator(dir: &Option<Vec<f64>>, t: Option<f64>, align: Option<bool>, s: f64) -> Result<Lorentz, CliError> {
    let dir: Vec3 = match dir {
        None => DEFAULT_BOOST_DIR,
        Some(d) => d
            .as_slice()
            .try_into()
            .map_err(|_| CliError::Config(format!("--boost-dir needs three numbers, got {}", d.len())))?,
    };
    if dir.iter().map(|x| x * x).sum::<f64>() <= 0.0 || dir.iter().any(|x| !x.is_finite()) {
        return Err(CliError::Config("--boost-dir must be a finite nonzero vector".into()));
    }
    let t = t.unwrap_or(DEFAULT_BOOST_T);
    if !t.is_finite() {
        return Err(CliError::Config("--boost-t must be finite".into()));
    }
    let base = Lorentz::boost_along(dir, t);
    if align.unwrap_or(true) {
        Ok(aligned_conjugator(&apollonian_generators(), &base, ALIGN_PROBE_T, s, [FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0])?)
    } else {
        Ok(base)
    }
}

fn default_s(s: Option<f64>) -> Result<f64, CliError> {
    positive(s.unwrap_or(APOLLONIAN_DELTA + DEFAULT_S_OFFSET), "s")
}

fn ball(a: &BallArgs) -> Result<(), CliError> {
    let t_max = positive(a.tmax.unwrap_or(1e4), "tmax")?;
    let g = conjugator(&a.boost_dir, a.boost_t, a.align, default_s(a.s)?)?;
    let defaults = BallOptions::default();
    let opts = BallOptions {
        safety: positive(a.safety.unwrap_or(defaults.safety), "safety")?,
        cap: a.cap.unwrap_or(defaults.cap),
        ..defaults
    };
    let b = group_ball(&apollonian_generators(), &g, t_max, &opts)?;
    let header = ["word_len", "norm", "t", "dir1_x", "dir1_y", "dir1_z", "dir2_x", "dir2_y", "dir2_z"];
    let rows = b.elements.iter().filter(|e| e.norm < t_max).map(|e| {
        let mut row = vec![e.word_len.to_string(), e.norm.to_string()];
        match e.kak {
            Some(k) => {
                row.push(k.t.to_string());
                row.extend(k.dir1.iter().chain(&k.dir2).map(|x| x.to_string()));
            }
            None => row.extend(std::iter::repeat_n(String::new(), 7)),
        }
        row
    });
    emit(out_path(&a.out), &csv_bytes(&header, rows)?)
}

#[derive(Serialize)]
struct BallSummary {
    conjugator: Lorentz,
    chamber_margin: f64,
    exact_pruning: bool,
    elements: usize,
}

impl BallSummary {
    fn of(b: &bisector_core::orbit::GroupBall) -> Self {
        BallSummary {
            conjugator: b.conjugator,
            chamber_margin: chamber_margin(&b.conjugator),
            exact_pruning: b.exact_pruning,
            elements: b.elements.len(),
        }
    }
}

#[derive(Serialize)]
struct MomentEntry {
    a: i32,
    b: i32,
    value: Complex64,
}

#[derive(Serialize)]
struct MomentSample {
    t: f64,
    atoms: usize,
    moments: Vec<MomentEntry>,
}

#[derive(Serialize)]
struct MomentReport {
    s: f64,
    a_max: i32,
    ball: BallSummary,
    series: Vec<MomentSample>,
    /// Largest moment change between consecutive bounds.
    changes: Vec<f64>,
    /// `max |ν̂(a,-b) - (-1)^b conj ν̂(a,b)|` at the largest bound.
    reality_residual: f64,
}

fn ps_moments(a: &PsMomentsArgs) -> Result<(), CliError> {
    let t_max = positive(a.tmax.unwrap_or(1e4), "tmax")?;
    let s = default_s(a.s)?;
    let a_max = a.amax.unwrap_or(4);
    if !(0..=32).contains(&a_max) {
        return Err(CliError::Config(format!("--amax must lie in 0..=32, got {a_max}")));
    }
    let g = conjugator(&a.boost_dir, a.boost_t, a.align, s)?;
    let b = group_ball(&apollonian_generators(), &g, t_max, &BallOptions { safety: 1.0, ..BallOptions::default() })?;
    let halvings = a.halvings.unwrap_or(3);
    let mut series = Vec::new();
    let mut tables: Vec<MomentTable> = Vec::new();
    for k in (0..=halvings).rev() {
        let t = t_max / 2f64.powi(k as i32);
        let m = ps_approx_within(&b, s, t)?;
        let table = MomentTable::compute(&m, a_max)?;
        let moments = table.entries.iter().map(|(&(a, b), &value)| MomentEntry { a, b, value }).collect();
        series.push(MomentSample { t, atoms: m.atoms.len(), moments });
        tables.push(table);
    }
    let changes = tables.windows(2).map(|w| w[0].max_difference(&w[1])).collect();
    let reality_residual = tables.last().map_or(0.0, |t| t.reality_residual());
    let report = MomentReport { s, a_max, ball: BallSummary::of(&b), series, changes, reality_residual };
    emit(out_path(&a.out), &json_bytes(&report)?)
}

#[derive(Serialize)]
struct BisectorSample {
    t: f64,
    sum: Complex64,
    trivial: f64,
    /// `S(T) / S₀(T)`.
    ratio: Complex64,
    /// Calibrated main term (`c = 0` only).
    predicted: Option<Complex64>,
    /// `ratio / (ν̂(a',b') conj ν̂(a,b))` (`c = 0` only).
    double_ratio: Option<Complex64>,
}

#[derive(Serialize)]
struct BisectorOutput {
    index: BisectorIndex,
    delta: f64,
    s: f64,
    ball: BallSummary,
    calibration: Option<f64>,
    moment_product: Option<Complex64>,
    samples: Vec<BisectorSample>,
    /// Largest relative deviation of the last three double ratios from the
    /// final one, or of `|ratio|` when `c ≠ 0`.
    spread_last_two_doublings: f64,
}

/// Bounds `t_max / 2^k` for `k = doublings, …, 0`.
pub fn doubling_bounds(t_max: f64, doublings: u32) -> Vec<f64> {
    (0..=doublings).rev().map(|k| t_max / 2f64.powi(k as i32)).collect()
}

fn bisector(a: &BisectorArgs) -> Result<(), CliError> {
    let idx = required(a.index.clone(), "index")?;
    let [ia, ib, iap, ibp, ic]: [i32; 5] = idx
        .as_slice()
        .try_into()
        .map_err(|_| CliError::Config(format!("--index needs a,b,a',b',c, got {} values", idx.len())))?;
    let index = BisectorIndex::new(ia, ib, iap, ibp, ic)?;
    let t_max = positive(a.tmax.unwrap_or(1e4), "tmax")?;
    let delta = a.delta.unwrap_or(APOLLONIAN_DELTA);
    if !(delta > 1.0 && delta < 2.0) {
        return Err(CliError::Config(format!("--delta must lie in (1, 2), got {delta}")));
    }
    let s = default_s(a.s)?;
    let g = conjugator(&a.boost_dir, a.boost_t, a.align, s)?;
    let b = group_ball(&apollonian_generators(), &g, t_max, &BallOptions { safety: 1.0, ..BallOptions::default() })?;
    let m = ps_approx(&b, s)?;
    let bounds = doubling_bounds(t_max, a.doublings.unwrap_or(3));
    let report = bisector_report(&b, index, &bounds, &m, delta)?;
    let moment_product = if index.c == 0 {
        Some(moment(&m, index.a_prime, index.b_prime)? * moment(&m, index.a, index.b)?.conj())
    } else {
        None
    };
    let mut samples = Vec::new();
    for (k, &(t, sum)) in report.samples.iter().enumerate() {
        let trivial = bisector_sum(&b, BisectorIndex::trivial(), t)?.re;
        let ratio = sum / trivial;
        samples.push(BisectorSample {
            t,
            sum,
            trivial,
            ratio,
            predicted: report.predicted.get(k).map(|p| p.1),
            double_ratio: moment_product.map(|p| ratio / p),
        });
    }
    let tracked: Vec<Complex64> = samples
        .iter()
        .map(|x| x.double_ratio.unwrap_or(Complex64::new(x.ratio.norm(), 0.0)))
        .collect();
    let spread = match tracked.last() {
        Some(&last) if last.norm() > 0.0 => tracked
            .iter()
            .rev()
            .take(3)
            .map(|r| (r - last).norm() / last.norm())
            .fold(0.0, f64::max),
        _ => f64::NAN,
    };
    let out = BisectorOutput {
        index,
        delta,
        s,
        ball: BallSummary::of(&b),
        calibration: report.calibration,
        moment_product,
        samples,
        spread_last_two_doublings: spread,
    };
    emit(out_path(&a.out), &json_bytes(&out)?)
}

#[derive(Serialize)]
struct CpReport {
    root: [i64; 4],
    delta: f64,
    s: f64,
    ball_elements: usize,
    /// In the normalization of the empirical probability measure.
    estimate: PackingConstant,
    count_t_max: i64,
    count: u64,
    /// `N(T) / T^δ` from direct enumeration.
    empirical_constant: f64,
    /// Scale relating the measure's normalization to the direct count.
    implied_normalization: f64,
}

fn cp_estimate(a: &CpEstimateArgs) -> Result<(), CliError> {
    let root = quadruple(&required(a.root.clone(), "root")?, "root")?;
    if root.is_periodic() {
        return Err(CliError::Config(
            "periodic packings have infinitely many circles below any bound; c-p-estimate needs a bounded packing".into(),
        ));
    }
    let delta = a.delta.unwrap_or(APOLLONIAN_DELTA);
    let s = default_s(a.s)?;
    let t_max = positive(a.tmax.unwrap_or(1e4), "tmax")?;
    let count_t = integer_bound(a.count_tmax.unwrap_or(1e5))?;
    let (g, pole) = root_frame(root.0)?;
    let b = group_ball(&apollonian_generators(), &Lorentz::identity(), t_max, &BallOptions::default())?;
    let m = ps_approx(&b, s)?;
    let norm = vector_norm(a.norm);
    let eval = |v: &[f64; 4]| match norm {
        VectorNorm::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        _ => v.iter().map(|x| x.abs()).fold(0.0, f64::max),
    };
    let no_region: Option<fn(Vec3) -> bool> = None;
    let estimate = c_p_estimate(&m, &g, pole, delta, eval, no_region)?;
    let count = enumerate_circles(root, count_t, &CircleOptions::default())?.curvatures.len() as u64;
    let empirical_constant = count as f64 / (count_t as f64).powf(delta);
    let report = CpReport {
        root: root.0,
        delta,
        s,
        ball_elements: b.elements.len(),
        estimate,
        count_t_max: count_t,
        count,
        empirical_constant,
        implied_normalization: empirical_constant / estimate.value,
    };
    emit(out_path(&a.out), &json_bytes(&report)?)
}

#[derive(Serialize)]
struct LineEntry {
    l: i32,
    j: i32,
    r: f64,
    l_op: f64,
    h: f64,
    j_plus: f64,
    j_minus: f64,
    casimir: f64,
    k_casimir: f64,
}

#[derive(Serialize)]
struct LineReport {
    s: f64,
    l_max: i32,
    tol: f64,
    max_residual: f64,
    pass: bool,
    entries: Vec<LineEntry>,
    /// `(l, residual)` of the top-weight raising constant.
    c_constant: Vec<(i32, f64)>,
}

pub fn line_verify_report(s: f64, l_max: i32, tol: f64) -> Result<(f64, serde_json::Value), CliError> {
    let mut entries = Vec::new();
    let mut c_constant = Vec::new();
    for l in 0..=l_max {
        for j in -l..=l {
            let lad = check_ladder(s, l, j)?;
            entries.push(LineEntry {
                l,
                j,
                r: lad.r,
                l_op: lad.l,
                h: lad.h,
                j_plus: lad.j_plus,
                j_minus: lad.j_minus,
                casimir: casimir_residual(s, l, j)?,
                k_casimir: k_casimir_residual(s, l, j)?,
            });
        }
        c_constant.push((l, c_constant_residual(s, l)?));
    }
    let max_residual = entries
        .iter()
        .flat_map(|e| [e.r, e.l_op, e.h, e.j_plus, e.j_minus, e.casimir, e.k_casimir])
        .chain(c_constant.iter().map(|c| c.1))
        .fold(0.0, |m: f64, x| if x.is_nan() { f64::INFINITY } else { m.max(x) });
    let report = LineReport { s, l_max, tol, max_residual, pass: max_residual <= tol, entries, c_constant };
    Ok((max_residual, serde_json::to_value(report)?))
}

fn line_verify(a: &LineVerifyArgs) -> Result<(), CliError> {
    let s = a.s.unwrap_or(APOLLONIAN_DELTA);
    let l_max = a.lmax.unwrap_or(6);
    if !(0..=16).contains(&l_max) {
        return Err(CliError::Config(format!("--lmax must lie in 0..=16, got {l_max}")));
    }
    let tol = a.tol.unwrap_or(1e-9);
    let (max_residual, report) = line_verify_report(s, l_max, tol)?;
    emit(out_path(&a.out), &json_bytes(&report)?)?;
    if max_residual <= tol {
        Ok(())
    } else {
        Err(CliError::Tolerance(format!("line-model residual {max_residual:e} exceeds {tol:e}")))
    }
}

#[derive(Serialize)]
struct KakReport {
    t: f64,
    lorentz_norm: f64,
    dir1: Vec3,
    dir2: Vec3,
    k1: [[f64; 3]; 3],
    k2: [[f64; 3]; 3],
    reconstruction_error: f64,
}

/// Largest form residual accepted for a user-supplied matrix.
const LORENTZ_INPUT_TOL: f64 = 1e-9;

pub fn parse_matrix(src: &str) -> Result<Lorentz, CliError> {
    let text = if src.trim_start().starts_with('[') {
        src.to_string()
    } else {
        std::fs::read_to_string(src).map_err(|e| CliError::io(src, e))?
    };
    let rows: Vec<Vec<f64>> =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("--matrix: expected a 4x4 JSON array: {e}")))?;
    if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
        return Err(CliError::Config("--matrix must be 4x4".into()));
    }
    let mut m = [[0.0; 4]; 4];
    for (dst, src) in m.iter_mut().zip(&rows) {
        dst.copy_from_slice(src);
    }
    let l = Lorentz(m);
    let res = l.form_residual();
    if res.is_nan() || res > LORENTZ_INPUT_TOL || l.0[3][3] < 1.0 {
        return Err(bisector_core::error::LieError::NotLorentz(res).into());
    }
    Ok(l)
}

fn kak_cmd(a: &KakArgs) -> Result<(), CliError> {
    let l = parse_matrix(&required(a.matrix.clone(), "matrix")?)?;
    let k = kak(&l)?;
    let err = k.reconstruct().max_abs_diff(&l);
    let scale = l.0.iter().flatten().fold(1.0, |m: f64, x| m.max(x.abs()));
    if err > 1e-8 * scale {
        // improper matrices pass the form check but have no such decomposition
        return Err(CliError::Config(format!("matrix is not orientation preserving (reconstruction error {err:e})")));
    }
    let report = KakReport {
        t: k.t,
        lorentz_norm: lorentz_norm(&l),
        dir1: k.dir1,
        dir2: k.dir2,
        k1: k.k1.0,
        k2: k.k2.0,
        reconstruction_error: err,
    };
    emit(out_path(&a.out), &json_bytes(&report)?)
}

fn render(a: &RenderSvgArgs) -> Result<(), CliError> {
    let root = quadruple(&required(a.root.clone(), "root")?, "root")?;
    let t_max = a.tmax.unwrap_or(100);
    if t_max < 0 || t_max as f64 > MAX_BOUND {
        return Err(CliError::Config(format!("--tmax out of range: {t_max}")));
    }
    let geom = packing_geometry(root, t_max)?;
    let defaults = SvgOptions::default();
    let opts = SvgOptions {
        size: positive(a.size.unwrap_or(defaults.size), "size")?,
        labels: a.labels.unwrap_or(false),
        min_radius_px: a.min_px.unwrap_or(defaults.min_radius_px),
    };
    if geom.max_tangency_residual > TANGENCY_TOL {
        return Err(CliError::Tolerance(format!(
            "tangency defect {:e} exceeds {TANGENCY_TOL:e}",
            geom.max_tangency_residual
        )));
    }
    emit(out_path(&a.out), render_svg(&geom.shapes, &opts).as_bytes())
}
