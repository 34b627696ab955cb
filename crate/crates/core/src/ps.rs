//! Empirical Patterson-Sullivan measures built from group balls, their
//! harmonic moments, bisector sums and main-term predictions.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::MeasureError;
use crate::harmonics::{bisector_harmonic, sph_harm_dir, BisectorIndex, HarmonicIndex};
use crate::lie::{dot, normalize, poisson_kernel_at, q_conjugator, Lorentz, Rot3, Vec3};
use crate::numeric::{pairwise_sum, pairwise_sum_complex};
use crate::orbit::{group_ball, BallOptions, GeneratorSet, GroupBall};

/// Hausdorff dimension of the Apollonian limit set.
pub const APOLLONIAN_DELTA: f64 = 1.30568;

/// Offset above the critical exponent used by default when weighting atoms.
pub const DEFAULT_S_OFFSET: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub dir: Vec3,
    pub weight: f64,
}

/// Weighted point masses on the boundary sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    pub atoms: Vec<Atom>,
    /// Exponent used for the weights.
    pub s: f64,
    pub total_weight: f64,
}

impl EmpiricalMeasure {
    pub fn new(atoms: Vec<Atom>, s: f64) -> Result<Self, MeasureError> {
        if atoms.is_empty() {
            return Err(MeasureError::EmptyBall);
        }
        let weights: Vec<f64> = atoms.iter().map(|a| a.weight.max(0.0)).collect();
        let total_weight = pairwise_sum(&weights);
        if total_weight <= 0.0 {
            return Err(MeasureError::EmptyBall);
        }
        let atoms = atoms
            .into_iter()
            .map(|a| Atom { dir: a.dir, weight: a.weight.max(0.0) })
            .collect();
        Ok(EmpiricalMeasure { atoms, s, total_weight })
    }

    /// Rescaled to total mass one.
    pub fn normalized(&self) -> Self {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom { dir: a.dir, weight: a.weight / self.total_weight })
            .collect::<Vec<_>>();
        let total_weight = pairwise_sum(&atoms.iter().map(|a| a.weight).collect::<Vec<_>>());
        EmpiricalMeasure { atoms, s: self.s, total_weight }
    }

    /// `∫ f dν / ν(S²)`.
    pub fn mean<F: Fn(Vec3) -> f64 + Sync>(&self, f: F) -> f64 {
        let terms: Vec<f64> = self.atoms.par_iter().map(|a| a.weight * f(a.dir)).collect();
        pairwise_sum(&terms) / self.total_weight
    }

    pub fn mean_complex<F: Fn(Vec3) -> Complex64 + Sync>(&self, f: F) -> Complex64 {
        let terms: Vec<Complex64> = self.atoms.par_iter().map(|a| f(a.dir) * a.weight).collect();
        pairwise_sum_complex(&terms) / self.total_weight
    }

    /// Weighted mean direction (not normalized).
    pub fn barycenter(&self) -> Vec3 {
        [0, 1, 2].map(|i| self.mean(|d| d[i]))
    }
}

/// Probability measure with an atom of weight `e^{-s t(γ)}` at `dir1(γ)` for
/// every non-degenerate ball element.
pub fn ps_approx(ball: &GroupBall, s: f64) -> Result<EmpiricalMeasure, MeasureError> {
    ps_approx_within(ball, s, ball.t_max)
}

/// As [`ps_approx`], using only elements of norm below `t`.
pub fn ps_approx_within(ball: &GroupBall, s: f64, t: f64) -> Result<EmpiricalMeasure, MeasureError> {
    let atoms: Vec<Atom> = ball
        .within(t)
        .filter_map(|e| e.kak.as_ref())
        .map(|k| Atom { dir: k.dir1, weight: (-s * k.t).exp() })
        .collect();
    Ok(EmpiricalMeasure::new(atoms, s)?.normalized())
}

/// `∫ Y_{ab} dν` for the probability-normalized measure.
pub fn moment(measure: &EmpiricalMeasure, a: i32, b: i32) -> Result<Complex64, MeasureError> {
    let idx = HarmonicIndex::spherical(a, b)?;
    let values: Vec<Complex64> = measure
        .atoms
        .par_iter()
        .map(|at| sph_harm_dir(idx, at.dir).map(|y| y * at.weight))
        .collect::<Result<_, _>>()?;
    Ok(pairwise_sum_complex(&values) / measure.total_weight)
}

/// Moments `ν̂(a, b)` for all `|b| ≤ a ≤ a_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub entries: BTreeMap<(i32, i32), Complex64>,
}

impl MomentTable {
    pub fn compute(measure: &EmpiricalMeasure, a_max: i32) -> Result<Self, MeasureError> {
        let mut entries = BTreeMap::new();
        for a in 0..=a_max {
            for b in -a..=a {
                entries.insert((a, b), moment(measure, a, b)?);
            }
        }
        Ok(MomentTable { entries })
    }

    pub fn get(&self, a: i32, b: i32) -> Option<Complex64> {
        self.entries.get(&(a, b)).copied()
    }

    /// Largest violation of `ν̂(a,-b) = (-1)^b conj ν̂(a,b)`.
    pub fn reality_residual(&self) -> f64 {
        self.entries
            .iter()
            .filter_map(|(&(a, b), v)| {
                let m = self.get(a, -b)?;
                let sign = if b.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                Some((m - v.conj() * sign).norm())
            })
            .fold(0.0, f64::max)
    }

    /// Largest entrywise difference to another table over shared keys.
    pub fn max_difference(&self, other: &MomentTable) -> f64 {
        self.entries
            .iter()
            .filter_map(|(k, v)| other.entries.get(k).map(|w| (v - w).norm()))
            .fold(0.0, f64::max)
    }
}

/// `Σ_{|γ| < T} Y_{a'b'c}(k₁(γ)) conj(Y_{abc}(k₂⁻¹(γ)))` over the ball.
pub fn bisector_sum(ball: &GroupBall, index: BisectorIndex, t: f64) -> Result<Complex64, MeasureError> {
    let kaks: Vec<_> = ball.within(t).filter_map(|e| e.kak).collect();
    let terms: Vec<Complex64> = kaks
        .par_iter()
        .map(|k| bisector_harmonic(index, k))
        .collect::<Result<_, _>>()?;
    Ok(pairwise_sum_complex(&terms))
}

/// Bisector sums sampled along a sequence of bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BisectorSumReport {
    pub index: BisectorIndex,
    pub samples: Vec<(f64, Complex64)>,
    /// Calibrated main-term prediction at each sample bound (`c = 0` only).
    pub predicted: Vec<(f64, Complex64)>,
    /// The scalar fitted from the trivial index at the largest bound.
    pub calibration: Option<f64>,
}

pub fn bisector_report(
    ball: &GroupBall,
    index: BisectorIndex,
    bounds: &[f64],
    measure: &EmpiricalMeasure,
    delta: f64,
) -> Result<BisectorSumReport, MeasureError> {
    let samples = bounds
        .iter()
        .map(|&t| bisector_sum(ball, index, t).map(|s| (t, s)))
        .collect::<Result<Vec<_>, _>>()?;
    let (predicted, calibration) = match bounds.last() {
        Some(&t_top) if index.c == 0 => {
            let cal = calibrate(ball, delta, t_top)?;
            let p = bounds
                .iter()
                .map(|&t| main_term_predict(measure, index, delta, t, cal).map(|v| (t, v)))
                .collect::<Result<Vec<_>, _>>()?;
            (p, Some(cal))
        }
        _ => (Vec::new(), None),
    };
    Ok(BisectorSumReport { index, samples, predicted, calibration })
}

/// Scalar making the trivial-index prediction match the ball count at `t`.
pub fn calibrate(ball: &GroupBall, delta: f64, t: f64) -> Result<f64, MeasureError> {
    let count = ball.within(t).count() as f64;
    if count == 0.0 {
        return Err(MeasureError::EmptyBall);
    }
    Ok(count / (PI / (delta * (delta - 1.0)) * t.powf(delta)))
}

/// Leading term `κ π/(δ(δ-1)) ν̂(a',b') conj(ν̂(a,b)) T^δ` for `c = 0`.
///
/// `T` bounds the Lorentz norm `e^t`, which is the square of the operator
/// norm on `PSL(2,C)`; hence the exponent `δ`. `calibration` is `κ`, the
/// absolute normalization that a finite ball cannot determine.
pub fn main_term_predict(
    measure: &EmpiricalMeasure,
    index: BisectorIndex,
    delta: f64,
    t: f64,
    calibration: f64,
) -> Result<Complex64, MeasureError> {
    if index.c != 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let left = moment(measure, index.a_prime, index.b_prime)?;
    let right = moment(measure, index.a, index.b)?;
    Ok(left * right.conj() * (calibration * PI / (delta * (delta - 1.0)) * t.powf(delta)))
}

/// Two factors of the Patterson-Sullivan expression for the packing constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PackingConstant {
    /// `∫ (|z|² + 1)^δ dν` over the chosen region.
    pub stereographic_factor: f64,
    /// `∫ dν(k) / ‖g k u‖^δ`.
    pub orbit_factor: f64,
    /// The same with `S₁ g` in place of `g`.
    pub odd_orbit_factor: f64,
    /// `π/(δ(δ-1))` times the factor products, in the measure's normalization.
    pub value: f64,
}

/// Largest finite value of the stereographic integrand tolerated on atoms.
pub const DIVERGENCE_LIMIT: f64 = 1e8;

/// Estimates the packing constant from atoms of a probability measure.
///
/// `u_dir` is the direction of the null vector `u = (u_dir, 1)` with
/// `g u` equal to the root on the Lorentz side; it is also the pole of the
/// stereographic coordinate `z`, where `|z|² + 1 = 2/(1 - ⟨ξ, u_dir⟩)`.
/// `region` restricts the first factor (one period, or the disk `G₄`).
/// `norm` acts on Descartes-side vectors.
pub fn c_p_estimate<N, R>(
    measure: &EmpiricalMeasure,
    g: &Lorentz,
    u_dir: Vec3,
    delta: f64,
    norm: N,
    region: Option<R>,
) -> Result<PackingConstant, MeasureError>
where
    N: Fn(&[f64; 4]) -> f64 + Sync,
    R: Fn(Vec3) -> bool + Sync,
{
    let integrand = |d: Vec3| (2.0 / (1.0 - dot(d, u_dir))).powf(delta);
    let worst = measure
        .atoms
        .iter()
        .filter(|a| a.weight > 0.0 && region.as_ref().is_none_or(|r| r(a.dir)))
        .map(|a| integrand(a.dir))
        .fold(0.0, f64::max);
    if !worst.is_finite() || worst > DIVERGENCE_LIMIT {
        return Err(MeasureError::Divergent(worst));
    }
    let stereographic_factor = measure.mean(|d| {
        if region.as_ref().is_none_or(|r| r(d)) {
            integrand(d)
        } else {
            0.0
        }
    });
    let q = q_conjugator();
    let descartes = |v: [f64; 4]| -> [f64; 4] { [0, 1, 2, 3].map(|i| (0..4).map(|k| q[i][k] * v[k]).sum()) };
    let s1 = |v: [f64; 4]| -> [f64; 4] {
        let mut w = v;
        w[0] = 2.0 * (v[1] + v[2] + v[3]) - v[0];
        w
    };
    let orbit_factor = measure.mean(|d| norm(&descartes(g.apply([d[0], d[1], d[2], 1.0]))).powf(-delta));
    let odd_orbit_factor = measure.mean(|d| norm(&s1(descartes(g.apply([d[0], d[1], d[2], 1.0])))).powf(-delta));
    let value = PI / (delta * (delta - 1.0)) * stereographic_factor * (orbit_factor + odd_orbit_factor);
    Ok(PackingConstant { stereographic_factor, orbit_factor, odd_orbit_factor, value })
}

/// Lorentz transformation taking `(e3, 1)` to the Lorentz-side image of a
/// curvature quadruple, together with the pole `e3`.
pub fn root_frame(root: [i64; 4]) -> Result<(Lorentz, Vec3), MeasureError> {
    let q = q_conjugator();
    let v: Vec<f64> = (0..4).map(|i| (0..4).map(|k| q[i][k] * root[k] as f64).sum()).collect();
    if v[3] <= 0.0 {
        return Err(MeasureError::EmptyBall);
    }
    let axis = [v[0] / v[3], v[1] / v[3], v[2] / v[3]];
    let pole = [0.0, 0.0, 1.0];
    let g = Lorentz::boost_along(axis, v[3].ln()) * Lorentz::from_rotation(&Rot3::aligning(pole, axis));
    Ok((g, pole))
}

/// Composes `base` with a rotation so that the mean atom direction of a
/// probe ball of radius `t_probe` points along `target`.
pub fn aligned_conjugator(
    gens: &GeneratorSet,
    base: &Lorentz,
    t_probe: f64,
    s: f64,
    target: Vec3,
) -> Result<Lorentz, MeasureError> {
    let probe = group_ball(gens, base, t_probe, &BallOptions { safety: 1.0, ..BallOptions::default() })
        .map_err(|_| MeasureError::EmptyBall)?;
    let mean = normalize(ps_approx(&probe, s)?.barycenter());
    let k = Rot3::aligning(mean, normalize(target));
    // the conjugated group sees K k1, so its atoms move by K
    Ok(*base * Lorentz::from_rotation(&k.transpose()))
}

/// The measure of the conjugated group `g⁻¹Γg`, obtained from that of `Γ` by
/// reweighting each atom with `P(gj, ξ)^s` and moving it to `g⁻¹ξ`.
pub fn conjugated_measure(measure: &EmpiricalMeasure, g: &Lorentz) -> Result<EmpiricalMeasure, MeasureError> {
    let g_inv = g.inverse();
    let atoms = measure
        .atoms
        .iter()
        .map(|a| Atom {
            dir: g_inv.act_on_boundary(a.dir),
            weight: a.weight * poisson_kernel_at(g, a.dir).powf(measure.s),
        })
        .collect();
    Ok(EmpiricalMeasure::new(atoms, measure.s)?.normalized())
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Quaternion([f64; 4]);

impl Quaternion {
    fn complex(z: Complex64) -> Self {
        Quaternion([z.re, z.im, 0.0, 0.0])
    }

    fn inverse(self) -> Self {
        let [w, x, y, z] = self.0;
        let n = w * w + x * x + y * y + z * z;
        Quaternion([w / n, -x / n, -y / n, -z / n])
    }
}

impl std::ops::Mul for Quaternion {
    type Output = Quaternion;

    fn mul(self, o: Quaternion) -> Quaternion {
        let [a1, b1, c1, d1] = self.0;
        let [a2, b2, c2, d2] = o.0;
        Quaternion([
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        ])
    }
}

impl std::ops::Add for Quaternion {
    type Output = Quaternion;

    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion([0, 1, 2, 3].map(|i| self.0[i] + o.0[i]))
    }
}

const QJ: Quaternion = Quaternion([0.0, 0.0, 1.0, 0.0]);

/// `(a, b; c, d)` acting on upper half-space as `P ↦ (aP + c)(bP + d)⁻¹`.
fn act_half_space(m: [Complex64; 4], p: Quaternion) -> Quaternion {
    let [a, b, c, d] = m.map(Quaternion::complex);
    (a * p + c) * (b * p + d).inverse()
}

/// Upper half-space to unit ball, `w ↦ (w - j)(-j w + 1)⁻¹`; returns the
/// `(1, i, j)` components.
fn to_ball(w: Quaternion) -> Vec3 {
    let minus_j = Quaternion([0.0, 0.0, -1.0, 0.0]);
    let one = Quaternion([1.0, 0.0, 0.0, 0.0]);
    let b = (w + minus_j) * (minus_j * w + one).inverse();
    [b.0[0], b.0[1], b.0[2]]
}

fn ball_poisson(x: Vec3, xi: Vec3) -> f64 {
    let d = [x[0] - xi[0], x[1] - xi[1], x[2] - xi[2]];
    (1.0 - dot(x, x)) / dot(d, d)
}

/// Boundary point with spherical angles `(θ, φ)` in the ball coordinates.
pub fn ball_boundary_point(theta: f64, phi: f64) -> Vec3 {
    [-phi.cos() * theta.sin(), -phi.sin() * theta.sin(), theta.cos()]
}

/// `d/dε P^δ(exp(ε J⁺) j; φ, θ)` at `ε = 0` by central differences.
pub fn poisson_derivative(delta: f64, theta: f64, phi: f64, eps: f64) -> Complex64 {
    let xi = ball_boundary_point(theta, phi);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let along = |c: Complex64| {
        let at = |e: f64| ball_poisson(to_ball(act_half_space([one, zero, c * e, one], QJ)), xi).powf(delta);
        (at(eps) - at(-eps)) / (2.0 * eps)
    };
    Complex64::new(along(one), along(Complex64::new(0.0, 1.0)))
}

/// Residuals of the finite-difference derivative against `-δ sinθ e^{iφ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonCheck {
    pub delta: f64,
    pub eps: f64,
    pub max_residual: f64,
    /// `(θ, φ, residual)` over the grid.
    pub grid: Vec<(f64, f64, f64)>,
}

pub fn poisson_derivative_check(delta: f64, n_theta: usize, n_phi: usize, eps: f64) -> PoissonCheck {
    let mut grid = Vec::with_capacity(n_theta * n_phi);
    for i in 0..n_theta {
        let theta = PI * i as f64 / (n_theta.max(2) - 1) as f64;
        for k in 0..n_phi {
            let phi = 2.0 * PI * k as f64 / n_phi as f64;
            let got = poisson_derivative(delta, theta, phi, eps);
            let want = Complex64::from_polar(-delta * theta.sin(), phi);
            grid.push((theta, phi, (got - want).norm()));
        }
    }
    let max_residual = grid.iter().map(|g| g.2).fold(0.0, f64::max);
    PoissonCheck { delta, eps, max_residual, grid }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_vanishes_at_the_pole() {
        let d = poisson_derivative(1.3, 0.0, 0.7, 1e-5);
        assert!(d.norm() < 1e-9);
    }

    #[test]
    fn derivative_matches_on_grid() {
        for delta in [1.0, 1.30568, 1.5] {
            let c = poisson_derivative_check(delta, 32, 32, 1e-5);
            assert!(c.max_residual <= 1e-6, "delta {delta}: {}", c.max_residual);
        }
    }

    #[test]
    fn quaternion_inverse() {
        let q = Quaternion([0.3, -1.2, 0.5, 2.0]);
        let p = q * q.inverse();
        assert!((p.0[0] - 1.0).abs() < 1e-15 && p.0[1..].iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn empty_measure_is_rejected() {
        assert_eq!(EmpiricalMeasure::new(vec![], 1.0), Err(MeasureError::EmptyBall));
    }

    #[test]
    fn antipodal_symmetric_measure_has_no_odd_moments() {
        let mut atoms = Vec::new();
        for d in [[0.3, 0.4, (1.0f64 - 0.25).sqrt()], [0.6, -0.8, 0.0]] {
            atoms.push(Atom { dir: d, weight: 1.0 });
            atoms.push(Atom { dir: d.map(|x| -x), weight: 1.0 });
        }
        let m = EmpiricalMeasure::new(atoms, 1.0).unwrap();
        assert!(moment(&m, 1, 0).unwrap().norm() < 1e-12);
        assert!((moment(&m, 0, 0).unwrap() - 1.0).norm() < 1e-12);
    }
}
