//! Spherical harmonics on `K/M` and generalized (Wigner) harmonics on `K`,
//! orthonormal for the probability Haar measure, and the bisector product.
//!
//! `Y_{a;bc}(α, β, γ) = e^{ibα} √(2a+1) d^a_{bc}(β) e^{icγ}` in the `X-Z-X`
//! Euler chart of [`crate::lie`], where `d^a_{bc}` is the standard small
//! Wigner function. For `c = 0` this is `√(4π)` times the Condon-Shortley
//! spherical harmonic of the direction `k e1` measured from the pole `e1`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::HarmonicError;
use crate::lie::{spherical_angles, KakData, Rot3, Vec3, DEGENERACY_THRESHOLD};
use crate::numeric::ln_factorial;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HarmonicIndex {
    pub a: i32,
    pub b: i32,
    pub c: i32,
}

impl HarmonicIndex {
    pub fn new(a: i32, b: i32, c: i32) -> Result<Self, HarmonicError> {
        if a < 0 || b.abs() > a || c.abs() > a {
            return Err(HarmonicError::InvalidIndex {
                a: a.into(),
                b: b.into(),
                c: c.into(),
            });
        }
        Ok(HarmonicIndex { a, b, c })
    }

    /// A `K/M` index (`c = 0`).
    pub fn spherical(a: i32, b: i32) -> Result<Self, HarmonicError> {
        HarmonicIndex::new(a, b, 0)
    }
}

/// Index of `Y_{aa';bb'c}`: `(a, b)` is evaluated on `k₂⁻¹` (conjugated),
/// `(a', b')` on `k₁`, and `c` is the shared `M`-weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BisectorIndex {
    pub a: i32,
    pub b: i32,
    pub a_prime: i32,
    pub b_prime: i32,
    pub c: i32,
}

impl BisectorIndex {
    pub fn new(a: i32, b: i32, a_prime: i32, b_prime: i32, c: i32) -> Result<Self, HarmonicError> {
        HarmonicIndex::new(a, b, c)?;
        HarmonicIndex::new(a_prime, b_prime, c)?;
        Ok(BisectorIndex { a, b, a_prime, b_prime, c })
    }

    pub fn trivial() -> Self {
        BisectorIndex { a: 0, b: 0, a_prime: 0, b_prime: 0, c: 0 }
    }

    pub fn right(&self) -> HarmonicIndex {
        HarmonicIndex { a: self.a, b: self.b, c: self.c }
    }

    pub fn left(&self) -> HarmonicIndex {
        HarmonicIndex { a: self.a_prime, b: self.b_prime, c: self.c }
    }

    /// Exchanges the two factors.
    pub fn swapped(&self) -> Self {
        BisectorIndex {
            a: self.a_prime,
            b: self.b_prime,
            a_prime: self.a,
            b_prime: self.b,
            c: self.c,
        }
    }
}

/// Jacobi polynomial `P_n^{(α,β)}(x)` by the three-term recurrence.
fn jacobi(n: u32, alpha: f64, beta: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut p0 = 1.0;
    let mut p1 = (alpha + 1.0) + (alpha + beta + 2.0) * (x - 1.0) / 2.0;
    for k in 2..=n {
        let k = f64::from(k);
        let s = 2.0 * k + alpha + beta;
        let a1 = 2.0 * k * (k + alpha + beta) * (s - 2.0);
        let a2 = (s - 1.0) * (alpha * alpha - beta * beta);
        let a3 = (s - 2.0) * (s - 1.0) * s;
        let a4 = 2.0 * (k + alpha - 1.0) * (k + beta - 1.0) * s;
        let p2 = ((a2 + a3 * x) * p1 - a4 * p0) / a1;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Small Wigner function `d^j_{m' m}(β)`.
pub fn wigner_d(j: i32, mp: i32, m: i32, beta: f64) -> Result<f64, HarmonicError> {
    HarmonicIndex::new(j, mp, m)?;
    // k = min(j+m, j-m, j+m', j-m') picks the Jacobi representation with
    // non-negative parameters.
    let cands = [
        (j + m, mp - m, mp - m),
        (j - m, m - mp, 0),
        (j + mp, m - mp, 0),
        (j - mp, mp - m, mp - m),
    ];
    let &(k, a, lambda) = cands.iter().min_by_key(|c| c.0).expect("non-empty");
    let b = 2 * j - 2 * k - a;
    // binom(2j-k, k+a) / binom(k+b, b)
    let ln_binom_top = ln_factorial((2 * j - k) as u32)
        - ln_factorial((k + a) as u32)
        - ln_factorial((2 * j - 2 * k - a) as u32);
    let ln_binom_bot = ln_factorial((k + b) as u32) - ln_factorial(b as u32) - ln_factorial(k as u32);
    let pref = (0.5 * (ln_binom_top - ln_binom_bot)).exp();
    let sign = if lambda.rem_euclid(2) == 1 { -1.0 } else { 1.0 };
    let (sh, ch) = (beta / 2.0).sin_cos();
    let poly = jacobi(k as u32, f64::from(a), f64::from(b), beta.cos());
    Ok(sign * pref * sh.powi(a) * ch.powi(b) * poly)
}

/// `y_{a;bc}(θ) = √(2a+1) d^a_{bc}(θ)`.
pub fn small_y(idx: HarmonicIndex, theta: f64) -> Result<f64, HarmonicError> {
    Ok((2.0 * f64::from(idx.a) + 1.0).sqrt() * wigner_d(idx.a, idx.b, idx.c, theta)?)
}

/// `Y_{a;bc}(φ, θ, φ₂)`.
pub fn gen_sph_harm(idx: HarmonicIndex, phi: f64, theta: f64, phi2: f64) -> Result<Complex64, HarmonicError> {
    let y = small_y(idx, theta)?;
    let phase = f64::from(idx.b) * phi + f64::from(idx.c) * phi2;
    Ok(Complex64::from_polar(y, phase))
}

/// `Y_{a;bc}` evaluated on a rotation matrix.
pub fn gen_sph_harm_rot(idx: HarmonicIndex, k: &Rot3) -> Result<Complex64, HarmonicError> {
    let (alpha, beta, gamma) = k.euler();
    gen_sph_harm(idx, alpha, beta, gamma)
}

/// Normalized associated Legendre function `N_{lm} P_l^m(x)` for `m ≥ 0`
/// including the Condon-Shortley phase, with
/// `N_{lm} = √((2l+1) (l-m)! / (l+m)!)`.
fn normalized_legendre(l: i32, m: i32, x: f64) -> f64 {
    let s = (1.0 - x * x).max(0.0).sqrt();
    // p_mm = (-1)^m √((2m+1)!!/(2m)!!) s^m, iterated stably
    let mut pmm = 1.0;
    for i in 1..=m {
        let i = f64::from(i);
        pmm *= -((2.0 * i + 1.0) / (2.0 * i)).sqrt() * s;
    }
    if l == m {
        return pmm;
    }
    let mf = f64::from(m);
    // normalized recurrence in l
    let mut pm1 = x * (2.0 * mf + 3.0).sqrt() * pmm;
    if l == m + 1 {
        return pm1;
    }
    for ll in (m + 2)..=l {
        let lf = f64::from(ll);
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
        let p = a * (x * pm1 - b * pmm);
        pmm = pm1;
        pm1 = p;
    }
    pm1
}

/// `Y_{ab}(θ, φ)`, normalized for the probability measure on the sphere.
pub fn sph_harm(idx: HarmonicIndex, theta: f64, phi: f64) -> Result<Complex64, HarmonicError> {
    if idx.c != 0 {
        return Err(HarmonicError::InvalidIndex {
            a: idx.a.into(),
            b: idx.b.into(),
            c: idx.c.into(),
        });
    }
    HarmonicIndex::new(idx.a, idx.b, 0)?;
    let m = idx.b.abs();
    let p = normalized_legendre(idx.a, m, theta.cos());
    let y = Complex64::from_polar(p, f64::from(m) * phi);
    if idx.b < 0 {
        let sign = if m % 2 == 1 { -1.0 } else { 1.0 };
        Ok(y.conj() * sign)
    } else {
        Ok(y)
    }
}

/// `Y_{ab}` of a unit direction, with `e1` as the pole.
pub fn sph_harm_dir(idx: HarmonicIndex, dir: Vec3) -> Result<Complex64, HarmonicError> {
    let (theta, phi) = spherical_angles(dir);
    sph_harm(idx, theta, phi)
}

/// `Y_{a';b'c}(k₁) · conj(Y_{a;bc}(k₂⁻¹))`.
///
/// For `c = 0` only the boundary directions enter. For `c ≠ 0` the Euler angles
/// of the gauge-fixed `k₁, k₂` are used; the product is gauge invariant as long
/// as the Cartan decomposition is non-degenerate.
pub fn bisector_harmonic(idx: BisectorIndex, kak: &KakData) -> Result<Complex64, HarmonicError> {
    BisectorIndex::new(idx.a, idx.b, idx.a_prime, idx.b_prime, idx.c)?;
    if idx.c == 0 {
        let left = sph_harm_dir(idx.left(), kak.dir1)?;
        let right = sph_harm_dir(idx.right(), kak.dir2)?;
        return Ok(left * right.conj());
    }
    if kak.t.cosh() - 1.0 <= DEGENERACY_THRESHOLD {
        return Err(HarmonicError::GaugeDependent { c: idx.c, t: kak.t });
    }
    let left = gen_sph_harm_rot(idx.left(), &kak.k1)?;
    let right = gen_sph_harm_rot(idx.right(), &kak.k2.transpose())?;
    Ok(left * right.conj())
}

/// Probability-normalized product quadrature on the sphere: Gauss-Legendre in
/// `cos θ` times the trapezoid rule in `φ`. Returns `(θ, φ, weight)` nodes.
pub fn sphere_quadrature(n_theta: usize, n_phi: usize) -> Vec<(f64, f64, f64)> {
    let (x, w) = crate::numeric::gauss_legendre(n_theta);
    let mut out = Vec::with_capacity(n_theta * n_phi);
    for (xi, wi) in x.iter().zip(&w) {
        let theta = xi.clamp(-1.0, 1.0).acos();
        for k in 0..n_phi {
            let phi = 2.0 * PI * k as f64 / n_phi as f64;
            out.push((theta, phi, wi / 2.0 / n_phi as f64));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_order_values() {
        let i00 = HarmonicIndex::spherical(0, 0).unwrap();
        assert!((sph_harm(i00, 0.7, 1.9).unwrap() - 1.0).norm() < 1e-15);
        let i10 = HarmonicIndex::spherical(1, 0).unwrap();
        let v = sph_harm(i10, 0.7, 1.9).unwrap();
        assert!((v - 3f64.sqrt() * 0.7f64.cos()).norm() < 1e-14);
        let i11 = HarmonicIndex::spherical(1, 1).unwrap();
        // √(4π) · (−√(3/8π) sinθ e^{iφ})
        let v = sph_harm(i11, 0.7, 1.9).unwrap();
        let want = Complex64::from_polar(-(1.5f64).sqrt() * 0.7f64.sin(), 1.9);
        assert!((v - want).norm() < 1e-14);
    }

    #[test]
    fn rejects_bad_indices() {
        assert!(HarmonicIndex::new(1, 2, 0).is_err());
        assert!(HarmonicIndex::new(2, 0, -3).is_err());
        assert!(HarmonicIndex::new(-1, 0, 0).is_err());
        assert!(sph_harm(HarmonicIndex { a: 2, b: 1, c: 1 }, 0.1, 0.2).is_err());
    }

    #[test]
    fn wigner_d_spin_one_table() {
        let b = 0.83_f64;
        let (s, c) = b.sin_cos();
        let r2 = 2f64.sqrt();
        let table = [
            ((1, 1), (1.0 + c) / 2.0),
            ((1, 0), -s / r2),
            ((1, -1), (1.0 - c) / 2.0),
            ((0, 1), s / r2),
            ((0, 0), c),
            ((0, -1), -s / r2),
            ((-1, 1), (1.0 - c) / 2.0),
            ((-1, 0), s / r2),
            ((-1, -1), (1.0 + c) / 2.0),
        ];
        for ((mp, m), want) in table {
            assert!((wigner_d(1, mp, m, b).unwrap() - want).abs() < 1e-15, "{mp} {m}");
        }
    }

    #[test]
    fn c_zero_reduces_to_spherical() {
        for a in 0..=6 {
            for b in -a..=a {
                let g = gen_sph_harm(HarmonicIndex::new(a, b, 0).unwrap(), 0.4, 1.3, 2.2).unwrap();
                let s = sph_harm(HarmonicIndex::spherical(a, b).unwrap(), 1.3, 0.4).unwrap();
                assert!((g - s).norm() < 1e-12, "{a} {b}");
            }
        }
    }

    #[test]
    fn bisector_on_boost() {
        let kak = crate::lie::kak(&crate::lie::Lorentz::boost(1.2)).unwrap();
        let v = bisector_harmonic(BisectorIndex::trivial(), &kak).unwrap();
        assert!((v - 1.0).norm() < 1e-15);
        let v = bisector_harmonic(BisectorIndex::new(1, 0, 0, 0, 0).unwrap(), &kak).unwrap();
        assert!((v - 3f64.sqrt()).norm() < 1e-14);
    }
}
