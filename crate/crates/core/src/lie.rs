//! `PSL(2,C)` and `SO°(3,1)`: the explicit isomorphism between them, the
//! operator norm, Cartan (KAK) coordinates with boundary directions, the
//! Descartes form with its conjugator, and the Poisson kernel.
//!
//! Conventions:
//! * the Lorentz form is `J = diag(1, 1, 1, -1)` on coordinates `(x, y, z, w)`;
//! * `A` acts by boosts in the `x-w` plane, so the identity coset of `K/M` is
//!   `e1` and all spherical angles on the boundary use `e1` as the pole:
//!   `dir = (cos θ, sin θ cos φ, sin θ sin φ)`;
//! * `M` is the group of rotations about `e1`; Euler angles of a rotation are
//!   taken in the `X-Z-X` chart `R_x(α) R_z(β) R_x(γ)`, which is the usual
//!   `Z-Y-Z` chart in the right-handed frame `(e2, e3, e1)`.
//!
//! The ball-model formulas elsewhere put the pole at `j = e3`; nothing in this
//! module converts between the two implicitly.

use std::f64::consts::PI;
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::LieError;

pub type Vec3 = [f64; 3];

/// Elements with `L[4][4] - 1` at or below this are treated as rotations.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

const UNIMODULAR_TOL: f64 = 1e-12;

/// A 2×2 complex matrix of determinant one, modulo sign.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Moebius {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Moebius {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self, LieError> {
        let m = Moebius { a, b, c, d };
        let res = (m.det() - 1.0).norm();
        if res > UNIMODULAR_TOL {
            return Err(LieError::NotUnimodular(res));
        }
        Ok(m)
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Moebius { a: one, b: zero, c: zero, d: one }
    }

    /// `diag(e^{t/2}, e^{-t/2})`.
    pub fn diagonal(t: f64) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Moebius {
            a: Complex64::new((t / 2.0).exp(), 0.0),
            b: zero,
            c: zero,
            d: Complex64::new((-t / 2.0).exp(), 0.0),
        }
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn inverse(&self) -> Self {
        Moebius { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// Entrywise comparison up to the global sign ambiguity.
    pub fn approx_eq(&self, other: &Moebius, tol: f64) -> bool {
        let diff = |s: f64| {
            [
                self.a - other.a * s,
                self.b - other.b * s,
                self.c - other.c * s,
                self.d - other.d * s,
            ]
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
        };
        diff(1.0) <= tol || diff(-1.0) <= tol
    }

    /// Largest singular value.
    pub fn max_singular_value(&self) -> f64 {
        let fro = self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr() + self.d.norm_sqr();
        let det = self.det().norm();
        // σ₁² + σ₂² = ‖g‖_F², σ₁σ₂ = |det|
        let disc = (fro * fro - 4.0 * det * det).max(0.0).sqrt();
        ((fro + disc) / 2.0).sqrt()
    }
}

impl Mul for Moebius {
    type Output = Moebius;

    fn mul(self, o: Moebius) -> Moebius {
        Moebius {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }
}

/// A 3×3 rotation matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rot3(pub [[f64; 3]; 3]);

impl Rot3 {
    pub fn identity() -> Self {
        Rot3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    /// Rotation about `e1` (the `M` direction).
    pub fn about_x(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Rot3([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
    }

    /// Rotation about `e3`, tilting `e1` towards `e2`.
    pub fn about_z(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Rot3([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    }

    pub fn about_y(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Rot3([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    }

    /// `R_x(α) R_z(β) R_x(γ)`.
    pub fn from_euler(alpha: f64, beta: f64, gamma: f64) -> Self {
        Rot3::about_x(alpha) * Rot3::about_z(beta) * Rot3::about_x(gamma)
    }

    /// Euler angles `(α, β, γ)` with `β ∈ [0, π]`; at the poles `γ = 0`.
    pub fn euler(&self) -> (f64, f64, f64) {
        let r = &self.0;
        let beta = r[0][0].clamp(-1.0, 1.0).acos();
        if beta.sin().abs() < 1e-12 {
            let alpha = r[2][1].atan2(r[1][1]);
            return (alpha, beta, 0.0);
        }
        let alpha = r[2][0].atan2(r[1][0]);
        let gamma = r[0][2].atan2(-r[0][1]);
        (alpha, beta, gamma)
    }

    pub fn transpose(&self) -> Self {
        let mut t = [[0.0; 3]; 3];
        for (i, row) in self.0.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                t[j][i] = *v;
            }
        }
        Rot3(t)
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        let r = &self.0;
        [
            r[0][0] * v[0] + r[0][1] * v[1] + r[0][2] * v[2],
            r[1][0] * v[0] + r[1][1] * v[1] + r[1][2] * v[2],
            r[2][0] * v[0] + r[2][1] * v[1] + r[2][2] * v[2],
        ]
    }

    /// Rodrigues rotation taking unit vector `from` onto unit vector `to`.
    pub fn aligning(from: Vec3, to: Vec3) -> Self {
        let v = cross(from, to);
        let c = dot(from, to);
        let s2 = dot(v, v);
        if s2 < 1e-30 {
            if c > 0.0 {
                return Rot3::identity();
            }
            // antipodal: half-turn about any axis orthogonal to `from`
            let trial = if from[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
            let axis = normalize(cross(from, trial));
            let mut m = [[0.0; 3]; 3];
            for (i, row) in m.iter_mut().enumerate() {
                for (j, e) in row.iter_mut().enumerate() {
                    *e = 2.0 * axis[i] * axis[j] - if i == j { 1.0 } else { 0.0 };
                }
            }
            return Rot3(m);
        }
        let k = [[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]];
        let f = (1.0 - c) / s2;
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let kk: f64 = (0..3).map(|l| k[i][l] * k[l][j]).sum();
                m[i][j] = if i == j { 1.0 } else { 0.0 } + k[i][j] + f * kk;
            }
        }
        Rot3(m)
    }
}

impl Mul for Rot3 {
    type Output = Rot3;

    fn mul(self, o: Rot3) -> Rot3 {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = (0..3).map(|l| self.0[i][l] * o.0[l][j]).sum();
            }
        }
        Rot3(m)
    }
}

/// A 4×4 real matrix preserving `diag(1,1,1,-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lorentz(pub [[f64; 4]; 4]);

impl Lorentz {
    pub fn identity() -> Self {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Lorentz(m)
    }

    /// Boost of rapidity `t` in the `x-w` plane.
    pub fn boost(t: f64) -> Self {
        let mut m = Lorentz::identity();
        m.0[0][0] = t.cosh();
        m.0[3][3] = t.cosh();
        m.0[0][3] = t.sinh();
        m.0[3][0] = t.sinh();
        m
    }

    /// Boost of rapidity `t` along the unit spatial direction `dir`.
    pub fn boost_along(dir: Vec3, t: f64) -> Self {
        let n = normalize(dir);
        let (ch, sh) = (t.cosh(), t.sinh());
        let mut m = Lorentz::identity();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] += (ch - 1.0) * n[i] * n[j];
            }
            m.0[i][3] = sh * n[i];
            m.0[3][i] = sh * n[i];
        }
        m.0[3][3] = ch;
        m
    }

    pub fn from_rotation(r: &Rot3) -> Self {
        let mut m = Lorentz::identity();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = r.0[i][j];
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut t = [[0.0; 4]; 4];
        for (i, row) in self.0.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                t[j][i] = *v;
            }
        }
        Lorentz(t)
    }

    /// `J Lᵀ J`.
    pub fn inverse(&self) -> Self {
        let mut t = self.transpose();
        for i in 0..4 {
            for j in 0..4 {
                if (i == 3) != (j == 3) {
                    t.0[i][j] = -t.0[i][j];
                }
            }
        }
        t
    }

    pub fn apply(&self, v: [f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..4).map(|j| self.0[i][j] * v[j]).sum();
        }
        out
    }

    /// `max |LᵀJL - J|`.
    pub fn form_residual(&self) -> f64 {
        let j = [1.0, 1.0, 1.0, -1.0];
        let mut worst = 0.0_f64;
        for a in 0..4 {
            for b in 0..4 {
                let v: f64 = (0..4).map(|k| self.0[k][a] * j[k] * self.0[k][b]).sum();
                let target = if a == b { j[a] } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, o: &Lorentz) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((self.0[i][j] - o.0[i][j]).abs());
            }
        }
        worst
    }

    /// Action on the boundary sphere: the direction of `L (ξ, 1)`.
    pub fn act_on_boundary(&self, xi: Vec3) -> Vec3 {
        let v = self.apply([xi[0], xi[1], xi[2], 1.0]);
        [v[0] / v[3], v[1] / v[3], v[2] / v[3]]
    }
}

impl Mul for Lorentz {
    type Output = Lorentz;

    fn mul(self, o: Lorentz) -> Lorentz {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = (0..4).map(|l| self.0[i][l] * o.0[l][j]).sum();
            }
        }
        Lorentz(m)
    }
}

/// The isomorphism `PSL(2,C) → SO°(3,1)`, scaled so that
/// `iota(diag(e^{t/2}, e^{-t/2})) = boost(t)`.
pub fn iota(m: &Moebius) -> Lorentz {
    let (a, b, c, d) = (m.a, m.b, m.c, m.d);
    let (ac, bc, cc, dc) = (a.conj(), b.conj(), c.conj(), d.conj());
    let (na, nb, nc, nd) = (a.norm_sqr(), b.norm_sqr(), c.norm_sqr(), d.norm_sqr());
    let i = Complex64::new(0.0, 1.0);
    let entries: [[Complex64; 4]; 4] = [
        [
            Complex64::from(na + nd - nb - nc),
            b * ac + a * bc - d * cc - c * dc,
            i * (b * ac - a * bc - d * cc + c * dc),
            Complex64::from(na + nb - nc - nd),
        ],
        [
            c * ac - d * bc + a * cc - b * dc,
            d * ac + c * bc + b * cc + a * dc,
            i * (d * ac - c * bc + b * cc - a * dc),
            c * ac + d * bc + a * cc + b * dc,
        ],
        [
            i * (-c * ac + d * bc + a * cc - b * dc),
            i * (-d * ac - c * bc + b * cc + a * dc),
            d * ac - c * bc - b * cc + a * dc,
            i * (-c * ac - d * bc + a * cc + b * dc),
        ],
        [
            Complex64::from(na + nc - nb - nd),
            b * ac + a * bc + d * cc + c * dc,
            i * (b * ac - a * bc + d * cc - c * dc),
            Complex64::from(na + nb + nc + nd),
        ],
    ];
    let mut out = [[0.0; 4]; 4];
    for (r, row) in entries.iter().enumerate() {
        for (s, z) in row.iter().enumerate() {
            out[r][s] = 0.5 * z.re;
        }
    }
    Lorentz(out)
}

/// `e^t` where `t = d(j, L j)`.
pub fn lorentz_norm(l: &Lorentz) -> f64 {
    let w = l.0[3][3].max(1.0);
    w + (w * w - 1.0).sqrt()
}

pub fn hyperbolic_distance(l: &Lorentz) -> f64 {
    l.0[3][3].max(1.0).acosh()
}

/// Cartan coordinates `L = k1 · boost(t) · k2`.
///
/// `dir1 = k1 e1` is the boundary direction of `L j`; `dir2 = k2⁻¹ e1`. The
/// gauge puts `k1 = R_x(φ) R_z(θ)` (third Euler angle zero) and all of `M`
/// into `k2`. Only `t`, `dir1`, `dir2` and `k1 k2` are gauge independent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KakData {
    pub t: f64,
    pub dir1: Vec3,
    pub dir2: Vec3,
    pub k1: Rot3,
    pub k2: Rot3,
}

impl KakData {
    pub fn reconstruct(&self) -> Lorentz {
        Lorentz::from_rotation(&self.k1) * Lorentz::boost(self.t) * Lorentz::from_rotation(&self.k2)
    }

    /// `K(g) = k1 k2`.
    pub fn k_product(&self) -> Rot3 {
        self.k1 * self.k2
    }
}

pub fn kak(l: &Lorentz) -> Result<KakData, LieError> {
    let w = l.0[3][3];
    if w - 1.0 <= DEGENERACY_THRESHOLD {
        return Err(LieError::DegenerateRotation(w - 1.0));
    }
    let t = w.acosh();
    let sh = t.sinh();
    let dir1 = normalize([l.0[0][3] / sh, l.0[1][3] / sh, l.0[2][3] / sh]);
    let dir2 = normalize([l.0[3][0] / sh, l.0[3][1] / sh, l.0[3][2] / sh]);
    let (theta, phi) = spherical_angles(dir1);
    let k1 = Rot3::about_x(phi) * Rot3::about_z(theta);
    // k1ᵀ L = boost(t) k2. The boost leaves rows y and z alone and row x of
    // k2 is dir2, so no e^t-sized cancellation enters k2.
    let rest = Lorentz::from_rotation(&k1.transpose()) * *l;
    let row1 = [rest.0[1][0], rest.0[1][1], rest.0[1][2]];
    let proj = dot(row1, dir2);
    let row1 = normalize([row1[0] - proj * dir2[0], row1[1] - proj * dir2[1], row1[2] - proj * dir2[2]]);
    let row2 = cross(dir2, row1);
    let k2 = [dir2, row1, row2];
    Ok(KakData { t, dir1, dir2, k1, k2: Rot3(k2) })
}

/// `(θ, φ)` of a unit vector with `e1` as the pole.
pub fn spherical_angles(dir: Vec3) -> (f64, f64) {
    let theta = dir[0].clamp(-1.0, 1.0).acos();
    let phi = dir[2].atan2(dir[1]);
    (theta, phi)
}

pub fn direction_from_angles(theta: f64, phi: f64) -> Vec3 {
    [theta.cos(), theta.sin() * phi.cos(), theta.sin() * phi.sin()]
}

/// A quadratic form by its symmetric Gram matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadForm {
    pub gram: [[f64; 4]; 4],
}

impl QuadForm {
    pub fn eval(&self, v: [f64; 4]) -> f64 {
        let mut s = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                s += v[i] * self.gram[i][j] * v[j];
            }
        }
        s
    }
}

/// `Q_D(a,b,c,d) = a² + b² + c² + d² - ½(a+b+c+d)²`.
pub fn descartes_form() -> QuadForm {
    let mut g = [[-0.5; 4]; 4];
    for (i, row) in g.iter_mut().enumerate() {
        row[i] = 0.5;
    }
    QuadForm { gram: g }
}

/// The symmetric involution intertwining `O(J)` with `O(Q_D)`.
pub fn q_conjugator() -> [[f64; 4]; 4] {
    [
        [0.5, -0.5, -0.5, 0.5],
        [-0.5, 0.5, -0.5, 0.5],
        [-0.5, -0.5, 0.5, 0.5],
        [0.5, 0.5, 0.5, 0.5],
    ]
}

/// `q S q` for a matrix `S` preserving `Q_D`.
pub fn to_lorentz(s: &[[f64; 4]; 4]) -> Lorentz {
    let q = q_conjugator();
    Lorentz(mat4_mul(&mat4_mul(&q, s), &q))
}

/// `q L q`, the inverse of [`to_lorentz`].
pub fn from_lorentz(l: &Lorentz) -> [[f64; 4]; 4] {
    let q = q_conjugator();
    mat4_mul(&mat4_mul(&q, &l.0), &q)
}

pub fn mat4_mul(a: &[[f64; 4]; 4], b: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let mut m = [[0.0; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            *e = (0..4).map(|l| a[i][l] * b[l][j]).sum();
        }
    }
    m
}

/// The Poisson kernel in Euler-angle form:
/// `(1 - r²) / (1 - 2r ⟨x̂, ξ⟩ + r²)` with `x̂ = (sinθ cosφ, sinθ sinφ, cosθ)`
/// and `ξ = (sin u cos v, sin u sin v, cos u)`.
pub fn poisson_kernel(phi: f64, theta: f64, r: f64, v: f64, u: f64) -> Result<f64, LieError> {
    if !(0.0..1.0).contains(&r) {
        return Err(LieError::RadiusOutOfRange(r));
    }
    let inner = theta.sin() * phi.cos() * u.sin() * v.cos()
        + theta.sin() * phi.sin() * u.sin() * v.sin()
        + theta.cos() * u.cos();
    Ok((1.0 - r * r) / (1.0 - 2.0 * r * inner + r * r))
}

/// Poisson kernel for a point `r · x̂` of the unit ball and boundary point `ξ`.
pub fn poisson_kernel_vec(x_hat: Vec3, r: f64, xi: Vec3) -> Result<f64, LieError> {
    if !(0.0..1.0).contains(&r) {
        return Err(LieError::RadiusOutOfRange(r));
    }
    Ok((1.0 - r * r) / (1.0 - 2.0 * r * dot(x_hat, xi) + r * r))
}

/// Poisson kernel at the point `L j` of the hyperboloid: `1 / -⟨L j, (ξ, 1)⟩`.
pub fn poisson_kernel_at(l: &Lorentz, xi: Vec3) -> f64 {
    let p = [l.0[0][3], l.0[1][3], l.0[2][3], l.0[3][3]];
    1.0 / (p[3] - p[0] * xi[0] - p[1] * xi[1] - p[2] * xi[2])
}

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn normalize(v: Vec3) -> Vec3 {
    let n = dot(v, v).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Uniformly distributed direction from two numbers in `[0, 1)`.
pub fn direction_from_unit_square(u: f64, v: f64) -> Vec3 {
    let z = 2.0 * u - 1.0;
    let r = (1.0 - z * z).max(0.0).sqrt();
    let phi = 2.0 * PI * v;
    [z, r * phi.cos(), r * phi.sin()]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_maps_to_identity() {
        let l = iota(&Moebius::identity());
        assert_eq!(l.max_abs_diff(&Lorentz::identity()), 0.0);
    }

    #[test]
    fn diagonal_maps_to_boost() {
        let l = iota(&Moebius::diagonal(1.0));
        assert!((l.0[0][0] - 1f64.cosh()).abs() < 1e-15);
        assert!((l.0[3][3] - 1f64.cosh()).abs() < 1e-15);
        assert!((l.0[0][3] - 1f64.sinh()).abs() < 1e-15);
        assert!((l.0[3][0] - 1f64.sinh()).abs() < 1e-15);
        assert!(l.max_abs_diff(&Lorentz::boost(1.0)) < 1e-15);
    }

    #[test]
    fn rejects_non_unimodular() {
        let r = Moebius::new(c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0));
        assert!(matches!(r, Err(LieError::NotUnimodular(_))));
    }

    #[test]
    fn norm_and_distance_of_boost() {
        assert_eq!(lorentz_norm(&Lorentz::identity()), 1.0);
        assert_eq!(hyperbolic_distance(&Lorentz::identity()), 0.0);
        let b = Lorentz::boost(2.5);
        assert!((lorentz_norm(&b) - 2.5f64.exp()).abs() < 1e-12);
        assert!((hyperbolic_distance(&b) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn kak_of_boost_is_trivial() {
        let k = kak(&Lorentz::boost(2.0)).unwrap();
        assert!((k.t - 2.0).abs() < 1e-14);
        for (d, e) in k.dir1.iter().zip([1.0, 0.0, 0.0]) {
            assert!((d - e).abs() < 1e-14);
        }
        for (d, e) in k.dir2.iter().zip([1.0, 0.0, 0.0]) {
            assert!((d - e).abs() < 1e-14);
        }
    }

    #[test]
    fn kak_rejects_rotations() {
        let r = Lorentz::from_rotation(&Rot3::about_y(0.4));
        assert!(matches!(kak(&r), Err(LieError::DegenerateRotation(_))));
    }

    #[test]
    fn euler_chart_round_trips() {
        for &(a, b, g) in &[(0.3, 1.1, -0.7), (-2.0, 0.2, 3.0), (1.0, 3.0, 0.5)] {
            let r = Rot3::from_euler(a, b, g);
            let (a2, b2, g2) = r.euler();
            let r2 = Rot3::from_euler(a2, b2, g2);
            for i in 0..3 {
                for j in 0..3 {
                    assert!((r.0[i][j] - r2.0[i][j]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn descartes_form_examples() {
        let q = descartes_form();
        assert_eq!(q.eval([0.0, 0.0, 1.0, 1.0]), 0.0);
        assert_eq!(q.eval([-1.0, 2.0, 2.0, 3.0]), 0.0);
        let qq = mat4_mul(&q_conjugator(), &q_conjugator());
        for (i, row) in qq.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert_eq!(*v, if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn poisson_kernel_examples() {
        assert_eq!(poisson_kernel(0.3, 1.2, 0.0, -0.4, 2.0).unwrap(), 1.0);
        let p = poisson_kernel(0.7, 1.1, 0.9, 0.7, 1.1).unwrap();
        assert!((p - 19.0).abs() < 1e-12);
        assert!(poisson_kernel(0.0, 0.0, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn poisson_kernel_at_hyperboloid_point_matches_ball_form() {
        let dir = normalize([0.3, -0.5, 0.8]);
        let t = 1.3;
        let l = Lorentz::boost_along(dir, t);
        let xi = normalize([-0.2, 0.9, 0.1]);
        let ball = poisson_kernel_vec(dir, (t / 2.0).tanh(), xi).unwrap();
        assert!((ball - poisson_kernel_at(&l, xi)).abs() < 1e-12);
    }
}
