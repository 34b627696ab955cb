//! Line model of the complementary series: `G` acts on functions of `z = r e^{iα}`
//! by `π_s(a b; c d) f(z) = |bz + d|^{-2s} f((az + c)/(bz + d))`.
//!
//! Every function handled here has the shape
//! `Σ_j e^{ijα} P_j(r) (1 + r²)^{-s-n}` with Laurent polynomials `P_j` and an
//! integer exponent index `n`. That family is closed under the six Lie algebra
//! operators, so every identity is checked coefficient by coefficient.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::LineError;
use crate::numeric::{binomial, integrate, ln_factorial, ln_gamma_signed};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// A Laurent polynomial in `r` with complex coefficients.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Poly(pub BTreeMap<i32, Complex64>);

impl Poly {
    pub fn monomial(power: i32, coeff: Complex64) -> Self {
        let mut m = BTreeMap::new();
        m.insert(power, coeff);
        Poly(m)
    }

    fn add_term(&mut self, power: i32, coeff: Complex64) {
        *self.0.entry(power).or_insert(Complex64::new(0.0, 0.0)) += coeff;
    }

    pub fn scale(&self, k: Complex64) -> Poly {
        Poly(self.0.iter().map(|(p, c)| (*p, c * k)).collect())
    }

    /// Multiplication by `r^k`.
    pub fn shift(&self, k: i32) -> Poly {
        Poly(self.0.iter().map(|(p, c)| (p + k, *c)).collect())
    }

    pub fn derivative(&self) -> Poly {
        let mut out = Poly::default();
        for (p, c) in &self.0 {
            if *p != 0 {
                out.add_term(p - 1, c * f64::from(*p));
            }
        }
        out
    }

    /// Multiplication by `(1 + r²)^k`.
    pub fn times_one_plus_r2(&self, k: u32) -> Poly {
        let mut out = Poly::default();
        for (p, c) in &self.0 {
            for i in 0..=k {
                out.add_term(p + 2 * i as i32, c * binomial(k, i));
            }
        }
        out
    }

    pub fn eval(&self, r: f64) -> Complex64 {
        self.0.iter().map(|(p, c)| c * r.powi(*p)).sum()
    }

    /// Drops coefficients of modulus at most `tol`.
    pub fn chopped(&self, tol: f64) -> Poly {
        Poly(self.0.iter().filter(|(_, c)| c.norm() > tol).map(|(p, c)| (*p, *c)).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.values().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

impl Add for &Poly {
    type Output = Poly;

    fn add(self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (p, c) in &o.0 {
            out.add_term(*p, *c);
        }
        out
    }
}

/// `Σ_j e^{ijα} P_j(r) (1 + r²)^{-s-n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineFunction {
    pub s: f64,
    pub n: i32,
    pub components: BTreeMap<i32, Poly>,
}

impl LineFunction {
    pub fn zero(s: f64, n: i32) -> Self {
        LineFunction { s, n, components: BTreeMap::new() }
    }

    pub fn single(s: f64, n: i32, j: i32, p: Poly) -> Self {
        let mut components = BTreeMap::new();
        components.insert(j, p);
        LineFunction { s, n, components }
    }

    /// Same function written with exponent index `n' ≥ n`.
    pub fn raised(&self, n: i32) -> LineFunction {
        assert!(n >= self.n, "cannot lower the exponent index");
        let k = (n - self.n) as u32;
        LineFunction {
            s: self.s,
            n,
            components: self
                .components
                .iter()
                .map(|(j, p)| (*j, p.times_one_plus_r2(k)))
                .collect(),
        }
    }

    pub fn scale(&self, k: Complex64) -> LineFunction {
        LineFunction {
            s: self.s,
            n: self.n,
            components: self.components.iter().map(|(j, p)| (*j, p.scale(k))).collect(),
        }
    }

    fn add_component(&mut self, j: i32, p: &Poly) {
        let e = self.components.entry(j).or_default();
        *e = &*e + p;
    }

    pub fn eval(&self, r: f64, alpha: f64) -> Complex64 {
        let env = (1.0 + r * r).powf(-self.s - f64::from(self.n));
        self.components
            .iter()
            .map(|(j, p)| Complex64::from_polar(1.0, f64::from(*j) * alpha) * p.eval(r))
            .sum::<Complex64>()
            * env
    }

    pub fn max_abs(&self) -> f64 {
        self.components.values().map(Poly::max_abs).fold(0.0, f64::max)
    }

    /// Each `P_j` has only powers congruent to `j` mod 2.
    pub fn parity_ok(&self) -> bool {
        self.components
            .iter()
            .all(|(j, p)| p.0.keys().all(|k| (k - j).rem_euclid(2) == 0))
    }

    /// Largest coefficient of `self - other` relative to the larger of the two
    /// functions (absolute when both vanish).
    pub fn relative_residual(&self, other: &LineFunction) -> f64 {
        let n = self.n.max(other.n);
        let a = self.raised(n);
        let b = other.raised(n);
        let diff = &a - &b;
        let scale = a.max_abs().max(b.max_abs());
        let d = diff.max_abs();
        if scale > 0.0 {
            d / scale
        } else {
            d
        }
    }
}

impl Add for &LineFunction {
    type Output = LineFunction;

    fn add(self, o: &LineFunction) -> LineFunction {
        let n = self.n.max(o.n);
        let mut out = self.raised(n);
        for (j, p) in &o.raised(n).components {
            out.add_component(*j, p);
        }
        out
    }
}

impl Sub for &LineFunction {
    type Output = LineFunction;

    fn sub(self, o: &LineFunction) -> LineFunction {
        self + &o.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul<Complex64> for &LineFunction {
    type Output = LineFunction;

    fn mul(self, k: Complex64) -> LineFunction {
        self.scale(k)
    }
}

/// The six operators of the complexified Lie algebra in polar coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Operator {
    H,
    IH,
    R,
    L,
    JPlus,
    JMinus,
}

/// `P'(1 + r²) - 2σ r P`: the radial derivative of `P (1+r²)^{-σ}` written
/// against `(1+r²)^{-σ-1}`.
fn radial_d(p: &Poly, sigma: f64) -> Poly {
    let a = p.derivative().times_one_plus_r2(1);
    let b = p.shift(1).scale(Complex64::new(-2.0 * sigma, 0.0));
    &a + &b
}

/// Exact application of one operator.
pub fn apply_operator(op: Operator, f: &LineFunction) -> LineFunction {
    let s = f.s;
    let sigma = s + f.n as f64;
    let out_n = match op {
        Operator::H | Operator::JPlus | Operator::JMinus => f.n + 1,
        Operator::IH | Operator::R | Operator::L => f.n,
    };
    let mut out = LineFunction::zero(s, out_n);
    for (&j, p) in &f.components {
        let jf = f64::from(j);
        let (target, poly) = match op {
            Operator::H => {
                // 2s P (1+r²) + 2r D(P)
                let a = p.times_one_plus_r2(1).scale(Complex64::new(2.0 * s, 0.0));
                let b = radial_d(p, sigma).shift(1).scale(Complex64::new(2.0, 0.0));
                (j, &a + &b)
            }
            Operator::IH => (j, p.scale(I * 2.0 * jf)),
            Operator::R | Operator::L => {
                // ±(2is r P + i D(P)) + ij (r - 1/r) P, with D at the same exponent
                let sign = if op == Operator::R { 1.0 } else { -1.0 };
                let a = p.shift(1).scale(I * 2.0 * s * sign);
                let b = radial_d(p, sigma).scale(I * sign);
                let c = (&p.shift(1) + &p.shift(-1).scale(Complex64::new(-1.0, 0.0))).scale(I * jf);
                let target = if op == Operator::R { j + 1 } else { j - 1 };
                (target, &(&a + &b) + &c)
            }
            Operator::JPlus | Operator::JMinus => {
                // -D(P) ± j (1 + r²) P / r
                let sign = if op == Operator::JPlus { 1.0 } else { -1.0 };
                let a = radial_d(p, sigma).scale(Complex64::new(-1.0, 0.0));
                let b = p.times_one_plus_r2(1).shift(-1).scale(Complex64::new(sign * jf, 0.0));
                let target = if op == Operator::JPlus { j + 1 } else { j - 1 };
                (target, &a + &b)
            }
        };
        // Cancellations that are exact in real arithmetic leave rounding dust
        // of order ε times the input size; remove it so vanishing is exact.
        let dust = 64.0 * f64::EPSILON * p.max_abs() * (2.0 * sigma.abs() + jf.abs() + 4.0);
        out.add_component(target, &poly.chopped(dust));
    }
    out
}

fn half(f: &LineFunction) -> LineFunction {
    f.scale(Complex64::new(0.5, 0.0))
}

/// `f = (J⁺ + J⁻)/2`.
pub fn op_f(x: &LineFunction) -> LineFunction {
    half(&(&apply_operator(Operator::JPlus, x) + &apply_operator(Operator::JMinus, x)))
}

/// `if = (J⁺ - J⁻)/(2i)`.
pub fn op_if(x: &LineFunction) -> LineFunction {
    (&apply_operator(Operator::JPlus, x) - &apply_operator(Operator::JMinus, x)).scale(-I * 0.5)
}

/// `e = f + (R - L)/(2i)`.
pub fn op_e(x: &LineFunction) -> LineFunction {
    let rl = &apply_operator(Operator::R, x) - &apply_operator(Operator::L, x);
    &op_f(x) + &rl.scale(-I * 0.5)
}

/// `ie = (R + L)/2 - if`.
pub fn op_ie(x: &LineFunction) -> LineFunction {
    let rl = &apply_operator(Operator::R, x) + &apply_operator(Operator::L, x);
    &half(&rl) - &op_if(x)
}

/// Casimir `Ω = h² - (ih)² + 2(ef + fe - (ie)(if) - (if)(ie))`.
pub fn casimir(x: &LineFunction) -> LineFunction {
    let h2 = apply_operator(Operator::H, &apply_operator(Operator::H, x));
    let ih2 = apply_operator(Operator::IH, &apply_operator(Operator::IH, x));
    let ef = op_e(&op_f(x));
    let fe = op_f(&op_e(x));
    let ieif = op_ie(&op_if(x));
    let ifie = op_if(&op_ie(x));
    let mixed = &(&(&ef + &fe) - &ieif) - &ifie;
    &(&h2 - &ih2) + &mixed.scale(Complex64::new(2.0, 0.0))
}

/// `Ω_K = ((ih)² + (RL + LR)/2) / 4`.
pub fn k_casimir(x: &LineFunction) -> LineFunction {
    let ih2 = apply_operator(Operator::IH, &apply_operator(Operator::IH, x));
    let rl = apply_operator(Operator::R, &apply_operator(Operator::L, x));
    let lr = apply_operator(Operator::L, &apply_operator(Operator::R, x));
    (&ih2 + &half(&(&rl + &lr))).scale(Complex64::new(0.25, 0.0))
}

/// A normalized `K`-type vector `v_{lj}^s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineVector {
    pub s: f64,
    pub l: i32,
    pub j: i32,
    /// `(power, coefficient)` pairs of the radial polynomial, prefactor included.
    pub radial: Vec<(i32, f64)>,
}

impl LineVector {
    pub fn to_function(&self) -> LineFunction {
        let mut p = Poly::default();
        for &(k, c) in &self.radial {
            p.add_term(k, Complex64::new(c, 0.0));
        }
        LineFunction::single(self.s, self.l, self.j, p)
    }

    pub fn radial_eval(&self, r: f64) -> f64 {
        self.radial.iter().map(|(k, c)| c * r.powi(*k)).sum()
    }
}

fn check_s(s: f64) -> Result<(), LineError> {
    if !(s > 1.0 && s < 2.0) {
        return Err(LineError::ParameterOutOfRange(s));
    }
    Ok(())
}

/// `b_{lj} = √((-1)^l Γ(l+s) Γ(s-l-1) (2l+1) (l-|j|)! (l+|j|)!) / (l! π Γ(s-1))`.
pub fn vlj_prefactor(s: f64, l: i32, j: i32) -> Result<f64, LineError> {
    check_s(s)?;
    let m = j.unsigned_abs();
    let lu = l as u32;
    let (g1, s1) = ln_gamma_signed(f64::from(l) + s)?;
    let (g2, s2) = ln_gamma_signed(s - f64::from(l) - 1.0)?;
    let (g3, s3) = ln_gamma_signed(s - 1.0)?;
    let sign = if l % 2 == 0 { 1.0 } else { -1.0 } * s1 * s2;
    debug_assert!(sign > 0.0 && s3 > 0.0);
    let ln_num = g1 + g2 + (2.0 * f64::from(l) + 1.0).ln() + ln_factorial(lu - m) + ln_factorial(lu + m);
    let ln_den = ln_factorial(lu) + PI.ln() + g3;
    Ok((0.5 * ln_num - ln_den).exp())
}

/// The normalized eigenfunction `v_{lj}^s`.
///
/// For `j < 0`, `v_{l,j}(r, α) = (-1)^j v_{l,-j}(r, -α)`; this is the unique
/// continuation for which lowering by `L` acts with the same coefficient
/// on both sides of `j = 0`.
pub fn make_vlj(s: f64, l: i32, j: i32) -> Result<LineVector, LineError> {
    check_s(s)?;
    if l < 0 || j.abs() > l {
        return Err(LineError::InvalidKType { l: l.into(), j: j.into() });
    }
    let m = j.abs();
    let b = vlj_prefactor(s, l, j)?;
    let flip = if j < 0 && m % 2 == 1 { -1.0 } else { 1.0 };
    let lu = l as u32;
    let radial = (0..=(l - m))
        .map(|k| {
            let power = 2 * (l - k) - m;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let c = binomial(lu, (l - m - k) as u32) * binomial(lu, k as u32) * sign;
            (power, flip * b * c)
        })
        .rev()
        .collect();
    Ok(LineVector { s, l, j, radial })
}

fn vlj_fn(s: f64, l: i32, j: i32) -> Result<Option<LineFunction>, LineError> {
    if l < 0 || j.abs() > l {
        return Ok(None);
    }
    Ok(Some(make_vlj(s, l, j)?.to_function()))
}

/// `Σ coeff · v_{l,j}` skipping terms outside the valid range.
fn combination(s: f64, terms: &[(f64, Complex64, i32, i32)]) -> Result<LineFunction, LineError> {
    let mut out = LineFunction::zero(s, 0);
    for &(mag, phase, l, j) in terms {
        if mag == 0.0 {
            continue;
        }
        if let Some(v) = vlj_fn(s, l, j)? {
            out = &out + &v.scale(phase * mag);
        }
    }
    Ok(out)
}

fn sqrt_pos(x: f64) -> f64 {
    x.max(0.0).sqrt()
}

/// Coefficient residuals of the ladder identities on `v_{lj}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderResidual {
    pub r: f64,
    pub l: f64,
    pub h: f64,
    pub j_plus: f64,
    pub j_minus: f64,
}

impl LadderResidual {
    pub fn max(&self) -> f64 {
        [self.r, self.l, self.h, self.j_plus, self.j_minus]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// Checks, with relative coefficient residuals:
/// * `R v_{lj} = 2i √((l-j)(l+j+1)) v_{l,j+1}`,
/// * `L v_{lj} = 2i √((l+j)(l-j+1)) v_{l,j-1}`,
/// * `½ h v_{lj}` as a combination of `v_{l∓1,j}`,
/// * `J⁺ v_{lj}` as a combination of `v_{l+1,j+1}, v_{l,j+1}, v_{l-1,j+1}`,
/// * `J⁻ v_{lj} = -(A v_{l+1,j-1} - B v_{l,j-1} + C v_{l-1,j-1})`.
pub fn check_ladder(s: f64, l: i32, j: i32) -> Result<LadderResidual, LineError> {
    let v = make_vlj(s, l, j)?.to_function();
    let (lf, jf) = (f64::from(l), f64::from(j));
    let one = Complex64::new(1.0, 0.0);
    let two_i = I * 2.0;

    let r_lhs = apply_operator(Operator::R, &v);
    let r_rhs = combination(s, &[(sqrt_pos((lf - jf) * (lf + jf + 1.0)), two_i, l, j + 1)])?;
    let l_lhs = apply_operator(Operator::L, &v);
    let l_rhs = combination(s, &[(sqrt_pos((lf + jf) * (lf - jf + 1.0)), two_i, l, j - 1)])?;

    let h_lhs = half(&apply_operator(Operator::H, &v));
    let h_down = sqrt_pos((lf + 1.0 - s) * (lf - 1.0 + s) * (lf * lf - jf * jf) / ((2.0 * lf - 1.0) * (2.0 * lf + 1.0)));
    let h_up = sqrt_pos((lf + 2.0 - s) * (lf + s) * ((lf + 1.0).powi(2) - jf * jf) / ((2.0 * lf + 1.0) * (2.0 * lf + 3.0)));
    let h_rhs = combination(s, &[(h_down, one, l - 1, j), (h_up, -one, l + 1, j)])?;

    let up = |jj: f64| sqrt_pos((lf + 2.0 + jj) * (lf + 1.0 + jj) * (s + lf) * (lf + 2.0 - s) / ((2.0 * lf + 1.0) * (2.0 * lf + 3.0)));
    let down = |jj: f64| sqrt_pos((lf - jj) * (lf - jj - 1.0) * (lf - 1.0 + s) * (lf + 1.0 - s) / ((2.0 * lf - 1.0) * (2.0 * lf + 1.0)));
    let jp_lhs = apply_operator(Operator::JPlus, &v);
    let jp_rhs = combination(
        s,
        &[
            (up(jf), one, l + 1, j + 1),
            (sqrt_pos((lf + jf + 1.0) * (lf - jf)), -one, l, j + 1),
            (down(jf), one, l - 1, j + 1),
        ],
    )?;
    let jm_lhs = apply_operator(Operator::JMinus, &v);
    let jm_rhs = combination(
        s,
        &[
            (up(-jf), -one, l + 1, j - 1),
            (sqrt_pos((lf - jf + 1.0) * (lf + jf)), one, l, j - 1),
            (down(-jf), -one, l - 1, j - 1),
        ],
    )?;
    Ok(LadderResidual {
        r: r_lhs.relative_residual(&r_rhs),
        l: l_lhs.relative_residual(&l_rhs),
        h: h_lhs.relative_residual(&h_rhs),
        j_plus: jp_lhs.relative_residual(&jp_rhs),
        j_minus: jm_lhs.relative_residual(&jm_rhs),
    })
}

/// Relative residual of `Ω v + 4s(2-s) v = 0`.
pub fn casimir_residual(s: f64, l: i32, j: i32) -> Result<f64, LineError> {
    let v = make_vlj(s, l, j)?.to_function();
    let target = v.scale(Complex64::new(-4.0 * s * (2.0 - s), 0.0));
    Ok(casimir(&v).relative_residual(&target))
}

/// Relative residual of `Ω_K v + l(l+1) v = 0`.
pub fn k_casimir_residual(s: f64, l: i32, j: i32) -> Result<f64, LineError> {
    let v = make_vlj(s, l, j)?.to_function();
    let lf = f64::from(l);
    let target = v.scale(Complex64::new(-lf * (lf + 1.0), 0.0));
    Ok(k_casimir(&v).relative_residual(&target))
}

/// Outcome of comparing `L^{l-j} (J⁺)^l v_{00}` with `v_{lj}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainCheck {
    /// Least-squares proportionality constant `κ` with `chain ≈ κ v_{lj}`.
    pub factor: Complex64,
    /// `κ / i^{l-j}`; real and positive when the phases agree.
    pub reduced_factor: Complex64,
    pub residual: f64,
}

pub fn j_plus_chain(s: f64, l: i32, j: i32) -> Result<ChainCheck, LineError> {
    let target = make_vlj(s, l, j)?.to_function();
    let mut f = make_vlj(s, 0, 0)?.to_function();
    for _ in 0..l {
        f = apply_operator(Operator::JPlus, &f);
    }
    for _ in 0..(l - j) {
        f = apply_operator(Operator::L, &f);
    }
    let n = f.n.max(target.n);
    let (fa, tb) = (f.raised(n), target.raised(n));
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for (jj, p) in &tb.components {
        let q = fa.components.get(jj).cloned().unwrap_or_default();
        for (k, c) in &p.0 {
            num += c.conj() * q.0.get(k).copied().unwrap_or_default();
            den += c.norm_sqr();
        }
    }
    let factor = num / den;
    let residual = fa.relative_residual(&tb.scale(factor));
    let reduced_factor = factor / I.powi(l - j);
    Ok(ChainCheck { factor, reduced_factor, residual })
}

/// `C(l) = √((2l+2)(s+l)(l+2-s)/(2l+3))`.
pub fn c_constant(s: f64, l: i32) -> f64 {
    let lf = f64::from(l);
    ((2.0 * lf + 2.0) * (s + lf) * (lf + 2.0 - s) / (2.0 * lf + 3.0)).sqrt()
}

/// Relative residual of `J⁺ v_{ll} = C(l) v_{l+1,l+1}`.
pub fn c_constant_residual(s: f64, l: i32) -> Result<f64, LineError> {
    let v = make_vlj(s, l, l)?.to_function();
    let target = make_vlj(s, l + 1, l + 1)?.to_function().scale(Complex64::new(c_constant(s, l), 0.0));
    Ok(apply_operator(Operator::JPlus, &v).relative_residual(&target))
}

/// `(-1)^l π Γ(s-1)² / (Γ(l+s) Γ(s-l-1))`.
pub fn intertwine_const(s: f64, l: i32) -> Result<f64, LineError> {
    check_s(s)?;
    let (g1, s1) = ln_gamma_signed(s - 1.0)?;
    let (g2, s2) = ln_gamma_signed(f64::from(l) + s)?;
    let (g3, s3) = ln_gamma_signed(s - f64::from(l) - 1.0)?;
    let parity = if l % 2 == 0 { 1.0 } else { -1.0 };
    Ok(parity * s1 * s1 * s2 * s3 * (PI.ln() + 2.0 * g1 - g2 - g3).exp())
}

/// `I v_{lj}^s`: the same radial polynomial times `c_l` against
/// `(1+r²)^{-(2-s)-l}`.
pub fn intertwine(v: &LineVector) -> Result<LineFunction, LineError> {
    let c = intertwine_const(v.s, v.l)?;
    let mut f = v.to_function().scale(Complex64::new(c, 0.0));
    f.s = 2.0 - v.s;
    Ok(f)
}

fn radial_integral<F: Fn(f64) -> f64>(f: F, tol: f64) -> Result<f64, LineError> {
    // r = tan θ keeps the algebraic tail on a finite interval; fixed panels
    // guard against an initial rule that samples only zeros.
    let g = |th: f64| {
        if th >= PI / 2.0 {
            return 0.0;
        }
        let r = th.tan();
        f(r) * (1.0 + r * r)
    };
    let panels = 16;
    let width = PI / 2.0 / f64::from(panels);
    let mut total = 0.0;
    for k in 0..panels {
        let a = width * f64::from(k);
        total += integrate(g, a, a + width, tol / f64::from(panels), tol, 2000)?.value;
    }
    Ok(total)
}

/// `⟨v₁, v₂⟩ = ∫ v₁ conj(I v₂) dA` by radial quadrature; the angular
/// integral is `2π δ_{j₁ j₂}`.
pub fn inner_product(v1: &LineVector, v2: &LineVector) -> Result<f64, LineError> {
    if v1.j != v2.j {
        return Ok(0.0);
    }
    let c = intertwine_const(v2.s, v2.l)?;
    let expo = -2.0 - f64::from(v1.l) - f64::from(v2.l);
    let val = radial_integral(
        |r| v1.radial_eval(r) * v2.radial_eval(r) * (1.0 + r * r).powf(expo) * r,
        1e-13,
    )?;
    Ok(2.0 * PI * c * val)
}

/// `I f(ζ)` by direct quadrature of the singular kernel `|z - ζ|^{-2(2-s)}`,
/// in polar coordinates centred at `ζ`.
pub fn intertwine_quadrature(f: &LineFunction, zeta: Complex64, n_angle: usize) -> Result<Complex64, LineError> {
    let s = f.s;
    let p = 2.0 * s - 2.0;
    let eval = |rho: f64, th: f64| {
        let z = zeta + Complex64::from_polar(rho, th);
        f.eval(z.norm(), z.arg())
    };
    let ring = |rho: f64| -> Complex64 {
        (0..n_angle)
            .map(|k| eval(rho, 2.0 * PI * k as f64 / n_angle as f64))
            .sum::<Complex64>()
            * (2.0 * PI / n_angle as f64)
    };
    let mut total = Complex64::new(0.0, 0.0);
    // ρ ∈ [0, 1]: ρ^{2s-3} dρ = dx / (2s-2) with x = ρ^{2s-2}
    for part in [0, 1] {
        let inner = |x: f64| -> f64 {
            let rho = x.powf(1.0 / p);
            let v = ring(rho) / p;
            if part == 0 {
                v.re
            } else {
                v.im
            }
        };
        let q = integrate(inner, 0.0, 1.0, 1e-12, 1e-11, 4000)?;
        if part == 0 {
            total.re += q.value;
        } else {
            total.im += q.value;
        }
    }
    // ρ ∈ [1, ∞): ρ = 1/u
    for part in [0, 1] {
        let outer = |u: f64| -> f64 {
            if u <= 0.0 {
                return 0.0;
            }
            let rho = 1.0 / u;
            let v = ring(rho) * rho.powf(2.0 * s - 3.0) / (u * u);
            if part == 0 {
                v.re
            } else {
                v.im
            }
        };
        let q = integrate(outer, 0.0, 1.0, 1e-12, 1e-11, 4000)?;
        if part == 0 {
            total.re += q.value;
        } else {
            total.im += q.value;
        }
    }
    Ok(total)
}

/// `⟨π_s(a_t) v_{ac}, v_{a'c}⟩` with `π_s(a_t) f(z) = e^{st} f(e^t z)`.
///
/// The pairing reduces to one radial integral, evaluated in `y = ln r` on a
/// window wide enough that both tails are below double precision.
pub fn matrix_coefficient(s: f64, a: i32, a_prime: i32, c: i32, t: f64) -> Result<f64, LineError> {
    check_s(s)?;
    if c.abs() > a.min(a_prime) {
        return Err(LineError::InvalidKType { l: a.min(a_prime).into(), j: c.into() });
    }
    let v = make_vlj(s, a, c)?;
    let w = make_vlj(s, a_prime, c)?;
    let ca = intertwine_const(s, a_prime)?;
    let ea = -s - f64::from(a);
    let eb = s - 2.0 - f64::from(a_prime);
    let integrand = |y: f64| {
        let x = (t + y).exp();
        let r = y.exp();
        let env = ea * (2.0 * (t + y)).exp().ln_1p() + eb * (2.0 * y).exp().ln_1p() + 2.0 * y;
        v.radial_eval(x) * w.radial_eval(r) * env.exp()
    };
    let scale = (t * (s - 2.0) - f64::from(c.abs()) * t).exp();
    // Fixed panels first, so a sparse initial rule cannot land only on zeros
    // of the radial polynomials.
    let (lo, hi) = (-t - 40.0, 40.0);
    let panels = ((hi - lo) / 2.0).ceil() as usize;
    let width = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let a0 = lo + width * k as f64;
        let q = integrate(integrand, a0, a0 + width, 1e-16 * scale, 1e-13, 2_000)?;
        total += q.value;
    }
    Ok(2.0 * PI * ca * (s * t).exp() * total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_state_prefactor() {
        for s in [1.1, 1.5, 1.9] {
            let v = make_vlj(s, 0, 0).unwrap();
            assert_eq!(v.radial.len(), 1);
            assert!((v.radial[0].1 - (s - 1.0f64).sqrt() / PI).abs() < 1e-14);
        }
    }

    #[test]
    fn highest_weight_is_monomial() {
        let v = make_vlj(1.4, 3, 3).unwrap();
        assert_eq!(v.radial.len(), 1);
        assert_eq!(v.radial[0].0, 3);
    }

    #[test]
    fn degree_and_parity() {
        for l in 0..6 {
            for j in -l..=l {
                let v = make_vlj(1.3, l, j).unwrap();
                let powers: Vec<i32> = v.radial.iter().map(|p| p.0).collect();
                assert_eq!(*powers.first().unwrap(), j.abs());
                assert_eq!(*powers.last().unwrap(), 2 * l - j.abs());
                assert!(v.to_function().parity_ok());
            }
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(matches!(make_vlj(2.0, 0, 0), Err(LineError::ParameterOutOfRange(_))));
        assert!(matches!(make_vlj(0.5, 0, 0), Err(LineError::ParameterOutOfRange(_))));
        assert!(matches!(make_vlj(1.5, 1, 2), Err(LineError::InvalidKType { .. })));
    }

    #[test]
    fn ih_is_diagonal() {
        let v = make_vlj(1.5, 3, -2).unwrap().to_function();
        let w = apply_operator(Operator::IH, &v);
        assert!(w.relative_residual(&v.scale(I * -4.0)) < 1e-15);
    }

    #[test]
    fn r_kills_highest_weight() {
        let v = make_vlj(1.5, 2, 2).unwrap().to_function();
        assert_eq!(apply_operator(Operator::R, &v).max_abs(), 0.0);
    }

    #[test]
    fn h_on_ground_state() {
        let s = 1.37;
        let v = LineFunction::single(s, 0, 0, Poly::monomial(0, Complex64::new(1.0, 0.0)));
        let hv = apply_operator(Operator::H, &v);
        assert_eq!(hv.n, 1);
        let p = &hv.components[&0];
        assert!((p.0[&0] - 2.0 * s).norm() < 1e-14);
        assert!((p.0[&2] + 2.0 * s).norm() < 1e-14);
    }

    #[test]
    fn intertwine_const_low_order() {
        let s = 1.5;
        assert!((intertwine_const(s, 0).unwrap() - PI / (s - 1.0)).abs() < 1e-13);
        for l in 0..=10 {
            assert!(intertwine_const(1.3, l).unwrap() > 0.0);
        }
    }

    #[test]
    fn ground_state_is_unit() {
        let v = make_vlj(1.5, 0, 0).unwrap();
        assert!((inner_product(&v, &v).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn matrix_coefficient_at_zero() {
        let m = matrix_coefficient(1.5, 2, 2, 1, 0.0).unwrap();
        assert!((m - 1.0).abs() < 1e-9);
    }
}
