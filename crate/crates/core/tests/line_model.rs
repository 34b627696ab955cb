use std::f64::consts::PI;

use bisector_core::line::{
    apply_operator, c_constant_residual, casimir_residual, check_ladder, inner_product, intertwine,
    intertwine_const, intertwine_quadrature, j_plus_chain, k_casimir_residual, make_vlj,
    matrix_coefficient, Operator,
};
use num_complex::Complex64;

const S_VALUES: [f64; 3] = [1.3, 1.30568, 1.7];

#[test]
fn ladder_identities_hold_to_high_order() {
    for s in S_VALUES {
        for l in 0..=8 {
            for j in -l..=l {
                let r = check_ladder(s, l, j).unwrap();
                assert!(r.max() <= 1e-10, "s={s} l={l} j={j}: {r:?}");
            }
        }
    }
}

#[test]
fn highest_weight_r_residual_is_exactly_zero() {
    for l in 0..=6 {
        assert_eq!(check_ladder(1.5, l, l).unwrap().r, 0.0);
    }
}

#[test]
fn casimir_eigenvalues() {
    for s in S_VALUES {
        for l in 0..=6 {
            for j in -l..=l {
                let c = casimir_residual(s, l, j).unwrap();
                assert!(c <= 1e-9, "Casimir s={s} l={l} j={j}: {c:e}");
                let k = k_casimir_residual(s, l, j).unwrap();
                assert!(k <= 1e-10, "K-Casimir s={s} l={l} j={j}: {k:e}");
            }
        }
    }
}

#[test]
fn operators_preserve_parity() {
    let ops = [Operator::H, Operator::IH, Operator::R, Operator::L, Operator::JPlus, Operator::JMinus];
    for l in 0..=4 {
        for j in -l..=l {
            let v = make_vlj(1.42, l, j).unwrap().to_function();
            for op in ops {
                assert!(apply_operator(op, &v).parity_ok(), "{op:?} l={l} j={j}");
            }
        }
    }
}

#[test]
fn j_plus_chain_reaches_every_k_type() {
    for l in 0..=4 {
        for j in -l..=l {
            let c = j_plus_chain(1.3, l, j).unwrap();
            assert!(c.residual < 1e-10, "l={l} j={j} residual {}", c.residual);
            assert!(c.reduced_factor.re > 0.0, "l={l} j={j}: {:?}", c.reduced_factor);
            assert!(c.reduced_factor.im.abs() < 1e-9 * c.reduced_factor.re);
        }
    }
}

#[test]
fn c_constant_matches_j_plus() {
    for s in S_VALUES {
        for l in 0..=8 {
            assert!(c_constant_residual(s, l).unwrap() < 1e-10);
        }
    }
}

#[test]
fn vectors_are_unit_and_orthogonal() {
    for s in [1.3, 1.5, 1.8] {
        for l in 0..=6 {
            for j in -l..=l {
                let v = make_vlj(s, l, j).unwrap();
                let n = inner_product(&v, &v).unwrap();
                assert!((n - 1.0).abs() < 1e-8, "s={s} l={l} j={j}: {n}");
                if l >= 1 && j.abs() < l {
                    let w = make_vlj(s, l - 1, j).unwrap();
                    assert!(inner_product(&v, &w).unwrap().abs() < 1e-8);
                }
            }
        }
    }
}

#[test]
fn unit_norm_matches_beta_integrals() {
    // ∫₀^∞ r^{2m+1} (1+r²)^{-N} dr = Γ(m+1) Γ(N-m-1) / (2 Γ(N))
    let beta = |m: i32, big_n: i32| -> f64 {
        let g = |x: f64| bisector_core::numeric::gamma(x).unwrap();
        g(f64::from(m) + 1.0) * g(f64::from(big_n - m - 1)) / (2.0 * g(f64::from(big_n)))
    };
    for s in [1.3, 1.7] {
        for l in 0..=5 {
            for j in 0..=l {
                let v = make_vlj(s, l, j).unwrap();
                let mut total = 0.0;
                for (p, a) in &v.radial {
                    for (q, b) in &v.radial {
                        total += a * b * beta((p + q) / 2, 2 + 2 * l);
                    }
                }
                let n = 2.0 * PI * intertwine_const(s, l).unwrap() * total;
                assert!((n - 1.0).abs() < 1e-9, "s={s} l={l} j={j}: {n}");
            }
        }
    }
}

#[test]
fn intertwiner_matches_kernel_quadrature() {
    for (s, l, j) in [(1.5, 1, 1), (1.5, 0, 0), (1.3, 2, 1), (1.7, 2, -2)] {
        let v = make_vlj(s, l, j).unwrap();
        let f = v.to_function();
        let iv = intertwine(&v).unwrap();
        for zeta in [Complex64::new(0.4, 0.3), Complex64::new(-1.1, 0.7)] {
            let num = intertwine_quadrature(&f, zeta, 96).unwrap();
            let want = iv.eval(zeta.norm(), zeta.arg());
            let rel = (num - want).norm() / want.norm();
            assert!(rel < 1e-7, "s={s} l={l} j={j} zeta={zeta}: {num} vs {want}");
        }
    }
}

#[test]
fn intertwine_const_worked_example() {
    let g = |x: f64| bisector_core::numeric::gamma(x).unwrap();
    let want = -PI * g(0.5).powi(2) / (g(2.5) * g(-0.5));
    assert!((intertwine_const(1.5, 1).unwrap() - want).abs() < 1e-12);
}

#[test]
fn spherical_matrix_coefficient_closed_form() {
    let s = 1.5;
    for t in [0.5, 1.0, 2.0, 5.0] {
        let num = matrix_coefficient(s, 0, 0, 0, t).unwrap();
        let exact = ((s - 1.0) * t).sinh() / ((s - 1.0) * t.sinh());
        assert!(((num - exact) / exact).abs() <= 1e-8, "t={t}: {num} vs {exact}");
    }
}

#[test]
fn matrix_coefficient_large_t_profile() {
    let s = 1.5;
    for (a, ap, c) in [(0, 0, 0), (1, 1, 0), (1, 1, 1), (2, 1, 1), (2, 2, 2)] {
        let ratio = |t: f64| {
            matrix_coefficient(s, a, ap, c, t).unwrap() / (t * (s - 2.0) - f64::from(c.abs()) * t).exp()
        };
        let (r8, r10) = (ratio(8.0), ratio(10.0));
        assert!(((r8 - r10) / r10).abs() < 0.01, "a={a} a'={ap} c={c}: {r8} vs {r10}");
    }
}

#[test]
fn matrix_coefficient_is_unit_at_identity() {
    for (a, c) in [(0, 0), (1, 0), (1, 1), (3, -2)] {
        let m = matrix_coefficient(1.3, a, a, c, 0.0).unwrap();
        assert!((m - 1.0).abs() < 1e-9, "a={a} c={c}: {m}");
    }
    assert!(matrix_coefficient(1.3, 2, 1, 1, 0.0).unwrap().abs() < 1e-9);
}
