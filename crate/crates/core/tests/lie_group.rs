use std::f64::consts::PI;

use bisector_core::lie::{
    direction_from_unit_square, hyperbolic_distance, iota, kak, lorentz_norm, poisson_kernel, Lorentz,
    Moebius, Rot3,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_moebius(rng: &mut impl Rng) -> Moebius {
    loop {
        let mut z = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let (a, b, c, d) = (z(), z(), z(), z());
        let det = a * d - b * c;
        if det.norm() < 0.2 {
            continue;
        }
        let k = det.sqrt().inv();
        return Moebius::new(a * k, b * k, c * k, d * k).unwrap();
    }
}

fn random_rotation(rng: &mut impl Rng) -> Rot3 {
    Rot3::from_euler(
        rng.gen_range(-PI..PI),
        rng.gen_range(0.0..PI),
        rng.gen_range(-PI..PI),
    )
}

fn matmul2(g: &Moebius, h: &Moebius) -> Moebius {
    *g * *h
}

#[test]
fn iota_is_a_homomorphism_into_so31() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_hom = 0.0_f64;
    let mut worst_form = 0.0_f64;
    for _ in 0..1000 {
        let g = random_moebius(&mut rng);
        let h = random_moebius(&mut rng);
        let lhs = iota(&matmul2(&g, &h));
        let rhs = iota(&g) * iota(&h);
        worst_hom = worst_hom.max(lhs.max_abs_diff(&rhs));
        worst_form = worst_form.max(iota(&g).form_residual());
        assert!(iota(&g).0[3][3] >= 1.0);
    }
    assert!(worst_hom <= 1e-12, "homomorphism residual {worst_hom:e}");
    assert!(worst_form <= 1e-12, "form residual {worst_form:e}");
}

#[test]
fn iota_respects_sign_ambiguity() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = random_moebius(&mut rng);
    let minus = Moebius { a: -g.a, b: -g.b, c: -g.c, d: -g.d };
    assert!(g.approx_eq(&minus, 0.0));
    assert!(iota(&g).max_abs_diff(&iota(&minus)) == 0.0);
}

#[test]
fn norm_is_squared_top_singular_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..500 {
        let g = random_moebius(&mut rng);
        let s = g.max_singular_value();
        let n = lorentz_norm(&iota(&g));
        assert!((n - s * s).abs() <= 1e-10 * n, "{n} vs {}", s * s);
        assert!((hyperbolic_distance(&iota(&g)) - n.ln()).abs() < 1e-10);
    }
}

#[test]
fn kak_roundtrip_and_inverse_swap() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let l = iota(&random_moebius(&mut rng));
        if l.0[3][3] - 1.0 < 1e-6 {
            continue;
        }
        let k = kak(&l).unwrap();
        assert!(k.reconstruct().max_abs_diff(&l) <= 1e-10);
        let unit = |v: [f64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        assert!((unit(k.dir1) - 1.0).abs() < 1e-12 && (unit(k.dir2) - 1.0).abs() < 1e-12);
        let ki = kak(&l.inverse()).unwrap();
        assert!((ki.t - k.t).abs() < 1e-10);
        for i in 0..3 {
            // the Weyl element flips e1, so the boundary points come back antipodal
            assert!((ki.dir1[i] + k.dir2[i]).abs() < 1e-9);
            assert!((ki.dir2[i] + k.dir1[i]).abs() < 1e-9);
        }
        // K(g) = k1 k2 does not depend on the gauge
        let m = Rot3::about_x(0.77);
        let k1 = k.k1 * m;
        let k2 = m.transpose() * k.k2;
        let alt = Lorentz::from_rotation(&k1) * Lorentz::boost(k.t) * Lorentz::from_rotation(&k2);
        assert!(alt.max_abs_diff(&l) < 1e-10);
    }
}

#[test]
fn kak_reads_rotation_then_boost() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..50 {
        let r = random_rotation(&mut rng);
        let t = rng.gen_range(0.1..4.0);
        let l = Lorentz::from_rotation(&r) * Lorentz::boost(t);
        let k = kak(&l).unwrap();
        let e = r.apply([1.0, 0.0, 0.0]);
        assert!((k.t - t).abs() < 1e-10);
        for i in 0..3 {
            assert!((k.dir1[i] - e[i]).abs() < 1e-9);
            assert!((k.dir2[i] - [1.0, 0.0, 0.0][i]).abs() < 1e-9);
        }
    }
}

#[test]
fn distance_is_conjugation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..50 {
        let k = Lorentz::from_rotation(&random_rotation(&mut rng));
        let t = rng.gen_range(0.0..5.0);
        let c = k * Lorentz::boost(t) * k.inverse();
        assert!((hyperbolic_distance(&c) - t).abs() < 1e-10);
    }
}

#[test]
fn poisson_kernel_sphere_integrals() {
    // Probability measure on the sphere, Gauss-Legendre in cos u.
    let (x, w) = bisector_core::numeric::gauss_legendre(200);
    let nphi = 200;
    for r in [0.1, 0.5, 0.8] {
        let (phi, theta) = (0.4, 1.1);
        let mut first = 0.0;
        let mut second = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            let u = xi.acos();
            for k in 0..nphi {
                let v = 2.0 * std::f64::consts::PI * k as f64 / nphi as f64;
                let p = poisson_kernel(phi, theta, r, v, u).unwrap();
                let dk = wi / 2.0 / nphi as f64;
                first += p * dk;
                second += p * p * dk;
            }
        }
        // the squared kernel is the density of a probability measure
        assert!((second - 1.0).abs() < 1e-9, "r={r}: {second}");
        let want = (1.0 - r * r) / (2.0 * r) * ((1.0 + r) / (1.0 - r)).ln();
        assert!((first - want).abs() < 1e-9, "r={r}: {first} vs {want}");
    }
}

#[test]
fn boost_along_matches_kak() {
    let d = direction_from_unit_square(0.3, 0.8);
    let k = kak(&Lorentz::boost_along(d, 1.7)).unwrap();
    for (i, di) in d.iter().enumerate() {
        assert!((k.dir1[i] - di).abs() < 1e-12);
        assert!((k.dir2[i] - di).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn prop_homomorphism(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_moebius(&mut rng);
        let h = random_moebius(&mut rng);
        let d = iota(&(g * h)).max_abs_diff(&(iota(&g) * iota(&h)));
        prop_assert!(d <= 1e-12);
    }

    #[test]
    fn prop_kak_roundtrip(alpha in -3.0f64..3.0, beta in 0.01f64..3.1, gamma in -3.0f64..3.0,
                          a2 in -3.0f64..3.0, b2 in 0.0f64..3.1, g2 in -3.0f64..3.0, t in 1e-3f64..6.0) {
        let l = Lorentz::from_rotation(&Rot3::from_euler(alpha, beta, gamma))
            * Lorentz::boost(t)
            * Lorentz::from_rotation(&Rot3::from_euler(a2, b2, g2));
        let k = kak(&l).unwrap();
        prop_assert!(k.reconstruct().max_abs_diff(&l) <= 1e-10);
        prop_assert!((k.t - t).abs() <= 1e-8);
    }

    #[test]
    fn prop_lorentz_inverse(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = iota(&random_moebius(&mut rng));
        prop_assert!((l * l.inverse()).max_abs_diff(&Lorentz::identity()) < 1e-11);
    }
}
