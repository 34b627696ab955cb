//! End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero exit
//! if any criterion fails.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use bisector_core::harmonics::{gen_sph_harm, sph_harm, sphere_quadrature, BisectorIndex, HarmonicIndex};
use bisector_core::lie::{iota, kak, Lorentz, Moebius};
use bisector_core::line::{casimir_residual, check_ladder, matrix_coefficient};
use bisector_core::numeric::gauss_legendre;
use bisector_core::orbit::{
    apollonian_generators, descartes_twice, enumerate_circles, enumerate_circles_unpruned, group_ball,
    is_exact_lorentz, orbit_vector_count, orbit_vectors, BallOptions, CircleOptions, GroupBall, Quadruple,
    VectorNorm, VectorOptions,
};
use bisector_core::ps::{
    aligned_conjugator, bisector_sum, moment, poisson_derivative_check, ps_approx, APOLLONIAN_DELTA,
    DEFAULT_S_OFFSET,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ROOT: Quadruple = Quadruple([-1, 2, 2, 3]);
const BALL_T: f64 = 2e5;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn bisector_bin(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_bisector")).args(args).output().expect("spawn bisector")
}

struct Shared {
    fit: serde_json::Value,
    ball: GroupBall,
}

fn shared() -> Shared {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("counts.csv");
    let csv_s = csv.to_str().unwrap();
    let o = bisector_bin(&["pack-count", "--root", "-1,2,2,3", "--tmax", "100000", "--out", csv_s]);
    assert!(o.status.success(), "pack-count: {}", String::from_utf8_lossy(&o.stderr));
    let o = bisector_bin(&["fit-delta", "--input", csv_s]);
    assert!(o.status.success(), "fit-delta: {}", String::from_utf8_lossy(&o.stderr));
    let fit = serde_json::from_slice(&o.stdout).unwrap();

    let gens = apollonian_generators();
    let s = APOLLONIAN_DELTA + DEFAULT_S_OFFSET;
    let base = Lorentz::boost_along([-0.807, -0.486, -0.334], 2.44);
    let g = aligned_conjugator(&gens, &base, 2e4, s, [FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0]).unwrap();
    let ball = group_ball(&gens, &g, BALL_T, &BallOptions { safety: 1.0, ..BallOptions::default() }).unwrap();
    assert!(ball.exact_pruning, "conjugated basepoint left the chamber");
    Shared { fit, ball }
}

fn c1(sh: &Shared) -> Outcome {
    let delta = sh.fit["delta"].as_f64().unwrap();
    check((delta - APOLLONIAN_DELTA).abs() <= 0.05, format!("delta = {delta:.5} (target 1.30568 +- 0.05)"))
}

fn c2(sh: &Shared) -> Outcome {
    let band = sh.fit["band"].as_f64().unwrap();
    check(band <= 0.05, format!("N/T^delta spread over top decade = {:.3}%", 100.0 * band))
}

fn c3(sh: &Shared) -> Outcome {
    let count = enumerate_circles(ROOT, 100_000, &CircleOptions::default()).map_err(|e| e.to_string())?;
    // independent walk: every orbit vector is checked directly on the form
    let vectors = orbit_vectors(&apollonian_generators(), [-1, 2, 2, 3], 1e4, &VectorNorm::LInf, &VectorOptions::default())
        .map_err(|e| e.to_string())?;
    let off_cone = vectors.iter().filter(|v| descartes_twice(**v) != Some(0)).count();
    let non_lorentz = sh.ball.elements.iter().filter(|e| !is_exact_lorentz(&e.matrix)).count();
    check(
        off_cone == 0 && non_lorentz == 0 && count.quadruples_checked > 0,
        format!(
            "{} quadruples checked in enumeration, {} orbit vectors ({off_cone} off cone), {} ball matrices ({non_lorentz} failing)",
            count.quadruples_checked,
            vectors.len(),
            sh.ball.elements.len()
        ),
    )
}

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

fn c4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut hom, mut form) = (0.0_f64, 0.0_f64);
    for _ in 0..1000 {
        let (g, h) = (random_moebius(&mut rng), random_moebius(&mut rng));
        hom = hom.max(iota(&(g * h)).max_abs_diff(&(iota(&g) * iota(&h))));
        form = form.max(iota(&g).form_residual());
    }
    let mut boost = 0.0_f64;
    let mut pattern = true;
    for t in [0.3, 1.0, 2.5] {
        let l = iota(&Moebius::diagonal(t));
        let b = Lorentz::boost(t);
        boost = boost.max(l.max_abs_diff(&b));
        for i in 0..4 {
            for j in 0..4 {
                pattern &= (b.0[i][j] == 0.0) == (l.0[i][j] == 0.0);
            }
        }
    }
    check(
        hom <= 1e-12 && form <= 1e-12 && boost <= 1e-12 && pattern,
        format!("homomorphism {hom:.1e}, form {form:.1e}, boost {boost:.1e}, zero pattern {pattern}"),
    )
}

fn c5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut round, mut swap, mut used) = (0.0_f64, 0.0_f64, 0);
    while used < 1000 {
        let l = iota(&random_moebius(&mut rng));
        let (Ok(k), Ok(ki)) = (kak(&l), kak(&l.inverse())) else { continue };
        used += 1;
        round = round.max(k.reconstruct().max_abs_diff(&l));
        for i in 0..3 {
            // dir1(g^-1) = -dir2(g) in the e1-pole chart
            swap = swap.max((ki.dir1[i] + k.dir2[i]).abs()).max((ki.dir2[i] + k.dir1[i]).abs());
        }
    }
    check(round <= 1e-10 && swap <= 1e-9, format!("roundtrip {round:.1e}, inverse swap {swap:.1e} over {used} elements"))
}

fn c6() -> Outcome {
    let (mut ladder, mut cas) = (0.0_f64, 0.0_f64);
    for s in [1.3, 1.30568, 1.7] {
        for l in 0..=8 {
            for j in -l..=l {
                ladder = ladder.max(check_ladder(s, l, j).map_err(|e| e.to_string())?.max());
                if l <= 6 {
                    cas = cas.max(casimir_residual(s, l, j).map_err(|e| e.to_string())?);
                }
            }
        }
    }
    check(ladder <= 1e-10 && cas <= 1e-9, format!("ladder {ladder:.1e} (l<=8), Casimir {cas:.1e} (l<=6)"))
}

fn c7() -> Outcome {
    let s = 1.5;
    let mut closed = 0.0_f64;
    for t in [0.5, 1.0, 2.0, 5.0] {
        let num = matrix_coefficient(s, 0, 0, 0, t).map_err(|e| e.to_string())?;
        let exact = ((s - 1.0) * t).sinh() / ((s - 1.0) * t.sinh());
        closed = closed.max(((num - exact) / exact).abs());
    }
    let mut flat = 0.0_f64;
    for (a, ap, c) in [(0, 0, 0), (1, 1, 0), (1, 1, 1), (2, 1, 1), (2, 2, 2)] {
        let ratio = |t: f64| -> Result<f64, String> {
            Ok(matrix_coefficient(s, a, ap, c, t).map_err(|e| e.to_string())?
                / (t * (s - 2.0) - f64::from(c.abs()) * t).exp())
        };
        let (r8, r10) = (ratio(8.0)?, ratio(10.0)?);
        flat = flat.max(((r8 - r10) / r10).abs());
    }
    check(closed <= 1e-8 && flat <= 0.01, format!("closed form {closed:.1e}, large-t drift {:.3}%", 100.0 * flat))
}

fn gram_deviation(values: &[Vec<Complex64>], weights: &[f64]) -> f64 {
    let mut worst = 0.0_f64;
    for (p, vp) in values.iter().enumerate() {
        for (q, vq) in values.iter().enumerate().skip(p) {
            let g: Complex64 = vp.iter().zip(vq).zip(weights).map(|((x, y), w)| x * y.conj() * w).sum();
            let want = if p == q { 1.0 } else { 0.0 };
            worst = worst.max((g - want).norm());
        }
    }
    worst
}

fn c8() -> Outcome {
    let grid = sphere_quadrature(24, 36);
    let weights: Vec<f64> = grid.iter().map(|g| g.2).collect();
    let mut values = Vec::new();
    for a in 0..=8 {
        for b in -a..=a {
            let i = HarmonicIndex::spherical(a, b).unwrap();
            values.push(grid.iter().map(|&(th, ph, _)| sph_harm(i, th, ph).unwrap()).collect());
        }
    }
    let sphere = gram_deviation(&values, &weights);

    let (x, w) = gauss_legendre(16);
    let n = 16;
    let mut nodes = Vec::new();
    for (xi, wi) in x.iter().zip(&w) {
        for p in 0..n {
            for q in 0..n {
                let (phi, phi2) = (2.0 * PI * p as f64 / n as f64, 2.0 * PI * q as f64 / n as f64);
                nodes.push((phi, xi.acos(), phi2, wi / 2.0 / (n * n) as f64));
            }
        }
    }
    let weights: Vec<f64> = nodes.iter().map(|g| g.3).collect();
    let mut values = Vec::new();
    for a in 0..=6 {
        for b in -a..=a {
            for c in -a..=a {
                let i = HarmonicIndex::new(a, b, c).unwrap();
                values.push(nodes.iter().map(|&(p, t, q, _)| gen_sph_harm(i, p, t, q).unwrap()).collect());
            }
        }
    }
    let group = gram_deviation(&values, &weights);
    check(sphere <= 1e-10 && group <= 1e-10, format!("K/M (a<=8) {sphere:.1e}, K (a<=6) {group:.1e}"))
}

fn bounds() -> Vec<f64> {
    (0..4).map(|k| BALL_T / 2f64.powi(3 - k)).collect()
}

fn c9(sh: &Shared) -> Outcome {
    let idx = BisectorIndex::new(1, 0, 1, 0, 1).unwrap();
    let mut ratios = Vec::new();
    for t in bounds() {
        let s = bisector_sum(&sh.ball, idx, t).map_err(|e| e.to_string())?;
        let s0 = bisector_sum(&sh.ball, BisectorIndex::trivial(), t).map_err(|e| e.to_string())?;
        ratios.push(s.norm() / s0.re);
    }
    let decreasing = ratios.windows(2).all(|w| w[1] < w[0]);
    let last = *ratios.last().unwrap();
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.4}")).collect();
    check(decreasing && last <= 0.2, format!("|S_c=1|/S_0 = [{}] at T = {BALL_T:e}/8..{BALL_T:e}", shown.join(", ")))
}

fn c10(sh: &Shared) -> Outcome {
    let s = APOLLONIAN_DELTA + DEFAULT_S_OFFSET;
    let m = ps_approx(&sh.ball, s).map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut parts = Vec::new();
    for (a, b) in [(1, 0), (1, 1), (2, 0)] {
        let nu = moment(&m, a, b).map_err(|e| e.to_string())?;
        let idx = BisectorIndex::new(a, b, 0, 0, 0).unwrap();
        let mut dr = Vec::new();
        for t in bounds() {
            let sab = bisector_sum(&sh.ball, idx, t).map_err(|e| e.to_string())?;
            let s0 = bisector_sum(&sh.ball, BisectorIndex::trivial(), t).map_err(|e| e.to_string())?;
            dr.push(sab / s0 / nu.conj());
        }
        let last = *dr.last().unwrap();
        // the last two doublings span the final three bounds
        let spread = dr[1..].iter().map(|r| (r - last).norm() / last.norm()).fold(0.0, f64::max);
        ok &= spread <= 0.15;
        parts.push(format!("({a},{b}) -> {:.3}{:+.3}i spread {:.2}%", last.re, last.im, 100.0 * spread));
    }
    check(ok, parts.join("; "))
}

fn c11() -> Outcome {
    let c = poisson_derivative_check(APOLLONIAN_DELTA, 32, 32, 1e-5);
    check(c.max_residual <= 1e-6, format!("max residual {:.1e} on {} points", c.max_residual, c.grid.len()))
}

fn c12() -> Outcome {
    let opts = CircleOptions::default();
    let mut pruned_ok = true;
    for root in [ROOT, Quadruple([0, 0, 1, 1]), Quadruple([-2, 3, 6, 7])] {
        let fast = enumerate_circles(root, 100, &opts).map_err(|e| e.to_string())?;
        let slow = enumerate_circles_unpruned(root, 100, fast.max_depth + 4, &opts).map_err(|e| e.to_string())?;
        pruned_ok &= fast.curvatures == slow;
    }
    let gens = apollonian_generators();
    let mut cross_ok = true;
    for t in [50.0, 400.0, 3000.0] {
        let v = orbit_vector_count(&gens, [0, 0, 1, 1], t, &VectorNorm::LInf, &VectorOptions::default())
            .map_err(|e| e.to_string())?;
        let c = enumerate_circles(Quadruple([0, 0, 1, 1]), t as i64, &opts).map_err(|e| e.to_string())?;
        cross_ok &= v == c.count_below(t);
    }
    let pool = |n: usize| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
    let circles = |n: usize| pool(n).install(|| enumerate_circles(ROOT, 50_000, &opts).unwrap());
    let g = Lorentz::boost_along([-0.807, -0.486, -0.334], 2.44);
    let ball = |n: usize| pool(n).install(|| group_ball(&gens, &g, 2e4, &BallOptions::default()).unwrap().elements);
    let workers_ok = circles(1) == circles(8) && ball(1) == ball(8);
    let cli = |n: &str| {
        bisector_bin(&["pack-count", "--root", "-1,2,2,3", "--tmax", "20000", "--workers", n]).stdout
    };
    let cli_ok = cli("1") == cli("8");
    check(
        pruned_ok && cross_ok && workers_ok && cli_ok,
        format!("pruned=unpruned {pruned_ok}, vector=circle {cross_ok}, 1 vs 8 workers {workers_ok} (cli {cli_ok})"),
    )
}

fn run(name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Err(format!("panicked: {msg}"))
    });
    let secs = start.elapsed().as_secs_f64();
    match outcome {
        Ok(d) => {
            println!("PASS {name}: {d} [{secs:.1}s]");
            true
        }
        Err(d) => {
            println!("FAIL {name}: {d} [{secs:.1}s]");
            false
        }
    }
}

fn main() {
    let setup = Instant::now();
    let sh = match catch_unwind(shared) {
        Ok(s) => s,
        Err(_) => {
            println!("FAIL setup: pack-count/fit-delta or ball construction failed");
            std::process::exit(1);
        }
    };
    println!(
        "setup: counts to T=1e5 and a {}-element ball to T={BALL_T:e} in {:.1}s",
        sh.ball.elements.len(),
        setup.elapsed().as_secs_f64()
    );
    let results = [
        run("C1 apollonian dimension", || c1(&sh)),
        run("C2 power-law stability", || c2(&sh)),
        run("C3 exact invariance", || c3(&sh)),
        run("C4 iota correctness", c4),
        run("C5 KAK roundtrip and inverse swap", c5),
        run("C6 line-model identities", c6),
        run("C7 matrix coefficient", c7),
        run("C8 harmonic orthonormality", c8),
        run("C9 bisector cancellation", || c9(&sh)),
        run("C10 main-term ratio consistency", || c10(&sh)),
        run("C11 Poisson derivative", c11),
        run("C12 oracle equivalences", c12),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
