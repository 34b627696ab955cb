//! Exact orbit enumeration for the Apollonian group and other integral
//! reflection-type groups preserving a quadratic form of signature (3,1).
//!
//! All word arithmetic is integral and overflow-checked: `i64` for circle
//! curvatures, `i128` for matrices and orbit vectors. Floating point only
//! appears in the conjugated Lorentz matrices handed to the measure code.

use std::collections::HashSet;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::OrbitError;
use crate::lie::{kak, lorentz_norm, mat4_mul, q_conjugator, KakData, Lorentz};

pub type IMat4 = [[i64; 4]; 4];

/// Curvatures above this are rejected outright.
pub const MAX_BOUND: f64 = 1e12;

/// Twice the Descartes form, `2 Q_D(v) = 2 Σ v² - (Σ v)²`, exactly.
pub fn descartes_twice(v: [i128; 4]) -> Option<i128> {
    let mut sq: i128 = 0;
    let mut sum: i128 = 0;
    for x in v {
        sq = sq.checked_add(x.checked_mul(x)?)?;
        sum = sum.checked_add(x)?;
    }
    sq.checked_mul(2)?.checked_sub(sum.checked_mul(sum)?)
}

fn widen(v: [i64; 4]) -> [i128; 4] {
    v.map(i128::from)
}

/// Integer curvature quadruple on the Descartes cone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Quadruple(pub [i64; 4]);

impl Quadruple {
    pub fn new(v: [i64; 4]) -> Result<Self, OrbitError> {
        match descartes_twice(widen(v)) {
            Some(0) => Ok(Quadruple(v)),
            Some(_) => Err(OrbitError::NotOnCone(v)),
            None => Err(OrbitError::Overflow),
        }
    }

    /// Two parallel lines and two equal circles: `(0, 0, n, n)` up to order.
    pub fn is_periodic(&self) -> bool {
        self.0.iter().filter(|&&x| x == 0).count() == 2
    }

    /// The curvature produced by the `i`-th generator: `2 Σ_{j≠i} v_j - v_i`.
    pub fn flipped(&self, i: usize) -> Result<i64, OrbitError> {
        flip(&self.0, i)
    }

    pub fn sum(&self) -> i64 {
        self.0.iter().sum()
    }
}

fn flip(v: &[i64; 4], i: usize) -> Result<i64, OrbitError> {
    let mut others: i64 = 0;
    for (j, x) in v.iter().enumerate() {
        if j != i {
            others = others.checked_add(*x).ok_or(OrbitError::Overflow)?;
        }
    }
    others
        .checked_mul(2)
        .and_then(|x| x.checked_sub(v[i]))
        .ok_or(OrbitError::Overflow)
}

/// Finitely many integer matrices preserving a form with even Gram matrix `gram2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSet {
    pub gens: Vec<IMat4>,
    /// Twice the Gram matrix of the preserved form.
    pub gram2: IMat4,
    pub involutive: bool,
}

impl GeneratorSet {
    /// Validates that every generator preserves the form; `involutive`
    /// additionally demands `γ² = 1`.
    pub fn new(gens: Vec<IMat4>, gram2: IMat4, involutive: bool) -> Result<Self, OrbitError> {
        for (i, g) in gens.iter().enumerate() {
            let gt = transpose(g);
            if imat_mul(&imat_mul(&gt, &gram2)?, g)? != gram2 {
                return Err(OrbitError::NotAnIsometry(i));
            }
            if involutive && imat_mul(g, g)? != identity() {
                return Err(OrbitError::NotInvolution(i));
            }
        }
        Ok(GeneratorSet { gens, gram2, involutive })
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn apply(&self, i: usize, v: [i128; 4]) -> Result<[i128; 4], OrbitError> {
        apply_wide(&self.gens[i], v)
    }
}

/// `S_i`: the identity with row `i` replaced by `2` off the diagonal and `-1` on it.
pub fn apollonian_generators() -> GeneratorSet {
    let gens = (0..4)
        .map(|i| {
            let mut m = identity();
            m[i] = [2; 4];
            m[i][i] = -1;
            m
        })
        .collect();
    GeneratorSet::new(gens, descartes_gram2(), true).expect("Apollonian generators are valid")
}

/// `2 G_D = 2I - 11ᵀ`.
pub fn descartes_gram2() -> IMat4 {
    let mut g = [[-1; 4]; 4];
    for (i, row) in g.iter_mut().enumerate() {
        row[i] = 1;
    }
    g
}

pub fn identity() -> IMat4 {
    let mut m = [[0; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1;
    }
    m
}

pub fn transpose(m: &IMat4) -> IMat4 {
    let mut t = [[0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            t[j][i] = m[i][j];
        }
    }
    t
}

pub fn imat_mul(a: &IMat4, b: &IMat4) -> Result<IMat4, OrbitError> {
    let mut m = [[0; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            let mut acc: i64 = 0;
            for l in 0..4 {
                let p = a[i][l].checked_mul(b[l][j]).ok_or(OrbitError::Overflow)?;
                acc = acc.checked_add(p).ok_or(OrbitError::Overflow)?;
            }
            *e = acc;
        }
    }
    Ok(m)
}

fn apply_wide(m: &IMat4, v: [i128; 4]) -> Result<[i128; 4], OrbitError> {
    let mut out = [0i128; 4];
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc: i128 = 0;
        for j in 0..4 {
            let p = i128::from(m[i][j]).checked_mul(v[j]).ok_or(OrbitError::Overflow)?;
            acc = acc.checked_add(p).ok_or(OrbitError::Overflow)?;
        }
        *o = acc;
    }
    Ok(out)
}

/// Applies any generator that strictly lowers the curvature sum until none does.
pub fn reduce_root(q: Quadruple) -> Result<Quadruple, OrbitError> {
    let mut v = Quadruple::new(q.0)?.0;
    for _ in 0..10_000 {
        let mut improved = false;
        for i in 0..4 {
            let new = flip(&v, i)?;
            if new < v[i] {
                v[i] = new;
                improved = true;
            }
        }
        if !improved {
            return Ok(Quadruple(v));
        }
    }
    Err(OrbitError::DepthExceeded(10_000))
}

fn check_root(root: &Quadruple) -> Result<(), OrbitError> {
    for i in 0..4 {
        let new = root.flipped(i)?;
        if new < root.0[i] {
            return Err(OrbitError::NonRootInput {
                root: root.0,
                generator: i + 1,
                from: root.0[i],
                to: new,
            });
        }
    }
    Ok(())
}

/// Settings for [`enumerate_circles`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleOptions {
    /// Also count root circles of non-positive curvature (the bounding circle).
    pub include_bounding: bool,
    /// `None` detects `(0,0,n,n)` roots automatically.
    pub periodic: Option<bool>,
    /// Restrict to the ideal triangle that excludes this generator (0-based)
    /// as the first letter.
    pub excluded_first: Option<usize>,
    /// Abort once this many circles have been produced.
    pub cap: usize,
    /// Abort past this word length.
    pub depth_cap: usize,
}

impl Default for CircleOptions {
    fn default() -> Self {
        CircleOptions {
            include_bounding: false,
            periodic: None,
            excluded_first: None,
            cap: 200_000_000,
            depth_cap: 1_000_000,
        }
    }
}

/// Sorted multiset of enumerated curvatures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleCount {
    pub root: Quadruple,
    pub t_max: i64,
    pub periodic: bool,
    pub curvatures: Vec<i64>,
    pub max_depth: usize,
    /// Quadruples produced and checked to lie exactly on the cone.
    pub quadruples_checked: u64,
}

impl CircleCount {
    /// Circles of curvature at most `t`.
    pub fn count_at(&self, t: f64) -> u64 {
        self.curvatures.partition_point(|&k| (k as f64) <= t) as u64
    }

    /// Circles of curvature strictly below `t`.
    pub fn count_below(&self, t: f64) -> u64 {
        self.curvatures.partition_point(|&k| (k as f64) < t) as u64
    }

    pub fn curve(&self, grid: &[f64]) -> CountCurve {
        CountCurve {
            points: grid.iter().map(|&t| (t, self.count_at(t))).collect(),
        }
    }

    /// `(curvature, multiplicity)` pairs.
    pub fn histogram(&self) -> Vec<(i64, u64)> {
        let mut out: Vec<(i64, u64)> = Vec::new();
        for &k in &self.curvatures {
            match out.last_mut() {
                Some((last, n)) if *last == k => *n += 1,
                _ => out.push((k, 1)),
            }
        }
        out
    }
}

struct CirclePlan {
    root: Quadruple,
    periodic: bool,
    first_letters: Vec<usize>,
    root_circles: Vec<i64>,
}

fn plan(root: Quadruple, t_max: i64, opts: &CircleOptions) -> Result<CirclePlan, OrbitError> {
    let root = Quadruple::new(root.0)?;
    if t_max as f64 > MAX_BOUND {
        return Err(OrbitError::BoundTooLarge(t_max as f64));
    }
    check_root(&root)?;
    let periodic = match opts.periodic {
        Some(true) if !root.is_periodic() => {
            return Err(OrbitError::InvalidOption(format!(
                "{:?} is not a periodic root (two zero curvatures)",
                root.0
            )))
        }
        Some(p) => p,
        None => root.is_periodic(),
    };
    let in_range = |k: i64| (k > 0 && k <= t_max) || (k <= 0 && opts.include_bounding);
    let (first_letters, root_circles) = if let Some(ex) = opts.excluded_first {
        if ex >= 4 {
            return Err(OrbitError::InvalidOption(format!("generator index {} out of range", ex + 1)));
        }
        if periodic {
            return Err(OrbitError::InvalidOption(
                "the ideal-triangle restriction needs a bounded root".into(),
            ));
        }
        let k = root.0[ex];
        let firsts = (0..4).filter(|&j| j != ex).collect();
        (firsts, if k > 0 && k <= t_max { vec![k] } else { vec![] })
    } else if periodic {
        // one period: one of the two equal circles, and the branches that
        // replace a line (those fill the two gaps between the circles)
        let firsts: Vec<usize> = (0..4).filter(|&j| root.0[j] == 0).collect();
        let k = root.0.iter().copied().find(|&x| x != 0).unwrap_or(0);
        (firsts, if k > 0 && k <= t_max { vec![k] } else { vec![] })
    } else {
        (
            (0..4).collect(),
            root.0.iter().copied().filter(|&k| in_range(k)).collect(),
        )
    };
    Ok(CirclePlan { root, periodic, first_letters, root_circles })
}

type Node = ([i64; 4], u8);

fn expand(node: &Node, letters: &[usize], t_max: i64) -> Result<(Vec<Node>, Vec<i64>), OrbitError> {
    let (v, last) = node;
    let mut children = Vec::with_capacity(3);
    let mut emitted = Vec::with_capacity(3);
    for &i in letters {
        if i as u8 == *last {
            continue;
        }
        let new = flip(v, i)?;
        if new < v[i] {
            return Err(OrbitError::NonMonotone { parent: v[i], child: new });
        }
        if new > t_max {
            continue;
        }
        let mut w = *v;
        w[i] = new;
        if descartes_twice(widen(w)) != Some(0) {
            return Err(OrbitError::NotOnCone(w));
        }
        if new > 0 {
            emitted.push(new);
        }
        children.push((w, i as u8));
    }
    Ok((children, emitted))
}

/// Counts the circles of a packing with curvature in `(0, T]`.
///
/// Walks the tree of reduced words level by level. From a reduced root every
/// new curvature is at least the one it replaces, so a branch is cut as soon
/// as it produces a curvature above `T`.
pub fn enumerate_circles(root: Quadruple, t_max: i64, opts: &CircleOptions) -> Result<CircleCount, OrbitError> {
    let p = plan(root, t_max, opts)?;
    let all: Vec<usize> = (0..4).collect();
    let mut curvatures = p.root_circles.clone();
    let (mut frontier, first) = expand(&(p.root.0, u8::MAX), &p.first_letters, t_max)?;
    let mut checked = frontier.len() as u64;
    curvatures.extend(first);
    let mut depth = 0;
    while !frontier.is_empty() {
        depth += 1;
        if depth > opts.depth_cap {
            return Err(OrbitError::DepthExceeded(opts.depth_cap));
        }
        let results: Vec<(Vec<Node>, Vec<i64>)> = frontier
            .par_iter()
            .map(|n| expand(n, &all, t_max))
            .collect::<Result<_, _>>()?;
        let mut next = Vec::new();
        for (children, emitted) in results {
            checked += children.len() as u64;
            next.extend(children);
            curvatures.extend(emitted);
        }
        if curvatures.len() > opts.cap {
            return Err(OrbitError::FrontierExplosion { cap: opts.cap });
        }
        frontier = next;
    }
    curvatures.par_sort_unstable();
    Ok(CircleCount {
        root: p.root,
        t_max,
        periodic: p.periodic,
        curvatures,
        max_depth: depth,
        quadruples_checked: checked,
    })
}

/// Reference enumeration without pruning: every reduced word up to
/// `depth` letters is visited, and a curvature is recorded only if it lies
/// in `(0, T]`.
pub fn enumerate_circles_unpruned(
    root: Quadruple,
    t_max: i64,
    depth: usize,
    opts: &CircleOptions,
) -> Result<Vec<i64>, OrbitError> {
    let p = plan(root, t_max, opts)?;
    fn walk(v: [i64; 4], last: usize, left: usize, t_max: i64, out: &mut Vec<i64>) -> Result<(), OrbitError> {
        if left == 0 {
            return Ok(());
        }
        for i in 0..4 {
            if i == last {
                continue;
            }
            let new = flip(&v, i)?;
            if new > 0 && new <= t_max {
                out.push(new);
            }
            let mut w = v;
            w[i] = new;
            walk(w, i, left - 1, t_max, out)?;
        }
        Ok(())
    }
    let branches: Vec<Vec<i64>> = p
        .first_letters
        .par_iter()
        .map(|&i| -> Result<Vec<i64>, OrbitError> {
            let mut out = Vec::new();
            let new = flip(&p.root.0, i)?;
            if new > 0 && new <= t_max {
                out.push(new);
            }
            let mut w = p.root.0;
            w[i] = new;
            walk(w, i, depth.saturating_sub(1), t_max, &mut out)?;
            Ok(out)
        })
        .collect::<Result<_, _>>()?;
    let mut all = p.root_circles;
    for b in branches {
        all.extend(b);
    }
    all.sort_unstable();
    Ok(all)
}

/// Circles inside the ideal triangle opposite generator `excluded` (0-based).
pub fn ideal_triangle_count(root: Quadruple, t_max: i64, excluded: usize) -> Result<CircleCount, OrbitError> {
    let opts = CircleOptions { excluded_first: Some(excluded), ..CircleOptions::default() };
    enumerate_circles(root, t_max, &opts)
}

/// Sampled counting function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountCurve {
    pub points: Vec<(f64, u64)>,
}

impl CountCurve {
    pub fn is_monotone(&self) -> bool {
        self.points.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1)
    }
}

/// `per_decade` log-spaced points from `t_min` to `t_max` inclusive.
pub fn geometric_grid(t_min: f64, t_max: f64, per_decade: usize) -> Vec<f64> {
    let decades = (t_max / t_min).log10();
    let n = (decades * per_decade as f64).round().max(1.0) as usize;
    (0..=n)
        .map(|k| t_min * (t_max / t_min).powf(k as f64 / n as f64))
        .collect()
}

/// Least-squares slope of `log N` against `log T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub delta: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub points_used: usize,
    pub t_lo: f64,
    pub t_hi: f64,
}

/// Fits the growth exponent over the top two decades of the curve.
pub fn fit_exponent(curve: &CountCurve) -> Result<ExponentFit, OrbitError> {
    let pts: Vec<(f64, f64)> = curve
        .points
        .iter()
        .filter(|(t, n)| *t > 0.0 && *n > 0)
        .map(|&(t, n)| (t, n as f64))
        .collect();
    let t_hi = pts.iter().map(|p| p.0).fold(0.0, f64::max);
    let t_lo_all = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let used: Vec<(f64, f64)> = pts.iter().copied().filter(|p| p.0 >= t_hi / 100.0 * (1.0 - 1e-12)).collect();
    let decades = if t_hi > 0.0 { (t_hi / t_lo_all).log10() } else { 0.0 };
    if used.len() < 8 || decades < 2.0 - 1e-9 {
        return Err(OrbitError::InsufficientRange { needed: 8, got: used.len(), decades });
    }
    let n = used.len() as f64;
    let xs: Vec<f64> = used.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = used.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let stderr = (rss / (n - 2.0) / sxx).sqrt();
    let t_lo = used.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    Ok(ExponentFit { delta: slope, stderr, intercept, points_used: used.len(), t_lo, t_hi })
}

/// User-supplied vector norm.
pub type NormFn = Arc<dyn Fn(&[f64; 4]) -> f64 + Send + Sync>;

/// Norm used by [`orbit_vector_count`].
#[derive(Clone)]
pub enum VectorNorm {
    LInf,
    L2,
    /// Any positive, continuous, 1-homogeneous function.
    Custom(NormFn),
}

impl std::fmt::Debug for VectorNorm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VectorNorm::LInf => write!(f, "LInf"),
            VectorNorm::L2 => write!(f, "L2"),
            VectorNorm::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl VectorNorm {
    pub fn eval(&self, v: &[i128; 4]) -> f64 {
        let x = v.map(|c| c as f64);
        match self {
            VectorNorm::LInf => x.iter().map(|c| c.abs()).fold(0.0, f64::max),
            VectorNorm::L2 => x.iter().map(|c| c * c).sum::<f64>().sqrt(),
            VectorNorm::Custom(f) => f(&x),
        }
    }
}

/// Options for the vector-orbit walk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VectorOptions {
    /// A vector is expanded only while its norm is below `T · slack`.
    pub slack: f64,
    pub cap: usize,
}

impl Default for VectorOptions {
    fn default() -> Self {
        VectorOptions { slack: 2.0, cap: 50_000_000 }
    }
}

/// Distinct orbit vectors with norm below `T`, sorted.
pub fn orbit_vectors(
    gens: &GeneratorSet,
    v: [i128; 4],
    t: f64,
    norm: &VectorNorm,
    opts: &VectorOptions,
) -> Result<Vec<[i128; 4]>, OrbitError> {
    if t > MAX_BOUND {
        return Err(OrbitError::BoundTooLarge(t));
    }
    let letters: Vec<IMat4> = gens.gens.clone();
    walk_vectors(&letters, v, t, norm, opts)
}

fn walk_vectors(
    letters: &[IMat4],
    v: [i128; 4],
    t: f64,
    norm: &VectorNorm,
    opts: &VectorOptions,
) -> Result<Vec<[i128; 4]>, OrbitError> {
    let mut seen: HashSet<[i128; 4]> = HashSet::new();
    seen.insert(v);
    let mut frontier = vec![v];
    while !frontier.is_empty() {
        let expandable: Vec<[i128; 4]> = frontier
            .into_iter()
            .filter(|w| norm.eval(w) < t * opts.slack)
            .collect();
        let children: Vec<Vec<[i128; 4]>> = expandable
            .par_iter()
            .map(|w| letters.iter().map(|m| apply_wide(m, *w)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<_, _>>()?;
        let mut next = Vec::new();
        for c in children.into_iter().flatten() {
            if seen.insert(c) {
                next.push(c);
            }
        }
        if seen.len() > opts.cap {
            return Err(OrbitError::FrontierExplosion { cap: opts.cap });
        }
        frontier = next;
    }
    let mut out: Vec<[i128; 4]> = seen.into_iter().filter(|w| norm.eval(w) < t).collect();
    out.sort_unstable();
    Ok(out)
}

/// `#{γ v : ‖γ v‖ < T}`, which counts cosets of the stabilizer of `v`.
pub fn orbit_vector_count(
    gens: &GeneratorSet,
    v: [i128; 4],
    t: f64,
    norm: &VectorNorm,
    opts: &VectorOptions,
) -> Result<u64, OrbitError> {
    Ok(orbit_vectors(gens, v, t, norm, opts)?.len() as u64)
}

/// Orbit of `v` under the words of even length, via the products `S_i S_j`.
pub fn even_orbit_vectors(
    gens: &GeneratorSet,
    v: [i128; 4],
    t: f64,
    norm: &VectorNorm,
    opts: &VectorOptions,
) -> Result<Vec<[i128; 4]>, OrbitError> {
    let mut letters = Vec::new();
    for a in &gens.gens {
        for b in &gens.gens {
            let p = imat_mul(a, b)?;
            if p != identity() && !letters.contains(&p) {
                letters.push(p);
            }
        }
    }
    walk_vectors(&letters, v, t, norm, opts)
}

/// Reference orbit walk: breadth-first over all words up to `depth`
/// letters, expanding anything with norm below `cap_factor · T`.
pub fn orbit_vectors_by_depth(
    gens: &GeneratorSet,
    v: [i128; 4],
    t: f64,
    norm: &VectorNorm,
    depth: usize,
    cap_factor: f64,
) -> Result<Vec<[i128; 4]>, OrbitError> {
    let mut seen: HashSet<[i128; 4]> = HashSet::new();
    seen.insert(v);
    let mut frontier = vec![v];
    for _ in 0..depth {
        let mut next = Vec::new();
        for w in &frontier {
            if norm.eval(w) >= t * cap_factor {
                continue;
            }
            for i in 0..gens.len() {
                let c = gens.apply(i, *w)?;
                if seen.insert(c) {
                    next.push(c);
                }
            }
        }
        frontier = next;
    }
    let mut out: Vec<[i128; 4]> = seen.into_iter().filter(|w| norm.eval(w) < t).collect();
    out.sort_unstable();
    Ok(out)
}

/// `4 q γ q`, which is integral for every integral `γ`.
pub fn lorentz_times_four(g: &IMat4) -> [[i128; 4]; 4] {
    // 2q has entries ±1
    let q2: [[i128; 4]; 4] = [[1, -1, -1, 1], [-1, 1, -1, 1], [-1, -1, 1, 1], [1, 1, 1, 1]];
    let gw = g.map(|r| r.map(i128::from));
    let mut tmp = [[0i128; 4]; 4];
    let mut out = [[0i128; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            tmp[i][j] = (0..4).map(|l| q2[i][l] * gw[l][j]).sum();
        }
    }
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (0..4).map(|l| tmp[i][l] * q2[l][j]).sum();
        }
    }
    out
}

/// Exact check of `Lᵀ J L = J` for `L = q γ q`, as `(4L)ᵀ J (4L) = 16 J`.
pub fn is_exact_lorentz(g: &IMat4) -> bool {
    let m = lorentz_times_four(g);
    let j = [1i128, 1, 1, -1];
    for a in 0..4 {
        for b in 0..4 {
            let v: i128 = (0..4).map(|k| m[k][a] * j[k] * m[k][b]).sum();
            let want = if a == b { 16 * j[a] } else { 0 };
            if v != want {
                return false;
            }
        }
    }
    true
}

/// The Lorentz matrix `q γ q` in floating point (exact: entries are quarters).
pub fn integer_to_lorentz(g: &IMat4) -> Lorentz {
    let m = lorentz_times_four(g);
    Lorentz(m.map(|r| r.map(|x| x as f64 / 4.0)))
}

/// One element of a group ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallElement {
    pub word_len: usize,
    /// The element on the Descartes side, exact.
    pub matrix: IMat4,
    /// `g⁻¹ (q γ q) g`.
    pub lorentz: Lorentz,
    pub norm: f64,
    /// `None` for elements within the degeneracy threshold of `K`.
    pub kak: Option<KakData>,
}

/// Settings for [`group_ball`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallOptions {
    /// Branches are followed while their norm is below `T · safety`.
    pub safety: f64,
    pub cap: usize,
    /// Keep only orientation-preserving (even-length) words.
    pub even_only: bool,
}

impl Default for BallOptions {
    fn default() -> Self {
        BallOptions { safety: 4.0, cap: 20_000_000, even_only: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupBall {
    pub t_max: f64,
    pub conjugator: Lorentz,
    pub elements: Vec<BallElement>,
    /// Smallest norm among discarded branches (`∞` if none).
    pub min_pruned_norm: f64,
    /// Whether the conjugated basepoint lies strictly inside the reflection
    /// chamber, which makes norms non-decreasing along reduced words.
    pub exact_pruning: bool,
    pub safety: f64,
}

impl GroupBall {
    /// Non-degenerate elements of norm below `t`.
    pub fn within(&self, t: f64) -> impl Iterator<Item = &BallElement> {
        self.elements.iter().filter(move |e| e.norm < t && e.kak.is_some())
    }
}

/// Largest `B(p, e_i)` for the conjugated basepoint `p = q g j`; negative
/// means `p` is inside the chamber cut out by the walls of `S_1, …, S_4`.
pub fn chamber_margin(conjugator: &Lorentz) -> f64 {
    let p_j = conjugator.apply([0.0, 0.0, 0.0, 1.0]);
    let q = q_conjugator();
    let p: Vec<f64> = (0..4).map(|i| (0..4).map(|k| q[i][k] * p_j[k]).sum()).collect();
    let total: f64 = p.iter().sum();
    p.iter().map(|x| x - 0.5 * total).fold(f64::NEG_INFINITY, f64::max)
}

/// Enumerates `g⁻¹ Γ g` by reduced words (prepending letters), keeping the
/// elements of Lorentz norm below `T`.
pub fn group_ball(gens: &GeneratorSet, conjugator: &Lorentz, t_max: f64, opts: &BallOptions) -> Result<GroupBall, OrbitError> {
    if t_max > MAX_BOUND {
        return Err(OrbitError::BoundTooLarge(t_max));
    }
    let g_inv = conjugator.inverse();
    let conj = |m: &IMat4| -> Lorentz { g_inv * integer_to_lorentz(m) * *conjugator };
    let limit = t_max * opts.safety;
    let mut seen: HashSet<IMat4> = HashSet::new();
    let mut elements = Vec::new();
    let mut min_pruned = f64::INFINITY;
    // (matrix, first letter, word length)
    let mut frontier: Vec<(IMat4, usize)> = vec![(identity(), usize::MAX)];
    let mut len = 0usize;
    while !frontier.is_empty() {
        let evaluated: Vec<(IMat4, usize, Lorentz, f64)> = frontier
            .par_iter()
            .map(|(m, first)| {
                let l = conj(m);
                let n = lorentz_norm(&l);
                (*m, *first, l, n)
            })
            .collect();
        let mut next = Vec::new();
        for (m, first, l, n) in evaluated {
            if n >= limit {
                min_pruned = min_pruned.min(n);
                continue;
            }
            if !seen.insert(m) {
                return Err(OrbitError::DuplicateElement);
            }
            if n < t_max && (!opts.even_only || len.is_multiple_of(2)) {
                elements.push(BallElement { word_len: len, matrix: m, lorentz: l, norm: n, kak: kak(&l).ok() });
            }
            for (s, gen) in gens.gens.iter().enumerate() {
                if s != first {
                    next.push((imat_mul(gen, &m)?, s));
                }
            }
        }
        if seen.len() > opts.cap {
            return Err(OrbitError::FrontierExplosion { cap: opts.cap });
        }
        frontier = next;
        len += 1;
    }
    elements.sort_by(|a, b| a.norm.total_cmp(&b.norm).then_with(|| a.matrix.cmp(&b.matrix)));
    Ok(GroupBall {
        t_max,
        conjugator: *conjugator,
        elements,
        min_pruned_norm: min_pruned,
        exact_pruning: chamber_margin(conjugator) < 0.0,
        safety: opts.safety,
    })
}

/// `q S q` for each generator, exactly.
pub fn generators_on_lorentz_side(gens: &GeneratorSet) -> Vec<Lorentz> {
    gens.gens.iter().map(integer_to_lorentz).collect()
}

/// Descartes-side float matrix from a Lorentz-side one.
pub fn descartes_side(l: &Lorentz) -> [[f64; 4]; 4] {
    let q = q_conjugator();
    mat4_mul(&mat4_mul(&q, &l.0), &q)
}
