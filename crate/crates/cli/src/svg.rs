//! Circle geometry for rendering: each circle carries the row
//! `(κ̄, κ, κx, κy)` with `κ̄ = κ|c|² - 1/κ`, and the Apollonian generators
//! act on these rows exactly as they act on curvatures.

use std::fmt::Write as _;

use bisector_core::orbit::Quadruple;
use serde::Serialize;

use crate::error::CliError;

pub type Row = [f64; 4];

/// `Wᵀ Q_D W` for any valid configuration.
pub const AUGMENTED_GRAM: [[f64; 4]; 4] = [
    [0.0, -4.0, 0.0, 0.0],
    [-4.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 2.0, 0.0],
    [0.0, 0.0, 0.0, 2.0],
];

pub fn circle_row(k: f64, x: f64, y: f64) -> Row {
    [k * (x * x + y * y) - 1.0 / k, k, k * x, k * y]
}

/// A line at signed offset `h` along its unit normal `n`, which points away
/// from the packing.
pub fn line_row(h: f64, nx: f64, ny: f64) -> Row {
    [2.0 * h, 0.0, nx, ny]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Shape {
    Circle { curvature: i64, cx: f64, cy: f64, r: f64 },
    Line { nx: f64, ny: f64, offset: f64 },
}

impl Shape {
    pub fn from_row(curvature: i64, w: &Row) -> Shape {
        if curvature == 0 {
            Shape::Line { nx: w[2], ny: w[3], offset: w[0] / 2.0 }
        } else {
            let k = curvature as f64;
            Shape::Circle { curvature, cx: w[2] / k, cy: w[3] / k, r: 1.0 / k.abs() }
        }
    }
}

/// Relative tangency defect between two shapes of a quadruple.
pub fn tangency_residual(a: &Shape, b: &Shape) -> f64 {
    match (*a, *b) {
        (
            Shape::Circle { curvature: ka, cx: xa, cy: ya, r: ra },
            Shape::Circle { curvature: kb, cx: xb, cy: yb, r: rb },
        ) => {
            let d = ((xa - xb).powi(2) + (ya - yb).powi(2)).sqrt();
            let want = if ka < 0 || kb < 0 { (ra - rb).abs() } else { ra + rb };
            (d - want).abs() / ra.min(rb)
        }
        (Shape::Circle { cx, cy, r, .. }, Shape::Line { nx, ny, offset })
        | (Shape::Line { nx, ny, offset }, Shape::Circle { cx, cy, r, .. }) => {
            let dist = (offset - (cx * nx + cy * ny)).abs();
            (dist - r).abs() / r
        }
        (Shape::Line { .. }, Shape::Line { .. }) => 0.0,
    }
}

/// Places the four root shapes.
///
/// Bounded roots get the outer circle centered at the origin; a root with
/// two zeros becomes the strip between `y = ±1/n`.
pub fn augment(root: Quadruple) -> Result<[Row; 4], CliError> {
    let v = root.0;
    let mut w = [[0.0; 4]; 4];
    if root.is_periodic() {
        let n = v.iter().copied().max().unwrap_or(0) as f64;
        let mut sign = 1.0;
        let mut x = 0.0;
        for i in 0..4 {
            if v[i] == 0 {
                w[i] = line_row(1.0 / n, 0.0, sign);
                sign = -sign;
            } else {
                w[i] = circle_row(n, x, 0.0);
                x += 2.0 / n;
            }
        }
        return Ok(w);
    }
    let outer = v
        .iter()
        .position(|&k| k < 0)
        .ok_or_else(|| CliError::Config(format!("{v:?} has no bounding circle; reduce it to a root first")))?;
    let rest: Vec<usize> = (0..4).filter(|&i| i != outer).collect();
    let (ib, ic, id) = (rest[0], rest[1], rest[2]);
    let (a, b) = (-v[outer], v[ib]);
    let rb = 1.0 / b as f64;
    w[outer] = circle_row(v[outer] as f64, 0.0, 0.0);
    w[ib] = circle_row(b as f64, 1.0 / a as f64 - rb, 0.0);
    let (xc, yc) = tangent_to_outer_and_first(a, b, v[ic]).ok_or_else(|| degenerate(v))?;
    w[ic] = circle_row(v[ic] as f64, xc, yc);
    // the last circle is one of two mirror images; keep the one touching C
    let (xd, yd) = tangent_to_outer_and_first(a, b, v[id]).ok_or_else(|| degenerate(v))?;
    let c_shape = Shape::from_row(v[ic], &w[ic]);
    let err = |y: f64| tangency_residual(&c_shape, &Shape::from_row(v[id], &circle_row(v[id] as f64, xd, y)));
    let yd = if err(-yd) < err(yd) { -yd } else { yd };
    w[id] = circle_row(v[id] as f64, xd, yd);
    Ok(w)
}

fn degenerate(v: [i64; 4]) -> CliError {
    CliError::Config(format!("{v:?}: cannot place the root circles (degenerate or too large)"))
}

/// Center `(x, y ≥ 0)` of the circle of curvature `k` tangent to the outer
/// circle `|z| = 1/a` and to the circle of curvature `b` centered on the
/// positive real axis.
///
/// Lengths are scaled by `a·b·k` so the triangle of centers has integer
/// sides and `y²` is an exact rational; collinear cases give `y = 0` exactly.
fn tangent_to_outer_and_first(a: i64, b: i64, k: i64) -> Option<(f64, f64)> {
    let (a, b, k) = (i128::from(a), i128::from(b), i128::from(k));
    let m = a.checked_mul(b)?.checked_mul(k)?;
    let s1 = b * k - a * k;
    let s2 = b * k - a * b;
    let s3 = a * k + a * b;
    if s1 <= 0 {
        return None;
    }
    let num = s2.checked_mul(s2)?.checked_sub(s3.checked_mul(s3)?)?.checked_add(s1.checked_mul(s1)?)?;
    let disc = (2 * s1).checked_mul(s2)?.checked_pow(2)?.checked_sub(num.checked_mul(num)?)?;
    if disc < 0 {
        return None;
    }
    let scale = 2.0 * s1 as f64 * m as f64;
    Some((num as f64 / scale, (disc as f64).sqrt() / scale))
}

/// `Wᵀ Q_D W` with `Q_D = I - ½ 11ᵀ`.
pub fn gram(w: &[Row; 4]) -> [[f64; 4]; 4] {
    let mut out = [[0.0; 4]; 4];
    for (a, row) in out.iter_mut().enumerate() {
        for (b, e) in row.iter_mut().enumerate() {
            let col = |c: usize| [w[0][c], w[1][c], w[2][c], w[3][c]];
            let (x, y) = (col(a), col(b));
            let sx: f64 = x.iter().sum();
            let sy: f64 = y.iter().sum();
            *e = x.iter().zip(&y).map(|(p, q)| p * q).sum::<f64>() - 0.5 * sx * sy;
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct PackingGeometry {
    pub shapes: Vec<Shape>,
    /// Largest relative tangency defect between a new circle and its three
    /// neighbors.
    pub max_tangency_residual: f64,
    pub periodic: bool,
}

/// Root shapes and every circle with curvature in `(0, T]`, following the
/// same reduced-word tree as the curvature count.
pub fn packing_geometry(root: Quadruple, t_max: i64) -> Result<PackingGeometry, CliError> {
    let root = Quadruple::new(root.0)?;
    let w0 = augment(root)?;
    let periodic = root.is_periodic();
    let mut shapes: Vec<Shape> = (0..4).map(|i| Shape::from_row(root.0[i], &w0[i])).collect();
    let firsts: Vec<usize> = if periodic { (0..4).filter(|&i| root.0[i] == 0).collect() } else { (0..4).collect() };
    let mut worst = 0.0_f64;
    let mut stack: Vec<([i64; 4], [Row; 4], usize)> = vec![(root.0, w0, usize::MAX)];
    while let Some((v, w, last)) = stack.pop() {
        let letters: &[usize] = if last == usize::MAX { &firsts } else { &[0, 1, 2, 3] };
        for &i in letters {
            if i == last {
                continue;
            }
            let new = 2 * (v.iter().sum::<i64>() - v[i]) - v[i];
            if new > t_max || new < v[i] {
                continue;
            }
            let mut nv = v;
            nv[i] = new;
            let mut nw = w;
            for c in 0..4 {
                nw[i][c] = 2.0 * (0..4).filter(|&j| j != i).map(|j| w[j][c]).sum::<f64>() - w[i][c];
            }
            let shape = Shape::from_row(new, &nw[i]);
            for j in (0..4).filter(|&j| j != i) {
                worst = worst.max(tangency_residual(&shape, &Shape::from_row(nv[j], &nw[j])));
            }
            shapes.push(shape);
            stack.push((nv, nw, i));
        }
    }
    Ok(PackingGeometry { shapes, max_tangency_residual: worst, periodic })
}

/// Nine significant digits, without trailing zeros.
pub fn fmt9(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return "0".into();
    }
    let decimals = (8 - x.abs().log10().floor() as i32).max(0) as usize;
    let s = format!("{x:.decimals$}");
    let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SvgOptions {
    pub size: f64,
    pub labels: bool,
    /// Circles smaller than this many pixels in radius are skipped.
    pub min_radius_px: f64,
}

impl Default for SvgOptions {
    fn default() -> Self {
        SvgOptions { size: 800.0, labels: false, min_radius_px: 0.5 }
    }
}

/// Renders shapes into a square SVG; an empty list gives a valid empty image.
pub fn render_svg(shapes: &[Shape], opts: &SvgOptions) -> String {
    let circles: Vec<(i64, f64, f64, f64)> = shapes
        .iter()
        .filter_map(|s| match *s {
            Shape::Circle { curvature, cx, cy, r } => Some((curvature, cx, cy, r)),
            Shape::Line { .. } => None,
        })
        .collect();
    // world window: the bounding circle if present, else the circles' extent
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for &(_, cx, cy, r) in &circles {
        x0 = x0.min(cx - r);
        y0 = y0.min(cy - r);
        x1 = x1.max(cx + r);
        y1 = y1.max(cy + r);
    }
    if let Some(&(_, cx, cy, r)) = circles.iter().find(|c| c.0 < 0) {
        (x0, y0, x1, y1) = (cx - r, cy - r, cx + r, cy + r);
    }
    let (span, mid_x, mid_y) = if circles.is_empty() {
        (1.0, 0.5, 0.5)
    } else {
        // a small margin keeps the outermost strokes inside the canvas
        (1.02 * (x1 - x0).max(y1 - y0), (x0 + x1) / 2.0, (y0 + y1) / 2.0)
    };
    let scale = opts.size / span;
    let px = |x: f64| fmt9((x - mid_x + span / 2.0) * scale);
    let py = |y: f64| fmt9((mid_y + span / 2.0 - y) * scale);
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{s}" height="{s}" viewBox="0 0 {s} {s}">"#,
        s = fmt9(opts.size)
    );
    let _ = writeln!(out, r#"<g fill="none" stroke="black" stroke-width="0.5">"#);
    for s in shapes {
        match *s {
            Shape::Circle { cx, cy, r, .. } => {
                if r * scale < opts.min_radius_px {
                    continue;
                }
                let _ = writeln!(out, r#"<circle cx="{}" cy="{}" r="{}"/>"#, px(cx), py(cy), fmt9(r * scale));
            }
            Shape::Line { nx, ny, offset } => {
                // endpoints across the window, along the direction (-ny, nx)
                let (bx, by) = (offset * nx, offset * ny);
                let ext = 2.0 * span;
                let _ = writeln!(
                    out,
                    r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
                    px(bx + ny * ext),
                    py(by - nx * ext),
                    px(bx - ny * ext),
                    py(by + nx * ext)
                );
            }
        }
    }
    let _ = writeln!(out, "</g>");
    if opts.labels {
        let _ = writeln!(out, r#"<g font-family="sans-serif" text-anchor="middle" dominant-baseline="central">"#);
        for &(k, cx, cy, r) in &circles {
            let rp = r * scale;
            if k <= 0 || rp < 6.0 {
                continue;
            }
            let _ = writeln!(out, r#"<text x="{}" y="{}" font-size="{}">{k}</text>"#, px(cx), py(cy), fmt9(rp * 0.6));
        }
        let _ = writeln!(out, "</g>");
    }
    let _ = writeln!(out, "</svg>");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_gram(w: &[Row; 4]) {
        let g = gram(w);
        for a in 0..4 {
            for b in 0..4 {
                assert!((g[a][b] - AUGMENTED_GRAM[a][b]).abs() < 1e-9, "{g:?}");
            }
        }
    }

    #[test]
    fn root_configurations_satisfy_the_augmented_form() {
        for root in [[-1, 2, 2, 3], [0, 0, 1, 1], [-2, 3, 6, 7], [3, -1, 2, 2], [1, 0, 1, 0]] {
            let w = augment(Quadruple::new(root).unwrap()).unwrap();
            assert_gram(&w);
        }
    }

    #[test]
    fn generator_action_preserves_the_form() {
        let w = augment(Quadruple([-1, 2, 2, 3])).unwrap();
        let mut nw = w;
        for c in 0..4 {
            nw[0][c] = 2.0 * (w[1][c] + w[2][c] + w[3][c]) - w[0][c];
        }
        assert_gram(&nw);
    }

    #[test]
    fn number_format() {
        assert_eq!(fmt9(0.0), "0");
        assert_eq!(fmt9(400.0), "400");
        assert_eq!(fmt9(1.0 / 3.0), "0.333333333");
        assert_eq!(fmt9(-123.456789012), "-123.456789");
    }

    #[test]
    fn empty_svg_is_valid() {
        let s = render_svg(&[], &SvgOptions::default());
        assert!(s.starts_with("<?xml") && s.trim_end().ends_with("</svg>"));
        assert!(!s.contains("<circle"));
    }
}
