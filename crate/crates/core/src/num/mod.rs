//! Small numerical kernels: deterministic summation, trapezoid quadrature,
//! interpolation, and root polishing.
//!
//! Every reduction here has a fixed association order, so results are
//! identical across thread counts.

pub mod expint;
pub mod series;

use std::f64::consts::PI;

pub const SQRT_2PI: f64 = 2.506628274631000502415765284811045;
pub const INV_SQRT_2PI: f64 = 1.0 / SQRT_2PI;

/// Standard normal density.
#[inline]
pub fn phi(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// log of the standard normal density.
#[inline]
pub fn log_phi(x: f64) -> f64 {
    -0.5 * x * x - 0.5 * (2.0 * PI).ln()
}

/// Pairwise summation with a fixed association order.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        let mut s = 0.0;
        for &x in v {
            s += x;
        }
        return s;
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

/// Pairwise sum of `f(i)` over `0..n` without materializing the slice.
pub fn pairwise_sum_fn(n: usize, f: &dyn Fn(usize) -> f64) -> f64 {
    fn rec(lo: usize, hi: usize, f: &dyn Fn(usize) -> f64) -> f64 {
        if hi - lo <= 32 {
            let mut s = 0.0;
            for i in lo..hi {
                s += f(i);
            }
            return s;
        }
        let mid = lo + (hi - lo) / 2;
        rec(lo, mid, f) + rec(mid, hi, f)
    }
    if n == 0 {
        0.0
    } else {
        rec(0, n, f)
    }
}

/// Compensated (Kahan) accumulator for long fixed-order sums.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    s: f64,
    c: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        KahanSum { s: 0.0, c: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.s + y;
        self.c = (t - self.s) - y;
        self.s = t;
    }

    pub fn value(&self) -> f64 {
        self.s
    }
}

/// Trapezoid rule on a uniform grid with spacing `dx`.
pub fn trapezoid(values: &[f64], dx: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let s = pairwise_sum(values);
    dx * (s - 0.5 * (values[0] + values[values.len() - 1]))
}

/// Trapezoid rule of `f` sampled at `n` equispaced points on `[a, b]`.
pub fn trapezoid_fn(a: f64, b: f64, n: usize, f: &dyn Fn(f64) -> f64) -> f64 {
    assert!(n >= 2);
    let dx = (b - a) / (n - 1) as f64;
    let s = pairwise_sum_fn(n, &|i| f(a + i as f64 * dx));
    dx * (s - 0.5 * (f(a) + f(b)))
}

/// Cubic (4-point Lagrange) interpolation on a uniform grid.
///
/// `x0` and `dx` describe the grid carrying `values`; `x` must lie within
/// the grid range.
pub fn cubic_interp(x0: f64, dx: f64, values: &[f64], x: f64) -> f64 {
    let n = values.len();
    assert!(n >= 4, "cubic interpolation needs at least 4 knots");
    let pos = (x - x0) / dx;
    // Stencil start so that x falls between knots 1 and 2 of the stencil.
    let mut i0 = pos.floor() as isize - 1;
    if i0 < 0 {
        i0 = 0;
    }
    if i0 as usize + 4 > n {
        i0 = (n - 4) as isize;
    }
    let i0 = i0 as usize;
    let t = pos - i0 as f64; // in knot units, roughly in [1, 2]
    let (f0, f1, f2, f3) = (values[i0], values[i0 + 1], values[i0 + 2], values[i0 + 3]);
    let l0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
    let l1 = t * (t - 2.0) * (t - 3.0) / 2.0;
    let l2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
    let l3 = t * (t - 1.0) * (t - 2.0) / 6.0;
    f0 * l0 + f1 * l1 + f2 * l2 + f3 * l3
}

/// Bisection for a root of `f` on `[lo, hi]` given `f(lo)` and `f(hi)` of
/// opposite signs. Returns the midpoint after `iters` halvings.
pub fn bisect(mut lo: f64, mut hi: f64, f: &dyn Fn(f64) -> f64, iters: usize) -> f64 {
    let mut flo = f(lo);
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// A few Newton steps for a maximum of `g` (root of `g'`), falling back to
/// the start point when the curvature is unhelpful.
pub fn newton_polish_max(
    x_start: f64,
    g: &dyn Fn(f64) -> f64,
    g1: &dyn Fn(f64) -> f64,
    g2: &dyn Fn(f64) -> f64,
    steps: usize,
) -> f64 {
    let mut x = x_start;
    let mut best_x = x_start;
    let mut best_g = g(x_start);
    for _ in 0..steps {
        let d2 = g2(x);
        if d2 >= 0.0 || !d2.is_finite() {
            break;
        }
        let step = g1(x) / d2;
        x -= step;
        let gx = g(x);
        if gx.is_finite() && gx > best_g {
            best_g = gx;
            best_x = x;
        }
        if step.abs() < 1e-15 * (1.0 + x.abs()) {
            break;
        }
    }
    best_x
}

/// Ordinary least squares for a small dense system: returns beta minimizing
/// ||X beta - y||^2 via normal equations with partial-pivot Gauss elimination.
pub fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Option<Vec<f64>> {
    let n = rows.len();
    if n == 0 {
        return None;
    }
    let p = rows[0].len();
    let mut xtx = vec![vec![0.0; p]; p];
    let mut xty = vec![0.0; p];
    for (row, &yi) in rows.iter().zip(y) {
        for i in 0..p {
            xty[i] += row[i] * yi;
            for j in 0..p {
                xtx[i][j] += row[i] * row[j];
            }
        }
    }
    solve_dense(&mut xtx, &mut xty).then_some(xty)
}

fn solve_dense(a: &mut [Vec<f64>], b: &mut [f64]) -> bool {
    let n = b.len();
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col].abs() < 1e-300 {
            return false;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let d = a[col][col];
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = a[r][col] / d;
            for c in col..n {
                let v = a[col][c];
                a[r][c] -= factor * v;
            }
            b[r] -= factor * b[col];
        }
    }
    for i in 0..n {
        b[i] /= a[i][i];
    }
    true
}

/// Shortest-roundtrip decimal formatting; used by every CSV writer so that
/// serial and parallel runs emit identical bytes.
pub fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        // normalize -0.0
        return "0".to_string();
    }
    format!("{v}")
}
