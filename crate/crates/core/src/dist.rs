//! Test distributions: trig-Gaussian laws, uniforms, weighted uniform sums,
//! raw grids; their moments and cumulants.
//!
//! The trig-Gaussian family carries its density relative to the standard
//! normal as a deviation r(x) = q(x) - 1, never as q itself: the regimes of
//! interest have amplitudes down to 1e-14 and would not survive the
//! cancellation against 1.

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::GridDensity;
use crate::num::series::TaylorPoly;
use crate::num::{self, pairwise_sum_fn, phi};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Largest admissible harmonic: the Gaussian lift e^{k^2/2} must stay finite.
const MAX_FREQ: u32 = 37;

/// Finite trigonometric polynomial with integer frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigPoly {
    pub a0: f64,
    /// (frequency k, coefficient a_k) for the cosine part.
    pub cos_terms: Vec<(u32, f64)>,
    /// (frequency k, coefficient b_k) for the sine part.
    pub sin_terms: Vec<(u32, f64)>,
    /// Smallest period 2*pi/g with g the gcd of active frequencies.
    pub h: f64,
}

impl TrigPoly {
    pub fn new(a0: f64, cos_terms: Vec<(u32, f64)>, sin_terms: Vec<(u32, f64)>) -> Result<Self> {
        for terms in [&cos_terms, &sin_terms] {
            let mut seen = std::collections::HashSet::new();
            for &(k, _) in terms.iter() {
                if k == 0 {
                    return Err(Error::ValidationError(
                        "frequency 0 belongs in a0, not in the term lists".into(),
                    ));
                }
                if k > MAX_FREQ {
                    return Err(Error::ValidationError(format!(
                        "frequency {k} exceeds the Gaussian-lift budget (max {MAX_FREQ})"
                    )));
                }
                if !seen.insert(k) {
                    return Err(Error::ValidationError(format!("duplicate frequency {k}")));
                }
            }
        }
        let mut g = 0u32;
        for &(k, c) in cos_terms.iter().chain(sin_terms.iter()) {
            if c != 0.0 {
                g = gcd(g, k);
            }
        }
        if g == 0 {
            g = 1; // a0-only polynomial
        }
        let h = 2.0 * PI / g as f64;
        Ok(TrigPoly {
            a0,
            cos_terms,
            sin_terms,
            h,
        })
    }

    /// gcd of the active frequencies (1 for an a0-only polynomial).
    pub fn freq_gcd(&self) -> u32 {
        (2.0 * PI / self.h).round() as u32
    }

    pub fn max_freq(&self) -> u32 {
        self.cos_terms
            .iter()
            .chain(self.sin_terms.iter())
            .map(|&(k, _)| k)
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mut s = self.a0;
        for &(k, a) in &self.cos_terms {
            s += a * (k as f64 * t).cos();
        }
        for &(k, b) in &self.sin_terms {
            s += b * (k as f64 * t).sin();
        }
        s
    }

    pub fn d1(&self, t: f64) -> f64 {
        let mut s = 0.0;
        for &(k, a) in &self.cos_terms {
            let kf = k as f64;
            s -= a * kf * (kf * t).sin();
        }
        for &(k, b) in &self.sin_terms {
            let kf = k as f64;
            s += b * kf * (kf * t).cos();
        }
        s
    }

    pub fn d2(&self, t: f64) -> f64 {
        let mut s = 0.0;
        for &(k, a) in &self.cos_terms {
            let kf = k as f64;
            s -= a * kf * kf * (kf * t).cos();
        }
        for &(k, b) in &self.sin_terms {
            let kf = k as f64;
            s -= b * kf * kf * (kf * t).sin();
        }
        s
    }

    pub fn d4(&self, t: f64) -> f64 {
        let mut s = 0.0;
        for &(k, a) in &self.cos_terms {
            let kf = k as f64;
            s += a * kf.powi(4) * (kf * t).cos();
        }
        for &(k, b) in &self.sin_terms {
            let kf = k as f64;
            s += b * kf.powi(4) * (kf * t).sin();
        }
        s
    }

    /// Scale of the coefficient vector, used for relative tolerances.
    pub fn coeff_scale(&self) -> f64 {
        let mut s = self.a0.abs();
        for &(_, c) in self.cos_terms.iter().chain(self.sin_terms.iter()) {
            s += c.abs();
        }
        s.max(1e-300)
    }

    /// The Gaussian-lifted companion: coefficients multiplied by e^{k^2/2}.
    pub fn lifted(&self) -> TrigPoly {
        let lift = |k: u32| ((k as f64).powi(2) / 2.0).exp();
        TrigPoly {
            a0: self.a0,
            cos_terms: self
                .cos_terms
                .iter()
                .map(|&(k, a)| (k, a * lift(k)))
                .collect(),
            sin_terms: self
                .sin_terms
                .iter()
                .map(|&(k, b)| (k, b * lift(k)))
                .collect(),
            h: self.h,
        }
    }

    /// Maximum over one period: 1e5-point scan plus a Newton polish.
    pub fn max_over_period(&self) -> (f64, f64) {
        let n = 100_000;
        let mut best_t = 0.0;
        let mut best = f64::NEG_INFINITY;
        for i in 0..n {
            let t = self.h * i as f64 / n as f64;
            let v = self.eval(t);
            if v > best {
                best = v;
                best_t = t;
            }
        }
        let t = num::newton_polish_max(
            best_t,
            &|t| self.eval(t),
            &|t| self.d1(t),
            &|t| self.d2(t),
            8,
        );
        let v = self.eval(t);
        if v > best {
            (t, v)
        } else {
            (best_t, best)
        }
    }

    /// Taylor coefficients at t = 0 up to `order`.
    pub fn taylor(&self, order: usize) -> TaylorPoly {
        let mut p = TaylorPoly::zero(order);
        p.coeffs[0] = self.a0;
        for &(k, a) in &self.cos_terms {
            p.add_scaled(&TaylorPoly::cos_kt(k as f64, order), a);
        }
        for &(k, b) in &self.sin_terms {
            p.add_scaled(&TaylorPoly::sin_kt(k as f64, order), b);
        }
        p
    }

    /// Product via discrete Fourier transform over one common period.
    pub fn mul(&self, other: &TrigPoly) -> Result<TrigPoly> {
        let n_out = (self.max_freq() + other.max_freq()) as usize;
        let m = fft::next_pow2(2 * n_out + 2).max(8);
        let samples: Vec<f64> = (0..m)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / m as f64;
                self.eval(t) * other.eval(t)
            })
            .collect();
        let coeffs = fft::fourier_coeffs(&samples, n_out);
        let scale = coeffs.iter().map(|c| c.norm()).fold(1e-300, f64::max);
        let mut cos_terms = Vec::new();
        let mut sin_terms = Vec::new();
        for (k, c) in coeffs.iter().enumerate().skip(1) {
            let a = 2.0 * c.re;
            let b = -2.0 * c.im;
            if a.abs() > 1e-13 * scale {
                cos_terms.push((k as u32, a));
            }
            if b.abs() > 1e-13 * scale {
                sin_terms.push((k as u32, b));
            }
        }
        TrigPoly::new(coeffs[0].re, cos_terms, sin_terms)
    }

    /// sin^2(t) = (1 - cos 2t)/2.
    pub fn sin_squared() -> TrigPoly {
        TrigPoly::new(0.5, vec![(2, -0.5)], vec![]).unwrap()
    }

    /// P(t) = sin^4 t = (3 - 4 cos 2t + cos 4t)/8; smallest period pi.
    pub fn example_94() -> TrigPoly {
        TrigPoly::new(3.0 / 8.0, vec![(2, -0.5), (4, 1.0 / 8.0)], vec![]).unwrap()
    }

    /// P(t) = (1 - 4 sin^2 t)^2 sin^4 t
    ///       = 9/4 - (15/4) cos 2t + (17/8) cos 4t - (3/4) cos 6t + (1/8) cos 8t.
    pub fn example_95() -> TrigPoly {
        TrigPoly::new(
            9.0 / 4.0,
            vec![
                (2, -15.0 / 4.0),
                (4, 17.0 / 8.0),
                (6, -3.0 / 4.0),
                (8, 1.0 / 8.0),
            ],
            vec![],
        )
        .unwrap()
    }

    /// Roots of P in the open interval (0, h), located through sign changes
    /// of P' filtered by P below a relative tolerance (zeros of P >= 0 are
    /// minima, so tangency cannot be missed by a value-only scan).
    pub fn interior_roots(&self) -> Vec<f64> {
        let scale = self.coeff_scale();
        let n = 1 << 16;
        let dt = self.h / n as f64;
        let mut roots = Vec::new();
        let mut prev_d = self.d1(dt * 0.5);
        for i in 1..n {
            let t_mid = dt * (i as f64 + 0.5);
            let d = self.d1(t_mid);
            if prev_d < 0.0 && d >= 0.0 {
                // local minimum of P between the midpoints
                let lo = t_mid - dt;
                let root = num::bisect(lo, t_mid, &|t| self.d1(t), 80);
                if root > 1e-9 * self.h
                    && root < self.h * (1.0 - 1e-9)
                    && self.eval(root).abs() <= 1e-12 * scale
                {
                    roots.push(root);
                }
            }
            prev_d = d;
        }
        roots
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if a == 0 {
        b
    } else {
        gcd(b % a, a)
    }
}

/// Density relative to the standard normal, stored as r(x) = q(x) - 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum GaussDeviation {
    /// r(x) = c_0 + sum_{k>=1} [c_k e^{i k omega x} + conj], with c_0 real.
    Spectral {
        omega: f64,
        coeffs: Vec<Complex64>,
    },
    Grid {
        x0: f64,
        dx: f64,
        values: Vec<f64>,
    },
}

impl GaussDeviation {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            GaussDeviation::Spectral { omega, coeffs } => {
                let mut s = coeffs[0].re;
                for (k, c) in coeffs.iter().enumerate().skip(1) {
                    let th = k as f64 * omega * x;
                    s += 2.0 * (c.re * th.cos() - c.im * th.sin());
                }
                s
            }
            GaussDeviation::Grid { x0, dx, values } => {
                num::cubic_interp(*x0, *dx, values, x)
            }
        }
    }

    pub fn d1(&self, x: f64) -> f64 {
        match self {
            GaussDeviation::Spectral { omega, coeffs } => {
                let mut s = 0.0;
                for (k, c) in coeffs.iter().enumerate().skip(1) {
                    let w = k as f64 * omega;
                    let th = w * x;
                    s += 2.0 * w * (-c.re * th.sin() - c.im * th.cos());
                }
                s
            }
            GaussDeviation::Grid { .. } => unimplemented!("grid deviations are not polished"),
        }
    }

    pub fn d2(&self, x: f64) -> f64 {
        match self {
            GaussDeviation::Spectral { omega, coeffs } => {
                let mut s = 0.0;
                for (k, c) in coeffs.iter().enumerate().skip(1) {
                    let w = k as f64 * omega;
                    let th = w * x;
                    s += 2.0 * w * w * (-c.re * th.cos() + c.im * th.sin());
                }
                s
            }
            GaussDeviation::Grid { .. } => unimplemented!("grid deviations are not polished"),
        }
    }

    /// Period of the spectral form.
    pub fn period(&self) -> Option<f64> {
        match self {
            GaussDeviation::Spectral { omega, .. } => Some(2.0 * PI / omega),
            GaussDeviation::Grid { .. } => None,
        }
    }

    /// integral of r(x) phi(x) dx, exact in coefficient space for the
    /// spectral form (the Gaussian characteristic function does the lifting).
    pub fn integral_against_phi(&self) -> f64 {
        match self {
            GaussDeviation::Spectral { omega, coeffs } => {
                let mut s = coeffs[0].re;
                for (k, c) in coeffs.iter().enumerate().skip(1) {
                    let w = k as f64 * omega;
                    s += 2.0 * c.re * (-0.5 * w * w).exp();
                }
                s
            }
            GaussDeviation::Grid { x0, dx, values } => {
                let n = values.len();
                num::pairwise_sum_fn(n, &|i| {
                    let x = x0 + i as f64 * dx;
                    let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                    w * values[i] * phi(x)
                }) * dx
            }
        }
    }

    /// Dense samples of r over one period (spectral form only).
    pub fn dense_period_samples(&self, m: usize) -> Vec<f64> {
        match self {
            GaussDeviation::Spectral { coeffs, .. } => fft::synthesize_real(coeffs, m),
            GaussDeviation::Grid { .. } => panic!("dense_period_samples needs a spectral form"),
        }
    }

    /// min over x of 1 + r(x): dense scan plus Newton polish on r'.
    pub fn min_one_plus_r(&self) -> f64 {
        match self {
            GaussDeviation::Spectral { coeffs, .. } => {
                let m = fft::next_pow2(coeffs.len() * 4).max(1 << 12);
                let vals = self.dense_period_samples(m);
                let (mut i_min, mut v_min) = (0usize, f64::INFINITY);
                for (i, &v) in vals.iter().enumerate() {
                    if v < v_min {
                        v_min = v;
                        i_min = i;
                    }
                }
                let period = self.period().unwrap();
                let x0 = period * i_min as f64 / m as f64;
                let x = num::newton_polish_max(
                    x0,
                    &|x| -self.eval(x),
                    &|x| -self.d1(x),
                    &|x| -self.d2(x),
                    8,
                );
                1.0 + v_min.min(self.eval(x))
            }
            GaussDeviation::Grid { values, .. } => {
                1.0 + values.iter().cloned().fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Validate the deviation invariants: nonnegative density and unit mass.
    pub fn validate(&self) -> Result<()> {
        let min1r = self.min_one_plus_r();
        if min1r < -1e-12 {
            return Err(Error::ValidationError(format!(
                "1 + r dips to {min1r:.3e}"
            )));
        }
        let mass = 1.0 + self.integral_against_phi();
        if (mass - 1.0).abs() > 1e-10 {
            return Err(Error::ValidationError(format!(
                "deviation mass 1{:+.3e} is not 1 within 1e-10",
                mass - 1.0
            )));
        }
        Ok(())
    }
}

/// Declarative description of a mean-0 variance-1 law.
#[derive(Debug, Clone)]
pub enum DistributionSpec {
    TrigGaussian { poly: TrigPoly, c: f64 },
    Uniform { halfwidth: f64 },
    WeightedUniformSum { weights: Vec<f64> },
    Grid { density: GridDensity },
}

impl DistributionSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            DistributionSpec::TrigGaussian { .. } => "trig",
            DistributionSpec::Uniform { .. } => "uniform",
            DistributionSpec::WeightedUniformSum { .. } => "wsum",
            DistributionSpec::Grid { .. } => "grid",
        }
    }

    /// The standard normal, as the degenerate trig-Gaussian with c = 0.
    pub fn normal() -> DistributionSpec {
        DistributionSpec::TrigGaussian {
            poly: TrigPoly::example_94(),
            c: 0.0,
        }
    }

    pub fn example_94(c: f64) -> DistributionSpec {
        DistributionSpec::TrigGaussian {
            poly: TrigPoly::example_94(),
            c,
        }
    }

    pub fn example_95(c: f64) -> DistributionSpec {
        DistributionSpec::TrigGaussian {
            poly: TrigPoly::example_95(),
            c,
        }
    }

    pub fn uniform() -> DistributionSpec {
        DistributionSpec::Uniform {
            halfwidth: 3f64.sqrt(),
        }
    }

    /// Compactly supported spec? Returns the support halfwidth.
    pub fn support_halfwidth(&self) -> Option<f64> {
        match self {
            DistributionSpec::Uniform { halfwidth } => Some(*halfwidth),
            DistributionSpec::WeightedUniformSum { weights } => {
                Some(3f64.sqrt() * weights.iter().map(|w| w.abs()).sum::<f64>())
            }
            DistributionSpec::Grid { density } => Some(density.x_end().abs().max(density.x0.abs())),
            DistributionSpec::TrigGaussian { .. } => None,
        }
    }
}

/// Output of the trig-Gaussian construction.
#[derive(Debug, Clone)]
pub struct TrigBuild {
    pub spec: DistributionSpec,
    pub deviation: GaussDeviation,
    /// Largest admissible positive c: 1 / max_x of the lifted polynomial.
    pub c_max: f64,
}

/// Build the law with Laplace transform (1 - c P(t)) e^{t^2/2}.
///
/// The Gaussian-relative deviation is
///   r(x) = -c [a0 + sum_k e^{k^2/2} (a_k cos kx + b_k sin kx)],
/// forced by the identity  integral e^{tx} cos(kx) phi(x) dx
///                          = e^{(t^2-k^2)/2} cos(kt).
pub fn build_trig_gaussian(poly: &TrigPoly, c: f64) -> Result<TrigBuild> {
    let scale = poly.coeff_scale();
    let p0 = poly.eval(0.0);
    let p1 = poly.d1(0.0);
    let p2 = poly.d2(0.0);
    if p0.abs() > 1e-12 * scale || p1.abs() > 1e-12 * scale || p2.abs() > 1e-12 * scale {
        return Err(Error::RejectsNonStandardized(format!(
            "P(0) = {p0:.3e}, P'(0) = {p1:.3e}, P''(0) = {p2:.3e} (need all 0)"
        )));
    }
    let lifted = poly.lifted();
    let (_, lifted_max) = lifted.max_over_period();
    let c_max = if lifted_max > 0.0 {
        1.0 / lifted_max
    } else {
        f64::INFINITY
    };
    // Admissibility of the density: 1 - c * lifted >= 0 everywhere.
    if c > c_max * (1.0 + 1e-12) {
        return Err(Error::RejectsInadmissibleC { c, c_max });
    }
    if c < 0.0 {
        let neg = TrigPoly {
            a0: -lifted.a0,
            cos_terms: lifted.cos_terms.iter().map(|&(k, a)| (k, -a)).collect(),
            sin_terms: lifted.sin_terms.iter().map(|&(k, b)| (k, -b)).collect(),
            h: lifted.h,
        };
        let (_, neg_max) = neg.max_over_period();
        if neg_max > 0.0 && (-c) > (1.0 / neg_max) * (1.0 + 1e-12) {
            return Err(Error::RejectsInadmissibleC {
                c,
                c_max: -1.0 / neg_max,
            });
        }
    }
    // Psi = 1 - cP must stay positive for log L to exist.
    let (_, p_max) = poly.max_over_period();
    if c > 0.0 && c * p_max >= 1.0 {
        return Err(Error::RejectsInadmissibleC {
            c,
            c_max: c_max.min(1.0 / p_max),
        });
    }

    let g = poly.freq_gcd();
    let n_red = poly.max_freq() / g;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); (n_red as usize) + 1];
    coeffs[0] = Complex64::new(-c * poly.a0, 0.0);
    for &(k, a) in &poly.cos_terms {
        let lift = ((k as f64).powi(2) / 2.0).exp();
        coeffs[(k / g) as usize] += Complex64::new(-c * a * lift / 2.0, 0.0);
    }
    for &(k, b) in &poly.sin_terms {
        let lift = ((k as f64).powi(2) / 2.0).exp();
        // b sin(kx) contributes -i b/2 to the e^{ikx} coefficient, scaled by -c*lift
        coeffs[(k / g) as usize] += Complex64::new(0.0, 0.5 * c * b * lift);
    }
    let deviation = GaussDeviation::Spectral {
        omega: g as f64,
        coeffs,
    };
    deviation.validate()?;
    let spec = DistributionSpec::TrigGaussian {
        poly: poly.clone(),
        c,
    };
    Ok(TrigBuild {
        spec,
        deviation,
        c_max,
    })
}

/// Max over `t_samples` of the relative Laplace-identity residual
/// |integral e^{tx}(1+r)phi dx - (1 - cP(t)) e^{t^2/2}| / e^{t^2/2}.
pub fn verify_laplace_identity(build: &TrigBuild, t_samples: &[f64]) -> Result<f64> {
    let (poly, c) = match &build.spec {
        DistributionSpec::TrigGaussian { poly, c } => (poly, *c),
        _ => {
            return Err(Error::ValidationError(
                "laplace identity check applies to trig specs".into(),
            ))
        }
    };
    let l = 12.0;
    let n = (1 << 14) + 1;
    let mut worst: f64 = 0.0;
    for &t in t_samples {
        if t.abs() * (l + t.abs()) > 700.0 {
            return Err(Error::QuadratureOverflow(format!(
                "e^(tx) not representable for t = {t}"
            )));
        }
        // integrand relative to e^{t^2/2}: (1 + r(x)) phi(x - t)
        let lo = t - l;
        let hi = t + l;
        let val = num::trapezoid_fn(lo, hi, n, &|x| (1.0 + build.deviation.eval(x)) * phi(x - t));
        let psi = 1.0 - c * poly.eval(t);
        worst = worst.max((val - psi).abs());
    }
    Ok(worst)
}

/// Uniform density on (-a, a) tabulated with its endpoints on the grid.
pub fn uniform_density(halfwidth: f64) -> Result<GridDensity> {
    if !(halfwidth > 0.0) {
        return Err(Error::ValidationError("halfwidth must be positive".into()));
    }
    let n = (1 << 14) + 1;
    let dx = 2.0 * halfwidth / (n - 1) as f64;
    let v = 1.0 / (2.0 * halfwidth);
    GridDensity::new(-halfwidth, dx, vec![v; n])
}

/// Exact density of sum_k U[-a_k, a_k] at x (independent uniforms).
///
/// Expanding every sin(a_k t)/t factor of the characteristic function into
/// exponentials gives, for W factors,
///   p(x) = sum_eps (prod eps_k) |A_eps - x|^{W-1} sgn(A_eps - x)
///          / (2 (W-1)! 2^W prod a_k),   A_eps = sum eps_k a_k.
pub fn uniform_sum_density_at(widths: &[f64], x: f64) -> f64 {
    let w = widths.len();
    assert!(w >= 1 && w <= 20, "uniform-sum expansion limited to 20 factors");
    let mut fact = 1.0; // (W-1)!
    for k in 2..w {
        fact *= k as f64;
    }
    let mut norm = 2.0 * fact;
    for &a in widths {
        norm *= 2.0 * a;
    }
    let mut s = 0.0;
    for mask in 0u32..(1 << w) {
        let mut a_eps = 0.0;
        for (k, &a) in widths.iter().enumerate() {
            if mask & (1 << k) == 0 {
                a_eps += a;
            } else {
                a_eps -= a;
            }
        }
        let sign = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        let y = a_eps - x;
        // (A - x)^{W-1} sgn(A - x); powi(0) = 1 covers the single-factor case
        let spow = y.powi((w - 1) as i32) * y.signum();
        s += sign * spow;
    }
    (s / norm).max(0.0)
}

/// Density of sum_k w_k xi_k with xi_k iid uniform on (-sqrt3, sqrt3).
///
/// Weights are sorted descending by |w|. The exact piecewise-polynomial
/// convolution is tabulated on a grid whose endpoints sit on the support
/// boundary.
pub fn weighted_uniform_sum(weights: &[f64]) -> Result<(GridDensity, Vec<f64>)> {
    if weights.is_empty() {
        return Err(Error::ValidationError("empty weight list".into()));
    }
    let sum_sq: f64 = weights.iter().map(|w| w * w).sum();
    if (sum_sq - 1.0).abs() > 1e-9 {
        return Err(Error::RejectsNonStandardized(format!(
            "sum of squared weights = {sum_sq:.12}, need 1"
        )));
    }
    let mut sorted: Vec<f64> = weights.iter().map(|w| w.abs()).collect();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let sorted: Vec<f64> = sorted.into_iter().filter(|w| *w > 0.0).collect();
    if sorted.is_empty() {
        return Err(Error::ValidationError("all weights are zero".into()));
    }
    if sorted.len() > 20 {
        return Err(Error::ValidationError(
            "weighted sums limited to 20 nonzero weights".into(),
        ));
    }

    let sqrt3 = 3f64.sqrt();
    if sorted.len() == 1 {
        return Ok((uniform_density(sqrt3)?, sorted));
    }
    let widths: Vec<f64> = sorted.iter().map(|w| sqrt3 * w).collect();
    let support: f64 = widths.iter().sum();
    let n = (1 << 16) + 1;
    let dx = 2.0 * support / (n - 1) as f64;
    let values: Vec<f64> = (0..n)
        .map(|i| uniform_sum_density_at(&widths, -support + i as f64 * dx))
        .collect();
    let g = GridDensity::new(-support, dx, values)?;
    g.check_standardized()?;
    Ok((g, sorted))
}

/// Cumulants gamma_3..gamma_J plus the diagnostics the local-limit module
/// needs alongside them.
#[derive(Debug, Clone, Serialize)]
pub struct CumulantReport {
    /// gammas[j - 3] = gamma_j for j = 3..=j_max.
    pub gammas: Vec<f64>,
    pub j_max: usize,
    pub beta3: f64,
    pub max_density: f64,
    pub first_nonzero: Option<(usize, f64)>,
    /// Relative noise floor of the cumulant path that produced the report.
    pub noise_floor: f64,
}

/// Cumulants through order J (J <= 12), plus beta3 and the density maximum.
pub fn moments_and_cumulants(spec: &DistributionSpec, j_max: usize) -> Result<CumulantReport> {
    if !(3..=12).contains(&j_max) {
        return Err(Error::ValidationError(format!(
            "cumulant order J = {j_max} outside 3..=12"
        )));
    }
    match spec {
        DistributionSpec::TrigGaussian { poly, c } => {
            // K(t) = t^2/2 + ln(1 - c P(t)) as exact truncated series.
            let mut u = poly.taylor(j_max);
            for v in u.coeffs.iter_mut() {
                *v *= -c;
            }
            if u.coeffs[0].abs() >= 1.0 {
                return Err(Error::SeriesDivergence(u.coeffs[0].abs()));
            }
            let logpsi = TaylorPoly::ln_one_plus(&u)
                .ok_or(Error::SeriesDivergence(u.coeffs[0].abs()))?;
            let mut gammas = Vec::with_capacity(j_max - 2);
            let mut fact = 2.0; // j!
            for j in 3..=j_max {
                fact *= j as f64;
                gammas.push(fact * logpsi.coeff(j));
            }
            let build = build_trig_gaussian(poly, *c)?;
            let (beta3, max_density) = spectral_beta3_and_max(&build.deviation);
            let noise = 1e-15 * c.abs().max(1e-300);
            let first_nonzero = locate_first_nonzero(&gammas, noise.max(1e-300));
            Ok(CumulantReport {
                gammas,
                j_max,
                beta3,
                max_density,
                first_nonzero,
                noise_floor: noise,
            })
        }
        DistributionSpec::Uniform { .. }
        | DistributionSpec::WeightedUniformSum { .. }
        | DistributionSpec::Grid { .. } => {
            let g = spec_grid_density(spec)?;
            let moments: Vec<f64> = (0..=j_max as u32).map(|k| g.moment(k)).collect();
            let cums = cumulants_from_moments(&moments);
            let gammas: Vec<f64> = (3..=j_max).map(|j| cums[j]).collect();
            let noise = 1e-9; // quadrature floor for high moments
            let first_nonzero = locate_first_nonzero(&gammas, noise);
            Ok(CumulantReport {
                gammas,
                j_max,
                beta3: g.abs_moment3(),
                max_density: g.max_density(),
                first_nonzero,
                noise_floor: noise,
            })
        }
    }
}

fn locate_first_nonzero(gammas: &[f64], noise: f64) -> Option<(usize, f64)> {
    let scale = gammas.iter().map(|g| g.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    let thr = (1e-12 * scale.max(1.0)).max(noise);
    for (i, &g) in gammas.iter().enumerate() {
        if g.abs() > thr {
            return Some((i + 3, g));
        }
    }
    None
}

/// Raw moments (index 0..=J) to cumulants (same indexing).
pub fn cumulants_from_moments(moments: &[f64]) -> Vec<f64> {
    let j = moments.len() - 1;
    let mut kappa = vec![0.0; j + 1];
    for n in 1..=j {
        let mut s = moments[n];
        for k in 1..n {
            s -= binomial(n - 1, k - 1) * kappa[k] * moments[n - k];
        }
        kappa[n] = s;
    }
    kappa
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// The grid density a non-trig spec tabulates to.
pub fn spec_grid_density(spec: &DistributionSpec) -> Result<GridDensity> {
    match spec {
        DistributionSpec::Uniform { halfwidth } => uniform_density(*halfwidth),
        DistributionSpec::WeightedUniformSum { weights } => {
            Ok(weighted_uniform_sum(weights)?.0)
        }
        DistributionSpec::Grid { density } => Ok(density.clone()),
        DistributionSpec::TrigGaussian { .. } => Err(Error::ValidationError(
            "trig specs are spectral; use build_trig_gaussian".into(),
        )),
    }
}

/// Tabulate a trig-Gaussian density (1 + r) phi on [-len, len].
pub fn trig_density_grid(deviation: &GaussDeviation, len: f64, points: usize) -> GridDensity {
    let dx = 2.0 * len / (points - 1) as f64;
    let values: Vec<f64> = (0..points)
        .map(|i| {
            let x = -len + i as f64 * dx;
            ((1.0 + deviation.eval(x)) * phi(x)).max(0.0)
        })
        .collect();
    GridDensity { x0: -len, dx, values }
}

fn spectral_beta3_and_max(dev: &GaussDeviation) -> (f64, f64) {
    let l = 12.0;
    let n = (1 << 14) + 1;
    let dx = 2.0 * l / (n - 1) as f64;
    let beta3 = pairwise_sum_fn(n, &|i| {
        let x = -l + i as f64 * dx;
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        w * x.abs().powi(3) * (1.0 + dev.eval(x)) * phi(x)
    }) * dx;
    let mut max_d: f64 = 0.0;
    for i in 0..n {
        let x = -l + i as f64 * dx;
        max_d = max_d.max((1.0 + dev.eval(x)) * phi(x));
    }
    (beta3, max_d)
}
