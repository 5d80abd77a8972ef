//! Log-Laplace profiles, the Esscher (shifted-distribution) transform, and
//! shifted-moment diagnostics.
//!
//! A profile tabulates K = log E e^{tX} together with its first two
//! derivatives and the subgaussian slack A(t) = t^2/2 - K(t). Derivatives
//! come from analytic formulas (trig specs) or from moment integrands
//! (grid specs) -- never from differencing K, which loses six digits at the
//! orders the differential inequality A'^2 <= 2A is tested at.

use crate::dist::{DistributionSpec, GaussDeviation};
use crate::error::{Error, Result};
use crate::grid::GridDensity;
use crate::num::{self, cubic_interp};
use serde::Serialize;
use std::io::Write;

/// Exponent budget for e^{tx} on a grid.
const EXP_BUDGET: f64 = 700.0;

#[derive(Debug, Clone, Serialize)]
pub struct LogLaplaceProfile {
    pub t0: f64,
    pub dt: f64,
    pub k: Vec<f64>,
    pub k1: Vec<f64>,
    pub k2: Vec<f64>,
    pub a: Vec<f64>,
    pub a1: Vec<f64>,
    pub a2: Vec<f64>,
    /// Smallest period of A when the spec is periodic w.r.t. the normal law.
    pub period: Option<f64>,
    /// Whether the tables come from exact formulas (full relative precision)
    /// rather than quadrature.
    pub exact: bool,
    pub source: String,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ShiftedMoments {
    pub h: f64,
    pub m_h: f64,
    pub sigma_h: f64,
    pub v_h: f64,
    pub a_h: f64,
}

impl LogLaplaceProfile {
    pub fn t_end(&self) -> f64 {
        self.t0 + self.dt * (self.k.len() - 1) as f64
    }

    pub fn t_at(&self, i: usize) -> f64 {
        self.t0 + self.dt * i as f64
    }

    fn fold(&self, t: f64) -> Result<f64> {
        if t >= self.t0 && t <= self.t_end() {
            return Ok(t);
        }
        if let Some(p) = self.period {
            let r = t.rem_euclid(p);
            if r >= self.t0 && r <= self.t_end() {
                return Ok(r);
            }
        }
        Err(Error::OutOfRange(t, self.t0, self.t_end()))
    }

    fn interp(&self, table: &[f64], t: f64) -> Result<f64> {
        let tf = self.fold(t)?;
        Ok(cubic_interp(self.t0, self.dt, table, tf))
    }

    pub fn k_at(&self, t: f64) -> Result<f64> {
        self.interp(&self.k, t)
    }
    pub fn k1_at(&self, t: f64) -> Result<f64> {
        self.interp(&self.k1, t)
    }
    pub fn k2_at(&self, t: f64) -> Result<f64> {
        self.interp(&self.k2, t)
    }
    pub fn a_at(&self, t: f64) -> Result<f64> {
        self.interp(&self.a, t)
    }
    pub fn a1_at(&self, t: f64) -> Result<f64> {
        self.interp(&self.a1, t)
    }
    pub fn a2_at(&self, t: f64) -> Result<f64> {
        self.interp(&self.a2, t)
    }

    pub fn min_a(&self) -> f64 {
        self.a.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// K'' > 0, A'' <= 1 + 1e-10, and (when strictly subgaussian)
    /// A'^2 <= 2A + 1e-9 at every tabulated point.
    pub fn validate_invariants(&self) -> Result<()> {
        for i in 0..self.k.len() {
            if !(self.k2[i] > 0.0) {
                return Err(Error::ValidationError(format!(
                    "K'' = {:.3e} at t = {:.4} is not positive",
                    self.k2[i],
                    self.t_at(i)
                )));
            }
            if self.a2[i] > 1.0 + 1e-10 {
                return Err(Error::ValidationError(format!(
                    "A'' = {} at t = {:.4} exceeds 1",
                    self.a2[i],
                    self.t_at(i)
                )));
            }
        }
        if self.min_a() >= -1e-10 {
            for i in 0..self.k.len() {
                if self.a1[i] * self.a1[i] > 2.0 * self.a[i] + 1e-9 {
                    return Err(Error::ValidationError(format!(
                        "A'^2 = {:.6e} > 2A = {:.6e} at t = {:.4}",
                        self.a1[i] * self.a1[i],
                        2.0 * self.a[i],
                        self.t_at(i)
                    )));
                }
            }
        }
        Ok(())
    }

    /// CSV export with header t,K,K1,K2,A,A1,A2.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,K,K1,K2,A,A1,A2")?;
        for i in 0..self.k.len() {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                num::fmt_f64(self.t_at(i)),
                num::fmt_f64(self.k[i]),
                num::fmt_f64(self.k1[i]),
                num::fmt_f64(self.k2[i]),
                num::fmt_f64(self.a[i]),
                num::fmt_f64(self.a1[i]),
                num::fmt_f64(self.a2[i])
            )?;
        }
        Ok(())
    }
}

/// Profile over [t_min, t_max] with knot spacing `dt`.
pub fn profile(
    spec: &DistributionSpec,
    t_min: f64,
    t_max: f64,
    dt: f64,
) -> Result<LogLaplaceProfile> {
    assert!(t_max > t_min && dt > 0.0);
    let n = ((t_max - t_min) / dt).round() as usize + 1;
    let mut p = LogLaplaceProfile {
        t0: t_min,
        dt,
        k: Vec::with_capacity(n),
        k1: Vec::with_capacity(n),
        k2: Vec::with_capacity(n),
        a: Vec::with_capacity(n),
        a1: Vec::with_capacity(n),
        a2: Vec::with_capacity(n),
        period: None,
        exact: matches!(spec, DistributionSpec::TrigGaussian { .. }),
        source: spec.kind().to_string(),
    };
    match spec {
        DistributionSpec::TrigGaussian { poly, c } => {
            p.period = Some(poly.h);
            for i in 0..n {
                let t = t_min + i as f64 * dt;
                let (k, k1, k2, a, a1, a2) = trig_profile_point(poly, *c, t)?;
                p.k.push(k);
                p.k1.push(k1);
                p.k2.push(k2);
                p.a.push(a);
                p.a1.push(a1);
                p.a2.push(a2);
            }
        }
        _ => {
            let g = crate::dist::spec_grid_density(spec)?;
            for i in 0..n {
                let t = t_min + i as f64 * dt;
                let (k, k1, k2) = grid_log_laplace(&g, t)?;
                p.k.push(k);
                p.k1.push(k1);
                p.k2.push(k2);
                p.a.push(0.5 * t * t - k);
                p.a1.push(t - k1);
                p.a2.push(1.0 - k2);
            }
        }
    }
    Ok(p)
}

/// Default profile: one period each side for periodic specs, |t| <= 20 for
/// grid-backed specs; knot spacing 1e-2.
pub fn default_profile(spec: &DistributionSpec) -> Result<LogLaplaceProfile> {
    match spec {
        DistributionSpec::TrigGaussian { poly, .. } => {
            let h = poly.h;
            let dt = (1e-2f64).min(h / 512.0);
            profile(spec, -h, h, dt)
        }
        _ => profile(spec, -20.0, 20.0, 1e-2),
    }
}

/// Exact profile values for Psi(t) = 1 - c P(t):
/// K = t^2/2 + ln Psi, A = -ln Psi, with analytic P derivatives.
fn trig_profile_point(
    poly: &crate::dist::TrigPoly,
    c: f64,
    t: f64,
) -> Result<(f64, f64, f64, f64, f64, f64)> {
    let cp = c * poly.eval(t);
    let cp1 = c * poly.d1(t);
    let cp2 = c * poly.d2(t);
    let psi = 1.0 - cp;
    if psi <= 0.0 {
        return Err(Error::NonfiniteLaplace(t));
    }
    // ln(1 - cP) via ln_1p keeps full relative precision at c ~ 1e-14.
    let ln_psi = (-cp).ln_1p();
    let a = -ln_psi;
    let a1 = cp1 / psi;
    let a2 = (cp2 * psi + cp1 * cp1) / (psi * psi);
    Ok((0.5 * t * t - a, t - a1, 1.0 - a2, a, a1, a2))
}

/// K, K', K'' of a grid density by quadrature of the moment integrands.
fn grid_log_laplace(g: &GridDensity, t: f64) -> Result<(f64, f64, f64)> {
    let x_abs = g.x0.abs().max(g.x_end().abs());
    if t.abs() * x_abs > EXP_BUDGET {
        return Err(Error::QuadratureOverflow(format!(
            "|t|*|x|_max = {:.1} at t = {t}",
            t.abs() * x_abs
        )));
    }
    let n = g.values.len();
    let step = (t * g.dx).exp();
    let mut w = (t * g.x0).exp();
    let mut s0 = num::KahanSum::new();
    let mut s1 = num::KahanSum::new();
    for i in 0..n {
        if i % 512 == 0 {
            w = (t * g.x_at(i)).exp(); // resync the running product
        }
        let trap = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        let f = trap * w * g.values[i];
        s0.add(f);
        s1.add(f * g.x_at(i));
        w *= step;
    }
    let l = s0.value() * g.dx;
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::NonfiniteLaplace(t));
    }
    let m = s1.value() * g.dx / l;
    // second pass for the central second moment
    let mut w2 = (t * g.x0).exp();
    let mut s2 = num::KahanSum::new();
    for i in 0..n {
        if i % 512 == 0 {
            w2 = (t * g.x_at(i)).exp();
        }
        let trap = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        let d = g.x_at(i) - m;
        s2.add(trap * w2 * g.values[i] * d * d);
        w2 *= step;
    }
    let var = s2.value() * g.dx / l;
    Ok((l.ln(), m, var))
}

/// Esscher transform: Q_h p(x) = e^{hx} p(x) / L(h), renormalized by the
/// same trapezoid rule that downstream quadratures use.
pub fn esscher(p: &GridDensity, h: f64) -> Result<GridDensity> {
    let x_abs = p.x0.abs().max(p.x_end().abs());
    if h.abs() * x_abs > EXP_BUDGET {
        return Err(Error::OverflowAtTilt(h.abs() * x_abs));
    }
    let n = p.values.len();
    let weighted: Vec<f64> = (0..n).map(|i| (h * p.x_at(i)).exp() * p.values[i]).collect();
    let l = num::trapezoid(&weighted, p.dx);
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::NonfiniteLaplace(h));
    }
    Ok(GridDensity {
        x0: p.x0,
        dx: p.dx,
        values: weighted.into_iter().map(|v| v / l).collect(),
    })
}

/// Interpolated shifted moments at tilt h: m_h = K'(h), sigma_h = sqrt K''(h),
/// v_h = A'(h)/sigma_h.
pub fn shifted_moments(profile: &LogLaplaceProfile, h: f64) -> Result<ShiftedMoments> {
    let m_h = profile.k1_at(h)?;
    // K'' = 1 - A''; interpolating the A'' table keeps full relative
    // precision when the deviation scale is far below 1 ulp of K'' ~ 1.
    let k2 = 1.0 - profile.a2_at(h)?;
    if !(k2 > 0.0) {
        return Err(Error::ValidationError(format!(
            "interpolated K''({h}) = {k2:.3e} not positive"
        )));
    }
    let sigma_h = k2.sqrt();
    let a1 = profile.a1_at(h)?;
    Ok(ShiftedMoments {
        h,
        m_h,
        sigma_h,
        v_h: a1 / sigma_h,
        a_h: profile.a_at(h)?,
    })
}

/// Worst slack of Lemma-5.1 form: min over samples of
/// sigma_h - sqrt(pi/(6 c^2)) e^{-A(h)}.
pub fn sigma_lower_bound_check(
    profile: &LogLaplaceProfile,
    c_const: f64,
    h_samples: &[f64],
) -> Result<f64> {
    let coef = (std::f64::consts::PI / (6.0 * c_const * c_const)).sqrt();
    let mut worst = f64::INFINITY;
    for &h in h_samples {
        let sm = shifted_moments(profile, h)?;
        let slack = sm.sigma_h - coef * (-sm.a_h).exp();
        worst = worst.min(slack);
    }
    Ok(worst)
}

/// E exp(sigma_h |X_hat(h)| / 2) = integral e^{|x - m_h|/2} Q_h p(x) dx,
/// for h inside the critical zone A(h) <= a/(n-1) with n >= 4a + 1.
pub fn tilted_mgf_check(
    spec: &DistributionSpec,
    profile: &LogLaplaceProfile,
    h: f64,
    n: u32,
    a: f64,
) -> Result<f64> {
    if (n as f64) < 4.0 * a + 1.0 {
        return Err(Error::ZoneViolation(format!(
            "n = {n} below the 4a + 1 = {} floor",
            4.0 * a + 1.0
        )));
    }
    let a_h = profile.a_at(h)?;
    if a_h > a / (n as f64 - 1.0) + 1e-12 {
        return Err(Error::ZoneViolation(format!(
            "A({h}) = {a_h:.3e} above a/(n-1) = {:.3e}",
            a / (n as f64 - 1.0)
        )));
    }
    let g = base_grid_density(spec)?;
    let tilted = esscher(&g, h)?;
    let m_h = profile.k1_at(h)?;
    let vals: Vec<f64> = (0..tilted.n_points())
        .map(|i| ((tilted.x_at(i) - m_h).abs() * 0.5).exp() * tilted.values[i])
        .collect();
    Ok(num::trapezoid(&vals, tilted.dx))
}

/// A grid tabulation of the base density for any spec kind.
pub fn base_grid_density(spec: &DistributionSpec) -> Result<GridDensity> {
    match spec {
        DistributionSpec::TrigGaussian { poly, c } => {
            let build = crate::dist::build_trig_gaussian(poly, *c)?;
            Ok(crate::dist::trig_density_grid(
                &build.deviation,
                12.0,
                (1 << 14) + 1,
            ))
        }
        _ => crate::dist::spec_grid_density(spec),
    }
}

/// A spectral deviation for trig specs (None otherwise).
pub fn spec_deviation(spec: &DistributionSpec) -> Result<Option<GaussDeviation>> {
    match spec {
        DistributionSpec::TrigGaussian { poly, c } => Ok(Some(
            crate::dist::build_trig_gaussian(poly, *c)?.deviation,
        )),
        _ => Ok(None),
    }
}
