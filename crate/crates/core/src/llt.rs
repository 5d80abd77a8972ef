//! Local-limit checks: the uniform sup-norm gap with its sqrt(n)/(M^2 b3)
//! normalization, the tilted ratio representation on critical zones, the
//! leading Cramer-series coefficients, and desk-scale Richter fits.

use crate::conv::{self, CfParams, Payload, SumDensity};
use crate::diag;
use crate::dist::{CumulantReport, DistributionSpec};
use crate::error::{Error, Result};
use crate::num::{self, phi};
use crate::tilt::{self, LogLaplaceProfile};
use serde::Serialize;
use std::io::Write;

#[derive(Debug, Clone, Serialize)]
pub struct GapLadder {
    pub n_list: Vec<u32>,
    pub sup_gap: Vec<f64>,
    /// sqrt(n) * sup_gap / (M^2 beta3)
    pub scaled_gap: Vec<f64>,
    /// false if the normalized sequence ever grows by more than 25%
    pub lemma61_bound_ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TiltedResidualRow {
    pub n: u32,
    pub x: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RichterFit {
    pub m: usize,
    pub fitted: f64,
    pub target: f64,
    /// coefficient of the optional x^3/sqrt(n) regressor (symmetry check)
    pub cubic_coef: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Cor103Row {
    pub n: u32,
    pub excess: f64,
    pub fitted_c: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LltReport {
    pub gaps: GapLadder,
    pub cramer_lambda0: f64,
    pub cramer_lambda1: f64,
    pub richter: Option<RichterFit>,
    pub cor103: Vec<Cor103Row>,
    pub tilted: Vec<TiltedResidualRow>,
}

/// Density by the route that suits the spec: spectral for trig laws, cf
/// inversion otherwise (grid identity at n = 1).
pub fn density_auto(spec: &DistributionSpec, n: u32) -> Result<SumDensity> {
    match spec {
        DistributionSpec::TrigGaussian { .. } => conv::density_zn_spectral(spec, n),
        _ => {
            if n == 1 {
                conv::gridconv_for_spec(spec, 1, None)
            } else {
                conv::density_zn_cf(spec, n, CfParams::default())
            }
        }
    }
}

/// sup_x |p_n(x) - phi(x)| for one sum density.
pub fn sup_density_gap(sd: &SumDensity) -> f64 {
    match &sd.payload {
        Payload::Spectral(dev) => {
            let period = dev.period().unwrap_or(40.0);
            let reach = 20.0f64.min(period.max(12.0));
            let m = 1 << 17;
            let mut best: f64 = 0.0;
            for i in 0..=m {
                let x = -reach + 2.0 * reach * i as f64 / m as f64;
                best = best.max((dev.eval(x) * phi(x)).abs());
            }
            best
        }
        Payload::Grid(g) => {
            let mut best: f64 = 0.0;
            for i in 0..g.n_points() {
                best = best.max((g.values[i] - phi(g.x_at(i))).abs());
            }
            if let Some(s) = sd.support {
                best = best.max(phi(s)); // just outside the support p = 0
            }
            best
        }
    }
}

/// Lemma-6.1-shaped ladder: sup gaps and their sqrt(n)/(M^2 beta3) scaling.
pub fn uniform_llt_gap(spec: &DistributionSpec, n_list: &[u32]) -> Result<GapLadder> {
    let cum = crate::dist::moments_and_cumulants(spec, 8)?;
    let norm = cum.max_density * cum.max_density * cum.beta3;
    let mut sup_gap = Vec::with_capacity(n_list.len());
    let mut scaled = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let sd = density_auto(spec, n)?;
        let gap = sup_density_gap(&sd);
        sup_gap.push(gap);
        scaled.push((n as f64).sqrt() * gap / norm);
    }
    let mut ok = true;
    for i in 1..scaled.len() {
        if scaled[i] > 1.25 * scaled[i - 1] {
            ok = false;
        }
    }
    Ok(GapLadder {
        n_list: n_list.to_vec(),
        sup_gap,
        scaled_gap: scaled,
        lemma61_bound_ok: ok,
    })
}

/// Tilted local-limit residuals on the critical zone A(x) <= a/(n-1):
/// lhs = p_n(x sqrt n)/phi(x sqrt n), rhs = (1/sigma_x) e^{-nA(x) - n v_x^2/2},
/// residual = (lhs - rhs) sqrt(n)/c^4.
pub fn tilted_llt_check(
    spec: &DistributionSpec,
    profile: &LogLaplaceProfile,
    n: u32,
    a: f64,
    c_const: f64,
    samples_per_interval: usize,
) -> Result<Vec<TiltedResidualRow>> {
    if (n as f64) < 4.0 * (a + 1.0) {
        return Err(Error::ZoneViolation(format!(
            "n = {n} below 4(a+1) = {}",
            4.0 * (a + 1.0)
        )));
    }
    let zones = diag::critical_zone(profile, a, n)?;
    let sd = density_auto(spec, n)?;
    let sqrt_n = (n as f64).sqrt();
    let mut rows = Vec::new();
    for &(lo, hi) in &zones.intervals {
        for s in 0..samples_per_interval {
            let x = lo + (hi - lo) * (s as f64 + 0.5) / samples_per_interval as f64;
            let xn = x * sqrt_n;
            let Some(r) = sd.ratio_minus_1_at(xn) else {
                continue;
            };
            let lhs = 1.0 + r;
            let sm = tilt::shifted_moments(profile, x)?;
            let rhs = (1.0 / sm.sigma_h)
                * (-(n as f64) * sm.a_h - 0.5 * (n as f64) * sm.v_h * sm.v_h).exp();
            let residual = (lhs - rhs) * sqrt_n / c_const.powi(4);
            rows.push(TiltedResidualRow {
                n,
                x,
                lhs,
                rhs,
                residual,
            });
        }
    }
    if rows.is_empty() {
        return Err(Error::ZoneViolation(
            "no usable samples inside the critical zone".into(),
        ));
    }
    Ok(rows)
}

/// Leading Cramer-series coefficients: lambda0 = gamma3/6,
/// lambda1 = (gamma4 - 3 gamma3^2)/24. Exact arithmetic on the cumulants.
pub fn cramer_coeffs(report: &CumulantReport) -> (f64, f64) {
    let g3 = report.gammas.first().copied().unwrap_or(0.0);
    let g4 = report.gammas.get(1).copied().unwrap_or(0.0);
    (g3 / 6.0, (g4 - 3.0 * g3 * g3) / 24.0)
}

/// Least-squares fit of ln(p_n/phi) against x^m/n^{m/2-1} over a window
/// |x| <= n^{1/2 - 1/m}, with the tau^{m-2} companion regressor and per-n
/// intercepts absorbing the O((log n)^3/n) remainder.
pub fn richter_fit(
    spec: &DistributionSpec,
    n_list: &[u32],
    include_cubic: bool,
) -> Result<RichterFit> {
    let cum = crate::dist::moments_and_cumulants(spec, 8)?;
    let (m, gamma_m) = diag::first_nonzero_cumulant(&cum)?;
    let mf = m as f64;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    let base_cols = if include_cubic { 3 } else { 2 };
    for (ni, &n) in n_list.iter().enumerate() {
        let sd = density_auto(spec, n)?;
        let nf = n as f64;
        let window = nf.powf(0.5 - 1.0 / mf);
        let pts = 41;
        for k in 0..=pts {
            let x = -window + 2.0 * window * k as f64 / pts as f64;
            let Some(r) = sd.ratio_minus_1_at(x) else {
                continue;
            };
            if r <= -1.0 {
                continue;
            }
            let mut row = vec![0.0; base_cols + n_list.len()];
            row[0] = x.powi(m as i32) / nf.powf(mf / 2.0 - 1.0);
            row[1] = (x / nf.sqrt()).powi(m as i32 - 2);
            if include_cubic {
                row[2] = x.powi(3) / nf.sqrt();
            }
            row[base_cols + ni] = 1.0;
            rows.push(row);
            ys.push(r.ln_1p());
        }
    }
    if rows.len() < base_cols + n_list.len() + 2 {
        return Err(Error::IllConditionedFit("window degenerate".into()));
    }
    let beta =
        num::least_squares(&rows, &ys).ok_or(Error::IllConditionedFit("singular fit".into()))?;
    let mut fact = 1.0;
    for j in 2..=m {
        fact *= j as f64;
    }
    Ok(RichterFit {
        m,
        fitted: beta[0],
        target: gamma_m / fact,
        cubic_coef: if include_cubic { beta[2] } else { 0.0 },
    })
}

/// Max-ratio excess over |x| <= tau0 sqrt(n) per n, with the fitted constant
/// C_n = excess * n / (log n)^3.
pub fn cor_10_3_check(
    spec: &DistributionSpec,
    n_list: &[u32],
    tau0: f64,
) -> Result<Vec<Cor103Row>> {
    let mut out = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let sd = density_auto(spec, n)?;
        let nf = n as f64;
        let reach = tau0 * nf.sqrt();
        let pts = 1 << 13;
        let mut excess = f64::NEG_INFINITY;
        for k in 0..=pts {
            let x = -reach + 2.0 * reach * k as f64 / pts as f64;
            if let Some(r) = sd.ratio_minus_1_at(x) {
                excess = excess.max(r);
            }
        }
        let fitted_c = excess * nf / nf.ln().powi(3);
        out.push(Cor103Row {
            n,
            excess,
            fitted_c,
        });
    }
    Ok(out)
}

/// Residual-table CSV with header n,x,lhs,rhs,residual.
pub fn write_residual_csv<W: Write>(rows: &[TiltedResidualRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "n,x,lhs,rhs,residual")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.n,
            num::fmt_f64(r.x),
            num::fmt_f64(r.lhs),
            num::fmt_f64(r.rhs),
            num::fmt_f64(r.residual)
        )?;
    }
    Ok(())
}
