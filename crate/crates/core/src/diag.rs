//! Strict-subgaussianity and CLT-criterion diagnostics: the zero set of A,
//! the A''-at-zeros condition, separation margins, the periodic criterion on
//! P, critical zones, and the first nonzero cumulant.

use crate::dist::{CumulantReport, DistributionSpec, TrigPoly};
use crate::error::{Error, Result};
use crate::tilt::LogLaplaceProfile;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CondB {
    Vacuous,
    Satisfied,
    Violated,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct PeriodicRootCheck {
    pub t: f64,
    pub p_value: f64,
    pub p_second: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsReport {
    pub spec_kind: String,
    pub strictly_subgaussian: bool,
    pub min_a: f64,
    /// Zeros of A within one period [0, h] (periodic) or the scan range.
    pub a_zero_set: Vec<f64>,
    /// Degenerate flag: A vanishes identically (the normal law).
    pub a_flat: bool,
    pub cond_a: bool,
    /// (zero location, |A''| there or the scale-free |P''| for trig specs).
    pub cond_a_details: Vec<(f64, f64)>,
    pub cond_b: CondB,
    pub separation_margins: Vec<(f64, f64)>,
    pub periodic_criterion: Vec<PeriodicRootCheck>,
    pub first_nonzero_cumulant: Option<(usize, f64)>,
    pub predicted_clt: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ZoneSet {
    pub a: f64,
    pub n: u32,
    pub intervals: Vec<(f64, f64)>,
}

impl ZoneSet {
    pub fn level(&self) -> f64 {
        self.a / (self.n as f64 - 1.0)
    }

    pub fn contains(&self, t: f64) -> bool {
        self.intervals.iter().any(|&(lo, hi)| t >= lo && t <= hi)
    }
}

/// Minimum of A, its zero set, and the subgaussianity verdict.
///
/// Zeros of A >= 0 are minima, so they are located through sign changes of
/// A' filtered by A below tolerance; a plain value scan would miss tangency.
pub fn strict_check(profile: &LogLaplaceProfile) -> Result<(bool, f64, Vec<f64>, bool)> {
    let n = profile.k.len();
    let min_a = profile.min_a();
    let max_a = profile.a.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let strictly = min_a >= -1e-10;
    // Exact (trig) tables resolve arbitrarily small amplitudes; quadrature
    // tables are flat once A sits below their noise.
    let flat = if profile.exact {
        max_a == 0.0
    } else {
        max_a <= 1e-12
    };
    if flat {
        return Ok((strictly, min_a, vec![], true));
    }
    if profile.period.is_none() {
        // A must not be descending toward either boundary
        if profile.a[n - 1] < profile.a[n - 2] || profile.a[0] < profile.a[1] {
            return Err(Error::RangeTooSmall(
                "A still descending at the scan boundary".into(),
            ));
        }
    }
    // scan one period [0, h] when periodic, else the full range
    let (lo, hi) = match profile.period {
        Some(h) => (0.0, h),
        None => (profile.t0, profile.t_end()),
    };
    let tol_zero = if profile.exact {
        1e-9 * max_a
    } else {
        1e-10 * max_a.max(1.0)
    };
    let mut zeros: Vec<f64> = Vec::new();
    let steps = 1 << 14;
    let dt = (hi - lo) / steps as f64;
    let mut prev = profile.a1_at(lo + 0.5 * dt)?;
    for i in 1..steps {
        let t_mid = lo + (i as f64 + 0.5) * dt;
        let d = profile.a1_at(t_mid)?;
        if prev < 0.0 && d >= 0.0 {
            let root = crate::num::bisect(
                t_mid - dt,
                t_mid,
                &|t| profile.a1_at(t).unwrap_or(f64::NAN),
                60,
            );
            if profile.a_at(root)? <= tol_zero {
                zeros.push(root);
            }
        }
        prev = d;
    }
    // merge near-duplicates (a sign change straddling a knot can surface
    // twice) and drop roots hugging the period endpoints -- those are
    // appended exactly below
    let merge_tol = 8.0 * dt;
    zeros.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut merged: Vec<f64> = Vec::new();
    for z in zeros {
        if profile.period.is_some() && (z - lo < merge_tol || hi - z < merge_tol) {
            continue;
        }
        if merged.last().map(|&p| z - p < merge_tol).unwrap_or(false) {
            continue;
        }
        merged.push(z);
    }
    // endpoints of the period are zeros for periodic subgaussian specs
    if profile.period.is_some() {
        if profile.a_at(lo)? <= tol_zero {
            merged.insert(0, lo);
        }
        if profile.a_at(hi)? <= tol_zero {
            merged.push(hi);
        }
    }
    Ok((strictly, min_a, merged, false))
}

/// Separation margins 1 - sup_{|t| >= t0} Psi(t) for each requested t0.
pub fn separation_margin(
    spec: &DistributionSpec,
    profile: &LogLaplaceProfile,
    t0_list: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::with_capacity(t0_list.len());
    for &t0 in t0_list {
        if !(t0 > 0.0) {
            return Err(Error::ValidationError("t0 must be positive".into()));
        }
        let (lo, hi) = match spec {
            DistributionSpec::TrigGaussian { poly, .. } => {
                // sup over |t| >= t0 of a periodic Psi reduces to one period
                (t0, t0 + poly.h)
            }
            _ => {
                if t0 >= profile.t_end() {
                    return Err(Error::RangeTooSmall(format!(
                        "t0 = {t0} beyond the profile range"
                    )));
                }
                let n = profile.k.len();
                if profile.a[n - 1] < profile.a[n - 2] {
                    return Err(Error::RangeTooSmall(
                        "Psi not visibly decreasing at the range end".into(),
                    ));
                }
                (t0, profile.t_end())
            }
        };
        // sup Psi = e^{-min A} over the region (A-symmetric specs: t >= t0
        // covers both signs for symmetric laws; asymmetric sin terms are
        // covered by the [-h, h] profile fold)
        let steps = 1 << 13;
        let mut min_a = f64::INFINITY;
        for i in 0..=steps {
            let t = lo + (hi - lo) * i as f64 / steps as f64;
            min_a = min_a.min(profile.a_at(t)?);
            if profile.period.is_none() {
                min_a = min_a.min(profile.a_at(-t)?);
            }
        }
        let margin = -(-min_a).exp_m1(); // 1 - e^{-min A}
        out.push((t0, margin.max(0.0)));
    }
    Ok(out)
}

/// Sublevel intervals {A(h) <= a/(n-1)} over the profile range, endpoints
/// refined to |A - level| <= 1e-10.
pub fn critical_zone(profile: &LogLaplaceProfile, a: f64, n: u32) -> Result<ZoneSet> {
    if !(a > 0.0) || n < 2 {
        return Err(Error::ValidationError(
            "critical zone needs a > 0 and n >= 2".into(),
        ));
    }
    let level = a / (n as f64 - 1.0);
    let steps = 1 << 15;
    let (lo, hi) = (profile.t0, profile.t_end());
    let dt = (hi - lo) / steps as f64;
    let below = |t: f64| profile.a_at(t).map(|v| v <= level);
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    let mut open: Option<f64> = None;
    let refine = |t_out: f64, t_in: f64| -> f64 {
        // bisection on A - level between an outside and an inside point
        crate::num::bisect(
            t_out,
            t_in,
            &|t| profile.a_at(t).unwrap_or(f64::NAN) - level,
            60,
        )
    };
    let mut prev_in = below(lo)?;
    if prev_in {
        open = Some(lo);
    }
    for i in 1..=steps {
        let t = lo + i as f64 * dt;
        let now_in = below(t)?;
        if now_in && !prev_in {
            open = Some(refine(t - dt, t));
        }
        if !now_in && prev_in {
            let start = open.take().unwrap();
            intervals.push((start, refine(t, t - dt)));
        }
        prev_in = now_in;
    }
    if let Some(start) = open {
        intervals.push((start, hi));
    }
    Ok(ZoneSet { a, n, intervals })
}

/// First cumulant of order >= 3 above the threshold 1e-12 * scale.
pub fn first_nonzero_cumulant(report: &CumulantReport) -> Result<(usize, f64)> {
    let scale = report
        .gammas
        .iter()
        .map(|g| g.abs())
        .fold(0.0f64, f64::max)
        .max(1.0);
    let thr = 1e-12 * scale;
    for (i, &g) in report.gammas.iter().enumerate() {
        if g.abs() > thr {
            return Ok((i + 3, g));
        }
    }
    Err(Error::AllZeroUpToJ(report.j_max))
}

/// Full diagnostics for a spec.
pub fn diagnose(spec: &DistributionSpec, profile: &LogLaplaceProfile) -> Result<DiagnosticsReport> {
    let (strictly, min_a, zeros, flat) = strict_check(profile)?;
    let mut cond_a = true;
    let mut cond_a_details: Vec<(f64, f64)> = Vec::new();
    let mut periodic_rows: Vec<PeriodicRootCheck> = Vec::new();
    let cond_b;
    match spec {
        DistributionSpec::TrigGaussian { poly, c } => {
            // scale-free criterion on P: at roots of P in (0, h) require
            // P''(root) = 0; the endpoints always satisfy A'' = 0.
            if *c != 0.0 {
                let scale2: f64 = poly
                    .cos_terms
                    .iter()
                    .chain(poly.sin_terms.iter())
                    .map(|&(k, v)| (k as f64).powi(2) * v.abs())
                    .sum::<f64>()
                    .max(1.0);
                for root in poly.interior_roots() {
                    let p2 = poly.d2(root);
                    let pass = p2.abs() <= 1e-8 * scale2;
                    periodic_rows.push(PeriodicRootCheck {
                        t: root,
                        p_value: poly.eval(root),
                        p_second: p2,
                        pass,
                    });
                    cond_a_details.push((root, p2));
                    cond_a &= pass;
                }
            }
            // finitely many roots per period: condition b) is subsumed
            cond_b = CondB::Vacuous;
        }
        _ => {
            for &z in &zeros {
                // interior zeros only; range endpoints are not zeros of A
                // for separation-class specs
                let a2 = profile.a2_at(z)?;
                let pass = a2.abs() <= 1e-6;
                cond_a_details.push((z, a2));
                cond_a &= pass;
            }
            cond_b = if flat {
                CondB::Vacuous
            } else {
                let margins = separation_margin(spec, profile, &[0.5, 1.0, 2.0, 5.0])?;
                if margins.iter().all(|&(_, m)| m > 1e-12) {
                    CondB::Vacuous
                } else {
                    CondB::Inconclusive
                }
            };
        }
    }
    let separation_margins = match spec {
        DistributionSpec::TrigGaussian { .. } => {
            separation_margin(spec, profile, &[0.5, 1.0, 2.0])?
        }
        _ => separation_margin(spec, profile, &[0.5, 1.0, 2.0, 5.0])?,
    };
    let cum = crate::dist::moments_and_cumulants(spec, 8)?;
    let first = first_nonzero_cumulant(&cum).ok();
    let predicted_clt = strictly && cond_a && cond_b != CondB::Violated;
    Ok(DiagnosticsReport {
        spec_kind: spec.kind().to_string(),
        strictly_subgaussian: strictly,
        min_a,
        a_zero_set: zeros,
        a_flat: flat,
        cond_a,
        cond_a_details,
        cond_b,
        separation_margins,
        periodic_criterion: periodic_rows,
        first_nonzero_cumulant: first,
        predicted_clt,
    })
}

impl DiagnosticsReport {
    /// Human-readable verdict table.
    pub fn render_table(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("spec kind            : {}\n", self.spec_kind));
        s.push_str(&format!(
            "strictly subgaussian : {} (min A = {:.3e})\n",
            self.strictly_subgaussian, self.min_a
        ));
        if self.a_flat {
            s.push_str("A-zero set           : A = 0 identically (normal law)\n");
        } else {
            let zs: Vec<String> = self.a_zero_set.iter().map(|z| format!("{z:.6}")).collect();
            s.push_str(&format!("A-zero set           : [{}]\n", zs.join(", ")));
        }
        s.push_str(&format!("condition a)         : {}\n", self.cond_a));
        for (t, v) in &self.cond_a_details {
            s.push_str(&format!("    zero t = {t:.6}: curvature {v:.6e}\n"));
        }
        s.push_str(&format!("condition b)         : {:?}\n", self.cond_b));
        for row in &self.periodic_criterion {
            s.push_str(&format!(
                "    root t = {:.6}: P = {:.3e}, P'' = {:.6e} -> {}\n",
                row.t,
                row.p_value,
                row.p_second,
                if row.pass { "pass" } else { "FAIL" }
            ));
        }
        for (t0, m) in &self.separation_margins {
            s.push_str(&format!("separation t0 = {t0:<4}: margin {m:.6e}\n"));
        }
        match self.first_nonzero_cumulant {
            Some((m, g)) => {
                s.push_str(&format!("first cumulant       : gamma_{m} = {g:.6e}\n"))
            }
            None => s.push_str("first cumulant       : none up to order 8\n"),
        }
        s.push_str(&format!("predicted CLT        : {}\n", self.predicted_clt));
        s
    }
}

/// Helper: A'' scale-free criterion is what Theorem-2.3 style verdicts use;
/// expose the polynomial hook for tests.
pub fn periodic_criterion_roots(poly: &TrigPoly) -> Vec<(f64, f64)> {
    poly.interior_roots()
        .into_iter()
        .map(|t| (t, poly.d2(t)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DistributionSpec;
    use crate::tilt::default_profile;
    use std::f64::consts::PI;

    fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
        assert!((a - b).abs() <= tol, "{what}: {a} vs {b}");
    }

    #[test]
    fn normal_diagnostics() {
        let spec = DistributionSpec::normal();
        let prof = default_profile(&spec).unwrap();
        let rep = diagnose(&spec, &prof).unwrap();
        assert!(rep.strictly_subgaussian);
        assert!(rep.a_flat);
        assert!(rep.predicted_clt);
        assert!(rep.first_nonzero_cumulant.is_none());
        // margins are 0 for the degenerate Psi = 1
        for (_, m) in &rep.separation_margins {
            assert_close(*m, 0.0, 1e-12, "normal margin");
        }
    }

    #[test]
    fn ex94_diagnostics() {
        let spec = DistributionSpec::example_94(2e-3);
        let prof = default_profile(&spec).unwrap();
        let rep = diagnose(&spec, &prof).unwrap();
        assert!(rep.strictly_subgaussian);
        assert!(!rep.a_flat);
        // zeros at 0 and pi within the period
        assert_eq!(rep.a_zero_set.len(), 2, "zeros: {:?}", rep.a_zero_set);
        assert_close(rep.a_zero_set[0], 0.0, 1e-8, "zero at 0");
        assert_close(rep.a_zero_set[1], PI, 1e-8, "zero at pi");
        assert!(rep.cond_a, "sin^4 > 0 inside the period");
        assert!(rep.periodic_criterion.is_empty());
        assert_eq!(rep.cond_b, CondB::Vacuous);
        assert!(rep.predicted_clt);
        // separation fails: margin 0 at every t0 < pi
        for (_, m) in &rep.separation_margins {
            assert!(*m <= 1e-10, "margin should vanish, got {m}");
        }
        let (m, g) = rep.first_nonzero_cumulant.unwrap();
        assert_eq!(m, 4);
        assert_close(g, -24.0 * 2e-3, 1e-12, "gamma4 = -24c");
    }

    #[test]
    fn ex95_diagnostics_negative_verdict() {
        let spec = DistributionSpec::example_95(1e-14);
        let prof = default_profile(&spec).unwrap();
        let rep = diagnose(&spec, &prof).unwrap();
        assert!(rep.strictly_subgaussian);
        assert!(!rep.predicted_clt, "ex95 must fail the CLT criterion");
        assert_eq!(rep.periodic_criterion.len(), 2);
        let w = &rep.periodic_criterion[0];
        assert_close(w.t, PI / 6.0, 1e-8, "witness t0");
        // P''(t0) = 2 Q'(t0)^2 = 3/2 (Q'(pi/6) = -sqrt3/2)
        assert_close(w.p_second, 1.5, 1e-9, "witness P''");
        assert!(!w.pass);
        // A-zero pattern {0, pi/6, 5pi/6, pi}
        assert_eq!(rep.a_zero_set.len(), 4, "zeros: {:?}", rep.a_zero_set);
        assert_close(rep.a_zero_set[1], PI / 6.0, 1e-6, "zero at pi/6");
        assert_close(rep.a_zero_set[2], 5.0 * PI / 6.0, 1e-6, "zero at 5pi/6");
    }

    #[test]
    fn scale_free_verdict_invariant_in_c() {
        for &c in &[1e-14, 5e-14, 7.9e-14] {
            let spec = DistributionSpec::example_95(c);
            let prof = default_profile(&spec).unwrap();
            let rep = diagnose(&spec, &prof).unwrap();
            assert!(!rep.predicted_clt, "verdict must not depend on c = {c}");
        }
        for &c in &[1e-5, 2e-3] {
            let spec = DistributionSpec::example_94(c);
            let prof = default_profile(&spec).unwrap();
            assert!(diagnose(&spec, &prof).unwrap().predicted_clt);
        }
    }

    #[test]
    fn uniform_diagnostics_and_margins() {
        let spec = DistributionSpec::uniform();
        let prof = default_profile(&spec).unwrap();
        let rep = diagnose(&spec, &prof).unwrap();
        assert!(rep.strictly_subgaussian);
        assert!(rep.predicted_clt);
        assert_eq!(rep.cond_b, CondB::Vacuous, "separation holds");
        // margin at t0 = 1: 1 - e^{-A(1)} = 0.04133
        let margins = separation_margin(&spec, &prof, &[1.0]).unwrap();
        let a1 = 0.5 - ((3f64.sqrt()).sinh() / 3f64.sqrt()).ln();
        assert_close(margins[0].1, -(-a1).exp_m1(), 1e-6, "margin at 1");
        assert!(margins[0].1 > 0.0);
        let (m, g) = rep.first_nonzero_cumulant.unwrap();
        assert_eq!(m, 4);
        assert_close(g, -1.2, 1e-6, "uniform gamma4");
    }

    #[test]
    fn critical_zones() {
        // normal: whole range
        let prof = default_profile(&DistributionSpec::normal()).unwrap();
        let z = critical_zone(&prof, 1.0, 101).unwrap();
        assert_eq!(z.intervals.len(), 1);
        assert_close(z.intervals[0].0, prof.t0, 1e-12, "zone lo");
        assert_close(z.intervals[0].1, prof.t_end(), 1e-12, "zone hi");

        // ex94 with a level below max A: narrow intervals around 0, +-pi
        // with half-width ~ (a/(c(n-1)))^{1/4}
        let c = 2e-3;
        let spec = DistributionSpec::example_94(c);
        let prof = default_profile(&spec).unwrap();
        let (a, n) = (1e-3, 1001u32);
        let z = critical_zone(&prof, a, n).unwrap();
        assert_eq!(z.intervals.len(), 3, "intervals: {:?}", z.intervals);
        let half_width = (a / (c * (n as f64 - 1.0))).powf(0.25);
        let center = z.intervals[1];
        assert_close(center.0, -half_width, 0.05 * half_width, "zone edge lo");
        assert_close(center.1, half_width, 0.05 * half_width, "zone edge hi");
        // endpoint consistency: |A - level| <= 1e-10
        for &(lo, hi) in &z.intervals {
            for t in [lo, hi] {
                if t > prof.t0 + 1e-9 && t < prof.t_end() - 1e-9 {
                    let da = (prof.a_at(t).unwrap() - z.level()).abs();
                    assert!(da <= 1e-10, "endpoint off-level by {da:.3e}");
                }
            }
        }
        // at the spec-sheet parameters (a = 1, n = 101) the level exceeds
        // max A = -ln(1 - c), so the zone is the entire range
        let z2 = critical_zone(&prof, 1.0, 101).unwrap();
        assert_eq!(z2.intervals.len(), 1);

        // uniform: single interval around 0
        let pu = default_profile(&DistributionSpec::uniform()).unwrap();
        let zu = critical_zone(&pu, 1.0, 101).unwrap();
        assert_eq!(zu.intervals.len(), 1);
        assert!(zu.contains(0.0));
        assert!(!zu.contains(5.0));
    }

    #[test]
    fn first_nonzero_errors_for_normal() {
        let rep = crate::dist::moments_and_cumulants(&DistributionSpec::normal(), 8).unwrap();
        assert!(matches!(
            first_nonzero_cumulant(&rep),
            Err(Error::AllZeroUpToJ(8))
        ));
    }
}
