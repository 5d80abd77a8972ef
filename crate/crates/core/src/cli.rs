//! Command dispatch: run one experiment, write its artifacts, leave a run
//! manifest. Partial outputs are removed when a run fails.

use crate::config::{Command, ExperimentConfig};
use crate::conv::{self, Payload};
use crate::diag;
use crate::dist::DistributionSpec;
use crate::div::{self, TailCertificate};
use crate::error::{Error, Result};
use crate::llt;
use crate::sweep::{self, MethodPreference};
use crate::tilt;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Serialize)]
struct RunManifest<'a> {
    command: &'a str,
    spec_sha256: String,
    version: &'a str,
    tolerances: &'a crate::config::Tolerances,
    wall_ms: u128,
    artifacts: Vec<String>,
}

/// Files written by a successful run.
pub struct RunArtifacts {
    pub files: Vec<PathBuf>,
    pub stdout: String,
}

struct Writer {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Writer {
    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes)?;
        self.written.push(path);
        Ok(())
    }

    fn cleanup(&self) {
        for f in &self.written {
            let _ = fs::remove_file(f);
        }
    }
}

/// Run the configured experiment, writing artifacts under `out_dir`.
pub fn dispatch(config: &ExperimentConfig, out_dir: &Path, threads: Option<usize>) -> Result<RunArtifacts> {
    fs::create_dir_all(out_dir)?;
    let mut w = Writer {
        dir: out_dir.to_path_buf(),
        written: Vec::new(),
    };
    let start = Instant::now();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        pool = pool.num_threads(t);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::ValidationError(format!("thread pool: {e}")))?;
    let result = pool.install(|| run_command(config, &mut w));
    match result {
        Ok(stdout) => {
            let manifest = RunManifest {
                command: config.command.name(),
                spec_sha256: hex_digest(&config.spec_json),
                version: env!("CARGO_PKG_VERSION"),
                tolerances: &config.tolerances,
                wall_ms: start.elapsed().as_millis(),
                artifacts: w
                    .written
                    .iter()
                    .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
                    .collect(),
            };
            let bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
            w.put("run_manifest.json", &bytes)?;
            Ok(RunArtifacts {
                files: w.written,
                stdout,
            })
        }
        Err(e) => {
            w.cleanup();
            Err(e)
        }
    }
}

fn hex_digest(s: &str) -> String {
    let mut h = Sha256::new();
    h.update(s.as_bytes());
    let out = h.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

fn tail_certificate_parts(spec: &DistributionSpec) -> Result<Option<(tilt::LogLaplaceProfile, f64)>> {
    if matches!(spec, DistributionSpec::TrigGaussian { .. }) {
        return Ok(None);
    }
    let prof = tilt::default_profile(spec)?;
    let base = conv::gridconv_for_spec(spec, 1, None)?;
    let (t1, _, _) = div::t_inf(&base, None)?;
    Ok(Some((prof, 1.0 + t1)))
}

fn run_command(config: &ExperimentConfig, w: &mut Writer) -> Result<String> {
    let spec = &config.spec;
    match config.command {
        Command::Construct => {
            let mut out = String::new();
            match spec {
                DistributionSpec::TrigGaussian { poly, c } => {
                    let build = crate::dist::build_trig_gaussian(poly, *c)?;
                    let ts: Vec<f64> = (-6..=6).map(|i| i as f64 * 0.5).collect();
                    let laplace_err = crate::dist::verify_laplace_identity(&build, &ts)?;
                    if laplace_err > config.tolerances.laplace_identity {
                        return Err(Error::ValidationError(format!(
                            "laplace identity residual {laplace_err:.3e} above tolerance"
                        )));
                    }
                    let rep = serde_json::json!({
                        "kind": "trig",
                        "c": c,
                        "c_max": build.c_max,
                        "period": poly.h,
                        "laplace_identity_residual": laplace_err,
                    });
                    w.put("construct.json", serde_json::to_string_pretty(&rep)?.as_bytes())?;
                    let sd = conv::density_zn_spectral(spec, 1)?;
                    let mut csv = Vec::new();
                    sd.write_coeff_csv(&mut csv)?;
                    w.put("coeffs.csv", &csv)?;
                    let mut dcsv = Vec::new();
                    sd.write_csv(&mut dcsv)?;
                    w.put("density.csv", &dcsv)?;
                    out.push_str(&format!(
                        "constructed trig spec: c = {c:e}, c_max = {:e}, period = {}\n",
                        build.c_max, poly.h
                    ));
                }
                _ => {
                    let g = crate::dist::spec_grid_density(spec)?;
                    if (g.integral() - 1.0).abs() > config.tolerances.density_integral {
                        return Err(Error::ValidationError("density mass off tolerance".into()));
                    }
                    let rep = serde_json::json!({
                        "kind": spec.kind(),
                        "mass": g.integral(),
                        "mean": g.mean(),
                        "variance": g.variance(),
                        "max_density": g.max_density(),
                        "support": [g.x0, g.x_end()],
                    });
                    w.put("construct.json", serde_json::to_string_pretty(&rep)?.as_bytes())?;
                    let sd = conv::density_zn_gridconv(&g, 1)?;
                    let mut dcsv = Vec::new();
                    sd.write_csv(&mut dcsv)?;
                    w.put("density.csv", &dcsv)?;
                    out.push_str(&format!("constructed {} spec\n", spec.kind()));
                }
            }
            Ok(out)
        }
        Command::Diagnose => {
            let prof = tilt::default_profile(spec)?;
            let rep = diag::diagnose(spec, &prof)?;
            w.put(
                "diagnostics.json",
                serde_json::to_string_pretty(&rep)?.as_bytes(),
            )?;
            let mut csv = Vec::new();
            prof.write_csv(&mut csv)?;
            w.put("profile.csv", &csv)?;
            Ok(rep.render_table())
        }
        Command::Density => {
            let n = config.n.unwrap_or(1);
            let sd = llt::density_auto(spec, n)?;
            let mut csv = Vec::new();
            sd.write_csv(&mut csv)?;
            w.put("density.csv", &csv)?;
            if matches!(sd.payload, Payload::Spectral(_)) {
                let mut ccsv = Vec::new();
                sd.write_coeff_csv(&mut ccsv)?;
                w.put("coeffs.csv", &ccsv)?;
            }
            let (mean, var) = sd.mean_and_variance();
            Ok(format!(
                "density of Z_{n} by {:?}: mass = {:.12}, mean = {mean:.3e}, variance = {var:.9}\n",
                sd.method,
                sd.integral()
            ))
        }
        Command::Divergence => {
            let n = config.n.unwrap_or(1);
            let sd = llt::density_auto(spec, n)?;
            let parts = tail_certificate_parts(spec)?;
            let cert = parts.as_ref().map(|(p, c)| TailCertificate {
                spec,
                profile: p,
                c_base: *c,
            });
            let rep = div::report(&sd, &config.alphas, cert.as_ref())?;
            rep.check_monotone(1e-9)?;
            w.put(
                "divergence.json",
                serde_json::to_string_pretty(&rep)?.as_bytes(),
            )?;
            let mut csv = Vec::new();
            rep.write_csv(&mut csv)?;
            w.put("divergence.csv", &csv)?;
            Ok(format!(
                "T_inf = {:.6e} at x = {:.6}, D_inf = {:.6e}\n",
                rep.t_inf, rep.argmax_x, rep.d_inf
            ))
        }
        Command::Sweep => {
            let ladder = config
                .n_list
                .clone()
                .unwrap_or_else(|| sweep::DEFAULT_LADDER.to_vec());
            let pref = match spec {
                DistributionSpec::TrigGaussian { .. } => MethodPreference::Spectral,
                _ => MethodPreference::Auto,
            };
            let sw = sweep::run_sweep(spec, &ladder, pref)?;
            let mut csv = Vec::new();
            sw.write_csv(&mut csv)?;
            w.put("sweep.csv", &csv)?;
            w.put(
                "sweep_summary.json",
                serde_json::to_string_pretty(&sw)?.as_bytes(),
            )?;
            Ok(format!(
                "sweep over {:?}: slope = {:.4}, verdict = {:?}\n",
                sw.n_list, sw.loglog_slope, sw.verdict
            ))
        }
        Command::Llt => {
            let ladder = config
                .n_list
                .clone()
                .unwrap_or_else(|| vec![16, 32, 64, 128, 256]);
            let gaps = llt::uniform_llt_gap(spec, &ladder)?;
            let cum = crate::dist::moments_and_cumulants(spec, 8)?;
            let (l0, l1) = llt::cramer_coeffs(&cum);
            let richter = llt::richter_fit(spec, &ladder, true).ok();
            let cor103 = llt::cor_10_3_check(spec, &ladder, config.tau0)?;
            let prof = tilt::default_profile(spec)?;
            let parts = tail_certificate_parts(spec)?;
            let c_const = parts.map(|(_, c)| c).unwrap_or(1.0);
            let n_tilt = *ladder.last().unwrap();
            let tilted = llt::tilted_llt_check(spec, &prof, n_tilt, config.zone_a, c_const, 9)
                .unwrap_or_default();
            let rep = llt::LltReport {
                gaps,
                cramer_lambda0: l0,
                cramer_lambda1: l1,
                richter,
                cor103,
                tilted,
            };
            w.put("llt.json", serde_json::to_string_pretty(&rep)?.as_bytes())?;
            let mut csv = Vec::new();
            llt::write_residual_csv(&rep.tilted, &mut csv)?;
            w.put("residuals.csv", &csv)?;
            Ok(format!(
                "llt ladder {:?}: lambda0 = {l0}, lambda1 = {l1}\n",
                rep.gaps.n_list
            ))
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::ParseError(format!("serialization: {e}"))
    }
}

/// Map an error to the process exit code: 2 for configuration problems,
/// 1 for computation failures.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::ParseError(_) | Error::ValidationError(_) => 2,
        _ => 1,
    }
}
