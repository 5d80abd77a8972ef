//! Experiment configuration: strict JSON parsing with unknown-key rejection
//! and typo suggestions, plus spec-document validation.

use crate::dist::{DistributionSpec, TrigPoly};
use crate::error::{Error, Result};
use crate::grid::GridDensity;
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Command {
    Construct,
    Diagnose,
    Density,
    Divergence,
    Sweep,
    Llt,
}

impl Command {
    pub fn parse(s: &str) -> Result<Command> {
        Ok(match s {
            "construct" => Command::Construct,
            "diagnose" => Command::Diagnose,
            "density" => Command::Density,
            "divergence" => Command::Divergence,
            "sweep" => Command::Sweep,
            "llt" => Command::Llt,
            other => {
                return Err(Error::ParseError(format!(
                    "unknown command {other:?}; expected one of construct, diagnose, density, divergence, sweep, llt"
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Construct => "construct",
            Command::Diagnose => "diagnose",
            Command::Density => "density",
            Command::Divergence => "divergence",
            Command::Sweep => "sweep",
            Command::Llt => "llt",
        }
    }
}

/// Tolerance overrides; every field has the spec-sheet default.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Tolerances {
    pub density_integral: f64,
    pub laplace_identity: f64,
    pub admissibility_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            density_integral: 1e-8,
            laplace_identity: 1e-8,
            admissibility_slack: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridParams {
    pub length: f64,
    pub points: usize,
}

impl Default for GridParams {
    fn default() -> Self {
        GridParams {
            length: 12.0,
            points: 1 << 14,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub command: Command,
    pub spec: DistributionSpec,
    /// Canonical JSON of the spec document (hashed into the run manifest).
    pub spec_json: String,
    pub n: Option<u32>,
    pub n_list: Option<Vec<u32>>,
    pub alphas: Vec<f64>,
    pub grid: GridParams,
    pub tau0: f64,
    pub zone_a: f64,
    pub out: Option<String>,
    pub tolerances: Tolerances,
}

fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for i in 1..=a.len() {
        let mut cur = vec![i];
        for j in 1..=b.len() {
            let cost = if a[i - 1] == b[j - 1] { 0 } else { 1 };
            cur.push((prev[j] + 1).min(cur[j - 1] + 1).min(prev[j - 1] + cost));
        }
        prev = cur;
    }
    prev[b.len()]
}

fn check_keys(obj: &serde_json::Map<String, Value>, allowed: &[&str], ctx: &str) -> Result<()> {
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            let suggestion = allowed
                .iter()
                .map(|cand| (levenshtein(key, cand), *cand))
                .min()
                .filter(|(d, _)| *d <= 2)
                .map(|(_, cand)| format!("; did you mean {cand:?}?"))
                .unwrap_or_default();
            return Err(Error::ParseError(format!(
                "unknown key {key:?} in {ctx}{suggestion}"
            )));
        }
    }
    Ok(())
}

fn as_f64(v: &Value, ctx: &str) -> Result<f64> {
    v.as_f64()
        .ok_or_else(|| Error::ParseError(format!("{ctx} must be a number, got {v}")))
}

fn as_pairs(v: &Value, ctx: &str) -> Result<Vec<(u32, f64)>> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::ParseError(format!("{ctx} must be an array of [k, coef] pairs")))?;
    let mut out = Vec::with_capacity(arr.len());
    for item in arr {
        let pair = item
            .as_array()
            .filter(|p| p.len() == 2)
            .ok_or_else(|| Error::ParseError(format!("{ctx} entries must be [k, coef]")))?;
        let k = pair[0]
            .as_u64()
            .ok_or_else(|| Error::ParseError(format!("{ctx} frequency must be a positive integer")))?;
        out.push((k as u32, as_f64(&pair[1], ctx)?));
    }
    Ok(out)
}

/// Parse the distribution-spec document.
pub fn parse_spec(doc: &Value) -> Result<DistributionSpec> {
    let obj = doc
        .as_object()
        .ok_or_else(|| Error::ParseError("spec must be a JSON object".into()))?;
    let kind = obj
        .get("kind")
        .and_then(|v| v.as_str())
        .ok_or_else(|| Error::ParseError("spec needs a \"kind\" string".into()))?;
    match kind {
        "trig" => {
            check_keys(obj, &["kind", "c", "a0", "cos", "sin"], "trig spec")?;
            let c = as_f64(
                obj.get("c")
                    .ok_or_else(|| Error::ParseError("trig spec needs \"c\"".into()))?,
                "c",
            )?;
            let cos_terms = obj
                .get("cos")
                .map(|v| as_pairs(v, "cos"))
                .transpose()?
                .unwrap_or_default();
            let sin_terms = obj
                .get("sin")
                .map(|v| as_pairs(v, "sin"))
                .transpose()?
                .unwrap_or_default();
            // P(0) = 0 forces a0 = -(sum of cosine coefficients)
            let derived_a0: f64 = -cos_terms.iter().map(|&(_, a)| a).sum::<f64>();
            let a0 = match obj.get("a0") {
                Some(v) => {
                    let given = as_f64(v, "a0")?;
                    if (given - derived_a0).abs() > 1e-12 * (1.0 + derived_a0.abs()) {
                        return Err(Error::ValidationError(format!(
                            "a0 = {given} contradicts P(0) = 0 (needs {derived_a0})"
                        )));
                    }
                    given
                }
                None => derived_a0,
            };
            let poly = TrigPoly::new(a0, cos_terms, sin_terms)?;
            // admissibility: constructing validates moments and c <= c_max
            crate::dist::build_trig_gaussian(&poly, c)?;
            Ok(DistributionSpec::TrigGaussian { poly, c })
        }
        "uniform" => {
            check_keys(obj, &["kind", "halfwidth"], "uniform spec")?;
            let halfwidth = match obj.get("halfwidth") {
                Some(v) => as_f64(v, "halfwidth")?,
                None => 3f64.sqrt(),
            };
            if !(halfwidth > 0.0) {
                return Err(Error::ValidationError("halfwidth must be positive".into()));
            }
            Ok(DistributionSpec::Uniform { halfwidth })
        }
        "wsum" => {
            check_keys(obj, &["kind", "weights"], "wsum spec")?;
            let weights: Vec<f64> = obj
                .get("weights")
                .and_then(|v| v.as_array())
                .ok_or_else(|| Error::ParseError("wsum spec needs \"weights\"".into()))?
                .iter()
                .map(|v| as_f64(v, "weights"))
                .collect::<Result<_>>()?;
            crate::dist::weighted_uniform_sum(&weights)?; // validates
            Ok(DistributionSpec::WeightedUniformSum { weights })
        }
        "grid" => {
            check_keys(obj, &["kind", "x0", "dx", "values"], "grid spec")?;
            let x0 = as_f64(
                obj.get("x0")
                    .ok_or_else(|| Error::ParseError("grid spec needs \"x0\"".into()))?,
                "x0",
            )?;
            let dx = as_f64(
                obj.get("dx")
                    .ok_or_else(|| Error::ParseError("grid spec needs \"dx\"".into()))?,
                "dx",
            )?;
            let values: Vec<f64> = obj
                .get("values")
                .and_then(|v| v.as_array())
                .ok_or_else(|| Error::ParseError("grid spec needs \"values\"".into()))?
                .iter()
                .map(|v| as_f64(v, "values"))
                .collect::<Result<_>>()?;
            let g = GridDensity::new(x0, dx, values)?;
            g.check_standardized()?;
            Ok(DistributionSpec::Grid { density: g })
        }
        other => Err(Error::ParseError(format!(
            "unknown spec kind {other:?}; expected trig, uniform, wsum, or grid"
        ))),
    }
}

/// Canonical serialization of a spec document (stable key order).
pub fn spec_to_json(spec: &DistributionSpec) -> String {
    match spec {
        DistributionSpec::TrigGaussian { poly, c } => {
            let cos: Vec<Value> = poly
                .cos_terms
                .iter()
                .map(|&(k, a)| serde_json::json!([k, a]))
                .collect();
            let sin: Vec<Value> = poly
                .sin_terms
                .iter()
                .map(|&(k, b)| serde_json::json!([k, b]))
                .collect();
            serde_json::json!({
                "kind": "trig", "c": c, "a0": poly.a0, "cos": cos, "sin": sin
            })
            .to_string()
        }
        DistributionSpec::Uniform { halfwidth } => {
            serde_json::json!({"kind": "uniform", "halfwidth": halfwidth}).to_string()
        }
        DistributionSpec::WeightedUniformSum { weights } => {
            serde_json::json!({"kind": "wsum", "weights": weights}).to_string()
        }
        DistributionSpec::Grid { density } => serde_json::json!({
            "kind": "grid", "x0": density.x0, "dx": density.dx, "values": density.values
        })
        .to_string(),
    }
}

const CONFIG_KEYS: [&str; 11] = [
    "command", "spec", "n", "n_list", "alphas", "grid", "tau0", "a", "out", "tolerances",
    "threads",
];

/// Parse a configuration document (strict mode: unknown keys rejected).
pub fn parse_config(doc: &str) -> Result<ExperimentConfig> {
    let v: Value = serde_json::from_str(doc)
        .map_err(|e| Error::ParseError(format!("invalid JSON: {e}")))?;
    let obj = v
        .as_object()
        .ok_or_else(|| Error::ParseError("config must be a JSON object".into()))?;
    check_keys(obj, &CONFIG_KEYS, "config")?;
    let command = Command::parse(
        obj.get("command")
            .and_then(|c| c.as_str())
            .ok_or_else(|| Error::ParseError("config needs a \"command\" string".into()))?,
    )?;
    let spec_doc = obj
        .get("spec")
        .ok_or_else(|| Error::ParseError("config needs a \"spec\" document".into()))?;
    let spec = parse_spec(spec_doc)?;
    let n = match obj.get("n") {
        Some(v) => Some(
            v.as_u64()
                .filter(|&n| n >= 1)
                .ok_or_else(|| Error::ValidationError("n must be >= 1".into()))?
                as u32,
        ),
        None => None,
    };
    let n_list = match obj.get("n_list") {
        Some(v) => {
            let arr = v
                .as_array()
                .ok_or_else(|| Error::ParseError("n_list must be an array".into()))?;
            let list: Vec<u32> = arr
                .iter()
                .map(|x| {
                    x.as_u64()
                        .filter(|&n| n >= 1 && n <= 4096)
                        .map(|n| n as u32)
                        .ok_or_else(|| {
                            Error::ValidationError("n_list entries must be in 1..=4096".into())
                        })
                })
                .collect::<Result<_>>()?;
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::ValidationError("n_list must be increasing".into()));
            }
            Some(list)
        }
        None => None,
    };
    let alphas = match obj.get("alphas") {
        Some(v) => v
            .as_array()
            .ok_or_else(|| Error::ParseError("alphas must be an array".into()))?
            .iter()
            .map(|x| as_f64(x, "alphas"))
            .collect::<Result<Vec<f64>>>()?,
        None => crate::div::DEFAULT_ALPHAS.to_vec(),
    };
    for &a in &alphas {
        if !(a > 0.0) || a == 1.0 {
            return Err(Error::ValidationError(format!(
                "alpha = {a} outside (0,1) U (1,inf)"
            )));
        }
    }
    let grid = match obj.get("grid") {
        Some(v) => {
            let g = v
                .as_object()
                .ok_or_else(|| Error::ParseError("grid must be an object".into()))?;
            check_keys(g, &["length", "points"], "grid parameters")?;
            let mut out = GridParams::default();
            if let Some(l) = g.get("length") {
                out.length = as_f64(l, "grid.length")?;
            }
            if let Some(p) = g.get("points") {
                out.points = p
                    .as_u64()
                    .filter(|&p| (64..=1 << 22).contains(&p))
                    .ok_or_else(|| {
                        Error::ValidationError("grid.points must be in 64..=4194304".into())
                    })? as usize;
            }
            out
        }
        None => GridParams::default(),
    };
    let tau0 = match obj.get("tau0") {
        Some(v) => as_f64(v, "tau0")?,
        None => 0.25,
    };
    let zone_a = match obj.get("a") {
        Some(v) => as_f64(v, "a")?,
        None => 1.0,
    };
    let out = obj
        .get("out")
        .map(|v| {
            v.as_str()
                .map(str::to_string)
                .ok_or_else(|| Error::ParseError("out must be a string".into()))
        })
        .transpose()?;
    let tolerances = match obj.get("tolerances") {
        Some(v) => {
            let t = v
                .as_object()
                .ok_or_else(|| Error::ParseError("tolerances must be an object".into()))?;
            check_keys(
                t,
                &["density_integral", "laplace_identity", "admissibility_slack"],
                "tolerances",
            )?;
            let mut out = Tolerances::default();
            if let Some(x) = t.get("density_integral") {
                out.density_integral = as_f64(x, "tolerances.density_integral")?;
            }
            if let Some(x) = t.get("laplace_identity") {
                out.laplace_identity = as_f64(x, "tolerances.laplace_identity")?;
            }
            if let Some(x) = t.get("admissibility_slack") {
                out.admissibility_slack = as_f64(x, "tolerances.admissibility_slack")?;
            }
            out
        }
        None => Tolerances::default(),
    };
    let spec_json = spec_to_json(&spec);
    Ok(ExperimentConfig {
        command,
        spec,
        spec_json,
        n,
        n_list,
        alphas,
        grid,
        tau0,
        zone_a,
        out,
        tolerances,
    })
}
