//! JSON run configuration: tuning constants, the base-case floor and
//! generator-set overrides.
//!
//! ```json
//! { "c_q": 0.11, "c_k": 1.0, "c_inw": 1.25, "base_case_floor": 4,
//!   "generator_sets": ["gens16.json", { "dim": 2, "generators": [...] }] }
//! ```
//! String entries are paths relative to the config file. `base_case_floor`
//! is an integer or `"default"`.

use std::path::Path;

use serde::Deserialize;

use capgen_core::orth_design::GeneratorSet;
use capgen_core::pipeline::{FloorPolicy, Params};

use crate::error::{read_file, HarnessError, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    c_q: Option<f64>,
    c_k: Option<f64>,
    c_inw: Option<f64>,
    base_case_floor: Option<FloorSpec>,
    #[serde(default)]
    generator_sets: Vec<GeneratorSource>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum FloorSpec {
    Fixed(usize),
    Named(String),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum GeneratorSource {
    Path(String),
    Inline(serde_json::Value),
}

fn positive(name: &str, v: Option<f64>, default: f64) -> Result<f64> {
    match v {
        None => Ok(default),
        Some(x) if x.is_finite() && x > 0.0 => Ok(x),
        Some(x) => Err(HarnessError::Config(format!("{name} must be positive and finite, got {x}"))),
    }
}

/// Parses config text; relative generator paths resolve against `base_dir`.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<Params> {
    let file: ConfigFile =
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
    let d = Params::default();
    let floor = match file.base_case_floor {
        None => d.floor,
        Some(FloorSpec::Fixed(f)) if f >= 2 => FloorPolicy::Fixed(f),
        Some(FloorSpec::Fixed(f)) => {
            return Err(HarnessError::Config(format!("base_case_floor must be ≥ 2, got {f}")))
        }
        Some(FloorSpec::Named(s)) if s == "default" => FloorPolicy::Default,
        Some(FloorSpec::Named(s)) => {
            return Err(HarnessError::Config(format!("unknown base_case_floor {s:?}")))
        }
    };
    let mut params = Params {
        c_q: positive("c_q", file.c_q, d.c_q)?,
        c_k: positive("c_k", file.c_k, d.c_k)?,
        c_inw: positive("c_inw", file.c_inw, d.c_inw)?,
        floor,
        generator_overrides: Default::default(),
    };
    for src in file.generator_sets {
        let text = match src {
            GeneratorSource::Path(p) => read_file(&base_dir.join(p))?,
            GeneratorSource::Inline(v) => v.to_string(),
        };
        let set = GeneratorSet::from_json(&text)?;
        if params.generator_overrides.contains_key(&set.dim()) {
            return Err(HarnessError::Config(format!(
                "two generator sets for dimension {}",
                set.dim()
            )));
        }
        params = params.with_override(set);
    }
    Ok(params)
}

pub fn load_config(path: &Path) -> Result<Params> {
    let text = read_file(path)?;
    parse_config(&text, path.parent().unwrap_or(Path::new(".")))
}
