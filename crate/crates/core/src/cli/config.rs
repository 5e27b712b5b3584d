//! INI-style simulation config.
//!
//! ```text
//! [run]
//! seed = 42
//! reps = 200
//! alpha = 0.2
//! procedures = SDA, SDA+, R-SDA, BH, SS
//!
//! [grid]
//! structure = AR
//! rho = 0.3, 0.8
//! dist = normal
//! n = 90
//! p = 500
//! pi1 = 0.1
//! mu0 = 0.2
//! ```
//!
//! Every grid key takes a comma-separated list and the grid is their
//! Cartesian product. Unknown sections, unknown keys and repeated keys are
//! errors.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::filter::T1Mode;
use crate::sim::{Cell, ErrorLaw, PrecisionMode, Procedure, SimulationConfig, Structure};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.line, &self.field) {
            (Some(l), Some(k)) => write!(f, "line {l}, field `{k}`: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            (None, Some(k)) => write!(f, "field `{k}`: {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

const RUN_KEYS: [&str; 8] = ["seed", "reps", "alpha", "procedures", "rsda_b", "precision", "t1", "workers"];
const GRID_KEYS: [&str; 7] = ["structure", "rho", "dist", "n", "p", "pi1", "mu0"];

#[derive(Debug, Clone)]
struct Entry {
    line: usize,
    value: String,
}

impl Entry {
    fn fail(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError { line: Some(self.line), field: Some(key.to_string()), message: message.into() }
    }

    fn scalar<T: FromStr>(&self, key: &str, what: &str) -> Result<T, ConfigError> {
        self.value.parse().map_err(|_| self.fail(key, format!("expected {what}, got `{}`", self.value)))
    }

    fn list<T>(&self, key: &str, mut parse: impl FnMut(&str) -> Option<T>) -> Result<Vec<T>, ConfigError> {
        let items: Vec<&str> = self.value.split(',').map(str::trim).collect();
        if items.iter().any(|s| s.is_empty()) {
            return Err(self.fail(key, "empty list element"));
        }
        items.into_iter().map(|s| parse(s).ok_or_else(|| self.fail(key, format!("invalid value `{s}`")))).collect()
    }
}

/// Parsed config; `seed` may be left for the command line to supply.
#[derive(Debug, Clone)]
pub struct ParsedConfig {
    pub seed: Option<u64>,
    pub simulation: SimulationConfig,
}

pub fn parse_config(text: &str) -> Result<ParsedConfig, ConfigError> {
    let mut sections: BTreeMap<&'static str, BTreeMap<&'static str, Entry>> = BTreeMap::new();
    let mut current: Option<&'static str> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split(['#', ';']).next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let here = |message: String| ConfigError { line: Some(line), field: None, message };
        if let Some(rest) = content.strip_prefix('[') {
            let name =
                rest.strip_suffix(']').ok_or_else(|| here(format!("malformed section header `{content}`")))?.trim();
            let name = match name {
                "run" => "run",
                "grid" => "grid",
                other => return Err(here(format!("unknown section `[{other}]`"))),
            };
            if sections.contains_key(name) {
                return Err(here(format!("section `[{name}]` appears twice")));
            }
            sections.insert(name, BTreeMap::new());
            current = Some(name);
            continue;
        }
        let (key, value) =
            content.split_once('=').ok_or_else(|| here(format!("expected `key = value`, got `{content}`")))?;
        let key = key.trim();
        let section = current.ok_or_else(|| here(format!("`{key}` appears before any section header")))?;
        let allowed: &[&'static str] = if section == "run" { &RUN_KEYS } else { &GRID_KEYS };
        let Some(&key) = allowed.iter().find(|k| **k == key) else {
            return Err(ConfigError {
                line: Some(line),
                field: Some(key.to_string()),
                message: format!("unknown key in [{section}]; expected one of {}", allowed.join(", ")),
            });
        };
        let entries = sections.get_mut(section).expect("section registered");
        if let Some(prev) = entries.get(key) {
            return Err(ConfigError {
                line: Some(line),
                field: Some(key.to_string()),
                message: format!("repeated key (first set on line {})", prev.line),
            });
        }
        let value = value.trim();
        if value.is_empty() {
            return Err(ConfigError {
                line: Some(line),
                field: Some(key.to_string()),
                message: "missing value".into(),
            });
        }
        entries.insert(key, Entry { line, value: value.to_string() });
    }

    let run = sections.remove("run").unwrap_or_default();
    let grid = sections.remove("grid").ok_or_else(|| ConfigError {
        line: None,
        field: None,
        message: "missing [grid] section".into(),
    })?;
    let cells = build_grid(&grid)?;
    let mut simulation = SimulationConfig::new(0, cells);
    let mut seed = None;

    for (key, e) in &run {
        match *key {
            "seed" => seed = Some(e.scalar(key, "a non-negative integer")?),
            "reps" => {
                simulation.reps = e.scalar(key, "a positive integer")?;
                if simulation.reps == 0 {
                    return Err(e.fail(key, "must be at least 1"));
                }
            }
            "alpha" => {
                let a: f64 = e.scalar(key, "a number")?;
                if !(a > 0.0 && a < 1.0) {
                    return Err(e.fail(key, "must lie strictly between 0 and 1"));
                }
                simulation.alpha = a;
            }
            "procedures" => {
                let mut procs = e.list(key, Procedure::parse)?;
                let before = procs.len();
                procs.sort();
                procs.dedup();
                if procs.len() != before {
                    return Err(e.fail(key, "procedure listed twice"));
                }
                simulation.procedures = procs;
            }
            "rsda_b" => {
                simulation.rsda_runs = e.scalar(key, "a positive integer")?;
                if simulation.rsda_runs == 0 {
                    return Err(e.fail(key, "must be at least 1"));
                }
            }
            "precision" => {
                simulation.precision = parse_precision_mode(&e.value)
                    .ok_or_else(|| e.fail(key, "expected `known`, `identity`, `glasso` or `glasso:<penalty>`"))?
            }
            "t1" => simulation.t1_mode = parse_t1(&e.value).ok_or_else(|| e.fail(key, "expected `scaled` or `raw`"))?,
            "workers" => {
                let w: usize = e.scalar(key, "a positive integer")?;
                if w == 0 {
                    return Err(e.fail(key, "must be at least 1"));
                }
                simulation.workers = Some(w);
            }
            _ => unreachable!("keys are checked while reading"),
        }
    }
    Ok(ParsedConfig { seed, simulation })
}

pub(crate) fn parse_t1(s: &str) -> Option<T1Mode> {
    match s.trim().to_ascii_lowercase().as_str() {
        "scaled" => Some(T1Mode::Scaled),
        "raw" => Some(T1Mode::Raw),
        _ => None,
    }
}

fn parse_precision_mode(s: &str) -> Option<PrecisionMode> {
    let s = s.trim().to_ascii_lowercase();
    match s.as_str() {
        "known" => Some(PrecisionMode::Known),
        "identity" => Some(PrecisionMode::Identity),
        "glasso" => Some(PrecisionMode::Glasso(None)),
        _ => {
            let penalty: f64 = s.strip_prefix("glasso:")?.trim().parse().ok()?;
            (penalty >= 0.0 && penalty.is_finite()).then_some(PrecisionMode::Glasso(Some(penalty)))
        }
    }
}

fn build_grid(grid: &BTreeMap<&'static str, Entry>) -> Result<Vec<Cell>, ConfigError> {
    let get = |key: &str| {
        grid.get(key).ok_or_else(|| ConfigError {
            line: None,
            field: Some(key.to_string()),
            message: "required in [grid]".into(),
        })
    };
    let number = |s: &str| s.parse::<f64>().ok().filter(|v| v.is_finite());
    let structures = get("structure")?.list("structure", Structure::parse)?;
    let rho_entry = get("rho")?;
    let rhos = rho_entry.list("rho", number)?;
    let dists = get("dist")?.list("dist", ErrorLaw::parse)?;
    let ns = get("n")?.list("n", |s| s.parse::<usize>().ok().filter(|&n| n >= 3))?;
    let ps = get("p")?.list("p", |s| s.parse::<usize>().ok().filter(|&p| p >= 2))?;
    let pi1_entry = get("pi1")?;
    let pi1s = pi1_entry.list("pi1", |s| number(s).filter(|v| (0.0..1.0).contains(v)))?;
    let mu0s = get("mu0")?.list("mu0", |s| number(s).filter(|&v| v > 0.1))?;

    let mut cells = Vec::new();
    for &structure in &structures {
        for &rho in &rhos {
            for &p in &ps {
                let ok = match structure {
                    Structure::Ar => rho.abs() < 1.0,
                    Structure::CompoundSymmetry => rho > -1.0 / (p - 1) as f64 && rho < 1.0,
                    Structure::SparseFactor => true,
                };
                if !ok {
                    return Err(rho_entry.fail(
                        "rho",
                        format!("{rho} does not give a positive definite {} covariance at p = {p}", structure.label()),
                    ));
                }
            }
            for &dist in &dists {
                for &n in &ns {
                    for &p in &ps {
                        for &pi1 in &pi1s {
                            for &mu0 in &mu0s {
                                cells.push(Cell { structure, rho, dist, n, p, pi1, mu0 });
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[run]\nseed = 7\nreps = 1\n\n[grid]\nstructure = AR\nrho = 0.5\ndist = normal\nn = 30\np = 20\npi1 = 0.1\nmu0 = 0.3\n";

    #[test]
    fn minimal_config() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.seed, Some(7));
        assert_eq!(c.simulation.reps, 1);
        assert_eq!(c.simulation.cells.len(), 1);
        assert_eq!(c.simulation.procedures.len(), 5);
    }

    #[test]
    fn grid_is_cartesian_product() {
        let text = MINIMAL.replace("rho = 0.5", "rho = 0.3, 0.9").replace("dist = normal", "dist = normal, t3, exp2");
        let c = parse_config(&text).unwrap();
        assert_eq!(c.simulation.cells.len(), 6);
        assert_eq!(c.simulation.cells[3].rho, 0.9);
    }

    #[test]
    fn unknown_key_reports_line_and_field() {
        let text = MINIMAL.replace("reps = 1", "repz = 1");
        let err = parse_config(&text).unwrap_err();
        assert_eq!(err.line, Some(3));
        assert_eq!(err.field.as_deref(), Some("repz"));
    }

    #[test]
    fn malformed_inputs() {
        for bad in [
            MINIMAL.replace("[grid]", "[grdi]"),
            MINIMAL.replace("rho = 0.5", "rho = 1.2"),
            MINIMAL.replace("rho = 0.5", "rho = 0.5,"),
            MINIMAL.replace("n = 30", "n = 2"),
            MINIMAL.replace("mu0 = 0.3", "mu0 = 0.05"),
            MINIMAL.replace("pi1 = 0.1", "pi1 = abc"),
            MINIMAL.replace("seed = 7", "seed = -1"),
            MINIMAL.replace("seed = 7", "seed = 7\nseed = 8"),
            MINIMAL.replace("reps = 1", "reps = 1\nalpha = 1"),
            MINIMAL.replace("[run]\n", "reps = 1\n[run]\n"),
            MINIMAL.replace("dist = normal", "dist"),
            MINIMAL.replace("p = 20\n", ""),
        ] {
            assert!(parse_config(&bad).is_err(), "accepted:\n{bad}");
        }
    }

    #[test]
    fn precision_modes() {
        assert_eq!(parse_precision_mode("Glasso:0.25"), Some(PrecisionMode::Glasso(Some(0.25))));
        assert_eq!(parse_precision_mode("identity"), Some(PrecisionMode::Identity));
        assert_eq!(parse_precision_mode("glasso:-1"), None);
    }
}
