//! Run configuration: TOML schema, parse-time validation, and conversion
//! into solver types.
//!
//! The schema is strict: unknown keys are rejected wherever they appear, and
//! every numeric constraint of the underlying constructors is re-checked at
//! parse time so a bad file fails before any output directory is touched.
//! `grid.eps`, `grid.kappa_bc`, and `grid.cfl` may be omitted; resolution
//! fills them with the grid-tied defaults and the resolved values are what
//! run metadata records, so a rerun from metadata sees identical numbers.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use satflux_core::dual::{self, DualState, ModelParams, SchemeConfig};
use satflux_core::flux::FluxModel;

use crate::fail::{io_fail, Failure};
use crate::rundir;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub flux: FluxTable,
    pub model: ModelTable,
    pub grid: GridTable,
    pub time: TimeTable,
    pub initial: InitialTable,
    #[serde(default)]
    pub output: OutputTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxTable {
    pub family: String,
    pub nu: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelTable {
    pub a: f64,
    pub m: f64,
    #[serde(rename = "M")]
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridTable {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_bc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cfl: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeTable {
    pub t_end: f64,
    pub snapshot_dt: f64,
}

/// Initial datum. `kind` selects the family and decides which of the
/// parameter keys must be present; the unused ones must be absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialTable {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_edge: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputTable {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<String>,
    #[serde(default)]
    pub emit_svg: bool,
}

/// Parse a config file without resolving defaults; returns the config and
/// its directory (for relative-path resolution). TOML by default; a `.json`
/// file may be either a bare `RunConfig` or a run metadata document, whose
/// embedded `config` is taken, so `simulate --config <run>/metadata.json`
/// replays a run.
pub fn load_raw(path: &Path) -> Result<(RunConfig, std::path::PathBuf), Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| io_fail("cannot read config", path, e))?;
    let cfg: RunConfig = if path.extension().is_some_and(|x| x == "json") {
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        let inner = value.get("config").cloned().unwrap_or(value);
        serde_json::from_value(inner)
            .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?
    } else {
        toml::from_str(&text)
            .map_err(|e| Failure::Config(format!("{}:\n{e}", path.display())))?
    };
    let dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    Ok((cfg, dir))
}

/// Parse and resolve in one step.
pub fn load(path: &Path) -> Result<RunConfig, Failure> {
    let (cfg, dir) = load_raw(path)?;
    cfg.resolved(&dir)
}

impl RunConfig {
    /// Fill omitted grid knobs with the grid-tied defaults, absolutize a
    /// file-kind initial path against `config_dir`, and run every
    /// constructor-level validation once. The result round-trips: feeding
    /// it back through `scheme()`/`params()` cannot fail.
    pub fn resolved(mut self, config_dir: &Path) -> Result<Self, Failure> {
        let defaults = SchemeConfig::for_grid(self.grid.n.max(1), self.model.mass);
        self.grid.eps.get_or_insert(defaults.eps);
        self.grid.kappa_bc.get_or_insert(defaults.kappa_bc);
        self.grid.cfl.get_or_insert(defaults.cfl);

        self.validate_initial_keys()?;
        if let Some(p) = &self.initial.path {
            let pb = Path::new(p);
            if pb.is_relative() {
                self.initial.path =
                    Some(config_dir.join(pb).to_string_lossy().into_owned());
            }
        }

        self.params()?;
        self.scheme().validate().map_err(Failure::from)?;
        Ok(self)
    }

    pub fn params(&self) -> Result<ModelParams, Failure> {
        let flux = match self.flux.family.as_str() {
            "classical" => FluxModel::classical(self.flux.nu, self.flux.c)?,
            other => {
                return Err(Failure::Config(format!(
                    "unsupported flux family `{other}` (config files support: classical)"
                )))
            }
        };
        Ok(ModelParams::new(self.model.a, self.model.m, self.model.mass, flux)?)
    }

    /// Scheme knobs; call on a resolved config (options filled).
    pub fn scheme(&self) -> SchemeConfig {
        let mut s = SchemeConfig::for_grid(self.grid.n.max(1), self.model.mass);
        s.n = self.grid.n;
        if let Some(eps) = self.grid.eps {
            s.eps = eps;
        }
        if let Some(k) = self.grid.kappa_bc {
            s.kappa_bc = k;
        }
        if let Some(cfl) = self.grid.cfl {
            s.cfl = cfl;
        }
        s.t_end = self.time.t_end;
        s.snapshot_dt = self.time.snapshot_dt;
        s
    }

    /// Build the initial cell averages for this config.
    pub fn initial_state(&self, params: ModelParams) -> Result<DualState, Failure> {
        let n = self.grid.n;
        match self.initial.kind.as_str() {
            "constant" => {
                let value = self.initial.value.unwrap();
                Ok(DualState::from_sampler(params, n, |_| value)?)
            }
            "ramp" => {
                let (base, slope) = (self.initial.base.unwrap(), self.initial.slope.unwrap());
                Ok(DualState::from_sampler(params, n, |eta| base + slope * eta)?)
            }
            "jump_wave" => {
                let v_edge = self.initial.v_edge.unwrap();
                Ok(dual::steady_jump_profile(&params, v_edge, n)?)
            }
            "file" => {
                let path = Path::new(self.initial.path.as_deref().unwrap());
                let v = rundir::read_state_csv(path)?;
                if v.len() != n {
                    return Err(Failure::Config(format!(
                        "initial file {} has {} rows but grid.N = {n}",
                        path.display(),
                        v.len()
                    )));
                }
                for (i, &vi) in v.iter().enumerate() {
                    if !(vi > 0.0) || !vi.is_finite() {
                        return Err(Failure::Config(format!(
                            "initial file {}: v must be positive and finite, row {} has {vi}",
                            path.display(),
                            i + 1
                        )));
                    }
                }
                Ok(DualState { t: 0.0, params, v })
            }
            other => Err(Failure::Config(format!(
                "unknown initial kind `{other}` (supported: constant, ramp, jump_wave, file)"
            ))),
        }
    }

    /// Per-kind parameter keys: required ones present, unused ones absent.
    fn validate_initial_keys(&self) -> Result<(), Failure> {
        let t = &self.initial;
        let checks: &[(&str, bool)] = &[
            ("value", t.value.is_some()),
            ("base", t.base.is_some()),
            ("slope", t.slope.is_some()),
            ("v_edge", t.v_edge.is_some()),
            ("path", t.path.is_some()),
        ];
        let wanted: &[&str] = match t.kind.as_str() {
            "constant" => &["value"],
            "ramp" => &["base", "slope"],
            "jump_wave" => &["v_edge"],
            "file" => &["path"],
            other => {
                return Err(Failure::Config(format!(
                    "unknown initial kind `{other}` (supported: constant, ramp, jump_wave, file)"
                )))
            }
        };
        for &(key, present) in checks {
            let needed = wanted.contains(&key);
            if needed && !present {
                return Err(Failure::Config(format!(
                    "initial kind `{}` requires key `{key}`",
                    t.kind
                )));
            }
            if !needed && present {
                return Err(Failure::Config(format!(
                    "initial kind `{}` does not use key `{key}`",
                    t.kind
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
        [flux]
        family = "classical"
        nu = 1.0
        c = 1.0

        [model]
        a = 1.0
        m = 0.0
        M = 1.0

        [grid]
        N = 64

        [time]
        t_end = 0.1
        snapshot_dt = 0.02

        [initial]
        kind = "constant"
        value = 1.0
    "#;

    #[test]
    fn parses_and_fills_defaults() {
        let cfg: RunConfig = toml::from_str(BASE).unwrap();
        let cfg = cfg.resolved(Path::new(".")).unwrap();
        assert_eq!(cfg.grid.eps, Some(1.0 / 64.0));
        assert_eq!(cfg.grid.kappa_bc, Some(1.5));
        let s = cfg.scheme();
        assert_eq!(s.n, 64);
        assert_eq!(s.t_end, 0.1);
    }

    #[test]
    fn rejects_unknown_key() {
        let text = BASE.replace("value = 1.0", "value = 1.0\nextra = 2");
        let err = toml::from_str::<RunConfig>(&text).unwrap_err().to_string();
        assert!(err.contains("extra"), "diagnostic should name the key: {err}");
    }

    #[test]
    fn rejects_mismatched_initial_keys() {
        let text = BASE.replace("value = 1.0", "value = 1.0\nslope = 2.0");
        let cfg: RunConfig = toml::from_str(&text).unwrap();
        assert!(cfg.resolved(Path::new(".")).is_err());
    }

    #[test]
    fn rejects_bad_family() {
        let text = BASE.replace("\"classical\"", "\"quadratic\"");
        let cfg: RunConfig = toml::from_str(&text).unwrap();
        assert!(cfg.resolved(Path::new(".")).is_err());
    }

    #[test]
    fn rejects_invalid_model_numbers() {
        let text = BASE.replace("a = 1.0", "a = -1.0");
        let cfg: RunConfig = toml::from_str(&text).unwrap();
        assert!(cfg.resolved(Path::new(".")).is_err());
    }
}
