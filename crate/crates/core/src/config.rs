//! Run configuration: defaults, validation and the flat dotted-key file
//! format.
//!
//! ```toml
//! grid.nr = 64
//! grid.ntheta = 64
//! time.dt = 1e-3
//! time.t_end = 2.0
//! initial.a = 0.1
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Grid, RadiusFunction, ReferenceDomain};

/// Reference domain parameters. `cos[m-1]`, `sin[m-1]` are the coefficients
/// of the radius function at harmonic `m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainConfig {
    pub radius: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
    pub cutoff_inner: f64,
    pub collar: f64,
}

impl Default for DomainConfig {
    fn default() -> Self {
        DomainConfig {
            radius: 1.0,
            cos: Vec::new(),
            sin: Vec::new(),
            cutoff_inner: 0.3,
            collar: 0.2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub nr: usize,
    pub ntheta: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { nr: 64, ntheta: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_end: f64,
}

impl Default for TimeConfig {
    fn default() -> Self {
        TimeConfig { dt: 1e-3, t_end: 2.0 }
    }
}

/// `q₀ = a(1−s²) + b(1−s²)² + δ s^k (1−s²)³ cos kθ` with `s = |x|/R(θ)`; `b` is
/// derived from the compatibility condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialConfig {
    pub a: f64,
    pub delta: f64,
    pub k: u32,
}

impl Default for InitialConfig {
    fn default() -> Self {
        InitialConfig {
            a: 0.1,
            delta: 0.02,
            k: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EtaConfig {
    /// `η = fraction · λ`.
    pub fraction: f64,
}

impl Default for EtaConfig {
    fn default() -> Self {
        EtaConfig { fraction: 0.1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstantsConfig {
    /// `T_K = c_bar · ln K`.
    pub c_bar: f64,
    /// Rayleigh–Taylor constant.
    pub c_star: f64,
    /// Floor for the χ lower-bound audit.
    pub chi_floor: f64,
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        ConstantsConfig {
            c_bar: 1.0,
            c_star: 1.0,
            chi_floor: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub snapshot_stride: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { snapshot_stride: 100 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemeConfig {
    /// Zero the top third of the angular modes of `h` after each update.
    pub filter: bool,
    /// Keep `h = 0` and the identity gauge; only the heat equation evolves.
    pub frozen_gauge: bool,
    /// Absolute GMRES tolerance of the heat solve.
    pub tolerance: f64,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig {
            filter: true,
            frozen_gauge: false,
            tolerance: 1e-12,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub grid: GridConfig,
    pub time: TimeConfig,
    pub initial: InitialConfig,
    pub eta: EtaConfig,
    pub constants: ConstantsConfig,
    pub output: OutputConfig,
    pub scheme: SchemeConfig,
    pub domain: DomainConfig,
}

impl SimConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| {
            let key = e.span().map(|s| text[s].to_string()).unwrap_or_default();
            let key = key.split('=').next().unwrap_or("").trim().to_string();
            Error::config(key, e.message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, key: &str, reason: &str| if ok { Ok(()) } else { Err(Error::config(key, reason)) };
        check(self.grid.nr >= 8, "grid.nr", "must be at least 8")?;
        check(
            self.grid.ntheta >= 8 && self.grid.ntheta.is_multiple_of(2),
            "grid.ntheta",
            "must be even and at least 8",
        )?;
        check(
            self.time.dt > 0.0 && self.time.dt.is_finite(),
            "time.dt",
            "must be positive",
        )?;
        check(
            self.time.t_end >= 0.0 && self.time.t_end.is_finite(),
            "time.t_end",
            "must be nonnegative",
        )?;
        check(
            self.initial.a > 0.0 && self.initial.a < 1.0,
            "initial.a",
            "must lie in (0, 1)",
        )?;
        check(
            self.initial.delta >= 0.0 && self.initial.delta.is_finite(),
            "initial.delta",
            "must be nonnegative",
        )?;
        check(
            self.eta.fraction > 0.0 && self.eta.fraction < 1.0,
            "eta.fraction",
            "must lie in (0, 1) so that 0 < η < λ",
        )?;
        check(self.constants.c_bar > 0.0, "constants.c_bar", "must be positive")?;
        check(self.constants.c_star >= 0.0, "constants.c_star", "must be nonnegative")?;
        check(
            self.constants.chi_floor >= 0.0,
            "constants.chi_floor",
            "must be nonnegative",
        )?;
        check(
            self.output.snapshot_stride >= 1,
            "output.snapshot_stride",
            "must be at least 1",
        )?;
        check(self.scheme.tolerance > 0.0, "scheme.tolerance", "must be positive")?;
        self.reference_domain()
            .map_err(|e| Error::config("domain", e.to_string()))?;
        Ok(())
    }

    pub fn reference_domain(&self) -> Result<ReferenceDomain> {
        let d = &self.domain;
        let radius = RadiusFunction {
            mean: d.radius,
            cos: d.cos.clone(),
            sin: d.sin.clone(),
        };
        ReferenceDomain::new(radius, d.cutoff_inner, d.collar)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.reference_domain()?, self.grid.nr, self.grid.ntheta)
    }

    /// Number of steps needed to reach `t_end`.
    pub fn steps(&self) -> usize {
        (self.time.t_end / self.time.dt - 1e-9).ceil().max(0.0) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = SimConfig::from_toml_str("").unwrap();
        assert_eq!(cfg, SimConfig::default());
        assert_eq!((cfg.grid.nr, cfg.grid.ntheta), (64, 64));
        assert_eq!(cfg.time.dt, 1e-3);
        assert_eq!(cfg.time.t_end, 2.0);
        assert_eq!(cfg.steps(), 2000);
    }

    #[test]
    fn dotted_keys_override() {
        let cfg = SimConfig::from_toml_str("grid.nr = 16\ninitial.delta = 0.0\noutput.snapshot_stride = 7\n").unwrap();
        assert_eq!(cfg.grid.nr, 16);
        assert_eq!(cfg.initial.delta, 0.0);
        assert_eq!(cfg.output.snapshot_stride, 7);
    }

    #[test]
    fn negative_step_names_the_key() {
        let err = SimConfig::from_toml_str("time.dt = -1.0").unwrap_err();
        match err {
            Error::Config { key, .. } => assert_eq!(key, "time.dt"),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = SimConfig::from_toml_str("grid.nz = 3").unwrap_err();
        assert!(err.to_string().contains("nz"), "{err}");
        let err = SimConfig::from_toml_str("colour = 3").unwrap_err();
        assert!(err.to_string().contains("colour"), "{err}");
    }

    #[test]
    fn type_mismatch_is_rejected() {
        let err = SimConfig::from_toml_str("grid.nr = \"many\"").unwrap_err();
        assert!(matches!(err, Error::Config { .. }), "{err}");
    }

    #[test]
    fn odd_harmonic_domain_is_rejected() {
        let err = SimConfig::from_toml_str("domain.cos = [0.1]").unwrap_err();
        match err {
            Error::Config { key, .. } => assert_eq!(key, "domain"),
            other => panic!("{other}"),
        }
    }
}
