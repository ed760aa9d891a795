//! Run configuration read from TOML.

use std::f64::consts::PI;

use bardina::attractor::LpExponent;
use bardina::dynamics::{cfl_cap, max_speed};
use bardina::stationary::StationaryOptions;
use bardina::{generate, FieldRecipe, GridSpec, PhysParams};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_sample_every")]
    pub sample_every: usize,
    /// largest accepted normalized energy-equality residual
    #[serde(default = "default_energy_tol")]
    pub energy_tol: f64,
}

fn default_sample_every() -> usize {
    1
}

fn default_energy_tol() -> f64 {
    1e-6
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 1.0,
            sample_every: default_sample_every(),
            energy_tol: default_energy_tol(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationarySection {
    pub tol: f64,
    pub relaxation: f64,
    pub max_iter: usize,
}

impl Default for StationarySection {
    fn default() -> Self {
        let o = StationaryOptions::default();
        Self {
            tol: o.tol,
            relaxation: o.relaxation,
            max_iter: o.max_iter,
        }
    }
}

impl From<StationarySection> for StationaryOptions {
    fn from(s: StationarySection) -> Self {
        Self {
            tol: s.tol,
            relaxation: s.relaxation,
            max_iter: s.max_iter,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LyapunovSection {
    pub m: usize,
    pub frame_seed: u64,
}

impl Default for LyapunovSection {
    fn default() -> Self {
        Self { m: 2, frame_seed: 1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapSection {
    pub initial_b: FieldRecipe,
    /// second force; the primary force when absent
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub force_b: Option<FieldRecipe>,
}

impl Default for GapSection {
    fn default() -> Self {
        Self {
            initial_b: FieldRecipe::random_band(0.5, 2, 1, 2),
            force_b: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayMode {
    ZeroForce,
    Steady,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecaySection {
    pub mode: DecayMode,
    pub p_list: Vec<LpExponent>,
}

impl Default for DecaySection {
    fn default() -> Self {
        Self {
            mode: DecayMode::ZeroForce,
            p_list: vec![LpExponent::Finite(2), LpExponent::Finite(4), LpExponent::Infinity],
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundSection {
    /// `|f|_{H1_alpha}`; taken from the configured force when absent
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_norm: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub params: PhysParams<f64>,
    pub initial: FieldRecipe,
    pub force: FieldRecipe,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub stationary: StationarySection,
    #[serde(default)]
    pub lyapunov: LyapunovSection,
    #[serde(default)]
    pub gap: GapSection,
    #[serde(default)]
    pub decay: DecaySection,
    #[serde(default)]
    pub bound: BoundSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid: GridSpec {
                n: 16,
                box_len: 2.0 * PI,
                dealias_fraction: bardina::grid::DEFAULT_DEALIAS_FRACTION,
            },
            params: PhysParams {
                alpha: 1.0,
                beta: 1.0,
                nu: 0.5,
                eta_c: 1.0,
            },
            initial: FieldRecipe::random_band(1.0, 1, 1, 2),
            force: FieldRecipe::random_band(0.2, 7, 1, 2),
            run: RunSection::default(),
            stationary: StationarySection::default(),
            lyapunov: LyapunovSection::default(),
            gap: GapSection::default(),
            decay: DecaySection::default(),
            bound: BoundSection::default(),
        }
    }
}

/// Field-level validation failure.
#[derive(Debug, thiserror::Error)]
#[error("{field}: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

fn bad(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        field: field.to_string(),
        message: message.into(),
    }
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(bad(field, format!("must be finite and > 0, got {v}")))
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| bad("config", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Effective configuration with every default spelled out.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.grid.validate().map_err(|e| bad("grid", e.to_string()))?;
        self.params.validate().map_err(|e| bad("params", e.to_string()))?;
        for (name, r) in [
            ("initial", &self.initial),
            ("force", &self.force),
            ("gap.initial_b", &self.gap.initial_b),
        ]
        .into_iter()
        .chain(self.gap.force_b.as_ref().map(|f| ("gap.force_b", f)))
        {
            r.validate(&self.grid).map_err(|e| bad(name, e.to_string()))?;
        }
        positive("run.dt", self.run.dt)?;
        if !(self.run.t_end.is_finite() && self.run.t_end >= 0.0) {
            return Err(bad("run.t_end", format!("must be >= 0, got {}", self.run.t_end)));
        }
        if self.run.sample_every == 0 {
            return Err(bad("run.sample_every", "must be >= 1"));
        }
        positive("run.energy_tol", self.run.energy_tol)?;
        positive("stationary.tol", self.stationary.tol)?;
        let w = self.stationary.relaxation;
        if !(w > 0.0 && w <= 1.0) {
            return Err(bad("stationary.relaxation", format!("must lie in (0, 1], got {w}")));
        }
        if self.lyapunov.m == 0 {
            return Err(bad("lyapunov.m", "must be >= 1"));
        }
        if self.decay.p_list.is_empty() {
            return Err(bad("decay.p_list", "must not be empty"));
        }
        if let Some(f) = self.bound.f_norm {
            if !(f.is_finite() && f >= 0.0) {
                return Err(bad("bound.f_norm", format!("must be >= 0, got {f}")));
            }
        }
        Ok(())
    }

    /// Rejects a time step above the advective cap of the initial field.
    pub fn check_cfl(&self) -> Result<(), ConfigError> {
        let u0 = generate::<f64>(&self.initial, self.grid, self.params.alpha)
            .map_err(|e| bad("initial", e.to_string()))?;
        let cap = cfl_cap(&self.grid, max_speed(&u0));
        if self.run.dt > cap {
            return Err(bad(
                "run.dt",
                format!("{} exceeds the stability cap {cap:e} of the initial field", self.run.dt),
            ));
        }
        Ok(())
    }
}
