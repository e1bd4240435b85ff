//! JSON run configurations. Unknown keys are rejected; physical parameters
//! are validated by the constructors they feed.

use serde::{Deserialize, Serialize};

use crate::analytic::PhaseMethod;
use crate::composite::{Compensation, DesignOptions, EvalMode, DEFAULT_LEAKAGE_BUDGET};
use crate::gate_error::log_grid;
use crate::{Error, Result};

fn check_command(found: &Option<String>, want: &str) -> Result<()> {
    match found {
        Some(c) if c != want => Err(Error::Config(format!(
            "config is for command `{c}`, not `{want}`"
        ))),
        _ => Ok(()),
    }
}

fn nonempty_g(g: &[f64]) -> Result<()> {
    if g.is_empty() {
        return Err(Error::Config("`g` must list at least one value".into()));
    }
    match g.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        Some(v) => Err(Error::Config(format!("every g must be positive and finite, got {v}"))),
        None => Ok(()),
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("`{name}` must be positive and finite, got {v}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CrossingConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    pub g: Vec<f64>,
    /// Window in `(t - t_c) eta^(1/2)`; it must contain the crossing.
    pub t_range: [f64; 2],
    pub rate: f64,
    pub samples: usize,
    pub tol: f64,
    pub suppression_factor: f64,
}

impl Default for CrossingConfig {
    fn default() -> Self {
        CrossingConfig {
            command: None,
            g: vec![1.0, 0.47, 0.33, 0.21],
            t_range: [-10.0, 10.0],
            rate: 1.0,
            samples: 401,
            tol: 1e-9,
            suppression_factor: 2.0,
        }
    }
}

impl CrossingConfig {
    pub fn validate(&self) -> Result<()> {
        check_command(&self.command, "crossing")?;
        nonempty_g(&self.g)?;
        positive("rate", self.rate)?;
        positive("suppression_factor", self.suppression_factor)?;
        let [a, b] = self.t_range;
        if !(a < 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::Config(format!("`t_range` must straddle 0, got [{a}, {b}]")));
        }
        if self.samples < 2 {
            return Err(Error::Config("`samples` must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnglesConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    pub g_range: [f64; 2],
    pub points: usize,
}

impl Default for AnglesConfig {
    fn default() -> Self {
        AnglesConfig {
            command: None,
            g_range: [0.001, 2.0],
            points: 2000,
        }
    }
}

impl AnglesConfig {
    pub fn validate(&self) -> Result<()> {
        check_command(&self.command, "angles")?;
        let [a, b] = self.g_range;
        positive("g_range[0]", a)?;
        if !(b > a && b.is_finite()) {
            return Err(Error::Config(format!("`g_range` must be increasing, got [{a}, {b}]")));
        }
        if self.points < 2 {
            return Err(Error::Config("`points` must be at least 2".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let [a, b] = self.g_range;
        let n = self.points;
        (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
    }
}

/// Offsets in units of the working coupling, `eps / gamma`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum EpsGrid {
    Log { min: f64, max: f64, points: usize },
    Values(Vec<f64>),
}

impl Default for EpsGrid {
    fn default() -> Self {
        EpsGrid::Log {
            min: 1e-3,
            max: 1.0,
            points: 60,
        }
    }
}

impl EpsGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            EpsGrid::Log { min, max, points } => {
                if !(*min > 0.0 && max >= min && max.is_finite() && *points >= 1) {
                    return Err(Error::Config(format!(
                        "log grid needs 0 < min <= max and points >= 1, got {min}, {max}, {points}"
                    )));
                }
                Ok(log_grid(*min, *max, *points))
            }
            EpsGrid::Values(v) => {
                if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Config("`eps_over_gamma` values must be finite and non-empty".into()));
                }
                Ok(v.clone())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    pub g: Vec<f64>,
    pub g_pi: f64,
    pub delta_target: f64,
    pub rate: f64,
    pub eps_over_gamma: EpsGrid,
    pub mode: EvalMode,
    pub compensation: Compensation,
    pub phase_method: PhaseMethod,
    pub leakage_budget: f64,
    pub tol: f64,
    /// Written into sidecars for reference; recomputed, never read back.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub designs: Option<serde_json::Value>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            command: None,
            g: vec![2.0, 1.2, 1.0, 0.3],
            g_pi: 3.0,
            delta_target: 10.0,
            rate: 1.0,
            eps_over_gamma: EpsGrid::default(),
            mode: EvalMode::Exact,
            compensation: Compensation::Full,
            phase_method: PhaseMethod::Integral,
            leakage_budget: DEFAULT_LEAKAGE_BUDGET,
            tol: 1e-9,
            designs: None,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        check_command(&self.command, "sweep")?;
        nonempty_g(&self.g)?;
        positive("g_pi", self.g_pi)?;
        positive("delta_target", self.delta_target)?;
        positive("rate", self.rate)?;
        positive("leakage_budget", self.leakage_budget)?;
        self.eps_over_gamma.values()?;
        Ok(())
    }

    pub fn design_options(&self) -> DesignOptions {
        DesignOptions {
            g_pi: self.g_pi,
            leakage_budget: self.leakage_budget,
            compensation: self.compensation,
            phase_method: self.phase_method,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    pub dual_construction: f64,
    pub analytic_vs_numeric: f64,
    /// Minimum factor by which the analytic/numeric gap shrinks when `|Delta|` doubles.
    pub min_shrink: f64,
    pub lz_probability: f64,
    pub metric_equivalence: f64,
    pub gamma_identity: f64,
    pub composite_sign: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            dual_construction: 1e-12,
            analytic_vs_numeric: 1e-2,
            min_shrink: 5.0,
            lz_probability: 1e-3,
            metric_equivalence: 1e-10,
            gamma_identity: 1e-10,
            composite_sign: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    pub seed: u64,
    pub random_pulses: usize,
    pub tol: f64,
    pub thresholds: Thresholds,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            command: None,
            seed: 20070101,
            random_pulses: 1000,
            tol: 1e-9,
            thresholds: Thresholds::default(),
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        check_command(&self.command, "verify")?;
        if self.random_pulses == 0 {
            return Err(Error::Config("`random_pulses` must be at least 1".into()));
        }
        Ok(())
    }
}

/// Parses a JSON document; empty input means all defaults.
pub fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    let text = if text.trim().is_empty() { "{}" } else { text };
    serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
}
