use serde::{Deserialize, Serialize};

use super::build::{
    build_asymmetric, build_noon, build_physical_two_mode, build_semiclassical, build_three_waveguide, build_two_mode,
    Scenario, ScenarioKind,
};
use super::run::{analytic_curves, compare, deviation_columns, simulate, ComparisonReport, Curves};
use crate::analytic::PairGenParams;
use crate::error::ScenarioError;
use crate::lindblad::{RunStats, SolverOptions};

pub const SCENARIO_SCHEMA: &str = "pairgen.scenario/1";

/// Largest number of samples a time grid may hold.
pub const MAX_TIME_POINTS: usize = 1_000_000;

fn default_k() -> f64 {
    5.0
}

/// Waveguide-level constants of the three-waveguide models.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalCoupling {
    pub g: f64,
    pub gamma3: f64,
    #[serde(default)]
    pub delta: f64,
}

/// Either `start`/`stop`/`points` (uniform, inclusive) or explicit `values`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl TimeGrid {
    pub fn uniform(start: f64, stop: f64, points: usize) -> Self {
        Self { start: Some(start), stop: Some(stop), points: Some(points), values: None }
    }

    pub fn explicit(values: Vec<f64>) -> Self {
        Self { values: Some(values), ..Self::default() }
    }

    pub fn samples(&self) -> Result<Vec<f64>, ScenarioError> {
        let bad = |m: String| Err(ScenarioError::InvalidConfig(format!("time: {m}")));
        let times = match (&self.values, self.stop, self.points) {
            (Some(v), None, None) if self.start.is_none() => v.clone(),
            (None, Some(stop), Some(points)) => {
                let start = self.start.unwrap_or(0.0);
                if points == 0 {
                    return bad("points must be >= 1".into());
                }
                if points == 1 {
                    vec![start]
                } else {
                    let h = (stop - start) / (points - 1) as f64;
                    (0..points).map(|i| if i + 1 == points { stop } else { start + h * i as f64 }).collect()
                }
            }
            _ => return bad("give either `values` or `stop` and `points` (with optional `start`)".into()),
        };
        if times.is_empty() {
            return bad("grid is empty".into());
        }
        if times.len() > MAX_TIME_POINTS {
            return bad(format!("{} points exceed the limit of {MAX_TIME_POINTS}", times.len()));
        }
        if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return bad("times must be finite and >= 0".into());
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return bad("times must be strictly increasing".into());
        }
        Ok(times)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    /// Integrate the master equation.
    #[default]
    Quantum,
    /// Evaluate the closed forms only; any pump strength is allowed.
    Analytic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rtol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema: String,
    pub kind: ScenarioKind,
    pub params: PairGenParams<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub physical: Option<PhysicalCoupling>,
    /// Per-mode truncation, in the kind's mode order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dims: Vec<usize>,
    pub time: TimeGrid,
    #[serde(default)]
    pub mode: RunMode,
    #[serde(default)]
    pub compare: bool,
    /// Tolerance multiplier on `lambda`.
    #[serde(default = "default_k")]
    pub k: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverConfig>,
}

impl ScenarioConfig {
    pub fn new(kind: ScenarioKind, params: PairGenParams<f64>, dims: Vec<usize>, time: TimeGrid) -> Self {
        Self {
            schema: SCENARIO_SCHEMA.to_string(),
            kind,
            params,
            physical: None,
            dims,
            time,
            mode: RunMode::Quantum,
            compare: false,
            k: default_k(),
            solver: None,
        }
    }

    /// Parses and validates; serde messages carry line and column.
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ScenarioError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |m: String| Err(ScenarioError::InvalidConfig(m));
        if self.schema != SCENARIO_SCHEMA {
            return bad(format!("schema `{}` unsupported, expected `{SCENARIO_SCHEMA}`", self.schema));
        }
        self.params.validate()?;
        self.time.samples()?;
        if !(self.k > 0.0) || !self.k.is_finite() {
            return bad(format!("k must be finite and > 0, got {}", self.k));
        }
        match (self.kind.needs_waveguide_coupling(), &self.physical) {
            (true, None) => return bad(format!("kind {:?} needs `physical` (g, gamma3)", self.kind)),
            (false, Some(_)) => return bad(format!("kind {:?} takes no `physical` block", self.kind)),
            (true, Some(c)) => {
                if !(c.g > 0.0) || !(c.gamma3 > 0.0) || !c.delta.is_finite() || c.delta.abs() >= c.g {
                    return bad(format!("physical: need g > |delta| and gamma3 > 0, got {c:?}"));
                }
                if self.kind == ScenarioKind::ThreeWaveguide && c.delta != 0.0 {
                    return bad("physical.delta must be 0 for three_waveguide; use asymmetric_three_waveguide".into());
                }
                let eff = 8.0 * c.g * c.g / c.gamma3;
                if (self.params.big_gamma - eff).abs() > 1e-9 * eff {
                    return bad(format!(
                        "params.Gamma = {} must equal 8 g^2 / gamma3 = {eff}",
                        self.params.big_gamma
                    ));
                }
            }
            (false, None) => {}
        }
        if !self.kind.is_noon() && self.params.v != 0.0 {
            return bad(format!("params.v applies to NOON kinds only, got {}", self.params.v));
        }
        match self.mode {
            RunMode::Quantum => {
                let want = match self.kind {
                    ScenarioKind::NoonCollective => 4,
                    k => k.mode_count(),
                };
                if self.dims.len() != want {
                    return bad(format!("kind {:?} needs {want} dims, got {:?}", self.kind, self.dims));
                }
            }
            RunMode::Analytic => {
                if self.compare {
                    return bad("compare needs mode = quantum".into());
                }
                if !(self.params.big_gamma > 0.0) {
                    return bad("closed forms need Gamma > 0".into());
                }
            }
        }
        if let Some(s) = &self.solver {
            for (name, x) in [("rtol", s.rtol), ("atol", s.atol)] {
                if let Some(x) = x {
                    if !(x > 0.0) || !x.is_finite() {
                        return bad(format!("solver.{name} must be > 0, got {x}"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn solver_options(&self) -> SolverOptions<f64> {
        let mut o = SolverOptions::default();
        if let Some(s) = &self.solver {
            o.rtol = s.rtol.unwrap_or(o.rtol);
            o.atol = s.atol.unwrap_or(o.atol);
            o.max_steps = s.max_steps.unwrap_or(o.max_steps);
        }
        o
    }

    /// Parameters for the closed forms: `Gamma` follows from `g` and `gamma3` when given.
    pub fn effective_params(&self) -> PairGenParams<f64> {
        let mut p = self.params;
        if let Some(c) = &self.physical {
            p.big_gamma = 8.0 * c.g * c.g / c.gamma3;
        }
        p
    }

    pub fn build(&self) -> Result<Scenario<f64>, ScenarioError> {
        let p = &self.params;
        let d = &self.dims;
        let dim_err = || ScenarioError::InvalidConfig(format!("kind {:?} got dims {:?}", self.kind, d));
        match self.kind {
            ScenarioKind::TwoModeCollective => build_two_mode(p, d.as_slice().try_into().map_err(|_| dim_err())?),
            ScenarioKind::TwoModePhysical => build_physical_two_mode(p, d.as_slice().try_into().map_err(|_| dim_err())?),
            ScenarioKind::SingleModeSemiclassical => build_semiclassical(p, *d.first().ok_or_else(dim_err)?),
            ScenarioKind::ThreeWaveguide | ScenarioKind::AsymmetricThreeWaveguide => {
                let c = self.physical.ok_or_else(dim_err)?;
                let dims = d.as_slice().try_into().map_err(|_| dim_err())?;
                if self.kind == ScenarioKind::ThreeWaveguide {
                    build_three_waveguide(c.g, c.gamma3, p, dims)
                } else {
                    build_asymmetric(c.g, c.delta, c.gamma3, p, dims)
                }
            }
            ScenarioKind::NoonCollective => build_noon(p, d, false),
            ScenarioKind::NoonReduced => build_noon(p, d, true),
        }
    }
}

/// Everything a scenario run produces.
#[derive(Clone, Debug)]
pub struct ScenarioOutput {
    /// Output table: base columns, then `analytic_*` and deviation columns when comparing.
    pub table: Curves<f64>,
    pub report: Option<ComparisonReport<f64>>,
    pub stats: Option<RunStats>,
}

/// Runs the configured scenario, comparing against the closed forms when `cfg.compare`.
pub fn run_config(cfg: &ScenarioConfig) -> Result<ScenarioOutput, ScenarioError> {
    cfg.validate()?;
    let times = cfg.time.samples()?;
    let noon = cfg.kind.is_noon();
    let effective = cfg.effective_params();
    let analytic = analytic_curves(&effective, &times, noon);
    if cfg.mode == RunMode::Analytic {
        return Ok(ScenarioOutput { table: analytic, report: None, stats: None });
    }
    let scenario = cfg.build()?;
    let run = simulate(&scenario, &times, &cfg.solver_options())?;
    let mut table = run.curves;
    if !cfg.compare {
        return Ok(ScenarioOutput { table, report: None, stats: Some(run.stats) });
    }
    let report = compare(&table, &analytic, &effective, cfg.k, noon);
    let devs = deviation_columns(&table, &analytic, noon);
    for (name, col) in &analytic.columns {
        if super::run::compared_observables(noon).contains(&name.as_str()) {
            table.push(format!("analytic_{name}"), col.clone());
        }
    }
    for (name, col) in devs {
        table.push(name, col);
    }
    Ok(ScenarioOutput { table, report: Some(report), stats: Some(run.stats) })
}

/// [`run_config`] with comparison forced on.
pub fn run_and_compare(cfg: &ScenarioConfig) -> Result<ScenarioOutput, ScenarioError> {
    let mut c = cfg.clone();
    c.compare = true;
    c.mode = RunMode::Quantum;
    run_config(&c)
}
