use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::CliError;
use crate::design::{design, lookup, DesignInputs, MaterialPlatform};
use crate::scenarios::{run_config, ScenarioConfig};

pub const SWEEP_SCHEMA: &str = "pairgen.sweep/1";

/// Largest number of points on one axis.
pub const MAX_AXIS_POINTS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepTarget {
    /// `base` is a scenario config; one run per point, final sample reported.
    Scenario,
    /// `base` is a [`DesignSpec`].
    Design,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// One sweep dimension. `path` is a dotted field path into `base`; for
/// scenario sweeps the path `t` sets a single-sample time grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default)]
    pub spacing: Spacing,
}

impl Axis {
    pub fn samples(&self) -> Result<Vec<f64>, CliError> {
        let bad = |m: &str| Err(CliError::Validation(format!("axis `{}`: {m}", self.path)));
        let v = match (&self.values, self.start, self.stop, self.points) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(a), Some(b), Some(n)) => {
                if n == 1 {
                    vec![a]
                } else if self.spacing == Spacing::Log {
                    if !(a > 0.0 && b > 0.0) {
                        return bad("log spacing needs positive bounds");
                    }
                    let (la, lb) = (a.log10(), b.log10());
                    (0..n)
                        .map(|i| match i {
                            0 => a,
                            i if i + 1 == n => b,
                            i => 10f64.powf(la + (lb - la) * i as f64 / (n - 1) as f64),
                        })
                        .collect()
                } else {
                    (0..n).map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect()
                }
            }
            _ => return bad("give either `values` or `start`, `stop` and `points`"),
        };
        if v.is_empty() {
            return bad("no points");
        }
        if v.len() > MAX_AXIS_POINTS {
            return bad("more than 10000 points");
        }
        if v.iter().any(|x| !x.is_finite()) {
            return bad("values must be finite");
        }
        Ok(v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub schema: String,
    pub target: SweepTarget,
    pub base: Value,
    pub axes: Vec<Axis>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PlatformRef {
    Name(String),
    Inline(MaterialPlatform<f64>),
}

fn default_pump_photons() -> f64 {
    1e10
}

/// Inputs of one design evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSpec {
    pub platform: PlatformRef,
    pub power: f64,
    pub delta: f64,
    #[serde(default = "default_pump_photons")]
    pub pump_photons: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_spatial: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    /// Ties `gamma3` to `g` after the axes are applied.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma3_per_g: Option<f64>,
}

impl DesignSpec {
    pub fn resolve(&self) -> Result<(MaterialPlatform<f64>, DesignInputs<f64>), CliError> {
        let mut platform = match &self.platform {
            PlatformRef::Name(n) => lookup(n)?,
            PlatformRef::Inline(p) => p.clone(),
        };
        if let Some(r) = self.gamma3_per_g {
            platform.gamma3 = r * platform.g;
        }
        let inputs = DesignInputs {
            power: self.power,
            delta: self.delta,
            pump_photons: self.pump_photons,
            u_spatial: self.u_spatial,
            eta: self.eta,
        };
        Ok((platform, inputs))
    }
}

/// Sweep output: one row per grid point in axis-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Some point failed its quantum-vs-closed-form comparison.
    pub comparison_failed: bool,
}

fn set_path(root: &mut Value, path: &str, x: f64) -> Result<(), CliError> {
    let mut cur = root;
    let keys: Vec<&str> = path.split('.').collect();
    for (i, key) in keys.iter().enumerate() {
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| CliError::Validation(format!("axis path `{path}`: `{key}` is not inside an object")))?;
        if i + 1 == keys.len() {
            obj.insert(key.to_string(), serde_json::json!(x));
            return Ok(());
        }
        cur = obj.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    Err(CliError::Validation(format!("axis path `{path}` is empty")))
}

/// Cartesian product, first axis slowest.
fn grid(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&x| {
                    let mut p = prefix.clone();
                    p.push(x);
                    p
                })
            })
            .collect()
    })
}

struct PointResult {
    header: Vec<String>,
    row: Vec<f64>,
    passed: bool,
}

fn parse<T: for<'de> Deserialize<'de>>(v: Value, what: &str) -> Result<T, CliError> {
    serde_json::from_value(v).map_err(|e| CliError::Validation(format!("{what}: {e}")))
}

fn scenario_point(base: &Value, axes: &[Axis], point: &[f64]) -> Result<PointResult, CliError> {
    let mut v = base.clone();
    for (axis, &x) in axes.iter().zip(point) {
        if axis.path == "t" {
            let obj = v
                .as_object_mut()
                .ok_or_else(|| CliError::Validation("scenario base must be an object".into()))?;
            obj.insert("time".into(), serde_json::json!({ "values": [x] }));
        } else {
            set_path(&mut v, &axis.path, x)?;
        }
    }
    let cfg: ScenarioConfig = parse(v, "scenario")?;
    let out = run_config(&cfg)?;
    let last = out.table.times.len() - 1;
    // a `t` axis already labels the row
    let (mut header, mut row) = if axes.iter().any(|a| a.path == "t") {
        (Vec::new(), Vec::new())
    } else {
        (vec!["t".to_string()], vec![out.table.times[last]])
    };
    for (name, col) in &out.table.columns {
        header.push(name.clone());
        row.push(col[last]);
    }
    let passed = out.report.as_ref().is_none_or(|r| r.pass);
    if let Some(r) = &out.report {
        header.push("pass".into());
        row.push(if r.pass { 1.0 } else { 0.0 });
    }
    Ok(PointResult { header, row, passed })
}

fn design_point(base: &Value, axes: &[Axis], point: &[f64]) -> Result<PointResult, CliError> {
    let mut v = base.clone();
    if let Some(Value::String(name)) = v.get("platform") {
        let p = lookup::<f64>(name)?;
        v["platform"] = serde_json::to_value(p).expect("platform serializes");
    }
    for (axis, &x) in axes.iter().zip(point) {
        set_path(&mut v, &axis.path, x)?;
    }
    let spec: DesignSpec = parse(v, "design")?;
    let (platform, inputs) = spec.resolve()?;
    let r = design(&platform, &inputs)?;
    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    let cols = [
        ("Gamma", r.big_gamma),
        ("l_min", r.l_min),
        ("rejection_db_at_l_min", r.rejection_db_at_l_min),
        ("pair_rate", r.pair_rate),
        ("eta", r.eta),
        ("u_spatial", r.u_spatial),
        ("loss_margin", r.loss_margin),
        ("feasible", flag(r.feasible)),
        ("adiabatic_ok", flag(r.adiabatic_ok)),
        ("khz_scale", flag(r.khz_scale)),
    ];
    Ok(PointResult {
        header: cols.iter().map(|c| c.0.to_string()).collect(),
        row: cols.iter().map(|c| c.1).collect(),
        passed: true,
    })
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Validation(format!("sweep config: {e}")))?;
        if cfg.schema != SWEEP_SCHEMA {
            return Err(CliError::Validation(format!(
                "schema `{}` unsupported, expected `{SWEEP_SCHEMA}`",
                cfg.schema
            )));
        }
        if cfg.axes.is_empty() || cfg.axes.len() > 2 {
            return Err(CliError::Validation(format!("sweeps take 1 or 2 axes, got {}", cfg.axes.len())));
        }
        for a in &cfg.axes {
            a.samples()?;
        }
        Ok(cfg)
    }

    /// Evaluates every grid point on a pool of `jobs` workers. Rows come back
    /// in axis-major order whatever the pool size; the first failing point in
    /// that order decides the error.
    pub fn run(&self, jobs: usize) -> Result<SweepTable, CliError> {
        let axes = self.axes.iter().map(Axis::samples).collect::<Result<Vec<_>, _>>()?;
        let points = grid(&axes);
        let eval = |p: &Vec<f64>| match self.target {
            SweepTarget::Scenario => scenario_point(&self.base, &self.axes, p),
            SweepTarget::Design => design_point(&self.base, &self.axes, p),
        };
        let results: Vec<Result<PointResult, CliError>> = if jobs <= 1 {
            points.iter().map(eval).collect()
        } else {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| CliError::Validation(format!("worker pool: {e}")))?;
            pool.install(|| points.par_iter().map(eval).collect())
        };
        let mut header: Vec<String> = self.axes.iter().map(|a| a.path.clone()).collect();
        let mut rows = Vec::with_capacity(points.len());
        let mut comparison_failed = false;
        for (i, (p, r)) in points.iter().zip(results).enumerate() {
            let r = r?;
            if i == 0 {
                header.extend(r.header);
            }
            comparison_failed |= !r.passed;
            let mut row = p.clone();
            row.extend(r.row);
            rows.push(row);
        }
        Ok(SweepTable { header, rows, comparison_failed })
    }
}
