use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::catalog::{placeholders, Chart, EntryOptions};
use crate::dynamics::StepOptions;
use crate::error::{Error, Result};
use crate::expr::{parse, PhasePoint, SampleBox};

/// A parameter value: one scalar or one value per site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Scalar(f64),
    Sites(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub h: f64,
    pub steps: usize,
    pub fp_tol: f64,
    pub max_iter: usize,
    /// Fail the run if any monitor drifts further than this.
    pub drift_tol: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        let s = StepOptions::default();
        IntegratorConfig { h: 1e-3, steps: 1000, fp_tol: s.fp_tol, max_iter: s.max_iter, drift_tol: None }
    }
}

impl IntegratorConfig {
    pub fn step_options(&self) -> StepOptions {
        StepOptions { fp_tol: self.fp_tol, max_iter: self.max_iter }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitConfig {
    /// Strictly decreasing positive values of the contraction parameter.
    pub values: Vec<f64>,
}

impl Default for LimitConfig {
    fn default() -> Self {
        LimitConfig { values: vec![0.2, 0.1, 0.05, 0.025] }
    }
}

/// Everything a command needs. Missing fields take their defaults, so
/// `{"system": "sl2.evans"}` is a complete config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub system: String,
    pub n: usize,
    pub params: BTreeMap<String, ParamValue>,
    /// User functions as infix strings in the entry's placeholders.
    pub functions: BTreeMap<String, String>,
    pub chart: Option<Chart>,
    #[serde(rename = "box")]
    pub sample_box: Option<SampleBox>,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub poisson_map: bool,
    pub limit: Option<LimitConfig>,
    pub integrator: IntegratorConfig,
    /// Start point for `simulate`; a seeded box sample when absent.
    pub initial: Option<PhasePoint>,
    pub curvature_points: usize,
    pub curvature_tol: f64,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            system: String::new(),
            n: 3,
            params: BTreeMap::new(),
            functions: BTreeMap::new(),
            chart: None,
            sample_box: None,
            samples: 100,
            seed: 0,
            tol: 1e-9,
            poisson_map: true,
            limit: None,
            integrator: IntegratorConfig::default(),
            initial: None,
            curvature_points: 10,
            curvature_tol: 1e-4,
            out: PathBuf::from("."),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Entry options with parsed user functions. Every function string
    /// must survive a parse, print, parse round trip unchanged.
    pub fn entry_options(&self) -> Result<EntryOptions> {
        if self.system.is_empty() {
            return Err(Error::Config("no system given".into()));
        }
        let mut o = EntryOptions::new(self.n);
        o.chart = self.chart;
        for (name, v) in &self.params {
            match v {
                ParamValue::Scalar(x) => o = o.param(name, *x),
                ParamValue::Sites(xs) => o = o.seq(name, xs.clone()),
            }
        }
        let args = placeholders(&self.system);
        for (name, src) in &self.functions {
            let f = parse(src, args)?;
            let again = parse(&f.to_string(), args)?;
            if again != f {
                return Err(Error::Config(format!("function `{name}` does not round-trip: `{src}` prints as `{f}`")));
            }
            o = o.function(name, f);
        }
        Ok(o)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Config("samples must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tolerance must be positive, got {}", self.tol)));
        }
        if let Some(b) = &self.sample_box {
            b.validate()?;
            if b.n() != self.n {
                return Err(Error::Config(format!("box has {} dimensions, N = {}", b.n(), self.n)));
            }
        }
        if let Some(x) = &self.initial {
            if x.n() != self.n {
                return Err(Error::Config(format!("initial point has {} dimensions, N = {}", x.n(), self.n)));
            }
        }
        let i = &self.integrator;
        if !(i.h.is_finite() && i.h != 0.0) || i.max_iter == 0 || !(i.fp_tol > 0.0) {
            return Err(Error::Config("integrator needs h != 0, fp_tol > 0 and max_iter > 0".into()));
        }
        Ok(())
    }
}
