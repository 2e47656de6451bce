use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analytic::order_root;
use crate::empirical::Q_MIN;
use crate::error::{Error, Result};
use crate::weights::{presets, WeightModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Bell,
    BellCritical,
    LeftSided,
    Monofractal,
    CorollaryCw,
    #[default]
    Custom,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::Bell,
        Scenario::BellCritical,
        Scenario::LeftSided,
        Scenario::Monofractal,
        Scenario::CorollaryCw,
        Scenario::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Bell => "bell",
            Scenario::BellCritical => "bell-critical",
            Scenario::LeftSided => "left-sided",
            Scenario::Monofractal => "monofractal",
            Scenario::CorollaryCw => "corollary-cw",
            Scenario::Custom => "custom",
        }
    }

    fn default_model(self) -> Option<WeightModel> {
        match self {
            Scenario::Bell => Some(presets::beta_bell()),
            Scenario::BellCritical => Some(presets::critical_ternary()),
            Scenario::LeftSided => Some(presets::heavy_log()),
            Scenario::Monofractal => Some(presets::monofractal_half()),
            Scenario::CorollaryCw => Some(presets::deterministic_binomial()),
            Scenario::Custom => None,
        }
    }

    fn default_depth(self) -> usize {
        match self {
            Scenario::BellCritical | Scenario::LeftSided => 14,
            Scenario::CorollaryCw => 22,
            _ => 12,
        }
    }

    fn default_levels(self, depth: usize) -> Vec<usize> {
        match self {
            Scenario::BellCritical => (6..=depth.saturating_sub(2)).collect(),
            Scenario::CorollaryCw => (depth.saturating_sub(6)..=depth.saturating_sub(2)).collect(),
            _ => (6.min(depth)..=depth).collect(),
        }
    }

    fn default_replicas(self) -> usize {
        match self {
            Scenario::BellCritical => 16,
            Scenario::CorollaryCw => 1,
            _ => 64,
        }
    }

    fn default_threshold(self) -> Option<f64> {
        match self {
            Scenario::Bell | Scenario::Monofractal | Scenario::Custom => Some(0.05),
            Scenario::LeftSided | Scenario::CorollaryCw => Some(0.1),
            Scenario::BellCritical => None,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scenario `{s}`")))
    }
}

/// A preset name or an inline weight law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelSpec {
    Preset(String),
    Inline(WeightModel),
}

impl ModelSpec {
    pub fn resolve(&self) -> Result<WeightModel> {
        match self {
            ModelSpec::Preset(name) => {
                presets::by_name(name).ok_or_else(|| Error::Config(format!("unknown preset `{name}`")))
            }
            ModelSpec::Inline(m) => Ok(m.clone()),
        }
    }
}

/// Smooth function added to `F` in the corollary scenario. Every derivative
/// of `t ↦ e^{rate·t}` is nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Addend {
    Exp {
        #[serde(default = "unit_rate")]
        rate: f64,
    },
}

fn unit_rate() -> f64 {
    1.0
}

impl Default for Addend {
    fn default() -> Self {
        Addend::Exp { rate: 1.0 }
    }
}

impl Addend {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Addend::Exp { rate } => (rate * x).exp(),
        }
    }

    fn check(&self) -> Result<()> {
        match *self {
            Addend::Exp { rate } if rate != 0.0 && rate.is_finite() => Ok(()),
            Addend::Exp { rate } => Err(Error::Config(format!("addend rate must be finite and nonzero, got {rate}"))),
        }
    }
}

/// `start, start + step, ..., stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl QGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0) || !(self.stop >= self.start) || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::Config(format!("bad q grid {:?}", self)));
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        Ok((0..=n).map(|k| self.start + k as f64 * self.step).collect())
    }
}

/// One experiment, as read from JSON. Missing keys take the scenario's
/// defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub model: Option<ModelSpec>,
    pub depth: Option<usize>,
    pub levels: Option<Vec<usize>>,
    pub sub_depth: Option<usize>,
    pub replicas: Option<usize>,
    pub q: Option<QGrid>,
    pub m: Option<Vec<usize>>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub addend: Addend,
    /// Overrides the scenario's sup-gap threshold.
    pub threshold: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::Custom,
            model: None,
            depth: None,
            levels: None,
            sub_depth: None,
            replicas: None,
            q: None,
            m: None,
            seed: 42,
            out: None,
            addend: Addend::default(),
            threshold: None,
        }
    }
}

impl RunConfig {
    pub fn for_scenario(scenario: Scenario) -> Self {
        Self { scenario, ..Self::default() }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Fill in defaults and check the invariants.
    pub fn resolve(&self) -> Result<Plan> {
        let scenario = self.scenario;
        let model = match (&self.model, scenario.default_model()) {
            (Some(spec), _) => spec.resolve()?,
            (None, Some(m)) => m,
            (None, None) => return Err(Error::Config("the custom scenario needs a model".into())),
        };
        model.check_structure()?;
        let b = model.base;
        let depth = self.depth.unwrap_or_else(|| scenario.default_depth());
        let levels = self.levels.clone().unwrap_or_else(|| scenario.default_levels(depth));
        if levels.is_empty() || levels.contains(&0) {
            return Err(Error::Config("levels must be a nonempty list of positive integers".into()));
        }
        let max_level = *levels.iter().max().expect("nonempty");
        let ms = self.m.clone().unwrap_or_else(|| vec![1]);
        if ms.is_empty() || ms.contains(&0) {
            return Err(Error::Config("orders m must be positive".into()));
        }
        let max_m = *ms.iter().max().expect("nonempty");
        // b^sub >= m grid points per cylinder, so that Osc^(m) can be nonzero
        let needed = (0..).find(|&s| b.pow(s as u32) >= max_m).expect("finite");
        let sub_depth = self.sub_depth.unwrap_or_else(|| depth.saturating_sub(max_level));
        if depth < max_level + sub_depth {
            return Err(Error::Config(format!(
                "depth {depth} is below max(levels) + sub_depth = {}",
                max_level + sub_depth
            )));
        }
        if scenario != Scenario::CorollaryCw && sub_depth < needed {
            return Err(Error::Config(format!("order m = {max_m} needs sub_depth >= {needed}, got {sub_depth}")));
        }
        let replicas = self.replicas.unwrap_or_else(|| scenario.default_replicas());
        if replicas == 0 {
            return Err(Error::Config("replicas must be at least 1".into()));
        }
        let qs = match self.q {
            Some(g) => g.values()?,
            None if scenario == Scenario::CorollaryCw => {
                let q1 = order_root(&model, max_m)?.q_m.unwrap_or(0.0);
                QGrid { start: 0.0, stop: q1 + 2.0, step: 0.05 }.values()?
            }
            None => QGrid { start: 0.0, stop: 3.0, step: 0.25 }.values()?,
        };
        for &q in &qs {
            if q < Q_MIN || (q < 0.0 && model.w_has_zero()) {
                return Err(Error::Config(format!("q = {q} is outside the range the estimators accept")));
            }
        }
        self.addend.check()?;
        let threshold = self.threshold.or(scenario.default_threshold());
        Ok(Plan {
            scenario,
            model,
            depth,
            levels,
            sub_depth,
            replicas,
            qs,
            ms,
            seed: self.seed,
            addend: self.addend,
            threshold,
        })
    }
}

/// A fully resolved configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub scenario: Scenario,
    pub model: WeightModel,
    pub depth: usize,
    pub levels: Vec<usize>,
    pub sub_depth: usize,
    pub replicas: usize,
    pub qs: Vec<f64>,
    pub ms: Vec<usize>,
    pub seed: u64,
    pub addend: Addend,
    pub threshold: Option<f64>,
}
