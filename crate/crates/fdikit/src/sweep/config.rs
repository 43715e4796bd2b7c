//! Sweep configuration file: axes, corpus source, degradation ladders, ML
//! defaults, and position scales. TOML on disk.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::degrade::{DegradationPlan, OperatorSpec};
use crate::error::{Error, Result};
use crate::ingest::CorpusSpec;
use crate::ml::{Algorithm, MlConfig};
use crate::seed::{derive_seed, hash_str};
use crate::segmentation::{PhaseHierarchy, PhaseSelector};
use crate::trace::{CutKind, DataPosition, MetricKind, PositionScale};

/// Where the corpus comes from: a catalog of recorded files, or an in-memory
/// synthetic grid. Exactly one must be set.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CorpusSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synth: Option<CorpusSpec>,
}

impl CorpusSource {
    fn validate(&self) -> Result<()> {
        match (&self.catalog, &self.synth) {
            (Some(_), None) | (None, Some(_)) => Ok(()),
            _ => Err(Error::Config(
                "corpus must set exactly one of catalog or synth".into(),
            )),
        }
    }
}

/// Phase hierarchy as written in configs: one outer phase, inner phases one
/// level down.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasesConfig {
    pub outer: String,
    #[serde(default)]
    pub inner: Vec<String>,
}

impl PhasesConfig {
    pub fn hierarchy(&self) -> PhaseHierarchy {
        PhaseHierarchy::two_level(self.outer.clone(), self.inner.clone())
    }
}

/// The case axes of the sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxesConfig {
    pub metrics: Vec<MetricKind>,
    pub degrees: Vec<u8>,
    pub cuts: Vec<CutKind>,
    pub algorithms: Vec<Algorithm>,
    /// Knowledge levels by scale name (e.g. ["poor", "rich"]).
    pub knowledge: Vec<String>,
    pub selectors: Vec<PhaseSelector>,
}

/// One rung of the data-position ladder: a named degradation plan mapped to
/// a level of the data scale. No operators means the identity (rich data).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataPositionSpec {
    pub name: String,
    pub level: String,
    #[serde(default)]
    pub plan: Vec<OperatorSpec>,
    /// Explicit plan seed; derived from the sweep seed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl DataPositionSpec {
    /// The rich-data identity rung.
    pub fn identity() -> Self {
        DataPositionSpec {
            name: "rich".into(),
            level: "rich".into(),
            plan: Vec::new(),
            seed: None,
        }
    }

    pub fn resolve_plan(&self, sweep_seed: u64) -> DegradationPlan {
        DegradationPlan {
            data_position: self.name.clone(),
            ops: self.plan.clone(),
            seed: self
                .seed
                .unwrap_or_else(|| derive_seed(sweep_seed, &[hash_str("degrade"), hash_str(&self.name)])),
        }
    }
}

/// Knowledge and data scales; both default to poor/moderate/rich.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScalesConfig {
    pub knowledge: Vec<String>,
    pub data: Vec<String>,
}

impl Default for ScalesConfig {
    fn default() -> Self {
        let d = PositionScale::default();
        ScalesConfig {
            knowledge: d.levels.clone(),
            data: d.levels,
        }
    }
}

/// Whole sweep configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub seed: u64,
    /// Accuracy at or above this is flagged a top result.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_kfold")]
    pub kfold: usize,
    /// Worker threads; 0 means the pool default.
    #[serde(default)]
    pub workers: usize,
    /// Group CV folds by scenario so one run never lands on both sides of a
    /// split.
    #[serde(default)]
    pub group_cv: bool,
    pub corpus: CorpusSource,
    pub phases: PhasesConfig,
    pub axes: AxesConfig,
    #[serde(default)]
    pub data_positions: Vec<DataPositionSpec>,
    #[serde(default)]
    pub ml: MlConfig,
    #[serde(default)]
    pub scales: ScalesConfig,
}

fn default_threshold() -> f64 {
    0.99
}

fn default_kfold() -> usize {
    3
}

impl SweepConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: SweepConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut config = Self::from_toml_str(&text)?;
        // Catalog paths are relative to the config file.
        if let Some(catalog) = &config.corpus.catalog {
            if catalog.is_relative() {
                if let Some(base) = path.parent() {
                    config.corpus.catalog = Some(base.join(catalog));
                }
            }
        }
        Ok(config)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    /// Data-position ladder, defaulting to the identity rung.
    pub fn data_positions(&self) -> Vec<DataPositionSpec> {
        if self.data_positions.is_empty() {
            vec![DataPositionSpec::identity()]
        } else {
            self.data_positions.clone()
        }
    }

    pub fn knowledge_scale(&self) -> Result<PositionScale> {
        PositionScale::new(self.scales.knowledge.clone())
    }

    pub fn data_scale(&self) -> Result<PositionScale> {
        PositionScale::new(self.scales.data.clone())
    }

    pub fn validate(&self) -> Result<()> {
        self.corpus.validate()?;
        let axis = |name: &str, empty: bool| {
            if empty {
                Err(Error::InvalidAxis(format!("{name} axis is empty")))
            } else {
                Ok(())
            }
        };
        axis("metrics", self.axes.metrics.is_empty())?;
        axis("degrees", self.axes.degrees.is_empty())?;
        axis("cuts", self.axes.cuts.is_empty())?;
        axis("algorithms", self.axes.algorithms.is_empty())?;
        axis("knowledge", self.axes.knowledge.is_empty())?;
        axis("selectors", self.axes.selectors.is_empty())?;

        for d in &self.axes.degrees {
            if !(*d == 1 || *d == 2) {
                return Err(Error::InvalidAxis(format!("degree {d} unsupported")));
            }
        }
        let knowledge_scale = self.knowledge_scale()?;
        for name in &self.axes.knowledge {
            if knowledge_scale.index_of(name).is_none() {
                return Err(Error::InvalidAxis(format!(
                    "knowledge level {name:?} not on scale {:?}",
                    knowledge_scale.levels
                )));
            }
        }
        let data_scale = self.data_scale()?;
        for dp in self.data_positions() {
            if data_scale.index_of(&dp.level).is_none() {
                return Err(Error::InvalidAxis(format!(
                    "data level {:?} not on scale {:?}",
                    dp.level, data_scale.levels
                )));
            }
            DegradationPlan {
                data_position: dp.name.clone(),
                ops: dp.plan.clone(),
                seed: 0,
            }
            .validate()?;
        }
        if self.kfold < 2 {
            return Err(Error::Config("kfold must be >= 2".into()));
        }
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(Error::Config("threshold must be in (0, 1]".into()));
        }
        let hierarchy = self.phases.hierarchy();
        let known = hierarchy.all_phases();
        for sel in &self.axes.selectors {
            for phase in sel.expand(&hierarchy) {
                if !known.contains(&phase) {
                    return Err(Error::InvalidAxis(format!(
                        "selector {sel} references unknown phase {phase:?}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Level index of a data position spec on the data scale.
    pub fn data_level(&self, spec: &DataPositionSpec) -> Result<DataPosition> {
        let scale = self.data_scale()?;
        scale
            .index_of(&spec.level)
            .map(DataPosition)
            .ok_or_else(|| Error::InvalidAxis(format!("data level {:?}", spec.level)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const MINIMAL: &str = r#"
seed = 42

[corpus.synth]
sample_rate_hz = 250.0
cycles = 2
template = { outer = "cycle-op", inner = [
    { name = "load-op", duration_mean_s = 0.3, base = 2.0, slope = 0.8 },
    { name = "compute-op", duration_mean_s = 0.5, base = 3.2, slope = 1.4, curvature = -1.2 },
], tail_mean_s = 0.12, tail_base = 1.2, gap_mean_s = 0.2, idle_base = 0.5 }
batches = [{ name = "b1" }]
cores = [{ name = "fast" }]
repetitions = [1]
labels = [
    { name = "Normal" },
    { name = "NoFan", effect = { drift_per_s = 0.5, noise_sigma = 0.04 } },
    { name = "UnderVolt", effect = { dip_depth = 0.5, dip_period_s = 0.18, noise_sigma = 0.04 } },
]

[phases]
outer = "cycle-op"
inner = ["load-op", "compute-op"]

[axes]
metrics = ["current"]
degrees = [1, 2]
cuts = ["full", "ini", "mid", "end"]
algorithms = ["bdt", "dt", "et", "rf"]
knowledge = ["rich"]
selectors = ["cycle-op", "load-op", "compute-op", "all", "load-op+compute-op"]
"#;

    #[test]
    fn parses_minimal_config() {
        let config = SweepConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(config.seed, 42);
        assert_eq!(config.threshold, 0.99);
        assert_eq!(config.kfold, 3);
        assert_eq!(config.axes.selectors.len(), 5);
        assert_eq!(config.data_positions().len(), 1);
        assert!(config.data_positions()[0].plan.is_empty());
    }

    #[test]
    fn empty_axis_rejected() {
        let text = MINIMAL.replace("degrees = [1, 2]", "degrees = []");
        assert!(matches!(
            SweepConfig::from_toml_str(&text),
            Err(Error::InvalidAxis(_))
        ));
    }

    #[test]
    fn unknown_selector_phase_rejected() {
        let text = MINIMAL.replace("\"compute-op\", \"all\"", "\"warmup\", \"all\"");
        assert!(matches!(
            SweepConfig::from_toml_str(&text),
            Err(Error::InvalidAxis(_))
        ));
    }

    #[test]
    fn roundtrips_through_toml() {
        let config = SweepConfig::from_toml_str(MINIMAL).unwrap();
        let text = config.to_toml_string().unwrap();
        let back = SweepConfig::from_toml_str(&text).unwrap();
        assert_eq!(config, back);
    }
}
