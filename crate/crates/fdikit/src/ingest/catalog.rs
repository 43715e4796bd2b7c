//! Scenario catalogs: a TOML file listing every data-collection scenario,
//! its grid coordinates, its label, and the trace/event files it owns.
//! Relative paths are resolved against the catalog's directory.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::{BehaviourLabel, MetricKind};

pub const CATALOG_VERSION: u32 = 1;

/// One catalogued scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioMeta {
    pub id: String,
    pub input_batch: String,
    pub core_type: String,
    pub repetition_count: u32,
    pub label: BehaviourLabel,
    /// Trace file per collected metric.
    pub traces: BTreeMap<MetricKind, PathBuf>,
    /// Phase-event log for the run.
    pub events: PathBuf,
}

impl ScenarioMeta {
    pub fn trace_path(&self, metric: MetricKind) -> Result<&PathBuf> {
        self.traces.get(&metric).ok_or_else(|| {
            Error::MissingFile(format!("scenario {} has no {metric} trace", self.id))
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CatalogFile {
    version: u32,
    #[serde(rename = "scenario", default)]
    scenarios: Vec<ScenarioMeta>,
}

/// Loads a catalog, resolves paths, and verifies that every referenced file
/// exists and that scenario ids are unique.
pub fn load_catalog(path: &Path) -> Result<Vec<ScenarioMeta>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let file: CatalogFile = toml::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: 0,
        message: e.to_string(),
    })?;
    if file.version != CATALOG_VERSION {
        return Err(Error::SchemaMismatch(format!(
            "catalog version {} (supported: {CATALOG_VERSION})",
            file.version
        )));
    }

    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let mut seen = BTreeSet::new();
    let mut scenarios = file.scenarios;
    for meta in &mut scenarios {
        if !seen.insert(meta.id.clone()) {
            return Err(Error::DuplicateScenario(meta.id.clone()));
        }
        for trace in meta.traces.values_mut() {
            *trace = resolve(base, trace);
            if !trace.is_file() {
                return Err(Error::MissingFile(trace.display().to_string()));
            }
        }
        meta.events = resolve(base, &meta.events);
        if !meta.events.is_file() {
            return Err(Error::MissingFile(meta.events.display().to_string()));
        }
    }
    Ok(scenarios)
}

fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

/// Writes a catalog file. Paths are written as given (the synth command
/// passes paths relative to the catalog location).
pub fn write_catalog(scenarios: &[ScenarioMeta], path: &Path) -> Result<()> {
    let file = CatalogFile {
        version: CATALOG_VERSION,
        scenarios: scenarios.to_vec(),
    };
    let text = toml::to_string_pretty(&file).map_err(|e| Error::Serialize(e.to_string()))?;
    std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(id: &str, dir: &Path) -> ScenarioMeta {
        let trace = dir.join(format!("{id}-current.csv"));
        let events = dir.join(format!("{id}-events.csv"));
        std::fs::write(&trace, "t,value\n0,1\n0.1,2\n").unwrap();
        std::fs::write(&events, "t,phase_type,boundary,instance\n").unwrap();
        ScenarioMeta {
            id: id.into(),
            input_batch: "b1".into(),
            core_type: "fast".into(),
            repetition_count: 1,
            label: BehaviourLabel::normal(),
            traces: BTreeMap::from([(MetricKind::Current, PathBuf::from(format!("{id}-current.csv")))]),
            events: PathBuf::from(format!("{id}-events.csv")),
        }
    }

    #[test]
    fn roundtrip_and_resolution() {
        let dir = tempfile::tempdir().unwrap();
        let scenarios = vec![scenario("s0", dir.path()), scenario("s1", dir.path())];
        let catalog = dir.path().join("catalog.toml");
        write_catalog(&scenarios, &catalog).unwrap();
        let loaded = load_catalog(&catalog).unwrap();
        assert_eq!(loaded.len(), 2);
        assert!(loaded[0].traces[&MetricKind::Current].is_absolute() || loaded[0].traces[&MetricKind::Current].is_file());
        assert!(loaded[0].events.is_file());
    }

    #[test]
    fn duplicate_ids_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let scenarios = vec![scenario("s0", dir.path()), scenario("s0", dir.path())];
        let catalog = dir.path().join("catalog.toml");
        write_catalog(&scenarios, &catalog).unwrap();
        assert!(matches!(
            load_catalog(&catalog),
            Err(Error::DuplicateScenario(_))
        ));
    }

    #[test]
    fn missing_file_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut meta = scenario("s0", dir.path());
        meta.traces
            .insert(MetricKind::Power, PathBuf::from("nope.csv"));
        let catalog = dir.path().join("catalog.toml");
        write_catalog(&[meta], &catalog).unwrap();
        assert!(matches!(load_catalog(&catalog), Err(Error::MissingFile(_))));
    }

    #[test]
    fn empty_catalog_is_empty() {
        let dir = tempfile::tempdir().unwrap();
        let catalog = dir.path().join("catalog.toml");
        std::fs::write(&catalog, "version = 1\n").unwrap();
        assert!(load_catalog(&catalog).unwrap().is_empty());
    }
}
