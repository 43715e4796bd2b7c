//! On-disk segment store: one canonical `t,value` CSV per segment plus a
//! TOML manifest carrying the metadata a [`Segment`] needs. This is the
//! inspectable intermediate artifact between the segmentation and
//! degradation/dataset stages of the CLI.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::trace::{BehaviourLabel, CutKind, MetricKind, Sample, Segment};

pub const SEGMENTS_MANIFEST: &str = "segments.toml";

#[derive(Debug, Serialize, Deserialize)]
struct ManifestEntry {
    file: PathBuf,
    scenario_id: String,
    metric: MetricKind,
    phase_type: String,
    cut: CutKind,
    label: BehaviourLabel,
    t_start: f64,
    t_end: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    version: u32,
    #[serde(rename = "segment", default)]
    segments: Vec<ManifestEntry>,
}

/// Writes segments into `dir` (one CSV each) plus the manifest.
pub fn write_segments<T: Real>(segments: &[Segment<T>], dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let mut entries = Vec::with_capacity(segments.len());
    for (i, seg) in segments.iter().enumerate() {
        let file = PathBuf::from(format!(
            "{:04}_{}_{}_{}.csv",
            i, seg.scenario_id, seg.phase_type, seg.cut
        ));
        let mut out = String::from(super::csv::TRACE_HEADER);
        out.push('\n');
        for s in &seg.samples {
            out.push_str(&format!("{},{}\n", s.t, s.value));
        }
        let path = dir.join(&file);
        std::fs::write(&path, out).map_err(|e| Error::io(path.display().to_string(), e))?;
        entries.push(ManifestEntry {
            file,
            scenario_id: seg.scenario_id.clone(),
            metric: seg.metric,
            phase_type: seg.phase_type.clone(),
            cut: seg.cut,
            label: seg.label.clone(),
            t_start: seg.t_start.to_f64_lossy(),
            t_end: seg.t_end.to_f64_lossy(),
        });
    }
    let manifest = Manifest {
        version: 1,
        segments: entries,
    };
    let path = dir.join(SEGMENTS_MANIFEST);
    let text = toml::to_string_pretty(&manifest).map_err(|e| Error::Serialize(e.to_string()))?;
    std::fs::write(&path, text).map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(path)
}

/// Reads a segment store written by [`write_segments`].
pub fn read_segments<T: Real>(dir: &Path) -> Result<Vec<Segment<T>>> {
    let manifest_path = dir.join(SEGMENTS_MANIFEST);
    let text = std::fs::read_to_string(&manifest_path)
        .map_err(|e| Error::io(manifest_path.display().to_string(), e))?;
    let manifest: Manifest = toml::from_str(&text).map_err(|e| Error::Parse {
        path: manifest_path.display().to_string(),
        line: 0,
        message: e.to_string(),
    })?;
    if manifest.version != 1 {
        return Err(Error::SchemaMismatch(format!(
            "segment store version {}",
            manifest.version
        )));
    }
    let mut segments = Vec::with_capacity(manifest.segments.len());
    for entry in manifest.segments {
        let path = dir.join(&entry.file);
        let text =
            std::fs::read_to_string(&path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut samples: Vec<Sample<T>> = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            if idx == 0 {
                if line != super::csv::TRACE_HEADER {
                    return Err(Error::SchemaMismatch(format!(
                        "unexpected header in {}",
                        path.display()
                    )));
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let (t_str, v_str) = line.split_once(',').ok_or_else(|| Error::Parse {
                path: path.display().to_string(),
                line: idx + 1,
                message: "expected two fields".into(),
            })?;
            let parse = |s: &str| -> Result<T> {
                s.parse::<T>().map_err(|_| Error::Parse {
                    path: path.display().to_string(),
                    line: idx + 1,
                    message: format!("invalid number {s:?}"),
                })
            };
            samples.push(Sample::new(parse(t_str)?, parse(v_str)?));
        }
        segments.push(Segment::new(
            entry.scenario_id,
            entry.metric,
            entry.phase_type,
            entry.cut,
            entry.label,
            samples,
            T::from_f64_lossy(entry.t_start),
            T::from_f64_lossy(entry.t_end),
        )?);
    }
    Ok(segments)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn store_roundtrips() {
        let samples: Vec<Sample<f64>> =
            (0..10).map(|i| Sample::new(i as f64 * 0.1, i as f64)).collect();
        let seg = Segment::new(
            "s0",
            MetricKind::Current,
            "cycle-op",
            CutKind::Full,
            BehaviourLabel::normal(),
            samples,
            0.0,
            1.0,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_segments(std::slice::from_ref(&seg), dir.path()).unwrap();
        let loaded = read_segments::<f64>(dir.path()).unwrap();
        assert_eq!(loaded, vec![seg]);
    }
}
