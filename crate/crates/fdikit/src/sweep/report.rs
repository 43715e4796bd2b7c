//! Persisted results, ranked report tables, and the information-position
//! coverage grid.
//!
//! Results files are byte-stable: one row per case in enumeration order,
//! floats in shortest round-trip form, wall time deliberately excluded.
//! Reports derive only from results, so regenerating a report from a
//! persisted results file reproduces it byte for byte.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ml::{Algorithm, FoldStats};
use crate::segmentation::PhaseSelector;
use crate::trace::{CutKind, DataPosition, KnowledgePosition, PositionScale};

use super::{CaseResult, SweepCase};

pub const RESULTS_HEADER: &str = "case,knowledge,knowledge_level,data_position,data_level,phase_selector,cut,degree,metric,algorithm,seed,rows,mean_accuracy,mean_f1,cv_percent,fold_accuracy,fold_f1";

fn join_floats(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("|")
}

fn split_floats(text: &str) -> Result<Vec<f64>> {
    text.split('|')
        .map(|v| {
            v.parse::<f64>()
                .map_err(|_| Error::SchemaMismatch(format!("invalid float list entry {v:?}")))
        })
        .collect()
}

/// Serializes results in case order.
pub fn results_csv_string(results: &[CaseResult]) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in results {
        let c = &r.case;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            c.index,
            c.knowledge_name,
            c.knowledge.0,
            c.data_name,
            c.data.0,
            c.selector,
            c.cut,
            c.degree,
            c.metric,
            c.algorithm,
            c.seed,
            r.rows,
            r.stats.mean_accuracy,
            r.stats.mean_f1,
            r.stats.cv_percent,
            join_floats(&r.stats.fold_accuracy),
            join_floats(&r.stats.fold_f1),
        );
    }
    out
}

pub fn write_results_csv(results: &[CaseResult], path: &Path) -> Result<()> {
    std::fs::write(path, results_csv_string(results))
        .map_err(|e| Error::io(path.display().to_string(), e))
}

/// Reads a persisted results file back. Wall times are not persisted and
/// come back as zero.
pub fn read_results_csv(path: &Path) -> Result<Vec<CaseResult>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let path_str = path.display().to_string();
    let mut results = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if idx == 0 {
            if line != RESULTS_HEADER {
                return Err(Error::SchemaMismatch(format!(
                    "unexpected results header in {path_str}"
                )));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 17 {
            return Err(Error::Parse {
                path: path_str.clone(),
                line: idx + 1,
                message: format!("expected 17 fields, found {}", f.len()),
            });
        }
        let parse_err = |what: &str, v: &str| Error::Parse {
            path: path_str.clone(),
            line: idx + 1,
            message: format!("invalid {what}: {v:?}"),
        };
        let fold_accuracy = split_floats(f[15])?;
        let fold_f1 = split_floats(f[16])?;
        let case = SweepCase {
            index: f[0].parse().map_err(|_| parse_err("case", f[0]))?,
            knowledge_name: f[1].to_string(),
            knowledge: KnowledgePosition(f[2].parse().map_err(|_| parse_err("knowledge_level", f[2]))?),
            data_name: f[3].to_string(),
            data: DataPosition(f[4].parse().map_err(|_| parse_err("data_level", f[4]))?),
            selector: PhaseSelector::parse(f[5])?,
            cut: f[6].parse()?,
            degree: f[7].parse().map_err(|_| parse_err("degree", f[7]))?,
            metric: f[8].parse()?,
            algorithm: f[9].parse()?,
            seed: f[10].parse().map_err(|_| parse_err("seed", f[10]))?,
        };
        let stats = FoldStats {
            mean_accuracy: f[12].parse().map_err(|_| parse_err("mean_accuracy", f[12]))?,
            mean_f1: f[13].parse().map_err(|_| parse_err("mean_f1", f[13]))?,
            cv_percent: f[14].parse().map_err(|_| parse_err("cv_percent", f[14]))?,
            fold_accuracy,
            fold_f1,
        };
        results.push(CaseResult {
            case,
            stats,
            rows: f[11].parse().map_err(|_| parse_err("rows", f[11]))?,
            wall_ms: 0,
        });
    }
    Ok(results)
}

/// Whether a flagged top score sits at the richest enumerated knowledge
/// level or a poorer one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopFlag {
    Richer,
    Poorer,
}

/// One algorithm's scores within a report row.
#[derive(Debug, Clone, PartialEq)]
pub struct CellScore {
    pub case_index: usize,
    pub accuracy: f64,
    pub f1: f64,
    pub top: Option<TopFlag>,
}

/// One row of a per-cut table: a (knowledge, data, metric, selector, degree)
/// configuration scored by every algorithm that ran it.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub knowledge_name: String,
    pub data_name: String,
    pub metric: String,
    pub selector: String,
    pub degree: u8,
    pub cells: BTreeMap<Algorithm, CellScore>,
}

/// Ranked report: per-cut tables plus top-result bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct RankReport {
    pub threshold: f64,
    pub per_cut: BTreeMap<CutKind, Vec<ReportRow>>,
    /// Case indices whose mean accuracy reached the threshold.
    pub top_cases: Vec<usize>,
    /// Best case (index, accuracy) per knowledge level name.
    pub best_per_knowledge: BTreeMap<String, (usize, f64)>,
}

/// Groups results into per-cut tables and flags top performances, split by
/// knowledge level (richest enumerated level vs. the rest).
pub fn rank_and_report(results: &[CaseResult], threshold: f64) -> RankReport {
    let richest = results
        .iter()
        .map(|r| r.case.knowledge.0)
        .max()
        .unwrap_or(0);

    let mut per_cut: BTreeMap<CutKind, Vec<ReportRow>> = BTreeMap::new();
    let mut top_cases = Vec::new();
    let mut best_per_knowledge: BTreeMap<String, (usize, f64)> = BTreeMap::new();

    for r in results {
        let c = &r.case;
        if r.stats.mean_accuracy >= threshold {
            top_cases.push(c.index);
        }
        let entry = best_per_knowledge
            .entry(c.knowledge_name.clone())
            .or_insert((c.index, r.stats.mean_accuracy));
        if r.stats.mean_accuracy > entry.1 {
            *entry = (c.index, r.stats.mean_accuracy);
        }

        let rows = per_cut.entry(c.cut).or_default();
        let key = (
            c.knowledge_name.clone(),
            c.data_name.clone(),
            c.metric.to_string(),
            c.selector.to_string(),
            c.degree,
        );
        let row = match rows.iter_mut().find(|row| {
            (
                row.knowledge_name.clone(),
                row.data_name.clone(),
                row.metric.clone(),
                row.selector.clone(),
                row.degree,
            ) == key
        }) {
            Some(row) => row,
            None => {
                rows.push(ReportRow {
                    knowledge_name: key.0,
                    data_name: key.1,
                    metric: key.2,
                    selector: key.3,
                    degree: key.4,
                    cells: BTreeMap::new(),
                });
                rows.last_mut().expect("just pushed")
            }
        };
        let top = if r.stats.mean_accuracy >= threshold {
            Some(if c.knowledge.0 == richest {
                TopFlag::Richer
            } else {
                TopFlag::Poorer
            })
        } else {
            None
        };
        row.cells.insert(
            c.algorithm,
            CellScore {
                case_index: c.index,
                accuracy: r.stats.mean_accuracy,
                f1: r.stats.mean_f1,
                top,
            },
        );
    }

    RankReport {
        threshold,
        per_cut,
        top_cases,
        best_per_knowledge,
    }
}

fn algorithms_in(report: &RankReport) -> Vec<Algorithm> {
    let mut set = BTreeSet::new();
    for rows in report.per_cut.values() {
        for row in rows {
            set.extend(row.cells.keys().copied());
        }
    }
    set.into_iter().collect()
}

/// Plain-text tables, one per cut. Top results are marked `*` when they sit
/// at the richest knowledge level in the sweep and `+` otherwise.
pub fn render_report(report: &RankReport) -> String {
    let algorithms = algorithms_in(report);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "top-result threshold: accuracy >= {} (* richer knowledge, + poorer knowledge)",
        report.threshold
    );
    for (cut, rows) in &report.per_cut {
        let _ = writeln!(out, "\n== {cut}-cut segmentation ==");
        let mut header = format!(
            "{:<10} {:<10} {:<9} {:<22} {:<4}",
            "knowledge", "data", "metric", "phase selector", "deg"
        );
        for a in &algorithms {
            header.push_str(&format!(" {:>10} {:>8}", format!("{a} acc"), format!("{a} f1")));
        }
        let _ = writeln!(out, "{header}");
        let _ = writeln!(out, "{}", "-".repeat(header.len()));
        for row in rows {
            let mut line = format!(
                "{:<10} {:<10} {:<9} {:<22} {:<4}",
                row.knowledge_name, row.data_name, row.metric, row.selector, row.degree
            );
            for a in &algorithms {
                match row.cells.get(a) {
                    Some(cell) => {
                        let marker = match cell.top {
                            Some(TopFlag::Richer) => "*",
                            Some(TopFlag::Poorer) => "+",
                            None => "",
                        };
                        line.push_str(&format!(
                            " {:>10} {:>8}",
                            format!("{:.2}%{}", cell.accuracy * 100.0, marker),
                            format!("{:.3}", cell.f1)
                        ));
                    }
                    None => line.push_str(&format!(" {:>10} {:>8}", "-", "-")),
                }
            }
            let _ = writeln!(out, "{line}");
        }
    }
    out
}

/// Report as CSV: one line per (cut, row, algorithm).
pub fn report_csv(report: &RankReport) -> String {
    let mut out = String::from(
        "cut,knowledge,data_position,metric,phase_selector,degree,algorithm,mean_accuracy,mean_f1,top\n",
    );
    for (cut, rows) in &report.per_cut {
        for row in rows {
            for (algorithm, cell) in &row.cells {
                let top = match cell.top {
                    Some(TopFlag::Richer) => "richer",
                    Some(TopFlag::Poorer) => "poorer",
                    None => "",
                };
                let _ = writeln!(
                    out,
                    "{cut},{},{},{},{},{},{algorithm},{},{},{top}",
                    row.knowledge_name,
                    row.data_name,
                    row.metric,
                    row.selector,
                    row.degree,
                    cell.accuracy,
                    cell.f1,
                );
            }
        }
    }
    out
}

/// One cell of the information-position matrix.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CoverageCell {
    pub cases: usize,
    pub best_accuracy: Option<f64>,
}

/// Case counts and best accuracies over the knowledge x data matrix.
/// `cells[data_level][knowledge_level]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageGrid {
    pub knowledge_levels: Vec<String>,
    pub data_levels: Vec<String>,
    pub cells: Vec<Vec<CoverageCell>>,
}

/// Buckets every result into its information-position cell.
pub fn matrix_coverage(
    results: &[CaseResult],
    knowledge_scale: &PositionScale,
    data_scale: &PositionScale,
) -> CoverageGrid {
    let mut cells =
        vec![vec![CoverageCell::default(); knowledge_scale.len()]; data_scale.len()];
    for r in results {
        let k = r.case.knowledge.0;
        let d = r.case.data.0;
        if d >= cells.len() || k >= cells[d].len() {
            continue;
        }
        let cell = &mut cells[d][k];
        cell.cases += 1;
        cell.best_accuracy = Some(match cell.best_accuracy {
            Some(best) if best >= r.stats.mean_accuracy => best,
            _ => r.stats.mean_accuracy,
        });
    }
    CoverageGrid {
        knowledge_levels: knowledge_scale.levels.clone(),
        data_levels: data_scale.levels.clone(),
        cells,
    }
}

impl CoverageGrid {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("data_level,knowledge_level,cases,best_accuracy\n");
        for (d, row) in self.cells.iter().enumerate() {
            for (k, cell) in row.iter().enumerate() {
                let best = cell
                    .best_accuracy
                    .map(|a| a.to_string())
                    .unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    self.data_levels[d], self.knowledge_levels[k], cell.cases, best
                );
            }
        }
        out
    }
}

/// Text grid with poorer data at the top and the richest data position as
/// the bottom row.
pub fn render_coverage(grid: &CoverageGrid) -> String {
    let mut out = String::from("information position coverage (rows: data position, poorest first)\n");
    let mut header = format!("{:<12}", "data \\ knl");
    for k in &grid.knowledge_levels {
        header.push_str(&format!(" {k:>22}"));
    }
    let _ = writeln!(out, "{header}");
    for (d, row) in grid.cells.iter().enumerate() {
        let mut line = format!("{:<12}", grid.data_levels[d]);
        for cell in row {
            let rendered = if cell.cases == 0 {
                "uncovered".to_string()
            } else {
                format!(
                    "{} cases, best {:.2}%",
                    cell.cases,
                    cell.best_accuracy.unwrap_or(0.0) * 100.0
                )
            };
            line.push_str(&format!(" {rendered:>22}"));
        }
        let _ = writeln!(out, "{line}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ml::FoldStats;
    use crate::trace::MetricKind;

    fn result(
        index: usize,
        knowledge: usize,
        data: usize,
        selector: &str,
        cut: CutKind,
        algorithm: Algorithm,
        accuracy: f64,
    ) -> CaseResult {
        CaseResult {
            case: SweepCase {
                index,
                knowledge: KnowledgePosition(knowledge),
                knowledge_name: if knowledge == 2 { "rich" } else { "poor" }.into(),
                data: DataPosition(data),
                data_name: "rich".into(),
                selector: PhaseSelector::parse(selector).unwrap(),
                cut,
                degree: 2,
                metric: MetricKind::Current,
                algorithm,
                seed: 1,
            },
            stats: FoldStats::from_folds(
                vec![accuracy, accuracy, accuracy],
                vec![accuracy, accuracy, accuracy],
            ),
            rows: 100,
            wall_ms: 5,
        }
    }

    #[test]
    fn results_roundtrip_through_csv() {
        let results = vec![
            result(0, 2, 2, "compute-op", CutKind::Full, Algorithm::Bdt, 0.9954),
            result(1, 0, 2, "cycle-op", CutKind::Mid, Algorithm::Rf, 0.9811),
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("results.csv");
        write_results_csv(&results, &path).unwrap();
        let loaded = read_results_csv(&path).unwrap();
        let strip = |rs: &[CaseResult]| -> Vec<CaseResult> {
            rs.iter()
                .map(|r| CaseResult {
                    wall_ms: 0,
                    ..r.clone()
                })
                .collect()
        };
        assert_eq!(strip(&results), loaded);
        // Regeneration from persisted results is byte-identical.
        assert_eq!(results_csv_string(&strip(&results)), results_csv_string(&loaded));
    }

    #[test]
    fn no_flags_below_threshold() {
        let results = vec![result(0, 2, 2, "cycle-op", CutKind::Full, Algorithm::Dt, 0.95)];
        let report = rank_and_report(&results, 0.99);
        assert!(report.top_cases.is_empty());
    }

    #[test]
    fn one_flag_at_0995() {
        let results = vec![
            result(0, 2, 2, "compute-op", CutKind::Full, Algorithm::Bdt, 0.995),
            result(1, 2, 2, "cycle-op", CutKind::Full, Algorithm::Dt, 0.97),
        ];
        let report = rank_and_report(&results, 0.99);
        assert_eq!(report.top_cases, vec![0]);
        let rendered = render_report(&report);
        assert!(rendered.contains("99.50%*"));
    }

    #[test]
    fn poorer_knowledge_tops_flagged_separately() {
        let results = vec![
            result(0, 2, 2, "compute-op", CutKind::Mid, Algorithm::Bdt, 0.996),
            result(1, 0, 2, "cycle-op", CutKind::Mid, Algorithm::Bdt, 0.992),
        ];
        let report = rank_and_report(&results, 0.99);
        assert_eq!(report.top_cases.len(), 2);
        let rendered = render_report(&report);
        assert!(rendered.contains('*'));
        assert!(rendered.contains('+'));
        assert_eq!(report.best_per_knowledge["rich"].0, 0);
        assert_eq!(report.best_per_knowledge["poor"].0, 1);
    }

    #[test]
    fn coverage_populates_only_seen_cells() {
        let scale = PositionScale::default();
        let results = vec![
            result(0, 2, 2, "cycle-op", CutKind::Full, Algorithm::Dt, 0.98),
            result(1, 0, 2, "cycle-op", CutKind::Full, Algorithm::Dt, 0.92),
        ];
        let grid = matrix_coverage(&results, &scale, &scale);
        assert_eq!(grid.cells[2][2].cases, 1);
        assert_eq!(grid.cells[2][0].cases, 1);
        assert_eq!(grid.cells[0][0].cases, 0);
        let rendered = render_coverage(&grid);
        assert!(rendered.contains("uncovered"));
        // Rich data is the bottom row.
        let lines: Vec<&str> = rendered.lines().collect();
        assert!(lines.last().unwrap().starts_with("rich"));
    }

    #[test]
    fn empty_results_leave_grid_uncovered() {
        let scale = PositionScale::default();
        let grid = matrix_coverage(&[], &scale, &scale);
        assert!(grid
            .cells
            .iter()
            .flatten()
            .all(|c| c.cases == 0 && c.best_accuracy.is_none()));
    }
}
