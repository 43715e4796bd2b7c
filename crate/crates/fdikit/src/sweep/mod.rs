//! Case enumeration and parallel execution of the full pipeline per case.
//!
//! A case fixes one point of the knowledge x data x segmentation x signature
//! x metric x algorithm space. Running it replays the whole workflow on the
//! shared corpus: informed phase segments, degradation (data position),
//! quartile cut, signature fit, passport features, dataset, cross-validated
//! scores. Results are a pure function of (config, corpus, seeds): cases are
//! individually seeded and collected in enumeration order, so worker count
//! and scheduling never change the output.

mod config;
mod report;

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{
    AxesConfig, CorpusSource, DataPositionSpec, PhasesConfig, ScalesConfig, SweepConfig,
};
pub use report::{
    matrix_coverage, rank_and_report, read_results_csv, render_coverage, render_report,
    report_csv, results_csv_string, write_results_csv, CoverageCell, CoverageGrid, RankReport,
    ReportRow, RESULTS_HEADER,
};

use crate::degrade;
use crate::error::{Error, Result};
use crate::features::{assemble_dataset, extract_row, FeatureRow};
use crate::ingest::{generate_corpus, load_catalog, read_phase_events_csv, read_trace_csv};
use crate::ml::{
    evaluate_with_folds, stratified_group_kfold, stratified_kfold, train_with, Algorithm,
    FoldStats, TrainingSet,
};
use crate::num::Real;
use crate::passport::{build_mean_passport, fit_signature, PassportKey, PassportStore};
use crate::seed::derive_seed;
use crate::segmentation::{informed_cut, uninformed_cut, PhaseHierarchy, PhaseSelector};
use crate::trace::{
    BehaviourLabel, CutKind, DataPosition, KnowledgePosition, LabelSet, MetricKind, MetricTrace,
    PhaseInterval, Segment,
};

/// One configuration to run: a cell of the case space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCase {
    pub index: usize,
    pub knowledge: KnowledgePosition,
    pub knowledge_name: String,
    pub data: DataPosition,
    pub data_name: String,
    pub selector: PhaseSelector,
    pub cut: CutKind,
    pub degree: u8,
    pub metric: MetricKind,
    pub algorithm: Algorithm,
    pub seed: u64,
}

impl SweepCase {
    pub fn id(&self) -> String {
        format!(
            "{:04}:{}/{}/{}/{}/deg{}/{}/{}",
            self.index,
            self.knowledge_name,
            self.data_name,
            self.selector,
            self.cut,
            self.degree,
            self.metric,
            self.algorithm
        )
    }
}

/// Scores of one executed case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub case: SweepCase,
    pub stats: FoldStats,
    pub rows: usize,
    /// Wall time of the case. Not part of the persisted results schema
    /// (results files must be byte-stable across runs).
    #[serde(default)]
    pub wall_ms: u64,
}

/// A case that could not complete; the sweep carries on.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseFailure {
    pub case: SweepCase,
    pub message: String,
}

/// Everything executed cases share read-only: the corpus, its phase
/// intervals, precomputed full phase segments, and the passport store.
pub struct SweepContext<T> {
    pub scenarios: Vec<ScenarioData<T>>,
    pub passports: PassportStore<T>,
    pub hierarchy: PhaseHierarchy,
    pub label_set: LabelSet,
    base_segments: BTreeMap<(usize, MetricKind, String), Vec<Segment<T>>>,
}

/// One corpus scenario held in memory.
pub struct ScenarioData<T> {
    pub id: String,
    pub label: BehaviourLabel,
    pub traces: BTreeMap<MetricKind, MetricTrace<T>>,
    pub intervals: Vec<PhaseInterval<T>>,
}

/// Expands the configured axes into the deterministic case list, filtered by
/// the knowledge-consistency rule (a selector is enumerated only at levels
/// where all its phases are visible).
pub fn enumerate_cases(config: &SweepConfig) -> Result<Vec<SweepCase>> {
    config.validate()?;
    let hierarchy = config.phases.hierarchy();
    let knowledge_scale = config.knowledge_scale()?;
    let mut cases = Vec::new();
    for knowledge_name in &config.axes.knowledge {
        let knowledge = KnowledgePosition(
            knowledge_scale
                .index_of(knowledge_name)
                .expect("validated level"),
        );
        for dp in config.data_positions() {
            let data = config.data_level(&dp)?;
            for selector in &config.axes.selectors {
                if !selector.permitted(&hierarchy, knowledge) {
                    continue;
                }
                for &cut in &config.axes.cuts {
                    for &degree in &config.axes.degrees {
                        for &metric in &config.axes.metrics {
                            for &algorithm in &config.axes.algorithms {
                                let index = cases.len();
                                cases.push(SweepCase {
                                    index,
                                    knowledge,
                                    knowledge_name: knowledge_name.clone(),
                                    data,
                                    data_name: dp.name.clone(),
                                    selector: selector.clone(),
                                    cut,
                                    degree,
                                    metric,
                                    algorithm,
                                    seed: derive_seed(config.seed, &[index as u64]),
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(cases)
}

/// Loads or generates the corpus and precomputes shared artifacts.
pub fn build_context<T: Real>(config: &SweepConfig) -> Result<SweepContext<T>> {
    config.validate()?;
    let hierarchy = config.phases.hierarchy();

    let (scenarios, label_set) = if let Some(corpus_spec) = &config.corpus.synth {
        let generated = generate_corpus::<T>(corpus_spec, config.seed)?;
        let label_set = corpus_spec.label_set()?;
        let scenarios = generated
            .into_iter()
            .map(|s| {
                let intervals = crate::trace::pair_phase_events(&s.events)?;
                Ok(ScenarioData {
                    id: s.spec.scenario_id.clone(),
                    label: s.spec.label.clone(),
                    traces: BTreeMap::from([(s.spec.metric, s.trace)]),
                    intervals,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        (scenarios, label_set)
    } else {
        let catalog_path = config.corpus.catalog.as_ref().expect("validated corpus");
        let metas = load_catalog(catalog_path)?;
        let mut labels: Vec<BehaviourLabel> = Vec::new();
        let mut scenarios = Vec::new();
        for meta in &metas {
            if !labels.contains(&meta.label) {
                labels.push(meta.label.clone());
            }
            let mut traces = BTreeMap::new();
            for &metric in &config.axes.metrics {
                let path = meta.trace_path(metric)?;
                traces.insert(
                    metric,
                    read_trace_csv::<T>(path, metric, &meta.id, meta.label.clone())?,
                );
            }
            let events = read_phase_events_csv::<T>(&meta.events)?;
            let intervals = crate::trace::pair_phase_events(&events)?;
            scenarios.push(ScenarioData {
                id: meta.id.clone(),
                label: meta.label.clone(),
                traces,
                intervals,
            });
        }
        labels.sort();
        let label_set = LabelSet::new(labels, BehaviourLabel::normal())?;
        (scenarios, label_set)
    };

    // Full informed segments per (scenario, metric, phase). Fail early: a
    // corpus that cannot be segmented cannot run any case.
    let mut base_segments = BTreeMap::new();
    for (idx, scenario) in scenarios.iter().enumerate() {
        for (&metric, trace) in &scenario.traces {
            for phase in hierarchy.all_phases() {
                let segs = informed_cut(trace, &scenario.intervals, phase)?;
                base_segments.insert((idx, metric, phase.to_string()), segs);
            }
        }
    }

    // Mean passports from the normal scenarios, on clean (undegraded) data,
    // for every key any case can ask for.
    let mut passports = PassportStore::new();
    for phase in hierarchy.all_phases() {
        for &metric in &config.axes.metrics {
            for &cut in &config.axes.cuts {
                for &degree in &config.axes.degrees {
                    let mut segments = Vec::new();
                    for (idx, scenario) in scenarios.iter().enumerate() {
                        if scenario.label != label_set.normal {
                            continue;
                        }
                        if !scenario.traces.contains_key(&metric) {
                            continue;
                        }
                        let base = base_segments
                            .get(&(idx, metric, phase.to_string()))
                            .expect("precomputed");
                        for seg in base {
                            segments.push(uninformed_cut(seg, cut)?);
                        }
                    }
                    if segments.is_empty() {
                        return Err(Error::EmptyInput(format!(
                            "no normal segments for passport ({phase}, {metric}, {cut}, deg{degree})"
                        )));
                    }
                    passports.insert(build_mean_passport(&segments, degree, &label_set.normal)?);
                }
            }
        }
    }

    Ok(SweepContext {
        scenarios,
        passports,
        hierarchy,
        label_set,
        base_segments,
    })
}

/// Runs one case end to end on the shared context.
pub fn run_case<T: Real>(
    case: &SweepCase,
    ctx: &SweepContext<T>,
    config: &SweepConfig,
) -> Result<CaseResult> {
    let started = Instant::now();
    let annotate = |e: Error| Error::Case {
        case_id: case.index,
        source: Box::new(e),
    };

    let dp = config
        .data_positions()
        .into_iter()
        .find(|d| d.name == case.data_name)
        .ok_or_else(|| annotate(Error::InvalidAxis(format!("data position {}", case.data_name))))?;
    let plan = dp.resolve_plan(config.seed);

    let mut rows: Vec<FeatureRow<T>> = Vec::new();
    for (idx, scenario) in ctx.scenarios.iter().enumerate() {
        if !scenario.traces.contains_key(&case.metric) {
            continue;
        }
        for phase in case.selector.expand(&ctx.hierarchy) {
            let base = ctx
                .base_segments
                .get(&(idx, case.metric, phase.to_string()))
                .ok_or_else(|| annotate(Error::EmptyPhase(phase.to_string())))?;
            let key = PassportKey {
                phase_type: phase.to_string(),
                metric: case.metric,
                cut: case.cut,
                degree: case.degree,
            };
            let passport = ctx.passports.require(&key).map_err(annotate)?;
            for (seg_idx, segment) in base.iter().enumerate() {
                let degraded = degrade::apply_plan(segment, &plan, seg_idx).map_err(annotate)?;
                let cut_seg = uninformed_cut(&degraded, case.cut).map_err(annotate)?;
                let own = fit_signature(&cut_seg, case.degree).map_err(annotate)?;
                rows.push(extract_row(&cut_seg, &own, passport).map_err(annotate)?);
            }
        }
    }

    let dataset = assemble_dataset(rows).map_err(annotate)?;
    let row_count = dataset.len();
    let ts = TrainingSet::from_dataset(&dataset).map_err(annotate)?;
    let folds = if config.group_cv {
        stratified_group_kfold(&ts, config.kfold, case.seed)
    } else {
        stratified_kfold(&ts, config.kfold, case.seed)
    }
    .map_err(annotate)?;
    let stats = evaluate_with_folds(
        |train, fold_seed| train_with(case.algorithm, train, &config.ml, fold_seed),
        &ts,
        &folds,
        case.seed,
    )
    .map_err(annotate)?;

    Ok(CaseResult {
        case: case.clone(),
        stats,
        rows: row_count,
        wall_ms: started.elapsed().as_millis() as u64,
    })
}

/// Outcome of a sweep: completed results in case order plus collected
/// failures.
pub struct SweepOutcome {
    pub results: Vec<CaseResult>,
    pub failures: Vec<CaseFailure>,
}

/// Runs every enumerated case on a work pool of `config.workers` threads
/// (0 = pool default). Failures are collected, not fatal. `progress` is
/// called once per finished case, from worker threads.
pub fn run_sweep<T: Real>(
    config: &SweepConfig,
    progress: impl Fn(&SweepCase, std::result::Result<&CaseResult, &Error>) + Sync,
) -> Result<SweepOutcome> {
    let ctx = build_context::<T>(config)?;
    run_sweep_with_context(config, &ctx, progress)
}

/// As [`run_sweep`], over an already-built context.
pub fn run_sweep_with_context<T: Real>(
    config: &SweepConfig,
    ctx: &SweepContext<T>,
    progress: impl Fn(&SweepCase, std::result::Result<&CaseResult, &Error>) + Sync,
) -> Result<SweepOutcome> {
    let cases = enumerate_cases(config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;

    let outcomes: Vec<std::result::Result<CaseResult, Error>> = pool.install(|| {
        cases
            .par_iter()
            .map(|case| {
                let outcome = run_case(case, ctx, config);
                match &outcome {
                    Ok(result) => progress(case, Ok(result)),
                    Err(e) => progress(case, Err(e)),
                }
                outcome
            })
            .collect()
    });

    let mut results = Vec::new();
    let mut failures = Vec::new();
    for (case, outcome) in cases.into_iter().zip(outcomes) {
        match outcome {
            Ok(result) => results.push(result),
            Err(e) => failures.push(CaseFailure {
                case,
                message: e.to_string(),
            }),
        }
    }
    Ok(SweepOutcome { results, failures })
}
