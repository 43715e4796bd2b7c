//! Seeded synthetic scenario generator.
//!
//! Runs are built as repeated machine cycles: an idle gap, then a cycle-op
//! span containing the inner phases in template order plus a short tail
//! dwell. Each phase contributes a quadratic value shape over its own
//! progress, so regression signatures separate phases cleanly. Label effects
//! sit on top of the normal baseline: a per-cycle linear drift (cooling
//! failure analog), periodic square dips (under-volt analog), and Gaussian
//! noise. The normal label must carry a zero effect; identical seeds then
//! produce identical baselines across labels because durations and noise are
//! drawn from separate ChaCha8 streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::seed::{derive_seed, hash_str};
use crate::trace::{
    BehaviourLabel, LabelSet, MetricKind, MetricTrace, PhaseBoundary, PhaseEvent, Sample,
};

/// Value shape of one inner phase: duration distribution plus a quadratic
/// profile over the phase's normalized progress.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseShape {
    pub name: String,
    pub duration_mean_s: f64,
    #[serde(default)]
    pub duration_sigma_s: f64,
    pub base: f64,
    #[serde(default)]
    pub slope: f64,
    #[serde(default)]
    pub curvature: f64,
}

/// Cycle structure shared by every scenario of a corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTemplate {
    /// Outermost phase type, one instance per cycle.
    pub outer: String,
    /// Inner phases, executed sequentially in this order.
    pub inner: Vec<PhaseShape>,
    /// Dwell inside the cycle after the last inner phase.
    pub tail_mean_s: f64,
    #[serde(default)]
    pub tail_sigma_s: f64,
    pub tail_base: f64,
    /// Idle gap before each cycle.
    pub gap_mean_s: f64,
    #[serde(default)]
    pub gap_sigma_s: f64,
    pub idle_base: f64,
}

impl PhaseTemplate {
    pub fn phase_names(&self) -> Vec<&str> {
        let mut names = vec![self.outer.as_str()];
        names.extend(self.inner.iter().map(|p| p.name.as_str()));
        names
    }

    fn validate(&self) -> Result<()> {
        if self.inner.is_empty() {
            return Err(Error::InvalidSynthSpec("template needs inner phases".into()));
        }
        for p in &self.inner {
            if p.duration_mean_s <= 0.0 {
                return Err(Error::InvalidSynthSpec(format!(
                    "phase {} duration must be > 0",
                    p.name
                )));
            }
        }
        if self.tail_mean_s <= 0.0 || self.gap_mean_s <= 0.0 {
            return Err(Error::InvalidSynthSpec(
                "tail and gap durations must be > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Per-label deviation from the normal baseline.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LabelEffect {
    /// Linear upward drift within each cycle, units per second.
    #[serde(default)]
    pub drift_per_s: f64,
    /// Depth of periodic square dips.
    #[serde(default)]
    pub dip_depth: f64,
    /// Period of the square dips, seconds (50% duty).
    #[serde(default)]
    pub dip_period_s: f64,
    /// Gaussian value noise sigma.
    #[serde(default)]
    pub noise_sigma: f64,
    /// Restrict the effect to instances of one phase type (noise excepted).
    #[serde(default)]
    pub target_phase: Option<String>,
}

impl LabelEffect {
    pub fn is_zero(&self) -> bool {
        self.drift_per_s == 0.0
            && self.dip_depth == 0.0
            && self.noise_sigma == 0.0
    }
}

/// Full specification of one synthetic scenario run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub scenario_id: String,
    pub seed: u64,
    pub cycles: usize,
    pub sample_rate_hz: f64,
    pub metric: MetricKind,
    pub label: BehaviourLabel,
    pub template: PhaseTemplate,
    pub effect: LabelEffect,
    /// Constant value offset (input-batch analog).
    #[serde(default)]
    pub level_offset: f64,
    /// Multiplier on all drawn durations (core-type analog).
    #[serde(default = "one")]
    pub duration_scale: f64,
}

fn one() -> f64 {
    1.0
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        self.template.validate()?;
        if self.cycles == 0 {
            return Err(Error::InvalidSynthSpec("cycles must be >= 1".into()));
        }
        if self.sample_rate_hz <= 0.0 {
            return Err(Error::InvalidSynthSpec("sample rate must be > 0".into()));
        }
        if self.duration_scale <= 0.0 {
            return Err(Error::InvalidSynthSpec("duration scale must be > 0".into()));
        }
        if self.effect.dip_depth > 0.0 && self.effect.dip_period_s <= 0.0 {
            return Err(Error::InvalidSynthSpec(
                "dip_period_s must be > 0 when dip_depth is set".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum RegionKind {
    Gap,
    Inner(usize),
    Tail,
}

#[derive(Debug, Clone, Copy)]
struct Region {
    start: f64,
    end: f64,
    kind: RegionKind,
    cycle_start: f64,
}

/// Generates one trace and its phase-event log. Deterministic for a fixed
/// spec: durations and noise come from independent streams derived from the
/// spec seed, so two labels with the same seed share cycle boundaries.
pub fn synth_generate<T: Real>(spec: &SynthSpec) -> Result<(MetricTrace<T>, Vec<PhaseEvent<T>>)> {
    spec.validate()?;
    let mut duration_rng =
        ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, &[hash_str("durations")]));
    let mut noise_rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, &[hash_str("noise")]));
    let unit = Normal::new(0.0f64, 1.0).expect("unit normal");

    let mut draw_duration = |mean: f64, sigma: f64, scale: f64| -> f64 {
        let z = unit.sample(&mut duration_rng);
        ((mean + sigma * z) * scale).max(0.1 * mean * scale)
    };

    // Lay out the timeline.
    let mut regions: Vec<Region> = Vec::new();
    let mut events: Vec<PhaseEvent<T>> = Vec::new();
    let mut cursor = 0.0f64;
    let push_event = |events: &mut Vec<PhaseEvent<T>>, t: f64, phase: &str, boundary, instance| {
        events.push(PhaseEvent {
            t: T::from_f64_lossy(t),
            phase_type: phase.to_string(),
            boundary,
            instance,
        });
    };
    for cycle in 0..spec.cycles {
        let instance = cycle as u32;
        let gap = draw_duration(spec.template.gap_mean_s, spec.template.gap_sigma_s, 1.0);
        regions.push(Region {
            start: cursor,
            end: cursor + gap,
            kind: RegionKind::Gap,
            cycle_start: 0.0,
        });
        cursor += gap;

        let cycle_start = cursor;
        push_event(&mut events, cursor, &spec.template.outer, PhaseBoundary::Start, instance);
        for (i, phase) in spec.template.inner.iter().enumerate() {
            let d = draw_duration(phase.duration_mean_s, phase.duration_sigma_s, spec.duration_scale);
            push_event(&mut events, cursor, &phase.name, PhaseBoundary::Start, instance);
            regions.push(Region {
                start: cursor,
                end: cursor + d,
                kind: RegionKind::Inner(i),
                cycle_start,
            });
            cursor += d;
            push_event(&mut events, cursor, &phase.name, PhaseBoundary::End, instance);
        }
        let tail = draw_duration(
            spec.template.tail_mean_s,
            spec.template.tail_sigma_s,
            spec.duration_scale,
        );
        regions.push(Region {
            start: cursor,
            end: cursor + tail,
            kind: RegionKind::Tail,
            cycle_start,
        });
        cursor += tail;
        push_event(&mut events, cursor, &spec.template.outer, PhaseBoundary::End, instance);
    }
    let total = cursor;

    // Sample the signal.
    let dt = 1.0 / spec.sample_rate_hz;
    let n = (total / dt).floor() as usize;
    let mut samples: Vec<Sample<T>> = Vec::with_capacity(n);
    let mut region_idx = 0usize;
    for i in 0..n {
        let t = i as f64 * dt;
        while region_idx + 1 < regions.len() && t >= regions[region_idx].end {
            region_idx += 1;
        }
        let region = &regions[region_idx];

        let (mut value, in_cycle, phase_name) = match region.kind {
            RegionKind::Gap => (spec.template.idle_base, false, None),
            RegionKind::Tail => (spec.template.tail_base, true, None),
            RegionKind::Inner(i) => {
                let phase = &spec.template.inner[i];
                let u = (t - region.start) / (region.end - region.start);
                (
                    phase.base + phase.slope * u + phase.curvature * u * u,
                    true,
                    Some(phase.name.as_str()),
                )
            }
        };
        value += spec.level_offset;

        if in_cycle {
            let targeted = match &spec.effect.target_phase {
                None => true,
                Some(target) => phase_name == Some(target.as_str()),
            };
            if targeted {
                value += spec.effect.drift_per_s * (t - region.cycle_start);
                if spec.effect.dip_depth > 0.0
                    && t.rem_euclid(spec.effect.dip_period_s) < spec.effect.dip_period_s / 2.0
                {
                    value -= spec.effect.dip_depth;
                }
            }
        }

        // Noise is drawn for every sample regardless of sigma so that labels
        // sharing a seed share the baseline exactly when effects are zero.
        let z = unit.sample(&mut noise_rng);
        value += spec.effect.noise_sigma * z;

        samples.push(Sample::new(T::from_f64_lossy(t), T::from_f64_lossy(value)));
    }

    let trace = MetricTrace::new(
        spec.scenario_id.clone(),
        spec.metric,
        samples,
        spec.label.clone(),
    )?;
    Ok((trace, events))
}

/// Input-batch grid entry: shifts the overall level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSpec {
    pub name: String,
    #[serde(default)]
    pub level_offset: f64,
}

/// Core-type grid entry: scales all durations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreSpec {
    pub name: String,
    #[serde(default = "one")]
    pub duration_scale: f64,
}

/// Behaviour-label grid entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelSpec {
    pub name: String,
    #[serde(default)]
    pub effect: LabelEffect,
}

/// Grid of synthetic scenarios: batches x cores x repetitions x labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub sample_rate_hz: f64,
    /// Cycles per repetition unit; a scenario runs `cycles * repetition`.
    pub cycles: usize,
    #[serde(default = "default_metric")]
    pub metric: MetricKind,
    pub template: PhaseTemplate,
    pub batches: Vec<BatchSpec>,
    pub cores: Vec<CoreSpec>,
    pub repetitions: Vec<u32>,
    pub labels: Vec<LabelSpec>,
    #[serde(default = "default_normal")]
    pub normal_label: String,
}

fn default_metric() -> MetricKind {
    MetricKind::Current
}

fn default_normal() -> String {
    "Normal".into()
}

/// One generated scenario with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthScenario<T> {
    pub spec: SynthSpec,
    pub input_batch: String,
    pub core_type: String,
    pub repetition_count: u32,
    pub trace: MetricTrace<T>,
    pub events: Vec<PhaseEvent<T>>,
}

impl CorpusSpec {
    pub fn validate(&self) -> Result<()> {
        self.template.validate()?;
        if self.batches.is_empty()
            || self.cores.is_empty()
            || self.repetitions.is_empty()
            || self.labels.is_empty()
        {
            return Err(Error::InvalidSynthSpec("corpus grid axis is empty".into()));
        }
        let normal = self
            .labels
            .iter()
            .find(|l| l.name == self.normal_label)
            .ok_or_else(|| {
                Error::InvalidSynthSpec(format!(
                    "normal label {:?} missing from corpus labels",
                    self.normal_label
                ))
            })?;
        if !normal.effect.is_zero() {
            return Err(Error::InvalidSynthSpec(
                "normal label must have a zero effect".into(),
            ));
        }
        Ok(())
    }

    pub fn label_set(&self) -> Result<LabelSet> {
        LabelSet::new(
            self.labels
                .iter()
                .map(|l| BehaviourLabel::new(&l.name))
                .collect(),
            BehaviourLabel::new(&self.normal_label),
        )
    }

    /// Expands the grid into per-scenario specs. Scenario seeds derive from
    /// the scenario id, so adding grid entries never reshuffles existing ones.
    pub fn scenario_specs(&self, master_seed: u64) -> Result<Vec<SynthSpec>> {
        self.validate()?;
        let mut specs = Vec::new();
        for batch in &self.batches {
            for core in &self.cores {
                for &rep in &self.repetitions {
                    for label in &self.labels {
                        let scenario_id = format!(
                            "{}-{}-r{}-{}",
                            batch.name,
                            core.name,
                            rep,
                            label.name.to_lowercase()
                        );
                        specs.push(SynthSpec {
                            seed: derive_seed(master_seed, &[hash_str(&scenario_id)]),
                            scenario_id,
                            cycles: self.cycles * rep as usize,
                            sample_rate_hz: self.sample_rate_hz,
                            metric: self.metric,
                            label: BehaviourLabel::new(&label.name),
                            template: self.template.clone(),
                            effect: label.effect.clone(),
                            level_offset: batch.level_offset,
                            duration_scale: core.duration_scale,
                        });
                    }
                }
            }
        }
        Ok(specs)
    }
}

/// Generates the whole corpus in grid order.
pub fn generate_corpus<T: Real>(
    spec: &CorpusSpec,
    master_seed: u64,
) -> Result<Vec<SynthScenario<T>>> {
    spec.validate()?;
    let mut scenarios = Vec::new();
    for batch in &spec.batches {
        for core in &spec.cores {
            for &rep in &spec.repetitions {
                for label in &spec.labels {
                    let scenario_id = format!(
                        "{}-{}-r{}-{}",
                        batch.name,
                        core.name,
                        rep,
                        label.name.to_lowercase()
                    );
                    let synth_spec = SynthSpec {
                        seed: derive_seed(master_seed, &[hash_str(&scenario_id)]),
                        scenario_id,
                        cycles: spec.cycles * rep as usize,
                        sample_rate_hz: spec.sample_rate_hz,
                        metric: spec.metric,
                        label: BehaviourLabel::new(&label.name),
                        template: spec.template.clone(),
                        effect: label.effect.clone(),
                        level_offset: batch.level_offset,
                        duration_scale: core.duration_scale,
                    };
                    let (trace, events) = synth_generate(&synth_spec)?;
                    scenarios.push(SynthScenario {
                        spec: synth_spec,
                        input_batch: batch.name.clone(),
                        core_type: core.name.clone(),
                        repetition_count: rep,
                        trace,
                        events,
                    });
                }
            }
        }
    }
    Ok(scenarios)
}
