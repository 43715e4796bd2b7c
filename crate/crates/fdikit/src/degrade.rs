//! Data-position simulation: operators that degrade segment quality.
//!
//! Six operators, each `Segment -> Segment`, label and phase metadata
//! preserved, applied to the full phase segments before quartile reduction:
//! jitter, time warping, time masking, amplitude scaling, spike injection,
//! decimation. Every operator at its neutral parameter value (0, 1.0, 0, 1)
//! is the exact identity, sample for sample. All randomness is drawn from a
//! ChaCha8 stream derived from the plan seed, the scenario id, and the
//! segment index, so a plan is reproducible per segment regardless of
//! scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::seed::{derive_seed, hash_str};
use crate::trace::{Sample, Segment};

/// One degradation operator with its parameters. Parameters are plain `f64`
/// at the config boundary and converted at application time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum OperatorSpec {
    /// Adds Gaussian noise with sigma relative to the segment's value std.
    Jitter { sigma_rel: f64 },
    /// Remaps timestamps by a smooth monotone map fixing the endpoints.
    TimeWarp { strength: f64 },
    /// Drops all samples in one contiguous random window of the duration.
    TimeMask { fraction: f64 },
    /// Multiplies all values by a constant factor.
    AmplitudeScale { factor: f64 },
    /// Adds `count` spikes of random polarity at distinct sample indices.
    SpikeInject { count: usize, magnitude_rel: f64 },
    /// Keeps samples at indices divisible by `keep_every`.
    Decimate { keep_every: usize },
}

impl OperatorSpec {
    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            OperatorSpec::Jitter { sigma_rel } if sigma_rel < 0.0 => {
                bad(format!("jitter sigma_rel must be >= 0, got {sigma_rel}"))
            }
            OperatorSpec::TimeWarp { strength } if !(0.0..1.0).contains(&strength) => {
                bad(format!("time_warp strength must be in [0, 1), got {strength}"))
            }
            OperatorSpec::TimeMask { fraction } if !(0.0..1.0).contains(&fraction) => {
                bad(format!("time_mask fraction must be in [0, 1), got {fraction}"))
            }
            OperatorSpec::AmplitudeScale { factor } if factor <= 0.0 => {
                bad(format!("amplitude_scale factor must be > 0, got {factor}"))
            }
            OperatorSpec::Decimate { keep_every } if keep_every < 1 => {
                bad(format!("decimate keep_every must be >= 1, got {keep_every}"))
            }
            _ => Ok(()),
        }
    }
}

/// Ordered operators defining one simulated data position.
///
/// An empty plan is the rich-position identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegradationPlan {
    /// Name of the data position this plan simulates (e.g. "moderate").
    pub data_position: String,
    #[serde(default)]
    pub ops: Vec<OperatorSpec>,
    #[serde(default)]
    pub seed: u64,
}

impl DegradationPlan {
    /// The identity plan for the richest data position.
    pub fn identity(data_position: impl Into<String>) -> Self {
        DegradationPlan {
            data_position: data_position.into(),
            ops: Vec::new(),
            seed: 0,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        self.ops.iter().try_for_each(OperatorSpec::validate)
    }
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Population standard deviation of the segment's values.
fn value_std<T: Real>(segment: &Segment<T>) -> T {
    let n = T::from_usize_lossy(segment.len());
    let mut mean = T::zero();
    for s in &segment.samples {
        mean = mean + s.value;
    }
    mean = mean / n;
    let mut var = T::zero();
    for s in &segment.samples {
        let d = s.value - mean;
        var = var + d * d;
    }
    (var / n).sqrt()
}

fn rebuild<T: Real>(segment: &Segment<T>, samples: Vec<Sample<T>>) -> Result<Segment<T>> {
    Segment::new(
        segment.scenario_id.clone(),
        segment.metric,
        segment.phase_type.clone(),
        segment.cut,
        segment.label.clone(),
        samples,
        segment.t_start,
        segment.t_end,
    )
}

/// Adds Gaussian noise of sigma `sigma_rel * std(values)` to every value.
pub fn jitter<T: Real>(segment: &Segment<T>, sigma_rel: f64, seed: u64) -> Result<Segment<T>> {
    OperatorSpec::Jitter { sigma_rel }.validate()?;
    if sigma_rel == 0.0 {
        return Ok(segment.clone());
    }
    let sigma = T::from_f64_lossy(sigma_rel) * value_std(segment);
    let mut rng = rng_for(seed);
    let normal = Normal::new(0.0f64, 1.0).expect("unit normal");
    let samples = segment
        .samples
        .iter()
        .map(|s| {
            let z = T::from_f64_lossy(normal.sample(&mut rng));
            Sample::new(s.t, s.value + sigma * z)
        })
        .collect();
    rebuild(segment, samples)
}

/// Remaps timestamps by a single-knot monotone cubic fixing both endpoints.
///
/// The midpoint is displaced by `delta` drawn uniformly within the strength
/// bound; displacement follows a smoothstep bump, so
/// `max |w(t) - t| = |delta| <= strength * duration / 2` exactly. `delta` is
/// additionally capped below `duration / 3`, which keeps the map strictly
/// monotone for every strength < 1. Values are untouched.
pub fn time_warp<T: Real>(segment: &Segment<T>, strength: f64, seed: u64) -> Result<Segment<T>> {
    OperatorSpec::TimeWarp { strength }.validate()?;
    if strength == 0.0 {
        return Ok(segment.clone());
    }
    let duration = segment.duration().to_f64_lossy();
    let bound = duration * (strength / 2.0).min(0.33);
    let mut rng = rng_for(seed);
    let delta = rng.random_range(-bound..=bound);
    let delta_t = T::from_f64_lossy(delta);

    let half = T::from_f64_lossy(0.5);
    let two = T::from_f64_lossy(2.0);
    let three = T::from_f64_lossy(3.0);
    let smoothstep = |x: T| x * x * (three - two * x);

    let samples = segment
        .samples
        .iter()
        .map(|s| {
            let x = segment.normalized_time(s);
            let bump = if x <= half {
                smoothstep(two * x)
            } else {
                smoothstep(two * (T::one() - x))
            };
            Sample::new(s.t + delta_t * bump, s.value)
        })
        .collect();
    rebuild(segment, samples)
}

/// Drops all samples inside one contiguous random window of length
/// `fraction * duration`.
pub fn time_mask<T: Real>(segment: &Segment<T>, fraction: f64, seed: u64) -> Result<Segment<T>> {
    OperatorSpec::TimeMask { fraction }.validate()?;
    if fraction == 0.0 {
        return Ok(segment.clone());
    }
    let duration = segment.duration().to_f64_lossy();
    let window = fraction * duration;
    let mut rng = rng_for(seed);
    let start = segment.t_start.to_f64_lossy() + rng.random_range(0.0..=(duration - window));
    let lo = T::from_f64_lossy(start);
    let hi = T::from_f64_lossy(start + window);

    let samples: Vec<Sample<T>> = segment
        .samples
        .iter()
        .filter(|s| s.t < lo || s.t >= hi)
        .cloned()
        .collect();
    if samples.len() < 2 {
        return Err(Error::EmptySegment {
            context: format!("time_mask fraction {fraction} on {}", segment.phase_type),
        });
    }
    rebuild(segment, samples)
}

/// Multiplies every value by `factor`.
pub fn amplitude_scale<T: Real>(segment: &Segment<T>, factor: f64) -> Result<Segment<T>> {
    OperatorSpec::AmplitudeScale { factor }.validate()?;
    if factor == 1.0 {
        return Ok(segment.clone());
    }
    let factor = T::from_f64_lossy(factor);
    let samples = segment
        .samples
        .iter()
        .map(|s| Sample::new(s.t, s.value * factor))
        .collect();
    rebuild(segment, samples)
}

/// Adds `count` spikes of magnitude `magnitude_rel * std(values)` and random
/// polarity at distinct random sample indices. `count` is capped at the
/// sample count.
pub fn spike_inject<T: Real>(
    segment: &Segment<T>,
    count: usize,
    magnitude_rel: f64,
    seed: u64,
) -> Result<Segment<T>> {
    if count == 0 || magnitude_rel == 0.0 {
        return Ok(segment.clone());
    }
    let magnitude = T::from_f64_lossy(magnitude_rel) * value_std(segment);
    let mut rng = rng_for(seed);
    let count = count.min(segment.len());
    let picked = rand::seq::index::sample(&mut rng, segment.len(), count);
    let mut samples = segment.samples.clone();
    for idx in picked.iter() {
        let sign = if rng.random_bool(0.5) { T::one() } else { -T::one() };
        samples[idx].value = samples[idx].value + sign * magnitude;
    }
    rebuild(segment, samples)
}

/// Keeps samples at indices divisible by `keep_every`.
pub fn decimate<T: Real>(segment: &Segment<T>, keep_every: usize) -> Result<Segment<T>> {
    OperatorSpec::Decimate { keep_every }.validate()?;
    if keep_every == 1 {
        return Ok(segment.clone());
    }
    let samples: Vec<Sample<T>> = segment
        .samples
        .iter()
        .step_by(keep_every)
        .cloned()
        .collect();
    if samples.len() < 2 {
        return Err(Error::EmptySegment {
            context: format!("decimate 1/{keep_every} on {}", segment.phase_type),
        });
    }
    rebuild(segment, samples)
}

/// Applies one operator with an explicit seed.
pub fn apply_operator<T: Real>(
    segment: &Segment<T>,
    op: &OperatorSpec,
    seed: u64,
) -> Result<Segment<T>> {
    match *op {
        OperatorSpec::Jitter { sigma_rel } => jitter(segment, sigma_rel, seed),
        OperatorSpec::TimeWarp { strength } => time_warp(segment, strength, seed),
        OperatorSpec::TimeMask { fraction } => time_mask(segment, fraction, seed),
        OperatorSpec::AmplitudeScale { factor } => amplitude_scale(segment, factor),
        OperatorSpec::SpikeInject {
            count,
            magnitude_rel,
        } => spike_inject(segment, count, magnitude_rel, seed),
        OperatorSpec::Decimate { keep_every } => decimate(segment, keep_every),
    }
}

/// Applies the plan's operators in order. Deterministic per
/// (plan seed, scenario id, segment index): each operator gets its own
/// derived seed, so inserting an operator never shifts the streams of the
/// ones after it in other plans.
pub fn apply_plan<T: Real>(
    segment: &Segment<T>,
    plan: &DegradationPlan,
    segment_index: usize,
) -> Result<Segment<T>> {
    plan.validate()?;
    let scenario = hash_str(&segment.scenario_id);
    let mut current = segment.clone();
    for (op_index, op) in plan.ops.iter().enumerate() {
        let seed = derive_seed(
            plan.seed,
            &[scenario, segment_index as u64, op_index as u64],
        );
        current = apply_operator(&current, op, seed)?;
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{BehaviourLabel, CutKind, MetricKind};

    fn segment(n: usize, f: impl Fn(usize) -> f64) -> Segment<f64> {
        let samples: Vec<Sample<f64>> = (0..n)
            .map(|i| Sample::new(i as f64 / n as f64, f(i)))
            .collect();
        Segment::new(
            "s0",
            MetricKind::Current,
            "cycle-op",
            CutKind::Full,
            BehaviourLabel::normal(),
            samples,
            0.0,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn neutral_parameters_are_identity() {
        let seg = segment(16, |i| (i as f64).sin());
        assert_eq!(jitter(&seg, 0.0, 1).unwrap(), seg);
        assert_eq!(time_warp(&seg, 0.0, 1).unwrap(), seg);
        assert_eq!(time_mask(&seg, 0.0, 1).unwrap(), seg);
        assert_eq!(amplitude_scale(&seg, 1.0).unwrap(), seg);
        assert_eq!(spike_inject(&seg, 0, 0.5, 1).unwrap(), seg);
        assert_eq!(decimate(&seg, 1).unwrap(), seg);
    }

    #[test]
    fn same_seed_reproduces() {
        let seg = segment(64, |i| (i as f64 * 0.3).sin());
        assert_eq!(
            jitter(&seg, 0.1, 42).unwrap(),
            jitter(&seg, 0.1, 42).unwrap()
        );
        assert_eq!(
            time_warp(&seg, 0.5, 42).unwrap(),
            time_warp(&seg, 0.5, 42).unwrap()
        );
    }

    #[test]
    fn jitter_noise_scales_with_value_std() {
        // Alternating +-1 values: population std exactly 1, so the added
        // noise std should match sigma_rel within Monte-Carlo slack.
        let seg = segment(400, |i| if i % 2 == 0 { 1.0 } else { -1.0 });
        let mut noise = Vec::new();
        for seed in 0..20u64 {
            let out = jitter(&seg, 0.1, seed).unwrap();
            for (a, b) in out.samples.iter().zip(seg.samples.iter()) {
                noise.push(a.value - b.value);
            }
        }
        let n = noise.len() as f64;
        let mean = noise.iter().sum::<f64>() / n;
        let var = noise.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        let std = var.sqrt();
        assert!((0.05..=0.15).contains(&std), "noise std {std}");
    }

    #[test]
    fn warp_preserves_endpoints_count_and_values() {
        let seg = segment(128, |i| (i as f64 * 0.1).cos());
        for seed in 0..50u64 {
            let strength = 0.02 + 0.95 * (seed as f64 / 50.0);
            let out = time_warp(&seg, strength, seed).unwrap();
            assert_eq!(out.len(), seg.len());
            assert_eq!(out.t_start, seg.t_start);
            assert_eq!(out.t_end, seg.t_end);
            // Strictly increasing timestamps (Segment::new re-checks, but be loud).
            assert!(out.samples.windows(2).all(|w| w[0].t < w[1].t));
            // Value multiset unchanged, in fact order-preserved.
            assert!(out
                .samples
                .iter()
                .zip(seg.samples.iter())
                .all(|(a, b)| a.value == b.value));
            // Displacement bound.
            let bound = strength * 1.0 / 2.0 + 1e-12;
            assert!(out
                .samples
                .iter()
                .zip(seg.samples.iter())
                .all(|(a, b)| (a.t - b.t).abs() <= bound));
        }
    }

    #[test]
    fn mask_drops_contiguous_window() {
        let seg = segment(100, |i| i as f64);
        let out = time_mask(&seg, 0.3, 7).unwrap();
        assert!(out.len() < seg.len());
        // Dropped indices form one contiguous run.
        let kept: Vec<f64> = out.samples.iter().map(|s| s.value).collect();
        let mut gaps = 0;
        for w in kept.windows(2) {
            if w[1] - w[0] > 1.0 {
                gaps += 1;
            }
        }
        assert!(gaps <= 1);
    }

    #[test]
    fn spikes_touch_exactly_count_samples() {
        let seg = segment(50, |i| (i as f64 * 0.2).sin());
        let out = spike_inject(&seg, 3, 2.0, 11).unwrap();
        let changed = out
            .samples
            .iter()
            .zip(seg.samples.iter())
            .filter(|(a, b)| a.value != b.value)
            .count();
        assert_eq!(changed, 3);
    }

    #[test]
    fn decimate_keeps_every_nth() {
        let seg = segment(6, |i| i as f64);
        let out = decimate(&seg, 2).unwrap();
        let values: Vec<f64> = out.samples.iter().map(|s| s.value).collect();
        assert_eq!(values, vec![0.0, 2.0, 4.0]);
    }

    #[test]
    fn decimate_below_two_samples_errors() {
        let seg = segment(4, |i| i as f64);
        assert!(matches!(
            decimate(&seg, 4),
            Err(Error::EmptySegment { .. })
        ));
    }

    #[test]
    fn plan_composition_and_determinism() {
        let seg = segment(8, |i| i as f64);
        let plan = DegradationPlan {
            data_position: "poor".into(),
            ops: vec![
                OperatorSpec::Decimate { keep_every: 2 },
                OperatorSpec::Decimate { keep_every: 2 },
            ],
            seed: 3,
        };
        let out = apply_plan(&seg, &plan, 0).unwrap();
        assert_eq!(out.len(), 2);

        let noisy = DegradationPlan {
            data_position: "poor".into(),
            ops: vec![
                OperatorSpec::Jitter { sigma_rel: 0.2 },
                OperatorSpec::Decimate { keep_every: 2 },
            ],
            seed: 9,
        };
        let seg = segment(64, |i| (i as f64 * 0.3).sin());
        assert_eq!(
            apply_plan(&seg, &noisy, 5).unwrap(),
            apply_plan(&seg, &noisy, 5).unwrap()
        );
        assert_ne!(
            apply_plan(&seg, &noisy, 5).unwrap(),
            apply_plan(&seg, &noisy, 6).unwrap()
        );
    }

    #[test]
    fn empty_plan_is_identity() {
        let seg = segment(16, |i| i as f64);
        let plan = DegradationPlan::identity("rich");
        assert_eq!(apply_plan(&seg, &plan, 0).unwrap(), seg);
    }

    #[test]
    fn metadata_never_changes() {
        let seg = segment(64, |i| (i as f64 * 0.3).sin());
        let plan = DegradationPlan {
            data_position: "poor".into(),
            ops: vec![
                OperatorSpec::Jitter { sigma_rel: 0.3 },
                OperatorSpec::TimeWarp { strength: 0.4 },
                OperatorSpec::SpikeInject {
                    count: 2,
                    magnitude_rel: 1.0,
                },
                OperatorSpec::Decimate { keep_every: 2 },
            ],
            seed: 1,
        };
        let out = apply_plan(&seg, &plan, 0).unwrap();
        assert_eq!(out.scenario_id, seg.scenario_id);
        assert_eq!(out.metric, seg.metric);
        assert_eq!(out.phase_type, seg.phase_type);
        assert_eq!(out.cut, seg.cut);
        assert_eq!(out.label, seg.label);
    }
}
