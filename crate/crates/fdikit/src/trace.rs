//! Core domain types: metric traces, phase events, segments, labels, and
//! knowledge/data positions.
//!
//! Everything here is immutable after construction and safe to share across
//! parallel workers.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

/// Kind of metric a trace carries.
///
/// Voltage is ingestible but flagged as non-default: it is collected by the
/// reference platform but not used for classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Current,
    Power,
    Energy,
    Voltage,
}

impl MetricKind {
    pub const ALL: [MetricKind; 4] = [
        MetricKind::Current,
        MetricKind::Power,
        MetricKind::Energy,
        MetricKind::Voltage,
    ];

    /// Voltage is collected but not considered by default.
    pub fn considered_by_default(self) -> bool {
        !matches!(self, MetricKind::Voltage)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::Current => "current",
            MetricKind::Power => "power",
            MetricKind::Energy => "energy",
            MetricKind::Voltage => "voltage",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "current" => Ok(MetricKind::Current),
            "power" => Ok(MetricKind::Power),
            "energy" => Ok(MetricKind::Energy),
            "voltage" => Ok(MetricKind::Voltage),
            other => Err(Error::InvalidParameter(format!(
                "unknown metric kind {other:?}"
            ))),
        }
    }
}

/// One timestamped reading of a metric. `t` is seconds since run start.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample<T> {
    pub t: T,
    pub value: T,
}

impl<T> Sample<T> {
    pub fn new(t: T, value: T) -> Self {
        Sample { t, value }
    }
}

/// Behaviour class of a run, e.g. `Normal`, `NoFan`, `UnderVolt`.
///
/// The label set is configuration, not hard-coded, so new fault classes plug
/// in without code changes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BehaviourLabel(String);

impl BehaviourLabel {
    pub fn new(name: impl Into<String>) -> Self {
        BehaviourLabel(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The conventional normal-behaviour label.
    pub fn normal() -> Self {
        BehaviourLabel::new("Normal")
    }
}

impl fmt::Display for BehaviourLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for BehaviourLabel {
    fn from(s: &str) -> Self {
        BehaviourLabel::new(s)
    }
}

/// Closed label set for one experiment. The normal label must be a member
/// because passports are built exclusively from normal-labelled runs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSet {
    pub labels: Vec<BehaviourLabel>,
    pub normal: BehaviourLabel,
}

impl LabelSet {
    pub fn new(labels: Vec<BehaviourLabel>, normal: BehaviourLabel) -> Result<Self> {
        if !labels.contains(&normal) {
            return Err(Error::Config(format!(
                "normal label {normal:?} missing from label set"
            )));
        }
        Ok(LabelSet { labels, normal })
    }

    pub fn contains(&self, label: &BehaviourLabel) -> bool {
        self.labels.contains(label)
    }
}

impl Default for LabelSet {
    fn default() -> Self {
        LabelSet {
            labels: vec![
                BehaviourLabel::new("Normal"),
                BehaviourLabel::new("NoFan"),
                BehaviourLabel::new("UnderVolt"),
            ],
            normal: BehaviourLabel::new("Normal"),
        }
    }
}

/// Timestamped samples of one metric for one scenario run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricTrace<T> {
    pub scenario_id: String,
    pub metric: MetricKind,
    pub samples: Vec<Sample<T>>,
    pub label: BehaviourLabel,
}

impl<T: Real> MetricTrace<T> {
    /// Builds a trace, rejecting anything that fails [`validate_trace`].
    pub fn new(
        scenario_id: impl Into<String>,
        metric: MetricKind,
        samples: Vec<Sample<T>>,
        label: BehaviourLabel,
    ) -> Result<Self> {
        let trace = MetricTrace {
            scenario_id: scenario_id.into(),
            metric,
            samples,
            label,
        };
        let report = validate_trace(&trace);
        if report.is_valid() {
            Ok(trace)
        } else {
            Err(Error::Validation(report.to_string()))
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// A single validation finding, anchored to a sample index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub index: usize,
    pub kind: FindingKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FindingKind {
    NonMonotonicTime,
    DuplicateTimestamp,
    NonFiniteTime,
    NonFiniteValue,
    TooShort,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FindingKind::NonMonotonicTime => write!(f, "non-monotonic at index {}", self.index),
            FindingKind::DuplicateTimestamp => {
                write!(f, "duplicate timestamp at index {}", self.index)
            }
            FindingKind::NonFiniteTime => write!(f, "non-finite time at index {}", self.index),
            FindingKind::NonFiniteValue => write!(f, "non-finite value at index {}", self.index),
            FindingKind::TooShort => write!(f, "trace has fewer than 2 samples"),
        }
    }
}

/// Outcome of [`validate_trace`]: valid iff zero findings.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.findings.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.findings.is_empty() {
            return f.write_str("valid");
        }
        let msgs: Vec<String> = self.findings.iter().map(|x| x.to_string()).collect();
        f.write_str(&msgs.join("; "))
    }
}

/// Report-only check for monotonicity, duplicate timestamps, and non-finite
/// values. Never fails; callers decide what to do with findings.
pub fn validate_trace<T: Real>(trace: &MetricTrace<T>) -> ValidationReport {
    let mut findings = Vec::new();
    if trace.samples.len() < 2 {
        findings.push(Finding {
            index: 0,
            kind: FindingKind::TooShort,
        });
    }
    for (i, s) in trace.samples.iter().enumerate() {
        if !s.t.is_finite() {
            findings.push(Finding {
                index: i,
                kind: FindingKind::NonFiniteTime,
            });
        }
        if !s.value.is_finite() {
            findings.push(Finding {
                index: i,
                kind: FindingKind::NonFiniteValue,
            });
        }
        if i > 0 {
            let prev = trace.samples[i - 1].t;
            if s.t == prev {
                findings.push(Finding {
                    index: i,
                    kind: FindingKind::DuplicateTimestamp,
                });
            } else if s.t < prev {
                findings.push(Finding {
                    index: i,
                    kind: FindingKind::NonMonotonicTime,
                });
            }
        }
    }
    ValidationReport { findings }
}

/// Start or end of a phase instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseBoundary {
    End,
    Start,
}

impl fmt::Display for PhaseBoundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PhaseBoundary::Start => "start",
            PhaseBoundary::End => "end",
        })
    }
}

/// One boundary event of one phase instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseEvent<T> {
    pub t: T,
    pub phase_type: String,
    pub boundary: PhaseBoundary,
    pub instance: u32,
}

/// A matched start/end pair for one phase instance.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseInterval<T> {
    pub phase_type: String,
    pub instance: u32,
    pub start: T,
    pub end: T,
}

impl<T: Real> PhaseInterval<T> {
    pub fn duration(&self) -> T {
        self.end - self.start
    }
}

/// Matches start/end events into intervals and verifies nesting.
///
/// Events must be sorted by time; at equal times, end events must precede
/// start events (the canonical order emitted by the readers). Pairing uses a
/// stack, so crossing intervals and overlapping instances of the same phase
/// type are rejected as nesting violations.
pub fn pair_phase_events<T: Real>(events: &[PhaseEvent<T>]) -> Result<Vec<PhaseInterval<T>>> {
    let mut open: Vec<&PhaseEvent<T>> = Vec::new();
    let mut intervals: Vec<PhaseInterval<T>> = Vec::new();

    let mut last_key: Option<(T, PhaseBoundary)> = None;
    for ev in events {
        if let Some((t, b)) = last_key {
            if ev.t < t || (ev.t == t && (ev.boundary, b) == (PhaseBoundary::End, PhaseBoundary::Start)) {
                return Err(Error::UnmatchedEvent(format!(
                    "events not sorted: {} {}#{} at t={} after t={}",
                    ev.boundary, ev.phase_type, ev.instance, ev.t, t
                )));
            }
        }
        last_key = Some((ev.t, ev.boundary));

        match ev.boundary {
            PhaseBoundary::Start => {
                if open.iter().any(|o| o.phase_type == ev.phase_type) {
                    return Err(Error::NestingViolation(format!(
                        "phase {}#{} starts at t={} while another {} instance is open",
                        ev.phase_type, ev.instance, ev.t, ev.phase_type
                    )));
                }
                open.push(ev);
            }
            PhaseBoundary::End => {
                match open.last() {
                    Some(top) if top.phase_type == ev.phase_type && top.instance == ev.instance => {
                        let start = open.pop().expect("non-empty");
                        if !(ev.t > start.t) {
                            return Err(Error::UnmatchedEvent(format!(
                                "phase {}#{} has end t={} not after start t={}",
                                ev.phase_type, ev.instance, ev.t, start.t
                            )));
                        }
                        intervals.push(PhaseInterval {
                            phase_type: ev.phase_type.clone(),
                            instance: ev.instance,
                            start: start.t,
                            end: ev.t,
                        });
                    }
                    Some(_)
                        if open
                            .iter()
                            .any(|o| o.phase_type == ev.phase_type && o.instance == ev.instance) =>
                    {
                        return Err(Error::NestingViolation(format!(
                            "phase {}#{} ends at t={} while an inner phase is still open",
                            ev.phase_type, ev.instance, ev.t
                        )));
                    }
                    _ => {
                        return Err(Error::UnmatchedEvent(format!(
                            "end of {}#{} at t={} has no matching start",
                            ev.phase_type, ev.instance, ev.t
                        )));
                    }
                }
            }
        }
    }

    if let Some(dangling) = open.first() {
        return Err(Error::UnmatchedEvent(format!(
            "start of {}#{} at t={} has no matching end",
            dangling.phase_type, dangling.instance, dangling.t
        )));
    }

    // Outer intervals first when starts coincide.
    intervals.sort_by(|a, b| {
        a.start
            .partial_cmp(&b.start)
            .expect("finite")
            .then(b.end.partial_cmp(&a.end).expect("finite"))
            .then(a.phase_type.cmp(&b.phase_type))
            .then(a.instance.cmp(&b.instance))
    });
    Ok(intervals)
}

/// Uninformed cut of a segment: the whole span or a time quartile of it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutKind {
    Full,
    Ini,
    Mid,
    End,
}

impl CutKind {
    pub const ALL: [CutKind; 4] = [CutKind::Full, CutKind::Ini, CutKind::Mid, CutKind::End];

    pub fn as_str(self) -> &'static str {
        match self {
            CutKind::Full => "full",
            CutKind::Ini => "ini",
            CutKind::Mid => "mid",
            CutKind::End => "end",
        }
    }
}

impl fmt::Display for CutKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for CutKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(CutKind::Full),
            "ini" => Ok(CutKind::Ini),
            "mid" => Ok(CutKind::Mid),
            "end" => Ok(CutKind::End),
            other => Err(Error::InvalidParameter(format!("unknown cut {other:?}"))),
        }
    }
}

/// A contiguous slice of a trace: one phase instance (or a quartile of it),
/// carrying its provenance and label.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment<T> {
    pub scenario_id: String,
    pub metric: MetricKind,
    pub phase_type: String,
    pub cut: CutKind,
    pub label: BehaviourLabel,
    pub samples: Vec<Sample<T>>,
    pub t_start: T,
    pub t_end: T,
}

impl<T: Real> Segment<T> {
    /// Builds a segment, enforcing: at least 2 samples, strictly increasing
    /// finite timestamps, all samples within `[t_start, t_end)`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        scenario_id: impl Into<String>,
        metric: MetricKind,
        phase_type: impl Into<String>,
        cut: CutKind,
        label: BehaviourLabel,
        samples: Vec<Sample<T>>,
        t_start: T,
        t_end: T,
    ) -> Result<Self> {
        let phase_type = phase_type.into();
        if samples.len() < 2 {
            return Err(Error::EmptySegment {
                context: format!("{phase_type}/{cut}"),
            });
        }
        if !(t_start.is_finite() && t_end.is_finite() && t_start < t_end) {
            return Err(Error::Validation(format!(
                "segment bounds invalid: [{t_start}, {t_end})"
            )));
        }
        let mut prev: Option<T> = None;
        for s in &samples {
            if !(s.t.is_finite() && s.value.is_finite()) {
                return Err(Error::Validation("non-finite sample in segment".into()));
            }
            if s.t < t_start || s.t >= t_end {
                return Err(Error::Validation(format!(
                    "sample t={} outside [{t_start}, {t_end})",
                    s.t
                )));
            }
            if let Some(p) = prev {
                if s.t <= p {
                    return Err(Error::Validation(format!(
                        "segment timestamps not strictly increasing at t={}",
                        s.t
                    )));
                }
            }
            prev = Some(s.t);
        }
        Ok(Segment {
            scenario_id: scenario_id.into(),
            metric,
            phase_type,
            cut,
            label,
            samples,
            t_start,
            t_end,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Time span covered by the segment, in seconds.
    pub fn duration(&self) -> T {
        self.t_end - self.t_start
    }

    /// Normalized time of one sample within this segment, in `[0, 1)`.
    pub fn normalized_time(&self, sample: &Sample<T>) -> T {
        (sample.t - self.t_start) / self.duration()
    }
}

/// Ordered scale of position levels, poorest first. Defaults to the
/// three-level poor/moderate/rich scale; dimensions are configurable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PositionScale {
    pub levels: Vec<String>,
}

impl PositionScale {
    pub fn new(levels: Vec<String>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Config("position scale needs at least one level".into()));
        }
        Ok(PositionScale { levels })
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.levels.iter().position(|l| l == name)
    }

    pub fn name(&self, index: usize) -> &str {
        &self.levels[index]
    }

    pub fn richest(&self) -> usize {
        self.levels.len() - 1
    }
}

impl Default for PositionScale {
    fn default() -> Self {
        PositionScale {
            levels: vec!["poor".into(), "moderate".into(), "rich".into()],
        }
    }
}

/// Level of insight into system internals (0 = poorest).
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct KnowledgePosition(pub usize);

/// Quality level of the collected data (0 = poorest).
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct DataPosition(pub usize);

/// One cell of the knowledge x data matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct InfoPosition {
    pub knowledge: KnowledgePosition,
    pub data: DataPosition,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(t: f64, phase: &str, boundary: PhaseBoundary, instance: u32) -> PhaseEvent<f64> {
        PhaseEvent {
            t,
            phase_type: phase.into(),
            boundary,
            instance,
        }
    }

    #[test]
    fn valid_trace_has_no_findings() {
        let samples = vec![
            Sample::new(0.0, 1.0),
            Sample::new(1.0, 1.5),
            Sample::new(2.0, 2.0),
        ];
        let trace =
            MetricTrace::new("s0", MetricKind::Current, samples, BehaviourLabel::normal()).unwrap();
        assert!(validate_trace(&trace).is_valid());
    }

    #[test]
    fn non_monotonic_reported_at_index() {
        let trace = MetricTrace {
            scenario_id: "s0".into(),
            metric: MetricKind::Current,
            samples: vec![
                Sample::new(0.0, 1.0),
                Sample::new(2.0, 1.0),
                Sample::new(1.0, 1.0),
            ],
            label: BehaviourLabel::normal(),
        };
        let report = validate_trace(&trace);
        assert_eq!(report.findings.len(), 1);
        assert_eq!(report.findings[0].index, 2);
        assert_eq!(report.findings[0].kind, FindingKind::NonMonotonicTime);
        assert!(report.to_string().contains("non-monotonic at index 2"));
    }

    #[test]
    fn nan_value_reported() {
        let trace = MetricTrace {
            scenario_id: "s0".into(),
            metric: MetricKind::Current,
            samples: vec![Sample::new(0.0, f64::NAN), Sample::new(1.0, 1.0)],
            label: BehaviourLabel::normal(),
        };
        let report = validate_trace(&trace);
        assert_eq!(report.findings.len(), 1);
        assert_eq!(report.findings[0].index, 0);
        assert_eq!(report.findings[0].kind, FindingKind::NonFiniteValue);
    }

    #[test]
    fn duplicate_timestamp_reported() {
        let trace = MetricTrace {
            scenario_id: "s0".into(),
            metric: MetricKind::Current,
            samples: vec![Sample::new(0.0, 1.0), Sample::new(0.0, 2.0)],
            label: BehaviourLabel::normal(),
        };
        let report = validate_trace(&trace);
        assert_eq!(report.findings[0].kind, FindingKind::DuplicateTimestamp);
    }

    #[test]
    fn pairs_nested_phases() {
        let events = vec![
            ev(0.0, "cycle-op", PhaseBoundary::Start, 0),
            ev(0.1, "image-op", PhaseBoundary::Start, 0),
            ev(0.4, "image-op", PhaseBoundary::End, 0),
            ev(0.4, "neural-op", PhaseBoundary::Start, 0),
            ev(0.9, "neural-op", PhaseBoundary::End, 0),
            ev(1.0, "cycle-op", PhaseBoundary::End, 0),
        ];
        let intervals = pair_phase_events(&events).unwrap();
        assert_eq!(intervals.len(), 3);
        assert_eq!(intervals[0].phase_type, "cycle-op");
        assert_eq!(intervals[1].phase_type, "image-op");
        assert_eq!(intervals[2].phase_type, "neural-op");
        let cycle = &intervals[0];
        assert!(intervals[1].start >= cycle.start && intervals[1].end <= cycle.end);
        assert!(intervals[2].start >= cycle.start && intervals[2].end <= cycle.end);
    }

    #[test]
    fn empty_event_list_is_empty() {
        let intervals = pair_phase_events::<f64>(&[]).unwrap();
        assert!(intervals.is_empty());
    }

    #[test]
    fn unmatched_start_rejected() {
        let events = vec![ev(0.0, "cycle-op", PhaseBoundary::Start, 0)];
        assert!(matches!(
            pair_phase_events(&events),
            Err(Error::UnmatchedEvent(_))
        ));
    }

    #[test]
    fn crossing_intervals_rejected() {
        let events = vec![
            ev(0.0, "a", PhaseBoundary::Start, 0),
            ev(0.5, "b", PhaseBoundary::Start, 0),
            ev(1.0, "a", PhaseBoundary::End, 0),
            ev(1.5, "b", PhaseBoundary::End, 0),
        ];
        assert!(matches!(
            pair_phase_events(&events),
            Err(Error::NestingViolation(_))
        ));
    }

    #[test]
    fn same_type_overlap_rejected() {
        let events = vec![
            ev(0.0, "a", PhaseBoundary::Start, 0),
            ev(0.5, "a", PhaseBoundary::Start, 1),
            ev(1.0, "a", PhaseBoundary::End, 1),
            ev(1.5, "a", PhaseBoundary::End, 0),
        ];
        assert!(matches!(
            pair_phase_events(&events),
            Err(Error::NestingViolation(_))
        ));
    }

    #[test]
    fn segment_rejects_sample_outside_bounds() {
        let samples = vec![Sample::new(0.0, 1.0), Sample::new(5.0, 1.0)];
        let err = Segment::new(
            "s0",
            MetricKind::Current,
            "cycle-op",
            CutKind::Full,
            BehaviourLabel::normal(),
            samples,
            0.0,
            5.0,
        );
        assert!(err.is_err()); // t = 5.0 is outside the half-open interval
    }

    #[test]
    fn normal_label_required_in_label_set() {
        let err = LabelSet::new(
            vec![BehaviourLabel::new("NoFan")],
            BehaviourLabel::normal(),
        );
        assert!(err.is_err());
    }
}
