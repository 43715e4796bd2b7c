//! Informed (phase-based) and uninformed (quartile-based) cutting of traces.
//!
//! Informed cuts need phase knowledge: one segment per phase interval.
//! Uninformed cuts need no internal knowledge: the time span of any full
//! segment is divided into quartiles, with `ini` the first quarter, `mid` the
//! middle two, and `end` the last. All intervals are half-open `[a, b)` so
//! the three cuts partition the full segment exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::trace::{CutKind, KnowledgePosition, MetricTrace, PhaseInterval, Segment};

/// Phase visibility hierarchy: `levels[0]` holds the outermost phase type(s),
/// deeper indices hold inner phases. A knowledge position at level `k` sees
/// phases down to depth `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseHierarchy {
    pub levels: Vec<Vec<String>>,
}

impl PhaseHierarchy {
    pub fn new(levels: Vec<Vec<String>>) -> Result<Self> {
        if levels.is_empty() || levels[0].is_empty() {
            return Err(Error::Config("phase hierarchy needs an outermost level".into()));
        }
        Ok(PhaseHierarchy { levels })
    }

    /// Conventional two-level hierarchy: one outer cycle phase plus inner phases.
    pub fn two_level(outer: impl Into<String>, inner: Vec<String>) -> Self {
        PhaseHierarchy {
            levels: vec![vec![outer.into()], inner],
        }
    }

    /// Phase types visible at the given knowledge level, outermost first.
    pub fn visible(&self, knowledge: KnowledgePosition) -> Vec<&str> {
        self.levels
            .iter()
            .take(knowledge.0 + 1)
            .flat_map(|l| l.iter().map(String::as_str))
            .collect()
    }

    /// Every phase type in the hierarchy, outermost first.
    pub fn all_phases(&self) -> Vec<&str> {
        self.levels
            .iter()
            .flat_map(|l| l.iter().map(String::as_str))
            .collect()
    }
}

/// Which phase types feed one dataset: a single phase, an explicit
/// combination (`a+b`), or all individual phases.
///
/// Combinations concatenate the member phases' segment lists; signals are
/// never merged.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum PhaseSelector {
    Single(String),
    Combination(Vec<String>),
    All,
}

impl PhaseSelector {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::InvalidParameter("empty phase selector".into()));
        }
        if s == "all" {
            return Ok(PhaseSelector::All);
        }
        if s.contains('+') {
            let members: Vec<String> = s.split('+').map(|p| p.trim().to_string()).collect();
            if members.iter().any(String::is_empty) {
                return Err(Error::InvalidParameter(format!(
                    "malformed phase combination {s:?}"
                )));
            }
            return Ok(PhaseSelector::Combination(members));
        }
        Ok(PhaseSelector::Single(s.to_string()))
    }

    /// Phase types this selector expands to, given the known hierarchy.
    pub fn expand<'a>(&'a self, hierarchy: &'a PhaseHierarchy) -> Vec<&'a str> {
        match self {
            PhaseSelector::Single(p) => vec![p.as_str()],
            PhaseSelector::Combination(ps) => ps.iter().map(String::as_str).collect(),
            PhaseSelector::All => hierarchy.all_phases(),
        }
    }

    /// A selector is permitted at a knowledge level iff every member phase is
    /// visible at that level.
    pub fn permitted(&self, hierarchy: &PhaseHierarchy, knowledge: KnowledgePosition) -> bool {
        let visible = hierarchy.visible(knowledge);
        self.expand(hierarchy).iter().all(|p| visible.contains(p))
    }
}

impl std::fmt::Display for PhaseSelector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PhaseSelector::Single(p) => f.write_str(p),
            PhaseSelector::Combination(ps) => f.write_str(&ps.join("+")),
            PhaseSelector::All => f.write_str("all"),
        }
    }
}

impl TryFrom<String> for PhaseSelector {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        PhaseSelector::parse(&s)
    }
}

impl From<PhaseSelector> for String {
    fn from(sel: PhaseSelector) -> String {
        sel.to_string()
    }
}

/// A segmentation plan: which selectors and cuts to apply at a knowledge level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationPlan {
    pub knowledge: KnowledgePosition,
    pub selectors: Vec<PhaseSelector>,
    pub cuts: Vec<CutKind>,
}

impl SegmentationPlan {
    pub fn validate(&self, hierarchy: &PhaseHierarchy) -> Result<()> {
        for sel in &self.selectors {
            if !sel.permitted(hierarchy, self.knowledge) {
                return Err(Error::SelectorNotPermitted {
                    selector: sel.to_string(),
                    level: format!("{}", self.knowledge.0),
                });
            }
        }
        Ok(())
    }
}

/// One (selector, cut) group of segments produced by [`apply_plan`].
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentGroup<T> {
    pub selector: PhaseSelector,
    pub cut: CutKind,
    pub segments: Vec<Segment<T>>,
}

/// Cuts one full segment out of the trace per interval of `phase_type`.
///
/// Samples with `t` in `[start, end)` belong to the segment; the cut kind is
/// `Full` and the label is inherited from the trace.
pub fn informed_cut<T: Real>(
    trace: &MetricTrace<T>,
    intervals: &[PhaseInterval<T>],
    phase_type: &str,
) -> Result<Vec<Segment<T>>> {
    let selected: Vec<&PhaseInterval<T>> = intervals
        .iter()
        .filter(|iv| iv.phase_type == phase_type)
        .collect();
    if selected.is_empty() {
        return Err(Error::EmptyPhase(phase_type.to_string()));
    }

    let mut segments = Vec::with_capacity(selected.len());
    for iv in selected {
        let lo = trace.samples.partition_point(|s| s.t < iv.start);
        let hi = trace.samples.partition_point(|s| s.t < iv.end);
        if hi - lo < 2 {
            return Err(Error::EmptySegment {
                context: format!("{}#{} [{}, {})", iv.phase_type, iv.instance, iv.start, iv.end),
            });
        }
        segments.push(Segment::new(
            trace.scenario_id.clone(),
            trace.metric,
            iv.phase_type.clone(),
            CutKind::Full,
            trace.label.clone(),
            trace.samples[lo..hi].to_vec(),
            iv.start,
            iv.end,
        )?);
    }
    Ok(segments)
}

/// Reduces a full segment to one of its time quartiles.
///
/// Boundaries are computed on the time span, not the sample count, so the
/// rule is robust to non-uniform sampling. `Full` is the identity.
pub fn uninformed_cut<T: Real>(segment: &Segment<T>, cut: CutKind) -> Result<Segment<T>> {
    if segment.cut != CutKind::Full {
        return Err(Error::NotFull(segment.cut));
    }
    if cut == CutKind::Full {
        return Ok(segment.clone());
    }

    let span = segment.duration();
    let q1 = segment.t_start + span * T::from_f64_lossy(0.25);
    let q3 = segment.t_start + span * T::from_f64_lossy(0.75);
    let (lo_t, hi_t) = match cut {
        CutKind::Ini => (segment.t_start, q1),
        CutKind::Mid => (q1, q3),
        CutKind::End => (q3, segment.t_end),
        CutKind::Full => unreachable!(),
    };

    let lo = segment.samples.partition_point(|s| s.t < lo_t);
    let hi = segment.samples.partition_point(|s| s.t < hi_t);
    if hi - lo < 2 {
        return Err(Error::EmptySegment {
            context: format!("{}/{} of [{}, {})", segment.phase_type, cut, lo_t, hi_t),
        });
    }
    Segment::new(
        segment.scenario_id.clone(),
        segment.metric,
        segment.phase_type.clone(),
        cut,
        segment.label.clone(),
        segment.samples[lo..hi].to_vec(),
        lo_t,
        hi_t,
    )
}

/// Applies every (selector, cut) combination of the plan to one trace.
///
/// Combination selectors concatenate the member phases' segment lists.
pub fn apply_plan<T: Real>(
    trace: &MetricTrace<T>,
    intervals: &[PhaseInterval<T>],
    plan: &SegmentationPlan,
    hierarchy: &PhaseHierarchy,
) -> Result<Vec<SegmentGroup<T>>> {
    plan.validate(hierarchy)?;
    let mut groups = Vec::with_capacity(plan.selectors.len() * plan.cuts.len());
    for selector in &plan.selectors {
        for &cut in &plan.cuts {
            let mut segments = Vec::new();
            for phase in selector.expand(hierarchy) {
                for full in informed_cut(trace, intervals, phase)? {
                    segments.push(uninformed_cut(&full, cut)?);
                }
            }
            groups.push(SegmentGroup {
                selector: selector.clone(),
                cut,
                segments,
            });
        }
    }
    Ok(groups)
}
