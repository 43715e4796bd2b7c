//! Goodness-of-fit features and the labelled training dataset.
//!
//! Each segment becomes one row: its execution time, its own signature
//! coefficients, the goodness of its own fit, and how far that goodness
//! diverges from the goodness of the mean passport on the same samples.
//! Normal rows therefore cluster near zero on the diff columns.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::passport::{evaluate_signature, Passport, RegressionSignature};
use crate::trace::{BehaviourLabel, CutKind, MetricKind, Segment};

/// `R2` substitute when the segment has zero variance but the curve misses it.
/// Keeps rows finite for the tree learners.
pub const R2_FLOOR: f64 = -1e6;

/// How well a curve fits a segment.
///
/// `r2` may be negative when the curve fits worse than the segment mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoodnessOfFit<T> {
    pub r2: T,
    pub rmse: T,
}

/// R2 and RMSE of a curve against a segment's samples, over normalized time.
///
/// With zero total variance the convention is `r2 = 1` for an exact fit and
/// [`R2_FLOOR`] otherwise.
pub fn gof<T: Real>(segment: &Segment<T>, curve: &RegressionSignature<T>) -> Result<GoodnessOfFit<T>> {
    let n = segment.len();
    if n < 2 {
        return Err(Error::TooFewSamples { have: n, need: 2 });
    }
    let count = T::from_usize_lossy(n);

    let mut mean = T::zero();
    for s in &segment.samples {
        mean = mean + s.value;
    }
    mean = mean / count;

    let mut ss_res = T::zero();
    let mut ss_tot = T::zero();
    for s in &segment.samples {
        let u = segment.normalized_time(s);
        let predicted = evaluate_signature(curve, u)?;
        let r = s.value - predicted;
        ss_res = ss_res + r * r;
        let d = s.value - mean;
        ss_tot = ss_tot + d * d;
    }

    let rmse = (ss_res / count).sqrt();
    let r2 = if ss_tot == T::zero() {
        if ss_res == T::zero() {
            T::one()
        } else {
            T::from_f64_lossy(R2_FLOOR)
        }
    } else {
        T::one() - ss_res / ss_tot
    };
    Ok(GoodnessOfFit { r2, rmse })
}

/// Where a feature row came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub scenario_id: String,
    pub phase_type: String,
    pub cut: CutKind,
    pub metric: MetricKind,
    pub degree: u8,
}

/// One labelled row of the training dataset: the eight feature columns in
/// fixed order, the class label, and (in memory only) the row's provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow<T> {
    pub execution_time: T,
    pub coefficient_2: T,
    pub coefficient_1: T,
    pub intercept: T,
    pub r2: T,
    pub r2_absolute_diff: T,
    pub rmse: T,
    pub rmse_absolute_diff: T,
    pub label: BehaviourLabel,
    #[serde(skip)]
    pub provenance: Option<Provenance>,
}

/// Number of feature columns (excludes the label).
pub const FEATURE_COUNT: usize = 8;

/// Dataset CSV header; column order is fixed and shared by linear and
/// quadratic datasets.
pub const DATASET_HEADER: &str =
    "execution_time,coefficient_2,coefficient_1,intercept,R2,R2_absolute_diff,RMSE,RMSE_absolute_diff,label";

/// Feature names in column order.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "execution_time",
    "coefficient_2",
    "coefficient_1",
    "intercept",
    "R2",
    "R2_absolute_diff",
    "RMSE",
    "RMSE_absolute_diff",
];

impl<T: Real> FeatureRow<T> {
    /// Features in column order, ready for the classifiers.
    pub fn feature_vector(&self) -> [T; FEATURE_COUNT] {
        [
            self.execution_time,
            self.coefficient_2,
            self.coefficient_1,
            self.intercept,
            self.r2,
            self.r2_absolute_diff,
            self.rmse,
            self.rmse_absolute_diff,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.feature_vector().iter().all(|v| v.is_finite())
    }

    fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.execution_time,
            self.coefficient_2,
            self.coefficient_1,
            self.intercept,
            self.r2,
            self.r2_absolute_diff,
            self.rmse,
            self.rmse_absolute_diff,
            self.label
        )
    }
}

/// Builds one feature row from a segment, its own fit, and the passport for
/// the segment's key.
pub fn extract_row<T: Real>(
    segment: &Segment<T>,
    own_fit: &RegressionSignature<T>,
    passport: &Passport<T>,
) -> Result<FeatureRow<T>> {
    let key = &passport.key;
    if key.phase_type != segment.phase_type
        || key.metric != segment.metric
        || key.cut != segment.cut
        || key.degree != own_fit.degree
    {
        return Err(Error::KeyMismatch(format!(
            "passport {key} vs segment ({}, {}, {}) at degree {}",
            segment.phase_type, segment.metric, segment.cut, own_fit.degree
        )));
    }

    let own = gof(segment, own_fit)?;
    let reference = gof(segment, &passport.signature)?;
    Ok(FeatureRow {
        execution_time: own_fit.execution_time,
        coefficient_2: own_fit.coefficient_2,
        coefficient_1: own_fit.coefficient_1,
        intercept: own_fit.intercept,
        r2: own.r2,
        r2_absolute_diff: (own.r2 - reference.r2).abs(),
        rmse: own.rmse,
        rmse_absolute_diff: (own.rmse - reference.rmse).abs(),
        label: segment.label.clone(),
        provenance: Some(Provenance {
            scenario_id: segment.scenario_id.clone(),
            phase_type: segment.phase_type.clone(),
            cut: segment.cut,
            metric: segment.metric,
            degree: own_fit.degree,
        }),
    })
}

/// The labelled training dataset for one (metric, degree, cut policy).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset<T> {
    pub schema_version: u32,
    pub rows: Vec<FeatureRow<T>>,
}

pub const DATASET_SCHEMA_VERSION: u32 = 1;

impl<T: Real> Dataset<T> {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows per class, in label order.
    pub fn class_counts(&self) -> BTreeMap<BehaviourLabel, usize> {
        let mut counts = BTreeMap::new();
        for row in &self.rows {
            *counts.entry(row.label.clone()).or_insert(0) += 1;
        }
        counts
    }

    /// Appends another dataset with the same schema.
    pub fn concat(&mut self, other: Dataset<T>) -> Result<()> {
        if self.schema_version != other.schema_version {
            return Err(Error::SchemaMismatch(format!(
                "schema version {} vs {}",
                self.schema_version, other.schema_version
            )));
        }
        self.rows.extend(other.rows);
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from(DATASET_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.to_csv_line());
            out.push('\n');
        }
        out
    }
}

/// Validates rows and assembles them into a dataset.
///
/// Rows must all be finite and, when provenance is present, agree on
/// (metric, degree, cut) so one file stays one schema.
pub fn assemble_dataset<T: Real>(rows: Vec<FeatureRow<T>>) -> Result<Dataset<T>> {
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut key: Option<(MetricKind, u8, CutKind)> = None;
    for (i, row) in rows.iter().enumerate() {
        if !row.is_finite() {
            return Err(Error::SchemaMismatch(format!(
                "row {i} contains a non-finite feature"
            )));
        }
        if let Some(p) = &row.provenance {
            let row_key = (p.metric, p.degree, p.cut);
            match key {
                None => key = Some(row_key),
                Some(k) if k != row_key => {
                    return Err(Error::SchemaMismatch(format!(
                        "row {i} has provenance {row_key:?}, dataset is {k:?}"
                    )));
                }
                Some(_) => {}
            }
        }
    }
    Ok(Dataset {
        schema_version: DATASET_SCHEMA_VERSION,
        rows,
    })
}

/// Writes the dataset as CSV: the fixed 9-column header, UTF-8, LF endings,
/// floats in shortest round-trip form.
pub fn write_dataset<T: Real>(dataset: &Dataset<T>, path: &Path) -> Result<()> {
    let mut file =
        std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    file.write_all(dataset.to_csv_string().as_bytes())
        .map_err(|e| Error::io(path.display().to_string(), e))
}

/// Reads a dataset CSV written by [`write_dataset`].
pub fn read_dataset<T: Real>(path: &Path) -> Result<Dataset<T>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let reader = BufReader::new(file);
    let path_str = path.display().to_string();
    let mut rows = Vec::new();
    let mut saw_header = false;
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(&*path_str, e))?;
        let lineno = idx + 1;
        if idx == 0 {
            if line != DATASET_HEADER {
                return Err(Error::SchemaMismatch(format!(
                    "unexpected dataset header in {path_str}"
                )));
            }
            saw_header = true;
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != FEATURE_COUNT + 1 {
            return Err(Error::Parse {
                path: path_str.clone(),
                line: lineno,
                message: format!("expected {} fields, found {}", FEATURE_COUNT + 1, fields.len()),
            });
        }
        let mut values = [T::zero(); FEATURE_COUNT];
        for (slot, (field, name)) in values
            .iter_mut()
            .zip(fields.iter().zip(FEATURE_NAMES.iter()))
        {
            *slot = field.parse::<T>().map_err(|_| Error::Parse {
                path: path_str.clone(),
                line: lineno,
                message: format!("invalid {name}: {field:?}"),
            })?;
        }
        rows.push(FeatureRow {
            execution_time: values[0],
            coefficient_2: values[1],
            coefficient_1: values[2],
            intercept: values[3],
            r2: values[4],
            r2_absolute_diff: values[5],
            rmse: values[6],
            rmse_absolute_diff: values[7],
            label: BehaviourLabel::new(fields[FEATURE_COUNT]),
            provenance: None,
        });
    }
    if !saw_header {
        return Err(Error::SchemaMismatch(format!("{path_str} is empty")));
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(Dataset {
        schema_version: DATASET_SCHEMA_VERSION,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::passport::{build_mean_passport, fit_signature, PassportKey};
    use crate::trace::Sample;

    fn segment_from_fn(
        n: usize,
        t_start: f64,
        t_end: f64,
        f: impl Fn(f64) -> f64,
    ) -> Segment<f64> {
        let samples: Vec<Sample<f64>> = (0..n)
            .map(|i| {
                let t = t_start + (t_end - t_start) * (i as f64) / (n as f64);
                let u = (t - t_start) / (t_end - t_start);
                Sample::new(t, f(u))
            })
            .collect();
        Segment::new(
            "s0",
            MetricKind::Current,
            "cycle-op",
            CutKind::Full,
            BehaviourLabel::normal(),
            samples,
            t_start,
            t_end,
        )
        .unwrap()
    }

    #[test]
    fn exact_fit_gives_perfect_gof() {
        let curve = RegressionSignature::new(2, -1.0, 2.0, 0.5, 1.0).unwrap();
        let seg = segment_from_fn(20, 0.0, 1.0, |u| {
            evaluate_signature(&curve, u).unwrap()
        });
        let g = gof(&seg, &curve).unwrap();
        assert_eq!(g.r2, 1.0);
        assert_eq!(g.rmse, 0.0);
    }

    #[test]
    fn constant_segment_against_own_constant() {
        let curve = RegressionSignature::new(1, 0.0, 0.0, 3.0, 1.0).unwrap();
        let seg = segment_from_fn(5, 0.0, 1.0, |_| 3.0);
        let g = gof(&seg, &curve).unwrap();
        assert_eq!(g.r2, 1.0); // zero-variance convention
        assert_eq!(g.rmse, 0.0);
    }

    #[test]
    fn constant_segment_against_wrong_curve_hits_floor() {
        let curve = RegressionSignature::new(1, 0.0, 0.0, 4.0, 1.0).unwrap();
        let seg = segment_from_fn(5, 0.0, 1.0, |_| 3.0);
        let g = gof(&seg, &curve).unwrap();
        assert_eq!(g.r2, R2_FLOOR);
    }

    #[test]
    fn four_point_rmse_matches_hand_computation() {
        // Samples at u = {0, 0.25, 0.5, 0.75}, values {1, 3, 2, 5}, against
        // the line 2u + 1: residuals {0, 1.5, 0, 2.5}, mean square 8.5/4.
        let samples = vec![
            Sample::new(0.0, 1.0),
            Sample::new(1.0, 3.0),
            Sample::new(2.0, 2.0),
            Sample::new(3.0, 5.0),
        ];
        let seg = Segment::new(
            "s0",
            MetricKind::Current,
            "cycle-op",
            CutKind::Full,
            BehaviourLabel::normal(),
            samples,
            0.0,
            4.0,
        )
        .unwrap();
        let line = RegressionSignature::new(1, 0.0, 2.0, 1.0, 4.0).unwrap();
        let g = gof(&seg, &line).unwrap();
        assert!((g.rmse - 2.125f64.sqrt()).abs() < 1e-15);
        assert!((g.r2 - (1.0 - 8.5 / 8.75)).abs() < 1e-15);
    }

    fn passport_for(seg: &Segment<f64>, degree: u8) -> Passport<f64> {
        build_mean_passport(std::slice::from_ref(seg), degree, &BehaviourLabel::normal()).unwrap()
    }

    #[test]
    fn row_from_passport_segment_has_zero_diffs() {
        let curve = RegressionSignature::new(1, 0.0, 2.0, 1.0, 1.0).unwrap();
        let seg = segment_from_fn(20, 0.0, 1.0, |u| 2.0 * u + 1.0);
        let passport = Passport {
            key: PassportKey {
                phase_type: "cycle-op".into(),
                metric: MetricKind::Current,
                cut: CutKind::Full,
                degree: 1,
            },
            signature: curve,
            support_count: 1,
        };
        let row = extract_row(&seg, &curve, &passport).unwrap();
        assert_eq!(row.r2_absolute_diff, 0.0);
        assert_eq!(row.rmse_absolute_diff, 0.0);
        assert_eq!(row.r2, 1.0);
        assert_eq!(row.rmse, 0.0);
    }

    #[test]
    fn scaled_segment_diverges_from_passport() {
        let base = segment_from_fn(10, 0.0, 1.0, |u| 2.0 * u + 1.0);
        let passport = passport_for(&base, 1);
        let scaled = segment_from_fn(10, 0.0, 1.0, |u| 2.0 * (2.0 * u + 1.0));
        let own = fit_signature(&scaled, 1).unwrap();
        let row = extract_row(&scaled, &own, &passport).unwrap();
        assert!(row.rmse_absolute_diff > 0.0);
    }

    #[test]
    fn key_mismatch_rejected() {
        let seg = segment_from_fn(10, 0.0, 1.0, |u| u);
        let own = fit_signature(&seg, 1).unwrap();
        let mut passport = passport_for(&seg, 1);
        passport.key.phase_type = "image-op".into();
        assert!(matches!(
            extract_row(&seg, &own, &passport),
            Err(Error::KeyMismatch(_))
        ));
    }

    #[test]
    fn class_counts_and_concat() {
        let seg = segment_from_fn(10, 0.0, 1.0, |u| u);
        let own = fit_signature(&seg, 1).unwrap();
        let passport = passport_for(&seg, 1);
        let mut row_a = extract_row(&seg, &own, &passport).unwrap();
        row_a.provenance = None;
        let mut row_b = row_a.clone();
        row_b.label = BehaviourLabel::new("NoFan");
        let mut d1 = assemble_dataset(vec![row_a.clone(), row_b.clone()]).unwrap();
        let counts = d1.class_counts();
        assert_eq!(counts[&BehaviourLabel::new("Normal")], 1);
        assert_eq!(counts[&BehaviourLabel::new("NoFan")], 1);

        let d2 = assemble_dataset(vec![row_a, row_b]).unwrap();
        d1.concat(d2).unwrap();
        assert_eq!(d1.len(), 4);
    }

    #[test]
    fn empty_dataset_rejected() {
        assert!(matches!(
            assemble_dataset::<f64>(vec![]),
            Err(Error::EmptyDataset)
        ));
    }
}
