//! Regression signatures and mean passports.
//!
//! A signature is a degree-1 or degree-2 least-squares polynomial fitted over
//! normalized time `u = (t - t_start) / (t_end - t_start)`, so segments of
//! different durations are directly comparable; the duration itself is kept
//! as `execution_time`. A mean passport is the coefficient-wise mean of the
//! signatures of normal-labelled segments sharing one
//! (phase type, metric, cut, degree) key, and acts as the reference curve for
//! goodness-of-fit features.
//!
//! The fit runs a streaming Givens QR over the design rows rather than
//! forming normal equations; an independent closed-form normal-equation
//! solver lives in the test suite as the oracle.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::trace::{BehaviourLabel, CutKind, MetricKind, Segment};

/// Highest regression degree exercised by the pipeline.
pub const MAX_DEGREE: u8 = 2;

/// Polynomial signature of one segment over normalized time `[0, 1]`.
///
/// `coefficient_2` is exactly zero for linear signatures so linear and
/// quadratic datasets share one schema.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionSignature<T> {
    pub degree: u8,
    pub coefficient_2: T,
    pub coefficient_1: T,
    pub intercept: T,
    pub execution_time: T,
}

impl<T: Real> RegressionSignature<T> {
    pub fn new(degree: u8, coefficient_2: T, coefficient_1: T, intercept: T, execution_time: T) -> Result<Self> {
        if !(degree >= 1 && degree <= MAX_DEGREE) {
            return Err(Error::UnsupportedDegree(degree));
        }
        if !(coefficient_2.is_finite()
            && coefficient_1.is_finite()
            && intercept.is_finite()
            && execution_time.is_finite())
        {
            return Err(Error::Validation("non-finite signature coefficient".into()));
        }
        Ok(RegressionSignature {
            degree,
            coefficient_2,
            coefficient_1,
            intercept,
            execution_time,
        })
    }
}

/// Evaluates `coefficient_2 * u^2 + coefficient_1 * u + intercept`.
///
/// `u` must lie in `[0, 1]`; signatures are not meant to extrapolate.
pub fn evaluate_signature<T: Real>(sig: &RegressionSignature<T>, u: T) -> Result<T> {
    if !(u >= T::zero() && u <= T::one()) {
        return Err(Error::Domain(u.to_f64_lossy()));
    }
    Ok((sig.coefficient_2 * u + sig.coefficient_1) * u + sig.intercept)
}

/// Least-squares polynomial fit of segment values against normalized time.
pub fn fit_signature<T: Real>(segment: &Segment<T>, degree: u8) -> Result<RegressionSignature<T>> {
    if !(degree >= 1 && degree <= MAX_DEGREE) {
        return Err(Error::UnsupportedDegree(degree));
    }
    let need = degree as usize + 1;
    let n = segment.len();
    if n < need {
        return Err(Error::TooFewSamples { have: n, need });
    }

    let first_u = segment.normalized_time(&segment.samples[0]);
    let distinct = segment
        .samples
        .iter()
        .any(|s| segment.normalized_time(s) != first_u);
    if !distinct {
        return Err(Error::SingularFit("all normalized times identical".into()));
    }

    let cols = need; // [1, u, u^2][..cols]
    // Upper-triangular R augmented with Q^T y in the last column.
    let mut r = vec![vec![T::zero(); cols + 1]; cols];
    let mut row = vec![T::zero(); cols + 1];
    for s in &segment.samples {
        let u = segment.normalized_time(s);
        row[0] = T::one();
        row[1] = u;
        if cols > 2 {
            row[2] = u * u;
        }
        row[cols] = s.value;
        // Rotate the new row into R, one pivot at a time.
        for k in 0..cols {
            let a = r[k][k];
            let b = row[k];
            if b == T::zero() {
                continue;
            }
            let rho = a.hypot(b);
            let c = a / rho;
            let s_ = b / rho;
            for j in k..=cols {
                let rk = r[k][j];
                let rw = row[j];
                r[k][j] = c * rk + s_ * rw;
                row[j] = c * rw - s_ * rk;
            }
        }
    }

    let scale = r
        .iter()
        .flat_map(|v| v.iter())
        .fold(T::zero(), |m, x| m.max(x.abs()));
    let tol = T::epsilon() * T::from_usize_lossy(n.max(cols)) * scale;
    let mut beta = vec![T::zero(); cols];
    for k in (0..cols).rev() {
        let mut acc = r[k][cols];
        for j in k + 1..cols {
            acc = acc - r[k][j] * beta[j];
        }
        if r[k][k].abs() <= tol {
            return Err(Error::SingularFit(format!(
                "rank-deficient design (pivot {k})"
            )));
        }
        beta[k] = acc / r[k][k];
    }

    let coefficient_2 = if cols > 2 { beta[2] } else { T::zero() };
    RegressionSignature::new(degree, coefficient_2, beta[1], beta[0], segment.duration())
}

/// Key identifying which segments a passport describes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PassportKey {
    pub phase_type: String,
    pub metric: MetricKind,
    pub cut: CutKind,
    pub degree: u8,
}

impl fmt::Display for PassportKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {}, deg{})",
            self.phase_type, self.metric, self.cut, self.degree
        )
    }
}

/// Mean signature over normal-labelled segments for one key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Passport<T> {
    pub key: PassportKey,
    pub signature: RegressionSignature<T>,
    pub support_count: usize,
}

/// Fits every segment and takes the coefficient-wise arithmetic mean
/// (including mean execution time). All segments must share one
/// (phase type, metric, cut) key and carry the normal label.
pub fn build_mean_passport<T: Real>(
    segments: &[Segment<T>],
    degree: u8,
    normal: &BehaviourLabel,
) -> Result<Passport<T>> {
    let first = segments
        .first()
        .ok_or_else(|| Error::EmptyInput("no segments for passport".into()))?;
    let key = PassportKey {
        phase_type: first.phase_type.clone(),
        metric: first.metric,
        cut: first.cut,
        degree,
    };
    for seg in segments {
        if seg.phase_type != key.phase_type || seg.metric != key.metric || seg.cut != key.cut {
            return Err(Error::MixedKey(format!(
                "expected {key}, found ({}, {}, {})",
                seg.phase_type, seg.metric, seg.cut
            )));
        }
        if seg.label != *normal {
            return Err(Error::NonNormalLabel(seg.label.to_string()));
        }
    }

    let count = T::from_usize_lossy(segments.len());
    let mut sum2 = T::zero();
    let mut sum1 = T::zero();
    let mut sum0 = T::zero();
    let mut sum_t = T::zero();
    for seg in segments {
        let sig = fit_signature(seg, degree)?;
        sum2 = sum2 + sig.coefficient_2;
        sum1 = sum1 + sig.coefficient_1;
        sum0 = sum0 + sig.intercept;
        sum_t = sum_t + sig.execution_time;
    }
    Ok(Passport {
        key,
        signature: RegressionSignature::new(
            degree,
            sum2 / count,
            sum1 / count,
            sum0 / count,
            sum_t / count,
        )?,
        support_count: segments.len(),
    })
}

/// Read-only collection of passports, keyed for lookup during feature
/// extraction. Persisted as a CSV file, one passport per line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PassportStore<T> {
    passports: BTreeMap<PassportKey, Passport<T>>,
}

pub const PASSPORT_HEADER: &str =
    "phase_type,metric,cut,degree,coefficient_2,coefficient_1,intercept,execution_time,support_count";

impl<T: Real> PassportStore<T> {
    pub fn new() -> Self {
        PassportStore {
            passports: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, passport: Passport<T>) {
        self.passports.insert(passport.key.clone(), passport);
    }

    pub fn get(&self, key: &PassportKey) -> Option<&Passport<T>> {
        self.passports.get(key)
    }

    pub fn require(&self, key: &PassportKey) -> Result<&Passport<T>> {
        self.get(key)
            .ok_or_else(|| Error::MissingPassport(key.to_string()))
    }

    pub fn len(&self) -> usize {
        self.passports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.passports.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Passport<T>> {
        self.passports.values()
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from(PASSPORT_HEADER);
        out.push('\n');
        for p in self.passports.values() {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                p.key.phase_type,
                p.key.metric,
                p.key.cut,
                p.key.degree,
                p.signature.coefficient_2,
                p.signature.coefficient_1,
                p.signature.intercept,
                p.signature.execution_time,
                p.support_count
            ));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut file =
            std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        file.write_all(self.to_csv_string().as_bytes())
            .map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let file =
            std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let reader = BufReader::new(file);
        let path_str = path.display().to_string();
        let mut store = PassportStore::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(&*path_str, e))?;
            let lineno = idx + 1;
            if idx == 0 {
                if line != PASSPORT_HEADER {
                    return Err(Error::SchemaMismatch(format!(
                        "unexpected passport header in {path_str}"
                    )));
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 9 {
                return Err(Error::Parse {
                    path: path_str.clone(),
                    line: lineno,
                    message: format!("expected 9 fields, found {}", fields.len()),
                });
            }
            let parse_num = |s: &str, what: &str| -> Result<T> {
                s.parse::<T>().map_err(|_| Error::Parse {
                    path: path_str.clone(),
                    line: lineno,
                    message: format!("invalid {what}: {s:?}"),
                })
            };
            let degree: u8 = fields[3].parse().map_err(|_| Error::Parse {
                path: path_str.clone(),
                line: lineno,
                message: format!("invalid degree: {:?}", fields[3]),
            })?;
            let key = PassportKey {
                phase_type: fields[0].to_string(),
                metric: fields[1].parse()?,
                cut: fields[2].parse()?,
                degree,
            };
            let signature = RegressionSignature::new(
                degree,
                parse_num(fields[4], "coefficient_2")?,
                parse_num(fields[5], "coefficient_1")?,
                parse_num(fields[6], "intercept")?,
                parse_num(fields[7], "execution_time")?,
            )?;
            let support_count: usize = fields[8].parse().map_err(|_| Error::Parse {
                path: path_str.clone(),
                line: lineno,
                message: format!("invalid support_count: {:?}", fields[8]),
            })?;
            store.insert(Passport {
                key,
                signature,
                support_count,
            });
        }
        Ok(store)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
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
    fn exact_line_recovered() {
        let seg = segment_from_fn(10, 0.0, 2.0, |u| 2.0 * u + 1.0);
        let sig = fit_signature(&seg, 1).unwrap();
        assert!((sig.coefficient_1 - 2.0).abs() < 1e-12);
        assert!((sig.intercept - 1.0).abs() < 1e-12);
        assert_eq!(sig.coefficient_2, 0.0);
        assert_eq!(sig.execution_time, 2.0);
    }

    #[test]
    fn constant_value_recovered() {
        let seg = segment_from_fn(6, 0.0, 1.0, |_| 3.0);
        let sig = fit_signature(&seg, 1).unwrap();
        assert!(sig.coefficient_1.abs() < 1e-12);
        assert!((sig.intercept - 3.0).abs() < 1e-12);
    }

    #[test]
    fn quadratic_recovered() {
        let seg = segment_from_fn(12, 1.0, 4.0, |u| -1.5 * u * u + 0.5 * u + 2.0);
        let sig = fit_signature(&seg, 2).unwrap();
        assert!((sig.coefficient_2 + 1.5).abs() < 1e-10);
        assert!((sig.coefficient_1 - 0.5).abs() < 1e-10);
        assert!((sig.intercept - 2.0).abs() < 1e-10);
    }

    #[test]
    fn too_few_samples_for_degree() {
        let seg = segment_from_fn(2, 0.0, 1.0, |u| u);
        assert!(matches!(
            fit_signature(&seg, 2),
            Err(Error::TooFewSamples { have: 2, need: 3 })
        ));
    }

    #[test]
    fn evaluate_matches_polynomial() {
        let sig = RegressionSignature::new(2, 0.0, 2.0, 1.0, 1.0).unwrap();
        assert_eq!(evaluate_signature(&sig, 0.0).unwrap(), 1.0);
        assert_eq!(evaluate_signature(&sig, 1.0).unwrap(), 3.0);
        let sig = RegressionSignature::new(2, 1.0, 0.0, 0.0, 1.0).unwrap();
        assert_eq!(evaluate_signature(&sig, 0.5).unwrap(), 0.25);
        assert!(matches!(
            evaluate_signature(&sig, 1.5),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn mean_passport_is_coefficient_mean() {
        // Two exact lines: (0, 2, 1) and (0, 4, 3) -> mean (0, 3, 2).
        let a = segment_from_fn(8, 0.0, 1.0, |u| 2.0 * u + 1.0);
        let b = segment_from_fn(8, 0.0, 1.0, |u| 4.0 * u + 3.0);
        let passport = build_mean_passport(&[a, b], 1, &BehaviourLabel::normal()).unwrap();
        assert!((passport.signature.coefficient_1 - 3.0).abs() < 1e-12);
        assert!((passport.signature.intercept - 2.0).abs() < 1e-12);
        assert_eq!(passport.support_count, 2);
    }

    #[test]
    fn single_segment_passport_equals_own_fit() {
        let seg = segment_from_fn(8, 0.0, 1.0, |u| 2.0 * u + 1.0);
        let sig = fit_signature(&seg, 1).unwrap();
        let passport = build_mean_passport(
            std::slice::from_ref(&seg),
            1,
            &BehaviourLabel::normal(),
        )
        .unwrap();
        assert_eq!(passport.signature, sig);
    }

    #[test]
    fn non_normal_segment_rejected() {
        let mut seg = segment_from_fn(8, 0.0, 1.0, |u| u);
        seg.label = BehaviourLabel::new("NoFan");
        assert!(matches!(
            build_mean_passport(&[seg], 1, &BehaviourLabel::normal()),
            Err(Error::NonNormalLabel(_))
        ));
    }

    #[test]
    fn mixed_key_rejected() {
        let a = segment_from_fn(8, 0.0, 1.0, |u| u);
        let mut b = segment_from_fn(8, 0.0, 1.0, |u| u);
        b.phase_type = "image-op".into();
        assert!(matches!(
            build_mean_passport(&[a, b], 1, &BehaviourLabel::normal()),
            Err(Error::MixedKey(_))
        ));
    }

    #[test]
    fn store_roundtrips_through_csv() {
        let seg = segment_from_fn(8, 0.0, 1.0, |u| 2.0 * u + 1.0);
        let mut store = PassportStore::new();
        store.insert(build_mean_passport(&[seg], 1, &BehaviourLabel::normal()).unwrap());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("passports.csv");
        store.write_csv(&path).unwrap();
        let loaded = PassportStore::<f64>::read_csv(&path).unwrap();
        assert_eq!(store, loaded);
    }
}
