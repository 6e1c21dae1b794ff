//! Binary classification metrics and run-time ECDF curves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Confusion {
    pub fn new(tp: u64, tn: u64, fp: u64, fn_: u64) -> Self {
        Confusion { tp, tn, fp, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }
}

/// Counts against `truth`; labels are `+1` (positive) or `-1`.
pub fn confusion(predicted: &[i8], truth: &[i8]) -> Result<Confusion> {
    if predicted.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            got: predicted.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::invalid_arg("cannot evaluate an empty prediction"));
    }
    let mut c = Confusion::default();
    for (&p, &t) in predicted.iter().zip(truth) {
        match (p > 0, t > 0) {
            (true, true) => c.tp += 1,
            (false, false) => c.tn += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

fn nonempty(c: &Confusion) -> Result<f64> {
    match c.total() {
        0 => Err(Error::invalid_arg("metrics need at least one point")),
        m => Ok(m as f64),
    }
}

pub fn accuracy(c: &Confusion) -> Result<f64> {
    Ok((c.tp + c.tn) as f64 / nonempty(c)?)
}

/// Matthews correlation coefficient; 0 when a marginal count is 0.
pub fn mcc(c: &Confusion) -> Result<f64> {
    nonempty(c)?;
    let (tp, tn, fp, fn_) = (c.tp as f64, c.tn as f64, c.fp as f64, c.fn_ as f64);
    let den = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(((tp * tn - fp * fn_) / den.sqrt()).clamp(-1.0, 1.0))
}

/// Maps MCC from `[-1, 1]` onto a 0-100 percentage scale.
pub fn mcc_percent(mcc: f64) -> f64 {
    (mcc + 1.0) / 2.0 * 100.0
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub mcc: f64,
}

impl Metrics {
    pub fn from_confusion(c: &Confusion) -> Result<Self> {
        Ok(Metrics {
            accuracy: accuracy(c)?,
            mcc: mcc(c)?,
        })
    }

    pub fn evaluate(predicted: &[i8], truth: &[i8]) -> Result<Self> {
        Self::from_confusion(&confusion(predicted, truth)?)
    }

    /// Accuracy and MCC as percentages.
    pub fn percent(&self) -> Metrics {
        Metrics {
            accuracy: 100.0 * self.accuracy,
            mcc: mcc_percent(self.mcc),
        }
    }
}

/// `a - b`; positive values mean `a` is better.
pub fn deltas(a: &Metrics, b: &Metrics) -> Metrics {
    Metrics {
        accuracy: a.accuracy - b.accuracy,
        mcc: a.mcc - b.mcc,
    }
}

/// Empirical distribution of solve times, censored at a time limit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ecdf {
    pub instances: usize,
    pub limit: f64,
    /// `(sigma, gamma(sigma))` at every jump, increasing in both.
    pub breakpoints: Vec<(f64, f64)>,
}

impl Ecdf {
    /// Share of instances solved within `sigma` seconds.
    pub fn gamma(&self, sigma: f64) -> f64 {
        let k = self.breakpoints.partition_point(|&(s, _)| s <= sigma);
        if k == 0 {
            0.0
        } else {
            self.breakpoints[k - 1].1
        }
    }

    pub fn solved_fraction(&self) -> f64 {
        self.breakpoints.last().map_or(0.0, |&(_, g)| g)
    }
}

/// ECDF of `times`; entries above `limit` (or infinite, for unsolved runs)
/// never count as solved.
pub fn ecdf(times: &[f64], limit: f64) -> Result<Ecdf> {
    if times.is_empty() {
        return Err(Error::invalid_arg("ECDF of an empty instance set"));
    }
    if times.iter().any(|t| t.is_nan() || *t < 0.0) {
        return Err(Error::invalid_arg("times must be nonnegative"));
    }
    let n = times.len() as f64;
    let mut solved: Vec<f64> = times.iter().copied().filter(|&t| t <= limit).collect();
    solved.sort_by(f64::total_cmp);
    let mut breakpoints: Vec<(f64, f64)> = Vec::new();
    for (k, &t) in solved.iter().enumerate() {
        let g = (k + 1) as f64 / n;
        match breakpoints.last_mut() {
            Some(last) if last.0 == t => last.1 = g,
            _ => breakpoints.push((t, g)),
        }
    }
    Ok(Ecdf {
        instances: times.len(),
        limit,
        breakpoints,
    })
}

/// Median of finite values (mean of the middle pair for even counts).
pub fn median(values: &[f64]) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[k] } else { 0.5 * (v[k - 1] + v[k]) })
}

/// `label,sigma,gamma` rows for several curves.
pub fn ecdf_csv(curves: &[(String, Ecdf)]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["approach", "sigma", "gamma"])?;
    for (label, e) in curves {
        for &(s, g) in &e.breakpoints {
            w.write_record([label.as_str(), &s.to_string(), &g.to_string()])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Export(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Export(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn confusion_examples() {
        assert_eq!(confusion(&[1, -1], &[1, -1]).unwrap(), Confusion::new(1, 1, 0, 0));
        assert_eq!(confusion(&[-1, 1], &[1, -1]).unwrap(), Confusion::new(0, 0, 1, 1));
        assert_eq!(confusion(&[1, 1, -1, -1], &[1, -1, 1, -1]).unwrap(), Confusion::new(1, 1, 1, 1));
        assert!(confusion(&[1], &[1, 1]).is_err());
        assert!(confusion(&[], &[]).is_err());
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(&Confusion::new(3, 2, 0, 0)).unwrap(), 1.0);
        assert_eq!(accuracy(&Confusion::new(0, 0, 2, 3)).unwrap(), 0.0);
        assert_eq!(accuracy(&Confusion::new(1, 1, 1, 1)).unwrap(), 0.5);
        assert!(accuracy(&Confusion::default()).is_err());
    }

    #[test]
    fn mcc_examples() {
        assert_eq!(mcc(&Confusion::new(5, 5, 0, 0)).unwrap(), 1.0);
        assert_eq!(mcc(&Confusion::new(0, 0, 5, 5)).unwrap(), -1.0);
        assert_eq!(mcc(&Confusion::new(5, 0, 5, 0)).unwrap(), 0.0);
        assert_eq!(mcc_percent(0.0), 50.0);
        assert!(mcc(&Confusion::default()).is_err());
    }

    #[test]
    fn delta_sign() {
        let a = Metrics { accuracy: 0.75, mcc: 0.5 };
        let b = Metrics { accuracy: 0.70, mcc: 0.5 };
        let d = deltas(&a, &b);
        assert!((d.accuracy - 0.05).abs() < 1e-12);
        assert_eq!(d.mcc, 0.0);
        assert_eq!(deltas(&a, &a), Metrics::default());
    }

    #[test]
    fn ecdf_examples() {
        let e = ecdf(&[1.0, 10.0, 8000.0], 7200.0).unwrap();
        assert_eq!(e.gamma(100.0), 2.0 / 3.0);
        assert_eq!(e.gamma(f64::INFINITY), 2.0 / 3.0);
        assert_eq!(e.gamma(0.5), 0.0);
        let e = ecdf(&[9000.0, f64::INFINITY], 7200.0).unwrap();
        assert!(e.breakpoints.is_empty());
        assert_eq!(e.gamma(1e9), 0.0);
        let e = ecdf(&[3.0; 4], 7200.0).unwrap();
        assert_eq!(e.breakpoints, vec![(3.0, 1.0)]);
        assert!(ecdf(&[], 1.0).is_err());
        assert!(ecdf(&[-1.0], 1.0).is_err());
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[f64::NAN]), None);
    }

    #[test]
    fn csv_output() {
        let e = ecdf(&[1.0, 2.0], 10.0).unwrap();
        let text = ecdf_csv(&[("rf".into(), e)]).unwrap();
        assert_eq!(text, "approach,sigma,gamma\nrf,1,0.5\nrf,2,1\n");
    }
}
