//! Descriptive statistics for importance columns.

use crate::quantile::{sorted_copy, type7};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub mean_abs: f64,
    pub median: f64,
    /// Sample variance (`n - 1` denominator); 0 for a single value.
    pub variance: f64,
    pub min: f64,
    pub q1: f64,
    pub q3: f64,
    pub max: f64,
}

impl Summary {
    /// `None` for an empty slice.
    pub fn of(xs: &[f64]) -> Option<Summary> {
        if xs.is_empty() {
            return None;
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let variance = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let sorted = sorted_copy(xs);
        let q = |p| type7(&sorted, p).expect("non-empty");
        Some(Summary {
            count: xs.len(),
            mean,
            mean_abs: xs.iter().map(|x| x.abs()).sum::<f64>() / n,
            median: q(0.5),
            variance,
            min: sorted[0],
            q1: q(0.25),
            q3: q(0.75),
            max: sorted[sorted.len() - 1],
        })
    }

    pub fn fields(&self) -> [(&'static str, f64); 9] {
        [
            ("mean", self.mean),
            ("mean_abs", self.mean_abs),
            ("median", self.median),
            ("variance", self.variance),
            ("min", self.min),
            ("q1", self.q1),
            ("q3", self.q3),
            ("max", self.max),
            ("count", self.count as f64),
        ]
    }
}

/// Values of `xs` where `mask` is true.
pub fn select(xs: &[f64], mask: &[bool]) -> Vec<f64> {
    xs.iter().zip(mask).filter(|(_, &m)| m).map(|(x, _)| *x).collect()
}

/// Pearson correlation; `None` when either side has zero variance or fewer
/// than two points.
pub fn correlation(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Ratio of two means, `None` when undefined.
pub fn ratio(num: f64, den: f64) -> Option<f64> {
    if den == 0.0 || !num.is_finite() || !den.is_finite() {
        None
    } else {
        Some(num / den)
    }
}
