//! Type-7 sample quantiles (linear interpolation between order statistics,
//! `h = (n - 1) p + 1` in 1-based terms).

/// Quantile at probability `p` of an ascending slice. `None` for an empty
/// slice or `p` outside `[0, 1]`.
pub fn type7(sorted: &[f64], p: f64) -> Option<f64> {
    if sorted.is_empty() || !(0.0..=1.0).contains(&p) {
        return None;
    }
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    if lo + 1 >= sorted.len() {
        return Some(sorted[sorted.len() - 1]);
    }
    let frac = h - lo as f64;
    Some(interpolate(sorted, lo, frac))
}

/// Quantile at the rational probability `num / den`, locating the order
/// statistic with integer arithmetic so that grid points landing exactly on an
/// observation return it bit-for-bit.
pub fn type7_rational(sorted: &[f64], num: usize, den: usize) -> Option<f64> {
    if sorted.is_empty() || den == 0 || num > den {
        return None;
    }
    let scaled = (sorted.len() - 1) * num;
    let lo = scaled / den;
    let rem = scaled % den;
    if rem == 0 {
        return Some(sorted[lo]);
    }
    Some(interpolate(sorted, lo, rem as f64 / den as f64))
}

fn interpolate(sorted: &[f64], lo: usize, frac: f64) -> f64 {
    if frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

pub fn sorted_copy(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}
