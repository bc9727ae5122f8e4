//! Small numeric helpers shared by the simulator and the test suites:
//! pairwise summation, moment summaries, and two classical goodness-of-fit
//! statistics.

/// Pairwise (cascade) summation. Deterministic for a fixed slice and more
/// accurate than left-to-right accumulation on long inputs.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    pairwise_sum_by(xs, |&x| x)
}

/// Pairwise summation of `f` applied to each element.
pub fn pairwise_sum_by<T, F: Fn(&T) -> f64 + Copy>(xs: &[T], f: F) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().map(f).sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum_by(&xs[..mid], f) + pairwise_sum_by(&xs[mid..], f)
}

/// Mean of a slice via pairwise summation.
pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    pairwise_sum(xs) / xs.len() as f64
}

/// Population variance (biased, `1/n`) via pairwise summation.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let v = pairwise_sum_by(xs, |&x| (x - m) * (x - m)) / xs.len() as f64;
    v.max(0.0)
}

/// Two-sided Kolmogorov-Smirnov distance between the empirical CDF of
/// `samples` and a reference CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> f64 {
    assert!(!samples.is_empty());
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    let mut d = 0.0_f64;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((f - lo).abs()).max((hi - f).abs());
    }
    d
}

/// Pearson chi-square goodness-of-fit p-value for observed counts against
/// expected counts. Bins with expected count below `min_expected` are pooled
/// into their right neighbour.
pub fn chi2_gof_pvalue(observed: &[f64], expected: &[f64], min_expected: f64) -> f64 {
    assert_eq!(observed.len(), expected.len());
    let mut obs_pooled = Vec::new();
    let mut exp_pooled = Vec::new();
    let (mut acc_o, mut acc_e) = (0.0, 0.0);
    for (&o, &e) in observed.iter().zip(expected) {
        acc_o += o;
        acc_e += e;
        if acc_e >= min_expected {
            obs_pooled.push(acc_o);
            exp_pooled.push(acc_e);
            acc_o = 0.0;
            acc_e = 0.0;
        }
    }
    if acc_e > 0.0 {
        if let (Some(o), Some(e)) = (obs_pooled.last_mut(), exp_pooled.last_mut()) {
            *o += acc_o;
            *e += acc_e;
        } else {
            obs_pooled.push(acc_o);
            exp_pooled.push(acc_e);
        }
    }
    if obs_pooled.len() < 2 {
        return 1.0;
    }
    let stat: f64 = obs_pooled
        .iter()
        .zip(&exp_pooled)
        .map(|(&o, &e)| (o - e) * (o - e) / e)
        .sum();
    let dof = (obs_pooled.len() - 1) as f64;
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let chi = ChiSquared::new(dof).expect("dof >= 1");
    1.0 - chi.cdf(stat)
}

/// Ordinary least-squares slope of `y` against `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let mx = mean(x);
    let my = mean(y);
    let sxy: f64 = x.iter().zip(y).map(|(&a, &b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|&a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_small_input() {
        let xs: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 5050.0);
    }

    #[test]
    fn ks_of_exact_uniform_grid_is_small() {
        let n = 1000;
        let mut xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_distance(&mut xs, |x| x.clamp(0.0, 1.0));
        assert!(d <= 0.5 / n as f64 + 1e-12, "d = {d}");
    }

    #[test]
    fn chi2_accepts_exact_fit() {
        let expected = [10.0, 20.0, 30.0, 40.0];
        let p = chi2_gof_pvalue(&expected, &expected, 5.0);
        assert!(p > 0.99);
    }

    #[test]
    fn ols_slope_recovers_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [2.0, 4.0, 6.0, 8.0];
        assert!((ols_slope(&x, &y) - 2.0).abs() < 1e-12);
    }
}
