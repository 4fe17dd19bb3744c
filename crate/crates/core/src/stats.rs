//! Statistical kernels: Welch's t-test, one-sample t-test, and the
//! regularized incomplete beta function used for p-values.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Result of a two-sided t-test.
///
/// `t` is `f64::INFINITY` (serialized as JSON `null`) in the degenerate
/// zero-variance, unequal-means case; `p_two_sided` is then reported as
/// `1e-300` standing in for 0+.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t: f64,
    pub df: f64,
    pub p_two_sided: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("domain violation: {0}")]
    Domain(String),
}

/// Floor used to report p = 0+ without emitting an exact zero.
pub const P_FLOOR: f64 = 1e-300;

pub fn mean(data: &[f64]) -> f64 {
    data.iter().sum::<f64>() / data.len() as f64
}

/// Sample variance (n-1 denominator). Zero for n < 2.
pub fn sample_variance(data: &[f64]) -> f64 {
    if data.len() < 2 {
        return 0.0;
    }
    let m = mean(data);
    data.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (data.len() - 1) as f64
}

/// Sample standard deviation (n-1 denominator). Zero for n < 2.
pub fn sample_std(data: &[f64]) -> f64 {
    sample_variance(data).sqrt()
}

/// Welch's t-test for two independent samples with unequal variances.
///
/// Degenerate case (both variances zero): equal means give t = 0, p = 1
/// exactly; unequal means give an infinite t and p = `P_FLOOR`, with
/// df = n_a + n_b - 2 in both cases.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<TTestResult, StatsError> {
    if a.len() < 2 {
        return Err(StatsError::TooFewSamples { needed: 2, got: a.len() });
    }
    if b.len() < 2 {
        return Err(StatsError::TooFewSamples { needed: 2, got: b.len() });
    }
    let na = a.len() as f64;
    let nb = b.len() as f64;
    let ma = mean(a);
    let mb = mean(b);
    let va = sample_variance(a);
    let vb = sample_variance(b);

    if va == 0.0 && vb == 0.0 {
        let df = na + nb - 2.0;
        if ma == mb {
            return Ok(TTestResult { t: 0.0, df, p_two_sided: 1.0 });
        }
        let t = if ma > mb { f64::INFINITY } else { f64::NEG_INFINITY };
        return Ok(TTestResult { t, df, p_two_sided: P_FLOOR });
    }

    let se2 = va / na + vb / nb;
    let t = (ma - mb) / se2.sqrt();
    let df = se2.powi(2)
        / ((va / na).powi(2) / (na - 1.0) + (vb / nb).powi(2) / (nb - 1.0));
    let p = student_t_p_two_sided(t, df);
    Ok(TTestResult { t, df, p_two_sided: p })
}

/// One-sample two-sided t-test of `sample` against the constant `mu0`.
///
/// Same degenerate-variance convention as `welch_t_test`.
pub fn one_sample_t_test(sample: &[f64], mu0: f64) -> Result<TTestResult, StatsError> {
    if sample.len() < 2 {
        return Err(StatsError::TooFewSamples { needed: 2, got: sample.len() });
    }
    let n = sample.len() as f64;
    let m = mean(sample);
    let v = sample_variance(sample);
    let df = n - 1.0;
    if v == 0.0 {
        if m == mu0 {
            return Ok(TTestResult { t: 0.0, df, p_two_sided: 1.0 });
        }
        let t = if m > mu0 { f64::INFINITY } else { f64::NEG_INFINITY };
        return Ok(TTestResult { t, df, p_two_sided: P_FLOOR });
    }
    let t = (m - mu0) / (v / n).sqrt();
    Ok(TTestResult { t, df, p_two_sided: student_t_p_two_sided(t, df) })
}

/// Two-sided p-value for a t statistic with `df` degrees of freedom:
/// I_x(df/2, 1/2) with x = df/(df + t^2). Exactly 1 at t = 0; never
/// underflows to 0 (floored at `P_FLOOR`, standing in for 0+).
pub fn student_t_p_two_sided(t: f64, df: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    let x = df / (df + t * t);
    incomplete_beta(df / 2.0, 0.5, x)
        .expect("x in [0,1] and df > 0 by construction")
        .max(P_FLOOR)
}

/// Regularized incomplete beta function I_x(a, b) via Lentz's continued
/// fraction, switching through the symmetry relation at
/// x > (a+1)/(a+b+2). Absolute error <= 1e-12 over the tested domain.
pub fn incomplete_beta(a: f64, b: f64, x: f64) -> Result<f64, StatsError> {
    // NaN parameters must land here too, so the comparisons are written to
    // fail them rather than fall through.
    if a.partial_cmp(&0.0) != Some(Ordering::Greater)
        || b.partial_cmp(&0.0) != Some(Ordering::Greater)
    {
        return Err(StatsError::Domain(format!("a and b must be positive, got a={a}, b={b}")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(StatsError::Domain(format!("x must lie in [0,1], got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }

    let ln_beta = ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
    let front = (a * x.ln() + b * (1.0 - x).ln() - ln_beta).exp();
    let value = if x < (a + 1.0) / (a + b + 2.0) {
        front / a * beta_cf(x, a, b)
    } else {
        1.0 - front / b * beta_cf(1.0 - x, b, a)
    };
    Ok(value.clamp(0.0, 1.0))
}

/// Continued fraction for the incomplete beta function (Lentz's algorithm).
fn beta_cf(x: f64, a: f64, b: f64) -> f64 {
    const MAX_ITER: usize = 300;
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-30;

    let mut c = 1.0_f64;
    let mut d = 1.0 - (a + b) * x / (a + 1.0);
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut f = d;

    for m in 1..=MAX_ITER {
        let m = m as f64;

        let num_even = m * (b - m) * x / ((a + 2.0 * m - 1.0) * (a + 2.0 * m));
        d = 1.0 + num_even * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + num_even / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        f *= c * d;

        let num_odd = -(a + m) * (a + b + m) * x / ((a + 2.0 * m) * (a + 2.0 * m + 1.0));
        d = 1.0 + num_odd * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + num_odd / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;

        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    f
}

/// Lanczos approximation (g = 7, 9 coefficients) for ln(Gamma(x)).
pub fn ln_gamma(x: f64) -> f64 {
    #[allow(clippy::excessive_precision)]
    const COEFFS: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];

    if x < 0.5 {
        let s = std::f64::consts::PI / (std::f64::consts::PI * x).sin();
        return s.ln() - ln_gamma(1.0 - x);
    }

    let x = x - 1.0;
    let mut acc = COEFFS[0];
    for (i, &coeff) in COEFFS[1..].iter().enumerate() {
        acc += coeff / (x + 1.0 + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_p_is_exactly_one() {
        let a = [3.0, 4.0, 5.0, 6.0];
        let result = welch_t_test(&a, &a).unwrap();
        assert_eq!(result.p_two_sided, 1.0);
        assert_eq!(result.t, 0.0);
    }

    #[test]
    fn known_welch_example() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [2.0, 3.0, 4.0, 5.0, 6.0];
        let result = welch_t_test(&a, &b).unwrap();
        assert!((result.t + 1.0).abs() < 1e-12, "t = {}", result.t);
        assert!((result.df - 8.0).abs() < 1e-12, "df = {}", result.df);
        assert!((result.p_two_sided - 0.3466).abs() < 5e-4, "p = {}", result.p_two_sided);
    }

    #[test]
    fn swapping_samples_negates_t_keeps_p() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [2.5, 3.5, 4.0, 6.0, 7.0];
        let ab = welch_t_test(&a, &b).unwrap();
        let ba = welch_t_test(&b, &a).unwrap();
        assert_eq!(ab.t, -ba.t);
        assert_eq!(ab.df, ba.df);
        assert_eq!(ab.p_two_sided, ba.p_two_sided);
    }

    #[test]
    fn degenerate_zero_variance_cases() {
        let a = [2.0, 2.0, 2.0];
        let b = [2.0, 2.0];
        let same = welch_t_test(&a, &b).unwrap();
        assert_eq!(same.p_two_sided, 1.0);
        assert_eq!(same.t, 0.0);
        assert_eq!(same.df, 3.0);

        let c = [5.0, 5.0];
        let diff = welch_t_test(&a, &c).unwrap();
        assert_eq!(diff.p_two_sided, P_FLOOR);
        assert!(diff.t.is_infinite() && diff.t < 0.0);
    }

    #[test]
    fn too_few_samples_rejected() {
        assert_eq!(
            welch_t_test(&[1.0], &[1.0, 2.0]).unwrap_err(),
            StatsError::TooFewSamples { needed: 2, got: 1 }
        );
        assert!(one_sample_t_test(&[1.0], 0.5).is_err());
    }

    #[test]
    fn incomplete_beta_boundaries_and_closed_forms() {
        assert_eq!(incomplete_beta(2.0, 3.0, 0.0).unwrap(), 0.0);
        assert_eq!(incomplete_beta(2.0, 3.0, 1.0).unwrap(), 1.0);
        for i in 0..=20 {
            let x = i as f64 / 20.0;
            let val = incomplete_beta(1.0, 1.0, x).unwrap();
            assert!((val - x).abs() <= 1e-12, "I_{x}(1,1) = {val}");
            // Closed form for (2,2): 3x^2 - 2x^3.
            let expect = 3.0 * x * x - 2.0 * x * x * x;
            let got = incomplete_beta(2.0, 2.0, x).unwrap();
            assert!((got - expect).abs() <= 1e-12, "I_{x}(2,2) = {got}, want {expect}");
        }
        assert!((incomplete_beta(2.0, 2.0, 0.5).unwrap() - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn incomplete_beta_symmetry() {
        for &(a, b) in &[(0.5, 0.5), (1.0, 3.0), (2.5, 7.0), (15.0, 0.5)] {
            for i in 1..20 {
                let x = i as f64 / 20.0;
                let lhs = incomplete_beta(a, b, x).unwrap();
                let rhs = 1.0 - incomplete_beta(b, a, 1.0 - x).unwrap();
                assert!((lhs - rhs).abs() <= 1e-12, "a={a} b={b} x={x}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn incomplete_beta_domain_errors() {
        assert!(incomplete_beta(0.0, 1.0, 0.5).is_err());
        assert!(incomplete_beta(1.0, -1.0, 0.5).is_err());
        assert!(incomplete_beta(1.0, 1.0, 1.5).is_err());
        assert!(incomplete_beta(1.0, 1.0, -0.1).is_err());
        assert!(incomplete_beta(1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn ln_gamma_reference_points() {
        assert!(ln_gamma(1.0).abs() < 1e-12);
        assert!(ln_gamma(2.0).abs() < 1e-12);
        assert!((ln_gamma(5.0) - 24.0_f64.ln()).abs() < 1e-12);
        assert!((ln_gamma(0.5) - 0.5 * std::f64::consts::PI.ln()).abs() < 1e-12);
    }

    #[test]
    fn one_sample_t_known_values() {
        // Indicators 24/30 against 0.5: t = (0.8 - 0.5) / sqrt(v/30).
        let mut sample = vec![1.0; 24];
        sample.extend(vec![0.0; 6]);
        let result = one_sample_t_test(&sample, 0.5).unwrap();
        assert_eq!(result.df, 29.0);
        assert!(result.t > 0.0);
        assert!(result.p_two_sided < 0.05);

        let mut split = vec![1.0; 15];
        split.extend(vec![0.0; 15]);
        let even = one_sample_t_test(&split, 0.5).unwrap();
        assert_eq!(even.p_two_sided, 1.0);
        assert_eq!(even.t, 0.0);
    }

    #[test]
    fn p_values_stay_in_unit_interval() {
        for df in [1.0_f64, 2.0, 5.0, 10.0, 30.0] {
            for i in 0..=40 {
                let t = -10.0 + i as f64 * 0.5;
                let p = student_t_p_two_sided(t, df);
                assert!((0.0..=1.0).contains(&p), "df={df} t={t} p={p}");
            }
        }
    }

    #[test]
    fn infinite_t_serializes_as_null() {
        let result = TTestResult { t: f64::INFINITY, df: 3.0, p_two_sided: P_FLOOR };
        let json = serde_json::to_string(&result).unwrap();
        assert!(json.contains("\"t\":null"));
    }
}
