//! The three two-sample tests on network populations: the Tracy-Widom
//! calibrated singular-value test and the chi-squared / normal-type
//! competitors, plus the standardized-matrix constructions they share.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::estimators::Estimator;
use crate::linalg::{largest_singular_value, DenseSymMatrix};
use crate::model::{LinkProbabilityMatrix, NetworkSample};
use crate::tw1::Tw1Table;

/// Variance floor: estimated probabilities are clamped into
/// [FLOOR, 1 - FLOOR] inside standardization denominators only, so an
/// estimate that hits {0, 1} under sparsity cannot zero a denominator.
pub const VARIANCE_FLOOR: f64 = 1e-6;

/// A standardized difference matrix (Z-hat, Z-tilde or V1), with a count of
/// how many denominators needed the variance floor.
#[derive(Debug, Clone)]
pub struct StandardizedMatrix {
    matrix: DenseSymMatrix,
    variance_floor_hits: usize,
}

impl StandardizedMatrix {
    pub fn matrix(&self) -> &DenseSymMatrix {
        &self.matrix
    }

    pub fn order(&self) -> usize {
        self.matrix.order()
    }

    pub fn variance_floor_hits(&self) -> usize {
        self.variance_floor_hits
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestFamily {
    Tw1,
    ChiSq,
    NType,
}

/// Outcome of one two-sample test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestResult {
    pub family: TestFamily,
    pub statistic: f64,
    /// Rejection boundaries: one upper threshold for TW1, [lower, upper]
    /// for the two-sided chi-squared region, one two-sided |T| bound for
    /// the N-type test.
    pub thresholds: Vec<f64>,
    pub alpha: f64,
    pub reject: bool,
    pub diagnostics: BTreeMap<String, serde_json::Value>,
}

fn standardize(
    numerator: impl Fn(usize, usize) -> f64,
    p1: &LinkProbabilityMatrix,
    p2: &LinkProbabilityMatrix,
    m1: usize,
    m2: usize,
) -> Result<StandardizedMatrix> {
    let n = p1.order();
    if p2.order() != n {
        return Err(Error::InvalidInput(format!(
            "order mismatch: {n} vs {}",
            p2.order()
        )));
    }
    if m1 == 0 || m2 == 0 {
        return Err(Error::InvalidInput("sample sizes must be >= 1".into()));
    }
    let mut hits = 0usize;
    let mut clamped = |p: f64| -> f64 {
        let c = p.clamp(VARIANCE_FLOOR, 1.0 - VARIANCE_FLOOR);
        if c != p {
            hits += 1;
        }
        c
    };
    let mut z = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let q1 = clamped(p1.get(i, j));
            let q2 = clamped(p2.get(i, j));
            let var = (n as f64 - 1.0)
                * (q1 * (1.0 - q1) / m1 as f64 + q2 * (1.0 - q2) / m2 as f64);
            let v = numerator(i, j) / var.sqrt();
            z[(i, j)] = v;
            z[(j, i)] = v;
        }
    }
    Ok(StandardizedMatrix {
        matrix: DenseSymMatrix::new(z)?,
        variance_floor_hits: hits,
    })
}

/// The empirical standardized matrix Z-hat: entrywise mean difference of the
/// two samples over its estimated standard deviation.
pub fn build_zhat(
    s1: &NetworkSample,
    s2: &NetworkSample,
    p1_hat: &LinkProbabilityMatrix,
    p2_hat: &LinkProbabilityMatrix,
) -> Result<StandardizedMatrix> {
    let n = s1.order();
    if s2.order() != n || p1_hat.order() != n || p2_hat.order() != n {
        return Err(Error::InvalidInput("order mismatch across inputs".into()));
    }
    let (a1, a2) = (s1.mean(), s2.mean());
    standardize(
        |i, j| a1[(i, j)] - a2[(i, j)],
        p1_hat,
        p2_hat,
        s1.len(),
        s2.len(),
    )
}

/// The signal matrix Z-tilde: link-probability difference over the same
/// standardization. With plug-in estimates this is the V1 matrix of the
/// change-point threshold.
pub fn build_ztilde(
    p1: &LinkProbabilityMatrix,
    p2: &LinkProbabilityMatrix,
    m1: usize,
    m2: usize,
) -> Result<StandardizedMatrix> {
    standardize(|i, j| p1.get(i, j) - p2.get(i, j), p1, p2, m1, m2)
}

/// T = n^{2/3} (sigma_1(Z) - 2).
pub fn tw1_statistic(z: &StandardizedMatrix) -> f64 {
    let n = z.order() as f64;
    n.powf(2.0 / 3.0) * (largest_singular_value(z.matrix()) - 2.0)
}

/// The Tracy-Widom calibrated test: estimate both link matrices, standardize
/// the mean difference, and compare T against the upper alpha/2 quantile.
/// Rejection is the closed inequality T >= tau.
pub fn tw1_test(
    s1: &NetworkSample,
    s2: &NetworkSample,
    estimator: &Estimator,
    alpha: f64,
    table: &Tw1Table,
) -> Result<TestResult> {
    check_alpha(alpha)?;
    let p1 = estimator.estimate(s1)?;
    let p2 = estimator.estimate(s2)?;
    let z = build_zhat(s1, s2, &p1, &p2)?;
    let statistic = tw1_statistic(&z);
    let (tau, clamped) = table.quantile_with_flag(1.0 - alpha / 2.0)?;
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("estimator".into(), estimator.name().into());
    diagnostics.insert(
        "variance_floor_hits".into(),
        (z.variance_floor_hits() as u64).into(),
    );
    diagnostics.insert("m1".into(), (s1.len() as u64).into());
    diagnostics.insert("m2".into(), (s2.len() as u64).into());
    if clamped {
        diagnostics.insert("quantile_clamped".into(), true.into());
    }
    Ok(TestResult {
        family: TestFamily::Tw1,
        statistic,
        thresholds: vec![tau],
        alpha,
        reject: statistic >= tau,
        diagnostics,
    })
}

/// Chi-squared-type test summed over unordered node pairs. Pairs whose
/// pooled variance is zero are excluded and the degrees of freedom reduced.
/// The default rejection region is two-sided in the chi-squared(df) law;
/// `one_sided` keeps only the upper tail.
pub fn chi2_test_with_options(
    s1: &NetworkSample,
    s2: &NetworkSample,
    alpha: f64,
    one_sided: bool,
) -> Result<TestResult> {
    check_alpha(alpha)?;
    let m = equal_sample_sizes(s1, s2)?;
    if m < 2 {
        return Err(Error::Unsupported(
            "chi-squared-type test needs m >= 2 replicates".into(),
        ));
    }
    let n = s1.order();
    let (a1, a2) = (s1.mean(), s2.mean());
    let mut statistic = 0.0;
    let mut df = 0usize;
    let mut excluded = 0usize;
    for i in 0..n {
        for j in (i + 1)..n {
            // for 0/1 entries, sum_k (A - Abar)^2 = m * Abar (1 - Abar)
            let v1 = a1[(i, j)] * (1.0 - a1[(i, j)]);
            let v2 = a2[(i, j)] * (1.0 - a2[(i, j)]);
            let denom = (v1 + v2) / (m as f64 - 1.0);
            if denom > 0.0 {
                let d = a1[(i, j)] - a2[(i, j)];
                statistic += d * d / denom;
                df += 1;
            } else {
                excluded += 1;
            }
        }
    }
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("df".into(), (df as u64).into());
    diagnostics.insert("excluded_pairs".into(), (excluded as u64).into());
    diagnostics.insert("m".into(), (m as u64).into());
    let (thresholds, reject) = if df == 0 {
        diagnostics.insert("degenerate".into(), true.into());
        (vec![], false)
    } else {
        let chi = ChiSquared::new(df as f64)
            .map_err(|e| Error::Estimation(format!("chi-squared({df}): {e}")))?;
        if one_sided {
            let hi = chi.inverse_cdf(1.0 - alpha);
            (vec![hi], statistic > hi)
        } else {
            let lo = chi.inverse_cdf(alpha / 2.0);
            let hi = chi.inverse_cdf(1.0 - alpha / 2.0);
            (vec![lo, hi], statistic < lo || statistic > hi)
        }
    };
    Ok(TestResult {
        family: TestFamily::ChiSq,
        statistic,
        thresholds,
        alpha,
        reject,
        diagnostics,
    })
}

pub fn chi2_test(s1: &NetworkSample, s2: &NetworkSample, alpha: f64) -> Result<TestResult> {
    chi2_test_with_options(s1, s2, alpha, false)
}

/// Normal-type test on split halves: replicates k <= floor(m/2) against the
/// rest. A zero denominator defines the statistic as 0 with a diagnostic
/// flag. Rejects when |T| reaches the upper alpha/2 normal quantile.
pub fn n_type_test(s1: &NetworkSample, s2: &NetworkSample, alpha: f64) -> Result<TestResult> {
    check_alpha(alpha)?;
    let m = equal_sample_sizes(s1, s2)?;
    if m < 2 {
        return Err(Error::Unsupported(
            "N-type test needs m >= 2 replicates".into(),
        ));
    }
    let n = s1.order();
    let half = m / 2;
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let mut d_first = 0i64;
            let mut d_second = 0i64;
            let mut s_first = 0i64;
            let mut s_second = 0i64;
            for k in 0..m {
                let x1 = s1.matrices()[k].get(i, j) as i64;
                let x2 = s2.matrices()[k].get(i, j) as i64;
                if k < half {
                    d_first += x1 - x2;
                    s_first += x1 + x2;
                } else {
                    d_second += x1 - x2;
                    s_second += x1 + x2;
                }
            }
            num += (d_first * d_second) as f64;
            den += (s_first * s_second) as f64;
        }
    }
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("m".into(), (m as u64).into());
    diagnostics.insert("split".into(), (half as u64).into());
    let statistic = if den > 0.0 {
        num / den.sqrt()
    } else {
        diagnostics.insert("zero_denominator".into(), true.into());
        0.0
    };
    let normal = Normal::standard();
    let z = normal.inverse_cdf(1.0 - alpha / 2.0);
    Ok(TestResult {
        family: TestFamily::NType,
        statistic,
        thresholds: vec![z],
        alpha,
        reject: statistic.abs() >= z,
        diagnostics,
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must be in (0,1), got {alpha}")));
    }
    Ok(())
}

fn equal_sample_sizes(s1: &NetworkSample, s2: &NetworkSample) -> Result<usize> {
    if s1.order() != s2.order() {
        return Err(Error::InvalidInput("order mismatch between samples".into()));
    }
    if s1.len() != s2.len() {
        return Err(Error::Unsupported(format!(
            "this test assumes equal sample sizes, got m1 = {} and m2 = {}",
            s1.len(),
            s2.len()
        )));
    }
    Ok(s1.len())
}
