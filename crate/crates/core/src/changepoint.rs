//! Sliding-window change-point detection in dynamic networks: the scan
//! statistic, h-local maximizers, the dynamic threshold, and the estimated
//! change-point set.
//!
//! Times are 1-based to match the series indexing convention (`A_t` for
//! t = 1..m); candidate positions run over t = h..m-h so both windows fit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::Estimator;
use crate::linalg::largest_singular_value;
use crate::model::{AdjacencyMatrix, LinkProbabilityMatrix, NetworkSample};
use crate::twosample::{build_zhat, build_ztilde, tw1_statistic};
use crate::tw1::Tw1Table;

/// A time-ordered series of adjacency matrices of uniform order.
#[derive(Debug, Clone)]
pub struct DynamicNetworkSeries {
    matrices: Vec<AdjacencyMatrix>,
}

impl DynamicNetworkSeries {
    pub fn new(matrices: Vec<AdjacencyMatrix>) -> Result<Self> {
        if matrices.len() < 2 {
            return Err(Error::InvalidInput("series needs at least 2 networks".into()));
        }
        let n = matrices[0].order();
        if matrices.iter().any(|a| a.order() != n) {
            return Err(Error::InvalidInput("series mixes network orders".into()));
        }
        Ok(Self { matrices })
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn order(&self) -> usize {
        self.matrices[0].order()
    }

    pub fn matrices(&self) -> &[AdjacencyMatrix] {
        &self.matrices
    }

    /// Networks at times t - h + 1 ..= t (left) and t + 1 ..= t + h (right).
    fn windows(&self, t: usize, h: usize) -> Result<(NetworkSample, NetworkSample)> {
        let m = self.len();
        if t < h || t > m - h {
            return Err(Error::Domain(format!(
                "scan position {t} outside [{h}, {}]",
                m - h
            )));
        }
        let left = NetworkSample::new(self.matrices[t - h..t].to_vec())?;
        let right = NetworkSample::new(self.matrices[t..t + h].to_vec())?;
        Ok((left, right))
    }
}

/// Scan configuration. `window` defaults to round(sqrt(m)); 2h <= m is
/// required. `alpha_override` replaces the sample-size-driven threshold
/// level when set.
#[derive(Debug, Clone)]
pub struct ScanConfig {
    pub window: Option<usize>,
    pub estimator: Estimator,
    pub alpha_override: Option<f64>,
}

impl ScanConfig {
    pub fn new(estimator: Estimator) -> Self {
        Self {
            window: None,
            estimator,
            alpha_override: None,
        }
    }

    pub fn with_window(mut self, h: usize) -> Self {
        self.window = Some(h);
        self
    }

    pub fn resolve_window(&self, m: usize) -> Result<usize> {
        let h = match self.window {
            Some(h) => h,
            None => (m as f64).sqrt().round() as usize,
        };
        if h < 2 {
            return Err(Error::InvalidInput(format!("window h = {h} must be >= 2")));
        }
        if 2 * h > m {
            return Err(Error::InvalidInput(format!(
                "window h = {h} too large for series length {m} (need 2h <= m)"
            )));
        }
        Ok(h)
    }
}

/// One scan position in the per-candidate trace. `threshold` is populated
/// for h-local maximizers only; the thresholding rule never consults it
/// elsewhere.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidateTrace {
    pub t: usize,
    pub scan: f64,
    pub threshold: Option<f64>,
    pub is_local_max: bool,
    pub selected: bool,
}

/// Estimated change-point set with the full per-candidate trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChangePointResult {
    pub estimated: Vec<usize>,
    pub per_candidate: Vec<CandidateTrace>,
    pub window: usize,
    pub estimator: String,
    /// Count of threshold quantile requests clamped at the table edge.
    pub quantile_clamped: usize,
}

/// T(t, h): the two-sample statistic on the h networks before vs after t.
pub fn scan_statistic(
    series: &DynamicNetworkSeries,
    t: usize,
    h: usize,
    estimator: &Estimator,
) -> Result<f64> {
    let (left, right) = series.windows(t, h)?;
    let p1 = estimator.estimate(&left)?;
    let p2 = estimator.estimate(&right)?;
    let z = build_zhat(&left, &right, &p1, &p2)?;
    Ok(tw1_statistic(&z))
}

/// h-local maximizers of a value map over t = h..m-h. On exact plateaus only
/// the smallest t is kept, so one flat peak reports once.
pub fn local_maximizers(values: &[(usize, f64)], h: usize) -> Vec<usize> {
    let mut out = Vec::new();
    for (idx, &(t, v)) in values.iter().enumerate() {
        let mut is_max = true;
        for &(tp, vp) in &values[..idx] {
            if tp + h > t && vp >= v {
                is_max = false; // an earlier equal value owns the plateau
                break;
            }
        }
        if is_max {
            for &(tp, vp) in &values[idx + 1..] {
                if tp >= t + h {
                    break;
                }
                if vp > v {
                    is_max = false;
                    break;
                }
            }
        }
        if is_max {
            out.push(t);
        }
    }
    out
}

/// The threshold level alpha = 1/2 - (1 - 1/n)^{1/(2h)} / 2.
pub fn threshold_alpha(n: usize, h: usize) -> f64 {
    0.5 - 0.5 * (1.0 - 1.0 / n as f64).powf(1.0 / (2.0 * h as f64))
}

/// Dynamic threshold at a candidate: max{tau_alpha, n^{2/3} (delta - 4) -
/// tau_alpha} with delta the largest singular value of the plug-in signal
/// matrix V1(t, h). Returns the threshold and whether the quantile request
/// was clamped at the table edge.
pub fn dynamic_threshold(
    h: usize,
    n: usize,
    p1_hat: &LinkProbabilityMatrix,
    p2_hat: &LinkProbabilityMatrix,
    table: &Tw1Table,
    alpha_override: Option<f64>,
) -> Result<(f64, bool)> {
    let v1 = build_ztilde(p1_hat, p2_hat, h, h)?;
    let delta = largest_singular_value(v1.matrix());
    let alpha = alpha_override.unwrap_or_else(|| threshold_alpha(n, h));
    let (tau, clamped) = table.quantile_with_flag(1.0 - alpha)?;
    let signal = (n as f64).powf(2.0 / 3.0) * (delta - 4.0) - tau;
    Ok((tau.max(signal), clamped))
}

/// Full detection pass: scan all candidate positions, extract h-local
/// maximizers, and keep those strictly above their dynamic threshold.
pub fn detect_changepoints(
    series: &DynamicNetworkSeries,
    cfg: &ScanConfig,
    table: &Tw1Table,
) -> Result<ChangePointResult> {
    let m = series.len();
    let n = series.order();
    let h = cfg.resolve_window(m)?;

    let mut values = Vec::with_capacity(m - 2 * h + 1);
    for t in h..=(m - h) {
        values.push((t, scan_statistic(series, t, h, &cfg.estimator)?));
    }
    let maxima = local_maximizers(&values, h);

    let mut estimated = Vec::new();
    let mut per_candidate = Vec::with_capacity(values.len());
    let mut clamp_count = 0usize;
    for &(t, scan) in &values {
        let is_local_max = maxima.contains(&t);
        let mut threshold = None;
        let mut selected = false;
        if is_local_max {
            let (left, right) = series.windows(t, h)?;
            let p1 = cfg.estimator.estimate(&left)?;
            let p2 = cfg.estimator.estimate(&right)?;
            let (delta, clamped) =
                dynamic_threshold(h, n, &p1, &p2, table, cfg.alpha_override)?;
            if clamped {
                clamp_count += 1;
            }
            threshold = Some(delta);
            selected = scan > delta; // strict, by the thresholding rule
            if selected {
                estimated.push(t);
            }
        }
        per_candidate.push(CandidateTrace {
            t,
            scan,
            threshold,
            is_local_max,
            selected,
        });
    }
    Ok(ChangePointResult {
        estimated,
        per_candidate,
        window: h,
        estimator: cfg.estimator.name().to_string(),
        quantile_clamped: clamp_count,
    })
}
