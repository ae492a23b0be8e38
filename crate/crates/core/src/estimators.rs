//! Plug-in estimators of the link probability matrix from a network sample:
//! sample averaging (AVG), SBM block averaging on spectrally clustered
//! communities, and modified neighborhood smoothing (MNBS).

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{LinkProbabilityMatrix, NetworkSample};

/// MNBS tuning: the neighborhood quantile is C log n / (n^{1/2} omega) with
/// omega = min{n^{1/2}, (m log n)^{1/2}}, unless overridden.
#[derive(Debug, Clone, Copy)]
pub struct MnbsConfig {
    pub c: f64,
    pub q_override: Option<f64>,
}

impl Default for MnbsConfig {
    fn default() -> Self {
        Self {
            c: 3.0,
            q_override: None,
        }
    }
}

impl MnbsConfig {
    pub fn with_c(c: f64) -> Self {
        Self {
            c,
            q_override: None,
        }
    }

    pub fn q_for(&self, n: usize, m: usize) -> f64 {
        match self.q_override {
            Some(q) => q,
            None => mnbs_default_q(n, m, self.c),
        }
    }
}

/// SBM estimation: fixed community count, or auto-selection by the largest
/// eigengap of the mean adjacency spectrum capped at `max_k`
/// (default ceil(n / 10)). k-means initialization is seeded for
/// reproducibility.
#[derive(Debug, Clone, Copy)]
pub struct SbmEstimateConfig {
    pub community_count: Option<usize>,
    pub max_k: Option<usize>,
    pub cluster_seed: u64,
}

impl Default for SbmEstimateConfig {
    fn default() -> Self {
        Self {
            community_count: None,
            max_k: None,
            cluster_seed: 0,
        }
    }
}

/// Which plug-in estimator a test should use.
#[derive(Debug, Clone, Copy)]
pub enum Estimator {
    Avg,
    Sbm(SbmEstimateConfig),
    Mnbs(MnbsConfig),
}

impl Estimator {
    pub fn name(&self) -> &'static str {
        match self {
            Estimator::Avg => "AVG",
            Estimator::Sbm(_) => "SBM",
            Estimator::Mnbs(_) => "MNBS",
        }
    }

    pub fn estimate(&self, sample: &NetworkSample) -> Result<LinkProbabilityMatrix> {
        match self {
            Estimator::Avg => estimate_avg(sample),
            Estimator::Sbm(cfg) => estimate_sbm(sample, cfg),
            Estimator::Mnbs(cfg) => estimate_mnbs(sample, cfg),
        }
    }
}

/// P-hat = mean adjacency with the diagonal zeroed.
pub fn estimate_avg(sample: &NetworkSample) -> Result<LinkProbabilityMatrix> {
    let mut m = sample.mean().clone();
    for i in 0..m.nrows() {
        m[(i, i)] = 0.0;
    }
    LinkProbabilityMatrix::new(m)
}

/// Default MNBS quantile level, clamped into (0, 1).
pub fn mnbs_default_q(n: usize, m: usize, c: f64) -> f64 {
    let nf = n as f64;
    let log_n = nf.ln();
    let omega = nf.sqrt().min((m as f64 * log_n).sqrt());
    let q = c * log_n / (nf.sqrt() * omega);
    q.clamp(1e-6, 1.0 - 1e-6)
}

/// Lower empirical quantile with linear interpolation (type 7).
pub fn quantile_type7(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0);
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    if lo + 1 >= n {
        return sorted[n - 1];
    }
    let gamma = h - lo as f64;
    sorted[lo] + gamma * (sorted[lo + 1] - sorted[lo])
}

/// Modified neighborhood smoothing. Row distances are
/// d^2(i, i') = max_{k != i, i'} |<Abar_i - Abar_i', Abar_k>| / n with the
/// inner product taken over coordinates other than i and i' (self-edge
/// positions are structural zeros); the division by n is a fixed rescaling
/// that leaves the quantile-based neighborhoods unchanged.
pub fn estimate_mnbs(sample: &NetworkSample, cfg: &MnbsConfig) -> Result<LinkProbabilityMatrix> {
    let n = sample.order();
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "MNBS needs order >= 3, got {n}"
        )));
    }
    let abar = sample.mean();
    let q = cfg.q_for(n, sample.len());

    // Gram trick: <Abar_i, Abar_k> = (Abar^2)[i, k] since Abar is symmetric.
    let gram = abar * abar;

    let neighborhoods: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut dist: Vec<(usize, f64)> = Vec::with_capacity(n - 1);
            for ip in 0..n {
                if ip == i {
                    continue;
                }
                let a_iip = abar[(i, ip)];
                let mut best = 0.0f64;
                for k in 0..n {
                    if k == i || k == ip {
                        continue;
                    }
                    let inner = gram[(i, k)] - gram[(ip, k)]
                        + a_iip * (abar[(k, i)] - abar[(k, ip)]);
                    best = best.max(inner.abs());
                }
                dist.push((ip, best / n as f64));
            }
            let mut sorted: Vec<f64> = dist.iter().map(|&(_, d)| d).collect();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let threshold = quantile_type7(&sorted, q);
            // closed inequality: ties at the boundary are all included
            dist.iter()
                .filter(|&&(_, d)| d <= threshold)
                .map(|&(ip, _)| ip)
                .collect()
        })
        .collect();

    let mut p_tilde = DMatrix::zeros(n, n);
    for i in 0..n {
        let ni = &neighborhoods[i];
        debug_assert!(!ni.is_empty());
        let inv = 1.0 / ni.len() as f64;
        for j in 0..n {
            let mut acc = 0.0;
            for &ip in ni {
                acc += abar[(ip, j)];
            }
            p_tilde[(i, j)] = acc * inv;
        }
    }
    let mut p_hat = (&p_tilde + p_tilde.transpose()) * 0.5;
    for i in 0..n {
        p_hat[(i, i)] = 0.0;
        for j in 0..n {
            p_hat[(i, j)] = p_hat[(i, j)].clamp(0.0, 1.0);
        }
    }
    LinkProbabilityMatrix::new(p_hat)
}

/// Picks the community count by the largest gap in the absolute spectrum of
/// the mean adjacency, over K in {1..max_k}.
pub fn select_community_count(sample: &NetworkSample, max_k: usize) -> usize {
    let n = sample.order();
    let max_k = max_k.clamp(1, n - 1);
    let eigs = sample.mean().clone().symmetric_eigenvalues();
    let mut abs: Vec<f64> = eigs.iter().map(|e| e.abs()).collect();
    abs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut best_k = 1;
    let mut best_gap = f64::NEG_INFINITY;
    for k in 1..=max_k {
        let gap = abs[k - 1] - abs[k];
        if gap > best_gap {
            best_gap = gap;
            best_k = k;
        }
    }
    best_k
}

/// Block-pair averaging of the mean adjacency given membership labels
/// (0-based), excluding diagonal entries. Size-1 same-block pairs, which
/// have no off-diagonal cells, fall back to the global off-diagonal mean.
pub fn block_average(
    mean: &DMatrix<f64>,
    labels: &[usize],
    k: usize,
) -> Result<LinkProbabilityMatrix> {
    let n = mean.nrows();
    if labels.len() != n {
        return Err(Error::InvalidInput("label length mismatch".into()));
    }
    let mut sums = vec![0.0f64; k * k];
    let mut counts = vec![0usize; k * k];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let cell = labels[i] * k + labels[j];
            sums[cell] += mean[(i, j)];
            counts[cell] += 1;
        }
    }
    let total_sum: f64 = sums.iter().sum();
    let total_count: usize = counts.iter().sum();
    let global = if total_count > 0 {
        total_sum / total_count as f64
    } else {
        0.0
    };
    let block_mean = |a: usize, b: usize| -> f64 {
        let cell = a * k + b;
        if counts[cell] > 0 {
            sums[cell] / counts[cell] as f64
        } else {
            global
        }
    };
    LinkProbabilityMatrix::from_upper_fn(n, |i, j| {
        let v = 0.5 * (block_mean(labels[i], labels[j]) + block_mean(labels[j], labels[i]));
        v.clamp(0.0, 1.0)
    })
}

/// SBM estimator: spectral clustering of the mean adjacency into K
/// communities, then block-pair averaging.
pub fn estimate_sbm(
    sample: &NetworkSample,
    cfg: &SbmEstimateConfig,
) -> Result<LinkProbabilityMatrix> {
    let n = sample.order();
    let k = match cfg.community_count {
        Some(k) => {
            if k == 0 || k > n {
                return Err(Error::InvalidInput(format!(
                    "community count {k} out of 1..={n}"
                )));
            }
            k
        }
        None => {
            let max_k = cfg.max_k.unwrap_or_else(|| n.div_ceil(10));
            select_community_count(sample, max_k)
        }
    };
    if k == 1 {
        let mean = sample.mean();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    acc += mean[(i, j)];
                }
            }
        }
        let c = (acc / (n * (n - 1)) as f64).clamp(0.0, 1.0);
        return LinkProbabilityMatrix::from_upper_fn(n, |_, _| c);
    }
    let labels = spectral_cluster(sample.mean(), k, cfg.cluster_seed)?;
    block_average(sample.mean(), &labels, k)
}

/// Top-K eigenvectors by absolute eigenvalue, rows normalized, k-means.
pub fn spectral_cluster(mean: &DMatrix<f64>, k: usize, seed: u64) -> Result<Vec<usize>> {
    let n = mean.nrows();
    let eig = nalgebra::SymmetricEigen::new(mean.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .abs()
            .partial_cmp(&eig.eigenvalues[a].abs())
            .unwrap()
    });
    let mut points = DMatrix::zeros(n, k);
    for (col, &idx) in order.iter().take(k).enumerate() {
        points.set_column(col, &eig.eigenvectors.column(idx));
    }
    for i in 0..n {
        let norm = points.row(i).norm();
        if norm > 1e-12 {
            for c in 0..k {
                points[(i, c)] /= norm;
            }
        }
    }
    kmeans(&points, k, seed)
}

const KMEANS_RETRIES: usize = 10;
const KMEANS_MAX_ITERS: usize = 200;

fn kmeans(points: &DMatrix<f64>, k: usize, seed: u64) -> Result<Vec<usize>> {
    let n = points.nrows();
    if k > n {
        return Err(Error::Estimation(format!("k = {k} exceeds {n} points")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    'attempt: for _ in 0..KMEANS_RETRIES {
        let mut centers = kmeans_pp_init(points, k, &mut rng);
        let mut labels = vec![0usize; n];
        for _ in 0..KMEANS_MAX_ITERS {
            let mut changed = false;
            for i in 0..n {
                let mut best = 0;
                let mut best_d = f64::INFINITY;
                for c in 0..k {
                    let d = (points.row(i) - centers.row(c)).norm_squared();
                    if d < best_d {
                        best_d = d;
                        best = c;
                    }
                }
                if labels[i] != best {
                    labels[i] = best;
                    changed = true;
                }
            }
            let mut counts = vec![0usize; k];
            let mut new_centers = DMatrix::zeros(k, points.ncols());
            for i in 0..n {
                counts[labels[i]] += 1;
                for c in 0..points.ncols() {
                    new_centers[(labels[i], c)] += points[(i, c)];
                }
            }
            if counts.iter().any(|&c| c == 0) {
                continue 'attempt; // empty cluster: fresh initialization
            }
            for c in 0..k {
                for d in 0..points.ncols() {
                    new_centers[(c, d)] /= counts[c] as f64;
                }
            }
            centers = new_centers;
            if !changed {
                return Ok(labels);
            }
        }
        return Ok(labels);
    }
    Err(Error::Estimation(format!(
        "k-means produced an empty cluster in {KMEANS_RETRIES} attempts (k = {k})"
    )))
}

fn kmeans_pp_init(points: &DMatrix<f64>, k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let n = points.nrows();
    let mut centers = DMatrix::zeros(k, points.ncols());
    let first = rng.gen_range(0..n);
    centers.set_row(0, &points.row(first));
    let mut d2 = vec![0.0f64; n];
    for chosen in 1..k {
        let mut total = 0.0;
        for i in 0..n {
            let mut best = f64::INFINITY;
            for c in 0..chosen {
                best = best.min((points.row(i) - centers.row(c)).norm_squared());
            }
            d2[i] = best;
            total += best;
        }
        let idx = if total <= 0.0 {
            rng.gen_range(0..n)
        } else {
            let mut target = rng.gen::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                target -= w;
                if target <= 0.0 {
                    pick = i;
                    break;
                }
            }
            pick
        };
        centers.set_row(chosen, &points.row(idx));
    }
    centers
}
