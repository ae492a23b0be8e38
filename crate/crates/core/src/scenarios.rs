//! Named simulation scenarios backing the benchmark suite: two-sample
//! null/alternative setups over the four graphons and the two-block model,
//! and the no-change / single-change / three-change dynamic series.
//!
//! All generators take (seed, replicate) and draw from a dedicated stream,
//! so replicates are independent and reproducible in any order.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::changepoint::DynamicNetworkSeries;
use crate::error::Result;
use crate::model::{
    apply_change, graphon_link_matrix, perturb_subset, replicate_rng, sample_adjacency,
    sample_networks, sbm_link_matrix, scale_sparsity, ChangeKind, GraphonFamily, GraphonSpec,
    LinkProbabilityMatrix, NetworkSample, SbmSpec, SimRng,
};

/// The population generating a single link-probability matrix.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum PopulationModel {
    Graphon(GraphonFamily),
    /// Two-block model with the benchmark connectivity and theta0 offset.
    SbmTwoBlock { theta0: f64 },
}

impl PopulationModel {
    pub fn link_matrix(&self, n: usize, rng: &mut SimRng) -> Result<LinkProbabilityMatrix> {
        match self {
            PopulationModel::Graphon(family) => {
                graphon_link_matrix(&GraphonSpec::sample(*family, n, rng))
            }
            PopulationModel::SbmTwoBlock { theta0 } => {
                sbm_link_matrix(&SbmSpec::benchmark_two_block(n, *theta0))
            }
        }
    }
}

/// Two-sample scenario: both samples share P under the null; under the
/// alternative the second sample's P is perturbed by `theta` on the
/// floor(ln n)-node subset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoSampleScenario {
    pub model: PopulationModel,
    pub n: usize,
    pub m1: usize,
    pub m2: usize,
    /// None: null. Some(theta): local alternative on the small subset.
    pub theta: Option<f64>,
    pub rho: f64,
}

impl TwoSampleScenario {
    pub fn null(model: PopulationModel, n: usize, m1: usize, m2: usize) -> Self {
        Self { model, n, m1, m2, theta: None, rho: 1.0 }
    }

    pub fn alternative(
        model: PopulationModel,
        n: usize,
        m1: usize,
        m2: usize,
        theta: f64,
    ) -> Self {
        Self { model, n, m1, m2, theta: Some(theta), rho: 1.0 }
    }

    pub fn with_sparsity(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    /// Size of the perturbed subset under the alternative.
    pub fn subset_size(&self) -> usize {
        (self.n as f64).ln().floor() as usize
    }

    pub fn generate(&self, seed: u64, replicate: u64) -> Result<(NetworkSample, NetworkSample)> {
        let mut rng = replicate_rng(seed, replicate);
        let p1 = self.model.link_matrix(self.n, &mut rng)?;
        let p2 = match self.theta {
            None => p1.clone(),
            Some(theta) => {
                let mut nodes: Vec<usize> = (0..self.n).collect();
                nodes.shuffle(&mut rng);
                perturb_subset(&p1, &nodes[..self.subset_size()], theta)?
            }
        };
        let (p1, p2) = if self.rho < 1.0 {
            (scale_sparsity(&p1, self.rho)?, scale_sparsity(&p2, self.rho)?)
        } else {
            (p1, p2)
        };
        let s1 = sample_networks(&p1, self.m1, &mut rng)?;
        let s2 = sample_networks(&p2, self.m2, &mut rng)?;
        Ok((s1, s2))
    }
}

/// The dynamic-series change structure.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum ChangeScenario {
    /// One P for the whole series; the truth set is empty.
    NoChange { model: PopulationModel },
    /// Two-block model, theta0 = 0 switching to -m^{-1/4} after t = m/2.
    SingleChange,
    /// Graphon 2 base with a switch at m/4, a merge at m/2, and a
    /// regenerate at 3m/4, acting on random disjoint floor(n/3)-node sets.
    ThreeChanges,
}

/// A dynamic-network series scenario with optional sparsity scaling.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesScenario {
    pub change: ChangeScenario,
    pub n: usize,
    pub m: usize,
    pub rho: f64,
}

impl SeriesScenario {
    pub fn new(change: ChangeScenario, n: usize, m: usize) -> Self {
        Self { change, n, m, rho: 1.0 }
    }

    pub fn with_sparsity(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    /// The true change-point set (last time of each segment but the final).
    pub fn truth(&self) -> Vec<usize> {
        match self.change {
            ChangeScenario::NoChange { .. } => Vec::new(),
            ChangeScenario::SingleChange => vec![self.m / 2],
            ChangeScenario::ThreeChanges => {
                vec![self.m / 4, self.m / 2, 3 * self.m / 4]
            }
        }
    }

    /// Per-segment link matrices, in time order.
    fn segment_matrices(&self, rng: &mut SimRng) -> Result<Vec<LinkProbabilityMatrix>> {
        let n = self.n;
        let mats = match self.change {
            ChangeScenario::NoChange { model } => vec![model.link_matrix(n, rng)?],
            ChangeScenario::SingleChange => {
                let theta0 = -(self.m as f64).powf(-0.25);
                vec![
                    sbm_link_matrix(&SbmSpec::benchmark_two_block(n, 0.0))?,
                    sbm_link_matrix(&SbmSpec::benchmark_two_block(n, theta0))?,
                ]
            }
            ChangeScenario::ThreeChanges => {
                let k = n / 3;
                let mut nodes: Vec<usize> = (0..n).collect();
                nodes.shuffle(rng);
                let m1 = nodes[..k].to_vec();
                let m2 = nodes[k..2 * k].to_vec();
                let p1 = graphon_link_matrix(&GraphonSpec::sample(
                    GraphonFamily::Graphon2,
                    n,
                    rng,
                ))?;
                let p2 = apply_change(&p1, ChangeKind::Switch, &m1, &m2, rng)?;
                let p3 = apply_change(&p2, ChangeKind::Merge, &m1, &m2, rng)?;
                let p4 = apply_change(&p3, ChangeKind::Regenerate, &m1, &m2, rng)?;
                vec![p1, p2, p3, p4]
            }
        };
        if self.rho < 1.0 {
            mats.iter().map(|p| scale_sparsity(p, self.rho)).collect()
        } else {
            Ok(mats)
        }
    }

    pub fn generate(&self, seed: u64, replicate: u64) -> Result<DynamicNetworkSeries> {
        let mut rng = replicate_rng(seed, replicate);
        let segments = self.segment_matrices(&mut rng)?;
        let mut boundaries = self.truth();
        boundaries.push(self.m);
        let mut mats = Vec::with_capacity(self.m);
        let mut seg = 0usize;
        for t in 1..=self.m {
            mats.push(sample_adjacency(&segments[seg], &mut rng));
            if t == boundaries[seg] {
                seg += 1;
            }
        }
        DynamicNetworkSeries::new(mats)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AdjacencyMatrix;

    fn edge_density(a: &AdjacencyMatrix) -> f64 {
        let n = a.order();
        let ones: usize = a.entries().iter().map(|&b| b as usize).sum();
        ones as f64 / (n * (n - 1)) as f64
    }

    #[test]
    fn null_samples_share_population() {
        let sc = TwoSampleScenario::null(
            PopulationModel::Graphon(GraphonFamily::Graphon1),
            50,
            6,
            4,
        );
        let (s1, s2) = sc.generate(11, 0).unwrap();
        assert_eq!(s1.len(), 6);
        assert_eq!(s2.len(), 4);
        assert_eq!(s1.order(), 50);
        // same seed+replicate regenerates identically
        let (t1, _) = sc.generate(11, 0).unwrap();
        assert_eq!(s1.matrices()[0], t1.matrices()[0]);
        // different replicates differ
        let (u1, _) = sc.generate(11, 1).unwrap();
        assert_ne!(s1.matrices()[0], u1.matrices()[0]);
    }

    #[test]
    fn alternative_shifts_only_the_small_subset() {
        let n = 100; // floor(ln 100) = 4
        let sc = TwoSampleScenario::alternative(
            PopulationModel::SbmTwoBlock { theta0: 0.0 },
            n,
            3,
            3,
            0.2,
        );
        assert_eq!(sc.subset_size(), 4);
        // the population difference shows up in the per-entry mean gap over
        // many replicates on subset pairs only; check via the generator's
        // internals instead: rebuild the matrices the same way
        let mut rng = replicate_rng(7, 0);
        let p1 = sc.model.link_matrix(n, &mut rng).unwrap();
        let subset: Vec<usize> = (0..4).collect();
        let p2 = perturb_subset(&p1, &subset, 0.2).unwrap();
        let mut changed = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                if (p1.get(i, j) - p2.get(i, j)).abs() > 1e-12 {
                    changed += 1;
                    assert!(i < 4 && j < 4);
                }
            }
        }
        assert_eq!(changed, 6); // C(4,2)
    }

    #[test]
    fn sparsity_scales_edge_density() {
        let base = TwoSampleScenario::null(
            PopulationModel::SbmTwoBlock { theta0: 0.0 },
            200,
            10,
            10,
        );
        let sparse = base.clone().with_sparsity(0.25);
        let (s_full, _) = base.generate(3, 0).unwrap();
        let (s_sparse, _) = sparse.generate(3, 0).unwrap();
        let d_full: f64 =
            s_full.matrices().iter().map(edge_density).sum::<f64>() / 10.0;
        let d_sparse: f64 =
            s_sparse.matrices().iter().map(edge_density).sum::<f64>() / 10.0;
        let ratio = d_sparse / d_full;
        assert!((ratio - 0.25).abs() < 0.03, "ratio = {ratio}");
    }

    #[test]
    fn single_change_truth_and_segments() {
        let sc = SeriesScenario::new(ChangeScenario::SingleChange, 60, 100);
        assert_eq!(sc.truth(), vec![50]);
        let series = sc.generate(5, 0).unwrap();
        assert_eq!(series.len(), 100);
        // density drops after t = 50 (theta0 goes negative on block 1)
        let pre: f64 = series.matrices()[..50].iter().map(edge_density).sum::<f64>() / 50.0;
        let post: f64 = series.matrices()[50..].iter().map(edge_density).sum::<f64>() / 50.0;
        assert!(pre > post, "pre {pre} <= post {post}");
    }

    #[test]
    fn three_changes_truth_positions() {
        let sc = SeriesScenario::new(ChangeScenario::ThreeChanges, 90, 200);
        assert_eq!(sc.truth(), vec![50, 100, 150]);
        let series = sc.generate(9, 0).unwrap();
        assert_eq!(series.len(), 200);
        assert_eq!(series.order(), 90);
    }

    #[test]
    fn no_change_truth_is_empty() {
        let sc = SeriesScenario::new(
            ChangeScenario::NoChange {
                model: PopulationModel::Graphon(GraphonFamily::Graphon3),
            },
            40,
            30,
        );
        assert!(sc.truth().is_empty());
        let series = sc.generate(2, 0).unwrap();
        assert_eq!(series.len(), 30);
    }

    #[test]
    fn series_generation_is_deterministic() {
        let sc = SeriesScenario::new(ChangeScenario::ThreeChanges, 45, 40);
        let a = sc.generate(13, 2).unwrap();
        let b = sc.generate(13, 2).unwrap();
        for (x, y) in a.matrices().iter().zip(b.matrices()) {
            assert_eq!(x, y);
        }
    }
}
