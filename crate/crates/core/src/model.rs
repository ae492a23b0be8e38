//! Link-probability-matrix constructors (graphons, SBM), Bernoulli adjacency
//! sampling, sparsity scaling, perturbations, and the change types used to
//! build dynamic scenarios.
//!
//! All randomness flows through ChaCha8, a counter-based generator with
//! explicit streams: replicate k of a run seeded with `s` uses
//! `replicate_rng(s, k)`, so parallel replicate generation partitions the
//! seed space and every simulated table is reproducible from (scenario, seed).

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// The simulation RNG. Fixed algorithm so sampled adjacency matrices are
/// bit-identical across runs and platforms.
pub type SimRng = ChaCha8Rng;

/// Independent stream for replicate `stream` of a run seeded with `seed`.
pub fn replicate_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Symmetric n x n matrix of edge probabilities, zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkProbabilityMatrix {
    entries: DMatrix<f64>,
}

impl LinkProbabilityMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let n = entries.nrows();
        if n != entries.ncols() || n < 2 {
            return Err(Error::InvalidInput(format!(
                "link probability matrix must be square of order >= 2, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        for i in 0..n {
            if entries[(i, i)] != 0.0 {
                return Err(Error::InvalidInput(format!("nonzero diagonal at ({i}, {i})")));
            }
            for j in 0..n {
                let v = entries[(i, j)];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidInput(format!(
                        "probability out of [0,1] at ({i}, {j}): {v}"
                    )));
                }
                if v != entries[(j, i)] {
                    return Err(Error::InvalidInput(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { entries })
    }

    /// Builds from an off-diagonal generator; the diagonal is zeroed and the
    /// value is mirrored from the upper triangle.
    pub fn from_upper_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Self::new(m)
    }

    pub fn order(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }
}

/// Symmetric binary adjacency matrix with zero diagonal, stored densely.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyMatrix {
    order: usize,
    entries: Vec<u8>, // row-major
}

impl AdjacencyMatrix {
    pub fn new(order: usize, entries: Vec<u8>) -> Result<Self> {
        if order < 2 || entries.len() != order * order {
            return Err(Error::InvalidInput(format!(
                "adjacency storage mismatch: order {order}, {} entries",
                entries.len()
            )));
        }
        let a = Self { order, entries };
        for i in 0..order {
            if a.get(i, i) != 0 {
                return Err(Error::InvalidInput(format!("nonzero diagonal at ({i}, {i})")));
            }
            for j in (i + 1)..order {
                let v = a.get(i, j);
                if v > 1 {
                    return Err(Error::InvalidInput(format!("non-binary entry at ({i}, {j})")));
                }
                if v != a.get(j, i) {
                    return Err(Error::InvalidInput(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        Ok(a)
    }

    pub fn zeros(order: usize) -> Self {
        Self {
            order,
            entries: vec![0; order * order],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.entries[i * self.order + j]
    }

    #[inline]
    pub(crate) fn set_sym(&mut self, i: usize, j: usize, v: u8) {
        self.entries[i * self.order + j] = v;
        self.entries[j * self.order + i] = v;
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn entries(&self) -> &[u8] {
        &self.entries
    }
}

/// A sample of networks drawn from one link probability matrix, with its
/// entrywise mean cached.
#[derive(Debug, Clone)]
pub struct NetworkSample {
    matrices: Vec<AdjacencyMatrix>,
    mean: DMatrix<f64>,
}

impl NetworkSample {
    pub fn new(matrices: Vec<AdjacencyMatrix>) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or_else(|| Error::InvalidInput("empty network sample".into()))?;
        let n = first.order();
        if matrices.iter().any(|a| a.order() != n) {
            return Err(Error::InvalidInput("sample mixes network orders".into()));
        }
        let m = matrices.len() as f64;
        let mut mean = DMatrix::zeros(n, n);
        for a in &matrices {
            for i in 0..n {
                for j in 0..n {
                    mean[(i, j)] += a.get(i, j) as f64;
                }
            }
        }
        mean /= m;
        Ok(Self { matrices, mean })
    }

    pub fn order(&self) -> usize {
        self.mean.nrows()
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn matrices(&self) -> &[AdjacencyMatrix] {
        &self.matrices
    }

    /// Entrywise average adjacency matrix.
    pub fn mean(&self) -> &DMatrix<f64> {
        &self.mean
    }
}

/// The four graphon families used by the simulation scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum GraphonFamily {
    Graphon1,
    Graphon2,
    Graphon3,
    Graphon4,
}

impl GraphonFamily {
    /// Evaluates the graphon at (u, v). `order` only matters for Graphon 1,
    /// whose block count is floor(log n). Graphons 2 and 4 take their
    /// additive constant at the singular point u = v = 0.
    pub fn eval(self, u: f64, v: f64, order: usize) -> f64 {
        match self {
            GraphonFamily::Graphon1 => {
                let big_k = (order as f64).ln().floor() as usize;
                let kf = big_k as f64;
                for k in 1..=big_k {
                    let lo = (k as f64 - 1.0) / kf;
                    let hi = k as f64 / kf;
                    if u > lo && u < hi && v > lo && v < hi {
                        return k as f64 / (kf + 1.0);
                    }
                }
                0.3 / (kf + 1.0)
            }
            GraphonFamily::Graphon2 => {
                let r = u * u + v * v;
                if r == 0.0 {
                    0.15
                } else {
                    r / 3.0 * (1.0 / r).cos() + 0.15
                }
            }
            GraphonFamily::Graphon3 => {
                ((5.0 * std::f64::consts::PI * (u + v - 1.0) + 1.0).sin()) / 2.0 + 0.5
            }
            GraphonFamily::Graphon4 => {
                let r = u * u + v * v;
                if r == 0.0 {
                    0.05
                } else {
                    r / 10.0 * (1.0 / r).cos() + 0.05
                }
            }
        }
    }
}

/// A graphon family plus the population's global latent sequence.
#[derive(Debug, Clone)]
pub struct GraphonSpec {
    pub family: GraphonFamily,
    pub latent: Vec<f64>,
}

impl GraphonSpec {
    /// Draws the shared latent sequence once for a population of order `n`.
    pub fn sample(family: GraphonFamily, n: usize, rng: &mut SimRng) -> Self {
        let latent = (0..n).map(|_| rng.gen::<f64>()).collect();
        Self { family, latent }
    }

    fn validate(&self) -> Result<()> {
        if self.latent.len() < 2 {
            return Err(Error::InvalidInput("latent sequence shorter than 2".into()));
        }
        if self.latent.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
            return Err(Error::InvalidInput("latent value outside [0,1]".into()));
        }
        Ok(())
    }
}

/// Block matrix plus membership labels (1-based block ids).
#[derive(Debug, Clone)]
pub struct SbmSpec {
    pub block_matrix: DMatrix<f64>,
    pub membership: Vec<usize>,
}

impl SbmSpec {
    fn validate(&self) -> Result<()> {
        let k = self.block_matrix.nrows();
        if k != self.block_matrix.ncols() || k == 0 {
            return Err(Error::InvalidInput("block matrix must be square".into()));
        }
        for i in 0..k {
            for j in 0..k {
                let v = self.block_matrix[(i, j)];
                if !(0.0..=1.0).contains(&v) || v != self.block_matrix[(j, i)] {
                    return Err(Error::InvalidInput(
                        "block matrix must be symmetric with entries in [0,1]".into(),
                    ));
                }
            }
        }
        if self.membership.len() < 2 {
            return Err(Error::InvalidInput("membership shorter than 2".into()));
        }
        if self.membership.iter().any(|&g| g == 0 || g > k) {
            return Err(Error::InvalidInput("membership label out of range".into()));
        }
        Ok(())
    }

    /// The two-community benchmark model: within-block 0.6 (block 1 shifted
    /// by theta0), cross-block 0.3; block 1 holds nodes up to
    /// floor(2n / log n).
    pub fn benchmark_two_block(n: usize, theta0: f64) -> Self {
        let lambda = DMatrix::from_row_slice(2, 2, &[0.6 + theta0, 0.3, 0.3, 0.6]);
        let cut = (2.0 * n as f64 / (n as f64).ln()).floor() as usize;
        let membership = (1..=n).map(|i| if i <= cut { 1 } else { 2 }).collect();
        Self {
            block_matrix: lambda,
            membership,
        }
    }
}

/// P[i][j] = f(xi_i, xi_j) off the diagonal.
pub fn graphon_link_matrix(spec: &GraphonSpec) -> Result<LinkProbabilityMatrix> {
    spec.validate()?;
    let n = spec.latent.len();
    LinkProbabilityMatrix::from_upper_fn(n, |i, j| {
        spec.family.eval(spec.latent[i], spec.latent[j], n)
    })
}

/// P[i][j] = Lambda[g_i][g_j] off the diagonal.
pub fn sbm_link_matrix(spec: &SbmSpec) -> Result<LinkProbabilityMatrix> {
    spec.validate()?;
    let n = spec.membership.len();
    LinkProbabilityMatrix::from_upper_fn(n, |i, j| {
        spec.block_matrix[(spec.membership[i] - 1, spec.membership[j] - 1)]
    })
}

/// One Bernoulli draw per upper-triangle entry, mirrored.
pub fn sample_adjacency(p: &LinkProbabilityMatrix, rng: &mut SimRng) -> AdjacencyMatrix {
    let n = p.order();
    let mut a = AdjacencyMatrix::zeros(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen::<f64>() < p.get(i, j) {
                a.set_sym(i, j, 1);
            }
        }
    }
    a
}

/// Draws a sample of `m` networks from one link probability matrix.
pub fn sample_networks(p: &LinkProbabilityMatrix, m: usize, rng: &mut SimRng) -> Result<NetworkSample> {
    NetworkSample::new((0..m).map(|_| sample_adjacency(p, rng)).collect())
}

/// Entrywise rho * P with rho in (0, 1].
pub fn scale_sparsity(p: &LinkProbabilityMatrix, rho: f64) -> Result<LinkProbabilityMatrix> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::Domain(format!("sparsity factor must be in (0,1], got {rho}")));
    }
    LinkProbabilityMatrix::new(p.as_matrix() * rho)
}

/// Adds theta to every off-diagonal entry with both endpoints in `subset`.
/// Out-of-range results are an error; the caller chooses theta.
pub fn perturb_subset(
    p: &LinkProbabilityMatrix,
    subset: &[usize],
    theta: f64,
) -> Result<LinkProbabilityMatrix> {
    let n = p.order();
    if subset.iter().any(|&i| i >= n) {
        return Err(Error::InvalidInput("subset index out of range".into()));
    }
    let mut m = p.as_matrix().clone();
    for (a, &i) in subset.iter().enumerate() {
        for &j in &subset[a + 1..] {
            let v = p.get(i, j) + theta;
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain(format!(
                    "perturbed probability {v} at ({i}, {j}) leaves [0,1]"
                )));
            }
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    LinkProbabilityMatrix::new(m)
}

/// The three link-probability change types used by the multi-change
/// scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ChangeKind {
    /// Paired rows/columns exchanged between the two node sets.
    Switch,
    /// Row/column of each node in the first set overwritten by its pair's.
    Merge,
    /// Cross entries between the sets redrawn from Graphon 4 with fresh
    /// latent coordinates.
    Regenerate,
}

/// Applies a community change to P. `m1` and `m2` are paired elementwise in
/// order for Switch and Merge; Regenerate redraws the m1 x m2 cross block.
pub fn apply_change(
    p: &LinkProbabilityMatrix,
    kind: ChangeKind,
    m1: &[usize],
    m2: &[usize],
    rng: &mut SimRng,
) -> Result<LinkProbabilityMatrix> {
    let n = p.order();
    if m1.iter().chain(m2).any(|&i| i >= n) {
        return Err(Error::InvalidInput("change set index out of range".into()));
    }
    if m1.iter().any(|i| m2.contains(i)) {
        return Err(Error::InvalidInput("change sets must be disjoint".into()));
    }
    match kind {
        ChangeKind::Switch | ChangeKind::Merge => {
            if m1.len() != m2.len() {
                return Err(Error::InvalidInput(format!(
                    "change sets must have equal size for switch/merge: {} vs {}",
                    m1.len(),
                    m2.len()
                )));
            }
            // sigma maps each node to the source of its new row/column
            let mut sigma: Vec<usize> = (0..n).collect();
            for (&i, &j) in m1.iter().zip(m2) {
                sigma[i] = j;
                if kind == ChangeKind::Switch {
                    sigma[j] = i;
                }
            }
            let mut out = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] = p.get(sigma[i], sigma[j]);
                }
            }
            // re-symmetrize and zero the diagonal (merge can leave residue)
            let sym = (&out + out.transpose()) * 0.5;
            let mut sym = sym;
            for i in 0..n {
                sym[(i, i)] = 0.0;
            }
            LinkProbabilityMatrix::new(sym)
        }
        ChangeKind::Regenerate => {
            let mut fresh = vec![f64::NAN; n];
            for &i in m1.iter().chain(m2) {
                fresh[i] = rng.gen::<f64>();
            }
            let mut out = p.as_matrix().clone();
            for &i in m1 {
                for &j in m2 {
                    let v = GraphonFamily::Graphon4.eval(fresh[i], fresh[j], n);
                    out[(i, j)] = v;
                    out[(j, i)] = v;
                }
            }
            for i in 0..n {
                out[(i, i)] = 0.0;
            }
            LinkProbabilityMatrix::new(out)
        }
    }
}
