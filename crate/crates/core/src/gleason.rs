//! Frame functions: normalization and noncontextuality audits, and recovery
//! of the density operator that Gleason's theorem promises for
//! noncontextual rules in dimension three and up.
//!
//! A candidate rule assigns a weight to each eigenvector of each context.
//! Born rules `⟨v|ρ|v⟩` see only the vector. A g-measure sees the whole
//! context through its normalization `N_r`, so the same vector can receive
//! different weights in two bases that share it — unless `g(x) = x²`.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::hilbert::{
    check_dim, check_same_dim, complement_rotation, haar_unitary, orthonormal_completion,
    random_basis, random_state, Observable, PureState, RandomSource, CONSTRUCTION_TOL,
};
use crate::measures::{aligned_context_pair, outcome_probs, GMeasure};
use crate::{Error, Result, C64};

/// Most negative eigenvalue tolerated in a density operator.
pub const PSD_TOL: f64 = 1e-10;

/// Hermitian, positive-semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: DMatrix<C64>,
}

impl DensityOperator {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim {
            return Err(Error::NotDensityOperator("matrix is not square".into()));
        }
        check_dim(dim)?;
        let herm = hermiticity_deviation(&matrix);
        if herm > CONSTRUCTION_TOL {
            return Err(Error::NotDensityOperator(format!(
                "hermiticity deviation {herm:.3e}"
            )));
        }
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > CONSTRUCTION_TOL {
            return Err(Error::NotDensityOperator(format!("trace {trace}")));
        }
        let min = hermitian_eigenvalues(&matrix)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min < -PSD_TOL {
            return Err(Error::NotDensityOperator(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Self::new(DMatrix::identity(dim, dim).unscale(dim as f64))
    }

    pub fn diagonal(weights: &[f64]) -> Result<Self> {
        let d = DVector::from_iterator(weights.len(), weights.iter().map(|&w| C64::new(w, 0.0)));
        Self::new(DMatrix::from_diagonal(&d))
    }

    pub fn pure(state: &PureState) -> Self {
        let v = state.amplitudes();
        Self {
            matrix: v * v.adjoint(),
        }
    }

    /// Random full-rank state `G G† / tr(G G†)` from a complex Ginibre `G`.
    pub fn random(dim: usize, rng: &mut RandomSource) -> Result<Self> {
        check_dim(dim)?;
        let g = DMatrix::from_fn(dim, dim, |_, _| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re, im)
        });
        let m = &g * g.adjoint();
        let tr = m.trace().re;
        let mut m = m.unscale(tr);
        symmetrize(&mut m);
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// `⟨v|ρ|v⟩`.
    pub fn expectation(&self, v: &DVector<C64>) -> f64 {
        v.dotc(&(&self.matrix * v)).re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }
}

fn hermiticity_deviation(m: &DMatrix<C64>) -> f64 {
    (m - m.adjoint()).iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

fn symmetrize(m: &mut DMatrix<C64>) {
    let h = (&*m + m.adjoint()).unscale(2.0);
    *m = h;
}

fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Frobenius norm of `a - b`.
pub fn frobenius_distance(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).norm()
}

/// A rule assigning weights to the eigenvectors of a context.
#[derive(Debug, Clone, PartialEq)]
pub enum FrameCandidate {
    Born(DensityOperator),
    GMeasure { g: GMeasure, state: PureState },
}

impl FrameCandidate {
    pub fn dim(&self) -> usize {
        match self {
            FrameCandidate::Born(rho) => rho.dim(),
            FrameCandidate::GMeasure { state, .. } => state.dim(),
        }
    }

    /// Weights of every eigenvector of `context`.
    pub fn weights(&self, context: &Observable) -> Result<Vec<f64>> {
        check_same_dim(self.dim(), context.dim())?;
        match self {
            FrameCandidate::Born(rho) => Ok((0..context.dim())
                .map(|j| rho.expectation(&context.basis().column(j).into_owned()))
                .collect()),
            FrameCandidate::GMeasure { g, state } => Ok(outcome_probs(state, context, g)?.weights),
        }
    }

    /// Weight of eigenvector `j` of `context`.
    pub fn weight(&self, context: &Observable, j: usize) -> Result<f64> {
        crate::hilbert::check_index(j, context.dim())?;
        Ok(self.weights(context)?[j])
    }

    /// State used for the deterministic witness pair.
    fn witness_state(&self) -> Result<PureState> {
        match self {
            FrameCandidate::Born(rho) => PureState::uniform(rho.dim()),
            FrameCandidate::GMeasure { state, .. } => Ok(state.clone()),
        }
    }
}

/// Worst-case findings of a frame-function audit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FrameAudit {
    /// Worst `|Σ_j q_j - 1|` over tested bases.
    pub max_sum_deviation: f64,
    /// Worst weight difference of a shared vector across two contexts.
    pub max_context_deviation: f64,
    pub bases_tested: usize,
}

fn check_candidate_dim(candidate: &FrameCandidate, dim: usize) -> Result<()> {
    check_dim(dim)?;
    check_same_dim(candidate.dim(), dim)
}

/// Checks that weights sum to one over `num_bases` Haar-random bases. Basis
/// `t` is drawn from stream `t` of `rng.master_seed()`.
pub fn frame_sum_audit(
    candidate: &FrameCandidate,
    dim: usize,
    num_bases: usize,
    rng: &RandomSource,
) -> Result<FrameAudit> {
    check_candidate_dim(candidate, dim)?;
    let deviations = (0..num_bases as u64)
        .into_par_iter()
        .map(|t| {
            let basis = random_basis(dim, &mut rng.substream(t))?;
            let total: f64 = candidate.weights(&basis)?.iter().sum();
            Ok((total - 1.0).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(FrameAudit {
        max_sum_deviation: deviations.into_iter().fold(0.0, f64::max),
        max_context_deviation: 0.0,
        bases_tested: num_bases,
    })
}

/// Two random contexts sharing eigenvector 0, itself a random unit vector.
pub fn random_context_pair(dim: usize, rng: &mut RandomSource) -> Result<(Observable, Observable)> {
    check_dim(dim)?;
    let v = random_state(dim, rng)?;
    let anchor = Observable::from_basis(orthonormal_completion(v.amplitudes()))?;
    let a = complement_rotation(&anchor, 0, &haar_unitary(dim - 1, rng)?)?;
    let b = complement_rotation(&anchor, 0, &haar_unitary(dim - 1, rng)?)?;
    Ok((a, b))
}

/// Per-pair weight differences of the shared vector. Entry 0 is the
/// deterministic witness pair aligned to the candidate's state (the uniform
/// state for Born candidates); entry `t + 1` uses a random pair from stream
/// `t` of `rng.master_seed()`.
pub fn context_deviations(
    candidate: &FrameCandidate,
    dim: usize,
    num_pairs: usize,
    rng: &RandomSource,
) -> Result<Vec<f64>> {
    if dim < 3 {
        return Err(Error::UnsupportedDimension(dim));
    }
    check_candidate_dim(candidate, dim)?;
    let (wa, wb) = aligned_context_pair(&candidate.witness_state()?)?;
    let witness = (candidate.weight(&wa, 0)? - candidate.weight(&wb, 0)?).abs();
    let random = (0..num_pairs as u64)
        .into_par_iter()
        .map(|t| {
            let (a, b) = random_context_pair(dim, &mut rng.substream(t))?;
            Ok((candidate.weight(&a, 0)? - candidate.weight(&b, 0)?).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(std::iter::once(witness).chain(random).collect())
}

/// Worst violation of noncontextuality over the witness pair and
/// `num_pairs` random pairs. Needs `D >= 3`: in two dimensions a shared
/// eigenvector leaves no freedom in the rest of the basis.
pub fn noncontextuality_audit(
    candidate: &FrameCandidate,
    dim: usize,
    num_pairs: usize,
    rng: &RandomSource,
) -> Result<FrameAudit> {
    let deviations = context_deviations(candidate, dim, num_pairs, rng)?;
    Ok(FrameAudit {
        max_sum_deviation: 0.0,
        max_context_deviation: deviations.into_iter().fold(0.0, f64::max),
        bases_tested: 2 * (num_pairs + 1),
    })
}

/// Every eigenvector of `num_bases` random bases with its candidate weight.
pub fn frame_samples(
    candidate: &FrameCandidate,
    dim: usize,
    num_bases: usize,
    rng: &mut RandomSource,
) -> Result<Vec<(PureState, f64)>> {
    check_candidate_dim(candidate, dim)?;
    let mut out = Vec::with_capacity(num_bases * dim);
    for _ in 0..num_bases {
        let basis = random_basis(dim, rng)?;
        let w = candidate.weights(&basis)?;
        for (j, wj) in w.into_iter().enumerate() {
            out.push((basis.eigenvector(j)?, wj));
        }
    }
    Ok(out)
}

/// Traceless Hermitian basis of `D×D` matrices (generalized Gell-Mann).
fn traceless_basis(dim: usize) -> Vec<DMatrix<C64>> {
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let mut out = Vec::with_capacity(dim * dim - 1);
    for j in 0..dim {
        for k in j + 1..dim {
            let mut s = DMatrix::zeros(dim, dim);
            s[(j, k)] = one;
            s[(k, j)] = one;
            out.push(s);
            let mut a = DMatrix::zeros(dim, dim);
            a[(j, k)] = -i;
            a[(k, j)] = i;
            out.push(a);
        }
    }
    for l in 1..dim {
        let scale = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut d = DMatrix::zeros(dim, dim);
        for m in 0..l {
            d[(m, m)] = C64::new(scale, 0.0);
        }
        d[(l, l)] = C64::new(-(l as f64) * scale, 0.0);
        out.push(d);
    }
    out
}

/// Least-squares estimate of a frame function as `⟨v|ρ|v⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityFit {
    /// Hermitian, trace one; positive only if the data allow it.
    pub estimate: DMatrix<C64>,
    /// Root-mean-square misfit over the samples.
    pub residual: f64,
    pub rank: usize,
}

impl DensityFit {
    /// The estimate as a validated density operator.
    pub fn density(&self) -> Result<DensityOperator> {
        DensityOperator::new(self.estimate.clone())
    }
}

/// Fits `weight_k ≈ ⟨v_k|ρ|v_k⟩` over Hermitian `ρ` with `tr ρ = 1`.
///
/// The trace constraint is eliminated by writing `ρ = I/D + Σ c_k H_k` over a
/// traceless Hermitian basis, so the residual is that of the constrained
/// problem. The reduced system is solved by SVD.
pub fn fit_density(samples: &[(PureState, f64)], dim: usize) -> Result<DensityFit> {
    check_dim(dim)?;
    for (v, w) in samples {
        check_same_dim(dim, v.dim())?;
        if !(-CONSTRUCTION_TOL..=1.0 + CONSTRUCTION_TOL).contains(w) {
            return Err(Error::InvalidParameter(format!("weight {w} outside [0, 1]")));
        }
    }
    let basis = traceless_basis(dim);
    let params = basis.len();
    let rows = samples.len();
    let design = DMatrix::from_fn(rows, params, |s, k| {
        let v = samples[s].0.amplitudes();
        v.dotc(&(&basis[k] * v)).re
    });
    let rhs = DVector::from_fn(rows, |s, _| samples[s].1 - 1.0 / dim as f64);

    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = smax * 1e-10 * rows.max(params) as f64;
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    if rank < params {
        return Err(Error::Underdetermined {
            rank,
            required: params,
        });
    }
    let coeffs = svd
        .solve(&rhs, cutoff)
        .map_err(|e| Error::Internal(e.to_string()))?;

    let fitted = &design * &coeffs;
    let residual = ((fitted - &rhs).norm_squared() / rows as f64).sqrt();
    let mut estimate = DMatrix::identity(dim, dim).unscale(dim as f64);
    for (c, h) in coeffs.iter().zip(&basis) {
        estimate += h.scale(*c);
    }
    symmetrize(&mut estimate);
    Ok(DensityFit {
        estimate,
        residual,
        rank,
    })
}
