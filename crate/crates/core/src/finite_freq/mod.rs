//! Finite-copy frequency operator `F^N` on `H^{⊗N}`.
//!
//! Two routes are provided for everything:
//!
//! * a brute-force route that materializes vectors (and, for small spaces,
//!   full matrices) on the `D^N`-dimensional tensor product, and
//! * an analytic route through the binomial law, which scales to
//!   `N = 10^6` and beyond.
//!
//! The selected outcome is always `j = 0` of the supplied observable; use
//! [`Observable::with_selected_first`] to select another outcome.
//!
//! Tensor indices put copy 1 in the most significant digit, matching
//! `a ⊗ b` = `a.kronecker(&b)`.

mod binomial;

pub use binomial::{binomial_mode, binomial_pmf, ln_binomial_pmf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::hilbert::{born_weight, check_same_dim, Observable, PureState};
use crate::{Error, Result, C64};

/// Largest tensor dimension for which dense vectors are built by default.
pub const DEFAULT_STATE_CAP: usize = 1 << 20;
/// Largest tensor dimension for which full `D^N × D^N` matrices are built
/// by default.
pub const DEFAULT_OPERATOR_CAP: usize = 1 << 12;

/// Caps on brute-force constructions. Raise them explicitly to go further.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DenseLimits {
    pub state_cap: usize,
    pub operator_cap: usize,
}

impl Default for DenseLimits {
    fn default() -> Self {
        Self {
            state_cap: DEFAULT_STATE_CAP,
            operator_cap: DEFAULT_OPERATOR_CAP,
        }
    }
}

/// `H^{⊗N}` for single-copy dimension `D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorSpace {
    dim: usize,
    copies: usize,
    total_dim: u128,
}

impl TensorSpace {
    pub fn new(dim: usize, copies: usize) -> Result<Self> {
        crate::hilbert::check_dim(dim)?;
        if copies == 0 {
            return Err(Error::InvalidParameter("copy count must be at least 1".into()));
        }
        let total_dim = u32::try_from(copies)
            .ok()
            .and_then(|c| (dim as u128).checked_pow(c))
            .unwrap_or(u128::MAX);
        Ok(Self {
            dim,
            copies,
            total_dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn total_dim(&self) -> u128 {
        self.total_dim
    }

    fn within(&self, cap: usize) -> Result<usize> {
        if self.total_dim > cap as u128 {
            Err(Error::DenseCapExceeded {
                required: self.total_dim,
                cap,
            })
        } else {
            Ok(self.total_dim as usize)
        }
    }

    /// Digit `r` (copy `r`, zero-based) of a tensor index.
    fn digit(&self, index: usize, r: usize) -> usize {
        let stride = self.dim.pow((self.copies - 1 - r) as u32);
        (index / stride) % self.dim
    }
}

/// A full matrix on `H^{⊗N}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    matrix: DMatrix<C64>,
    space: TensorSpace,
}

impl DenseOperator {
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn space(&self) -> TensorSpace {
        self.space
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.matrix * v
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// `max |A - A^†|` entrywise.
    pub fn hermiticity_deviation(&self) -> f64 {
        max_abs_diff(&self.matrix, &self.matrix.adjoint())
    }

    /// Eigenvalues in ascending order; the operator must be Hermitian.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// Which construction of `F^N` to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrequencyForm {
    /// `Σ_n (n/N) Π_n^N`, with each `Π_n^N` expanded as a sum of tensor
    /// products of the binary POVM `{P_0, P_1 = 1 - P_0}`.
    Spectral,
    /// `(1/N) Σ_r 1 ⊗ … ⊗ P_0^r ⊗ … ⊗ 1`.
    Averaged,
}

/// Per-copy binary POVM `(P_0, P_1)` for the selected outcome `j = 0`.
fn binary_povm(obs: &Observable) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    let p0 = obs.projector(0)?;
    let mut p1 = DMatrix::zeros(obs.dim(), obs.dim());
    for j in 1..obs.dim() {
        p1 += obs.projector(j)?;
    }
    Ok((p0, p1))
}

/// Multiplies polynomials in `x` truncated at degree `copies`:
/// `acc *= (x·a + b)`.
fn poly_mul_linear(acc: &mut [C64], len: usize, a: C64, b: C64) {
    for k in (0..=len).rev() {
        let shifted = if k > 0 { acc[k - 1] * a } else { C64::new(0.0, 0.0) };
        acc[k] = acc[k] * b + shifted;
    }
}

/// Fills `out[n]` with `Π_n^N[row, col]` for every `n`, as the coefficient of
/// `x^n` in `Π_r (x·P_0[a_r, b_r] + P_1[a_r, b_r])`: the sum over binary
/// outcome sequences with exactly `n` zeros of `P_{k_1} ⊗ … ⊗ P_{k_N}`.
fn projector_entries(
    space: &TensorSpace,
    p0: &DMatrix<C64>,
    p1: &DMatrix<C64>,
    row: usize,
    col: usize,
    out: &mut [C64],
) {
    out.fill(C64::new(0.0, 0.0));
    out[0] = C64::new(1.0, 0.0);
    for r in 0..space.copies {
        let a = space.digit(row, r);
        let b = space.digit(col, r);
        poly_mul_linear(out, r + 1, p0[(a, b)], p1[(a, b)]);
    }
}

/// `Π_n^N`: projector onto the span of outcome sequences in which the
/// selected outcome occurs exactly `n` times.
pub fn frequency_projector(obs: &Observable, copies: usize, n: usize) -> Result<DenseOperator> {
    frequency_projector_with_limits(obs, copies, n, DenseLimits::default())
}

pub fn frequency_projector_with_limits(
    obs: &Observable,
    copies: usize,
    n: usize,
    limits: DenseLimits,
) -> Result<DenseOperator> {
    let space = TensorSpace::new(obs.dim(), copies)?;
    if n > copies {
        return Err(Error::InvalidParameter(format!(
            "occurrence count {n} exceeds copy count {copies}"
        )));
    }
    let total = space.within(limits.operator_cap)?;
    let (p0, p1) = binary_povm(obs)?;
    let mut coeffs = vec![C64::new(0.0, 0.0); copies + 1];
    let matrix = DMatrix::from_fn(total, total, |row, col| {
        projector_entries(&space, &p0, &p1, row, col, &mut coeffs);
        coeffs[n]
    });
    Ok(DenseOperator { matrix, space })
}

/// Dense `F^N` built by either construction.
pub fn frequency_operator_dense(
    obs: &Observable,
    copies: usize,
    form: FrequencyForm,
) -> Result<DenseOperator> {
    frequency_operator_dense_with_limits(obs, copies, form, DenseLimits::default())
}

pub fn frequency_operator_dense_with_limits(
    obs: &Observable,
    copies: usize,
    form: FrequencyForm,
    limits: DenseLimits,
) -> Result<DenseOperator> {
    let space = TensorSpace::new(obs.dim(), copies)?;
    let total = space.within(limits.operator_cap)?;
    let (p0, p1) = binary_povm(obs)?;
    let scale = 1.0 / copies as f64;
    let matrix = match form {
        FrequencyForm::Spectral => {
            let mut coeffs = vec![C64::new(0.0, 0.0); copies + 1];
            DMatrix::from_fn(total, total, |row, col| {
                projector_entries(&space, &p0, &p1, row, col, &mut coeffs);
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(n, c)| c * (n as f64 * scale))
                    .sum()
            })
        }
        FrequencyForm::Averaged => {
            let d = obs.dim();
            let mut sum = DMatrix::zeros(total, total);
            for r in 0..copies {
                let left = DMatrix::<C64>::identity(d.pow(r as u32), d.pow(r as u32));
                let right = DMatrix::<C64>::identity(
                    d.pow((copies - 1 - r) as u32),
                    d.pow((copies - 1 - r) as u32),
                );
                sum += left.kronecker(&p0).kronecker(&right);
            }
            sum * C64::new(scale, 0.0)
        }
    };
    Ok(DenseOperator { matrix, space })
}

/// `|Ψ_N⟩ = |ψ⟩^{⊗N}`, optionally materialized as a `D^N` vector.
#[derive(Debug, Clone, PartialEq)]
pub struct RepetitionState {
    single: PureState,
    copies: usize,
    dense: Option<DVector<C64>>,
}

impl RepetitionState {
    pub fn single(&self) -> &PureState {
        &self.single
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn dense(&self) -> Option<&DVector<C64>> {
        self.dense.as_ref()
    }

    pub fn space(&self) -> TensorSpace {
        // dim and copies were validated on construction
        TensorSpace::new(self.single.dim(), self.copies).expect("validated tensor space")
    }
}

pub fn repetition_state(psi: &PureState, copies: usize, materialize: bool) -> Result<RepetitionState> {
    repetition_state_with_limits(psi, copies, materialize, DenseLimits::default())
}

pub fn repetition_state_with_limits(
    psi: &PureState,
    copies: usize,
    materialize: bool,
    limits: DenseLimits,
) -> Result<RepetitionState> {
    let space = TensorSpace::new(psi.dim(), copies)?;
    let dense = if materialize {
        space.within(limits.state_cap)?;
        let single = psi.amplitudes();
        let mut v = single.clone();
        for _ in 1..copies {
            v = v.kronecker(single);
        }
        Some(v)
    } else {
        None
    };
    Ok(RepetitionState {
        single: psi.clone(),
        copies,
        dense,
    })
}

/// Applies a single-copy operator to copy `r` (zero-based) of a dense
/// tensor vector, leaving the other copies untouched.
pub fn apply_to_copy(
    space: &TensorSpace,
    r: usize,
    op: &DMatrix<C64>,
    v: &DVector<C64>,
) -> Result<DVector<C64>> {
    let d = space.dim;
    check_same_dim(d, op.nrows())?;
    check_same_dim(d, op.ncols())?;
    let total = space.within(usize::MAX)?;
    check_same_dim(total, v.len())?;
    if r >= space.copies {
        return Err(Error::IndexOutOfRange {
            index: r,
            dim: space.copies,
        });
    }
    let stride = d.pow((space.copies - 1 - r) as u32);
    let block = stride * d;
    let mut out = DVector::zeros(total);
    let mut local = vec![C64::new(0.0, 0.0); d];
    for base in (0..total).step_by(block) {
        for offset in 0..stride {
            for (k, slot) in local.iter_mut().enumerate() {
                *slot = v[base + offset + k * stride];
            }
            for a in 0..d {
                let mut acc = C64::new(0.0, 0.0);
                for (b, x) in local.iter().enumerate() {
                    acc += op[(a, b)] * x;
                }
                out[base + offset + a * stride] = acc;
            }
        }
    }
    Ok(out)
}

/// `F^N v` without forming the matrix: `(1/N) Σ_r P_0^r v`.
pub fn apply_frequency_operator(obs: &Observable, space: &TensorSpace, v: &DVector<C64>) -> Result<DVector<C64>> {
    check_same_dim(obs.dim(), space.dim)?;
    let p0 = obs.projector(0)?;
    let mut out = DVector::zeros(v.len());
    for r in 0..space.copies {
        out += apply_to_copy(space, r, &p0, v)?;
    }
    Ok(out.unscale(space.copies as f64))
}

/// `Π_n^N v` without forming the matrix: rotate every copy into the
/// eigenbasis of the observable, keep the components whose index has exactly
/// `n` zero digits, and rotate back.
pub fn apply_frequency_projector(
    obs: &Observable,
    space: &TensorSpace,
    n: usize,
    v: &DVector<C64>,
) -> Result<DVector<C64>> {
    check_same_dim(obs.dim(), space.dim)?;
    let u = obs.basis();
    let u_adj = u.adjoint();
    let mut w = v.clone();
    for r in 0..space.copies {
        w = apply_to_copy(space, r, &u_adj, &w)?;
    }
    for (idx, x) in w.iter_mut().enumerate() {
        let zeros = (0..space.copies).filter(|&r| space.digit(idx, r) == 0).count();
        if zeros != n {
            *x = C64::new(0.0, 0.0);
        }
    }
    for r in 0..space.copies {
        w = apply_to_copy(space, r, u, &w)?;
    }
    Ok(w)
}

/// Binomial law of the frequency `n/N` for Born weight `q`:
/// entry `n` is `C(N,n) q^n (1-q)^(N-n)`.
pub fn frequency_distribution(q: f64, copies: usize) -> Result<Vec<f64>> {
    check_weight(q)?;
    if copies == 0 {
        return Err(Error::InvalidParameter("copy count must be at least 1".into()));
    }
    let big_n = copies as u64;
    Ok((0..=big_n).map(|n| binomial_pmf(big_n, n, q)).collect())
}

/// Evaluation route for [`fh_residual`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResidualMode {
    Analytic,
    Dense,
}

/// `Δ_N = ||F^N|Ψ_N⟩ - q|Ψ_N⟩||` for a trial value `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FHResult {
    /// Trial value of the frequency eigenvalue.
    pub q: f64,
    /// Born weight `⟨ψ|P_0|ψ⟩` of the single-copy state.
    pub born: f64,
    pub copies: usize,
    pub delta: f64,
    /// `q(1-q)/N` at the Born weight: the binomial variance.
    pub delta_squared_analytic: f64,
}

/// Finkelstein–Hartle residual at the Born weight.
pub fn fh_residual(psi: &PureState, obs: &Observable, copies: usize, mode: ResidualMode) -> Result<FHResult> {
    let born = born_weight(psi, obs, 0)?;
    fh_residual_trial(psi, obs, copies, born, mode)
}

/// Residual for an arbitrary trial value `q`. Analytically
/// `Δ_N² = (q - p)² + p(1-p)/N` with `p = ⟨ψ|P_0|ψ⟩`, minimized exactly at
/// `q = p`.
pub fn fh_residual_trial(
    psi: &PureState,
    obs: &Observable,
    copies: usize,
    q: f64,
    mode: ResidualMode,
) -> Result<FHResult> {
    fh_residual_trial_with_limits(psi, obs, copies, q, mode, DenseLimits::default())
}

pub fn fh_residual_trial_with_limits(
    psi: &PureState,
    obs: &Observable,
    copies: usize,
    q: f64,
    mode: ResidualMode,
    limits: DenseLimits,
) -> Result<FHResult> {
    check_same_dim(obs.dim(), psi.dim())?;
    if copies == 0 {
        return Err(Error::InvalidParameter("copy count must be at least 1".into()));
    }
    let born = born_weight(psi, obs, 0)?;
    let variance = born * (1.0 - born) / copies as f64;
    let delta = match mode {
        ResidualMode::Analytic => ((q - born).powi(2) + variance).sqrt(),
        ResidualMode::Dense => {
            let rep = repetition_state_with_limits(psi, copies, true, limits)?;
            let v = rep.dense.as_ref().expect("materialized");
            let fv = apply_frequency_operator(obs, &rep.space(), v)?;
            (fv - v * C64::new(q, 0.0)).norm()
        }
    };
    Ok(FHResult {
        q,
        born,
        copies,
        delta,
        delta_squared_analytic: variance,
    })
}

/// `max_n ||Π_n^N|Ψ_N⟩||²`: the largest overlap of the repetition state with
/// any fixed-frequency subspace.
pub fn squires_max_overlap(q: f64, copies: usize) -> Result<f64> {
    check_weight(q)?;
    if copies == 0 {
        return Err(Error::InvalidParameter("copy count must be at least 1".into()));
    }
    let big_n = copies as u64;
    let mode = binomial_mode(big_n, q);
    let lo = mode.saturating_sub(1);
    let hi = (mode + 1).min(big_n);
    Ok((lo..=hi).map(|n| binomial_pmf(big_n, n, q)).fold(0.0, f64::max))
}

fn check_weight(q: f64) -> Result<()> {
    if (0.0..=1.0).contains(&q) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("weight {q} outside [0, 1]")))
    }
}

pub(crate) fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
