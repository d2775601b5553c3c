//! Complex linear algebra substrate: pure states, nondegenerate observables,
//! Born weights and seeded Haar sampling.
//!
//! States are column vectors in the computational basis of `C^D`. An
//! [`Observable`] stores its orthonormal eigenbasis as the columns of a
//! unitary matrix, so `⟨B,j|ψ⟩` is the `j`-th entry of `U^† ψ`.

mod random;

pub use random::RandomSource;

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result, C64};

/// Tolerance for invariants checked when a value is constructed.
pub const CONSTRUCTION_TOL: f64 = 1e-12;
/// Tolerance for quantities derived from several floating-point operations.
pub const DERIVED_TOL: f64 = 1e-10;

/// A normalized vector in `C^D`, `D >= 2`.
///
/// Global phase is never canonicalized; compare states through the
/// magnitude of their inner product.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: DVector<C64>,
}

impl PureState {
    /// Wraps amplitudes that are already normalized to within `1e-12`.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        Self::from_vector(DVector::from_vec(amplitudes))
    }

    pub fn from_vector(amplitudes: DVector<C64>) -> Result<Self> {
        check_dim(amplitudes.len())?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > CONSTRUCTION_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amplitudes })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        check_dim(amplitudes.len())?;
        let v = DVector::from_vec(amplitudes);
        let norm = v.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self {
            amplitudes: v.unscale(norm),
        })
    }

    /// Real amplitudes; must already be normalized.
    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&a| C64::new(a, 0.0)).collect())
    }

    /// The computational basis vector `e_j`.
    pub fn basis(dim: usize, j: usize) -> Result<Self> {
        check_dim(dim)?;
        check_index(j, dim)?;
        let mut v = DVector::zeros(dim);
        v[j] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes: v })
    }

    /// Equal-magnitude superposition of all computational basis vectors.
    pub fn uniform(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let a = C64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Ok(Self {
            amplitudes: DVector::from_element(dim, a),
        })
    }

    /// Two-dimensional state with `|a_0|^2 = q`, `|a_1|^2 = 1 - q`.
    pub fn qubit_with_weight(q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidParameter(format!(
                "weight {q} outside [0, 1]"
            )));
        }
        Self::from_real(&[q.sqrt(), (1.0 - q).sqrt()])
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn into_vector(self) -> DVector<C64> {
        self.amplitudes
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        inner_product(self, other)
    }

    /// The same ray with a global phase `e^{iθ}` applied.
    pub fn with_phase(&self, theta: f64) -> Self {
        Self {
            amplitudes: self.amplitudes.map(|a| a * C64::from_polar(1.0, theta)),
        }
    }
}

/// `⟨a|b⟩`, conjugate-linear in `a`.
pub fn inner_product(a: &PureState, b: &PureState) -> Result<C64> {
    check_same_dim(a.dim(), b.dim())?;
    Ok(a.amplitudes.dotc(&b.amplitudes))
}

/// A nondegenerate observable: distinct real eigenvalues and an orthonormal
/// eigenbasis `|B,0⟩, …, |B,D-1⟩` stored as matrix columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    eigenvalues: Vec<f64>,
    basis: DMatrix<C64>,
}

impl Observable {
    pub fn new(eigenvalues: Vec<f64>, basis: DMatrix<C64>) -> Result<Self> {
        let dim = basis.nrows();
        check_dim(dim)?;
        if basis.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: basis.ncols(),
            });
        }
        check_same_dim(dim, eigenvalues.len())?;
        for (i, a) in eigenvalues.iter().enumerate() {
            if eigenvalues[i + 1..].iter().any(|b| a == b) {
                return Err(Error::DegenerateEigenvalues);
            }
        }
        let deviation = unitarity_deviation(&basis);
        if deviation > CONSTRUCTION_TOL {
            return Err(Error::NotOrthonormal { deviation });
        }
        Ok(Self { eigenvalues, basis })
    }

    /// Eigenbasis given by the columns of `basis`, eigenvalues `0..D-1`.
    pub fn from_basis(basis: DMatrix<C64>) -> Result<Self> {
        let eigenvalues = (0..basis.ncols()).map(|j| j as f64).collect();
        Self::new(eigenvalues, basis)
    }

    /// Observable diagonal in the computational basis.
    pub fn computational(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Self::from_basis(DMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Unitary whose `j`-th column is `|B,j⟩`.
    pub fn basis(&self) -> &DMatrix<C64> {
        &self.basis
    }

    pub fn eigenvector(&self, j: usize) -> Result<PureState> {
        check_index(j, self.dim())?;
        Ok(PureState {
            amplitudes: self.basis.column(j).into_owned(),
        })
    }

    /// `⟨B,j|ψ⟩`.
    pub fn overlap(&self, state: &PureState, j: usize) -> Result<C64> {
        check_same_dim(self.dim(), state.dim())?;
        check_index(j, self.dim())?;
        Ok(self.basis.column(j).dotc(state.amplitudes()))
    }

    /// All coefficients `⟨B,j|ψ⟩` for `j = 0..D-1`.
    pub fn coefficients(&self, state: &PureState) -> Result<DVector<C64>> {
        check_same_dim(self.dim(), state.dim())?;
        Ok(self.basis.ad_mul(state.amplitudes()))
    }

    /// `|B,j⟩⟨B,j|` in the computational basis.
    pub fn projector(&self, j: usize) -> Result<DMatrix<C64>> {
        check_index(j, self.dim())?;
        let col = self.basis.column(j);
        Ok(&col * col.adjoint())
    }

    /// `B = Σ_j λ_j |B,j⟩⟨B,j|`.
    pub fn matrix(&self) -> DMatrix<C64> {
        let diag = DVector::from_iterator(
            self.dim(),
            self.eigenvalues.iter().map(|&l| C64::new(l, 0.0)),
        );
        &self.basis * DMatrix::from_diagonal(&diag) * self.basis.adjoint()
    }

    /// Same observable with outcomes `0` and `j` relabelled, so that outcome
    /// `j` becomes the selected outcome `0` of the frequency operator.
    pub fn with_selected_first(&self, j: usize) -> Result<Self> {
        check_index(j, self.dim())?;
        let mut basis = self.basis.clone();
        basis.swap_columns(0, j);
        let mut eigenvalues = self.eigenvalues.clone();
        eigenvalues.swap(0, j);
        Ok(Self { eigenvalues, basis })
    }
}

/// `|⟨B,j|ψ⟩|²`.
pub fn born_weight(state: &PureState, obs: &Observable, j: usize) -> Result<f64> {
    Ok(obs.overlap(state, j)?.norm_sqr())
}

/// Born weights for every outcome of `obs`.
pub fn born_weights(state: &PureState, obs: &Observable) -> Result<Vec<f64>> {
    Ok(obs.coefficients(state)?.iter().map(|c| c.norm_sqr()).collect())
}

pub(crate) fn complex_gaussian(rng: &mut RandomSource) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

/// Haar-distributed unit vector: normalized complex Gaussian draws.
pub fn random_state(dim: usize, rng: &mut RandomSource) -> Result<PureState> {
    check_dim(dim)?;
    loop {
        let v = DVector::from_fn(dim, |_, _| complex_gaussian(rng));
        let norm = v.norm();
        if norm > 1e-300 {
            return Ok(PureState {
                amplitudes: v.unscale(norm),
            });
        }
    }
}

/// Haar-distributed unitary from the QR decomposition of a complex Ginibre
/// matrix, with the phases of `diag(R)` moved into `Q`.
pub fn haar_unitary(dim: usize, rng: &mut RandomSource) -> Result<DMatrix<C64>> {
    if dim == 0 {
        return Err(Error::InvalidDimension(dim));
    }
    let z = DMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng));
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..dim {
        let d = r[(k, k)];
        let n = d.norm();
        let phase = if n > 0.0 { d / n } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, k)] *= phase;
        }
    }
    Ok(q)
}

/// Observable with a Haar-random eigenbasis and eigenvalues `0..D-1`.
pub fn random_basis(dim: usize, rng: &mut RandomSource) -> Result<Observable> {
    check_dim(dim)?;
    Observable::from_basis(haar_unitary(dim, rng)?)
}

/// Builds a second context `C` sharing the eigenvector `|B,shared⟩` with
/// `obs`.
///
/// `rotation` is a `(D-1)×(D-1)` unitary acting on the remaining
/// eigenvectors in their original order: the `k`-th new complement vector is
/// `Σ_m rotation[(m,k)] |B,c_m⟩`. The shared vector keeps its index.
pub fn complement_rotation(
    obs: &Observable,
    shared: usize,
    rotation: &DMatrix<C64>,
) -> Result<Observable> {
    let dim = obs.dim();
    check_index(shared, dim)?;
    if rotation.nrows() != dim - 1 || rotation.ncols() != dim - 1 {
        return Err(Error::DimensionMismatch {
            expected: dim - 1,
            found: rotation.nrows().max(rotation.ncols()),
        });
    }
    let deviation = unitarity_deviation(rotation);
    if deviation > CONSTRUCTION_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    let complement: Vec<usize> = (0..dim).filter(|&j| j != shared).collect();
    let old = obs.basis();
    let mut basis = old.clone();
    for (k, &dst) in complement.iter().enumerate() {
        let mut col = DVector::zeros(dim);
        for (m, &src) in complement.iter().enumerate() {
            col.axpy(rotation[(m, k)], &old.column(src), C64::new(1.0, 0.0));
        }
        basis.set_column(dst, &col);
    }
    Observable::new(obs.eigenvalues().to_vec(), basis)
}

/// The complement rotation whose first new vector is the normalized
/// projection of `target` onto the span of the eigenvectors other than
/// `shared`. Returns the identity when that projection vanishes.
pub fn alignment_rotation(
    obs: &Observable,
    shared: usize,
    target: &PureState,
) -> Result<DMatrix<C64>> {
    let dim = obs.dim();
    check_index(shared, dim)?;
    let coeffs = obs.coefficients(target)?;
    let projected: DVector<C64> = DVector::from_iterator(
        dim - 1,
        (0..dim).filter(|&j| j != shared).map(|j| coeffs[j]),
    );
    let norm = projected.norm();
    if norm < CONSTRUCTION_TOL {
        return Ok(DMatrix::identity(dim - 1, dim - 1));
    }
    Ok(orthonormal_completion(&projected.unscale(norm)))
}

/// Unitary matrix whose first column is the unit vector `first`, the rest
/// completed by Gram–Schmidt against the computational basis.
pub fn orthonormal_completion(first: &DVector<C64>) -> DMatrix<C64> {
    let dim = first.len();
    let mut cols: Vec<DVector<C64>> = Vec::with_capacity(dim);
    cols.push(first.clone());
    for k in 0..dim {
        if cols.len() == dim {
            break;
        }
        let mut v = DVector::zeros(dim);
        v[k] = C64::new(1.0, 0.0);
        // two passes keep the result orthogonal to working precision
        for _ in 0..2 {
            for c in &cols {
                let proj = c.dotc(&v);
                v.axpy(-proj, c, C64::new(1.0, 0.0));
            }
        }
        let n = v.norm();
        if n > 1e-6 {
            cols.push(v.unscale(n));
        }
    }
    DMatrix::from_columns(&cols)
}

/// `max |U^† U - I|` entrywise.
pub fn unitarity_deviation(u: &DMatrix<C64>) -> f64 {
    let gram = u.ad_mul(u);
    let n = gram.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..gram.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        Err(Error::InvalidDimension(dim))
    } else {
        Ok(())
    }
}

pub(crate) fn check_index(index: usize, dim: usize) -> Result<()> {
    if index >= dim {
        Err(Error::IndexOutOfRange { index, dim })
    } else {
        Ok(())
    }
}

pub(crate) fn check_same_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        Err(Error::DimensionMismatch { expected, found })
    } else {
        Ok(())
    }
}
