//! Components of the infinite tensor product at desk scale.
//!
//! Two sequences of unit vectors are equivalent when their tail product
//! stays bounded away from zero. For the eventually-constant sequences used
//! here that reduces to one check: the tail states agree up to a phase. Any
//! finite prefix is irrelevant to the relation, even a prefix slot that is
//! orthogonal — such a pair is equivalent yet has zero overlap, so
//! [`equivalent`] and [`sequence_overlap`] are kept separate on purpose.
//!
//! A component is spanned by the decorated vectors `|ψ;{i}⟩`, which replace
//! finitely many copies `ψ_r` by members `|ψ_r,i_r⟩` of a per-copy
//! orthonormal completion with `|ψ_r,0⟩ = |ψ_r⟩`. Sums over decorations
//! factorize per copy, so nothing here is exponential in the cutoff.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::hilbert::{check_index, orthonormal_completion, PureState, DERIVED_TOL};
use crate::measures::VectorSequence;
use crate::{Error, Result, C64};

/// Overlap magnitudes at or below this are treated as exact zeros.
pub const ZERO_OVERLAP: f64 = 1e-14;

/// Finitely many nonzero completion indices `i_r`, keyed by zero-based copy.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexSequence {
    entries: BTreeMap<usize, usize>,
}

impl IndexSequence {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(entries: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (r, i) in entries {
            if i == 0 {
                return Err(Error::InvalidParameter(format!(
                    "decoration index at copy {r} must be positive"
                )));
            }
            if map.insert(r, i).is_some() {
                return Err(Error::InvalidParameter(format!("copy {r} decorated twice")));
            }
        }
        Ok(Self { entries: map })
    }

    /// `i_r`, zero off the support.
    pub fn get(&self, r: usize) -> usize {
        self.entries.get(&r).copied().unwrap_or(0)
    }

    pub fn support(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.entries.iter().map(|(&r, &i)| (r, i))
    }

    /// One past the last decorated copy.
    pub fn extent(&self) -> usize {
        self.entries.keys().next_back().map_or(0, |r| r + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// A base sequence together with a decoration and the per-copy completions.
#[derive(Debug, Clone)]
pub struct DecoratedSequence {
    base: VectorSequence,
    decoration: IndexSequence,
    prefix_completions: Vec<DMatrix<C64>>,
    tail_completion: DMatrix<C64>,
}

impl DecoratedSequence {
    pub fn new(base: VectorSequence, decoration: IndexSequence) -> Result<Self> {
        let dim = base.dim();
        for (_, i) in decoration.support() {
            check_index(i, dim)?;
        }
        let complete = |s: &PureState| orthonormal_completion(s.amplitudes());
        Ok(Self {
            prefix_completions: base.prefix().iter().map(complete).collect(),
            tail_completion: complete(base.tail()),
            base,
            decoration,
        })
    }

    pub fn undecorated(base: VectorSequence) -> Self {
        Self::new(base, IndexSequence::empty()).expect("empty decoration is always valid")
    }

    pub fn base(&self) -> &VectorSequence {
        &self.base
    }

    pub fn decoration(&self) -> &IndexSequence {
        &self.decoration
    }

    /// Columns are `|ψ_r,0⟩ = |ψ_r⟩, |ψ_r,1⟩, …`.
    pub fn completion(&self, r: usize) -> &DMatrix<C64> {
        self.prefix_completions.get(r).unwrap_or(&self.tail_completion)
    }

    /// `|ψ_r, i_r⟩` for copy `r`.
    pub fn copy_vector(&self, r: usize) -> DVector<C64> {
        self.completion(r).column(self.decoration.get(r)).into_owned()
    }
}

/// An infinite product of overlap magnitudes, `exp(prefix_log) · e^{tail_rate·∞}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogOverlap {
    /// `Σ ln|⟨a_r|b_r⟩|` over the joint prefix; `-∞` if a factor vanishes.
    pub prefix_log: f64,
    /// `ln|⟨a_tail|b_tail⟩|`, snapped to 0 within tolerance of unit overlap.
    pub tail_rate: f64,
    pub converges: bool,
}

impl LogOverlap {
    pub fn value(&self) -> f64 {
        if self.converges {
            self.prefix_log.exp()
        } else {
            0.0
        }
    }
}

fn overlap_magnitude(a: &PureState, b: &PureState) -> Result<f64> {
    Ok(a.inner(b)?.norm().min(1.0))
}

fn tails_parallel(magnitude: f64) -> bool {
    1.0 - magnitude <= DERIVED_TOL
}

/// Magnitude of the inner product of two infinite product vectors.
pub fn sequence_overlap(a: &VectorSequence, b: &VectorSequence) -> Result<LogOverlap> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let tail_mag = overlap_magnitude(a.tail(), b.tail())?;
    let tail_rate = if tails_parallel(tail_mag) {
        0.0
    } else {
        tail_mag.ln()
    };
    let joint = a.prefix().len().max(b.prefix().len());
    let mut prefix_log = 0.0;
    for r in 0..joint {
        let m = overlap_magnitude(a.state_at(r), b.state_at(r))?;
        if m <= ZERO_OVERLAP {
            return Ok(LogOverlap {
                prefix_log: f64::NEG_INFINITY,
                tail_rate,
                converges: false,
            });
        }
        prefix_log += m.ln();
    }
    Ok(LogOverlap {
        prefix_log,
        tail_rate,
        converges: tail_rate == 0.0,
    })
}

/// Whether `a` and `b` name the same component: tails equal up to phase.
pub fn equivalent(a: &VectorSequence, b: &VectorSequence) -> bool {
    a.dim() == b.dim()
        && overlap_magnitude(a.tail(), b.tail()).is_ok_and(tails_parallel)
}

/// `Π_r ⟨ψ_r,i_r|φ_r⟩` together with whether the inputs were equivalent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoratedInner {
    pub re: f64,
    pub im: f64,
    pub magnitude: f64,
    pub phase: f64,
    pub equivalent: bool,
}

impl DecoratedInner {
    pub fn value(&self) -> C64 {
        C64::new(self.re, self.im)
    }

    fn from_value(v: C64) -> Self {
        Self {
            re: v.re,
            im: v.im,
            magnitude: v.norm(),
            phase: v.arg(),
            equivalent: true,
        }
    }
}

/// Unit phase `⟨ψ_tail|φ_tail⟩ / |⟨ψ_tail|φ_tail⟩|` removed from every
/// copy where `phi` runs on its tail, so the infinite tail factor is 1.
fn tail_phase(d: &DecoratedSequence, phi: &VectorSequence) -> Result<C64> {
    let z = d.base().tail().inner(phi.tail())?;
    Ok(z / z.norm())
}

/// Expansion coefficient of `phi` along the decorated vector `d`.
pub fn decorated_inner(d: &DecoratedSequence, phi: &VectorSequence) -> Result<DecoratedInner> {
    if d.base().dim() != phi.dim() {
        return Err(Error::DimensionMismatch {
            expected: d.base().dim(),
            found: phi.dim(),
        });
    }
    if !equivalent(d.base(), phi) {
        return Ok(DecoratedInner {
            equivalent: false,
            ..DecoratedInner::from_value(C64::new(0.0, 0.0))
        });
    }
    let phase = tail_phase(d, phi)?;
    let extent = d
        .base()
        .prefix()
        .len()
        .max(phi.prefix().len())
        .max(d.decoration().extent());
    let mut value = C64::new(1.0, 0.0);
    for r in 0..extent {
        let mut z = d.copy_vector(r).dotc(phi.state_at(r).amplitudes());
        if r >= phi.prefix().len() {
            z *= phase.conj();
        }
        value *= z;
    }
    Ok(DecoratedInner::from_value(value))
}

/// Partial completeness sum over decorations supported on copies `0..cutoff`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompletenessReport {
    pub cutoff: usize,
    /// `Σ_{i supported below cutoff} |⟨ψ;{i}|φ⟩|²`.
    pub partial_sum: f64,
    /// `Π_{r >= cutoff} |⟨ψ_r|φ_r⟩|²`.
    pub bound: f64,
}

/// Completeness sum of the component basis of `base` against `phi`.
///
/// The sum factorizes: each copy below the cutoff contributes its full
/// single-copy completeness sum `Σ_i |⟨ψ_r,i|φ_r⟩|²`, and every copy past it
/// contributes only the undecorated factor. Any cutoff is accepted, including
/// ones inside the prefixes, which is where the bound is not trivially 1.
pub fn completeness_check(
    base: &VectorSequence,
    phi: &VectorSequence,
    cutoff: usize,
) -> Result<CompletenessReport> {
    if base.dim() != phi.dim() {
        return Err(Error::DimensionMismatch {
            expected: base.dim(),
            found: phi.dim(),
        });
    }
    if !equivalent(base, phi) {
        return Err(Error::Inequivalent);
    }
    let d = DecoratedSequence::undecorated(base.clone());
    let joint = base.prefix().len().max(phi.prefix().len());
    let mut head = 1.0;
    for r in 0..cutoff.min(joint) {
        let proj = d.completion(r).ad_mul(phi.state_at(r).amplitudes());
        head *= proj.norm_squared();
    }
    // past the joint prefix, single-copy sums are |φ_tail|² = 1 and the
    // undecorated factors are |⟨ψ_tail|φ_tail⟩|² = 1 up to the phase removed
    let mut bound = 1.0;
    for r in cutoff..joint {
        bound *= base.state_at(r).inner(phi.state_at(r))?.norm_sqr();
    }
    Ok(CompletenessReport {
        cutoff,
        partial_sum: head * bound,
        bound,
    })
}
