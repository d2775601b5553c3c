//! Product measures on infinite sequences of measurement outcomes.
//!
//! Each copy `r` of a repeated measurement of `B` contributes independent
//! per-copy weights
//!
//! ```text
//! q_r(j) = g(|⟨ψ_r|B,j⟩|) / N_r,      N_r = Σ_j g(|⟨ψ_r|B,j⟩|),
//! ```
//!
//! where `g : [0,1] → [0,1]` fixes `g(0) = 0` and `g(1) = 1`. The Born
//! measure is `g(x) = x²`, for which `N_r = 1`. Only the endpoints of `g` are
//! pinned by eigenstate products; everything in between is a modelling
//! choice, and different choices give different limiting frequencies for the
//! same component.
//!
//! Vector sequences are restricted to eventually-constant ones (a finite
//! prefix followed by a repeated tail state), so every limiting frequency
//! here is an honest limit equal to the tail weight.

use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::hilbert::{
    alignment_rotation, check_index, check_same_dim, complement_rotation, Observable, PureState,
    RandomSource, CONSTRUCTION_TOL, DERIVED_TOL,
};
use crate::{Error, Result};

/// Monotone tabulated function on `[0,1]`, linearly interpolated.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedG {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl TabulatedG {
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    fn eval(&self, x: f64) -> f64 {
        let i = self.xs.partition_point(|&t| t <= x);
        if i == 0 {
            return self.ys[0];
        }
        if i == self.xs.len() {
            return *self.ys.last().unwrap();
        }
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let (y0, y1) = (self.ys[i - 1], self.ys[i]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

/// The function `g` selecting an outcome-sequence measure.
#[derive(Debug, Clone, PartialEq)]
pub enum GMeasure {
    /// `g(x) = x^p`, `p >= 1`. `p = 2` is the Born measure.
    Power(f64),
    Table(TabulatedG),
}

impl GMeasure {
    pub fn born() -> Self {
        GMeasure::Power(2.0)
    }

    pub fn power(p: f64) -> Result<Self> {
        if !p.is_finite() || p < 1.0 {
            return Err(Error::InvalidMeasure(format!(
                "power exponent must be finite and >= 1, got {p}"
            )));
        }
        Ok(GMeasure::Power(p))
    }

    /// Piecewise-linear `g` through `points`, which must start at `(0, 0)`,
    /// end at `(1, 1)`, have strictly increasing abscissae and nondecreasing
    /// values.
    pub fn table(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidMeasure("table needs at least two points".into()));
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::InvalidMeasure("table contains non-finite values".into()));
        }
        if xs[0] != 0.0 || *xs.last().unwrap() != 1.0 {
            return Err(Error::InvalidMeasure("table must span x = 0 to x = 1".into()));
        }
        if ys[0].abs() > CONSTRUCTION_TOL || (ys.last().unwrap() - 1.0).abs() > CONSTRUCTION_TOL {
            return Err(Error::InvalidMeasure("g(0) = 0 and g(1) = 1 are required".into()));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidMeasure("abscissae must increase strictly".into()));
        }
        if ys.windows(2).any(|w| w[1] < w[0]) || ys.iter().any(|y| !(0.0..=1.0).contains(y)) {
            return Err(Error::InvalidMeasure(
                "values must be nondecreasing within [0, 1]".into(),
            ));
        }
        Ok(GMeasure::Table(TabulatedG { xs, ys }))
    }

    /// `g(x)` for an overlap magnitude `x`, clamped into `[0,1]`.
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        match self {
            GMeasure::Power(p) => x.powf(*p),
            GMeasure::Table(t) => t.eval(x),
        }
    }

    pub fn is_born(&self) -> bool {
        matches!(self, GMeasure::Power(p) if *p == 2.0)
    }
}

impl fmt::Display for GMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GMeasure::Power(p) => write!(f, "power:{p}"),
            GMeasure::Table(t) => write!(f, "table:{}-points", t.xs.len()),
        }
    }
}

/// Normalized per-copy outcome weights and their normalization `N_r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeWeights {
    pub weights: Vec<f64>,
    pub normalization: f64,
}

impl OutcomeWeights {
    pub fn get(&self, j: usize) -> Result<f64> {
        check_index(j, self.weights.len())?;
        Ok(self.weights[j])
    }

    fn cumulative(&self) -> Vec<f64> {
        self.weights
            .iter()
            .scan(0.0, |acc, w| {
                *acc += w;
                Some(*acc)
            })
            .collect()
    }
}

/// Per-copy weights `g(|⟨ψ|B,j⟩|) / N_r`.
pub fn outcome_probs(state: &PureState, obs: &Observable, g: &GMeasure) -> Result<OutcomeWeights> {
    let coeffs = obs.coefficients(state)?;
    let raw: Vec<f64> = if g.is_born() {
        coeffs.iter().map(|c| c.norm_sqr()).collect()
    } else {
        coeffs.iter().map(|c| g.eval(c.norm())).collect()
    };
    let normalization: f64 = raw.iter().sum();
    if !(normalization > 0.0) || !normalization.is_finite() {
        return Err(Error::Internal(format!(
            "normalization {normalization} for a unit state in a complete basis"
        )));
    }
    Ok(OutcomeWeights {
        weights: raw.iter().map(|w| w / normalization).collect(),
        normalization,
    })
}

/// An eventually-constant infinite sequence of states: a finite prefix, then
/// `tail` repeated forever. An empty prefix is the infinite repetition state
/// `|ψ⟩^{⊗∞}`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorSequence {
    prefix: Vec<PureState>,
    tail: PureState,
}

impl VectorSequence {
    pub fn new(prefix: Vec<PureState>, tail: PureState) -> Result<Self> {
        for s in &prefix {
            check_same_dim(tail.dim(), s.dim())?;
        }
        Ok(Self { prefix, tail })
    }

    pub fn repetition(state: PureState) -> Self {
        Self {
            prefix: Vec::new(),
            tail: state,
        }
    }

    /// Same tail with a different prefix.
    pub fn with_prefix(&self, prefix: Vec<PureState>) -> Result<Self> {
        Self::new(prefix, self.tail.clone())
    }

    pub fn dim(&self) -> usize {
        self.tail.dim()
    }

    pub fn prefix(&self) -> &[PureState] {
        &self.prefix
    }

    pub fn tail(&self) -> &PureState {
        &self.tail
    }

    /// State of copy `r` (zero-based).
    pub fn state_at(&self, r: usize) -> &PureState {
        self.prefix.get(r).unwrap_or(&self.tail)
    }
}

/// Outcomes `j_1, …, j_L` of the first `L` copies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomePrefix {
    outcomes: Vec<usize>,
    dim: usize,
}

impl OutcomePrefix {
    pub fn new(outcomes: Vec<usize>, dim: usize) -> Result<Self> {
        for &j in &outcomes {
            check_index(j, dim)?;
        }
        Ok(Self { outcomes, dim })
    }

    pub fn outcomes(&self) -> &[usize] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Limiting frequency of `selected` on the component named by `seq`.
///
/// The sequence `q_r` of per-copy weights is eventually constant, so its
/// Cesàro average converges to the tail weight whatever the prefix.
pub fn component_frequency(
    seq: &VectorSequence,
    obs: &Observable,
    g: &GMeasure,
    selected: usize,
) -> Result<f64> {
    outcome_probs(seq.tail(), obs, g)?.get(selected)
}

/// Finite average `(1/n) Σ_{r<n} q_r` of the per-copy weights.
pub fn average_probability(
    seq: &VectorSequence,
    obs: &Observable,
    g: &GMeasure,
    selected: usize,
    n: usize,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("average over zero copies".into()));
    }
    let head = seq.prefix().len().min(n);
    let mut sum = 0.0;
    for r in 0..head {
        sum += outcome_probs(seq.state_at(r), obs, g)?.get(selected)?;
    }
    let tail = component_frequency(seq, obs, g, selected)?;
    sum += tail * (n - head) as f64;
    Ok(sum / n as f64)
}

/// Cumulative per-copy weights for a sequence, precomputed once.
struct SequenceSampler {
    prefix: Vec<Vec<f64>>,
    tail: Vec<f64>,
}

impl SequenceSampler {
    fn new(seq: &VectorSequence, obs: &Observable, g: &GMeasure) -> Result<Self> {
        check_same_dim(obs.dim(), seq.dim())?;
        let prefix = seq
            .prefix()
            .iter()
            .map(|s| outcome_probs(s, obs, g).map(|w| w.cumulative()))
            .collect::<Result<_>>()?;
        let tail = outcome_probs(seq.tail(), obs, g)?.cumulative();
        Ok(Self { prefix, tail })
    }

    #[inline]
    fn draw(cumulative: &[f64], u: f64) -> usize {
        match cumulative.iter().position(|&c| u < c) {
            Some(j) => j,
            // u fell into rounding slack above the last partial sum
            None => {
                let mut j = cumulative.len() - 1;
                while j > 0 && cumulative[j] == cumulative[j - 1] {
                    j -= 1;
                }
                j
            }
        }
    }

    fn cumulative_at(&self, r: usize) -> &[f64] {
        self.prefix.get(r).unwrap_or(&self.tail)
    }

    fn sample(&self, len: usize, rng: &mut RandomSource) -> Vec<usize> {
        (0..len)
            .map(|r| Self::draw(self.cumulative_at(r), rng.random::<f64>()))
            .collect()
    }

    /// Same draws as [`Self::sample`], counting `selected` without storing.
    fn count(&self, selected: usize, len: usize, rng: &mut RandomSource) -> u64 {
        let head = self.prefix.len().min(len);
        let mut hits = 0u64;
        for r in 0..head {
            hits += (Self::draw(&self.prefix[r], rng.random::<f64>()) == selected) as u64;
        }
        let tail = &self.tail;
        for _ in head..len {
            hits += (Self::draw(tail, rng.random::<f64>()) == selected) as u64;
        }
        hits
    }
}

/// Samples `j_1, …, j_L` with `j_r` drawn independently from
/// `outcome_probs(ψ_r, obs, g)`.
pub fn sample_prefix(
    seq: &VectorSequence,
    obs: &Observable,
    g: &GMeasure,
    len: usize,
    rng: &mut RandomSource,
) -> Result<OutcomePrefix> {
    if len == 0 {
        return Err(Error::InvalidParameter("prefix length must be at least 1".into()));
    }
    let sampler = SequenceSampler::new(seq, obs, g)?;
    OutcomePrefix::new(sampler.sample(len, rng), seq.dim())
}

/// Fraction of copies in `prefix` that gave `selected`.
pub fn empirical_frequency(prefix: &OutcomePrefix, selected: usize) -> Result<f64> {
    if prefix.is_empty() {
        return Err(Error::InvalidParameter("empty outcome prefix".into()));
    }
    check_index(selected, prefix.dim())?;
    let hits = prefix.outcomes().iter().filter(|&&j| j == selected).count();
    Ok(hits as f64 / prefix.len() as f64)
}

/// Summary of a strong-law experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyReport {
    /// Limiting frequency of the component under the chosen measure.
    pub analytic_f: f64,
    pub empirical_mean: f64,
    /// Sample standard deviation across trajectories (0 for one trajectory).
    pub empirical_sd: f64,
    pub trajectories: usize,
    pub prefix_length: usize,
    /// Fraction of trajectories with `|f - analytic_f| > 3 √(f(1-f)/L)`.
    pub outlier_fraction: f64,
}

impl FrequencyReport {
    pub fn from_frequencies(analytic_f: f64, frequencies: &[f64], prefix_length: usize) -> Self {
        let m = frequencies.len();
        let mean = frequencies.iter().sum::<f64>() / m as f64;
        let sd = if m > 1 {
            (frequencies.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (m - 1) as f64).sqrt()
        } else {
            0.0
        };
        let threshold = 3.0 * (analytic_f * (1.0 - analytic_f) / prefix_length as f64).sqrt();
        let outliers = frequencies
            .iter()
            .filter(|f| (*f - analytic_f).abs() > threshold)
            .count();
        Self {
            analytic_f,
            empirical_mean: mean,
            empirical_sd: sd,
            trajectories: m,
            prefix_length,
            outlier_fraction: outliers as f64 / m as f64,
        }
    }

    /// Standard error of `empirical_mean`.
    pub fn standard_error(&self) -> f64 {
        self.empirical_sd / (self.trajectories as f64).sqrt()
    }
}

/// Empirical frequencies of `selected` in `trajectories` independent prefixes
/// of length `len`. Trajectory `t` draws from stream `t` of
/// `rng.master_seed()`, so the output does not depend on the thread count.
pub fn trajectory_frequencies(
    seq: &VectorSequence,
    obs: &Observable,
    g: &GMeasure,
    selected: usize,
    trajectories: usize,
    len: usize,
    rng: &RandomSource,
) -> Result<Vec<f64>> {
    if trajectories == 0 || len == 0 {
        return Err(Error::InvalidParameter(
            "trajectory count and prefix length must be at least 1".into(),
        ));
    }
    check_index(selected, seq.dim())?;
    let sampler = SequenceSampler::new(seq, obs, g)?;
    let seed = rng.master_seed();
    Ok((0..trajectories as u64)
        .into_par_iter()
        .map(|t| {
            let mut stream = RandomSource::new(seed, t);
            sampler.count(selected, len, &mut stream) as f64 / len as f64
        })
        .collect())
}

/// Samples `trajectories` prefixes and compares their frequencies with the
/// limiting frequency of the component.
pub fn strong_law_experiment(
    seq: &VectorSequence,
    obs: &Observable,
    g: &GMeasure,
    selected: usize,
    trajectories: usize,
    len: usize,
    rng: &RandomSource,
) -> Result<FrequencyReport> {
    let analytic = component_frequency(seq, obs, g, selected)?;
    let freqs = trajectory_frequencies(seq, obs, g, selected, trajectories, len, rng)?;
    Ok(FrequencyReport::from_frequencies(analytic, &freqs, len))
}

/// Weights of one shared eigenvector in two measurement contexts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContextualityProbe {
    pub q_a: f64,
    pub q_b: f64,
    pub delta: f64,
}

/// Compares the weight that `g` assigns to an eigenvector shared by two
/// observables, `|A,j_A⟩ = |B,j_B⟩` up to phase.
pub fn contextuality_probe(
    state: &PureState,
    obs_a: &Observable,
    obs_b: &Observable,
    shared: (usize, usize),
    g: &GMeasure,
) -> Result<ContextualityProbe> {
    let (ja, jb) = shared;
    let va = obs_a.eigenvector(ja)?;
    let vb = obs_b.eigenvector(jb)?;
    let overlap = va.inner(&vb)?.norm();
    if (overlap - 1.0).abs() > DERIVED_TOL {
        return Err(Error::NoSharedEigenstate { overlap });
    }
    let q_a = outcome_probs(state, obs_a, g)?.get(ja)?;
    let q_b = outcome_probs(state, obs_b, g)?.get(jb)?;
    Ok(ContextualityProbe {
        q_a,
        q_b,
        delta: (q_a - q_b).abs(),
    })
}

/// Deterministic pair of contexts sharing `|e_0⟩`: the computational basis,
/// and the basis whose first complement vector is the projection of `state`
/// off `|e_0⟩`. For the uniform qutrit state the second context sees
/// magnitudes `(1/√3, √(2/3), 0)`.
pub fn aligned_context_pair(state: &PureState) -> Result<(Observable, Observable)> {
    let a = Observable::computational(state.dim())?;
    let rot = alignment_rotation(&a, 0, state)?;
    let b = complement_rotation(&a, 0, &rot)?;
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{born_weights, haar_unitary, random_basis, random_state};
    use proptest::prelude::*;
    use rand::Rng;

    fn third() -> PureState {
        PureState::qubit_with_weight(1.0 / 3.0).unwrap()
    }

    fn quartic() -> GMeasure {
        GMeasure::power(4.0).unwrap()
    }

    fn smooth_table() -> GMeasure {
        GMeasure::table(vec![(0.0, 0.0), (0.25, 0.05), (0.5, 0.4), (0.8, 0.6), (1.0, 1.0)]).unwrap()
    }

    #[test]
    fn g_endpoints() {
        for g in [GMeasure::born(), quartic(), GMeasure::power(1.0).unwrap(), smooth_table()] {
            assert!(g.eval(0.0).abs() < 1e-12);
            assert!((g.eval(1.0) - 1.0).abs() < 1e-12);
        }
        assert!(GMeasure::born().is_born());
        assert!(!quartic().is_born());
    }

    #[test]
    fn g_validation() {
        assert!(GMeasure::power(0.5).is_err());
        assert!(GMeasure::power(f64::NAN).is_err());
        assert!(GMeasure::table(vec![(0.0, 0.1), (1.0, 1.0)]).is_err());
        assert!(GMeasure::table(vec![(0.0, 0.0), (0.9, 1.0)]).is_err());
        assert!(GMeasure::table(vec![(0.0, 0.0), (0.5, 0.6), (0.5, 0.7), (1.0, 1.0)]).is_err());
        assert!(GMeasure::table(vec![(0.0, 0.0), (0.5, 0.6), (0.7, 0.5), (1.0, 1.0)]).is_err());
    }

    #[test]
    fn table_interpolates_linearly() {
        let g = smooth_table();
        assert!((g.eval(0.125) - 0.025).abs() < 1e-15);
        assert!((g.eval(0.65) - 0.5).abs() < 1e-15);
        assert_eq!(g.eval(0.8), 0.6);
    }

    #[test]
    fn born_measure_reproduces_born_weights() {
        let b = Observable::computational(2).unwrap();
        let w = outcome_probs(&third(), &b, &GMeasure::born()).unwrap();
        assert!((w.normalization - 1.0).abs() < 1e-15);
        assert!((w.weights[0] - 1.0 / 3.0).abs() < 1e-15);

        let mut rng = RandomSource::new(31, 0);
        for _ in 0..1000 {
            let d = 2 + (rng.random::<u32>() % 5) as usize;
            let s = random_state(d, &mut rng).unwrap();
            let b = random_basis(d, &mut rng).unwrap();
            let w = outcome_probs(&s, &b, &GMeasure::born()).unwrap();
            let born = born_weights(&s, &b).unwrap();
            for (x, y) in w.weights.iter().zip(&born) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn quartic_measure_example() {
        // g-weights (1/9, 4/9), normalization 5/9
        let b = Observable::computational(2).unwrap();
        let w = outcome_probs(&third(), &b, &quartic()).unwrap();
        assert!((w.weights[0] - 0.2).abs() < 1e-15);
        assert!((w.weights[1] - 0.8).abs() < 1e-15);
        assert!((w.normalization - 5.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn eigenstate_forces_certainty_for_any_g() {
        let b = Observable::computational(3).unwrap();
        let e0 = PureState::basis(3, 0).unwrap();
        for g in [GMeasure::born(), quartic(), smooth_table()] {
            assert_eq!(outcome_probs(&e0, &b, &g).unwrap().weights, vec![1.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn component_frequency_is_the_tail_weight() {
        let b = Observable::computational(2).unwrap();
        let s = third();
        let seq = VectorSequence::repetition(s.clone());
        assert!((component_frequency(&seq, &b, &GMeasure::born(), 0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let f4 = component_frequency(&seq, &b, &quartic(), 0).unwrap();
        assert!((f4 - 0.2).abs() < 1e-15);

        let mut rng = RandomSource::new(32, 0);
        let prefix: Vec<_> = (0..50).map(|_| random_state(2, &mut rng).unwrap()).collect();
        let decorated = seq.with_prefix(prefix).unwrap();
        assert_eq!(component_frequency(&decorated, &b, &quartic(), 0).unwrap(), f4);
    }

    #[test]
    fn average_probability_converges_to_tail() {
        let b = Observable::computational(2).unwrap();
        let prefix = vec![PureState::basis(2, 0).unwrap(); 10];
        let seq = VectorSequence::new(prefix, third()).unwrap();
        let g = GMeasure::born();
        let a10 = average_probability(&seq, &b, &g, 0, 10).unwrap();
        assert_eq!(a10, 1.0);
        let a1000 = average_probability(&seq, &b, &g, 0, 1000).unwrap();
        let expected = (10.0 + 990.0 / 3.0) / 1000.0;
        assert!((a1000 - expected).abs() < 1e-14);
        let a_big = average_probability(&seq, &b, &g, 0, 10_000_000).unwrap();
        assert!((a_big - 1.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn sampling_certainty_and_determinism() {
        let b = Observable::computational(2).unwrap();
        let seq = VectorSequence::repetition(PureState::basis(2, 0).unwrap());
        for g in [GMeasure::born(), quartic()] {
            let p = sample_prefix(&seq, &b, &g, 100, &mut RandomSource::new(1, 0)).unwrap();
            assert!(p.outcomes().iter().all(|&j| j == 0));
        }
        let seq = VectorSequence::repetition(third());
        let a = sample_prefix(&seq, &b, &quartic(), 500, &mut RandomSource::new(9, 2)).unwrap();
        let c = sample_prefix(&seq, &b, &quartic(), 500, &mut RandomSource::new(9, 2)).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn first_outcome_histogram_matches_born_weights() {
        let b = Observable::computational(2).unwrap();
        let seq = VectorSequence::repetition(third());
        let mut rng = RandomSource::new(33, 0);
        let draws = 100_000;
        let zeros = (0..draws)
            .filter(|_| {
                sample_prefix(&seq, &b, &GMeasure::born(), 1, &mut rng).unwrap().outcomes()[0] == 0
            })
            .count();
        let f = zeros as f64 / draws as f64;
        assert!((f - 1.0 / 3.0).abs() < 0.01, "{f}");
    }

    #[test]
    fn empirical_frequency_examples() {
        let p = OutcomePrefix::new(vec![0, 0, 0, 0], 2).unwrap();
        assert_eq!(empirical_frequency(&p, 0).unwrap(), 1.0);
        let p = OutcomePrefix::new(vec![0, 1, 0, 1], 2).unwrap();
        assert_eq!(empirical_frequency(&p, 0).unwrap(), 0.5);
        let p = OutcomePrefix::new(vec![0, 2, 1, 2, 2], 3).unwrap();
        let total: f64 = (0..3).map(|j| empirical_frequency(&p, j).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-15);
        assert!(empirical_frequency(&OutcomePrefix::new(vec![], 2).unwrap(), 0).is_err());
        assert!(OutcomePrefix::new(vec![0, 3], 3).is_err());
    }

    #[test]
    fn trajectories_reproduce_sample_prefix() {
        let b = Observable::computational(3).unwrap();
        let seq = VectorSequence::new(
            vec![PureState::basis(3, 1).unwrap(), PureState::uniform(3).unwrap()],
            random_state(3, &mut RandomSource::new(3, 3)).unwrap(),
        )
        .unwrap();
        let rng = RandomSource::new(77, 0);
        let freqs = trajectory_frequencies(&seq, &b, &quartic(), 2, 5, 300, &rng).unwrap();
        for (t, f) in freqs.iter().enumerate() {
            let p = sample_prefix(&seq, &b, &quartic(), 300, &mut RandomSource::new(77, t as u64)).unwrap();
            assert_eq!(*f, empirical_frequency(&p, 2).unwrap());
        }
    }

    #[test]
    fn strong_law_certainty_case() {
        let b = Observable::computational(2).unwrap();
        let seq = VectorSequence::repetition(PureState::basis(2, 0).unwrap());
        let r = strong_law_experiment(&seq, &b, &quartic(), 0, 20, 1000, &RandomSource::new(5, 0)).unwrap();
        assert_eq!(r.empirical_mean, 1.0);
        assert_eq!(r.empirical_sd, 0.0);
        assert_eq!(r.outlier_fraction, 0.0);
        assert_eq!(r.analytic_f, 1.0);
    }

    #[test]
    fn strong_law_small_run_concentrates() {
        let b = Observable::computational(2).unwrap();
        let seq = VectorSequence::repetition(third());
        let rng = RandomSource::new(6, 0);
        let born = strong_law_experiment(&seq, &b, &GMeasure::born(), 0, 200, 10_000, &rng).unwrap();
        assert!((born.empirical_mean - 1.0 / 3.0).abs() < 5.0 * born.standard_error());
        let quart = strong_law_experiment(&seq, &b, &quartic(), 0, 200, 10_000, &rng).unwrap();
        assert!((quart.empirical_mean - 0.2).abs() < 5.0 * quart.standard_error());
        assert!(born.outlier_fraction < 0.03 && quart.outlier_fraction < 0.03);
    }

    #[test]
    fn strong_law_rejects_empty_runs() {
        let b = Observable::computational(2).unwrap();
        let seq = VectorSequence::repetition(third());
        let rng = RandomSource::new(6, 0);
        assert!(strong_law_experiment(&seq, &b, &quartic(), 0, 0, 10, &rng).is_err());
        assert!(strong_law_experiment(&seq, &b, &quartic(), 0, 10, 0, &rng).is_err());
    }

    #[test]
    fn contextuality_witness_for_quartic_measure() {
        let u = PureState::uniform(3).unwrap();
        let (a, b) = aligned_context_pair(&u).unwrap();
        let probe = contextuality_probe(&u, &a, &b, (0, 0), &quartic()).unwrap();
        assert!((probe.q_a - 1.0 / 3.0).abs() < 1e-12);
        assert!((probe.q_b - 0.2).abs() < 1e-12);
        assert!((probe.delta - 2.0 / 15.0).abs() < 1e-10);
        let born = contextuality_probe(&u, &a, &b, (0, 0), &GMeasure::born()).unwrap();
        assert!(born.delta < 1e-10);
    }

    #[test]
    fn contextuality_probe_requires_shared_vector() {
        let u = PureState::uniform(3).unwrap();
        let a = Observable::computational(3).unwrap();
        let b = random_basis(3, &mut RandomSource::new(1, 1)).unwrap();
        assert!(matches!(
            contextuality_probe(&u, &a, &b, (0, 0), &quartic()),
            Err(Error::NoSharedEigenstate { .. })
        ));
    }

    #[test]
    fn two_dimensional_contexts_are_rigid() {
        let mut rng = RandomSource::new(34, 0);
        for _ in 0..50 {
            let s = random_state(2, &mut rng).unwrap();
            let a = random_basis(2, &mut rng).unwrap();
            let phase = haar_unitary(1, &mut rng).unwrap();
            let b = complement_rotation(&a, 0, &phase).unwrap();
            for g in [quartic(), smooth_table()] {
                let p = contextuality_probe(&s, &a, &b, (0, 0), &g).unwrap();
                assert!(p.delta < 1e-10);
            }
        }
    }

    #[test]
    fn eigenstate_products_have_binary_frequencies() {
        let b = Observable::computational(3).unwrap();
        for j in 0..3 {
            let seq = VectorSequence::repetition(b.eigenvector(j).unwrap());
            for g in [GMeasure::born(), quartic(), smooth_table()] {
                let f = component_frequency(&seq, &b, &g, 0).unwrap();
                assert_eq!(f, if j == 0 { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn nonunique_frequency_gap() {
        let b = Observable::computational(2).unwrap();
        let seq = VectorSequence::repetition(third());
        let f2 = component_frequency(&seq, &b, &GMeasure::born(), 0).unwrap();
        let f4 = component_frequency(&seq, &b, &quartic(), 0).unwrap();
        assert!((f2 - f4 - 2.0 / 15.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn weights_normalize_for_any_power(seed in any::<u64>(), p in 1.0f64..8.0, d in 2usize..7) {
            let mut rng = RandomSource::new(seed, 0);
            let s = random_state(d, &mut rng).unwrap();
            let b = random_basis(d, &mut rng).unwrap();
            let w = outcome_probs(&s, &b, &GMeasure::power(p).unwrap()).unwrap();
            prop_assert!((w.weights.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            prop_assert!(w.weights.iter().all(|&x| x >= 0.0));
        }

        #[test]
        fn prefix_never_moves_the_limit(seed in any::<u64>(), len in 0usize..20) {
            let mut rng = RandomSource::new(seed, 0);
            let b = random_basis(3, &mut rng).unwrap();
            let tail = random_state(3, &mut rng).unwrap();
            let prefix: Vec<_> = (0..len).map(|_| random_state(3, &mut rng).unwrap()).collect();
            let plain = VectorSequence::repetition(tail.clone());
            let decorated = VectorSequence::new(prefix, tail).unwrap();
            for g in [GMeasure::born(), GMeasure::power(4.0).unwrap()] {
                prop_assert_eq!(
                    component_frequency(&plain, &b, &g, 1).unwrap(),
                    component_frequency(&decorated, &b, &g, 1).unwrap()
                );
            }
        }
    }
}
