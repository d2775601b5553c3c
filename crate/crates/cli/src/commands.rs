use clap::Args;
use serde::Serialize;
use serde_json::{json, Value};

use freqlab::components::{completeness_check, equivalent, sequence_overlap};
use freqlab::finite_freq::{
    fh_residual, squires_max_overlap, ResidualMode, TensorSpace, DEFAULT_STATE_CAP,
};
use freqlab::gleason::{
    context_deviations, fit_density, frame_samples, frame_sum_audit, frobenius_distance,
    DensityOperator, FrameCandidate,
};
use freqlab::hilbert::{born_weight, Observable, PureState, RandomSource};
use freqlab::measures::{
    aligned_context_pair, component_frequency, contextuality_probe, trajectory_frequencies,
    FrequencyReport, VectorSequence,
};

use crate::output::{Outcome, Table};
use crate::spec::{parse_g, parse_state, parse_sweep};
use crate::CliError;

type CmdResult = Result<Outcome, CliError>;

fn require_seed(seed: Option<u64>, what: &str) -> Result<u64, CliError> {
    seed.ok_or_else(|| CliError::Usage(format!("{what} is stochastic: --seed is required")))
}

fn selected_observable(dim: usize, selected: usize) -> Result<Observable, CliError> {
    Ok(Observable::computational(dim)?.with_selected_first(selected)?)
}

/// Least-squares slope of `ln y` against `ln x` over points with `y > 0`.
fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, y)| *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    Some(sxy / sxx)
}

#[derive(Debug, Args, Serialize)]
pub struct FhArgs {
    /// Single-copy state.
    #[arg(long, default_value = "q=0.5")]
    pub state: String,
    /// Outcome whose frequency is tracked (computational basis).
    #[arg(long, default_value_t = 0)]
    pub selected: usize,
    /// Copy counts, comma separated.
    #[arg(long, default_value = "10,100,1000,10000,100000,1000000")]
    pub copies: String,
    /// Also evaluate on the materialized state wherever it fits.
    #[arg(long)]
    pub dense: bool,
}

pub fn fh_converge(a: &FhArgs) -> CmdResult {
    let psi = parse_state(&a.state)?;
    let sweep = parse_sweep(&a.copies, 1)?;
    let obs = selected_observable(psi.dim(), a.selected)?;
    let mut table = Table::new(&["copies", "delta_analytic", "delta_dense"]);
    let mut points = Vec::new();
    let mut worst_gap: Option<f64> = None;
    for &n in &sweep {
        let analytic = fh_residual(&psi, &obs, n, ResidualMode::Analytic)?.delta;
        let fits = TensorSpace::new(psi.dim(), n)?.total_dim() <= DEFAULT_STATE_CAP as u128;
        let dense = if a.dense && fits {
            let d = fh_residual(&psi, &obs, n, ResidualMode::Dense)?.delta;
            worst_gap = Some(worst_gap.unwrap_or(0.0).max((d - analytic).abs()));
            Some(d)
        } else {
            None
        };
        points.push((n as f64, analytic));
        table.push(vec![json!(n), json!(analytic), json!(dense)]);
    }
    Ok(Outcome {
        summary: json!({
            "born_weight": born_weight(&psi, &obs, 0)?,
            "log_log_slope": log_log_slope(&points),
            "max_dense_deviation": worst_gap,
        }),
        report: None,
        table,
    })
}

#[derive(Debug, Args, Serialize)]
pub struct SquiresArgs {
    /// Born weight of the selected outcome.
    #[arg(long, default_value_t = 0.5)]
    pub q: f64,
    #[arg(long, default_value = "25,100,400,1600")]
    pub copies: String,
}

pub fn squires(a: &SquiresArgs) -> CmdResult {
    let sweep = parse_sweep(&a.copies, 1)?;
    let mut table = Table::new(&["copies", "max_overlap"]);
    let mut values = Vec::new();
    for &n in &sweep {
        let v = squires_max_overlap(a.q, n)?;
        values.push(v);
        table.push(vec![json!(n), json!(v)]);
    }
    Ok(Outcome {
        summary: json!({
            "strictly_decreasing": values.windows(2).all(|w| w[1] < w[0]),
        }),
        report: None,
        table,
    })
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// Tail state, repeated forever.
    #[arg(long, default_value = "q=0.5")]
    pub state: String,
    /// Leading states before the tail; repeat the flag for more.
    #[arg(long = "prefix")]
    pub prefix: Vec<String>,
    #[arg(long, default_value = "power:2")]
    pub g: String,
    #[arg(long, default_value_t = 0)]
    pub selected: usize,
    #[arg(long, default_value_t = 1000)]
    pub trajectories: usize,
    #[arg(long, default_value_t = 100_000)]
    pub length: usize,
    /// Include every trajectory's frequency.
    #[arg(long)]
    pub per_trajectory: bool,
}

fn sequence(prefix: &[String], tail: &str) -> Result<VectorSequence, CliError> {
    let prefix = prefix
        .iter()
        .map(|s| parse_state(s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(VectorSequence::new(prefix, parse_state(tail)?)?)
}

pub fn simulate(a: &SimulateArgs, seed: Option<u64>) -> CmdResult {
    let seed = require_seed(seed, "simulate")?;
    if a.trajectories == 0 || a.length == 0 {
        return Err(CliError::Usage("--trajectories and --length must be positive".into()));
    }
    let seq = sequence(&a.prefix, &a.state)?;
    let g = parse_g(&a.g)?;
    let obs = Observable::computational(seq.dim())?;
    let rng = RandomSource::new(seed, 0);
    let analytic = component_frequency(&seq, &obs, &g, a.selected)?;
    let freqs = trajectory_frequencies(&seq, &obs, &g, a.selected, a.trajectories, a.length, &rng)?;
    let report = FrequencyReport::from_frequencies(analytic, &freqs, a.length);

    let mut doc = serde_json::to_value(&report).expect("report serializes");
    doc["standard_error"] = json!(report.standard_error());
    doc["g"] = json!(g.to_string());
    let table = if a.per_trajectory {
        doc["frequencies"] = json!(freqs);
        let mut t = Table::new(&["trajectory", "frequency"]);
        for (k, f) in freqs.iter().enumerate() {
            t.push(vec![json!(k), json!(f)]);
        }
        t
    } else {
        report_row(&report)
    };
    Ok(Outcome {
        summary: json!({
            "analytic_f": report.analytic_f,
            "empirical_mean": report.empirical_mean,
            "outlier_fraction": report.outlier_fraction,
        }),
        report: Some(doc),
        table,
    })
}

fn report_row(r: &FrequencyReport) -> Table {
    let mut t = Table::new(&[
        "analytic_f",
        "empirical_mean",
        "empirical_sd",
        "trajectories",
        "prefix_length",
        "outlier_fraction",
    ]);
    t.push(vec![
        json!(r.analytic_f),
        json!(r.empirical_mean),
        json!(r.empirical_sd),
        json!(r.trajectories),
        json!(r.prefix_length),
        json!(r.outlier_fraction),
    ]);
    t
}

#[derive(Debug, Args, Serialize)]
pub struct ContextualityArgs {
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    /// State the g-measure is evaluated on; uniform when absent.
    #[arg(long)]
    pub state: Option<String>,
    #[arg(long, default_value = "power:4")]
    pub g: String,
    /// Random context pairs in addition to the witness pair.
    #[arg(long, default_value_t = 500)]
    pub pairs: usize,
}

fn state_or_uniform(spec: &Option<String>, dim: usize) -> Result<PureState, CliError> {
    let state = match spec {
        Some(s) => parse_state(s)?,
        None => PureState::uniform(dim)?,
    };
    if state.dim() != dim {
        return Err(CliError::Usage(format!(
            "state has dimension {}, expected {dim}",
            state.dim()
        )));
    }
    Ok(state)
}

pub fn contextuality(a: &ContextualityArgs, seed: Option<u64>) -> CmdResult {
    let state = state_or_uniform(&a.state, a.dim)?;
    let g = parse_g(&a.g)?;
    let seed = if a.pairs > 0 {
        require_seed(seed, "contextuality with random pairs")?
    } else {
        seed.unwrap_or(0)
    };
    let candidate = FrameCandidate::GMeasure {
        g: g.clone(),
        state: state.clone(),
    };
    let rng = RandomSource::new(seed, 0);
    let deviations = context_deviations(&candidate, a.dim, a.pairs, &rng)?;
    let (ctx_a, ctx_b) = aligned_context_pair(&state)?;
    let probe = contextuality_probe(&state, &ctx_a, &ctx_b, (0, 0), &g)?;
    let sums = frame_sum_audit(&candidate, a.dim, a.pairs.max(1), &rng)?;

    let max_context = deviations.iter().copied().fold(0.0, f64::max);
    let flagged = deviations[1..].iter().filter(|&&d| d > 1e-3).count();
    let flagged_fraction = if a.pairs > 0 {
        Some(flagged as f64 / a.pairs as f64)
    } else {
        None
    };
    let mut table = Table::new(&[
        "q_a",
        "q_b",
        "delta",
        "max_context_deviation",
        "max_sum_deviation",
        "pairs",
    ]);
    table.push(vec![
        json!(probe.q_a),
        json!(probe.q_b),
        json!(probe.delta),
        json!(max_context),
        json!(sums.max_sum_deviation),
        json!(a.pairs),
    ]);
    Ok(Outcome {
        summary: json!({ "delta": probe.delta, "max_context_deviation": max_context }),
        report: Some(json!({
            "g": g.to_string(),
            "witness": probe,
            "audit": {
                "max_context_deviation": max_context,
                "max_sum_deviation": sums.max_sum_deviation,
                "bases_tested": 2 * (a.pairs + 1) + sums.bases_tested,
                "random_pairs_above_1e-3": flagged_fraction,
            },
        })),
        table,
    })
}

#[derive(Debug, Args, Serialize)]
pub struct GleasonArgs {
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    /// Random bases sampled; each contributes all of its eigenvectors.
    #[arg(long, default_value_t = 200)]
    pub bases: usize,
    /// Born source: `mixed`, `random`, or `diag:<w1>,<w2>,…` (rescaled to
    /// unit trace). Ignored when `--g` is given.
    #[arg(long, default_value = "mixed")]
    pub rho: String,
    /// Use a g-measure source instead of a density operator.
    #[arg(long)]
    pub g: Option<String>,
    /// State for the g-measure source; uniform when absent.
    #[arg(long)]
    pub state: Option<String>,
}

fn parse_rho(spec: &str, dim: usize, rng: &mut RandomSource) -> Result<DensityOperator, CliError> {
    match spec {
        "mixed" => Ok(DensityOperator::maximally_mixed(dim)?),
        "random" => Ok(DensityOperator::random(dim, rng)?),
        _ => {
            let list = spec
                .strip_prefix("diag:")
                .ok_or_else(|| format!("rho `{spec}`: expected mixed, random or diag:<weights>"))?;
            let w = list
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| format!("rho `{spec}`: bad weight"))?;
            if w.len() != dim {
                return Err(CliError::Usage(format!(
                    "rho `{spec}`: {} weights for dimension {dim}",
                    w.len()
                )));
            }
            let total: f64 = w.iter().sum();
            if !(total > 0.0) {
                return Err(CliError::Usage(format!("rho `{spec}`: weights sum to {total}")));
            }
            let w: Vec<f64> = w.iter().map(|x| x / total).collect();
            Ok(DensityOperator::diagonal(&w)?)
        }
    }
}

pub fn gleason_fit(a: &GleasonArgs, seed: Option<u64>) -> CmdResult {
    let seed = require_seed(seed, "gleason-fit")?;
    let mut source_rng = RandomSource::new(seed, 1);
    let (candidate, source_rho) = match &a.g {
        Some(g) => (
            FrameCandidate::GMeasure {
                g: parse_g(g)?,
                state: state_or_uniform(&a.state, a.dim)?,
            },
            None,
        ),
        None => {
            let rho = parse_rho(&a.rho, a.dim, &mut source_rng)?;
            (FrameCandidate::Born(rho.clone()), Some(rho))
        }
    };
    let samples = frame_samples(&candidate, a.dim, a.bases, &mut RandomSource::new(seed, 0))?;
    let fit = fit_density(&samples, a.dim)?;
    let error = source_rho.map(|rho| frobenius_distance(&fit.estimate, rho.matrix()));
    let psd = fit.density().is_ok();
    let matrix = |f: fn(&freqlab::C64) -> f64| -> Vec<Vec<f64>> {
        (0..a.dim)
            .map(|i| (0..a.dim).map(|j| f(&fit.estimate[(i, j)])).collect())
            .collect()
    };
    let mut table = Table::new(&["residual", "rank", "samples", "frobenius_error", "density_operator"]);
    table.push(vec![
        json!(fit.residual),
        json!(fit.rank),
        json!(samples.len()),
        json!(error),
        json!(psd),
    ]);
    Ok(Outcome {
        summary: json!({ "residual": fit.residual, "frobenius_error": error }),
        report: Some(json!({
            "residual": fit.residual,
            "rank": fit.rank,
            "samples": samples.len(),
            "frobenius_error": error,
            "density_operator": psd,
            "estimate": { "re": matrix(|z| z.re), "im": matrix(|z| z.im) },
        })),
        table,
    })
}

#[derive(Debug, Args, Serialize)]
pub struct ComponentsArgs {
    /// Tail state of the base sequence.
    #[arg(long, default_value = "q=0.5")]
    pub tail: String,
    /// Leading states of the base sequence; repeat the flag for more.
    #[arg(long = "base-prefix")]
    pub base_prefix: Vec<String>,
    /// Leading states of the second sequence.
    #[arg(long = "phi-prefix")]
    pub phi_prefix: Vec<String>,
    /// Tail of the second sequence; the base tail when absent.
    #[arg(long)]
    pub phi_tail: Option<String>,
    /// Global phase applied to the second sequence's tail.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi_phase: f64,
    /// Decoration cutoffs, comma separated.
    #[arg(long, default_value = "0,1,2,4,8")]
    pub cutoffs: String,
}

pub fn components(a: &ComponentsArgs) -> CmdResult {
    let base = sequence(&a.base_prefix, &a.tail)?;
    let phi_tail = parse_state(a.phi_tail.as_deref().unwrap_or(&a.tail))?.with_phase(a.phi_phase);
    let phi_prefix = a
        .phi_prefix
        .iter()
        .map(|s| parse_state(s))
        .collect::<Result<Vec<_>, _>>()?;
    let phi = VectorSequence::new(phi_prefix, phi_tail)?;
    let cutoffs = parse_sweep(&a.cutoffs, 0)?;

    let overlap = sequence_overlap(&base, &phi)?;
    let eq = equivalent(&base, &phi);
    let mut table = Table::new(&["cutoff", "partial_sum", "bound"]);
    let mut sums = Vec::new();
    for &n in &cutoffs {
        let c = completeness_check(&base, &phi, n)?;
        sums.push(c.partial_sum);
        table.push(vec![json!(n), json!(c.partial_sum), json!(c.bound)]);
    }
    let overlap_json = json!({
        "prefix_log": finite_or_null(overlap.prefix_log),
        "tail_rate": overlap.tail_rate,
        "converges": overlap.converges,
        "value": overlap.value(),
    });
    Ok(Outcome {
        summary: json!({
            "equivalent": eq,
            "overlap": overlap.value(),
            "monotone": sums.windows(2).all(|w| w[1] >= w[0] - 1e-12),
        }),
        report: Some(json!({ "equivalent": eq, "overlap": overlap_json })),
        table,
    })
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}
