//! Channel-level bounds: the bidirectional max-Rains SDP, the
//! bidirectional max-relative entropy of entanglement, the strong-converse
//! error tradeoff, the amortization check and the dephasing achievability
//! simulation.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channels::{
    collective_dephasing_swap, BidirectionalChannel, IN_A, IN_B, OUT_A, OUT_B, REF_A, REF_B,
};
use crate::error::{Error, Result};
use crate::measures::{emax_ppt_state_with, max_rains_state_with, BipartiteCut, FeasibleSet, Measurement};
use crate::operator::{random, DenseOperator, PureState, SystemDims, C64};
use crate::parallel::map_indexed;
use crate::solver::{HermExpr, SdpProblem, SolveStatus, SolverOptions};

/// Largest `|LA|·|A|·|B|·|LB|` accepted by the channel SDPs.
pub const MAX_CHOI_DIM: usize = 256;

/// Slack allowed by [`amortization_check`].
pub const AMORTIZATION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    MaxRains,
    Emax,
    ReadingBound,
    ErasureFormula,
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantity::MaxRains => "max-rains",
            Quantity::Emax => "emax",
            Quantity::ReadingBound => "reading-bound",
            Quantity::ErasureFormula => "erasure-formula",
        })
    }
}

/// One evaluated bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub quantity: Quantity,
    pub value_bits: f64,
    pub channel: String,
    pub parameters: BTreeMap<String, f64>,
    /// Duality gap of the SDP behind `value_bits`; absent for closed forms.
    pub gap: Option<f64>,
    /// `PPT'`, `PPT-relaxed` or `analytic`.
    pub feasible_set: String,
    pub optimizer: Option<OptimizerDiagnostics>,
}

/// Settings for the multi-start search in [`bidirectional_emax`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Start 0 is always the maximally entangled input on both sides.
    pub starts: usize,
    pub seed: u64,
    /// Inner-SDP evaluations spent polishing each start.
    pub iterations: usize,
    pub initial_step: f64,
    pub min_step: f64,
    pub solver: SolverOptions,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            starts: 32,
            seed: 0,
            iterations: 24,
            initial_step: 0.5,
            min_step: 1e-3,
            solver: SolverOptions::default(),
        }
    }
}

impl OptimizerConfig {
    /// Only the maximally entangled start, without polishing.
    pub fn deterministic() -> Self {
        OptimizerConfig {
            starts: 1,
            iterations: 0,
            ..OptimizerConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartRecord {
    pub index: usize,
    /// Converged value; `None` when the start's first SDP failed.
    pub value_bits: Option<f64>,
    pub evaluations: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerDiagnostics {
    pub starts: usize,
    pub seed: u64,
    pub best_start: usize,
    pub records: Vec<StartRecord>,
    /// Best value over starts `0..=i`, for each `i`.
    pub best_trace: Vec<f64>,
}

fn check_size(channel: &BidirectionalChannel) -> Result<()> {
    let n = channel.in_dims().total() * channel.out_dims().total();
    if n > MAX_CHOI_DIM {
        return Err(Error::SizeLimit(format!(
            "Choi operator of `{}` has dimension {n}, above {MAX_CHOI_DIM}",
            channel.name()
        )));
    }
    Ok(())
}

pub fn bidirectional_max_rains(channel: &BidirectionalChannel) -> Result<BoundReport> {
    bidirectional_max_rains_with(channel, &SolverOptions::default())
}

/// `log₂` of `min ‖Tr_{AB}(V + Y)‖_∞` over `V, Y ⪰ 0` with
/// `T_{B LB}(V − Y) ⪰ J` on `LA A B LB`.
pub fn bidirectional_max_rains_with(
    channel: &BidirectionalChannel,
    opts: &SolverOptions,
) -> Result<BoundReport> {
    check_size(channel)?;
    let j = channel.choi()?;
    let dims = j.dims().clone();
    let mut p = SdpProblem::new();
    let v = p.psd("V", dims.clone());
    let y = p.psd("Y", dims);
    let t = p.scalar("t");
    let diff = v.expr().sub(&y.expr())?.partial_transpose(&[OUT_B, REF_B])?;
    p.constrain_psd("T(V-Y)-J", diff.sub(&HermExpr::constant(&j)?)?);
    let marginal = v.expr().add(&y.expr())?.partial_trace(&[OUT_A, OUT_B])?;
    let bound = HermExpr::scaled_identity(marginal.dims().clone(), &t.expr()).sub(&marginal)?;
    p.constrain_psd("tI-Tr(V+Y)", bound);
    p.minimize(t.expr());
    let sol = p.solve_optimal(opts)?;
    Ok(BoundReport {
        quantity: Quantity::MaxRains,
        value_bits: sol.primal_value.log2().max(0.0),
        channel: channel.name().to_string(),
        parameters: channel.params().clone(),
        gap: Some(sol.gap),
        feasible_set: FeasibleSet::PptPrime.to_string(),
        optimizer: None,
    })
}

fn output_cut() -> BipartiteCut {
    BipartiteCut::new(&[REF_A, OUT_A], &[OUT_B, REF_B]).expect("static cut")
}

/// Inner value of the E_max search: the PPT-relaxed max-relative entropy of
/// the output of `ψ_{LA A′} ⊗ φ_{B′ LB}` across `LA A : B LB`.
pub fn emax_at_input(
    channel: &BidirectionalChannel,
    psi: &PureState,
    phi: &PureState,
    opts: &SolverOptions,
) -> Result<Measurement> {
    check_size(channel)?;
    let input = DenseOperator::projector(&psi.tensor(phi)?);
    let out = channel.apply(&input)?;
    emax_ppt_state_with(&out, &output_cut(), opts)
}

struct SearchState {
    psi: PureState,
    phi: PureState,
}

fn side_dims(channel: &BidirectionalChannel) -> Result<(SystemDims, SystemDims)> {
    let da = channel.in_dims().dim_of(IN_A)?;
    let db = channel.in_dims().dim_of(IN_B)?;
    Ok((
        SystemDims::new([(REF_A, da), (IN_A, da)])?,
        SystemDims::new([(IN_B, db), (REF_B, db)])?,
    ))
}

fn start_point(channel: &BidirectionalChannel, rng: &mut ChaCha8Rng, index: usize) -> Result<SearchState> {
    let (a, b) = side_dims(channel)?;
    if index == 0 {
        let da = a.dims()[0];
        let db = b.dims()[0];
        return Ok(SearchState {
            psi: PureState::maximally_entangled(REF_A, IN_A, da)?,
            phi: PureState::maximally_entangled(IN_B, REF_B, db)?,
        });
    }
    Ok(SearchState {
        psi: random::random_pure(a, rng)?,
        phi: random::random_pure(b, rng)?,
    })
}

fn perturb(state: &PureState, step: f64, rng: &mut ChaCha8Rng) -> Result<PureState> {
    let dir = random::random_pure(state.dims().clone(), rng)?;
    let v: DVector<C64> = state.amplitudes() + dir.amplitudes() * C64::new(step, 0.0);
    PureState::normalized(v, state.dims().clone())
}

struct StartOutcome {
    record: StartRecord,
    gap: f64,
}

fn run_start(channel: &BidirectionalChannel, cfg: &OptimizerConfig, index: usize) -> StartOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let failed = |e: Error| StartOutcome {
        record: StartRecord {
            index,
            value_bits: None,
            evaluations: 1,
            error: Some(e.to_string()),
        },
        gap: f64::NAN,
    };
    let mut cur = match start_point(channel, &mut rng, index) {
        Ok(s) => s,
        Err(e) => return failed(e),
    };
    let mut best = match emax_at_input(channel, &cur.psi, &cur.phi, &cfg.solver) {
        Ok(m) => m,
        Err(e) => return failed(e),
    };
    let mut evaluations = 1;
    let mut step = cfg.initial_step;
    for _ in 0..cfg.iterations {
        if step < cfg.min_step {
            break;
        }
        let cand = match (perturb(&cur.psi, step, &mut rng), perturb(&cur.phi, step, &mut rng)) {
            (Ok(psi), Ok(phi)) => SearchState { psi, phi },
            _ => break,
        };
        evaluations += 1;
        match emax_at_input(channel, &cand.psi, &cand.phi, &cfg.solver) {
            Ok(m) if m.bits > best.bits + 1e-9 => {
                best = m;
                cur = cand;
                step *= 1.5;
            }
            _ => step *= 0.5,
        }
    }
    StartOutcome {
        record: StartRecord {
            index,
            value_bits: Some(best.bits),
            evaluations,
            error: None,
        },
        gap: best.gap,
    }
}

/// Multi-start search for `sup E_max^{PPT}(LA A; B LB)` over pure product
/// inputs `ψ_{LA A′} ⊗ φ_{B′ LB}` with `|LA| = |A′|`, `|LB| = |B′|`. Start `i`
/// draws from stream `i` of a ChaCha generator seeded with `cfg.seed`, so
/// adding starts never changes earlier ones.
pub fn bidirectional_emax(channel: &BidirectionalChannel, cfg: &OptimizerConfig) -> Result<BoundReport> {
    if cfg.starts == 0 {
        return Err(Error::InvalidParameter("at least one optimizer start is required".into()));
    }
    check_size(channel)?;
    let indices: Vec<usize> = (0..cfg.starts).collect();
    let outcomes = map_indexed(&indices, |_, &i| run_start(channel, cfg, i));

    let mut best: Option<(usize, f64, f64)> = None;
    let mut trace = Vec::with_capacity(outcomes.len());
    for o in &outcomes {
        if let Some(v) = o.record.value_bits {
            if best.is_none_or(|(_, b, _)| v > b) {
                best = Some((o.record.index, v, o.gap));
            }
        }
        trace.push(best.map_or(f64::NAN, |(_, b, _)| b));
    }
    let Some((best_start, value, gap)) = best else {
        let detail = outcomes
            .iter()
            .find_map(|o| o.record.error.clone())
            .unwrap_or_default();
        return Err(Error::Solver {
            status: SolveStatus::NumericalFailure,
            detail: format!("every optimizer start failed: {detail}"),
        });
    };
    Ok(BoundReport {
        quantity: Quantity::Emax,
        value_bits: value,
        channel: channel.name().to_string(),
        parameters: channel.params().clone(),
        gap: Some(gap),
        feasible_set: FeasibleSet::PptRelaxed.to_string(),
        optimizer: Some(OptimizerDiagnostics {
            starts: cfg.starts,
            seed: cfg.seed,
            best_start,
            records: outcomes.into_iter().map(|o| o.record).collect(),
            best_trace: trace,
        }),
    })
}

/// Smallest error probability compatible with `n` channel uses at
/// `rate_bits` per use when the capacity bound is `bound_bits`:
/// `max(0, 1 − 2^{−n(rate − bound)})`.
pub fn strong_converse_error(bound_bits: f64, n: u64, rate_bits: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if !bound_bits.is_finite() || !rate_bits.is_finite() {
        return Err(Error::InvalidParameter("bound and rate must be finite".into()));
    }
    let excess = rate_bits - bound_bits;
    if excess <= 0.0 {
        return Ok(0.0);
    }
    Ok((1.0 - (-(n as f64) * excess).exp2()).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmortizationResult {
    /// `R_max(LA A; B LB)` of the channel output.
    pub lhs: f64,
    /// `R_max(LA A′; B′ LB)` of the input.
    pub input_term: f64,
    pub channel_term: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

pub fn amortization_check(channel: &BidirectionalChannel, rho: &DenseOperator) -> Result<AmortizationResult> {
    let channel_term = bidirectional_max_rains(channel)?.value_bits;
    amortization_check_given(channel, channel_term, rho)
}

/// [`amortization_check`] with a precomputed channel term.
pub fn amortization_check_given(
    channel: &BidirectionalChannel,
    channel_term: f64,
    rho: &DenseOperator,
) -> Result<AmortizationResult> {
    rho.require_density()?;
    let opts = SolverOptions::default();
    let in_cut = BipartiteCut::new(&[REF_A, IN_A], &[IN_B, REF_B])?;
    let input_term = max_rains_state_with(rho, &in_cut, &opts)?.bits;
    let out = channel.apply(rho)?;
    let lhs = max_rains_state_with(&out, &output_cut(), &opts)?.bits;
    let rhs = input_term + channel_term;
    Ok(AmortizationResult {
        lhs,
        input_term,
        channel_term,
        rhs,
        satisfied: lhs <= rhs + AMORTIZATION_TOL,
    })
}

/// One random trial of [`amortization_trials`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmortizationTrial {
    pub index: usize,
    pub channel: String,
    pub result: AmortizationResult,
}

/// Runs `trials` amortization checks on random mixed inputs
/// `ρ_{LA A′ B′ LB}` with `|LA| = |A′|`, `|LB| = |B′|`, cycling through
/// `channels`. Inputs are drawn up front from one seeded generator, so the
/// trials are reproducible for any thread count.
pub fn amortization_trials(
    channels: &[BidirectionalChannel],
    trials: usize,
    seed: u64,
) -> Result<Vec<AmortizationTrial>> {
    if channels.is_empty() {
        return Err(Error::InvalidParameter("no channels to check".into()));
    }
    let terms = channels
        .iter()
        .map(|ch| bidirectional_max_rains(ch).map(|r| r.value_bits))
        .collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs = (0..trials)
        .map(|t| {
            let ch = &channels[t % channels.len()];
            let (da, db) = (ch.in_dims().dim_of(IN_A)?, ch.in_dims().dim_of(IN_B)?);
            let dims = SystemDims::new([(REF_A, da), (IN_A, da), (IN_B, db), (REF_B, db)])?;
            random::random_density(dims, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    map_indexed(&inputs, |t, rho| {
        let k = t % channels.len();
        Ok(AmortizationTrial {
            index: t,
            channel: channels[k].name().to_string(),
            result: amortization_check_given(&channels[k], terms[k], rho)?,
        })
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AchievabilityBranch {
    /// X-basis outcomes on `A` and `LB`, as `±1`.
    pub outcome_a: i8,
    pub outcome_lb: i8,
    pub probability: f64,
    /// Fidelity of the `B LA` pair with `Φ⁺` before the correction.
    pub raw_fidelity: f64,
    pub z_corrected: bool,
    pub corrected_fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AchievabilityReport {
    /// Largest entry of the difference between the simulated output and
    /// `½ Φ⁺⊗Φ⁺ + ½ Φ⁻⊗Φ⁻`.
    pub mixture_deviation: f64,
    pub branches: Vec<AchievabilityBranch>,
    pub agree_probability: f64,
    pub disagree_probability: f64,
}

fn pair_fidelity(rho: &DenseOperator, target: &PureState) -> Result<f64> {
    let ket = DenseOperator::ket(target);
    let bra = DenseOperator::bra(target);
    let rho = rho.permute(target.dims().labels())?;
    Ok(bra.compose(&rho)?.compose(&ket)?.entry(0, 0).re)
}

/// Sends `Φ⁺_{LA A′} ⊗ Φ⁺_{B′ LB}` through the collective dephasing swap at
/// `p = 1/2, φ = π`, measures `A` and `LB` in the X basis and applies `Z` on
/// `B` when the outcomes disagree.
pub fn dephasing_achievability_sim() -> Result<AchievabilityReport> {
    let ch = collective_dephasing_swap(0.5, std::f64::consts::PI)?;
    let input = PureState::phi(REF_A, IN_A, 1.0)?.tensor(&PureState::phi(IN_B, REF_B, 1.0)?)?;
    let out = ch.apply(&DenseOperator::projector(&input))?;

    let order = [OUT_A, OUT_B, REF_A, REF_B];
    let plus = DenseOperator::projector(&PureState::phi(OUT_A, REF_B, 1.0)?.tensor(&PureState::phi(OUT_B, REF_A, 1.0)?)?);
    let minus = DenseOperator::projector(&PureState::phi(OUT_A, REF_B, -1.0)?.tensor(&PureState::phi(OUT_B, REF_A, -1.0)?)?);
    let target = plus.add(&minus)?.scale_real(0.5).permute(&order)?;
    let mixture_deviation = out.permute(&order)?.max_abs_diff(&target)?;

    let h = std::f64::consts::FRAC_1_SQRT_2;
    let x_state = |label: &str, s: i8| {
        let amps = DVector::from_vec(vec![C64::new(h, 0.0), C64::new(f64::from(s) * h, 0.0)]);
        PureState::new(amps, SystemDims::single(label, 2)?)
    };
    let phi_plus = PureState::phi(OUT_B, REF_A, 1.0)?;
    let z = DenseOperator::diagonal(SystemDims::single(OUT_B, 2)?, &[1.0, -1.0])?;

    let mut branches = Vec::with_capacity(4);
    for sa in [1i8, -1] {
        for sl in [1i8, -1] {
            let meas = DenseOperator::bra(&x_state(OUT_A, sa)?.tensor(&x_state(REF_B, sl)?)?);
            let post = out.conjugate_subsystems(std::slice::from_ref(&meas))?;
            let probability = post.real_trace()?;
            let pair = post.scale_real(1.0 / probability);
            let raw_fidelity = pair_fidelity(&pair, &phi_plus)?;
            let z_corrected = sa != sl;
            let fixed = if z_corrected { pair.conjugate_local(&z)? } else { pair };
            branches.push(AchievabilityBranch {
                outcome_a: sa,
                outcome_lb: sl,
                probability,
                raw_fidelity,
                z_corrected,
                corrected_fidelity: pair_fidelity(&fixed, &phi_plus)?,
            });
        }
    }
    let agree_probability = branches.iter().filter(|b| !b.z_corrected).map(|b| b.probability).sum();
    let disagree_probability = branches.iter().filter(|b| b.z_corrected).map(|b| b.probability).sum();
    Ok(AchievabilityReport {
        mixture_deviation,
        branches,
        agree_probability,
        disagree_probability,
    })
}
