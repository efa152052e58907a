use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

use bidir_bounds::bounds::{
    amortization_trials, bidirectional_emax, bidirectional_max_rains, dephasing_achievability_sim,
    BoundReport, OptimizerConfig, Quantity,
};
use bidir_bounds::channels::{
    check_bicovariance, cnot_channel, cnot_output_representations, collective_dephasing_swap,
    depolarizing, identity_channel, noisy_cnot, partial_swap, partial_swap_traceout,
    pauli_representation, swap_channel, teleportation_trials, Bicovariance, BidirectionalChannel,
    GroupRepresentation, IN_A, IN_B, OUT_A, OUT_B,
};
use bidir_bounds::parallel::map_indexed;
use bidir_bounds::reading::{
    erasure_formula_report, erasure_wiretap_cell, induced_bidirectional_channel, reading_bound_via_emax,
};
use serde::Serialize;

use crate::config::Settings;
use crate::CliError;

pub const CHANNELS: &[&str] = &[
    "identity",
    "swap",
    "partial-swap",
    "partial-swap-traceout",
    "collective-dephasing",
    "cnot",
    "noisy-cnot",
    "depolarizing",
    "erasure-cell",
];

pub const CSV_HEADER: [&str; 4] = ["param", "value_bits", "gap", "wall_time_ms"];

const BICOVARIANCE_LIMIT: f64 = 1e-12;
const TELEPORTATION_LIMIT: f64 = 1e-8;
const ACHIEVABILITY_LIMIT: f64 = 1e-12;

enum Target {
    Channel(BidirectionalChannel),
    ErasureCell { d: usize, p: f64 },
}

fn need(v: Option<f64>, name: &str, channel: &str) -> Result<f64, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("channel `{channel}` needs --{name}")))
}

fn build(s: &Settings) -> Result<Target, CliError> {
    let name = s
        .channel
        .as_deref()
        .ok_or_else(|| CliError::Usage("--channel is required".into()))?;
    let ch = match name {
        "identity" => identity_channel(),
        "swap" => swap_channel(),
        "cnot" => cnot_channel(),
        "partial-swap" => partial_swap(need(s.p, "p", name)?),
        "partial-swap-traceout" => partial_swap_traceout(need(s.p, "p", name)?),
        "collective-dephasing" => collective_dephasing_swap(need(s.p, "p", name)?, s.phi.unwrap_or(PI)),
        "noisy-cnot" => noisy_cnot(need(s.q, "q", name)?),
        "depolarizing" => depolarizing(need(s.p, "p", name)?),
        "erasure-cell" => {
            let d = s.d.unwrap_or(2);
            let p = need(s.p, "p", name)?;
            // Validates d and p up front.
            erasure_wiretap_cell(d, p)?;
            return Ok(Target::ErasureCell { d, p });
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown channel `{other}`; expected one of {}",
                CHANNELS.join(", ")
            )))
        }
    };
    Ok(Target::Channel(ch?))
}

fn quantity(s: &Settings) -> Result<Quantity, CliError> {
    match s.quantity.as_deref().unwrap_or("max-rains") {
        "max-rains" => Ok(Quantity::MaxRains),
        "emax" => Ok(Quantity::Emax),
        "reading-bound" => Ok(Quantity::ReadingBound),
        "erasure-formula" => Ok(Quantity::ErasureFormula),
        other => Err(CliError::Usage(format!(
            "unknown quantity `{other}`; expected max-rains, emax, reading-bound or erasure-formula"
        ))),
    }
}

fn optimizer(s: &Settings, base: OptimizerConfig) -> OptimizerConfig {
    OptimizerConfig {
        starts: s.starts.unwrap_or(base.starts),
        seed: s.seed.unwrap_or(base.seed),
        ..base
    }
}

fn evaluate(s: &Settings) -> Result<BoundReport, CliError> {
    let q = quantity(s)?;
    let report = match (build(s)?, q) {
        (Target::Channel(ch), Quantity::MaxRains) => bidirectional_max_rains(&ch)?,
        (Target::Channel(ch), Quantity::Emax) => bidirectional_emax(&ch, &optimizer(s, OptimizerConfig::default()))?,
        (Target::ErasureCell { d, p }, Quantity::ErasureFormula) => erasure_formula_report(d, p)?,
        (Target::ErasureCell { d, p }, Quantity::ReadingBound) => {
            let base = if s.starts.is_some() {
                OptimizerConfig::default()
            } else {
                OptimizerConfig::deterministic()
            };
            reading_bound_via_emax(&erasure_wiretap_cell(d, p)?, &optimizer(s, base))?
        }
        (Target::ErasureCell { d, p }, Quantity::MaxRains) => {
            bidirectional_max_rains(&induced_bidirectional_channel(&erasure_wiretap_cell(d, p)?)?)?
        }
        (Target::ErasureCell { d, p }, Quantity::Emax) => bidirectional_emax(
            &induced_bidirectional_channel(&erasure_wiretap_cell(d, p)?)?,
            &optimizer(s, OptimizerConfig::default()),
        )?,
        (Target::Channel(ch), q) => {
            return Err(CliError::Usage(format!(
                "quantity `{q}` applies to erasure-cell only, not `{}`",
                ch.name()
            )))
        }
    };
    Ok(report)
}

fn emit(s: &Settings, bytes: &[u8]) -> Result<(), CliError> {
    match &s.out {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Usage(format!("cannot write to stdout: {e}"))),
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<Vec<u8>, CliError> {
    let mut text = serde_json::to_string_pretty(v).map_err(|e| CliError::Numerical(e.to_string()))?;
    text.push('\n');
    Ok(text.into_bytes())
}

pub fn bound(s: &Settings) -> Result<(), CliError> {
    let report = evaluate(s)?;
    emit(s, &to_json(&report)?)
}

/// Parses `start:stop:steps`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("grid `{text}` is not start:stop:steps"));
    let parts: Vec<&str> = text.split(':').collect();
    let [a, b, n] = parts[..] else {
        return Err(bad());
    };
    let start: f64 = a.trim().parse().map_err(|_| bad())?;
    let stop: f64 = b.trim().parse().map_err(|_| bad())?;
    let steps: usize = n.trim().parse().map_err(|_| bad())?;
    if steps < 2 || !(start < stop) {
        return Err(CliError::Usage(format!("grid `{text}` needs steps >= 2 and start < stop")));
    }
    let last = (steps - 1) as f64;
    Ok((0..steps).map(|i| start + (stop - start) * i as f64 / last).collect())
}

fn with_param(s: &Settings, param: &str, v: f64) -> Result<Settings, CliError> {
    let mut point = s.clone();
    match param {
        "p" => point.p = Some(v),
        "q" => point.q = Some(v),
        "phi" => point.phi = Some(v),
        other => return Err(CliError::Usage(format!("cannot sweep `{other}`; use p, q or phi"))),
    }
    Ok(point)
}

pub fn sweep(s: &Settings) -> Result<(), CliError> {
    let grid = parse_grid(
        s.grid
            .as_deref()
            .ok_or_else(|| CliError::Usage("sweep needs --grid start:stop:steps".into()))?,
    )?;
    let param = s.param.as_deref().unwrap_or("p");
    let points = grid
        .iter()
        .map(|&v| with_param(s, param, v))
        .collect::<Result<Vec<_>, _>>()?;
    // Catch usage errors once instead of at every grid point.
    build(&points[0])?;
    quantity(s)?;

    let rows = map_indexed(&points, |_, point| {
        let t0 = Instant::now();
        evaluate(point).map(|r| (r, t0.elapsed().as_secs_f64() * 1e3))
    });
    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record(CSV_HEADER).map_err(csv_err)?;
    for (v, row) in grid.iter().zip(rows) {
        let (report, ms) = row?;
        let gap = report.gap.map(|g| format!("{g:?}")).unwrap_or_default();
        let time = if s.no_timing { String::new() } else { format!("{ms:.3}") };
        out.write_record([format!("{v:?}"), format!("{:?}", report.value_bits), gap, time])
            .map_err(csv_err)?;
    }
    let bytes = out.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    emit(s, &bytes)
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Usage(format!("csv: {e}"))
}

fn verdict(ok: bool, line: String) -> Result<(), CliError> {
    println!("{line}");
    if ok {
        Ok(())
    } else {
        Err(CliError::Numerical("verification failed".into()))
    }
}

pub fn verify_achievability() -> Result<(), CliError> {
    let rep = dephasing_achievability_sim()?;
    println!("mixture deviation: {:e}", rep.mixture_deviation);
    let mut ok = rep.mixture_deviation < ACHIEVABILITY_LIMIT;
    for b in &rep.branches {
        println!(
            "branch a={} lb={} probability={} raw fidelity={} corrected fidelity={}",
            b.outcome_a, b.outcome_lb, b.probability, b.raw_fidelity, b.corrected_fidelity
        );
        ok &= (b.corrected_fidelity - 1.0).abs() < ACHIEVABILITY_LIMIT;
    }
    verdict(
        ok,
        format!(
            "achievability: {} (agree {}, disagree {})",
            if ok { "PASS" } else { "FAIL" },
            rep.agree_probability,
            rep.disagree_probability
        ),
    )
}

pub fn verify_amortization(s: &Settings) -> Result<(), CliError> {
    let channels = match s.channel {
        Some(_) => match build(s)? {
            Target::Channel(ch) => vec![ch],
            Target::ErasureCell { d, p } => vec![induced_bidirectional_channel(&erasure_wiretap_cell(d, p)?)?],
        },
        None => vec![partial_swap(0.3)?, noisy_cnot(0.8)?, collective_dephasing_swap(0.5, PI)?],
    };
    let trials = s.trials.unwrap_or(50);
    let results = amortization_trials(&channels, trials, s.seed.unwrap_or(0))?;
    let mut passed = 0;
    for t in &results {
        let r = &t.result;
        println!(
            "trial {} {}: output {:.9} <= input {:.9} + channel {:.9}: {}",
            t.index,
            t.channel,
            r.lhs,
            r.input_term,
            r.channel_term,
            if r.satisfied { "ok" } else { "VIOLATED" }
        );
        passed += usize::from(r.satisfied);
    }
    verdict(passed == trials, format!("amortization: {passed}/{trials} satisfied"))
}

fn pauli_product_outputs(g: &GroupRepresentation, h: &GroupRepresentation) -> Result<(GroupRepresentation, GroupRepresentation), CliError> {
    let n = h.len();
    let w = (0..g.len() * n).map(|k| g.elements()[k / n].matrix().clone()).collect();
    let t = (0..g.len() * n).map(|k| h.elements()[k % n].matrix().clone()).collect();
    Ok((GroupRepresentation::new(OUT_A, w)?, GroupRepresentation::new(OUT_B, t)?))
}

pub fn verify_bicovariance(s: &Settings) -> Result<(), CliError> {
    let mut s = s.clone();
    let name = s.channel.get_or_insert_with(|| "cnot".into()).clone();
    let Target::Channel(ch) = build(&s)? else {
        return Err(CliError::Usage("bicovariance needs a two-qubit channel".into()));
    };
    if ch.in_dims().dims() != [2, 2] || ch.out_dims().dims() != [2, 2] {
        return Err(CliError::Usage(format!("`{name}` is not a two-qubit channel")));
    }
    let g = pauli_representation(IN_A)?;
    let h = pauli_representation(IN_B)?;
    // CNOT-type channels intertwine Paulis with their propagated images;
    // everything else is checked against plain local Paulis.
    let (w, t) = if matches!(name.as_str(), "cnot" | "noisy-cnot") {
        cnot_output_representations()?
    } else {
        pauli_product_outputs(&g, &h)?
    };
    let reps = Bicovariance { g: &g, h: &h, w: &w, t: &t };
    let dev = check_bicovariance(&ch, &reps)?;
    println!("{name}: bicovariance deviation {dev:e}");
    if dev >= BICOVARIANCE_LIMIT {
        return verdict(false, "bicovariance: FAIL".into());
    }
    let trials = s.trials.unwrap_or(20);
    let dists = teleportation_trials(&ch, &reps, trials, s.seed.unwrap_or(0))?;
    let worst = dists.iter().cloned().fold(0.0, f64::max);
    println!("teleportation: {trials} random inputs, worst trace distance {worst:e}");
    let ok = worst < TELEPORTATION_LIMIT;
    verdict(ok, format!("bicovariance: {}", if ok { "PASS" } else { "FAIL" }))
}
