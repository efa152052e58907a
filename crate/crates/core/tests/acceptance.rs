//! Acceptance criteria, one PASS/FAIL line each. Run with
//! `cargo test -p bidir-bounds --test acceptance -- --nocapture`.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use bidir_bounds::bounds::{
    amortization_trials, bidirectional_emax, bidirectional_max_rains, dephasing_achievability_sim,
    strong_converse_error, OptimizerConfig,
};
use bidir_bounds::channels::{
    check_bicovariance, cnot_channel, cnot_output_representations, collective_dephasing_swap,
    identity_channel, noisy_cnot, partial_swap, partial_swap_traceout, pauli_representation,
    swap_channel, teleportation_trials, Bicovariance, BidirectionalChannel, IN_A, IN_B,
};
use bidir_bounds::measures::{emax_ppt_state, max_rains_state, BipartiteCut};
use bidir_bounds::operator::{random, DenseOperator, PureState, SystemDims};
use bidir_bounds::reading::{erasure_private_reading_bound, erasure_wiretap_cell, induced_bidirectional_channel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t0 = Instant::now();
    let v = f();
    (v, t0.elapsed())
}

fn rains(ch: &BidirectionalChannel) -> Option<f64> {
    bidirectional_max_rains(ch).ok().map(|r| r.value_bits)
}

fn grid21() -> Vec<f64> {
    (0..=20).map(|i| i as f64 / 20.0).collect()
}

fn sweep(build: impl Fn(f64) -> BidirectionalChannel) -> Option<Vec<f64>> {
    grid21().into_iter().map(|p| rains(&build(p))).collect()
}

fn max_jump(v: &[f64]) -> f64 {
    v.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max)
}

fn criterion_1() -> Outcome {
    let (swap, ts) = timed(|| rains(&swap_channel().unwrap()));
    let (id, ti) = timed(|| rains(&identity_channel().unwrap()));
    let (Some(swap), Some(id)) = (swap, id) else {
        return outcome(false, "solver failure".into());
    };
    let pass = (swap - 2.0).abs() <= 1e-4 && id.abs() <= 1e-6 && ts.as_secs_f64() < 5.0 && ti.as_secs_f64() < 5.0;
    outcome(pass, format!("swap {swap:.8} ({ts:.2?}), identity {id:.2e} ({ti:.2?})"))
}

fn criterion_2() -> Outcome {
    let (full, t) = timed(|| sweep(|p| partial_swap(p).unwrap()));
    let trace = sweep(|p| partial_swap_traceout(p).unwrap());
    let (Some(full), Some(trace)) = (full, trace) else {
        return outcome(false, "solver failure in a sweep".into());
    };
    let monotone = full.windows(2).all(|w| w[1] <= w[0]);
    let ends = (full[0] - 2.0).abs() <= 1e-4 && full[20].abs() <= 1e-4;
    let trace_ends = (trace[0] - 1.0).abs() <= 1e-4 && trace[20].abs() <= 1e-4;
    let pass = monotone && ends && trace_ends && t.as_secs_f64() < 120.0;
    outcome(
        pass,
        format!(
            "partial swap {:.6} -> {:.2e}, monotone {monotone} ({t:.2?}); traceout {:.6} -> {:.2e}",
            full[0], full[20], trace[0], trace[20]
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut jumps = Vec::new();
    let mut curve_pi = None;
    for (label, phi) in [("pi/4", PI / 4.0), ("pi/2", PI / 2.0), ("pi", PI)] {
        let Some(v) = sweep(|p| collective_dephasing_swap(p, phi).unwrap()) else {
            return outcome(false, format!("solver failure in the phi = {label} sweep"));
        };
        jumps.push((label, max_jump(&v)));
        if phi == PI {
            curve_pi = Some(v);
        }
    }
    let v = curve_pi.unwrap();
    let half = (v[10] - 1.0).abs() <= 1e-4;
    let ends = (v[0] - 2.0).abs() <= 1e-4 && (v[20] - 2.0).abs() <= 1e-4;
    let asym = (0..=20).map(|i| (v[i] - v[20 - i]).abs()).fold(0.0, f64::max);
    let continuous = jumps.iter().all(|&(_, j)| j < 0.1);
    let pass = half && ends && asym <= 1e-6 && continuous;
    let jumps: Vec<String> = jumps.iter().map(|(l, j)| format!("{l}: {j:.4}")).collect();
    outcome(
        pass,
        format!(
            "p=1/2 {:.6}, p=0 {:.6}, p=1 {:.6}, asymmetry {asym:.1e}; max step jump {}",
            v[10],
            v[0],
            v[20],
            jumps.join(", ")
        ),
    )
}

fn criterion_4() -> Outcome {
    let (rep, t) = timed(dephasing_achievability_sim);
    let Ok(rep) = rep else {
        return outcome(false, "simulation failed".into());
    };
    let worst = rep
        .branches
        .iter()
        .map(|b| (b.corrected_fidelity - 1.0).abs())
        .fold(0.0, f64::max);
    let pass = rep.mixture_deviation <= 1e-12 && worst <= 1e-12 && t.as_secs_f64() < 1.0;
    outcome(
        pass,
        format!("mixture deviation {:.1e}, worst |F - 1| {worst:.1e} ({t:.2?})", rep.mixture_deviation),
    )
}

fn criterion_5() -> Outcome {
    let channels = [
        partial_swap(0.3).unwrap(),
        noisy_cnot(0.8).unwrap(),
        collective_dephasing_swap(0.5, PI).unwrap(),
    ];
    let (trials, t) = timed(|| amortization_trials(&channels, 50, 2024));
    let Ok(trials) = trials else {
        return outcome(false, "solver failure".into());
    };
    let slack = trials
        .iter()
        .map(|tr| tr.result.rhs - tr.result.lhs)
        .fold(f64::INFINITY, f64::min);
    let pass = trials.len() == 50 && slack >= -1e-6 && t.as_secs_f64() < 300.0;
    outcome(pass, format!("{} trials, minimum slack {slack:.3e} ({t:.2?})", trials.len()))
}

fn criterion_6() -> Outcome {
    let a = erasure_private_reading_bound(2, 0.0).unwrap();
    let b = erasure_private_reading_bound(3, 0.5).unwrap();
    let full: Vec<f64> = (2..=8).map(|d| erasure_private_reading_bound(d, 1.0).unwrap()).collect();
    let pass = a == 2.0 && (b - 3f64.log2()).abs() <= 1e-12 && full.iter().all(|&v| v == 0.0);
    outcome(pass, format!("(2, 0) -> {a}, (3, 0.5) -> {b:.12}, p = 1 -> {full:?}"))
}

fn criterion_7() -> Outcome {
    let t0 = Instant::now();
    let cfg = OptimizerConfig::deterministic();
    let residual = induced_bidirectional_channel(&erasure_wiretap_cell(2, 0.4).unwrap())
        .unwrap()
        .completeness_residual();
    let bound = |p: f64| {
        let ch = induced_bidirectional_channel(&erasure_wiretap_cell(2, p).unwrap()).unwrap();
        bidirectional_emax(&ch, &cfg).ok().map(|r| r.value_bits)
    };
    let (Some(at1), Some(at0)) = (bound(1.0), bound(0.0)) else {
        return outcome(false, "solver failure".into());
    };
    let t = t0.elapsed();
    let pass = residual < 1e-12 && at1.abs() <= 1e-6 && at0 >= 1.9 && t.as_secs_f64() < 600.0;
    outcome(
        pass,
        format!("completeness {residual:.1e}, E-bound p=1 {at1:.6}, p=0 {at0:.6} ({t:.2?})"),
    )
}

fn criterion_8() -> Outcome {
    let mut gaps = Vec::new();
    let mut worst_phi: f64 = 0.0;
    for d in [2usize, 3] {
        let rho = DenseOperator::projector(&PureState::maximally_entangled("A", "B", d).unwrap());
        let cut = BipartiteCut::new(&["A"], &["B"]).unwrap();
        let (Ok(r), Ok(e)) = (max_rains_state(&rho, &cut), emax_ppt_state(&rho, &cut)) else {
            return outcome(false, format!("solver failure on Phi_{d}"));
        };
        let want = (d as f64).log2();
        worst_phi = worst_phi.max((r.bits - want).abs()).max((e.bits - want).abs());
        gaps.extend([r.gap, e.gap]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let mut worst_ppt: f64 = 0.0;
    for i in 0..20 {
        let right = 2 + i % 2;
        let (a, b) = (SystemDims::single("A", 2).unwrap(), SystemDims::single("B", right).unwrap());
        let rho = random::random_separable(&a, &b, 4, &mut rng).unwrap();
        let cut = BipartiteCut::new(&["A"], &["B"]).unwrap();
        let (Ok(r), Ok(e)) = (max_rains_state(&rho, &cut), emax_ppt_state(&rho, &cut)) else {
            return outcome(false, format!("solver failure on PPT state {i}"));
        };
        worst_ppt = worst_ppt.max(r.bits.abs()).max(e.bits.abs());
        gaps.extend([r.gap, e.gap]);
    }
    let worst_gap = gaps.iter().cloned().fold(0.0, f64::max);
    let pass = worst_phi <= 1e-6 && worst_ppt < 1e-6 && worst_gap < 1e-7;
    outcome(
        pass,
        format!(
            "Phi_d error {worst_phi:.1e}, PPT states max {worst_ppt:.1e}, worst gap {worst_gap:.1e} over {} solves",
            gaps.len()
        ),
    )
}

fn criterion_9() -> Outcome {
    let g = pauli_representation(IN_A).unwrap();
    let h = pauli_representation(IN_B).unwrap();
    let (w, t) = cnot_output_representations().unwrap();
    let reps = Bicovariance { g: &g, h: &h, w: &w, t: &t };
    let Ok(dev) = check_bicovariance(&cnot_channel().unwrap(), &reps) else {
        return outcome(false, "bicovariance check failed".into());
    };
    let mut worst: f64 = 0.0;
    for (ch, seed) in [(cnot_channel().unwrap(), 9), (noisy_cnot(0.7).unwrap(), 10)] {
        match teleportation_trials(&ch, &reps, 20, seed) {
            Ok(d) => worst = d.into_iter().fold(worst, f64::max),
            Err(e) => return outcome(false, format!("teleportation of {} failed: {e}", ch.name())),
        }
    }
    let pass = dev < 1e-12 && worst < 1e-8;
    outcome(pass, format!("CNOT deviation {dev:.1e}, worst teleportation trace distance {worst:.1e}"))
}

fn criterion_10() -> Outcome {
    let e = strong_converse_error(1.0, 10, 1.5).unwrap();
    let seq: Vec<f64> = (1..=200).map(|n| strong_converse_error(1.0, n, 1.5).unwrap()).collect();
    let monotone = seq.windows(2).all(|w| w[1] >= w[0]);
    outcome(e == 0.96875 && monotone, format!("eps(1, 1.5, 10) = {e}, monotone over n <= 200: {monotone}"))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("max-Rains of swap and identity", criterion_1),
        ("partial-swap sweeps", criterion_2),
        ("collective-dephasing sweeps", criterion_3),
        ("dephasing achievability", criterion_4),
        ("amortization", criterion_5),
        ("erasure reading formula", criterion_6),
        ("induced erasure channel", criterion_7),
        ("state-level SDP oracles", criterion_8),
        ("CNOT bicovariance and teleportation", criterion_9),
        ("strong-converse error", criterion_10),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        println!("{} criterion {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
        if !o.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
