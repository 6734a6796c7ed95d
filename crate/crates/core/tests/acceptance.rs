//! End-to-end acceptance checks at the reference parameters
//! (kappa = 0.5, omega_c = 30, eta = 0.005, omega0 = 1, alpha = 0.8).
//! Prints one line per criterion and exits non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use decoherence_core::dynamics::MarkovConstants;
use decoherence_core::states::concurrence_from_modes;
use decoherence_core::volterra::ConstantKernel;
use decoherence_core::{
    coefficients_derivative, coefficients_integral, markov_decay, markov_shift, markov_uv, run_oracle, solve,
    solve_modes, Coefficients, Complex64, EcsKind, EcsState, OracleSettings, PhaseBranch, SpectralParams,
    SystemParams, TimeGrid, VolterraProblem,
};
use rand::{RngExt, SeedableRng};
use rayon::prelude::*;

const T_MAX: f64 = 10.0;
const DT: f64 = 2e-3;
const ALPHA: f64 = 0.8;

/// Relative band for the long-time rate and shift.
const MARKOV_BAND: f64 = 0.05;
/// Wall-clock budget for a single coefficient run.
const COEFF_RUNTIME_S: f64 = 30.0;
/// Overshoot factor over the Markov rate.
const OVERSHOOT: f64 = 2.0;
const INVARIANT_TOL: f64 = 1e-8;
const ACCELERATION_SLACK: f64 = 1e-6;
const ACCELERATION_FROM: f64 = 0.5;
const SYMMETRY_TOL: f64 = 1e-8;
const ORACLE_TOL: f64 = 1e-3;
const ORACLE_CUTOFF: usize = 16;
const ORACLE_T_MAX: f64 = 5.0;
const ORACLE_RUNTIME_S: f64 = 300.0;
const ORDER_RANGE: (f64, f64) = (3.5, 4.5);
const UNITARITY_TOL: f64 = 1e-12;
const DAMPING_TOL: f64 = 1e-10;
const RANDOM_DRAWS: usize = 100;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn env() -> SpectralParams {
    SpectralParams::ohmic(0.005, 30.0).unwrap()
}

fn sys(lambda: PhaseBranch) -> SystemParams {
    SystemParams::normalized(0.5, lambda).unwrap()
}

fn grid() -> TimeGrid {
    TimeGrid::new(T_MAX, DT).unwrap()
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn last_coefficients() -> (Coefficients, f64, Vec<Coefficients>) {
    let start = Instant::now();
    let s = sys(PhaseBranch::InPhase);
    let modes = solve_modes(&s, &env(), &grid()).unwrap();
    let track = coefficients_integral(&s, &env(), &modes).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let samples = track.samples().to_vec();
    (*samples.last().unwrap(), elapsed, samples)
}

fn ac1_markov_rate() -> Outcome {
    let (last, elapsed, _) = last_coefficients();
    let target = markov_decay(&env(), 1.0).unwrap();
    let rel = last.gamma / target - 1.0;
    verdict(
        rel.abs() <= MARKOV_BAND && elapsed < COEFF_RUNTIME_S,
        format!(
            "Gamma(10) = {:.6e}, pi J(1) = {target:.6e}, relative {rel:+.4} (band {MARKOV_BAND}), {elapsed:.2} s",
            last.gamma
        ),
    )
}

fn ac2_markov_shift() -> Outcome {
    let (last, _, _) = last_coefficients();
    let target = markov_shift(&env(), 1.0).unwrap();
    let rel = last.shift / target - 1.0;
    verdict(
        rel.abs() <= MARKOV_BAND,
        format!("delta_omega(10) = {:.6e}, shift = {target:.6e}, relative {rel:+.4}", last.shift),
    )
}

fn ac3_overshoot() -> Outcome {
    let (_, _, samples) = last_coefficients();
    let g = grid();
    let peak = samples
        .iter()
        .enumerate()
        .filter(|(k, _)| *k > 0 && g.time(*k) <= 1.0 + 1e-12)
        .map(|(_, c)| c.gamma)
        .fold(f64::NEG_INFINITY, f64::max);
    let target = OVERSHOOT * markov_decay(&env(), 1.0).unwrap();
    verdict(peak >= target, format!("peak Gamma on (0, 1] = {peak:.6e} >= {target:.6e}"))
}

fn constant_within(track: &[f64], value: f64) -> f64 {
    track.iter().map(|c| (c - value).abs()).fold(0.0, f64::max)
}

fn ac4_decoherence_free() -> Outcome {
    let flat = (2.0 * ALPHA * ALPHA).tanh();
    let mut worst: f64 = 0.0;
    for (lambda, minus, plus) in [
        (PhaseBranch::InPhase, EcsKind::PsiMinus, EcsKind::PsiPlus),
        (PhaseBranch::OutOfPhase, EcsKind::PhiMinus, EcsKind::PhiPlus),
    ] {
        let modes = solve_modes(&sys(lambda), &env(), &grid()).unwrap();
        for (kind, value) in [(minus, 1.0), (plus, flat)] {
            let s = EcsState::new(kind, Complex64::new(ALPHA, 0.0)).unwrap();
            worst = worst.max(constant_within(&concurrence_from_modes(&s, &modes).unwrap(), value));
        }
    }
    verdict(worst <= INVARIANT_TOL, format!("max deviation from 1 and tanh(2|alpha|^2) = {worst:.3e}"))
}

fn ac5_acceleration() -> Outcome {
    let s = sys(PhaseBranch::InPhase);
    let g = grid();
    let exact = solve_modes(&s, &env(), &g).unwrap();
    let markov = MarkovConstants::new(&env(), 1.0).unwrap().amplitudes(&s, &g).unwrap();
    let state = EcsState::new(EcsKind::PhiMinus, Complex64::new(ALPHA, 0.0)).unwrap();
    let c_exact = concurrence_from_modes(&state, &exact).unwrap();
    let c_markov = concurrence_from_modes(&state, &markov).unwrap();
    let excess = (0..g.count())
        .filter(|&k| g.time(k) >= ACCELERATION_FROM - 1e-12)
        .map(|k| c_exact[k] - c_markov[k])
        .fold(f64::NEG_INFINITY, f64::max);
    verdict(
        excess <= ACCELERATION_SLACK,
        format!("max(C_nonmarkov - C_markov) on [0.5, 10] = {excess:.3e}"),
    )
}

fn ac6_exchange_symmetry() -> Outcome {
    let g = grid();
    let markov = MarkovConstants::new(&env(), 1.0).unwrap();
    let tracks = |lambda: PhaseBranch, kind: EcsKind| {
        let s = EcsState::new(kind, Complex64::new(ALPHA, 0.0)).unwrap();
        let exact = solve_modes(&sys(lambda), &env(), &g).unwrap();
        let approx = markov.amplitudes(&sys(lambda), &g).unwrap();
        (concurrence_from_modes(&s, &exact).unwrap(), concurrence_from_modes(&s, &approx).unwrap())
    };
    let gap = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let mut protected: f64 = 0.0;
    let mut markov_decaying: f64 = 0.0;
    for (psi, phi) in [(EcsKind::PsiMinus, EcsKind::PhiMinus), (EcsKind::PsiPlus, EcsKind::PhiPlus)] {
        let (psi_exact, psi_markov) = tracks(PhaseBranch::InPhase, psi);
        let (phi_exact, phi_markov) = tracks(PhaseBranch::OutOfPhase, phi);
        protected = protected.max(gap(&psi_exact, &phi_exact)).max(gap(&psi_markov, &phi_markov));
        let (_, phi_decay) = tracks(PhaseBranch::InPhase, phi);
        let (_, psi_decay) = tracks(PhaseBranch::OutOfPhase, psi);
        markov_decaying = markov_decaying.max(gap(&phi_decay, &psi_decay));
    }
    verdict(
        protected <= SYMMETRY_TOL && markov_decaying <= SYMMETRY_TOL,
        format!(
            "psi(+1) vs phi(-1): {protected:.3e}; Markov phi(+1) vs psi(-1): {markov_decaying:.3e}"
        ),
    )
}

fn ac7_oracle() -> Outcome {
    let start = Instant::now();
    let settings = OracleSettings { dt: DT, t_max: ORACLE_T_MAX, cutoff: ORACLE_CUTOFF, ..OracleSettings::default() };
    let combos = [
        (EcsKind::PhiPlus, PhaseBranch::InPhase),
        (EcsKind::PhiMinus, PhaseBranch::InPhase),
        (EcsKind::PsiPlus, PhaseBranch::OutOfPhase),
        (EcsKind::PsiMinus, PhaseBranch::OutOfPhase),
    ];
    let reports: Vec<_> = combos
        .par_iter()
        .map(|&(kind, lambda)| {
            let s = EcsState::new(kind, Complex64::new(ALPHA, 0.0)).unwrap();
            run_oracle(&s, &sys(lambda), &env(), &settings, |c| c).unwrap()
        })
        .collect();
    let elapsed = start.elapsed().as_secs_f64();
    let worst = reports.iter().map(|r| r.max_distance()).fold(0.0, f64::max);
    let detail: Vec<String> =
        reports.iter().map(|r| format!("{} {}: {:.2e}", r.kind, r.lambda, r.max_distance())).collect();
    verdict(
        worst <= ORACLE_TOL && elapsed < ORACLE_RUNTIME_S,
        format!("max trace distance {worst:.3e} [{}], {elapsed:.1} s", detail.join(", ")),
    )
}

fn ac8_cross_form() -> Outcome {
    let env = env();
    let budget = 10.0 * DT * DT * env.omega_c * env.omega_c + 1e-6;
    let mut worst: f64 = 0.0;
    for lambda in [PhaseBranch::InPhase, PhaseBranch::OutOfPhase] {
        let s = sys(lambda);
        let modes = solve_modes(&s, &env, &grid()).unwrap();
        let a = coefficients_integral(&s, &env, &modes).unwrap();
        let b = coefficients_derivative(&s, &modes).unwrap();
        for (x, y) in a.samples().iter().zip(b.samples()) {
            for d in [
                x.gamma - y.gamma,
                x.gamma_cross - y.gamma_cross,
                x.omega_shifted - y.omega_shifted,
                x.omega_cross - y.omega_cross,
            ] {
                worst = worst.max(d.abs());
            }
        }
    }
    verdict(worst <= budget, format!("max |integral - derivative| = {worst:.3e} (budget {budget:.3e})"))
}

fn ac9_convergence() -> Outcome {
    // F' + i a F + w k int_0^t F = 0 has roots of r^2 + i a r + w k = 0
    let (a, w, k, t_end) = (1.0, 1.0, Complex64::new(0.3, 0.1), 4.0);
    let disc = (Complex64::new(-a * a, 0.0) - 4.0 * w * k).sqrt();
    let r1 = (Complex64::new(0.0, -a) + disc) / 2.0;
    let r2 = (Complex64::new(0.0, -a) - disc) / 2.0;
    let exact = |t: f64| (r1 * (r1 * t).exp() - r2 * (r2 * t).exp()) / (r1 - r2);
    let err = |dt: f64| {
        let g = TimeGrid::new(t_end, dt).unwrap();
        let p = VolterraProblem::new(a, w, ConstantKernel(k)).unwrap();
        let f = solve(&p, &g).unwrap();
        g.times().zip(f.values()).map(|(t, v)| (v - exact(t)).norm()).fold(0.0, f64::max)
    };
    let (coarse, fine) = (err(0.02), err(0.01));
    let ratio = coarse / fine;
    verdict(
        (ORDER_RANGE.0..=ORDER_RANGE.1).contains(&ratio),
        format!("errors {coarse:.3e} -> {fine:.3e}, ratio {ratio:.3}"),
    )
}

fn ac10_markov_closed_form() -> Outcome {
    let mut rng = rand::rngs::StdRng::seed_from_u64(0x5eed);
    let free = SpectralParams::ohmic(0.0, 30.0).unwrap();
    let mut unitarity: f64 = 0.0;
    let mut damping: f64 = 0.0;
    let decay = markov_decay(&env(), 1.0).unwrap();
    for _ in 0..RANDOM_DRAWS {
        let t = rng.random_range(0.0..20.0);
        let kappa = rng.random_range(0.0..0.99);
        let lambda = if rng.random_bool(0.5) { PhaseBranch::InPhase } else { PhaseBranch::OutOfPhase };
        let s = SystemParams::normalized(kappa, lambda).unwrap();
        let (u, v) = markov_uv(&s, &free, t).unwrap();
        unitarity = unitarity.max((u.norm_sqr() + v.norm_sqr() - 1.0).abs());
        let (u, v) = markov_uv(&s, &env(), t).unwrap();
        let damped = (u - v * lambda.sign()).norm();
        damping = damping.max((damped / (-2.0 * decay * t).exp() - 1.0).abs());
    }
    verdict(
        unitarity <= UNITARITY_TOL && damping <= DAMPING_TOL,
        format!("max ||u|^2 + |v|^2 - 1| = {unitarity:.2e}, damped-branch relative error {damping:.2e}"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("AC1 Markov limit of the decay rate", ac1_markov_rate),
        ("AC2 Markov limit of the frequency shift", ac2_markov_shift),
        ("AC3 short-time overshoot", ac3_overshoot),
        ("AC4 decoherence-free concurrences", ac4_decoherence_free),
        ("AC5 faster disentanglement than Markov", ac5_acceleration),
        ("AC6 lambda exchange symmetry", ac6_exchange_symmetry),
        ("AC7 Fock-space oracle equivalence", ac7_oracle),
        ("AC8 coefficient cross-form agreement", ac8_cross_form),
        ("AC9 solver convergence order", ac9_convergence),
        ("AC10 Markov closed form", ac10_markov_closed_form),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
