//! Acceptance suite. Runs every criterion, prints one line per criterion and
//! exits nonzero if any of them fails.

mod common;

use std::time::{Duration, Instant};

use abeta_prion::diagnostics::{
    mass_estimate_check, moment_closure, oligomer_balance, prion_balance, ClosureComparison,
};
use abeta_prion::ode::{self, decay_floor, OdeOptions, OdeState};
use abeta_prion::pde::{
    picard_solve, run_coupled, trace_characteristic, CharacteristicField, CoupledRun, CoupledSettings, InitialData,
    PicardSettings,
};
use abeta_prion::stability::{analyze, find_steady_state, polynomial_from_roots, LyapunovCertificate};
use abeta_prion::{Parameters, RateModel};
use rand::Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

const SEED: u64 = 20_240_611;

fn steady_state_correctness() -> Outcome {
    let mut worst_res = 0.0f64;
    let mut worst_bind = 0.0f64;
    let mut worst_oracle = 0.0f64;
    let mut failures = 0;
    for (p, r) in common::draws(SEED, 100) {
        let (rho, mu) = r.constants().unwrap();
        match find_steady_state(&p, &r, 1e-13) {
            Ok(ss) => {
                worst_res = worst_res.max(ss.residual);
                worst_bind = worst_bind.max(ss.binding_residual);
                worst_oracle = worst_oracle.max(rel(ss.u_inf, common::oracle_u_inf(&p, rho, mu)));
            }
            Err(_) => failures += 1,
        }
    }
    let unit = find_steady_state(&Parameters::unit(), &RateModel::constant(1.0, 1.0, 1.0), 1e-13).unwrap();
    let oracle = common::oracle_u_inf(&Parameters::unit(), 1.0, 1.0);
    let bench = (unit.u_inf - oracle).abs();
    outcome(
        failures == 0 && worst_res < 1e-8 && worst_bind < 1e-8 && bench < 1e-4,
        format!(
            "max|rhs| {worst_res:.1e}, binding {worst_bind:.1e}, draws vs oracle {worst_oracle:.1e}, \
             all-ones u_inf {:.10} (oracle {oracle:.10})",
            unit.u_inf
        ),
    )
}

fn routh_hurwitz_universality() -> Outcome {
    let mut min_margin = f64::INFINITY;
    let mut min_coeff = f64::INFINITY;
    let mut max_re = f64::NEG_INFINITY;
    let mut worst_poly = 0.0f64;
    for (p, r) in common::draws(SEED, 100) {
        let ss = find_steady_state(&p, &r, 1e-13).unwrap();
        let st = analyze(&ss, &p, &r).unwrap();
        min_margin = min_margin.min(st.routh_hurwitz.margin);
        min_coeff = st.coefficients.iter().fold(min_coeff, |m, &a| m.min(a));
        max_re = max_re.max(st.max_real_part());
        let poly = polynomial_from_roots(&st.eigenvalues);
        for (a, c) in st.coefficients.iter().zip(&poly) {
            worst_poly = worst_poly.max(rel(*c, *a));
        }
    }
    outcome(
        min_coeff > 0.0 && min_margin > 0.0 && max_re < -1e-10 && worst_poly < 1e-8,
        format!("min a_i {min_coeff:.3e}, min margin {min_margin:.3e}, max Re {max_re:.3e}, coeff vs roots {worst_poly:.1e}"),
    )
}

fn local_convergence() -> Outcome {
    let mut r = common::rng(SEED + 1);
    let mut worst_dist = 0.0f64;
    let mut worst_excess = f64::NEG_INFINITY;
    for (p, rates) in common::draws(SEED, 50) {
        let (_, mu) = rates.constants().unwrap();
        let ss = find_steady_state(&p, &rates, 1e-13).unwrap();
        let eq = ss.state();
        let start = common::perturb(&eq, 0.1, &mut r);
        let t_end = 200.0 / decay_floor(&p, mu);
        let traj = ode::integrate(&start, &p, &rates, t_end, &OdeOptions::with_tolerance(1e-10)).unwrap();
        worst_dist = worst_dist.max(traj.last().distance4(&eq));
        worst_excess = worst_excess.max(traj.stats.max_stable_set_excess);
    }
    outcome(
        worst_dist < 1e-6 && worst_excess <= 1e-6,
        format!("max distance at t = 200/m {worst_dist:.1e}, stable-set excess {worst_excess:.2e}"),
    )
}

fn global_certificate() -> Outcome {
    let p = common::chain_params();
    let rates = RateModel::constant(1.0, 1.0, 1.0);
    let ss = find_steady_state(&p, &rates, 1e-13).unwrap();
    let cert = LyapunovCertificate::new(&ss, &p, &rates).unwrap();
    let m = decay_floor(&p, 1.0);
    let level = p.total_source() / m;
    let mut r = common::rng(SEED + 2);
    let mut worst_rise = f64::NEG_INFINITY;
    let mut worst_dist = 0.0f64;
    let mut runs = 0;
    while runs < 20 {
        let mut c = || r.random_range(0.0..level);
        let s = OdeState::new(c(), c(), c(), c(), c());
        if s.weighted_total(p.n) > level {
            continue;
        }
        runs += 1;
        let traj = ode::integrate(&s, &p, &rates, 200.0 / m, &OdeOptions::with_tolerance(1e-11)).unwrap();
        let phi: Vec<f64> = traj.states.iter().map(|x| cert.phi(x)).collect();
        for w in phi.windows(2) {
            worst_rise = worst_rise.max(w[1] - w[0]);
        }
        worst_dist = worst_dist.max(traj.last().distance4(&ss.state()));
    }
    outcome(
        worst_rise < 1e-9 && worst_dist < 1e-5,
        format!("largest step increase of phi {worst_rise:.1e}, max final distance {worst_dist:.1e}"),
    )
}

fn closure_runs() -> Vec<(usize, ClosureComparison)> {
    let p = Parameters::unit();
    let rates = RateModel::constant(1.0, 1.0, 1.0);
    [2000, 4000]
        .into_iter()
        .map(|cells| {
            let c = moment_closure(&p, &rates, &InitialData::benchmark(), 1.0, cells, 40.0, &CoupledSettings::default())
                .unwrap();
            (cells, c)
        })
        .collect()
}

fn moment_closure_outcome(runs: &[(usize, ClosureComparison)]) -> Outcome {
    let am = |c: &ClosureComparison| c.per_component[0].max(c.per_component[1]);
    let coarse = am(&runs[0].1);
    let fine = am(&runs[1].1);
    outcome(
        fine < 1e-2 && coarse > fine,
        format!("(A, M) relative error {coarse:.2e} at 2000 cells, {fine:.2e} at 4000 cells"),
    )
}

fn characteristics() -> Outcome {
    let mut worst_closed = 0.0f64;
    let lin = CharacteristicField::constant(1.0, 0.0, 5.0, RateModel::constant(1.0, 0.0, 1.0)).unwrap();
    worst_closed = worst_closed.max(rel(trace_characteristic(2.0, 0.0, 3.0, &lin).unwrap().position, 5.0));
    let exp = CharacteristicField::constant(1.0, 0.0, 5.0, RateModel::power_law(1.0, 1.0, 0.0, 1.0)).unwrap();
    worst_closed = worst_closed.max(rel(trace_characteristic(2.0, 0.0, 1.5, &exp).unwrap().position, 2.0 * 1.5f64.exp()));
    let sqrt = CharacteristicField::constant(2.0, 0.0, 5.0, RateModel::power_law(1.0, 0.5, 0.0, 1.0)).unwrap();
    // sqrt(X) = sqrt(x) + u s / 2
    let want = (1.5f64.sqrt() + 2.0 * 2.5 / 2.0).powi(2);
    worst_closed = worst_closed.max(rel(trace_characteristic(1.5, 0.0, 2.5, &sqrt).unwrap().position, want));

    let times: Vec<f64> = (0..=20).map(|i| i as f64 * 0.1).collect();
    let u: Vec<f64> = times.iter().map(|t| 1.0 + 0.5 * (3.0 * t).sin()).collect();
    let field = CharacteristicField::new(times, u, RateModel::power_law(1.3, 0.7, 0.2, 1.0)).unwrap();
    let a = field.a_bound();
    let mut r = common::rng(SEED + 3);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let x = r.random_range(1.0..20.0);
        let mut s1 = r.random_range(0.0..2.0);
        let mut s2 = r.random_range(0.0..2.0);
        if s1 > s2 {
            std::mem::swap(&mut s1, &mut s2);
        }
        let x1 = trace_characteristic(x, 0.0, s1, &field).unwrap().position;
        let x2 = trace_characteristic(x, 0.0, s2, &field).unwrap().position;
        let upper = x1 * (a * (s2 - s1)).exp();
        worst = worst.max((x1 - x2) / x1).max((x2 - upper) / upper);
    }
    outcome(
        worst_closed < 1e-8 && worst <= 1e-12,
        format!("closed forms {worst_closed:.1e}, worst sandwich violation {worst:.1e} over 1000 triples"),
    )
}

fn balance_report(label: &str, run: &CoupledRun, p: &Parameters, rates: &RateModel) -> (bool, String) {
    let mass = mass_estimate_check(run, p, rates, label).unwrap();
    let prion = prion_balance(run, p, rates, label).unwrap();
    let olig = oligomer_balance(run, p, rates, label).unwrap();
    let ok = mass.passed && prion.passed && olig.passed;
    (
        ok,
        format!(
            "{label}: mass {:.1e}, prion {:.1e}/{:.1e}, oligomer {:.1e}/{:.1e}",
            mass.max_violation, prion.max_violation, prion.tolerance, olig.max_violation, olig.tolerance
        ),
    )
}

struct PicardOutcome {
    outcome: Outcome,
    run: CoupledRun,
}

fn picard_cross_validation() -> PicardOutcome {
    let p = Parameters::unit();
    let rates = RateModel::power_law(1.0, 0.5, 1.0, 1.0);
    let init = InitialData::benchmark();
    let settings = PicardSettings::default();
    let full = picard_solve(&init.density, [init.u, init.p, init.b], 0.1, &settings, &p, &rates).unwrap();
    let half = picard_solve(&init.density, [init.u, init.p, init.b], 0.05, &settings, &p, &rates).unwrap();

    let state = init.state(p.x0, settings.x_max, 4000).unwrap();
    let run = run_coupled(state, 0.1, &CoupledSettings::default(), &p, &rates).unwrap();
    let t: Vec<f64> = run.samples.iter().map(|s| s.t).collect();
    let mut worst = 0.0f64;
    for (i, &tp) in full.times.iter().enumerate() {
        let k = t.partition_point(|&v| v < tp).clamp(1, t.len() - 1);
        let w = ((tp - t[k - 1]) / (t[k] - t[k - 1])).clamp(0.0, 1.0);
        let (a, b) = (&run.samples[k - 1], &run.samples[k]);
        let grid = [a.u + w * (b.u - a.u), a.p + w * (b.p - a.p), a.b + w * (b.b - a.b)];
        for (g, q) in grid.iter().zip([full.u[i], full.p[i], full.b[i]]) {
            worst = worst.max(rel(*g, q));
        }
    }
    let (rf, rh) = (full.max_ratio(), half.max_ratio());
    let passed = full.converged && rf < 1.0 && half.converged && rh < rf && worst < 1e-3;
    PicardOutcome {
        outcome: outcome(
            passed,
            format!(
                "{} iterations, ratio {rf:.3} at T = 0.1, {rh:.3} at T = 0.05, grid vs Picard {worst:.1e}",
                full.iterations
            ),
        ),
        run,
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed())
}

fn main() {
    let mut lines = Vec::new();
    let mut report = |id: usize, name: &str, o: Outcome, took: Duration, budget: Duration| {
        let ok = o.passed && took <= budget;
        lines.push(ok);
        println!(
            "criterion {id} {name:<32} {}  {}  [{:.2}s of {:.0}s]",
            if ok { "PASS" } else { "FAIL" },
            o.detail,
            took.as_secs_f64(),
            budget.as_secs_f64()
        );
    };
    let secs = Duration::from_secs;

    let (o, d) = timed(steady_state_correctness);
    report(1, "steady state", o, d, secs(1));
    let (o, d) = timed(routh_hurwitz_universality);
    report(2, "routh-hurwitz universality", o, d, secs(5));
    let (o, d) = timed(local_convergence);
    report(3, "local convergence", o, d, secs(30));
    let (o, d) = timed(global_certificate);
    report(4, "global lyapunov certificate", o, d, secs(30));
    let (runs, d5) = timed(closure_runs);
    let (o, d) = timed(|| moment_closure_outcome(&runs));
    report(5, "moment closure", o, d5 + d, secs(60));
    let (o, d) = timed(characteristics);
    report(6, "characteristics", o, d, secs(5));
    let (picard, d8) = timed(picard_cross_validation);

    let (o7, d7) = timed(|| {
        let unit = Parameters::unit();
        let constant = RateModel::constant(1.0, 1.0, 1.0);
        let power = RateModel::power_law(1.0, 0.5, 1.0, 1.0);
        let mut ok = true;
        let mut parts = Vec::new();
        for (cells, c) in &runs {
            let (pass, s) = balance_report(&format!("{cells} cells"), &c.run, &unit, &constant);
            ok &= pass;
            parts.push(s);
        }
        let (pass, s) = balance_report("power law", &picard.run, &unit, &power);
        ok &= pass;
        parts.push(s);
        outcome(ok, parts.join("; "))
    });
    report(7, "mass estimate and balance laws", o7, d5 + d7, secs(60));
    report(8, "picard vs grid", picard.outcome, d8, secs(60));

    let failed = lines.iter().filter(|ok| !**ok).count();
    println!("{} of {} criteria passed", lines.len() - failed, lines.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
