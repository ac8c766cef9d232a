//! Closed ODE system from the benchmark initial data, with the stable-set
//! bound along the way. Writes the full trajectory as CSV to stdout when
//! run with `--csv`.

use abeta_prion::ode::{integrate, stable_set_bound, OdeOptions};
use abeta_prion::stability::find_steady_state;
use abeta_prion::{OdeState, Parameters, RateModel};

fn main() -> abeta_prion::Result<()> {
    let params = Parameters::unit();
    let rates = RateModel::constant(1.0, 1.0, 1.0);
    let start = OdeState::new(1.0, 1.0, 1.0, 1.0, 2.0);
    let times: Vec<f64> = (1..40).map(|k| 0.5 * k as f64).collect();
    let traj = integrate(&start, &params, &rates, 20.0, &OdeOptions::with_tolerance(1e-10).sampled_at(times))?;

    if std::env::args().any(|a| a == "--csv") {
        return traj.write_csv(std::io::stdout().lock());
    }
    let bound = stable_set_bound(&start, &params, &rates)?;
    println!("stable set: nA + u + p + 2b <= {bound}");
    println!("{:>6} {:>12} {:>12} {:>12} {:>12} {:>12} {:>9}", "t", "A", "u", "p", "b", "M", "level");
    for (t, s) in traj.times.iter().zip(&traj.states).step_by(4) {
        println!(
            "{t:>6.2} {:>12.8} {:>12.8} {:>12.8} {:>12.8} {:>12.8} {:>9.5}",
            s.plaques,
            s.oligomer,
            s.prion,
            s.complex,
            s.mass,
            s.weighted_total(params.n)
        );
    }
    let ss = find_steady_state(&params, &rates, 1e-13)?;
    println!("distance to equilibrium at t = 20: {:.3e}", traj.last().distance4(&ss.state()));
    println!("{} steps, {} rejected", traj.stats.steps.accepted, traj.stats.steps.rejected);
    Ok(())
}
