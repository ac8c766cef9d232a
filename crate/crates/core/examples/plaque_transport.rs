//! Coupled size-structured run with power-law polymerization
//! rho(x) = sqrt(x): upwind finite volumes for the plaque density, coupled
//! to the soluble species. Prints the moments and writes the final density
//! to `plaque_density.csv` when run with `--write`.

use abeta_prion::pde::{default_x_max, run_coupled, CoupledSettings, InitialData};
use abeta_prion::{Parameters, RateModel};

fn main() -> abeta_prion::Result<()> {
    let params = Parameters::unit();
    let rates = RateModel::power_law(1.0, 0.5, 1.0, params.x0);
    let t_end = 2.0;
    println!("suggested x_max for T = {t_end}: {:.1}", default_x_max(params.x0, rates.linear_bound() * 1.0, t_end));

    let state = InitialData::benchmark().state(params.x0, 40.0, 2000)?;
    let settings = CoupledSettings { record_every: 20, snapshot_times: vec![t_end], ..Default::default() };
    let run = run_coupled(state, t_end, &settings, &params, &rates)?;

    println!("{:>8} {:>12} {:>12} {:>12} {:>12} {:>12}", "t", "M0", "M1", "u", "p", "b");
    for s in run.samples.iter().step_by(5) {
        println!("{:>8.4} {:>12.8} {:>12.8} {:>12.8} {:>12.8} {:>12.8}", s.t, s.m0, s.m1, s.u, s.p, s.b);
    }
    println!("{} steps, dt in [{:.2e}, {:.2e}]", run.steps, run.dt_min, run.dt_max);
    println!("largest outflow fraction through x_max: {:.2e}", run.max_outflow_fraction());

    if std::env::args().any(|a| a == "--write") {
        run.write_density_csv(std::fs::File::create("plaque_density.csv")?)?;
        println!("wrote plaque_density.csv");
    }
    Ok(())
}
