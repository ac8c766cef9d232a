//! Equilibrium and Routh–Hurwitz margin over a log grid of the binding rate
//! tau, computed in parallel. Rows come back in grid order.

use abeta_prion::cli::{sweep_grid, sweep_row, SweepAxis, SWEEP_COLUMNS};
use abeta_prion::ModelConfig;
use rayon::prelude::*;

fn main() -> abeta_prion::Result<()> {
    let axes = [SweepAxis::parse("tau=log:0.01:100:9")?];
    let grid = sweep_grid(&ModelConfig::unit(), &axes)?;
    let rows: Vec<Vec<String>> = grid.par_iter().map(|c| sweep_row(c, 1e-13)).collect();

    let col = |name: &str| SWEEP_COLUMNS.iter().position(|c| *c == name).unwrap();
    let (u, p, m) = (col("u_inf"), col("p_inf"), col("rh_margin"));
    println!("{:>10} {:>12} {:>12} {:>14}", "tau", "u_inf", "p_inf", "rh_margin");
    for (cfg, row) in grid.iter().zip(&rows) {
        let v = |i: usize| row[i].parse::<f64>().unwrap_or(f64::NAN);
        println!("{:>10.4} {:>12.8} {:>12.8} {:>14.6}", cfg.params.tau, v(u), v(p), v(m));
    }
    Ok(())
}
