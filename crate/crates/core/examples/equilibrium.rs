//! Positive equilibrium of the closed system for the all-ones parameter set
//! and for a parameter file given on the command line.
//!
//!     cargo run --example equilibrium [-- params.cfg]

use abeta_prion::stability::{find_steady_state, q_evaluate};
use abeta_prion::ModelConfig;

fn main() -> abeta_prion::Result<()> {
    let cfg = match std::env::args().nth(1) {
        Some(path) => ModelConfig::from_file(path)?,
        None => ModelConfig::unit(),
    };
    let ss = find_steady_state(&cfg.params, &cfg.rates, 1e-13)?;

    println!("tau*   = {}", ss.tau_star);
    println!("a      = {}", ss.a_coeff);
    println!("u_inf  = {:.15}", ss.u_inf);
    println!("A_inf  = {:.15}", ss.a_inf);
    println!("p_inf  = {:.15}", ss.p_inf);
    println!("b_inf  = {:.15}", ss.b_inf);
    println!("M_inf  = {:.15}", ss.m_inf);
    println!("max |rhs| at the equilibrium: {:.2e}", ss.residual);

    // Q is positive below the root and negative above it
    println!();
    println!("{:>10} {:>14}", "x", "Q(x)");
    for k in 0..=8 {
        let x = ss.u_inf * k as f64 / 4.0;
        println!("{x:>10.5} {:>14.6e}", q_evaluate(x, &cfg.params, &cfg.rates)?);
    }
    Ok(())
}
