//! Global stability without nucleation. With alpha = 0 and
//! gamma_p = 0.5, sigma = delta = 2 the chain condition holds and the
//! explicit Lyapunov function decays along every trajectory.

use abeta_prion::ode::{integrate, OdeOptions};
use abeta_prion::stability::{find_steady_state, LyapunovCertificate};
use abeta_prion::{OdeState, Parameters, RateModel};

fn main() -> abeta_prion::Result<()> {
    let params = Parameters { gamma_p: 0.5, sigma: 2.0, delta: 2.0, alpha: 0.0, ..Parameters::unit() };
    let rates = RateModel::constant(1.0, 1.0, 1.0);
    let ss = find_steady_state(&params, &rates, 1e-13)?;
    let cert = LyapunovCertificate::new(&ss, &params, &rates)?;
    let chain = cert.chain();
    println!("chain: {:.4} > {:.4} > {:.4}", chain.cond1, chain.cond2, chain.cond3);
    println!("theta1 = {:.4}, theta2 = {:.4}, s1 = {:.4}", cert.t1, cert.t2, cert.s1);
    println!("u_inf = {:.12} (golden ratio conjugate {:.12})", ss.u_inf, (5f64.sqrt() - 1.0) / 2.0);

    let start = OdeState::new(0.5, 2.0, 0.2, 1.0, 0.3);
    let traj = integrate(&start, &params, &rates, 20.0, &OdeOptions::with_tolerance(1e-11))?;
    println!();
    println!("{:>8} {:>14} {:>14} {:>14}", "t", "phi", "phi_dot", "grad.F");
    let stride = (traj.len() / 12).max(1);
    for (t, s) in traj.times.iter().zip(&traj.states).step_by(stride) {
        let v = cert.evaluate(s);
        println!("{t:>8.3} {:>14.6e} {:>14.6e} {:>14.6e}", v.phi, v.phi_dot, v.phi_dot_chain);
    }

    // with nucleation the certificate does not apply
    let with_nucleation = Parameters { alpha: 1.0, ..params };
    let ss = find_steady_state(&with_nucleation, &rates, 1e-13)?;
    if let Err(e) = LyapunovCertificate::new(&ss, &with_nucleation, &rates) {
        println!("\nalpha = 1: {e}");
    }
    Ok(())
}
