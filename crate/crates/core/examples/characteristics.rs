//! Characteristic curves of the transport equation and the density they
//! carry. For rho(x) = sqrt(x) and constant u the curves are
//! sqrt(X(s)) = sqrt(x) + u s / 2.

use abeta_prion::pde::{trace_characteristic, CharacteristicField, DensitySpec, MildSolution};
use abeta_prion::{Parameters, RateModel};

fn main() -> abeta_prion::Result<()> {
    let rates = RateModel::power_law(1.0, 0.5, 0.2, 1.0);
    let u = 1.5;
    let field = CharacteristicField::constant(u, 0.0, 2.0, rates)?;

    println!("{:>6} {:>16} {:>16} {:>12}", "s", "X(s; 2, 0)", "closed form", "ln J");
    for k in 0..=8 {
        let s = 0.25 * k as f64;
        let p = trace_characteristic(2.0, 0.0, s, &field)?;
        let exact = (2f64.sqrt() + u * s / 2.0).powi(2);
        println!("{s:>6.2} {:>16.12} {exact:>16.12} {:>12.8}", p.position, p.log_jacobian);
    }

    // backward from (x, t) = (3, 1): this curve left x0 = 1 after t = 0
    let p = trace_characteristic(3.0, 1.0, 0.0, &field)?;
    println!("\nbackward from (3, 1): entry time {:?}", p.entry_time);

    // density from characteristics: transported data above the front,
    // boundary-generated plaques below it
    let params = Parameters::unit();
    let f_in = DensitySpec::exp_decay(1.0, 1.0);
    let sol = MildSolution::new(&field, &f_in, &params);
    let front = sol.front(1.0)?;
    println!("front at t = 1: {front:.6}");
    println!("{:>8} {:>14}", "x", "f(x, 1)");
    for k in 0..=10 {
        let x = 1.0 + 0.6 * k as f64;
        println!("{x:>8.2} {:>14.6e}", sol.density(x, 1.0)?);
    }
    Ok(())
}
