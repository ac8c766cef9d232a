//! Fixed-point iteration on the soluble trajectories: the density is built
//! from characteristics for the current u, then (u, p, b) are updated from
//! their integral equations. The contraction ratio shrinks with the horizon.

use abeta_prion::pde::{picard_solve, DensitySpec, PicardSettings};
use abeta_prion::{Parameters, RateModel};

fn main() -> abeta_prion::Result<()> {
    let params = Parameters::unit();
    let rates = RateModel::power_law(1.0, 0.5, 1.0, 1.0);
    let f_in = DensitySpec::exp_decay(1.0, 1.0);
    for t_end in [0.2, 0.1, 0.05] {
        let res = picard_solve(&f_in, [1.0, 1.0, 1.0], t_end, &PicardSettings::default(), &params, &rates)?;
        let [u, p, b] = res.last();
        println!(
            "T = {t_end:<5} iterations {:>2}  max ratio {:.4}  u = {u:.10}  p = {p:.10}  b = {b:.10}",
            res.iterations,
            res.max_ratio()
        );
        let changes: Vec<String> = res.changes.iter().take(6).map(|c| format!("{c:.2e}")).collect();
        println!("          changes {}", changes.join(" "));
    }
    Ok(())
}
