//! Linear stability of the equilibrium: Jacobian, the quartic characteristic
//! coefficients, the Routh–Hurwitz margin and the eigenvalues they predict.

use abeta_prion::stability::{analyze, find_steady_state, polynomial_from_roots};
use abeta_prion::ModelConfig;

fn main() -> abeta_prion::Result<()> {
    let cfg = ModelConfig::unit();
    let ss = find_steady_state(&cfg.params, &cfg.rates, 1e-13)?;
    let st = analyze(&ss, &cfg.params, &cfg.rates)?;

    println!("Jacobian in (A, u, p, b):");
    for row in &st.jacobian {
        println!("  [{:>10.6} {:>10.6} {:>10.6} {:>10.6}]", row[0], row[1], row[2], row[3]);
    }
    println!("trace = {:.12}", st.trace());

    let from_roots = polynomial_from_roots(&st.eigenvalues);
    println!();
    println!("{:>4} {:>20} {:>20}", "", "closed form", "from eigenvalues");
    for (i, (a, c)) in st.coefficients.iter().zip(&from_roots).enumerate() {
        println!("a{:<3} {a:>20.12} {c:>20.12}", i + 1);
    }
    println!();
    println!("a1 a2 a3 - a3^2 - a1^2 a4 = {:.6}", st.routh_hurwitz.margin);
    println!("Routh–Hurwitz stable: {}", st.routh_hurwitz.stable());
    for z in &st.eigenvalues {
        println!("  lambda = {:+.9} {:+.9}i", z.re, z.im);
    }
    Ok(())
}
