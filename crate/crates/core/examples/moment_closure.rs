//! With constant rates the zeroth and first moments of the grid solution
//! follow the closed ODE system. The grid error is first order in the cell
//! width.

use abeta_prion::diagnostics::moment_closure;
use abeta_prion::pde::{CoupledSettings, InitialData};
use abeta_prion::{Parameters, RateModel};

fn main() -> abeta_prion::Result<()> {
    let params = Parameters::unit();
    let rates = RateModel::constant(1.0, 1.0, 1.0);
    println!("{:>6} {:>12} {:>12} {:>12} {:>12} {:>12}", "cells", "A", "M", "u", "p", "b");
    for cells in [500, 1000, 2000, 4000] {
        let c = moment_closure(&params, &rates, &InitialData::benchmark(), 1.0, cells, 40.0, &CoupledSettings::default())?;
        let e = c.per_component;
        println!("{cells:>6} {:>12.3e} {:>12.3e} {:>12.3e} {:>12.3e} {:>12.3e}", e[0], e[1], e[2], e[3], e[4]);
    }
    Ok(())
}
