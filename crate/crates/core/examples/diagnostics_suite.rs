//! Balance laws, the stable set, the mass estimate and the L1 stability
//! estimate for one parameter set, as pass/fail reports.

use abeta_prion::diagnostics::{run_suite, write_reports, SuiteSettings};
use abeta_prion::{Parameters, RateModel};

fn main() -> abeta_prion::Result<()> {
    let params = Parameters::unit();
    for rates in [RateModel::constant(1.0, 1.0, 1.0), RateModel::power_law(1.0, 0.5, 1.0, 1.0)] {
        println!("rates: {rates}");
        let reports = run_suite(&params, &rates, &SuiteSettings::default())?;
        for r in &reports {
            println!(
                "  {:<22} {}  {:>11.3e} <= {:<11.3e}",
                r.name,
                if r.passed { "pass" } else { "FAIL" },
                r.max_violation,
                r.tolerance
            );
        }
        if std::env::args().any(|a| a == "--csv") {
            write_reports(&reports, std::io::stdout().lock())?;
        }
    }
    Ok(())
}
