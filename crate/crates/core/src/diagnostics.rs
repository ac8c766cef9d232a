//! Conservation laws, invariant bounds and solver cross-checks as
//! pass/fail reports.
//!
//! Derivatives come from three-point differences of the stored samples, not
//! from the vector field, so the checks exercise the recorded output.

use std::fmt::Write as _;
use std::io::Write;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fmt_f64;
use crate::model::{Parameters, RateModel};
use crate::ode::{self, OdeOptions, OdeState, Trajectory};
use crate::pde::{run_coupled, run_transport, CharacteristicField, CoupledRun, CoupledSettings, InitialData, PlaqueGrid};

/// Outcome of one check. `max_violation` is the worst signed amount by
/// which the checked quantity exceeds its target.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub max_violation: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// SHA-256 over the parameters, rates and settings.
    pub context_hash: String,
    pub settings: String,
}

impl CheckReport {
    fn new(name: &str, max_violation: f64, tolerance: f64, context: &Context) -> Self {
        CheckReport {
            name: name.to_string(),
            max_violation,
            tolerance,
            passed: max_violation <= tolerance,
            context_hash: context.hash(name),
            settings: context.settings.clone(),
        }
    }

    pub fn csv_header() -> &'static str {
        "name,max_violation,tolerance,passed,context_hash,settings"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},\"{}\"",
            self.name,
            fmt_f64(self.max_violation),
            fmt_f64(self.tolerance),
            self.passed,
            self.context_hash,
            self.settings.replace('"', "'")
        )
    }
}

/// Writes reports as CSV.
pub fn write_reports<W: Write>(reports: &[CheckReport], mut out: W) -> Result<()> {
    writeln!(out, "{}", CheckReport::csv_header())?;
    for r in reports {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

/// Inputs that determine a check, in canonical text form.
#[derive(Debug, Clone, PartialEq)]
pub struct Context {
    model: String,
    pub settings: String,
}

impl Context {
    pub fn new(params: &Parameters, rates: &RateModel, settings: impl Into<String>) -> Self {
        let mut model = String::new();
        for (k, v) in params.entries() {
            let _ = write!(model, "{k}={};", fmt_f64(v));
        }
        let _ = write!(model, "rates={rates}");
        Context { model, settings: settings.into() }
    }

    pub fn hash(&self, name: &str) -> String {
        let mut h = Sha256::new();
        h.update(name.as_bytes());
        h.update([0u8]);
        h.update(self.model.as_bytes());
        h.update([0u8]);
        h.update(self.settings.as_bytes());
        hex::encode(h.finalize())
    }
}

/// Three-point derivative on a possibly non-uniform grid at interior index
/// `i`; second order for smooth data.
pub fn central_derivative(t: &[f64], y: &[f64], i: usize) -> f64 {
    let h1 = t[i] - t[i - 1];
    let h2 = t[i + 1] - t[i];
    -h2 / (h1 * (h1 + h2)) * y[i - 1] + (h2 - h1) / (h1 * h2) * y[i] + h1 / (h2 * (h1 + h2)) * y[i + 1]
}

fn max_step(t: &[f64]) -> f64 {
    t.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

/// Soluble samples from either solver.
pub trait SolubleSeries {
    fn times(&self) -> Vec<f64>;
    /// `(u, p, b)` per sample.
    fn soluble(&self) -> Vec<[f64; 3]>;
}

impl SolubleSeries for Trajectory {
    fn times(&self) -> Vec<f64> {
        self.times.clone()
    }

    fn soluble(&self) -> Vec<[f64; 3]> {
        self.states.iter().map(|s| [s.oligomer, s.prion, s.complex]).collect()
    }
}

impl SolubleSeries for CoupledRun {
    fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    fn soluble(&self) -> Vec<[f64; 3]> {
        self.samples.iter().map(|s| [s.u, s.p, s.b]).collect()
    }
}

/// Largest `|d/dt (p + b) - (lambda_p - gamma_p p - delta b)|` at interior
/// samples. Also returns the largest step.
pub fn prion_balance_residual(series: &impl SolubleSeries, params: &Parameters) -> Result<(f64, f64)> {
    let t = series.times();
    if t.len() < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: t.len() });
    }
    let s = series.soluble();
    let total: Vec<f64> = s.iter().map(|v| v[1] + v[2]).collect();
    let mut worst = 0.0f64;
    for i in 1..t.len() - 1 {
        let d = central_derivative(&t, &total, i);
        let law = params.lambda_p - params.gamma_p * s[i][1] - params.delta * s[i][2];
        worst = worst.max((d - law).abs());
    }
    Ok((worst, max_step(&t)))
}

/// Prion balance with tolerance `max(1e-6, 10 dt^2)`.
pub fn prion_balance(
    series: &impl SolubleSeries,
    params: &Parameters,
    rates: &RateModel,
    settings: &str,
) -> Result<CheckReport> {
    let (worst, dt) = prion_balance_residual(series, params)?;
    let ctx = Context::new(params, rates, settings);
    Ok(CheckReport::new("prion_balance", worst, (10.0 * dt * dt).max(1e-6), &ctx))
}

/// Residual of the oligomer balance along a coupled run,
/// `d/dt (b + u + (mass + outflow)/eps)` against
/// `lambda_u - gamma_u u - delta b - (int x mu f)/eps + (x0/eps - n) N(u)`.
/// The last term vanishes when the nucleation sink matches the mass entering
/// at `x0`. The tolerance is `5 dx L + 10 dt^2`, where `L` bounds the
/// boundary and flux terms that the midpoint moments misplace by half a cell.
pub fn oligomer_balance(run: &CoupledRun, params: &Parameters, rates: &RateModel, settings: &str) -> Result<CheckReport> {
    let n = run.samples.len();
    if n < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: n });
    }
    let eps = params.epsilon;
    let t: Vec<f64> = run.samples.iter().map(|s| s.t).collect();
    let total: Vec<f64> = run.samples.iter().map(|s| s.b + s.u + (s.m1 + s.outflow) / eps).collect();
    let mut worst = 0.0f64;
    for i in 1..n - 1 {
        let s = &run.samples[i];
        let d = central_derivative(&t, &total, i);
        let law = params.lambda_u - params.gamma_u * s.u - params.delta * s.b - s.mu_mass / eps
            + (params.x0 / eps - params.n as f64) * s.nucleation;
        worst = worst.max((d - law).abs());
    }
    let grid = &run.final_state.grid;
    let dx = (0..grid.cells()).map(|i| grid.width(i)).fold(0.0, f64::max);
    let scale = run
        .samples
        .iter()
        .map(|s| (s.nucleation + s.u * rates.rho_prime_sup() * s.m0) / eps)
        .fold(0.0, f64::max);
    let dt = max_step(&t);
    let ctx = Context::new(params, rates, settings);
    Ok(CheckReport::new("oligomer_balance", worst, 5.0 * dx * scale + 10.0 * dt * dt, &ctx))
}

/// Largest relative deviation between the grid moments and the closed ODE
/// along one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosureComparison {
    /// Over `(A, M, u, p, b)`.
    pub per_component: [f64; 5],
    pub run: CoupledRun,
    pub ode: Trajectory,
}

impl ClosureComparison {
    pub fn max_deviation(&self) -> f64 {
        self.per_component.iter().copied().fold(0.0, f64::max)
    }
}

/// Runs the grid solver and the moment ODE from matched initial moments and
/// compares them at every grid sample.
pub fn moment_closure(
    params: &Parameters,
    rates: &RateModel,
    initial: &InitialData,
    t_end: f64,
    cells: usize,
    x_max: f64,
    settings: &CoupledSettings,
) -> Result<ClosureComparison> {
    if !rates.is_constant() {
        return Err(Error::NonConstantRates);
    }
    let state = initial.state(params.x0, x_max, cells)?;
    let start = OdeState::new(state.grid.moments(0.0), state.u, state.p, state.b, state.grid.moments(1.0));
    let run = run_coupled(state, t_end, settings, params, rates)?;
    let times: Vec<f64> = run.samples.iter().map(|s| s.t).collect();
    let traj = ode::integrate(&start, params, rates, t_end, &OdeOptions::with_tolerance(1e-11).sampled_at(times))?;
    let mut worst = [0.0f64; 5];
    for (s, o) in run.samples.iter().zip(&traj.states) {
        let grid = [s.m0, s.m1, s.u, s.p, s.b];
        let closed = [o.plaques, o.mass, o.oligomer, o.prion, o.complex];
        for k in 0..5 {
            let d = (grid[k] - closed[k]).abs();
            let rel = if d == 0.0 { 0.0 } else { d / closed[k].abs().max(f64::MIN_POSITIVE) };
            worst[k] = worst[k].max(rel);
        }
    }
    Ok(ClosureComparison { per_component: worst, run, ode: traj })
}

/// Moment closure with a 1% relative tolerance.
pub fn moment_closure_check(
    params: &Parameters,
    rates: &RateModel,
    initial: &InitialData,
    t_end: f64,
    cells: usize,
    x_max: f64,
) -> Result<CheckReport> {
    let cmp = moment_closure(params, rates, initial, t_end, cells, x_max, &CoupledSettings::default())?;
    let ctx = Context::new(params, rates, format!("cells={cells};x_max={};T={};{:?}", fmt_f64(x_max), fmt_f64(t_end), initial));
    Ok(CheckReport::new("moment_closure", cmp.max_deviation(), 1e-2, &ctx))
}

/// `max (nA + u + p + 2b - bound) / bound` over the samples, where the bound
/// is the invariant-set level of the initial state.
pub fn stable_set_check(traj: &Trajectory, params: &Parameters, rates: &RateModel, initial: &OdeState) -> Result<CheckReport> {
    let bound = ode::stable_set_bound(initial, params, rates)?;
    let worst = traj
        .states
        .iter()
        .map(|s| (s.weighted_total(params.n) - bound) / bound)
        .fold(f64::NEG_INFINITY, f64::max);
    let ctx = Context::new(params, rates, format!("initial={:?};samples={}", initial.to_array(), traj.len()));
    Ok(CheckReport::new("stable_set", worst, 1e-6, &ctx))
}

/// `int x f(t) <= e^(A t) (int x f_in + x0 int_0^t N(u)) + outflow(t)` along
/// a grid run, with `A` from the largest `u` of the run. Reports the largest
/// relative excess over the right side.
pub fn mass_estimate_check(run: &CoupledRun, params: &Parameters, rates: &RateModel, settings: &str) -> Result<CheckReport> {
    let u_sup = run.samples.iter().map(|s| s.u).fold(0.0, f64::max);
    let a = (rates.linear_bound() * u_sup).max(u_sup * rates.rho_prime_sup());
    let m_in = run.samples[0].m1;
    let t0 = run.samples[0].t;
    let mut influx = 0.0;
    let mut worst = f64::NEG_INFINITY;
    for (i, s) in run.samples.iter().enumerate() {
        if i > 0 {
            let prev = &run.samples[i - 1];
            influx += 0.5 * (s.t - prev.t) * (prev.nucleation + s.nucleation);
        }
        if i == 0 && run.samples.len() > 1 {
            // equality at the start
            continue;
        }
        let rhs = ((s.t - t0) * a).exp() * (m_in + params.x0 * influx) + s.outflow;
        let excess = if rhs > 0.0 { (s.m1 - rhs) / rhs } else { s.m1 };
        worst = worst.max(excess);
    }
    let ctx = Context::new(params, rates, settings);
    Ok(CheckReport::new("mass_estimate", worst, 0.0, &ctx))
}

/// Both sides of the `L1(x dx)` stability estimate for two densities driven
/// by different `u` trajectories from the same initial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionComparison {
    pub times: Vec<f64>,
    /// `int x |f1 - f2|`
    pub distance: Vec<f64>,
    /// Right side evaluated with the measured quantities.
    pub bound: Vec<f64>,
}

/// Evaluates the estimate on grid runs with step `dt`. `K` is the Lipschitz
/// constant of `N` on `[0, max |u|]` and `A` is the bound for `u1`.
pub fn contraction_estimate(
    grid: &PlaqueGrid,
    u1: &CharacteristicField,
    u2: &CharacteristicField,
    t_end: f64,
    dt: f64,
    params: &Parameters,
) -> Result<ContractionComparison> {
    let rates = *u1.rates();
    let (times, g1) = run_transport(grid.clone(), u1, t_end, dt, params)?;
    let (_, g2) = run_transport(grid.clone(), u2, t_end, dt, params)?;
    let centers = grid.centers();
    let widths: Vec<f64> = (0..grid.cells()).map(|i| grid.width(i)).collect();
    let l1 = |f: &[f64], h: &[f64], w: &dyn Fn(f64) -> f64| -> f64 {
        let mut s = 0.0;
        for i in 0..f.len() {
            s += w(centers[i]) * (f[i] - h[i]).abs() * widths[i];
        }
        s
    };
    let k = params.nucleation_lipschitz(u1.u_sup().max(u2.u_sup()));
    let c = rates.linear_bound();
    let a1 = u1.a_bound();

    let mut distance = Vec::with_capacity(times.len());
    let mut integrand_mu = Vec::new();
    let mut integrand_u = Vec::new();
    for (i, &t) in times.iter().enumerate() {
        distance.push(l1(&g1[i].f_avg, &g2[i].f_avg, &|x| x));
        integrand_mu.push(l1(&g1[i].f_avg, &g2[i].f_avg, &|x| x * rates.mu(x)));
        let f2_mass = g2[i].moments(1.0);
        integrand_u.push((k + c * f2_mass) * (u1.u_at(t)? - u2.u_at(t)?).abs());
    }
    let mut bound = vec![distance[0]; times.len()];
    let (mut int_mu, mut int_d, mut int_u) = (0.0, 0.0, 0.0);
    for i in 1..times.len() {
        let h = times[i] - times[i - 1];
        int_mu += 0.5 * h * (integrand_mu[i - 1] + integrand_mu[i]);
        int_d += 0.5 * h * (distance[i - 1] + distance[i]);
        int_u += 0.5 * h * (integrand_u[i - 1] + integrand_u[i]);
        bound[i] = distance[0] - int_mu + a1 * int_d + int_u;
    }
    Ok(ContractionComparison { times, distance, bound })
}

/// Passes when `distance <= 2 bound` at every step.
pub fn contraction_check(cmp: &ContractionComparison, params: &Parameters, rates: &RateModel, settings: &str) -> CheckReport {
    let skip = usize::from(cmp.distance.len() > 1);
    let worst = cmp
        .distance
        .iter()
        .zip(&cmp.bound)
        .skip(skip)
        .map(|(d, b)| d - 2.0 * b)
        .fold(f64::NEG_INFINITY, f64::max);
    let ctx = Context::new(params, rates, settings);
    CheckReport::new("contraction_estimate", worst, 1e-14, &ctx)
}

/// Settings for [`run_suite`].
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteSettings {
    pub t_end: f64,
    pub cells: usize,
    pub x_max: f64,
    pub ode_rtol: f64,
    pub initial: InitialData,
}

impl Default for SuiteSettings {
    fn default() -> Self {
        SuiteSettings { t_end: 1.0, cells: 2000, x_max: 40.0, ode_rtol: 1e-10, initial: InitialData::benchmark() }
    }
}

/// Every applicable check for one parameter set.
pub fn run_suite(params: &Parameters, rates: &RateModel, s: &SuiteSettings) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    let tag = format!(
        "T={};cells={};x_max={};rtol={};{:?}",
        fmt_f64(s.t_end),
        s.cells,
        fmt_f64(s.x_max),
        fmt_f64(s.ode_rtol),
        s.initial
    );
    let state = s.initial.state(params.x0, s.x_max, s.cells)?;

    if rates.is_constant() {
        let start = OdeState::new(state.grid.moments(0.0), state.u, state.p, state.b, state.grid.moments(1.0));
        let traj = ode::integrate(&start, params, rates, s.t_end, &OdeOptions::with_tolerance(s.ode_rtol))?;
        let mut r = prion_balance(&traj, params, rates, &tag)?;
        r.name = "prion_balance_ode".into();
        out.push(r);
        out.push(stable_set_check(&traj, params, rates, &start)?);
        out.push(moment_closure_check(params, rates, &s.initial, s.t_end, s.cells, s.x_max)?);
    }

    let run = run_coupled(state.clone(), s.t_end, &CoupledSettings::default(), params, rates)?;
    let mut r = prion_balance(&run, params, rates, &tag)?;
    r.name = "prion_balance_pde".into();
    out.push(r);
    out.push(oligomer_balance(&run, params, rates, &tag)?);
    out.push(mass_estimate_check(&run, params, rates, &tag)?);

    let times: Vec<f64> = run.samples.iter().map(|x| x.t).collect();
    let u1: Vec<f64> = run.samples.iter().map(|x| x.u).collect();
    let u2: Vec<f64> = u1.iter().map(|u| 1.05 * u).collect();
    let f1 = CharacteristicField::new(times.clone(), u1, *rates)?;
    let f2 = CharacteristicField::new(times, u2, *rates)?;
    let dt = 0.5 * run.dt_min.min(0.9 * state.grid.min_width() / (f2.u_sup() * rates.rho(s.x_max)).max(f64::MIN_POSITIVE));
    let cmp = contraction_estimate(&state.grid, &f1, &f2, s.t_end, dt, params)?;
    out.push(contraction_check(&cmp, params, rates, &tag));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn central_derivative_is_exact_for_quadratics() {
        let t = [0.0, 0.3, 1.0];
        let y: Vec<f64> = t.iter().map(|x| 2.0 * x * x - x + 3.0).collect();
        let d = central_derivative(&t, &y, 1);
        assert!((d - (4.0 * 0.3 - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn balance_needs_three_samples() {
        let traj = Trajectory {
            times: vec![0.0, 1.0],
            states: vec![OdeState::new(0.0, 0.0, 0.0, 0.0, 0.0); 2],
            stats: Default::default(),
        };
        let p = Parameters::unit();
        let r = RateModel::constant(1.0, 1.0, 1.0);
        assert_eq!(prion_balance(&traj, &p, &r, ""), Err(Error::TooFewSamples { needed: 3, got: 2 }));
    }

    #[test]
    fn equilibrium_has_zero_residual() {
        let p = Parameters::unit();
        let r = RateModel::constant(1.0, 1.0, 1.0);
        let ss = crate::stability::find_steady_state(&p, &r, 1e-13).unwrap();
        let s = ss.state();
        let traj = Trajectory { times: vec![0.0, 1.0, 2.0], states: vec![s; 3], stats: Default::default() };
        let rep = prion_balance(&traj, &p, &r, "").unwrap();
        assert!(rep.max_violation < 1e-12);
        assert!(rep.passed);
    }

    #[test]
    fn hash_depends_on_inputs() {
        let p = Parameters::unit();
        let r = RateModel::constant(1.0, 1.0, 1.0);
        let a = Context::new(&p, &r, "x").hash("n");
        assert_eq!(a, Context::new(&p, &r, "x").hash("n"));
        assert_ne!(a, Context::new(&p, &r, "y").hash("n"));
        assert_ne!(a, Context::new(&Parameters { tau: 2.0, ..p }, &r, "x").hash("n"));
        assert_eq!(a.len(), 64);
    }
}
