use std::io::Write;

use crate::error::{Error, Result};
use crate::fmt_f64;
use crate::model::{Parameters, RateModel};

use super::characteristics::CharacteristicField;
use super::grid::{DensitySpec, PlaqueGrid};

/// Plaque density plus the soluble species at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledState {
    pub grid: PlaqueGrid,
    pub u: f64,
    pub p: f64,
    pub b: f64,
    pub t: f64,
}

impl CoupledState {
    pub fn new(grid: PlaqueGrid, u: f64, p: f64, b: f64) -> Result<Self> {
        for (what, v) in [("u", u), ("p", p), ("b", b)] {
            if !(v >= 0.0) {
                return Err(Error::NegativeInput { what, value: v });
            }
        }
        if let Some(v) = grid.f_avg.iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::NegativeInput { what: "initial density", value: *v });
        }
        Ok(CoupledState { grid, u, p, b, t: 0.0 })
    }
}

/// Soluble initial values and the initial plaque density.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub u: f64,
    pub p: f64,
    pub b: f64,
    pub density: DensitySpec,
}

impl InitialData {
    /// `u = p = b = 1` and a unit-mass exponential of unit scale.
    pub fn benchmark() -> Self {
        InitialData { u: 1.0, p: 1.0, b: 1.0, density: DensitySpec::exp_decay(1.0, 1.0) }
    }

    pub fn state(&self, x0: f64, x_max: f64, cells: usize) -> Result<CoupledState> {
        let grid = PlaqueGrid::with_density(x0, x_max, cells, &self.density)?;
        CoupledState::new(grid, self.u, self.p, self.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeScheme {
    /// Transport with frozen `u`, then a soluble step with the transported
    /// density. First order in time.
    SplitEuler,
    /// Average of two forward Euler stages of the whole system (SSP-RK2).
    #[default]
    Heun,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoupledSettings {
    /// Fixed step; `None` picks `cfl_safety` times the CFL limit each step.
    pub dt: Option<f64>,
    pub cfl_safety: f64,
    pub scheme: TimeScheme,
    /// Record a sample every this many steps (the last step is always kept).
    pub record_every: usize,
    /// Times at which full density snapshots are stored. Adaptive steps land
    /// on them; with a fixed `dt` they are rounded to the nearest step.
    pub snapshot_times: Vec<f64>,
}

impl Default for CoupledSettings {
    fn default() -> Self {
        CoupledSettings { dt: None, cfl_safety: 0.9, scheme: TimeScheme::Heun, record_every: 1, snapshot_times: Vec::new() }
    }
}

/// Rates sampled on one grid.
#[derive(Debug, Clone)]
struct Coefficients {
    rho_edge: Vec<f64>,
    rho_center: Vec<f64>,
    mu_center: Vec<f64>,
    width: Vec<f64>,
}

impl Coefficients {
    fn new(grid: &PlaqueGrid, rates: &RateModel) -> Self {
        let n = grid.cells();
        Coefficients {
            rho_edge: grid.edges()[1..].iter().map(|&x| rates.rho(x)).collect(),
            rho_center: grid.centers().iter().map(|&x| rates.rho(x)).collect(),
            mu_center: grid.centers().iter().map(|&x| rates.mu(x)).collect(),
            width: (0..n).map(|i| grid.width(i)).collect(),
        }
    }

    fn rho_integral(&self, f: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..f.len() {
            s += self.rho_center[i] * f[i] * self.width[i];
        }
        s
    }

    /// Upwind flux divergence and decay; returns the number flux through
    /// `x_max`.
    fn transport(&self, f: &[f64], u: f64, influx: f64, df: &mut [f64]) -> f64 {
        let mut left = influx;
        for i in 0..f.len() {
            let right = u * self.rho_edge[i] * f[i];
            df[i] = -(right - left) / self.width[i] - self.mu_center[i] * f[i];
            left = right;
        }
        left
    }

    fn cfl_limit(&self, u: f64) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.width.len() {
            worst = worst.max(u * self.rho_edge[i] / self.width[i]);
        }
        if worst > 0.0 {
            1.0 / worst
        } else {
            f64::INFINITY
        }
    }
}

/// Largest stable step `min_i dx_i / (u rho(x_{i+1/2}))` (before safety).
pub fn cfl_limit(state: &CoupledState, rates: &RateModel) -> f64 {
    Coefficients::new(&state.grid, rates).cfl_limit(state.u)
}

fn soluble(params: &Parameters, u: f64, p: f64, b: f64, rho_int: f64) -> [f64; 3] {
    let bind = params.tau * u * p;
    [
        params.lambda_u - params.gamma_u * u - bind + params.sigma * b
            - params.n as f64 * params.nucleation_rate(u)
            - u * rho_int / params.epsilon,
        params.lambda_p - params.gamma_p * p - bind + params.sigma * b,
        bind - (params.sigma + params.delta) * b,
    ]
}

struct Stepper<'a> {
    params: &'a Parameters,
    coef: Coefficients,
    x_max: f64,
    df: Vec<f64>,
    stage: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(grid: &PlaqueGrid, params: &'a Parameters, rates: &RateModel) -> Self {
        let n = grid.cells();
        Stepper { params, coef: Coefficients::new(grid, rates), x_max: grid.x_max(), df: vec![0.0; n], stage: vec![0.0; n] }
    }

    /// One Euler stage of the whole system from `(f, y)` into `(out, y_out)`;
    /// returns the outflow mass gained.
    fn euler(&mut self, f: &[f64], y: [f64; 3], dt: f64, out: &mut [f64]) -> ([f64; 3], f64) {
        let [u, p, b] = y;
        let flux_out = self.coef.transport(f, u, self.params.nucleation_rate(u), &mut self.df);
        let d = soluble(self.params, u, p, b, self.coef.rho_integral(f));
        for i in 0..f.len() {
            out[i] = f[i] + dt * self.df[i];
        }
        ([u + dt * d[0], p + dt * d[1], b + dt * d[2]], dt * self.x_max * flux_out)
    }

    fn step(&mut self, state: &mut CoupledState, dt: f64, scheme: TimeScheme) -> Result<()> {
        let y = [state.u, state.p, state.b];
        let n = state.grid.cells();
        let mut stage = std::mem::take(&mut self.stage);
        let (y_new, out) = match scheme {
            TimeScheme::SplitEuler => {
                let flux_out =
                    self.coef.transport(&state.grid.f_avg, state.u, self.params.nucleation_rate(state.u), &mut self.df);
                for i in 0..n {
                    stage[i] = state.grid.f_avg[i] + dt * self.df[i];
                }
                let d = soluble(self.params, state.u, state.p, state.b, self.coef.rho_integral(&stage));
                std::mem::swap(&mut state.grid.f_avg, &mut stage);
                ([y[0] + dt * d[0], y[1] + dt * d[1], y[2] + dt * d[2]], dt * self.x_max * flux_out)
            }
            TimeScheme::Heun => {
                let (y1, out1) = self.euler(&state.grid.f_avg, y, dt, &mut stage);
                let mut second = vec![0.0; n];
                let (y2, out2) = self.euler(&stage, y1, dt, &mut second);
                for i in 0..n {
                    state.grid.f_avg[i] = 0.5 * (state.grid.f_avg[i] + second[i]);
                }
                let mut avg = [0.0; 3];
                for k in 0..3 {
                    avg[k] = 0.5 * (y[k] + y2[k]);
                }
                (avg, 0.5 * (out1 + out2))
            }
        };
        self.stage = stage;
        state.t += dt;
        state.grid.outflow_mass += out;
        for (component, v) in ["u", "p", "b"].into_iter().zip(y_new) {
            if v < 0.0 {
                return Err(Error::NegativeState { t: state.t, component, value: v });
            }
        }
        state.u = y_new[0];
        state.p = y_new[1];
        state.b = y_new[2];
        clamp_density(&mut state.grid)
    }
}

fn clamp_density(grid: &mut PlaqueGrid) -> Result<()> {
    let floor = -1e-12 * grid.max_density();
    for (cell, v) in grid.f_avg.iter_mut().enumerate() {
        if *v < 0.0 {
            if *v < floor {
                return Err(Error::NegativeDensity { cell, value: *v });
            }
            *v = 0.0;
        }
    }
    Ok(())
}

/// Advances the coupled system by one explicit step of length `dt`.
///
/// Rejects `dt` above `safety` times the CFL limit at the current `u`.
pub fn step_coupled(
    state: &CoupledState,
    dt: f64,
    scheme: TimeScheme,
    safety: f64,
    params: &Parameters,
    rates: &RateModel,
) -> Result<CoupledState> {
    let mut stepper = Stepper::new(&state.grid, params, rates);
    let limit = safety * stepper.coef.cfl_limit(state.u);
    if dt > limit {
        return Err(Error::CflViolation { dt, limit });
    }
    let mut next = state.clone();
    stepper.step(&mut next, dt, scheme)?;
    Ok(next)
}

/// Diagnostics recorded after a step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledSample {
    pub t: f64,
    /// `int f`
    pub m0: f64,
    /// `int x f`
    pub m1: f64,
    pub u: f64,
    pub p: f64,
    pub b: f64,
    /// `int x mu f`
    pub mu_mass: f64,
    /// `int rho f`
    pub rho_integral: f64,
    pub nucleation: f64,
    /// Cumulative mass carried through `x_max`.
    pub outflow: f64,
}

impl CoupledSample {
    fn of(state: &CoupledState, params: &Parameters, rates: &RateModel) -> Self {
        let g = &state.grid;
        CoupledSample {
            t: state.t,
            m0: g.moments(0.0),
            m1: g.moments(1.0),
            u: state.u,
            p: state.p,
            b: state.b,
            mu_mass: g.weighted(|x| x * rates.mu(x)),
            rho_integral: g.weighted(|x| rates.rho(x)),
            nucleation: params.nucleation_rate(state.u),
            outflow: g.outflow_mass,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoupledRun {
    pub samples: Vec<CoupledSample>,
    pub snapshots: Vec<(f64, Vec<f64>)>,
    pub final_state: CoupledState,
    pub steps: usize,
    pub dt_min: f64,
    pub dt_max: f64,
    pub warnings: Vec<String>,
}

impl CoupledRun {
    /// `t,M0,M1,u,p,b`
    pub fn write_moments_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,M0,M1,u,p,b")?;
        for s in &self.samples {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                fmt_f64(s.t),
                fmt_f64(s.m0),
                fmt_f64(s.m1),
                fmt_f64(s.u),
                fmt_f64(s.p),
                fmt_f64(s.b)
            )?;
        }
        Ok(())
    }

    /// `t,x_center,f_avg` for every stored snapshot.
    pub fn write_density_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,x_center,f_avg")?;
        let centers = self.final_state.grid.centers();
        for (t, f) in &self.snapshots {
            for (x, v) in centers.iter().zip(f) {
                writeln!(out, "{},{},{}", fmt_f64(*t), fmt_f64(*x), fmt_f64(*v))?;
            }
        }
        Ok(())
    }

    pub fn max_outflow_fraction(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| if s.m1 + s.outflow > 0.0 { s.outflow / (s.m1 + s.outflow) } else { 0.0 })
            .fold(0.0, f64::max)
    }
}

/// Outflow above this fraction of the mass triggers a warning.
pub const OUTFLOW_WARNING: f64 = 1e-3;

/// Integrates the coupled system from `initial` to `t_end`, recording a
/// sample at `t = initial.t` and after every `record_every` steps.
pub fn run_coupled(
    initial: CoupledState,
    t_end: f64,
    settings: &CoupledSettings,
    params: &Parameters,
    rates: &RateModel,
) -> Result<CoupledRun> {
    if !(t_end >= initial.t) {
        return Err(Error::Argument(format!("t_end = {t_end} precedes the initial time {}", initial.t)));
    }
    let mut stepper = Stepper::new(&initial.grid, params, rates);
    let mut state = initial;
    let mut samples = vec![CoupledSample::of(&state, params, rates)];
    let mut snapshots = Vec::new();
    let mut pending: Vec<f64> = settings.snapshot_times.iter().copied().filter(|&t| t <= t_end).collect();
    pending.sort_by(f64::total_cmp);
    pending.reverse();
    let take_snapshots = |state: &CoupledState, pending: &mut Vec<f64>, snaps: &mut Vec<(f64, Vec<f64>)>, dt: f64| {
        while let Some(&t) = pending.last() {
            if t <= state.t + 0.5 * dt {
                snaps.push((state.t, state.grid.f_avg.clone()));
                pending.pop();
            } else {
                break;
            }
        }
    };
    take_snapshots(&state, &mut pending, &mut snapshots, 0.0);

    let (mut steps, mut dt_min, mut dt_max) = (0usize, f64::INFINITY, 0.0f64);
    let every = settings.record_every.max(1);
    while state.t < t_end {
        let limit = settings.cfl_safety * stepper.coef.cfl_limit(state.u);
        let mut dt = match settings.dt {
            Some(dt) => {
                if dt > limit {
                    return Err(Error::CflViolation { dt, limit });
                }
                dt
            }
            None => limit,
        };
        // adaptive steps also stop on snapshot times
        let target = match (settings.dt, pending.last()) {
            (None, Some(&next)) if next > state.t => next.min(t_end),
            _ => t_end,
        };
        let remaining = target - state.t;
        // land on the target without a sliver step
        if dt >= remaining * (1.0 - 1e-9) {
            dt = remaining;
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::StepSizeUnderflow { t: state.t, h: dt });
        }
        stepper.step(&mut state, dt, settings.scheme)?;
        if dt == remaining {
            state.t = target;
        }
        steps += 1;
        dt_min = dt_min.min(dt);
        dt_max = dt_max.max(dt);
        if steps % every == 0 || state.t >= t_end {
            samples.push(CoupledSample::of(&state, params, rates));
        }
        take_snapshots(&state, &mut pending, &mut snapshots, dt);
    }
    let mut run = CoupledRun { samples, snapshots, final_state: state, steps, dt_min, dt_max, warnings: Vec::new() };
    let frac = run.max_outflow_fraction();
    if frac > OUTFLOW_WARNING {
        run.warnings.push(format!(
            "outflow through x_max = {} reached {:.3e} of the plaque mass; enlarge x_max",
            run.final_state.grid.x_max(),
            frac
        ));
    }
    Ok(run)
}

/// Transport only: the density driven by a prescribed `u(t)` with influx
/// `N(u(t))`, stepped with Heun at a fixed `dt`. Returns the time grid and
/// the grid after every step.
pub fn run_transport(
    grid: PlaqueGrid,
    field: &CharacteristicField,
    t_end: f64,
    dt: f64,
    params: &Parameters,
) -> Result<(Vec<f64>, Vec<PlaqueGrid>)> {
    let rates = *field.rates();
    let coef = Coefficients::new(&grid, &rates);
    let limit = 0.9 * coef.cfl_limit(field.u_sup());
    if dt > limit {
        return Err(Error::CflViolation { dt, limit });
    }
    let (t0, _) = field.span();
    let steps = ((t_end - t0) / dt).ceil().max(0.0) as usize;
    let h = if steps > 0 { (t_end - t0) / steps as f64 } else { 0.0 };
    let n = grid.cells();
    let x_max = grid.x_max();
    let mut times = vec![t0];
    let mut out = vec![grid.clone()];
    let mut g = grid;
    let (mut d1, mut d2, mut stage) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for k in 0..steps {
        let t = t0 + k as f64 * h;
        let t_next = if k + 1 == steps { t_end } else { t + h };
        let (ua, ub) = (field.u_at(t)?, field.u_at(t_next)?);
        let o1 = coef.transport(&g.f_avg, ua, params.nucleation_rate(ua), &mut d1);
        for i in 0..n {
            stage[i] = g.f_avg[i] + h * d1[i];
        }
        let o2 = coef.transport(&stage, ub, params.nucleation_rate(ub), &mut d2);
        for i in 0..n {
            g.f_avg[i] += 0.5 * h * (d1[i] + d2[i]);
        }
        g.outflow_mass += 0.5 * h * x_max * (o1 + o2);
        clamp_density(&mut g)?;
        times.push(t_next);
        out.push(g.clone());
    }
    Ok((times, out))
}

/// `x0 e^(A T) 4`, the truncation used when none is given.
pub fn default_x_max(x0: f64, a_bound: f64, t_end: f64) -> f64 {
    x0 * (a_bound * t_end).exp() * 4.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_state(cells: usize) -> CoupledState {
        let g = PlaqueGrid::with_density(1.0, 40.0, cells, &DensitySpec::exp_decay(1.0, 1.0)).unwrap();
        CoupledState::new(g, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn empty_density_follows_soluble_subsystem() {
        let params = Parameters { alpha: 0.0, ..Parameters::unit() };
        let rates = RateModel::constant(1.0, 1.0, 1.0);
        let g = PlaqueGrid::uniform(1.0, 10.0, 100).unwrap();
        let state = CoupledState::new(g, 1.0, 1.0, 1.0).unwrap();
        let run = run_coupled(state, 1.0, &CoupledSettings { dt: Some(0.01), ..Default::default() }, &params, &rates).unwrap();
        assert!(run.final_state.grid.f_avg.iter().all(|&v| v == 0.0));
        // reference: the same soluble system with a fine fixed-step RK
        let y = crate::rk::integrate_fixed(
            |_, y: &[f64; 3]| soluble(&params, y[0], y[1], y[2], 0.0),
            0.0,
            [1.0, 1.0, 1.0],
            1.0,
            1000,
        );
        let s = &run.final_state;
        for (a, b) in [s.u, s.p, s.b].iter().zip(y) {
            assert!((a - b).abs() < 1e-4, "{a} vs {b}");
        }
    }

    #[test]
    fn cfl_is_enforced() {
        let params = Parameters::unit();
        let rates = RateModel::constant(1.0, 1.0, 1.0);
        let s = unit_state(400);
        let limit = cfl_limit(&s, &rates);
        assert!((limit - 39.0 / 400.0).abs() < 1e-12);
        assert!(matches!(
            step_coupled(&s, limit, TimeScheme::Heun, 0.9, &params, &rates),
            Err(Error::CflViolation { .. })
        ));
        let next = step_coupled(&s, 0.5 * limit, TimeScheme::Heun, 0.9, &params, &rates).unwrap();
        assert!(next.grid.f_avg.iter().all(|&v| v >= 0.0));
        assert_eq!(next.t, 0.5 * limit);
    }

    #[test]
    fn number_balance_is_exact_per_step() {
        // d/dt int f = N(u) - mu int f - outflow, telescoped by the scheme
        let params = Parameters::unit();
        let rates = RateModel::constant(1.0, 0.0, 1.0);
        let s = unit_state(200);
        let dt = 0.05;
        let next = step_coupled(&s, dt, TimeScheme::SplitEuler, 0.9, &params, &rates).unwrap();
        let gain = next.grid.moments(0.0) - s.grid.moments(0.0);
        let tail = s.grid.f_avg[199] * 1.0 * (s.u) * dt;
        assert!((gain - (dt * params.nucleation_rate(1.0) - tail)).abs() < 1e-12);
    }

    #[test]
    fn snapshots_and_csv() {
        let params = Parameters::unit();
        let rates = RateModel::constant(1.0, 1.0, 1.0);
        let settings = CoupledSettings { dt: Some(0.05), snapshot_times: vec![0.0, 0.5], ..Default::default() };
        let run = run_coupled(unit_state(100), 0.5, &settings, &params, &rates).unwrap();
        assert_eq!(run.snapshots.len(), 2);
        assert_eq!(run.samples.len(), 11);
        assert_eq!(run.final_state.t, 0.5);
        let mut buf = Vec::new();
        run.write_moments_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,M0,M1,u,p,b\n"));
        assert_eq!(text.lines().count(), 12);
    }
}
