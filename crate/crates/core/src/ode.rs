//! Closed ODE system for constant polymerization and degradation rates.
//!
//! State `(A, u, p, b, M)`: plaque count, free oligomers, PrP-C, complex and
//! plaque mass. `M` is slaved to the other four but is integrated alongside
//! so the mass observable is available directly.

use std::io::Write;

use crate::error::{Error, Result};
use crate::model::{Parameters, RateModel};
use crate::rk::{self, Flow, StepControl, StepStats};

/// Component labels in storage order.
pub const COMPONENTS: [&str; 5] = ["A", "u", "p", "b", "M"];

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OdeState {
    /// `A`, integral of the plaque density.
    pub plaques: f64,
    /// `u`, free oligomer concentration.
    pub oligomer: f64,
    /// `p`, PrP-C concentration.
    pub prion: f64,
    /// `b`, oligomer–PrP-C complex concentration.
    pub complex: f64,
    /// `M`, first moment of the plaque density.
    pub mass: f64,
}

impl OdeState {
    pub fn new(plaques: f64, oligomer: f64, prion: f64, complex: f64, mass: f64) -> Self {
        OdeState { plaques, oligomer, prion, complex, mass }
    }

    pub fn to_array(self) -> [f64; 5] {
        [self.plaques, self.oligomer, self.prion, self.complex, self.mass]
    }

    pub fn from_array(y: [f64; 5]) -> Self {
        OdeState::new(y[0], y[1], y[2], y[3], y[4])
    }

    pub fn is_nonnegative(&self) -> bool {
        self.to_array().iter().all(|v| *v >= 0.0)
    }

    /// `n A + u + p + 2 b`, the quantity bounded on the stable set.
    pub fn weighted_total(&self, n: u32) -> f64 {
        n as f64 * self.plaques + self.oligomer + self.prion + 2.0 * self.complex
    }

    /// Euclidean distance in `(A, u, p, b)`.
    pub fn distance4(&self, other: &OdeState) -> f64 {
        let a = self.to_array();
        let b = other.to_array();
        (0..4).map(|i| (a[i] - b[i]).powi(2)).sum::<f64>().sqrt()
    }
}

/// `m = min(mu, gamma_u, gamma_p, delta)`, the decay rate of the stable-set
/// functional.
pub fn decay_floor(params: &Parameters, mu: f64) -> f64 {
    mu.min(params.gamma_u).min(params.gamma_p).min(params.delta)
}

/// Upper bound `n A0 + u0 + p0 + 2 b0 + lambda / m` of the stable set built
/// from `initial`.
pub fn stable_set_bound(initial: &OdeState, params: &Parameters, rates: &RateModel) -> Result<f64> {
    let (_, mu) = rates.constants().ok_or(Error::NonConstantRates)?;
    Ok(initial.weighted_total(params.n) + params.total_source() / decay_floor(params, mu))
}

#[inline]
fn rhs_raw(y: &[f64; 5], params: &Parameters, rho: f64, mu: f64) -> [f64; 5] {
    let [a, u, p, b, m] = *y;
    let nuc = params.nucleation_rate(u);
    let nf = params.n as f64;
    let binding = params.tau * u * p;
    [
        nuc - mu * a,
        params.lambda_u - params.gamma_u * u - binding + params.sigma * b - nf * nuc - rho * u * a,
        params.lambda_p - params.gamma_p * p - binding + params.sigma * b,
        binding - (params.sigma + params.delta) * b,
        nf * nuc + rho * u * a - mu * m,
    ]
}

/// Right-hand side of the closed system.
pub fn rhs(state: &OdeState, params: &Parameters, rates: &RateModel) -> Result<OdeState> {
    let (rho, mu) = rates.constants().ok_or(Error::NonConstantRates)?;
    for (name, v) in COMPONENTS.iter().zip(state.to_array()) {
        if v < 0.0 {
            return Err(Error::NegativeInput { what: name, value: v });
        }
    }
    Ok(OdeState::from_array(rhs_raw(&state.to_array(), params, rho, mu)))
}

/// Solver settings for [`integrate`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OdeOptions {
    pub control: StepControl,
    /// Record only these times (plus `t = 0` and `t_end`) instead of every
    /// accepted step.
    pub sample_times: Option<Vec<f64>>,
}

impl OdeOptions {
    pub fn with_tolerance(rtol: f64) -> Self {
        OdeOptions {
            control: StepControl::with_tolerances(rtol, (rtol * 1e-2).max(1e-14)),
            sample_times: None,
        }
    }

    pub fn sampled_at(mut self, times: Vec<f64>) -> Self {
        self.sample_times = Some(times);
        self
    }
}

/// Counters collected while integrating.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TrajectoryStats {
    pub steps: StepStats,
    /// Number of components clamped from a small negative value to zero.
    pub clamped: usize,
    /// Largest undershoot that was clamped.
    pub max_undershoot: f64,
    /// Largest relative excess of `n A + u + p + 2 b` over the stable-set bound.
    pub max_stable_set_excess: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<OdeState>,
    pub stats: TrajectoryStats,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> &OdeState {
        self.states.last().expect("a trajectory holds at least the initial state")
    }

    /// Writes `t,A,u,p,b,M` with 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "A", "u", "p", "b", "M"])?;
        for (t, s) in self.times.iter().zip(&self.states) {
            let mut row = vec![crate::fmt_f64(*t)];
            row.extend(s.to_array().iter().map(|v| crate::fmt_f64(*v)));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Integrates the closed system from `initial` over `[0, t_end]`.
///
/// Accepted states with components in `[-10 tol, 0)` are clamped to zero;
/// anything more negative aborts with [`Error::NegativeState`]. The
/// stable-set excess is tracked in the returned stats.
pub fn integrate(
    initial: &OdeState,
    params: &Parameters,
    rates: &RateModel,
    t_end: f64,
    options: &OdeOptions,
) -> Result<Trajectory> {
    let (rho, mu) = rates.constants().ok_or(Error::NonConstantRates)?;
    if !initial.is_nonnegative() {
        return Err(Error::InvalidParameters(format!("initial state {initial:?} has negative entries")));
    }
    let ctl = &options.control;
    if !(ctl.rtol > 0.0) || !(t_end >= 0.0) {
        return Err(Error::InvalidParameters(format!(
            "need rtol > 0 and t_end >= 0 (rtol = {}, t_end = {t_end})",
            ctl.rtol
        )));
    }
    let bound = stable_set_bound(initial, params, rates)?;
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![*initial],
        stats: TrajectoryStats::default(),
    };
    let stops: Vec<f64> = options.sample_times.clone().unwrap_or_default();
    let only_stops = options.sample_times.is_some();
    let mut stats = TrajectoryStats::default();

    let steps = rk::integrate(
        |_, y: &[f64; 5]| rhs_raw(y, params, rho, mu),
        0.0,
        initial.to_array(),
        t_end,
        &stops,
        ctl,
        |t, y, at_stop| {
            let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let floor = -10.0 * (ctl.rtol * scale + ctl.atol);
            for (i, v) in y.iter_mut().enumerate() {
                if *v < 0.0 {
                    if *v < floor {
                        return Err(Error::NegativeState { t, component: COMPONENTS[i], value: *v });
                    }
                    stats.clamped += 1;
                    stats.max_undershoot = stats.max_undershoot.max(-*v);
                    *v = 0.0;
                }
            }
            let state = OdeState::from_array(*y);
            let excess = (state.weighted_total(params.n) - bound) / bound;
            stats.max_stable_set_excess = stats.max_stable_set_excess.max(excess);
            if !only_stops || at_stop {
                traj.times.push(t);
                traj.states.push(state);
            }
            Ok(Flow::Continue)
        },
    )?;
    stats.steps = steps;
    traj.stats = stats;
    Ok(traj)
}
