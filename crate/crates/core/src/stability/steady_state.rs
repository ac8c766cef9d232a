use crate::error::{Error, Result};
use crate::model::{validate, Parameters, RateModel};
use crate::ode::{self, OdeState};

/// Which quadratic coefficient `Q` carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuadraticTerm {
    /// `tau* gamma_u`, obtained by eliminating `p` and `b` from the
    /// equilibrium equations.
    #[default]
    General,
    /// `tau* lambda_u`, the coefficient printed for the `alpha = 0` case.
    /// Kept only for side-by-side comparison; its root is not an equilibrium
    /// unless `lambda_u = gamma_u`.
    AsPrinted,
}

struct QPoly {
    constant: f64,
    linear: f64,
    quadratic: f64,
    /// coefficients of x^n, x^(n+1), x^(n+2)
    high: [f64; 3],
    n: i32,
}

impl QPoly {
    fn new(params: &Parameters, rho: f64, mu: f64, mode: QuadraticTerm) -> Self {
        let ts = params.tau_star();
        let ratio = params.alpha / mu;
        let nf = params.n as f64;
        let quadratic = match mode {
            QuadraticTerm::General => ts * params.gamma_u,
            QuadraticTerm::AsPrinted => ts * params.lambda_u,
        };
        QPoly {
            constant: params.gamma_p * params.lambda_u,
            linear: ts * (params.lambda_u - params.lambda_p) - params.gamma_u * params.gamma_p,
            quadratic,
            high: [
                params.alpha * params.gamma_p * nf,
                params.alpha * ts * nf + rho * params.gamma_p * ratio,
                rho * ts * ratio,
            ],
            n: params.n as i32,
        }
    }

    fn value(&self, x: f64) -> f64 {
        let xn = x.powi(self.n);
        let p = self.quadratic * x * x + xn * (self.high[0] + x * (self.high[1] + x * self.high[2]));
        self.constant + self.linear * x - p
    }

    fn slope(&self, x: f64) -> f64 {
        let n = self.n as f64;
        let xn1 = if self.n == 1 { 1.0 } else { x.powi(self.n - 1) };
        let dp = 2.0 * self.quadratic * x
            + xn1 * (n * self.high[0] + x * ((n + 1.0) * self.high[1] + x * (n + 2.0) * self.high[2]));
        self.linear - dp
    }
}

fn constant_rates(rates: &RateModel) -> Result<(f64, f64)> {
    rates.constants().ok_or(Error::NonConstantRates)
}

/// `Q(x) = gamma_p lambda_u + a x - P(x)`; its unique positive root is `u_inf`.
pub fn q_evaluate(x: f64, params: &Parameters, rates: &RateModel) -> Result<f64> {
    q_evaluate_with(x, params, rates, QuadraticTerm::General)
}

pub fn q_evaluate_with(x: f64, params: &Parameters, rates: &RateModel, mode: QuadraticTerm) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::NegativeInput { what: "Q argument", value: x });
    }
    let (rho, mu) = constant_rates(rates)?;
    Ok(QPoly::new(params, rho, mu, mode).value(x))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateReport {
    pub u_inf: f64,
    pub a_inf: f64,
    pub p_inf: f64,
    pub b_inf: f64,
    /// Plaque mass at equilibrium, `(n N(u) + rho u A) / mu`.
    pub m_inf: f64,
    pub tau_star: f64,
    /// Linear coefficient `a = tau* (lambda_u - lambda_p) - gamma_u gamma_p`.
    pub a_coeff: f64,
    pub q_root_bracket: (f64, f64),
    /// `Q(u_inf)` after polishing.
    pub q_value: f64,
    /// Largest `|rhs|` component of `(A, u, p, b)` at the reported state.
    pub residual: f64,
    /// `|tau u p - (delta + sigma) b|`.
    pub binding_residual: f64,
}

impl SteadyStateReport {
    pub fn state(&self) -> OdeState {
        OdeState::new(self.a_inf, self.u_inf, self.p_inf, self.b_inf, self.m_inf)
    }
}

const MAX_DOUBLINGS: usize = 200;
const NEWTON_STEPS: usize = 5;

/// Brackets and bisects the positive root of `Q` to `|interval| < tol`,
/// polishes it with at most five Newton steps that stay in the bracket, and
/// assembles the equilibrium.
pub fn find_steady_state(params: &Parameters, rates: &RateModel, tol: f64) -> Result<SteadyStateReport> {
    find_steady_state_with(params, rates, tol, QuadraticTerm::General)
}

pub fn find_steady_state_with(
    params: &Parameters,
    rates: &RateModel,
    tol: f64,
    mode: QuadraticTerm,
) -> Result<SteadyStateReport> {
    let (rho, mu) = constant_rates(rates)?;
    validate(params, rates).into_result()?;
    if !(mu > 0.0) {
        return Err(Error::InvalidParameters(format!("mu = {mu} must be positive at equilibrium")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameters(format!("tol = {tol} must be positive")));
    }
    let q = QPoly::new(params, rho, mu, mode);

    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut doublings = 0;
    while q.value(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > MAX_DOUBLINGS {
            return Err(Error::BracketFailure(MAX_DOUBLINGS));
        }
    }
    while hi - lo >= tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if q.value(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    let mut qx = q.value(x);
    for _ in 0..NEWTON_STEPS {
        let slope = q.slope(x);
        if slope == 0.0 || qx == 0.0 {
            break;
        }
        let next = x - qx / slope;
        if !(next >= lo && next <= hi) {
            break;
        }
        let qn = q.value(next);
        if qn.abs() >= qx.abs() {
            break;
        }
        x = next;
        qx = qn;
    }

    let u = x;
    let ts = params.tau_star();
    let nuc = params.nucleation_rate(u);
    let a_inf = nuc / mu;
    let denom = ts * u + params.gamma_p;
    let p_inf = params.lambda_p / denom;
    let b_inf = params.lambda_p * (params.tau - ts) / denom * u / params.sigma;
    let m_inf = (params.n as f64 * nuc + rho * u * a_inf) / mu;
    let state = OdeState::new(a_inf, u, p_inf, b_inf, m_inf);
    let d = ode::rhs(&state, params, rates)?.to_array();
    let residual = d[..4].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let binding_residual = (params.tau * u * p_inf - (params.delta + params.sigma) * b_inf).abs();

    Ok(SteadyStateReport {
        u_inf: u,
        a_inf,
        p_inf,
        b_inf,
        m_inf,
        tau_star: ts,
        a_coeff: q.linear,
        q_root_bracket: (lo, hi),
        q_value: qx,
        residual,
        binding_residual,
    })
}
