use nalgebra::{Complex, Matrix4};

use super::steady_state::SteadyStateReport;
use crate::error::{Error, Result};
use crate::model::{Parameters, RateModel};

/// Linearization of the `(A, u, p, b)` subsystem, row-major.
pub type Jacobian = [[f64; 4]; 4];

fn constants(rates: &RateModel) -> Result<(f64, f64)> {
    rates.constants().ok_or(Error::NonConstantRates)
}

/// Jacobian of the `(A, u, p, b)` right-hand side at the equilibrium.
///
/// `M` is slaved to the other components and does not feed back, so it is
/// left out. The `(u, u)` entry is the full derivative
/// `-(gamma_u + tau p + alpha n^2 u^(n-1) + rho A)`.
pub fn jacobian_at(ss: &SteadyStateReport, params: &Parameters, rates: &RateModel) -> Result<Jacobian> {
    let (rho, mu) = constants(rates)?;
    let n = params.n as f64;
    let u = ss.u_inf;
    let slope = params.nucleation_slope(u);
    let tau = params.tau;
    Ok([
        [-mu, slope, 0.0, 0.0],
        [
            -rho * u,
            -(params.gamma_u + tau * ss.p_inf + n * slope + rho * ss.a_inf),
            -tau * u,
            params.sigma,
        ],
        [0.0, -tau * ss.p_inf, -(params.gamma_p + tau * u), params.sigma],
        [0.0, tau * ss.p_inf, tau * u, -(params.sigma + params.delta)],
    ])
}

/// `(a1, a2, a3, a4)` with `det(z I - D) = z^4 + a1 z^3 + a2 z^2 + a3 z + a4`,
/// from the closed-form expressions in the equilibrium constants.
pub fn characteristic_coefficients(
    ss: &SteadyStateReport,
    params: &Parameters,
    rates: &RateModel,
) -> Result<[f64; 4]> {
    let (rho, mu) = constants(rates)?;
    let Parameters { gamma_u, lambda_p, gamma_p, tau, sigma, delta, alpha, n, .. } = *params;
    let n = n as f64;
    let u = ss.u_inf;
    let un = u.powi(params.n as i32);
    let un1 = if params.n == 1 { 1.0 } else { u.powi(params.n as i32 - 1) };
    // tau lambda_p / (tau* u + gamma_p), i.e. tau p_inf
    let tp = tau * lambda_p / (ss.tau_star * u + gamma_p);
    let k = alpha * n * n * un1 + rho * (alpha / mu) * un;
    let g = gamma_p + tau * u + sigma + delta;
    let h = gamma_p * sigma + (gamma_p + tau * u) * delta;
    let rn = rho * alpha * n * un;

    let a1 = mu + gamma_u + tp + alpha * n * n * un1 + rho * (alpha / mu) * un + gamma_p + tau * u + sigma + delta;
    let a2 = (mu + gamma_u + k) * g + gamma_p * sigma + (gamma_p + tau * u) * delta
        + mu * (gamma_u + tp + k)
        + rn
        + (gamma_p + delta) * tp;
    let a3 = (mu + gamma_u + k) * h + (gamma_p * delta + (gamma_p + delta) * mu) * tp + (mu * (gamma_u + k) + rn) * g;
    let a4 = mu * gamma_p * delta * tp + (mu * (gamma_u + k) + rn) * h;
    Ok([a1, a2, a3, a4])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouthHurwitz {
    /// `a1 a2 a3 - a3^2 - a1^2 a4`
    pub margin: f64,
    pub all_positive: bool,
}

impl RouthHurwitz {
    pub fn stable(&self) -> bool {
        self.all_positive && self.margin > 0.0
    }
}

/// Routh–Hurwitz test for a monic quartic.
pub fn routh_hurwitz(a: [f64; 4]) -> RouthHurwitz {
    let [a1, a2, a3, a4] = a;
    RouthHurwitz {
        margin: a1 * a2 * a3 - a3 * a3 - a1 * a1 * a4,
        all_positive: a.iter().all(|&c| c > 0.0),
    }
}

/// Eigenvalues of `D`, sorted by real part then imaginary part.
pub fn eigenvalues(d: &Jacobian) -> [Complex<f64>; 4] {
    let m = Matrix4::from_fn(|i, j| d[i][j]);
    let ev = m.complex_eigenvalues();
    let mut out = [ev[0], ev[1], ev[2], ev[3]];
    out.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    out
}

/// Coefficients `c1..ck` of `prod (z - r_i) = z^k + c1 z^(k-1) + ... + ck`.
/// Imaginary parts are dropped at the end; they cancel for conjugate roots.
pub fn polynomial_from_roots(roots: &[Complex<f64>]) -> Vec<f64> {
    let mut c = vec![Complex::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![Complex::new(0.0, 0.0); c.len() + 1];
        for (i, &ci) in c.iter().enumerate() {
            next[i] += ci;
            next[i + 1] -= ci * r;
        }
        c = next;
    }
    c[1..].iter().map(|z| z.re).collect()
}

/// The chain `1 + 2(delta + gamma_u)/sigma > delta/(2 gamma_p) > gamma_p/sigma`
/// under which the explicit Lyapunov function is positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainCondition {
    pub cond1: f64,
    pub cond2: f64,
    pub cond3: f64,
}

impl ChainCondition {
    pub fn new(params: &Parameters) -> Self {
        ChainCondition {
            cond1: 1.0 + 2.0 * (params.delta + params.gamma_u) / params.sigma,
            cond2: params.delta / (2.0 * params.gamma_p),
            cond3: params.gamma_p / params.sigma,
        }
    }

    pub fn holds(&self) -> bool {
        self.cond1 > self.cond2 && self.cond2 > self.cond3
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub jacobian: Jacobian,
    pub coefficients: [f64; 4],
    pub routh_hurwitz: RouthHurwitz,
    pub eigenvalues: [Complex<f64>; 4],
    pub chain: ChainCondition,
    /// `alpha = 0` and the chain condition holds.
    pub lyapunov_ok: bool,
}

impl StabilityReport {
    pub fn eigen_real_parts(&self) -> [f64; 4] {
        self.eigenvalues.map(|z| z.re)
    }

    pub fn max_real_part(&self) -> f64 {
        self.eigenvalues.iter().fold(f64::NEG_INFINITY, |m, z| m.max(z.re))
    }

    pub fn trace(&self) -> f64 {
        (0..4).map(|i| self.jacobian[i][i]).sum()
    }
}

pub fn analyze(ss: &SteadyStateReport, params: &Parameters, rates: &RateModel) -> Result<StabilityReport> {
    let jacobian = jacobian_at(ss, params, rates)?;
    let coefficients = characteristic_coefficients(ss, params, rates)?;
    let chain = ChainCondition::new(params);
    Ok(StabilityReport {
        jacobian,
        coefficients,
        routh_hurwitz: routh_hurwitz(coefficients),
        eigenvalues: eigenvalues(&jacobian),
        chain,
        lyapunov_ok: params.alpha == 0.0 && chain.holds(),
    })
}
