use super::linear::ChainCondition;
use super::steady_state::SteadyStateReport;
use crate::error::{Error, Result};
use crate::model::{Parameters, RateModel};
use crate::ode::OdeState;

/// The explicit Lyapunov function of the `alpha = 0` system, with its
/// constants frozen at one equilibrium.
///
/// `phi` and `phi_dot` follow the closed forms term by term. The `theta_2^2`
/// weight of `phi` depends on the current plaque level through
/// `rho (A_inf + theta_1)`, and is evaluated at the state it is given.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovCertificate {
    params: Parameters,
    rho: f64,
    mu: f64,
    eq: OdeState,
    chain: ChainCondition,
    pub t1: f64,
    pub t2: f64,
    pub s1: f64,
    /// `rho p_inf / (gamma_u + rho A_inf + mu)`
    r: f64,
}

/// One evaluation of the certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovValue {
    pub phi: f64,
    /// The closed-form derivative.
    pub phi_dot: f64,
    /// `grad(phi) . F` computed by the chain rule from the vector field.
    pub phi_dot_chain: f64,
}

impl LyapunovCertificate {
    pub fn new(ss: &SteadyStateReport, params: &Parameters, rates: &RateModel) -> Result<Self> {
        let (rho, mu) = rates.constants().ok_or(Error::NonConstantRates)?;
        if params.alpha != 0.0 {
            return Err(Error::NucleationPresent(params.alpha));
        }
        let chain = ChainCondition::new(params);
        if !chain.holds() {
            return Err(Error::LyapunovCondition { cond1: chain.cond1, cond2: chain.cond2, cond3: chain.cond3 });
        }
        let Parameters { gamma_u, gamma_p, tau, sigma, delta, .. } = *params;
        let (u_inf, p_inf, a_inf) = (ss.u_inf, ss.p_inf, ss.a_inf);
        let k = delta / (2.0 * gamma_p);
        let r = rho * p_inf / (gamma_u + rho * a_inf + mu);
        let big_r = rho / tau;
        let c1 = 1.0 + 2.0 * (delta + gamma_u) / sigma;

        let chain_term = (delta + mu) * (r + 1.0) + (sigma + delta + mu) * big_r + 2.0 * rho * u_inf;
        let t1 = rho * rho * delta * u_inf * u_inf * (1.0 + 2.0 * (1.0 + delta) / sigma) / (8.0 * mu * gamma_p)
            + (gamma_p + mu).powi(2) * k * k / (4.0 * gamma_p * mu)
            + chain_term * chain_term / (8.0 * mu * sigma);

        let den = (c1 - k) * (k * sigma / gamma_p - 1.0);
        let t2 = k * k * r * r * ((2.0 * sigma + delta) / (2.0 * gamma_p)) / den
            + k * k * r * (2.0 + 4.0 * big_r * (delta + gamma_u) / sigma) / den
            + k.powi(3) * (big_r * (2.0 + big_r) + sigma / gamma_p + 2.0 * (delta + gamma_u) / gamma_p) / den
            + k * k * (1.0 + big_r) * c1 * big_r / den
            + k * r * r / c1
            + c1 * k * k / (c1 - k);

        Ok(LyapunovCertificate {
            params: *params,
            rho,
            mu,
            eq: ss.state(),
            chain,
            t1,
            t2,
            s1: t1.max(t2),
            r,
        })
    }

    pub fn chain(&self) -> ChainCondition {
        self.chain
    }

    fn theta(&self, s: &OdeState) -> [f64; 4] {
        [
            s.plaques - self.eq.plaques,
            s.oligomer - self.eq.oligomer,
            s.prion - self.eq.prion,
            s.complex - self.eq.complex,
        ]
    }

    // weights shared by phi and its gradient
    fn weights(&self, plaques: f64) -> (f64, f64, f64, f64, f64) {
        let p = &self.params;
        let w1 = (2.0 * p.gamma_p / p.delta) * self.s1;
        let w2 = 1.0 + 2.0 * (p.delta + p.gamma_u + self.rho * plaques) / p.sigma;
        let w3 = 2.0 * p.gamma_p / p.delta;
        let w4 = p.sigma / p.gamma_p;
        let q = self.r + 1.0 + self.rho / p.tau;
        (w1, w2, w3, w4, q)
    }

    pub fn phi(&self, s: &OdeState) -> f64 {
        let [t1, t2, t3, t4] = self.theta(s);
        let (w1, w2, w3, w4, q) = self.weights(self.eq.plaques + t1);
        0.5 * w1 * t1 * t1 + 0.5 * w2 * t2 * t2 + 0.5 * w3 * t3 * t3 + 0.5 * w4 * t4 * t4
            + self.r * t1 * t2
            + t1 * t3
            + t2 * t3
            + q * t1 * t4
            + 2.0 * t2 * t4
            + w3 * t3 * t4
    }

    pub fn gradient(&self, s: &OdeState) -> [f64; 4] {
        let [t1, t2, t3, t4] = self.theta(s);
        let (w1, w2, w3, w4, q) = self.weights(self.eq.plaques + t1);
        let p = &self.params;
        [
            w1 * t1 + (self.rho / p.sigma) * t2 * t2 + self.r * t2 + t3 + q * t4,
            w2 * t2 + self.r * t1 + t3 + 2.0 * t4,
            w3 * t3 + t1 + t2 + w3 * t4,
            w4 * t4 + q * t1 + 2.0 * t2 + w3 * t3,
        ]
    }

    /// The closed-form derivative along solutions.
    pub fn phi_dot(&self, s: &OdeState) -> f64 {
        let [t1, t2, t3, t4] = self.theta(s);
        let p = &self.params;
        let (rho, mu) = (self.rho, self.mu);
        let k = p.delta / (2.0 * p.gamma_p);
        let u_inf = self.eq.oligomer;
        let u = s.oligomer;
        let rho_a = rho * (self.eq.plaques + t1);
        let big_r = rho / p.tau;
        let g = p.gamma_u + rho_a;

        -(mu * self.s1 + rho * u * rho * k * self.eq.prion / (p.gamma_u + rho * self.eq.plaques + mu)) * t1 * t1
            - rho * u_inf * (1.0 + 2.0 * (g + p.delta) / p.sigma) * k * t1 * t2
            - (2.0 * (g + p.tau * s.prion) * (g + p.delta) / p.sigma + g) * k * t2 * t2
            - ((p.delta + mu) * (self.r + 1.0) + (p.sigma + p.delta + mu) * big_r + 2.0 * rho * u_inf) * k * t1 * t4
            - (p.delta * p.tau * u / (2.0 * p.gamma_p) + p.gamma_p) * t3 * t3
            - p.delta * (p.sigma / p.gamma_p * k) * t4 * t4
            - (p.gamma_p + mu) * k * t1 * t3
    }

    fn field(&self, s: &OdeState) -> [f64; 4] {
        let p = &self.params;
        let (a, u, q, b) = (s.plaques, s.oligomer, s.prion, s.complex);
        let bind = p.tau * u * q;
        [
            -self.mu * a,
            p.lambda_u - p.gamma_u * u - bind + p.sigma * b - self.rho * u * a,
            p.lambda_p - p.gamma_p * q - bind + p.sigma * b,
            bind - (p.sigma + p.delta) * b,
        ]
    }

    pub fn phi_dot_chain(&self, s: &OdeState) -> f64 {
        let g = self.gradient(s);
        let f = self.field(s);
        g.iter().zip(f.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn evaluate(&self, s: &OdeState) -> LyapunovValue {
        LyapunovValue { phi: self.phi(s), phi_dot: self.phi_dot(s), phi_dot_chain: self.phi_dot_chain(s) }
    }
}

/// `(phi, phi_dot)` at `state`; refuses when `alpha != 0` or the chain
/// condition fails.
pub fn lyapunov_value(
    state: &OdeState,
    ss: &SteadyStateReport,
    params: &Parameters,
    rates: &RateModel,
) -> Result<(f64, f64)> {
    let cert = LyapunovCertificate::new(ss, params, rates)?;
    Ok((cert.phi(state), cert.phi_dot(state)))
}
