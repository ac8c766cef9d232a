#![allow(dead_code)]

use abeta_prion::{OdeState, Parameters, RateModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn log_uniform(r: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (r.random_range(lo.ln()..hi.ln())).exp()
}

/// Every rate log-uniform in [0.1, 10], n in {1, 2, 3}, epsilon = 1.
pub fn draw(r: &mut impl Rng) -> (Parameters, RateModel) {
    let mut v = || log_uniform(r, 0.1, 10.0);
    let (lambda_u, gamma_u, lambda_p, gamma_p, tau, sigma, delta, alpha, rho, mu) =
        (v(), v(), v(), v(), v(), v(), v(), v(), v(), v());
    let n = r.random_range(1..=3u32);
    let params = Parameters {
        lambda_u,
        gamma_u,
        lambda_p,
        gamma_p,
        tau,
        sigma,
        delta,
        alpha,
        n,
        epsilon: 1.0,
        x0: n as f64,
    };
    (params, RateModel::constant(rho, mu, n as f64))
}

pub fn draws(seed: u64, count: usize) -> Vec<(Parameters, RateModel)> {
    let mut r = rng(seed);
    (0..count).map(|_| draw(&mut r)).collect()
}

/// `u_inf` by bisection on the oligomer equation after eliminating
/// `A = N(u)/mu`, `b = tau u p/(sigma + delta)` and
/// `p = lambda_p/(gamma_p + tau* u)`. The reduced function is decreasing.
pub fn oracle_u_inf(p: &Parameters, rho: f64, mu: f64) -> f64 {
    let ts = p.tau * p.delta / (p.sigma + p.delta);
    let g = |u: f64| {
        let nuc = p.alpha * u.powi(p.n as i32);
        p.lambda_u - p.gamma_u * u - ts * u * p.lambda_p / (p.gamma_p + ts * u) - p.n as f64 * nuc - rho * u * nuc / mu
    };
    let (mut lo, mut hi) = (0.0, p.lambda_u / p.gamma_u);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The full oracle equilibrium `(A, u, p, b)`.
pub fn oracle_state(p: &Parameters, rho: f64, mu: f64) -> [f64; 4] {
    let u = oracle_u_inf(p, rho, mu);
    let ts = p.tau * p.delta / (p.sigma + p.delta);
    let pr = p.lambda_p / (p.gamma_p + ts * u);
    [p.alpha * u.powi(p.n as i32) / mu, u, pr, p.tau * u * pr / (p.sigma + p.delta)]
}

/// Point scaled componentwise by factors in `[1 - frac, 1 + frac]`.
pub fn perturb(s: &OdeState, frac: f64, r: &mut impl Rng) -> OdeState {
    let mut f = || 1.0 + r.random_range(-frac..=frac);
    OdeState::new(s.plaques * f(), s.oligomer * f(), s.prion * f(), s.complex * f(), s.mass * f())
}

/// Chain-condition parameters with alpha = 0.
pub fn chain_params() -> Parameters {
    Parameters { gamma_p: 0.5, sigma: 2.0, delta: 2.0, alpha: 0.0, ..Parameters::unit() }
}
