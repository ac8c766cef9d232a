//! Model constants, size-dependent rates and the structural hypotheses they
//! must satisfy.

use std::fmt;

use crate::error::{Error, Result};

/// Kinetic constants of the soluble species plus the nucleation constants.
///
/// Rates are in days⁻¹. `x0` is the critical plaque size and equals
/// `epsilon * n` for a consistent set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parameters {
    pub lambda_u: f64,
    pub gamma_u: f64,
    pub lambda_p: f64,
    pub gamma_p: f64,
    pub tau: f64,
    pub sigma: f64,
    pub delta: f64,
    pub alpha: f64,
    pub n: u32,
    pub epsilon: f64,
    pub x0: f64,
}

impl Parameters {
    /// Every rate equal to one, `n = 1`, `epsilon = 1`, `x0 = 1`.
    pub fn unit() -> Self {
        Parameters {
            lambda_u: 1.0,
            gamma_u: 1.0,
            lambda_p: 1.0,
            gamma_p: 1.0,
            tau: 1.0,
            sigma: 1.0,
            delta: 1.0,
            alpha: 1.0,
            n: 1,
            epsilon: 1.0,
            x0: 1.0,
        }
    }

    /// Effective binding rate `tau * delta / (delta + sigma)`.
    pub fn tau_star(&self) -> f64 {
        self.tau * (1.0 - self.sigma / (self.delta + self.sigma))
    }

    /// Total source `lambda_u + lambda_p`.
    pub fn total_source(&self) -> f64 {
        self.lambda_u + self.lambda_p
    }

    /// `N(u) = alpha u^n` for `u >= 0`, without input checks.
    #[inline]
    pub fn nucleation_rate(&self, u: f64) -> f64 {
        self.alpha * u.max(0.0).powi(self.n as i32)
    }

    /// `N'(u) = alpha n u^(n-1)`.
    #[inline]
    pub fn nucleation_slope(&self, u: f64) -> f64 {
        if self.n == 1 {
            self.alpha
        } else {
            self.alpha * self.n as f64 * u.max(0.0).powi(self.n as i32 - 1)
        }
    }

    /// Lipschitz constant of `N` on `[0, bound]`: `alpha n bound^(n-1)`.
    pub fn nucleation_lipschitz(&self, bound: f64) -> f64 {
        self.nucleation_slope(bound)
    }

    /// Parameters as (key, value) pairs in config-file order.
    pub fn entries(&self) -> [(&'static str, f64); 11] {
        [
            ("lambda_u", self.lambda_u),
            ("gamma_u", self.gamma_u),
            ("lambda_p", self.lambda_p),
            ("gamma_p", self.gamma_p),
            ("tau", self.tau),
            ("sigma", self.sigma),
            ("delta", self.delta),
            ("alpha", self.alpha),
            ("n", self.n as f64),
            ("epsilon", self.epsilon),
            ("x0", self.x0),
        ]
    }

    /// Sets a parameter by its config key.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        match key {
            "lambda_u" => self.lambda_u = value,
            "gamma_u" => self.gamma_u = value,
            "lambda_p" => self.lambda_p = value,
            "gamma_p" => self.gamma_p = value,
            "tau" => self.tau = value,
            "sigma" => self.sigma = value,
            "delta" => self.delta = value,
            "alpha" => self.alpha = value,
            "n" => {
                if value < 0.0 || value.fract() != 0.0 {
                    return Err(Error::InvalidParameters(format!(
                        "n must be a nonnegative integer, got {value}"
                    )));
                }
                self.n = value as u32;
            }
            "epsilon" => self.epsilon = value,
            "x0" => self.x0 = value,
            other => {
                return Err(Error::InvalidParameters(format!("unknown parameter `{other}`")))
            }
        }
        Ok(())
    }
}

/// Nucleation rate `N(u) = alpha u^n`.
pub fn nucleation(u: f64, params: &Parameters) -> Result<f64> {
    if u < 0.0 || u.is_nan() {
        return Err(Error::NegativeInput { what: "oligomer concentration", value: u });
    }
    Ok(params.nucleation_rate(u))
}

/// Functional form of the polymerization rate `rho(x)` and degradation
/// rate `mu(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateKind {
    /// `rho(x) = rho`, `mu(x) = mu`.
    Constant { rho: f64, mu: f64 },
    /// `rho(x) = c x^theta`, `mu(x) = mu`.
    PowerLaw { c: f64, theta: f64, mu: f64 },
}

/// Default ratio between the upper end of the validation sample and `x0`.
pub const VALIDATION_SPAN: f64 = 1e4;

/// Size-dependent rates with the precomputed constant `C` of `rho(x) <= C x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateModel {
    kind: RateKind,
    x0: f64,
    x_validation: f64,
    rho_prime_sup: f64,
    linear_bound: f64,
}

impl RateModel {
    pub fn new(kind: RateKind, x0: f64) -> Self {
        Self::with_validation_span(kind, x0, VALIDATION_SPAN)
    }

    /// `span` sets the sample range `[x0, span * x0]` used for `sup |rho'|`
    /// and for the sampled linear-bound check.
    pub fn with_validation_span(kind: RateKind, x0: f64, span: f64) -> Self {
        let x_validation = x0 * span;
        let probe = RateModel {
            kind,
            x0,
            x_validation,
            rho_prime_sup: 0.0,
            linear_bound: 0.0,
        };
        // rho' is monotone for both kinds, so the sup sits at an endpoint.
        let rho_prime_sup = probe
            .rho_prime(x0)
            .abs()
            .max(probe.rho_prime(x_validation).abs());
        let linear_bound = 2.0 * rho_prime_sup + probe.rho(x0) / x0;
        RateModel { rho_prime_sup, linear_bound, ..probe }
    }

    pub fn constant(rho: f64, mu: f64, x0: f64) -> Self {
        Self::new(RateKind::Constant { rho, mu }, x0)
    }

    pub fn power_law(c: f64, theta: f64, mu: f64, x0: f64) -> Self {
        Self::new(RateKind::PowerLaw { c, theta, mu }, x0)
    }

    pub fn kind(&self) -> RateKind {
        self.kind
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, RateKind::Constant { .. })
    }

    /// `(rho, mu)` for constant rates.
    pub fn constants(&self) -> Option<(f64, f64)> {
        match self.kind {
            RateKind::Constant { rho, mu } => Some((rho, mu)),
            RateKind::PowerLaw { .. } => None,
        }
    }

    #[inline]
    pub fn rho(&self, x: f64) -> f64 {
        match self.kind {
            RateKind::Constant { rho, .. } => rho,
            RateKind::PowerLaw { c, theta, .. } => c * x.powf(theta),
        }
    }

    #[inline]
    pub fn rho_prime(&self, x: f64) -> f64 {
        match self.kind {
            RateKind::Constant { .. } => 0.0,
            RateKind::PowerLaw { c, theta, .. } => c * theta * x.powf(theta - 1.0),
        }
    }

    #[inline]
    pub fn mu(&self, _x: f64) -> f64 {
        match self.kind {
            RateKind::Constant { mu, .. } | RateKind::PowerLaw { mu, .. } => mu,
        }
    }

    /// `sup |rho'|` over the validation range.
    pub fn rho_prime_sup(&self) -> f64 {
        self.rho_prime_sup
    }

    /// `C = 2 sup|rho'| + rho(x0)/x0`, so that `rho(x) <= C x` for `x >= x0`.
    pub fn linear_bound(&self) -> f64 {
        self.linear_bound
    }

    pub fn validation_limit(&self) -> f64 {
        self.x_validation
    }
}

impl fmt::Display for RateModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            RateKind::Constant { rho, mu } => write!(f, "constant(rho={rho}, mu={mu})"),
            RateKind::PowerLaw { c, theta, mu } => {
                write!(f, "power_law(c={c}, theta={theta}, mu={mu})")
            }
        }
    }
}

/// Structural hypotheses checked by [`validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    /// Nonnegative rates, `theta` in (0, 1), `rho(x) <= C x`.
    RateRegularity,
    /// `N >= 0`, `N(0) = 0`, `n >= 1`.
    Nucleation,
    /// Strictly positive kinetic constants.
    PositiveKinetics,
    /// `x0 = epsilon n`, consistent between parameters and rates.
    CriticalSize,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Hypothesis::RateRegularity => "H2",
            Hypothesis::Nucleation => "H3",
            Hypothesis::PositiveKinetics => "H4",
            Hypothesis::CriticalSize => "x0",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisCheck {
    pub hypothesis: Hypothesis,
    pub passed: bool,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<HypothesisCheck>,
    pub linear_bound: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, h: Hypothesis) -> &HypothesisCheck {
        self.checks
            .iter()
            .find(|c| c.hypothesis == h)
            .expect("every hypothesis is reported")
    }

    pub fn failures(&self) -> Vec<String> {
        self.checks
            .iter()
            .flat_map(|c| c.failures.iter().map(move |f| format!("{}: {f}", c.hypothesis)))
            .collect()
    }

    /// `Err` listing every failure if any hypothesis fails.
    pub fn into_result(self) -> Result<ValidationReport> {
        if self.passed() {
            Ok(self)
        } else {
            Err(Error::InvalidParameters(self.failures().join("; ")))
        }
    }
}

const LINEAR_BOUND_SAMPLES: usize = 4096;

/// Checks the hypotheses on the parameters and rates and reports every
/// violation. Nothing is repaired.
pub fn validate(params: &Parameters, rates: &RateModel) -> ValidationReport {
    let mut checks = Vec::with_capacity(4);

    let mut rate_failures = Vec::new();
    let (mu, theta) = match rates.kind() {
        RateKind::Constant { rho, mu } => {
            if !(rho >= 0.0) {
                rate_failures.push(format!("rho = {rho} is negative"));
            }
            (mu, None)
        }
        RateKind::PowerLaw { c, theta, mu } => {
            if !(c >= 0.0) {
                rate_failures.push(format!("rho_c = {c} is negative"));
            }
            (mu, Some(theta))
        }
    };
    if !(mu >= 0.0) {
        rate_failures.push(format!("mu = {mu} is negative"));
    }
    if let Some(theta) = theta {
        if !(theta > 0.0 && theta < 1.0) {
            rate_failures.push(format!("theta = {theta} is outside (0, 1)"));
        }
    }
    let c = rates.linear_bound();
    let x0 = rates.x0();
    if x0 > 0.0 {
        // geometric sample of [x0, x_validation]
        let ratio = (rates.validation_limit() / x0).ln();
        let worst = (0..=LINEAR_BOUND_SAMPLES)
            .map(|i| {
                let x = x0 * (ratio * i as f64 / LINEAR_BOUND_SAMPLES as f64).exp();
                rates.rho(x) - c * x
            })
            .fold(f64::NEG_INFINITY, f64::max);
        if worst > 1e-12 * c.max(1.0) * rates.validation_limit() {
            rate_failures.push(format!("rho(x) exceeds C x by {worst:e} (C = {c})"));
        }
    }
    checks.push(HypothesisCheck {
        hypothesis: Hypothesis::RateRegularity,
        passed: rate_failures.is_empty(),
        failures: rate_failures,
    });

    let mut nuc = Vec::new();
    if params.n < 1 {
        nuc.push(format!("n = {} must be at least 1", params.n));
    }
    if !(params.alpha >= 0.0) {
        nuc.push(format!("alpha = {} is negative", params.alpha));
    }
    checks.push(HypothesisCheck {
        hypothesis: Hypothesis::Nucleation,
        passed: nuc.is_empty(),
        failures: nuc,
    });

    let kinetics = [
        ("lambda_u", params.lambda_u),
        ("gamma_u", params.gamma_u),
        ("lambda_p", params.lambda_p),
        ("gamma_p", params.gamma_p),
        ("tau", params.tau),
        ("sigma", params.sigma),
        ("delta", params.delta),
    ];
    let kin: Vec<String> = kinetics
        .iter()
        .filter(|(_, v)| !(*v > 0.0))
        .map(|(k, v)| format!("{k} = {v} must be strictly positive"))
        .collect();
    checks.push(HypothesisCheck {
        hypothesis: Hypothesis::PositiveKinetics,
        passed: kin.is_empty(),
        failures: kin,
    });

    let mut size = Vec::new();
    if !(params.epsilon > 0.0) {
        size.push(format!("epsilon = {} must be positive", params.epsilon));
    }
    let expected = params.epsilon * params.n as f64;
    if (params.x0 - expected).abs() > 1e-12 * expected.abs().max(1.0) {
        size.push(format!("x0 = {} differs from epsilon * n = {expected}", params.x0));
    }
    if (rates.x0() - params.x0).abs() > 1e-12 * params.x0.abs().max(1.0) {
        size.push(format!(
            "rate model built with x0 = {} but parameters use x0 = {}",
            rates.x0(),
            params.x0
        ));
    }
    checks.push(HypothesisCheck {
        hypothesis: Hypothesis::CriticalSize,
        passed: size.is_empty(),
        failures: size,
    });

    ValidationReport { checks, linear_bound: c }
}
