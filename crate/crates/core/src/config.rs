//! Flat `key = value` parameter files.
//!
//! One key per line, `#` starts a comment. Recognized keys:
//! `lambda_u gamma_u lambda_p gamma_p tau sigma delta alpha n epsilon x0
//! rate_kind rho0 mu0 rho_c theta`. `epsilon` defaults to 1 and `x0` to
//! `epsilon * n`. `rate_kind` is `constant` (uses `rho0`, `mu0`) or
//! `power_law` (uses `rho_c`, `theta`, `mu0`).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Parameters, RateKind, RateModel};

const KEYS: [&str; 16] = [
    "lambda_u", "gamma_u", "lambda_p", "gamma_p", "tau", "sigma", "delta", "alpha", "n",
    "epsilon", "x0", "rate_kind", "rho0", "mu0", "rho_c", "theta",
];

/// Parameters and rates read from one file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    pub params: Parameters,
    pub rates: RateModel,
}

impl ModelConfig {
    pub fn new(params: Parameters, rates: RateModel) -> Self {
        ModelConfig { params, rates }
    }

    /// All-ones parameters with constant `rho = mu = 1`.
    pub fn unit() -> Self {
        ModelConfig::new(Parameters::unit(), RateModel::constant(1.0, 1.0, 1.0))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        text.parse()
    }

    /// Sets a parameter or rate constant by its config key.
    /// Setting `n` or `epsilon` also resets `x0 = epsilon * n`.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        let kind = match (self.rates.kind(), key) {
            (RateKind::Constant { mu, .. }, "rho0") => RateKind::Constant { rho: value, mu },
            (RateKind::Constant { rho, .. }, "mu0") => RateKind::Constant { rho, mu: value },
            (RateKind::PowerLaw { theta, mu, .. }, "rho_c") => {
                RateKind::PowerLaw { c: value, theta, mu }
            }
            (RateKind::PowerLaw { c, mu, .. }, "theta") => RateKind::PowerLaw { c, theta: value, mu },
            (RateKind::PowerLaw { c, theta, .. }, "mu0") => RateKind::PowerLaw { c, theta, mu: value },
            (_, "rho0" | "rho_c" | "theta") => {
                return Err(Error::InvalidParameters(format!(
                    "`{key}` does not apply to rate model {}",
                    self.rates
                )))
            }
            (kind, _) => {
                self.params.set(key, value)?;
                if key == "n" || key == "epsilon" {
                    self.params.x0 = self.params.epsilon * self.params.n as f64;
                }
                kind
            }
        };
        self.rates = RateModel::new(kind, self.params.x0);
        Ok(())
    }

    /// Value of a parameter or rate constant by its config key.
    pub fn get(&self, key: &str) -> Option<f64> {
        if let Some((_, v)) = self.params.entries().into_iter().find(|(k, _)| *k == key) {
            return Some(v);
        }
        match (self.rates.kind(), key) {
            (RateKind::Constant { rho, .. }, "rho0") => Some(rho),
            (RateKind::Constant { mu, .. }, "mu0") | (RateKind::PowerLaw { mu, .. }, "mu0") => {
                Some(mu)
            }
            (RateKind::PowerLaw { c, .. }, "rho_c") => Some(c),
            (RateKind::PowerLaw { theta, .. }, "theta") => Some(theta),
            _ => None,
        }
    }

    /// Numeric columns (name, value) in a fixed order, used for CSV rows.
    pub fn columns(&self) -> Vec<(&'static str, f64)> {
        let mut cols: Vec<(&'static str, f64)> = self.params.entries().to_vec();
        match self.rates.kind() {
            RateKind::Constant { rho, mu } => {
                cols.push(("rho0", rho));
                cols.push(("mu0", mu));
            }
            RateKind::PowerLaw { c, theta, mu } => {
                cols.push(("rho_c", c));
                cols.push(("theta", theta));
                cols.push(("mu0", mu));
            }
        }
        cols
    }

    /// Serializes back to the file format. Floats use shortest round-trip form.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.params.entries() {
            if k == "n" {
                let _ = writeln!(out, "n = {}", self.params.n);
            } else {
                let _ = writeln!(out, "{k} = {v:?}");
            }
        }
        match self.rates.kind() {
            RateKind::Constant { rho, mu } => {
                let _ = writeln!(out, "rate_kind = constant\nrho0 = {rho:?}\nmu0 = {mu:?}");
            }
            RateKind::PowerLaw { c, theta, mu } => {
                let _ = writeln!(
                    out,
                    "rate_kind = power_law\nrho_c = {c:?}\ntheta = {theta:?}\nmu0 = {mu:?}"
                );
            }
        }
        out
    }
}

impl std::str::FromStr for ModelConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut values: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                line: line_no,
                msg: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            let key = KEYS.iter().copied().find(|k| *k == key).ok_or_else(|| Error::Config {
                line: line_no,
                msg: format!("unknown key `{key}`"),
            })?;
            if values.insert(key, (line_no, value)).is_some() {
                return Err(Error::Config { line: line_no, msg: format!("duplicate key `{key}`") });
            }
        }

        let number = |key: &str| -> Result<Option<f64>> {
            match values.get(key) {
                None => Ok(None),
                Some(&(line, v)) => v.parse::<f64>().map(Some).map_err(|_| Error::Config {
                    line,
                    msg: format!("`{key}` expects a number, got `{v}`"),
                }),
            }
        };
        let required = |key: &str| -> Result<f64> {
            number(key)?.ok_or_else(|| Error::Config { line: 0, msg: format!("missing key `{key}`") })
        };

        let n_value = required("n")?;
        if n_value < 0.0 || n_value.fract() != 0.0 {
            return Err(Error::Config {
                line: values["n"].0,
                msg: format!("`n` expects a nonnegative integer, got `{n_value}`"),
            });
        }
        let n = n_value as u32;
        let epsilon = number("epsilon")?.unwrap_or(1.0);
        let x0 = number("x0")?.unwrap_or(epsilon * n as f64);
        let params = Parameters {
            lambda_u: required("lambda_u")?,
            gamma_u: required("gamma_u")?,
            lambda_p: required("lambda_p")?,
            gamma_p: required("gamma_p")?,
            tau: required("tau")?,
            sigma: required("sigma")?,
            delta: required("delta")?,
            alpha: required("alpha")?,
            n,
            epsilon,
            x0,
        };

        let kind_name = values.get("rate_kind").map(|&(_, v)| v).unwrap_or("constant");
        let unused = |keys: &[&str]| -> Result<()> {
            for k in keys {
                if let Some(&(line, _)) = values.get(k) {
                    return Err(Error::Config {
                        line,
                        msg: format!("`{k}` does not apply to rate_kind = {kind_name}"),
                    });
                }
            }
            Ok(())
        };
        let kind = match kind_name {
            "constant" => {
                unused(&["rho_c", "theta"])?;
                RateKind::Constant { rho: required("rho0")?, mu: required("mu0")? }
            }
            "power_law" => {
                unused(&["rho0"])?;
                RateKind::PowerLaw {
                    c: required("rho_c")?,
                    theta: required("theta")?,
                    mu: required("mu0")?,
                }
            }
            other => {
                return Err(Error::Config {
                    line: values["rate_kind"].0,
                    msg: format!("rate_kind must be `constant` or `power_law`, got `{other}`"),
                })
            }
        };
        Ok(ModelConfig { params, rates: RateModel::new(kind, x0) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const UNIT: &str = "\
# all-ones benchmark
lambda_u = 1
gamma_u = 1
lambda_p = 1
gamma_p = 1
tau = 1
sigma = 1
delta = 1
alpha = 1
n = 1
rate_kind = constant
rho0 = 1
mu0 = 1   # plaque clearance
";

    #[test]
    fn parses_unit_file_with_defaults() {
        let cfg: ModelConfig = UNIT.parse().unwrap();
        assert_eq!(cfg, ModelConfig::unit());
        assert_eq!(cfg.params.epsilon, 1.0);
        assert_eq!(cfg.params.x0, 1.0);
    }

    #[test]
    fn x0_defaults_to_epsilon_n() {
        let text = UNIT.replace("n = 1", "n = 3\nepsilon = 0.5");
        let cfg: ModelConfig = text.parse().unwrap();
        assert_eq!(cfg.params.x0, 1.5);
        assert_eq!(cfg.rates.x0(), 1.5);
    }

    #[test]
    fn power_law_roundtrip() {
        let text = UNIT
            .replace("rate_kind = constant", "rate_kind = power_law")
            .replace("rho0 = 1", "rho_c = 2.5\ntheta = 0.5");
        let cfg: ModelConfig = text.parse().unwrap();
        assert_eq!(cfg.rates.kind(), RateKind::PowerLaw { c: 2.5, theta: 0.5, mu: 1.0 });
        let back: ModelConfig = cfg.to_config_string().parse().unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = UNIT.replace("tau = 1", "tau 1").parse::<ModelConfig>().unwrap_err();
        assert!(matches!(err, Error::Config { line: 6, .. }));
        let err = UNIT.replace("tau = 1", "tau = x").parse::<ModelConfig>().unwrap_err();
        assert!(matches!(err, Error::Config { line: 6, .. }));
        let err = UNIT.replace("tau = 1", "kappa = 1").parse::<ModelConfig>().unwrap_err();
        assert!(matches!(err, Error::Config { line: 6, .. }));
        let err = UNIT.replace("tau = 1\n", "").parse::<ModelConfig>().unwrap_err();
        assert!(matches!(err, Error::Config { line: 0, .. }));
        let err = UNIT.replace("n = 1", "n = 1.5").parse::<ModelConfig>().unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
    }

    #[test]
    fn set_updates_rates() {
        let mut cfg = ModelConfig::unit();
        cfg.set("rho0", 2.0).unwrap();
        cfg.set("tau", 0.3).unwrap();
        assert_eq!(cfg.get("rho0"), Some(2.0));
        assert_eq!(cfg.get("tau"), Some(0.3));
        assert!(cfg.set("theta", 0.5).is_err());
        assert_eq!(cfg.get("theta"), None);
    }
}
