use crate::error::{Error, Result};
use crate::model::Parameters;

use super::characteristics::{boundary_front, trace_characteristic, CharacteristicField};
use super::grid::DensitySpec;
use super::quadrature::Composite;

/// Density given by characteristics for a prescribed `u` trajectory.
///
/// Points above the front `X(t; x0, 0)` carry transported initial data;
/// points below it were created at the boundary at their entry time.
#[derive(Debug, Clone)]
pub struct MildSolution<'a> {
    pub field: &'a CharacteristicField,
    pub f_in: &'a DensitySpec,
    pub params: &'a Parameters,
}

impl<'a> MildSolution<'a> {
    pub fn new(field: &'a CharacteristicField, f_in: &'a DensitySpec, params: &'a Parameters) -> Self {
        MildSolution { field, f_in, params }
    }

    pub fn density(&self, x: f64, t: f64) -> Result<f64> {
        let (t_lo, _) = self.field.span();
        let rates = self.field.rates();
        let p = trace_characteristic(x, t, t_lo, self.field)?;
        match p.entry_time {
            None => Ok(self.f_in.value(p.position, rates.x0()) * (p.log_jacobian - p.mu_integral).exp()),
            Some(s0) => {
                let u0 = self.field.u_at(s0)?;
                let speed = u0 * rates.rho(rates.x0());
                if !(speed > 0.0) {
                    return Err(Error::SingularInflux { s0 });
                }
                let influx = self.params.nucleation_rate(u0);
                Ok(influx * (p.log_jacobian - p.mu_integral).exp() / speed)
            }
        }
    }

    pub fn front(&self, t: f64) -> Result<f64> {
        boundary_front(self.field.span().0, t, self.field)
    }

    /// `int_{x0}^{x_max} g(x) f(x, t) dx`, split at the front so that each
    /// piece is smooth. `below` covers `[x0, front]`, `above` the rest.
    pub fn integral(
        &self,
        t: f64,
        x_max: f64,
        below: &Composite,
        above: &Composite,
        g: impl Fn(f64) -> f64,
    ) -> Result<f64> {
        let x0 = self.field.rates().x0();
        let front = self.front(t)?.min(x_max);
        let mut total = 0.0;
        for (a, b, rule) in [(x0, front, below), (front, x_max, above)] {
            if b > a {
                for (x, w) in rule.points(a, b) {
                    total += w * g(x) * self.density(x, t)?;
                }
            }
        }
        Ok(total)
    }
}

/// `f(x, t)` from the characteristic formula for the trajectory in `field`,
/// whose span must start at time 0.
pub fn mild_evaluate(
    x: f64,
    t: f64,
    f_in: &DensitySpec,
    field: &CharacteristicField,
    params: &Parameters,
) -> Result<f64> {
    MildSolution::new(field, f_in, params).density(x, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RateModel;

    #[test]
    fn pure_translation() {
        let params = Parameters { alpha: 0.0, ..Parameters::unit() };
        let rates = RateModel::constant(1.5, 0.0, 1.0);
        let field = CharacteristicField::constant(0.8, 0.0, 2.0, rates).unwrap();
        let f_in = DensitySpec::exp_decay(1.0, 0.7);
        let shift = 1.5 * 0.8 * 2.0;
        for x in [3.5, 4.0, 6.0] {
            let got = mild_evaluate(x, 2.0, &f_in, &field, &params).unwrap();
            let want = f_in.value(x - shift, 1.0);
            assert!((got - want).abs() < 1e-10 * want.max(1e-300), "{x}: {got} vs {want}");
        }
        // below the front the boundary supplies nothing
        assert_eq!(mild_evaluate(1.5, 2.0, &f_in, &field, &params).unwrap(), 0.0);
    }

    #[test]
    fn zero_data_zero_density() {
        let params = Parameters { alpha: 0.0, ..Parameters::unit() };
        let rates = RateModel::power_law(1.0, 0.5, 0.3, 1.0);
        let field = CharacteristicField::constant(1.0, 0.0, 1.0, rates).unwrap();
        for x in [1.0, 1.2, 3.0] {
            assert_eq!(mild_evaluate(x, 1.0, &DensitySpec::Zero, &field, &params).unwrap(), 0.0);
        }
    }

    #[test]
    fn boundary_branch_matches_influx() {
        // constant u and rho: f(x, t) = N(u) / (u rho) exp(-mu (x - x0) / (u rho))
        let params = Parameters { alpha: 0.6, ..Parameters::unit() };
        let rates = RateModel::constant(2.0, 0.4, 1.0);
        let field = CharacteristicField::constant(0.5, 0.0, 3.0, rates).unwrap();
        let got = mild_evaluate(2.0, 3.0, &DensitySpec::Zero, &field, &params).unwrap();
        let want = 0.6 * 0.5 / 1.0 * (-0.4 * 1.0f64).exp();
        assert!((got - want).abs() < 1e-10);
    }

    #[test]
    fn exponential_growth_of_mass() {
        // rho(x) = x, u = 1, mu = 0: f(x, t) = f_in(x e^(-t)) e^(-t), so the
        // substitution x = y e^t gives int x f(t) = e^t int y f_in.
        let params = Parameters { alpha: 0.0, ..Parameters::unit() };
        let rates = RateModel::power_law(1.0, 1.0, 0.0, 1.0);
        let field = CharacteristicField::constant(1.0, 0.0, 1.0, rates).unwrap();
        let bump = DensitySpec::table(vec![2.0, 3.0, 4.0], vec![0.0, 1.0, 0.0]).unwrap();
        let sol = MildSolution::new(&field, &bump, &params);
        let t: f64 = 0.5;
        let rule = Composite::new(8, 64);
        let mut got = 0.0;
        let (a, b) = (2.0 * t.exp(), 4.0 * t.exp());
        let mid = 3.0 * t.exp();
        for (lo, hi) in [(a, mid), (mid, b)] {
            got += rule.integrate(lo, hi, |x| x * sol.density(x, t).unwrap());
        }
        let m_in = bump.moment(1.0, 1.0, 10.0, 1.0);
        assert!((m_in - 3.0).abs() < 1e-12);
        assert!((got - t.exp() * m_in).abs() < 1e-9 * got, "{got}");
    }
}
