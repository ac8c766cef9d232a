use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Parameters, RateModel};

use super::characteristics::CharacteristicField;
use super::grid::DensitySpec;
use super::mild::MildSolution;
use super::quadrature::Composite;

#[derive(Debug, Clone, PartialEq)]
pub struct PicardSettings {
    /// Equal time intervals on `[0, T]`.
    pub time_steps: usize,
    /// Stop once the sup-norm change of `(u, p, b)` drops below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Upper end of the size integrals.
    pub x_max: f64,
    /// Gauss–Legendre panels for the part of `int rho f` above the front.
    pub panels: usize,
    /// Changes below this are rounding noise and yield no ratio.
    pub noise_floor: f64,
}

impl Default for PicardSettings {
    fn default() -> Self {
        PicardSettings { time_steps: 50, tol: 1e-11, max_iter: 50, x_max: 40.0, panels: 16, noise_floor: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardResult {
    pub times: Vec<f64>,
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub b: Vec<f64>,
    /// `int rho f` at each time, from the last density.
    pub rho_integral: Vec<f64>,
    /// Sup-norm change of each iterate.
    pub changes: Vec<f64>,
    /// `change_k / change_(k-1)` above the noise floor.
    pub ratios: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl PicardResult {
    pub fn max_ratio(&self) -> f64 {
        self.ratios.iter().fold(0.0, |m: f64, &r| m.max(r))
    }

    pub fn last(&self) -> [f64; 3] {
        let k = self.times.len() - 1;
        [self.u[k], self.p[k], self.b[k]]
    }
}

const DIVERGENCE_RUN: usize = 3;

/// Fixed-point iteration of the map `(u, p, b) -> S(u, p, b)` on `[0, T]`.
///
/// Each iterate builds the density for the current `u` from characteristics,
/// then integrates the soluble equations with the trapezoid rule. Starts from
/// the constant trajectory at the initial data.
pub fn picard_solve(
    f_in: &DensitySpec,
    initial: [f64; 3],
    t_end: f64,
    settings: &PicardSettings,
    params: &Parameters,
    rates: &RateModel,
) -> Result<PicardResult> {
    if !(t_end > 0.0) || settings.time_steps == 0 {
        return Err(Error::Argument("Picard iteration needs T > 0 and at least one time step".into()));
    }
    let k = settings.time_steps;
    let h = t_end / k as f64;
    let times: Vec<f64> = (0..=k).map(|i| if i == k { t_end } else { i as f64 * h }).collect();
    let [u0, p0, b0] = initial;
    let (mut u, mut p, mut b) = (vec![u0; k + 1], vec![p0; k + 1], vec![b0; k + 1]);
    let rule_front = Composite::new(8, 4);
    let rule_tail = Composite::new(8, settings.panels.max(1));

    let mut changes = Vec::new();
    let mut ratios = Vec::new();
    let mut rho_integral = vec![0.0; k + 1];
    let mut above_one = 0;
    let mut converged = false;
    let mut iterations = 0;
    let mut field = CharacteristicField::new(times.clone(), u.iter().map(|v| v.max(0.0)).collect(), *rates)?;

    for _ in 0..settings.max_iter {
        iterations += 1;
        let sol = MildSolution::new(&field, f_in, params);
        rho_integral = times
            .par_iter()
            .map(|&t| sol.integral(t, settings.x_max, &rule_front, &rule_tail, |x| rates.rho(x)))
            .collect::<Result<Vec<f64>>>()?;

        let g: Vec<[f64; 3]> = (0..=k)
            .map(|i| {
                let (ui, pi, bi) = (u[i], p[i], b[i]);
                let bind = params.tau * ui * pi;
                [
                    params.lambda_u - params.gamma_u * ui - bind + params.sigma * bi
                        - params.n as f64 * params.nucleation_rate(ui)
                        - ui * rho_integral[i] / params.epsilon,
                    params.lambda_p - params.gamma_p * pi - bind + params.sigma * bi,
                    bind - (params.sigma + params.delta) * bi,
                ]
            })
            .collect();
        let mut next = [vec![u0; k + 1], vec![p0; k + 1], vec![b0; k + 1]];
        for i in 1..=k {
            let dt = times[i] - times[i - 1];
            for c in 0..3 {
                next[c][i] = next[c][i - 1] + 0.5 * dt * (g[i - 1][c] + g[i][c]);
            }
        }
        let mut change = 0.0f64;
        for i in 0..=k {
            change = change.max((next[0][i] - u[i]).abs()).max((next[1][i] - p[i]).abs()).max((next[2][i] - b[i]).abs());
        }
        let [nu, np, nb] = next;
        u = nu;
        p = np;
        b = nb;
        if let Some(&prev) = changes.last() {
            if prev > settings.noise_floor && change > settings.noise_floor {
                let r: f64 = change / prev;
                ratios.push(r);
                above_one = if r >= 1.0 { above_one + 1 } else { 0 };
                if above_one >= DIVERGENCE_RUN {
                    return Err(Error::PicardDivergence { ratios });
                }
            }
        }
        changes.push(change);
        if change < settings.tol {
            converged = true;
            break;
        }
        field.set_trajectory(times.clone(), u.iter().map(|v| v.max(0.0)).collect())?;
    }
    Ok(PicardResult { times, u, p, b, rho_integral, changes, ratios, iterations, converged })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_density_stays_zero() {
        // N = 0 and f_in = 0: the density stays zero, so S only acts on the
        // soluble part and its fixed point is the soluble solution
        let params = Parameters { alpha: 0.0, ..Parameters::unit() };
        let rates = RateModel::constant(1.0, 1.0, 1.0);
        let res = picard_solve(&DensitySpec::Zero, [1.0, 1.0, 1.0], 0.2, &PicardSettings::default(), &params, &rates)
            .unwrap();
        assert!(res.converged);
        assert!(res.rho_integral.iter().all(|&v| v == 0.0));
        assert!(res.max_ratio() < 1.0);
    }

    #[test]
    fn rejects_bad_horizon() {
        let params = Parameters::unit();
        let rates = RateModel::constant(1.0, 1.0, 1.0);
        assert!(picard_solve(&DensitySpec::Zero, [1.0; 3], 0.0, &PicardSettings::default(), &params, &rates).is_err());
    }
}
