use crate::error::{Error, Result};
use crate::model::RateModel;
use crate::rk::{self, Flow, StepControl};

/// A sampled oligomer trajectory `u(t)` together with the transport speed
/// `a(t, x) = u(t) rho(x)` it induces.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicField {
    times: Vec<f64>,
    u: Vec<f64>,
    rates: RateModel,
    a_bound: f64,
    b_bound: f64,
    pub control: StepControl,
}

const SPAN_SLACK: f64 = 1e-12;

impl CharacteristicField {
    /// `u` is interpolated linearly between the sample `times`.
    pub fn new(times: Vec<f64>, u: Vec<f64>, rates: RateModel) -> Result<Self> {
        if times.is_empty() || times.len() != u.len() {
            return Err(Error::Argument("u trajectory needs matching, nonempty time and value samples".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Argument("u trajectory times must increase".into()));
        }
        if let Some(v) = u.iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::NegativeInput { what: "u trajectory", value: *v });
        }
        let mut field = CharacteristicField {
            times,
            u,
            rates,
            a_bound: 0.0,
            b_bound: 0.0,
            control: StepControl::with_tolerances(1e-12, 1e-14),
        };
        field.refresh_bounds();
        Ok(field)
    }

    /// `u` held at `u0` on `[t_lo, t_hi]`.
    pub fn constant(u0: f64, t_lo: f64, t_hi: f64, rates: RateModel) -> Result<Self> {
        Self::new(vec![t_lo, t_hi], vec![u0, u0], rates)
    }

    /// Replaces the sampled trajectory and recomputes the bounds.
    pub fn set_trajectory(&mut self, times: Vec<f64>, u: Vec<f64>) -> Result<()> {
        let control = self.control;
        *self = Self::new(times, u, self.rates)?;
        self.control = control;
        Ok(())
    }

    fn refresh_bounds(&mut self) {
        let sup = self.u_sup();
        let rp = self.rates.rho_prime_sup();
        self.a_bound = (self.rates.linear_bound() * sup).max(sup * rp);
        self.b_bound = sup * rp;
    }

    pub fn rates(&self) -> &RateModel {
        &self.rates
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn samples(&self) -> &[f64] {
        &self.u
    }

    pub fn span(&self) -> (f64, f64) {
        (self.times[0], self.times[self.times.len() - 1])
    }

    pub fn u_sup(&self) -> f64 {
        self.u.iter().fold(0.0f64, |m, &v| m.max(v))
    }

    /// `A = max(C |u|_inf, |u|_inf sup|rho'|)`, so `a(t, x) <= A x`.
    pub fn a_bound(&self) -> f64 {
        self.a_bound
    }

    /// `B = |u|_inf sup|rho'|`, a bound on `|u rho'|`.
    pub fn b_bound(&self) -> f64 {
        self.b_bound
    }

    fn check_span(&self, t: f64) -> Result<()> {
        let (lo, hi) = self.span();
        let slack = SPAN_SLACK * (1.0 + hi.abs().max(lo.abs()));
        if t < lo - slack || t > hi + slack {
            return Err(Error::OutsideSpan { t, lo, hi });
        }
        Ok(())
    }

    pub fn u_at(&self, t: f64) -> Result<f64> {
        self.check_span(t)?;
        Ok(self.u_clamped(t))
    }

    fn u_clamped(&self, t: f64) -> f64 {
        let ts = &self.times;
        if ts.len() == 1 || t <= ts[0] {
            return self.u[0];
        }
        let last = ts.len() - 1;
        if t >= ts[last] {
            return self.u[last];
        }
        let i = ts.partition_point(|&v| v <= t).clamp(1, last);
        let w = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
        self.u[i - 1] + w * (self.u[i] - self.u[i - 1])
    }

    /// Sample times strictly between `from` and `to`, in travel order.
    fn knots_between(&self, from: f64, to: f64) -> Vec<f64> {
        let (lo, hi) = if from < to { (from, to) } else { (to, from) };
        let mut k: Vec<f64> = self.times.iter().copied().filter(|&v| v > lo && v < hi).collect();
        if from > to {
            k.reverse();
        }
        k
    }
}

/// `X(s; x, t)` and the quantities accumulated along the way.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicPoint {
    /// `X(s; x, t)`, or `x0` when the curve started on the boundary after `s`.
    pub position: f64,
    /// Time the curve reached `position`: `s`, or the entry time `s0`.
    pub time: f64,
    /// `ln J(time; x, t) = int_time^t c`, with `c = -u rho'`.
    pub log_jacobian: f64,
    /// `int_time^t mu(X)` (negative for forward tracing).
    pub mu_integral: f64,
    /// `Some(s0)` when tracing backward met `x0` at `s0 > s`.
    pub entry_time: Option<f64>,
}

impl CharacteristicPoint {
    pub fn jacobian(&self) -> f64 {
        self.log_jacobian.exp()
    }
}

/// Solves `dX/ds = u(s) rho(X)`, `X(t) = x`, up to time `s`.
///
/// Tracing backward stops at the entry time `s0` where the curve leaves
/// through `x0`; the crossing is located by bisecting the last step.
pub fn trace_characteristic(x: f64, t: f64, s: f64, field: &CharacteristicField) -> Result<CharacteristicPoint> {
    let rates = *field.rates();
    let x0 = rates.x0();
    if !(x >= x0) {
        return Err(Error::Argument(format!("characteristic start {x} lies below x0 = {x0}")));
    }
    field.check_span(t)?;
    field.check_span(s)?;
    let mut point = CharacteristicPoint { position: x, time: t, log_jacobian: 0.0, mu_integral: 0.0, entry_time: None };
    if s == t {
        return Ok(point);
    }
    let backward = s < t;
    if backward && x == x0 && field.u_clamped(t) * rates.rho(x0) > 0.0 {
        point.entry_time = Some(t);
        return Ok(point);
    }

    // y = [X, ln J, int_s^t mu]
    let rhs = |sig: f64, y: &[f64; 3]| -> [f64; 3] {
        let u = field.u_clamped(sig);
        let xs = y[0].max(f64::MIN_POSITIVE);
        [u * rates.rho(xs), u * rates.rho_prime(xs), -rates.mu(xs)]
    };
    let mut rhs_step = rhs;
    let knots = field.knots_between(t, s);
    let mut prev = (t, [x, 0.0, 0.0]);
    let mut last = prev;
    let mut entry: Option<(f64, [f64; 3])> = None;
    rk::integrate(rhs, t, [x, 0.0, 0.0], s, &knots, &field.control, |sig, y, _| {
        if backward && y[0] < x0 {
            // bisect the step from `prev` for X = x0
            let (s_prev, y_prev) = prev;
            let k1 = rhs_step(s_prev, &y_prev);
            let (mut lo, mut hi) = (0.0, sig - s_prev);
            let mut hit = (s_prev, y_prev);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                let trial = rk::dopri_step(&mut rhs_step, s_prev, &y_prev, &k1, mid);
                if trial.y[0] < x0 {
                    hi = mid;
                } else {
                    lo = mid;
                    hit = (s_prev + mid, trial.y);
                }
            }
            entry = Some(hit);
            return Ok(Flow::Stop);
        }
        prev = (sig, *y);
        last = (sig, *y);
        Ok(Flow::Continue)
    })?;

    let (time, y) = match entry {
        Some((s0, mut y)) => {
            y[0] = x0;
            point.entry_time = Some(s0);
            (s0, y)
        }
        None => last,
    };
    point.position = y[0];
    point.time = time;
    point.log_jacobian = y[1];
    point.mu_integral = y[2];
    Ok(point)
}

/// Position of the curve that leaves `x0` at time `t_start`, at time `t`.
pub fn boundary_front(t_start: f64, t: f64, field: &CharacteristicField) -> Result<f64> {
    Ok(trace_characteristic(field.rates().x0(), t_start, t, field)?.position)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn closed_form_cases() {
        let lin = CharacteristicField::constant(1.0, 0.0, 5.0, RateModel::constant(1.0, 0.0, 1.0)).unwrap();
        let p = trace_characteristic(2.0, 0.0, 3.0, &lin).unwrap();
        assert!(rel(p.position, 5.0) < 1e-12);
        assert_eq!(p.log_jacobian, 0.0);

        let exp = CharacteristicField::constant(1.0, 0.0, 5.0, RateModel::power_law(1.0, 1.0, 0.0, 1.0)).unwrap();
        let p = trace_characteristic(2.0, 0.0, 2f64.ln(), &exp).unwrap();
        assert!(rel(p.position, 4.0) < 1e-12);
        // J(s; x, t) = dX(s)/dx = e^(s - t)
        assert!((p.log_jacobian - 2f64.ln()).abs() < 1e-12);

        let sqrt = CharacteristicField::constant(2.0, 0.0, 5.0, RateModel::power_law(1.0, 0.5, 0.0, 1.0)).unwrap();
        let p = trace_characteristic(1.0, 0.0, 1.0, &sqrt).unwrap();
        assert!(rel(p.position, 4.0) < 1e-12);
    }

    #[test]
    fn backward_tracing_finds_entry_time() {
        let rates = RateModel::constant(1.0, 0.5, 1.0);
        let f = CharacteristicField::constant(2.0, 0.0, 3.0, rates).unwrap();
        // X(s; 3, 2) = 3 + 2 (s - 2) reaches 1 at s0 = 1
        let p = trace_characteristic(3.0, 2.0, 0.0, &f).unwrap();
        let s0 = p.entry_time.unwrap();
        assert!((s0 - 1.0).abs() < 1e-12);
        assert_eq!(p.position, 1.0);
        assert!((p.mu_integral - 0.5).abs() < 1e-10);
        let p = trace_characteristic(6.0, 2.0, 0.0, &f).unwrap();
        assert!(p.entry_time.is_none());
        assert!((p.position - 2.0).abs() < 1e-12);
        assert!((p.mu_integral - 1.0).abs() < 1e-10);
    }

    #[test]
    fn piecewise_u_and_span() {
        let rates = RateModel::constant(1.0, 0.0, 1.0);
        let f = CharacteristicField::new(vec![0.0, 1.0, 2.0], vec![0.0, 2.0, 0.0], rates).unwrap();
        assert_eq!(f.u_at(0.5).unwrap(), 1.0);
        assert!(f.u_at(2.5).is_err());
        // int_0^2 u = 2
        let p = trace_characteristic(1.0, 0.0, 2.0, &f).unwrap();
        assert!((p.position - 3.0).abs() < 1e-12);
        assert!(trace_characteristic(1.0, 0.0, 3.0, &f).is_err());
        assert!(trace_characteristic(0.5, 0.0, 1.0, &f).is_err());
        assert_eq!(f.a_bound(), 2.0);
        assert_eq!(f.b_bound(), 0.0);
    }
}
