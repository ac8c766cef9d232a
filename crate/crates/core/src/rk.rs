//! Dormand–Prince 5(4) embedded explicit Runge–Kutta pair.
//!
//! Works on fixed-size state arrays and supports integration in either
//! time direction. The driver hits a list of output times exactly and hands
//! every accepted state to an observer, which may modify it (projection,
//! clamping) or stop the run.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// 5th-order weights minus 4th-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Nominal order of the propagated solution.
pub const ORDER: u32 = 5;

/// Step-size control settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step magnitude; picked from the problem scale when `None`.
    pub h_init: Option<f64>,
    /// Steps shorter than this abort the run.
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            rtol: 1e-8,
            atol: 1e-10,
            h_init: None,
            h_min: 1e-12,
            h_max: f64::INFINITY,
            max_steps: 10_000_000,
        }
    }
}

impl StepControl {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        StepControl { rtol, atol, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
    /// Largest scaled error norm among accepted steps.
    pub max_error_norm: f64,
}

/// What the observer wants after an accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

/// One trial step: the 5th-order solution and the embedded error estimate.
pub struct Trial<const N: usize> {
    pub y: [f64; N],
    pub err: [f64; N],
    /// Derivative at the end point (first-same-as-last).
    pub f_end: [f64; N],
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

/// A single Dormand–Prince step of signed length `h` from `(t, y)` with
/// `k1 = f(t, y)` already evaluated.
pub fn dopri_step<const N: usize, F>(rhs: &mut F, t: f64, y: &[f64; N], k1: &[f64; N], h: f64) -> Trial<N>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let k2 = rhs(t + C2 * h, &axpy(y, h, &[(A21, k1)]));
    let k3 = rhs(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = rhs(t + C4 * h, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = rhs(
        t + C5 * h,
        &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    );
    let k6 = rhs(
        t + h,
        &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    );
    let y_new = axpy(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = rhs(t + h, &y_new);
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    Trial { y: y_new, err, f_end: k7 }
}

/// RMS of `err_i / (atol + rtol * max(|y_i|, |y_new_i|))`.
pub fn error_norm<const N: usize>(err: &[f64; N], y: &[f64; N], y_new: &[f64; N], ctl: &StepControl) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let scale = ctl.atol + ctl.rtol * y[i].abs().max(y_new[i].abs());
        let r = err[i] / scale;
        acc += r * r;
    }
    (acc / N as f64).sqrt()
}

fn initial_step<const N: usize>(y: &[f64; N], f: &[f64; N], span: f64, ctl: &StepControl) -> f64 {
    let mut d0: f64 = 0.0;
    let mut d1: f64 = 0.0;
    for i in 0..N {
        let scale = ctl.atol + ctl.rtol * y[i].abs();
        d0 = d0.max((y[i] / scale).abs());
        d1 = d1.max((f[i] / scale).abs());
    }
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(span.abs()).min(ctl.h_max).max(ctl.h_min)
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t_end` (either direction).
///
/// `stops` are times strictly between `t0` and `t_end`, ordered in the
/// direction of integration; the integrator lands on each of them exactly.
/// `observer(t, y, at_stop)` runs after every accepted step, including the
/// final one at `t_end`.
pub fn integrate<const N: usize, F, O>(
    mut rhs: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    stops: &[f64],
    ctl: &StepControl,
    mut observer: O,
) -> Result<StepStats>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    O: FnMut(f64, &mut [f64; N], bool) -> Result<Flow>,
{
    let mut stats = StepStats::default();
    if t_end == t0 {
        return Ok(stats);
    }
    let dir = (t_end - t0).signum();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y);
    stats.rhs_evals += 1;
    let mut h = ctl
        .h_init
        .unwrap_or_else(|| initial_step(&y, &k1, t_end - t0, ctl))
        .abs();
    let mut targets = stops
        .iter()
        .copied()
        .filter(|s| (s - t0) * dir > 0.0 && (t_end - s) * dir > 0.0)
        .chain(std::iter::once(t_end));
    let mut target = targets.next().expect("t_end is always a target");

    loop {
        if stats.accepted + stats.rejected >= ctl.max_steps {
            return Err(Error::TooManySteps(ctl.max_steps));
        }
        let remaining = (target - t) * dir;
        let hits_target = h >= remaining * (1.0 - 1e-12);
        let h_try = if hits_target { remaining } else { h };
        let trial = dopri_step(&mut rhs, t, &y, &k1, dir * h_try);
        stats.rhs_evals += 6;
        let err = error_norm(&trial.err, &y, &trial.y, ctl);
        if err <= 1.0 {
            stats.accepted += 1;
            stats.max_error_norm = stats.max_error_norm.max(err);
            t = if hits_target { target } else { t + dir * h_try };
            y = trial.y;
            k1 = trial.f_end;
            let before = y;
            let flow = observer(t, &mut y, hits_target)?;
            if y != before {
                k1 = rhs(t, &y);
                stats.rhs_evals += 1;
            }
            if flow == Flow::Stop {
                return Ok(stats);
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if hits_target {
                if target == t_end {
                    return Ok(stats);
                }
                target = targets.next().expect("t_end is always a target");
                // keep the pre-stop step size unless it was only shortened
                h = (h.max(h_try) * factor).min(ctl.h_max);
            } else {
                h = (h_try * factor).min(ctl.h_max);
            }
        } else {
            stats.rejected += 1;
            let factor = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.5) } else { 0.1 };
            h = h_try * factor;
            if h < ctl.h_min {
                return Err(Error::StepSizeUnderflow { t, h });
            }
        }
    }
}

/// Fixed-step Dormand–Prince integration with `steps` equal steps.
pub fn integrate_fixed<const N: usize, F>(mut rhs: F, t0: f64, y0: [f64; N], t_end: f64, steps: usize) -> [f64; N]
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let h = (t_end - t0) / steps as f64;
    let mut y = y0;
    let mut k1 = rhs(t0, &y);
    for i in 0..steps {
        let t = t0 + i as f64 * h;
        let trial = dopri_step(&mut rhs, t, &y, &k1, h);
        y = trial.y;
        k1 = trial.f_end;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_to_tolerance() {
        let ctl = StepControl::with_tolerances(1e-10, 1e-12);
        let mut last = [0.0];
        integrate(|_, y: &[f64; 1]| [-y[0]], 0.0, [1.0], 5.0, &[], &ctl, |_, y, _| {
            last = *y;
            Ok(Flow::Continue)
        })
        .unwrap();
        assert!((last[0] - (-5.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn backward_integration_and_stops() {
        let ctl = StepControl::with_tolerances(1e-11, 1e-13);
        let mut hits = Vec::new();
        integrate(|_, y: &[f64; 1]| [y[0]], 2.0, [1.0], 0.0, &[1.5, 1.0, 0.5], &ctl, |t, y, stop| {
            if stop {
                hits.push((t, y[0]));
            }
            Ok(Flow::Continue)
        })
        .unwrap();
        let times: Vec<f64> = hits.iter().map(|h| h.0).collect();
        assert_eq!(times, vec![1.5, 1.0, 0.5, 0.0]);
        for (t, v) in hits {
            assert!((v - (t - 2.0f64).exp()).abs() < 1e-10);
        }
    }

    #[test]
    fn observer_can_stop() {
        let ctl = StepControl::default();
        let mut t_stop = 0.0;
        integrate(|_, _: &[f64; 1]| [1.0], 0.0, [0.0], 10.0, &[], &ctl, |t, y, _| {
            t_stop = t;
            Ok(if y[0] > 1.0 { Flow::Stop } else { Flow::Continue })
        })
        .unwrap();
        assert!(t_stop > 1.0 && t_stop < 10.0);
    }

    #[test]
    fn fixed_step_converges_at_fifth_order() {
        let f = |t: f64, y: &[f64; 2]| [y[1], -y[0] + 0.1 * t.cos()];
        let reference = integrate_fixed(f, 0.0, [1.0, 0.0], 4.0, 4096);
        let e1 = (integrate_fixed(f, 0.0, [1.0, 0.0], 4.0, 16)[0] - reference[0]).abs();
        let e2 = (integrate_fixed(f, 0.0, [1.0, 0.0], 4.0, 32)[0] - reference[0]).abs();
        assert!(e1 / e2 > 2f64.powi(4), "ratio {}", e1 / e2);
    }

    #[test]
    fn underflow_is_reported() {
        let ctl = StepControl { h_min: 1e-3, ..StepControl::with_tolerances(1e-14, 1e-14) };
        // finite-time blow-up at t = 1
        let res = integrate(|_, y: &[f64; 1]| [y[0] * y[0]], 0.0, [1.0], 2.0, &[], &ctl, |_, _, _| {
            Ok(Flow::Continue)
        });
        assert!(matches!(res, Err(Error::StepSizeUnderflow { .. }) | Err(Error::TooManySteps(_))));
    }
}
