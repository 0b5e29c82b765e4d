//! Input signals: constant, zero-order-hold, and sinusoidal forcing.
//!
//! Every signal is defined for all t >= 0; hold-type signals extend their
//! last segment indefinitely.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputSignal {
    Constant(Vec<f64>),
    /// Value `values[k]` holds on `[breakpoints[k], breakpoints[k+1])`;
    /// the first breakpoint must be 0 and the last segment extends.
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        values: Vec<Vec<f64>>,
    },
    /// Per channel: `offset_i + amplitude_i * sin(omega_i * t)`.
    Sinusoid {
        offset: Vec<f64>,
        amplitude: Vec<f64>,
        omega: Vec<f64>,
    },
    /// Zero-order hold over a sample grid.
    Tabulated {
        times: Vec<f64>,
        values: Vec<Vec<f64>>,
    },
}

impl InputSignal {
    pub fn constant_scalar(v: f64) -> Self {
        InputSignal::Constant(vec![v])
    }

    pub fn channels(&self) -> usize {
        match self {
            InputSignal::Constant(v) => v.len(),
            InputSignal::PiecewiseConstant { values, .. }
            | InputSignal::Tabulated { values, .. } => values.first().map_or(0, |v| v.len()),
            InputSignal::Sinusoid { offset, .. } => offset.len(),
        }
    }

    pub fn validate(&self, m: usize, lo: &[f64], hi: &[f64]) -> Result<()> {
        if self.channels() != m {
            return Err(Error::DimensionMismatch(format!(
                "input signal has {} channels, model has {m} inputs",
                self.channels()
            )));
        }
        let in_box = |v: &[f64]| -> bool {
            v.iter()
                .enumerate()
                .all(|(i, &vi)| vi >= lo[i] - 1e-12 && vi <= hi[i] + 1e-12)
        };
        match self {
            InputSignal::Constant(v) => {
                if !in_box(v) {
                    return Err(Error::OutsideDomain(format!(
                        "constant input {v:?} outside the input box"
                    )));
                }
            }
            InputSignal::PiecewiseConstant {
                breakpoints,
                values,
            }
            | InputSignal::Tabulated {
                times: breakpoints,
                values,
            } => {
                if breakpoints.len() != values.len() || breakpoints.is_empty() {
                    return Err(Error::DimensionMismatch(
                        "hold signal needs one value per breakpoint".into(),
                    ));
                }
                if breakpoints[0] != 0.0 {
                    return Err(Error::InvalidModel(
                        "hold signal must start at t = 0".into(),
                    ));
                }
                if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidModel(
                        "hold signal breakpoints must be strictly increasing".into(),
                    ));
                }
                for v in values {
                    if v.len() != m || !in_box(v) {
                        return Err(Error::OutsideDomain(format!(
                            "hold value {v:?} outside the input box"
                        )));
                    }
                }
            }
            InputSignal::Sinusoid {
                offset,
                amplitude,
                omega,
            } => {
                if offset.len() != m || amplitude.len() != m || omega.len() != m {
                    return Err(Error::DimensionMismatch(
                        "sinusoid channels must all have length m".into(),
                    ));
                }
                for i in 0..m {
                    let (a, b) = (
                        offset[i] - amplitude[i].abs(),
                        offset[i] + amplitude[i].abs(),
                    );
                    if a < lo[i] - 1e-12 || b > hi[i] + 1e-12 {
                        return Err(Error::OutsideDomain(format!(
                            "sinusoid range [{a}, {b}] on channel {i} outside the input box"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn hold_index(times: &[f64], t: f64) -> usize {
        match times.binary_search_by(|bk| bk.partial_cmp(&t).unwrap()) {
            Ok(k) => k,
            Err(0) => 0,
            Err(k) => k - 1,
        }
    }

    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        match self {
            InputSignal::Constant(v) => out.copy_from_slice(v),
            InputSignal::PiecewiseConstant {
                breakpoints,
                values,
            }
            | InputSignal::Tabulated {
                times: breakpoints,
                values,
            } => {
                out.copy_from_slice(&values[Self::hold_index(breakpoints, t)]);
            }
            InputSignal::Sinusoid {
                offset,
                amplitude,
                omega,
            } => {
                for i in 0..out.len() {
                    out[i] = offset[i] + amplitude[i] * (omega[i] * t).sin();
                }
            }
        }
    }

    pub fn value_at(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.channels()];
        self.eval_into(t, &mut out);
        out
    }

    /// True when the signal is constant between its breakpoints.
    pub fn is_hold(&self) -> bool {
        !matches!(self, InputSignal::Sinusoid { .. })
    }

    /// Breakpoints strictly inside `(t0, t1)`, for integrator step alignment.
    pub fn breakpoints_in(&self, t0: f64, t1: f64) -> Vec<f64> {
        match self {
            InputSignal::PiecewiseConstant { breakpoints, .. }
            | InputSignal::Tabulated {
                times: breakpoints, ..
            } => breakpoints
                .iter()
                .copied()
                .filter(|&b| b > t0 && b < t1)
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Exact per-channel infimum and supremum of the signal over `[t0, t1]`.
    pub fn bounds(&self, t0: f64, t1: f64) -> (Vec<f64>, Vec<f64>) {
        match self {
            InputSignal::Constant(v) => (v.clone(), v.clone()),
            InputSignal::PiecewiseConstant {
                breakpoints,
                values,
            }
            | InputSignal::Tabulated {
                times: breakpoints,
                values,
            } => {
                let m = values[0].len();
                let mut lo = vec![f64::INFINITY; m];
                let mut hi = vec![f64::NEG_INFINITY; m];
                let first = Self::hold_index(breakpoints, t0);
                for (k, v) in values.iter().enumerate().skip(first) {
                    if breakpoints[k] > t1 {
                        break;
                    }
                    for i in 0..m {
                        lo[i] = lo[i].min(v[i]);
                        hi[i] = hi[i].max(v[i]);
                    }
                }
                (lo, hi)
            }
            InputSignal::Sinusoid {
                offset,
                amplitude,
                omega,
            } => {
                let m = offset.len();
                let mut lo = vec![0.0; m];
                let mut hi = vec![0.0; m];
                for i in 0..m {
                    let (a, w) = (amplitude[i], omega[i]);
                    let f = |t: f64| offset[i] + a * (w * t).sin();
                    let mut min = f(t0).min(f(t1));
                    let mut max = f(t0).max(f(t1));
                    if w.abs() > 0.0 {
                        // Critical points of sin(w t): w t = pi/2 + k pi.
                        let half_pi = std::f64::consts::FRAC_PI_2;
                        let k0 = ((w * t0 - half_pi) / std::f64::consts::PI).ceil() as i64;
                        let k1 = ((w * t1 - half_pi) / std::f64::consts::PI).floor() as i64;
                        for k in k0..=k1 {
                            let t = (half_pi + k as f64 * std::f64::consts::PI) / w;
                            let v = f(t);
                            min = min.min(v);
                            max = max.max(v);
                        }
                    }
                    lo[i] = min;
                    hi[i] = max;
                }
                (lo, hi)
            }
        }
    }

    /// Time-shifted signal `u'(t) = u(t + t0)`. Supported for hold-type
    /// signals; sinusoids carry no phase and cannot be shifted.
    pub fn shift(&self, t0: f64) -> Result<InputSignal> {
        match self {
            InputSignal::Constant(v) => Ok(InputSignal::Constant(v.clone())),
            InputSignal::PiecewiseConstant {
                breakpoints,
                values,
            } => {
                let (b, v) = shift_hold(breakpoints, values, t0);
                Ok(InputSignal::PiecewiseConstant {
                    breakpoints: b,
                    values: v,
                })
            }
            InputSignal::Tabulated { times, values } => {
                let (b, v) = shift_hold(times, values, t0);
                Ok(InputSignal::Tabulated {
                    times: b,
                    values: v,
                })
            }
            InputSignal::Sinusoid { .. } => Err(Error::Precondition(
                "sinusoid signals cannot be time-shifted".into(),
            )),
        }
    }
}

fn shift_hold(breaks: &[f64], values: &[Vec<f64>], t0: f64) -> (Vec<f64>, Vec<Vec<f64>>) {
    let k0 = InputSignal::hold_index(breaks, t0);
    let mut b = vec![0.0];
    let mut v = vec![values[k0].clone()];
    for k in (k0 + 1)..breaks.len() {
        b.push(breaks[k] - t0);
        v.push(values[k].clone());
    }
    (b, v)
}
