//! Adaptive explicit Runge-Kutta 4(5) stepping (Dormand-Prince pair).
//!
//! The stepper advances a state between prescribed time nodes; callers align
//! nodes with output grid points and input-signal breakpoints so that the
//! right-hand side is smooth inside every segment.

use crate::error::{Error, Result};

/// Integration options. Tolerances control the embedded error estimate.
#[derive(Debug, Clone)]
pub struct IntegrateOpts {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Number of uniformly spaced output samples (including t = 0).
    pub grid_points: usize,
    /// Slack for the domain-exit diagnostic.
    pub tol_domain: f64,
    pub max_steps: usize,
}

impl Default for IntegrateOpts {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            rel_tol: 1e-7,
            grid_points: 400,
            tol_domain: 1e-6,
            max_steps: 2_000_000,
        }
    }
}

// Dormand-Prince 5(4) coefficients.
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

// 5th-order weights (advancing solution).
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// 4th-order embedded weights.
const BH1: f64 = 5179.0 / 57600.0;
const BH3: f64 = 7571.0 / 16695.0;
const BH4: f64 = 393.0 / 640.0;
const BH5: f64 = -92097.0 / 339200.0;
const BH6: f64 = 187.0 / 2100.0;
const BH7: f64 = 1.0 / 40.0;

const E1: f64 = B1 - BH1;
const E3: f64 = B3 - BH3;
const E4: f64 = B4 - BH4;
const E5: f64 = B5 - BH5;
const E6: f64 = B6 - BH6;
const E7: f64 = -BH7;

/// Reusable stage buffers plus the carried step size.
pub struct Stepper {
    abs_tol: f64,
    rel_tol: f64,
    max_steps: usize,
    steps_taken: usize,
    h: f64,
    /// Largest unscaled local error estimate over accepted steps.
    pub max_step_error: f64,
    k: [Vec<f64>; 7],
    y_tmp: Vec<f64>,
    y_new: Vec<f64>,
}

impl Stepper {
    pub fn new(n: usize, opts: &IntegrateOpts) -> Self {
        Self {
            abs_tol: opts.abs_tol,
            rel_tol: opts.rel_tol,
            max_steps: opts.max_steps,
            steps_taken: 0,
            h: 0.0,
            max_step_error: 0.0,
            k: std::array::from_fn(|_| vec![0.0; n]),
            y_tmp: vec![0.0; n],
            y_new: vec![0.0; n],
        }
    }

    /// Advance `y` from `t0` to `t1` (`t1 >= t0`), adapting the step size.
    /// The right-hand side must be smooth on the segment.
    pub fn advance_to(
        &mut self,
        mut rhs: impl FnMut(f64, &[f64], &mut [f64]),
        t0: f64,
        t1: f64,
        y: &mut [f64],
    ) -> Result<()> {
        let span = t1 - t0;
        if span <= 0.0 {
            return Ok(());
        }
        let n = y.len();
        if self.h <= 0.0 {
            self.h = span * 1e-2;
        }
        self.h = self.h.min(span);
        let h_floor = 1e-13 * t1.abs().max(1.0);

        let mut t = t0;
        rhs(t, y, &mut self.k[0]);
        while t < t1 {
            if self.steps_taken >= self.max_steps {
                return Err(Error::StepSizeUnderflow { t });
            }
            self.steps_taken += 1;
            let h = self.h.min(t1 - t);

            for i in 0..n {
                self.y_tmp[i] = y[i] + h * A21 * self.k[0][i];
            }
            rhs(t + h / 5.0, &self.y_tmp, &mut self.k[1]);

            for i in 0..n {
                self.y_tmp[i] = y[i] + h * (A31 * self.k[0][i] + A32 * self.k[1][i]);
            }
            rhs(t + 3.0 * h / 10.0, &self.y_tmp, &mut self.k[2]);

            for i in 0..n {
                self.y_tmp[i] =
                    y[i] + h * (A41 * self.k[0][i] + A42 * self.k[1][i] + A43 * self.k[2][i]);
            }
            rhs(t + 4.0 * h / 5.0, &self.y_tmp, &mut self.k[3]);

            for i in 0..n {
                self.y_tmp[i] = y[i]
                    + h * (A51 * self.k[0][i]
                        + A52 * self.k[1][i]
                        + A53 * self.k[2][i]
                        + A54 * self.k[3][i]);
            }
            rhs(t + 8.0 * h / 9.0, &self.y_tmp, &mut self.k[4]);

            for i in 0..n {
                self.y_tmp[i] = y[i]
                    + h * (A61 * self.k[0][i]
                        + A62 * self.k[1][i]
                        + A63 * self.k[2][i]
                        + A64 * self.k[3][i]
                        + A65 * self.k[4][i]);
            }
            rhs(t + h, &self.y_tmp, &mut self.k[5]);

            for i in 0..n {
                self.y_new[i] = y[i]
                    + h * (B1 * self.k[0][i]
                        + B3 * self.k[2][i]
                        + B4 * self.k[3][i]
                        + B5 * self.k[4][i]
                        + B6 * self.k[5][i]);
            }
            // FSAL stage.
            rhs(t + h, &self.y_new, &mut self.k[6]);

            let mut err_norm = 0.0;
            let mut err_abs: f64 = 0.0;
            for i in 0..n {
                let e = h
                    * (E1 * self.k[0][i]
                        + E3 * self.k[2][i]
                        + E4 * self.k[3][i]
                        + E5 * self.k[4][i]
                        + E6 * self.k[5][i]
                        + E7 * self.k[6][i]);
                let sc = self.abs_tol + self.rel_tol * y[i].abs().max(self.y_new[i].abs());
                err_norm += (e / sc) * (e / sc);
                err_abs = err_abs.max(e.abs());
            }
            err_norm = (err_norm / n.max(1) as f64).sqrt();
            if !err_norm.is_finite() || self.y_new.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteState { t: t + h });
            }

            if err_norm <= 1.0 {
                t += h;
                y.copy_from_slice(&self.y_new);
                self.k.swap(0, 6); // FSAL: k7 becomes next k1
                self.max_step_error = self.max_step_error.max(err_abs);
            } else if h <= h_floor {
                return Err(Error::StepSizeUnderflow { t });
            }

            let factor = if err_norm == 0.0 {
                5.0
            } else {
                (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
            };
            self.h = (h * factor).max(h_floor);
        }
        Ok(())
    }
}
