//! Static input/state and input/output characteristics.
//!
//! For each constant input on a grid, the equilibrium is located by settling
//! a trajectory and sharpening the terminal point with Newton iterations on
//! `f(., u) = 0`. Global asymptotic stability is *evidenced* by a finite
//! family of starts, never proven.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::IntegrateOpts;
use crate::linalg;
use crate::model::SystemModel;
use crate::signal::InputSignal;

/// Equilibrium residual bound for Newton-refined points.
pub const TOL_EQ: f64 = 1e-10;
/// Terminal scatter bound for GAS evidence.
pub const TOL_GAS: f64 = 1e-5;
/// Slack for the asymptotic sandwich bounds (interpolation + truncation).
pub const TOL_SAND: f64 = 1e-3;

const NEWTON_MAX_ITERS: usize = 50;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSpec {
    /// Grid points per input dimension.
    pub points_per_dim: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { points_per_dim: 25 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GasSpec {
    pub n_starts: usize,
    pub t_settle: f64,
    pub seed: u64,
}

impl Default for GasSpec {
    fn default() -> Self {
        Self {
            n_starts: 16,
            t_settle: 200.0,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GasEvidence {
    pub n_starts: usize,
    pub max_terminal_dist: f64,
    pub evidenced: bool,
}

/// Tabulated static characteristic: one equilibrium per grid input.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Characteristic {
    pub input_grid: Vec<Vec<f64>>,
    pub states: Vec<Vec<f64>>,
    pub outputs: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub gas: Vec<GasEvidence>,
}

impl Characteristic {
    /// The grid as scalars; requires a single input channel.
    pub fn scalar_grid(&self) -> Result<Vec<f64>> {
        if self.input_grid.iter().any(|u| u.len() != 1) {
            return Err(Error::Precondition(
                "characteristic grid is not scalar".into(),
            ));
        }
        Ok(self.input_grid.iter().map(|u| u[0]).collect())
    }

    fn interp_index(&self, u: f64) -> Result<(usize, f64)> {
        let grid = self.scalar_grid()?;
        let first = grid[0];
        let last = *grid.last().unwrap();
        if last == first {
            if (u - first).abs() > 1e-9 {
                return Err(Error::Precondition(format!(
                    "u = {u} outside the degenerate characteristic grid at {first}"
                )));
            }
            return Ok((0, 0.0));
        }
        if u < first - 1e-9 || u > last + 1e-9 {
            return Err(Error::Precondition(format!(
                "u = {u} outside the characteristic grid [{first}, {last}]"
            )));
        }
        let u = u.clamp(first, last);
        let mut k = grid.partition_point(|&g| g <= u);
        k = k.clamp(1, grid.len() - 1);
        let (a, b) = (grid[k - 1], grid[k]);
        let w = if b > a { (u - a) / (b - a) } else { 0.0 };
        Ok((k - 1, w))
    }

    /// Linear interpolation of the scalar output characteristic.
    pub fn ky_at(&self, u: f64) -> Result<f64> {
        if self.outputs.iter().any(|y| y.len() != 1) {
            return Err(Error::Precondition(
                "output characteristic is not scalar".into(),
            ));
        }
        let (k, w) = self.interp_index(u)?;
        let (a, b) = (
            self.outputs[k][0],
            self.outputs[(k + 1).min(self.outputs.len() - 1)][0],
        );
        Ok(a + w * (b - a))
    }

    /// Linear interpolation of the state characteristic.
    pub fn kx_at(&self, u: f64) -> Result<Vec<f64>> {
        let (k, w) = self.interp_index(u)?;
        let k2 = (k + 1).min(self.states.len() - 1);
        Ok(self.states[k]
            .iter()
            .zip(&self.states[k2])
            .map(|(a, b)| a + w * (b - a))
            .collect())
    }

    /// Largest state jump between neighbouring grid points (continuity proxy).
    pub fn max_adjacent_state_jump(&self) -> f64 {
        self.states
            .windows(2)
            .map(|w| linalg::dist_inf(&w[0], &w[1]))
            .fold(0.0, f64::max)
    }
}

/// Newton iteration on `f(., u) = 0` from `x0`, staying inside the state
/// domain. Returns the refined point and its residual (infinity norm).
pub(crate) fn newton_refine(
    model: &SystemModel,
    x0: &[f64],
    u: &[f64],
    tol: f64,
) -> Result<(Vec<f64>, f64)> {
    let mut x = model.state_domain().clip_inside(x0);
    let mut residual = linalg::norm_inf(&model.field_at(&x, u));
    for _ in 0..NEWTON_MAX_ITERS {
        if residual < tol {
            return Ok((x, residual));
        }
        let (a, _) = model.jacobian_fd(&x, u)?;
        let fx = model.field_at(&x, u);
        let Some(step) = linalg::solve(&a, &fx) else {
            return Err(Error::NewtonNoConvergence {
                iters: NEWTON_MAX_ITERS,
                residual,
            });
        };
        let next: Vec<f64> = x.iter().zip(&step).map(|(xi, s)| xi - s).collect();
        x = model.state_domain().clip_inside(&next);
        residual = linalg::norm_inf(&model.field_at(&x, u));
    }
    if residual < tol {
        Ok((x, residual))
    } else {
        Err(Error::NewtonNoConvergence {
            iters: NEWTON_MAX_ITERS,
            residual,
        })
    }
}

fn box_grid(lo: &[f64], hi: &[f64], per_dim: usize) -> Vec<Vec<f64>> {
    let m = lo.len();
    if m == 0 {
        return vec![];
    }
    let axes: Vec<Vec<f64>> = (0..m)
        .map(|j| linalg::linspace(lo[j], hi[j], per_dim))
        .collect();
    let mut grid: Vec<Vec<f64>> = vec![vec![]];
    for axis in &axes {
        let mut next = Vec::with_capacity(grid.len() * axis.len());
        for point in &grid {
            for &v in axis {
                let mut q = point.clone();
                q.push(v);
                next.push(q);
            }
        }
        grid = next;
    }
    grid
}

/// Tabulate the static I/S and I/O characteristics over an input box grid.
///
/// Fails when Newton cannot reach the residual tolerance, when a refined
/// equilibrium leaves the state domain, or when two distinct equilibria are
/// detected for the same input (no characteristic there).
pub fn compute_characteristic(
    model: &SystemModel,
    grid: &GridSpec,
    gas: &GasSpec,
) -> Result<Characteristic> {
    if model.m() == 0 {
        return Err(Error::Precondition(
            "characteristics need at least one input channel".into(),
        ));
    }
    let (lo, hi) = model.input_box();
    let inputs = box_grid(lo, hi, grid.points_per_dim);
    let opts = IntegrateOpts::default();
    let mut rng = ChaCha8Rng::seed_from_u64(gas.seed);

    let mut states = Vec::with_capacity(inputs.len());
    let mut outputs = Vec::with_capacity(inputs.len());
    let mut residuals = Vec::with_capacity(inputs.len());
    let mut gas_evidence = Vec::with_capacity(inputs.len());

    for u in &inputs {
        let signal = InputSignal::Constant(u.clone());
        let settle = model.integrate(
            model.state_domain().chebyshev_center(),
            &signal,
            gas.t_settle,
            &opts,
        )?;
        let (eq, residual) = newton_refine(model, settle.terminal_state(), u, TOL_EQ)?;
        if !model.state_domain().contains(&eq, opts.tol_domain) {
            return Err(Error::CharacteristicAbsent {
                u: u.clone(),
                msg: "refined equilibrium left the state domain".into(),
            });
        }

        let mut max_dist: f64 = 0.0;
        for _ in 0..gas.n_starts {
            let x0 = model.state_domain().sample_interior(&mut rng)?;
            let traj = model.integrate(&x0, &signal, gas.t_settle, &opts)?;
            let terminal = traj.terminal_state();
            max_dist = max_dist.max(linalg::dist2(terminal, &eq));
            // Distinct-equilibrium detection: refine this terminal too.
            let (other, _) = newton_refine(model, terminal, u, TOL_EQ)?;
            if linalg::dist2(&other, &eq) > 100.0 * TOL_GAS {
                return Err(Error::CharacteristicAbsent {
                    u: u.clone(),
                    msg: format!("two distinct equilibria detected: {eq:?} and {other:?}"),
                });
            }
        }

        gas_evidence.push(GasEvidence {
            n_starts: gas.n_starts,
            max_terminal_dist: max_dist,
            evidenced: max_dist < TOL_GAS,
        });
        outputs.push(model.eval_output(&eq));
        states.push(eq);
        residuals.push(residual);
    }

    Ok(Characteristic {
        input_grid: inputs,
        states,
        outputs,
        residuals,
        gas: gas_evidence,
    })
}

// ---------------------------------------------------------------------------
// Planar GAS verification
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanarGasReport {
    pub n_jacobian_samples: usize,
    /// Largest trace observed (negative when the condition holds).
    pub max_trace: f64,
    /// Smallest determinant observed (positive when the condition holds).
    pub min_det: f64,
    pub trace_det_ok: bool,
    pub n_starts: usize,
    pub max_pairwise_terminal_dist: f64,
    pub converged: bool,
    pub limit_point: Vec<f64>,
    pub equilibrium_residual: f64,
    pub verdict: bool,
}

/// Evidence for a unique globally asymptotically stable equilibrium of a
/// planar system under a constant input: trace/determinant sign sampling
/// (which doubles as the divergence condition excluding periodic orbits)
/// plus a grid sweep of initial conditions.
pub fn verify_planar_gas(
    model: &SystemModel,
    u_bar: &[f64],
    plan: &crate::certify::SamplePlan,
    grid_per_axis: usize,
    t_settle: f64,
) -> Result<PlanarGasReport> {
    if model.n() != 2 {
        return Err(Error::Precondition(
            "planar GAS verification needs n = 2".into(),
        ));
    }
    let mut rng = plan.rng();
    let mut max_trace = f64::NEG_INFINITY;
    let mut min_det = f64::INFINITY;
    for _ in 0..plan.n_points {
        let x = model.state_domain().sample_interior(&mut rng)?;
        let (a, _) = model.jacobian_fd(&x, u_bar)?;
        let trace = a[0][0] + a[1][1];
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        max_trace = max_trace.max(trace);
        min_det = min_det.min(det);
    }
    let trace_det_ok = max_trace < 0.0 && min_det > 0.0;

    if !trace_det_ok {
        return Ok(PlanarGasReport {
            n_jacobian_samples: plan.n_points,
            max_trace,
            min_det,
            trace_det_ok,
            n_starts: 0,
            max_pairwise_terminal_dist: f64::NAN,
            converged: false,
            limit_point: vec![],
            equilibrium_residual: f64::NAN,
            verdict: false,
        });
    }

    // Initial-condition sweep over the bounding box grid, clipped inward.
    let (lo, hi) = model.state_domain().bounding_box();
    let xs = linalg::linspace(lo[0], hi[0], grid_per_axis);
    let ys = linalg::linspace(lo[1], hi[1], grid_per_axis);
    let opts = IntegrateOpts::default();
    let signal = InputSignal::Constant(u_bar.to_vec());
    let mut terminals = Vec::new();
    for &x in &xs {
        for &y in &ys {
            let start = model.state_domain().clip_inside(&[x, y]);
            let traj = model.integrate(&start, &signal, t_settle, &opts)?;
            terminals.push(traj.terminal_state().to_vec());
        }
    }
    let mut max_pairwise: f64 = 0.0;
    for (i, a) in terminals.iter().enumerate() {
        for b in &terminals[i + 1..] {
            max_pairwise = max_pairwise.max(linalg::dist2(a, b));
        }
    }
    let converged = max_pairwise < TOL_GAS;

    let mean: Vec<f64> = (0..2)
        .map(|i| terminals.iter().map(|t| t[i]).sum::<f64>() / terminals.len() as f64)
        .collect();
    let (limit_point, residual) = newton_refine(model, &mean, u_bar, TOL_EQ)?;

    Ok(PlanarGasReport {
        n_jacobian_samples: plan.n_points,
        max_trace,
        min_det,
        trace_det_ok,
        n_starts: terminals.len(),
        max_pairwise_terminal_dist: max_pairwise,
        converged,
        limit_point,
        equilibrium_residual: residual,
        verdict: trace_det_ok && converged && residual < TOL_EQ,
    })
}

// ---------------------------------------------------------------------------
// Asymptotic sandwich bounds
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitBounds {
    pub u_inf: Vec<f64>,
    pub u_sup: Vec<f64>,
    pub y_tail_lo: Vec<f64>,
    pub y_tail_hi: Vec<f64>,
    /// Interpolated characteristic value bounding the tail from below.
    pub ky_lower: f64,
    /// Interpolated characteristic value bounding the tail from above.
    pub ky_upper: f64,
    pub tail_start: f64,
    pub tail_samples: usize,
    pub verdict: bool,
}

/// Check the asymptotic sandwich for a SISO monotone system: the output tail
/// must lie between the characteristic values at the input's tail extrema.
/// For `<=`-ordered outputs the lower bound is `k_y(u_inf)`; for
/// `>=`-ordered outputs the roles of `u_inf` and `u_sup` swap.
pub fn limit_sandwich_check(
    model: &SystemModel,
    characteristic: &Characteristic,
    x0: &[f64],
    u: &InputSignal,
    horizon: f64,
    tail_fraction: f64,
) -> Result<LimitBounds> {
    if model.m() != 1 || model.p() != 1 {
        return Err(Error::Precondition("sandwich bounds are SISO only".into()));
    }
    if !(0.0..=1.0).contains(&tail_fraction) {
        return Err(Error::Precondition(
            "tail fraction must lie in (0, 1]".into(),
        ));
    }
    let opts = IntegrateOpts::default();
    let traj = model.integrate(x0, u, horizon, &opts)?;
    let tail_start = horizon * (1.0 - tail_fraction);
    let tail: Vec<usize> = (0..traj.times.len())
        .filter(|&k| traj.times[k] >= tail_start - 1e-12)
        .collect();
    if tail.len() < 10 {
        return Err(Error::Precondition(format!(
            "tail window has only {} output samples (need 10)",
            tail.len()
        )));
    }
    let (u_inf, u_sup) = u.bounds(tail_start, horizon);
    let mut y_lo = f64::INFINITY;
    let mut y_hi = f64::NEG_INFINITY;
    for &k in &tail {
        y_lo = y_lo.min(traj.outputs[k][0]);
        y_hi = y_hi.max(traj.outputs[k][0]);
    }

    let increasing = model.output_order().sign(0) > 0.0;
    let (ky_lower, ky_upper) = if increasing {
        (
            characteristic.ky_at(u_inf[0])?,
            characteristic.ky_at(u_sup[0])?,
        )
    } else {
        (
            characteristic.ky_at(u_sup[0])?,
            characteristic.ky_at(u_inf[0])?,
        )
    };
    let verdict = ky_lower - TOL_SAND <= y_lo && y_hi <= ky_upper + TOL_SAND;

    Ok(LimitBounds {
        u_inf,
        u_sup,
        y_tail_lo: vec![y_lo],
        y_tail_hi: vec![y_hi],
        ky_lower,
        ky_upper,
        tail_start,
        tail_samples: tail.len(),
        verdict,
    })
}

// ---------------------------------------------------------------------------
// Monotone envelope (bounded reachability)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvelopeReport {
    /// Constant input bracketing the signal from below in the input order.
    pub input_lower: Vec<f64>,
    /// Constant input bracketing the signal from above in the input order.
    pub input_upper: Vec<f64>,
    pub contained: bool,
    pub worst_margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_violation_time: Option<f64>,
    pub terminal_state: Vec<f64>,
    pub terminal_lower: Vec<f64>,
    pub terminal_upper: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kx_lower: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kx_upper: Option<Vec<f64>>,
}

/// Bracket a trajectory between the two constant-input trajectories at the
/// input's order extrema: for monotone systems the flow must stay inside
/// this envelope at every grid time.
pub fn bounded_reachability_check(
    model: &SystemModel,
    characteristic: Option<&Characteristic>,
    x0: &[f64],
    u: &InputSignal,
    horizon: f64,
    tol_traj: f64,
) -> Result<EnvelopeReport> {
    let (num_lo, num_hi) = u.bounds(0.0, horizon);
    let io = model.input_order();
    let mut lower = vec![0.0; model.m()];
    let mut upper = vec![0.0; model.m()];
    for j in 0..model.m() {
        if io.sign(j) > 0.0 {
            lower[j] = num_lo[j];
            upper[j] = num_hi[j];
        } else {
            lower[j] = num_hi[j];
            upper[j] = num_lo[j];
        }
    }

    let opts = IntegrateOpts::default();
    let mid = model.integrate(x0, u, horizon, &opts)?;
    let lo_traj = model.integrate(x0, &InputSignal::Constant(lower.clone()), horizon, &opts)?;
    let hi_traj = model.integrate(x0, &InputSignal::Constant(upper.clone()), horizon, &opts)?;

    let so = model.state_order();
    let mut worst = f64::INFINITY;
    let mut first_violation = None;
    for k in 0..mid.times.len() {
        let above = so.margin(&hi_traj.states[k], &mid.states[k])?;
        let below = so.margin(&mid.states[k], &lo_traj.states[k])?;
        let margin = above.min(below);
        worst = worst.min(margin);
        if margin < -tol_traj && first_violation.is_none() {
            first_violation = Some(mid.times[k]);
        }
    }

    let (kx_lower, kx_upper) = match characteristic {
        Some(c) if model.m() == 1 => (Some(c.kx_at(lower[0])?), Some(c.kx_at(upper[0])?)),
        _ => (None, None),
    };

    Ok(EnvelopeReport {
        input_lower: lower,
        input_upper: upper,
        contained: first_violation.is_none(),
        worst_margin: worst,
        first_violation_time: first_violation,
        terminal_state: mid.terminal_state().to_vec(),
        terminal_lower: lo_traj.terminal_state().to_vec(),
        terminal_upper: hi_traj.terminal_state().to_vec(),
        kx_lower,
        kx_upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::SamplePlan;

    fn linear_toy() -> SystemModel {
        SystemModel::parse(
            r#"{
                "n": 1, "m": 1, "p": 1,
                "f": ["-2*x1 + u1"],
                "h": ["x1"],
                "state_domain": {"G": [[1.0], [-1.0]], "g": [2.0, 2.0]},
                "input_domain": {"lo": [0.0], "hi": [2.0]},
                "orders": {"state": [0], "input": [0], "output": [0]}
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn linear_characteristic_is_half_the_input() {
        let m = linear_toy();
        let c = compute_characteristic(&m, &GridSpec { points_per_dim: 5 }, &GasSpec::default())
            .unwrap();
        let grid = c.scalar_grid().unwrap();
        for (k, &u) in grid.iter().enumerate() {
            assert!((c.states[k][0] - u / 2.0).abs() < 1e-9, "k_x({u}) = u/2");
            assert!((c.outputs[k][0] - u / 2.0).abs() < 1e-9);
            assert!(c.residuals[k] < TOL_EQ);
            assert!(
                c.gas[k].evidenced,
                "all starts converge for the linear system"
            );
        }
        assert!((c.ky_at(1.0).unwrap() - 0.5).abs() < 1e-9);
        assert!((c.kx_at(1.3).unwrap()[0] - 0.65).abs() < 1e-9);
    }

    #[test]
    fn grid_refinement_shrinks_adjacent_jumps() {
        let m = linear_toy();
        let gas = GasSpec {
            n_starts: 2,
            t_settle: 20.0,
            seed: 1,
        };
        let coarse = compute_characteristic(&m, &GridSpec { points_per_dim: 8 }, &gas).unwrap();
        let fine = compute_characteristic(&m, &GridSpec { points_per_dim: 16 }, &gas).unwrap();
        let ratio = coarse.max_adjacent_state_jump() / fine.max_adjacent_state_jump();
        assert!(
            ratio >= 1.5,
            "refining the grid should shrink jumps, ratio {ratio}"
        );
    }

    #[test]
    fn planar_gas_on_stable_node() {
        let m = SystemModel::parse(
            r#"{
                "n": 2, "m": 1, "p": 1,
                "f": ["-x1 + u1", "-2*x2"],
                "h": ["x1"],
                "state_domain": {"G": [[1.0,0.0],[-1.0,0.0],[0.0,1.0],[0.0,-1.0]], "g": [2.0,2.0,2.0,2.0]},
                "input_domain": {"lo": [0.0], "hi": [0.0]},
                "orders": {"state": [0,0], "input": [0], "output": [0]}
            }"#,
        )
        .unwrap();
        let r = verify_planar_gas(&m, &[0.0], &SamplePlan::new(42, 50), 5, 30.0).unwrap();
        assert!(r.trace_det_ok);
        assert!((r.max_trace + 3.0).abs() < 1e-6, "trace is -3 everywhere");
        assert!((r.min_det - 2.0).abs() < 1e-6, "det is 2 everywhere");
        assert!(r.converged);
        assert!(
            linalg::norm_inf(&r.limit_point) < 1e-8,
            "limit is the origin"
        );
        assert!(r.verdict);
    }

    #[test]
    fn planar_saddle_flagged_without_sweep() {
        let m = SystemModel::parse(
            r#"{
                "n": 2, "m": 0, "p": 1,
                "f": ["x1", "-x2"],
                "h": ["x1"],
                "state_domain": {"G": [[1.0,0.0],[-1.0,0.0],[0.0,1.0],[0.0,-1.0]], "g": [1.0,1.0,1.0,1.0]},
                "input_domain": {"lo": [], "hi": []},
                "orders": {"state": [0,0], "input": [], "output": [0]}
            }"#,
        )
        .unwrap();
        let r = verify_planar_gas(&m, &[], &SamplePlan::new(42, 50), 5, 30.0).unwrap();
        assert!(!r.trace_det_ok, "saddle has det = -1");
        assert!((r.min_det + 1.0).abs() < 1e-6);
        assert!(!r.verdict);
        assert_eq!(r.n_starts, 0, "sweep skipped once the sign condition fails");
    }

    #[test]
    fn sandwich_collapses_for_constant_input() {
        let m = linear_toy();
        let c = compute_characteristic(&m, &GridSpec { points_per_dim: 9 }, &GasSpec::default())
            .unwrap();
        let r = limit_sandwich_check(
            &m,
            &c,
            &[0.1],
            &InputSignal::constant_scalar(1.0),
            60.0,
            0.5,
        )
        .unwrap();
        assert_eq!(r.u_inf, vec![1.0]);
        assert_eq!(r.u_sup, vec![1.0]);
        assert!(r.verdict);
        assert!(
            (r.y_tail_lo[0] - 0.5).abs() < 1e-6,
            "output settles at k_y(1) = 0.5"
        );
        assert!((r.y_tail_hi[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn sandwich_holds_for_sinusoid_on_linear_toy() {
        let m = linear_toy();
        let c = compute_characteristic(&m, &GridSpec::default(), &GasSpec::default()).unwrap();
        let u = InputSignal::Sinusoid {
            offset: vec![1.0],
            amplitude: vec![0.5],
            omega: vec![1.0],
        };
        let r = limit_sandwich_check(&m, &c, &[0.3], &u, 120.0, 0.5).unwrap();
        assert!((r.u_inf[0] - 0.5).abs() < 1e-12);
        assert!((r.u_sup[0] - 1.5).abs() < 1e-12);
        assert!(r.verdict, "tail outputs inside [k_y(0.5), k_y(1.5)]: {r:?}");
    }

    #[test]
    fn sandwich_tightens_for_converging_input() {
        // A hold input that settles at u = 1 by t = 10: the tail window only
        // sees the limit value, so the bounds collapse to k_y(1).
        let m = linear_toy();
        let c = compute_characteristic(&m, &GridSpec::default(), &GasSpec::default()).unwrap();
        let u = InputSignal::PiecewiseConstant {
            breakpoints: vec![0.0, 2.0, 5.0, 10.0],
            values: vec![vec![1.8], vec![0.4], vec![1.2], vec![1.0]],
        };
        let r = limit_sandwich_check(&m, &c, &[0.0], &u, 60.0, 0.5).unwrap();
        assert_eq!(r.u_inf, vec![1.0]);
        assert_eq!(r.u_sup, vec![1.0]);
        assert!(r.verdict);
        assert!(
            (r.y_tail_lo[0] - 0.5).abs() < 1e-4,
            "output tail near k_y(1) = 0.5"
        );
        assert!((r.y_tail_hi[0] - 0.5).abs() < 1e-4);
    }

    #[test]
    fn sandwich_swaps_bounds_for_decreasing_output() {
        // Decreasing gain: state order (1), output order (1), k_y(u) = 1/(1+u).
        let m = SystemModel::parse(
            r#"{
                "n": 1, "m": 1, "p": 1,
                "f": ["-x1 + 1/(1 + u1)"],
                "h": ["x1"],
                "state_domain": {"G": [[1.0], [-1.0]], "g": [1.5, 0.0]},
                "input_domain": {"lo": [0.0], "hi": [2.0]},
                "orders": {"state": [1], "input": [0], "output": [1]}
            }"#,
        )
        .unwrap();
        let c = compute_characteristic(&m, &GridSpec::default(), &GasSpec::default()).unwrap();
        let u = InputSignal::Sinusoid {
            offset: vec![1.0],
            amplitude: vec![0.6],
            omega: vec![1.0],
        };
        let r = limit_sandwich_check(&m, &c, &[0.5], &u, 120.0, 0.5).unwrap();
        // Bounds swap: the lower bound is k_y(u_sup), the upper k_y(u_inf).
        assert!((r.ky_lower - c.ky_at(1.6).unwrap()).abs() < 1e-12);
        assert!((r.ky_upper - c.ky_at(0.4).unwrap()).abs() < 1e-12);
        assert!(r.ky_lower < r.ky_upper);
        assert!(r.verdict, "sandwich with swapped roles: {r:?}");
    }

    #[test]
    fn envelope_collapses_for_constant_input() {
        let m = linear_toy();
        let r = bounded_reachability_check(
            &m,
            None,
            &[0.7],
            &InputSignal::constant_scalar(0.8),
            20.0,
            1e-6,
        )
        .unwrap();
        assert!(r.contained);
        assert_eq!(r.input_lower, vec![0.8]);
        assert_eq!(r.input_upper, vec![0.8]);
        assert!(r.worst_margin.abs() < 1e-9, "lower and upper coincide");
    }

    #[test]
    fn envelope_brackets_sinusoid_on_monotone_toy() {
        let m = linear_toy();
        let u = InputSignal::Sinusoid {
            offset: vec![1.0],
            amplitude: vec![0.8],
            omega: vec![2.0],
        };
        let r = bounded_reachability_check(&m, None, &[0.0], &u, 30.0, 1e-6).unwrap();
        assert!(r.contained, "monotone system stays in its envelope: {r:?}");
    }

    #[test]
    fn envelope_violated_for_nonmonotone_toy() {
        // Rotationally coupled planar system, not monotone for (0,0) orders.
        let m = SystemModel::parse(
            r#"{
                "n": 2, "m": 1, "p": 1,
                "f": ["-x1 - x2 + u1", "x1 - x2"],
                "h": ["x2"],
                "state_domain": {"G": [[1.0,0.0],[-1.0,0.0],[0.0,1.0],[0.0,-1.0]], "g": [4.0,4.0,4.0,4.0]},
                "input_domain": {"lo": [0.0], "hi": [2.0]},
                "orders": {"state": [0,0], "input": [0], "output": [0]}
            }"#,
        )
        .unwrap();
        let u = InputSignal::Sinusoid {
            offset: vec![1.0],
            amplitude: vec![1.0],
            omega: vec![1.0],
        };
        let r = bounded_reachability_check(&m, None, &[0.5, 0.5], &u, 20.0, 1e-6).unwrap();
        assert!(!r.contained, "the rotation breaks the sandwich: {r:?}");
        assert!(r.first_violation_time.is_some());
    }
}
