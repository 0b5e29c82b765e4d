//! Series composition of systems and small-gain certification of SISO
//! negative-feedback loops.

use serde::{Deserialize, Serialize};

use crate::certify::{sign_pattern_certify, SamplePlan, Verdict, TOL_CERT};
use crate::characteristic::{
    compute_characteristic, newton_refine, Characteristic, GasSpec, GridSpec, TOL_EQ,
};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::integrate::IntegrateOpts;
use crate::linalg;
use crate::model::SystemModel;
use crate::order::OrthantOrder;
use crate::polytope::Polytope;
use crate::signal::InputSignal;

/// Convergence tolerance for the discrete gain iteration.
pub const TOL_FP: f64 = 1e-9;
/// Terminal tolerance for closed-loop verification.
pub const TOL_CL: f64 = 1e-5;
/// Slack when checking tabulated characteristics for monotonicity.
const TOL_MONO: f64 = 1e-6;

// ---------------------------------------------------------------------------
// Cascades
// ---------------------------------------------------------------------------

/// A head-to-tail series interconnection: the external input drives stage 0,
/// each stage's output feeds the next stage's input, and the last stage's
/// output is the cascade output.
#[derive(Debug, Clone)]
pub struct CascadeModel {
    pub stages: Vec<SystemModel>,
    pub composite: SystemModel,
}

/// Compose stages into a flat model by substituting each stage's input
/// variables with the previous stage's output expressions.
pub fn cascade(stages: Vec<SystemModel>) -> Result<CascadeModel> {
    if stages.is_empty() {
        return Err(Error::Precondition(
            "cascade needs at least one stage".into(),
        ));
    }
    for (k, w) in stages.windows(2).enumerate() {
        if w[0].p() != w[1].m() {
            return Err(Error::DimensionMismatch(format!(
                "stage {k} has {} outputs but stage {} takes {} inputs",
                w[0].p(),
                k + 1,
                w[1].m()
            )));
        }
        if w[0].output_order() != w[1].input_order() {
            return Err(Error::OrderMismatch(format!(
                "stage {k} output order differs from stage {} input order",
                k + 1
            )));
        }
    }

    let mut offsets = Vec::with_capacity(stages.len());
    let mut total_n = 0usize;
    for s in &stages {
        offsets.push(total_n);
        total_n += s.n();
    }

    let mut f = Vec::with_capacity(total_n);
    // Outputs of the previous stage, rewritten over composite states.
    let mut prev_outputs: Option<Vec<Expr>> = None;
    for (k, stage) in stages.iter().enumerate() {
        let off = offsets[k];
        let state_sub = move |i: usize| Expr::State(off + i);
        let feeds = prev_outputs.clone();
        let input_sub = |j: usize| match &feeds {
            None => Expr::Input(j),
            Some(outs) => outs[j].clone(),
        };
        for e in stage.field_exprs() {
            f.push(e.substitute(&state_sub, &input_sub));
        }
        prev_outputs = Some(
            stage
                .output_exprs()
                .iter()
                .map(|e| e.substitute(&state_sub, &|j| Expr::Input(j)))
                .collect(),
        );
    }
    let h = prev_outputs.expect("at least one stage");

    let domains: Vec<&Polytope> = stages.iter().map(|s| s.state_domain()).collect();
    let state_domain = Polytope::product(&domains)?;
    let state_orders: Vec<&OrthantOrder> = stages.iter().map(|s| s.state_order()).collect();
    let state_order = OrthantOrder::concat(&state_orders);
    let (lo, hi) = stages[0].input_box();

    let mut params = std::collections::BTreeMap::new();
    for (k, s) in stages.iter().enumerate() {
        for (name, v) in s.params() {
            params.insert(format!("s{k}.{name}"), *v);
        }
    }

    let composite = SystemModel::from_parts(
        f,
        h,
        state_domain,
        lo.to_vec(),
        hi.to_vec(),
        state_order,
        stages[0].input_order().clone(),
        stages.last().unwrap().output_order().clone(),
        params,
    )?;
    Ok(CascadeModel { stages, composite })
}

/// Both routes to the cascade characteristic: stagewise composition by
/// interpolation, and a direct computation on the composite model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CascadeCharacteristic {
    pub grid: Vec<f64>,
    pub composed_states: Vec<Vec<f64>>,
    pub composed_outputs: Vec<f64>,
    pub direct: Characteristic,
    pub max_discrepancy: f64,
}

/// A copy of `stage` accepting inputs from `[lo, hi]` (the induced range fed
/// by the previous stage).
fn rebox_input(stage: &SystemModel, lo: f64, hi: f64) -> Result<SystemModel> {
    SystemModel::from_parts(
        stage.field_exprs().to_vec(),
        stage.output_exprs().to_vec(),
        stage.state_domain().clone(),
        vec![lo],
        vec![hi],
        stage.state_order().clone(),
        stage.input_order().clone(),
        stage.output_order().clone(),
        stage.params().clone(),
    )
}

/// Compute the cascade characteristic along both routes and report their
/// largest pointwise discrepancy over the grid.
pub fn cascade_characteristic(
    cascade: &CascadeModel,
    grid: &GridSpec,
    gas: &GasSpec,
) -> Result<CascadeCharacteristic> {
    if cascade.stages.iter().any(|s| s.m() != 1 || s.p() != 1) {
        return Err(Error::Precondition(
            "cascade characteristics are computed for SISO chains".into(),
        ));
    }

    // Stage characteristics on induced grids, composed by interpolation.
    let (lo, hi) = cascade.composite.input_box();
    let external = linalg::linspace(lo[0], hi[0], grid.points_per_dim);
    let mut fed: Vec<f64> = external.clone();
    let mut stage_chars: Vec<Characteristic> = Vec::new();
    for (k, stage) in cascade.stages.iter().enumerate() {
        let (range_lo, range_hi) = fed
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                (a.min(v), b.max(v))
            });
        let scoped = if k == 0 {
            stage.clone()
        } else {
            rebox_input(stage, range_lo, range_hi)?
        };
        let c = compute_characteristic(&scoped, grid, gas)?;
        fed = fed.iter().map(|&v| c.ky_at(v)).collect::<Result<_>>()?;
        stage_chars.push(c);
    }

    let mut composed_states = Vec::with_capacity(external.len());
    let mut composed_outputs = Vec::with_capacity(external.len());
    for &u in &external {
        let mut stacked = Vec::with_capacity(cascade.composite.n());
        let mut carry = u;
        for c in &stage_chars {
            stacked.extend(c.kx_at(carry)?);
            carry = c.ky_at(carry)?;
        }
        composed_states.push(stacked);
        composed_outputs.push(carry);
    }

    let direct = compute_characteristic(&cascade.composite, grid, gas)?;

    let mut max_disc: f64 = 0.0;
    for k in 0..external.len() {
        max_disc = max_disc.max(linalg::dist_inf(&composed_states[k], &direct.states[k]));
        max_disc = max_disc.max((composed_outputs[k] - direct.outputs[k][0]).abs());
    }

    Ok(CascadeCharacteristic {
        grid: external,
        composed_states,
        composed_outputs,
        direct,
        max_discrepancy: max_disc,
    })
}

// ---------------------------------------------------------------------------
// Feedback loops
// ---------------------------------------------------------------------------

/// SISO negative feedback: the plant is monotone with increasing input and
/// output; the controller is monotone with increasing input and decreasing
/// output. Wiring: plant input = controller output, controller input =
/// plant output.
#[derive(Debug, Clone)]
pub struct FeedbackLoop {
    pub plant: SystemModel,
    pub controller: SystemModel,
}

impl FeedbackLoop {
    pub fn new(plant: SystemModel, controller: SystemModel) -> Result<Self> {
        if plant.m() != 1 || plant.p() != 1 || controller.m() != 1 || controller.p() != 1 {
            return Err(Error::Precondition("feedback loops are SISO only".into()));
        }
        if plant.input_order().eps() != [0] || plant.output_order().eps() != [0] {
            return Err(Error::OrderMismatch(
                "plant input and output must carry the increasing order".into(),
            ));
        }
        if controller.input_order().eps() != [0] || controller.output_order().eps() != [1] {
            return Err(Error::OrderMismatch(
                "controller must have increasing input and decreasing output order".into(),
            ));
        }
        Ok(Self { plant, controller })
    }

    /// The coupled autonomous system (x, z) with the loop closed.
    pub fn closed_loop_model(&self) -> Result<SystemModel> {
        let nx = self.plant.n();
        let plant_out = self.plant.output_exprs()[0].substitute(&Expr::State, &|j| Expr::Input(j));
        let ctrl_out = self.controller.output_exprs()[0]
            .substitute(&|i| Expr::State(nx + i), &|j| Expr::Input(j));

        let mut f = Vec::with_capacity(nx + self.controller.n());
        for e in self.plant.field_exprs() {
            f.push(e.substitute(&Expr::State, &|_| ctrl_out.clone()));
        }
        for e in self.controller.field_exprs() {
            f.push(e.substitute(&|i| Expr::State(nx + i), &|_| plant_out.clone()));
        }
        let h = vec![plant_out, ctrl_out];

        let state_domain =
            Polytope::product(&[self.plant.state_domain(), self.controller.state_domain()])?;
        let state_order =
            OrthantOrder::concat(&[self.plant.state_order(), self.controller.state_order()]);
        let output_order =
            OrthantOrder::concat(&[self.plant.output_order(), self.controller.output_order()]);

        SystemModel::from_parts(
            f,
            h,
            state_domain,
            vec![],
            vec![],
            state_order,
            OrthantOrder::standard(0),
            output_order,
            std::collections::BTreeMap::new(),
        )
    }
}

/// Exact characteristic evaluation: Newton on the stage equilibrium at a
/// given scalar input, seeded by the tabulated characteristic.
fn exact_stage_output(
    model: &SystemModel,
    table: &Characteristic,
    u: f64,
) -> Result<(Vec<f64>, f64)> {
    let grid = table.scalar_grid()?;
    let lo = grid[0].min(*grid.last().unwrap());
    let hi = grid[0].max(*grid.last().unwrap());
    let guess = table.kx_at(u.clamp(lo, hi))?;
    let (eq, _) = newton_refine(model, &guess, &[u], TOL_EQ)?;
    let y = model.eval_output(&eq)[0];
    Ok((eq, y))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationPath {
    pub start: f64,
    pub iterations: usize,
    pub converged: bool,
    pub period2: bool,
    pub limit: f64,
    /// Leading iterates, truncated for the report.
    pub head: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmallGainReport {
    /// Plant input grid and tabulated increasing gain.
    pub grid: Vec<f64>,
    pub ky_table: Vec<f64>,
    /// Controller input grid and tabulated decreasing gain.
    pub kw_grid: Vec<f64>,
    pub kw_table: Vec<f64>,
    /// The composed map rho = k_w . k_y on the plant input grid.
    pub rho_on_grid: Vec<f64>,
    pub starts: Vec<IterationPath>,
    pub attractive: bool,
    pub period2_detected: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_point: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_loop_equilibrium: Option<Vec<f64>>,
    pub verified: bool,
    pub n_sim_starts: usize,
    pub max_terminal_output_err: f64,
    pub max_terminal_state_err: f64,
}

struct GainTables {
    plant_char: Characteristic,
    ctrl_char: Characteristic,
}

fn interp_scalar(grid: &[f64], values: &[f64], u: f64) -> Result<f64> {
    let first = grid[0];
    let last = *grid.last().unwrap();
    if u < first - 1e-9 || u > last + 1e-9 {
        return Err(Error::Precondition(format!(
            "iteration leaves the grid range: u = {u} outside [{first}, {last}]"
        )));
    }
    if last == first {
        return Ok(values[0]);
    }
    let u = u.clamp(first, last);
    let mut k = grid.partition_point(|&g| g <= u);
    k = k.clamp(1, grid.len() - 1);
    let w = (u - grid[k - 1]) / (grid[k] - grid[k - 1]);
    Ok(values[k - 1] + w * (values[k] - values[k - 1]))
}

/// Certify global attractivity of the discrete gain iteration
/// `u_{k+1} = k_w(k_y(u_k))` from a spread of starts, with period-2
/// detection. Attractivity here is evidence from finitely many starts, not
/// a proof.
pub fn small_gain_certify(
    loop_: &FeedbackLoop,
    grid: &GridSpec,
    gas: &GasSpec,
    n_starts: usize,
) -> Result<SmallGainReport> {
    // Small-gain hypotheses: both subsystems monotone with their orders.
    let precheck = SamplePlan::new(42, 500);
    for (name, sys) in [("plant", &loop_.plant), ("controller", &loop_.controller)] {
        let r = sign_pattern_certify(sys, &precheck, TOL_CERT)?;
        if r.verdict != Verdict::Certified {
            return Err(Error::Precondition(format!(
                "{name} failed monotonicity certification; small-gain hypotheses violated"
            )));
        }
    }

    let tables = GainTables {
        plant_char: compute_characteristic(&loop_.plant, grid, gas)?,
        ctrl_char: compute_characteristic(&loop_.controller, grid, gas)?,
    };
    let u_grid = tables.plant_char.scalar_grid()?;
    let ky: Vec<f64> = tables.plant_char.outputs.iter().map(|y| y[0]).collect();
    let y_grid = tables.ctrl_char.scalar_grid()?;
    let kw: Vec<f64> = tables.ctrl_char.outputs.iter().map(|w| w[0]).collect();

    // The gains must be monotone: k_y nondecreasing, k_w nonincreasing.
    if ky.windows(2).any(|w| w[1] < w[0] - TOL_MONO) {
        return Err(Error::Precondition(
            "plant characteristic is not nondecreasing on the grid".into(),
        ));
    }
    if kw.windows(2).any(|w| w[1] > w[0] + TOL_MONO) {
        return Err(Error::Precondition(
            "controller characteristic is not nonincreasing on the grid".into(),
        ));
    }

    let rho = |u: f64| -> Result<f64> {
        let y = interp_scalar(&u_grid, &ky, u)?;
        interp_scalar(&y_grid, &kw, y)
    };

    // rho tabulated for plotting; the argument of k_w is clamped into its
    // grid so the table is total even when ranges only partially overlap.
    let rho_on_grid: Vec<f64> = u_grid
        .iter()
        .map(|&u| {
            let y = interp_scalar(&u_grid, &ky, u).expect("grid point");
            let yy = y.clamp(
                y_grid[0].min(*y_grid.last().unwrap()),
                y_grid[0].max(*y_grid.last().unwrap()),
            );
            interp_scalar(&y_grid, &kw, yy).expect("clamped point")
        })
        .collect();

    const MAX_ITERS: usize = 10_000;
    const HEAD_LEN: usize = 32;
    let start_points = linalg::linspace(u_grid[0], *u_grid.last().unwrap(), n_starts.max(1));
    let mut paths = Vec::with_capacity(start_points.len());
    let mut period2_any = false;

    for &s in &start_points {
        let mut u = s;
        let mut head = vec![u];
        let mut converged = false;
        let mut iterations = MAX_ITERS;
        for it in 0..MAX_ITERS {
            let next = rho(u)?;
            if head.len() < HEAD_LEN {
                head.push(next);
            }
            if (next - u).abs() < TOL_FP {
                u = next;
                converged = true;
                iterations = it + 1;
                break;
            }
            u = next;
        }
        // Period-2 hazard: rho(rho(u)) returns while rho(u) stays away.
        let v = rho(u)?;
        let back = rho(v)?;
        let period2 = !converged && (back - u).abs() < 1e-6 && (v - u).abs() > 1e-6;
        period2_any |= period2;
        paths.push(IterationPath {
            start: s,
            iterations,
            converged,
            period2,
            limit: u,
            head,
        });
    }

    let all_converged = paths.iter().all(|p| p.converged);
    let mut common = true;
    for w in paths.windows(2) {
        if (w[0].limit - w[1].limit).abs() > 100.0 * TOL_FP {
            common = false;
        }
    }
    let attractive = all_converged && common && !period2_any;

    // Sharpen the fixed point on the exact characteristics: the tabulated
    // iteration carries interpolation bias of order (grid step)^2.
    let fixed_point = if attractive {
        let mut u = paths[0].limit;
        for _ in 0..256 {
            let (_, y) = exact_stage_output(&loop_.plant, &tables.plant_char, u)?;
            let (_, w) = exact_stage_output(&loop_.controller, &tables.ctrl_char, y)?;
            if (w - u).abs() < 1e-12 {
                u = w;
                break;
            }
            u = w;
        }
        Some(u)
    } else {
        None
    };

    Ok(SmallGainReport {
        grid: u_grid,
        ky_table: ky,
        kw_grid: y_grid,
        kw_table: kw,
        rho_on_grid,
        starts: paths,
        attractive,
        period2_detected: period2_any,
        fixed_point,
        closed_loop_equilibrium: None,
        verified: false,
        n_sim_starts: 0,
        max_terminal_output_err: f64::NAN,
        max_terminal_state_err: f64::NAN,
    })
}

/// Simulate the closed loop from sampled compatible initial conditions and
/// check convergence to the equilibrium predicted by the gain iteration.
/// Boundedness of closed-loop solutions is checked empirically: states stay
/// within ten domain diameters of the domain center.
pub fn closed_loop_verify(
    loop_: &FeedbackLoop,
    report: &SmallGainReport,
    plan: &SamplePlan,
    horizon: f64,
) -> Result<SmallGainReport> {
    if !report.attractive {
        return Err(Error::Precondition(
            "closed-loop verification requires an attractive gain iteration".into(),
        ));
    }
    let u_bar = report
        .fixed_point
        .ok_or_else(|| Error::Precondition("attractive report lacks a fixed point".into()))?;

    // Equilibrium eta = (k_x(u_bar), k_z(k_y(u_bar))) from exact solves;
    // a coarse tabulation is enough to seed the Newton refinements.
    let grid_spec = GridSpec { points_per_dim: 9 };
    let gas = GasSpec {
        n_starts: 2,
        ..Default::default()
    };
    let plant_tab = compute_characteristic(&loop_.plant, &grid_spec, &gas)?;
    let ctrl_tab = compute_characteristic(&loop_.controller, &grid_spec, &gas)?;
    let (x_e, y_star) = exact_stage_output(&loop_.plant, &plant_tab, u_bar)?;
    let (z_e, w_star) = exact_stage_output(&loop_.controller, &ctrl_tab, y_star)?;
    let mut eta = x_e.clone();
    eta.extend_from_slice(&z_e);
    if (w_star - u_bar).abs() > 1e-6 {
        return Err(Error::Precondition(format!(
            "fixed point is not self-consistent: k_w(k_y({u_bar})) = {w_star}"
        )));
    }

    let closed = loop_.closed_loop_model()?;
    let diam = closed.state_domain().diameter();
    let center = closed.state_domain().chebyshev_center().to_vec();
    let opts = IntegrateOpts::default();
    let mut rng = plan.rng();

    let (clo, chi) = loop_.controller.input_box();
    let (plo, phi) = loop_.plant.input_box();
    let (clo, chi, plo, phi) = (clo[0], chi[0], plo[0], phi[0]);

    let mut max_out_err: f64 = 0.0;
    let mut max_state_err: f64 = 0.0;
    let mut all_ok = true;

    for _ in 0..plan.n_points {
        // Sample starts whose wired signals begin inside the partner boxes.
        let mut x0 = None;
        for _ in 0..10_000 {
            let cand = closed.state_domain().sample_interior(&mut rng)?;
            let y0 = loop_.plant.eval_output(&cand[..loop_.plant.n()]);
            let w0 = loop_.controller.eval_output(&cand[loop_.plant.n()..]);
            if y0[0] >= clo && y0[0] <= chi && w0[0] >= plo && w0[0] <= phi {
                x0 = Some(cand);
                break;
            }
        }
        let x0 = x0.ok_or_else(|| {
            Error::Precondition("no compatible closed-loop initial conditions found".into())
        })?;

        let traj = closed.integrate(&x0, &InputSignal::Constant(vec![]), horizon, &opts)?;
        for state in &traj.states {
            if linalg::dist2(state, &center) > 10.0 * diam {
                return Err(Error::Unbounded(format!(
                    "closed-loop state {state:?} left ten domain diameters"
                )));
            }
        }
        let term = traj.terminal_state();
        let outs = closed.eval_output(term);
        let out_err = (outs[0] - y_star).abs().max((outs[1] - u_bar).abs());
        let state_err = linalg::dist_inf(term, &eta);
        max_out_err = max_out_err.max(out_err);
        max_state_err = max_state_err.max(state_err);
        if out_err > TOL_CL || state_err > TOL_CL {
            all_ok = false;
        }
    }

    let mut updated = report.clone();
    updated.closed_loop_equilibrium = Some(eta);
    updated.verified = all_ok;
    updated.n_sim_starts = plan.n_points;
    updated.max_terminal_output_err = max_out_err;
    updated.max_terminal_state_err = max_state_err;
    Ok(updated)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_plant() -> SystemModel {
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

    fn decreasing_controller() -> SystemModel {
        SystemModel::parse(
            r#"{
                "n": 1, "m": 1, "p": 1,
                "f": ["-x1 + 1/(1 + u1)"],
                "h": ["x1"],
                "state_domain": {"G": [[1.0], [-1.0]], "g": [1.5, 0.0]},
                "input_domain": {"lo": [0.0], "hi": [2.0]},
                "orders": {"state": [1], "input": [0], "output": [1]}
            }"#,
        )
        .unwrap()
    }

    fn quick_gas() -> GasSpec {
        GasSpec {
            n_starts: 2,
            t_settle: 60.0,
            seed: 42,
        }
    }

    #[test]
    fn single_stage_cascade_is_identity() {
        let s = linear_plant();
        let c = cascade(vec![s.clone()]).unwrap();
        for (x, u) in [([0.3], [0.5]), ([-1.0], [1.7])] {
            assert_eq!(c.composite.field_at(&x, &u), s.field_at(&x, &u));
        }
        assert_eq!(c.composite.n(), 1);
        // Both characteristic routes reduce to the stage characteristic.
        let cc = cascade_characteristic(&c, &GridSpec { points_per_dim: 5 }, &quick_gas()).unwrap();
        assert!(cc.max_discrepancy < 1e-12);
    }

    #[test]
    fn two_linear_stages_quarter_gain() {
        let c = cascade(vec![linear_plant(), linear_plant()]).unwrap();
        assert_eq!(c.composite.n(), 2);
        let cc = cascade_characteristic(&c, &GridSpec { points_per_dim: 9 }, &quick_gas()).unwrap();
        for (k, &u) in cc.grid.iter().enumerate() {
            assert!(
                (cc.direct.outputs[k][0] - u / 4.0).abs() < 1e-8,
                "composite k_y({u}) = u/4"
            );
            assert!((cc.composed_outputs[k] - u / 4.0).abs() < 1e-8);
        }
        assert!(
            cc.max_discrepancy < 1e-6,
            "both routes agree exactly for linear stages"
        );
    }

    #[test]
    fn order_mismatch_is_rejected() {
        let plant = linear_plant();
        let ctrl = decreasing_controller();
        // Controller output order (1) does not match plant input order (0).
        assert!(cascade(vec![ctrl, plant]).is_err());
    }

    fn bisect_fixed_point() -> f64 {
        // Root of w^2 + 2w - 2 = 0 on [0, 2].
        let g = |w: f64| w * w + 2.0 * w - 2.0;
        let (mut a, mut b) = (0.0f64, 2.0f64);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if g(a) * g(m) <= 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn small_gain_loop_matches_bisection_oracle() {
        let loop_ = FeedbackLoop::new(linear_plant(), decreasing_controller()).unwrap();
        let report = small_gain_certify(
            &loop_,
            &GridSpec {
                points_per_dim: 101,
            },
            &quick_gas(),
            64,
        )
        .unwrap();
        assert!(report.attractive);
        assert!(!report.period2_detected);
        let oracle = bisect_fixed_point();
        assert!((oracle - (3.0f64.sqrt() - 1.0)).abs() < 1e-12);
        let fp = report.fixed_point.unwrap();
        assert!(
            (fp - oracle).abs() < 1e-6,
            "fixed point {fp} vs oracle {oracle} (diff {:.2e})",
            (fp - oracle).abs()
        );
        assert!(report.starts.iter().all(|p| p.converged));

        let verified = closed_loop_verify(&loop_, &report, &SamplePlan::new(42, 8), 40.0).unwrap();
        assert!(verified.verified, "terminal errors: {verified:?}");
        let eta = verified.closed_loop_equilibrium.as_ref().unwrap();
        assert!((eta[0] - 0.3660254037844386).abs() < 1e-7);
        assert!((eta[1] - 0.7320508075688772).abs() < 1e-7);
    }

    #[test]
    fn constant_controller_fixed_in_one_step() {
        let plant = linear_plant();
        let ctrl = SystemModel::parse(
            r#"{
                "n": 1, "m": 1, "p": 1,
                "f": ["-x1 + 0.5"],
                "h": ["x1"],
                "state_domain": {"G": [[1.0], [-1.0]], "g": [1.0, 0.0]},
                "input_domain": {"lo": [0.0], "hi": [2.0]},
                "orders": {"state": [1], "input": [0], "output": [1]}
            }"#,
        )
        .unwrap();
        let loop_ = FeedbackLoop::new(plant, ctrl).unwrap();
        let report =
            small_gain_certify(&loop_, &GridSpec { points_per_dim: 31 }, &quick_gas(), 16).unwrap();
        assert!(report.attractive);
        let fp = report.fixed_point.unwrap();
        assert!((fp - 0.5).abs() < 1e-9);
        assert!(
            report.starts.iter().all(|p| p.iterations <= 2),
            "constant gain converges immediately"
        );

        // The closed loop converges to (k_x(0.5), controller equilibrium).
        let verified = closed_loop_verify(&loop_, &report, &SamplePlan::new(42, 4), 30.0).unwrap();
        assert!(verified.verified);
        let eta = verified.closed_loop_equilibrium.as_ref().unwrap();
        assert!(
            (eta[0] - 0.25).abs() < 1e-8,
            "plant settles at k_x(0.5) = 0.25"
        );
        assert!((eta[1] - 0.5).abs() < 1e-8);
    }

    #[test]
    fn mapk_stage_in_negative_feedback() {
        // A decreasing controller k_w(y) = 0.8 / (1 + 4y) wrapped around the
        // MAPK stage: the gain iteration is its own oracle, then the closed
        // loop is simulated.
        let plant =
            crate::builtins::builtin("mapk_stage", &std::collections::BTreeMap::new()).unwrap();
        let ctrl = SystemModel::parse(
            r#"{
                "n": 1, "m": 1, "p": 1,
                "f": ["-x1 + 0.8 / (1 + 4*u1)"],
                "h": ["x1"],
                "state_domain": {"G": [[1.0], [-1.0]], "g": [1.0, 0.0]},
                "input_domain": {"lo": [0.0], "hi": [2.0]},
                "orders": {"state": [1], "input": [0], "output": [1]}
            }"#,
        )
        .unwrap();
        let loop_ = FeedbackLoop::new(plant, ctrl).unwrap();
        let report =
            small_gain_certify(&loop_, &GridSpec { points_per_dim: 51 }, &quick_gas(), 24).unwrap();
        assert!(report.attractive, "iteration contracts: {report:?}");
        let fp = report.fixed_point.unwrap();

        // Independent oracle: iterate the exact composed map, with the plant
        // gain evaluated by a Newton equilibrium solve at every step and the
        // controller gain in closed form.
        let tab =
            compute_characteristic(&loop_.plant, &GridSpec { points_per_dim: 9 }, &quick_gas())
                .unwrap();
        let mut u = 0.4;
        for _ in 0..500 {
            let (_, y) = exact_stage_output(&loop_.plant, &tab, u).unwrap();
            let next = 0.8 / (1.0 + 4.0 * y);
            let done = (next - u).abs() < 1e-13;
            u = next;
            if done {
                break;
            }
        }
        assert!(
            (fp - u).abs() < 1e-9,
            "fixed point {fp} vs oracle iteration {u}"
        );

        let verified = closed_loop_verify(&loop_, &report, &SamplePlan::new(42, 6), 80.0).unwrap();
        assert!(verified.verified, "closed loop converges: {verified:?}");
    }

    #[test]
    fn mirror_loop_reports_period_two() {
        // k_y = id, k_w(y) = 1 - y: rho . rho = identity.
        let plant = SystemModel::parse(
            r#"{
                "n": 1, "m": 1, "p": 1,
                "f": ["-x1 + u1"],
                "h": ["x1"],
                "state_domain": {"G": [[1.0], [-1.0]], "g": [1.5, 0.5]},
                "input_domain": {"lo": [0.0], "hi": [1.0]},
                "orders": {"state": [0], "input": [0], "output": [0]}
            }"#,
        )
        .unwrap();
        let ctrl = SystemModel::parse(
            r#"{
                "n": 1, "m": 1, "p": 1,
                "f": ["-x1 + 1 - u1"],
                "h": ["x1"],
                "state_domain": {"G": [[1.0], [-1.0]], "g": [1.0, 0.0]},
                "input_domain": {"lo": [0.0], "hi": [1.0]},
                "orders": {"state": [1], "input": [0], "output": [1]}
            }"#,
        )
        .unwrap();
        let loop_ = FeedbackLoop::new(plant, ctrl).unwrap();
        let report =
            small_gain_certify(&loop_, &GridSpec { points_per_dim: 41 }, &quick_gas(), 16).unwrap();
        assert!(!report.attractive);
        assert!(report.period2_detected);
        assert!(report.fixed_point.is_none());
        assert!(closed_loop_verify(&loop_, &report, &SamplePlan::new(42, 4), 10.0).is_err());
    }

    #[test]
    fn grid_fixed_points_match_newton_equilibria() {
        // Sign changes of rho(u) - u on the grid correspond to closed-loop
        // equilibria of the coupled system.
        let loop_ = FeedbackLoop::new(linear_plant(), decreasing_controller()).unwrap();
        let report = small_gain_certify(
            &loop_,
            &GridSpec {
                points_per_dim: 101,
            },
            &quick_gas(),
            8,
        )
        .unwrap();
        let mut crossings = 0;
        for k in 0..report.grid.len() - 1 {
            let a = report.rho_on_grid[k] - report.grid[k];
            let b = report.rho_on_grid[k + 1] - report.grid[k + 1];
            if a == 0.0 || a * b < 0.0 {
                crossings += 1;
            }
        }
        assert_eq!(crossings, 1, "exactly one fixed point of rho on the grid");

        let closed = loop_.closed_loop_model().unwrap();
        let guess = [0.3, 0.7];
        let (eq, residual) = newton_refine(&closed, &guess, &[], TOL_EQ).unwrap();
        assert!(residual < TOL_EQ);
        assert!((eq[0] - 0.3660254037844386).abs() < 1e-8);
        assert!((eq[1] - 0.7320508075688772).abs() < 1e-8);
        let fp = report.fixed_point.unwrap();
        assert!((loop_.controller.eval_output(&[eq[1]])[0] - fp).abs() < 1e-8);
    }
}
