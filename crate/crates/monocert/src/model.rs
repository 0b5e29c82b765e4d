//! System models: expression vector fields on polytope domains, numerical
//! integration, and finite-difference Jacobians.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::integrate::{IntegrateOpts, Stepper};
use crate::linalg;
use crate::order::OrthantOrder;
use crate::polytope::Polytope;
use crate::signal::InputSignal;

/// Number of domain samples used to confirm finite evaluation at load time.
const VALIDATION_SAMPLES: usize = 256;

/// A controlled ODE system `dx/dt = f(x, u)`, `y = h(x)` on a polytope state
/// domain with an interval input box, carrying one orthant order per signal
/// space. Immutable after construction.
#[derive(Debug, Clone)]
pub struct SystemModel {
    n: usize,
    m: usize,
    p: usize,
    f: Vec<Expr>,
    h: Vec<Expr>,
    state_domain: Polytope,
    input_lo: Vec<f64>,
    input_hi: Vec<f64>,
    state_order: OrthantOrder,
    input_order: OrthantOrder,
    output_order: OrthantOrder,
    params: BTreeMap<String, f64>,
}

/// On-disk model schema.
#[derive(Debug, Deserialize)]
struct ModelFile {
    n: usize,
    m: usize,
    p: usize,
    #[serde(default)]
    params: BTreeMap<String, f64>,
    f: Vec<String>,
    h: Vec<String>,
    state_domain: DomainFile,
    input_domain: InputDomainFile,
    orders: OrdersFile,
}

#[derive(Debug, Deserialize)]
struct DomainFile {
    #[serde(rename = "G")]
    g: Vec<Vec<f64>>,
    #[serde(rename = "g")]
    rhs: Vec<f64>,
}

#[derive(Debug, Deserialize)]
struct InputDomainFile {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

#[derive(Debug, Deserialize)]
struct OrdersFile {
    state: Vec<u8>,
    input: Vec<u8>,
    output: Vec<u8>,
}

impl SystemModel {
    /// Assemble and validate a model from already-bound expressions
    /// (parameter references must have been substituted away; see
    /// [`Expr::bind`]).
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        f: Vec<Expr>,
        h: Vec<Expr>,
        state_domain: Polytope,
        input_lo: Vec<f64>,
        input_hi: Vec<f64>,
        state_order: OrthantOrder,
        input_order: OrthantOrder,
        output_order: OrthantOrder,
        params: BTreeMap<String, f64>,
    ) -> Result<Self> {
        let n = f.len();
        let m = input_lo.len();
        let p = h.len();
        if n == 0 {
            return Err(Error::InvalidModel(
                "state dimension must be at least 1".into(),
            ));
        }
        if state_domain.dim() != n {
            return Err(Error::DimensionMismatch(format!(
                "state domain has dimension {}, field has {n} components",
                state_domain.dim()
            )));
        }
        if input_hi.len() != m {
            return Err(Error::DimensionMismatch(
                "input box bounds differ in length".into(),
            ));
        }
        if input_lo.iter().zip(&input_hi).any(|(a, b)| a > b) {
            return Err(Error::InvalidModel("input box has lo > hi".into()));
        }
        if state_order.dim() != n || input_order.dim() != m || output_order.dim() != p {
            return Err(Error::DimensionMismatch(
                "order sign vectors must match n, m, p".into(),
            ));
        }
        let model = Self {
            n,
            m,
            p,
            f,
            h,
            state_domain,
            input_lo,
            input_hi,
            state_order,
            input_order,
            output_order,
            params,
        };
        model.check_finite_on_domain()?;
        Ok(model)
    }

    /// Parse and validate a JSON model file.
    pub fn parse(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.f.len() != file.n {
            return Err(Error::DimensionMismatch(format!(
                "declared n = {} but f has {} expressions",
                file.n,
                file.f.len()
            )));
        }
        if file.h.len() != file.p {
            return Err(Error::DimensionMismatch(format!(
                "declared p = {} but h has {} expressions",
                file.p,
                file.h.len()
            )));
        }
        let parse_all = |sources: &[String], m: usize| -> Result<Vec<Expr>> {
            sources
                .iter()
                .map(|s| Expr::parse(s, file.n, m)?.bind(&file.params))
                .collect()
        };
        let f = parse_all(&file.f, file.m)?;
        // Output maps depend on the state only.
        let h = parse_all(&file.h, 0)?;
        let state_domain = Polytope::new(file.state_domain.g, file.state_domain.rhs)?;
        Self::from_parts(
            f,
            h,
            state_domain,
            file.input_domain.lo,
            file.input_domain.hi,
            OrthantOrder::new(file.orders.state)?,
            OrthantOrder::new(file.orders.input)?,
            OrthantOrder::new(file.orders.output)?,
            file.params,
        )
    }

    fn check_finite_on_domain(&self) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
        let probe = |x: &[f64], u: &[f64]| -> Result<()> {
            let mut dx = vec![0.0; self.n];
            self.eval_field(x, u, &mut dx);
            if dx.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!(
                    "vector field not finite at x = {x:?}, u = {u:?}"
                )));
            }
            let y = self.eval_output(x);
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!(
                    "output map not finite at x = {x:?}"
                )));
            }
            Ok(())
        };
        let corners = self.state_domain.vertices().to_vec();
        let center_u = self.center_input();
        for v in &corners {
            probe(v, &center_u)?;
        }
        probe(self.state_domain.chebyshev_center(), &center_u)?;
        for _ in 0..VALIDATION_SAMPLES {
            let x = self.state_domain.sample_interior(&mut rng)?;
            let u = self.sample_input(&mut rng);
            probe(&x, &u)?;
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn field_exprs(&self) -> &[Expr] {
        &self.f
    }

    pub fn output_exprs(&self) -> &[Expr] {
        &self.h
    }

    pub fn state_domain(&self) -> &Polytope {
        &self.state_domain
    }

    pub fn input_box(&self) -> (&[f64], &[f64]) {
        (&self.input_lo, &self.input_hi)
    }

    pub fn state_order(&self) -> &OrthantOrder {
        &self.state_order
    }

    pub fn input_order(&self) -> &OrthantOrder {
        &self.input_order
    }

    pub fn output_order(&self) -> &OrthantOrder {
        &self.output_order
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn eval_field(&self, x: &[f64], u: &[f64], out: &mut [f64]) {
        for (i, e) in self.f.iter().enumerate() {
            out[i] = e.eval(x, u);
        }
    }

    pub fn field_at(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.eval_field(x, u, &mut out);
        out
    }

    pub fn eval_output(&self, x: &[f64]) -> Vec<f64> {
        self.h.iter().map(|e| e.eval(x, &[])).collect()
    }

    /// Midpoint of the input box.
    pub fn center_input(&self) -> Vec<f64> {
        self.input_lo
            .iter()
            .zip(&self.input_hi)
            .map(|(a, b)| 0.5 * (a + b))
            .collect()
    }

    pub fn sample_input<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.input_lo
            .iter()
            .zip(&self.input_hi)
            .map(|(&a, &b)| if a == b { a } else { rng.gen_range(a..=b) })
            .collect()
    }

    pub fn input_contains(&self, u: &[f64], tol: f64) -> bool {
        u.len() == self.m
            && u.iter()
                .enumerate()
                .all(|(j, &v)| v >= self.input_lo[j] - tol && v <= self.input_hi[j] + tol)
    }

    /// Numerically integrate from `x0` under input signal `u` for duration `t_end`.
    pub fn integrate(
        &self,
        x0: &[f64],
        u: &InputSignal,
        t_end: f64,
        opts: &IntegrateOpts,
    ) -> Result<Trajectory> {
        if t_end <= 0.0 {
            return Err(Error::Precondition(
                "integration horizon must be positive".into(),
            ));
        }
        if x0.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "initial state has length {}, model has n = {}",
                x0.len(),
                self.n
            )));
        }
        if !self.state_domain.contains(x0, opts.tol_domain) {
            return Err(Error::OutsideDomain(format!(
                "initial state {x0:?} outside the state domain"
            )));
        }
        u.validate(self.m, &self.input_lo, &self.input_hi)?;
        if opts.grid_points < 2 {
            return Err(Error::Precondition(
                "output grid needs at least 2 points".into(),
            ));
        }

        let grid = linalg::linspace(0.0, t_end, opts.grid_points);
        // Merge output grid with input breakpoints so every integration
        // segment sees a smooth right-hand side.
        let mut nodes: Vec<(f64, bool)> = grid.iter().map(|&t| (t, true)).collect();
        for b in u.breakpoints_in(0.0, t_end) {
            nodes.push((b, false));
        }
        nodes.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut merged: Vec<(f64, bool)> = Vec::with_capacity(nodes.len());
        for (t, is_grid) in nodes {
            match merged.last_mut() {
                Some((last, flag)) if (t - *last).abs() <= 1e-12 * t_end.max(1.0) => {
                    *flag = *flag || is_grid;
                }
                _ => merged.push((t, is_grid)),
            }
        }

        let mut stepper = Stepper::new(self.n, opts);
        let mut x = x0.to_vec();
        let mut states = Vec::with_capacity(opts.grid_points);
        let mut outputs = Vec::with_capacity(opts.grid_points);
        let mut times = Vec::with_capacity(opts.grid_points);
        let mut domain_exit = false;

        let mut record = |t: f64, x: &[f64], domain_exit: &mut bool| {
            times.push(t);
            states.push(x.to_vec());
            outputs.push(self.eval_output(x));
            if self.state_domain.violation(x) > opts.tol_domain {
                *domain_exit = true;
            }
        };
        record(0.0, &x, &mut domain_exit);

        let mut u_buf = vec![0.0; self.m];
        for w in merged.windows(2) {
            let (t0, _) = w[0];
            let (t1, is_grid) = w[1];
            if u.is_hold() {
                // Sample at the segment midpoint: node times may differ from
                // the exact breakpoint by merge fuzz, but hold signals are
                // constant on the open segment.
                u.eval_into(0.5 * (t0 + t1), &mut u_buf);
                let frozen = u_buf.clone();
                stepper.advance_to(|_t, y, dy| self.eval_field(y, &frozen, dy), t0, t1, &mut x)?;
            } else {
                let mut ub = vec![0.0; self.m];
                stepper.advance_to(
                    |t, y, dy| {
                        u.eval_into(t, &mut ub);
                        self.eval_field(y, &ub, dy);
                    },
                    t0,
                    t1,
                    &mut x,
                )?;
            }
            if is_grid {
                record(t1, &x, &mut domain_exit);
            }
        }

        Ok(Trajectory {
            times,
            states,
            outputs,
            input_ref: u.clone(),
            max_step_error: stepper.max_step_error,
            domain_exit,
        })
    }

    /// Central-difference Jacobians `A = df/dx` and `B = df/du` at a point.
    pub fn jacobian_fd(&self, x: &[f64], u: &[f64]) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        if x.len() != self.n || u.len() != self.m {
            return Err(Error::DimensionMismatch(
                "jacobian point does not match model dimensions".into(),
            ));
        }
        if !self.state_domain.contains(x, 1e-6) {
            return Err(Error::OutsideDomain(format!(
                "jacobian point {x:?} outside the state domain"
            )));
        }
        if !self.input_contains(u, 1e-6) {
            return Err(Error::OutsideDomain(format!(
                "jacobian input {u:?} outside the input box"
            )));
        }

        let mut a = vec![vec![0.0; self.n]; self.n];
        let mut b = vec![vec![0.0; self.m]; self.n];
        let mut xp = x.to_vec();
        let mut fp = vec![0.0; self.n];
        let mut fm = vec![0.0; self.n];

        for j in 0..self.n {
            let col = self.fd_column(
                |this: &Self, pt: &[f64], out: &mut [f64]| this.eval_field(pt, u, out),
                &mut xp,
                j,
                x[j],
                &mut fp,
                &mut fm,
            )?;
            for i in 0..self.n {
                a[i][j] = col[i];
            }
        }
        let mut up = u.to_vec();
        for j in 0..self.m {
            let col = self.fd_column(
                |this: &Self, pt: &[f64], out: &mut [f64]| this.eval_field(x, pt, out),
                &mut up,
                j,
                u[j],
                &mut fp,
                &mut fm,
            )?;
            for i in 0..self.n {
                b[i][j] = col[i];
            }
        }
        Ok((a, b))
    }

    /// One central-difference column with a single shrink-and-retry when the
    /// perturbed evaluation leaves the region where the field is finite.
    fn fd_column(
        &self,
        eval: impl Fn(&Self, &[f64], &mut [f64]),
        point: &mut [f64],
        j: usize,
        base: f64,
        fp: &mut [f64],
        fm: &mut [f64],
    ) -> Result<Vec<f64>> {
        let mut h = 1e-6 * (1.0 + base.abs());
        for attempt in 0..2 {
            point[j] = base + h;
            eval(self, point, fp);
            point[j] = base - h;
            eval(self, point, fm);
            point[j] = base;
            if fp.iter().chain(fm.iter()).all(|v| v.is_finite()) {
                return Ok(fp
                    .iter()
                    .zip(fm.iter())
                    .map(|(a, b)| (a - b) / (2.0 * h))
                    .collect());
            }
            if attempt == 0 {
                h /= 100.0;
            }
        }
        Err(Error::NonFinite(format!(
            "finite differences failed near coordinate {j} (field not finite)"
        )))
    }
}

/// Result of a numerical integration: states and outputs on a uniform grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub outputs: Vec<Vec<f64>>,
    pub input_ref: InputSignal,
    /// Largest local step-error estimate accepted by the integrator.
    pub max_step_error: f64,
    /// True when some grid state left the state domain by more than tol_domain.
    pub domain_exit: bool,
}

impl Trajectory {
    pub fn terminal_state(&self) -> &[f64] {
        self.states
            .last()
            .expect("trajectory has at least one sample")
    }

    pub fn terminal_output(&self) -> &[f64] {
        self.outputs
            .last()
            .expect("trajectory has at least one sample")
    }

    /// CSV with header `t,x1..xn,y1..yp`, 17 significant digits per value.
    pub fn to_csv(&self) -> String {
        let n = self.states.first().map_or(0, |s| s.len());
        let p = self.outputs.first().map_or(0, |o| o.len());
        let mut out = String::from("t");
        for i in 1..=n {
            out.push_str(&format!(",x{i}"));
        }
        for i in 1..=p {
            out.push_str(&format!(",y{i}"));
        }
        out.push('\n');
        for k in 0..self.times.len() {
            out.push_str(&format!("{:.16e}", self.times[k]));
            for v in &self.states[k] {
                out.push_str(&format!(",{v:.16e}"));
            }
            for v in &self.outputs[k] {
                out.push_str(&format!(",{v:.16e}"));
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn scalar_decay() -> SystemModel {
        SystemModel::parse(
            r#"{
                "n": 1, "m": 1, "p": 1,
                "params": {},
                "f": ["-x1 + u1"],
                "h": ["x1"],
                "state_domain": {"G": [[1.0], [-1.0]], "g": [10.0, 10.0]},
                "input_domain": {"lo": [0.0], "hi": [2.0]},
                "orders": {"state": [0], "input": [0], "output": [0]}
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn parse_simple_model() {
        let model = scalar_decay();
        assert_eq!(model.n(), 1);
        assert_eq!(model.m(), 1);
        let mut dx = [0.0];
        model.eval_field(&[1.0], &[0.0], &mut dx);
        assert_eq!(dx[0], -1.0);
    }

    #[test]
    fn undeclared_variable_in_model_file() {
        let r = SystemModel::parse(
            r#"{
                "n": 2, "m": 0, "p": 1,
                "f": ["-x1", "x3"],
                "h": ["x1"],
                "state_domain": {"G": [[1.0,0.0],[-1.0,0.0],[0.0,1.0],[0.0,-1.0]], "g": [1.0,1.0,1.0,1.0]},
                "input_domain": {"lo": [], "hi": []},
                "orders": {"state": [0,0], "input": [], "output": [0]}
            }"#,
        );
        assert!(matches!(r, Err(Error::UndeclaredVariable(ref s)) if s == "x3"));
    }

    #[test]
    fn division_pole_inside_domain_is_rejected() {
        // 1/x1 has a pole at x1 = 0, which lies inside the sampled domain.
        let r = SystemModel::parse(
            r#"{
                "n": 1, "m": 0, "p": 1,
                "f": ["1 / x1"],
                "h": ["x1"],
                "state_domain": {"G": [[1.0], [-1.0]], "g": [1.0, 1.0]},
                "input_domain": {"lo": [], "hi": []},
                "orders": {"state": [0], "input": [], "output": [0]}
            }"#,
        );
        assert!(matches!(r, Err(Error::NonFinite(_))));
    }

    #[test]
    fn integrate_exponential_decay() {
        let model = scalar_decay();
        let traj = model
            .integrate(
                &[1.0],
                &InputSignal::constant_scalar(0.0),
                1.0,
                &IntegrateOpts::default(),
            )
            .unwrap();
        let x1 = traj.terminal_state()[0];
        assert!((x1 - (-1.0f64).exp()).abs() < 1e-7);
        assert_eq!(traj.states[0], vec![1.0]);
        assert_eq!(traj.times.len(), 400);
        assert!(!traj.domain_exit);
    }

    #[test]
    fn semigroup_property_with_hold_input() {
        let model = scalar_decay();
        let u = InputSignal::PiecewiseConstant {
            breakpoints: vec![0.0, 0.2, 0.5, 0.8],
            values: vec![vec![1.0], vec![0.3], vec![1.7], vec![0.9]],
        };
        let opts = IntegrateOpts::default();
        let full = model.integrate(&[0.4], &u, 1.0, &opts).unwrap();
        let first = model.integrate(&[0.4], &u, 0.3, &opts).unwrap();
        let shifted = u.shift(0.3).unwrap();
        let second = model
            .integrate(first.terminal_state(), &shifted, 0.7, &opts)
            .unwrap();
        assert!(
            (second.terminal_state()[0] - full.terminal_state()[0]).abs() < 1e-6,
            "semigroup property violated"
        );
    }

    #[test]
    fn tolerance_scaling_of_global_error() {
        let model = scalar_decay();
        let u = InputSignal::constant_scalar(0.0);
        let exact = (-1.0f64).exp();
        let mut errs = Vec::new();
        for scale in [1.0, 0.5] {
            let opts = IntegrateOpts {
                abs_tol: 1e-7 * scale,
                rel_tol: 1e-5 * scale,
                ..Default::default()
            };
            let traj = model.integrate(&[1.0], &u, 1.0, &opts).unwrap();
            errs.push((traj.terminal_state()[0] - exact).abs().max(1e-16));
        }
        // error ~ tol: the ratio of error to tolerance stays within 10x.
        let c0 = errs[0] / 1e-5;
        let c1 = errs[1] / 5e-6;
        let ratio = (c0 / c1).max(c1 / c0);
        assert!(ratio < 10.0, "error does not track tolerance: {errs:?}");
    }

    #[test]
    fn time_invariance_with_shifted_tabulated_input() {
        let model = scalar_decay();
        let u = InputSignal::Tabulated {
            times: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            values: vec![vec![0.2], vec![1.4], vec![0.7], vec![1.9], vec![0.1]],
        };
        let opts = IntegrateOpts::default();
        let full = model.integrate(&[0.9], &u, 2.0, &opts).unwrap();
        // State at the shift time, then restart with the shifted input.
        let t_shift = 0.5;
        let head = model.integrate(&[0.9], &u, t_shift, &opts).unwrap();
        let tail = model
            .integrate(
                head.terminal_state(),
                &u.shift(t_shift).unwrap(),
                1.5,
                &opts,
            )
            .unwrap();
        assert!((tail.terminal_state()[0] - full.terminal_state()[0]).abs() < 1e-6);
    }

    #[test]
    fn jacobian_exact_on_linear_system() {
        let model = SystemModel::parse(
            r#"{
                "n": 1, "m": 1, "p": 1,
                "f": ["-2*x1 + u1"],
                "h": ["x1"],
                "state_domain": {"G": [[1.0], [-1.0]], "g": [5.0, 5.0]},
                "input_domain": {"lo": [0.0], "hi": [2.0]},
                "orders": {"state": [0], "input": [0], "output": [0]}
            }"#,
        )
        .unwrap();
        let (a, b) = model.jacobian_fd(&[0.7], &[1.0]).unwrap();
        assert!((a[0][0] + 2.0).abs() < 1e-9);
        assert!((b[0][0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn jacobian_matches_hand_derivative_of_square() {
        let model = SystemModel::parse(
            r#"{
                "n": 1, "m": 0, "p": 1,
                "f": ["x1^2"],
                "h": ["x1"],
                "state_domain": {"G": [[1.0], [-1.0]], "g": [5.0, 5.0]},
                "input_domain": {"lo": [], "hi": []},
                "orders": {"state": [0], "input": [], "output": [0]}
            }"#,
        )
        .unwrap();
        let (a, _) = model.jacobian_fd(&[3.0], &[]).unwrap();
        assert!((a[0][0] - 6.0).abs() < 1e-6);
    }

    #[test]
    fn jacobian_on_quadratic_planar_field() {
        let model = SystemModel::parse(
            r#"{
                "n": 2, "m": 0, "p": 1,
                "f": ["x1^2 - 2*x1*x2", "3*x2^2 + x1"],
                "h": ["x1"],
                "state_domain": {"G": [[1.0,0.0],[-1.0,0.0],[0.0,1.0],[0.0,-1.0]], "g": [4.0,4.0,4.0,4.0]},
                "input_domain": {"lo": [], "hi": []},
                "orders": {"state": [0,0], "input": [], "output": [0]}
            }"#,
        )
        .unwrap();
        let (x1, x2) = (1.3, -0.4);
        let (a, _) = model.jacobian_fd(&[x1, x2], &[]).unwrap();
        let expect = [[2.0 * x1 - 2.0 * x2, -2.0 * x1], [1.0, 6.0 * x2]];
        for i in 0..2 {
            for j in 0..2 {
                let rel = (a[i][j] - expect[i][j]).abs() / (1.0 + expect[i][j].abs());
                assert!(rel < 1e-6, "A[{i}][{j}] = {} vs {}", a[i][j], expect[i][j]);
            }
        }
    }

    #[test]
    fn domain_exit_flag_fires() {
        let model = SystemModel::parse(
            r#"{
                "n": 1, "m": 0, "p": 1,
                "f": ["x1"],
                "h": ["x1"],
                "state_domain": {"G": [[1.0], [-1.0]], "g": [1.0, 1.0]},
                "input_domain": {"lo": [], "hi": []},
                "orders": {"state": [0], "input": [], "output": [0]}
            }"#,
        )
        .unwrap();
        let traj = model
            .integrate(
                &[0.5],
                &InputSignal::Constant(vec![]),
                2.0,
                &IntegrateOpts::default(),
            )
            .unwrap();
        assert!(traj.domain_exit, "x = 0.5 e^t leaves [-1, 1]");
    }

    #[test]
    fn csv_round_trips_at_full_precision() {
        let model = scalar_decay();
        let traj = model
            .integrate(
                &[0.3],
                &InputSignal::constant_scalar(1.0),
                1.0,
                &IntegrateOpts {
                    grid_points: 10,
                    ..Default::default()
                },
            )
            .unwrap();
        let csv = traj.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t,x1,y1"));
        for (k, line) in lines.enumerate() {
            let cols: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
            assert_eq!(cols[0], traj.times[k]);
            assert_eq!(cols[1], traj.states[k][0]);
            assert_eq!(cols[2], traj.outputs[k][0]);
        }
    }
}
