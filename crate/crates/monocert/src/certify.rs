//! Monotonicity certification and falsification.
//!
//! Every test here is a sampling certificate, not a proof: the underlying
//! conditions are universally quantified over the domain, and we check them
//! at finitely many reproducible sample points. Falsifications are genuine
//! counterexamples and always re-verify.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::integrate::IntegrateOpts;
use crate::model::SystemModel;
use crate::order::OrthantOrder;
use crate::signal::InputSignal;

/// Slack for Jacobian sign and Kamke inequalities.
pub const TOL_CERT: f64 = 1e-8;
/// Slack for trajectory order comparisons (absorbs integration error).
pub const TOL_TRAJ: f64 = 1e-6;

/// Reproducible sampling configuration. Samples are drawn uniformly in the
/// relevant polytope by rejection from its bounding box.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplePlan {
    pub seed: u64,
    pub n_points: usize,
    /// Kamke test: probability that a coordinate joins the tied active set.
    /// Containment test: share of starts placed on domain facets.
    pub boundary_fraction: f64,
}

impl Default for SamplePlan {
    fn default() -> Self {
        Self {
            seed: 42,
            n_points: 2000,
            boundary_fraction: 0.5,
        }
    }
}

impl SamplePlan {
    pub fn new(seed: u64, n_points: usize) -> Self {
        Self {
            seed,
            n_points,
            ..Default::default()
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Certified,
    Falsified,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    SignPattern,
    Kamke,
    Trajectory,
    Competitive,
    IncrementalPositivity,
    Invariance,
    Containment,
}

/// A stored violation. `x`/`u` always hold the primary sample point; pair
/// tests add the second point, trajectory tests add the input signals and
/// the first violation time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Counterexample {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x2: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u2: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub signal: Option<InputSignal>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub signal2: Option<InputSignal>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub row: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub col: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub facet: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entry: Option<String>,
    /// The violating margin (negative beyond tolerance).
    pub value: f64,
}

impl Counterexample {
    fn at_point(x: Vec<f64>, u: Vec<f64>) -> Self {
        Self {
            x,
            u,
            x2: None,
            u2: None,
            signal: None,
            signal2: None,
            row: None,
            col: None,
            time: None,
            facet: None,
            entry: None,
            value: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificationReport {
    pub verdict: Verdict,
    pub condition: Condition,
    pub n_checked: usize,
    /// Most negative slack observed across all checks.
    pub worst_margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
    /// Scope caveat, e.g. that a certificate covers sampled points only.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl CertificationReport {
    fn certified(condition: Condition, n_checked: usize, worst_margin: f64) -> Self {
        Self {
            verdict: Verdict::Certified,
            condition,
            n_checked,
            worst_margin,
            counterexample: None,
            note: None,
        }
    }

    fn falsified(
        condition: Condition,
        n_checked: usize,
        worst_margin: f64,
        ce: Counterexample,
    ) -> Self {
        Self {
            verdict: Verdict::Falsified,
            condition,
            n_checked,
            worst_margin,
            counterexample: Some(ce),
            note: None,
        }
    }
}

// ---------------------------------------------------------------------------
// Conjugation to cooperative coordinates
// ---------------------------------------------------------------------------

fn flip_expr_state(order: &OrthantOrder, i: usize) -> Expr {
    if order.sign(i) < 0.0 {
        Expr::Neg(Box::new(Expr::State(i)))
    } else {
        Expr::State(i)
    }
}

fn flip_expr_input(order: &OrthantOrder, j: usize) -> Expr {
    if order.sign(j) < 0.0 {
        Expr::Neg(Box::new(Expr::Input(j)))
    } else {
        Expr::Input(j)
    }
}

/// Change of variables `z = Px`, `v = Qu`, `w = Ry` with the diagonal sign
/// matrices of the model's orders. The returned model has the same dynamics
/// in the new coordinates and all orders set to the standard orthants.
pub fn conjugate_to_cooperative(model: &SystemModel) -> Result<SystemModel> {
    let so = model.state_order().clone();
    let io = model.input_order().clone();
    let oo = model.output_order().clone();

    let state_sub = |i: usize| flip_expr_state(&so, i);
    let input_sub = |j: usize| flip_expr_input(&io, j);

    let f: Vec<Expr> = model
        .field_exprs()
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let sub = e.substitute(&state_sub, &input_sub);
            if so.sign(i) < 0.0 {
                sub.negated()
            } else {
                sub
            }
        })
        .collect();
    let h: Vec<Expr> = model
        .output_exprs()
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let sub = e.substitute(&state_sub, &|j| Expr::Input(j));
            if oo.sign(k) < 0.0 {
                sub.negated()
            } else {
                sub
            }
        })
        .collect();

    let state_signs: Vec<f64> = (0..model.n()).map(|i| so.sign(i)).collect();
    let state_domain = model.state_domain().conjugate_diag(&state_signs)?;
    let (lo, hi) = model.input_box();
    let mut new_lo = vec![0.0; model.m()];
    let mut new_hi = vec![0.0; model.m()];
    for j in 0..model.m() {
        if io.sign(j) < 0.0 {
            new_lo[j] = -hi[j];
            new_hi[j] = -lo[j];
        } else {
            new_lo[j] = lo[j];
            new_hi[j] = hi[j];
        }
    }

    SystemModel::from_parts(
        f,
        h,
        state_domain,
        new_lo,
        new_hi,
        OrthantOrder::standard(model.n()),
        OrthantOrder::standard(model.m()),
        OrthantOrder::standard(model.p()),
        model.params().clone(),
    )
}

/// The time-reversed system `dx/dt = -f(x, u)` with unchanged orders.
pub fn negated_field_model(model: &SystemModel) -> Result<SystemModel> {
    let f = model.field_exprs().iter().map(|e| e.negated()).collect();
    let (lo, hi) = model.input_box();
    SystemModel::from_parts(
        f,
        model.output_exprs().to_vec(),
        model.state_domain().clone(),
        lo.to_vec(),
        hi.to_vec(),
        model.state_order().clone(),
        model.input_order().clone(),
        model.output_order().clone(),
        model.params().clone(),
    )
}

// ---------------------------------------------------------------------------
// Sign-pattern (Jacobian) certification
// ---------------------------------------------------------------------------

/// Worst signed slack of the orthant sign conditions on `(A, B)` and its
/// location: `(-1)^(eps_i + eps_j) A_ij >= 0` off-diagonal and
/// `(-1)^(eps_i + delta_j) B_ij >= 0` everywhere.
fn jacobian_margins(
    model: &SystemModel,
    a: &[Vec<f64>],
    b: &[Vec<f64>],
) -> (f64, usize, usize, bool) {
    let so = model.state_order();
    let io = model.input_order();
    let mut worst = f64::INFINITY;
    let (mut wi, mut wj, mut in_b) = (0, 0, false);
    for i in 0..model.n() {
        for j in 0..model.n() {
            if i == j {
                continue;
            }
            let slack = so.sign(i) * so.sign(j) * a[i][j];
            if slack < worst {
                worst = slack;
                (wi, wj, in_b) = (i, j, false);
            }
        }
        for j in 0..model.m() {
            let slack = so.sign(i) * io.sign(j) * b[i][j];
            if slack < worst {
                worst = slack;
                (wi, wj, in_b) = (i, j, true);
            }
        }
    }
    (worst, wi, wj, in_b)
}

/// Sample interior points and certify the orthant sign pattern of the
/// Jacobians; this is the differential test for monotonicity.
pub fn sign_pattern_certify(
    model: &SystemModel,
    plan: &SamplePlan,
    tol_cert: f64,
) -> Result<CertificationReport> {
    let mut rng = plan.rng();
    let mut worst = f64::INFINITY;
    for k in 0..plan.n_points {
        let x = model.state_domain().sample_interior(&mut rng)?;
        let u = model.sample_input(&mut rng);
        let (a, b) = model.jacobian_fd(&x, &u)?;
        let (slack, i, j, in_b) = jacobian_margins(model, &a, &b);
        worst = worst.min(slack);
        if slack < -tol_cert {
            let mut ce = Counterexample::at_point(x, u);
            ce.row = Some(i + 1);
            ce.col = Some(j + 1);
            ce.entry = Some(if in_b {
                format!("df{}/du{}", i + 1, j + 1)
            } else {
                format!("df{}/dx{}", i + 1, j + 1)
            });
            ce.value = slack;
            return Ok(CertificationReport::falsified(
                Condition::SignPattern,
                k + 1,
                worst,
                ce,
            ));
        }
    }
    Ok(CertificationReport::certified(
        Condition::SignPattern,
        plan.n_points,
        worst,
    ))
}

// ---------------------------------------------------------------------------
// Kamke boundary test
// ---------------------------------------------------------------------------

/// Sample ordered pairs that tie on a random active set and check the
/// boundary condition on the field components, in cooperative coordinates.
pub fn kamke_test(
    model: &SystemModel,
    plan: &SamplePlan,
    tol_cert: f64,
) -> Result<CertificationReport> {
    let conj = conjugate_to_cooperative(model)?;
    let so = model.state_order().clone();
    let io = model.input_order().clone();
    let n = model.n();
    let m = model.m();
    let (lo, hi) = conj.input_box();
    let (lo, hi) = (lo.to_vec(), hi.to_vec());
    let mut rng = plan.rng();

    let mut worst = f64::INFINITY;
    let mut checked = 0usize;
    let mut attempts = 0usize;
    let max_attempts = 50 * plan.n_points.max(1);

    let mut f1 = vec![0.0; n];
    let mut f2 = vec![0.0; n];

    while checked < plan.n_points && attempts < max_attempts {
        attempts += 1;
        // Sample index 0 is the sanity pair: equal states, equal inputs,
        // every coordinate tied; its margin is exactly zero.
        let (z2, z1, active, v2, v1) = if checked == 0 {
            let c = conj.state_domain().chebyshev_center().to_vec();
            let vc = conj.center_input();
            (c.clone(), c, (0..n).collect::<Vec<_>>(), vc.clone(), vc)
        } else {
            let z2 = conj.state_domain().sample_interior(&mut rng)?;
            let mut active: Vec<usize> = (0..n)
                .filter(|_| rng.gen_bool(plan.boundary_fraction))
                .collect();
            if active.is_empty() {
                active.push(rng.gen_range(0..n));
            }
            let mut dir = vec![0.0; n];
            let mut any = false;
            for i in 0..n {
                if !active.contains(&i) {
                    dir[i] = rng.gen_range(0.0..1.0);
                    any = true;
                }
            }
            let z1 = if any {
                let lambda_max = conj.state_domain().max_step(&z2, &dir);
                if lambda_max <= 1e-12 {
                    continue;
                }
                let lambda = rng.gen_range(0.0..lambda_max);
                z2.iter().zip(&dir).map(|(a, d)| a + lambda * d).collect()
            } else {
                z2.clone()
            };
            let mut v2 = vec![0.0; m];
            let mut v1 = vec![0.0; m];
            for j in 0..m {
                v2[j] = if lo[j] == hi[j] {
                    lo[j]
                } else {
                    rng.gen_range(lo[j]..=hi[j])
                };
                let inc = if hi[j] > v2[j] {
                    rng.gen_range(0.0..(hi[j] - v2[j]))
                } else {
                    0.0
                };
                v1[j] = v2[j] + inc;
            }
            (z2, z1, active, v2, v1)
        };

        conj.eval_field(&z1, &v1, &mut f1);
        conj.eval_field(&z2, &v2, &mut f2);
        let mut pair_worst = f64::INFINITY;
        let mut pair_i = 0;
        for &i in &active {
            let margin = f1[i] - f2[i];
            if margin < pair_worst {
                pair_worst = margin;
                pair_i = i;
            }
        }
        worst = worst.min(pair_worst);
        checked += 1;

        if pair_worst < -tol_cert {
            // Map the pair back to original coordinates.
            let x1 = so.flip(&z1);
            let x2 = so.flip(&z2);
            let u1 = io.flip(&v1);
            let u2 = io.flip(&v2);
            let mut ce = Counterexample::at_point(x1, u1);
            ce.x2 = Some(x2);
            ce.u2 = Some(u2);
            ce.row = Some(pair_i + 1);
            ce.entry = Some(format!("f{} at tied coordinate", pair_i + 1));
            ce.value = pair_worst;
            return Ok(CertificationReport::falsified(
                Condition::Kamke,
                checked,
                worst,
                ce,
            ));
        }
    }

    if checked < plan.n_points.div_euclid(10).max(1) {
        return Err(Error::DomainTooThin {
            found: checked,
            wanted: plan.n_points,
        });
    }
    Ok(CertificationReport::certified(
        Condition::Kamke,
        checked,
        worst,
    ))
}

// ---------------------------------------------------------------------------
// Trajectory property test
// ---------------------------------------------------------------------------

fn ordered_state_pair<R: Rng>(model: &SystemModel, rng: &mut R) -> Result<(Vec<f64>, Vec<f64>)> {
    let so = model.state_order();
    let x2 = model.state_domain().sample_interior(rng)?;
    let dir: Vec<f64> = (0..model.n())
        .map(|i| so.sign(i) * rng.gen_range(0.0..1.0))
        .collect();
    let lambda_max = model.state_domain().max_step(&x2, &dir);
    let lambda = if lambda_max > 0.0 {
        rng.gen_range(0.0..lambda_max)
    } else {
        0.0
    };
    let x1 = x2.iter().zip(&dir).map(|(a, d)| a + lambda * d).collect();
    Ok((x1, x2))
}

fn ordered_input_pair<R: Rng>(
    model: &SystemModel,
    horizon: f64,
    rng: &mut R,
) -> (InputSignal, InputSignal) {
    let io = model.input_order();
    let (lo, hi) = model.input_box();
    let m = model.m();
    let mut breaks = vec![0.0];
    for _ in 0..3 {
        breaks.push(rng.gen_range(0.0..horizon));
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let mut v_lo = Vec::new();
    let mut v_hi = Vec::new();
    for _ in 0..breaks.len() {
        let mut u2 = vec![0.0; m];
        let mut u1 = vec![0.0; m];
        for j in 0..m {
            u2[j] = if lo[j] == hi[j] {
                lo[j]
            } else {
                rng.gen_range(lo[j]..=hi[j])
            };
            // Step in the input order's positive direction, staying in the box.
            if io.sign(j) > 0.0 {
                let room = hi[j] - u2[j];
                u1[j] = u2[j]
                    + if room > 0.0 {
                        rng.gen_range(0.0..room)
                    } else {
                        0.0
                    };
            } else {
                let room = u2[j] - lo[j];
                u1[j] = u2[j]
                    - if room > 0.0 {
                        rng.gen_range(0.0..room)
                    } else {
                        0.0
                    };
            }
        }
        v_lo.push(u2);
        v_hi.push(u1);
    }
    (
        InputSignal::PiecewiseConstant {
            breakpoints: breaks.clone(),
            values: v_hi,
        },
        InputSignal::PiecewiseConstant {
            breakpoints: breaks,
            values: v_lo,
        },
    )
}

/// Integrate ordered pairs of initial states under ordered piecewise-constant
/// inputs and check order preservation of the flows at every grid time.
pub fn trajectory_monotonicity_test(
    model: &SystemModel,
    plan: &SamplePlan,
    horizon: f64,
    tol_traj: f64,
) -> Result<CertificationReport> {
    let so = model.state_order().clone();
    let opts = IntegrateOpts::default();
    let mut rng = plan.rng();
    let mut worst = f64::INFINITY;

    for k in 0..plan.n_points {
        let (x1, x2, u1, u2) = if k == 0 {
            let c = model.state_domain().chebyshev_center().to_vec();
            let uc = InputSignal::Constant(model.center_input());
            (c.clone(), c, uc.clone(), uc)
        } else {
            let (x1, x2) = ordered_state_pair(model, &mut rng)?;
            let (u1, u2) = ordered_input_pair(model, horizon, &mut rng);
            (x1, x2, u1, u2)
        };

        let t1 = model.integrate(&x1, &u1, horizon, &opts)?;
        let t2 = model.integrate(&x2, &u2, horizon, &opts)?;
        for (idx, t) in t1.times.iter().enumerate() {
            let margin = so.margin(&t1.states[idx], &t2.states[idx])?;
            worst = worst.min(margin);
            if margin < -tol_traj {
                let coord = (0..model.n())
                    .min_by(|&a, &b| {
                        let ma = so.sign(a) * (t1.states[idx][a] - t2.states[idx][a]);
                        let mb = so.sign(b) * (t1.states[idx][b] - t2.states[idx][b]);
                        ma.partial_cmp(&mb).unwrap()
                    })
                    .unwrap();
                let mut ce = Counterexample::at_point(x1, u1.value_at(0.0));
                ce.x2 = Some(x2);
                ce.u2 = Some(u2.value_at(0.0));
                ce.signal = Some(u1);
                ce.signal2 = Some(u2);
                ce.time = Some(*t);
                ce.row = Some(coord + 1);
                ce.value = margin;
                return Ok(CertificationReport::falsified(
                    Condition::Trajectory,
                    k + 1,
                    worst,
                    ce,
                ));
            }
        }
    }
    Ok(CertificationReport::certified(
        Condition::Trajectory,
        plan.n_points,
        worst,
    ))
}

// ---------------------------------------------------------------------------
// Competitive dynamics
// ---------------------------------------------------------------------------

/// Certify monotonicity in backward time: the sign-pattern and Kamke tests
/// applied to the time-reversed field `-f`. After conjugation the conditions
/// read `df_i/dx_j <= 0` off-diagonal and `df_i/du_j <= 0`.
pub fn competitive_test(
    model: &SystemModel,
    plan: &SamplePlan,
    tol_cert: f64,
) -> Result<CertificationReport> {
    let reversed = negated_field_model(model)?;
    let sign = sign_pattern_certify(&reversed, plan, tol_cert)?;
    if sign.verdict == Verdict::Falsified {
        return Ok(CertificationReport {
            condition: Condition::Competitive,
            ..sign
        });
    }
    let kamke = kamke_test(&reversed, plan, tol_cert)?;
    Ok(CertificationReport {
        verdict: kamke.verdict,
        condition: Condition::Competitive,
        n_checked: sign.n_checked + kamke.n_checked,
        worst_margin: sign.worst_margin.min(kamke.worst_margin),
        counterexample: kamke.counterexample,
        note: None,
    })
}

// ---------------------------------------------------------------------------
// Incremental positivity
// ---------------------------------------------------------------------------

/// Along sampled trajectories with constant inputs, check that the
/// conjugated linearization `P A(t) P` is Metzler and `P B(t) Q` is
/// entrywise nonnegative, within tolerance.
pub fn incremental_positivity_test(
    model: &SystemModel,
    plan: &SamplePlan,
    horizon: f64,
    tol_cert: f64,
) -> Result<CertificationReport> {
    let opts = IntegrateOpts::default();
    let mut rng = plan.rng();
    let mut worst = f64::INFINITY;
    let mut checked = 0usize;

    for _ in 0..plan.n_points {
        let x0 = model.state_domain().sample_interior(&mut rng)?;
        let u = model.sample_input(&mut rng);
        let traj = model.integrate(&x0, &InputSignal::Constant(u.clone()), horizon, &opts)?;
        let stride = (traj.times.len() / 25).max(1);
        for idx in (0..traj.times.len()).step_by(stride) {
            let x = &traj.states[idx];
            // Trajectories may graze the boundary; clip the jacobian point in.
            let x = model.state_domain().clip_inside(x);
            let (a, b) = model.jacobian_fd(&x, &u)?;
            let (slack, i, j, in_b) = jacobian_margins(model, &a, &b);
            worst = worst.min(slack);
            checked += 1;
            if slack < -tol_cert {
                let mut ce = Counterexample::at_point(x, u);
                ce.row = Some(i + 1);
                ce.col = Some(j + 1);
                ce.time = Some(traj.times[idx]);
                ce.entry = Some(if in_b {
                    format!("(PBQ)[{}][{}]", i + 1, j + 1)
                } else {
                    format!("(PAP)[{}][{}]", i + 1, j + 1)
                });
                ce.value = slack;
                return Ok(CertificationReport::falsified(
                    Condition::IncrementalPositivity,
                    checked,
                    worst,
                    ce,
                ));
            }
        }
    }
    Ok(CertificationReport::certified(
        Condition::IncrementalPositivity,
        checked,
        worst,
    ))
}

// ---------------------------------------------------------------------------
// Counterexample re-verification
// ---------------------------------------------------------------------------

/// Recompute the stored counterexample's margin against the model. Returns
/// the reproduced margin; a falsified report is sound when this stays below
/// `-tol`.
pub fn reverify(report: &CertificationReport, model: &SystemModel) -> Result<f64> {
    let Some(ce) = &report.counterexample else {
        return Err(Error::Precondition("report has no counterexample".into()));
    };
    match report.condition {
        Condition::SignPattern | Condition::IncrementalPositivity => {
            let (a, b) = model.jacobian_fd(&ce.x, &ce.u)?;
            Ok(jacobian_margins(model, &a, &b).0)
        }
        Condition::Kamke => {
            let x2 = ce.x2.as_ref().ok_or_else(|| {
                Error::Precondition("Kamke counterexample lacks the second point".into())
            })?;
            let u2 = ce.u2.as_deref().unwrap_or(&ce.u);
            kamke_margin_original(model, &ce.x, x2, &ce.u, u2)
        }
        Condition::Trajectory => {
            let x2 = ce.x2.as_ref().ok_or_else(|| {
                Error::Precondition("trajectory counterexample lacks the second point".into())
            })?;
            let (s1, s2) = match (&ce.signal, &ce.signal2) {
                (Some(a), Some(b)) => (a.clone(), b.clone()),
                _ => (
                    InputSignal::Constant(ce.u.clone()),
                    InputSignal::Constant(ce.u.clone()),
                ),
            };
            let horizon = ce.time.unwrap_or(1.0).max(1e-3) * 1.05;
            let t1 = model.integrate(&ce.x, &s1, horizon, &IntegrateOpts::default())?;
            let t2 = model.integrate(x2, &s2, horizon, &IntegrateOpts::default())?;
            let so = model.state_order();
            let mut worst = f64::INFINITY;
            for idx in 0..t1.times.len() {
                worst = worst.min(so.margin(&t1.states[idx], &t2.states[idx])?);
            }
            Ok(worst)
        }
        Condition::Competitive => {
            let reversed = negated_field_model(model)?;
            if let Some(x2) = &ce.x2 {
                let u2 = ce.u2.as_deref().unwrap_or(&ce.u);
                kamke_margin_original(&reversed, &ce.x, x2, &ce.u, u2)
            } else {
                let (a, b) = reversed.jacobian_fd(&ce.x, &ce.u)?;
                Ok(jacobian_margins(&reversed, &a, &b).0)
            }
        }
        Condition::Invariance | Condition::Containment => Err(Error::Precondition(
            "invariance counterexamples are re-verified by the invariance module".into(),
        )),
    }
}

/// Kamke margin in original coordinates over the tied active set of the pair.
fn kamke_margin_original(
    model: &SystemModel,
    x1: &[f64],
    x2: &[f64],
    u1: &[f64],
    u2: &[f64],
) -> Result<f64> {
    let so = model.state_order();
    let f1 = model.field_at(x1, u1);
    let f2 = model.field_at(x2, u2);
    let mut worst = f64::INFINITY;
    for i in 0..model.n() {
        if x1[i] == x2[i] {
            worst = worst.min(so.sign(i) * (f1[i] - f2[i]));
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn box_model(f: &[&str], eps: &[u8], m: usize, delta: &[u8]) -> SystemModel {
        let n = f.len();
        let mut g = Vec::new();
        let mut rhs = Vec::new();
        for i in 0..n {
            let mut row = vec![0.0; n];
            row[i] = 1.0;
            g.push(row.clone());
            rhs.push(2.0);
            row[i] = -1.0;
            g.push(row);
            rhs.push(2.0);
        }
        let json = serde_json::json!({
            "n": n, "m": m, "p": 1,
            "f": f,
            "h": ["x1"],
            "state_domain": {"G": g, "g": rhs},
            "input_domain": {"lo": vec![0.0; m], "hi": vec![1.0; m]},
            "orders": {"state": eps, "input": delta, "output": [0]}
        });
        SystemModel::parse(&json.to_string()).unwrap()
    }

    fn cooperative_toy() -> SystemModel {
        box_model(&["-x1 + x2", "x1 - x2"], &[0, 0], 0, &[])
    }

    fn noncoop_toy() -> SystemModel {
        box_model(&["-x1 - x2", "x1 - x2"], &[0, 0], 0, &[])
    }

    #[test]
    fn cooperative_toy_certified_by_all_tests() {
        let m = cooperative_toy();
        let plan = SamplePlan::new(42, 200);
        let r1 = sign_pattern_certify(&m, &plan, TOL_CERT).unwrap();
        assert_eq!(r1.verdict, Verdict::Certified);
        assert!(r1.worst_margin >= -TOL_CERT);
        let r2 = kamke_test(&m, &plan, TOL_CERT).unwrap();
        assert_eq!(r2.verdict, Verdict::Certified);
        let r3 = trajectory_monotonicity_test(&m, &SamplePlan::new(42, 25), 5.0, TOL_TRAJ).unwrap();
        assert_eq!(r3.verdict, Verdict::Certified);
    }

    #[test]
    fn noncooperative_toy_falsified_with_reverifying_counterexample() {
        let m = noncoop_toy();
        let plan = SamplePlan::new(42, 200);
        let r = sign_pattern_certify(&m, &plan, TOL_CERT).unwrap();
        assert_eq!(r.verdict, Verdict::Falsified);
        let ce = r.counterexample.as_ref().unwrap();
        assert!(
            (ce.value - (-1.0)).abs() < 1e-6,
            "A12 = -1 expected, got {}",
            ce.value
        );
        assert!(reverify(&r, &m).unwrap() < -TOL_CERT);

        let r = kamke_test(&m, &plan, TOL_CERT).unwrap();
        assert_eq!(r.verdict, Verdict::Falsified);
        assert!(reverify(&r, &m).unwrap() < -TOL_CERT);

        let r = trajectory_monotonicity_test(&m, &SamplePlan::new(42, 25), 5.0, TOL_TRAJ).unwrap();
        assert_eq!(r.verdict, Verdict::Falsified);
        let t = r.counterexample.as_ref().unwrap().time.unwrap();
        assert!(t < 5.0, "violation should appear before t = 5, got {t}");
        assert!(reverify(&r, &m).unwrap() < -TOL_TRAJ);
    }

    #[test]
    fn explicit_kamke_pair_for_noncooperative_toy() {
        // xi1 = (0, 1) >= xi2 = (0, 0) tie at coordinate 1:
        // f1(xi1) - f1(xi2) = -1.
        let m = noncoop_toy();
        let margin = kamke_margin_original(&m, &[0.0, 1.0], &[0.0, 0.0], &[], &[]).unwrap();
        assert!((margin + 1.0).abs() < 1e-12);
    }

    #[test]
    fn competitive_verdicts() {
        // Off-diagonals -1: competitive, not cooperative.
        let comp = box_model(&["-x1 - x2", "-x1 - x2"], &[0, 0], 0, &[]);
        let plan = SamplePlan::new(42, 200);
        let r = competitive_test(&comp, &plan, TOL_CERT).unwrap();
        assert_eq!(r.verdict, Verdict::Certified);
        assert_eq!(r.condition, Condition::Competitive);
        let r = sign_pattern_certify(&comp, &plan, TOL_CERT).unwrap();
        assert_eq!(r.verdict, Verdict::Falsified);

        // Diagonal system: both monotone and competitive.
        let diag = box_model(&["-x1", "-2*x2"], &[0, 0], 0, &[]);
        assert_eq!(
            competitive_test(&diag, &plan, TOL_CERT).unwrap().verdict,
            Verdict::Certified
        );
        assert_eq!(
            sign_pattern_certify(&diag, &plan, TOL_CERT)
                .unwrap()
                .verdict,
            Verdict::Certified
        );
    }

    #[test]
    fn incremental_positivity_on_linear_systems() {
        let plan = SamplePlan::new(42, 10);
        // Metzler A = [[-1, 2], [0, -3]], B = [[1], [0]].
        let metzler = box_model(&["-x1 + 2*x2 + u1", "-3*x2"], &[0, 0], 1, &[0]);
        let r = incremental_positivity_test(&metzler, &plan, 5.0, TOL_CERT).unwrap();
        assert_eq!(r.verdict, Verdict::Certified);

        // A12 = -2 breaks the Metzler property.
        let not_metzler = box_model(&["-x1 - 2*x2 + u1", "-3*x2"], &[0, 0], 1, &[0]);
        let r = incremental_positivity_test(&not_metzler, &plan, 5.0, TOL_CERT).unwrap();
        assert_eq!(r.verdict, Verdict::Falsified);
        let ce = r.counterexample.as_ref().unwrap();
        assert_eq!((ce.row, ce.col), (Some(1), Some(2)));
        assert!(reverify(&r, &not_metzler).unwrap() < -TOL_CERT);
    }

    #[test]
    fn conjugation_identity_for_standard_orders() {
        let m = cooperative_toy();
        let c = conjugate_to_cooperative(&m).unwrap();
        let x = [0.3, -0.7];
        assert_eq!(m.field_at(&x, &[]), c.field_at(&x, &[]));
    }

    #[test]
    fn conjugation_round_trips_field_values_exactly() {
        // P g(P x, Q u) = f(x, u) bit-exactly: only sign flips are involved.
        let m = box_model(&["-x1 - x2 + u1", "-x1 - x2"], &[1, 0], 1, &[1]);
        let c = conjugate_to_cooperative(&m).unwrap();
        let so = m.state_order().clone();
        let io = m.input_order().clone();
        for (x, u) in [
            ([0.4, -0.2], [0.5]),
            ([-1.1, 0.9], [0.2]),
            ([0.0, 0.0], [1.0]),
        ] {
            let g = c.field_at(&so.flip(&x), &io.flip(&u));
            assert_eq!(so.flip(&g), m.field_at(&x, &u));
        }
        // Conjugating the already-standard model is the identity map.
        let cc = conjugate_to_cooperative(&c).unwrap();
        let x = [0.4, -0.2];
        assert_eq!(c.field_at(&x, &[0.5]), cc.field_at(&x, &[0.5]));
    }

    #[test]
    fn conjugated_sign_flipped_model_is_cooperative() {
        // Monotone for eps = (1, 0), delta = (1).
        let m = box_model(&["-x1 - x2 + u1", "-x1 - x2"], &[1, 0], 1, &[1]);
        let plan = SamplePlan::new(42, 200);
        assert_eq!(
            sign_pattern_certify(&m, &plan, TOL_CERT).unwrap().verdict,
            Verdict::Certified
        );
        let c = conjugate_to_cooperative(&m).unwrap();
        assert_eq!(
            sign_pattern_certify(&c, &plan, TOL_CERT).unwrap().verdict,
            Verdict::Certified
        );
    }

    #[test]
    fn conjugation_duality_of_verdicts() {
        // The verdict of every test is unchanged by passing to cooperative
        // coordinates, for monotone and non-monotone models alike.
        let monotone = box_model(&["-x1 - x2 + u1", "-x1 - x2"], &[1, 0], 1, &[1]);
        let broken = box_model(&["-x1 + x2 + u1", "-x1 - x2"], &[1, 0], 1, &[1]);
        let plan = SamplePlan::new(42, 200);
        for m in [&monotone, &broken] {
            let c = conjugate_to_cooperative(m).unwrap();
            assert_eq!(
                sign_pattern_certify(m, &plan, TOL_CERT).unwrap().verdict,
                sign_pattern_certify(&c, &plan, TOL_CERT).unwrap().verdict
            );
            assert_eq!(
                kamke_test(m, &plan, TOL_CERT).unwrap().verdict,
                kamke_test(&c, &plan, TOL_CERT).unwrap().verdict
            );
            let tplan = SamplePlan::new(42, 20);
            assert_eq!(
                trajectory_monotonicity_test(m, &tplan, 5.0, TOL_TRAJ)
                    .unwrap()
                    .verdict,
                trajectory_monotonicity_test(&c, &tplan, 5.0, TOL_TRAJ)
                    .unwrap()
                    .verdict
            );
        }
    }

    #[test]
    fn reports_are_deterministic_for_a_seed() {
        let m = noncoop_toy();
        let plan = SamplePlan::new(7, 300);
        let a = serde_json::to_string(&sign_pattern_certify(&m, &plan, TOL_CERT).unwrap()).unwrap();
        let b = serde_json::to_string(&sign_pattern_certify(&m, &plan, TOL_CERT).unwrap()).unwrap();
        assert_eq!(a, b);
        let a = serde_json::to_string(&kamke_test(&m, &plan, TOL_CERT).unwrap()).unwrap();
        let b = serde_json::to_string(&kamke_test(&m, &plan, TOL_CERT).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
