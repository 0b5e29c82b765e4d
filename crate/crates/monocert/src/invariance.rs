//! Forward-invariance certification of polytope state sets.
//!
//! The test instantiates the tangent-cone inclusion at sampled boundary
//! points: at each, the field must not point outward along any active
//! constraint. A dynamic containment check cross-validates by integrating
//! from sampled starts.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::certify::{CertificationReport, Condition, Counterexample, SamplePlan, Verdict};
use crate::error::{Error, Result};
use crate::integrate::IntegrateOpts;
use crate::linalg;
use crate::model::SystemModel;
use crate::order::TOL_ACTIVE;
use crate::polytope::Polytope;
use crate::signal::InputSignal;

/// Slack for tangent-cone inequalities `G_i . v <= tol`.
pub const TOL_CONE: f64 = 1e-8;
/// Boundary-exit slack for containment checks.
pub const TOL_DOMAIN: f64 = 1e-6;

/// Inputs sampled per polytope vertex in the invariance certificate.
const INPUTS_PER_VERTEX: usize = 16;

/// Constraints active at a point of a polytope.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActiveSet {
    pub point: Vec<f64>,
    pub indices: Vec<usize>,
}

pub fn active_set(p: &Polytope, x: &[f64], tol_active: f64) -> Result<ActiveSet> {
    if !p.contains(x, tol_active) {
        return Err(Error::OutsideDomain(format!(
            "{x:?} is not in the polytope"
        )));
    }
    Ok(ActiveSet {
        point: x.to_vec(),
        indices: p.active_set(x, tol_active),
    })
}

/// Whether `v` lies in the Bouligand tangent cone to the polytope at `x`:
/// `G_i . v <= tol_cone` for every active constraint. Interior points accept
/// every vector.
pub fn polytope_tangent_vectors_ok(
    p: &Polytope,
    x: &[f64],
    v: &[f64],
    tol_cone: f64,
) -> Result<bool> {
    let active = active_set(p, x, TOL_ACTIVE)?;
    Ok(active
        .indices
        .iter()
        .all(|&i| linalg::dot(p.row(i).0, v) <= tol_cone))
}

/// Smallest slack `-max_i G_i . f(x, u)` over active constraints; positive
/// when the field points inward, `+inf` at interior points.
fn cone_slack(p: &Polytope, x: &[f64], f: &[f64], tol_active: f64) -> (f64, Option<usize>) {
    let mut slack = f64::INFINITY;
    let mut facet = None;
    for i in p.active_set(x, tol_active) {
        let s = -linalg::dot(p.row(i).0, f);
        if s < slack {
            slack = s;
            facet = Some(i);
        }
    }
    (slack, facet)
}

/// Certify forward invariance of `p` by sampling facet points, vertices, and
/// inputs, and checking the tangent-cone inclusion of the sampled field
/// values. This instantiates the sufficient direction of the tangent-cone
/// criterion at sampled points only; it is not a proof.
pub fn invariance_certify(
    model: &SystemModel,
    p: &Polytope,
    u_box: Option<(&[f64], &[f64])>,
    plan: &SamplePlan,
    per_facet: usize,
) -> Result<CertificationReport> {
    if p.dim() != model.n() {
        return Err(Error::DimensionMismatch(
            "polytope dimension differs from the model state dimension".into(),
        ));
    }
    if !p.subset_of(model.state_domain(), 1e-9) {
        return Err(Error::Precondition(
            "invariance polytope must be contained in the state domain".into(),
        ));
    }
    let (u_lo, u_hi) = match u_box {
        Some((lo, hi)) => (lo.to_vec(), hi.to_vec()),
        None => {
            let (lo, hi) = model.input_box();
            (lo.to_vec(), hi.to_vec())
        }
    };
    let mut rng = plan.rng();
    let sample_u = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
        u_lo.iter()
            .zip(&u_hi)
            .map(|(&a, &b)| if a == b { a } else { rng.gen_range(a..=b) })
            .collect()
    };

    let mut worst = f64::INFINITY;
    let mut checked = 0usize;
    let check = |x: Vec<f64>,
                 u: Vec<f64>,
                 worst: &mut f64,
                 checked: &mut usize|
     -> Option<CertificationReport> {
        let f = model.field_at(&x, &u);
        let (slack, facet) = cone_slack(p, &x, &f, TOL_ACTIVE);
        *worst = (*worst).min(slack);
        *checked += 1;
        if slack < -TOL_CONE {
            let mut ce = Counterexample {
                x,
                u,
                x2: None,
                u2: None,
                signal: None,
                signal2: None,
                row: None,
                col: None,
                time: None,
                facet,
                entry: None,
                value: slack,
            };
            ce.entry = facet.map(|i| format!("outward along facet {i}"));
            return Some(CertificationReport {
                verdict: Verdict::Falsified,
                condition: Condition::Invariance,
                n_checked: *checked,
                worst_margin: *worst,
                counterexample: Some(ce),
                note: None,
            });
        }
        None
    };

    // Vertices first: the tangent cone is smallest there.
    for v in p.vertices().to_vec() {
        for _ in 0..INPUTS_PER_VERTEX {
            let u = sample_u(&mut rng);
            if let Some(report) = check(v.clone(), u, &mut worst, &mut checked) {
                return Ok(report);
            }
        }
    }
    for i in 0..p.n_facets() {
        for _ in 0..per_facet {
            let x = p.sample_facet(i, &mut rng)?;
            let u = sample_u(&mut rng);
            if let Some(report) = check(x, u, &mut worst, &mut checked) {
                return Ok(report);
            }
        }
    }

    Ok(CertificationReport {
        verdict: Verdict::Certified,
        condition: Condition::Invariance,
        n_checked: checked,
        worst_margin: worst,
        counterexample: None,
        note: Some(
            "tangent-cone inclusion checked at sampled boundary points and inputs only".into(),
        ),
    })
}

/// Dynamic cross-check: integrate from sampled interior and boundary starts
/// under sampled constant inputs and flag any exit beyond `TOL_DOMAIN`.
pub fn trajectory_containment_check(
    model: &SystemModel,
    p: &Polytope,
    plan: &SamplePlan,
    horizon: f64,
) -> Result<CertificationReport> {
    if !p.subset_of(model.state_domain(), 1e-9) {
        return Err(Error::Precondition(
            "containment polytope must be contained in the state domain".into(),
        ));
    }
    let mut rng = plan.rng();
    let opts = IntegrateOpts::default();
    let mut worst = f64::INFINITY;

    for k in 0..plan.n_points {
        let boundary = (k as f64) < plan.boundary_fraction * plan.n_points as f64;
        let x0 = if boundary {
            p.sample_facet(k % p.n_facets(), &mut rng)?
        } else {
            p.sample_interior(&mut rng)?
        };
        let u = model.sample_input(&mut rng);
        let traj = model.integrate(&x0, &InputSignal::Constant(u.clone()), horizon, &opts)?;
        for (idx, state) in traj.states.iter().enumerate() {
            let slack = -p.violation(state);
            worst = worst.min(slack);
            if slack < -TOL_DOMAIN {
                let ce = Counterexample {
                    x: x0.clone(),
                    u,
                    x2: Some(state.clone()),
                    u2: None,
                    signal: None,
                    signal2: None,
                    row: None,
                    col: None,
                    time: Some(traj.times[idx]),
                    facet: None,
                    entry: Some("trajectory exit point stored in x2".into()),
                    value: slack,
                };
                return Ok(CertificationReport {
                    verdict: Verdict::Falsified,
                    condition: Condition::Containment,
                    n_checked: k + 1,
                    worst_margin: worst,
                    counterexample: Some(ce),
                    note: None,
                });
            }
        }
    }
    Ok(CertificationReport {
        verdict: Verdict::Certified,
        condition: Condition::Containment,
        n_checked: plan.n_points,
        worst_margin: worst,
        counterexample: None,
        note: None,
    })
}

/// Recompute the slack of a stored invariance or containment counterexample.
pub fn reverify_invariance(
    report: &CertificationReport,
    model: &SystemModel,
    p: &Polytope,
) -> Result<f64> {
    let Some(ce) = &report.counterexample else {
        return Err(Error::Precondition("report has no counterexample".into()));
    };
    match report.condition {
        Condition::Invariance => {
            let f = model.field_at(&ce.x, &ce.u);
            Ok(cone_slack(p, &ce.x, &f, TOL_ACTIVE).0)
        }
        Condition::Containment => {
            let horizon = ce.time.unwrap_or(1.0).max(1e-3) * 1.05;
            let traj = model.integrate(
                &ce.x,
                &InputSignal::Constant(ce.u.clone()),
                horizon,
                &IntegrateOpts::default(),
            )?;
            Ok(traj
                .states
                .iter()
                .map(|s| -p.violation(s))
                .fold(f64::INFINITY, f64::min))
        }
        _ => Err(Error::Precondition(
            "not an invariance or containment report".into(),
        )),
    }
}
