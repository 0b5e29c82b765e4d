//! Orthant cones and the partial orders they induce.
//!
//! An orthant cone on R^n is determined by a sign vector `eps` with entries in
//! {0, 1}: the cone contains the vectors whose i-th coordinate satisfies
//! `(-1)^eps_i * x_i >= 0`. The induced order `x1 >= x2` holds when the
//! difference lies in the cone. All comparisons here are per-coordinate and
//! exact up to an explicit slack.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boundary detection slack for tangent-cone computations.
pub const TOL_ACTIVE: f64 = 1e-9;

/// An orthant cone `K` on R^n given by a binary sign vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OrthantOrder {
    eps: Vec<u8>,
}

impl OrthantOrder {
    pub fn new(eps: Vec<u8>) -> Result<Self> {
        if eps.is_empty() {
            // Zero-dimensional orders are allowed for input-free systems.
            return Ok(Self { eps });
        }
        if eps.iter().any(|&e| e > 1) {
            return Err(Error::InvalidModel(
                "orthant sign vector entries must be 0 or 1".into(),
            ));
        }
        Ok(Self { eps })
    }

    /// The standard (cooperative) order on R^n: every entry 0.
    pub fn standard(n: usize) -> Self {
        Self { eps: vec![0; n] }
    }

    pub fn dim(&self) -> usize {
        self.eps.len()
    }

    pub fn eps(&self) -> &[u8] {
        &self.eps
    }

    /// `(-1)^eps_i` as a float.
    pub fn sign(&self, i: usize) -> f64 {
        if self.eps[i] == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn is_standard(&self) -> bool {
        self.eps.iter().all(|&e| e == 0)
    }

    /// Componentwise multiplication by the diagonal sign matrix P = diag((-1)^eps).
    pub fn flip(&self, v: &[f64]) -> Vec<f64> {
        v.iter()
            .enumerate()
            .map(|(i, x)| self.sign(i) * x)
            .collect()
    }

    /// Concatenation of orders, for product cones.
    pub fn concat(orders: &[&OrthantOrder]) -> Self {
        let eps = orders.iter().flat_map(|o| o.eps.iter().copied()).collect();
        Self { eps }
    }

    fn check_dim(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.eps.len() {
            return Err(Error::DimensionMismatch(format!(
                "order has dimension {}, point has dimension {}",
                self.eps.len(),
                v.len()
            )));
        }
        Ok(())
    }

    /// Smallest signed coordinate slack of `x1 - x2` relative to the cone:
    /// nonnegative iff `x1 >= x2` holds exactly.
    pub fn margin(&self, x1: &[f64], x2: &[f64]) -> Result<f64> {
        self.check_dim(x1)?;
        self.check_dim(x2)?;
        let mut worst = f64::INFINITY;
        for i in 0..self.eps.len() {
            worst = worst.min(self.sign(i) * (x1[i] - x2[i]));
        }
        Ok(worst)
    }

    /// `x1 >= x2` with a nonnegative comparison slack.
    pub fn geq_slack(&self, x1: &[f64], x2: &[f64], tol: f64) -> Result<bool> {
        Ok(self.margin(x1, x2)? >= -tol)
    }

    /// Exact `x1 >= x2` (slack 0).
    pub fn geq(&self, x1: &[f64], x2: &[f64]) -> Result<bool> {
        self.geq_slack(x1, x2, 0.0)
    }

    /// `x2 <= x1`, i.e. whether `x1 >= x2`.
    pub fn leq(&self, x2: &[f64], x1: &[f64]) -> Result<bool> {
        self.geq(x1, x2)
    }

    /// The `>=`, `>` (strict), and `>>` (interior-strict) relations at once.
    pub fn strict_relations(&self, x2: &[f64], x1: &[f64]) -> Result<StrictRelations> {
        self.check_dim(x1)?;
        self.check_dim(x2)?;
        let geq = self.geq(x1, x2)?;
        let equal = x1 == x2;
        let interior = geq && (0..self.eps.len()).all(|i| self.sign(i) * (x1[i] - x2[i]) > 0.0);
        Ok(StrictRelations {
            geq,
            strict: geq && !equal,
            interior_strict: interior,
        })
    }

    /// Cone membership of a point, with slack.
    pub fn contains(&self, p: &[f64], tol: f64) -> Result<bool> {
        self.check_dim(p)?;
        Ok((0..self.eps.len()).all(|i| self.sign(i) * p[i] >= -tol))
    }

    /// Tangent cone to `K` at a point `p` of `K`. Coordinates at the cone
    /// boundary (|p_i| <= tol_active) stay constrained to the cone's half-line;
    /// the rest are free.
    pub fn tangent_cone(&self, p: &[f64], tol_active: f64) -> Result<ConeTangent> {
        if !self.contains(p, tol_active)? {
            return Err(Error::OutsideDomain(format!(
                "point {p:?} is not in the orthant cone"
            )));
        }
        let tags = (0..self.eps.len())
            .map(|i| {
                if p[i].abs() <= tol_active {
                    if self.eps[i] == 0 {
                        CoordinateTag::HalfLineNonneg
                    } else {
                        CoordinateTag::HalfLineNonpos
                    }
                } else {
                    CoordinateTag::Free
                }
            })
            .collect();
        Ok(ConeTangent { tags })
    }
}

/// Result of comparing two points under an orthant order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StrictRelations {
    pub geq: bool,
    pub strict: bool,
    pub interior_strict: bool,
}

/// Per-coordinate constraint of a tangent cone to an orthant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoordinateTag {
    Free,
    HalfLineNonneg,
    HalfLineNonpos,
}

/// Tangent cone to an orthant at one of its points: a product of lines and
/// half-lines. Closed under multiplication by nonnegative scalars.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeTangent {
    tags: Vec<CoordinateTag>,
}

impl ConeTangent {
    pub fn tags(&self) -> &[CoordinateTag] {
        &self.tags
    }

    pub fn contains(&self, v: &[f64], tol: f64) -> bool {
        self.tags.iter().zip(v).all(|(tag, &vi)| match tag {
            CoordinateTag::Free => true,
            CoordinateTag::HalfLineNonneg => vi >= -tol,
            CoordinateTag::HalfLineNonpos => vi <= tol,
        })
    }
}

/// Order interval `[lo, hi] = {x : lo <= x <= hi}` under an orthant order.
#[derive(Debug, Clone)]
pub struct OrderInterval {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub order: OrthantOrder,
}

impl OrderInterval {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, order: OrthantOrder) -> Result<Self> {
        if !order.geq(&hi, &lo)? {
            return Err(Error::OrderMismatch(
                "order interval requires hi >= lo".into(),
            ));
        }
        Ok(Self { lo, hi, order })
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool> {
        Ok(self.order.geq_slack(x, &self.lo, tol)? && self.order.geq_slack(&self.hi, x, tol)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sign_flipped_order_example() {
        // K = R_{<=0} x R_{>=0}
        let ord = OrthantOrder::new(vec![1, 0]).unwrap();
        assert!(ord.leq(&[0.0, 1.0], &[-1.0, 2.0]).unwrap());
        assert!(ord.geq(&[-1.0, 2.0], &[0.0, 1.0]).unwrap());
    }

    #[test]
    fn reflexive() {
        let ord = OrthantOrder::new(vec![0, 1, 0]).unwrap();
        let x = [1.0, -2.0, 3.0];
        assert!(ord.geq(&x, &x).unwrap());
    }

    #[test]
    fn incomparable_pair() {
        let ord = OrthantOrder::standard(2);
        assert!(!ord.geq(&[1.0, 0.0], &[0.0, 1.0]).unwrap());
        assert!(!ord.geq(&[0.0, 1.0], &[1.0, 0.0]).unwrap());
    }

    #[test]
    fn strict_relations_cases() {
        let ord = OrthantOrder::standard(2);
        let r = ord.strict_relations(&[1.0, 1.0], &[2.0, 2.0]).unwrap();
        assert!(r.geq && r.strict && r.interior_strict);
        let r = ord.strict_relations(&[1.0, 1.0], &[2.0, 1.0]).unwrap();
        assert!(r.geq && r.strict && !r.interior_strict);
        let r = ord.strict_relations(&[1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert!(r.geq && !r.strict && !r.interior_strict);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let ord = OrthantOrder::standard(2);
        assert!(ord.geq(&[1.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn tangent_cone_on_boundary() {
        let ord = OrthantOrder::new(vec![1, 0]).unwrap();
        let cone = ord.tangent_cone(&[0.0, 3.0], TOL_ACTIVE).unwrap();
        assert_eq!(
            cone.tags(),
            &[CoordinateTag::HalfLineNonpos, CoordinateTag::Free]
        );
        // Interior point: everything free.
        let cone = ord.tangent_cone(&[-1.0, 3.0], TOL_ACTIVE).unwrap();
        assert_eq!(cone.tags(), &[CoordinateTag::Free, CoordinateTag::Free]);
        // At the apex the tangent cone is the cone itself.
        let cone = ord.tangent_cone(&[0.0, 0.0], TOL_ACTIVE).unwrap();
        assert_eq!(
            cone.tags(),
            &[CoordinateTag::HalfLineNonpos, CoordinateTag::HalfLineNonneg]
        );
    }

    #[test]
    fn tangent_cone_rejects_outside_point() {
        let ord = OrthantOrder::new(vec![1, 0]).unwrap();
        assert!(ord.tangent_cone(&[1.0, 1.0], TOL_ACTIVE).is_err());
    }

    #[test]
    fn order_interval_membership() {
        let ord = OrthantOrder::new(vec![1, 0]).unwrap();
        let iv = OrderInterval::new(vec![0.0, 0.0], vec![-1.0, 1.0], ord).unwrap();
        assert!(iv.contains(&[-0.5, 0.5], 0.0).unwrap());
        assert!(!iv.contains(&[0.5, 0.5], 0.0).unwrap());
    }

    #[test]
    fn order_interval_rejects_unordered_bounds() {
        let ord = OrthantOrder::standard(2);
        assert!(OrderInterval::new(vec![1.0, 0.0], vec![0.0, 1.0], ord).is_err());
    }

    fn arb_eps(n: usize) -> impl Strategy<Value = Vec<u8>> {
        proptest::collection::vec(0u8..=1, n)
    }

    fn arb_point(n: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-10.0f64..10.0, n)
    }

    proptest! {
        #[test]
        fn order_axioms(eps in arb_eps(4), x in arb_point(4), y in arb_point(4), z in arb_point(4)) {
            let ord = OrthantOrder::new(eps).unwrap();
            // reflexivity
            prop_assert!(ord.geq(&x, &x).unwrap());
            // antisymmetry
            if ord.geq(&x, &y).unwrap() && ord.geq(&y, &x).unwrap() {
                prop_assert_eq!(&x, &y);
            }
            // transitivity
            if ord.geq(&x, &y).unwrap() && ord.geq(&y, &z).unwrap() {
                prop_assert!(ord.geq(&x, &z).unwrap());
            }
        }

        #[test]
        fn tangent_cone_scale_invariant(eps in arb_eps(3), raw in arb_point(3), lambda in 0.1f64..50.0) {
            let ord = OrthantOrder::new(eps).unwrap();
            // Project raw into the cone, zeroing one coordinate to hit the boundary.
            let mut p: Vec<f64> = raw.iter().enumerate().map(|(i, v)| ord.sign(i) * v.abs()).collect();
            p[0] = 0.0;
            let scaled: Vec<f64> = p.iter().map(|v| lambda * v).collect();
            let c1 = ord.tangent_cone(&p, TOL_ACTIVE).unwrap();
            let c2 = ord.tangent_cone(&scaled, TOL_ACTIVE).unwrap();
            // Scale invariance holds away from the activity threshold.
            if p.iter().all(|v| *v == 0.0 || v.abs() > TOL_ACTIVE * 100.0 / lambda.min(1.0)) {
                prop_assert_eq!(c1, c2);
            }
        }

        #[test]
        fn cone_membership_closed_under_scaling(eps in arb_eps(3), raw in arb_point(3), v in arb_point(3), lambda in 0.0f64..100.0) {
            let ord = OrthantOrder::new(eps).unwrap();
            let mut p: Vec<f64> = raw.iter().enumerate().map(|(i, x)| ord.sign(i) * x.abs()).collect();
            p[1] = 0.0;
            let cone = ord.tangent_cone(&p, TOL_ACTIVE).unwrap();
            if cone.contains(&v, 0.0) {
                let scaled: Vec<f64> = v.iter().map(|x| lambda * x).collect();
                prop_assert!(cone.contains(&scaled, 1e-12));
            }
        }
    }
}
