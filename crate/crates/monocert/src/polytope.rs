//! Bounded convex polytopes `{x : Gx <= g}` with unit-norm rows.
//!
//! Dimensions here are small (the built-in models top out at n = 6), so
//! vertex enumeration over row subsets replaces an LP solver: the Chebyshev
//! center, bounding box, and facet vertex hulls all come from enumerating
//! basic feasible points.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

const FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "PolytopeRepr", into = "PolytopeRepr")]
pub struct Polytope {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    // Computed once at construction.
    vertices: Vec<Vec<f64>>,
    center: Vec<f64>,
    radius: f64,
    bbox_lo: Vec<f64>,
    bbox_hi: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PolytopeRepr {
    #[serde(rename = "G")]
    g: Vec<Vec<f64>>,
    #[serde(rename = "g")]
    rhs: Vec<f64>,
}

impl TryFrom<PolytopeRepr> for Polytope {
    type Error = Error;
    fn try_from(r: PolytopeRepr) -> Result<Self> {
        Polytope::new(r.g, r.rhs)
    }
}

impl From<Polytope> for PolytopeRepr {
    fn from(p: Polytope) -> Self {
        PolytopeRepr {
            g: p.rows,
            rhs: p.rhs,
        }
    }
}

impl Polytope {
    /// Build from constraint rows, normalizing each row to unit norm.
    /// Fails when the set is empty, has empty interior, or is unbounded
    /// enough that no vertex exists.
    pub fn new(g_mat: Vec<Vec<f64>>, g_vec: Vec<f64>) -> Result<Self> {
        if g_mat.len() != g_vec.len() {
            return Err(Error::DimensionMismatch(format!(
                "polytope has {} constraint rows but {} right-hand sides",
                g_mat.len(),
                g_vec.len()
            )));
        }
        if g_mat.is_empty() {
            return Err(Error::DegeneratePolytope("no constraints".into()));
        }
        let n = g_mat[0].len();
        if n == 0 || g_mat.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch(
                "polytope constraint rows have inconsistent lengths".into(),
            ));
        }
        let mut rows = Vec::with_capacity(g_mat.len());
        let mut rhs = Vec::with_capacity(g_vec.len());
        for (row, &b) in g_mat.iter().zip(&g_vec) {
            let norm = linalg::norm2(row);
            if norm < 1e-12 {
                return Err(Error::DegeneratePolytope("zero constraint row".into()));
            }
            rows.push(row.iter().map(|v| v / norm).collect());
            rhs.push(b / norm);
        }

        let vertices = enumerate_vertices(&rows, &rhs, n);
        if vertices.is_empty() {
            return Err(Error::DegeneratePolytope(
                "no vertices found; set is empty or unbounded".into(),
            ));
        }
        let (center, radius) = chebyshev_center(&rows, &rhs, n)?;
        if radius <= FEAS_TOL {
            return Err(Error::DegeneratePolytope(format!(
                "empty interior (inradius {radius:.3e})"
            )));
        }
        let mut bbox_lo = vec![f64::INFINITY; n];
        let mut bbox_hi = vec![f64::NEG_INFINITY; n];
        for v in &vertices {
            for i in 0..n {
                bbox_lo[i] = bbox_lo[i].min(v[i]);
                bbox_hi[i] = bbox_hi[i].max(v[i]);
            }
        }
        Ok(Self {
            rows,
            rhs,
            vertices,
            center,
            radius,
            bbox_lo,
            bbox_hi,
        })
    }

    /// Axis-aligned box `[lo, hi]`.
    pub fn from_box(lo: &[f64], hi: &[f64]) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch(
                "box bounds differ in length".into(),
            ));
        }
        let n = lo.len();
        let mut g_mat = Vec::with_capacity(2 * n);
        let mut g_vec = Vec::with_capacity(2 * n);
        for i in 0..n {
            let mut row = vec![0.0; n];
            row[i] = 1.0;
            g_mat.push(row);
            g_vec.push(hi[i]);
            let mut row = vec![0.0; n];
            row[i] = -1.0;
            g_mat.push(row);
            g_vec.push(-lo[i]);
        }
        Self::new(g_mat, g_vec)
    }

    pub fn dim(&self) -> usize {
        self.rows[0].len()
    }

    pub fn n_facets(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> (&[f64], f64) {
        (&self.rows[i], self.rhs[i])
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn chebyshev_center(&self) -> &[f64] {
        &self.center
    }

    pub fn inradius(&self) -> f64 {
        self.radius
    }

    pub fn bounding_box(&self) -> (&[f64], &[f64]) {
        (&self.bbox_lo, &self.bbox_hi)
    }

    /// Largest pairwise vertex distance.
    pub fn diameter(&self) -> f64 {
        let mut d = 0.0_f64;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                d = d.max(linalg::dist2(a, b));
            }
        }
        d
    }

    /// Largest constraint violation `max_i (G_i . x - g_i)`; nonpositive inside.
    pub fn violation(&self, x: &[f64]) -> f64 {
        self.rows
            .iter()
            .zip(&self.rhs)
            .map(|(row, &b)| linalg::dot(row, x) - b)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim() && self.violation(x) <= tol
    }

    /// Indices of constraints active at `x` within `tol`.
    pub fn active_set(&self, x: &[f64], tol: f64) -> Vec<usize> {
        (0..self.rows.len())
            .filter(|&i| linalg::dot(&self.rows[i], x) >= self.rhs[i] - tol)
            .collect()
    }

    /// Whether every vertex of `self` satisfies the constraints of `other`.
    pub fn subset_of(&self, other: &Polytope, tol: f64) -> bool {
        self.vertices.iter().all(|v| other.contains(v, tol))
    }

    /// Move `x` along the segment toward the Chebyshev center until it
    /// satisfies every constraint; points already inside are unchanged.
    pub fn clip_inside(&self, x: &[f64]) -> Vec<f64> {
        if self.contains(x, 0.0) {
            return x.to_vec();
        }
        let mut lambda: f64 = 0.0;
        for (row, &b) in self.rows.iter().zip(&self.rhs) {
            let gx = linalg::dot(row, x);
            if gx > b {
                let gc = linalg::dot(row, &self.center);
                // gc < b because the center is interior.
                lambda = lambda.max((gx - b) / (gx - gc));
            }
        }
        let lambda = lambda.min(1.0);
        x.iter()
            .zip(&self.center)
            .map(|(&xi, &ci)| xi + lambda * (ci - xi))
            .collect()
    }

    /// Uniform sample by rejection from the bounding box.
    pub fn sample_interior<R: Rng>(&self, rng: &mut R) -> Result<Vec<f64>> {
        let n = self.dim();
        for _ in 0..100_000 {
            let x: Vec<f64> = (0..n)
                .map(|i| rng.gen_range(self.bbox_lo[i]..=self.bbox_hi[i]))
                .collect();
            if self.contains(&x, 0.0) {
                return Ok(x);
            }
        }
        Err(Error::DegeneratePolytope(
            "rejection sampling failed; polytope volume too small in its box".into(),
        ))
    }

    /// Largest `lambda >= 0` with `x + lambda * d` still inside, given `x` inside.
    pub fn max_step(&self, x: &[f64], d: &[f64]) -> f64 {
        let mut lambda = f64::INFINITY;
        for (row, &b) in self.rows.iter().zip(&self.rhs) {
            let gd = linalg::dot(row, d);
            if gd > 1e-14 {
                lambda = lambda.min((b - linalg::dot(row, x)) / gd);
            }
        }
        lambda.max(0.0)
    }

    /// Vertices lying on facet `i`.
    pub fn facet_vertices(&self, i: usize) -> Vec<Vec<f64>> {
        self.vertices
            .iter()
            .filter(|v| linalg::dot(&self.rows[i], v) >= self.rhs[i] - FEAS_TOL * 10.0)
            .cloned()
            .collect()
    }

    /// A point on facet `i`: barycentric draw over the facet's vertex hull in
    /// low dimension, a short hit-and-run walk on the facet otherwise.
    pub fn sample_facet<R: Rng>(&self, i: usize, rng: &mut R) -> Result<Vec<f64>> {
        let verts = self.facet_vertices(i);
        if verts.is_empty() {
            return Err(Error::DegeneratePolytope(format!(
                "facet {i} has no vertices"
            )));
        }
        let n = self.dim();
        if n <= 3 {
            // Dirichlet(1) weights over the facet vertices.
            let mut w: Vec<f64> = (0..verts.len())
                .map(|_| -(rng.gen_range(1e-12..1.0f64)).ln())
                .collect();
            let total: f64 = w.iter().sum();
            for wi in &mut w {
                *wi /= total;
            }
            let mut p = vec![0.0; n];
            for (wk, v) in w.iter().zip(&verts) {
                for j in 0..n {
                    p[j] += wk * v[j];
                }
            }
            return Ok(p);
        }
        // Hit-and-run within the facet hyperplane from the facet centroid.
        let mut p = vec![0.0; n];
        for v in &verts {
            for j in 0..n {
                p[j] += v[j] / verts.len() as f64;
            }
        }
        let normal = self.rows[i].clone();
        for _ in 0..16 {
            let mut d: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0f64)).collect();
            let along = linalg::dot(&d, &normal);
            for j in 0..n {
                d[j] -= along * normal[j];
            }
            let norm = linalg::norm2(&d);
            if norm < 1e-12 {
                continue;
            }
            for dj in &mut d {
                *dj /= norm;
            }
            let fwd = self.max_step(&p, &d);
            let neg: Vec<f64> = d.iter().map(|v| -v).collect();
            let back = self.max_step(&p, &neg);
            if fwd + back < 1e-12 {
                continue;
            }
            let t = rng.gen_range(-back..=fwd);
            for j in 0..n {
                p[j] += t * d[j];
            }
        }
        Ok(p)
    }

    /// Product polytope with block-diagonal constraints.
    pub fn product(parts: &[&Polytope]) -> Result<Self> {
        let n: usize = parts.iter().map(|p| p.dim()).sum();
        let mut g_mat = Vec::new();
        let mut g_vec = Vec::new();
        let mut offset = 0;
        for p in parts {
            for (row, &b) in p.rows.iter().zip(&p.rhs) {
                let mut full = vec![0.0; n];
                full[offset..offset + p.dim()].copy_from_slice(row);
                g_mat.push(full);
                g_vec.push(b);
            }
            offset += p.dim();
        }
        Self::new(g_mat, g_vec)
    }

    /// Image of the polytope under `x = D z` for a diagonal sign matrix `D`:
    /// `{z : (G D) z <= g}`.
    pub fn conjugate_diag(&self, signs: &[f64]) -> Result<Self> {
        let g_mat: Vec<Vec<f64>> = self
            .rows
            .iter()
            .map(|row| row.iter().zip(signs).map(|(v, s)| v * s).collect())
            .collect();
        Self::new(g_mat, self.rhs.clone())
    }
}

fn combinations(q: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > q {
        return out;
    }
    loop {
        out.push(idx.clone());
        // Advance the combination.
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + q - k {
                break;
            }
        }
        if idx[i] == i + q - k {
            return out;
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn enumerate_vertices(rows: &[Vec<f64>], rhs: &[f64], n: usize) -> Vec<Vec<f64>> {
    let q = rows.len();
    let mut verts: Vec<Vec<f64>> = Vec::new();
    for combo in combinations(q, n) {
        let a: Vec<Vec<f64>> = combo.iter().map(|&i| rows[i].clone()).collect();
        let b: Vec<f64> = combo.iter().map(|&i| rhs[i]).collect();
        let Some(x) = linalg::solve(&a, &b) else {
            continue;
        };
        let feasible = rows
            .iter()
            .zip(rhs)
            .all(|(row, &bi)| linalg::dot(row, &x) <= bi + FEAS_TOL);
        if !feasible {
            continue;
        }
        if !verts.iter().any(|v| linalg::dist_inf(v, &x) < 1e-8) {
            verts.push(x);
        }
    }
    verts
}

/// Chebyshev center via vertex enumeration of the lifted set
/// `{(x, r) : G_i . x + r <= g_i, r >= 0}` (rows are unit norm), maximizing r.
fn chebyshev_center(rows: &[Vec<f64>], rhs: &[f64], n: usize) -> Result<(Vec<f64>, f64)> {
    let mut lifted: Vec<Vec<f64>> = rows
        .iter()
        .map(|row| {
            let mut r = row.clone();
            r.push(1.0);
            r
        })
        .collect();
    let mut lifted_rhs = rhs.to_vec();
    let mut nonneg = vec![0.0; n + 1];
    nonneg[n] = -1.0;
    lifted.push(nonneg);
    lifted_rhs.push(0.0);

    let q = lifted.len();
    let mut best: Option<(Vec<f64>, f64)> = None;
    for combo in combinations(q, n + 1) {
        let a: Vec<Vec<f64>> = combo.iter().map(|&i| lifted[i].clone()).collect();
        let b: Vec<f64> = combo.iter().map(|&i| lifted_rhs[i]).collect();
        let Some(xr) = linalg::solve(&a, &b) else {
            continue;
        };
        let feasible = lifted
            .iter()
            .zip(&lifted_rhs)
            .all(|(row, &bi)| linalg::dot(row, &xr) <= bi + FEAS_TOL);
        if !feasible {
            continue;
        }
        let r = xr[n];
        if best.as_ref().map_or(true, |(_, br)| r > *br) {
            best = Some((xr[..n].to_vec(), r));
        }
    }
    best.ok_or_else(|| Error::DegeneratePolytope("Chebyshev center not found".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// The triangle {x >= 0, y >= 0, x + y <= 1}.
    pub fn triangle() -> Polytope {
        Polytope::new(
            vec![vec![-1.0, 0.0], vec![0.0, -1.0], vec![1.0, 1.0]],
            vec![0.0, 0.0, 1.0],
        )
        .unwrap()
    }

    #[test]
    fn triangle_vertices_and_center() {
        let t = triangle();
        assert_eq!(t.vertices().len(), 3);
        let c = t.chebyshev_center();
        let r_expected = 1.0 / (2.0 + std::f64::consts::SQRT_2);
        assert!((c[0] - r_expected).abs() < 1e-9);
        assert!((c[1] - r_expected).abs() < 1e-9);
        assert!((t.inradius() - r_expected).abs() < 1e-9);
    }

    #[test]
    fn box_membership_and_bbox() {
        let b = Polytope::from_box(&[-1.0, 0.0], &[1.0, 2.0]).unwrap();
        assert!(b.contains(&[0.0, 1.0], 0.0));
        assert!(!b.contains(&[1.5, 1.0], 0.0));
        let (lo, hi) = b.bounding_box();
        assert_eq!(lo, &[-1.0, 0.0]);
        assert_eq!(hi, &[1.0, 2.0]);
    }

    #[test]
    fn empty_interior_rejected() {
        // x <= 0 and -x <= 0 pins x to a line in 2D: empty interior.
        let r = Polytope::new(
            vec![
                vec![1.0, 0.0],
                vec![-1.0, 0.0],
                vec![0.0, 1.0],
                vec![0.0, -1.0],
            ],
            vec![0.0, 0.0, 1.0, 1.0],
        );
        assert!(r.is_err());
    }

    #[test]
    fn row_scaling_does_not_change_membership() {
        let a = Polytope::new(
            vec![vec![-1.0, 0.0], vec![0.0, -1.0], vec![1.0, 1.0]],
            vec![0.0, 0.0, 1.0],
        )
        .unwrap();
        let b = Polytope::new(
            vec![vec![-5.0, 0.0], vec![0.0, -0.2], vec![7.0, 7.0]],
            vec![0.0, 0.0, 7.0],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let x = [rng.gen_range(-0.5..1.5), rng.gen_range(-0.5..1.5)];
            assert_eq!(a.contains(&x, 0.0), b.contains(&x, 0.0), "at {x:?}");
        }
    }

    #[test]
    fn interior_samples_are_inside() {
        let t = triangle();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..500 {
            let x = t.sample_interior(&mut rng).unwrap();
            assert!(t.contains(&x, 0.0));
        }
    }

    #[test]
    fn facet_samples_lie_on_facet() {
        let t = triangle();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for i in 0..t.n_facets() {
            for _ in 0..100 {
                let x = t.sample_facet(i, &mut rng).unwrap();
                let (row, b) = t.row(i);
                assert!((linalg::dot(row, &x) - b).abs() < 1e-9);
                assert!(t.contains(&x, 1e-9));
            }
        }
    }

    #[test]
    fn clip_moves_outside_points_to_boundary() {
        let t = triangle();
        let p = t.clip_inside(&[0.9, 0.9]);
        assert!(t.contains(&p, 1e-12));
        assert!((p[0] + p[1] - 1.0).abs() < 1e-9, "lands on the diagonal");
        let inside = t.clip_inside(&[0.2, 0.2]);
        assert_eq!(inside, vec![0.2, 0.2]);
    }

    #[test]
    fn product_of_triangles() {
        let t = triangle();
        let p = Polytope::product(&[&t, &t, &t]).unwrap();
        assert_eq!(p.dim(), 6);
        assert_eq!(p.vertices().len(), 27);
        assert!(p.contains(&[0.2, 0.2, 0.3, 0.3, 0.1, 0.1], 0.0));
        assert!(!p.contains(&[0.2, 0.2, 0.9, 0.3, 0.1, 0.1], 0.0));
    }

    #[test]
    fn conjugation_by_signs() {
        let t = triangle();
        // x = P z with P = diag(-1, 1) maps the triangle to {z1 <= 0, ...}.
        let c = t.conjugate_diag(&[-1.0, 1.0]).unwrap();
        assert!(c.contains(&[-0.3, 0.3], 0.0));
        assert!(!c.contains(&[0.3, 0.3], 0.0));
    }

    #[test]
    fn serde_round_trip() {
        let t = triangle();
        let s = serde_json::to_string(&t).unwrap();
        let back: Polytope = serde_json::from_str(&s).unwrap();
        assert!(back.contains(&[0.2, 0.3], 0.0));
        assert_eq!(back.n_facets(), 3);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_box() -> impl Strategy<Value = (Polytope, Vec<f64>)> {
            (
                proptest::collection::vec((-5.0f64..5.0, 0.1f64..4.0), 2..4),
                proptest::collection::vec(-10.0f64..10.0, 4),
            )
                .prop_map(|(spans, raw)| {
                    let lo: Vec<f64> = spans.iter().map(|(a, _)| *a).collect();
                    let hi: Vec<f64> = spans.iter().map(|(a, w)| a + w).collect();
                    let point = raw[..lo.len()].to_vec();
                    (Polytope::from_box(&lo, &hi).unwrap(), point)
                })
        }

        proptest! {
            #[test]
            fn clip_lands_inside_and_fixes_interior((p, x) in arb_box()) {
                let clipped = p.clip_inside(&x);
                prop_assert!(p.contains(&clipped, 1e-9));
                if p.contains(&x, 0.0) {
                    prop_assert_eq!(clipped, x);
                }
            }

            #[test]
            fn max_step_stays_inside((p, d) in arb_box(), steps in 1usize..5) {
                let x = p.chebyshev_center();
                let lambda = p.max_step(x, &d);
                prop_assert!(lambda.is_finite() && lambda >= 0.0);
                for k in 1..=steps {
                    let frac = k as f64 / steps as f64;
                    let y: Vec<f64> =
                        x.iter().zip(&d).map(|(a, b)| a + frac * lambda * b).collect();
                    prop_assert!(p.contains(&y, 1e-9), "left the polytope at fraction {frac}");
                }
            }
        }
    }
}
