//! Orthant orders: comparisons, strict relations, and tangent cones.
//!
//! ```bash
//! cargo run --release --example orthant_orders
//! ```

use monocert::order::TOL_ACTIVE;
use monocert::OrthantOrder;

fn main() -> monocert::Result<()> {
    // K = R_{<=0} x R_{>=0}: coordinate 1 is ordered downward.
    let order = OrthantOrder::new(vec![1, 0])?;

    let x1 = [-1.0, 2.0];
    let x2 = [0.0, 1.0];
    println!("eps = {:?}", order.eps());
    println!("x1 = {x1:?}, x2 = {x2:?}");
    println!("x1 >= x2: {}", order.geq(&x1, &x2)?);
    println!("x2 >= x1: {}", order.geq(&x2, &x1)?);

    let rel = order.strict_relations(&x2, &x1)?;
    println!(
        "strict: {}, interior strict: {}",
        rel.strict, rel.interior_strict
    );

    // Tangent cones to K at boundary points: a half-line appears for every
    // coordinate that sits on the cone boundary.
    for p in [[0.0, 3.0], [-2.0, 0.0], [0.0, 0.0], [-1.0, 1.0]] {
        let cone = order.tangent_cone(&p, TOL_ACTIVE)?;
        println!("tangent cone at {p:?}: {:?}", cone.tags());
    }

    // Membership in a tangent cone is closed under nonnegative scaling.
    let cone = order.tangent_cone(&[0.0, 3.0], TOL_ACTIVE)?;
    let v = [-0.5, 7.0];
    println!(
        "v = {v:?} in cone: {}, 10v in cone: {}",
        cone.contains(&v, 0.0),
        cone.contains(&v.map(|c| 10.0 * c), 0.0)
    );
    Ok(())
}
