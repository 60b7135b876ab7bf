//! Joint experiment: the finite-depth shear norm and the dilatation of the
//! barycentric extension, computed side by side on the blow-up family. The
//! dilatation stays controlled by the shear norm, so both columns must grow
//! together along the family; the pairs are reported without fitting any
//! constant.

use shears::boundary::{counterexample_map, to_halfplane};
use shears::douady_earle::max_dilatation_estimate;
use shears::farey::Tesselation;
use shears::shear::{shear_function, shear_norm};
use std::sync::Arc;

#[test]
fn shear_norm_and_dilatation_grow_together() {
    let tess = Arc::new(Tesselation::enumerate(5).unwrap());
    let grid = vec![num_complex::Complex64::new(0.0, 0.0)];
    let mut pairs = Vec::new();
    for n in [2u32, 4, 8, 16, 32] {
        let h = counterexample_map(n).unwrap();
        let s = shear_function(&to_halfplane(&h).unwrap(), Arc::clone(&tess)).unwrap();
        let norm = shear_norm(&s, 5);
        let k = max_dilatation_estimate(&h, &grid).unwrap();
        pairs.push((n, norm, k));
    }
    println!("n, shear_norm (depth 5, kmax 5), K(ex(h)) at 0:");
    for (n, norm, k) in &pairs {
        println!("{n:4}, {norm:.6}, {k:.4}");
    }
    // identity row: both quantities at their floor
    assert!(pairs[0].1 < 1e-12 && (pairs[0].2 - 1.0).abs() < 1e-9);
    // strictly increasing in n, jointly
    for w in pairs.windows(2) {
        assert!(w[1].1 > w[0].1, "shear norm must grow: {pairs:?}");
        assert!(w[1].2 > w[0].2, "dilatation must grow: {pairs:?}");
    }
}
