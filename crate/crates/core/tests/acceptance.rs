//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with the measured quantities. Run with
//! `cargo test -p shears --test acceptance -- --nocapture` to see the lines.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shears::boundary::{
    counterexample_map, normalize_fix_three, to_halfplane, BoundaryMap, Model,
};
use shears::douady_earle::{
    beltrami_at_origin, beltrami_at_origin_fd, counterexample_experiment, extend, QuadratureRule,
};
use shears::farey::{cross_ratio_exact, FareyVertex, Tesselation};
use shears::geom::{cross_ratio_points, Moebius, Point};
use shears::metrics::{
    d_c_over, log_cr_ratio, quadruple_to_halfplane, UnitCrSampler,
};
use shears::modulus::{modulus_from_cross_ratio, rho_distance};
use shears::shear::{characteristic_map, d_as, d_s, shear_function, s_pmk, ShearFunction};
use std::f64::consts::{FRAC_PI_2, TAU};
use std::sync::Arc;
use std::time::Instant;

const N_LIST: [u32; 8] = [2, 4, 8, 16, 32, 64, 128, 256];
/// Calibrated against the closed-form oracle: the largest n·|coefficient -
/// limit| over the list is 2.0 (d₋₁ at n = 2).
const ASYMPTOTIC_C: f64 = 2.2;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn criterion_01_counterexample_asymptotics() {
    let start = Instant::now();
    let rows = counterexample_experiment(&N_LIST).unwrap();
    let target = 2.0 / std::f64::consts::PI;
    let mut sup_scaled_c1: f64 = 0.0;
    for r in &rows {
        let n = r.n as f64;
        let e1 = (r.c1.re - target).abs();
        let e2 = (r.c_minus1.re - target).abs();
        let e3 = (r.d_minus1.re - 1.0).abs();
        assert!(
            e1 <= ASYMPTOTIC_C / n,
            "n={}: |c1 - 2/pi| = {e1} > {}",
            r.n,
            ASYMPTOTIC_C / n
        );
        assert!(e2 <= ASYMPTOTIC_C / n, "n={}: |c-1 - 2/pi| = {e2}", r.n);
        assert!(e3 <= ASYMPTOTIC_C / n, "n={}: |d-1 - 1| = {e3}", r.n);
        sup_scaled_c1 = sup_scaled_c1.max(n * e1);
    }
    assert!(
        sup_scaled_c1 <= 1.5,
        "n|c1 - 2/pi| must stay bounded, got {sup_scaled_c1}"
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 60, "experiment took {elapsed:?}");
    println!(
        "criterion 01 (counter-example asymptotics, C = {ASYMPTOTIC_C}, \
         sup n|c1-2/pi| = {sup_scaled_c1:.4}, {elapsed:?}): PASS"
    );
}

#[test]
fn criterion_02_beltrami_blowup() {
    let rows = counterexample_experiment(&N_LIST).unwrap();
    assert!(
        rows[0].mu_abs <= 1e-10,
        "|mu(0)| at n=2 must vanish, got {}",
        rows[0].mu_abs
    );
    for w in rows.windows(2) {
        assert!(
            w[1].mu_abs > w[0].mu_abs,
            "|mu(0)| must increase strictly: n={} gives {}, n={} gives {}",
            w[0].n,
            w[0].mu_abs,
            w[1].n,
            w[1].mu_abs
        );
    }
    let last = rows.last().unwrap();
    assert!(
        last.mu_abs >= 0.9,
        "|mu(0)| at n=256 must clear 0.9, got {}",
        last.mu_abs
    );
    println!(
        "criterion 02 (Beltrami blow-up, |mu(0)| at 256 = {:.6}): PASS",
        last.mu_abs
    );
}

#[test]
fn criterion_03_refuted_hypothesis_exhibit() {
    let rows = counterexample_experiment(&N_LIST).unwrap();
    for r in &rows {
        assert_eq!(
            r.h_tilde_minus_one, -1.0,
            "conjugate of n={} must fix -1 exactly",
            r.n
        );
    }
    // the pair: bounded h̃(-1) with blowing-up |mu(0)|
    assert!(rows.last().unwrap().mu_abs >= 0.9);
    println!("criterion 03 (h̃_n(-1) = -1 exactly while |mu(0)| -> 1): PASS");
}

#[test]
fn criterion_04_two_route_beltrami() {
    let mut maps: Vec<(String, BoundaryMap)> =
        vec![("identity".into(), BoundaryMap::identity(Model::Circle))];
    // normalized random disk Möbius maps (post-composed so ex(h)(0) = 0)
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..3 {
        let a = Complex64::from_polar(rng.gen_range(0.1..0.6), rng.gen_range(0.0..TAU));
        let rot = Complex64::from_polar(1.0, rng.gen_range(0.0..TAU));
        let m = Moebius::new(rot, rot * a, a.conj(), c(1.0, 0.0)).unwrap();
        let m0 = m.apply(Point::Finite(c(0.0, 0.0))).finite().unwrap();
        let sigma = Moebius::new(c(1.0, 0.0), -m0, -m0.conj(), c(1.0, 0.0)).unwrap();
        let h = BoundaryMap::from_disk_moebius(sigma.compose(&m));
        maps.push((format!("moebius-{i}"), h));
    }
    for n in [4u32, 16, 64] {
        maps.push((format!("counterexample-{n}"), counterexample_map(n).unwrap()));
    }
    let mut worst: f64 = 0.0;
    for (name, h) in &maps {
        let rule = QuadratureRule::for_map(h).unwrap();
        let closed = beltrami_at_origin(h, &rule).unwrap();
        let fd = beltrami_at_origin_fd(h, 3e-4).unwrap();
        let err = (closed - fd).norm();
        assert!(err < 1e-6, "{name}: closed {closed} vs fd {fd} (err {err:e})");
        worst = worst.max(err);
    }
    println!("criterion 04 (two-route Beltrami, max err = {worst:.2e} < 1e-6): PASS");
}

#[test]
fn criterion_05_conformal_naturality() {
    // ex(id) = id on a 100-point grid
    let id = BoundaryMap::identity(Model::Circle);
    let mut worst_id: f64 = 0.0;
    for i in 0..100 {
        let r = 0.009 * i as f64;
        let z = Complex64::from_polar(r, 0.37 * i as f64);
        let w = extend(&id, z, 1e-11).unwrap();
        worst_id = worst_id.max((w - z).norm());
    }
    assert!(worst_id < 1e-10, "ex(id) drift {worst_id:e}");

    // 50 random (A, B, z): extend(A∘h∘B, z) = A(extend(h, B(z)))
    let h = counterexample_map(5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(555);
    let random_moebius = |rng: &mut ChaCha8Rng| {
        let a = Complex64::from_polar(rng.gen_range(0.0..0.6), rng.gen_range(0.0..TAU));
        let rot = Complex64::from_polar(1.0, rng.gen_range(0.0..TAU));
        Moebius::new(rot, rot * a, a.conj(), c(1.0, 0.0)).unwrap()
    };
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let a = random_moebius(&mut rng);
        let b = random_moebius(&mut rng);
        let z = Complex64::from_polar(rng.gen_range(0.0..0.7), rng.gen_range(0.0..TAU));
        let composed = BoundaryMap::compose(vec![
            BoundaryMap::from_disk_moebius(a),
            h.clone(),
            BoundaryMap::from_disk_moebius(b),
        ])
        .unwrap();
        let lhs = extend(&composed, z, 1e-11).unwrap();
        let bz = b.apply(Point::Finite(z)).finite().unwrap();
        let rhs = a
            .apply(Point::Finite(extend(&h, bz, 1e-11).unwrap()))
            .finite()
            .unwrap();
        worst = worst.max((lhs - rhs).norm());
    }
    assert!(worst < 1e-8, "naturality error {worst:e}");
    println!(
        "criterion 05 (naturality max err = {worst:.2e} < 1e-8, ex(id) err = {worst_id:.2e}): PASS"
    );
}

#[test]
fn criterion_06_shear_round_trip() {
    let tess = Arc::new(Tesselation::enumerate(8).unwrap());
    let h = to_halfplane(&counterexample_map(8).unwrap()).unwrap();
    let s = shear_function(&h, Arc::clone(&tess)).unwrap();
    let cm = characteristic_map(&s).unwrap();
    let s2 = cm.shear_function().unwrap();
    let mut worst: f64 = 0.0;
    let mut edges = 0;
    for id in tess.interior_edges() {
        let a = s.value(id).unwrap();
        let b = s2.value(id).unwrap();
        worst = worst.max((a - b).abs());
        edges += 1;
    }
    assert!(worst < 1e-9, "round-trip error {worst:e} on {edges} edges");

    // the zero table reconstructs the identity exactly on every vertex
    let zero = ShearFunction::zero(Arc::clone(&tess));
    let cm = characteristic_map(&zero).unwrap();
    for v in tess.vertices() {
        assert_eq!(cm.image(v).unwrap(), v.to_point(), "vertex {v}");
    }
    println!(
        "criterion 06 (shear round trip on {edges} edges, max err = {worst:.2e} < 1e-9; \
         zero table reconstructs identity exactly): PASS"
    );
}

#[test]
fn criterion_07_fan_quantity_matches_reconstruction() {
    let tess = Arc::new(Tesselation::enumerate(6).unwrap());
    let h = to_halfplane(&counterexample_map(4).unwrap()).unwrap();
    let s = shear_function(&h, Arc::clone(&tess)).unwrap();
    let cm = characteristic_map(&s).unwrap();
    let mut checked = 0usize;
    let mut worst: f64 = 0.0;
    let tips: Vec<FareyVertex> = tess.vertices().copied().collect();
    for p in &tips {
        for k in 0..=4u32 {
            for m in -8..=8i64 {
                let Ok(v) = s_pmk(&s, p, m, k) else { continue };
                // the fan quantity telescopes to the cross-ratio distortion
                // on the quadruple of radius k+1
                let Ok(q) = tess.fan_quadruple_exact(p, m, k as u32 + 1) else {
                    continue;
                };
                let imgs = [
                    cm.image(&q[0]).unwrap(),
                    cm.image(&q[1]).unwrap(),
                    cm.image(&q[2]).unwrap(),
                    cm.image(&q[3]).unwrap(),
                ];
                let cr = cross_ratio_points(imgs[0], imgs[1], imgs[2], imgs[3])
                    .unwrap()
                    .re;
                let err = (v - cr).abs() / cr.max(1.0);
                assert!(err < 1e-9, "tip {p}, m={m}, k={k}: {v} vs {cr}");
                worst = worst.max(err);
                checked += 1;
            }
        }
    }
    assert!(checked > 500, "only {checked} windows checked");
    println!(
        "criterion 07 (s(p;m,k) vs reconstructed fan quadruples, {checked} windows, \
         max rel err = {worst:.2e} < 1e-9): PASS"
    );
}

#[test]
fn criterion_08_farey_combinatorics() {
    let tess = Tesselation::enumerate(10).unwrap();
    let mut counts = vec![0usize; 11];
    for id in tess.edge_ids() {
        counts[tess.edge(id).generation as usize] += 1;
    }
    assert_eq!(counts[0], 3);
    for g in 1..=10usize {
        assert_eq!(counts[g], 3 << g, "generation {g}");
    }
    // every interior edge quadruple has cross ratio exactly 1 (rational)
    let mut edge_quads = 0;
    for id in tess.interior_edges() {
        let q = tess.edge_quadruple_exact(id).unwrap();
        assert_eq!(cross_ratio_exact(&q), Some((1, 1)));
        edge_quads += 1;
    }
    // every available fan quadruple likewise
    let shallow = Tesselation::enumerate(7).unwrap();
    let mut fan_quads = 0;
    let tips: Vec<FareyVertex> = shallow.vertices().copied().collect();
    for p in &tips {
        for k in 1..=3u32 {
            for m in -10..=10i64 {
                match shallow.fan_quadruple_exact(p, m, k) {
                    Ok(q) => {
                        assert_eq!(cross_ratio_exact(&q), Some((1, 1)), "{p} {m} {k}");
                        fan_quads += 1;
                    }
                    Err(_) => continue,
                }
            }
        }
    }
    assert!(fan_quads > 1000);
    println!(
        "criterion 08 (edge counts 3·2^n to depth 10; {edge_quads} edge and {fan_quads} fan \
         quadruples with cr = 1 exactly): PASS"
    );
}

/// All (tip, m, k) fan windows carrying shear values, enumerated through the
/// public tesselation interface.
fn windows(s: &ShearFunction, k_max: u32) -> Vec<(FareyVertex, i64, u32)> {
    let tess = s.tesselation();
    let mut out = Vec::new();
    let tips: Vec<FareyVertex> = tess.vertices().copied().collect();
    for p in &tips {
        let mut idx: Vec<i64> = tess
            .incident_edges(p)
            .iter()
            .filter(|&&id| s.value(id).is_some())
            .map(|&id| {
                let e = tess.edge(id);
                let other = if e.v1 == *p { e.v2 } else { e.v1 };
                tess.fan_index_of(p, &other).unwrap()
            })
            .collect();
        if idx.is_empty() {
            continue;
        }
        idx.sort();
        let (lo, hi) = (idx[0], *idx.last().unwrap());
        let radius_cap = (((hi - lo) / 2) as u32).min(k_max);
        for k in 0..=radius_cap {
            for m in (lo + k as i64)..=(hi - k as i64) {
                out.push((*p, m, k));
            }
        }
    }
    out
}

#[test]
fn criterion_09_metric_inequalities() {
    let depth = 6u32;
    let k_max = 6u32;
    let tess = Arc::new(Tesselation::enumerate(depth).unwrap());
    let fix = [Point::real(0.0), Point::real(1.0), Point::Infinity];

    // pair 1: identity vs Counterexample(16); pair 2: two random piecewise maps
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let random_piecewise = |rng: &mut ChaCha8Rng| loop {
        let mut breaks: Vec<f64> = (0..8).map(|_| rng.gen_range(0.0..TAU)).collect();
        let mut images: Vec<f64> = (0..8).map(|_| rng.gen_range(0.0..TAU)).collect();
        breaks.sort_by(f64::total_cmp);
        images.sort_by(f64::total_cmp);
        if breaks.windows(2).any(|w| w[1] - w[0] < 1e-2)
            || images.windows(2).any(|w| w[1] - w[0] < 1e-2)
        {
            continue;
        }
        return BoundaryMap::piecewise(breaks, images).unwrap();
    };
    let pairs = [
        (
            BoundaryMap::identity(Model::Line),
            normalize_fix_three(
                &to_halfplane(&counterexample_map(16).unwrap()).unwrap(),
                &fix,
            )
            .unwrap(),
        ),
        (
            normalize_fix_three(&to_halfplane(&random_piecewise(&mut rng)).unwrap(), &fix)
                .unwrap(),
            normalize_fix_three(&to_halfplane(&random_piecewise(&mut rng)).unwrap(), &fix)
                .unwrap(),
        ),
    ];

    for (idx, (h1, h2)) in pairs.iter().enumerate() {
        let s1 = shear_function(h1, Arc::clone(&tess)).unwrap();
        let s2 = shear_function(h2, Arc::clone(&tess)).unwrap();
        let ds = d_s(&s1, &s2, k_max);

        // shared sample set: the fan quadruples matched to every window,
        // plus random unit-cr quadruples transported to the line
        let mut quads = Vec::new();
        for (p, m, k) in windows(&s1, k_max) {
            if let Ok(q) = tess.fan_quadruple(&p, m, k + 1) {
                quads.push(q);
            }
        }
        let matched_count = quads.len();
        for q in UnitCrSampler::new(100, 3 + idx as u64).quadruples().unwrap() {
            quads.push(quadruple_to_halfplane(&q).unwrap());
        }
        let dc = d_c_over(h1, h2, &quads).unwrap();
        assert!(
            ds <= dc + 1e-9,
            "pair {idx}: d_S = {ds} exceeds shared-sample d_C = {dc}"
        );

        // asymptotic side: d_AS curve against the matched d_AC values
        let thresholds = [0u32, 1, 2, 3, 4];
        let das = d_as(&s1, &s2, &thresholds).unwrap();
        for &(g, das_val) in &das {
            let mut dac: f64 = 0.0;
            for (p, m, k) in windows(&s1, u32::MAX) {
                let eg_plus = match tess.fan_edge(&p, m + k as i64) {
                    Ok(Some(id)) => tess.edge(id).generation,
                    _ => continue,
                };
                let eg_minus = match tess.fan_edge(&p, m - k as i64) {
                    Ok(Some(id)) => tess.edge(id).generation,
                    _ => continue,
                };
                if eg_plus.min(eg_minus) < g {
                    continue;
                }
                if let Ok(q) = tess.fan_quadruple(&p, m, k + 1) {
                    dac = dac.max(log_cr_ratio(h1, h2, &q).unwrap());
                }
            }
            assert!(
                das_val <= dac + 1e-9,
                "pair {idx}, G = {g}: d_AS = {das_val} exceeds matched d_AC = {dac}"
            );
        }
        println!(
            "criterion 09 pair {idx}: d_S = {ds:.6} <= d_C = {dc:.6} \
             ({matched_count} matched quadruples); d_AS <= d_AC at G = 0..4"
        );
    }
    println!("criterion 09 (finite-depth d_S <= d_C and d_AS <= d_AC pointwise): PASS");
}

#[test]
fn criterion_10_modulus_unit_and_reciprocity() {
    let m1 = modulus_from_cross_ratio(1.0).unwrap();
    assert!((m1 - 1.0).abs() < 1e-12, "M(1) = {m1}");
    for lambda in [0.2, 1.0 / 3.0, 0.5, 2.0, 7.0] {
        let prod = modulus_from_cross_ratio(lambda).unwrap()
            * modulus_from_cross_ratio(1.0 / lambda).unwrap();
        assert!((prod - 1.0).abs() < 1e-10, "reciprocity at {lambda}: {prod}");
    }
    // the d_AM integrand is exactly half the rho distance of the image cross
    // ratios: both sides evaluate through the same modulus routine
    let id = BoundaryMap::identity(Model::Circle);
    let h = counterexample_map(6).unwrap();
    for q in UnitCrSampler::new(40, 77).quadruples().unwrap() {
        let a = shears::metrics::image_quadruple(&id, &q).unwrap();
        let b = shears::metrics::image_quadruple(&h, &q).unwrap();
        let cra = shears::geom::cross_ratio(&a).unwrap();
        let crb = shears::geom::cross_ratio(&b).unwrap();
        let lhs = shears::metrics::log_modulus_ratio(&id, &h, &q).unwrap();
        let rhs = 0.5 * rho_distance(cra, crb).unwrap();
        assert_eq!(lhs, rhs, "per-sample modulus identity");
    }
    println!("criterion 10 (M(1) = 1, reciprocity, per-sample rho identity): PASS");
}

/// The analytic sanity anchors behind criterion 1: closed forms for the
/// counter-example coefficients, kept here so a regression in the quadrature
/// is flagged against an independent derivation.
#[test]
fn closed_form_anchor_values() {
    let rows = counterexample_experiment(&[4, 8, 16]).unwrap();
    let closed = [
        // (c1, c-1, d-1) by direct integration of the angle map
        (0.900316316157106, 0.318309886183791, 0.600210877438071),
        (0.784213303576537, 0.477464829275686, 0.835281735775228),
        (0.713585487944890, 0.557042300821634, 0.927347727734592),
    ];
    for (r, (c1, cm1, dm1)) in rows.iter().zip(closed) {
        assert!((r.c1.re - c1).abs() < 1e-11, "n={}", r.n);
        assert!((r.c_minus1.re - cm1).abs() < 1e-11, "n={}", r.n);
        assert!((r.d_minus1.re - dm1).abs() < 1e-11, "n={}", r.n);
    }
    // pivot behavior of the family itself
    let h = counterexample_map(4).unwrap();
    let pivot = FRAC_PI_2 * 0.75;
    let img = h.evaluate_angle(pivot).unwrap();
    assert!((img - FRAC_PI_2 / 4.0).abs() < 1e-13);
}
