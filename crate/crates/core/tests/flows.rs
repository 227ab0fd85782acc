use std::f64::consts::TAU;

use num_complex::Complex64 as C;
use rand::Rng;
use stitchkit::flows::{
    cohomology_jump, conjugate_to_unit_shear, discrepancy, ham_field, integrate, invariance_check, invariance_error,
    monodromy, omega, BasePath, Combination, ContinuationOptions, FnField, ScalarField,
};
use stitchkit::random::rng;
use stitchkit::zoo::{self, make, Side, Variant, NAMES};

fn circle(center: &[f64], axes: (usize, usize), radius: f64) -> BasePath {
    BasePath::Circle {
        center: center.to_vec(),
        axes,
        radius,
    }
}

#[test]
fn numeric_discrepancy_matches_corrected_closed_form() {
    let mut r = rng(11);
    for name in NAMES {
        let ex = make(name).unwrap();
        for z in ex.seam_points(&mut r, 20) {
            let d = discrepancy(&ex, &z).unwrap();
            assert!(d.max_residual() <= 1e-7, "{name}: residual {}", d.max_residual());
            let cf = ex.closed_form_a(&z, Variant::Corrected).unwrap();
            for (a, b) in d.a.iter().zip(&cf) {
                assert!((a - b).abs() <= 1e-6, "{name}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn uncorrected_focus_focus_formula_disagrees() {
    let ex = make("focus_focus").unwrap();
    let mut r = rng(12);
    let mut worst: f64 = 0.0;
    for z in ex.seam_points(&mut r, 20) {
        let d = discrepancy(&ex, &z).unwrap();
        if let Ok(p) = ex.closed_form_a(&z, Variant::Uncorrected) {
            worst = worst.max((p[0] - d.a[0]).abs());
        }
    }
    assert!(worst > 1e-3);
    // the uncorrected denominator vanishes at the regular point z1 = z2 = 1
    let one = [C::new(1.0, 0.0), C::new(1.0, 0.0)];
    assert!(ex.in_domain(&one));
    assert!(ex.closed_form_a(&one, Variant::Uncorrected).is_err());
}

#[test]
fn extracted_coefficients_are_circle_invariant() {
    let mut r = rng(13);
    let ex = make("amoeba").unwrap();
    for z in ex.seam_points(&mut r, 10) {
        let theta = r.gen_range(0.0..TAU);
        let a = discrepancy(&ex, &z).unwrap().a;
        let b = discrepancy(&ex, &zoo::act(theta, &z)).unwrap().a;
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-8);
        }
    }
}

#[test]
fn examples_are_circle_invariant_and_continuous() {
    let mut r = rng(14);
    for name in NAMES {
        let ex = make(name).unwrap();
        let z = ex.seam_points(&mut r, 1).pop().unwrap();
        assert!(invariance_check(&ex, &z, 0.0).unwrap());
        assert!(invariance_check(&ex, &z, std::f64::consts::PI).unwrap());
        for _ in 0..20 {
            let mut w: Vec<C> = (0..ex.n).map(|_| C::new(r.gen_range(-1.5..1.5), r.gen_range(-1.5..1.5))).collect();
            if !ex.in_domain(&w) {
                continue;
            }
            assert!(invariance_error(&ex, &w, r.gen_range(0.0..TAU)).unwrap() <= 1e-10);
            // seam continuity
            let s = w[1].norm() / w[0].norm();
            w[0] *= s;
            if ex.in_domain(&w) {
                let p = ex.eval_side(&w, Side::Plus).unwrap();
                let m = ex.eval_side(&w, Side::Minus).unwrap();
                for (a, b) in p.iter().zip(&m) {
                    assert!((a - b).abs() <= 1e-12);
                }
            }
        }
    }
}

#[test]
fn fields_commute_and_span_a_lagrangian() {
    let mut r = rng(15);
    for name in NAMES {
        let ex = make(name).unwrap();
        for _ in 0..10 {
            let b: Vec<f64> = (0..ex.n).map(|_| r.gen_range(-0.8..0.8)).collect();
            let Ok(z) = ex.fibre_point(&b) else { continue };
            let side = if b[0] >= 0.0 { Side::Plus } else { Side::Minus };
            let etas: Vec<Vec<C>> = (1..=ex.n)
                .map(|j| ham_field(&Combination::component(&ex, j, side), &z).unwrap())
                .collect();
            for i in 0..ex.n {
                for j in 0..ex.n {
                    assert!(omega(&etas[i], &etas[j]).abs() <= 1e-8);
                }
            }
            for k in 1..=ex.n {
                let h = Combination::component(&ex, k, side);
                let tr = integrate(&h, &z, 1.0, 400).unwrap();
                let f0 = ex.eval_side(&z, side).unwrap();
                let f1 = ex.eval_side(tr.end(), side).unwrap();
                for (a, c) in f0.iter().zip(&f1) {
                    assert!((a - c).abs() <= 1e-7, "{name}: f not conserved along eta_{k}");
                }
            }
        }
    }
}

#[test]
fn analytic_gradients_match_central_differences() {
    let mut r = rng(16);
    for name in NAMES {
        let ex = make(name).unwrap();
        for _ in 0..10 {
            let z: Vec<C> = (0..ex.n).map(|_| C::new(r.gen_range(-1.5..1.5), r.gen_range(-1.5..1.5))).collect();
            if !ex.in_domain(&z) {
                continue;
            }
            for j in 1..=ex.n {
                let h = Combination::component(&ex, j, Side::Global);
                let g = h.grad_bar(&z).unwrap();
                let fd = FnField::new({
                    let ex = ex.clone();
                    move |w: &[C]| Ok(ex.eval(w)?[j - 1])
                })
                .grad_bar(&z)
                .unwrap();
                for (a, b) in g.iter().zip(&fd) {
                    assert!((a - b).norm() <= 1e-6);
                }
            }
        }
    }
}

#[test]
fn extracted_first_invariant_is_fibrewise_closed() {
    // Integrate sum a_k dt_k around a small rectangle of flow times on a seam fibre.
    let ex = make("amoeba").unwrap();
    let z0 = ex.fibre_point(&[0.0, -0.5, -1.5]).unwrap();
    let h = 0.3;
    let steps = 200;
    let legs = [(2, h), (3, h), (2, -h), (3, -h)];
    let mut z = z0.clone();
    let mut total = 0.0;
    for (k, t) in legs {
        let field = Combination::component(&ex, k, Side::Minus);
        let tr = integrate(&field, &z, t, steps).unwrap();
        let vals: Vec<f64> = tr.points.iter().map(|p| discrepancy(&ex, p).unwrap().a[k - 2]).collect();
        let dt = t / steps as f64;
        let mut s = vals[0] + vals[steps];
        for (i, v) in vals.iter().enumerate().take(steps).skip(1) {
            s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
        }
        total += s * dt / 3.0;
        z = tr.end().to_vec();
    }
    let gap: f64 = z.iter().zip(&z0).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(gap < 1e-7);
    assert!(total.abs() <= 1e-5, "loop integral {total}");
}

#[test]
fn focus_focus_monodromy_is_a_unit_shear() {
    let ex = make("focus_focus").unwrap();
    let res = monodromy(&ex, &circle(&[0.0, 0.0], (0, 1), 0.5), &ContinuationOptions::default()).unwrap();
    assert!(res.snap_error <= 1e-3, "snap {}", res.snap_error);
    assert!(conjugate_to_unit_shear(&res.matrix), "{}", res.matrix);
    assert_eq!(res.matrix.determinant(), 1);
    assert!(res.matrix.fixes_circle());
    // a loop that does not enclose the singular value
    let res = monodromy(&ex, &circle(&[0.0, 1.5], (0, 1), 0.5), &ContinuationOptions::default()).unwrap();
    assert!(res.matrix.is_identity() && res.snap_error <= 1e-3);
}

#[test]
fn amoeba_monodromy_matches_the_two_leg_pattern() {
    let ex = make("amoeba").unwrap();
    let opts = ContinuationOptions::default();
    let t1 = monodromy(&ex, &circle(&[0.0, -2.0, -0.01], (0, 2), 0.5), &opts).unwrap();
    let t2 = monodromy(&ex, &circle(&[0.0, -0.01, -2.0], (0, 1), 0.5), &opts).unwrap();
    println!("{} {:?} | {} {:?}", t1.matrix, t1.raw, t2.matrix, t2.raw);
    assert!(t1.snap_error <= 1e-3 && t2.snap_error <= 1e-3);
    let r1 = &t1.matrix.rows;
    let r2 = &t2.matrix.rows;
    assert_eq!((r1[0][1], r1[0][2].abs()), (0, 1));
    assert_eq!((r2[0][1].abs(), r2[0][2]), (1, 0));
}

#[test]
fn seam_component_jumps() {
    let opts = ContinuationOptions::default();
    let ff = make("focus_focus").unwrap();
    let u = cohomology_jump(&ff, 0, 2, &opts).unwrap();
    let d = cohomology_jump(&ff, 1, 2, &opts).unwrap();
    println!("ff {u:?} {d:?}");
    assert_eq!(u.snapped, 0);
    assert_eq!(d.snapped.abs(), 1);
    assert!(u.snap_error <= 1e-3 && d.snap_error <= 1e-3);
}

#[test]
fn amoeba_seam_components_show_the_jump_pattern() {
    let opts = ContinuationOptions::default();
    let ex = make("amoeba").unwrap();
    let mut table = vec![];
    for c in 0..3 {
        let row: Vec<_> = (2..=3).map(|j| cohomology_jump(&ex, c, j, &opts).unwrap()).collect();
        println!("{} {:?}", ex.seam_labels[c], row.iter().map(|x| (x.value, x.integral)).collect::<Vec<_>>());
        for x in &row {
            assert!(x.snap_error <= 1e-3);
        }
        table.push([row[0].snapped, row[1].snapped]);
    }
    assert_eq!(table[0], [0, 0]);
    assert_eq!([table[1][0].abs(), table[1][1]], [1, 0]);
    assert_eq!([table[2][0], table[2][1].abs()], [0, 1]);
}
