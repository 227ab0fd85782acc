use stitchkit::builder::{
    glue_q, glue_q_tilde_seam, line_integral, line_integral_axes, period_lattice, BuildOptions, BuiltFibration,
    GluePoint,
};
use stitchkit::calculus::EllSequence;
use stitchkit::random::{self, RandomShape};
use stitchkit::torus::{LSection, TorusFn};
use rand::Rng;

type F = TorusFn<f64>;
type L = LSection<f64>;

fn constant_shear(n: usize, c: f64, order: usize) -> EllSequence<f64> {
    let mut secs = vec![L::single(2, F::constant(n, c).unwrap()).unwrap()];
    secs.extend(std::iter::repeat_n(L::zero(n).unwrap(), order - 1));
    EllSequence::new(secs).unwrap()
}

#[test]
fn zero_sequence_builds_the_projection() {
    let ell = EllSequence::new(vec![L::zero(3).unwrap(); 2]).unwrap();
    let u = BuiltFibration::build(&ell, &BuildOptions::unit_box(3)).unwrap();
    assert_eq!(u.eps(), 0.1);
    let p = u.u(&[0.05, 0.3, -0.2], &[0.1, 0.4, 0.7]).unwrap();
    assert_eq!(p, vec![0.05, 0.3, -0.2]);
    let mut rng = random::rng(0);
    let rep = u.verify_lagrangian(&u.sample_points(&mut rng, 10), 1e-5).unwrap();
    assert_eq!(rep.max_bracket, 0.0);
    let lat = period_lattice(&u, &[0.02, 0.1, 0.3]).unwrap();
    assert!((lat - nalgebra::DMatrix::identity(3, 3)).amax() < 1e-10);
}

#[test]
fn constant_first_order_invariant_is_a_linear_shear() {
    let c = 0.75;
    let u = BuiltFibration::build(&constant_shear(2, c, 1), &BuildOptions::unit_box(2)).unwrap();
    for (b1, b2) in [(0.05, 0.3), (-0.08, -0.9), (0.0, 0.5)] {
        let v = u.u(&[b1, b2], &[0.0, 0.37]).unwrap();
        assert!((v[1] - (b2 - c * b1)).abs() < 1e-14);
    }
}

#[test]
fn integer_shear_shifts_the_lattice() {
    let m = 2.0;
    let u = BuiltFibration::build(&constant_shear(2, m, 2), &BuildOptions::unit_box(2)).unwrap();
    for b in [[-0.05, 0.2], [0.05, 0.2], [-0.05, -0.7]] {
        let lat = period_lattice(&u, &b).unwrap();
        assert!((lat[(0, 0)] - 1.0).abs() < 1e-10 && lat[(0, 1)].abs() < 1e-10);
        assert!((lat[(1, 0)] - m).abs() < 1e-9, "{lat}");
        assert!((lat[(1, 1)] - 1.0).abs() < 1e-10);
    }
}

#[test]
fn lattice_rows_constant_for_base_independent_invariants() {
    let n = 3;
    let g = F::sin_term(n, &[1, 1], &[0, 0], 0.05).unwrap();
    let l1 = L::fibre_gradient(&g)
        .unwrap()
        .add(&L::single(2, F::constant(n, 1.0).unwrap()).unwrap())
        .unwrap();
    let ell = EllSequence::new(vec![l1]).unwrap();
    let u = BuiltFibration::build(&ell, &BuildOptions::unit_box(n)).unwrap();
    let first = period_lattice(&u, &[0.03, -0.5, 0.2]).unwrap();
    for b in [[0.03, 0.4, -0.6], [0.03, 0.9, 0.9]] {
        assert!((period_lattice(&u, &b).unwrap() - &first).amax() < 1e-8);
    }
}

#[test]
fn random_closed_sequences_commute_and_match_taylor_data() {
    for seed in 0..3u64 {
        let mut rng = random::rng(40 + seed);
        let ell = random::random_closed_ell::<f64, _>(&mut rng, &RandomShape::new(3, 2)).unwrap();
        let u = BuiltFibration::build(&ell, &BuildOptions::unit_box(3)).unwrap();
        let pts = u.sample_points(&mut rng, 30);
        let rep = u.verify_lagrangian(&pts, 1e-5).unwrap();
        assert!(rep.max_bracket <= 1e-7, "seed {seed}: bracket {:e}", rep.max_bracket);
        let base: Vec<_> = pts.iter().take(5).map(|(b, y)| (b[1..].to_vec(), y[1..].to_vec())).collect();
        let err = u.taylor_check(&base, 0.5 * u.eps()).unwrap();
        eprintln!("seed {seed}: eps {} bracket {:e} taylor {:e}", u.eps(), rep.max_bracket, err);
        assert!(err <= 1e-5);
    }
}

#[test]
fn non_closed_invariant_breaks_commutation() {
    let n = 3;
    let bad = L::single(2, F::sin_term(n, &[0, 1], &[0, 0], 1.0).unwrap()).unwrap();
    let ell = EllSequence::new_unverified(vec![bad]).unwrap();
    assert!(!ell.is_closed());
    let u = BuiltFibration::build(&ell, &BuildOptions::unit_box(n)).unwrap();
    let rep = u
        .verify_lagrangian(&[(vec![0.05, 0.1, 0.2], vec![0.0, 0.3, 0.0])], 1e-5)
        .unwrap();
    assert!(rep.max_bracket > 1e-2, "{:e}", rep.max_bracket);
}

#[test]
fn glue_map_examples() {
    let zero = L::zero(3).unwrap();
    let p = GluePoint::new(vec![0.1, 0.2], 0.3, vec![0.4, 0.9]);
    assert!(glue_q(&zero, &p).unwrap().distance(&p) < 1e-15);
    let m = 3.0;
    let l1 = L::single(2, F::constant(3, m).unwrap()).unwrap();
    let q = glue_q(&l1, &p).unwrap();
    assert!(q.distance(&GluePoint::new(p.b.clone(), p.t1 - m * 0.4, p.tbar.clone())) < 1e-10);
    let bad = L::single(2, F::sin_term(3, &[0, 1], &[0, 0], 1.0).unwrap()).unwrap();
    assert!(glue_q(&bad, &p).is_err());
}

#[test]
fn line_integral_is_path_independent() {
    let mut rng = random::rng(11);
    for _ in 0..10 {
        let ell = random::random_closed_ell::<f64, _>(&mut rng, &RandomShape::new(3, 1)).unwrap();
        let l1 = ell.get(1).unwrap();
        let b: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let t: Vec<f64> = (0..2).map(|_| rng.gen_range(0.0..1.0)).collect();
        let a = line_integral(l1, &b, &t).unwrap();
        let c = line_integral_axes(l1, &b, &t).unwrap();
        assert!((a - c).abs() <= 1e-10, "{a} {c}");
    }
}

#[test]
fn flows_reproduce_the_glue_map_on_the_seam() {
    let mut rng = random::rng(12);
    let ell = random::random_closed_ell::<f64, _>(&mut rng, &RandomShape::new(3, 2)).unwrap();
    let u = BuiltFibration::build(&ell, &BuildOptions::unit_box(3)).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let b: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let p = GluePoint::new(b, rng.gen_range(0.0..1.0), vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]);
        let q = glue_q(ell.get(1).unwrap(), &p).unwrap();
        let qt = glue_q_tilde_seam(&u, &p, 200).unwrap();
        worst = worst.max(q.distance(&qt));
    }
    eprintln!("glue mismatch {worst:e}");
    assert!(worst <= 1e-6);
}
