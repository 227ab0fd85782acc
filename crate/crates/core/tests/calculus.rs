mod common;

use common::oracle_a;
use stitchkit::calculus::{
    closedness_transfer, closedness_transfer_s, ell_to_s, first_order_class, s_to_ell, series_inversion, EllSequence,
    GermChange, SSequence,
};
use stitchkit::random::{self, RandomShape};
#[test]
fn multi_index_recursion_matches_series_inversion() {
    for seed in 0..12u64 {
        let mut rng = random::rng(seed);
        let n = 2 + (seed % 2) as usize;
        let order = 2 + (seed % 3) as usize;
        let ell = random::random_closed_ell::<f64, _>(&mut rng, &RandomShape::new(n, order)).unwrap();
        let s = ell_to_s(&ell).unwrap();
        let fast = s_to_ell(&s).unwrap();
        let slow = oracle_a(&s);
        let lib = series_inversion(&s).unwrap();
        for ((x, y), z) in fast.sections().iter().zip(&slow).zip(lib.sections()) {
            assert!(x.approx_eq(y, 1e-12), "seed {seed}: {:e}", x.distance(y).unwrap());
            assert!(z.approx_eq(y, 1e-12), "seed {seed}: {:e}", z.distance(y).unwrap());
        }
    }
}

#[test]
fn oracle_reproduces_low_order_formulas_on_arbitrary_input() {
    let mut rng = random::rng(99);
    let shape = RandomShape::new(3, 2);
    let s = SSequence::new(vec![
        random::random_section::<f64, _>(&mut rng, &shape).unwrap(),
        random::random_section::<f64, _>(&mut rng, &shape).unwrap(),
    ])
    .unwrap();
    let a = oracle_a(&s);
    assert!(a[0].approx_eq(&s.get(1).unwrap().neg(), 1e-14));
    for j in 2..=3 {
        let mut want = s.get(2).unwrap().component(j).unwrap().neg();
        for k in 2..=3 {
            let t = s.get(1).unwrap().component(j).unwrap().d_base(k).unwrap();
            want = want.add(&t.mul(s.get(1).unwrap().component(k).unwrap()).unwrap()).unwrap();
        }
        assert!(a[1].component(j).unwrap().approx_eq(&want, 1e-13));
    }
}

#[test]
fn round_trips_in_both_directions() {
    for seed in 0..6u64 {
        let mut rng = random::rng(1000 + seed);
        let n = 2 + (seed % 2) as usize;
        let ell = random::random_closed_ell::<f64, _>(&mut rng, &RandomShape::new(n, 4)).unwrap();
        let s = ell_to_s(&ell).unwrap();
        assert!(s_to_ell(&s).unwrap().approx_eq(&ell, 1e-12));
        let ss = ell_to_s(&s_to_ell(&s).unwrap()).unwrap();
        assert!(ss.approx_eq(&s, 1e-12));
    }
}

#[test]
fn closedness_transfers_both_ways() {
    for seed in 0..5u64 {
        let mut rng = random::rng(2000 + seed);
        let shape = RandomShape::new(3, 3);
        let ell = random::random_closed_ell::<f64, _>(&mut rng, &shape).unwrap();
        let v = closedness_transfer(&ell).unwrap();
        assert!(v.ell_closed && v.s_admissible);

        let c = random::random_constant_ell::<f64, _>(&mut rng, &shape).unwrap();
        let v = closedness_transfer(&c).unwrap();
        assert!(v.ell_closed && v.s_admissible);

        let bad = random::random_section::<f64, _>(&mut rng, &shape).unwrap();
        let mut secs = ell.sections().to_vec();
        secs[0] = bad;
        let open = EllSequence::new_unverified(secs).unwrap();
        assert!(!open.is_closed());
        let v = closedness_transfer(&open).unwrap();
        assert!(!v.s_admissible && v.consistent());
        let rep = ell_to_s(&open).unwrap().check_admissible().unwrap();
        assert_eq!(rep.first_failure.unwrap().m, 1);

        let s = SSequence::new(open.sections().to_vec()).unwrap();
        assert!(closedness_transfer_s(&s).unwrap().consistent());
    }
}

#[test]
fn germs_form_a_group_acting_on_sequences() {
    for seed in 0..4u64 {
        let mut rng = random::rng(3000 + seed);
        let shape = RandomShape::new(3, 3);
        let f = random::random_germ::<f64, _>(&mut rng, &shape).unwrap();
        let g = random::random_germ::<f64, _>(&mut rng, &shape).unwrap();
        let h = random::random_germ::<f64, _>(&mut rng, &shape).unwrap();
        let id = GermChange::identity(3, 3).unwrap();
        assert!(f.compose(&id).unwrap().approx_eq(&f, 1e-13));
        assert!(id.compose(&f).unwrap().approx_eq(&f, 1e-13));
        let left = f.compose(&g).unwrap().compose(&h).unwrap();
        let right = f.compose(&g.compose(&h).unwrap()).unwrap();
        assert!(left.approx_eq(&right, 1e-12));
        assert!(f.compose(&f.inverse().unwrap()).unwrap().is_identity_within(1e-12));
        assert!(f.inverse().unwrap().compose(&f).unwrap().is_identity_within(1e-12));

        let ell = random::random_closed_ell::<f64, _>(&mut rng, &shape).unwrap();
        assert!(id.act(&ell).unwrap().approx_eq(&ell, 1e-12));
        let one = f.compose(&g).unwrap().act(&ell).unwrap();
        let two = f.act(&g.act(&ell).unwrap()).unwrap();
        assert!(one.approx_eq(&two, 1e-11), "{:e}", one.distance(&two).unwrap());
        assert!(one.is_closed());
    }
}

#[test]
fn first_order_germs_add() {
    let mut rng = random::rng(4);
    let shape = RandomShape::new(3, 1);
    let f = random::random_germ::<f64, _>(&mut rng, &shape).unwrap();
    let g = random::random_germ::<f64, _>(&mut rng, &shape).unwrap();
    let fg = f.compose(&g).unwrap();
    assert!(fg.get(1).unwrap().approx_eq(&f.get(1).unwrap().add(g.get(1).unwrap()).unwrap(), 1e-15));
}

#[test]
fn constant_sequences_are_normalized_to_zero() {
    for seed in 0..4u64 {
        let mut rng = random::rng(5000 + seed);
        let ell = random::random_constant_ell::<f64, _>(&mut rng, &RandomShape::new(3, 3)).unwrap();
        let g = GermChange::normalizing(&ell).unwrap();
        let out = g.act(&ell).unwrap();
        assert!(out.sections().iter().all(|s| s.max_abs() < 1e-12));
    }
}

#[test]
fn first_order_class_splits() {
    let mut rng = random::rng(6);
    let shape = RandomShape::new(3, 1);
    let ell = random::random_closed_ell::<f64, _>(&mut rng, &shape).unwrap();
    let c = first_order_class(ell.get(1).unwrap());
    assert!(c.residual.is_fibrewise_constant());
    assert!(c.representative.fibre_average().is_zero());
    assert!(c.representative.add(&c.residual).unwrap().approx_eq(ell.get(1).unwrap(), 0.0));
}

#[test]
fn order_five_round_trip_runs() {
    let t = std::time::Instant::now();
    let mut rng = random::rng(77);
    let ell = random::random_closed_ell::<f64, _>(&mut rng, &RandomShape::new(3, 5)).unwrap();
    let s = ell_to_s(&ell).unwrap();
    assert!(s_to_ell(&s).unwrap().approx_eq(&ell, 1e-12));
    assert!(s.check_admissible().unwrap().passed);
    eprintln!("order 5 n=3 round trip: {:?}", t.elapsed());
}

#[test]
fn single_precision_round_trip() {
    let mut rng = random::rng(8);
    let ell = random::random_closed_ell::<f32, _>(&mut rng, &RandomShape::new(3, 3)).unwrap();
    let s = ell_to_s(&ell).unwrap();
    assert!(s_to_ell(&s).unwrap().approx_eq(&ell, 1e-4));
}
