use proptest::prelude::*;
use stitchkit::torus::{LSection, TorusFn};

type F = TorusFn<f64>;
type L = LSection<f64>;

/// One trigonometric monomial: mode, base exponents, dyadic amplitude, cos or sin.
fn term(n: usize) -> impl Strategy<Value = (Vec<i32>, Vec<u32>, i32, bool)> {
    (
        prop::collection::vec(-2i32..=2, n - 1),
        prop::collection::vec(0u32..=2, n - 1),
        -8i32..=8,
        any::<bool>(),
    )
}

fn build(n: usize, terms: &[(Vec<i32>, Vec<u32>, i32, bool)]) -> F {
    let mut f = F::zero(n).unwrap();
    for (k, alpha, amp, cos) in terms {
        let amp = *amp as f64 / 4.0;
        let t = if *cos {
            F::cos_term(n, k, alpha, amp)
        } else {
            F::sin_term(n, k, alpha, amp)
        };
        f = f.add(&t.unwrap()).unwrap();
    }
    f
}

fn torus_fn(n: usize) -> impl Strategy<Value = F> {
    prop::collection::vec(term(n), 1..=3).prop_map(move |t| build(n, &t))
}

fn triple() -> impl Strategy<Value = (F, F, F)> {
    (2usize..=3).prop_flat_map(|n| (torus_fn(n), torus_fn(n), torus_fn(n)))
}

fn small(residual: &F, parts: &[&F]) -> bool {
    let scale = parts.iter().map(|p| p.max_abs()).fold(1.0, f64::max);
    residual.max_abs() <= 1e-12 * scale
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn bracket_is_a_derivation((f, g, h) in triple()) {
        let lhs = f.poisson(&g.mul(&h).unwrap()).unwrap();
        let a = f.poisson(&g).unwrap().mul(&h).unwrap();
        let b = g.mul(&f.poisson(&h).unwrap()).unwrap();
        let r = lhs.sub(&a.add(&b).unwrap()).unwrap();
        prop_assert!(small(&r, &[&lhs, &a, &b]), "{:e}", r.max_abs());
    }

    #[test]
    fn jacobi_identity((f, g, h) in triple()) {
        let x = f.poisson(&g.poisson(&h).unwrap()).unwrap();
        let y = g.poisson(&h.poisson(&f).unwrap()).unwrap();
        let z = h.poisson(&f.poisson(&g).unwrap()).unwrap();
        let r = x.add(&y).unwrap().add(&z).unwrap();
        prop_assert!(small(&r, &[&x, &y, &z]), "{:e}", r.max_abs());
    }

    #[test]
    fn bracket_is_antisymmetric((f, g, _h) in triple()) {
        let fg = f.poisson(&g).unwrap();
        let gf = g.poisson(&f).unwrap();
        prop_assert!(small(&fg.add(&gf).unwrap(), &[&fg]));
    }

    #[test]
    fn fibre_gradients_are_closed((f, _g, _h) in triple()) {
        let d = L::fibre_gradient(&f).unwrap().fibrewise_d().unwrap();
        let scale = 16.0 * std::f64::consts::PI.powi(2) * f.max_abs().max(1.0);
        prop_assert!(d.max_abs() <= 1e-12 * scale, "{:e}", d.max_abs());
    }

    #[test]
    fn cycle_integrals_ignore_exact_terms((f, g, h) in triple()) {
        let n = f.n();
        let comps: Vec<F> = (0..n - 1).map(|i| if i == 0 { h.fibre_average() } else { g.fibre_average() }).collect();
        let ell = L::new(comps).unwrap().add(&L::fibre_gradient(&f).unwrap()).unwrap();
        let gauged = ell.add(&L::fibre_gradient(&g).unwrap()).unwrap();
        for j in 2..=n {
            let a = ell.cycle_integral(j).unwrap();
            let b = gauged.cycle_integral(j).unwrap();
            prop_assert!(small(&a.sub(&b).unwrap(), &[&a, &b]));
        }
    }

    #[test]
    fn product_commutes((f, g, _h) in triple()) {
        prop_assert_eq!(f.mul(&g).unwrap(), g.mul(&f).unwrap());
    }
}
