use std::time::Instant;

use num_complex::Complex64 as C;
use rand::Rng;
use stitchkit::amoeba::{
    member_line, member_sampled, render, AmoebaSpec, Hypersurface, Membership, Polynomial, Sampling,
};
use stitchkit::random::rng;
use stitchkit::zoo::make;

fn sampled_spec(poly: Polynomial, bounds: [f64; 4], res: usize) -> AmoebaSpec {
    AmoebaSpec {
        surface: Hypersurface::Poly(poly),
        bounds,
        width: res,
        height: res,
        sampling: Sampling::default(),
    }
}

#[test]
fn line_complement_has_three_components() {
    let r = render(&AmoebaSpec::line([-4.0, 4.0, -4.0, 4.0], 400)).unwrap();
    assert_eq!(r.components(), 3);
    let ppm = r.to_ppm();
    assert!(ppm.starts_with(b"P6\n400 400\n255\n"));
    assert_eq!(ppm.len(), 15 + 3 * 400 * 400);
    assert_eq!(ppm, render(&AmoebaSpec::line([-4.0, 4.0, -4.0, 4.0], 400)).unwrap().to_ppm());
    let svg = r.to_svg();
    assert!(svg.starts_with("<svg") && svg.contains("<path d=\"M"));
}

#[test]
fn tiny_window_inside_a_tentacle() {
    let r = render(&AmoebaSpec::line([-3.02, -3.0, -0.01, 0.01], 16)).unwrap();
    assert!(r.cells.iter().all(|m| *m == Membership::Inside));
    assert_eq!(r.components(), 0);
}

#[test]
fn line_membership_is_symmetric() {
    let mut g = rng(3);
    for _ in 0..10_000 {
        let (s, t) = (g.gen_range(-5.0..5.0), g.gen_range(-5.0..5.0));
        assert_eq!(member_line(s, t), member_line(t, s));
    }
}

#[test]
fn line_render_is_resolution_monotone() {
    let b = [-4.0, 4.0, -4.0, 4.0];
    let coarse = render(&AmoebaSpec::line(b, 100)).unwrap();
    let fine = render(&AmoebaSpec::line(b, 200)).unwrap();
    for r in 0..200 {
        for c in 0..200 {
            if fine.get(c, r) == Membership::Inside {
                assert_eq!(coarse.get(c / 2, r / 2), Membership::Inside);
            }
        }
    }
}

#[test]
fn sampled_agrees_with_exact_off_a_thin_band() {
    let start = Instant::now();
    let res = 200;
    let spec = sampled_spec(Polynomial::line(), [-4.0, 4.0, -4.0, 4.0], res);
    let sampled = render(&spec).unwrap();
    let exact: Vec<bool> = (0..res * res)
        .map(|i| {
            let (s, t) = spec.center(i % res, i / res);
            member_line(s, t)
        })
        .collect();
    // distance (in pixels, Chebyshev) to the nearest pixel of the other verdict
    let near_boundary = |c: usize, r: usize, band: i64| {
        let me = exact[r * res + c];
        (-band..=band).any(|dr| {
            (-band..=band).any(|dc| {
                let (cc, rr) = (c as i64 + dc, r as i64 + dr);
                (0..res as i64).contains(&cc)
                    && (0..res as i64).contains(&rr)
                    && exact[rr as usize * res + cc as usize] != me
            })
        })
    };
    let mut disagreements = 0;
    for r in 0..res {
        for c in 0..res {
            let agree = match sampled.get(c, r) {
                Membership::Inside => exact[r * res + c],
                Membership::Outside => !exact[r * res + c],
                Membership::Inconclusive => false,
            };
            if !agree {
                disagreements += 1;
                assert!(near_boundary(c, r, 2), "pixel ({c},{r}) disagrees away from the boundary");
            }
        }
    }
    println!("{disagreements} boundary pixels, {:?}", start.elapsed());
}

#[test]
fn binomial_curve_has_a_diagonal_amoeba() {
    // Log maps v1 = v2 onto the diagonal s = t.
    let poly = Polynomial::new(vec![(1, 0, C::new(1.0, 0.0)), (0, 1, C::new(-1.0, 0.0))]).unwrap();
    let res = 32;
    let spec = sampled_spec(poly.clone(), [-2.0, 2.0, -2.0, 2.0], res);
    let r = render(&spec).unwrap();
    let px = 4.0 / res as f64;
    for row in 0..res {
        for col in 0..res {
            let (s, t) = spec.center(col, row);
            let m = r.get(col, row);
            if (s - t).abs() > 3.0 * px {
                assert_eq!(m, Membership::Outside, "({s},{t})");
            }
            if s == t {
                assert_ne!(m, Membership::Outside);
            }
        }
    }
    assert_ne!(member_sampled(&poly, 0.5, 0.5, &Sampling::default()), Membership::Outside);
}

#[test]
fn example_discriminant_is_the_line_amoeba() {
    let ex = make("amoeba").unwrap();
    let mut g = rng(21);
    let mut members = 0;
    for k in 0..100 {
        // half the points near images of singular points, half uniform
        let (s, t) = if k % 2 == 0 {
            let v = C::new(g.gen_range(-3.0..3.0), g.gen_range(-3.0..3.0));
            (v.norm().ln() + g.gen_range(-0.05..0.05), (v - 1.0).norm().ln())
        } else {
            (g.gen_range(-3.0..3.0), g.gen_range(-3.0..3.0))
        };
        let m = member_line(s, t);
        members += m as usize;
        assert_eq!(ex.discriminant_contains(&[0.0, s, t]), m, "({s},{t})");
    }
    assert!((20..=80).contains(&members), "{members}");
}
