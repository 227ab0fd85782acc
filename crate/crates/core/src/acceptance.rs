//! The acceptance suite: ten checks with fixed seeds and tolerances, shared by
//! the `report` subcommand and the `acceptance` test target.

use std::f64::consts::TAU;
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::amoeba::{self, AmoebaSpec, Hypersurface, Membership, Polynomial, Sampling};
use crate::builder::{glue_q, glue_q_tilde_seam, BuildOptions, BuiltFibration, GluePoint};
use crate::calculus::{ell_to_s, s_to_ell, EllSequence, SSequence};
use crate::error::Result;
use crate::flows::{self, BasePath, ContinuationOptions, MonodromyMatrix};
use crate::random::{self, RandomShape};
use crate::torus::{LSection, TorusFn};
use crate::zoo::{self, Variant};

type F = TorusFn<f64>;
type L = LSection<f64>;

/// Independent computation of `ell` from `S`, used by the oracle check.
pub type Oracle<'a> = &'a (dyn Fn(&SSequence<f64>) -> Result<EllSequence<f64>> + Sync);

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub metric: String,
    pub seconds: f64,
    /// Runtime budget, when the criterion has one.
    pub limit: Option<f64>,
}

impl Outcome {
    /// Summary line; deterministic for a given build.
    pub fn check_line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        format!("CHECK {} {} {}", self.name, verdict, self.metric)
    }

    pub fn timed_line(&self) -> String {
        match self.limit {
            Some(l) => format!("{} runtime={:.2}s limit={l}s", self.check_line(), self.seconds),
            None => format!("{} runtime={:.2}s", self.check_line(), self.seconds),
        }
    }
}

pub const CRITERIA: [(u8, &str); 10] = [
    (1, "recursion_exactness"),
    (2, "low_order_formulas"),
    (3, "oracle_equivalence"),
    (4, "builder_commutation"),
    (5, "gluing_consistency"),
    (6, "example_discrepancies"),
    (7, "monodromy"),
    (8, "cohomology_jump"),
    (9, "amoeba_figure"),
    (10, "algebra_properties"),
];

pub fn run(id: u8, oracle: Oracle) -> Outcome {
    let name = CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .map(|c| c.1)
        .unwrap_or("unknown");
    let start = Instant::now();
    let res = match id {
        1 => recursion_exactness(),
        2 => low_order_formulas(),
        3 => oracle_equivalence(oracle),
        4 => builder_commutation(),
        5 => gluing_consistency(),
        6 => example_discrepancies(),
        7 => monodromy(),
        8 => cohomology_jump(),
        9 => amoeba_figure(),
        10 => algebra_properties(),
        _ => Ok((false, format!("no criterion {id}"))),
    };
    let seconds = start.elapsed().as_secs_f64();
    let (mut passed, metric) = res.unwrap_or_else(|e| (false, format!("error=\"{e}\"")));
    let limit = match id {
        1 => Some(30.0),
        6 => Some(60.0),
        10 => Some(10.0),
        _ => None,
    };
    if let Some(limit) = limit {
        passed &= seconds <= limit;
    }
    Outcome {
        id,
        name,
        passed,
        metric,
        seconds,
        limit,
    }
}

pub fn run_all(oracle: Oracle) -> Vec<Outcome> {
    CRITERIA.iter().map(|(id, _)| run(*id, oracle)).collect()
}

type Verdict = Result<(bool, String)>;

fn rel(err: f64, scale: f64) -> f64 {
    err / scale.max(1.0)
}

fn recursion_exactness() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut admissible = true;
    for seed in 0..50u64 {
        let mut rng = random::rng(seed);
        let n = 2 + (seed % 2) as usize;
        let order = 1 + (seed % 5) as usize;
        let ell = random::random_closed_ell::<f64, _>(&mut rng, &RandomShape::new(n, order))?;
        let s = ell_to_s(&ell)?;
        admissible &= s.check_admissible()?.passed;
        let back = s_to_ell(&s)?;
        let scale = ell.sections().iter().map(|x| x.max_abs()).fold(0.0, f64::max);
        worst = worst.max(rel(back.distance(&ell)?, scale));
    }
    Ok((worst <= 1e-12 && admissible, format!("max_err={worst:.3e} admissible={admissible}")))
}

/// Dyadic fixtures, on which the recursion's arithmetic is exact.
pub fn unit_fixture(n: usize) -> Result<SSequence<f64>> {
    let (s1, s2) = if n == 2 {
        (
            L::new(vec![F::cos_term(2, &[1], &[1], 1.0)?.add(&F::monomial(2, &[2], 0.5)?)?])?,
            L::new(vec![F::sin_term(2, &[2], &[1], 0.25)?])?,
        )
    } else {
        (
            L::new(vec![
                F::cos_term(3, &[1, 0], &[1, 0], 1.0)?.add(&F::monomial(3, &[0, 2], 0.5)?)?,
                F::sin_term(3, &[1, -1], &[1, 0], 1.0)?.add(&F::constant(3, 0.25)?)?,
            ])?,
            L::new(vec![F::cos_term(3, &[0, 1], &[0, 1], 1.0)?, F::monomial(3, &[1, 1], 0.5)?])?,
        )
    };
    SSequence::new(vec![s1, s2])
}

fn low_order_formulas() -> Verdict {
    let mut worst: f64 = 0.0;
    for n in [2, 3] {
        let s = unit_fixture(n)?;
        let ell = s_to_ell(&s)?;
        let (s1, s2) = (s.get(1)?, s.get(2)?);
        worst = worst.max(ell.get(1)?.distance(&s1.neg())?);
        for j in 2..=n {
            let mut want = s2.component(j)?.neg();
            for k in 2..=n {
                want = want.add(&s1.component(j)?.d_base(k)?.mul(s1.component(k)?)?)?;
            }
            worst = worst.max(ell.get(2)?.component(j)?.distance(&want)?);
        }
    }
    Ok((worst == 0.0, format!("max_err={worst:.3e}")))
}

fn oracle_equivalence(oracle: Oracle) -> Verdict {
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let mut rng = random::rng(100 + seed);
        let n = 2 + (seed % 2) as usize;
        let order = 1 + (seed % 4) as usize;
        let ell = random::random_closed_ell::<f64, _>(&mut rng, &RandomShape::new(n, order))?;
        let s = ell_to_s(&ell)?;
        let fast = s_to_ell(&s)?;
        let slow = oracle(&s)?;
        let scale = slow.sections().iter().map(|x| x.max_abs()).fold(0.0, f64::max);
        worst = worst.max(rel(fast.distance(&slow)?, scale));
    }
    Ok((worst <= 1e-12, format!("max_err={worst:.3e}")))
}

fn builder_commutation() -> Verdict {
    let (mut bracket, mut taylor): (f64, f64) = (0.0, 0.0);
    for seed in 0..10u64 {
        let mut rng = random::rng(200 + seed);
        let n = 2 + (seed % 2) as usize;
        let order = 1 + (seed % 3) as usize;
        let ell = random::random_closed_ell::<f64, _>(&mut rng, &RandomShape::new(n, order))?;
        let u = BuiltFibration::build(&ell, &BuildOptions::unit_box(n))?;
        let pts = u.sample_points(&mut rng, 100);
        bracket = bracket.max(u.verify_lagrangian(&pts, 1e-5)?.max_bracket);
        let base: Vec<_> = pts.iter().take(5).map(|(b, y)| (b[1..].to_vec(), y[1..].to_vec())).collect();
        taylor = taylor.max(u.taylor_check(&base, 0.5 * u.eps())?);
    }
    Ok((
        bracket <= 1e-7 && taylor <= 1e-5,
        format!("max_bracket={bracket:.3e} taylor_err={taylor:.3e}"),
    ))
}

fn gluing_consistency() -> Verdict {
    let mut rng = random::rng(300);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    while count < 50 {
        let ell = random::random_closed_ell::<f64, _>(&mut rng, &RandomShape::new(3, 2))?;
        let u = BuiltFibration::build(&ell, &BuildOptions::unit_box(3))?;
        for _ in 0..10 {
            let b: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let tbar = vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
            let p = GluePoint::new(b, rng.gen_range(0.0..1.0), tbar);
            let q = glue_q(ell.get(1)?, &p)?;
            worst = worst.max(q.distance(&glue_q_tilde_seam(&u, &p, 200)?));
            count += 1;
        }
    }
    let mut shear: f64 = 0.0;
    for m in [1.0, 2.0, -3.0] {
        let l1 = L::single(2, F::constant(3, m)?)?;
        for _ in 0..10 {
            let p = GluePoint::new(
                vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
                rng.gen_range(0.0..1.0),
                vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)],
            );
            let want = GluePoint::new(p.b.clone(), p.t1 - m * p.tbar[0], p.tbar.clone());
            shear = shear.max(glue_q(&l1, &p)?.distance(&want));
        }
    }
    Ok((
        worst <= 1e-6 && shear <= 1e-10,
        format!("max_err={worst:.3e} shear_err={shear:.3e} points={count}"),
    ))
}

fn example_discrepancies() -> Verdict {
    let mut rng = random::rng(400);
    let (mut resid, mut err, mut uncorrected): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for name in ["focus_focus", "amoeba"] {
        let ex = zoo::make(name)?;
        for z in ex.seam_points(&mut rng, 20) {
            let d = flows::discrepancy(&ex, &z)?;
            resid = resid.max(d.max_residual());
            let cf = ex.closed_form_a(&z, Variant::Corrected)?;
            for (a, b) in d.a.iter().zip(&cf) {
                err = err.max((a - b).abs());
            }
            if name == "focus_focus" {
                if let Ok(p) = ex.closed_form_a(&z, Variant::Uncorrected) {
                    uncorrected = uncorrected.max((p[0] - d.a[0]).abs());
                }
            }
        }
    }
    Ok((
        resid <= 1e-7 && err <= 1e-6,
        format!("max_residual={resid:.3e} max_err={err:.3e} variant=corrected uncorrected_focus_focus_err={uncorrected:.3e}"),
    ))
}

fn circle(center: &[f64], axes: (usize, usize)) -> BasePath {
    BasePath::Circle {
        center: center.to_vec(),
        axes,
        radius: 0.5,
    }
}

/// The two amoeba loops: around the leg between components c and e, then
/// around the leg between c and d.
pub fn amoeba_loops() -> [BasePath; 2] {
    [circle(&[0.0, -2.0, -0.01], (0, 2)), circle(&[0.0, -0.01, -2.0], (0, 1))]
}

fn matrix(rows: [[i64; 3]; 3]) -> MonodromyMatrix {
    MonodromyMatrix {
        rows: rows.iter().map(|r| r.to_vec()).collect(),
    }
}

fn monodromy() -> Verdict {
    let opts = ContinuationOptions::default();
    let ff = flows::monodromy(&zoo::make("focus_focus")?, &circle(&[0.0, 0.0], (0, 1)), &opts)?;
    let am = zoo::make("amoeba")?;
    let [l1, l2] = amoeba_loops();
    let t1 = flows::monodromy(&am, &l1, &opts)?;
    let t2 = flows::monodromy(&am, &l2, &opts)?;
    // a unit shear along the circle cycle, up to the orientation of the loop
    let want1 = [matrix([[1, 0, -1], [0, 1, 0], [0, 0, 1]]), matrix([[1, 0, 1], [0, 1, 0], [0, 0, 1]])];
    let want2 = [matrix([[1, -1, 0], [0, 1, 0], [0, 0, 1]]), matrix([[1, 1, 0], [0, 1, 0], [0, 0, 1]])];
    let snap = ff.snap_error.max(t1.snap_error).max(t2.snap_error);
    let ok = flows::conjugate_to_unit_shear(&ff.matrix)
        && want1.contains(&t1.matrix)
        && want2.contains(&t2.matrix)
        && snap <= 1e-3;
    Ok((
        ok,
        format!(
            "focus_focus={} amoeba_t1={} amoeba_t2={} snap_err={snap:.3e}",
            ff.matrix, t1.matrix, t2.matrix
        ),
    ))
}

fn cohomology_jump() -> Verdict {
    let opts = ContinuationOptions::default();
    let ex = zoo::make("amoeba")?;
    let mut table = vec![];
    let mut snap: f64 = 0.0;
    for c in 0..ex.seam_components {
        let mut row = [0i64; 2];
        for j in 2..=3 {
            let jump = flows::cohomology_jump(&ex, c, j, &opts)?;
            snap = snap.max(jump.snap_error);
            row[j - 2] = jump.snapped;
        }
        table.push(row);
    }
    let ok = table[0] == [0, 0]
        && table[1][0].abs() == 1
        && table[1][1] == 0
        && table[2][0] == 0
        && table[2][1].abs() == 1
        && snap <= 1e-3;
    let shown: Vec<String> = ex
        .seam_labels
        .iter()
        .zip(&table)
        .map(|(l, r)| format!("{l}=({},{})", r[0], r[1]))
        .collect();
    Ok((ok, format!("{} snap_err={snap:.3e}", shown.join(" "))))
}

/// Largest Chebyshev pixel distance from a disagreeing pixel to the nearest
/// pixel of the opposite exact verdict, and the number of disagreements.
pub fn sampled_band(res: usize) -> Result<(usize, usize)> {
    let spec = AmoebaSpec {
        surface: Hypersurface::Poly(Polynomial::line()),
        bounds: [-4.0, 4.0, -4.0, 4.0],
        width: res,
        height: res,
        sampling: Sampling::default(),
    };
    let sampled = amoeba::render(&spec)?;
    let exact: Vec<bool> = (0..res * res)
        .map(|i| {
            let (s, t) = spec.center(i % res, i / res);
            amoeba::member_line(s, t)
        })
        .collect();
    let (mut count, mut widest) = (0, 0);
    for r in 0..res {
        for c in 0..res {
            let e = exact[r * res + c];
            let agree = match sampled.get(c, r) {
                Membership::Inside => e,
                Membership::Outside => !e,
                Membership::Inconclusive => false,
            };
            if agree {
                continue;
            }
            count += 1;
            let dist = (1..res)
                .find(|&d| {
                    let d = d as i64;
                    (-d..=d).any(|dr| {
                        (-d..=d).any(|dc| {
                            let (cc, rr) = (c as i64 + dc, r as i64 + dr);
                            (0..res as i64).contains(&cc)
                                && (0..res as i64).contains(&rr)
                                && exact[rr as usize * res + cc as usize] != e
                        })
                    })
                })
                .unwrap_or(res);
            widest = widest.max(dist);
        }
    }
    Ok((widest, count))
}

fn amoeba_figure() -> Verdict {
    let raster = amoeba::render(&AmoebaSpec::line([-4.0, 4.0, -4.0, 4.0], 400))?;
    let components = raster.components();
    let (band, count) = sampled_band(200)?;
    Ok((
        components == 3 && band <= 2,
        format!("components={components} band={band}px disagreements={count}"),
    ))
}

fn dyadic_fn(rng: &mut ChaCha8Rng, n: usize) -> Result<F> {
    let mut f = F::zero(n)?;
    for _ in 0..rng.gen_range(1..=3) {
        let k: Vec<i32> = (0..n - 1).map(|_| rng.gen_range(-2..=2)).collect();
        let alpha: Vec<u32> = (0..n - 1).map(|_| rng.gen_range(0..=1)).collect();
        let amp = rng.gen_range(-8..=8) as f64 / 4.0;
        let term = if rng.gen_bool(0.5) {
            F::cos_term(n, &k, &alpha, amp)?
        } else {
            F::sin_term(n, &k, &alpha, amp)?
        };
        f = f.add(&term)?;
    }
    Ok(f)
}

/// Zero up to rounding: pruned relative to the sizes of the summands.
fn vanishes(residual: &F, scales: &[f64]) -> bool {
    let scale = scales.iter().copied().fold(1.0, f64::max);
    residual.max_abs() <= 1e-12 * scale
}

/// Leibniz, Jacobi, antisymmetry, `d d = 0` and gauge invariance of cycle
/// integrals on 1000 seeded cases each. Returns failure counts per law.
pub fn algebra_property_failures(cases: usize) -> Result<[usize; 5]> {
    let mut fails = [0usize; 5];
    let mut rng = random::rng(500);
    for _ in 0..cases {
        let n = rng.gen_range(2..=3);
        let (f, g, h) = (dyadic_fn(&mut rng, n)?, dyadic_fn(&mut rng, n)?, dyadic_fn(&mut rng, n)?);
        let fg = f.poisson(&g)?;
        let lhs = f.poisson(&g.mul(&h)?)?;
        let (r1, r2) = (fg.mul(&h)?, g.mul(&f.poisson(&h)?)?);
        if !vanishes(&lhs.sub(&r1.add(&r2)?)?, &[lhs.max_abs(), r1.max_abs(), r2.max_abs()]) {
            fails[0] += 1;
        }
        let j1 = f.poisson(&g.poisson(&h)?)?;
        let j2 = g.poisson(&h.poisson(&f)?)?;
        let j3 = h.poisson(&fg)?;
        if !vanishes(&j1.add(&j2)?.add(&j3)?, &[j1.max_abs(), j2.max_abs(), j3.max_abs()]) {
            fails[1] += 1;
        }
        let gf = g.poisson(&f)?;
        if !vanishes(&fg.add(&gf)?, &[fg.max_abs()]) {
            fails[2] += 1;
        }
        let dd = L::fibre_gradient(&f)?.fibrewise_d()?;
        let grad_scale = TAU * TAU * 4.0 * f.max_abs();
        if dd.max_abs() > 1e-12 * grad_scale.max(1.0) {
            fails[3] += 1;
        }
        let shape = RandomShape::new(n, 1);
        let modes: Vec<Vec<i32>> = (0..2).map(|_| (0..n - 1).map(|_| rng.gen_range(-2..=2)).collect()).collect();
        let ell = random::random_closed_section::<f64, _>(&mut rng, &shape, &modes)?;
        let gauged = ell.add(&L::fibre_gradient(&g)?)?;
        for j in 2..=n {
            let (a, b) = (ell.cycle_integral(j)?, gauged.cycle_integral(j)?);
            if !vanishes(&a.sub(&b)?, &[a.max_abs()]) {
                fails[4] += 1;
            }
        }
    }
    Ok(fails)
}

fn algebra_properties() -> Verdict {
    let fails = algebra_property_failures(1000)?;
    let names = ["leibniz", "jacobi", "antisymmetry", "dd_zero", "gauge"];
    let shown: Vec<String> = names.iter().zip(&fails).map(|(n, f)| format!("{n}={f}")).collect();
    Ok((fails.iter().all(|f| *f == 0), format!("cases=1000 failures: {}", shown.join(" "))))
}
