//! Seeded generators for sequences and germs used by the property suites.

use num_complex::Complex;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::calculus::{EllSequence, GermChange};
use crate::error::Result;
use crate::scalar::Scalar;
use crate::torus::{LSection, TorusFn};

/// Shape limits for generated data.
#[derive(Clone, Copy, Debug)]
pub struct RandomShape {
    pub n: usize,
    pub order: usize,
    /// Number of distinct Fourier modes (up to sign).
    pub modes: usize,
    /// Maximal total degree of polynomial coefficients.
    pub degree: u32,
}

impl RandomShape {
    pub fn new(n: usize, order: usize) -> Self {
        RandomShape {
            n,
            order,
            modes: 3,
            degree: 2,
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn exponents(slots: usize, degree: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![0; slots]];
    for _ in 0..degree {
        let mut next = Vec::new();
        for a in &out {
            for i in 0..slots {
                let mut b = a.clone();
                b[i] += 1;
                if !out.contains(&b) && !next.contains(&b) {
                    next.push(b);
                }
            }
        }
        out.extend(next);
    }
    out
}

/// Random modes `k` with entries in `{-1, 0, 1}`, pairwise distinct up to sign.
fn modes<R: Rng>(rng: &mut R, slots: usize, count: usize) -> Vec<Vec<i32>> {
    let mut all = Vec::new();
    let total = 3usize.pow(slots as u32);
    for code in 0..total {
        let mut c = code;
        let k: Vec<i32> = (0..slots)
            .map(|_| {
                let d = (c % 3) as i32 - 1;
                c /= 3;
                d
            })
            .collect();
        let neg: Vec<i32> = k.iter().map(|x| -x).collect();
        if k.iter().any(|&x| x != 0) && !all.contains(&neg) {
            all.push(k);
        }
    }
    all.shuffle(rng);
    all.truncate(count);
    all
}

fn coef<R: Rng>(rng: &mut R) -> f64 {
    rng.gen_range(-1.0..1.0)
}

/// Random polynomial in `b` of total degree at most `degree`; each monomial
/// is present with probability one half.
pub fn random_polynomial<T: Scalar, R: Rng>(rng: &mut R, n: usize, degree: u32) -> Result<TorusFn<T>> {
    let mut f = TorusFn::zero(n)?;
    for a in exponents(n - 1, degree) {
        if rng.gen_bool(0.5) {
            f = f.add(&TorusFn::monomial(n, &a, T::lit(coef(rng)))?)?;
        }
    }
    Ok(f)
}

/// Random real function with Fourier support in `modes` (and their negatives).
fn random_oscillating<T: Scalar, R: Rng>(rng: &mut R, n: usize, modes: &[Vec<i32>], degree: u32) -> Result<TorusFn<T>> {
    let mut f = TorusFn::zero(n)?;
    for k in modes {
        for a in exponents(n - 1, degree) {
            if rng.gen_bool(0.5) {
                let c = Complex::new(T::lit(coef(rng)), T::lit(coef(rng)));
                f = f.add(&TorusFn::conjugate_pair(n, k, &a, c)?)?;
            }
        }
    }
    Ok(f)
}

/// Random fibrewise closed section: a fibrewise constant part plus the
/// fibre gradient of an oscillating function.
pub fn random_closed_section<T: Scalar, R: Rng>(rng: &mut R, shape: &RandomShape, modes: &[Vec<i32>]) -> Result<LSection<T>> {
    let n = shape.n;
    let g = random_oscillating::<T, R>(rng, n, modes, shape.degree)?.scale(T::one() / T::two_pi());
    let grad = LSection::fibre_gradient(&g)?;
    let mut comps = Vec::with_capacity(n - 1);
    for j in 2..=n {
        comps.push(grad.component(j)?.add(&random_polynomial(rng, n, shape.degree)?)?);
    }
    LSection::new(comps)
}

/// Random section with no closedness constraint.
pub fn random_section<T: Scalar, R: Rng>(rng: &mut R, shape: &RandomShape) -> Result<LSection<T>> {
    let m = modes(rng, shape.n - 1, shape.modes);
    let comps = (0..shape.n - 1)
        .map(|_| random_oscillating(rng, shape.n, &m, shape.degree))
        .collect::<Result<Vec<_>>>()?;
    LSection::new(comps)
}

pub fn random_closed_ell<T: Scalar, R: Rng>(rng: &mut R, shape: &RandomShape) -> Result<EllSequence<T>> {
    let m = modes(rng, shape.n - 1, shape.modes);
    let ell = (0..shape.order)
        .map(|_| random_closed_section(rng, shape, &m))
        .collect::<Result<Vec<_>>>()?;
    EllSequence::new(ell)
}

/// Random fibrewise constant sequence.
pub fn random_constant_ell<T: Scalar, R: Rng>(rng: &mut R, shape: &RandomShape) -> Result<EllSequence<T>> {
    let ell = (0..shape.order)
        .map(|_| {
            let comps = (0..shape.n - 1)
                .map(|_| random_polynomial(rng, shape.n, shape.degree))
                .collect::<Result<Vec<_>>>()?;
            LSection::new(comps)
        })
        .collect::<Result<Vec<_>>>()?;
    EllSequence::new(ell)
}

pub fn random_germ<T: Scalar, R: Rng>(rng: &mut R, shape: &RandomShape) -> Result<GermChange<T>> {
    let phi = (0..shape.order)
        .map(|_| {
            let comps = (0..shape.n - 1)
                .map(|_| random_polynomial(rng, shape.n, shape.degree))
                .collect::<Result<Vec<_>>>()?;
            LSection::new(comps)
        })
        .collect::<Result<Vec<_>>>()?;
    GermChange::new(phi)
}
