//! Conversion between Taylor sequences `{S_m}` and invariant sequences `{l_m}`.
//!
//! With `a_j(r) = sum_k a_{j,k} r^k` the coordinate shift solving
//! `u_j(r, b + a, y) = b_j`, the coefficients satisfy
//!
//! ```text
//! a_{j,l} = -S_{j,l} + R_{j,l},
//! R_{j,l} = - sum_{m=1}^{l-1} sum_{1<=|I|<=m} sum_{H in H(I,m)} (1/I!) d^I S_{j,l-m} A_H,
//! ```
//!
//! where `H(I,m)` lists the ways to hand each of the `|I|` factors of `a^I`
//! a positive order so that the orders add to `m`, and `A_H` is the product
//! of the chosen `a_{k,h}`.

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use super::sequence::{EllSequence, SSequence};
use crate::error::Result;
use crate::scalar::Scalar;
use crate::torus::{AlgebraConfig, LSection, TorusFn};

/// Multi-indices `I` over `slots` entries with `|I| = total`.
pub(crate) fn multi_indices(slots: usize, total: u32) -> Vec<Vec<u32>> {
    fn go(slots: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == slots - 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for v in (0..=left).rev() {
            cur.push(v);
            go(slots, left - v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(slots, total, &mut Vec::with_capacity(slots), &mut out);
    out
}

/// Ordered compositions of `m` into `parts` positive integers.
pub(crate) fn compositions(m: usize, parts: usize) -> Vec<Vec<usize>> {
    fn go(left: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for h in 1..=(left - (parts - 1)) {
            cur.push(h);
            go(left - h, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if parts >= 1 && m >= parts {
        go(m, parts, &mut Vec::with_capacity(parts), &mut out);
    }
    out
}

/// Sums `C_{I,m} = sum_{H in H(I,m)} A_H`, memoized. They do not depend on `j`.
struct ProductCache<T: Scalar> {
    n: usize,
    cfg: AlgebraConfig<T>,
    map: FxHashMap<(Vec<u32>, usize), TorusFn<T>>,
}

impl<T: Scalar> ProductCache<T> {
    fn new(n: usize, cfg: AlgebraConfig<T>) -> Self {
        ProductCache {
            n,
            cfg,
            map: FxHashMap::default(),
        }
    }

    /// Fills every `C_{I,m}` with `1 <= |I| <= m` for a fixed `m`, given
    /// `a` known through order `m`.
    fn fill(&mut self, a: &[LSection<T>], m: usize) -> Result<()> {
        let slots = self.n - 1;
        let mut todo = Vec::new();
        for total in 1..=m as u32 {
            for idx in multi_indices(slots, total) {
                if !self.map.contains_key(&(idx.clone(), m)) {
                    todo.push(idx);
                }
            }
        }
        let (n, cfg) = (self.n, self.cfg);
        let done = todo
            .into_par_iter()
            .map(|idx| {
                let factors: Vec<usize> = idx
                    .iter()
                    .enumerate()
                    .flat_map(|(k, &c)| std::iter::repeat_n(k + 2, c as usize))
                    .collect();
                let mut sum = TorusFn::zero_with(n, cfg)?;
                for h in compositions(m, factors.len()) {
                    let mut prod = a[h[0] - 1].component(factors[0])?.clone();
                    for (&k, &hk) in factors.iter().zip(&h).skip(1) {
                        if prod.is_zero() {
                            break;
                        }
                        prod = prod.mul(a[hk - 1].component(k)?)?;
                    }
                    sum = sum.add(&prod)?;
                }
                Ok(((idx, m), sum))
            })
            .collect::<Result<Vec<_>>>()?;
        self.map.extend(done);
        Ok(())
    }

    fn get(&self, idx: &[u32], m: usize) -> &TorusFn<T> {
        &self.map[&(idx.to_vec(), m)]
    }
}

/// `R_{j,l}` for all `j`, given `S_{<l}` and `a_{<l}`.
fn remainder<T: Scalar>(
    s: &[LSection<T>],
    cache: &ProductCache<T>,
    l: usize,
) -> Result<Vec<TorusFn<T>>> {
    let n = cache.n;
    let slots = n - 1;
    (2..=n)
        .into_par_iter()
        .map(|j| {
            let mut r = TorusFn::zero_with(n, cache.cfg)?;
            for m in 1..l {
                let sj = s[l - m - 1].component(j)?;
                if sj.is_zero() {
                    continue;
                }
                for total in 1..=m as u32 {
                    for idx in multi_indices(slots, total) {
                        let d = sj.taylor_multi(&idx)?;
                        if d.is_zero() {
                            continue;
                        }
                        let c = cache.get(&idx, m);
                        if c.is_zero() {
                            continue;
                        }
                        r = r.sub(&d.mul(c)?)?;
                    }
                }
            }
            Ok(r)
        })
        .collect()
}

/// Runs the recursion in either direction: `known` are the given sections
/// and the result solves `unknown_l = -known_l + R_l`.
fn run<T: Scalar>(known: &[LSection<T>], known_is_s: bool) -> Result<Vec<LSection<T>>> {
    let n = known[0].n();
    let cfg = known[0].config();
    let mut cache = ProductCache::new(n, cfg);
    let mut solved: Vec<LSection<T>> = Vec::with_capacity(known.len());
    for l in 1..=known.len() {
        if l > 1 {
            let a: &[LSection<T>] = if known_is_s { &solved } else { known };
            cache.fill(a, l - 1)?;
        }
        let s: &[LSection<T>] = if known_is_s { known } else { &solved };
        let r = remainder(s, &cache, l)?;
        let comps = r
            .iter()
            .zip(known[l - 1].components())
            .map(|(r, k)| r.sub(k))
            .collect::<Result<Vec<_>>>()?;
        solved.push(LSection::new(comps)?);
    }
    Ok(solved)
}

/// Invariant sequence of the fibration with Taylor data `s`. The output is
/// flagged unverified when it fails the closedness check, which happens
/// exactly when `s` is not admissible.
pub fn s_to_ell<T: Scalar>(s: &SSequence<T>) -> Result<EllSequence<T>> {
    EllSequence::new_unverified(run(s.sections(), true)?)
}

/// Taylor data determined by an invariant sequence.
pub fn ell_to_s<T: Scalar>(ell: &EllSequence<T>) -> Result<SSequence<T>> {
    SSequence::new(run(ell.sections(), false)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    type F = TorusFn<f64>;
    type L = LSection<f64>;

    #[test]
    fn enumerations() {
        assert_eq!(multi_indices(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(multi_indices(1, 3), vec![vec![3]]);
        assert_eq!(compositions(4, 2), vec![vec![1, 3], vec![2, 2], vec![3, 1]]);
        assert_eq!(compositions(3, 3), vec![vec![1, 1, 1]]);
        assert!(compositions(2, 3).is_empty());
    }

    #[test]
    fn worked_n2_example() {
        let bc = F::cos_term(2, &[1], &[1], 1.0).unwrap();
        let bcc = bc.mul(&F::cos_term(2, &[1], &[0], 1.0).unwrap()).unwrap();
        let s = SSequence::new(vec![L::single(2, bc.neg()).unwrap(), L::single(2, bcc.clone()).unwrap()]).unwrap();
        let ell = s_to_ell(&s).unwrap();
        assert_eq!(ell.get(1).unwrap().component(2).unwrap(), &bc);
        assert!(ell.get(2).unwrap().is_zero());

        let back = ell_to_s(&EllSequence::new(vec![L::single(2, bc.clone()).unwrap(), L::zero(2).unwrap()]).unwrap()).unwrap();
        assert_eq!(back, s);
    }
}
