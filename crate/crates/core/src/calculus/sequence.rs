use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::torus::{LSection, TwoFormSection};

/// Whether every element of an [`EllSequence`] was found fibrewise closed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Closedness {
    Verified,
    Unverified,
}

/// Truncated invariant sequence `l_1..l_N`.
#[derive(Clone, Debug, PartialEq)]
pub struct EllSequence<T: Scalar> {
    n: usize,
    ell: Vec<LSection<T>>,
    closedness: Closedness,
}

/// Truncated Taylor sequence `S_1..S_N` of a fibration, `u_j = b_j + sum_m S_{j,m} b_1^m`.
#[derive(Clone, Debug, PartialEq)]
pub struct SSequence<T: Scalar> {
    n: usize,
    s: Vec<LSection<T>>,
}

fn check_shape<T: Scalar>(secs: &[LSection<T>]) -> Result<usize> {
    let first = secs.first().ok_or(Error::OrderOutOfRange { order: 0, max: 0 })?;
    let n = first.n();
    for s in secs {
        if s.n() != n {
            return Err(Error::DimensionMismatch {
                left: n,
                right: s.n(),
            });
        }
    }
    Ok(n)
}

/// Max coefficient of `d(ell)` compared against the relative tolerance.
pub(crate) fn closed_within<T: Scalar>(ell: &LSection<T>) -> Result<Option<(usize, usize, T)>> {
    let d = ell.fibrewise_d()?;
    let modes = ell.components().iter().map(|c| c.max_mode()).max().unwrap_or(0).max(1);
    let scale = T::one().max(ell.max_abs()) * T::two_pi() * T::lit(modes as f64);
    let tol = T::default_rel_tol() * scale;
    let bad = d
        .iter()
        .map(|(j, l, f)| (j, l, f.max_abs()))
        .find(|(_, _, m)| *m > tol);
    Ok(bad)
}

impl<T: Scalar> EllSequence<T> {
    /// Requires every element to be fibrewise closed.
    pub fn new(ell: Vec<LSection<T>>) -> Result<Self> {
        let n = check_shape(&ell)?;
        for (m, l) in ell.iter().enumerate() {
            if let Some((j, k, size)) = closed_within(l)? {
                return Err(Error::NotClosed {
                    order: m + 1,
                    j,
                    l: k,
                    size: size.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(EllSequence {
            n,
            ell,
            closedness: Closedness::Verified,
        })
    }

    /// Accepts any sections; the closedness flag records the outcome of the check.
    pub fn new_unverified(ell: Vec<LSection<T>>) -> Result<Self> {
        let n = check_shape(&ell)?;
        let mut closedness = Closedness::Verified;
        for l in &ell {
            if closed_within(l)?.is_some() {
                closedness = Closedness::Unverified;
                break;
            }
        }
        Ok(EllSequence { n, ell, closedness })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.ell.len()
    }

    pub fn closedness(&self) -> Closedness {
        self.closedness
    }

    pub fn is_closed(&self) -> bool {
        self.closedness == Closedness::Verified
    }

    /// `l_m`, `1 <= m <= N`.
    pub fn get(&self, m: usize) -> Result<&LSection<T>> {
        if m == 0 || m > self.order() {
            return Err(Error::OrderOutOfRange {
                order: m,
                max: self.order(),
            });
        }
        Ok(&self.ell[m - 1])
    }

    pub fn sections(&self) -> &[LSection<T>] {
        &self.ell
    }

    pub fn distance(&self, other: &Self) -> Result<T> {
        seq_distance(&self.ell, &other.ell)
    }

    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        self.ell.len() == other.ell.len()
            && self.ell.iter().zip(&other.ell).all(|(a, b)| a.approx_eq(b, tol))
    }
}

pub(crate) fn seq_distance<T: Scalar>(a: &[LSection<T>], b: &[LSection<T>]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::OrderMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let mut d = T::zero();
    for (x, y) in a.iter().zip(b) {
        d = d.max(x.distance(y)?);
    }
    Ok(d)
}

/// A failing slot of the admissibility equations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityFailure {
    pub m: usize,
    pub j: usize,
    pub l: usize,
    pub k: Vec<i32>,
    pub alpha: Vec<u32>,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub passed: bool,
    pub max_residual: f64,
    pub first_failure: Option<AdmissibilityFailure>,
}

impl<T: Scalar> SSequence<T> {
    pub fn new(s: Vec<LSection<T>>) -> Result<Self> {
        let n = check_shape(&s)?;
        Ok(SSequence { n, s })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.s.len()
    }

    /// `S_m`, `1 <= m <= N`.
    pub fn get(&self, m: usize) -> Result<&LSection<T>> {
        if m == 0 || m > self.order() {
            return Err(Error::OrderOutOfRange {
                order: m,
                max: self.order(),
            });
        }
        Ok(&self.s[m - 1])
    }

    pub fn sections(&self) -> &[LSection<T>] {
        &self.s
    }

    pub fn distance(&self, other: &Self) -> Result<T> {
        seq_distance(&self.s, &other.s)
    }

    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        self.s.len() == other.s.len()
            && self.s.iter().zip(&other.s).all(|(a, b)| a.approx_eq(b, tol))
    }

    /// `P_m = sum_{j<l} sum_{k=1}^{m-1} {S_{j,k}, S_{l,m-k}} dy_j ^ dy_l`.
    pub fn compute_p(&self, m: usize) -> Result<TwoFormSection<T>> {
        self.get(m)?;
        let cfg = self.s[0].config();
        let mut p = TwoFormSection::zero_with(self.n, cfg)?;
        for j in 2..=self.n {
            for l in (j + 1)..=self.n {
                for k in 1..m {
                    let br = self
                        .get(k)?
                        .component(j)?
                        .poisson(self.get(m - k)?.component(l)?)?;
                    p.add_to(j, l, &br)?;
                }
            }
        }
        Ok(p)
    }

    /// Compares `d S_m` with `P_m` for every order, up to the relative
    /// tolerance of the scalar type.
    pub fn check_admissible(&self) -> Result<AdmissibilityReport> {
        let mut max_residual = 0.0f64;
        let mut first_failure = None;
        for m in 1..=self.order() {
            let d = self.get(m)?.fibrewise_d()?;
            let p = self.compute_p(m)?;
            let diff = d.sub(&p)?;
            let scale = T::one().max(d.max_abs()).max(p.max_abs());
            let tol = T::default_rel_tol() * scale;
            for (j, l, f) in diff.iter() {
                for (k, alpha, c) in f.terms() {
                    let r = c.norm();
                    let rf = r.to_f64().unwrap_or(f64::INFINITY);
                    max_residual = max_residual.max(rf);
                    if r > tol && first_failure.is_none() {
                        first_failure = Some(AdmissibilityFailure {
                            m,
                            j,
                            l,
                            k,
                            alpha,
                            residual: rf,
                        });
                    }
                }
            }
        }
        Ok(AdmissibilityReport {
            passed: first_failure.is_none(),
            max_residual,
            first_failure,
        })
    }

    pub fn is_admissible(&self) -> Result<bool> {
        Ok(self.check_admissible()?.passed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::TorusFn;

    type F = TorusFn<f64>;
    type L = LSection<f64>;

    #[test]
    fn p1_vanishes_and_n2_has_no_pairs() {
        let s1 = L::new(vec![F::cos_term(3, &[1, 0], &[1, 0], 1.0).unwrap(), F::sin_term(3, &[1, 0], &[0, 0], 1.0).unwrap()]).unwrap();
        let s = SSequence::new(vec![s1.clone(), s1]).unwrap();
        assert!(s.compute_p(1).unwrap().is_zero());
        assert!(matches!(s.compute_p(3), Err(Error::OrderOutOfRange { .. })));
        let t = L::single(2, F::cos_term(2, &[1], &[1], 1.0).unwrap()).unwrap();
        let s = SSequence::new(vec![t.clone(), t]).unwrap();
        assert!(s.compute_p(2).unwrap().is_zero());
    }

    #[test]
    fn p2_is_a_single_bracket() {
        let a = F::cos_term(3, &[1, 0], &[1, 0], 1.0).unwrap();
        let b = F::sin_term(3, &[1, 0], &[0, 0], 1.0).unwrap();
        let s1 = L::new(vec![a.clone(), b.clone()]).unwrap();
        let s = SSequence::new(vec![s1.clone(), L::zero(3).unwrap()]).unwrap();
        // {S_{2,1}, S_{3,1}} with S_{3,1} b-free: -d_b2 S_{2,1} d_y2 S_{3,1}
        //   = -cos(2 pi y2) * 2 pi cos(2 pi y2) = -pi - pi cos(4 pi y2)
        let pi = std::f64::consts::PI;
        let want = F::constant(3, -pi)
            .unwrap()
            .add(&F::cos_term(3, &[2, 0], &[0, 0], -pi).unwrap())
            .unwrap();
        assert!(s.compute_p(2).unwrap().get(2, 3).unwrap().approx_eq(&want, 1e-14));
    }

    #[test]
    fn non_closed_s1_fails_at_first_order() {
        let s1 = L::single(2, F::sin_term(3, &[0, 1], &[0, 0], 1.0).unwrap()).unwrap();
        let rep = SSequence::new(vec![s1]).unwrap().check_admissible().unwrap();
        assert!(!rep.passed);
        assert_eq!(rep.first_failure.unwrap().m, 1);
    }

    #[test]
    fn closed_bracket_free_sequence_passes() {
        let s1 = L::new(vec![F::base_var(3, 2).unwrap(), F::constant(3, 1.0).unwrap()]).unwrap();
        let s = SSequence::new(vec![s1.clone(), s1]).unwrap();
        assert!(s.check_admissible().unwrap().passed);
    }
}
