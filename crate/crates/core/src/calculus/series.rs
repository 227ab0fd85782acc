use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::torus::{AlgebraConfig, TorusFn};

/// Truncated power series `sum_{m=0}^N c_m r^m` with coefficients on the
/// reduced seam. `r` stands for `b_1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Series<T: Scalar> {
    coeffs: Vec<TorusFn<T>>,
}

impl<T: Scalar> Series<T> {
    pub fn zero(n: usize, order: usize, cfg: AlgebraConfig<T>) -> Result<Self> {
        Ok(Series {
            coeffs: vec![TorusFn::zero_with(n, cfg)?; order + 1],
        })
    }

    pub fn constant(f: TorusFn<T>, order: usize) -> Result<Self> {
        let mut s = Self::zero(f.n(), order, f.config())?;
        s.coeffs[0] = f;
        Ok(s)
    }

    /// Series with `c_0 = 0` and `c_m = terms[m - 1]`.
    pub fn from_tail(n: usize, order: usize, cfg: AlgebraConfig<T>, terms: &[TorusFn<T>]) -> Result<Self> {
        let mut s = Self::zero(n, order, cfg)?;
        for (m, f) in terms.iter().enumerate().take(order) {
            s.coeffs[m + 1] = f.clone();
        }
        Ok(s)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, m: usize) -> &TorusFn<T> {
        &self.coeffs[m]
    }

    pub fn set_coeff(&mut self, m: usize, f: TorusFn<T>) {
        self.coeffs[m] = f;
    }

    pub fn coeffs(&self) -> &[TorusFn<T>] {
        &self.coeffs
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.order() != other.order() {
            return Err(Error::OrderMismatch {
                left: self.order(),
                right: other.order(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Series { coeffs })
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let order = self.order();
        let first = |s: &Self| s.coeffs.iter().position(|c| !c.is_zero());
        let (Some(la), Some(lb)) = (first(self), first(other)) else {
            return Series::zero(self.coeffs[0].n(), order, self.coeffs[0].config());
        };
        let mut out = Series::zero(self.coeffs[0].n(), order, self.coeffs[0].config())?;
        for m in (la + lb)..=order {
            let mut acc = out.coeffs[m].clone();
            for i in la..=(m - lb) {
                let (a, b) = (&self.coeffs[i], &other.coeffs[m - i]);
                if !a.is_zero() && !b.is_zero() {
                    acc = acc.add(&a.mul(b)?)?;
                }
            }
            out.coeffs[m] = acc;
        }
        Ok(out)
    }

    /// Multiplies every coefficient by a fixed function.
    pub fn mul_fn(&self, f: &TorusFn<T>) -> Result<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.mul(f))
            .collect::<Result<Vec<_>>>()?;
        Ok(Series { coeffs })
    }

    /// Multiplies by `r^k`, dropping what falls past the truncation order.
    pub fn shift(&self, k: usize) -> Result<Self> {
        let n = self.coeffs[0].n();
        let mut out = Series::zero(n, self.order(), self.coeffs[0].config())?;
        for m in k..=self.order() {
            out.coeffs[m] = self.coeffs[m - k].clone();
        }
        Ok(out)
    }
}

/// `F(b + delta(r), y)` expanded as `sum_I d^I F / I! delta^I` and truncated.
///
/// Every `delta_j` must have zero constant term, so only `|I| <= N`
/// contributes.
pub fn shift_substitute<T: Scalar>(f: &TorusFn<T>, delta: &[Series<T>], order: usize) -> Result<Series<T>> {
    let s = f.n() - 1;
    if delta.len() != s {
        return Err(Error::DimensionMismatch {
            left: s,
            right: delta.len(),
        });
    }
    if delta.iter().any(|d| !d.coeff(0).is_zero() || d.order() != order) {
        return Err(Error::InvalidInput(
            "shift series must have zero constant term and matching order".into(),
        ));
    }
    let mut powers: Vec<Vec<Series<T>>> = Vec::with_capacity(s);
    for (i, d) in delta.iter().enumerate() {
        let top = (f.slot_degree(i) as usize).min(order);
        let mut p = vec![Series::constant(TorusFn::constant(f.n(), T::one())?.with_config(f.config()), order)?];
        for _ in 0..top {
            let next = p.last().unwrap().mul(d)?;
            p.push(next);
        }
        powers.push(p);
    }
    substitute_from(f, 0, &powers, order)
}

fn substitute_from<T: Scalar>(f: &TorusFn<T>, i: usize, powers: &[Vec<Series<T>>], order: usize) -> Result<Series<T>> {
    if f.is_zero() {
        return Series::zero(f.n(), order, f.config());
    }
    if i == powers.len() {
        return Series::constant(f.clone(), order);
    }
    let mut acc = Series::zero(f.n(), order, f.config())?;
    for (p, pw) in powers[i].iter().enumerate() {
        let t = f.taylor_slot(i, p as u32);
        if t.is_zero() {
            continue;
        }
        let inner = substitute_from(&t, i + 1, powers, order)?;
        acc = acc.add(&inner.mul(pw)?)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    type F = TorusFn<f64>;

    #[test]
    fn substitution_of_a_cubic() {
        // (b + r)^3 = b^3 + 3 b^2 r + 3 b r^2 + r^3
        let cfg = AlgebraConfig::default();
        let f = F::monomial(2, &[3], 1.0).unwrap();
        let one = F::constant(2, 1.0).unwrap();
        let d = Series::from_tail(2, 4, cfg, &[one]).unwrap();
        let s = shift_substitute(&f, &[d], 4).unwrap();
        let want = [(0, 3, 1.0), (1, 2, 3.0), (2, 1, 3.0), (3, 0, 1.0)];
        for (m, a, c) in want {
            assert_eq!(s.coeff(m), &F::monomial(2, &[a], c).unwrap());
        }
        assert!(s.coeff(4).is_zero());
    }

    #[test]
    fn truncated_product() {
        let cfg = AlgebraConfig::default();
        let b = F::base_var(2, 2).unwrap();
        let x = Series::from_tail(2, 3, cfg, &[b.clone(), b.clone(), b.clone()]).unwrap();
        let sq = x.mul(&x).unwrap();
        assert!(sq.coeff(1).is_zero());
        assert_eq!(sq.coeff(2), &b.mul(&b).unwrap());
        assert_eq!(sq.coeff(3), &b.mul(&b).unwrap().scale(2.0));
    }
}
