use serde::{Deserialize, Serialize};

use super::function::{slot, AlgebraConfig, Record, TorusFn};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `ell = sum_{j=2}^n a_j dy_j`, stored as `a_2..a_n`.
#[derive(Clone, PartialEq, Debug)]
pub struct LSection<T: Scalar> {
    n: usize,
    comps: Vec<TorusFn<T>>,
}

/// Section of the second exterior power, components `p_{jl}` for `2 <= j < l <= n`.
#[derive(Clone, PartialEq, Debug)]
pub struct TwoFormSection<T: Scalar> {
    n: usize,
    comps: Vec<TorusFn<T>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub closed: bool,
    pub exact: bool,
    pub constant: bool,
}

/// Serialized section: one record list per component `a_2..a_n`.
pub type SectionRecords = Vec<Vec<Record>>;

impl<T: Scalar> LSection<T> {
    pub fn zero(n: usize) -> Result<Self> {
        Self::zero_with(n, AlgebraConfig::default())
    }

    pub fn zero_with(n: usize, cfg: AlgebraConfig<T>) -> Result<Self> {
        let z = TorusFn::zero_with(n, cfg)?;
        Ok(LSection {
            n,
            comps: vec![z; n - 1],
        })
    }

    /// Components ordered `a_2, ..., a_n`.
    pub fn new(comps: Vec<TorusFn<T>>) -> Result<Self> {
        let n = comps.len() + 1;
        if comps.is_empty() {
            return Err(Error::UnsupportedDimension(1));
        }
        for c in &comps {
            if c.n() != n {
                return Err(Error::DimensionMismatch {
                    left: n,
                    right: c.n(),
                });
            }
        }
        Ok(LSection { n, comps })
    }

    /// `f dy_j` and zero elsewhere.
    pub fn single(j: usize, f: TorusFn<T>) -> Result<Self> {
        let n = f.n();
        let mut s = Self::zero_with(n, f.config())?;
        s.comps[slot(n, j)?] = f;
        Ok(s)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Component `a_j`, `2 <= j <= n`.
    pub fn component(&self, j: usize) -> Result<&TorusFn<T>> {
        Ok(&self.comps[slot(self.n, j)?])
    }

    pub fn set_component(&mut self, j: usize, f: TorusFn<T>) -> Result<()> {
        if f.n() != self.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: f.n(),
            });
        }
        let i = slot(self.n, j)?;
        self.comps[i] = f;
        Ok(())
    }

    pub fn components(&self) -> &[TorusFn<T>] {
        &self.comps
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(TorusFn::is_zero)
    }

    fn zip(&self, other: &Self, op: impl Fn(&TorusFn<T>, &TorusFn<T>) -> Result<TorusFn<T>>) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| op(a, b))
            .collect::<Result<Vec<_>>>()?;
        Ok(LSection { n: self.n, comps })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, TorusFn::add)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, TorusFn::sub)
    }

    pub fn neg(&self) -> Self {
        self.map(TorusFn::neg)
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|f| f.scale(s))
    }

    pub fn map(&self, f: impl Fn(&TorusFn<T>) -> TorusFn<T>) -> Self {
        LSection {
            n: self.n,
            comps: self.comps.iter().map(f).collect(),
        }
    }

    /// Fibrewise gradient `sum_j d_{y_j} g dy_j`.
    pub fn fibre_gradient(g: &TorusFn<T>) -> Result<Self> {
        let comps = (2..=g.n())
            .map(|j| g.d_angle(j))
            .collect::<Result<Vec<_>>>()?;
        Self::new(comps)
    }

    pub fn fibre_average(&self) -> Self {
        self.map(TorusFn::fibre_average)
    }

    pub fn oscillatory_part(&self) -> Self {
        self.map(TorusFn::oscillatory_part)
    }

    pub fn is_fibrewise_constant(&self) -> bool {
        self.comps.iter().all(TorusFn::is_y_free)
    }

    pub fn distance(&self, other: &Self) -> Result<T> {
        let mut d = T::zero();
        for (a, b) in self.comps.iter().zip(&other.comps) {
            d = d.max(a.distance(b)?);
        }
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(d)
    }

    pub fn max_abs(&self) -> T {
        self.comps
            .iter()
            .map(TorusFn::max_abs)
            .fold(T::zero(), T::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        self.n == other.n
            && self
                .comps
                .iter()
                .zip(&other.comps)
                .all(|(a, b)| a.approx_eq(b, tol))
    }

    /// Components `d_{y_j} a_l - d_{y_l} a_j`, `j < l`.
    pub fn fibrewise_d(&self) -> Result<TwoFormSection<T>> {
        let mut out = TwoFormSection::zero_with(self.n, self.config())?;
        for j in 2..=self.n {
            for l in (j + 1)..=self.n {
                let p = self
                    .component(l)?
                    .d_angle(j)?
                    .sub(&self.component(j)?.d_angle(l)?)?;
                out.set(j, l, p)?;
            }
        }
        Ok(out)
    }

    pub fn is_closed(&self) -> Result<bool> {
        Ok(self.fibrewise_d()?.is_zero())
    }

    /// Closed within a relative tolerance of the section size.
    pub fn is_closed_within(&self, tol: T) -> Result<bool> {
        let scale = T::one().max(self.max_abs());
        Ok(self.fibrewise_d()?.max_abs() <= tol * scale * T::two_pi())
    }

    pub fn classify(&self) -> Result<Classification> {
        let closed = self.is_closed()?;
        let constant = self.is_fibrewise_constant();
        let exact = closed && self.comps.iter().all(|c| c.fibre_average().is_zero());
        Ok(Classification {
            closed,
            exact,
            constant,
        })
    }

    /// Pairing with the cycle `db_j`: the zero mode of `a_j`.
    pub fn cycle_integral(&self, j: usize) -> Result<TorusFn<T>> {
        self.require_closed(0)?;
        Ok(self.component(j)?.fibre_average())
    }

    pub(crate) fn require_closed(&self, order: usize) -> Result<()> {
        let d = self.fibrewise_d()?;
        if let Some((j, l, size)) = d.first_nonzero() {
            return Err(Error::NotClosed {
                order,
                j,
                l,
                size: size.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(())
    }

    pub fn config(&self) -> AlgebraConfig<T> {
        self.comps[0].config()
    }

    pub fn to_records(&self) -> SectionRecords {
        self.comps.iter().map(TorusFn::to_records).collect()
    }

    pub fn from_records(n: usize, recs: &SectionRecords) -> Result<Self> {
        if recs.len() + 1 != n {
            return Err(Error::DimensionMismatch {
                left: n - 1,
                right: recs.len(),
            });
        }
        Self::new(
            recs.iter()
                .map(|r| TorusFn::from_records(n, r))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// Evaluates `(a_2, ..., a_n)` at `(b, y)`.
    pub fn evaluate(&self, b: &[T], y: &[T]) -> Result<Vec<T>> {
        self.comps.iter().map(|c| c.evaluate(b, y)).collect()
    }
}

impl<T: Scalar> TwoFormSection<T> {
    pub fn zero(n: usize) -> Result<Self> {
        Self::zero_with(n, AlgebraConfig::default())
    }

    pub fn zero_with(n: usize, cfg: AlgebraConfig<T>) -> Result<Self> {
        let z = TorusFn::zero_with(n, cfg)?;
        let m = n - 1;
        Ok(TwoFormSection {
            n,
            comps: vec![z; m * (m - 1) / 2],
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    fn index(&self, j: usize, l: usize) -> Result<usize> {
        let (a, b) = (slot(self.n, j)?, slot(self.n, l)?);
        if a >= b {
            return Err(Error::InvalidInput(format!(
                "two-form slot ({j},{l}) must have j < l"
            )));
        }
        let m = self.n - 1;
        Ok(a * m - a * (a + 1) / 2 + (b - a - 1))
    }

    /// Component `p_{jl}`, `j < l`.
    pub fn get(&self, j: usize, l: usize) -> Result<&TorusFn<T>> {
        Ok(&self.comps[self.index(j, l)?])
    }

    pub fn set(&mut self, j: usize, l: usize, f: TorusFn<T>) -> Result<()> {
        let i = self.index(j, l)?;
        self.comps[i] = f;
        Ok(())
    }

    pub fn add_to(&mut self, j: usize, l: usize, f: &TorusFn<T>) -> Result<()> {
        let i = self.index(j, l)?;
        self.comps[i] = self.comps[i].add(f)?;
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(TorusFn::is_zero)
    }

    pub fn max_abs(&self) -> T {
        self.comps
            .iter()
            .map(TorusFn::max_abs)
            .fold(T::zero(), T::max)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(TwoFormSection { n: self.n, comps })
    }

    /// Iterates `(j, l, p_jl)`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &TorusFn<T>)> + '_ {
        let n = self.n;
        (2..=n)
            .flat_map(move |j| ((j + 1)..=n).map(move |l| (j, l)))
            .zip(&self.comps)
            .map(|((j, l), f)| (j, l, f))
    }

    /// First nonzero slot with its largest coefficient modulus.
    pub fn first_nonzero(&self) -> Option<(usize, usize, T)> {
        self.iter()
            .find(|(_, _, f)| !f.is_zero())
            .map(|(j, l, f)| (j, l, f.max_abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    type F = TorusFn<f64>;
    type L = LSection<f64>;

    fn sin_y(n: usize, j: usize) -> F {
        let mut k = vec![0; n - 1];
        k[j - 2] = 1;
        F::sin_term(n, &k, &vec![0; n - 1], 1.0).unwrap()
    }

    fn cos_y(n: usize, j: usize, amp: f64) -> F {
        let mut k = vec![0; n - 1];
        k[j - 2] = 1;
        F::cos_term(n, &k, &vec![0; n - 1], amp).unwrap()
    }

    #[test]
    fn fibrewise_d_of_sin_dy2() {
        let l = L::single(2, sin_y(3, 3)).unwrap();
        let d = l.fibrewise_d().unwrap();
        // d(a_2 dy_2) = d_{y_3} a_2 dy_3 ^ dy_2 = -d_{y_3} a_2 dy_2 ^ dy_3
        assert!(d.get(2, 3).unwrap().approx_eq(&cos_y(3, 3, -2.0 * PI), 1e-15));
    }

    #[test]
    fn exact_and_constant_sections_are_closed() {
        let g = F::sin_term(3, &[1, 2], &[1, 0], 0.3).unwrap();
        assert!(L::fibre_gradient(&g).unwrap().fibrewise_d().unwrap().is_zero());
        let c = L::new(vec![F::base_var(3, 3).unwrap(), F::constant(3, 2.0).unwrap()]).unwrap();
        assert!(c.fibrewise_d().unwrap().is_zero());
    }

    #[test]
    fn classify_examples() {
        let dy2 = L::single(2, F::constant(2, 1.0).unwrap()).unwrap();
        let c = dy2.classify().unwrap();
        assert!(c.closed && c.constant && !c.exact);
        let e = L::single(2, cos_y(2, 2, 1.0)).unwrap().classify().unwrap();
        assert!(e.closed && e.exact && !e.constant);
        let nc = L::single(2, sin_y(3, 3)).unwrap().classify().unwrap();
        assert!(!nc.closed && !nc.exact);
    }

    #[test]
    fn cycle_integrals() {
        let a = F::constant(2, 3.0).unwrap().add(&cos_y(2, 2, 1.0)).unwrap();
        let l = L::single(2, a).unwrap();
        assert_eq!(l.cycle_integral(2).unwrap(), F::constant(2, 3.0).unwrap());
        let one = F::constant(3, 1.0).unwrap();
        let l = L::new(vec![one.clone(), one]).unwrap();
        assert_eq!(l.cycle_integral(3).unwrap(), F::constant(3, 1.0).unwrap());
        let g = F::cos_term(3, &[1, -1], &[2, 0], 1.0).unwrap();
        let ex = L::fibre_gradient(&g).unwrap();
        assert!(ex.cycle_integral(2).unwrap().is_zero());
        assert!(matches!(
            L::single(2, sin_y(3, 3)).unwrap().cycle_integral(2),
            Err(Error::NotClosed { .. })
        ));
    }

    #[test]
    fn two_form_indexing() {
        let mut t = TwoFormSection::<f64>::zero(5).unwrap();
        let mut seen = Vec::new();
        for j in 2..=5 {
            for l in (j + 1)..=5 {
                seen.push(t.index(j, l).unwrap());
                t.set(j, l, F::constant(5, (10 * j + l) as f64).unwrap()).unwrap();
            }
        }
        assert_eq!(seen, (0..6).collect::<Vec<_>>());
        for (j, l, f) in t.iter() {
            assert_eq!(f.coefficient(&[0; 4], &[0; 4]).re, (10 * j + l) as f64);
        }
        assert!(t.get(3, 3).is_err());
    }
}
