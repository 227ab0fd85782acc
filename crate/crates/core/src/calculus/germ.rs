use super::recursion::{ell_to_s, s_to_ell};
use super::sequence::{EllSequence, SSequence};
use super::series::{shift_substitute, Series};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::torus::LSection;

/// Truncated germ of a base change `phi_j(b_1, b) = b_j + sum_m Phi_{j,m}(b) b_1^m`,
/// `phi_1 = b_1`. Every `Phi_{j,m}` is independent of the angles.
#[derive(Clone, Debug, PartialEq)]
pub struct GermChange<T: Scalar> {
    n: usize,
    phi: Vec<LSection<T>>,
}

impl<T: Scalar> GermChange<T> {
    pub fn new(phi: Vec<LSection<T>>) -> Result<Self> {
        let n = phi.first().ok_or(Error::OrderOutOfRange { order: 0, max: 0 })?.n();
        for p in &phi {
            if p.n() != n {
                return Err(Error::DimensionMismatch {
                    left: n,
                    right: p.n(),
                });
            }
            if !p.is_fibrewise_constant() {
                return Err(Error::InvalidInput("germ components must not depend on the angles".into()));
            }
        }
        Ok(GermChange { n, phi })
    }

    pub fn identity(n: usize, order: usize) -> Result<Self> {
        Self::new(vec![LSection::zero(n)?; order])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.phi.len()
    }

    /// `Phi_m`, `1 <= m <= N`.
    pub fn get(&self, m: usize) -> Result<&LSection<T>> {
        if m == 0 || m > self.order() {
            return Err(Error::OrderOutOfRange {
                order: m,
                max: self.order(),
            });
        }
        Ok(&self.phi[m - 1])
    }

    pub fn sections(&self) -> &[LSection<T>] {
        &self.phi
    }

    pub fn is_identity(&self) -> bool {
        self.phi.iter().all(LSection::is_zero)
    }

    pub fn is_identity_within(&self, tol: T) -> bool {
        self.phi.iter().all(|p| p.max_abs() <= tol)
    }

    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        self.phi.len() == other.phi.len()
            && self.phi.iter().zip(&other.phi).all(|(a, b)| a.approx_eq(b, tol))
    }

    /// Germ of `phi o phi'`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.order() != other.order() {
            return Err(Error::OrderMismatch {
                left: self.order(),
                right: other.order(),
            });
        }
        let tail = apply(self, other.sections())?;
        Self::new(tail)
    }

    pub fn inverse(&self) -> Result<Self> {
        let n = self.n;
        let order = self.order();
        let mut psi = vec![LSection::zero_with(n, self.phi[0].config())?; order];
        for m in 1..=order {
            // Psi_m enters the m-th coefficient of phi o psi only linearly.
            let c = apply(self, &psi)?;
            psi[m - 1] = c[m - 1].neg();
        }
        Self::new(psi)
    }

    /// The germ `phi` with `Phi_m = S_m`, valid when every `S_m` is
    /// angle independent.
    pub fn from_taylor(s: &SSequence<T>) -> Result<Self> {
        Self::new(s.sections().to_vec())
    }

    /// For a fibrewise constant sequence, the germ sending it to zero.
    pub fn normalizing(ell: &EllSequence<T>) -> Result<Self> {
        if !ell.sections().iter().all(LSection::is_fibrewise_constant) {
            return Err(Error::InvalidInput("sequence is not fibrewise constant".into()));
        }
        Self::from_taylor(&ell_to_s(ell)?)?.inverse()
    }

    /// `Phi . l`: the invariant sequence of `phi o u`.
    pub fn act(&self, ell: &EllSequence<T>) -> Result<EllSequence<T>> {
        if self.order() != ell.order() {
            return Err(Error::OrderMismatch {
                left: self.order(),
                right: ell.order(),
            });
        }
        let s = ell_to_s(ell)?;
        let st = apply(self, s.sections())?;
        s_to_ell(&SSequence::new(st)?)
    }
}

/// Taylor tail of `phi o v` where `v_j = b_j + sum_m tail[m-1]_j b_1^m`:
/// `(phi o v)_j = v_j + sum_k Phi_{j,k}(v) b_1^k`.
fn apply<T: Scalar>(germ: &GermChange<T>, tail: &[LSection<T>]) -> Result<Vec<LSection<T>>> {
    let n = germ.n;
    let order = germ.order();
    let cfg = tail[0].config();
    let delta = (2..=n)
        .map(|j| {
            let t = tail.iter().map(|s| s.component(j).cloned()).collect::<Result<Vec<_>>>()?;
            Series::from_tail(n, order, cfg, &t)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(order);
    let mut comps: Vec<Series<T>> = delta.clone();
    for (i, j) in (2..=n).enumerate() {
        for k in 1..=order {
            let f = germ.get(k)?.component(j)?;
            if f.is_zero() {
                continue;
            }
            let sub = shift_substitute(f, &delta, order)?.shift(k)?;
            comps[i] = comps[i].add(&sub)?;
        }
    }
    for m in 1..=order {
        out.push(LSection::new(comps.iter().map(|c| c.coeff(m).clone()).collect())?);
    }
    Ok(out)
}

/// Splitting of a first-order invariant into oscillating and fibrewise constant parts.
#[derive(Clone, Debug, PartialEq)]
pub struct FirstOrderClass<T: Scalar> {
    /// Zero modes removed; identifies the class.
    pub representative: LSection<T>,
    /// The fibrewise constant remainder.
    pub residual: LSection<T>,
}

pub fn first_order_class<T: Scalar>(ell1: &LSection<T>) -> FirstOrderClass<T> {
    FirstOrderClass {
        representative: ell1.oscillatory_part(),
        residual: ell1.fibre_average(),
    }
}

/// Two first-order invariants differ by a fibrewise constant section.
pub fn equivalent_first_order<T: Scalar>(a: &LSection<T>, b: &LSection<T>) -> Result<bool> {
    Ok(a.sub(b)?.is_fibrewise_constant())
}

/// Integers `m_2..m_n` with `int_{db_j} l_1 = m_j`.
pub fn integrality_check<T: Scalar>(ell: &EllSequence<T>) -> Result<Vec<i64>> {
    integrality_of(ell.get(1)?)
}

pub fn integrality_of<T: Scalar>(ell1: &LSection<T>) -> Result<Vec<i64>> {
    let tol = 1e-9;
    let n = ell1.n();
    let mut out = Vec::with_capacity(n - 1);
    for j in 2..=n {
        let z = ell1.cycle_integral(j)?;
        let c0 = z.coefficient(&vec![0; n - 1], &vec![0; n - 1]).re.to_f64().unwrap_or(f64::NAN);
        let varying = z
            .terms()
            .filter(|(_, a, _)| a.iter().any(|&x| x > 0))
            .any(|(_, _, c)| c.norm().to_f64().unwrap_or(f64::INFINITY) > tol);
        if varying {
            return Err(Error::NotConstant { j });
        }
        let m = c0.round();
        if (c0 - m).abs() > tol {
            return Err(Error::NotIntegral { j, value: c0 });
        }
        out.push(m as i64);
    }
    Ok(out)
}

/// Joint verdict on the closedness equivalence for one sequence pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TransferVerdict {
    pub ell_closed: bool,
    pub s_admissible: bool,
}

impl TransferVerdict {
    pub fn consistent(&self) -> bool {
        self.ell_closed == self.s_admissible
    }
}

/// Checks that `l` is closed exactly when its Taylor partner is admissible.
pub fn closedness_transfer<T: Scalar>(ell: &EllSequence<T>) -> Result<TransferVerdict> {
    let s = ell_to_s(ell)?;
    Ok(TransferVerdict {
        ell_closed: ell.is_closed(),
        s_admissible: s.is_admissible()?,
    })
}

/// Same check starting from Taylor data.
pub fn closedness_transfer_s<T: Scalar>(s: &SSequence<T>) -> Result<TransferVerdict> {
    let ell = s_to_ell(s)?;
    Ok(TransferVerdict {
        ell_closed: ell.is_closed(),
        s_admissible: s.is_admissible()?,
    })
}
