use super::sequence::{EllSequence, SSequence};
use super::series::{shift_substitute, Series};
use crate::error::Result;
use crate::scalar::Scalar;
use crate::torus::{LSection, TorusFn};

/// Solves `b_j + a_j + sum_m r^m S_{j,m}(b + a, y) = b_j` for the series
/// `a = sum_l r^l a_l` order by order:
/// `a_{j,l} = -sum_{m=1}^{l} [S_{j,m}(b + a)]_{l-m}`, where the bracket only
/// involves `a_1..a_{l-m}`.
///
/// This is the direct composition-and-inversion route; it is slower than
/// `s_to_ell` and serves as an independent check of it.
pub fn series_inversion<T: Scalar>(s: &SSequence<T>) -> Result<EllSequence<T>> {
    let (n, order) = (s.n(), s.order());
    let cfg = s.get(1)?.config();
    // a[j - 2][l - 1] = a_{j,l}
    let mut a: Vec<Vec<TorusFn<T>>> = vec![Vec::with_capacity(order); n - 1];
    for l in 1..=order {
        let mut next = Vec::with_capacity(n - 1);
        for j in 2..=n {
            let mut acc = TorusFn::zero_with(n, cfg)?;
            for m in 1..=l {
                let k = l - m;
                let delta = a
                    .iter()
                    .map(|c| Series::from_tail(n, k, cfg, &c[..k]))
                    .collect::<Result<Vec<_>>>()?;
                acc = acc.add(shift_substitute(s.get(m)?.component(j)?, &delta, k)?.coeff(k))?;
            }
            next.push(acc.neg());
        }
        for (c, f) in a.iter_mut().zip(next) {
            c.push(f);
        }
    }
    let ell = (0..order)
        .map(|l| LSection::new(a.iter().map(|c| c[l].clone()).collect()))
        .collect::<Result<Vec<_>>>()?;
    EllSequence::new_unverified(ell)
}
