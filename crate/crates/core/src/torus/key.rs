//! Packed (Fourier index, monomial exponent) keys.
//!
//! A key stores `k_2..k_n` followed by `alpha_2..alpha_n`, one byte each, most
//! significant first, so that integer order on the packed value is the
//! lexicographic order on `(k, alpha)`. Fourier bytes carry a +128 offset.

use crate::error::{Error, Result};

pub(crate) const MAX_SLOTS: usize = 8;
pub(crate) const MODE_LIMIT: u32 = 127;
pub(crate) const DEGREE_LIMIT: u32 = 127;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Key(pub(crate) u128);

#[inline]
fn k_shift(slots: usize, i: usize) -> u32 {
    8 * (2 * slots - 1 - i) as u32
}

#[inline]
fn a_shift(slots: usize, i: usize) -> u32 {
    8 * (slots - 1 - i) as u32
}

/// Packed value of the all-zero key for `slots` angle/base slots.
#[inline]
pub(crate) fn zero_key(slots: usize) -> Key {
    let mut v = 0u128;
    for i in 0..slots {
        v |= 128u128 << k_shift(slots, i);
    }
    Key(v)
}

impl Key {
    pub fn pack(k: &[i32], alpha: &[u32]) -> Result<Key> {
        let slots = k.len();
        if alpha.len() != slots {
            return Err(Error::DimensionMismatch {
                left: slots,
                right: alpha.len(),
            });
        }
        if slots == 0 || slots > MAX_SLOTS {
            return Err(Error::UnsupportedDimension(slots + 1));
        }
        let mut v = 0u128;
        for i in 0..slots {
            if k[i].unsigned_abs() > MODE_LIMIT {
                return Err(Error::ModeOverflow {
                    mode: k[i] as i64,
                    cap: MODE_LIMIT,
                });
            }
            if alpha[i] > DEGREE_LIMIT {
                return Err(Error::DegreeOverflow {
                    degree: alpha[i] as u64,
                    cap: DEGREE_LIMIT,
                });
            }
            v |= ((k[i] + 128) as u128) << k_shift(slots, i);
            v |= (alpha[i] as u128) << a_shift(slots, i);
        }
        Ok(Key(v))
    }

    #[inline]
    pub fn k(self, slots: usize, i: usize) -> i32 {
        ((self.0 >> k_shift(slots, i)) & 0xff) as i32 - 128
    }

    #[inline]
    pub fn alpha(self, slots: usize, i: usize) -> u32 {
        ((self.0 >> a_shift(slots, i)) & 0xff) as u32
    }

    pub fn k_vec(self, slots: usize) -> Vec<i32> {
        (0..slots).map(|i| self.k(slots, i)).collect()
    }

    pub fn alpha_vec(self, slots: usize) -> Vec<u32> {
        (0..slots).map(|i| self.alpha(slots, i)).collect()
    }

    #[inline]
    pub fn is_y_free(self, slots: usize) -> bool {
        (0..slots).all(|i| self.k(slots, i) == 0)
    }

    pub fn max_mode(self, slots: usize) -> u32 {
        (0..slots)
            .map(|i| self.k(slots, i).unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    pub fn degree(self, slots: usize) -> u32 {
        (0..slots).map(|i| self.alpha(slots, i)).sum()
    }

    /// Key of the product of two monomial-exponentials. Callers guarantee the
    /// per-byte results stay in range.
    #[inline]
    pub(crate) fn combine(self, other: Key, zero: Key) -> Key {
        Key(self.0 + other.0 - zero.0)
    }

    /// Key with the Fourier index negated.
    pub(crate) fn conj(self, slots: usize) -> Key {
        let mut v = self.0;
        for i in 0..slots {
            let sh = k_shift(slots, i);
            let byte = ((v >> sh) & 0xff) as i32;
            let neg = (256 - byte) as u128; // 128 - (byte - 128)
            v = (v & !(0xffu128 << sh)) | (neg << sh);
        }
        Key(v)
    }

    /// Key with `alpha_i` lowered by one. Requires `alpha_i >= 1`.
    #[inline]
    pub(crate) fn lower_alpha(self, slots: usize, i: usize) -> Key {
        Key(self.0 - (1u128 << a_shift(slots, i)))
    }

    /// Key with `alpha_i` lowered by `p`. Requires `alpha_i >= p`.
    #[inline]
    pub(crate) fn lower_alpha_by(self, slots: usize, i: usize, p: u32) -> Key {
        Key(self.0 - ((p as u128) << a_shift(slots, i)))
    }

    /// Key with every Fourier index set to zero.
    pub(crate) fn zero_modes(self, slots: usize) -> Key {
        let mut v = self.0;
        for i in 0..slots {
            let sh = k_shift(slots, i);
            v = (v & !(0xffu128 << sh)) | (128u128 << sh);
        }
        Key(v)
    }
}
