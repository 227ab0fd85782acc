use std::fmt;

use num_complex::Complex;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use super::key::{zero_key, Key, DEGREE_LIMIT, MAX_SLOTS, MODE_LIMIT};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Pruning threshold and support caps carried by every [`TorusFn`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlgebraConfig<T> {
    pub prune: T,
    /// Maximum `|k|_inf` of any stored Fourier index.
    pub max_mode: u32,
    /// Maximum total degree `|alpha|_1` of any stored monomial.
    pub max_degree: u32,
}

impl<T: Scalar> Default for AlgebraConfig<T> {
    fn default() -> Self {
        AlgebraConfig {
            prune: T::default_prune(),
            max_mode: 48,
            max_degree: 48,
        }
    }
}

impl<T: Scalar> AlgebraConfig<T> {
    pub fn with_caps(max_mode: u32, max_degree: u32) -> Result<Self> {
        if max_mode > MODE_LIMIT / 2 || max_degree > DEGREE_LIMIT / 2 {
            return Err(Error::InvalidInput(format!(
                "caps must satisfy max_mode <= {} and max_degree <= {}",
                MODE_LIMIT / 2,
                DEGREE_LIMIT / 2
            )));
        }
        Ok(AlgebraConfig {
            max_mode,
            max_degree,
            ..Default::default()
        })
    }
}

/// A function on the reduced seam `Gamma x T^{n-1}`:
/// `f(b, y) = sum c_{k,alpha} b^alpha exp(2 pi i k.y)` with `b = (b_2..b_n)`,
/// `y = (y_2..y_n)` of period one.
///
/// Terms are kept sorted by `(k, alpha)`, without duplicates, and with every
/// coefficient above the pruning threshold.
#[derive(Clone)]
pub struct TorusFn<T: Scalar> {
    n: usize,
    cfg: AlgebraConfig<T>,
    terms: Vec<(Key, Complex<T>)>,
}

/// One serialized term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub k: Vec<i32>,
    pub alpha: Vec<u32>,
    pub re: f64,
    pub im: f64,
}

impl<T: Scalar> TorusFn<T> {
    fn check_n(n: usize) -> Result<()> {
        if n < 2 || n - 1 > MAX_SLOTS {
            Err(Error::UnsupportedDimension(n))
        } else {
            Ok(())
        }
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::zero_with(n, AlgebraConfig::default())
    }

    pub fn zero_with(n: usize, cfg: AlgebraConfig<T>) -> Result<Self> {
        Self::check_n(n)?;
        Ok(TorusFn {
            n,
            cfg,
            terms: Vec::new(),
        })
    }

    pub fn constant(n: usize, c: T) -> Result<Self> {
        let mut f = Self::zero(n)?;
        f.terms.push((zero_key(n - 1), Complex::new(c, T::zero())));
        f.canonicalize();
        Ok(f)
    }

    /// The base coordinate `b_j`, `2 <= j <= n`.
    pub fn base_var(n: usize, j: usize) -> Result<Self> {
        let mut alpha = vec![0u32; n.saturating_sub(1)];
        let i = slot(n, j)?;
        alpha[i] = 1;
        Self::monomial(n, &alpha, T::one())
    }

    /// `c * b^alpha`.
    pub fn monomial(n: usize, alpha: &[u32], c: T) -> Result<Self> {
        Self::check_n(n)?;
        if alpha.len() != n - 1 {
            return Err(Error::DimensionMismatch {
                left: n - 1,
                right: alpha.len(),
            });
        }
        let key = Key::pack(&vec![0; n - 1], alpha)?;
        let mut f = Self::zero(n)?;
        f.terms.push((key, Complex::new(c, T::zero())));
        f.canonicalize();
        f.check_caps()?;
        Ok(f)
    }

    /// `amp * b^alpha * cos(2 pi k.y)`.
    pub fn cos_term(n: usize, k: &[i32], alpha: &[u32], amp: T) -> Result<Self> {
        let half = amp / T::lit(2.0);
        Self::conjugate_pair(n, k, alpha, Complex::new(half, T::zero()))
    }

    /// `amp * b^alpha * sin(2 pi k.y)`.
    pub fn sin_term(n: usize, k: &[i32], alpha: &[u32], amp: T) -> Result<Self> {
        let half = amp / T::lit(2.0);
        Self::conjugate_pair(n, k, alpha, Complex::new(T::zero(), -half))
    }

    /// `c b^alpha e^{2 pi i k.y} + conj(c) b^alpha e^{-2 pi i k.y}`.
    pub fn conjugate_pair(n: usize, k: &[i32], alpha: &[u32], c: Complex<T>) -> Result<Self> {
        Self::check_n(n)?;
        let key = Key::pack(k, alpha)?;
        let neg: Vec<i32> = k.iter().map(|x| -x).collect();
        let nkey = Key::pack(&neg, alpha)?;
        let mut f = Self::zero(n)?;
        if key == nkey {
            f.terms.push((key, Complex::new(c.re + c.re, T::zero())));
        } else {
            f.terms.push((key, c));
            f.terms.push((nkey, c.conj()));
        }
        f.canonicalize();
        f.check_caps()?;
        Ok(f)
    }

    /// Builds a function from raw terms, enforcing the reality condition.
    pub fn from_terms(
        n: usize,
        terms: impl IntoIterator<Item = (Vec<i32>, Vec<u32>, Complex<T>)>,
    ) -> Result<Self> {
        let mut f = Self::zero(n)?;
        for (k, alpha, c) in terms {
            if k.len() != n - 1 {
                return Err(Error::DimensionMismatch {
                    left: n - 1,
                    right: k.len(),
                });
            }
            f.terms.push((Key::pack(&k, &alpha)?, c));
        }
        f.canonicalize();
        f.check_caps()?;
        let res = f.reality_residual();
        let scale = f.max_abs().max(T::one());
        if res > T::default_rel_tol() * scale {
            return Err(Error::NotReal(res.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(f)
    }

    pub fn with_config(mut self, cfg: AlgebraConfig<T>) -> Self {
        self.cfg = cfg;
        self.canonicalize();
        self
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn config(&self) -> AlgebraConfig<T> {
        self.cfg
    }

    #[inline]
    pub(crate) fn slots(&self) -> usize {
        self.n - 1
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Iterates `(k, alpha, coefficient)` in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<i32>, Vec<u32>, Complex<T>)> + '_ {
        let s = self.slots();
        self.terms
            .iter()
            .map(move |(key, c)| (key.k_vec(s), key.alpha_vec(s), *c))
    }

    pub fn coefficient(&self, k: &[i32], alpha: &[u32]) -> Complex<T> {
        match Key::pack(k, alpha) {
            Ok(key) => self.lookup(key),
            Err(_) => Complex::new(T::zero(), T::zero()),
        }
    }

    fn lookup(&self, key: Key) -> Complex<T> {
        match self.terms.binary_search_by_key(&key, |(kk, _)| *kk) {
            Ok(i) => self.terms[i].1,
            Err(_) => Complex::new(T::zero(), T::zero()),
        }
    }

    pub fn max_abs(&self) -> T {
        self.terms
            .iter()
            .map(|(_, c)| c.norm())
            .fold(T::zero(), T::max)
    }

    pub fn max_mode(&self) -> u32 {
        let s = self.slots();
        self.terms.iter().map(|(k, _)| k.max_mode(s)).max().unwrap_or(0)
    }

    pub fn degree(&self) -> u32 {
        let s = self.slots();
        self.terms.iter().map(|(k, _)| k.degree(s)).max().unwrap_or(0)
    }

    fn slot_mode(&self, i: usize) -> u32 {
        let s = self.slots();
        self.terms
            .iter()
            .map(|(k, _)| k.k(s, i).unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    /// True when no term depends on the angles.
    pub fn is_y_free(&self) -> bool {
        let s = self.slots();
        self.terms.iter().all(|(k, _)| k.is_y_free(s))
    }

    /// Largest violation of `c_{-k,alpha} = conj(c_{k,alpha})`.
    pub fn reality_residual(&self) -> T {
        let s = self.slots();
        self.terms
            .iter()
            .map(|(key, c)| (self.lookup(key.conj(s)) - c.conj()).norm())
            .fold(T::zero(), T::max)
    }

    fn canonicalize(&mut self) {
        self.terms.sort_unstable_by_key(|(k, _)| *k);
        let prune = self.cfg.prune;
        let mut out: Vec<(Key, Complex<T>)> = Vec::with_capacity(self.terms.len());
        for &(k, c) in &self.terms {
            match out.last_mut() {
                Some((lk, lc)) if *lk == k => *lc = *lc + c,
                _ => out.push((k, c)),
            }
        }
        out.retain(|(_, c)| c.norm() >= prune);
        self.terms = out;
    }

    fn check_caps(&self) -> Result<()> {
        let mode = self.max_mode();
        if mode > self.cfg.max_mode {
            return Err(Error::ModeOverflow {
                mode: mode as i64,
                cap: self.cfg.max_mode,
            });
        }
        let deg = self.degree();
        if deg > self.cfg.max_degree {
            return Err(Error::DegreeOverflow {
                degree: deg as u64,
                cap: self.cfg.max_degree,
            });
        }
        Ok(())
    }

    fn same_n(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            })
        } else {
            Ok(())
        }
    }

    fn merge(&self, other: &Self, sign: T) -> Result<Self> {
        self.same_n(other)?;
        let mut terms = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &other.terms);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                terms.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                terms.push((b[j].0, b[j].1 * sign));
                j += 1;
            } else {
                terms.push((a[i].0, a[i].1 + b[j].1 * sign));
                i += 1;
                j += 1;
            }
        }
        let prune = self.cfg.prune;
        terms.retain(|(_, c)| c.norm() >= prune);
        Ok(TorusFn {
            n: self.n,
            cfg: self.cfg,
            terms,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.merge(other, T::one())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.merge(other, -T::one())
    }

    pub fn neg(&self) -> Self {
        self.scale(-T::one())
    }

    pub fn scale(&self, s: T) -> Self {
        self.scale_complex(Complex::new(s, T::zero()))
    }

    pub(crate) fn scale_complex(&self, s: Complex<T>) -> Self {
        let mut f = self.clone();
        for t in &mut f.terms {
            t.1 = t.1 * s;
        }
        let prune = f.cfg.prune;
        f.terms.retain(|(_, c)| c.norm() >= prune);
        f
    }

    /// Exact product: Fourier indices convolve, monomial exponents add.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_n(other)?;
        if self.is_zero() || other.is_zero() {
            return Self::zero_with(self.n, self.cfg);
        }
        let s = self.slots();
        for i in 0..s {
            let m = self.slot_mode(i) + other.slot_mode(i);
            if m > self.cfg.max_mode {
                return Err(Error::ModeOverflow {
                    mode: m as i64,
                    cap: self.cfg.max_mode,
                });
            }
        }
        let deg = self.degree() + other.degree();
        if deg > self.cfg.max_degree {
            return Err(Error::DegreeOverflow {
                degree: deg as u64,
                cap: self.cfg.max_degree,
            });
        }
        let zero = zero_key(s);
        let mut acc: FxHashMap<Key, Complex<T>> = FxHashMap::default();
        acc.reserve(self.terms.len() * other.terms.len() / 2 + 1);
        for &(ka, ca) in &self.terms {
            for &(kb, cb) in &other.terms {
                let e = acc
                    .entry(ka.combine(kb, zero))
                    .or_insert_with(|| Complex::new(T::zero(), T::zero()));
                *e = *e + ca * cb;
            }
        }
        let mut f = TorusFn {
            n: self.n,
            cfg: self.cfg,
            terms: acc.into_iter().collect(),
        };
        f.canonicalize();
        Ok(f)
    }

    /// `d/db_j`, `2 <= j <= n`.
    pub fn d_base(&self, j: usize) -> Result<Self> {
        let i = slot(self.n, j)?;
        let s = self.slots();
        let mut f = TorusFn {
            n: self.n,
            cfg: self.cfg,
            terms: Vec::with_capacity(self.terms.len()),
        };
        for &(key, c) in &self.terms {
            let a = key.alpha(s, i);
            if a > 0 {
                f.terms.push((key.lower_alpha(s, i), c * T::lit(a as f64)));
            }
        }
        f.canonicalize();
        Ok(f)
    }

    /// Taylor coefficient `d^p f / db_j^p / p!`. Uses integer binomial
    /// factors, so dyadic coefficients stay exact.
    pub fn taylor(&self, j: usize, p: u32) -> Result<Self> {
        let i = slot(self.n, j)?;
        Ok(self.taylor_slot(i, p))
    }

    pub(crate) fn taylor_slot(&self, i: usize, p: u32) -> Self {
        if p == 0 {
            return self.clone();
        }
        let s = self.slots();
        let mut f = TorusFn {
            n: self.n,
            cfg: self.cfg,
            terms: Vec::with_capacity(self.terms.len()),
        };
        for &(key, c) in &self.terms {
            let a = key.alpha(s, i);
            if a >= p {
                let binom = T::lit(binomial(a, p) as f64);
                f.terms.push((key.lower_alpha_by(s, i, p), c * binom));
            }
        }
        // lowering one slot keeps keys sorted and distinct
        let prune = f.cfg.prune;
        f.terms.retain(|(_, c)| c.norm() >= prune);
        f
    }

    /// Multi-index Taylor coefficient `d^I f / I!`, `I = (i_2..i_n)`.
    pub fn taylor_multi(&self, idx: &[u32]) -> Result<Self> {
        if idx.len() != self.slots() {
            return Err(Error::DimensionMismatch {
                left: self.slots(),
                right: idx.len(),
            });
        }
        let mut f = self.clone();
        for (i, &p) in idx.iter().enumerate() {
            if p > 0 {
                f = f.taylor_slot(i, p);
            }
        }
        Ok(f)
    }

    /// Largest exponent of `b_j` over all terms, by zero-based slot.
    pub(crate) fn slot_degree(&self, i: usize) -> u32 {
        let s = self.slots();
        self.terms
            .iter()
            .map(|(k, _)| k.alpha(s, i))
            .max()
            .unwrap_or(0)
    }

    /// `d/dy_j`, `2 <= j <= n`: multiplies each term by `2 pi i k_j`.
    pub fn d_angle(&self, j: usize) -> Result<Self> {
        let i = slot(self.n, j)?;
        let s = self.slots();
        let tau = T::two_pi();
        let mut f = TorusFn {
            n: self.n,
            cfg: self.cfg,
            terms: Vec::with_capacity(self.terms.len()),
        };
        for &(key, c) in &self.terms {
            let kj = key.k(s, i);
            if kj != 0 {
                let factor = Complex::new(T::zero(), tau * T::lit(kj as f64));
                f.terms.push((key, c * factor));
            }
        }
        f.canonicalize();
        Ok(f)
    }

    /// Poisson bracket on the reduced seam:
    /// `{f, g} = sum_k d_{y_k} f d_{b_k} g - d_{b_k} f d_{y_k} g`.
    pub fn poisson(&self, other: &Self) -> Result<Self> {
        self.same_n(other)?;
        let mut acc = Self::zero_with(self.n, self.cfg)?;
        for j in 2..=self.n {
            let left = self.d_angle(j)?.mul(&other.d_base(j)?)?;
            let right = self.d_base(j)?.mul(&other.d_angle(j)?)?;
            acc = acc.add(&left.sub(&right)?)?;
        }
        Ok(acc)
    }

    /// Zero Fourier mode: the fibrewise average.
    pub fn fibre_average(&self) -> Self {
        let s = self.slots();
        TorusFn {
            n: self.n,
            cfg: self.cfg,
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| k.is_y_free(s))
                .copied()
                .collect(),
        }
    }

    /// Everything except the zero Fourier mode.
    pub fn oscillatory_part(&self) -> Self {
        let s = self.slots();
        TorusFn {
            n: self.n,
            cfg: self.cfg,
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| !k.is_y_free(s))
                .copied()
                .collect(),
        }
    }

    /// Drops the angle dependence and returns the Fourier coefficient of
    /// `e^{2 pi i k.y}` as a y-free function. Used by substitutions that only
    /// see the base variables.
    pub fn fourier_coefficient(&self, k: &[i32]) -> Result<Self> {
        if k.len() != self.slots() {
            return Err(Error::DimensionMismatch {
                left: self.slots(),
                right: k.len(),
            });
        }
        let s = self.slots();
        Ok(TorusFn {
            n: self.n,
            cfg: self.cfg,
            terms: self
                .terms
                .iter()
                .filter(|(key, _)| (0..s).all(|i| key.k(s, i) == k[i]))
                .map(|&(key, c)| (key.zero_modes(s), c))
                .collect(),
        })
    }

    pub fn evaluate_complex(&self, b: &[T], y: &[T]) -> Result<Complex<T>> {
        let s = self.slots();
        if b.len() != s || y.len() != s {
            return Err(Error::DimensionMismatch {
                left: s,
                right: if b.len() != s { b.len() } else { y.len() },
            });
        }
        let tau = T::two_pi();
        let mut acc = Complex::new(T::zero(), T::zero());
        for &(key, c) in &self.terms {
            let mut mono = T::one();
            let mut phase = T::zero();
            for i in 0..s {
                let a = key.alpha(s, i);
                if a > 0 {
                    mono = mono * b[i].powi(a as i32);
                }
                let k = key.k(s, i);
                if k != 0 {
                    phase = phase + T::lit(k as f64) * y[i];
                }
            }
            let angle = tau * phase;
            acc = acc + c * Complex::new(mono * angle.cos(), mono * angle.sin());
        }
        Ok(acc)
    }

    /// Real value at `(b, y)`; the imaginary residue vanishes by the reality
    /// condition and is discarded.
    pub fn evaluate(&self, b: &[T], y: &[T]) -> Result<T> {
        Ok(self.evaluate_complex(b, y)?.re)
    }

    /// `sup |coef(self) - coef(other)|`.
    pub fn distance(&self, other: &Self) -> Result<T> {
        let d = self.merge(other, -T::one())?;
        Ok(d.terms
            .iter()
            .map(|(_, c)| c.norm())
            .fold(T::zero(), T::max))
    }

    /// Equality up to the relative tolerance `tol * max(1, |self|, |other|)`.
    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        let scale = T::one().max(self.max_abs()).max(other.max_abs());
        match self.distance(other) {
            Ok(d) => d <= tol * scale,
            Err(_) => false,
        }
    }

    pub fn to_records(&self) -> Vec<Record> {
        let s = self.slots();
        self.terms
            .iter()
            .map(|(key, c)| Record {
                k: key.k_vec(s),
                alpha: key.alpha_vec(s),
                re: c.re.to_f64().unwrap_or(f64::NAN),
                im: c.im.to_f64().unwrap_or(f64::NAN),
            })
            .collect()
    }

    pub fn from_records(n: usize, records: &[Record]) -> Result<Self> {
        let mut prev: Option<Key> = None;
        let mut terms = Vec::with_capacity(records.len());
        for r in records {
            if r.k.len() != n - 1 || r.alpha.len() != n - 1 {
                return Err(Error::DimensionMismatch {
                    left: n - 1,
                    right: r.k.len(),
                });
            }
            let key = Key::pack(&r.k, &r.alpha)?;
            if let Some(p) = prev {
                if key <= p {
                    return Err(Error::Format(
                        "records not strictly sorted by (k, alpha)".into(),
                    ));
                }
            }
            prev = Some(key);
            let c = Complex::new(
                T::from_f64(r.re).ok_or_else(|| Error::Format("bad re".into()))?,
                T::from_f64(r.im).ok_or_else(|| Error::Format("bad im".into()))?,
            );
            terms.push((r.k.clone(), r.alpha.clone(), c));
        }
        Self::from_terms(n, terms)
    }
}

impl<T: Scalar> PartialEq for TorusFn<T> {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.terms == other.terms
    }
}

impl<T: Scalar> fmt::Debug for TorusFn<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.slots();
        write!(f, "TorusFn(n={}", self.n)?;
        for (key, c) in &self.terms {
            write!(
                f,
                ", k={:?} a={:?}: {}{:+}i",
                key.k_vec(s),
                key.alpha_vec(s),
                c.re,
                c.im
            )?;
        }
        write!(f, ")")
    }
}

fn binomial(a: u32, p: u32) -> u64 {
    let p = p.min(a - p);
    let mut r = 1u64;
    for t in 0..p as u64 {
        r = r * (a as u64 - t) / (t + 1);
    }
    r
}

/// Zero-based slot of index `j` in `2..=n`.
pub(crate) fn slot(n: usize, j: usize) -> Result<usize> {
    if j < 2 || j > n {
        Err(Error::IndexOutOfRange { index: j, n })
    } else {
        Ok(j - 2)
    }
}
