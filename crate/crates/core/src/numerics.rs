//! Quadrature, Runge-Kutta stepping and small dense solves.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite Gauss-Legendre rule on `[0, 1]` with `nodes` points per panel;
/// the panel count doubles until successive values differ by less than `tol`.
pub fn integrate_unit<F>(f: F, nodes: usize, tol: f64, max_panels: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let (x, w) = gauss_legendre(nodes);
    let rule = |panels: usize| -> Result<f64> {
        let h = 1.0 / panels as f64;
        let mut acc = 0.0;
        for p in 0..panels {
            let a = p as f64 * h;
            let mut s = 0.0;
            for (xi, wi) in x.iter().zip(&w) {
                s += wi * f(a + 0.5 * h * (xi + 1.0))?;
            }
            acc += 0.5 * h * s;
        }
        Ok(acc)
    };
    let mut panels = 1;
    let mut prev = rule(panels)?;
    loop {
        panels *= 2;
        let next = rule(panels)?;
        if (next - prev).abs() < tol {
            return Ok(next);
        }
        if panels >= max_panels {
            return Err(Error::InvalidInput(format!(
                "quadrature did not settle below {tol:e} with {panels} panels"
            )));
        }
        prev = next;
    }
}

/// One classical RK4 step of `x' = f(x)`.
pub fn rk4_step<T, F>(f: &F, x: &[T], h: T) -> Result<Vec<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> Result<Vec<T>>,
{
    let half = h / T::lit(2.0);
    let k1 = f(x)?;
    let x2: Vec<T> = x.iter().zip(&k1).map(|(a, k)| *a + half * *k).collect();
    let k2 = f(&x2)?;
    let x3: Vec<T> = x.iter().zip(&k2).map(|(a, k)| *a + half * *k).collect();
    let k3 = f(&x3)?;
    let x4: Vec<T> = x.iter().zip(&k3).map(|(a, k)| *a + h * *k).collect();
    let k4 = f(&x4)?;
    let sixth = h / T::lit(6.0);
    Ok((0..x.len())
        .map(|i| x[i] + sixth * (k1[i] + T::lit(2.0) * (k2[i] + k3[i]) + k4[i]))
        .collect())
}

/// Integrates `x' = f(x)` over time `t` (any sign) with `steps` fixed RK4 steps.
pub fn rk4<T, F>(f: &F, x0: &[T], t: T, steps: usize) -> Result<Vec<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> Result<Vec<T>>,
{
    let h = t / T::lit(steps.max(1) as f64);
    let mut x = x0.to_vec();
    for _ in 0..steps.max(1) {
        x = rk4_step(f, &x, h)?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::FlowDivergence("non-finite state".into()));
        }
    }
    Ok(x)
}

/// Solves `a x = b` by LU; `None` when singular.
pub fn solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    a.clone().lu().solve(b)
}

/// Distance on the circle `R/Z`.
pub fn circle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(32);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(62)).sum();
        assert!((m - 2.0 / 63.0).abs() < 1e-14);
        let (x5, w5) = gauss_legendre(5);
        let m5: f64 = x5.iter().zip(&w5).map(|(x, w)| w * x.powi(8)).sum();
        assert!((m5 - 2.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn composite_rule_converges() {
        let v = integrate_unit(|s| Ok((2.0 * std::f64::consts::PI * 3.0 * s).cos() * s), 32, 1e-12, 64).unwrap();
        assert!(v.abs() < 1e-13);
    }

    #[test]
    fn rk4_rotation() {
        let f = |x: &[f64]| Ok(vec![-x[1], x[0]]);
        let tau = 2.0 * std::f64::consts::PI;
        let y = rk4(&f, &[1.0, 0.0], tau, 2000).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-9 && y[1].abs() < 1e-9);
        let y32 = rk4(&|x: &[f32]| Ok(vec![-x[1], x[0]]), &[1.0f32, 0.0], 1.0, 50).unwrap();
        assert!((y32[0] - 1f32.cos()).abs() < 1e-5);
    }
}
