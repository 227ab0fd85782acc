use num_complex::Complex64 as C;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::zoo::{self, ExampleFibration, Side};

/// `omega(u, v)` for `omega = sum dx_k ^ dy_k`.
pub fn omega(u: &[C], v: &[C]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a.conj() * b).im).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Discrepancy {
    /// `a_2..a_n`.
    pub a: Vec<f64>,
    /// Norm of the part of `eta_j^+ - eta_j^-` orthogonal to `eta_1`.
    pub residual: Vec<f64>,
}

impl Discrepancy {
    pub fn max_residual(&self) -> f64 {
        self.residual.iter().copied().fold(0.0, f64::max)
    }
}

/// Least-squares `a_j` with `eta_j^+ - eta_j^- = a_j eta_1` at a seam point.
pub fn discrepancy(ex: &ExampleFibration, z: &[C]) -> Result<Discrepancy> {
    let scale = 1.0 + z.iter().map(|c| c.norm_sqr()).sum::<f64>();
    if zoo::mu(z).abs() > 1e-8 * scale {
        return Err(Error::InvalidInput(format!("point is off the seam (mu = {:e})", zoo::mu(z))));
    }
    let field = |j, side| -> Result<Vec<C>> {
        Ok(ex.grad_bar(j, z, side)?.into_iter().map(|g| C::new(0.0, 2.0) * g).collect())
    };
    let eta1 = field(1, Side::Plus)?;
    let n1: f64 = eta1.iter().map(|c| c.norm_sqr()).sum();
    if n1.sqrt() < 1e-12 {
        return Err(Error::SingularPoint("the circle field vanishes".into()));
    }
    let mut out = Discrepancy {
        a: Vec::with_capacity(ex.n - 1),
        residual: Vec::with_capacity(ex.n - 1),
    };
    for j in 2..=ex.n {
        let d: Vec<C> = field(j, Side::Plus)?
            .into_iter()
            .zip(field(j, Side::Minus)?)
            .map(|(p, m)| p - m)
            .collect();
        let a = d.iter().zip(&eta1).map(|(x, e)| (x.conj() * e).re).sum::<f64>() / n1;
        let r = d.iter().zip(&eta1).map(|(x, e)| (x - a * e).norm_sqr()).sum::<f64>().sqrt();
        out.a.push(a);
        out.residual.push(r);
    }
    Ok(out)
}

/// `max_j |f_j(e^{i theta} z) - f_j(z)|`.
pub fn invariance_error(ex: &ExampleFibration, z: &[C], theta: f64) -> Result<f64> {
    let f = ex.eval(z)?;
    let g = ex.eval(&zoo::act(theta, z))?;
    Ok(f.iter().zip(&g).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

pub fn invariance_check(ex: &ExampleFibration, z: &[C], theta: f64) -> Result<bool> {
    Ok(invariance_error(ex, z, theta)? <= 1e-10)
}
