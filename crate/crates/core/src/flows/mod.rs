//! Hamiltonian vector fields and flows on `C^n = R^{2n}`.
//!
//! Fields follow `z'_k = 2i dH/dzbar_k`, so the flow of
//! `mu = (|z_1|^2 - |z_2|^2) / 2` is `(e^{it} z_1, e^{-it} z_2)` and has period
//! `2 pi`.

mod discrepancy;
mod monodromy;

pub use discrepancy::{discrepancy, invariance_check, invariance_error, omega, Discrepancy};
pub use monodromy::{
    cohomology_jump, conjugate_to_unit_shear, monodromy, BasePath, CohomologyJump, ContinuationOptions,
    MonodromyMatrix, MonodromyResult,
};

use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64 as C;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::zoo::{ExampleFibration, Side};

/// A point of `C^n` stored as `x_1, y_1, .., x_n, y_n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhasePoint {
    reals: Vec<f64>,
}

impl PhasePoint {
    pub fn new(reals: Vec<f64>) -> Result<Self> {
        if !reals.len().is_multiple_of(2) || reals.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("phase point needs 2n finite reals".into()));
        }
        Ok(PhasePoint { reals })
    }

    pub fn from_complex(z: &[C]) -> Result<Self> {
        Self::new(z.iter().flat_map(|c| [c.re, c.im]).collect())
    }

    pub fn n(&self) -> usize {
        self.reals.len() / 2
    }

    pub fn z(&self, k: usize) -> C {
        C::new(self.reals[2 * k], self.reals[2 * k + 1])
    }

    pub fn to_complex(&self) -> Vec<C> {
        (0..self.n()).map(|k| self.z(k)).collect()
    }

    pub fn reals(&self) -> &[f64] {
        &self.reals
    }
}

/// A real function on `C^n`.
pub trait ScalarField: Send + Sync {
    fn value(&self, z: &[C]) -> Result<f64>;

    /// `dH/dzbar_k = (H_{x_k} + i H_{y_k}) / 2`. Central differences unless overridden.
    fn grad_bar(&self, z: &[C]) -> Result<Vec<C>> {
        fd_grad_bar(self, z, 1e-6)
    }

    fn side(&self) -> Side {
        Side::Global
    }
}

pub fn fd_grad_bar<H: ScalarField + ?Sized>(h: &H, z: &[C], step: f64) -> Result<Vec<C>> {
    let mut out = Vec::with_capacity(z.len());
    let mut w = z.to_vec();
    for k in 0..z.len() {
        let mut part = [0.0; 2];
        for (p, dir) in part.iter_mut().zip([C::new(step, 0.0), C::new(0.0, step)]) {
            w[k] = z[k] + dir;
            let fp = h.value(&w)?;
            w[k] = z[k] - dir;
            let fm = h.value(&w)?;
            w[k] = z[k];
            *p = (fp - fm) / (2.0 * step);
        }
        out.push(0.5 * C::new(part[0], part[1]));
    }
    Ok(out)
}

type ValueFn = dyn Fn(&[C]) -> Result<f64> + Send + Sync;
type GradFn = dyn Fn(&[C]) -> Result<Vec<C>> + Send + Sync;

/// A field from closures, with an optional analytic gradient.
#[derive(Clone)]
pub struct FnField {
    value: Arc<ValueFn>,
    grad: Option<Arc<GradFn>>,
    side: Side,
}

impl FnField {
    pub fn new(value: impl Fn(&[C]) -> Result<f64> + Send + Sync + 'static) -> Self {
        FnField {
            value: Arc::new(value),
            grad: None,
            side: Side::Global,
        }
    }

    pub fn with_grad(mut self, grad: impl Fn(&[C]) -> Result<Vec<C>> + Send + Sync + 'static) -> Self {
        self.grad = Some(Arc::new(grad));
        self
    }

    pub fn with_side(mut self, side: Side) -> Self {
        self.side = side;
        self
    }
}

impl ScalarField for FnField {
    fn value(&self, z: &[C]) -> Result<f64> {
        (self.value)(z)
    }

    fn grad_bar(&self, z: &[C]) -> Result<Vec<C>> {
        match &self.grad {
            Some(g) => g(z),
            None => fd_grad_bar(self, z, 1e-6),
        }
    }

    fn side(&self) -> Side {
        self.side
    }
}

/// `sum_j c_j f_j` for an example on one branch; `c_1` multiplies `mu`.
#[derive(Clone, Debug)]
pub struct Combination<'a> {
    pub example: &'a ExampleFibration,
    pub coeffs: Vec<f64>,
    pub side: Side,
}

impl<'a> Combination<'a> {
    pub fn component(example: &'a ExampleFibration, j: usize, side: Side) -> Self {
        let mut coeffs = vec![0.0; example.n];
        coeffs[j - 1] = 1.0;
        Combination { example, coeffs, side }
    }
}

impl ScalarField for Combination<'_> {
    fn value(&self, z: &[C]) -> Result<f64> {
        let f = self.example.eval_side(z, self.side)?;
        Ok(f.iter().zip(&self.coeffs).map(|(a, b)| a * b).sum())
    }

    fn grad_bar(&self, z: &[C]) -> Result<Vec<C>> {
        let mut out = vec![C::new(0.0, 0.0); z.len()];
        for (j, &c) in self.coeffs.iter().enumerate() {
            if c != 0.0 {
                let g = self.example.grad_bar(j + 1, z, self.side)?;
                for (o, gk) in out.iter_mut().zip(g) {
                    *o += c * gk;
                }
            }
        }
        Ok(out)
    }

    fn side(&self) -> Side {
        self.side
    }
}

/// The Hamiltonian vector field of `h` at `z`, as complex velocities.
pub fn ham_field<H: ScalarField + ?Sized>(h: &H, z: &[C]) -> Result<Vec<C>> {
    Ok(h.grad_bar(z)?.into_iter().map(|g| C::new(0.0, 2.0) * g).collect())
}

pub(crate) fn rk4_complex<F>(f: &F, z: &[C], dt: f64) -> Result<Vec<C>>
where
    F: Fn(&[C]) -> Result<Vec<C>>,
{
    let axpy = |a: &[C], k: &[C], s: f64| -> Vec<C> { a.iter().zip(k).map(|(x, y)| x + y * s).collect() };
    let k1 = f(z)?;
    let k2 = f(&axpy(z, &k1, 0.5 * dt))?;
    let k3 = f(&axpy(z, &k2, 0.5 * dt))?;
    let k4 = f(&axpy(z, &k3, dt))?;
    let out: Vec<C> = (0..z.len())
        .map(|i| z[i] + (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (dt / 6.0))
        .collect();
    if out.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::FlowDivergence("non-finite state".into()));
    }
    Ok(out)
}

/// Allowed drift of `H` per unit time.
pub const DRIFT_LIMIT: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<Vec<C>>,
    pub energies: Vec<f64>,
    /// Step count actually used after any halving.
    pub steps: usize,
}

impl Trajectory {
    pub fn end(&self) -> &[C] {
        self.points.last().expect("trajectory has at least one point")
    }

    pub fn max_drift(&self) -> f64 {
        let h0 = self.energies[0];
        self.energies.iter().map(|h| (h - h0).abs()).fold(0.0, f64::max)
    }

    /// `t, x_1, y_1, .., x_n, y_n, H` per line.
    pub fn to_csv(&self) -> String {
        let n = self.points.first().map_or(0, |p| p.len());
        let mut s = String::from("t");
        for k in 1..=n {
            let _ = write!(s, ",x{k},y{k}");
        }
        s.push_str(",H\n");
        for ((t, p), h) in self.times.iter().zip(&self.points).zip(&self.energies) {
            let _ = write!(s, "{t:.17e}");
            for c in p {
                let _ = write!(s, ",{:.17e},{:.17e}", c.re, c.im);
            }
            let _ = writeln!(s, ",{h:.17e}");
        }
        s
    }
}

/// Fixed-step RK4 for time `t`; the step count doubles until the drift of `H`
/// is within `DRIFT_LIMIT` per unit time.
pub fn integrate<H: ScalarField + ?Sized>(h: &H, z0: &[C], t: f64, steps: usize) -> Result<Trajectory> {
    if steps == 0 || !t.is_finite() {
        return Err(Error::InvalidInput("integrate needs steps > 0 and finite time".into()));
    }
    let limit = DRIFT_LIMIT * t.abs().max(1.0);
    let mut steps = steps;
    let mut last = 0.0;
    for _ in 0..8 {
        let dt = t / steps as f64;
        let field = |z: &[C]| ham_field(h, z);
        let mut z = z0.to_vec();
        let mut tr = Trajectory {
            times: vec![0.0],
            points: vec![z.clone()],
            energies: vec![h.value(&z)?],
            steps,
        };
        for i in 1..=steps {
            z = rk4_complex(&field, &z, dt)?;
            tr.times.push(dt * i as f64);
            tr.energies.push(h.value(&z)?);
            tr.points.push(z.clone());
        }
        last = tr.max_drift();
        if last <= limit {
            return Ok(tr);
        }
        steps *= 2;
    }
    Err(Error::DriftExceeded {
        drift: last / t.abs().max(1.0),
        limit: DRIFT_LIMIT,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::{self, make};

    #[test]
    fn moment_flow_rotates_forward() {
        let ex = make("focus_focus").unwrap();
        let mu = Combination::component(&ex, 1, Side::Global);
        let z = vec![C::new(1.0, 0.0), C::new(0.5, 0.0)];
        let v = ham_field(&mu, &z).unwrap();
        assert!((v[0] - C::new(0.0, 1.0)).norm() < 1e-15);
        assert!((v[1] - C::new(0.0, -0.5)).norm() < 1e-15);
        let tr = integrate(&mu, &z, std::f64::consts::TAU, 2000).unwrap();
        assert!((tr.end()[0] - z[0]).norm() < 1e-10 && (tr.end()[1] - z[1]).norm() < 1e-10);
        let quarter = integrate(&mu, &z, std::f64::consts::FRAC_PI_2, 500).unwrap();
        assert!((quarter.end()[0] - C::new(0.0, 1.0)).norm() < 1e-10);
        assert_eq!(zoo::mu(&z), 0.375);
    }

    #[test]
    fn linear_and_constant_fields() {
        let x1 = FnField::new(|z: &[C]| Ok(z[0].re));
        let v = ham_field(&x1, &[C::new(0.3, 0.1)]).unwrap();
        assert!((v[0] - C::new(0.0, 1.0)).norm() < 1e-9);
        let c = FnField::new(|_: &[C]| Ok(2.0)).with_grad(|z: &[C]| Ok(vec![C::new(0.0, 0.0); z.len()]));
        let tr = integrate(&c, &[C::new(0.3, 0.1)], 1.0, 10).unwrap();
        assert_eq!(tr.end(), &[C::new(0.3, 0.1)]);
        let csv = tr.to_csv();
        assert!(csv.starts_with("t,x1,y1,H\n"));
        assert_eq!(csv.lines().count(), 12);
    }

    #[test]
    fn phase_point_round_trip() {
        let z = vec![C::new(1.0, -2.0), C::new(0.5, 0.25)];
        let p = PhasePoint::from_complex(&z).unwrap();
        assert_eq!(p.reals(), &[1.0, -2.0, 0.5, 0.25]);
        assert_eq!(p.to_complex(), z);
        assert!(PhasePoint::new(vec![f64::NAN, 0.0]).is_err());
    }
}
