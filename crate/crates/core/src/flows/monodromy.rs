//! Continuation of period lattices along base paths.
//!
//! On each fibre the lattice has the circle generator `(2 pi, 0, .., 0)`; the
//! other generators are found on the reduced torus `mu^{-1}(b_1) / S^1`,
//! whose angles are `arg w_j`. Times `tbar` make the flow of
//! `sum_k tbar_k f_k` advance `arg w` by `2 pi e_j`, and the first entry is
//! `t_1 = 2 pi w - dpsi`, where `dpsi` is the unwrapped drift of a circle
//! angle along that flow and the integer `w` is carried by continuity.
//! Plus-side fibres measure `psi = arg z_1`, minus-side fibres `-arg z_2`.

use std::f64::consts::{PI, TAU};
use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;
use rayon::prelude::*;
use serde::Serialize;

use super::{discrepancy, ham_field, rk4_complex, Combination};
use crate::error::{Error, Result};
use crate::numerics::solve;
use crate::zoo::{ExampleFibration, Side};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum BasePath {
    /// `center + r cos(2 pi s) e_p + r sin(2 pi s) e_q` (0-based axes).
    Circle {
        center: Vec<f64>,
        axes: (usize, usize),
        radius: f64,
    },
    /// Straight segments, parametrized by arc length.
    Polyline(Vec<Vec<f64>>),
}

impl BasePath {
    pub fn point(&self, s: f64) -> Vec<f64> {
        match self {
            BasePath::Circle { center, axes, radius } => {
                let mut b = center.clone();
                b[axes.0] += radius * (TAU * s).cos();
                b[axes.1] += radius * (TAU * s).sin();
                b
            }
            BasePath::Polyline(pts) => {
                let lens: Vec<f64> = pts.windows(2).map(|w| dist(&w[0], &w[1])).collect();
                let total: f64 = lens.iter().sum();
                if total == 0.0 {
                    return pts[0].clone();
                }
                let mut target = s.clamp(0.0, 1.0) * total;
                for (i, l) in lens.iter().enumerate() {
                    if target <= *l || i + 1 == lens.len() {
                        let u = if *l > 0.0 { (target / l).min(1.0) } else { 0.0 };
                        return pts[i].iter().zip(&pts[i + 1]).map(|(a, b)| a + u * (b - a)).collect();
                    }
                    target -= l;
                }
                unreachable!()
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            BasePath::Circle { center, .. } => center.len(),
            BasePath::Polyline(p) => p.first().map_or(0, |b| b.len()),
        }
    }

    /// Polyline corners as parameter values, so they are sampled exactly.
    fn corners(&self) -> Vec<f64> {
        match self {
            BasePath::Circle { .. } => vec![],
            BasePath::Polyline(pts) => {
                let lens: Vec<f64> = pts.windows(2).map(|w| dist(&w[0], &w[1])).collect();
                let total: f64 = lens.iter().sum();
                let mut acc = 0.0;
                let mut out = vec![];
                for l in &lens[..lens.len().saturating_sub(1)] {
                    acc += l;
                    if total > 0.0 {
                        out.push(acc / total);
                    }
                }
                out
            }
        }
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContinuationOptions {
    /// Base points per path before refinement.
    pub samples: usize,
    /// RK4 steps per reduced flow.
    pub steps: usize,
    pub newton_tol: f64,
    pub max_refine: usize,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        ContinuationOptions {
            samples: 64,
            steps: 400,
            newton_tol: 1e-11,
            max_refine: 6,
        }
    }
}

fn wrap(a: f64) -> f64 {
    a - TAU * ((a + PI) / TAU).floor()
}

#[derive(Clone, Debug)]
struct FlowOut {
    dphi: Vec<f64>,
    /// Unwrapped drift of `arg z_1` and of `-arg z_2`, when defined.
    dpsi: [Option<f64>; 2],
    integral: Option<f64>,
}

fn psi_index(side: Side) -> usize {
    match side {
        Side::Minus => 1,
        _ => 0,
    }
}

fn reduced_flow(ex: &ExampleFibration, z0: &[C], side: Side, tbar: &[f64], steps: usize, integral: bool) -> Result<FlowOut> {
    let mut coeffs = vec![0.0; ex.n];
    coeffs[1..].copy_from_slice(tbar);
    let h = Combination { example: ex, coeffs, side };
    let field = |z: &[C]| ham_field(&h, z);
    let dt = 1.0 / steps as f64;
    let angles = |z: &[C]| -> Result<(Vec<f64>, [Option<f64>; 2])> {
        let phi = ex.w_values(z, side)?.iter().map(|w| w.arg()).collect();
        let p1 = (z[0].norm() > 1e-7).then(|| z[0].arg());
        let p2 = (z[1].norm() > 1e-7).then(|| -z[1].arg());
        Ok((phi, [p1, p2]))
    };
    let coef_a = |z: &[C]| -> Result<f64> {
        let d = discrepancy(ex, z)?;
        Ok(d.a.iter().zip(tbar).map(|(a, t)| a * t).sum())
    };
    let mut z = z0.to_vec();
    let (mut phi, mut psi) = angles(&z)?;
    let mut dphi = vec![0.0; ex.n - 1];
    let mut dpsi = [Some(0.0), Some(0.0)];
    for (d, p) in dpsi.iter_mut().zip(&psi) {
        if p.is_none() {
            *d = None;
        }
    }
    let mut avals = Vec::new();
    if integral {
        avals.push(coef_a(&z)?);
    }
    for _ in 0..steps {
        z = rk4_complex(&field, &z, dt)?;
        let (nphi, npsi) = angles(&z)?;
        for i in 0..dphi.len() {
            dphi[i] += wrap(nphi[i] - phi[i]);
        }
        for k in 0..2 {
            dpsi[k] = match (dpsi[k], psi[k], npsi[k]) {
                (Some(d), Some(a), Some(b)) => Some(d + wrap(b - a)),
                _ => None,
            };
        }
        phi = nphi;
        psi = npsi;
        if integral {
            avals.push(coef_a(&z)?);
        }
    }
    let integral = integral.then(|| simpson(&avals, dt));
    Ok(FlowOut { dphi, dpsi, integral })
}

fn simpson(v: &[f64], h: f64) -> f64 {
    let m = v.len() - 1;
    if m % 2 == 1 {
        // trapezoid on the last interval keeps odd counts usable
        return simpson(&v[..m], h) + 0.5 * h * (v[m - 1] + v[m]);
    }
    let mut s = v[0] + v[m];
    for (i, x) in v.iter().enumerate().take(m).skip(1) {
        s += if i % 2 == 1 { 4.0 * x } else { 2.0 * x };
    }
    s * h / 3.0
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Reduced times for generator `j` (2-based), seeded by `seed` or by the
/// instantaneous angular rates when `seed` is `None`.
fn return_search(
    ex: &ExampleFibration,
    z0: &[C],
    side: Side,
    j: usize,
    seed: Option<&[f64]>,
    opts: &ContinuationOptions,
) -> Result<(Vec<f64>, FlowOut)> {
    let m = ex.n - 1;
    let mut target = vec![0.0; m];
    target[j - 2] = TAU;
    let resid = |t: &[f64]| -> Result<(Vec<f64>, FlowOut)> {
        let out = reduced_flow(ex, z0, side, t, opts.steps, false)?;
        Ok((out.dphi.iter().zip(&target).map(|(a, b)| a - b).collect(), out))
    };
    let mut t = match seed {
        Some(s) => s.to_vec(),
        None => {
            let h = 1e-4;
            let mut rates = DMatrix::zeros(m, m);
            for k in 0..m {
                let mut e = vec![0.0; m];
                e[k] = h;
                let d = reduced_flow(ex, z0, side, &e, 8, false)?.dphi;
                for i in 0..m {
                    rates[(i, k)] = d[i] / h;
                }
            }
            let rhs = DVector::from_vec(target.clone());
            solve(&rates, &rhs)
                .ok_or_else(|| Error::ReturnSearchFailed("degenerate angular rates".into()))?
                .as_slice()
                .to_vec()
        }
    };
    let (mut f, mut out) = resid(&t)?;
    for _ in 0..40 {
        if norm(&f) < opts.newton_tol {
            return Ok((t, out));
        }
        let mut jac = DMatrix::zeros(m, m);
        for k in 0..m {
            let h = 1e-7 * t[k].abs().max(1.0);
            let mut tk = t.clone();
            tk[k] += h;
            let (fk, _) = resid(&tk)?;
            for i in 0..m {
                jac[(i, k)] = (fk[i] - f[i]) / h;
            }
        }
        let step = solve(&jac, &DVector::from_iterator(m, f.iter().map(|x| -x)))
            .ok_or_else(|| Error::ReturnSearchFailed("singular return Jacobian".into()))?;
        let mut lam = 1.0;
        loop {
            let cand: Vec<f64> = t.iter().zip(step.iter()).map(|(a, d)| a + lam * d).collect();
            let (fc, oc) = resid(&cand)?;
            if norm(&fc) < norm(&f) || lam < 1e-3 {
                t = cand;
                f = fc;
                out = oc;
                break;
            }
            lam *= 0.5;
        }
    }
    if norm(&f) < 1e3 * opts.newton_tol {
        return Ok((t, out));
    }
    Err(Error::ReturnSearchFailed(format!("residual {:e} for generator {j}", norm(&f))))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
struct Generator {
    tbar: Vec<f64>,
    w: f64,
    t1: f64,
}

impl Generator {
    fn full(&self) -> Vec<f64> {
        let mut v = vec![self.t1];
        v.extend_from_slice(&self.tbar);
        v
    }
}

fn strict_side(b: &[f64]) -> Option<Side> {
    if b[0] > 0.0 {
        Some(Side::Plus)
    } else if b[0] < 0.0 {
        Some(Side::Minus)
    } else {
        None
    }
}

struct Tracker<'a> {
    ex: &'a ExampleFibration,
    opts: &'a ContinuationOptions,
    fields: Side,
    psi: Side,
    gens: Vec<Generator>,
    last_b: Vec<f64>,
    snap_error: f64,
    visits: usize,
}

impl<'a> Tracker<'a> {
    fn solve(&self, b: &[f64], fields: Side, seeds: Option<&[Generator]>) -> Result<Vec<(Vec<f64>, FlowOut)>> {
        let z0 = self.ex.fibre_point(b)?;
        (2..=self.ex.n)
            .into_par_iter()
            .map(|j| {
                let seed = seeds.map(|g| g[j - 2].tbar.as_slice());
                return_search(self.ex, &z0, fields, j, seed, self.opts)
            })
            .collect()
    }

    fn dpsi(out: &FlowOut, psi: Side) -> Result<f64> {
        out.dpsi[psi_index(psi)]
            .ok_or_else(|| Error::ContinuationLost("circle angle undefined along the flow".into()))
    }

    fn start(ex: &'a ExampleFibration, opts: &'a ContinuationOptions, b: &[f64], fields: Side, psi: Side) -> Result<Self> {
        let mut t = Tracker {
            ex,
            opts,
            fields,
            psi,
            gens: vec![],
            last_b: b.to_vec(),
            snap_error: 0.0,
            visits: 1,
        };
        for (tbar, out) in t.solve(b, fields, None)? {
            let t1 = -Self::dpsi(&out, psi)?;
            t.gens.push(Generator { tbar, w: 0.0, t1 });
        }
        Ok(t)
    }

    /// Re-solve at the current (seam) point with new fields and circle angle.
    fn switch(&mut self, fields: Side, psi: Side) -> Result<()> {
        if fields == self.fields && psi == self.psi {
            return Ok(());
        }
        if self.last_b[0] != 0.0 {
            return Err(Error::ContinuationLost("side change away from the seam".into()));
        }
        let b = self.last_b.clone();
        let solved = self.solve(&b, fields, Some(&self.gens))?;
        for (g, (tbar, out)) in self.gens.iter_mut().zip(solved) {
            let t1 = TAU * g.w - Self::dpsi(&out, self.psi)?;
            let w = (t1 + Self::dpsi(&out, psi)?) / TAU;
            self.snap_error = self.snap_error.max((w - w.round()).abs());
            g.w = w.round();
            g.t1 = TAU * g.w - Self::dpsi(&out, psi)?;
            g.tbar = tbar;
        }
        self.fields = fields;
        self.psi = psi;
        Ok(())
    }

    /// Returns the generators as they stood after any side switch.
    fn visit(&mut self, b: &[f64]) -> Result<Vec<Generator>> {
        if let Some(s) = strict_side(b) {
            self.switch(s, s)?;
        }
        let baseline = self.gens.clone();
        let solved = self.solve(b, self.fields, Some(&self.gens))?;
        for (g, (tbar, out)) in self.gens.iter_mut().zip(solved) {
            g.t1 = TAU * g.w - Self::dpsi(&out, self.psi)?;
            g.tbar = tbar;
        }
        self.last_b = b.to_vec();
        self.visits += 1;
        Ok(baseline)
    }

    fn change(&self, before: &[Generator]) -> f64 {
        before
            .iter()
            .zip(&self.gens)
            .map(|(a, b)| {
                let (x, y) = (a.full(), b.full());
                let d: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p - q).collect();
                norm(&d) / norm(&x).max(1e-12)
            })
            .fold(0.0, f64::max)
    }

    fn advance(&mut self, path: &BasePath, sa: f64, sb: f64, depth: usize) -> Result<()> {
        let bb = path.point(sb);
        if let (Some(x), Some(y)) = (strict_side(&self.last_b), strict_side(&bb)) {
            if x != y {
                let (mut lo, mut hi) = (sa, sb);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if strict_side(&path.point(mid)) == Some(x) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let sc = 0.5 * (lo + hi);
                self.advance_to(path, sa, sc, depth, true)?;
                return self.advance(path, sc, sb, depth);
            }
        }
        self.advance_to(path, sa, sb, depth, false)
    }

    fn advance_to(&mut self, path: &BasePath, sa: f64, sb: f64, depth: usize, seam: bool) -> Result<()> {
        let mut b = path.point(sb);
        if seam || b[0].abs() < 1e-14 {
            b[0] = 0.0;
        }
        let saved = (self.gens.clone(), self.fields, self.psi, self.last_b.clone(), self.snap_error);
        let res = self.visit(&b);
        let bad = match &res {
            Ok(baseline) => self.change(baseline) > 0.1,
            Err(Error::ReturnSearchFailed(_)) => true,
            Err(e) => return Err(e.clone()),
        };
        if !bad {
            return Ok(());
        }
        if depth >= self.opts.max_refine {
            return match res {
                Err(e) => Err(Error::ContinuationLost(e.to_string())),
                Ok(_) => Err(Error::ContinuationLost(format!("lattice jumps near s = {sb}"))),
            };
        }
        (self.gens, self.fields, self.psi, self.last_b, self.snap_error) = saved;
        let mid = 0.5 * (sa + sb);
        self.advance(path, sa, mid, depth + 1)?;
        if seam {
            self.advance_to(path, mid, sb, depth + 1, true)
        } else {
            self.advance(path, mid, sb, depth + 1)
        }
    }

    fn walk(&mut self, path: &BasePath) -> Result<()> {
        let mut stops: Vec<f64> = (1..=self.opts.samples).map(|i| i as f64 / self.opts.samples as f64).collect();
        stops.extend(path.corners());
        stops.sort_by(|a, b| a.total_cmp(b));
        stops.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let mut s = 0.0;
        for t in stops {
            self.advance(path, s, t, 0)?;
            s = t;
        }
        Ok(())
    }
}

/// An integer matrix in column convention: column `i` is the image of basis
/// vector `i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MonodromyMatrix {
    pub rows: Vec<Vec<i64>>,
}

impl MonodromyMatrix {
    pub fn identity(n: usize) -> Self {
        MonodromyMatrix {
            rows: (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.n())
    }

    pub fn determinant(&self) -> i64 {
        let n = self.n();
        let m = DMatrix::from_fn(n, n, |i, j| self.rows[i][j] as f64);
        m.determinant().round() as i64
    }

    /// Whether the first basis vector (the circle class) is fixed.
    pub fn fixes_circle(&self) -> bool {
        (0..self.n()).all(|i| self.rows[i][0] == i64::from(i == 0))
    }
}

impl fmt::Display for MonodromyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows
            .iter()
            .map(|r| format!("[{}]", r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "[{}]", rows.join(","))
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Whether a 2x2 matrix is conjugate in `GL(2, Z)` to `[[1,1],[0,1]]`.
pub fn conjugate_to_unit_shear(m: &MonodromyMatrix) -> bool {
    if m.n() != 2 || m.determinant() != 1 || m.rows[0][0] + m.rows[1][1] != 2 || m.is_identity() {
        return false;
    }
    // unipotent: the class is fixed by the content of M - I
    let d = [m.rows[0][0] - 1, m.rows[0][1], m.rows[1][0], m.rows[1][1] - 1];
    d.iter().fold(0, |g, x| gcd(g, *x)) == 1
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonodromyResult {
    pub matrix: MonodromyMatrix,
    /// Unsnapped shifts of the circle coefficient, one per generator.
    pub raw: Vec<f64>,
    pub snap_error: f64,
    /// Start lattice rows in units of `2 pi`, circle generator first.
    pub start_lattice: Vec<Vec<f64>>,
    pub samples: usize,
}

/// Monodromy of the period lattice along a closed path that starts off the seam.
pub fn monodromy(ex: &ExampleFibration, path: &BasePath, opts: &ContinuationOptions) -> Result<MonodromyResult> {
    if path.dim() != ex.n {
        return Err(Error::DimensionMismatch {
            left: ex.n,
            right: path.dim(),
        });
    }
    let b0 = path.point(0.0);
    if dist(&b0, &path.point(1.0)) > 1e-12 {
        return Err(Error::InvalidInput("monodromy path must be closed".into()));
    }
    let side = strict_side(&b0).ok_or_else(|| Error::InvalidInput("loop must start off the seam".into()))?;
    let mut tr = Tracker::start(ex, opts, &b0, side, side)?;
    let start = tr.gens.clone();
    tr.walk(path)?;
    let mut raw = Vec::with_capacity(ex.n - 1);
    let mut snap = tr.snap_error;
    for (a, b) in start.iter().zip(&tr.gens) {
        let d: Vec<f64> = a.tbar.iter().zip(&b.tbar).map(|(x, y)| x - y).collect();
        if norm(&d) > 1e-6 * norm(&a.tbar).max(1.0) {
            return Err(Error::ContinuationLost("reduced lattice did not close up".into()));
        }
        let k = (b.t1 - a.t1) / TAU;
        snap = snap.max((k - k.round()).abs());
        raw.push(k);
    }
    let mut matrix = MonodromyMatrix::identity(ex.n);
    for (i, k) in raw.iter().enumerate() {
        matrix.rows[0][i + 1] = k.round() as i64;
    }
    let mut start_lattice = vec![{
        let mut e = vec![0.0; ex.n];
        e[0] = 1.0;
        e
    }];
    start_lattice.extend(start.iter().map(|g| g.full().iter().map(|x| x / TAU).collect()));
    Ok(MonodromyResult {
        matrix,
        raw,
        snap_error: snap,
        start_lattice,
        samples: tr.visits,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CohomologyJump {
    /// `(t_1^+ - t_1^- + I) / 2 pi`.
    pub value: f64,
    pub snapped: i64,
    pub snap_error: f64,
    pub t1_plus: f64,
    pub t1_minus: f64,
    /// `I = int_0^1 sum_k tbar_k a_k`, accumulated along the traced cycle.
    pub integral: f64,
}

/// Compare generator `cycle` continued from the reference seam component to
/// `component` through the plus side and through the minus side.
pub fn cohomology_jump(
    ex: &ExampleFibration,
    component: usize,
    cycle: usize,
    opts: &ContinuationOptions,
) -> Result<CohomologyJump> {
    if cycle < 2 || cycle > ex.n {
        return Err(Error::IndexOutOfRange { index: cycle, n: ex.n });
    }
    let target = ex
        .seam_reference
        .get(component)
        .ok_or_else(|| Error::InvalidInput(format!("seam component {component} does not exist")))?;
    let reference = &ex.seam_reference[0];
    let delta = 0.5;
    let mut ends = vec![];
    for (side, sign) in [(Side::Plus, 1.0), (Side::Minus, -1.0)] {
        let lift = |b: &Vec<f64>| {
            let mut c = b.clone();
            c[0] += sign * delta;
            c
        };
        let path = BasePath::Polyline(vec![reference.clone(), lift(reference), lift(target), target.clone()]);
        let mut tr = Tracker::start(ex, opts, reference, side, Side::Plus)?;
        tr.walk(&path)?;
        tr.switch(side, Side::Plus)?;
        ends.push((tr.gens[cycle - 2].clone(), tr.snap_error));
    }
    let (gp, sp) = &ends[0];
    let (gm, sm) = &ends[1];
    let z0 = ex.fibre_point(target)?;
    let integral = reduced_flow(ex, &z0, Side::Minus, &gm.tbar, opts.steps, true)?
        .integral
        .expect("integral requested");
    let value = (gp.t1 - gm.t1 + integral) / TAU;
    Ok(CohomologyJump {
        value,
        snapped: value.round() as i64,
        snap_error: (value - value.round()).abs().max(*sp).max(*sm),
        t1_plus: gp.t1,
        t1_minus: gm.t1,
        integral,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_shear_conjugacy() {
        let m = |r: [[i64; 2]; 2]| MonodromyMatrix {
            rows: r.iter().map(|x| x.to_vec()).collect(),
        };
        assert!(conjugate_to_unit_shear(&m([[1, 1], [0, 1]])));
        assert!(conjugate_to_unit_shear(&m([[1, -1], [0, 1]])));
        assert!(conjugate_to_unit_shear(&m([[2, -1], [1, 0]])));
        assert!(!conjugate_to_unit_shear(&m([[1, 2], [0, 1]])));
        assert!(!conjugate_to_unit_shear(&m([[1, 0], [0, 1]])));
        assert_eq!(m([[1, 1], [0, 1]]).to_string(), "[[1,1],[0,1]]");
    }

    #[test]
    fn polyline_hits_corners() {
        let p = BasePath::Polyline(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 3.0]]);
        assert_eq!(p.corners(), vec![0.25]);
        assert_eq!(p.point(0.25), vec![1.0, 0.0]);
        assert_eq!(p.point(1.0), vec![1.0, 3.0]);
    }

    #[test]
    fn simpson_is_exact_on_cubics() {
        let v: Vec<f64> = (0..=10).map(|i| (i as f64 / 10.0).powi(3)).collect();
        assert!((simpson(&v, 0.1) - 0.25).abs() < 1e-15);
    }
}
