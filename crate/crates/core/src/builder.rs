//! Numerical fibrations realizing a truncated invariant sequence.
//!
//! Given `a_j(r, b, y) = sum_k a_{j,k}(b, y) r^k`, the fibration is
//! `u(b', y') = (b_1', b)` where `b` solves `b + a(b_1', b, y') = (b_2'..b_n')`.
//! Phase points are written `(b_1..b_n, y_1..y_n)` with `omega = sum db ^ dy`
//! and Hamiltonian fields `X_H = sum d_{b_k}H d_{y_k} - d_{y_k}H d_{b_k}`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::calculus::{ell_to_s, EllSequence};
use crate::error::{Error, Result};
use crate::numerics::{circle_dist, integrate_unit, rk4, solve};
use crate::torus::{LSection, TorusFn};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonConfig {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            tol: 1e-12,
            max_iter: 50,
        }
    }
}

/// Requested domain: `b_1` in `[-eps, eps]`, `(b_2..b_n)` in a box.
#[derive(Clone, Debug, PartialEq)]
pub struct BuildOptions {
    pub eps: f64,
    pub min_eps: f64,
    pub base_lo: Vec<f64>,
    pub base_hi: Vec<f64>,
    pub newton: NewtonConfig,
    /// Random probe points per trial width, in addition to the box corners.
    pub probes: usize,
    pub seed: u64,
}

impl BuildOptions {
    pub fn unit_box(n: usize) -> Self {
        BuildOptions {
            eps: 0.1,
            min_eps: 1e-6,
            base_lo: vec![-1.0; n - 1],
            base_hi: vec![1.0; n - 1],
            newton: NewtonConfig::default(),
            probes: 64,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BuiltFibration {
    ell: EllSequence<f64>,
    n: usize,
    /// `a[m-1][j-2] = a_{j,m}`.
    a: Vec<Vec<TorusFn<f64>>>,
    /// `da_db[m-1][j-2][k-2] = d_{b_k} a_{j,m}`.
    da_db: Vec<Vec<Vec<TorusFn<f64>>>>,
    da_dy: Vec<Vec<Vec<TorusFn<f64>>>>,
    eps: f64,
    base_lo: Vec<f64>,
    base_hi: Vec<f64>,
    newton: NewtonConfig,
}

/// Value and derivatives of the shift `a(r, b, y)` at one point.
struct ShiftJet {
    a: DVector<f64>,
    db: DMatrix<f64>,
    dy: DMatrix<f64>,
    dr: DVector<f64>,
}

/// Full first derivatives of `u` at a point.
#[derive(Clone, Debug)]
pub struct UJet {
    pub u: Vec<f64>,
    /// `du_b[(j, k)] = d u_j / d b_k'`, zero-based over all `n` coordinates.
    pub du_b: DMatrix<f64>,
    pub du_y: DMatrix<f64>,
}

impl BuiltFibration {
    /// Builds with the largest certified `eps` not above `opts.eps`,
    /// halving on Newton failure.
    pub fn build(ell: &EllSequence<f64>, opts: &BuildOptions) -> Result<Self> {
        let n = ell.n();
        if opts.base_lo.len() != n - 1 || opts.base_hi.len() != n - 1 {
            return Err(Error::DimensionMismatch {
                left: n - 1,
                right: opts.base_lo.len(),
            });
        }
        let mut a = Vec::new();
        let mut da_db = Vec::new();
        let mut da_dy = Vec::new();
        for l in ell.sections() {
            let comps = l.components().to_vec();
            let mut db = Vec::new();
            let mut dy = Vec::new();
            for c in &comps {
                db.push((2..=n).map(|k| c.d_base(k)).collect::<Result<Vec<_>>>()?);
                dy.push((2..=n).map(|k| c.d_angle(k)).collect::<Result<Vec<_>>>()?);
            }
            a.push(comps);
            da_db.push(db);
            da_dy.push(dy);
        }
        let mut fib = BuiltFibration {
            ell: ell.clone(),
            n,
            a,
            da_db,
            da_dy,
            eps: opts.eps,
            base_lo: opts.base_lo.clone(),
            base_hi: opts.base_hi.clone(),
            newton: opts.newton,
        };
        let mut rng = crate::random::rng(opts.seed);
        let mut probes = Vec::new();
        for _ in 0..opts.probes {
            let s: f64 = rng.gen_range(-1.0..=1.0);
            let b: Vec<f64> = (0..n - 1).map(|i| rng.gen_range(opts.base_lo[i]..=opts.base_hi[i])).collect();
            let y: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(0.0..1.0)).collect();
            probes.push((s, b, y));
        }
        for corner in 0..(1usize << (n - 1)) {
            let b: Vec<f64> = (0..n - 1)
                .map(|i| if corner >> i & 1 == 1 { opts.base_hi[i] } else { opts.base_lo[i] })
                .collect();
            for s in [-1.0, 1.0] {
                probes.push((s, b.clone(), vec![0.0; n - 1]));
            }
        }
        let mut eps = opts.eps;
        while eps >= opts.min_eps {
            fib.eps = eps;
            if probes.iter().all(|(s, b, y)| fib.certify_point(s * eps, b, y)) {
                return Ok(fib);
            }
            eps /= 2.0;
        }
        Err(Error::DomainTooLarge { eps: opts.min_eps })
    }

    fn certify_point(&self, r: f64, bbar: &[f64], y: &[f64]) -> bool {
        // the image point of b under the shift, then invert it
        let Ok(jet) = self.shift_jet(r, bbar, y) else { return false };
        if jet.db.norm() >= 0.5 {
            return false;
        }
        let target: Vec<f64> = bbar.iter().zip(jet.a.iter()).map(|(b, a)| b + a).collect();
        let mut bp = vec![r];
        bp.extend(target);
        let mut yp = vec![0.0];
        yp.extend_from_slice(y);
        match self.solve_base(&bp, &yp) {
            Ok(b) => b.iter().zip(bbar).all(|(x, y)| (x - y).abs() < 1e-9),
            Err(_) => false,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn ell(&self) -> &EllSequence<f64> {
        &self.ell
    }

    pub fn base_box(&self) -> (&[f64], &[f64]) {
        (&self.base_lo, &self.base_hi)
    }

    fn shift_jet(&self, r: f64, bbar: &[f64], ybar: &[f64]) -> Result<ShiftJet> {
        let s = self.n - 1;
        let mut jet = ShiftJet {
            a: DVector::zeros(s),
            db: DMatrix::zeros(s, s),
            dy: DMatrix::zeros(s, s),
            dr: DVector::zeros(s),
        };
        let mut rp = 1.0;
        for (m, comps) in self.a.iter().enumerate() {
            let dr_pow = (m + 1) as f64 * rp;
            rp *= r;
            for (j, f) in comps.iter().enumerate() {
                if f.is_zero() {
                    continue;
                }
                let v = f.evaluate(bbar, ybar)?;
                jet.a[j] += v * rp;
                jet.dr[j] += v * dr_pow;
                for k in 0..s {
                    jet.db[(j, k)] += self.da_db[m][j][k].evaluate(bbar, ybar)? * rp;
                    jet.dy[(j, k)] += self.da_dy[m][j][k].evaluate(bbar, ybar)? * rp;
                }
            }
        }
        Ok(jet)
    }

    /// Solves `b + a(b_1', b, y') = (b_2'..b_n')` by damped Newton.
    fn solve_base(&self, bp: &[f64], yp: &[f64]) -> Result<Vec<f64>> {
        let r = bp[0];
        let target = DVector::from_column_slice(&bp[1..]);
        let ybar = &yp[1..];
        let mut b = target.clone();
        let resid = |b: &DVector<f64>| -> Result<(DVector<f64>, ShiftJet)> {
            let jet = self.shift_jet(r, b.as_slice(), ybar)?;
            Ok((b + &jet.a - &target, jet))
        };
        let (mut g, mut jet) = resid(&b)?;
        let scale = 1.0 + target.amax();
        let mut polish = 0;
        for _ in 0..self.newton.max_iter {
            let norm = g.amax();
            let converged = norm <= self.newton.tol * scale;
            if converged {
                // a couple of extra steps take the residual to rounding level
                polish += 1;
                if polish > 2 || norm == 0.0 {
                    break;
                }
            }
            let jac = DMatrix::identity(self.n - 1, self.n - 1) + &jet.db;
            let step = solve(&jac, &g).ok_or_else(|| Error::NewtonDivergence { point: bp.to_vec() })?;
            let mut lambda = 1.0;
            loop {
                let trial = &b - &step * lambda;
                let (gt, jt) = resid(&trial)?;
                if gt.amax() < norm {
                    b = trial;
                    g = gt;
                    jet = jt;
                    break;
                }
                if converged {
                    break;
                }
                lambda /= 2.0;
                if lambda < 1e-6 {
                    return Err(Error::NewtonDivergence { point: bp.to_vec() });
                }
            }
        }
        if g.amax() > self.newton.tol * scale || !g.amax().is_finite() {
            return Err(Error::NewtonDivergence { point: bp.to_vec() });
        }
        Ok(b.iter().copied().collect())
    }

    /// `u(b', y')`; `b'` and `y'` have `n` entries, `y_1'` is ignored.
    pub fn u(&self, bp: &[f64], yp: &[f64]) -> Result<Vec<f64>> {
        self.check_point(bp, yp)?;
        let mut out = vec![bp[0]];
        out.extend(self.solve_base(bp, yp)?);
        Ok(out)
    }

    fn check_point(&self, bp: &[f64], yp: &[f64]) -> Result<()> {
        if bp.len() != self.n || yp.len() != self.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: bp.len().min(yp.len()),
            });
        }
        Ok(())
    }

    /// `u` with its first derivatives by implicit differentiation.
    pub fn jet(&self, bp: &[f64], yp: &[f64]) -> Result<UJet> {
        self.check_point(bp, yp)?;
        let n = self.n;
        let b = self.solve_base(bp, yp)?;
        let jet = self.shift_jet(bp[0], &b, &yp[1..])?;
        let m = DMatrix::identity(n - 1, n - 1) + &jet.db;
        let minv = m
            .try_inverse()
            .ok_or_else(|| Error::NewtonDivergence { point: bp.to_vec() })?;
        let mut du_b = DMatrix::zeros(n, n);
        let mut du_y = DMatrix::zeros(n, n);
        du_b[(0, 0)] = 1.0;
        let dr = -(&minv * &jet.dr);
        let dy = -(&minv * &jet.dy);
        for j in 0..n - 1 {
            du_b[(j + 1, 0)] = dr[j];
            for k in 0..n - 1 {
                du_b[(j + 1, k + 1)] = minv[(j, k)];
                du_y[(j + 1, k + 1)] = dy[(j, k)];
            }
        }
        let mut u = vec![bp[0]];
        u.extend(b);
        Ok(UJet { u, du_b, du_y })
    }

    /// Hamiltonian field of `u_j` (`1 <= j <= n`) at the state `(b', y')`.
    pub fn field(&self, j: usize, state: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        let jet = self.jet(&state[..n], &state[n..])?;
        let mut v = vec![0.0; 2 * n];
        for k in 0..n {
            v[k] = -jet.du_y[(j - 1, k)];
            v[n + k] = jet.du_b[(j - 1, k)];
        }
        Ok(v)
    }

    /// Point of the zero section `y' = 0` over the base point `b`.
    pub fn zero_section(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        let jet = self.shift_jet(b[0], &b[1..], &vec![0.0; n - 1])?;
        let mut state = vec![b[0]];
        state.extend(b[1..].iter().zip(jet.a.iter()).map(|(x, a)| x + a));
        state.extend(vec![0.0; n]);
        Ok(state)
    }

    /// Applies `Phi^{t_1}_{eta_1} o ... o Phi^{t_n}_{eta_n}` to `state`
    /// (the last flow first), with angles left unreduced.
    pub fn flow_composite(&self, state: &[f64], t: &[f64], steps_per_unit: usize) -> Result<Vec<f64>> {
        let n = self.n;
        let mut x = state.to_vec();
        for j in (2..=n).rev() {
            let tj = t[j - 1];
            if tj == 0.0 {
                continue;
            }
            let steps = ((tj.abs() * steps_per_unit as f64).ceil() as usize).max(4);
            let f = |s: &[f64]| self.field(j, s);
            x = rk4(&f, &x, tj, steps)?;
        }
        x[n] += t[0];
        Ok(x)
    }

    /// Max `|{u_i, u_j}|` over the samples, by central differences.
    pub fn verify_lagrangian(&self, samples: &[(Vec<f64>, Vec<f64>)], h: f64) -> Result<LagrangianReport> {
        let n = self.n;
        let mut max_bracket: f64 = 0.0;
        for (bp, yp) in samples {
            let mut gb = DMatrix::zeros(n, n);
            let mut gy = DMatrix::zeros(n, n);
            for k in 0..n {
                for (which, grad) in [(0, &mut gb), (1, &mut gy)] {
                    let (mut bp1, mut yp1) = (bp.clone(), yp.clone());
                    let (mut bp2, mut yp2) = (bp.clone(), yp.clone());
                    if which == 0 {
                        bp1[k] += h;
                        bp2[k] -= h;
                    } else {
                        yp1[k] += h;
                        yp2[k] -= h;
                    }
                    let up = self.u(&bp1, &yp1)?;
                    let um = self.u(&bp2, &yp2)?;
                    for j in 0..n {
                        grad[(j, k)] = (up[j] - um[j]) / (2.0 * h);
                    }
                }
            }
            for i in 0..n {
                for j in (i + 1)..n {
                    let mut br = 0.0;
                    for k in 0..n {
                        br += gy[(i, k)] * gb[(j, k)] - gb[(i, k)] * gy[(j, k)];
                    }
                    max_bracket = max_bracket.max(br.abs());
                }
            }
        }
        Ok(LagrangianReport {
            samples: samples.len(),
            max_bracket,
        })
    }

    /// Seeded sample points `(b', y')` inside the certified domain.
    pub fn sample_points<R: Rng>(&self, rng: &mut R, count: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
        (0..count)
            .map(|_| {
                let mut b = vec![rng.gen_range(-self.eps..=self.eps)];
                for i in 0..self.n - 1 {
                    b.push(rng.gen_range(self.base_lo[i]..=self.base_hi[i]));
                }
                let y = (0..self.n).map(|_| rng.gen_range(0.0..1.0)).collect();
                (b, y)
            })
            .collect()
    }

    /// Compares Taylor coefficients of `u` in `b_1`, fitted from one-sided
    /// samples on `(0, h]`, against the Taylor sequence of the invariants.
    pub fn taylor_check(&self, points: &[(Vec<f64>, Vec<f64>)], h: f64) -> Result<f64> {
        let s = ell_to_s(&self.ell)?;
        let order = s.order();
        let degree = 10.max(order + 4);
        let samples = 4 * degree;
        let mut vand = DMatrix::zeros(samples, degree);
        let xs: Vec<f64> = (0..samples)
            .map(|i| 0.5 * (1.0 - (std::f64::consts::PI * (i as f64 + 0.5) / samples as f64).cos()))
            .collect();
        for (i, x) in xs.iter().enumerate() {
            for d in 0..degree {
                vand[(i, d)] = x.powi(d as i32 + 1);
            }
        }
        let svd = vand.svd(true, true);
        let mut worst: f64 = 0.0;
        for (bbar, ybar) in points {
            let mut rhs = DMatrix::zeros(samples, self.n - 1);
            for (i, x) in xs.iter().enumerate() {
                let mut bp = vec![x * h];
                bp.extend_from_slice(bbar);
                let mut yp = vec![0.0];
                yp.extend_from_slice(ybar);
                let u = self.u(&bp, &yp)?;
                for j in 0..self.n - 1 {
                    rhs[(i, j)] = u[j + 1] - bbar[j];
                }
            }
            let coef = svd
                .solve(&rhs, 1e-14)
                .map_err(|e| Error::InvalidInput(e.to_string()))?;
            for m in 1..=order {
                let want = s.get(m)?.evaluate(bbar, ybar)?;
                for j in 0..self.n - 1 {
                    let got = coef[(m - 1, j)] / h.powi(m as i32);
                    worst = worst.max((got - want[j]).abs());
                }
            }
        }
        Ok(worst)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LagrangianReport {
    pub samples: usize,
    pub max_bracket: f64,
}

/// Point `(b, t_1, t_2..t_n)` of the seam model; `b` has `n - 1` entries.
#[derive(Clone, Debug, PartialEq)]
pub struct GluePoint {
    pub b: Vec<f64>,
    pub t1: f64,
    pub tbar: Vec<f64>,
}

impl GluePoint {
    pub fn new(b: Vec<f64>, t1: f64, tbar: Vec<f64>) -> Self {
        GluePoint {
            b,
            t1: t1.rem_euclid(1.0),
            tbar: tbar.iter().map(|t| t.rem_euclid(1.0)).collect(),
        }
    }

    /// Largest circular or absolute coordinate difference.
    pub fn distance(&self, other: &GluePoint) -> f64 {
        let mut d = circle_dist(self.t1, other.t1);
        for (a, b) in self.tbar.iter().zip(&other.tbar) {
            d = d.max(circle_dist(*a, *b));
        }
        for (a, b) in self.b.iter().zip(&other.b) {
            d = d.max((a - b).abs());
        }
        d
    }
}

const QUAD_NODES: usize = 32;
const QUAD_TOL: f64 = 1e-11;
const QUAD_MAX_PANELS: usize = 1 << 12;

/// `int_0^tbar l_1` along the straight path in the fibre over `b`.
pub fn line_integral(ell1: &LSection<f64>, b: &[f64], tbar: &[f64]) -> Result<f64> {
    integrate_unit(
        |s| {
            let y: Vec<f64> = tbar.iter().map(|t| s * t).collect();
            let a = ell1.evaluate(b, &y)?;
            Ok(a.iter().zip(tbar).map(|(a, t)| a * t).sum())
        },
        QUAD_NODES,
        QUAD_TOL,
        QUAD_MAX_PANELS,
    )
}

/// The same integral along the axis-ordered path `0 -> t_2 e_2 -> ... -> tbar`.
pub fn line_integral_axes(ell1: &LSection<f64>, b: &[f64], tbar: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for i in 0..tbar.len() {
        let t = tbar[i];
        if t == 0.0 {
            continue;
        }
        total += integrate_unit(
            |s| {
                let mut y = vec![0.0; tbar.len()];
                y[..i].copy_from_slice(&tbar[..i]);
                y[i] = s * t;
                Ok(ell1.evaluate(b, &y)?[i] * t)
            },
            QUAD_NODES,
            QUAD_TOL,
            QUAD_MAX_PANELS,
        )?;
    }
    Ok(total)
}

/// `Q(b, t_1, tbar) = (b, t_1 - int_0^tbar l_1, tbar)`.
pub fn glue_q(ell1: &LSection<f64>, p: &GluePoint) -> Result<GluePoint> {
    ell1.cycle_integral(2)?;
    let i = line_integral(ell1, &p.b, &p.tbar)?;
    Ok(GluePoint::new(p.b.clone(), p.t1 - i, p.tbar.clone()))
}

/// Composite flow of the fibration's Hamiltonian fields from the zero
/// section over `b` (with `n` entries), returned as `(b', y')` with angles mod 1.
pub fn glue_q_tilde(u: &BuiltFibration, b: &[f64], t: &[f64], steps_per_unit: usize) -> Result<Vec<f64>> {
    let n = u.n();
    let start = u.zero_section(b)?;
    let mut x = u.flow_composite(&start, t, steps_per_unit)?;
    for v in &mut x[n..] {
        *v = v.rem_euclid(1.0);
    }
    Ok(x)
}

/// Seam restriction of `glue_q_tilde` as a [`GluePoint`].
pub fn glue_q_tilde_seam(u: &BuiltFibration, p: &GluePoint, steps_per_unit: usize) -> Result<GluePoint> {
    let n = u.n();
    let mut b = vec![0.0];
    b.extend_from_slice(&p.b);
    let mut t = vec![p.t1];
    t.extend_from_slice(&p.tbar);
    let x = glue_q_tilde(u, &b, &t, steps_per_unit)?;
    Ok(GluePoint::new(x[1..n].to_vec(), x[n], x[n + 1..].to_vec()))
}

/// Period lattice over the base point `b`: row `k` holds the times
/// `(T_1..T_n)` whose composite flow advances the angle `y_k'` by one turn
/// and the others by zero. Newton on the times, seeded by the flat lattice.
pub fn period_lattice(u: &BuiltFibration, b: &[f64]) -> Result<DMatrix<f64>> {
    let n = u.n();
    let start = u.zero_section(b)?;
    let steps = 200;
    let disp = |t: &[f64]| -> Result<DVector<f64>> {
        let x = u.flow_composite(&start, t, steps)?;
        Ok(DVector::from_iterator(n, (0..n).map(|k| x[n + k] - start[n + k])))
    };
    let mut out = DMatrix::zeros(n, n);
    for k in 0..n {
        let mut t = vec![0.0; n];
        t[k] = 1.0;
        let mut target = DVector::zeros(n);
        target[k] = 1.0;
        let mut ok = false;
        for _ in 0..20 {
            let g = disp(&t)? - &target;
            if g.amax() < 1e-11 {
                ok = true;
                break;
            }
            let mut jac = DMatrix::zeros(n, n);
            let h = 1e-6;
            for c in 0..n {
                let mut tp = t.clone();
                let mut tm = t.clone();
                tp[c] += h;
                tm[c] -= h;
                let d = (disp(&tp)? - disp(&tm)?) / (2.0 * h);
                jac.set_column(c, &d);
            }
            let step = solve(&jac, &g).ok_or_else(|| Error::ReturnSearchFailed(format!("singular Jacobian at {b:?}")))?;
            for c in 0..n {
                t[c] -= step[c];
            }
        }
        if !ok {
            return Err(Error::ReturnSearchFailed(format!("no return for cycle {} over {b:?}", k + 1)));
        }
        for c in 0..n {
            out[(k, c)] = t[c];
        }
    }
    Ok(out)
}
