//! The explicit stitched fibrations on `C^2` and `C^3`.
//!
//! All of them have first component `mu = (|z_1|^2 - |z_2|^2) / 2`, the moment
//! map of `e^{it} (z_1, z_2, z_3) = (e^{it} z_1, e^{-it} z_2, z_3)`. The other
//! components are `log(s |w|)` with `w = c_g gamma + c_3 z_3 + c_0` affine in
//! the piecewise map `gamma` and in `z_3`.

use num_complex::Complex64 as C;
use serde::Serialize;

use crate::error::{Error, Result};

/// Points closer than this to a singular set are outside the domain.
pub const DOMAIN_MARGIN: f64 = 1e-9;

/// Which smooth branch of `gamma` to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    Plus,
    Minus,
    /// The piecewise map: plus branch where `mu >= 0`.
    Global,
}

pub fn mu(z: &[C]) -> f64 {
    0.5 * (z[0].norm_sqr() - z[1].norm_sqr())
}

/// A complex function with its Wirtinger derivatives `d/dz_k`, `d/dzbar_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct WJet {
    pub value: C,
    pub dz: Vec<C>,
    pub dzbar: Vec<C>,
}

/// `gamma(z_1, z_2)`: `z_1 z_2 / |z_1|` when `mu >= 0`, `z_1 z_2 / |z_2|` otherwise.
pub fn gamma(z1: C, z2: C) -> Result<C> {
    let side = if z1.norm_sqr() >= z2.norm_sqr() { Side::Plus } else { Side::Minus };
    gamma_branch(z1, z2, side)
}

pub fn gamma_branch(z1: C, z2: C, side: Side) -> Result<C> {
    Ok(gamma_jet(&[z1, z2], side)?.value)
}

/// `gamma` on one branch with its derivatives, over `z.len()` variables.
pub fn gamma_jet(z: &[C], side: Side) -> Result<WJet> {
    let side = match side {
        Side::Global if mu(z) >= 0.0 => Side::Plus,
        Side::Global => Side::Minus,
        s => s,
    };
    let (z1, z2) = (z[0], z[1]);
    let n = z.len();
    let mut dz = vec![C::new(0.0, 0.0); n];
    let mut dzbar = vec![C::new(0.0, 0.0); n];
    // swap roles for the minus branch, which is the plus branch in (z_2, z_1)
    let (p, q, ip, iq) = match side {
        Side::Plus => (z1, z2, 0, 1),
        _ => (z2, z1, 1, 0),
    };
    let r = p.norm();
    if r <= DOMAIN_MARGIN {
        return Err(Error::UndefinedAtPoint(format!("gamma branch needs |z_{}| > 0", ip + 1)));
    }
    let value = p * q / r;
    dz[ip] = q / (2.0 * r);
    dzbar[ip] = -p * p * q / (2.0 * r * r * r);
    dz[iq] = p / r;
    Ok(WJet { value, dz, dzbar })
}

/// `log(scale |w|)` with `w = cg gamma + c3 z_3 + c0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogComponent {
    pub cg: f64,
    pub c3: f64,
    pub c0: f64,
    pub scale: f64,
}

impl LogComponent {
    pub fn w_jet(&self, z: &[C], side: Side) -> Result<WJet> {
        let n = z.len();
        let mut jet = WJet {
            value: C::new(self.c0, 0.0),
            dz: vec![C::new(0.0, 0.0); n],
            dzbar: vec![C::new(0.0, 0.0); n],
        };
        if self.cg != 0.0 {
            let g = gamma_jet(z, side)?;
            jet.value += self.cg * g.value;
            for k in 0..n {
                jet.dz[k] += self.cg * g.dz[k];
                jet.dzbar[k] += self.cg * g.dzbar[k];
            }
        }
        if self.c3 != 0.0 {
            jet.value += self.c3 * z[2];
            jet.dz[2] += self.c3;
        }
        Ok(jet)
    }

    pub fn value(&self, z: &[C], side: Side) -> Result<f64> {
        let w = self.w_jet(z, side)?.value;
        if w.norm() <= DOMAIN_MARGIN {
            return Err(Error::UndefinedAtPoint("log of |w| at w = 0".into()));
        }
        Ok((self.scale * w.norm()).ln())
    }

    /// `d/dzbar_k log|w| = (w_zbar / w + conj(w_z) / conj(w)) / 2`.
    pub fn grad_bar(&self, z: &[C], side: Side) -> Result<Vec<C>> {
        let w = self.w_jet(z, side)?;
        if w.value.norm() <= DOMAIN_MARGIN {
            return Err(Error::UndefinedAtPoint("log of |w| at w = 0".into()));
        }
        Ok((0..z.len())
            .map(|k| 0.5 * (w.dzbar[k] / w.value + w.dz[k].conj() / w.value.conj()))
            .collect())
    }

    pub fn uses_gamma(&self) -> bool {
        self.cg != 0.0
    }
}

/// Sign variant of the closed-form focus-focus discrepancy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Variant {
    /// `Re(z_1 z_2 / (|z_1|^2 z_1 z_2 - |z_1|^3))`, uncorrected.
    Uncorrected,
    /// `-Re(z_1 z_2 / (|z_1|^2 z_1 z_2 + |z_1|^3))`, which the numerics support.
    Corrected,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExampleFibration {
    pub name: &'static str,
    pub n: usize,
    /// Components `f_2..f_n`.
    pub components: Vec<LogComponent>,
    pub discriminant: &'static str,
    pub seam_components: usize,
    /// Base points `(0, b_2..b_n)`, one per seam component.
    pub seam_reference: Vec<Vec<f64>>,
    pub seam_labels: Vec<&'static str>,
}

pub const NAMES: [&str; 3] = ["focus_focus", "leg", "amoeba"];

pub fn make(name: &str) -> Result<ExampleFibration> {
    let s2 = std::f64::consts::SQRT_2;
    let inv = 1.0 / s2;
    let comp = |cg, c3, c0, scale| LogComponent { cg, c3, c0, scale };
    match name {
        "focus_focus" => Ok(ExampleFibration {
            name: "focus_focus",
            n: 2,
            components: vec![comp(1.0, 0.0, 1.0, 1.0)],
            discriminant: "{0}: the pinched fibre over the origin",
            seam_components: 2,
            seam_reference: vec![vec![0.0, 0.5], vec![0.0, -0.5]],
            seam_labels: vec!["u", "d"],
        }),
        "leg" => Ok(ExampleFibration {
            name: "leg",
            n: 3,
            components: vec![comp(0.0, 1.0, 0.0, 1.0), comp(1.0, 0.0, -1.0, 1.0)],
            discriminant: "{0} x R x {0}",
            seam_components: 2,
            seam_reference: vec![vec![0.0, 0.0, 0.5], vec![0.0, 0.0, -0.5]],
            seam_labels: vec!["u", "d"],
        }),
        "amoeba" => Ok(ExampleFibration {
            name: "amoeba",
            n: 3,
            components: vec![comp(1.0, -1.0, 0.0, inv), comp(1.0, 1.0, -s2, inv)],
            discriminant: "{0} x amoeba of v1 + v2 + 1 = 0",
            seam_components: 3,
            seam_reference: vec![vec![0.0, -2.0, -2.0], vec![0.0, 1.0, -2.0], vec![0.0, -2.0, 1.0]],
            seam_labels: vec!["c", "d", "e"],
        }),
        other => Err(Error::UnknownName(other.to_string())),
    }
}

impl ExampleFibration {
    fn check(&self, z: &[C]) -> Result<()> {
        if z.len() != self.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: z.len(),
            });
        }
        if z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::UndefinedAtPoint("non-finite coordinate".into()));
        }
        Ok(())
    }

    /// `f` on the given branch.
    pub fn eval_side(&self, z: &[C], side: Side) -> Result<Vec<f64>> {
        self.check(z)?;
        let mut out = vec![mu(z)];
        for c in &self.components {
            out.push(c.value(z, side)?);
        }
        Ok(out)
    }

    pub fn eval(&self, z: &[C]) -> Result<Vec<f64>> {
        self.eval_side(z, Side::Global)
    }

    /// Inside the domain and off the singular fibres, with margin.
    pub fn in_domain(&self, z: &[C]) -> bool {
        if self.check(z).is_err() || (z[0].norm() <= DOMAIN_MARGIN && z[1].norm() <= DOMAIN_MARGIN) {
            return false;
        }
        self.components.iter().all(|c| match c.w_jet(z, Side::Global) {
            Ok(w) => w.value.norm() > DOMAIN_MARGIN,
            Err(_) => false,
        })
    }

    /// `d f_j / d zbar` on a branch; `j = 1` is the moment map.
    pub fn grad_bar(&self, j: usize, z: &[C], side: Side) -> Result<Vec<C>> {
        self.check(z)?;
        if j == 1 {
            let mut g = vec![C::new(0.0, 0.0); self.n];
            g[0] = 0.5 * z[0];
            g[1] = -0.5 * z[1];
            return Ok(g);
        }
        let c = self
            .components
            .get(j.wrapping_sub(2))
            .ok_or(Error::IndexOutOfRange { index: j, n: self.n })?;
        c.grad_bar(z, side)
    }

    /// The `w` values of the components, whose arguments are the angle
    /// coordinates of the reduced fibre.
    pub fn w_values(&self, z: &[C], side: Side) -> Result<Vec<C>> {
        self.components.iter().map(|c| Ok(c.w_jet(z, side)?.value)).collect()
    }

    /// A point of the fibre over `b` whose `w_j` have arguments `phases`.
    pub fn fibre_point_with(&self, b: &[f64], phases: &[f64]) -> Result<Vec<C>> {
        if b.len() != self.n || phases.len() != self.n - 1 {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: b.len(),
            });
        }
        // Solve the affine system for (gamma, z_3).
        let w: Vec<C> = self
            .components
            .iter()
            .zip(&b[1..])
            .zip(phases)
            .map(|((c, bj), ph)| C::from_polar(bj.exp() / c.scale, *ph) - c.c0)
            .collect();
        let (g, z3) = match self.n {
            2 => (w[0] / self.components[0].cg, None),
            _ => {
                let (a, c) = (self.components[0], self.components[1]);
                let det = a.cg * c.c3 - a.c3 * c.cg;
                if det.abs() < 1e-14 {
                    return Err(Error::SingularPoint("degenerate component system".into()));
                }
                let g = (w[0] * c.c3 - w[1] * a.c3) / det;
                let z3 = (w[1] * a.cg - w[0] * c.cg) / det;
                (g, Some(z3))
            }
        };
        let m = b[0];
        let r = g.norm();
        let (z1, z2) = if m >= 0.0 {
            (C::new((2.0 * m + r * r).sqrt(), 0.0), g)
        } else {
            (g, C::new((r * r - 2.0 * m).sqrt(), 0.0))
        };
        let mut z = vec![z1, z2];
        if let Some(z3) = z3 {
            z.push(z3);
        }
        if !self.in_domain(&z) {
            return Err(Error::SingularPoint(format!("fibre over {b:?} is singular at the chosen phases")));
        }
        Ok(z)
    }

    /// A point of the fibre over `b`, trying a few phase choices.
    pub fn fibre_point(&self, b: &[f64]) -> Result<Vec<C>> {
        let pi = std::f64::consts::PI;
        for ph in [pi, 0.5 * pi, -0.5 * pi, 0.25 * pi, 0.0] {
            let phases = vec![ph; self.n - 1];
            if let Ok(z) = self.fibre_point_with(b, &phases) {
                return Ok(z);
            }
        }
        Err(Error::SingularPoint(format!("no regular point found over {b:?}")))
    }

    /// Closed-form discrepancy coefficients `a_2..a_n` at a seam point.
    ///
    /// Components built from `w = cg gamma + ...` give
    /// `a = -cg Re(w zbar_1 zbar_2 / |z_1|^3) / |w|^2`; components free of
    /// `gamma` are smooth and give zero. For the focus-focus example the
    /// `Uncorrected` variant keeps the minus sign in the denominator.
    pub fn closed_form_a(&self, z: &[C], variant: Variant) -> Result<Vec<f64>> {
        self.check(z)?;
        let r = z[0].norm();
        if r <= DOMAIN_MARGIN {
            return Err(Error::UndefinedAtPoint("closed form needs z_1 != 0".into()));
        }
        if self.name == "focus_focus" && variant == Variant::Uncorrected {
            let p = z[0] * z[1];
            let den = r * r * p - r * r * r;
            if den.norm() <= DOMAIN_MARGIN {
                return Err(Error::UndefinedAtPoint("uncorrected denominator vanishes".into()));
            }
            return Ok(vec![(p / den).re]);
        }
        let zz = (z[0] * z[1]).conj() / (r * r * r);
        self.components
            .iter()
            .map(|c| {
                if !c.uses_gamma() {
                    return Ok(0.0);
                }
                let w = c.w_jet(z, Side::Plus)?.value;
                if w.norm() <= DOMAIN_MARGIN {
                    return Err(Error::UndefinedAtPoint("w vanishes".into()));
                }
                Ok(-c.cg * (w * zz).re / w.norm_sqr())
            })
            .collect()
    }

    /// Whether `b` is a critical value. Critical points are `z_1 = z_2 = 0`
    /// (so `gamma = 0`), where each component reads `log(scale |c_3 z_3 + c_0|)`;
    /// `b` is critical iff `b_1 = 0` and some `z_3` meets all those moduli.
    pub fn discriminant_contains(&self, b: &[f64]) -> bool {
        const TOL: f64 = 1e-12;
        if b.len() != self.n || b[0].abs() > TOL {
            return false;
        }
        // circles |z_3 - centre| = radius, or constant conditions
        let mut circles = vec![];
        for (c, bj) in self.components.iter().zip(&b[1..]) {
            let target = bj.exp() / c.scale;
            if c.c3 == 0.0 {
                if (c.c0.abs() - target).abs() > TOL * target.max(1.0) {
                    return false;
                }
            } else {
                circles.push((-c.c0 / c.c3, target / c.c3.abs()));
            }
        }
        match circles.as_slice() {
            [] | [_] => true,
            [(c1, r1), (c2, r2)] => {
                let d = (c1 - c2).abs();
                let slack = TOL * (1.0 + r1 + r2);
                d <= r1 + r2 + slack && (r1 - r2).abs() <= d + slack
            }
            _ => unreachable!("at most two components"),
        }
    }

    /// Seeded seam points: `|z_1| = |z_2|` with random phases, inside the domain.
    pub fn seam_points<R: rand::Rng>(&self, rng: &mut R, count: usize) -> Vec<Vec<C>> {
        let mut out = Vec::with_capacity(count);
        let tau = std::f64::consts::TAU;
        while out.len() < count {
            let r: f64 = rng.gen_range(0.3..1.5);
            let mut z = vec![
                C::from_polar(r, rng.gen_range(0.0..tau)),
                C::from_polar(r, rng.gen_range(0.0..tau)),
            ];
            if self.n == 3 {
                z.push(C::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)));
            }
            let safe = self
                .components
                .iter()
                .all(|c| c.w_jet(&z, Side::Plus).map(|w| w.value.norm() > 0.05).unwrap_or(false));
            if safe {
                out.push(z);
            }
        }
        out
    }
}

/// `e^{i theta} . z`.
pub fn act(theta: f64, z: &[C]) -> Vec<C> {
    let mut out = z.to_vec();
    out[0] *= C::from_polar(1.0, theta);
    out[1] *= C::from_polar(1.0, -theta);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_values() {
        assert_eq!(gamma(C::new(1.0, 0.0), C::new(1.0, 0.0)).unwrap(), C::new(1.0, 0.0));
        assert!((gamma(C::new(2.0, 0.0), C::new(1.0, 0.0)).unwrap() - C::new(1.0, 0.0)).norm() < 1e-15);
        let (z1, z2) = (C::from_polar(0.7, 0.3), C::from_polar(0.7, -1.1));
        let p = gamma_branch(z1, z2, Side::Plus).unwrap();
        let m = gamma_branch(z1, z2, Side::Minus).unwrap();
        assert!((p - m).norm() < 1e-15);
        assert!(gamma(C::new(0.0, 0.0), C::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn example_values() {
        let ff = make("focus_focus").unwrap();
        let v = ff.eval(&[C::new(1.0, 0.0), C::new(1.0, 0.0)]).unwrap();
        assert_eq!(v[0], 0.0);
        assert!((v[1] - 2f64.ln()).abs() < 1e-15);
        let leg = make("leg").unwrap();
        assert!(!leg.in_domain(&[C::new(1.0, 0.0), C::new(1.0, 0.0), C::new(1.0, 0.0)]));
        let e = std::f64::consts::E;
        let v = leg.eval(&[C::new(1.0, 0.0), C::new(-1.0, 0.0), C::new(e, 0.0)]).unwrap();
        assert!(v[0].abs() < 1e-15 && (v[1] - 1.0).abs() < 1e-15 && (v[2] - 2f64.ln()).abs() < 1e-15);
        assert!(make("nope").is_err());
    }

    #[test]
    fn discriminants() {
        let ff = make("focus_focus").unwrap();
        assert!(ff.discriminant_contains(&[0.0, 0.0]));
        assert!(!ff.discriminant_contains(&[0.0, 0.1]));
        let leg = make("leg").unwrap();
        assert!(leg.discriminant_contains(&[0.0, 3.0, 0.0]));
        assert!(!leg.discriminant_contains(&[0.0, 3.0, 0.1]));
        let am = make("amoeba").unwrap();
        assert!(am.discriminant_contains(&[0.0, 0.0, 0.0]));
        assert!(!am.discriminant_contains(&[0.0, -2.0, -2.0]));
        assert!(!am.discriminant_contains(&[0.1, 0.0, 0.0]));
    }

    #[test]
    fn fibre_points_land_on_their_fibres() {
        for name in NAMES {
            let ex = make(name).unwrap();
            for b in [vec![0.3, 0.2, -0.4], vec![-0.3, -0.7, 0.5], vec![0.0, 0.4, -1.0]] {
                let b = &b[..ex.n];
                let z = ex.fibre_point(b).unwrap();
                let f = ex.eval(&z).unwrap();
                for (x, y) in f.iter().zip(b) {
                    assert!((x - y).abs() < 1e-12, "{name}: {f:?} vs {b:?}");
                }
            }
        }
    }

    #[test]
    fn wirtinger_gradients_match_finite_differences() {
        let ex = make("amoeba").unwrap();
        let z = vec![C::new(0.8, 0.3), C::new(-0.2, 0.6), C::new(0.4, -0.9)];
        for side in [Side::Plus, Side::Minus] {
            for j in 2..=3 {
                let g = ex.grad_bar(j, &z, side).unwrap();
                for k in 0..3 {
                    let h = 1e-6;
                    let f = |dz: C| {
                        let mut w = z.clone();
                        w[k] += dz;
                        ex.components[j - 2].value(&w, side).unwrap()
                    };
                    let hx = (f(C::new(h, 0.0)) - f(C::new(-h, 0.0))) / (2.0 * h);
                    let hy = (f(C::new(0.0, h)) - f(C::new(0.0, -h))) / (2.0 * h);
                    let want = 0.5 * C::new(hx, hy);
                    assert!((g[k] - want).norm() < 1e-8);
                }
            }
        }
    }
}
