//! Log-images of plane curves `p(v_1, v_2) = 0` under `(log|v_1|, log|v_2|)`.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use num_complex::Complex64 as C;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `(s, t)` lies on the amoeba of `v_1 + v_2 + 1 = 0` iff `(e^s, e^t, 1)`
/// satisfy the triangle inequalities.
pub fn member_line(s: f64, t: f64) -> bool {
    let (x, y) = (s.exp(), t.exp());
    (x - y).abs() <= 1.0 && 1.0 <= x + y
}

/// Whether the cell `[s0, s1] x [t0, t1]` meets the line amoeba. In
/// `(x, y) = (e^s, e^t)` the amoeba is the convex region `|x - y| <= 1 <= x + y`,
/// so the box is clipped against its three half-planes.
pub fn cell_meets_line(s0: f64, s1: f64, t0: f64, t1: f64) -> bool {
    let (x0, x1, y0, y1) = (s0.exp(), s1.exp(), t0.exp(), t1.exp());
    let mut poly = vec![(x0, y0), (x1, y0), (x1, y1), (x0, y1)];
    // a x + b y <= c
    for (a, b, c) in [(1.0, -1.0, 1.0), (-1.0, 1.0, 1.0), (-1.0, -1.0, -1.0)] {
        let inside = |p: &(f64, f64)| a * p.0 + b * p.1 <= c;
        let mut out = Vec::with_capacity(poly.len() + 1);
        for i in 0..poly.len() {
            let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
            let (ip, iq) = (inside(&p), inside(&q));
            if ip {
                out.push(p);
            }
            if ip != iq {
                let fp = a * p.0 + b * p.1 - c;
                let fq = a * q.0 + b * q.1 - c;
                let u = fp / (fp - fq);
                out.push((p.0 + u * (q.0 - p.0), p.1 + u * (q.1 - p.1)));
            }
        }
        poly = out;
        if poly.is_empty() {
            return false;
        }
    }
    true
}

/// A Laurent polynomial `sum c v_1^i v_2^j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    terms: Vec<(i32, i32, C)>,
}

impl Polynomial {
    pub fn new(terms: Vec<(i32, i32, C)>) -> Result<Self> {
        let terms: Vec<_> = terms.into_iter().filter(|t| t.2 != C::new(0.0, 0.0)).collect();
        if terms.is_empty() {
            return Err(Error::InvalidInput("polynomial has no terms".into()));
        }
        if terms.iter().any(|t| !t.2.re.is_finite() || !t.2.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite coefficient".into()));
        }
        Ok(Polynomial { terms })
    }

    /// `v_1 + v_2 + 1`.
    pub fn line() -> Self {
        let one = C::new(1.0, 0.0);
        Polynomial {
            terms: vec![(1, 0, one), (0, 1, one), (0, 0, one)],
        }
    }

    /// Parses `i:j:c` terms separated by commas, e.g. `1:0:1,0:1:-1`.
    /// Complex coefficients are written `re/im`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("cannot parse polynomial '{text}'"));
        let mut terms = vec![];
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let f: Vec<&str> = part.split(':').collect();
            if f.len() != 3 {
                return Err(bad());
            }
            let i = f[0].trim().parse().map_err(|_| bad())?;
            let j = f[1].trim().parse().map_err(|_| bad())?;
            let c = match f[2].split_once('/') {
                Some((re, im)) => C::new(re.trim().parse().map_err(|_| bad())?, im.trim().parse().map_err(|_| bad())?),
                None => C::new(f[2].trim().parse().map_err(|_| bad())?, 0.0),
            };
            terms.push((i, j, c));
        }
        Self::new(terms)
    }

    pub fn terms(&self) -> &[(i32, i32, C)] {
        &self.terms
    }

    pub fn eval(&self, v1: C, v2: C) -> C {
        self.terms.iter().map(|(i, j, c)| c * v1.powi(*i) * v2.powi(*j)).sum()
    }

    /// Bounds on `|dp/dtheta_1|` and `|dp/dtheta_2|` over the fibre over `(s, t)`.
    fn angular_lipschitz(&self, s: f64, t: f64) -> (f64, f64) {
        self.terms.iter().fold((0.0, 0.0), |(a, b), (i, j, c)| {
            let m = c.norm() * (*i as f64 * s + *j as f64 * t).exp();
            (a + i.unsigned_abs() as f64 * m, b + j.unsigned_abs() as f64 * m)
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    Inside,
    Outside,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    /// Circles `|v_1| = e^s` sampled per fibre.
    pub circles: usize,
    /// Points on each `|v_2| = e^t` circle for the winding number.
    pub points: usize,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling {
            circles: 192,
            points: 192,
        }
    }
}

/// Tri-state membership by winding numbers of `v_2 -> p(v_1, v_2)` around
/// `|v_2| = e^t` as `v_1` runs over `|v_1| = e^s`: the fibre meets the curve
/// iff the number of enclosed roots changes. A constant winding is trusted
/// only when the sampled minimum of `|p|` exceeds what `|p|` can vary between
/// neighbouring samples.
///
/// Sampling starts coarse and doubles up to `cfg` while the verdict is open.
pub fn member_sampled(poly: &Polynomial, s: f64, t: f64, cfg: &Sampling) -> Membership {
    let mut level = Sampling {
        circles: cfg.circles.min(24),
        points: cfg.points.min(24),
    };
    loop {
        let m = sampled_at(poly, s, t, &level);
        if m != Membership::Inconclusive || (level.circles >= cfg.circles && level.points >= cfg.points) {
            return m;
        }
        level.circles = (2 * level.circles).min(cfg.circles);
        level.points = (2 * level.points).min(cfg.points);
    }
}

fn sampled_at(poly: &Polynomial, s: f64, t: f64, cfg: &Sampling) -> Membership {
    let (l1, l2) = poly.angular_lipschitz(s, t);
    let margin = 0.5 * TAU * (l1 / cfg.circles as f64 + l2 / cfg.points as f64);
    // p = sum_j q_j(v_1) v_2^j, with the powers of v_2 tabulated once
    let mut js: Vec<i32> = poly.terms.iter().map(|t| t.1).collect();
    js.sort_unstable();
    js.dedup();
    let table: Vec<Vec<C>> = (0..=cfg.points)
        .map(|b| {
            let th = TAU * b as f64 / cfg.points as f64;
            js.iter().map(|j| C::from_polar((*j as f64 * t).exp(), *j as f64 * th)).collect()
        })
        .collect();
    let mut first = None;
    let mut unreliable = false;
    let mut smallest = f64::INFINITY;
    let mut q = vec![C::new(0.0, 0.0); js.len()];
    for a in 0..cfg.circles {
        let v1 = C::from_polar(s.exp(), TAU * a as f64 / cfg.circles as f64);
        q.iter_mut().for_each(|x| *x = C::new(0.0, 0.0));
        for (i, j, c) in &poly.terms {
            let k = js.binary_search(j).expect("exponent tabulated");
            q[k] += c * v1.powi(*i);
        }
        let eval = |row: &[C]| -> C { q.iter().zip(row).map(|(x, y)| x * y).sum() };
        let mut total = 0.0;
        let mut prev = eval(&table[0]);
        let mut reliable = true;
        for row in &table[1..] {
            let cur = eval(row);
            smallest = smallest.min(cur.norm());
            let d = (cur / prev).arg();
            reliable &= d.abs() < 0.5 * std::f64::consts::PI && cur.norm() > 0.0;
            total += d;
            prev = cur;
        }
        if !reliable {
            unreliable = true;
            continue;
        }
        let w = (total / TAU).round() as i64;
        match first {
            None => first = Some(w),
            Some(f) if f != w => return Membership::Inside,
            _ => {}
        }
    }
    if unreliable || smallest <= margin {
        return Membership::Inconclusive;
    }
    Membership::Outside
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Hypersurface {
    Line,
    Poly(Polynomial),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmoebaSpec {
    pub surface: Hypersurface,
    /// `[s_min, s_max, t_min, t_max]`.
    pub bounds: [f64; 4],
    pub width: usize,
    pub height: usize,
    pub sampling: Sampling,
}

impl AmoebaSpec {
    pub fn line(bounds: [f64; 4], res: usize) -> Self {
        AmoebaSpec {
            surface: Hypersurface::Line,
            bounds,
            width: res,
            height: res,
            sampling: Sampling::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let [s0, s1, t0, t1] = self.bounds;
        if self.bounds.iter().any(|x| !x.is_finite()) || s1 <= s0 || t1 <= t0 {
            return Err(Error::InvalidInput("bounds must be finite with positive area".into()));
        }
        if self.width < 16 || self.height < 16 {
            return Err(Error::InvalidInput("resolution must be at least 16 per axis".into()));
        }
        Ok(())
    }

    /// Pixel centre; row 0 is the top (largest `t`).
    pub fn center(&self, col: usize, row: usize) -> (f64, f64) {
        let [s0, s1, t0, t1] = self.bounds;
        let s = s0 + (col as f64 + 0.5) * (s1 - s0) / self.width as f64;
        let t = t1 - (row as f64 + 0.5) * (t1 - t0) / self.height as f64;
        (s, t)
    }

    fn cell(&self, col: usize, row: usize) -> (f64, f64, f64, f64) {
        let [s0, s1, t0, t1] = self.bounds;
        let ds = (s1 - s0) / self.width as f64;
        let dt = (t1 - t0) / self.height as f64;
        let top = t1 - row as f64 * dt;
        (s0 + col as f64 * ds, s0 + (col + 1) as f64 * ds, top - dt, top)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    /// Row-major, top row first.
    pub cells: Vec<Membership>,
}

/// Rasterize: exact cell intersection for the line, sampled centre
/// membership for other polynomials.
pub fn render(spec: &AmoebaSpec) -> Result<Raster> {
    spec.validate()?;
    let cells = (0..spec.height)
        .into_par_iter()
        .flat_map_iter(|row| {
            (0..spec.width).map(move |col| match &spec.surface {
                Hypersurface::Line => {
                    let (a, b, c, d) = spec.cell(col, row);
                    if cell_meets_line(a, b, c, d) {
                        Membership::Inside
                    } else {
                        Membership::Outside
                    }
                }
                Hypersurface::Poly(p) => {
                    let (s, t) = spec.center(col, row);
                    member_sampled(p, s, t, &spec.sampling)
                }
            })
        })
        .collect();
    Ok(Raster {
        width: spec.width,
        height: spec.height,
        cells,
    })
}

impl Raster {
    pub fn get(&self, col: usize, row: usize) -> Membership {
        self.cells[row * self.width + col]
    }

    /// 4-connected components of the `Outside` pixels.
    pub fn components(&self) -> usize {
        let mut seen = vec![false; self.cells.len()];
        let mut count = 0;
        let mut stack = vec![];
        for start in 0..self.cells.len() {
            if seen[start] || self.cells[start] != Membership::Outside {
                continue;
            }
            count += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(i) = stack.pop() {
                let (c, r) = (i % self.width, i / self.width);
                let mut nb = Vec::with_capacity(4);
                if c > 0 {
                    nb.push(i - 1);
                }
                if c + 1 < self.width {
                    nb.push(i + 1);
                }
                if r > 0 {
                    nb.push(i - self.width);
                }
                if r + 1 < self.height {
                    nb.push(i + self.width);
                }
                for j in nb {
                    if !seen[j] && self.cells[j] == Membership::Outside {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        count
    }

    /// Binary PPM: amoeba dark, complement white, inconclusive grey.
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        for m in &self.cells {
            out.extend_from_slice(match m {
                Membership::Inside => &[32, 48, 96],
                Membership::Outside => &[255, 255, 255],
                Membership::Inconclusive => &[160, 160, 160],
            });
        }
        out
    }

    /// Outline of the `Inside` region by marching squares over pixel centres.
    pub fn to_svg(&self) -> String {
        let inside = |c: usize, r: usize| self.get(c, r) == Membership::Inside;
        let mut path = String::new();
        for r in 0..self.height.saturating_sub(1) {
            for c in 0..self.width.saturating_sub(1) {
                let idx = (inside(c, r) as u8) << 3
                    | (inside(c + 1, r) as u8) << 2
                    | (inside(c + 1, r + 1) as u8) << 1
                    | inside(c, r + 1) as u8;
                let (x, y) = (c as f64 + 0.5, r as f64 + 0.5);
                let top = (x + 0.5, y);
                let right = (x + 1.0, y + 0.5);
                let bottom = (x + 0.5, y + 1.0);
                let left = (x, y + 0.5);
                let segs: &[((f64, f64), (f64, f64))] = match idx {
                    0 | 15 => &[],
                    1 | 14 => &[(left, bottom)],
                    2 | 13 => &[(bottom, right)],
                    3 | 12 => &[(left, right)],
                    4 | 11 => &[(top, right)],
                    5 => &[(left, top), (bottom, right)],
                    6 | 9 => &[(top, bottom)],
                    7 | 8 => &[(left, top)],
                    10 => &[(top, right), (left, bottom)],
                    _ => unreachable!(),
                };
                for (a, b) in segs {
                    let _ = write!(path, "M{} {}L{} {}", a.0, a.1, b.0, b.1);
                }
            }
        }
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
             <path d=\"{path}\" fill=\"none\" stroke=\"black\" stroke-width=\"0.5\"/>\n</svg>\n",
            w = self.width,
            h = self.height
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_membership_examples() {
        assert!(member_line(0.0, 0.0));
        assert!(!member_line(5.0, 0.0));
        assert!(!member_line(-3.0, -3.0));
        assert!(cell_meets_line(-0.1, 0.1, -0.1, 0.1));
        assert!(!cell_meets_line(-3.1, -2.9, -3.1, -2.9));
    }

    #[test]
    fn parse_and_reject() {
        let p = Polynomial::parse("1:0:1, 0:1:1, 0:0:1").unwrap();
        assert_eq!(p, Polynomial::line());
        assert!(Polynomial::parse("").is_err());
        assert!(Polynomial::parse("1:0").is_err());
        assert!(Polynomial::new(vec![(1, 1, C::new(0.0, 0.0))]).is_err());
        let q = Polynomial::parse("1:0:2/-1").unwrap();
        assert_eq!(q.terms()[0].2, C::new(2.0, -1.0));
    }

    #[test]
    fn degenerate_grids_rejected() {
        assert!(render(&AmoebaSpec::line([0.0, 0.0, -1.0, 1.0], 32)).is_err());
        assert!(render(&AmoebaSpec::line([-1.0, 1.0, -1.0, 1.0], 8)).is_err());
        assert!(render(&AmoebaSpec::line([f64::NAN, 1.0, -1.0, 1.0], 32)).is_err());
    }
}
