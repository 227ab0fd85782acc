use num_complex::Complex;
use stitchkit::calculus::SSequence;
use stitchkit::torus::{LSection, TorusFn};

type F = TorusFn<f64>;
type L = LSection<f64>;

/// Truncated series in r: coefficient vectors of length order + 1.
type Ser = Vec<F>;

fn ser_zero(n: usize, order: usize) -> Ser {
    vec![F::zero(n).unwrap(); order + 1]
}

fn ser_mul(a: &Ser, b: &Ser) -> Ser {
    let order = a.len() - 1;
    let mut out = ser_zero(a[0].n(), order);
    for i in 0..=order {
        for j in 0..=(order - i) {
            out[i + j] = out[i + j].add(&a[i].mul(&b[j]).unwrap()).unwrap();
        }
    }
    out
}

/// `S(b + a(r), y)` by expanding each monomial `b^alpha` binomially.
fn substitute(s: &F, a: &[Ser], order: usize) -> Ser {
    let n = s.n();
    let mut by_alpha: Vec<(Vec<u32>, Vec<(Vec<i32>, Vec<u32>, Complex<f64>)>)> = Vec::new();
    for (k, alpha, c) in s.terms() {
        let zero = vec![0u32; n - 1];
        match by_alpha.iter_mut().find(|(a, _)| *a == alpha) {
            Some((_, v)) => v.push((k, zero, c)),
            None => by_alpha.push((alpha, vec![(k, zero, c)])),
        }
    }
    let mut out = ser_zero(n, order);
    for (alpha, terms) in by_alpha {
        let angular = F::from_terms(n, terms).unwrap();
        let mut prod = ser_zero(n, order);
        prod[0] = angular;
        for (i, &p) in alpha.iter().enumerate() {
            let mut lin = a[i].clone();
            lin[0] = lin[0].add(&F::base_var(n, i + 2).unwrap()).unwrap();
            for _ in 0..p {
                prod = ser_mul(&prod, &lin);
            }
        }
        for m in 0..=order {
            out[m] = out[m].add(&prod[m]).unwrap();
        }
    }
    out
}

/// Solves `b_j + a_j + sum_m S_{j,m}(b + a, y) r^m = b_j` order by order.
pub fn oracle_a(s: &SSequence<f64>) -> Vec<L> {
    let n = s.n();
    let order = s.order();
    let mut a: Vec<Ser> = vec![ser_zero(n, order); n - 1];
    for l in 1..=order {
        let mut next = Vec::new();
        for j in 2..=n {
            let mut coeff = F::zero(n).unwrap();
            for m in 1..=l {
                let sub = substitute(s.get(m).unwrap().component(j).unwrap(), &a, order);
                coeff = coeff.add(&sub[l - m]).unwrap();
            }
            next.push(coeff.neg());
        }
        for (i, c) in next.into_iter().enumerate() {
            a[i][l] = c;
        }
    }
    (1..=order)
        .map(|l| L::new(a.iter().map(|s| s[l].clone()).collect()).unwrap())
        .collect()
}

