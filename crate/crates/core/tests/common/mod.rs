//! Oracles shared by the integration tests. Nothing here calls into the
//! library's own gamma matrices, spinor algebra or quantile tables.

#![allow(dead_code)]

use num_complex::Complex64;

pub type M4 = [[Complex64; 4]; 4];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn zero() -> M4 {
    [[c(0.0, 0.0); 4]; 4]
}

pub fn identity() -> M4 {
    let mut m = zero();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = c(1.0, 0.0);
    }
    m
}

/// Dirac-representation gammas written out entry by entry.
pub fn gammas() -> [M4; 4] {
    let (o, l, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
    let g0 = [[l, o, o, o], [o, l, o, o], [o, o, -l, o], [o, o, o, -l]];
    let g1 = [[o, o, o, l], [o, o, l, o], [o, -l, o, o], [-l, o, o, o]];
    let g2 = [[o, o, o, -i], [o, o, i, o], [o, i, o, o], [-i, o, o, o]];
    let g3 = [[o, o, l, o], [o, o, o, -l], [-l, o, o, o], [o, l, o, o]];
    [g0, g1, g2, g3]
}

pub const METRIC: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

pub fn mul(a: &M4, b: &M4) -> M4 {
    let mut m = zero();
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                m[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    m
}

pub fn add(a: &M4, b: &M4, kb: f64) -> M4 {
    let mut m = *a;
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] += b[i][j] * kb;
        }
    }
    m
}

pub fn trace(a: &M4) -> Complex64 {
    (0..4).map(|i| a[i][i]).sum()
}

pub fn chain(ms: &[&M4]) -> M4 {
    ms.iter().fold(identity(), |acc, m| mul(&acc, m))
}

/// `gamma^mu p_mu` for a contravariant `(E, px, py, pz)`.
pub fn slash(p: [f64; 4]) -> M4 {
    let g = gammas();
    let mut m = zero();
    for mu in 0..4 {
        m = add(&m, &g[mu], METRIC[mu] * p[mu]);
    }
    m
}

pub fn minkowski(a: [f64; 4], b: [f64; 4]) -> f64 {
    a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3]
}

/// `(1/4) sum_spins |M|^2` for `f(p1) fbar(p2) -> f(q1) fbar(q2)` with
/// coupling `e`, from Dirac traces. `ann`/`exch` select the diagrams.
#[allow(clippy::too_many_arguments)]
pub fn trace_spin_average(
    p1: [f64; 4],
    p2: [f64; 4],
    q1: [f64; 4],
    q2: [f64; 4],
    m_in: f64,
    m_out: f64,
    e: f64,
    ann: bool,
    exch: bool,
) -> f64 {
    let id = identity();
    let a1 = add(&slash(p1), &id, m_in);
    let a2 = add(&slash(p2), &id, -m_in);
    let b1 = add(&slash(q1), &id, m_out);
    let b2 = add(&slash(q2), &id, -m_out);
    let sum = |x: [f64; 4], y: [f64; 4]| [x[0] + y[0], x[1] + y[1], x[2] + y[2], x[3] + y[3]];
    let diff = |x: [f64; 4], y: [f64; 4]| [x[0] - y[0], x[1] - y[1], x[2] - y[2], x[3] - y[3]];
    let s = minkowski(sum(p1, p2), sum(p1, p2));
    let t = minkowski(diff(p1, q1), diff(p1, q1));
    let g = gammas();
    let (mut aa, mut bb, mut ab) = (c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
    for mu in 0..4 {
        for nu in 0..4 {
            let w = METRIC[mu] * METRIC[nu];
            let (gm, gn) = (&g[mu], &g[nu]);
            aa += trace(&chain(&[&a2, gm, &a1, gn])) * trace(&chain(&[&b1, gm, &b2, gn])) * w;
            bb += trace(&chain(&[&b1, gm, &a1, gn])) * trace(&chain(&[&a2, gm, &b2, gn])) * w;
            ab += trace(&chain(&[&a2, gm, &a1, gn, &b1, gm, &b2, gn])) * w;
        }
    }
    let mut total = 0.0;
    if ann {
        total += aa.re / (s * s);
    }
    if exch {
        total += bb.re / (t * t);
    }
    if ann && exch {
        total -= 2.0 * ab.re / (s * t);
    }
    e.powi(4) * total / 4.0
}

/// Spin-averaged massless Bhabha: `2 e^4 [(s^2+u^2)/t^2 + 2u^2/(st) + (u^2+t^2)/s^2]`.
pub fn massless_bhabha(s: f64, t: f64, e: f64) -> f64 {
    let u = -s - t;
    2.0 * e.powi(4) * ((s * s + u * u) / (t * t) + 2.0 * u * u / (s * t) + (u * u + t * t) / (s * s))
}

/// Pearson statistic over bins with positive expectation, plus the number
/// of observations in bins with zero expectation.
pub fn pearson(observed: &[u64], probs: &[f64]) -> (f64, u64, usize) {
    let n: u64 = observed.iter().sum();
    let mut stat = 0.0;
    let mut impossible = 0;
    let mut live = 0;
    for (&o, &p) in observed.iter().zip(probs) {
        if p == 0.0 {
            impossible += o;
            continue;
        }
        live += 1;
        let e = p * n as f64;
        stat += (o as f64 - e).powi(2) / e;
    }
    (stat, impossible, live.max(1) - 1)
}

pub fn chi2_quantile(df: usize, alpha: f64) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    ChiSquared::new(df as f64).unwrap().inverse_cdf(1.0 - alpha)
}
