//! Scaling-and-squaring matrix exponential with diagonal Padé approximants
//! (Higham 2005 degree selection).

use num_complex::Complex64 as C64;

use super::{check_finite, CMatrix, FockOperator};
use crate::error::{Error, Result};

const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068),
];
const THETA_13: f64 = 5.371920351148152;

fn pade_coefficients(m: usize) -> Vec<f64> {
    // b_j = (2m - j)! m! / ((2m)! j! (m - j)!), rescaled so b_m = 1
    let mut b = vec![0.0; m + 1];
    b[0] = 1.0;
    for j in 1..=m {
        b[j] = b[j - 1] * (m + 1 - j) as f64 / (j as f64 * (2 * m + 1 - j) as f64);
    }
    let top = b[m];
    b.iter().map(|x| x / top).collect()
}

fn norm1(a: &CMatrix) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn pade(a: &CMatrix, m: usize) -> Result<CMatrix> {
    let n = a.nrows();
    let b = pade_coefficients(m);
    let id = CMatrix::identity(n, n);
    let a2 = a * a;
    let (u, v) = if m == 13 {
        let a4 = &a2 * &a2;
        let a6 = &a4 * &a2;
        let u_inner = &a6 * (&a6 * re(b[13]) + &a4 * re(b[11]) + &a2 * re(b[9]))
            + &a6 * re(b[7])
            + &a4 * re(b[5])
            + &a2 * re(b[3])
            + &id * re(b[1]);
        let u = a * u_inner;
        let v = &a6 * (&a6 * re(b[12]) + &a4 * re(b[10]) + &a2 * re(b[8]))
            + &a6 * re(b[6])
            + &a4 * re(b[4])
            + &a2 * re(b[2])
            + &id * re(b[0]);
        (u, v)
    } else {
        let mut powers = vec![id.clone()];
        for _ in 1..=m / 2 {
            let next = powers.last().unwrap() * &a2;
            powers.push(next);
        }
        let mut u_inner = CMatrix::zeros(n, n);
        let mut v = CMatrix::zeros(n, n);
        for (k, p) in powers.iter().enumerate() {
            u_inner += p * re(b[2 * k + 1]);
            v += p * re(b[2 * k]);
        }
        (a * u_inner, v)
    };
    (&v - &u)
        .lu()
        .solve(&(&v + &u))
        .ok_or_else(|| Error::NonFinite("singular Padé denominator".into()))
}

/// Dense `exp(a)` for a raw matrix.
pub fn expm(a: &CMatrix) -> Result<CMatrix> {
    check_finite(a, "matrix_exp input")?;
    let norm = norm1(a);
    for &(m, theta) in &THETA {
        if norm <= theta {
            return pade(a, m);
        }
    }
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a * re(0.5f64.powi(s));
    let mut r = pade(&scaled, 13)?;
    for _ in 0..s {
        r = &r * &r;
    }
    check_finite(&r, "matrix_exp result")?;
    Ok(r)
}

/// `exp(scale · a)`.
pub fn matrix_exp(a: &FockOperator, scale: C64) -> Result<FockOperator> {
    let m = expm(&(a.entries() * scale))?;
    FockOperator::new(*a.layout(), m, format!("exp({scale}·{})", a.label()))
}
