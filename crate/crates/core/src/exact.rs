//! Exact rational linear algebra: determinants, ranks, small solves, and
//! float-to-rational snapping. These back the certification steps that turn
//! floating-point spectra into exact bounds.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

/// Nearest rational with denominator at most `max_den` within `tol` of `x`,
/// found by walking the continued-fraction convergents. Returns `None` when
/// no convergent is close enough.
pub fn snap_to_rational(x: f64, max_den: u64, tol: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let make = |num: i128, den: i128| BigRational::new(BigInt::from(num), BigInt::from(den));
    // convergents h_k / k_k of the continued fraction of x
    let mut h_prev: i128 = 1;
    let mut k_prev: i128 = 0;
    let mut h: i128 = x.floor() as i128;
    let mut k: i128 = 1;
    let mut frac = x - x.floor();
    for _ in 0..64 {
        let approx = h as f64 / k as f64;
        if (approx - x).abs() <= tol {
            return Some(make(h, k));
        }
        if frac.abs() < 1e-15 {
            break;
        }
        let rec = 1.0 / frac;
        let a = rec.floor();
        if !(a.is_finite()) || a >= 1e18 {
            break;
        }
        frac = rec - a;
        let a = a as i128;
        let (h_next, k_next) = (a * h + h_prev, a * k + k_prev);
        h_prev = h;
        k_prev = k;
        h = h_next;
        k = k_next;
        if k as u128 > max_den as u128 {
            break;
        }
    }
    let approx = h.to_f64()? / k.to_f64()?;
    if k as u128 <= max_den as u128 && (approx - x).abs() <= tol {
        return Some(make(h, k));
    }
    None
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = 1i32;
    let mut prev = BigInt::one();
    for i in 0..n - 1 {
        if m[i][i].is_zero() {
            match (i + 1..n).find(|&r| !m[r][i].is_zero()) {
                Some(r) => {
                    m.swap(i, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for r in i + 1..n {
            for c in i + 1..n {
                let num = &m[r][c] * &m[i][i] - &m[r][i] * &m[i][c];
                m[r][c] = num / &prev;
            }
            m[r][i] = BigInt::zero();
        }
        prev = m[i][i].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if sign < 0 {
        -det
    } else {
        det
    }
}

/// Rank of a rational matrix by Gaussian elimination.
pub fn rational_rank(mut rows: Vec<Vec<BigRational>>) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let ncols = rows[0].len();
    let mut rank = 0;
    let mut col = 0;
    while rank < rows.len() && col < ncols {
        let pivot = (rank..rows.len()).find(|&r| !rows[r][col].is_zero());
        let Some(p) = pivot else {
            col += 1;
            continue;
        };
        rows.swap(rank, p);
        let inv = rows[rank][col].recip();
        for c in col..ncols {
            let v = &rows[rank][c] * &inv;
            rows[rank][c] = v;
        }
        for r in 0..rows.len() {
            if r != rank && !rows[r][col].is_zero() {
                let factor = rows[r][col].clone();
                for c in col..ncols {
                    let v = &rows[r][c] - &factor * &rows[rank][c];
                    rows[r][c] = v;
                }
            }
        }
        rank += 1;
        col += 1;
    }
    rank
}

/// Solves a square rational system exactly; `None` when singular.
pub fn solve_square(a: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let n = a.len();
    let mut m: Vec<Vec<BigRational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    for i in 0..n {
        let pivot = (i..n).find(|&r| !m[r][i].is_zero())?;
        m.swap(i, pivot);
        let inv = m[i][i].recip();
        for c in i..=n {
            let v = &m[i][c] * &inv;
            m[i][c] = v;
        }
        for r in 0..n {
            if r != i && !m[r][i].is_zero() {
                let factor = m[r][i].clone();
                for c in i..=n {
                    let v = &m[r][c] - &factor * &m[i][c];
                    m[r][c] = v;
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[n].clone()).collect())
}

pub fn rat_int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_to_f64(r: &BigRational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

/// Renders a rational as `"num/den"`, always including the denominator.
pub fn format_ratio(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"num/den"` or a bare integer.
pub fn parse_ratio(s: &str) -> Option<BigRational> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(BigRational::new(n, d))
}

/// Floors a rational to a BigInt.
pub fn rat_floor(r: &BigRational) -> BigInt {
    r.floor().to_integer()
}
