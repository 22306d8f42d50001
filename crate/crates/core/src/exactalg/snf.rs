//! Smith normal form over the local ring `Q[x]_(x)`, using power series truncated at `x^N`.

use num_traits::Zero;
use serde::Serialize;

use super::polymatrix::PolyMatrix;
use super::qmatrix::QMat;
use super::rational::{int, Rational};
use super::AlgError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SnfResult {
    /// x-adic valuations of the nonzero invariant factors, weakly increasing.
    pub valuations: Vec<u32>,
    pub truncation: u32,
}

type Series = Vec<Rational>;

fn valuation(s: &Series) -> Option<u32> {
    s.iter().position(|c| !c.is_zero()).map(|v| v as u32)
}

/// `a / b` where `b` has nonzero constant term, modulo `x^n`.
fn series_div(a: &[Rational], b: &[Rational], n: usize) -> Series {
    let mut q = vec![Rational::zero(); n];
    let mut rem: Series = a.iter().take(n).cloned().collect();
    rem.resize(n, Rational::zero());
    let b0 = &b[0];
    for i in 0..n {
        if rem[i].is_zero() {
            continue;
        }
        let c = &rem[i] / b0;
        for (j, bj) in b.iter().enumerate() {
            if i + j >= n {
                break;
            }
            if !bj.is_zero() {
                rem[i + j] -= &c * bj;
            }
        }
        q[i] = c;
    }
    q
}

fn series_mul(a: &[Rational], b: &[Rational], n: usize) -> Series {
    let mut out = vec![Rational::zero(); n];
    for (i, ai) in a.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
        for (j, bj) in b.iter().enumerate().take(n.saturating_sub(i)) {
            if !bj.is_zero() {
                out[i + j] += ai * bj;
            }
        }
    }
    out
}

/// Univariate coefficient lists (full length) of a matrix in the single variable `x`.
fn univariate_entries(s: &PolyMatrix) -> Result<Vec<Vec<Series>>, AlgError> {
    let ctx = s.ctx();
    let x = ctx.var("x");
    let mut out = Vec::with_capacity(s.rows());
    for i in 0..s.rows() {
        let mut row = Vec::with_capacity(s.cols());
        for j in 0..s.cols() {
            let p = s.get(i, j);
            let allowed: Vec<usize> = x.into_iter().collect();
            if !p.uses_only(&allowed) {
                return Err(AlgError::VariableMismatch(format!(
                    "entry ({i},{j}) = {p} is not a polynomial in x alone"
                )));
            }
            let deg = x.map_or(0, |v| p.degree_in(v)) as usize;
            let mut coeffs = vec![Rational::zero(); deg + 1];
            for (m, c) in p.terms() {
                let e = x.map_or(0, |v| m[v]) as usize;
                coeffs[e] = c.clone();
            }
            row.push(coeffs);
        }
        out.push(row);
    }
    Ok(out)
}

fn eval_univariate(c: &[Rational], t: &Rational) -> Rational {
    c.iter().rev().fold(Rational::zero(), |acc, a| acc * t + a)
}

/// Rank over `Q(x)`, exact: a nonzero minor of degree `d` has at most `d` roots.
fn generic_rank(entries: &[Vec<Series>], rows: usize, cols: usize) -> usize {
    let maxdeg = entries
        .iter()
        .flatten()
        .map(|c| c.len().saturating_sub(1))
        .max()
        .unwrap_or(0);
    let bound = rows.min(cols);
    let points = bound * maxdeg + 1;
    let mut best = 0;
    for t in 0..points {
        let t = int(t as i64);
        let mut m = QMat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = eval_univariate(&entries[i][j], &t);
            }
        }
        best = best.max(m.rank());
        if best == bound {
            break;
        }
    }
    best
}

/// Invariant factors `x^v` of a matrix over `Q[x]_(x)`, computed at precision `n`.
pub fn snf_dvr(s: &PolyMatrix, n: u32) -> Result<SnfResult, AlgError> {
    if n == 0 {
        return Err(AlgError::Shape("truncation must be at least 1".into()));
    }
    let full = univariate_entries(s)?;
    let (rows, cols) = (s.rows(), s.cols());
    let rank = generic_rank(&full, rows, cols);
    let n_us = n as usize;
    let mut m: Vec<Vec<Series>> = full
        .iter()
        .map(|row| {
            row.iter()
                .map(|c| {
                    let mut t: Series = c.iter().take(n_us).cloned().collect();
                    t.resize(n_us, Rational::zero());
                    t
                })
                .collect()
        })
        .collect();
    let mut valuations = Vec::new();
    for d in 0..rows.min(cols) {
        let mut best: Option<(u32, usize, usize)> = None;
        for i in d..rows {
            for j in d..cols {
                if let Some(v) = valuation(&m[i][j]) {
                    if best.is_none_or(|(bv, _, _)| v < bv) {
                        best = Some((v, i, j));
                    }
                }
            }
        }
        let Some((v, pi, pj)) = best else { break };
        m.swap(d, pi);
        for row in m.iter_mut() {
            row.swap(d, pj);
        }
        let vu = v as usize;
        let unit: Series = m[d][d][vu..].to_vec();
        let prec = n_us - vu;
        // Row operations clear column d.
        for i in d + 1..rows {
            if valuation(&m[i][d]).is_none() {
                continue;
            }
            let q = series_div(&m[i][d][vu..], &unit, prec);
            for j in d..cols {
                let t = series_mul(&q, &m[d][j], n_us);
                for (a, b) in m[i][j].iter_mut().zip(&t) {
                    *a -= b;
                }
            }
        }
        // Column operations clear row d.
        for j in d + 1..cols {
            if valuation(&m[d][j]).is_none() {
                continue;
            }
            let q = series_div(&m[d][j][vu..], &unit, prec);
            for i in d..rows {
                let t = series_mul(&q, &m[i][d], n_us);
                for (a, b) in m[i][j].iter_mut().zip(&t) {
                    *a -= b;
                }
            }
        }
        valuations.push(v);
    }
    if valuations.len() < rank {
        return Err(AlgError::PrecisionExhausted { truncation: n });
    }
    valuations.sort_unstable();
    Ok(SnfResult {
        valuations,
        truncation: n,
    })
}
