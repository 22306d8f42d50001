use std::collections::HashMap;

use super::poly::{same_ctx, Ctx, Poly};
use super::qmatrix::QMat;
use super::rational::Rational;
use super::AlgError;

/// Rectangular matrix of polynomials over one variable context.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PolyMatrix {
    ctx: Ctx,
    rows: usize,
    cols: usize,
    entries: Vec<Poly>,
}

impl PolyMatrix {
    pub fn zeros(ctx: &Ctx, rows: usize, cols: usize) -> PolyMatrix {
        PolyMatrix {
            ctx: ctx.clone(),
            rows,
            cols,
            entries: vec![Poly::zero(ctx); rows * cols],
        }
    }

    pub fn from_fn(ctx: &Ctx, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Poly) -> PolyMatrix {
        let mut m = PolyMatrix::zeros(ctx, rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn from_rows(ctx: &Ctx, rows: Vec<Vec<Poly>>) -> Result<PolyMatrix, AlgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(AlgError::Shape("ragged polynomial matrix".into()));
        }
        let entries: Vec<Poly> = rows.into_iter().flatten().collect();
        if entries.iter().any(|p| !same_ctx(p.ctx(), ctx)) {
            return Err(AlgError::VariableMismatch(
                "matrix entry uses a different context".into(),
            ));
        }
        Ok(PolyMatrix {
            ctx: ctx.clone(),
            rows: r,
            cols: c,
            entries,
        })
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: Poly) {
        assert!(same_ctx(p.ctx(), &self.ctx), "matrix entry context mismatch");
        self.entries[i * self.cols + j] = p;
    }

    pub fn entries(&self) -> &[Poly] {
        &self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<Poly>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).clone()).collect())
            .collect()
    }

    pub fn map(&self, f: impl Fn(&Poly) -> Poly) -> PolyMatrix {
        PolyMatrix {
            ctx: self.ctx.clone(),
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn transpose(&self) -> PolyMatrix {
        PolyMatrix::from_fn(&self.ctx, self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, other: &PolyMatrix) -> Result<PolyMatrix, AlgError> {
        if self.cols != other.rows {
            return Err(AlgError::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = PolyMatrix::zeros(&self.ctx, self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Poly::zero(&self.ctx);
                for t in 0..self.cols {
                    let a = self.get(i, t);
                    let b = other.get(t, j);
                    if !a.is_zero() && !b.is_zero() {
                        acc += &(a * b);
                    }
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Poly::is_zero)
    }

    /// Removes row `r`.
    pub fn delete_row(&self, r: usize) -> PolyMatrix {
        let keep: Vec<usize> = (0..self.rows).filter(|&i| i != r).collect();
        PolyMatrix::from_fn(&self.ctx, keep.len(), self.cols, |i, j| self.get(keep[i], j).clone())
    }

    /// Determinant by Laplace expansion memoized over column subsets.
    pub fn det(&self) -> Result<Poly, AlgError> {
        if self.rows != self.cols {
            return Err(AlgError::Shape(format!(
                "determinant of non-square {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(Poly::one(&self.ctx));
        }
        assert!(n < 64, "matrix too large for subset expansion");
        let mut memo: HashMap<u64, Poly> = HashMap::new();
        Ok(self.det_rec(0, (1u64 << n) - 1, &mut memo))
    }

    fn det_rec(&self, row: usize, cols: u64, memo: &mut HashMap<u64, Poly>) -> Poly {
        if row == self.rows {
            return Poly::one(&self.ctx);
        }
        if let Some(p) = memo.get(&cols) {
            return p.clone();
        }
        let mut acc = Poly::zero(&self.ctx);
        let mut sign_pos = true;
        for c in 0..self.cols {
            if cols & (1 << c) == 0 {
                continue;
            }
            let a = self.get(row, c);
            if !a.is_zero() {
                let minor = self.det_rec(row + 1, cols & !(1 << c), memo);
                if !minor.is_zero() {
                    let t = a * &minor;
                    if sign_pos {
                        acc += &t;
                    } else {
                        acc -= &t;
                    }
                }
            }
            sign_pos = !sign_pos;
        }
        memo.insert(cols, acc.clone());
        acc
    }

    /// Evaluates every entry at a full point.
    pub fn eval(&self, point: &[Rational]) -> QMat {
        let mut m = QMat::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self.get(i, j).eval(point);
            }
        }
        m
    }
}

/// `(det S_0, -det S_1, ..., (-1)^k det S_k)` where `S_j` omits row `j`.
pub fn signed_maximal_minors(s: &PolyMatrix) -> Result<Vec<Poly>, AlgError> {
    let k = s.cols();
    if k == 0 || s.rows() != k + 1 {
        return Err(AlgError::Shape(format!(
            "expected a (k+1)xk matrix with k >= 1, got {}x{}",
            s.rows(),
            s.cols()
        )));
    }
    (0..=k)
        .map(|j| {
            let d = s.delete_row(j).det()?;
            Ok(if j % 2 == 0 { d } else { -d })
        })
        .collect()
}
