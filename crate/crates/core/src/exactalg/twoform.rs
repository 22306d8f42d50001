use std::collections::BTreeMap;
use std::fmt;

use super::poly::{same_ctx, Ctx, Poly};
use super::polymatrix::PolyMatrix;
use super::AlgError;

/// Formal 1-form `sum_v a_v dv`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OneForm {
    ctx: Ctx,
    coeffs: BTreeMap<usize, Poly>,
}

impl OneForm {
    pub fn zero(ctx: &Ctx) -> OneForm {
        OneForm {
            ctx: ctx.clone(),
            coeffs: BTreeMap::new(),
        }
    }

    /// Exterior derivative of a function.
    pub fn d(p: &Poly) -> OneForm {
        let ctx = p.ctx().clone();
        let coeffs = (0..ctx.len())
            .map(|v| (v, p.derivative(v)))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        OneForm { ctx, coeffs }
    }

    pub fn coeffs(&self) -> &BTreeMap<usize, Poly> {
        &self.coeffs
    }

    pub fn add(&self, other: &OneForm) -> OneForm {
        let mut out = self.clone();
        for (v, c) in &other.coeffs {
            let e = out.coeffs.entry(*v).or_insert_with(|| Poly::zero(&self.ctx));
            *e += c;
        }
        out.coeffs.retain(|_, c| !c.is_zero());
        out
    }

    pub fn wedge(&self, other: &OneForm) -> TwoForm {
        let mut out = TwoForm::zero(&self.ctx);
        for (u, a) in &self.coeffs {
            for (v, b) in &other.coeffs {
                out.add_term(*u, *v, &(a * b));
            }
        }
        out
    }
}

/// Formal 2-form stored on ordered pairs `(u, v)` with `u < v`; `dv ^ du = -du ^ dv`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoForm {
    ctx: Ctx,
    coeffs: BTreeMap<(usize, usize), Poly>,
}

impl TwoForm {
    pub fn zero(ctx: &Ctx) -> TwoForm {
        TwoForm {
            ctx: ctx.clone(),
            coeffs: BTreeMap::new(),
        }
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    /// Adds `c du ^ dv`.
    pub fn add_term(&mut self, u: usize, v: usize, c: &Poly) {
        if u == v || c.is_zero() {
            return;
        }
        let (key, c) = if u < v { ((u, v), c.clone()) } else { ((v, u), -c) };
        let e = self.coeffs.entry(key).or_insert_with(|| Poly::zero(&self.ctx));
        *e += &c;
        if e.is_zero() {
            self.coeffs.remove(&key);
        }
    }

    /// Coefficient of `du ^ dv` (antisymmetric in the arguments).
    pub fn coeff(&self, u: usize, v: usize) -> Poly {
        if u == v {
            return Poly::zero(&self.ctx);
        }
        if u < v {
            self.coeffs
                .get(&(u, v))
                .cloned()
                .unwrap_or_else(|| Poly::zero(&self.ctx))
        } else {
            -self.coeff(v, u)
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(usize, usize), &Poly)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &TwoForm) -> TwoForm {
        let mut out = self.clone();
        for ((u, v), c) in &other.coeffs {
            out.add_term(*u, *v, c);
        }
        out
    }

    pub fn neg(&self) -> TwoForm {
        TwoForm {
            ctx: self.ctx.clone(),
            coeffs: self.coeffs.iter().map(|(k, c)| (*k, -c)).collect(),
        }
    }
}

impl fmt::Display for TwoForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|((u, v), c)| {
                let wedge = format!("d{}^d{}", self.ctx.name(*u), self.ctx.name(*v));
                match c.as_constant() {
                    Some(r) if r == num_traits::One::one() => wedge,
                    _ => format!("({c})*{wedge}"),
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// `Tr(dA ^ dB) = sum_{i,j} d(A_ij) ^ d(B_ji)`.
pub fn trace_d_wedge_d(a: &PolyMatrix, b: &PolyMatrix) -> Result<TwoForm, AlgError> {
    let n = a.rows();
    if a.cols() != n || b.rows() != n || b.cols() != n {
        return Err(AlgError::Shape(format!(
            "trace pairing needs equal square matrices, got {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    if !same_ctx(a.ctx(), b.ctx()) {
        return Err(AlgError::VariableMismatch("matrices use different contexts".into()));
    }
    let mut out = TwoForm::zero(a.ctx());
    for i in 0..n {
        for j in 0..n {
            let da = OneForm::d(a.get(i, j));
            let db = OneForm::d(b.get(j, i));
            out = out.add(&da.wedge(&db));
        }
    }
    Ok(out)
}
