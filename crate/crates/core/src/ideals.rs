//! Gröbner bases of ideals in `Q[x, y]`, standard-monomial bases and
//! multiplication matrices on finite-dimensional quotients.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::exactalg::{AlgError, Ctx, Poly, QMat, Rational, VarContext};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Default)]
pub enum MonomialOrder {
    #[default]
    DegRevLex,
    Lex,
}

/// Exponent pair `(a, b)` of `x^a y^b`.
pub type Exp = (u32, u32);

type Key = (u32, u32, u32);

impl MonomialOrder {
    fn key(self, (a, b): Exp) -> Key {
        match self {
            MonomialOrder::DegRevLex => (a + b, a, b),
            MonomialOrder::Lex => (0, a, b),
        }
    }
}

fn exp_of(k: &Key) -> Exp {
    (k.1, k.2)
}

fn divides(a: Exp, b: Exp) -> bool {
    a.0 <= b.0 && a.1 <= b.1
}

/// Internal bivariate polynomial, terms keyed so the leading term is last.
#[derive(Clone, Debug, PartialEq, Eq)]
struct BPoly {
    order: MonomialOrder,
    terms: BTreeMap<Key, Rational>,
}

impl BPoly {
    fn zero(order: MonomialOrder) -> BPoly {
        BPoly {
            order,
            terms: BTreeMap::new(),
        }
    }

    fn from_poly(p: &Poly, order: MonomialOrder) -> Result<BPoly, AlgError> {
        let ctx = p.ctx();
        let (xv, yv) = (ctx.var("x"), ctx.var("y"));
        let allowed: Vec<usize> = xv.into_iter().chain(yv).collect();
        if !p.uses_only(&allowed) {
            return Err(AlgError::VariableMismatch(format!(
                "{p} is not a polynomial in x and y"
            )));
        }
        let mut out = BPoly::zero(order);
        for (m, c) in p.terms() {
            let a = xv.map_or(0, |v| m[v]) as u32;
            let b = yv.map_or(0, |v| m[v]) as u32;
            out.add_term((a, b), c.clone());
        }
        Ok(out)
    }

    fn to_poly(&self, ctx: &Ctx) -> Poly {
        let (xv, yv) = (ctx.var("x").unwrap(), ctx.var("y").unwrap());
        let mut out = Poly::zero(ctx);
        for (k, c) in &self.terms {
            let (a, b) = exp_of(k);
            out += &Poly::monomial(ctx, &[(xv, a as u16), (yv, b as u16)], c.clone());
        }
        out
    }

    fn add_term(&mut self, e: Exp, c: Rational) {
        if c.is_zero() {
            return;
        }
        let k = self.order.key(e);
        let entry = self.terms.entry(k).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&k);
        }
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn lead(&self) -> Option<(Exp, &Rational)> {
        self.terms.iter().next_back().map(|(k, c)| (exp_of(k), c))
    }

    fn lm(&self) -> Exp {
        self.lead().expect("zero polynomial has no leading monomial").0
    }

    fn degree(&self) -> u32 {
        self.terms.keys().map(|k| k.1 + k.2).max().unwrap_or(0)
    }

    fn make_monic(&mut self) {
        if let Some((_, c)) = self.lead() {
            let inv = c.recip();
            for v in self.terms.values_mut() {
                *v *= &inv;
            }
        }
    }

    /// `self -= c * x^e * g`.
    fn sub_scaled(&mut self, c: &Rational, e: Exp, g: &BPoly) {
        for (k, gc) in &g.terms {
            let (a, b) = exp_of(k);
            self.add_term((a + e.0, b + e.1), -(c * gc));
        }
    }
}

/// Reduced Gröbner basis of an ideal of `Q[x, y]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroebnerBasis {
    order: MonomialOrder,
    basis: Vec<BPoly>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Colength {
    Finite(usize),
    Infinite,
}

impl fmt::Display for Colength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Colength::Finite(n) => write!(f, "{n}"),
            Colength::Infinite => write!(f, "INFINITE"),
        }
    }
}

/// Standard monomials of a zero-dimensional ideal, in ascending monomial order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Staircase {
    pub monomials: Vec<Exp>,
}

impl Staircase {
    pub fn position(&self, e: Exp) -> Option<usize> {
        self.monomials.iter().position(|&m| m == e)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum IdealError {
    #[error(transparent)]
    Alg(#[from] AlgError),
    #[error("the quotient ring is infinite-dimensional")]
    InfiniteDimension,
}

pub fn groebner(gens: &[Poly]) -> Result<GroebnerBasis, AlgError> {
    groebner_with_order(gens, MonomialOrder::DegRevLex)
}

pub fn groebner_with_order(gens: &[Poly], order: MonomialOrder) -> Result<GroebnerBasis, AlgError> {
    let polys = gens
        .iter()
        .map(|g| BPoly::from_poly(g, order))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GroebnerBasis {
        order,
        basis: buchberger(polys, order),
    })
}

fn reduce(p: &BPoly, basis: &[BPoly]) -> BPoly {
    let mut rem = BPoly::zero(p.order);
    let mut cur = p.clone();
    while let Some((e, c)) = cur.lead().map(|(e, c)| (e, c.clone())) {
        match basis.iter().find(|g| divides(g.lm(), e)) {
            Some(g) => {
                let (ge, gc) = g.lead().unwrap();
                let q = &c / gc;
                cur.sub_scaled(&q, (e.0 - ge.0, e.1 - ge.1), g);
            }
            None => {
                cur.terms.remove(&p.order.key(e));
                rem.add_term(e, c);
            }
        }
    }
    rem
}

struct Pair {
    sugar: u32,
    lcm: Exp,
    i: usize,
    j: usize,
}

fn buchberger(gens: Vec<BPoly>, order: MonomialOrder) -> Vec<BPoly> {
    let mut basis: Vec<BPoly> = Vec::new();
    let mut sugar: Vec<u32> = Vec::new();
    let mut pairs: Vec<Pair> = Vec::new();
    let add = |g: BPoly, s: u32, basis: &mut Vec<BPoly>, sugar: &mut Vec<u32>, pairs: &mut Vec<Pair>| {
        let n = basis.len();
        let gl = g.lm();
        for (i, h) in basis.iter().enumerate() {
            let hl = h.lm();
            let lcm = (gl.0.max(hl.0), gl.1.max(hl.1));
            let si = sugar[i] + (lcm.0 + lcm.1 - hl.0 - hl.1);
            let sn = s + (lcm.0 + lcm.1 - gl.0 - gl.1);
            pairs.push(Pair {
                sugar: si.max(sn),
                lcm,
                i,
                j: n,
            });
        }
        basis.push(g);
        sugar.push(s);
    };
    for g in gens {
        let mut r = reduce(&g, &basis);
        if r.is_zero() {
            continue;
        }
        r.make_monic();
        let s = g.degree();
        add(r, s, &mut basis, &mut sugar, &mut pairs);
    }
    while !pairs.is_empty() {
        let idx = (0..pairs.len())
            .min_by_key(|&t| {
                let p = &pairs[t];
                (p.sugar, order.key(p.lcm), p.i, p.j)
            })
            .unwrap();
        let Pair { sugar: s, lcm, i, j } = pairs.swap_remove(idx);
        let (li, lj) = (basis[i].lm(), basis[j].lm());
        // Coprime leading monomials: the S-polynomial reduces to zero.
        if li.0.min(lj.0) == 0 && li.1.min(lj.1) == 0 {
            continue;
        }
        let mut sp = BPoly::zero(order);
        let ci = basis[i].lead().unwrap().1.clone();
        let cj = basis[j].lead().unwrap().1.clone();
        sp.sub_scaled(&-ci.recip(), (lcm.0 - li.0, lcm.1 - li.1), &basis[i]);
        sp.sub_scaled(&cj.recip(), (lcm.0 - lj.0, lcm.1 - lj.1), &basis[j]);
        let mut r = reduce(&sp, &basis);
        if r.is_zero() {
            continue;
        }
        r.make_monic();
        add(r, s, &mut basis, &mut sugar, &mut pairs);
    }
    interreduce(basis)
}

fn interreduce(basis: Vec<BPoly>) -> Vec<BPoly> {
    let mut minimal: Vec<BPoly> = Vec::new();
    let mut sorted = basis;
    sorted.sort_by_key(|g| g.order.key(g.lm()));
    for g in sorted {
        if !minimal.iter().any(|h| divides(h.lm(), g.lm())) {
            minimal.push(g);
        }
    }
    let mut out = Vec::with_capacity(minimal.len());
    for t in 0..minimal.len() {
        let others: Vec<BPoly> = minimal
            .iter()
            .enumerate()
            .filter(|&(s, _)| s != t)
            .map(|(_, g)| g.clone())
            .collect();
        let g = &minimal[t];
        let (e, c) = g.lead().map(|(e, c)| (e, c.clone())).unwrap();
        let mut tail = g.clone();
        tail.terms.remove(&g.order.key(e));
        let mut r = reduce(&tail, &others);
        r.add_term(e, c);
        r.make_monic();
        out.push(r);
    }
    out
}

impl GroebnerBasis {
    pub fn order(&self) -> MonomialOrder {
        self.order
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// Generators as polynomials over the `x, y` context.
    pub fn generators(&self) -> Vec<Poly> {
        let ctx = VarContext::xy();
        self.basis.iter().map(|g| g.to_poly(&ctx)).collect()
    }

    pub fn leading_monomials(&self) -> Vec<Exp> {
        self.basis.iter().map(BPoly::lm).collect()
    }

    pub fn is_unit(&self) -> bool {
        self.basis.len() == 1 && self.basis[0].lm() == (0, 0)
    }

    pub fn normal_form(&self, p: &Poly) -> Result<Poly, AlgError> {
        let b = BPoly::from_poly(p, self.order)?;
        Ok(reduce(&b, &self.basis).to_poly(&VarContext::xy()))
    }

    pub fn contains(&self, p: &Poly) -> Result<bool, AlgError> {
        let b = BPoly::from_poly(p, self.order)?;
        Ok(reduce(&b, &self.basis).is_zero())
    }

    /// Ideal containment `self ⊆ other`.
    pub fn is_subset_of(&self, other: &GroebnerBasis) -> bool {
        self.basis.iter().all(|g| {
            let g = BPoly {
                order: other.order,
                terms: g
                    .terms
                    .iter()
                    .map(|(k, c)| (other.order.key(exp_of(k)), c.clone()))
                    .collect(),
            };
            reduce(&g, &other.basis).is_zero()
        })
    }

    /// Sum ideal `I + (extra)`.
    pub fn with_generators(&self, extra: &[Poly]) -> Result<GroebnerBasis, AlgError> {
        let mut gens = self.generators();
        gens.extend(
            extra
                .iter()
                .map(|p| p.to_ctx(&VarContext::xy()))
                .collect::<Result<Vec<_>, _>>()?,
        );
        groebner_with_order(&gens, self.order)
    }

    pub fn colength(&self) -> Colength {
        self.staircase_and_colength().1
    }

    pub fn staircase_and_colength(&self) -> (Staircase, Colength) {
        let lms = self.leading_monomials();
        let xb = lms.iter().filter(|e| e.1 == 0).map(|e| e.0).min();
        let yb = lms.iter().filter(|e| e.0 == 0).map(|e| e.1).min();
        let (Some(xb), Some(yb)) = (xb, yb) else {
            return (Staircase { monomials: vec![] }, Colength::Infinite);
        };
        let mut monomials: Vec<Exp> = (0..xb)
            .flat_map(|a| (0..yb).map(move |b| (a, b)))
            .filter(|&e| !lms.iter().any(|&l| divides(l, e)))
            .collect();
        monomials.sort_by_key(|&e| self.order.key(e));
        let n = monomials.len();
        (Staircase { monomials }, Colength::Finite(n))
    }

    fn staircase(&self) -> Result<Staircase, IdealError> {
        match self.staircase_and_colength() {
            (s, Colength::Finite(_)) => Ok(s),
            (_, Colength::Infinite) => Err(IdealError::InfiniteDimension),
        }
    }

    /// Coordinates of the normal form of `p` in the staircase basis.
    pub fn coordinates(&self, p: &Poly) -> Result<Vec<Rational>, IdealError> {
        let st = self.staircase()?;
        let b = BPoly::from_poly(p, self.order)?;
        Ok(self.coords_of(&reduce(&b, &self.basis), &st))
    }

    fn coords_of(&self, r: &BPoly, st: &Staircase) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); st.monomials.len()];
        for (k, c) in &r.terms {
            let pos = st.position(exp_of(k)).expect("normal form lies in the staircase span");
            v[pos] = c.clone();
        }
        v
    }

    /// Matrix of multiplication by `p`; column `t` holds the coordinates of `p * b_t`.
    pub fn multiplication_matrix_of(&self, p: &Poly) -> Result<QMat, IdealError> {
        let st = self.staircase()?;
        let bp = BPoly::from_poly(p, self.order)?;
        let n = st.monomials.len();
        let mut m = QMat::zeros(n, n);
        for (t, &e) in st.monomials.iter().enumerate() {
            let mut prod = BPoly::zero(self.order);
            prod.sub_scaled(&-Rational::one(), e, &bp);
            let v = self.coords_of(&reduce(&prod, &self.basis), &st);
            for (s, c) in v.into_iter().enumerate() {
                m[(s, t)] = c;
            }
        }
        Ok(m)
    }

    /// Multiplication by `x` (`Var::X`) or `y` (`Var::Y`) on the quotient.
    pub fn multiplication_matrix(&self, var: Var) -> Result<QMat, IdealError> {
        let ctx = VarContext::xy();
        self.multiplication_matrix_of(&Poly::var(&ctx, var as usize))
    }

    /// Division of `p` by the basis: `p = sum q_i g_i + r`.
    pub fn divide(&self, p: &Poly) -> Result<(Vec<Poly>, Poly), AlgError> {
        let ctx = VarContext::xy();
        let mut quot = vec![BPoly::zero(self.order); self.basis.len()];
        let mut rem = BPoly::zero(self.order);
        let mut cur = BPoly::from_poly(p, self.order)?;
        while let Some((e, c)) = cur.lead().map(|(e, c)| (e, c.clone())) {
            match self.basis.iter().position(|g| divides(g.lm(), e)) {
                Some(i) => {
                    let g = &self.basis[i];
                    let (ge, gc) = g.lead().unwrap();
                    let q = &c / gc;
                    let shift = (e.0 - ge.0, e.1 - ge.1);
                    quot[i].add_term(shift, q.clone());
                    cur.sub_scaled(&q, shift, g);
                }
                None => {
                    cur.terms.remove(&self.order.key(e));
                    rem.add_term(e, c);
                }
            }
        }
        Ok((quot.iter().map(|q| q.to_poly(&ctx)).collect(), rem.to_poly(&ctx)))
    }

    /// Generators of the syzygy module of the basis elements (Schreyer's S-pair syzygies).
    pub fn syzygies(&self) -> Vec<Vec<Poly>> {
        let ctx = VarContext::xy();
        let n = self.basis.len();
        let gens = self.generators();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let (li, lj) = (self.basis[i].lm(), self.basis[j].lm());
                let lcm = (li.0.max(lj.0), li.1.max(lj.1));
                let mi = Poly::monomial(
                    &ctx,
                    &[(0, (lcm.0 - li.0) as u16), (1, (lcm.1 - li.1) as u16)],
                    Rational::one(),
                );
                let mj = Poly::monomial(
                    &ctx,
                    &[(0, (lcm.0 - lj.0) as u16), (1, (lcm.1 - lj.1) as u16)],
                    Rational::one(),
                );
                let sp = &(&mi * &gens[i]) - &(&mj * &gens[j]);
                let (q, r) = self.divide(&sp).expect("bivariate input");
                debug_assert!(r.is_zero(), "Gröbner basis S-pair must reduce to zero");
                let mut syz: Vec<Poly> = q.into_iter().map(|p| -p).collect();
                syz[i] += &mi;
                syz[j] -= &mj;
                out.push(syz);
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    X = 0,
    Y = 1,
}

impl fmt::Display for GroebnerBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g: Vec<String> = self.generators().iter().map(ToString::to_string).collect();
        write!(f, "({})", g.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::{int, parse_poly, parse_poly_list};

    fn ideal(src: &str) -> GroebnerBasis {
        groebner(&parse_poly_list(&VarContext::xy(), src).unwrap()).unwrap()
    }

    fn p(src: &str) -> Poly {
        parse_poly(&VarContext::xy(), src).unwrap()
    }

    #[test]
    fn maximal_ideal() {
        let g = ideal("x, y");
        assert_eq!(g.to_string(), "(y, x)");
        assert_eq!(g.colength(), Colength::Finite(1));
    }

    #[test]
    fn curvilinear_ideal() {
        let g = ideal("y^2, x*y, x^2 - y");
        let (st, len) = g.staircase_and_colength();
        assert_eq!(len, Colength::Finite(3));
        let mut m = st.monomials.clone();
        m.sort();
        assert_eq!(m, vec![(0, 0), (0, 1), (1, 0)]);
        assert_eq!(g.normal_form(&p("x^2")).unwrap(), p("y"));
    }

    #[test]
    fn monomial_ideal_is_reduced() {
        let g = ideal("x^3, x*y, y^2");
        assert_eq!(g.len(), 3);
        let (st, len) = g.staircase_and_colength();
        assert_eq!(len, Colength::Finite(4));
        let mut m = st.monomials;
        m.sort();
        assert_eq!(m, vec![(0, 0), (0, 1), (1, 0), (2, 0)]);
        assert!(!g.contains(&p("x^2")).unwrap());
        assert!(ideal("x, y").contains(&p("x^2 + x*y")).unwrap());
    }

    #[test]
    fn infinite_and_zero() {
        assert_eq!(ideal("x").colength(), Colength::Infinite);
        assert!(groebner(&[]).unwrap().is_empty());
        assert!(ideal("x - 1, x").is_unit());
        assert_eq!(ideal("x - 1, x").colength(), Colength::Finite(0));
    }

    #[test]
    fn multiplication_matrices() {
        let g = ideal("x^3, x*y, y^2");
        let my = g.multiplication_matrix(Var::Y).unwrap();
        assert_eq!(my.rank(), 1);
        assert!((&my * &my).is_zero());
        let mx = g.multiplication_matrix(Var::X).unwrap();
        assert_eq!(&mx * &my, &my * &mx);
        let pt = ideal("x - 3, y + 1/2");
        let m = pt.multiplication_matrix(Var::X).unwrap();
        assert_eq!(m[(0, 0)], int(3));
        assert!(matches!(
            ideal("x").multiplication_matrix(Var::X),
            Err(IdealError::InfiniteDimension)
        ));
    }

    #[test]
    fn lex_order() {
        let g = groebner_with_order(
            &parse_poly_list(&VarContext::xy(), "y^2, x*y, x^2 - y").unwrap(),
            MonomialOrder::Lex,
        )
        .unwrap();
        let (st, len) = g.staircase_and_colength();
        assert_eq!(len, Colength::Finite(3));
        assert_eq!(st.monomials, vec![(0, 0), (0, 1), (1, 0)]);
    }

    #[test]
    fn syzygies_vanish() {
        let g = ideal("y^2 + x^3, x^2*y, x*y^2");
        let gens = g.generators();
        for s in g.syzygies() {
            let sum = s
                .iter()
                .zip(&gens)
                .fold(Poly::zero(&VarContext::xy()), |acc, (a, b)| acc + a * b);
            assert!(sum.is_zero());
        }
    }

    #[test]
    fn division_identity() {
        let g = ideal("x^2 - y, x*y - 1");
        let f = p("x^3*y + 2*x*y^2 - 7");
        let (q, r) = g.divide(&f).unwrap();
        let recon = q.iter().zip(g.generators()).fold(r.clone(), |acc, (a, b)| acc + a * &b);
        assert_eq!(recon, f);
        assert_eq!(g.normal_form(&f).unwrap(), r);
    }
}
