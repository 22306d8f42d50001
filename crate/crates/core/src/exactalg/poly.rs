use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{One, Signed, Zero};

use super::rational::{format_rational, Rational};
use super::AlgError;

/// An ordered, immutable set of variable names shared by polynomials.
#[derive(Debug)]
pub struct VarContext {
    names: Vec<String>,
    index: HashMap<String, usize>,
    chart_k: Option<usize>,
}

impl PartialEq for VarContext {
    fn eq(&self, other: &VarContext) -> bool {
        self.names == other.names
    }
}

impl Eq for VarContext {}

pub type Ctx = Arc<VarContext>;

impl VarContext {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Ctx {
        Arc::new(Self::build(names.into_iter().map(Into::into).collect(), None))
    }

    fn build(names: Vec<String>, chart_k: Option<usize>) -> VarContext {
        let index = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect::<HashMap<_, _>>();
        assert_eq!(index.len(), names.len(), "duplicate variable names");
        VarContext { names, index, chart_k }
    }

    /// The shared context `x, y, E[i][j], C[i][j]` for chart size `k`.
    pub fn chart(k: usize) -> Ctx {
        static CACHE: OnceLock<Mutex<HashMap<usize, Ctx>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut guard = cache.lock().expect("context cache poisoned");
        guard
            .entry(k)
            .or_insert_with(|| {
                let mut names = vec!["x".to_string(), "y".to_string()];
                for sym in ["E", "C"] {
                    for i in 0..k {
                        for j in 0..=k {
                            names.push(format!("{sym}[{i}][{j}]"));
                        }
                    }
                }
                Arc::new(Self::build(names, Some(k)))
            })
            .clone()
    }

    /// The shared context with only `x` and `y`.
    pub fn xy() -> Ctx {
        static XY: OnceLock<Ctx> = OnceLock::new();
        XY.get_or_init(|| VarContext::new(["x", "y"])).clone()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn var(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn chart_k(&self) -> Option<usize> {
        self.chart_k
    }

    /// Index of `E[i][j]` in a chart context.
    pub fn e_var(&self, i: usize, j: usize) -> usize {
        let k = self.chart_k.expect("not a chart context");
        assert!(i < k && j <= k, "E[{i}][{j}] out of range for k={k}");
        2 + i * (k + 1) + j
    }

    /// Index of `C[i][j]` in a chart context.
    pub fn c_var(&self, i: usize, j: usize) -> usize {
        let k = self.chart_k.expect("not a chart context");
        assert!(i < k && j <= k, "C[{i}][{j}] out of range for k={k}");
        2 + k * (k + 1) + i * (k + 1) + j
    }
}

pub fn same_ctx(a: &Ctx, b: &Ctx) -> bool {
    Arc::ptr_eq(a, b) || a.names == b.names
}

/// Dense exponent vector over the variables of a context.
pub type Mono = Box<[u16]>;

/// Sparse polynomial with rational coefficients; zero coefficients are never stored.
#[derive(Clone)]
pub struct Poly {
    ctx: Ctx,
    terms: BTreeMap<Mono, Rational>,
}

impl Poly {
    pub fn zero(ctx: &Ctx) -> Poly {
        Poly {
            ctx: ctx.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(ctx: &Ctx, c: Rational) -> Poly {
        let mut p = Poly::zero(ctx);
        if !c.is_zero() {
            p.terms.insert(vec![0; ctx.len()].into(), c);
        }
        p
    }

    pub fn one(ctx: &Ctx) -> Poly {
        Poly::constant(ctx, Rational::one())
    }

    pub fn var(ctx: &Ctx, v: usize) -> Poly {
        Poly::monomial(ctx, &[(v, 1)], Rational::one())
    }

    pub fn var_named(ctx: &Ctx, name: &str) -> Result<Poly, AlgError> {
        ctx.var(name)
            .map(|v| Poly::var(ctx, v))
            .ok_or_else(|| AlgError::VariableMismatch(name.to_string()))
    }

    /// `c * prod var^exp`.
    pub fn monomial(ctx: &Ctx, powers: &[(usize, u16)], c: Rational) -> Poly {
        let mut m = vec![0u16; ctx.len()];
        for &(v, e) in powers {
            m[v] += e;
        }
        let mut p = Poly::zero(ctx);
        if !c.is_zero() {
            p.terms.insert(m.into(), c);
        }
        p
    }

    pub fn from_terms(ctx: &Ctx, terms: impl IntoIterator<Item = (Mono, Rational)>) -> Poly {
        let mut p = Poly::zero(ctx);
        for (m, c) in terms {
            assert_eq!(m.len(), ctx.len(), "exponent vector length mismatch");
            p.add_term(m, c);
        }
        p
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant value if the polynomial has no variable terms.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.iter().all(|&e| e == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn coeff(&self, m: &[u16]) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(mono_degree).max()
    }

    pub fn is_homogeneous(&self, d: u32) -> bool {
        self.terms.keys().all(|m| mono_degree(m) == d)
    }

    /// Degree in a single variable.
    pub fn degree_in(&self, v: usize) -> u16 {
        self.terms.keys().map(|m| m[v]).max().unwrap_or(0)
    }

    pub fn uses_only(&self, vars: &[usize]) -> bool {
        self.terms
            .keys()
            .all(|m| m.iter().enumerate().all(|(v, &e)| e == 0 || vars.contains(&v)))
    }

    fn add_term(&mut self, m: Mono, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    fn check_ctx(&self, other: &Poly) {
        assert!(same_ctx(&self.ctx, &other.ctx), "polynomial variable contexts differ");
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(&self.ctx);
        }
        Poly {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn mul_mono(&self, m: &[u16], c: &Rational) -> Poly {
        let mut out = Poly::zero(&self.ctx);
        if c.is_zero() {
            return out;
        }
        for (a, x) in &self.terms {
            let e: Mono = a.iter().zip(m).map(|(p, q)| p + q).collect();
            out.terms.insert(e, x * c);
        }
        out
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::one(&self.ctx);
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn derivative(&self, v: usize) -> Poly {
        let mut out = Poly::zero(&self.ctx);
        for (m, c) in &self.terms {
            if m[v] == 0 {
                continue;
            }
            let mut e = m.clone();
            e[v] -= 1;
            out.add_term(e, c * Rational::from_integer(m[v].into()));
        }
        out
    }

    /// Replaces variable `v` by `q`.
    pub fn substitute(&self, v: usize, q: &Poly) -> Poly {
        self.check_ctx(q);
        let maxe = self.degree_in(v) as usize;
        let mut powers = vec![Poly::one(&self.ctx)];
        for i in 1..=maxe {
            let next = &powers[i - 1] * q;
            powers.push(next);
        }
        let mut out = Poly::zero(&self.ctx);
        for (m, c) in &self.terms {
            let mut rest = m.clone();
            let e = rest[v] as usize;
            rest[v] = 0;
            out += &powers[e].mul_mono(&rest, c);
        }
        out
    }

    pub fn substitute_named(&self, name: &str, q: &Poly) -> Result<Poly, AlgError> {
        let v = self
            .ctx
            .var(name)
            .ok_or_else(|| AlgError::VariableMismatch(name.to_string()))?;
        if !same_ctx(&self.ctx, &q.ctx) {
            return Err(AlgError::VariableMismatch(
                "substituted polynomial uses a different context".into(),
            ));
        }
        Ok(self.substitute(v, q))
    }

    /// Substitutes many variables simultaneously.
    pub fn substitute_all(&self, subs: &[(usize, Poly)]) -> Poly {
        let mut maps: Vec<Option<&Poly>> = vec![None; self.ctx.len()];
        for (v, q) in subs {
            self.check_ctx(q);
            maps[*v] = Some(q);
        }
        let mut cache: HashMap<(usize, u16), Poly> = HashMap::new();
        let mut out = Poly::zero(&self.ctx);
        for (m, c) in &self.terms {
            let mut rest = m.clone();
            let mut t = Poly::one(&self.ctx);
            for (v, q) in maps.iter().enumerate() {
                if let Some(q) = q {
                    if rest[v] > 0 {
                        let e = rest[v];
                        rest[v] = 0;
                        let pw = cache.entry((v, e)).or_insert_with(|| q.pow(e as u32));
                        t = &t * &*pw;
                    }
                }
            }
            out += &t.mul_mono(&rest, c);
        }
        out
    }

    /// Evaluates at a full point (one value per context variable).
    pub fn eval(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.ctx.len());
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, &e) in m.iter().enumerate() {
                if e > 0 {
                    t *= num_traits::pow(point[v].clone(), e as usize);
                }
            }
            acc += t;
        }
        acc
    }

    /// Substitutes rational values for some variables.
    pub fn eval_partial(&self, values: &[(usize, Rational)]) -> Poly {
        let mut out = Poly::zero(&self.ctx);
        for (m, c) in &self.terms {
            let mut e = m.clone();
            let mut t = c.clone();
            for (v, val) in values {
                let p = e[*v];
                if p > 0 {
                    t *= num_traits::pow(val.clone(), p as usize);
                    e[*v] = 0;
                }
            }
            out.add_term(e, t);
        }
        out
    }

    /// Re-expresses the polynomial in another context, mapping variables by name.
    pub fn to_ctx(&self, ctx: &Ctx) -> Result<Poly, AlgError> {
        if same_ctx(&self.ctx, ctx) {
            return Ok(Poly {
                ctx: ctx.clone(),
                terms: self.terms.clone(),
            });
        }
        let map: Vec<Option<usize>> = self.ctx.names.iter().map(|n| ctx.var(n)).collect();
        let mut out = Poly::zero(ctx);
        for (m, c) in &self.terms {
            let mut e = vec![0u16; ctx.len()];
            for (v, &p) in m.iter().enumerate() {
                if p > 0 {
                    let w = map[v].ok_or_else(|| AlgError::VariableMismatch(self.ctx.names[v].clone()))?;
                    e[w] += p;
                }
            }
            out.add_term(e.into(), c.clone());
        }
        Ok(out)
    }

    /// Monomials and coefficients ordered by descending degree, then descending exponents.
    pub fn sorted_terms(&self) -> Vec<(&Mono, &Rational)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| mono_degree(b.0).cmp(&mono_degree(a.0)).then_with(|| b.0.cmp(a.0)));
        v
    }

    pub fn to_latex(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut s = String::new();
        for (n, (m, c)) in self.sorted_terms().into_iter().enumerate() {
            let neg = c.is_negative();
            if n == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let a = c.abs();
            let is_const = m.iter().all(|&e| e == 0);
            if !a.is_one() || is_const {
                if a.is_integer() {
                    s.push_str(&a.numer().to_string());
                } else {
                    s.push_str(&format!("\\tfrac{{{}}}{{{}}}", a.numer(), a.denom()));
                }
            }
            for (v, &e) in m.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let v = latex_var(self.ctx.name(v));
                if e > 1 {
                    s.push_str(&format!("{{{v}}}^{{{e}}}"));
                } else {
                    s.push_str(&v);
                }
            }
        }
        s
    }
}

fn latex_var(name: &str) -> String {
    let parts: Vec<&str> = name.split(['[', ']']).filter(|p| !p.is_empty()).collect();
    match parts.as_slice() {
        [sym, i, j] => format!("{sym}_{{{i}}}^{{{j}}}"),
        _ => name.to_string(),
    }
}

pub fn mono_degree(m: &Mono) -> u32 {
    m.iter().map(|&e| e as u32).sum()
}

impl PartialEq for Poly {
    fn eq(&self, other: &Poly) -> bool {
        same_ctx(&self.ctx, &other.ctx) && self.terms == other.terms
    }
}

impl Eq for Poly {}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (n, (m, c)) in self.sorted_terms().into_iter().enumerate() {
            let neg = c.is_negative();
            if n == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            let a = c.abs();
            let factors: Vec<String> = m
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(v, &e)| {
                    if e == 1 {
                        self.ctx.name(v).to_string()
                    } else {
                        format!("{}^{e}", self.ctx.name(v))
                    }
                })
                .collect();
            if factors.is_empty() {
                write!(f, "{}", format_rational(&a))?;
            } else {
                if !a.is_one() {
                    write!(f, "{}*", format_rational(&a))?;
                }
                write!(f, "{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}

impl AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        self.check_ctx(rhs);
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl SubAssign<&Poly> for Poly {
    fn sub_assign(&mut self, rhs: &Poly) {
        self.check_ctx(rhs);
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c);
        }
    }
}

impl Add<&Poly> for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&Poly> for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Mul<&Poly> for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        self.check_ctx(rhs);
        let mut out = Poly::zero(&self.ctx);
        for (a, x) in &self.terms {
            for (b, y) in &rhs.terms {
                let e: Mono = a.iter().zip(b.iter()).map(|(p, q)| p + q).collect();
                out.add_term(e, x * y);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr<Poly> for Poly {
            type Output = Poly;
            fn $f(self, rhs: Poly) -> Poly {
                (&self).$f(&rhs)
            }
        }
        impl $tr<&Poly> for Poly {
            type Output = Poly;
            fn $f(self, rhs: &Poly) -> Poly {
                (&self).$f(rhs)
            }
        }
        impl $tr<Poly> for &Poly {
            type Output = Poly;
            fn $f(self, rhs: Poly) -> Poly {
                self.$f(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl AddAssign<Poly> for Poly {
    fn add_assign(&mut self, rhs: Poly) {
        *self += &rhs;
    }
}

impl SubAssign<Poly> for Poly {
    fn sub_assign(&mut self, rhs: Poly) {
        *self -= &rhs;
    }
}
