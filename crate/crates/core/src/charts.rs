//! The triangular chart: coordinates `E[i][j]` (column `i`, row `j`) and
//! `C[i][j]`, the linear transforms between them, the syzygy matrix
//! `S_E(x,y)` and its ideal of maximal minors.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::exactalg::{signed_maximal_minors, AlgError, Ctx, Poly, PolyMatrix, QMat, Rational, VarContext};
use crate::ideals::{groebner, GroebnerBasis, IdealError};

/// Coordinate index: column `i` in `0..k`, row `j` in `0..=k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CoordIndex {
    pub i: usize,
    pub j: usize,
}

impl CoordIndex {
    pub fn new(i: usize, j: usize) -> CoordIndex {
        CoordIndex { i, j }
    }
}

/// All coordinates of the size-`k` chart, column-major (`i` outer, `j` inner).
pub fn coords(k: usize) -> Vec<CoordIndex> {
    (0..k).flat_map(|i| (0..=k).map(move |j| CoordIndex { i, j })).collect()
}

/// Position of a coordinate in [`coords`].
pub fn coord_pos(k: usize, c: CoordIndex) -> usize {
    c.i * (k + 1) + c.j
}

fn in_range(k: usize, i: i64, j: i64) -> Option<CoordIndex> {
    (i >= 0 && (i as usize) < k && j >= 0 && (j as usize) <= k).then(|| CoordIndex::new(i as usize, j as usize))
}

/// `C_i^j` as a signed sum of `E` coordinates.
pub fn haiman_in_es(k: usize, c: CoordIndex) -> Vec<(i64, CoordIndex)> {
    let (i, j) = (c.i as i64, c.j as i64);
    if j > i {
        (0..=i)
            .filter_map(|t| in_range(k, j - 1 - t, i - t).map(|e| (1, e)))
            .collect()
    } else {
        (0..(k as i64 - i))
            .filter_map(|t| in_range(k, j + t, i + 1 + t).map(|e| (-1, e)))
            .collect()
    }
}

/// `E_i^j = C_j^{i+1} - C_{j-1}^i` with out-of-range terms dropped.
pub fn es_in_haiman(k: usize, e: CoordIndex) -> Vec<(i64, CoordIndex)> {
    let (i, j) = (e.i as i64, e.j as i64);
    let mut out = Vec::new();
    if let Some(c) = in_range(k, j, i + 1) {
        out.push((1, c));
    }
    if let Some(c) = in_range(k, j - 1, i) {
        out.push((-1, c));
    }
    out
}

/// Values that chart transforms can act on.
pub trait ChartValue: Clone + PartialEq {
    fn zero_like(&self) -> Self;
    fn add_signed(&self, sign: i64, other: &Self) -> Self;
}

impl ChartValue for Rational {
    fn zero_like(&self) -> Self {
        Rational::zero()
    }
    fn add_signed(&self, sign: i64, other: &Self) -> Self {
        if sign >= 0 {
            self + other
        } else {
            self - other
        }
    }
}

impl ChartValue for Poly {
    fn zero_like(&self) -> Self {
        Poly::zero(self.ctx())
    }
    fn add_signed(&self, sign: i64, other: &Self) -> Self {
        if sign >= 0 {
            self + other
        } else {
            self - other
        }
    }
}

/// A `(k+1) x k` array, `rows[j][i]` holding the value at column `i`, row `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChartPoint<T> {
    k: usize,
    rows: Vec<Vec<T>>,
}

pub type RationalChart = ChartPoint<Rational>;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ChartError {
    #[error("chart shape error: {0}")]
    Shape(String),
    #[error("missing Haiman coefficient c^{j}_({a},{b})")]
    MissingCoefficient { j: usize, a: usize, b: usize },
    #[error("the triangular monomials are not a basis of the quotient")]
    NotInChart,
    #[error(transparent)]
    Alg(#[from] AlgError),
    #[error(transparent)]
    Ideal(#[from] IdealError),
}

impl<T: ChartValue> ChartPoint<T> {
    pub fn new(k: usize, rows: Vec<Vec<T>>) -> Result<ChartPoint<T>, ChartError> {
        if k == 0 || rows.len() != k + 1 || rows.iter().any(|r| r.len() != k) {
            return Err(ChartError::Shape(format!("expected {} rows of length {k}", k + 1)));
        }
        Ok(ChartPoint { k, rows })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, c: CoordIndex) -> &T {
        &self.rows[c.j][c.i]
    }

    /// Value at column `i`, row `j`.
    pub fn at(&self, i: usize, j: usize) -> &T {
        &self.rows[j][i]
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    fn apply(&self, f: impl Fn(usize, CoordIndex) -> Vec<(i64, CoordIndex)>) -> ChartPoint<T> {
        let zero = self.rows[0][0].zero_like();
        let rows = (0..=self.k)
            .map(|j| {
                (0..self.k)
                    .map(|i| {
                        f(self.k, CoordIndex::new(i, j))
                            .into_iter()
                            .fold(zero.clone(), |acc, (s, c)| acc.add_signed(s, self.get(c)))
                    })
                    .collect()
            })
            .collect();
        ChartPoint { k: self.k, rows }
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> ChartPoint<U> {
        ChartPoint {
            k: self.k,
            rows: self.rows.iter().map(|r| r.iter().map(&f).collect()).collect(),
        }
    }
}

/// Haiman coordinates `C` of a chart point given in `E` coordinates.
pub fn es_to_haiman<T: ChartValue>(e: &ChartPoint<T>) -> ChartPoint<T> {
    e.apply(haiman_in_es)
}

/// `E` coordinates of a chart point given in Haiman coordinates `C`.
pub fn haiman_to_es<T: ChartValue>(c: &ChartPoint<T>) -> ChartPoint<T> {
    c.apply(es_in_haiman)
}

impl RationalChart {
    pub fn from_qmat(m: &QMat) -> Result<RationalChart, ChartError> {
        let k = m.cols();
        ChartPoint::new(k, m.to_rows())
    }

    pub fn to_qmat(&self) -> QMat {
        QMat::from_rows(self.rows.clone())
    }

    pub fn zero(k: usize) -> RationalChart {
        ChartPoint {
            k,
            rows: vec![vec![Rational::zero(); k]; k + 1],
        }
    }

    pub fn scale(&self, u: &Rational) -> RationalChart {
        self.map(|v| v * u)
    }
}

/// The chart point whose entries are the symbols `E[i][j]` of the chart context.
pub fn symbolic_es(k: usize) -> ChartPoint<Poly> {
    let ctx = VarContext::chart(k);
    ChartPoint {
        k,
        rows: (0..=k)
            .map(|j| (0..k).map(|i| Poly::var(&ctx, ctx.e_var(i, j))).collect())
            .collect(),
    }
}

/// The chart point whose entries are the symbols `C[i][j]` of the chart context.
pub fn symbolic_cs(k: usize) -> ChartPoint<Poly> {
    let ctx = VarContext::chart(k);
    ChartPoint {
        k,
        rows: (0..=k)
            .map(|j| (0..k).map(|i| Poly::var(&ctx, ctx.c_var(i, j))).collect())
            .collect(),
    }
}

fn syzygy_entries(ctx: &Ctx, k: usize, value: impl Fn(usize, usize) -> Poly) -> PolyMatrix {
    let x = Poly::var(ctx, ctx.var("x").expect("context has x"));
    let y = Poly::var(ctx, ctx.var("y").expect("context has y"));
    PolyMatrix::from_fn(ctx, k + 1, k, |j, i| {
        let mut p = value(i, j);
        if j == i {
            p -= &x;
        }
        if j == i + 1 {
            p += &y;
        }
        p
    })
}

/// `S_E(x,y) = E - x [I_k; 0] + y [0; I_k]` over the `x, y` context.
pub fn syzygy_matrix(e: &RationalChart) -> PolyMatrix {
    let ctx = VarContext::xy();
    syzygy_entries(&ctx, e.k, |i, j| Poly::constant(&ctx, e.at(i, j).clone()))
}

/// `S_E(x,y)` for polynomial entries (their context must declare `x` and `y`).
pub fn syzygy_matrix_poly(e: &ChartPoint<Poly>) -> PolyMatrix {
    let ctx = e.at(0, 0).ctx().clone();
    syzygy_entries(&ctx, e.k, |i, j| e.at(i, j).clone())
}

/// Gröbner basis of the ideal of signed maximal minors of `S_E`.
pub fn hilbert_burch_ideal(e: &RationalChart) -> GroebnerBasis {
    let minors = signed_maximal_minors(&syzygy_matrix(e)).expect("(k+1) x k shape");
    groebner(&minors).expect("bivariate minors")
}

/// Monomials `x^a y^b` with `a + b <= k - 1`, in a fixed order.
pub fn triangle_monomials(k: usize) -> Vec<(u32, u32)> {
    (0..k as u32).flat_map(|d| (0..=d).map(move |a| (a, d - a))).collect()
}

/// Coefficients `c^j_{ab}` of the Haiman relations `x^j y^{k-j} = sum c^j_{ab} x^a y^b`.
pub type HaimanCoefficients = BTreeMap<(usize, u32, u32), Rational>;

pub enum HaimanData<'a> {
    /// Only the top-degree block `C_i^j = c^j_{i, k-1-i}`.
    Leading(&'a RationalChart),
    /// All coefficients `c^j_{ab}` with `a + b <= k - 1`.
    Full(&'a HaimanCoefficients),
}

/// `f_j = x^j y^{k-j} - sum c^j_{ab} x^a y^b` for `j = 0..=k`.
pub fn haiman_generators(k: usize, data: HaimanData<'_>) -> Result<Vec<Poly>, ChartError> {
    let ctx = VarContext::xy();
    let mono = |a: u32, b: u32, c: Rational| Poly::monomial(&ctx, &[(0, a as u16), (1, b as u16)], c);
    (0..=k)
        .map(|j| {
            let mut f = mono(j as u32, (k - j) as u32, Rational::one());
            match &data {
                HaimanData::Leading(c) => {
                    if c.k() != k {
                        return Err(ChartError::Shape("chart size mismatch".into()));
                    }
                    for i in 0..k {
                        f -= mono(i as u32, (k - 1 - i) as u32, c.at(i, j).clone());
                    }
                }
                HaimanData::Full(map) => {
                    for (a, b) in triangle_monomials(k) {
                        let c = map.get(&(j, a, b)).ok_or(ChartError::MissingCoefficient {
                            j,
                            a: a as usize,
                            b: b as usize,
                        })?;
                        f -= mono(a, b, c.clone());
                    }
                }
            }
            Ok(f)
        })
        .collect()
}

/// All Haiman coefficients of the ideal of a chart point, by expressing
/// `x^j y^{k-j}` in the triangular monomial basis of the quotient.
pub fn haiman_coefficients(e: &RationalChart) -> Result<HaimanCoefficients, ChartError> {
    let k = e.k();
    let ctx = VarContext::xy();
    let ideal = hilbert_burch_ideal(e);
    let tri = triangle_monomials(k);
    let mono = |a: u32, b: u32| Poly::monomial(&ctx, &[(0, a as u16), (1, b as u16)], Rational::one());
    let cols: Vec<Vec<Rational>> = tri
        .iter()
        .map(|&(a, b)| ideal.coordinates(&mono(a, b)))
        .collect::<Result<_, _>>()?;
    let t = QMat::from_rows(cols).transpose();
    if t.rows() != tri.len() || t.rank() < tri.len() {
        return Err(ChartError::NotInChart);
    }
    let mut out = HaimanCoefficients::new();
    for j in 0..=k {
        let target = ideal.coordinates(&mono(j as u32, (k - j) as u32))?;
        let c = t.solve(&target).ok_or(ChartError::NotInChart)?;
        for (&(a, b), v) in tri.iter().zip(c) {
            out.insert((j, a, b), v);
        }
    }
    Ok(out)
}

/// The leading block `C_i^j = c^j_{i,k-1-i}` of a full coefficient table.
pub fn leading_block(k: usize, c: &HaimanCoefficients) -> RationalChart {
    ChartPoint {
        k,
        rows: (0..=k)
            .map(|j| (0..k).map(|i| c[&(j, i as u32, (k - 1 - i) as u32)].clone()).collect())
            .collect(),
    }
}

/// The chart point of a reduced subscheme of `k(k+1)/2` points, via a
/// Vandermonde solve on the triangular monomials.
pub fn chart_from_points(k: usize, points: &[(Rational, Rational)]) -> Result<RationalChart, ChartError> {
    let tri = triangle_monomials(k);
    if points.len() != tri.len() {
        return Err(ChartError::Shape(format!("need {} points for k={k}", tri.len())));
    }
    let pw = |v: &Rational, e: u32| num_traits::pow(v.clone(), e as usize);
    let v = QMat::from_rows(
        points
            .iter()
            .map(|(px, py)| tri.iter().map(|&(a, b)| pw(px, a) * pw(py, b)).collect())
            .collect(),
    );
    let vi = v.inverse().ok_or(ChartError::NotInChart)?;
    let mut c = HaimanCoefficients::new();
    for j in 0..=k {
        let vals: Vec<Rational> = points
            .iter()
            .map(|(px, py)| pw(px, j as u32) * pw(py, (k - j) as u32))
            .collect();
        for (&(a, b), val) in tri.iter().zip(vi.mul_vec(&vals)) {
            c.insert((j, a, b), val);
        }
    }
    Ok(haiman_to_es(&leading_block(k, &c)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::{int, parse_poly, parse_poly_list, rat};
    use crate::ideals::Colength;
    use crate::random;

    fn chart(rows: &[&[i64]]) -> RationalChart {
        let k = rows[0].len();
        ChartPoint::new(k, rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect()).unwrap()
    }

    #[test]
    fn k1_transform() {
        let e = chart(&[&[3], &[5]]);
        let c = es_to_haiman(&e);
        assert_eq!(c.at(0, 0), &int(-5));
        assert_eq!(c.at(0, 1), &int(3));
        assert_eq!(haiman_to_es(&c), e);
        assert_eq!(es_to_haiman(&RationalChart::zero(3)), RationalChart::zero(3));
    }

    #[test]
    fn symbolic_roundtrip_and_halves() {
        for k in 1..=4 {
            let e = symbolic_es(k);
            assert_eq!(haiman_to_es(&es_to_haiman(&e)), e);
            let c = symbolic_cs(k);
            assert_eq!(es_to_haiman(&haiman_to_es(&c)), c);
            // C_i^j with j <= i only involves E_a^b with b >= a + 1, and vice versa.
            for ci in coords(k) {
                for (_, ec) in haiman_in_es(k, ci) {
                    assert_eq!(ci.j <= ci.i, ec.j > ec.i);
                }
            }
        }
    }

    #[test]
    fn random_roundtrip() {
        let mut rng = random::rng(7);
        for k in 1..=4 {
            for _ in 0..5 {
                let e = RationalChart::from_qmat(&random::matrix(&mut rng, k + 1, k, 4)).unwrap();
                assert_eq!(haiman_to_es(&es_to_haiman(&e)), e);
            }
        }
    }

    #[test]
    fn syzygy_shapes() {
        let s = syzygy_matrix_poly(&symbolic_es(1));
        let strs: Vec<String> = s.entries().iter().map(ToString::to_string).collect();
        assert_eq!(strs, ["-x + E[0][0]", "y + E[0][1]"]);
        let z = syzygy_matrix(&RationalChart::zero(2));
        let strs: Vec<String> = z.entries().iter().map(ToString::to_string).collect();
        assert_eq!(strs, ["-x", "0", "y", "-x", "0", "y"]);
    }

    #[test]
    fn homogeneity() {
        let mut rng = random::rng(3);
        let ctx = VarContext::xy();
        let x = Poly::var(&ctx, 0);
        let y = Poly::var(&ctx, 1);
        for k in 1..=3 {
            let e = RationalChart::from_qmat(&random::matrix(&mut rng, k + 1, k, 3)).unwrap();
            let u = rat(3, 2);
            let lhs = syzygy_matrix(&e).map(|p| p.substitute_all(&[(0, x.scale(&u)), (1, y.scale(&u))]));
            let rhs = syzygy_matrix(&e.scale(&u.recip())).map(|p| p.scale(&u));
            assert_eq!(lhs, rhs);
            // Weight one: the ideal of uE is the dilation of the ideal of E.
            let ie = hilbert_burch_ideal(&e);
            let iu = hilbert_burch_ideal(&e.scale(&u));
            let dil: Vec<Poly> = ie
                .generators()
                .iter()
                .map(|g| g.substitute_all(&[(0, x.scale(&u.recip())), (1, y.scale(&u.recip()))]))
                .collect();
            assert_eq!(groebner(&dil).unwrap(), iu);
        }
    }

    #[test]
    fn hilbert_burch_examples() {
        let g = hilbert_burch_ideal(&chart(&[&[2], &[7]]));
        assert_eq!(g.to_string(), "(y + 7, x - 2)");
        let g = hilbert_burch_ideal(&RationalChart::zero(2));
        assert_eq!(g.colength(), Colength::Finite(3));
        let g = hilbert_burch_ideal(&chart(&[&[0, 1], &[0, 0], &[0, 0]]));
        let expect = groebner(&parse_poly_list(&VarContext::xy(), "y^2, x*y, x^2 - y").unwrap()).unwrap();
        assert_eq!(g, expect);
    }

    #[test]
    fn colength_on_random_points() {
        let mut rng = random::rng(11);
        for k in 1..=3 {
            for _ in 0..4 {
                let e = RationalChart::from_qmat(&random::matrix(&mut rng, k + 1, k, 3)).unwrap();
                assert_eq!(hilbert_burch_ideal(&e).colength(), Colength::Finite(k * (k + 1) / 2));
                let minors = signed_maximal_minors(&syzygy_matrix(&e)).unwrap();
                let row = PolyMatrix::from_rows(&VarContext::xy(), vec![minors]).unwrap();
                assert!(row.mul(&syzygy_matrix(&e)).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn haiman_generator_examples() {
        let ctx = VarContext::xy();
        let g = haiman_generators(1, HaimanData::Leading(&RationalChart::zero(1))).unwrap();
        assert_eq!(g, vec![parse_poly(&ctx, "y").unwrap(), parse_poly(&ctx, "x").unwrap()]);
        let c = chart(&[&[4], &[-2]]);
        let g = haiman_generators(1, HaimanData::Leading(&c)).unwrap();
        assert_eq!(g[0].to_string(), "y - 4");
        assert_eq!(g[1].to_string(), "x + 2");
        let partial = HaimanCoefficients::new();
        assert!(matches!(
            haiman_generators(1, HaimanData::Full(&partial)),
            Err(ChartError::MissingCoefficient { .. })
        ));
    }

    #[test]
    fn normal_forms_reproduce_haiman_block() {
        let mut rng = random::rng(5);
        for k in 1..=3 {
            for _ in 0..4 {
                let e = RationalChart::from_qmat(&random::matrix(&mut rng, k + 1, k, 3)).unwrap();
                let coeffs = haiman_coefficients(&e).unwrap();
                assert_eq!(leading_block(k, &coeffs), es_to_haiman(&e));
                let gens = haiman_generators(k, HaimanData::Full(&coeffs)).unwrap();
                let ideal = hilbert_burch_ideal(&e);
                assert_eq!(groebner(&gens).unwrap(), ideal);
            }
        }
    }

    #[test]
    fn points_roundtrip() {
        let pts: Vec<(Rational, Rational)> = vec![(int(1), int(2)), (int(-1), int(3)), (int(2), rat(1, 2))];
        let e = chart_from_points(2, &pts).unwrap();
        let ideal = hilbert_burch_ideal(&e);
        let ctx = VarContext::xy();
        for (px, py) in &pts {
            for g in ideal.generators() {
                assert!(g.eval(&[px.clone(), py.clone()]).is_zero());
            }
        }
        assert_eq!(ideal.colength(), Colength::Finite(3));
        let _ = ctx;
    }
}
