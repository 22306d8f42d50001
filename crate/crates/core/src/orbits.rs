//! Orbit data along the divisor `y = 0`: Smith forms of `S_E(x, 0)`, torsion
//! Jordan types, perturbed syzygy matrices, the nodal normal forms, tangent
//! dimensions and intersection lengths with the divisor.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::charts::{hilbert_burch_ideal, syzygy_matrix, RationalChart};
use crate::exactalg::{signed_maximal_minors, snf_dvr, AlgError, Poly, PolyMatrix, QMat, Rational, VarContext};
use crate::ideals::{groebner, Colength, GroebnerBasis, IdealError, Var};
use crate::young::{transpose, YoungDiagram};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitDatum {
    pub diagram: YoungDiagram,
}

#[derive(Debug, thiserror::Error)]
pub enum OrbitError {
    #[error(transparent)]
    Alg(#[from] AlgError),
    #[error(transparent)]
    Ideal(#[from] IdealError),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid nodal series data: {0}")]
    InvalidSeries(String),
}

/// `S_E(x, 0)`.
pub fn restricted_syzygy_matrix(e: &RationalChart) -> PolyMatrix {
    syzygy_matrix(e).map(|p| p.eval_partial(&[(1, Rational::zero())]))
}

/// Positive valuations of the invariant factors of `S_E(x, 0)` over `Q[x]_(x)`,
/// largest first.
pub fn orbit_datum_smooth(e: &RationalChart) -> Result<OrbitDatum, OrbitError> {
    orbit_datum_with_truncation(e, e.k() as u32 + 2)
}

/// As [`orbit_datum_smooth`], starting from truncation order `n` and doubling
/// it while the precision runs out.
pub fn orbit_datum_with_truncation(e: &RationalChart, n: u32) -> Result<OrbitDatum, OrbitError> {
    let s = restricted_syzygy_matrix(e);
    let mut n = n.max(1);
    loop {
        match snf_dvr(&s, n) {
            Ok(r) => {
                let parts = r.valuations.into_iter().filter(|&v| v > 0).collect();
                return Ok(OrbitDatum {
                    diagram: YoungDiagram::from_unsorted(parts),
                });
            }
            Err(AlgError::PrecisionExhausted { .. }) if n < 64 * (e.k() as u32 + 1) => n *= 2,
            Err(err) => return Err(err.into()),
        }
    }
}

/// Jordan type at the origin of `x` acting on `ker(y : O/I -> O/I)`.
pub fn torsion_jordan_type(ideal: &GroebnerBasis) -> Result<YoungDiagram, OrbitError> {
    let mx = ideal.multiplication_matrix(Var::X)?;
    let my = ideal.multiplication_matrix(Var::Y)?;
    let kernel = my.nullspace();
    if kernel.is_empty() {
        return Ok(YoungDiagram::empty());
    }
    let d = kernel.len();
    let basis = QMat::from_rows(kernel.clone()).transpose();
    // X_K with Mx K = K X_K
    let cols: Vec<Vec<Rational>> = (0..d)
        .map(|c| {
            let img = mx.mul_vec(&kernel[c]);
            basis.solve(&img).expect("kernel of y is x-stable")
        })
        .collect();
    let xk = QMat::from_rows(cols).transpose();
    let mut ranks = vec![d];
    let mut pw = QMat::identity(d);
    for _ in 0..d {
        pw = &pw * &xk;
        ranks.push(pw.rank());
    }
    let at_least: Vec<u32> = ranks
        .windows(2)
        .map(|w| (w[0] - w[1]) as u32)
        .take_while(|&c| c > 0)
        .collect();
    Ok(transpose(&YoungDiagram::from_unsorted(at_least)))
}

/// `S_mu(x) = diag(x^{mu_j})` over a zero last row.
pub fn smith_form_matrix(mu: &YoungDiagram) -> PolyMatrix {
    let ctx = VarContext::xy();
    let k = mu.len();
    PolyMatrix::from_fn(&ctx, k + 1, k, |r, c| {
        if r == c {
            Poly::monomial(&ctx, &[(0, mu.part(r + 1) as u16)], Rational::one())
        } else {
            Poly::zero(&ctx)
        }
    })
}

/// Ideal of signed maximal minors of `S_mu(x) + y M`.
pub fn perturbed_syzygy_ideal(mu: &YoungDiagram, m: &QMat) -> Result<GroebnerBasis, OrbitError> {
    let k = mu.len();
    if k == 0 || m.rows() != k + 1 || m.cols() != k {
        return Err(OrbitError::Shape(format!(
            "M must be {} x {k} for a diagram of length {k}",
            k + 1
        )));
    }
    let ctx = VarContext::xy();
    let y = Poly::var(&ctx, 1);
    let base = smith_form_matrix(mu);
    let s = PolyMatrix::from_fn(&ctx, k + 1, k, |r, c| base.get(r, c) + &y.scale(&m[(r, c)]));
    Ok(groebner(&signed_maximal_minors(&s)?)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum NodalSeriesMatrix {
    /// `M(d, k, u)`; pairs are `(nu, mu)`, the exponents of `x` and `y`.
    Continuous {
        d: Vec<(u32, u32)>,
        k: usize,
        #[serde(serialize_with = "serialize_display")]
        u: Rational,
    },
    /// `D(d)`; pairs are `(nu, mu)`, the exponents of `x` and `y`.
    Discrete { d: Vec<(u32, u32)> },
}

fn serialize_display<S: serde::Serializer>(v: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

fn is_periodic(d: &[(u32, u32)]) -> bool {
    let l = d.len();
    (1..l).any(|p| l.is_multiple_of(p) && (0..l).all(|i| d[i] == d[(i + p) % l]))
}

fn xy_mono(ctx: &crate::exactalg::Ctx, nu: u32, mu: u32) -> Poly {
    Poly::monomial(ctx, &[(0, nu as u16), (1, mu as u16)], Rational::one())
}

pub fn nodal_series_matrix(series: &NodalSeriesMatrix) -> Result<PolyMatrix, OrbitError> {
    let ctx = VarContext::xy();
    match series {
        NodalSeriesMatrix::Continuous { d, k, u } => {
            let (l, k) = (d.len(), *k);
            if l == 0 || k == 0 {
                return Err(OrbitError::InvalidSeries("empty sequence or block size".into()));
            }
            if d.iter().any(|&(a, b)| a == 0 || b == 0) {
                return Err(OrbitError::InvalidSeries("exponents must be positive".into()));
            }
            if u.is_zero() {
                return Err(OrbitError::InvalidSeries("eigenvalue must be nonzero".into()));
            }
            if is_periodic(d) {
                return Err(OrbitError::InvalidSeries("sequence is periodic".into()));
            }
            let jordan = |r: usize, c: usize| -> Rational {
                if r == c {
                    u.clone()
                } else if c == r + 1 {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            };
            Ok(PolyMatrix::from_fn(&ctx, k * l, k * l, |r, c| {
                let (br, bc, ir, ic) = (r / k, c / k, r % k, c % k);
                let (nu, _) = d[br];
                if l == 1 {
                    let mut p = if ir == ic {
                        xy_mono(&ctx, nu, 0)
                    } else {
                        Poly::zero(&ctx)
                    };
                    p -= &xy_mono(&ctx, 0, d[0].1).scale(&jordan(ir, ic));
                    return p;
                }
                if br == bc && ir == ic {
                    xy_mono(&ctx, nu, 0)
                } else if br == bc + 1 && ir == ic {
                    xy_mono(&ctx, 0, d[bc].1)
                } else if br == 0 && bc == l - 1 {
                    xy_mono(&ctx, 0, d[l - 1].1).scale(&jordan(ir, ic))
                } else {
                    Poly::zero(&ctx)
                }
            }))
        }
        NodalSeriesMatrix::Discrete { d } => {
            if d.iter().any(|&(a, b)| a == 0 || b == 0) {
                return Err(OrbitError::InvalidSeries("exponents must be positive".into()));
            }
            let k = d.len();
            Ok(PolyMatrix::from_fn(&ctx, k + 1, k, |r, c| {
                if r == c {
                    xy_mono(&ctx, d[c].0, 0)
                } else if r == c + 1 {
                    xy_mono(&ctx, 0, d[c].1)
                } else {
                    Poly::zero(&ctx)
                }
            }))
        }
    }
}

/// `p(Mx, My)` for commuting matrices.
pub fn eval_at_matrices(p: &Poly, mx: &QMat, my: &QMat) -> QMat {
    let n = mx.rows();
    let mut out = QMat::zeros(n, n);
    for (mono, c) in p.terms() {
        let term = &mx.pow(mono[0] as u32) * &my.pow(mono[1] as u32);
        out = out.add(&term.scale(c));
    }
    out
}

/// Basis of `Hom(I, O/I)` from generators `g_r` of `I` and relations
/// `sum_r s_r g_r = 0` generating their syzygies. Each vector stacks the
/// coordinates of `phi(g_0), phi(g_1), ...` in the standard monomial basis.
pub fn hom_basis(
    ideal: &GroebnerBasis,
    relations: &[Vec<Poly>],
    generators: usize,
) -> Result<Vec<Vec<Rational>>, OrbitError> {
    let mx = ideal.multiplication_matrix(Var::X)?;
    let my = ideal.multiplication_matrix(Var::Y)?;
    let n = mx.rows();
    let unknowns = generators * n;
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for rel in relations {
        let blocks: Vec<QMat> = rel
            .iter()
            .map(|s| {
                let s = s.to_ctx(&VarContext::xy())?;
                Ok(eval_at_matrices(&s, &mx, &my))
            })
            .collect::<Result<_, AlgError>>()?;
        for i in 0..n {
            let mut row = vec![Rational::zero(); unknowns];
            for (r, b) in blocks.iter().enumerate() {
                for j in 0..n {
                    row[r * n + j] = b[(i, j)].clone();
                }
            }
            rows.push(row);
        }
    }
    if rows.is_empty() {
        return Ok(QMat::identity(unknowns).to_rows());
    }
    Ok(QMat::from_rows(rows).nullspace())
}

pub fn hom_dimension(ideal: &GroebnerBasis, relations: &[Vec<Poly>], generators: usize) -> Result<usize, OrbitError> {
    Ok(hom_basis(ideal, relations, generators)?.len())
}

/// Tangent dimension `dim Hom(I_E, O/I_E)` using the Hilbert-Burch generators
/// and the columns of `S_E` as their relations.
pub fn hom_tangent_dim(e: &RationalChart) -> Result<usize, OrbitError> {
    let s = syzygy_matrix(e);
    let ideal = hilbert_burch_ideal(e);
    let relations: Vec<Vec<Poly>> = (0..s.cols())
        .map(|c| (0..s.rows()).map(|r| s.get(r, c).clone()).collect())
        .collect();
    hom_dimension(&ideal, &relations, s.rows())
}

/// `dim Hom(I, O/I)` for any zero-dimensional ideal via its Schreyer syzygies.
pub fn hom_quotient_dim(ideal: &GroebnerBasis) -> Result<usize, OrbitError> {
    hom_dimension(ideal, &ideal.syzygies(), ideal.len())
}

/// Colength of `I + (g)`.
pub fn divisor_intersection_length(ideal: &GroebnerBasis, g: &Poly) -> Result<Colength, OrbitError> {
    Ok(ideal.with_generators(std::slice::from_ref(g))?.colength())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NilconeReport {
    pub intersection_length: Colength,
    pub last_minor_matches_charpoly: bool,
    pub top_block_nilpotent: bool,
    /// Whether `I + (y) = (x^k, y)`.
    pub meets_divisor_at_origin_only: bool,
}

/// Checks on a point of the `gl_k` locus (zero last row).
pub fn nilcone_check(e: &RationalChart) -> Result<NilconeReport, OrbitError> {
    let k = e.k();
    let ctx = VarContext::xy();
    let ideal = hilbert_burch_ideal(e);
    let y = Poly::var(&ctx, 1);
    let x = Poly::var(&ctx, 0);
    let intersection_length = divisor_intersection_length(&ideal, &y)?;
    let minors = signed_maximal_minors(&syzygy_matrix(e))?;
    let last = minors[k].eval_partial(&[(1, Rational::zero())]);
    let top = e.to_qmat();
    let char_mat = PolyMatrix::from_fn(&ctx, k, k, |r, c| {
        let mut p = Poly::constant(&ctx, -top[(r, c)].clone());
        if r == c {
            p += &x;
        }
        p
    });
    let charpoly = char_mat.det()?;
    let top_sq = QMat::from_rows((0..k).map(|r| top.row(r).to_vec()).collect());
    let top_block_nilpotent = top_sq.pow(k as u32).is_zero();
    let sum = ideal.with_generators(std::slice::from_ref(&y))?;
    let target = groebner(&[x.pow(k as u32), y])?;
    Ok(NilconeReport {
        intersection_length,
        last_minor_matches_charpoly: last == charpoly,
        top_block_nilpotent,
        meets_divisor_at_origin_only: sum == target,
    })
}

/// Sum of the rows of `E` below the top block, as a quick locus test.
pub fn in_gl_locus(e: &RationalChart) -> bool {
    let k = e.k();
    (0..k).all(|i| e.at(i, k).is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brackets::coadjoint_action;
    use crate::exactalg::{int, parse_poly, parse_poly_list, rat};
    use crate::random;
    use crate::young::{monomial_scheme_ideal, partitions};
    use rand::Rng;

    fn chart(rows: &[&[i64]]) -> RationalChart {
        RationalChart::from_qmat(&QMat::from_i64(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())).unwrap()
    }

    fn yd(p: &[u32]) -> YoungDiagram {
        YoungDiagram::new(p.to_vec()).unwrap()
    }

    fn ideal(s: &str) -> GroebnerBasis {
        groebner(&parse_poly_list(&VarContext::xy(), s).unwrap()).unwrap()
    }

    #[test]
    fn datum_examples() {
        let d = orbit_datum_smooth(&chart(&[&[0, 1], &[0, 0], &[0, 0]])).unwrap();
        assert_eq!(d.diagram, yd(&[2]));
        let d = orbit_datum_smooth(&chart(&[&[1, 0], &[0, 1], &[1, 1]])).unwrap();
        assert_eq!(d.diagram, YoungDiagram::empty());
        let d = orbit_datum_smooth(&RationalChart::zero(3)).unwrap();
        assert_eq!(d.diagram, yd(&[1, 1, 1]));
    }

    #[test]
    fn datum_invariant_under_action() {
        let mut rng = random::rng(21);
        for k in 1..=3 {
            for _ in 0..6 {
                let e = RationalChart::from_qmat(&random::chart_matrix(&mut rng, k)).unwrap();
                let g = random::invertible_matrix(&mut rng, k, 2);
                let v: Vec<Rational> = (0..k).map(|_| random::small_rational(&mut rng, 2)).collect();
                let moved = coadjoint_action(&g, &v, &e).unwrap();
                assert_eq!(orbit_datum_smooth(&e).unwrap(), orbit_datum_smooth(&moved).unwrap());
            }
        }
    }

    #[test]
    fn jordan_examples() {
        assert_eq!(
            torsion_jordan_type(&monomial_scheme_ideal(&yd(&[2, 1]))).unwrap(),
            yd(&[2, 1])
        );
        assert_eq!(torsion_jordan_type(&ideal("x, y")).unwrap(), yd(&[1]));
        assert_eq!(torsion_jordan_type(&ideal("x - 1, y")).unwrap(), YoungDiagram::empty());
        assert!(torsion_jordan_type(&ideal("y")).is_err());
    }

    #[test]
    fn jordan_type_of_monomial_schemes() {
        for n in 1..=6 {
            for mu in partitions(n) {
                assert_eq!(torsion_jordan_type(&monomial_scheme_ideal(&mu)).unwrap(), mu);
            }
        }
    }

    #[test]
    fn two_routes_agree() {
        let mut rng = random::rng(4);
        for k in 1..=3 {
            for _ in 0..8 {
                let e = RationalChart::from_qmat(&random::chart_matrix(&mut rng, k)).unwrap();
                let a = orbit_datum_smooth(&e).unwrap().diagram;
                let b = torsion_jordan_type(&hilbert_burch_ideal(&e)).unwrap();
                assert_eq!(a, b, "E = {:?}", e.rows());
            }
        }
    }

    #[test]
    fn perturbed_examples() {
        let g = perturbed_syzygy_ideal(&yd(&[1]), &QMat::zeros(2, 1)).unwrap();
        assert_eq!(g.colength(), Colength::Infinite);
        let g = perturbed_syzygy_ideal(&yd(&[1]), &QMat::from_i64(&[vec![0], vec![1]])).unwrap();
        assert_eq!(g, ideal("x, y"));
        assert!(perturbed_syzygy_ideal(&yd(&[1]), &QMat::zeros(3, 1)).is_err());
    }

    #[test]
    fn perturbed_contained_in_monomial_scheme() {
        let mut rng = random::rng(8);
        for mu in [yd(&[2, 1]), yd(&[1]), yd(&[3, 1, 1]), yd(&[2, 2])] {
            let target = monomial_scheme_ideal(&mu);
            for _ in 0..4 {
                let m = random::matrix(&mut rng, mu.len() + 1, mu.len(), 3);
                assert!(perturbed_syzygy_ideal(&mu, &m).unwrap().is_subset_of(&target));
            }
        }
    }

    #[test]
    fn nodal_series_examples() {
        let d = nodal_series_matrix(&NodalSeriesMatrix::Discrete { d: vec![(1, 1)] }).unwrap();
        let s: Vec<String> = d.entries().iter().map(ToString::to_string).collect();
        assert_eq!(s, ["x", "y"]);
        let c = nodal_series_matrix(&NodalSeriesMatrix::Continuous {
            d: vec![(3, 2)],
            k: 1,
            u: int(2),
        })
        .unwrap();
        assert_eq!(c.get(0, 0), &parse_poly(&VarContext::xy(), "x^3 - 2*y^2").unwrap());
        let e = nodal_series_matrix(&NodalSeriesMatrix::Discrete { d: vec![] }).unwrap();
        assert_eq!((e.rows(), e.cols()), (1, 0));
    }

    #[test]
    fn nodal_series_shapes() {
        let c = nodal_series_matrix(&NodalSeriesMatrix::Continuous {
            d: vec![(1, 2), (3, 1)],
            k: 2,
            u: rat(1, 2),
        })
        .unwrap();
        assert_eq!((c.rows(), c.cols()), (4, 4));
        let s: Vec<String> = c
            .to_rows()
            .iter()
            .map(|r| r.iter().map(ToString::to_string).collect::<Vec<_>>().join(","))
            .collect();
        assert_eq!(s, ["x,0,1/2*y,y", "0,x,0,1/2*y", "y^2,0,x^3,0", "0,y^2,0,x^3"]);
        let bad = |d: Vec<(u32, u32)>, u: Rational| {
            nodal_series_matrix(&NodalSeriesMatrix::Continuous { d, k: 1, u }).is_err()
        };
        assert!(bad(vec![(1, 1), (1, 1)], int(1)));
        assert!(bad(vec![(1, 2)], int(0)));
        assert!(!bad(vec![(1, 2), (2, 1)], int(1)));
        let d = nodal_series_matrix(&NodalSeriesMatrix::Discrete {
            d: vec![(1, 2), (3, 4)],
        })
        .unwrap();
        assert_eq!((d.rows(), d.cols()), (3, 2));
        assert_eq!(d.get(2, 1).to_string(), "y^4");
        assert_eq!(d.get(1, 1).to_string(), "x^3");
    }

    #[test]
    fn tangent_dimension() {
        let mut rng = random::rng(13);
        assert_eq!(hom_tangent_dim(&chart(&[&[4], &[-1]])).unwrap(), 2);
        assert_eq!(hom_tangent_dim(&RationalChart::zero(2)).unwrap(), 6);
        for k in 1..=3 {
            for _ in 0..4 {
                let e = RationalChart::from_qmat(&random::chart_matrix(&mut rng, k)).unwrap();
                assert_eq!(hom_tangent_dim(&e).unwrap(), k * (k + 1));
                assert_eq!(hom_quotient_dim(&hilbert_burch_ideal(&e)).unwrap(), k * (k + 1));
            }
        }
        // Non-curvilinear ideals of colength n still have 2n-dimensional tangent spaces.
        assert_eq!(hom_quotient_dim(&ideal("x^2, x*y, y^2")).unwrap(), 6);
        assert_eq!(hom_quotient_dim(&ideal("x^3, x*y, y^2")).unwrap(), 8);
    }

    #[test]
    fn intersection_examples() {
        let ctx = VarContext::xy();
        let y = Poly::var(&ctx, 1);
        let i = ideal("y^2, x*y, x^2 - y");
        assert_eq!(divisor_intersection_length(&i, &y).unwrap(), Colength::Finite(2));
        assert_eq!(i.with_generators(std::slice::from_ref(&y)).unwrap(), ideal("x^2, y"));
        assert_eq!(
            divisor_intersection_length(&ideal("x - 1, y - 1"), &y).unwrap(),
            Colength::Finite(0)
        );
    }

    #[test]
    fn gl_locus_properties() {
        let mut rng = random::rng(9);
        for k in 1..=3 {
            for _ in 0..5 {
                let top = random::matrix(&mut rng, k, k, 3);
                let e = RationalChart::from_qmat(&random::embed_top(&top, k)).unwrap();
                assert!(in_gl_locus(&e));
                let r = nilcone_check(&e).unwrap();
                assert_eq!(r.intersection_length, Colength::Finite(k));
                assert!(r.last_minor_matches_charpoly);
                let n =
                    RationalChart::from_qmat(&random::embed_top(&random::nilpotent_matrix(&mut rng, k, 2), k)).unwrap();
                let r = nilcone_check(&n).unwrap();
                assert!(r.top_block_nilpotent && r.meets_divisor_at_origin_only);
            }
        }
    }

    #[test]
    fn off_locus_meets_divisor_less() {
        let mut rng = random::rng(10);
        for k in 2..=3 {
            for _ in 0..5 {
                let mut m = random::matrix(&mut rng, k + 1, k, 3);
                let c = rng.gen_range(0..k);
                m[(k, c)] = random::nonzero_rational(&mut rng, 3);
                let e = RationalChart::from_qmat(&m).unwrap();
                let y = Poly::var(&VarContext::xy(), 1);
                match divisor_intersection_length(&hilbert_burch_ideal(&e), &y).unwrap() {
                    Colength::Finite(n) => assert!(n < k),
                    Colength::Infinite => panic!("finite scheme"),
                }
            }
        }
    }
}
