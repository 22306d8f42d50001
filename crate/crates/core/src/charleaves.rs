//! Modular vector fields `f_x ∂y - f_y ∂x` on the surface chart and the two
//! certificates used for the explicit leaf families `I_a` and `J_a`.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::exactalg::{int, AlgError, Poly, Rational, VarContext};
use crate::ideals::{groebner, Colength, GroebnerBasis, IdealError};
use crate::orbits::{hom_basis, OrbitError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorField {
    /// Coefficient of `∂x`.
    pub dx: Poly,
    /// Coefficient of `∂y`.
    pub dy: Poly,
}

impl VectorField {
    pub fn apply(&self, g: &Poly) -> Poly {
        &(&self.dx * &g.derivative(0)) + &(&self.dy * &g.derivative(1))
    }

    pub fn scale_by(&self, h: &Poly) -> VectorField {
        VectorField {
            dx: h * &self.dx,
            dy: h * &self.dy,
        }
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField {
            dx: &self.dx + &other.dx,
            dy: &self.dy + &other.dy,
        }
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})*dx + ({})*dy", self.dx, self.dy)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CharLeafError {
    #[error(transparent)]
    Alg(#[from] AlgError),
    #[error(transparent)]
    Ideal(#[from] IdealError),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error("ideal has infinite colength")]
    InfiniteColength,
    #[error("unknown annihilation mode '{0}' (expected containment, socle or full)")]
    UnknownMode(String),
    #[error("family parameter must be nonzero")]
    ZeroParameter,
}

pub fn modular_vf(f: &Poly) -> VectorField {
    VectorField {
        dx: -&f.derivative(1),
        dy: f.derivative(0),
    }
}

/// Whether `ζ(g) ∈ I` for every Gröbner generator `g`.
pub fn ideal_invariant(zeta: &VectorField, ideal: &GroebnerBasis) -> Result<bool, CharLeafError> {
    for g in ideal.generators() {
        if !ideal.contains(&zeta.apply(&g))? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AnnihilationMode {
    Containment,
    Socle,
    Full,
}

impl FromStr for AnnihilationMode {
    type Err = CharLeafError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "containment" => Ok(Self::Containment),
            "socle" => Ok(Self::Socle),
            "full" => Ok(Self::Full),
            other => Err(CharLeafError::UnknownMode(other.to_string())),
        }
    }
}

/// Whether multiplication by `f` kills `Hom(I, O/I)`, certified by `mode`.
pub fn annihilation_checks(f: &Poly, ideal: &GroebnerBasis, mode: AnnihilationMode) -> Result<bool, CharLeafError> {
    if ideal.colength() == Colength::Infinite {
        return Err(CharLeafError::InfiniteColength);
    }
    match mode {
        AnnihilationMode::Containment => Ok(ideal.contains(f)?),
        AnnihilationMode::Socle => {
            let ctx = f.ctx().clone();
            let x = Poly::var(&ctx, 0);
            let y = Poly::var(&ctx, 1);
            Ok(ideal.contains(&(f * &x))? && ideal.contains(&(f * &y))?)
        }
        AnnihilationMode::Full => {
            let gens = ideal.generators();
            let basis = hom_basis(ideal, &ideal.syzygies(), gens.len())?;
            let mf = ideal.multiplication_matrix_of(f)?;
            let n = mf.rows();
            Ok(basis
                .iter()
                .all(|phi| phi.chunks(n).all(|block| mf.mul_vec(block).iter().all(Zero::is_zero))))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Family {
    /// `I_a = (y + a x^2, x^3)` with `f = y^2 - x^4`.
    I,
    /// `J_a = (y^2 + a x^3, x^2 y, x y^2)` with `f = y^2 - x^3`.
    J,
}

impl Family {
    pub fn function(self) -> Poly {
        let ctx = VarContext::xy();
        let x = Poly::var(&ctx, 0);
        let y = Poly::var(&ctx, 1);
        match self {
            Family::I => &y.pow(2) - &x.pow(4),
            Family::J => &y.pow(2) - &x.pow(3),
        }
    }

    pub fn ideal(self, a: &Rational) -> Result<GroebnerBasis, CharLeafError> {
        let ctx = VarContext::xy();
        let x = Poly::var(&ctx, 0);
        let y = Poly::var(&ctx, 1);
        let gens = match self {
            Family::I => vec![&y + &x.pow(2).scale(a), x.pow(3)],
            Family::J => {
                if a.is_zero() {
                    return Err(CharLeafError::ZeroParameter);
                }
                vec![&y.pow(2) + &x.pow(3).scale(a), &x.pow(2) * &y, &x * &y.pow(2)]
            }
        };
        Ok(groebner(&gens)?)
    }

    pub fn mode(self) -> AnnihilationMode {
        match self {
            Family::I => AnnihilationMode::Containment,
            Family::J => AnnihilationMode::Socle,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyCertificate {
    pub family: Family,
    #[serde(serialize_with = "display")]
    pub a: Rational,
    pub invariant: bool,
    pub annihilated: bool,
    pub annihilated_full: bool,
}

impl FamilyCertificate {
    pub fn passed(&self) -> bool {
        self.invariant && self.annihilated && self.annihilated_full
    }
}

fn display<S: serde::Serializer>(v: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

pub fn certify_family(family: Family, a: &Rational) -> Result<FamilyCertificate, CharLeafError> {
    let f = family.function();
    let ideal = family.ideal(a)?;
    Ok(FamilyCertificate {
        family,
        a: a.clone(),
        invariant: ideal_invariant(&modular_vf(&f), &ideal)?,
        annihilated: annihilation_checks(&f, &ideal, family.mode())?,
        annihilated_full: annihilation_checks(&f, &ideal, AnnihilationMode::Full)?,
    })
}

pub fn certify_families(samples: &[Rational]) -> Result<Vec<FamilyCertificate>, CharLeafError> {
    let jobs: Vec<(Family, Rational)> = [Family::I, Family::J]
        .into_iter()
        .flat_map(|fam| samples.iter().map(move |a| (fam, a.clone())))
        .collect();
    jobs.par_iter().map(|(fam, a)| certify_family(*fam, a)).collect()
}

/// Point ideal `(x - p, y - q)`.
pub fn point_ideal(p: &Rational, q: &Rational) -> Result<GroebnerBasis, CharLeafError> {
    let ctx = VarContext::xy();
    let x = &Poly::var(&ctx, 0) - &Poly::constant(&ctx, p.clone());
    let y = &Poly::var(&ctx, 1) - &Poly::constant(&ctx, q.clone());
    Ok(groebner(&[x, y])?)
}

/// Point ideal at `(2, 1)`, off both curves `y^2 = x^3` and `y^2 = x^4`.
pub fn generic_point_ideal() -> GroebnerBasis {
    point_ideal(&int(2), &int(1)).expect("point ideal")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::{parse_poly, parse_poly_list, rat};
    use proptest::prelude::*;

    fn p(s: &str) -> Poly {
        parse_poly(&VarContext::xy(), s).unwrap()
    }

    fn ideal(s: &str) -> GroebnerBasis {
        groebner(&parse_poly_list(&VarContext::xy(), s).unwrap()).unwrap()
    }

    #[test]
    fn modular_examples() {
        assert_eq!(
            modular_vf(&p("y")),
            VectorField {
                dx: p("-1"),
                dy: p("0")
            }
        );
        assert_eq!(
            modular_vf(&p("x*y")),
            VectorField {
                dx: p("-x"),
                dy: p("y")
            }
        );
        assert_eq!(
            modular_vf(&p("y^2 - x^3")),
            VectorField {
                dx: p("-2*y"),
                dy: p("-3*x^2")
            }
        );
    }

    #[test]
    fn invariance_examples() {
        let i2 = Family::I.ideal(&int(2)).unwrap();
        assert!(ideal_invariant(&modular_vf(&p("y^2 - x^4")), &i2).unwrap());
        let j1 = Family::J.ideal(&int(1)).unwrap();
        assert!(ideal_invariant(&modular_vf(&p("y^2 - x^3")), &j1).unwrap());
        assert!(!ideal_invariant(&modular_vf(&p("x*y")), &ideal("x - 1, y - 1")).unwrap());
    }

    #[test]
    fn annihilation_examples() {
        let i2 = Family::I.ideal(&int(2)).unwrap();
        assert!(annihilation_checks(&p("y^2 - x^4"), &i2, AnnihilationMode::Containment).unwrap());
        let j1 = Family::J.ideal(&int(1)).unwrap();
        assert!(annihilation_checks(&p("y^2 - x^3"), &j1, AnnihilationMode::Socle).unwrap());
        assert!(!annihilation_checks(&p("y^2 - x^3"), &j1, AnnihilationMode::Containment).unwrap());
        let off = generic_point_ideal();
        assert!(!annihilation_checks(&p("y^2 - x^3"), &off, AnnihilationMode::Full).unwrap());
        assert!(matches!(
            annihilation_checks(&p("y"), &ideal("y"), AnnihilationMode::Full),
            Err(CharLeafError::InfiniteColength)
        ));
    }

    #[test]
    fn families_certified() {
        let samples = [int(1), int(2), int(-1), rat(1, 2), rat(-3, 7)];
        for c in certify_families(&samples).unwrap() {
            assert!(c.passed(), "{c:?}");
        }
        assert!(certify_family(Family::I, &int(0)).unwrap().passed());
        assert!(matches!(Family::J.ideal(&int(0)), Err(CharLeafError::ZeroParameter)));
    }

    #[test]
    fn off_divisor_points_fail() {
        for (a, b) in [(2, 1), (2, -1), (-3, 5)] {
            let pt = point_ideal(&int(a), &int(b)).unwrap();
            for fam in [Family::I, Family::J] {
                let f = fam.function();
                assert!(!ideal_invariant(&modular_vf(&f), &pt).unwrap());
                assert!(!annihilation_checks(&f, &pt, AnnihilationMode::Full).unwrap());
            }
        }
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("socle".parse::<AnnihilationMode>().unwrap(), AnnihilationMode::Socle);
        assert!("bogus".parse::<AnnihilationMode>().is_err());
    }

    fn small_poly() -> impl Strategy<Value = Poly> {
        proptest::collection::vec((0u16..4, 0u16..4, -5i64..6), 0..5).prop_map(|terms| {
            let ctx = VarContext::xy();
            let mut out = Poly::zero(&ctx);
            for (a, b, c) in terms {
                out += &Poly::monomial(&ctx, &[(0, a), (1, b)], int(c));
            }
            out
        })
    }

    proptest! {
        #[test]
        fn leibniz_identity(f in small_poly(), h in small_poly()) {
            let lhs = modular_vf(&(&h * &f));
            let rhs = modular_vf(&f).scale_by(&h).add(&modular_vf(&h).scale_by(&f));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn linearity(f in small_poly(), c in -6i64..7) {
            let scaled = modular_vf(&f.scale(&int(c)));
            let expect = modular_vf(&f).scale_by(&Poly::constant(&VarContext::xy(), int(c)));
            prop_assert_eq!(scaled, expect);
        }

        #[test]
        fn field_kills_its_function(f in small_poly()) {
            prop_assert!(modular_vf(&f).apply(&f).is_zero());
        }
    }
}
