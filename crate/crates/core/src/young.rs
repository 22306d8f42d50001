//! Young diagrams, the horizontally convex bijection `hc`, dominance order,
//! stabilizer dimensions and the monomial subschemes attached to diagrams.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::exactalg::{Poly, Rational, VarContext};
use crate::ideals::{groebner, GroebnerBasis};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct YoungDiagram {
    parts: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum YoungError {
    #[error("parts must be positive and weakly decreasing: {0:?}")]
    NotAPartition(Vec<u32>),
    #[error("diagram {0} is not horizontally convex")]
    NotHorizontallyConvex(YoungDiagram),
}

impl TryFrom<Vec<u32>> for YoungDiagram {
    type Error = YoungError;
    fn try_from(parts: Vec<u32>) -> Result<Self, YoungError> {
        YoungDiagram::new(parts)
    }
}

impl From<YoungDiagram> for Vec<u32> {
    fn from(d: YoungDiagram) -> Vec<u32> {
        d.parts
    }
}

impl YoungDiagram {
    pub fn new(parts: Vec<u32>) -> Result<YoungDiagram, YoungError> {
        if parts.contains(&0) || parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(YoungError::NotAPartition(parts));
        }
        Ok(YoungDiagram { parts })
    }

    /// Sorts and drops zeros.
    pub fn from_unsorted(mut parts: Vec<u32>) -> YoungDiagram {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        YoungDiagram { parts }
    }

    pub fn empty() -> YoungDiagram {
        YoungDiagram { parts: vec![] }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn size(&self) -> u32 {
        self.parts.iter().sum()
    }

    /// `mu_j` with 1-based `j`, zero beyond the length.
    pub fn part(&self, j: usize) -> u32 {
        if j == 0 {
            panic!("parts are indexed from 1");
        }
        self.parts.get(j - 1).copied().unwrap_or(0)
    }
}

impl fmt::Display for YoungDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.parts.iter().map(u32::to_string).collect();
        write!(f, "({})", s.join(","))
    }
}

/// `lambda_j = mu_j + mu_{j+1} + ...`.
pub fn hc(mu: &YoungDiagram) -> YoungDiagram {
    let mut parts = mu.parts.clone();
    for j in (0..parts.len().saturating_sub(1)).rev() {
        parts[j] += parts[j + 1];
    }
    YoungDiagram { parts }
}

pub fn hc_inverse(lambda: &YoungDiagram) -> Result<YoungDiagram, YoungError> {
    if !is_horizontally_convex(lambda) {
        return Err(YoungError::NotHorizontallyConvex(lambda.clone()));
    }
    let l = &lambda.parts;
    let parts = (0..l.len())
        .map(|j| l[j] - l.get(j + 1).copied().unwrap_or(0))
        .collect();
    YoungDiagram::new(parts)
}

pub fn is_horizontally_convex(lambda: &YoungDiagram) -> bool {
    let l = &lambda.parts;
    let diffs: Vec<i64> = (0..l.len())
        .map(|j| l[j] as i64 - l.get(j + 1).copied().unwrap_or(0) as i64)
        .collect();
    diffs.windows(2).all(|w| w[0] >= w[1])
}

/// `mu_j^T = #{l : mu_l >= j}`.
pub fn transpose(mu: &YoungDiagram) -> YoungDiagram {
    let n = mu.parts.first().copied().unwrap_or(0);
    YoungDiagram {
        parts: (1..=n)
            .map(|j| mu.parts.iter().filter(|&&p| p >= j).count() as u32)
            .collect(),
    }
}

/// `hc(mu) ⊆ hc(nu)` as diagrams.
pub fn dominance_le(mu: &YoungDiagram, nu: &YoungDiagram) -> bool {
    let (a, b) = (hc(mu), hc(nu));
    (1..=a.len().max(b.len())).all(|j| a.part(j) <= b.part(j))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LeafDimensions {
    pub stab_dim: u64,
    pub leaf_codim: u64,
}

/// Stabilizer dimension `sum mu_j + sum_{j,l} min(mu_j, mu_l)` and leaf codimension `2|hc(mu)|`.
pub fn stabilizer_and_codim(mu: &YoungDiagram) -> LeafDimensions {
    let p = &mu.parts;
    let mins: u64 = p.iter().flat_map(|&a| p.iter().map(move |&b| a.min(b) as u64)).sum();
    LeafDimensions {
        stab_dim: mu.size() as u64 + mins,
        leaf_codim: 2 * hc(mu).size() as u64,
    }
}

/// The ideal `(x^{lambda_{l+1}} y^l : l = 0..len)` with `lambda = hc(mu)`.
pub fn monomial_scheme_ideal(mu: &YoungDiagram) -> GroebnerBasis {
    let lambda = hc(mu);
    let ctx = VarContext::xy();
    let gens: Vec<Poly> = (0..=lambda.len())
        .map(|l| {
            Poly::monomial(
                &ctx,
                &[(0, lambda.part(l + 1) as u16), (1, l as u16)],
                Rational::from_integer(1.into()),
            )
        })
        .collect();
    groebner(&gens).expect("bivariate generators")
}

/// All partitions of `n`, each weakly decreasing, in reverse lexicographic order.
pub fn partitions(n: u32) -> Vec<YoungDiagram> {
    fn rec(n: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<YoungDiagram>) {
        if n == 0 {
            out.push(YoungDiagram { parts: cur.clone() });
            return;
        }
        for p in (1..=n.min(max)).rev() {
            cur.push(p);
            rec(n - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}
