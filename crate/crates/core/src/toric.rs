//! Torus weights of quadratic bivectors on the chart: the invariant part
//! `pi_Delta`, the biresidue matrix, dominoes, smoothable weights and the
//! coweight of the toric degeneration.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::brackets::{quad_nodal_structure, PoissonStructure};
use crate::charts::{coords, CoordIndex};
use crate::exactalg::{int, lcm_of_denominators, Poly, QMat, Rational, VarContext};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ToricError {
    #[error("index ({row}, {col}) out of range for k = {k}")]
    IndexBounds { k: usize, row: usize, col: usize },
    #[error("weight matrix must have {rows} rows of length {cols}")]
    Shape { rows: usize, cols: usize },
    #[error("bivector entry {0} has degree above two")]
    NonQuadratic(String),
    #[error("weight is not in the span of the smoothable weights")]
    NotDecomposable,
    #[error("decomposition has a negative or fractional coefficient {0}")]
    NegativeCoefficient(String),
    #[error("product of the Pi and biresidue matrices is not scalar")]
    NotScalar,
}

/// A `(k+1) x k` integer matrix, `entries[row][col]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "WeightRepr")]
pub struct WeightMatrix {
    k: usize,
    entries: Vec<Vec<i64>>,
}

#[derive(Deserialize)]
struct WeightRepr {
    k: usize,
    entries: Vec<Vec<i64>>,
}

impl TryFrom<WeightRepr> for WeightMatrix {
    type Error = ToricError;
    fn try_from(r: WeightRepr) -> Result<WeightMatrix, ToricError> {
        WeightMatrix::new(r.k, r.entries)
    }
}

impl WeightMatrix {
    pub fn new(k: usize, entries: Vec<Vec<i64>>) -> Result<WeightMatrix, ToricError> {
        if entries.len() != k + 1 || entries.iter().any(|r| r.len() != k) {
            return Err(ToricError::Shape { rows: k + 1, cols: k });
        }
        Ok(WeightMatrix { k, entries })
    }

    pub fn zeros(k: usize) -> WeightMatrix {
        WeightMatrix {
            k,
            entries: vec![vec![0; k]; k + 1],
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn entries(&self) -> &[Vec<i64>] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> i64 {
        self.entries[row][col]
    }

    pub fn add_at(&mut self, (row, col): (usize, usize), v: i64) {
        self.entries[row][col] += v;
    }

    fn zip(&self, other: &WeightMatrix, f: impl Fn(i64, i64) -> i64) -> WeightMatrix {
        assert_eq!(self.k, other.k, "weight sizes differ");
        WeightMatrix {
            k: self.k,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect())
                .collect(),
        }
    }

    pub fn plus(&self, other: &WeightMatrix) -> WeightMatrix {
        self.zip(other, |a, b| a + b)
    }

    pub fn minus(&self, other: &WeightMatrix) -> WeightMatrix {
        self.zip(other, |a, b| a - b)
    }

    pub fn scaled(&self, c: i64) -> WeightMatrix {
        self.zip(self, |a, _| a * c)
    }

    /// Entrywise dot product.
    pub fn dot(&self, other: &WeightMatrix) -> i64 {
        self.entries
            .iter()
            .flatten()
            .zip(other.entries.iter().flatten())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(|&v| v == 0)
    }

    pub fn flat(&self) -> Vec<i64> {
        self.entries.iter().flatten().copied().collect()
    }

    pub fn nonzero(&self) -> Vec<((usize, usize), i64)> {
        let mut out = Vec::new();
        for (r, row) in self.entries.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if v != 0 {
                    out.push(((r, c), v));
                }
            }
        }
        out
    }

    /// Half-turn `(r, c) -> (k - r, k - 1 - c)`.
    pub fn rotated(&self) -> WeightMatrix {
        let k = self.k;
        let mut out = WeightMatrix::zeros(k);
        for ((r, c), v) in self.nonzero() {
            out.entries[k - r][k - 1 - c] = v;
        }
        out
    }
}

impl fmt::Display for WeightMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .entries
            .iter()
            .map(|r| r.iter().map(|v| format!("{v:>2}")).collect::<Vec<_>>().join(" "))
            .collect();
        write!(f, "{}", rows.join("\n"))
    }
}

fn cell(k: usize, c: CoordIndex) -> Result<(usize, usize), ToricError> {
    if c.i >= k || c.j > k {
        return Err(ToricError::IndexBounds { k, row: c.j, col: c.i });
    }
    Ok((c.j, c.i))
}

/// Weight of `prod E_c^{n_c} d/dE_a ^ d/dE_b`: exponents added, `a` and `b` subtracted.
pub fn weight_of_term(
    k: usize,
    monomial: &[(CoordIndex, u32)],
    a: CoordIndex,
    b: CoordIndex,
) -> Result<WeightMatrix, ToricError> {
    let mut w = WeightMatrix::zeros(k);
    for &(c, n) in monomial {
        w.add_at(cell(k, c)?, n as i64);
    }
    w.add_at(cell(k, a)?, -1);
    w.add_at(cell(k, b)?, -1);
    Ok(w)
}

fn monomial_coords(k: usize, p: &Poly, mono: &[u16]) -> Vec<(CoordIndex, u32)> {
    let ctx = p.ctx();
    coords(k)
        .into_iter()
        .filter_map(|c| {
            let e = mono[ctx.e_var(c.i, c.j)];
            (e > 0).then_some((c, e as u32))
        })
        .collect()
}

/// All distinct weights of the monomials of a bracket, with multiplicity
/// ignored; `nonzero_only` drops the invariant ones.
pub fn monomial_weights(pi: &PoissonStructure, nonzero_only: bool) -> Vec<WeightMatrix> {
    let k = pi.k();
    let mut out = std::collections::BTreeSet::new();
    for (a, b, p) in pi.entries() {
        for (mono, _) in p.terms() {
            let w = weight_of_term(k, &monomial_coords(k, p, mono), a, b).expect("chart indices");
            if !nonzero_only || !w.is_zero() {
                out.insert(w);
            }
        }
    }
    out.into_iter().collect()
}

/// `Pi(i,j,a,b)` for the ordered pair `(E_i^j, E_a^b)`; zero on the diagonal.
pub fn pi_coefficient(p: CoordIndex, q: CoordIndex) -> i64 {
    if p == q {
        return 0;
    }
    let (i, j, a, b) = (p.i, p.j, q.i, q.j);
    let d = |c: bool| c as i64;
    d(a >= j) - d(a >= i) - d(b == j && a > i) + d(b > j && a == i) - d(b > j) + d(b > i)
}

/// `{E_a, E_b}_Delta = Pi_{ab} E_a E_b`.
pub fn pi_delta(k: usize) -> PoissonStructure {
    let ctx = VarContext::chart(k);
    let m = k * (k + 1);
    let cs = coords(k);
    let mut entries = Vec::with_capacity(m * m);
    for &p in &cs {
        for &q in &cs {
            let c = pi_coefficient(p, q);
            let mono = &Poly::var(&ctx, ctx.e_var(p.i, p.j)) * &Poly::var(&ctx, ctx.e_var(q.i, q.j));
            entries.push(mono.scale(&int(c)));
        }
    }
    PoissonStructure::from_entries(k, entries)
}

/// Keeps exactly the zero-weight monomials of every entry.
pub fn invariant_projection(pi: &PoissonStructure) -> Result<PoissonStructure, ToricError> {
    let k = pi.k();
    let mut entries = Vec::new();
    for (a, b, p) in pi.entries() {
        if p.degree().unwrap_or(0) > 2 {
            return Err(ToricError::NonQuadratic(p.to_string()));
        }
        let kept = p.terms().filter(|(mono, _)| {
            weight_of_term(k, &monomial_coords(k, p, mono), a, b)
                .expect("chart indices")
                .is_zero()
        });
        entries.push(Poly::from_terms(p.ctx(), kept.map(|(m, c)| (m.clone(), c.clone()))));
    }
    Ok(PoissonStructure::from_entries(k, entries))
}

/// Coordinates sorted by `i + j`, then by the column index `i`.
pub fn biresidue_ordering(k: usize) -> Vec<CoordIndex> {
    let mut cs = coords(k);
    cs.sort_by_key(|c| (c.i + c.j, c.i));
    cs
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BiresidueMatrix {
    pub k: usize,
    pub ordering: Vec<CoordIndex>,
    pub entries: Vec<Vec<i64>>,
}

/// The four-term delta formula, negated so that the `k = 2` case agrees with
/// the displayed reference matrix.
fn biresidue_entry(p: CoordIndex, q: CoordIndex) -> i64 {
    let (i, j, a, b) = (p.i as i64, p.j as i64, q.i as i64, q.j as i64);
    let d = |c: bool| c as i64;
    let formula = -d(a + b == i + j && a > i) - d(a + b == i + j + 1 && a <= i)
        + d(a + b == i + j && a < i)
        + d(a + b == i + j - 1 && a >= i);
    -formula
}

pub fn biresidue_matrix(k: usize) -> BiresidueMatrix {
    let ordering = biresidue_ordering(k);
    let entries = ordering
        .iter()
        .map(|&p| ordering.iter().map(|&q| biresidue_entry(p, q)).collect())
        .collect();
    BiresidueMatrix { k, ordering, entries }
}

impl BiresidueMatrix {
    /// `row[t + 1] - row[t]` as a weight matrix.
    pub fn row_difference(&self, t: usize) -> WeightMatrix {
        let mut w = WeightMatrix::zeros(self.k);
        for (s, c) in self.ordering.iter().enumerate() {
            w.entries[c.j][c.i] = self.entries[t + 1][s] - self.entries[t][s];
        }
        w
    }

    pub fn row_differences(&self) -> Vec<WeightMatrix> {
        (0..self.ordering.len() - 1).map(|t| self.row_difference(t)).collect()
    }
}

/// The scalar `c` with `Pi . B = c I` in the biresidue ordering.
pub fn inverse_relation_check(k: usize) -> Result<Rational, ToricError> {
    let b = biresidue_matrix(k);
    let pi = QMat::from_rows(
        b.ordering
            .iter()
            .map(|&p| b.ordering.iter().map(|&q| int(pi_coefficient(p, q))).collect())
            .collect(),
    );
    let bm = QMat::from_i64(&b.entries);
    let prod = &pi * &bm;
    let c = prod[(0, 0)].clone();
    if prod == QMat::identity(b.ordering.len()).scale(&c) {
        Ok(c)
    } else {
        Err(ToricError::NotScalar)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Orientation {
    N,
    S,
    E,
    W,
}

/// `+1` at `head`, `-1` at `tail`, cells given as `(row, col)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Domino {
    pub head: (usize, usize),
    pub tail: (usize, usize),
}

impl Domino {
    pub fn new(head: (usize, usize), tail: (usize, usize)) -> Option<Domino> {
        (head != tail && (head.0 == tail.0 || head.1 == tail.1)).then_some(Domino { head, tail })
    }

    pub fn orientation(&self) -> Orientation {
        let (h, t) = (self.head, self.tail);
        if h.1 == t.1 {
            if h.0 < t.0 {
                Orientation::N
            } else {
                Orientation::S
            }
        } else if h.1 > t.1 {
            Orientation::E
        } else {
            Orientation::W
        }
    }

    pub fn size(&self) -> usize {
        self.head.0.abs_diff(self.tail.0) + self.head.1.abs_diff(self.tail.1)
    }

    /// Twice the valuation: `2 min(row)` for vertical dominoes, `2 min(col) + 1` for horizontal ones.
    pub fn doubled_valuation(&self) -> usize {
        match self.orientation() {
            Orientation::N | Orientation::S => 2 * self.head.0.min(self.tail.0),
            Orientation::E | Orientation::W => 2 * self.head.1.min(self.tail.1) + 1,
        }
    }

    pub fn weight(&self, k: usize) -> WeightMatrix {
        let mut w = WeightMatrix::zeros(k);
        w.add_at(self.head, 1);
        w.add_at(self.tail, -1);
        w
    }
}

/// `+(r1,c1) - (r1,c2) - (r2,c1) + (r2,c2)`.
pub fn rectangular_weight(k: usize, r1: usize, c1: usize, r2: usize, c2: usize) -> WeightMatrix {
    let mut w = WeightMatrix::zeros(k);
    w.add_at((r1, c1), 1);
    w.add_at((r1, c2), -1);
    w.add_at((r2, c1), -1);
    w.add_at((r2, c2), 1);
    w
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum SmoothableWeight {
    /// Unit square at rows `row, row+1` and columns `col, col+1`.
    TypeI { row: usize, col: usize },
    /// `-(t,0) + (t+1,0) - (0,t-1) + (0,t)`, `t = 1..k-1`.
    TypeIIa { t: usize },
    /// `+(k,c) - (k,c+1) + (c,k-1) - (c+1,k-1)`, `c = 0..k-2`.
    TypeIIb { c: usize },
    /// `-(0,k-1) - (k,0)`, the remaining row difference of the biresidue matrix.
    Corner,
}

impl SmoothableWeight {
    pub fn weight(&self, k: usize) -> WeightMatrix {
        let mut w = WeightMatrix::zeros(k);
        match *self {
            SmoothableWeight::TypeI { row, col } => return rectangular_weight(k, row, col, row + 1, col + 1),
            SmoothableWeight::TypeIIa { t } => {
                w.add_at((t, 0), -1);
                w.add_at((t + 1, 0), 1);
                w.add_at((0, t - 1), -1);
                w.add_at((0, t), 1);
            }
            SmoothableWeight::TypeIIb { c } => {
                w.add_at((k, c), 1);
                w.add_at((k, c + 1), -1);
                w.add_at((c, k - 1), 1);
                w.add_at((c + 1, k - 1), -1);
            }
            SmoothableWeight::Corner => {
                w.add_at((0, k - 1), -1);
                w.add_at((k, 0), -1);
            }
        }
        w
    }

    /// The image under the half-turn of the grid.
    pub fn rotated(&self, k: usize) -> SmoothableWeight {
        match *self {
            SmoothableWeight::TypeI { row, col } => SmoothableWeight::TypeI {
                row: k - 1 - row,
                col: k - 2 - col,
            },
            SmoothableWeight::TypeIIa { t } => SmoothableWeight::TypeIIb { c: k - 1 - t },
            SmoothableWeight::TypeIIb { c } => SmoothableWeight::TypeIIa { t: k - 1 - c },
            SmoothableWeight::Corner => SmoothableWeight::Corner,
        }
    }
}

impl fmt::Display for SmoothableWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SmoothableWeight::TypeI { row, col } => write!(f, "I({row},{col})"),
            SmoothableWeight::TypeIIa { t } => write!(f, "IIa({t})"),
            SmoothableWeight::TypeIIb { c } => write!(f, "IIb({c})"),
            SmoothableWeight::Corner => write!(f, "corner"),
        }
    }
}

/// Types I, IIa, IIb and the corner weight, `k(k+1) - 1` in total.
pub fn smoothable_basis(k: usize) -> Vec<SmoothableWeight> {
    let mut out = Vec::new();
    for row in 0..k {
        for col in 0..k.saturating_sub(1) {
            out.push(SmoothableWeight::TypeI { row, col });
        }
    }
    out.extend((1..k).map(|t| SmoothableWeight::TypeIIa { t }));
    out.extend((0..k.saturating_sub(1)).map(|c| SmoothableWeight::TypeIIb { c }));
    out.push(SmoothableWeight::Corner);
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum WeightClass {
    Smoothable(SmoothableWeight),
    Rectangular { r1: usize, c1: usize, r2: usize, c2: usize },
    AdmissiblePair(Domino, Domino),
    Other,
}

impl WeightClass {
    /// Type I weights are rectangular; Types IIa and IIb are admissible pairs.
    pub fn is_rectangular_or_admissible(&self) -> bool {
        match self {
            WeightClass::Rectangular { .. } | WeightClass::AdmissiblePair(..) => true,
            WeightClass::Smoothable(s) => *s != SmoothableWeight::Corner,
            WeightClass::Other => false,
        }
    }
}

fn all_dominoes(k: usize) -> Vec<Domino> {
    let cells: Vec<(usize, usize)> = (0..=k).flat_map(|r| (0..k).map(move |c| (r, c))).collect();
    cells
        .iter()
        .flat_map(|&h| cells.iter().filter_map(move |&t| Domino::new(h, t)))
        .collect()
}

fn as_domino(w: &WeightMatrix) -> Option<Domino> {
    match w.nonzero().as_slice() {
        [(p, a), (q, b)] if *a == 1 && *b == -1 => Domino::new(*p, *q),
        [(p, a), (q, b)] if *a == -1 && *b == 1 => Domino::new(*q, *p),
        _ => None,
    }
}

fn is_admissible(d1: &Domino, d2: &Domino) -> bool {
    matches!(d1.orientation(), Orientation::W | Orientation::S)
        && matches!(d2.orientation(), Orientation::E | Orientation::N)
        && d1.size() == d2.size()
        && d1.doubled_valuation() > d2.doubled_valuation()
}

pub fn classify_weight(w: &WeightMatrix) -> WeightClass {
    let k = w.k();
    if let Some(s) = smoothable_basis(k).into_iter().find(|s| &s.weight(k) == w) {
        return WeightClass::Smoothable(s);
    }
    let nz = w.nonzero();
    if nz.len() == 4 {
        let (r1, c1) = nz[0].0;
        let (r2, c2) = nz[3].0;
        if r1 < r2 && c1 < c2 && w == &rectangular_weight(k, r1, c1, r2, c2) {
            return WeightClass::Rectangular { r1, c1, r2, c2 };
        }
    }
    for d1 in all_dominoes(k) {
        if !matches!(d1.orientation(), Orientation::W | Orientation::S) {
            continue;
        }
        if let Some(d2) = as_domino(&w.minus(&d1.weight(k))) {
            if is_admissible(&d1, &d2) {
                return WeightClass::AdmissiblePair(d1, d2);
            }
        }
    }
    WeightClass::Other
}

/// Every admissible pair of dominoes on the size-`k` grid.
pub fn admissible_pairs(k: usize) -> Vec<(Domino, Domino)> {
    let ds = all_dominoes(k);
    ds.iter()
        .flat_map(|d1| ds.iter().map(move |d2| (*d1, *d2)))
        .filter(|(d1, d2)| is_admissible(d1, d2))
        .collect()
}

/// Non-negative integer coefficients on the smoothable weights.
pub type Decomposition = BTreeMap<SmoothableWeight, u64>;

fn basis_matrix(k: usize) -> (Vec<SmoothableWeight>, QMat) {
    let basis = smoothable_basis(k);
    let cols: Vec<Vec<i64>> = basis.iter().map(|s| s.weight(k).flat()).collect();
    let m = k * (k + 1);
    let mat = QMat::from_rows((0..m).map(|r| cols.iter().map(|c| int(c[r])).collect()).collect());
    (basis, mat)
}

/// The unique expansion of `w` in the smoothable weights, required to have
/// non-negative integer coefficients.
pub fn decompose_weight(w: &WeightMatrix) -> Result<Decomposition, ToricError> {
    let (basis, mat) = basis_matrix(w.k());
    let rhs: Vec<Rational> = w.flat().into_iter().map(int).collect();
    let sol = mat.solve(&rhs).ok_or(ToricError::NotDecomposable)?;
    let mut out = Decomposition::new();
    for (s, c) in basis.into_iter().zip(sol) {
        if c.is_negative() || !c.is_integer() {
            return Err(ToricError::NegativeCoefficient(format!("{c} on {s}")));
        }
        if !c.is_zero() {
            out.insert(s, c.to_integer().try_into().expect("small coefficient"));
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MoveKind {
    /// Slide a domino to its edge of the grid.
    PushToEdge,
    /// Turn a domino round a corner of the grid.
    Turn,
    /// Move the left-column domino up one row.
    PushNorth,
    /// Move the right-column domino down one row.
    PushSouth,
    /// The remaining pair is a sum of Type IIa or IIb weights.
    Finish,
    /// A rectangle split into unit squares.
    Telescope,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GameMove {
    pub kind: MoveKind,
    pub subtracted: Decomposition,
}

fn rect_move(kind: MoveKind, r1: usize, c1: usize, r2: usize, c2: usize) -> Option<GameMove> {
    let subtracted: Decomposition = (r1..r2)
        .flat_map(|row| (c1..c2).map(move |col| (SmoothableWeight::TypeI { row, col }, 1)))
        .collect();
    (!subtracted.is_empty()).then_some(GameMove { kind, subtracted })
}

fn sum_move(kind: MoveKind, items: impl Iterator<Item = SmoothableWeight>) -> GameMove {
    GameMove {
        kind,
        subtracted: items.map(|s| (s, 1)).collect(),
    }
}

/// `S` in column 0 on rows `r..r+s`, `E` in row 0 on columns `c..c+s`, `r > c`.
fn se_game(k: usize, mut r: usize, c: usize, s: usize, moves: &mut Vec<GameMove>) {
    while r > c + 1 {
        moves.push(sum_move(
            MoveKind::Turn,
            (r..r + s).map(|t| SmoothableWeight::TypeIIa { t }),
        ));
        moves.extend(rect_move(MoveKind::PushToEdge, 0, r - 1, k, r + s - 1));
        moves.push(sum_move(
            MoveKind::Turn,
            (r - 1..r + s - 1).map(|c| SmoothableWeight::TypeIIb { c }),
        ));
        moves.extend(rect_move(MoveKind::PushNorth, r - 1, 0, r + s - 1, k - 1));
        r -= 1;
    }
    moves.push(sum_move(
        MoveKind::Finish,
        (c + 1..=c + s).map(|t| SmoothableWeight::TypeIIa { t }),
    ));
}

fn rotate_moves(k: usize, moves: Vec<GameMove>) -> Vec<GameMove> {
    moves
        .into_iter()
        .map(|m| GameMove {
            kind: match m.kind {
                MoveKind::PushNorth => MoveKind::PushSouth,
                other => other,
            },
            subtracted: m.subtracted.into_iter().map(|(s, n)| (s.rotated(k), n)).collect(),
        })
        .collect()
}

/// The constructive reduction of a rectangular weight or an admissible pair
/// to smoothable weights, one move at a time.
pub fn domino_game(w: &WeightMatrix) -> Result<Vec<GameMove>, ToricError> {
    let k = w.k();
    let mut moves = Vec::new();
    let (d1, d2) = match classify_weight(w) {
        WeightClass::Smoothable(SmoothableWeight::Corner) | WeightClass::Other => {
            return Err(ToricError::NotDecomposable)
        }
        WeightClass::Smoothable(s) => {
            moves.push(sum_move(MoveKind::Finish, std::iter::once(s)));
            return Ok(moves);
        }
        WeightClass::Rectangular { r1, c1, r2, c2 } => {
            moves.extend(rect_move(MoveKind::Telescope, r1, c1, r2, c2));
            return Ok(moves);
        }
        WeightClass::AdmissiblePair(d1, d2) => (d1, d2),
    };
    let s = d1.size();
    // Slide both dominoes to their edges.
    let d1_edge = match d1.orientation() {
        Orientation::S => {
            let (r, c) = d1.tail;
            moves.extend(rect_move(MoveKind::PushToEdge, r, 0, r + s, c));
            (Orientation::S, r)
        }
        _ => {
            let (r, c) = d1.head;
            moves.extend(rect_move(MoveKind::PushToEdge, r, c, k, c + s));
            (Orientation::W, c)
        }
    };
    let d2_edge = match d2.orientation() {
        Orientation::N => {
            let (r, c) = d2.head;
            moves.extend(rect_move(MoveKind::PushToEdge, r, c, r + s, k - 1));
            (Orientation::N, r)
        }
        _ => {
            let (r, c) = d2.tail;
            moves.extend(rect_move(MoveKind::PushToEdge, 0, c, r, c + s));
            (Orientation::E, c)
        }
    };
    let (mut o1, mut p1) = d1_edge;
    let (o2, p2) = d2_edge;
    match (o1, o2) {
        (Orientation::S, Orientation::N) => {
            // S on rows p1..p1+s becomes W in the bottom row on columns p1-1..p1+s-1.
            moves.push(sum_move(
                MoveKind::Turn,
                (p1..p1 + s).map(|t| SmoothableWeight::TypeIIa { t }),
            ));
            moves.extend(rect_move(MoveKind::PushToEdge, 0, p1 - 1, k, p1 + s - 1));
            o1 = Orientation::W;
            p1 -= 1;
        }
        (Orientation::W, Orientation::E) => {
            // W in the bottom row on columns p1..p1+s becomes S in column 0 on rows p1..p1+s.
            moves.push(sum_move(
                MoveKind::Turn,
                (p1..p1 + s).map(|c| SmoothableWeight::TypeIIb { c }),
            ));
            moves.extend(rect_move(MoveKind::PushToEdge, p1, 0, p1 + s, k - 1));
            o1 = Orientation::S;
        }
        _ => {}
    }
    if o1 == Orientation::S {
        se_game(k, p1, p2, s, &mut moves);
    } else {
        // W in the bottom row on columns p1..p1+s, N in the right column on rows p2..p2+s:
        // the half-turn makes this an S/E configuration.
        let mut rotated = Vec::new();
        se_game(k, k - p2 - s, k - 1 - p1 - s, s, &mut rotated);
        moves.extend(rotate_moves(k, rotated));
    }
    Ok(moves)
}

/// Total smoothable content of a sequence of moves.
pub fn total_of_moves(moves: &[GameMove]) -> Decomposition {
    let mut out = Decomposition::new();
    for m in moves {
        for (s, n) in &m.subtracted {
            *out.entry(*s).or_insert(0) += n;
        }
    }
    out
}

pub fn weight_of_decomposition(k: usize, d: &Decomposition) -> WeightMatrix {
    d.iter().fold(WeightMatrix::zeros(k), |acc, (s, &n)| {
        acc.plus(&s.weight(k).scaled(n as i64))
    })
}

/// An integer weight pairing to a positive integer with every smoothable weight.
pub fn find_coweight(k: usize) -> WeightMatrix {
    let basis = smoothable_basis(k);
    let rows: Vec<Vec<Rational>> = basis
        .iter()
        .map(|s| s.weight(k).flat().into_iter().map(int).collect())
        .collect();
    let mat = QMat::from_rows(rows);
    let (_, pivots) = mat.rref();
    assert_eq!(pivots.len(), basis.len(), "smoothable weights are independent");
    let square = QMat::from_rows(
        (0..basis.len())
            .map(|r| pivots.iter().map(|&p| mat[(r, p)].clone()).collect())
            .collect(),
    );
    let ones = vec![Rational::one(); basis.len()];
    let sol = square.solve(&ones).expect("square subsystem is invertible");
    let den = lcm_of_denominators(&sol);
    let mut flat = vec![0i64; k * (k + 1)];
    for (&p, v) in pivots.iter().zip(&sol) {
        flat[p] = (v * Rational::from_integer(den.clone()))
            .to_integer()
            .try_into()
            .expect("small coweight");
    }
    let w = WeightMatrix::new(k, flat.chunks(k).map(<[i64]>::to_vec).collect()).expect("shape");
    assert!(
        basis.iter().all(|s| w.dot(&s.weight(k)) > 0),
        "coweight must be positive"
    );
    w
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegenerationReport {
    pub k: usize,
    pub coweight: WeightMatrix,
    pub invariant_terms: usize,
    pub moving_terms: usize,
    /// Smallest `t`-exponent among the non-invariant terms, if any.
    pub min_positive_exponent: Option<i64>,
    pub limit_is_invariant_part: bool,
    pub note: String,
}

/// Rescales `E_i^j` by `t^{w_{ji}}` and records the `t`-exponent of every
/// term of the quadratic bracket.
pub fn verify_degeneration(k: usize) -> DegenerationReport {
    let w = find_coweight(k);
    let nodal = quad_nodal_structure(k);
    let delta = pi_delta(k);
    let terms: Vec<(bool, i64)> = nodal
        .entries()
        .collect::<Vec<_>>()
        .par_iter()
        .flat_map_iter(|&(a, b, p)| {
            let w = &w;
            p.terms()
                .map(move |(mono, _)| {
                    let wt = weight_of_term(k, &monomial_coords(k, p, mono), a, b).expect("chart indices");
                    (wt.is_zero(), w.dot(&wt))
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let invariant_terms = terms.iter().filter(|t| t.0).count();
    let moving: Vec<i64> = terms.iter().filter(|t| !t.0).map(|t| t.1).collect();
    let min_positive_exponent = moving.iter().copied().min();
    let limit_ok = moving.iter().all(|&e| e > 0) && invariant_projection(&nodal).map(|p| p == delta).unwrap_or(false);
    let note = if moving.is_empty() {
        "degenerate case, limit immediate".to_string()
    } else if limit_ok {
        "every non-invariant term carries a positive power of t".to_string()
    } else {
        "some non-invariant term does not vanish in the limit".to_string()
    };
    DegenerationReport {
        k,
        coweight: w,
        invariant_terms,
        moving_terms: moving.len(),
        min_positive_exponent,
        limit_is_invariant_part: limit_ok,
        note,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brackets::{aff_structure, darboux_structure};
    use crate::charts::CoordIndex as C;

    #[test]
    fn term_weights() {
        let z = weight_of_term(1, &[(C::new(0, 0), 1), (C::new(0, 1), 1)], C::new(0, 0), C::new(0, 1)).unwrap();
        assert!(z.is_zero());
        let w = weight_of_term(1, &[(C::new(0, 0), 2)], C::new(0, 1), C::new(0, 1)).unwrap();
        assert_eq!(w.entries(), &[vec![2], vec![-2]]);
        assert!(weight_of_term(1, &[], C::new(1, 0), C::new(0, 0)).is_err());
    }

    #[test]
    fn pi_delta_k1_and_projection() {
        assert_eq!(pi_coefficient(C::new(0, 0), C::new(0, 1)), 1);
        let q = quad_nodal_structure(1);
        assert_eq!(invariant_projection(&q).unwrap(), q);
        assert_eq!(pi_delta(1), q);
        for k in 1..=4 {
            assert_eq!(
                invariant_projection(&quad_nodal_structure(k)).unwrap(),
                pi_delta(k),
                "k={k}"
            );
            let d = invariant_projection(&darboux_structure(k)).unwrap();
            assert!(d.entries().all(|(_, _, p)| p.is_zero()));
            let a = invariant_projection(&aff_structure(k)).unwrap();
            assert!(a.entries().all(|(_, _, p)| p.is_zero()));
        }
    }

    #[test]
    fn projection_rejects_cubic() {
        let s = crate::brackets::structure_from_f(
            1,
            &crate::exactalg::parse_poly(&crate::exactalg::VarContext::xy(), "x^2*y").unwrap(),
        )
        .unwrap();
        assert!(matches!(invariant_projection(&s), Err(ToricError::NonQuadratic(_))));
    }

    #[test]
    fn nodal_minus_delta_has_nonzero_weights() {
        for k in 1..=3 {
            let q = quad_nodal_structure(k);
            let d = pi_delta(k);
            let ctx = q.ctx().clone();
            let _ = ctx;
            for ((a, b, p), (_, _, r)) in q.entries().zip(d.entries()) {
                let diff = p - r;
                for (mono, _) in diff.terms() {
                    let w = weight_of_term(k, &monomial_coords(k, &diff, mono), a, b).unwrap();
                    assert!(!w.is_zero());
                }
            }
        }
    }

    #[test]
    fn biresidue_k2_matches_reference() {
        let b = biresidue_matrix(2);
        let expect = vec![
            vec![0, 1, 0, 0, 0, 0],
            vec![-1, 0, 1, 1, 0, 0],
            vec![0, -1, 0, 1, 1, 0],
            vec![0, -1, -1, 0, 1, 0],
            vec![0, 0, -1, -1, 0, 1],
            vec![0, 0, 0, 0, -1, 0],
        ];
        assert_eq!(b.entries, expect);
    }

    #[test]
    fn biresidue_skew() {
        for k in 1..=5 {
            let b = biresidue_matrix(k);
            let m = b.ordering.len();
            for s in 0..m {
                for t in 0..m {
                    assert_eq!(b.entries[s][t], -b.entries[t][s]);
                    assert!(b.entries[s][t].abs() <= 1);
                }
            }
        }
    }

    #[test]
    fn inverse_relation_constant() {
        let cs: Vec<Rational> = (1..=5).map(|k| inverse_relation_check(k).unwrap()).collect();
        assert!(cs.iter().all(|c| *c == int(-1)));
    }

    #[test]
    fn smoothable_counts_and_rank() {
        for k in 1..=4 {
            let basis = smoothable_basis(k);
            assert_eq!(basis.len(), k * (k + 1) - 1);
            let (_, mat) = basis_matrix(k);
            assert_eq!(mat.rank(), basis.len());
        }
    }

    #[test]
    fn smoothable_equals_row_differences() {
        for k in 1..=4 {
            let mut diffs = biresidue_matrix(k).row_differences();
            let mut basis: Vec<WeightMatrix> = smoothable_basis(k).iter().map(|s| s.weight(k)).collect();
            diffs.sort();
            basis.sort();
            assert_eq!(diffs, basis, "k={k}");
        }
    }

    #[test]
    fn classification_examples() {
        let k = 3;
        let unit = rectangular_weight(k, 1, 0, 2, 1);
        assert_eq!(
            classify_weight(&unit),
            WeightClass::Smoothable(SmoothableWeight::TypeI { row: 1, col: 0 })
        );
        let rect = rectangular_weight(k, 0, 0, 2, 2);
        assert!(matches!(classify_weight(&rect), WeightClass::Rectangular { .. }));
        let single = Domino::new((0, 0), (1, 0)).unwrap().weight(k);
        assert_eq!(classify_weight(&single), WeightClass::Other);
        assert!(!WeightClass::Other.is_rectangular_or_admissible());
    }

    #[test]
    fn domino_attributes() {
        let d = Domino::new((2, 1), (0, 1)).unwrap();
        assert_eq!(d.orientation(), Orientation::S);
        assert_eq!(d.size(), 2);
        assert_eq!(d.doubled_valuation(), 0);
        let e = Domino::new((1, 2), (1, 0)).unwrap();
        assert_eq!(e.orientation(), Orientation::E);
        assert_eq!(e.doubled_valuation(), 1);
        assert!(Domino::new((0, 0), (1, 1)).is_none());
    }

    #[test]
    fn nodal_weights_are_rectangular_or_admissible() {
        for k in 1..=3 {
            for w in monomial_weights(&quad_nodal_structure(k), true) {
                assert!(classify_weight(&w).is_rectangular_or_admissible(), "k={k}\n{w}");
            }
        }
    }

    #[test]
    fn unit_square_and_telescoping() {
        let k = 3;
        let d = decompose_weight(&rectangular_weight(k, 0, 0, 1, 1)).unwrap();
        assert_eq!(
            d,
            [(SmoothableWeight::TypeI { row: 0, col: 0 }, 1)].into_iter().collect()
        );
        let d = decompose_weight(&rectangular_weight(k, 0, 0, 2, 2)).unwrap();
        assert_eq!(d.len(), 4);
        assert!(d.values().all(|&n| n == 1));
    }

    #[test]
    fn decompositions_are_nonnegative() {
        for k in 1..=4 {
            for r1 in 0..=k {
                for r2 in r1 + 1..=k {
                    for c1 in 0..k {
                        for c2 in c1 + 1..k {
                            let w = rectangular_weight(k, r1, c1, r2, c2);
                            let d = decompose_weight(&w).unwrap();
                            assert_eq!(weight_of_decomposition(k, &d), w);
                        }
                    }
                }
            }
            for (d1, d2) in admissible_pairs(k) {
                let w = d1.weight(k).plus(&d2.weight(k));
                let d = decompose_weight(&w).unwrap();
                assert_eq!(weight_of_decomposition(k, &d), w);
            }
        }
        for k in 1..=3 {
            for w in monomial_weights(&quad_nodal_structure(k), true) {
                decompose_weight(&w).unwrap();
            }
        }
    }

    #[test]
    fn game_agrees_with_solve() {
        for k in 1..=5 {
            let mut weights: Vec<WeightMatrix> = admissible_pairs(k)
                .iter()
                .map(|(a, b)| a.weight(k).plus(&b.weight(k)))
                .collect();
            for r1 in 0..=k {
                for r2 in r1 + 1..=k {
                    for c1 in 0..k {
                        for c2 in c1 + 1..k {
                            weights.push(rectangular_weight(k, r1, c1, r2, c2));
                        }
                    }
                }
            }
            for w in weights {
                let moves = domino_game(&w).unwrap();
                let total = total_of_moves(&moves);
                assert_eq!(weight_of_decomposition(k, &total), w, "k={k}\n{w}");
                assert_eq!(total, decompose_weight(&w).unwrap());
            }
        }
    }

    #[test]
    fn game_rejects_other() {
        let single = Domino::new((0, 0), (1, 0)).unwrap().weight(2);
        assert!(domino_game(&single).is_err());
        assert!(decompose_weight(&single).is_err());
    }

    #[test]
    fn coweight_is_positive() {
        assert_eq!(find_coweight(2).flat(), vec![1, 1, -3, -2, -2, 0]);
        for k in 1..=4 {
            let w = find_coweight(k);
            for s in smoothable_basis(k) {
                assert!(w.dot(&s.weight(k)) >= 1);
            }
        }
        for k in 1..=3 {
            let w = find_coweight(k);
            for m in monomial_weights(&quad_nodal_structure(k), true) {
                assert!(w.dot(&m) > 0);
            }
        }
    }

    #[test]
    fn degeneration_reports() {
        let r = verify_degeneration(1);
        assert_eq!(r.moving_terms, 0);
        assert_eq!(r.note, "degenerate case, limit immediate");
        for k in 2..=3 {
            let r = verify_degeneration(k);
            assert!(r.moving_terms > 0);
            assert!(r.limit_is_invariant_part);
            assert!(r.min_positive_exponent.unwrap() > 0);
        }
    }

    #[test]
    fn weight_json_roundtrip() {
        let w = rectangular_weight(2, 0, 0, 1, 1);
        let s = serde_json::to_string(&w).unwrap();
        assert_eq!(s, r#"{"k":2,"entries":[[1,-1],[-1,1],[0,0]]}"#);
        assert_eq!(serde_json::from_str::<WeightMatrix>(&s).unwrap(), w);
        assert!(serde_json::from_str::<WeightMatrix>(r#"{"k":2,"entries":[[0,0]]}"#).is_err());
    }
}
