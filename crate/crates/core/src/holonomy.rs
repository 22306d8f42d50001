//! Cyclically monotone matrices, interval overlap matrices and the
//! row-span test for the constant vector.

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::exactalg::{format_rational, int, rat, QMat, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HolonomyError {
    #[error("matrix is not square and skew-symmetric")]
    NotSkew,
    #[error("intervals must be nonempty with pairwise distinct endpoints")]
    BadIntervals,
    #[error("no admissible left endpoint for interval {0}")]
    RealizationFailure(usize),
    #[error("interval exchange precondition fails: {0}")]
    Precondition(String),
}

/// A skew-symmetric integer matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<i64>>", into = "Vec<Vec<i64>>")]
pub struct CMMatrix {
    entries: Vec<Vec<i64>>,
}

impl TryFrom<Vec<Vec<i64>>> for CMMatrix {
    type Error = HolonomyError;
    fn try_from(rows: Vec<Vec<i64>>) -> Result<Self, HolonomyError> {
        CMMatrix::new(rows)
    }
}

impl From<CMMatrix> for Vec<Vec<i64>> {
    fn from(b: CMMatrix) -> Self {
        b.entries
    }
}

impl CMMatrix {
    pub fn new(entries: Vec<Vec<i64>>) -> Result<CMMatrix, HolonomyError> {
        let m = entries.len();
        if entries.iter().any(|r| r.len() != m) {
            return Err(HolonomyError::NotSkew);
        }
        for a in 0..m {
            for b in 0..m {
                if entries[a][b] != -entries[b][a] {
                    return Err(HolonomyError::NotSkew);
                }
            }
        }
        Ok(CMMatrix { entries })
    }

    pub fn zeros(m: usize) -> CMMatrix {
        CMMatrix {
            entries: vec![vec![0; m]; m],
        }
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Vec<i64>] {
        &self.entries
    }

    pub fn get(&self, a: usize, b: usize) -> i64 {
        self.entries[a][b]
    }

    pub fn negated(&self) -> CMMatrix {
        CMMatrix {
            entries: self.entries.iter().map(|r| r.iter().map(|v| -v).collect()).collect(),
        }
    }

    /// `P B P^T` with `perm[new] = old`.
    pub fn reindexed(&self, perm: &[usize]) -> CMMatrix {
        CMMatrix {
            entries: perm
                .iter()
                .map(|&a| perm.iter().map(|&b| self.entries[a][b]).collect())
                .collect(),
        }
    }

    fn has_01_upper(&self) -> bool {
        let m = self.size();
        (0..m).all(|a| (a + 1..m).all(|b| matches!(self.entries[a][b], 0 | 1)))
    }

    fn to_qmat(&self) -> QMat {
        QMat::from_i64(&self.entries)
    }
}

fn monotone_rows(b: &CMMatrix) -> bool {
    let m = b.size();
    (0..m).all(|a| {
        let row = &b.entries[a];
        (1..m - 1).all(|t| row[(a + t) % m] >= row[(a + t + 1) % m])
    })
}

/// Every row weakly decreasing cyclically after the diagonal, for `B` or `-B`.
pub fn is_cyclically_monotone(b: &CMMatrix) -> bool {
    b.size() <= 1 || monotone_rows(b) || monotone_rows(&b.negated())
}

/// Whether `(1, ..., 1)` lies in the row span of `B`.
pub fn constant_in_rowspan(b: &CMMatrix) -> bool {
    vector_in_rowspan(b, &vec![Rational::one(); b.size()])
}

pub fn vector_in_rowspan(b: &CMMatrix, v: &[Rational]) -> bool {
    let q = b.to_qmat();
    let ext = q.vstack(&QMat::from_rows(vec![v.to_vec()]));
    ext.rank() == q.rank()
}

/// Open intervals `(c, d)` with all endpoints distinct.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalTuple {
    intervals: Vec<(Rational, Rational)>,
}

impl IntervalTuple {
    pub fn new(intervals: Vec<(Rational, Rational)>) -> Result<IntervalTuple, HolonomyError> {
        if intervals.iter().any(|(c, d)| c >= d) {
            return Err(HolonomyError::BadIntervals);
        }
        let mut ends: Vec<&Rational> = intervals.iter().flat_map(|(c, d)| [c, d]).collect();
        ends.sort();
        if ends.windows(2).any(|w| w[0] == w[1]) {
            return Err(HolonomyError::BadIntervals);
        }
        Ok(IntervalTuple { intervals })
    }

    pub fn intervals(&self) -> &[(Rational, Rational)] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn lengths(&self) -> Vec<Rational> {
        self.intervals.iter().map(|(c, d)| d - c).collect()
    }

    /// Endpoints as strings, for serialization.
    pub fn to_strings(&self) -> Vec<[String; 2]> {
        self.intervals
            .iter()
            .map(|(c, d)| [format_rational(c), format_rational(d)])
            .collect()
    }
}

fn overlaps_left(a: &(Rational, Rational), b: &(Rational, Rational)) -> bool {
    a.0 < b.0 && b.0 < a.1 && a.1 < b.1
}

/// `B(J)_{ab} = 1` if `J_a` overlaps `J_b` on the left, `-1` on the right.
pub fn interval_matrix(j: &IntervalTuple) -> CMMatrix {
    let iv = &j.intervals;
    let entries = iv
        .iter()
        .map(|a| {
            iv.iter()
                .map(|b| overlaps_left(a, b) as i64 - overlaps_left(b, a) as i64)
                .collect()
        })
        .collect();
    CMMatrix { entries }
}

/// Unit intervals with increasing left endpoints, chosen at midpoints of the allowed ranges.
fn recipe(b: &CMMatrix) -> Result<IntervalTuple, HolonomyError> {
    let m = b.size();
    let half = rat(1, 2);
    let mut c: Vec<Rational> = Vec::with_capacity(m);
    for beta in 0..m {
        if beta == 0 {
            c.push(Rational::zero());
            continue;
        }
        let k_beta = (0..beta).find(|&a| b.get(a, beta) == 1).unwrap_or(beta);
        let next = if k_beta == beta {
            &c[beta - 1] + int(3) / int(2)
        } else {
            let mut lo = c[beta - 1].clone();
            if k_beta >= 1 {
                let alt = &c[k_beta - 1] + int(1);
                if alt > lo {
                    lo = alt;
                }
            }
            let hi = &c[k_beta] + int(1);
            if lo >= hi {
                return Err(HolonomyError::RealizationFailure(beta));
            }
            (lo + hi) * &half
        };
        c.push(next);
    }
    IntervalTuple::new(c.into_iter().map(|x| (x.clone(), x + int(1))).collect())
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                rec(cur, used, out);
                cur.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; m], &mut out);
    out
}

/// Unit-length intervals with `B(J) = B`. Matrices whose realization needs a
/// different left-endpoint order are handled by reindexing.
pub fn realize_intervals(b: &CMMatrix) -> Result<IntervalTuple, HolonomyError> {
    if let Ok(j) = recipe(b) {
        if &interval_matrix(&j) == b {
            return Ok(j);
        }
    }
    for perm in permutations(b.size()) {
        let pb = b.reindexed(&perm);
        if !pb.has_01_upper() {
            continue;
        }
        if let Ok(j) = recipe(&pb) {
            if interval_matrix(&j) == pb {
                let mut intervals = vec![(Rational::zero(), Rational::zero()); b.size()];
                for (new, &old) in perm.iter().enumerate() {
                    intervals[old] = j.intervals[new].clone();
                }
                return IntervalTuple::new(intervals);
            }
        }
    }
    Err(HolonomyError::RealizationFailure(b.size()))
}

/// All skew matrices with `0/1` above the diagonal that are cyclically monotone.
pub fn enumerate_cm_01(m: usize) -> Vec<CMMatrix> {
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|a| (a + 1..m).map(move |b| (a, b))).collect();
    let first = m.saturating_sub(1);
    let rest = pairs.len() - first;
    let build = |bits: u64| {
        let mut e = vec![vec![0i64; m]; m];
        for (t, &(a, b)) in pairs.iter().enumerate() {
            let v = ((bits >> t) & 1) as i64;
            e[a][b] = v;
            e[b][a] = -v;
        }
        CMMatrix { entries: e }
    };
    let mut out: Vec<(u64, CMMatrix)> = (0..1u64 << first)
        .into_par_iter()
        .flat_map_iter(|head| {
            (0..1u64 << rest).filter_map(move |tail| {
                let bits = head | (tail << first);
                let b = build(bits);
                is_cyclically_monotone(&b).then_some((bits, b))
            })
        })
        .collect();
    out.sort_by_key(|(bits, _)| *bits);
    out.into_iter().map(|(_, b)| b).collect()
}

/// One step of the inductive reduction: `T` swaps the segments
/// `[c_g, c_m]`, `[c_m, d_g]`, `[d_g, d_m]` into the order blue, green, red,
/// then intervals `g` and `m` are dropped.
pub fn interval_exchange(j: &IntervalTuple, gamma: usize, m: usize) -> Result<IntervalTuple, HolonomyError> {
    let iv = &j.intervals;
    if m + 1 != iv.len() || gamma >= m {
        return Err(HolonomyError::Precondition(
            "m must be the last index and gamma < m".into(),
        ));
    }
    if !overlaps_left(&iv[gamma], &iv[m]) {
        return Err(HolonomyError::Precondition(format!(
            "interval {gamma} does not overlap the last on the left"
        )));
    }
    if (gamma + 1..m).any(|g| overlaps_left(&iv[g], &iv[m])) {
        return Err(HolonomyError::Precondition(format!(
            "{gamma} is not the largest overlapping index"
        )));
    }
    let (cg, dg) = iv[gamma].clone();
    let (cm, dm) = iv[m].clone();
    let t = |x: &Rational| -> Rational {
        if *x < cg || *x > dm {
            x.clone()
        } else if *x < cm {
            x + (&dm - &cm)
        } else if *x < dg {
            x - &cm + &cg + (&dm - &dg)
        } else {
            x - &dg + &cg
        }
    };
    let out = iv
        .iter()
        .enumerate()
        .filter(|&(a, _)| a != gamma && a != m)
        .map(|(_, (c, d))| {
            let (tc, td) = (t(c), t(d));
            if tc < td {
                (tc, td)
            } else {
                (td, tc)
            }
        })
        .collect();
    IntervalTuple::new(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExchangeEnd {
    /// Reduced to at most one interval.
    Base,
    /// The last interval is overlapped by nothing, so its length is not in the row span.
    Isolated,
}

#[derive(Clone, Debug)]
pub struct ExchangeTrace {
    pub stages: Vec<IntervalTuple>,
    pub end: ExchangeEnd,
}

/// Repeats [`interval_exchange`] after sorting by left endpoint until a base case.
pub fn interval_exchange_trace(j: &IntervalTuple) -> Result<ExchangeTrace, HolonomyError> {
    let mut cur = j.clone();
    let mut stages = Vec::new();
    loop {
        cur.intervals.sort();
        stages.push(cur.clone());
        if cur.len() <= 1 {
            return Ok(ExchangeTrace {
                stages,
                end: ExchangeEnd::Base,
            });
        }
        let m = cur.len() - 1;
        match (0..m)
            .rev()
            .find(|&g| overlaps_left(&cur.intervals[g], &cur.intervals[m]))
        {
            None => {
                return Ok(ExchangeTrace {
                    stages,
                    end: ExchangeEnd::Isolated,
                })
            }
            Some(g) => cur = interval_exchange(&cur, g, m)?,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use rand::Rng;

    fn cm(rows: &[&[i64]]) -> CMMatrix {
        CMMatrix::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn iv(pairs: &[(i64, i64, i64, i64)]) -> IntervalTuple {
        IntervalTuple::new(pairs.iter().map(|&(a, b, c, d)| (rat(a, b), rat(c, d))).collect()).unwrap()
    }

    #[test]
    fn monotonicity_examples() {
        assert!(is_cyclically_monotone(&CMMatrix::zeros(4)));
        assert!(is_cyclically_monotone(&cm(&[&[0, 1], &[-1, 0]])));
        let bad = cm(&[&[0, 0, 1], &[0, 0, 1], &[-1, -1, 0]]);
        assert!(!is_cyclically_monotone(&bad));
        assert!(CMMatrix::new(vec![vec![0, 1], vec![1, 0]]).is_err());
    }

    #[test]
    fn biresidue_matrices_are_monotone() {
        for k in 1..=5 {
            let b = crate::toric::biresidue_matrix(k);
            assert!(is_cyclically_monotone(&CMMatrix::new(b.entries).unwrap()), "k={k}");
        }
    }

    #[test]
    fn rowspan_examples() {
        assert!(!constant_in_rowspan(&cm(&[&[0, 1, 0], &[-1, 0, 1], &[0, -1, 0]])));
        assert!(constant_in_rowspan(&cm(&[&[0, 1], &[-1, 0]])));
    }

    #[test]
    fn interval_matrix_examples() {
        let j = iv(&[(0, 1, 1, 1), (1, 2, 3, 2)]);
        assert_eq!(interval_matrix(&j), cm(&[&[0, 1], &[-1, 0]]));
        let disjoint = iv(&[(0, 1, 1, 1), (2, 1, 3, 1), (4, 1, 5, 1)]);
        assert_eq!(interval_matrix(&disjoint), CMMatrix::zeros(3));
        let nested = iv(&[(0, 1, 5, 1), (1, 1, 2, 1)]);
        assert_eq!(interval_matrix(&nested), CMMatrix::zeros(2));
        assert!(IntervalTuple::new(vec![(int(0), int(1)), (int(1), int(2))]).is_err());
    }

    #[test]
    fn realize_examples() {
        let j = realize_intervals(&cm(&[&[0, 1], &[-1, 0]])).unwrap();
        assert_eq!(j.intervals()[0], (int(0), int(1)));
        assert_eq!(j.intervals()[1], (rat(1, 2), rat(3, 2)));
        let z = realize_intervals(&CMMatrix::zeros(3)).unwrap();
        assert_eq!(interval_matrix(&z), CMMatrix::zeros(3));
        assert!(z.lengths().iter().all(|l| *l == int(1)));
    }

    #[test]
    fn enumeration_counts() {
        let counts: Vec<usize> = (1..=6).map(|m| enumerate_cm_01(m).len()).collect();
        assert_eq!(counts, vec![1, 2, 6, 15, 43, 133]);
        assert_eq!(enumerate_cm_01(1), vec![CMMatrix::zeros(1)]);
    }

    #[test]
    fn odd_sizes_avoid_constant_vector() {
        for m in [1, 3, 5] {
            assert!(enumerate_cm_01(m).iter().all(|b| !constant_in_rowspan(b)), "m={m}");
        }
    }

    #[test]
    fn realization_roundtrip_small() {
        for m in 1..=5 {
            for b in enumerate_cm_01(m) {
                let j = realize_intervals(&b).unwrap();
                assert_eq!(interval_matrix(&j), b);
                assert!(j.lengths().iter().all(|l| *l == int(1)));
            }
        }
    }

    #[test]
    fn realization_roundtrip_random_seven() {
        let all = enumerate_cm_01(7);
        let mut rng = random::rng(17);
        for _ in 0..40 {
            let b = &all[rng.gen_range(0..all.len())];
            assert_eq!(&interval_matrix(&realize_intervals(b).unwrap()), b);
        }
    }

    #[test]
    fn exchange_single_pair() {
        let j = iv(&[(0, 1, 1, 1), (1, 2, 3, 2), (3, 1, 4, 1)]);
        assert!(matches!(
            interval_exchange(&j, 0, 2),
            Err(HolonomyError::Precondition(_))
        ));
        let j = iv(&[(3, 1, 4, 1), (0, 1, 1, 1), (1, 2, 3, 2)]);
        let out = interval_exchange(&j, 1, 2).unwrap();
        assert_eq!(out.intervals(), &[(int(3), int(4))]);
    }

    #[test]
    fn exchange_terminates_and_preserves_criterion() {
        for m in 1..=5 {
            for b in enumerate_cm_01(m) {
                let j = realize_intervals(&b).unwrap();
                let trace = interval_exchange_trace(&j).unwrap();
                for pair in trace.stages.windows(2) {
                    assert_eq!(pair[1].len() + 2, pair[0].len());
                }
                if m % 2 == 1 {
                    for s in &trace.stages {
                        assert!(!vector_in_rowspan(&interval_matrix(s), &s.lengths()));
                    }
                }
                if trace.end == ExchangeEnd::Base {
                    assert!(trace.stages.last().unwrap().len() <= 1);
                }
            }
        }
    }
}
