//! Seeded generators of random test instances (chart points, group elements).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exactalg::{int, rat, QMat, Rational};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Rational with numerator in `[-bound, bound]` and denominator in `[1, 3]`.
pub fn small_rational<R: Rng>(rng: &mut R, bound: i64) -> Rational {
    rat(rng.gen_range(-bound..=bound), rng.gen_range(1..=3))
}

pub fn nonzero_rational<R: Rng>(rng: &mut R, bound: i64) -> Rational {
    loop {
        let r = small_rational(rng, bound);
        if r != int(0) {
            return r;
        }
    }
}

pub fn matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, bound: i64) -> QMat {
    QMat::from_rows(
        (0..rows)
            .map(|_| (0..cols).map(|_| small_rational(rng, bound)).collect())
            .collect(),
    )
}

pub fn invertible_matrix<R: Rng>(rng: &mut R, n: usize, bound: i64) -> QMat {
    loop {
        let m = matrix(rng, n, n, bound);
        if m.inverse().is_some() {
            return m;
        }
    }
}

/// Strictly upper triangular (hence nilpotent) matrix conjugated by a random invertible matrix.
pub fn nilpotent_matrix<R: Rng>(rng: &mut R, n: usize, bound: i64) -> QMat {
    let mut u = QMat::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            u[(i, j)] = small_rational(rng, bound);
        }
    }
    let p = invertible_matrix(rng, n, bound);
    let pi = p.inverse().expect("invertible");
    &(&p * &u) * &pi
}

/// Random `(k+1) x k` chart matrix drawn from a mix of families so that
/// nontrivial orbit data at the origin occur often: fully random, last row
/// zero with nilpotent top block, sparse entries in {-1,0,1}, and x-axis-supported
/// (last row zero, random top block).
pub fn chart_matrix<R: Rng>(rng: &mut R, k: usize) -> QMat {
    let family = *[0u8, 1, 2, 3].choose(rng).expect("nonempty");
    match family {
        0 => matrix(rng, k + 1, k, 3),
        1 => {
            let n = nilpotent_matrix(rng, k, 2);
            embed_top(&n, k)
        }
        2 => QMat::from_rows(
            (0..=k)
                .map(|_| (0..k).map(|_| int(rng.gen_range(-1..=1))).collect())
                .collect(),
        ),
        _ => {
            let top = matrix(rng, k, k, 2);
            embed_top(&top, k)
        }
    }
}

/// `(k+1) x k` matrix with `top` in the first `k` rows and a zero last row.
pub fn embed_top(top: &QMat, k: usize) -> QMat {
    let mut e = QMat::zeros(k + 1, k);
    for i in 0..k {
        for j in 0..k {
            e[(i, j)] = top[(i, j)].clone();
        }
    }
    e
}
