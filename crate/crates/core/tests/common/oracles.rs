//! Reference implementations used to check the solvers.

use moc_core::exactnum::{legacy_decode, legacy_encode, BigInt, BigRational};
use moc_core::intlin::{DecOutcome, UndecidedReason};
use moc_core::IntMatrix;
use num_traits::{Signed, Zero};
use rand::Rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expected {
    Coefficients(Vec<BigInt>),
    NotInSpan,
    NotIntegral,
}

/// Solves `z · basis = w` over ℚ by Gauss-Jordan elimination. The rows of
/// `basis` must be independent.
pub fn rational_solve(w: &[BigInt], basis: &IntMatrix) -> Option<Vec<BigRational>> {
    let (r, c) = (basis.nrows(), w.len());
    // one equation per column of the basis
    let mut a: Vec<Vec<BigRational>> = (0..c)
        .map(|j| {
            let mut row: Vec<BigRational> = (0..r).map(|i| BigRational::from(basis.row(i)[j].clone())).collect();
            row.push(BigRational::from(w[j].clone()));
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut p = 0;
    for col in 0..r {
        let Some(k) = (p..c).find(|&k| !a[k][col].is_zero()) else { continue };
        a.swap(p, k);
        let inv = a[p][col].recip();
        for x in a[p].iter_mut() {
            *x *= &inv;
        }
        let piv = a[p].clone();
        for (k, row) in a.iter_mut().enumerate() {
            if k != p && !row[col].is_zero() {
                let f = row[col].clone();
                for (x, y) in row.iter_mut().zip(&piv) {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(col);
        p += 1;
    }
    assert_eq!(pivots.len(), r, "dependent basis");
    if a[p..].iter().any(|row| !row[r].is_zero()) {
        return None;
    }
    Some((0..r).map(|i| a[i][r].clone()).collect())
}

pub fn expected(w: &[BigInt], basis: &IntMatrix) -> Expected {
    match rational_solve(w, basis) {
        None => Expected::NotInSpan,
        Some(z) if z.iter().all(|x| x.is_integer()) => {
            Expected::Coefficients(z.iter().map(|x| x.to_integer()).collect())
        }
        Some(_) => Expected::NotIntegral,
    }
}

pub fn matches(got: &DecOutcome, want: &Expected) -> bool {
    match (got, want) {
        (DecOutcome::Coefficients(z), Expected::Coefficients(y)) => z == y,
        (DecOutcome::NotInRationalSpan, Expected::NotInSpan) => true,
        (DecOutcome::Undecided(UndecidedReason::RationalNotIntegral { .. }), Expected::NotIntegral) => true,
        _ => false,
    }
}

/// A system with independent rows, at most 8×8 and entries in [-9, 9].
pub fn random_dec_system<R: Rng>(rng: &mut R) -> (IntMatrix, Vec<BigInt>) {
    let basis = loop {
        let cols = rng.gen_range(1..=8);
        let rows = rng.gen_range(1..=cols);
        let m = IntMatrix::from_rows_with_cols(
            (0..rows).map(|_| (0..cols).map(|_| BigInt::from(rng.gen_range(-9..=9))).collect()).collect(),
            cols,
        );
        if m.rank() == rows {
            break m;
        }
    };
    let (r, c) = (basis.nrows(), basis.ncols());
    let z: Vec<BigInt> = (0..r).map(|_| BigInt::from(rng.gen_range(-9..=9))).collect();
    let mut w = basis.vec_mul(&z);
    match rng.gen_range(0..3) {
        0 => {}
        1 => {
            let k = rng.gen_range(0..c);
            w[k] += BigInt::from(rng.gen_range(1..=3));
        }
        _ => w = (0..c).map(|_| BigInt::from(rng.gen_range(-9..=9))).collect(),
    }
    (basis, w)
}

pub fn random_generators<R: Rng>(rng: &mut R) -> Vec<Vec<BigInt>> {
    let n = rng.gen_range(1..=6);
    let k = rng.gen_range(1..=8);
    (0..k)
        .map(|_| {
            (0..n)
                .map(|_| if rng.gen_bool(0.4) { BigInt::zero() } else { BigInt::from(rng.gen_range(0..=9)) })
                .collect()
        })
        .collect()
}

/// Checks an FBA output against its input: nonnegative, independent and
/// spanning the same lattice.
pub fn check_fba(gens: &[Vec<BigInt>], basis: &[Vec<BigInt>]) -> Result<(), String> {
    let n = gens[0].len();
    if basis.iter().flatten().any(|x| x.is_negative()) {
        return Err(format!("negative entry in {basis:?}"));
    }
    let out = IntMatrix::from_rows_with_cols(basis.to_vec(), n);
    if out.rank() != basis.len() {
        return Err(format!("dependent output {basis:?}"));
    }
    let input = IntMatrix::from_rows_with_cols(gens.to_vec(), n);
    if input.lattice_basis() != out.lattice_basis() {
        return Err(format!("span of {basis:?} differs from {gens:?}"));
    }
    Ok(())
}

/// Big integers of up to 60 decimal digits, both signs.
pub fn random_big<R: Rng>(rng: &mut R) -> BigInt {
    let digits = rng.gen_range(1..=60);
    let mut v = BigInt::zero();
    for _ in 0..digits {
        v = v * 10 + rng.gen_range(0..10);
    }
    if rng.gen_bool(0.5) {
        -v
    } else {
        v
    }
}

pub fn round_trips(n: &BigInt) -> bool {
    let rec = legacy_encode(n);
    let text = rec.to_text();
    let back = moc_core::exactnum::LegacyRecord::parse(&text).unwrap();
    let w = rec.words();
    back == rec && legacy_decode(&back).unwrap() == *n && (w.len() == 1 || w[0] != 0)
}
