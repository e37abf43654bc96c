//! Basic sets of Brauer and projective characters, the coordinate systems
//! they induce, and the search for factorizations `U = U₁·U₂`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::charops::{inner_product, ClassFunction};
use crate::chartable::MocTable;
use crate::error::{Error, Result};
use crate::exactnum::{BigInt, BigRational};
use crate::intlin::{dec_solve, dot, DecOutcome, IntMatrix, UndecidedReason};

/// Rows of the table restricted to the p-regular columns.
pub fn hat_matrix(table: &MocTable, p: u64, rows: &[usize]) -> IntMatrix {
    let cols: Vec<usize> = table
        .families
        .iter()
        .enumerate()
        .filter(|(fi, _)| table.family_is_p_regular(*fi, p))
        .flat_map(|(_, f)| f.columns())
        .collect();
    let out = rows
        .iter()
        .map(|&r| cols.iter().map(|&c| table.rows.get(r, c).clone()).collect())
        .collect();
    IntMatrix::from_rows_with_cols(out, cols.len())
}

/// Number of irreducible Brauer characters in a block, as the rank of its
/// restricted ordinary characters.
pub fn ibr_count(hat: &IntMatrix) -> usize {
    hat.rank()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BasicWitness {
    /// A nonzero integral relation among the candidate rows.
    Dependency(Vec<BigInt>),
    /// This restricted character is outside the rational span.
    OutsideSpan { row: usize },
    /// Only a non-integral combination of the candidate gives this row.
    NonIntegral { row: usize, coeffs: Vec<BigRational> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BrauerVerdict {
    /// `relations · candidate = hat`.
    Basic { relations: IntMatrix },
    NotBasic(BasicWitness),
}

/// Decides whether `candidate` is a ℤ-basis of the lattice spanned by the
/// rows of `hat`.
pub fn certify_brauer_basic(hat: &IntMatrix, candidate: &IntMatrix) -> Result<BrauerVerdict> {
    if hat.ncols() != candidate.ncols() {
        return Err(Error::Domain(format!(
            "candidate width {} differs from {}",
            candidate.ncols(),
            hat.ncols()
        )));
    }
    if candidate.rank() < candidate.nrows() {
        let k = candidate.left_kernel();
        return Ok(BrauerVerdict::NotBasic(BasicWitness::Dependency(k.row(0).to_vec())));
    }
    let mut rel = Vec::with_capacity(hat.nrows());
    for i in 0..hat.nrows() {
        match dec_solve(hat.row(i), candidate)? {
            DecOutcome::Coefficients(z) => rel.push(z),
            DecOutcome::NotInRationalSpan => {
                return Ok(BrauerVerdict::NotBasic(BasicWitness::OutsideSpan { row: i }))
            }
            DecOutcome::Undecided(UndecidedReason::RationalNotIntegral { .. }) => {
                let coeffs = candidate
                    .solve_left_rational(hat.row(i))
                    .ok_or_else(|| Error::Solver("rational solve disagrees with DEC".into()))?;
                if coeffs.iter().all(|c| c.is_integer()) {
                    rel.push(coeffs.iter().map(|c| c.to_integer()).collect());
                } else {
                    return Ok(BrauerVerdict::NotBasic(BasicWitness::NonIntegral { row: i, coeffs }));
                }
            }
            DecOutcome::Undecided(r) => {
                return Err(Error::Inconclusive(format!("row {i}: solver gave up ({r:?})")))
            }
        }
    }
    Ok(BrauerVerdict::Basic { relations: IntMatrix::from_rows_with_cols(rel, candidate.nrows()) })
}

/// The matrix of inner products `⟨bs_i, ps_j⟩`.
pub fn pair_matrix(bs: &[ClassFunction], ps: &[ClassFunction]) -> Result<IntMatrix> {
    let mut rows = Vec::with_capacity(bs.len());
    for b in bs {
        let mut r = Vec::with_capacity(ps.len());
        for p in ps {
            let v = inner_product(b, p)?;
            if !v.is_integer() {
                return Err(Error::Domain(format!("non-integral inner product {v}")));
            }
            r.push(v.to_integer());
        }
        rows.push(r);
    }
    Ok(IntMatrix::from_rows_with_cols(rows, ps.len()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PairVerdict {
    BasicPair { u: IntMatrix },
    Reject { det: BigInt },
}

pub fn certify_pair(u: &IntMatrix) -> Result<PairVerdict> {
    if !u.is_square() {
        return Err(Error::Domain(format!("{}x{} pairing matrix is not square", u.nrows(), u.ncols())));
    }
    let det = u.det()?;
    if det.abs().is_one() {
        Ok(PairVerdict::BasicPair { u: u.clone() })
    } else {
        Ok(PairVerdict::Reject { det })
    }
}

/// Columns of `u` that are standard unit vectors. Such projectives pair to 1
/// with a single basic Brauer character and so are indecomposable.
pub fn detect_atom_pims(u: &IntMatrix) -> Vec<usize> {
    (0..u.ncols())
        .filter(|&j| {
            let c = u.col(j);
            c.iter().all(|x| x.is_zero() || x.is_one()) && c.iter().filter(|x| x.is_one()).count() == 1
        })
        .collect()
}

/// x·m
pub fn to_dual_row(m: &IntMatrix, x: &[BigInt]) -> Vec<BigInt> {
    m.vec_mul(x)
}

/// Inverse of [`to_dual_row`]; `m` must be unimodular.
pub fn from_dual_row(m: &IntMatrix, a: &[BigInt]) -> Result<Vec<BigInt>> {
    Ok(m.inverse_unimodular()?.vec_mul(a))
}

/// m·w
pub fn to_dual_col(m: &IntMatrix, w: &[BigInt]) -> Vec<BigInt> {
    m.mul_vec(w)
}

pub fn from_dual_col(m: &IntMatrix, b: &[BigInt]) -> Result<Vec<BigInt>> {
    Ok(m.inverse_unimodular()?.mul_vec(b))
}

/// Everything known about one block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasicSetState {
    pub block: usize,
    /// Rows of Irr(B) forming the special basic set.
    pub bs0: Vec<usize>,
    /// Restricted Irr(B) over BS₀, one row per character of the block.
    pub s: IntMatrix,
    /// Pairing ⟨BS, PS⟩.
    pub u: IntMatrix,
    pub pims: BTreeSet<usize>,
    pub irreducibles: BTreeSet<usize>,
}

impl BasicSetState {
    pub fn new(block: usize, bs0: Vec<usize>, s: IntMatrix, u: IntMatrix) -> Result<Self> {
        let st = BasicSetState { block, bs0, s, u, pims: BTreeSet::new(), irreducibles: BTreeSet::new() };
        st.validate()?;
        Ok(st)
    }

    pub fn size(&self) -> usize {
        self.bs0.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.size();
        if self.s.ncols() != n || self.u.nrows() != n || self.u.ncols() != n {
            return Err(Error::Domain("basic set sizes disagree".into()));
        }
        for (k, &r) in self.bs0.iter().enumerate() {
            if r >= self.s.nrows() {
                return Err(Error::Domain(format!("BS0 row {r} outside the block")));
            }
            for j in 0..n {
                let want = if j == k { BigInt::one() } else { BigInt::zero() };
                if *self.s.get(r, j) != want {
                    return Err(Error::Domain("S is not the identity on BS0".into()));
                }
            }
        }
        Ok(())
    }

    /// BS-coordinates of a Brauer character to BA-coordinates.
    pub fn bs_to_ba(&self, x: &[BigInt]) -> Vec<BigInt> {
        to_dual_row(&self.u, x)
    }

    pub fn ba_to_bs(&self, a: &[BigInt]) -> Result<Vec<BigInt>> {
        from_dual_row(&self.u, a)
    }

    /// PS-coordinates of a projective to PA-coordinates.
    pub fn ps_to_pa(&self, w: &[BigInt]) -> Vec<BigInt> {
        to_dual_col(&self.u, w)
    }

    pub fn pa_to_ps(&self, b: &[BigInt]) -> Result<Vec<BigInt>> {
        from_dual_col(&self.u, b)
    }

    /// Irr-coefficients of a projective to its PA₀-coordinates.
    pub fn irr_to_pa0(&self, a: &[BigInt]) -> Vec<BigInt> {
        self.bs0.iter().map(|&r| a[r].clone()).collect()
    }

    pub fn pa0_to_irr(&self, p: &[BigInt]) -> Vec<BigInt> {
        self.s.mul_vec(p)
    }

    /// Inner product of a Brauer character in BS-coordinates with a
    /// projective in PS-coordinates.
    pub fn pairing(&self, x: &[BigInt], w: &[BigInt]) -> BigInt {
        dot(x, &self.u.mul_vec(w))
    }

    /// Projectives ordered by their columns of ⟨BS, ·⟩, top to bottom.
    pub fn lex_cmp_projectives(&self, w1: &[BigInt], w2: &[BigInt]) -> Ordering {
        self.ps_to_pa(w1).cmp(&self.ps_to_pa(w2))
    }

    pub fn mark_atoms(&mut self) -> Vec<usize> {
        let atoms = detect_atom_pims(&self.u);
        self.pims.extend(atoms.iter().copied());
        atoms
    }
}

// ---------------------------------------------------------------------------
// Fundamental problem I

#[derive(Debug, Clone)]
pub struct Fp1Instance {
    pub u: IntMatrix,
    pub v: IntMatrix,
    pub w: IntMatrix,
}

#[derive(Debug, Clone, Copy)]
pub struct Budget {
    pub nodes: u64,
    pub time: Option<Duration>,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { nodes: 100_000_000, time: Some(Duration::from_secs(1800)) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fp1Solution {
    pub u1: IntMatrix,
    pub u2: IntMatrix,
}

#[derive(Debug, Clone)]
pub struct Fp1Result {
    pub solutions: Vec<Fp1Solution>,
    pub nodes: u64,
    pub complete: bool,
}

fn small(m: &IntMatrix) -> Result<Vec<Vec<i64>>> {
    (0..m.nrows())
        .map(|i| {
            m.row(i)
                .iter()
                .map(|x| x.to_i64().ok_or_else(|| Error::Domain("entry too large for the search".into())))
                .collect()
        })
        .collect()
}

fn max_mult(u: &[i64], c: &[i64]) -> i64 {
    u.iter().zip(c).filter(|(a, _)| **a > 0).map(|(a, b)| b / a).min().unwrap_or(0)
}

const RANK_PRIME: u128 = (1 << 61) - 1;

fn pow_mod(mut b: u128, mut e: u128) -> u128 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % RANK_PRIME;
        }
        b = b * b % RANK_PRIME;
        e >>= 1;
    }
    r
}

fn full_rank_mod_prime(vecs: &[Vec<i64>]) -> bool {
    let p = RANK_PRIME as i128;
    let mut m: Vec<Vec<u128>> =
        vecs.iter().map(|v| v.iter().map(|&x| (x as i128).rem_euclid(p) as u128).collect()).collect();
    let n = m.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..n {
        let Some(piv) = (r..m.len()).find(|&i| m[i][c] != 0) else { continue };
        m.swap(r, piv);
        let inv = pow_mod(m[r][c], RANK_PRIME - 2);
        for i in r + 1..m.len() {
            if m[i][c] != 0 {
                let f = m[i][c] * inv % RANK_PRIME;
                for k in c..n {
                    m[i][k] = (m[i][k] + RANK_PRIME - f * m[r][k] % RANK_PRIME) % RANK_PRIME;
                }
            }
        }
        r += 1;
    }
    r == m.len()
}

fn rank_i64(vecs: &[Vec<i64>]) -> usize {
    if full_rank_mod_prime(vecs) {
        return vecs.len();
    }
    let rows = vecs.iter().map(|v| v.iter().map(|&x| BigInt::from(x)).collect()).collect();
    IntMatrix::from_rows(rows).rank()
}

struct Search<'a> {
    m: usize,
    cols: Vec<Vec<i64>>,
    order: Vec<usize>,
    v: &'a [Vec<i64>],
    w: &'a [Vec<i64>],
    budget: Budget,
    start: Instant,
    nodes: u64,
    out_of_budget: bool,
    found: BTreeMap<Vec<Vec<i64>>, Fp1Solution>,
}

impl Search<'_> {
    /// Nonzero vectors `v ≤ r` with `v[first] > 0` and `V·v ≥ 0`.
    fn parts(&self, r: &[i64], first: usize) -> Vec<Vec<i64>> {
        let n = r.len();
        // slack[k][i]: the most coordinates i.. can still add to row k of V·v
        let slack: Vec<Vec<i64>> = self
            .v
            .iter()
            .map(|row| {
                let mut s = vec![0; n + 1];
                for i in (0..n).rev() {
                    s[i] = s[i + 1] + r[i] * row[i].max(0);
                }
                s
            })
            .collect();
        let mut out = Vec::new();
        let mut cur = vec![0; n];
        let mut acc = vec![0; self.v.len()];
        self.parts_rec(r, first, 0, &slack, &mut cur, &mut acc, &mut out);
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn parts_rec(
        &self,
        r: &[i64],
        first: usize,
        i: usize,
        slack: &[Vec<i64>],
        cur: &mut Vec<i64>,
        acc: &mut Vec<i64>,
        out: &mut Vec<Vec<i64>>,
    ) {
        if acc.iter().zip(slack).any(|(a, s)| a + s[i] < 0) {
            return;
        }
        if i == r.len() {
            out.push(cur.clone());
            return;
        }
        let lo = i64::from(i == first);
        for t in lo..=r[i] {
            cur[i] = t;
            for (a, row) in acc.iter_mut().zip(self.v) {
                *a += t * row[i];
            }
            self.parts_rec(r, first, i + 1, slack, cur, acc, out);
            for (a, row) in acc.iter_mut().zip(self.v) {
                *a -= t * row[i];
            }
        }
        cur[i] = 0;
    }

    fn w_ok(&self, c: &[Vec<i64>], u2: &[Option<Vec<i64>>]) -> bool {
        for w in self.w {
            for (k, u) in c.iter().enumerate() {
                let mut known = 0;
                let mut pot = 0;
                for j in 0..self.m {
                    match &u2[j] {
                        Some(col) => known += w[j] * col.get(k).copied().unwrap_or(0),
                        None if w[j] > 0 => pot += w[j] * max_mult(u, &self.cols[j]),
                        None => {}
                    }
                }
                if known + pot < 0 {
                    return false;
                }
            }
        }
        true
    }

    fn exhausted(&mut self) -> bool {
        if self.nodes >= self.budget.nodes || self.budget.time.is_some_and(|t| self.start.elapsed() > t) {
            self.out_of_budget = true;
        }
        self.out_of_budget
    }

    fn run(&mut self, pos: usize, c: &mut Vec<Vec<i64>>, u2: &mut Vec<Option<Vec<i64>>>) {
        if self.exhausted() {
            return;
        }
        self.nodes += 1;
        if pos == self.m {
            if c.len() == self.m {
                self.record(c, u2);
            }
            return;
        }
        let j = self.order[pos];
        let col = self.cols[j].clone();
        let mut xs = Vec::new();
        self.choose(pos, 0, col, &mut xs, c, u2);
    }

    fn choose(
        &mut self,
        pos: usize,
        k: usize,
        r: Vec<i64>,
        xs: &mut Vec<i64>,
        c: &mut Vec<Vec<i64>>,
        u2: &mut Vec<Option<Vec<i64>>>,
    ) {
        if self.out_of_budget {
            return;
        }
        if k == c.len() {
            let base = c.len();
            let mut newv = Vec::new();
            self.decompose(pos, r, base, xs, &mut newv, c, u2);
            return;
        }
        let mx = max_mult(&c[k], &r);
        for x in (0..=mx).rev() {
            let r2: Vec<i64> = r.iter().zip(&c[k]).map(|(a, b)| a - x * b).collect();
            xs.push(x);
            self.choose(pos, k + 1, r2, xs, c, u2);
            xs.pop();
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn decompose(
        &mut self,
        pos: usize,
        r: Vec<i64>,
        base: usize,
        xs: &[i64],
        newv: &mut Vec<i64>,
        c: &mut Vec<Vec<i64>>,
        u2: &mut Vec<Option<Vec<i64>>>,
    ) {
        if self.out_of_budget {
            return;
        }
        let Some(first) = r.iter().position(|&x| x > 0) else {
            if rank_i64(c) < c.len() {
                return;
            }
            let j = self.order[pos];
            let mut col = xs.to_vec();
            col.extend(newv.iter());
            u2[j] = Some(col);
            if self.w_ok(c, u2) {
                self.run(pos + 1, c, u2);
            }
            u2[j] = None;
            return;
        };
        if c.len() == self.m {
            return;
        }
        for v in self.parts(&r, first) {
            if c[..].contains(&v) {
                continue;
            }
            let mx = max_mult(&v, &r);
            c.push(v.clone());
            for y in 1..=mx {
                let r2: Vec<i64> = r.iter().zip(&v).map(|(a, b)| a - y * b).collect();
                newv.push(y);
                self.decompose(pos, r2, base, xs, newv, c, u2);
                newv.pop();
            }
            c.pop();
        }
    }

    fn record(&mut self, c: &[Vec<i64>], u2: &[Option<Vec<i64>>]) {
        let m = self.m;
        let mut idx: Vec<usize> = (0..m).collect();
        idx.sort_by(|&a, &b| c[b].cmp(&c[a]));
        let u1 = IntMatrix::from_rows(
            (0..m).map(|i| idx.iter().map(|&k| BigInt::from(c[k][i])).collect()).collect(),
        );
        let u2m = IntMatrix::from_rows(
            idx.iter()
                .map(|&k| {
                    (0..m)
                        .map(|j| BigInt::from(u2[j].as_ref().and_then(|col| col.get(k).copied()).unwrap_or(0)))
                        .collect()
                })
                .collect(),
        );
        let key = idx.iter().map(|&k| c[k].clone()).collect();
        self.found.insert(key, Fp1Solution { u1, u2: u2m });
    }
}

/// All factorizations `U = U₁·U₂` into nonnegative unimodular matrices with
/// `V·U₁ ≥ 0` and `W·U₂ᵗ ≥ 0`, up to a simultaneous permutation of the
/// columns of U₁ and rows of U₂. Each solution has the columns of U₁ sorted
/// in decreasing lexicographic order.
pub fn enumerate_fp1(inst: &Fp1Instance, budget: Budget) -> Result<Fp1Result> {
    let m = inst.u.nrows();
    if !inst.u.is_square() {
        return Err(Error::Domain("U must be square".into()));
    }
    if !inst.u.is_nonneg() || !inst.u.det()?.abs().is_one() {
        return Err(Error::Precondition("U must be nonnegative and unimodular".into()));
    }
    if (inst.v.nrows() > 0 && inst.v.ncols() != m) || (inst.w.nrows() > 0 && inst.w.ncols() != m) {
        return Err(Error::Domain("side conditions have the wrong width".into()));
    }
    let us = small(&inst.u)?;
    let v = small(&inst.v)?;
    let w = small(&inst.w)?;
    let cols: Vec<Vec<i64>> = (0..m).map(|j| (0..m).map(|i| us[i][j]).collect()).collect();
    let mut order: Vec<usize> = (0..m).collect();
    let atoms: BTreeSet<usize> = detect_atom_pims(&inst.u).into_iter().collect();
    order.sort_by_key(|&j| (!atoms.contains(&j), cols[j].iter().sum::<i64>(), j));
    let mut s = Search {
        m,
        cols,
        order,
        v: &v,
        w: &w,
        budget,
        start: Instant::now(),
        nodes: 0,
        out_of_budget: false,
        found: BTreeMap::new(),
    };
    s.run(0, &mut Vec::new(), &mut vec![None; m]);
    let solutions: Vec<Fp1Solution> = s.found.into_values().collect();
    for sol in &solutions {
        debug_assert_eq!(sol.u1.mul(&sol.u2)?, inst.u);
    }
    Ok(Fp1Result { solutions, nodes: s.nodes, complete: !s.out_of_budget })
}

/// Checks one candidate factorization against every condition.
pub fn is_fp1_solution(inst: &Fp1Instance, u1: &IntMatrix, u2: &IntMatrix) -> Result<bool> {
    if !u1.is_nonneg() || !u2.is_nonneg() || u1.mul(u2)? != inst.u || !u1.det()?.abs().is_one() {
        return Ok(false);
    }
    let nonneg = |m: &IntMatrix| m.is_nonneg();
    let vu = if inst.v.nrows() > 0 { nonneg(&inst.v.mul(u1)?) } else { true };
    let wu = if inst.w.nrows() > 0 { nonneg(&inst.w.mul(&u2.transpose())?) } else { true };
    Ok(vu && wu)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(u: &[Vec<i64>]) -> Fp1Instance {
        let m = u.len();
        Fp1Instance {
            u: IntMatrix::from_vec_i64(u),
            v: IntMatrix::zeros(0, m),
            w: IntMatrix::zeros(0, m),
        }
    }

    #[test]
    fn identity_has_one_factorization() {
        let r = enumerate_fp1(&inst(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]), Budget::default()).unwrap();
        assert!(r.complete);
        assert_eq!(r.solutions.len(), 1);
        assert_eq!(r.solutions[0].u1, IntMatrix::identity(3));
    }

    #[test]
    fn unitriangular_two_by_two() {
        let r = enumerate_fp1(&inst(&[vec![1, 0], vec![1, 1]]), Budget::default()).unwrap();
        assert_eq!(r.solutions.len(), 2);
    }

    #[test]
    fn pair_verdicts() {
        assert!(matches!(certify_pair(&IntMatrix::identity(4)).unwrap(), PairVerdict::BasicPair { .. }));
        let two = IntMatrix::from_vec_i64(&[vec![2, 0], vec![0, 1]]);
        assert_eq!(certify_pair(&two).unwrap(), PairVerdict::Reject { det: BigInt::from(2) });
        assert_eq!(detect_atom_pims(&IntMatrix::identity(3)), vec![0, 1, 2]);
        assert!(detect_atom_pims(&IntMatrix::from_vec_i64(&[vec![1, 0], vec![1, 1]])) == vec![1]);
    }

    #[test]
    fn dependent_candidate_is_rejected() {
        let hat = IntMatrix::from_vec_i64(&[vec![1, 0], vec![0, 1]]);
        let cand = IntMatrix::from_vec_i64(&[vec![1, 1], vec![2, 2]]);
        match certify_brauer_basic(&hat, &cand).unwrap() {
            BrauerVerdict::NotBasic(BasicWitness::Dependency(d)) => {
                assert!(cand.vec_mul(&d).iter().all(|x| x.is_zero()));
            }
            other => panic!("{other:?}"),
        }
        let half = IntMatrix::from_vec_i64(&[vec![2, 0], vec![0, 1]]);
        assert!(matches!(
            certify_brauer_basic(&hat, &half).unwrap(),
            BrauerVerdict::NotBasic(BasicWitness::NonIntegral { row: 0, .. })
        ));
        let r = certify_brauer_basic(&hat, &hat).unwrap();
        assert_eq!(r, BrauerVerdict::Basic { relations: IntMatrix::identity(2) });
    }
}
