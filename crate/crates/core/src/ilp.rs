//! Integer programming by Gomory's all-integer dual simplex, an exact rational
//! phase one simplex and an enumeration oracle.

use std::cmp::Ordering;
use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{rat_floor, BigInt, BigRational};
use crate::intlin::{dot, IntMatrix};

pub const DEFAULT_PIVOT_LIMIT: usize = 100_000;

/// Minimize `c·x` subject to `A·x ≤ b` over nonnegative integer vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IlpProblem {
    pub a: IntMatrix,
    pub b: Vec<BigInt>,
    pub c: Vec<BigInt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IlpOutcome {
    Optimum { x: Vec<BigInt>, value: BigInt },
    Infeasible,
    Aborted { pivots: usize },
}

impl IlpOutcome {
    pub fn value(&self) -> Option<&BigInt> {
        match self {
            IlpOutcome::Optimum { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, IlpOutcome::Infeasible)
    }
}

impl IlpProblem {
    pub fn new(a: IntMatrix, b: Vec<BigInt>, c: Vec<BigInt>) -> Result<Self> {
        if a.nrows() != b.len() || a.ncols() != c.len() {
            return Err(Error::Domain(format!(
                "ilp dimensions {}x{} with |b| = {} and |c| = {}",
                a.nrows(),
                a.ncols(),
                b.len(),
                c.len()
            )));
        }
        Ok(IlpProblem { a, b, c })
    }

    pub fn from_i64(a: &[Vec<i64>], b: &[i64], c: &[i64]) -> Result<Self> {
        let n = c.len();
        let rows = a.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect();
        IlpProblem::new(
            IntMatrix::from_rows_with_cols(rows, n),
            b.iter().map(|&v| BigInt::from(v)).collect(),
            c.iter().map(|&v| BigInt::from(v)).collect(),
        )
    }

    pub fn nvars(&self) -> usize {
        self.c.len()
    }

    pub fn ncons(&self) -> usize {
        self.b.len()
    }

    pub fn objective(&self, x: &[BigInt]) -> BigInt {
        dot(&self.c, x)
    }

    pub fn is_feasible(&self, x: &[BigInt]) -> bool {
        x.len() == self.nvars()
            && x.iter().all(|v| !v.is_negative())
            && (0..self.ncons()).all(|i| dot(self.a.row(i), x) <= self.b[i])
    }

    /// Text form: a `minimize c₁ … cₙ` line followed by rows `a₁ … aₙ <= b`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c: Option<Vec<BigInt>> = None;
        let mut rows = Vec::new();
        let mut b = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("minimize") {
                if c.is_some() {
                    return Err(Error::Format("objective given twice".into()));
                }
                c = Some(parse_ints(rest)?);
                continue;
            }
            let (lhs, rhs) = line
                .split_once("<=")
                .ok_or_else(|| Error::Format(format!("constraint without `<=`: {line}")))?;
            rows.push(parse_ints(lhs)?);
            let r = parse_ints(rhs)?;
            if r.len() != 1 {
                return Err(Error::Format(format!("right hand side `{}`", rhs.trim())));
            }
            b.push(r.into_iter().next().unwrap());
        }
        let c = c.ok_or_else(|| Error::Format("missing `minimize` line".into()))?;
        if let Some(bad) = rows.iter().find(|r| r.len() != c.len()) {
            return Err(Error::Format(format!("row of length {} for {} variables", bad.len(), c.len())));
        }
        let n = c.len();
        IlpProblem::new(IntMatrix::from_rows_with_cols(rows, n), b, c)
    }

    pub fn to_text(&self) -> String {
        let join = |v: &[BigInt]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        let mut s = format!("minimize {}\n", join(&self.c));
        for i in 0..self.ncons() {
            let _ = writeln!(s, "{} <= {}", join(self.a.row(i)), self.b[i]);
        }
        s
    }
}

fn parse_ints(s: &str) -> Result<Vec<BigInt>> {
    s.split_whitespace()
        .map(|t| t.parse::<BigInt>().map_err(|_| Error::Format(format!("bad integer `{t}`"))))
        .collect()
}

/// An affine function `k + g·x` of the original variables.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Affine {
    k: BigInt,
    g: Vec<BigInt>,
}

/// What happened inside one run of [`gomory_solve_traced`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GomoryTrace {
    /// The entry a₀₀ before the first pivot and after every pivot.
    pub objective: Vec<BigInt>,
    /// Each cut as `(g, h)` meaning `g·x ≤ h` over the original variables.
    pub cuts: Vec<(Vec<BigInt>, BigInt)>,
    /// λ used for each cut.
    pub lambdas: Vec<BigRational>,
    pub pivots: usize,
}

struct Tableau {
    // row 0 is the objective, rows 1.. are constraints (cuts are appended)
    rows: Vec<Vec<BigInt>>,
    // current values of the (possibly complemented) variables
    xrows: Vec<Vec<BigInt>>,
    nonbasic: Vec<Affine>,
}

impl Tableau {
    fn ncols(&self) -> usize {
        self.rows[0].len()
    }

    fn lex_cmp(&self, j: usize, l: usize) -> Ordering {
        for r in &self.rows {
            match r[j].cmp(&r[l]) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }

    fn lex_positive(&self, j: usize) -> bool {
        self.rows.iter().map(|r| &r[j]).find(|v| !v.is_zero()).map_or(true, |v| v.is_positive())
    }

    /// Largest k with column j minus k times column s lexicographically ≥ 0,
    /// `None` when every k works.
    fn max_multiple(&self, j: usize, s: usize) -> Option<BigInt> {
        let i = self.rows.iter().position(|r| !r[s].is_zero())?;
        if self.rows[..i].iter().any(|r| !r[j].is_zero()) {
            return None;
        }
        let (aj, as_) = (&self.rows[i][j], &self.rows[i][s]);
        let q = aj / as_;
        if &(&q * as_) != aj {
            return Some(q);
        }
        for r in &self.rows[i + 1..] {
            let v = &r[j] - &q * &r[s];
            match v.sign() {
                num_bigint::Sign::NoSign => continue,
                num_bigint::Sign::Plus => return Some(q),
                num_bigint::Sign::Minus => return Some(q - 1),
            }
        }
        Some(q)
    }

    fn pivot(&mut self, r: usize, s: usize) {
        debug_assert_eq!(self.rows[r][s], -BigInt::one());
        let src = self.rows[r].clone();
        let n = self.ncols();
        let apply = |row: &mut Vec<BigInt>| {
            let f = row[s].clone();
            if f.is_zero() {
                return;
            }
            for j in 0..n {
                if j != s && !src[j].is_zero() {
                    row[j] += &f * &src[j];
                }
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                apply(row);
            }
        }
        for row in self.xrows.iter_mut() {
            apply(row);
        }
        let row = &mut self.rows[r];
        for j in 0..n {
            if j != s {
                row[j] = -&row[j];
            }
        }
    }
}

/// Solves the problem by Gomory's all-integer algorithm.
///
/// With `dual_feasible_hint` set the tableau must already be dual feasible
/// (the first nonzero entry of every column positive). Otherwise variables
/// whose columns violate this are complemented against a bound row `xⱼ ≤ uⱼ`
/// when one is present.
pub fn gomory_solve(p: &IlpProblem, dual_feasible_hint: bool, pivot_limit: usize) -> Result<IlpOutcome> {
    gomory_solve_traced(p, dual_feasible_hint, pivot_limit).map(|(o, _)| o)
}

pub fn gomory_solve_traced(
    p: &IlpProblem,
    dual_feasible_hint: bool,
    pivot_limit: usize,
) -> Result<(IlpOutcome, GomoryTrace)> {
    let n = p.nvars();
    let m = p.ncons();
    if n == 0 {
        let out = if p.b.iter().all(|v| !v.is_negative()) {
            IlpOutcome::Optimum { x: vec![], value: BigInt::zero() }
        } else {
            IlpOutcome::Infeasible
        };
        return Ok((out, GomoryTrace::default()));
    }
    let col_lex_negative = |a: &IntMatrix, c: &[BigInt], j: usize| {
        std::iter::once(&c[j])
            .chain((0..m).map(|i| a.get(i, j)))
            .find(|v| !v.is_zero())
            .map_or(false, |v| v.is_negative())
    };
    let mut a = p.a.clone();
    let mut b = p.b.clone();
    let mut c = p.c.clone();
    let mut upper: Vec<Option<BigInt>> = vec![None; n];
    for j in 0..n {
        if !col_lex_negative(&a, &c, j) {
            continue;
        }
        if dual_feasible_hint {
            return Err(Error::Precondition(format!("column {j} is not dual feasible")));
        }
        let bound = (0..m).find(|&i| {
            (0..n).all(|l| a.get(i, l) == &BigInt::from((l == j) as i64))
        });
        let Some(i) = bound else {
            return Err(Error::Precondition(format!(
                "column {j} is not dual feasible and has no bound row"
            )));
        };
        let u = b[i].clone();
        for r in 0..m {
            if r == i {
                continue;
            }
            let arj = a.get(r, j).clone();
            if !arj.is_zero() {
                b[r] -= &arj * &u;
                a.set(r, j, -arj);
            }
        }
        c[j] = -&c[j];
        upper[j] = Some(u);
    }

    // With a bound row for every variable an artificial variable w ∈ {0, 1}
    // relaxing the violated rows keeps the problem feasible, so the run
    // terminates; the original problem is infeasible iff w = 1 at the optimum.
    let bound_rows: Vec<Option<usize>> = (0..n)
        .map(|j| {
            (0..m).find(|&i| {
                !b[i].is_negative() && (0..n).all(|l| a.get(i, l) == &BigInt::from((l == j) as i64))
            })
        })
        .collect();
    let bounded = n > 0 && bound_rows.iter().all(|r| r.is_some());
    let order: Vec<usize> = if bounded {
        let first: Vec<usize> = bound_rows.iter().map(|r| r.unwrap()).collect();
        first.iter().copied().chain((0..m).filter(|i| !first.contains(i))).collect()
    } else {
        (0..m).collect()
    };
    let nw = n + bounded as usize;
    let mut rows = Vec::with_capacity(m + 2);
    let mut obj = vec![BigInt::zero()];
    obj.extend(c.iter().cloned());
    if bounded {
        let reach: BigInt = bound_rows.iter().zip(&c).map(|(r, cj)| cj * &b[r.unwrap()]).sum();
        obj.push(reach + 1);
    }
    rows.push(obj);
    let big_m = (0..m).map(|i| -&b[i]).max().unwrap_or_default();
    for (pos, &i) in order.iter().enumerate() {
        let mut r = vec![b[i].clone()];
        r.extend(a.row(i).iter().cloned());
        if bounded {
            r.push(if pos >= n && b[i].is_negative() { -big_m.clone() } else { BigInt::zero() });
        }
        rows.push(r);
        if bounded && pos + 1 == n {
            let mut wr = vec![BigInt::zero(); nw + 1];
            wr[0] = BigInt::one();
            wr[nw] = BigInt::one();
            rows.push(wr);
        }
    }
    let xrows = (0..nw)
        .map(|j| {
            let mut r = vec![BigInt::zero(); nw + 1];
            r[j + 1] = -BigInt::one();
            r
        })
        .collect();
    let nonbasic = (0..nw)
        .map(|j| {
            let mut g = vec![BigInt::zero(); nw];
            match upper.get(j).cloned().flatten() {
                Some(u) => {
                    g[j] = -BigInt::one();
                    Affine { k: u, g }
                }
                None => {
                    g[j] = BigInt::one();
                    Affine { k: BigInt::zero(), g }
                }
            }
        })
        .collect();
    let mut t = Tableau { rows, xrows, nonbasic };
    let mut trace = GomoryTrace { objective: vec![BigInt::zero()], ..Default::default() };

    loop {
        let src = match (1..t.rows.len()).find(|&i| t.rows[i][0].is_negative()) {
            None => break,
            Some(i) => i,
        };
        if trace.pivots >= pivot_limit {
            return Ok((IlpOutcome::Aborted { pivots: trace.pivots }, trace));
        }
        let big_j: Vec<usize> = (1..=nw).filter(|&j| t.rows[src][j].is_negative()).collect();
        if big_j.is_empty() {
            return Ok((IlpOutcome::Infeasible, trace));
        }
        let mut s = big_j[0];
        for &j in &big_j[1..] {
            if t.lex_cmp(j, s) == Ordering::Less {
                s = j;
            }
        }
        let mut lambda = BigRational::from(-t.rows[src][s].clone());
        for &j in &big_j {
            if j == s {
                continue;
            }
            if let Some(k) = t.max_multiple(j, s) {
                debug_assert!(k.is_positive());
                let lj = BigRational::new(-t.rows[src][j].clone(), k);
                if lj > lambda {
                    lambda = lj;
                }
            }
        }
        if lambda.is_one() {
            let big = t.rows[src].iter().map(|v| v.abs()).max().unwrap_or_default();
            lambda = BigRational::one() + BigRational::new(BigInt::one(), big + 1);
        }
        let cut: Vec<BigInt> =
            t.rows[src].iter().map(|v| rat_floor(&(BigRational::from(v.clone()) / &lambda))).collect();
        debug_assert_eq!(cut[s], -BigInt::one());

        let mut g = vec![BigInt::zero(); nw];
        let mut h = cut[0].clone();
        for j in 1..=nw {
            if cut[j].is_zero() {
                continue;
            }
            let nb = &t.nonbasic[j - 1];
            h -= &cut[j] * &nb.k;
            for (gl, cl) in g.iter_mut().zip(&nb.g) {
                *gl += &cut[j] * cl;
            }
        }
        let slack = Affine { k: h.clone(), g: g.iter().map(|v| -v).collect() };
        trace.cuts.push((g[..n].to_vec(), h));
        trace.lambdas.push(lambda);

        t.rows.push(cut);
        let r = t.rows.len() - 1;
        t.pivot(r, s);
        t.nonbasic[s - 1] = slack;
        trace.pivots += 1;
        let a00 = t.rows[0][0].clone();
        debug_assert!(&a00 <= trace.objective.last().unwrap());
        debug_assert!((1..=nw).all(|j| t.lex_positive(j)));
        trace.objective.push(a00);
    }

    if bounded && !t.xrows[n][0].is_zero() {
        return Ok((IlpOutcome::Infeasible, trace));
    }
    let x: Vec<BigInt> = (0..n)
        .map(|j| match &upper[j] {
            Some(u) => u - &t.xrows[j][0],
            None => t.xrows[j][0].clone(),
        })
        .collect();
    if !p.is_feasible(&x) {
        return Err(Error::Solver("gomory solution fails the constraints".into()));
    }
    let value = p.objective(&x);
    Ok((IlpOutcome::Optimum { x, value }, trace))
}

/// Exhaustive search over `0 ≤ xⱼ ≤ box[j]`. The first optimum in
/// lexicographic order is returned.
pub fn brute_force_ilp(p: &IlpProblem, bounds: &[u64]) -> Result<IlpOutcome> {
    if bounds.len() != p.nvars() {
        return Err(Error::Domain("box has the wrong dimension".into()));
    }
    let mut points: u128 = 1;
    for &u in bounds {
        points = points.saturating_mul(u as u128 + 1);
    }
    if points > 10_000_000 {
        return Err(Error::Domain(format!("box of {points} points is too large")));
    }
    let n = p.nvars();
    let mut cur = vec![0u64; n];
    let mut best: Option<(Vec<BigInt>, BigInt)> = None;
    loop {
        let x: Vec<BigInt> = cur.iter().map(|&v| BigInt::from(v)).collect();
        if p.is_feasible(&x) {
            let v = p.objective(&x);
            if best.as_ref().map_or(true, |(_, bv)| &v < bv) {
                best = Some((x, v));
            }
        }
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(match best {
                    Some((x, value)) => IlpOutcome::Optimum { x, value },
                    None => IlpOutcome::Infeasible,
                });
            }
            k -= 1;
            if cur[k] < bounds[k] {
                cur[k] += 1;
                break;
            }
            cur[k] = 0;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Feasible(Vec<BigRational>),
    Infeasible,
}

/// Finds a rational `x ≥ 0` with `A·x = b` by phase one of the simplex method
/// with Bland's rule. A returned point has been checked by substitution.
pub fn lp_feasible(a: &IntMatrix, b: &[BigInt]) -> Result<LpOutcome> {
    let m = a.nrows();
    let n = a.ncols();
    if b.len() != m {
        return Err(Error::Domain("right hand side has the wrong length".into()));
    }
    let width = n + m + 1;
    let mut t: Vec<Vec<BigRational>> = Vec::with_capacity(m);
    for i in 0..m {
        let flip = b[i].is_negative();
        let mut row = vec![BigRational::zero(); width];
        for j in 0..n {
            let v = BigRational::from(a.get(i, j).clone());
            row[j] = if flip { -v } else { v };
        }
        row[n + i] = BigRational::one();
        let rhs = BigRational::from(b[i].clone());
        row[width - 1] = if flip { -rhs } else { rhs };
        t.push(row);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut cost = vec![BigRational::zero(); width];
    for row in &t {
        for j in 0..n {
            cost[j] -= &row[j];
        }
        cost[width - 1] -= &row[width - 1];
    }
    loop {
        let Some(e) = (0..n + m).find(|&j| cost[j].is_negative()) else { break };
        let mut leave: Option<(usize, BigRational)> = None;
        for i in 0..m {
            if !t[i][e].is_positive() {
                continue;
            }
            let ratio = &t[i][width - 1] / &t[i][e];
            let better = match &leave {
                None => true,
                Some((l, r)) => ratio < *r || (ratio == *r && basis[i] < basis[*l]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        let Some((r, _)) = leave else {
            return Err(Error::Solver("phase one objective unbounded".into()));
        };
        let piv = t[r][e].clone();
        for v in t[r].iter_mut() {
            *v /= &piv;
        }
        let prow = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i == r || row[e].is_zero() {
                continue;
            }
            let f = row[e].clone();
            for (v, pv) in row.iter_mut().zip(&prow) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        let f = cost[e].clone();
        for (v, pv) in cost.iter_mut().zip(&prow) {
            if !pv.is_zero() {
                *v -= &f * pv;
            }
        }
        basis[r] = e;
    }
    if !cost[width - 1].is_zero() {
        return Ok(LpOutcome::Infeasible);
    }
    let mut x = vec![BigRational::zero(); n];
    for (i, &bj) in basis.iter().enumerate() {
        if bj < n {
            x[bj] = t[i][width - 1].clone();
        }
    }
    for i in 0..m {
        let lhs = (0..n).fold(BigRational::zero(), |acc, j| acc + BigRational::from(a.get(i, j).clone()) * &x[j]);
        if lhs != BigRational::from(b[i].clone()) || x.iter().any(|v| v.is_negative()) {
            return Err(Error::Solver("phase one point fails substitution".into()));
        }
    }
    Ok(LpOutcome::Feasible(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{int, ints};

    #[test]
    fn trivially_infeasible() {
        let p = IlpProblem::from_i64(&[vec![-1], vec![1]], &[-1, 0], &[0]).unwrap();
        assert_eq!(gomory_solve(&p, false, DEFAULT_PIVOT_LIMIT).unwrap(), IlpOutcome::Infeasible);
    }

    #[test]
    fn single_variable_box() {
        let p = IlpProblem::from_i64(&[vec![1]], &[3], &[-1]).unwrap();
        let want = IlpOutcome::Optimum { x: ints(&[3]), value: int(-3) };
        assert_eq!(brute_force_ilp(&p, &[3]).unwrap(), want);
        assert_eq!(gomory_solve(&p, false, DEFAULT_PIVOT_LIMIT).unwrap(), want);
        assert!(gomory_solve(&p, true, DEFAULT_PIVOT_LIMIT).is_err());
        let empty = IlpProblem::from_i64(&[vec![-1]], &[-4], &[0]).unwrap();
        assert_eq!(brute_force_ilp(&empty, &[3]).unwrap(), IlpOutcome::Infeasible);
        assert!(brute_force_ilp(&p, &[20_000_000]).is_err());
    }

    #[test]
    fn text_round_trip() {
        let p = IlpProblem::from_i64(&[vec![1, -2], vec![0, 3]], &[4, -1], &[1, 1]).unwrap();
        assert_eq!(IlpProblem::parse(&p.to_text()).unwrap(), p);
    }

    #[test]
    fn zero_rhs_is_feasible() {
        let a = IntMatrix::from_i64(&[&[1, 2], &[3, -1]]);
        match lp_feasible(&a, &ints(&[0, 0])).unwrap() {
            LpOutcome::Feasible(x) => assert!(x.iter().all(|v| v.is_zero())),
            o => panic!("{o:?}"),
        }
        let neg = IntMatrix::from_i64(&[&[1, 1]]);
        assert_eq!(lp_feasible(&neg, &ints(&[-1])).unwrap(), LpOutcome::Infeasible);
    }
}
