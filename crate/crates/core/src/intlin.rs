//! Exact integral linear algebra: matrices over ℤ, Hermite normal forms, the
//! q-adic solver DEC and the proper basis algorithm FBA.

use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{ceil_div, ext_gcd, BigInt, BigRational};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            let r: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", r.join(", "))?;
        }
        Ok(())
    }
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from rows. An empty row list gives a `0 x cols` matrix
    /// only through [`IntMatrix::from_rows_with_cols`].
    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::from_rows_with_cols(rows, cols)
    }

    pub fn from_rows_with_cols(rows: Vec<Vec<BigInt>>, cols: usize) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged matrix rows");
            data.extend(r);
        }
        IntMatrix { rows: n, cols, data }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect())
    }

    pub fn from_vec_i64(rows: &[Vec<i64>]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect())
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [BigInt] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn push_row(&mut self, r: Vec<BigInt>) {
        if self.rows == 0 && self.cols == 0 {
            self.cols = r.len();
        }
        assert_eq!(r.len(), self.cols);
        self.data.extend(r);
        self.rows += 1;
    }

    pub fn set_col(&mut self, j: usize, c: &[BigInt]) {
        for (i, v) in c.iter().enumerate() {
            self.set(i, j, v.clone());
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != other.rows {
            return Err(Error::Domain(format!(
                "shape mismatch {}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    /// `M · v` for a column vector `v`.
    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `v · M` for a row vector `v`.
    pub fn vec_mul(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![BigInt::zero(); self.cols];
        for (i, a) in v.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (o, b) in out.iter_mut().zip(self.row(i)) {
                *o += a * b;
            }
        }
        out
    }

    pub fn is_nonneg(&self) -> bool {
        self.data.iter().all(|x| !x.is_negative())
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Determinant by fraction-free Bareiss elimination.
    pub fn det(&self) -> Result<BigInt> {
        if !self.is_square() {
            return Err(Error::Domain("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(BigInt::one());
        }
        let mut a = self.to_rows();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(p) => {
                        a.swap(k, p);
                        sign = -sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = v / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        Ok(sign * &a[n - 1][n - 1])
    }

    /// Rank over ℚ.
    pub fn rank(&self) -> usize {
        echelon_rank(self.to_rows())
    }

    /// Row-style Hermite normal form: returns `(H, T)` with `T` unimodular and
    /// `T · self = H`. The nonzero rows of `H` come first, pivots strictly
    /// increase, pivots are positive and entries above a pivot are reduced into
    /// `[0, pivot)`.
    pub fn hnf_with_transform(&self) -> (IntMatrix, IntMatrix) {
        let mut h = self.to_rows();
        let mut t = IntMatrix::identity(self.rows).to_rows();
        let m = self.rows;
        let mut r = 0;
        for c in 0..self.cols {
            if r == m {
                break;
            }
            // gcd-combine rows r..m in column c into row r
            loop {
                let nonzero: Vec<usize> = (r..m).filter(|&i| !h[i][c].is_zero()).collect();
                if nonzero.is_empty() {
                    break;
                }
                let p = *nonzero
                    .iter()
                    .min_by(|&&a, &&b| h[a][c].abs().cmp(&h[b][c].abs()))
                    .unwrap();
                h.swap(r, p);
                t.swap(r, p);
                let mut done = true;
                for i in r + 1..m {
                    if h[i][c].is_zero() {
                        continue;
                    }
                    let q = h[i][c].div_floor(&h[r][c]);
                    let (hr, tr) = (h[r].clone(), t[r].clone());
                    for (x, y) in h[i].iter_mut().zip(&hr) {
                        *x -= &q * y;
                    }
                    for (x, y) in t[i].iter_mut().zip(&tr) {
                        *x -= &q * y;
                    }
                    if !h[i][c].is_zero() {
                        done = false;
                    }
                }
                if done {
                    break;
                }
            }
            if h[r][c].is_zero() {
                continue;
            }
            if h[r][c].is_negative() {
                for x in h[r].iter_mut() {
                    *x = -&*x;
                }
                for x in t[r].iter_mut() {
                    *x = -&*x;
                }
            }
            for i in 0..r {
                let q = h[i][c].div_floor(&h[r][c]);
                if q.is_zero() {
                    continue;
                }
                let (hr, tr) = (h[r].clone(), t[r].clone());
                for (x, y) in h[i].iter_mut().zip(&hr) {
                    *x -= &q * y;
                }
                for (x, y) in t[i].iter_mut().zip(&tr) {
                    *x -= &q * y;
                }
            }
            r += 1;
        }
        (
            IntMatrix::from_rows_with_cols(h, self.cols),
            IntMatrix::from_rows_with_cols(t, self.rows),
        )
    }

    pub fn hnf(&self) -> IntMatrix {
        self.hnf_with_transform().0
    }

    /// The nonzero rows of the Hermite normal form: a canonical basis of the
    /// lattice spanned by the rows.
    pub fn lattice_basis(&self) -> IntMatrix {
        let h = self.hnf();
        let rows: Vec<Vec<BigInt>> =
            h.to_rows().into_iter().filter(|r| r.iter().any(|x| !x.is_zero())).collect();
        IntMatrix::from_rows_with_cols(rows, self.cols)
    }

    /// A ℤ-basis of the left kernel `{x : x · self = 0}`.
    pub fn left_kernel(&self) -> IntMatrix {
        let (h, t) = self.hnf_with_transform();
        let rows: Vec<Vec<BigInt>> = (0..h.rows)
            .filter(|&i| h.row(i).iter().all(|x| x.is_zero()))
            .map(|i| t.row(i).to_vec())
            .collect();
        IntMatrix::from_rows_with_cols(rows, self.rows)
    }

    /// Inverse of a unimodular matrix.
    pub fn inverse_unimodular(&self) -> Result<IntMatrix> {
        let d = self.det()?;
        if d.abs() != BigInt::one() {
            return Err(Error::Domain(format!("matrix not unimodular (det {d})")));
        }
        let inv = self.inverse_rational()?;
        let rows = inv
            .into_iter()
            .map(|r| r.into_iter().map(|x| x.to_integer()).collect())
            .collect();
        Ok(IntMatrix::from_rows_with_cols(rows, self.rows))
    }

    pub fn inverse_rational(&self) -> Result<Vec<Vec<BigRational>>> {
        if !self.is_square() {
            return Err(Error::Domain("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut a: Vec<Vec<BigRational>> = (0..n)
            .map(|i| {
                let mut r: Vec<BigRational> =
                    self.row(i).iter().map(|x| BigRational::from_integer(x.clone())).collect();
                r.extend((0..n).map(|j| {
                    if i == j {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                }));
                r
            })
            .collect();
        for c in 0..n {
            let p = (c..n)
                .find(|&i| !a[i][c].is_zero())
                .ok_or_else(|| Error::Domain("singular matrix".into()))?;
            a.swap(c, p);
            let piv = a[c][c].clone();
            for x in a[c].iter_mut() {
                *x /= &piv;
            }
            let pr = a[c].clone();
            for (i, row) in a.iter_mut().enumerate() {
                if i == c || row[c].is_zero() {
                    continue;
                }
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pr) {
                    *x -= &f * y;
                }
            }
        }
        Ok(a.into_iter().map(|r| r[n..].to_vec()).collect())
    }

    /// Solves `z · self = w` over ℚ. Returns `None` when `w` is not in the
    /// rational row space. Free variables are set to zero.
    pub fn solve_left_rational(&self, w: &[BigInt]) -> Option<Vec<BigRational>> {
        solve_left_rational(self, w)
    }

    pub fn parse_text(s: &str) -> Result<IntMatrix> {
        let mut toks = s.split_whitespace();
        let mut next_usize = |what: &str| -> Result<usize> {
            toks.next()
                .ok_or_else(|| Error::Format(format!("missing {what}")))?
                .parse::<usize>()
                .map_err(|_| Error::Format(format!("bad {what}")))
        };
        let rows = next_usize("row count")?;
        let cols = next_usize("column count")?;
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            let t = toks.next().ok_or_else(|| Error::Format("matrix too short".into()))?;
            data.push(
                t.parse::<BigInt>().map_err(|_| Error::Format(format!("bad integer `{t}`")))?,
            );
        }
        if toks.next().is_some() {
            return Err(Error::Format("trailing data after matrix".into()));
        }
        Ok(IntMatrix { rows, cols, data })
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.rows, self.cols);
        for i in 0..self.rows {
            let r: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            s.push_str(&r.join(" "));
            s.push('\n');
        }
        s
    }

    /// Columns of the matrix as a list of vectors.
    pub fn columns(&self) -> Vec<Vec<BigInt>> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }

    pub fn from_columns(cols: &[Vec<BigInt>], nrows: usize) -> IntMatrix {
        let mut m = IntMatrix::zeros(nrows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            m.set_col(j, c);
        }
        m
    }
}

pub fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).fold(BigInt::zero(), |acc, (x, y)| {
        if x.is_zero() || y.is_zero() {
            acc
        } else {
            acc + x * y
        }
    })
}

fn echelon_rank(mut a: Vec<Vec<BigInt>>) -> usize {
    let m = a.len();
    if m == 0 {
        return 0;
    }
    let n = a[0].len();
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..m).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        for i in r + 1..m {
            if a[i][c].is_zero() {
                continue;
            }
            let (f, g) = (a[i][c].clone(), a[r][c].clone());
            let pr = a[r].clone();
            for (x, y) in a[i].iter_mut().zip(&pr) {
                *x = &*x * &g - &f * y;
            }
            let cont = a[i].iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
            if cont > BigInt::one() {
                for x in a[i].iter_mut() {
                    *x /= &cont;
                }
            }
        }
        r += 1;
        if r == m {
            break;
        }
    }
    r
}

fn solve_left_rational(t: &IntMatrix, w: &[BigInt]) -> Option<Vec<BigRational>> {
    // unknowns z (t.rows); equations: for each column j, Σ_i z_i t_ij = w_j
    let m = t.rows;
    let n = t.cols;
    assert_eq!(w.len(), n);
    let mut a: Vec<Vec<BigRational>> = (0..n)
        .map(|j| {
            let mut r: Vec<BigRational> =
                (0..m).map(|i| BigRational::from_integer(t.get(i, j).clone())).collect();
            r.push(BigRational::from_integer(w[j].clone()));
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..m {
        let Some(p) = (r..n).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        let piv = a[r][c].clone();
        for x in a[r].iter_mut() {
            *x /= &piv;
        }
        let pr = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pr) {
                *x -= &f * y;
            }
        }
        pivots.push(c);
        r += 1;
        if r == n {
            break;
        }
    }
    if a[r..].iter().any(|row| !row[m].is_zero()) {
        return None;
    }
    let mut z = vec![BigRational::zero(); m];
    for (k, &c) in pivots.iter().enumerate() {
        z[c] = a[k][m].clone();
    }
    Some(z)
}

/// `det(M · Mᵗ)`, the discriminant of the lattice spanned by the rows.
/// Dependent rows give 0.
pub fn discriminant(b: &IntMatrix) -> BigInt {
    let g = b.mul(&b.transpose()).expect("shapes agree");
    g.det().expect("square")
}

// ---------------------------------------------------------------------------
// arithmetic modulo a small prime

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// The next prime strictly above `p`.
pub fn next_prime(p: u64) -> u64 {
    let mut q = p + 1;
    while !is_prime(q) {
        q += 1;
    }
    q
}

fn mod_u(x: &BigInt, q: u64) -> u64 {
    x.mod_floor(&BigInt::from(q)).to_u64().expect("residue fits")
}

fn inv_mod(a: u64, q: u64) -> u64 {
    let (mut t, mut nt) = (0i128, 1i128);
    let (mut r, mut nr) = (q as i128, a as i128);
    while nr != 0 {
        let quo = r / nr;
        (t, nt) = (nt, t - quo * nt);
        (r, nr) = (nr, r - quo * nr);
    }
    debug_assert_eq!(r, 1);
    t.rem_euclid(q as i128) as u64
}

/// Solver for `z · T̄ = v̄` over `F_q` when `T̄` has full row rank.
struct ModSolver {
    q: u64,
    tbar: Vec<Vec<u64>>,
    pivots: Vec<usize>,
    inv: Vec<Vec<u64>>,
}

impl ModSolver {
    fn new(t: &IntMatrix, q: u64) -> Option<ModSolver> {
        let m = t.rows;
        let n = t.cols;
        let tbar: Vec<Vec<u64>> =
            (0..m).map(|i| t.row(i).iter().map(|x| mod_u(x, q)).collect()).collect();
        if m == 0 {
            return Some(ModSolver { q, tbar, pivots: vec![], inv: vec![] });
        }
        // row reduce a copy to locate pivot columns
        let mut a = tbar.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..n {
            let Some(p) = (r..m).find(|&i| a[i][c] != 0) else { continue };
            a.swap(r, p);
            let iv = inv_mod(a[r][c], q);
            for x in a[r].iter_mut() {
                *x = *x * iv % q;
            }
            let pr = a[r].clone();
            for i in 0..m {
                if i != r && a[i][c] != 0 {
                    let f = a[i][c];
                    for (x, y) in a[i].iter_mut().zip(&pr) {
                        *x = (*x + q * q - f * y % q) % q;
                    }
                }
            }
            pivots.push(c);
            r += 1;
            if r == m {
                break;
            }
        }
        if r < m {
            return None;
        }
        // S = T̄[:, pivots], an invertible m×m matrix; z = v̄_piv · S⁻¹
        let mut s: Vec<Vec<u64>> = (0..m)
            .map(|i| {
                let mut row: Vec<u64> = pivots.iter().map(|&c| tbar[i][c]).collect();
                row.extend((0..m).map(|j| u64::from(i == j)));
                row
            })
            .collect();
        for c in 0..m {
            let p = (c..m).find(|&i| s[i][c] != 0)?;
            s.swap(c, p);
            let iv = inv_mod(s[c][c], q);
            for x in s[c].iter_mut() {
                *x = *x * iv % q;
            }
            let pr = s[c].clone();
            for i in 0..m {
                if i != c && s[i][c] != 0 {
                    let f = s[i][c];
                    for (x, y) in s[i].iter_mut().zip(&pr) {
                        *x = (*x + q * q - f * y % q) % q;
                    }
                }
            }
        }
        let inv = s.into_iter().map(|r| r[m..].to_vec()).collect();
        Some(ModSolver { q, tbar, pivots, inv })
    }

    /// Returns the residues of `z` or `None` if `v̄` is outside the span.
    fn solve(&self, v: &[BigInt]) -> Option<Vec<u64>> {
        let q = self.q;
        let vbar: Vec<u64> = v.iter().map(|x| mod_u(x, q)).collect();
        let m = self.pivots.len();
        let mut z = vec![0u64; m];
        // z = vp · S⁻¹
        for (k, &c) in self.pivots.iter().enumerate() {
            let a = vbar[c];
            if a == 0 {
                continue;
            }
            for j in 0..m {
                z[j] = (z[j] + a * self.inv[k][j]) % q;
            }
        }
        for (c, &target) in vbar.iter().enumerate() {
            let mut acc = 0u64;
            for i in 0..m {
                acc = (acc + z[i] * self.tbar[i][c]) % q;
            }
            if acc != target {
                return None;
            }
        }
        Some(z)
    }
}

fn symmetric(x: u64, q: u64) -> BigInt {
    let h = (q - 1) / 2;
    if x > h {
        BigInt::from(x as i64 - q as i64)
    } else {
        BigInt::from(x)
    }
}

// ---------------------------------------------------------------------------
// DEC

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UndecidedReason {
    MaxIterations,
    /// The rational solution has a denominator; the digits are the symmetric
    /// q-adic digits computed before giving up.
    RationalNotIntegral { digits: Vec<Vec<BigInt>> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecOutcome {
    Coefficients(Vec<BigInt>),
    NotInRationalSpan,
    Undecided(UndecidedReason),
}

#[derive(Debug, Clone, Copy)]
pub struct DecOptions {
    pub q: u64,
    pub maxj: usize,
    pub attempts: usize,
    pub oracle_cols: usize,
}

impl Default for DecOptions {
    fn default() -> Self {
        DecOptions { q: 101, maxj: 20, attempts: 10, oracle_cols: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecReport {
    pub outcome: DecOutcome,
    /// The prime actually used after escalation.
    pub q: u64,
    pub iterations: usize,
}

pub fn dec_solve(w: &[BigInt], basis: &IntMatrix) -> Result<DecOutcome> {
    Ok(dec_solve_with(w, basis, DecOptions::default())?.outcome)
}

/// Expresses `w` as an integral combination of the rows of `basis` by q-adic
/// lifting.
pub fn dec_solve_with(w: &[BigInt], basis: &IntMatrix, opts: DecOptions) -> Result<DecReport> {
    if w.len() != basis.cols {
        return Err(Error::Domain(format!(
            "vector length {} does not match basis width {}",
            w.len(),
            basis.cols
        )));
    }
    let mut q = opts.q;
    let mut solver = None;
    for _ in 0..opts.attempts.max(1) {
        if let Some(s) = ModSolver::new(basis, q) {
            solver = Some(s);
            break;
        }
        q = next_prime(q);
    }
    let solver = solver.ok_or_else(|| {
        Error::Solver(format!("basis is rank deficient modulo every tried prime up to {q}"))
    })?;
    let q = solver.q;
    let qb = BigInt::from(q);
    let m = basis.rows;
    let mut v: Vec<BigInt> = w.to_vec();
    let mut acc = vec![BigInt::zero(); basis.cols];
    let mut coeffs = vec![BigInt::zero(); m];
    let mut qpow = BigInt::one();
    let mut digits = Vec::new();
    for j in 0..=opts.maxj {
        let Some(zbar) = solver.solve(&v) else {
            return Ok(DecReport { outcome: DecOutcome::NotInRationalSpan, q, iterations: j });
        };
        let z: Vec<BigInt> = zbar.iter().map(|&x| symmetric(x, q)).collect();
        let zt = basis.vec_mul(&z);
        for (a, b) in acc.iter_mut().zip(&zt) {
            *a += &qpow * b;
        }
        for (c, zi) in coeffs.iter_mut().zip(&z) {
            *c += &qpow * zi;
        }
        digits.push(z);
        let diff: Vec<BigInt> = w.iter().zip(&acc).map(|(a, b)| a - b).collect();
        if diff.iter().all(|x| x.is_zero()) {
            if basis.vec_mul(&coeffs) != w {
                return Err(Error::Solver("DEC verification failed".into()));
            }
            return Ok(DecReport { outcome: DecOutcome::Coefficients(coeffs), q, iterations: j + 1 });
        }
        qpow *= &qb;
        v = diff
            .iter()
            .map(|x| {
                let (d, r) = x.div_rem(&qpow);
                debug_assert!(r.is_zero());
                d
            })
            .collect();
    }
    let iterations = opts.maxj + 1;
    if basis.cols > opts.oracle_cols {
        return Ok(DecReport {
            outcome: DecOutcome::Undecided(UndecidedReason::MaxIterations),
            q,
            iterations,
        });
    }
    let outcome = match basis.solve_left_rational(w) {
        None => DecOutcome::NotInRationalSpan,
        Some(z) if z.iter().all(|x| x.is_integer()) => {
            DecOutcome::Undecided(UndecidedReason::MaxIterations)
        }
        Some(_) => DecOutcome::Undecided(UndecidedReason::RationalNotIntegral { digits }),
    };
    Ok(DecReport { outcome, q, iterations })
}

// ---------------------------------------------------------------------------
// FBA

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FbaCase {
    InSpan,
    Independent,
    IndependentNewPrime(u64),
    Replace { j: usize, m1: BigInt, m: BigInt, a: BigInt, b: BigInt, c: Vec<BigInt> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FbaEvent {
    pub input: Vec<BigInt>,
    pub case: FbaCase,
    pub discriminant_before: BigInt,
    pub discriminant_after: BigInt,
}

#[derive(Debug, Clone)]
pub struct FbaResult {
    pub basis: Vec<Vec<BigInt>>,
    pub events: Vec<FbaEvent>,
    pub q: u64,
}

fn rows_matrix(rows: &[Vec<BigInt>], cols: usize) -> IntMatrix {
    IntMatrix::from_rows_with_cols(rows.to_vec(), cols)
}

fn independent_mod(rows: &[Vec<BigInt>], cols: usize, q: u64) -> bool {
    ModSolver::new(&rows_matrix(rows, cols), q).is_some()
}

/// Finds a ℤ-basis of nonnegative vectors for the lattice spanned by the
/// nonnegative `generators`.
pub fn fba(generators: &[Vec<BigInt>]) -> Result<FbaResult> {
    let Some(first) = generators.first() else {
        return Ok(FbaResult { basis: vec![], events: vec![], q: 101 });
    };
    let n = first.len();
    if generators.iter().any(|g| g.len() != n) {
        return Err(Error::Domain("generators of different lengths".into()));
    }
    if generators.iter().flatten().any(|x| x.is_negative()) {
        return Err(Error::Precondition("FBA needs nonnegative generators".into()));
    }
    let mut queue: std::collections::VecDeque<Vec<BigInt>> = generators.iter().cloned().collect();
    let mut basis: Vec<Vec<BigInt>> = Vec::new();
    let mut events = Vec::new();
    let mut q = 101u64;
    while let Some(beta) = queue.pop_front() {
        let disc_before = discriminant(&rows_matrix(&basis, n));
        let mut extended = basis.clone();
        extended.push(beta.clone());
        let ext_matrix = rows_matrix(&extended, n);
        let independent = ext_matrix.rank() == extended.len();
        if independent {
            let case = if independent_mod(&extended, n, q) {
                FbaCase::Independent
            } else {
                let mut l = next_prime(q);
                while !independent_mod(&extended, n, l) || !independent_mod(&basis, n, l) {
                    l = next_prime(l);
                }
                q = l;
                FbaCase::IndependentNewPrime(l)
            };
            basis = extended;
            events.push(FbaEvent {
                input: beta,
                case,
                discriminant_before: disc_before,
                discriminant_after: discriminant(&rows_matrix(&basis, n)),
            });
            continue;
        }
        if basis.is_empty() {
            // beta = 0
            events.push(FbaEvent {
                input: beta,
                case: FbaCase::InSpan,
                discriminant_before: disc_before.clone(),
                discriminant_after: disc_before,
            });
            continue;
        }
        let bm = rows_matrix(&basis, n);
        let report =
            dec_solve_with(&beta, &bm, DecOptions { q, attempts: 1, ..DecOptions::default() })?;
        let integral = match report.outcome {
            DecOutcome::Coefficients(_) => true,
            DecOutcome::NotInRationalSpan => {
                return Err(Error::Solver("FBA: rank and DEC disagree".into()));
            }
            DecOutcome::Undecided(_) => {
                bm.solve_left_rational(&beta).expect("in span").iter().all(|x| x.is_integer())
            }
        };
        if integral {
            events.push(FbaEvent {
                input: beta,
                case: FbaCase::InSpan,
                discriminant_before: disc_before.clone(),
                discriminant_after: disc_before,
            });
            continue;
        }
        // case (d)
        let coef = bm.solve_left_rational(&beta).expect("in span");
        let m1 = coef.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let z: Vec<BigInt> =
            coef.iter().map(|x| (x * BigRational::from_integer(m1.clone())).to_integer()).collect();
        let mut j = 0;
        let mut m = m1.gcd(&z[0]);
        for (i, zi) in z.iter().enumerate().skip(1) {
            let g = m1.gcd(zi);
            if g < m {
                m = g;
                j = i;
            }
        }
        let (g, a, b) = ext_gcd(&m1, &z[j]);
        debug_assert_eq!(g, m);
        let c: Vec<BigInt> = z
            .iter()
            .enumerate()
            .map(|(i, zi)| if i == j { BigInt::zero() } else { ceil_div(&(-&b * zi), &m1) })
            .collect();
        let mut new = vec![BigInt::zero(); n];
        for k in 0..n {
            let mut x = &b * &beta[k] + &a * &basis[j][k];
            for (i, ci) in c.iter().enumerate() {
                if i != j && !ci.is_zero() {
                    x += ci * &basis[i][k];
                }
            }
            new[k] = x;
        }
        if new.iter().any(|x| x.is_negative()) {
            return Err(Error::Solver("FBA produced a negative vector".into()));
        }
        let old = std::mem::replace(&mut basis[j], new);
        queue.push_front(beta.clone());
        queue.push_back(old);
        events.push(FbaEvent {
            input: beta,
            case: FbaCase::Replace { j, m1, m, a, b, c },
            discriminant_before: disc_before,
            discriminant_after: discriminant(&rows_matrix(&basis, n)),
        });
    }
    Ok(FbaResult { basis, events, q })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{int, ints};

    fn m(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_i64(rows)
    }

    #[test]
    fn det_and_inverse() {
        let a = m(&[&[2, 1], &[1, 1]]);
        assert_eq!(a.det().unwrap(), int(1));
        let inv = a.inverse_unimodular().unwrap();
        assert_eq!(a.mul(&inv).unwrap(), IntMatrix::identity(2));
        assert!(m(&[&[2, 0], &[0, 1]]).inverse_unimodular().is_err());
        assert_eq!(m(&[&[0, 1], &[1, 0]]).det().unwrap(), int(-1));
        assert_eq!(m(&[&[1, 2], &[2, 4]]).det().unwrap(), int(0));
    }

    #[test]
    fn hnf_transform_and_kernel() {
        let a = m(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]);
        let (h, t) = a.hnf_with_transform();
        assert_eq!(t.mul(&a).unwrap(), h);
        assert_eq!(t.det().unwrap().abs(), int(1));
        let k = m(&[&[1, 2], &[2, 4], &[0, 1]]).left_kernel();
        assert_eq!(k.nrows(), 1);
        assert_eq!(k.row(0).iter().map(|x| x.abs()).collect::<Vec<_>>(), ints(&[2, 1, 0]));
    }

    #[test]
    fn dec_trivial_and_half() {
        let b = m(&[&[1, 2, 3], &[0, 1, 4]]);
        assert_eq!(dec_solve(&ints(&[1, 2, 3]), &b).unwrap(), DecOutcome::Coefficients(ints(&[1, 0])));
        let b = m(&[&[2, 0], &[0, 1]]);
        match dec_solve(&ints(&[1, 0]), &b).unwrap() {
            DecOutcome::Undecided(UndecidedReason::RationalNotIntegral { digits }) => {
                // 1/2 = -50 + 101·(...) with the symmetric residue of 2⁻¹
                assert_eq!(digits[0][0], int(-50));
                assert_eq!(digits.len(), 21);
            }
            o => panic!("unexpected {o:?}"),
        }
        let b = m(&[&[1, 0, 0], &[0, 1, 0]]);
        assert_eq!(dec_solve(&ints(&[0, 0, 1]), &b).unwrap(), DecOutcome::NotInRationalSpan);
    }

    #[test]
    fn dec_escalates_prime() {
        let b = m(&[&[101, 0], &[0, 1]]);
        let r = dec_solve_with(&ints(&[202, 5]), &b, DecOptions::default()).unwrap();
        assert_eq!(r.q, 103);
        assert_eq!(r.outcome, DecOutcome::Coefficients(ints(&[2, 5])));
        let dependent = m(&[&[1, 2], &[2, 4]]);
        assert!(dec_solve(&ints(&[1, 2]), &dependent).is_err());
    }

    #[test]
    fn dec_negative_and_large_coefficients() {
        let b = m(&[&[1, 1], &[0, 1]]);
        let w = ints(&[-123456789, 987654321]);
        let z = match dec_solve(&w, &b).unwrap() {
            DecOutcome::Coefficients(z) => z,
            o => panic!("{o:?}"),
        };
        assert_eq!(b.vec_mul(&z), w);
    }

    #[test]
    fn fba_examples() {
        let r = fba(&[ints(&[1, 0]), ints(&[0, 1])]).unwrap();
        assert_eq!(r.basis, vec![ints(&[1, 0]), ints(&[0, 1])]);
        let r = fba(&[ints(&[1, 0]), ints(&[0, 1]), ints(&[1, 1])]).unwrap();
        assert_eq!(r.basis, vec![ints(&[1, 0]), ints(&[0, 1])]);
        let r = fba(&[ints(&[2, 0]), ints(&[0, 1]), ints(&[1, 1])]).unwrap();
        assert_eq!(r.basis, vec![ints(&[1, 0]), ints(&[0, 1])]);
        let d = r
            .events
            .iter()
            .find_map(|e| match &e.case {
                FbaCase::Replace { j, m1, m, a, b, c } => Some((*j, m1.clone(), m.clone(), a.clone(), b.clone(), c.clone())),
                _ => None,
            })
            .unwrap();
        assert_eq!(d, (0, int(2), int(1), int(0), int(1), ints(&[0, -1])));
    }

    #[test]
    fn discriminant_examples() {
        assert_eq!(discriminant(&IntMatrix::identity(3)), int(1));
        assert_eq!(discriminant(&m(&[&[2, 0]])), int(4));
        assert_eq!(discriminant(&m(&[&[1, 1], &[2, 2]])), int(0));
    }

    #[test]
    fn text_round_trip() {
        let a = m(&[&[1, -2, 3], &[4, 5, -6]]);
        assert_eq!(IntMatrix::parse_text(&a.to_text()).unwrap(), a);
        assert!(IntMatrix::parse_text("2 2 1 2 3").is_err());
    }
}
