//! Improving basic sets: proofs of indecomposability and irreducibility,
//! subtraction of indecomposables, triangular reduction, splitting of
//! decomposable projectives, pruning of redundant projectives and the
//! parity condition in characteristic 2.
//!
//! Brauer characters are written over the Brauer basic set BS, projectives
//! over the projective basic set PS, and `u` holds the scalar products
//! `⟨BS, PS⟩`. Column `j` of `u` is then the decomposition of `PS_j` into the
//! projective atoms, row `i` that of `BS_i` into the Brauer atoms.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{ceil_div, BigInt, BigRational};
use crate::ilp::{gomory_solve, lp_feasible, IlpOutcome, IlpProblem, LpOutcome, DEFAULT_PIVOT_LIMIT};
use crate::intlin::{dec_solve, dot, DecOutcome, IntMatrix};

// ---------------------------------------------------------------------------
// proof events

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProofKind {
    AtomPim,
    PimTest,
    IrrTest,
    SubsumTest,
    Subtract,
    Triangular,
    Split,
    Prune,
    Parity,
}

impl ProofKind {
    pub fn name(self) -> &'static str {
        match self {
            ProofKind::AtomPim => "atom_pim",
            ProofKind::PimTest => "pim_test",
            ProofKind::IrrTest => "irr_test",
            ProofKind::SubsumTest => "subsum_test",
            ProofKind::Subtract => "subtract",
            ProofKind::Triangular => "triangular",
            ProofKind::Split => "split",
            ProofKind::Prune => "prune",
            ProofKind::Parity => "parity",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        Ok(match s {
            "atom_pim" => ProofKind::AtomPim,
            "pim_test" => ProofKind::PimTest,
            "irr_test" => ProofKind::IrrTest,
            "subsum_test" => ProofKind::SubsumTest,
            "subtract" => ProofKind::Subtract,
            "triangular" => ProofKind::Triangular,
            "split" => ProofKind::Split,
            "prune" => ProofKind::Prune,
            "parity" => ProofKind::Parity,
            _ => return Err(Error::Format(format!("unknown proof kind `{s}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Max,
    Min,
}

/// One minimization over the bits of a Brauer character.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMinimum {
    pub row: usize,
    pub problem: IlpProblem,
    pub offset: BigInt,
    /// `None` when the solver gave up.
    pub value: Option<BigInt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    /// A vector with a unit entry: the projective is an atom.
    Unit(Vec<BigInt>),
    /// This system has no nonnegative integral solution.
    Infeasible(IlpProblem),
    Bits { rule: Rule, minima: Vec<BitMinimum>, z: BigInt },
    /// `target = Σ coeffs[k]·generators[k]` with `coeffs ≥ 0`.
    Combination { target: Vec<BigInt>, generators: Vec<Vec<BigInt>>, coeffs: Vec<BigRational> },
    /// Data for one step of the triangular reduction.
    Triangular { i: usize, j0: usize, z: BigInt, v: Vec<BigInt>, a_row: Vec<BigInt> },
    /// Two solutions of the part system summing to `n`.
    Parts { n: Vec<BigInt>, parts: [Vec<BigInt>; 2], problem: IlpProblem },
    Parity { degrees: Vec<BigInt>, real: Vec<bool>, column: Vec<BigInt>, pim: Vec<BigInt> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofEvent {
    pub kind: ProofKind,
    pub inputs: Vec<String>,
    pub conclusion: String,
    pub certificate: Certificate,
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn ints(s: &str) -> Result<Vec<BigInt>> {
    s.split_whitespace()
        .map(|t| t.parse::<BigInt>().map_err(|_| Error::Format(format!("bad integer `{t}`"))))
        .collect()
}

fn rationals(s: &str) -> Result<Vec<BigRational>> {
    s.split_whitespace()
        .map(|t| t.parse::<BigRational>().map_err(|_| Error::Format(format!("bad rational `{t}`"))))
        .collect()
}

fn field<'a>(line: Option<&'a str>, key: &str) -> Result<&'a str> {
    let line = line.ok_or_else(|| Error::Format(format!("missing `{key}` line")))?;
    let rest = line
        .strip_prefix(key)
        .ok_or_else(|| Error::Format(format!("expected `{key}`, found `{line}`")))?;
    Ok(rest.trim())
}

impl Certificate {
    fn name(&self) -> &'static str {
        match self {
            Certificate::Unit(_) => "unit",
            Certificate::Infeasible(_) => "infeasible",
            Certificate::Bits { .. } => "bits",
            Certificate::Combination { .. } => "combination",
            Certificate::Triangular { .. } => "triangular",
            Certificate::Parts { .. } => "parts",
            Certificate::Parity { .. } => "parity",
        }
    }

    fn body(&self) -> String {
        let mut s = String::new();
        match self {
            Certificate::Unit(v) => {
                let _ = writeln!(s, "vector {}", join(v));
            }
            Certificate::Infeasible(p) => s.push_str(&p.to_text()),
            Certificate::Bits { rule, minima, z } => {
                let r = if *rule == Rule::Max { "max" } else { "min" };
                let _ = writeln!(s, "rule {r} {z}");
                for m in minima {
                    let v = m.value.as_ref().map_or("aborted".to_string(), |v| v.to_string());
                    let _ = writeln!(s, "bit {} {} {v}", m.row, m.offset);
                    s.push_str(&m.problem.to_text());
                }
            }
            Certificate::Combination { target, generators, coeffs } => {
                let _ = writeln!(s, "target {}", join(target));
                for g in generators {
                    let _ = writeln!(s, "gen {}", join(g));
                }
                let _ = writeln!(s, "coeffs {}", join(coeffs));
            }
            Certificate::Triangular { i, j0, z, v, a_row } => {
                let _ = writeln!(s, "step {i} {j0} {z}");
                let _ = writeln!(s, "v {}", join(v));
                let _ = writeln!(s, "a {}", join(a_row));
            }
            Certificate::Parts { n, parts, problem } => {
                let _ = writeln!(s, "n {}", join(n));
                let _ = writeln!(s, "part {}", join(&parts[0]));
                let _ = writeln!(s, "part {}", join(&parts[1]));
                s.push_str(&problem.to_text());
            }
            Certificate::Parity { degrees, real, column, pim } => {
                let _ = writeln!(s, "degrees {}", join(degrees));
                let r: Vec<u8> = real.iter().map(|&b| b as u8).collect();
                let _ = writeln!(s, "real {}", join(&r));
                let _ = writeln!(s, "column {}", join(column));
                let _ = writeln!(s, "pim {}", join(pim));
            }
        }
        s
    }

    fn parse(name: &str, body: &[&str]) -> Result<Self> {
        let mut it = body.iter().copied();
        Ok(match name {
            "unit" => Certificate::Unit(ints(field(it.next(), "vector")?)?),
            "infeasible" => Certificate::Infeasible(IlpProblem::parse(&body.join("\n"))?),
            "bits" => {
                let head: Vec<&str> = field(it.next(), "rule")?.split_whitespace().collect();
                let (rule, z) = match head.as_slice() {
                    ["max", z] => (Rule::Max, z),
                    ["min", z] => (Rule::Min, z),
                    _ => return Err(Error::Format("bad rule line".into())),
                };
                let z = z.parse().map_err(|_| Error::Format("bad z".into()))?;
                let mut minima = Vec::new();
                let rest: Vec<&str> = it.collect();
                let starts: Vec<usize> =
                    rest.iter().enumerate().filter(|(_, l)| l.starts_with("bit ")).map(|(k, _)| k).collect();
                for (n, &k) in starts.iter().enumerate() {
                    let end = starts.get(n + 1).copied().unwrap_or(rest.len());
                    let f: Vec<&str> = rest[k][4..].split_whitespace().collect();
                    if f.len() != 3 {
                        return Err(Error::Format("bad bit line".into()));
                    }
                    let row = f[0].parse().map_err(|_| Error::Format("bad bit row".into()))?;
                    let offset = f[1].parse().map_err(|_| Error::Format("bad offset".into()))?;
                    let value = if f[2] == "aborted" {
                        None
                    } else {
                        Some(f[2].parse().map_err(|_| Error::Format("bad value".into()))?)
                    };
                    let problem = IlpProblem::parse(&rest[k + 1..end].join("\n"))?;
                    minima.push(BitMinimum { row, problem, offset, value });
                }
                Certificate::Bits { rule, minima, z }
            }
            "combination" => {
                let target = ints(field(it.next(), "target")?)?;
                let mut generators = Vec::new();
                let mut coeffs = None;
                for l in it {
                    if let Some(g) = l.strip_prefix("gen") {
                        generators.push(ints(g)?);
                    } else {
                        coeffs = Some(rationals(field(Some(l), "coeffs")?)?);
                    }
                }
                let coeffs = coeffs.ok_or_else(|| Error::Format("missing coefficients".into()))?;
                Certificate::Combination { target, generators, coeffs }
            }
            "triangular" => {
                let st = ints(field(it.next(), "step")?)?;
                if st.len() != 3 {
                    return Err(Error::Format("bad step line".into()));
                }
                let idx = |x: &BigInt| usize::try_from(x).map_err(|_| Error::Format("bad index".into()));
                Certificate::Triangular {
                    i: idx(&st[0])?,
                    j0: idx(&st[1])?,
                    z: st[2].clone(),
                    v: ints(field(it.next(), "v")?)?,
                    a_row: ints(field(it.next(), "a")?)?,
                }
            }
            "parts" => {
                let n = ints(field(it.next(), "n")?)?;
                let p0 = ints(field(it.next(), "part")?)?;
                let p1 = ints(field(it.next(), "part")?)?;
                let problem = IlpProblem::parse(&it.collect::<Vec<_>>().join("\n"))?;
                Certificate::Parts { n, parts: [p0, p1], problem }
            }
            "parity" => {
                let degrees = ints(field(it.next(), "degrees")?)?;
                let real = ints(field(it.next(), "real")?)?.iter().map(|x| !x.is_zero()).collect();
                let column = ints(field(it.next(), "column")?)?;
                let pim = ints(field(it.next(), "pim")?)?;
                Certificate::Parity { degrees, real, column, pim }
            }
            _ => return Err(Error::Format(format!("unknown certificate `{name}`"))),
        })
    }

    /// Re-derives the conclusion from the certificate alone.
    pub fn verify(&self) -> Result<bool> {
        Ok(match self {
            Certificate::Unit(v) => {
                v.iter().filter(|x| x.is_one()).count() == 1 && v.iter().all(|x| x.is_zero() || x.is_one())
            }
            Certificate::Infeasible(p) => gomory_solve(p, false, DEFAULT_PIVOT_LIMIT)?.is_infeasible(),
            Certificate::Bits { rule, minima, z } => {
                let mut values = Vec::new();
                for m in minima {
                    let got = gomory_solve(&m.problem, false, DEFAULT_PIVOT_LIMIT)?;
                    let got = got.value().map(|v| v + &m.offset);
                    if got != m.value {
                        return Ok(false);
                    }
                    values.push(got);
                }
                combine(*rule, &values) == *z
            }
            Certificate::Combination { target, generators, coeffs } => {
                if coeffs.len() != generators.len() || coeffs.iter().any(|c| c.is_negative()) {
                    return Ok(false);
                }
                let mut acc = vec![BigRational::zero(); target.len()];
                for (g, c) in generators.iter().zip(coeffs) {
                    if g.len() != target.len() {
                        return Ok(false);
                    }
                    for (a, x) in acc.iter_mut().zip(g) {
                        *a += c * BigRational::from(x.clone());
                    }
                }
                acc.iter().zip(target).all(|(a, t)| *a == BigRational::from(t.clone()))
            }
            Certificate::Triangular { i, j0, z, v, a_row } => {
                *z > BigInt::zero() && triangular_z(v, a_row, *i, *j0) == *z
            }
            Certificate::Parts { n, parts, problem } => {
                let sum: Vec<BigInt> = parts[0].iter().zip(&parts[1]).map(|(a, b)| a + b).collect();
                sum == *n
                    && parts.iter().all(|p| p.iter().all(|x| !x.is_negative()) && problem.is_feasible(&restrict(p, n)))
            }
            Certificate::Parity { degrees, real, column, pim } => {
                trivial_pim_by_parity(degrees, real, column).as_ref() == Some(pim)
            }
        })
    }
}

impl ProofEvent {
    pub fn replay(&self) -> Result<bool> {
        self.certificate.verify()
    }

    /// Block of lines `event …` through `end`.
    pub fn to_text(&self) -> String {
        let mut s = format!("event {}\n", self.kind.name());
        let _ = writeln!(s, "inputs {}", self.inputs.join(" "));
        let _ = writeln!(s, "conclusion {}", self.conclusion);
        let _ = writeln!(s, "cert {}", self.certificate.name());
        s.push_str(&self.certificate.body());
        s.push_str("end\n");
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        let kind = ProofKind::from_name(field(lines.first().copied(), "event")?)?;
        let inputs = field(lines.get(1).copied(), "inputs")?.split_whitespace().map(String::from).collect();
        let conclusion = field(lines.get(2).copied(), "conclusion")?.to_string();
        let cname = field(lines.get(3).copied(), "cert")?;
        if lines.last() != Some(&"end") {
            return Err(Error::Format("proof event without `end`".into()));
        }
        let certificate = Certificate::parse(cname, &lines[4..lines.len() - 1])?;
        Ok(ProofEvent { kind, inputs, conclusion, certificate })
    }
}

fn combine(rule: Rule, values: &[Option<BigInt>]) -> BigInt {
    let z = match rule {
        Rule::Max => values.iter().flatten().max().cloned().unwrap_or_default(),
        Rule::Min => {
            if values.iter().any(|v| v.is_none()) {
                BigInt::zero()
            } else {
                values.iter().flatten().min().cloned().unwrap_or_default()
            }
        }
    };
    z.max(BigInt::zero())
}

// ---------------------------------------------------------------------------
// part systems

/// The system whose solutions are the proper nonzero parts `n'` of `n`
/// passing every relation row: `0 ≤ n' ≤ n`, `1 ≤ Σn' ≤ Σn − 1`,
/// `rel·n' ≥ 0` and `rel·(n − n') ≥ 0`. Only the support of `n` carries
/// variables; it is returned alongside.
pub fn part_system(n: &[BigInt], rel: &IntMatrix) -> Result<(IlpProblem, Vec<usize>)> {
    if rel.nrows() > 0 && rel.ncols() != n.len() {
        return Err(Error::Domain("relation rows have the wrong width".into()));
    }
    let support: Vec<usize> = (0..n.len()).filter(|&i| !n[i].is_zero()).collect();
    let s = support.len();
    let mut rows: Vec<Vec<BigInt>> = Vec::new();
    let mut b = Vec::new();
    for (t, &i) in support.iter().enumerate() {
        rows.push(unit(s, t));
        b.push(n[i].clone());
    }
    let total: BigInt = n.iter().sum();
    rows.push(vec![BigInt::one(); s]);
    b.push(&total - 1);
    rows.push(vec![-BigInt::one(); s]);
    b.push(-BigInt::one());
    for k in 0..rel.nrows() {
        rows.push(support.iter().map(|&i| -rel.get(k, i)).collect());
        b.push(BigInt::zero());
    }
    for k in 0..rel.nrows() {
        rows.push(support.iter().map(|&i| rel.get(k, i).clone()).collect());
        b.push(dot(rel.row(k), n));
    }
    let p = IlpProblem::new(IntMatrix::from_rows_with_cols(rows, s), b, vec![BigInt::zero(); s])?;
    Ok((p, support))
}

fn expand(x: &[BigInt], support: &[usize], len: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); len];
    for (v, &i) in x.iter().zip(support) {
        out[i] = v.clone();
    }
    out
}

fn restrict(x: &[BigInt], n: &[BigInt]) -> Vec<BigInt> {
    x.iter().zip(n).filter(|(_, m)| !m.is_zero()).map(|(v, _)| v.clone()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PartVerdict {
    /// No proper part survives; the certificate is the infeasible system.
    Proved(IlpProblem),
    /// A part passing every test, so nothing can be concluded.
    Inconclusive(Option<Vec<BigInt>>),
}

/// Decides whether every proper nonzero part of `n` fails one of the
/// relation rows.
pub fn part_test(n: &[BigInt], rel: &IntMatrix, pivot_limit: usize) -> Result<PartVerdict> {
    if n.iter().any(|x| x.is_negative()) || n.iter().all(|x| x.is_zero()) {
        return Err(Error::Precondition("part test needs a nonzero nonnegative vector".into()));
    }
    let (p, support) = part_system(n, rel)?;
    match gomory_solve(&p, true, pivot_limit)? {
        IlpOutcome::Infeasible => Ok(PartVerdict::Proved(p)),
        IlpOutcome::Optimum { x, .. } => Ok(PartVerdict::Inconclusive(Some(expand(&x, &support, n.len())))),
        IlpOutcome::Aborted { .. } => Ok(PartVerdict::Inconclusive(None)),
    }
}

// ---------------------------------------------------------------------------
// the context

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImproveContext {
    /// `⟨BS, PS⟩`
    pub u: IntMatrix,
    /// Further Brauer characters over BS.
    pub b: IntMatrix,
    /// Further projectives over PS.
    pub p: IntMatrix,
    /// PS columns proved indecomposable.
    pub pims: BTreeSet<usize>,
    /// BS rows proved irreducible.
    pub irreducibles: BTreeSet<usize>,
    pub ps_names: Vec<String>,
    pub bs_names: Vec<String>,
    pub events: Vec<ProofEvent>,
    pub pivot_limit: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subtraction {
    pub z: BigInt,
    pub reduced: Vec<BigInt>,
    pub minima: Vec<BitMinimum>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriangularStep {
    pub i: usize,
    pub j0: usize,
    pub z: BigInt,
    /// Index of the projective in `p` that gave the largest z.
    pub witness: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SplitOutcome {
    /// `replaced[k] = (column, new PA vector)`.
    Split { parts: [Vec<BigInt>; 2], replaced: Vec<(usize, Vec<BigInt>)> },
    NoAction(String),
}

/// z of the triangular reduction for one relation `v` and the row `a_row`
/// of scalar products of `BS_i`.
fn triangular_z(v: &[BigInt], a_row: &[BigInt], i: usize, j0: usize) -> BigInt {
    if i >= v.len() || j0 >= i || !v[j0].is_positive() || !v[i].is_negative() {
        return BigInt::zero();
    }
    let mut rest = v[i].abs();
    for j in 0..i {
        if j != j0 && v[j].is_positive() {
            rest -= &v[j] * &a_row[j];
        }
    }
    if rest.is_positive() {
        ceil_div(&rest, &v[j0])
    } else {
        BigInt::zero()
    }
}

fn unit(n: usize, k: usize) -> Vec<BigInt> {
    let mut e = vec![BigInt::zero(); n];
    e[k] = BigInt::one();
    e
}

impl ImproveContext {
    pub fn new(u: IntMatrix, b: IntMatrix, p: IntMatrix) -> Result<Self> {
        let s = u.nrows();
        if !u.is_square() {
            return Err(Error::Domain("scalar product matrix must be square".into()));
        }
        if !u.det()?.abs().is_one() {
            return Err(Error::Precondition("BS and PS do not form a basic pair".into()));
        }
        if (b.nrows() > 0 && b.ncols() != s) || (p.nrows() > 0 && p.ncols() != s) {
            return Err(Error::Domain("relation rows have the wrong width".into()));
        }
        Ok(ImproveContext {
            u,
            b: if b.nrows() == 0 { IntMatrix::zeros(0, s) } else { b },
            p: if p.nrows() == 0 { IntMatrix::zeros(0, s) } else { p },
            pims: BTreeSet::new(),
            irreducibles: BTreeSet::new(),
            ps_names: (1..=s).map(|k| format!("PS{k}")).collect(),
            bs_names: (1..=s).map(|k| format!("BS{k}")).collect(),
            events: Vec::new(),
            pivot_limit: DEFAULT_PIVOT_LIMIT,
        })
    }

    pub fn size(&self) -> usize {
        self.u.nrows()
    }

    fn log(&mut self, kind: ProofKind, inputs: Vec<String>, conclusion: String, certificate: Certificate) {
        self.events.push(ProofEvent { kind, inputs, conclusion, certificate });
    }

    /// Marks every PS column that is a projective atom.
    pub fn detect_atoms(&mut self) -> Vec<usize> {
        let atoms = crate::basis::detect_atom_pims(&self.u);
        for &j in &atoms {
            if self.pims.insert(j) {
                let name = self.ps_names[j].clone();
                self.log(ProofKind::AtomPim, vec![name], "indecomposable".into(), Certificate::Unit(self.u.col(j)));
            }
        }
        atoms
    }

    /// PIM test for `PS_j` against the Brauer characters in `b`.
    pub fn pim_test(&mut self, j: usize) -> Result<PartVerdict> {
        let n = self.u.col(j);
        let v = part_test(&n, &self.b, self.pivot_limit)?;
        if let PartVerdict::Proved(p) = &v {
            self.log(
                ProofKind::PimTest,
                vec![self.ps_names[j].clone()],
                "indecomposable".into(),
                Certificate::Infeasible(p.clone()),
            );
            self.pims.insert(j);
        }
        Ok(v)
    }

    /// Irreducibility test for `BS_i` against the projectives in `p`.
    pub fn irr_test(&mut self, i: usize) -> Result<PartVerdict> {
        let n = self.u.row(i).to_vec();
        let v = part_test(&n, &self.p, self.pivot_limit)?;
        if let PartVerdict::Proved(p) = &v {
            self.log(
                ProofKind::IrrTest,
                vec![self.bs_names[i].clone()],
                "irreducible".into(),
                Certificate::Infeasible(p.clone()),
            );
            self.irreducibles.insert(i);
        }
        Ok(v)
    }

    /// Scalar products of a projective given over PS with BS followed by the
    /// rows of `b`.
    fn profile(&self, w: &[BigInt]) -> Vec<BigInt> {
        let pa = self.u.mul_vec(w);
        let mut out = pa.clone();
        out.extend(self.b.mul_vec(&pa));
        out
    }

    /// Largest n with `⟨φ, Φ_j − n·Φ_i⟩ ≥ 0` for every φ in BS and `b`;
    /// `None` when unbounded.
    fn containment_bound(&self, i: &[BigInt], j: &[BigInt]) -> Option<BigInt> {
        let (pi, pj) = (self.profile(i), self.profile(j));
        pi.iter()
            .zip(&pj)
            .filter(|(a, _)| a.is_positive())
            .map(|(a, b)| crate::exactnum::floor_div(b, a))
            .min()
            .map(|m| m.max(BigInt::zero()))
    }

    /// Maximal multiplicities `m[i][j]` of `PS_i` in `PS_j`; `None` is ∞.
    pub fn max_multiplicities(&self) -> Vec<Vec<Option<BigInt>>> {
        let s = self.size();
        (0..s)
            .map(|i| {
                (0..s)
                    .map(|j| {
                        if !self.pims.contains(&i) {
                            None
                        } else if self.pims.contains(&j) {
                            Some(if i == j { BigInt::one() } else { BigInt::zero() })
                        } else {
                            self.containment_bound(&unit(s, i), &unit(s, j))
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// The system for the bits of `BS_row` with respect to `PS_f`, with
    /// objective `⟨φ', Σ⟩`. Returns the problem, the variable columns and the
    /// constant part of the objective.
    pub fn bit_system(
        &self,
        f: usize,
        row: usize,
        sigma: &[BigInt],
        rule: Rule,
        m: &[Vec<Option<BigInt>>],
    ) -> Result<(IlpProblem, Vec<usize>, BigInt)> {
        let s = self.size();
        let n = self.u.row(row).to_vec();
        if !n[f].is_positive() {
            return Err(Error::Precondition(format!("{} does not meet {}", self.bs_names[row], self.ps_names[f])));
        }
        let cap = |x: &BigInt, bound: &Option<BigInt>| match bound {
            Some(b) => x.min(b).clone(),
            None => x.clone(),
        };
        let mut vars = Vec::new();
        let mut ub = Vec::new();
        for i in (0..s).filter(|&i| i != f) {
            let bound = match rule {
                Rule::Max if self.pims.contains(&i) => BigInt::zero(),
                Rule::Max => cap(&n[i], &m[f][i]),
                Rule::Min if self.pims.contains(&i) => cap(&n[i], &m[i][f]),
                Rule::Min => n[i].clone(),
            };
            if bound.is_positive() {
                vars.push(i);
                ub.push(bound);
            }
        }
        let k = vars.len();
        let mut rows = Vec::new();
        let mut b = Vec::new();
        for (t, u) in ub.iter().enumerate() {
            rows.push(unit(k, t));
            b.push(u.clone());
        }
        for r in 0..self.p.nrows() {
            let w = self.p.row(r);
            rows.push(vars.iter().map(|&i| w[i].clone()).collect());
            b.push(dot(w, &n) - &w[f]);
        }
        for r in 0..self.p.nrows() {
            let w = self.p.row(r);
            rows.push(vars.iter().map(|&i| -&w[i]).collect());
            b.push(w[f].clone());
        }
        let c = vars.iter().map(|&i| sigma[i].clone()).collect();
        let problem = IlpProblem::new(IntMatrix::from_rows_with_cols(rows, k), b, c)?;
        Ok((problem, vars, sigma[f].clone()))
    }

    /// Subtracts `PS_f` from the projective `sigma` (over PS) as often as the
    /// bits of the Brauer basic set allow.
    pub fn subtract_indecomposable(&mut self, f: usize, sigma: &[BigInt], label: &str) -> Result<Subtraction> {
        let s = self.size();
        if sigma.len() != s {
            return Err(Error::Domain("projective has the wrong length".into()));
        }
        let col = self.u.col(f);
        let rule = if self.pims.contains(&f) {
            Rule::Max
        } else if col.iter().all(|x| x.is_zero() || x.is_one()) {
            Rule::Min
        } else {
            return Err(Error::Precondition(format!(
                "{} is neither proved indecomposable nor multiplicity free",
                self.ps_names[f]
            )));
        };
        let rows: Vec<usize> = (0..s).filter(|&r| self.u.get(r, f).is_positive()).collect();
        if rows.is_empty() {
            return Err(Error::Precondition(format!("no basic Brauer character meets {}", self.ps_names[f])));
        }
        let m = self.max_multiplicities();
        let mut minima = Vec::new();
        for &r in &rows {
            let (problem, _, offset) = self.bit_system(f, r, sigma, rule, &m)?;
            let value = match gomory_solve(&problem, false, self.pivot_limit)? {
                IlpOutcome::Optimum { value, .. } => Some(value + &offset),
                IlpOutcome::Infeasible => {
                    return Err(Error::Domain(format!(
                        "{} has no bit for {}; the data are inconsistent",
                        self.bs_names[r], self.ps_names[f]
                    )))
                }
                IlpOutcome::Aborted { .. } => None,
            };
            minima.push(BitMinimum { row: r, problem, offset, value });
        }
        let values: Vec<Option<BigInt>> = minima.iter().map(|m| m.value.clone()).collect();
        let z = combine(rule, &values);
        let mut reduced = sigma.to_vec();
        reduced[f] -= &z;
        self.log(
            ProofKind::Subtract,
            vec![self.ps_names[f].clone(), label.to_string()],
            format!("{label} - {z}*{} is projective", self.ps_names[f]),
            Certificate::Bits { rule, minima: minima.clone(), z: z.clone() },
        );
        Ok(Subtraction { z, reduced, minima })
    }

    /// Replaces PS by `PS·t` for a unimodular `t`, rewriting `u` and `p`.
    pub fn change_ps(&mut self, t: &IntMatrix) -> Result<()> {
        let tinv = t.inverse_unimodular()?;
        self.u = self.u.mul(t)?;
        if self.p.nrows() > 0 {
            self.p = self.p.mul(&tinv.transpose())?;
        }
        let s = self.size();
        let id = IntMatrix::identity(s);
        self.pims.retain(|&j| t.col(j) == id.col(j));
        Ok(())
    }

    /// Replaces `PS_j` by the projective `w` over PS; `w[j]` must be ±1.
    pub fn replace_ps(&mut self, j: usize, w: &[BigInt], name: &str) -> Result<()> {
        let mut t = IntMatrix::identity(self.size());
        t.set_col(j, w);
        self.change_ps(&t)?;
        self.ps_names[j] = name.to_string();
        Ok(())
    }

    fn is_lower_unitriangular(&self) -> bool {
        let s = self.size();
        (0..s).all(|i| self.u.get(i, i).is_one() && (i + 1..s).all(|j| self.u.get(i, j).is_zero()))
    }

    /// One sweep of the triangular reduction.
    pub fn triangular_reduce(&mut self) -> Result<Vec<TriangularStep>> {
        if !self.is_lower_unitriangular() {
            return Err(Error::Precondition("scalar products are not lower unitriangular".into()));
        }
        let s = self.size();
        let mut steps = Vec::new();
        for i in 0..s {
            for j0 in 0..i {
                let a_row = self.u.row(i).to_vec();
                let mut best: Option<(BigInt, usize)> = None;
                for k in 0..self.p.nrows() {
                    let z = triangular_z(self.p.row(k), &a_row, i, j0);
                    if z.is_positive() && best.as_ref().map_or(true, |(b, _)| z > *b) {
                        best = Some((z, k));
                    }
                }
                let Some((z, k)) = best else { continue };
                let before = self.u.col(j0);
                let mut w = unit(s, j0);
                w[i] -= &z;
                for l in i + 1..s {
                    w[l] += &z * self.u.get(l, i);
                }
                self.log(
                    ProofKind::Triangular,
                    vec![self.ps_names[j0].clone(), self.ps_names[i].clone()],
                    format!("{} contains {}*{}", self.ps_names[j0], z, self.ps_names[i]),
                    Certificate::Triangular { i, j0, z: z.clone(), v: self.p.row(k).to_vec(), a_row },
                );
                let name = format!("{}'", self.ps_names[j0]);
                self.replace_ps(j0, &w, &name)?;
                debug_assert!(self.u.col(j0) < before);
                debug_assert!(self.is_lower_unitriangular());
                steps.push(TriangularStep { i, j0, z, witness: k });
            }
        }
        Ok(steps)
    }

    /// The lexicographically smallest solution of `p` with the first
    /// variables pinned to `prefix`, and `x[prefix.len()] ≥ lower`.
    fn lex_min(&self, p: &IlpProblem, prefix: &[BigInt], lower: Option<&BigInt>) -> Result<Option<Vec<BigInt>>> {
        let n = p.nvars();
        let mut q = p.clone();
        let pin = |q: &mut IlpProblem, k: usize, v: &BigInt| {
            q.a.push_row(unit(n, k));
            q.b.push(v.clone());
            q.a.push_row(unit(n, k).iter().map(|x| -x).collect());
            q.b.push(-v);
        };
        for (k, v) in prefix.iter().enumerate() {
            pin(&mut q, k, v);
        }
        if let Some(lo) = lower {
            q.a.push_row(unit(n, prefix.len()).iter().map(|x| -x).collect());
            q.b.push(-lo);
        }
        let mut x = prefix.to_vec();
        for k in prefix.len()..n {
            q.c = unit(n, k);
            match gomory_solve(&q, true, self.pivot_limit)? {
                IlpOutcome::Optimum { value, .. } => {
                    pin(&mut q, k, &value);
                    x.push(value);
                }
                IlpOutcome::Infeasible => return Ok(None),
                IlpOutcome::Aborted { .. } => {
                    return Err(Error::Inconclusive("lexicographic minimization aborted".into()))
                }
            }
        }
        Ok(Some(x))
    }

    fn two_smallest_parts(&self, p: &IlpProblem) -> Result<Option<[Vec<BigInt>; 2]>> {
        let Some(first) = self.lex_min(p, &[], None)? else { return Ok(None) };
        for k in (0..first.len()).rev() {
            let lo = &first[k] + 1;
            if let Some(second) = self.lex_min(p, &first[..k], Some(&lo))? {
                return Ok(Some([first, second]));
            }
        }
        Ok(None)
    }

    /// Looks for a relation in `p` forcing `PS_i` to be decomposable and, if
    /// one is found, splits it into its two smallest parts.
    pub fn split_decomposable(&mut self, i: usize) -> Result<SplitOutcome> {
        let s = self.size();
        let rows: Vec<usize> = (0..self.p.nrows()).filter(|&k| self.p.get(k, i).is_negative()).collect();
        if rows.is_empty() {
            return Ok(SplitOutcome::NoAction(format!("no relation with a negative {}", self.ps_names[i])));
        }
        let ei = unit(s, i);
        let forced = rows.iter().any(|&k| {
            let v = self.p.row(k);
            (0..s).filter(|&j| j != i && v[j].is_positive()).all(|j| {
                let vj: Vec<BigInt> = unit(s, j).iter().map(|x| x * &v[j]).collect();
                self.containment_bound(&ei, &vj).map_or(true, |m| m.is_zero())
            })
        });
        if !forced {
            return Ok(SplitOutcome::NoAction(format!("{} may be contained elsewhere", self.ps_names[i])));
        }
        let n = self.u.col(i);
        let (problem, support) = part_system(&n, &self.b)?;
        let Some(parts) = self.two_smallest_parts(&problem)? else {
            return Ok(SplitOutcome::NoAction("fewer than two parts survive".into()));
        };
        let parts = parts.map(|x| expand(&x, &support, s));
        let sum: Vec<BigInt> = parts[0].iter().zip(&parts[1]).map(|(a, b)| a + b).collect();
        if sum != n {
            return Ok(SplitOutcome::NoAction(format!(
                "smallest parts ({}) and ({}) do not add up",
                join(&parts[0]),
                join(&parts[1])
            )));
        }
        let mut replaced = Vec::new();
        let columns = self.u.columns();
        // case (i): one part is already in PS
        for (a, b) in [(0, 1), (1, 0)] {
            if columns.iter().enumerate().any(|(k, c)| k != i && *c == parts[a]) {
                replaced.push((i, parts[b].clone()));
                break;
            }
        }
        if replaced.is_empty() && self.is_lower_unitriangular() {
            // case (ii): the part through the diagonal replaces PS_i, the other
            // one the column of its first nonzero entry
            let (a, b) = if parts[0][i].is_one() { (0, 1) } else { (1, 0) };
            if let Some(l) = parts[b].iter().position(|x| x.is_positive()) {
                replaced.push((i, parts[a].clone()));
                replaced.push((l, parts[b].clone()));
            }
        }
        if replaced.is_empty() {
            return Ok(SplitOutcome::NoAction("neither replacement case applies".into()));
        }
        let mut new_u = self.u.clone();
        for (k, c) in &replaced {
            new_u.set_col(*k, c);
        }
        if !new_u.det()?.abs().is_one() {
            return Ok(SplitOutcome::NoAction("replacement is not a basic set".into()));
        }
        let t = self.u.inverse_unimodular()?.mul(&new_u)?;
        self.log(
            ProofKind::Split,
            vec![self.ps_names[i].clone()],
            format!("{} is decomposable", self.ps_names[i]),
            Certificate::Parts { n, parts: parts.clone(), problem },
        );
        self.change_ps(&t)?;
        for (k, _) in &replaced {
            self.ps_names[*k] = format!("{}'", self.ps_names[*k]);
        }
        Ok(SplitOutcome::Split { parts, replaced })
    }

    /// Drops projectives of `p` that carry no information beyond the others.
    pub fn prune(&mut self) -> Result<PruneReport> {
        let rep = prune_essential(self.size(), &self.p)?;
        for (k, coeffs) in &rep.discarded {
            let gens = rep.generators_at_discard(*k, self.size(), &self.p);
            self.log(
                ProofKind::Prune,
                vec![format!("P{}", k + 1)],
                "redundant".into(),
                Certificate::Combination { target: self.p.row(*k).to_vec(), generators: gens, coeffs: coeffs.clone() },
            );
        }
        let kept: Vec<Vec<BigInt>> = rep.essential.iter().map(|&k| self.p.row(k).to_vec()).collect();
        self.p = IntMatrix::from_rows_with_cols(kept, self.size());
        Ok(rep)
    }
}

// ---------------------------------------------------------------------------
// essential projectives

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PruneReport {
    /// Kept rows, in the order they were admitted.
    pub essential: Vec<usize>,
    /// Dropped rows with coefficients over the rows admitted before the drop
    /// (in admission order) followed by the s basic projectives.
    pub discarded: Vec<(usize, Vec<BigRational>)>,
    /// For each dropped row, how many rows had been admitted at that time.
    pub admitted_at: Vec<usize>,
}

impl PruneReport {
    /// Generators matching the coefficients stored for a dropped row.
    pub fn generators_at_discard(&self, row: usize, s: usize, p: &IntMatrix) -> Vec<Vec<BigInt>> {
        let pos = self.discarded.iter().position(|(k, _)| *k == row).expect("discarded row");
        let mut g: Vec<Vec<BigInt>> =
            self.essential[..self.admitted_at[pos]].iter().map(|&k| p.row(k).to_vec()).collect();
        g.extend((0..s).map(|i| unit(s, i)));
        g
    }
}

/// Greedy choice of an essential subset of the projectives `p` (rows over a
/// basic set of size `s`): a row is dropped once it is a nonnegative rational
/// combination of the basic set and the rows kept so far, and the row with
/// the smallest coefficient sum is kept next.
pub fn prune_essential(s: usize, p: &IntMatrix) -> Result<PruneReport> {
    let mut essential: Vec<usize> = Vec::new();
    let mut open: Vec<usize> = (0..p.nrows()).collect();
    let mut discarded = Vec::new();
    let mut admitted_at = Vec::new();
    loop {
        let mut still = Vec::new();
        for &k in &open {
            let mut cols: Vec<Vec<BigInt>> = essential.iter().map(|&e| p.row(e).to_vec()).collect();
            cols.extend((0..s).map(|i| unit(s, i)));
            let c = IntMatrix::from_columns(&cols, s);
            match lp_feasible(&c, p.row(k))? {
                LpOutcome::Feasible(x) => {
                    discarded.push((k, x));
                    admitted_at.push(essential.len());
                }
                LpOutcome::Infeasible => still.push(k),
            }
        }
        open = still;
        let Some(&next) = open.iter().min_by_key(|&&k| (p.row(k).iter().sum::<BigInt>(), k)) else { break };
        essential.push(next);
        open.retain(|&k| k != next);
    }
    Ok(PruneReport { essential, discarded, admitted_at })
}

// ---------------------------------------------------------------------------
// subsums

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SubsumVerdict {
    Indecomposable,
    /// A proper subsum vanishing on the p-singular classes.
    Inconclusive(Option<Vec<BigInt>>),
}

pub const SUBSUM_ENUMERATION_LIMIT: u64 = 1 << 20;

/// Looks for a proper nonzero subsum of `Σ a_i·χ_i` that vanishes on every
/// column of `singular` (rows: the χ_i on the p-singular columns).
pub fn subsum_test(singular: &IntMatrix, a: &[BigInt], pivot_limit: usize) -> Result<SubsumVerdict> {
    if singular.nrows() != a.len() {
        return Err(Error::Domain("coefficient vector has the wrong length".into()));
    }
    if a.iter().any(|x| x.is_negative()) || a.iter().all(|x| x.is_zero()) {
        return Err(Error::Precondition("subsum test needs nonnegative coefficients".into()));
    }
    let size = a.iter().try_fold(1u64, |acc, x| {
        let f = u64::try_from(x).ok()?.checked_add(1)?;
        acc.checked_mul(f)
    });
    match size {
        Some(n) if n <= SUBSUM_ENUMERATION_LIMIT => Ok(subsum_enumerate(singular, a)),
        _ => subsum_ilp(singular, a, pivot_limit),
    }
}

fn subsum_enumerate(singular: &IntMatrix, a: &[BigInt]) -> SubsumVerdict {
    let n = a.len();
    let total: BigInt = a.iter().sum();
    let mut x = vec![BigInt::zero(); n];
    loop {
        let sum: BigInt = x.iter().sum();
        if sum.is_positive() && sum < total && singular.vec_mul(&x).iter().all(|v| v.is_zero()) {
            return SubsumVerdict::Inconclusive(Some(x));
        }
        let mut i = 0;
        loop {
            if i == n {
                return SubsumVerdict::Indecomposable;
            }
            if x[i] < a[i] {
                x[i] += 1;
                break;
            }
            x[i] = BigInt::zero();
            i += 1;
        }
    }
}

fn subsum_ilp(singular: &IntMatrix, a: &[BigInt], pivot_limit: usize) -> Result<SubsumVerdict> {
    let n = a.len();
    let t = singular.transpose();
    let eq = IntMatrix::from_rows_with_cols(
        (0..t.nrows()).flat_map(|k| [t.row(k).iter().map(|x| -x).collect(), t.row(k).to_vec()]).collect(),
        n,
    );
    let (mut p, support) = part_system(a, &IntMatrix::zeros(0, n))?;
    for k in 0..eq.nrows() {
        p.a.push_row(support.iter().map(|&i| eq.get(k, i).clone()).collect());
        p.b.push(BigInt::zero());
    }
    Ok(match gomory_solve(&p, true, pivot_limit)? {
        IlpOutcome::Infeasible => SubsumVerdict::Indecomposable,
        IlpOutcome::Optimum { x, .. } => SubsumVerdict::Inconclusive(Some(expand(&x, &support, n))),
        IlpOutcome::Aborted { .. } => SubsumVerdict::Inconclusive(None),
    })
}

/// Rows of the table restricted to the p-singular columns.
pub fn singular_matrix(table: &crate::chartable::MocTable, p: u64, rows: &[usize]) -> IntMatrix {
    let cols: Vec<usize> = table
        .families
        .iter()
        .enumerate()
        .filter(|(fi, _)| !table.family_is_p_regular(*fi, p))
        .flat_map(|(_, f)| f.columns())
        .collect();
    let out = rows.iter().map(|&r| cols.iter().map(|&c| table.rows.get(r, c).clone()).collect()).collect();
    IntMatrix::from_rows_with_cols(out, cols.len())
}

// ---------------------------------------------------------------------------
// parity in characteristic 2

/// The PIM of the trivial module when the parity condition pins it down
/// inside `column`, a projective containing it exactly once (row 0 is the
/// trivial character).
fn trivial_pim_by_parity(degrees: &[BigInt], real: &[bool], column: &[BigInt]) -> Option<Vec<BigInt>> {
    if column.first().map_or(true, |x| !x.is_one()) {
        return None;
    }
    let two = BigInt::from(2);
    let mut pim = Vec::with_capacity(column.len());
    for ((d, &r), c) in degrees.iter().zip(real).zip(column) {
        let odd = !(d % &two).is_zero();
        let v = if r {
            // the value has the parity of χ(1) and lies in [0, c]
            let lo = BigInt::from(odd as u8);
            if lo > *c || (c - &lo).abs() >= two {
                return None;
            }
            lo
        } else if c.is_zero() {
            BigInt::zero()
        } else {
            return None;
        };
        pim.push(v);
    }
    Some(pim)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FongReport {
    /// `(χ, least multiplicity of the trivial Brauer character in χ)` for the
    /// real valued χ.
    pub lower_bounds: Vec<(usize, BigInt)>,
    /// Parity of `d_{χ,1}` for each real χ.
    pub parities: Vec<(usize, u8)>,
    /// Projective with trivial coefficient 1 that was used.
    pub source: Option<usize>,
    pub trivial_pim: Option<Vec<BigInt>>,
    /// Projectives of the basic set contained in the source projective.
    pub containments: Vec<usize>,
}

/// Parity conditions of Fong's lemma in characteristic 2. `proj` has the
/// characters of the block as rows (row 0 trivial) and projectives as
/// columns.
pub fn fong_parity(p: u64, degrees: &[BigInt], real: &[bool], proj: &IntMatrix) -> Result<FongReport> {
    let mut rep =
        FongReport { lower_bounds: vec![], parities: vec![], source: None, trivial_pim: None, containments: vec![] };
    if p != 2 {
        return Ok(rep);
    }
    if degrees.len() != real.len() || proj.nrows() != degrees.len() {
        return Err(Error::Domain("degrees, reality flags and projectives disagree".into()));
    }
    for (k, (d, &r)) in degrees.iter().zip(real).enumerate() {
        if r {
            let odd = u8::from(!(d % BigInt::from(2)).is_zero());
            rep.parities.push((k, odd));
            rep.lower_bounds.push((k, BigInt::from(odd)));
        }
    }
    let Some(j) = (0..proj.ncols()).find(|&j| proj.get(0, j).is_one()) else { return Ok(rep) };
    rep.source = Some(j);
    let col = proj.col(j);
    let Some(pim) = trivial_pim_by_parity(degrees, real, &col) else { return Ok(rep) };
    let rest: Vec<BigInt> = col.iter().zip(&pim).map(|(a, b)| a - b).collect();
    if let DecOutcome::Coefficients(c) = dec_solve(&rest, &proj.transpose())? {
        if c.iter().all(|x| !x.is_negative()) {
            rep.containments = (0..c.len()).filter(|&k| c[k].is_positive()).collect();
        }
    }
    rep.trivial_pim = Some(pim);
    Ok(rep)
}

/// Records a parity conclusion as a proof event.
pub fn parity_event(degrees: &[BigInt], real: &[bool], proj: &IntMatrix, rep: &FongReport) -> Option<ProofEvent> {
    let j = rep.source?;
    let pim = rep.trivial_pim.clone()?;
    let contained: Vec<String> = rep.containments.iter().map(|k| format!("col{}", k + 1)).collect();
    Some(ProofEvent {
        kind: ProofKind::Parity,
        inputs: vec![format!("col{}", j + 1)],
        conclusion: if contained.is_empty() {
            "trivial PIM determined".into()
        } else {
            format!("contains {}", contained.join(" "))
        },
        certificate: Certificate::Parity {
            degrees: degrees.to_vec(),
            real: real.to_vec(),
            column: proj.col(j),
            pim,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[i64]) -> Vec<BigInt> {
        x.iter().map(|&a| BigInt::from(a)).collect()
    }

    #[test]
    fn atom_has_no_proper_part() {
        let rel = IntMatrix::zeros(0, 3);
        assert!(matches!(part_test(&v(&[0, 1, 0]), &rel, 1000).unwrap(), PartVerdict::Proved(_)));
        assert!(matches!(part_test(&v(&[0, 1, 1]), &rel, 1000).unwrap(), PartVerdict::Inconclusive(Some(_))));
    }

    #[test]
    fn containment_floor() {
        let u = IntMatrix::identity(2);
        let mut ctx = ImproveContext::new(u, IntMatrix::zeros(0, 2), IntMatrix::zeros(0, 2)).unwrap();
        ctx.pims.insert(0);
        assert_eq!(ctx.containment_bound(&v(&[1, 1]), &v(&[4, 2])), Some(BigInt::from(2)));
        let m = ctx.max_multiplicities();
        assert_eq!(m[1][0], None);
        assert_eq!(m[0][0], Some(BigInt::one()));
        ctx.pims.insert(1);
        assert_eq!(ctx.max_multiplicities()[0][1], Some(BigInt::zero()));
    }

    #[test]
    fn triangular_z_formula() {
        // |v_i| = 3, one other positive term 1·1, v_j0 = 1
        assert_eq!(triangular_z(&v(&[1, 1, -3]), &v(&[1, 1, 1]), 2, 0), BigInt::from(2));
        assert_eq!(triangular_z(&v(&[2, 0, -3]), &v(&[0, 0, 1]), 2, 0), BigInt::from(2));
        assert_eq!(triangular_z(&v(&[1, 3, -3]), &v(&[1, 1, 1]), 2, 0), BigInt::zero());
    }

    #[test]
    fn parity_is_noop_off_two() {
        let rep = fong_parity(3, &v(&[1]), &[true], &IntMatrix::identity(1)).unwrap();
        assert!(rep.parities.is_empty() && rep.source.is_none());
    }
}
