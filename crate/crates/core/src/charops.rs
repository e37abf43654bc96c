//! Class-function arithmetic on tables in the integer column format.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::chartable::MocTable;
use crate::cyclo::Cyc;
use crate::error::{Error, Result};
use crate::exactnum::{BigInt, BigRational};
use crate::intlin::{dec_solve, DecOutcome, IntMatrix, UndecidedReason};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Ordinary,
    Brauer(u64),
    Projective(u64),
    Virtual,
}

impl Kind {
    fn prime(self) -> Option<u64> {
        match self {
            Kind::Brauer(p) | Kind::Projective(p) => Some(p),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClassFunction {
    pub table: Arc<MocTable>,
    pub coeffs: Vec<BigInt>,
    pub kind: Kind,
}

impl PartialEq for ClassFunction {
    fn eq(&self, o: &Self) -> bool {
        Arc::ptr_eq(&self.table, &o.table) && self.coeffs == o.coeffs && self.kind == o.kind
    }
}

fn same_table(a: &ClassFunction, b: &ClassFunction) -> Result<()> {
    if Arc::ptr_eq(&a.table, &b.table) || *a.table == *b.table {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "class functions on different tables ({} and {})",
            a.table.name, b.table.name
        )))
    }
}

impl ClassFunction {
    pub fn new(table: Arc<MocTable>, coeffs: Vec<BigInt>, kind: Kind) -> Result<Self> {
        if coeffs.len() != table.width() {
            return Err(Error::Domain(format!(
                "{} coefficients for a table of width {}",
                coeffs.len(),
                table.width()
            )));
        }
        let cf = ClassFunction { table, coeffs, kind };
        if let Some(p) = kind.prime() {
            if !cf.vanishes_off_regular(p) {
                return Err(Error::Domain(format!("{kind:?} class function is nonzero on {p}-singular classes")));
            }
        }
        Ok(cf)
    }

    /// Row `i` of the table. Rows of a p-modular table are Brauer characters.
    pub fn row(table: &Arc<MocTable>, i: usize) -> Self {
        let kind = if table.characteristic > 0 { Kind::Brauer(table.characteristic) } else { Kind::Ordinary };
        ClassFunction { table: table.clone(), coeffs: table.row(i).to_vec(), kind }
    }

    pub fn trivial(table: &Arc<MocTable>) -> Self {
        let values = vec![Cyc::one(1); table.classes.len()];
        let coeffs = table.encode(&values).expect("1 is a class function");
        let kind = if table.characteristic > 0 { Kind::Brauer(table.characteristic) } else { Kind::Ordinary };
        ClassFunction { table: table.clone(), coeffs, kind }
    }

    pub fn from_values(table: &Arc<MocTable>, values: &[Cyc], kind: Kind) -> Result<Self> {
        ClassFunction::new(table.clone(), table.encode(values)?, kind)
    }

    pub fn values(&self) -> Vec<Cyc> {
        self.table.usual_row(&self.coeffs)
    }

    pub fn value(&self, class: usize) -> Cyc {
        self.table.value(&self.coeffs, class)
    }

    pub fn degree(&self) -> Cyc {
        self.table.degree(&self.coeffs)
    }

    fn vanishes_off_regular(&self, p: u64) -> bool {
        self.table.families.iter().enumerate().all(|(fi, fam)| {
            self.table.family_is_p_regular(fi, p) || self.coeffs[fam.columns()].iter().all(|c| c.is_zero())
        })
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        same_table(self, o)?;
        let coeffs = self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect();
        let kind = if self.kind == o.kind { self.kind } else { Kind::Virtual };
        Ok(ClassFunction { table: self.table.clone(), coeffs, kind })
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        same_table(self, o)?;
        let coeffs = self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a - b).collect();
        Ok(ClassFunction { table: self.table.clone(), coeffs, kind: Kind::Virtual })
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        let kind = if k.sign() == num_bigint::Sign::Minus { Kind::Virtual } else { self.kind };
        ClassFunction { table: self.table.clone(), coeffs: self.coeffs.iter().map(|c| c * k).collect(), kind }
    }

    /// Complex conjugate, computed family by family on the basis.
    pub fn conj(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        for fam in &self.table.families {
            let r = fam.columns();
            let c = fam.basis.conj_matrix().vec_mul(&self.coeffs[r.clone()]);
            coeffs[r].clone_from_slice(&c);
        }
        ClassFunction { table: self.table.clone(), coeffs, kind: self.kind }
    }
}

/// (1/|G|)·Σ_g θ(g)·conj(ψ(g)) over the classes of the table.
pub fn inner_product(theta: &ClassFunction, psi: &ClassFunction) -> Result<BigRational> {
    same_table(theta, psi)?;
    let t = &theta.table;
    let mut acc = BigRational::zero();
    for fam in &t.families {
        let r = fam.columns();
        let tf = fam.basis.trace_form();
        let x = tf.mul_vec(&psi.coeffs[r.clone()]);
        let s: BigInt = theta.coeffs[r].iter().zip(&x).map(|(a, b)| a * b).sum();
        if !s.is_zero() {
            acc += BigRational::new(s, t.classes[fam.rep].centralizer.clone());
        }
    }
    Ok(acc)
}

/// Values unchanged on p-regular classes, zero on p-singular ones.
pub fn hat_restrict(chi: &ClassFunction, p: u64) -> ClassFunction {
    let t = &chi.table;
    let mut coeffs = chi.coeffs.clone();
    for (fi, fam) in t.families.iter().enumerate() {
        if !t.family_is_p_regular(fi, p) {
            for c in &mut coeffs[fam.columns()] {
                *c = BigInt::zero();
            }
        }
    }
    ClassFunction { table: t.clone(), coeffs, kind: Kind::Brauer(p) }
}

/// Pointwise product, family by family through the multiplication tables.
pub fn tensor(theta: &ClassFunction, psi: &ClassFunction) -> Result<ClassFunction> {
    same_table(theta, psi)?;
    let t = &theta.table;
    let mut coeffs = vec![BigInt::zero(); t.width()];
    for fam in &t.families {
        let r = fam.columns();
        let prod = fam.basis.mult_table().product(&theta.coeffs[r.clone()], &psi.coeffs[r.clone()]);
        coeffs[r].clone_from_slice(&prod);
    }
    use Kind::*;
    let kind = match (theta.kind, psi.kind) {
        (Projective(p), Ordinary | Brauer(_) | Projective(_))
        | (Ordinary | Brauer(_), Projective(p)) => Projective(p),
        (Brauer(p), Ordinary | Brauer(_)) | (Ordinary, Brauer(p)) => Brauer(p),
        (Ordinary, Ordinary) => Ordinary,
        _ => Virtual,
    };
    Ok(ClassFunction { table: t.clone(), coeffs, kind })
}

/// Class fusion from a subgroup table into a group table.
#[derive(Debug, Clone)]
pub struct FusionMap {
    pub sub: Arc<MocTable>,
    pub sup: Arc<MocTable>,
    pub map: Vec<usize>,
}

impl FusionMap {
    pub fn new(sub: Arc<MocTable>, sup: Arc<MocTable>, map: Vec<usize>) -> Result<Self> {
        if map.len() != sub.classes.len() {
            return Err(Error::Domain("fusion map needs one image per subgroup class".into()));
        }
        if !(&sup.order % &sub.order).is_zero() {
            return Err(Error::Domain("subgroup order does not divide the group order".into()));
        }
        for (h, &g) in map.iter().enumerate() {
            let (ch, cg) = (&sub.classes[h], sup.classes.get(g).ok_or_else(|| {
                Error::Domain(format!("fusion image {g} out of range"))
            })?);
            if ch.element_order != cg.element_order {
                return Err(Error::Domain(format!(
                    "class {} of order {} fused into {} of order {}",
                    ch.name, ch.element_order, cg.name, cg.element_order
                )));
            }
            if !(&cg.centralizer % &ch.centralizer).is_zero() {
                return Err(Error::Domain(format!(
                    "centralizer of {} does not divide that of {}",
                    ch.name, cg.name
                )));
            }
        }
        Ok(FusionMap { sub, sup, map })
    }

    pub fn by_names(sub: Arc<MocTable>, sup: Arc<MocTable>, names: &[&str]) -> Result<Self> {
        let map = names.iter().map(|n| sup.class_index(n)).collect::<Result<_>>()?;
        FusionMap::new(sub, sup, map)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Induce,
    Restrict,
}

pub fn restrict(theta: &ClassFunction, fus: &FusionMap) -> Result<ClassFunction> {
    if *theta.table != *fus.sup {
        return Err(Error::Domain("restriction needs a class function of the big group".into()));
    }
    let values: Vec<Cyc> = fus.map.iter().map(|&g| theta.value(g)).collect();
    ClassFunction::from_values(&fus.sub, &values, theta.kind)
}

pub fn induce(theta: &ClassFunction, fus: &FusionMap) -> Result<ClassFunction> {
    if *theta.table != *fus.sub {
        return Err(Error::Domain("induction needs a class function of the subgroup".into()));
    }
    let g = &fus.sup;
    let mut values = Vec::with_capacity(g.classes.len());
    for (gi, cg) in g.classes.iter().enumerate() {
        let pre: Vec<usize> = (0..fus.map.len()).filter(|&h| fus.map[h] == gi).collect();
        let mut l = BigInt::one();
        for &h in &pre {
            l = num_integer::lcm(l, fus.sub.classes[h].centralizer.clone());
        }
        let mut acc = Cyc::zero(1);
        for &h in &pre {
            let w = &cg.centralizer * &l / &fus.sub.classes[h].centralizer;
            acc = acc.add(&theta.value(h).scale(&w));
        }
        let v = acc.div_int(&l).ok_or_else(|| {
            Error::Domain(format!("induced value at {} is not an algebraic integer", cg.name))
        })?;
        values.push(v);
    }
    let kind = match theta.kind {
        Kind::Ordinary => Kind::Ordinary,
        k => k,
    };
    ClassFunction::from_values(g, &values, kind)
}

pub fn transfer(theta: &ClassFunction, fus: &FusionMap, dir: Direction) -> Result<ClassFunction> {
    match dir {
        Direction::Induce => induce(theta, fus),
        Direction::Restrict => restrict(theta, fus),
    }
}

/// Character data of a symmetric group used for symmetrizations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetrizationData {
    pub r: u64,
    /// Partitions of r; they index both the rows [λ] and the cycle types ρ.
    pub partitions: Vec<Vec<u64>>,
    /// |C(ρ)| for each cycle type.
    pub centralizers: Vec<BigInt>,
    /// [λ](ρ).
    pub irr: IntMatrix,
    /// p -> Σ_{r,p}.
    pub sigma: BTreeMap<u64, IntMatrix>,
    /// p -> M_{r,p}.
    pub m: BTreeMap<u64, IntMatrix>,
}

impl SymmetrizationData {
    /// Shipped data: r ≤ 3, with Σ_{3,3}.
    pub fn builtin(r: u64) -> Result<Self> {
        let ints = |rows: &[&[i64]]| IntMatrix::from_i64(rows);
        let big = |v: &[i64]| v.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>();
        match r {
            1 => Ok(SymmetrizationData {
                r,
                partitions: vec![vec![1]],
                centralizers: big(&[1]),
                irr: ints(&[&[1]]),
                sigma: BTreeMap::new(),
                m: BTreeMap::new(),
            }),
            2 => Ok(SymmetrizationData {
                r,
                partitions: vec![vec![1, 1], vec![2]],
                centralizers: big(&[2, 2]),
                irr: ints(&[&[1, -1], &[1, 1]]),
                sigma: BTreeMap::new(),
                m: BTreeMap::new(),
            }),
            3 => {
                let irr = ints(&[&[1, -1, 1], &[2, 0, -1], &[1, 1, 1]]);
                let m3 = ints(&[&[1, 0, 0], &[1, 1, 0], &[0, 1, 1]]);
                let sigma = m3.inverse_unimodular()?.mul(&irr)?;
                Ok(SymmetrizationData {
                    r,
                    partitions: vec![vec![1, 1, 1], vec![2, 1], vec![3]],
                    centralizers: big(&[6, 2, 3]),
                    irr,
                    sigma: BTreeMap::from([(3, sigma)]),
                    m: BTreeMap::from([(3, m3)]),
                })
            }
            _ => Err(Error::NotFound(format!("no shipped symmetric group data for r = {r}"))),
        }
    }

    /// Parses user-supplied data:
    ///
    /// ```text
    /// r 3
    /// partitions 1,1,1 2,1 3
    /// centralizers 6 2 3
    /// irr 1 -1 1
    /// irr 2 0 -1
    /// irr 1 1 1
    /// sigma 3 1 -1 1
    /// ```
    pub fn parse(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::Format(format!("symmetrization data: {m}"));
        let mut r = None;
        let mut partitions = Vec::new();
        let mut centralizers = Vec::new();
        let mut irr = Vec::new();
        let mut sigma: BTreeMap<u64, Vec<Vec<BigInt>>> = BTreeMap::new();
        let num = |t: &str| t.parse::<BigInt>().map_err(|_| bad(t));
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            let mut it = line.split_whitespace();
            match it.next() {
                None => {}
                Some("r") => r = it.next().and_then(|x| x.parse().ok()),
                Some("partitions") => {
                    for t in it {
                        partitions.push(
                            t.split(',').map(|x| x.parse().map_err(|_| bad(t))).collect::<Result<Vec<u64>>>()?,
                        );
                    }
                }
                Some("centralizers") => centralizers = it.map(num).collect::<Result<_>>()?,
                Some("irr") => irr.push(it.map(num).collect::<Result<Vec<_>>>()?),
                Some("sigma") => {
                    let p: u64 = it.next().and_then(|x| x.parse().ok()).ok_or_else(|| bad("sigma prime"))?;
                    sigma.entry(p).or_default().push(it.map(num).collect::<Result<Vec<_>>>()?);
                }
                Some(k) => return Err(bad(&format!("unknown keyword {k}"))),
            }
        }
        let r = r.ok_or_else(|| bad("missing r"))?;
        let k = partitions.len();
        if k == 0
            || centralizers.len() != k
            || irr.len() != k
            || partitions.iter().any(|p| p.iter().sum::<u64>() != r)
            || sigma.values().any(|s| s.len() != k)
        {
            return Err(bad("inconsistent sizes"));
        }
        Ok(SymmetrizationData {
            r,
            partitions,
            centralizers,
            irr: IntMatrix::from_rows_with_cols(irr, k),
            sigma: sigma.into_iter().map(|(p, rows)| (p, IntMatrix::from_rows_with_cols(rows, k))).collect(),
            m: BTreeMap::new(),
        })
    }

    fn coefficients(&self, p: u64) -> Result<&IntMatrix> {
        if p == 0 || p > self.r {
            Ok(&self.irr)
        } else {
            self.sigma.get(&p).ok_or_else(|| {
                Error::NotFound(format!("no {p}-modular symmetrization data for r = {}", self.r))
            })
        }
    }
}

/// The symmetrization ψ^λ; for 0 < p ≤ r the modular coefficients Σ_{r,p}
/// replace the characters of the symmetric group.
pub fn symmetrize(
    psi: &ClassFunction,
    lambda: &[u64],
    p: u64,
    data: &SymmetrizationData,
) -> Result<ClassFunction> {
    let t = &psi.table;
    let li = data
        .partitions
        .iter()
        .position(|q| q == lambda)
        .ok_or_else(|| Error::Domain(format!("{lambda:?} is not a partition of {}", data.r)))?;
    let coef = data.coefficients(p)?;
    let mut l = BigInt::one();
    for c in &data.centralizers {
        l = num_integer::lcm(l, c.clone());
    }
    let mut values = Vec::with_capacity(t.classes.len());
    for g in 0..t.classes.len() {
        if p > 0 && !t.is_p_regular(g, p) {
            values.push(Cyc::zero(1));
            continue;
        }
        let mut acc = Cyc::zero(1);
        for (ri, rho) in data.partitions.iter().enumerate() {
            let a = coef.get(li, ri);
            if a.is_zero() {
                continue;
            }
            let mut prod = Cyc::one(1);
            for &part in rho {
                prod = prod.mul(&psi.value(t.power_class(g, part)?));
            }
            let w = a * &l / &data.centralizers[ri];
            acc = acc.add(&prod.scale(&w));
        }
        values.push(acc.div_int(&l).ok_or_else(|| {
            Error::Domain(format!("symmetrization value at {} is not integral", t.classes[g].name))
        })?);
    }
    let kind = if p > 0 { Kind::Brauer(p) } else { psi.kind };
    ClassFunction::from_values(t, &values, kind)
}

/// Symmetric and antisymmetric squares; rejected for p = 2.
pub fn squares(psi: &ClassFunction, p: u64) -> Result<(ClassFunction, ClassFunction)> {
    if p == 2 {
        return Err(Error::Domain("symmetric and antisymmetric squares are undefined for p = 2".into()));
    }
    let d = SymmetrizationData::builtin(2)?;
    Ok((symmetrize(psi, &[2], p, &d)?, symmetrize(psi, &[1, 1], p, &d)?))
}

/// Expresses θ over `basis` rows, keeps the coefficients of `block`, and
/// recombines.
pub fn block_project(theta: &ClassFunction, basis: &[ClassFunction], block: &[usize]) -> Result<ClassFunction> {
    for b in basis {
        same_table(theta, b)?;
    }
    let m = IntMatrix::from_rows_with_cols(basis.iter().map(|b| b.coeffs.clone()).collect(), theta.coeffs.len());
    let z = match dec_solve(&theta.coeffs, &m)? {
        DecOutcome::Coefficients(z) => z,
        DecOutcome::NotInRationalSpan => {
            return Err(Error::Domain("class function is not in the span of the basis".into()))
        }
        DecOutcome::Undecided(UndecidedReason::MaxIterations) => {
            return Err(Error::Inconclusive("expression over the basis did not terminate".into()))
        }
        DecOutcome::Undecided(UndecidedReason::RationalNotIntegral { .. }) => {
            return Err(Error::Domain("class function is not an integral combination of the basis".into()))
        }
    };
    let mut keep = vec![BigInt::zero(); basis.len()];
    for &i in block {
        keep[i] = z[i].clone();
    }
    let coeffs = m.vec_mul(&keep);
    Ok(ClassFunction { table: theta.table.clone(), coeffs, kind: theta.kind })
}

/// Whether θ vanishes on every p-singular class.
pub fn is_virtual_projective(theta: &ClassFunction, p: u64) -> bool {
    theta.vanishes_off_regular(p)
}
