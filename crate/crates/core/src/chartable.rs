//! Character tables in the all-integer column format.
//!
//! Columns are grouped into families of algebraically conjugate classes. A
//! family of `d` classes shares one column field of degree `d`; its columns
//! hold the coordinates of the value at the representative class over an
//! integral basis of that field, so the table is a square integer matrix.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use num_traits::{Signed, Zero};

use crate::cyclo::Cyc;
use crate::error::{Error, Result};
use crate::exactnum::{legacy_decode, legacy_encode, valuation, BigInt, BigRational, LegacyRecord};
use crate::intlin::IntMatrix;
use crate::numfield::{registry_get, GaloisSubgroup, OrbitSumBasis};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassInfo {
    pub name: String,
    pub element_order: u64,
    pub centralizer: BigInt,
    /// prime -> class index of g^p
    pub powers: BTreeMap<u64, usize>,
}

#[derive(Debug, Clone)]
pub struct ColumnFamily {
    pub rep: usize,
    pub members: Vec<usize>,
    /// Galois exponent carrying the representative to each member.
    pub galois: Vec<u64>,
    pub basis: Arc<OrbitSumBasis>,
    /// First matrix column of this family.
    pub offset: usize,
}

impl ColumnFamily {
    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn columns(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.degree()
    }
}

/// Unsorted family description as read from a file.
#[derive(Debug, Clone)]
pub struct FamilySpec {
    pub classes: Vec<String>,
    pub f: u64,
    pub gens: Vec<u64>,
    pub reps: Option<Vec<u64>>,
    pub galois: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct MocTable {
    pub name: String,
    pub order: BigInt,
    /// 0 for ordinary tables, p for tables on p-regular classes.
    pub characteristic: u64,
    pub classes: Vec<ClassInfo>,
    pub families: Vec<ColumnFamily>,
    pub rows: IntMatrix,
    pub labels: Vec<String>,
    class_family: Vec<(usize, usize)>,
}

impl PartialEq for MocTable {
    fn eq(&self, o: &Self) -> bool {
        self.name == o.name
            && self.order == o.order
            && self.characteristic == o.characteristic
            && self.classes == o.classes
            && self.rows == o.rows
            && self.labels == o.labels
            && self.families.len() == o.families.len()
            && self.families.iter().zip(&o.families).all(|(a, b)| {
                a.members == b.members && a.galois == b.galois && *a.basis == *b.basis
            })
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

fn parse_int(tok: &str, legacy: bool) -> Result<BigInt> {
    if legacy || tok.contains('/') {
        legacy_decode(&LegacyRecord::parse(tok)?)
    } else {
        tok.parse::<BigInt>().map_err(|_| bad(format!("bad integer '{tok}'")))
    }
}

fn fmt_int(v: &BigInt, legacy: bool) -> String {
    if legacy {
        legacy_encode(v).to_text()
    } else {
        v.to_string()
    }
}

fn parse_list(v: &str) -> Result<Vec<u64>> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|x| x.parse().map_err(|_| bad(format!("bad number list '{v}'")))).collect()
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl MocTable {
    /// Builds and validates a table. Classes are put in canonical order
    /// (identity, then element order ascending, centralizer order descending,
    /// input order); matrix columns follow the families as given.
    pub fn new(
        name: &str,
        order: BigInt,
        characteristic: u64,
        classes: Vec<ClassInfo>,
        families: Vec<FamilySpec>,
        labels: Vec<String>,
        rows: IntMatrix,
    ) -> Result<MocTable> {
        let n = classes.len();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.sort_by(|&a, &b| {
            let (x, y) = (&classes[a], &classes[b]);
            (x.element_order != 1)
                .cmp(&(y.element_order != 1))
                .then(x.element_order.cmp(&y.element_order))
                .then(y.centralizer.cmp(&x.centralizer))
                .then(a.cmp(&b))
        });
        let mut new_index = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            new_index[old] = new;
        }
        let sorted: Vec<ClassInfo> = perm
            .iter()
            .map(|&old| {
                let mut c = classes[old].clone();
                c.powers = c.powers.iter().map(|(&p, &i)| (p, new_index[i])).collect();
                c
            })
            .collect();
        let by_name: BTreeMap<&str, usize> =
            sorted.iter().enumerate().map(|(i, c)| (c.name.as_str(), i)).collect();
        if by_name.len() != n {
            return Err(bad("duplicate class names"));
        }
        for c in &sorted {
            if c.element_order == 0 || c.centralizer <= BigInt::zero() {
                return Err(Error::Domain(format!("class {} has invalid orders", c.name)));
            }
            if !(&order % &c.centralizer).is_zero() {
                return Err(Error::Domain(format!(
                    "centralizer order of {} does not divide the group order",
                    c.name
                )));
            }
            if characteristic > 1 && c.element_order % characteristic == 0 {
                return Err(Error::Domain(format!(
                    "class {} is {characteristic}-singular in a {characteristic}-modular table",
                    c.name
                )));
            }
        }
        // family columns in input order
        let mut fams: Vec<(ColumnFamily, usize)> = Vec::new();
        let mut offset = 0;
        let mut seen = vec![false; n];
        for spec in &families {
            let members: Vec<usize> = spec
                .classes
                .iter()
                .map(|c| by_name.get(c.as_str()).copied().ok_or_else(|| bad(format!("unknown class {c}"))))
                .collect::<Result<_>>()?;
            if spec.galois.len() != members.len() {
                return Err(bad("family galois list length differs from its class list"));
            }
            for &m in &members {
                if std::mem::replace(&mut seen[m], true) {
                    return Err(Error::Domain(format!("class {} in two families", sorted[m].name)));
                }
            }
            let g = GaloisSubgroup::new(spec.f, &spec.gens)?;
            let basis = registry_get(&g, spec.reps.as_deref())?;
            if basis.degree() != members.len() {
                return Err(Error::Domain(format!(
                    "family of {} has {} classes but field degree {}",
                    spec.classes[0],
                    members.len(),
                    basis.degree()
                )));
            }
            let rep_order = sorted[members[0]].element_order;
            if rep_order % spec.f != 0 {
                return Err(Error::Domain(format!(
                    "conductor {} does not divide element order {rep_order}",
                    spec.f
                )));
            }
            for (&m, &k) in members.iter().zip(&spec.galois) {
                if sorted[m].element_order != rep_order || num_integer::gcd(k, rep_order) != 1 {
                    return Err(Error::Domain(format!("class {} not conjugate to its family", sorted[m].name)));
                }
            }
            let d = basis.degree();
            fams.push((
                ColumnFamily {
                    rep: members[0],
                    members,
                    galois: spec.galois.clone(),
                    basis,
                    offset,
                },
                offset,
            ));
            offset += d;
        }
        if let Some(m) = seen.iter().position(|s| !s) {
            return Err(Error::Domain(format!("class {} belongs to no family", sorted[m].name)));
        }
        let width = offset;
        if rows.ncols() != width {
            return Err(bad(format!("rows have {} entries, families need {width}", rows.ncols())));
        }
        if rows.nrows() != width {
            return Err(Error::Domain(format!("table is {}x{width}, not square", rows.nrows())));
        }
        if labels.len() != rows.nrows() {
            return Err(bad("one label per row required"));
        }
        fams.sort_by_key(|(f, _)| f.rep);
        let mut data = IntMatrix::zeros(rows.nrows(), width);
        let mut out_fams = Vec::new();
        let mut col = 0;
        for (mut fam, old) in fams {
            for k in 0..fam.degree() {
                for r in 0..rows.nrows() {
                    data.set(r, col + k, rows.get(r, old + k).clone());
                }
            }
            fam.offset = col;
            col += fam.degree();
            out_fams.push(fam);
        }
        let mut class_family = vec![(0, 0); n];
        for (fi, f) in out_fams.iter().enumerate() {
            for (j, &m) in f.members.iter().enumerate() {
                class_family[m] = (fi, j);
            }
        }
        let t = MocTable {
            name: name.to_string(),
            order,
            characteristic,
            classes: sorted,
            families: out_fams,
            rows: data,
            labels,
            class_family,
        };
        for r in 0..t.nrows() {
            let deg = t.degree(t.rows.row(r));
            if deg.as_integer().is_none() {
                return Err(Error::Domain(format!("row {} has an irrational degree", t.labels[r])));
            }
        }
        Ok(t)
    }

    pub fn nrows(&self) -> usize {
        self.rows.nrows()
    }

    pub fn width(&self) -> usize {
        self.rows.ncols()
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        self.rows.row(i)
    }

    pub fn row_by_label(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::NotFound(format!("no row labelled {label} in {}", self.name)))
    }

    pub fn class_index(&self, name: &str) -> Result<usize> {
        self.classes
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::NotFound(format!("no class {name} in {}", self.name)))
    }

    /// (family index, position within family) of a class.
    pub fn family_of(&self, class: usize) -> (usize, usize) {
        self.class_family[class]
    }

    pub fn identity_class(&self) -> usize {
        0
    }

    pub fn is_p_regular(&self, class: usize, p: u64) -> bool {
        self.classes[class].element_order % p != 0
    }

    pub fn family_is_p_regular(&self, fam: usize, p: u64) -> bool {
        self.is_p_regular(self.families[fam].rep, p)
    }

    /// The value of a coefficient row at a class.
    pub fn value(&self, coeffs: &[BigInt], class: usize) -> Cyc {
        let (fi, j) = self.class_family[class];
        let fam = &self.families[fi];
        let v = fam.basis.evaluate(&coeffs[fam.columns()]);
        if fam.galois[j] == 1 {
            v
        } else {
            v.galois(fam.galois[j] as i64)
        }
    }

    pub fn degree(&self, coeffs: &[BigInt]) -> Cyc {
        self.value(coeffs, self.identity_class())
    }

    /// Values of a coefficient row at every class.
    pub fn usual_row(&self, coeffs: &[BigInt]) -> Vec<Cyc> {
        (0..self.classes.len()).map(|c| self.value(coeffs, c)).collect()
    }

    /// The conventional table with exact cyclotomic entries.
    pub fn to_usual(&self) -> Vec<Vec<Cyc>> {
        (0..self.nrows()).map(|r| self.usual_row(self.row(r))).collect()
    }

    /// Coefficient row of a class function given by its values; values on
    /// conjugate classes must be Galois-compatible.
    pub fn encode(&self, values: &[Cyc]) -> Result<Vec<BigInt>> {
        if values.len() != self.classes.len() {
            return Err(Error::Domain("one value per class required".into()));
        }
        let mut out = vec![BigInt::zero(); self.width()];
        for fam in &self.families {
            let z = fam.basis.express(&values[fam.rep])?;
            for (j, &m) in fam.members.iter().enumerate() {
                let want = fam.basis.evaluate(&z).galois(fam.galois[j] as i64);
                let have = &values[m];
                let n = num_integer::lcm(want.conductor_bound(), have.conductor_bound());
                if want.embed(n) != have.embed(n) {
                    return Err(Error::Domain(format!(
                        "values at {} and {} are not Galois conjugate",
                        self.classes[fam.rep].name, self.classes[m].name
                    )));
                }
            }
            out[fam.columns()].clone_from_slice(&z);
        }
        Ok(out)
    }

    /// Builds a table from conventional values. The metadata of `like` is
    /// reused; only the rows change.
    pub fn from_usual(like: &MocTable, labels: Vec<String>, values: &[Vec<Cyc>]) -> Result<MocTable> {
        let rows: Vec<Vec<BigInt>> = values.iter().map(|v| like.encode(v)).collect::<Result<_>>()?;
        let mut t = like.clone();
        t.rows = IntMatrix::from_rows_with_cols(rows, like.width());
        t.labels = labels;
        if t.rows.nrows() != t.width() {
            return Err(Error::Domain("table is not square".into()));
        }
        Ok(t)
    }

    /// Class index of g^k for g in `class`.
    pub fn power_class(&self, class: usize, k: u64) -> Result<usize> {
        let ord = self.classes[class].element_order;
        let mut k = k % ord;
        if k == 0 {
            return Ok(self.identity_class());
        }
        let mut cur = class;
        let mut p = 2;
        while k > 1 {
            if k % p == 0 {
                cur = self.prime_power(cur, p)?;
                k /= p;
            } else {
                p += 1;
            }
        }
        Ok(cur)
    }

    fn prime_power(&self, class: usize, p: u64) -> Result<usize> {
        let info = &self.classes[class];
        if let Some(&c) = info.powers.get(&p) {
            return Ok(c);
        }
        if info.element_order == 1 {
            return Ok(class);
        }
        if info.element_order % p == 0 {
            return Err(Error::NotFound(format!("{p}-th power map of class {} missing", info.name)));
        }
        let (fi, j) = self.class_family[class];
        let fam = &self.families[fi];
        let f = fam.basis.conductor();
        let g = fam.basis.group();
        let target = fam.galois[j] * p % info.element_order;
        for (jj, &m) in fam.members.iter().enumerate() {
            let gm = fam.galois[jj] % f.max(1);
            if f == 1 {
                return Ok(m);
            }
            let inv = (1..f).find(|x| x * gm % f == 1).expect("unit");
            if g.contains(target % f * inv % f) {
                return Ok(m);
            }
        }
        Err(Error::NotFound(format!("class of {}^{p} not determined", info.name)))
    }

    /// Values ω_χ at family representatives, as coordinates over each family
    /// basis: |G|·χ(x)/(|C(x)|·χ(1)).
    pub fn central_character(&self, coeffs: &[BigInt]) -> Result<Vec<Vec<BigRational>>> {
        let deg = self
            .degree(coeffs)
            .as_integer()
            .ok_or_else(|| Error::Domain("irrational degree".into()))?;
        if deg.is_zero() {
            return Err(Error::Precondition("central character of a degree-0 class function".into()));
        }
        Ok(self
            .families
            .iter()
            .map(|fam| {
                let s = BigRational::new(self.order.clone(), &self.classes[fam.rep].centralizer * &deg);
                coeffs[fam.columns()].iter().map(|c| &s * BigRational::from_integer(c.clone())).collect()
            })
            .collect())
    }

    /// Partition of the rows into p-blocks by congruence of central
    /// characters on p-regular families.
    pub fn block_distribution(&self, p: u64) -> Result<Vec<Vec<usize>>> {
        let pb = BigInt::from(p);
        let mut groups: Vec<(Vec<BigInt>, Vec<usize>)> = Vec::new();
        for r in 0..self.nrows() {
            let cc = self.central_character(self.row(r))?;
            let mut key = Vec::new();
            for (fi, vals) in cc.iter().enumerate() {
                if !self.family_is_p_regular(fi, p) {
                    continue;
                }
                for v in vals {
                    if !v.is_integer() {
                        return Err(Error::Domain(format!(
                            "central character of {} is not integral",
                            self.labels[r]
                        )));
                    }
                    let mut m = v.to_integer() % &pb;
                    if m.is_negative() {
                        m += &pb;
                    }
                    key.push(m);
                }
            }
            match groups.iter_mut().find(|(k, _)| *k == key) {
                Some((_, members)) => members.push(r),
                None => groups.push((key, vec![r])),
            }
        }
        Ok(groups.into_iter().map(|(_, m)| m).collect())
    }

    fn int_degree(&self, row: usize) -> Result<BigInt> {
        self.degree(self.row(row))
            .as_integer()
            .ok_or_else(|| Error::Domain("irrational degree".into()))
    }

    /// Whether the row has p-defect zero.
    pub fn defect_zero(&self, p: u64, row: usize) -> Result<bool> {
        let d = self.int_degree(row)?.abs();
        if d.is_zero() || !(&self.order % &d).is_zero() {
            return Err(Error::Precondition(format!(
                "degree of {} does not divide the group order",
                self.labels[row]
            )));
        }
        let q = &self.order / d;
        Ok(!(q % BigInt::from(p)).is_zero())
    }

    /// ν_p(|G|) − min over the block of ν_p(χ(1)).
    pub fn block_defect(&self, p: u64, block: &[usize]) -> Result<u32> {
        let a = valuation(&self.order, p);
        let mut m = u32::MAX;
        for &r in block {
            m = m.min(valuation(&self.int_degree(r)?.abs(), p));
        }
        Ok(a - m.min(a))
    }

    pub fn parse(text: &str) -> Result<MocTable> {
        let mut name = None;
        let mut order = None;
        let mut characteristic = 0;
        let mut classes = Vec::new();
        let mut class_powers: Vec<Vec<(u64, String)>> = Vec::new();
        let mut families = Vec::new();
        let mut labels = Vec::new();
        let mut rows = Vec::new();
        let mut legacy = false;
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let kw = it.next().unwrap_or("");
            let rest: Vec<&str> = it.collect();
            let err = |m: &str| bad(format!("line {}: {m}", ln + 1));
            match kw {
                "group" => name = Some(rest.join(" ")),
                "encoding" => {
                    legacy = match rest.first().copied() {
                        Some("legacy") => true,
                        Some("decimal") => false,
                        _ => return Err(err("unknown encoding")),
                    }
                }
                "order" => order = Some(parse_int(rest.first().ok_or_else(|| err("missing order"))?, legacy)?),
                "characteristic" => {
                    characteristic = rest
                        .first()
                        .and_then(|x| x.parse().ok())
                        .ok_or_else(|| err("bad characteristic"))?
                }
                "class" => {
                    let cname = rest.first().ok_or_else(|| err("class without name"))?.to_string();
                    let mut eo = None;
                    let mut cent = None;
                    let mut pw = Vec::new();
                    for tok in &rest[1..] {
                        let (k, v) = tok.split_once('=').ok_or_else(|| err("expected key=value"))?;
                        match k {
                            "order" => eo = v.parse().ok(),
                            "centralizer" => cent = Some(parse_int(v, legacy)?),
                            "powers" => {
                                for pv in v.split(',').filter(|s| !s.is_empty()) {
                                    let (p, c) = pv.split_once(':').ok_or_else(|| err("bad power map"))?;
                                    pw.push((p.parse().map_err(|_| err("bad prime"))?, c.to_string()));
                                }
                            }
                            _ => return Err(err("unknown class attribute")),
                        }
                    }
                    classes.push(ClassInfo {
                        name: cname,
                        element_order: eo.ok_or_else(|| err("class order missing"))?,
                        centralizer: cent.ok_or_else(|| err("centralizer missing"))?,
                        powers: BTreeMap::new(),
                    });
                    class_powers.push(pw);
                }
                "family" => {
                    let mut spec =
                        FamilySpec { classes: Vec::new(), f: 0, gens: Vec::new(), reps: None, galois: Vec::new() };
                    for tok in &rest {
                        let (k, v) = tok.split_once('=').ok_or_else(|| err("expected key=value"))?;
                        match k {
                            "classes" => spec.classes = v.split(',').map(str::to_string).collect(),
                            "f" => spec.f = v.parse().map_err(|_| err("bad conductor"))?,
                            "gens" => spec.gens = parse_list(v)?,
                            "reps" => spec.reps = Some(parse_list(v)?),
                            "galois" => spec.galois = parse_list(v)?,
                            _ => return Err(err("unknown family attribute")),
                        }
                    }
                    if spec.galois.is_empty() {
                        spec.galois = vec![1; spec.classes.len()];
                    }
                    families.push(spec);
                }
                "row" => {
                    let label = rest.first().ok_or_else(|| err("row without label"))?;
                    labels.push(label.to_string());
                    rows.push(rest[1..].iter().map(|t| parse_int(t, legacy)).collect::<Result<Vec<_>>>()?);
                }
                _ => return Err(err(&format!("unknown keyword '{kw}'"))),
            }
        }
        let names: BTreeMap<String, usize> =
            classes.iter().enumerate().map(|(i, c)| (c.name.clone(), i)).collect();
        for (c, pw) in classes.iter_mut().zip(class_powers) {
            for (p, target) in pw {
                let i = *names.get(&target).ok_or_else(|| bad(format!("power map to unknown class {target}")))?;
                c.powers.insert(p, i);
            }
        }
        let width: usize = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != width) {
            return Err(bad("ragged table rows"));
        }
        MocTable::new(
            &name.ok_or_else(|| bad("missing group line"))?,
            order.ok_or_else(|| bad("missing order line"))?,
            characteristic,
            classes,
            families,
            labels,
            IntMatrix::from_rows_with_cols(rows, width),
        )
    }

    pub fn to_text(&self, legacy: bool) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "group {}", self.name);
        if legacy {
            s.push_str("encoding legacy\n");
        }
        let _ = writeln!(s, "order {}", fmt_int(&self.order, legacy));
        if self.characteristic > 0 {
            let _ = writeln!(s, "characteristic {}", self.characteristic);
        }
        for c in &self.classes {
            let pw: Vec<String> =
                c.powers.iter().map(|(p, i)| format!("{p}:{}", self.classes[*i].name)).collect();
            let _ = write!(
                s,
                "class {} order={} centralizer={}",
                c.name,
                c.element_order,
                fmt_int(&c.centralizer, legacy)
            );
            if !pw.is_empty() {
                let _ = write!(s, " powers={}", pw.join(","));
            }
            s.push('\n');
        }
        for f in &self.families {
            let names: Vec<&str> = f.members.iter().map(|&m| self.classes[m].name.as_str()).collect();
            let _ = writeln!(
                s,
                "family classes={} f={} gens={} reps={} galois={}",
                names.join(","),
                f.basis.conductor(),
                join(f.basis.group().gens()),
                join(f.basis.reps()),
                join(&f.galois)
            );
        }
        for (r, l) in self.labels.iter().enumerate() {
            let vals: Vec<String> = self.row(r).iter().map(|v| fmt_int(v, legacy)).collect();
            let _ = writeln!(s, "row {l} {}", vals.join(" "));
        }
        s
    }
}

/// Free function forms of the table operations.
pub fn to_usual(t: &MocTable) -> Vec<Vec<Cyc>> {
    t.to_usual()
}

pub fn central_character(t: &MocTable, row: usize) -> Result<Vec<Vec<BigRational>>> {
    t.central_character(t.row(row))
}

pub fn block_distribution(t: &MocTable, p: u64) -> Result<Vec<Vec<usize>>> {
    t.block_distribution(p)
}

pub fn defect_zero(t: &MocTable, p: u64, row: usize) -> Result<bool> {
    t.defect_zero(p, row)
}
