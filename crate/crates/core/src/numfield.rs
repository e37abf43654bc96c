//! Abelian number fields given by a conductor and a subgroup of (ℤ/f)*.
//!
//! The field is the fixed field of `H` inside ℚ(ζ_f). Its ring of integers has
//! a basis of orbit sums of `H` on f-th roots of unity; [`OrbitSumBasis::lenstra`]
//! builds one following the constructive proof, and [`OrbitSumBasis::with_reps`]
//! accepts any other choice of orbit representatives that spans the same lattice.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_integer::Integer;
use num_traits::{One, Zero};

use crate::cyclo::{root_sum, Cyc};
use crate::error::{Error, Result};
use crate::exactnum::{BigInt, BigRational};
use crate::intlin::IntMatrix;

fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub(crate) fn primes_of(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut m = n;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            out.push(p);
            while m % p == 0 {
                m /= p;
            }
        }
        p += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

pub(crate) fn euler_phi(n: u64) -> u64 {
    primes_of(n).into_iter().fold(n, |acc, p| acc / p * (p - 1))
}

fn moebius(n: u64) -> i64 {
    let ps = primes_of(n);
    if ps.iter().any(|p| n % (p * p) == 0) {
        0
    } else if ps.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// A subgroup `H` of (ℤ/f)*, stored with its full element list.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GaloisSubgroup {
    f: u64,
    gens: Vec<u64>,
    elements: Vec<u64>,
}

impl fmt::Debug for GaloisSubgroup {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fm, "H(f={}, gens={:?})", self.f, self.gens)
    }
}

impl GaloisSubgroup {
    pub fn new(f: u64, gens: &[u64]) -> Result<Self> {
        if f == 0 {
            return Err(Error::Domain("conductor must be positive".into()));
        }
        let one = 1 % f;
        let mut reduced: Vec<u64> = gens.iter().map(|g| g % f).collect();
        for &g in &reduced {
            if gcd(g, f) != 1 && f > 1 {
                return Err(Error::Domain(format!("generator {g} not coprime to {f}")));
            }
        }
        reduced.sort_unstable();
        reduced.dedup();
        let mut elems: BTreeSet<u64> = BTreeSet::from([one]);
        let mut frontier = vec![one];
        while let Some(x) = frontier.pop() {
            for &g in &reduced {
                let y = x * g % f;
                if elems.insert(y) {
                    frontier.push(y);
                }
            }
        }
        Ok(GaloisSubgroup { f, gens: reduced, elements: elems.into_iter().collect() })
    }

    pub fn trivial(f: u64) -> Result<Self> {
        GaloisSubgroup::new(f, &[])
    }

    pub fn conductor(&self) -> u64 {
        self.f
    }

    pub fn gens(&self) -> &[u64] {
        &self.gens
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, a: u64) -> bool {
        self.elements.binary_search(&(a % self.f)).is_ok()
    }

    pub fn degree(&self) -> u64 {
        euler_phi(self.f) / self.order() as u64
    }

    /// Whether `H` contains the kernel of (ℤ/f)* → (ℤ/(f/p))*.
    fn contains_kernel(&self, p: u64) -> bool {
        let m = self.f / p;
        (0..self.f)
            .filter(|&a| gcd(a, self.f) == 1 && a % m == 1 % m)
            .all(|a| self.contains(a))
    }

    /// True when no smaller cyclotomic field contains the fixed field.
    pub fn is_conductor(&self) -> bool {
        self.f == 1 || primes_of(self.f).into_iter().all(|p| !self.contains_kernel(p))
    }

    /// The same field presented with its true conductor.
    pub fn reduce(&self) -> GaloisSubgroup {
        let mut cur = self.clone();
        loop {
            let Some(p) = primes_of(cur.f).into_iter().find(|&p| cur.contains_kernel(p)) else {
                return cur;
            };
            let m = cur.f / p;
            let imgs: Vec<u64> = cur.elements.iter().map(|a| a % m).collect();
            cur = GaloisSubgroup::new(m, &imgs).expect("image of a unit is a unit");
            if m == 1 {
                return cur;
            }
        }
    }

    fn orbit(&self, e: u64) -> Vec<u64> {
        let mut o: Vec<u64> = self.elements.iter().map(|h| h * e % self.f.max(1)).collect();
        o.sort_unstable();
        o.dedup();
        o
    }
}

/// How [`orbit_sum_basis`] treats a presentation whose modulus is not the
/// conductor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConductorPolicy {
    Reject,
    Reduce,
}

/// Structure constants `b_i·b_j = Σ_k c[i][j][k]·b_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultTable {
    pub c: Vec<Vec<Vec<BigInt>>>,
}

impl MultTable {
    pub fn degree(&self) -> usize {
        self.c.len()
    }

    pub fn product(&self, x: &[BigInt], y: &[BigInt]) -> Vec<BigInt> {
        let d = self.c.len();
        let mut out = vec![BigInt::zero(); d];
        for i in 0..d {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..d {
                if y[j].is_zero() {
                    continue;
                }
                let s = &x[i] * &y[j];
                for (k, c) in self.c[i][j].iter().enumerate() {
                    if !c.is_zero() {
                        out[k] += &s * c;
                    }
                }
            }
        }
        out
    }
}

struct Solver {
    pivots: Vec<usize>,
    inv: Vec<Vec<BigRational>>,
}

/// An integral basis of orbit sums.
pub struct OrbitSumBasis {
    group: GaloisSubgroup,
    reps: Vec<u64>,
    elems: Vec<Cyc>,
    solvers: Mutex<HashMap<u64, Arc<Solver>>>,
    mult: OnceLock<MultTable>,
    galois: Mutex<HashMap<u64, IntMatrix>>,
    tform: OnceLock<IntMatrix>,
}

impl fmt::Debug for OrbitSumBasis {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fm, "OrbitSumBasis({:?}, reps={:?})", self.group, self.reps)
    }
}

impl PartialEq for OrbitSumBasis {
    fn eq(&self, o: &Self) -> bool {
        self.group == o.group && self.reps == o.reps
    }
}

fn pivot_columns(rows: &[Vec<BigInt>]) -> Vec<usize> {
    let mut work: Vec<Vec<BigInt>> = rows.to_vec();
    let ncols = work.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == work.len() {
            break;
        }
        let Some(p) = (r..work.len()).find(|&i| !work[i][c].is_zero()) else {
            continue;
        };
        work.swap(r, p);
        let piv = work[r].clone();
        for row in work.iter_mut().skip(r + 1) {
            if row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for k in c..ncols {
                row[k] = &row[k] * &piv[c] - &f * &piv[k];
            }
            let g = row.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
            if !g.is_zero() && !g.is_one() {
                for x in row.iter_mut() {
                    *x /= &g;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

impl OrbitSumBasis {
    /// The orbit-sum basis from the constructive proof of Lenstra's theorem.
    pub fn lenstra(g: &GaloisSubgroup) -> Result<OrbitSumBasis> {
        if !g.is_conductor() {
            return Err(Error::Domain(format!("{} is not the conductor of the fixed field", g.f)));
        }
        let orbits = lenstra_orbits(g)?;
        let reps: Vec<u64> = orbits.iter().map(|o| o[0]).collect();
        OrbitSumBasis::build(g.clone(), reps)
    }

    /// A basis given by explicit orbit representatives, checked against the
    /// constructed basis for unimodularity.
    pub fn with_reps(g: &GaloisSubgroup, reps: &[u64]) -> Result<OrbitSumBasis> {
        let canonical = OrbitSumBasis::lenstra(g)?;
        if reps.len() != canonical.degree() {
            return Err(Error::Domain(format!(
                "{} representatives given, field degree is {}",
                reps.len(),
                canonical.degree()
            )));
        }
        let cand = OrbitSumBasis::build(g.clone(), reps.to_vec())?;
        let mut rows = Vec::new();
        for e in &cand.elems {
            rows.push(canonical.express(e).map_err(|_| {
                Error::Domain(format!("orbit sums of {reps:?} are not integral in the field"))
            })?);
        }
        let t = IntMatrix::from_rows(rows);
        let det = t.det()?;
        if det != BigInt::one() && det != -BigInt::one() {
            return Err(Error::Domain(format!(
                "orbit sums of {reps:?} span a sublattice of index {det}"
            )));
        }
        Ok(cand)
    }

    fn build(group: GaloisSubgroup, reps: Vec<u64>) -> Result<OrbitSumBasis> {
        let f = group.f;
        let elems: Vec<Cyc> = reps.iter().map(|&r| root_sum(f, &group.orbit(r))).collect();
        let b = OrbitSumBasis {
            group,
            reps,
            elems,
            solvers: Mutex::new(HashMap::new()),
            mult: OnceLock::new(),
            galois: Mutex::new(HashMap::new()),
            tform: OnceLock::new(),
        };
        let s = b.solver(f);
        if s.pivots.len() != b.elems.len() {
            return Err(Error::Domain(format!("orbit sums of {:?} are linearly dependent", b.reps)));
        }
        Ok(b)
    }

    pub fn group(&self) -> &GaloisSubgroup {
        &self.group
    }

    pub fn conductor(&self) -> u64 {
        self.group.f
    }

    pub fn reps(&self) -> &[u64] {
        &self.reps
    }

    pub fn degree(&self) -> usize {
        self.elems.len()
    }

    pub fn element(&self, i: usize) -> &Cyc {
        &self.elems[i]
    }

    pub fn elements(&self) -> &[Cyc] {
        &self.elems
    }

    fn solver(&self, n: u64) -> Arc<Solver> {
        let mut guard = self.solvers.lock().expect("solver cache");
        guard
            .entry(n)
            .or_insert_with(|| {
                let rows: Vec<Vec<BigInt>> = self.elems.iter().map(|e| e.dense(n)).collect();
                let pivots = pivot_columns(&rows);
                let sub = IntMatrix::from_rows(
                    rows.iter().map(|r| pivots.iter().map(|&c| r[c].clone()).collect()).collect(),
                );
                let inv = if pivots.len() == rows.len() {
                    sub.inverse_rational().expect("pivot block is invertible")
                } else {
                    Vec::new()
                };
                Arc::new(Solver { pivots, inv })
            })
            .clone()
    }

    /// Coordinates of `x` in this basis.
    pub fn express(&self, x: &Cyc) -> Result<Vec<BigInt>> {
        let n = x.conductor_bound().lcm(&self.group.f);
        let s = self.solver(n);
        let dense = x.dense(n);
        let d = self.degree();
        let mut z = Vec::with_capacity(d);
        for j in 0..d {
            let mut acc = BigRational::zero();
            for (k, &c) in s.pivots.iter().enumerate() {
                if !dense[c].is_zero() {
                    acc += BigRational::from_integer(dense[c].clone()) * &s.inv[k][j];
                }
            }
            if !acc.is_integer() {
                return Err(Error::Domain(format!("{x} has non-integral coordinates")));
            }
            z.push(acc.to_integer());
        }
        if self.evaluate(&z).embed(n) != x.embed(n) {
            return Err(Error::Domain(format!("{x} does not lie in the field")));
        }
        Ok(z)
    }

    pub fn evaluate(&self, coeffs: &[BigInt]) -> Cyc {
        let mut acc = Cyc::zero(self.group.f);
        for (c, b) in coeffs.iter().zip(&self.elems) {
            if !c.is_zero() {
                acc = acc.add(&b.scale(c));
            }
        }
        acc
    }

    pub fn mult_table(&self) -> &MultTable {
        self.mult.get_or_init(|| {
            let d = self.degree();
            let mut c = vec![vec![Vec::new(); d]; d];
            for i in 0..d {
                for j in i..d {
                    let prod = self.elems[i].mul(&self.elems[j]);
                    let z = self.express(&prod).expect("orbit-sum products stay integral");
                    c[i][j] = z.clone();
                    c[j][i] = z;
                }
            }
            MultTable { c }
        })
    }

    /// Row `i` holds the coordinates of σ_k(b_i).
    pub fn galois_matrix(&self, k: i64) -> IntMatrix {
        let f = self.group.f;
        let key = if f == 1 { 0 } else { k.rem_euclid(f as i64) as u64 };
        let mut guard = self.galois.lock().expect("galois cache");
        guard
            .entry(key)
            .or_insert_with(|| {
                IntMatrix::from_rows(
                    self.elems
                        .iter()
                        .map(|b| self.express(&b.galois(key as i64)).expect("field is Galois"))
                        .collect(),
                )
            })
            .clone()
    }

    pub fn conj_matrix(&self) -> IntMatrix {
        self.galois_matrix(-1)
    }

    pub fn one(&self) -> Vec<BigInt> {
        self.express(&Cyc::one(self.group.f)).expect("1 lies in every field")
    }

    /// Tr_{L/ℚ}(x) for x in the field.
    pub fn trace(&self, x: &Cyc) -> BigInt {
        let n = x.conductor_bound();
        let mut t = BigInt::zero();
        for (e, c) in x.coeffs() {
            t += c * ramanujan(*e, n);
        }
        let deg_n = euler_phi(n) as i64;
        let deg_l = self.degree() as i64;
        t * BigInt::from(deg_l) / BigInt::from(deg_n)
    }

    /// Gram matrix of the trace form, `Tr(b_k·conj(b_l))`.
    pub fn trace_form(&self) -> &IntMatrix {
        self.tform.get_or_init(|| {
            let d = self.degree();
            let mut m = IntMatrix::zeros(d, d);
            for k in 0..d {
                for l in 0..d {
                    m.set(k, l, self.trace(&self.elems[k].mul(&self.elems[l].conj())));
                }
            }
            m
        })
    }

    /// det(Tr(b_k·b_l)), the field discriminant when the basis is integral.
    pub fn discriminant(&self) -> BigInt {
        let d = self.degree();
        let mut m = IntMatrix::zeros(d, d);
        for k in 0..d {
            for l in 0..d {
                m.set(k, l, self.trace(&self.elems[k].mul(&self.elems[l])));
            }
        }
        m.det().expect("square")
    }

    pub fn catalogue_line(&self) -> String {
        let j = |v: &[u64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        format!(
            "{} {} gens={} reps={}",
            self.group.f,
            self.degree(),
            j(&self.group.gens),
            j(&self.reps)
        )
    }
}

/// Σ over primitive n-th roots ζ of ζ^e.
fn ramanujan(e: u64, n: u64) -> BigInt {
    let g = gcd(e, n);
    let m = n / g;
    BigInt::from(moebius(m)) * BigInt::from(euler_phi(n) / euler_phi(m))
}

fn lenstra_orbits(g: &GaloisSubgroup) -> Result<Vec<Vec<u64>>> {
    let f = g.f;
    if f == 1 {
        return Ok(vec![vec![0]]);
    }
    let ps = primes_of(f);
    let f0: u64 = ps.iter().product();
    let ord = |e: u64| f / gcd(e, f);
    let dfun = |o: u64| ps.iter().filter(|&&p| o % (p * p) == 0).product::<u64>();
    // class minimum -> d
    let mut classes: BTreeMap<u64, u64> = BTreeMap::new();
    for e in 0..f {
        let o = ord(e);
        if o % f0 != 0 {
            continue;
        }
        let d = dfun(o);
        classes.entry(e % (f / d)).or_insert(d);
    }
    let class_of = |e: u64| {
        let d = dfun(ord(e));
        e % (f / d)
    };
    let mut seen: BTreeSet<u64> = BTreeSet::new();
    let mut out: Vec<Vec<u64>> = Vec::new();
    for (&c0, &d) in &classes {
        if seen.contains(&c0) {
            continue;
        }
        let mut stab = Vec::new();
        for &h in g.elements() {
            let c = class_of(h * c0 % f);
            seen.insert(c);
            if c == c0 {
                stab.push(h);
            }
        }
        let step = f / d;
        let members: Vec<u64> = (0..euler_phi(d)).map(|i| c0 + i * step).collect();
        match stab.len() {
            1 => {
                for &eta in &members {
                    out.push(g.orbit(eta));
                }
            }
            2 => {
                let s0 = *stab.iter().find(|&&h| h != 1).expect("nontrivial stabilizer");
                if ord(c0) % 4 == 0 {
                    if members.iter().any(|&eta| s0 * eta % f != (eta + f / 2) % f) {
                        return Err(Error::Domain(format!(
                            "stabilizer {s0} of class {c0} does not act as -1"
                        )));
                    }
                    continue;
                }
                if members.iter().any(|&eta| s0 * eta % f != eta) {
                    return Err(Error::Domain(format!(
                        "stabilizer {s0} of class {c0} moves its elements"
                    )));
                }
                for &eta in &members {
                    out.push(g.orbit(eta));
                }
            }
            n => {
                return Err(Error::Domain(format!(
                    "class {c0} has a stabilizer of order {n} in H"
                )))
            }
        }
    }
    out.sort();
    out.dedup();
    let want = euler_phi(f) as usize / g.order();
    if out.len() != want {
        return Err(Error::Domain(format!(
            "constructed {} orbit sums for a field of degree {want}",
            out.len()
        )));
    }
    Ok(out)
}

/// Builds (or fetches from the registry) the constructed basis for `g`.
pub fn orbit_sum_basis(g: &GaloisSubgroup, policy: ConductorPolicy) -> Result<Arc<OrbitSumBasis>> {
    let g = match policy {
        ConductorPolicy::Reduce => g.reduce(),
        ConductorPolicy::Reject => {
            if !g.is_conductor() {
                return Err(Error::Domain(format!(
                    "{} is not the conductor of the fixed field of {:?}",
                    g.f,
                    g.gens()
                )));
            }
            g.clone()
        }
    };
    registry_get(&g, None)
}

type RegistryKey = (u64, Vec<u64>, Option<Vec<u64>>);

fn registry() -> &'static Mutex<HashMap<RegistryKey, Arc<OrbitSumBasis>>> {
    static REG: OnceLock<Mutex<HashMap<RegistryKey, Arc<OrbitSumBasis>>>> = OnceLock::new();
    REG.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Shared basis for a field, optionally with explicit representatives.
pub fn registry_get(g: &GaloisSubgroup, reps: Option<&[u64]>) -> Result<Arc<OrbitSumBasis>> {
    let key = (g.f, g.elements.clone(), reps.map(|r| r.to_vec()));
    if let Some(b) = registry().lock().expect("registry").get(&key) {
        return Ok(b.clone());
    }
    let b = Arc::new(match reps {
        Some(r) => OrbitSumBasis::with_reps(g, r)?,
        None => OrbitSumBasis::lenstra(g)?,
    });
    Ok(registry().lock().expect("registry").entry(key).or_insert(b).clone())
}

/// All registered bases, one catalogue line each, sorted.
pub fn registry_catalogue() -> String {
    let mut lines: Vec<String> =
        registry().lock().expect("registry").values().map(|b| b.catalogue_line()).collect();
    lines.sort();
    lines.dedup();
    let mut s = lines.join("\n");
    s.push('\n');
    s
}

/// Parses a catalogue line back into a registered basis.
pub fn parse_catalogue_line(line: &str) -> Result<Arc<OrbitSumBasis>> {
    let bad = || Error::Format(format!("bad field catalogue line: {line}"));
    let mut it = line.split_whitespace();
    let f: u64 = it.next().and_then(|x| x.parse().ok()).ok_or_else(bad)?;
    let d: usize = it.next().and_then(|x| x.parse().ok()).ok_or_else(bad)?;
    let mut gens = Vec::new();
    let mut reps = Vec::new();
    for tok in it {
        let (k, v) = tok.split_once('=').ok_or_else(bad)?;
        let vals: Vec<u64> = if v.is_empty() {
            Vec::new()
        } else {
            v.split(',').map(|x| x.parse().map_err(|_| bad())).collect::<Result<_>>()?
        };
        match k {
            "gens" => gens = vals,
            "reps" => reps = vals,
            _ => return Err(bad()),
        }
    }
    let g = GaloisSubgroup::new(f, &gens)?;
    let b = registry_get(&g, Some(&reps))?;
    if b.degree() != d {
        return Err(bad());
    }
    Ok(b)
}

/// An element of a field as coordinates over an orbit-sum basis.
#[derive(Clone, Debug)]
pub struct FieldElement {
    pub basis: Arc<OrbitSumBasis>,
    pub coeffs: Vec<BigInt>,
}

impl PartialEq for FieldElement {
    fn eq(&self, o: &Self) -> bool {
        *self.basis == *o.basis && self.coeffs == o.coeffs
    }
}

impl FieldElement {
    pub fn new(basis: Arc<OrbitSumBasis>, coeffs: Vec<BigInt>) -> Result<Self> {
        if coeffs.len() != basis.degree() {
            return Err(Error::Domain(format!(
                "{} coefficients for a basis of size {}",
                coeffs.len(),
                basis.degree()
            )));
        }
        Ok(FieldElement { basis, coeffs })
    }

    pub fn one(basis: Arc<OrbitSumBasis>) -> Self {
        let c = basis.one();
        FieldElement { basis, coeffs: c }
    }

    fn same(&self, o: &Self) -> Result<()> {
        if *self.basis != *o.basis {
            return Err(Error::Domain("field elements over different bases".into()));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.same(o)?;
        let c = self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect();
        Ok(FieldElement { basis: self.basis.clone(), coeffs: c })
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.same(o)?;
        let c = self.basis.mult_table().product(&self.coeffs, &o.coeffs);
        Ok(FieldElement { basis: self.basis.clone(), coeffs: c })
    }

    pub fn conj(&self) -> Self {
        let c = self.basis.conj_matrix().vec_mul(&self.coeffs);
        FieldElement { basis: self.basis.clone(), coeffs: c }
    }

    pub fn to_cyc(&self) -> Cyc {
        self.basis.evaluate(&self.coeffs)
    }
}

/// Free function form of [`FieldElement::mul`].
pub fn elem_mul(x: &FieldElement, y: &FieldElement) -> Result<FieldElement> {
    x.mul(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{int, ints};

    #[test]
    fn small_fields() {
        let b = OrbitSumBasis::lenstra(&GaloisSubgroup::trivial(1).unwrap()).unwrap();
        assert_eq!(b.degree(), 1);
        assert_eq!(b.mult_table().c, vec![vec![ints(&[1])]]);

        let g = GaloisSubgroup::new(5, &[4]).unwrap();
        let b = OrbitSumBasis::lenstra(&g).unwrap();
        assert_eq!(b.reps(), &[1, 2]);
        assert_eq!(b.discriminant(), int(5));

        let full = OrbitSumBasis::lenstra(&GaloisSubgroup::trivial(5).unwrap()).unwrap();
        assert_eq!(full.reps(), &[1, 2, 3, 4]);
        assert_eq!(full.discriminant(), int(125));
    }

    #[test]
    fn conductor_eight() {
        let g = GaloisSubgroup::new(8, &[3]).unwrap();
        assert!(g.is_conductor());
        let b = OrbitSumBasis::lenstra(&g).unwrap();
        assert_eq!(b.reps(), &[1, 4]);
        assert_eq!(b.discriminant(), int(-8));
        let g = GaloisSubgroup::new(8, &[5]).unwrap();
        assert!(!g.is_conductor());
        assert_eq!(g.reduce().conductor(), 4);
        assert!(!GaloisSubgroup::trivial(6).unwrap().is_conductor());
    }

    #[test]
    fn sqrt5_with_one() {
        let g = GaloisSubgroup::new(5, &[4]).unwrap();
        let b = OrbitSumBasis::with_reps(&g, &[0, 1]).unwrap();
        let t = b.mult_table();
        assert_eq!(t.c[1][1], ints(&[1, -1]));
        assert_eq!(t.c[0][1], ints(&[0, 1]));
        assert!(OrbitSumBasis::with_reps(&g, &[0, 0]).is_err());
        let b = Arc::new(b);
        let x = FieldElement::new(b.clone(), ints(&[0, 1])).unwrap();
        assert_eq!(x.mul(&x).unwrap().coeffs, ints(&[1, -1]));
        assert_eq!(x.conj(), x);
        assert_eq!(b.galois_matrix(2), IntMatrix::from_i64(&[&[1, 0], &[-1, -1]]));
    }

    #[test]
    fn catalogue_round_trip() {
        let g = GaloisSubgroup::new(7, &[2]).unwrap();
        let b = registry_get(&g, None).unwrap();
        let line = b.catalogue_line();
        let again = parse_catalogue_line(&line).unwrap();
        assert_eq!(again.reps(), b.reps());
        assert_eq!(again.degree(), 2);
    }
}
