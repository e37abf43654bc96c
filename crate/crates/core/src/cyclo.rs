//! Exact arithmetic in ℤ[ζ_n].
//!
//! Elements are integer combinations of a fixed ℤ-basis of ℤ[ζ_n] made of
//! roots of unity. For a prime power `p^k` the basis of ℤ[ζ_{p^k}] consists of
//! the exponents `a + p^(k-1)·b` with `0 <= a < p^(k-1)` and `1 <= b < p`; an
//! exponent with `b = 0` is rewritten as minus the sum over the other `b`.
//! The basis of ℤ[ζ_n] is the tensor product over the prime powers of `n`,
//! matched to exponents mod `n` by the Chinese remainder theorem.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::exactnum::BigInt;

#[derive(Debug)]
struct Ctx {
    n: u64,
    /// (p, p^k, (n/p^k)·((n/p^k)^-1 mod p^k) mod n)
    parts: Vec<(u64, u64, u64)>,
}

fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            let mut k = 0;
            while n % d == 0 {
                n /= d;
                k += 1;
            }
            out.push((d, k));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn mod_inverse(a: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let eg = (a as i128).extended_gcd(&(m as i128));
    debug_assert_eq!(eg.gcd, 1);
    eg.x.rem_euclid(m as i128) as u64
}

fn ctx(n: u64) -> Arc<Ctx> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Ctx>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("cyclotomic context cache");
    guard
        .entry(n)
        .or_insert_with(|| {
            let parts = factor(n)
                .into_iter()
                .map(|(p, k)| {
                    let q = p.pow(k);
                    let co = n / q;
                    let idem = (co as u128 * mod_inverse(co % q, q) as u128 % n as u128) as u64;
                    (p, q, idem)
                })
                .collect();
            Arc::new(Ctx { n, parts })
        })
        .clone()
}

impl Ctx {
    /// Expansion of ζ_n^e in the canonical basis as (exponent, sign) pairs.
    fn expand(&self, e: u64) -> Vec<(u64, i8)> {
        let e = e % self.n;
        let mut acc: Vec<(u64, i8)> = vec![(0, 1)];
        for &(p, q, idem) in &self.parts {
            let c = e % q;
            let step = q / p;
            let a = c % step;
            let b = c / step;
            let comps: Vec<(u64, i8)> = if b != 0 {
                vec![(c, 1)]
            } else {
                (1..p).map(|bb| (a + step * bb, -1)).collect()
            };
            let mut next = Vec::with_capacity(acc.len() * comps.len());
            for &(x, s) in &acc {
                for &(c2, s2) in &comps {
                    let add = (c2 as u128 * idem as u128 % self.n as u128) as u64;
                    next.push(((x + add) % self.n, s * s2));
                }
            }
            acc = next;
        }
        acc
    }

    fn is_basis(&self, e: u64) -> bool {
        self.parts.iter().all(|&(p, q, _)| {
            let c = e % q;
            c / (q / p) != 0
        })
    }
}

/// An element of ℤ[ζ_n] in canonical coordinates.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Cyc {
    n: u64,
    coeffs: BTreeMap<u64, BigInt>,
}

impl fmt::Debug for Cyc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Cyc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(r) = self.as_integer() {
            return write!(f, "{r}");
        }
        let terms: Vec<String> =
            self.coeffs.iter().map(|(e, c)| format!("{c}*z{}^{e}", self.n)).collect();
        write!(f, "{}", terms.join(" + "))
    }
}

impl Cyc {
    pub fn zero(n: u64) -> Cyc {
        assert!(n >= 1);
        Cyc { n, coeffs: BTreeMap::new() }
    }

    /// ζ_n^e.
    pub fn root(n: u64, e: u64) -> Cyc {
        let mut c = Cyc::zero(n);
        c.add_root(e, &BigInt::one());
        c
    }

    pub fn from_int(n: u64, v: &BigInt) -> Cyc {
        let mut c = Cyc::root(n, 0);
        c.scale_mut(v);
        c
    }

    pub fn one(n: u64) -> Cyc {
        Cyc::root(n, 0)
    }

    pub fn conductor_bound(&self) -> u64 {
        self.n
    }

    pub fn coeffs(&self) -> &BTreeMap<u64, BigInt> {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Adds `c·ζ_n^e`.
    pub fn add_root(&mut self, e: u64, c: &BigInt) {
        if c.is_zero() {
            return;
        }
        let cx = ctx(self.n);
        if cx.is_basis(e % self.n) {
            self.add_basis(e % self.n, c.clone());
            return;
        }
        for (x, s) in cx.expand(e) {
            let v = if s > 0 { c.clone() } else { -c };
            self.add_basis(x, v);
        }
    }

    fn add_basis(&mut self, e: u64, c: BigInt) {
        use std::collections::btree_map::Entry;
        match self.coeffs.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Embeds into ℤ[ζ_m] for a multiple `m` of `n`.
    pub fn embed(&self, m: u64) -> Cyc {
        assert!(m % self.n == 0, "cannot embed ζ_{} into ζ_{m}", self.n);
        if m == self.n {
            return self.clone();
        }
        let k = m / self.n;
        let mut out = Cyc::zero(m);
        for (e, c) in &self.coeffs {
            out.add_root(e * k, c);
        }
        out
    }

    fn common(&self, other: &Cyc) -> (Cyc, Cyc) {
        if self.n == other.n {
            return (self.clone(), other.clone());
        }
        let m = self.n.lcm(&other.n);
        (self.embed(m), other.embed(m))
    }

    pub fn add(&self, other: &Cyc) -> Cyc {
        if self.n != other.n {
            let (a, b) = self.common(other);
            return a.add(&b);
        }
        let mut out = self.clone();
        for (e, c) in &other.coeffs {
            out.add_basis(*e, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Cyc {
        Cyc { n: self.n, coeffs: self.coeffs.iter().map(|(e, c)| (*e, -c)).collect() }
    }

    pub fn sub(&self, other: &Cyc) -> Cyc {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &BigInt) -> Cyc {
        let mut out = self.clone();
        out.scale_mut(k);
        out
    }

    fn scale_mut(&mut self, k: &BigInt) {
        if k.is_zero() {
            self.coeffs.clear();
            return;
        }
        for c in self.coeffs.values_mut() {
            *c *= k;
        }
    }

    pub fn mul(&self, other: &Cyc) -> Cyc {
        if self.n != other.n {
            let (a, b) = self.common(other);
            return a.mul(&b);
        }
        let n = self.n;
        let mut raw: BTreeMap<u64, BigInt> = BTreeMap::new();
        for (e1, c1) in &self.coeffs {
            for (e2, c2) in &other.coeffs {
                *raw.entry((e1 + e2) % n).or_insert_with(BigInt::zero) += c1 * c2;
            }
        }
        let mut out = Cyc::zero(n);
        for (e, c) in raw {
            out.add_root(e, &c);
        }
        out
    }

    /// Image under the Galois automorphism ζ ↦ ζ^k, `k` coprime to `n`.
    pub fn galois(&self, k: i64) -> Cyc {
        let n = self.n as i64;
        let k = k.rem_euclid(n.max(1)) as u64;
        assert!(self.n == 1 || k.gcd(&self.n) == 1, "Galois exponent not a unit");
        let mut out = Cyc::zero(self.n);
        for (e, c) in &self.coeffs {
            out.add_root(e * k % self.n, c);
        }
        out
    }

    pub fn conj(&self) -> Cyc {
        self.galois(-1)
    }

    /// Exact division by an integer; `None` unless every coordinate is
    /// divisible.
    pub fn div_int(&self, d: &BigInt) -> Option<Cyc> {
        let mut out = Cyc::zero(self.n);
        for (e, c) in &self.coeffs {
            let (q, r) = c.div_rem(d);
            if !r.is_zero() {
                return None;
            }
            out.coeffs.insert(*e, q);
        }
        Some(out)
    }

    /// The integer value when the element is rational.
    pub fn as_integer(&self) -> Option<BigInt> {
        if self.coeffs.is_empty() {
            return Some(BigInt::zero());
        }
        let one = Cyc::one(self.n);
        let (e0, c0) = one.coeffs.iter().next().expect("1 is nonzero");
        let x = self.coeffs.get(e0)?;
        let (v, r) = x.div_rem(c0);
        if !r.is_zero() {
            return None;
        }
        if one.scale(&v) == *self {
            Some(v)
        } else {
            None
        }
    }

    /// Coordinates in ℤ[ζ_m] for `m` a multiple of `n`, as a dense vector
    /// indexed by exponent.
    pub fn dense(&self, m: u64) -> Vec<BigInt> {
        let e = self.embed(m);
        let mut v = vec![BigInt::zero(); m as usize];
        for (k, c) in e.coeffs {
            v[k as usize] = c;
        }
        v
    }

    /// Sum of the canonical coordinates' absolute values, a size measure.
    pub fn weight(&self) -> BigInt {
        self.coeffs.values().map(|c| c.abs()).sum()
    }
}

/// Sum of ζ_n^e over `exps`.
pub fn root_sum(n: u64, exps: &[u64]) -> Cyc {
    let mut c = Cyc::zero(n);
    let one = BigInt::one();
    for &e in exps {
        c.add_root(e, &one);
    }
    c
}
