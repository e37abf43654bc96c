//! Field oracles that share no code with the library's cyclotomic arithmetic.

use std::collections::BTreeSet;

use moc_core::intlin::IntMatrix;
use moc_core::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub fn units(f: u64) -> Vec<u64> {
    (0..f).filter(|&a| gcd(a, f) == 1 || f == 1).collect()
}

pub fn closure(f: u64, gens: &[u64]) -> Vec<u64> {
    let mut s: BTreeSet<u64> = BTreeSet::from([1 % f]);
    let mut todo = vec![1 % f];
    while let Some(x) = todo.pop() {
        for &g in gens {
            let y = x * g % f;
            if s.insert(y) {
                todo.push(y);
            }
        }
    }
    s.into_iter().collect()
}

/// Every subgroup of (ℤ/f)*, each as a sorted element list.
pub fn subgroups(f: u64) -> Vec<Vec<u64>> {
    let u = units(f);
    let mut found: BTreeSet<Vec<u64>> = BTreeSet::new();
    let mut todo = vec![closure(f, &[])];
    while let Some(h) = todo.pop() {
        if !found.insert(h.clone()) {
            continue;
        }
        for &a in &u {
            if h.binary_search(&a).is_err() {
                let mut g = h.clone();
                g.push(a);
                todo.push(closure(f, &g));
            }
        }
    }
    found.into_iter().collect()
}

/// Conductor test by brute force: f is minimal iff for no proper divisor m
/// the kernel of reduction mod m lies in H.
pub fn is_conductor(f: u64, h: &[u64]) -> bool {
    if f == 1 {
        return true;
    }
    (1..f).filter(|m| f % m == 0).all(|m| {
        !units(f).into_iter().filter(|a| a % m == 1 % m).all(|a| h.contains(&a))
    })
}

fn poly_mul(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Exact division of integer polynomials by a monic divisor.
fn poly_div(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let mut q = vec![0; a.len() - db];
    for i in (0..q.len()).rev() {
        let c = r[i + db];
        q[i] = c;
        for j in 0..=db {
            r[i + j] -= c * b[j];
        }
    }
    assert!(r.iter().all(|&x| x == 0));
    q
}

/// Coefficients of the n-th cyclotomic polynomial, lowest degree first.
pub fn cyclotomic_poly(n: u64) -> Vec<i64> {
    let mut num = vec![0i64; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    let mut den = vec![1i64];
    for d in 1..n {
        if n % d == 0 {
            den = poly_mul(&den, &cyclotomic_poly(d));
        }
    }
    poly_div(&num, &den)
}

/// Power-basis coordinates of x^e modulo Φ_f, for every e < f.
pub fn power_coords(f: u64) -> Vec<Vec<BigInt>> {
    let phi = cyclotomic_poly(f);
    let deg = phi.len() - 1;
    let mut cur = vec![0i64; deg];
    if deg > 0 {
        cur[0] = 1;
    }
    let mut out = Vec::new();
    for _ in 0..f {
        out.push(cur.iter().map(|&x| BigInt::from(x)).collect());
        let top = if deg > 0 { cur[deg - 1] } else { 0 };
        let mut next = vec![0i64; deg];
        for i in (1..deg).rev() {
            next[i] = cur[i - 1];
        }
        for i in 0..deg {
            next[i] -= top * phi[i];
        }
        cur = next;
    }
    out
}

/// A ℤ-basis of the fixed ring ℤ[ζ_f]^H in power-basis coordinates.
pub fn fixed_lattice(f: u64, h: &[u64]) -> IntMatrix {
    let pc = power_coords(f);
    let deg = pc[0].len();
    let mut blocks: Vec<Vec<BigInt>> = vec![Vec::new(); deg];
    for &g in h {
        for i in 0..deg {
            let img = &pc[(i as u64 * g % f) as usize];
            for j in 0..deg {
                let mut v = img[j].clone();
                if i == j {
                    v -= BigInt::one();
                }
                blocks[i].push(v);
            }
        }
    }
    let m = IntMatrix::from_rows_with_cols(blocks, deg * h.len());
    m.left_kernel()
}

/// Power-basis coordinates of the orbit sum of ζ^e under H.
pub fn orbit_sum_coords(f: u64, h: &[u64], e: u64) -> Vec<BigInt> {
    let pc = power_coords(f);
    let orbit: BTreeSet<u64> = h.iter().map(|g| g * e % f).collect();
    let mut v = vec![BigInt::zero(); pc[0].len()];
    for o in orbit {
        for (x, y) in v.iter_mut().zip(&pc[o as usize]) {
            *x += y;
        }
    }
    v
}

fn moebius(n: u64) -> i64 {
    let mut m = n;
    let mut k = 0;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            m /= p;
            if m % p == 0 {
                return 0;
            }
            k += 1;
        }
        p += 1;
    }
    if m > 1 {
        k += 1;
    }
    if k % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Field discriminant by the conductor-discriminant formula over the
/// characters of (ℤ/f)*/H.
pub fn conductor_discriminant(f: u64, h: &[u64]) -> BigInt {
    let u = units(f);
    let n_units = u.len() as u64;
    // number of characters trivial on H·K(m), K(m) = kernel of reduction mod m
    let count = |m: u64| {
        let mut gens: Vec<u64> = h.to_vec();
        gens.extend(u.iter().copied().filter(|a| a % m == 1 % m));
        n_units / closure(f, &gens).len() as u64
    };
    let divisors: Vec<u64> = (1..=f).filter(|d| f % d == 0).collect();
    let mut disc = BigInt::one();
    let mut degree = 0;
    for &m in &divisors {
        let exact: i64 = divisors
            .iter()
            .filter(|&&d| m % d == 0)
            .map(|&d| moebius(m / d) * count(d) as i64)
            .sum();
        degree += exact;
        disc *= BigInt::from(m).pow(exact as u32);
    }
    let real = h.contains(&((f - 1) % f.max(1))) || f <= 2;
    if !real && (degree / 2) % 2 == 1 {
        disc = -disc;
    }
    disc
}
