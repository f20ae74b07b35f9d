//! Binary fields F_{2^d} in a polynomial basis, and dense polynomials over them.
//!
//! Elements are `u64` bit-vectors (bit i is the coefficient of t^i), so every
//! routine here is limited to d ≤ 63.

use crate::error::{Error, Result};

/// Carry-less product of two polynomials over F_2.
#[inline]
pub fn clmul(a: u64, b: u64) -> u128 {
    let mut acc = 0u128;
    let mut a = a as u128;
    let mut b = b;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        a <<= 1;
        b >>= 1;
    }
    acc
}

fn deg_u128(a: u128) -> i32 {
    127 - a.leading_zeros() as i32
}

/// Remainder of `a` modulo the F_2-polynomial `m` (m ≠ 0).
pub fn f2_rem(mut a: u128, m: u64) -> u64 {
    let dm = 63 - m.leading_zeros() as i32;
    let m = m as u128;
    loop {
        let da = deg_u128(a);
        if da < dm {
            return a as u64;
        }
        a ^= m << (da - dm);
    }
}

fn f2_gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = f2_rem(a as u128, b);
        a = b;
        b = r;
    }
    a
}

/// Rabin's irreducibility test for a bit-vector polynomial of degree 1..=63.
pub fn is_irreducible_f2(m: u64) -> bool {
    if m < 2 {
        return false;
    }
    let d = 63 - m.leading_zeros();
    if d == 0 {
        return false;
    }
    if d == 1 {
        return true;
    }
    // x^(2^k) mod m
    let xpow = |k: u32| -> u64 {
        let mut x = f2_rem(2, m);
        for _ in 0..k {
            x = f2_rem(clmul(x, x), m);
        }
        x
    };
    if xpow(d) != f2_rem(2, m) {
        return false;
    }
    let mut n = d;
    let mut p = 2;
    let mut primes = Vec::new();
    while p * p <= n {
        if n.is_multiple_of(p) {
            primes.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        primes.push(n);
    }
    primes
        .into_iter()
        .all(|q| f2_gcd(m, xpow(d / q) ^ f2_rem(2, m)) == 1)
}

/// Solve the F_2-linear system Σ x_i·cols[i] = rhs. Returns one solution.
pub fn f2_solve(cols: &[u64], rhs: u64) -> Option<u64> {
    // Gaussian elimination keeping track of which original columns combine.
    let mut rows: Vec<(u64, u64)> = Vec::new(); // (vector, combination)
    for (i, &c) in cols.iter().enumerate() {
        let mut v = c;
        let mut comb = 1u64 << i;
        for &(rv, rc) in &rows {
            let top = 63 - rv.leading_zeros();
            if v >> top & 1 == 1 {
                v ^= rv;
                comb ^= rc;
            }
        }
        if v != 0 {
            rows.push((v, comb));
            rows.sort_by_key(|r| std::cmp::Reverse(r.0));
        }
    }
    let mut v = rhs;
    let mut comb = 0u64;
    for &(rv, rc) in &rows {
        let top = 63 - rv.leading_zeros();
        if v >> top & 1 == 1 {
            v ^= rv;
            comb ^= rc;
        }
    }
    (v == 0).then_some(comb)
}

/// The field F_{2^d} = F_2[t]/(modulus).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Gf2m {
    d: u32,
    modulus: u64,
    tr_mask: u64,
}

impl Gf2m {
    /// F_{2^d} with the numerically smallest irreducible modulus
    /// (t^2+t+1, t^3+t+1, t^5+t^2+1, ...).
    pub fn new(d: u32) -> Result<Self> {
        if d == 0 || d > 63 {
            return Err(Error::Invalid(format!("field degree {d} outside 1..=63")));
        }
        let lo = 1u64 << d;
        let mut m = lo | 1;
        while !is_irreducible_f2(m) {
            m += 2;
            if 63 - m.leading_zeros() != d {
                return Err(Error::Invalid(format!("no irreducible of degree {d}")));
            }
        }
        Ok(Gf2m::build(d, m))
    }

    fn build(d: u32, modulus: u64) -> Self {
        let mut f = Gf2m {
            d,
            modulus,
            tr_mask: 0,
        };
        // the trace is F_2-linear: record Tr(t^i) for every basis element
        f.tr_mask = (0..d)
            .filter(|&i| f.trace_slow(1 << i) == 1)
            .fold(0, |m, i| m | 1 << i);
        f
    }

    pub fn with_modulus(modulus: u64) -> Result<Self> {
        if !is_irreducible_f2(modulus) {
            return Err(Error::NotIrreducible(format!("{modulus:#x}")));
        }
        Ok(Gf2m::build(63 - modulus.leading_zeros(), modulus))
    }

    pub fn degree(&self) -> u32 {
        self.d
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Number of elements, 2^d.
    pub fn order(&self) -> u64 {
        1u64 << self.d
    }

    /// The class of t. For d = 1 this is 1 since the modulus is t + 1.
    pub fn generator(&self) -> u64 {
        f2_rem(2, self.modulus)
    }

    pub fn elements(&self) -> impl Iterator<Item = u64> {
        0..self.order()
    }

    pub fn contains(&self, a: u64) -> bool {
        a >> self.d == 0
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        f2_rem(clmul(a, b), self.modulus)
    }

    #[inline]
    pub fn sqr(&self, a: u64) -> u64 {
        self.mul(a, a)
    }

    pub fn pow(&self, a: u64, mut e: u128) -> u64 {
        let mut base = a;
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.sqr(base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u64) -> Result<u64> {
        if a == 0 {
            return Err(Error::DivisionByZero);
        }
        // extended Euclid on F_2[t]: invariant r0 ≡ s0·a, r1 ≡ s1·a (mod modulus)
        let (mut r0, mut r1) = (self.modulus as u128, a as u128);
        let (mut s0, mut s1) = (0u128, 1u128);
        while r1 != 1 {
            let shift = deg_u128(r0) - deg_u128(r1);
            if shift < 0 {
                std::mem::swap(&mut r0, &mut r1);
                std::mem::swap(&mut s0, &mut s1);
                continue;
            }
            r0 ^= r1 << shift;
            s0 ^= s1 << shift;
            if deg_u128(r0) < deg_u128(r1) {
                std::mem::swap(&mut r0, &mut r1);
                std::mem::swap(&mut s0, &mut s1);
            }
        }
        Ok(f2_rem(s1, self.modulus))
    }

    pub fn div(&self, a: u64, b: u64) -> Result<u64> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// a^(2^k), k taken modulo d.
    pub fn frob(&self, a: u64, k: u32) -> u64 {
        let mut x = a;
        for _ in 0..(k % self.d) {
            x = self.sqr(x);
        }
        x
    }

    /// The unique square root, a^(2^(d-1)).
    pub fn sqrt(&self, a: u64) -> u64 {
        self.frob(a, self.d - 1)
    }

    /// Absolute trace to F_2.
    #[inline]
    pub fn trace(&self, a: u64) -> u64 {
        ((a & self.tr_mask).count_ones() & 1) as u64
    }

    fn trace_slow(&self, a: u64) -> u64 {
        let mut acc = 0;
        let mut x = a;
        for _ in 0..self.d {
            acc ^= x;
            x = self.sqr(x);
        }
        acc
    }

    /// A solution z of z^2 + z = c, if one exists (the other is z + 1).
    pub fn artin_schreier(&self, c: u64) -> Option<u64> {
        if self.trace(c) != 0 {
            return None;
        }
        let cols: Vec<u64> = (0..self.d)
            .map(|i| {
                let e = 1u64 << i;
                self.sqr(e) ^ e
            })
            .collect();
        f2_solve(&cols, c)
    }

    /// Roots in this field of a z^2 + b z + c.
    pub fn quadratic_roots(&self, a: u64, b: u64, c: u64) -> Vec<u64> {
        if a == 0 {
            return if b == 0 {
                Vec::new()
            } else {
                vec![self.mul(c, self.inv(b).unwrap())]
            };
        }
        let ia = self.inv(a).unwrap();
        let (b, c) = (self.mul(b, ia), self.mul(c, ia));
        if b == 0 {
            return vec![self.sqrt(c)];
        }
        // z = b w with w^2 + w = c / b^2
        let ib = self.inv(b).unwrap();
        match self.artin_schreier(self.mul(c, self.sqr(ib))) {
            None => Vec::new(),
            Some(w) => {
                let mut r = vec![self.mul(b, w), self.mul(b, w ^ 1)];
                r.sort_unstable();
                r
            }
        }
    }

    /// Multiplicative order of a nonzero element.
    pub fn order_of(&self, a: u64) -> u128 {
        let n = (1u128 << self.d) - 1;
        let mut ord = n;
        let mut m = n;
        let mut p = 2u128;
        while p * p <= m {
            if m.is_multiple_of(p) {
                while m.is_multiple_of(p) {
                    m /= p;
                }
                while ord.is_multiple_of(p) && self.pow(a, ord / p) == 1 {
                    ord /= p;
                }
            }
            p += 1;
        }
        if m > 1 && self.pow(a, ord / m) == 1 {
            ord /= m;
        }
        ord
    }

    pub fn hex(&self, a: u64) -> String {
        format!("{a:x}")
    }
}

/// Dense polynomial over F_{2^d}, coefficients low to high.
pub type GfPoly = Vec<u64>;

pub fn poly_trim(p: &mut GfPoly) {
    while p.last() == Some(&0) {
        p.pop();
    }
}

pub fn poly_deg(p: &[u64]) -> isize {
    p.iter().rposition(|&c| c != 0).map_or(-1, |i| i as isize)
}

pub fn poly_add(a: &[u64], b: &[u64]) -> GfPoly {
    let mut r = vec![0; a.len().max(b.len())];
    for (i, &c) in a.iter().enumerate() {
        r[i] ^= c;
    }
    for (i, &c) in b.iter().enumerate() {
        r[i] ^= c;
    }
    poly_trim(&mut r);
    r
}

pub fn poly_mul(f: &Gf2m, a: &[u64], b: &[u64]) -> GfPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut r = vec![0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            r[i + j] ^= f.mul(x, y);
        }
    }
    poly_trim(&mut r);
    r
}

pub fn poly_scale(f: &Gf2m, a: &[u64], c: u64) -> GfPoly {
    let mut r: GfPoly = a.iter().map(|&x| f.mul(x, c)).collect();
    poly_trim(&mut r);
    r
}

/// Quotient and remainder; `b` must be nonzero.
pub fn poly_divrem(f: &Gf2m, a: &[u64], b: &[u64]) -> (GfPoly, GfPoly) {
    let db = poly_deg(b);
    assert!(db >= 0, "polynomial division by zero");
    let db = db as usize;
    let ilc = f.inv(b[db]).unwrap();
    let mut r: GfPoly = a.to_vec();
    poly_trim(&mut r);
    if r.len() <= db {
        return (Vec::new(), r);
    }
    let mut q = vec![0; r.len() - db];
    while r.len() > db {
        let k = r.len() - 1 - db;
        let c = f.mul(*r.last().unwrap(), ilc);
        q[k] = c;
        for i in 0..=db {
            r[k + i] ^= f.mul(c, b[i]);
        }
        poly_trim(&mut r);
    }
    poly_trim(&mut q);
    (q, r)
}

pub fn poly_rem(f: &Gf2m, a: &[u64], b: &[u64]) -> GfPoly {
    poly_divrem(f, a, b).1
}

pub fn poly_monic(f: &Gf2m, a: &[u64]) -> GfPoly {
    match poly_deg(a) {
        -1 => Vec::new(),
        d => poly_scale(f, a, f.inv(a[d as usize]).unwrap()),
    }
}

pub fn poly_gcd(f: &Gf2m, a: &[u64], b: &[u64]) -> GfPoly {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    poly_trim(&mut a);
    poly_trim(&mut b);
    while !b.is_empty() {
        let r = poly_rem(f, &a, &b);
        a = b;
        b = r;
    }
    poly_monic(f, &a)
}

/// (g, s, t) with g = s a + t b monic.
pub fn poly_xgcd(f: &Gf2m, a: &[u64], b: &[u64]) -> (GfPoly, GfPoly, GfPoly) {
    let (mut r0, mut r1) = (a.to_vec(), b.to_vec());
    poly_trim(&mut r0);
    poly_trim(&mut r1);
    let (mut s0, mut s1): (GfPoly, GfPoly) = (vec![1], Vec::new());
    let (mut t0, mut t1): (GfPoly, GfPoly) = (Vec::new(), vec![1]);
    while !r1.is_empty() {
        let (q, r) = poly_divrem(f, &r0, &r1);
        let s2 = poly_add(&s0, &poly_mul(f, &q, &s1));
        let t2 = poly_add(&t0, &poly_mul(f, &q, &t1));
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    match poly_deg(&r0) {
        -1 => (r0, s0, t0),
        d => {
            let il = f.inv(r0[d as usize]).unwrap();
            (
                poly_scale(f, &r0, il),
                poly_scale(f, &s0, il),
                poly_scale(f, &t0, il),
            )
        }
    }
}

pub fn poly_eval(f: &Gf2m, p: &[u64], x: u64) -> u64 {
    p.iter().rev().fold(0, |acc, &c| f.mul(acc, x) ^ c)
}

pub fn poly_derivative(p: &[u64]) -> GfPoly {
    let mut r: GfPoly = p
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| if i % 2 == 1 { c } else { 0 })
        .collect();
    poly_trim(&mut r);
    r
}

pub fn poly_mulmod(f: &Gf2m, a: &[u64], b: &[u64], m: &[u64]) -> GfPoly {
    poly_rem(f, &poly_mul(f, a, b), m)
}

/// X^(2^k) mod m.
pub fn poly_x_pow2k(f: &Gf2m, k: u32, m: &[u64]) -> GfPoly {
    let mut x = poly_rem(f, &[0, 1], m);
    for _ in 0..k {
        x = poly_mulmod(f, &x, &x, m);
    }
    x
}

fn split_linear(f: &Gf2m, g: &[u64], out: &mut Vec<u64>) {
    let dg = poly_deg(g);
    if dg <= 0 {
        return;
    }
    if dg == 1 {
        let g = poly_monic(f, g);
        out.push(g[0]);
        return;
    }
    // Trace maps Tr(beta X) for beta running over t^j separate distinct roots.
    for j in 0..f.degree() {
        let beta = f.pow(f.generator(), j as u128).max(1);
        let bx = poly_rem(f, &[0, beta], g);
        let mut acc: GfPoly = Vec::new();
        let mut y = bx;
        for _ in 0..f.degree() {
            acc = poly_add(&acc, &y);
            y = poly_mulmod(f, &y, &y, g);
        }
        let h = poly_gcd(f, g, &acc);
        let dh = poly_deg(&h);
        if dh > 0 && dh < dg {
            let (q, _) = poly_divrem(f, g, &h);
            split_linear(f, &h, out);
            split_linear(f, &q, out);
            return;
        }
    }
    unreachable!("trace splitting failed on a squarefree split polynomial");
}

/// Distinct roots in F_{2^d} of a nonzero polynomial, sorted.
pub fn poly_roots(f: &Gf2m, p: &[u64]) -> Vec<u64> {
    if poly_deg(p) <= 0 {
        return Vec::new();
    }
    let xq = poly_x_pow2k(f, f.degree(), p);
    let g = poly_gcd(f, p, &poly_add(&xq, &[0, 1]));
    let mut out = Vec::new();
    split_linear(f, &g, &mut out);
    out.sort_unstable();
    out
}

/// Degrees of the irreducible factors of a squarefree polynomial (distinct-degree factorisation).
pub fn poly_factor_degrees(f: &Gf2m, p: &[u64]) -> Vec<usize> {
    let mut rest = poly_monic(f, p);
    let mut out = Vec::new();
    let mut k = 0u32;
    let mut xk = poly_rem(f, &[0, 1], &rest);
    while poly_deg(&rest) > 0 {
        k += 1;
        for _ in 0..f.degree() {
            xk = poly_mulmod(f, &xk, &xk, &rest);
        }
        let g = poly_gcd(f, &rest, &poly_add(&xk, &[0, 1]));
        let dg = poly_deg(&g);
        if dg > 0 {
            for _ in 0..(dg as usize / k as usize) {
                out.push(k as usize);
            }
            rest = poly_divrem(f, &rest, &g).0;
            xk = poly_rem(f, &xk, &rest);
        }
        if 2 * k as isize > poly_deg(&rest) && poly_deg(&rest) > 0 {
            out.push(poly_deg(&rest) as usize);
            break;
        }
    }
    out.sort_unstable();
    out
}

/// Embedding of a subfield F_{2^d} into F_{2^{de}}, sending t to a fixed root of
/// the small modulus (the smallest one as a bit-vector).
#[derive(Clone, Debug)]
pub struct Embedding {
    pub small: Gf2m,
    pub big: Gf2m,
    images: Vec<u64>,
}

impl Embedding {
    pub fn new(small: &Gf2m, big: &Gf2m) -> Result<Self> {
        if !big.degree().is_multiple_of(small.degree()) {
            return Err(Error::Invalid(format!(
                "F_2^{} is not a subfield of F_2^{}",
                small.degree(),
                big.degree()
            )));
        }
        let m: GfPoly = (0..=small.degree())
            .map(|i| small.modulus() >> i & 1)
            .collect();
        let r = *poly_roots(big, &m)
            .first()
            .ok_or_else(|| Error::Invalid("subfield modulus has no root".into()))?;
        let mut images = Vec::with_capacity(small.degree() as usize);
        let mut x = 1u64;
        for _ in 0..small.degree() {
            images.push(x);
            x = big.mul(x, r);
        }
        Ok(Embedding {
            small: small.clone(),
            big: big.clone(),
            images,
        })
    }

    pub fn map(&self, a: u64) -> u64 {
        self.images
            .iter()
            .enumerate()
            .filter(|(i, _)| a >> i & 1 == 1)
            .fold(0, |acc, (_, &v)| acc ^ v)
    }

    /// Inverse image of an element of the subfield, or None.
    pub fn preimage(&self, b: u64) -> Option<u64> {
        f2_solve(&self.images, b)
    }
}
