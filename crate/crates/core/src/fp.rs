//! Arithmetic in F_p and F_p[X] for word-size primes p < 2^63.
//! Polynomials are coefficient vectors, low to high, without trailing zeros.

use num_bigint::BigInt;
use num_integer::Integer;

pub type FpPoly = Vec<u64>;

#[inline]
pub fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    (a as u128 * b as u128 % p as u128) as u64
}

#[inline]
pub fn addmod(a: u64, b: u64, p: u64) -> u64 {
    let s = a as u128 + b as u128;
    (s % p as u128) as u64
}

#[inline]
pub fn submod(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        p - (b - a)
    }
}

pub fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    r
}

/// Inverse modulo p, None for 0.
pub fn invmod(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return None;
    }
    let (mut r0, mut r1) = (p as i128, a as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    (r0 == 1).then(|| t0.rem_euclid(p as i128) as u64)
}

/// Deterministic Miller–Rabin, exact for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for sp in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(sp) {
            return n == sp;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Primes below 2^62 in decreasing order.
pub fn large_primes() -> impl Iterator<Item = u64> {
    ((1u64 << 61)..(1u64 << 62))
        .rev()
        .step_by(2)
        .filter(|&n| is_prime(n))
}

pub fn reduce_big(x: &BigInt, p: u64) -> u64 {
    u64::try_from(x.mod_floor(&BigInt::from(p))).unwrap()
}

pub fn trim(mut a: FpPoly) -> FpPoly {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

pub fn deg(a: &[u64]) -> isize {
    a.len() as isize - 1
}

pub fn add(a: &[u64], b: &[u64], p: u64) -> FpPoly {
    let n = a.len().max(b.len());
    trim(
        (0..n)
            .map(|i| addmod(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0), p))
            .collect(),
    )
}

pub fn sub(a: &[u64], b: &[u64], p: u64) -> FpPoly {
    let n = a.len().max(b.len());
    trim(
        (0..n)
            .map(|i| submod(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0), p))
            .collect(),
    )
}

pub fn scale(a: &[u64], c: u64, p: u64) -> FpPoly {
    trim(a.iter().map(|&x| mulmod(x, c, p)).collect())
}

pub fn mul(a: &[u64], b: &[u64], p: u64) -> FpPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut r = vec![0u128; a.len() + b.len() - 1];
    let pp = p as u128;
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            r[i + j] = (r[i + j] + x as u128 * y as u128) % pp;
        }
    }
    trim(r.into_iter().map(|x| x as u64).collect())
}

pub fn divrem(a: &[u64], b: &[u64], p: u64) -> (FpPoly, FpPoly) {
    assert!(!b.is_empty(), "division by the zero polynomial");
    let mut r = a.to_vec();
    if r.len() < b.len() {
        return (Vec::new(), trim(r));
    }
    let inv = invmod(*b.last().unwrap(), p).expect("leading coefficient invertible");
    let mut q = vec![0u64; r.len() - b.len() + 1];
    for i in (0..q.len()).rev() {
        let c = mulmod(r[i + b.len() - 1], inv, p);
        q[i] = c;
        if c != 0 {
            for (j, &y) in b.iter().enumerate() {
                r[i + j] = submod(r[i + j], mulmod(c, y, p), p);
            }
        }
    }
    r.truncate(b.len() - 1);
    (trim(q), trim(r))
}

pub fn rem(a: &[u64], b: &[u64], p: u64) -> FpPoly {
    divrem(a, b, p).1
}

pub fn monic(a: &[u64], p: u64) -> FpPoly {
    match a.last() {
        None => Vec::new(),
        Some(&l) => scale(a, invmod(l, p).unwrap(), p),
    }
}

pub fn gcd(a: &[u64], b: &[u64], p: u64) -> FpPoly {
    let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
    while !b.is_empty() {
        let r = rem(&a, &b, p);
        a = b;
        b = r;
    }
    monic(&a, p)
}

/// Monic gcd g with s·a + t·b = g.
pub fn xgcd(a: &[u64], b: &[u64], p: u64) -> (FpPoly, FpPoly, FpPoly) {
    let (mut r0, mut r1) = (trim(a.to_vec()), trim(b.to_vec()));
    let (mut s0, mut s1) = (vec![1u64], Vec::new());
    let (mut t0, mut t1) = (Vec::new(), vec![1u64]);
    while !r1.is_empty() {
        let (q, r) = divrem(&r0, &r1, p);
        r0 = std::mem::replace(&mut r1, r);
        let s = sub(&s0, &mul(&q, &s1, p), p);
        s0 = std::mem::replace(&mut s1, s);
        let t = sub(&t0, &mul(&q, &t1, p), p);
        t0 = std::mem::replace(&mut t1, t);
    }
    match r0.last() {
        None => (r0, s0, t0),
        Some(&l) => {
            let c = invmod(l, p).unwrap();
            (scale(&r0, c, p), scale(&s0, c, p), scale(&t0, c, p))
        }
    }
}

/// Inverse of a modulo m, if gcd(a, m) = 1.
pub fn inv_mod_poly(a: &[u64], m: &[u64], p: u64) -> Option<FpPoly> {
    let (g, s, _) = xgcd(&rem(a, m, p), m, p);
    (g == [1]).then(|| rem(&s, m, p))
}

pub fn mulrem(a: &[u64], b: &[u64], m: &[u64], p: u64) -> FpPoly {
    rem(&mul(a, b, p), m, p)
}

pub fn pow_rem(a: &[u64], mut e: u128, m: &[u64], p: u64) -> FpPoly {
    let mut r = rem(&[1], m, p);
    let mut b = rem(a, m, p);
    while e > 0 {
        if e & 1 == 1 {
            r = mulrem(&r, &b, m, p);
        }
        b = mulrem(&b, &b, m, p);
        e >>= 1;
    }
    r
}

pub fn eval(a: &[u64], x: u64, p: u64) -> u64 {
    a.iter().rev().fold(0, |acc, &c| addmod(mulmod(acc, x, p), c, p))
}

pub fn derivative(a: &[u64], p: u64) -> FpPoly {
    trim(
        a.iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| mulmod(c, i as u64 % p, p))
            .collect(),
    )
}

/// Compose a(b(X)) modulo m.
pub fn compose_rem(a: &[u64], b: &[u64], m: &[u64], p: u64) -> FpPoly {
    let mut acc: FpPoly = Vec::new();
    for &c in a.iter().rev() {
        acc = add(&mulrem(&acc, b, m, p), &[c], p);
    }
    rem(&acc, m, p)
}

/// The unique polynomial of degree < xs.len() through the points (xs[i], ys[i]).
pub fn interpolate(xs: &[u64], ys: &[u64], p: u64) -> FpPoly {
    let mut result: FpPoly = Vec::new();
    let mut basis: FpPoly = vec![1];
    // Newton form
    let n = xs.len();
    let mut coef = ys.to_vec();
    for j in 1..n {
        for i in (j..n).rev() {
            let num = submod(coef[i], coef[i - 1], p);
            let den = submod(xs[i], xs[i - j], p);
            coef[i] = mulmod(num, invmod(den, p).expect("distinct nodes"), p);
        }
    }
    for i in 0..n {
        result = add(&result, &scale(&basis, coef[i], p), p);
        basis = mul(&basis, &[submod(0, xs[i] % p, p), 1], p);
    }
    result
}

/// Determinant of a square matrix over F_p.
pub fn det(mut m: Vec<Vec<u64>>, p: u64) -> u64 {
    let n = m.len();
    let mut d = 1u64;
    for c in 0..n {
        let Some(piv) = (c..n).find(|&r| m[r][c] != 0) else {
            return 0;
        };
        if piv != c {
            m.swap(piv, c);
            d = submod(0, d, p);
        }
        d = mulmod(d, m[c][c], p);
        let inv = invmod(m[c][c], p).unwrap();
        for r in c + 1..n {
            if m[r][c] == 0 {
                continue;
            }
            let f = mulmod(m[r][c], inv, p);
            for k in c..n {
                let t = mulmod(f, m[c][k], p);
                m[r][k] = submod(m[r][k], t, p);
            }
        }
    }
    d
}

/// Row echelon form in place; returns the pivot columns.
fn echelon(m: &mut [Vec<u64>], p: u64) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(piv) = (r..rows).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(piv, r);
        let inv = invmod(m[r][c], p).unwrap();
        for k in c..cols {
            m[r][k] = mulmod(m[r][k], inv, p);
        }
        for i in 0..rows {
            if i != r && m[i][c] != 0 {
                let f = m[i][c];
                for k in c..cols {
                    let t = mulmod(f, m[r][k], p);
                    m[i][k] = submod(m[i][k], t, p);
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    pivots
}

pub fn rank(m: &[Vec<u64>], p: u64) -> usize {
    echelon(&mut m.to_vec(), p).len()
}

/// Basis of {x : m·x = 0}.
pub fn kernel(m: &[Vec<u64>], p: u64) -> Vec<Vec<u64>> {
    let cols = m.first().map_or(0, |r| r.len());
    let mut e = m.to_vec();
    let pivots = echelon(&mut e, p);
    let mut out = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![0u64; cols];
        v[free] = 1;
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = submod(0, e[r][free], p);
        }
        out.push(v);
    }
    out
}

/// p-th root of a polynomial whose exponents are all multiples of p (coefficients are
/// fixed by the p-th power map on F_p).
fn pth_root(a: &[u64], p: u64) -> FpPoly {
    a.iter().step_by(p as usize).copied().collect()
}

/// Squarefree decomposition: pairs (g, m) with a = lc · ∏ g^m, g monic squarefree and coprime.
pub fn squarefree_decomposition(a: &[u64], p: u64) -> Vec<(FpPoly, u32)> {
    let a = monic(a, p);
    let mut out = Vec::new();
    if deg(&a) < 1 {
        return out;
    }
    sfd_rec(&a, p, 1, &mut out);
    out.sort();
    out
}

fn sfd_rec(a: &[u64], p: u64, mult: u32, out: &mut Vec<(FpPoly, u32)>) {
    let da = derivative(a, p);
    if da.is_empty() {
        if deg(a) >= 1 {
            sfd_rec(&pth_root(a, p), p, mult * p as u32, out);
        }
        return;
    }
    let c = gcd(a, &da, p);
    let mut w = divrem(a, &c, p).0;
    let mut c = c;
    let mut i = 1;
    while deg(&w) >= 1 {
        let y = gcd(&w, &c, p);
        let fac = divrem(&w, &y, p).0;
        if deg(&fac) >= 1 {
            out.push((fac, i * mult));
        }
        w = y;
        c = divrem(&c, &w, p).0;
        i += 1;
    }
    if deg(&c) >= 1 {
        sfd_rec(&pth_root(&c, p), p, mult * p as u32, out);
    }
}

/// Distinct-degree factorization of a monic squarefree polynomial: (product of all
/// irreducible factors of degree k, k).
pub fn distinct_degree(a: &[u64], p: u64) -> Vec<(FpPoly, u32)> {
    let mut f = monic(a, p);
    let mut out = Vec::new();
    let x: FpPoly = vec![0, 1];
    let mut h = rem(&x, &f, p);
    let mut k = 1;
    while deg(&f) >= 2 * k as isize {
        h = pow_rem(&h, p as u128, &f, p);
        let g = gcd(&f, &sub(&h, &x, p), p);
        if deg(&g) >= 1 {
            f = divrem(&f, &g, p).0;
            h = rem(&h, &f, p);
            out.push((g, k));
        }
        k += 1;
    }
    if deg(&f) >= 1 {
        let d = deg(&f) as u32;
        out.push((f, d));
    }
    out
}

/// Degrees and multiplicities of the irreducible factors, sorted.
pub fn factor_degrees(a: &[u64], p: u64) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for (g, m) in squarefree_decomposition(a, p) {
        for (h, k) in distinct_degree(&g, p) {
            for _ in 0..(deg(&h) as u32 / k) {
                out.push((k, m));
            }
        }
    }
    out.sort();
    out
}

pub fn is_irreducible(a: &[u64], p: u64) -> bool {
    let d = deg(a);
    d >= 1 && factor_degrees(a, p) == [(d as u32, 1)]
}

/// Distinct roots in F_p, sorted. p must be odd.
pub fn roots(a: &[u64], p: u64) -> Vec<u64> {
    assert!(p % 2 == 1);
    let f = monic(a, p);
    if deg(&f) < 1 {
        return Vec::new();
    }
    let xp = pow_rem(&[0, 1], p as u128, &f, p);
    let g = gcd(&f, &sub(&xp, &[0, 1], p), p);
    let mut out = Vec::new();
    split_linear(&g, p, 0, &mut out);
    out.sort_unstable();
    out
}

fn split_linear(g: &[u64], p: u64, mut shift: u64, out: &mut Vec<u64>) {
    match deg(g) {
        d if d < 1 => {}
        1 => out.push(submod(0, g[0], p)),
        _ => loop {
            let h = pow_rem(&[shift, 1], ((p - 1) / 2) as u128, g, p);
            let s = gcd(g, &sub(&h, &[1], p), p);
            shift += 1;
            if deg(&s) >= 1 && deg(&s) < deg(g) {
                let t = divrem(g, &s, p).0;
                split_linear(&s, p, shift, out);
                split_linear(&t, p, shift, out);
                return;
            }
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u64 = 1_000_003;

    #[test]
    fn kernel_and_rank() {
        let m = vec![vec![1, 2, 3], vec![2, 4, 6], vec![0, 1, 1]];
        assert_eq!(rank(&m, P), 2);
        let k = kernel(&m, P);
        assert_eq!(k.len(), 1);
        for row in &m {
            let dot = row.iter().zip(&k[0]).fold(0, |a, (&x, &y)| addmod(a, mulmod(x, y, P), P));
            assert_eq!(dot, 0);
        }
        assert_eq!(kernel(&[vec![1, 1], vec![0, 1]], 2), Vec::<Vec<u64>>::new());
    }

    #[test]
    fn inverse_and_primes() {
        assert!(is_prime(47653));
        assert!(!is_prime(47653 * 3));
        assert!(is_prime((1 << 61) - 1));
        for a in 1..200 {
            assert_eq!(mulmod(a, invmod(a, P).unwrap(), P), 1);
        }
        let q: Vec<u64> = large_primes().take(3).collect();
        assert!(q.iter().all(|&x| is_prime(x) && x < 1 << 62));
    }

    #[test]
    fn factor_patterns() {
        // (x − 1)^2 (x^2 + 1) over F_3: x^2 + 1 is irreducible
        let f = mul(&mul(&[2, 1], &[2, 1], 3), &[1, 0, 1], 3);
        assert_eq!(factor_degrees(&f, 3), vec![(1, 2), (2, 1)]);
        // x^4 + x + 1 is irreducible over F_2; its square is not squarefree
        let g = vec![1, 1, 0, 0, 1];
        assert!(is_irreducible(&g, 2));
        assert_eq!(factor_degrees(&mul(&g, &g, 2), 2), vec![(4, 2)]);
        // x^4 − x over F_2 = x (x + 1)(x^2 + x + 1)
        assert_eq!(factor_degrees(&[0, 1, 0, 0, 1], 2), vec![(1, 1), (1, 1), (2, 1)]);
    }

    #[test]
    fn root_finding() {
        let rs = [3u64, 17, 99, 5000];
        let mut f: FpPoly = vec![1];
        for &r in &rs {
            f = mul(&f, &[P - r, 1], P);
        }
        f = mul(&f, &[1, 0, 1], P); // x^2 + 1 has no roots since P ≡ 3 mod 4
        assert_eq!(roots(&f, P), rs.to_vec());
    }

    #[test]
    fn interpolation_and_det() {
        let f = vec![5, 0, 7, 1];
        let xs: Vec<u64> = (0..4).collect();
        let ys: Vec<u64> = xs.iter().map(|&x| eval(&f, x, P)).collect();
        assert_eq!(interpolate(&xs, &ys, P), f);
        assert_eq!(det(vec![vec![2, 1], vec![1, 1]], P), 1);
        assert_eq!(det(vec![vec![0, 1], vec![1, 0]], P), P - 1);
    }
}
