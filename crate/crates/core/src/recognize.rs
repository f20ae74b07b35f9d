//! Exact lattice reduction and recognition of 2-adic approximations as algebraic
//! numbers: minimal polynomials, the G_k interpolation lattice, reconstruction from
//! conjugate orbits, Newton polygons and smoothness reports.

use crate::error::{Error, Result};
use crate::fp::{self, FpPoly};
use crate::padic::Qq;
use crate::poly::{v2, IntPoly, RecognizedPoly};
use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

/// A recognized relation is accepted only if its vector beats the Gaussian-heuristic
/// length of the lattice by at least this many bits.
pub const MIN_GAP_BITS: f64 = 16.0;

/// Bits of data held back from the lattice so that verification is an independent check.
pub const VERIFY_BITS: u32 = 32;

/// Upper limit on the number of word-size primes used in one CRT reconstruction.
pub const MAX_PRIMES: usize = 4000;

/// Lattice given by a basis of integer row vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntLattice {
    pub basis: Vec<Vec<BigInt>>,
}

impl IntLattice {
    pub fn new(basis: Vec<Vec<BigInt>>) -> Result<Self> {
        let n = basis.first().map_or(0, Vec::len);
        if basis.is_empty() || n == 0 || basis.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid("lattice rows must be nonempty and equally long".into()));
        }
        Ok(IntLattice { basis })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Result<Self> {
        Self::new(
            rows.iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn dim(&self) -> usize {
        self.basis[0].len()
    }
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// log2 |x| for x ≠ 0.
pub fn log2_abs(x: &BigInt) -> f64 {
    let m = x.magnitude();
    let bits = m.bits();
    if bits <= 1000 {
        m.to_f64().unwrap().log2()
    } else {
        let sh = bits - 64;
        (m >> sh).to_f64().unwrap().log2() + sh as f64
    }
}

/// Reduced basis plus the Gram determinants d_i of its leading i vectors.
struct Reduced {
    basis: Vec<Vec<BigInt>>,
    d: Vec<BigInt>,
}

/// Integral LLL with δ = 3/4 (all Gram–Schmidt data kept as exact integers).
fn lll_integral(basis: &[Vec<BigInt>]) -> Result<Reduced> {
    let m = basis.len();
    let mut b: Vec<Vec<BigInt>> = Vec::with_capacity(m + 1);
    b.push(Vec::new());
    b.extend(basis.iter().cloned());
    let mut d = vec![BigInt::zero(); m + 1];
    d[0] = BigInt::one();
    let mut lam = vec![vec![BigInt::zero(); m + 1]; m + 1];
    let dependent = || Error::Degenerate("lattice rows are linearly dependent".into());
    d[1] = dot(&b[1], &b[1]);
    if d[1].is_zero() {
        return Err(dependent());
    }

    fn red(b: &mut [Vec<BigInt>], lam: &mut [Vec<BigInt>], d: &[BigInt], k: usize, l: usize) {
        let two_l: BigInt = &lam[k][l] << 1;
        if two_l.magnitude() <= d[l].magnitude() {
            return;
        }
        let q = (&two_l + &d[l]).div_floor(&(&d[l] << 1));
        let (lo, hi) = b.split_at_mut(k);
        for (x, y) in hi[0].iter_mut().zip(&lo[l]) {
            *x -= &q * y;
        }
        lam[k][l] -= &q * &d[l];
        for i in 1..l {
            let t = &q * &lam[l][i];
            lam[k][i] -= t;
        }
    }

    let (mut k, mut kmax) = (2, 1);
    while k <= m {
        if k > kmax {
            kmax = k;
            for j in 1..=k {
                let mut u = dot(&b[k], &b[j]);
                for i in 1..j {
                    u = (&d[i] * &u - &lam[k][i] * &lam[j][i]) / &d[i - 1];
                }
                if j < k {
                    lam[k][j] = u;
                } else {
                    if u.is_zero() {
                        return Err(dependent());
                    }
                    d[k] = u;
                }
            }
        }
        loop {
            red(&mut b, &mut lam, &d, k, k - 1);
            let lhs: BigInt = (&d[k] * &d[k - 2]) << 2;
            let rhs: BigInt = &d[k - 1] * &d[k - 1] * 3u8 - ((&lam[k][k - 1] * &lam[k][k - 1]) << 2);
            if lhs >= rhs {
                break;
            }
            b.swap(k, k - 1);
            for j in 1..k - 1 {
                let t = std::mem::take(&mut lam[k][j]);
                lam[k][j] = std::mem::replace(&mut lam[k - 1][j], t);
            }
            let l = lam[k][k - 1].clone();
            let bb = (&d[k - 2] * &d[k] + &l * &l) / &d[k - 1];
            for i in k + 1..=kmax {
                let t = lam[i][k].clone();
                lam[i][k] = (&d[k] * &lam[i][k - 1] - &l * &t) / &d[k - 1];
                lam[i][k - 1] = (&bb * &t + &l * &lam[i][k]) / &d[k];
            }
            d[k - 1] = bb;
            k = (k - 1).max(2);
        }
        for l in (1..k - 1).rev() {
            red(&mut b, &mut lam, &d, k, l);
        }
        k += 1;
    }
    b.remove(0);
    Ok(Reduced { basis: b, d })
}

/// LLL-reduced basis (δ = 3/4) of the same lattice.
pub fn lll_reduce(l: &IntLattice) -> Result<IntLattice> {
    Ok(IntLattice {
        basis: lll_integral(&l.basis)?.basis,
    })
}

/// Basis of {x ∈ Z^r : x·A ≡ 0 mod 2^m}, A given by its r rows. Columns are
/// processed one at a time; each step keeps a basis of the lattice cut out by the
/// columns seen so far.
pub fn kernel_lattice(a: &[Vec<BigInt>], m: u32) -> IntLattice {
    let r = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let modulus = BigInt::one() << m;
    let md = |x: &BigInt| x.mod_floor(&modulus);
    let mut basis: Vec<Vec<BigInt>> = (0..r)
        .map(|i| (0..r).map(|j| BigInt::from((i == j) as u8)).collect())
        .collect();
    let mut w: Vec<Vec<BigInt>> = a.iter().map(|row| row.iter().map(md).collect()).collect();
    for j in 0..cols {
        let piv = (0..r)
            .filter(|&i| !w[i][j].is_zero())
            .min_by_key(|&i| (w[i][j].trailing_zeros().unwrap(), i));
        let Some(p) = piv else { continue };
        let v = w[p][j].trailing_zeros().unwrap() as u32;
        let rest = BigInt::one() << (m - v);
        let unit = &w[p][j] >> v;
        let uinv = unit.modinv(&rest).expect("odd unit");
        for i in 0..r {
            if i == p || w[i][j].is_zero() {
                continue;
            }
            let c = ((&w[i][j] >> v) * &uinv).mod_floor(&rest);
            let (bp, wp) = (basis[p].clone(), w[p].clone());
            for (x, y) in basis[i].iter_mut().zip(&bp) {
                *x -= &c * y;
            }
            for (x, y) in w[i].iter_mut().zip(&wp) {
                *x = md(&(&*x - &c * y));
            }
        }
        for x in basis[p].iter_mut() {
            *x <<= m - v;
        }
        for x in w[p].iter_mut() {
            *x = md(&(&*x << (m - v)));
        }
    }
    IntLattice { basis }
}

/// An integer relation Σ c_i x_i ≡ 0 found by lattice reduction.
#[derive(Clone, Debug)]
pub struct Relation {
    pub coeffs: Vec<BigInt>,
    /// log2 of (Gaussian-heuristic length / length of the relation vector).
    pub gap_bits: f64,
    /// Bits of 2-adic precision the lattice was built with.
    pub precision: u32,
}

fn coordinates(x: &Qq, shift: i64, m: u32) -> Vec<BigInt> {
    let d = x.ctx().degree();
    if x.is_zero() {
        return vec![BigInt::zero(); d];
    }
    let sh = (x.valuation() + shift) as u32;
    let mask = (BigInt::one() << m) - 1u8;
    x.unit().iter().map(|c| (c << sh) & &mask).collect()
}

/// Smallest integer relation among `xs` modulo 2^prec, verified at the full precision
/// of the data and subject to the gap test. The lattice precision is clamped to leave
/// at least `VERIFY_BITS` unused bits of data.
pub fn find_relation(xs: &[Qq], prec: u32) -> Result<Relation> {
    if xs.is_empty() {
        return Err(Error::Invalid("no elements".into()));
    }
    let shift = xs
        .iter()
        .filter(|x| !x.is_zero())
        .map(|x| -x.valuation())
        .max()
        .unwrap_or(0)
        .max(0);
    let avail = xs
        .iter()
        .map(|x| x.abs_precision().saturating_add(shift))
        .min()
        .unwrap();
    if avail < 8 + VERIFY_BITS as i64 {
        return Err(Error::InsufficientPrecision(format!("{avail} bits of data")));
    }
    let m = (prec as i64).min(avail - VERIFY_BITS as i64) as u32;
    let rows: Vec<Vec<BigInt>> = xs.iter().map(|x| coordinates(x, shift, m)).collect();
    let lat = kernel_lattice(&rows, m);
    let red = lll_integral(&lat.basis)?;
    let r = xs.len() as f64;
    let log_det = log2_abs(&red.d[xs.len()]) / 2.0;
    let heuristic = 0.5 * (r / (2.0 * std::f64::consts::PI * std::f64::consts::E)).log2() + log_det / r;
    let b = &red.basis[0];
    let len = log2_abs(&dot(b, b)) / 2.0;
    let gap_bits = heuristic - len;
    if gap_bits < MIN_GAP_BITS {
        return Err(Error::Recognition(format!(
            "shortest vector only {gap_bits:.1} bits below the heuristic at {m} bits"
        )));
    }
    let ctx = xs[0].ctx();
    let sum = xs
        .iter()
        .zip(b)
        .fold(Qq::zero(ctx), |acc, (x, c)| acc.add(&Qq::from_int(ctx, c.clone()).mul(x)));
    if !sum.is_zero() {
        return Err(Error::Recognition(format!(
            "relation fails at valuation {} of {avail}",
            sum.valuation()
        )));
    }
    Ok(Relation {
        coeffs: b.clone(),
        gap_bits,
        precision: m,
    })
}

fn powers(x: &Qq, n: usize) -> Vec<Qq> {
    let mut out = vec![Qq::one(x.ctx())];
    for i in 1..=n {
        out.push(out[i - 1].mul(x));
    }
    out
}

pub fn eval_qq(p: &IntPoly, x: &Qq) -> Qq {
    let ctx = x.ctx();
    p.coeffs
        .iter()
        .rev()
        .fold(Qq::zero(ctx), |acc, c| acc.mul(x).add(&Qq::from_int(ctx, c.clone())))
}

/// Minimal polynomial guess of degree ≤ n for alpha, with the relation data.
pub fn minpoly_recognize_report(alpha: &Qq, n: usize, prec: u32) -> Result<(RecognizedPoly, Relation)> {
    if n == 0 {
        return Err(Error::Invalid("degree must be positive".into()));
    }
    let rel = find_relation(&powers(alpha, n), prec).map_err(|e| match e {
        Error::Recognition(_) => Error::DegreeRejected(n),
        e => e,
    })?;
    let p = IntPoly::new(rel.coeffs.clone()).primitive();
    Ok((RecognizedPoly::integral(p), rel))
}

pub fn minpoly_recognize(alpha: &Qq, n: usize, prec: u32) -> Result<RecognizedPoly> {
    Ok(minpoly_recognize_report(alpha, n, prec)?.0)
}

/// Solve d_k·j_k·H1'(j1) ≡ G̃_k(j1) for (G̃_k, d_k) with deg G̃_k < n.
pub fn gk_recognize_report(
    j1: &Qq,
    jk: &Qq,
    h1: &RecognizedPoly,
    n: usize,
    prec: u32,
) -> Result<(RecognizedPoly, Relation)> {
    if h1.numerator.degree() != n as isize {
        return Err(Error::Invalid(format!("H1 has degree {}, expected {n}", h1.numerator.degree())));
    }
    let w = eval_qq(&h1.numerator.derivative(), j1).mul(jk);
    let mut xs = powers(j1, n - 1);
    xs.push(w);
    let rel = find_relation(&xs, prec)?;
    let dk = rel.coeffs[n].clone();
    if dk.is_zero() {
        return Err(Error::Recognition("relation does not involve j_k".into()));
    }
    let g = IntPoly::new(rel.coeffs[..n].iter().map(|c| -c).collect());
    Ok((RecognizedPoly::new(g, dk), rel))
}

pub fn gk_recognize(j1: &Qq, jk: &Qq, h1: &RecognizedPoly, n: usize, prec: u32) -> Result<RecognizedPoly> {
    Ok(gk_recognize_report(j1, jk, h1, n, prec)?.0)
}

/// Whether the congruence d_k·j_k·H1'(j1) = G̃_k(j1) holds to the precision of the data.
pub fn gk_holds(j1: &Qq, jk: &Qq, h1: &IntPoly, gk: &RecognizedPoly) -> bool {
    let ctx = j1.ctx();
    let lhs = eval_qq(&h1.derivative(), j1)
        .mul(jk)
        .mul(&Qq::from_int(ctx, gk.denominator.clone()));
    lhs.sub(&eval_qq(&gk.numerator, j1)).is_zero()
}

// ---------------------------------------------------------------------------
// orbit reconstruction

/// Product of (X − r) over the roots, low to high, monic.
fn poly_from_roots(roots: &[Qq]) -> Vec<Qq> {
    let ctx = roots[0].ctx();
    let mut p = vec![Qq::one(ctx)];
    for r in roots {
        let mut q = vec![Qq::zero(ctx); p.len() + 1];
        for (i, c) in p.iter().enumerate() {
            q[i + 1] = q[i + 1].add(c);
            q[i] = q[i].sub(&c.mul(r));
        }
        p = q;
    }
    p
}

/// Σ_i v_i ∏_{l≠i} (X − r_l), low to high.
fn lagrange_numerator(roots: &[Qq], vals: &[Qq]) -> Vec<Qq> {
    let ctx = roots[0].ctx();
    let k = roots.len();
    let mut out = vec![Qq::zero(ctx); k];
    for i in 0..k {
        let others: Vec<Qq> = (0..k).filter(|&l| l != i).map(|l| roots[l].clone()).collect();
        let part = if others.is_empty() {
            vec![Qq::one(ctx)]
        } else {
            poly_from_roots(&others)
        };
        for (o, c) in out.iter_mut().zip(&part) {
            *o = o.add(&c.mul(&vals[i]));
        }
    }
    out
}

/// c = num(m) / (den · P'(m)) for the chosen generator m.
#[derive(Clone, Debug)]
struct FieldElem {
    num: IntPoly,
    den: BigInt,
}

fn recognize_in_field(c: &Qq, m_pows: &[Qq], dp_m: &Qq, prec: u32) -> Result<FieldElem> {
    let e = m_pows.len();
    let mut xs = m_pows.to_vec();
    xs.push(dp_m.mul(c));
    let rel = find_relation(&xs, prec)?;
    let den = rel.coeffs[e].clone();
    if den.is_zero() {
        return Err(Error::Recognition("coefficient relation is degenerate".into()));
    }
    let s = if den.is_negative() { BigInt::from(-1) } else { BigInt::one() };
    Ok(FieldElem {
        num: IntPoly::new(rel.coeffs[..e].iter().map(|x| -x * &s).collect()),
        den: den.abs(),
    })
}

/// The result of an orbit reconstruction.
#[derive(Clone, Debug)]
pub struct OrbitResult {
    pub h1: RecognizedPoly,
    pub g2: RecognizedPoly,
    pub g3: RecognizedPoly,
    /// Minimal polynomial of the symmetric element that generated the coefficient field.
    pub field_poly: IntPoly,
    pub primes: usize,
}

fn divisors_below(e: usize) -> Vec<usize> {
    (1..e).filter(|x| e.is_multiple_of(*x)).collect()
}

/// Candidate symmetric elements: single coefficients of M1 from the top, then sums.
fn symmetric_candidates(m1: &[Qq]) -> Vec<Qq> {
    let k = m1.len() - 1;
    let mut out: Vec<Qq> = (0..k).rev().map(|i| m1[i].clone()).collect();
    for i in (0..k.saturating_sub(1)).rev() {
        out.push(m1[k - 1].add(&m1[i]));
    }
    out
}

/// Per-prime images of (R, T2, T3), or None for an unlucky prime.
fn orbit_mod_p(
    p: u64,
    pp: &IntPoly,
    coeffs: &[Vec<FieldElem>; 3],
    k: usize,
    n: usize,
) -> Option<[FpPoly; 3]> {
    let e = pp.degree() as usize;
    let pm = pp.mod_p(p);
    if fp::deg(&pm) != e as isize {
        return None;
    }
    let dpm = fp::derivative(&pm, p);
    let dp_inv: FpPoly = if e == 1 {
        vec![fp::invmod(pm[1], p)?]
    } else {
        fp::inv_mod_poly(&dpm, &pm, p)?
    };
    // each coefficient as a polynomial in Y of degree < e
    let mut cy: Vec<Vec<FpPoly>> = Vec::new();
    for list in coeffs {
        let mut row = Vec::new();
        for c in list {
            let dinv = fp::invmod(fp::reduce_big(&c.den, p), p)?;
            let num = fp::scale(&c.num.mod_p(p), dinv, p);
            let v = if e == 1 {
                fp::scale(&num, dp_inv[0], p)
            } else {
                fp::mulrem(&num, &dp_inv, &pm, p)
            };
            row.push(v);
        }
        cy.push(row);
    }
    let m1 = &cy[0];
    // M1(x0, Y) as a polynomial in Y
    let m1_at = |x0: u64| -> FpPoly {
        let mut acc: FpPoly = vec![fp::powmod(x0, k as u64, p)];
        let mut xp = 1u64;
        for c in m1.iter() {
            acc = fp::add(&acc, &fp::scale(c, xp, p), p);
            xp = fp::mulmod(xp, x0, p);
        }
        acc
    };
    let (r, y) = if e == 1 {
        let y0 = fp::mulmod(fp::submod(0, pm[0], p), fp::invmod(pm[1], p)?, p);
        // R = M1(X, y0)
        let mut r: FpPoly = vec![0; k + 1];
        r[k] = 1;
        for (i, c) in m1.iter().enumerate() {
            r[i] = fp::eval(c, y0, p);
        }
        (fp::trim(r), vec![y0])
    } else {
        let xs: Vec<u64> = (0..=n as u64).collect();
        let mut res = Vec::new();
        let mut s1 = Vec::new();
        let mut s0 = Vec::new();
        for &x0 in &xs {
            let b = m1_at(x0);
            let (r0, a1, a0) = resultant_and_sres1(&pm, &b, e, p);
            res.push(r0);
            s1.push(a1);
            s0.push(a0);
        }
        let r = fp::interpolate(&xs, &res, p);
        let s1 = fp::interpolate(&xs, &s1, p);
        let s0 = fp::interpolate(&xs, &s0, p);
        if fp::deg(&r) != n as isize {
            return None;
        }
        let inv = fp::inv_mod_poly(&s1, &r, p)?;
        let y = fp::mulrem(&fp::sub(&[], &s0, p), &inv, &r, p);
        (r, y)
    };
    if fp::deg(&r) != n as isize || fp::gcd(&r, &fp::derivative(&r, p), p) != [1] {
        return None;
    }
    let at_y = |c: &FpPoly| fp::compose_rem(c, &y, &r, p);
    let m1y: Vec<FpPoly> = m1.iter().map(at_y).collect();
    // ∂M1/∂X at Y = y(X)
    let mut dm1: FpPoly = vec![0; k];
    dm1[k - 1] = k as u64 % p;
    let mut dm1 = fp::trim(dm1);
    for (i, c) in m1y.iter().enumerate().skip(1) {
        let mut xi: FpPoly = vec![0; i];
        xi[i - 1] = i as u64 % p;
        dm1 = fp::add(&dm1, &fp::mul(c, &fp::trim(xi), p), p);
    }
    let dm1_inv = fp::inv_mod_poly(&fp::rem(&dm1, &r, p), &r, p)?;
    let factor = fp::mulrem(&fp::derivative(&r, p), &dm1_inv, &r, p);
    let mut ts = Vec::new();
    for list in &cy[1..] {
        let mut mk: FpPoly = Vec::new();
        for (i, c) in list.iter().enumerate() {
            let mut xi: FpPoly = vec![0; i + 1];
            xi[i] = 1;
            mk = fp::add(&mk, &fp::mul(&at_y(c), &xi, p), p);
        }
        ts.push(fp::mulrem(&mk, &factor, &r, p));
    }
    let t3 = ts.pop().unwrap();
    let t2 = ts.pop().unwrap();
    Some([r, t2, t3])
}

/// Res_Y(A, B) and the degree-1 subresultant coefficients, with formal degrees
/// deg A = e, deg B = e − 1 (Sylvester determinant definitions).
fn resultant_and_sres1(a: &[u64], b: &[u64], e: usize, p: u64) -> (u64, u64, u64) {
    let (ma, mb) = (e, e - 1);
    let coeff = |v: &[u64], i: usize| *v.get(i).unwrap_or(&0);
    // row of x^s·v in columns of degree (width − 1) down to 0
    let row = |v: &[u64], dv: usize, s: usize, width: usize| -> Vec<u64> {
        (0..width)
            .map(|c| {
                let deg = width - 1 - c;
                if deg >= s && deg - s <= dv {
                    coeff(v, deg - s)
                } else {
                    0
                }
            })
            .collect()
    };
    let sylv = |j: usize| -> Vec<Vec<u64>> {
        let width = ma + mb - j;
        let mut rows = Vec::new();
        for s in (0..mb - j).rev() {
            rows.push(row(a, ma, s, width));
        }
        for s in (0..ma - j).rev() {
            rows.push(row(b, mb, s, width));
        }
        rows
    };
    let res = fp::det(sylv(0), p);
    if e < 2 {
        return (res, 0, 0);
    }
    let m1 = sylv(1);
    let width = ma + mb - 1;
    let lead = width - 2;
    let pick = |col: usize| -> Vec<Vec<u64>> {
        m1.iter()
            .map(|r| {
                let mut v = r[..lead].to_vec();
                v.push(r[col]);
                v
            })
            .collect()
    };
    // column of Y^1 is width − 2, of Y^0 is width − 1
    let s11 = fp::det(pick(width - 2), p);
    let s10 = fp::det(pick(width - 1), p);
    (res, s11, s10)
}

/// Rational reconstruction of a mod m with |num|, den ≤ sqrt(m/2).
pub fn rational_reconstruct(a: &BigInt, m: &BigInt) -> Option<BigRational> {
    let bound = (m >> 1u8).sqrt();
    let (mut r0, mut r1) = (m.clone(), a.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        r0 = std::mem::replace(&mut r1, r2);
        let t2 = &t0 - &q * &t1;
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound || !r1.gcd(&t1).is_one() {
        return None;
    }
    Some(BigRational::new(r1, t1))
}

fn crt_step(x: &mut BigInt, m: &mut BigInt, r: u64, p: u64) {
    let xm = fp::reduce_big(x, p);
    let minv = fp::invmod(fp::reduce_big(m, p), p).unwrap();
    let t = fp::mulmod(fp::submod(r, xm, p), minv, p);
    *x += &*m * t;
    *m *= p;
}

fn to_recognized(coeffs: &[BigRational], scale: &BigRational) -> RecognizedPoly {
    let scaled: Vec<BigRational> = coeffs.iter().map(|c| c * scale).collect();
    let den = scaled.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
    let num = IntPoly::new(scaled.iter().map(|c| (c * &den).to_integer()).collect());
    RecognizedPoly::new(num, den)
}

/// H1, G2, G3 from k conjugate invariant triples (j1, j2, j3), total degree n.
pub fn orbit_reconstruct(triples: &[[Qq; 3]], n: usize, prec: u32) -> Result<OrbitResult> {
    let k = triples.len();
    if k == 0 || n == 0 || !n.is_multiple_of(k) {
        return Err(Error::Invalid(format!("orbit size {k} does not divide {n}")));
    }
    let e = n / k;
    let roots: Vec<Qq> = triples.iter().map(|t| t[0].clone()).collect();
    let m1 = poly_from_roots(&roots);
    let m2 = lagrange_numerator(&roots, &triples.iter().map(|t| t[1].clone()).collect::<Vec<_>>());
    let m3 = lagrange_numerator(&roots, &triples.iter().map(|t| t[2].clone()).collect::<Vec<_>>());

    let mut chosen = None;
    for m in symmetric_candidates(&m1) {
        if divisors_below(e)
            .iter()
            .any(|&f| find_relation(&powers(&m, f), prec).is_ok())
        {
            continue;
        }
        let Ok((pp, _)) = minpoly_recognize_report(&m, e, prec) else {
            continue;
        };
        if pp.numerator.degree() == e as isize {
            chosen = Some((m, pp.numerator));
            break;
        }
    }
    let (m, pp) = chosen.ok_or_else(|| {
        Error::Recognition("no symmetric element generates a field of the expected degree".into())
    })?;
    let m_pows = powers(&m, e - 1);
    let dp_m = eval_qq(&pp.derivative(), &m);
    let lists: Vec<Vec<FieldElem>> = [&m1[..k], &m2[..], &m3[..]]
        .par_iter()
        .map(|cs| {
            cs.iter()
                .map(|c| recognize_in_field(c, &m_pows, &dp_m, prec))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let lists: [Vec<FieldElem>; 3] = lists.try_into().unwrap();

    let mut acc: Vec<BigInt> = vec![BigInt::zero(); 3 * n + 1];
    let mut modulus = BigInt::one();
    let mut previous: Option<Vec<BigRational>> = None;
    let mut used = 0;
    let batch = 8;
    let mut primes = fp::large_primes();
    while used < MAX_PRIMES {
        let ps: Vec<u64> = primes.by_ref().take(batch).collect();
        let images: Vec<(u64, [FpPoly; 3])> = ps
            .par_iter()
            .filter_map(|&p| orbit_mod_p(p, &pp, &lists, k, n).map(|im| (p, im)))
            .collect();
        for (p, [r, t2, t3]) in images {
            let flat = (0..=n)
                .map(|i| *r.get(i).unwrap_or(&0))
                .chain((0..n).map(|i| *t2.get(i).unwrap_or(&0)))
                .chain((0..n).map(|i| *t3.get(i).unwrap_or(&0)));
            for (x, v) in acc.iter_mut().zip(flat) {
                let mut mm = modulus.clone();
                crt_step(x, &mut mm, v, p);
            }
            modulus *= p;
            used += 1;
        }
        let rec: Option<Vec<BigRational>> = acc
            .iter()
            .map(|x| rational_reconstruct(x, &modulus))
            .collect();
        if let Some(rec) = rec {
            if previous.as_ref() == Some(&rec) {
                let lc = rec[n].clone();
                if lc.is_zero() {
                    return Err(Error::Recognition("reconstructed H1 has low degree".into()));
                }
                let r_poly = to_recognized(&rec[..=n], &BigRational::one());
                let h1 = RecognizedPoly::integral(r_poly.numerator.primitive());
                let c = BigRational::from(h1.numerator.leading()) / lc;
                let g2 = to_recognized(&rec[n + 1..2 * n + 1], &c);
                let g3 = to_recognized(&rec[2 * n + 1..], &c);
                let t = &triples[0];
                if !eval_qq(&h1.numerator, &t[0]).is_zero()
                    || !gk_holds(&t[0], &t[1], &h1.numerator, &g2)
                    || !gk_holds(&t[0], &t[2], &h1.numerator, &g3)
                {
                    return Err(Error::Verification(
                        "reconstructed polynomials fail the 2-adic congruences".into(),
                    ));
                }
                return Ok(OrbitResult {
                    h1,
                    g2,
                    g3,
                    field_poly: pp,
                    primes: used,
                });
            }
            previous = Some(rec);
        }
    }
    Err(Error::Recognition(format!("no stable reconstruction after {used} primes")))
}

// ---------------------------------------------------------------------------
// Newton polygons and smoothness

/// Lower convex hull of the points (i, v_2(a_i)), as (slope, length) segments from left
/// to right. Roots of valuation v correspond to segments of slope −v; a factor X^z
/// contributes `zero_roots` = z roots equal to 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonPolygon {
    pub segments: Vec<(BigRational, u64)>,
    pub zero_roots: u64,
}

impl NewtonPolygon {
    /// (root valuation, multiplicity) for the nonzero roots.
    pub fn root_valuations(&self) -> Vec<(BigRational, u64)> {
        self.segments.iter().map(|(s, l)| (-s.clone(), *l)).collect()
    }

    pub fn count_with_valuation(&self, v: &BigRational) -> u64 {
        self.root_valuations()
            .iter()
            .filter(|(x, _)| x == v)
            .map(|(_, l)| l)
            .sum()
    }
}

pub fn newton_polygon(p: &IntPoly) -> Result<NewtonPolygon> {
    if p.is_zero() {
        return Err(Error::Invalid("zero polynomial".into()));
    }
    let pts: Vec<(i64, i64)> = p
        .coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| (i as i64, v2(c) as i64))
        .collect();
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for &q in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b unless it lies strictly below the segment a–q
            let cross = (b.0 - a.0) * (q.1 - a.1) - (b.1 - a.1) * (q.0 - a.0);
            if cross <= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(q);
    }
    let segments = hull
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            (
                BigRational::new(BigInt::from(b.1 - a.1), BigInt::from(b.0 - a.0)),
                (b.0 - a.0) as u64,
            )
        })
        .collect();
    Ok(NewtonPolygon {
        segments,
        zero_roots: pts[0].0 as u64,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmoothnessReport {
    pub factors: Vec<(u64, u32)>,
    pub cofactor: BigInt,
    pub smooth: bool,
}

impl std::fmt::Display for SmoothnessReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|(p, e)| if *e == 1 { p.to_string() } else { format!("{p}^{e}") })
            .collect();
        write!(f, "{}", parts.join(" * "))?;
        if !self.cofactor.is_one() {
            if !parts.is_empty() {
                write!(f, " * ")?;
            }
            write!(f, "[{}]", self.cofactor)?;
        }
        Ok(())
    }
}

pub fn primes_up_to(bound: u64) -> Vec<u64> {
    let n = bound as usize;
    let mut sieve = vec![true; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if sieve[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
    }
    out
}

/// Trial division of |c| by the primes up to `bound`.
pub fn smoothness_report(c: &BigInt, bound: u64) -> Result<SmoothnessReport> {
    if c.is_zero() {
        return Err(Error::Invalid("zero has no factorization".into()));
    }
    let mut rest = c.magnitude().clone();
    let mut factors = Vec::new();
    for p in primes_up_to(bound) {
        if rest.is_one() {
            break;
        }
        let mut e = 0;
        while (&rest % p).is_zero() {
            rest /= p;
            e += 1;
        }
        if e > 0 {
            factors.push((p, e));
        }
    }
    let cofactor = BigInt::from_biguint(Sign::Plus, rest);
    Ok(SmoothnessReport {
        smooth: cofactor.is_one(),
        factors,
        cofactor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2m::Gf2m;
    use crate::padic::{Ctx, PadicCtx};

    fn ctx(d: u32, n: u32) -> Ctx {
        PadicCtx::new(&Gf2m::new(d).unwrap(), n).unwrap()
    }

    #[test]
    fn gauss_example() {
        let l = IntLattice::from_i64(&[&[1, 1_000_000_000], &[0, 1]]).unwrap();
        let r = lll_reduce(&l).unwrap();
        assert!(r.basis.contains(&vec![BigInt::zero(), BigInt::one()])
            || r.basis.contains(&vec![BigInt::zero(), BigInt::from(-1)]));
        assert!(r.basis.iter().any(|v| v[0].abs().is_one() && v[1].is_zero()));
    }

    #[test]
    fn dependent_rows_rejected() {
        let l = IntLattice::from_i64(&[&[1, 2, 3], &[2, 4, 6]]).unwrap();
        assert!(lll_reduce(&l).is_err());
    }

    #[test]
    fn kernel_of_integer() {
        let c = ctx(1, 128);
        let r = minpoly_recognize(&Qq::from_int(&c, 3), 1, 96).unwrap();
        assert_eq!(r.numerator, IntPoly::from_i64(&[-3, 1]));
        let r = minpoly_recognize(&Qq::from_ratio(&c, -5, 7).unwrap(), 1, 96).unwrap();
        assert_eq!(r.numerator, IntPoly::from_i64(&[5, 7]));
    }

    #[test]
    fn newton_basics() {
        let np = newton_polygon(&IntPoly::from_i64(&[0, -2, 1])).unwrap();
        assert_eq!(np.zero_roots, 1);
        assert_eq!(np.root_valuations(), vec![(BigRational::from(BigInt::from(1)), 1)]);
        let np = newton_polygon(&IntPoly::from_i64(&[1, 0, 0, 4])).unwrap();
        let v = BigRational::new(BigInt::from(-2), BigInt::from(3));
        assert_eq!(np.count_with_valuation(&v), 3);
    }

    #[test]
    fn smoothness() {
        let c = BigInt::from(2u64.pow(10) * 3u64.pow(4) * 999_983);
        let r = smoothness_report(&c, 1_000_000).unwrap();
        assert!(r.smooth);
        assert_eq!(r.factors, vec![(2, 10), (3, 4), (999_983, 1)]);
        let big: BigInt = (BigInt::one() << 89u8) - 1u8; // a Mersenne prime
        let r = smoothness_report(&big, 1_000_000).unwrap();
        assert!(!r.smooth);
    }

    #[test]
    fn rational_reconstruction() {
        let m = BigInt::from(1_000_000_007u64) * BigInt::from(998_244_353u64);
        let q = BigRational::new(BigInt::from(-1234), BigInt::from(5678));
        let a = (q.numer() * q.denom().modinv(&m).unwrap()).mod_floor(&m);
        assert_eq!(rational_reconstruct(&a, &m), Some(q));
    }
}
