//! The unramified extension Z_q of Z_2 of degree d at fixed precision 2^N, and its
//! fraction field Q_q with explicit valuations.
//!
//! Z_q = Z_2[t]/(Γ) where Γ is the Teichmüller lift of the binary-field modulus,
//! so that t is a (2^d − 1)-th root of unity and the Frobenius substitution is
//! t ↦ t^2.

use crate::error::{Error, Result};
use crate::gf2m::Gf2m;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::sync::Arc;

fn mask(bits: u32) -> BigInt {
    (BigInt::one() << bits) - 1u8
}

#[inline]
fn red(x: &BigInt, m: &BigInt) -> BigInt {
    x & m
}

/// ±g(X)g(−X) as a polynomial in X^2, reduced by the mask.
fn graeffe(g: &[BigInt], m: &BigInt) -> Vec<BigInt> {
    let d = g.len() - 1;
    let mut prod = vec![BigInt::zero(); 2 * d + 1];
    for (i, a) in g.iter().enumerate() {
        for (j, b) in g.iter().enumerate() {
            let t = a * b;
            if j % 2 == 1 {
                prod[i + j] -= t;
            } else {
                prod[i + j] += t;
            }
        }
    }
    (0..=d)
        .map(|i| {
            let c = &prod[2 * i];
            red(&if d % 2 == 1 { -c } else { c.clone() }, m)
        })
        .collect()
}

/// Inverse of an odd integer mod 2^bits.
fn inv_odd(a: &BigInt, bits: u32) -> BigInt {
    let mut x = BigInt::one();
    let mut k = 1u32;
    while k < bits {
        k = (2 * k).min(bits);
        let m = mask(k);
        x = red(&(&x * (BigInt::from(2) - red(&(a * &x), &m))), &m);
    }
    x
}

/// One Newton step for the Graeffe fixed point: solves (I − A)e = g − Φ(g), A the
/// derivative of Φ at g on polynomials of degree < d, and returns g − e.
fn newton_teichmuller(g: &[BigInt], bits: u32) -> Result<Vec<BigInt>> {
    let m = &mask(bits);
    let d = g.len() - 1;
    let sign = if d % 2 == 1 { -1 } else { 1 };
    let phi = graeffe(g, m);
    let mut rhs: Vec<BigInt> = (0..d).map(|i| red(&(&g[i] - &phi[i]), m)).collect();
    // column j: ±(X^j g(−X) + (−X)^j g(X)) at √X
    let mut a: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); d]; d];
    for j in 0..d {
        let sj = if j % 2 == 1 { -1 } else { 1 };
        for (i, c) in g.iter().enumerate() {
            let si = if i % 2 == 1 { -1 } else { 1 };
            let e = i + j;
            if e % 2 == 0 && e / 2 < d {
                a[e / 2][j] += c * (si + sj) * sign;
            }
        }
    }
    for (i, row) in a.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            let id = if i == j { BigInt::one() } else { BigInt::zero() };
            *x = red(&(id - &*x), m);
        }
    }
    // I − A ≡ I mod 2: eliminate on the diagonal
    for c in 0..d {
        if !a[c][c].bit(0) {
            return Err(Error::NotIrreducible("singular Newton system".into()));
        }
        let inv = inv_odd(&a[c][c], bits);
        for x in a[c].iter_mut() {
            *x = red(&(&*x * &inv), m);
        }
        rhs[c] = red(&(&rhs[c] * &inv), m);
        for r in 0..d {
            if r != c && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                for j in 0..d {
                    let t = &a[c][j] * &f;
                    a[r][j] = red(&(&a[r][j] - t), m);
                }
                rhs[r] = red(&(&rhs[r] - &rhs[c] * &f), m);
            }
        }
    }
    let mut out: Vec<BigInt> = (0..d).map(|i| red(&(&g[i] - &rhs[i]), m)).collect();
    out.push(BigInt::one());
    Ok(out)
}

/// Context of Z_q at precision N.
#[derive(Debug)]
pub struct PadicCtx {
    gf: Gf2m,
    d: usize,
    n: u32,
    gamma: Vec<BigInt>,
    frob: Vec<Vec<BigInt>>,
    mask: BigInt,
}

pub type Ctx = Arc<PadicCtx>;

impl PadicCtx {
    /// Lift the modulus of `gf` to Γ | X^(2^d−1) − 1 modulo 2^N. Γ is the fixed point of
    /// the Graeffe map g(X) ↦ ±g(X)g(−X) evaluated at √X, whose roots are the squares of
    /// those of g. The map's derivative vanishes mod 2, so Newton steps double the
    /// precision.
    pub fn new(gf: &Gf2m, n: u32) -> Result<Ctx> {
        if n < 8 {
            return Err(Error::Invalid("precision must be at least 8 bits".into()));
        }
        let d = gf.degree() as usize;
        let mut g: Vec<BigInt> = (0..=d)
            .map(|i| BigInt::from(gf.modulus() >> i & 1))
            .collect();
        let mut k = 1u32;
        while k < n {
            k = (2 * k).min(n);
            g = newton_teichmuller(&g, k)?;
        }
        let m = mask(n);
        if graeffe(&g, &m) != g {
            return Err(Error::NotIrreducible("Teichmüller lift did not converge".into()));
        }
        let mut ctx = PadicCtx {
            gf: gf.clone(),
            d,
            n,
            gamma: g,
            frob: Vec::new(),
            mask: m,
        };
        // t^(2i) mod Γ
        let mut frob = Vec::with_capacity(d);
        for i in 0..d {
            let mut v = vec![BigInt::zero(); 2 * i + 1];
            v[2 * i] = BigInt::one();
            frob.push(ctx.reduce_poly(v, n));
        }
        ctx.frob = frob;
        Ok(Arc::new(ctx))
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn precision(&self) -> u32 {
        self.n
    }

    pub fn gf(&self) -> &Gf2m {
        &self.gf
    }

    /// Γ, monic, coefficients low to high, reduced mod 2^N.
    pub fn gamma(&self) -> &[BigInt] {
        &self.gamma
    }

    fn mask_for(&self, bits: u32) -> BigInt {
        if bits == self.n {
            self.mask.clone()
        } else {
            mask(bits)
        }
    }

    /// Reduce an integer polynomial modulo Γ and 2^bits.
    fn reduce_poly(&self, mut v: Vec<BigInt>, bits: u32) -> Vec<BigInt> {
        let m = self.mask_for(bits);
        let d = self.d;
        for c in v.iter_mut() {
            *c = red(c, &m);
        }
        for i in (d..v.len()).rev() {
            let c = std::mem::take(&mut v[i]);
            if c.is_zero() {
                continue;
            }
            let c = red(&c, &m);
            for j in 0..d {
                let t = &c * &self.gamma[j];
                v[i - d + j] -= t;
                v[i - d + j] = red(&v[i - d + j], &m);
            }
        }
        v.truncate(d);
        v.resize(d, BigInt::zero());
        v
    }

    pub(crate) fn mul_raw(&self, a: &[BigInt], b: &[BigInt], bits: u32) -> Vec<BigInt> {
        let d = self.d;
        if d == 1 {
            return vec![red(&(&a[0] * &b[0]), &self.mask_for(bits))];
        }
        let mut p = vec![BigInt::zero(); 2 * d - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                p[i + j] += x * y;
            }
        }
        self.reduce_poly(p, bits)
    }

    fn add_raw(&self, a: &[BigInt], b: &[BigInt], bits: u32) -> Vec<BigInt> {
        let m = self.mask_for(bits);
        a.iter().zip(b).map(|(x, y)| red(&(x + y), &m)).collect()
    }

    fn sub_raw(&self, a: &[BigInt], b: &[BigInt], bits: u32) -> Vec<BigInt> {
        let m = self.mask_for(bits);
        a.iter().zip(b).map(|(x, y)| red(&(x - y), &m)).collect()
    }

    fn neg_raw(&self, a: &[BigInt], bits: u32) -> Vec<BigInt> {
        let m = self.mask_for(bits);
        a.iter().map(|x| red(&-x, &m)).collect()
    }

    fn const_raw(&self, c: &BigInt, bits: u32) -> Vec<BigInt> {
        let mut v = vec![BigInt::zero(); self.d];
        v[0] = red(c, &self.mask_for(bits));
        v
    }

    fn residue(&self, a: &[BigInt]) -> u64 {
        a.iter()
            .enumerate()
            .filter(|(_, c)| c.bit(0))
            .fold(0u64, |acc, (i, _)| acc | 1 << i)
    }

    fn lift_residue(&self, r: u64) -> Vec<BigInt> {
        (0..self.d).map(|i| BigInt::from(r >> i & 1)).collect()
    }

    /// Inverse of a unit modulo 2^bits by Newton iteration x ← x(2 − ax).
    fn inv_raw(&self, a: &[BigInt], bits: u32) -> Result<Vec<BigInt>> {
        let r = self.residue(a);
        if r == 0 {
            return Err(Error::NotUnit);
        }
        let mut x = self.lift_residue(self.gf.inv(r)?);
        let mut k = 1u32;
        let two = self.const_raw(&BigInt::from(2), bits);
        while k < bits {
            k = (2 * k).min(bits);
            let ax = self.mul_raw(a, &x, k);
            x = self.mul_raw(&x, &self.sub_raw(&two, &ax, k), k);
        }
        Ok(x)
    }

    /// Square root ≡ 1 mod 4 of a ≡ 1 mod 8, correct modulo 2^(bits−1).
    fn sqrt_raw(&self, a: &[BigInt], bits: u32) -> Result<Vec<BigInt>> {
        let eight = BigInt::from(8);
        let ok = a
            .iter()
            .enumerate()
            .all(|(i, c)| (c % &eight) == if i == 0 { BigInt::one() } else { BigInt::zero() });
        if !ok {
            return Err(Error::NotSquare("argument is not ≡ 1 mod 8".into()));
        }
        // inverse square root: x ← x(3 − a x^2)/2, error exponent k ↦ 2k − 2
        let w = bits + 2;
        let mut x = self.const_raw(&BigInt::one(), w);
        let three = self.const_raw(&BigInt::from(3), w);
        let mut k = 3u32;
        while k < bits + 1 {
            let ax2 = self.mul_raw(a, &self.mul_raw(&x, &x, w), w);
            let t: Vec<BigInt> = self.sub_raw(&three, &ax2, w).iter().map(|c| c >> 1).collect();
            x = self.mul_raw(&x, &t, w);
            k = 2 * k - 2;
        }
        let mut r = self.mul_raw(a, &x, bits);
        if r[0].bit(1) {
            r = self.neg_raw(&r, bits);
        }
        Ok(r)
    }

    fn frob_raw(&self, a: &[BigInt], bits: u32) -> Vec<BigInt> {
        if self.d == 1 {
            return a.to_vec();
        }
        let m = self.mask_for(bits);
        let mut out = vec![BigInt::zero(); self.d];
        for (i, c) in a.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (o, f) in out.iter_mut().zip(&self.frob[i]) {
                *o += c * f;
            }
        }
        out.iter().map(|x| red(x, &m)).collect()
    }
}

/// Element of Z_q at the context precision: d coefficients in [0, 2^N).
#[derive(Clone)]
pub struct ZqElem {
    ctx: Ctx,
    c: Vec<BigInt>,
}

impl PartialEq for ZqElem {
    fn eq(&self, other: &Self) -> bool {
        self.c == other.c
    }
}

impl Eq for ZqElem {}

impl fmt::Debug for ZqElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Zq[")?;
        for (i, c) in self.c.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c:x}")?;
        }
        write!(f, "]")
    }
}

impl ZqElem {
    pub fn from_coeffs(ctx: &Ctx, c: Vec<BigInt>) -> Self {
        assert_eq!(c.len(), ctx.d);
        let m = &ctx.mask;
        ZqElem {
            ctx: ctx.clone(),
            c: c.iter().map(|x| red(x, m)).collect(),
        }
    }

    pub fn from_int(ctx: &Ctx, x: impl Into<BigInt>) -> Self {
        ZqElem {
            ctx: ctx.clone(),
            c: ctx.const_raw(&x.into(), ctx.n),
        }
    }

    pub fn zero(ctx: &Ctx) -> Self {
        Self::from_int(ctx, 0)
    }

    pub fn one(ctx: &Ctx) -> Self {
        Self::from_int(ctx, 1)
    }

    /// The class of t.
    pub fn gen(ctx: &Ctx) -> Self {
        let mut v = vec![BigInt::zero(); ctx.d + 1];
        v[1] = BigInt::one();
        ZqElem {
            ctx: ctx.clone(),
            c: ctx.reduce_poly(v, ctx.n),
        }
    }

    /// Any lift of a binary-field element: coefficients 0/1.
    pub fn lift(ctx: &Ctx, r: u64) -> Self {
        ZqElem {
            ctx: ctx.clone(),
            c: ctx.lift_residue(r),
        }
    }

    /// The Teichmüller lift of a binary-field element (the root of unity reducing to it).
    pub fn teichmuller(ctx: &Ctx, r: u64) -> Self {
        let mut x = Self::lift(ctx, r);
        if r == 0 {
            return x;
        }
        for _ in 0..=ctx.n {
            let mut y = x.clone();
            for _ in 0..ctx.d {
                y = y.mul(&y);
            }
            if y == x {
                return x;
            }
            x = y;
        }
        x
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.c
    }

    pub fn add(&self, o: &Self) -> Self {
        self.with(self.ctx.add_raw(&self.c, &o.c, self.ctx.n))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.with(self.ctx.sub_raw(&self.c, &o.c, self.ctx.n))
    }

    pub fn neg(&self) -> Self {
        self.with(self.ctx.neg_raw(&self.c, self.ctx.n))
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.with(self.ctx.mul_raw(&self.c, &o.c, self.ctx.n))
    }

    pub fn mul_int(&self, k: i64) -> Self {
        self.mul(&Self::from_int(&self.ctx, k))
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(&self.ctx);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self) -> Result<Self> {
        Ok(self.with(self.ctx.inv_raw(&self.c, self.ctx.n)?))
    }

    /// Normalised square root (≡ 1 mod 4) of an element ≡ 1 mod 8. The top bit of the
    /// result is not determined.
    pub fn sqrt_normalized(&self) -> Result<Self> {
        Ok(self.with(self.ctx.sqrt_raw(&self.c, self.ctx.n)?))
    }

    /// Exact division by 2^k; fails if the element is not divisible.
    pub fn div_pow2(&self, k: u32) -> Result<Self> {
        if self.valuation() < k {
            return Err(Error::Invalid("element not divisible by the power of 2".into()));
        }
        Ok(self.with(self.c.iter().map(|x| x >> k).collect()))
    }

    pub fn frobenius(&self) -> Self {
        self.with(self.ctx.frob_raw(&self.c, self.ctx.n))
    }

    pub fn frobenius_pow(&self, k: usize) -> Self {
        let mut x = self.clone();
        for _ in 0..(k % self.ctx.d) {
            x = x.frobenius();
        }
        x
    }

    /// Valuation, or N for zero.
    pub fn valuation(&self) -> u32 {
        self.c
            .iter()
            .filter_map(|x| x.trailing_zeros())
            .min()
            .map_or(self.ctx.n, |v| v as u32)
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    pub fn residue(&self) -> u64 {
        self.ctx.residue(&self.c)
    }

    /// Balanced representatives in (−2^(N−1), 2^(N−1)] of all coefficients.
    pub fn balanced(&self) -> Vec<BigInt> {
        balanced(&self.c, self.ctx.n)
    }

    /// The balanced integer if all higher coordinates vanish.
    pub fn to_integer(&self) -> Option<BigInt> {
        self.c[1..]
            .iter()
            .all(|x| x.is_zero())
            .then(|| self.balanced().swap_remove(0))
    }

    fn with(&self, c: Vec<BigInt>) -> Self {
        ZqElem {
            ctx: self.ctx.clone(),
            c,
        }
    }
}

fn balanced(c: &[BigInt], bits: u32) -> Vec<BigInt> {
    let half = BigInt::one() << (bits - 1);
    let full = BigInt::one() << bits;
    c.iter()
        .map(|x| if *x > half { x - &full } else { x.clone() })
        .collect()
}

/// Element of Q_q: 2^v · u with u a unit known modulo 2^prec, or zero known to
/// absolute precision `v` (`i64::MAX` for an exact zero).
#[derive(Clone)]
pub struct Qq {
    ctx: Ctx,
    v: i64,
    prec: u32,
    u: Vec<BigInt>,
}

pub const EXACT: i64 = i64::MAX;

impl fmt::Debug for Qq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `v=<val> n=<prec> <hex>,<hex>,...`, or `zero n=<abs>`.
impl fmt::Display for Qq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            if self.v == EXACT {
                return write!(f, "zero");
            }
            return write!(f, "zero n={}", self.v);
        }
        write!(f, "v={} n={} ", self.v, self.prec)?;
        for (i, c) in self.u.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c:x}")?;
        }
        Ok(())
    }
}

impl Qq {
    pub fn zero(ctx: &Ctx) -> Self {
        Qq {
            ctx: ctx.clone(),
            v: EXACT,
            prec: 0,
            u: Vec::new(),
        }
    }

    fn zero_abs(ctx: &Ctx, abs: i64) -> Self {
        Qq {
            ctx: ctx.clone(),
            v: abs,
            prec: 0,
            u: Vec::new(),
        }
    }

    /// Build 2^v·u from raw coefficients known modulo 2^prec, normalising the valuation.
    pub fn from_parts(ctx: &Ctx, v: i64, u: Vec<BigInt>, prec: u32) -> Self {
        let prec = prec.min(ctx.n);
        let m = ctx.mask_for(prec);
        let u: Vec<BigInt> = u.iter().map(|x| red(x, &m)).collect();
        let w = u
            .iter()
            .filter_map(|x| x.trailing_zeros())
            .min()
            .map(|w| w as u32);
        match w {
            None => Self::zero_abs(ctx, v.saturating_add(prec as i64)),
            Some(w) => Qq {
                ctx: ctx.clone(),
                v: v + w as i64,
                prec: prec - w,
                u: u.iter().map(|x| x >> w).collect(),
            },
        }
    }

    pub fn from_zq(z: &ZqElem) -> Self {
        Self::from_parts(&z.ctx, 0, z.c.clone(), z.ctx.n)
    }

    pub fn from_int(ctx: &Ctx, x: impl Into<BigInt>) -> Self {
        let x: BigInt = x.into();
        if x.is_zero() {
            return Self::zero(ctx);
        }
        let w = x.trailing_zeros().unwrap();
        let u = &x >> w;
        let mut c = vec![BigInt::zero(); ctx.d];
        c[0] = red(&u, &ctx.mask);
        Qq {
            ctx: ctx.clone(),
            v: w as i64,
            prec: ctx.n,
            u: c,
        }
    }

    pub fn from_ratio(ctx: &Ctx, num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self> {
        Self::from_int(ctx, num).div(&Self::from_int(ctx, den))
    }

    pub fn one(ctx: &Ctx) -> Self {
        Self::from_int(ctx, 1)
    }

    pub fn teichmuller(ctx: &Ctx, r: u64) -> Self {
        Self::from_zq(&ZqElem::teichmuller(ctx, r))
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.u.is_empty()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.is_zero() && self.v == EXACT
    }

    /// Valuation; for a zero, its absolute precision.
    pub fn valuation(&self) -> i64 {
        self.v
    }

    /// Relative precision of the unit part (0 for zero).
    pub fn precision(&self) -> u32 {
        self.prec
    }

    /// Absolute precision v + prec.
    pub fn abs_precision(&self) -> i64 {
        if self.is_zero() {
            self.v
        } else {
            self.v + self.prec as i64
        }
    }

    /// Unit part coefficients (empty for zero).
    pub fn unit(&self) -> &[BigInt] {
        &self.u
    }

    pub fn residue(&self) -> u64 {
        if self.is_zero() || self.v > 0 {
            return 0;
        }
        assert!(self.v == 0, "residue of an element with negative valuation");
        self.ctx.residue(&self.u)
    }

    /// Claim `prec` bits for the unit part (zero-padding unknown bits).
    pub fn reseat(&self, prec: u32) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut r = self.clone();
        r.prec = prec.min(self.ctx.n);
        if r.prec < self.prec {
            let m = self.ctx.mask_for(r.prec);
            r.u = r.u.iter().map(|x| red(x, &m)).collect();
        }
        r
    }

    /// Cap the absolute precision at `abs`.
    pub fn truncate_abs(&self, abs: i64) -> Self {
        if self.is_zero() {
            return Self::zero_abs(&self.ctx, self.v.min(abs));
        }
        if abs <= self.v {
            return Self::zero_abs(&self.ctx, abs);
        }
        let p = (abs.saturating_sub(self.v) as u64).min(self.prec as u64) as u32;
        self.reseat(p)
    }

    pub fn neg(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut r = self.clone();
        r.u = self.ctx.neg_raw(&self.u, self.prec);
        r
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.is_zero() {
            return o.truncate_abs(self.v);
        }
        if o.is_zero() {
            return self.truncate_abs(o.v);
        }
        let (lo, hi) = if self.v <= o.v { (self, o) } else { (o, self) };
        let abs = lo.abs_precision().min(hi.abs_precision());
        let width = (abs - lo.v) as u32;
        let shift = hi.v - lo.v;
        if shift >= width as i64 {
            return lo.truncate_abs(abs);
        }
        let m = self.ctx.mask_for(width);
        let s: Vec<BigInt> = lo
            .u
            .iter()
            .zip(&hi.u)
            .map(|(a, b)| red(&(a + (b << shift as u32)), &m))
            .collect();
        Self::from_parts(&self.ctx, lo.v, s, width)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        match (self.is_zero(), o.is_zero()) {
            (true, true) => Self::zero_abs(&self.ctx, self.v.saturating_add(o.v)),
            (true, false) => Self::zero_abs(&self.ctx, self.v.saturating_add(o.v)),
            (false, true) => Self::zero_abs(&self.ctx, o.v.saturating_add(self.v)),
            (false, false) => {
                let p = self.prec.min(o.prec);
                Qq {
                    ctx: self.ctx.clone(),
                    v: self.v + o.v,
                    prec: p,
                    u: self.ctx.mul_raw(&self.u, &o.u, p),
                }
            }
        }
    }

    pub fn mul_int(&self, k: i64) -> Self {
        self.mul(&Self::from_int(&self.ctx, k))
    }

    pub fn square(&self) -> Self {
        self.mul(self)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(&self.ctx);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Qq {
            ctx: self.ctx.clone(),
            v: -self.v,
            prec: self.prec,
            u: self.ctx.inv_raw(&self.u, self.prec)?,
        })
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul(&o.inv()?))
    }

    /// Multiply by 2^k (k may be negative); exact.
    pub fn shift(&self, k: i64) -> Self {
        let mut r = self.clone();
        if !r.is_zero() || r.v != EXACT {
            r.v += k;
        }
        r
    }

    /// Square root 2^(v/2)·√u with √u ≡ 1 mod 4; needs v even and u ≡ 1 mod 8.
    /// Costs one bit of relative precision.
    pub fn sqrt_normalized(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::NotSquare("zero at finite precision".into()));
        }
        if self.v % 2 != 0 {
            return Err(Error::NotSquare("odd valuation".into()));
        }
        if self.prec < 4 {
            return Err(Error::InsufficientPrecision("square root of a low-precision unit".into()));
        }
        let r = self.ctx.sqrt_raw(&self.u, self.prec)?;
        let p = self.prec - 1;
        let m = self.ctx.mask_for(p);
        Ok(Qq {
            ctx: self.ctx.clone(),
            v: self.v / 2,
            prec: p,
            u: r.iter().map(|x| red(x, &m)).collect(),
        })
    }

    /// Some square root (either sign) of an element with even valuation whose unit part
    /// is a square. Costs a few bits of relative precision.
    pub fn sqrt(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::NotSquare("zero at finite precision".into()));
        }
        if self.v % 2 != 0 {
            return Err(Error::NotSquare("odd valuation".into()));
        }
        if self.prec < 6 {
            return Err(Error::InsufficientPrecision("square root of a low-precision unit".into()));
        }
        let ctx = &self.ctx;
        let gf = &ctx.gf;
        let unit = Qq {
            ctx: ctx.clone(),
            v: 0,
            prec: self.prec,
            u: self.u.clone(),
        };
        // x0^2 ≡ unit mod 2
        let x0 = Qq::from_parts(ctx, 0, ctx.lift_residue(gf.sqrt(ctx.residue(&self.u))), ctx.n);
        let r = unit.div(&x0.square())?;
        let e = r.sub(&Qq::one(ctx));
        if !e.is_zero() && e.valuation() < 2 {
            return Err(Error::NotSquare("unit is not a square mod 4".into()));
        }
        // (1 + 2y)^2 ≡ r mod 8 with y^2 + y ≡ (r − 1)/4 mod 2
        let e4 = if e.is_zero() || e.valuation() > 2 {
            0
        } else {
            ctx.residue(&e.u)
        };
        let y = gf
            .artin_schreier(e4)
            .ok_or_else(|| Error::NotSquare("unit is not a square mod 8".into()))?;
        let z = if y == 0 {
            Qq::one(ctx)
        } else {
            Qq::one(ctx).add(&Qq::from_parts(ctx, 1, ctx.lift_residue(y), ctx.n))
        };
        let s = r.div(&z.square())?.sqrt_normalized()?;
        Ok(s.mul(&z).mul(&x0).shift(self.v / 2))
    }

    pub fn frobenius(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut r = self.clone();
        r.u = self.ctx.frob_raw(&self.u, self.prec);
        r
    }

    pub fn frobenius_pow(&self, k: usize) -> Self {
        let mut x = self.clone();
        for _ in 0..(k % self.ctx.d) {
            x = x.frobenius();
        }
        x
    }

    /// Valuation of self − o, capped by the joint absolute precision.
    pub fn agreement(&self, o: &Self) -> i64 {
        self.sub(o).valuation()
    }

    /// The element as a Z_q element at the context precision (requires v ≥ 0).
    pub fn to_zq(&self) -> Result<ZqElem> {
        if self.is_zero() {
            return Ok(ZqElem::zero(&self.ctx));
        }
        if self.v < 0 {
            return Err(Error::Invalid("negative valuation".into()));
        }
        let sh = self.v as u32;
        if sh >= self.ctx.n {
            return Ok(ZqElem::zero(&self.ctx));
        }
        Ok(ZqElem::from_coeffs(
            &self.ctx,
            self.u.iter().map(|x| x << sh).collect(),
        ))
    }

    /// Balanced rational integer readout: requires v ≥ 0 and higher coordinates
    /// zero to the known precision.
    pub fn to_integer(&self) -> Option<BigInt> {
        if self.is_zero() {
            return Some(BigInt::zero());
        }
        if self.v < 0 || self.u[1..].iter().any(|x| !x.is_zero()) {
            return None;
        }
        let b = balanced(&self.u[..1], self.prec.max(1)).swap_remove(0);
        Some(b << self.v as u32)
    }

    /// Parse the `Display` format back.
    pub fn parse(ctx: &Ctx, s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |m: &str| Error::Invalid(format!("bad 2-adic literal '{s}': {m}"));
        if s == "zero" {
            return Ok(Self::zero(ctx));
        }
        if let Some(rest) = s.strip_prefix("zero n=") {
            let abs: i64 = rest.trim().parse().map_err(|_| bad("abs precision"))?;
            return Ok(Self::zero_abs(ctx, abs));
        }
        let mut parts = s.split_whitespace();
        let v = parts
            .next()
            .and_then(|p| p.strip_prefix("v="))
            .and_then(|p| p.parse::<i64>().ok())
            .ok_or_else(|| bad("valuation"))?;
        let n = parts
            .next()
            .and_then(|p| p.strip_prefix("n="))
            .and_then(|p| p.parse::<u32>().ok())
            .ok_or_else(|| bad("precision"))?;
        let coeffs = parts.next().ok_or_else(|| bad("coefficients"))?;
        if parts.next().is_some() {
            return Err(bad("trailing data"));
        }
        let u: Vec<BigInt> = coeffs
            .split(',')
            .map(|h| BigInt::parse_bytes(h.as_bytes(), 16).filter(|x| !x.is_negative()))
            .collect::<Option<_>>()
            .ok_or_else(|| bad("hex digits"))?;
        if u.len() != ctx.d || n == 0 || v.unsigned_abs() > 1 << 40 {
            return Err(bad("shape"));
        }
        let r = Self::from_parts(ctx, v, u, n);
        if r.is_zero() || r.v != v {
            return Err(bad("unit part is not a unit"));
        }
        Ok(r)
    }
}
