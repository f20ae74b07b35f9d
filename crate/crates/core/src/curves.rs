//! Genus-2 curves y^2 + h(x) y = f(x) over binary fields: Igusa normal form,
//! s-triples and absolute invariants, point counts and Frobenius polynomials.

use crate::error::{Error, Result};
use crate::gf2m::{
    poly_deg, poly_derivative, poly_eval, poly_factor_degrees, poly_gcd, poly_mul, poly_roots,
    f2_solve, Embedding, GfPoly, Gf2m,
};
use crate::poly::IntPoly;
use num_bigint::BigInt;
use rayon::prelude::*;
use std::fmt;

/// Largest exponent allowed for exhaustive enumeration of a field: 2^(d·e) ≤ 2^24.
pub const ENUM_GUARD_BITS: u32 = 24;

/// y^2 + h(x) y = f(x) over F_{2^d}, with deg h ≤ 3 and deg f ≤ 6.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveChar2 {
    pub field: Gf2m,
    pub h: GfPoly,
    pub f: GfPoly,
}

/// (s1, s2, s3): elementary symmetric functions of the normal-form parameters (a, b, c).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SigmaTriple {
    pub s1: u64,
    pub s2: u64,
    pub s3: u64,
}

/// Char-2 absolute invariants (j1, j2, j4).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AbsInvChar2 {
    pub j1: u64,
    pub j2: u64,
    pub j4: u64,
}

impl AbsInvChar2 {
    /// j3 = j2^2 / j1.
    pub fn j3(&self, f: &Gf2m) -> u64 {
        f.div(f.sqr(self.j2), self.j1).expect("j1 ≠ 0")
    }

    /// j5 = j2 j3 / j1.
    pub fn j5(&self, f: &Gf2m) -> u64 {
        f.div(f.mul(self.j2, self.j3(f)), self.j1).expect("j1 ≠ 0")
    }

    /// Apply the 2^k-power Frobenius to every invariant.
    pub fn frobenius(&self, f: &Gf2m, k: u32) -> Self {
        AbsInvChar2 {
            j1: f.frob(self.j1, k),
            j2: f.frob(self.j2, k),
            j4: f.frob(self.j4, k),
        }
    }
}

fn trimmed(mut p: GfPoly) -> GfPoly {
    while p.last() == Some(&0) {
        p.pop();
    }
    p
}

/// Smallest extension F_{2^{dk}} in which `p` splits, with the embedding of the base.
pub fn splitting_field(field: &Gf2m, p: &[u64]) -> Result<(Gf2m, Embedding)> {
    let sq = squarefree_part(field, p);
    let k = poly_factor_degrees(field, &sq)
        .into_iter()
        .fold(1usize, num_integer::lcm);
    extension(field, k as u32)
}

/// F_{2^{dk}} with its default modulus and the embedding of `field`.
pub fn extension(field: &Gf2m, k: u32) -> Result<(Gf2m, Embedding)> {
    let big = if k == 1 {
        field.clone()
    } else {
        Gf2m::new(field.degree() * k)?
    };
    let emb = Embedding::new(field, &big)?;
    Ok((big, emb))
}

fn squarefree_part(field: &Gf2m, p: &[u64]) -> GfPoly {
    if poly_deg(p) <= 0 {
        return vec![1];
    }
    let dp = poly_derivative(p);
    if dp.is_empty() {
        // p is a square: p = g(x)^2 with g's coefficients square roots
        let g: GfPoly = p.iter().step_by(2).map(|&c| field.sqrt(c)).collect();
        return squarefree_part(field, &trimmed(g));
    }
    let g = poly_gcd(field, p, &dp);
    let (q, _) = crate::gf2m::poly_divrem(field, p, &g);
    q
}

/// Roots with multiplicity, sorted.
pub fn roots_with_multiplicity(field: &Gf2m, p: &[u64]) -> Vec<u64> {
    let mut out = Vec::new();
    let mut rest = trimmed(p.to_vec());
    for r in poly_roots(field, &rest.clone()) {
        while poly_deg(&rest) > 0 && poly_eval(field, &rest, r) == 0 {
            rest = crate::gf2m::poly_divrem(field, &rest, &[r, 1]).0;
            out.push(r);
        }
    }
    out.sort_unstable();
    out
}

impl CurveChar2 {
    /// Build and check a genus-2 curve: deg h ≤ 3, deg f ≤ 6, max(2 deg h, deg f) ∈ {5, 6},
    /// and nonsingular at every point of the projective model.
    pub fn new(field: Gf2m, h: GfPoly, f: GfPoly) -> Result<Self> {
        let h = trimmed(h);
        let f = trimmed(f);
        if h.iter().chain(&f).any(|&c| !field.contains(c)) {
            return Err(Error::Invalid("coefficient outside the field".into()));
        }
        let (dh, df) = (poly_deg(&h), poly_deg(&f));
        if h.is_empty() || dh > 3 || df > 6 || !(5..=6).contains(&(2 * dh).max(df)) {
            return Err(Error::Invalid(format!(
                "not a genus-2 model (deg h = {dh}, deg f = {df})"
            )));
        }
        let c = CurveChar2 { field, h, f };
        if !c.is_nonsingular()? {
            return Err(Error::Degenerate("singular curve".into()));
        }
        Ok(c)
    }

    pub fn q(&self) -> u64 {
        self.field.order()
    }

    pub fn deg_h(&self) -> isize {
        poly_deg(&self.h)
    }

    pub fn deg_f(&self) -> isize {
        poly_deg(&self.f)
    }

    fn coeff(p: &[u64], i: usize) -> u64 {
        p.get(i).copied().unwrap_or(0)
    }

    /// Reversed model at infinity: x ↦ 1/x, y ↦ y/x^3.
    fn reversed(&self) -> (GfPoly, GfPoly) {
        let h: GfPoly = (0..=3).map(|i| Self::coeff(&self.h, 3 - i)).collect();
        let f: GfPoly = (0..=6).map(|i| Self::coeff(&self.f, 6 - i)).collect();
        (trimmed(h), trimmed(f))
    }

    fn is_nonsingular(&self) -> Result<bool> {
        let check = |h: &GfPoly, f: &GfPoly, roots_at_zero_only: bool| -> Result<bool> {
            if roots_at_zero_only {
                if Self::coeff(h, 0) != 0 {
                    return Ok(true);
                }
                return Ok(singular_condition(&self.field, h, f, 0) != 0);
            }
            let (big, emb) = splitting_field(&self.field, h)?;
            let hb: GfPoly = h.iter().map(|&c| emb.map(c)).collect();
            let fb: GfPoly = f.iter().map(|&c| emb.map(c)).collect();
            for r in poly_roots(&big, &hb) {
                if singular_condition(&big, &hb, &fb, r) == 0 {
                    return Ok(false);
                }
            }
            Ok(true)
        };
        let (hr, fr) = self.reversed();
        Ok(check(&self.h, &self.f, false)? && check(&hr, &fr, true)?)
    }

    /// An isomorphic model with one point at infinity (deg h ≤ 2, deg f = 5), which
    /// exists iff some Weierstrass point is rational.
    pub fn imaginary_model(&self) -> Result<CurveChar2> {
        let f = &self.field;
        let (h, fp) = if self.deg_h() <= 2 {
            let mut fp = self.f.clone();
            kill_sextic(f, &self.h, &mut fp);
            (self.h.clone(), fp)
        } else {
            let rho = *poly_roots(f, &self.h)
                .first()
                .ok_or_else(|| Error::Degenerate("no rational Weierstrass point".into()))?;
            move_root_to_infinity(f, &self.h, &self.f, rho)
        };
        CurveChar2::new(f.clone(), h, fp)
    }

    pub fn is_imaginary(&self) -> bool {
        self.deg_h() <= 2 && self.deg_f() == 5
    }

    /// The same curve over an extension field.
    pub fn base_change(&self, emb: &Embedding) -> CurveChar2 {
        CurveChar2 {
            field: emb.big.clone(),
            h: self.h.iter().map(|&c| emb.map(c)).collect(),
            f: self.f.iter().map(|&c| emb.map(c)).collect(),
        }
    }

    /// The quadratic twist y^2 + hy = f + c h^2 with Tr(c) = 1.
    pub fn twist(&self) -> CurveChar2 {
        let c = self
            .field
            .elements()
            .find(|&c| self.field.trace(c) == 1)
            .unwrap();
        let h2 = poly_mul(&self.field, &self.h, &self.h);
        let f = crate::gf2m::poly_add(&self.f, &crate::gf2m::poly_scale(&self.field, &h2, c));
        CurveChar2 {
            field: self.field.clone(),
            h: self.h.clone(),
            f,
        }
    }

    /// Normal-form parameters at the three Weierstrass points, (A, B, C) over the
    /// splitting field of h, for a model where h has three distinct roots on P^1.
    /// A belongs to the point at infinity of a degree-2 model, B and C to ρ0 < ρ1.
    pub fn residues(&self) -> Result<(Embedding, [u64; 3])> {
        let (big, emb) = splitting_field(&self.field, &self.h)?;
        let c = self.base_change(&emb);
        let (h, fp) = match c.deg_h() {
            2 | 3 => deg2_model(&big, &c.h, &c.f),
            _ => return Err(Error::Degenerate("fewer than three Weierstrass points".into())),
        };
        if poly_roots(&big, &h).len() != 2 || poly_deg(&fp) != 5 {
            return Err(Error::Degenerate("fewer than three Weierstrass points".into()));
        }
        Ok((emb, raw_residues(&big, &h, &fp)?))
    }

    /// The s-triple of the curve, in the base field.
    pub fn sigma_triple(&self) -> Result<SigmaTriple> {
        let (emb, [a, b, c]) = self.residues()?;
        let f = &emb.big;
        let s1 = a ^ b ^ c;
        let s2 = f.mul(a, b) ^ f.mul(b, c) ^ f.mul(c, a);
        let s3 = f.mul(f.mul(a, b), c);
        let back = |x| {
            emb.preimage(x)
                .ok_or_else(|| Error::Inconsistent("s-triple not in the base field".into()))
        };
        Ok(SigmaTriple {
            s1: back(s1)?,
            s2: back(s2)?,
            s3: back(s3)?,
        })
    }

    pub fn absolute_invariants(&self) -> Result<AbsInvChar2> {
        abs_from_sigma(&self.field, &self.sigma_triple()?)
    }

    /// Ordinary iff the s-triple exists with s3 ≠ 0 (J2 ≠ 0 for these models).
    pub fn is_ordinary(&self) -> bool {
        self.sigma_triple().map(|s| s.s3 != 0).unwrap_or(false)
    }

    /// #C(F_{q^e}) by enumerating x-coordinates.
    pub fn count_points(&self, e: u32) -> Result<u64> {
        let bits = self.field.degree() * e;
        if bits > ENUM_GUARD_BITS {
            return Err(Error::Guard(format!("2^{bits} points to enumerate")));
        }
        let (big, emb) = extension(&self.field, e)?;
        let c = self.base_change(&emb);
        let affine: u64 = (0..big.order())
            .into_par_iter()
            .map(|x| {
                let hx = poly_eval(&big, &c.h, x);
                let fx = poly_eval(&big, &c.f, x);
                if hx == 0 {
                    1
                } else {
                    let ih = big.inv(hx).unwrap();
                    if big.trace(big.mul(fx, big.sqr(ih))) == 0 {
                        2
                    } else {
                        0
                    }
                }
            })
            .sum();
        let h3 = Self::coeff(&c.h, 3);
        let f6 = Self::coeff(&c.f, 6);
        let inf = if h3 == 0 {
            1
        } else if big.trace(big.mul(f6, big.sqr(big.inv(h3)?))) == 0 {
            2
        } else {
            0
        };
        Ok(affine + inf)
    }

    /// x^4 + a1 x^3 + a2 x^2 + q a1 x + q^2 from the counts over F_q and F_{q^2}.
    pub fn frobenius_charpoly(&self) -> Result<IntPoly> {
        let q = self.q() as i128;
        let n1 = self.count_points(1)? as i128;
        let n2 = self.count_points(2)? as i128;
        weil_from_counts(q, n1, n2)
    }
}

/// Frobenius polynomial from N1, N2.
pub fn weil_from_counts(q: i128, n1: i128, n2: i128) -> Result<IntPoly> {
    let a1 = n1 - (q + 1);
    let t = n2 - q * q - 1 + a1 * a1;
    if t % 2 != 0 {
        return Err(Error::Inconsistent("non-integral a2: point counts are wrong".into()));
    }
    let a2 = t / 2;
    let p = IntPoly::new(
        [q * q, q * a1, a2, a1, 1]
            .iter()
            .map(|&c| BigInt::from(c))
            .collect(),
    );
    if !weil_check(&p, q as f64) {
        return Err(Error::Inconsistent(format!("{p} is not a q-Weil polynomial")));
    }
    Ok(p)
}

/// Complex roots of x^4 + a1 x^3 + a2 x^2 + q a1 x + q^2 via y = x + q/x.
pub fn weil_roots(p: &IntPoly, q: f64) -> Option<Vec<(f64, f64)>> {
    let a1: f64 = p.coeff(3).to_string().parse().ok()?;
    let a2: f64 = p.coeff(2).to_string().parse().ok()?;
    let disc = a1 * a1 - 4.0 * (a2 - 2.0 * q);
    if disc < -1e-9 * (a1 * a1 + q).abs() {
        return None;
    }
    let sd = disc.max(0.0).sqrt();
    let mut out = Vec::new();
    for y in [(-a1 + sd) / 2.0, (-a1 - sd) / 2.0] {
        let r = y * y - 4.0 * q;
        if r <= 0.0 {
            let im = (-r).sqrt() / 2.0;
            out.push((y / 2.0, im));
            out.push((y / 2.0, -im));
        } else {
            let s = r.sqrt();
            out.push(((y + s) / 2.0, 0.0));
            out.push(((y - s) / 2.0, 0.0));
        }
    }
    Some(out)
}

/// All roots have absolute value √q within 1e-9 relative, and the shape is right.
pub fn weil_check(p: &IntPoly, q: f64) -> bool {
    if p.degree() != 4 {
        return false;
    }
    let qi = BigInt::from(q as i64);
    if p.coeff(4) != BigInt::from(1) || p.coeff(0) != &qi * &qi || p.coeff(1) != &qi * p.coeff(3)
    {
        return false;
    }
    match weil_roots(p, q) {
        None => false,
        Some(rs) => rs
            .iter()
            .all(|(re, im)| ((re * re + im * im).sqrt() / q.sqrt() - 1.0).abs() < 1e-9),
    }
}

/// h'(ρ)^2 f(ρ) + f'(ρ)^2 at a root ρ of h; zero iff the point over ρ is singular.
fn singular_condition(f: &Gf2m, h: &[u64], fp: &[u64], rho: u64) -> u64 {
    let dh = poly_eval(f, &poly_derivative(h), rho);
    let df = poly_eval(f, &poly_derivative(fp), rho);
    f.mul(f.sqr(dh), poly_eval(f, fp, rho)) ^ f.sqr(df)
}

/// Send the root ρ of a cubic h to infinity (x = ρ + 1/X, y = Y/X^3) and remove the
/// X^6 term of the new f, giving a model with deg h = 2 and deg f ≤ 5.
fn move_root_to_infinity(f: &Gf2m, h: &[u64], fp: &[u64], rho: u64) -> (GfPoly, GfPoly) {
    // Σ c_i (ρX + 1)^i X^(n−i)
    let transform = |p: &[u64], n: usize| -> GfPoly {
        let mut out = vec![0u64; n + 1];
        let lin: GfPoly = vec![1, rho];
        let mut pw: GfPoly = vec![1];
        for i in 0..=n {
            let c = p.get(i).copied().unwrap_or(0);
            if c != 0 {
                for (k, &t) in pw.iter().enumerate() {
                    out[k + n - i] ^= f.mul(c, t);
                }
            }
            pw = poly_mul(f, &pw, &lin);
        }
        trimmed(out)
    };
    let ht = transform(h, 3);
    let mut ft = transform(fp, 6);
    kill_sextic(f, &ht, &mut ft);
    (ht, ft)
}

/// y ↦ y + √f6 x^3 removes the x^6 term of f when deg h ≤ 3.
fn kill_sextic(f: &Gf2m, h: &[u64], fp: &mut GfPoly) {
    fp.resize(7, 0);
    let c = f.sqrt(fp[6]);
    fp[6] = 0;
    for (k, &t) in h.iter().enumerate() {
        fp[k + 3] ^= f.mul(c, t);
    }
    *fp = trimmed(std::mem::take(fp));
}

/// Model with deg h = 2 (a root of a cubic h goes to infinity) and no x^6 term.
fn deg2_model(f: &Gf2m, h: &[u64], fp: &[u64]) -> (GfPoly, GfPoly) {
    if poly_deg(h) == 3 {
        let rho = poly_roots(f, h)[0];
        move_root_to_infinity(f, h, fp, rho)
    } else {
        let mut fp = fp.to_vec();
        kill_sextic(f, h, &mut fp);
        (h.to_vec(), fp)
    }
}

/// Residues of a deg-2 model without the degree checks. Additive in f for fixed h.
fn raw_residues(f: &Gf2m, h: &[u64], fp: &[u64]) -> Result<[u64; 3]> {
    let roots = poly_roots(f, h);
    if roots.len() != 2 {
        return Err(Error::Degenerate("h needs two distinct roots".into()));
    }
    let mut fp = fp.to_vec();
    fp.resize(6, 0);
    residues_deg2(f, h, &fp, roots[0], roots[1])
}

/// A curve over `base` itself whose s-triple is `s`. The Weierstrass points of h are
/// chosen to have the same Galois structure as the roots of x^3 + s1 x^2 + s2 x + s3,
/// and f is found by linear algebra over F_2 (the residues are additive in f).
pub fn model_over_base(base: &Gf2m, s: &SigmaTriple) -> Result<CurveChar2> {
    if s.s3 == 0 {
        return Err(Error::Degenerate("s3 = 0".into()));
    }
    let cubic: GfPoly = vec![s.s3, s.s2, s.s1, 1];
    let d = base.degree();
    let h: GfPoly = match poly_roots(base, &cubic).len() {
        0 => base
            .elements()
            .map(|c| vec![c, 1, 0, 1])
            .find(|h| poly_roots(base, h).is_empty())
            .ok_or_else(|| Error::Degenerate("no irreducible cubic".into()))?,
        1 if poly_factor_degrees(base, &cubic).contains(&2) => {
            let e = base.elements().find(|&c| base.trace(c) == 1).unwrap();
            vec![e, 1, 1]
        }
        _ => vec![0, 1, 1],
    };
    let (big, emb) = splitting_field(base, &h)?;
    if 3 * big.degree() > 64 || 7 * d > 64 {
        return Err(Error::Guard(format!("degree {d} too large for the linear solve")));
    }
    let hb: GfPoly = h.iter().map(|&c| emb.map(c)).collect();
    let cb: GfPoly = cubic.iter().map(|&c| emb.map(c)).collect();
    let roots = roots_with_multiplicity(&big, &cb);
    if roots.len() != 3 {
        return Err(Error::NoSplit);
    }
    let k = big.degree();
    let pack = |r: [u64; 3]| r[0] | r[1] << k | r[2] << (2 * k);
    let mut cols = Vec::with_capacity(7 * d as usize);
    for i in 0..7 {
        for bit in 0..d {
            let mut fv = vec![0u64; 7];
            fv[i] = emb.map(1 << bit);
            let (h2, f2) = deg2_model(&big, &hb, &fv);
            cols.push(pack(raw_residues(&big, &h2, &f2)?));
        }
    }
    for perm in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
        let target = pack([roots[perm[0]], roots[perm[1]], roots[perm[2]]]);
        let Some(sol) = f2_solve(&cols, target) else {
            continue;
        };
        let f: GfPoly = (0..7)
            .map(|i| (sol >> (i as u32 * d)) & ((1u64 << d) - 1))
            .collect();
        if let Ok(c) = CurveChar2::new(base.clone(), h.clone(), trimmed(f)) {
            if c.sigma_triple().ok() == Some(*s) {
                return Ok(c);
            }
        }
    }
    Err(Error::Inconsistent("no model over the base field found".into()))
}

/// Residues of a model with deg h = 2 having roots ρ0, ρ1 and deg f = 5.
fn residues_deg2(f: &Gf2m, h: &[u64], fp: &[u64], r0: u64, r1: u64) -> Result<[u64; 3]> {
    let ih2 = f.inv(h[2])?;
    let ih2sq = f.sqr(ih2);
    let fm: GfPoly = fp.iter().map(|&c| f.mul(c, ih2sq)).collect();
    let delta = r0 ^ r1;
    let a = f.mul(fm[5], delta);
    let d2 = f.inv(f.sqr(delta))?;
    let d3 = f.mul(d2, f.inv(delta)?);
    let dfm = poly_derivative(&fm);
    let res = |r: u64| f.mul(poly_eval(f, &dfm, r), d3) ^ f.mul(f.sqrt(poly_eval(f, &fm, r)), d2);
    Ok([a, res(r0), res(r1)])
}

/// The normal-form curve y^2 + (x^2 + x) y = (x^2 + x)(a x^3 + a x^2 + (b+c) x + b) over
/// `ext`, where (a, b, c) are the roots of x^3 + s1 x^2 + s2 x + s3 in increasing order.
pub fn normal_form_curve(base: &Gf2m, s: &SigmaTriple, ext: &Gf2m) -> Result<CurveChar2> {
    if s.s3 == 0 {
        return Err(Error::Degenerate("s3 = 0".into()));
    }
    let emb = Embedding::new(base, ext)?;
    let cubic: GfPoly = vec![emb.map(s.s3), emb.map(s.s2), emb.map(s.s1), 1];
    let roots = roots_with_multiplicity(ext, &cubic);
    if roots.len() != 3 {
        return Err(Error::NoSplit);
    }
    let (a, b, c) = (roots[0], roots[1], roots[2]);
    Ok(normal_form_from_abc(ext, a, b, c))
}

/// Normal form from its parameters a, b, c (all nonzero for a nonsingular curve).
pub fn normal_form_from_abc(field: &Gf2m, a: u64, b: u64, c: u64) -> CurveChar2 {
    CurveChar2 {
        field: field.clone(),
        h: vec![0, 1, 1],
        f: trimmed(vec![0, b, c, a ^ b ^ c, 0, a]),
    }
}

/// (j1, j2, j4) = (1/s3^2, s1^2/s3^2, (s2^2 + s1^6 + s1^8)/s3^2).
pub fn abs_from_sigma(f: &Gf2m, s: &SigmaTriple) -> Result<AbsInvChar2> {
    if s.s3 == 0 {
        return Err(Error::Degenerate("s3 = 0".into()));
    }
    let i = f.inv(f.sqr(s.s3))?;
    let s1sq = f.sqr(s.s1);
    let s1p6 = f.mul(s1sq, f.sqr(s1sq));
    let s1p8 = f.sqr(f.sqr(s1sq));
    Ok(AbsInvChar2 {
        j1: i,
        j2: f.mul(s1sq, i),
        j4: f.mul(f.sqr(s.s2) ^ s1p6 ^ s1p8, i),
    })
}

/// Inverse of `abs_from_sigma`.
pub fn sigma_from_abs(f: &Gf2m, j: &AbsInvChar2) -> Result<SigmaTriple> {
    if j.j1 == 0 {
        return Err(Error::Degenerate("j1 = 0".into()));
    }
    let ij1 = f.inv(j.j1)?;
    let r = f.mul(j.j2, ij1);
    let sr = f.sqrt(r);
    Ok(SigmaTriple {
        s1: sr,
        s2: f.sqrt(f.mul(j.j4, ij1)) ^ f.sqr(r) ^ f.mul(r, sr),
        s3: f.inv(f.sqrt(j.j1))?,
    })
}

impl fmt::Display for CurveChar2 {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let hex = |p: &[u64]| {
            p.iter()
                .map(|c| format!("{c:x}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        writeln!(out, "d = {}", self.field.degree())?;
        writeln!(out, "modulus = {:x}", self.field.modulus())?;
        writeln!(out, "h = {}", hex(&self.h))?;
        writeln!(out, "f = {}", hex(&self.f))
    }
}

/// Parse the curve text format written by `Display`: `d`, `modulus` (hex, optional),
/// `h` and `f` as hex coefficient lists low to high. `#` starts a comment.
pub fn parse_curve(text: &str) -> Result<CurveChar2> {
    let mut d = None;
    let mut modulus = None;
    let mut h = None;
    let mut f = None;
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(no + 1, "expected key = value"))?;
        let v = v.trim();
        let hexlist = |v: &str| -> Result<GfPoly> {
            v.split_whitespace()
                .map(|t| u64::from_str_radix(t, 16).map_err(|_| Error::parse(no + 1, "bad hex")))
                .collect()
        };
        match k.trim() {
            "d" => d = Some(v.parse::<u32>().map_err(|_| Error::parse(no + 1, "bad degree"))?),
            "modulus" => {
                modulus =
                    Some(u64::from_str_radix(v, 16).map_err(|_| Error::parse(no + 1, "bad hex"))?)
            }
            "h" => h = Some(hexlist(v)?),
            "f" => f = Some(hexlist(v)?),
            other => return Err(Error::parse(no + 1, format!("unknown key '{other}'"))),
        }
    }
    let d = d.ok_or_else(|| Error::parse(0, "missing d"))?;
    let field = match modulus {
        Some(m) => {
            let g = Gf2m::with_modulus(m)?;
            if g.degree() != d {
                return Err(Error::parse(0, "modulus degree differs from d"));
            }
            g
        }
        None => Gf2m::new(d)?,
    };
    if field.degree() > 32 {
        return Err(Error::Invalid("field degree above 32".into()));
    }
    let h = h.ok_or_else(|| Error::parse(0, "missing h"))?;
    let f = f.ok_or_else(|| Error::parse(0, "missing f"))?;
    if h.len() > 8 || f.len() > 8 {
        return Err(Error::Invalid("too many coefficients".into()));
    }
    CurveChar2::new(field, h, f)
}
