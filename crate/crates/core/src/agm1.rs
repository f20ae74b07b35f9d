//! Genus-1 AGM: canonical lifts of ordinary curves y^2 + xy = x^3 + a6 over F_{2^d},
//! j-invariants, Hilbert class polynomials, and the X0(8) parametrisation.

use crate::error::{Error, Result};
use crate::gf2m::Gf2m;
use crate::padic::{Ctx, PadicCtx, Qq};
use crate::poly::IntPoly;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

/// Extra bits carried by the genus-1 driver beyond the requested precision.
pub const GENUS1_MARGIN: u32 = 48;

#[derive(Clone, Debug)]
pub struct AgmPair {
    pub a: Qq,
    pub b: Qq,
}

/// Primitive positive definite form a x^2 + b xy + c y^2.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

/// ((a+b)/2, b √(a/b)) with the square root ≡ 1 mod 4.
pub fn agm_step(p: &AgmPair) -> Result<AgmPair> {
    let r = p.a.div(&p.b)?;
    let one = Qq::one(r.ctx());
    if r.valuation() != 0 || r.sub(&one).valuation() < 3 {
        return Err(Error::Congruence("a/b is not 1 mod 8".into()));
    }
    Ok(AgmPair {
        a: p.a.add(&p.b).shift(-1),
        b: p.b.mul(&r.sqrt_normalized()?),
    })
}

/// j = 256 (λ^2 − λ + 1)^3 / (λ^2 (λ − 1)^2) with λ = b^2 / a^2.
pub fn j_from_pair(p: &AgmPair) -> Result<Qq> {
    let lam = p.b.square().div(&p.a.square())?;
    j_from_lambda(&lam)
}

/// Legendre j-invariant; must come out integral.
pub fn j_from_lambda(lam: &Qq) -> Result<Qq> {
    let ctx = lam.ctx();
    let one = Qq::one(ctx);
    let lm1 = lam.sub(&one);
    if lam.is_zero() || lm1.is_zero() {
        return Err(Error::Degenerate("λ ∈ {0, 1}".into()));
    }
    let num = lam.square().sub(lam).add(&one).pow(3).shift(8);
    let den = lam.square().mul(&lm1.square());
    let j = num.div(&den)?;
    if !j.is_zero() && j.valuation() < 0 {
        return Err(Error::Inconsistent("j-invariant is not integral".into()));
    }
    Ok(j)
}

/// All primitive reduced forms of discriminant D.
pub fn reduced_forms(d: i64) -> Result<Vec<QuadForm>> {
    if d >= 0 || d.rem_euclid(4) > 1 {
        return Err(Error::Invalid(format!("{d} is not a negative discriminant")));
    }
    let mut out = Vec::new();
    let mut a = 1i64;
    while 3 * a * a <= -d {
        for b in -a..=a {
            if (b - d).rem_euclid(2) != 0 {
                continue;
            }
            let num = b * b - d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || ((b.abs() == a || a == c) && b < 0) {
                continue;
            }
            if a.gcd(&b).gcd(&c) != 1 {
                continue;
            }
            out.push(QuadForm { a, b, c });
        }
        a += 1;
    }
    Ok(out)
}

/// Coefficient-size bound for H_D in bits: (π√|D| / ln 10 · Σ 1/a + 10) decimal digits.
pub fn precision_estimate(d: i64) -> Result<u32> {
    let forms = reduced_forms(d)?;
    let s: f64 = forms.iter().map(|f| 1.0 / f.a as f64).sum();
    let digits = std::f64::consts::PI * (-d as f64).sqrt() / std::f64::consts::LN_10 * s + 10.0;
    Ok((digits * std::f64::consts::LOG2_10).ceil() as u32)
}

/// Π (X − j_i) with every coefficient checked to lie in Z_2 and rounded to a balanced
/// integer. The rounding at N bits must agree with the rounding at the full available
/// precision, otherwise N is too small for the coefficients.
pub fn class_poly_assemble(js: &[Qq], n: u32) -> Result<IntPoly> {
    let ctx = js
        .first()
        .ok_or_else(|| Error::Invalid("empty orbit".into()))?
        .ctx()
        .clone();
    let mut coeffs = vec![Qq::one(&ctx)];
    for j in js {
        let mut next = vec![Qq::zero(&ctx); coeffs.len() + 1];
        for (i, c) in coeffs.iter().enumerate() {
            next[i + 1] = next[i + 1].add(c);
            next[i] = next[i].sub(&c.mul(j));
        }
        coeffs = next;
    }
    let mut out = Vec::with_capacity(coeffs.len());
    for c in &coeffs {
        let abs = c.abs_precision();
        if abs < n as i64 {
            return Err(Error::InsufficientPrecision(format!(
                "coefficient known to {abs} bits only"
            )));
        }
        let full = rational_readout(c)?;
        let low = balanced_mod(&full, n);
        if low != full {
            return Err(Error::InsufficientPrecision(format!(
                "coefficient {full} does not fit in {n} bits"
            )));
        }
        out.push(full);
    }
    Ok(IntPoly::new(out))
}

fn rational_readout(c: &Qq) -> Result<BigInt> {
    if c.is_zero() {
        return Ok(BigInt::zero());
    }
    if c.valuation() < 0 {
        return Err(Error::InsufficientPrecision("coefficient is not integral".into()));
    }
    if c.unit()[1..].iter().any(|x| !x.is_zero()) {
        return Err(Error::InsufficientPrecision(
            "coefficient does not lie in Z_2".into(),
        ));
    }
    c.to_integer()
        .ok_or_else(|| Error::InsufficientPrecision("coefficient readout".into()))
}

fn balanced_mod(x: &BigInt, n: u32) -> BigInt {
    let m = BigInt::from(1) << n;
    let r = x.mod_floor(&m);
    if r > (&m >> 1u32) {
        r - m
    } else {
        r
    }
}

/// u = 4(t+1)/(t−1) and j = (u^4 + 224u^2 + 256)^3 / (u^2 (u+4)^4 (u−4)^4).
pub fn x08_chain(t: &Qq) -> Result<(Qq, Qq)> {
    let ctx = t.ctx();
    let one = Qq::one(ctx);
    let tm1 = t.sub(&one);
    if tm1.is_zero() {
        return Err(Error::Degenerate("t = 1".into()));
    }
    let u = t.add(&one).shift(2).div(&tm1)?;
    Ok((u.clone(), j_from_x08(&u)?))
}

/// j from the X0(8) coordinate u.
pub fn j_from_x08(u: &Qq) -> Result<Qq> {
    let ctx = u.ctx();
    let four = Qq::from_int(ctx, 4);
    let (up, um) = (u.add(&four), u.sub(&four));
    if u.is_zero() || up.is_zero() || um.is_zero() {
        return Err(Error::Degenerate("u ∈ {0, ±4}".into()));
    }
    let u2 = u.square();
    let num = u2
        .square()
        .add(&u2.mul_int(224))
        .add(&Qq::from_int(ctx, 256))
        .pow(3);
    let den = u2.mul(&up.pow(4)).mul(&um.pow(4));
    num.div(&den)
}

/// t = (u + 4)/(u − 4).
pub fn t_from_x08(u: &Qq) -> Result<Qq> {
    let four = Qq::from_int(u.ctx(), 4);
    u.add(&four).div(&u.sub(&four))
}

/// Result of lifting one curve: its j-orbit under Frobenius.
#[derive(Clone, Debug)]
pub struct Genus1Lift {
    pub a6: u64,
    pub steps: usize,
    pub js: Vec<Qq>,
}

/// Iterate the AGM from (1 + 4β^2, 1 − 4β^2), β the Teichmüller lift of √a6, until the
/// j-invariants of consecutive d-step cycles agree to `target` bits.
pub fn agm_canonical_j(ctx: &Ctx, a6: u64, target: u32) -> Result<(Qq, usize)> {
    let gf = ctx.gf();
    let d = gf.degree() as usize;
    let beta = Qq::teichmuller(ctx, gf.sqrt(a6));
    let b2 = beta.square().shift(2);
    let one = Qq::one(ctx);
    let mut p = AgmPair {
        a: one.add(&b2),
        b: one.sub(&b2),
    };
    let n = ctx.precision();
    let mut prev: Option<Qq> = None;
    let max_steps = 4 * (n as usize + 16) + 4 * d;
    let mut steps = 0;
    while steps < max_steps {
        for _ in 0..d {
            let q = agm_step(&p)?;
            p = AgmPair {
                a: q.a.reseat(n),
                b: q.b.reseat(n),
            };
            steps += 1;
        }
        let j = j_from_pair(&p)?;
        if let Some(pj) = &prev {
            let agree = j.agreement(pj);
            if agree >= target as i64 {
                return Ok((j.truncate_abs(agree), steps));
            }
        }
        prev = Some(j);
    }
    Err(Error::NoConvergence(steps))
}

/// Ordinary curves y^2 + xy = x^3 + a6 over F_{2^d} with Frobenius trace t satisfying
/// t^2 − 4q = D; the j-orbits of these curves are Galois orbits of roots of H_D.
pub fn genus1_curves(disc: i64, max_d: u32) -> Result<Vec<(Gf2m, u64, i64)>> {
    if disc.rem_euclid(8) != 1 || disc >= 0 {
        return Err(Error::Invalid("the AGM needs D < 0 with D ≡ 1 mod 8".into()));
    }
    let mut out = Vec::new();
    for d in 1..=max_d {
        let q = 1i64 << d;
        let t2 = disc + 4 * q;
        if t2 < 0 {
            continue;
        }
        let t = (t2 as f64).sqrt().round() as i64;
        if t * t != t2 {
            continue;
        }
        let gf = Gf2m::new(d)?;
        for a6 in 1..gf.order() {
            let tr = elliptic_trace(&gf, a6);
            if tr.abs() == t {
                out.push((gf.clone(), a6, tr));
            }
        }
        if !out.is_empty() {
            break;
        }
    }
    Ok(out)
}

/// Frobenius trace of y^2 + xy = x^3 + a6 by counting.
pub fn elliptic_trace(gf: &Gf2m, a6: u64) -> i64 {
    // x = 0: one point (y^2 = a6); x ≠ 0: two points iff Tr(x + a6/x^2) = 0
    let mut n = 2i64; // infinity and x = 0
    for x in 1..gf.order() {
        let c = x ^ gf.mul(a6, gf.sqr(gf.inv(x).unwrap()));
        if gf.trace(c) == 0 {
            n += 2;
        }
    }
    gf.order() as i64 + 1 - n
}

/// H_D for D ≡ 1 mod 8 by AGM lifting, recovered modulo 2^N.
pub fn hilbert_class_poly(disc: i64, n: u32) -> Result<(IntPoly, Vec<Genus1Lift>)> {
    let h = reduced_forms(disc)?.len();
    let curves = genus1_curves(disc, 2 * h as u32 + 8)?;
    let (gf, _, _) = curves
        .first()
        .ok_or_else(|| Error::Invalid(format!("no curve of the family has t^2 − 4q = {disc}")))?;
    let ctx = PadicCtx::new(gf, n + GENUS1_MARGIN)?;
    let mut lifts: Vec<Genus1Lift> = Vec::new();
    let mut js: Vec<Qq> = Vec::new();
    let target = n + GENUS1_MARGIN / 2;
    for (_, a6, _) in &curves {
        if js.len() >= h {
            break;
        }
        let (j, steps) = agm_canonical_j(&ctx, *a6, target)?;
        if js.iter().any(|x| x.agreement(&j) >= target as i64) {
            continue;
        }
        let mut orbit = vec![j.clone()];
        let mut s = j.frobenius();
        while s.agreement(&j) < target as i64 {
            orbit.push(s.clone());
            s = s.frobenius();
        }
        js.extend(orbit.iter().cloned());
        lifts.push(Genus1Lift {
            a6: *a6,
            steps,
            js: orbit,
        });
    }
    if js.len() != h {
        return Err(Error::Inconsistent(format!(
            "found {} conjugates, class number is {h}",
            js.len()
        )));
    }
    Ok((class_poly_assemble(&js, n)?, lifts))
}
