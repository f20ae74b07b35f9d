//! Genus-2 canonical lifting by the Richelot recursion on Rosenhain triples, and
//! absolute Igusa invariants of the lifted curves.

use crate::curves::{AbsInvChar2, CurveChar2};
use crate::error::{Error, Result};
use crate::gf2m::{poly_derivative, poly_eval, poly_roots, Gf2m};
use crate::padic::{Ctx, PadicCtx, Qq};
use itertools::Itertools;
use std::collections::HashSet;
use std::sync::OnceLock;

/// Extra bits carried by `canonical_lift` beyond the requested precision.
pub const LIFT_MARGIN: u32 = 64;

/// (λ0, λ1, λ∞) for y^2 = x(x−1)(x−λ0)(x−λ1)(x−λ∞): λ1 ≡ 1 mod 4, λ0 ≡ 0 mod 4, v(λ∞) = −2.
#[derive(Clone, Debug)]
pub struct Rosenhain {
    pub lam0: Qq,
    pub lam1: Qq,
    pub lam_inf: Qq,
}

#[derive(Clone, Debug)]
pub struct LiftedInvariants {
    pub j1: Qq,
    pub j2: Qq,
    pub j3: Qq,
    /// Smallest absolute precision among the three.
    pub precision: i64,
}

/// How the derivative term in the initial λ0, λ1 is read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DerivativeReading {
    /// f'(ρ)^2
    #[default]
    SquaredDerivative,
    /// f'(ρ^2)
    DerivativeAtSquare,
}

/// What is placed in the λ∞ slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum InfinitySlot {
    /// 1 / (4 a^2), a the normal-form parameter at infinity.
    #[default]
    Residue,
    /// h1^2 / 4, the reciprocal of 4 / h1^2.
    Printed,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct InitOptions {
    pub reading: DerivativeReading,
    pub infinity: InfinitySlot,
}

impl Rosenhain {
    pub fn ctx(&self) -> &Ctx {
        self.lam0.ctx()
    }

    pub fn check(&self) -> Result<()> {
        let one = Qq::one(self.ctx());
        if self.lam0.is_zero() || self.lam0.valuation() < 2 {
            return Err(Error::Congruence("λ0 is not 0 mod 4".into()));
        }
        if self.lam1.valuation() != 0 || self.lam1.sub(&one).valuation() < 2 {
            return Err(Error::Congruence("λ1 is not 1 mod 4".into()));
        }
        if self.lam_inf.is_zero() || self.lam_inf.valuation() != -2 {
            return Err(Error::Congruence("v(λ∞) ≠ −2".into()));
        }
        Ok(())
    }

    pub fn reseat(&self, n: u32) -> Self {
        Rosenhain {
            lam0: self.lam0.reseat(n),
            lam1: self.lam1.reseat(n),
            lam_inf: self.lam_inf.reseat(n),
        }
    }

    pub fn truncate_abs(&self, abs: i64) -> Self {
        Rosenhain {
            lam0: self.lam0.truncate_abs(abs),
            lam1: self.lam1.truncate_abs(abs),
            lam_inf: self.lam_inf.truncate_abs(abs),
        }
    }

    /// Smallest agreement of corresponding entries.
    pub fn agreement(&self, o: &Rosenhain) -> i64 {
        self.lam0
            .agreement(&o.lam0)
            .min(self.lam1.agreement(&o.lam1))
            .min(self.lam_inf.agreement(&o.lam_inf))
    }

    pub fn frobenius(&self) -> Self {
        Rosenhain {
            lam0: self.lam0.frobenius(),
            lam1: self.lam1.frobenius(),
            lam_inf: self.lam_inf.frobenius(),
        }
    }
}

/// Normal-form data of a split deg-2 model: (ρ0, ρ1, a, B, C) with B, C read per `reading`
/// and already squared for the default reading.
fn init_residues(curve: &CurveChar2, reading: DerivativeReading) -> Result<[u64; 5]> {
    let c = if curve.deg_h() == 2 && curve.deg_f() == 5 {
        curve.clone()
    } else {
        curve.imaginary_model()?
    };
    let k = &c.field;
    if c.deg_h() != 2 {
        return Err(Error::Degenerate("not ordinary: h has fewer than two roots".into()));
    }
    let roots = poly_roots(k, &c.h);
    if roots.len() != 2 {
        return Err(Error::NoSplit);
    }
    let ih2 = k.inv(c.h[2])?;
    let ih2sq = k.sqr(ih2);
    let f: Vec<u64> = c.f.iter().map(|&x| k.mul(x, ih2sq)).collect();
    let (r0, r1) = (roots[0], roots[1]);
    let delta = r0 ^ r1;
    let df = poly_derivative(&f);
    let d2 = k.sqr(delta);
    let id6 = k.inv(k.mul(d2, k.sqr(k.mul(d2, delta))))?;
    let term = |r: u64| {
        let der = match reading {
            DerivativeReading::SquaredDerivative => k.sqr(poly_eval(k, &df, r)),
            DerivativeReading::DerivativeAtSquare => poly_eval(k, &df, k.sqr(r)),
        };
        k.mul(k.mul(poly_eval(k, &f, r), d2) ^ der, id6)
    };
    let a = k.mul(f[5], delta);
    Ok([r0, r1, a, term(r0), term(r1)])
}

/// Initial Rosenhain triple from Teichmüller lifts of the curve's normal-form data.
pub fn rosenhain_init(curve: &CurveChar2, ctx: &Ctx) -> Result<Rosenhain> {
    rosenhain_init_with(curve, ctx, InitOptions::default())
}

pub fn rosenhain_init_with(curve: &CurveChar2, ctx: &Ctx, opts: InitOptions) -> Result<Rosenhain> {
    if ctx.gf() != &curve.field {
        return Err(Error::Invalid("2-adic context over a different residue field".into()));
    }
    let [r0, r1, a, b, c] = init_residues(curve, opts.reading)?;
    let k = &curve.field;
    if a == 0 || b == 0 || c == 0 {
        return Err(Error::Degenerate("not ordinary: a Weierstrass parameter vanishes".into()));
    }
    let one = Qq::one(ctx);
    let lam0 = Qq::teichmuller(ctx, b).shift(2);
    let lam1 = one.add(&Qq::teichmuller(ctx, c).shift(2));
    let lam_inf = match opts.infinity {
        InfinitySlot::Residue => Qq::teichmuller(ctx, k.sqr(a)).shift(2).inv()?,
        InfinitySlot::Printed => Qq::teichmuller(ctx, k.sqr(r0 ^ r1)).shift(-2),
    };
    let r = Rosenhain {
        lam0,
        lam1,
        lam_inf,
    };
    r.check().map_err(|e| {
        Error::Congruence(format!("initial triple violates the Rosenhain congruences: {e}"))
    })?;
    Ok(r)
}

/// Roots of a x^2 + b x + c, the one of smaller valuation first.
fn solve_quadratic(a: &Qq, b: &Qq, c: &Qq) -> Result<(Qq, Qq)> {
    let disc = b.square().sub(&a.mul(c).mul_int(4));
    let s = disc.sqrt()?;
    let two_a = a.mul_int(2);
    let nb = b.neg();
    let r1 = nb.add(&s).div(&two_a)?;
    let r2 = nb.sub(&s).div(&two_a)?;
    let first = if r1.is_zero() || (!r2.is_zero() && r2.valuation() < r1.valuation()) {
        r2
    } else {
        r1
    };
    let second = c.div(&a.mul(&first))?;
    Ok((first, second))
}

/// One Richelot step: new (λ0, λ1, λ∞) from the roots of the U, V, W quadratics,
/// labelled by residue and valuation.
pub fn richelot_step(r: &Rosenhain) -> Result<Rosenhain> {
    r.check()?;
    let ctx = r.ctx();
    let one = Qq::one(ctx);
    let (l0, l1, li) = (&r.lam0, &r.lam1, &r.lam_inf);
    let two_li = li.mul_int(2).neg();
    let (u_inf, u1) = solve_quadratic(&one, &two_li, &li.mul(&one.add(l1)).sub(l1))?;
    let (v_inf, v0) = solve_quadratic(&one, &two_li, &l0.mul(li))?;
    let (w1, w0) = solve_quadratic(&l0.sub(&one).sub(l1), &l1.mul_int(2), &l0.mul(l1).neg())?;
    let ok = u_inf.valuation() < 0
        && u1.valuation() == 0
        && v_inf.valuation() < 0
        && !v0.is_zero()
        && v0.valuation() > 0
        && w1.valuation() == 0
        && !w0.is_zero()
        && w0.valuation() > 0;
    if !ok {
        return Err(Error::RootLabel(format!(
            "valuations u = ({}, {}), v = ({}, {}), w = ({}, {})",
            u_inf.valuation(),
            u1.valuation(),
            v_inf.valuation(),
            v0.valuation(),
            w1.valuation(),
            w0.valuation()
        )));
    }
    let pre = u1.sub(&v_inf).div(&u1.sub(&v0))?;
    let ratio = |x: &Qq| -> Result<Qq> { Ok(pre.mul(&x.sub(&v0).div(&x.sub(&v_inf))?)) };
    let out = Rosenhain {
        lam0: ratio(&w0)?,
        lam1: ratio(&w1)?,
        lam_inf: ratio(&u_inf)?,
    };
    out.check()?;
    Ok(out)
}

/// Output of `canonical_lift`.
#[derive(Clone, Debug)]
pub struct CanonicalLift {
    pub rosenhain: Rosenhain,
    pub steps: usize,
    /// Agreement between the last two cycles.
    pub agreement: i64,
}

/// Iterate Richelot steps until two consecutive d-step cycles agree to N bits.
pub fn canonical_lift(curve: &CurveChar2, n: u32) -> Result<CanonicalLift> {
    canonical_lift_with(curve, n, InitOptions::default())
}

pub fn canonical_lift_with(curve: &CurveChar2, n: u32, opts: InitOptions) -> Result<CanonicalLift> {
    let ctx = PadicCtx::new(&curve.field, n + LIFT_MARGIN)?;
    let wp = ctx.precision();
    let d = curve.field.degree() as usize;
    let mut r = rosenhain_init_with(curve, &ctx, opts)?;
    let max_cycles = wp as usize + 8 * d + 16;
    let mut steps = 0;
    let mut last_agree = i64::MIN;
    for _ in 0..max_cycles {
        let start = r.clone();
        for _ in 0..d {
            r = richelot_step(&r)?.reseat(wp);
            steps += 1;
        }
        let agree = r.agreement(&start);
        if agree >= n as i64 {
            return Ok(CanonicalLift {
                rosenhain: r.truncate_abs(agree),
                steps,
                agreement: agree,
            });
        }
        last_agree = last_agree.max(agree);
    }
    Err(Error::NoConvergence(steps))
}

type Terms = Vec<Vec<(usize, usize)>>;

fn term_set(pattern: &[(usize, usize)]) -> Terms {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for perm in (0..6).permutations(6) {
        let mut key: Vec<(usize, usize)> = pattern
            .iter()
            .map(|&(i, j)| {
                let (a, b) = (perm[i], perm[j]);
                (a.min(b), a.max(b))
            })
            .collect();
        key.sort_unstable();
        if seen.insert(key.clone()) {
            out.push(key);
        }
    }
    out
}

fn terms() -> &'static [Terms; 3] {
    static T: OnceLock<[Terms; 3]> = OnceLock::new();
    T.get_or_init(|| {
        [
            term_set(&[(0, 1), (2, 3), (4, 5)]),
            term_set(&[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]),
            term_set(&[
                (0, 1),
                (1, 2),
                (0, 2),
                (3, 4),
                (4, 5),
                (3, 5),
                (0, 3),
                (1, 4),
                (2, 5),
            ]),
        ]
    })
}

/// Igusa–Clebsch (I2, I4, I6, I10) of the binary sextic with the given projective roots.
pub fn igusa_clebsch_from_roots(pts: &[(Qq, Qq); 6]) -> [Qq; 4] {
    let ctx = pts[0].0.ctx();
    let mut dsq: [[Qq; 6]; 6] =
        std::array::from_fn(|_| std::array::from_fn(|_| Qq::zero(ctx)));
    let mut i10 = Qq::one(ctx);
    for i in 0..6 {
        for j in i + 1..6 {
            let x = pts[i].0.mul(&pts[j].1).sub(&pts[j].0.mul(&pts[i].1));
            dsq[i][j] = x.square();
            i10 = i10.mul(&dsq[i][j]);
        }
    }
    let sum = |t: &Terms| {
        t.iter().fold(Qq::zero(ctx), |acc, key| {
            acc.add(
                &key.iter()
                    .fold(Qq::one(ctx), |p, &(i, j)| p.mul(&dsq[i][j])),
            )
        })
    };
    let [t2, t4, t6] = terms();
    [sum(t2), sum(t4), sum(t6), i10]
}

/// Absolute invariants (J2^5/J10, J2^3 J4/J10, J2^2 J6/J10) from Igusa–Clebsch invariants.
pub fn absolute_from_igusa_clebsch(ic: &[Qq; 4]) -> Result<LiftedInvariants> {
    let ctx = ic[0].ctx();
    let c = |x: i64| Qq::from_int(ctx, x);
    let j2 = ic[0].div(&c(8))?;
    let j4 = j2.square().mul_int(4).sub(&ic[1]).div(&c(96))?;
    let j6 = j2
        .pow(3)
        .mul_int(8)
        .sub(&j2.mul(&j4).mul_int(160))
        .sub(&ic[2])
        .div(&c(576))?;
    let j10 = ic[3].div(&c(4096))?;
    if j10.is_zero() {
        return Err(Error::Degenerate("J10 vanishes at working precision".into()));
    }
    let j22 = j2.square();
    let j23 = j22.mul(&j2);
    let a = j23.mul(&j22).div(&j10)?;
    let b = j23.mul(&j4).div(&j10)?;
    let cc = j22.mul(&j6).div(&j10)?;
    let precision = a.abs_precision().min(b.abs_precision()).min(cc.abs_precision());
    Ok(LiftedInvariants {
        j1: a,
        j2: b,
        j3: cc,
        precision,
    })
}

/// Absolute Igusa invariants of y^2 = x(x−1)(x−λ0)(x−λ1)(x−λ∞).
pub fn igusa_abs_from_rosenhain(r: &Rosenhain) -> Result<LiftedInvariants> {
    let ctx = r.ctx();
    let (zero, one) = (Qq::zero(ctx), Qq::one(ctx));
    let pts = [
        (zero.clone(), one.clone()),
        (one.clone(), one.clone()),
        (r.lam0.clone(), one.clone()),
        (r.lam1.clone(), one.clone()),
        (one.clone(), r.lam_inf.inv()?),
        (one.clone(), zero),
    ];
    absolute_from_igusa_clebsch(&igusa_clebsch_from_roots(&pts))
}

/// Binary form Σ c_i x^(m−i) z^i.
type Form = Vec<Qq>;

fn form_mul(f: &Form, g: &Form) -> Form {
    let ctx = f[0].ctx();
    let mut r = vec![Qq::zero(ctx); f.len() + g.len() - 1];
    for (i, a) in f.iter().enumerate() {
        for (j, b) in g.iter().enumerate() {
            r[i + j] = r[i + j].add(&a.mul(b));
        }
    }
    r
}

fn form_dx(f: &Form) -> Form {
    let m = f.len() - 1;
    if m == 0 {
        return vec![Qq::zero(f[0].ctx())];
    }
    f[..m]
        .iter()
        .enumerate()
        .map(|(i, c)| c.mul_int((m - i) as i64))
        .collect()
}

fn form_dz(f: &Form) -> Form {
    let m = f.len() - 1;
    if m == 0 {
        return vec![Qq::zero(f[0].ctx())];
    }
    f[1..]
        .iter()
        .enumerate()
        .map(|(i, c)| c.mul_int((i + 1) as i64))
        .collect()
}

fn binom(n: u64, k: u64) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

fn factorial(n: u64) -> i64 {
    (1..=n as i64).product()
}

/// k-th transvectant (f, g)_k.
fn transvectant(f: &Form, g: &Form, k: usize) -> Result<Form> {
    let ctx = f[0].ctx();
    let (m, n) = (f.len() - 1, g.len() - 1);
    let mut r = vec![Qq::zero(ctx); m + n - 2 * k + 1];
    for i in 0..=k {
        let mut a = f.clone();
        for _ in 0..k - i {
            a = form_dx(&a);
        }
        for _ in 0..i {
            a = form_dz(&a);
        }
        let mut b = g.clone();
        for _ in 0..i {
            b = form_dx(&b);
        }
        for _ in 0..k - i {
            b = form_dz(&b);
        }
        let sign = if i % 2 == 0 { 1 } else { -1 };
        let t = form_mul(&a, &b);
        for (x, y) in r.iter_mut().zip(&t) {
            *x = x.add(&y.mul_int(sign * binom(k as u64, i as u64)));
        }
    }
    let s = Qq::from_ratio(
        ctx,
        factorial((m - k) as u64) * factorial((n - k) as u64),
        factorial(m as u64) * factorial(n as u64),
    )?;
    Ok(r.iter().map(|x| x.mul(&s)).collect())
}

/// Igusa–Clebsch invariants of the sextic Σ c_i x^(6−i) via Clebsch's transvectants.
pub fn igusa_clebsch_from_sextic(c: &[Qq; 7]) -> Result<[Qq; 4]> {
    let f: Form = c.to_vec();
    let i = transvectant(&f, &f, 4)?;
    let delta = transvectant(&i, &i, 2)?;
    let y1 = transvectant(&f, &i, 4)?;
    let y2 = transvectant(&i, &y1, 2)?;
    let y3 = transvectant(&i, &y2, 2)?;
    let a = transvectant(&f, &f, 6)?.swap_remove(0);
    let b = transvectant(&i, &i, 4)?.swap_remove(0);
    let cc = transvectant(&i, &delta, 4)?.swap_remove(0);
    let d = transvectant(&y3, &y1, 2)?.swap_remove(0);
    let i2 = a.mul_int(-120);
    let i4 = a.square().mul_int(-720).add(&b.mul_int(6750));
    let i6 = a
        .pow(3)
        .mul_int(8640)
        .sub(&a.mul(&b).mul_int(108000))
        .add(&cc.mul_int(202500));
    let i10 = a
        .pow(5)
        .mul_int(-62208)
        .add(&a.pow(3).mul(&b).mul_int(972000))
        .add(&a.square().mul(&cc).mul_int(1620000))
        .sub(&a.mul(&b.square()).mul_int(3037500))
        .sub(&b.mul(&cc).mul_int(6075000))
        .sub(&d.mul_int(4556250));
    Ok([i2, i4, i6, i10])
}

/// Quadratics P, Q, R as coefficient triples (c0, c1, c2) of c0 + c1 x + c2 x^2.
#[derive(Clone, Debug)]
pub struct QuadraticTriple {
    pub p: [Qq; 3],
    pub q: [Qq; 3],
    pub r: [Qq; 3],
}

fn bracket(s: &[Qq; 3], t: &[Qq; 3]) -> [Qq; 3] {
    // S'T − ST' for quadratics: coefficients of 1, x, x^2
    let c0 = s[1].mul(&t[0]).sub(&s[0].mul(&t[1]));
    let c1 = s[2].mul(&t[0]).sub(&s[0].mul(&t[2])).mul_int(2);
    let c2 = s[2].mul(&t[1]).sub(&s[1].mul(&t[2]));
    [c0, c1, c2]
}

fn det3(m: [&[Qq; 3]; 3]) -> Qq {
    let t = |a: usize, b: usize, c: usize| m[0][a].mul(&m[1][b]).mul(&m[2][c]);
    t(0, 1, 2)
        .add(&t(1, 2, 0))
        .add(&t(2, 0, 1))
        .sub(&t(2, 1, 0))
        .sub(&t(0, 2, 1))
        .sub(&t(1, 0, 2))
}

/// The sextic [Q,R][R,P][P,Q]/Δ, coefficients low to high.
pub fn richelot_transform(qt: &QuadraticTriple) -> Result<[Qq; 7]> {
    let delta = det3([&qt.p, &qt.q, &qt.r]);
    if delta.is_zero() {
        return Err(Error::Degenerate("Δ = 0".into()));
    }
    let qr = bracket(&qt.q, &qt.r);
    let rp = bracket(&qt.r, &qt.p);
    let pq = bracket(&qt.p, &qt.q);
    let prod = form_mul(&form_mul(&qr.to_vec(), &rp.to_vec()), &pq.to_vec());
    let inv = delta.inv()?;
    Ok(std::array::from_fn(|i| prod[i].mul(&inv)))
}

/// The kernel grouping realised by `richelot_step`: {λ∞, ∞}, {1, λ1}, {0, λ0}.
pub fn kernel_triple(r: &Rosenhain) -> QuadraticTriple {
    let ctx = r.ctx();
    let (zero, one) = (Qq::zero(ctx), Qq::one(ctx));
    QuadraticTriple {
        p: [r.lam_inf.neg(), one.clone(), zero.clone()],
        q: [r.lam1.clone(), one.add(&r.lam1).neg(), one.clone()],
        r: [zero, r.lam0.neg(), one],
    }
}

/// Absolute invariants of y^2 = sextic (coefficients low to high).
pub fn igusa_abs_from_sextic(low_to_high: &[Qq; 7]) -> Result<LiftedInvariants> {
    let c: [Qq; 7] = std::array::from_fn(|i| low_to_high[6 - i].clone());
    absolute_from_igusa_clebsch(&igusa_clebsch_from_sextic(&c)?)
}

/// (j1, j2, (j3 − j2^2/j1)/4) mod 2, the char-2 absolute invariants of the reduction.
pub fn char2_reduction(inv: &LiftedInvariants, gf: &Gf2m) -> Result<AbsInvChar2> {
    let res = |x: &Qq| -> Result<u64> {
        if !x.is_zero() && x.valuation() < 0 {
            return Err(Error::Inconsistent("invariant is not 2-integral".into()));
        }
        Ok(x.residue())
    };
    let t = inv
        .j3
        .sub(&inv.j2.square().div(&inv.j1)?)
        .shift(-2);
    let out = AbsInvChar2 {
        j1: res(&inv.j1)?,
        j2: res(&inv.j2)?,
        j4: res(&t)?,
    };
    debug_assert!(gf.contains(out.j1));
    Ok(out)
}

/// Smallest i with σ^i(reduction) equal to the curve's invariants, if any.
pub fn reduction_matches(curve: &CurveChar2, inv: &LiftedInvariants) -> Result<Option<u32>> {
    let k = &curve.field;
    let red = char2_reduction(inv, k)?;
    let target = curve.absolute_invariants()?;
    Ok((0..k.degree()).find(|&i| red.frobenius(k, i) == target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{One, Zero};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn example_curve() -> CurveChar2 {
        CurveChar2::new(Gf2m::new(3).unwrap(), vec![0, 1, 1], vec![0, 3, 7, 5, 0, 1]).unwrap()
    }

    fn ordinary_curves(k: &Gf2m, count: usize, seed: u64) -> Vec<CurveChar2> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        while out.len() < count {
            let a = rng.gen_range(1..k.order());
            let b = rng.gen_range(1..k.order());
            let c = rng.gen_range(1..k.order());
            out.push(crate::curves::normal_form_from_abc(k, a, b, c));
        }
        out
    }

    fn rational_abs(roots: &[i64]) -> [BigRational; 3] {
        // sextic with five finite roots and one at infinity: projective points (r : 1), (1 : 0)
        let pts: Vec<(BigInt, BigInt)> = roots
            .iter()
            .map(|&r| (BigInt::from(r), BigInt::one()))
            .chain(std::iter::once((BigInt::one(), BigInt::zero())))
            .collect();
        let d = |i: usize, j: usize| {
            let x = &pts[i].0 * &pts[j].1 - &pts[j].0 * &pts[i].1;
            BigRational::from_integer(&x * &x)
        };
        let s = |t: &Terms| {
            t.iter().fold(BigRational::zero(), |acc, key| {
                acc + key
                    .iter()
                    .fold(BigRational::one(), |p, &(i, j)| p * d(i, j))
            })
        };
        let [t2, t4, t6] = terms();
        let (i2, i4, i6) = (s(t2), s(t4), s(t6));
        let mut i10 = BigRational::one();
        for i in 0..6 {
            for j in i + 1..6 {
                i10 *= d(i, j);
            }
        }
        let r = |x: i64| BigRational::from_integer(BigInt::from(x));
        let j2 = &i2 / r(8);
        let j4 = (r(4) * &j2 * &j2 - &i4) / r(96);
        let j6 = (r(8) * &j2 * &j2 * &j2 - r(160) * &j2 * &j4 - &i6) / r(576);
        let j10 = i10 / r(4096);
        let j22 = &j2 * &j2;
        [
            &j22 * &j22 * &j2 / &j10,
            &j22 * &j2 * &j4 / &j10,
            &j22 * &j6 / &j10,
        ]
    }

    fn qq_of(ctx: &Ctx, x: &BigRational) -> Qq {
        Qq::from_ratio(ctx, x.numer().clone(), x.denom().clone()).unwrap()
    }

    #[test]
    fn term_counts() {
        let [t2, t4, t6] = terms();
        assert_eq!((t2.len(), t4.len(), t6.len()), (15, 10, 60));
    }

    #[test]
    fn rational_rosenhain_matches_exact() {
        let ctx = PadicCtx::new(&Gf2m::new(1).unwrap(), 256).unwrap();
        let r = Rosenhain {
            lam0: Qq::from_int(&ctx, 9),
            lam1: Qq::from_int(&ctx, 25),
            lam_inf: Qq::from_int(&ctx, -7),
        };
        let inv = igusa_abs_from_rosenhain(&r).unwrap();
        let exact = rational_abs(&[0, 1, 9, 25, -7]);
        for (got, want) in [&inv.j1, &inv.j2, &inv.j3].iter().zip(&exact) {
            assert!(got.agreement(&qq_of(&ctx, want)) >= 150);
        }
        // the transvectant route on the expanded quintic
        let mut poly = vec![BigInt::one()];
        for root in [0i64, 1, 9, 25, -7] {
            let mut next = vec![BigInt::zero(); poly.len() + 1];
            for (i, c) in poly.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= c * root;
            }
            poly = next;
        }
        poly.push(BigInt::zero());
        let c: [Qq; 7] = std::array::from_fn(|i| Qq::from_int(&ctx, poly[i].clone()));
        let inv2 = igusa_abs_from_sextic(&c).unwrap();
        for (got, want) in [&inv2.j1, &inv2.j2, &inv2.j3].iter().zip(&exact) {
            assert!(got.agreement(&qq_of(&ctx, want)) >= 150);
        }
    }

    #[test]
    fn permutation_invariance() {
        let ctx = PadicCtx::new(&Gf2m::new(3).unwrap(), 128).unwrap();
        let r = rosenhain_init(&example_curve(), &ctx).unwrap();
        let a = igusa_abs_from_rosenhain(&r).unwrap();
        let one = Qq::one(&ctx);
        let pts = |order: [usize; 6]| {
            let base = [
                (Qq::zero(&ctx), one.clone()),
                (one.clone(), one.clone()),
                (r.lam0.clone(), one.clone()),
                (r.lam1.clone(), one.clone()),
                (one.clone(), r.lam_inf.inv().unwrap()),
                (one.clone(), Qq::zero(&ctx)),
            ];
            std::array::from_fn(|i| base[order[i]].clone())
        };
        let b = absolute_from_igusa_clebsch(&igusa_clebsch_from_roots(&pts([3, 5, 0, 2, 4, 1])))
            .unwrap();
        assert!(a.j1.agreement(&b.j1) >= a.precision.min(b.precision));
        assert!(a.j3.agreement(&b.j3) >= a.precision.min(b.precision));
    }

    #[test]
    fn init_congruences() {
        let ctx = PadicCtx::new(&Gf2m::new(3).unwrap(), 64).unwrap();
        for reading in [DerivativeReading::SquaredDerivative, DerivativeReading::DerivativeAtSquare] {
            for infinity in [InfinitySlot::Residue, InfinitySlot::Printed] {
                let r =
                    rosenhain_init_with(&example_curve(), &ctx, InitOptions { reading, infinity })
                        .unwrap();
                r.check().unwrap();
            }
        }
        // h = x^2: one Weierstrass point, not ordinary
        let k = Gf2m::new(3).unwrap();
        let c = CurveChar2::new(k, vec![0, 0, 1], vec![1, 0, 0, 0, 0, 1]);
        if let Ok(c) = c {
            assert!(rosenhain_init(&c, &ctx).is_err());
        }
    }

    #[test]
    fn bracket_antisymmetry_and_degenerate() {
        let ctx = PadicCtx::new(&Gf2m::new(1).unwrap(), 64).unwrap();
        let q = |a: i64, b: i64, c: i64| [Qq::from_int(&ctx, a), Qq::from_int(&ctx, b), Qq::from_int(&ctx, c)];
        let s = q(3, -1, 2);
        let t = q(5, 7, -4);
        let st = bracket(&s, &t);
        let ts = bracket(&t, &s);
        for (x, y) in st.iter().zip(&ts) {
            assert!(x.add(y).is_zero());
        }
        let degenerate = QuadraticTriple {
            p: q(1, 2, 3),
            q: q(2, 4, 6),
            r: q(0, 1, 1),
        };
        assert!(richelot_transform(&degenerate).is_err());
    }

    #[test]
    fn step_matches_bracket_construction() {
        let k = Gf2m::new(3).unwrap();
        let ctx = PadicCtx::new(&k, 64 + LIFT_MARGIN).unwrap();
        for c in ordinary_curves(&k, 100, 17) {
            let r = rosenhain_init(&c, &ctx).unwrap();
            let next = richelot_step(&r).unwrap();
            let a = igusa_abs_from_rosenhain(&next).unwrap();
            let b = igusa_abs_from_sextic(&richelot_transform(&kernel_triple(&r)).unwrap()).unwrap();
            let p = a.precision.min(b.precision).min(64);
            assert!(a.j1.agreement(&b.j1) >= p, "{} vs {}", a.j1.agreement(&b.j1), p);
            assert!(a.j2.agreement(&b.j2) >= p);
            assert!(a.j3.agreement(&b.j3) >= p);
        }
    }

    #[test]
    fn step_squares_the_reduction() {
        let k = Gf2m::new(3).unwrap();
        let ctx = PadicCtx::new(&k, 96).unwrap();
        for c in ordinary_curves(&k, 20, 23) {
            let r = rosenhain_init(&c, &ctx).unwrap();
            let a = char2_reduction(&igusa_abs_from_rosenhain(&r).unwrap(), &k).unwrap();
            let s = richelot_step(&r).unwrap();
            let b = char2_reduction(&igusa_abs_from_rosenhain(&s).unwrap(), &k).unwrap();
            assert_eq!(b, a.frobenius(&k, 1));
        }
    }

    #[test]
    fn init_reduces_to_inverse_frobenius_conjugate() {
        for (d, seed) in [(3, 29), (5, 31)] {
            let k = Gf2m::new(d).unwrap();
            let ctx = PadicCtx::new(&k, 96).unwrap();
            for c in ordinary_curves(&k, 15, seed) {
                let r = rosenhain_init(&c, &ctx).unwrap();
                let red = char2_reduction(&igusa_abs_from_rosenhain(&r).unwrap(), &k).unwrap();
                assert_eq!(red.frobenius(&k, d - 1), c.absolute_invariants().unwrap());
            }
        }
    }
}
