use cm2::fp;
use cm2::gf2m::Gf2m;
use cm2::padic::{Ctx, PadicCtx, Qq, ZqElem};
use cm2::poly::{IntPoly, RecognizedPoly};
use cm2::recognize::*;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Q = BigRational;

fn gram_schmidt(b: &[Vec<BigInt>]) -> (Vec<Vec<Q>>, Vec<Vec<Q>>) {
    let m = b.len();
    let bq: Vec<Vec<Q>> = b.iter().map(|r| r.iter().map(|x| Q::from(x.clone())).collect()).collect();
    let dotq = |a: &[Q], c: &[Q]| a.iter().zip(c).map(|(x, y)| x * y).sum::<Q>();
    let mut star: Vec<Vec<Q>> = Vec::new();
    let mut mu = vec![vec![Q::zero(); m]; m];
    for i in 0..m {
        let mut v = bq[i].clone();
        for j in 0..i {
            mu[i][j] = dotq(&bq[i], &star[j]) / dotq(&star[j], &star[j]);
            for (x, y) in v.iter_mut().zip(&star[j]) {
                *x -= &mu[i][j] * y;
            }
        }
        star.push(v);
    }
    (star, mu)
}

fn is_lll_reduced(b: &[Vec<BigInt>]) -> bool {
    let (star, mu) = gram_schmidt(b);
    let norm = |v: &[Q]| v.iter().map(|x| x * x).sum::<Q>();
    let half = Q::new(BigInt::one(), BigInt::from(2));
    let delta = Q::new(BigInt::from(3), BigInt::from(4));
    for i in 0..b.len() {
        if mu[i][..i].iter().any(|m| m.abs() > half) {
            return false;
        }
        if i > 0 && norm(&star[i]) < (&delta - &mu[i][i - 1] * &mu[i][i - 1]) * norm(&star[i - 1]) {
            return false;
        }
    }
    true
}

/// Solve x·B = v over Q by elimination; Some(x) when v is in the row space.
fn coords(b: &[Vec<BigInt>], v: &[BigInt]) -> Option<Vec<Q>> {
    let m = b.len();
    let n = v.len();
    // columns of the augmented system B^T x = v
    let mut a: Vec<Vec<Q>> = (0..n)
        .map(|c| {
            let mut row: Vec<Q> = (0..m).map(|r| Q::from(b[r][c].clone())).collect();
            row.push(Q::from(v[c].clone()));
            row
        })
        .collect();
    let mut piv_cols = Vec::new();
    let mut r = 0;
    for c in 0..m {
        let Some(p) = (r..n).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..n {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                let row_r = a[r].clone();
                for (x, y) in a[i].iter_mut().zip(&row_r) {
                    *x -= &f * y;
                }
            }
        }
        piv_cols.push(c);
        r += 1;
    }
    if a[r..].iter().any(|row| !row[m].is_zero()) {
        return None;
    }
    let mut x = vec![Q::zero(); m];
    for (i, &c) in piv_cols.iter().enumerate() {
        x[c] = a[i][m].clone();
    }
    Some(x)
}

fn same_lattice(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> bool {
    let integral = |x: Option<Vec<Q>>| x.is_some_and(|v| v.iter().all(|q| q.is_integer()));
    b.iter().all(|v| integral(coords(a, v))) && a.iter().all(|v| integral(coords(b, v)))
}

#[test]
fn lll_identity_is_fixed() {
    let rows: Vec<Vec<BigInt>> = (0..4)
        .map(|i| (0..4).map(|j| BigInt::from((i == j) as u8)).collect())
        .collect();
    let l = IntLattice::new(rows.clone()).unwrap();
    assert_eq!(lll_reduce(&l).unwrap().basis, rows);
}

#[test]
fn lll_random_lattices_meet_the_conditions() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..40 {
        let m = rng.gen_range(2..=5);
        let n = rng.gen_range(m..=6);
        let rows: Vec<Vec<BigInt>> = (0..m)
            .map(|_| (0..n).map(|_| BigInt::from(rng.gen_range(-1_000_000i64..1_000_000))).collect())
            .collect();
        let l = IntLattice::new(rows.clone()).unwrap();
        let r = lll_reduce(&l).unwrap();
        assert!(is_lll_reduced(&r.basis));
        assert!(same_lattice(&rows, &r.basis));
    }
}

/// Hensel lift of a simple root r0 ∈ {0, 1} of p modulo 2^bits.
fn hensel_root(p: &IntPoly, r0: u8, bits: u32) -> BigInt {
    let m = BigInt::one() << bits;
    let dp = p.derivative();
    let mut r = BigInt::from(r0);
    for _ in 0..=bits.ilog2() + 1 {
        let inv = dp.eval(&r).mod_floor(&m).modinv(&m).expect("simple root");
        r = (&r - p.eval(&r) * inv).mod_floor(&m);
    }
    assert!(p.eval(&r).mod_floor(&m).is_zero());
    r
}

/// The Hensel root as a 2-adic number known to `bits` bits.
fn root_qq(c: &Ctx, p: &IntPoly, r0: u8, bits: u32) -> Qq {
    Qq::from_int(c, hensel_root(p, r0, bits)).truncate_abs(bits as i64)
}

fn ctx(d: u32, n: u32) -> Ctx {
    PadicCtx::new(&Gf2m::new(d).unwrap(), n).unwrap()
}

#[test]
fn hensel_cubic_is_recovered() {
    let p = IntPoly::from_i64(&[-25, -2, 0, 1]);
    let c = ctx(1, 200);
    let alpha = root_qq(&c, &p, 1, 200);
    assert_eq!(minpoly_recognize(&alpha, 3, 200).unwrap().numerator, p);
    // the degree guess 2 cannot work
    assert!(matches!(
        minpoly_recognize(&alpha, 2, 200),
        Err(cm2::Error::DegreeRejected(2))
    ));
}

fn height_bits(p: &IntPoly) -> u32 {
    p.coeffs.iter().map(|c| c.bits() as u32 + 1).sum()
}

fn irreducible_over_q(p: &IntPoly) -> bool {
    let d = p.degree();
    [3u64, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]
        .iter()
        .any(|&q| fp::deg(&p.mod_p(q)) == d && fp::is_irreducible(&p.mod_p(q), q))
}

/// A random primitive irreducible polynomial of degree n with a simple root in Z_2.
fn planted(rng: &mut ChaCha8Rng, n: usize) -> (IntPoly, u8) {
    loop {
        let mut c: Vec<BigInt> = (0..=n)
            .map(|_| {
                let bits = rng.gen_range(6..=14);
                BigInt::from(rng.gen_range(-(1i64 << bits)..(1i64 << bits)))
            })
            .collect();
        if c[n].is_zero() {
            continue;
        }
        if c[n].is_negative() {
            c[n] = -c[n].clone();
        }
        let r0: u8 = rng.gen_range(0..2);
        let p = IntPoly::new(c.clone());
        if p.eval(&BigInt::from(r0)).is_odd() {
            c[0] += 1;
        }
        let p = IntPoly::new(c);
        if p.degree() != n as isize
            || p.derivative().eval(&BigInt::from(r0)).is_even()
            || !p.content().is_one()
            || !irreducible_over_q(&p)
        {
            continue;
        }
        return (p, r0);
    }
}

#[test]
fn planted_polynomials_are_recovered() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..200 {
        let n = 1 + i % 8;
        let (p, r0) = planted(&mut rng, n);
        let big_n = 4 * height_bits(&p) + 24 * (n as u32 + 1);
        let c = ctx(1, big_n + 64);
        let alpha = root_qq(&c, &p, r0, big_n + 64);
        let got = minpoly_recognize(&alpha, n, big_n).unwrap_or_else(|e| panic!("{p}: {e}"));
        assert_eq!(got.numerator, p, "instance {i}");
        assert!(got.denominator.is_one());
    }
}

fn rat_poly(p: &IntPoly) -> Vec<Q> {
    p.coeffs.iter().map(|c| Q::from(c.clone())).collect()
}

fn rat_rem(a: &[Q], b: &[Q]) -> Vec<Q> {
    let mut r = a.to_vec();
    while r.last().is_some_and(|x| x.is_zero()) {
        r.pop();
    }
    while r.len() >= b.len() {
        let f = r.last().unwrap() / b.last().unwrap();
        let s = r.len() - b.len();
        for (i, y) in b.iter().enumerate() {
            r[s + i] -= &f * y;
        }
        r.pop();
        while r.last().is_some_and(|x| x.is_zero()) {
            r.pop();
        }
    }
    r
}

fn rat_mul(a: &[Q], b: &[Q]) -> Vec<Q> {
    let mut r = vec![Q::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            r[i + j] += x * y;
        }
    }
    r
}

/// Exact G with G(r) = φ(r)·H'(r) at every root r of H: the remainder of H'·φ mod H.
fn exact_g(h: &IntPoly, phi: &IntPoly) -> RecognizedPoly {
    let g = rat_rem(&rat_mul(&rat_poly(&h.derivative()), &rat_poly(phi)), &rat_poly(h));
    let den = g.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
    RecognizedPoly::new(
        IntPoly::new(g.iter().map(|c| (c * Q::from(den.clone())).to_integer()).collect()),
        den,
    )
}

#[test]
fn gk_matches_the_exact_interpolation() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for n in [2usize, 3, 4, 5, 6] {
        let (h, r0) = planted(&mut rng, n);
        let prec = 1000;
        let c = ctx(1, prec + 64);
        let j1 = root_qq(&c, &h, r0, prec + 64);
        let h1 = RecognizedPoly::integral(h.clone());
        // self-interpolation
        let g = gk_recognize(&j1, &j1, &h1, n, prec).unwrap();
        assert_eq!(g, exact_g(&h, &IntPoly::from_i64(&[0, 1])));
        // a polynomial map j_k = φ(j1)/3
        let phi: IntPoly = IntPoly::new((0..n).map(|_| BigInt::from(rng.gen_range(-50..50))).collect());
        let jk = eval_qq(&phi, &j1).div(&Qq::from_int(&c, 3)).unwrap();
        let g = gk_recognize(&j1, &jk, &h1, n, prec).unwrap();
        let mut want = exact_g(&h, &phi);
        want = RecognizedPoly::new(want.numerator, want.denominator * 3);
        assert_eq!(g, want);
        assert!(gk_holds(&j1, &jk, &h, &g));
    }
}

/// Newton iteration for a root of p (coefficients in Q_q) starting from a residue.
fn qq_root(p: &[Qq], start: u64, c: &Ctx) -> Qq {
    let ev = |x: &Qq| p.iter().rev().fold(Qq::zero(c), |acc, a| acc.mul(x).add(a));
    let dp: Vec<Qq> = p.iter().enumerate().skip(1).map(|(i, a)| a.mul_int(i as i64)).collect();
    let evd = |x: &Qq| dp.iter().rev().fold(Qq::zero(c), |acc, a| acc.mul(x).add(a));
    let mut x = Qq::from_zq(&ZqElem::lift(c, start));
    for _ in 0..16 {
        x = x.sub(&ev(&x).div(&evd(&x)).unwrap());
    }
    assert!(ev(&x).is_zero());
    x
}

#[test]
fn full_orbit_of_a_cubic_matches_the_direct_path() {
    // x^3 + x + 1 is irreducible mod 2, so all three roots lie in Z_8
    let h = IntPoly::from_i64(&[-3, 5, 4, 7]);
    let c = ctx(3, 700);
    let gf = Gf2m::new(3).unwrap();
    let hq: Vec<Qq> = h.coeffs.iter().map(|x| Qq::from_int(&c, x.clone())).collect();
    let hm = h.mod_p(2);
    let r = gf
        .elements()
        .find(|&t| hm.iter().rev().fold(0, |acc, &a| gf.mul(acc, t) ^ a) == 0)
        .unwrap();
    let j1 = qq_root(&hq, r, &c);
    let phi2 = IntPoly::from_i64(&[1, -2, 3]);
    let phi3 = IntPoly::from_i64(&[0, 7]);
    let mut triples = Vec::new();
    let mut x = j1.clone();
    for _ in 0..3 {
        triples.push([x.clone(), eval_qq(&phi2, &x), eval_qq(&phi3, &x)]);
        x = x.frobenius();
    }
    let o = orbit_reconstruct(&triples, 3, 600).unwrap();
    assert_eq!(o.field_poly.degree(), 1);
    let direct = minpoly_recognize(&j1, 3, 600).unwrap();
    assert_eq!(o.h1, direct);
    assert_eq!(o.h1.numerator, h);
    assert_eq!(o.g2, gk_recognize(&j1, &triples[0][1], &direct, 3, 600).unwrap());
    assert_eq!(o.g2, exact_g(&h, &phi2));
    assert_eq!(o.g3, exact_g(&h, &phi3));
}

#[test]
fn quadratic_over_cubic_tower() {
    // M(X, Y) = X^3 + (a2 + b2 Y) X^2 + (a1 + b1 Y) X + (a0 + b0 Y) over Q(√17)
    let (a, b) = ([3i64, -4, 2], [2i64, 3, 2]);
    let dd = 17i64;
    // H = M(X, √17)·M(X, −√17) expanded with Y^2 = 17
    let plus: Vec<(i64, i64)> = (0..3).map(|i| (a[i], b[i])).chain([(1, 0)]).collect();
    let mut h = vec![BigInt::zero(); 7];
    for i in 0..4 {
        for j in 0..4 {
            let (x0, x1) = plus[i];
            let (y0, y1) = (plus[j].0, -plus[j].1);
            h[i + j] += BigInt::from(x0 * y0 + dd * x1 * y1);
        }
    }
    let h = IntPoly::new(h);
    assert!(irreducible_over_q(&h));
    let prec = 800;
    let c = ctx(3, prec + 64);
    let s = Qq::from_int(&c, dd).sqrt().unwrap();
    let m: Vec<Qq> = plus
        .iter()
        .map(|&(x, y)| Qq::from_int(&c, x).add(&Qq::from_int(&c, y).mul(&s)))
        .collect();
    let gf = Gf2m::new(3).unwrap();
    let mm: Vec<u64> = m.iter().map(|x| x.residue()).collect();
    let r = gf
        .elements()
        .find(|&t| mm.iter().rev().fold(0, |acc, &q| gf.mul(acc, t) ^ q) == 0)
        .expect("M has a root in F_8");
    let j1 = qq_root(&m, r, &c);
    assert!(eval_qq(&h, &j1).is_zero());
    let phi2 = IntPoly::from_i64(&[5, 0, -1, 2]);
    let phi3 = IntPoly::from_i64(&[-7, 1, 0, 0, 0, 1]);
    let mut triples = Vec::new();
    let mut x = j1.clone();
    for _ in 0..3 {
        triples.push([x.clone(), eval_qq(&phi2, &x), eval_qq(&phi3, &x)]);
        x = x.frobenius();
    }
    let o = orbit_reconstruct(&triples, 6, prec).unwrap();
    assert_eq!(o.field_poly.degree(), 2);
    assert_eq!(o.h1.numerator, h.primitive());
    assert_eq!(o.g2, exact_g(&h, &phi2));
    assert_eq!(o.g3, exact_g(&h, &phi3));
    let k1 = orbit_reconstruct(&triples[..1], 6, prec).unwrap();
    assert_eq!((k1.h1, k1.g2, k1.g3), (o.h1, o.g2, o.g3));
}

#[test]
fn orbit_size_must_divide_degree() {
    let c = ctx(1, 64);
    let t = [Qq::one(&c), Qq::one(&c), Qq::one(&c)];
    assert!(orbit_reconstruct(&[t.clone(), t], 3, 64).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn newton_polygon_recovers_root_valuations(
        roots in prop::collection::vec((0u32..6, 0i64..40), 1..7),
        lead_v in 0u32..4,
    ) {
        let mut p = IntPoly::from_i64(&[1]);
        for &(e, u) in &roots {
            let r = BigInt::from(2 * u + 1) << e;
            p = p.mul(&IntPoly::new(vec![-r, BigInt::one()]));
        }
        p = p.scale(&(BigInt::one() << lead_v));
        let np = newton_polygon(&p).unwrap();
        let mut got: Vec<u32> = Vec::new();
        for (v, len) in np.root_valuations() {
            prop_assert!(v.is_integer());
            for _ in 0..len {
                got.push(v.to_integer().try_into().unwrap());
            }
        }
        let mut want: Vec<u32> = roots.iter().map(|r| r.0).collect();
        want.sort_unstable();
        got.sort_unstable();
        prop_assert_eq!(got, want);
        let total: u64 = np.segments.iter().map(|s| s.1).sum::<u64>() + np.zero_roots;
        prop_assert_eq!(total as isize, p.degree());
        prop_assert!(np.segments.windows(2).all(|w| w[0].0 <= w[1].0));
    }

    #[test]
    fn smoothness_round_trip(exps in prop::collection::vec(0u32..12, 6)) {
        let primes = [2u64, 3, 5, 7, 409, 23879];
        let mut c = BigInt::one();
        for (p, e) in primes.iter().zip(&exps) {
            c *= BigInt::from(*p).pow(*e);
        }
        let r = smoothness_report(&c, 1_000_000).unwrap();
        prop_assert!(r.smooth);
        let want: Vec<(u64, u32)> = primes.iter().zip(&exps).filter(|(_, e)| **e > 0).map(|(p, e)| (*p, *e)).collect();
        prop_assert_eq!(r.factors, want);
    }
}
