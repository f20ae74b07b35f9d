//! Acceptance checks. One line per check; exits nonzero if a check fails that is not
//! listed in `KNOWN_FAILING`.

use cm2::agm1::hilbert_class_poly;
use cm2::agm2::{
    igusa_abs_from_rosenhain, igusa_abs_from_sextic, kernel_triple, richelot_step, richelot_transform,
    rosenhain_init, LIFT_MARGIN,
};
use cm2::cmfield::{class_count_s, definition_degrees, parse_field, splitting_type, Degree, QuarticCMField};
use cm2::curves::{abs_from_sigma, extension, model_over_base, normal_form_from_abc, sigma_from_abs, SigmaTriple};
use cm2::fp;
use cm2::gf2m::Gf2m;
use cm2::jacobian::{jacobian_order, Jacobian};
use cm2::padic::{PadicCtx, Qq, ZqElem};
use cm2::pipeline::{
    lift_invariants, parse_config, principal_types, recognize_invariants, run_pipeline, verify_artifacts,
    RunArtifacts,
};
use cm2::poly::{IntPoly, RecognizedPoly};
use cm2::recognize::{minpoly_recognize, newton_polygon};
use cm2::Error;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;
use std::time::{Duration, Instant};

/// Checks expected to fail; see the project notes.
const KNOWN_FAILING: &[&str] = &["4"];

const F8_FIELD: &str = include_str!("../data/fields/k_f8.field");
const F32_FIELD: &str = include_str!("../data/fields/k_f32.field");

const F8_RUN: &str = "curve = explicit
d = 3
modulus = b
h = 0 1 1
f = 0 3 7 5 0 1
precision = 1200
";

struct Harness {
    failed: Vec<String>,
}

impl Harness {
    fn check(&mut self, id: &str, what: &str, ok: bool, detail: impl std::fmt::Display) {
        let tag = match (ok, KNOWN_FAILING.contains(&id)) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("[{tag}] {id}: {what} -- {detail}");
        if !ok {
            self.failed.push(id.to_string());
        }
    }

    fn info(&self, id: &str, what: &str, detail: impl std::fmt::Display) {
        println!("[INFO] {id}: {what} -- {detail}");
    }
}

fn big(s: &str) -> BigInt {
    s.parse().unwrap()
}

/// sign · Π p^e · rest
fn fac(sign: i32, pe: &[(u64, u32)], rest: &str) -> BigInt {
    let mut x = big(rest);
    for &(p, e) in pe {
        x *= BigInt::from(p).pow(e);
    }
    if sign < 0 {
        -x
    } else {
        x
    }
}

/// Coefficients given from the top degree down.
fn poly_desc(c: Vec<BigInt>, den: u32) -> RecognizedPoly {
    let mut c = c;
    c.reverse();
    RecognizedPoly::new(IntPoly::new(c), BigInt::from(den))
}

fn known_h1() -> RecognizedPoly {
    poly_desc(
        vec![
            fac(1, &[(2, 18), (5, 36), (7, 24)], "1"),
            big("-11187730399273689774009740470140169672902905436515808105468750000"),
            big("501512527690591679504420832767471421512684501403834547644662988263671875000"),
            big("-10112409242787391786676284633730575047614543135572025667468221432704263857808262923"),
            big("118287000250588667564540744739406154398135978447792771928535541240797386992091828213521875"),
            fac(
                -1,
                &[(2, 1), (3, 50), (5, 10), (11, 1), (13, 1), (53, 1), (701, 1), (16319, 1)],
                "69938793494948953569198870004032131926868578084899317",
            ),
            fac(1, &[(3, 60), (5, 15), (23, 5), (409, 5), (179364113, 5)], "1"),
        ],
        1,
    )
}

fn known_g2() -> RecognizedPoly {
    poly_desc(
        vec![
            big("2734249284974589542086559782016563911333032280921936035156250000"),
            big("57554607277149797568849387967258354564256002479144001401149377453125000000"),
            big("2402137816085408582966361480412923409977297040376760501014543382338189483861887923"),
            big("-75691166837057576824962404339816428897154828109931810138346946500235981947587900092046875"),
            fac(
                1,
                &[(2, 1), (3, 48), (5, 10)],
                "35828519670812312117443096939126403484719666514876459782054400437",
            ),
            fac(
                -1,
                &[(3, 58), (5, 15), (11, 1), (13, 2), (23, 3), (409, 3), (23879, 1), (179364113, 3)],
                "370974539856105277",
            ),
        ],
        8,
    )
}

fn known_g3() -> RecognizedPoly {
    poly_desc(
        vec![
            big("200620022977265019387539624994933881234269211769104003906250000"),
            big("-23006467431764975697282545882188900514908468992554759536043135578125000000"),
            big("615017294619678068611319414718144161545088218260214211563850151291136646894987547"),
            big("-14310698742415340178789612716269299249317950024503557714370659520249839645781463819312875"),
            fac(
                -1,
                &[(2, 1), (3, 46), (5, 8), (13, 1), (61, 1), (18373951326869, 1)],
                "25713288587261208212107985724468058651509734160907",
            ),
            fac(
                1,
                &[(3, 55), (5, 13), (23, 2), (409, 2), (23561, 1), (440131, 1), (179364113, 2)],
                "451986402352017881724712641689",
            ),
        ],
        16,
    )
}

fn mismatches(got: &RecognizedPoly, want: &RecognizedPoly) -> usize {
    if got.denominator != want.denominator || got.numerator.degree() != want.numerator.degree() {
        return usize::MAX;
    }
    got.numerator
        .coeffs
        .iter()
        .zip(&want.numerator.coeffs)
        .filter(|(a, b)| a != b)
        .count()
}

// ---------------------------------------------------------------------------

fn genus1(h: &mut Harness) {
    let t = Instant::now();
    let got = hilbert_class_poly(-15, 28).map(|(p, _)| p);
    let el = t.elapsed();
    let want = IntPoly::new(vec![big("-121287375"), big("191025"), BigInt::one()]);
    let ok = got.as_ref().is_ok_and(|p| *p == want) && el < Duration::from_secs(1);
    let shown = match &got {
        Ok(p) => p.to_string(),
        Err(e) => e.to_string(),
    };
    h.check("1", "class polynomial of D = -15 mod 2^28", ok, format!("{shown} in {el:.2?} (limit 1 s)"));
}

struct F8Run {
    artifacts: Option<RunArtifacts>,
}

fn genus2(h: &mut Harness) -> F8Run {
    let k = parse_field(F8_FIELD).unwrap();
    let cfg = parse_config(F8_RUN).unwrap();
    let t = Instant::now();
    let run = run_pipeline(&cfg, Some(&k));
    let el = t.elapsed();
    let a = match run {
        Ok(a) => a,
        Err(e) => {
            h.check("2", "class polynomials of the F_8 curve at 1200 bits", false, e);
            h.check("3", "unit roots of H1", false, "no H1");
            h.check("5f", "orbit path equals direct path", false, "no run");
            return F8Run { artifacts: None };
        }
    };
    let bad = [
        mismatches(&a.h1, &known_h1()),
        mismatches(&a.g2, &known_g2()),
        mismatches(&a.g3, &known_g3()),
    ];
    h.check(
        "2",
        "class polynomials of the F_8 curve at 1200 bits",
        bad == [0, 0, 0] && el < Duration::from_secs(600),
        format!(
            "coefficient mismatches H1/G2/G3 = {bad:?}, denominators {}/{}/{}, {el:.1?} (limit 600 s)",
            a.h1.denominator, a.g2.denominator, a.g3.denominator
        ),
    );

    let np = newton_polygon(&a.h1.numerator);
    let units = np
        .as_ref()
        .map(|n| n.count_with_valuation(&BigRational::zero()))
        .unwrap_or(0);
    h.check("3", "roots of H1 of 2-adic valuation 0", units == 3, format!("{units} (want 3)"));

    // the two recognition paths on one set of lifted invariants
    let curve = match &cfg.source {
        cm2::pipeline::CurveSource::Explicit(c) => c.clone(),
        _ => unreachable!(),
    };
    let (inv, _) = lift_invariants(&curve, cfg.precision).unwrap();
    let mut log = Vec::new();
    let direct = recognize_invariants(&inv, &[6], false, false, &mut log);
    let orbit = recognize_invariants(&inv, &[6], true, false, &mut log);
    let same = match (&direct, &orbit) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    };
    h.check(
        "5f",
        "orbit path equals direct path",
        same,
        format!("direct ok: {}, orbit ok: {}", direct.is_ok(), orbit.is_ok()),
    );

    let low = parse_config(&F8_RUN.replace("1200", "96")).unwrap();
    let under = run_pipeline(&low, Some(&k));
    h.check(
        "2b",
        "96 bits is reported as insufficient precision",
        matches!(under.as_ref().map_err(|e| e.root()), Err(Error::InsufficientPrecision(_))),
        match &under {
            Ok(_) => "run succeeded".to_string(),
            Err(e) => e.to_string(),
        },
    );
    F8Run { artifacts: Some(a) }
}

fn mod_p(h: &mut Harness, run: &F8Run) {
    let k8 = parse_field(F8_FIELD).unwrap();
    let k32 = parse_field(F32_FIELD).unwrap();
    let Some(a) = &run.artifacts else {
        h.check("4", "H1 splits mod 47653 with six consistent triples", false, "no run");
        return;
    };
    let summary = |p: u64| -> (bool, String) {
        match verify_artifacts(a, p, &k8) {
            Ok(r) => {
                let good = r.triples.iter().filter(|t| !t.singular && t.consistent).count();
                let degs: Vec<String> = r.factor_degrees.iter().map(|(d, m)| format!("{d}^{m}")).collect();
                (
                    r.splits_completely && good == 6,
                    format!(
                        "{}; factor degrees [{}]; {good} consistent triples",
                        r.pattern,
                        degs.join(" ")
                    ),
                )
            }
            Err(e) => (false, e.to_string()),
        }
    };
    let (ok, detail) = summary(47653);
    h.check("4", "H1 splits mod 47653 with six consistent triples", ok, detail);

    // the smallest prime at which both types of principal product occur for this field
    let (ok, detail) = summary(2111);
    h.check("4b", "H1 splits mod 2111 with six consistent triples", ok, detail);

    let t = principal_types(&k32, 47653).unwrap_or(0);
    let pat = splitting_type(&k32, 47653).map(|p| p.to_string()).unwrap_or_default();
    h.info("4c", "47653 for the F_32 field", format!("{pat}; {t} principal types"));
    let t = principal_types(&k8, 47653).unwrap_or(0);
    let pat = splitting_type(&k8, 47653).map(|p| p.to_string()).unwrap_or_default();
    h.info("4d", "47653 for the F_8 field", format!("{pat}; {t} principal types"));

    let mut bent = a.clone();
    let lead = bent.h1.numerator.coeffs.last_mut().unwrap();
    *lead *= 10007;
    let r = verify_artifacts(&bent, 2111, &k8).unwrap();
    h.check(
        "4e",
        "a leading coefficient with a large prime factor is flagged",
        !r.leading.smooth && !r.passed(),
        format!("smooth = {}", r.leading.smooth),
    );
}

// ---------------------------------------------------------------------------
// property suite

fn sigma_round_trip(h: &mut Harness) {
    let mut n = 0u64;
    let mut bad = 0u64;
    for d in 1..=5 {
        let f = Gf2m::new(d).unwrap();
        for s1 in f.elements() {
            for s2 in f.elements() {
                for s3 in 1..f.order() {
                    let s = SigmaTriple { s1, s2, s3 };
                    n += 1;
                    let back = abs_from_sigma(&f, &s).and_then(|j| sigma_from_abs(&f, &j));
                    if back.ok() != Some(s) {
                        bad += 1;
                    }
                }
            }
        }
    }
    h.check("5a", "s-triple round trip, d <= 5", bad == 0, format!("{bad} of {n} differ"));
}

fn zq_sqrt(h: &mut Harness) {
    const N: u32 = 10;
    let mut bad = 0u64;
    let mut n = 0u64;
    for d in 1..=2u32 {
        let ctx = PadicCtx::new(&Gf2m::new(d).unwrap(), N).unwrap();
        let all: Vec<Vec<BigInt>> = if d == 1 {
            (0..1u32 << N).map(|a| vec![BigInt::from(a)]).collect()
        } else {
            (0..1u32 << (2 * N))
                .map(|x| vec![BigInt::from(x & 1023), BigInt::from(x >> N)])
                .collect()
        };
        // oracle: squares of the elements ≡ 1 mod 4
        let squares: HashSet<Vec<BigInt>> = all
            .iter()
            .filter(|c| c[0].mod_floor(&4.into()).is_one() && c[1..].iter().all(|x| (x % 4u32).is_zero()))
            .map(|c| {
                let z = ZqElem::from_coeffs(&ctx, c.clone());
                z.mul(&z).coeffs().to_vec()
            })
            .collect();
        for c in &all {
            n += 1;
            let z = ZqElem::from_coeffs(&ctx, c.clone());
            let ok = match z.sqrt_normalized() {
                Ok(r) => {
                    squares.contains(c)
                        && r.coeffs()[0].mod_floor(&4.into()).is_one()
                        && r.coeffs()[1..].iter().all(|x| (x % 4u32).is_zero())
                        && r.mul(&r) == z
                }
                Err(_) => !squares.contains(c),
            };
            if !ok {
                bad += 1;
            }
        }
    }
    h.check("5b", "Z_q square roots at N = 10, d = 1 and 2", bad == 0, format!("{bad} of {n} wrong"));
}

fn hensel_root(p: &IntPoly, r0: u8, bits: u32) -> BigInt {
    let m = BigInt::one() << bits;
    let dp = p.derivative();
    let mut r = BigInt::from(r0);
    for _ in 0..=bits.ilog2() + 1 {
        let inv = dp.eval(&r).mod_floor(&m).modinv(&m).unwrap();
        r = (&r - p.eval(&r) * inv).mod_floor(&m);
    }
    r
}

fn irreducible_over_q(p: &IntPoly) -> bool {
    let d = p.degree();
    [3u64, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]
        .iter()
        .any(|&q| fp::deg(&p.mod_p(q)) == d && fp::is_irreducible(&p.mod_p(q), q))
}

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
        if IntPoly::new(c.clone()).eval(&BigInt::from(r0)).is_odd() {
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

fn planted_recovery(h: &mut Harness) {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let gf = Gf2m::new(1).unwrap();
    let mut bad = 0;
    for i in 0..200 {
        let n = 1 + i % 8;
        let (p, r0) = planted(&mut rng, n);
        let height: u32 = p.coeffs.iter().map(|c| c.bits() as u32 + 1).sum();
        // room for the minimum gap in every lattice coordinate
        let prec = 4 * height + 24 * (n as u32 + 1);
        let ctx = PadicCtx::new(&gf, prec + 64).unwrap();
        let alpha = Qq::from_int(&ctx, hensel_root(&p, r0, prec + 64)).truncate_abs((prec + 64) as i64);
        match minpoly_recognize(&alpha, n, prec) {
            Ok(g) if g.numerator == p && g.denominator.is_one() => {}
            Ok(g) => {
                bad += 1;
                println!("    planted {p}: got {}", g.numerator);
            }
            Err(e) => {
                bad += 1;
                println!("    planted {p}: {e}");
            }
        }
    }
    h.check("5c", "recovery of 200 planted polynomials, degree <= 8", bad == 0, format!("{bad} of 200 missed"));
}

fn richelot_paths(h: &mut Harness) {
    let k = Gf2m::new(3).unwrap();
    let ctx = PadicCtx::new(&k, 64 + LIFT_MARGIN).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(64);
    let mut bad = 0;
    let mut worst = i64::MAX;
    for _ in 0..100 {
        let c = normal_form_from_abc(
            &k,
            rng.gen_range(1..k.order()),
            rng.gen_range(1..k.order()),
            rng.gen_range(1..k.order()),
        );
        let agree = (|| -> cm2::Result<(i64, i64)> {
            let r = rosenhain_init(&c, &ctx)?;
            let a = igusa_abs_from_rosenhain(&richelot_step(&r)?)?;
            let b = igusa_abs_from_sextic(&richelot_transform(&kernel_triple(&r))?)?;
            let want = (a.precision.min(b.precision) as i64).min(64);
            let got = a.j1.agreement(&b.j1).min(a.j2.agreement(&b.j2)).min(a.j3.agreement(&b.j3));
            Ok((got, want))
        })();
        match agree {
            Ok((got, want)) => {
                worst = worst.min(got);
                if got < want {
                    bad += 1;
                }
            }
            Err(_) => bad += 1,
        }
    }
    h.check(
        "5d",
        "Richelot step vs bracket construction, 100 curves over F_8 at N = 64",
        bad == 0,
        format!("{bad} disagree; least agreement {worst} bits"),
    );
}

/// #J(F_{q^e}) by enumeration against the Frobenius polynomial over F_q, with e the
/// least degree making a Weierstrass point rational (e ≤ 3, extension degree ≤ 6).
fn jacobian_orders(h: &mut Harness) {
    let (mut n, mut bad, mut skipped) = (0, 0, 0);
    for d in 1..=4u32 {
        let f = Gf2m::new(d).unwrap();
        for s1 in f.elements() {
            for s2 in f.elements() {
                for s3 in 1..f.order() {
                    let c = match model_over_base(&f, &SigmaTriple { s1, s2, s3 }) {
                        Ok(c) => c,
                        Err(_) => {
                            bad += 1;
                            continue;
                        }
                    };
                    let Some(e) = (1..=3).filter(|e| d * e <= 6).find(|&e| {
                        let (_, emb) = extension(&f, e).unwrap();
                        c.base_change(&emb).imaginary_model().is_ok()
                    }) else {
                        skipped += 1;
                        continue;
                    };
                    n += 1;
                    let ok = (|| -> cm2::Result<bool> {
                        let (_, emb) = extension(&f, e)?;
                        let order = Jacobian::new(&c.base_change(&emb))?.elements()?.len();
                        Ok(BigInt::from(order) == jacobian_order(&c.frobenius_charpoly()?, e))
                    })();
                    if ok.ok() != Some(true) {
                        bad += 1;
                    }
                }
            }
        }
    }
    h.check(
        "5e",
        "#J = f(1) for every s-triple, d <= 4",
        bad == 0,
        format!("{bad} of {n} differ; {skipped} need a Weierstrass point beyond degree 6"),
    );
}

// ---------------------------------------------------------------------------

fn degrees_shown(d: &[Degree]) -> String {
    d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn field_data(h: &mut Harness, k: &QuarticCMField, id: &str, s_want: u64, supplied_want: &[u64], search_want: u32) {
    let s = class_count_s(k, None).ok();
    let pat = splitting_type(k, 2).unwrap();
    let supplied = definition_degrees(k, &pat, Some(&k.ideal_orders));
    let search = definition_degrees(k, &pat, None);
    let sup_ok = supplied.as_ref().is_ok_and(|d| {
        d.degrees.len() == supplied_want.len()
            && d.degrees.iter().zip(supplied_want).all(|(a, b)| *a == Degree::Known(*b as u32))
    });
    let search_ok = search
        .as_ref()
        .is_ok_and(|d| d.degrees.first() == Some(&Degree::Known(search_want)));
    let show = |r: &cm2::Result<cm2::cmfield::DefinitionDegrees>| match r {
        Ok(d) => degrees_shown(&d.degrees),
        Err(e) => e.to_string(),
    };
    h.check(
        id,
        &format!("field data for {}", k.name),
        s == Some(s_want) && sup_ok && search_ok,
        format!(
            "s = {s:?} (want {s_want}); {pat}; supplied orders {:?} give degrees {}; search gives {}",
            k.ideal_orders,
            show(&supplied),
            show(&search)
        ),
    );
}

fn main() {
    let mut h = Harness { failed: Vec::new() };
    let t = Instant::now();
    genus1(&mut h);
    let run = genus2(&mut h);
    mod_p(&mut h, &run);
    sigma_round_trip(&mut h);
    zq_sqrt(&mut h);
    planted_recovery(&mut h);
    richelot_paths(&mut h);
    jacobian_orders(&mut h);
    field_data(&mut h, &parse_field(F8_FIELD).unwrap(), "6a", 6, &[3], 3);
    field_data(&mut h, &parse_field(F32_FIELD).unwrap(), "6b", 100, &[5, 25], 5);

    let unexpected: Vec<&String> = h.failed.iter().filter(|id| !KNOWN_FAILING.contains(&id.as_str())).collect();
    println!(
        "acceptance: {} failed ({} known), {:.1?}",
        h.failed.len(),
        h.failed.len() - unexpected.len(),
        t.elapsed()
    );
    if !unexpected.is_empty() {
        std::process::exit(1);
    }
}
