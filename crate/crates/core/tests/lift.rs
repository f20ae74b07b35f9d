use cm2::agm2::{canonical_lift, igusa_abs_from_rosenhain};
use cm2::curves::CurveChar2;
use cm2::gf2m::Gf2m;
use cm2::padic::Qq;
use num_bigint::BigInt;

fn cubic_curve() -> CurveChar2 {
    CurveChar2::new(Gf2m::new(3).unwrap(), vec![0, 1, 1], vec![0, 3, 7, 5, 0, 1]).unwrap()
}

fn h1() -> Vec<BigInt> {
    include_str!("data/h1_cubic.txt")
        .split_whitespace()
        .map(|s| s.parse().unwrap())
        .collect()
}

fn eval(coeffs: &[BigInt], x: &Qq) -> Qq {
    let ctx = x.ctx();
    let mut acc = Qq::zero(ctx);
    for c in coeffs.iter().rev() {
        acc = acc.mul(x).add(&Qq::from_int(ctx, c.clone()));
    }
    acc
}

#[test]
fn lifted_j1_is_a_root_of_the_known_class_polynomial() {
    let lift = canonical_lift(&cubic_curve(), 160).unwrap();
    let inv = igusa_abs_from_rosenhain(&lift.rosenhain).unwrap();
    let r = eval(&h1(), &inv.j1);
    assert!(inv.j1.abs_precision() >= 100);
    assert!(r.valuation() >= 100, "residual valuation {}", r.valuation());
}

#[test]
fn low_precision_lift_is_a_truncation() {
    let hi = canonical_lift(&cubic_curve(), 120).unwrap();
    let lo = canonical_lift(&cubic_curve(), 40).unwrap();
    let a = igusa_abs_from_rosenhain(&hi.rosenhain).unwrap();
    let b = igusa_abs_from_rosenhain(&lo.rosenhain).unwrap();
    for (x, y) in [(&a.j1, &b.j1), (&a.j2, &b.j2), (&a.j3, &b.j3)] {
        assert!(x.agreement(y) >= 30);
    }
}
