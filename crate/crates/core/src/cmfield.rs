//! Quartic CM fields K = Q(θ), θ^2 = (−a + √(a^2 − 4b))/2, given by x^4 + a x^2 + b:
//! field data files, splitting of primes, the p-rank table, class counts, fields of
//! definition of CM curves in characteristic 2, and Frobenius elements w with w w̄ = q.

use crate::curves::weil_check;
use crate::error::{Error, Result};
use crate::fp;
use crate::poly::{is_square, IntPoly};
use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use std::fmt;

/// Largest q accepted by `frobenius_candidates`.
pub const FROBENIUS_GUARD: u64 = 1 << 40;
/// Largest extension degree tried by the principality search.
pub const PRINCIPALITY_CAP: u32 = 30;
/// Number of traces the principality search may look at for one q.
pub const SEARCH_BUDGET: u64 = 1 << 24;

type Q = BigRational;

fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

fn qi(n: &BigInt) -> Q {
    Q::from_integer(n.clone())
}

#[derive(Clone, Debug)]
pub struct QuarticCMField {
    pub name: String,
    pub a: BigInt,
    pub b: BigInt,
    pub k0_disc: BigInt,
    /// basis[j][i] is the coefficient of θ^i in ω_j.
    pub basis: Vec<Vec<Q>>,
    pub index: BigInt,
    /// conj[j] holds the coordinates of ω̄_j.
    pub conj: Vec<Vec<BigInt>>,
    pub h_k: u64,
    pub h_k0: u64,
    pub eps0_norm: i8,
    pub eps0_is_norm_from_k: bool,
    pub normal: bool,
    /// Class orders of the ideals above 2 that decide the fields of definition, when known.
    pub ideal_orders: Vec<u64>,
    inv_basis: Vec<Vec<Q>>,
    table: Vec<Vec<Vec<BigInt>>>,
    /// a^2 − 4b = c^2 r with r squarefree.
    r: BigInt,
    c: BigInt,
}

/// Class data that is given rather than computed.
#[derive(Clone, Debug)]
pub struct ClassData {
    pub h_k: u64,
    pub h_k0: u64,
    pub eps0_norm: i8,
    pub eps0_is_norm_from_k: bool,
    pub normal: bool,
    pub ideal_orders: Vec<u64>,
}

/// Largest real-subfield discriminant accepted; it is checked for squarefreeness by
/// trial division.
pub const K0_DISC_LIMIT: u64 = 1 << 40;

fn is_squarefree(n: &BigInt) -> bool {
    let mut m = n.abs();
    let mut d = BigInt::from(2);
    while &d * &d <= m {
        if m.is_multiple_of(&d) {
            m /= &d;
            if m.is_multiple_of(&d) {
                return false;
            }
        }
        d += 1;
    }
    true
}

/// c with n = c^2 r, if there is one.
fn square_cofactor(n: &BigInt, r: &BigInt) -> Option<BigInt> {
    if r.is_zero() || !n.is_multiple_of(r) {
        return None;
    }
    is_square(&(n / r))
}

/// The squarefree r with Q(√r) of discriminant d, if d is fundamental.
fn squarefree_of_disc(d: &BigInt) -> Option<BigInt> {
    let r = if d.mod_floor(&BigInt::from(4)) == BigInt::one() {
        d.clone()
    } else if matches!(u8::try_from(d.mod_floor(&BigInt::from(16))), Ok(8 | 12)) {
        d / 4u8
    } else {
        return None;
    };
    is_squarefree(&r).then_some(r)
}

fn invert(m: &[Vec<Q>]) -> Option<Vec<Vec<Q>>> {
    let n = m.len();
    let mut a: Vec<Vec<Q>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    for c in 0..n {
        let piv = (c..n).find(|&r| !a[r][c].is_zero())?;
        a.swap(c, piv);
        let inv = a[c][c].recip();
        for x in a[c].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..n {
            if r != c && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                for k in 0..2 * n {
                    let t = &f * &a[c][k];
                    a[r][k] -= t;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

fn det_q(m: &[Vec<Q>]) -> Q {
    let n = m.len();
    let mut a = m.to_vec();
    let mut d = Q::one();
    for c in 0..n {
        let Some(piv) = (c..n).find(|&r| !a[r][c].is_zero()) else {
            return Q::zero();
        };
        if piv != c {
            a.swap(piv, c);
            d = -d;
        }
        d *= &a[c][c];
        for r in c + 1..n {
            if !a[r][c].is_zero() {
                let f = &a[r][c] / &a[c][c];
                for k in c..n {
                    let t = &f * &a[c][k];
                    a[r][k] -= t;
                }
            }
        }
    }
    d
}

impl QuarticCMField {
    /// Validate the data: x^4 + a x^2 + b irreducible and totally imaginary, the real
    /// subfield discriminant, the basis spanning an order containing Z[θ] with the stated
    /// index, the conjugation matrix (computed when not given).
    pub fn new(
        name: &str,
        defining: &IntPoly,
        k0_disc: BigInt,
        basis: Vec<Vec<Q>>,
        index: Option<BigInt>,
        conj: Option<Vec<Vec<BigInt>>>,
        class: ClassData,
    ) -> Result<Self> {
        let bad = |m: String| Error::Invalid(m);
        if defining.degree() != 4 || !defining.leading().is_one() {
            return Err(bad("defining polynomial must be a monic quartic".into()));
        }
        if !defining.coeff(1).is_zero() || !defining.coeff(3).is_zero() {
            return Err(bad("defining polynomial must have the shape x^4 + a x^2 + b".into()));
        }
        let a = defining.coeff(2);
        let b = defining.coeff(0);
        let disc0: BigInt = &a * &a - &b * 4;
        if !a.is_positive() || !b.is_positive() || !disc0.is_positive() {
            return Err(bad("x^4 + a x^2 + b is not totally imaginary".into()));
        }
        if is_square(&disc0).is_some() {
            return Err(bad("a^2 − 4b is a square: x^4 + a x^2 + b is reducible".into()));
        }
        if let Some(s) = is_square(&b) {
            for d in [&s, &(-&s)] {
                if is_square(&(d * 2 - &a)).is_some() {
                    return Err(bad("x^4 + a x^2 + b factors into two quadratics".into()));
                }
            }
        }
        if !k0_disc.is_positive() || k0_disc > BigInt::from(K0_DISC_LIMIT) {
            return Err(bad(format!("real subfield discriminant {k0_disc} out of range")));
        }
        let r = squarefree_of_disc(&k0_disc)
            .ok_or_else(|| bad(format!("{k0_disc} is not a fundamental discriminant")))?;
        let c = square_cofactor(&disc0, &r)
            .ok_or_else(|| bad(format!("real subfield is not Q(√{r}): a^2 − 4b = {disc0}")))?;
        if basis.len() != 4 || basis.iter().any(|v| v.len() != 4) {
            return Err(bad("integral basis needs four vectors of four rationals".into()));
        }
        if class.h_k == 0 || class.h_k0 == 0 || !matches!(class.eps0_norm, 1 | -1) {
            return Err(bad("class data out of range".into()));
        }
        // rows of m: power-basis coordinates; m^T maps basis coordinates to powers
        let mt: Vec<Vec<Q>> = (0..4).map(|i| (0..4).map(|j| basis[j][i].clone()).collect()).collect();
        let inv_basis = invert(&mt).ok_or_else(|| bad("integral basis is singular".into()))?;
        let det = det_q(&mt).abs();
        if !det.numer().is_one() {
            return Err(bad("Z[θ] is not contained in the span of the basis".into()));
        }
        let idx = det.denom().clone();
        if let Some(i) = &index {
            if *i != idx {
                return Err(bad(format!("stated index {i}, basis gives {idx}")));
            }
        }
        let mut k = QuarticCMField {
            name: name.to_string(),
            a,
            b,
            k0_disc,
            basis,
            index: idx,
            conj: Vec::new(),
            h_k: class.h_k,
            h_k0: class.h_k0,
            eps0_norm: class.eps0_norm,
            eps0_is_norm_from_k: class.eps0_is_norm_from_k,
            normal: class.normal,
            ideal_orders: class.ideal_orders,
            inv_basis,
            table: Vec::new(),
            r,
            c,
        };
        for i in 0..4 {
            let mut e = vec![Q::zero(); 4];
            e[i] = Q::one();
            if k.from_power(&e).is_none() {
                return Err(bad(format!("θ^{i} is not in the span of the basis")));
            }
        }
        let mut table = vec![vec![Vec::new(); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                let p = k.power_mul(&k.basis[i], &k.basis[j]);
                table[i][j] = k
                    .from_power(&p)
                    .ok_or_else(|| bad("the basis does not span a ring".into()))?;
            }
        }
        k.table = table;
        let computed: Vec<Vec<BigInt>> = (0..4)
            .map(|j| {
                let p: Vec<Q> = k.basis[j]
                    .iter()
                    .enumerate()
                    .map(|(i, x)| if i % 2 == 1 { -x } else { x.clone() })
                    .collect();
                k.from_power(&p)
                    .ok_or_else(|| bad("the order is not stable under conjugation".into()))
            })
            .collect::<Result<_>>()?;
        if let Some(cm) = conj {
            if cm != computed {
                return Err(bad("conjugation matrix does not match θ ↦ −θ".into()));
            }
        }
        k.conj = computed;
        let dk = k.discriminant();
        if !dk.is_multiple_of(&(&k.k0_disc * &k.k0_disc)) {
            return Err(bad(format!("discriminant {dk} is not divisible by D0^2")));
        }
        Ok(k)
    }

    pub fn defining(&self) -> IntPoly {
        IntPoly::new(vec![
            self.b.clone(),
            BigInt::zero(),
            self.a.clone(),
            BigInt::zero(),
            BigInt::one(),
        ])
    }

    /// Discriminant of the order spanned by the basis.
    pub fn discriminant(&self) -> BigInt {
        let m: BigInt = &self.a * &self.a - &self.b * 4;
        let d = &self.b * 16 * &m * &m;
        d / (&self.index * &self.index)
    }

    fn power_mul(&self, x: &[Q], y: &[Q]) -> Vec<Q> {
        let mut z = vec![Q::zero(); 7];
        for i in 0..4 {
            for j in 0..4 {
                z[i + j] += &x[i] * &y[j];
            }
        }
        // θ^4 = −a θ^2 − b
        let (a, b) = (qi(&self.a), qi(&self.b));
        for k in (4..7).rev() {
            let t = z[k].clone();
            z[k - 2] -= &a * &t;
            z[k - 4] -= &b * &t;
        }
        z.truncate(4);
        z
    }

    /// Integral-basis coordinates of a power-basis vector, if they are integers.
    pub fn from_power(&self, x: &[Q]) -> Option<Vec<BigInt>> {
        (0..4)
            .map(|i| {
                let v: Q = (0..4).map(|j| &self.inv_basis[i][j] * &x[j]).sum();
                v.is_integer().then(|| v.to_integer())
            })
            .collect()
    }

    pub fn to_power(&self, x: &[BigInt]) -> Vec<Q> {
        (0..4)
            .map(|i| (0..4).map(|j| &self.basis[j][i] * qi(&x[j])).sum())
            .collect()
    }

    pub fn mul(&self, x: &[BigInt], y: &[BigInt]) -> Vec<BigInt> {
        let mut z = vec![BigInt::zero(); 4];
        for i in 0..4 {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..4 {
                if y[j].is_zero() {
                    continue;
                }
                let xy = &x[i] * &y[j];
                for (zk, t) in z.iter_mut().zip(&self.table[i][j]) {
                    *zk += &xy * t;
                }
            }
        }
        z
    }

    pub fn conjugate(&self, x: &[BigInt]) -> Vec<BigInt> {
        let mut z = vec![BigInt::zero(); 4];
        for j in 0..4 {
            for i in 0..4 {
                z[i] += &x[j] * &self.conj[j][i];
            }
        }
        z
    }

    pub fn one(&self) -> Vec<BigInt> {
        self.from_power(&[Q::one(), Q::zero(), Q::zero(), Q::zero()]).unwrap()
    }

    /// N_{K/Q}(x) as the determinant of multiplication by x.
    pub fn norm(&self, x: &[BigInt]) -> BigInt {
        let cols: Vec<Vec<BigInt>> = (0..4)
            .map(|j| {
                let mut e = vec![BigInt::zero(); 4];
                e[j] = BigInt::one();
                self.mul(x, &e)
            })
            .collect();
        let m: Vec<Vec<Q>> = (0..4).map(|i| (0..4).map(|j| qi(&cols[j][i])).collect()).collect();
        det_q(&m).to_integer()
    }

    fn table_mod(&self, p: u64) -> Vec<Vec<Vec<u64>>> {
        self.table
            .iter()
            .map(|r| r.iter().map(|v| v.iter().map(|c| fp::reduce_big(c, p)).collect()).collect())
            .collect()
    }
}

// ---------------------------------------------------------------------------
// field files

fn parse_rational(s: &str) -> Option<Q> {
    match s.split_once('/') {
        Some((n, d)) => {
            let d: BigInt = d.parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Q::new(n.parse().ok()?, d))
        }
        None => Some(Q::from_integer(s.parse().ok()?)),
    }
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" | "yes" | "1" => Some(true),
        "false" | "no" | "0" => Some(false),
        _ => None,
    }
}

/// Parse a field file. Keys (one `key = value` per line, `#` comments):
/// `name`, `poly` (integer coefficients low to high), `k0_disc`, `basis` (four vectors of
/// rationals over the power basis separated by `|`), optional `index` and `conj` (integer
/// matrix over the basis, one vector per basis element), `h_k`, `h_k0`, `eps0_norm`,
/// `eps0_is_norm_from_k`, `normal`, optional `ideal_orders`.
pub fn parse_field(text: &str) -> Result<QuarticCMField> {
    let mut name = String::new();
    let mut poly = None;
    let mut k0 = None;
    let mut basis = None;
    let mut index = None;
    let mut conj = None;
    let mut h_k = None;
    let mut h_k0 = 1u64;
    let mut eps0_norm = None;
    let mut eps0_is_norm = false;
    let mut normal = None;
    let mut orders = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let err = |m: &str| Error::parse(no + 1, m);
        let (k, v) = line.split_once('=').ok_or_else(|| err("expected key = value"))?;
        let v = v.trim();
        let ints = |v: &str| -> Result<Vec<BigInt>> {
            v.split_whitespace()
                .map(|t| t.parse().map_err(|_| err("bad integer")))
                .collect()
        };
        let vectors = |v: &str| -> Result<Vec<Vec<Q>>> {
            v.split('|')
                .map(|part| {
                    part.split_whitespace()
                        .map(|t| parse_rational(t).ok_or_else(|| err("bad rational")))
                        .collect()
                })
                .collect()
        };
        match k.trim() {
            "name" => name = v.to_string(),
            "poly" => poly = Some(IntPoly::new(ints(v)?)),
            "k0_disc" => k0 = Some(v.parse::<BigInt>().map_err(|_| err("bad integer"))?),
            "basis" => basis = Some(vectors(v)?),
            "index" => index = Some(v.parse::<BigInt>().map_err(|_| err("bad integer"))?),
            "conj" => {
                let m = vectors(v)?;
                if m.iter().flatten().any(|x| !x.is_integer()) {
                    return Err(err("conjugation matrix must be integral"));
                }
                conj = Some(
                    m.into_iter()
                        .map(|r| r.into_iter().map(|x| x.to_integer()).collect())
                        .collect::<Vec<Vec<BigInt>>>(),
                );
            }
            "h_k" => h_k = Some(v.parse().map_err(|_| err("bad class number"))?),
            "h_k0" => h_k0 = v.parse().map_err(|_| err("bad class number"))?,
            "eps0_norm" => eps0_norm = Some(v.parse::<i8>().map_err(|_| err("bad unit norm"))?),
            "eps0_is_norm_from_k" => eps0_is_norm = parse_bool(v).ok_or_else(|| err("bad flag"))?,
            "normal" => normal = Some(parse_bool(v).ok_or_else(|| err("bad flag"))?),
            "ideal_orders" => {
                orders = v
                    .split_whitespace()
                    .map(|t| t.parse().map_err(|_| err("bad order")))
                    .collect::<Result<_>>()?
            }
            other => return Err(err(&format!("unknown key '{other}'"))),
        }
    }
    let missing = |k: &str| Error::parse(0, format!("missing {k}"));
    if let Some(c) = &conj {
        if c.len() != 4 || c.iter().any(|r| r.len() != 4) {
            return Err(Error::parse(0, "conjugation matrix must be 4 x 4"));
        }
    }
    QuarticCMField::new(
        &name,
        &poly.ok_or_else(|| missing("poly"))?,
        k0.ok_or_else(|| missing("k0_disc"))?,
        basis.ok_or_else(|| missing("basis"))?,
        index,
        conj,
        ClassData {
            h_k: h_k.ok_or_else(|| missing("h_k"))?,
            h_k0,
            eps0_norm: eps0_norm.ok_or_else(|| missing("eps0_norm"))?,
            eps0_is_norm_from_k: eps0_is_norm,
            normal: normal.ok_or_else(|| missing("normal"))?,
            ideal_orders: orders,
        },
    )
}

impl fmt::Display for QuarticCMField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[String]| v.join(" ");
        writeln!(f, "name = {}", self.name)?;
        writeln!(f, "poly = {} 0 {} 0 1", self.b, self.a)?;
        writeln!(f, "k0_disc = {}", self.k0_disc)?;
        let rows = |m: Vec<Vec<String>>| m.iter().map(|r| join(r)).collect::<Vec<_>>().join(" | ");
        writeln!(
            f,
            "basis = {}",
            rows(self.basis.iter().map(|v| v.iter().map(|x| x.to_string()).collect()).collect())
        )?;
        writeln!(f, "index = {}", self.index)?;
        writeln!(
            f,
            "conj = {}",
            rows(self.conj.iter().map(|v| v.iter().map(|x| x.to_string()).collect()).collect())
        )?;
        writeln!(f, "h_k = {}", self.h_k)?;
        writeln!(f, "h_k0 = {}", self.h_k0)?;
        writeln!(f, "eps0_norm = {}", self.eps0_norm)?;
        writeln!(f, "eps0_is_norm_from_k = {}", self.eps0_is_norm_from_k)?;
        writeln!(f, "normal = {}", self.normal)?;
        if !self.ideal_orders.is_empty() {
            let o: Vec<String> = self.ideal_orders.iter().map(|x| x.to_string()).collect();
            writeln!(f, "ideal_orders = {}", join(&o))?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// splitting of primes

/// (residue degree f, ramification index e) of the primes above p, sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplittingPattern {
    pub p: u64,
    pub k: Vec<(u32, u32)>,
    pub k0: Vec<(u32, u32)>,
}

impl SplittingPattern {
    pub fn new(p: u64, mut k: Vec<(u32, u32)>, mut k0: Vec<(u32, u32)>) -> Result<Self> {
        k.sort_unstable();
        k0.sort_unstable();
        let sum = |v: &[(u32, u32)]| v.iter().map(|&(f, e)| f * e).sum::<u32>();
        if sum(&k) != 4 || sum(&k0) != 2 || k.iter().chain(&k0).any(|&(f, e)| f == 0 || e == 0) {
            return Err(Error::Invalid("Σ e f must be 4 over K and 2 over K0".into()));
        }
        let pat = SplittingPattern { p, k, k0 };
        if !pat.refines() {
            return Err(Error::Inconsistent("pattern over K does not refine the one over K0".into()));
        }
        Ok(pat)
    }

    /// Each prime of K0 (f0, e0) must be covered by primes of K with f0 | f, e0 | e and
    /// Σ e f = 2 e0 f0.
    fn refines(&self) -> bool {
        fn assign(k: &[(u32, u32)], used: &mut [bool], k0: &[(u32, u32)]) -> bool {
            let Some((&(f0, e0), rest)) = k0.split_first() else {
                return used.iter().all(|&u| u);
            };
            let free: Vec<usize> = (0..k.len()).filter(|&i| !used[i]).collect();
            for mask in 1u32..(1 << free.len()) {
                let pick: Vec<usize> = free
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| mask >> b & 1 == 1)
                    .map(|(_, &i)| i)
                    .collect();
                let ok = pick.iter().all(|&i| k[i].0.is_multiple_of(f0) && k[i].1.is_multiple_of(e0))
                    && pick.iter().map(|&i| k[i].0 * k[i].1).sum::<u32>() == 2 * e0 * f0;
                if ok {
                    pick.iter().for_each(|&i| used[i] = true);
                    if assign(k, used, rest) {
                        return true;
                    }
                    pick.iter().for_each(|&i| used[i] = false);
                }
            }
            false
        }
        assign(&self.k, &mut vec![false; self.k.len()], &self.k0)
    }

    pub fn splits_completely(&self) -> bool {
        self.k == [(1, 1); 4]
    }
}

impl fmt::Display for SplittingPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: &[(u32, u32)]| {
            v.iter()
                .map(|&(f, e)| if e == 1 { format!("f{f}") } else { format!("f{f}e{e}") })
                .collect::<Vec<_>>()
                .join(" ")
        };
        write!(f, "p = {}: K [{}], K0 [{}]", self.p, show(&self.k), show(&self.k0))
    }
}

fn k0_pattern(d0: &BigInt, p: u64) -> Vec<(u32, u32)> {
    let pb = BigInt::from(p);
    if d0.is_multiple_of(&pb) {
        return vec![(1, 2)];
    }
    let split = if p == 2 {
        d0.mod_floor(&BigInt::from(8)) == BigInt::one()
    } else {
        let r = fp::reduce_big(d0, p);
        fp::powmod(r, (p - 1) / 2, p) == 1
    };
    if split {
        vec![(1, 1), (1, 1)]
    } else {
        vec![(2, 1)]
    }
}

fn check_prime(p: u64) -> Result<()> {
    if !fp::is_prime(p) {
        return Err(Error::Invalid(format!("{p} is not prime")));
    }
    Ok(())
}

/// Pattern from the factorization of x^4 + a x^2 + b mod p; only valid for p ∤ index.
pub fn splitting_type_dedekind(k: &QuarticCMField, p: u64) -> Result<SplittingPattern> {
    check_prime(p)?;
    if k.index.is_multiple_of(&BigInt::from(p)) {
        return Err(Error::Undecidable(format!(
            "{p} divides the index {}: pattern undecidable by this method",
            k.index
        )));
    }
    let f = k.defining().mod_p(p);
    let pat = fp::factor_degrees(&f, p);
    SplittingPattern::new(p, pat, k0_pattern(&k.k0_disc, p))
}

/// Splitting of p in K. Uses the factorization of the defining polynomial when p does
/// not divide the index, and the structure of O_K/pO_K otherwise.
pub fn splitting_type(k: &QuarticCMField, p: u64) -> Result<SplittingPattern> {
    check_prime(p)?;
    if !k.index.is_multiple_of(&BigInt::from(p)) {
        return splitting_type_dedekind(k, p);
    }
    let alg = ResidueAlgebra::new(k, p);
    let pat = alg.primes().iter().map(|q| (q.f, q.e)).collect();
    SplittingPattern::new(p, pat, k0_pattern(&k.k0_disc, p))
}

/// The finite algebra O_K / p O_K in integral-basis coordinates.
pub struct ResidueAlgebra {
    p: u64,
    table: Vec<Vec<Vec<u64>>>,
    one: Vec<u64>,
    /// The matrix of x ↦ x^(p^m) with p^m ≥ 4; it kills exactly the radical.
    frob_m: Vec<Vec<u64>>,
}

/// A prime above p: its idempotent in O_K/pO_K, residue degree and ramification index.
#[derive(Clone, Debug)]
pub struct PrimeAbove {
    pub idempotent: Vec<u64>,
    pub f: u32,
    pub e: u32,
}

impl ResidueAlgebra {
    pub fn new(k: &QuarticCMField, p: u64) -> Self {
        let one = k.one().iter().map(|c| fp::reduce_big(c, p)).collect();
        let mut alg = ResidueAlgebra {
            p,
            table: k.table_mod(p),
            one,
            frob_m: Vec::new(),
        };
        let m = if p >= 4 { 1 } else { 2 };
        let cols: Vec<Vec<u64>> = (0..4)
            .map(|j| {
                let mut x = vec![0; 4];
                x[j] = 1;
                (0..m).fold(x, |x, _| alg.pow(&x, p as u128))
            })
            .collect();
        alg.frob_m = transpose(&cols);
        alg
    }

    pub fn reduce(&self, x: &[BigInt]) -> Vec<u64> {
        x.iter().map(|c| fp::reduce_big(c, self.p)).collect()
    }

    pub fn mul(&self, x: &[u64], y: &[u64]) -> Vec<u64> {
        let p = self.p;
        let mut z = vec![0u64; 4];
        for i in 0..4 {
            if x[i] == 0 {
                continue;
            }
            for j in 0..4 {
                if y[j] == 0 {
                    continue;
                }
                let xy = fp::mulmod(x[i], y[j], p);
                for (zk, &t) in z.iter_mut().zip(&self.table[i][j]) {
                    *zk = fp::addmod(*zk, fp::mulmod(xy, t, p), p);
                }
            }
        }
        z
    }

    pub fn pow(&self, x: &[u64], mut e: u128) -> Vec<u64> {
        let mut acc = self.one.clone();
        let mut b = x.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            b = self.mul(&b, &b);
            e >>= 1;
        }
        acc
    }

    fn apply(m: &[Vec<u64>], x: &[u64], p: u64) -> Vec<u64> {
        m.iter()
            .map(|row| row.iter().zip(x).fold(0, |a, (&r, &v)| fp::addmod(a, fp::mulmod(r, v, p), p)))
            .collect()
    }

    pub fn is_nilpotent(&self, x: &[u64]) -> bool {
        Self::apply(&self.frob_m, x, self.p).iter().all(|&c| c == 0)
    }

    fn mult_matrix(&self, x: &[u64]) -> Vec<Vec<u64>> {
        let cols: Vec<Vec<u64>> = (0..4)
            .map(|j| {
                let mut e = vec![0; 4];
                e[j] = 1;
                self.mul(x, &e)
            })
            .collect();
        transpose(&cols)
    }

    /// Minimal polynomial of x over F_p, low to high, monic.
    fn minpoly(&self, x: &[u64]) -> Vec<u64> {
        let p = self.p;
        let mut pows = vec![self.one.clone()];
        loop {
            let next = self.mul(pows.last().unwrap(), x);
            pows.push(next);
            let m = transpose(&pows);
            if let Some(v) = fp::kernel(&m, p).into_iter().next() {
                return fp::monic(&v, p);
            }
        }
    }

    fn roots(&self, f: &[u64]) -> Vec<u64> {
        if self.p < 64 {
            (0..self.p).filter(|&a| fp::eval(f, a, self.p) == 0).collect()
        } else {
            fp::roots(f, self.p)
        }
    }

    /// The primes above p, from the primitive idempotents of O_K/pO_K. The elements with
    /// x^p = x form F_p^g, one factor per prime; for each of them 1 − (x − a)^(p−1) is
    /// the idempotent of {x = a}.
    pub fn primes(&self) -> Vec<PrimeAbove> {
        let p = self.p;
        let id: Vec<Vec<u64>> = (0..4)
            .map(|i| (0..4).map(|j| u64::from(i == j)).collect())
            .collect();
        let frob1: Vec<Vec<u64>> = {
            let cols: Vec<Vec<u64>> = (0..4)
                .map(|j| {
                    let mut x = vec![0; 4];
                    x[j] = 1;
                    self.pow(&x, p as u128)
                })
                .collect();
            transpose(&cols)
        };
        let fixed = fp::kernel(&sub_matrix(&frob1, &id, p), p);
        let mut idems = vec![self.one.clone()];
        for x in &fixed {
            let mp = self.minpoly(x);
            let mut next = Vec::new();
            for a in self.roots(&mp) {
                let shifted: Vec<u64> = x
                    .iter()
                    .zip(&self.one)
                    .map(|(&c, &o)| fp::submod(c, fp::mulmod(a, o, p), p))
                    .collect();
                let pw = self.pow(&shifted, (p - 1) as u128);
                let eps: Vec<u64> = self.one.iter().zip(&pw).map(|(&o, &w)| fp::submod(o, w, p)).collect();
                for e in &idems {
                    let prod = self.mul(e, &eps);
                    if prod.iter().any(|&c| c != 0) {
                        next.push(prod);
                    }
                }
            }
            idems = next;
        }
        idems
            .into_iter()
            .map(|e| {
                let le = self.mult_matrix(&e);
                let dim = fp::rank(&le, p) as u32;
                let f = fp::rank(&mat_mul(&self.frob_m, &le, p), p) as u32;
                PrimeAbove {
                    idempotent: e,
                    f,
                    e: dim / f,
                }
            })
            .collect()
    }
}

fn transpose(cols: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let n = cols.first().map_or(0, |c| c.len());
    (0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect()
}

fn sub_matrix(a: &[Vec<u64>], b: &[Vec<u64>], p: u64) -> Vec<Vec<u64>> {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(&x, &y)| fp::submod(x, y, p)).collect())
        .collect()
}

fn mat_mul(a: &[Vec<u64>], b: &[Vec<u64>], p: u64) -> Vec<Vec<u64>> {
    let n = b[0].len();
    a.iter()
        .map(|row| {
            (0..n)
                .map(|j| {
                    row.iter()
                        .zip(b)
                        .fold(0, |acc, (&x, r)| fp::addmod(acc, fp::mulmod(x, r[j], p), p))
                })
                .collect()
        })
        .collect()
}

// ---------------------------------------------------------------------------
// p-rank table

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PRank {
    Zero,
    One,
    Two,
    /// Supersingular or ordinary depending on the CM type.
    ZeroOrTwo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrankClass {
    /// Case number 1 to 4 of the classification.
    pub case: u8,
    pub p_rank: PRank,
    /// None when it depends on the CM type.
    pub cm_by_maximal: Option<bool>,
}

/// p-rank of the reduction of a CM abelian surface, from the splitting of p.
pub fn prank_classification(pat: &SplittingPattern) -> Result<PrankClass> {
    let k = pat.k.as_slice();
    let k0_ram = pat.k0 == [(1, 2)];
    let k0_inert = pat.k0 == [(2, 1)];
    let class = |case, p_rank, cm| PrankClass {
        case,
        p_rank,
        cm_by_maximal: cm,
    };
    match k {
        [(1, 1), (1, 1), (1, 1), (1, 1)] => Ok(class(1, PRank::Two, Some(true))),
        [(4, 1)] | [(1, 4)] | [(2, 2)] => Ok(class(2, PRank::Zero, Some(false))),
        [(2, 1), (2, 1)] if !k0_inert => Ok(class(2, PRank::Zero, Some(false))),
        [(1, 2), (1, 2)] if !k0_ram => Ok(class(2, PRank::Zero, Some(false))),
        [(1, 1), (1, 1), (2, 1)] | [(1, 1), (1, 1), (1, 2)] => Ok(class(3, PRank::One, Some(false))),
        [(2, 1), (2, 1)] => Ok(class(4, PRank::ZeroOrTwo, None)),
        [(1, 2), (1, 2)] => Ok(class(4, PRank::ZeroOrTwo, None)),
        _ => Err(Error::Invalid(format!("pattern {pat} is outside the classification"))),
    }
}

// ---------------------------------------------------------------------------
// class counts

/// Number s of principally polarized classes with CM by O_K. With `h_prime` (order of
/// the kernel of Cl(O_K) → Cl⁺(O_K0)) the general rule is used, otherwise the
/// h_K0 = 1 rule: h_K for normal fields, 2 h_K for non-normal ones.
pub fn class_count_s(k: &QuarticCMField, h_prime: Option<u64>) -> Result<u64> {
    if k.eps0_norm == -1 && k.eps0_is_norm_from_k {
        return Err(Error::Inconsistent(
            "a unit of norm −1 cannot be a relative norm from K".into(),
        ));
    }
    match h_prime {
        Some(0) => Err(Error::Invalid("h′ must be positive".into())),
        Some(h) if h > k.h_k => Err(Error::Inconsistent(format!("h′ = {h} exceeds h_K = {}", k.h_k))),
        Some(h) => Ok(match (k.eps0_norm, k.normal, k.eps0_is_norm_from_k) {
            (-1, true, _) => h,
            (-1, false, _) => 2 * h,
            (_, _, true) => h,
            _ => 2 * h,
        }),
        None if k.h_k0 == 1 => Ok(if k.normal { k.h_k } else { 2 * k.h_k }),
        None => Err(Error::Invalid("h′ is needed when h_K0 > 1".into())),
    }
}

// ---------------------------------------------------------------------------
// Frobenius elements

#[derive(Clone, Debug)]
pub struct FrobeniusCandidate {
    /// Coordinates over the integral basis.
    pub w: Vec<BigInt>,
    pub minpoly: IntPoly,
    pub group_order: BigInt,
}

/// Elements t = u + v ω0 of O_K0 (ω0 = √(D0/4) or (1 + √D0)/2) with |t|, |t'| ≤ 2√q,
/// in no particular order. Returns (u, v, trace, norm).
fn traces(d0: i128, q: u64) -> impl Iterator<Item = (i128, i128, i128, i128)> {
    let s = 2.0 * (q as f64).sqrt();
    let sd = (d0 as f64).sqrt();
    let odd = d0 % 4 != 0;
    let (half, om) = if odd { (0.5, (d0 - 1) / 4) } else { (0.0, d0 / 4) };
    // |t − t′| = |v|√D0 ≤ 2s
    let vmax = (2.0 * s / sd).floor() as i128 + 1;
    (-vmax..=vmax).flat_map(move |v| {
        // t = u + v (half ± √D0 / 2)
        let c = v as f64 * half;
        let w = (v as f64 * sd / 2.0).abs();
        let lo = (-s - c + w).floor() as i128 - 1;
        let hi = (s - c - w).ceil() as i128 + 1;
        (lo..=hi.max(lo - 1)).map(move |u| {
            let (tr, nm) = if odd {
                (2 * u + v, u * u + u * v - v * v * om)
            } else {
                (2 * u, u * u - v * v * om)
            };
            (u, v, tr, nm)
        })
    })
}

fn count_traces(d0: i128, q: u64) -> u64 {
    let s = 2.0 * (q as f64).sqrt();
    (4.0 * s * s / (d0 as f64).sqrt() + 8.0 * s + 16.0) as u64
}

impl QuarticCMField {
    /// √r as an element of K0 written in θ^2: √r = (2θ^2 + a)/c.
    fn k0_to_power(&self, x: &Q, y: &Q) -> Vec<Q> {
        let c = qi(&self.c);
        vec![x + y * qi(&self.a) / &c, Q::zero(), y * q(2) / &c, Q::zero()]
    }

    /// Square root in K0 = Q(√r) of X + Y√r.
    fn k0_sqrt(&self, x: &Q, y: &Q) -> Option<(Q, Q)> {
        let r = qi(&self.r);
        let n = x * x - y * y * &r;
        let sn = rat_sqrt(&n)?;
        for sgn in [1, -1] {
            let a2 = (x + &sn * q(sgn)) / q(2);
            if let Some(a) = rat_sqrt(&a2) {
                if a.is_zero() {
                    if let Some(b) = rat_sqrt(&(x / &r)) {
                        if y.is_zero() {
                            return Some((a, b));
                        }
                    }
                    continue;
                }
                let b = y / (q(2) * &a);
                if &a * &a + &b * &b * &r == *x {
                    return Some((a, b));
                }
            }
        }
        None
    }

    /// t = u + v ω0 as X + Y √r.
    fn k0_element(&self, u: i128, v: i128) -> (Q, Q) {
        let d0 = &self.k0_disc;
        // √D0 = g √r
        let g = (d0 / &self.r).sqrt();
        let (u, v) = (Q::from_integer(BigInt::from(u)), Q::from_integer(BigInt::from(v)));
        if d0.mod_floor(&BigInt::from(4)).is_zero() {
            // ω0 = √(D0/4) = (g/2) √r
            (u, v * qi(&g) / q(2))
        } else {
            (u + &v / q(2), v * qi(&g) / q(2))
        }
    }

    /// θ^2 = (−a + c√r)/2.
    fn theta_sq(&self) -> (Q, Q) {
        (-qi(&self.a) / q(2), qi(&self.c) / q(2))
    }

    /// w = (t + sθ)/2 with s^2 = (t^2 − 4q)/θ^2, if it is integral.
    fn frobenius_from_trace(&self, u: i128, v: i128, qq: u64) -> Option<Vec<BigInt>> {
        let (tx, ty) = self.k0_element(u, v);
        let r = qi(&self.r);
        let qv = Q::from_integer(BigInt::from(qq));
        // t^2 − 4q
        let nx = &tx * &tx + &ty * &ty * &r - q(4) * &qv;
        let ny = q(2) * &tx * &ty;
        let (hx, hy) = self.theta_sq();
        let hn = &hx * &hx - &hy * &hy * &r;
        // (nx + ny√r)/(hx + hy√r)
        let sx = (&nx * &hx - &ny * &hy * &r) / &hn;
        let sy = (&ny * &hx - &nx * &hy) / &hn;
        if sx.is_zero() && sy.is_zero() {
            return None;
        }
        let (ax, ay) = self.k0_sqrt(&sx, &sy)?;
        let t = self.k0_to_power(&tx, &ty);
        let s = self.k0_to_power(&ax, &ay);
        // sθ: shift the even part up by one
        let w: Vec<Q> = (0..4)
            .map(|i| {
                let st = if i % 2 == 1 { s[i - 1].clone() } else { Q::zero() };
                (&t[i] + st) / q(2)
            })
            .collect();
        self.from_power(&w)
    }

    fn check_frobenius(&self, w: &[BigInt], qq: u64) -> bool {
        let ww = self.mul(w, &self.conjugate(w));
        let target: Vec<BigInt> = self.one().iter().map(|c| c * BigInt::from(qq)).collect();
        ww == target
    }
}

fn rat_sqrt(x: &Q) -> Option<Q> {
    if x.is_negative() {
        return None;
    }
    Some(Q::new(is_square(x.numer())?, is_square(x.denom())?))
}

/// x^4 − T x^3 + (N + 2q) x^2 − q T x + q^2 for w with w + w̄ = t, Tr t = T, N t = N.
fn weil_poly(tr: i128, nm: i128, qq: u64) -> IntPoly {
    let qb = BigInt::from(qq);
    let t = BigInt::from(tr);
    IntPoly::new(vec![
        &qb * &qb,
        -(&qb * &t),
        BigInt::from(nm) + &qb * 2,
        -t,
        BigInt::one(),
    ])
}

/// Integer filter: (t^2 − 4q)/θ^2 can only be a square in K0 if its norm is a square,
/// i.e. b · N(t^2 − 4q) is a square.
fn norm_filter(tr: i128, nm: i128, qq: u64, b: i128) -> bool {
    let q = qq as i128;
    let n = nm * nm - 4 * q * (tr * tr - 2 * nm) + 16 * q * q;
    if n == 0 {
        return false;
    }
    let Some(x) = n.checked_mul(b) else {
        return is_square(&(BigInt::from(n) * BigInt::from(b))).is_some();
    };
    if x < 0 {
        return false;
    }
    let s = x.sqrt();
    s * s == x
}

/// Elements w ∈ O_K with w w̄ = q (q a prime or prime power), one per minimal polynomial
/// (so up to conjugation; w and −w are kept apart, they give twists). Every such w has
/// t = w + w̄ ∈ O_K0 with both conjugates of t at most 2√q, and w = (t + sθ)/2 with
/// s^2 = (t^2 − 4q)/θ^2.
pub fn frobenius_candidates(k: &QuarticCMField, qq: u64) -> Result<Vec<FrobeniusCandidate>> {
    if qq >= FROBENIUS_GUARD {
        return Err(Error::Guard(format!("q = {qq} above the enumeration bound")));
    }
    frobenius_search(k, qq, false)
}

fn frobenius_search(k: &QuarticCMField, qq: u64, ordinary_only: bool) -> Result<Vec<FrobeniusCandidate>> {
    let d0 = k.k0_disc.to_i128().ok_or_else(|| Error::Guard("D0 too large".into()))?;
    let b = k.b.to_i128().ok_or_else(|| Error::Guard("b too large".into()))?;
    let vmax = (4.0 * (qq as f64).sqrt() / (d0 as f64).sqrt()) as i128 + 2;
    let found: Vec<(Vec<BigInt>, IntPoly)> = (-vmax..=vmax)
        .into_par_iter()
        .flat_map_iter(|v0| {
            traces(d0, qq)
                .filter(move |&(_, v, _, _)| v == v0)
                .filter(|&(_, _, _, nm)| !ordinary_only || (nm + 2 * qq as i128) % prime_of(qq) as i128 != 0)
                .filter(move |&(_, _, tr, nm)| norm_filter(tr, nm, qq, b))
                .filter_map(move |(u, v, tr, nm)| {
                    let w = k.frobenius_from_trace(u, v, qq)?;
                    Some((w, weil_poly(tr, nm, qq)))
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let mut out: Vec<FrobeniusCandidate> = Vec::new();
    for (w, mp) in found {
        if out.iter().any(|c| c.minpoly == mp) {
            continue;
        }
        if !k.check_frobenius(&w, qq) || !weil_check(&mp, qq as f64) {
            return Err(Error::Verification(format!("candidate {w:?} fails w w̄ = {qq}")));
        }
        let group_order = mp.eval(&BigInt::one());
        out.push(FrobeniusCandidate {
            w,
            minpoly: mp,
            group_order,
        });
    }
    out.sort_by(|a, b| a.minpoly.coeffs.cmp(&b.minpoly.coeffs));
    Ok(out)
}

fn prime_of(q: u64) -> u64 {
    (2..=q).find(|d| q.is_multiple_of(*d)).unwrap_or(q)
}

/// Distinct group orders f_w(1) over the candidates.
pub fn group_orders(c: &[FrobeniusCandidate]) -> Vec<BigInt> {
    let mut v: Vec<BigInt> = c.iter().map(|x| x.group_order.clone()).collect();
    v.sort();
    v.dedup();
    v
}

// ---------------------------------------------------------------------------
// fields of definition in characteristic p

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Degree {
    Known(u32),
    /// Not found within the cap or the search budget.
    Unknown,
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::Known(d) => write!(f, "{d}"),
            Degree::Unknown => write!(f, "unknown"),
        }
    }
}

/// The admissible splittings for ordinary reduction, with the degrees of the fields of
/// definition: two (f1, f2) when p splits completely, one otherwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefinitionDegrees {
    pub case: u8,
    pub degrees: Vec<Degree>,
    /// Whether the degrees come from supplied ideal orders.
    pub supplied: bool,
}

fn admissible_case(pat: &SplittingPattern) -> Result<u8> {
    match (pat.k.as_slice(), pat.k0.as_slice()) {
        ([(1, 1), (1, 1), (1, 1), (1, 1)], _) => Ok(1),
        ([(2, 1), (2, 1)], [(2, 1)]) => Ok(2),
        ([(1, 2), (1, 2)], [(1, 2)]) => Ok(3),
        _ => Err(Error::Invalid(format!(
            "{pat} admits no ordinary reduction with CM by O_K"
        ))),
    }
}

/// Degrees of the fields F_{p^f} over which the CM curves reduce. Case 1 (p splits
/// completely): f1, f2 are the orders of p1 p2 and p1 p̄2. Case 2 (p inert in K0, split in
/// K/K0): the order of p. Case 3 (p ramified in K0, p = p1^2 p2^2): smallest f with p1^(2f)
/// principal. Supplied orders are used as given; otherwise a principality search runs.
pub fn definition_degrees(
    k: &QuarticCMField,
    pat: &SplittingPattern,
    ideal_orders: Option<&[u64]>,
) -> Result<DefinitionDegrees> {
    let case = admissible_case(pat)?;
    let want = if case == 1 { 2 } else { 1 };
    if let Some(o) = ideal_orders {
        if o.len() != want || o.iter().any(|&x| x == 0 || x > u32::MAX as u64) {
            return Err(Error::Invalid(format!("expected {want} positive ideal orders")));
        }
        return Ok(DefinitionDegrees {
            case,
            degrees: o.iter().map(|&x| Degree::Known(x as u32)).collect(),
            supplied: true,
        });
    }
    Ok(DefinitionDegrees {
        case,
        degrees: principality_search(k, pat, PRINCIPALITY_CAP, SEARCH_BUDGET)?,
        supplied: false,
    })
}

/// For f = 1, 2, … up to the cap (only f dividing h_K can be an ideal order), look for
/// w with w w̄ = p^f generating an ideal coprime to its conjugate, i.e. a generator of
/// the relevant ideal to the power f. In case 1 the two kinds of ideals are told apart
/// by which primes above p contain w. With N(ε0) = 1 and ε0 not a norm from K a
/// generator may exist without such a w, so misses are reported as unknown.
pub fn principality_search(
    k: &QuarticCMField,
    pat: &SplittingPattern,
    cap: u32,
    budget: u64,
) -> Result<Vec<Degree>> {
    let case = admissible_case(pat)?;
    let p = pat.p;
    let alg = ResidueAlgebra::new(k, p);
    let primes = alg.primes();
    let mut found: Vec<Degree> = vec![Degree::Unknown; if case == 1 { 2 } else { 1 }];
    // case 1: P and Q with Q ∉ {P, P̄}
    let (pi, qi_) = if case == 1 {
        let pc = conj_mod(k, &alg, &primes[0].idempotent);
        let qi_ = (1..4)
            .find(|&i| primes[i].idempotent != pc)
            .expect("four primes");
        (0, qi_)
    } else {
        (0, 0)
    };
    for f in 1..=cap {
        if !k.h_k.is_multiple_of(f as u64) {
            continue;
        }
        let Some(qq) = p.checked_pow(f) else { break };
        if qq >= FROBENIUS_GUARD || count_traces(k.k0_disc.to_i128().unwrap_or(i128::MAX), qq) > budget {
            break;
        }
        for c in frobenius_search(k, qq, true)? {
            let slot = if case == 1 {
                let wm = alg.reduce(&c.w);
                let inp = |i: usize| alg.is_nilpotent(&alg.mul(&primes[i].idempotent, &wm));
                usize::from(inp(pi) != inp(qi_))
            } else {
                0
            };
            if found[slot] == Degree::Unknown {
                found[slot] = Degree::Known(f);
            }
        }
        if found.iter().all(|d| *d != Degree::Unknown) {
            break;
        }
    }
    found.sort_by_key(|d| match d {
        Degree::Known(x) => *x as u64,
        Degree::Unknown => u64::MAX,
    });
    Ok(found)
}

fn conj_mod(k: &QuarticCMField, alg: &ResidueAlgebra, x: &[u64]) -> Vec<u64> {
    let xb: Vec<BigInt> = x.iter().map(|&c| BigInt::from(c)).collect();
    alg.reduce(&k.conjugate(&xb))
}

/// Whether the quartic Weil polynomial x^4 + a1 x^3 + a2 x^2 + q a1 x + q^2 is the
/// minimal polynomial of an element generating K: same real subfield, and K0(√(t^2 − 4q))
/// = K0(θ) for one of the two identifications of Q(t) with K0.
pub fn generates_field(k: &QuarticCMField, weil: &IntPoly) -> bool {
    if weil.degree() != 4 || !weil.leading().is_one() {
        return false;
    }
    let a1 = qi(&weil.coeff(3));
    let a2 = qi(&weil.coeff(2));
    let qsq = weil.coeff(0);
    let Some(qq) = is_square(&qsq) else { return false };
    let qv = qi(&qq);
    // t satisfies X^2 + a1 X + (a2 − 2q)
    let delta = &a1 * &a1 - q(4) * (&a2 - q(2) * &qv);
    if !delta.is_integer() || !delta.is_positive() {
        return false;
    }
    let dl = delta.to_integer();
    if is_square(&dl).is_some() {
        return false;
    }
    let Some(g) = square_cofactor(&dl, &k.r) else { return false };
    let r = qi(&k.r);
    let (hx, hy) = k.theta_sq();
    [1, -1].into_iter().any(|sgn| {
        let tx = -&a1 / q(2);
        let ty = qi(&g) * q(sgn) / q(2);
        let nx = &tx * &tx + &ty * &ty * &r - q(4) * &qv;
        let ny = q(2) * &tx * &ty;
        let px = &nx * &hx + &ny * &hy * &r;
        let py = &nx * &hy + &ny * &hx;
        k.k0_sqrt(&px, &py).is_some()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn f8_field() -> QuarticCMField {
        parse_field(include_str!("../data/fields/k_f8.field")).unwrap()
    }

    pub(crate) fn f32_field() -> QuarticCMField {
        parse_field(include_str!("../data/fields/k_f32.field")).unwrap()
    }

    #[test]
    fn field_files_load() {
        let k = f8_field();
        assert_eq!(k.discriminant(), BigInt::from(11225));
        assert_eq!(k.index, BigInt::from(256));
        let k = f32_field();
        assert_eq!(k.discriminant(), BigInt::from(918153));
        let text = f32_field().to_string();
        // wrong real subfield, non-fundamental discriminant, huge a^2 − 4b
        for (from, to) in [
            ("k0_disc = 17", "k0_disc = 13"),
            ("k0_disc = 17", "k0_disc = 68"),
            ("3177 0 150 0 1", "3177 0 15666666666666666666666666666666660 0 1"),
        ] {
            assert!(text.contains(from));
            assert!(parse_field(&text.replace(from, to)).is_err(), "{to}");
        }
    }

    #[test]
    fn display_round_trip() {
        let k = f8_field();
        let again = parse_field(&k.to_string()).unwrap();
        assert_eq!(again.basis, k.basis);
        assert_eq!(again.conj, k.conj);
        assert_eq!(again.ideal_orders, k.ideal_orders);
    }

    #[test]
    fn conjugation_is_an_involution() {
        let k = f8_field();
        let x: Vec<BigInt> = [3, -1, 4, 2].iter().map(|&c| BigInt::from(c)).collect();
        assert_eq!(k.conjugate(&k.conjugate(&x)), x);
        let xx = k.mul(&x, &k.conjugate(&x));
        assert_eq!(k.conjugate(&xx), xx);
    }

    #[test]
    fn splitting_at_two() {
        let k = f8_field();
        assert!(matches!(splitting_type_dedekind(&k, 2), Err(Error::Undecidable(_))));
        let pat = splitting_type(&k, 2).unwrap();
        assert_eq!(pat.k, vec![(2, 1), (2, 1)]);
        assert_eq!(pat.k0, vec![(2, 1)]);
        let pat = splitting_type(&f32_field(), 2).unwrap();
        assert!(pat.splits_completely());
        assert_eq!(pat.k0, vec![(1, 1), (1, 1)]);
    }

    #[test]
    fn algebra_agrees_with_dedekind() {
        for k in [f8_field(), f32_field()] {
            for p in [3u64, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 353, 449, 47653] {
                let Ok(d) = splitting_type_dedekind(&k, p) else {
                    assert!(k.index.is_multiple_of(&BigInt::from(p)));
                    continue;
                };
                let alg = ResidueAlgebra::new(&k, p);
                let mut a: Vec<(u32, u32)> = alg.primes().iter().map(|q| (q.f, q.e)).collect();
                a.sort_unstable();
                assert_eq!(a, d.k, "p = {p}");
            }
        }
    }

    #[test]
    fn prank_table() {
        let pat = |k: Vec<(u32, u32)>, k0: Vec<(u32, u32)>| SplittingPattern::new(7, k, k0).unwrap();
        let c = prank_classification(&pat(vec![(1, 1); 4], vec![(1, 1); 2])).unwrap();
        assert_eq!((c.case, c.p_rank, c.cm_by_maximal), (1, PRank::Two, Some(true)));
        let c = prank_classification(&pat(vec![(4, 1)], vec![(2, 1)])).unwrap();
        assert_eq!(c.p_rank, PRank::Zero);
        let c = prank_classification(&pat(vec![(1, 1), (1, 1), (2, 1)], vec![(1, 1); 2])).unwrap();
        assert_eq!(c.p_rank, PRank::One);
        let c = prank_classification(&pat(vec![(2, 1), (2, 1)], vec![(2, 1)])).unwrap();
        assert_eq!((c.p_rank, c.cm_by_maximal), (PRank::ZeroOrTwo, None));
        let c = prank_classification(&pat(vec![(2, 1), (2, 1)], vec![(1, 1); 2])).unwrap();
        assert_eq!(c.p_rank, PRank::Zero);
        let c = prank_classification(&pat(vec![(1, 2), (1, 2)], vec![(1, 2)])).unwrap();
        assert_eq!(c.case, 4);
        let odd = SplittingPattern {
            p: 7,
            k: vec![(1, 2), (2, 1)],
            k0: vec![(1, 2)],
        };
        assert!(prank_classification(&odd).is_err());
        assert!(SplittingPattern::new(7, vec![(1, 1); 4], vec![(2, 1)]).is_err());
    }

    #[test]
    fn class_counts() {
        assert_eq!(class_count_s(&f8_field(), None).unwrap(), 6);
        assert_eq!(class_count_s(&f32_field(), None).unwrap(), 100);
        let mut k = f8_field();
        k.normal = true;
        assert_eq!(class_count_s(&k, Some(3)).unwrap(), 3);
        k.eps0_is_norm_from_k = true;
        assert!(class_count_s(&k, Some(3)).is_err());
        k.eps0_norm = 1;
        assert_eq!(class_count_s(&k, Some(3)).unwrap(), 3);
        k.eps0_is_norm_from_k = false;
        assert_eq!(class_count_s(&k, Some(3)).unwrap(), 6);
    }

    #[test]
    fn inert_prime_has_no_frobenius() {
        let k = f8_field();
        let p = (3..200u64)
            .filter(|&p| fp::is_prime(p))
            .find(|&p| splitting_type(&k, p).unwrap().k == [(4, 1)])
            .unwrap();
        assert!(frobenius_candidates(&k, p).unwrap().is_empty());
    }

    #[test]
    fn frobenius_over_f8() {
        let k = f8_field();
        let c = frobenius_candidates(&k, 8).unwrap();
        assert!(!c.is_empty());
        for x in &c {
            assert!(k.check_frobenius(&x.w, 8));
            assert!(generates_field(&k, &x.minpoly));
        }
        assert!(!generates_field(&f32_field(), &c[0].minpoly));
    }

    #[test]
    fn degrees_of_definition() {
        let k = f8_field();
        let pat = splitting_type(&k, 2).unwrap();
        let d = definition_degrees(&k, &pat, None).unwrap();
        assert_eq!((d.case, d.degrees.clone()), (2, vec![Degree::Known(3)]));
        let k = f32_field();
        let pat = splitting_type(&k, 2).unwrap();
        let d = definition_degrees(&k, &pat, None).unwrap();
        assert_eq!(d.case, 1);
        assert_eq!(d.degrees, vec![Degree::Known(5), Degree::Unknown]);
        let d = definition_degrees(&k, &pat, Some(&[5, 25])).unwrap();
        assert_eq!(d.degrees, vec![Degree::Known(5), Degree::Known(25)]);
    }

    #[test]
    fn large_prime_patterns() {
        assert!(splitting_type(&f32_field(), 47653).unwrap().splits_completely());
        assert_eq!(splitting_type(&f8_field(), 47653).unwrap().k, vec![(2, 1), (2, 1)]);
        let p3 = splitting_type(&f32_field(), 3).unwrap();
        assert_eq!(p3.k.iter().map(|&(f, e)| f * e).sum::<u32>(), 4);
    }
}
