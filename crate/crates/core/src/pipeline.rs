//! End-to-end runs: class count, canonical lift, invariants, recognition of H1, G2, G3,
//! plus candidate enumeration and the mod-p verification of finished artifacts.

use crate::agm2::{canonical_lift, igusa_abs_from_rosenhain, LiftedInvariants};
use crate::cmfield::{
    class_count_s, frobenius_candidates, generates_field, splitting_type, QuarticCMField,
    SplittingPattern,
};
use crate::curves::{model_over_base, parse_curve, CurveChar2, SigmaTriple};
use crate::error::{Error, Result};
use crate::fp;
use crate::gf2m::Gf2m;
use crate::jacobian::{has_maximal_endomorphisms, ProbeOutcome};
use crate::padic::{PadicCtx, Qq};
use crate::poly::{IntPoly, RecognizedPoly};
use crate::recognize::{
    gk_recognize_report, minpoly_recognize_report, newton_polygon, orbit_reconstruct,
    smoothness_report, NewtonPolygon, SmoothnessReport,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;
use std::time::Instant;

/// Smallest accepted target precision.
pub const MIN_PRECISION: u32 = 64;
/// Largest base-field degree scanned by `enumerate_candidates` by default.
pub const ENUMERATION_MAX_DEGREE: u32 = 6;
/// Primes below this bound count as small for the leading-coefficient check.
pub const SMOOTHNESS_BOUND: u64 = 10_000;
/// Largest precision accepted from files.
pub const MAX_FILE_PRECISION: u32 = 1 << 17;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CurveSource {
    Explicit(CurveChar2),
    /// First candidate of `enumerate_candidates` over F_{2^d}.
    Enumerate { d: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PipelineConfig {
    pub source: CurveSource,
    /// Path of the CM field file, as written in the config.
    pub field: Option<String>,
    pub precision: u32,
    /// Degree guesses; empty means s, s/2, then the other divisors of s.
    pub degrees: Vec<usize>,
    /// Overrides the class count computed from the field.
    pub class_count: Option<u64>,
    pub h_prime: Option<u64>,
    /// Recognize G2, G3 through the Frobenius orbit instead of the single lift.
    pub orbit: bool,
    /// Run both paths and require identical results.
    pub cross_check: bool,
    pub output: Option<String>,
}

/// Parse a flat `key = value` config. Keys: `curve` (`enumerate` or `explicit`), `d`,
/// `modulus`, `h`, `f` (as in curve files), `field`, `precision`, `degrees`,
/// `class_count`, `h_prime`, `orbit`, `cross_check`, `output`.
pub fn parse_config(text: &str) -> Result<PipelineConfig> {
    let mut kv: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(no + 1, "expected key = value"))?;
        let k = k.trim().to_string();
        if kv.insert(k.clone(), (no + 1, v.trim().to_string())).is_some() {
            return Err(Error::parse(no + 1, format!("duplicate key '{k}'")));
        }
    }
    let num = |key: &str| -> Result<Option<u64>> {
        kv.get(key)
            .map(|(no, v)| v.parse::<u64>().map_err(|_| Error::parse(*no, format!("bad {key}"))))
            .transpose()
    };
    let flag = |key: &str| -> Result<bool> {
        match kv.get(key).map(|(no, v)| (no, v.as_str())) {
            None | Some((_, "false" | "no" | "0")) => Ok(false),
            Some((_, "true" | "yes" | "1")) => Ok(true),
            Some((no, _)) => Err(Error::parse(*no, format!("bad {key}"))),
        }
    };
    for k in kv.keys() {
        const KNOWN: [&str; 13] = [
            "curve",
            "d",
            "modulus",
            "h",
            "f",
            "field",
            "precision",
            "degrees",
            "class_count",
            "h_prime",
            "orbit",
            "cross_check",
            "output",
        ];
        if !KNOWN.contains(&k.as_str()) {
            return Err(Error::parse(kv[k].0, format!("unknown key '{k}'")));
        }
    }
    let mode = kv.get("curve").map(|(_, v)| v.as_str()).unwrap_or("explicit");
    let source = match mode {
        "enumerate" => {
            let d = num("d")?.ok_or_else(|| Error::parse(0, "missing d"))?;
            if d == 0 || d > 32 {
                return Err(Error::parse(kv["d"].0, "d out of range"));
            }
            CurveSource::Enumerate { d: d as u32 }
        }
        "explicit" => {
            let mut curve = String::new();
            for key in ["d", "modulus", "h", "f"] {
                if let Some((_, v)) = kv.get(key) {
                    writeln!(curve, "{key} = {v}").unwrap();
                }
            }
            CurveSource::Explicit(parse_curve(&curve)?)
        }
        _ => return Err(Error::parse(kv["curve"].0, "curve must be 'explicit' or 'enumerate'")),
    };
    let precision = num("precision")?.ok_or_else(|| Error::parse(0, "missing precision"))?;
    if precision > MAX_FILE_PRECISION as u64 {
        return Err(Error::Invalid(format!("precision above {MAX_FILE_PRECISION}")));
    }
    let degrees = match kv.get("degrees") {
        Some((no, v)) => v
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| match t.parse::<usize>() {
                Ok(n) if (1..=4096).contains(&n) => Ok(n),
                _ => Err(Error::parse(*no, "bad degree")),
            })
            .collect::<Result<_>>()?,
        None => Vec::new(),
    };
    Ok(PipelineConfig {
        source,
        field: kv.get("field").map(|(_, v)| v.clone()),
        precision: precision as u32,
        degrees,
        class_count: num("class_count")?,
        h_prime: num("h_prime")?,
        orbit: flag("orbit")?,
        cross_check: flag("cross_check")?,
        output: kv.get("output").map(|(_, v)| v.clone()),
    })
}

/// Output of a run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunArtifacts {
    pub h1: RecognizedPoly,
    pub g2: RecognizedPoly,
    pub g3: RecognizedPoly,
    /// Deterministic stage log: iteration counts, precisions, lattice gaps.
    pub log: Vec<String>,
    /// Wall-clock per stage, kept apart so the log stays reproducible.
    pub timings: Vec<(String, u128)>,
}

/// Degree guesses in the order s, s/2, then the remaining divisors of s, descending.
pub fn degree_order(s: u64) -> Vec<usize> {
    let s = s as usize;
    let mut v = vec![s];
    if s.is_multiple_of(2) && s > 1 {
        v.push(s / 2);
    }
    let mut rest: Vec<usize> = (1..s).filter(|d| s.is_multiple_of(*d) && !v.contains(d)).collect();
    rest.reverse();
    v.extend(rest);
    v
}

fn squarefree_mod_primes(p: &IntPoly) -> bool {
    // a repeated factor over Q shows up modulo every prime; try a few
    fp::large_primes().take(4).any(|q| {
        let f = p.mod_p(q);
        if fp::deg(&f) != p.degree() {
            return false;
        }
        fp::deg(&fp::gcd(&f, &fp::derivative(&f, q), q)) == 0
    })
}

/// Lifted invariants of a curve at target precision n.
pub fn lift_invariants(curve: &CurveChar2, n: u32) -> Result<(LiftedInvariants, usize)> {
    if n < MIN_PRECISION {
        return Err(Error::InsufficientPrecision(format!(
            "target precision {n} is below {MIN_PRECISION}"
        )));
    }
    if !curve.is_ordinary() {
        return Err(Error::Invalid("curve is not ordinary".into()));
    }
    let lift = canonical_lift(curve, n).map_err(|e| e.at("lift"))?;
    let inv = igusa_abs_from_rosenhain(&lift.rosenhain).map_err(|e| e.at("invariants"))?;
    Ok((inv, lift.steps))
}

/// Run H1, G2, G3 recognition on lifted invariants with the given degree guesses.
pub fn recognize_invariants(
    inv: &LiftedInvariants,
    degrees: &[usize],
    orbit: bool,
    cross_check: bool,
    log: &mut Vec<String>,
) -> Result<(RecognizedPoly, RecognizedPoly, RecognizedPoly)> {
    let prec = inv.precision.max(0) as u32;
    let mut found = None;
    let mut passed_gap = false;
    for &n in degrees {
        match minpoly_recognize_report(&inv.j1, n, prec) {
            Ok((h1, rel)) => {
                passed_gap = true;
                let deg = h1.numerator.degree();
                log.push(format!(
                    "recognize h1 guess={n} degree={deg} gap_bits={:.1} lattice_precision={}",
                    rel.gap_bits, rel.precision
                ));
                if deg < 1 || h1.numerator.coeff(0).is_zero() {
                    log.push(format!("recognize h1 guess={n} rejected=degenerate"));
                    continue;
                }
                if !squarefree_mod_primes(&h1.numerator) {
                    return Err(Error::Degenerate(
                        "H1 has a repeated factor; recognize a linear combination of j1, j2, j3 \
                         instead of j1"
                            .into(),
                    )
                    .at("recognize"));
                }
                found = Some((h1, deg as usize));
                break;
            }
            Err(Error::DegreeRejected(_)) => {
                log.push(format!("recognize h1 guess={n} rejected=gap"));
            }
            Err(e) => return Err(e.at("recognize")),
        }
    }
    let (h1, n) = match found {
        Some(x) => x,
        None if passed_gap => return Err(Error::DegreeSearchFailed.at("recognize")),
        None => {
            return Err(Error::InsufficientPrecision(format!(
                "no degree guess in {degrees:?} cleared the gap test at {prec} bits"
            ))
            .at("recognize"))
        }
    };
    let direct = || -> Result<(RecognizedPoly, RecognizedPoly, f64, f64)> {
        let (g2, r2) = gk_recognize_report(&inv.j1, &inv.j2, &h1, n, prec)?;
        let (g3, r3) = gk_recognize_report(&inv.j1, &inv.j3, &h1, n, prec)?;
        Ok((g2, g3, r2.gap_bits, r3.gap_bits))
    };
    let via_orbit = || -> Result<(RecognizedPoly, RecognizedPoly, usize)> {
        let d = inv.j1.ctx().degree();
        let mut triples = vec![[inv.j1.clone(), inv.j2.clone(), inv.j3.clone()]];
        for i in 1..d {
            let p = &triples[i - 1];
            triples.push([p[0].frobenius(), p[1].frobenius(), p[2].frobenius()]);
        }
        let o = orbit_reconstruct(&triples, n, prec)?;
        if o.h1 != h1 {
            return Err(Error::Verification("orbit path gives a different H1".into()));
        }
        Ok((o.g2, o.g3, o.primes))
    };
    let (g2, g3) = if orbit || cross_check {
        let (g2, g3, primes) = via_orbit().map_err(|e| e.at("orbit"))?;
        log.push(format!("orbit primes={primes}"));
        if cross_check {
            let (a, b, _, _) = direct().map_err(|e| e.at("recognize"))?;
            if a != g2 || b != g3 {
                return Err(Error::Verification("orbit and direct paths disagree".into()).at("orbit"));
            }
            log.push("orbit cross_check=identical".into());
        }
        (g2, g3)
    } else {
        let (g2, g3, gap2, gap3) = direct().map_err(|e| e.at("recognize"))?;
        log.push(format!("recognize g2 gap_bits={gap2:.1} g3 gap_bits={gap3:.1}"));
        (g2, g3)
    };
    log.push(format!(
        "recognize g2 denominator={} g3 denominator={}",
        g2.denominator, g3.denominator
    ));
    Ok((h1, g2, g3))
}

/// Run the whole computation for a config whose field file has been loaded.
pub fn run_pipeline(cfg: &PipelineConfig, field: Option<&QuarticCMField>) -> Result<RunArtifacts> {
    let mut log = Vec::new();
    let mut timings = Vec::new();
    let mut clock = Instant::now();
    let mut lap = |name: &str, timings: &mut Vec<(String, u128)>| {
        timings.push((name.to_string(), clock.elapsed().as_millis()));
        clock = Instant::now();
    };
    if cfg.precision < MIN_PRECISION {
        return Err(Error::InsufficientPrecision(format!(
            "target precision {} is below {MIN_PRECISION}",
            cfg.precision
        )));
    }
    let s = match (cfg.class_count, field) {
        (Some(s), _) => s,
        (None, Some(k)) => class_count_s(k, cfg.h_prime).map_err(|e| e.at("class count"))?,
        (None, None) => {
            return Err(Error::Invalid("need a field file or class_count".into()).at("class count"))
        }
    };
    if s == 0 {
        return Err(Error::Invalid("class count must be positive".into()));
    }
    log.push(format!("class_count s={s}"));
    let curve = match &cfg.source {
        CurveSource::Explicit(c) => c.clone(),
        CurveSource::Enumerate { d } => {
            let k = field.ok_or_else(|| Error::Invalid("enumeration needs a field file".into()))?;
            let cands = enumerate_candidates(*d, k, ENUMERATION_MAX_DEGREE).map_err(|e| e.at("enumerate"))?;
            log.push(format!("enumerate d={d} classes={}", cands.len()));
            cands
                .into_iter()
                .next()
                .ok_or_else(|| Error::Invalid(format!("no curve over F_2^{d} has CM by this field")))?
                .curve
        }
    };
    log.push(format!("curve {}", curve.to_string().trim().replace('\n', "; ")));
    if let (Some(k), CurveSource::Explicit(_)) = (field, &cfg.source) {
        if curve.field.degree() <= crate::curves::ENUM_GUARD_BITS / 2 {
            let w = curve.frobenius_charpoly().map_err(|e| e.at("curve"))?;
            if !generates_field(k, &w) {
                return Err(Error::Invalid(format!("Frobenius polynomial {w} does not generate the field")).at("curve"));
            }
            log.push(format!("curve frobenius={w}"));
        }
    }
    lap("setup", &mut timings);
    let (inv, steps) = lift_invariants(&curve, cfg.precision)?;
    log.push(format!(
        "lift precision={} richelot_steps={steps} invariant_precision={}",
        cfg.precision, inv.precision
    ));
    lap("lift", &mut timings);
    let degrees = if cfg.degrees.is_empty() {
        degree_order(s)
    } else {
        cfg.degrees.clone()
    };
    let (h1, g2, g3) = recognize_invariants(&inv, &degrees, cfg.orbit, cfg.cross_check, &mut log)?;
    lap("recognize", &mut timings);
    Ok(RunArtifacts {
        h1,
        g2,
        g3,
        log,
        timings,
    })
}

// ---------------------------------------------------------------------------
// candidates

#[derive(Clone, Debug)]
pub struct Candidate {
    pub sigma: SigmaTriple,
    pub curve: CurveChar2,
    pub weil: IntPoly,
    /// End(J) = O_K: decided, or inconclusive within the enumeration guards.
    pub maximal: ProbeOutcome,
}

/// All s-triples over F_{2^d} (one per isomorphism class over the algebraic closure)
/// whose curves have a Frobenius generating K and endomorphism ring O_K (curves where
/// the maximality probe is inconclusive are kept and marked). Frobenius-conjugate
/// triples share the Weil polynomial and the endomorphism ring, so the work runs once
/// per orbit.
pub fn enumerate_candidates(d: u32, k: &QuarticCMField, max_d: u32) -> Result<Vec<Candidate>> {
    if d == 0 || d > max_d {
        return Err(Error::Guard(format!("d = {d} outside the enumeration budget 1..={max_d}")));
    }
    let base = Gf2m::new(d)?;
    let qn = base.order();
    let frob = |s: &SigmaTriple| SigmaTriple {
        s1: base.sqr(s.s1),
        s2: base.sqr(s.s2),
        s3: base.sqr(s.s3),
    };
    let reps: Vec<SigmaTriple> = (0..qn * qn * (qn - 1))
        .map(|i| SigmaTriple {
            s1: i % qn,
            s2: (i / qn) % qn,
            s3: i / (qn * qn) + 1,
        })
        .filter(|s| {
            let mut t = frob(s);
            while t != *s {
                if t < *s {
                    return false;
                }
                t = frob(&t);
            }
            true
        })
        .collect();
    let ws = frobenius_candidates(k, qn)?;
    let hits: Vec<(SigmaTriple, IntPoly, ProbeOutcome)> = reps
        .par_iter()
        .map(|s| -> Result<Option<(SigmaTriple, IntPoly, ProbeOutcome)>> {
            let c = model_over_base(&base, s)?;
            let w = c.frobenius_charpoly()?;
            if !generates_field(k, &w) {
                return Ok(None);
            }
            let Some(fw) = ws.iter().find(|x| x.minpoly == w) else {
                return Ok(None);
            };
            let m = has_maximal_endomorphisms(&c, k, &fw.w)?;
            Ok((m != ProbeOutcome::False).then_some((*s, w, m)))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let mut out = Vec::new();
    for (s, w, m) in hits {
        let mut t = s;
        loop {
            out.push(Candidate {
                sigma: t,
                curve: model_over_base(&base, &t)?,
                weil: w.clone(),
                maximal: m,
            });
            t = frob(&t);
            if t == s {
                break;
            }
        }
    }
    out.sort_by_key(|c| c.sigma);
    Ok(out)
}

// ---------------------------------------------------------------------------
// verification

/// One root x of H1 mod p with y_k = G_k(x) / (d_k H1'(x)).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModPTriple {
    pub j1: u64,
    pub j2: Option<u64>,
    pub j3: Option<u64>,
    /// H1'(x) = 0: the triple is not determined by G2, G3.
    pub singular: bool,
    /// The triple gives a point of the moduli space: j1 ≠ 0 and 4 J8 = J2 J6 − J4^2
    /// holds for (J2 : J4 : J6 : J8 : J10) = (1 : j2/j1 : j3/j1 : J8 : 1/j1).
    pub consistent: bool,
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub p: u64,
    pub pattern: SplittingPattern,
    /// Frobenius elements of norm p up to conjugation and sign: one per principal product
    /// 𝔭1𝔭2, 𝔭1𝔭̄2 of primes above p.
    pub principal_types: usize,
    /// p splits completely and both products of primes above it are principal.
    pub p_admissible: bool,
    pub leading: SmoothnessReport,
    pub newton: NewtonPolygon,
    pub unit_roots: u64,
    pub factor_degrees: Vec<(u32, u32)>,
    pub splits_completely: bool,
    pub triples: Vec<ModPTriple>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.leading.smooth
            && self.splits_completely
            && self.triples.iter().all(|t| !t.singular && t.consistent)
    }
}

/// Number of Weil polynomials of norm-p Frobenius elements, identifying quadratic twists.
pub fn principal_types(k: &QuarticCMField, p: u64) -> Result<usize> {
    let mut keys: Vec<(BigInt, BigInt)> = frobenius_candidates(k, p)?
        .iter()
        .map(|c| (c.minpoly.coeff(3).magnitude().clone().into(), c.minpoly.coeff(2)))
        .collect();
    keys.sort();
    keys.dedup();
    Ok(keys.len())
}

fn rat_poly_mod(g: &RecognizedPoly, x: u64, p: u64) -> Result<u64> {
    let d = fp::reduce_big(&g.denominator, p);
    if d == 0 {
        return Err(Error::Invalid(format!("denominator {} vanishes mod {p}", g.denominator)));
    }
    Ok(fp::mulmod(fp::eval(&g.numerator.mod_p(p), x, p), fp::invmod(d, p).unwrap(), p))
}

fn triple_consistent(j1: u64, j2: u64, j3: u64, p: u64) -> bool {
    if j1 == 0 {
        return false;
    }
    let i1 = fp::invmod(j1, p).unwrap();
    let (jj2, jj4, jj6) = (1, fp::mulmod(j2, i1, p), fp::mulmod(j3, i1, p));
    // J8 from the defining relation, then the relation itself re-checked
    let rhs = fp::submod(fp::mulmod(jj2, jj6, p), fp::mulmod(jj4, jj4, p), p);
    let j8 = fp::mulmod(rhs, fp::invmod(4 % p, p).unwrap(), p);
    fp::mulmod(4, j8, p) == rhs && i1 != 0
}

/// Checks on finished class polynomials: small primes in the leading coefficient, the
/// Newton polygon of H1 at 2, the factorization of H1 mod p, and one invariant triple per
/// root of H1 mod p.
pub fn verify_artifacts(a: &RunArtifacts, p: u64, k: &QuarticCMField) -> Result<VerifyReport> {
    if p < 5 || !fp::is_prime(p) {
        return Err(Error::Invalid(format!("{p} must be a prime above 3")));
    }
    let h1 = &a.h1.numerator;
    if h1.degree() < 1 {
        return Err(Error::Invalid("H1 is constant".into()));
    }
    let pattern = splitting_type(k, p)?;
    let principal_types = principal_types(k, p)?;
    let p_admissible = pattern.splits_completely() && principal_types == 2;
    let leading = smoothness_report(&h1.leading(), SMOOTHNESS_BOUND)?;
    let newton = newton_polygon(h1)?;
    let unit_roots = newton.count_with_valuation(&BigRational::zero());
    let hp = h1.mod_p(p);
    if fp::deg(&hp) != h1.degree() {
        return Err(Error::Invalid(format!("leading coefficient of H1 vanishes mod {p}")));
    }
    let factor_degrees = fp::factor_degrees(&hp, p);
    let splits_completely = factor_degrees.iter().all(|&(d, m)| d == 1 && m == 1);
    let dh = fp::derivative(&hp, p);
    let triples = fp::roots(&hp, p)
        .into_iter()
        .map(|x| -> Result<ModPTriple> {
            let hx = fp::eval(&dh, x, p);
            if hx == 0 {
                return Ok(ModPTriple {
                    j1: x,
                    j2: None,
                    j3: None,
                    singular: true,
                    consistent: false,
                });
            }
            let ih = fp::invmod(hx, p).unwrap();
            let j2 = fp::mulmod(rat_poly_mod(&a.g2, x, p)?, ih, p);
            let j3 = fp::mulmod(rat_poly_mod(&a.g3, x, p)?, ih, p);
            Ok(ModPTriple {
                j1: x,
                j2: Some(j2),
                j3: Some(j3),
                singular: false,
                consistent: triple_consistent(x, j2, j3, p),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VerifyReport {
        p,
        pattern,
        principal_types,
        p_admissible,
        leading,
        newton,
        unit_roots,
        factor_degrees,
        splits_completely,
        triples,
    })
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "splitting {}", self.pattern)?;
        writeln!(f, "principal types: {}", self.principal_types)?;
        writeln!(f, "p admissible: {}", self.p_admissible)?;
        writeln!(
            f,
            "leading coefficient: {} ({})",
            self.leading,
            if self.leading.smooth { "smooth" } else { "NOT smooth" }
        )?;
        let segs: Vec<String> = self
            .newton
            .root_valuations()
            .iter()
            .map(|(v, l)| format!("{v}x{l}"))
            .collect();
        writeln!(f, "newton polygon: [{}] zero roots {}", segs.join(" "), self.newton.zero_roots)?;
        writeln!(f, "roots of valuation 0: {}", self.unit_roots)?;
        let fd: Vec<String> = self
            .factor_degrees
            .iter()
            .map(|(d, m)| if *m == 1 { d.to_string() } else { format!("{d}^{m}") })
            .collect();
        writeln!(f, "factor degrees mod p: {}", fd.join(" "))?;
        writeln!(f, "splits completely: {}", self.splits_completely)?;
        for t in &self.triples {
            match (t.j2, t.j3) {
                (Some(a), Some(b)) => writeln!(
                    f,
                    "triple {} {} {}{}",
                    t.j1,
                    a,
                    b,
                    if t.consistent { "" } else { " INCONSISTENT" }
                )?,
                _ => writeln!(f, "triple {} - - H1'(x) = 0", t.j1)?,
            }
        }
        write!(f, "result: {}", if self.passed() { "ok" } else { "MISMATCH" })
    }
}

// ---------------------------------------------------------------------------
// files

/// Polynomial file: `degree n`, optional `denominator d`, then the n + 1 coefficients
/// from the constant term up, separated by whitespace. `#` starts a comment.
pub fn format_poly_file(p: &RecognizedPoly) -> String {
    let mut s = format!("degree {}\n", p.numerator.degree().max(0));
    if !p.denominator.is_one() {
        writeln!(s, "denominator {}", p.denominator).unwrap();
    }
    if p.numerator.coeffs.is_empty() {
        s.push_str("0\n");
    }
    for c in &p.numerator.coeffs {
        writeln!(s, "{c}").unwrap();
    }
    s
}

pub fn parse_poly_file(text: &str) -> Result<RecognizedPoly> {
    let mut degree: Option<usize> = None;
    let mut den = BigInt::one();
    let mut coeffs: Vec<BigInt> = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let err = |m: &str| Error::parse(no + 1, m);
        if let Some(v) = line.strip_prefix("degree") {
            if degree.is_some() || !coeffs.is_empty() {
                return Err(err("misplaced degree header"));
            }
            let n: usize = v.trim().parse().map_err(|_| err("bad degree"))?;
            if n > 1 << 16 {
                return Err(err("degree too large"));
            }
            degree = Some(n);
        } else if let Some(v) = line.strip_prefix("denominator") {
            if degree.is_none() || !coeffs.is_empty() {
                return Err(err("denominator must follow the degree header"));
            }
            den = v.trim().parse().map_err(|_| err("bad denominator"))?;
            if den <= BigInt::zero() {
                return Err(err("denominator must be positive"));
            }
        } else {
            if degree.is_none() {
                return Err(err("missing degree header"));
            }
            for t in line.split_whitespace() {
                coeffs.push(t.parse().map_err(|_| err("bad coefficient"))?);
            }
        }
    }
    let n = degree.ok_or_else(|| Error::parse(0, "missing degree header"))?;
    if coeffs.len() != n + 1 {
        return Err(Error::parse(0, format!("expected {} coefficients, got {}", n + 1, coeffs.len())));
    }
    if coeffs[n].is_zero() && n > 0 {
        return Err(Error::parse(0, "leading coefficient is zero"));
    }
    Ok(RecognizedPoly::new(IntPoly::new(coeffs), den))
}

/// Lifted-invariants file: `d`, `modulus` (hex), `precision`, then `j1`, `j2`, `j3` as
/// 2-adic literals (`v=<val> n=<prec> <hex>,<hex>,...`).
pub fn format_invariants(inv: &LiftedInvariants) -> String {
    let ctx = inv.j1.ctx();
    let gf = ctx.gf();
    format!(
        "d = {}\nmodulus = {:x}\nprecision = {}\nj1 = {}\nj2 = {}\nj3 = {}\n",
        gf.degree(),
        gf.modulus(),
        ctx.precision(),
        inv.j1,
        inv.j2,
        inv.j3
    )
}

pub fn parse_invariants(text: &str) -> Result<LiftedInvariants> {
    let mut kv: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(no + 1, "expected key = value"))?;
        let k = k.trim();
        if !["d", "modulus", "precision", "j1", "j2", "j3"].contains(&k) {
            return Err(Error::parse(no + 1, format!("unknown key '{k}'")));
        }
        kv.insert(k.to_string(), (no + 1, v.trim().to_string()));
    }
    let get = |k: &str| kv.get(k).ok_or_else(|| Error::parse(0, format!("missing {k}")));
    let (no, d) = get("d")?;
    let d: u32 = d.parse().map_err(|_| Error::parse(*no, "bad d"))?;
    if d == 0 || d > 32 {
        return Err(Error::parse(*no, "d out of range"));
    }
    let gf = match kv.get("modulus") {
        Some((no, m)) => {
            let m = u64::from_str_radix(m, 16).map_err(|_| Error::parse(*no, "bad modulus"))?;
            let g = Gf2m::with_modulus(m)?;
            if g.degree() != d {
                return Err(Error::parse(*no, "modulus degree differs from d"));
            }
            g
        }
        None => Gf2m::new(d)?,
    };
    let (no, n) = get("precision")?;
    let n: u32 = n.parse().map_err(|_| Error::parse(*no, "bad precision"))?;
    if n == 0 || n > MAX_FILE_PRECISION {
        return Err(Error::parse(*no, "precision out of range"));
    }
    let ctx = PadicCtx::new(&gf, n)?;
    let j = |k: &str| -> Result<Qq> {
        let (no, v) = get(k)?;
        Qq::parse(&ctx, v).map_err(|e| Error::parse(*no, e.to_string()))
    };
    let (j1, j2, j3) = (j("j1")?, j("j2")?, j("j3")?);
    let precision = [&j1, &j2, &j3].iter().map(|x| x.abs_precision()).min().unwrap();
    Ok(LiftedInvariants {
        j1,
        j2,
        j3,
        precision,
    })
}

/// Write h1.txt, g2.txt, g3.txt and log.txt (plus timings.txt) into `dir`.
pub fn write_artifacts(a: &RunArtifacts, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("h1.txt"), format_poly_file(&a.h1))?;
    fs::write(dir.join("g2.txt"), format_poly_file(&a.g2))?;
    fs::write(dir.join("g3.txt"), format_poly_file(&a.g3))?;
    fs::write(dir.join("log.txt"), a.log.join("\n") + "\n")?;
    let t: String = a.timings.iter().map(|(s, ms)| format!("{s} {ms} ms\n")).collect();
    fs::write(dir.join("timings.txt"), t)?;
    Ok(())
}

pub fn read_artifacts(dir: &Path) -> Result<RunArtifacts> {
    let poly = |name: &str| -> Result<RecognizedPoly> {
        parse_poly_file(&fs::read_to_string(dir.join(name))?).map_err(|e| e.at("artifacts"))
    };
    let log = fs::read_to_string(dir.join("log.txt"))
        .map(|s| s.lines().map(String::from).collect())
        .unwrap_or_default();
    Ok(RunArtifacts {
        h1: poly("h1.txt")?,
        g2: poly("g2.txt")?,
        g3: poly("g3.txt")?,
        log,
        timings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmfield::parse_field;

    fn f8_field() -> QuarticCMField {
        parse_field(include_str!("../data/fields/k_f8.field")).unwrap()
    }

    #[test]
    fn degree_order_starts_with_s_and_half() {
        assert_eq!(degree_order(6), vec![6, 3, 2, 1]);
        assert_eq!(degree_order(100)[..3], [100, 50, 25]);
        assert_eq!(degree_order(1), vec![1]);
    }

    #[test]
    fn config_round_trip() {
        let cfg = parse_config(
            "curve = explicit\nd = 3\nh = 0 1 1\nf = 0 3 7 5 0 1\nfield = k.field\nprecision = 1200\n\
             degrees = 6, 3\norbit = true\n",
        )
        .unwrap();
        assert_eq!(cfg.precision, 1200);
        assert_eq!(cfg.degrees, vec![6, 3]);
        assert!(cfg.orbit && !cfg.cross_check);
        assert!(matches!(cfg.source, CurveSource::Explicit(_)));
        assert!(parse_config("precision = 100\nbogus = 1\n").is_err());
        assert!(parse_config("curve = enumerate\nprecision = 100\n").is_err());
    }

    #[test]
    fn poly_files() {
        let p = RecognizedPoly::new(IntPoly::from_i64(&[-121287375, 191025, 1]), BigInt::from(8));
        let back = parse_poly_file(&format_poly_file(&p)).unwrap();
        assert_eq!(back, p);
        assert!(parse_poly_file("degree 2\n1 2\n").is_err());
        assert!(parse_poly_file("1 2 3\n").is_err());
        assert!(parse_poly_file("degree 1\ndenominator 0\n1 1\n").is_err());
        let zero = parse_poly_file("degree 0\n0\n").unwrap();
        assert_eq!(parse_poly_file(&format_poly_file(&zero)).unwrap(), zero);
    }

    #[test]
    fn small_enumerations() {
        let k = f8_field();
        assert!(enumerate_candidates(1, &k, 6).unwrap().is_empty());
        let c = enumerate_candidates(3, &k, 6).unwrap();
        assert_eq!(c.len(), 3);
        assert!(c.iter().all(|x| x.maximal == ProbeOutcome::True));
        let ex = CurveChar2::new(Gf2m::new(3).unwrap(), vec![0, 1, 1], vec![0, 3, 7, 5, 0, 1]).unwrap();
        assert!(c.iter().any(|x| x.sigma == ex.sigma_triple().unwrap()));
        assert!(enumerate_candidates(7, &k, 6).is_err());
    }

    #[test]
    fn under_precision_is_reported() {
        let mut cfg = parse_config("d = 3\nh = 0 1 1\nf = 0 3 7 5 0 1\nprecision = 32\nclass_count = 6\n").unwrap();
        let e = run_pipeline(&cfg, None).unwrap_err();
        assert!(matches!(e.root(), Error::InsufficientPrecision(_)));
        cfg.precision = 64;
        let e = run_pipeline(&cfg, None).unwrap_err();
        assert!(matches!(e.root(), Error::InsufficientPrecision(_)), "{e}");
    }
}
