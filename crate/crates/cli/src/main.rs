use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use cm2::agm1::hilbert_class_poly;
use cm2::cmfield::{
    class_count_s, definition_degrees, frobenius_candidates, group_orders, parse_field,
    prank_classification, splitting_type, QuarticCMField,
};
use cm2::curves::parse_curve;
use cm2::pipeline::{
    enumerate_candidates, format_invariants, format_poly_file, lift_invariants, parse_config,
    parse_invariants, read_artifacts, recognize_invariants, run_pipeline, verify_artifacts,
    write_artifacts, RunArtifacts, ENUMERATION_MAX_DEGREE,
};
use cm2::Error;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

// stdout may be closed early (piped into head); that is not an error
macro_rules! say {
    ($($t:tt)*) => {{
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

macro_rules! say_raw {
    ($($t:tt)*) => {{
        let _ = write!(std::io::stdout(), $($t)*);
    }};
}

#[derive(Parser)]
#[command(name = "cm2", version, about = "Genus 2 CM class polynomials via 2-adic canonical lifts")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Hilbert class polynomial of an imaginary quadratic discriminant
    Genus1 {
        #[arg(long = "D", allow_hyphen_values = true)]
        disc: i64,
        #[arg(long)]
        precision: u32,
    },
    /// Curves over F_{2^d} with CM by the maximal order of a field
    Enumerate {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        field: PathBuf,
        #[arg(long, default_value_t = ENUMERATION_MAX_DEGREE)]
        max_d: u32,
        /// Write one curve file per class into this directory
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Canonical lift of a curve and its absolute invariants
    Lift {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long)]
        precision: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Class polynomials from a lifted-invariants file
    Recognize {
        #[arg(long)]
        invariants: PathBuf,
        /// Degree guesses, tried in order
        #[arg(long, value_delimiter = ',', required = true)]
        degree: Vec<usize>,
        /// Reconstruct G2, G3 from the Frobenius orbit
        #[arg(long)]
        orbit: bool,
        #[arg(long)]
        cross_check: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full computation from a config file
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output` from the config
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check artifacts modulo a prime
    Verify {
        #[arg(long)]
        artifacts: PathBuf,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        field: PathBuf,
    },
    /// Field data: class count, splitting of a prime, fields of definition at 2
    Field {
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long)]
        h_prime: Option<u64>,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_field(path: &Path) -> Result<QuarticCMField> {
    parse_field(&read(path)?).with_context(|| format!("field file {}", path.display()))
}

fn print_artifacts(a: &RunArtifacts) {
    say!("# H1\n{}", format_poly_file(&a.h1));
    say!("# G2\n{}", format_poly_file(&a.g2));
    say_raw!("# G3\n{}", format_poly_file(&a.g3));
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Genus1 { disc, precision } => {
            let (h, _) = hilbert_class_poly(disc, precision)?;
            say!("{h}");
        }
        Cmd::Enumerate { d, field, max_d, out } => {
            let k = load_field(&field)?;
            let cands = enumerate_candidates(d, &k, max_d)?;
            if let Some(dir) = &out {
                fs::create_dir_all(dir)?;
            }
            for (i, c) in cands.iter().enumerate() {
                say!(
                    "s = {:x} {:x} {:x}  weil = {}  maximal = {:?}",
                    c.sigma.s1, c.sigma.s2, c.sigma.s3, c.weil, c.maximal
                );
                if let Some(dir) = &out {
                    fs::write(dir.join(format!("curve{i}.txt")), c.curve.to_string())?;
                }
            }
            eprintln!("{} classes", cands.len());
        }
        Cmd::Lift { curve, precision, out } => {
            let c = parse_curve(&read(&curve)?).context("curve file")?;
            let (inv, steps) = lift_invariants(&c, precision)?;
            eprintln!("{steps} Richelot steps, invariants to {} bits", inv.precision);
            let text = format_invariants(&inv);
            match out {
                Some(p) => fs::write(p, text)?,
                None => say_raw!("{text}"),
            }
        }
        Cmd::Recognize {
            invariants,
            degree,
            orbit,
            cross_check,
            out,
        } => {
            let inv = parse_invariants(&read(&invariants)?).context("invariants file")?;
            let mut log = Vec::new();
            let (h1, g2, g3) = recognize_invariants(&inv, &degree, orbit, cross_check, &mut log)?;
            let a = RunArtifacts {
                h1,
                g2,
                g3,
                log,
                timings: Vec::new(),
            };
            for l in &a.log {
                eprintln!("{l}");
            }
            match out {
                Some(dir) => write_artifacts(&a, &dir)?,
                None => print_artifacts(&a),
            }
        }
        Cmd::Run { config, out } => {
            let cfg = parse_config(&read(&config)?).context("config file")?;
            let base = config.parent().unwrap_or(Path::new("."));
            let field = cfg
                .field
                .as_ref()
                .map(|f| load_field(&base.join(f)))
                .transpose()?;
            let a = run_pipeline(&cfg, field.as_ref())?;
            for l in &a.log {
                eprintln!("{l}");
            }
            match out.or_else(|| cfg.output.as_ref().map(|o| base.join(o))) {
                Some(dir) => {
                    write_artifacts(&a, &dir)?;
                    eprintln!("artifacts written to {}", dir.display());
                }
                None => print_artifacts(&a),
            }
        }
        Cmd::Verify { artifacts, p, field } => {
            let k = load_field(&field)?;
            let a = read_artifacts(&artifacts)?;
            let report = verify_artifacts(&a, p, &k)?;
            say!("{report}");
            return Ok(report.passed());
        }
        Cmd::Field { field, p, h_prime } => {
            let k = load_field(&field)?;
            say!("discriminant {} index {}", k.discriminant(), k.index);
            say!("s = {}", class_count_s(&k, h_prime)?);
            let p = p.unwrap_or(2);
            let pat = splitting_type(&k, p)?;
            say!("{pat}");
            match prank_classification(&pat) {
                Ok(c) => say!("case {} p-rank {:?}", c.case, c.p_rank),
                Err(e) => say!("p-rank: {e}"),
            }
            let supplied = (p == 2 && !k.ideal_orders.is_empty()).then_some(k.ideal_orders.as_slice());
            match definition_degrees(&k, &pat, supplied) {
                Ok(d) => {
                    let v: Vec<String> = d.degrees.iter().map(|x| x.to_string()).collect();
                    say!("definition degrees {}", v.join(" "));
                    if supplied.is_some() {
                        let s = definition_degrees(&k, &pat, None)?;
                        let v: Vec<String> = s.degrees.iter().map(|x| x.to_string()).collect();
                        say!("principality search {}", v.join(" "));
                    }
                }
                Err(e) => say!("definition degrees: {e}"),
            }
            if p > 2 {
                let c = frobenius_candidates(&k, p)?;
                let orders: Vec<String> = group_orders(&c).iter().map(|x| x.to_string()).collect();
                say!("{} Frobenius elements, group orders {}", c.len(), orders.join(" "));
            }
        }
    }
    Ok(true)
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>().map(Error::root) {
        Some(Error::InsufficientPrecision(_)) => 2,
        Some(Error::DegreeSearchFailed | Error::DegreeRejected(_)) => 3,
        Some(Error::Verification(_)) => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(4),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
