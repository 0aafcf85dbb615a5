//! Command-line front end: grading verification, canonical forms with
//! bimodule tags, graded-isomorphism decision, two-block realization, the
//! good-grading census oracle, multiplicative-basis search, and the orbit
//! condition check.
//!
//! Exit codes: 0 success (or "isomorphic"/"found"), 1 verified negative,
//! 2 search budget exhausted, 3 input error.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use incidence::algebra::{verify_grading, verify_radical_graded, Grading, IncidenceAlgebra};
use incidence::bimodule::{decompose_all, realize_two_block, verify_distinct_characters};
use incidence::canonical::canonicalize;
use incidence::format;
use incidence::isoclass::{
    enumerate_good_gradings, iso_check, search_multiplicative_basis, verify_orbit_condition,
    BasisOutcome, IsoError, OrbitOutcome,
};
use incidence::scalars::{
    set_conductor_max, set_default_prime, validate_prime_backend, CyclotomicScalar,
    PrimeFieldScalar, RootScalar, Scalar,
};

const EXIT_NEGATIVE: u8 = 1;
const EXIT_EXHAUSTED: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(name = "incidence", about = "group gradings on incidence algebras")]
struct Cli {
    /// Bound on cyclotomic conductors.
    #[arg(long, global = true, default_value_t = 10_000)]
    conductor_max: u64,
    /// Node budget for searches; the INCIDENCE_SEARCH_BUDGET environment
    /// variable overrides this flag.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    budget: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify the grading axioms and radical gradedness.
    Verify {
        poset: PathBuf,
        grading: PathBuf,
        /// Check over the prime field F_p instead of cyclotomics.
        #[arg(long)]
        field: Option<u64>,
    },
    /// Compute the canonical block-triangular form with bimodule tags.
    Canonicalize {
        poset: PathBuf,
        grading: PathBuf,
        /// Also print the associated poset as a DOT digraph.
        #[arg(long)]
        dot: bool,
    },
    /// Print only the bimodule decomposition tags.
    Decompose { poset: PathBuf, grading: PathBuf },
    /// Decide graded isomorphism of two gradings.
    Iso {
        poset_a: PathBuf,
        grading_a: PathBuf,
        poset_b: PathBuf,
        grading_b: PathBuf,
    },
    /// Realize a two-block specification as a poset and grading.
    Realize {
        spec: PathBuf,
        #[arg(long)]
        out_poset: PathBuf,
        #[arg(long)]
        out_grading: PathBuf,
    },
    /// Brute-force oracles.
    Oracle {
        #[command(subcommand)]
        oracle: OracleCommand,
    },
    /// Search for a multiplicative homogeneous basis.
    SearchMultBasis { poset: PathBuf, grading: PathBuf },
    /// Verify the automorphism orbit condition.
    OrbitCheck { poset: PathBuf, grading: PathBuf },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Enumerate all good gradings and bucket them into isomorphism classes.
    EnumerateGood {
        poset: PathBuf,
        #[arg(long)]
        group: String,
    },
}

fn read(path: &Path) -> Result<String, u8> {
    fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        EXIT_INPUT
    })
}

fn load_pair(
    poset_path: &Path,
    grading_path: &Path,
) -> Result<(IncidenceAlgebra, Grading<CyclotomicScalar>), u8> {
    let ptext = read(poset_path)?;
    let (poset, perm) = format::parse_poset(&ptext).map_err(|e| {
        eprintln!("error: {}: {e}", poset_path.display());
        EXIT_INPUT
    })?;
    let alg = IncidenceAlgebra::new(poset);
    let gtext = read(grading_path)?;
    let grading = format::parse_grading(&gtext, &alg, &perm).map_err(|e| {
        eprintln!("error: {}: {e}", grading_path.display());
        EXIT_INPUT
    })?;
    Ok((alg, grading))
}

fn grading_conductor(grading: &Grading<CyclotomicScalar>) -> u64 {
    use num_integer_shim::lcm;
    let mut c = 1u64;
    for basis in grading.components.values() {
        for e in basis {
            for v in e.entries().values() {
                c = lcm(c, v.conductor());
            }
        }
    }
    c
}

mod num_integer_shim {
    pub fn lcm(a: u64, b: u64) -> u64 {
        fn gcd(a: u64, b: u64) -> u64 {
            if b == 0 {
                a
            } else {
                gcd(b, a % b)
            }
        }
        a / gcd(a, b) * b
    }
}

/// Maps a cyclotomic grading into `F_p` by sending each root of unity to the
/// corresponding power of a fixed primitive root; valid only under the
/// prime-backend load gate.
fn to_prime_field(
    alg: &IncidenceAlgebra,
    grading: &Grading<CyclotomicScalar>,
    p: u64,
) -> Result<Grading<PrimeFieldScalar>, String> {
    let conductor = grading_conductor(grading);
    validate_prime_backend(p, conductor, alg.dim())?;
    set_default_prime(p);
    let mut out = Grading::new(grading.group.clone());
    for (g, basis) in &grading.components {
        for e in basis {
            let mut entries = Vec::new();
            for (&(x, y), v) in e.entries() {
                let zeta = PrimeFieldScalar::root_of_unity(v.conductor(), 1)
                    .map_err(|e| e.to_string())?;
                let mut acc = PrimeFieldScalar::new(p, 0);
                for c in v.as_poly().coeffs().iter().rev() {
                    let c = PrimeFieldScalar::from_rational(c).map_err(|e| e.to_string())?;
                    acc = acc.mul(&zeta).add(&c);
                }
                entries.push(((x, y), acc));
            }
            let elem = alg.element(entries).map_err(|e| e.to_string())?;
            out.push(g.clone(), elem);
        }
    }
    Ok(out)
}

fn cmd_verify(poset: &Path, grading: &Path, field: Option<u64>) -> u8 {
    let (alg, g) = match load_pair(poset, grading) {
        Ok(v) => v,
        Err(c) => return c,
    };
    match field {
        None => run_verify(&alg, &g),
        Some(p) => match to_prime_field(&alg, &g, p) {
            Ok(gp) => run_verify(&alg, &gp),
            Err(e) => {
                eprintln!("error: prime backend rejected: {e}");
                EXIT_INPUT
            }
        },
    }
}

fn run_verify<S: Scalar>(alg: &IncidenceAlgebra, g: &Grading<S>) -> u8 {
    let report = verify_grading(alg, g);
    println!(
        "axiom.direct_sum={}",
        if report.pass() { "pass" } else { "fail" }
    );
    if let Some(first) = report.first() {
        println!("witness={first}");
        return EXIT_NEGATIVE;
    }
    let (radical_ok, basis) = verify_radical_graded(alg, g);
    println!(
        "axiom.radical_graded={}",
        if radical_ok { "pass" } else { "fail" }
    );
    if radical_ok {
        println!("radical.homogeneous_basis.dim={}", basis.len());
        0
    } else {
        EXIT_NEGATIVE
    }
}

fn cmd_canonicalize(poset: &Path, grading: &Path, dot: bool) -> u8 {
    let (alg, g) = match load_pair(poset, grading) {
        Ok(v) => v,
        Err(c) => return c,
    };
    let cf = match canonicalize(&alg, &g) {
        Ok(cf) => cf,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_NEGATIVE;
        }
    };
    let decomps = match decompose_all(&cf) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_NEGATIVE;
        }
    };
    let distinct = verify_distinct_characters(&decomps);
    print!("{}", format::canonical_report(&cf, &decomps));
    for v in &distinct.violations {
        println!("thm.distinct_characters.violation={v}");
    }
    if dot {
        print!("{}", cf.assoc.dot_export(None));
    }
    if distinct.violations.is_empty() {
        0
    } else {
        EXIT_NEGATIVE
    }
}

fn cmd_decompose(poset: &Path, grading: &Path) -> u8 {
    let (alg, g) = match load_pair(poset, grading) {
        Ok(v) => v,
        Err(c) => return c,
    };
    let cf = match canonicalize(&alg, &g) {
        Ok(cf) => cf,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_NEGATIVE;
        }
    };
    let decomps = match decompose_all(&cf) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_NEGATIVE;
        }
    };
    for (&(i, j), d) in &decomps {
        for (k, p) in d.pairs.iter().enumerate() {
            let exps: Vec<String> = p.chi.exps.iter().map(u64::to_string).collect();
            println!(
                "bimodule.{}.{}.tag.{}=(chi=[{}]; h={})",
                i + 1,
                j + 1,
                k + 1,
                exps.join(","),
                p.degree
            );
        }
    }
    0
}

fn cmd_iso(pa: &Path, ga: &Path, pb: &Path, gb: &Path, budget: u64) -> u8 {
    let (alg_a, a) = match load_pair(pa, ga) {
        Ok(v) => v,
        Err(c) => return c,
    };
    let (alg_b, b) = match load_pair(pb, gb) {
        Ok(v) => v,
        Err(c) => return c,
    };
    if a.group != b.group {
        eprintln!("error: the gradings use different groups");
        return EXIT_INPUT;
    }
    let cf_a = match canonicalize(&alg_a, &a) {
        Ok(cf) => cf,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_NEGATIVE;
        }
    };
    let cf_b = match canonicalize(&alg_b, &b) {
        Ok(cf) => cf,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_NEGATIVE;
        }
    };
    match iso_check(&cf_a, &cf_b, budget) {
        Ok(Some(w)) => {
            let alpha: Vec<String> = w.alpha.iter().map(|x| (x + 1).to_string()).collect();
            println!("isomorphic=yes");
            println!("witness.alpha={}", alpha.join(","));
            for (i, chi) in w.chars.iter().enumerate() {
                let exps: Vec<String> = chi.exps.iter().map(u64::to_string).collect();
                println!("witness.chi.{}=[{}]", i + 1, exps.join(","));
            }
            0
        }
        Ok(None) => {
            println!("isomorphic=no");
            println!("certificate=exhausted finite witness space (posets, subgroups, characters)");
            EXIT_NEGATIVE
        }
        Err(IsoError::SearchBudgetExceeded(b)) => {
            eprintln!("error: search budget {b} exhausted");
            EXIT_EXHAUSTED
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_NEGATIVE
        }
    }
}

fn cmd_realize(spec: &Path, out_poset: &Path, out_grading: &Path) -> u8 {
    let text = match read(spec) {
        Ok(t) => t,
        Err(c) => return c,
    };
    let spec = match format::parse_realize_spec(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let (poset, grading) =
        match realize_two_block::<CyclotomicScalar>(&spec.group, &spec.h1, &spec.h2, &spec.tag) {
            Ok(v) => v,
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_INPUT;
            }
        };
    let alg = IncidenceAlgebra::new(poset.clone());
    // Round trip check before writing anything.
    let cf = match canonicalize(&alg, &grading) {
        Ok(cf) => cf,
        Err(e) => {
            eprintln!("error: realized grading failed to canonicalize: {e}");
            return EXIT_NEGATIVE;
        }
    };
    let _ = cf;
    if fs::write(out_poset, format::write_poset(&poset)).is_err()
        || fs::write(out_grading, format::write_grading(&alg, &grading)).is_err()
    {
        eprintln!("error: cannot write output files");
        return EXIT_INPUT;
    }
    println!("poset={}", out_poset.display());
    println!("grading={}", out_grading.display());
    0
}

fn cmd_enumerate_good(poset: &Path, group: &str, budget: u64) -> u8 {
    let ptext = match read(poset) {
        Ok(t) => t,
        Err(c) => return c,
    };
    let (poset, _) = match format::parse_poset(&ptext) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let group = match format::parse_abelian_group(group) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let alg = IncidenceAlgebra::new(poset);
    let gradings = match enumerate_good_gradings::<CyclotomicScalar>(&alg, &group, budget) {
        Ok(g) => g,
        Err(IsoError::SearchBudgetExceeded(b)) => {
            eprintln!("error: search budget {b} exhausted");
            return EXIT_EXHAUSTED;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_NEGATIVE;
        }
    };
    println!("good_gradings={}", gradings.len());
    // Bucket into isomorphism classes via the canonical pipeline.
    let mut class_sizes: BTreeMap<usize, usize> = BTreeMap::new();
    let mut reps: Vec<incidence::canonical::CanonicalForm<CyclotomicScalar>> = Vec::new();
    for g in &gradings {
        let cf = match canonicalize(&alg, g) {
            Ok(cf) => cf,
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_NEGATIVE;
            }
        };
        let mut found = None;
        for (ci, r) in reps.iter().enumerate() {
            match iso_check(r, &cf, budget) {
                Ok(Some(_)) => {
                    found = Some(ci);
                    break;
                }
                Ok(None) => {}
                Err(IsoError::SearchBudgetExceeded(b)) => {
                    eprintln!("error: search budget {b} exhausted");
                    return EXIT_EXHAUSTED;
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    return EXIT_NEGATIVE;
                }
            }
        }
        let ci = match found {
            Some(ci) => ci,
            None => {
                reps.push(cf);
                reps.len() - 1
            }
        };
        *class_sizes.entry(ci).or_insert(0) += 1;
    }
    println!("iso_classes={}", reps.len());
    for (ci, size) in class_sizes {
        println!("class.{}.size={}", ci + 1, size);
    }
    0
}

fn cmd_search_mult_basis(poset: &Path, grading: &Path, budget: u64) -> u8 {
    let (alg, g) = match load_pair(poset, grading) {
        Ok(v) => v,
        Err(c) => return c,
    };
    let cf = match canonicalize(&alg, &g) {
        Ok(cf) => cf,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_NEGATIVE;
        }
    };
    // The obstruction analysis reads block data off the canonical form of
    // the same grading in canonical position.
    match search_multiplicative_basis(&cf.algebra, &cf.grading, &cf, budget) {
        BasisOutcome::Found(basis) => {
            println!("multiplicative_basis=found");
            for e in &basis {
                println!("basis={e}");
            }
            0
        }
        BasisOutcome::NotFound(obstruction) => {
            println!("multiplicative_basis=none");
            println!("obstruction={obstruction:?}");
            EXIT_NEGATIVE
        }
        BasisOutcome::Exhausted { budget } => {
            println!("multiplicative_basis=unknown");
            println!("budget={budget}");
            EXIT_EXHAUSTED
        }
    }
}

fn cmd_orbit_check(poset: &Path, grading: &Path, budget: u64) -> u8 {
    let (alg, g) = match load_pair(poset, grading) {
        Ok(v) => v,
        Err(c) => return c,
    };
    let cf = match canonicalize(&alg, &g) {
        Ok(cf) => cf,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_NEGATIVE;
        }
    };
    match verify_orbit_condition(&cf, budget) {
        Ok(OrbitOutcome::Found { subset, lambdas }) => {
            println!("orbit_condition=found");
            println!("subset.size={}", subset.len());
            let ls: Vec<String> = lambdas.iter().map(u64::to_string).collect();
            println!("lambdas={}", ls.join(","));
            0
        }
        Ok(OrbitOutcome::NotFound { block, orbits }) => {
            println!("orbit_condition=none");
            println!("witness.block={}", block + 1);
            println!("witness.orbits={orbits:?}");
            EXIT_NEGATIVE
        }
        Err(IsoError::SearchBudgetExceeded(b)) => {
            eprintln!("error: search budget {b} exhausted");
            EXIT_EXHAUSTED
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_NEGATIVE
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    set_conductor_max(cli.conductor_max);
    let budget = std::env::var("INCIDENCE_SEARCH_BUDGET")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(cli.budget);
    let code = match &cli.command {
        Command::Verify {
            poset,
            grading,
            field,
        } => cmd_verify(poset, grading, *field),
        Command::Canonicalize { poset, grading, dot } => cmd_canonicalize(poset, grading, *dot),
        Command::Decompose { poset, grading } => cmd_decompose(poset, grading),
        Command::Iso {
            poset_a,
            grading_a,
            poset_b,
            grading_b,
        } => cmd_iso(poset_a, grading_a, poset_b, grading_b, budget),
        Command::Realize {
            spec,
            out_poset,
            out_grading,
        } => cmd_realize(spec, out_poset, out_grading),
        Command::Oracle {
            oracle: OracleCommand::EnumerateGood { poset, group },
        } => cmd_enumerate_good(poset, group, budget),
        Command::SearchMultBasis { poset, grading } => {
            cmd_search_mult_basis(poset, grading, budget)
        }
        Command::OrbitCheck { poset, grading } => cmd_orbit_check(poset, grading, budget),
    };
    ExitCode::from(code)
}
