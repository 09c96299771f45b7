//! Command-line front end: factorization, cocycle evaluation, weight
//! enumeration, word rewriting, derivation checking, and the self test
//! suite. Exit codes: 0 success, 1 input or validation error, 2 a
//! mathematical contract check failed.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use circle_colim::cocycles::{
    affine_cocycle_modes, affine_cocycle_quadrature, virasoro_cocycle_modes,
    virasoro_cocycle_quadrature,
};
use circle_colim::diffeo::{self, CircleDiffeo};
use circle_colim::geometry::{build_partition_of_unity, validate_cover, Cover};
use circle_colim::json::{
    read_json, read_store_manifest, write_json, LoopJson, StoreManifestJson, VectorFieldJson,
};
use circle_colim::loops;
use circle_colim::selftest;
use circle_colim::weights;
use circle_colim::words::{
    reduce_relation, verify_derivation, Derivation, DiffeoOracle, LocalizedOracle, LoopOracle,
    Presentation, Word,
};
use circle_colim::{Error, Result};

#[derive(Parser)]
#[command(
    name = "circle-colim",
    about = "Interval factorizations on the circle, central extension cocycles, \
             word rewriting, and affine weight combinatorics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum CocycleKind {
    Virasoro,
    Affine,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Modes,
    Quadrature,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Loop,
    Diffeo,
}

#[derive(Subcommand)]
enum Command {
    /// Factor a sampled loop over a validated cover
    FactorLoop {
        /// loop JSON: {"group", "n", "values"}
        #[arg(long)]
        input: PathBuf,
        /// cover JSON: {"intervals", "d", "based", "strong_separation"}
        #[arg(long)]
        cover: PathBuf,
        /// reconstruction tolerance
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// directory for factor_XX.json outputs
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Factor a sampled circle diffeomorphism over a validated cover
    FactorDiffeo {
        /// diffeomorphism JSON: {"n", "lift"}
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        cover: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a central extension cocycle on a pair of inputs
    Cocycle {
        #[arg(long, value_enum)]
        kind: CocycleKind,
        /// first argument: vector field JSON (virasoro) or algebra loop JSON
        /// (affine)
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        g: PathBuf,
        #[arg(long, value_enum, default_value = "modes")]
        method: Method,
        /// quadrature grid size (power of two, >= 256)
        #[arg(long, default_value_t = 512)]
        grid: usize,
    },
    /// Enumerate level-k dominant weights and the orbit paraboloid constant
    Weights {
        /// group descriptor, e.g. su2 or su(3)
        #[arg(long)]
        group: String,
        #[arg(long)]
        level: i64,
    },
    /// Reduce an identity word over an element store
    Rewrite {
        /// word JSON: {"letters": [[id, exp], ...]}
        #[arg(long)]
        word: PathBuf,
        /// element store directory containing manifest.json
        #[arg(long)]
        elements: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        /// derivation output file
        #[arg(long)]
        emit: PathBuf,
        /// identity tolerance
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Replay and validate an emitted derivation
    Verify {
        #[arg(long)]
        derivation: PathBuf,
        #[arg(long)]
        elements: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Run the full acceptance suite
    Selftest {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// write the machine-readable report here
        #[arg(long)]
        out: Option<PathBuf>,
        /// run a single criterion (1..=11)
        #[arg(long)]
        only: Option<usize>,
    },
}

/// Raw diffeomorphism samples; validated through the monotone constructor.
#[derive(Serialize, Deserialize)]
struct DiffeoJson {
    n: usize,
    lift: Vec<f64>,
}

impl DiffeoJson {
    fn to_diffeo(&self) -> Result<CircleDiffeo> {
        if self.lift.len() != self.n {
            return Err(Error::Precondition(format!(
                "lift has {} samples, n = {}",
                self.lift.len(),
                self.n
            )));
        }
        CircleDiffeo::from_lift(self.lift.clone())
    }

    fn from_diffeo(phi: &CircleDiffeo) -> Self {
        DiffeoJson {
            n: phi.n_samples(),
            lift: phi.lift().to_vec(),
        }
    }
}

/// New generators minted during a reduction, inlined so the derivation can be
/// replayed against the original store.
#[derive(Serialize, Deserialize)]
struct NewGeneratorJson {
    label: circle_colim::geometry::Interval,
    cover_index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    loop_elem: Option<LoopJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    diffeo_elem: Option<DiffeoJson>,
}

#[derive(Serialize, Deserialize)]
struct DerivationFileJson {
    mode: String,
    complete: bool,
    diagnostic: Option<String>,
    derivation: Derivation,
    new_generators: Vec<NewGeneratorJson>,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        // a mathematical check failed after valid input
        Error::InvalidDerivation { .. } | Error::RewriteBlocked(_) => 2,
        // everything else is an input or precondition problem
        _ => 1,
    }
}

fn contract_violation(message: String) -> Error {
    Error::InvalidDerivation {
        step: 0,
        reason: message,
    }
}

fn load_cover(path: &Path) -> Result<Cover> {
    let cover: Cover = read_json(path)?;
    let report = validate_cover(&cover)?;
    if !report.pass {
        return Err(Error::InvalidCover(format!("{report:?}")));
    }
    Ok(cover)
}

fn print_complex(v: Complex64) {
    if v.im.abs() < 1e-12 {
        println!("{}", v.re);
    } else {
        println!("{}+{}i", v.re, v.im);
    }
}

fn check_grid(grid: usize) -> Result<()> {
    if grid < 256 || !grid.is_power_of_two() {
        return Err(Error::BadGridSize(grid));
    }
    Ok(())
}

fn run_factor_loop(input: &Path, cover: &Path, tol: f64, out: Option<&Path>) -> Result<()> {
    let gamma = read_json::<LoopJson>(input)?.to_loop()?;
    let cover = load_cover(cover)?;
    let pu = build_partition_of_unity(&cover)?;
    let factors = loops::factor_over_cover(&gamma, &cover, &pu)?;
    let recon = loops::multiply_all(&factors)?;
    let err = recon.sup_distance(&gamma)?;
    println!("factors: {}", factors.len());
    println!("reconstruction error: {err:.3e}");
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(Error::Io)?;
        for (j, f) in factors.iter().enumerate() {
            write_json(&dir.join(format!("factor_{j:02}.json")), &LoopJson::from_loop(f))?;
        }
    }
    if err > tol {
        return Err(contract_violation(format!(
            "reconstruction error {err:.3e} exceeds tolerance {tol:.3e}"
        )));
    }
    Ok(())
}

fn run_factor_diffeo(input: &Path, cover: &Path, tol: f64, out: Option<&Path>) -> Result<()> {
    let phi = read_json::<DiffeoJson>(input)?.to_diffeo()?;
    let cover = load_cover(cover)?;
    let factors = diffeo::factor_over_cover(&phi, &cover)?;
    let recon = diffeo::compose_all(&factors, factors[0].n_samples())?;
    let err = recon.sup_distance(&phi);
    println!("factors: {}", factors.len());
    println!("reconstruction error: {err:.3e}");
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(Error::Io)?;
        for (j, f) in factors.iter().enumerate() {
            write_json(
                &dir.join(format!("factor_{j:02}.json")),
                &DiffeoJson::from_diffeo(f),
            )?;
        }
    }
    if err > tol {
        return Err(contract_violation(format!(
            "reconstruction error {err:.3e} exceeds tolerance {tol:.3e}"
        )));
    }
    Ok(())
}

fn run_cocycle(kind: CocycleKind, f: &Path, g: &Path, method: Method, grid: usize) -> Result<()> {
    let value = match kind {
        CocycleKind::Virasoro => {
            let f = read_json::<VectorFieldJson>(f)?.to_field()?;
            let g = read_json::<VectorFieldJson>(g)?.to_field()?;
            match method {
                Method::Modes => virasoro_cocycle_modes(&f, &g),
                Method::Quadrature => {
                    check_grid(grid)?;
                    virasoro_cocycle_quadrature(&f, &g, grid)?
                }
            }
        }
        CocycleKind::Affine => {
            let f = read_json::<LoopJson>(f)?.to_lie_loop()?;
            let g = read_json::<LoopJson>(g)?.to_lie_loop()?;
            match method {
                Method::Modes => affine_cocycle_modes(&f, &g)?,
                Method::Quadrature => affine_cocycle_quadrature(&f, &g)?,
            }
        }
    };
    print_complex(value);
    Ok(())
}

fn run_weights(group: &str, level: i64) -> Result<()> {
    let list = weights::enumerate_level_k_highest_weights(group, level)?;
    for w in &list {
        println!(
            "{}",
            w.coords
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        );
    }
    println!("count: {}", list.len());
    println!("paraboloid constant: {}", weights::paraboloid_constant(group, level)?);
    Ok(())
}

fn build_presentation<O: LocalizedOracle>(
    oracle: O,
    dir: &Path,
    manifest: &StoreManifestJson,
    tol: f64,
    load: impl Fn(&Path) -> Result<O::Elem>,
) -> Result<Presentation<O>> {
    let mut ctx = Presentation::new(oracle, manifest.cover.clone(), tol, tol)?;
    for g in &manifest.generators {
        let elem = load(&dir.join(&g.file))?;
        ctx.add_generator(elem, g.label, g.cover_index)?;
    }
    Ok(ctx)
}

fn add_new_generators<O: LocalizedOracle>(
    ctx: &mut Presentation<O>,
    news: &[NewGeneratorJson],
    load: impl Fn(&NewGeneratorJson) -> Result<O::Elem>,
) -> Result<()> {
    for g in news {
        ctx.add_generator(load(g)?, g.label, g.cover_index)?;
    }
    Ok(())
}

fn collect_new_generators<O: LocalizedOracle>(
    ctx: &Presentation<O>,
    first_new: usize,
    dump: impl Fn(&O::Elem) -> NewGeneratorJson,
) -> Result<Vec<NewGeneratorJson>> {
    (first_new..ctx.n_generators())
        .map(|id| {
            let gen = ctx.generator(id)?;
            let mut out = dump(ctx.element(gen.elem)?);
            out.label = gen.label;
            out.cover_index = gen.cover_index;
            Ok(out)
        })
        .collect()
}

fn emit_outcome<O: LocalizedOracle>(
    ctx: &Presentation<O>,
    outcome: &circle_colim::words::ReduceOutcome,
    first_new: usize,
    mode: &str,
    emit: &Path,
    dump: impl Fn(&O::Elem) -> NewGeneratorJson,
) -> Result<()> {
    let file = DerivationFileJson {
        mode: mode.to_string(),
        complete: outcome.complete,
        diagnostic: outcome.diagnostic.clone(),
        derivation: outcome.derivation.clone(),
        new_generators: collect_new_generators(ctx, first_new, dump)?,
    };
    write_json(emit, &file)?;
    println!(
        "steps: {}, complete: {}",
        outcome.derivation.steps.len(),
        outcome.complete
    );
    if let Some(d) = &outcome.diagnostic {
        println!("blocked: {d}");
        return Err(Error::RewriteBlocked(d.clone()));
    }
    Ok(())
}

fn run_rewrite(word: &Path, elements: &Path, mode: Mode, emit: &Path, tol: f64) -> Result<()> {
    let manifest = read_store_manifest(elements)?;
    let word: Word = read_json(word)?;
    match mode {
        Mode::Loop => {
            let mut ctx = build_presentation(
                LoopOracle { tol },
                elements,
                &manifest,
                tol,
                |p| read_json::<LoopJson>(p)?.to_loop(),
            )?;
            let first_new = ctx.n_generators();
            let outcome = reduce_relation(&mut ctx, &word)?;
            emit_outcome(&ctx, &outcome, first_new, "loop", emit, |elem| NewGeneratorJson {
                label: circle_colim::geometry::Interval { start: 0.0, length: 1.0 },
                cover_index: None,
                loop_elem: Some(LoopJson::from_loop(elem)),
                diffeo_elem: None,
            })
        }
        Mode::Diffeo => {
            let mut ctx = build_presentation(
                DiffeoOracle { tol, u_displacement: manifest.cover.d },
                elements,
                &manifest,
                tol,
                |p| read_json::<DiffeoJson>(p)?.to_diffeo(),
            )?;
            let first_new = ctx.n_generators();
            let outcome = reduce_relation(&mut ctx, &word)?;
            emit_outcome(&ctx, &outcome, first_new, "diffeo", emit, |elem| NewGeneratorJson {
                label: circle_colim::geometry::Interval { start: 0.0, length: 1.0 },
                cover_index: None,
                loop_elem: None,
                diffeo_elem: Some(DiffeoJson::from_diffeo(elem)),
            })
        }
    }
}

fn run_verify(derivation: &Path, elements: &Path, tol: f64) -> Result<()> {
    let manifest = read_store_manifest(elements)?;
    let file: DerivationFileJson = read_json(derivation)?;
    match file.mode.as_str() {
        "loop" => {
            let mut ctx = build_presentation(
                LoopOracle { tol },
                elements,
                &manifest,
                tol,
                |p| read_json::<LoopJson>(p)?.to_loop(),
            )?;
            add_new_generators(&mut ctx, &file.new_generators, |g| {
                g.loop_elem
                    .as_ref()
                    .ok_or_else(|| Error::Precondition("missing loop element".into()))?
                    .to_loop()
            })?;
            verify_derivation(&ctx, &file.derivation)?;
        }
        "diffeo" => {
            let mut ctx = build_presentation(
                DiffeoOracle { tol, u_displacement: manifest.cover.d },
                elements,
                &manifest,
                tol,
                |p| read_json::<DiffeoJson>(p)?.to_diffeo(),
            )?;
            add_new_generators(&mut ctx, &file.new_generators, |g| {
                g.diffeo_elem
                    .as_ref()
                    .ok_or_else(|| Error::Precondition("missing diffeo element".into()))?
                    .to_diffeo()
            })?;
            verify_derivation(&ctx, &file.derivation)?;
        }
        other => {
            return Err(Error::Precondition(format!("unknown mode {other:?}")));
        }
    }
    if file.complete && !file.derivation.final_word().is_empty() {
        return Err(contract_violation(format!(
            "derivation claims complete but the final word has {} letters",
            file.derivation.final_word().len()
        )));
    }
    println!(
        "derivation valid: {} steps, final word length {}",
        file.derivation.steps.len(),
        file.derivation.final_word().len()
    );
    Ok(())
}

fn run_selftest(seed: u64, out: Option<&Path>, only: Option<usize>) -> Result<()> {
    let report = match only {
        Some(id) => {
            let c = selftest::run_criterion(id, seed);
            selftest::SelfTestReport {
                seed,
                all_pass: c.pass,
                criteria: vec![c],
            }
        }
        None => selftest::run(seed),
    };
    for c in &report.criteria {
        println!(
            "criterion {:>2}: {} - {} ({}) [{} ms]",
            c.id,
            if c.pass { "pass" } else { "FAIL" },
            c.name,
            c.detail,
            c.millis
        );
    }
    if let Some(path) = out {
        write_json(path, &report)?;
    }
    if report.all_pass {
        println!("all criteria pass");
        Ok(())
    } else {
        Err(contract_violation("self test criteria failed".into()))
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::FactorLoop { input, cover, tol, out } => {
            run_factor_loop(&input, &cover, tol, out.as_deref())
        }
        Command::FactorDiffeo { input, cover, tol, out } => {
            run_factor_diffeo(&input, &cover, tol, out.as_deref())
        }
        Command::Cocycle { kind, f, g, method, grid } => run_cocycle(kind, &f, &g, method, grid),
        Command::Weights { group, level } => run_weights(&group, level),
        Command::Rewrite { word, elements, mode, emit, tol } => {
            run_rewrite(&word, &elements, mode, &emit, tol)
        }
        Command::Verify { derivation, elements, tol } => run_verify(&derivation, &elements, tol),
        Command::Selftest { seed, out, only } => run_selftest(seed, out.as_deref(), only),
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("CIRCLE_COLIM_THREADS") {
        if let Ok(k) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
        }
    }
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
