//! Batch driver for the limitlab workbench: run machines, convert between
//! program disciplines, apply translators, evaluate gallery functions to a
//! precision, stage limit inversions, run the desk demos, and re-emit stored
//! runs as JSONL traces.
//!
//! Exit codes: 0 success, 1 usage error, 2 contract violation (invalid
//! names, oracle gaps, budget exhaustion, bad files).

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use num_bigint::BigInt;
use num_rational::BigRational;

use limitlab::baire::Stream;
use limitlab::gallery::{
    desk_demos, f_smooth_enclosure, f_unit_run, run_trace_jsonl, FinUniverse,
};
use limitlab::interval::Interval;
use limitlab::spaces::chain_translators;
use limitlab::transforms::{comparators_universe, limit_inversion, limit_to_monotone, verify_inversion};
use limitlab::vm::{
    jump_approx, jump_exact, load_universe_manifest, parse_program, print_program, run_limit,
    run_monotone, LimitRun, MachineCode, ProgramKind, Universe,
};

#[derive(Parser)]
#[command(name = "limitlab", version, about = "workbench for machines with revisable output")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a machine and print its tape or output prefix.
    Run {
        /// Program discipline: monotone, limit, or fmc.
        #[arg(long)]
        kind: String,
        /// Program text file.
        #[arg(long)]
        program: PathBuf,
        /// Input stream: const:N, word:a,b,c (then zeros), or file:PATH.
        #[arg(long)]
        input: String,
        /// Step budget; defaults to LIMITLAB_BUDGET or 100000.
        #[arg(long)]
        budget: Option<u64>,
        /// Number of output cells to print.
        #[arg(long, default_value_t = 8)]
        prefix: u64,
        /// Feed the machine a jump of the input instead: whitelist:FILE
        /// (exact, over the manifest) or step:N (comparator approximation
        /// at budget N).
        #[arg(long)]
        oracle: Option<String>,
        /// Save the full limit run as JSON for later `trace`.
        #[arg(long)]
        save: Option<PathBuf>,
    },
    /// Convert a program between disciplines.
    Convert {
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long)]
        program: PathBuf,
    },
    /// Apply a named space translator to an input stream.
    Translate {
        /// Translator name; use --list to see what ships.
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        input: Option<String>,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long, default_value_t = 8)]
        prefix: u64,
        /// List shipped translators and exit.
        #[arg(long)]
        list: bool,
    },
    /// Evaluate a gallery function at an exact rational point.
    Eval {
        /// Space the function lives on: unit or reals.
        #[arg(long)]
        space: String,
        /// Function: f_unit or f_smooth.
        #[arg(long)]
        function: String,
        /// Finiteness-universe manifest (JSON).
        #[arg(long)]
        universe: PathBuf,
        /// Rational point, e.g. 3/4.
        #[arg(long)]
        point: String,
        /// Output radius is 2^-precision.
        #[arg(long, default_value_t = 6)]
        precision: u32,
    },
    /// Stage a limit inversion against a whitelist oracle.
    InvertLimit {
        /// Oracle: whitelist:FILE.
        #[arg(long)]
        oracle: String,
        #[arg(long)]
        input: String,
        #[arg(long, default_value_t = 4)]
        stages: u64,
    },
    /// Run the shipped desk demos.
    Demo {
        /// Demo id or `all`.
        #[arg(long, default_value = "all")]
        id: String,
    },
    /// Re-emit a stored limit run as a JSONL rewrite trace.
    Trace {
        /// Run file saved by `run --save`.
        #[arg(long)]
        run: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Contract(String),
}

impl From<limitlab::error::Error> for Failure {
    fn from(e: limitlab::error::Error) -> Self {
        Failure::Contract(e.to_string())
    }
}

fn default_budget(explicit: Option<u64>) -> u64 {
    explicit
        .or_else(|| std::env::var("LIMITLAB_BUDGET").ok().and_then(|s| s.parse().ok()))
        .unwrap_or(100_000)
}

fn parse_input(spec: &str) -> Result<Stream, Failure> {
    if let Some(n) = spec.strip_prefix("const:") {
        let n: u64 =
            n.parse().map_err(|_| Failure::Usage(format!("bad constant in `{spec}`")))?;
        return Ok(Stream::constant(n));
    }
    if let Some(list) = spec.strip_prefix("word:") {
        let word: Result<Vec<u64>, _> = list.split(',').map(|t| t.trim().parse()).collect();
        let word = word.map_err(|_| Failure::Usage(format!("bad word in `{spec}`")))?;
        return Ok(Stream::word_then_const(word, 0));
    }
    if let Some(path) = spec.strip_prefix("file:") {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Contract(format!("{path}: {e}")))?;
        let word: Result<Vec<u64>, _> = text.split_whitespace().map(|t| t.parse()).collect();
        let word =
            word.map_err(|_| Failure::Contract(format!("{path}: expected cell values")))?;
        return Ok(Stream::word_then_const(word, 0));
    }
    Err(Failure::Usage(format!("input must be const:N, word:LIST, or file:PATH, got `{spec}`")))
}

fn load_program(path: &Path, kind: ProgramKind) -> Result<MachineCode, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Contract(format!("{}: {e}", path.display())))?;
    Ok(MachineCode::new(parse_program(&text)?, kind)?)
}

fn load_whitelist(path: &str) -> Result<Arc<Universe>, Failure> {
    Ok(Arc::new(load_universe_manifest(Path::new(path))?))
}

fn apply_oracle(input: Stream, oracle: &str) -> Result<Stream, Failure> {
    if let Some(file) = oracle.strip_prefix("whitelist:") {
        return Ok(jump_exact(load_whitelist(file)?, input));
    }
    if let Some(n) = oracle.strip_prefix("step:") {
        let budget: u64 =
            n.parse().map_err(|_| Failure::Usage(format!("bad step budget in `{oracle}`")))?;
        let bits = jump_approx(&comparators_universe(), &input, budget, 64)?;
        return Ok(Stream::word_then_const(bits, 0));
    }
    Err(Failure::Usage(format!("oracle must be whitelist:FILE or step:N, got `{oracle}`")))
}

fn print_cells(cells: &[Option<u64>]) {
    let line: String = if cells.iter().all(|c| c.map_or(true, |v| v < 10)) {
        cells.iter().map(|c| c.map_or(".".into(), |v| v.to_string())).collect()
    } else {
        cells
            .iter()
            .map(|c| c.map_or(".".into(), |v| v.to_string()))
            .collect::<Vec<_>>()
            .join(" ")
    };
    println!("{line}");
}

fn parse_rational(s: &str) -> Result<BigRational, Failure> {
    BigRational::from_str(s)
        .or_else(|_| BigInt::from_str(s).map(BigRational::from_integer))
        .map_err(|_| Failure::Usage(format!("bad rational `{s}`")))
}

fn pow2_inv(k: u32) -> BigRational {
    BigRational::new(BigInt::from(1), BigInt::from(1) << k as usize)
}

fn cmd_run(
    kind: &str,
    program: &Path,
    input: &str,
    budget: Option<u64>,
    prefix: u64,
    oracle: Option<&str>,
    save: Option<&Path>,
) -> Result<(), Failure> {
    let kind = ProgramKind::parse(kind)?;
    let code = load_program(program, kind)?;
    let mut p = parse_input(input)?;
    if let Some(o) = oracle {
        p = apply_oracle(p, o)?;
    }
    let budget = default_budget(budget);
    match kind {
        ProgramKind::Monotone => {
            let run = run_monotone(&code, &p, budget)?;
            let cells: Vec<Option<u64>> =
                (0..prefix as usize).map(|j| run.output.get(j).copied()).collect();
            print_cells(&cells);
            println!("steps: {}, halted: {}", run.steps, run.halted);
            if save.is_some() {
                return Err(Failure::Usage("--save applies to limit runs only".into()));
            }
        }
        ProgramKind::Limit | ProgramKind::Fmc => {
            let run = run_limit(&code, &p, budget)?;
            let cells: Vec<Option<u64>> =
                (0..prefix).map(|j| run.tape.get(&j).copied()).collect();
            print_cells(&cells);
            let changes: Vec<String> =
                (0..prefix).map(|j| run.mind_changes(j).to_string()).collect();
            println!("changes: {}", changes.join(" "));
            if let Some(path) = save {
                let json = serde_json::to_string_pretty(&run)
                    .map_err(|e| Failure::Contract(e.to_string()))?;
                std::fs::write(path, json)
                    .map_err(|e| Failure::Contract(format!("{}: {e}", path.display())))?;
            }
        }
    }
    Ok(())
}

fn cmd_convert(from: &str, to: &str, program: &Path) -> Result<(), Failure> {
    let from = ProgramKind::parse(from)?;
    let code = load_program(program, from)?;
    match (from, to) {
        (ProgramKind::Limit | ProgramKind::Fmc, "monotone") => {
            let g = limit_to_monotone(&code)?;
            print!("{}", print_program(g.program()));
            Ok(())
        }
        _ => Err(Failure::Usage(format!(
            "unsupported conversion {} -> {to}; supported: limit|fmc -> monotone",
            from.name()
        ))),
    }
}

fn cmd_translate(
    name: Option<&str>,
    input: Option<&str>,
    budget: Option<u64>,
    prefix: u64,
    list: bool,
) -> Result<(), Failure> {
    let translators = chain_translators()?;
    if list {
        for t in &translators {
            println!("{}: {} -> {} ({:?})", t.name, t.source.name, t.target.name, t.regime);
        }
        return Ok(());
    }
    let name = name.ok_or_else(|| Failure::Usage("--name required (or --list)".into()))?;
    let input = input.ok_or_else(|| Failure::Usage("--input required".into()))?;
    let t = translators
        .iter()
        .find(|t| t.name == name)
        .ok_or_else(|| Failure::Usage(format!("unknown translator `{name}`; try --list")))?;
    let p = parse_input(input)?;
    let out = t.translate(&p, default_budget(budget))?;
    let mut cells = Vec::new();
    for j in 0..prefix {
        cells.push(Some(out.get(j)?));
    }
    print_cells(&cells);
    Ok(())
}

fn cmd_eval(
    space: &str,
    function: &str,
    universe: &Path,
    point: &str,
    precision: u32,
) -> Result<(), Failure> {
    let u = FinUniverse::load(universe)?;
    let x = parse_rational(point)?;
    let radius = pow2_inv(precision);
    let (center, radius) = match (space, function) {
        ("unit", "f_unit") => {
            let stages = 4 * precision as u64 + 16;
            let vals = f_unit_run(&u, &x, stages);
            (vals.last().cloned().unwrap_or_default(), radius)
        }
        ("reals", "f_smooth") => {
            let stage = precision as u64 + 8;
            let enc = f_smooth_enclosure(&u, &Interval::point(x), stage, precision + 12)?;
            let center = (&enc.lo + &enc.hi) / BigRational::from_integer(BigInt::from(2));
            let spread = (&enc.hi - &enc.lo) / BigRational::from_integer(BigInt::from(2));
            (center, spread + radius)
        }
        _ => {
            return Err(Failure::Usage(format!(
                "unknown space/function `{space}/{function}`; supported: unit/f_unit, reals/f_smooth"
            )))
        }
    };
    println!("{center} ± {radius}");
    Ok(())
}

fn cmd_invert_limit(oracle: &str, input: &str, stages: u64) -> Result<(), Failure> {
    let file = oracle
        .strip_prefix("whitelist:")
        .ok_or_else(|| Failure::Usage("invert-limit needs --oracle=whitelist:FILE".into()))?;
    let u = load_whitelist(file)?;
    let p = parse_input(input)?;
    let inv = limit_inversion(&p, &u, stages)?;
    for s in &inv.stages {
        match s.witness {
            Some((n, k, v)) => {
                println!("stage {}: bit {} (witness cell ({n},{k}) = {v})", s.stage, s.bit as u64)
            }
            None => println!("stage {}: bit {}", s.stage, s.bit as u64),
        }
    }
    println!("bits: {:?}", inv.bits);
    if !verify_inversion(&inv, &u)? {
        return Err(Failure::Contract("inversion failed verification".into()));
    }
    Ok(())
}

fn cmd_demo(id: &str) -> Result<(), Failure> {
    let mut all_passed = true;
    let mut matched = false;
    for report in desk_demos()? {
        if id != "all" && report.name != id {
            continue;
        }
        matched = true;
        println!("{}: {} ({})", report.name, if report.passed { "pass" } else { "FAIL" }, report.detail);
        all_passed &= report.passed;
    }
    if !matched {
        return Err(Failure::Usage(format!("unknown demo `{id}`")));
    }
    if !all_passed {
        return Err(Failure::Contract("a demo failed".into()));
    }
    Ok(())
}

fn cmd_trace(run: &Path) -> Result<(), Failure> {
    let text = std::fs::read_to_string(run)
        .map_err(|e| Failure::Contract(format!("{}: {e}", run.display())))?;
    let run: LimitRun =
        serde_json::from_str(&text).map_err(|e| Failure::Contract(format!("bad run file: {e}")))?;
    print!("{}", run_trace_jsonl(&run));
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { kind, program, input, budget, prefix, oracle, save } => {
            cmd_run(&kind, &program, &input, budget, prefix, oracle.as_deref(), save.as_deref())
        }
        Command::Convert { from, to, program } => cmd_convert(&from, &to, &program),
        Command::Translate { name, input, budget, prefix, list } => {
            cmd_translate(name.as_deref(), input.as_deref(), budget, prefix, list)
        }
        Command::Eval { space, function, universe, point, precision } => {
            cmd_eval(&space, &function, &universe, &point, precision)
        }
        Command::InvertLimit { oracle, input, stages } => {
            cmd_invert_limit(&oracle, &input, stages)
        }
        Command::Demo { id } => cmd_demo(&id),
        Command::Trace { run } => cmd_trace(&run),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
        Err(e) => {
            // --help and --version go to stdout and succeed
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Contract(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
