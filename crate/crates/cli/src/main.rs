use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lawvere::chains::enumerate_chains;
use lawvere::coeff::{CountRing, Ring, SymbolicRing};
use lawvere::homology::{check_coefficient, count_complex, homology, morse_inequality_report};
use lawvere::monoid::{enumerate_word_chains, monoid_homology, Srs};
use lawvere::morse::{Matching, MorseComplex};
use lawvere::parse::{parse_presentation, parse_srs, print_presentation};
use lawvere::report;
use lawvere::rewrite::{CheckOptions, Trs};
use lawvere::Error;

#[derive(Parser)]
#[command(name = "lawvere", version, about = "Anick resolutions and homology of Lawvere theories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify that the rules form a reduced complete rewriting system.
    Check {
        file: PathBuf,
        #[arg(long, default_value_t = 1_000)]
        cp_budget: usize,
        #[arg(long, default_value_t = 10_000)]
        term_budget: usize,
        #[arg(long)]
        assume_terminating: bool,
    },
    /// Print the reduced rewriting system.
    Reduce { file: PathBuf },
    /// List the chains through a dimension.
    Chains {
        file: PathBuf,
        #[arg(long)]
        max_dim: usize,
        #[arg(long)]
        json: bool,
    },
    /// Print the Morse differential of every chain.
    Resolution {
        file: PathBuf,
        #[arg(long)]
        max_dim: usize,
        #[arg(long, value_enum, default_value_t = Mode::Symbolic)]
        mode: Mode,
    },
    /// Homology with coefficients in Z_d.
    Homology {
        file: PathBuf,
        #[arg(long)]
        max_dim: usize,
        /// `auto` for the degree of the rules, or 0 or a prime.
        #[arg(long, default_value = "auto")]
        coeff: String,
        #[arg(long)]
        json: bool,
    },
    /// Weak and strong Morse inequalities at one dimension.
    Inequality {
        file: PathBuf,
        #[arg(long)]
        dim: usize,
    },
    /// Monoids presented by string rewriting systems.
    Monoid {
        #[command(subcommand)]
        command: MonoidCommand,
    },
}

#[derive(Subcommand)]
enum MonoidCommand {
    Chains {
        file: PathBuf,
        #[arg(long)]
        max_dim: usize,
        #[arg(long)]
        json: bool,
    },
    Homology {
        file: PathBuf,
        #[arg(long)]
        max_dim: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Symbolic,
    Count,
}

enum Failure {
    Input(String),
    Incomplete(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Incomplete(_) => 2,
            Failure::Lib(e) => match e.root() {
                Error::CompletenessNotCertified(_) => 2,
                Error::BudgetExceeded { .. } => 3,
                Error::UnsupportedDegree(_) => 4,
                _ => 1,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Input(m) | Failure::Incomplete(m) => m.clone(),
            Failure::Lib(e) => e.to_string(),
        }
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Trs, Failure> {
    let text = read(path)?;
    parse_presentation(&text).map(|p| p.trs).map_err(|e| Failure::Input(format!("{}:{e}", path.display())))
}

fn load_srs(path: &Path) -> Result<Srs, Failure> {
    let text = read(path)?;
    parse_srs(&text).map_err(|e| Failure::Input(format!("{}:{e}", path.display())))
}

fn certified(trs: &Trs) -> Result<(), Failure> {
    let report = trs.check_complete(&CheckOptions::default());
    if report.certified() {
        Ok(())
    } else {
        Err(Failure::Incomplete(format!("completeness not certified: {}", report.first_failure().unwrap_or_default())))
    }
}

fn resolve_coeff(coeff: &str, degree: u64) -> Result<u64, Failure> {
    let d = match coeff {
        "auto" => degree,
        s => s.parse().map_err(|_| Failure::Input(format!("--coeff expects `auto` or an integer, got `{s}`")))?,
    };
    Ok(check_coefficient(d, degree)?)
}

fn check(file: &Path, opts: CheckOptions) -> Outcome {
    let trs = load(file)?;
    let r = trs.check_complete(&opts);
    println!("rules            {}", trs.rules().len());
    println!("reduced          {}", if r.reduced() { "yes" } else { "no" });
    println!("critical pairs   {} ({} nontrivial)", r.critical_pairs, r.nontrivial_pairs);
    println!("joinable         {}", if r.locally_confluent() { "all" } else { "no" });
    if r.assumed_terminating {
        println!("termination      assumed");
    } else {
        println!("termination      probe of {} terms {}", r.probed_terms, if r.termination_probe_passed() { "passed" } else { "failed" });
    }
    println!("degree           {}", trs.degree());
    for f in r.reducedness_failures.iter().chain(&r.unjoinable).chain(&r.termination_failures) {
        println!("  {f}");
    }
    if r.certified() {
        println!("certified");
        Ok(())
    } else {
        Err(Failure::Incomplete("completeness not certified".into()))
    }
}

fn chains(file: &Path, max_dim: usize, json: bool) -> Outcome {
    let trs = load(file)?;
    certified(&trs)?;
    let chains = enumerate_chains(&trs, max_dim)?;
    if json {
        println!("{}", report::chains_json(&trs, &chains));
    } else {
        print!("{}", report::chains_table(&trs, &chains));
    }
    Ok(())
}

fn print_resolution<R: Ring>(trs: &Trs, complex: &MorseComplex<'_, R>, max_dim: usize, show: impl Fn(&R::Elem) -> String) -> Outcome {
    let chains = enumerate_chains(trs, max_dim)?;
    for n in 1..=max_dim {
        println!("dimension {n}");
        for (c, terms) in chains.cells(n).zip(complex.differentials(&chains, n)?) {
            let rhs: Vec<String> = terms.iter().map(|t| format!("({}) {}", show(&t.coeff), t.target.display(&trs.sig))).collect();
            let rhs = if rhs.is_empty() { "0".to_string() } else { rhs.join(" + ") };
            println!("  δ{} = {rhs}", c.display(&trs.sig));
        }
    }
    Ok(())
}

fn resolution(file: &Path, max_dim: usize, mode: Mode) -> Outcome {
    let trs = load(file)?;
    certified(&trs)?;
    let matching = Matching::new(&trs);
    match mode {
        Mode::Symbolic => {
            let complex = MorseComplex::new(&matching, SymbolicRing::new(&trs));
            print_resolution(&trs, &complex, max_dim, |e| e.display(&trs.sig).to_string())
        }
        Mode::Count => {
            let d = trs.degree();
            println!("counts modulo {d}");
            let complex = MorseComplex::new(&matching, CountRing { modulus: d });
            print_resolution(&trs, &complex, max_dim, |k| k.to_string())
        }
    }
}

fn homology_cmd(file: &Path, max_dim: usize, coeff: &str, json: bool) -> Outcome {
    let trs = load(file)?;
    certified(&trs)?;
    let d = resolve_coeff(coeff, trs.degree())?;
    let (_, complex) = count_complex(&trs, max_dim + 1, d)?;
    let h = homology(&complex)?;
    let inequality = if max_dim >= 2 { Some(morse_inequality_report(&complex, 2)?) } else { None };
    if json {
        println!("{}", report::homology_json(&complex, &h, inequality.as_ref()));
    } else {
        print!("{}", report::homology_table(&complex, &h));
        if let Some(r) = &inequality {
            print!("{}", report::inequality_text(r));
        }
    }
    Ok(())
}

fn inequality(file: &Path, dim: usize) -> Outcome {
    let trs = load(file)?;
    certified(&trs)?;
    let d = resolve_coeff("auto", trs.degree())?;
    let (_, complex) = count_complex(&trs, dim + 1, d)?;
    let r = morse_inequality_report(&complex, dim)?;
    println!("coefficients Z/{d}Z, critical cells {:?}", r.critical);
    print!("{}", report::inequality_text(&r));
    if r.weak.holds() && r.strong.holds() {
        Ok(())
    } else {
        Err(Failure::Input("Morse inequality violated: internal error".into()))
    }
}

fn monoid(cmd: MonoidCommand) -> Outcome {
    let file = match &cmd {
        MonoidCommand::Chains { file, .. } | MonoidCommand::Homology { file, .. } => file.clone(),
    };
    let srs = load_srs(&file)?;
    let r = srs.check_complete(&CheckOptions::default());
    if !r.certified() {
        return Err(Failure::Incomplete(format!("completeness not certified: {}", r.first_failure().unwrap_or_default())));
    }
    match cmd {
        MonoidCommand::Chains { max_dim, json, .. } => {
            let chains = enumerate_word_chains(&srs, max_dim)?;
            if json {
                println!("{}", report::word_chains_json(&srs, &chains));
            } else {
                for (n, d) in chains.dims.iter().enumerate() {
                    println!("{n}-chains ({}):", d.len());
                    for c in d {
                        println!("  ({})", c.iter().map(|w| srs.show(w)).collect::<Vec<_>>().join(", "));
                    }
                }
            }
        }
        MonoidCommand::Homology { max_dim, .. } => {
            let (chains, h) = monoid_homology(&srs, max_dim)?;
            println!("dim  chains  H");
            for (n, g) in h.iter().enumerate() {
                println!("{n:>3}  {:>6}  {g}", chains.dims[n].len());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Check { file, cp_budget, term_budget, assume_terminating } => {
            check(&file, CheckOptions { cp_budget, term_budget, assume_terminating, ..CheckOptions::default() })
        }
        Command::Reduce { file } => load(&file).and_then(|trs| {
            print!("{}", print_presentation(&trs.reduce()?));
            Ok(())
        }),
        Command::Chains { file, max_dim, json } => chains(&file, max_dim, json),
        Command::Resolution { file, max_dim, mode } => resolution(&file, max_dim, mode),
        Command::Homology { file, max_dim, coeff, json } => homology_cmd(&file, max_dim, &coeff, json),
        Command::Inequality { file, dim } => inequality(&file, dim),
        Command::Monoid { command } => monoid(command),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
