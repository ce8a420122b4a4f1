mod dimacs;
mod generate;
mod report;
mod selfcheck;

use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use thiserror::Error;

use tlbsat::fpt::{bikernel, find_polynomial_witness};
use tlbsat::kernel2sat::AuxGraph;
use tlbsat::{
    average_assignment, brute_force_opt, decide_polynomial, derandomized_switch_assignment,
    greedy_star_packing, instance_to_polynomial, kernelize_2sat, lin2_to_cnf, meets_tlb, sat_count,
    semicomplete_reduce, validate_instance, CnfInstance, Decision, FormulaError, FptConfig,
    FptError, Kernel2Error, Kernel2Outcome, Lin2, Lin2Error, Polynomial, Verdict, DEFAULT_VAR_CAP,
};

use dimacs::{comment_value, write_dimacs, DimacsError};
use generate::{generate, Family, GenError, GenParams};
use report::{GeneratorEcho, KernelSummary, RunReport, Stats};

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error(transparent)]
    Dimacs(#[from] DimacsError),
    #[error(transparent)]
    Lin2(#[from] Lin2Error),
    #[error(transparent)]
    Fpt(#[from] FptError),
    #[error(transparent)]
    Kernel2(#[from] Kernel2Error),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Generate(#[from] GenError),
    #[error("{0}")]
    Usage(String),
    #[error("selfcheck failed: {0}")]
    Selfcheck(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "tlbsat", version, about = "Max-r-SAT above the tight lower bound (1 − 2^−r)·m")]
struct Cli {
    /// Input file; standard input when absent.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Clause width; inferred from the first clause by default.
    #[arg(long, global = true)]
    r: Option<usize>,
    /// Worker threads for the exhaustive searches.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Is sat(F)·2^r ≥ (2^r − 1)·m + k?
    Decide {
        #[arg(long)]
        k: u64,
    },
    /// An assignment meeting the bound, for YES instances.
    Witness {
        #[arg(long)]
        k: u64,
    },
    /// Conditional-expectation assignment meeting the lower bound.
    Avg,
    /// The multilinear polynomial, one `coefficient vars…` line per term.
    Poly,
    /// Writes the Lin2 bikernel.
    Bikernel {
        #[arg(long)]
        k: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Writes the CNF kernel, from a Lin2 file or directly from a CNF.
    Kernel {
        /// Overrides the `c k` comment of a Lin2 input; required for CNF input.
        #[arg(long)]
        k: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Max-2-SAT kernel with at most 3k − 1 variables.
    Kernel2 {
        #[arg(long)]
        k: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact optimum by exhaustive search.
    Oracle {
        #[arg(long)]
        k: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_VAR_CAP)]
        var_cap: u32,
    },
    /// Seeded random instance in DIMACS.
    Gen {
        #[arg(long)]
        family: String,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Agreement probability with the hidden assignment (planted only).
        #[arg(long, default_value_t = 0.9)]
        bias: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-emits a DIMACS or Lin2 file in canonical form.
    Normalize,
    /// Runs the small-instance property suites.
    Selfcheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        count: u64,
    },
}

/// What to print and how to exit.
enum Output {
    Report(Box<RunReport>),
    Raw(String),
}

fn read_input(path: &Option<PathBuf>) -> Result<String, CliError> {
    let mut text = String::new();
    match path {
        Some(p) => {
            text = std::fs::read_to_string(p).map_err(|source| CliError::Io {
                path: p.display().to_string(),
                source,
            })?;
        }
        None => {
            io::stdin()
                .read_to_string(&mut text)
                .map_err(|source| CliError::Io {
                    path: "<stdin>".into(),
                    source,
                })?;
        }
    }
    Ok(text)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn read_cnf(cli: &Cli) -> Result<CnfInstance, CliError> {
    Ok(dimacs::parse_dimacs(&read_input(&cli.input)?, cli.r)?)
}

fn bound_numerator(f: &CnfInstance, k: u64) -> String {
    (((BigInt::from(1u8) << f.r()) - 1u8) * f.m() + k).to_string()
}

fn verdict_str(v: Verdict) -> String {
    match v {
        Verdict::Yes => "YES".into(),
        Verdict::No => "NO".into(),
    }
}

fn stats_of(d: &Decision) -> Stats {
    Stats {
        term_count: d.stats.term_count,
        l2: d.stats.l2.to_string(),
        weight_sum: d.stats.weight_sum.to_string(),
        support_size: d.stats.support_size,
        threshold: d.stats.threshold.to_string(),
        search_max: d.stats.search_max.as_ref().map(|m| m.to_string()),
    }
}

fn decide_report(cli: &Cli, k: u64, want_witness: bool) -> Result<RunReport, CliError> {
    let f = read_cnf(cli)?;
    let config = FptConfig::default();
    let poly: Polynomial = instance_to_polynomial(&f);
    let d = decide_polynomial(&poly, k, &config)?;
    let name = if want_witness { "witness" } else { "decide" };
    let mut report = RunReport::new(name).with_instance(&f);
    report.verdict = Some(verdict_str(d.verdict));
    report.route = Some(d.route.as_str().into());
    report.k = Some(k);
    report.bound_numerator = Some(bound_numerator(&f, k));
    report.stats = Some(stats_of(&d));
    let witness = match (&d.witness, want_witness && d.verdict.is_yes()) {
        (_, true) => Some(find_polynomial_witness(&poly, k, &d, &config)?),
        (Some(tau), false) => Some(tau.clone()),
        (None, false) => None,
    };
    if let Some(tau) = witness {
        let tau = tau.extended_to(f.n());
        let sat = sat_count(&tau, &f);
        if !meets_tlb(sat, f.r(), f.m(), k) {
            return Err(FptError::WitnessSearchExhausted.into());
        }
        report.sat = Some(sat);
        report.witness = Some(tau.to_dimacs());
    }
    Ok(report)
}

fn avg_report(cli: &Cli) -> Result<RunReport, CliError> {
    let f = read_cnf(cli)?;
    let tau = average_assignment(&f).extended_to(f.n());
    let mut report = RunReport::new("avg").with_instance(&f);
    report.sat = Some(sat_count(&tau, &f));
    report.guaranteed_sat = Some((((1u64 << f.r()) - 1) * f.m()).div_ceil(1 << f.r()));
    report.witness = Some(tau.to_dimacs());
    Ok(report)
}

fn bikernel_report(cli: &Cli, k: u64, out: &Path) -> Result<RunReport, CliError> {
    let f = read_cnf(cli)?;
    let bk = bikernel(&f, k)?;
    let vars: Vec<String> = bk.var_map.iter().map(|v| v.to_string()).collect();
    let mut comments = vec![
        format!("k {}", bk.k),
        format!("r {}", f.r()),
        format!("route {}", bk.route.as_str()),
    ];
    if !vars.is_empty() {
        comments.push(format!("var-map {}", vars.join(" ")));
    }
    write_file(out, &bk.system.to_text(&comments))?;
    let mut report = RunReport::new("bikernel").with_instance(&f);
    report.k = Some(k);
    report.route = Some(bk.route.as_str().into());
    report.kernel = Some(KernelSummary {
        n: bk.system.n(),
        m: bk.system.len() as u64,
        k: bk.k,
        equations: Some(bk.system.len()),
        total_weight: Some(bk.system.total_weight().to_string()),
        ..Default::default()
    });
    report.kernel_paths = vec![out.display().to_string()];
    Ok(report)
}

fn parse_comment<T: std::str::FromStr>(comments: &[String], key: &str) -> Result<Option<T>, CliError> {
    comment_value(comments, key)
        .map(|v| {
            v.parse()
                .map_err(|_| CliError::Usage(format!("bad `c {key}` comment value `{v}`")))
        })
        .transpose()
}

fn is_lin2(text: &str) -> bool {
    text.lines()
        .map(str::trim)
        .find(|l| l.starts_with('p'))
        .is_some_and(|l| l.split_whitespace().nth(1) == Some("lin2"))
}

fn kernel_report(cli: &Cli, k: Option<u64>, out: &Path) -> Result<RunReport, CliError> {
    let text = read_input(&cli.input)?;
    let (cnf, k_out, r, k_in, source) = if is_lin2(&text) {
        let (sys, comments) = Lin2::parse_text(&text)?;
        let k = match k {
            Some(k) => k,
            None => parse_comment(&comments, "k")?
                .ok_or_else(|| CliError::Usage("Lin2 input has no `c k` comment; pass --k".into()))?,
        };
        let r = match cli.r {
            Some(r) => r,
            None => parse_comment(&comments, "r")?
                .ok_or_else(|| CliError::Usage("Lin2 input has no `c r` comment; pass --r".into()))?,
        };
        let (cnf, k2) = lin2_to_cnf(&sys, r, k)?;
        (cnf, k2, r, k, None)
    } else {
        let f = dimacs::parse_dimacs(&text, cli.r)?;
        let k = k.ok_or_else(|| CliError::Usage("--k is required for CNF input".into()))?;
        let (cnf, k2) = tlbsat::fpt::kernel(&f, k)?;
        (cnf, k2, f.r(), k, Some(f))
    };
    write_file(out, &write_dimacs(&cnf, &[format!("k {k_out}"), format!("r {r}")]))?;
    let mut report = RunReport::new("kernel");
    if let Some(f) = &source {
        report = report.with_instance(f);
    }
    report.k = Some(k_in);
    report.kernel = Some(KernelSummary {
        n: cnf.n(),
        m: cnf.m(),
        k: k_out,
        ..Default::default()
    });
    report.kernel_paths = vec![out.display().to_string()];
    Ok(report)
}

fn kernel2_report(cli: &Cli, k: i64, out: &Option<PathBuf>) -> Result<RunReport, CliError> {
    let f = read_cnf(cli)?;
    let mut report = RunReport::new("kernel2").with_instance(&f);
    report.k = u64::try_from(k).ok();
    if let Some(k) = report.k {
        report.bound_numerator = Some(bound_numerator(&f, k));
    }
    let outcome = kernelize_2sat(&f, k, DEFAULT_VAR_CAP)?;

    // constructive bound on the original instance
    let red = semicomplete_reduce(&f)?;
    let packing = greedy_star_packing(&AuxGraph::of(&red.reduced)?);
    let s = derandomized_switch_assignment(&red.reduced, &packing)?;
    report.sat = Some(sat_count(&s.assignment, &f));
    report.guaranteed_sat = Some(s.guaranteed_sat(red.reduced.m()) + 3 * red.blocks);
    report.witness = Some(s.assignment.to_dimacs());

    let summary = |kernel: &tlbsat::Kernel2| KernelSummary {
        n: kernel.instance.n(),
        m: kernel.instance.m(),
        k: kernel.k,
        offset_clauses: Some(kernel.offset_clauses),
        significant: Some(kernel.significant),
        ..Default::default()
    };
    report.leaves = Some(s.t);
    match outcome {
        Kernel2Outcome::Yes { significant } => {
            report.verdict = Some("YES".into());
            report.route = Some(if k == 0 { "k_zero" } else { "significant_variables" }.into());
            report.significant = Some(significant);
        }
        Kernel2Outcome::Solved { verdict, kernel, .. } => {
            report.verdict = Some(if verdict { "YES" } else { "NO" }.into());
            report.route = Some("kernel_brute_force".into());
            report.kernel = Some(summary(&kernel));
        }
        Kernel2Outcome::Kernel(kernel) => {
            report.route = Some("kernel".into());
            if let Some(path) = out {
                let map: Vec<String> = kernel
                    .var_map
                    .iter()
                    .map(|v| v.map_or_else(|| "z".to_string(), |v| v.to_string()))
                    .collect();
                let comments = vec![
                    format!("tlb-offset {}", kernel.offset_clauses),
                    format!("k {}", kernel.k),
                    format!("var-map {}", map.join(" ")),
                ];
                write_file(path, &write_dimacs(&kernel.instance, &comments))?;
                report.kernel_paths = vec![path.display().to_string()];
            }
            report.kernel = Some(summary(&kernel));
        }
    }
    Ok(report)
}

fn oracle_report(cli: &Cli, k: Option<u64>, var_cap: u32) -> Result<RunReport, CliError> {
    let f = read_cnf(cli)?;
    let (tau, sat) = brute_force_opt(&f, var_cap)?;
    let mut report = RunReport::new("oracle").with_instance(&f);
    report.sat = Some(sat);
    report.witness = Some(tau.to_dimacs());
    if let Some(k) = k {
        report.k = Some(k);
        report.bound_numerator = Some(bound_numerator(&f, k));
        report.verdict = Some(verdict_str(Verdict::from_bool(meets_tlb(sat, f.r(), f.m(), k))));
        report.route = Some("brute_force".into());
    }
    Ok(report)
}

fn gen_output(p: GenParams, out: &Option<PathBuf>) -> Result<Output, CliError> {
    let raw = generate(&p)?;
    let f = validate_instance(&raw, p.r, p.n)?;
    let mut echo = format!(
        "generator family={} r={} n={} m={} seed={}",
        p.family.as_str(),
        p.r,
        p.n,
        p.m,
        p.seed
    );
    if p.family == Family::Planted {
        echo.push_str(&format!(" bias={}", p.bias));
    }
    // generation order, so a file reflects the sampled sequence
    let mut text = format!("c {echo}\np cnf {} {}\n", p.n, raw.len());
    for c in &raw {
        let lits: Vec<String> = c.iter().map(|l| l.to_string()).collect();
        text.push_str(&format!("{} 0\n", lits.join(" ")));
    }
    match out {
        None => Ok(Output::Raw(text)),
        Some(path) => {
            write_file(path, &text)?;
            let mut report = RunReport::new("gen").with_instance(&f);
            report.seed = Some(p.seed);
            report.generator = Some(GeneratorEcho {
                family: p.family.as_str().into(),
                r: p.r,
                n: p.n,
                m: p.m,
                seed: p.seed,
                bias: p.bias,
            });
            report.kernel_paths = vec![path.display().to_string()];
            Ok(Output::Report(Box::new(report)))
        }
    }
}

fn run(cli: &Cli) -> Result<Output, CliError> {
    let report = match &cli.command {
        Command::Decide { k } => decide_report(cli, *k, false)?,
        Command::Witness { k } => decide_report(cli, *k, true)?,
        Command::Avg => avg_report(cli)?,
        Command::Poly => {
            let f = read_cnf(cli)?;
            let poly: Polynomial = instance_to_polynomial(&f);
            return Ok(Output::Raw(poly.to_text()));
        }
        Command::Normalize => {
            let text = read_input(&cli.input)?;
            return Ok(Output::Raw(if is_lin2(&text) {
                let (sys, comments) = Lin2::parse_text(&text)?;
                sys.to_text(&comments)
            } else {
                let raw = dimacs::parse_raw(&text)?;
                let comments = raw.comments.clone();
                write_dimacs(&raw.into_instance(cli.r)?, &comments)
            }));
        }
        Command::Bikernel { k, out } => bikernel_report(cli, *k, out)?,
        Command::Kernel { k, out } => kernel_report(cli, *k, out)?,
        Command::Kernel2 { k, out } => kernel2_report(cli, *k, out)?,
        Command::Oracle { k, var_cap } => oracle_report(cli, *k, *var_cap)?,
        Command::Gen {
            family,
            n,
            m,
            seed,
            bias,
            out,
        } => {
            let r = cli.r.ok_or_else(|| CliError::Usage("gen requires --r".into()))?;
            let params = GenParams {
                family: family.parse()?,
                r,
                n: *n,
                m: *m,
                seed: *seed,
                bias: *bias,
            };
            return gen_output(params, out);
        }
        Command::Selfcheck { seed, count } => {
            let checks = selfcheck::selfcheck(*seed, *count);
            let failed: Vec<String> = checks
                .iter()
                .filter(|c| !c.passed)
                .map(|c| format!("{}: {}", c.name, c.failure.clone().unwrap_or_default()))
                .collect();
            let mut report = RunReport::new("selfcheck");
            report.seed = Some(*seed);
            report.checks = Some(checks);
            if !failed.is_empty() {
                eprint!("{}", report.to_text());
                return Err(CliError::Selfcheck(failed.join("; ")));
            }
            report
        }
    };
    Ok(Output::Report(Box::new(report)))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let start = Instant::now();
    match run(&cli) {
        Ok(Output::Raw(text)) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Ok(Output::Report(mut report)) => {
            report.timing_ms = start.elapsed().as_secs_f64() * 1e3;
            match cli.format {
                Format::Json => println!("{}", report.to_json()),
                Format::Text => print!("{}", report.to_text()),
            }
            if report.verdict.as_deref() == Some("NO") {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
