use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use bruhat_codes::bruhat::BruhatInterval;
use bruhat_codes::codes::{logical_count, CodeFormat, CssCode, SideConvention};
use bruhat_codes::coxeter::parse_group_spec;
use bruhat_codes::distance::{analyze, DistanceSettings, WORKERS_ENV};
use bruhat_codes::experiment::{bundle_hash, run, ExperimentConfig, Method, Prepared};
use bruhat_codes::spheres::SphereCensus;
use bruhat_codes::transform::{Bias, FoldVariant, SpliceConfig, SpliceSides};
use bruhat_codes::weightred::reduce_to_threshold;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "bruhat-codes", version, about = "CSS codes from Bruhat intervals of Coxeter groups")]
#[command(after_help = "Worker threads for distance sampling and trials: set BRUHAT_WORKERS.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct IntervalArgs {
    /// A<n>, E8, C2^<n>, "triangle a b c", complete4:<m> or "matrix [..]".
    #[arg(long)]
    group: String,
    #[arg(long, default_value = "id")]
    wb: String,
    #[arg(long, default_value = "w0")]
    wt: String,
}

#[derive(Args, Clone)]
struct Output {
    #[arg(long, default_value = "bundle")]
    format: CodeFormat,
    /// Write the code here and print a summary; without it the code goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct DistanceArgs {
    #[arg(long, default_value_t = 28)]
    exact_cap: usize,
    #[arg(long, default_value_t = 1000)]
    ris_trials: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Coxeter matrix, backend and classification.
    Group {
        #[arg(long)]
        group: String,
    },
    /// Layer sizes of a Bruhat interval; `--full` adds elements and covers.
    Interval {
        #[command(flatten)]
        iv: IntervalArgs,
        #[arg(long)]
        full: bool,
    },
    /// Diamond, crown and S² census of the five layers around p.
    Spheres {
        #[command(flatten)]
        iv: IntervalArgs,
        #[arg(short)]
        p: usize,
    },
    /// The k = 0 code on the layers p−1, p, p+1.
    MakeTrivial {
        #[command(flatten)]
        iv: IntervalArgs,
        #[arg(short)]
        p: usize,
        #[arg(long, default_value = "lower-x")]
        side_convention: SideConvention,
        #[command(flatten)]
        out: Output,
    },
    /// One trial of crown, S², random or diamond splicing.
    Splice {
        #[command(flatten)]
        iv: IntervalArgs,
        #[arg(short)]
        p: usize,
        #[arg(long, default_value = "crown")]
        method: Method,
        #[arg(long, default_value_t = 1)]
        kappa: usize,
        #[arg(long, default_value_t = 1)]
        lambda: usize,
        #[arg(long, default_value_t = 10)]
        cutoff: usize,
        #[arg(long, default_value = "auto")]
        bias: Bias,
        /// Random splicing: x, z or both.
        #[arg(long, default_value = "both")]
        sides: SpliceSides,
        /// Diamond removal: number of diamonds.
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Trial index inside the seed's stream family.
        #[arg(long, default_value_t = 0)]
        trial: u64,
        #[arg(long, default_value = "lower-x")]
        side_convention: SideConvention,
        #[command(flatten)]
        out: Output,
    },
    /// Fold the 5 (or 7) layers around p into a CSS code.
    Fold {
        #[command(flatten)]
        iv: IntervalArgs,
        #[arg(short)]
        p: usize,
        #[arg(long, default_value = "fused")]
        variant: FoldVariant,
        /// Fold seven layers instead of five.
        #[arg(long)]
        seven: bool,
        /// With `--seven`: emit the metacheck code.
        #[arg(long, requires = "seven")]
        metacheck: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Bridged-star weight reduction down to a threshold.
    ReduceWeight {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        w_max: usize,
        #[arg(long, default_value_t = 64)]
        max_iters: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Distance of a code file: exact when small, sampled otherwise.
    Distance {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        d: DistanceArgs,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run an experiment config and write a JSON-lines report.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        exact_cap: Option<usize>,
        #[arg(long)]
        ris_trials: Option<usize>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = e.downcast_ref::<bruhat_codes::Error>().map_or("other", |e| e.kind());
            let chain: Vec<String> = e.chain().map(|c| c.to_string()).collect();
            println!("{}", json!({"error": {"kind": kind, "message": chain.join(": ")}}));
            ExitCode::from(2)
        }
    }
}

fn print(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json"));
}

fn announce_seed(seed: u64) {
    eprintln!("master seed: {seed}");
}

fn config_for(iv: &IntervalArgs, p: usize, method: Method) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(&iv.group, p, method);
    c.wb = iv.wb.clone();
    c.wt = iv.wt.clone();
    c
}

fn emit(code: &CssCode, out: &Output, extra: Value) -> Result<()> {
    let text = code.export(out.format);
    match &out.out {
        None => print!("{text}"),
        Some(path) => {
            fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
            let mut v = summary(code);
            v["output"] = json!(path);
            v["format"] = json!(out.format);
            if let (Value::Object(m), Value::Object(e)) = (&mut v, extra) {
                m.extend(e);
            }
            print(&v);
        }
    }
    Ok(())
}

fn summary(code: &CssCode) -> Value {
    json!({
        "n": code.n(),
        "k": logical_count(code),
        "rank_x": code.rank_x(),
        "rank_z": code.rank_z(),
        "weights": code.weight_stats(),
        "hash": bundle_hash(code),
    })
}

fn read_code(path: &Path) -> Result<CssCode> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(CssCode::import(&text)?)
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Group { group } => {
            let sys = parse_group_spec(&group)?;
            let mut v = sys.to_json();
            v["classification"] = serde_json::to_value(sys.classify())?;
            print(&v);
        }
        Command::Interval { iv, full } => {
            let sys = parse_group_spec(&iv.group)?;
            let i = BruhatInterval::from_word_text(&sys, &iv.wb, &iv.wt)?;
            if full {
                print(&i.to_json());
            } else {
                print(&json!({
                    "group": sys.spec(),
                    "bottom": i.bottom().to_string(),
                    "top": i.top().to_string(),
                    "length": i.length(),
                    "size": i.len(),
                    "layer_sizes": i.layer_sizes(),
                }));
            }
        }
        Command::Spheres { iv, p } => {
            let sys = parse_group_spec(&iv.group)?;
            let i = BruhatInterval::from_word_text(&sys, &iv.wb, &iv.wt)?;
            let census = SphereCensus::of_subposet(&i.layered_subposet(p, 2)?)?;
            print(&census.to_json());
        }
        Command::MakeTrivial { iv, p, side_convention, out } => {
            let mut c = config_for(&iv, p, Method::Triple);
            c.convention = side_convention;
            let code = Prepared::new(&c, 0)?.build(0)?;
            emit(&code, &out, json!({}))?;
        }
        Command::Splice { iv, p, method, kappa, lambda, cutoff, bias, sides, count, seed, trial, side_convention, out } => {
            if !matches!(method, Method::Crown | Method::S2 | Method::Random | Method::Diamond) {
                bail!("splice supports crown, s2, random and diamond, not {method:?}");
            }
            let mut c = config_for(&iv, p, method);
            c.convention = side_convention;
            c.splice = Some(SpliceConfig { kappa, lambda, cutoff, bias, seed: 0 });
            c.sides = sides;
            c.count = count;
            let seed = seed.unwrap_or_else(|| c.resolve_seed());
            announce_seed(seed);
            let code = Prepared::new(&c, seed)?.build(trial)?;
            emit(&code, &out, json!({"seed": seed, "trial": trial}))?;
        }
        Command::Fold { iv, p, variant, seven, metacheck, out } => {
            let mut c = config_for(&iv, p, if seven { Method::FoldM7 } else { Method::FoldM5 });
            c.variant = variant;
            c.metacheck = metacheck;
            let code = Prepared::new(&c, 0)?.build(0)?;
            emit(&code, &out, json!({"variant": variant}))?;
        }
        Command::ReduceWeight { input, w_max, max_iters, out } => {
            let code = read_code(&input)?;
            let rep = reduce_to_threshold(&code, w_max, max_iters)?;
            let extra = json!({
                "iterations": rep.iterations,
                "plans": rep.plans,
                "residual": rep.residual,
                "failed": rep.failed,
            });
            emit(&rep.code, &out, extra)?;
        }
        Command::Distance { input, d, seed } => {
            let code = read_code(&input)?;
            let seed = seed.unwrap_or_else(rand::random);
            announce_seed(seed);
            let settings = DistanceSettings { exact_cap: d.exact_cap, ris_trials: d.ris_trials, ..Default::default() };
            let rep = analyze(&code, &settings, seed)?;
            let mut v = summary(&code);
            v["distance"] = serde_json::to_value(&rep)?;
            v["d"] = json!(rep.d());
            print(&v);
        }
        Command::Run { config, seed, trials, exact_cap, ris_trials, report } => {
            let mut c = ExperimentConfig::from_file(&config).with_context(|| format!("loading {}", config.display()))?;
            if let Some(t) = trials {
                c.trials = t;
            }
            if let Some(x) = exact_cap {
                c.distance.exact_cap = x;
            }
            if let Some(r) = ris_trials {
                c.distance.ris_trials = r;
            }
            if report.is_some() {
                c.report = report;
            }
            let seed = seed.or(c.seed).unwrap_or_else(|| c.resolve_seed());
            announce_seed(seed);
            if let Ok(w) = std::env::var(WORKERS_ENV) {
                log::info!("{WORKERS_ENV}={w}");
            }
            let records = run(&c, seed)?;
            if c.report.is_none() {
                for r in &records {
                    println!("{}", serde_json::to_string(r)?);
                }
            } else {
                let best = records.iter().filter(|r| r.k > 0).max_by_key(|r| (r.distance.as_ref().and_then(|d| d.d()), r.k));
                print(&json!({
                    "seed": seed,
                    "trials": records.len(),
                    "report": c.report,
                    "nontrivial": records.iter().filter(|r| r.k > 0).count(),
                    "best": best.map(|r| json!({"trial": r.trial, "n": r.n, "k": r.k, "d": r.distance.as_ref().and_then(|d| d.d())})),
                }));
            }
        }
    }
    Ok(())
}
