mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qcondprob::formats::{load_chain, load_event, load_slit_model, load_state, load_valuation};
use qcondprob::interference::scan_to_csv;
use qcondprob::{
    cond_prob, conditioned_on_record, double_slit_scan, evaluate_chain, objective_seq,
    sample_chain, search_valuation, Branch, Error, ErrorKind, SampleOptions, Tolerances,
    ValuationOutcome,
};
use serde_json::{json, Value};

use output::{fmt_num, num, opt_num, Format, Report};

#[derive(Parser, Debug)]
#[command(
    name = "qcondprob",
    version,
    about = "Conditional probabilities on quantum event lattices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Absolute tolerance
    #[arg(long, global = true, default_value_t = Tolerances::default().atol)]
    atol: f64,
    /// Relative tolerance
    #[arg(long, global = true, default_value_t = Tolerances::default().rtol)]
    rtol: f64,
    /// Residual bound for declaring a conditional probability objective
    #[arg(long, global = true, default_value_t = Tolerances::default().objectivity_tol)]
    objectivity_tol: f64,
    /// Probabilities at or below this are treated as zero
    #[arg(long, global = true, default_value_t = Tolerances::default().prob_floor)]
    prob_floor: f64,
    /// Output format (default: csv for `slit`, table otherwise)
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Sampler seed
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Default number of sampler trials
    #[arg(long, global = true, default_value_t = qcondprob::experiments::DEFAULT_TRIALS)]
    trials: u64,
    /// Sampler worker threads
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// State-dependent conditional probability μ(d | e)
    Condprob {
        state: PathBuf,
        d: PathBuf,
        e: PathBuf,
    },
    /// State-independent conditional probability ℙ(d | e₁, …, eₙ)
    Objective {
        d: PathBuf,
        #[arg(required = true)]
        chain: Vec<PathBuf>,
    },
    /// Evaluate a measurement-chain scenario
    Chain {
        scenario: PathBuf,
        /// Also simulate N trials (default: --trials)
        #[arg(long, num_args = 0..=1, value_name = "N")]
        sample: Option<Option<u64>>,
    },
    /// Coherent vs which-path scan over detector events
    Slit { model: PathBuf },
    /// Search for a non-contextual true/false valuation
    Valuation { problem: PathBuf },
}

struct RunConfig {
    tol: Tolerances,
    format: Option<Format>,
    seed: u64,
    trials: u64,
    workers: usize,
}

impl RunConfig {
    fn from_cli(cli: &Cli) -> qcondprob::Result<Self> {
        let tol = Tolerances {
            atol: cli.atol,
            rtol: cli.rtol,
            objectivity_tol: cli.objectivity_tol,
            prob_floor: cli.prob_floor,
        };
        tol.validate()?;
        if cli.trials == 0 {
            return Err(Error::InvalidConfig("--trials must be at least 1".into()));
        }
        if cli.workers == 0 {
            return Err(Error::InvalidConfig("--workers must be at least 1".into()));
        }
        Ok(Self {
            tol,
            format: cli.format,
            seed: cli.seed,
            trials: cli.trials,
            workers: cli.workers,
        })
    }

    fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}

fn condprob(
    cfg: &RunConfig,
    state: &PathBuf,
    d: &PathBuf,
    e: &PathBuf,
) -> qcondprob::Result<String> {
    let mu = load_state(state, &cfg.tol)?;
    let d = load_event(d, &cfg.tol)?;
    let e = load_event(e, &cfg.tol)?;
    let value = cond_prob(&mu, &d, &e, &cfg.tol)?;
    let mut r = Report::new();
    r.push("cond_prob", num(value))
        .push("prob_condition", num(mu.prob(&e)?));
    Ok(r.render(cfg.format_or(Format::Table)))
}

fn objective(cfg: &RunConfig, d: &PathBuf, chain: &[PathBuf]) -> qcondprob::Result<String> {
    let d = load_event(d, &cfg.tol)?;
    let chain = chain
        .iter()
        .map(|p| load_event(p, &cfg.tol))
        .collect::<qcondprob::Result<Vec<_>>>()?;
    let res = objective_seq(&d, &chain, &cfg.tol)?;
    let mut r = Report::new();
    r.push("value", opt_num(res.value))
        .push("lambda_re", num(res.lambda.re))
        .push("lambda_im", num(res.lambda.im))
        .push("residual", num(res.residual))
        .push("objective", res.objective)
        .push("chain_length", res.chain_length);
    Ok(r.render(cfg.format_or(Format::Table)))
}

fn chain(
    cfg: &RunConfig,
    scenario: &PathBuf,
    sample: Option<Option<u64>>,
) -> qcondprob::Result<String> {
    let chain = load_chain(scenario, &cfg.tol)?;
    let eval = evaluate_chain(&chain, &cfg.tol)?;
    let mut r = Report::new();
    r.push("probability", num(eval.probability))
        .push("negation_probability", num(eval.negation_probability))
        .push("survival", num(eval.survival));
    if chain.has_detector() {
        for branch in [Branch::Positive, Branch::Negation] {
            let value = match conditioned_on_record(&chain, branch, &cfg.tol) {
                Ok(ev) => num(ev.probability),
                Err(e) if e.kind() == ErrorKind::Undefined => Value::Null,
                Err(e) => return Err(e),
            };
            r.push(format!("given_record_{}", branch.label()), value);
        }
    }
    let trace: Vec<Value> = eval
        .trace
        .iter()
        .map(|s| {
            json!({
                "apparatus": s.apparatus,
                "rule": serde_json::to_value(s.rule).expect("serializable"),
                "reason": s.reason,
                "annotation": s.annotation,
            })
        })
        .collect();
    r.push("trace", trace);

    if let Some(n) = sample {
        let options = SampleOptions {
            trials: n.unwrap_or(cfg.trials),
            seed: cfg.seed,
            workers: cfg.workers,
        };
        if options.trials == 0 {
            return Err(Error::InvalidConfig("--sample must be at least 1".into()));
        }
        let s = sample_chain(&chain, options, &cfg.tol)?;
        r.push("sample_trials", s.trials)
            .push("sample_seed", s.seed)
            .push("sample_workers", s.workers);
        for (key, count) in &s.outcome_counts {
            r.push(format!("count_{key}"), *count);
        }
        for (key, freq) in &s.frequencies {
            r.push(format!("frequency_{key}"), num(*freq));
        }
        r.push("max_abs_deviation", num(s.max_abs_deviation))
            .push("discarded", s.discarded);
        for (key, count) in &s.record_counts {
            r.push(format!("record_{}", key.replace(':', "_")), *count);
        }
    }
    Ok(r.render(cfg.format_or(Format::Table)))
}

fn slit(cfg: &RunConfig, model: &PathBuf) -> qcondprob::Result<String> {
    let m = load_slit_model(model, &cfg.tol)?;
    let points = double_slit_scan(&m.momentum, &m.slit1, &m.slit2, &m.detectors, &cfg.tol)?;
    Ok(match cfg.format_or(Format::Csv) {
        Format::Csv => scan_to_csv(&points, fmt_num),
        Format::Json => {
            let rows: Vec<Value> = points
                .iter()
                .map(|p| {
                    json!({
                        "index": p.index,
                        "coherent": opt_num(p.coherent),
                        "incoherent": opt_num(p.incoherent),
                        "defined": p.defined(),
                    })
                })
                .collect();
            let mut s = serde_json::to_string_pretty(&rows).expect("serializable");
            s.push('\n');
            s
        }
        Format::Table => {
            let cell = |v: Option<f64>| v.map(fmt_num).unwrap_or_else(|| "undefined".into());
            let mut out = format!("{:>5}  {:>16}  {:>16}\n", "index", "coherent", "incoherent");
            for p in &points {
                out.push_str(&format!(
                    "{:>5}  {:>16}  {:>16}\n",
                    p.index,
                    cell(p.coherent),
                    cell(p.incoherent)
                ));
            }
            out
        }
    })
}

fn valuation(cfg: &RunConfig, problem: &PathBuf) -> qcondprob::Result<String> {
    let p = load_valuation(problem, &cfg.tol)?;
    let outcome = search_valuation(&p, &cfg.tol)?;
    let mut r = Report::new();
    r.push("events", p.events().len())
        .push("resolutions", p.resolutions().len());
    match &outcome {
        ValuationOutcome::Sat { assignment, nodes } => {
            let bits: String = assignment
                .iter()
                .map(|&b| if b { '1' } else { '0' })
                .collect();
            r.push("result", "sat")
                .push("nodes", *nodes)
                .push("assignment", bits);
        }
        ValuationOutcome::Unsat { nodes } => {
            r.push("result", "unsat").push("nodes", *nodes);
        }
    }
    Ok(r.render(cfg.format_or(Format::Table)))
}

fn exit_code(e: &Error) -> u8 {
    match e.kind() {
        ErrorKind::Validation => 2,
        ErrorKind::Undefined => 3,
        ErrorKind::Internal => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = RunConfig::from_cli(&cli).and_then(|cfg| match &cli.command {
        Command::Condprob { state, d, e } => condprob(&cfg, state, d, e),
        Command::Objective { d, chain } => objective(&cfg, d, chain),
        Command::Chain { scenario, sample } => chain(&cfg, scenario, *sample),
        Command::Slit { model } => slit(&cfg, model),
        Command::Valuation { problem } => valuation(&cfg, problem),
    });
    match result {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
