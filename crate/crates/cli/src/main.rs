use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use relica::caprops::analyze;
use relica::complexity::relica_breakdown;
use relica::datasets::{generate_with, DatasetId, GenOptions, SplitSpec};
use relica::harness::{csv_by_dataset, summarize, summary_json, sweep, SweepConfig};
use relica::lattice::enumerate_rules;
use relica::pipeline::{evaluate, Encoding, Transformation};
use relica::selector::select;
use relica::{Error, LinearRule, Modulus, Result};

const SEED_ENV: &str = "RELICA_SEED";

#[derive(Parser)]
#[command(name = "relica", version, about = "Linear cellular automata reservoirs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the pre-selected rules for a modulus and neighborhood.
    SelectRules {
        #[arg(long)]
        m: u32,
        #[arg(long, default_value_t = 3)]
        neighborhood: usize,
    },
    /// Print the dynamical properties of one rule.
    AnalyzeRule {
        #[arg(long)]
        m: u32,
        /// Coefficients from left to right, e.g. "(0,2,1)".
        #[arg(long)]
        rule: String,
    },
    /// Write the sequences of one dataset, one file per sequence.
    GenDataset {
        #[arg(long, alias = "name")]
        dataset: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Training sequences.
        #[arg(long, default_value_t = 100)]
        sequences: usize,
        /// Draw the pseudo periodic offsets at every step.
        #[arg(long)]
        ppst_per_step: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train and score one rule on one dataset.
    Evaluate(ModelArgs),
    /// Evaluate many rules on one or more datasets.
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        /// Which rules to sweep.
        #[arg(long, value_enum, default_value_t = RuleSet::All)]
        rules: RuleSet,
    },
    /// Print the bit-level inference cost of a reservoir.
    Complexity {
        #[arg(long)]
        m: u32,
        #[arg(long, default_value = "16x32")]
        lattice: String,
        #[arg(long, default_value_t = 4)]
        iterations: u64,
        #[arg(long, default_value_t = 2)]
        nnz: u64,
        #[arg(long)]
        skip: bool,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RuleSet {
    All,
    Selected,
}

#[derive(Args)]
struct ModelArgs {
    /// JSON file with default values for any of these flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    neighborhood: Option<usize>,
    #[arg(long)]
    rule: Option<String>,
    /// Compartments times cells per compartment, e.g. 16x32.
    #[arg(long)]
    lattice: Option<String>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    transformation: Option<String>,
    #[arg(long)]
    encoding: Option<String>,
    /// Base seed; defaults to $RELICA_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Feed the raw input to the readout as well.
    #[arg(long)]
    skip: bool,
    /// Dataset id, or a comma-separated list for sweeps.
    #[arg(long)]
    dataset: Option<String>,
    /// Training sequences per dataset.
    #[arg(long)]
    sequences: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    ppst_per_step: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Values read from `--config`. Explicit flags take precedence.
#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    m: Option<u32>,
    neighborhood: Option<usize>,
    rule: Option<String>,
    lattice: Option<String>,
    iterations: Option<usize>,
    transformation: Option<String>,
    encoding: Option<String>,
    seed: Option<u64>,
    alpha: Option<f64>,
    skip: Option<bool>,
    dataset: Option<String>,
    sequences: Option<usize>,
    workers: Option<usize>,
    ppst_per_step: Option<bool>,
    out: Option<PathBuf>,
}

/// Flags merged over the config file and defaults.
struct Resolved {
    m: Option<u32>,
    neighborhood: usize,
    rule: Option<String>,
    datasets: Vec<DatasetId>,
    out: Option<PathBuf>,
    sweep: SweepConfig,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| invalid(format!("{SEED_ENV} is not an unsigned integer: '{v}'"))),
        Err(_) => Ok(None),
    }
}

fn parse_lattice(s: &str) -> Result<(usize, usize)> {
    let (r, c) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| invalid(format!("lattice must look like 16x32, got '{s}'")))?;
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| invalid(format!("bad lattice dimension '{t}'")))
    };
    Ok((num(r)?, num(c)?))
}

fn parse_datasets(s: &str) -> Result<Vec<DatasetId>> {
    if s.trim() == "all" {
        return Ok(DatasetId::ALL.to_vec());
    }
    s.split(',').map(|d| d.trim().parse()).collect()
}

fn resolve(a: ModelArgs) -> Result<Resolved> {
    let file: FileConfig = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p)?;
            serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", p.display())))?
        }
        None => FileConfig::default(),
    };
    let mut sweep = SweepConfig::default();
    if let Some(l) = a.lattice.or(file.lattice) {
        (sweep.rows, sweep.cols) = parse_lattice(&l)?;
    }
    if let Some(i) = a.iterations.or(file.iterations) {
        sweep.iterations = i;
    }
    if let Some(t) = a.transformation.or(file.transformation) {
        sweep.transformation = t.parse::<Transformation>()?;
    }
    if let Some(e) = a.encoding.or(file.encoding) {
        sweep.encoding = e.parse::<Encoding>()?;
    }
    if let Some(alpha) = a.alpha.or(file.alpha) {
        sweep.ridge_alpha = alpha;
    }
    sweep.input_skip = a.skip || file.skip.unwrap_or(false);
    sweep.base_seed = match a.seed.or(file.seed) {
        Some(s) => s,
        None => env_seed()?.unwrap_or(0),
    };
    if let Some(s) = a.sequences.or(file.sequences) {
        sweep.split.train_sequences = s;
    }
    sweep.workers = a.workers.or(file.workers).unwrap_or(1);
    sweep.gen.ppst_rand_per_step = a.ppst_per_step || file.ppst_per_step.unwrap_or(false);
    let datasets = match a.dataset.or(file.dataset) {
        Some(d) => parse_datasets(&d)?,
        None => Vec::new(),
    };
    Ok(Resolved {
        m: a.m.or(file.m),
        neighborhood: a.neighborhood.or(file.neighborhood).unwrap_or(3),
        rule: a.rule.or(file.rule),
        datasets,
        out: a.out.or(file.out),
        sweep,
    })
}

fn need_m(m: Option<u32>) -> Result<Modulus> {
    Modulus::new(m.ok_or_else(|| invalid("--m is required"))?)
}

fn run_select(m: u32, neighborhood: usize) -> Result<String> {
    let sel = select(&Modulus::new(m)?, neighborhood)?;
    let mut out = String::new();
    for r in &sel.rules {
        out.push_str(&format!("{r}\n"));
    }
    let l = sel.fixed_layers;
    out.push_str(&format!(
        "# transformation={} quantization=rounding mapping=random encoding={}\n",
        l.transformation, l.encoding
    ));
    Ok(out)
}

fn run_analyze(m: u32, rule: &str) -> Result<String> {
    let r = LinearRule::parse(Modulus::new(m)?, rule)?;
    Ok(format!("rule                    {r} over Z_{m}\n{}\n", analyze(&r)))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, text)?;
    Ok(())
}

fn run_gen(dataset: &str, seed: Option<u64>, sequences: usize, per_step: bool, out: &Path) -> Result<String> {
    let id: DatasetId = dataset.parse()?;
    let seed = match seed {
        Some(s) => s,
        None => env_seed()?.unwrap_or(0),
    };
    let spec = SplitSpec {
        train_sequences: sequences,
        ..SplitSpec::default()
    };
    let task = generate_with(id, &spec, seed, GenOptions { ppst_rand_per_step: per_step })?;
    fs::create_dir_all(out)?;
    let mut files = 0;
    for (split, seqs) in [("train", &task.train), ("test", &task.test), ("validation", &task.validation)] {
        for (i, s) in seqs.iter().enumerate() {
            let mut text = String::with_capacity(s.x.len() * 40);
            for (x, y) in s.x.iter().zip(&s.y) {
                text.push_str(&format!("{x} {y}\n"));
            }
            write_file(&out.join(format!("{id}_{split}_{i:03}.txt")), &text)?;
            files += 1;
        }
    }
    Ok(format!("wrote {files} sequences of {id} to {}\n", out.display()))
}

fn run_evaluate(a: ModelArgs) -> Result<String> {
    let r = resolve(a)?;
    let md = need_m(r.m)?;
    let rule_text = r.rule.ok_or_else(|| invalid("--rule is required"))?;
    let rule = LinearRule::parse(md, &rule_text)?;
    let [id] = r.datasets[..] else {
        return Err(invalid("evaluate needs exactly one --dataset"));
    };
    let task = r.sweep.task(id)?;
    let e = evaluate(&r.sweep.model(rule.clone()), &task)?;
    let mut text = format!(
        "dataset {id}\nrule {rule} over Z_{}\nlattice {}x{}, iterations {}, seed {}\n",
        rule.m(),
        r.sweep.rows,
        r.sweep.cols,
        r.sweep.iterations,
        r.sweep.base_seed
    );
    text.push_str(&format!("split       mse          nmse\n"));
    let mut line = |name: &str, v: &relica::pipeline::EvalResult| {
        text.push_str(&format!("{name:<11} {:<12.6e} {:.6}\n", v.mse, v.nmse));
    };
    line("train", &e.train);
    line("test", &e.test);
    if let Some(v) = &e.validation {
        line("validation", v);
    }
    if let Some(path) = r.out {
        let json = serde_json::json!({
            "dataset": id.name(),
            "rule": rule.to_string(),
            "m": rule.m(),
            "train": e.train,
            "test": e.test,
            "validation": e.validation,
        });
        write_file(&path, &format!("{json:#}\n"))?;
    }
    Ok(text)
}

fn run_sweep(a: ModelArgs, set: RuleSet) -> Result<String> {
    let r = resolve(a)?;
    let md = need_m(r.m)?;
    let out = r.out.ok_or_else(|| invalid("--out <dir> is required for sweep"))?;
    if r.datasets.is_empty() {
        return Err(invalid("--dataset is required"));
    }
    let selected = select(&md, r.neighborhood).map(|s| s.rules).unwrap_or_default();
    let rules: Vec<LinearRule> = match (&r.rule, set) {
        (Some(list), _) => list
            .split(';')
            .map(|w| LinearRule::parse(md.clone(), w))
            .collect::<Result<_>>()?,
        (None, RuleSet::All) => enumerate_rules(&md, r.neighborhood)?.collect(),
        (None, RuleSet::Selected) => select(&md, r.neighborhood)?.rules,
    };
    let records = sweep(&rules, &r.datasets, &r.sweep)?;
    fs::create_dir_all(&out)?;
    for (name, csv) in csv_by_dataset(&records)? {
        write_file(&out.join(format!("{name}.csv")), &csv)?;
    }
    let summary = summarize(&records, &selected)?;
    write_file(&out.join("summary.json"), &(summary_json(&summary)? + "\n"))?;
    let mut text = format!(
        "{} records ({} failed) written to {}\n",
        records.len(),
        summary.failed_records,
        out.display()
    );
    for s in &summary.selected {
        text.push_str(&format!(
            "selected {} mean nmse {:.6} better than {:.1}%\n",
            s.rule, s.mean_nmse, s.percent_better
        ));
    }
    Ok(text)
}

fn run_complexity(m: u32, lattice: &str, iterations: u64, nnz: u64, skip: bool) -> Result<String> {
    let (rows, cols) = parse_lattice(lattice)?;
    let b = relica_breakdown(m, (rows * cols) as u64, iterations, nnz, skip)?;
    Ok(format!("{}\n{b}\n", b.total()))
}

fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::SelectRules { m, neighborhood } => run_select(m, neighborhood),
        Command::AnalyzeRule { m, rule } => run_analyze(m, &rule),
        Command::GenDataset {
            dataset,
            seed,
            sequences,
            ppst_per_step,
            out,
        } => run_gen(&dataset, seed, sequences, ppst_per_step, &out),
        Command::Evaluate(a) => run_evaluate(a),
        Command::Sweep { model, rules } => run_sweep(model, rules),
        Command::Complexity {
            m,
            lattice,
            iterations,
            nnz,
            skip,
        } => run_complexity(m, &lattice, iterations, nnz, skip),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
