use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use svmma::data::{load_csv, LabelColumn};
use svmma::experiments::{
    aggregate, emit_report, run_experiment, ExperimentConfig, Method, Mode, Scenario, Source,
};
use svmma::screening::{screen_features, ScreeningConfig};
use svmma::Term;

#[derive(Parser)]
#[command(name = "svmma", version, about = "Cross-validation model averaging for linear SVMs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulation study on generated data.
    Simulate(RunArgs),
    /// Repeated random splits of a CSV dataset over training fractions.
    Realdata(RunArgs),
    /// Test and training error as the number of candidates grows.
    LearningCurve(RunArgs),
    /// Print the screened feature ordering of a CSV dataset.
    Screen(ScreenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum DgpArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    S1,
    S2,
    None,
}

#[derive(Args)]
struct RunArgs {
    /// JSON file with experiment settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dgp: Option<DgpArg>,
    #[arg(long)]
    scenario: Option<ScenarioArg>,
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Label column, by zero-based index or header name.
    #[arg(long)]
    label: Option<LabelColumn>,
    /// Training size, or a comma-separated list to sweep.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    ntest: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    folds: Option<usize>,
    /// Number of candidate models.
    #[arg(long)]
    sn: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    sn_grid: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    g_grid: Option<Vec<f64>>,
    /// Training fraction for CSV data outside realdata mode.
    #[arg(long)]
    train_fraction: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    shuffle_folds: bool,
    /// Record per-method wall time (makes output run-dependent).
    #[arg(long)]
    timing: bool,
    #[arg(long, env = "SVMMA_THREADS")]
    threads: Option<usize>,
    #[command(flatten)]
    screening: ScreeningArgs,
    #[arg(long, default_value = "svmma-out")]
    out: PathBuf,
}

#[derive(Args)]
struct ScreeningArgs {
    /// Smallest screening penalty.
    #[arg(long)]
    a: Option<f64>,
    /// Largest screening penalty.
    #[arg(long)]
    b: Option<f64>,
    /// Number of screening grid intervals.
    #[arg(long = "L", visible_alias = "steps")]
    steps: Option<usize>,
    #[arg(long)]
    zero_threshold: Option<f64>,
}

impl ScreeningArgs {
    fn apply(&self, cfg: &mut ScreeningConfig) {
        if let Some(a) = self.a {
            cfg.a = a;
        }
        if let Some(b) = self.b {
            cfg.b = b;
        }
        if let Some(l) = self.steps {
            cfg.steps = l;
        }
        if let Some(t) = self.zero_threshold {
            cfg.zero_threshold = t;
        }
    }
}

#[derive(Args)]
struct ScreenArgs {
    #[arg(long)]
    csv: PathBuf,
    #[arg(long, default_value = "0")]
    label: LabelColumn,
    #[command(flatten)]
    screening: ScreeningArgs,
}

fn build_config(mode: Mode, args: RunArgs) -> Result<ExperimentConfig, Box<dyn std::error::Error>> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_json_file(path)?,
        None => ExperimentConfig::default(),
    };
    cfg.mode = mode;
    if mode != Mode::Simulate && args.config.is_none() {
        cfg.n_grid = None;
    }
    match (args.csv, args.dgp) {
        (Some(_), Some(_)) => return Err("--csv and --dgp are mutually exclusive".into()),
        (Some(path), None) => {
            cfg.source = Source::Csv {
                path,
                label: args.label.unwrap_or(LabelColumn::Index(0)),
            };
            cfg.scenario = Scenario::None;
        }
        (None, Some(d)) => {
            cfg.source = match d {
                DgpArg::One => Source::Dgp1,
                DgpArg::Two => Source::Dgp2,
            }
        }
        (None, None) => {
            if let (Some(label), Source::Csv { label: l, .. }) = (args.label, &mut cfg.source) {
                *l = label;
            }
        }
    }
    if let Some(s) = args.scenario {
        cfg.scenario = match s {
            ScenarioArg::S1 => Scenario::S1,
            ScenarioArg::S2 => Scenario::S2,
            ScenarioArg::None => Scenario::None,
        };
    }
    if let Some(ns) = args.n {
        match ns.as_slice() {
            [n] => {
                cfg.n = *n;
                cfg.n_grid = None;
            }
            _ => cfg.n_grid = Some(ns),
        }
    }
    macro_rules! set {
        ($($flag:ident => $field:ident),*) => {
            $(if let Some(v) = args.$flag { cfg.$field = v; })*
        };
    }
    set!(p => p, q => q, ntest => n_test, reps => replications, folds => folds,
         sn => candidates, train_fraction => train_fraction, seed => seed, methods => methods);
    if args.sn_grid.is_some() {
        cfg.sn_grid = args.sn_grid;
    }
    if args.g_grid.is_some() {
        cfg.g_grid = args.g_grid;
    }
    if args.rounds.is_some() {
        cfg.rounds = args.rounds;
    }
    if args.threads.is_some() {
        cfg.threads = args.threads;
    }
    cfg.shuffle_folds |= args.shuffle_folds;
    cfg.record_timing |= args.timing;
    args.screening.apply(&mut cfg.screening);
    cfg.validate()?;
    Ok(cfg)
}

fn run(mode: Mode, args: RunArgs) -> Result<(), Box<dyn std::error::Error>> {
    let out = args.out.clone();
    let cfg = build_config(mode, args)?;
    info!("running {} replications", cfg.replications);
    let rows = run_experiment(&cfg)?;
    let files = emit_report(&rows, &out)?;
    println!("method,mode,sweep_value,metric,mean,se,count");
    for s in aggregate(&rows) {
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        println!(
            "{},{},{},{},{},{},{}",
            s.method, s.mode, s.sweep_value, s.metric, fmt(s.mean), fmt(s.se), s.count
        );
    }
    let errors = rows.iter().filter(|r| r.status.starts_with("error")).count();
    if errors > 0 {
        eprintln!("{errors} rows failed; see the status column");
    }
    eprintln!("wrote {}", files.results.display());
    Ok(())
}

fn screen(args: ScreenArgs) -> Result<(), Box<dyn std::error::Error>> {
    let data = load_csv(&args.csv, &args.label)?;
    let mut cfg = ScreeningConfig::default();
    args.screening.apply(&mut cfg);
    let ordering = screen_features(&data, &cfg)?;
    for w in ordering.warnings() {
        eprintln!("warning: {w}");
    }
    let names = data.feature_names();
    for (rank, term) in ordering.order().iter().enumerate() {
        match term {
            Term::Intercept => println!("{rank}\tintercept"),
            Term::Feature(j) => match names {
                Some(n) => println!("{rank}\t{j}\t{}", n[*j]),
                None => println!("{rank}\t{j}"),
            },
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => run(Mode::Simulate, a),
        Command::Realdata(a) => run(Mode::Realdata, a),
        Command::LearningCurve(a) => run(Mode::LearningCurve, a),
        Command::Screen(a) => screen(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
