//! Command-line front end: `info`, `eval`, `infer` and `stats` over model
//! files in the text format.
//!
//! Exit codes: 0 on success, 1 on a usage error, 2 when the model, labeling
//! or algorithm is rejected.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use factorgm::io::{self, format_real, format_values};
use factorgm::oracle::DEFAULT_STATE_CAP;
use factorgm::{
    Algorithm, AlphaBetaSwap, AlphaExpansion, BeliefPropagation, BpParameters, Gibbs,
    GibbsParameters, GraphicalModel, Icm, Inference, InferenceState, LazyFlipper, MoveParameters,
    NonSubmodular, Oracle, SearchParameters, SilentVisitor, Value, VerboseVisitor, Visitor,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_MODEL: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "factorgm",
    version,
    about = "Inspect, evaluate and run inference on discrete graphical models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print sizes, semiring, maximum arity and the encoding breakdown.
    Info { model: PathBuf },
    /// Evaluate the model at one labeling.
    Eval {
        model: PathBuf,
        /// Comma-separated labels, one per variable.
        #[arg(long, allow_hyphen_values = true)]
        labels: String,
    },
    /// Run an inference algorithm.
    Infer(InferArgs),
    /// Print storage statistics, including the cost without sharing.
    Stats { model: PathBuf },
}

#[derive(Debug, Args)]
pub struct InferArgs {
    pub model: PathBuf,
    /// oracle, bp, icm, lazyflipper, gibbs, alphaexp or abswap.
    #[arg(long)]
    pub algorithm: Algorithm,
    /// Write the labeling here (one label per line) instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Write per-variable marginals or beliefs here (oracle, bp, gibbs).
    #[arg(long)]
    pub marginals: Option<PathBuf>,
    /// Print visitor progress to stderr.
    #[arg(long)]
    pub verbose: bool,
    /// Run on the SumProd model with potentials exp(-energy).
    #[arg(long)]
    pub boltzmann: bool,
    /// Largest number of labelings the oracle enumerates.
    #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
    pub state_cap: u128,

    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-7)]
    pub bound: f64,
    #[arg(long, default_value_t = 0.0)]
    pub damping: f64,

    /// Starting labeling: `zeros` or a file with one label per line.
    #[arg(long)]
    pub init: Option<String>,
    #[arg(long, default_value_t = 2)]
    pub max_subgraph_size: usize,
    /// Run ICM before the Lazy Flipper.
    #[arg(long)]
    pub pre_icm: bool,
    /// Passes (icm), rounds per subgraph size (lazyflipper) or cycles over
    /// labels (alphaexp, abswap).
    #[arg(long)]
    pub max_rounds: Option<usize>,
    /// Policy for non-submodular move terms: error or truncate.
    #[arg(long, default_value = "error")]
    pub nonsubmodular: NonSubmodular,

    #[arg(long, default_value_t = 100_000)]
    pub steps: usize,
    #[arg(long, default_value_t = 10_000)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(rendered.as_bytes())
            } else {
                out.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {}", render_error(&e));
            EXIT_MODEL
        }
    }
}

/// The error and its causes, skipping causes its message already states.
fn render_error(e: &anyhow::Error) -> String {
    let mut text = e.to_string();
    for cause in e.chain().skip(1) {
        let cause = cause.to_string();
        if !text.contains(&cause) {
            text = format!("{text}: {cause}");
        }
    }
    text
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<()> {
    match command {
        Command::Info { model } => out.write_all(info(&load(&model)?).as_bytes())?,
        Command::Eval { model, labels } => {
            let m = load(&model)?;
            let x = parse_labels(&labels)?;
            writeln!(out, "{}", format_real(m.evaluate(&x)?))?;
        }
        Command::Stats { model } => out.write_all(stats(&load(&model)?).as_bytes())?,
        Command::Infer(args) => infer(&args, out, err)?,
    }
    Ok(())
}

fn load(path: &Path) -> anyhow::Result<GraphicalModel> {
    Ok(io::load(path)?.model)
}

/// Parses `0,1,2`; the empty string is the empty labeling.
pub fn parse_labels(text: &str) -> anyhow::Result<Vec<usize>> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .with_context(|| format!("invalid label `{}`", t.trim()))
        })
        .collect()
}

pub fn info(m: &GraphicalModel) -> String {
    let mut kinds: BTreeMap<&str, usize> = ["explicit", "potts", "sparse", "truncated-abs-diff"]
        .into_iter()
        .map(|k| (k, 0))
        .collect();
    for f in m.functions() {
        *kinds.entry(f.kind()).or_default() += 1;
    }
    let breakdown: Vec<String> = kinds.iter().map(|(k, n)| format!("{k}={n}")).collect();
    format!(
        "variables={} factors={} functions={}\nsemiring={} max_arity={}\nencodings {}\n",
        m.num_variables(),
        m.num_factors(),
        m.num_functions(),
        m.semiring(),
        m.max_arity(),
        breakdown.join(" ")
    )
}

pub fn stats(m: &GraphicalModel) -> String {
    let s = m.storage_stats();
    let mut text = format!(
        "variables={} factors={} functions={}\nstored_values={} dense_equivalent={} sharing_ratio={}\n",
        s.num_variables,
        s.num_factors,
        s.num_functions,
        s.num_stored_values,
        s.dense_equivalent_values,
        format_real(s.sharing_ratio())
    );
    for (i, (f, used)) in m.functions().iter().zip(m.function_usage()).enumerate() {
        text += &format!(
            "function {i} kind={} factors={used} stored={} dense_equivalent={}\n",
            f.kind(),
            f.stored_values(),
            used * f.table_size()
        );
    }
    text
}

/// Result of `infer`: the run summary plus optional marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct InferOutcome {
    pub state: InferenceState,
    pub marginals: Option<Vec<Vec<Value>>>,
}

impl InferOutcome {
    pub fn summary(&self) -> String {
        format!(
            "value={} bound={} termination={} steps={}",
            format_real(self.state.value),
            self.state
                .bound
                .map_or_else(|| "na".to_string(), format_real),
            self.state.termination,
            self.state.step_count
        )
    }
}

fn initial_labeling(args: &InferArgs) -> anyhow::Result<Option<Vec<usize>>> {
    match args.init.as_deref() {
        None | Some("zeros") => Ok(None),
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read initial labeling {path}"))?;
            Ok(Some(io::read_labeling(text.as_bytes())?))
        }
    }
}

/// Runs the configured algorithm on `model`, reporting progress to
/// `visitor`.
pub fn run_algorithm(
    model: &GraphicalModel,
    args: &InferArgs,
    visitor: &mut dyn Visitor,
) -> anyhow::Result<InferOutcome> {
    let initial = initial_labeling(args)?;
    let search = || SearchParameters {
        initial: initial.clone(),
        max_subgraph_size: args.max_subgraph_size,
        max_rounds: args
            .max_rounds
            .unwrap_or(SearchParameters::default().max_rounds),
        pre_icm: args.pre_icm,
    };
    let moves = || MoveParameters {
        initial: initial.clone(),
        max_rounds: args
            .max_rounds
            .unwrap_or(MoveParameters::default().max_rounds),
        on_nonsubmodular: args.nonsubmodular,
    };
    let mut marginals = None;
    let state = match args.algorithm {
        Algorithm::Oracle => {
            let mut oracle = Oracle::new(model)
                .with_state_cap(args.state_cap)
                .with_marginals(args.marginals.is_some());
            let state = oracle.infer_with(visitor)?;
            if args.marginals.is_some() {
                marginals = oracle.solve()?.marginals;
            }
            state
        }
        Algorithm::BeliefPropagation => {
            let params = BpParameters::new(args.max_iter, args.bound, args.damping);
            let mut bp = BeliefPropagation::new(model, params)?;
            let state = bp.infer_with(visitor)?;
            marginals = Some(bp.beliefs());
            state
        }
        Algorithm::Icm => Icm::new(model, search())?.infer_with(visitor)?,
        Algorithm::LazyFlipper => LazyFlipper::new(model, search())?.infer_with(visitor)?,
        Algorithm::Gibbs => {
            let mut params = GibbsParameters::new(args.steps, args.burn_in, args.seed);
            params.initial = initial.clone();
            let mut gibbs = Gibbs::new(model, params)?;
            let state = gibbs.infer_with(visitor)?;
            marginals = gibbs.marginals().map(<[_]>::to_vec);
            state
        }
        Algorithm::AlphaExpansion => AlphaExpansion::new(model, moves())?.infer_with(visitor)?,
        Algorithm::AlphaBetaSwap => AlphaBetaSwap::new(model, moves())?.infer_with(visitor)?,
    };
    Ok(InferOutcome { state, marginals })
}

fn infer(args: &InferArgs, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<()> {
    let mut model = load(&args.model)?;
    if args.boltzmann {
        model = model.boltzmann()?;
    }
    if args.marginals.is_some()
        && !matches!(
            args.algorithm,
            Algorithm::Oracle | Algorithm::BeliefPropagation | Algorithm::Gibbs
        )
    {
        bail!(
            "--marginals is available for oracle, bp and gibbs, not {}",
            args.algorithm
        );
    }
    let outcome = if args.verbose {
        let mut verbose = VerboseVisitor::new(&mut *err);
        run_algorithm(&model, args, &mut verbose)?
    } else {
        run_algorithm(&model, args, &mut SilentVisitor)?
    };

    writeln!(out, "{}", outcome.summary())?;
    if let Some(x) = &outcome.state.arg {
        match &args.output {
            Some(path) => {
                let mut text = Vec::new();
                io::write_labeling(&mut text, x)?;
                fs::write(path, text)
                    .with_context(|| format!("cannot write {}", path.display()))?;
            }
            None => io::write_labeling(out, x)?,
        }
    }
    if let (Some(path), Some(marginals)) = (&args.marginals, &outcome.marginals) {
        let text: String = marginals.iter().map(|m| format_values(m) + "\n").collect();
        fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}
