use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "bellmd", version, about = "Measurement dependence in Bell tests: thresholds, LP bounds, faking strategies")]
pub struct Cli {
    /// Write the JSON/CSV result here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Suppress the human-readable summary on stderr.
    #[arg(long, short, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Min-entropy and P_M thresholds for an inequality.
    Bounds(BoundsArgs),
    /// Largest Bell value of P_M-bounded local models over a grid of P_M.
    Maxbell(MaxbellArgs),
    /// Local model agreeing with a no-signaling behavior on a cross set.
    Fine(FineArgs),
    /// Monte Carlo run of a measurement-dependent strategy.
    Simulate(SimulateArgs),
    /// M′ distance of a model's p(λ|z) from measurement independence.
    Mprime(MprimeArgs),
    /// Print a catalog inequality as JSON.
    Catalog(CatalogArgs),
    /// Build a faking strategy and print it as JSON.
    Strategy(StrategyArgs),
    /// Figures of merit and min-entropy of a strategy's source.
    Merit(MeritArgs),
    /// Recover a prior p(λ) from conditionals p(z|λ) and a target p_obs.
    SolvePrior(SolvePriorArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Rational,
    Double,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum InequalityKind {
    Chsh,
    Tilted,
    Chained,
    Mermin,
    File,
}

#[derive(Args, Debug, Clone)]
pub struct InequalityArgs {
    #[arg(long, value_enum)]
    pub inequality: Option<InequalityKind>,
    /// Settings per party of the chained inequality.
    #[arg(long)]
    pub m: Option<usize>,
    /// Tilt of the tilted CHSH expression (default 1).
    #[arg(long)]
    pub alpha: Option<String>,
    /// Number of parties of the Mermin expression (odd, ≥ 3).
    #[arg(long)]
    pub parties: Option<usize>,
    /// Functional JSON, for `--inequality file`.
    #[arg(long)]
    pub functional: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub inequality: InequalityArgs,
}

#[derive(Args, Debug)]
pub struct MaxbellArgs {
    #[command(flatten)]
    pub inequality: InequalityArgs,
    /// Comma-separated input distribution, or a JSON file holding one.
    #[arg(long = "p-obs")]
    pub p_obs: String,
    /// `start:stop:step`, both ends included.
    #[arg(long)]
    pub grid: String,
    #[arg(long, value_enum, default_value_t = Mode::Rational)]
    pub mode: Mode,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct FineArgs {
    #[arg(long)]
    pub behavior: PathBuf,
    /// Anchor setting tuple, e.g. `0,0`.
    #[arg(long)]
    pub anchor: String,
    /// Also test whether the mimic can extend to this extra setting tuple.
    #[arg(long)]
    pub extra: Option<String>,
    #[arg(long, value_enum, default_value_t = Mode::Rational)]
    pub mode: Mode,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    pub strategy: PathBuf,
    #[arg(long)]
    pub rounds: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Inequality to evaluate; defaults to the one embedded in the strategy
    /// file, then to CHSH for the 2×2 scenario.
    #[command(flatten)]
    pub inequality: InequalityArgs,
    /// Stream every round to this CSV file.
    #[arg(long)]
    pub records: Option<PathBuf>,
    /// Include the rounds in the JSON summary (at most 10^6).
    #[arg(long)]
    pub keep_records: bool,
    #[arg(long, value_enum, default_value_t = Mode::Rational)]
    pub mode: Mode,
}

#[derive(Args, Debug)]
pub struct MprimeArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Rational)]
    pub mode: Mode,
}

#[derive(Args, Debug)]
pub struct CatalogArgs {
    #[command(flatten)]
    pub inequality: InequalityArgs,
    #[arg(long, value_enum, default_value_t = Mode::Rational)]
    pub mode: Mode,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum StrategyKind {
    /// One λ per anchor, uniform on its cross set.
    Theorem1,
    /// Like theorem1, with outputs mimicking a given no-signaling behavior.
    Theorem1Mimic,
    /// One λ per used setting, hiding it.
    HideOne,
    /// Hiding strategy with every conditional at most `--p-max`.
    General,
    /// Four-point strategy reaching the tilted CHSH algebraic limit.
    Tilted,
}

#[derive(Args, Debug)]
pub struct StrategyArgs {
    #[arg(long, value_enum)]
    pub kind: StrategyKind,
    #[command(flatten)]
    pub inequality: InequalityArgs,
    #[arg(long = "p-max")]
    pub p_max: Option<String>,
    /// No-signaling behavior JSON for `theorem1-mimic`.
    #[arg(long)]
    pub behavior: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Mode::Rational)]
    pub mode: Mode,
}

#[derive(Args, Debug)]
pub struct MeritArgs {
    #[arg(long)]
    pub strategy: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Rational)]
    pub mode: Mode,
}

#[derive(Args, Debug)]
pub struct SolvePriorArgs {
    #[arg(long)]
    pub strategy: PathBuf,
    /// Target distribution (comma list or JSON file); defaults to the
    /// strategy's own induced distribution.
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long, value_enum, default_value_t = Mode::Rational)]
    pub mode: Mode,
}
