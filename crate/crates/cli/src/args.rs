use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use robogym::EngineId;

#[derive(Debug, Parser)]
#[command(name = "robogym", version, about = "Reproducible robot RL environments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a rollout and print an episode summary.
    Run(RunArgs),
    /// Run the same seeded rollout several times and compare the dumps.
    VerifyDeterminism(VerifyArgs),
    /// Measure throughput at unbounded speed; prints one JSON report.
    Benchmark(BenchmarkArgs),
    /// Re-run the actions of a dump and check every record bit for bit.
    Replay(ReplayArgs),
    /// Parse and validate a model file.
    Parse(ParseArgs),
}

/// Where actions come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolicySpec {
    Zero,
    /// Seeded from the `policy` child of the master seed.
    Random,
    /// JSON-Lines file, one action array per line.
    Script(PathBuf),
}

impl FromStr for PolicySpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "zero" => Ok(PolicySpec::Zero),
            "random" => Ok(PolicySpec::Random),
            _ => match s.strip_prefix("script:") {
                Some(path) if !path.is_empty() => Ok(PolicySpec::Script(path.into())),
                _ => Err(format!(
                    "invalid policy {s:?} (expected zero, random or script:PATH)"
                )),
            },
        }
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicySpec::Zero => f.write_str("zero"),
            PolicySpec::Random => f.write_str("random"),
            PolicySpec::Script(p) => write!(f, "script:{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct EnvArgs {
    /// Registered environment id.
    #[arg(long)]
    pub env: String,
    #[arg(long, default_value = "euler-si")]
    pub engine: EngineId,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Start every episode from the nominal state without noise.
    #[arg(long)]
    pub exact_init: bool,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub env: EnvArgs,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    /// Real-Time Factor; 0 runs as fast as possible.
    #[arg(long, default_value_t = 0.0)]
    pub rtf: f64,
    #[arg(long, default_value = "zero")]
    pub policy: PolicySpec,
    /// Write a JSON-Lines trajectory dump.
    #[arg(long)]
    pub dump: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub env: EnvArgs,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
}

#[derive(Debug, Clone, Args)]
pub struct BenchmarkArgs {
    #[command(flatten)]
    pub env: EnvArgs,
    #[arg(long, default_value_t = 10_000)]
    pub steps: usize,
    /// Step N instances together on a worker pool.
    #[arg(long)]
    pub parallel: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    pub dump: PathBuf,
    /// Must match the dump header when given.
    #[arg(long)]
    pub env: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub engine: Option<EngineId>,
}

#[derive(Debug, Clone, Args)]
pub struct ParseArgs {
    pub model: PathBuf,
    /// Echo the canonical serialization.
    #[arg(long)]
    pub print: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn policy_specs() {
        assert_eq!("zero".parse(), Ok(PolicySpec::Zero));
        assert_eq!("random".parse(), Ok(PolicySpec::Random));
        assert_eq!(
            "script:a/b.jsonl".parse(),
            Ok(PolicySpec::Script("a/b.jsonl".into()))
        );
        assert!("script:".parse::<PolicySpec>().is_err());
        assert!("greedy".parse::<PolicySpec>().is_err());
    }

    #[test]
    fn engine_flag() {
        let cli = Cli::try_parse_from([
            "robogym", "run", "--env", "cartpole-balance", "--engine", "rk4", "--seed", "42",
        ])
        .unwrap();
        match cli.command {
            Command::Run(a) => {
                assert_eq!(a.env.engine, EngineId::Rk4);
                assert_eq!(a.env.seed, 42);
                assert_eq!(a.policy, PolicySpec::Zero);
            }
            other => panic!("{other:?}"),
        }
        assert!(Cli::try_parse_from(["robogym", "run", "--env", "x", "--engine", "ode"]).is_err());
    }
}
