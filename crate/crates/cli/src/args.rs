use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use menon_core::Budget;

#[derive(Debug, Parser)]
#[command(
    name = "menon",
    version,
    about = "Exhaustive checks of the generalized Menon identity"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep G(n, r) and compare both sides of the identity for each n.
    Verify {
        #[command(flatten)]
        run: RunArgs,
        /// Record wall time in `elapsed_s` (otherwise 0.0, keeping output reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Burnside count, union-find orbits, divisor chains and tau_r for each n.
    Burnside {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Print tau_r(n), checking the recursive, closed-form and r = 2 formulas.
    Tau {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Count (or list) divisor chains of length r for each n.
    Chains {
        #[command(flatten)]
        run: RunArgs,
        /// Emit every chain instead of per-n counts.
        #[arg(long)]
        list: bool,
    },
    /// Time the left-hand sweep for each n.
    Bench {
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Inclusive modulus range `a..b`, or a single value.
    #[arg(long = "n", value_name = "a..b")]
    pub range: NRange,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub r: u32,
    /// Maximum estimated elementary operations per enumerating call.
    #[arg(long, default_value_t = Budget::DEFAULT_OPS, value_parser = parse_budget)]
    pub budget: u128,
    #[arg(long, default_value_t = 1, value_parser = parse_shards)]
    pub shards: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write records here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RunArgs {
    pub fn budget(&self) -> Budget {
        Budget::new(self.budget)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Inclusive range of moduli.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NRange {
    pub min: u64,
    pub max: u64,
}

impl NRange {
    pub fn iter(&self) -> impl Iterator<Item = u64> {
        self.min..=self.max
    }
}

impl fmt::Display for NRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.min, self.max)
    }
}

impl FromStr for NRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |t: &str| {
            t.trim()
                .parse::<u64>()
                .map_err(|e| format!("invalid modulus {t:?}: {e}"))
        };
        let (min, max) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b)?),
            None => {
                let v = parse(s)?;
                (v, v)
            }
        };
        if min == 0 {
            return Err("moduli start at 1".into());
        }
        if min > max {
            return Err(format!("empty range {min}..{max}"));
        }
        Ok(NRange { min, max })
    }
}

fn parse_budget(s: &str) -> Result<u128, String> {
    match s.parse::<u128>() {
        Ok(0) => Err("budget must be at least 1".into()),
        Ok(b) => Ok(b),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_shards(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("shard count must be at least 1".into()),
        Ok(k) => Ok(k),
        Err(e) => Err(e.to_string()),
    }
}
