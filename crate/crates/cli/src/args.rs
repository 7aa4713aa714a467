use std::ops::RangeInclusive;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "narygw", version, about = "Complete N-ary subtrees of Galton-Watson trees")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads (0 = all cores); NARYGW_THREADS takes precedence.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct LawArgs {
    /// geometric, fractional-linear, poisson, one-or-many, generic, or a
    /// JSON law such as '{"family":"poisson","m":13}'.
    #[arg(long)]
    pub law: String,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    /// Mean, for poisson and geometric.
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long)]
    pub r: Option<u32>,
    /// Offspring probabilities p_0,p_1,... for a generic law.
    #[arg(long, value_delimiter = ',')]
    pub coeffs: Vec<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// tau_N by fixed-point iteration, checked against the family equation.
    Tau {
        #[command(flatten)]
        law: LawArgs,
        /// Arity or inclusive range such as 2..5.
        #[arg(long = "N", value_parser = parse_arities, default_value = "2")]
        arities: RangeInclusive<usize>,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Emit tau_{N,n} for every iteration instead of the summary.
        #[arg(long)]
        trajectory: bool,
    },
    /// Reproduce reference table 1, 2 or 3.
    Tables {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
        which: u8,
    },
    /// Law of V_N.
    Pmf {
        #[command(flatten)]
        law: LawArgs,
        #[arg(long = "N", value_parser = parse_arities, default_value = "2")]
        arities: RangeInclusive<usize>,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Use the family's closed form instead of the band sums.
        #[arg(long)]
        closed_form: bool,
    },
    /// Critical offspring mean m^c_N for geometric, poisson or one-or-many.
    Critical {
        #[command(flatten)]
        law: LawArgs,
        #[arg(long = "N", value_parser = parse_arities, default_value = "2..5")]
        arities: RangeInclusive<usize>,
    },
    /// Joint law of (V_{N,n}, nu_n) up to total progeny T.
    Joint {
        #[command(flatten)]
        law: LawArgs,
        #[arg(long = "N")]
        arity: usize,
        #[arg(long = "n")]
        height: usize,
        #[arg(long = "T", default_value_t = 64)]
        degree: usize,
        #[arg(long)]
        jmax: Option<usize>,
    },
    /// Monte Carlo estimate of the law of V_{N,n}.
    Simulate {
        #[command(flatten)]
        law: LawArgs,
        #[arg(long = "N")]
        arity: usize,
        #[arg(long = "n")]
        height: usize,
        #[arg(long, value_parser = parse_count, default_value = "100000")]
        reps: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Node budget per replicate.
        #[arg(long, value_parser = parse_count, default_value = "1e7")]
        budget: u64,
        /// Generate whole trees and report the mean of nu_n.
        #[arg(long)]
        progeny: bool,
    },
}

/// `3`, `2..5` or `2..=5`; both range forms include the upper end.
pub fn parse_arities(s: &str) -> Result<RangeInclusive<usize>, String> {
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b.strip_prefix('=').unwrap_or(b))?),
        None => {
            let n = parse(s)?;
            (n, n)
        }
    };
    if lo == 0 || lo > hi {
        return Err(format!("{s:?} is not a range of positive arities"));
    }
    Ok(lo..=hi)
}

/// Non-negative integer, also written like `1e6`.
pub fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    let x: f64 = s.parse().map_err(|_| format!("{s:?} is not a count"))?;
    if x < 0.0 || x.fract() != 0.0 || x > u64::MAX as f64 {
        return Err(format!("{s:?} is not a whole number"));
    }
    Ok(x as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arities() {
        assert_eq!(parse_arities("3").unwrap(), 3..=3);
        assert_eq!(parse_arities("2..5").unwrap(), 2..=5);
        assert_eq!(parse_arities("2..=5").unwrap(), 2..=5);
        assert!(parse_arities("0..2").is_err());
        assert!(parse_arities("5..2").is_err());
    }

    #[test]
    fn counts() {
        assert_eq!(parse_count("1e6").unwrap(), 1_000_000);
        assert_eq!(parse_count("250").unwrap(), 250);
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
    }

    #[test]
    fn command_shape() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
