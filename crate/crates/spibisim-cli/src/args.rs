use std::path::PathBuf;

use clap::{Parser, Subcommand};

/// Message equivalence, observer theories and open bisimulation for the spi
/// calculus.
///
/// Exit codes: 0 when the property holds, 1 when it fails, 2 on usage,
/// parse or well-formedness errors.
#[derive(Debug, Parser)]
#[command(name = "spibisim", version)]
pub struct Args {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Prove `theory |- left <-> right` and print the derivation.
    Prove {
        #[arg(long)]
        theory: PathBuf,
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        /// Also write the derivation to this file.
        #[arg(long, value_name = "PATH")]
        emit_derivation: Option<PathBuf>,
    },
    /// Prove that a message set synthesises `goal`.
    Synth {
        #[arg(long)]
        msgs: PathBuf,
        #[arg(long)]
        goal: String,
    },
    /// Print the irreducible form of a theory.
    Normalize {
        #[arg(long)]
        theory: PathBuf,
    },
    /// Decide consistency of a theory.
    Consistent {
        #[arg(long)]
        theory: PathBuf,
        /// Cross-check against the brute-force oracle.
        #[arg(long)]
        oracle: bool,
        /// Message depth explored by the oracle.
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(0..=4))]
        depth: u32,
    },
    /// Compose two theories through their shared middle components.
    Compose {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
    },
    /// List the one-step transitions of a process.
    Step {
        #[arg(long)]
        process: PathBuf,
    },
    /// List the maximal symbolic traces of a process up to a length.
    Traces {
        #[arg(long)]
        process: PathBuf,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(0..=16))]
        depth: u32,
    },
    /// Check bi-trace consistency over the bounded respectful substitutions.
    CheckBitrace {
        #[arg(long)]
        bitrace: PathBuf,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(0..=3))]
        subst_depth: u32,
    },
    /// Check that a relation is an open bisimulation up to the given rules.
    CheckBisim {
        #[arg(long)]
        relation: PathBuf,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(0..=3))]
        subst_depth: u32,
        /// Comma-separated up-to rules among eq,w,c,s,i,f,r,p.
        #[arg(long, default_value = "")]
        up_to: String,
        /// Rule applications allowed when justifying one continuation.
        #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..=64))]
        budget: u32,
    },
    /// Search for an observer that tells two pure processes apart.
    Distinguish {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(0..=4))]
        depth: u32,
    },
}
