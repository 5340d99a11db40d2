//! `epsmsr`: encode files into repairable shards and simulate failures.
//!
//! A directory holds one archive: `codec.json` (the code descriptor) plus
//! `node_<i>.shard` files. `fail` renames shards aside so `repair`,
//! `decode`, and `verify` can be exercised against real losses.

use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand};

mod commands;
mod metadata;
mod packing;
mod parallel;
mod shard;

#[derive(Parser)]
#[command(name = "epsmsr", version, about = "erasure-coded storage repair simulator")]
struct Cli {
    /// Archive directory (holds codec.json and shards).
    #[arg(long, global = true, default_value = ".")]
    dir: PathBuf,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Pick code parameters, validate them, and write codec.json.
    GenParams {
        /// base | eps-msr | multi
        #[arg(long)]
        construction: String,
        /// Total nodes n.
        #[arg(long)]
        nodes: usize,
        /// Data nodes k (any k suffice to decode).
        #[arg(long)]
        data: usize,
        /// Helpers d contacted per single repair (base, eps-msr).
        #[arg(long)]
        repair_degree: Option<usize>,
        /// Alphabet size t of the node-labelling outer code.
        #[arg(long)]
        symbols: Option<usize>,
        /// Outer-code length lambda (chunks per node).
        #[arg(long)]
        lambda: Option<usize>,
        /// Outer-code relative distance, e.g. 1/2 (trades field size
        /// against repair bandwidth).
        #[arg(long, default_value = "1")]
        delta: String,
    },
    /// Split a file into n shards.
    Encode {
        /// Input file.
        input: PathBuf,
    },
    /// Reassemble the file from any k or more shards.
    Decode {
        /// Output file.
        output: PathBuf,
    },
    /// Simulate node loss: rename shards to `.shard.lost`.
    Fail {
        /// Node indices, comma separated.
        #[arg(value_delimiter = ',')]
        nodes: Vec<usize>,
    },
    /// Rebuild one node from d helpers, downloading partial shards.
    Repair {
        /// Failed node index.
        #[arg(long)]
        node: usize,
        /// Helper node indices, comma separated.
        #[arg(long, value_delimiter = ',')]
        helpers: Vec<usize>,
        /// Where to write the repair transcript (default: DIR/transcript.json).
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Rebuild several nodes at once (multi construction).
    RepairMulti {
        /// Failed node indices, comma separated.
        #[arg(long, value_delimiter = ',')]
        nodes: Vec<usize>,
        /// Helper node indices, comma separated.
        #[arg(long, value_delimiter = ',')]
        helpers: Vec<usize>,
        /// Where to write the repair transcript (default: DIR/transcript.json).
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Check shard headers and parity; localize single-shard corruption.
    Verify {
        /// Also decode every r-subset erasure pattern (small codes only).
        #[arg(long)]
        mds_exhaustive: bool,
    },
    /// Sweep repair scenarios and emit a CSV of download costs.
    Bench {
        /// Output CSV path (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::GenParams {
            construction,
            nodes,
            data,
            repair_degree,
            symbols,
            lambda,
            delta,
        } => commands::cmd_gen_params(
            &cli.dir,
            &commands::GenParams {
                construction,
                n: nodes,
                k: data,
                d: repair_degree,
                t: symbols,
                lambda,
                delta,
            },
        ),
        Cmd::Encode { input } => commands::cmd_encode(&cli.dir, &input),
        Cmd::Decode { output } => commands::cmd_decode(&cli.dir, &output),
        Cmd::Fail { nodes } => commands::cmd_fail(&cli.dir, &nodes),
        Cmd::Repair {
            node,
            helpers,
            transcript,
        } => commands::cmd_repair(&cli.dir, &[node], &helpers, transcript.as_deref()),
        Cmd::RepairMulti {
            nodes,
            helpers,
            transcript,
        } => commands::cmd_repair(&cli.dir, &nodes, &helpers, transcript.as_deref()),
        Cmd::Verify { mds_exhaustive } => commands::cmd_verify(&cli.dir, mds_exhaustive),
        Cmd::Bench { out } => commands::cmd_bench(&cli.dir, out.as_deref()),
    }
}
