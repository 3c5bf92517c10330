use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cpht::bench::{self, BenchSpec, Record, Scheme};
use cpht::core::slot::SlotWidth;
use cpht::error::{Error, Result};
use cpht::trace;

#[derive(Parser)]
#[command(name = "cpht", version, about = "Compact parallel hash table benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Insert unique keys up to each target fill.
    Put(Common),
    /// Fill, then look up a mix of present and absent keys.
    Find(Common),
    /// Find-or-put from a starting fill to each after-fill.
    Fop(Common),
    /// Replay a key trace file.
    Trace {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trace: PathBuf,
    },
    /// Write a synthetic trace file.
    GenTrace {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        distinct: usize,
        #[arg(long)]
        total: usize,
        #[arg(long, default_value_t = 30)]
        key_bits: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, value_enum, default_value = "iceberg")]
    scheme: Scheme,
    /// Slots per bucket (primary bucket for iceberg).
    #[arg(long, default_value_t = 32)]
    bucket_slots: usize,
    /// Address bits; defaults to 2^20 slots.
    #[arg(long)]
    addr_bits: Option<u32>,
    /// Slot width in bits (primary level for iceberg).
    #[arg(long)]
    slot_width: Option<u32>,
    #[arg(long)]
    secondary_addr_bits: Option<u32>,
    #[arg(long, default_value_t = 32)]
    secondary_slot_width: u32,
    #[arg(long, default_value_t = 30)]
    key_bits: u32,
    /// Target fill; repeat for several. For fop these are after-fills.
    #[arg(long = "fill", alias = "after")]
    fills: Vec<f64>,
    /// Starting fill for fop.
    #[arg(long, default_value_t = 0.0)]
    before: f64,
    /// Present-key ratio for find, prefix fraction for trace; repeatable.
    #[arg(long = "ratio")]
    ratios: Vec<f64>,
    #[arg(long, default_value_t = 2)]
    passes: usize,
    #[arg(long, default_value_t = 3)]
    hashes: u32,
    #[arg(long)]
    max_chain: Option<usize>,
    #[arg(long, default_value_t = std::thread::available_parallelism().map_or(1, |n| n.get()))]
    parallelism: usize,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Audit every table after its run.
    #[arg(long)]
    verify: bool,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
}

impl Common {
    fn spec(&self) -> Result<BenchSpec> {
        let mut s = BenchSpec::new(self.scheme, self.bucket_slots);
        if let Some(a) = self.addr_bits {
            s.addr_bits = a;
        }
        if let Some(w) = self.slot_width {
            s.slot_width = SlotWidth::from_bits(w)?;
        }
        s.secondary_addr_bits = self.secondary_addr_bits;
        s.secondary_slot_width = SlotWidth::from_bits(self.secondary_slot_width)?;
        s.key_bits = self.key_bits;
        if !self.fills.is_empty() {
            s.fills = self.fills.clone();
        }
        s.before = self.before;
        if !self.ratios.is_empty() {
            s.ratios = self.ratios.clone();
        }
        s.passes = self.passes.max(1);
        s.hashes = self.hashes;
        s.max_chain = self.max_chain;
        s.parallelism = self.parallelism.max(1);
        s.trials = self.trials;
        s.seed = self.seed;
        s.verify = self.verify;
        Ok(s)
    }
}

fn emit(common: &Common, records: Vec<Record>) -> Result<()> {
    let mut bad = 0;
    let mut rows = Vec::with_capacity(records.len());
    for r in records {
        for p in &r.problems {
            eprintln!("trial {} seed {}: {p}", r.row.trial, r.row.seed);
        }
        bad += usize::from(!r.is_ok());
        if r.counts.full > 0 {
            eprintln!(
                "skipping row: {} FULL results at fill {:.3} (trial {}, seed {})",
                r.counts.full, r.row.fill_after, r.row.trial, r.row.seed
            );
            continue;
        }
        rows.push(r.row);
    }
    match &common.csv {
        Some(path) => bench::write_csv(BufWriter::new(File::create(path)?), rows)?,
        None => bench::write_csv(io::stdout().lock(), rows)?,
    }
    if bad > 0 {
        return Err(Error::Verification(format!("{bad} runs failed their checks")));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Put(c) => emit(&c, bench::bench_put(&c.spec()?)?),
        Command::Find(c) => emit(&c, bench::bench_find(&c.spec()?)?),
        Command::Fop(c) => {
            let mut spec = c.spec()?;
            if c.fills.is_empty() {
                spec.fills = vec![spec.before.max(0.5)];
            }
            emit(&c, bench::bench_fop(&spec)?)
        }
        Command::Trace { common, trace: path } => {
            let t = trace::read_trace_file(&path)?;
            let spec = common.spec()?;
            if t.key_bits > spec.key_bits {
                return Err(Error::Config(format!(
                    "trace uses {}-bit keys, table is configured for {}",
                    t.key_bits, spec.key_bits
                )));
            }
            emit(&common, bench::bench_trace(&spec, &t)?)
        }
        Command::GenTrace { out, distinct, total, key_bits, seed } => {
            let t = trace::synthetic(distinct, total, key_bits, seed)?;
            trace::write_trace_file(&out, &t)?;
            writeln!(io::stderr(), "wrote {} keys ({distinct} distinct) to {}", t.keys.len(), out.display())?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
