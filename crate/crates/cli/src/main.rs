//! Command-line front end: Monte-Carlo sweeps, single-drop traces, and
//! main-lobe cache precomputation.

use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use irs_track::codebook::MainLobeTable;
use irs_track::harness::{
    run_sweep_streaming, timestep_csv, DropRunner, Scheme, SimConfig, SnrDef, SweepOptions,
    SweepWriter,
};

#[derive(Parser)]
#[command(
    name = "irs-track",
    version,
    about = "Link-level simulator for codebook-based user tracking over a reflecting surface"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full Monte-Carlo sweep and write CSV results
    Run(RunArgs),
    /// Trace one drop per-timestep on stdout
    Single(SingleArgs),
    /// Precompute and persist the main-lobe table for the configured codebook
    CodebookCache(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// TOML configuration file; built-in defaults apply when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed override
    #[arg(long)]
    seed: Option<u64>,
}

impl CommonArgs {
    fn load(&self) -> anyhow::Result<SimConfig> {
        let mut cfg = match &self.config {
            Some(path) => SimConfig::from_path(path)
                .with_context(|| format!("loading config {}", path.display()))?,
            None => SimConfig::defaults(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
            cfg.file.seed = seed;
            cfg.mobility.seed = seed;
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Transmit power sweep in dBm, comma separated (overrides the config)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    ptx_dbm: Option<Vec<f64>>,
    /// Number of Monte-Carlo drops (overrides the config)
    #[arg(long)]
    drops: Option<usize>,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Scheme selection: proposed, fs, fullopt, or all
    #[arg(long, default_value = "all")]
    scheme: String,
    /// SNR definition used in reports: the noiseless signal power or the
    /// noisy received power
    #[arg(long, default_value = "noiseless")]
    snr_def: String,
}

#[derive(Args)]
struct SingleArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Transmit power in dBm
    #[arg(long, default_value_t = 30.0, allow_hyphen_values = true)]
    ptx_dbm: f64,
    /// Scheme to trace
    #[arg(long, default_value = "proposed")]
    scheme: String,
    /// Cap on simulated transmission blocks
    #[arg(long)]
    max_blocks: Option<usize>,
    /// SNR definition for the trace
    #[arg(long, default_value = "noiseless")]
    snr_def: String,
}

fn parse_schemes(s: &str) -> anyhow::Result<Vec<Scheme>> {
    if s == "all" {
        return Ok(Scheme::ALL.to_vec());
    }
    Ok(vec![s.parse()?])
}

/// Loads or builds the main-lobe table when the tracking scheme needs it.
fn table_for(
    cfg: &SimConfig,
    schemes: &[Scheme],
) -> anyhow::Result<Option<(MainLobeTable<f64>, bool)>> {
    if !schemes.contains(&Scheme::Proposed) {
        return Ok(None);
    }
    let psi_in = cfg.psi_bs_at_irs()?;
    let pair = MainLobeTable::load_or_build(&cfg.codebook, psi_in, &cfg.cache_dir)?;
    Ok(Some(pair))
}

fn cmd_run(args: RunArgs) -> anyhow::Result<()> {
    let mut cfg = args.common.load()?;
    if let Some(ptx) = args.ptx_dbm {
        if ptx.is_empty() {
            bail!("--ptx-dbm needs at least one value");
        }
        cfg.ptx_dbm = ptx.clone();
        cfg.file.ptx_dbm = ptx;
    }
    if let Some(drops) = args.drops {
        cfg.drops = drops;
        cfg.file.drops = drops;
    }
    let schemes = parse_schemes(&args.scheme)?;
    let snr_def: SnrDef = args.snr_def.parse()?;

    let table = table_for(&cfg, &schemes)?;
    let (table_ref, cache_key) = match &table {
        Some((t, cached)) => {
            eprintln!(
                "main-lobe table {} ({})",
                t.key(),
                if *cached { "cached" } else { "built" }
            );
            (Some(t), Some(t.key().to_string()))
        }
        None => (None, None),
    };

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let model = cfg.overhead_model()?;
    let mut writer = SweepWriter::create(&args.out, &schemes, snr_def, &model)?;
    let opts = SweepOptions {
        schemes,
        record_timesteps: true,
        max_blocks: None,
    };
    let result = run_sweep_streaming(&cfg, table_ref, &opts, |out| writer.write_drop(&out))?;
    let paths = writer.finalize(&result, &cfg, cache_key)?;

    for s in result.summaries(snr_def) {
        println!(
            "{:>8}  {:>7.1} dBm  gamma {:.5}  rate {:.4} +- {:.4} bit/s/Hz  ({} drops)",
            s.scheme.as_str(),
            s.ptx_dbm,
            s.gamma_overhead,
            s.mean_eff_rate,
            s.ci95,
            s.drops
        );
    }
    for p in paths {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn cmd_single(args: SingleArgs) -> anyhow::Result<()> {
    let cfg = args.common.load()?;
    let scheme: Scheme = args.scheme.parse()?;
    let snr_def: SnrDef = args.snr_def.parse()?;
    let table = table_for(&cfg, &[scheme])?;

    let runner = DropRunner::new(&cfg, table.as_ref().map(|(t, _)| t), 0, args.max_blocks)?;
    let (records, summaries) = match scheme {
        Scheme::Proposed => {
            let (r, s) = runner.tracking(args.ptx_dbm, true)?;
            (r, vec![s])
        }
        Scheme::Fs => {
            let (r, s) = runner.baseline_fs(args.ptx_dbm, true)?;
            (r, vec![s])
        }
        Scheme::FullOpt => runner.baseline_fullopt(&[args.ptx_dbm], true)?,
    };

    let model = cfg.overhead_model()?;
    print!("{}", timestep_csv(&records, &model, snr_def));
    for s in &summaries {
        println!(
            "# {} at {} dBm: gamma {:.6}, eff rate {:.6} bit/s/Hz over {} samples, {} blocks, {} lost",
            s.scheme.as_str(),
            s.ptx_dbm,
            s.gamma_overhead,
            s.eff_rate(snr_def),
            s.samples,
            s.blocks,
            s.lost_blocks
        );
    }
    println!("# seed {}", cfg.seed);
    Ok(())
}

fn cmd_cache(args: CommonArgs) -> anyhow::Result<()> {
    let cfg = args.load()?;
    let psi_in = cfg.psi_bs_at_irs()?;
    let path = MainLobeTable::cache_path(&cfg.codebook, psi_in, &cfg.cache_dir);
    let (table, cached) = MainLobeTable::load_or_build(&cfg.codebook, psi_in, &cfg.cache_dir)?;
    println!(
        "main-lobe table for {}x{} codebook, key {}: {}",
        cfg.codebook.m_y,
        cfg.codebook.m_z,
        table.key(),
        if cached { "already cached" } else { "built" }
    );
    println!("{}", path.display());
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Single(args) => cmd_single(args),
        Command::CodebookCache(args) => cmd_cache(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
