//! Monte-Carlo orchestration: per-drop simulation of the tracking scheme
//! and both baselines over a transmit-power sweep.
//!
//! Every drop derives independent named RNG streams from
//! `(master seed, drop index, stream id)`, and each scheme/power run
//! re-creates the same streams, so scatterer geometry, trajectories,
//! fading, and noise act as common random numbers across schemes and
//! powers. Drops are independent work units; results merge in drop-index
//! order, so output is identical regardless of thread count.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::baselines::{FullOptEvaluator, SweepEvaluator};
use crate::channel::{noise_sample, received_symbol, sample_drop, ChannelConfig, ChannelDrop};
use crate::codebook::{candidate_set, Codeword, MainLobeTable};
use crate::geometry::Direction;
use crate::harness::config::{dbm_to_watts, SimConfig};
use crate::harness::schedule::{effective_rate, fullopt_overhead};
use crate::mobility::{build_trajectory, Trajectory};
use crate::tracking::{
    build_hypothesis_grid, fit_trajectory, glrt_estimate_direction, predict_direction,
    select_codeword, EstimateHistory, IdeMeasurement,
};
use crate::{Error, Result};

/// Which scheme a record belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Proposed,
    Fs,
    FullOpt,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Proposed, Scheme::Fs, Scheme::FullOpt];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::Fs => "fs",
            Scheme::FullOpt => "fullopt",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proposed" => Ok(Scheme::Proposed),
            "fs" => Ok(Scheme::Fs),
            "fullopt" => Ok(Scheme::FullOpt),
            other => Err(Error::Config(format!(
                "unknown scheme '{other}' (expected proposed|fs|fullopt)"
            ))),
        }
    }
}

/// Which SNR definition lands in reports: signal power only, or the noisy
/// received power including the additive noise sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SnrDef {
    #[default]
    Noiseless,
    Noisy,
}

impl SnrDef {
    pub fn as_str(self) -> &'static str {
        match self {
            SnrDef::Noiseless => "noiseless",
            SnrDef::Noisy => "noisy",
        }
    }
}

impl std::str::FromStr for SnrDef {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "noiseless" => Ok(SnrDef::Noiseless),
            "noisy" => Ok(SnrDef::Noisy),
            other => Err(Error::Config(format!(
                "unknown SNR definition '{other}' (expected noiseless|noisy)"
            ))),
        }
    }
}

/// One data-frame sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimestepRecord {
    pub drop: usize,
    pub scheme: Scheme,
    /// Data-frame start time, seconds.
    pub t: f64,
    pub ptx_dbm: f64,
    /// Selected codeword; the full-CSI baseline has none.
    pub codeword: Option<Codeword>,
    pub true_dir: Direction<f64>,
    /// Extrapolated direction used for selection (tracking scheme only).
    pub pred_dir: Option<Direction<f64>>,
    /// Linear SNR with the noise term excluded from the numerator.
    pub snr_noiseless: f64,
    /// Linear SNR of the noisy received sample.
    pub snr_noisy: f64,
}

/// Per-(drop, scheme, power) summary.
#[derive(Debug, Clone, PartialEq)]
pub struct DropSummary {
    pub drop: usize,
    pub scheme: Scheme,
    pub ptx_dbm: f64,
    /// Signaling overhead fraction applied to this scheme's rate.
    pub gamma_overhead: f64,
    pub eff_rate_noiseless: f64,
    pub eff_rate_noisy: f64,
    pub samples: usize,
    pub blocks: usize,
    /// Blocks whose selected codeword was more than `γ` indices away from
    /// the codeword covering the true direction (tracking scheme only).
    pub lost_blocks: usize,
    pub entry_angle_deg: f64,
    pub exit_angle_deg: f64,
    pub duration_s: f64,
}

impl DropSummary {
    pub fn eff_rate(&self, def: SnrDef) -> f64 {
        match def {
            SnrDef::Noiseless => self.eff_rate_noiseless,
            SnrDef::Noisy => self.eff_rate_noisy,
        }
    }
}

/// Mean effective rate across drops for one (scheme, power) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub scheme: Scheme,
    pub ptx_dbm: f64,
    pub gamma_overhead: f64,
    pub mean_eff_rate: f64,
    /// Half-width of the 95% normal confidence interval over drops.
    pub ci95: f64,
    pub drops: usize,
}

/// Everything one drop produced.
#[derive(Debug, Clone, PartialEq)]
pub struct DropOutput {
    pub drop: usize,
    pub records: Vec<TimestepRecord>,
    pub summaries: Vec<DropSummary>,
}

/// Merged result of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub seed: u64,
    pub records: Vec<TimestepRecord>,
    pub drop_summaries: Vec<DropSummary>,
}

impl RunResult {
    /// Aggregates drop summaries into per-(scheme, power) means in the
    /// order they appear.
    pub fn summaries(&self, def: SnrDef) -> Vec<SweepSummary> {
        summarize(&self.drop_summaries, def)
    }
}

pub fn summarize(drop_summaries: &[DropSummary], def: SnrDef) -> Vec<SweepSummary> {
    let mut cells: Vec<(Scheme, f64)> = Vec::new();
    for ds in drop_summaries {
        if !cells
            .iter()
            .any(|&(s, p)| s == ds.scheme && p == ds.ptx_dbm)
        {
            cells.push((ds.scheme, ds.ptx_dbm));
        }
    }
    cells
        .into_iter()
        .map(|(scheme, ptx)| {
            let rates: Vec<f64> = drop_summaries
                .iter()
                .filter(|d| d.scheme == scheme && d.ptx_dbm == ptx)
                .map(|d| d.eff_rate(def))
                .collect();
            let gamma = drop_summaries
                .iter()
                .find(|d| d.scheme == scheme && d.ptx_dbm == ptx)
                .map(|d| d.gamma_overhead)
                .unwrap_or(0.0);
            let n = rates.len();
            let mean = rates.iter().sum::<f64>() / n as f64;
            let ci95 = if n > 1 {
                let var =
                    rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
                1.96 * (var / n as f64).sqrt()
            } else {
                0.0
            };
            SweepSummary {
                scheme,
                ptx_dbm: ptx,
                gamma_overhead: gamma,
                mean_eff_rate: mean,
                ci95,
                drops: n,
            }
        })
        .collect()
}

/// Sweep controls beyond the scenario configuration.
#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub schemes: Vec<Scheme>,
    /// Keep per-timestep records (summaries are always produced).
    pub record_timesteps: bool,
    /// Cap on simulated transmission blocks per drop (tests/trace runs).
    pub max_blocks: Option<usize>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            schemes: Scheme::ALL.to_vec(),
            record_timesteps: true,
            max_blocks: None,
        }
    }
}

const STREAM_SCATTER: u64 = 0;
const STREAM_TRAJECTORY: u64 = 1;
const STREAM_FADING: u64 = 2;
const STREAM_NOISE: u64 = 3;

/// Independent deterministic stream for `(master, drop, stream id)`.
fn stream_rng(master: u64, drop: u64, stream: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&master.to_le_bytes());
    seed[8..16].copy_from_slice(&drop.to_le_bytes());
    seed[16..24].copy_from_slice(&stream.to_le_bytes());
    seed[24..32].copy_from_slice(b"irstrack");
    ChaCha8Rng::from_seed(seed)
}

fn chebyshev(a: Codeword, b: Codeword) -> usize {
    a.m_y.abs_diff(b.m_y).max(a.m_z.abs_diff(b.m_z))
}

/// Simulates one Monte-Carlo drop: trajectory plus per-scheme runs.
pub struct DropRunner<'a> {
    cfg: &'a SimConfig,
    table: Option<&'a MainLobeTable<f64>>,
    pub trajectory: Trajectory<f64>,
    drop_index: usize,
    max_blocks: Option<usize>,
}

impl<'a> DropRunner<'a> {
    pub fn new(
        cfg: &'a SimConfig,
        table: Option<&'a MainLobeTable<f64>>,
        drop_index: usize,
        max_blocks: Option<usize>,
    ) -> Result<Self> {
        let mut traj_rng = stream_rng(cfg.seed, drop_index as u64, STREAM_TRAJECTORY);
        let trajectory = build_trajectory(&cfg.mobility, &mut traj_rng)?;
        Ok(Self {
            cfg,
            table,
            trajectory,
            drop_index,
            max_blocks,
        })
    }

    fn streams(&self, chan: &ChannelConfig<f64>) -> Result<(ChannelDrop<f64>, ChaCha8Rng, ChaCha8Rng)> {
        let d = self.drop_index as u64;
        let mut scatter = stream_rng(self.cfg.seed, d, STREAM_SCATTER);
        let fading = stream_rng(self.cfg.seed, d, STREAM_FADING);
        let noise = stream_rng(self.cfg.seed, d, STREAM_NOISE);
        let pos0 = self.trajectory.position_at(0.0)?;
        let drop = sample_drop(&self.cfg.scenario, chan, pos0, &mut scatter)?;
        Ok((drop, fading, noise))
    }

    fn blocks(&self) -> usize {
        let full = (self.trajectory.total_duration() / self.cfg.t_block).floor() as usize;
        self.max_blocks.map_or(full, |m| full.min(m))
    }

    fn base_summary(&self, scheme: Scheme, ptx_dbm: f64) -> DropSummary {
        DropSummary {
            drop: self.drop_index,
            scheme,
            ptx_dbm,
            gamma_overhead: 0.0,
            eff_rate_noiseless: 0.0,
            eff_rate_noisy: 0.0,
            samples: 0,
            blocks: 0,
            lost_blocks: 0,
            entry_angle_deg: self.trajectory.entry_angle.to_degrees(),
            exit_angle_deg: self.trajectory.exit_angle().to_degrees(),
            duration_s: self.trajectory.total_duration(),
        }
    }

    /// One data-frame sample: retargets the channel to the user position at
    /// `t_d`, then returns (true direction, noiseless SNR, noisy SNR).
    fn d_frame(
        &self,
        drop: &mut ChannelDrop<f64>,
        chan: &ChannelConfig<f64>,
        cw: Codeword,
        t_d: f64,
        noise_rng: &mut ChaCha8Rng,
    ) -> Result<(Direction<f64>, f64, f64)> {
        drop.retarget_user(&self.cfg.scenario, chan, self.trajectory.position_at(t_d)?)?;
        let true_dir = drop.irs_aods[0];
        let sig = drop
            .noiseless_composite(cw, &self.cfg.codebook)
            .scale(chan.p_tx.sqrt());
        let y = sig + noise_sample(chan.sigma2, noise_rng);
        Ok((
            true_dir,
            sig.norm_sqr() / chan.sigma2,
            y.norm_sqr() / chan.sigma2,
        ))
    }

    /// The tracking scheme: per block one IDE frame (candidate sweep +
    /// GLRT), a trajectory fit, then `eta` CE+D pairs with codeword
    /// reselection at every CE start.
    pub fn tracking(&self, ptx_dbm: f64, keep_records: bool) -> Result<(Vec<TimestepRecord>, DropSummary)> {
        let cfg = self.cfg;
        let table = self
            .table
            .ok_or_else(|| Error::Config("tracking needs a main-lobe table".into()))?;
        let chan = cfg.channel_config(ptx_dbm)?;
        let (mut drop, mut fading, mut noise) = self.streams(&chan)?;
        let psi_bs = drop.irs_aoas[0];
        let nominal = cfg.schedule_proposed()?;
        let pilot_symbol = Complex::new(chan.p_tx.sqrt(), 0.0);
        let pilot = vec![pilot_symbol; cfg.n_ide];

        let mut current = select_codeword(drop.irs_aods[0], table);
        let mut history = EstimateHistory::new(cfg.s_history);
        let mut records = Vec::new();
        let mut snr0 = Vec::new();
        let mut snr1 = Vec::new();
        let mut lost_blocks = 0usize;
        let n_blocks = self.blocks();

        for k in 0..n_blocks {
            let t0 = k as f64 * cfg.t_block;
            let cands = candidate_set(current, cfg.gamma, &cfg.codebook);
            let sched = cfg.schedule_for_candidates(cands.len())?;

            // Fading refreshes at CE starts only; the IDE frame rides on the
            // state left by the previous coherence block.
            let mut meas = Vec::with_capacity(cands.len());
            for (ci, &cw) in cands.iter().enumerate() {
                let t_m = t0 + (ci * cfg.n_ide) as f64 * cfg.t_symbol;
                drop.retarget_user(&cfg.scenario, &chan, self.trajectory.position_at(t_m)?)?;
                let samples = (0..cfg.n_ide)
                    .map(|_| {
                        received_symbol(
                            cw,
                            &drop,
                            &cfg.codebook,
                            pilot_symbol,
                            noise_sample(chan.sigma2, &mut noise),
                        )
                    })
                    .collect();
                meas.push(IdeMeasurement {
                    codeword: cw,
                    samples,
                    pilot: pilot.clone(),
                    timestamp: t_m,
                });
            }
            let grid = build_hypothesis_grid(current, cfg.gamma, cfg.h_per_axis, table)?;
            let estimate = glrt_estimate_direction(&meas, &grid, psi_bs, &cfg.codebook)?;
            history.push(t0, estimate)?;
            let poly = fit_trajectory(&history, cfg.poly_order)?;

            for i_ce in 0..sched.eta {
                let t_ce = sched.ce_start(t0, i_ce);
                let pred = predict_direction(&poly, t_ce);
                current = select_codeword(pred, table);
                drop.refresh_small_scale(&mut fading);
                let t_d = sched.d_start(t0, i_ce);
                let (true_dir, s0, s1) = self.d_frame(&mut drop, &chan, current, t_d, &mut noise)?;
                if i_ce == 0 && chebyshev(current, select_codeword(true_dir, table)) > cfg.gamma {
                    lost_blocks += 1;
                }
                snr0.push(s0);
                snr1.push(s1);
                if keep_records {
                    records.push(TimestepRecord {
                        drop: self.drop_index,
                        scheme: Scheme::Proposed,
                        t: t_d,
                        ptx_dbm,
                        codeword: Some(current),
                        true_dir,
                        pred_dir: Some(pred),
                        snr_noiseless: s0,
                        snr_noisy: s1,
                    });
                }
            }
        }

        let gamma_ov = nominal.overhead();
        let mut summary = self.base_summary(Scheme::Proposed, ptx_dbm);
        summary.gamma_overhead = gamma_ov;
        summary.eff_rate_noiseless = effective_rate(&snr0, gamma_ov);
        summary.eff_rate_noisy = effective_rate(&snr1, gamma_ov);
        summary.samples = snr0.len();
        summary.blocks = n_blocks;
        summary.lost_blocks = lost_blocks;
        Ok((records, summary))
    }

    /// Full-search baseline: every block sweeps the whole codebook with
    /// noisy pilots and keeps the argmax-power codeword for the block's
    /// data frames.
    pub fn baseline_fs(&self, ptx_dbm: f64, keep_records: bool) -> Result<(Vec<TimestepRecord>, DropSummary)> {
        let cfg = self.cfg;
        let chan = cfg.channel_config(ptx_dbm)?;
        let (mut drop, mut fading, mut noise) = self.streams(&chan)?;
        let sched = cfg.schedule_fs()?;
        let sqrt_p = chan.p_tx.sqrt();

        let mut records = Vec::new();
        let mut snr0 = Vec::new();
        let mut snr1 = Vec::new();
        let n_blocks = self.blocks();

        for k in 0..n_blocks {
            let t0 = k as f64 * cfg.t_block;
            // Geometry and fading are frozen over the sweep: the user moves
            // a few millimeters, and fading refreshes only at CE starts.
            drop.retarget_user(&cfg.scenario, &chan, self.trajectory.position_at(t0)?)?;
            let ev = SweepEvaluator::new(&drop, &cfg.codebook);

            let mut best = (f64::NEG_INFINITY, Codeword::new(0, 0));
            for my in 0..cfg.codebook.m_y {
                for mz in 0..cfg.codebook.m_z {
                    let cw = Codeword::new(my, mz);
                    let sig = ev.response(cw, &drop.phases_ue).scale(sqrt_p);
                    let mut power = 0.0;
                    for _ in 0..cfg.n_ide {
                        power += (sig + noise_sample(chan.sigma2, &mut noise)).norm_sqr();
                    }
                    if power > best.0 {
                        best = (power, cw);
                    }
                }
            }
            let current = best.1;

            for i_ce in 0..sched.eta {
                drop.refresh_small_scale(&mut fading);
                let t_d = sched.d_start(t0, i_ce);
                let (true_dir, s0, s1) = self.d_frame(&mut drop, &chan, current, t_d, &mut noise)?;
                snr0.push(s0);
                snr1.push(s1);
                if keep_records {
                    records.push(TimestepRecord {
                        drop: self.drop_index,
                        scheme: Scheme::Fs,
                        t: t_d,
                        ptx_dbm,
                        codeword: Some(current),
                        true_dir,
                        pred_dir: None,
                        snr_noiseless: s0,
                        snr_noisy: s1,
                    });
                }
            }
        }

        let gamma_ov = sched.overhead();
        let mut summary = self.base_summary(Scheme::Fs, ptx_dbm);
        summary.gamma_overhead = gamma_ov;
        summary.eff_rate_noiseless = effective_rate(&snr0, gamma_ov);
        summary.eff_rate_noisy = effective_rate(&snr1, gamma_ov);
        summary.samples = snr0.len();
        summary.blocks = n_blocks;
        Ok((records, summary))
    }

    /// Full-CSI per-cell optimization baseline. The channel-dependent gain
    /// sum is power independent, so one pass over the coherence blocks
    /// serves every requested power point (noise samples are shared across
    /// powers as common random numbers).
    pub fn baseline_fullopt(
        &self,
        ptx_dbm_list: &[f64],
        keep_records: bool,
    ) -> Result<(Vec<TimestepRecord>, Vec<DropSummary>)> {
        let cfg = self.cfg;
        // Power enters only through the final SNR scaling.
        let chan = cfg.channel_config(ptx_dbm_list.first().copied().unwrap_or(0.0))?;
        let (mut drop, mut fading, mut noise) = self.streams(&chan)?;

        let nominal = cfg.schedule_proposed()?;
        let (_, t_ce_b, gamma_ov) = fullopt_overhead(
            cfg.file.l_bs,
            cfg.file.l_ue,
            cfg.codebook.cell_count(),
            cfg.t_symbol,
            nominal.t_d,
        );
        let t_pair = t_ce_b + nominal.t_d;
        let total = self.trajectory.total_duration();
        let mut n_pairs = (total / t_pair).floor() as usize;
        if let Some(mb) = self.max_blocks {
            n_pairs = n_pairs.min(mb * ((cfg.t_block / t_pair).floor() as usize).max(1));
        }

        let mut ev = FullOptEvaluator::new(&drop, &cfg.codebook);
        // (time, true direction, gain sum, noise sample)
        let mut samples = Vec::with_capacity(n_pairs);
        for p in 0..n_pairs {
            let t_ce = p as f64 * t_pair;
            drop.refresh_small_scale(&mut fading);
            let t_d = t_ce + t_ce_b;
            drop.retarget_user(&cfg.scenario, &chan, self.trajectory.position_at(t_d)?)?;
            ev.update_los(&drop, &cfg.codebook);
            let gain = ev.gain_sum(&drop);
            samples.push((t_d, drop.irs_aods[0], gain, noise_sample(chan.sigma2, &mut noise)));
        }

        let mut records = Vec::new();
        let mut summaries = Vec::new();
        for &ptx in ptx_dbm_list {
            let p_tx = dbm_to_watts(ptx);
            let sqrt_p = p_tx.sqrt();
            let mut snr0 = Vec::with_capacity(samples.len());
            let mut snr1 = Vec::with_capacity(samples.len());
            for &(t_d, true_dir, gain, n) in &samples {
                let s0 = gain * gain * p_tx / chan.sigma2;
                let y = Complex::new(gain * sqrt_p, 0.0) + n;
                let s1 = y.norm_sqr() / chan.sigma2;
                snr0.push(s0);
                snr1.push(s1);
                if keep_records {
                    records.push(TimestepRecord {
                        drop: self.drop_index,
                        scheme: Scheme::FullOpt,
                        t: t_d,
                        ptx_dbm: ptx,
                        codeword: None,
                        true_dir,
                        pred_dir: None,
                        snr_noiseless: s0,
                        snr_noisy: s1,
                    });
                }
            }
            let mut summary = self.base_summary(Scheme::FullOpt, ptx);
            summary.gamma_overhead = gamma_ov;
            summary.eff_rate_noiseless = effective_rate(&snr0, gamma_ov);
            summary.eff_rate_noisy = effective_rate(&snr1, gamma_ov);
            summary.samples = snr0.len();
            summary.blocks = n_pairs;
            summaries.push(summary);
        }
        Ok((records, summaries))
    }
}

/// Runs every requested scheme and power point for one drop.
pub fn run_drop(
    cfg: &SimConfig,
    table: Option<&MainLobeTable<f64>>,
    drop_index: usize,
    opts: &SweepOptions,
) -> Result<DropOutput> {
    let runner = DropRunner::new(cfg, table, drop_index, opts.max_blocks)?;
    let mut records = Vec::new();
    let mut summaries = Vec::new();
    for &scheme in &opts.schemes {
        match scheme {
            Scheme::Proposed => {
                for &ptx in &cfg.ptx_dbm {
                    let (r, s) = runner.tracking(ptx, opts.record_timesteps)?;
                    records.extend(r);
                    summaries.push(s);
                }
            }
            Scheme::Fs => {
                for &ptx in &cfg.ptx_dbm {
                    let (r, s) = runner.baseline_fs(ptx, opts.record_timesteps)?;
                    records.extend(r);
                    summaries.push(s);
                }
            }
            Scheme::FullOpt => {
                let (r, s) = runner.baseline_fullopt(&cfg.ptx_dbm, opts.record_timesteps)?;
                records.extend(r);
                summaries.extend(s);
            }
        }
    }
    Ok(DropOutput {
        drop: drop_index,
        records,
        summaries,
    })
}

/// Runs the full sweep, handing each completed drop to `sink` in drop-index
/// order. Drops execute in parallel chunks; memory stays bounded by the
/// chunk size. The returned result carries summaries only.
pub fn run_sweep_streaming(
    cfg: &SimConfig,
    table: Option<&MainLobeTable<f64>>,
    opts: &SweepOptions,
    mut sink: impl FnMut(DropOutput) -> Result<()>,
) -> Result<RunResult> {
    let indices: Vec<usize> = (0..cfg.drops).collect();
    let chunk_size = (rayon::current_num_threads() * 2).max(1);
    let mut drop_summaries = Vec::new();
    for chunk in indices.chunks(chunk_size) {
        let outputs: Result<Vec<DropOutput>> = chunk
            .par_iter()
            .map(|&i| run_drop(cfg, table, i, opts))
            .collect();
        for out in outputs? {
            drop_summaries.extend(out.summaries.iter().cloned());
            sink(out)?;
        }
    }
    Ok(RunResult {
        seed: cfg.seed,
        records: Vec::new(),
        drop_summaries,
    })
}

/// Runs the full sweep and keeps everything in memory.
pub fn run_sweep(
    cfg: &SimConfig,
    table: Option<&MainLobeTable<f64>>,
    opts: &SweepOptions,
) -> Result<RunResult> {
    let mut records = Vec::new();
    let mut result = run_sweep_streaming(cfg, table, opts, |out| {
        records.extend(out.records);
        Ok(())
    })?;
    result.records = records;
    Ok(result)
}
