//! Scenario configuration: a flat key/value TOML document whose keys mirror
//! the default simulation settings, with every field optional and unknown
//! keys rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelConfig, Scenario, SPEED_OF_LIGHT};
use crate::codebook::CodebookConfig;
use crate::geometry::{direction_from_vector, Direction, PlaneFrame, Vec3};
use crate::harness::schedule::{derive_schedule, fullopt_overhead, FrameSchedule, OverheadModel};
use crate::mobility::MobilityConfig;
use crate::{Error, Result};

/// On-disk configuration. Defaults reproduce the reference scenario:
/// a 12x4 BS array at `[0,0,10]` m, a 100x100-cell surface at
/// `[-40,40,5]` m, a pedestrian user orbiting inside a 15 m circle, and a
/// 70x70 quadratic codebook at 28 GHz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfigFile {
    /// BS array center position, meters.
    pub p_bs: [f64; 3],
    /// Surface center position, meters.
    pub p_irs: [f64; 3],
    /// Unit cells per surface axis.
    pub q_y: usize,
    pub q_z: usize,
    /// Cell pitch in wavelengths.
    pub d_y_over_lambda: f64,
    pub d_z_over_lambda: f64,
    /// Codewords per axis.
    pub m_y: usize,
    pub m_z: usize,
    /// Codebook beamwidth parameter.
    pub w: f64,
    /// BS array elements along x and z.
    pub n_bs_x: usize,
    pub n_bs_z: usize,
    /// BS element spacing in wavelengths.
    pub bs_spacing_over_lambda: f64,
    /// Movement circle radii, meters.
    pub r: f64,
    pub r_c: f64,
    /// User speed, km/h.
    pub v_kmh: f64,
    /// Horizontal circle center, meters.
    pub circle_center: [f64; 2],
    /// User antenna height, meters.
    pub user_height: f64,
    /// Path counts per link.
    pub l_bs: usize,
    pub l_ue: usize,
    /// Rician factor, linear.
    pub k_factor: f64,
    /// Noise power, dBm.
    pub sigma2_dbm: f64,
    /// Carrier frequency, GHz.
    pub f_c_ghz: f64,
    /// NLoS angle half-window, degrees.
    pub scatter_spread_deg: f64,
    /// Transmission block length `T`, seconds.
    pub t_block_s: f64,
    /// Combined CE+D pair length, milliseconds.
    pub t_ce_plus_d_ms: f64,
    /// Symbol duration, microseconds.
    pub t_s_us: f64,
    /// Pilots per candidate codeword in the IDE frame.
    pub n_ide: usize,
    /// Pilots per channel estimate.
    pub n_ce: usize,
    /// Number of past estimates kept for trajectory fitting.
    pub s_history: usize,
    /// Trajectory polynomial order.
    pub poly_order: usize,
    /// Candidate-set radius in codeword indices.
    pub gamma: usize,
    /// Hypotheses per angle axis in the GLRT grid.
    pub h_per_axis: usize,
    /// Transmit power sweep, dBm.
    pub ptx_dbm: Vec<f64>,
    /// Monte-Carlo drops.
    pub drops: usize,
    /// Master seed.
    pub seed: u64,
    /// Directory for the main-lobe cache.
    pub cache_dir: String,
}

impl Default for SimConfigFile {
    fn default() -> Self {
        Self {
            p_bs: [0.0, 0.0, 10.0],
            p_irs: [-40.0, 40.0, 5.0],
            q_y: 100,
            q_z: 100,
            d_y_over_lambda: 0.5,
            d_z_over_lambda: 0.5,
            m_y: 70,
            m_z: 70,
            w: 2.0,
            n_bs_x: 12,
            n_bs_z: 4,
            bs_spacing_over_lambda: 0.5,
            r: 15.0,
            r_c: 7.5,
            v_kmh: 5.0,
            circle_center: [-20.0, 20.0],
            user_height: 1.5,
            l_bs: 4,
            l_ue: 4,
            k_factor: 3.0,
            sigma2_dbm: -120.0,
            f_c_ghz: 28.0,
            scatter_spread_deg: 60.0,
            t_block_s: 0.15,
            t_ce_plus_d_ms: 1.29,
            t_s_us: 4.16,
            n_ide: 3,
            n_ce: 1,
            s_history: 3,
            poly_order: 1,
            gamma: 1,
            h_per_axis: 11,
            ptx_dbm: (0..=8).map(|k| 5.0 * k as f64).collect(),
            drops: 50,
            seed: 1,
            cache_dir: "cache".into(),
        }
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Validated runtime configuration with derived module configs.
#[derive(Debug, Clone)]
pub struct SimConfig {
    /// Raw file echo, kept for manifests and reproducibility.
    pub file: SimConfigFile,
    pub scenario: Scenario<f64>,
    pub codebook: CodebookConfig<f64>,
    pub mobility: MobilityConfig<f64>,
    pub wavelength: f64,
    pub sigma2: f64,
    pub t_block: f64,
    pub t_ce_plus_d: f64,
    pub t_symbol: f64,
    pub n_ide: usize,
    pub n_ce: usize,
    pub s_history: usize,
    pub poly_order: usize,
    pub gamma: usize,
    pub h_per_axis: usize,
    pub ptx_dbm: Vec<f64>,
    pub drops: usize,
    pub seed: u64,
    pub cache_dir: PathBuf,
}

impl SimConfig {
    /// Default scenario.
    pub fn defaults() -> Self {
        Self::from_file_config(SimConfigFile::default()).expect("defaults are valid")
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: SimConfigFile =
            toml::from_str(text).map_err(|e| Error::Config(format!("config parse: {e}")))?;
        Self::from_file_config(file)
    }

    pub fn from_file_config(file: SimConfigFile) -> Result<Self> {
        let wavelength = SPEED_OF_LIGHT / (file.f_c_ghz * 1e9);
        let scenario = Scenario {
            bs_pos: Vec3::new(file.p_bs[0], file.p_bs[1], file.p_bs[2]),
            irs_pos: Vec3::new(file.p_irs[0], file.p_irs[1], file.p_irs[2]),
            bs_frame: PlaneFrame::bs_default(),
            irs_frame: PlaneFrame::irs_default(),
            // Frame axis u1 is z, u2 is x.
            n_bs_1: file.n_bs_z,
            n_bs_2: file.n_bs_x,
            bs_spacing: file.bs_spacing_over_lambda * wavelength,
        };
        let codebook = CodebookConfig {
            m_y: file.m_y,
            m_z: file.m_z,
            q_y: file.q_y,
            q_z: file.q_z,
            d_y: file.d_y_over_lambda * wavelength,
            d_z: file.d_z_over_lambda * wavelength,
            wavelength,
            w: file.w,
        };
        codebook.validate()?;
        let mobility = MobilityConfig {
            center: Vec3::new(file.circle_center[0], file.circle_center[1], 0.0),
            r: file.r,
            r_c: file.r_c,
            v: file.v_kmh / 3.6,
            user_height: file.user_height,
            seed: file.seed,
        };
        mobility.validate()?;

        if file.h_per_axis < 2 {
            return Err(Error::Config("h_per_axis must be >= 2".into()));
        }
        if file.s_history < 1 {
            return Err(Error::Config("s_history must be >= 1".into()));
        }
        if file.ptx_dbm.is_empty() {
            return Err(Error::Config("ptx_dbm sweep must not be empty".into()));
        }
        if file.n_ide < 1 {
            return Err(Error::Config("n_ide must be >= 1".into()));
        }

        let cfg = Self {
            scenario,
            codebook,
            mobility,
            wavelength,
            sigma2: dbm_to_watts(file.sigma2_dbm),
            t_block: file.t_block_s,
            t_ce_plus_d: file.t_ce_plus_d_ms * 1e-3,
            t_symbol: file.t_s_us * 1e-6,
            n_ide: file.n_ide,
            n_ce: file.n_ce,
            s_history: file.s_history,
            poly_order: file.poly_order,
            gamma: file.gamma,
            h_per_axis: file.h_per_axis,
            ptx_dbm: file.ptx_dbm.clone(),
            drops: file.drops,
            seed: file.seed,
            cache_dir: PathBuf::from(&file.cache_dir),
            file,
        };
        cfg.channel_config(cfg.ptx_dbm[0])?.validate()?;
        // Both the nominal candidate count and the full-codebook sweep must
        // fit their blocks.
        cfg.schedule_proposed()?;
        cfg.schedule_fs()?;
        Ok(cfg)
    }

    /// Channel parameters at one transmit power point.
    pub fn channel_config(&self, ptx_dbm: f64) -> Result<ChannelConfig<f64>> {
        Ok(ChannelConfig {
            l_bs: self.file.l_bs,
            l_ue: self.file.l_ue,
            k_factor: self.file.k_factor,
            sigma2: self.sigma2,
            p_tx: dbm_to_watts(ptx_dbm),
            f_c: self.file.f_c_ghz * 1e9,
            scatter_spread: self.file.scatter_spread_deg.to_radians(),
            seed: self.seed,
        })
    }

    /// Nominal candidate-set size `(2γ+1)²` (interior codewords).
    pub fn nominal_candidates(&self) -> usize {
        (2 * self.gamma + 1).pow(2)
    }

    /// Nominal block schedule of the tracking scheme.
    pub fn schedule_proposed(&self) -> Result<FrameSchedule> {
        derive_schedule(
            self.t_block,
            self.t_ce_plus_d,
            self.t_symbol,
            self.n_ide,
            self.n_ce,
            self.nominal_candidates(),
        )
    }

    /// Block schedule with an explicit candidate count (edge blocks clip
    /// the candidate set, shortening the IDE frame).
    pub fn schedule_for_candidates(&self, candidates: usize) -> Result<FrameSchedule> {
        derive_schedule(
            self.t_block,
            self.t_ce_plus_d,
            self.t_symbol,
            self.n_ide,
            self.n_ce,
            candidates,
        )
    }

    /// Full-search block schedule: the IDE frame sweeps the whole codebook.
    pub fn schedule_fs(&self) -> Result<FrameSchedule> {
        derive_schedule(
            self.t_block,
            self.t_ce_plus_d,
            self.t_symbol,
            self.n_ide,
            self.n_ce,
            self.codebook.codeword_count(),
        )
    }

    /// Overhead fractions of all schemes.
    pub fn overhead_model(&self) -> Result<OverheadModel> {
        let proposed = self.schedule_proposed()?;
        let fs = self.schedule_fs()?;
        let t_d_b = proposed.t_d;
        let (n_ce_b, t_ce_b, gamma_fullopt) = fullopt_overhead(
            self.file.l_bs,
            self.file.l_ue,
            self.codebook.cell_count(),
            self.t_symbol,
            t_d_b,
        );
        Ok(OverheadModel {
            gamma_proposed: proposed.overhead(),
            gamma_fs: fs.overhead(),
            gamma_fullopt,
            n_ce_b,
            t_ce_b,
            t_d_b,
        })
    }

    /// Arrival direction of the BS at the surface (the fixed incoming
    /// direction of every reflection).
    pub fn psi_bs_at_irs(&self) -> Result<Direction<f64>> {
        direction_from_vector(
            self.scenario.bs_pos - self.scenario.irs_pos,
            &self.scenario.irs_frame,
        )
    }
}
