//! Transmission-block timing and the overhead/effective-rate metrics.
//!
//! A block of length `T` holds one direction-estimation frame followed by
//! `eta` channel-estimation + data frame pairs:
//! `T = T_IDE + eta (T_CE + T_D)` with `T_IDE = |M_IDE| N_IDE T_S` and
//! `T_CE = N_CE T_S`.

use serde::Serialize;

use crate::{Error, Result};

/// Timing of one transmission block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameSchedule {
    /// Block length `T` in seconds.
    pub t_block: f64,
    /// Direction-estimation frame length `|M_IDE| * N_IDE * T_S`.
    pub t_ide: f64,
    /// Channel-estimation frame length `N_CE * T_S`.
    pub t_ce: f64,
    /// Data frame length.
    pub t_d: f64,
    /// Symbol duration `T_S`.
    pub t_symbol: f64,
    /// Number of CE+D pairs fitting after the IDE frame.
    pub eta: usize,
    /// Pilots per candidate codeword.
    pub n_ide: usize,
    /// Pilots per channel estimate.
    pub n_ce: usize,
    /// Candidate codewords measured in the IDE frame.
    pub candidates: usize,
}

/// Derives the block schedule. Errors when the IDE frame cannot fit in the
/// block at all.
pub fn derive_schedule(
    t_block: f64,
    t_ce_plus_d: f64,
    t_symbol: f64,
    n_ide: usize,
    n_ce: usize,
    candidates: usize,
) -> Result<FrameSchedule> {
    if t_block <= 0.0 || t_ce_plus_d <= 0.0 || t_symbol <= 0.0 {
        return Err(Error::Config("frame durations must be positive".into()));
    }
    let t_ce = n_ce as f64 * t_symbol;
    if t_ce >= t_ce_plus_d {
        return Err(Error::Config(format!(
            "T_CE = {t_ce} s leaves no data frame within T_CE + T_D = {t_ce_plus_d} s"
        )));
    }
    let t_ide = candidates as f64 * n_ide as f64 * t_symbol;
    if t_ide >= t_block {
        return Err(Error::Config(format!(
            "IDE frame ({t_ide} s) does not fit in the block ({t_block} s)"
        )));
    }
    let eta = ((t_block - t_ide) / t_ce_plus_d).floor() as usize;
    Ok(FrameSchedule {
        t_block,
        t_ide,
        t_ce,
        t_d: t_ce_plus_d - t_ce,
        t_symbol,
        eta,
        n_ide,
        n_ce,
        candidates,
    })
}

impl FrameSchedule {
    /// Start of CE frame `i_ce` within a block starting at `t_block_start`.
    pub fn ce_start(&self, t_block_start: f64, i_ce: usize) -> f64 {
        t_block_start + self.t_ide + i_ce as f64 * (self.t_ce + self.t_d)
    }

    /// Start of the data frame following CE frame `i_ce`.
    pub fn d_start(&self, t_block_start: f64, i_ce: usize) -> f64 {
        self.ce_start(t_block_start, i_ce) + self.t_ce
    }

    /// Signaling overhead `(T_IDE + eta T_CE) / T`.
    pub fn overhead(&self) -> f64 {
        (self.t_ide + self.eta as f64 * self.t_ce) / self.t_block
    }
}

/// Overhead fractions of the three schemes plus the full-CSI baseline's
/// pilot dimensioning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OverheadModel {
    pub gamma_proposed: f64,
    pub gamma_fs: f64,
    pub gamma_fullopt: f64,
    /// Pilot count for full-CSI estimation, `round(L_BS L_UE ln Q)`.
    pub n_ce_b: usize,
    pub t_ce_b: f64,
    pub t_d_b: f64,
}

/// Full-CSI baseline overhead: one estimation of all per-cell channels per
/// data frame, `Γ = T_CE^B / (T_CE^B + T_D^B)`.
pub fn fullopt_overhead(
    l_bs: usize,
    l_ue: usize,
    q_total: usize,
    t_symbol: f64,
    t_d_b: f64,
) -> (usize, f64, f64) {
    let n_ce_b = ((l_bs * l_ue) as f64 * (q_total as f64).ln()).round() as usize;
    let t_ce_b = n_ce_b as f64 * t_symbol;
    (n_ce_b, t_ce_b, t_ce_b / (t_ce_b + t_d_b))
}

/// Effective rate: `(1 − Γ)` times the mean of `log2(1 + SNR)` over the
/// provided data-frame SNR samples (linear SNR in, bit/s/Hz out).
pub fn effective_rate(snr_samples: &[f64], gamma: f64) -> f64 {
    if snr_samples.is_empty() {
        return 0.0;
    }
    let mean: f64 =
        snr_samples.iter().map(|&s| (1.0 + s).log2()).sum::<f64>() / snr_samples.len() as f64;
    (1.0 - gamma) * mean
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const T: f64 = 0.15;
    const T_CE_D: f64 = 1.29e-3;
    const T_S: f64 = 4.16e-6;

    #[test]
    fn reference_proposed_schedule() {
        let s = derive_schedule(T, T_CE_D, T_S, 3, 1, 9).unwrap();
        assert_relative_eq!(s.t_ide, 112.32e-6, max_relative = 1e-12);
        assert_eq!(s.eta, 116);
        assert_relative_eq!(s.t_ce, 4.16e-6, max_relative = 1e-12);
        assert_relative_eq!(s.t_d, 1.29e-3 - 4.16e-6, max_relative = 1e-12);
    }

    #[test]
    fn zero_pilot_ide_frame() {
        let s = derive_schedule(T, T_CE_D, T_S, 0, 1, 9).unwrap();
        assert_eq!(s.t_ide, 0.0);
        assert_eq!(s.eta, (T / T_CE_D).floor() as usize);
    }

    #[test]
    fn full_search_schedule_at_m_4900() {
        let s = derive_schedule(T, T_CE_D, T_S, 3, 1, 4900).unwrap();
        assert_relative_eq!(s.t_ide, 61.152e-3, max_relative = 1e-12);
        assert_eq!(s.eta, 68);
    }

    #[test]
    fn oversized_ide_frame_is_a_config_error() {
        // 15000 candidates * 3 pilots * 4.16 us > 0.15 s.
        assert!(derive_schedule(T, T_CE_D, T_S, 3, 1, 15000).is_err());
    }

    #[test]
    fn frame_start_times() {
        let s = derive_schedule(T, T_CE_D, T_S, 3, 1, 9).unwrap();
        assert_relative_eq!(s.ce_start(0.3, 0), 0.3 + 112.32e-6, max_relative = 1e-12);
        assert_relative_eq!(
            s.ce_start(0.3, 2),
            0.3 + 112.32e-6 + 2.0 * 1.29e-3,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            s.d_start(0.3, 0),
            0.3 + 112.32e-6 + 4.16e-6,
            max_relative = 1e-12
        );
    }

    #[test]
    fn overhead_closed_forms() {
        let proposed = derive_schedule(T, T_CE_D, T_S, 3, 1, 9).unwrap();
        assert_relative_eq!(
            proposed.overhead(),
            (112.32e-6 + 116.0 * 4.16e-6) / 0.15,
            epsilon = 1e-15
        );
        let fs = derive_schedule(T, T_CE_D, T_S, 3, 1, 4900).unwrap();
        assert_relative_eq!(
            fs.overhead(),
            (61.152e-3 + 68.0 * 4.16e-6) / 0.15,
            epsilon = 1e-15
        );

        let (n_ce_b, t_ce_b, gamma) = fullopt_overhead(4, 4, 10_000, T_S, T_CE_D - T_S);
        assert_eq!(n_ce_b, 147);
        assert_relative_eq!(t_ce_b, 611.52e-6, max_relative = 1e-12);
        assert_relative_eq!(
            gamma,
            611.52e-6 / (611.52e-6 + 1285.84e-6),
            epsilon = 1e-12
        );
        assert!((gamma - 0.322).abs() < 5e-4);
    }

    #[test]
    fn effective_rate_basics() {
        assert_relative_eq!(effective_rate(&[3.0], 0.0), 2.0);
        assert_relative_eq!(effective_rate(&[0.0, 0.0], 0.5), 0.0);
        assert_eq!(effective_rate(&[], 0.3), 0.0);
        // Hand-rolled mean over a short seeded list.
        let snrs = [1.5, 7.0, 0.25, 100.0];
        let mean = snrs.iter().map(|&s| (1.0f64 + s).log2()).sum::<f64>() / 4.0;
        assert_relative_eq!(
            effective_rate(&snrs, 0.00397),
            (1.0 - 0.00397) * mean,
            max_relative = 1e-15
        );
    }
}
