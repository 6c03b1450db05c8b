//! Geometry-based Rician channel realization and received-signal synthesis.
//!
//! A drop fixes the path geometry (LoS angles from positions, NLoS angles
//! drawn once) and the per-path gain magnitudes; small-scale fading enters
//! through unit-modulus per-path phases on the user side that are redrawn
//! once per coherence block.

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::codebook::{irs_response, Codeword, CodebookConfig};
use crate::geometry::{direction_from_vector, upa_steering_vector, Direction, PlaneFrame, Vec3};
use crate::num::{self, Real};
use crate::{Error, Result};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Statistical and power parameters of the two-hop channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig<T> {
    /// Path counts on the BS-to-IRS and IRS-to-user links (>= 1 each; the
    /// first path of each link is the LoS path).
    pub l_bs: usize,
    pub l_ue: usize,
    /// Rician factor: LoS power over total non-LoS power, linear.
    pub k_factor: T,
    /// Noise power sigma^2 in watts.
    pub sigma2: T,
    /// Transmit power in watts (pilots and data alike).
    pub p_tx: T,
    /// Carrier frequency in Hz.
    pub f_c: T,
    /// NLoS angles are drawn uniformly within this half-window (radians)
    /// of broadside, per angle.
    pub scatter_spread: T,
    /// Seed recorded for reproducibility of the drop streams.
    pub seed: u64,
}

impl<T: Real> ChannelConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.l_bs < 1 || self.l_ue < 1 {
            return Err(Error::Config("path counts must be >= 1".into()));
        }
        if self.k_factor <= T::zero() {
            return Err(Error::Config("Rician K factor must be positive".into()));
        }
        if self.sigma2 <= T::zero() || self.p_tx <= T::zero() || self.f_c <= T::zero() {
            return Err(Error::Config(
                "powers and carrier frequency must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn wavelength(&self) -> T {
        T::of(SPEED_OF_LIGHT) / self.f_c
    }
}

/// Static deployment geometry: array positions, orientations, and the BS
/// array layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario<T> {
    pub bs_pos: Vec3<T>,
    pub irs_pos: Vec3<T>,
    pub bs_frame: PlaneFrame<T>,
    pub irs_frame: PlaneFrame<T>,
    /// BS UPA element counts along its two frame axes.
    pub n_bs_1: usize,
    pub n_bs_2: usize,
    /// BS element spacing in meters.
    pub bs_spacing: T,
}

impl<T: Real> Scenario<T> {
    pub fn n_bs(&self) -> usize {
        self.n_bs_1 * self.n_bs_2
    }
}

/// One realization of path angles, gains, and user-side small-scale phases.
///
/// Entry 0 of every per-path list is the LoS path.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDrop<T> {
    /// Departure directions at the BS, one per BS-to-IRS path.
    pub bs_aods: Vec<Direction<T>>,
    /// Arrival directions at the IRS, one per BS-to-IRS path.
    pub irs_aoas: Vec<Direction<T>>,
    /// Departure directions at the IRS, one per IRS-to-user path.
    pub irs_aods: Vec<Direction<T>>,
    /// Nonnegative per-path gain magnitudes.
    pub gains_bs: Vec<T>,
    pub gains_ue: Vec<T>,
    /// Unit-modulus user-side path phases, redrawn per coherence block.
    pub phases_ue: Vec<Complex<T>>,
    /// Per BS-path beamforming gain `d_i^H f` with the unit-norm beamformer
    /// aimed along the LoS path (`f = d_0 / sqrt(N_BS)`).
    pub beamformer_gain_per_path: Vec<Complex<T>>,
    k_factor: T,
}

/// Friis amplitude over one link segment: `lambda / (4 pi d)`.
fn friis_amplitude<T: Real>(wavelength: T, distance: T) -> T {
    wavelength / (T::of(4.0) * T::PI() * distance)
}

fn nlos_direction<T: Real, R: Rng + ?Sized>(spread: T, rng: &mut R) -> Direction<T> {
    Direction {
        theta: num::uniform(rng, -spread, spread),
        phi: num::uniform(rng, -spread, spread),
    }
}

/// Splits path power so the LoS magnitude is `los` and the `n_nlos`
/// equal-power NLoS magnitudes satisfy `los^2 / sum(nlos^2) = k`.
fn gain_profile<T: Real>(los: T, n_nlos: usize, k: T) -> Vec<T> {
    let mut gains = vec![los];
    if n_nlos > 0 {
        let each = los / (k * T::of_usize(n_nlos)).sqrt();
        gains.extend(std::iter::repeat_n(each, n_nlos));
    }
    gains
}

/// Draws a channel realization for the given user position.
///
/// LoS angles come from the deployment geometry, NLoS angles are uniform
/// within the scatter window and stay fixed for the drop's lifetime, and
/// per-path magnitudes follow the Friis law with the equal-power NLoS split
/// that meets the K-factor identity. The initial small-scale phases are
/// drawn from `rng` as a first [`ChannelDrop::refresh_small_scale`].
pub fn sample_drop<T: Real, R: Rng + ?Sized>(
    scenario: &Scenario<T>,
    cfg: &ChannelConfig<T>,
    user_pos: Vec3<T>,
    rng: &mut R,
) -> Result<ChannelDrop<T>> {
    cfg.validate()?;
    let lambda = cfg.wavelength();

    let bs_to_irs = scenario.irs_pos - scenario.bs_pos;
    let d_bs_irs = bs_to_irs.norm();
    let irs_to_user = user_pos - scenario.irs_pos;
    let d_irs_user = irs_to_user.norm();
    if d_bs_irs <= T::zero() || d_irs_user <= T::zero() {
        return Err(Error::DegenerateGeometry);
    }

    let mut bs_aods = vec![direction_from_vector(bs_to_irs, &scenario.bs_frame)?];
    let mut irs_aoas = vec![direction_from_vector(-bs_to_irs, &scenario.irs_frame)?];
    let mut irs_aods = vec![direction_from_vector(irs_to_user, &scenario.irs_frame)?];
    for _ in 1..cfg.l_bs {
        bs_aods.push(nlos_direction(cfg.scatter_spread, rng));
        irs_aoas.push(nlos_direction(cfg.scatter_spread, rng));
    }
    for _ in 1..cfg.l_ue {
        irs_aods.push(nlos_direction(cfg.scatter_spread, rng));
    }

    let gains_bs = gain_profile(
        friis_amplitude(lambda, d_bs_irs),
        cfg.l_bs - 1,
        cfg.k_factor,
    );
    let gains_ue = gain_profile(
        friis_amplitude(lambda, d_irs_user),
        cfg.l_ue - 1,
        cfg.k_factor,
    );

    // Beamformer f = d_0 / sqrt(N_BS): per-path gain d_i^H d_0 / sqrt(N_BS).
    let steer = |d: Direction<T>| {
        upa_steering_vector(
            d,
            scenario.n_bs_1,
            scenario.n_bs_2,
            scenario.bs_spacing,
            lambda,
        )
    };
    let d_los = steer(bs_aods[0]);
    let inv_sqrt_n = T::one() / T::of_usize(scenario.n_bs()).sqrt();
    let beamformer_gain_per_path = bs_aods
        .iter()
        .map(|&aod| {
            let d_i = steer(aod);
            let dot = d_i
                .iter()
                .zip(&d_los)
                .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| {
                    acc + a.conj() * b
                });
            dot * inv_sqrt_n
        })
        .collect();

    let mut drop = ChannelDrop {
        bs_aods,
        irs_aoas,
        irs_aods,
        gains_bs,
        gains_ue,
        phases_ue: vec![Complex::new(T::one(), T::zero()); cfg.l_ue],
        beamformer_gain_per_path,
        k_factor: cfg.k_factor,
    };
    drop.refresh_small_scale(rng);
    Ok(drop)
}

impl<T: Real> ChannelDrop<T> {
    /// Redraws all user-side path phases uniformly on the unit circle (one
    /// coherence block has passed). Magnitudes and angles are untouched.
    pub fn refresh_small_scale<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for p in &mut self.phases_ue {
            *p = num::unit_phase(rng);
        }
    }

    /// Moves the LoS endpoint of the IRS-to-user link to a new user
    /// position: updates the LoS departure direction and re-derives the
    /// gain profile so the K-factor identity keeps holding as the LoS
    /// distance changes. Scatterer angles and the BS link are untouched.
    pub fn retarget_user(
        &mut self,
        scenario: &Scenario<T>,
        cfg: &ChannelConfig<T>,
        user_pos: Vec3<T>,
    ) -> Result<()> {
        let irs_to_user = user_pos - scenario.irs_pos;
        let d = irs_to_user.norm();
        if d <= T::zero() {
            return Err(Error::DegenerateGeometry);
        }
        self.irs_aods[0] = direction_from_vector(irs_to_user, &scenario.irs_frame)?;
        self.gains_ue = gain_profile(
            friis_amplitude(cfg.wavelength(), d),
            self.gains_ue.len() - 1,
            self.k_factor,
        );
        Ok(())
    }

    /// Composite weight of the path pair `(i, j)`: everything in the
    /// received signal except the IRS response and the symbol.
    pub fn pair_weight(&self, i: usize, j: usize) -> Complex<T> {
        self.phases_ue[j].scale(self.gains_ue[j] * self.gains_bs[i])
            * self.beamformer_gain_per_path[i]
    }

    /// Noiseless received value per unit symbol for a codeword: the full
    /// path-pair sum over both links.
    pub fn noiseless_composite(&self, cw: Codeword, cb: &CodebookConfig<T>) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for j in 0..self.irs_aods.len() {
            for i in 0..self.irs_aoas.len() {
                let g = irs_response(cw, self.irs_aoas[i], self.irs_aods[j], cb);
                acc += self.pair_weight(i, j) * g;
            }
        }
        acc
    }

    /// LoS-only composite gain `h`: user LoS phase and gain, BS LoS gain,
    /// and the beamforming gain toward the LoS departure direction.
    pub fn effective_los_gain(&self) -> Complex<T> {
        self.pair_weight(0, 0)
    }

    /// Largest deviation of the per-link Rician identity
    /// `g_0^2 / sum_{k>0} g_k^2 = K` across the two links.
    pub fn k_factor_identity_error(&self) -> T {
        let k = self.k_factor;
        let check = |gains: &[T]| {
            if gains.len() < 2 {
                return T::zero();
            }
            let nlos: T = gains[1..].iter().map(|&g| g * g).sum();
            (gains[0] * gains[0] / nlos - k).abs()
        };
        check(&self.gains_bs).max(check(&self.gains_ue))
    }
}

/// Received symbol at the user for one codeword: the path-pair sum scaled by
/// the transmit symbol, plus the additive noise sample.
pub fn received_symbol<T: Real>(
    cw: Codeword,
    drop: &ChannelDrop<T>,
    cb: &CodebookConfig<T>,
    symbol: Complex<T>,
    noise: Complex<T>,
) -> Complex<T> {
    drop.noiseless_composite(cw, cb) * symbol + noise
}

/// One additive noise sample of power `sigma2`.
pub fn noise_sample<T: Real, R: Rng + ?Sized>(sigma2: T, rng: &mut R) -> Complex<T> {
    num::complex_gaussian(rng, sigma2)
}
