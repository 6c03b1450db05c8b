//! Reference schemes: full codebook search over noisy pilot powers and
//! per-unit-cell phase optimization with perfect channel knowledge.

use num_complex::Complex;
use rand::Rng;

use crate::channel::{noise_sample, ChannelConfig, ChannelDrop};
use crate::codebook::{axis_factor, Axis, Codeword, CodebookConfig};
use crate::geometry::direction_cosines;
use crate::num::Real;

/// Per-unit-cell cascaded end-to-end gains `c_q`: the received value for a
/// phase profile `ω` is `Σ_q c_q e^{jω_q}` per unit symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct PerCellCascade<T> {
    pub q_y: usize,
    pub q_z: usize,
    /// `q_y`-major cell coefficients.
    pub cells: Vec<Complex<T>>,
}

/// Unit-modulus linear-phase vector `e^{j step q}` for `q = 0..n`.
fn linear_phase_vector<T: Real>(n: usize, step: T) -> Vec<Complex<T>> {
    let rot = Complex::from_polar(T::one(), step);
    let mut v = Vec::with_capacity(n);
    let mut z = Complex::new(T::one(), T::zero());
    for _ in 0..n {
        v.push(z);
        z *= rot;
    }
    v
}

/// Accumulates one path pair's rank-one contribution into the cell buffer.
fn add_pair_outer<T: Real>(
    out: &mut [Complex<T>],
    weight: Complex<T>,
    a_y: T,
    a_z: T,
    cb: &CodebookConfig<T>,
) {
    let k = T::TAU() / cb.wavelength;
    let ey = linear_phase_vector(cb.q_y, k * cb.d_y * a_y);
    let ez = linear_phase_vector(cb.q_z, k * cb.d_z * a_z);
    for (qy, &ey_q) in ey.iter().enumerate() {
        let row = weight * ey_q;
        let out_row = &mut out[qy * cb.q_z..(qy + 1) * cb.q_z];
        for (cell, &ez_q) in out_row.iter_mut().zip(&ez) {
            *cell += row * ez_q;
        }
    }
}

/// Exact per-cell cascade of a drop: for every unit cell, the sum over all
/// path pairs of the composite weight times the propagation phase at that
/// cell, including the aperture factor.
pub fn per_cell_cascade<T: Real>(
    drop: &ChannelDrop<T>,
    cb: &CodebookConfig<T>,
) -> PerCellCascade<T> {
    let mut cells = vec![Complex::new(T::zero(), T::zero()); cb.cell_count()];
    let g_bar = cb.g_bar();
    for j in 0..drop.irs_aods.len() {
        let (ay_j, az_j) = direction_cosines(drop.irs_aods[j]);
        for i in 0..drop.irs_aoas.len() {
            let (ay_i, az_i) = direction_cosines(drop.irs_aoas[i]);
            let w = drop.pair_weight(i, j).scale(g_bar);
            add_pair_outer(&mut cells, w, ay_i + ay_j, az_i + az_j, cb);
        }
    }
    PerCellCascade {
        q_y: cb.q_y,
        q_z: cb.q_z,
        cells,
    }
}

impl<T: Real> PerCellCascade<T> {
    /// `Σ_q |c_q|`: the coherent combining amplitude with per-cell phases
    /// set optimally.
    pub fn magnitude_sum(&self) -> T {
        self.cells.iter().map(|c| c.norm()).sum()
    }

    /// Received value per unit symbol for a codeword's phase profile,
    /// `Σ_q c_q e^{jω_q(m)}`.
    pub fn codeword_response(&self, cw: Codeword, cb: &CodebookConfig<T>) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for qy in 0..self.q_y {
            for qz in 0..self.q_z {
                let w = crate::codebook::codeword_phase(cw, qy, qz, cb);
                acc += self.cells[qy * self.q_z + qz] * Complex::from_polar(T::one(), w);
            }
        }
        acc
    }

    /// Phases maximizing the combined magnitude: `ω_q = −arg(c_q)`.
    pub fn optimal_phases(&self) -> Vec<T> {
        self.cells.iter().map(|c| -c.arg()).collect()
    }
}

/// Noiseless SNR with optimally phased unit cells:
/// `(Σ_q |c_q|)² · P_TX / σ²`.
pub fn full_opt_snr<T: Real>(cascade: &PerCellCascade<T>, cfg: &ChannelConfig<T>) -> T {
    let s = cascade.magnitude_sum();
    s * s * cfg.p_tx / cfg.sigma2
}

/// Evaluates noiseless codeword responses for a fixed drop geometry in
/// `O(L_BS · L_UE)` per codeword after an `O(M (Q_y + Q_z))` setup.
///
/// The per-axis factors are precomputed per codeword component and path
/// pair; small-scale phases stay outside so fading refreshes do not
/// invalidate the tables. Rebuild whenever path angles or gains change.
pub struct SweepEvaluator<T> {
    g_bar: T,
    n_pairs: usize,
    /// User-side path index of each pair (selects the fading phase).
    pair_j: Vec<usize>,
    /// Static pair weight: user gain x BS gain x beamformer gain.
    pair_static: Vec<Complex<T>>,
    /// `s_y[m * n_pairs + p]`: axis factor of component `m` at pair `p`.
    s_y: Vec<Complex<T>>,
    s_z: Vec<Complex<T>>,
}

impl<T: Real> SweepEvaluator<T> {
    pub fn new(drop: &ChannelDrop<T>, cb: &CodebookConfig<T>) -> Self {
        let l_bs = drop.irs_aoas.len();
        let l_ue = drop.irs_aods.len();
        let n_pairs = l_bs * l_ue;
        let mut pair_j = Vec::with_capacity(n_pairs);
        let mut pair_static = Vec::with_capacity(n_pairs);
        let mut a_y = Vec::with_capacity(n_pairs);
        let mut a_z = Vec::with_capacity(n_pairs);
        for j in 0..l_ue {
            let (ay_j, az_j) = direction_cosines(drop.irs_aods[j]);
            for i in 0..l_bs {
                let (ay_i, az_i) = direction_cosines(drop.irs_aoas[i]);
                pair_j.push(j);
                pair_static.push(
                    drop.beamformer_gain_per_path[i]
                        .scale(drop.gains_ue[j] * drop.gains_bs[i]),
                );
                a_y.push(ay_i + ay_j);
                a_z.push(az_i + az_j);
            }
        }
        let table = |axis: Axis, m_count: usize, a: &[T]| -> Vec<Complex<T>> {
            let mut t = Vec::with_capacity(m_count * n_pairs);
            for m in 0..m_count {
                for &a_p in a {
                    t.push(axis_factor(cb, axis, m, a_p));
                }
            }
            t
        };
        Self {
            g_bar: cb.g_bar(),
            n_pairs,
            pair_j,
            pair_static,
            s_y: table(Axis::Y, cb.m_y, &a_y),
            s_z: table(Axis::Z, cb.m_z, &a_z),
        }
    }

    /// Noiseless received value per unit symbol for a codeword under the
    /// given user-side fading phases.
    pub fn response(&self, cw: Codeword, phases_ue: &[Complex<T>]) -> Complex<T> {
        let sy = &self.s_y[cw.m_y * self.n_pairs..(cw.m_y + 1) * self.n_pairs];
        let sz = &self.s_z[cw.m_z * self.n_pairs..(cw.m_z + 1) * self.n_pairs];
        let mut acc = Complex::new(T::zero(), T::zero());
        for p in 0..self.n_pairs {
            acc += phases_ue[self.pair_j[p]] * self.pair_static[p] * sy[p] * sz[p];
        }
        acc * self.g_bar
    }
}

/// Full codebook search: transmits `pilot` for every codeword in
/// lexicographic order (with fresh noise per pilot symbol) and returns the
/// codeword with the largest received power sum. Ties resolve to the
/// lexicographically smallest codeword.
pub fn full_search_select<T: Real, R: Rng + ?Sized>(
    drop: &ChannelDrop<T>,
    cb: &CodebookConfig<T>,
    pilot: &[Complex<T>],
    sigma2: T,
    rng: &mut R,
) -> Codeword {
    let ev = SweepEvaluator::new(drop, cb);
    let mut best_power = T::neg_infinity();
    let mut best = Codeword::new(0, 0);
    for my in 0..cb.m_y {
        for mz in 0..cb.m_z {
            let cw = Codeword::new(my, mz);
            let resp = ev.response(cw, &drop.phases_ue);
            let mut power = T::zero();
            for &s in pilot {
                let y = resp * s + noise_sample(sigma2, rng);
                power += y.norm_sqr();
            }
            if power > best_power {
                best_power = power;
                best = cw;
            }
        }
    }
    best
}

/// Incremental `Σ_q |c_q|` evaluation for a moving user: per user-side path
/// `j` the `L_BS`-summed cell basis is cached, so a fading refresh only
/// recombines `L_UE` matrices and a user move only rebuilds the LoS basis.
pub struct FullOptEvaluator<T> {
    q_y: usize,
    q_z: usize,
    /// Per user-side path: `Σ_i gains_bs[i] bf[i] ḡ e^{j...}` over cells.
    basis: Vec<Vec<Complex<T>>>,
    buf: Vec<Complex<T>>,
}

impl<T: Real> FullOptEvaluator<T> {
    pub fn new(drop: &ChannelDrop<T>, cb: &CodebookConfig<T>) -> Self {
        let mut ev = Self {
            q_y: cb.q_y,
            q_z: cb.q_z,
            basis: vec![vec![Complex::new(T::zero(), T::zero()); cb.cell_count()];
                drop.irs_aods.len()],
            buf: vec![Complex::new(T::zero(), T::zero()); cb.cell_count()],
        };
        for j in 0..drop.irs_aods.len() {
            ev.rebuild_basis(drop, cb, j);
        }
        ev
    }

    fn rebuild_basis(&mut self, drop: &ChannelDrop<T>, cb: &CodebookConfig<T>, j: usize) {
        let (ay_j, az_j) = direction_cosines(drop.irs_aods[j]);
        let g_bar = cb.g_bar();
        let out = &mut self.basis[j];
        out.fill(Complex::new(T::zero(), T::zero()));
        for i in 0..drop.irs_aoas.len() {
            let (ay_i, az_i) = direction_cosines(drop.irs_aoas[i]);
            let w = drop.beamformer_gain_per_path[i].scale(drop.gains_bs[i] * g_bar);
            add_pair_outer(out, w, ay_i + ay_j, az_i + az_j, cb);
        }
    }

    /// Call after the drop's LoS departure direction changed.
    pub fn update_los(&mut self, drop: &ChannelDrop<T>, cb: &CodebookConfig<T>) {
        self.rebuild_basis(drop, cb, 0);
    }

    /// `Σ_q |c_q|` for the drop's current fading phases and user gains.
    pub fn gain_sum(&mut self, drop: &ChannelDrop<T>) -> T {
        let scales: Vec<Complex<T>> = drop
            .phases_ue
            .iter()
            .zip(&drop.gains_ue)
            .map(|(p, &g)| p.scale(g))
            .collect();
        self.buf.fill(Complex::new(T::zero(), T::zero()));
        for (j, basis) in self.basis.iter().enumerate() {
            let s = scales[j];
            for (cell, &b) in self.buf.iter_mut().zip(basis) {
                *cell += s * b;
            }
        }
        debug_assert_eq!(self.buf.len(), self.q_y * self.q_z);
        self.buf.iter().map(|c| c.norm()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{received_symbol, sample_drop, Scenario, SPEED_OF_LIGHT};
    use crate::geometry::{PlaneFrame, Vec3};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scenario() -> Scenario<f64> {
        let lambda = SPEED_OF_LIGHT / 28e9;
        Scenario {
            bs_pos: Vec3::new(0.0, 0.0, 10.0),
            irs_pos: Vec3::new(-40.0, 40.0, 5.0),
            bs_frame: PlaneFrame::bs_default(),
            irs_frame: PlaneFrame::irs_default(),
            n_bs_1: 4,
            n_bs_2: 12,
            bs_spacing: lambda / 2.0,
        }
    }

    fn chan_cfg(l: usize) -> ChannelConfig<f64> {
        ChannelConfig {
            l_bs: l,
            l_ue: l,
            k_factor: 3.0,
            sigma2: 1e-15,
            p_tx: 1.0,
            f_c: 28e9,
            scatter_spread: 60f64.to_radians(),
            seed: 0,
        }
    }

    fn codebook(m: usize, q: usize) -> CodebookConfig<f64> {
        let lambda = SPEED_OF_LIGHT / 28e9;
        CodebookConfig {
            m_y: m,
            m_z: m,
            q_y: q,
            q_z: q,
            d_y: lambda / 2.0,
            d_z: lambda / 2.0,
            wavelength: lambda,
            w: 2.0,
        }
    }

    fn user() -> Vec3<f64> {
        Vec3::new(-20.0, 20.0, 1.5)
    }

    #[test]
    fn sweep_evaluator_matches_direct_composite() {
        let cb = codebook(12, 32);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let drop = sample_drop(&scenario(), &chan_cfg(4), user(), &mut rng).unwrap();
        let ev = SweepEvaluator::new(&drop, &cb);
        for my in (0..12).step_by(3) {
            for mz in (0..12).step_by(4) {
                let cw = Codeword::new(my, mz);
                let fast = ev.response(cw, &drop.phases_ue);
                let direct = drop.noiseless_composite(cw, &cb);
                assert!(
                    (fast - direct).norm() <= 1e-9 * direct.norm().max(1e-30),
                    "{cw:?}: {fast} vs {direct}"
                );
            }
        }
    }

    #[test]
    fn fs_noise_free_picks_the_strongest_codeword() {
        let cb = codebook(12, 32);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let drop = sample_drop(&scenario(), &chan_cfg(1), user(), &mut rng).unwrap();
        let pilot = vec![num_complex::Complex::new(1.0, 0.0); 3];
        let picked = full_search_select(&drop, &cb, &pilot, 0.0, &mut rng);

        let mut best = (f64::NEG_INFINITY, Codeword::new(0, 0));
        for my in 0..12 {
            for mz in 0..12 {
                let cw = Codeword::new(my, mz);
                let g = crate::codebook::irs_response(cw, drop.irs_aoas[0], drop.irs_aods[0], &cb);
                if g.norm() > best.0 {
                    best = (g.norm(), cw);
                }
            }
        }
        assert_eq!(picked, best.1);
    }

    #[test]
    fn fs_noise_free_selection_is_power_scale_invariant() {
        let cb = codebook(10, 24);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let drop = sample_drop(&scenario(), &chan_cfg(4), user(), &mut rng).unwrap();
        let pick = |p_tx: f64| {
            let pilot = vec![num_complex::Complex::new(p_tx.sqrt(), 0.0); 3];
            let mut r = ChaCha8Rng::seed_from_u64(0);
            full_search_select(&drop, &cb, &pilot, 0.0, &mut r)
        };
        assert_eq!(pick(1.0), pick(1000.0));
    }

    #[test]
    fn fs_single_codeword_codebook() {
        let cb = codebook(1, 16);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let drop = sample_drop(&scenario(), &chan_cfg(2), user(), &mut rng).unwrap();
        let pilot = vec![num_complex::Complex::new(1.0, 0.0); 3];
        assert_eq!(
            full_search_select(&drop, &cb, &pilot, 1e-15, &mut rng),
            Codeword::new(0, 0)
        );
    }

    #[test]
    fn fs_matches_seeded_replay_oracle() {
        let cb = codebook(6, 16);
        let cfg = chan_cfg(3);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let drop = sample_drop(&scenario(), &cfg, user(), &mut rng).unwrap();
        let pilot = vec![num_complex::Complex::new(2.0, 0.0); 3];

        let mut fs_rng = ChaCha8Rng::seed_from_u64(77);
        let picked = full_search_select(&drop, &cb, &pilot, cfg.sigma2, &mut fs_rng);

        // Replay with the same stream through the direct channel path.
        let mut replay_rng = ChaCha8Rng::seed_from_u64(77);
        let mut best = (f64::NEG_INFINITY, Codeword::new(0, 0));
        for my in 0..6 {
            for mz in 0..6 {
                let cw = Codeword::new(my, mz);
                let mut power = 0.0;
                for &s in &pilot {
                    let n = noise_sample(cfg.sigma2, &mut replay_rng);
                    power += received_symbol(cw, &drop, &cb, s, n).norm_sqr();
                }
                if power > best.0 {
                    best = (power, cw);
                }
            }
        }
        assert_eq!(picked, best.1);
    }

    #[test]
    fn cascade_reproduces_codeword_responses() {
        let cb = codebook(10, 20);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let drop = sample_drop(&scenario(), &chan_cfg(4), user(), &mut rng).unwrap();
        let cascade = per_cell_cascade(&drop, &cb);
        let mut check_rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            use rand::Rng;
            let cw = Codeword::new(check_rng.gen_range(0..10), check_rng.gen_range(0..10));
            let via_cascade = cascade.codeword_response(cw, &cb);
            let direct = drop.noiseless_composite(cw, &cb);
            assert!(
                (via_cascade - direct).norm() <= 1e-9 * direct.norm().max(1e-30),
                "{cw:?}"
            );
        }
    }

    #[test]
    fn single_pair_single_cell_cascade_is_the_composite_gain() {
        let mut cb = codebook(1, 1);
        cb.q_y = 1;
        cb.q_z = 1;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let drop = sample_drop(&scenario(), &chan_cfg(1), user(), &mut rng).unwrap();
        let cascade = per_cell_cascade(&drop, &cb);
        assert_eq!(cascade.cells.len(), 1);
        let expected = drop.pair_weight(0, 0).scale(cb.g_bar());
        assert!((cascade.cells[0] - expected).norm() <= 1e-15 * expected.norm());
    }

    #[test]
    fn los_only_cascade_has_constant_cell_magnitude() {
        let cb = codebook(4, 16);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let drop = sample_drop(&scenario(), &chan_cfg(1), user(), &mut rng).unwrap();
        let cascade = per_cell_cascade(&drop, &cb);
        let first = cascade.cells[0].norm();
        for c in &cascade.cells {
            assert_relative_eq!(c.norm(), first, max_relative = 1e-12);
        }
    }

    #[test]
    fn optimal_phases_vanish_for_real_positive_cells() {
        let cascade = PerCellCascade {
            q_y: 2,
            q_z: 2,
            cells: vec![num_complex::Complex::new(1.0, 0.0); 4],
        };
        for p in cascade.optimal_phases() {
            assert_eq!(p, 0.0);
        }
        let cfg = chan_cfg(1);
        let snr = full_opt_snr(&cascade, &cfg);
        assert_relative_eq!(snr, 16.0 * cfg.p_tx / cfg.sigma2, max_relative = 1e-12);
    }

    #[test]
    fn single_cell_snr() {
        let cascade = PerCellCascade {
            q_y: 1,
            q_z: 1,
            cells: vec![num_complex::Complex::new(3e-6, -4e-6)],
        };
        let cfg = chan_cfg(1);
        assert_relative_eq!(
            full_opt_snr(&cascade, &cfg),
            25e-12 * cfg.p_tx / cfg.sigma2,
            max_relative = 1e-12
        );
    }

    #[test]
    fn full_opt_upper_bounds_every_codeword() {
        let cb = codebook(10, 24);
        let cfg = chan_cfg(4);
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let drop = sample_drop(&scenario(), &cfg, user(), &mut rng).unwrap();
            let bound = per_cell_cascade(&drop, &cb).magnitude_sum();
            let ev = SweepEvaluator::new(&drop, &cb);
            for my in 0..10 {
                for mz in 0..10 {
                    let resp = ev.response(Codeword::new(my, mz), &drop.phases_ue).norm();
                    assert!(
                        resp <= bound * (1.0 + 1e-9),
                        "seed {seed}, ({my},{mz}): {resp} > {bound}"
                    );
                }
            }
        }
    }

    #[test]
    fn incremental_evaluator_tracks_the_exact_cascade() {
        let cb = codebook(4, 20);
        let cfg = chan_cfg(4);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut drop = sample_drop(&scenario(), &cfg, user(), &mut rng).unwrap();
        let mut ev = FullOptEvaluator::new(&drop, &cb);
        assert_relative_eq!(
            ev.gain_sum(&drop),
            per_cell_cascade(&drop, &cb).magnitude_sum(),
            max_relative = 1e-10
        );
        // Fading refresh only.
        drop.refresh_small_scale(&mut rng);
        assert_relative_eq!(
            ev.gain_sum(&drop),
            per_cell_cascade(&drop, &cb).magnitude_sum(),
            max_relative = 1e-10
        );
        // User move requires an LoS basis rebuild.
        drop.retarget_user(&scenario(), &cfg, Vec3::new(-22.0, 17.0, 1.5))
            .unwrap();
        ev.update_los(&drop, &cb);
        assert_relative_eq!(
            ev.gain_sum(&drop),
            per_cell_cascade(&drop, &cb).magnitude_sum(),
            max_relative = 1e-10
        );
    }
}
