//! Codeword-based user tracking: GLRT direction estimation over a local
//! hypothesis grid, polynomial extrapolation of past estimates, and
//! selection of the codeword whose main lobe is nearest the prediction.

use std::collections::VecDeque;

use num_complex::Complex;

use crate::codebook::{axis_factor, Axis, Codeword, CodebookConfig, MainLobeTable};
use crate::geometry::{direction_cosines, Direction};
use crate::num::Real;
use crate::{Error, Result};

/// Pilot observations collected for one candidate codeword during a
/// direction-estimation frame.
#[derive(Debug, Clone, PartialEq)]
pub struct IdeMeasurement<T> {
    pub codeword: Codeword,
    /// Received samples, one per pilot symbol.
    pub samples: Vec<Complex<T>>,
    /// Transmitted pilot sequence (constant modulus, `|s_i|^2 = P_TX`).
    pub pilot: Vec<Complex<T>>,
    /// Time the surface was reconfigured to this codeword (seconds).
    pub timestamp: T,
}

/// Rectangular set of direction hypotheses: the Cartesian product of
/// per-axis angle lists centered on a codeword's main lobe.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisGrid<T> {
    pub thetas: Vec<T>,
    pub phis: Vec<T>,
}

impl<T: Real> HypothesisGrid<T> {
    pub fn len(&self) -> usize {
        self.thetas.len() * self.phis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty() || self.phis.is_empty()
    }

    /// Hypotheses in lexicographic `(theta, phi)` order.
    pub fn iter(&self) -> impl Iterator<Item = Direction<T>> + '_ {
        self.thetas.iter().flat_map(move |&theta| {
            self.phis.iter().map(move |&phi| Direction { theta, phi })
        })
    }

    /// Per-axis spacing between adjacent hypotheses, radians.
    pub fn cell_size(&self) -> (T, T) {
        let step = |v: &[T]| {
            if v.len() < 2 {
                T::zero()
            } else {
                v[1] - v[0]
            }
        };
        (step(&self.thetas), step(&self.phis))
    }
}

/// Grid offsets in degrees for one axis with `m_count` codewords:
/// `(n (2γ+1)/(H−1) − 0.5 − γ) · 180° / m_count` for `n = 0..H-1`.
pub fn hypothesis_offsets_deg<T: Real>(gamma: usize, h_per_axis: usize, m_count: usize) -> Vec<T> {
    let span = T::of_usize(2 * gamma + 1);
    let beam = T::of(180.0) / T::of_usize(m_count);
    let h1 = T::of_usize(h_per_axis - 1);
    (0..h_per_axis)
        .map(|n| (T::of_usize(n) * span / h1 - T::of(0.5) - T::of_usize(gamma)) * beam)
        .collect()
}

/// Builds the hypothesis grid around the main lobe of the currently
/// employed codeword. Angles are clamped to the open front half-space.
pub fn build_hypothesis_grid<T: Real>(
    current: Codeword,
    gamma: usize,
    h_per_axis: usize,
    table: &MainLobeTable<T>,
) -> Result<HypothesisGrid<T>> {
    if h_per_axis < 2 {
        return Err(Error::Config("hypothesis grid needs H >= 2 per axis".into()));
    }
    let (m_y, m_z) = table.codeword_counts();
    let lobe = table.get(current);
    let clamp_half = T::FRAC_PI_2() - T::of(1e-9);
    let axis = |center: T, m: usize| -> Vec<T> {
        hypothesis_offsets_deg::<T>(gamma, h_per_axis, m)
            .into_iter()
            .map(|off| (center + off.to_radians()).max(-clamp_half).min(clamp_half))
            .collect()
    };
    Ok(HypothesisGrid {
        thetas: axis(lobe.theta, m_y),
        phis: axis(lobe.phi, m_z),
    })
}

/// Per-measurement statistics that do not depend on the hypothesis.
struct MeasurementStats<T> {
    /// `s^H y`.
    pilot_sample_corr: Complex<T>,
    /// `‖s‖²`.
    pilot_energy: T,
    /// `‖y‖²`.
    sample_energy: T,
}

fn measurement_stats<T: Real>(meas: &[IdeMeasurement<T>]) -> Vec<MeasurementStats<T>> {
    meas.iter()
        .map(|m| {
            let mut corr = Complex::new(T::zero(), T::zero());
            let mut es = T::zero();
            let mut ey = T::zero();
            for (s, y) in m.pilot.iter().zip(&m.samples) {
                corr += s.conj() * y;
                es += s.norm_sqr();
                ey += y.norm_sqr();
            }
            MeasurementStats {
                pilot_sample_corr: corr,
                pilot_energy: es,
                sample_energy: ey,
            }
        })
        .collect()
}

/// IRS responses of every measurement's codeword for one direction
/// hypothesis, sharing per-axis factors across codewords.
fn responses_at<T: Real>(
    meas: &[IdeMeasurement<T>],
    hyp: Direction<T>,
    psi_bs: Direction<T>,
    cfg: &CodebookConfig<T>,
) -> Vec<Complex<T>> {
    let (ay_b, az_b) = direction_cosines(psi_bs);
    let (ay_h, az_h) = direction_cosines(hyp);
    let (ay, az) = (ay_b + ay_h, az_b + az_h);
    let mut s_y: Vec<(usize, Complex<T>)> = Vec::new();
    let mut s_z: Vec<(usize, Complex<T>)> = Vec::new();
    let g_bar = cfg.g_bar();
    meas.iter()
        .map(|m| {
            let sy = match s_y.iter().find(|(my, _)| *my == m.codeword.m_y) {
                Some((_, v)) => *v,
                None => {
                    let v = axis_factor(cfg, Axis::Y, m.codeword.m_y, ay);
                    s_y.push((m.codeword.m_y, v));
                    v
                }
            };
            let sz = match s_z.iter().find(|(mz, _)| *mz == m.codeword.m_z) {
                Some((_, v)) => *v,
                None => {
                    let v = axis_factor(cfg, Axis::Z, m.codeword.m_z, az);
                    s_z.push((m.codeword.m_z, v));
                    v
                }
            };
            sy * sz * g_bar
        })
        .collect()
}

fn estimate_from_responses<T: Real>(
    stats: &[MeasurementStats<T>],
    responses: &[Complex<T>],
) -> Option<Complex<T>> {
    let mut num = Complex::new(T::zero(), T::zero());
    let mut den = T::zero();
    for (st, g) in stats.iter().zip(responses) {
        num += g.conj() * st.pilot_sample_corr;
        den += st.pilot_energy * g.norm_sqr();
    }
    if den <= T::zero() {
        return None;
    }
    Some(num / den)
}

fn residual_from_responses<T: Real>(
    stats: &[MeasurementStats<T>],
    responses: &[Complex<T>],
    h: Complex<T>,
) -> T {
    let mut acc = T::zero();
    for (st, g) in stats.iter().zip(responses) {
        let c = h * *g;
        acc += st.sample_energy - T::of(2.0) * (c.conj() * st.pilot_sample_corr).re
            + c.norm_sqr() * st.pilot_energy;
    }
    acc
}

/// Closed-form nuisance channel estimate for a direction hypothesis:
/// `h = Σ_m g_m^* (s^H y_m) / Σ_m ‖s‖² |g_m|²`.
///
/// The denominator uses the measured pilot energy of each measurement
/// (equal to `N_IDE · P_TX` under the constant-modulus pilot convention),
/// which makes the estimate invariant to a common rescaling of pilots and
/// observations. `None` flags a degenerate hypothesis whose response is
/// zero at every candidate codeword.
pub fn glrt_channel_estimate<T: Real>(
    meas: &[IdeMeasurement<T>],
    hyp: Direction<T>,
    psi_bs: Direction<T>,
    cfg: &CodebookConfig<T>,
) -> Option<Complex<T>> {
    let stats = measurement_stats(meas);
    let responses = responses_at(meas, hyp, psi_bs, cfg);
    estimate_from_responses(&stats, &responses)
}

/// Residual `Σ_m ‖y_m − h g_m s‖²` at a hypothesis with a given channel
/// value; `None` if the hypothesis is degenerate and `h` is taken from it.
pub fn glrt_residual<T: Real>(
    meas: &[IdeMeasurement<T>],
    hyp: Direction<T>,
    psi_bs: Direction<T>,
    cfg: &CodebookConfig<T>,
    h: Option<Complex<T>>,
) -> Option<T> {
    let stats = measurement_stats(meas);
    let responses = responses_at(meas, hyp, psi_bs, cfg);
    let h = match h {
        Some(h) => h,
        None => estimate_from_responses(&stats, &responses)?,
    };
    Some(residual_from_responses(&stats, &responses, h))
}

/// GLRT direction estimate: the hypothesis minimizing the least-squares
/// residual after substituting the closed-form channel estimate.
///
/// Degenerate hypotheses are excluded; ties resolve to the smallest
/// `(theta, phi)` in lexicographic order.
pub fn glrt_estimate_direction<T: Real>(
    meas: &[IdeMeasurement<T>],
    grid: &HypothesisGrid<T>,
    psi_bs: Direction<T>,
    cfg: &CodebookConfig<T>,
) -> Result<Direction<T>> {
    if meas.is_empty() || grid.is_empty() {
        return Err(Error::Config("GLRT needs measurements and a non-empty grid".into()));
    }
    let stats = measurement_stats(meas);
    let mut best: Option<(T, Direction<T>)> = None;
    for hyp in grid.iter() {
        let responses = responses_at(meas, hyp, psi_bs, cfg);
        let Some(h) = estimate_from_responses(&stats, &responses) else {
            continue;
        };
        let r = residual_from_responses(&stats, &responses, h);
        // Strict < keeps the first (lexicographically smallest) on ties.
        if best.is_none_or(|(b, _)| r < b) {
            best = Some((r, hyp));
        }
    }
    best.map(|(_, d)| d).ok_or(Error::AllHypothesesDegenerate)
}

/// Per-angle polynomial extrapolation of the user direction, in time
/// shifted by `time_origin`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPolynomial<T> {
    /// Constant-first coefficients, length `order + 1`.
    pub coeffs_theta: Vec<T>,
    pub coeffs_phi: Vec<T>,
    /// Times are shifted by this origin (the newest fitted timestamp)
    /// before evaluation.
    pub time_origin: T,
}

impl<T: Real> TrajectoryPolynomial<T> {
    pub fn order(&self) -> usize {
        self.coeffs_theta.len() - 1
    }
}

/// Ring buffer of the most recent direction estimates with their block
/// start times.
#[derive(Debug, Clone)]
pub struct EstimateHistory<T> {
    entries: VecDeque<(T, Direction<T>)>,
    capacity: usize,
}

impl<T: Real> EstimateHistory<T> {
    pub fn new(capacity: usize) -> Self {
        Self {
            entries: VecDeque::with_capacity(capacity + 1),
            capacity: capacity.max(1),
        }
    }

    /// Appends an estimate; timestamps must be strictly increasing.
    pub fn push(&mut self, t: T, estimate: Direction<T>) -> Result<()> {
        if let Some(&(last, _)) = self.entries.back() {
            if t <= last {
                return Err(Error::Config(format!(
                    "history timestamps must increase: {t} after {last}"
                )));
            }
        }
        self.entries.push_back((t, estimate));
        while self.entries.len() > self.capacity {
            self.entries.pop_front();
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(T, Direction<T>)> {
        self.entries.iter()
    }

    pub fn newest_time(&self) -> Option<T> {
        self.entries.back().map(|&(t, _)| t)
    }
}

/// Solves the least-squares polynomial fit through `(times, values)` via
/// the normal equations, times shifted by `origin`. Returns constant-first
/// coefficients of length `order + 1`.
fn polyfit<T: Real>(times: &[T], values: &[T], order: usize, origin: T) -> Vec<T> {
    let n = order + 1;
    let mut ata = vec![T::zero(); n * n];
    let mut atb = vec![T::zero(); n];
    for (&t, &v) in times.iter().zip(values) {
        let tau = t - origin;
        let mut powers = Vec::with_capacity(n);
        let mut p = T::one();
        for _ in 0..n {
            powers.push(p);
            p *= tau;
        }
        for r in 0..n {
            for c in 0..n {
                ata[r * n + c] += powers[r] * powers[c];
            }
            atb[r] += powers[r] * v;
        }
    }
    solve_linear(&mut ata, &mut atb, n);
    atb
}

/// In-place Gaussian elimination with partial pivoting on an `n x n`
/// system; the solution lands in `b`.
fn solve_linear<T: Real>(a: &mut [T], b: &mut [T], n: usize) {
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if a[row * n + col].abs() > a[pivot * n + col].abs() {
                pivot = row;
            }
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let diag = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / diag;
            for k in col..n {
                let v = a[col * n + k];
                a[row * n + k] -= factor * v;
            }
            b[row] -= factor * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in col + 1..n {
            acc -= a[col * n + k] * b[k];
        }
        b[col] = acc / a[col * n + col];
    }
}

/// Least-squares polynomial through the history, per angle independently.
///
/// The effective order is `min(order, S' − 1)` so the system stays full
/// rank while the history is still filling up.
pub fn fit_trajectory<T: Real>(
    history: &EstimateHistory<T>,
    order: usize,
) -> Result<TrajectoryPolynomial<T>> {
    if history.is_empty() {
        return Err(Error::Config("cannot fit an empty estimate history".into()));
    }
    let n_eff = order.min(history.len() - 1);
    let origin = history.newest_time().unwrap();
    let times: Vec<T> = history.iter().map(|&(t, _)| t).collect();
    let thetas: Vec<T> = history.iter().map(|&(_, d)| d.theta).collect();
    let phis: Vec<T> = history.iter().map(|&(_, d)| d.phi).collect();
    Ok(TrajectoryPolynomial {
        coeffs_theta: polyfit(&times, &thetas, n_eff, origin),
        coeffs_phi: polyfit(&times, &phis, n_eff, origin),
        time_origin: origin,
    })
}

/// Mean squared angle error of a fitted polynomial over a history.
pub fn fit_mse<T: Real>(history: &EstimateHistory<T>, poly: &TrajectoryPolynomial<T>) -> T {
    let mut acc = T::zero();
    for &(t, d) in history.iter() {
        let p = predict_direction(poly, t);
        acc += (p.theta - d.theta) * (p.theta - d.theta) + (p.phi - d.phi) * (p.phi - d.phi);
    }
    acc / T::of_usize(history.len())
}

/// Horner evaluation of both angle polynomials at `t`. Extrapolated angles
/// are clamped into the open front half-space.
pub fn predict_direction<T: Real>(poly: &TrajectoryPolynomial<T>, t: T) -> Direction<T> {
    let tau = t - poly.time_origin;
    let horner = |c: &[T]| {
        let mut acc = T::zero();
        for &coeff in c.iter().rev() {
            acc = acc * tau + coeff;
        }
        acc
    };
    let clamp_half = T::FRAC_PI_2() - T::of(1e-9);
    Direction {
        theta: horner(&poly.coeffs_theta).max(-clamp_half).min(clamp_half),
        phi: horner(&poly.coeffs_phi).max(-clamp_half).min(clamp_half),
    }
}

/// Codeword whose main lobe is closest (squared angle distance) to the
/// predicted direction; ties resolve to the smallest `(m_y, m_z)`.
pub fn select_codeword<T: Real>(predicted: Direction<T>, table: &MainLobeTable<T>) -> Codeword {
    table.nearest_codeword(predicted)
}
