//! Quadratic IRS phase-shift codebook: per-cell phases, factorized response
//! evaluation, main-lobe directions with a persistent cache, and candidate
//! sets for direction estimation.

use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::geometry::{direction_cosines, Direction};
use crate::num::Real;
use crate::{Error, Result};

/// Quadratic-codebook parameters for a `Q_y x Q_z`-cell surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodebookConfig<T> {
    /// Codeword counts per axis.
    pub m_y: usize,
    pub m_z: usize,
    /// Unit-cell counts per axis.
    pub q_y: usize,
    pub q_z: usize,
    /// Unit-cell pitch in meters.
    pub d_y: T,
    pub d_z: T,
    /// Carrier wavelength in meters.
    pub wavelength: T,
    /// Beamwidth parameter, `w >= 0`; larger values widen the beams.
    pub w: T,
}

/// The two in-plane axes of the surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Y,
    Z,
}

impl<T: Real> CodebookConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.m_y < 1 || self.m_z < 1 || self.q_y < 1 || self.q_z < 1 {
            return Err(Error::Config("codebook and cell counts must be >= 1".into()));
        }
        if self.d_y <= T::zero() || self.d_z <= T::zero() || self.wavelength <= T::zero() {
            return Err(Error::Config("cell pitch and wavelength must be positive".into()));
        }
        if self.w < T::zero() {
            return Err(Error::Config("beamwidth parameter w must be >= 0".into()));
        }
        Ok(())
    }

    /// Total number of codewords `M = M_y * M_z`.
    pub fn codeword_count(&self) -> usize {
        self.m_y * self.m_z
    }

    /// Total number of unit cells `Q = Q_y * Q_z`.
    pub fn cell_count(&self) -> usize {
        self.q_y * self.q_z
    }

    fn axis_counts(&self, axis: Axis) -> (usize, usize) {
        match axis {
            Axis::Y => (self.m_y, self.q_y),
            Axis::Z => (self.m_z, self.q_z),
        }
    }

    fn pitch(&self, axis: Axis) -> T {
        match axis {
            Axis::Y => self.d_y,
            Axis::Z => self.d_z,
        }
    }

    /// Codeword-grid step `Δβ = 2 / M_i`.
    pub fn delta_beta(&self, axis: Axis) -> T {
        T::of(2.0) / T::of_usize(self.axis_counts(axis).0)
    }

    /// Linear phase-slope coefficient `β_{i,m} = -1 + m Δβ_i`.
    pub fn beta(&self, axis: Axis, m: usize) -> T {
        -T::one() + T::of_usize(m) * self.delta_beta(axis)
    }

    /// Aperture gain factor `ḡ = 4π d_y d_z / λ²`.
    pub fn g_bar(&self) -> T {
        T::of(4.0) * T::PI() * self.d_y * self.d_z / (self.wavelength * self.wavelength)
    }
}

/// Codeword index tuple `(m_y, m_z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Codeword {
    pub m_y: usize,
    pub m_z: usize,
}

impl Codeword {
    pub fn new(m_y: usize, m_z: usize) -> Self {
        Self { m_y, m_z }
    }
}

/// Phase shift of unit cell `(q_y, q_z)` under a codeword:
/// `ω = -π [ (w Δβ_y / 2Q_y) q_y² + β_{y,m_y} q_y ]
///     -π [ (w Δβ_z / 2Q_z) q_z² + β_{z,m_z} q_z ]`.
pub fn codeword_phase<T: Real>(
    cw: Codeword,
    q_y: usize,
    q_z: usize,
    cfg: &CodebookConfig<T>,
) -> T {
    debug_assert!(cw.m_y < cfg.m_y && cw.m_z < cfg.m_z);
    debug_assert!(q_y < cfg.q_y && q_z < cfg.q_z);
    let term = |axis: Axis, m: usize, q: usize| {
        let (_, q_count) = cfg.axis_counts(axis);
        let qf = T::of_usize(q);
        let curvature = cfg.w * cfg.delta_beta(axis) / (T::of(2.0) * T::of_usize(q_count));
        -T::PI() * (curvature * qf * qf + cfg.beta(axis, m) * qf)
    };
    term(Axis::Y, cw.m_y, q_y) + term(Axis::Z, cw.m_z, q_z)
}

/// One-axis factor of the IRS response: the chirped exponential sum
/// `Σ_q exp(j [ (2π d/λ) a_sum q + ω_axis(q, m) ])` over the `Q_i` cells of
/// one axis, where `a_sum` is the sum of incoming and outgoing direction
/// cosines along that axis.
///
/// Evaluated by phase recurrence (two complex multiplies per cell instead of
/// a sincos); accumulated rounding stays below 1e-12 relative for cell
/// counts in the hundreds.
pub fn axis_factor<T: Real>(cfg: &CodebookConfig<T>, axis: Axis, m: usize, a_sum: T) -> Complex<T> {
    let (_, q_count) = cfg.axis_counts(axis);
    let d = cfg.pitch(axis);
    // Total per-cell phase is a*q - b*q^2.
    let a = T::TAU() * d * a_sum / cfg.wavelength - T::PI() * cfg.beta(axis, m);
    let b = T::PI() * cfg.w * cfg.delta_beta(axis) / (T::of(2.0) * T::of_usize(q_count));

    let mut sum = Complex::new(T::one(), T::zero()); // q = 0 term
    let mut z = Complex::new(T::one(), T::zero());
    // Phase increment from q to q+1 is a - b(2q+1); it advances by -2b per step.
    let mut rot = Complex::from_polar(T::one(), a - b);
    let decay = Complex::from_polar(T::one(), -T::of(2.0) * b);
    for _ in 1..q_count {
        z *= rot;
        rot *= decay;
        sum += z;
    }
    sum
}

/// IRS response for a codeword and an incoming/outgoing direction pair,
/// evaluated as `ḡ` times the product of the two per-axis factors
/// (cost `O(Q_y + Q_z)`).
pub fn irs_response<T: Real>(
    cw: Codeword,
    psi_in: Direction<T>,
    psi_out: Direction<T>,
    cfg: &CodebookConfig<T>,
) -> Complex<T> {
    let (ay_in, az_in) = direction_cosines(psi_in);
    let (ay_out, az_out) = direction_cosines(psi_out);
    irs_response_from_cosine_sums(cw, ay_in + ay_out, az_in + az_out, cfg)
}

/// [`irs_response`] with the direction-cosine sums already formed.
pub fn irs_response_from_cosine_sums<T: Real>(
    cw: Codeword,
    a_y_sum: T,
    a_z_sum: T,
    cfg: &CodebookConfig<T>,
) -> Complex<T> {
    let sy = axis_factor(cfg, Axis::Y, cw.m_y, a_y_sum);
    let sz = axis_factor(cfg, Axis::Z, cw.m_z, a_z_sum);
    sy * sz * cfg.g_bar()
}

/// All in-range codewords within Chebyshev distance `gamma` of `current`,
/// in lexicographic `(m_y, m_z)` order. Clips at the codebook edges.
pub fn candidate_set<T: Real>(
    current: Codeword,
    gamma: usize,
    cfg: &CodebookConfig<T>,
) -> Vec<Codeword> {
    let lo = |m: usize| m.saturating_sub(gamma);
    let hi = |m: usize, count: usize| (m + gamma).min(count - 1);
    let mut out = Vec::new();
    for my in lo(current.m_y)..=hi(current.m_y, cfg.m_y) {
        for mz in lo(current.m_z)..=hi(current.m_z, cfg.m_z) {
            out.push(Codeword::new(my, mz));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Main-lobe search
// ---------------------------------------------------------------------------

/// Coarse search grid resolution per angle (points across the open
/// front half-space).
const COARSE_GRID: usize = 181;
/// Resolution of the tabulated per-axis factor magnitudes over the
/// cosine-sum range [-2, 2].
const AXIS_TABLE_POINTS: usize = 4001;
/// Local refinement stops once the search bracket per axis is below this
/// width (radians).
const REFINE_TOL: f64 = 1e-5;
/// Cache file format version; bumped whenever the search parameters change.
const CACHE_VERSION: u32 = 1;

/// Shared machinery for locating main lobes: tabulated per-axis factor
/// magnitudes and the coarse direction grid (precomputed once per
/// `(config, psi_in)` and reused across codewords).
struct LobeSearcher<'a, T> {
    cfg: &'a CodebookConfig<T>,
    a_in: (T, T),
    /// Coarse grid angles (radians), shared by both axes.
    angles: Vec<T>,
    /// Per grid point: nearest axis-table indices for the two cosine sums.
    grid_ix: Vec<(u16, u16)>,
    /// `mags_y[m][i]` = |S_y| at cosine sum `x_i` for codeword component `m`.
    mags_y: Vec<Vec<T>>,
    mags_z: Vec<Vec<T>>,
}

const AXIS_TABLE_LO: f64 = -2.0;
const AXIS_TABLE_HI: f64 = 2.0;

impl<'a, T: Real> LobeSearcher<'a, T> {
    fn new(cfg: &'a CodebookConfig<T>, psi_in: Direction<T>) -> Self {
        let a_in = direction_cosines(psi_in);
        let step = T::of((AXIS_TABLE_HI - AXIS_TABLE_LO) / (AXIS_TABLE_POINTS - 1) as f64);
        let x0 = T::of(AXIS_TABLE_LO);

        let table_for = |axis: Axis, m_count: usize| -> Vec<Vec<T>> {
            (0..m_count)
                .into_par_iter()
                .map(|m| {
                    (0..AXIS_TABLE_POINTS)
                        .map(|i| {
                            let x = x0 + step * T::of_usize(i);
                            axis_factor(cfg, axis, m, x).norm()
                        })
                        .collect()
                })
                .collect()
        };
        let mags_y = table_for(Axis::Y, cfg.m_y);
        let mags_z = table_for(Axis::Z, cfg.m_z);

        // Grid points sit strictly inside the open half-space.
        let n = COARSE_GRID;
        let angles: Vec<T> = (0..n)
            .map(|i| {
                let deg = -90.0 + (i as f64 + 0.5) * 180.0 / n as f64;
                T::of(deg).to_radians()
            })
            .collect();

        let to_index = |x: T| -> u16 {
            let idx = ((x - x0) / step).round();
            let max = T::of_usize(AXIS_TABLE_POINTS - 1);
            idx.max(T::zero()).min(max).to_f64_lossy() as u16
        };
        let mut grid_ix = Vec::with_capacity(n * n);
        for &theta in &angles {
            for &phi in &angles {
                let (a1, a2) = direction_cosines(Direction { theta, phi });
                grid_ix.push((to_index(a_in.0 + a1), to_index(a_in.1 + a2)));
            }
        }

        Self {
            cfg,
            a_in,
            angles,
            grid_ix,
            mags_y,
            mags_z,
        }
    }

    /// Exact response magnitude toward an outgoing direction.
    fn gain(&self, cw: Codeword, theta: T, phi: T) -> T {
        let (a1, a2) = direction_cosines(Direction { theta, phi });
        let sy = axis_factor(self.cfg, Axis::Y, cw.m_y, self.a_in.0 + a1);
        let sz = axis_factor(self.cfg, Axis::Z, cw.m_z, self.a_in.1 + a2);
        sy.norm() * sz.norm()
    }

    fn locate(&self, cw: Codeword) -> Direction<T> {
        let ty = &self.mags_y[cw.m_y];
        let tz = &self.mags_z[cw.m_z];
        let n = self.angles.len();

        let mut best = T::neg_infinity();
        let mut best_pt = (0usize, 0usize);
        for (g, &(iy, iz)) in self.grid_ix.iter().enumerate() {
            let score = ty[iy as usize] * tz[iz as usize];
            if score > best {
                best = score;
                best_pt = (g / n, g % n);
            }
        }

        // Alternating 1-D golden-section refinement around the coarse cell.
        let cell = self.angles[1] - self.angles[0];
        let half = T::FRAC_PI_2() - T::of(1e-7);
        let bracket = |c: T| {
            let w = cell * T::of(1.5);
            ((c - w).max(-half), (c + w).min(half))
        };
        let mut theta = self.angles[best_pt.0];
        let mut phi = self.angles[best_pt.1];
        for _ in 0..3 {
            let (lo, hi) = bracket(theta);
            theta = golden_max(|t| self.gain(cw, t, phi), lo, hi, T::of(REFINE_TOL));
            let (lo, hi) = bracket(phi);
            phi = golden_max(|p| self.gain(cw, theta, p), lo, hi, T::of(REFINE_TOL));
        }
        Direction { theta, phi }
    }
}

/// Golden-section maximization of a unimodal function on `[lo, hi]`.
fn golden_max<T: Real>(f: impl Fn(T) -> T, mut lo: T, mut hi: T, tol: T) -> T {
    let inv_phi = T::of(0.618_033_988_749_894_9);
    let mut x1 = hi - (hi - lo) * inv_phi;
    let mut x2 = lo + (hi - lo) * inv_phi;
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + (hi - lo) * inv_phi;
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - (hi - lo) * inv_phi;
            f1 = f(x1);
        }
    }
    (lo + hi) / T::of(2.0)
}

/// Outgoing direction of maximum reflection gain for one codeword: coarse
/// grid search over the front half-space followed by local refinement.
///
/// For repeated queries build a [`MainLobeTable`] once instead; this entry
/// point redoes the shared precomputation on every call.
pub fn main_lobe_direction<T: Real>(
    cw: Codeword,
    cfg: &CodebookConfig<T>,
    psi_in: Direction<T>,
) -> Direction<T> {
    LobeSearcher::new(cfg, psi_in).locate(cw)
}

/// Main-lobe directions of every codeword in a codebook for a fixed
/// incoming direction, with nearest-direction lookup support.
#[derive(Debug, Clone)]
pub struct MainLobeTable<T> {
    pub psi_in: Direction<T>,
    m_y: usize,
    m_z: usize,
    /// Main-lobe direction per codeword, `m_y`-major.
    directions: Vec<Direction<T>>,
    /// Per-`m_y` row: (theta min, theta max, phi min, phi max) bounds used
    /// to prune nearest-direction scans.
    row_bounds: Vec<(T, T, T, T)>,
    key: String,
}

impl<T: Real> MainLobeTable<T> {
    /// Cache key covering every input the table depends on.
    pub fn cache_key(cfg: &CodebookConfig<T>, psi_in: Direction<T>) -> String {
        let mut h = Sha256::new();
        h.update(CACHE_VERSION.to_le_bytes());
        for n in [cfg.m_y, cfg.m_z, cfg.q_y, cfg.q_z, COARSE_GRID, AXIS_TABLE_POINTS] {
            h.update((n as u64).to_le_bytes());
        }
        for v in [
            cfg.d_y,
            cfg.d_z,
            cfg.wavelength,
            cfg.w,
            psi_in.theta,
            psi_in.phi,
        ] {
            h.update(v.to_f64_lossy().to_le_bytes());
        }
        let digest = h.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Locates every codeword's main lobe (parallel over codewords).
    pub fn build(cfg: &CodebookConfig<T>, psi_in: Direction<T>) -> Self {
        let searcher = LobeSearcher::new(cfg, psi_in);
        let directions: Vec<Direction<T>> = (0..cfg.codeword_count())
            .into_par_iter()
            .map(|i| searcher.locate(Codeword::new(i / cfg.m_z, i % cfg.m_z)))
            .collect();
        Self::from_directions(cfg, psi_in, directions)
    }

    fn from_directions(
        cfg: &CodebookConfig<T>,
        psi_in: Direction<T>,
        directions: Vec<Direction<T>>,
    ) -> Self {
        let row_bounds = (0..cfg.m_y)
            .map(|my| {
                let row = &directions[my * cfg.m_z..(my + 1) * cfg.m_z];
                let mut b = (
                    T::infinity(),
                    T::neg_infinity(),
                    T::infinity(),
                    T::neg_infinity(),
                );
                for d in row {
                    b.0 = b.0.min(d.theta);
                    b.1 = b.1.max(d.theta);
                    b.2 = b.2.min(d.phi);
                    b.3 = b.3.max(d.phi);
                }
                b
            })
            .collect();
        Self {
            psi_in,
            m_y: cfg.m_y,
            m_z: cfg.m_z,
            directions,
            row_bounds,
            key: Self::cache_key(cfg, psi_in),
        }
    }

    pub fn codeword_counts(&self) -> (usize, usize) {
        (self.m_y, self.m_z)
    }

    pub fn get(&self, cw: Codeword) -> Direction<T> {
        self.directions[cw.m_y * self.m_z + cw.m_z]
    }

    pub fn key(&self) -> &str {
        &self.key
    }

    /// Codeword whose main lobe minimizes the squared angle distance
    /// `‖target − Ψ(m)‖²`; ties resolve to the smallest `(m_y, m_z)`.
    ///
    /// Rows are pruned with bounding boxes; the result is identical to a
    /// full lexicographic scan.
    pub fn nearest_codeword(&self, target: Direction<T>) -> Codeword {
        let mut best = T::infinity();
        let mut best_cw = Codeword::new(0, 0);
        for my in 0..self.m_y {
            let (t_lo, t_hi, p_lo, p_hi) = self.row_bounds[my];
            let dt = (t_lo - target.theta).max(target.theta - t_hi).max(T::zero());
            let dp = (p_lo - target.phi).max(target.phi - p_hi).max(T::zero());
            if dt * dt + dp * dp > best {
                continue;
            }
            for mz in 0..self.m_z {
                let d = self.directions[my * self.m_z + mz];
                let dt = d.theta - target.theta;
                let dp = d.phi - target.phi;
                let dist = dt * dt + dp * dp;
                if dist < best {
                    best = dist;
                    best_cw = Codeword::new(my, mz);
                }
            }
        }
        best_cw
    }

    /// Writes the table as a text file headed by its cache key.
    pub fn save(&self, path: &Path) -> Result<()> {
        let err = |e| Error::io(path.display().to_string(), e);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(err)?;
        }
        let mut body = String::new();
        body.push_str("# irs-track main-lobe table\n");
        body.push_str(&format!("# key {}\n", self.key));
        body.push_str(&format!(
            "# psi_in {:.17e} {:.17e}\n",
            self.psi_in.theta.to_f64_lossy(),
            self.psi_in.phi.to_f64_lossy()
        ));
        body.push_str(&format!("# counts {} {}\n", self.m_y, self.m_z));
        for my in 0..self.m_y {
            for mz in 0..self.m_z {
                let d = self.directions[my * self.m_z + mz];
                body.push_str(&format!(
                    "{my} {mz} {:.17e} {:.17e}\n",
                    d.theta.to_f64_lossy(),
                    d.phi.to_f64_lossy()
                ));
            }
        }
        let mut f = std::fs::File::create(path).map_err(err)?;
        f.write_all(body.as_bytes()).map_err(err)?;
        Ok(())
    }

    /// Loads a table if the file exists and its key matches; `Ok(None)` on
    /// missing file or stale/corrupt contents (callers then rebuild).
    pub fn load(
        cfg: &CodebookConfig<T>,
        psi_in: Direction<T>,
        path: &Path,
    ) -> Result<Option<Self>> {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(Error::io(path.display().to_string(), e)),
        };
        let expected = Self::cache_key(cfg, psi_in);
        let mut key_ok = false;
        let mut directions = vec![Direction::broadside(); cfg.codeword_count()];
        let mut seen = 0usize;
        for line in text.lines() {
            if let Some(rest) = line.strip_prefix("# key ") {
                key_ok = rest.trim() == expected;
                continue;
            }
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let parse = |s: Option<&str>| s.and_then(|v| v.parse::<f64>().ok());
            let (Some(my), Some(mz), Some(th), Some(ph)) = (
                parts.next().and_then(|v| v.parse::<usize>().ok()),
                parts.next().and_then(|v| v.parse::<usize>().ok()),
                parse(parts.next()),
                parse(parts.next()),
            ) else {
                return Ok(None);
            };
            if my >= cfg.m_y || mz >= cfg.m_z {
                return Ok(None);
            }
            directions[my * cfg.m_z + mz] = Direction {
                theta: T::of(th),
                phi: T::of(ph),
            };
            seen += 1;
        }
        if !key_ok || seen != cfg.codeword_count() {
            return Ok(None);
        }
        Ok(Some(Self::from_directions(cfg, psi_in, directions)))
    }

    /// Cache file path inside `cache_dir` for this `(config, psi_in)`.
    pub fn cache_path(cfg: &CodebookConfig<T>, psi_in: Direction<T>, cache_dir: &Path) -> PathBuf {
        cache_dir.join(format!("main_lobes_{}.txt", Self::cache_key(cfg, psi_in)))
    }

    /// Loads the cached table or rebuilds and persists it. Returns the table
    /// and whether it came from the cache.
    pub fn load_or_build(
        cfg: &CodebookConfig<T>,
        psi_in: Direction<T>,
        cache_dir: &Path,
    ) -> Result<(Self, bool)> {
        let path = Self::cache_path(cfg, psi_in, cache_dir);
        if let Some(table) = Self::load(cfg, psi_in, &path)? {
            return Ok((table, true));
        }
        let table = Self::build(cfg, psi_in);
        table.save(&path)?;
        Ok((table, false))
    }
}
