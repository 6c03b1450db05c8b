//! Deterministic three-stage user movement: radially into a circle, a
//! counter-clockwise arc on an inner circle, and radially back out, at
//! constant speed with randomized entry and exit angles.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{direction_from_vector, Direction, PlaneFrame, Vec3};
use crate::num::{self, Real};
use crate::{Error, Result};

/// Movement-model parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MobilityConfig<T> {
    /// Horizontal circle center; its z component is ignored.
    pub center: Vec3<T>,
    /// Outer radius (entry/exit) in meters.
    pub r: T,
    /// Inner orbit radius in meters.
    pub r_c: T,
    /// Speed in m/s.
    pub v: T,
    /// Antenna height: the z coordinate of every position.
    pub user_height: T,
    /// Seed recorded for reproducibility of the angle draws.
    pub seed: u64,
}

impl<T: Real> MobilityConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(T::zero() < self.r_c && self.r_c < self.r) {
            return Err(Error::Config("radii must satisfy 0 < r_c < r".into()));
        }
        if self.v <= T::zero() {
            return Err(Error::Config("speed must be positive".into()));
        }
        Ok(())
    }
}

/// A realized trajectory: entry angle, counter-clockwise arc sweep, exit
/// angle, and the three stage durations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T> {
    center: Vec3<T>,
    r: T,
    r_c: T,
    v: T,
    height: T,
    /// Angle (radians) at which the user crosses the outer circle inbound.
    pub entry_angle: T,
    /// Counter-clockwise sweep of the orbit stage, in [0, 2pi).
    pub arc: T,
    stage1_end: T,
    stage2_end: T,
    total: T,
}

/// Draws a trajectory: entry angle uniform on [0, 2pi), arc sweep uniform
/// on [0, 2pi) of counter-clockwise travel.
pub fn build_trajectory<T: Real, R: Rng + ?Sized>(
    cfg: &MobilityConfig<T>,
    rng: &mut R,
) -> Result<Trajectory<T>> {
    cfg.validate()?;
    let entry = num::uniform(rng, T::zero(), T::TAU());
    let arc = num::uniform(rng, T::zero(), T::TAU());
    Trajectory::with_angles(cfg, entry, arc)
}

impl<T: Real> Trajectory<T> {
    /// Builds the trajectory for explicit entry/arc angles. A zero arc
    /// degenerates to no orbit stage (not a full revolution).
    pub fn with_angles(cfg: &MobilityConfig<T>, entry_angle: T, arc: T) -> Result<Self> {
        cfg.validate()?;
        if arc < T::zero() || arc >= T::TAU() {
            return Err(Error::Config("arc sweep must lie in [0, 2pi)".into()));
        }
        let radial = (cfg.r - cfg.r_c) / cfg.v;
        let orbit = cfg.r_c * arc / cfg.v;
        Ok(Self {
            center: cfg.center,
            r: cfg.r,
            r_c: cfg.r_c,
            v: cfg.v,
            height: cfg.user_height,
            entry_angle,
            arc,
            stage1_end: radial,
            stage2_end: radial + orbit,
            total: radial + orbit + radial,
        })
    }

    pub fn total_duration(&self) -> T {
        self.total
    }

    pub fn stage_boundaries(&self) -> (T, T) {
        (self.stage1_end, self.stage2_end)
    }

    /// Angle at which the user leaves the circle, wrapped to [0, 2pi).
    pub fn exit_angle(&self) -> T {
        let a = self.entry_angle + self.arc;
        a - (a / T::TAU()).floor() * T::TAU()
    }

    fn at_polar(&self, radius: T, angle: T) -> Vec3<T> {
        Vec3::new(
            self.center.x + radius * angle.cos(),
            self.center.y + radius * angle.sin(),
            self.height,
        )
    }

    /// Position at time `t` in `[0, total_duration]`.
    pub fn position_at(&self, t: T) -> Result<Vec3<T>> {
        if t < T::zero() || t > self.total || !t.is_finite() {
            return Err(Error::TimeOutOfRange {
                t: t.to_f64_lossy(),
                total: self.total.to_f64_lossy(),
            });
        }
        if t <= self.stage1_end {
            return Ok(self.at_polar(self.r - self.v * t, self.entry_angle));
        }
        if t <= self.stage2_end {
            let angle = self.entry_angle + self.v * (t - self.stage1_end) / self.r_c;
            return Ok(self.at_polar(self.r_c, angle));
        }
        let out = self.r_c + self.v * (t - self.stage2_end);
        Ok(self.at_polar(out, self.entry_angle + self.arc))
    }
}

/// Direction from an array to the user at time `t`.
pub fn true_direction_at<T: Real>(
    traj: &Trajectory<T>,
    t: T,
    array_pos: Vec3<T>,
    array_frame: &PlaneFrame<T>,
) -> Result<Direction<T>> {
    direction_from_vector(traj.position_at(t)? - array_pos, array_frame)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn reference_cfg() -> MobilityConfig<f64> {
        MobilityConfig {
            center: Vec3::new(-20.0, 20.0, 0.0),
            r: 15.0,
            r_c: 7.5,
            v: 5.0 / 3.6,
            user_height: 1.5,
            seed: 0,
        }
    }

    #[test]
    fn radial_stage_duration_matches_substitution() {
        // (r - r_c) / v = 7.5 m / (5 km/h) = 5.4 s.
        let traj = Trajectory::with_angles(&reference_cfg(), 1.0, 2.0).unwrap();
        let (s1, _) = traj.stage_boundaries();
        assert_relative_eq!(s1, 5.4, epsilon = 1e-12);
    }

    #[test]
    fn endpoints_lie_on_the_outer_circle() {
        let cfg = reference_cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let traj = build_trajectory(&cfg, &mut rng).unwrap();
            for t in [0.0, traj.total_duration()] {
                let p = traj.position_at(t).unwrap();
                let d = ((p.x - cfg.center.x).powi(2) + (p.y - cfg.center.y).powi(2)).sqrt();
                assert_relative_eq!(d, cfg.r, epsilon = 1e-9);
                assert_eq!(p.z, cfg.user_height);
            }
        }
    }

    #[test]
    fn orbit_stage_stays_on_inner_circle() {
        let cfg = reference_cfg();
        let traj = Trajectory::with_angles(&cfg, 0.7, 4.0).unwrap();
        let (s1, s2) = traj.stage_boundaries();
        for k in 0..=20 {
            let t = s1 + (s2 - s1) * k as f64 / 20.0;
            let p = traj.position_at(t).unwrap();
            let d = ((p.x - cfg.center.x).powi(2) + (p.y - cfg.center.y).powi(2)).sqrt();
            assert_relative_eq!(d, cfg.r_c, epsilon = 1e-12);
        }
    }

    #[test]
    fn orbit_midpoint_angle_matches_arc_length() {
        let cfg = reference_cfg();
        let traj = Trajectory::with_angles(&cfg, 0.3, 3.0).unwrap();
        let (s1, s2) = traj.stage_boundaries();
        let mid = (s1 + s2) / 2.0;
        let p = traj.position_at(mid).unwrap();
        let expected = 0.3 + cfg.v * (mid - s1) / cfg.r_c;
        let angle = (p.y - cfg.center.y).atan2(p.x - cfg.center.x);
        let wrap = |a: f64| a.rem_euclid(std::f64::consts::TAU);
        assert_relative_eq!(wrap(angle), wrap(expected), epsilon = 1e-12);
        assert_relative_eq!(expected, 0.3 + 1.5, epsilon = 1e-12);
    }

    #[test]
    fn zero_arc_degenerates_to_in_and_out() {
        let cfg = reference_cfg();
        let traj = Trajectory::with_angles(&cfg, 1.1, 0.0).unwrap();
        let (s1, s2) = traj.stage_boundaries();
        assert_eq!(s1, s2);
        assert_relative_eq!(traj.total_duration(), 10.8, epsilon = 1e-12);
        assert_relative_eq!(traj.exit_angle(), 1.1);
    }

    #[test]
    fn out_of_range_times_rejected() {
        let traj = Trajectory::with_angles(&reference_cfg(), 0.0, 1.0).unwrap();
        assert!(matches!(
            traj.position_at(-1e-9),
            Err(Error::TimeOutOfRange { .. })
        ));
        assert!(traj.position_at(traj.total_duration() + 1e-9).is_err());
        assert!(traj.position_at(f64::NAN).is_err());
    }

    #[test]
    fn speed_is_constant_away_from_stage_boundaries() {
        let cfg = reference_cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let traj = build_trajectory(&cfg, &mut rng).unwrap();
        let (s1, s2) = traj.stage_boundaries();
        let total = traj.total_duration();
        let h = 1e-6;
        let mut checked = 0;
        for k in 0..10_000 {
            let t = (k as f64 + 0.5) / 10_000.0 * (total - 2.0 * h) + h;
            // Skip a small window around each boundary.
            if (t - s1).abs() < 2.0 * h || (t - s2).abs() < 2.0 * h {
                continue;
            }
            let a = traj.position_at(t - h).unwrap();
            let b = traj.position_at(t + h).unwrap();
            let speed = (b - a).norm() / (2.0 * h);
            assert!(
                (speed - cfg.v).abs() < 1e-3 * cfg.v,
                "t={t}: speed {speed} vs {}",
                cfg.v
            );
            checked += 1;
        }
        assert!(checked > 9_000);
    }

    #[test]
    fn position_is_continuous_across_stage_boundaries() {
        let cfg = reference_cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let traj = build_trajectory(&cfg, &mut rng).unwrap();
            let (s1, s2) = traj.stage_boundaries();
            for b in [s1, s2] {
                let eps = 1e-10;
                let before = traj.position_at(b - eps).unwrap();
                let after = traj.position_at(b + eps).unwrap();
                assert!((after - before).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn direction_drift_per_block_stays_under_one_beamwidth() {
        // Over any 0.15 s window the direction seen from the IRS moves by
        // less than 180/70 degrees per angle for the default scenario.
        let cfg = reference_cfg();
        let irs_pos = Vec3::new(-40.0, 40.0, 5.0);
        let frame = PlaneFrame::irs_default();
        let beamwidth = (180.0f64 / 70.0).to_radians();
        let block = 0.15;
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..5 {
            let traj = build_trajectory(&cfg, &mut rng).unwrap();
            let total = traj.total_duration();
            let steps = 400;
            for k in 0..steps {
                let t = k as f64 / steps as f64 * (total - block);
                let d0 = true_direction_at(&traj, t, irs_pos, &frame).unwrap();
                let d1 = true_direction_at(&traj, t + block, irs_pos, &frame).unwrap();
                let drift = (d1.theta - d0.theta).abs().max((d1.phi - d0.phi).abs());
                assert!(
                    drift < beamwidth,
                    "t={t}: drift {drift} rad exceeds beamwidth {beamwidth}"
                );
            }
        }
    }

    #[test]
    fn default_circle_stays_in_irs_front_half_space() {
        let cfg = reference_cfg();
        let irs_pos = Vec3::new(-40.0, 40.0, 5.0);
        let frame = PlaneFrame::irs_default();
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let traj = build_trajectory(&cfg, &mut rng).unwrap();
        let total = traj.total_duration();
        for k in 0..=500 {
            let t = total * k as f64 / 500.0;
            assert!(true_direction_at(&traj, t, irs_pos, &frame).is_ok());
        }
    }
}
