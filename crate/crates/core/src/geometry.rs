//! Coordinate conventions, direction parameterization, direction cosines,
//! and UPA steering vectors.
//!
//! An array lying in the plane spanned by two orthonormal in-plane axes
//! `u1`, `u2` with outward normal `u3` sees a ray `v` (with positive normal
//! component) under the angle pair `θ = arctan(⟨v,u1⟩/⟨v,u3⟩)`,
//! `φ = arctan(⟨v,u2⟩/⟨v,u3⟩)`. Both angles live in the open interval
//! `(−π/2, π/2)`; the closed boundary is the array plane itself.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::num::Real;
use crate::{Error, Result};

/// Cartesian 3-vector (meters for positions, dimensionless for unit rays).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Vec3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Self) -> Self {
        Self::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(self) -> T {
        self.dot(self).sqrt()
    }

    pub fn scale(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    /// Unit vector along `self`; errors on (near-)zero input.
    pub fn normalized(self) -> Result<Self> {
        let n = self.norm();
        if n <= T::zero() || !n.is_finite() {
            return Err(Error::DegenerateGeometry);
        }
        Ok(self.scale(T::one() / n))
    }
}

impl<T: Real> std::ops::Add for Vec3<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl<T: Real> std::ops::Sub for Vec3<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl<T: Real> std::ops::Neg for Vec3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

/// Angle pair `(θ, φ)` parameterizing a ray in the open front half-space of
/// an array plane. Radians internally; degrees only at I/O boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction<T> {
    pub theta: T,
    pub phi: T,
}

impl<T: Real> Direction<T> {
    /// Builds a direction, rejecting angles outside `(−π/2, π/2)`.
    pub fn new(theta: T, phi: T) -> Result<Self> {
        let half = T::FRAC_PI_2();
        if theta.abs() >= half || phi.abs() >= half || !theta.is_finite() || !phi.is_finite() {
            return Err(Error::Config(format!(
                "direction angles ({theta}, {phi}) rad outside the open front half-space"
            )));
        }
        Ok(Self { theta, phi })
    }

    pub fn broadside() -> Self {
        Self {
            theta: T::zero(),
            phi: T::zero(),
        }
    }

    pub fn from_degrees(theta_deg: T, phi_deg: T) -> Result<Self> {
        Self::new(theta_deg.to_radians(), phi_deg.to_radians())
    }

    pub fn theta_deg(self) -> T {
        self.theta.to_degrees()
    }

    pub fn phi_deg(self) -> T {
        self.phi.to_degrees()
    }
}

/// Orthonormal right-handed triple `(u1, u2, u3)`: two in-plane axes and the
/// outward normal of an array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneFrame<T> {
    pub axis_u1: Vec3<T>,
    pub axis_u2: Vec3<T>,
    pub normal_u3: Vec3<T>,
}

impl<T: Real> PlaneFrame<T> {
    /// Builds a frame, checking orthonormality and right-handedness
    /// (`u1 × u2 = u3`) to 1e-9.
    pub fn new(axis_u1: Vec3<T>, axis_u2: Vec3<T>, normal_u3: Vec3<T>) -> Result<Self> {
        let tol = T::of(1e-9);
        let unit = |v: Vec3<T>| (v.norm() - T::one()).abs() < tol;
        if !unit(axis_u1) || !unit(axis_u2) || !unit(normal_u3) {
            return Err(Error::Config("frame axes must be unit vectors".into()));
        }
        if axis_u1.dot(axis_u2).abs() > tol
            || axis_u1.dot(normal_u3).abs() > tol
            || axis_u2.dot(normal_u3).abs() > tol
        {
            return Err(Error::Config("frame axes must be pairwise orthogonal".into()));
        }
        let handed = axis_u1.cross(axis_u2) - normal_u3;
        if handed.norm() > tol {
            return Err(Error::Config("frame must be right-handed (u1 x u2 = u3)".into()));
        }
        Ok(Self {
            axis_u1,
            axis_u2,
            normal_u3,
        })
    }

    /// BS array frame: the UPA lies in the x-z plane and faces +y.
    /// Axis order (z, x, y) keeps the triple right-handed.
    pub fn bs_default() -> Self {
        Self {
            axis_u1: Vec3::new(T::zero(), T::zero(), T::one()),
            axis_u2: Vec3::new(T::one(), T::zero(), T::zero()),
            normal_u3: Vec3::new(T::zero(), T::one(), T::zero()),
        }
    }

    /// IRS frame: unit cells lie in the y-z plane and face +x.
    pub fn irs_default() -> Self {
        Self {
            axis_u1: Vec3::new(T::zero(), T::one(), T::zero()),
            axis_u2: Vec3::new(T::zero(), T::zero(), T::one()),
            normal_u3: Vec3::new(T::one(), T::zero(), T::zero()),
        }
    }
}

/// Angle pair of a vector seen from an array frame.
///
/// Rejects vectors with non-positive normal component (at or behind the
/// array plane).
pub fn direction_from_vector<T: Real>(v: Vec3<T>, frame: &PlaneFrame<T>) -> Result<Direction<T>> {
    let c3 = v.dot(frame.normal_u3);
    if c3 <= T::zero() || !c3.is_finite() {
        return Err(Error::BehindArray {
            normal_component: c3.to_f64_lossy(),
        });
    }
    let theta = (v.dot(frame.axis_u1) / c3).atan();
    let phi = (v.dot(frame.axis_u2) / c3).atan();
    Ok(Direction { theta, phi })
}

/// World-coordinate unit vector for a direction in the given frame.
pub fn unit_vector_from_direction<T: Real>(d: Direction<T>, frame: &PlaneFrame<T>) -> Vec3<T> {
    let t1 = d.theta.tan();
    let t2 = d.phi.tan();
    let inv = T::one() / (T::one() + t1 * t1 + t2 * t2).sqrt();
    (frame.axis_u1.scale(t1) + frame.axis_u2.scale(t2) + frame.normal_u3).scale(inv)
}

/// Direction cosines of the unit ray along the two in-plane axes:
/// components of the unit vector on `u1` and `u2`.
///
/// Each lies in `(−1, 1)` and `A1² + A2² < 1` on the open half-space.
pub fn direction_cosines<T: Real>(d: Direction<T>) -> (T, T) {
    let t1 = d.theta.tan();
    let t2 = d.phi.tan();
    let inv = T::one() / (T::one() + t1 * t1 + t2 * t2).sqrt();
    (t1 * inv, t2 * inv)
}

/// Inverse of [`direction_cosines`]: the direction whose unit ray has the
/// given in-plane components. Requires `a1² + a2² < 1`.
pub fn direction_from_cosines<T: Real>(a1: T, a2: T) -> Result<Direction<T>> {
    let r2 = a1 * a1 + a2 * a2;
    if r2 >= T::one() {
        return Err(Error::Config(format!(
            "direction cosines ({a1}, {a2}) outside the open unit disk"
        )));
    }
    let u3 = (T::one() - r2).sqrt();
    Direction::new((a1 / u3).atan(), (a2 / u3).atan())
}

/// UPA steering vector of size `n1 * n2` for element spacing `spacing`
/// (meters) at wavelength `wavelength`.
///
/// Element `(k1, k2)` (linear index `k1 * n2 + k2`) has unit modulus and
/// phase `2π/λ · spacing · (A1·k1 + A2·k2)`.
pub fn upa_steering_vector<T: Real>(
    d: Direction<T>,
    n1: usize,
    n2: usize,
    spacing: T,
    wavelength: T,
) -> Vec<Complex<T>> {
    let (a1, a2) = direction_cosines(d);
    let k = T::TAU() / wavelength * spacing;
    let mut v = Vec::with_capacity(n1 * n2);
    for k1 in 0..n1 {
        for k2 in 0..n2 {
            let phase = k * (a1 * T::of_usize(k1) + a2 * T::of_usize(k2));
            v.push(Complex::from_polar(T::one(), phase));
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn irs() -> PlaneFrame<f64> {
        PlaneFrame::irs_default()
    }

    #[test]
    fn broadside_maps_to_zero_angles() {
        let f = irs();
        let d = direction_from_vector(f.normal_u3, &f).unwrap();
        assert_relative_eq!(d.theta, 0.0);
        assert_relative_eq!(d.phi, 0.0);
    }

    #[test]
    fn diagonal_in_u1_u3_plane_is_45_deg() {
        let f = irs();
        let v = (f.axis_u1 + f.normal_u3).scale(1.0 / 2.0f64.sqrt());
        let d = direction_from_vector(v, &f).unwrap();
        assert_relative_eq!(d.theta, FRAC_PI_4, epsilon = 1e-15);
        assert_relative_eq!(d.phi, 0.0);
    }

    #[test]
    fn user_position_relative_to_irs() {
        // User at [-40+3, 40, 5+4] m with the IRS at [-40, 40, 5]:
        // offset (3, 0, 4), so u1=y component 0, u2=z component 4, normal
        // x component 3.
        let f = irs();
        let p_irs = Vec3::new(-40.0, 40.0, 5.0);
        let p_user = Vec3::new(-37.0, 40.0, 9.0);
        let d = direction_from_vector(p_user - p_irs, &f).unwrap();
        assert_relative_eq!(d.theta, (0.0f64 / 3.0).atan(), epsilon = 1e-15);
        assert_relative_eq!(d.phi, (4.0f64 / 3.0).atan(), epsilon = 1e-15);
    }

    #[test]
    fn rejects_vectors_behind_the_array() {
        let f = irs();
        let behind = Vec3::new(-1.0, 0.3, 0.2);
        assert!(matches!(
            direction_from_vector(behind, &f),
            Err(Error::BehindArray { .. })
        ));
        let in_plane = Vec3::new(0.0, 1.0, 0.0);
        assert!(direction_from_vector(in_plane, &f).is_err());
    }

    #[test]
    fn cosines_at_broadside_and_45_deg() {
        let (a1, a2) = direction_cosines(Direction::<f64>::broadside());
        assert_relative_eq!(a1, 0.0);
        assert_relative_eq!(a2, 0.0);

        let d = Direction::new(FRAC_PI_4, 0.0).unwrap();
        let (a1, a2) = direction_cosines(d);
        assert_relative_eq!(a1, 1.0 / 2.0f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(a2, 0.0);
    }

    /// In-plane cosine formulas written in terms of a polar/azimuth
    /// decomposition of the ray. The azimuth here is measured from the u2
    /// axis, so its cos goes with u2 and its sin with u1; singular where
    /// tan(phi) = 0.
    fn polar_azimuth_cosines(theta: f64, phi: f64) -> (f64, f64) {
        let alpha = (phi.tan().powi(2) + theta.tan().powi(2)).sqrt().atan();
        let eps = (theta.tan() / phi.tan()).atan() + PI / 2.0 * (1.0 - phi.tan().signum());
        (alpha.sin() * eps.cos(), alpha.sin() * eps.sin())
    }

    #[test]
    fn cosines_match_polar_azimuth_oracle_away_from_singular_lines() {
        // (30 deg, 20 deg): projection oracle plus the alpha/eps cross-check.
        let d = Direction::from_degrees(30.0f64, 20.0).unwrap();
        let (a1, a2) = direction_cosines(d);

        let t1 = d.theta.tan();
        let t2 = d.phi.tan();
        let n = (1.0 + t1 * t1 + t2 * t2).sqrt();
        assert_relative_eq!(a1, t1 / n, epsilon = 1e-15);
        assert_relative_eq!(a2, t2 / n, epsilon = 1e-15);

        // The azimuth convention puts the u2 component on cos and the u1
        // component on sin.
        let (c_along_u2, c_along_u1) = polar_azimuth_cosines(d.theta, d.phi);
        assert_relative_eq!(a1, c_along_u1, epsilon = 1e-12);
        assert_relative_eq!(a2, c_along_u2, epsilon = 1e-12);
    }

    #[test]
    fn cosine_norm_matches_reconstructed_polar_angle() {
        for &(th, ph) in &[(0.3f64, -0.7), (-1.1, 0.2), (0.9, 0.9), (1e-3, 1.4)] {
            let d = Direction::new(th, ph).unwrap();
            let (a1, a2) = direction_cosines(d);
            let alpha = (ph.tan().powi(2) + th.tan().powi(2)).sqrt().atan();
            assert_relative_eq!(a1 * a1 + a2 * a2, alpha.sin().powi(2), epsilon = 1e-10);
        }
    }

    #[test]
    fn steering_vector_broadside_is_all_ones() {
        let v = upa_steering_vector(Direction::<f64>::broadside(), 3, 4, 0.005, 0.01);
        assert_eq!(v.len(), 12);
        for e in v {
            assert_relative_eq!(e.re, 1.0, epsilon = 1e-15);
            assert_relative_eq!(e.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn steering_vector_single_element() {
        let d = Direction::new(0.4, -0.2).unwrap();
        let v = upa_steering_vector(d, 1, 1, 0.005, 0.01);
        assert_eq!(v.len(), 1);
        assert_relative_eq!(v[0].re, 1.0);
        assert_relative_eq!(v[0].im, 0.0);
    }

    #[test]
    fn steering_vector_two_element_phase() {
        // (pi/4, 0) at half-wavelength spacing: second element at phase
        // pi/sqrt(2) along the 2-element axis.
        let lam = 0.0107;
        let d = Direction::new(FRAC_PI_4, 0.0).unwrap();
        let v = upa_steering_vector(d, 2, 1, lam / 2.0, lam);
        let expected = Complex::from_polar(1.0, PI / 2.0f64.sqrt());
        assert_relative_eq!(v[1].re, expected.re, epsilon = 1e-12);
        assert_relative_eq!(v[1].im, expected.im, epsilon = 1e-12);
    }

    #[test]
    fn steering_vector_norm_is_element_count() {
        let d = Direction::new(0.7, -0.3).unwrap();
        let v = upa_steering_vector(d, 12, 4, 0.0053, 0.0107);
        let norm_sq: f64 = v.iter().map(|e| e.norm_sqr()).sum();
        assert_relative_eq!(norm_sq, 48.0, epsilon = 1e-12);
    }

    #[test]
    fn round_trip_direction_vector_direction() {
        let f = PlaneFrame::<f64>::bs_default();
        for &(th, ph) in &[(0.0, 0.0), (0.5, -0.9), (-1.4, 1.2), (1.5, 1.5)] {
            let d = Direction::new(th, ph).unwrap();
            let v = unit_vector_from_direction(d, &f);
            assert_relative_eq!(v.norm(), 1.0, epsilon = 1e-12);
            let back = direction_from_vector(v, &f).unwrap();
            assert_relative_eq!(back.theta, th, epsilon = 1e-10);
            assert_relative_eq!(back.phi, ph, epsilon = 1e-10);
        }
    }

    #[test]
    fn default_frames_are_valid() {
        let b = PlaneFrame::<f64>::bs_default();
        PlaneFrame::new(b.axis_u1, b.axis_u2, b.normal_u3).unwrap();
        let i = PlaneFrame::<f64>::irs_default();
        PlaneFrame::new(i.axis_u1, i.axis_u2, i.normal_u3).unwrap();
        // Left-handed triple rejected.
        assert!(PlaneFrame::new(i.axis_u2, i.axis_u1, i.normal_u3).is_err());
    }

    #[test]
    fn cosines_round_trip_through_inverse() {
        for &(a1, a2) in &[(0.0, 0.0), (0.25, 0.5), (-0.8, 0.3), (0.6, -0.6)] {
            let d = direction_from_cosines::<f64>(a1, a2).unwrap();
            let (b1, b2) = direction_cosines(d);
            assert_relative_eq!(b1, a1, epsilon = 1e-12);
            assert_relative_eq!(b2, a2, epsilon = 1e-12);
        }
        assert!(direction_from_cosines::<f64>(0.8, 0.7).is_err());
    }

    #[test]
    fn works_at_f32() {
        let d = Direction::<f32>::new(0.5, -0.25).unwrap();
        let (a1, a2) = direction_cosines(d);
        assert!(a1 * a1 + a2 * a2 < 1.0);
        let v = upa_steering_vector(d, 4, 4, 0.005f32, 0.01);
        let norm_sq: f32 = v.iter().map(|e| e.norm_sqr()).sum();
        assert!((norm_sq - 16.0).abs() < 1e-4);
    }
}
