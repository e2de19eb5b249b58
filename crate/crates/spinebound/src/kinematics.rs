//! Leg kinematics: five-bar inverse kinematics, action clamping, spine coupling.
//!
//! Each leg is a planar five-bar linkage driven by two cranks whose pivots sit
//! `hip_separation` apart on the body. The closed chain is solved as two 2R
//! serial branches, one per crank, with a fixed elbow branch per side so the
//! mechanism keeps its diamond shape and never flips through a singular fold.
//!
//! Conventions:
//! * The generic 2R solver ([`solve_2r_ik`] / [`forward_kinematics_leg`])
//!   measures angles counter-clockwise from the +x axis; the elbow angle is
//!   relative to the first link. A straight-down pose is a shoulder of -pi/2.
//! * Leg-frame quantities (crank angles, polar endpoints) measure angles from
//!   straight down, positive swinging toward +x (forward). A polar endpoint
//!   (r, alpha) sits at (r*sin(alpha), -r*cos(alpha)) in the leg frame, whose
//!   origin is the midpoint between the two crank pivots.
//! * Joint limits are ranges about configurable nominal (assembly) angles,
//!   not about zero; see [`JointLimits`].

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Radial margin (m) kept between any solved pose and a kinematic singularity
/// (full extension or full fold of a 2R branch).
pub const SINGULARITY_MARGIN: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KinematicsError {
    #[error("target at distance {dist:.4} m outside reachable annulus [{min:.4}, {max:.4}] m")]
    UnreachableTarget { dist: f64, min: f64, max: f64 },
    #[error("target at distance {dist:.4} m within {margin:.4} m of a singular pose")]
    NearSingular { dist: f64, margin: f64 },
    #[error("joint `{joint}` at {angle:.4} rad outside [{min:.4}, {max:.4}] rad")]
    JointLimitViolation {
        joint: &'static str,
        angle: f64,
        min: f64,
        max: f64,
    },
}

/// Which side of the shoulder-to-target chord the elbow sits on.
///
/// `Down` places the elbow at a lower y than the `Up` branch for the same
/// target (elbow joint angle is positive for `Down`, negative for `Up`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElbowBranch {
    Up,
    Down,
}

/// Five-bar leg geometry. All lengths in meters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct LegGeometry {
    /// Crank (upper link) length of each 2R branch.
    pub upper_link: f64,
    /// Coupler (lower link) length of each 2R branch.
    pub lower_link: f64,
    /// Distance between the two actuated crank pivots.
    pub hip_separation: f64,
    /// Nominal hip-to-toe length at full extension (design datum).
    pub total_leg_length: f64,
}

impl Default for LegGeometry {
    fn default() -> Self {
        // Symmetric five-bar consistent with a 245 mm fully extended leg.
        Self {
            upper_link: 0.1225,
            lower_link: 0.1225,
            hip_separation: 0.04,
            total_leg_length: 0.245,
        }
    }
}

impl LegGeometry {
    pub fn validate(&self) -> Result<(), String> {
        let all = [
            self.upper_link,
            self.lower_link,
            self.hip_separation,
            self.total_leg_length,
        ];
        if all[0] <= 0.0 || all[1] <= 0.0 || all[3] <= 0.0 || all[2] < 0.0 {
            return Err("leg geometry lengths must be positive".into());
        }
        Ok(())
    }

    /// Maximum branch reach (shoulder to foot).
    pub fn reach(&self) -> f64 {
        self.upper_link + self.lower_link
    }
}

/// Foot target in leg-frame polar coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarEndpoint {
    /// Radial distance of the foot from the leg origin (m).
    pub r: f64,
    /// Polar angle from straight down, positive forward (rad).
    pub alpha: f64,
}

impl PolarEndpoint {
    /// Cartesian leg-frame position: x forward, y up, foot below the origin.
    pub fn to_cartesian(self) -> Vector2<f64> {
        Vector2::new(self.r * self.alpha.sin(), -self.r * self.alpha.cos())
    }
}

/// Joint limit model: each joint must stay within `range` of its nominal
/// (assembly) angle. Nominals are nonzero because the limits describe servo
/// travel about the standing pose, not about a fully extended leg.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct JointLimits {
    pub hip_zero: f64,
    pub hip_range: f64,
    pub knee_zero: f64,
    pub knee_range: f64,
    pub spine_range: f64,
}

impl Default for JointLimits {
    fn default() -> Self {
        Self {
            // Centers of the default action box image under five_bar_ik.
            hip_zero: 0.485,
            knee_zero: -1.177,
            hip_range: 45f64.to_radians(),
            knee_range: 70f64.to_radians(),
            spine_range: 15f64.to_radians(),
        }
    }
}

impl JointLimits {
    fn check(&self, joint: &'static str, angle: f64, zero: f64, range: f64) -> Result<(), KinematicsError> {
        if (angle - zero).abs() > range + 1e-12 {
            return Err(KinematicsError::JointLimitViolation {
                joint,
                angle,
                min: zero - range,
                max: zero + range,
            });
        }
        Ok(())
    }
}

/// Whole-robot joint command: serial-equivalent hip/knee targets for the two
/// effective leg pairs plus the coupled spine pair. Angles are absolute joint
/// coordinates (hip from body-down, knee relative to the thigh).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointCommand {
    pub hip_front: f64,
    pub knee_front: f64,
    pub hip_rear: f64,
    pub knee_rear: f64,
    pub spine_front: f64,
    pub spine_rear: f64,
}

impl JointCommand {
    pub fn validate(&self, limits: &JointLimits) -> Result<(), KinematicsError> {
        limits.check("hip_front", self.hip_front, limits.hip_zero, limits.hip_range)?;
        limits.check("hip_rear", self.hip_rear, limits.hip_zero, limits.hip_range)?;
        limits.check("knee_front", self.knee_front, limits.knee_zero, limits.knee_range)?;
        limits.check("knee_rear", self.knee_rear, limits.knee_zero, limits.knee_range)?;
        limits.check("spine_front", self.spine_front, 0.0, limits.spine_range)?;
        limits.check("spine_rear", self.spine_rear, 0.0, limits.spine_range)?;
        if (self.spine_front + self.spine_rear).abs() > 1e-12 {
            return Err(KinematicsError::JointLimitViolation {
                joint: "spine_rear",
                angle: self.spine_rear,
                min: -self.spine_front,
                max: -self.spine_front,
            });
        }
        Ok(())
    }
}

/// Forward kinematics of a planar 2R chain, the closed-form inverse of
/// [`solve_2r_ik`]. Shoulder measured CCW from +x; elbow relative to link 1.
pub fn forward_kinematics_leg(shoulder: f64, elbow: f64, l1: f64, l2: f64) -> Vector2<f64> {
    let a = shoulder;
    let b = shoulder + elbow;
    Vector2::new(l1 * a.cos() + l2 * b.cos(), l1 * a.sin() + l2 * b.sin())
}

/// Closed-form planar 2R inverse kinematics for a requested elbow branch.
///
/// Fails with `UnreachableTarget` outside the reachable annulus and with
/// `NearSingular` inside the annulus but within [`SINGULARITY_MARGIN`] of
/// full extension or full fold.
pub fn solve_2r_ik(
    target: Vector2<f64>,
    l1: f64,
    l2: f64,
    branch: ElbowBranch,
) -> Result<(f64, f64), KinematicsError> {
    solve_2r_ik_margin(target, l1, l2, branch, SINGULARITY_MARGIN)
}

pub fn solve_2r_ik_margin(
    target: Vector2<f64>,
    l1: f64,
    l2: f64,
    branch: ElbowBranch,
    margin: f64,
) -> Result<(f64, f64), KinematicsError> {
    let dist = target.norm();
    let min = (l1 - l2).abs();
    let max = l1 + l2;
    if dist > max || dist < min {
        return Err(KinematicsError::UnreachableTarget { dist, min, max });
    }
    if dist > max - margin || dist < min + margin {
        return Err(KinematicsError::NearSingular { dist, margin });
    }

    let chord = target.y.atan2(target.x);
    // Interior angles of the (l1, l2, dist) triangle via the law of cosines.
    let cos_shoulder = ((l1 * l1 + dist * dist - l2 * l2) / (2.0 * l1 * dist)).clamp(-1.0, 1.0);
    let cos_elbow_int = ((l1 * l1 + l2 * l2 - dist * dist) / (2.0 * l1 * l2)).clamp(-1.0, 1.0);
    let gamma = cos_shoulder.acos();
    let elbow_mag = std::f64::consts::PI - cos_elbow_int.acos();
    Ok(match branch {
        ElbowBranch::Down => (chord - gamma, elbow_mag),
        ElbowBranch::Up => (chord + gamma, -elbow_mag),
    })
}

/// Solution of the five-bar closure for one foot target.
///
/// `crank_front`/`crank_rear` are the two actuated pivot angles (leg frame,
/// from straight down). `knee_front`/`knee_rear` are the passive elbow angles
/// of each branch relative to its crank; the pair `(crank_front, knee_front)`
/// is the serial-equivalent hip/knee command used by the dynamics model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiveBarSolution {
    pub crank_front: f64,
    pub crank_rear: f64,
    pub knee_front: f64,
    pub knee_rear: f64,
}

const HALF_PI: f64 = std::f64::consts::FRAC_PI_2;

/// Five-bar inverse kinematics: crank angles placing the foot at `endpoint`.
///
/// The front branch uses the elbow-up solution and the rear branch elbow-down,
/// which spreads the two passive knees outward (the front branch's own knee
/// joint then always bends backward). Limits are checked for the
/// serial-equivalent pair against `limits` when provided.
pub fn five_bar_ik(
    endpoint: PolarEndpoint,
    geom: &LegGeometry,
    limits: Option<&JointLimits>,
) -> Result<FiveBarSolution, KinematicsError> {
    let foot = endpoint.to_cartesian();
    let half = 0.5 * geom.hip_separation;
    let front_pivot = Vector2::new(half, 0.0);
    let rear_pivot = Vector2::new(-half, 0.0);

    let (sf, ef) = solve_2r_ik(foot - front_pivot, geom.upper_link, geom.lower_link, ElbowBranch::Up)?;
    let (sr, er) = solve_2r_ik(foot - rear_pivot, geom.upper_link, geom.lower_link, ElbowBranch::Down)?;

    let sol = FiveBarSolution {
        crank_front: sf + HALF_PI,
        crank_rear: sr + HALF_PI,
        knee_front: ef,
        knee_rear: er,
    };
    if let Some(lim) = limits {
        lim.check("hip", sol.crank_front, lim.hip_zero, lim.hip_range)?;
        lim.check("knee", sol.knee_front, lim.knee_zero, lim.knee_range)?;
        // The rear branch mirrors the front; its limits mirror accordingly.
        lim.check("hip", sol.crank_rear, -lim.hip_zero, lim.hip_range)?;
        lim.check("knee", sol.knee_rear, -lim.knee_zero, lim.knee_range)?;
    }
    Ok(sol)
}

/// Closed-chain forward kinematics: foot position from the two crank angles.
///
/// Independent of [`five_bar_ik`]: the passive knees are placed from the
/// cranks and the foot recovered as the lower intersection of the two coupler
/// circles. Used as the round-trip oracle.
pub fn five_bar_fk(
    crank_front: f64,
    crank_rear: f64,
    geom: &LegGeometry,
) -> Result<Vector2<f64>, KinematicsError> {
    let half = 0.5 * geom.hip_separation;
    let leg_dir = |theta: f64| Vector2::new(theta.sin(), -theta.cos());
    let knee_f = Vector2::new(half, 0.0) + geom.upper_link * leg_dir(crank_front);
    let knee_r = Vector2::new(-half, 0.0) + geom.upper_link * leg_dir(crank_rear);

    let between = knee_r - knee_f;
    let d = between.norm();
    let l2 = geom.lower_link;
    if d > 2.0 * l2 || d <= 0.0 {
        return Err(KinematicsError::UnreachableTarget {
            dist: d,
            min: 0.0,
            max: 2.0 * l2,
        });
    }
    let mid = 0.5 * (knee_f + knee_r);
    let h = (l2 * l2 - 0.25 * d * d).sqrt();
    let unit = between / d;
    let perp = Vector2::new(-unit.y, unit.x);
    let a = mid + h * perp;
    let b = mid - h * perp;
    // The working branch set keeps the foot below the knees.
    Ok(if a.y < b.y { a } else { b })
}

/// Box limits of the admissible action space, per leg pair plus spine.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct ActionBox {
    pub r_min: f64,
    pub r_max: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub spine_min: f64,
    pub spine_max: f64,
}

impl Default for ActionBox {
    fn default() -> Self {
        Self {
            r_min: 0.15,
            r_max: 0.23,
            alpha_min: -0.4,
            alpha_max: 0.4,
            spine_min: -(15f64.to_radians()),
            spine_max: 15f64.to_radians(),
        }
    }
}

impl ActionBox {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.r_min > 0.0 && self.r_max > self.r_min) {
            return Err("action box requires 0 < r_min < r_max".into());
        }
        if self.alpha_max <= self.alpha_min || self.spine_max <= self.spine_min {
            return Err("action box intervals must be non-empty".into());
        }
        Ok(())
    }

    fn map(lo: f64, hi: f64, raw: f64) -> f64 {
        let u = raw.clamp(-1.0, 1.0);
        0.5 * (lo + hi) + 0.5 * (hi - lo) * u
    }

    /// Inverse of the affine map, for idempotency checks.
    pub fn normalize(lo: f64, hi: f64, value: f64) -> f64 {
        (2.0 * value - (lo + hi)) / (hi - lo)
    }
}

/// Clamped, physical-unit view of a raw policy action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClampedAction {
    pub front: PolarEndpoint,
    pub rear: PolarEndpoint,
    pub spine_front: f64,
}

/// Total affine map from a raw `[-1, 1]^5` action (any reals accepted and
/// saturated) onto the configured box: `[r, alpha]` front, `[r, alpha]` rear,
/// spine angle.
pub fn clamp_action(raw: &[f64; 5], bounds: &ActionBox) -> ClampedAction {
    ClampedAction {
        front: PolarEndpoint {
            r: ActionBox::map(bounds.r_min, bounds.r_max, raw[0]),
            alpha: ActionBox::map(bounds.alpha_min, bounds.alpha_max, raw[1]),
        },
        rear: PolarEndpoint {
            r: ActionBox::map(bounds.r_min, bounds.r_max, raw[2]),
            alpha: ActionBox::map(bounds.alpha_min, bounds.alpha_max, raw[3]),
        },
        spine_front: ActionBox::map(bounds.spine_min, bounds.spine_max, raw[4]),
    }
}

/// Spine coupling: the rear spine joint exactly mirrors the front.
pub fn spine_couple(beta_front: f64) -> Result<(f64, f64), KinematicsError> {
    let range = 15f64.to_radians();
    if beta_front.abs() > range + 1e-6 {
        return Err(KinematicsError::JointLimitViolation {
            joint: "spine_front",
            angle: beta_front,
            min: -range,
            max: range,
        });
    }
    Ok((beta_front, -beta_front))
}
