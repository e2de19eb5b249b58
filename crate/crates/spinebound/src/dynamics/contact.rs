//! Penalty ground contact: linear normal spring-damper plus a Coulomb
//! friction anchor whose tangential spring force is capped at mu times the
//! normal force (the anchor slides whenever the cap engages).

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct ContactParams {
    /// Normal spring stiffness (N/m), per effective (paired) foot.
    pub k_n: f64,
    /// Normal damping (N s/m).
    pub c_n: f64,
    /// Coulomb friction coefficient.
    pub mu: f64,
    /// Tangential anchor spring stiffness (N/m).
    pub k_t: f64,
}

impl Default for ContactParams {
    fn default() -> Self {
        Self {
            k_n: 2.0e4,
            c_n: 150.0,
            mu: 0.8,
            k_t: 1.5e4,
        }
    }
}

impl ContactParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.k_n <= 0.0 || self.c_n < 0.0 || self.mu < 0.0 || self.k_t < 0.0 {
            return Err("contact params require k_n > 0 and c_n, mu, k_t >= 0".into());
        }
        Ok(())
    }
}

/// Per-foot contact bookkeeping carried across steps.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize, PartialEq)]
pub struct ContactState {
    /// World-x position the tangential spring is anchored to while in contact.
    pub anchor: Option<f64>,
    pub in_contact: bool,
    /// Current penetration depth (m), zero when airborne.
    pub penetration: f64,
}

/// Contact force on one foot given its world position and velocity.
///
/// Returns the world-frame force and the updated bookkeeping. The normal
/// component is `max(0, k_n*pen - c_n*v_y)`; the tangential component is the
/// anchor spring clamped to the friction cone, repositioning the anchor when
/// it saturates.
pub fn foot_contact(
    foot_pos: Vector2<f64>,
    foot_vel: Vector2<f64>,
    prev: ContactState,
    params: &ContactParams,
) -> (Vector2<f64>, ContactState) {
    let penetration = -foot_pos.y;
    if penetration <= 0.0 {
        return (Vector2::zeros(), ContactState::default());
    }
    let normal = (params.k_n * penetration - params.c_n * foot_vel.y).max(0.0);

    let mut anchor = prev.anchor.unwrap_or(foot_pos.x);
    let mut tangential = -params.k_t * (foot_pos.x - anchor);
    let cap = params.mu * normal;
    if tangential.abs() > cap {
        tangential = cap * tangential.signum();
        if params.k_t > 0.0 {
            // Slide the anchor so the spring holds exactly the cap force.
            anchor = foot_pos.x + tangential / params.k_t;
        }
    }

    (
        Vector2::new(tangential, normal),
        ContactState {
            anchor: Some(anchor),
            in_contact: true,
            penetration,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn static_penetration_force() {
        let params = ContactParams {
            k_n: 5000.0,
            c_n: 0.0,
            mu: 0.8,
            k_t: 0.0,
        };
        let (f, state) = foot_contact(
            Vector2::new(0.0, -0.001),
            Vector2::zeros(),
            ContactState::default(),
            &params,
        );
        assert_abs_diff_eq!(f.y, 5.0, epsilon = 1e-12);
        assert!(state.in_contact);
        assert_abs_diff_eq!(state.penetration, 0.001, epsilon = 1e-15);
    }

    #[test]
    fn airborne_foot_no_force() {
        let (f, state) = foot_contact(
            Vector2::new(0.3, 0.01),
            Vector2::new(1.0, -2.0),
            ContactState {
                anchor: Some(0.25),
                in_contact: true,
                penetration: 0.002,
            },
            &ContactParams::default(),
        );
        assert_eq!(f, Vector2::zeros());
        assert!(!state.in_contact);
        assert_eq!(state.anchor, None);
    }

    #[test]
    fn friction_cone_cap_and_anchor_slide() {
        // Spring demand 100 N against a 50 N normal and mu = 0.8 caps at 40 N.
        let params = ContactParams {
            k_n: 50.0 / 0.001,
            c_n: 0.0,
            mu: 0.8,
            k_t: 10_000.0,
        };
        let prev = ContactState {
            anchor: Some(0.0),
            in_contact: true,
            penetration: 0.001,
        };
        let (f, state) = foot_contact(
            Vector2::new(0.01, -0.001),
            Vector2::zeros(),
            prev,
            &params,
        );
        assert_abs_diff_eq!(f.y, 50.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.x, -40.0, epsilon = 1e-12);
        // Anchor repositioned so the spring holds exactly the capped force.
        let anchor = state.anchor.unwrap();
        assert_abs_diff_eq!(-params.k_t * (0.01 - anchor), -40.0, epsilon = 1e-9);
    }

    proptest! {
        #[test]
        fn complementarity_and_cone(
            y in -0.02f64..0.02,
            vy in -2.0f64..2.0,
            x in -0.5f64..0.5,
            anchor in -0.5f64..0.5,
        ) {
            let params = ContactParams::default();
            let prev = ContactState { anchor: Some(anchor), in_contact: true, penetration: 0.0 };
            let (f, state) = foot_contact(
                Vector2::new(x, y),
                Vector2::new(0.0, vy),
                prev,
                &params,
            );
            prop_assert!(f.y >= 0.0);
            if y >= 0.0 {
                prop_assert_eq!(f.y, 0.0);
                prop_assert!(!state.in_contact);
            }
            prop_assert!(f.x.abs() <= params.mu * f.y + 1e-9);
        }
    }
}
