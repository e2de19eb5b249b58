//! Planar articulated-body dynamics on a kinematic tree.
//!
//! Bodies live in the x-y plane (y up) and rotate about the out-of-plane
//! axis. Spatial vectors are (angular, linear-x, linear-y) triples expressed
//! in body coordinates about the body frame origin; the recursive
//! Newton-Euler pass below follows the standard body-frame formulation, so a
//! mass matrix column is one inverse-dynamics call with a unit acceleration.

use nalgebra::{DMatrix, DVector, Vector2};

/// Planar motion vector (angular rate + linear velocity of the frame origin).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Motion {
    pub ang: f64,
    pub lin: Vector2<f64>,
}

/// Planar force vector (moment about the frame origin + linear force).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Force {
    pub ang: f64,
    pub lin: Vector2<f64>,
}

impl Motion {
    pub const ZERO: Motion = Motion {
        ang: 0.0,
        lin: Vector2::new(0.0, 0.0),
    };

    fn add(self, o: Motion) -> Motion {
        Motion {
            ang: self.ang + o.ang,
            lin: self.lin + o.lin,
        }
    }

    fn scale(self, s: f64) -> Motion {
        Motion {
            ang: self.ang * s,
            lin: self.lin * s,
        }
    }

    /// Motion-cross-motion, the planar reduction of v x m.
    fn cross_motion(self, m: Motion) -> Motion {
        Motion {
            ang: 0.0,
            lin: Vector2::new(
                -self.ang * m.lin.y + self.lin.y * m.ang,
                self.ang * m.lin.x - self.lin.x * m.ang,
            ),
        }
    }

    /// Motion-cross-force, the planar reduction of v x* f.
    fn cross_force(self, f: Force) -> Force {
        Force {
            ang: self.lin.x * f.lin.y - self.lin.y * f.lin.x,
            lin: Vector2::new(-self.ang * f.lin.y, self.ang * f.lin.x),
        }
    }
}

impl Force {
    pub const ZERO: Force = Force {
        ang: 0.0,
        lin: Vector2::new(0.0, 0.0),
    };

    fn add(self, o: Force) -> Force {
        Force {
            ang: self.ang + o.ang,
            lin: self.lin + o.lin,
        }
    }
}

/// Rigid-body inertia of one link, expressed in its own frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyInertia {
    pub mass: f64,
    /// Center of mass in the body frame.
    pub com: Vector2<f64>,
    /// Rotational inertia about the center of mass.
    pub inertia_com: f64,
}

impl BodyInertia {
    pub const ZERO: BodyInertia = BodyInertia {
        mass: 0.0,
        com: Vector2::new(0.0, 0.0),
        inertia_com: 0.0,
    };

    /// Spatial inertia applied to a motion vector (about the frame origin).
    fn apply(&self, m: Motion) -> Force {
        let i_origin = self.inertia_com + self.mass * self.com.norm_squared();
        Force {
            ang: i_origin * m.ang + self.mass * (self.com.x * m.lin.y - self.com.y * m.lin.x),
            lin: Vector2::new(
                self.mass * (m.lin.x - m.ang * self.com.y),
                self.mass * (m.lin.y + m.ang * self.com.x),
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointKind {
    /// Translation along the parent's x axis.
    PrismaticX,
    /// Translation along the parent's y axis.
    PrismaticY,
    /// Rotation about the joint origin (CCW positive).
    Revolute,
}

/// One joint plus the body rigidly attached to its child frame.
#[derive(Debug, Clone, Copy)]
pub struct Joint {
    pub parent: Option<usize>,
    pub kind: JointKind,
    /// Joint origin in the parent frame (at zero joint coordinate).
    pub origin: Vector2<f64>,
    pub body: BodyInertia,
}

/// Kinematic tree in topological order (every parent index precedes its child).
#[derive(Debug, Clone)]
pub struct PlanarTree {
    pub joints: Vec<Joint>,
}

/// World placement and twist of one body frame.
#[derive(Debug, Clone, Copy)]
pub struct BodyFrame {
    pub angle: f64,
    pub pos: Vector2<f64>,
    pub ang_vel: f64,
    /// World-frame velocity of the frame origin.
    pub lin_vel: Vector2<f64>,
}

impl BodyFrame {
    pub fn point_world(&self, local: Vector2<f64>) -> Vector2<f64> {
        self.pos + rot(self.angle) * local
    }

    pub fn point_velocity(&self, world_point: Vector2<f64>) -> Vector2<f64> {
        let r = world_point - self.pos;
        self.lin_vel + self.ang_vel * Vector2::new(-r.y, r.x)
    }
}

fn rot(theta: f64) -> nalgebra::Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    nalgebra::Matrix2::new(c, -s, s, c)
}

fn joint_frame(j: &Joint, q: f64) -> (f64, Vector2<f64>) {
    match j.kind {
        JointKind::PrismaticX => (0.0, j.origin + Vector2::new(q, 0.0)),
        JointKind::PrismaticY => (0.0, j.origin + Vector2::new(0.0, q)),
        JointKind::Revolute => (q, j.origin),
    }
}

fn joint_subspace(kind: JointKind) -> Motion {
    match kind {
        JointKind::PrismaticX => Motion {
            ang: 0.0,
            lin: Vector2::new(1.0, 0.0),
        },
        JointKind::PrismaticY => Motion {
            ang: 0.0,
            lin: Vector2::new(0.0, 1.0),
        },
        JointKind::Revolute => Motion {
            ang: 1.0,
            lin: Vector2::new(0.0, 0.0),
        },
    }
}

impl PlanarTree {
    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    /// World pose and twist of every body frame.
    pub fn frames(&self, q: &[f64], qd: &[f64]) -> Vec<BodyFrame> {
        let n = self.joints.len();
        let mut out: Vec<BodyFrame> = Vec::with_capacity(n);
        for (i, j) in self.joints.iter().enumerate() {
            let (rel_angle, rel_pos) = joint_frame(j, q[i]);
            let parent = j.parent.map(|p| out[p]);
            let (p_angle, p_pos, p_w, p_v) = match parent {
                Some(f) => (f.angle, f.pos, f.ang_vel, f.lin_vel),
                None => (0.0, Vector2::zeros(), 0.0, Vector2::zeros()),
            };
            let e = rot(p_angle);
            let pos = p_pos + e * rel_pos;
            let angle = p_angle + rel_angle;
            // Velocity of the new frame origin carried by the parent body.
            let r = pos - p_pos;
            let mut lin_vel = p_v + p_w * Vector2::new(-r.y, r.x);
            let mut ang_vel = p_w;
            match j.kind {
                JointKind::PrismaticX => lin_vel += e * Vector2::new(qd[i], 0.0),
                JointKind::PrismaticY => lin_vel += e * Vector2::new(0.0, qd[i]),
                JointKind::Revolute => ang_vel += qd[i],
            }
            out.push(BodyFrame {
                angle,
                pos,
                ang_vel,
                lin_vel,
            });
        }
        out
    }

    /// Recursive Newton-Euler inverse dynamics.
    ///
    /// Returns the joint torques/forces required to produce `qdd` at state
    /// (`q`, `qd`) under gravity `g` (magnitude, acting along -y; pass 0 to
    /// disable) with the external body-frame forces `ext` applied (one per
    /// body, about that body's frame origin).
    pub fn inverse_dynamics(
        &self,
        q: &[f64],
        qd: &[f64],
        qdd: &[f64],
        g: f64,
        ext: Option<&[Force]>,
    ) -> Vec<f64> {
        let n = self.joints.len();
        let mut v = vec![Motion::ZERO; n];
        let mut a = vec![Motion::ZERO; n];
        let mut f = vec![Force::ZERO; n];
        // Fictitious base acceleration +g makes I*a carry the gravity force.
        let a_base = Motion {
            ang: 0.0,
            lin: Vector2::new(0.0, g),
        };

        let mut frames_rot = vec![(0.0f64, Vector2::zeros()); n];
        for (i, j) in self.joints.iter().enumerate() {
            let (rel_angle, rel_pos) = joint_frame(j, q[i]);
            frames_rot[i] = (rel_angle, rel_pos);
            let s = joint_subspace(j.kind);
            let (v_p, a_p) = match j.parent {
                Some(p) => (v[p], a[p]),
                None => (Motion::ZERO, a_base),
            };
            let xform = |m: Motion| -> Motion {
                let e_t = rot(-rel_angle);
                Motion {
                    ang: m.ang,
                    lin: e_t * (m.lin + m.ang * Vector2::new(-rel_pos.y, rel_pos.x)),
                }
            };
            let vj = s.scale(qd[i]);
            v[i] = xform(v_p).add(vj);
            a[i] = xform(a_p).add(s.scale(qdd[i])).add(v[i].cross_motion(vj));
            let momentum = j.body.apply(v[i]);
            f[i] = j.body.apply(a[i]).add(v[i].cross_force(momentum));
            if let Some(ext) = ext {
                f[i] = f[i].add(Force {
                    ang: -ext[i].ang,
                    lin: -ext[i].lin,
                });
            }
        }

        let mut tau = vec![0.0; n];
        for i in (0..n).rev() {
            let j = &self.joints[i];
            let s = joint_subspace(j.kind);
            tau[i] = s.ang * f[i].ang + s.lin.dot(&f[i].lin);
            if let Some(p) = j.parent {
                let (rel_angle, rel_pos) = frames_rot[i];
                let e = rot(rel_angle);
                let lin_p = e * f[i].lin;
                f[p] = f[p].add(Force {
                    ang: f[i].ang + rel_pos.x * lin_p.y - rel_pos.y * lin_p.x,
                    lin: lin_p,
                });
            }
        }
        tau
    }

    /// Joint-space mass matrix via unit-acceleration inverse dynamics.
    pub fn mass_matrix(&self, q: &[f64]) -> DMatrix<f64> {
        let n = self.joints.len();
        let zero = vec![0.0; n];
        let mut m = DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for col in 0..n {
            e[col] = 1.0;
            let tau = self.inverse_dynamics(q, &zero, &e, 0.0, None);
            for row in 0..n {
                m[(row, col)] = tau[row];
            }
            e[col] = 0.0;
        }
        m
    }

    /// Total kinetic energy at (`q`, `qd`).
    pub fn kinetic_energy(&self, q: &[f64], qd: &[f64]) -> f64 {
        let m = self.mass_matrix(q);
        let v = DVector::from_column_slice(qd);
        0.5 * (v.transpose() * m * v)[(0, 0)]
    }

    /// Total gravitational potential energy, zero level at y = 0.
    pub fn potential_energy(&self, q: &[f64], g: f64) -> f64 {
        let qd = vec![0.0; self.joints.len()];
        self.frames(q, &qd)
            .iter()
            .zip(&self.joints)
            .map(|(frame, j)| j.body.mass * g * frame.point_world(j.body.com).y)
            .sum()
    }
}
