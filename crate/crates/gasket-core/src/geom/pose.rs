//! Planar rigid transform used to place a channel in the workspace.

use super::vec::{vec2, Vec2};

/// Translation plus rotation, angle normalized to (-pi, pi].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose2D {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Pose2D {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub fn identity() -> Self {
        Pose2D {
            x: 0.0,
            y: 0.0,
            theta: 0.0,
        }
    }

    pub fn translation(&self) -> Vec2 {
        vec2(self.x, self.y)
    }

    /// Local frame -> workspace.
    pub fn apply(&self, p: Vec2) -> Vec2 {
        p.rotated(self.theta) + self.translation()
    }

    /// Workspace -> local frame.
    pub fn invert(&self, p: Vec2) -> Vec2 {
        (p - self.translation()).rotated(-self.theta)
    }

    /// Rotate a direction vector into the workspace (no translation).
    pub fn apply_dir(&self, d: Vec2) -> Vec2 {
        d.rotated(self.theta)
    }
}

/// Wrap into (-pi, pi].
pub fn normalize_angle(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut r = a % TAU;
    if r <= -PI {
        r += TAU;
    } else if r > PI {
        r -= TAU;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn angles_land_in_half_open_interval() {
        for k in -8..=8 {
            let a = normalize_angle(0.3 + k as f64 * PI);
            assert!(a > -PI && a <= PI, "got {a}");
        }
        assert_eq!(normalize_angle(PI), PI);
        assert_eq!(normalize_angle(-PI), PI);
        assert_eq!(normalize_angle(3.0 * PI), PI);
    }

    #[test]
    fn apply_then_invert_round_trips() {
        let pose = Pose2D::new(12.0, -7.0, 0.8);
        let p = vec2(3.0, 4.0);
        let back = pose.invert(pose.apply(p));
        assert!(back.dist(p) < 1e-12);
    }
}
