//! Minimum-area enclosing rectangle by rotating calipers.

use super::polygon::convex_hull;
use super::pose::normalize_angle;
use super::vec::{vec2, Vec2};

/// Oriented rectangle; `angle` is the direction of the long side, normalized
/// to (-pi/2, pi/2], and `long >= short`.
#[derive(Debug, Clone, Copy)]
pub struct MinRect {
    pub center: Vec2,
    pub angle: f64,
    pub long: f64,
    pub short: f64,
}

impl MinRect {
    pub fn aspect(&self) -> f64 {
        if self.short > 0.0 {
            self.long / self.short
        } else {
            f64::INFINITY
        }
    }

    pub fn area(&self) -> f64 {
        self.long * self.short
    }
}

/// Smallest-area rectangle containing the point set. The optimum has a side
/// collinear with a hull edge, so trying every hull-edge direction is exact.
pub fn min_area_rect(points: &[Vec2]) -> MinRect {
    let hull = convex_hull(points);
    assert!(hull.len() >= 2, "degenerate point set");
    if hull.len() == 2 {
        let d = hull[1] - hull[0];
        return MinRect {
            center: hull[0].lerp(hull[1], 0.5),
            angle: normalize_half(d.y.atan2(d.x)),
            long: d.norm(),
            short: 0.0,
        };
    }
    let n = hull.len();
    let mut best: Option<(f64, MinRect)> = None;
    for i in 0..n {
        let e = hull[(i + 1) % n] - hull[i];
        if e.norm_sq() == 0.0 {
            continue;
        }
        let angle = e.y.atan2(e.x);
        let (s, c) = (-angle).sin_cos();
        let rot = |p: Vec2| vec2(c * p.x - s * p.y, s * p.x + c * p.y);
        let mut min_x = f64::INFINITY;
        let mut max_x = f64::NEG_INFINITY;
        let mut min_y = f64::INFINITY;
        let mut max_y = f64::NEG_INFINITY;
        for &p in &hull {
            let q = rot(p);
            min_x = min_x.min(q.x);
            max_x = max_x.max(q.x);
            min_y = min_y.min(q.y);
            max_y = max_y.max(q.y);
        }
        let w = max_x - min_x;
        let h = max_y - min_y;
        let area = w * h;
        if best.as_ref().is_none_or(|(a, _)| area < *a - 1e-12) {
            let center_rot = vec2(0.5 * (min_x + max_x), 0.5 * (min_y + max_y));
            let center = center_rot.rotated(angle);
            let (long, short, axis_angle) = if w >= h {
                (w, h, angle)
            } else {
                (h, w, angle + std::f64::consts::FRAC_PI_2)
            };
            best = Some((
                area,
                MinRect {
                    center,
                    angle: normalize_half(axis_angle),
                    long,
                    short,
                },
            ));
        }
    }
    best.unwrap().1
}

/// Wrap into (-pi/2, pi/2] (rectangle orientation is ambiguous mod pi).
pub fn normalize_half(a: f64) -> f64 {
    use std::f64::consts::{FRAC_PI_2, PI};
    let mut r = normalize_angle(a);
    if r <= -FRAC_PI_2 {
        r += PI;
    } else if r > FRAC_PI_2 {
        r -= PI;
    }
    r
}
