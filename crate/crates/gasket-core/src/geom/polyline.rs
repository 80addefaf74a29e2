//! Sampled-curve utilities shared by the channel centerline and the rope.

use super::vec::Vec2;

/// Piecewise-linear curve. For closed curves the wrap segment from the last
/// sample back to the first is part of the arc length.
#[derive(Debug, Clone)]
pub struct Polyline {
    pub points: Vec<Vec2>,
    pub closed: bool,
    /// cum[i] = arc length from points[0] to points[i]; for closed curves an
    /// extra final entry holds the full perimeter.
    cum: Vec<f64>,
}

impl Polyline {
    pub fn new(points: Vec<Vec2>, closed: bool) -> Self {
        assert!(points.len() >= 2);
        let mut cum = Vec::with_capacity(points.len() + 1);
        let mut acc = 0.0;
        cum.push(0.0);
        for i in 1..points.len() {
            acc += points[i].dist(points[i - 1]);
            cum.push(acc);
        }
        if closed {
            acc += points[0].dist(*points.last().unwrap());
            cum.push(acc);
        }
        Polyline {
            points,
            closed,
            cum,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn arc_length(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    /// Arc position of sample i.
    pub fn arc_at(&self, i: usize) -> f64 {
        self.cum[i]
    }

    fn seg_count(&self) -> usize {
        if self.closed {
            self.points.len()
        } else {
            self.points.len() - 1
        }
    }

    fn seg(&self, i: usize) -> (Vec2, Vec2) {
        let a = self.points[i];
        let b = self.points[(i + 1) % self.points.len()];
        (a, b)
    }

    /// Point at arc position s (clamped to [0, length]; closed curves wrap).
    pub fn point_at(&self, s: f64) -> Vec2 {
        let (i, t) = self.locate(s);
        let (a, b) = self.seg(i);
        a.lerp(b, t)
    }

    /// Unit tangent at arc position s.
    pub fn tangent_at(&self, s: f64) -> Vec2 {
        let (i, _) = self.locate(s);
        let (a, b) = self.seg(i);
        (b - a).normalized()
    }

    fn locate(&self, s: f64) -> (usize, f64) {
        let total = self.arc_length();
        let s = if self.closed {
            s.rem_euclid(total)
        } else {
            s.clamp(0.0, total)
        };
        // cum is sorted; binary search for the containing segment.
        let mut lo = 0usize;
        let mut hi = self.seg_count();
        while lo + 1 < hi {
            let mid = (lo + hi) / 2;
            if self.cum[mid] <= s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let seg_len = self.cum[lo + 1] - self.cum[lo];
        let t = if seg_len > 0.0 {
            (s - self.cum[lo]) / seg_len
        } else {
            0.0
        };
        (lo, t.clamp(0.0, 1.0))
    }

    /// Closest point on the curve: (arc position, distance, closest point).
    pub fn project(&self, p: Vec2) -> (f64, f64, Vec2) {
        let mut best = (0.0, f64::INFINITY, self.points[0]);
        for i in 0..self.seg_count() {
            let (a, b) = self.seg(i);
            let ab = b - a;
            let len_sq = ab.norm_sq();
            let t = if len_sq > 0.0 {
                ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let q = a.lerp(b, t);
            let d = p.dist(q);
            if d < best.1 {
                best = (self.cum[i] + t * (self.cum[i + 1] - self.cum[i]), d, q);
            }
        }
        best
    }

    /// Walk forward from arc position `from` to the point whose straight-line
    /// (chord) distance from the point at `from` equals `chord`. Used to lay
    /// consecutive rope particles into the slot without stretching them
    /// across corners. Returns the arc position found.
    pub fn step_by_chord(&self, from: f64, chord: f64, forward: bool) -> f64 {
        let origin = self.point_at(from);
        let total = self.arc_length();
        let dir = if forward { 1.0 } else { -1.0 };
        // The chord of an arc never exceeds its length, so the target arc
        // offset is at least `chord`; scan outward in small increments and
        // bisect the bracketing step.
        let mut lo = 0.0;
        let mut hi = chord;
        let dist = |ds: f64| -> f64 {
            let s = if self.closed {
                from + dir * ds
            } else {
                (from + dir * ds).clamp(0.0, total)
            };
            self.point_at(s).dist(origin)
        };
        let limit = if self.closed {
            total * 0.45
        } else if forward {
            total - from
        } else {
            from
        };
        while dist(hi) < chord {
            lo = hi;
            hi = (hi + chord).min(limit);
            if hi >= limit {
                if dist(limit) < chord {
                    // Curve ends before the chord is reached; clamp to end.
                    return if forward {
                        total.min(from + limit)
                    } else {
                        (from - limit).max(0.0)
                    };
                }
                break;
            }
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if dist(mid) < chord {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let s = from + dir * 0.5 * (lo + hi);
        if self.closed {
            s.rem_euclid(total)
        } else {
            s.clamp(0.0, total)
        }
    }
}
