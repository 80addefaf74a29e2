//! Simple-polygon helpers for mold footprints and detection geometry.

use super::vec::{vec2, Vec2};

/// Twice the signed area; positive for counterclockwise winding.
pub fn signed_area2(pts: &[Vec2]) -> f64 {
    let n = pts.len();
    let mut acc = 0.0;
    for i in 0..n {
        acc += pts[i].cross(pts[(i + 1) % n]);
    }
    acc
}

/// Even-odd point-in-polygon test (boundary points may go either way).
pub fn contains(pts: &[Vec2], p: Vec2) -> bool {
    let n = pts.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (pts[i], pts[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Distance from p to the polygon boundary.
pub fn boundary_distance(pts: &[Vec2], p: Vec2) -> f64 {
    let n = pts.len();
    let mut best = f64::INFINITY;
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        let ab = b - a;
        let len_sq = ab.norm_sq();
        let t = if len_sq > 0.0 {
            ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0)
        } else {
            0.0
        };
        best = best.min(p.dist(a.lerp(b, t)));
    }
    best
}

/// Offset a convex counterclockwise polygon outward by `d` with mitered
/// corners (edges shifted along their outward normals, corners rebuilt by
/// intersecting adjacent shifted edges).
pub fn offset_convex(pts: &[Vec2], d: f64) -> Vec<Vec2> {
    let n = pts.len();
    assert!(n >= 3);
    let mut lines = Vec::with_capacity(n); // (point on line, direction)
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        let dir = (b - a).normalized();
        // CCW winding: outward normal is the clockwise perpendicular.
        let out = vec2(dir.y, -dir.x);
        lines.push((a + out * d, dir));
    }
    let mut out_pts = Vec::with_capacity(n);
    for i in 0..n {
        let (p1, d1) = lines[(i + n - 1) % n];
        let (p2, d2) = lines[i];
        out_pts.push(intersect_lines(p1, d1, p2, d2));
    }
    out_pts
}

fn intersect_lines(p1: Vec2, d1: Vec2, p2: Vec2, d2: Vec2) -> Vec2 {
    let denom = d1.cross(d2);
    if denom.abs() < 1e-12 {
        return p2; // parallel edges: degenerate corner, keep shifted vertex
    }
    let t = (p2 - p1).cross(d2) / denom;
    p1 + d1 * t
}

/// Andrew monotone-chain convex hull, counterclockwise, no duplicate last
/// point. Input order does not matter; collinear boundary points are
/// dropped.
pub fn convex_hull(points: &[Vec2]) -> Vec<Vec2> {
    let mut pts: Vec<Vec2> = points.to_vec();
    pts.sort_by(|a, b| (a.x, a.y).partial_cmp(&(b.x, b.y)).unwrap());
    pts.dedup_by(|a, b| a.x == b.x && a.y == b.y);
    if pts.len() < 3 {
        return pts;
    }
    let chain = |iter: &mut dyn Iterator<Item = Vec2>| {
        let mut h: Vec<Vec2> = Vec::new();
        for p in iter {
            while h.len() >= 2 {
                let q = h[h.len() - 1];
                let r = h[h.len() - 2];
                if (q - r).cross(p - r) <= 0.0 {
                    h.pop();
                } else {
                    break;
                }
            }
            h.push(p);
        }
        h.pop(); // endpoint repeats in the other chain
        h
    };
    let mut hull = chain(&mut pts.iter().copied());
    hull.extend(chain(&mut pts.iter().rev().copied()));
    hull
}

/// Containment test for convex counterclockwise polygons; points within
/// `tol` of the boundary count as inside.
pub fn convex_contains(pts: &[Vec2], p: Vec2, tol: f64) -> bool {
    let n = pts.len();
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        let e = b - a;
        if e.cross(p - a) < -tol * e.norm() {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Vec<Vec2> {
        vec![
            vec2(0.0, 0.0),
            vec2(4.0, 0.0),
            vec2(4.0, 4.0),
            vec2(0.0, 4.0),
        ]
    }

    #[test]
    fn area_and_containment() {
        let sq = square();
        assert!((signed_area2(&sq) - 32.0).abs() < 1e-12);
        assert!(contains(&sq, vec2(2.0, 2.0)));
        assert!(!contains(&sq, vec2(5.0, 2.0)));
    }

    #[test]
    fn offset_square_grows_by_d_each_side() {
        let out = offset_convex(&square(), 1.0);
        assert_eq!(out.len(), 4);
        let xs: Vec<f64> = out.iter().map(|p| p.x).collect();
        let ys: Vec<f64> = out.iter().map(|p| p.y).collect();
        let min_x = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let max_x = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min_y = ys.iter().cloned().fold(f64::INFINITY, f64::min);
        let max_y = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!((min_x + 1.0).abs() < 1e-9 && (max_x - 5.0).abs() < 1e-9);
        assert!((min_y + 1.0).abs() < 1e-9 && (max_y - 5.0).abs() < 1e-9);
    }

    #[test]
    fn hull_of_square_with_interior_points_is_square() {
        let mut pts = square();
        pts.push(vec2(2.0, 2.0));
        pts.push(vec2(1.0, 3.0));
        let hull = convex_hull(&pts);
        assert_eq!(hull.len(), 4);
        assert!(signed_area2(&hull) > 0.0);
        for p in square() {
            assert!(hull.contains(&p));
        }
    }

    #[test]
    fn convex_containment_includes_boundary_within_tolerance() {
        let sq = square();
        assert!(convex_contains(&sq, vec2(2.0, 2.0), 1e-9));
        assert!(convex_contains(&sq, vec2(0.0, 2.0), 1e-9));
        assert!(convex_contains(&sq, vec2(-1e-10, 2.0), 1e-9));
        assert!(!convex_contains(&sq, vec2(-1e-3, 2.0), 1e-9));
    }

    #[test]
    fn boundary_distance_inside_and_outside() {
        let sq = square();
        assert!((boundary_distance(&sq, vec2(2.0, 2.0)) - 2.0).abs() < 1e-9);
        assert!((boundary_distance(&sq, vec2(6.0, 2.0)) - 2.0).abs() < 1e-9);
    }
}
