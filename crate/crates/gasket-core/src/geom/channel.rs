//! The three test channels and their local-frame geometry.
//!
//! Each channel is a rigid mold with a slot milled into it. The local frame
//! is centered on the axis-aligned bounding box of the mold footprint, which
//! makes the detected box center in an overhead image directly comparable to
//! the placement pose. The slot centerline is exposed both as a dense sample
//! polyline (renderer, perception ground truth) and as exact analytic queries
//! (physics hot path).

use super::polygon::{boundary_distance, contains, convex_contains, offset_convex, signed_area2};
use super::polyline::Polyline;
use super::pose::Pose2D;
use super::rect::{min_area_rect, MinRect};
use super::vec::{vec2, Vec2};

pub const MM_PER_INCH: f64 = 25.4;

/// Work surface extents in mm (x, y).
pub const WORKSPACE: (f64, f64) = (1000.0, 700.0);

/// Slot width shared by all three channels (0.5 in).
pub const SLOT_WIDTH: f64 = 0.5 * MM_PER_INCH;

/// Rope length, equal to every channel's slot length (26.5 in).
pub const ROPE_LENGTH: f64 = 26.5 * MM_PER_INCH;

/// Centerline sampling step target.
pub const SAMPLE_STEP: f64 = 2.0;

/// Wall margin between the slot edge and the mold outer boundary of the
/// closed (trapezoid) mold.
const TRAPEZOID_WALL_MARGIN: f64 = 12.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelKind {
    Straight,
    Curved,
    Trapezoid,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 3] = [
        ChannelKind::Straight,
        ChannelKind::Curved,
        ChannelKind::Trapezoid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::Straight => "straight",
            ChannelKind::Curved => "curved",
            ChannelKind::Trapezoid => "trapezoid",
        }
    }

    pub fn parse(s: &str) -> Option<ChannelKind> {
        match s {
            "straight" => Some(ChannelKind::Straight),
            "curved" => Some(ChannelKind::Curved),
            "trapezoid" => Some(ChannelKind::Trapezoid),
            _ => None,
        }
    }
}

impl std::fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Analytic description of where the slot runs, in the local frame.
#[derive(Debug, Clone)]
enum SlotShape {
    /// Centerline y = 0, x in [-half_len, half_len].
    Line { half_len: f64 },
    /// Quarter arc at `radius` around `center`, polar angle in [0, pi/2];
    /// the mold is the annular sector between r_in and r_out.
    QuarterArc {
        center: Vec2,
        radius: f64,
        r_in: f64,
        r_out: f64,
    },
    /// Closed convex loop (exact corner vertices, counterclockwise).
    Loop { loop_line: Polyline },
}

#[derive(Debug, Clone)]
pub struct ChannelSpec {
    pub kind: ChannelKind,
    /// Dense centerline samples in the local frame. Index 0 is c0; for closed
    /// channels the last sample is c1 and the wrap segment closes the loop,
    /// for open channels the last sample is c1 directly.
    pub centerline: Polyline,
    pub slot_width: f64,
    /// Mold height; the slot is cut through to the work surface.
    pub slot_depth: f64,
    /// Mold outline in the local frame (counterclockwise).
    pub footprint: Vec<Vec2>,
    pub closed: bool,
    /// Arc positions of slot corners (closed channels only).
    pub corner_arcs: Vec<f64>,
    /// Long/short ratio of the mold's minimum-area enclosing rectangle; used
    /// as the classification template signature.
    pub aspect_ratio: f64,
    /// Minimum-area rectangle of the footprint in the local frame.
    pub footprint_rect: MinRect,
    shape: SlotShape,
}

impl ChannelSpec {
    /// Full slot arc length (perimeter for closed channels).
    pub fn slot_length(&self) -> f64 {
        self.centerline.arc_length()
    }

    /// Arc length of the rope's path from c0 to c1 (for closed channels this
    /// is the long way around, i.e. the perimeter minus the sample gap).
    pub fn path_length(&self) -> f64 {
        if self.closed {
            self.centerline.arc_at(self.centerline.len() - 1)
        } else {
            self.centerline.arc_length()
        }
    }

    pub fn c0(&self) -> Vec2 {
        self.centerline.points[0]
    }

    pub fn c1(&self) -> Vec2 {
        *self.centerline.points.last().unwrap()
    }

    /// Local-frame point at fraction f of the c0 -> c1 path.
    pub fn path_point(&self, f: f64) -> Vec2 {
        self.centerline
            .point_at(f.clamp(0.0, 1.0) * self.path_length())
    }

    pub fn half_width(&self) -> f64 {
        0.5 * self.slot_width
    }
}

pub fn make_channel(kind: ChannelKind) -> ChannelSpec {
    match kind {
        ChannelKind::Straight => make_straight(),
        ChannelKind::Curved => make_curved(),
        ChannelKind::Trapezoid => make_trapezoid(),
    }
}

fn sample_segment(from: Vec2, to: Vec2, out: &mut Vec<Vec2>) {
    let len = from.dist(to);
    let n = (len / SAMPLE_STEP).ceil().max(1.0) as usize;
    for i in 1..=n {
        out.push(from.lerp(to, i as f64 / n as f64));
    }
}

fn make_straight() -> ChannelSpec {
    let len = ROPE_LENGTH;
    let width = 2.68 * MM_PER_INCH;
    let depth = 0.56 * MM_PER_INCH;
    let half = 0.5 * len;
    let mut pts = vec![vec2(-half, 0.0)];
    sample_segment(vec2(-half, 0.0), vec2(half, 0.0), &mut pts);
    let footprint = vec![
        vec2(-half, -0.5 * width),
        vec2(half, -0.5 * width),
        vec2(half, 0.5 * width),
        vec2(-half, 0.5 * width),
    ];
    finish(
        ChannelKind::Straight,
        pts,
        false,
        depth,
        footprint,
        vec![],
        SlotShape::Line { half_len: half },
    )
}

fn make_curved() -> ChannelSpec {
    // Quarter ring: inner diameter 32.4 in, outer diameter 35.1 in, slot at
    // the mean radius so the slot walls are symmetric.
    let r_inner = 0.5 * 32.4 * MM_PER_INCH;
    let r_outer = 0.5 * 35.1 * MM_PER_INCH;
    let r_mean = 0.5 * (r_inner + r_outer);
    let depth = 0.75 * MM_PER_INCH;
    // Build in a frame with the ring center at the origin and the ring in the
    // first quadrant, then shift so the footprint bbox is centered.
    let shift = vec2(-0.5 * r_outer, -0.5 * r_outer);
    let arc_pts = |radius: f64, a0: f64, a1: f64, out: &mut Vec<Vec2>| {
        let arc = (a1 - a0).abs() * radius;
        let n = (arc / SAMPLE_STEP).ceil().max(1.0) as usize;
        for i in 0..=n {
            let a = a0 + (a1 - a0) * i as f64 / n as f64;
            out.push(vec2(radius * a.cos(), radius * a.sin()) + shift);
        }
    };
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut pts = Vec::new();
    arc_pts(r_mean, 0.0, half_pi, &mut pts);
    let mut footprint = Vec::new();
    arc_pts(r_outer, 0.0, half_pi, &mut footprint);
    let mut inner = Vec::new();
    arc_pts(r_inner, 0.0, half_pi, &mut inner);
    inner.reverse();
    footprint.extend(inner);
    finish(
        ChannelKind::Curved,
        pts,
        false,
        depth,
        footprint,
        vec![],
        SlotShape::QuarterArc {
            center: shift,
            radius: r_mean,
            r_in: r_inner,
            r_out: r_outer,
        },
    )
}

fn make_trapezoid() -> ChannelSpec {
    // Closed loop: the named side lengths are the slot centerline so the rope
    // length matches the slot perimeter exactly. Isosceles, long side down.
    let long = 10.0 * MM_PER_INCH;
    let short = 7.5 * MM_PER_INCH;
    let leg = 4.5 * MM_PER_INCH;
    let half_dx = 0.5 * (long - short);
    let height = (leg * leg - half_dx * half_dx).sqrt();
    let depth = 0.56 * MM_PER_INCH; // same mold height as the straight channel
    let a = vec2(-0.5 * long, -0.5 * height);
    let b = vec2(0.5 * long, -0.5 * height);
    let c = vec2(0.5 * short, 0.5 * height);
    let d = vec2(-0.5 * short, 0.5 * height);
    // Samples start at c0 = long-side midpoint and run counterclockwise; the
    // last sample is c1, one step short of closing the loop.
    let mid = vec2(0.0, -0.5 * height);
    let mut pts = vec![mid];
    sample_segment(mid, b, &mut pts);
    sample_segment(b, c, &mut pts);
    sample_segment(c, d, &mut pts);
    sample_segment(d, a, &mut pts);
    let mut back = Vec::new();
    sample_segment(a, mid, &mut back);
    back.pop(); // drop the closing point; the wrap segment covers the gap
    pts.extend(back);
    let corner_arcs = vec![
        0.5 * long,
        0.5 * long + leg,
        0.5 * long + leg + short,
        0.5 * long + leg + short + leg,
    ];
    let footprint = offset_convex(&[a, b, c, d], TRAPEZOID_WALL_MARGIN);
    let loop_line = Polyline::new(vec![mid, b, c, d, a], true);
    finish(
        ChannelKind::Trapezoid,
        pts,
        true,
        depth,
        footprint,
        corner_arcs,
        SlotShape::Loop { loop_line },
    )
}

fn finish(
    kind: ChannelKind,
    pts: Vec<Vec2>,
    closed: bool,
    depth: f64,
    footprint: Vec<Vec2>,
    corner_arcs: Vec<f64>,
    shape: SlotShape,
) -> ChannelSpec {
    debug_assert!(signed_area2(&footprint) > 0.0, "footprint must be CCW");
    let rect = min_area_rect(&footprint);
    ChannelSpec {
        kind,
        centerline: Polyline::new(pts, closed),
        slot_width: SLOT_WIDTH,
        slot_depth: depth,
        footprint,
        closed,
        corner_arcs,
        aspect_ratio: rect.aspect(),
        footprint_rect: rect,
        shape,
    }
}

/// Result of the analytic slot query (local-frame distances, workspace arc).
#[derive(Debug, Clone, Copy)]
pub struct SlotQuery {
    /// Distance from the point to the slot centerline.
    pub offset: f64,
    /// Arc position of the closest centerline point.
    pub arc: f64,
    /// True if the point lies inside the mold outline.
    pub in_footprint: bool,
}

/// A channel placed in the workspace. Owns the spec plus cached
/// workspace-frame geometry.
#[derive(Debug, Clone)]
pub struct PlacedChannel {
    pub spec: ChannelSpec,
    pub pose: Pose2D,
}

#[derive(Debug, thiserror::Error)]
#[error("channel footprint leaves the {0}x{1} mm workspace")]
pub struct OutOfWorkspace(pub f64, pub f64);

impl PlacedChannel {
    pub fn new(spec: ChannelSpec, pose: Pose2D) -> Result<Self, OutOfWorkspace> {
        let placed = PlacedChannel { spec, pose };
        if placed.fits_workspace() {
            Ok(placed)
        } else {
            Err(OutOfWorkspace(WORKSPACE.0, WORKSPACE.1))
        }
    }

    pub fn fits_workspace(&self) -> bool {
        // Footprint polygons are contained in the hull of their vertices and
        // the workspace is convex, so checking vertices suffices.
        self.spec
            .footprint
            .iter()
            .all(|&p| in_workspace(self.pose.apply(p)))
    }

    /// Workspace footprint polygon.
    pub fn footprint_world(&self) -> Vec<Vec2> {
        self.spec
            .footprint
            .iter()
            .map(|&p| self.pose.apply(p))
            .collect()
    }

    /// Workspace centerline point at arc position s.
    pub fn point_at_arc(&self, s: f64) -> Vec2 {
        self.pose.apply(self.spec.centerline.point_at(s))
    }

    pub fn tangent_at_arc(&self, s: f64) -> Vec2 {
        self.pose.apply_dir(self.spec.centerline.tangent_at(s))
    }

    /// Workspace point at fraction f of the c0 -> c1 rope path.
    pub fn path_point(&self, f: f64) -> Vec2 {
        self.pose.apply(self.spec.path_point(f))
    }

    /// Arc position for a rope-path fraction.
    pub fn path_arc(&self, f: f64) -> f64 {
        f.clamp(0.0, 1.0) * self.spec.path_length()
    }

    /// Analytic slot query for a workspace point. Boundary points count as
    /// inside the footprint (the slot ends of the open channels sit exactly
    /// on the mold edge).
    pub fn slot_query(&self, p: Vec2) -> SlotQuery {
        const EPS: f64 = 1e-6;
        let q = self.pose.invert(p);
        let (offset, arc, in_footprint) = match &self.spec.shape {
            SlotShape::Line { half_len } => {
                let x = q.x.clamp(-half_len, *half_len);
                let inside = convex_contains(&self.spec.footprint, q, EPS);
                (q.dist(vec2(x, 0.0)), x + half_len, inside)
            }
            SlotShape::QuarterArc {
                center,
                radius,
                r_in,
                r_out,
            } => {
                let v = q - *center;
                let phi = v.y.atan2(v.x).clamp(0.0, std::f64::consts::FRAC_PI_2);
                let closest = *center + vec2(phi.cos(), phi.sin()) * *radius;
                let r = v.norm();
                let inside = r >= r_in - EPS && r <= r_out + EPS && v.x >= -EPS && v.y >= -EPS;
                (q.dist(closest), phi * radius, inside)
            }
            SlotShape::Loop { loop_line } => {
                let (arc, d, _) = loop_line.project(q);
                let inside = convex_contains(&self.spec.footprint, q, EPS);
                (d, arc, inside)
            }
        };
        SlotQuery {
            offset,
            arc,
            in_footprint,
        }
    }

    /// Distance from a workspace point to the mold outline.
    pub fn footprint_clearance(&self, p: Vec2) -> f64 {
        let q = self.pose.invert(p);
        let d = boundary_distance(&self.spec.footprint, q);
        if contains(&self.spec.footprint, q) {
            -d
        } else {
            d
        }
    }
}

pub fn in_workspace(p: Vec2) -> bool {
    p.x >= 0.0 && p.x <= WORKSPACE.0 && p.y >= 0.0 && p.y <= WORKSPACE.1
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL_FRAC: f64 = 0.001;

    #[test]
    fn straight_slot_length_is_rope_length() {
        let c = make_channel(ChannelKind::Straight);
        assert!((c.slot_length() - 673.1).abs() < 1e-9);
        assert!((ROPE_LENGTH - 673.1).abs() < 1e-12);
    }

    #[test]
    fn curved_slot_runs_at_mean_radius_and_matches_rope_length() {
        let c = make_channel(ChannelKind::Curved);
        // Mean radius of 16.2 in / 17.55 in radii.
        let r_mean = 0.5 * (16.2 + 17.55) * MM_PER_INCH;
        assert!((r_mean - 428.625).abs() < 1e-9);
        // Quarter arc at the mean radius vs the nominal rope length.
        let arc = std::f64::consts::FRAC_PI_2 * r_mean;
        assert!((c.slot_length() - arc).abs() < 0.05);
        assert!((c.slot_length() - 673.1).abs() / 673.1 < TOL_FRAC);
    }

    #[test]
    fn trapezoid_height_and_perimeter() {
        let c = make_channel(ChannelKind::Trapezoid);
        // Height from the isosceles side view: sqrt(114.3^2 - 31.75^2).
        let h = (114.3f64 * 114.3 - 31.75 * 31.75).sqrt();
        assert!((h - 109.8017646).abs() < 1e-6);
        // Perimeter is exactly the rope length: 254 + 190.5 + 2 * 114.3.
        assert!((c.slot_length() - 673.1).abs() < 1e-9);
        assert!(c.closed);
        // c0/c1 sit at the long-side midpoint, one sample step apart.
        assert!(c.c0().dist(vec2(0.0, -0.5 * h)) < 1e-9);
        assert!(c.c0().dist(c.c1()) <= SAMPLE_STEP + 0.05);
        assert_eq!(c.corner_arcs.len(), 4);
        assert!((c.corner_arcs[0] - 127.0).abs() < 1e-9);
        assert!((c.corner_arcs[3] - 546.1).abs() < 1e-9);
    }

    #[test]
    fn sample_spacing_is_at_most_the_step_target() {
        for kind in ChannelKind::ALL {
            let c = make_channel(kind);
            let pts = &c.centerline.points;
            for w in pts.windows(2) {
                assert!(w[0].dist(w[1]) <= SAMPLE_STEP + 1e-9);
            }
        }
    }

    #[test]
    fn min_rect_aspect_signatures() {
        // Straight mold: its own rectangle.
        let s = make_channel(ChannelKind::Straight);
        assert!((s.aspect_ratio - 673.1 / (2.68 * MM_PER_INCH)).abs() < 1e-6);

        // Quarter ring: the tight rectangle lies diagonal to the ring, with
        // extents R*sqrt(2) by R - r*cos(45 deg).
        let c = make_channel(ChannelKind::Curved);
        let r_in = 0.5 * 32.4 * MM_PER_INCH;
        let r_out = 0.5 * 35.1 * MM_PER_INCH;
        let long = r_out * std::f64::consts::SQRT_2;
        let short = r_out - r_in * std::f64::consts::FRAC_1_SQRT_2;
        assert!((c.footprint_rect.long - long).abs() < 0.1);
        assert!((c.footprint_rect.short - short).abs() < 0.1);
        assert!((c.aspect_ratio - long / short).abs() < 0.01);

        // Trapezoid mold: slot loop grown by the wall margin on every side,
        // mitered, so the acute bottom corners stretch past the plain
        // len + 2 * margin box. Frozen from an independent line-intersection
        // computation of the mitered corners.
        let t = make_channel(ChannelKind::Trapezoid);
        assert!((t.footprint_rect.long - 287.78516).abs() < 1e-4);
        assert!((t.footprint_rect.short - 135.20176).abs() < 1e-4);
        assert!((t.aspect_ratio - 2.1285607).abs() < 1e-5);

        // Signatures must be separated well beyond the matcher tolerance.
        let ratios = [s.aspect_ratio, c.aspect_ratio, t.aspect_ratio];
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    let rel = (ratios[i] - ratios[j]).abs() / ratios[j];
                    assert!(rel > 0.25, "aspect signatures too close: {ratios:?}");
                }
            }
        }
    }

    #[test]
    fn path_points_hit_both_rope_ends() {
        for kind in ChannelKind::ALL {
            let c = make_channel(kind);
            assert!(c.path_point(0.0).dist(c.c0()) < 1e-9);
            assert!(c.path_point(1.0).dist(c.c1()) < 1e-9);
        }
    }

    #[test]
    fn slot_query_straight_analytic() {
        let spec = make_channel(ChannelKind::Straight);
        let placed = PlacedChannel::new(spec, Pose2D::new(500.0, 350.0, 0.0)).unwrap();
        let q = placed.slot_query(vec2(500.0, 353.0));
        assert!((q.offset - 3.0).abs() < 1e-9);
        assert!((q.arc - 0.5 * 673.1).abs() < 1e-9);
        assert!(q.in_footprint);
        let q2 = placed.slot_query(vec2(500.0, 500.0));
        assert!(!q2.in_footprint);
    }

    #[test]
    fn slot_query_matches_polyline_projection() {
        // The analytic queries must agree with projecting onto the sampled
        // centerline (within the sampling resolution).
        for kind in ChannelKind::ALL {
            let spec = make_channel(kind);
            let placed = PlacedChannel::new(spec, Pose2D::new(480.0, 330.0, 0.4)).unwrap();
            for i in 0..40 {
                let p = vec2(300.0 + 10.0 * i as f64, 250.0 + 5.0 * i as f64);
                let q = placed.slot_query(p);
                let local = placed.pose.invert(p);
                let (_, d, _) = placed.spec.centerline.project(local);
                assert!(
                    (q.offset - d).abs() < 0.01,
                    "{kind}: analytic {} vs sampled {d}",
                    q.offset
                );
            }
        }
    }

    #[test]
    fn curved_footprint_contains_slot_band_only_inside_ring() {
        let spec = make_channel(ChannelKind::Curved);
        let placed = PlacedChannel::new(spec, Pose2D::new(500.0, 350.0, 0.0)).unwrap();
        // Walk the centerline: every point must be inside the footprint.
        for i in 0..=20 {
            let p = placed.path_point(i as f64 / 20.0);
            assert!(placed.slot_query(p).in_footprint);
        }
    }

    #[test]
    fn fixed_center_pose_fits_all_channels() {
        for kind in ChannelKind::ALL {
            let spec = make_channel(kind);
            let pose = Pose2D::new(0.5 * WORKSPACE.0, 0.5 * WORKSPACE.1, 0.0);
            assert!(PlacedChannel::new(spec, pose).is_ok());
        }
    }
}
