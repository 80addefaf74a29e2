//! Classical perception over the synthetic overhead frames.
//!
//! The pipeline recovers, from pixels alone, everything the planner needs:
//! which channel is on the table and its pose (dark-mask contour, min-area
//! box, aspect-ratio match against the three known molds, then template
//! overlap to settle orientation), a one-pixel centerline for the slot and
//! for the gasket cord, and corresponding fractional waypoints along both.
//! Every stage is a pure function of the frame, so identical frames give
//! identical estimates.

pub mod filter;
pub mod mask;
pub mod skeleton;

pub use filter::{canny, dark_mask, luma, preprocess, white_mask};
pub use mask::{components, mask_of, rdp, rdp_closed, trace_boundary, Mask};
pub use skeleton::{endpoint_count, order_skeleton, prune_spurs, thin, OrderedSkeleton};

use crate::geom::pose::normalize_angle;
use crate::geom::{
    make_channel, vec2, ChannelKind, ChannelSpec, PlacedChannel, Pose2D, Vec2, ROPE_LENGTH,
};
use crate::render::Raster;
use crate::sim::params::scalar_fields;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum VisionError {
    #[error("no dark region matches a known channel outline")]
    ChannelNotFound,
    #[error("two channel outlines fit the detected box equally well")]
    AmbiguousChannel,
    #[error("no orientation of the matched outline overlaps the detection")]
    LocalizationFailed,
    #[error("skeleton keeps extra branches after spur pruning")]
    SkeletonBranching,
    #[error("no gasket-colored region in the frame")]
    GasketMissing,
    #[error("traced gasket centerline is shorter than the cord")]
    GasketTraceIncomplete,
}

/// Tunables of the perception pipeline.
#[derive(Debug, Clone)]
pub struct VisionParams {
    /// Intensity band kept by the preprocessing threshold.
    pub thresh_lo: f64,
    pub thresh_hi: f64,
    /// Canny hysteresis thresholds on gradient magnitude.
    pub canny_lo: f64,
    pub canny_hi: f64,
    /// Contour simplification tolerance, px.
    pub rdp_eps: f64,
    /// Skeleton side branches up to this many px are pruned.
    pub spur_px: usize,
    /// Worst accepted relative aspect error against the best template.
    pub aspect_tol: f64,
    /// Two templates within this relative-error gap is a refusal, not a
    /// coin toss.
    pub ambiguity_gap: f64,
    /// Minimum template-overlap (intersection over union) for a pose.
    pub overlap_min: f64,
    /// Gasket color test: every channel at least this bright.
    pub white_min: f64,
    /// Mold color test: every channel below this.
    pub dark_max: f64,
    /// Ignore components smaller than this many px.
    pub min_component: usize,
    /// Traced gasket centerline must cover this fraction of the cord.
    pub trace_min_frac: f64,
    /// Boxes squarer than this aspect get 90-degree orientation candidates.
    pub square_aspect: f64,
}

impl Default for VisionParams {
    fn default() -> Self {
        VisionParams {
            thresh_lo: 100.0,
            thresh_hi: 255.0,
            canny_lo: 50.0,
            canny_hi: 150.0,
            rdp_eps: 2.0,
            spur_px: 5,
            aspect_tol: 0.25,
            ambiguity_gap: 0.05,
            overlap_min: 0.9,
            white_min: 180.0,
            dark_max: 60.0,
            min_component: 30,
            trace_min_frac: 0.8,
            square_aspect: 1.2,
        }
    }
}

impl VisionParams {
    scalar_fields!(
        thresh_lo,
        thresh_hi,
        canny_lo,
        canny_hi,
        rdp_eps,
        spur_px,
        aspect_tol,
        ambiguity_gap,
        overlap_min,
        white_min,
        dark_max,
        min_component,
        trace_min_frac,
        square_aspect,
    );
}

/// Oriented bounding box of a detected region, in pixels. `width >= height`
/// and the angle of the long side is canonicalized to (-pi/2, pi/2].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionBox {
    pub center: Vec2,
    pub width: f64,
    pub height: f64,
    pub angle: f64,
}

impl DetectionBox {
    pub fn aspect(&self) -> f64 {
        if self.height > 0.0 {
            self.width / self.height
        } else {
            f64::INFINITY
        }
    }
}

/// The three mold outlines the classifier knows about.
pub fn channel_templates() -> Vec<ChannelSpec> {
    ChannelKind::ALL.iter().map(|&k| make_channel(k)).collect()
}

/// Fit the largest dark component with an oriented box: boundary trace,
/// polygonal simplification, then the minimum-area enclosing rectangle.
pub fn detect_mold(img: &Raster, p: &VisionParams) -> Result<(DetectionBox, Mask), VisionError> {
    let dark = dark_mask(img, p.dark_max);
    let comps = components(&dark, p.min_component);
    let comp = comps.first().ok_or(VisionError::ChannelNotFound)?;
    let blob = mask_of(dark.w, dark.h, comp);
    let outline = trace_boundary(&blob, comp[0]);
    let pts: Vec<Vec2> = outline
        .iter()
        .map(|&(c, r)| vec2(c as f64 + 0.5, r as f64 + 0.5))
        .collect();
    let poly = rdp_closed(&pts, p.rdp_eps);
    let rect = crate::geom::rect::min_area_rect(&poly);
    Ok((
        DetectionBox {
            center: rect.center,
            width: rect.long,
            height: rect.short,
            angle: rect.angle,
        },
        blob,
    ))
}

/// Match an observed aspect ratio against template aspects. Returns the
/// template index.
pub fn classify(aspect: f64, templates: &[f64], p: &VisionParams) -> Result<usize, VisionError> {
    let mut scored: Vec<(f64, usize)> = templates
        .iter()
        .enumerate()
        .map(|(i, &t)| ((aspect - t).abs() / t, i))
        .collect();
    scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let (best, idx) = scored[0];
    if best > p.aspect_tol {
        return Err(VisionError::ChannelNotFound);
    }
    if scored.len() > 1 && scored[1].0 - best < p.ambiguity_gap {
        return Err(VisionError::AmbiguousChannel);
    }
    Ok(idx)
}

fn px_range(lo: f64, hi: f64, scale: f64, origin: f64, n: usize) -> std::ops::RangeInclusive<i64> {
    let a = (((lo - origin) * scale) - 0.5).floor().max(0.0) as i64;
    let b = ((((hi - origin) * scale) - 0.5).ceil() as i64).clamp(0, n as i64 - 1);
    a..=b
}

fn footprint_bbox(placed: &PlacedChannel) -> (f64, f64, f64, f64) {
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for p in placed.footprint_world() {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    (x0, y0, x1, y1)
}

/// Recover the mold pose from its detection box. The box itself fixes the
/// pose only up to the rectangle's symmetry, so every compatible rotation
/// is scored by mask overlap (intersection over union) against the dark
/// pixels and the best one must clear `overlap_min`.
pub fn localize(
    dark: &Mask,
    box_: &DetectionBox,
    spec: &ChannelSpec,
    img: &Raster,
    p: &VisionParams,
) -> Result<(Pose2D, f64), VisionError> {
    let rect = spec.footprint_rect;
    let center_mm = img.origin + box_.center / img.scale;
    let mut ks = vec![0.0, std::f64::consts::PI];
    if box_.aspect() < p.square_aspect || rect.aspect() < p.square_aspect {
        ks.push(std::f64::consts::FRAC_PI_2);
        ks.push(1.5 * std::f64::consts::PI);
    }
    let dark_count = dark.count();
    let mut best: Option<(f64, Pose2D)> = None;
    for k in ks {
        let theta = normalize_angle(box_.angle + k - rect.angle);
        let t = center_mm - rect.center.rotated(theta);
        let pose = Pose2D::new(t.x, t.y, theta);
        let placed = PlacedChannel {
            spec: spec.clone(),
            pose,
        };
        let (x0, y0, x1, y1) = footprint_bbox(&placed);
        let mut inter = 0usize;
        let mut pred = 0usize;
        for row in px_range(y0, y1, img.scale, img.origin.y, img.height) {
            for col in px_range(x0, x1, img.scale, img.origin.x, img.width) {
                let mm = img.origin
                    + vec2(
                        (col as f64 + 0.5) / img.scale,
                        (row as f64 + 0.5) / img.scale,
                    );
                if placed.slot_query(mm).in_footprint {
                    pred += 1;
                    if dark.get(col as i32, row as i32) {
                        inter += 1;
                    }
                }
            }
        }
        let union = dark_count + pred - inter;
        let iou = if union > 0 {
            inter as f64 / union as f64
        } else {
            0.0
        };
        if best.as_ref().is_none_or(|(s, _)| iou > *s) {
            best = Some((iou, pose));
        }
    }
    let (score, pose) = best.unwrap();
    if score < p.overlap_min {
        return Err(VisionError::LocalizationFailed);
    }
    Ok((pose, score))
}

/// Slot-interior pixels implied by a recovered channel pose.
pub fn slot_region(placed: &PlacedChannel, img: &Raster) -> Mask {
    let mut m = Mask::new(img.width, img.height);
    let half = placed.spec.half_width();
    let (x0, y0, x1, y1) = footprint_bbox(placed);
    for row in px_range(y0, y1, img.scale, img.origin.y, img.height) {
        for col in px_range(x0, x1, img.scale, img.origin.x, img.width) {
            let mm = img.origin
                + vec2(
                    (col as f64 + 0.5) / img.scale,
                    (row as f64 + 0.5) / img.scale,
                );
            let q = placed.slot_query(mm);
            if q.in_footprint && q.offset <= half {
                m.set(col as i32, row as i32, true);
            }
        }
    }
    m
}

/// One corresponding sample: the same arc-length fraction on the gasket and
/// on the channel centerline, plus the channel's direction of travel there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub f: f64,
    pub gasket_px: Vec2,
    pub channel_px: Vec2,
    pub tangent: Vec2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaypointSet {
    pub items: Vec<Waypoint>,
    /// True when the gasket trace runs opposite the channel direction and
    /// was sampled end-for-end.
    pub swapped: bool,
}

/// Pair the gasket trace with the channel centerline. For open channels the
/// end assignment minimizing the summed endpoint distance wins (ties keep
/// the identity); a closed channel has no ends, so both gasket directions
/// are scored across the requested fractions instead.
pub fn correspond_and_sample(
    gasket: &OrderedSkeleton,
    channel: &OrderedSkeleton,
    fractions: &[f64],
) -> WaypointSet {
    let swapped = if channel.closed {
        let probe: Vec<f64> = if fractions.is_empty() {
            vec![0.0, 0.25, 0.5, 0.75, 1.0]
        } else {
            fractions.to_vec()
        };
        let score = |rev: bool| -> f64 {
            probe
                .iter()
                .map(|&f| {
                    let gf = if rev { 1.0 - f } else { f };
                    gasket.point_at(gf).dist(channel.point_at(f))
                })
                .sum()
        };
        score(true) < score(false)
    } else {
        let id = gasket.first().dist(channel.first()) + gasket.last().dist(channel.last());
        let sw = gasket.last().dist(channel.first()) + gasket.first().dist(channel.last());
        sw < id
    };
    let items = fractions
        .iter()
        .map(|&f| {
            let f = f.clamp(0.0, 1.0);
            let gf = if swapped { 1.0 - f } else { f };
            Waypoint {
                f,
                gasket_px: gasket.point_at(gf),
                channel_px: channel.point_at(f),
                tangent: channel.tangent_at(f),
            }
        })
        .collect();
    WaypointSet { items, swapped }
}

/// Everything perception recovers from one frame.
#[derive(Debug, Clone)]
pub struct Perception {
    pub kind: ChannelKind,
    pub pose: Pose2D,
    pub overlap: f64,
    pub mold_box: DetectionBox,
    /// The matched outline placed at the recovered pose.
    pub channel: PlacedChannel,
    pub channel_skel: OrderedSkeleton,
    pub gasket_skel: Option<OrderedSkeleton>,
    pub scale: f64,
    pub origin: Vec2,
}

impl Perception {
    pub fn px_to_mm(&self, px: Vec2) -> Vec2 {
        self.origin + px / self.scale
    }

    pub fn waypoints(&self, fractions: &[f64]) -> Result<WaypointSet, VisionError> {
        let g = self
            .gasket_skel
            .as_ref()
            .ok_or(VisionError::GasketMissing)?;
        Ok(correspond_and_sample(g, &self.channel_skel, fractions))
    }

    /// Re-run only the gasket stages on a new frame, keeping the channel
    /// estimate. The mold never moves mid-run, and a cord lying across it
    /// would otherwise split the dark region and spoil re-detection.
    pub fn update_gasket(&mut self, img: &Raster, p: &VisionParams) -> Result<(), VisionError> {
        self.gasket_skel = Some(trace_gasket(img, p)?);
        Ok(())
    }
}

fn trace_gasket(img: &Raster, p: &VisionParams) -> Result<OrderedSkeleton, VisionError> {
    let white = white_mask(img, p.white_min);
    let comps = components(&white, p.min_component);
    let comp = comps.first().ok_or(VisionError::GasketMissing)?;
    let blob = mask_of(white.w, white.h, comp);
    let skel = order_skeleton(&blob, p.spur_px, None)?;
    // The thinning shortens each end by roughly the cord radius; anything
    // much shorter means the trace lost part of the cord.
    let expect = ROPE_LENGTH * img.scale;
    if skel.len_px() < p.trace_min_frac * expect {
        return Err(VisionError::GasketTraceIncomplete);
    }
    Ok(skel)
}

/// Full pipeline on one frame: find and classify the mold, recover its
/// pose, build both centerlines. The gasket trace is optional only in the
/// sense that a frame without a cord still yields the channel estimate.
pub fn perceive(img: &Raster, p: &VisionParams) -> Result<Perception, VisionError> {
    let templates = channel_templates();
    let (mold_box, dark) = detect_mold(img, p)?;
    let aspects: Vec<f64> = templates.iter().map(|t| t.aspect_ratio).collect();
    let idx = classify(mold_box.aspect(), &aspects, p)?;
    let spec = &templates[idx];
    let (pose, overlap) = localize(&dark, &mold_box, spec, img, p)?;
    let placed = PlacedChannel {
        spec: spec.clone(),
        pose,
    };

    let slot = slot_region(&placed, img);
    let c0_px = (placed.path_point(0.0) - img.origin) * img.scale;
    let hint = placed.spec.closed.then_some(c0_px);
    let mut channel_skel = order_skeleton(&slot, p.spur_px, hint)?;
    if placed.spec.closed {
        // March the loop the same way the slot path runs (counterclockwise
        // in workspace axes; rotations preserve that).
        if channel_skel.signed_area() < 0.0 {
            channel_skel = channel_skel.reversed();
        }
    } else if channel_skel.first().dist(c0_px) > channel_skel.last().dist(c0_px) {
        channel_skel = channel_skel.reversed();
    }

    let gasket_skel = match trace_gasket(img, p) {
        Ok(s) => Some(s),
        Err(VisionError::GasketMissing) => None,
        Err(e) => return Err(e),
    };

    Ok(Perception {
        kind: spec.kind,
        pose,
        overlap,
        mold_box,
        channel: placed,
        channel_skel,
        gasket_skel,
        scale: img.scale,
        origin: img.origin,
    })
}
