//! Synthetic overhead camera.
//!
//! Orthographic, axis-aligned, no lighting, no anti-aliasing: each pixel is
//! classified by what its center point sees from straight above. Painting is
//! table first, mold second, rope last, so the rope occludes the slot floor
//! wherever it lies over it. Rendering is a pure function of the scene; the
//! optional sensor noise is a separate, explicitly seeded step.

use crate::geom::{seg_dist, vec2, PlacedChannel, Vec2, WORKSPACE};
use crate::rng::Rng;
use crate::sim::World;

/// Table surface everywhere the mold and rope are not.
pub const BACKGROUND: [u8; 3] = [60, 130, 60];
/// Mold body (top surface of the block).
pub const MOLD: [u8; 3] = [20, 20, 20];
/// Slot floor: slightly darker than the mold top around it.
pub const SLOT: [u8; 3] = [10, 10, 10];
/// Gasket cord.
pub const GASKET: [u8; 3] = [230, 230, 230];

/// Default camera resolution, in pixels per millimetre.
pub const DEFAULT_SCALE: f64 = 0.5;

/// Per-pixel semantic class. The slot floor counts as mold: it is part of
/// the same rigid body and label consumers only care about the three
/// material classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Background,
    Mold,
    Gasket,
}

/// 8-bit RGB image over the workspace. Row-major, row 0 at workspace y = 0
/// (no vertical flip: pixel row grows with y, column with x).
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
    /// Pixels per millimetre.
    pub scale: f64,
    /// Workspace point at the outer corner of pixel (0, 0).
    pub origin: Vec2,
}

impl Raster {
    fn filled(scale: f64, color: [u8; 3]) -> Raster {
        let (width, height) = raster_size(scale);
        let mut pixels = Vec::with_capacity(3 * width * height);
        for _ in 0..width * height {
            pixels.extend_from_slice(&color);
        }
        Raster {
            width,
            height,
            pixels,
            scale,
            origin: vec2(0.0, 0.0),
        }
    }

    pub fn rgb(&self, col: usize, row: usize) -> [u8; 3] {
        let i = 3 * (row * self.width + col);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    fn put(&mut self, col: usize, row: usize, c: [u8; 3]) {
        let i = 3 * (row * self.width + col);
        self.pixels[i..i + 3].copy_from_slice(&c);
    }

    /// Workspace point at the center of a pixel.
    pub fn mm_at(&self, col: usize, row: usize) -> Vec2 {
        self.origin
            + vec2(
                (col as f64 + 0.5) / self.scale,
                (row as f64 + 0.5) / self.scale,
            )
    }

    /// Fractional pixel coordinates of a workspace point; the center of
    /// pixel (c, r) maps to (c + 0.5, r + 0.5).
    pub fn px_of(&self, p: Vec2) -> Vec2 {
        (p - self.origin) * self.scale
    }

    pub fn pixel_containing(&self, p: Vec2) -> Option<(usize, usize)> {
        let px = self.px_of(p);
        if px.x < 0.0 || px.y < 0.0 {
            return None;
        }
        let (col, row) = (px.x as usize, px.y as usize);
        (col < self.width && row < self.height).then_some((col, row))
    }

    /// Binary PPM (P6), bit-exact for a given raster.
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }
}

/// Per-pixel ground-truth labels for a rendered scene. Same grid and
/// painting order as the raster, so labels and colors agree pixel-for-pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMap {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<Label>,
    pub scale: f64,
    pub origin: Vec2,
}

impl LabelMap {
    pub fn label(&self, col: usize, row: usize) -> Label {
        self.labels[row * self.width + col]
    }

    /// 0/255 mask of one class, suitable for a P5 dump.
    pub fn mask(&self, class: Label) -> Vec<u8> {
        self.labels
            .iter()
            .map(|&l| if l == class { 255 } else { 0 })
            .collect()
    }

    pub fn count(&self, class: Label) -> usize {
        self.labels.iter().filter(|&&l| l == class).count()
    }
}

/// Binary PGM (P5) for a single-channel image.
pub fn to_pgm(width: usize, height: usize, data: &[u8]) -> Vec<u8> {
    assert_eq!(data.len(), width * height);
    let mut out = format!("P5\n{} {}\n255\n", width, height).into_bytes();
    out.extend_from_slice(data);
    out
}

/// Raster dimensions covering the whole workspace at the given scale.
pub fn raster_size(scale: f64) -> (usize, usize) {
    (
        (WORKSPACE.0 * scale).round() as usize,
        (WORKSPACE.1 * scale).round() as usize,
    )
}

enum Paint {
    Mold,
    SlotFloor,
    Gasket,
}

/// Walk every non-background pixel of the scene in a fixed order (mold
/// first, then rope segments front to back), so color and label buffers
/// built from the same walk agree on occlusion.
fn each_scene_pixel(
    scale: f64,
    channel: Option<&PlacedChannel>,
    rope_xy: &[Vec2],
    rope_radius: f64,
    sink: &mut impl FnMut(usize, usize, Paint),
) {
    let (width, height) = raster_size(scale);
    let center =
        |col: usize, row: usize| vec2((col as f64 + 0.5) / scale, (row as f64 + 0.5) / scale);
    // Pixel-index range whose centers can fall inside an mm bounding box.
    let clip = |lo: f64, hi: f64, n: usize| {
        let a = (lo * scale - 0.5).floor().max(0.0) as usize;
        let b = ((hi * scale - 0.5).ceil() as isize).clamp(0, n as isize - 1) as usize;
        a..=b
    };

    if let Some(ch) = channel {
        let pts = ch.footprint_world();
        let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for p in &pts {
            x0 = x0.min(p.x);
            y0 = y0.min(p.y);
            x1 = x1.max(p.x);
            y1 = y1.max(p.y);
        }
        let half = 0.5 * ch.spec.slot_width;
        for row in clip(y0, y1, height) {
            for col in clip(x0, x1, width) {
                let q = ch.slot_query(center(col, row));
                if q.in_footprint {
                    let paint = if q.offset <= half {
                        Paint::SlotFloor
                    } else {
                        Paint::Mold
                    };
                    sink(col, row, paint);
                }
            }
        }
    }

    for seg in rope_xy.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let r = rope_radius;
        for row in clip(a.y.min(b.y) - r, a.y.max(b.y) + r, height) {
            for col in clip(a.x.min(b.x) - r, a.x.max(b.x) + r, width) {
                if seg_dist(center(col, row), a, b) <= r {
                    sink(col, row, Paint::Gasket);
                }
            }
        }
    }
}

/// Render a scene: optional placed channel plus rope particle centers
/// (top view, so only xy matters; stroke width is the cord diameter).
pub fn render_scene(
    scale: f64,
    channel: Option<&PlacedChannel>,
    rope_xy: &[Vec2],
    rope_radius: f64,
) -> Raster {
    let mut img = Raster::filled(scale, BACKGROUND);
    each_scene_pixel(
        scale,
        channel,
        rope_xy,
        rope_radius,
        &mut |col, row, paint| {
            let c = match paint {
                Paint::Mold => MOLD,
                Paint::SlotFloor => SLOT,
                Paint::Gasket => GASKET,
            };
            img.put(col, row, c);
        },
    );
    img
}

/// Ground-truth labels for the same scene; built by the same pixel walk as
/// `render_scene`, so every raster color corresponds to exactly one label.
pub fn label_scene(
    scale: f64,
    channel: Option<&PlacedChannel>,
    rope_xy: &[Vec2],
    rope_radius: f64,
) -> LabelMap {
    let (width, height) = raster_size(scale);
    let mut labels = vec![Label::Background; width * height];
    each_scene_pixel(
        scale,
        channel,
        rope_xy,
        rope_radius,
        &mut |col, row, paint| {
            labels[row * width + col] = match paint {
                Paint::Mold | Paint::SlotFloor => Label::Mold,
                Paint::Gasket => Label::Gasket,
            };
        },
    );
    LabelMap {
        width,
        height,
        labels,
        scale,
        origin: vec2(0.0, 0.0),
    }
}

fn rope_xy(w: &World) -> Vec<Vec2> {
    w.particles.iter().map(|p| p.pos.xy()).collect()
}

/// Overhead frame of the current world state at the default resolution.
pub fn render_overhead(w: &World) -> Raster {
    render_scene(
        DEFAULT_SCALE,
        Some(&w.channel),
        &rope_xy(w),
        w.rope_radius(),
    )
}

pub fn ground_truth(w: &World) -> LabelMap {
    label_scene(
        DEFAULT_SCALE,
        Some(&w.channel),
        &rope_xy(w),
        w.rope_radius(),
    )
}

/// Additive per-channel Gaussian sensor noise, clamped to 8 bits. Pixels
/// are perturbed in storage order, so one rng stream gives one image.
pub fn add_noise(img: &mut Raster, sigma: f64, rng: &mut Rng) {
    if sigma <= 0.0 {
        return;
    }
    for v in &mut img.pixels {
        *v = (*v as f64 + sigma * rng.gaussian())
            .round()
            .clamp(0.0, 255.0) as u8;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{make_channel, ChannelKind, Pose2D, MM_PER_INCH, ROPE_LENGTH};

    fn placed(kind: ChannelKind, x: f64, y: f64, theta: f64) -> PlacedChannel {
        PlacedChannel::new(make_channel(kind), Pose2D::new(x, y, theta)).unwrap()
    }

    #[test]
    fn empty_scene_is_all_background_at_the_documented_size() {
        let img = render_scene(DEFAULT_SCALE, None, &[], 6.35);
        assert_eq!((img.width, img.height), (500, 350));
        assert!(img.pixels.chunks(3).all(|c| c == BACKGROUND));
        let labels = label_scene(DEFAULT_SCALE, None, &[], 6.35);
        assert_eq!(labels.count(Label::Background), 500 * 350);
    }

    #[test]
    fn pixel_grid_and_workspace_coordinates_invert_within_half_a_pixel() {
        let img = render_scene(DEFAULT_SCALE, None, &[], 6.35);
        assert_eq!(img.mm_at(0, 0), vec2(1.0, 1.0));
        let px = img.px_of(vec2(1.0, 1.0));
        assert!((px.x - 0.5).abs() < 1e-12 && (px.y - 0.5).abs() < 1e-12);

        let ch = placed(ChannelKind::Trapezoid, 480.0, 360.0, 0.3);
        for i in 0..=100 {
            let p = ch.path_point(i as f64 / 100.0);
            let (col, row) = img.pixel_containing(p).unwrap();
            let back = img.px_of(img.mm_at(col, row));
            let fwd = img.px_of(p);
            assert!((back.x - fwd.x).abs() <= 0.5 + 1e-9);
            assert!((back.y - fwd.y).abs() <= 0.5 + 1e-9);
        }
        assert_eq!(img.pixel_containing(vec2(1000.0, 700.0)), None);
        assert_eq!(img.pixel_containing(vec2(-0.1, 5.0)), None);
    }

    #[test]
    fn mold_coverage_matches_the_footprint_area() {
        // Straight mold footprint is an exact rectangle, so the dark pixel
        // count has a closed-form value: area times scale squared.
        let ch = placed(ChannelKind::Straight, 500.0, 350.0, 0.0);
        let img = render_scene(DEFAULT_SCALE, Some(&ch), &[], 6.35);
        let dark = img
            .pixels
            .chunks(3)
            .filter(|c| c.iter().all(|&v| v < 60))
            .count() as f64;
        let area = ROPE_LENGTH * 2.68 * MM_PER_INCH;
        let expect = area * DEFAULT_SCALE * DEFAULT_SCALE;
        assert!(
            (dark - expect).abs() <= 0.02 * expect,
            "dark {dark} vs expected {expect}"
        );
        // The slot floor shade is present and strictly a minority of it.
        let slot = img.pixels.chunks(3).filter(|c| *c == SLOT).count();
        assert!(slot > 0 && (slot as f64) < 0.3 * dark);
    }

    #[test]
    fn rope_occludes_the_slot_floor_and_labels_agree_with_colors() {
        let ch = placed(ChannelKind::Straight, 500.0, 350.0, 0.0);
        // Rope seated along the whole slot: centerline samples at rest pitch.
        let n = 107;
        let rope: Vec<Vec2> = (0..n)
            .map(|i| ch.path_point(i as f64 / (n - 1) as f64))
            .collect();
        let img = render_scene(DEFAULT_SCALE, Some(&ch), &rope, 6.35);
        let labels = label_scene(DEFAULT_SCALE, Some(&ch), &rope, 6.35);

        let at = |p: Vec2| {
            let (c, r) = img.pixel_containing(p).unwrap();
            (img.rgb(c, r), labels.label(c, r))
        };
        assert_eq!(at(ch.path_point(0.5)), (GASKET, Label::Gasket));
        assert_eq!(at(vec2(500.0, 350.0 + 20.0)), (MOLD, Label::Mold));
        assert_eq!(at(vec2(30.0, 30.0)), (BACKGROUND, Label::Background));
        // A rope of slot width seated on the centerline leaves no slot
        // floor visible anywhere.
        assert_eq!(img.pixels.chunks(3).filter(|c| *c == SLOT).count(), 0);

        // Full cross-consistency: each color pairs with exactly one label.
        for row in 0..img.height {
            for col in 0..img.width {
                let ok = match labels.label(col, row) {
                    Label::Background => img.rgb(col, row) == BACKGROUND,
                    Label::Mold => img.rgb(col, row) == MOLD || img.rgb(col, row) == SLOT,
                    Label::Gasket => img.rgb(col, row) == GASKET,
                };
                assert!(ok, "color/label mismatch at ({col},{row})");
            }
        }
    }

    #[test]
    fn label_masks_partition_the_frame() {
        let ch = placed(ChannelKind::Curved, 500.0, 350.0, 0.4);
        let rope: Vec<Vec2> = (0..40)
            .map(|i| vec2(100.0 + 6.0 * i as f64, 120.0))
            .collect();
        let labels = label_scene(DEFAULT_SCALE, Some(&ch), &rope, 6.35);
        let (bg, mold, gas) = (
            labels.mask(Label::Background),
            labels.mask(Label::Mold),
            labels.mask(Label::Gasket),
        );
        for i in 0..labels.labels.len() {
            assert_eq!(bg[i] as u32 + mold[i] as u32 + gas[i] as u32, 255);
        }
        assert!(labels.count(Label::Mold) > 0 && labels.count(Label::Gasket) > 0);
    }

    #[test]
    fn rendering_is_deterministic_and_ppm_output_is_bit_exact() {
        let ch = placed(ChannelKind::Trapezoid, 500.0, 350.0, -0.7);
        let rope: Vec<Vec2> = (0..107)
            .map(|i| {
                vec2(
                    200.0 + 5.9 * i as f64,
                    300.0 + 40.0 * (i as f64 * 0.21).sin(),
                )
            })
            .collect();
        let a = render_scene(DEFAULT_SCALE, Some(&ch), &rope, 6.35);
        let b = render_scene(DEFAULT_SCALE, Some(&ch), &rope, 6.35);
        assert_eq!(a, b);
        let ppm = a.to_ppm();
        assert_eq!(ppm, b.to_ppm());
        assert!(ppm.starts_with(b"P6\n500 350\n255\n"));
        assert_eq!(ppm.len(), b"P6\n500 350\n255\n".len() + 3 * 500 * 350);

        let mask = label_scene(DEFAULT_SCALE, Some(&ch), &rope, 6.35).mask(Label::Gasket);
        let pgm = to_pgm(a.width, a.height, &mask);
        assert!(pgm.starts_with(b"P5\n500 350\n255\n"));
        assert_eq!(pgm.len(), b"P5\n500 350\n255\n".len() + 500 * 350);
    }

    #[test]
    fn palette_classes_stay_far_apart() {
        let dist = |a: [u8; 3], b: [u8; 3]| {
            (0..3)
                .map(|i| (a[i] as f64 - b[i] as f64).powi(2))
                .sum::<f64>()
                .sqrt()
        };
        // SLOT is a shade of MOLD (same class), so it only needs to be far
        // from the other two classes.
        for (a, b) in [
            (BACKGROUND, MOLD),
            (BACKGROUND, GASKET),
            (MOLD, GASKET),
            (BACKGROUND, SLOT),
            (SLOT, GASKET),
        ] {
            assert!(dist(a, b) > 80.0, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn sensor_noise_is_seeded_and_sized_by_sigma() {
        let ch = placed(ChannelKind::Straight, 500.0, 350.0, 0.2);
        let clean = render_scene(DEFAULT_SCALE, Some(&ch), &[], 6.35);

        let mut a = clean.clone();
        add_noise(&mut a, 2.0, &mut Rng::stream(7, 0));
        let mut b = clean.clone();
        add_noise(&mut b, 2.0, &mut Rng::stream(7, 0));
        assert_eq!(a, b);

        let mut c = clean.clone();
        add_noise(&mut c, 2.0, &mut Rng::stream(7, 1));
        assert_ne!(a, c);

        let mut z = clean.clone();
        add_noise(&mut z, 0.0, &mut Rng::stream(7, 0));
        assert_eq!(z, clean);

        // Mean absolute perturbation of N(0, 2) is 2 * sqrt(2/pi) = 1.60.
        let mean = a
            .pixels
            .iter()
            .zip(&clean.pixels)
            .map(|(&x, &y)| (x as f64 - y as f64).abs())
            .sum::<f64>()
            / a.pixels.len() as f64;
        assert!((1.3..1.9).contains(&mean), "mean noise {mean}");
    }
}
