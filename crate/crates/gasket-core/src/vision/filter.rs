//! Grayscale filtering: luma conversion, Gaussian smoothing, Canny edges,
//! and the color-threshold masks that separate the three scene materials.

use super::mask::Mask;
use super::VisionParams;
use crate::render::Raster;

/// Dense grayscale image in f64 so repeated filtering does not quantize.
#[derive(Debug, Clone)]
pub struct Gray {
    pub w: usize,
    pub h: usize,
    pub data: Vec<f64>,
}

impl Gray {
    #[inline]
    fn at(&self, c: i32, r: i32) -> f64 {
        // Clamp-to-border sampling keeps filters well-defined at the edges.
        let c = c.clamp(0, self.w as i32 - 1) as usize;
        let r = r.clamp(0, self.h as i32 - 1) as usize;
        self.data[r * self.w + c]
    }
}

/// ITU-R 601 luma.
pub fn luma(img: &Raster) -> Gray {
    let data = img
        .pixels
        .chunks(3)
        .map(|p| 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64)
        .collect();
    Gray {
        w: img.width,
        h: img.height,
        data,
    }
}

/// 5x5 Gaussian, sigma = 1, applied separably.
pub fn blur5(g: &Gray) -> Gray {
    // exp(-k^2/2) for k in -2..=2, normalized.
    const K: [f64; 5] = [
        0.054_488_684_549_642_945,
        0.244_201_342_003_233_46,
        0.402_619_946_894_247_2,
        0.244_201_342_003_233_46,
        0.054_488_684_549_642_945,
    ];
    let mut tmp = Gray {
        w: g.w,
        h: g.h,
        data: vec![0.0; g.data.len()],
    };
    for r in 0..g.h as i32 {
        for c in 0..g.w as i32 {
            let mut v = 0.0;
            for (k, coef) in K.iter().enumerate() {
                v += coef * g.at(c + k as i32 - 2, r);
            }
            tmp.data[r as usize * g.w + c as usize] = v;
        }
    }
    let mut out = Gray {
        w: g.w,
        h: g.h,
        data: vec![0.0; g.data.len()],
    };
    for r in 0..g.h as i32 {
        for c in 0..g.w as i32 {
            let mut v = 0.0;
            for (k, coef) in K.iter().enumerate() {
                v += coef * tmp.at(c, r + k as i32 - 2);
            }
            out.data[r as usize * g.w + c as usize] = v;
        }
    }
    out
}

/// Pixels whose intensity falls inside [lo, hi].
pub fn threshold(g: &Gray, lo: f64, hi: f64) -> Mask {
    Mask {
        w: g.w,
        h: g.h,
        data: g.data.iter().map(|&v| v >= lo && v <= hi).collect(),
    }
}

/// Canny edge detector: Sobel gradients, 4-sector non-maximum suppression,
/// and double-threshold hysteresis (8-connected).
pub fn canny(g: &Gray, lo: f64, hi: f64) -> Mask {
    let (w, h) = (g.w, g.h);
    let mut mag = vec![0.0f64; w * h];
    let mut dir = vec![0u8; w * h];
    for r in 1..h as i32 - 1 {
        for c in 1..w as i32 - 1 {
            let gx = g.at(c + 1, r - 1) + 2.0 * g.at(c + 1, r) + g.at(c + 1, r + 1)
                - g.at(c - 1, r - 1)
                - 2.0 * g.at(c - 1, r)
                - g.at(c - 1, r + 1);
            let gy = g.at(c - 1, r + 1) + 2.0 * g.at(c, r + 1) + g.at(c + 1, r + 1)
                - g.at(c - 1, r - 1)
                - 2.0 * g.at(c, r - 1)
                - g.at(c + 1, r - 1);
            let i = r as usize * w + c as usize;
            mag[i] = gx.hypot(gy);
            // Quantize the gradient direction to one of 4 sectors.
            let a = gy.atan2(gx).rem_euclid(std::f64::consts::PI);
            let s = std::f64::consts::FRAC_PI_8;
            dir[i] = if a < s || a >= 7.0 * s {
                0 // horizontal gradient: compare east/west
            } else if a < 3.0 * s {
                1 // diagonal
            } else if a < 5.0 * s {
                2 // vertical gradient: compare north/south
            } else {
                3 // anti-diagonal
            };
        }
    }
    let step: [(i32, i32); 4] = [(1, 0), (1, 1), (0, 1), (-1, 1)];
    let at = |c: i32, r: i32| -> f64 {
        if c < 0 || r < 0 || c as usize >= w || r as usize >= h {
            0.0
        } else {
            mag[r as usize * w + c as usize]
        }
    };
    let mut strong = Vec::new();
    let mut weak = Mask::new(w, h);
    let mut edges = Mask::new(w, h);
    for r in 0..h as i32 {
        for c in 0..w as i32 {
            let i = r as usize * w + c as usize;
            let m = mag[i];
            if m < lo {
                continue;
            }
            let (dc, dr) = step[dir[i] as usize];
            if m < at(c + dc, r + dr) || m < at(c - dc, r - dr) {
                continue; // not the ridge of the gradient
            }
            weak.data[i] = true;
            if m >= hi {
                strong.push(i);
                edges.data[i] = true;
            }
        }
    }
    // Hysteresis: weak edges survive only when connected to a strong one.
    while let Some(i) = strong.pop() {
        let (c, r) = ((i % w) as i32, (i / w) as i32);
        for dr in -1..=1 {
            for dc in -1..=1 {
                let (nc, nr) = (c + dc, r + dr);
                if weak.get(nc, nr) {
                    let ni = nr as usize * w + nc as usize;
                    if !edges.data[ni] {
                        edges.data[ni] = true;
                        strong.push(ni);
                    }
                }
            }
        }
    }
    edges
}

/// Edge mask of an input frame: luma, 5x5 Gaussian, Canny on the blurred
/// image, restricted to the in-band intensity region.
pub fn preprocess(img: &Raster, p: &VisionParams) -> Mask {
    let blurred = blur5(&luma(img));
    let band = threshold(&blurred, p.thresh_lo, p.thresh_hi);
    let edges = canny(&blurred, p.canny_lo, p.canny_hi);
    Mask {
        w: edges.w,
        h: edges.h,
        data: edges
            .data
            .iter()
            .zip(&band.data)
            .map(|(&e, &b)| e && b)
            .collect(),
    }
}

/// Gasket pixels: bright in every channel. Works on the raw frame — the
/// palette leaves 20+ sigma of margin at the default noise level.
pub fn white_mask(img: &Raster, min: f64) -> Mask {
    Mask {
        w: img.width,
        h: img.height,
        data: img
            .pixels
            .chunks(3)
            .map(|p| p.iter().all(|&v| v as f64 >= min))
            .collect(),
    }
}

/// Mold pixels: dark in every channel.
pub fn dark_mask(img: &Raster, max: f64) -> Mask {
    Mask {
        w: img.width,
        h: img.height,
        data: img
            .pixels
            .chunks(3)
            .map(|p| p.iter().all(|&v| (v as f64) < max))
            .collect(),
    }
}
