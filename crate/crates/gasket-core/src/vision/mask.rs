//! Binary masks, connected components, boundary tracing, and contour
//! simplification — the pixel-set plumbing under the perception pipeline.

use crate::geom::{seg_dist, vec2, Vec2};

/// Dense boolean image; out-of-bounds reads are background.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    pub w: usize,
    pub h: usize,
    pub data: Vec<bool>,
}

impl Mask {
    pub fn new(w: usize, h: usize) -> Mask {
        Mask {
            w,
            h,
            data: vec![false; w * h],
        }
    }

    #[inline]
    pub fn get(&self, c: i32, r: i32) -> bool {
        if c < 0 || r < 0 || c as usize >= self.w || r as usize >= self.h {
            return false;
        }
        self.data[r as usize * self.w + c as usize]
    }

    #[inline]
    pub fn set(&mut self, c: i32, r: i32, v: bool) {
        if c >= 0 && r >= 0 && (c as usize) < self.w && (r as usize) < self.h {
            self.data[r as usize * self.w + c as usize] = v;
        }
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v).count()
    }

    /// Center coordinates of pixel index i, in fractional px.
    pub fn center(&self, i: usize) -> Vec2 {
        vec2((i % self.w) as f64 + 0.5, (i / self.w) as f64 + 0.5)
    }
}

/// 8-connected components of at least `min_size` pixels, each a sorted list
/// of pixel indices, largest component first (ties: first-seen first).
pub fn components(m: &Mask, min_size: usize) -> Vec<Vec<usize>> {
    let mut seen = vec![false; m.data.len()];
    let mut out: Vec<Vec<usize>> = Vec::new();
    for start in 0..m.data.len() {
        if !m.data[start] || seen[start] {
            continue;
        }
        let mut comp = vec![start];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            let (c, r) = ((i % m.w) as i32, (i / m.w) as i32);
            for dr in -1..=1 {
                for dc in -1..=1 {
                    if dr == 0 && dc == 0 {
                        continue;
                    }
                    let (nc, nr) = (c + dc, r + dr);
                    if m.get(nc, nr) {
                        let ni = nr as usize * m.w + nc as usize;
                        if !seen[ni] {
                            seen[ni] = true;
                            comp.push(ni);
                            stack.push(ni);
                        }
                    }
                }
            }
        }
        if comp.len() >= min_size {
            comp.sort_unstable();
            out.push(comp);
        }
    }
    out.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    out
}

/// Mask containing only the given pixel indices.
pub fn mask_of(w: usize, h: usize, pixels: &[usize]) -> Mask {
    let mut m = Mask::new(w, h);
    for &i in pixels {
        m.data[i] = true;
    }
    m
}

/// Moore-neighbor boundary trace of the component containing `start_idx`
/// (which must be its topmost-leftmost pixel). Returns the closed boundary
/// as ordered pixel coordinates, first point not repeated at the end.
pub fn trace_boundary(m: &Mask, start_idx: usize) -> Vec<(i32, i32)> {
    const D: [(i32, i32); 8] = [
        (-1, 0),
        (-1, -1),
        (0, -1),
        (1, -1),
        (1, 0),
        (1, 1),
        (0, 1),
        (-1, 1),
    ];
    let dir_of = |from: (i32, i32), to: (i32, i32)| {
        D.iter()
            .position(|&d| d == (to.0 - from.0, to.1 - from.1))
            .expect("backtrack cell must touch the current cell")
    };
    let s = ((start_idx % m.w) as i32, (start_idx / m.w) as i32);
    let mut out = vec![s];
    let mut cur = s;
    // The west neighbor of the topmost-leftmost pixel is background.
    let mut back = (s.0 - 1, s.1);
    let mut first_move: Option<((i32, i32), (i32, i32))> = None;
    for _ in 0..4 * m.w * m.h + 8 {
        let bdir = dir_of(cur, back);
        let mut hit = None;
        for k in 1..=8 {
            let d = (bdir + k) % 8;
            let n = (cur.0 + D[d].0, cur.1 + D[d].1);
            if m.get(n.0, n.1) {
                hit = Some(n);
                break;
            }
            back = n;
        }
        let Some(next) = hit else {
            return out; // isolated pixel
        };
        if first_move == Some((cur, next)) {
            out.pop(); // the walk re-entered its first transition; drop the dup
            return out;
        }
        if first_move.is_none() {
            first_move = Some((cur, next));
        }
        out.push(next);
        cur = next;
    }
    out
}

/// Ramer-Douglas-Peucker simplification of an open polyline.
pub fn rdp(points: &[Vec2], eps: f64) -> Vec<Vec2> {
    if points.len() <= 2 {
        return points.to_vec();
    }
    let mut keep = vec![false; points.len()];
    keep[0] = true;
    keep[points.len() - 1] = true;
    let mut stack = vec![(0usize, points.len() - 1)];
    while let Some((i, j)) = stack.pop() {
        let mut far = 0.0;
        let mut at = i;
        for k in i + 1..j {
            let d = seg_dist(points[k], points[i], points[j]);
            if d > far {
                far = d;
                at = k;
            }
        }
        if far > eps {
            keep[at] = true;
            stack.push((i, at));
            stack.push((at, j));
        }
    }
    points
        .iter()
        .zip(&keep)
        .filter_map(|(&p, &k)| k.then_some(p))
        .collect()
}

/// RDP for a closed contour: split at the vertex farthest from the first
/// point so both halves have stable anchors, simplify each, and rejoin.
pub fn rdp_closed(points: &[Vec2], eps: f64) -> Vec<Vec2> {
    if points.len() <= 3 {
        return points.to_vec();
    }
    let far = points
        .iter()
        .enumerate()
        .max_by(|a, b| {
            let da = a.1.dist(points[0]);
            let db = b.1.dist(points[0]);
            da.partial_cmp(&db).unwrap()
        })
        .map(|(i, _)| i)
        .unwrap();
    let mut first: Vec<Vec2> = points[..=far].to_vec();
    let mut second: Vec<Vec2> = points[far..].to_vec();
    second.push(points[0]);
    let mut a = rdp(&first, eps);
    let b = rdp(&second, eps);
    a.pop(); // shared joint
    first.clear();
    first.append(&mut a);
    first.extend_from_slice(&b[..b.len() - 1]); // shared wrap point
    first
}
