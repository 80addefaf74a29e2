//! Thinning to a one-pixel skeleton and ordering it into a traversable
//! centerline with pixel arc length.

use super::mask::Mask;
use super::VisionError;
use crate::geom::{vec2, Vec2};

/// Zhang-Suen thinning: erode the mask to a one-pixel-wide, 8-connected
/// skeleton while preserving topology.
pub fn thin(src: &Mask) -> Mask {
    let mut m = src.clone();
    // Neighbor ring p2..p9: N, NE, E, SE, S, SW, W, NW.
    const RING: [(i32, i32); 8] = [
        (0, -1),
        (1, -1),
        (1, 0),
        (1, 1),
        (0, 1),
        (-1, 1),
        (-1, 0),
        (-1, -1),
    ];
    let mut kill: Vec<usize> = Vec::new();
    loop {
        let mut changed = false;
        for pass in 0..2 {
            kill.clear();
            for r in 0..m.h as i32 {
                for c in 0..m.w as i32 {
                    if !m.get(c, r) {
                        continue;
                    }
                    let p: Vec<bool> = RING.iter().map(|&(dc, dr)| m.get(c + dc, r + dr)).collect();
                    let b = p.iter().filter(|&&v| v).count();
                    if !(2..=6).contains(&b) {
                        continue;
                    }
                    let a = (0..8).filter(|&i| !p[i] && p[(i + 1) % 8]).count();
                    if a != 1 {
                        continue;
                    }
                    // Indices: p[0]=N, p[2]=E, p[4]=S, p[6]=W.
                    let ok = if pass == 0 {
                        !(p[0] && p[2] && p[4]) && !(p[2] && p[4] && p[6])
                    } else {
                        !(p[0] && p[2] && p[6]) && !(p[0] && p[4] && p[6])
                    };
                    if ok {
                        kill.push(r as usize * m.w + c as usize);
                    }
                }
            }
            for &i in &kill {
                m.data[i] = false;
            }
            changed |= !kill.is_empty();
        }
        if !changed {
            break;
        }
    }
    // The parallel passes leave two-pixel ladders on shallow diagonals and
    // 2x2 blocks at blunt ends. Sequentially delete any pixel whose
    // neighbors stay mutually connected inside the 5x5 window without it:
    // ladder and block pixels are redundant by that test, while line pixels
    // (whose sides only reconnect through distant paths) are untouchable.
    loop {
        let mut changed = false;
        for r in 0..m.h as i32 {
            for c in 0..m.w as i32 {
                if m.get(c, r) && window_redundant(&m, c, r) {
                    m.set(c, r, false);
                    changed = true;
                }
            }
        }
        if !changed {
            return m;
        }
    }
}

/// True when the pixel's ring neighbors remain 8-connected to each other
/// within the surrounding 5x5 window after removing the pixel itself.
/// Deleting such a pixel can never disconnect the skeleton.
fn window_redundant(m: &Mask, c: i32, r: i32) -> bool {
    let mut win = [false; 25]; // 5x5, index (dr+2)*5 + (dc+2), center removed
    let mut nbrs: Vec<usize> = Vec::with_capacity(8);
    for dr in -2..=2i32 {
        for dc in -2..=2i32 {
            if dc == 0 && dr == 0 {
                continue;
            }
            if m.get(c + dc, r + dr) {
                let i = ((dr + 2) * 5 + dc + 2) as usize;
                win[i] = true;
                if dc.abs() <= 1 && dr.abs() <= 1 {
                    nbrs.push(i);
                }
            }
        }
    }
    if nbrs.len() < 2 {
        return false; // endpoints and isolated pixels stay
    }
    let mut seen = [false; 25];
    let mut stack = vec![nbrs[0]];
    seen[nbrs[0]] = true;
    while let Some(i) = stack.pop() {
        let (ic, ir) = ((i % 5) as i32, (i / 5) as i32);
        for dr in -1..=1i32 {
            for dc in -1..=1i32 {
                let (nc, nr) = (ic + dc, ir + dr);
                if (0..5).contains(&nc) && (0..5).contains(&nr) {
                    let ni = (nr * 5 + nc) as usize;
                    if ni != 12 && win[ni] && !seen[ni] {
                        seen[ni] = true;
                        stack.push(ni);
                    }
                }
            }
        }
    }
    nbrs.iter().all(|&i| seen[i])
}

fn degree(m: &Mask, c: i32, r: i32) -> usize {
    let mut n = 0;
    for dr in -1..=1 {
        for dc in -1..=1 {
            if (dc != 0 || dr != 0) && m.get(c + dc, r + dr) {
                n += 1;
            }
        }
    }
    n
}

fn endpoints(m: &Mask) -> Vec<(i32, i32)> {
    let mut out = Vec::new();
    for r in 0..m.h as i32 {
        for c in 0..m.w as i32 {
            if m.get(c, r) && degree(m, c, r) == 1 {
                out.push((c, r));
            }
        }
    }
    out
}

/// Number of degree-1 pixels in a thinned mask (0 for a clean loop, 2 for a
/// clean open path).
pub fn endpoint_count(m: &Mask) -> usize {
    endpoints(m).len()
}

/// Delete side branches of at most `max_len` pixels: walk inward from each
/// degree-1 pixel and, if a junction (degree >= 3) is reached within the
/// budget, erase the walked stub. True path ends never reach a junction and
/// are kept.
pub fn prune_spurs(m: &mut Mask, max_len: usize) {
    loop {
        let mut removed = false;
        for e in endpoints(m) {
            let mut path = vec![e];
            let mut prev: Option<(i32, i32)> = None;
            let mut cur = e;
            let mut junction = false;
            while path.len() <= max_len {
                let mut next = None;
                'scan: for dr in -1..=1 {
                    for dc in -1..=1 {
                        if dc == 0 && dr == 0 {
                            continue;
                        }
                        let n = (cur.0 + dc, cur.1 + dr);
                        if m.get(n.0, n.1) && Some(n) != prev {
                            next = Some(n);
                            break 'scan;
                        }
                    }
                }
                let Some(n) = next else {
                    break; // the whole component is this short path; keep it
                };
                if degree(m, n.0, n.1) >= 3 {
                    junction = true;
                    break;
                }
                prev = Some(cur);
                cur = n;
                path.push(n);
            }
            if junction {
                for &(c, r) in &path {
                    m.set(c, r, false);
                }
                removed = true;
            }
        }
        if !removed {
            return;
        }
    }
}

/// One-pixel-wide centerline with a traversal order and cumulative pixel
/// arc length. Closed skeletons wrap from the last point back to the first.
///
/// `points` are the raw ordered skeleton pixels (consecutive entries are
/// 8-connected). Arc length and sampling use `path`, a lightly smoothed
/// copy: summing {1, sqrt(2)} steps overestimates oblique digital lines by
/// up to 8%, while a +/-2 moving average lands within a fraction of a
/// percent of the true length.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedSkeleton {
    pub points: Vec<(i32, i32)>,
    /// Sub-pixel centerline after smoothing, in fractional px coordinates.
    pub path: Vec<Vec2>,
    /// Cumulative arc length along `path`; cum[0] = 0.
    pub cum: Vec<f64>,
    pub closed: bool,
}

impl OrderedSkeleton {
    pub fn from_points(points: Vec<(i32, i32)>, closed: bool) -> OrderedSkeleton {
        let path = smooth_path(&points, closed);
        let mut cum = Vec::with_capacity(path.len());
        let mut s = 0.0;
        cum.push(0.0);
        for w in path.windows(2) {
            s += w[0].dist(w[1]);
            cum.push(s);
        }
        OrderedSkeleton {
            points,
            path,
            cum,
            closed,
        }
    }

    pub fn len_px(&self) -> f64 {
        let open = *self.cum.last().unwrap_or(&0.0);
        if self.closed && self.path.len() > 1 {
            open + self.path.last().unwrap().dist(self.path[0])
        } else {
            open
        }
    }

    /// Point at fraction f of total arc length, in fractional px.
    pub fn point_at(&self, f: f64) -> Vec2 {
        let total = self.len_px();
        if total <= 0.0 || self.path.len() == 1 {
            return self.path[0];
        }
        let s = f.clamp(0.0, 1.0) * total;
        let i = match self.cum.binary_search_by(|v| v.partial_cmp(&s).unwrap()) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        };
        if i + 1 < self.path.len() {
            let seg = self.cum[i + 1] - self.cum[i];
            let t = if seg > 0.0 {
                (s - self.cum[i]) / seg
            } else {
                0.0
            };
            self.path[i].lerp(self.path[i + 1], t)
        } else if self.closed {
            let seg = total - self.cum[i];
            let t = if seg > 0.0 {
                (s - self.cum[i]) / seg
            } else {
                0.0
            };
            self.path[i].lerp(self.path[0], t.min(1.0))
        } else {
            *self.path.last().unwrap()
        }
    }

    /// Unit direction of travel at fraction f, from a +/- 3 px window.
    pub fn tangent_at(&self, f: f64) -> Vec2 {
        let total = self.len_px().max(1e-9);
        let df = 3.0 / total;
        let (a, b) = if self.closed {
            (
                self.point_at((f - df).rem_euclid(1.0)),
                self.point_at((f + df).rem_euclid(1.0)),
            )
        } else {
            (
                self.point_at((f - df).max(0.0)),
                self.point_at((f + df).min(1.0)),
            )
        };
        let d = b - a;
        if d.norm() > 1e-9 {
            d.normalized()
        } else {
            vec2(1.0, 0.0)
        }
    }

    pub fn first(&self) -> Vec2 {
        self.path[0]
    }

    pub fn last(&self) -> Vec2 {
        *self.path.last().unwrap()
    }

    pub fn reversed(&self) -> OrderedSkeleton {
        let points: Vec<(i32, i32)> = self.points.iter().rev().copied().collect();
        OrderedSkeleton::from_points(points, self.closed)
    }

    /// Signed area of the polygon the path encloses (px^2); positive means
    /// counterclockwise in workspace axes.
    pub fn signed_area(&self) -> f64 {
        let mut s = 0.0;
        let n = self.path.len();
        for i in 0..n {
            s += self.path[i].cross(self.path[(i + 1) % n]);
        }
        0.5 * s
    }
}

/// Moving average over +/-2 neighbors. Open paths shrink the window near
/// the ends symmetrically, so the endpoints themselves stay put.
fn smooth_path(points: &[(i32, i32)], closed: bool) -> Vec<Vec2> {
    let n = points.len();
    let px = |i: usize| {
        let (c, r) = points[i];
        vec2(c as f64 + 0.5, r as f64 + 0.5)
    };
    const K: i64 = 2;
    (0..n)
        .map(|i| {
            let k = if closed {
                K.min(n as i64 / 2)
            } else {
                K.min(i as i64).min((n - 1 - i) as i64)
            };
            let mut s = vec2(0.0, 0.0);
            for d in -k..=k {
                let j = if closed {
                    (i as i64 + d).rem_euclid(n as i64) as usize
                } else {
                    (i as i64 + d) as usize
                };
                s += px(j);
            }
            s / (2 * k + 1) as f64
        })
        .collect()
}

/// Thin a mask, prune short spurs, and order the skeleton from end to end
/// (or around the loop). Closed skeletons are cut at the pixel nearest
/// `cut_hint` and reported with `closed = true`.
pub fn order_skeleton(
    mask: &Mask,
    spur_len: usize,
    cut_hint: Option<Vec2>,
) -> Result<OrderedSkeleton, VisionError> {
    let mut m = thin(mask);
    prune_spurs(&mut m, spur_len);
    let total: usize = m.count();
    if total == 0 {
        return Err(VisionError::SkeletonBranching);
    }
    let ends = endpoints(&m);
    let closed = match ends.len() {
        0 => true,
        2 => false,
        _ => return Err(VisionError::SkeletonBranching),
    };
    let start = if closed {
        let hint = cut_hint.unwrap_or_else(|| vec2(0.0, 0.0));
        let mut best = (f64::INFINITY, (0, 0));
        for r in 0..m.h as i32 {
            for c in 0..m.w as i32 {
                if m.get(c, r) {
                    let d = vec2(c as f64 + 0.5, r as f64 + 0.5).dist(hint);
                    if d < best.0 {
                        best = (d, (c, r));
                    }
                }
            }
        }
        best.1
    } else {
        // Deterministic pick; callers orient the result afterwards.
        *ends.iter().min_by_key(|&&(c, r)| (r, c)).unwrap()
    };

    let mut visited = Mask::new(m.w, m.h);
    let mut points = vec![start];
    visited.set(start.0, start.1, true);
    let mut cur = start;
    loop {
        // Prefer cardinal moves so diagonal shortcuts do not skip pixels.
        const ORDER: [(i32, i32); 8] = [
            (1, 0),
            (0, 1),
            (-1, 0),
            (0, -1),
            (1, 1),
            (-1, 1),
            (-1, -1),
            (1, -1),
        ];
        let mut next = None;
        for (dc, dr) in ORDER {
            let n = (cur.0 + dc, cur.1 + dr);
            if m.get(n.0, n.1) && !visited.get(n.0, n.1) {
                next = Some(n);
                break;
            }
        }
        let Some(n) = next else { break };
        visited.set(n.0, n.1, true);
        points.push(n);
        cur = n;
    }
    // Thinning can leave a couple of staircase stragglers off the walk;
    // tolerate a sliver, fail on real branching.
    if points.len() * 50 < total * 49 {
        return Err(VisionError::SkeletonBranching);
    }
    Ok(OrderedSkeleton::from_points(points, closed))
}
