//! Tool operations: grasping, transporting, pressing, and sliding.
//!
//! Every operation is deterministic, increments the world's action count,
//! and leaves the chain relaxed. Failures are ordinary outcomes reported in
//! the trace, not errors: a grasp can close on nothing, a press can deflect
//! a misaligned rope sideways instead of seating it, and a slide can snag
//! badly-placed rope and rip the adjacent seated run back out of the slot.

use super::relax::{relax, relax_released};
use super::state::{TraceEvent, UnseatCause, World};
use crate::geom::{seg_dist, Vec2, Vec3};

/// A single tool operation, the unit of the replay log.
#[derive(Debug, Clone, PartialEq)]
pub enum Op {
    /// Close the gripper on the rope nearest to (x, y).
    Grasp { x: f64, y: f64 },
    /// Move the gripper through the waypoints, optionally opening it at the
    /// end. Waypoints are absolute; travel is stepped.
    Move { path: Vec<Vec3>, release: bool },
    /// Press the insertion tool straight down at (x, y).
    Press { x: f64, y: f64 },
    /// Run the slide tool along the slot between two rope-path fractions.
    Slide { f0: f64, f1: f64 },
}

impl World {
    pub fn apply(&mut self, op: &Op) {
        self.action_count += 1;
        match *op {
            Op::Grasp { x, y } => self.do_grasp(Vec2 { x, y }),
            Op::Move { ref path, release } => self.do_move(path, release),
            Op::Press { x, y } => self.do_press(Vec2 { x, y }),
            Op::Slide { f0, f1 } => self.do_slide(f0, f1),
        }
    }

    /// Resolve the tension the grasp demands, then relax. A seated particle
    /// whose demanded displacement exceeds the drag slack gets pulled out of
    /// the slot — checked geometrically against the gripper before relaxing,
    /// so a cascade of rips costs nothing extra. Once no rippable bead is
    /// overpulled, a released pass lets the rope slip in the fingers by the
    /// remaining deficit instead of leaving the chain stretched.
    pub fn settle(&mut self) {
        if self.grasped.is_none() {
            relax(self);
            return;
        }
        while let Some(j) = self.overpulled_bead() {
            self.unseat_particle(j, UnseatCause::Drag);
        }
        relax(self);
        // Relaxation can drag a bead into range of the gripper's demand
        // (or slide it against a curve until the chain runs short); catch
        // those before yielding.
        while let Some(j) = self.overpulled_bead() {
            self.unseat_particle(j, UnseatCause::Drag);
            relax(self);
        }
        relax_released(self);
    }

    /// The seated particle nearest the grasp (along either chain direction)
    /// that the pinned chain cannot reach: holding the pair spacings would
    /// demand it move further than the drag slack. Anchors never rip; an
    /// overpulled anchor means the rope slips in the gripper instead.
    fn overpulled_bead(&self) -> Option<usize> {
        let g = self.grasped?;
        let rest = self.gasket.rest_spacing;
        let mut worst: Option<(usize, f64)> = None;
        for dir in [-1i64, 1] {
            let mut j = g as i64 + dir;
            let seated = loop {
                if j < 0 || j as usize >= self.particles.len() {
                    break None;
                }
                if self.particles[j as usize].seated {
                    break Some(j as usize);
                }
                j += dir;
            };
            let Some(j) = seated else { continue };
            if self.particles[j].press_count >= 2 {
                continue;
            }
            let span = g.abs_diff(j) as f64 * rest;
            let deficit = self.particles[j].pos.dist(self.gripper) - span;
            if deficit > self.params.drag_slack && worst.is_none_or(|(_, d)| deficit > d) {
                worst = Some((j, deficit));
            }
        }
        worst.map(|(j, _)| j)
    }

    fn do_grasp(&mut self, at: Vec2) {
        let mut best: Option<(usize, f64)> = None;
        for (i, p) in self.particles.iter().enumerate() {
            let d = p.pos.xy().dist(at);
            if d <= self.params.grasp_radius && best.is_none_or(|(_, bd)| d < bd - 1e-6) {
                best = Some((i, d));
            }
        }
        match best {
            None => {
                self.gripper = Vec3::from_xy(at, self.z_clear());
                self.trace.push(TraceEvent::GraspMiss);
            }
            Some((i, _)) => {
                if self.particles[i].seated {
                    let span = self.params.unseat_span;
                    let lo = i.saturating_sub(span);
                    let hi = (i + span).min(self.particles.len() - 1);
                    for j in lo..=hi {
                        self.unseat_particle(j, UnseatCause::Grasp);
                    }
                }
                self.gripper = self.particles[i].pos;
                self.grasped = Some(i);
                self.trace.push(TraceEvent::Grasp { index: i });
                self.settle();
            }
        }
    }

    fn do_move(&mut self, path: &[Vec3], release: bool) {
        if self.grasped.is_none() {
            // Nothing in hand: the gripper just flies there.
            if let Some(&last) = path.last() {
                self.gripper = last;
            }
        } else {
            for &target in path {
                let leg = target - self.gripper;
                let len = leg.norm();
                let steps = (len / self.params.step_len).ceil().max(1.0) as usize;
                for _ in 1..=steps {
                    self.gripper += leg * (1.0 / steps as f64);
                    self.settle();
                }
                self.gripper = target;
                self.settle();
            }
        }
        if release && self.grasped.is_some() {
            self.grasped = None;
            self.trace.push(TraceEvent::Release);
            self.settle();
        }
    }

    fn do_press(&mut self, at: Vec2) {
        let mut seated = 0u32;
        let mut reinforced = 0u32;
        let mut deflected = 0u32;
        for i in 0..self.particles.len() {
            if self.particles[i].pos.xy().dist(at) > self.params.tool_radius {
                continue;
            }
            if self.particles[i].seated {
                self.particles[i].press_count += 1;
                reinforced += 1;
            } else {
                let q = self.channel.slot_query(self.particles[i].pos.xy());
                if q.offset <= self.params.insert_tol {
                    if self.try_seat(i, 1) {
                        seated += 1;
                    }
                } else {
                    self.deflect(i, q.arc);
                    deflected += 1;
                }
            }
        }
        self.trace.push(TraceEvent::Press {
            seated,
            reinforced,
            deflected,
            force: self.params.press_force,
        });
        self.settle();
    }

    /// Shove an unseated particle sideways, away from the slot.
    fn deflect(&mut self, i: usize, arc: f64) {
        let rail = self.channel.point_at_arc(arc);
        let xy = self.particles[i].pos.xy();
        let away = (xy - rail).normalized();
        self.particles[i].pos = Vec3::from_xy(xy + away * self.params.deflect_dist, self.z_place());
    }

    /// Seat particle i on the rail, keeping the chain chord-consistent with
    /// an already-seated neighbor when there is one. Refuses seats that
    /// would pin the rail spacing wrong against a neighbor that cannot
    /// yield.
    fn try_seat(&mut self, i: usize, initial_presses: u32) -> bool {
        let line = &self.channel.spec.centerline;
        let rest = self.gasket.rest_spacing;
        let own_arc = self.channel.slot_query(self.particles[i].pos.xy()).arc;
        let neighbor = [i.checked_sub(1), i.checked_add(1)]
            .into_iter()
            .flatten()
            .filter(|&j| j < self.particles.len())
            .find(|&j| self.particles[j].seated);
        let arc = match neighbor {
            Some(j) => {
                let from = self.particles[j].arc;
                // Continue an existing seam in its own rail direction — the
                // rope cannot double back on itself inside a rope-width slot,
                // and an xy-nearest choice would fold excess rope onto seats
                // it already made. Only an isolated seat picks the side the
                // particle actually sits on.
                let other = if j > i {
                    j + 1
                } else {
                    j.checked_sub(1).unwrap_or(usize::MAX)
                };
                let seam_dir = self.particles.get(other).filter(|p| p.seated).map(|p| {
                    let len = self.channel.spec.slot_length();
                    let mut d = from - p.arc;
                    if self.channel.spec.closed {
                        d = (d + 0.5 * len).rem_euclid(len) - 0.5 * len;
                    }
                    d > 0.0
                });
                let forward = seam_dir.unwrap_or_else(|| {
                    let fwd = line.step_by_chord(from, rest, true);
                    let back = line.step_by_chord(from, rest, false);
                    let local = self.channel.pose.invert(self.particles[i].pos.xy());
                    line.point_at(fwd).dist(local) <= line.point_at(back).dist(local)
                });
                line.step_by_chord(from, rest, forward)
            }
            None => own_arc,
        };
        let rail = self.channel.point_at_arc(arc);
        for j in [i.checked_sub(1), i.checked_add(1)].into_iter().flatten() {
            if j >= self.particles.len() || !self.particles[j].seated {
                continue;
            }
            let err = (rail.dist(self.particles[j].pos.xy()) - rest).abs();
            let anchored = self.particles[j].press_count >= 2;
            let allow = if anchored {
                rest * self.params.seat_spacing_guard
            } else {
                // Mobile beads shuffle along the rail to absorb small
                // mismatches; refuse only gross ones.
                rest * 0.5
            };
            if err > allow {
                return false;
            }
        }
        self.seat_particle(i, arc, initial_presses);
        true
    }

    fn do_slide(&mut self, f0: f64, f1: f64) {
        let arc0 = self.channel.path_arc(f0);
        let arc1 = self.channel.path_arc(f1);
        let travel = arc1 - arc0;
        let steps = (travel.abs() / self.params.step_len).ceil().max(1.0) as usize;
        let mut seated = 0u32;
        let mut catches = 0u32;
        for s in 0..=steps {
            let arc = arc0 + travel * (s as f64 / steps as f64);
            let tool = self.channel.point_at_arc(arc);
            for i in 0..self.particles.len() {
                if self.particles[i].seated
                    || self.particles[i].pos.xy().dist(tool) > self.params.tool_radius
                {
                    continue;
                }
                let q = self.channel.slot_query(self.particles[i].pos.xy());
                if q.offset <= self.params.insert_tol && self.try_seat(i, 0) {
                    seated += 1;
                }
            }
            if let Some(i) = self.snagged_bead(tool) {
                self.catch(i);
                catches += 1;
            }
            self.settle();
        }
        self.trace.push(TraceEvent::Slide {
            seated,
            catches,
            force: self.params.slide_force,
        });
    }

    /// Rope the slide tool snags: a chain segment passing within the tool's
    /// reach while misaligned beyond the catch tolerance. The test is on
    /// segments, not beads, so a steep crossing cannot slip between two
    /// bead positions; the bead thrown is the worse-offset unseated end.
    fn snagged_bead(&self, tool: Vec2) -> Option<usize> {
        let mut worst: Option<(usize, f64)> = None;
        for i in 0..self.particles.len() - 1 {
            let (a, b) = (&self.particles[i], &self.particles[i + 1]);
            if a.seated && b.seated {
                continue;
            }
            if seg_dist(tool, a.pos.xy(), b.pos.xy()) > self.params.tool_radius {
                continue;
            }
            let oa = self.channel.slot_query(a.pos.xy()).offset;
            let ob = self.channel.slot_query(b.pos.xy()).offset;
            // Candidate: the unseated end with the larger offset.
            let (j, off) = if (oa >= ob && !a.seated) || b.seated {
                (i, oa)
            } else {
                (i + 1, ob)
            };
            if off > self.params.catch_tol && worst.is_none_or(|(_, w)| off > w) {
                worst = Some((j, off));
            }
        }
        worst.map(|(j, _)| j)
    }

    /// The slide tool has snagged badly-misaligned rope: the snag transmits
    /// the tool's shove through the chain, so the caught particle is thrown
    /// sideways and a seated seam it connects to unzips out of the slot
    /// until a double-pressed anchor holds. A short stretch of loose rope
    /// still transmits the shove; longer slack absorbs it, so the walk to
    /// the seam gives up after a few unseated beads.
    fn catch(&mut self, i: usize) {
        let q = self.channel.slot_query(self.particles[i].pos.xy());
        let rail = self.channel.point_at_arc(q.arc);
        let side = (self.particles[i].pos.xy() - rail).normalized();
        let throw = self.params.deflect_dist;
        let bridge_max = (self.params.deflect_dist / self.gasket.rest_spacing).ceil() as u32;
        for dir in [-1i64, 1] {
            let mut bridge = bridge_max;
            let mut in_seam = false;
            let mut j = i as i64 + dir;
            while j >= 0 && (j as usize) < self.particles.len() {
                let ju = j as usize;
                if !self.particles[ju].seated {
                    if in_seam || bridge == 0 {
                        break;
                    }
                    bridge -= 1;
                    j += dir;
                    continue;
                }
                if self.particles[ju].press_count >= 2 {
                    break; // anchored; the rip stops here
                }
                in_seam = true;
                let bead_rail = self.rail_point(self.particles[ju].arc);
                self.unseat_particle(ju, UnseatCause::Catch);
                self.particles[ju].pos = Vec3::from_xy(bead_rail + side * throw, self.z_place());
                j += dir;
            }
        }
        self.particles[i].pos =
            Vec3::from_xy(self.particles[i].pos.xy() + side * throw, self.z_place());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{make_channel, vec2, ChannelKind, GasketSpec, PlacedChannel, Pose2D};
    use crate::sim::params::SimParams;
    use crate::sim::state::TraceEvent;

    fn world(kind: ChannelKind, rope: impl Fn(usize) -> Vec2) -> World {
        let spec = make_channel(kind);
        let placed = PlacedChannel::new(spec, Pose2D::new(500.0, 350.0, 0.0)).unwrap();
        let gasket = GasketSpec::default();
        let xy: Vec<Vec2> = (0..gasket.particle_count()).map(rope).collect();
        let mut w = World::new(placed, gasket, SimParams::default(), &xy);
        w.settle();
        w
    }

    fn table_rope(kind: ChannelKind) -> World {
        world(kind, |i| vec2(150.0 + i as f64 * 6.35, 150.0))
    }

    #[test]
    fn grasp_takes_nearest_and_reports_misses() {
        let mut w = table_rope(ChannelKind::Straight);
        w.apply(&Op::Grasp { x: 153.0, y: 152.0 });
        assert_eq!(w.grasped, Some(0));
        assert_eq!(w.action_count, 1);

        let mut w = table_rope(ChannelKind::Straight);
        w.apply(&Op::Grasp { x: 150.0, y: 400.0 });
        assert_eq!(w.grasped, None);
        assert!(w.trace.contains(&TraceEvent::GraspMiss));
        assert_eq!(w.action_count, 1);
    }

    #[test]
    fn pick_place_press_seats_rope_at_the_target() {
        let mut w = table_rope(ChannelKind::Straight);
        let target = w.channel.path_point(0.5);
        let grab = w.particles[53].pos.xy();
        w.apply(&Op::Grasp {
            x: grab.x,
            y: grab.y,
        });
        assert_eq!(w.grasped, Some(53));
        let zc = w.z_clear();
        let zp = w.z_place();
        let start = w.gripper;
        w.apply(&Op::Move {
            path: vec![
                Vec3 {
                    x: start.x,
                    y: start.y,
                    z: zc,
                },
                Vec3 {
                    x: target.x,
                    y: target.y,
                    z: zc,
                },
                Vec3 {
                    x: target.x,
                    y: target.y,
                    z: zp,
                },
            ],
            release: true,
        });
        assert_eq!(w.grasped, None);
        // The released particle should lie near the target; press it home.
        let off = w.particles[53].pos.xy().dist(target);
        assert!(off < 4.0, "placement landed {off} mm off");
        w.apply(&Op::Press {
            x: target.x,
            y: target.y,
        });
        assert!(w.particles[53].seated, "pressed particle must seat");
        assert_eq!(w.action_count, 3);
        assert!(w.max_penetration() < 0.1);
        assert!(w.seating_violation().is_none());
    }

    #[test]
    fn press_far_from_the_slot_deflects_instead_of_seating() {
        let mut w = table_rope(ChannelKind::Straight);
        let at = w.particles[30].pos.xy();
        let before = at;
        let q = w.channel.slot_query(at);
        assert!(q.offset > w.params.catch_tol);
        w.apply(&Op::Press { x: at.x, y: at.y });
        assert!(!w.particles[30].seated);
        let moved = w.particles[30].pos.xy().dist(before);
        assert!(
            moved > 2.0,
            "deflection should shove the rope, moved {moved}"
        );
        let dtrace = w
            .trace
            .iter()
            .any(|t| matches!(t, TraceEvent::Press { deflected, .. } if *deflected > 0));
        assert!(dtrace);
    }

    #[test]
    fn slide_seats_slightly_offset_rope() {
        // Rope resting along the slot mouth, nudged 2 mm off the centerline
        // past the first particle, first particle seated as a start anchor.
        let mut w = world(ChannelKind::Straight, |i| {
            vec2(263.45 + i as f64 * 6.35, 352.0)
        });
        w.seat_particle(0, 100.0, 2);
        w.settle();
        w.apply(&Op::Slide {
            f0: 0.1485,
            f1: 0.6,
        });
        let seated = w.particles.iter().filter(|p| p.seated).count();
        assert!(seated > 40, "slide should zip offset rope in, got {seated}");
        assert!(w.seating_violation().is_none());
        assert!(w.max_pair_error_frac() < 0.01);
    }

    #[test]
    fn slide_catch_unzips_back_to_the_anchor() {
        // Seated run 0..=20 (anchors at 0 and 1), then the rope veers off and
        // runs parallel to the slot 16 mm out, on the mold top. That is too
        // far for the advancing seam to reel in bead by bead, so the tool
        // meets rope misaligned beyond the catch tolerance and snags it,
        // unzipping the single-pressed run back to the anchors.
        let spec = make_channel(ChannelKind::Straight);
        let placed = PlacedChannel::new(spec, Pose2D::new(500.0, 350.0, 0.0)).unwrap();
        let gasket = GasketSpec::default();
        let ramp = (6.35f64 * 6.35 - 4.0 * 4.0).sqrt();
        let xy: Vec<Vec2> = (0..gasket.particle_count())
            .map(|i| {
                if i <= 20 {
                    vec2(263.45 + i as f64 * 6.35, 350.0)
                } else {
                    let k = (i - 20) as f64;
                    vec2(390.45 + k * ramp, 350.0 + (k * 4.0).min(16.0))
                }
            })
            .collect();
        let mut w = World::new(placed, gasket, SimParams::default(), &xy);
        let top = w.mold_top() + w.rope_radius();
        for i in 21..w.particles.len() {
            let q = w.channel.slot_query(w.particles[i].pos.xy());
            if q.in_footprint && q.offset > w.params.slot_entry_tol {
                w.particles[i].pos.z = top;
            }
        }
        for i in 0..=20 {
            let presses = if i <= 1 { 2 } else { 1 };
            w.seat_particle(i, 100.0 + i as f64 * 6.35, presses);
        }
        w.settle();
        let apex = (24..32)
            .map(|i| w.channel.slot_query(w.particles[i].pos.xy()).offset)
            .fold(0.0f64, f64::max);
        assert!(
            apex > w.params.catch_tol,
            "offset rope must survive settling: {apex}"
        );
        w.apply(&Op::Slide { f0: 0.14, f1: 0.5 });
        let catches = w
            .trace
            .iter()
            .filter_map(|t| match t {
                TraceEvent::Slide { catches, .. } => Some(*catches),
                _ => None,
            })
            .sum::<u32>();
        assert!(catches > 0, "offset rope should catch the slide tool");
        assert!(
            w.particles[0].seated && w.particles[1].seated,
            "anchors must survive the catch"
        );
        let ripped = w.trace.iter().any(|t| {
            matches!(
                t,
                TraceEvent::Unseat {
                    cause: UnseatCause::Catch,
                    ..
                }
            )
        });
        assert!(ripped, "catch should rip part of the seated run out");
        assert!(w.max_pair_error_frac() < 0.0101);
    }

    #[test]
    fn overpulling_rips_seated_rope_out() {
        // Rope along the rail, first half seated, single presses, then drag
        // the free end far away.
        let mut w = world(ChannelKind::Straight, |i| {
            vec2(263.45 + i as f64 * 6.35, 350.0)
        });
        for i in 0..40 {
            w.seat_particle(i, 100.0 + i as f64 * 6.35, 1);
        }
        w.settle();
        let grab = w.particles[60].pos.xy();
        w.apply(&Op::Grasp {
            x: grab.x,
            y: grab.y,
        });
        let zc = w.z_clear();
        w.apply(&Op::Move {
            path: vec![
                Vec3 {
                    x: grab.x,
                    y: grab.y,
                    z: zc,
                },
                Vec3 {
                    x: 700.0,
                    y: 120.0,
                    z: zc,
                },
            ],
            release: false,
        });
        let drag_rips = w.trace.iter().any(|t| {
            matches!(
                t,
                TraceEvent::Unseat {
                    cause: UnseatCause::Drag,
                    ..
                }
            )
        });
        assert!(drag_rips, "a hard pull must rip seated rope back out");
        assert!(w.max_pair_error_frac() < 0.01);
    }

    #[test]
    fn op_sequences_are_bit_deterministic() {
        let ops = vec![
            Op::Grasp { x: 153.0, y: 150.0 },
            Op::Move {
                path: vec![
                    Vec3 {
                        x: 153.0,
                        y: 150.0,
                        z: 25.0,
                    },
                    Vec3 {
                        x: 300.0,
                        y: 340.0,
                        z: 25.0,
                    },
                    Vec3 {
                        x: 300.0,
                        y: 340.0,
                        z: 20.0,
                    },
                ],
                release: true,
            },
            Op::Press { x: 300.0, y: 341.0 },
            Op::Slide { f0: 0.2, f1: 0.3 },
        ];
        let run = || {
            let mut w = table_rope(ChannelKind::Straight);
            for op in &ops {
                w.apply(op);
            }
            w.digest()
        };
        assert_eq!(run(), run());
    }
}
