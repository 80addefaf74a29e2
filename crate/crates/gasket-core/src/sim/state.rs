//! Simulation state: the rope chain, the gripper, and invariant probes.
//!
//! Heights are measured to particle centers with the work surface at z = 0.
//! A particle is `seated` once it has been worked into the slot; a seated
//! particle lives on the slot centerline rail, addressed by its arc
//! coordinate, and can only move along it. Everything else rests on the
//! table, on the mold top, or hangs from the chain.

use super::params::SimParams;
use crate::geom::{GasketSpec, PlacedChannel, Vec2, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub pos: Vec3,
    pub seated: bool,
    /// Rail coordinate; meaningful only while seated.
    pub arc: f64,
    /// Presses received while seated. Two or more make the particle an
    /// anchor that catches cannot rip out.
    pub press_count: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnseatCause {
    Grasp,
    Drag,
    Catch,
    SlidOff,
}

/// Things that happened while applying operations; kept for logs and tests.
#[derive(Debug, Clone, PartialEq)]
pub enum TraceEvent {
    Grasp {
        index: usize,
    },
    GraspMiss,
    Release,
    Press {
        seated: u32,
        reinforced: u32,
        deflected: u32,
        force: f64,
    },
    Slide {
        seated: u32,
        catches: u32,
        force: f64,
    },
    Unseat {
        index: usize,
        cause: UnseatCause,
    },
}

#[derive(Debug, Clone)]
pub struct World {
    pub channel: PlacedChannel,
    pub gasket: GasketSpec,
    pub params: SimParams,
    pub particles: Vec<Particle>,
    pub grasped: Option<usize>,
    pub gripper: Vec3,
    /// Operations applied so far (grasps, moves, presses, slides).
    pub action_count: u32,
    /// Relaxations that hit the iteration cap without converging.
    pub relax_overflows: u32,
    pub trace: Vec<TraceEvent>,
}

impl World {
    /// Build a world with the rope lying flat on the table at the given xy
    /// positions. Call `settle` afterwards to let it find equilibrium.
    pub fn new(
        channel: PlacedChannel,
        gasket: GasketSpec,
        params: SimParams,
        rope_xy: &[Vec2],
    ) -> World {
        assert_eq!(rope_xy.len(), gasket.particle_count());
        let r = gasket.radius();
        let particles = rope_xy
            .iter()
            .map(|&p| Particle {
                pos: Vec3::from_xy(p, r),
                seated: false,
                arc: 0.0,
                press_count: 0,
            })
            .collect();
        World {
            channel,
            gasket,
            params,
            particles,
            grasped: None,
            gripper: Vec3 {
                x: 50.0,
                y: 50.0,
                z: 40.0,
            },
            action_count: 0,
            relax_overflows: 0,
            trace: Vec::new(),
        }
    }

    pub fn rope_radius(&self) -> f64 {
        self.gasket.radius()
    }

    /// Mold top face height.
    pub fn mold_top(&self) -> f64 {
        self.channel.spec.slot_depth
    }

    /// Gripper transit height.
    pub fn z_clear(&self) -> f64 {
        self.mold_top() + self.rope_radius() + self.params.z_clear_margin
    }

    /// Placement release height (rope center resting on the mold top).
    pub fn z_place(&self) -> f64 {
        self.mold_top() + self.rope_radius()
    }

    /// Rest height an unseated particle falls to at this xy: the table, the
    /// mold top, or the slot floor when hanging inside the mouth.
    pub fn support_z(&self, xy: Vec2) -> f64 {
        let r = self.rope_radius();
        let q = self.channel.slot_query(xy);
        // Off the mold and inside the slot mouth both bottom out at z = r;
        // the slot floor sits at table height in this model.
        if !q.in_footprint || q.offset <= self.params.slot_entry_tol {
            r
        } else {
            self.mold_top() + r
        }
    }

    /// Workspace rail point for a seated arc coordinate.
    pub fn rail_point(&self, arc: f64) -> Vec2 {
        self.channel.point_at_arc(arc)
    }

    pub fn seat_particle(&mut self, i: usize, arc: f64, press_count: u32) {
        let p = &mut self.particles[i];
        p.seated = true;
        p.arc = arc;
        p.press_count = press_count;
        let xy = self.channel.point_at_arc(arc);
        self.particles[i].pos = Vec3::from_xy(xy, self.rope_radius());
    }

    pub fn unseat_particle(&mut self, i: usize, cause: UnseatCause) {
        let p = &mut self.particles[i];
        if p.seated {
            p.seated = false;
            p.press_count = 0;
            self.trace.push(TraceEvent::Unseat { index: i, cause });
        }
    }

    /// Worst pair-length error as a fraction of the rest spacing.
    pub fn max_pair_error_frac(&self) -> f64 {
        let rest = self.gasket.rest_spacing;
        let mut worst = 0.0f64;
        for w in self.particles.windows(2) {
            let d = w[0].pos.dist(w[1].pos);
            worst = worst.max((d - rest).abs() / rest);
        }
        worst
    }

    /// Fraction of pairs whose length error exceeds `frac` of rest spacing.
    pub fn pair_violation_fraction(&self, frac: f64) -> f64 {
        let rest = self.gasket.rest_spacing;
        let bad = self
            .particles
            .windows(2)
            .filter(|w| (w[0].pos.dist(w[1].pos) - rest).abs() > frac * rest)
            .count();
        bad as f64 / self.gasket.segment_count() as f64
    }

    /// Deepest overlap of any particle with the table, the slot floor, or
    /// the mold walls/top. Zero for a clean state.
    pub fn max_penetration(&self) -> f64 {
        let r = self.rope_radius();
        let h = self.mold_top();
        let mut worst = 0.0f64;
        for (i, p) in self.particles.iter().enumerate() {
            worst = worst.max(r - p.pos.z); // below floor level
            if p.seated || Some(i) == self.grasped {
                continue;
            }
            let q = self.channel.slot_query(p.pos.xy());
            if q.in_footprint && q.offset > self.params.slot_entry_tol && p.pos.z < h + r {
                // Inside wall material: violation is the smaller of the two
                // ways out (sideways into the mouth, or up past the top).
                let lateral = q.offset - self.params.slot_entry_tol;
                let vertical = h + r - p.pos.z;
                worst = worst.max(lateral.min(vertical));
            }
        }
        worst
    }

    /// Checks that every seated particle really is a bead on the rail:
    /// position matches its arc coordinate, height matches the slot floor,
    /// and the arc is inside the slot. Returns the first violation.
    pub fn seating_violation(&self) -> Option<String> {
        let r = self.rope_radius();
        let len = self.channel.spec.slot_length();
        for (i, p) in self.particles.iter().enumerate() {
            if !p.seated {
                continue;
            }
            if !(0.0..=len).contains(&p.arc) {
                return Some(format!("particle {i}: arc {} outside slot", p.arc));
            }
            let rail = self.rail_point(p.arc);
            let off = p.pos.xy().dist(rail);
            if off > 1e-6 {
                return Some(format!("particle {i}: {off} mm off the rail"));
            }
            if (p.pos.z - r).abs() > 1e-9 {
                return Some(format!("particle {i}: seated at z {}", p.pos.z));
            }
        }
        None
    }

    /// FNV-1a digest of the full mutable state, with coordinates quantized
    /// to 1e-6 mm so logs stay portable.
    pub fn digest(&self) -> u64 {
        let mut h = 0xcbf2_9ce4_8422_2325u64;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                h = (h ^ b as u64).wrapping_mul(0x100_0000_01b3);
            }
        };
        let quant = |v: f64| ((v * 1e6).round() as i64).to_le_bytes();
        for p in &self.particles {
            eat(&quant(p.pos.x));
            eat(&quant(p.pos.y));
            eat(&quant(p.pos.z));
            eat(&[p.seated as u8]);
            eat(&p.press_count.to_le_bytes());
            eat(&quant(if p.seated { p.arc } else { 0.0 }));
        }
        eat(&match self.grasped {
            Some(i) => (i as u64).to_le_bytes(),
            None => u64::MAX.to_le_bytes(),
        });
        eat(&quant(self.gripper.x));
        eat(&quant(self.gripper.y));
        eat(&quant(self.gripper.z));
        h
    }
}
