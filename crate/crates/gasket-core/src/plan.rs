//! Insertion strategies: fraction schedules and their grounding.
//!
//! A plan is a pure, world-independent list of fraction-annotated actions;
//! only grounding consults perception. Open channels get the strategy's
//! schedule directly. The trapezoid decomposes into its four sides, each
//! treated as a short straight channel at quarter resolution, with picks
//! after the first demoted to surface shifts so they cannot lift adjacent
//! seated cord.
//!
//! The cord in a closed channel runs the long way around from c0 to c1, so
//! both its ends meet at the middle of the long side. A schedule point that
//! lands on that seam targets fraction 0 and fraction 1 as two separate
//! actions: each free end must be placed on its own.

use crate::geom::channel::{make_channel, ChannelKind};
use crate::geom::Vec2;
use crate::vision::{Perception, VisionError};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Unidirectional,
    Binary,
    BinaryPlus,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [
        Strategy::Unidirectional,
        Strategy::Binary,
        Strategy::BinaryPlus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Unidirectional => "unidirectional",
            Strategy::Binary => "binary",
            Strategy::BinaryPlus => "binary_plus",
        }
    }

    pub fn parse(s: &str) -> Option<Strategy> {
        match s {
            "unidirectional" | "uni" => Some(Strategy::Unidirectional),
            "binary" => Some(Strategy::Binary),
            "binary_plus" | "binary+" => Some(Strategy::BinaryPlus),
            _ => None,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One step of a plan, annotated by cord/channel fraction. Pick and shift
/// actions move the cord point at `f` onto the channel point at `f`.
#[derive(Debug, Clone, PartialEq)]
pub enum PlanAction {
    PickPlace {
        f: f64,
    },
    /// Like PickPlace but dragged along the surface instead of lifted.
    ShiftPlace {
        f: f64,
    },
    Press {
        f: f64,
    },
    Slide {
        f0: f64,
        f1: f64,
    },
    Home,
}

impl PlanAction {
    fn line(&self) -> String {
        match *self {
            PlanAction::PickPlace { f } => format!("pick_place f={f:.6}"),
            PlanAction::ShiftPlace { f } => format!("shift_place f={f:.6}"),
            PlanAction::Press { f } => format!("press f={f:.6}"),
            PlanAction::Slide { f0, f1 } => format!("slide f0={f0:.6} f1={f1:.6}"),
            PlanAction::Home => "home".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub strategy: Strategy,
    pub kind: ChannelKind,
    pub actions: Vec<PlanAction>,
}

impl Plan {
    /// One primitive per line, stable across runs; used for goldens.
    pub fn to_text(&self) -> String {
        let mut s = format!("# plan {} {}\n", self.strategy.name(), self.kind.name());
        for a in &self.actions {
            s.push_str(&a.line());
            s.push('\n');
        }
        s
    }

    pub fn press_fractions(&self) -> Vec<f64> {
        self.actions
            .iter()
            .filter_map(|a| match a {
                PlanAction::Press { f } => Some(*f),
                _ => None,
            })
            .collect()
    }

    pub fn pick_fractions(&self) -> Vec<f64> {
        self.actions
            .iter()
            .filter_map(|a| match a {
                PlanAction::PickPlace { f } | PlanAction::ShiftPlace { f } => Some(*f),
                _ => None,
            })
            .collect()
    }
}

pub fn plan(strategy: Strategy, kind: ChannelKind) -> Plan {
    let actions = if kind == ChannelKind::Trapezoid {
        trapezoid_actions(strategy)
    } else {
        open_actions(strategy)
    };
    Plan {
        strategy,
        kind,
        actions,
    }
}

pub fn plan_unidirectional(kind: ChannelKind) -> Plan {
    plan(Strategy::Unidirectional, kind)
}

pub fn plan_binary(kind: ChannelKind) -> Plan {
    plan(Strategy::Binary, kind)
}

pub fn plan_binary_plus(kind: ChannelKind) -> Plan {
    plan(Strategy::BinaryPlus, kind)
}

/// Eighths 0..=1 in ascending order.
fn eighths() -> Vec<f64> {
    (0..=8).map(|i| i as f64 / 8.0).collect()
}

/// Midpoint, then quarters, then interior eighths.
fn binary_order() -> Vec<f64> {
    vec![0.5, 0.25, 0.75, 0.125, 0.375, 0.625, 0.875]
}

/// Midpoint, then the endpoints, then quarters and interior eighths.
fn binary_plus_order() -> Vec<f64> {
    vec![0.5, 0.0, 1.0, 0.25, 0.75, 0.125, 0.375, 0.625, 0.875]
}

fn open_actions(strategy: Strategy) -> Vec<PlanAction> {
    let place = match strategy {
        Strategy::Unidirectional => eighths(),
        Strategy::Binary => binary_order(),
        Strategy::BinaryPlus => binary_plus_order(),
    };
    // Reinforcing presses repeat the placement order except for binary+,
    // which re-presses end to end in ascending order.
    let reinforce = match strategy {
        Strategy::BinaryPlus => eighths(),
        _ => place.clone(),
    };
    let mut out = Vec::new();
    for &f in &place {
        out.push(PlanAction::PickPlace { f });
        out.push(PlanAction::Press { f });
    }
    for &f in &reinforce {
        out.push(PlanAction::Press { f });
    }
    match strategy {
        Strategy::Unidirectional => out.push(PlanAction::Slide { f0: 0.0, f1: 1.0 }),
        _ => {
            out.push(PlanAction::Slide { f0: 0.5, f1: 0.0 });
            out.push(PlanAction::Slide { f0: 0.5, f1: 1.0 });
        }
    }
    out.push(PlanAction::Home);
    out
}

/// One trapezoid side, as an arc interval along the channel path. The long
/// side wraps through the seam where the cord's two ends meet.
struct Side {
    start_arc: f64,
    len: f64,
}

impl Side {
    /// Channel fractions for side-local fraction t. The seam expands into
    /// both cord ends.
    fn fractions_at(&self, t: f64, total: f64) -> Vec<f64> {
        let arc = self.start_arc + t * self.len;
        if (arc - total).abs() < 1e-9 {
            vec![0.0, 1.0]
        } else if arc >= total {
            vec![(arc - total) / total]
        } else {
            vec![arc / total]
        }
    }
}

/// Sides in visiting order for pick placement: long (contains the seam),
/// the leg nearest the path start, the other leg, then the short side.
/// Unidirectional ignores this order and walks the loop instead.
fn trapezoid_sides() -> (Vec<Side>, f64) {
    let spec = make_channel(ChannelKind::Trapezoid);
    let ca = &spec.corner_arcs;
    let total = spec.slot_length();
    let sides = vec![
        Side {
            start_arc: ca[3],
            len: total - ca[3] + ca[0],
        },
        Side {
            start_arc: ca[0],
            len: ca[1] - ca[0],
        },
        Side {
            start_arc: ca[2],
            len: ca[3] - ca[2],
        },
        Side {
            start_arc: ca[1],
            len: ca[2] - ca[1],
        },
    ];
    (sides, total)
}

fn trapezoid_actions(strategy: Strategy) -> Vec<PlanAction> {
    let (sides, total) = trapezoid_sides();
    // Quarter resolution within each side.
    let local = match strategy {
        Strategy::Unidirectional => vec![0.0, 0.25, 0.5, 0.75, 1.0],
        Strategy::Binary => vec![0.5, 0.25, 0.75],
        Strategy::BinaryPlus => vec![0.5, 0.0, 1.0, 0.25, 0.75],
    };
    let mut place: Vec<f64> = Vec::new();
    for side in &sides {
        for &t in &local {
            place.extend(side.fractions_at(t, total));
        }
    }
    if strategy == Strategy::Unidirectional {
        // End-to-end walk: same postures, sorted by cord fraction, shared
        // corners visited once.
        place.sort_by(|a, b| a.partial_cmp(b).unwrap());
        place.dedup();
    }

    let reinforce = match strategy {
        Strategy::BinaryPlus => {
            let mut asc = place.clone();
            asc.sort_by(|a, b| a.partial_cmp(b).unwrap());
            asc.dedup();
            asc
        }
        _ => place.clone(),
    };

    let mut out = Vec::new();
    for (i, &f) in place.iter().enumerate() {
        if i == 0 {
            out.push(PlanAction::PickPlace { f });
        } else {
            out.push(PlanAction::ShiftPlace { f });
        }
        out.push(PlanAction::Press { f });
    }
    for &f in &reinforce {
        out.push(PlanAction::Press { f });
    }

    if strategy == Strategy::Unidirectional {
        out.push(PlanAction::Slide { f0: 0.0, f1: 1.0 });
    } else {
        // Per-side binary slide: from the side midpoint toward each side
        // end. On the seam side the midpoint is both cord ends at once.
        for side in &sides {
            let mid = side.fractions_at(0.5, total);
            let lo = side.fractions_at(0.0, total)[0];
            let hi = side.fractions_at(1.0, total)[0];
            if mid.len() == 2 {
                out.push(PlanAction::Slide { f0: 1.0, f1: lo });
                out.push(PlanAction::Slide { f0: 0.0, f1: hi });
            } else {
                out.push(PlanAction::Slide { f0: mid[0], f1: lo });
                out.push(PlanAction::Slide { f0: mid[0], f1: hi });
            }
        }
    }
    out.push(PlanAction::Home);
    out
}

/// A plan step grounded to workspace millimetres via the current estimate.
#[derive(Debug, Clone, PartialEq)]
pub enum GroundedAction {
    PickPlace { from: Vec2, to: Vec2 },
    ShiftPlace { from: Vec2, to: Vec2 },
    Press { at: Vec2 },
    Slide { f0: f64, f1: f64 },
    Home,
}

/// Ground one action against the latest perception. Pick targets come from
/// the traced cord, press and place targets from the estimated channel.
/// With `degrade_tol` set, a pick whose cord point already lies within that
/// distance of its channel point collapses to a bare press, so a seated
/// point is never lifted back out.
pub fn ground(
    action: &PlanAction,
    est: &Perception,
    degrade_tol: Option<f64>,
) -> Result<GroundedAction, VisionError> {
    match *action {
        PlanAction::PickPlace { f } | PlanAction::ShiftPlace { f } => {
            let ws = est.waypoints(&[f])?;
            let wp = &ws.items[0];
            let from = est.px_to_mm(wp.gasket_px);
            let to = est.px_to_mm(wp.channel_px);
            if degrade_tol.is_some_and(|tol| from.dist(to) <= tol) {
                return Ok(GroundedAction::Press { at: to });
            }
            Ok(match action {
                PlanAction::PickPlace { .. } => GroundedAction::PickPlace { from, to },
                _ => GroundedAction::ShiftPlace { from, to },
            })
        }
        // Pressing needs no cord trace; the target sits on the channel.
        PlanAction::Press { f } => Ok(GroundedAction::Press {
            at: est.px_to_mm(est.channel_skel.point_at(f)),
        }),
        PlanAction::Slide { f0, f1 } => Ok(GroundedAction::Slide { f0, f1 }),
        PlanAction::Home => Ok(GroundedAction::Home),
    }
}
