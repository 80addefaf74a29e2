//! Trial scoring: how much of the cord aligns with the slot, how much is
//! actually inserted, and the four-bucket rubric both land in.
//!
//! Scores read the exact simulation state instead of photographs, so they
//! are pure functions of the final world. Insertion can never beat
//! alignment: a seated particle sits on the centerline, which is well
//! inside the alignment band.

use crate::geom::channel::{ChannelKind, SLOT_WIDTH};
use crate::plan::Strategy;
use crate::sim::state::World;
use std::fmt;

/// Lateral slack beyond the slot half-width that still counts as aligned.
pub const ALIGN_TOL: f64 = 3.0;
/// Vertical slack above the mold top that still counts as inserted.
pub const INSERT_SLACK: f64 = 0.5;

/// Fraction of particles lying over the slot, within half a slot width
/// plus the alignment tolerance of the centerline.
pub fn score_alignment(w: &World) -> f64 {
    let band = 0.5 * SLOT_WIDTH + ALIGN_TOL;
    let hits = w
        .particles
        .iter()
        .filter(|p| w.channel.slot_query(p.pos.xy()).offset <= band)
        .count();
    hits as f64 / w.particles.len() as f64
}

/// Fraction of particles seated in the slot with their top at or below the
/// mold surface (plus slack): aligned cord resting on top scores zero here.
pub fn score_insertion(w: &World) -> f64 {
    let r = w.rope_radius();
    let lid = w.mold_top() + INSERT_SLACK;
    let hits = w
        .particles
        .iter()
        .filter(|p| p.seated && p.pos.z + r <= lid)
        .count();
    hits as f64 / w.particles.len() as f64
}

/// Quarter rubric buckets; the top one is closed so "at least 75%" means
/// full success.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Bucket {
    Q0, // [0, 25%)
    Q1, // [25%, 50%)
    Q2, // [50%, 75%)
    Q3, // [75%, 100%]
}

impl Bucket {
    pub fn name(self) -> &'static str {
        match self {
            Bucket::Q0 => "0-25",
            Bucket::Q1 => "25-50",
            Bucket::Q2 => "50-75",
            Bucket::Q3 => "75-100",
        }
    }
}

impl fmt::Display for Bucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn bucket(fraction: f64) -> Bucket {
    assert!((0.0..=1.0).contains(&fraction), "fraction {fraction}");
    if fraction >= 0.75 {
        Bucket::Q3
    } else if fraction >= 0.5 {
        Bucket::Q2
    } else if fraction >= 0.25 {
        Bucket::Q1
    } else {
        Bucket::Q0
    }
}

/// Scored outcome of one trial plus the identifiers needed to rerun it.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub seed: u64,
    pub kind: ChannelKind,
    pub strategy: Strategy,
    pub alignment_fraction: f64,
    pub insertion_fraction: f64,
    pub alignment_bucket: Bucket,
    pub insertion_bucket: Bucket,
    pub action_count: u32,
    pub budget_exhausted: bool,
}

impl TrialReport {
    pub fn score(
        w: &World,
        seed: u64,
        kind: ChannelKind,
        strategy: Strategy,
        budget_exhausted: bool,
    ) -> TrialReport {
        let alignment_fraction = score_alignment(w);
        let insertion_fraction = score_insertion(w);
        debug_assert!(insertion_fraction <= alignment_fraction + 1e-9);
        TrialReport {
            seed,
            kind,
            strategy,
            alignment_fraction,
            insertion_fraction,
            alignment_bucket: bucket(alignment_fraction),
            insertion_bucket: bucket(insertion_fraction),
            action_count: w.action_count,
            budget_exhausted,
        }
    }

    /// Every particle seated flush: the rubric's full-success row.
    pub fn full_success(&self) -> bool {
        self.insertion_bucket == Bucket::Q3
    }

    pub fn csv_header() -> &'static str {
        "seed,channel,method,align_frac,align_bucket,insert_frac,insert_bucket,actions,budget_exhausted"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.6},{},{:.6},{},{},{}",
            self.seed,
            self.kind.name(),
            self.strategy.name(),
            self.alignment_fraction,
            self.alignment_bucket,
            self.insertion_fraction,
            self.insertion_bucket,
            self.action_count,
            self.budget_exhausted,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::channel::{make_channel, PlacedChannel};
    use crate::geom::gasket::GasketSpec;
    use crate::geom::pose::Pose2D;
    use crate::geom::{vec2, Vec2};
    use crate::sim::params::SimParams;

    fn world_with_rope(rope: &[Vec2]) -> World {
        let spec = make_channel(ChannelKind::Straight);
        let ch = PlacedChannel::new(spec, Pose2D::new(500.0, 350.0, 0.0)).unwrap();
        World::new(ch, GasketSpec::default(), SimParams::default(), rope)
    }

    fn line_rope(y: f64) -> Vec<Vec2> {
        let g = GasketSpec::default();
        (0..g.particle_count())
            .map(|i| vec2(150.0 + i as f64 * g.rest_spacing, y))
            .collect()
    }

    #[test]
    fn seated_scores_full_marks_off_mold_scores_none() {
        let mut w = world_with_rope(&line_rope(100.0));
        assert_eq!(score_alignment(&w), 0.0);
        assert_eq!(score_insertion(&w), 0.0);
        let total = w.channel.spec.slot_length();
        for i in 0..w.particles.len() {
            let arc = total * i as f64 / (w.particles.len() - 1) as f64;
            w.seat_particle(i, arc, 1);
        }
        assert_eq!(score_alignment(&w), 1.0);
        assert_eq!(score_insertion(&w), 1.0);
        let r = TrialReport::score(&w, 7, ChannelKind::Straight, Strategy::Binary, false);
        assert!(r.full_success());
        assert_eq!(r.alignment_bucket, Bucket::Q3);
    }

    #[test]
    fn aligned_on_top_is_not_inserted() {
        // Cord resting on the mold surface right over the slot: perfectly
        // aligned, zero insertion.
        let mut w = world_with_rope(&line_rope(100.0));
        let total = w.channel.spec.slot_length();
        let lid = w.mold_top();
        let n = w.particles.len();
        for (i, p) in w.particles.iter_mut().enumerate() {
            let arc = total * i as f64 / (n - 1) as f64;
            p.pos.x = 500.0 - total / 2.0 + arc;
            p.pos.y = 350.0;
            p.pos.z = lid + 6.35;
        }
        assert_eq!(score_alignment(&w), 1.0);
        assert_eq!(score_insertion(&w), 0.0);
    }

    #[test]
    fn half_seated_half_deflected_splits_the_score() {
        let mut w = world_with_rope(&line_rope(100.0));
        let total = w.channel.spec.slot_length();
        let n = w.particles.len();
        let deflect = w.params.deflect_dist;
        for i in 0..n {
            let arc = total * i as f64 / (n - 1) as f64;
            if i % 2 == 0 {
                w.seat_particle(i, arc, 1);
            } else {
                let on = w.channel.point_at_arc(arc);
                let off = on + vec2(0.0, 0.5 * SLOT_WIDTH + ALIGN_TOL + deflect);
                w.particles[i].pos = crate::geom::Vec3::from_xy(off, w.rope_radius());
            }
        }
        let half = score_alignment(&w);
        assert!((half - 0.5).abs() <= 1.0 / n as f64, "{half}");
        assert!((score_insertion(&w) - half).abs() <= 1.0 / n as f64);
    }

    #[test]
    fn buckets_split_at_quarters_upper_inclusive_top() {
        assert_eq!(bucket(0.0), Bucket::Q0);
        assert_eq!(bucket(0.2499), Bucket::Q0);
        assert_eq!(bucket(0.25), Bucket::Q1);
        assert_eq!(bucket(0.4999), Bucket::Q1);
        assert_eq!(bucket(0.5), Bucket::Q2);
        assert_eq!(bucket(0.7499), Bucket::Q2);
        assert_eq!(bucket(0.75), Bucket::Q3);
        assert_eq!(bucket(1.0), Bucket::Q3);
    }

    #[test]
    fn seating_more_never_lowers_either_score() {
        let mut w = world_with_rope(&line_rope(100.0));
        let total = w.channel.spec.slot_length();
        let n = w.particles.len();
        let mut prev_a = score_alignment(&w);
        let mut prev_i = score_insertion(&w);
        for i in 0..n {
            let arc = total * i as f64 / (n - 1) as f64;
            w.seat_particle(i, arc, 1);
            let a = score_alignment(&w);
            let ins = score_insertion(&w);
            assert!(a + 1e-12 >= prev_a && ins + 1e-12 >= prev_i);
            assert!(ins <= a + 1e-9);
            prev_a = a;
            prev_i = ins;
        }
    }

    #[test]
    fn csv_rows_have_the_fixed_shape() {
        let mut w = world_with_rope(&line_rope(100.0));
        w.action_count = 42;
        let r = TrialReport::score(&w, 123, ChannelKind::Curved, Strategy::BinaryPlus, true);
        assert_eq!(
            TrialReport::csv_header().split(',').count(),
            r.csv_row().split(',').count()
        );
        assert_eq!(
            r.csv_row(),
            "123,curved,binary_plus,0.000000,0-25,0.000000,0-25,42,true"
        );
    }
}
