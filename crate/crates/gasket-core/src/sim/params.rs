//! Tunable constants of the quasi-static rope simulator.

/// All lengths are mm. The defaults are calibrated for the half-inch rope
/// and the three stock channels; override individual values through the
/// harness config when experimenting.
#[derive(Debug, Clone, PartialEq)]
pub struct SimParams {
    /// Gripper capture radius: the nearest particle within this distance of
    /// the grasp point is grabbed.
    pub grasp_radius: f64,
    /// Seating a particle under the press requires its lateral offset from
    /// the slot centerline to be at most this.
    pub insert_tol: f64,
    /// A particle under the slide tool further off the centerline than this
    /// snags the tool and rips the adjacent seated run back out.
    pub catch_tol: f64,
    /// Tolerated gripper-to-grasped-particle lag before a taut chain starts
    /// ripping seated particles out of the slot.
    pub drag_slack: f64,
    /// How far a pressed-but-misaligned or caught particle is shoved
    /// sideways, away from the slot.
    pub deflect_dist: f64,
    /// Grabbing a seated particle also frees seated neighbors within this
    /// many chain indices.
    pub unseat_span: usize,
    /// Maximum tool/gripper travel per simulation step.
    pub step_len: f64,
    /// Press and slide tool contact radius.
    pub tool_radius: f64,
    /// Nominal tool forces, recorded in traces (the quasi-static model does
    /// not integrate them).
    pub press_force: f64,
    pub slide_force: f64,
    /// Free-fall distance per relaxation iteration.
    pub gravity_step: f64,
    /// Lateral (or on-rail) drift below this threshold is undone at the end
    /// of a relaxation, as long as undoing it leaves the chain unstretched:
    /// a crude stick-friction surrogate.
    pub stick_release: f64,
    /// Pair stretch allowed when undoing sub-threshold drift, as a fraction
    /// of the rest spacing.
    pub stick_pair_frac: f64,
    /// Transit clearance above the mold top.
    pub z_clear_margin: f64,
    /// Relaxation iteration cap and convergence threshold (max displacement
    /// per iteration).
    pub relax_max_iters: u32,
    pub relax_tol: f64,
    /// Final tightening stops when the worst pair error falls below this
    /// fraction of the rest spacing.
    pub tighten_tol_frac: f64,
    /// Lateral slack of an unseated particle hanging inside the slot mouth;
    /// beyond it the walls push the particle out (nearest exit).
    pub slot_entry_tol: f64,
    /// Seating is skipped when it would put the new rail point further than
    /// this fraction of the rest spacing from a seated neighbor's spacing.
    pub seat_spacing_guard: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            grasp_radius: 15.0,
            insert_tol: 4.0,
            catch_tol: 8.0,
            drag_slack: 5.0,
            deflect_dist: 10.0,
            unseat_span: 2,
            step_len: 5.0,
            tool_radius: 10.0,
            press_force: 40.0,
            slide_force: 20.0,
            gravity_step: 3.0,
            stick_release: 2.0,
            stick_pair_frac: 0.008,
            z_clear_margin: 2.0,
            relax_max_iters: 200,
            relax_tol: 1e-3,
            tighten_tol_frac: 0.002,
            slot_entry_tol: 0.5,
            seat_spacing_guard: 0.005,
        }
    }
}

macro_rules! scalar_fields {
    ($($name:ident),* $(,)?) => {
        /// (key, value) view of every tunable, used for config files, replay
        /// headers, and the config hash.
        pub fn entries(&self) -> Vec<(&'static str, f64)> {
            vec![$((stringify!($name), self.$name as f64)),*]
        }

        /// Set a tunable by key; returns false for unknown keys.
        pub fn set(&mut self, key: &str, value: f64) -> bool {
            match key {
                $(stringify!($name) => {
                    self.$name = value as _;
                    true
                })*
                _ => false,
            }
        }
    };
}
pub(crate) use scalar_fields;

impl SimParams {
    scalar_fields!(
        grasp_radius,
        insert_tol,
        catch_tol,
        drag_slack,
        deflect_dist,
        unseat_span,
        step_len,
        tool_radius,
        press_force,
        slide_force,
        gravity_step,
        stick_release,
        stick_pair_frac,
        z_clear_margin,
        relax_max_iters,
        relax_tol,
        tighten_tol_frac,
        slot_entry_tol,
        seat_spacing_guard,
    );

    /// FNV-1a hash of the canonical key=value listing; pins the exact
    /// configuration a replay log was recorded under.
    pub fn config_hash(&self) -> u64 {
        let mut h = 0xcbf2_9ce4_8422_2325u64;
        for (k, v) in self.entries() {
            for b in k.bytes().chain("=".bytes()) {
                h = (h ^ b as u64).wrapping_mul(0x100_0000_01b3);
            }
            for b in v.to_bits().to_le_bytes() {
                h = (h ^ b as u64).wrapping_mul(0x100_0000_01b3);
            }
        }
        h
    }
}
