//! The deformable rope (gasket cord) being inserted.

use super::channel::{MM_PER_INCH, ROPE_LENGTH};

/// Rest spacing between adjacent particles of the rope model.
pub const REST_SPACING: f64 = 6.35;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasketSpec {
    pub length: f64,
    pub diameter: f64,
    /// Cross-section squish when seated: a seated rope center can sit this
    /// much below the half-diameter it would need at full roundness.
    pub compress_delta: f64,
    pub rest_spacing: f64,
}

impl Default for GasketSpec {
    fn default() -> Self {
        GasketSpec {
            length: ROPE_LENGTH,
            diameter: 0.5 * MM_PER_INCH,
            compress_delta: 2.0,
            rest_spacing: REST_SPACING,
        }
    }
}

impl GasketSpec {
    pub fn radius(&self) -> f64 {
        0.5 * self.diameter
    }

    /// Number of particles in the chain model (segments + 1).
    pub fn particle_count(&self) -> usize {
        (self.length / self.rest_spacing).round() as usize + 1
    }

    pub fn segment_count(&self) -> usize {
        self.particle_count() - 1
    }

    /// Rope-length fraction of particle i.
    pub fn fraction_of(&self, i: usize) -> f64 {
        i as f64 / self.segment_count() as f64
    }

    /// Particle index closest to rope fraction f.
    pub fn particle_at_fraction(&self, f: f64) -> usize {
        (f.clamp(0.0, 1.0) * self.segment_count() as f64).round() as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_chain_has_107_particles() {
        let g = GasketSpec::default();
        assert_eq!(g.particle_count(), 107);
        assert_eq!(g.segment_count(), 106);
        // 106 segments of 6.35 mm span exactly the rope length.
        assert!((g.segment_count() as f64 * g.rest_spacing - g.length).abs() < 1e-9);
    }

    #[test]
    fn fraction_round_trip() {
        let g = GasketSpec::default();
        assert_eq!(g.particle_at_fraction(0.0), 0);
        assert_eq!(g.particle_at_fraction(1.0), 106);
        assert_eq!(g.particle_at_fraction(0.5), 53);
        for i in [0usize, 13, 53, 80, 106] {
            assert_eq!(g.particle_at_fraction(g.fraction_of(i)), i);
        }
    }
}
