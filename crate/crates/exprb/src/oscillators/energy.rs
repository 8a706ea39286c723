//! Energy bookkeeping for mass-spring scenes.

/// Energy split of a scene state, in joules. `external` is the potential of
/// the conservative external forces (gravity, `-sum m_i g . x_i`); drag has
/// no potential and never enters the report.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EnergyReport {
    pub kinetic: f64,
    pub elastic: f64,
    pub external: f64,
}

impl EnergyReport {
    /// Spring plus external potential.
    pub fn potential(&self) -> f64 {
        self.elastic + self.external
    }

    pub fn total(&self) -> f64 {
        self.kinetic + self.elastic + self.external
    }
}
