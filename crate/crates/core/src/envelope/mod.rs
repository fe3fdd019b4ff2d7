//! Fiber families, envelopes, and sampled regularity analysis.

pub mod analysis;
pub mod family;
pub mod regularity;
pub mod sequence;

pub use analysis::{
    envelope, envelope_limit_bounds, fiber_lsc_deficit, fiber_usc_deficit, variational_gauge, LimitBounds,
};
pub use family::{DomainBox, FiberFamily, FiberKind};
pub use regularity::{
    c_regularity_verdict, check_fiber_conditions, default_probes, limit_clouds, uniform_grid, ChannelCheck,
    EnvelopeProbe, FiberConditions, FiberViolation, LimitFiberEstimate, LimitSetVerdicts, RegularityReport,
    RegularityTolerances, SequenceDiagnostics, Verdict,
};
pub use sequence::{default_specs, SequenceDefaults, SequenceSpec};
