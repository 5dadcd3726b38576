//! Local extension envelopes, global gluing and mollification.

pub mod envelope;
pub mod glue;
pub mod mollify;
pub mod support;

pub use envelope::{constant_bound, constant_bound_for, holder_ratio, kernel_gradient, ExtensionDescriptor, ExtensionField};
pub use glue::{glue_global, smooth_step, GlobalExtension, PartitionOfUnity, Weights};
pub use mollify::{summand_differentiability_probe, Mollified, MollifierRule, DEFAULT_QUADRATURE_POINTS};
pub use support::{build_support_set, Provenance, SupportPair, SupportParams, SupportSet};
