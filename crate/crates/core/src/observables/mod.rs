//! Localization, entanglement and level-statistics diagnostics.

pub mod entanglement;
pub mod histogram;
pub mod localization;
pub mod reference;
pub mod spacing;

pub use entanglement::{averaged_ee, entanglement_entropy, von_neumann, Bipartition};
pub use histogram::{fit_sub_wigner, Histogram, SubWignerFit};
pub use localization::{
    averaged_fd, density_profile, fractal_dimension, ipr, select_states, site_occupation, FdReport,
    StateSelection,
};
pub use reference::{
    distribution_distance, ginibre_c, ginibre_p, ginibre_pdf, ks_statistic, ks_two_sample,
    reference_pdf, ReferenceDistribution, ReferenceKind, SubWignerParams,
    DEFAULT_GINIBRE_TRUNCATION,
};
pub use spacing::{nearest_spacings, normalize_unit_mean, SpacingSample};
