//! Parameter sweeps, the analytic boundary, transition detection and
//! scaling collapse.

pub mod boundary;
pub mod collapse;
pub mod engine;
pub mod transition;

pub use boundary::boundary_v1c;
pub use collapse::{collapse_cost, scaling_collapse, CollapseFit, SizeCurves};
pub use engine::{
    averaged_winding, default_phi_samples, evaluate, mean_winding, run_sweep, Axis, Evaluation,
    GridAverage, Observable, PhiStreams, ResultTable, Row, RunOptions, SweepManifest,
    SweepSettings, SweepSpec, WindingAverage, winding_transition,
};
pub use transition::{detect_transition, half_crossing, size_crossing, TransitionCriterion};
