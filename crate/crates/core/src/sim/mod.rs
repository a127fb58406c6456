//! Deterministic synthetic overlays and probe experiments.

mod curves;
mod network;
mod source;

pub use curves::{
    export_curves, import_curves, read_curves, run_probe_experiment, run_probe_runs, write_curves,
    CurvePoint, ExperimentOptions, HitCurve, ProbeRun,
};
pub use network::{
    completeness_metrics, generate_network, NetworkModel, NetworkSpec, ShadeDistribution, SimError,
    SimRouter, VisibilityMetrics, DEFAULT_DATE, DEFAULT_K,
};
pub use source::SimulatedSource;
