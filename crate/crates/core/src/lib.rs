//! Velocity-aware small-cell biasing for two-tier (macro + small cell)
//! downlink networks.
//!
//! The crate is `no_std` + `alloc`. It covers:
//!
//! * [`model`]: scenario configuration, seeded random deployments,
//!   propagation and SINR.
//! * [`association`]: per-class biased max-power association and cell loads.
//! * [`coverage`]: rate requirements, handover loss, per-user rates and the
//!   Monte-Carlo rate-coverage estimator.
//! * [`optimizer`]: the three-stage per-class bias selection, the cell range
//!   expansion (CRE) baseline, exhaustive search, bandwidth dimensioning and
//!   convexity sweeps.
//! * [`trace`]: mobility/data-usage trace processing down to per-state
//!   volumes and the user convexity metric.
//!
//! File formats and the command line live in the `hetbias` crate.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod association;
pub mod coverage;
mod error;
mod math;
pub mod model;
pub mod optimizer;
pub mod trace;

pub use association::{associate, cell_loads, AssociationMap, BiasVector};
pub use coverage::{
    estimate_rate_coverage, handover_efficiency, rate_requirement, user_rate, CoverageReport,
    Requirements, TrialSet,
};
pub use error::{Error, Result};
pub use model::{
    received_power, sample_deployment, sinr, ClassProfile, Deployment, NetworkConfig, Point,
    StationId, Tier, User, UserClass,
};
pub use optimizer::{
    convexity_sweep, cre_optimize, full_search, required_bandwidth, stage1_stationary_bias,
    stage2_walking_bias, stage3_vehicular_bias, three_stage_optimize, BiasGrid, DemandScenario,
    Optimizer, OptimizerResult, Scheme, SweepRow,
};
pub use trace::{
    aggregate_population, aggregate_user, analyze_traces, classify_mobility, compute_velocity,
    ConvexityReport, MobilitySegment, TraceAnalysis, TraceSample,
};
