//! Scenario registry, transport verifier, convergence sweeps and reports.

pub mod checks;
pub mod config;
pub mod fields;
pub mod report;
pub mod scenarios;
pub mod suite;
pub mod sweep;
pub mod verify;

pub use scenarios::{registry, scenario, ClosedForm, NamedField, Scenario, TimeFunction, SCENARIO_NAMES};
pub use verify::{
    leibniz_check, lhs_time_derivative, reynolds_check, rhs_transport, verify_transport, Diagnostics,
    LeibnizReport, TransportReport,
};
