//! Builtin systems, the random system generator, and the Monte Carlo sweep
//! harness with its CSV and SVG outputs.

pub mod builtin;
pub mod config;
pub mod plot;
pub mod sweep;

pub use builtin::{builtin_system, newton, random_system, rescale_to_radius, unstable_3x3};
pub use config::{Metric, ScenarioConfig, Sweep, SystemSpec};
pub use sweep::{run_sweep, write_sweep_outputs, CellRecord, MissingCell, SummaryRow, SweepResult};
