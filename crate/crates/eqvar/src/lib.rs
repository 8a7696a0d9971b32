//! Std companion to `eqvar-core`: file formats, the simulation harness, plots.

pub mod fit;
pub mod harness;
pub mod io;
pub mod plot;

pub use fit::{fit_from_file, fit_matrix, FitError, FitOptions, FitOutput};
pub use harness::{run_experiment, ExperimentResult, ExperimentSpec, GammaMode};
pub use plot::emit_plot;
