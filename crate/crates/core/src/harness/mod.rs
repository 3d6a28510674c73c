//! Parameter sweeps and their CSV / JSON / SVG output.

mod config;
mod emit;
mod stats;
mod svg;
mod sweep;

pub use config::{BaseParams, OutputKind, SweepConfig, SweepVariable};
pub use emit::{
    read_csv, sidecar, write_csv, write_sidecar, RunMetadata, CSV_HEADER, SIDECAR_FORMAT_VERSION,
};
pub use stats::{ranks, spearman};
pub use svg::{render_svg, write_svg};
pub use sweep::{evaluate_point, run_sweep, run_sweep_with, Execution, SweepRow};
