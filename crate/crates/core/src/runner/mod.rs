//! Experiment runner: configuration, sampling, execution and reports.

pub mod config;
mod exec;
pub mod report;
pub mod sample;

pub use config::{parse_conversion, parse_method, BackendSpec, DatasetSource, Overrides, ReportFormat, RunConfig};
pub use exec::{build_backend, parallel_map, run, run_with_backend, write_outputs, RunOutcome, SYNTHETIC_COUNT};
pub use report::{
    emit_report, format_value, format_with_delta, CellStatus, CellSummary, DeltaRow, Report, ReportMeta, SummaryRow,
    BASELINE_METHOD,
};
pub use sample::{sample_indices, sample_instances};

/// SplitMix64 finalizer over `seed` and a stream index.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
