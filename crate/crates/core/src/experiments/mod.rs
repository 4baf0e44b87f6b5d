//! Monte Carlo campaigns over the launch condition and over full simulated
//! elections, plus CSV / text-histogram emission for their results.
//!
//! Campaigns fan iterations out across worker threads; every iteration owns
//! an independently sub-seeded stream and aggregation is order-independent,
//! so a campaign's output is a pure function of its arguments.

mod campaign;
mod summary;

pub use campaign::{election_benchmark, launch_draw_samples, launch_time_campaign};
pub use summary::{
    csv_string, emit_csv, emit_histogram, histogram_string, CampaignSummary, EmitError,
    HistogramBucket, BUCKET_MS,
};
