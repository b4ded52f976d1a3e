//! Table metrics, CSV and SVG reports, and saved run bundles.

mod bundle;
mod metrics;
mod plot;

pub use bundle::{
    predicates_text, save_explanation, RunBundle, TargetDescriptor, FUNCTIONS_FILE, METRICS_FILE, PLOT_FILE,
    PREDICATES_FILE, RESULTS_FILE, SCHEMA_VERSION, TIMING_FILE, TREES_FILE,
};
pub use metrics::{
    aggregate, compute_metrics, distinct_functions, functions_csv, metrics_csv, Aggregate, MetricsConfig, MetricsRow,
    ELBOW_THRESHOLD, FIT_TOLERANCE,
};
pub use plot::emit_plot;
