//! Event-log construction: fetching, timeline reconstruction, filtering and
//! training-window estimates.

pub mod bugzilla;
pub mod dataset;
pub mod estimate;
pub mod events;
pub mod filters;
pub mod timeline;

pub use dataset::{build_dataset, Dataset, DatasetError, DatasetManifest};
pub use estimate::{
    auto_horizon, component_experience, daily_simultaneous_counts, estimate_slot_counts, identify_active_developers, outlier_threshold,
    EmptyHistory,
};
pub use events::{EventKind, RawEvent};
pub use filters::{apply_filters, derive_plan, FilterPlan, StageCounts};
pub use timeline::build_records;
