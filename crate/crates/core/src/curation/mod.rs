//! Dataset curation: filters, mixture handling, promiscuity scoring and
//! hierarchical screen labeling, with a per-step provenance report.

mod filters;
mod hierarchy;
mod pipeline;
mod promiscuity;
mod records;

pub use filters::{
    dedupe, handle_mixture, inorganic_filter, lipinski, optical_filter, pains_catalog_filter, parser_filter,
    FilterOutcome, LipinskiInputs, LipinskiResult, Verdict, MIXTURE_MW_TOLERANCE,
};
pub use hierarchy::{
    evaluate_hierarchy, load_hierarchy, AssayOutcome, HierarchyError, HierarchySpec, Outcome, OutcomeTable, Role,
    Screen, ScreenHierarchy, ScreenSpec, SetExpr, Term,
};
pub use pipeline::{
    read_blocklist, run_pipeline, CurationConfig, CurationError, CurationReport, CurationSettings, Step, StepReport,
    TrailEntry, PAPER_ORDER,
};
pub use promiscuity::{foh, AssayTest, PromiscuityTable, FOH_THRESHOLD, MIN_ASSAY_SIZE};
pub use records::{read_records, write_records, CompoundRecord, Label, DEFAULT_INACTIVE_UM};
