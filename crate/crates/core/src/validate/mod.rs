//! Lake sanity checks and cross-source agreement statistics.

mod agreement;
mod checks;

pub use agreement::{
    bin_of, bland_altman, citation_agreement, mean_abs_diff, pearson, relative_difference,
    AgreementReport, AgreementStats, BinSummary, BlandAltman, Outlier, BINS, LOA_Z,
    MAX_LISTED_OUTLIERS,
};
pub use checks::{
    calendar_year, render_text, run_checks, write_report_csv, CheckConfig, CheckResult, LakeSnapshot,
    SpotCheck, Status, CHECK_NAMES,
};
