use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the estimators and data model.
///
/// Every variant maps to a stable, module-qualified code (see [`Error::code`])
/// which the command-line front end surfaces verbatim.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("need at least two categories, got {0}")]
    TooFewCategories(usize),
    #[error("expected {expected} values, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("entry {index} is not strictly positive ({value})")]
    NonPositiveEntry { index: usize, value: f64 },
    #[error("shares sum to {0}, not 1")]
    NotNormalized(f64),
    #[error("category labels differ between operands")]
    LabelMismatch,
    #[error("baseline index {index} out of range for {len} categories")]
    BadBaseline { index: usize, len: usize },
    #[error("non-finite input value")]
    NonFiniteInput,
    #[error("unknown category `{0}`")]
    UnknownCategory(String),

    #[error("duplicate cell: group `{group}`, time {period}, category `{category}`{}", stratum_suffix(.stratum))]
    DuplicateCell {
        group: String,
        period: i64,
        category: String,
        stratum: Option<String>,
    },
    #[error("unbalanced panel: missing group `{group}`, time {period}, category `{category}`{}", stratum_suffix(.stratum))]
    UnbalancedPanel {
        group: String,
        period: i64,
        category: String,
        stratum: Option<String>,
    },
    #[error("non-positive count {value} at group `{group}`, time {period}, category `{category}`")]
    NonPositiveCount {
        group: String,
        period: i64,
        category: String,
        value: f64,
    },
    #[error("inconsistent categories: {0}")]
    InconsistentCategories(String),
    #[error("unknown group `{0}`")]
    UnknownGroup(String),
    #[error("unknown stratum `{0}`")]
    UnknownStratum(String),
    #[error("missing weight for stratum `{0}`")]
    MissingStratumWeight(String),
    #[error("invalid stratum weights: {0}")]
    InvalidStratumWeights(String),
    #[error("invalid treatment timing: {0}")]
    InvalidTiming(String),
    #[error("panel layout does not fit this estimator: {0}")]
    BadLayout(String),
    #[error("empty panel")]
    EmptyPanel,

    #[error("no pre-treatment periods available")]
    NoPrePeriods,
    #[error("invalid weight scheme: {0}")]
    InvalidWeights(String),

    #[error("no never-treated group in panel")]
    NoNeverTreatedGroup,
    #[error("bad period: {0}")]
    BadPeriod(String),
    #[error("unknown cohort {0}")]
    UnknownCohort(i64),
    #[error("no valid not-yet-treated control cohort for cohort {cohort} at time {period}")]
    NoValidControlCohort { cohort: i64, period: i64 },

    #[error("no control groups")]
    NoControls,
    #[error("non-positive synthetic GTT denominator for categories {0:?}")]
    NonPositiveDenominator(Vec<String>),

    #[error("replicate {replicate} kept producing empty cells after {attempts} redraws")]
    ZeroReplicateFailure { replicate: usize, attempts: usize },
    #[error("empty sample")]
    EmptySample,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid nest structure: {0}")]
    InvalidNestStructure(String),
}

fn stratum_suffix(stratum: &Option<String>) -> String {
    match stratum {
        Some(s) => alloc::format!(", stratum `{s}`"),
        None => String::new(),
    }
}

impl Error {
    /// Stable `module.kind` code.
    pub fn code(&self) -> &'static str {
        use Error::*;
        match self {
            TooFewCategories(_) => "simplex.too_few_categories",
            LengthMismatch { .. } => "simplex.length_mismatch",
            NonPositiveEntry { .. } => "simplex.non_positive_entry",
            NotNormalized(_) => "simplex.not_normalized",
            LabelMismatch => "simplex.label_mismatch",
            BadBaseline { .. } => "simplex.bad_baseline",
            NonFiniteInput => "simplex.non_finite_input",
            UnknownCategory(_) => "simplex.unknown_category",
            DuplicateCell { .. } => "panel.duplicate_cell",
            UnbalancedPanel { .. } => "panel.unbalanced_panel",
            NonPositiveCount { .. } => "panel.non_positive_count",
            InconsistentCategories(_) => "panel.inconsistent_categories",
            UnknownGroup(_) => "panel.unknown_group",
            UnknownStratum(_) => "panel.unknown_stratum",
            MissingStratumWeight(_) => "panel.missing_stratum_weight",
            InvalidStratumWeights(_) => "panel.invalid_stratum_weights",
            InvalidTiming(_) => "panel.invalid_timing",
            BadLayout(_) => "panel.bad_layout",
            EmptyPanel => "panel.empty",
            NoPrePeriods => "bounds.no_pre_periods",
            InvalidWeights(_) => "bounds.invalid_weights",
            NoNeverTreatedGroup => "staggered.no_never_treated_group",
            BadPeriod(_) => "staggered.bad_period",
            UnknownCohort(_) => "staggered.unknown_cohort",
            NoValidControlCohort { .. } => "staggered.no_valid_control_cohort",
            NoControls => "synthetic.no_controls",
            NonPositiveDenominator(_) => "synthetic.non_positive_denominator",
            ZeroReplicateFailure { .. } => "bootstrap.zero_replicate_failure",
            EmptySample => "bootstrap.empty_sample",
            InvalidConfig(_) => "bootstrap.invalid_config",
            InvalidNestStructure(_) => "rum.invalid_nest_structure",
        }
    }

    /// Whether the error reflects invalid input data or settings rather than
    /// a failure during estimation.
    pub fn is_validation(&self) -> bool {
        self.code().starts_with("panel.")
            || matches!(self, Error::InvalidWeights(_) | Error::InvalidConfig(_) | Error::InvalidNestStructure(_))
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
