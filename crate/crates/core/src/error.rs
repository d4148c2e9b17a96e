use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("parameter {name} = {value} out of range ({expected})")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("invalid model combination: {0}")]
    InvalidCombination(String),
    #[error("alternative must have at least one attribute")]
    EmptyAlternative,
    #[error("attribute value {0} is not finite")]
    NonFinite(f64),
    #[error("dimension mismatch: expected {expected} attributes, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("menu must contain 2 or 3 alternatives, got {0}")]
    MenuSize(usize),
    #[error("attribute {attribute} mixes signs across alternatives")]
    SignConflict { attribute: usize },
    #[error("target alternative is not a member of the menu")]
    TargetNotInMenu,
    #[error("three-option menus are only defined for range normalization models")]
    ThreeOptionUnsupported,
    #[error("contextual concavity requires same-sign arguments, got ({t}, {s})")]
    MixedSign { t: f64, s: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ElicitError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid price list: {0}")]
    InvalidMpl(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("row value {0} outside the price list bounds")]
    RowOutOfRange(f64),
    #[error("quality must be nonnegative and finite, got {0}")]
    InvalidQuality(f64),
    #[error("preference difference never changes sign over the list")]
    NoCrossing,
    #[error("switch point {0} is outside the domain of the closed form")]
    OutOfDomain(f64),
    #[error("alternatives must differ in exactly one attribute: {0}")]
    NotSingleUpgrade(String),
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AuditError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid audit grid: {0}")]
    InvalidGrid(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimulationError {
    #[error(transparent)]
    Elicit(#[from] ElicitError),
    #[error("invalid subject profile {subject_id}: {reason}")]
    InvalidProfile { subject_id: u32, reason: String },
    #[error("duplicate subject id {0}")]
    DuplicateSubject(u32),
    #[error("no subject profiles supplied")]
    EmptyCohort,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("k = {k} exceeds the number of trials {trials}")]
    TailIndex { trials: u64, k: u64 },
    #[error("number of trials must be at least 1")]
    NoTrials,
    #[error("no subjects with a nonzero difference")]
    NoDirectionalSubjects,
    #[error("significance must lie strictly between 0 and 1, got {0}")]
    InvalidSignificance(f64),
    #[error("empty input")]
    Empty,
    #[error("group {0} has no subjects")]
    EmptyGroup(String),
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("at least 2 clusters are required, found {0}")]
    TooFewClusters(usize),
    #[error("non-finite value in input")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegionError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid region spec: {0}")]
    InvalidSpec(String),
    #[error("prices must be nonnegative, got ({lp}, {hp})")]
    NegativePrice { lp: f64, hp: f64 },
    #[error("no boundary between the requested regions")]
    NoBoundary,
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("config: {0}")]
    Config(String),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
}
