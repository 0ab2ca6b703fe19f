use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("schema is invalid: {0}")]
    InvalidSchema(String),

    #[error("malformed CSV at record {record}: {message}")]
    MalformedCsv { record: usize, message: String },

    #[error("CSV header is missing schema variable `{0}`")]
    MissingHeaderColumn(String),

    #[error("row {row}: value `{value}` is not a declared level of `{variable}`")]
    UndeclaredLevel {
        row: usize,
        variable: String,
        value: String,
    },

    #[error("row {row}: `{value}` is not a number for `{variable}`")]
    NotNumeric {
        row: usize,
        variable: String,
        value: String,
    },

    #[error("table contains missing cells (first at row {row}, variable `{variable}`)")]
    MissingCell { row: usize, variable: String },

    #[error("hemoglobin value `{0}` is not a decimal with at most one fractional digit")]
    BadHemoglobin(String),

    #[error("hemoglobin {0} tenths g/dl is outside the accepted range 0..=250")]
    HemoglobinOutOfRange(i64),

    #[error("cannot derive a label from `{0}`")]
    BadLabelValue(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("labels contain a single class; both classes are required")]
    SingleClass,

    #[error("k must be odd, got {0}")]
    EvenK(usize),

    #[error("k = {k} exceeds the {n} training rows")]
    KTooLarge { k: usize, n: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("need at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("class {label} has {count} members; too small to stratify")]
    ClassTooSmall { label: i8, count: usize },

    #[error("empty input")]
    Empty,

    #[error("config line {line}: {message}")]
    ConfigSyntax { line: usize, message: String },

    #[error("config: {0}")]
    Config(String),

    #[error("I/O error on `{path}`: {message}")]
    Io { path: String, message: String },
}
