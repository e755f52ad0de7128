use std::path::PathBuf;

use thiserror::Error;

/// Every failure the toolkit can report.
///
/// Variant names double as the short error strings recorded in metric
/// reports (see [`Error::kind`]), so they are kept stable.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed WAV: {0}")]
    MalformedWav(String),
    #[error("unsupported WAV encoding: {0}")]
    UnsupportedEncoding(String),
    #[error("invalid audio buffer: {0}")]
    InvalidBuffer(String),
    #[error("channel {index} out of range for {channels}-channel buffer")]
    ChannelOutOfRange { index: usize, channels: usize },
    #[error("expected mono audio, got {0} channels")]
    NotMono(usize),

    #[error("empty signal")]
    EmptySignal,
    #[error("empty input")]
    EmptyInput,
    #[error("invalid STFT configuration: {0}")]
    InvalidStftConfig(String),
    #[error("STFT configuration does not satisfy overlap-add reconstruction: {0}")]
    NonColaConfig(String),
    #[error("invalid mel band: {0}")]
    InvalidBand(String),
    #[error("invalid cutoff: {0}")]
    InvalidCutoff(String),

    #[error("sample rate mismatch: {reference} Hz vs {estimate} Hz")]
    RateMismatch { reference: u32, estimate: u32 },
    #[error("length mismatch: {reference} vs {estimate} samples exceeds tolerance of {tolerance}")]
    LengthMismatch {
        reference: usize,
        estimate: usize,
        tolerance: usize,
    },
    #[error("reference signal is all zero")]
    DegenerateSignal,
    #[error("estimate is all zero after mean removal")]
    ZeroEstimate,
    #[error("signal too short: {0}")]
    TooShort(String),
    #[error("projection is singular: {0}")]
    SingularProjection(String),
    #[error("no loudness block survives gating")]
    SilentOrGatedOut,
    #[error("too many sources for exhaustive permutation search: {0} (max 6)")]
    TooManySources(usize),
    #[error("source count mismatch: {references} references vs {estimates} estimates")]
    SourceCountMismatch { references: usize, estimates: usize },
    #[error("unknown metric {0:?}")]
    UnknownMetric(String),
    #[error("metric {0} requires a mixture signal")]
    MissingMixture(String),

    #[error("invalid room: {0}")]
    InvalidRoom(String),
    #[error("RT60 of {rt60_s} s is unachievable in this room (absorption {alpha} >= 1)")]
    UnachievableRT60 { rt60_s: f64, alpha: f64 },
    #[error("speech signal is silent")]
    SilentSpeech,
    #[error("noise signal is silent")]
    SilentNoise,
    #[error("asset not found: {0}")]
    AssetNotFound(String),
    #[error("separation needs two distinct speakers, got {0:?} twice")]
    SameSpeaker(String),
    #[error("expected {expected} Hz audio, got {actual} Hz")]
    WrongRate { expected: u32, actual: u32 },
    #[error("invalid mixture spec: {0}")]
    InvalidSpec(String),

    #[error("no audio assets found under {0}")]
    NoAssetsFound(String),
    #[error("duplicate asset id {id:?} ({first} and {second})")]
    DuplicateAssetId {
        id: String,
        first: PathBuf,
        second: PathBuf,
    },
    #[error("insufficient assets: {0}")]
    InsufficientAssets(String),
    #[error("invalid recipe: {0}")]
    InvalidRecipe(String),
    #[error("manifest schema version {found:?} is not supported (reader expects {expected:?})")]
    SchemaVersionMismatch { found: String, expected: String },
    #[error("malformed manifest line {line}: {message}")]
    MalformedLine { line: usize, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable short name of the variant, e.g. `"TooShort"`.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "IoError",
            Error::MalformedWav(_) => "MalformedWav",
            Error::UnsupportedEncoding(_) => "UnsupportedEncoding",
            Error::InvalidBuffer(_) => "InvalidBuffer",
            Error::ChannelOutOfRange { .. } => "ChannelOutOfRange",
            Error::NotMono(_) => "NotMono",
            Error::EmptySignal => "EmptySignal",
            Error::EmptyInput => "EmptyInput",
            Error::InvalidStftConfig(_) => "InvalidStftConfig",
            Error::NonColaConfig(_) => "NonColaConfig",
            Error::InvalidBand(_) => "InvalidBand",
            Error::InvalidCutoff(_) => "InvalidCutoff",
            Error::RateMismatch { .. } => "RateMismatch",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::DegenerateSignal => "DegenerateSignal",
            Error::ZeroEstimate => "ZeroEstimate",
            Error::TooShort(_) => "TooShort",
            Error::SingularProjection(_) => "SingularProjection",
            Error::SilentOrGatedOut => "SilentOrGatedOut",
            Error::TooManySources(_) => "TooManySources",
            Error::SourceCountMismatch { .. } => "SourceCountMismatch",
            Error::UnknownMetric(_) => "UnknownMetric",
            Error::MissingMixture(_) => "MissingMixture",
            Error::InvalidRoom(_) => "InvalidRoom",
            Error::UnachievableRT60 { .. } => "UnachievableRT60",
            Error::SilentSpeech => "SilentSpeech",
            Error::SilentNoise => "SilentNoise",
            Error::AssetNotFound(_) => "AssetNotFound",
            Error::SameSpeaker(_) => "SameSpeaker",
            Error::WrongRate { .. } => "WrongRate",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::NoAssetsFound(_) => "NoAssetsFound",
            Error::DuplicateAssetId { .. } => "DuplicateAssetId",
            Error::InsufficientAssets(_) => "InsufficientAssets",
            Error::InvalidRecipe(_) => "InvalidRecipe",
            Error::SchemaVersionMismatch { .. } => "SchemaVersionMismatch",
            Error::MalformedLine { .. } => "MalformedLine",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
