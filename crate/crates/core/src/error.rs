use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the toolkit can report.
///
/// Context wrappers ([`Error::Band`], [`Error::Scene`], [`Error::Stage`]) carry
/// the failing item's name; [`Error::root`] strips them to reach the cause.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown band label {0:?}")]
    UnknownBand(String),

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("parse error at byte offset {offset}: {message}")]
    Parse { offset: u64, message: String },

    #[error("missing georeference: {0}")]
    MissingGeoreference(String),

    #[error("unsupported shape type {0} (only polygon, type 5, is supported)")]
    UnsupportedShapeType(i32),

    #[error("missing mandatory metadata key {0}")]
    MissingKey(String),

    #[error("unsupported CRS EPSG:{0}")]
    UnsupportedCrs(u32),

    #[error("point ({x}, {y}) lies outside the projection domain")]
    OutOfProjectionDomain { x: f64, y: f64 },

    #[error("empty or degenerate geometry")]
    EmptyGeometry,

    #[error("box does not intersect the raster extent")]
    EmptyIntersection,

    #[error("pixel size ratio {0} is not an integer >= 1")]
    NonIntegerRatio(f64),

    #[error("input band {band} is unavailable for {sensor}")]
    MissingInput { band: String, sensor: String },

    #[error("at least two time steps are required")]
    InsufficientHistory,

    #[error("scheme is defined for {expected} but the raster holds {found}")]
    SchemeMismatch { expected: String, found: String },

    #[error("no classification scheme for {0}")]
    NoScheme(String),

    #[error("duplicate acquisition timestamp {0}")]
    DuplicateTimestamp(String),

    #[error("grid of scene {scene} does not match the cube grid")]
    GridMismatch { scene: String },

    #[error("not a NetCDF classic file")]
    NotNetcdf,

    #[error("NetCDF schema error: {0}")]
    Schema(String),

    #[error("cube too large for the classic 64-bit offset format: {0}")]
    TooLarge(String),

    #[error("invalid value: {0}")]
    Invalid(String),

    #[error("configuration error at {path}: {message}")]
    Config { path: String, message: String },

    #[error("write failed for {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("band {band}: {source}")]
    Band {
        band: String,
        #[source]
        source: Box<Error>,
    },

    #[error("scene {scene}: {source}")]
    Scene {
        scene: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn parse(offset: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            offset,
            message: message.into(),
        }
    }

    pub fn in_band(self, band: impl Into<String>) -> Self {
        Error::Band {
            band: band.into(),
            source: Box::new(self),
        }
    }

    pub fn in_scene(self, scene: impl Into<String>) -> Self {
        Error::Scene {
            scene: scene.into(),
            source: Box::new(self),
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// The underlying cause with all context wrappers removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Band { source, .. } | Error::Scene { source, .. } | Error::Stage { source, .. } => {
                source.root()
            }
            other => other,
        }
    }

    /// Short machine-readable name of the root cause.
    pub fn kind_name(&self) -> &'static str {
        match self.root() {
            Error::UnknownBand(_) => "UnknownBand",
            Error::UnsupportedFormat(_) => "UnsupportedFormat",
            Error::Parse { .. } => "ParseError",
            Error::MissingGeoreference(_) => "MissingGeoreference",
            Error::UnsupportedShapeType(_) => "UnsupportedShapeType",
            Error::MissingKey(_) => "MissingKey",
            Error::UnsupportedCrs(_) => "UnsupportedCrs",
            Error::OutOfProjectionDomain { .. } => "OutOfProjectionDomain",
            Error::EmptyGeometry => "EmptyGeometry",
            Error::EmptyIntersection => "EmptyIntersection",
            Error::NonIntegerRatio(_) => "NonIntegerRatio",
            Error::MissingInput { .. } => "MissingInput",
            Error::InsufficientHistory => "InsufficientHistory",
            Error::SchemeMismatch { .. } => "SchemeMismatch",
            Error::NoScheme(_) => "NoScheme",
            Error::DuplicateTimestamp(_) => "DuplicateTimestamp",
            Error::GridMismatch { .. } => "GridMismatch",
            Error::NotNetcdf => "NotNetcdf",
            Error::Schema(_) => "SchemaError",
            Error::TooLarge(_) => "TooLarge",
            Error::Invalid(_) => "Invalid",
            Error::Config { .. } => "ConfigError",
            Error::Write { .. } => "WriteError",
            Error::Io { .. } => "IoError",
            Error::Band { .. } | Error::Scene { .. } | Error::Stage { .. } => unreachable!(),
        }
    }

    /// Path of context labels from the outermost wrapper inwards.
    pub fn context(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Error::Stage { stage, source } => {
                    out.push(format!("stage={stage}"));
                    cur = source;
                }
                Error::Scene { scene, source } => {
                    out.push(format!("scene={scene}"));
                    cur = source;
                }
                Error::Band { band, source } => {
                    out.push(format!("band={band}"));
                    cur = source;
                }
                _ => return out,
            }
        }
    }
}
