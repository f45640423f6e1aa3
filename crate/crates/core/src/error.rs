use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("out of bounds: {0}")]
    Bounds(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("index out of range: {0}")]
    Index(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),

    #[error("scene generation failed: {0}")]
    Generation(String),

    #[error("scene {index}: {source}")]
    Scene {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn shape(what: &str, a: (usize, usize), b: (usize, usize)) -> Self {
        Error::Shape(format!("{what}: {}x{} vs {}x{}", a.0, a.1, b.0, b.1))
    }

    pub fn in_scene(self, index: usize) -> Self {
        Error::Scene { index, source: Box::new(self) }
    }

    /// True for errors caused by filesystem or decoding problems rather than
    /// invalid values.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io { .. } => true,
            Error::Scene { source, .. } => source.is_io(),
            _ => false,
        }
    }
}
