use thiserror::Error;

/// Exit status for validation failures.
pub const EXIT_VALIDATION: i32 = 2;
/// Exit status when a resource cap is exceeded.
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] capgen_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Core(e) if e.is_resource_limit() => EXIT_RESOURCE,
            _ => EXIT_VALIDATION,
        }
    }
}

pub fn read_file(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}
