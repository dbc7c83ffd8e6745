use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

/// Error category reported on stderr, one per exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    Usage,
    Io,
    DataFormat,
    Verification,
}

impl Category {
    pub fn exit_code(self) -> i32 {
        match self {
            Category::Usage => 1,
            Category::Io => 2,
            Category::DataFormat => 3,
            Category::Verification => 4,
        }
    }
}

#[derive(Debug, Error)]
pub enum Failure {
    #[error("{0}")]
    Usage(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        source: textkernel::Error,
    },

    #[error(transparent)]
    Core(#[from] textkernel::Error),

    #[error("{0}")]
    Verification(String),
}

impl Failure {
    pub fn category(&self) -> Category {
        match self {
            Failure::Usage(_) => Category::Usage,
            Failure::Io { .. } => Category::Io,
            Failure::Verification(_) => Category::Verification,
            Failure::InFile { source, .. } | Failure::Core(source) => classify(source),
        }
    }

    pub fn io(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
        move |source| Failure::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn in_file(path: &Path) -> impl FnOnce(textkernel::Error) -> Failure + '_ {
        move |source| match source {
            textkernel::Error::Io(source) => Failure::Io {
                path: path.to_path_buf(),
                source,
            },
            source => Failure::InFile {
                path: path.to_path_buf(),
                source,
            },
        }
    }

    /// Single-line JSON for stderr.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Report<'a> {
            error: Category,
            message: &'a str,
        }
        let message = self.to_string();
        serde_json::to_string(&Report {
            error: self.category(),
            message: &message,
        })
        .expect("error report serializes")
    }
}

fn classify(e: &textkernel::Error) -> Category {
    use textkernel::Error as E;
    match e {
        E::Io(_) => Category::Io,
        E::InvalidArgument(_) | E::InvalidDilationSize(_) | E::UnknownStrategy { .. } => {
            Category::Usage
        }
        E::DegeneratePolygon(_)
        | E::DimensionMismatch { .. }
        | E::Parse { .. }
        | E::MapFormat(_)
        | E::Json(_)
        | E::Oracle { .. } => Category::DataFormat,
    }
}

pub type CliResult<T> = Result<T, Failure>;
