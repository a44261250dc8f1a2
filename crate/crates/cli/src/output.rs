use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;

/// Bumped whenever a JSON layout changes incompatibly.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Every JSON document the tool writes: the schema version, the echoed
/// configuration, then the payload.
#[derive(Serialize)]
pub struct Envelope<'a, C: Serialize, R: Serialize> {
    pub schema_version: u32,
    pub config: &'a C,
    pub result: R,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Library(#[from] hypertree::Error),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use hypertree::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Library(E::InvalidParameter(_) | E::InvalidFace(_) | E::NotProperSubtree(_)) => 2,
            CliError::Library(E::BudgetExceeded { .. }) => 3,
            CliError::Library(E::NumericalDegeneracy(_)) => 4,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        use hypertree::Error as E;
        match self {
            CliError::Usage(_) => "usage",
            CliError::Library(E::InvalidParameter(_) | E::InvalidFace(_) | E::NotProperSubtree(_)) => "usage",
            CliError::Library(E::BudgetExceeded { .. }) => "budget_exceeded",
            CliError::Library(E::NumericalDegeneracy(_)) => "numerical_degeneracy",
            CliError::Library(_) => "library",
            CliError::Io(_) => "io",
            CliError::Json(_) | CliError::Csv(_) => "serialization",
            CliError::Failed(_) => "check_failed",
        }
    }

    /// The machine-readable error object printed on stderr.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": {
                "kind": self.kind(),
                "message": self.to_string(),
                "exit_code": self.exit_code(),
            }
        })
        .to_string()
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Where the primary output goes: a file when `--out` is given, else stdout.
pub struct Sink {
    path: Option<PathBuf>,
}

impl Sink {
    pub fn new(path: Option<&Path>) -> Sink {
        Sink {
            path: path.map(Path::to_path_buf),
        }
    }

    pub fn is_file(&self) -> bool {
        self.path.is_some()
    }

    pub fn open(&self) -> CliResult<Box<dyn Write>> {
        Ok(match &self.path {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }

    pub fn write_json<C: Serialize, R: Serialize>(&self, config: &C, result: R) -> CliResult<()> {
        let mut out = self.open()?;
        let envelope = Envelope {
            schema_version: SCHEMA_VERSION,
            config,
            result,
        };
        serde_json::to_writer(&mut out, &envelope)?;
        writeln!(out)?;
        out.flush()?;
        Ok(())
    }

    /// Writes CSV rows under `header`.
    pub fn write_csv<I, R>(&self, header: &[&str], rows: I) -> CliResult<()>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator,
        R::Item: AsRef<[u8]>,
    {
        let mut w = csv::Writer::from_writer(self.open()?);
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }
}
