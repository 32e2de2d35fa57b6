use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::json;

#[derive(Debug)]
pub enum CliError {
    Domain(lrcbr::Error),
    Input { path: PathBuf, message: String },
    Usage(String),
}

impl CliError {
    pub fn input(path: &Path, message: impl fmt::Display) -> Self {
        CliError::Input { path: path.to_path_buf(), message: message.to_string() }
    }

    pub fn module(&self) -> &'static str {
        match self {
            CliError::Domain(e) => e.module(),
            CliError::Input { .. } => "input",
            CliError::Usage(_) => "usage",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    pub fn report(&self) {
        eprintln!("error: {self}");
        eprintln!("{}", json!({ "error": { "module": self.module(), "message": self.to_string() } }));
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Domain(e) => write!(f, "{e}"),
            CliError::Input { path, message } => write!(f, "{}: {message}", path.display()),
            CliError::Usage(m) => f.write_str(m),
        }
    }
}

macro_rules! domain_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Domain(e.into())
            }
        }
    )*};
}

domain_error!(
    lrcbr::Error,
    lrcbr::dataset::DatasetError,
    lrcbr::logistic::FitError,
    lrcbr::weighting::WeightError,
    lrcbr::retrieval::RetrievalError,
    lrcbr::evaluation::EvalError,
    lrcbr::experiment::ExperimentError
);

/// Writes to `out` atomically, or to stdout.
pub fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => lrcbr::experiment::write_atomic(path, bytes).map_err(CliError::from),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes).and_then(|_| stdout.flush()).map_err(|e| CliError::input(Path::new("<stdout>"), e))
        }
    }
}

pub fn json_bytes<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text.into_bytes()
}

pub fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory write")
}
