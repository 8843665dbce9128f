use bpchess::dataset::DatasetError;
use bpchess::experiment::ExperimentError;
use bpchess::ml::MlError;

/// Command failure, carrying its exit code class.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, config or unreadable inputs: exit 1.
    Usage(anyhow::Error),
    /// Inputs read but unusable (no games, schema mismatch, empty data): exit 2.
    Data(anyhow::Error),
    /// Anything else, including failed writes: exit 3.
    Internal(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Internal(_) => 3,
        }
    }

    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Usage(e) | Failure::Data(e) | Failure::Internal(e) => e,
        }
    }
}

impl From<DatasetError> for Failure {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Io { .. } | DatasetError::Config(_) => Failure::Usage(e.into()),
            _ => Failure::Data(e.into()),
        }
    }
}

impl From<MlError> for Failure {
    fn from(e: MlError) -> Self {
        match e {
            MlError::Dataset(d) => d.into(),
            MlError::Config(_) | MlError::TaskMismatch { .. } | MlError::Io { .. } => Failure::Usage(e.into()),
            MlError::NonFinite(_) => Failure::Internal(e.into()),
            _ => Failure::Data(e.into()),
        }
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Dataset(d) => d.into(),
            ExperimentError::Ml(m) => m.into(),
            _ => Failure::Data(e.into()),
        }
    }
}

pub type CmdResult = Result<(), Failure>;

pub fn usage(msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(anyhow::anyhow!("{msg}"))
}

pub fn data(msg: impl std::fmt::Display) -> Failure {
    Failure::Data(anyhow::anyhow!("{msg}"))
}

/// Writes an output file; failures are internal errors.
pub fn write_file(path: &std::path::Path, contents: &str) -> CmdResult {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .map_err(|e| Failure::Internal(anyhow::anyhow!("cannot create {}: {e}", dir.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| Failure::Internal(anyhow::anyhow!("cannot write {}: {e}", path.display())))
}

/// Reads a user-supplied input; failures are usage errors.
pub fn read_input(path: &std::path::Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}
