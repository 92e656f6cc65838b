use std::process::ExitCode;

use plateau_core::chain_solver::SolverError;
use plateau_core::complex::ComplexError;
use plateau_core::douglas::DouglasError;
use plateau_core::grid::GridError;
use plateau_core::homology::HomologyError;
use plateau_core::measure::MeasureError;
use plateau_core::reference::ReferenceError;
use plateau_core::scene::SceneError;
use plateau_core::sliding::MeshError;
use serde::Serialize;

/// Exit codes, also listed in the README.
pub mod code {
    pub const USAGE: u8 = 2;
    pub const IO: u8 = 3;
    pub const SCHEMA: u8 = 4;
    pub const INVALID: u8 = 5;
    pub const INFEASIBLE: u8 = 6;
    pub const LIMIT: u8 = 7;
    pub const INTERNAL: u8 = 70;
}

#[derive(Debug, Serialize)]
pub struct CliError {
    pub code: u8,
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

impl CliError {
    fn new(code: u8, kind: &'static str, message: impl Into<String>) -> Self {
        CliError { code, kind, message: message.into(), path: None }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(code::USAGE, "usage", message)
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self::new(code::IO, "io", message)
    }

    pub fn schema(message: impl Into<String>) -> Self {
        Self::new(code::SCHEMA, "schema", message)
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Self::new(code::INVALID, "invalid-input", message)
    }

    pub fn infeasible(message: impl Into<String>) -> Self {
        Self::new(code::INFEASIBLE, "infeasible", message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(code::INTERNAL, "internal", message)
    }

    pub fn missing_block(name: &str) -> Self {
        let mut e = Self::schema(format!("scene has no `{name}` block"));
        e.path = Some(name.to_string());
        e
    }

    /// Prints the error as JSON on stdout and a one-line message on stderr.
    pub fn report(&self) -> ExitCode {
        let body = serde_json::json!({ "error": self });
        println!("{}", serde_json::to_string_pretty(&body).expect("errors serialize"));
        eprintln!("plateau: {}", self.message);
        ExitCode::from(self.code)
    }
}

impl From<SceneError> for CliError {
    fn from(e: SceneError) -> Self {
        match &e {
            SceneError::Io { .. } => CliError::io(e.to_string()),
            SceneError::Schema { path, .. } => {
                let mut c = CliError::schema(e.to_string());
                c.path = Some(path.clone());
                c
            }
            SceneError::Mesh(_) => CliError::invalid(e.to_string()),
            _ => CliError::schema(e.to_string()),
        }
    }
}

impl From<ComplexError> for CliError {
    fn from(e: ComplexError) -> Self {
        CliError::invalid(e.to_string())
    }
}

impl From<HomologyError> for CliError {
    fn from(e: HomologyError) -> Self {
        CliError::invalid(e.to_string())
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::BoundTooSmall { .. } | SolverError::Infeasible(_) => CliError::infeasible(e.to_string()),
            SolverError::Overflow | SolverError::Budget(_) => CliError::new(code::LIMIT, "limit", e.to_string()),
            _ => CliError::invalid(e.to_string()),
        }
    }
}

impl From<DouglasError> for CliError {
    fn from(e: DouglasError) -> Self {
        CliError::invalid(e.to_string())
    }
}

impl From<MeshError> for CliError {
    fn from(e: MeshError) -> Self {
        CliError::invalid(e.to_string())
    }
}

impl From<GridError> for CliError {
    fn from(e: GridError) -> Self {
        match e {
            GridError::NoCenter { .. } => CliError::infeasible(e.to_string()),
            _ => CliError::invalid(e.to_string()),
        }
    }
}

impl From<MeasureError> for CliError {
    fn from(e: MeasureError) -> Self {
        CliError::invalid(e.to_string())
    }
}

impl From<ReferenceError> for CliError {
    fn from(e: ReferenceError) -> Self {
        match e {
            ReferenceError::NoYFilm => CliError::infeasible(e.to_string()),
            ReferenceError::BadConfig => CliError::invalid(e.to_string()),
        }
    }
}
