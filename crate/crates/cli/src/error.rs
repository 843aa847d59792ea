use dirackit::dirac_linear::DiracError;
use dirackit::exact_linalg::LinalgError;
use dirackit::pair_groupoid::GroupoidError;
use dirackit::surface_expr::ParseError;
use dirackit::surface_poisson::SurfaceError;
use dirackit::tree_invariant::TreeError;
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed or inconsistent input, including schema violations.
    #[error("{0}")]
    Input(String),
    #[error("cannot read or write {path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Parse(#[from] ParseError),
    /// A mathematical precondition failed; `axiom` names it.
    #[error("{message}")]
    Precondition { axiom: String, message: String },
    /// The surface input lies outside the generic class.
    #[error("{message}")]
    NonGeneric { check: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) | CliError::Io { .. } | CliError::Parse(_) => 2,
            CliError::Precondition { .. } => 3,
            CliError::NonGeneric { .. } => 4,
        }
    }

    pub fn to_json(&self) -> Value {
        let message = self.to_string();
        match self {
            CliError::Input(_) => json!({"kind": "schema", "message": message}),
            CliError::Io { .. } => json!({"kind": "io", "message": message}),
            CliError::Parse(e) => json!({"kind": "parse", "message": message, "offset": e.offset}),
            CliError::Precondition { axiom, .. } => {
                json!({"kind": "precondition", "message": message, "axiom": axiom})
            }
            CliError::NonGeneric { check, .. } => {
                json!({"kind": "non_generic", "message": message, "check": check})
            }
        }
    }
}

impl From<LinalgError> for CliError {
    fn from(e: LinalgError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<DiracError> for CliError {
    fn from(e: DiracError) -> Self {
        match e {
            DiracError::Precondition { axiom } => CliError::Precondition {
                axiom: axiom.to_string(),
                message: e.to_string(),
            },
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<GroupoidError> for CliError {
    fn from(e: GroupoidError) -> Self {
        match e {
            GroupoidError::DegenerateBase => CliError::Precondition {
                axiom: "omega_nondegenerate".into(),
                message: e.to_string(),
            },
            GroupoidError::GaugeNotPoisson => CliError::Precondition {
                axiom: "gauge_bivector_present".into(),
                message: e.to_string(),
            },
            GroupoidError::Dirac(d) => d.into(),
        }
    }
}

impl From<SurfaceError> for CliError {
    fn from(e: SurfaceError) -> Self {
        let check = match &e {
            SurfaceError::InvalidSpec(_) => return CliError::Input(e.to_string()),
            SurfaceError::Eval(_) => "evaluation",
            SurfaceError::VolumeNotConverged { .. } => "volume",
            _ => e.check_name().unwrap_or("surface"),
        };
        CliError::NonGeneric {
            check: check.into(),
            message: e.to_string(),
        }
    }
}

impl From<TreeError> for CliError {
    fn from(e: TreeError) -> Self {
        CliError::NonGeneric {
            check: "topology".into(),
            message: e.to_string(),
        }
    }
}
