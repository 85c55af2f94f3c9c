use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the membrane pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("degenerate geometry in element {element}: {reason}")]
    Geometry { element: usize, reason: String },

    #[error("inverted deformation (det F = {det:e})")]
    InvertedElement { det: f64 },

    #[error("singular Hooke tensor: nu = 0.5 has no finite first Lame parameter")]
    SingularLame,

    #[error("plane-stress condensation singular (L_NN not invertible)")]
    CondensationSingular,

    #[error("plane-stress director solve did not converge; residual history {history:?}")]
    LocalDivergence { history: Vec<f64> },

    #[error("element {element}, quadrature point {point}: {source}")]
    AtPoint {
        element: usize,
        point: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("linear system singular at dof {dof}")]
    Singular { dof: usize },

    #[error("linear solver failure: {0}")]
    LinearSolver(String),

    #[error("Newton iteration did not converge at load step {step} after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        step: usize,
        iterations: usize,
        residual: f64,
        report: Box<crate::solver::SolveReport>,
    },

    #[error("form finding stopped after {iterations} iterations (movement {movement:e}{})", if *pinching { ", surface pinching" } else { "" })]
    FormFinding {
        iterations: usize,
        movement: f64,
        pinching: bool,
        state: Box<crate::form_finding::FormFindState>,
    },

    #[error("degenerate mesh: Laplace-Beltrami stiffness singular at dof {dof}")]
    DegenerateMesh { dof: usize },

    #[error("ill-posed problem: {0}")]
    IllPosed(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}:{line}: unsupported element with {vertices} vertices")]
    UnsupportedElement {
        path: PathBuf,
        line: usize,
        vertices: usize,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("refinement level {level} failed: {source}")]
    Study {
        level: usize,
        #[source]
        source: Box<Error>,
        /// Rows completed before the failure.
        partial: Box<crate::scenarios::ConvergenceTable>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn at_point(self, element: usize, point: usize) -> Error {
        match self {
            e @ Error::AtPoint { .. } => e,
            e => Error::AtPoint {
                element,
                point,
                source: Box::new(e),
            },
        }
    }

    /// Process exit code: 1 for configuration and parameter errors, 2 for
    /// I/O and parsing, 3 for everything raised while computing.
    pub fn exit_code(&self) -> i32 {
        match self.root() {
            Error::Config(_) | Error::Parameter(_) => 1,
            Error::Io(_) | Error::Parse { .. } | Error::UnsupportedElement { .. } => 2,
            Error::Study { source, .. } => source.exit_code(),
            _ => 3,
        }
    }

    /// Strips [`Error::AtPoint`] wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtPoint { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
