//! Error classification: every failure maps to a documented exit code and a
//! machine-readable JSON line on stderr.

use serde::Serialize;
use tabmia_core::attack::AttackError;
use tabmia_core::challenge::ChallengeError;
use tabmia_core::diffusion::DiffusionError;
use tabmia_core::evaluation::EvalError;
use tabmia_core::numerics::NumericsError;
use tabmia_core::tabular::TabularError;

/// Exit codes: 2 config, 3 missing file, 4 data/schema violation,
/// 5 numeric failure, 6 internal.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    MissingFile(String),
    Data(String),
    Numeric(String),
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::MissingFile(_) => 3,
            CliError::Data(_) => 4,
            CliError::Numeric(_) => 5,
            CliError::Internal(_) => 6,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::MissingFile(_) => "missing_file",
            CliError::Data(_) => "data",
            CliError::Numeric(_) => "numeric",
            CliError::Internal(_) => "internal",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m)
            | CliError::MissingFile(m)
            | CliError::Data(m)
            | CliError::Numeric(m)
            | CliError::Internal(m) => m,
        }
    }

    pub fn to_stderr_json(&self) -> String {
        #[derive(Serialize)]
        struct Inner<'a> {
            code: i32,
            kind: &'a str,
            message: &'a str,
        }
        #[derive(Serialize)]
        struct Wrapper<'a> {
            error: Inner<'a>,
        }
        serde_json::to_string(&Wrapper {
            error: Inner {
                code: self.code(),
                kind: self.kind(),
                message: self.message(),
            },
        })
        .expect("error json serializes")
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::NotFound {
            CliError::MissingFile(e.to_string())
        } else {
            CliError::Internal(format!("i/o: {e}"))
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Config(format!("json: {e}"))
    }
}

impl From<TabularError> for CliError {
    fn from(e: TabularError) -> Self {
        match e {
            TabularError::Io(io) => io.into(),
            TabularError::InvalidMixture(_) => CliError::Config(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<NumericsError> for CliError {
    fn from(e: NumericsError) -> Self {
        match e {
            NumericsError::Io(io) => io.into(),
            NumericsError::NonFinite { .. } | NumericsError::NonFiniteGradient { .. } => {
                CliError::Numeric(e.to_string())
            }
            NumericsError::InvalidHyperParameter(_) => CliError::Config(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<DiffusionError> for CliError {
    fn from(e: DiffusionError) -> Self {
        match e {
            DiffusionError::Divergence { .. }
            | DiffusionError::NonFiniteActivation { .. }
            | DiffusionError::NonFiniteSample { .. } => CliError::Numeric(e.to_string()),
            DiffusionError::InvalidSchedule(_) | DiffusionError::InvalidConfig(_) => {
                CliError::Config(e.to_string())
            }
            DiffusionError::Numerics(n) => n.into(),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<AttackError> for CliError {
    fn from(e: AttackError) -> Self {
        match e {
            AttackError::Io(io) => io.into(),
            AttackError::Json(j) => j.into(),
            AttackError::InvalidConfig(_) => CliError::Config(e.to_string()),
            AttackError::NonFiniteFeature { .. } => CliError::Numeric(e.to_string()),
            AttackError::Diffusion(d) => d.into(),
            AttackError::Numerics(n) => n.into(),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Io(io) => io.into(),
            EvalError::InvalidFprLevel(_) => CliError::Config(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<ChallengeError> for CliError {
    fn from(e: ChallengeError) -> Self {
        match e {
            ChallengeError::InvalidSpec(_) => CliError::Config(e.to_string()),
            ChallengeError::MissingArtifact(p) => {
                CliError::MissingFile(format!("missing artifact: {}", p.display()))
            }
            ChallengeError::Io(io) => io.into(),
            ChallengeError::Json(j) => j.into(),
            ChallengeError::Tabular(t) => t.into(),
            ChallengeError::Diffusion(d) => d.into(),
            ChallengeError::Attack(a) => a.into(),
            ChallengeError::Eval(ev) => ev.into(),
            ChallengeError::Numerics(n) => n.into(),
            ChallengeError::Model { model_id, source } => {
                let inner: CliError = (*source).into();
                match inner {
                    CliError::Config(m) => CliError::Config(format!("model {model_id}: {m}")),
                    CliError::MissingFile(m) => {
                        CliError::MissingFile(format!("model {model_id}: {m}"))
                    }
                    CliError::Data(m) => CliError::Data(format!("model {model_id}: {m}")),
                    CliError::Numeric(m) => CliError::Numeric(format!("model {model_id}: {m}")),
                    CliError::Internal(m) => CliError::Internal(format!("model {model_id}: {m}")),
                }
            }
            other => CliError::Data(other.to_string()),
        }
    }
}
