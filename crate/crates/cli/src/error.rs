use serde::Serialize;

#[derive(Debug)]
pub enum CliError {
    Core(vskf_core::Error),
    Usage(String),
}

impl From<vskf_core::Error> for CliError {
    fn from(e: vskf_core::Error) -> Self {
        CliError::Core(e)
    }
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    code: &'a str,
    message: String,
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.code(),
            CliError::Usage(_) => "E_USAGE",
        }
    }

    /// 1 for numerical failures, 2 for usage and I/O problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 1,
            _ => 2,
        }
    }

    pub fn to_json(&self) -> String {
        let message = match self {
            CliError::Core(e) => e.to_string(),
            CliError::Usage(m) => m.clone(),
        };
        serde_json::to_string(&ErrorReport {
            code: self.code(),
            message,
        })
        .expect("error report serializes")
    }
}
