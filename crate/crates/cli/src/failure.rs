use std::fmt;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DIVERGENCE: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_VERIFICATION: i32 = 4;

/// An error carrying the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

pub fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

pub fn divergence(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_DIVERGENCE, message: message.into() }
}

pub fn solver(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_SOLVER, message: message.into() }
}

pub fn verification(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_VERIFICATION, message: message.into() }
}

/// Exit code for any error: the attached [`Failure`] code, or usage.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    err.downcast_ref::<Failure>().map_or(EXIT_USAGE, |f| f.code)
}
