use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// A configuration field that failed validation.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub field: &'static str,
    pub message: String,
}

impl core::fmt::Display for FieldError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(&'static str),

    #[error("invalid behaviour parameters: {0}")]
    InvalidBehavior(&'static str),

    #[error("invalid configuration: {}", join(.0))]
    Config(Vec<FieldError>),

    #[error("bank {bank} already defaulted at step {step}")]
    AlreadyDefaulted { bank: usize, step: u64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("bank index {index} out of range for {n_banks} banks")]
    IndexOutOfRange { index: usize, n_banks: usize },

    #[error("invariant violated at step {step}: {message}")]
    Invariant { step: u64, message: String },

    #[error("ledger violation at step {step}, bank {bank}: {message}")]
    Ledger {
        step: u64,
        bank: usize,
        message: String,
    },
}

fn join(errors: &[FieldError]) -> String {
    use core::fmt::Write;
    let mut out = String::new();
    for (i, e) in errors.iter().enumerate() {
        if i > 0 {
            out.push_str("; ");
        }
        let _ = write!(out, "{e}");
    }
    out
}
