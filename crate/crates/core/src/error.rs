use thiserror::Error;

/// A value that violates a type invariant. `field` uses the serialized
/// field name so callers can point users at the offending input.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("{field}: {value} is out of range, expected {expected}")]
    OutOfRange { field: &'static str, value: f64, expected: &'static str },
    #[error("{field}: {reason}")]
    Invalid { field: &'static str, reason: &'static str },
}

impl ValidationError {
    pub fn field(&self) -> &'static str {
        match self {
            ValidationError::OutOfRange { field, .. } | ValidationError::Invalid { field, .. } => field,
        }
    }
}
