use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

use crate::model::UserClass;
use crate::trace::ConvexityReport;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A configuration field violates its constraint.
    InvalidConfig {
        field: &'static str,
        reason: &'static str,
    },
    /// A numeric argument lies outside the domain of the operation.
    Domain(&'static str),
    /// Structurally unusable input (empty deployment, bad grid, ...).
    InvalidInput(&'static str),
    UnknownStation(usize),
    UnknownUser(usize),
    /// No user of this class appeared in any trial.
    NoUsersInClass(UserClass),
    /// The requirement of this class cannot be met even at the upper
    /// bandwidth bound.
    Unsatisfiable(UserClass),
    /// Trace samples of a user are not strictly increasing in time.
    Ordering { user_id: String },
    /// Velocity requested between samples of two different users.
    UserMismatch,
    InvalidSample(&'static str),
    InsufficientData(String),
    /// The mean walking volume is zero; the report carries the volumes
    /// with the convexity left undefined.
    ConvexityUndefined(Box<ConvexityReport>),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidConfig { field, reason } => {
                write!(f, "invalid config: `{field}` {reason}")
            }
            Error::Domain(what) => write!(f, "domain error: {what}"),
            Error::InvalidInput(what) => write!(f, "invalid input: {what}"),
            Error::UnknownStation(id) => write!(f, "unknown station id {id}"),
            Error::UnknownUser(idx) => write!(f, "unknown user index {idx}"),
            Error::NoUsersInClass(class) => {
                write!(f, "no {} users in any trial, coverage undefined", class.name())
            }
            Error::Unsatisfiable(class) => write!(
                f,
                "requirement unsatisfiable at the upper bandwidth bound ({} class fails)",
                class.name()
            ),
            Error::Ordering { user_id } => {
                write!(f, "samples of user `{user_id}` are not strictly increasing in time")
            }
            Error::UserMismatch => f.write_str("samples belong to different users"),
            Error::InvalidSample(what) => write!(f, "invalid sample: {what}"),
            Error::InsufficientData(what) => write!(f, "insufficient data: {what}"),
            Error::ConvexityUndefined(_) => {
                f.write_str("user convexity undefined: mean walking volume is zero")
            }
        }
    }
}

impl core::error::Error for Error {}
