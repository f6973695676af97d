use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::model::NodeId;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Errors surfaced by the solver core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A routing or set-connectivity request was evaluated without a graph.
    MissingGraph,
    /// No path exists between the requested endpoints.
    NoPath { source: NodeId, target: NodeId },
    /// Set-connectivity terminals cannot be connected in the graph.
    DisconnectedTerminals,
    /// The set-connectivity oracle only supports undirected graphs; directed
    /// instances must encode their action sets explicitly.
    DirectedSteinerUnsupported,
    /// An oracle kind was forced that cannot serve a request of this shape.
    OracleKindMismatch {
        forced: &'static str,
        request: &'static str,
    },
    /// An action is infeasible for the type it was assigned to.
    InfeasibleAction { agent: usize, type_index: usize },
    /// An enumeration would exceed the configured cap; the caller must either
    /// raise the cap or shrink the instance. Never silently sampled.
    CapExceeded {
        what: &'static str,
        required: u128,
        cap: u64,
    },
    /// Instance validation failed; lists every violation found.
    InvalidInstance(Vec<String>),
    /// Argument outside the mathematical domain of the operation.
    Domain(&'static str),
    /// A condition the analysis guarantees was violated at runtime.
    InternalInvariant(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::MissingGraph => write!(f, "request requires a graph but the instance has none"),
            Error::NoPath { source, target } => {
                write!(f, "no path from node {source} to node {target}")
            }
            Error::DisconnectedTerminals => {
                write!(f, "terminals are not connected in the graph")
            }
            Error::DirectedSteinerUnsupported => {
                write!(
                    f,
                    "set-connectivity oracle is undirected-only; use explicit actions for directed graphs"
                )
            }
            Error::OracleKindMismatch { forced, request } => {
                write!(f, "oracle `{forced}` cannot serve a `{request}` request")
            }
            Error::InfeasibleAction { agent, type_index } => {
                write!(f, "infeasible action for agent {agent}, type {type_index}")
            }
            Error::CapExceeded {
                what,
                required,
                cap,
            } => {
                write!(f, "{what} needs {required} candidates, cap is {cap}")
            }
            Error::InvalidInstance(violations) => {
                write!(f, "invalid instance ({} violations):", violations.len())?;
                for v in violations {
                    write!(f, "\n  - {v}")?;
                }
                Ok(())
            }
            Error::Domain(what) => write!(f, "domain error: {what}"),
            Error::InternalInvariant(what) => write!(f, "internal invariant violated: {what}"),
        }
    }
}

impl core::error::Error for Error {}
