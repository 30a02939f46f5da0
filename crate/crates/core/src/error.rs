use std::fmt;

use thiserror::Error;

/// Which part of a game a validation finding refers to.
///
/// Indices are stored 0-based and rendered 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subject {
    Game,
    Player(usize),
    Resource(usize),
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Game => write!(f, "game"),
            Subject::Player(i) => write!(f, "player {}", i + 1),
            Subject::Resource(r) => write!(f, "resource {}", r + 1),
        }
    }
}

/// A single broken invariant found by game validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub subject: Subject,
    pub message: String,
}

impl Violation {
    pub fn new(subject: Subject, message: impl Into<String>) -> Self {
        Self {
            subject,
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.subject, self.message)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid game: {}", join(.0))]
    InvalidGame(Vec<Violation>),

    #[error("invalid profile for player {}: {reason}", .player + 1)]
    InvalidProfile { player: usize, reason: String },

    #[error("profile has {got} strategies, game has {expected} players")]
    ProfileLength { expected: usize, got: usize },

    #[error("player index {} out of range (n = {n})", .player + 1)]
    PlayerOutOfRange { player: usize, n: usize },

    #[error("load {load} out of range 1..={n}")]
    LoadOutOfRange { load: usize, n: usize },

    #[error("destination unreachable for player {}", .player + 1)]
    Unreachable { player: usize },

    #[error("more than {cap} simple paths; instance is unsuitable for the enumeration oracle")]
    PathExplosion { cap: usize },

    #[error("{count} profiles exceed the enumeration budget of {budget}")]
    BudgetExceeded { count: f64, budget: usize },

    #[error("degenerate instance: {0}")]
    Degenerate(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

fn join(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
