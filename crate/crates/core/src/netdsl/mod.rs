//! Plain-text network descriptions (`.slh` files).
//!
//! ```text
//! # beam splitter with a cavity in the loop
//! component bs {
//!     inputs = 2;
//!     S = [[0.6, 0.8], [0.8, -0.6]];
//! }
//! component cav {
//!     oscillators = 1;
//!     S = [[-1]];
//!     C = [[1.4142135623730951]];
//!     Omega = 0;
//! }
//! connect bs.out[1] -> cav.in[0];
//! connect cav.out[0] -> bs.in[1];
//! external bs.in[0], bs.out[0];
//! ```
//!
//! Channels are numbered by component in declaration order, then by port.
//! A scalar given for a matrix field means that multiple of the identity
//! (only zero is allowed for non-square fields).

mod compile;
mod lexer;
mod parser;
mod printer;

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

pub use compile::{compile, ChannelRef, CompiledNetwork};
pub use parser::parse;
pub use printer::print;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParseDiagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub severity: Severity,
}

impl ParseDiagnostic {
    pub fn error(pos: Span, message: impl Into<String>) -> Self {
        Self {
            line: pos.line,
            column: pos.column,
            message: message.into(),
            severity: Severity::Error,
        }
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {sev}: {}", self.line, self.column, self.message)
    }
}

/// One or more diagnostics, at least one of them an error.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostics(pub Vec<ParseDiagnostic>);

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for Diagnostics {}

/// Source position (1-based). Positions never take part in equality, so a
/// reprinted and reparsed spec compares equal to the original.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Span {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Key {
    #[serde(rename = "dim")]
    Dim,
    #[serde(rename = "oscillators")]
    Oscillators,
    #[serde(rename = "inputs")]
    Inputs,
    S,
    L,
    H,
    C,
    G,
    A,
    Z,
    X,
    R,
    Omega,
    Gamma,
    Theta,
}

impl Key {
    pub const ALL: [Key; 15] = [
        Key::Dim,
        Key::Oscillators,
        Key::Inputs,
        Key::S,
        Key::L,
        Key::H,
        Key::C,
        Key::G,
        Key::A,
        Key::Z,
        Key::X,
        Key::R,
        Key::Omega,
        Key::Gamma,
        Key::Theta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Key::Dim => "dim",
            Key::Oscillators => "oscillators",
            Key::Inputs => "inputs",
            Key::S => "S",
            Key::L => "L",
            Key::H => "H",
            Key::C => "C",
            Key::G => "G",
            Key::A => "A",
            Key::Z => "Z",
            Key::X => "X",
            Key::R => "R",
            Key::Omega => "Omega",
            Key::Gamma => "Gamma",
            Key::Theta => "Theta",
        }
    }

    pub fn from_name(s: &str) -> Option<Key> {
        Key::ALL.iter().copied().find(|k| k.name() == s)
    }

    pub fn is_integer(self) -> bool {
        matches!(self, Key::Dim | Key::Oscillators | Key::Inputs)
    }
}

/// Which parameterization a component uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockSet {
    /// `(S, L, H)`.
    Plain,
    /// `(S, C, G, A, Z, X, R)`.
    Numeric,
    /// `(S, C, G, Omega, Gamma, Theta)`.
    Hamiltonian,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Number(f64),
    Matrix(#[serde(serialize_with = "ser_rows")] Vec<Vec<Complex64>>),
}

fn ser_rows<S: serde::Serializer>(rows: &[Vec<Complex64>], s: S) -> Result<S::Ok, S::Error> {
    let v: Vec<Vec<[f64; 2]>> = rows.iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect();
    v.serialize(s)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Field {
    pub value: Value,
    #[serde(skip)]
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComponentDecl {
    pub name: String,
    pub fields: BTreeMap<Key, Field>,
    #[serde(skip)]
    pub span: Span,
}

impl ComponentDecl {
    pub fn get(&self, key: Key) -> Option<&Value> {
        self.fields.get(&key).map(|f| &f.value)
    }

    fn integer(&self, key: Key, default: usize) -> usize {
        match self.get(key) {
            Some(Value::Number(x)) => *x as usize,
            _ => default,
        }
    }

    pub fn dim(&self) -> usize {
        self.integer(Key::Dim, 1)
    }

    pub fn oscillators(&self) -> usize {
        self.integer(Key::Oscillators, 0)
    }

    /// Declared `inputs`, else inferred from the row count of S, L, C or G.
    pub fn channels(&self) -> usize {
        if let Some(Value::Number(x)) = self.get(Key::Inputs) {
            return *x as usize;
        }
        let d = self.dim().max(1);
        for key in [Key::S, Key::L, Key::C, Key::G] {
            if let Some(Value::Matrix(rows)) = self.get(key) {
                return rows.len() / d;
            }
        }
        1
    }

    pub fn block_set(&self) -> BlockSet {
        let has = |ks: &[Key]| ks.iter().any(|k| self.fields.contains_key(k));
        if has(&[Key::A, Key::Z, Key::X, Key::R]) {
            BlockSet::Numeric
        } else if has(&[Key::C, Key::G, Key::Omega, Key::Gamma, Key::Theta]) || self.oscillators() > 0 {
            BlockSet::Hamiltonian
        } else {
            BlockSet::Plain
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    In,
    Out,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PortRef {
    pub component: String,
    pub direction: Direction,
    pub index: usize,
    #[serde(skip)]
    pub span: Span,
}

impl fmt::Display for PortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dir = match self.direction {
            Direction::In => "in",
            Direction::Out => "out",
        };
        write!(f, "{}.{dir}[{}]", self.component, self.index)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Connection {
    pub from: PortRef,
    pub to: PortRef,
    #[serde(skip)]
    pub span: Span,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct NetworkSpec {
    pub components: Vec<ComponentDecl>,
    pub connections: Vec<Connection>,
    pub externals: Vec<PortRef>,
}

impl NetworkSpec {
    pub fn component(&self, name: &str) -> Option<&ComponentDecl> {
        self.components.iter().find(|c| c.name == name)
    }
}
