//! The `.potx` declaration language: parser and canonical serializer.
//!
//! Grammar (whitespace-insensitive except inside quoted labels, `#` starts a
//! line comment, keywords are lowercase, identifiers are case-sensitive):
//!
//! ```text
//! document  := "system" ident "{" item* "}"
//! item      := measure | state | model | observer | cpt | target | expect
//! measure   := "measure" ident label?
//! state     := "state" ident ("physical" | "nonphysical")
//!              ("domain" "{" ident ("," ident)+ "}")? label?
//! model     := "model" ident "{" "in:" idlist ";" "out:" idlist
//!              (";" "goal")? (";" "alt-of:" ident)? "}"
//! observer  := "observer" ident "level" int0to5 ("experimentable")?
//!              "{" ("covers:" idlist ";")? ("embeds:" idlist ";")? "}"
//! cpt       := "cpt" ident "{" row+ "}"
//! row       := "row" "(" (ident ("," ident)*)? ")" "->"
//!              "{" ident ":" number ("," ident ":" number)* "}"
//! target    := "target" "transparent" "{" idlist "}"
//! expect    := "expect" "{" assertion+ "}"
//! assertion := "model" ident "is" ("intro" | "extero" | "bridge")
//!            | "observer" ident ("ok" | "violates" ident)
//!            | "gap" ident "level" int0to5
//! idlist    := ident ("," ident)*
//! label     := '"' chars '"'
//! ```
//!
//! A `cpt` block names a model, or a root state to give it a prior (rows
//! with an empty parent tuple). Row probabilities must sum to 1 within 1e-9;
//! that is checked at parse time.
//!
//! [`serialize`] emits the canonical form: one statement per line, two-space
//! indentation, blocks ordered measures, states, models, observers, cpts,
//! targets, expects, entries alphabetical by id. Parsing the canonical form
//! yields a document equal to the original (`Document` equality is
//! order-insensitive), and serialization is a fixed point.

mod ast;
mod lex;
mod parse;
mod print;

pub use ast::{
    Assertion, CptDecl, Document, ExpectDecl, MeasureDecl, ModelClassName, ModelDecl,
    ObserverDecl, RowDecl, StateDecl, TargetDecl,
};
pub use parse::{parse, ROW_SUM_TOLERANCE};
pub use print::{assertion_text, serialize};

use std::fmt;
use thiserror::Error;

/// Position of a token in the source text, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

/// Syntax error with the span of the offending token.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
    /// What the parser would have accepted, when that is a short set.
    pub expected: Option<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.span.line, self.span.column, self.message)?;
        if let Some(expected) = &self.expected {
            write!(f, " (expected {expected})")?;
        }
        Ok(())
    }
}
