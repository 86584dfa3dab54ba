//! Concrete syntax: lexer, parser, AST, elaboration, and pretty-printer.

mod ast;
mod elaborate;
mod lexer;
mod parser;
mod pretty;

pub use ast::{Action, CompOp, Cond, CondArg, Def, ProcessTerm, Program, VarType};
pub use elaborate::elaborate;
pub use lexer::{lex, Tok, Token};
pub use parser::{parse_process, parse_program};
pub use pretty::{pretty, pretty_action, pretty_cond};
