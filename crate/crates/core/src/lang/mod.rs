//! The model description language: lexer, parser, syntax tree and printer.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod span;

pub use ast::ModelProgram;
pub use lexer::{tokenize, LexError, Token, TokenKind};
pub use parser::{parse, parse_source, ParseError, SyntaxError};
pub use pretty::pretty_print;
pub use span::Span;
