//! Recursive-descent parser.
//!
//! ```text
//! program ::= { decl | stmt }
//! decl    ::= "dataset" IDENT "obs" INT
//!           | "axis" IDENT "size" INT
//!           | "map" IDENT ":" IDENT "->" IDENT "in" IDENT source
//!           | "idx" IDENT ":" IDENT "in" IDENT source
//!           | "vec" IDENT ":" IDENT [ source ]
//! source  ::= "=" "[" num { "," num } "]" | "from" STRING
//! stmt    ::= "let" IDENT [ ":" typeann ] "=" expr
//!           | "check" expr ":" typeann
//!           | "observe" IDENT "~" "normal" "(" expr "," expr ")"
//! typeann ::= "Vec" "[" IDENT "]" | "Idx" "[" IDENT "," IDENT "]"
//!           | "Obs" "[" IDENT "]" | "Scalar"
//! expr    ::= term { ("+" | "*") term }     (* binds tighter, both left-assoc *)
//! term    ::= NUMBER | IDENT | "(" expr ")"
//!           | "gather" "(" expr "," expr ")"
//!           | "lift" "(" expr "," IDENT ")"
//!           | "reindex" "(" expr "," expr ")"
//! ```
//!
//! After an error the parser skips to the next keyword that can start a
//! declaration or statement, so one pass reports every broken item.

use std::fmt;

use thiserror::Error;

use super::ast::*;
use super::lexer::{tokenize, LexError, Token, TokenKind};
use super::span::Span;

#[derive(Debug, Clone, PartialEq, Error)]
pub struct ParseError {
    pub expected: Vec<String>,
    pub found: String,
    pub span: Span,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.expected.as_slice() {
            [] => write!(f, "unexpected {}", self.found),
            [one] => write!(f, "expected {one}, found {}", self.found),
            many => write!(
                f,
                "expected one of {}, found {}",
                many.join(", "),
                self.found
            ),
        }
    }
}

/// Anything that stops a source file from producing a [`ModelProgram`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SyntaxError {
    #[error("{0}")]
    Lex(#[from] LexError),
    #[error("{0}")]
    Parse(#[from] ParseError),
}

impl SyntaxError {
    pub fn span(&self) -> Span {
        match self {
            SyntaxError::Lex(e) => e.span,
            SyntaxError::Parse(e) => e.span,
        }
    }
}

/// Tokenizes and parses `src`.
pub fn parse_source(src: &str) -> Result<ModelProgram, Vec<SyntaxError>> {
    let tokens = tokenize(src).map_err(|e| vec![SyntaxError::Lex(e)])?;
    parse(&tokens).map_err(|errs| errs.into_iter().map(SyntaxError::Parse).collect())
}

/// Parses a token stream that ends in [`TokenKind::Eof`].
pub fn parse(tokens: &[Token]) -> Result<ModelProgram, Vec<ParseError>> {
    let mut p = Parser {
        tokens,
        pos: 0,
        errors: Vec::new(),
    };
    let program = p.program();
    if p.errors.is_empty() {
        Ok(program)
    } else {
        Err(p.errors)
    }
}

type PResult<T> = Result<T, ParseError>;

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
    errors: Vec<ParseError>,
}

fn starts_item(kind: &TokenKind) -> bool {
    use TokenKind::*;
    matches!(
        kind,
        KwDataset | KwAxis | KwMap | KwIdx | KwVec | KwLet | KwCheck | KwObserve | Eof
    )
}

impl<'t> Parser<'t> {
    fn peek(&self) -> &'t Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn advance(&mut self) -> &'t Token {
        let t = self.peek();
        if t.kind != TokenKind::Eof {
            self.pos += 1;
        }
        t
    }

    fn prev_span(&self) -> Span {
        self.tokens[self.pos.saturating_sub(1)].span
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let t = self.peek();
        ParseError {
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: t.kind.describe(),
            span: t.span,
        }
    }

    fn expect(&mut self, kind: TokenKind) -> PResult<&'t Token> {
        if self.peek().kind == kind {
            Ok(self.advance())
        } else {
            Err(self.error(&[&kind.describe()]))
        }
    }

    fn eat(&mut self, kind: TokenKind) -> bool {
        if self.peek().kind == kind {
            self.advance();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> PResult<Ident> {
        match &self.peek().kind {
            TokenKind::Ident(name) => {
                let name = name.clone();
                let span = self.advance().span;
                Ok(Ident { name, span })
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn count(&mut self) -> PResult<Count> {
        match self.peek().kind {
            TokenKind::Int(v) if v >= 0 => {
                let span = self.advance().span;
                Ok(Count {
                    value: v as u64,
                    span,
                })
            }
            _ => Err(self.error(&["non-negative integer"])),
        }
    }

    fn program(&mut self) -> ModelProgram {
        let mut items = Vec::new();
        while self.peek().kind != TokenKind::Eof {
            let start = self.pos;
            match self.item() {
                Ok(item) => items.push(item),
                Err(e) => {
                    self.errors.push(e);
                    if self.pos == start {
                        self.advance();
                    }
                    while !starts_item(&self.peek().kind) {
                        self.advance();
                    }
                }
            }
        }
        ModelProgram { items }
    }

    fn item(&mut self) -> PResult<Item> {
        let start = self.peek().span;
        use TokenKind::*;
        let item = match self.peek().kind {
            KwDataset | KwAxis | KwMap | KwIdx | KwVec => {
                let kind = self.decl()?;
                Item::Decl(Decl {
                    kind,
                    span: start.to(self.prev_span()),
                })
            }
            KwLet | KwCheck | KwObserve => {
                let kind = self.stmt()?;
                Item::Stmt(Stmt {
                    kind,
                    span: start.to(self.prev_span()),
                })
            }
            _ => {
                return Err(self.error(&[
                    "`dataset`",
                    "`axis`",
                    "`map`",
                    "`idx`",
                    "`vec`",
                    "`let`",
                    "`check`",
                    "`observe`",
                ]))
            }
        };
        Ok(item)
    }

    fn decl(&mut self) -> PResult<DeclKind> {
        use TokenKind::*;
        let kw = self.advance().kind.clone();
        Ok(match kw {
            KwDataset => {
                let name = self.ident()?;
                self.expect(KwObs)?;
                DeclKind::Dataset {
                    name,
                    obs_count: self.count()?,
                }
            }
            KwAxis => {
                let name = self.ident()?;
                self.expect(KwSize)?;
                DeclKind::Axis {
                    name,
                    size: self.count()?,
                }
            }
            KwMap => {
                let name = self.ident()?;
                self.expect(Colon)?;
                let parent = self.ident()?;
                self.expect(Arrow)?;
                let child = self.ident()?;
                self.expect(KwIn)?;
                let dataset = self.ident()?;
                DeclKind::Map {
                    name,
                    parent,
                    child,
                    dataset,
                    source: self.source()?,
                }
            }
            KwIdx => {
                let name = self.ident()?;
                self.expect(Colon)?;
                let axis = self.ident()?;
                self.expect(KwIn)?;
                let dataset = self.ident()?;
                DeclKind::Idx {
                    name,
                    axis,
                    dataset,
                    source: self.source()?,
                }
            }
            KwVec => {
                let name = self.ident()?;
                self.expect(Colon)?;
                let axis = self.ident()?;
                let source = match self.peek().kind {
                    Eq | KwFrom => Some(self.source()?),
                    _ => None,
                };
                DeclKind::Vec { name, axis, source }
            }
            _ => unreachable!("decl() called on a non-declaration keyword"),
        })
    }

    fn source(&mut self) -> PResult<Source> {
        let start = self.peek().span;
        match self.peek().kind {
            TokenKind::Eq => {
                self.advance();
                self.expect(TokenKind::LBracket)?;
                let mut values = vec![self.number()?];
                while self.eat(TokenKind::Comma) {
                    values.push(self.number()?);
                }
                self.expect(TokenKind::RBracket)?;
                Ok(Source::Inline {
                    values,
                    span: start.to(self.prev_span()),
                })
            }
            TokenKind::KwFrom => {
                self.advance();
                match &self.peek().kind {
                    TokenKind::Str(path) => {
                        let path = path.clone();
                        self.advance();
                        Ok(Source::File {
                            path,
                            span: start.to(self.prev_span()),
                        })
                    }
                    _ => Err(self.error(&["string"])),
                }
            }
            _ => Err(self.error(&["`=`", "`from`"])),
        }
    }

    fn number(&mut self) -> PResult<Number> {
        match self.peek().kind {
            TokenKind::Int(v) => {
                self.advance();
                Ok(Number::Int(v))
            }
            TokenKind::Real(v) => {
                self.advance();
                Ok(Number::Real(v))
            }
            _ => Err(self.error(&["number"])),
        }
    }

    fn stmt(&mut self) -> PResult<StmtKind> {
        use TokenKind::*;
        let kw = self.advance().kind.clone();
        Ok(match kw {
            KwLet => {
                let name = self.ident()?;
                let ann = if self.eat(Colon) {
                    Some(self.type_ann()?)
                } else {
                    None
                };
                self.expect(Eq)?;
                StmtKind::Let {
                    name,
                    ann,
                    value: self.expr()?,
                }
            }
            KwCheck => {
                let expr = self.expr()?;
                self.expect(Colon)?;
                StmtKind::Check {
                    expr,
                    ann: self.type_ann()?,
                }
            }
            KwObserve => {
                let data = self.ident()?;
                self.expect(Tilde)?;
                self.expect(KwNormal)?;
                self.expect(LParen)?;
                let mean = self.expr()?;
                self.expect(Comma)?;
                let sigma = self.expr()?;
                self.expect(RParen)?;
                StmtKind::Observe { data, mean, sigma }
            }
            _ => unreachable!("stmt() called on a non-statement keyword"),
        })
    }

    fn type_ann(&mut self) -> PResult<TypeAnn> {
        use TokenKind::*;
        let start = self.peek().span;
        let kind = match self.peek().kind {
            TyVec => {
                self.advance();
                self.expect(LBracket)?;
                let axis = self.ident()?;
                self.expect(RBracket)?;
                TypeAnnKind::Vec(axis)
            }
            TyIdx => {
                self.advance();
                self.expect(LBracket)?;
                let axis = self.ident()?;
                self.expect(Comma)?;
                let dataset = self.ident()?;
                self.expect(RBracket)?;
                TypeAnnKind::Idx(axis, dataset)
            }
            TyObs => {
                self.advance();
                self.expect(LBracket)?;
                let dataset = self.ident()?;
                self.expect(RBracket)?;
                TypeAnnKind::Obs(dataset)
            }
            TyScalar => {
                self.advance();
                TypeAnnKind::Scalar
            }
            _ => return Err(self.error(&["`Vec`", "`Idx`", "`Obs`", "`Scalar`"])),
        };
        Ok(TypeAnn {
            kind,
            span: start.to(self.prev_span()),
        })
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.product()?;
        while self.eat(TokenKind::Plus) {
            let rhs = self.product()?;
            lhs = binop(BinOp::Add, lhs, rhs);
        }
        Ok(lhs)
    }

    fn product(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        while self.eat(TokenKind::Star) {
            let rhs = self.term()?;
            lhs = binop(BinOp::Mul, lhs, rhs);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> PResult<Expr> {
        use TokenKind::*;
        let start = self.peek().span;
        let kind = match &self.peek().kind {
            Int(v) => {
                let v = *v as f64;
                self.advance();
                ExprKind::Number(v)
            }
            Real(v) => {
                let v = *v;
                self.advance();
                ExprKind::Number(v)
            }
            Ident(name) => {
                let name = name.clone();
                self.advance();
                ExprKind::Name(name)
            }
            LParen => {
                self.advance();
                let inner = self.expr()?;
                self.expect(RParen)?;
                return Ok(inner);
            }
            KwGather | KwReindex => {
                let is_gather = self.peek().kind == KwGather;
                self.advance();
                self.expect(LParen)?;
                let a = self.expr()?;
                self.expect(Comma)?;
                let b = self.expr()?;
                self.expect(RParen)?;
                if is_gather {
                    ExprKind::Gather(Box::new(a), Box::new(b))
                } else {
                    ExprKind::Reindex(Box::new(a), Box::new(b))
                }
            }
            KwLift => {
                self.advance();
                self.expect(LParen)?;
                let a = self.expr()?;
                self.expect(Comma)?;
                let target = self.ident()?;
                self.expect(RParen)?;
                ExprKind::Lift(Box::new(a), target)
            }
            _ => {
                return Err(self.error(&[
                    "number",
                    "identifier",
                    "`(`",
                    "`gather`",
                    "`lift`",
                    "`reindex`",
                ]))
            }
        };
        Ok(Expr {
            kind,
            span: start.to(self.prev_span()),
        })
    }
}

fn binop(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
    let span = lhs.span.to(rhs.span);
    Expr {
        kind: ExprKind::BinOp(op, Box::new(lhs), Box::new(rhs)),
        span,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_ok(src: &str) -> ModelProgram {
        parse_source(src).unwrap_or_else(|e| panic!("{src:?}: {e:?}"))
    }

    #[test]
    fn let_gather() {
        let p = parse_ok("let mu = gather(a, county_idx)");
        let Item::Stmt(Stmt {
            kind: StmtKind::Let { name, ann, value },
            ..
        }) = &p.items[0]
        else {
            panic!("expected let");
        };
        assert_eq!(name.name, "mu");
        assert!(ann.is_none());
        let ExprKind::Gather(a, b) = &value.kind else {
            panic!("expected gather");
        };
        assert_eq!(a.kind, ExprKind::Name("a".into()));
        assert_eq!(b.kind, ExprKind::Name("county_idx".into()));
    }

    #[test]
    fn truncated_let_wants_identifier() {
        let errs = parse_source("let = gather(").unwrap_err();
        let SyntaxError::Parse(e) = &errs[0] else {
            panic!("expected parse error");
        };
        assert_eq!(e.expected, vec!["identifier".to_string()]);
        assert_eq!(e.found, "`=`");
        assert_eq!((e.span.line, e.span.col), (1, 5));
    }

    #[test]
    fn precedence_and_associativity() {
        let p = parse_ok("let m = a + b * x + c");
        let Item::Stmt(Stmt {
            kind: StmtKind::Let { value, .. },
            ..
        }) = &p.items[0]
        else {
            panic!()
        };
        // ((a + (b * x)) + c)
        let ExprKind::BinOp(BinOp::Add, lhs, rhs) = &value.kind else {
            panic!()
        };
        assert_eq!(rhs.kind, ExprKind::Name("c".into()));
        let ExprKind::BinOp(BinOp::Add, _, inner) = &lhs.kind else {
            panic!()
        };
        assert!(matches!(inner.kind, ExprKind::BinOp(BinOp::Mul, _, _)));
        assert_eq!(value.span.len, "a + b * x + c".len());
    }

    #[test]
    fn declarations() {
        let p = parse_ok(
            r#"
            dataset Data obs 5
            axis State size 2
            map soc : State -> County in Data = [0, 0, 1]
            idx county_idx : County in Data from "county_idx.csv"
            vec a : County
            vec x : Data = [0.0, 1, 1.5, -2, 3e2]
            "#,
        );
        let kinds: Vec<_> = p.decls().map(|d| d.kind.keyword()).collect();
        assert_eq!(kinds, ["dataset", "axis", "map", "idx", "vec", "vec"]);
    }

    #[test]
    fn statements() {
        let p = parse_ok(
            "check reindex(soc, county_idx) : Idx[State, Data]\n\
             observe y ~ normal(mu, 0.8)\n\
             let g : Vec[County] = lift(gamma_0, County)\n\
             let s : Scalar = 2 * 3",
        );
        assert_eq!(p.stmts().count(), 4);
    }

    #[test]
    fn recovers_at_item_boundaries() {
        let src =
            "let = 1\naxis A size 3\nmap m : A B in D = [0]\nlet ok = 1\nobserve y normal(a, 1)";
        let errs = parse_source(src).unwrap_err();
        assert_eq!(errs.len(), 3);
        let lines: Vec<u32> = errs.iter().map(|e| e.span().line).collect();
        assert_eq!(lines, [1, 3, 5]);
    }

    #[test]
    fn negative_count_rejected() {
        assert!(parse_source("axis A size -1").is_err());
    }

    #[test]
    fn missing_source_on_map() {
        let errs = parse_source("map m : A -> B in D").unwrap_err();
        let SyntaxError::Parse(e) = &errs[0] else {
            panic!()
        };
        assert_eq!(e.expected, ["`=`", "`from`"]);
        assert_eq!(e.found, "end of file");
    }
}
