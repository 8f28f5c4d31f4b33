use std::fmt;

use thiserror::Error;

use super::span::Span;

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    // declarations
    KwDataset,
    KwObs,
    KwAxis,
    KwSize,
    KwMap,
    KwIn,
    KwIdx,
    KwVec,
    KwFrom,
    // statements
    KwLet,
    KwCheck,
    KwObserve,
    KwNormal,
    // operations
    KwGather,
    KwLift,
    KwReindex,
    // type constructors
    TyVec,
    TyIdx,
    TyObs,
    TyScalar,

    Colon,
    Arrow,
    Eq,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Comma,
    Tilde,
    Plus,
    Star,

    Int(i64),
    Real(f64),
    Str(String),
    Ident(String),
    Eof,
}

impl TokenKind {
    fn keyword(word: &str) -> Option<TokenKind> {
        use TokenKind::*;
        Some(match word {
            "dataset" => KwDataset,
            "obs" => KwObs,
            "axis" => KwAxis,
            "size" => KwSize,
            "map" => KwMap,
            "in" => KwIn,
            "idx" => KwIdx,
            "vec" => KwVec,
            "from" => KwFrom,
            "let" => KwLet,
            "check" => KwCheck,
            "observe" => KwObserve,
            "normal" => KwNormal,
            "gather" => KwGather,
            "lift" => KwLift,
            "reindex" => KwReindex,
            "Vec" => TyVec,
            "Idx" => TyIdx,
            "Obs" => TyObs,
            "Scalar" => TyScalar,
            _ => return None,
        })
    }

    /// Short description used in "expected ..." messages.
    pub fn describe(&self) -> String {
        use TokenKind::*;
        let fixed = match self {
            KwDataset => "dataset",
            KwObs => "obs",
            KwAxis => "axis",
            KwSize => "size",
            KwMap => "map",
            KwIn => "in",
            KwIdx => "idx",
            KwVec => "vec",
            KwFrom => "from",
            KwLet => "let",
            KwCheck => "check",
            KwObserve => "observe",
            KwNormal => "normal",
            KwGather => "gather",
            KwLift => "lift",
            KwReindex => "reindex",
            TyVec => "Vec",
            TyIdx => "Idx",
            TyObs => "Obs",
            TyScalar => "Scalar",
            Colon => ":",
            Arrow => "->",
            Eq => "=",
            LBracket => "[",
            RBracket => "]",
            LParen => "(",
            RParen => ")",
            Comma => ",",
            Tilde => "~",
            Plus => "+",
            Star => "*",
            Int(v) => return format!("integer `{v}`"),
            Real(v) => return format!("number `{v:?}`"),
            Str(s) => return format!("string {s:?}"),
            Ident(s) => return format!("identifier `{s}`"),
            Eof => return "end of file".to_string(),
        };
        format!("`{fixed}`")
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message}")]
pub struct LexError {
    pub message: String,
    pub span: Span,
}

struct Cursor<'a> {
    src: &'a str,
    offset: usize,
    line: u32,
    col: u32,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.offset..].chars().next()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.src[self.offset..].chars();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.offset += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn mark(&self) -> Span {
        Span {
            offset: self.offset,
            len: 0,
            line: self.line,
            col: self.col,
        }
    }

    fn close(&self, start: Span) -> Span {
        Span {
            len: self.offset - start.offset,
            ..start
        }
    }

    fn eat_while(&mut self, f: impl Fn(char) -> bool) {
        while self.peek().is_some_and(&f) {
            self.bump();
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Splits `src` into tokens, ending with a single [`TokenKind::Eof`].
/// Whitespace and `#` comments are dropped.
pub fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    let mut cur = Cursor {
        src,
        offset: 0,
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    while let Some(c) = cur.peek() {
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '#' {
            cur.eat_while(|c| c != '\n');
            continue;
        }
        let start = cur.mark();
        let kind = if is_ident_start(c) {
            cur.eat_while(is_ident_continue);
            let word = &src[start.offset..cur.offset];
            TokenKind::keyword(word).unwrap_or_else(|| TokenKind::Ident(word.to_string()))
        } else if c.is_ascii_digit()
            || (c == '-' && cur.peek2().is_some_and(|d| d.is_ascii_digit()))
        {
            lex_number(&mut cur, start)?
        } else if c == '"' {
            lex_string(&mut cur, start)?
        } else {
            cur.bump();
            match c {
                ':' => TokenKind::Colon,
                '=' => TokenKind::Eq,
                '[' => TokenKind::LBracket,
                ']' => TokenKind::RBracket,
                '(' => TokenKind::LParen,
                ')' => TokenKind::RParen,
                ',' => TokenKind::Comma,
                '~' => TokenKind::Tilde,
                '+' => TokenKind::Plus,
                '*' => TokenKind::Star,
                '-' if cur.peek() == Some('>') => {
                    cur.bump();
                    TokenKind::Arrow
                }
                _ => {
                    return Err(LexError {
                        message: format!("unexpected character `{c}`"),
                        span: cur.close(start),
                    })
                }
            }
        };
        out.push(Token {
            kind,
            span: cur.close(start),
        });
    }
    out.push(Token {
        kind: TokenKind::Eof,
        span: cur.mark(),
    });
    Ok(out)
}

fn lex_number(cur: &mut Cursor<'_>, start: Span) -> Result<TokenKind, LexError> {
    if cur.peek() == Some('-') {
        cur.bump();
    }
    cur.eat_while(|c| c.is_ascii_digit());
    let mut real = false;
    let malformed = |cur: &mut Cursor<'_>| {
        cur.eat_while(|c| is_ident_continue(c) || c == '.');
        LexError {
            message: format!("malformed number `{}`", &cur.src[start.offset..cur.offset]),
            span: cur.close(start),
        }
    };
    if cur.peek() == Some('.') {
        real = true;
        cur.bump();
        if !cur.peek().is_some_and(|c| c.is_ascii_digit()) {
            return Err(malformed(cur));
        }
        cur.eat_while(|c| c.is_ascii_digit());
    }
    if matches!(cur.peek(), Some('e' | 'E')) {
        real = true;
        cur.bump();
        if matches!(cur.peek(), Some('+' | '-')) {
            cur.bump();
        }
        if !cur.peek().is_some_and(|c| c.is_ascii_digit()) {
            return Err(malformed(cur));
        }
        cur.eat_while(|c| c.is_ascii_digit());
    }
    if cur.peek().is_some_and(|c| is_ident_continue(c) || c == '.') {
        return Err(malformed(cur));
    }
    let text = &cur.src[start.offset..cur.offset];
    let parsed = if real {
        text.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(TokenKind::Real)
    } else {
        text.parse::<i64>().ok().map(TokenKind::Int)
    };
    parsed.ok_or_else(|| LexError {
        message: format!("number `{text}` is out of range"),
        span: cur.close(start),
    })
}

fn lex_string(cur: &mut Cursor<'_>, start: Span) -> Result<TokenKind, LexError> {
    cur.bump();
    let mut value = String::new();
    loop {
        match cur.bump() {
            Some('"') => return Ok(TokenKind::Str(value)),
            Some('\\') => match cur.bump() {
                Some('"') => value.push('"'),
                Some('\\') => value.push('\\'),
                Some('n') => value.push('\n'),
                Some('t') => value.push('\t'),
                other => {
                    return Err(LexError {
                        message: match other {
                            Some(c) => format!("unknown escape `\\{c}`"),
                            None => "unterminated string".to_string(),
                        },
                        span: cur.close(start),
                    })
                }
            },
            Some('\n') | None => {
                return Err(LexError {
                    message: "unterminated string".to_string(),
                    span: cur.close(start),
                })
            }
            Some(c) => value.push(c),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use TokenKind::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn axis_declaration() {
        assert_eq!(
            kinds("axis County size 85"),
            vec![KwAxis, Ident("County".into()), KwSize, Int(85), Eof]
        );
    }

    #[test]
    fn empty_input() {
        assert_eq!(kinds(""), vec![Eof]);
        assert_eq!(kinds("  # just a comment\n"), vec![Eof]);
    }

    #[test]
    fn illegal_character_position() {
        let err = tokenize("axis C@").unwrap_err();
        assert_eq!((err.span.line, err.span.col), (1, 7));
    }

    #[test]
    fn arrows_and_negative_numbers() {
        assert_eq!(
            kinds("State -> County = [-1, 2.5, 1e-3]"),
            vec![
                Ident("State".into()),
                Arrow,
                Ident("County".into()),
                Eq,
                LBracket,
                Int(-1),
                Comma,
                Real(2.5),
                Comma,
                Real(1e-3),
                RBracket,
                Eof
            ]
        );
    }

    #[test]
    fn malformed_numbers() {
        for bad in ["1.", "1.2.3", "1e", "12abc", "99999999999999999999"] {
            assert!(tokenize(bad).is_err(), "{bad} should not lex");
        }
        assert!(tokenize("a - b").is_err());
    }

    #[test]
    fn strings() {
        assert_eq!(
            kinds(r#"from "a\"b.csv""#),
            vec![KwFrom, Str("a\"b.csv".into()), Eof]
        );
        let err = tokenize("from \"oops\nnext").unwrap_err();
        assert_eq!(err.message, "unterminated string");
        assert_eq!((err.span.line, err.span.col), (1, 6));
    }

    #[test]
    fn spans_track_lines() {
        let toks = tokenize("axis A size 1\n  let").unwrap();
        let let_tok = &toks[4];
        assert_eq!(let_tok.kind, KwLet);
        assert_eq!(
            (let_tok.span.line, let_tok.span.col, let_tok.span.len),
            (2, 3, 3)
        );
    }
}
