use serde::Serialize;

/// Location of a token or node in the source text. Lines and columns are
/// 1-based and count characters, not bytes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Span {
    pub offset: usize,
    pub len: usize,
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn end(&self) -> usize {
        self.offset + self.len
    }

    /// Smallest span covering both `self` and `other`, which must come
    /// later in the source.
    pub fn to(self, other: Span) -> Span {
        Span {
            len: other.end().saturating_sub(self.offset),
            ..self
        }
    }
}
