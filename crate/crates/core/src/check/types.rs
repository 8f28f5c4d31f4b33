use std::fmt;

/// Static type of an expression. Axis and dataset components are names of
/// declared symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SemType {
    Vec(String),
    Idx(String, String),
    Map(String, String, String),
    Obs(String),
    Scalar,
}

impl SemType {
    /// Types that take part in `+` and `*`.
    pub fn is_arithmetic(&self) -> bool {
        matches!(self, SemType::Vec(_) | SemType::Obs(_) | SemType::Scalar)
    }
}

impl fmt::Display for SemType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemType::Vec(k) => write!(f, "Vec[{k}]"),
            SemType::Idx(k, d) => write!(f, "Idx[{k}, {d}]"),
            SemType::Map(k, l, d) => write!(f, "Map[{k}, {l}, {d}]"),
            SemType::Obs(d) => write!(f, "Obs[{d}]"),
            SemType::Scalar => f.write_str("Scalar"),
        }
    }
}
