use std::fmt;

use serde::{Deserialize, Serialize};

use super::GrammarError;

/// A set of character ranges, optionally repeatable (`[a-z]+`).
///
/// Ranges are kept sorted and non-overlapping; adjacent ranges are fused.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CharClass {
    ranges: Vec<(char, char)>,
    repeatable: bool,
}

impl CharClass {
    pub fn new(
        ranges: impl IntoIterator<Item = (char, char)>,
        repeatable: bool,
    ) -> Result<Self, GrammarError> {
        let mut ranges: Vec<(char, char)> = ranges.into_iter().collect();
        if ranges.is_empty() {
            return Err(GrammarError::EmptyCharClass);
        }
        for &(lo, hi) in &ranges {
            if lo > hi {
                return Err(GrammarError::InvalidRange(lo, hi));
            }
        }
        ranges.sort_unstable();
        let mut merged: Vec<(char, char)> = Vec::with_capacity(ranges.len());
        for (lo, hi) in ranges {
            match merged.last_mut() {
                Some(last) if (last.1 as u32).saturating_add(1) >= lo as u32 => {
                    if hi > last.1 {
                        last.1 = hi;
                    }
                }
                _ => merged.push((lo, hi)),
            }
        }
        Ok(Self {
            ranges: merged,
            repeatable,
        })
    }

    pub fn from_chars(chars: impl IntoIterator<Item = char>, repeatable: bool) -> Result<Self, GrammarError> {
        Self::new(chars.into_iter().map(|c| (c, c)), repeatable)
    }

    pub fn ranges(&self) -> &[(char, char)] {
        &self.ranges
    }

    pub fn repeatable(&self) -> bool {
        self.repeatable
    }

    pub fn with_repeatable(&self, repeatable: bool) -> Self {
        Self {
            ranges: self.ranges.clone(),
            repeatable,
        }
    }

    pub fn contains(&self, c: char) -> bool {
        self.ranges
            .binary_search_by(|&(lo, hi)| {
                if hi < c {
                    std::cmp::Ordering::Less
                } else if lo > c {
                    std::cmp::Ordering::Greater
                } else {
                    std::cmp::Ordering::Equal
                }
            })
            .is_ok()
    }

    /// Whether `s` is a single member of this class (a non-empty run when repeatable).
    pub fn matches(&self, s: &str) -> bool {
        let mut n = 0usize;
        for c in s.chars() {
            if !self.contains(c) {
                return false;
            }
            n += 1;
        }
        n == 1 || (n > 1 && self.repeatable)
    }

    pub fn lowest(&self) -> char {
        self.ranges[0].0
    }

    /// Number of characters in the class (surrogate gap ignored).
    pub fn size(&self) -> u32 {
        self.ranges
            .iter()
            .map(|&(lo, hi)| hi as u32 - lo as u32 + 1)
            .sum()
    }

    /// The `i`-th member in ascending order, `i < size()`.
    pub fn nth(&self, mut i: u32) -> char {
        for &(lo, hi) in &self.ranges {
            let width = hi as u32 - lo as u32 + 1;
            if i < width {
                let mut code = lo as u32 + i;
                // skip into valid scalar values if a range spans the surrogate block
                while char::from_u32(code).is_none() {
                    code += 1;
                }
                return char::from_u32(code).unwrap_or(lo);
            }
            i -= width;
        }
        self.lowest()
    }
}

fn write_class_char(f: &mut fmt::Formatter<'_>, c: char) -> fmt::Result {
    match c {
        ']' | '[' | '\\' | '-' => write!(f, "\\{c}"),
        '\n' => f.write_str("\\n"),
        '\t' => f.write_str("\\t"),
        c if (c as u32) < 0x20 || c as u32 == 0x7f => write!(f, "\\x{:02X}", c as u32),
        c => write!(f, "{c}"),
    }
}

impl fmt::Display for CharClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for &(lo, hi) in &self.ranges {
            write_class_char(f, lo)?;
            if hi != lo {
                f.write_str("-")?;
                write_class_char(f, hi)?;
            }
        }
        f.write_str("]")?;
        if self.repeatable {
            f.write_str("+")?;
        }
        Ok(())
    }
}
