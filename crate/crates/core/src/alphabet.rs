//! Symbol sets: ordered glyph rosters that define a radix.
//!
//! An [`Alphabet`] maps digit values `0..radix` to distinct glyphs and
//! back; a [`SurjectiveMap`] lets several values share a glyph and is
//! therefore usable for rendering only. One Unicode scalar is one glyph,
//! so rosters far beyond the printable ASCII range (CJK and friends) are
//! constructible programmatically.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlphabetError {
    #[error("duplicate glyph {0:?} in alphabet")]
    DuplicateGlyph(char),
    #[error("glyph {0:?} is reserved for message/expression structure")]
    ReservedGlyph(char),
    #[error("alphabet needs at least 2 glyphs, got {0}")]
    RadixTooSmall(usize),
    #[error("no built-in roster for radix {0} (supported range 2..={max})", max = BUILTIN_MAX_RADIX)]
    RadixOutOfRange(u32),
    #[error("glyph {0:?} is not in the alphabet")]
    UnknownGlyph(char),
    #[error("duplicate-symbol sets are render-only and cannot be parsed")]
    SurjectiveParse,
    #[error("digit value {value} out of range for radix {radix}")]
    ValueOutOfRange { value: u32, radix: u32 },
}

/// Glyphs that carry structure in messages or expressions and may not
/// appear in any symbol set: radix point, sign, operators, whitespace.
pub const RESERVED_GLYPHS: [char; 6] = ['.', '-', '+', '*', '/', '^'];

pub fn is_reserved_glyph(g: char) -> bool {
    RESERVED_GLYPHS.contains(&g) || g.is_whitespace()
}

#[derive(Debug)]
struct Roster {
    glyphs: Vec<char>,
    index: HashMap<char, u32>,
}

/// An injective symbol set: `radix` distinct glyphs in value order.
///
/// Cheap to clone and share; the roster is immutable after construction.
#[derive(Debug, Clone)]
pub struct Alphabet {
    inner: Arc<Roster>,
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.glyphs == other.inner.glyphs
    }
}

impl Eq for Alphabet {}

impl Alphabet {
    /// Builds an injective alphabet where value `i` is the `i`-th glyph.
    pub fn new(glyphs: impl IntoIterator<Item = char>) -> Result<Self, AlphabetError> {
        let glyphs: Vec<char> = glyphs.into_iter().collect();
        if glyphs.len() < 2 {
            return Err(AlphabetError::RadixTooSmall(glyphs.len()));
        }
        let mut index = HashMap::with_capacity(glyphs.len());
        for (i, &g) in glyphs.iter().enumerate() {
            if is_reserved_glyph(g) {
                return Err(AlphabetError::ReservedGlyph(g));
            }
            if index.insert(g, i as u32).is_some() {
                return Err(AlphabetError::DuplicateGlyph(g));
            }
        }
        Ok(Alphabet {
            inner: Arc::new(Roster { glyphs, index }),
        })
    }

    pub fn from_str_roster(glyphs: &str) -> Result<Self, AlphabetError> {
        Alphabet::new(glyphs.chars())
    }

    /// The canonical built-in roster prefix for `radix` in `2..=88`:
    /// digits, lowercase, uppercase, then a fixed punctuation tail.
    pub fn builtin(radix: u32) -> Result<Self, AlphabetError> {
        if !(2..=BUILTIN_MAX_RADIX).contains(&radix) {
            return Err(AlphabetError::RadixOutOfRange(radix));
        }
        Alphabet::new(builtin_roster().take(radix as usize))
    }

    pub fn radix(&self) -> u32 {
        self.inner.glyphs.len() as u32
    }

    pub fn glyphs(&self) -> &[char] {
        &self.inner.glyphs
    }

    /// Digit value of `g`, i.e. its position in the roster.
    pub fn value_of(&self, g: char) -> Result<u32, AlphabetError> {
        self.inner
            .index
            .get(&g)
            .copied()
            .ok_or(AlphabetError::UnknownGlyph(g))
    }

    pub fn contains(&self, g: char) -> bool {
        self.inner.index.contains_key(&g)
    }

    pub fn symbol_of(&self, v: u32) -> Result<char, AlphabetError> {
        self.inner
            .glyphs
            .get(v as usize)
            .copied()
            .ok_or(AlphabetError::ValueOutOfRange {
                value: v,
                radix: self.radix(),
            })
    }

    /// The glyph for value zero (used when padding segments back up).
    pub fn zero_glyph(&self) -> char {
        self.inner.glyphs[0]
    }

    /// Roster cyclically shifted: positive `k` moves the glyph at position
    /// `i` to `(i + k) mod radix`, so `"abcde"` rotated by 1 is `"eabcd"`.
    pub fn rotate(&self, k: i64) -> Alphabet {
        let r = self.inner.glyphs.len() as i64;
        let shift = k.rem_euclid(r) as usize;
        let mut rotated = vec!['\0'; self.inner.glyphs.len()];
        for (i, &g) in self.inner.glyphs.iter().enumerate() {
            rotated[(i + shift) % self.inner.glyphs.len()] = g;
        }
        Alphabet::new(rotated).expect("rotation preserves validity")
    }

    /// `builtin:<radix>` when this roster is the built-in one, otherwise
    /// `inline:<glyphs>`. Stable, self-describing, whitespace-free.
    pub fn descriptor(&self) -> String {
        let radix = self.radix();
        if radix <= BUILTIN_MAX_RADIX {
            let builtin_prefix: Vec<char> = builtin_roster().take(radix as usize).collect();
            if builtin_prefix == self.inner.glyphs {
                return format!("builtin:{radix}");
            }
        }
        let roster: String = self.inner.glyphs.iter().collect();
        format!("inline:{roster}")
    }

    /// Parses the [`Alphabet::descriptor`] forms back.
    pub fn from_descriptor(desc: &str) -> Result<Self, AlphabetError> {
        if let Some(radix) = desc.strip_prefix("builtin:") {
            let radix: u32 = radix
                .parse()
                .map_err(|_| AlphabetError::RadixOutOfRange(0))?;
            Alphabet::builtin(radix)
        } else if let Some(glyphs) = desc.strip_prefix("inline:") {
            Alphabet::from_str_roster(glyphs)
        } else {
            Alphabet::from_str_roster(desc)
        }
    }
}

/// Largest radix the built-in roster covers: 10 digits, 2 x 26 letters and
/// the 26-glyph punctuation tail that remains once reserved glyphs are out.
pub const BUILTIN_MAX_RADIX: u32 = 88;

const BUILTIN_TAIL: &str = "!#$%&()[]{}<>?@,;:_=|~`'\"\\";

fn builtin_roster() -> impl Iterator<Item = char> {
    ('0'..='9')
        .chain('a'..='z')
        .chain('A'..='Z')
        .chain(BUILTIN_TAIL.chars())
}

/// A render-only symbol set where distinct values may share a glyph.
///
/// Parsing through one of these is ambiguous and always refused; it exists
/// so high radices can be displayed without inventing thousands of glyphs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurjectiveMap {
    glyphs: Vec<char>,
}

impl SurjectiveMap {
    pub fn new(glyphs: impl IntoIterator<Item = char>) -> Result<Self, AlphabetError> {
        let glyphs: Vec<char> = glyphs.into_iter().collect();
        if glyphs.len() < 2 {
            return Err(AlphabetError::RadixTooSmall(glyphs.len()));
        }
        for &g in &glyphs {
            if is_reserved_glyph(g) {
                return Err(AlphabetError::ReservedGlyph(g));
            }
        }
        Ok(SurjectiveMap { glyphs })
    }

    pub fn radix(&self) -> u32 {
        self.glyphs.len() as u32
    }

    pub fn symbol_of(&self, v: u32) -> Result<char, AlphabetError> {
        self.glyphs
            .get(v as usize)
            .copied()
            .ok_or(AlphabetError::ValueOutOfRange {
                value: v,
                radix: self.radix(),
            })
    }

    /// Always refused: with shared glyphs the digit value is ambiguous.
    pub fn value_of(&self, _g: char) -> Result<u32, AlphabetError> {
        Err(AlphabetError::SurjectiveParse)
    }
}

/// Rendering target: anything that can turn digit values into glyphs.
/// Implemented by both [`Alphabet`] and [`SurjectiveMap`]; only
/// [`Alphabet`] can parse.
pub trait SymbolSet {
    fn radix(&self) -> u32;
    fn symbol_of(&self, v: u32) -> Result<char, AlphabetError>;
}

impl SymbolSet for Alphabet {
    fn radix(&self) -> u32 {
        Alphabet::radix(self)
    }

    fn symbol_of(&self, v: u32) -> Result<char, AlphabetError> {
        Alphabet::symbol_of(self, v)
    }
}

impl SymbolSet for SurjectiveMap {
    fn radix(&self) -> u32 {
        SurjectiveMap::radix(self)
    }

    fn symbol_of(&self, v: u32) -> Result<char, AlphabetError> {
        SurjectiveMap::symbol_of(self, v)
    }
}
