//! Symbol remapping: same-radix substitution.
//!
//! A remap re-renders each digit value under a rearranged (or wholly
//! substituted) symbol arrangement. It never touches values: glyph `g`
//! becomes the target's glyph for `value_of(source, g)`, so it is a
//! bijection on digit strings, not a conversion. Parsing the output under
//! the original alphabet generally yields a different value; that is the
//! point.

use thiserror::Error;

use crate::alphabet::{Alphabet, AlphabetError};
use crate::baseconv::{ConvertError, Message};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RemapError {
    #[error(transparent)]
    Alphabet(#[from] AlphabetError),
    #[error("source radix {source_radix} does not match target radix {target_radix}")]
    RadixMismatch {
        source_radix: u32,
        target_radix: u32,
    },
    #[error("message is not well-formed: {0}")]
    Message(#[from] ConvertError),
}

/// A substitution between two injective alphabets of the same radix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Remapping {
    source: Alphabet,
    target: Alphabet,
}

impl Remapping {
    pub fn new(source: Alphabet, target: Alphabet) -> Result<Self, RemapError> {
        if source.radix() != target.radix() {
            return Err(RemapError::RadixMismatch {
                source_radix: source.radix(),
                target_radix: target.radix(),
            });
        }
        Ok(Remapping { source, target })
    }

    /// Rotation remap: the source roster shifted by `k` positions
    /// (positive is rightward, see [`Alphabet::rotate`]).
    pub fn rotation(source: Alphabet, k: i64) -> Self {
        let target = source.rotate(k);
        Remapping { source, target }
    }

    pub fn source(&self) -> &Alphabet {
        &self.source
    }

    pub fn target(&self) -> &Alphabet {
        &self.target
    }

    /// True when the target is a rearrangement of the source's glyph set.
    pub fn is_permutation(&self) -> bool {
        self.source
            .glyphs()
            .iter()
            .all(|&g| self.target.contains(g))
    }

    pub fn inverted(&self) -> Remapping {
        Remapping {
            source: self.target.clone(),
            target: self.source.clone(),
        }
    }

    /// Substitutes every digit glyph; `.` and `-` pass through untouched.
    /// Length and glyph positions are preserved.
    pub fn apply(&self, m: &Message) -> Result<Message, RemapError> {
        let text = self.apply_text(m.text())?;
        Ok(Message::new(text, self.target.clone())?)
    }

    pub fn apply_text(&self, text: &str) -> Result<String, RemapError> {
        let mut out = String::with_capacity(text.len());
        for g in text.chars() {
            if g == '.' || g == '-' {
                out.push(g);
            } else {
                let v = self.source.value_of(g)?;
                out.push(self.target.symbol_of(v)?);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseconv::parse;

    fn alpha(s: &str) -> Alphabet {
        Alphabet::from_str_roster(s).unwrap()
    }

    #[test]
    fn rearranged_roster_substitutes() {
        let r = Remapping::new(alpha("abcde"), alpha("aebcd")).unwrap();
        let m = Message::new("deed", alpha("abcde")).unwrap();
        let out = r.apply(&m).unwrap();
        assert_eq!(out.text(), "cddc");
        assert!(r.is_permutation());
    }

    #[test]
    fn identity_arrangement_is_identity() {
        let r = Remapping::new(alpha("abcde"), alpha("abcde")).unwrap();
        let m = Message::new("deed", alpha("abcde")).unwrap();
        assert_eq!(r.apply(&m).unwrap().text(), "deed");
    }

    #[test]
    fn inverse_restores_message() {
        let r = Remapping::new(alpha("abcde"), alpha("aebcd")).unwrap();
        let m = Message::new("deed", alpha("abcde")).unwrap();
        let there = r.apply(&m).unwrap();
        let back = r.inverted().apply(&there).unwrap();
        assert_eq!(back.text(), "deed");
    }

    #[test]
    fn radix_mismatch_rejected() {
        assert_eq!(
            Remapping::new(alpha("abcde"), alpha("abcd")).unwrap_err(),
            RemapError::RadixMismatch {
                source_radix: 5,
                target_radix: 4
            }
        );
    }

    #[test]
    fn unknown_glyph_rejected() {
        let r = Remapping::new(alpha("abcde"), alpha("aebcd")).unwrap();
        assert!(matches!(
            r.apply_text("xyz").unwrap_err(),
            RemapError::Alphabet(AlphabetError::UnknownGlyph('x'))
        ));
    }

    #[test]
    fn structural_glyphs_pass_through() {
        let r = Remapping::new(alpha("abcde"), alpha("aebcd")).unwrap();
        assert_eq!(r.apply_text("-de.ed").unwrap(), "-cd.dc");
    }

    #[test]
    fn rotation_remap() {
        let r = Remapping::rotation(alpha("abcde"), 1);
        assert_eq!(r.target().glyphs().iter().collect::<String>(), "eabcd");
        // rotation by the radix is the identity
        let r = Remapping::rotation(alpha("abcde"), 5);
        assert_eq!(r.source(), r.target());
    }

    #[test]
    fn substitution_to_disjoint_glyph_set() {
        let r = Remapping::new(alpha("abcde"), alpha("01234")).unwrap();
        assert_eq!(r.apply_text("deed").unwrap(), "3443");
        assert!(!r.is_permutation());
    }

    #[test]
    fn remapping_is_not_conversion() {
        // digit values survive, message values do not
        let src = alpha("abcde");
        let r = Remapping::new(src.clone(), alpha("aebcd")).unwrap();
        let m = Message::new("deed", src.clone()).unwrap();
        let out = r.apply(&m).unwrap();
        let original_value = parse("deed", &src).unwrap();
        let reparsed_under_source = parse("cddc", &src).unwrap();
        assert_ne!(original_value, reparsed_under_source);
        // but under the target arrangement the value is unchanged
        assert_eq!(out.value(), original_value);
    }
}
