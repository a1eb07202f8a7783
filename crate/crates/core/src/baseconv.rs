//! Numerical base conversion.
//!
//! A digit string has no meaning without its symbol set; there is no
//! direct glyph-for-glyph mapping between radices. Conversion therefore
//! always goes through the exact value: [`parse`] the whole message as one
//! positional numeral, then [`render`] that value in the target alphabet.
//! Rendering takes a fractional-digit precision, detects repeating
//! expansions by watching long-division remainders, and truncates (plain
//! cut, never rounding) when the precision runs out first.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::alphabet::{Alphabet, AlphabetError, SymbolSet};
use crate::numeric::{divmod_int, NumericError, Rational};

/// Default number of fractional digits rendered in the target radix.
pub const DEFAULT_PRECISION: u32 = 64;

/// Default bound on long-division steps when classifying an expansion.
pub const DEFAULT_CYCLE_BUDGET: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConvertError {
    #[error(transparent)]
    Alphabet(#[from] AlphabetError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error("malformed numeral: {0}")]
    MalformedNumeral(String),
    #[error("empty input")]
    EmptyInput,
}

/// How a fractional expansion behaved in the target radix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpansionInfo {
    /// The value is exactly representable and was written out in full.
    Terminating,
    /// The expansion cycles: `preperiod` digits after the radix point,
    /// then a block of `period` digits repeating forever.
    Repeating { preperiod: usize, period: usize },
    /// The precision limit was reached before the expansion terminated or
    /// a cycle could be confirmed.
    Truncated,
}

impl ExpansionInfo {
    pub fn is_terminating(&self) -> bool {
        matches!(self, ExpansionInfo::Terminating)
    }
}

impl std::fmt::Display for ExpansionInfo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExpansionInfo::Terminating => write!(f, "terminating"),
            ExpansionInfo::Repeating { preperiod, period } => {
                write!(f, "repeating (preperiod {preperiod}, period {period})")
            }
            ExpansionInfo::Truncated => write!(f, "truncated at precision"),
        }
    }
}

/// A digit string tied to the injective alphabet it is written in.
/// Well-formed by construction: optional leading `-`, at most one `.`,
/// every other glyph from the alphabet, at least one digit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    text: String,
    alphabet: Alphabet,
}

impl Message {
    pub fn new(text: impl Into<String>, alphabet: Alphabet) -> Result<Self, ConvertError> {
        let text = text.into();
        parse(&text, &alphabet)?;
        Ok(Message { text, alphabet })
    }

    pub(crate) fn from_rendered(text: String, alphabet: Alphabet) -> Self {
        debug_assert!(parse(&text, &alphabet).is_ok());
        Message { text, alphabet }
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn glyph_count(&self) -> usize {
        self.text.chars().count()
    }

    /// The exact positional value of the digit string.
    pub fn value(&self) -> Rational {
        parse(&self.text, &self.alphabet).expect("validated at construction")
    }

    /// Normal form: no superfluous zero-value glyphs, no bare trailing
    /// radix point, no sign on zero. Purely textual; the value is
    /// untouched.
    pub fn canonical(&self) -> Message {
        let zero = self.alphabet.zero_glyph();
        let (neg, body) = match self.text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, self.text.as_str()),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        let int_trimmed: String = {
            let t: String = int_part.chars().skip_while(|&c| c == zero).collect();
            if t.is_empty() {
                zero.to_string()
            } else {
                t
            }
        };
        let frac_trimmed: String = {
            let digits: Vec<char> = frac_part.chars().collect();
            let keep = digits.iter().rposition(|&c| c != zero).map_or(0, |i| i + 1);
            digits[..keep].iter().collect()
        };
        let is_zero = int_trimmed.chars().all(|c| c == zero) && frac_trimmed.is_empty();
        let mut text = String::new();
        if neg && !is_zero {
            text.push('-');
        }
        text.push_str(&int_trimmed);
        if !frac_trimmed.is_empty() {
            text.push('.');
            text.push_str(&frac_trimmed);
        }
        Message {
            text,
            alphabet: self.alphabet.clone(),
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical().text == self.text
    }
}

impl std::fmt::Display for Message {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.text)
    }
}

/// Exact positional value of `text` under alphabet `a`.
///
/// Canonical form is not required: `"007"`, `"2."` and `".5"` all parse.
pub fn parse(text: &str, a: &Alphabet) -> Result<Rational, ConvertError> {
    if text.is_empty() {
        return Err(ConvertError::EmptyInput);
    }
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    if body.contains('-') {
        return Err(ConvertError::MalformedNumeral("stray sign".into()));
    }
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => {
            if f.contains('.') {
                return Err(ConvertError::MalformedNumeral(
                    "more than one radix point".into(),
                ));
            }
            (i, f)
        }
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(ConvertError::MalformedNumeral("no digits".into()));
    }
    let radix = BigUint::from(a.radix());
    let mut accum = BigUint::zero();
    let mut frac_len = 0u32;
    for g in int_part.chars() {
        accum = accum * &radix + BigUint::from(a.value_of(g)?);
    }
    for g in frac_part.chars() {
        accum = accum * &radix + BigUint::from(a.value_of(g)?);
        frac_len += 1;
    }
    let numer = BigInt::from(accum);
    let denom = BigInt::from(radix.pow(frac_len));
    let value = Rational::new(numer, denom)?;
    Ok(if negative { value.neg() } else { value })
}

/// Writes `v` in the given symbol set with at most `precision` fractional
/// digits. Integer digits by repeated division, fractional digits by
/// repeated multiplication with remainder-cycle detection. The returned
/// text is canonical; negative values get a `-` prefix outside the
/// alphabet.
pub fn render<S: SymbolSet>(v: &Rational, set: &S, precision: u32) -> (String, ExpansionInfo) {
    let radix = set.radix();
    let glyph = |d: u32| set.symbol_of(d).expect("digit below radix");

    let negative = v.is_negative();
    let abs = v.abs();
    let numer = abs.numer().magnitude().clone();
    let denom = abs.denom().magnitude().clone();
    let (int_value, mut rem) = num_integer::Integer::div_rem(&numer, &denom);

    let mut int_digits = Vec::new();
    let mut n = int_value;
    while !n.is_zero() {
        let (q, d) = divmod_int(&n, radix);
        int_digits.push(d);
        n = q;
    }
    if int_digits.is_empty() {
        int_digits.push(0);
    }
    int_digits.reverse();

    // Long division for the fractional part. Remainders repeat exactly
    // when the expansion does, so the first revisited remainder fixes
    // (preperiod, period); digits keep flowing until the precision cut.
    let mut frac_digits: Vec<u32> = Vec::new();
    let mut seen: HashMap<BigUint, usize> = HashMap::new();
    let mut info: Option<ExpansionInfo> = None;
    let big_radix = BigUint::from(radix);
    let mut terminated = rem.is_zero();
    for pos in 0..precision as usize {
        if rem.is_zero() {
            terminated = true;
            break;
        }
        if info.is_none() {
            if let Some(&first) = seen.get(&rem) {
                info = Some(ExpansionInfo::Repeating {
                    preperiod: first,
                    period: pos - first,
                });
            } else {
                seen.insert(rem.clone(), pos);
            }
        }
        let (digit, next) = num_integer::Integer::div_rem(&(rem * &big_radix), &denom);
        frac_digits.push(digit.to_u32().expect("digit below radix"));
        rem = next;
    }
    let info = if terminated || rem.is_zero() {
        ExpansionInfo::Terminating
    } else if let Some(found) = info {
        found
    } else if let Some(&first) = seen.get(&rem) {
        // the cycle closed exactly at the cut
        ExpansionInfo::Repeating {
            preperiod: first,
            period: frac_digits.len() - first,
        }
    } else {
        ExpansionInfo::Truncated
    };

    // canonical cut: no trailing zero-value glyphs survive truncation
    while frac_digits.last() == Some(&0) {
        frac_digits.pop();
    }

    let mut text = String::new();
    let value_is_zero = int_digits == [0] && frac_digits.is_empty();
    if negative && !value_is_zero {
        text.push('-');
    }
    for &d in &int_digits {
        text.push(glyph(d));
    }
    if !frac_digits.is_empty() {
        text.push('.');
        for &d in &frac_digits {
            text.push(glyph(d));
        }
    }
    (text, info)
}

/// Exact rendering with however many fractional digits it takes, or
/// `None` when the expansion does not terminate in this radix.
pub fn render_exact<S: SymbolSet>(v: &Rational, set: &S) -> Option<String> {
    let precision = terminating_precision(v, set.radix())?;
    let (text, info) = render(v, set, precision);
    debug_assert!(info.is_terminating());
    Some(text)
}

/// Fractional digits needed for `v` to terminate in `radix`, or `None`
/// if it never does (the reduced denominator has a prime factor the
/// radix lacks).
pub fn terminating_precision(v: &Rational, radix: u32) -> Option<u32> {
    let mut d = v.denom().magnitude().clone();
    let r = BigUint::from(radix);
    let mut steps = 0u32;
    while !num_traits::One::is_one(&d) {
        let g = num_integer::Integer::gcd(&d, &r);
        if num_traits::One::is_one(&g) {
            return None;
        }
        d /= g;
        steps += 1;
    }
    Some(steps)
}

/// Re-renders `m` in the target alphabet: parse, then render. Exact when
/// the expansion terminates; otherwise truncated and flagged.
pub fn convert(
    m: &Message,
    to: &Alphabet,
    precision: u32,
) -> Result<(Message, ExpansionInfo), ConvertError> {
    let value = parse(m.text(), m.alphabet())?;
    let (text, info) = render(&value, to, precision);
    Ok((Message::from_rendered(text, to.clone()), info))
}

/// Classifies the expansion of `v` in `radix` without rendering digits.
///
/// Terminating iff every prime factor of the reduced denominator divides
/// the radix (checked by factor stripping); otherwise the preperiod and
/// period come from remainder-cycle detection, giving up with
/// [`ExpansionInfo::Truncated`] once `cycle_budget` steps have passed.
pub fn classify_expansion(v: &Rational, radix: u32, cycle_budget: usize) -> ExpansionInfo {
    assert!(radix >= 2, "radix must be at least 2");
    if terminating_precision(v, radix).is_some() {
        return ExpansionInfo::Terminating;
    }
    let denom = v.denom().magnitude().clone();
    let mut rem = v.numer().magnitude() % &denom;
    let big_radix = BigUint::from(radix);
    let mut seen: HashMap<BigUint, usize> = HashMap::new();
    for pos in 0..cycle_budget {
        if let Some(&first) = seen.get(&rem) {
            return ExpansionInfo::Repeating {
                preperiod: first,
                period: pos - first,
            };
        }
        seen.insert(rem.clone(), pos);
        rem = (rem * &big_radix) % &denom;
    }
    ExpansionInfo::Truncated
}
