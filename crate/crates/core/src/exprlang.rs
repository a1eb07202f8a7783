//! Calculator-style operator chains over one variable `X`.
//!
//! Grammar: `expr := [operand] (op operand)*` with `op` one of `+ - * / ^`
//! and `operand` either `X` or a numeral in the expression's alphabet.
//! A leading operator implies an `X` head, so `"+33*6/4.5"` reads as
//! `X+33*6/4.5`. Whitespace is insignificant; there are no parentheses.
//!
//! Evaluation is a strict left-to-right fold with **no precedence**:
//! `X+2*3` at `X = 4` is `(4+2)*3 = 18`. That choice is what makes an
//! operator chain and its reversed, op-swapped counterpart mutual
//! inverses, which [`Expr::invert`] exploits.
//!
//! Literals are numerals of the step alphabet, so the same text means
//! different numbers under different alphabets: `"33"` is 111 under a
//! 36-glyph roster and 33 under a decimal one.
//!
//! One wart follows from the grammar: in alphabets that contain the glyph
//! `X` (e.g. the 62-glyph builtin roster), a standalone `X` token is
//! always the variable. A literal that would start with that glyph needs
//! a leading zero-value glyph: write `0X3`, not `X3`.

use num_bigint::BigInt;
use thiserror::Error;

use crate::alphabet::{Alphabet, AlphabetError};
use crate::baseconv::{self, ConvertError};
use crate::numeric::{Budget, NumericError, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("syntax error at offset {pos}: {msg}")]
    SyntaxError { pos: usize, msg: String },
    #[error("exponent must be an integer literal")]
    NonIntegerExponent,
    #[error("glyph {0:?} is not in the expression alphabet")]
    UnknownGlyph(char),
    #[error("literal {0} is not exactly representable in the expression alphabet")]
    LiteralNotRepresentable(Rational),
    #[error("not auto-invertible: {0}")]
    NotAutoInvertible(String),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    pub fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        Some(match c {
            '+' => BinOp::Add,
            '-' => BinOp::Sub,
            '*' => BinOp::Mul,
            '/' => BinOp::Div,
            '^' => BinOp::Pow,
            _ => return None,
        })
    }

    /// The op that undoes this one in a reversed chain.
    fn inverse(self) -> Option<Self> {
        Some(match self {
            BinOp::Add => BinOp::Sub,
            BinOp::Sub => BinOp::Add,
            BinOp::Mul => BinOp::Div,
            BinOp::Div => BinOp::Mul,
            BinOp::Pow => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Operand {
    Var,
    Lit(Rational),
}

/// A parsed operator chain: a head operand and a list of (op, operand)
/// pairs applied in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr {
    alphabet: Alphabet,
    head: Operand,
    tail: Vec<(BinOp, Operand)>,
}

impl Expr {
    /// Builds an expression from parts, enforcing the invariants the
    /// parser would: `^` operands are integer literals, and every literal
    /// is a finite numeral of the alphabet.
    pub fn new(
        alphabet: Alphabet,
        head: Operand,
        tail: Vec<(BinOp, Operand)>,
    ) -> Result<Self, ExprError> {
        let check_lit = |operand: &Operand| -> Result<(), ExprError> {
            if let Operand::Lit(v) = operand {
                if baseconv::terminating_precision(v, alphabet.radix()).is_none() {
                    return Err(ExprError::LiteralNotRepresentable(v.clone()));
                }
            }
            Ok(())
        };
        check_lit(&head)?;
        for (op, operand) in &tail {
            check_lit(operand)?;
            if *op == BinOp::Pow {
                match operand {
                    Operand::Lit(v) if v.is_integer() => {}
                    _ => return Err(ExprError::NonIntegerExponent),
                }
            }
        }
        Ok(Expr {
            alphabet,
            head,
            tail,
        })
    }

    /// Shorthand for the bare variable `X`.
    pub fn var(alphabet: Alphabet) -> Self {
        Expr {
            alphabet,
            head: Operand::Var,
            tail: Vec::new(),
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn head(&self) -> &Operand {
        &self.head
    }

    pub fn tail(&self) -> &[(BinOp, Operand)] {
        &self.tail
    }

    pub fn op_count(&self) -> usize {
        self.tail.len()
    }

    fn var_occurrences(&self) -> usize {
        let head = matches!(self.head, Operand::Var) as usize;
        head + self
            .tail
            .iter()
            .filter(|(_, o)| matches!(o, Operand::Var))
            .count()
    }

    /// Parses expression text over the given alphabet. A leading operator
    /// inserts an implicit `X` head.
    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<Self, ExprError> {
        let chars: Vec<char> = text.chars().collect();
        let mut pos = 0usize;
        skip_ws(&chars, &mut pos);
        if pos >= chars.len() {
            return Err(ExprError::SyntaxError {
                pos,
                msg: "empty expression".into(),
            });
        }
        let head = if BinOp::from_symbol(chars[pos]).is_some() {
            Operand::Var
        } else {
            parse_operand(&chars, &mut pos, alphabet)?
        };
        let mut tail = Vec::new();
        loop {
            skip_ws(&chars, &mut pos);
            if pos >= chars.len() {
                break;
            }
            let op = BinOp::from_symbol(chars[pos]).ok_or_else(|| ExprError::SyntaxError {
                pos,
                msg: format!("expected an operator, found {:?}", chars[pos]),
            })?;
            pos += 1;
            skip_ws(&chars, &mut pos);
            let operand = parse_operand(&chars, &mut pos, alphabet)?;
            tail.push((op, operand));
        }
        Expr::new(alphabet.clone(), head, tail)
    }

    /// Canonical text: explicit `X` head, no whitespace, literals rendered
    /// exactly in the expression alphabet.
    pub fn print(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.operand_text(&self.head));
        for (op, operand) in &self.tail {
            out.push(op.symbol());
            out.push_str(&self.operand_text(operand));
        }
        out
    }

    fn operand_text(&self, operand: &Operand) -> String {
        match operand {
            Operand::Var => "X".to_string(),
            Operand::Lit(v) => {
                let mut text = baseconv::render_exact(v, &self.alphabet)
                    .expect("literal validated representable");
                // a literal whose leading glyph is 'X' would reparse as
                // the variable; the zero-value glyph disambiguates
                let digits_at = usize::from(text.starts_with('-'));
                if text[digits_at..].starts_with('X') {
                    text.insert(digits_at, self.alphabet.zero_glyph());
                }
                text
            }
        }
    }

    /// Strict left-to-right fold: start from the head value, apply each
    /// (op, operand) in sequence.
    pub fn evaluate(&self, x: &Rational, budget: &Budget) -> Result<Rational, ExprError> {
        let resolve = |operand: &Operand| -> Rational {
            match operand {
                Operand::Var => x.clone(),
                Operand::Lit(v) => v.clone(),
            }
        };
        let mut acc = resolve(&self.head);
        for (op, operand) in &self.tail {
            let rhs = resolve(operand);
            acc = match op {
                BinOp::Add => acc.add(&rhs),
                BinOp::Sub => acc.sub(&rhs),
                BinOp::Mul => acc.mul(&rhs),
                BinOp::Div => acc.div(&rhs)?,
                BinOp::Pow => {
                    let k = rhs.to_bigint().ok_or(ExprError::NonIntegerExponent)?;
                    acc.pow_int(&k, budget)?
                }
            };
            budget.check(&acc)?;
        }
        Ok(acc)
    }

    /// Derives the inverse chain for the auto-invertible subset:
    ///
    /// * head `X` with `+ - * /` literal tail: reverse the tail and swap
    ///   each op with its inverse (`"+33*6/4.5"` becomes `"*4.5/6-33"`);
    /// * `c/X` with `c != 0`: its own inverse.
    ///
    /// Anything else (`^`, multiple `X` uses, `X` in a tail position)
    /// is refused; supply a manual inverse at the pipeline level instead.
    pub fn invert(&self) -> Result<Expr, ExprError> {
        if self.var_occurrences() > 1 {
            return Err(ExprError::NotAutoInvertible(
                "the variable appears more than once".into(),
            ));
        }
        // literal / X, the reciprocal form
        if let (Operand::Lit(c), [(BinOp::Div, Operand::Var)]) = (&self.head, &self.tail[..]) {
            if c.is_zero() {
                return Err(ExprError::NotAutoInvertible(
                    "zero divided by the variable is constant".into(),
                ));
            }
            return Ok(self.clone());
        }
        if !matches!(self.head, Operand::Var) {
            return Err(ExprError::NotAutoInvertible(
                "head operand is not the variable".into(),
            ));
        }
        let mut inverted = Vec::with_capacity(self.tail.len());
        for (op, operand) in self.tail.iter().rev() {
            let inv_op = op.inverse().ok_or_else(|| {
                ExprError::NotAutoInvertible("exponentiation has no chain inverse".into())
            })?;
            let lit = match operand {
                Operand::Lit(v) => v.clone(),
                Operand::Var => {
                    return Err(ExprError::NotAutoInvertible(
                        "the variable appears in a tail position".into(),
                    ))
                }
            };
            if lit.is_zero() && matches!(op, BinOp::Mul | BinOp::Div) {
                return Err(ExprError::NotAutoInvertible(
                    "multiplication or division by zero is not invertible".into(),
                ));
            }
            inverted.push((inv_op, Operand::Lit(lit)));
        }
        Ok(Expr {
            alphabet: self.alphabet.clone(),
            head: Operand::Var,
            tail: inverted,
        })
    }
}

impl std::fmt::Display for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.print())
    }
}

fn skip_ws(chars: &[char], pos: &mut usize) {
    while *pos < chars.len() && chars[*pos].is_whitespace() {
        *pos += 1;
    }
}

fn parse_operand(chars: &[char], pos: &mut usize, a: &Alphabet) -> Result<Operand, ExprError> {
    if *pos >= chars.len() {
        return Err(ExprError::SyntaxError {
            pos: *pos,
            msg: "expected an operand".into(),
        });
    }
    if chars[*pos] == 'X' {
        *pos += 1;
        return Ok(Operand::Var);
    }
    let start = *pos;
    if chars[*pos] == '-' {
        *pos += 1;
    }
    while *pos < chars.len()
        && BinOp::from_symbol(chars[*pos]).is_none()
        && !chars[*pos].is_whitespace()
    {
        *pos += 1;
    }
    let text: String = chars[start..*pos].iter().collect();
    let value = baseconv::parse(&text, a).map_err(|e| match e {
        ConvertError::Alphabet(AlphabetError::UnknownGlyph(g)) => ExprError::UnknownGlyph(g),
        ConvertError::EmptyInput => ExprError::SyntaxError {
            pos: start,
            msg: "expected an operand".into(),
        },
        other => ExprError::SyntaxError {
            pos: start,
            msg: other.to_string(),
        },
    })?;
    Ok(Operand::Lit(value))
}

/// Outcome of checking `e2(e1(x)) = x` over sampled inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InverseReport {
    /// Inputs fed through the pair, including the fixed battery.
    pub attempted: u32,
    /// Inputs outside the forward expression's domain (it errored on
    /// them); they neither pass nor fail the check.
    pub skipped: u32,
    pub counterexample: Option<Counterexample>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub input: Rational,
    pub outcome: CounterexampleKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CounterexampleKind {
    /// The composition mapped the input to a different value.
    Mapped(Rational),
    /// The inverse errored on the forward image.
    EvalFailed(String),
}

impl InverseReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

impl std::fmt::Display for InverseReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.counterexample {
            None => write!(
                f,
                "pass ({} inputs, {} outside domain)",
                self.attempted, self.skipped
            ),
            Some(ce) => match &ce.outcome {
                CounterexampleKind::Mapped(got) => {
                    write!(f, "fail: {} maps to {} through the pair", ce.input, got)
                }
                CounterexampleKind::EvalFailed(msg) => {
                    write!(f, "fail: inverse errored on image of {}: {}", ce.input, msg)
                }
            },
        }
    }
}

/// Checks that `e2` undoes `e1` on a deterministic sample stream: a fixed
/// battery (0, 1, -1, 2, 1/2) followed by `trials` seeded pseudorandom
/// rationals. Exact equality, first counterexample reported.
pub fn verify_inverse(e1: &Expr, e2: &Expr, trials: u32, seed: u64) -> InverseReport {
    let budget = Budget::default();
    let mut attempted = 0;
    let mut skipped = 0;
    let battery = [
        Rational::zero(),
        Rational::one(),
        Rational::from(-1),
        Rational::from(2),
        Rational::new(BigInt::from(1), BigInt::from(2)).expect("nonzero denominator"),
    ];
    let mut state = seed;
    let mut random = std::iter::from_fn(move || Some(sample_rational(&mut state)));
    let samples = battery
        .into_iter()
        .chain(random.by_ref().take(trials as usize));
    for x in samples {
        attempted += 1;
        let image = match e1.evaluate(&x, &budget) {
            Ok(v) => v,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        match e2.evaluate(&image, &budget) {
            Ok(back) if back == x => {}
            Ok(back) => {
                return InverseReport {
                    attempted,
                    skipped,
                    counterexample: Some(Counterexample {
                        input: x,
                        outcome: CounterexampleKind::Mapped(back),
                    }),
                }
            }
            Err(e) => {
                return InverseReport {
                    attempted,
                    skipped,
                    counterexample: Some(Counterexample {
                        input: x,
                        outcome: CounterexampleKind::EvalFailed(e.to_string()),
                    }),
                }
            }
        }
    }
    InverseReport {
        attempted,
        skipped,
        counterexample: None,
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic nonzero rational: numerator in ±[1, 2^32], denominator
/// in [1, 2^12]. Zero only ever appears via the fixed battery.
fn sample_rational(state: &mut u64) -> Rational {
    let raw = splitmix64(state);
    let num = (raw >> 16 & 0xFFFF_FFFF) as i64 + 1;
    let num = if raw & 1 == 1 { -num } else { num };
    let den = (splitmix64(state) & 0xFFF) as i64 + 1;
    Rational::new(BigInt::from(num), BigInt::from(den)).expect("nonzero denominator")
}
