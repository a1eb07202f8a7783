//! Exact-arithmetic toolkit for variable-radix symbol sets.
//!
//! Everything flows through one value domain: exact arbitrary-precision
//! rationals. A message is a digit string over an ordered symbol set (an
//! [`Alphabet`]); its meaning is the positional value of that string.
//! On top of that sit four kinds of transformation:
//!
//! * numerical base conversion between alphabets of any radix
//!   ([`baseconv`]), with configurable fractional precision and exact
//!   classification of terminating/repeating expansions,
//! * symbol remapping, a pure same-radix substitution ([`remap`]),
//! * calculator-style expression chains over one variable `X`, evaluated
//!   strictly left to right and auto-inverted where possible
//!   ([`exprlang`]),
//! * ordered pipelines of the above, invertible end to end and applicable
//!   per segment of a message stream ([`pipeline`]).
//!
//! The [`cracker`] module rounds it out with a deterministic exhaustive
//! search over bounded pipeline families, so claims about the scheme's
//! search space can be tested empirically at desk scale.
//!
//! None of this is modern cryptography and the crate claims no security
//! properties; it is an exact-arithmetic study of a classical-style
//! construction, plus the machinery to attack bounded instances of it.
//!
//! ```
//! use basecrypt::{Alphabet, Expr, Message, Pipeline, Step};
//!
//! # fn main() -> Result<(), Box<dyn std::error::Error>> {
//! // values, not glyphs: hex f is decimal 15
//! let hex = Alphabet::builtin(16)?;
//! let dec = Alphabet::builtin(10)?;
//! let m = Message::new("f", hex.clone())?;
//! let (out, _) = basecrypt::convert(&m, &dec, 64)?;
//! assert_eq!(out.text(), "15");
//!
//! // an invertible pipeline: convert, then an affine chain whose
//! // constants are read as base-36 numerals, evaluated left to right
//! let b36 = Alphabet::builtin(36)?;
//! let chain = Expr::parse("*4.5/6-33", &b36)?;
//! let pipeline = Pipeline::new(
//!     dec.clone(),
//!     64,
//!     vec![
//!         Step::Convert { from: dec.clone(), to: b36.clone() },
//!         Step::eval(chain),
//!     ],
//! )?;
//! let secret = pipeline.run(&Message::new("90210", dec)?)?;
//! let back = pipeline.invert()?.run(&secret)?;
//! assert_eq!(back.text(), "90210");
//! # Ok(())
//! # }
//! ```

pub mod alphabet;
pub mod baseconv;
pub mod cracker;
pub mod exprlang;
pub mod numeric;
pub mod pipeline;
pub mod remap;

pub use alphabet::{Alphabet, AlphabetError, SurjectiveMap};
pub use baseconv::{convert, parse, render, ExpansionInfo, Message};
pub use exprlang::{Expr, ExprError};
pub use numeric::{Budget, NumericError, Rational};
pub use pipeline::{Envelope, Pipeline, Schedule, Step};
pub use remap::Remapping;
