//! Python bindings for the basecrypt toolkit.
//!
//! A thin layer: messages are plain strings, exact values cross the
//! boundary as `(numerator, denominator)` pairs of Python ints, and the
//! pipeline/schedule/space file formats are passed as text.

use num_bigint::BigInt;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use basecrypt::alphabet::Alphabet as CoreAlphabet;
use basecrypt::baseconv::{self, Message};
use basecrypt::cracker;
use basecrypt::exprlang::{verify_inverse, Expr as CoreExpr};
use basecrypt::numeric::{Budget, Rational};
use basecrypt::pipeline::file::{parse_pipeline_file, serialize_pipeline};
use basecrypt::pipeline::{Envelope, ExecutionMode, Pipeline as CorePipeline};
use basecrypt::remap::Remapping as CoreRemapping;

fn value_error(err: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(err.to_string())
}

fn mode_from(name: &str) -> PyResult<ExecutionMode> {
    match name {
        "exact" => Ok(ExecutionMode::Exact),
        "rendered" => Ok(ExecutionMode::Rendered),
        other => Err(value_error(format!(
            "mode must be \"exact\" or \"rendered\", not {other:?}"
        ))),
    }
}

fn rational_from(parts: (BigInt, BigInt)) -> PyResult<Rational> {
    Rational::new(parts.0, parts.1).map_err(value_error)
}

fn rational_into(v: &Rational) -> (BigInt, BigInt) {
    (v.numer().clone(), v.denom().clone())
}

/// An ordered symbol set defining a radix.
#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
struct Alphabet {
    inner: CoreAlphabet,
}

#[pymethods]
impl Alphabet {
    /// The canonical roster prefix for 2 <= radix <= 88.
    #[staticmethod]
    fn builtin(radix: u32) -> PyResult<Self> {
        Ok(Alphabet {
            inner: CoreAlphabet::builtin(radix).map_err(value_error)?,
        })
    }

    /// An explicit roster of distinct non-reserved glyphs.
    #[staticmethod]
    fn inline(glyphs: &str) -> PyResult<Self> {
        Ok(Alphabet {
            inner: CoreAlphabet::from_str_roster(glyphs).map_err(value_error)?,
        })
    }

    #[getter]
    fn radix(&self) -> u32 {
        self.inner.radix()
    }

    #[getter]
    fn glyphs(&self) -> String {
        self.inner.glyphs().iter().collect()
    }

    fn value_of(&self, glyph: char) -> PyResult<u32> {
        self.inner.value_of(glyph).map_err(value_error)
    }

    fn symbol_of(&self, value: u32) -> PyResult<char> {
        self.inner.symbol_of(value).map_err(value_error)
    }

    fn rotate(&self, k: i64) -> Alphabet {
        Alphabet {
            inner: self.inner.rotate(k),
        }
    }

    fn descriptor(&self) -> String {
        self.inner.descriptor()
    }

    fn __repr__(&self) -> String {
        format!("Alphabet({})", self.inner.descriptor())
    }

    fn __eq__(&self, other: &Alphabet) -> bool {
        self.inner == other.inner
    }
}

/// Exact positional value of a digit string: `(numerator, denominator)`.
#[pyfunction]
fn parse_value(text: &str, alphabet: &Alphabet) -> PyResult<(BigInt, BigInt)> {
    let v = baseconv::parse(text, &alphabet.inner).map_err(value_error)?;
    Ok(rational_into(&v))
}

/// Renders an exact value; returns `(text, expansion)` where expansion
/// is "terminating", "repeating (...)" or "truncated at precision".
#[pyfunction]
#[pyo3(signature = (numerator, denominator, alphabet, precision = 64))]
fn render_value(
    numerator: BigInt,
    denominator: BigInt,
    alphabet: &Alphabet,
    precision: u32,
) -> PyResult<(String, String)> {
    let v = rational_from((numerator, denominator))?;
    let (text, info) = baseconv::render(&v, &alphabet.inner, precision);
    Ok((text, info.to_string()))
}

/// Re-renders a message in another alphabet; returns `(text, expansion)`.
#[pyfunction]
#[pyo3(signature = (text, from_alphabet, to_alphabet, precision = 64))]
fn convert(
    text: &str,
    from_alphabet: &Alphabet,
    to_alphabet: &Alphabet,
    precision: u32,
) -> PyResult<(String, String)> {
    let m = Message::new(text, from_alphabet.inner.clone()).map_err(value_error)?;
    let (out, info) = baseconv::convert(&m, &to_alphabet.inner, precision).map_err(value_error)?;
    Ok((out.text().to_string(), info.to_string()))
}

/// Classifies the expansion of an exact value in a radix.
#[pyfunction]
#[pyo3(signature = (numerator, denominator, radix, cycle_budget = 65536))]
fn classify_expansion(
    numerator: BigInt,
    denominator: BigInt,
    radix: u32,
    cycle_budget: usize,
) -> PyResult<String> {
    let v = rational_from((numerator, denominator))?;
    Ok(baseconv::classify_expansion(&v, radix, cycle_budget).to_string())
}

/// A same-radix symbol substitution.
#[pyclass(frozen)]
struct Remapping {
    inner: CoreRemapping,
}

#[pymethods]
impl Remapping {
    #[new]
    fn new(source: &Alphabet, target: &Alphabet) -> PyResult<Self> {
        Ok(Remapping {
            inner: CoreRemapping::new(source.inner.clone(), target.inner.clone())
                .map_err(value_error)?,
        })
    }

    #[staticmethod]
    fn rotation(source: &Alphabet, k: i64) -> Remapping {
        Remapping {
            inner: CoreRemapping::rotation(source.inner.clone(), k),
        }
    }

    fn apply(&self, text: &str) -> PyResult<String> {
        self.inner.apply_text(text).map_err(value_error)
    }

    fn inverted(&self) -> Remapping {
        Remapping {
            inner: self.inner.inverted(),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "Remapping({} -> {})",
            self.inner.source().descriptor(),
            self.inner.target().descriptor()
        )
    }
}

/// A left-to-right operator chain over one variable X.
#[pyclass(frozen)]
struct Expr {
    inner: CoreExpr,
}

#[pymethods]
impl Expr {
    #[staticmethod]
    fn parse(text: &str, alphabet: &Alphabet) -> PyResult<Self> {
        Ok(Expr {
            inner: CoreExpr::parse(text, &alphabet.inner).map_err(value_error)?,
        })
    }

    /// Evaluates with X bound to an exact `(numerator, denominator)`.
    fn evaluate(&self, x: (BigInt, BigInt)) -> PyResult<(BigInt, BigInt)> {
        let result = self
            .inner
            .evaluate(&rational_from(x)?, &Budget::default())
            .map_err(value_error)?;
        Ok(rational_into(&result))
    }

    /// Evaluates with X bound to a message of the expression's alphabet
    /// and renders the result back in that alphabet.
    #[pyo3(signature = (text, precision = 64))]
    fn evaluate_message(&self, text: &str, precision: u32) -> PyResult<(String, String)> {
        let x = baseconv::parse(text, self.inner.alphabet()).map_err(value_error)?;
        let result = self
            .inner
            .evaluate(&x, &Budget::default())
            .map_err(value_error)?;
        let (out, info) = baseconv::render(&result, self.inner.alphabet(), precision);
        Ok((out, info.to_string()))
    }

    fn invert(&self) -> PyResult<Expr> {
        Ok(Expr {
            inner: self.inner.invert().map_err(value_error)?,
        })
    }

    /// Checks that `other` undoes this expression on sampled inputs;
    /// returns `(passed, report)`.
    #[pyo3(signature = (other, trials = 100, seed = 0))]
    fn verify_inverse(&self, other: &Expr, trials: u32, seed: u64) -> (bool, String) {
        let report = verify_inverse(&self.inner, &other.inner, trials, seed);
        (report.passed(), report.to_string())
    }

    fn __str__(&self) -> String {
        self.inner.print()
    }

    fn __repr__(&self) -> String {
        format!("Expr({:?})", self.inner.print())
    }
}

/// An ordered, invertible sequence of Convert/Remap/Eval steps.
#[pyclass(frozen)]
struct Pipeline {
    inner: CorePipeline,
}

#[pymethods]
impl Pipeline {
    /// Parses a pipeline file defining exactly one pipeline.
    #[staticmethod]
    fn from_file_text(text: &str) -> PyResult<Self> {
        let file = parse_pipeline_file(text).map_err(value_error)?;
        let pipeline = file.single_pipeline().map_err(value_error)?.clone();
        Ok(Pipeline { inner: pipeline })
    }

    #[getter]
    fn precision(&self) -> u32 {
        self.inner.precision()
    }

    #[getter]
    fn input_alphabet(&self) -> Alphabet {
        Alphabet {
            inner: self.inner.input_alphabet().clone(),
        }
    }

    #[getter]
    fn output_alphabet(&self) -> Alphabet {
        Alphabet {
            inner: self.inner.output_alphabet().clone(),
        }
    }

    #[pyo3(signature = (text, mode = "exact"))]
    fn run(&self, text: &str, mode: &str) -> PyResult<String> {
        let m = Message::new(text, self.inner.input_alphabet().clone()).map_err(value_error)?;
        let out = self
            .inner
            .run_with(&m, mode_from(mode)?, &Budget::default())
            .map_err(value_error)?;
        Ok(out.text().to_string())
    }

    fn invert(&self) -> PyResult<Pipeline> {
        Ok(Pipeline {
            inner: self.inner.invert().map_err(value_error)?,
        })
    }

    fn compose(&self, other: &Pipeline) -> PyResult<Pipeline> {
        Ok(Pipeline {
            inner: self.inner.compose(&other.inner).map_err(value_error)?,
        })
    }

    fn to_file_text(&self) -> PyResult<String> {
        serialize_pipeline(&self.inner).map_err(value_error)
    }

    fn describe(&self) -> String {
        self.inner.describe()
    }

    fn __repr__(&self) -> String {
        format!("Pipeline({})", self.inner.describe())
    }

    fn __eq__(&self, other: &Pipeline) -> bool {
        self.inner == other.inner
    }
}

/// Runs a schedule file over a message; returns the envelope text.
#[pyfunction]
fn run_segmented(schedule_text: &str, message: &str) -> PyResult<String> {
    let file = parse_pipeline_file(schedule_text).map_err(value_error)?;
    let schedule = file.schedule().map_err(value_error)?;
    let input = schedule.entries()[0].pipeline.input_alphabet().clone();
    let m = Message::new(message, input).map_err(value_error)?;
    let envelope = schedule.run(&m).map_err(value_error)?;
    Ok(envelope.to_text())
}

/// Decrypt direction of [`run_segmented`]: schedule + envelope text back
/// to the original message.
#[pyfunction]
fn run_segmented_inverse(schedule_text: &str, envelope_text: &str) -> PyResult<String> {
    let file = parse_pipeline_file(schedule_text).map_err(value_error)?;
    let schedule = file.schedule().map_err(value_error)?;
    let envelope = Envelope::parse(envelope_text).map_err(value_error)?;
    let out = schedule.run_inverse(&envelope).map_err(value_error)?;
    Ok(out.text().to_string())
}

/// Matches as `(index, description)` pairs plus the tested count and
/// elapsed seconds.
type PyCrackReport = (Vec<(u128, String)>, u128, f64);

/// Exhaustive known-pair search over a space description; returns
/// `(matches, tested, seconds)`.
#[pyfunction]
fn crack_known_pair(
    space_text: &str,
    plain: &str,
    plain_alphabet: &Alphabet,
    cipher: &str,
    cipher_alphabet: &Alphabet,
) -> PyResult<PyCrackReport> {
    let space = cracker::parse_space_file(space_text).map_err(value_error)?;
    let plain = Message::new(plain, plain_alphabet.inner.clone()).map_err(value_error)?;
    let cipher = Message::new(cipher, cipher_alphabet.inner.clone()).map_err(value_error)?;
    let report = cracker::crack_known_pair(&plain, &cipher, &space).map_err(value_error)?;
    let matches = report
        .matches
        .iter()
        .map(|m| (m.index, m.pipeline.describe()))
        .collect();
    Ok((matches, report.tested, report.elapsed.as_secs_f64()))
}

/// Candidate counts for a space description, tier by tier.
#[pyfunction]
fn cost_report(space_text: &str) -> PyResult<String> {
    let space = cracker::parse_space_file(space_text).map_err(value_error)?;
    Ok(cracker::cost_report(&space)
        .map_err(value_error)?
        .to_string())
}

#[pymodule]
fn basecrypt_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Alphabet>()?;
    m.add_class::<Remapping>()?;
    m.add_class::<Expr>()?;
    m.add_class::<Pipeline>()?;
    m.add_function(wrap_pyfunction!(parse_value, m)?)?;
    m.add_function(wrap_pyfunction!(render_value, m)?)?;
    m.add_function(wrap_pyfunction!(convert, m)?)?;
    m.add_function(wrap_pyfunction!(classify_expansion, m)?)?;
    m.add_function(wrap_pyfunction!(run_segmented, m)?)?;
    m.add_function(wrap_pyfunction!(run_segmented_inverse, m)?)?;
    m.add_function(wrap_pyfunction!(crack_known_pair, m)?)?;
    m.add_function(wrap_pyfunction!(cost_report, m)?)?;
    Ok(())
}
