//! The encryption engine: ordered, invertible transformation pipelines.
//!
//! A [`Pipeline`] threads a message through Convert / Remap / Eval steps
//! over one exact value. The defined semantics are
//! render-between-every-step; as an exactness guarantee, adjacent
//! value-level steps (Convert, Eval, Root) are threaded as a single
//! rational without intermediate rendering, which succeeds in strictly
//! more cases and agrees glyph-for-glyph wherever the naive mode does.
//! Digits are only materialized where a step genuinely needs them (Remap)
//! and at the end, where the expansion must terminate within the
//! pipeline precision, otherwise the run fails instead of silently
//! truncating. That refusal is what keeps every pipeline exactly
//! invertible.
//!
//! A [`Schedule`] applies different pipelines to consecutive segments of
//! one message, producing a framed [`Envelope`] so the segments can be
//! decrypted and reassembled.

pub mod file;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use thiserror::Error;

use crate::alphabet::Alphabet;
use crate::baseconv::{self, ConvertError, ExpansionInfo, Message};
use crate::exprlang::{verify_inverse, BinOp, Expr, ExprError, Operand};
use crate::numeric::{Budget, Rational};
use crate::remap::{RemapError, Remapping};

/// Trials and seed used when a manual inverse is verified at validation.
pub const DEFAULT_VERIFY_TRIALS: u32 = 64;
pub const DEFAULT_VERIFY_SEED: u64 = 0xBA5E;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error(transparent)]
    Convert(#[from] ConvertError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Remap(#[from] RemapError),
    #[error("{0}")]
    RootFailed(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PipelineError {
    #[error("step {step}: expected alphabet {expected}, found {found}")]
    AlphabetDiscontinuity {
        step: usize,
        expected: String,
        found: String,
    },
    #[error("step {step}: manual inverse rejected: {report}")]
    ManualInverseRejected { step: usize, report: String },
    #[error(
        "step {step}: a perfect-root inverse requires the expression to be X^k with integer k >= 1"
    )]
    RootInverseShape { step: usize },
    #[error("message alphabet does not match the pipeline input alphabet")]
    InputAlphabetMismatch,
    #[error("step {step}: {source}")]
    Step { step: usize, source: StepError },
    #[error(
        "step {step}: expansion does not terminate within precision {precision} ({info}); \
         digits are required here"
    )]
    NonTerminatingAtDigitStep {
        step: usize,
        precision: u32,
        info: ExpansionInfo,
    },
    #[error("step {step}: external step {name:?} cannot be executed")]
    ExternalStep { step: usize, name: String },
    #[error("step {step} is not invertible: {reason}")]
    NotInvertible { step: usize, reason: String },
    #[error("pipelines join at different alphabets ({left} vs {right})")]
    AlphabetMismatch { left: String, right: String },
    #[error("pipelines have different precisions ({0} vs {1})")]
    PrecisionMismatch(u32, u32),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("segmented input must be an unsigned integer message (no '.' or '-')")]
    SegmentedRequiresInteger,
    #[error("segment lengths cover {expected} glyphs but the message has {found}")]
    SegmentLengthMismatch { expected: usize, found: usize },
    #[error("segment {segment}: {source}")]
    Segment {
        segment: usize,
        source: Box<PipelineError>,
    },
    #[error("envelope does not match the schedule: {0}")]
    EnvelopeMismatch(String),
}

/// Inverse supplied for an Eval step that cannot be auto-inverted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ManualInverse {
    /// An explicit expression, verified against the forward expression at
    /// validation time.
    Expr(Expr),
    /// Invert `X^k` by taking the exact k-th root at run time; values
    /// that are not perfect k-th powers fail the run.
    PerfectRoot,
}

/// One transformation in a pipeline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    /// Numerical base conversion between two alphabets.
    Convert { from: Alphabet, to: Alphabet },
    /// Same-radix symbol substitution; forces digits to be materialized.
    Remap(Remapping),
    /// Left-to-right expression applied to the current value.
    Eval {
        expr: Expr,
        inverse: Option<ManualInverse>,
    },
    /// Exact k-th root; arises as the inverse of `X^k` evals.
    Root { degree: u32, alphabet: Alphabet },
    /// Declared extension point for plugging in foreign transforms.
    /// Representable and validatable, never executable here.
    External { name: String, alphabet: Alphabet },
}

impl Step {
    pub fn eval(expr: Expr) -> Self {
        Step::Eval {
            expr,
            inverse: None,
        }
    }

    fn input_alphabet(&self) -> &Alphabet {
        match self {
            Step::Convert { from, .. } => from,
            Step::Remap(r) => r.source(),
            Step::Eval { expr, .. } => expr.alphabet(),
            Step::Root { alphabet, .. } => alphabet,
            Step::External { alphabet, .. } => alphabet,
        }
    }

    fn output_alphabet(&self) -> &Alphabet {
        match self {
            Step::Convert { to, .. } => to,
            Step::Remap(r) => r.target(),
            Step::Eval { expr, .. } => expr.alphabet(),
            Step::Root { alphabet, .. } => alphabet,
            Step::External { alphabet, .. } => alphabet,
        }
    }

    /// Short human-readable form, used by reports and error text.
    pub fn describe(&self) -> String {
        match self {
            Step::Convert { from, to } => {
                format!("convert {} -> {}", from.descriptor(), to.descriptor())
            }
            Step::Remap(r) => format!(
                "remap {} -> {}",
                r.source().descriptor(),
                r.target().descriptor()
            ),
            Step::Eval { expr, .. } => format!("eval \"{}\"", expr.print()),
            Step::Root { degree, .. } => format!("root {degree}"),
            Step::External { name, .. } => format!("external {name}"),
        }
    }
}

/// Execution semantics selector; see the module docs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecutionMode {
    /// Thread one exact value through adjacent value-level steps.
    #[default]
    Exact,
    /// Reference semantics: render and reparse between every step.
    Rendered,
}

/// A validated sequence of steps with an input alphabet and a rendering
/// precision. Immutable after construction; executions are independent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pipeline {
    input: Alphabet,
    precision: u32,
    steps: Vec<Step>,
}

impl Pipeline {
    /// Validates alphabet continuity and manual inverses (with the
    /// default sampling parameters) and builds the pipeline.
    pub fn new(input: Alphabet, precision: u32, steps: Vec<Step>) -> Result<Self, PipelineError> {
        Self::new_seeded(
            input,
            precision,
            steps,
            DEFAULT_VERIFY_TRIALS,
            DEFAULT_VERIFY_SEED,
        )
    }

    /// As [`Pipeline::new`] with explicit manual-inverse sampling.
    pub fn new_seeded(
        input: Alphabet,
        precision: u32,
        steps: Vec<Step>,
        verify_trials: u32,
        verify_seed: u64,
    ) -> Result<Self, PipelineError> {
        let mut current = input.clone();
        for (index, step) in steps.iter().enumerate() {
            let expected = step.input_alphabet();
            if *expected != current {
                return Err(PipelineError::AlphabetDiscontinuity {
                    step: index,
                    expected: current.descriptor(),
                    found: expected.descriptor(),
                });
            }
            if let Step::Eval { expr, inverse } = step {
                match inverse {
                    Some(ManualInverse::Expr(manual)) => {
                        if manual.alphabet() != expr.alphabet() {
                            return Err(PipelineError::AlphabetDiscontinuity {
                                step: index,
                                expected: expr.alphabet().descriptor(),
                                found: manual.alphabet().descriptor(),
                            });
                        }
                        let report = verify_inverse(expr, manual, verify_trials, verify_seed);
                        if !report.passed() {
                            return Err(PipelineError::ManualInverseRejected {
                                step: index,
                                report: report.to_string(),
                            });
                        }
                    }
                    Some(ManualInverse::PerfectRoot) if power_degree(expr).is_none() => {
                        return Err(PipelineError::RootInverseShape { step: index });
                    }
                    _ => {}
                }
            }
            if let Step::Root { degree, .. } = step {
                if *degree < 1 {
                    return Err(PipelineError::RootInverseShape { step: index });
                }
            }
            current = step.output_alphabet().clone();
        }
        Ok(Pipeline {
            input,
            precision,
            steps,
        })
    }

    /// An empty pipeline: canonicalizes messages of the given alphabet.
    pub fn identity(input: Alphabet, precision: u32) -> Self {
        Pipeline {
            input,
            precision,
            steps: Vec::new(),
        }
    }

    pub fn input_alphabet(&self) -> &Alphabet {
        &self.input
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn output_alphabet(&self) -> &Alphabet {
        self.steps.last().map_or(&self.input, Step::output_alphabet)
    }

    /// Indices and names of declared external steps; nonempty means the
    /// pipeline cannot run.
    pub fn external_steps(&self) -> Vec<(usize, &str)> {
        self.steps
            .iter()
            .enumerate()
            .filter_map(|(i, s)| match s {
                Step::External { name, .. } => Some((i, name.as_str())),
                _ => None,
            })
            .collect()
    }

    pub fn is_runnable(&self) -> bool {
        self.external_steps().is_empty()
    }

    pub fn run(&self, m: &Message) -> Result<Message, PipelineError> {
        self.run_with(m, ExecutionMode::Exact, &Budget::default())
    }

    pub fn run_with(
        &self,
        m: &Message,
        mode: ExecutionMode,
        budget: &Budget,
    ) -> Result<Message, PipelineError> {
        if *m.alphabet() != self.input {
            return Err(PipelineError::InputAlphabetMismatch);
        }
        // Text states are kept canonical throughout, which is exactly what
        // the render-between-steps reference semantics would produce.
        let mut state = State::Text(m.canonical());
        for (index, step) in self.steps.iter().enumerate() {
            state = match step {
                Step::Convert { to, .. } => {
                    let value = state.into_value(index)?;
                    State::Value {
                        value,
                        alphabet: to.clone(),
                    }
                }
                Step::Eval { expr, .. } => {
                    let value = state.into_value(index)?;
                    let result =
                        expr.evaluate(&value, budget)
                            .map_err(|e| PipelineError::Step {
                                step: index,
                                source: e.into(),
                            })?;
                    State::Value {
                        value: result,
                        alphabet: expr.alphabet().clone(),
                    }
                }
                Step::Root { degree, alphabet } => {
                    let value = state.into_value(index)?;
                    let result =
                        exact_root(&value, *degree).map_err(|msg| PipelineError::Step {
                            step: index,
                            source: StepError::RootFailed(msg),
                        })?;
                    State::Value {
                        value: result,
                        alphabet: alphabet.clone(),
                    }
                }
                Step::Remap(remapping) => {
                    let message = state.into_text(index, self.precision)?;
                    let remapped = remapping.apply(&message).map_err(|e| PipelineError::Step {
                        step: index,
                        source: e.into(),
                    })?;
                    State::Text(remapped)
                }
                Step::External { name, .. } => {
                    return Err(PipelineError::ExternalStep {
                        step: index,
                        name: name.clone(),
                    })
                }
            };
            if mode == ExecutionMode::Rendered {
                state = State::Text(state.into_text(index, self.precision)?);
            }
        }
        state.into_text(self.steps.len(), self.precision)
    }

    /// Steps reversed and individually inverted: `Convert(a,b)` becomes
    /// `Convert(b,a)`, remaps swap rosters, evals use their manual inverse
    /// or the auto-derived chain inverse.
    pub fn invert(&self) -> Result<Pipeline, PipelineError> {
        let mut inverted = Vec::with_capacity(self.steps.len());
        for (index, step) in self.steps.iter().enumerate().rev() {
            let inverse = match step {
                Step::Convert { from, to } => Step::Convert {
                    from: to.clone(),
                    to: from.clone(),
                },
                Step::Remap(r) => Step::Remap(r.inverted()),
                Step::Eval { expr, inverse } => match inverse {
                    Some(ManualInverse::Expr(manual)) => Step::Eval {
                        expr: manual.clone(),
                        inverse: Some(ManualInverse::Expr(expr.clone())),
                    },
                    Some(ManualInverse::PerfectRoot) => {
                        let degree = power_degree(expr)
                            .ok_or(PipelineError::RootInverseShape { step: index })?;
                        Step::Root {
                            degree,
                            alphabet: expr.alphabet().clone(),
                        }
                    }
                    None => {
                        let inv = expr.invert().map_err(|e| PipelineError::NotInvertible {
                            step: index,
                            reason: e.to_string(),
                        })?;
                        Step::Eval {
                            expr: inv,
                            inverse: None,
                        }
                    }
                },
                Step::Root { degree, alphabet } => {
                    let expr = power_expr(alphabet.clone(), *degree).map_err(|e| {
                        PipelineError::NotInvertible {
                            step: index,
                            reason: e.to_string(),
                        }
                    })?;
                    Step::Eval {
                        expr,
                        inverse: Some(ManualInverse::PerfectRoot),
                    }
                }
                Step::External { name, .. } => {
                    return Err(PipelineError::NotInvertible {
                        step: index,
                        reason: format!("external step {name:?}"),
                    })
                }
            };
            inverted.push(inverse);
        }
        Pipeline::new(self.output_alphabet().clone(), self.precision, inverted)
    }

    /// Concatenation: running the result equals running `self` then
    /// `other`. The alphabets must join and the precisions must agree.
    pub fn compose(&self, other: &Pipeline) -> Result<Pipeline, PipelineError> {
        if self.output_alphabet() != other.input_alphabet() {
            return Err(PipelineError::AlphabetMismatch {
                left: self.output_alphabet().descriptor(),
                right: other.input_alphabet().descriptor(),
            });
        }
        if self.precision != other.precision {
            return Err(PipelineError::PrecisionMismatch(
                self.precision,
                other.precision,
            ));
        }
        let steps = self
            .steps
            .iter()
            .chain(other.steps.iter())
            .cloned()
            .collect();
        Pipeline::new(self.input.clone(), self.precision, steps)
    }

    /// One-line summary, mainly for crack reports.
    pub fn describe(&self) -> String {
        if self.steps.is_empty() {
            return format!("identity over {}", self.input.descriptor());
        }
        let steps: Vec<String> = self.steps.iter().map(Step::describe).collect();
        format!("{} | {}", self.input.descriptor(), steps.join(" | "))
    }
}

enum State {
    Text(Message),
    Value { value: Rational, alphabet: Alphabet },
}

impl State {
    fn into_value(self, step: usize) -> Result<Rational, PipelineError> {
        match self {
            State::Text(m) => {
                baseconv::parse(m.text(), m.alphabet()).map_err(|e| PipelineError::Step {
                    step,
                    source: e.into(),
                })
            }
            State::Value { value, .. } => Ok(value),
        }
    }

    fn into_text(self, step: usize, precision: u32) -> Result<Message, PipelineError> {
        match self {
            State::Text(m) => Ok(m),
            State::Value { value, alphabet } => {
                let (text, info) = baseconv::render(&value, &alphabet, precision);
                if !info.is_terminating() {
                    return Err(PipelineError::NonTerminatingAtDigitStep {
                        step,
                        precision,
                        info,
                    });
                }
                Ok(Message::from_rendered(text, alphabet))
            }
        }
    }
}

/// Returns `k` when the expression is exactly `X^k` with `k >= 1`.
fn power_degree(expr: &Expr) -> Option<u32> {
    if !matches!(expr.head(), Operand::Var) {
        return None;
    }
    match expr.tail() {
        [(BinOp::Pow, Operand::Lit(k))] => k
            .to_bigint()
            .filter(|k| k.is_positive())
            .and_then(|k| k.to_u32()),
        _ => None,
    }
}

fn power_expr(alphabet: Alphabet, degree: u32) -> Result<Expr, ExprError> {
    Expr::new(
        alphabet,
        Operand::Var,
        vec![(
            BinOp::Pow,
            Operand::Lit(Rational::from_integer(BigInt::from(degree))),
        )],
    )
}

/// Exact k-th root of a rational, or an error when none exists.
fn exact_root(v: &Rational, degree: u32) -> Result<Rational, String> {
    if degree == 0 {
        return Err("root degree must be at least 1".into());
    }
    if v.is_negative() && degree.is_multiple_of(2) {
        return Err(format!(
            "{v} has no rational {degree}-th root (negative value, even degree)"
        ));
    }
    let num = v.numer().magnitude();
    let den = v.denom().magnitude();
    let num_root = num.nth_root(degree);
    let den_root = den.nth_root(degree);
    if num_root.pow(degree) != *num || den_root.pow(degree) != *den {
        return Err(format!("{v} is not a perfect {degree}-th power"));
    }
    let mut root =
        Rational::new(BigInt::from(num_root), BigInt::from(den_root)).expect("nonzero denominator");
    if v.is_negative() {
        root = root.neg();
    }
    Ok(root)
}

/// Length of one schedule segment, counted in glyphs of the source
/// message.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentLen {
    Glyphs(usize),
    /// Absorb whatever remains; only legal in final position.
    Rest,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleEntry {
    pub len: SegmentLen,
    pub pipeline: Pipeline,
}

/// An ordered split of a message into independently-piped segments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    entries: Vec<ScheduleEntry>,
}

impl Schedule {
    pub fn new(entries: Vec<ScheduleEntry>) -> Result<Self, PipelineError> {
        if entries.is_empty() {
            return Err(PipelineError::InvalidSchedule("no segments".into()));
        }
        for (i, entry) in entries.iter().enumerate() {
            match entry.len {
                SegmentLen::Glyphs(0) => {
                    return Err(PipelineError::InvalidSchedule(format!(
                        "segment {i} has length 0"
                    )))
                }
                SegmentLen::Rest if i + 1 != entries.len() => {
                    return Err(PipelineError::InvalidSchedule(format!(
                        "open-ended segment {i} is not last"
                    )))
                }
                _ => {}
            }
        }
        Ok(Schedule { entries })
    }

    pub fn entries(&self) -> &[ScheduleEntry] {
        &self.entries
    }

    /// Splits `m` per the declared lengths and runs each segment through
    /// its pipeline. Integer messages only: a sign or radix point cannot
    /// be split across segments meaningfully.
    pub fn run(&self, m: &Message) -> Result<Envelope, PipelineError> {
        self.run_with(m, ExecutionMode::Exact, &Budget::default())
    }

    pub fn run_with(
        &self,
        m: &Message,
        mode: ExecutionMode,
        budget: &Budget,
    ) -> Result<Envelope, PipelineError> {
        if m.text().contains('.') || m.text().contains('-') {
            return Err(PipelineError::SegmentedRequiresInteger);
        }
        let glyphs: Vec<char> = m.text().chars().collect();
        let mut covered = 0usize;
        let mut pieces: Vec<&[char]> = Vec::with_capacity(self.entries.len());
        for entry in &self.entries {
            match entry.len {
                SegmentLen::Glyphs(n) => {
                    if covered + n > glyphs.len() {
                        return Err(PipelineError::SegmentLengthMismatch {
                            expected: covered + n,
                            found: glyphs.len(),
                        });
                    }
                    pieces.push(&glyphs[covered..covered + n]);
                    covered += n;
                }
                SegmentLen::Rest => {
                    if covered >= glyphs.len() {
                        return Err(PipelineError::SegmentLengthMismatch {
                            expected: covered + 1,
                            found: glyphs.len(),
                        });
                    }
                    pieces.push(&glyphs[covered..]);
                    covered = glyphs.len();
                }
            }
        }
        if covered != glyphs.len() {
            return Err(PipelineError::SegmentLengthMismatch {
                expected: covered,
                found: glyphs.len(),
            });
        }
        let mut segments = Vec::with_capacity(self.entries.len());
        for (i, (entry, piece)) in self.entries.iter().zip(&pieces).enumerate() {
            let segment_err = |e: PipelineError| PipelineError::Segment {
                segment: i,
                source: Box::new(e),
            };
            if entry.pipeline.input_alphabet() != m.alphabet() {
                return Err(segment_err(PipelineError::InputAlphabetMismatch));
            }
            let text: String = piece.iter().collect();
            let message = Message::new(text, m.alphabet().clone()).map_err(|e| {
                segment_err(PipelineError::Step {
                    step: 0,
                    source: e.into(),
                })
            })?;
            let out = entry
                .pipeline
                .run_with(&message, mode, budget)
                .map_err(segment_err)?;
            segments.push(EnvelopeSegment {
                alphabet: out.alphabet().descriptor(),
                glyphs: out.glyph_count(),
                text: out.text().to_string(),
            });
        }
        Ok(Envelope { segments })
    }

    /// Decrypt direction: inverts every pipeline, applies each to its
    /// envelope segment, re-pads fixed-length segments with zero-value
    /// glyphs to the declared input length and concatenates.
    pub fn run_inverse(&self, envelope: &Envelope) -> Result<Message, PipelineError> {
        self.run_inverse_with(envelope, ExecutionMode::Exact, &Budget::default())
    }

    pub fn run_inverse_with(
        &self,
        envelope: &Envelope,
        mode: ExecutionMode,
        budget: &Budget,
    ) -> Result<Message, PipelineError> {
        if envelope.segments.len() != self.entries.len() {
            return Err(PipelineError::EnvelopeMismatch(format!(
                "{} segments in envelope, {} in schedule",
                envelope.segments.len(),
                self.entries.len()
            )));
        }
        let mut text = String::new();
        let mut input_alphabet: Option<Alphabet> = None;
        for (i, (entry, segment)) in self.entries.iter().zip(&envelope.segments).enumerate() {
            let segment_err = |e: PipelineError| PipelineError::Segment {
                segment: i,
                source: Box::new(e),
            };
            let out_alpha = entry.pipeline.output_alphabet().clone();
            if out_alpha.descriptor() != segment.alphabet {
                return Err(PipelineError::EnvelopeMismatch(format!(
                    "segment {i} alphabet {} does not match the schedule's {}",
                    segment.alphabet,
                    out_alpha.descriptor()
                )));
            }
            if segment.text.chars().count() != segment.glyphs {
                return Err(PipelineError::EnvelopeMismatch(format!(
                    "segment {i} declares {} glyphs but carries {}",
                    segment.glyphs,
                    segment.text.chars().count()
                )));
            }
            let message = Message::new(segment.text.clone(), out_alpha)
                .map_err(|e| PipelineError::EnvelopeMismatch(format!("segment {i}: {e}")))?;
            let inverse = entry.pipeline.invert().map_err(segment_err)?;
            let out = inverse
                .run_with(&message, mode, budget)
                .map_err(segment_err)?;
            let piece = match entry.len {
                SegmentLen::Glyphs(n) => {
                    if out.text().contains('.') || out.text().contains('-') {
                        return Err(PipelineError::EnvelopeMismatch(format!(
                            "segment {i} did not decrypt to an unsigned integer"
                        )));
                    }
                    let have = out.glyph_count();
                    if have > n {
                        return Err(PipelineError::EnvelopeMismatch(format!(
                            "segment {i} decrypts to {have} glyphs, longer than its declared {n}"
                        )));
                    }
                    let zero = out.alphabet().zero_glyph();
                    let mut padded = String::new();
                    for _ in have..n {
                        padded.push(zero);
                    }
                    padded.push_str(out.text());
                    padded
                }
                SegmentLen::Rest => out.text().to_string(),
            };
            text.push_str(&piece);
            input_alphabet.get_or_insert_with(|| entry.pipeline.input_alphabet().clone());
        }
        let alphabet = input_alphabet.expect("schedule is nonempty");
        Message::new(text, alphabet).map_err(|e| PipelineError::EnvelopeMismatch(e.to_string()))
    }
}

/// Framed segmented output: per segment, the output alphabet (as a
/// self-describing descriptor), the glyph count and the text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Envelope {
    pub segments: Vec<EnvelopeSegment>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvelopeSegment {
    pub alphabet: String,
    pub glyphs: usize,
    pub text: String,
}

impl Envelope {
    pub fn to_text(&self) -> String {
        let mut out = format!("segments {}\n", self.segments.len());
        for s in &self.segments {
            out.push_str(&format!("{} {} {}\n", s.alphabet, s.glyphs, s.text));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, PipelineError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| PipelineError::EnvelopeMismatch("empty envelope".into()))?;
        let count: usize = header
            .strip_prefix("segments ")
            .and_then(|n| n.trim().parse().ok())
            .ok_or_else(|| {
                PipelineError::EnvelopeMismatch(format!("bad envelope header {header:?}"))
            })?;
        let mut segments = Vec::with_capacity(count);
        for line in lines {
            let mut fields = line.split_whitespace();
            let (alphabet, glyphs, text) = match (fields.next(), fields.next(), fields.next()) {
                (Some(a), Some(g), Some(t)) if fields.next().is_none() => (a, g, t),
                _ => {
                    return Err(PipelineError::EnvelopeMismatch(format!(
                        "bad envelope line {line:?}"
                    )))
                }
            };
            let glyphs: usize = glyphs.parse().map_err(|_| {
                PipelineError::EnvelopeMismatch(format!("bad glyph count in {line:?}"))
            })?;
            segments.push(EnvelopeSegment {
                alphabet: alphabet.to_string(),
                glyphs,
                text: text.to_string(),
            });
        }
        if segments.len() != count {
            return Err(PipelineError::EnvelopeMismatch(format!(
                "declared {count} segments, found {}",
                segments.len()
            )));
        }
        Ok(Envelope { segments })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(r: u32) -> Alphabet {
        Alphabet::builtin(r).unwrap()
    }

    fn msg(text: &str, r: u32) -> Message {
        Message::new(text, b(r)).unwrap()
    }

    fn eval_step(text: &str, r: u32) -> Step {
        Step::eval(Expr::parse(text, &b(r)).unwrap())
    }

    #[test]
    fn empty_pipeline_canonicalizes() {
        let p = Pipeline::identity(b(10), 8);
        assert_eq!(p.run(&msg("007.50", 10)).unwrap().text(), "7.5");
    }

    #[test]
    fn continuity_is_validated() {
        let err = Pipeline::new(
            b(10),
            8,
            vec![Step::Convert {
                from: b(16),
                to: b(10),
            }],
        )
        .unwrap_err();
        assert!(matches!(
            err,
            PipelineError::AlphabetDiscontinuity { step: 0, .. }
        ));
    }

    #[test]
    fn convert_then_eval_threads_exactly() {
        let p = Pipeline::new(
            b(16),
            8,
            vec![
                Step::Convert {
                    from: b(16),
                    to: b(10),
                },
                eval_step("X+1", 10),
            ],
        )
        .unwrap();
        assert_eq!(p.run(&msg("f", 16)).unwrap().text(), "16");
    }

    #[test]
    fn remap_forces_digits() {
        // 1/3 cannot be written in decimal digits, so a remap must refuse
        let p = Pipeline::new(
            b(10),
            8,
            vec![
                eval_step("X/3", 10),
                Step::Remap(Remapping::rotation(b(10), 1)),
            ],
        )
        .unwrap();
        let err = p.run(&msg("1", 10)).unwrap_err();
        assert!(matches!(
            err,
            PipelineError::NonTerminatingAtDigitStep { step: 1, .. }
        ));
        // while a plain eval chain that restores exactness succeeds
        let p = Pipeline::new(b(10), 8, vec![eval_step("X/3", 10), eval_step("X*3", 10)]).unwrap();
        assert_eq!(p.run(&msg("1", 10)).unwrap().text(), "1");
    }

    #[test]
    fn nonterminating_final_render_fails() {
        let p = Pipeline::new(b(10), 8, vec![eval_step("X/3", 10)]).unwrap();
        let err = p.run(&msg("1", 10)).unwrap_err();
        assert!(matches!(
            err,
            PipelineError::NonTerminatingAtDigitStep { step: 1, .. }
        ));
    }

    #[test]
    fn rendered_mode_agrees_when_it_succeeds() {
        let p = Pipeline::new(
            b(16),
            16,
            vec![
                Step::Convert {
                    from: b(16),
                    to: b(10),
                },
                eval_step("X*2+1", 10),
                Step::Remap(Remapping::rotation(b(10), 3)),
            ],
        )
        .unwrap();
        let m = msg("2f.8", 16);
        let exact = p.run(&m).unwrap();
        let rendered = p
            .run_with(&m, ExecutionMode::Rendered, &Budget::default())
            .unwrap();
        assert_eq!(exact, rendered);
    }

    #[test]
    fn exact_mode_succeeds_where_rendered_cannot() {
        // intermediate value 1/3 never renders, but the chain is exact
        let p = Pipeline::new(b(10), 8, vec![eval_step("X/3", 10), eval_step("X*3", 10)]).unwrap();
        let m = msg("5", 10);
        assert_eq!(p.run(&m).unwrap().text(), "5");
        assert!(p
            .run_with(&m, ExecutionMode::Rendered, &Budget::default())
            .is_err());
    }

    #[test]
    fn inversion_reverses_and_inverts() {
        let p = Pipeline::new(
            b(62),
            64,
            vec![
                Step::Convert {
                    from: b(62),
                    to: b(36),
                },
                eval_step("*4.5/6-33", 36),
            ],
        )
        .unwrap();
        let inv = p.invert().unwrap();
        assert_eq!(inv.steps().len(), 2);
        assert_eq!(inv.steps()[0].describe(), "eval \"X+33*6/4.5\"");
        assert_eq!(
            inv.steps()[1].describe(),
            "convert builtin:36 -> builtin:62"
        );
        // involution
        assert_eq!(inv.invert().unwrap(), p);
    }

    #[test]
    fn inversion_roundtrips_messages() {
        // the rotation changes the working alphabet; later steps start there
        let rotated = b(10).rotate(4);
        let p = Pipeline::new(
            b(10),
            32,
            vec![
                eval_step("X*7+13", 10),
                Step::Remap(Remapping::rotation(b(10), 4)),
                Step::Convert {
                    from: rotated,
                    to: b(16),
                },
            ],
        )
        .unwrap();
        let inv = p.invert().unwrap();
        for text in ["0", "42", "90210", "3.25"] {
            let m = msg(text, 10);
            let encrypted = p.run(&m).unwrap();
            let back = inv.run(&encrypted).unwrap();
            assert_eq!(back, m.canonical(), "roundtrip of {text}");
        }
    }

    #[test]
    fn power_steps_invert_through_roots() {
        let expr = Expr::parse("X^6", &b(10)).unwrap();
        let p = Pipeline::new(
            b(10),
            8,
            vec![Step::Eval {
                expr,
                inverse: Some(ManualInverse::PerfectRoot),
            }],
        )
        .unwrap();
        let inv = p.invert().unwrap();
        let c = p.run(&msg("4.3", 10)).unwrap();
        assert_eq!(c.text(), "6321.363049");
        assert_eq!(inv.run(&c).unwrap().text(), "4.3");
        assert_eq!(inv.invert().unwrap(), p);
        // a non-perfect power is an error, not an approximation
        assert!(matches!(
            inv.run(&msg("2", 10)).unwrap_err(),
            PipelineError::Step {
                step: 0,
                source: StepError::RootFailed(_)
            }
        ));
    }

    #[test]
    fn power_without_inverse_is_not_invertible() {
        let p = Pipeline::new(b(10), 8, vec![eval_step("X^6", 10)]).unwrap();
        assert!(matches!(
            p.invert().unwrap_err(),
            PipelineError::NotInvertible { step: 0, .. }
        ));
    }

    #[test]
    fn manual_inverses_are_verified() {
        let expr = Expr::parse("X+1", &b(10)).unwrap();
        let bogus = Expr::parse("X+1", &b(10)).unwrap();
        let err = Pipeline::new(
            b(10),
            8,
            vec![Step::Eval {
                expr,
                inverse: Some(ManualInverse::Expr(bogus)),
            }],
        )
        .unwrap_err();
        assert!(matches!(
            err,
            PipelineError::ManualInverseRejected { step: 0, .. }
        ));
    }

    #[test]
    fn external_steps_validate_but_do_not_run() {
        let p = Pipeline::new(
            b(10),
            8,
            vec![Step::External {
                name: "twofish".into(),
                alphabet: b(10),
            }],
        )
        .unwrap();
        assert!(!p.is_runnable());
        assert_eq!(p.external_steps(), vec![(0, "twofish")]);
        assert!(matches!(
            p.run(&msg("5", 10)).unwrap_err(),
            PipelineError::ExternalStep { step: 0, .. }
        ));
        assert!(matches!(
            p.invert().unwrap_err(),
            PipelineError::NotInvertible { step: 0, .. }
        ));
    }

    #[test]
    fn compose_concatenates() {
        let p1 = Pipeline::new(
            b(10),
            8,
            vec![Step::Convert {
                from: b(10),
                to: b(16),
            }],
        )
        .unwrap();
        let p2 = Pipeline::new(b(16), 8, vec![eval_step("X+1", 16)]).unwrap();
        let composed = p1.compose(&p2).unwrap();
        let m = msg("255", 10);
        assert_eq!(
            composed.run(&m).unwrap(),
            p2.run(&p1.run(&m).unwrap()).unwrap()
        );
        // identity element
        let empty = Pipeline::identity(b(16), 8);
        assert_eq!(p1.compose(&empty).unwrap(), p1);
        // and the failure modes: p1 ends in base 16, not base 10
        assert!(matches!(
            p1.compose(&p1).unwrap_err(),
            PipelineError::AlphabetMismatch { .. }
        ));
        let p3 = Pipeline::identity(b(16), 9);
        assert!(matches!(
            p2.compose(&p3).unwrap_err(),
            PipelineError::PrecisionMismatch(8, 9)
        ));
    }

    #[test]
    fn compose_is_associative() {
        let p1 = Pipeline::new(
            b(10),
            8,
            vec![Step::Convert {
                from: b(10),
                to: b(16),
            }],
        )
        .unwrap();
        let p2 = Pipeline::new(b(16), 8, vec![eval_step("X+1", 16)]).unwrap();
        let p3 = Pipeline::new(b(16), 8, vec![Step::Remap(Remapping::rotation(b(16), 5))]).unwrap();
        let left = p1.compose(&p2).unwrap().compose(&p3).unwrap();
        let right = p1.compose(&p2.compose(&p3).unwrap()).unwrap();
        assert_eq!(left, right);
    }

    #[test]
    fn convert_composition_matches_direct() {
        let via = Pipeline::new(
            b(10),
            16,
            vec![
                Step::Convert {
                    from: b(10),
                    to: b(16),
                },
                Step::Convert {
                    from: b(16),
                    to: b(36),
                },
            ],
        )
        .unwrap();
        let direct = Pipeline::new(
            b(10),
            16,
            vec![Step::Convert {
                from: b(10),
                to: b(36),
            }],
        )
        .unwrap();
        for text in ["0", "7", "123456789"] {
            let m = msg(text, 10);
            assert_eq!(via.run(&m).unwrap(), direct.run(&m).unwrap());
        }
    }

    #[test]
    fn schedule_splits_and_reassembles() {
        let first = Pipeline::new(
            b(10),
            16,
            vec![Step::Convert {
                from: b(10),
                to: b(16),
            }],
        )
        .unwrap();
        let second = Pipeline::new(b(10), 16, vec![eval_step("X*3+1", 10)]).unwrap();
        let schedule = Schedule::new(vec![
            ScheduleEntry {
                len: SegmentLen::Glyphs(4),
                pipeline: first,
            },
            ScheduleEntry {
                len: SegmentLen::Rest,
                pipeline: second,
            },
        ])
        .unwrap();
        let m = msg("0042137", 10);
        let envelope = schedule.run(&m).unwrap();
        assert_eq!(envelope.segments.len(), 2);
        assert_eq!(envelope.segments[0].text, "2a"); // 0042 -> 42 -> 0x2a
        assert_eq!(envelope.segments[1].text, "412"); // 137*3+1
        let reparsed = Envelope::parse(&envelope.to_text()).unwrap();
        assert_eq!(reparsed, envelope);
        let back = schedule.run_inverse(&reparsed).unwrap();
        assert_eq!(back.text(), "0042137"); // leading zeros restored
    }

    #[test]
    fn schedule_rejects_bad_shapes() {
        let p = Pipeline::identity(b(10), 8);
        assert!(Schedule::new(vec![]).is_err());
        assert!(Schedule::new(vec![ScheduleEntry {
            len: SegmentLen::Glyphs(0),
            pipeline: p.clone(),
        }])
        .is_err());
        assert!(Schedule::new(vec![
            ScheduleEntry {
                len: SegmentLen::Rest,
                pipeline: p.clone(),
            },
            ScheduleEntry {
                len: SegmentLen::Glyphs(1),
                pipeline: p.clone(),
            },
        ])
        .is_err());

        let schedule = Schedule::new(vec![ScheduleEntry {
            len: SegmentLen::Glyphs(3),
            pipeline: p.clone(),
        }])
        .unwrap();
        assert!(matches!(
            schedule.run(&msg("12", 10)).unwrap_err(),
            PipelineError::SegmentLengthMismatch { .. }
        ));
        assert!(matches!(
            schedule.run(&msg("1234", 10)).unwrap_err(),
            PipelineError::SegmentLengthMismatch { .. }
        ));
        assert!(matches!(
            schedule.run(&msg("-123", 10)).unwrap_err(),
            PipelineError::SegmentedRequiresInteger
        ));
        assert!(matches!(
            schedule.run(&msg("1.23", 10)).unwrap_err(),
            PipelineError::SegmentedRequiresInteger
        ));
    }

    #[test]
    fn single_rest_segment_equals_run_forward() {
        let p = Pipeline::new(b(10), 16, vec![eval_step("X*2", 10)]).unwrap();
        let schedule = Schedule::new(vec![ScheduleEntry {
            len: SegmentLen::Rest,
            pipeline: p.clone(),
        }])
        .unwrap();
        let m = msg("1234", 10);
        let envelope = schedule.run(&m).unwrap();
        assert_eq!(envelope.segments[0].text, p.run(&m).unwrap().text());
    }

    #[test]
    fn identity_schedule_keeps_halves() {
        let p = Pipeline::identity(b(10), 8);
        let schedule = Schedule::new(vec![
            ScheduleEntry {
                len: SegmentLen::Glyphs(2),
                pipeline: p.clone(),
            },
            ScheduleEntry {
                len: SegmentLen::Glyphs(2),
                pipeline: p,
            },
        ])
        .unwrap();
        let envelope = schedule.run(&msg("1234", 10)).unwrap();
        assert_eq!(envelope.segments[0].text, "12");
        assert_eq!(envelope.segments[1].text, "34");
    }
}
