//! Line-oriented pipeline and schedule files.
//!
//! ```text
//! # comments run to end of line
//! precision <n>
//! alphabet <name> builtin <radix>
//! alphabet <name> inline "<glyphs>"
//! input <alphabetName>
//! step convert <fromName> <toName>
//! step remap <fromName> <toName>
//! step remap <name> rot <k>
//! step eval <alphabetName> "<expression>" [inverse "<expression>" | inverse root]
//! step root <alphabetName> <degree>
//! step external <identifier>
//! pipeline <label>
//! segment <length|rest> <pipelineLabel>
//! ```
//!
//! A file with no `pipeline` line defines one anonymous pipeline. Files
//! defining several label each with a `pipeline` section header;
//! `segment` lines (anywhere in the file) reference those labels to form
//! a schedule. A `precision` line before the first section sets the
//! default every later section inherits.
//!
//! Inline rosters cannot contain `"`; rosters that need it are reachable
//! through `builtin`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::alphabet::Alphabet;
use crate::baseconv::DEFAULT_PRECISION;
use crate::exprlang::Expr;
use crate::pipeline::{
    ManualInverse, Pipeline, PipelineError, Schedule, ScheduleEntry, SegmentLen, Step,
    DEFAULT_VERIFY_SEED, DEFAULT_VERIFY_TRIALS,
};
use crate::remap::Remapping;

/// Precision values above this are rejected as configuration mistakes.
pub const MAX_PRECISION: u32 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FileError {
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
    #[error("{context}: {source}")]
    Pipeline {
        context: String,
        source: PipelineError,
    },
    #[error("{0}")]
    Structure(String),
}

/// Everything a pipeline file declares.
#[derive(Debug, Clone)]
pub struct PipelineFile {
    pub alphabets: BTreeMap<String, Alphabet>,
    pub default_pipeline: Option<Pipeline>,
    pub pipelines: BTreeMap<String, Pipeline>,
    pub schedule: Option<Schedule>,
}

impl PipelineFile {
    /// The file's unique pipeline, for commands that expect exactly one.
    pub fn single_pipeline(&self) -> Result<&Pipeline, FileError> {
        match (&self.default_pipeline, self.pipelines.len()) {
            (Some(p), 0) => Ok(p),
            (None, 1) => Ok(self.pipelines.values().next().expect("len checked")),
            (None, 0) => Err(FileError::Structure("file defines no pipeline".into())),
            _ => Err(FileError::Structure(
                "file defines more than one pipeline; reference one by label".into(),
            )),
        }
    }

    pub fn schedule(&self) -> Result<&Schedule, FileError> {
        self.schedule
            .as_ref()
            .ok_or_else(|| FileError::Structure("file defines no segment lines".into()))
    }
}

pub fn parse_pipeline_file(text: &str) -> Result<PipelineFile, FileError> {
    parse_pipeline_file_seeded(text, DEFAULT_VERIFY_TRIALS, DEFAULT_VERIFY_SEED)
}

pub fn parse_pipeline_file_seeded(
    text: &str,
    verify_trials: u32,
    verify_seed: u64,
) -> Result<PipelineFile, FileError> {
    let mut parser = Parser {
        alphabets: BTreeMap::new(),
        finished: Vec::new(),
        current: Builder::anonymous(),
        default_precision: None,
        segments: Vec::new(),
        verify_trials,
        verify_seed,
    };
    for (idx, raw) in text.lines().enumerate() {
        parser.line(idx + 1, raw)?;
    }
    parser.finish()
}

struct Parser {
    alphabets: BTreeMap<String, Alphabet>,
    finished: Vec<(Option<String>, Pipeline)>,
    current: Builder,
    default_precision: Option<u32>,
    segments: Vec<(SegmentLen, String, usize)>,
    verify_trials: u32,
    verify_seed: u64,
}

struct Builder {
    label: Option<String>,
    precision: Option<u32>,
    input: Option<Alphabet>,
    steps: Vec<Step>,
}

impl Builder {
    fn anonymous() -> Self {
        Builder {
            label: None,
            precision: None,
            input: None,
            steps: Vec::new(),
        }
    }

    fn labeled(label: String, precision: Option<u32>) -> Self {
        Builder {
            label: Some(label),
            precision,
            input: None,
            steps: Vec::new(),
        }
    }

    fn is_empty(&self) -> bool {
        self.input.is_none() && self.steps.is_empty()
    }

    /// Alphabet the next step must start from.
    fn current_alphabet(&self) -> Option<&Alphabet> {
        self.steps
            .last()
            .map(|s| match s {
                Step::Convert { to, .. } => to,
                Step::Remap(r) => r.target(),
                Step::Eval { expr, .. } => expr.alphabet(),
                Step::Root { alphabet, .. } => alphabet,
                Step::External { alphabet, .. } => alphabet,
            })
            .or(self.input.as_ref())
    }
}

impl Parser {
    fn line(&mut self, line: usize, raw: &str) -> Result<(), FileError> {
        let err = |msg: String| FileError::Line { line, msg };
        let tokens = split_quoted(raw).map_err(|msg| FileError::Line { line, msg })?;
        if tokens.is_empty() {
            return Ok(());
        }
        let words: Vec<&str> = tokens.iter().map(|t| t.as_str()).collect();
        match words[0] {
            "precision" => {
                let [_, n] = words[..] else {
                    return Err(err("usage: precision <n>".into()));
                };
                let n: u32 = n.parse().map_err(|_| err(format!("bad precision {n:?}")))?;
                if n > MAX_PRECISION {
                    return Err(err(format!("precision {n} exceeds {MAX_PRECISION}")));
                }
                if self.current.label.is_none() && self.current.is_empty() {
                    self.default_precision = Some(n);
                }
                self.current.precision = Some(n);
            }
            "alphabet" => {
                let (name, alphabet) = match words[..] {
                    [_, name, "builtin", radix] => {
                        let radix: u32 = radix
                            .parse()
                            .map_err(|_| err(format!("bad radix {radix:?}")))?;
                        let a = Alphabet::builtin(radix).map_err(|e| err(e.to_string()))?;
                        (name, a)
                    }
                    [_, name, "inline", glyphs] => {
                        let a =
                            Alphabet::from_str_roster(glyphs).map_err(|e| err(e.to_string()))?;
                        (name, a)
                    }
                    _ => {
                        return Err(err(
                            "usage: alphabet <name> builtin <radix> | inline \"<glyphs>\"".into(),
                        ))
                    }
                };
                if self.alphabets.insert(name.to_string(), alphabet).is_some() {
                    return Err(err(format!("alphabet {name:?} declared twice")));
                }
            }
            "input" => {
                let [_, name] = words[..] else {
                    return Err(err("usage: input <alphabetName>".into()));
                };
                if self.current.input.is_some() {
                    return Err(err("input already declared for this pipeline".into()));
                }
                self.current.input = Some(self.lookup(name, line)?);
            }
            "pipeline" => {
                let [_, label] = words[..] else {
                    return Err(err("usage: pipeline <label>".into()));
                };
                self.finalize_current(line)?;
                self.current = Builder::labeled(label.to_string(), self.default_precision);
            }
            "step" => self.step(line, &words)?,
            "segment" => {
                let [_, len, label] = words[..] else {
                    return Err(err("usage: segment <length|rest> <pipelineLabel>".into()));
                };
                let len = if len == "rest" {
                    SegmentLen::Rest
                } else {
                    let n: usize = len
                        .parse()
                        .map_err(|_| err(format!("bad segment length {len:?}")))?;
                    SegmentLen::Glyphs(n)
                };
                self.segments.push((len, label.to_string(), line));
            }
            other => return Err(err(format!("unknown directive {other:?}"))),
        }
        Ok(())
    }

    fn step(&mut self, line: usize, words: &[&str]) -> Result<(), FileError> {
        let err = |msg: String| FileError::Line { line, msg };
        if self.current.input.is_none() {
            return Err(err("step declared before the pipeline's input".into()));
        }
        let step = match words {
            ["step", "convert", from, to] => Step::Convert {
                from: self.lookup(from, line)?,
                to: self.lookup(to, line)?,
            },
            ["step", "remap", name, "rot", k] => {
                let k: i64 = k.parse().map_err(|_| err(format!("bad rotation {k:?}")))?;
                Step::Remap(Remapping::rotation(self.lookup(name, line)?, k))
            }
            ["step", "remap", from, to] => {
                let remapping = Remapping::new(self.lookup(from, line)?, self.lookup(to, line)?)
                    .map_err(|e| err(e.to_string()))?;
                Step::Remap(remapping)
            }
            ["step", "eval", name, expr_text, rest @ ..] => {
                let alphabet = self.lookup(name, line)?;
                let expr = Expr::parse(expr_text, &alphabet).map_err(|e| err(e.to_string()))?;
                let inverse = match rest {
                    [] => None,
                    ["inverse", "root"] => Some(ManualInverse::PerfectRoot),
                    ["inverse", inv_text] => {
                        let inv = Expr::parse(inv_text, &alphabet)
                            .map_err(|e| err(format!("inverse: {e}")))?;
                        Some(ManualInverse::Expr(inv))
                    }
                    _ => return Err(err(
                        "usage: step eval <name> \"<expr>\" [inverse \"<expr>\" | inverse root]"
                            .into(),
                    )),
                };
                Step::Eval { expr, inverse }
            }
            ["step", "root", name, degree] => {
                let degree: u32 = degree
                    .parse()
                    .map_err(|_| err(format!("bad root degree {degree:?}")))?;
                Step::Root {
                    degree,
                    alphabet: self.lookup(name, line)?,
                }
            }
            ["step", "external", name] => {
                let alphabet = self
                    .current
                    .current_alphabet()
                    .expect("input checked above")
                    .clone();
                Step::External {
                    name: name.to_string(),
                    alphabet,
                }
            }
            _ => return Err(err(format!("unknown step form {:?}", words.join(" ")))),
        };
        self.current.steps.push(step);
        Ok(())
    }

    fn lookup(&self, name: &str, line: usize) -> Result<Alphabet, FileError> {
        self.alphabets.get(name).cloned().ok_or(FileError::Line {
            line,
            msg: format!("unknown alphabet {name:?}"),
        })
    }

    fn finalize_current(&mut self, line: usize) -> Result<(), FileError> {
        let builder = std::mem::replace(&mut self.current, Builder::anonymous());
        if builder.is_empty() {
            return Ok(());
        }
        let label = builder.label.clone();
        let context = label
            .clone()
            .map_or_else(|| "pipeline".to_string(), |l| format!("pipeline {l:?}"));
        let input = builder.input.ok_or(FileError::Line {
            line,
            msg: format!("{context} has steps but no input"),
        })?;
        let precision = builder
            .precision
            .or(self.default_precision)
            .unwrap_or(DEFAULT_PRECISION);
        let pipeline = Pipeline::new_seeded(
            input,
            precision,
            builder.steps,
            self.verify_trials,
            self.verify_seed,
        )
        .map_err(|source| FileError::Pipeline { context, source })?;
        self.finished.push((label, pipeline));
        Ok(())
    }

    fn finish(mut self) -> Result<PipelineFile, FileError> {
        self.finalize_current(0)?;
        let mut default_pipeline = None;
        let mut pipelines = BTreeMap::new();
        for (label, pipeline) in self.finished {
            match label {
                None => default_pipeline = Some(pipeline),
                Some(label) => {
                    if pipelines.insert(label.clone(), pipeline).is_some() {
                        return Err(FileError::Structure(format!(
                            "pipeline {label:?} defined twice"
                        )));
                    }
                }
            }
        }
        let schedule = if self.segments.is_empty() {
            None
        } else {
            let mut entries = Vec::with_capacity(self.segments.len());
            for (len, label, line) in self.segments {
                let pipeline = pipelines.get(&label).cloned().ok_or(FileError::Line {
                    line,
                    msg: format!("segment references unknown pipeline {label:?}"),
                })?;
                entries.push(ScheduleEntry { len, pipeline });
            }
            Some(
                Schedule::new(entries).map_err(|source| FileError::Pipeline {
                    context: "schedule".into(),
                    source,
                })?,
            )
        };
        Ok(PipelineFile {
            alphabets: self.alphabets,
            default_pipeline,
            pipelines,
            schedule,
        })
    }
}

/// Splits a line into tokens, honoring double quotes and `#` comments.
fn split_quoted(line: &str) -> Result<Vec<String>, String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut in_quotes = false;
    let mut quoted_token = false;
    for c in line.chars() {
        match c {
            '"' => {
                if in_quotes {
                    tokens.push(std::mem::take(&mut current));
                    in_quotes = false;
                } else {
                    if !current.is_empty() {
                        tokens.push(std::mem::take(&mut current));
                    }
                    in_quotes = true;
                    quoted_token = true;
                }
            }
            '#' if !in_quotes => break,
            c if c.is_whitespace() && !in_quotes => {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
            }
            c => current.push(c),
        }
    }
    if in_quotes {
        return Err("unterminated quote".into());
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    let _ = quoted_token;
    Ok(tokens)
}

/// Writes a pipeline back out in the file syntax, synthesizing alphabet
/// names. `parse` of the result reproduces the pipeline exactly.
pub fn serialize_pipeline(p: &Pipeline) -> Result<String, FileError> {
    let mut names: Vec<(Alphabet, String)> = Vec::new();
    let mut name_of = |a: &Alphabet| -> String {
        if let Some((_, name)) = names.iter().find(|(known, _)| known == a) {
            return name.clone();
        }
        let name = format!("a{}", names.len());
        names.push((a.clone(), name.clone()));
        name
    };

    let input_name = name_of(p.input_alphabet());
    let mut step_lines = Vec::new();
    for step in p.steps() {
        let line = match step {
            Step::Convert { from, to } => {
                format!("step convert {} {}", name_of(from), name_of(to))
            }
            Step::Remap(r) => format!("step remap {} {}", name_of(r.source()), name_of(r.target())),
            Step::Eval { expr, inverse } => {
                let mut line = format!(
                    "step eval {} \"{}\"",
                    name_of(expr.alphabet()),
                    expr.print()
                );
                match inverse {
                    Some(ManualInverse::Expr(inv)) => {
                        line.push_str(&format!(" inverse \"{}\"", inv.print()));
                    }
                    Some(ManualInverse::PerfectRoot) => line.push_str(" inverse root"),
                    None => {}
                }
                line
            }
            Step::Root { degree, alphabet } => {
                format!("step root {} {}", name_of(alphabet), degree)
            }
            Step::External { name, .. } => format!("step external {name}"),
        };
        step_lines.push(line);
    }

    let mut out = String::new();
    out.push_str(&format!("precision {}\n", p.precision()));
    for (alphabet, name) in &names {
        let desc = alphabet.descriptor();
        if let Some(radix) = desc.strip_prefix("builtin:") {
            out.push_str(&format!("alphabet {name} builtin {radix}\n"));
        } else {
            let roster: String = alphabet.glyphs().iter().collect();
            if roster.contains('"') {
                return Err(FileError::Structure(format!(
                    "alphabet {name} contains '\"' and cannot be written inline"
                )));
            }
            out.push_str(&format!("alphabet {name} inline \"{roster}\"\n"));
        }
    }
    out.push_str(&format!("input {input_name}\n"));
    for line in step_lines {
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}
