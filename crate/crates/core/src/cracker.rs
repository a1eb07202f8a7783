//! Exhaustive search over bounded pipeline families.
//!
//! The search space is deliberately finite: candidate pipelines are built
//! from built-in rosters, rotation remaps and affine operator chains with
//! bounded rational constants, up to a step limit. Enumeration ascends by
//! description size: step count first, then input radix, then slot order
//! within a step (conversions by target radix, rotations by offset,
//! affine ops `+ - * /` by ascending constant), the way one enumerates
//! keys of unknown length: all 1-unit keys, then all 2-unit keys, and so
//! on. The stream is deterministic, duplicate-free and restartable
//! from any index, which is what makes parallel search reproducible.
//!
//! This exists to make claims about the scheme's attack surface testable
//! at desk scale: [`crack_known_pair`] recovers planted pipelines from a
//! known plaintext/ciphertext pair, and [`cost_report`] shows exactly how
//! fast the candidate counts blow up as the bounds grow.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use rayon::prelude::*;
use thiserror::Error;

use crate::alphabet::{Alphabet, BUILTIN_MAX_RADIX};
use crate::baseconv::{Message, DEFAULT_PRECISION};
use crate::exprlang::{BinOp, Expr, Operand};
use crate::numeric::{Budget, Rational};
use crate::pipeline::{Pipeline, Step};
use crate::remap::Remapping;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error("radix {0} has no built-in roster (supported 2..={max})", max = BUILTIN_MAX_RADIX)]
    BadRadix(u32),
    #[error("max-den must be at least 1")]
    ZeroDenominator,
    #[error("affine op set may only contain + - * /")]
    BadAffineOp,
    #[error("search space too large to index")]
    Overflow,
    #[error("space file line {line}: {msg}")]
    File { line: usize, msg: String },
}

/// Which step families the space draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum StepTemplate {
    Convert,
    RemapRotation,
    EvalAffine,
}

/// A bounded, deterministically enumerable family of pipelines.
///
/// Every dimension an attacker would have to guess is a finite bound
/// here: the candidate radices (input and conversion targets), whether
/// arrangements may be rotated, which affine ops and constants evals may
/// use, and the step count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchSpace {
    radices: Vec<u32>,
    templates: Vec<StepTemplate>,
    affine_ops: Vec<BinOp>,
    max_numerator: u64,
    max_denominator: u64,
    max_steps: usize,
    precision: u32,
}

impl SearchSpace {
    pub fn new(
        radices: impl IntoIterator<Item = u32>,
        templates: impl IntoIterator<Item = StepTemplate>,
        max_numerator: u64,
        max_denominator: u64,
        max_steps: usize,
    ) -> Result<Self, SpaceError> {
        Self::with_ops(
            radices,
            templates,
            [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div],
            max_numerator,
            max_denominator,
            max_steps,
        )
    }

    /// As [`SearchSpace::new`] but restricting which affine operators
    /// appear (e.g. only `+` and `*`).
    pub fn with_ops(
        radices: impl IntoIterator<Item = u32>,
        templates: impl IntoIterator<Item = StepTemplate>,
        affine_ops: impl IntoIterator<Item = BinOp>,
        max_numerator: u64,
        max_denominator: u64,
        max_steps: usize,
    ) -> Result<Self, SpaceError> {
        let mut radices: Vec<u32> = radices.into_iter().collect();
        radices.sort_unstable();
        radices.dedup();
        for &r in &radices {
            if !(2..=BUILTIN_MAX_RADIX).contains(&r) {
                return Err(SpaceError::BadRadix(r));
            }
        }
        let mut templates: Vec<StepTemplate> = templates.into_iter().collect();
        templates.sort_unstable();
        templates.dedup();
        let canonical = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div];
        let requested: Vec<BinOp> = affine_ops.into_iter().collect();
        if requested.iter().any(|op| !canonical.contains(op)) {
            return Err(SpaceError::BadAffineOp);
        }
        let affine_ops: Vec<BinOp> = canonical
            .into_iter()
            .filter(|op| requested.contains(op))
            .collect();
        if max_denominator == 0 {
            return Err(SpaceError::ZeroDenominator);
        }
        Ok(SearchSpace {
            radices,
            templates,
            affine_ops,
            max_numerator,
            max_denominator,
            max_steps,
            precision: DEFAULT_PRECISION,
        })
    }

    pub fn with_precision(mut self, precision: u32) -> Self {
        self.precision = precision;
        self
    }

    pub fn radices(&self) -> &[u32] {
        &self.radices
    }

    pub fn max_steps(&self) -> usize {
        self.max_steps
    }

    fn has(&self, t: StepTemplate) -> bool {
        self.templates.contains(&t)
    }

    /// The nonnegative constants `p/q` in reduced form, ascending by
    /// value, with `p <= max_numerator` and `q <= max_denominator`.
    fn constants(&self) -> Vec<Rational> {
        let mut consts = Vec::new();
        for p in 0..=self.max_numerator {
            for q in 1..=self.max_denominator {
                if gcd(p, q) == 1 {
                    consts.push(
                        Rational::new(BigInt::from(p), BigInt::from(q))
                            .expect("nonzero denominator"),
                    );
                }
                if p == 0 {
                    break; // zero is only 0/1
                }
            }
        }
        consts.sort_by(|a, b| a.compare(b));
        consts
    }

    fn plan(&self) -> Result<Plan, SpaceError> {
        Plan::build(self)
    }

    /// Candidate count across the whole space.
    pub fn total(&self) -> Result<u128, SpaceError> {
        Ok(self.plan()?.total)
    }

    /// The full deterministic stream, identity pipelines first.
    pub fn enumerate(&self) -> Result<impl Iterator<Item = Pipeline> + '_, SpaceError> {
        self.enumerate_from(0)
    }

    /// Restart the stream from an index (for partitioned search).
    pub fn enumerate_from(
        &self,
        start: u128,
    ) -> Result<impl Iterator<Item = Pipeline> + '_, SpaceError> {
        let plan = self.plan()?;
        let total = plan.total;
        Ok((start..total).map(move |i| plan.decode(i)))
    }

    /// Decodes the pipeline at a given enumeration index.
    pub fn pipeline_at(&self, index: u128) -> Result<Option<Pipeline>, SpaceError> {
        let plan = self.plan()?;
        Ok((index < plan.total).then(|| plan.decode(index)))
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Precomputed enumeration tables: `counts[j][radix]` is the number of
/// j-step pipelines starting from that radix.
struct Plan {
    radices: Vec<u32>,
    consts: Vec<Rational>,
    nonzero_at: usize,
    affine_ops: Vec<BinOp>,
    has_convert: bool,
    has_rotation: bool,
    has_affine: bool,
    counts: Vec<BTreeMap<u32, u128>>,
    tier_sizes: Vec<u128>,
    total: u128,
    precision: u32,
}

impl Plan {
    fn build(space: &SearchSpace) -> Result<Plan, SpaceError> {
        let consts = if space.has(StepTemplate::EvalAffine) {
            space.constants()
        } else {
            Vec::new()
        };
        let nonzero_at = usize::from(consts.first().is_some_and(Rational::is_zero));
        let has_affine = space.has(StepTemplate::EvalAffine) && !space.affine_ops.is_empty();
        let affine_slots: u128 = if has_affine {
            space
                .affine_ops
                .iter()
                .map(|op| match op {
                    BinOp::Add | BinOp::Sub => consts.len() as u128,
                    _ => (consts.len() - nonzero_at) as u128,
                })
                .sum()
        } else {
            0
        };

        let mut counts: Vec<BTreeMap<u32, u128>> = vec![BTreeMap::new()];
        for &r in &space.radices {
            counts[0].insert(r, 1);
        }
        let checked = |v: Option<u128>| v.ok_or(SpaceError::Overflow);
        for j in 1..=space.max_steps {
            let prev = &counts[j - 1];
            let convert_sum: u128 = if space.has(StepTemplate::Convert) {
                let mut sum = 0u128;
                for &s in &space.radices {
                    sum = checked(sum.checked_add(prev[&s]))?;
                }
                sum
            } else {
                0
            };
            let mut level = BTreeMap::new();
            for &r in &space.radices {
                let same = prev[&r];
                let mut n = convert_sum;
                if space.has(StepTemplate::RemapRotation) {
                    n = checked(n.checked_add(checked((r as u128 - 1).checked_mul(same))?))?;
                }
                if has_affine {
                    n = checked(n.checked_add(checked(affine_slots.checked_mul(same))?))?;
                }
                level.insert(r, n);
            }
            counts.push(level);
        }

        // a space with no step families is vacuous: nothing is
        // enumerated, not even identities
        let vacuous = space.templates.is_empty() || space.radices.is_empty();
        let mut tier_sizes = Vec::with_capacity(space.max_steps + 1);
        let mut total = 0u128;
        for level in counts.iter() {
            let tier = if vacuous {
                0
            } else {
                let mut sum = 0u128;
                for &n in level.values() {
                    sum = checked(sum.checked_add(n))?;
                }
                sum
            };
            tier_sizes.push(tier);
            total = checked(total.checked_add(tier))?;
        }

        Ok(Plan {
            radices: space.radices.clone(),
            consts,
            nonzero_at,
            affine_ops: space.affine_ops.clone(),
            has_convert: space.has(StepTemplate::Convert),
            has_rotation: space.has(StepTemplate::RemapRotation),
            has_affine,
            counts,
            tier_sizes,
            total,
            precision: space.precision,
        })
    }

    fn decode(&self, index: u128) -> Pipeline {
        assert!(index < self.total, "index beyond the enumeration");
        let mut rem = index;
        let mut steps_wanted = 0usize;
        for (k, &tier) in self.tier_sizes.iter().enumerate() {
            if rem < tier {
                steps_wanted = k;
                break;
            }
            rem -= tier;
        }
        let mut radix = self.radices[0];
        for &r in &self.radices {
            let n = self.counts[steps_wanted][&r];
            if rem < n {
                radix = r;
                break;
            }
            rem -= n;
        }
        let input = Alphabet::builtin(radix).expect("validated radix");
        let mut alphabet = input.clone();
        let mut steps = Vec::with_capacity(steps_wanted);
        for depth in 0..steps_wanted {
            let j = steps_wanted - depth - 1; // steps remaining after this one
            let (step, next_alphabet, next_rem) = self.pick_slot(&alphabet, j, rem);
            steps.push(step);
            alphabet = next_alphabet;
            rem = next_rem;
        }
        debug_assert_eq!(rem, 0);
        Pipeline::new(input, self.precision, steps).expect("enumerated pipelines are valid")
    }

    fn pick_slot(&self, alphabet: &Alphabet, j: usize, mut rem: u128) -> (Step, Alphabet, u128) {
        let r = alphabet.radix();
        if self.has_convert {
            for &s in &self.radices {
                let n = self.counts[j][&s];
                if rem < n {
                    let to = Alphabet::builtin(s).expect("validated radix");
                    let step = Step::Convert {
                        from: alphabet.clone(),
                        to: to.clone(),
                    };
                    return (step, to, rem);
                }
                rem -= n;
            }
        }
        let per = self.counts[j][&r];
        if self.has_rotation {
            let section = (r as u128 - 1) * per;
            if rem < section {
                let k = (rem / per) as i64 + 1;
                let remapping = Remapping::rotation(alphabet.clone(), k);
                let target = remapping.target().clone();
                return (Step::Remap(remapping), target, rem % per);
            }
            rem -= section;
        }
        debug_assert!(self.has_affine);
        let slot = (rem / per) as usize;
        rem %= per;
        let mut offset = slot;
        for &op in &self.affine_ops {
            let section = match op {
                BinOp::Add | BinOp::Sub => self.consts.len(),
                _ => self.consts.len() - self.nonzero_at,
            };
            if offset < section {
                let constant = match op {
                    BinOp::Add | BinOp::Sub => &self.consts[offset],
                    _ => &self.consts[offset + self.nonzero_at],
                };
                let expr = affine_expr(alphabet.clone(), op, constant);
                return (Step::eval(expr), alphabet.clone(), rem);
            }
            offset -= section;
        }
        unreachable!("slot index beyond the affine section");
    }
}

/// Builds the left-to-right chain for one affine op with constant `p/q`.
/// Non-integer constants expand into integer-literal chains, since `p/q`
/// itself may have no finite numeral in the step alphabet:
///
/// * `+ p/q` -> `X*q+p/q`
/// * `- p/q` -> `X*q-p/q`
/// * `* p/q` -> `X*p/q`
/// * `/ p/q` -> `X/p*q`
fn affine_expr(alphabet: Alphabet, op: BinOp, constant: &Rational) -> Expr {
    let p = Rational::from_integer(constant.numer().clone());
    let q = Rational::from_integer(constant.denom().clone());
    let integral = constant.is_integer();
    let tail = match op {
        BinOp::Add | BinOp::Sub if integral => vec![(op, Operand::Lit(p))],
        BinOp::Add | BinOp::Sub => vec![
            (BinOp::Mul, Operand::Lit(q.clone())),
            (op, Operand::Lit(p)),
            (BinOp::Div, Operand::Lit(q)),
        ],
        BinOp::Mul if integral => vec![(BinOp::Mul, Operand::Lit(p))],
        BinOp::Mul => vec![(BinOp::Mul, Operand::Lit(p)), (BinOp::Div, Operand::Lit(q))],
        BinOp::Div if integral => vec![(BinOp::Div, Operand::Lit(p))],
        BinOp::Div => vec![(BinOp::Div, Operand::Lit(p)), (BinOp::Mul, Operand::Lit(q))],
        BinOp::Pow => unreachable!("pow is outside the affine family"),
    };
    Expr::new(alphabet, Operand::Var, tail).expect("integer literals are always representable")
}

/// One confirmed preimage: an enumeration index and its pipeline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrackMatch {
    pub index: u128,
    pub pipeline: Pipeline,
}

/// Everything a known-pair search produced.
#[derive(Debug, Clone)]
pub struct CrackReport {
    pub matches: Vec<CrackMatch>,
    pub tested: u128,
    pub elapsed: Duration,
}

impl CrackReport {
    /// Machine-readable lines: `match <index> <pipeline-one-liner>`.
    pub fn match_lines(&self) -> Vec<String> {
        self.matches
            .iter()
            .map(|m| format!("match {} {}", m.index, m.pipeline.describe()))
            .collect()
    }
}

impl std::fmt::Display for CrackReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "tested {} candidates in {:.3}s: {} match(es)",
            self.tested,
            self.elapsed.as_secs_f64(),
            self.matches.len()
        )?;
        for line in self.match_lines() {
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

const CRACK_CHUNK: u128 = 1024;

/// Tests every pipeline in the space against one known
/// plaintext/ciphertext pair. A match is exact glyph equality of the
/// candidate's output with the ciphertext; candidates that error merely
/// disqualify themselves. Matches are re-verified and reported in
/// enumeration order regardless of how the work was partitioned.
pub fn crack_known_pair(
    plain: &Message,
    cipher: &Message,
    space: &SearchSpace,
) -> Result<CrackReport, SpaceError> {
    let started = Instant::now();
    let plan = space.plan()?;
    let total = plan.total;
    let budget = Budget::default();
    let chunk_count = total.div_ceil(CRACK_CHUNK) as usize;
    let mut matches: Vec<CrackMatch> = (0..chunk_count)
        .into_par_iter()
        .flat_map_iter(|chunk| {
            let start = chunk as u128 * CRACK_CHUNK;
            let end = (start + CRACK_CHUNK).min(total);
            let plan = &plan;
            let budget = &budget;
            (start..end).filter_map(move |index| {
                let pipeline = plan.decode(index);
                if pipeline.input_alphabet() != plain.alphabet() {
                    return None;
                }
                match pipeline.run_with(plain, Default::default(), budget) {
                    Ok(out) if out.text() == cipher.text() => Some(CrackMatch { index, pipeline }),
                    _ => None,
                }
            })
        })
        .collect();
    matches.sort_by_key(|m| m.index);
    // re-verify each match sequentially before reporting it
    matches.retain(|m| {
        m.pipeline
            .run(plain)
            .map(|out| out.text() == cipher.text())
            .unwrap_or(false)
    });
    Ok(CrackReport {
        matches,
        tested: total,
        elapsed: started.elapsed(),
    })
}

/// Exact candidate counts per (step count, input radix) tier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostReport {
    pub tiers: Vec<TierCount>,
    pub total: u128,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TierCount {
    pub steps: usize,
    pub radix: u32,
    pub count: u128,
}

impl CostReport {
    /// Candidates in one step tier across all radices.
    pub fn tier_total(&self, steps: usize) -> u128 {
        self.tiers
            .iter()
            .filter(|t| t.steps == steps)
            .map(|t| t.count)
            .sum()
    }

    /// Candidates in tiers up to and including `steps`.
    pub fn cumulative(&self, steps: usize) -> u128 {
        (0..=steps).map(|k| self.tier_total(k)).sum()
    }
}

impl std::fmt::Display for CostReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let max_steps = self.tiers.iter().map(|t| t.steps).max().unwrap_or(0);
        let mut cumulative = 0u128;
        for k in 0..=max_steps {
            let tier = self.tier_total(k);
            cumulative += tier;
            write!(f, "steps {k}: {tier} candidate(s), cumulative {cumulative}")?;
            let per: Vec<String> = self
                .tiers
                .iter()
                .filter(|t| t.steps == k)
                .map(|t| format!("radix {}: {}", t.radix, t.count))
                .collect();
            if per.len() > 1 {
                write!(f, " ({})", per.join(", "))?;
            }
            writeln!(f)?;
        }
        write!(f, "total: {}", self.total)
    }
}

/// Sizes the space without enumerating it, tier by tier, so the growth
/// an unknown-length search faces is visible up front.
pub fn cost_report(space: &SearchSpace) -> Result<CostReport, SpaceError> {
    let plan = space.plan()?;
    let vacuous = plan.total == 0;
    let mut tiers = Vec::new();
    for (k, level) in plan.counts.iter().enumerate() {
        for (&radix, &count) in level {
            tiers.push(TierCount {
                steps: k,
                radix,
                count: if vacuous { 0 } else { count },
            });
        }
    }
    Ok(CostReport {
        tiers,
        total: plan.total,
    })
}

/// Parses the line-oriented space description:
///
/// ```text
/// radices 16 36 62
/// templates affine convert rot
/// affine-ops + *          # optional, default + - * /
/// constants max-num 100 max-den 10
/// max-steps 2
/// precision 64            # optional
/// ```
pub fn parse_space_file(text: &str) -> Result<SearchSpace, SpaceError> {
    let mut radices: Option<Vec<u32>> = None;
    let mut templates: Option<Vec<StepTemplate>> = None;
    let mut ops: Option<Vec<BinOp>> = None;
    let mut max_num = 9u64;
    let mut max_den = 1u64;
    let mut max_steps: Option<usize> = None;
    let mut precision: Option<u32> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |msg: String| SpaceError::File { line, msg };
        let content = raw.split('#').next().unwrap_or("");
        let words: Vec<&str> = content.split_whitespace().collect();
        if words.is_empty() {
            continue;
        }
        match words[0] {
            "radices" => {
                let mut rs = Vec::new();
                for w in &words[1..] {
                    rs.push(w.parse().map_err(|_| err(format!("bad radix {w:?}")))?);
                }
                if rs.is_empty() {
                    return Err(err("radices line lists none".into()));
                }
                radices = Some(rs);
            }
            "templates" => {
                let mut ts = Vec::new();
                for w in &words[1..] {
                    ts.push(match *w {
                        "convert" => StepTemplate::Convert,
                        "rot" => StepTemplate::RemapRotation,
                        "affine" => StepTemplate::EvalAffine,
                        other => return Err(err(format!("unknown template {other:?}"))),
                    });
                }
                templates = Some(ts);
            }
            "affine-ops" => {
                let mut os = Vec::new();
                for w in &words[1..] {
                    let op = w
                        .chars()
                        .next()
                        .filter(|_| w.len() == 1)
                        .and_then(BinOp::from_symbol)
                        .filter(|op| *op != BinOp::Pow)
                        .ok_or_else(|| err(format!("bad affine op {w:?}")))?;
                    os.push(op);
                }
                ops = Some(os);
            }
            "constants" => match words[..] {
                [_, "max-num", n, "max-den", d] => {
                    max_num = n.parse().map_err(|_| err(format!("bad max-num {n:?}")))?;
                    max_den = d.parse().map_err(|_| err(format!("bad max-den {d:?}")))?;
                }
                _ => return Err(err("usage: constants max-num <n> max-den <d>".into())),
            },
            "max-steps" => {
                let [_, n] = words[..] else {
                    return Err(err("usage: max-steps <n>".into()));
                };
                max_steps = Some(n.parse().map_err(|_| err(format!("bad max-steps {n:?}")))?);
            }
            "precision" => {
                let [_, n] = words[..] else {
                    return Err(err("usage: precision <n>".into()));
                };
                precision = Some(n.parse().map_err(|_| err(format!("bad precision {n:?}")))?);
            }
            other => return Err(err(format!("unknown directive {other:?}"))),
        }
    }

    let radices = radices.ok_or(SpaceError::File {
        line: 0,
        msg: "missing radices line".into(),
    })?;
    let templates = templates.ok_or(SpaceError::File {
        line: 0,
        msg: "missing templates line".into(),
    })?;
    let max_steps = max_steps.ok_or(SpaceError::File {
        line: 0,
        msg: "missing max-steps line".into(),
    })?;
    let space = match ops {
        Some(ops) => SearchSpace::with_ops(radices, templates, ops, max_num, max_den, max_steps)?,
        None => SearchSpace::new(radices, templates, max_num, max_den, max_steps)?,
    };
    Ok(match precision {
        Some(p) => space.with_precision(p),
        None => space,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn affine_only(max_num: u64, max_steps: usize) -> SearchSpace {
        SearchSpace::new([10], [StepTemplate::EvalAffine], max_num, 1, max_steps).unwrap()
    }

    fn msg(text: &str, r: u32) -> Message {
        Message::new(text, Alphabet::builtin(r).unwrap()).unwrap()
    }

    #[test]
    fn one_step_affine_count_is_38() {
        // independent count: 10 (+c) + 10 (-c) + 9 (*c) + 9 (/c)
        let expected = 10 + 10 + 9 + 9;
        assert_eq!(expected, 38);
        let space = affine_only(9, 1);
        assert_eq!(space.total().unwrap(), 1 + 38);
        let report = cost_report(&space).unwrap();
        assert_eq!(report.tier_total(0), 1);
        assert_eq!(report.tier_total(1), 38);
    }

    #[test]
    fn declared_order_of_affine_slots() {
        let space = affine_only(9, 1);
        let all: Vec<Pipeline> = space.enumerate().unwrap().collect();
        assert_eq!(all.len(), 39);
        // identity first
        assert_eq!(all[0].steps().len(), 0);
        // then +0..+9, -0..-9, *1..*9, /1../9
        assert_eq!(all[1].describe(), "builtin:10 | eval \"X+0\"");
        assert_eq!(all[10].describe(), "builtin:10 | eval \"X+9\"");
        assert_eq!(all[11].describe(), "builtin:10 | eval \"X-0\"");
        assert_eq!(all[21].describe(), "builtin:10 | eval \"X*1\"");
        assert_eq!(all[30].describe(), "builtin:10 | eval \"X/1\"");
        assert_eq!(all[38].describe(), "builtin:10 | eval \"X/9\"");
    }

    #[test]
    fn empty_template_set_is_an_empty_stream() {
        let space = SearchSpace::new([10], [], 9, 1, 3).unwrap();
        assert_eq!(space.total().unwrap(), 0);
        assert_eq!(space.enumerate().unwrap().count(), 0);
    }

    #[test]
    fn enumeration_has_no_duplicates() {
        let space = SearchSpace::new(
            [5, 10],
            [
                StepTemplate::Convert,
                StepTemplate::RemapRotation,
                StepTemplate::EvalAffine,
            ],
            3,
            2,
            2,
        )
        .unwrap();
        let mut seen = std::collections::HashSet::new();
        let mut count = 0u128;
        for p in space.enumerate().unwrap() {
            assert!(seen.insert(p.describe()), "duplicate: {}", p.describe());
            count += 1;
        }
        assert_eq!(count, space.total().unwrap());
    }

    #[test]
    fn enumeration_restarts_from_any_index() {
        let space = affine_only(5, 2);
        let all: Vec<Pipeline> = space.enumerate().unwrap().collect();
        let tail: Vec<Pipeline> = space.enumerate_from(20).unwrap().collect();
        assert_eq!(&all[20..], &tail[..]);
    }

    #[test]
    fn rational_constants_are_reduced_and_ordered() {
        let space = SearchSpace::new([10], [StepTemplate::EvalAffine], 3, 2, 1).unwrap();
        let consts = space.constants();
        let rendered: Vec<String> = consts.iter().map(|c| c.to_string()).collect();
        assert_eq!(rendered, ["0", "1/2", "1", "3/2", "2", "3"]);
    }

    #[test]
    fn fractional_constants_expand_to_integer_chains() {
        let space = SearchSpace::new([10], [StepTemplate::EvalAffine], 3, 2, 1).unwrap();
        let descriptions: Vec<String> = space.enumerate().unwrap().map(|p| p.describe()).collect();
        // multiplication by 1/2 and division by 1/2 stay structurally
        // distinct even though X*1/2 and X/2 agree pointwise
        assert!(descriptions.contains(&"builtin:10 | eval \"X*1/2\"".to_string()));
        assert!(descriptions.contains(&"builtin:10 | eval \"X/1*2\"".to_string()));
        // additive fractional constants use the multiply-add-divide chain
        assert!(descriptions.contains(&"builtin:10 | eval \"X*2+1/2\"".to_string()));
    }

    #[test]
    fn planted_additive_pipeline_is_recovered_uniquely() {
        // 5 + 7 = 12, checked by hand
        let space = SearchSpace::with_ops([10], [StepTemplate::EvalAffine], [BinOp::Add], 99, 1, 1)
            .unwrap();
        let plain = msg("5", 10);
        let cipher = msg("12", 10);
        let report = crack_known_pair(&plain, &cipher, &space).unwrap();
        assert_eq!(report.matches.len(), 1);
        assert_eq!(
            report.matches[0].pipeline.describe(),
            "builtin:10 | eval \"X+7\""
        );
        assert_eq!(report.tested, space.total().unwrap());
    }

    #[test]
    fn identity_pair_demonstrates_multiple_preimages() {
        let space = SearchSpace::with_ops(
            [10],
            [StepTemplate::EvalAffine],
            [BinOp::Add, BinOp::Mul],
            9,
            1,
            1,
        )
        .unwrap();
        let m = msg("5", 10);
        let report = crack_known_pair(&m, &m, &space).unwrap();
        let found: Vec<String> = report
            .matches
            .iter()
            .map(|m| m.pipeline.describe())
            .collect();
        assert_eq!(
            found,
            [
                "identity over builtin:10",
                "builtin:10 | eval \"X+0\"",
                "builtin:10 | eval \"X*1\""
            ]
        );
    }

    #[test]
    fn unreachable_cipher_has_no_matches() {
        let space =
            SearchSpace::with_ops([10], [StepTemplate::EvalAffine], [BinOp::Add], 9, 1, 1).unwrap();
        let report = crack_known_pair(&msg("5", 10), &msg("999", 10), &space).unwrap();
        assert!(report.matches.is_empty());
    }

    #[test]
    fn crack_is_deterministic() {
        let space = SearchSpace::new(
            [10, 16],
            [StepTemplate::EvalAffine, StepTemplate::Convert],
            9,
            2,
            2,
        )
        .unwrap();
        let plain = msg("5", 10);
        let planted = space.pipeline_at(57).unwrap().unwrap();
        let cipher = planted.run(&plain).unwrap();
        let a = crack_known_pair(&plain, &cipher, &space).unwrap();
        let b = crack_known_pair(&plain, &cipher, &space).unwrap();
        assert_eq!(a.matches, b.matches);
        assert_eq!(a.tested, b.tested);
        assert!(a.matches.iter().any(|m| m.index == 57));
    }

    #[test]
    fn doubling_steps_at_least_squares_the_tier() {
        let space = affine_only(9, 4);
        let report = cost_report(&space).unwrap();
        let t1 = report.tier_total(1);
        let t2 = report.tier_total(2);
        let t4 = report.tier_total(4);
        assert_eq!(t2, t1 * t1);
        assert_eq!(t4, t2 * t2);
        assert!(report.cumulative(2) >= t1 * t1);
        assert!(report.cumulative(4) >= t2 * t2);
    }

    #[test]
    fn space_file_roundtrip() {
        let text = "
# a demo space
radices 16 36 62
templates affine convert rot
constants max-num 100 max-den 10
max-steps 2
";
        let space = parse_space_file(text).unwrap();
        assert_eq!(space.radices(), [16, 36, 62]);
        assert_eq!(space.max_steps(), 2);
        assert!(space.total().unwrap() > 0);

        let restricted = parse_space_file(
            "radices 10\ntemplates affine\naffine-ops + *\nconstants max-num 9 max-den 1\nmax-steps 1\n",
        )
        .unwrap();
        // 10 additive + 9 multiplicative (+ identity)
        assert_eq!(restricted.total().unwrap(), 1 + 19);
    }

    #[test]
    fn space_file_errors() {
        assert!(matches!(
            parse_space_file("radices 10\n"),
            Err(SpaceError::File { .. })
        ));
        assert!(matches!(
            parse_space_file("radices 500\ntemplates affine\nmax-steps 1\n"),
            Err(SpaceError::BadRadix(500))
        ));
        assert!(matches!(
            parse_space_file("radices 10\ntemplates sponge\nmax-steps 1\n"),
            Err(SpaceError::File { .. })
        ));
    }

    #[test]
    fn rotation_slots_cover_all_offsets() {
        let space = SearchSpace::new([5], [StepTemplate::RemapRotation], 0, 1, 1).unwrap();
        let all: Vec<String> = space.enumerate().unwrap().map(|p| p.describe()).collect();
        assert_eq!(all.len(), 1 + 4); // identity + rot 1..4
        assert!(
            all[1].contains("remap builtin:5 -> inline:40123"),
            "{}",
            all[1]
        );
    }
}
