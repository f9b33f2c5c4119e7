//! Compiling two-counter machines into single-variable planning domains.
//!
//! A machine computation is flattened into a word of marker values: each
//! step contributes a configuration-code, the step's transition followed by
//! one block per counter whose interior length is the counter value. The
//! compiled domain's transition function admits exactly such words, and its
//! synchronization rules force each configuration-code to occupy one time
//! unit and each counter block to recur one unit later, shifted or resized
//! according to the step's instruction. A timed witness for a halting
//! computation is produced by [`generate_witness`]; [`mutate_witness`]
//! damages one in controlled ways for negative testing.

use std::collections::BTreeMap;

use num::traits::ToPrimitive;

use crate::interval::Interval;
use crate::minsky::{Configuration, Counter, Machine, OpKind};
use crate::model::{
    Atom, Domain, Event, ExistentialStatement, MultiTimeline, Quantifier, StateVariable,
    SynchronizationRule, Timeline, Token, TokenName,
};
use crate::rational::Rational;

/// Name of the single state variable produced by [`compile`].
pub const COMPILED_VARIABLE: &str = "m";

/// Marker role of a secondary value within a counter block.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Tag {
    Beg,
    Hash,
    End,
}

impl Tag {
    pub const ALL: [Tag; 3] = [Tag::Beg, Tag::Hash, Tag::End];

    fn word(self) -> &'static str {
        match self {
            Tag::Beg => "beg",
            Tag::Hash => "hash",
            Tag::End => "end",
        }
    }
}

const COUNTERS: [Counter; 2] = [Counter::C1, Counter::C2];

/// A value of the compiled state variable: a main value naming a transition
/// (by declaration index), or a secondary marker for one of its counter
/// blocks.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum ReductionValue {
    Main(usize),
    Sec(usize, Counter, Tag),
}

impl ReductionValue {
    /// Canonical value name: `d3` for the third declared transition,
    /// `d3_c2_hash` for its counter-2 counting marker.
    pub fn name(&self) -> String {
        match self {
            ReductionValue::Main(i) => format!("d{}", i + 1),
            ReductionValue::Sec(i, c, t) => format!("d{}_c{}_{}", i + 1, c.number(), t.word()),
        }
    }

    /// Inverse of [`name`](Self::name). The transition index is not range
    /// checked here; word-level parsers reject indices beyond the machine.
    pub fn parse(name: &str) -> Option<ReductionValue> {
        let rest = name.strip_prefix('d')?;
        let (index, suffix) = match rest.split_once('_') {
            None => (rest, None),
            Some((index, suffix)) => (index, Some(suffix)),
        };
        if index.starts_with('0') || index.starts_with('+') {
            return None;
        }
        let i = index.parse::<usize>().ok()?.checked_sub(1)?;
        let Some(suffix) = suffix else {
            return Some(ReductionValue::Main(i));
        };
        let (counter, tag) = suffix.split_once('_')?;
        let counter = Counter::from_number(counter.strip_prefix('c')?.parse().ok()?)?;
        let tag = Tag::ALL.into_iter().find(|t| t.word() == tag)?;
        Some(ReductionValue::Sec(i, counter, tag))
    }
}

impl std::fmt::Display for ReductionValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.name())
    }
}

/// A word over the compiled value alphabet.
pub type CodeWord = Vec<ReductionValue>;

fn init_index(machine: &Machine) -> usize {
    machine
        .transitions()
        .iter()
        .position(|t| t.from == machine.init())
        .expect("machine constructor guarantees an initial transition")
}

fn halting_indices(machine: &Machine) -> Vec<usize> {
    machine
        .transitions()
        .iter()
        .enumerate()
        .filter(|(_, t)| t.to == machine.halt())
        .map(|(i, _)| i)
        .collect()
}

/// Successor values realizing the code-prefix automaton: a main value opens
/// its counter-1 block; a block interior may extend or close, except that
/// zero-tested counters and the initial code admit no interior; after the
/// counter-2 block come the mains of transitions continuing the run. No
/// value ever leads back to the initial transition's main value.
fn successors(machine: &Machine, value: ReductionValue) -> Vec<ReductionValue> {
    let init = init_index(machine);
    match value {
        ReductionValue::Main(i) => vec![ReductionValue::Sec(i, Counter::C1, Tag::Beg)],
        ReductionValue::Sec(i, c, Tag::Beg) => {
            let op = machine.transitions()[i].op;
            if (op.kind == OpKind::Zero && op.counter == c) || i == init {
                vec![ReductionValue::Sec(i, c, Tag::End)]
            } else {
                vec![
                    ReductionValue::Sec(i, c, Tag::Hash),
                    ReductionValue::Sec(i, c, Tag::End),
                ]
            }
        }
        ReductionValue::Sec(i, c, Tag::Hash) => vec![
            ReductionValue::Sec(i, c, Tag::Hash),
            ReductionValue::Sec(i, c, Tag::End),
        ],
        ReductionValue::Sec(i, Counter::C1, Tag::End) => {
            vec![ReductionValue::Sec(i, Counter::C2, Tag::Beg)]
        }
        ReductionValue::Sec(i, Counter::C2, Tag::End) => {
            let to = &machine.transitions()[i].to;
            machine
                .transitions()
                .iter()
                .enumerate()
                .filter(|(j, t)| &t.from == to && *j != init)
                .map(|(j, _)| ReductionValue::Main(j))
                .collect()
        }
    }
}

/// Two conjoined atoms forcing `right_event(o2) - left_event(o) = k`.
fn punctual_pair(left_event: Event, right_event: Event, k: u64) -> [Atom; 2] {
    let make = |interval| Atom::Interval {
        left: TokenName::new("o"),
        left_event,
        right: TokenName::new("o2"),
        right_event,
        interval,
    };
    [make(Interval::at_least(k)), make(Interval::closed(0, k))]
}

/// Rule: every `trigger`-valued token is followed by a token holding one of
/// the `targets`, at the exact event offsets given by `pairs`.
fn shift_rule(
    trigger: ReductionValue,
    targets: impl IntoIterator<Item = ReductionValue>,
    pairs: &[(Event, Event)],
) -> SynchronizationRule {
    SynchronizationRule::Trigger {
        trigger: Quantifier {
            name: TokenName::new("o"),
            variable: COMPILED_VARIABLE.into(),
            value: trigger.name(),
        },
        disjuncts: targets
            .into_iter()
            .map(|u| ExistentialStatement {
                quantifiers: vec![Quantifier {
                    name: TokenName::new("o2"),
                    variable: COMPILED_VARIABLE.into(),
                    value: u.name(),
                }],
                atoms: pairs
                    .iter()
                    .flat_map(|(le, re)| punctual_pair(*le, *re, 1))
                    .collect(),
            })
            .collect(),
    }
}

/// Trigger-less rule asserting a token with one of the given values exists.
fn exists_rule(values: impl IntoIterator<Item = ReductionValue>) -> SynchronizationRule {
    SynchronizationRule::TriggerLess {
        disjuncts: values
            .into_iter()
            .map(|v| ExistentialStatement {
                quantifiers: vec![Quantifier {
                    name: TokenName::new("o"),
                    variable: COMPILED_VARIABLE.into(),
                    value: v.name(),
                }],
                atoms: vec![],
            })
            .collect(),
    }
}

const START_SHIFT: [(Event, Event); 1] = [(Event::Start, Event::Start)];
const FULL_SHIFT: [(Event, Event); 2] = [(Event::Start, Event::Start), (Event::End, Event::End)];

/// Builds the planning domain whose future plans are exactly the timed
/// encodings of the machine's halting computations.
pub fn compile(machine: &Machine) -> Domain {
    let n = machine.transitions().len();
    let init = init_index(machine);
    let halting = halting_indices(machine);
    let continuing = || (0..n).filter(|i| !halting.contains(i));
    let op = |i: usize| machine.transitions()[i].op;

    let mut values: Vec<ReductionValue> = (0..n).map(ReductionValue::Main).collect();
    for i in 0..n {
        for c in COUNTERS {
            for t in Tag::ALL {
                values.push(ReductionValue::Sec(i, c, t));
            }
        }
    }

    let value_names: Vec<String> = values.iter().map(ReductionValue::name).collect();
    let transitions: BTreeMap<String, Vec<String>> = values
        .iter()
        .map(|v| {
            let succ = successors(machine, *v)
                .into_iter()
                .map(|u| u.name())
                .collect();
            (v.name(), succ)
        })
        .collect();
    // Token durations are positive but otherwise free: time monotonicity.
    let durations: BTreeMap<String, Interval> = value_names
        .iter()
        .map(|v| (v.clone(), Interval::greater_than(0)))
        .collect();
    let variable = StateVariable::new(COMPILED_VARIABLE, value_names, transitions, durations)
        .expect("value names are distinct and the successor map is total");

    let mut rules = Vec::new();
    // A token for the initial transition, and one for a halting transition,
    // must occur somewhere. The halting disjunction is empty (hence
    // unsatisfiable) when no transition reaches the halting location.
    rules.push(exists_rule([ReductionValue::Main(init)]));
    rules.push(exists_rule(
        halting.iter().map(|&i| ReductionValue::Main(i)),
    ));
    // Consecutive configuration-codes start exactly one time unit apart.
    for i in continuing() {
        rules.push(shift_rule(
            ReductionValue::Main(i),
            (0..n).map(ReductionValue::Main),
            &START_SHIFT,
        ));
    }
    // Untouched counters keep their value: every block token recurs one
    // unit later with the same tag. End markers pin only their start; their
    // end is the next block's start, which the next code may move.
    for i in continuing() {
        for c in COUNTERS {
            if op(i).counter == c && op(i).kind != OpKind::Zero {
                continue;
            }
            for t in Tag::ALL {
                let pairs: &[(Event, Event)] = match t {
                    Tag::End => &START_SHIFT,
                    _ => &FULL_SHIFT,
                };
                rules.push(shift_rule(
                    ReductionValue::Sec(i, c, t),
                    (0..n).map(|j| ReductionValue::Sec(j, c, t)),
                    pairs,
                ));
            }
        }
    }
    // Incremented counters gain one interior token: the old opening marker's
    // slot is taken over by a counting token, and a fresh opening marker is
    // squeezed in just before it.
    for i in continuing().filter(|&i| op(i).kind == OpKind::Inc) {
        let c = op(i).counter;
        rules.push(shift_rule(
            ReductionValue::Sec(i, c, Tag::Beg),
            (0..n).map(|j| ReductionValue::Sec(j, c, Tag::Beg)),
            &[(Event::Start, Event::End)],
        ));
        for t in [Tag::Beg, Tag::Hash] {
            rules.push(shift_rule(
                ReductionValue::Sec(i, c, t),
                (0..n).map(|j| ReductionValue::Sec(j, c, Tag::Hash)),
                &FULL_SHIFT,
            ));
        }
        rules.push(shift_rule(
            ReductionValue::Sec(i, c, Tag::End),
            (0..n).map(|j| ReductionValue::Sec(j, c, Tag::End)),
            &START_SHIFT,
        ));
    }
    // Decremented counters lose one: the new opening marker starts where a
    // shifted copy of the old one would have ended, swallowing a slot.
    for i in continuing().filter(|&i| op(i).kind == OpKind::Dec) {
        let c = op(i).counter;
        rules.push(shift_rule(
            ReductionValue::Sec(i, c, Tag::Beg),
            (0..n).map(|j| ReductionValue::Sec(j, c, Tag::Beg)),
            &[(Event::End, Event::Start)],
        ));
        let beg_then_hash = (0..n)
            .map(|j| ReductionValue::Sec(j, c, Tag::Beg))
            .chain((0..n).map(|j| ReductionValue::Sec(j, c, Tag::Hash)));
        rules.push(shift_rule(
            ReductionValue::Sec(i, c, Tag::Hash),
            beg_then_hash,
            &FULL_SHIFT,
        ));
        rules.push(shift_rule(
            ReductionValue::Sec(i, c, Tag::End),
            (0..n).map(|j| ReductionValue::Sec(j, c, Tag::End)),
            &START_SHIFT,
        ));
    }

    Domain::new(vec![variable], rules).expect("compiled rules bind only declared values")
}

/// One configuration-code: the transition it names and the interior length
/// of each counter block.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct CodeBlock {
    pub transition: usize,
    pub hashes: [usize; 2],
}

impl CodeBlock {
    /// Number of tokens the block occupies: main + 2 markers per counter +
    /// interiors.
    pub fn len(&self) -> usize {
        5 + self.hashes[0] + self.hashes[1]
    }

    #[allow(clippy::len_without_is_empty)]
    /// Token offset of the opening marker for `c`, relative to the block.
    fn beg_offset(&self, c: Counter) -> usize {
        match c {
            Counter::C1 => 1,
            Counter::C2 => 3 + self.hashes[0],
        }
    }

    fn symbols(&self) -> CodeWord {
        let mut out = vec![ReductionValue::Main(self.transition)];
        for c in COUNTERS {
            out.push(ReductionValue::Sec(self.transition, c, Tag::Beg));
            for _ in 0..self.hashes[c.index()] {
                out.push(ReductionValue::Sec(self.transition, c, Tag::Hash));
            }
            out.push(ReductionValue::Sec(self.transition, c, Tag::End));
        }
        out
    }
}

/// Structural defects of a code word.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodeError {
    #[error("empty word is not a computation-code")]
    Empty,
    #[error("position {position}: found {found}, expected {expected}")]
    Unexpected {
        position: usize,
        found: String,
        expected: String,
    },
    #[error("word ends at position {position}, expected {expected}")]
    Truncated { position: usize, expected: String },
    #[error("position {position}: code for {next} cannot follow code for {previous} (locations do not chain)")]
    Adjacency {
        position: usize,
        previous: String,
        next: String,
    },
}

/// Parses a word into configuration-codes, enforcing block shape, the
/// zero-test empty-interior constraint, and location adjacency between
/// consecutive codes.
pub fn parse_code(machine: &Machine, word: &[ReductionValue]) -> Result<Vec<CodeBlock>, CodeError> {
    let n = machine.transitions().len();
    if word.is_empty() {
        return Err(CodeError::Empty);
    }
    let mut blocks: Vec<CodeBlock> = Vec::new();
    let mut pos = 0;
    while pos < word.len() {
        let i = match word[pos] {
            ReductionValue::Main(i) if i < n => i,
            found => {
                return Err(CodeError::Unexpected {
                    position: pos,
                    found: found.name(),
                    expected: "a main value opening a configuration-code".into(),
                })
            }
        };
        if let Some(prev) = blocks.last() {
            let prev_t = &machine.transitions()[prev.transition];
            if machine.transitions()[i].from != prev_t.to {
                return Err(CodeError::Adjacency {
                    position: pos,
                    previous: ReductionValue::Main(prev.transition).name(),
                    next: ReductionValue::Main(i).name(),
                });
            }
        }
        pos += 1;
        let mut hashes = [0usize; 2];
        for c in COUNTERS {
            let zero_here = {
                let op = machine.transitions()[i].op;
                op.kind == OpKind::Zero && op.counter == c
            };
            let beg = ReductionValue::Sec(i, c, Tag::Beg);
            match word.get(pos) {
                Some(v) if *v == beg => pos += 1,
                Some(found) => {
                    return Err(CodeError::Unexpected {
                        position: pos,
                        found: found.name(),
                        expected: beg.name(),
                    })
                }
                None => {
                    return Err(CodeError::Truncated {
                        position: pos,
                        expected: beg.name(),
                    })
                }
            }
            let hash = ReductionValue::Sec(i, c, Tag::Hash);
            let end = ReductionValue::Sec(i, c, Tag::End);
            loop {
                match word.get(pos) {
                    Some(v) if *v == hash => {
                        if zero_here {
                            return Err(CodeError::Unexpected {
                                position: pos,
                                found: hash.name(),
                                expected: format!(
                                    "{} (zero test forces an empty block)",
                                    end.name()
                                ),
                            });
                        }
                        hashes[c.index()] += 1;
                        pos += 1;
                    }
                    Some(v) if *v == end => {
                        pos += 1;
                        break;
                    }
                    Some(found) => {
                        return Err(CodeError::Unexpected {
                            position: pos,
                            found: found.name(),
                            expected: format!("{} or {}", hash.name(), end.name()),
                        })
                    }
                    None => {
                        return Err(CodeError::Truncated {
                            position: pos,
                            expected: format!("{} or {}", hash.name(), end.name()),
                        })
                    }
                }
            }
        }
        blocks.push(CodeBlock {
            transition: i,
            hashes,
        });
    }
    Ok(blocks)
}

/// Recovers the configuration sequence a code word encodes: block `i` for
/// transition `δ` with interiors `(h1, h2)` stands for the configuration
/// `(from(δ), h1, h2)`.
pub fn decode(machine: &Machine, word: &[ReductionValue]) -> Result<Vec<Configuration>, CodeError> {
    let blocks = parse_code(machine, word)?;
    Ok(blocks
        .iter()
        .map(|b| {
            Configuration::new(
                machine.transitions()[b.transition].from.clone(),
                b.hashes[0],
                b.hashes[1],
            )
        })
        .collect())
}

/// The arithmetic relation a step imposes on one counter.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Requirement {
    Equality,
    Increment,
    Decrement,
}

impl std::fmt::Display for Requirement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Requirement::Equality => "equality",
            Requirement::Increment => "increment",
            Requirement::Decrement => "decrement",
        })
    }
}

/// Extra properties of a well-formed computation-code.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct CodeFlags {
    /// First code names the initial transition and encodes zero counters.
    pub initial: bool,
    /// Last code's transition enters the halting location.
    pub halting: bool,
}

/// Verdict of the word-level well-formedness oracle.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CodeCheck {
    WellFormed(CodeFlags),
    /// First broken adjacent pair: `step` is the 1-based index of the
    /// earlier code.
    Violated {
        step: usize,
        counter: Counter,
        requirement: Requirement,
    },
}

/// Checks the equality, increment, and decrement requirements between each
/// adjacent pair of configuration-codes. Purely word-level arithmetic,
/// independent of timing and of the rule machinery.
pub fn check_well_formed_code(
    machine: &Machine,
    word: &[ReductionValue],
) -> Result<CodeCheck, CodeError> {
    let blocks = parse_code(machine, word)?;
    for (j, pair) in blocks.windows(2).enumerate() {
        let op = machine.transitions()[pair[0].transition].op;
        for c in COUNTERS {
            let before = pair[0].hashes[c.index()];
            let after = pair[1].hashes[c.index()];
            let requirement = if op.counter != c || op.kind == OpKind::Zero {
                Requirement::Equality
            } else if op.kind == OpKind::Inc {
                Requirement::Increment
            } else {
                Requirement::Decrement
            };
            let ok = match requirement {
                Requirement::Equality => after == before,
                Requirement::Increment => after == before + 1,
                Requirement::Decrement => after + 1 == before,
            };
            if !ok {
                return Ok(CodeCheck::Violated {
                    step: j + 1,
                    counter: c,
                    requirement,
                });
            }
        }
    }
    let first = &blocks[0];
    let last = &blocks[blocks.len() - 1];
    Ok(CodeCheck::WellFormed(CodeFlags {
        initial: first.transition == init_index(machine) && first.hashes == [0, 0],
        halting: machine.transitions()[last.transition].to == machine.halt(),
    }))
}

/// Does the word parse as a prefix of some initial computation-code? The
/// first code must name the initial transition with empty interiors; later
/// codes must chain locations; truncation anywhere is fine. This is the
/// oracle for the compiled transition function: walks from the initial main
/// value generate exactly these words.
pub fn is_initial_code_prefix(machine: &Machine, word: &[ReductionValue]) -> bool {
    let n = machine.transitions().len();
    let init = init_index(machine);
    let mut pos = 0;
    let mut previous: Option<usize> = None;
    while pos < word.len() {
        let i = match word[pos] {
            ReductionValue::Main(i) if i < n => i,
            _ => return false,
        };
        match previous {
            None if i != init => return false,
            Some(prev) if machine.transitions()[i].from != machine.transitions()[prev].to => {
                return false
            }
            _ => {}
        }
        pos += 1;
        for c in COUNTERS {
            if pos == word.len() {
                return true;
            }
            if word[pos] != ReductionValue::Sec(i, c, Tag::Beg) {
                return false;
            }
            pos += 1;
            let op = machine.transitions()[i].op;
            let interior_allowed =
                !(op.kind == OpKind::Zero && op.counter == c) && previous.is_some();
            loop {
                match word.get(pos) {
                    None => return true,
                    Some(&v) if v == ReductionValue::Sec(i, c, Tag::Hash) => {
                        if !interior_allowed {
                            return false;
                        }
                        pos += 1;
                    }
                    Some(&v) if v == ReductionValue::Sec(i, c, Tag::End) => {
                        pos += 1;
                        break;
                    }
                    Some(_) => return false,
                }
            }
        }
        previous = Some(i);
    }
    true
}

/// Why a computation cannot be encoded.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EncodeError {
    #[error("computation is empty")]
    Empty,
    #[error("no transition justifies step {step} from {config}")]
    NoStep { step: usize, config: String },
    #[error("step {step} from {config} is justified by both {first} and {second}; cannot choose")]
    AmbiguousStep {
        step: usize,
        config: String,
        first: String,
        second: String,
    },
    #[error("no transition leaves {location} to name the final configuration-code")]
    NoFinalTransition { location: String },
    #[error("counter value {value} at configuration {index} is too large to spell out")]
    CounterTooLarge { index: usize, value: String },
    #[error("computation ends at {0}, not at the halting location")]
    NotHalting(String),
}

fn hashes_of(config: &Configuration, index: usize) -> Result<[usize; 2], EncodeError> {
    let mut out = [0usize; 2];
    for c in COUNTERS {
        out[c.index()] =
            config.counters[c.index()]
                .to_usize()
                .ok_or_else(|| EncodeError::CounterTooLarge {
                    index,
                    value: config.counters[c.index()].to_string(),
                })?;
    }
    Ok(out)
}

/// Recovers per-step transitions and block shapes for a computation.
///
/// Interior steps must be justified by exactly one transition (ambiguity is
/// an error; the machine is not assumed deterministic). A halting
/// computation's final configuration is not itself encoded: the code ends
/// with the step into the halting location, choosing the first-declared
/// transition if several justify it. A computation ending elsewhere gets a
/// final code named by the first-declared transition out of its last
/// location whose zero test, if any, the configuration passes.
fn encode_blocks(machine: &Machine, comp: &[Configuration]) -> Result<Vec<CodeBlock>, EncodeError> {
    if comp.is_empty() {
        return Err(EncodeError::Empty);
    }
    let halting = comp.last().unwrap().location == machine.halt();
    let encoded = if halting { comp.len() - 1 } else { comp.len() };
    if encoded == 0 {
        // A lone halting configuration has no code: nothing leaves halt.
        return Err(EncodeError::NoFinalTransition {
            location: machine.halt().to_string(),
        });
    }
    let mut blocks = Vec::with_capacity(encoded);
    for (j, config) in comp.iter().enumerate().take(encoded) {
        let i = if j + 1 < comp.len() {
            // A step: the transition must map this configuration to the next.
            let mut candidates = machine
                .transitions()
                .iter()
                .enumerate()
                .filter(|(_, t)| crate::minsky::apply(config, t).as_ref() == Some(&comp[j + 1]))
                .map(|(i, _)| i);
            let first = candidates.next().ok_or_else(|| EncodeError::NoStep {
                step: j,
                config: config.to_string(),
            })?;
            match candidates.next() {
                // The step into the halting location tolerates ambiguity:
                // any justifying transition yields a valid final code.
                Some(_) if comp[j + 1].location == machine.halt() => {}
                Some(second) => {
                    return Err(EncodeError::AmbiguousStep {
                        step: j,
                        config: config.to_string(),
                        first: machine.transitions()[first].to_string(),
                        second: machine.transitions()[second].to_string(),
                    })
                }
                None => {}
            }
            first
        } else {
            // Final configuration of a non-halting computation: any
            // shape-compatible transition out of its location names it.
            machine
                .transitions()
                .iter()
                .position(|t| {
                    t.from == config.location
                        && (t.op.kind != OpKind::Zero
                            || config.counters[t.op.counter.index()].to_usize() == Some(0))
                })
                .ok_or_else(|| EncodeError::NoFinalTransition {
                    location: config.location.clone(),
                })?
        };
        blocks.push(CodeBlock {
            transition: i,
            hashes: hashes_of(config, j)?,
        });
    }
    Ok(blocks)
}

/// Encodes a computation as a word. A halting computation's final
/// configuration is implied by the last code's transition and is not
/// spelled out.
pub fn encode_computation(
    machine: &Machine,
    comp: &[Configuration],
) -> Result<CodeWord, EncodeError> {
    Ok(encode_blocks(machine, comp)?
        .iter()
        .flat_map(|b| b.symbols())
        .collect())
}

/// Timed witness for a halting computation: code `j` spans `[j, j+1]`, the
/// first code's tokens are equally spaced, and each later code's boundaries
/// are the previous code's shifted one unit right, with one boundary
/// inserted at a midpoint (increment) or removed (decrement) at the
/// affected counter's opening marker.
pub fn generate_witness(
    machine: &Machine,
    comp: &[Configuration],
) -> Result<MultiTimeline, EncodeError> {
    let last = comp.last().ok_or(EncodeError::Empty)?;
    if last.location != machine.halt() {
        return Err(EncodeError::NotHalting(last.location.clone()));
    }
    let blocks = encode_blocks(machine, comp)?;

    let one = Rational::one();
    let two = Rational::from_int(2);
    let mut tokens: Vec<Token> = Vec::new();
    let mut boundaries: Vec<Rational> = Vec::new();
    for (j, block) in blocks.iter().enumerate() {
        if j == 0 {
            let count = block.len() as i64;
            boundaries = (0..=count).map(|i| Rational::new(i, count)).collect();
        } else {
            let prev = &blocks[j - 1];
            let op = machine.transitions()[prev.transition].op;
            let mut next: Vec<Rational> = boundaries.iter().map(|b| b + &one).collect();
            let p = prev.beg_offset(op.counter);
            match op.kind {
                OpKind::Zero => {}
                OpKind::Inc => {
                    let mid = (&next[p - 1] + &next[p]) / &two;
                    next.insert(p, mid);
                }
                OpKind::Dec => {
                    next.remove(p);
                }
            }
            boundaries = next;
        }
        debug_assert_eq!(boundaries.len(), block.len() + 1);
        for (t, value) in block.symbols().iter().enumerate() {
            let duration = &boundaries[t + 1] - &boundaries[t];
            tokens.push(Token::new(value.name(), duration));
        }
    }

    let timeline = Timeline::new(COMPILED_VARIABLE, tokens)
        .expect("a halting computation yields at least one code");
    Ok(MultiTimeline::new(vec![timeline]).expect("single timeline"))
}

/// A controlled defect to inflict on a witness. Configuration indices are
/// 0-based.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Mutation {
    /// Split the counter's opening marker to make room for one extra
    /// counting token: the encoded value goes up by one.
    InsertHash { config: usize, counter: Counter },
    /// Remove the counter's first counting token, widening the opening
    /// marker over its slot: the encoded value drops by one.
    DeleteHash { config: usize, counter: Counter },
    /// Scale one configuration-code's durations by 11/10. The word is
    /// untouched; only the unit-spacing requirement breaks.
    StretchConfig { config: usize },
    /// Exchange the values of the counter's opening and closing markers,
    /// if the variable's transition function admits the result.
    SwapTags { config: usize, counter: Counter },
}

/// Why a mutation could not be applied.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MutationError {
    #[error("witness has no timeline for variable {0}")]
    MissingTimeline(String),
    #[error("token value {0} is not a compiled value")]
    ForeignValue(String),
    #[error("witness word is not a computation-code: {0}")]
    NotACode(CodeError),
    #[error("configuration {config} out of range: word has {count} configuration-codes")]
    ConfigOutOfRange { config: usize, count: usize },
    #[error("mutation is not applicable: {0}")]
    Inapplicable(&'static str),
}

/// Applies one mutation to a generated witness, keeping the result
/// transition-consistent with positive durations. The point is to produce
/// near-miss plans: still structurally valid timelines that the domain's
/// rules (or the word oracle) must reject.
pub fn mutate_witness(
    machine: &Machine,
    witness: &MultiTimeline,
    mutation: Mutation,
) -> Result<MultiTimeline, MutationError> {
    let timeline = witness
        .get(COMPILED_VARIABLE)
        .ok_or_else(|| MutationError::MissingTimeline(COMPILED_VARIABLE.into()))?;
    let word: CodeWord = timeline
        .tokens()
        .iter()
        .map(|t| {
            ReductionValue::parse(&t.value)
                .ok_or_else(|| MutationError::ForeignValue(t.value.clone()))
        })
        .collect::<Result<_, _>>()?;
    let blocks = parse_code(machine, &word).map_err(MutationError::NotACode)?;

    let config = match mutation {
        Mutation::InsertHash { config, .. }
        | Mutation::DeleteHash { config, .. }
        | Mutation::StretchConfig { config }
        | Mutation::SwapTags { config, .. } => config,
    };
    if config >= blocks.len() {
        return Err(MutationError::ConfigOutOfRange {
            config,
            count: blocks.len(),
        });
    }
    let offset: usize = blocks[..config].iter().map(CodeBlock::len).sum();
    let block = &blocks[config];
    let i = block.transition;
    let op = machine.transitions()[i].op;
    let mut tokens: Vec<Token> = timeline.tokens().to_vec();

    match mutation {
        Mutation::InsertHash { counter, .. } => {
            if op.kind == OpKind::Zero && op.counter == counter {
                return Err(MutationError::Inapplicable(
                    "a zero-tested counter block admits no counting token",
                ));
            }
            if i == init_index(machine) {
                return Err(MutationError::Inapplicable(
                    "the initial configuration-code admits no counting token",
                ));
            }
            let beg = offset + block.beg_offset(counter);
            let half = &tokens[beg].duration / Rational::from_int(2);
            tokens[beg].duration = half.clone();
            tokens.insert(
                beg + 1,
                Token::new(ReductionValue::Sec(i, counter, Tag::Hash).name(), half),
            );
        }
        Mutation::DeleteHash { counter, .. } => {
            if block.hashes[counter.index()] == 0 {
                return Err(MutationError::Inapplicable(
                    "the counter block has no counting token to remove",
                ));
            }
            let beg = offset + block.beg_offset(counter);
            let removed = tokens.remove(beg + 1);
            tokens[beg].duration = &tokens[beg].duration + removed.duration;
        }
        Mutation::StretchConfig { .. } => {
            let scale = Rational::new(11, 10);
            for t in &mut tokens[offset..offset + block.len()] {
                t.duration = &t.duration * &scale;
            }
        }
        Mutation::SwapTags { counter, .. } => {
            let beg = offset + block.beg_offset(counter);
            let end = beg + 1 + block.hashes[counter.index()];
            tokens.swap(beg, end);
            // Swapping the values only; durations stay in place.
            let (b, e) = (tokens[end].duration.clone(), tokens[beg].duration.clone());
            tokens[beg].duration = b;
            tokens[end].duration = e;
            let domain = compile(machine);
            let variable = domain
                .variable(COMPILED_VARIABLE)
                .expect("compile always emits the variable");
            let consistent = tokens
                .windows(2)
                .all(|w| variable.allows_transition(&w[0].value, &w[1].value));
            if !consistent {
                return Err(MutationError::Inapplicable(
                    "swapped markers break transition consistency",
                ));
            }
        }
    }

    let timeline = Timeline::new(COMPILED_VARIABLE, tokens).expect("mutations keep tokens");
    Ok(MultiTimeline::new(vec![timeline]).expect("single timeline"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minsky::{run, Instruction, Transition};

    fn t(from: &str, kind: OpKind, counter: Counter, to: &str) -> Transition {
        Transition {
            from: from.into(),
            op: Instruction { kind, counter },
            to: to.into(),
        }
    }

    fn m1() -> Machine {
        Machine::new(
            "qi",
            "qh",
            vec![
                t("qi", OpKind::Inc, Counter::C1, "q1"),
                t("q1", OpKind::Dec, Counter::C1, "q2"),
                t("q2", OpKind::Zero, Counter::C1, "qh"),
            ],
        )
        .unwrap()
    }

    fn m1_word() -> CodeWord {
        use ReductionValue::{Main, Sec};
        use Tag::{Beg, End, Hash};
        vec![
            Main(0),
            Sec(0, Counter::C1, Beg),
            Sec(0, Counter::C1, End),
            Sec(0, Counter::C2, Beg),
            Sec(0, Counter::C2, End),
            Main(1),
            Sec(1, Counter::C1, Beg),
            Sec(1, Counter::C1, Hash),
            Sec(1, Counter::C1, End),
            Sec(1, Counter::C2, Beg),
            Sec(1, Counter::C2, End),
            Main(2),
            Sec(2, Counter::C1, Beg),
            Sec(2, Counter::C1, End),
            Sec(2, Counter::C2, Beg),
            Sec(2, Counter::C2, End),
        ]
    }

    #[test]
    fn names_round_trip() {
        let values = [
            ReductionValue::Main(0),
            ReductionValue::Main(11),
            ReductionValue::Sec(2, Counter::C2, Tag::Hash),
            ReductionValue::Sec(0, Counter::C1, Tag::Beg),
            ReductionValue::Sec(7, Counter::C2, Tag::End),
        ];
        for v in values {
            assert_eq!(ReductionValue::parse(&v.name()), Some(v), "{}", v.name());
        }
        assert_eq!(ReductionValue::Main(2).name(), "d3");
        assert_eq!(
            ReductionValue::Sec(2, Counter::C2, Tag::Hash).name(),
            "d3_c2_hash"
        );
        for junk in [
            "",
            "d0",
            "d",
            "e3",
            "d3_c3_beg",
            "d3_c1_mid",
            "d3_c1",
            "d+4",
            "d02",
        ] {
            assert_eq!(ReductionValue::parse(junk), None, "{junk}");
        }
    }

    #[test]
    fn compile_m1_alphabet_and_rule_count() {
        let domain = compile(&m1());
        let variable = domain.variable(COMPILED_VARIABLE).unwrap();
        assert_eq!(variable.values().len(), 21);
        assert_eq!(domain.rules().len(), 17);
        for v in variable.values() {
            assert_eq!(*variable.duration(v).unwrap(), Interval::greater_than(0));
        }
    }

    #[test]
    fn compile_m1_successor_structure() {
        let domain = compile(&m1());
        let variable = domain.variable(COMPILED_VARIABLE).unwrap();
        let succ = |v: &str| variable.successors(v);
        // The initial code has empty interiors, so its openers close at once.
        assert_eq!(succ("d1"), &["d1_c1_beg"]);
        assert_eq!(succ("d1_c1_beg"), &["d1_c1_end"]);
        assert_eq!(succ("d1_c2_beg"), &["d1_c2_end"]);
        // Later codes may count.
        assert_eq!(succ("d2_c1_beg"), &["d2_c1_hash", "d2_c1_end"]);
        assert_eq!(succ("d2_c1_hash"), &["d2_c1_hash", "d2_c1_end"]);
        // The zero-tested counter may not.
        assert_eq!(succ("d3_c1_beg"), &["d3_c1_end"]);
        // Block chaining and code chaining.
        assert_eq!(succ("d1_c1_end"), &["d1_c2_beg"]);
        assert_eq!(succ("d1_c2_end"), &["d2"]);
        assert_eq!(succ("d2_c2_end"), &["d3"]);
        // Nothing continues past a halting transition's code, and nothing
        // ever returns to the initial main value.
        assert!(succ("d3_c2_end").is_empty());
        for v in variable.values() {
            assert!(!variable.successors(v).contains(&"d1".to_string()));
        }
    }

    #[test]
    fn encode_m1_frozen_word() {
        let machine = m1();
        let comp = run(&machine, 100).unwrap();
        let word = encode_computation(&machine, &comp).unwrap();
        assert_eq!(word.len(), 16);
        assert_eq!(word, m1_word());
    }

    #[test]
    fn decode_inverts_encode_dropping_the_halting_configuration() {
        let machine = m1();
        let comp = run(&machine, 100).unwrap();
        let word = encode_computation(&machine, &comp).unwrap();
        assert_eq!(decode(&machine, &word).unwrap(), comp[..comp.len() - 1]);
    }

    #[test]
    fn encode_single_configuration() {
        let machine = m1();
        let comp = vec![Configuration::new("qi", 0u32, 0u32)];
        let word = encode_computation(&machine, &comp).unwrap();
        assert_eq!(word, m1_word()[..5].to_vec());
        assert_eq!(
            decode(&machine, &word).unwrap(),
            vec![Configuration::new("qi", 0u32, 0u32)]
        );
    }

    #[test]
    fn parse_rejects_malformed_words() {
        let machine = m1();
        let mut missing_end = m1_word();
        missing_end.remove(15);
        assert!(matches!(
            parse_code(&machine, &missing_end),
            Err(CodeError::Truncated { position: 15, .. })
        ));
        let mut hash_in_zero = m1_word();
        hash_in_zero.insert(13, ReductionValue::Sec(2, Counter::C1, Tag::Hash));
        assert!(matches!(
            parse_code(&machine, &hash_in_zero),
            Err(CodeError::Unexpected { position: 13, .. })
        ));
        // d3 follows d1, but from(d3) = q2 != q1 = to(d1).
        let mut bad_chain = m1_word()[..5].to_vec();
        bad_chain.extend_from_slice(&m1_word()[11..]);
        assert!(matches!(
            parse_code(&machine, &bad_chain),
            Err(CodeError::Adjacency { position: 5, .. })
        ));
        assert_eq!(parse_code(&machine, &[]), Err(CodeError::Empty));
    }

    #[test]
    fn well_formedness_flags_and_violations() {
        let machine = m1();
        assert_eq!(
            check_well_formed_code(&machine, &m1_word()).unwrap(),
            CodeCheck::WellFormed(CodeFlags {
                initial: true,
                halting: true,
            })
        );
        // One extra counting token on counter 2 of the second code breaks
        // the equality requirement between codes 1 and 2.
        let mut extra = m1_word();
        extra.insert(10, ReductionValue::Sec(1, Counter::C2, Tag::Hash));
        assert_eq!(
            check_well_formed_code(&machine, &extra).unwrap(),
            CodeCheck::Violated {
                step: 1,
                counter: Counter::C2,
                requirement: Requirement::Equality,
            }
        );
        // Removing the counter-1 counting token of the second code breaks
        // the increment requirement between codes 1 and 2.
        let mut missing = m1_word();
        missing.remove(7);
        assert_eq!(
            check_well_formed_code(&machine, &missing).unwrap(),
            CodeCheck::Violated {
                step: 1,
                counter: Counter::C1,
                requirement: Requirement::Increment,
            }
        );
    }

    #[test]
    fn witness_boundaries_for_m1() {
        let machine = m1();
        let comp = run(&machine, 100).unwrap();
        let witness = generate_witness(&machine, &comp).unwrap();
        let timeline = witness.get(COMPILED_VARIABLE).unwrap();
        let times = timeline.token_times();
        let r = Rational::new;
        let expected_starts = [
            // first code, equally spaced fifths
            r(0, 1),
            r(1, 5),
            r(2, 5),
            r(3, 5),
            r(4, 5),
            // second code: increment squeezes the new opener in at 11/10
            r(1, 1),
            r(11, 10),
            r(6, 5),
            r(7, 5),
            r(8, 5),
            r(9, 5),
            // third code: decrement swallows the 21/10 boundary
            r(2, 1),
            r(11, 5),
            r(12, 5),
            r(13, 5),
            r(14, 5),
        ];
        let starts: Vec<Rational> = times.iter().map(|(s, _)| s.clone()).collect();
        assert_eq!(starts, expected_starts);
        assert_eq!(times.last().unwrap().1, r(3, 1));
        for token in timeline.tokens() {
            assert!(token.duration > Rational::zero());
        }
    }

    #[test]
    fn witness_requires_halting_computation() {
        let machine = m1();
        let prefix = vec![
            Configuration::new("qi", 0u32, 0u32),
            Configuration::new("q1", 1u32, 0u32),
        ];
        assert!(matches!(
            generate_witness(&machine, &prefix),
            Err(EncodeError::NotHalting(loc)) if loc == "q1"
        ));
    }

    #[test]
    fn initial_prefix_recognition() {
        let machine = m1();
        let word = m1_word();
        for cut in 0..=word.len() {
            assert!(
                is_initial_code_prefix(&machine, &word[..cut]),
                "prefix of length {cut}"
            );
        }
        // Must start with the initial transition's code.
        assert!(!is_initial_code_prefix(&machine, &word[5..]));
        // The initial code has empty interiors.
        let padded = vec![
            ReductionValue::Main(0),
            ReductionValue::Sec(0, Counter::C1, Tag::Beg),
            ReductionValue::Sec(0, Counter::C1, Tag::Hash),
        ];
        assert!(!is_initial_code_prefix(&machine, &padded));
        // A later code may count (this is the 16-symbol word's own prefix).
        assert!(is_initial_code_prefix(&machine, &word[..8]));
    }

    #[test]
    fn mutations_change_the_word_as_announced() {
        let machine = m1();
        let comp = run(&machine, 100).unwrap();
        let witness = generate_witness(&machine, &comp).unwrap();

        let inserted = mutate_witness(
            &machine,
            &witness,
            Mutation::InsertHash {
                config: 1,
                counter: Counter::C2,
            },
        )
        .unwrap();
        let word: CodeWord = inserted
            .get(COMPILED_VARIABLE)
            .unwrap()
            .tokens()
            .iter()
            .map(|t| ReductionValue::parse(&t.value).unwrap())
            .collect();
        assert_eq!(word.len(), 17);
        assert_eq!(
            check_well_formed_code(&machine, &word).unwrap(),
            CodeCheck::Violated {
                step: 1,
                counter: Counter::C2,
                requirement: Requirement::Equality,
            }
        );

        let deleted = mutate_witness(
            &machine,
            &witness,
            Mutation::DeleteHash {
                config: 1,
                counter: Counter::C1,
            },
        )
        .unwrap();
        let word: CodeWord = deleted
            .get(COMPILED_VARIABLE)
            .unwrap()
            .tokens()
            .iter()
            .map(|t| ReductionValue::parse(&t.value).unwrap())
            .collect();
        assert_eq!(word.len(), 15);
        assert_eq!(
            check_well_formed_code(&machine, &word).unwrap(),
            CodeCheck::Violated {
                step: 1,
                counter: Counter::C1,
                requirement: Requirement::Increment,
            }
        );

        // Stretching leaves the word alone.
        let stretched =
            mutate_witness(&machine, &witness, Mutation::StretchConfig { config: 0 }).unwrap();
        let word: CodeWord = stretched
            .get(COMPILED_VARIABLE)
            .unwrap()
            .tokens()
            .iter()
            .map(|t| ReductionValue::parse(&t.value).unwrap())
            .collect();
        assert_eq!(word, m1_word());
        let times = stretched.get(COMPILED_VARIABLE).unwrap().token_times();
        assert_eq!(times[5].0, Rational::new(11, 10));
    }

    #[test]
    fn inapplicable_mutations_error() {
        let machine = m1();
        let comp = run(&machine, 100).unwrap();
        let witness = generate_witness(&machine, &comp).unwrap();
        // The initial code may not gain a counting token.
        assert!(matches!(
            mutate_witness(
                &machine,
                &witness,
                Mutation::InsertHash {
                    config: 0,
                    counter: Counter::C1,
                }
            ),
            Err(MutationError::Inapplicable(_))
        ));
        // The zero-tested block of the third code may not either.
        assert!(matches!(
            mutate_witness(
                &machine,
                &witness,
                Mutation::InsertHash {
                    config: 2,
                    counter: Counter::C1,
                }
            ),
            Err(MutationError::Inapplicable(_))
        ));
        // Nothing to delete from an empty interior.
        assert!(matches!(
            mutate_witness(
                &machine,
                &witness,
                Mutation::DeleteHash {
                    config: 0,
                    counter: Counter::C2,
                }
            ),
            Err(MutationError::Inapplicable(_))
        ));
        // Swapped markers never satisfy the transition function.
        for config in 0..3 {
            for counter in COUNTERS {
                assert!(matches!(
                    mutate_witness(&machine, &witness, Mutation::SwapTags { config, counter }),
                    Err(MutationError::Inapplicable(_))
                ));
            }
        }
        // Out-of-range configuration index.
        assert!(matches!(
            mutate_witness(&machine, &witness, Mutation::StretchConfig { config: 9 }),
            Err(MutationError::ConfigOutOfRange {
                config: 9,
                count: 3
            })
        ));
    }

    #[test]
    fn ambiguous_interior_step_is_rejected() {
        // Two distinct zero tests justify the same silent step.
        let machine = Machine::new(
            "qi",
            "qh",
            vec![
                t("qi", OpKind::Inc, Counter::C1, "qa"),
                t("qa", OpKind::Dec, Counter::C1, "qb"),
                t("qb", OpKind::Zero, Counter::C1, "qc"),
                t("qb", OpKind::Zero, Counter::C2, "qc"),
                t("qc", OpKind::Zero, Counter::C1, "qh"),
            ],
        )
        .unwrap();
        let comp = run(&machine, 100).unwrap();
        assert!(matches!(
            encode_computation(&machine, &comp),
            Err(EncodeError::AmbiguousStep { step: 2, .. })
        ));
        // Ambiguity on the final, halting step is tolerated: the first
        // declared justifying transition names the last code.
        let machine = Machine::new(
            "qi",
            "qh",
            vec![
                t("qi", OpKind::Inc, Counter::C1, "qa"),
                t("qa", OpKind::Dec, Counter::C1, "qb"),
                t("qb", OpKind::Zero, Counter::C1, "qh"),
                t("qb", OpKind::Zero, Counter::C2, "qh"),
            ],
        )
        .unwrap();
        let comp = run(&machine, 100).unwrap();
        let word = encode_computation(&machine, &comp).unwrap();
        assert_eq!(word[word.len() - 5], ReductionValue::Main(2));
    }
}
