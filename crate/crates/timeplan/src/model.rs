//! Planning domains and timed plans.
//!
//! A domain is a set of state variables plus synchronization rules. Each
//! state variable carries a finite value set, a transition relation over
//! those values, and a duration interval per value. A plan assigns every
//! variable a timeline: a non-empty token sequence where each token holds a
//! value for an exact rational duration. Token end points are cumulative
//! sums of durations, so a timeline is fully timed by its durations alone.
//!
//! Synchronization rules constrain token end points across timelines.
//! A trigger rule `o[x = v] -> E1 | ... | Ek` must hold for every token of
//! `x` with value `v`; a trigger-less rule `T -> E1 | ... | Ek` must hold
//! once globally. Each disjunct is an existential statement: a list of
//! quantifiers binding token names to (variable, value) pairs, and a
//! conjunction of atoms comparing token events (start/end) to each other or
//! to natural constants, within an [`Interval`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::interval::Interval;
use crate::rational::Rational;

/// A token event: the start or the end of the token.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Event {
    Start,
    End,
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Start => write!(f, "start"),
            Event::End => write!(f, "end"),
        }
    }
}

/// Name bound by a quantifier (or a rule trigger) to a token occurrence.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct TokenName(pub String);

impl TokenName {
    pub fn new(s: impl Into<String>) -> Self {
        TokenName(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TokenName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Atomic temporal constraint between token events or against a constant.
///
/// All three shapes assert that a difference of time points lies in an
/// interval; the shapes fix which operand is subtracted from which.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Atom {
    /// time(right_event of right) - time(left_event of left) in interval.
    Interval {
        left: TokenName,
        left_event: Event,
        right: TokenName,
        right_event: Event,
        interval: Interval,
    },
    /// bound - time(event of token) in interval.
    TokenConst {
        token: TokenName,
        event: Event,
        bound: u64,
        interval: Interval,
    },
    /// time(event of token) - bound in interval.
    ConstToken {
        bound: u64,
        token: TokenName,
        event: Event,
        interval: Interval,
    },
}

impl Atom {
    /// Token names the atom mentions, in syntactic order.
    pub fn names(&self) -> Vec<&TokenName> {
        match self {
            Atom::Interval { left, right, .. } => vec![left, right],
            Atom::TokenConst { token, .. } | Atom::ConstToken { token, .. } => vec![token],
        }
    }
}

/// A quantifier `name[variable = value]`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Quantifier {
    pub name: TokenName,
    pub variable: String,
    pub value: String,
}

/// An existential statement: quantifiers plus a conjunction of atoms.
/// An empty atom list is the trivially true conjunction.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ExistentialStatement {
    pub quantifiers: Vec<Quantifier>,
    pub atoms: Vec<Atom>,
}

/// A synchronization rule. The disjunct list may be empty, in which case
/// the rule is unsatisfiable.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SynchronizationRule {
    Trigger {
        trigger: Quantifier,
        disjuncts: Vec<ExistentialStatement>,
    },
    TriggerLess {
        disjuncts: Vec<ExistentialStatement>,
    },
}

impl SynchronizationRule {
    pub fn disjuncts(&self) -> &[ExistentialStatement] {
        match self {
            SynchronizationRule::Trigger { disjuncts, .. } => disjuncts,
            SynchronizationRule::TriggerLess { disjuncts } => disjuncts,
        }
    }
}

/// A state variable: finite value set, transition relation, and duration
/// interval per value. Successor lists are kept in value declaration order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct StateVariable {
    name: String,
    values: Vec<String>,
    transitions: BTreeMap<String, Vec<String>>,
    durations: BTreeMap<String, Interval>,
}

impl StateVariable {
    pub fn new(
        name: impl Into<String>,
        values: Vec<String>,
        transitions: BTreeMap<String, Vec<String>>,
        durations: BTreeMap<String, Interval>,
    ) -> Result<Self, ModelError> {
        let name = name.into();
        if values.is_empty() {
            return Err(ModelError::EmptyValueSet { variable: name });
        }
        let index: BTreeMap<&str, usize> = values
            .iter()
            .enumerate()
            .map(|(i, v)| (v.as_str(), i))
            .collect();
        if index.len() != values.len() {
            return Err(ModelError::DuplicateValue { variable: name });
        }
        let mut canonical = BTreeMap::new();
        for v in &values {
            let succs = transitions.get(v).ok_or_else(|| ModelError::MissingEntry {
                variable: name.clone(),
                value: v.clone(),
                map: "transitions",
            })?;
            let mut ids = Vec::with_capacity(succs.len());
            for s in succs {
                match index.get(s.as_str()) {
                    Some(&i) => ids.push(i),
                    None => {
                        return Err(ModelError::UnknownValue {
                            variable: name.clone(),
                            value: s.clone(),
                        })
                    }
                }
            }
            ids.sort_unstable();
            ids.dedup();
            canonical.insert(
                v.clone(),
                ids.into_iter().map(|i| values[i].clone()).collect(),
            );
        }
        if transitions.len() != values.len() {
            // Extra keys not in the value set.
            let extra = transitions.keys().find(|k| !index.contains_key(k.as_str()));
            if let Some(v) = extra {
                return Err(ModelError::UnknownValue {
                    variable: name.clone(),
                    value: v.clone(),
                });
            }
        }
        for v in &values {
            if !durations.contains_key(v) {
                return Err(ModelError::MissingEntry {
                    variable: name.clone(),
                    value: v.clone(),
                    map: "durations",
                });
            }
        }
        if let Some(v) = durations.keys().find(|k| !index.contains_key(k.as_str())) {
            return Err(ModelError::UnknownValue {
                variable: name.clone(),
                value: v.clone(),
            });
        }
        Ok(StateVariable {
            name,
            values,
            transitions: canonical,
            durations,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Values in declaration order.
    pub fn values(&self) -> &[String] {
        &self.values
    }

    pub fn has_value(&self, value: &str) -> bool {
        self.values.iter().any(|v| v == value)
    }

    pub fn value_index(&self, value: &str) -> Option<usize> {
        self.values.iter().position(|v| v == value)
    }

    /// Successors of `value` in value declaration order.
    pub fn successors(&self, value: &str) -> &[String] {
        self.transitions
            .get(value)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn allows_transition(&self, from: &str, to: &str) -> bool {
        self.successors(from).iter().any(|s| s == to)
    }

    pub fn duration(&self, value: &str) -> Option<&Interval> {
        self.durations.get(value)
    }
}

/// One token: a value held for an exact positive-or-zero duration.
/// Whether the duration is admissible for the value is a property of the
/// owning variable, checked by [`check_timeline`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Token {
    pub value: String,
    pub duration: Rational,
}

impl Token {
    pub fn new(value: impl Into<String>, duration: Rational) -> Self {
        Token {
            value: value.into(),
            duration,
        }
    }
}

/// A non-empty token sequence for one variable.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Timeline {
    variable: String,
    tokens: Vec<Token>,
}

impl Timeline {
    pub fn new(variable: impl Into<String>, tokens: Vec<Token>) -> Result<Self, ModelError> {
        let variable = variable.into();
        if tokens.is_empty() {
            return Err(ModelError::EmptyTimeline { variable });
        }
        Ok(Timeline { variable, tokens })
    }

    pub fn variable(&self) -> &str {
        &self.variable
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    /// Start and end time of each token. The first token starts at 0 and
    /// each token starts where its predecessor ends, so for every `i`,
    /// `times[i].1 - times[i].0` is exactly `tokens[i].duration`.
    pub fn token_times(&self) -> Vec<(Rational, Rational)> {
        let mut out = Vec::with_capacity(self.tokens.len());
        let mut clock = Rational::zero();
        for t in &self.tokens {
            let end = &clock + &t.duration;
            out.push((clock, end.clone()));
            clock = end;
        }
        out
    }
}

/// A plan candidate: one timeline per variable, keyed by variable name.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MultiTimeline {
    timelines: BTreeMap<String, Timeline>,
}

impl MultiTimeline {
    pub fn new(timelines: Vec<Timeline>) -> Result<Self, ModelError> {
        let mut map = BTreeMap::new();
        for t in timelines {
            let key = t.variable.clone();
            if map.insert(key.clone(), t).is_some() {
                return Err(ModelError::DuplicateTimeline { variable: key });
            }
        }
        Ok(MultiTimeline { timelines: map })
    }

    pub fn get(&self, variable: &str) -> Option<&Timeline> {
        self.timelines.get(variable)
    }

    pub fn timelines(&self) -> impl Iterator<Item = &Timeline> {
        self.timelines.values()
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.timelines.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.timelines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timelines.is_empty()
    }
}

/// A planning domain: state variables plus synchronization rules.
/// Construction re-checks variable well-formedness interactions and runs
/// [`well_formed_rule`] on every rule, so a `Domain` value is always
/// internally consistent.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Domain {
    variables: Vec<StateVariable>,
    rules: Vec<SynchronizationRule>,
}

impl Domain {
    pub fn new(
        variables: Vec<StateVariable>,
        rules: Vec<SynchronizationRule>,
    ) -> Result<Self, ModelError> {
        let mut seen = BTreeSet::new();
        for v in &variables {
            if !seen.insert(v.name.clone()) {
                return Err(ModelError::DuplicateVariable {
                    variable: v.name.clone(),
                });
            }
        }
        let domain = Domain { variables, rules };
        for (index, rule) in domain.rules.iter().enumerate() {
            well_formed_rule(&domain, rule).map_err(|violation| ModelError::Rule {
                index,
                violation: Box::new(violation),
            })?;
        }
        Ok(domain)
    }

    pub fn variables(&self) -> &[StateVariable] {
        &self.variables
    }

    pub fn rules(&self) -> &[SynchronizationRule] {
        &self.rules
    }

    pub fn variable(&self, name: &str) -> Option<&StateVariable> {
        self.variables.iter().find(|v| v.name == name)
    }
}

/// Structural errors raised while building model values.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("variable {variable} has an empty value set")]
    EmptyValueSet { variable: String },
    #[error("variable {variable} declares a value twice")]
    DuplicateValue { variable: String },
    #[error("variable {variable}: {map} has no entry for value {value}")]
    MissingEntry {
        variable: String,
        value: String,
        map: &'static str,
    },
    #[error("variable {variable} references undeclared value {value}")]
    UnknownValue { variable: String, value: String },
    #[error("timeline for variable {variable} is empty")]
    EmptyTimeline { variable: String },
    #[error("two timelines given for variable {variable}")]
    DuplicateTimeline { variable: String },
    #[error("two variables named {variable}")]
    DuplicateVariable { variable: String },
    #[error("rule {index}: {violation}")]
    Rule {
        index: usize,
        violation: Box<RuleViolation>,
    },
}

/// First structural problem found in a timeline, with its token index.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TimelineViolation {
    #[error("timeline is for variable {timeline}, not {variable}")]
    VariableMismatch { variable: String, timeline: String },
    #[error("token {index}: value {value} is not declared")]
    UnknownValue { index: usize, value: String },
    #[error("token {index}: transition {from} -> {to} is not allowed")]
    Transition {
        index: usize,
        from: String,
        to: String,
    },
    #[error("token {index}: duration {duration} outside {allowed} for value {value}")]
    Duration {
        index: usize,
        value: String,
        duration: Rational,
        allowed: Interval,
    },
}

/// Checks that a timeline belongs to the variable: every token value is
/// declared, consecutive values follow the transition relation, and every
/// duration lies in the value's duration interval. Reports the first
/// violation in token order; for equal indices the transition check wins.
pub fn check_timeline(
    variable: &StateVariable,
    timeline: &Timeline,
) -> Result<(), TimelineViolation> {
    if timeline.variable != variable.name {
        return Err(TimelineViolation::VariableMismatch {
            variable: variable.name.clone(),
            timeline: timeline.variable.clone(),
        });
    }
    for (index, token) in timeline.tokens.iter().enumerate() {
        if !variable.has_value(&token.value) {
            return Err(TimelineViolation::UnknownValue {
                index,
                value: token.value.clone(),
            });
        }
        if index > 0 {
            let from = &timeline.tokens[index - 1].value;
            if !variable.allows_transition(from, &token.value) {
                return Err(TimelineViolation::Transition {
                    index,
                    from: from.clone(),
                    to: token.value.clone(),
                });
            }
        }
        let allowed = variable
            .duration(&token.value)
            .expect("declared value has duration entry");
        if !allowed.contains(&token.duration) {
            return Err(TimelineViolation::Duration {
                index,
                value: token.value.clone(),
                duration: token.duration.clone(),
                allowed: *allowed,
            });
        }
    }
    Ok(())
}

/// First well-formedness problem in a rule.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RuleViolation {
    #[error("trigger references undeclared variable {variable}")]
    TriggerUnknownVariable { variable: String },
    #[error("trigger references undeclared value {value} of variable {variable}")]
    TriggerUnknownValue { variable: String, value: String },
    #[error("disjunct {disjunct}: quantifier {name} references undeclared variable {variable}")]
    UnknownVariable {
        disjunct: usize,
        name: TokenName,
        variable: String,
    },
    #[error(
        "disjunct {disjunct}: quantifier {name} references undeclared value {value} of {variable}"
    )]
    UnknownValue {
        disjunct: usize,
        name: TokenName,
        variable: String,
        value: String,
    },
    #[error("disjunct {disjunct}: token name {name} quantified twice")]
    DuplicateQuantifier { disjunct: usize, name: TokenName },
    #[error("disjunct {disjunct}: trigger name {name} may not be re-quantified")]
    TriggerRequantified { disjunct: usize, name: TokenName },
    #[error("disjunct {disjunct}: atom references unbound token name {name}")]
    FreeName { disjunct: usize, name: TokenName },
}

/// Checks name discipline and declaration discipline for one rule:
/// quantified names are pairwise distinct within a disjunct, the trigger
/// name is never re-quantified, every atom references only names bound in
/// its disjunct (plus the trigger, for trigger rules), and every
/// (variable, value) pair is declared in the domain.
pub fn well_formed_rule(domain: &Domain, rule: &SynchronizationRule) -> Result<(), RuleViolation> {
    let check_binding = |q: &Quantifier, disjunct: Option<usize>| -> Result<(), RuleViolation> {
        let var = domain.variable(&q.variable);
        match (var, disjunct) {
            (None, None) => Err(RuleViolation::TriggerUnknownVariable {
                variable: q.variable.clone(),
            }),
            (None, Some(d)) => Err(RuleViolation::UnknownVariable {
                disjunct: d,
                name: q.name.clone(),
                variable: q.variable.clone(),
            }),
            (Some(v), _) if !v.has_value(&q.value) => match disjunct {
                None => Err(RuleViolation::TriggerUnknownValue {
                    variable: q.variable.clone(),
                    value: q.value.clone(),
                }),
                Some(d) => Err(RuleViolation::UnknownValue {
                    disjunct: d,
                    name: q.name.clone(),
                    variable: q.variable.clone(),
                    value: q.value.clone(),
                }),
            },
            _ => Ok(()),
        }
    };

    let trigger = match rule {
        SynchronizationRule::Trigger { trigger, .. } => {
            check_binding(trigger, None)?;
            Some(&trigger.name)
        }
        SynchronizationRule::TriggerLess { .. } => None,
    };

    for (d, statement) in rule.disjuncts().iter().enumerate() {
        let mut bound: BTreeSet<&TokenName> = BTreeSet::new();
        for q in &statement.quantifiers {
            if Some(&q.name) == trigger {
                return Err(RuleViolation::TriggerRequantified {
                    disjunct: d,
                    name: q.name.clone(),
                });
            }
            if !bound.insert(&q.name) {
                return Err(RuleViolation::DuplicateQuantifier {
                    disjunct: d,
                    name: q.name.clone(),
                });
            }
            check_binding(q, Some(d))?;
        }
        for atom in &statement.atoms {
            for name in atom.names() {
                if !bound.contains(name) && Some(name) != trigger {
                    return Err(RuleViolation::FreeName {
                        disjunct: d,
                        name: name.clone(),
                    });
                }
            }
        }
    }
    Ok(())
}

/// Rewrites a trigger rule so that, in every disjunct, each quantified
/// token is constrained to start no earlier than the trigger token: one
/// extra atom `start(quantified) - start(trigger) in [0, oo[` per
/// quantifier, appended after the original atoms in quantifier order.
/// Trigger-less rules pass through unchanged.
///
/// Satisfaction of the rewritten rule under plain semantics coincides with
/// satisfaction of the original rule under future semantics.
pub fn futurize(rule: &SynchronizationRule) -> SynchronizationRule {
    match rule {
        SynchronizationRule::TriggerLess { .. } => rule.clone(),
        SynchronizationRule::Trigger { trigger, disjuncts } => {
            let rewritten = disjuncts
                .iter()
                .map(|statement| {
                    let mut atoms = statement.atoms.clone();
                    for q in &statement.quantifiers {
                        atoms.push(Atom::Interval {
                            left: trigger.name.clone(),
                            left_event: Event::Start,
                            right: q.name.clone(),
                            right_event: Event::Start,
                            interval: Interval::at_least(0),
                        });
                    }
                    ExistentialStatement {
                        quantifiers: statement.quantifiers.clone(),
                        atoms,
                    }
                })
                .collect();
            SynchronizationRule::Trigger {
                trigger: trigger.clone(),
                disjuncts: rewritten,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    /// Variable with values a -> b -> c -> b and durations
    /// a: [5,8], b: [1,4], c: [2,oo[.
    fn sample_variable() -> StateVariable {
        let values = vec!["a".into(), "b".into(), "c".into()];
        let transitions = BTreeMap::from([
            ("a".to_string(), vec!["b".to_string()]),
            ("b".to_string(), vec!["c".to_string()]),
            ("c".to_string(), vec!["b".to_string()]),
        ]);
        let durations = BTreeMap::from([
            ("a".to_string(), Interval::closed(5, 8)),
            ("b".to_string(), Interval::closed(1, 4)),
            ("c".to_string(), Interval::at_least(2)),
        ]);
        StateVariable::new("x", values, transitions, durations).unwrap()
    }

    fn sample_timeline() -> Timeline {
        Timeline::new(
            "x",
            vec![
                Token::new("a", q(7, 1)),
                Token::new("b", q(3, 1)),
                Token::new("c", q(39, 10)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn token_times_are_cumulative() {
        let times = sample_timeline().token_times();
        assert_eq!(
            times,
            vec![
                (q(0, 1), q(7, 1)),
                (q(7, 1), q(10, 1)),
                (q(10, 1), q(139, 10)),
            ]
        );
    }

    #[test]
    fn check_timeline_accepts_consistent() {
        assert_eq!(
            check_timeline(&sample_variable(), &sample_timeline()),
            Ok(())
        );
    }

    #[test]
    fn check_timeline_duration_violation() {
        let t = Timeline::new("x", vec![Token::new("a", q(4, 1))]).unwrap();
        match check_timeline(&sample_variable(), &t) {
            Err(TimelineViolation::Duration { index: 0, .. }) => {}
            other => panic!("expected duration violation at 0, got {other:?}"),
        }
    }

    #[test]
    fn check_timeline_transition_violation() {
        let t = Timeline::new(
            "x",
            vec![Token::new("a", q(5, 1)), Token::new("a", q(5, 1))],
        )
        .unwrap();
        match check_timeline(&sample_variable(), &t) {
            Err(TimelineViolation::Transition { index: 1, .. }) => {}
            other => panic!("expected transition violation at 1, got {other:?}"),
        }
    }

    #[test]
    fn zero_duration_allowed_when_interval_contains_zero() {
        let values = vec!["a".into()];
        let transitions = BTreeMap::from([("a".to_string(), vec![])]);
        let durations = BTreeMap::from([("a".to_string(), Interval::closed(0, 2))]);
        let v = StateVariable::new("x", values, transitions, durations).unwrap();
        let t = Timeline::new("x", vec![Token::new("a", q(0, 1))]).unwrap();
        assert_eq!(check_timeline(&v, &t), Ok(()));
    }

    #[test]
    fn empty_timeline_rejected() {
        assert!(matches!(
            Timeline::new("x", vec![]),
            Err(ModelError::EmptyTimeline { .. })
        ));
    }

    fn sample_domain(rules: Vec<SynchronizationRule>) -> Result<Domain, ModelError> {
        Domain::new(vec![sample_variable()], rules)
    }

    fn quant(name: &str, value: &str) -> Quantifier {
        Quantifier {
            name: TokenName::new(name),
            variable: "x".into(),
            value: value.into(),
        }
    }

    #[test]
    fn futurize_appends_one_atom_per_quantifier() {
        let rule = SynchronizationRule::Trigger {
            trigger: quant("o", "b"),
            disjuncts: vec![ExistentialStatement {
                quantifiers: vec![quant("p", "a"), quant("r", "c")],
                atoms: vec![Atom::Interval {
                    left: TokenName::new("o"),
                    left_event: Event::End,
                    right: TokenName::new("p"),
                    right_event: Event::Start,
                    interval: Interval::closed(0, 3),
                }],
            }],
        };
        let f = futurize(&rule);
        let ds = f.disjuncts();
        assert_eq!(ds[0].atoms.len(), 3);
        assert_eq!(ds[0].atoms[0], rule.disjuncts()[0].atoms[0]);
        for (atom, name) in ds[0].atoms[1..].iter().zip(["p", "r"]) {
            assert_eq!(
                *atom,
                Atom::Interval {
                    left: TokenName::new("o"),
                    left_event: Event::Start,
                    right: TokenName::new(name),
                    right_event: Event::Start,
                    interval: Interval::at_least(0),
                }
            );
        }
        // Trigger-less rules pass through unchanged.
        let bare = SynchronizationRule::TriggerLess {
            disjuncts: vec![ExistentialStatement {
                quantifiers: vec![quant("p", "a")],
                atoms: vec![],
            }],
        };
        assert_eq!(futurize(&bare), bare);
        // A disjunct with no quantifiers is unchanged.
        let lone = SynchronizationRule::Trigger {
            trigger: quant("o", "b"),
            disjuncts: vec![ExistentialStatement {
                quantifiers: vec![],
                atoms: vec![],
            }],
        };
        assert_eq!(futurize(&lone), lone);
    }

    #[test]
    fn well_formed_rule_catches_violations() {
        // Free name in an atom.
        let rule = SynchronizationRule::TriggerLess {
            disjuncts: vec![ExistentialStatement {
                quantifiers: vec![quant("p", "a")],
                atoms: vec![Atom::TokenConst {
                    token: TokenName::new("ghost"),
                    event: Event::Start,
                    bound: 2,
                    interval: Interval::closed(0, 1),
                }],
            }],
        };
        assert!(matches!(
            sample_domain(vec![rule]),
            Err(ModelError::Rule { index: 0, .. })
        ));

        // Trigger name re-quantified.
        let rule = SynchronizationRule::Trigger {
            trigger: quant("o", "b"),
            disjuncts: vec![ExistentialStatement {
                quantifiers: vec![quant("o", "a")],
                atoms: vec![],
            }],
        };
        let d = Domain::new(vec![sample_variable()], vec![]).unwrap();
        assert_eq!(
            well_formed_rule(&d, &rule),
            Err(RuleViolation::TriggerRequantified {
                disjunct: 0,
                name: TokenName::new("o"),
            })
        );

        // Undeclared value.
        let rule = SynchronizationRule::Trigger {
            trigger: quant("o", "z"),
            disjuncts: vec![],
        };
        assert!(matches!(
            well_formed_rule(&d, &rule),
            Err(RuleViolation::TriggerUnknownValue { .. })
        ));

        // Duplicate quantifier.
        let rule = SynchronizationRule::TriggerLess {
            disjuncts: vec![ExistentialStatement {
                quantifiers: vec![quant("p", "a"), quant("p", "b")],
                atoms: vec![],
            }],
        };
        assert!(matches!(
            well_formed_rule(&d, &rule),
            Err(RuleViolation::DuplicateQuantifier { .. })
        ));

        // Same name in different disjuncts is fine.
        let rule = SynchronizationRule::TriggerLess {
            disjuncts: vec![
                ExistentialStatement {
                    quantifiers: vec![quant("p", "a")],
                    atoms: vec![],
                },
                ExistentialStatement {
                    quantifiers: vec![quant("p", "b")],
                    atoms: vec![],
                },
            ],
        };
        assert_eq!(well_formed_rule(&d, &rule), Ok(()));
    }

    #[test]
    fn variable_requires_total_maps() {
        let values = vec!["a".to_string(), "b".to_string()];
        let transitions = BTreeMap::from([("a".to_string(), vec!["b".to_string()])]);
        let durations = BTreeMap::from([
            ("a".to_string(), Interval::at_least(0)),
            ("b".to_string(), Interval::at_least(0)),
        ]);
        assert!(matches!(
            StateVariable::new("x", values, transitions, durations),
            Err(ModelError::MissingEntry { .. })
        ));
    }
}
