//! Bounded plan synthesis through difference-constraint feasibility.
//!
//! A candidate plan is split into an untimed [`Skeleton`] (one
//! transition-consistent value sequence per variable) and a timing problem:
//! once each trigger occurrence and trigger-less rule has committed to a
//! disjunct and a token assignment, every atom becomes a pair of one-sided
//! bounds on differences of token boundary times. [`feasible`] decides such
//! systems exactly over the rationals, tracking strict bounds, and
//! [`bounded_solve`] searches skeletons and choices in a fixed order,
//! returning the first candidate whose system is satisfiable.
//!
//! Plan existence in general is not semi-decidable by bound growth alone:
//! a `None` here means no plan with the given token budget, nothing more.

use std::collections::BTreeMap;

use crate::model::{
    futurize, Atom, Domain, Event, ExistentialStatement, MultiTimeline, SynchronizationRule,
    Timeline, Token, TokenName,
};
use crate::rational::Rational;
use crate::validator::Semantics;

/// Identifier of a time point in a [`ConstraintSystem`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// One bound: `left - right <= bound`, or `<` when strict.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Constraint {
    pub left: Var,
    pub right: Var,
    pub bound: Rational,
    pub strict: bool,
}

/// A conjunction of difference bounds over named time points, with a
/// distinguished zero point. Infinite interval sides are never stored; only
/// finite bounds appear.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ConstraintSystem {
    names: Vec<String>,
    constraints: Vec<Constraint>,
}

impl ConstraintSystem {
    pub fn new() -> ConstraintSystem {
        ConstraintSystem {
            names: vec!["0".into()],
            constraints: Vec::new(),
        }
    }

    /// The distinguished variable pinned to time 0.
    pub fn zero(&self) -> Var {
        Var(0)
    }

    pub fn fresh(&mut self, name: impl Into<String>) -> Var {
        self.names.push(name.into());
        Var(self.names.len() - 1)
    }

    /// Adds `left - right <= bound` (strict: `<`).
    pub fn add(&mut self, left: Var, right: Var, bound: Rational, strict: bool) {
        self.constraints.push(Constraint {
            left,
            right,
            bound,
            strict,
        });
    }

    pub fn var_count(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, v: Var) -> &str {
        &self.names[v.0]
    }

    /// Looks a variable up by name; systems built from a skeleton name token
    /// boundaries `variable:index`.
    pub fn var(&self, name: &str) -> Option<Var> {
        self.names.iter().position(|n| n == name).map(Var)
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Number of constraints currently present; pairs with [`truncate`]
    /// for scoped exploration.
    pub fn mark(&self) -> usize {
        self.constraints.len()
    }

    /// Drops constraints added after `mark`.
    ///
    /// [`truncate`]: Self::truncate
    pub fn truncate(&mut self, mark: usize) {
        self.constraints.truncate(mark);
    }

    /// Exact recheck of a candidate solution, indexed by variable.
    pub fn satisfied_by(&self, values: &[Rational]) -> bool {
        if values.len() != self.names.len() || !values[0].is_zero() {
            return false;
        }
        self.constraints.iter().all(|c| {
            let diff = &values[c.left.0] - &values[c.right.0];
            if c.strict {
                diff < c.bound
            } else {
                diff <= c.bound
            }
        })
    }

    /// Decides satisfiability and produces a witness with the zero variable
    /// at 0.
    ///
    /// Shortest-path relaxation over weights `(bound, strict edge count)`,
    /// ordered so that a strict bound is infinitesimally tighter than a
    /// non-strict one with the same value. The system is unsatisfiable
    /// exactly when some cycle has negative total bound, or zero total
    /// bound with a strict edge. Witness values subtract `count * epsilon`
    /// from the relaxed potentials, with epsilon small enough to keep every
    /// non-tight constraint satisfied: (minimum positive slack) divided by
    /// (number of variables + 1).
    pub fn feasible(&self) -> Option<Vec<Rational>> {
        let n = self.names.len();
        // Virtual source at distance (0, 0) from everything.
        let mut dist: Vec<(Rational, u64)> = vec![(Rational::zero(), 0); n];
        let tighter = |cand: &(Rational, u64), cur: &(Rational, u64)| {
            cand.0 < cur.0 || (cand.0 == cur.0 && cand.1 > cur.1)
        };
        for round in 0..=n {
            let mut changed = false;
            for c in &self.constraints {
                // Edge right -> left with weight (bound, strict).
                let cand = (
                    &dist[c.right.0].0 + &c.bound,
                    dist[c.right.0].1 + u64::from(c.strict),
                );
                if tighter(&cand, &dist[c.left.0]) {
                    dist[c.left.0] = cand;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
            if round == n {
                // Still relaxing after n rounds: a lexicographically
                // negative cycle exists.
                return None;
            }
        }

        let mut min_slack: Option<Rational> = None;
        for c in &self.constraints {
            let slack = &(&dist[c.right.0].0 + &c.bound) - &dist[c.left.0].0;
            if slack > Rational::zero() && min_slack.as_ref().map_or(true, |m| &slack < m) {
                min_slack = Some(slack);
            }
        }
        let epsilon = min_slack.unwrap_or_else(Rational::one) / Rational::from_int(n as i64 + 1);

        let (zero_bound, zero_count) = dist[0].clone();
        let values = dist
            .iter()
            .map(|(bound, count)| {
                let steps = *count as i64 - zero_count as i64;
                (bound - &zero_bound) - Rational::from_int(steps) * &epsilon
            })
            .collect::<Vec<_>>();
        debug_assert!(self.satisfied_by(&values));
        Some(values)
    }
}

/// Untimed candidate: one value sequence per variable, transition
/// consistent and nonempty, covering exactly the domain's variables.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Skeleton {
    sequences: BTreeMap<String, Vec<String>>,
}

/// Structural problems in a skeleton or choice structure.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StructureError {
    #[error("skeleton variables do not match the domain (missing {missing:?}, extra {extra:?})")]
    VariableSetMismatch {
        missing: Vec<String>,
        extra: Vec<String>,
    },
    #[error("skeleton for {variable} is empty")]
    EmptySequence { variable: String },
    #[error("skeleton for {variable} holds unknown value {value}")]
    UnknownValue { variable: String, value: String },
    #[error("skeleton for {variable} steps from {from} to {to}, which the domain forbids")]
    ForbiddenTransition {
        variable: String,
        from: String,
        to: String,
    },
    #[error("expected one choice set per rule ({expected}), found {found}")]
    RuleCount { expected: usize, found: usize },
    #[error("rule {rule} needs {expected} choices (one per trigger occurrence), found {found}")]
    OccurrenceCount {
        rule: usize,
        expected: usize,
        found: usize,
    },
    #[error("rule {rule}, occurrence {occurrence}: disjunct {disjunct} out of range ({available} available)")]
    DisjunctOutOfRange {
        rule: usize,
        occurrence: usize,
        disjunct: usize,
        available: usize,
    },
    #[error(
        "rule {rule}, occurrence {occurrence}: {found} token indices for {expected} quantifiers"
    )]
    AssignmentLength {
        rule: usize,
        occurrence: usize,
        expected: usize,
        found: usize,
    },
    #[error("rule {rule}, occurrence {occurrence}: token {token} on {variable} does not hold value {value}")]
    AssignmentMismatch {
        rule: usize,
        occurrence: usize,
        variable: String,
        token: usize,
        value: String,
    },
    #[error("atom names token {0}, which neither the trigger nor a quantifier binds")]
    UnboundName(TokenName),
}

impl Skeleton {
    /// Validates value sequences against the domain.
    pub fn new(
        domain: &Domain,
        sequences: BTreeMap<String, Vec<String>>,
    ) -> Result<Skeleton, StructureError> {
        let missing: Vec<String> = domain
            .variables()
            .iter()
            .map(|v| v.name().to_string())
            .filter(|name| !sequences.contains_key(name))
            .collect();
        let extra: Vec<String> = sequences
            .keys()
            .filter(|name| domain.variable(name).is_none())
            .cloned()
            .collect();
        if !missing.is_empty() || !extra.is_empty() {
            return Err(StructureError::VariableSetMismatch { missing, extra });
        }
        for (name, seq) in &sequences {
            let variable = domain.variable(name).expect("cover checked");
            if seq.is_empty() {
                return Err(StructureError::EmptySequence {
                    variable: name.clone(),
                });
            }
            for value in seq {
                if !variable.has_value(value) {
                    return Err(StructureError::UnknownValue {
                        variable: name.clone(),
                        value: value.clone(),
                    });
                }
            }
            for pair in seq.windows(2) {
                if !variable.allows_transition(&pair[0], &pair[1]) {
                    return Err(StructureError::ForbiddenTransition {
                        variable: name.clone(),
                        from: pair[0].clone(),
                        to: pair[1].clone(),
                    });
                }
            }
        }
        Ok(Skeleton { sequences })
    }

    pub fn sequence(&self, variable: &str) -> Option<&[String]> {
        self.sequences.get(variable).map(Vec::as_slice)
    }

    pub fn sequences(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.sequences
            .iter()
            .map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn total_tokens(&self) -> usize {
        self.sequences.values().map(Vec::len).sum()
    }
}

/// One committed disjunct plus token indices for its quantifiers, in
/// quantifier order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Choice {
    pub disjunct: usize,
    pub assignment: Vec<usize>,
}

/// All commitments for one rule: a single entry for a trigger-less rule,
/// one entry per trigger occurrence (in token order) for a trigger rule.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct RuleChoices {
    pub choices: Vec<Choice>,
}

/// Boundary-variable layout: token `i` of a variable runs from boundary
/// `i` to boundary `i + 1`, and boundary 0 is pinned to the zero variable.
struct Layout {
    base: BTreeMap<String, usize>,
}

impl Layout {
    fn build(skeleton: &Skeleton, cs: &mut ConstraintSystem) -> Layout {
        let mut base = BTreeMap::new();
        for (variable, seq) in skeleton.sequences() {
            base.insert(variable.to_string(), cs.var_count());
            for i in 0..=seq.len() {
                cs.fresh(format!("{variable}:{i}"));
            }
        }
        Layout { base }
    }

    fn boundary(&self, variable: &str, index: usize) -> Var {
        Var(self.base[variable] + index)
    }

    fn event(&self, variable: &str, token: usize, event: Event) -> Var {
        match event {
            Event::Start => self.boundary(variable, token),
            Event::End => self.boundary(variable, token + 1),
        }
    }
}

/// Adds both finite sides of `value(right) - value(left) ∈ interval` where
/// the two `Var`s are the involved time points.
fn bound_difference(
    cs: &mut ConstraintSystem,
    left: Var,
    right: Var,
    interval: &crate::interval::Interval,
) {
    let lo = Rational::from_natural(interval.lo());
    cs.add(left, right, -lo, !interval.lo_closed());
    if let Some(hi) = interval.hi() {
        cs.add(
            right,
            left,
            Rational::from_natural(hi),
            !interval.hi_closed(),
        );
    }
}

fn push_atom(
    cs: &mut ConstraintSystem,
    layout: &Layout,
    binding: &BTreeMap<&TokenName, (&str, usize)>,
    atom: &Atom,
) -> Result<(), StructureError> {
    let resolve = |name: &TokenName, event: Event| -> Result<Var, StructureError> {
        let (variable, token) = binding
            .get(name)
            .ok_or_else(|| StructureError::UnboundName(name.clone()))?;
        Ok(layout.event(variable, *token, event))
    };
    match atom {
        Atom::Interval {
            left,
            left_event,
            right,
            right_event,
            interval,
        } => {
            let l = resolve(left, *left_event)?;
            let r = resolve(right, *right_event)?;
            bound_difference(cs, l, r, interval);
        }
        Atom::TokenConst {
            token,
            event,
            bound,
            interval,
        } => {
            // bound - time ∈ interval
            let t = resolve(token, *event)?;
            let n = Rational::from_natural(*bound);
            let lo = Rational::from_natural(interval.lo());
            cs.add(t, cs.zero(), &n - &lo, !interval.lo_closed());
            if let Some(hi) = interval.hi() {
                cs.add(
                    cs.zero(),
                    t,
                    Rational::from_natural(hi) - n,
                    !interval.hi_closed(),
                );
            }
        }
        Atom::ConstToken {
            bound,
            token,
            event,
            interval,
        } => {
            // time - bound ∈ interval
            let t = resolve(token, *event)?;
            let n = Rational::from_natural(*bound);
            let lo = Rational::from_natural(interval.lo());
            cs.add(cs.zero(), t, -(&n + &lo), !interval.lo_closed());
            if let Some(hi) = interval.hi() {
                cs.add(
                    t,
                    cs.zero(),
                    n + Rational::from_natural(hi),
                    !interval.hi_closed(),
                );
            }
        }
    }
    Ok(())
}

/// Pushes the constraints of one committed existential statement: the
/// trigger binding (if any) is part of `binding`; quantifier bindings come
/// from the choice.
fn push_statement<'a>(
    cs: &mut ConstraintSystem,
    layout: &Layout,
    statement: &'a ExistentialStatement,
    mut binding: BTreeMap<&'a TokenName, (&'a str, usize)>,
    assignment: &[usize],
) -> Result<(), StructureError> {
    for (q, token) in statement.quantifiers.iter().zip(assignment) {
        binding.insert(&q.name, (q.variable.as_str(), *token));
    }
    for atom in &statement.atoms {
        push_atom(cs, layout, &binding, atom)?;
    }
    Ok(())
}

/// Base system common to all choices: first boundaries at zero, durations
/// inside each value's interval.
fn base_system(domain: &Domain, skeleton: &Skeleton) -> (ConstraintSystem, Layout) {
    let mut cs = ConstraintSystem::new();
    let layout = Layout::build(skeleton, &mut cs);
    for (variable, seq) in skeleton.sequences() {
        let first = layout.boundary(variable, 0);
        cs.add(first, cs.zero(), Rational::zero(), false);
        cs.add(cs.zero(), first, Rational::zero(), false);
        let spec = domain.variable(variable).expect("validated skeleton");
        for (i, value) in seq.iter().enumerate() {
            let interval = spec.duration(value).expect("total duration map");
            bound_difference(
                &mut cs,
                layout.boundary(variable, i),
                layout.boundary(variable, i + 1),
                interval,
            );
        }
    }
    (cs, layout)
}

/// Positions of tokens holding `value` on `variable`.
fn occurrences(skeleton: &Skeleton, variable: &str, value: &str) -> Vec<usize> {
    skeleton
        .sequence(variable)
        .map(|seq| {
            seq.iter()
                .enumerate()
                .filter(|(_, v)| v.as_str() == value)
                .map(|(i, _)| i)
                .collect()
        })
        .unwrap_or_default()
}

/// Rules as the solver sees them: future semantics rewrites every trigger
/// rule so that quantified tokens may not start before the trigger.
fn effective_rules(domain: &Domain, semantics: Semantics) -> Vec<SynchronizationRule> {
    domain
        .rules()
        .iter()
        .map(|r| match semantics {
            Semantics::Standard => r.clone(),
            Semantics::Future => futurize(r),
        })
        .collect()
}

/// Compiles a fully committed candidate into a difference-constraint
/// system: token chaining and durations from the skeleton, plus the atoms
/// of every chosen disjunct under its assignment.
pub fn atoms_to_constraints(
    domain: &Domain,
    skeleton: &Skeleton,
    choices: &[RuleChoices],
    semantics: Semantics,
) -> Result<ConstraintSystem, StructureError> {
    let rules = effective_rules(domain, semantics);
    if choices.len() != rules.len() {
        return Err(StructureError::RuleCount {
            expected: rules.len(),
            found: choices.len(),
        });
    }
    let (mut cs, layout) = base_system(domain, skeleton);
    for (rule_idx, (rule, rule_choices)) in rules.iter().zip(choices).enumerate() {
        let occurrence_bindings: Vec<BTreeMap<&TokenName, (&str, usize)>> = match rule {
            SynchronizationRule::TriggerLess { .. } => vec![BTreeMap::new()],
            SynchronizationRule::Trigger { trigger, .. } => {
                occurrences(skeleton, &trigger.variable, &trigger.value)
                    .into_iter()
                    .map(|i| BTreeMap::from([(&trigger.name, (trigger.variable.as_str(), i))]))
                    .collect()
            }
        };
        if rule_choices.choices.len() != occurrence_bindings.len() {
            return Err(StructureError::OccurrenceCount {
                rule: rule_idx,
                expected: occurrence_bindings.len(),
                found: rule_choices.choices.len(),
            });
        }
        let disjuncts = rule.disjuncts();
        for (occ_idx, (choice, binding)) in rule_choices
            .choices
            .iter()
            .zip(occurrence_bindings)
            .enumerate()
        {
            let statement =
                disjuncts
                    .get(choice.disjunct)
                    .ok_or(StructureError::DisjunctOutOfRange {
                        rule: rule_idx,
                        occurrence: occ_idx,
                        disjunct: choice.disjunct,
                        available: disjuncts.len(),
                    })?;
            if choice.assignment.len() != statement.quantifiers.len() {
                return Err(StructureError::AssignmentLength {
                    rule: rule_idx,
                    occurrence: occ_idx,
                    expected: statement.quantifiers.len(),
                    found: choice.assignment.len(),
                });
            }
            for (q, token) in statement.quantifiers.iter().zip(&choice.assignment) {
                let holds = skeleton
                    .sequence(&q.variable)
                    .and_then(|seq| seq.get(*token))
                    .is_some_and(|v| v == &q.value);
                if !holds {
                    return Err(StructureError::AssignmentMismatch {
                        rule: rule_idx,
                        occurrence: occ_idx,
                        variable: q.variable.clone(),
                        token: *token,
                        value: q.value.clone(),
                    });
                }
            }
            push_statement(&mut cs, &layout, statement, binding, &choice.assignment)?;
        }
    }
    Ok(cs)
}

/// All transition-consistent value sequences of each length up to `bound`,
/// in ascending lexicographic order by value declaration index (shorter
/// prefixes first).
fn variable_sequences(variable: &crate::model::StateVariable, bound: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut stack: Vec<Vec<usize>> = (0..variable.values().len())
        .rev()
        .map(|i| vec![i])
        .collect();
    // Depth-first with successors visited in declaration order yields
    // sequences in lexicographic order directly.
    while let Some(seq) = stack.pop() {
        if seq.len() < bound {
            let last = &variable.values()[*seq.last().unwrap()];
            for succ in variable.successors(last).iter().rev() {
                let mut next = seq.clone();
                next.push(variable.value_index(succ).expect("declared successor"));
                stack.push(next);
            }
        }
        out.push(seq);
    }
    out
}

/// One choice point of the search: a rule (trigger-less) or one trigger
/// occurrence of a trigger rule, with its enumerable options.
struct Point<'a> {
    rule: &'a SynchronizationRule,
    binding: BTreeMap<&'a TokenName, (&'a str, usize)>,
    /// Flattened (disjunct, assignment) options in disjunct order, then
    /// lexicographic assignment order.
    options: Vec<Choice>,
}

fn point_options(rule: &SynchronizationRule, skeleton: &Skeleton) -> Vec<Choice> {
    let mut options = Vec::new();
    'disjuncts: for (d, statement) in rule.disjuncts().iter().enumerate() {
        let candidates: Vec<Vec<usize>> = statement
            .quantifiers
            .iter()
            .map(|q| occurrences(skeleton, &q.variable, &q.value))
            .collect();
        if candidates.iter().any(Vec::is_empty) {
            continue;
        }
        if candidates.is_empty() {
            // No quantifiers: the single empty assignment.
            options.push(Choice {
                disjunct: d,
                assignment: vec![],
            });
            continue;
        }
        let mut odometer = vec![0usize; candidates.len()];
        loop {
            options.push(Choice {
                disjunct: d,
                assignment: odometer
                    .iter()
                    .zip(&candidates)
                    .map(|(i, c)| c[*i])
                    .collect(),
            });
            let mut k = candidates.len();
            loop {
                k -= 1;
                odometer[k] += 1;
                if odometer[k] < candidates[k].len() {
                    break;
                }
                odometer[k] = 0;
                if k == 0 {
                    continue 'disjuncts;
                }
            }
        }
    }
    options
}

/// Depth-first search over choice points with feasibility pruning; returns
/// boundary values of the first feasible full commitment.
fn search_points(
    cs: &mut ConstraintSystem,
    layout: &Layout,
    points: &[Point],
    depth: usize,
) -> Option<Vec<Rational>> {
    let Some(point) = points.get(depth) else {
        return cs.feasible();
    };
    for choice in &point.options {
        let statement = &point.rule.disjuncts()[choice.disjunct];
        let mark = cs.mark();
        let pushed = push_statement(
            cs,
            layout,
            statement,
            point.binding.clone(),
            &choice.assignment,
        );
        debug_assert!(pushed.is_ok(), "enumerated options bind every name");
        if cs.feasible().is_some() {
            if let Some(solution) = search_points(cs, layout, points, depth + 1) {
                return Some(solution);
            }
        }
        cs.truncate(mark);
    }
    None
}

fn materialize(
    domain: &Domain,
    skeleton: &Skeleton,
    layout: &Layout,
    values: &[Rational],
) -> MultiTimeline {
    let timelines = domain
        .variables()
        .iter()
        .map(|variable| {
            let seq = skeleton.sequence(variable.name()).expect("validated");
            let tokens = seq
                .iter()
                .enumerate()
                .map(|(i, value)| {
                    let start = &values[layout.boundary(variable.name(), i).index()];
                    let end = &values[layout.boundary(variable.name(), i + 1).index()];
                    Token::new(value.clone(), end - start)
                })
                .collect();
            Timeline::new(variable.name(), tokens).expect("skeleton sequences are nonempty")
        })
        .collect();
    MultiTimeline::new(timelines).expect("one timeline per distinct variable")
}

/// Searches for a plan whose timelines hold at most `token_bound` tokens
/// each. Skeletons are visited by ascending total token count, then
/// lexicographically; choices in disjunct order, then assignment order; the
/// first feasible candidate is materialized. `None` rules out plans within
/// this bound only.
pub fn bounded_solve(
    domain: &Domain,
    token_bound: usize,
    semantics: Semantics,
) -> Option<MultiTimeline> {
    if token_bound == 0 || domain.variables().is_empty() {
        return None;
    }
    let rules = effective_rules(domain, semantics);
    // A trigger-less rule with no disjuncts rejects every multi-timeline, so
    // the search space is empty regardless of the bound.
    let doomed = rules.iter().any(
        |r| matches!(r, SynchronizationRule::TriggerLess { disjuncts } if disjuncts.is_empty()),
    );
    if doomed {
        return None;
    }
    let per_variable: Vec<(&str, Vec<Vec<usize>>)> = domain
        .variables()
        .iter()
        .map(|v| (v.name(), variable_sequences(v, token_bound)))
        .collect();

    // suffix_max[d] = most tokens the variables after position d can hold.
    let mut suffix_max = vec![0usize; per_variable.len() + 1];
    for d in (0..per_variable.len()).rev() {
        let own = per_variable[d].1.iter().map(Vec::len).max().unwrap_or(0);
        suffix_max[d] = suffix_max[d + 1] + own;
    }

    let k = per_variable.len();
    for total in k..=suffix_max[0] {
        // Assign sequences variable by variable, keeping the remaining
        // token budget splittable among the variables still unassigned.
        let mut picked: Vec<usize> = Vec::with_capacity(k);
        let solution = assign_next(
            domain,
            &rules,
            &per_variable,
            &suffix_max,
            total,
            &mut picked,
        );
        if solution.is_some() {
            return solution;
        }
    }
    None
}

fn assign_next(
    domain: &Domain,
    rules: &[SynchronizationRule],
    per_variable: &[(&str, Vec<Vec<usize>>)],
    suffix_max: &[usize],
    remaining: usize,
    picked: &mut Vec<usize>,
) -> Option<MultiTimeline> {
    let depth = picked.len();
    if depth == per_variable.len() {
        if remaining != 0 {
            return None;
        }
        return try_skeleton(domain, rules, per_variable, picked);
    }
    let vars_left = per_variable.len() - depth - 1;
    for (i, seq) in per_variable[depth].1.iter().enumerate() {
        let len = seq.len();
        if len > remaining || remaining - len < vars_left || remaining - len > suffix_max[depth + 1]
        {
            continue;
        }
        picked.push(i);
        let solution = assign_next(
            domain,
            rules,
            per_variable,
            suffix_max,
            remaining - len,
            picked,
        );
        picked.pop();
        if solution.is_some() {
            return solution;
        }
    }
    None
}

fn try_skeleton(
    domain: &Domain,
    rules: &[SynchronizationRule],
    per_variable: &[(&str, Vec<Vec<usize>>)],
    picked: &[usize],
) -> Option<MultiTimeline> {
    let sequences: BTreeMap<String, Vec<String>> = per_variable
        .iter()
        .zip(picked)
        .map(|((name, seqs), &i)| {
            let variable = domain.variable(name).expect("domain variable");
            let values = seqs[i]
                .iter()
                .map(|&v| variable.values()[v].clone())
                .collect();
            (name.to_string(), values)
        })
        .collect();
    let skeleton = Skeleton { sequences };

    let mut points: Vec<Point> = Vec::new();
    for rule in rules {
        match rule {
            SynchronizationRule::TriggerLess { .. } => points.push(Point {
                rule,
                binding: BTreeMap::new(),
                options: point_options(rule, &skeleton),
            }),
            SynchronizationRule::Trigger { trigger, .. } => {
                for i in occurrences(&skeleton, &trigger.variable, &trigger.value) {
                    points.push(Point {
                        rule,
                        binding: BTreeMap::from([(&trigger.name, (trigger.variable.as_str(), i))]),
                        options: point_options(rule, &skeleton),
                    });
                }
            }
        }
    }
    if points.iter().any(|p| p.options.is_empty()) {
        return None;
    }

    let (mut cs, layout) = base_system(domain, &skeleton);
    let values = search_points(&mut cs, &layout, &points, 0)?;
    Some(materialize(domain, &skeleton, &layout, &values))
}
