//! Plan validation: does a multi-timeline satisfy a domain's rules?
//!
//! Rule satisfaction is decided by a backtracking search over token
//! assignments ([`satisfies_rule`], [`is_plan`]). A deliberately naive
//! exhaustive twin ([`brute_force_satisfies`]) enumerates every total
//! assignment with no pruning; the two must agree on every input, which the
//! test suites exercise on randomized instances.
//!
//! Future semantics restricts trigger rules: every quantified witness token
//! must start no earlier than the trigger token. The search applies this as
//! a candidate filter, which coincides with rewriting the rule through
//! [`futurize`] and evaluating under standard semantics.

use std::collections::BTreeMap;

use crate::model::{
    check_timeline, Atom, Domain, Event, ExistentialStatement, MultiTimeline, Quantifier,
    SynchronizationRule, Timeline, TimelineViolation, TokenName,
};
use crate::rational::Rational;

/// Evaluation semantics for trigger rules.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Semantics {
    Standard,
    Future,
}

/// A token occurrence: position `index` on the timeline of `variable`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct TokenRef {
    pub variable: String,
    pub index: usize,
}

/// Partial map from token names to token occurrences.
pub type Assignment = BTreeMap<TokenName, TokenRef>;

/// Why an evaluation could not be carried out.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("atom references token name {0} not bound by the assignment")]
    UnboundName(TokenName),
    #[error("assignment binds {name} to missing timeline {variable}")]
    MissingTimeline { name: TokenName, variable: String },
    #[error("assignment binds {name} to position {index} past the end of timeline {variable}")]
    PositionOutOfRange {
        name: TokenName,
        variable: String,
        index: usize,
    },
    #[error("plan timelines do not cover exactly the domain variables (missing {missing:?}, extra {extra:?})")]
    VariableSetMismatch {
        missing: Vec<String>,
        extra: Vec<String>,
    },
    #[error("brute-force enumeration of {total} assignments exceeds the cap of {cap}")]
    CapExceeded { total: u128, cap: u128 },
}

/// Default assignment cap for [`brute_force_satisfies`].
pub const BRUTE_FORCE_CAP: u128 = 1_000_000;

/// Precomputed token times for every timeline of a plan.
struct PlanTimes<'a> {
    plan: &'a MultiTimeline,
    times: BTreeMap<&'a str, Vec<(Rational, Rational)>>,
}

impl<'a> PlanTimes<'a> {
    fn new(plan: &'a MultiTimeline) -> Self {
        let times = plan
            .timelines()
            .map(|t| (t.variable(), t.token_times()))
            .collect();
        PlanTimes { plan, times }
    }

    fn timeline(&self, variable: &str) -> Option<&'a Timeline> {
        self.plan.get(variable)
    }

    fn event_time(&self, r: &TokenRef, event: Event) -> Option<&Rational> {
        let (start, end) = self.times.get(r.variable.as_str())?.get(r.index)?;
        Some(match event {
            Event::Start => start,
            Event::End => end,
        })
    }

    fn resolve(
        &self,
        name: &TokenName,
        assignment: &Assignment,
        event: Event,
    ) -> Result<Rational, EvalError> {
        let r = assignment
            .get(name)
            .ok_or_else(|| EvalError::UnboundName(name.clone()))?;
        if self.timeline(&r.variable).is_none() {
            return Err(EvalError::MissingTimeline {
                name: name.clone(),
                variable: r.variable.clone(),
            });
        }
        self.event_time(r, event)
            .cloned()
            .ok_or_else(|| EvalError::PositionOutOfRange {
                name: name.clone(),
                variable: r.variable.clone(),
                index: r.index,
            })
    }
}

fn atom_holds(atom: &Atom, assignment: &Assignment, times: &PlanTimes) -> Result<bool, EvalError> {
    match atom {
        Atom::Interval {
            left,
            left_event,
            right,
            right_event,
            interval,
        } => {
            let l = times.resolve(left, assignment, *left_event)?;
            let r = times.resolve(right, assignment, *right_event)?;
            Ok(interval.contains(&(r - l)))
        }
        Atom::TokenConst {
            token,
            event,
            bound,
            interval,
        } => {
            let t = times.resolve(token, assignment, *event)?;
            Ok(interval.contains(&(Rational::from_natural(*bound) - t)))
        }
        Atom::ConstToken {
            bound,
            token,
            event,
            interval,
        } => {
            let t = times.resolve(token, assignment, *event)?;
            Ok(interval.contains(&(t - Rational::from_natural(*bound))))
        }
    }
}

/// Evaluates one atom under an assignment. Every name the atom mentions
/// must be bound to a position inside the plan.
pub fn atom_satisfied(
    atom: &Atom,
    assignment: &Assignment,
    plan: &MultiTimeline,
) -> Result<bool, EvalError> {
    atom_holds(atom, assignment, &PlanTimes::new(plan))
}

/// Candidate positions for a quantifier: every token of the quantified
/// variable holding the quantified value, optionally restricted to tokens
/// starting at or after `min_start`.
fn candidates(times: &PlanTimes, q: &Quantifier, min_start: Option<&Rational>) -> Vec<usize> {
    let Some(timeline) = times.timeline(&q.variable) else {
        return vec![];
    };
    let starts = &times.times[q.variable.as_str()];
    timeline
        .tokens()
        .iter()
        .enumerate()
        .filter(|(i, t)| t.value == q.value && min_start.map_or(true, |m| &starts[*i].0 >= m))
        .map(|(i, _)| i)
        .collect()
}

/// Backtracking search for a satisfying extension of `fixed`.
///
/// Quantifiers are processed in ascending candidate-set-size order; an atom
/// is checked as soon as all of its names are bound. `min_start` implements
/// the future-semantics restriction on quantified tokens.
fn search(
    times: &PlanTimes,
    statement: &ExistentialStatement,
    fixed: &Assignment,
    min_start: Option<&Rational>,
) -> Result<Option<Assignment>, EvalError> {
    // Closed-name discipline first, so failures are errors, not "false".
    for atom in &statement.atoms {
        for name in atom.names() {
            let quantified = statement.quantifiers.iter().any(|q| &q.name == name);
            if !quantified && !fixed.contains_key(name) {
                return Err(EvalError::UnboundName(name.clone()));
            }
        }
    }

    let mut order: Vec<(usize, Vec<usize>)> = statement
        .quantifiers
        .iter()
        .enumerate()
        .map(|(i, q)| (i, candidates(times, q, min_start)))
        .collect();
    order.sort_by_key(|(i, c)| (c.len(), *i));

    // For each atom, the earliest search depth at which it is fully bound.
    let depth_of = |name: &TokenName| -> Option<usize> {
        order
            .iter()
            .position(|(i, _)| &statement.quantifiers[*i].name == name)
    };
    let mut atoms_at: Vec<Vec<&Atom>> = vec![Vec::new(); order.len() + 1];
    for atom in &statement.atoms {
        let depth = atom
            .names()
            .iter()
            .filter_map(|n| depth_of(n))
            .map(|d| d + 1)
            .max()
            .unwrap_or(0);
        atoms_at[depth].push(atom);
    }

    fn descend(
        times: &PlanTimes,
        statement: &ExistentialStatement,
        order: &[(usize, Vec<usize>)],
        atoms_at: &[Vec<&Atom>],
        assignment: &mut Assignment,
        depth: usize,
    ) -> Result<bool, EvalError> {
        for atom in &atoms_at[depth] {
            if !atom_holds(atom, assignment, times)? {
                return Ok(false);
            }
        }
        let Some((qi, cands)) = order.get(depth) else {
            return Ok(true);
        };
        let q = &statement.quantifiers[*qi];
        for &pos in cands {
            assignment.insert(
                q.name.clone(),
                TokenRef {
                    variable: q.variable.clone(),
                    index: pos,
                },
            );
            if descend(times, statement, order, atoms_at, assignment, depth + 1)? {
                return Ok(true);
            }
            assignment.remove(&q.name);
        }
        Ok(false)
    }

    let mut assignment = fixed.clone();
    if descend(times, statement, &order, &atoms_at, &mut assignment, 0)? {
        Ok(Some(assignment))
    } else {
        Ok(None)
    }
}

/// Finds an assignment extending `fixed` that satisfies the statement, or
/// `None`. `fixed` must bind every name the atoms use beyond the
/// statement's own quantifiers.
pub fn satisfies_existential(
    plan: &MultiTimeline,
    statement: &ExistentialStatement,
    fixed: &Assignment,
) -> Result<Option<Assignment>, EvalError> {
    search(&PlanTimes::new(plan), statement, fixed, None)
}

/// Outcome of evaluating a single rule against a plan.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RuleOutcome {
    pub satisfied: bool,
    /// For violated trigger rules: the first trigger occurrence (in
    /// timeline order) with no satisfiable disjunct.
    pub failing_trigger: Option<TokenRef>,
}

fn trigger_positions(times: &PlanTimes, trigger: &Quantifier) -> Vec<usize> {
    candidates(times, trigger, None)
}

fn rule_outcome(
    times: &PlanTimes,
    rule: &SynchronizationRule,
    semantics: Semantics,
) -> Result<RuleOutcome, EvalError> {
    match rule {
        SynchronizationRule::TriggerLess { disjuncts } => {
            for statement in disjuncts {
                if search(times, statement, &Assignment::new(), None)?.is_some() {
                    return Ok(RuleOutcome {
                        satisfied: true,
                        failing_trigger: None,
                    });
                }
            }
            Ok(RuleOutcome {
                satisfied: false,
                failing_trigger: None,
            })
        }
        SynchronizationRule::Trigger { trigger, disjuncts } => {
            for pos in trigger_positions(times, trigger) {
                let occurrence = TokenRef {
                    variable: trigger.variable.clone(),
                    index: pos,
                };
                let min_start = match semantics {
                    Semantics::Standard => None,
                    Semantics::Future => {
                        Some(times.times[trigger.variable.as_str()][pos].0.clone())
                    }
                };
                let fixed = Assignment::from([(trigger.name.clone(), occurrence.clone())]);
                let mut found = false;
                for statement in disjuncts {
                    if search(times, statement, &fixed, min_start.as_ref())?.is_some() {
                        found = true;
                        break;
                    }
                }
                if !found {
                    return Ok(RuleOutcome {
                        satisfied: false,
                        failing_trigger: Some(occurrence),
                    });
                }
            }
            Ok(RuleOutcome {
                satisfied: true,
                failing_trigger: None,
            })
        }
    }
}

/// Decides whether the plan satisfies one rule under the given semantics.
pub fn satisfies_rule(
    plan: &MultiTimeline,
    rule: &SynchronizationRule,
    semantics: Semantics,
) -> Result<RuleOutcome, EvalError> {
    rule_outcome(&PlanTimes::new(plan), rule, semantics)
}

/// Full verdict for a plan against a domain.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ValidationReport {
    pub verdict: bool,
    /// Timeline-level violations, keyed by variable name.
    pub timeline_violations: Vec<(String, TimelineViolation)>,
    /// One outcome per rule, in rule declaration order.
    pub rule_outcomes: Vec<RuleOutcome>,
}

/// Checks that the plan covers exactly the domain's variables, that every
/// timeline respects its variable's transitions and durations, and that
/// every rule is satisfied under the given semantics.
pub fn is_plan(
    domain: &Domain,
    plan: &MultiTimeline,
    semantics: Semantics,
) -> Result<ValidationReport, EvalError> {
    let missing: Vec<String> = domain
        .variables()
        .iter()
        .map(|v| v.name().to_string())
        .filter(|name| plan.get(name).is_none())
        .collect();
    let extra: Vec<String> = plan
        .variables()
        .filter(|name| domain.variable(name).is_none())
        .map(str::to_string)
        .collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(EvalError::VariableSetMismatch { missing, extra });
    }

    let mut timeline_violations = Vec::new();
    for variable in domain.variables() {
        let timeline = plan.get(variable.name()).expect("cover checked above");
        if let Err(v) = check_timeline(variable, timeline) {
            timeline_violations.push((variable.name().to_string(), v));
        }
    }

    let times = PlanTimes::new(plan);
    let mut rule_outcomes = Vec::with_capacity(domain.rules().len());
    for rule in domain.rules() {
        rule_outcomes.push(rule_outcome(&times, rule, semantics)?);
    }

    let verdict = timeline_violations.is_empty() && rule_outcomes.iter().all(|o| o.satisfied);
    Ok(ValidationReport {
        verdict,
        timeline_violations,
        rule_outcomes,
    })
}

/// Exhaustively enumerates every total assignment of quantifiers to
/// matching-value positions and checks all atoms, with no pruning and no
/// ordering heuristics. Errors out if the total assignment count exceeds
/// `cap`.
pub fn brute_force_satisfies_with_cap(
    plan: &MultiTimeline,
    rule: &SynchronizationRule,
    semantics: Semantics,
    cap: u128,
) -> Result<bool, EvalError> {
    let times = PlanTimes::new(plan);

    // Candidate table and enumeration size, computed up front.
    let statement_candidates = |statement: &ExistentialStatement| -> Vec<Vec<usize>> {
        statement
            .quantifiers
            .iter()
            .map(|q| candidates(&times, q, None))
            .collect()
    };
    let proof_burden: Vec<(Option<usize>, &ExistentialStatement, Vec<Vec<usize>>)> = match rule {
        SynchronizationRule::TriggerLess { disjuncts } => disjuncts
            .iter()
            .map(|s| (None, s, statement_candidates(s)))
            .collect(),
        SynchronizationRule::Trigger { trigger, disjuncts } => {
            let mut out = Vec::new();
            for pos in trigger_positions(&times, trigger) {
                for s in disjuncts {
                    out.push((Some(pos), s, statement_candidates(s)));
                }
            }
            out
        }
    };
    let mut total: u128 = 0;
    for (_, _, cands) in &proof_burden {
        let mut product: u128 = 1;
        for c in cands {
            product = product.saturating_mul(c.len() as u128);
        }
        total = total.saturating_add(product);
    }
    if total > cap {
        return Err(EvalError::CapExceeded { total, cap });
    }

    let check_total = |trigger_pos: Option<usize>,
                       statement: &ExistentialStatement,
                       cands: &[Vec<usize>]|
     -> Result<bool, EvalError> {
        let trigger = match rule {
            SynchronizationRule::Trigger { trigger, .. } => Some(trigger),
            SynchronizationRule::TriggerLess { .. } => None,
        };
        if cands.iter().any(|c| c.is_empty()) {
            return Ok(false);
        }
        let n = cands.len();
        let mut odometer = vec![0usize; n];
        loop {
            let mut assignment = Assignment::new();
            if let (Some(t), Some(pos)) = (trigger, trigger_pos) {
                assignment.insert(
                    t.name.clone(),
                    TokenRef {
                        variable: t.variable.clone(),
                        index: pos,
                    },
                );
            }
            for (k, q) in statement.quantifiers.iter().enumerate() {
                assignment.insert(
                    q.name.clone(),
                    TokenRef {
                        variable: q.variable.clone(),
                        index: cands[k][odometer[k]],
                    },
                );
            }
            let mut ok = true;
            if semantics == Semantics::Future {
                if let (Some(t), Some(pos)) = (trigger, trigger_pos) {
                    let t0 = &times.times[t.variable.as_str()][pos].0;
                    for q in &statement.quantifiers {
                        let r = &assignment[&q.name];
                        if &times.times[r.variable.as_str()][r.index].0 < t0 {
                            ok = false;
                            break;
                        }
                    }
                }
            }
            if ok {
                for atom in &statement.atoms {
                    if !atom_holds(atom, &assignment, &times)? {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                return Ok(true);
            }
            // Advance the odometer.
            let mut k = 0;
            loop {
                if k == n {
                    return Ok(false);
                }
                odometer[k] += 1;
                if odometer[k] < cands[k].len() {
                    break;
                }
                odometer[k] = 0;
                k += 1;
            }
        }
    };

    match rule {
        SynchronizationRule::TriggerLess { .. } => {
            for (pos, statement, cands) in &proof_burden {
                if check_total(*pos, statement, cands)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        SynchronizationRule::Trigger { trigger, .. } => {
            for pos in trigger_positions(&times, trigger) {
                let mut found = false;
                for (p, statement, cands) in &proof_burden {
                    if *p == Some(pos) && check_total(*p, statement, cands)? {
                        found = true;
                        break;
                    }
                }
                if !found {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// [`brute_force_satisfies_with_cap`] at the default cap.
pub fn brute_force_satisfies(
    plan: &MultiTimeline,
    rule: &SynchronizationRule,
    semantics: Semantics,
) -> Result<bool, EvalError> {
    brute_force_satisfies_with_cap(plan, rule, semantics, BRUTE_FORCE_CAP)
}
