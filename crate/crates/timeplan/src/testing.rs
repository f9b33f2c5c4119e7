//! Fixtures and seeded generators shared by the test suites.
//!
//! Everything here is deterministic given the caller's RNG, so failures
//! reproduce from a seed. The machines cover the shapes the compiler and
//! witness pipeline care about: a short halting run, divergence, counter
//! values above one, and a zero test in the middle of a computation.

use std::collections::BTreeMap;

use rand::Rng;

use crate::interval::Interval;
use crate::minsky::{Counter, Instruction, Machine, OpKind, Transition};
use crate::model::{
    Atom, Domain, Event, ExistentialStatement, MultiTimeline, Quantifier, StateVariable,
    SynchronizationRule, Timeline, Token, TokenName,
};
use crate::rational::Rational;
use crate::solver::ConstraintSystem;

fn t(from: &str, kind: OpKind, counter: Counter, to: &str) -> Transition {
    Transition {
        from: from.into(),
        op: Instruction { kind, counter },
        to: to.into(),
    }
}

/// Increments once, decrements once, zero-tests into the halt location.
/// Halts in three steps with both counters back at zero.
pub fn m1() -> Machine {
    Machine::new(
        "qi",
        "qh",
        vec![
            t("qi", OpKind::Inc, Counter::C1, "q1"),
            t("q1", OpKind::Dec, Counter::C1, "q2"),
            t("q2", OpKind::Zero, Counter::C1, "qh"),
        ],
    )
    .expect("fixture machine")
}

/// Increments counter 1 forever; no transition reaches the halt location.
pub fn m2() -> Machine {
    Machine::new(
        "qi",
        "qh",
        vec![
            t("qi", OpKind::Inc, Counter::C1, "q1"),
            t("q1", OpKind::Inc, Counter::C1, "q1"),
        ],
    )
    .expect("fixture machine")
}

/// Pushes counter 1 up to three before draining it, so codes carry
/// multi-symbol interiors.
pub fn m3() -> Machine {
    Machine::new(
        "qi",
        "qh",
        vec![
            t("qi", OpKind::Inc, Counter::C1, "qa"),
            t("qa", OpKind::Inc, Counter::C1, "qb"),
            t("qb", OpKind::Inc, Counter::C1, "qc"),
            t("qc", OpKind::Dec, Counter::C1, "qd"),
            t("qd", OpKind::Dec, Counter::C1, "qe"),
            t("qe", OpKind::Dec, Counter::C1, "qf"),
            t("qf", OpKind::Zero, Counter::C1, "qh"),
        ],
    )
    .expect("fixture machine")
}

/// Works counter 2 instead, with a zero test on counter 1 in the middle of
/// the run rather than at the end.
pub fn m4() -> Machine {
    Machine::new(
        "qi",
        "qh",
        vec![
            t("qi", OpKind::Inc, Counter::C2, "qa"),
            t("qa", OpKind::Inc, Counter::C2, "qb"),
            t("qb", OpKind::Inc, Counter::C2, "qc"),
            t("qc", OpKind::Zero, Counter::C1, "qd"),
            t("qd", OpKind::Dec, Counter::C2, "qe"),
            t("qe", OpKind::Dec, Counter::C2, "qf"),
            t("qf", OpKind::Dec, Counter::C2, "qg"),
            t("qg", OpKind::Zero, Counter::C2, "qh"),
        ],
    )
    .expect("fixture machine")
}

/// One-variable domain used by the command-line and rendering tests:
/// `x` cycles a -> b -> c -> a with distinct duration shapes, every a-token
/// must see a c-token start no earlier than its own start, and some
/// c-token must exist.
pub fn sample_domain() -> Domain {
    let values = vec!["a".to_string(), "b".to_string(), "c".to_string()];
    let transitions = BTreeMap::from([
        ("a".to_string(), vec!["b".to_string()]),
        ("b".to_string(), vec!["c".to_string()]),
        ("c".to_string(), vec!["a".to_string()]),
    ]);
    let durations = BTreeMap::from([
        ("a".to_string(), Interval::closed(5, 8)),
        ("b".to_string(), Interval::closed(1, 4)),
        ("c".to_string(), Interval::at_least(2)),
    ]);
    let x = StateVariable::new("x", values, transitions, durations).expect("fixture variable");
    let follow = SynchronizationRule::Trigger {
        trigger: Quantifier {
            name: TokenName::new("o"),
            variable: "x".into(),
            value: "a".into(),
        },
        disjuncts: vec![ExistentialStatement {
            quantifiers: vec![Quantifier {
                name: TokenName::new("o2"),
                variable: "x".into(),
                value: "c".into(),
            }],
            atoms: vec![Atom::Interval {
                left: TokenName::new("o"),
                left_event: Event::Start,
                right: TokenName::new("o2"),
                right_event: Event::Start,
                interval: Interval::at_least(0),
            }],
        }],
    };
    let goal = SynchronizationRule::TriggerLess {
        disjuncts: vec![ExistentialStatement {
            quantifiers: vec![Quantifier {
                name: TokenName::new("o"),
                variable: "x".into(),
                value: "c".into(),
            }],
            atoms: vec![],
        }],
    };
    Domain::new(vec![x], vec![follow, goal]).expect("fixture domain")
}

/// A plan for [`sample_domain`] that both semantics accept: a for 7,
/// b for 3, c for 39/10.
pub fn sample_plan() -> MultiTimeline {
    let tokens = vec![
        Token::new("a", Rational::from_int(7)),
        Token::new("b", Rational::from_int(3)),
        Token::new("c", Rational::new(39, 10)),
    ];
    MultiTimeline::new(vec![Timeline::new("x", tokens).expect("fixture timeline")])
        .expect("fixture plan")
}

/// Size knobs for the random instances.
#[derive(Clone, Copy, Debug)]
pub struct InstanceConfig {
    pub max_variables: usize,
    pub max_tokens: usize,
    pub max_quantifiers: usize,
    pub max_disjuncts: usize,
    pub max_atoms: usize,
}

impl Default for InstanceConfig {
    fn default() -> Self {
        InstanceConfig {
            max_variables: 2,
            max_tokens: 6,
            max_quantifiers: 3,
            max_disjuncts: 2,
            max_atoms: 3,
        }
    }
}

const VALUES: [&str; 3] = ["a", "b", "c"];

/// A value drawn from the shared pool, occasionally one that no timeline
/// holds so that empty candidate sets get exercised.
fn random_value(rng: &mut impl Rng) -> String {
    if rng.gen_bool(0.08) {
        "zz".to_string()
    } else {
        VALUES[rng.gen_range(0..VALUES.len())].to_string()
    }
}

fn random_duration(rng: &mut impl Rng) -> Rational {
    Rational::new(rng.gen_range(0..=6), rng.gen_range(1..=3))
}

/// Free-form timelines (no domain behind them) for rule-evaluation tests:
/// variables y0, y1, ... over the shared value pool, with small rational
/// durations, zero included.
pub fn random_plan(rng: &mut impl Rng, cfg: &InstanceConfig) -> MultiTimeline {
    let variables = rng.gen_range(1..=cfg.max_variables);
    let timelines = (0..variables)
        .map(|v| {
            let tokens = (0..rng.gen_range(1..=cfg.max_tokens))
                .map(|_| Token::new(VALUES[rng.gen_range(0..VALUES.len())], random_duration(rng)))
                .collect();
            Timeline::new(format!("y{v}"), tokens).expect("nonempty token list")
        })
        .collect();
    MultiTimeline::new(timelines).expect("distinct variable names")
}

pub fn random_interval(rng: &mut impl Rng) -> Interval {
    let lo = rng.gen_range(0..=3u64);
    if rng.gen_bool(0.3) {
        return if rng.gen_bool(0.5) {
            Interval::at_least(lo)
        } else {
            Interval::greater_than(lo)
        };
    }
    let hi = lo + rng.gen_range(0..=3u64);
    if hi == lo {
        Interval::point(lo)
    } else {
        Interval::new(lo, rng.gen_bool(0.7), Some(hi), rng.gen_bool(0.7))
            .expect("lo < hi is never empty")
    }
}

fn pick_name(rng: &mut impl Rng, names: &[TokenName]) -> TokenName {
    names[rng.gen_range(0..names.len())].clone()
}

fn pick_event(rng: &mut impl Rng) -> Event {
    if rng.gen_bool(0.5) {
        Event::Start
    } else {
        Event::End
    }
}

fn random_atom(rng: &mut impl Rng, names: &[TokenName]) -> Atom {
    match rng.gen_range(0..10) {
        0 => Atom::TokenConst {
            token: pick_name(rng, names),
            event: pick_event(rng),
            bound: rng.gen_range(0..=4),
            interval: random_interval(rng),
        },
        1 => Atom::ConstToken {
            bound: rng.gen_range(0..=4),
            token: pick_name(rng, names),
            event: pick_event(rng),
            interval: random_interval(rng),
        },
        _ => Atom::Interval {
            left: pick_name(rng, names),
            left_event: pick_event(rng),
            right: pick_name(rng, names),
            right_event: pick_event(rng),
            interval: random_interval(rng),
        },
    }
}

fn random_statement(
    rng: &mut impl Rng,
    plan: &MultiTimeline,
    cfg: &InstanceConfig,
    extra_scope: Option<&TokenName>,
) -> ExistentialStatement {
    let plan_variables: Vec<&str> = plan.variables().collect();
    let quantifiers: Vec<Quantifier> = (0..rng.gen_range(0..=cfg.max_quantifiers))
        .map(|i| Quantifier {
            name: TokenName::new(format!("o{}", i + 1)),
            variable: plan_variables[rng.gen_range(0..plan_variables.len())].to_string(),
            value: random_value(rng),
        })
        .collect();
    let mut scope: Vec<TokenName> = quantifiers.iter().map(|q| q.name.clone()).collect();
    if let Some(name) = extra_scope {
        scope.push(name.clone());
    }
    let atoms = if scope.is_empty() {
        vec![]
    } else {
        (0..rng.gen_range(0..=cfg.max_atoms))
            .map(|_| random_atom(rng, &scope))
            .collect()
    };
    ExistentialStatement { quantifiers, atoms }
}

fn random_disjuncts(
    rng: &mut impl Rng,
    plan: &MultiTimeline,
    cfg: &InstanceConfig,
    extra_scope: Option<&TokenName>,
) -> Vec<ExistentialStatement> {
    // An empty disjunction (unsatisfiable body) stays rare but present.
    let count = if rng.gen_bool(0.06) {
        0
    } else {
        rng.gen_range(1..=cfg.max_disjuncts)
    };
    (0..count)
        .map(|_| random_statement(rng, plan, cfg, extra_scope))
        .collect()
}

/// A trigger rule whose names all resolve against `plan`'s variables.
/// Trigger values may be absent from the plan (vacuous satisfaction) and
/// disjunct bodies may be empty (vacuous failure).
pub fn random_trigger_rule(
    rng: &mut impl Rng,
    plan: &MultiTimeline,
    cfg: &InstanceConfig,
) -> SynchronizationRule {
    let plan_variables: Vec<&str> = plan.variables().collect();
    let trigger = Quantifier {
        name: TokenName::new("o"),
        variable: plan_variables[rng.gen_range(0..plan_variables.len())].to_string(),
        value: random_value(rng),
    };
    let disjuncts = random_disjuncts(rng, plan, cfg, Some(&trigger.name));
    SynchronizationRule::Trigger { trigger, disjuncts }
}

/// Either shape of rule, evenly split.
pub fn random_rule(
    rng: &mut impl Rng,
    plan: &MultiTimeline,
    cfg: &InstanceConfig,
) -> SynchronizationRule {
    if rng.gen_bool(0.5) {
        random_trigger_rule(rng, plan, cfg)
    } else {
        SynchronizationRule::TriggerLess {
            disjuncts: random_disjuncts(rng, plan, cfg, None),
        }
    }
}

/// A narrow duration: a point, or one window of width one per variable.
/// Bounded widths keep exhaustive time enumeration affordable.
fn narrow_duration(rng: &mut impl Rng, allow_wide: bool) -> Interval {
    if allow_wide && rng.gen_bool(0.5) {
        Interval::closed(1, 2)
    } else {
        Interval::point(rng.gen_range(1..=3))
    }
}

/// Small solvable-or-not domains for solver cross-checks: at most two
/// variables with at most two values each, duration windows narrow enough
/// for exhaustive search (at most one non-point duration per variable),
/// and up to two rules binding only declared values.
pub fn random_domain(rng: &mut impl Rng) -> Domain {
    let variable_count = rng.gen_range(1..=2);
    let mut variables = Vec::new();
    for v in 0..variable_count {
        let count = rng.gen_range(1..=2);
        let values: Vec<String> = VALUES[..count].iter().map(|s| s.to_string()).collect();
        let transitions: BTreeMap<String, Vec<String>> = values
            .iter()
            .map(|from| {
                let targets = values
                    .iter()
                    .filter(|_| rng.gen_bool(0.6))
                    .cloned()
                    .collect();
                (from.clone(), targets)
            })
            .collect();
        let wide = rng.gen_range(0..values.len());
        let durations: BTreeMap<String, Interval> = values
            .iter()
            .enumerate()
            .map(|(i, value)| (value.clone(), narrow_duration(rng, i == wide)))
            .collect();
        variables.push(
            StateVariable::new(format!("y{v}"), values, transitions, durations)
                .expect("generated variable"),
        );
    }

    let rule_count = rng.gen_range(0..=2);
    let rules = (0..rule_count)
        .map(|_| random_domain_rule(rng, &variables))
        .collect();
    Domain::new(variables, rules).expect("generated rules bind declared values")
}

fn random_declared(rng: &mut impl Rng, variables: &[StateVariable]) -> (String, String) {
    let variable = &variables[rng.gen_range(0..variables.len())];
    let value = &variable.values()[rng.gen_range(0..variable.values().len())];
    (variable.name().to_string(), value.clone())
}

fn random_domain_statement(
    rng: &mut impl Rng,
    variables: &[StateVariable],
    extra_scope: Option<&TokenName>,
) -> ExistentialStatement {
    let quantifiers: Vec<Quantifier> = (0..rng.gen_range(0..=2))
        .map(|i| {
            let (variable, value) = random_declared(rng, variables);
            Quantifier {
                name: TokenName::new(format!("o{}", i + 1)),
                variable,
                value,
            }
        })
        .collect();
    let mut scope: Vec<TokenName> = quantifiers.iter().map(|q| q.name.clone()).collect();
    if let Some(name) = extra_scope {
        scope.push(name.clone());
    }
    let atoms = if scope.is_empty() {
        vec![]
    } else {
        (0..rng.gen_range(0..=2))
            .map(|_| random_atom(rng, &scope))
            .collect()
    };
    ExistentialStatement { quantifiers, atoms }
}

fn random_domain_rule(rng: &mut impl Rng, variables: &[StateVariable]) -> SynchronizationRule {
    let disjunct_count = if rng.gen_bool(0.08) {
        0
    } else {
        rng.gen_range(1..=2)
    };
    if rng.gen_bool(0.5) {
        let (variable, value) = random_declared(rng, variables);
        let trigger = Quantifier {
            name: TokenName::new("o"),
            variable,
            value,
        };
        let disjuncts = (0..disjunct_count)
            .map(|_| random_domain_statement(rng, variables, Some(&trigger.name)))
            .collect();
        SynchronizationRule::Trigger { trigger, disjuncts }
    } else {
        SynchronizationRule::TriggerLess {
            disjuncts: (0..disjunct_count)
                .map(|_| random_domain_statement(rng, variables, None))
                .collect(),
        }
    }
}

/// Decides plan existence within a token budget by exhaustion, judging
/// candidates with [`is_plan`] only: every transition-consistent skeleton
/// is tried with every duration tuple on the rational grid of denominator
/// (boundary points + zero + 1). If any plan with these many tokens
/// exists, one exists on that grid (difference-constraint solutions are
/// realized by integer shortest-path potentials, with strictness
/// corrections below one grid step), so the search is complete for
/// domains whose durations are bounded.
///
/// [`is_plan`]: crate::validator::is_plan
pub fn plan_exists_by_exhaustion(
    domain: &Domain,
    token_bound: usize,
    semantics: crate::validator::Semantics,
) -> bool {
    fn sequences(variable: &StateVariable, bound: usize) -> Vec<Vec<String>> {
        let mut out = Vec::new();
        let mut frontier: Vec<Vec<String>> =
            variable.values().iter().map(|v| vec![v.clone()]).collect();
        for _ in 0..bound {
            let mut next = Vec::new();
            for seq in &frontier {
                out.push(seq.clone());
                for succ in variable.successors(seq.last().expect("nonempty")) {
                    let mut longer = seq.clone();
                    longer.push(succ.clone());
                    next.push(longer);
                }
            }
            frontier = next;
        }
        out
    }

    /// Scaled grid values a duration may take, `None` when unbounded.
    fn duration_grid(interval: &Interval, denom: i64) -> Option<std::ops::RangeInclusive<i64>> {
        let lo = interval.lo() as i64 * denom + i64::from(!interval.lo_closed());
        let hi = interval.hi()? as i64 * denom - i64::from(!interval.hi_closed());
        Some(lo..=hi)
    }

    fn timelines_for(variable: &StateVariable, seq: &[String], denom: i64) -> Vec<Timeline> {
        let grids: Vec<Vec<i64>> = seq
            .iter()
            .map(|value| {
                let interval = variable.duration(value).expect("total duration map");
                duration_grid(interval, denom)
                    .expect("exhaustion oracle needs bounded durations")
                    .collect()
            })
            .collect();
        let mut out = Vec::new();
        let mut picks = vec![0usize; seq.len()];
        'all: loop {
            let tokens = seq
                .iter()
                .zip(&picks)
                .zip(&grids)
                .map(|((value, &p), grid)| Token::new(value.clone(), Rational::new(grid[p], denom)))
                .collect();
            out.push(Timeline::new(variable.name(), tokens).expect("nonempty"));
            let mut k = picks.len();
            loop {
                if k == 0 {
                    break 'all;
                }
                k -= 1;
                picks[k] += 1;
                if picks[k] < grids[k].len() {
                    break;
                }
                picks[k] = 0;
                if k == 0 {
                    break 'all;
                }
            }
        }
        out
    }

    fn assemble(
        domain: &Domain,
        per_variable: &[Vec<Timeline>],
        chosen: &mut Vec<Timeline>,
        semantics: crate::validator::Semantics,
    ) -> bool {
        let depth = chosen.len();
        if depth == per_variable.len() {
            let plan = MultiTimeline::new(chosen.clone()).expect("distinct variables");
            return crate::validator::is_plan(domain, &plan, semantics)
                .expect("well-formed domain")
                .verdict;
        }
        for timeline in &per_variable[depth] {
            chosen.push(timeline.clone());
            if assemble(domain, per_variable, chosen, semantics) {
                return true;
            }
            chosen.pop();
        }
        false
    }

    if token_bound == 0 || domain.variables().is_empty() {
        return false;
    }
    let all_sequences: Vec<Vec<Vec<String>>> = domain
        .variables()
        .iter()
        .map(|v| sequences(v, token_bound))
        .collect();

    let mut skeleton_picks = vec![0usize; all_sequences.len()];
    'skeletons: loop {
        let total: usize = skeleton_picks
            .iter()
            .zip(&all_sequences)
            .map(|(&p, seqs)| seqs[p].len())
            .sum();
        let denom = (total + domain.variables().len() + 2) as i64;
        let per_variable: Vec<Vec<Timeline>> = domain
            .variables()
            .iter()
            .zip(&skeleton_picks)
            .zip(&all_sequences)
            .map(|((variable, &p), seqs)| timelines_for(variable, &seqs[p], denom))
            .collect();
        if assemble(domain, &per_variable, &mut Vec::new(), semantics) {
            return true;
        }
        let mut k = skeleton_picks.len();
        loop {
            if k == 0 {
                break 'skeletons;
            }
            k -= 1;
            skeleton_picks[k] += 1;
            if skeleton_picks[k] < all_sequences[k].len() {
                break;
            }
            skeleton_picks[k] = 0;
            if k == 0 {
                break 'skeletons;
            }
        }
    }
    false
}

/// A difference-bound system over at most `max_vars` named points plus the
/// zero point, with integer bounds in `[-max_bound, max_bound]` and a mix
/// of strict and non-strict comparisons.
pub fn random_constraint_system(
    rng: &mut impl Rng,
    max_vars: usize,
    max_bound: i64,
) -> ConstraintSystem {
    let mut cs = ConstraintSystem::new();
    let count = rng.gen_range(1..=max_vars);
    let mut points = vec![cs.zero()];
    for i in 0..count {
        let v = cs.fresh(format!("x{i}"));
        points.push(v);
    }
    let constraints = rng.gen_range(0..=2 * count + 2);
    for _ in 0..constraints {
        let left = points[rng.gen_range(0..points.len())];
        let right = loop {
            let candidate = points[rng.gen_range(0..points.len())];
            if candidate != left {
                break candidate;
            }
        };
        cs.add(
            left,
            right,
            Rational::from_int(rng.gen_range(-max_bound..=max_bound)),
            rng.gen_bool(0.4),
        );
    }
    cs
}

/// Exhaustive feasibility oracle for systems with integer bounds.
///
/// Searches assignments on the rational grid with denominator
/// `variables + 1` spanning `max(1, |bound|) * (variables + 1)` around an
/// anchor, which is granular and wide enough for difference constraints:
/// shortest-path potentials are integers spanning at most
/// `(variables - 1) * bound`, and strict bounds need corrections below one
/// grid step. Everything runs in scaled integer arithmetic, so strictness
/// is exact.
///
/// Difference constraints only relate variables within a connected
/// component of the constraint graph, so each component is searched
/// independently with its first variable pinned (solutions are
/// shift-invariant per component); variables free of constraints need no
/// search at all.
pub fn grid_feasible(cs: &ConstraintSystem) -> bool {
    use num::ToPrimitive;

    let n = cs.var_count();
    let denom = n as i64 + 1;
    let mut max_bound: i64 = 1;
    let mut edges: Vec<(usize, usize, i64)> = Vec::new();
    for c in cs.constraints() {
        assert!(c.bound.is_integer(), "grid oracle expects integer bounds");
        let b = c.bound.numer().to_i64().expect("oracle-sized bound");
        max_bound = max_bound.max(b.abs());
        let scaled = b * denom - i64::from(c.strict);
        if c.left == c.right {
            // x - x <= b needs no search.
            if scaled < 0 {
                return false;
            }
        } else {
            edges.push((c.left.index(), c.right.index(), scaled));
        }
    }
    let top = max_bound * denom * denom;

    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(l, r, _) in &edges {
        adjacency[l].push(r);
        adjacency[r].push(l);
    }

    /// One component, variables renumbered to visit order with the root
    /// pinned to 0; `checks[p]` holds the constraints decidable once
    /// positions 0..=p have values.
    fn component_feasible(order: &[usize], edges: &[(usize, usize, i64)], top: i64) -> bool {
        let position: BTreeMap<usize, usize> =
            order.iter().enumerate().map(|(p, &v)| (v, p)).collect();
        let mut checks: Vec<Vec<(usize, usize, i64)>> = vec![Vec::new(); order.len()];
        for &(l, r, b) in edges {
            if let (Some(&pl), Some(&pr)) = (position.get(&l), position.get(&r)) {
                checks[pl.max(pr)].push((pl, pr, b));
            }
        }

        fn extend(values: &mut Vec<i64>, top: i64, checks: &[Vec<(usize, usize, i64)>]) -> bool {
            let p = values.len();
            if p == checks.len() {
                return true;
            }
            let mut lo = -top;
            let mut hi = top;
            for &(l, r, b) in &checks[p] {
                if l == p {
                    hi = hi.min(values[r] + b);
                } else {
                    lo = lo.max(values[l] - b);
                }
            }
            for x in lo..=hi {
                values.push(x);
                if extend(values, top, checks) {
                    return true;
                }
                values.pop();
            }
            false
        }

        let mut values = vec![0i64];
        extend(&mut values, top, &checks)
    }

    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] || adjacency[root].is_empty() {
            continue;
        }
        let mut order = vec![root];
        seen[root] = true;
        let mut next = 0;
        while next < order.len() {
            let u = order[next];
            next += 1;
            for &v in &adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    order.push(v);
                }
            }
        }
        if !component_feasible(&order, &edges, top) {
            return false;
        }
    }
    true
}
