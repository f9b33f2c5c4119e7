//! Two-counter machines: nondeterministic control over a pair of unbounded
//! counters with increment, guarded decrement, and zero tests.
//!
//! Runs are searched breadth-first over configurations, so [`run`] returns a
//! shortest halting computation when one exists within the step budget, and
//! the result is monotone in that budget.

use std::collections::{HashMap, HashSet, VecDeque};

use num::bigint::BigUint;
use num::traits::{One, Zero};

/// Which of the two counters an instruction touches.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Counter {
    C1,
    C2,
}

impl Counter {
    pub fn index(self) -> usize {
        match self {
            Counter::C1 => 0,
            Counter::C2 => 1,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Counter::C1 => 1,
            Counter::C2 => 2,
        }
    }

    pub fn from_number(n: u8) -> Option<Counter> {
        match n {
            1 => Some(Counter::C1),
            2 => Some(Counter::C2),
            _ => None,
        }
    }
}

impl std::fmt::Display for Counter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// Instruction kinds: increment, guarded decrement, zero test.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum OpKind {
    Inc,
    Dec,
    Zero,
}

impl std::fmt::Display for OpKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OpKind::Inc => "inc",
            OpKind::Dec => "dec",
            OpKind::Zero => "zero",
        })
    }
}

/// An instruction: an operation applied to one counter.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Instruction {
    pub kind: OpKind,
    pub counter: Counter,
}

impl std::fmt::Display for Instruction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {}", self.kind, self.counter)
    }
}

/// A transition: source location, instruction, target location.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Transition {
    pub from: String,
    pub op: Instruction,
    pub to: String,
}

impl std::fmt::Display for Transition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} --{}--> {}", self.from, self.op, self.to)
    }
}

/// A two-counter machine. The transition list is ordered; that order is the
/// tiebreaker wherever a deterministic choice among transitions is needed.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Machine {
    init: String,
    halt: String,
    transitions: Vec<Transition>,
}

/// Structural problems that disqualify a machine.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MachineError {
    #[error("initial and halting locations must differ (both are {0})")]
    InitEqualsHalt(String),
    #[error("expected exactly one transition out of the initial location {init}, found {found}")]
    InitTransitionCount { init: String, found: usize },
    #[error("transition {0} leaves the halting location")]
    TransitionFromHalt(Transition),
    #[error("transition {0} enters the initial location")]
    TransitionToInit(Transition),
    #[error("transition {0} is declared twice")]
    DuplicateTransition(Transition),
}

impl Machine {
    /// Builds a machine, enforcing the structural assumptions: init and
    /// halt differ, no transition leaves halt or enters init, exactly one
    /// transition leaves init, and no transition repeats.
    pub fn new(
        init: impl Into<String>,
        halt: impl Into<String>,
        transitions: Vec<Transition>,
    ) -> Result<Machine, MachineError> {
        let init = init.into();
        let halt = halt.into();
        if init == halt {
            return Err(MachineError::InitEqualsHalt(init));
        }
        let mut seen = HashSet::new();
        for t in &transitions {
            if t.from == halt {
                return Err(MachineError::TransitionFromHalt(t.clone()));
            }
            if t.to == init {
                return Err(MachineError::TransitionToInit(t.clone()));
            }
            if !seen.insert(t.clone()) {
                return Err(MachineError::DuplicateTransition(t.clone()));
            }
        }
        let out_of_init = transitions.iter().filter(|t| t.from == init).count();
        if out_of_init != 1 {
            return Err(MachineError::InitTransitionCount {
                init,
                found: out_of_init,
            });
        }
        Ok(Machine {
            init,
            halt,
            transitions,
        })
    }

    pub fn init(&self) -> &str {
        &self.init
    }

    pub fn halt(&self) -> &str {
        &self.halt
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// The unique transition out of the initial location.
    pub fn initial_transition(&self) -> &Transition {
        self.transitions
            .iter()
            .find(|t| t.from == self.init)
            .expect("constructor guarantees exactly one")
    }

    /// Position of a transition in the declaration order.
    pub fn transition_index(&self, t: &Transition) -> Option<usize> {
        self.transitions.iter().position(|u| u == t)
    }

    /// Every location mentioned by the machine, initial first, halting
    /// last, the rest in first-mention order.
    pub fn locations(&self) -> Vec<&str> {
        let mut out: Vec<&str> = vec![self.init.as_str()];
        for t in &self.transitions {
            for loc in [t.from.as_str(), t.to.as_str()] {
                if loc != self.halt && !out.contains(&loc) {
                    out.push(loc);
                }
            }
        }
        out.push(self.halt.as_str());
        out
    }

    pub fn initial_configuration(&self) -> Configuration {
        Configuration {
            location: self.init.clone(),
            counters: [BigUint::zero(), BigUint::zero()],
        }
    }
}

/// A configuration: control location plus both counter values.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Configuration {
    pub location: String,
    pub counters: [BigUint; 2],
}

impl Configuration {
    pub fn new(
        location: impl Into<String>,
        c1: impl Into<BigUint>,
        c2: impl Into<BigUint>,
    ) -> Self {
        Configuration {
            location: location.into(),
            counters: [c1.into(), c2.into()],
        }
    }

    pub fn counter(&self, c: Counter) -> &BigUint {
        &self.counters[c.index()]
    }
}

impl std::fmt::Display for Configuration {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "({}, {}, {})",
            self.location, self.counters[0], self.counters[1]
        )
    }
}

/// A nonempty sequence of configurations produced by consecutive steps.
pub type Computation = Vec<Configuration>;

/// Applies one transition to a configuration if its guard admits it.
pub fn apply(config: &Configuration, t: &Transition) -> Option<Configuration> {
    if config.location != t.from {
        return None;
    }
    let i = t.op.counter.index();
    let mut counters = config.counters.clone();
    match t.op.kind {
        OpKind::Inc => counters[i] += BigUint::one(),
        OpKind::Dec => {
            if counters[i].is_zero() {
                return None;
            }
            counters[i] -= BigUint::one();
        }
        OpKind::Zero => {
            if !counters[i].is_zero() {
                return None;
            }
        }
    }
    Some(Configuration {
        location: t.to.clone(),
        counters,
    })
}

/// All successor configurations, each paired with the transition taken, in
/// transition declaration order with duplicates dropped (first occurrence
/// kept).
pub fn step(machine: &Machine, config: &Configuration) -> Vec<(Transition, Configuration)> {
    let mut seen = HashSet::new();
    machine
        .transitions
        .iter()
        .filter_map(|t| apply(config, t).map(|c| (t.clone(), c)))
        .filter(|(_, c)| seen.insert(c.clone()))
        .collect()
}

/// Breadth-first search for a halting computation from the initial
/// configuration, exploring at most `max_steps` layers. Returns a shortest
/// halting computation, deterministic via transition declaration order, or
/// `None` if none exists within the budget.
pub fn run(machine: &Machine, max_steps: usize) -> Option<Computation> {
    let start = machine.initial_configuration();
    if start.location == machine.halt {
        unreachable!("constructor forbids init == halt");
    }
    let mut parent: HashMap<Configuration, Configuration> = HashMap::new();
    let mut frontier = VecDeque::from([start.clone()]);
    let mut visited = HashSet::from([start]);
    for _ in 0..max_steps {
        let mut next = VecDeque::new();
        while let Some(config) = frontier.pop_front() {
            for (_, succ) in step(machine, &config) {
                if !visited.insert(succ.clone()) {
                    continue;
                }
                parent.insert(succ.clone(), config.clone());
                if succ.location == machine.halt {
                    let mut path = vec![succ];
                    while let Some(prev) = parent.get(path.last().unwrap()) {
                        path.push(prev.clone());
                    }
                    path.reverse();
                    return Some(path);
                }
                next.push_back(succ);
            }
        }
        if next.is_empty() {
            return None;
        }
        frontier = next;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

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

    #[test]
    fn structural_checks() {
        let base = vec![t("qi", OpKind::Inc, Counter::C1, "q1")];
        assert!(matches!(
            Machine::new("qi", "qi", base.clone()),
            Err(MachineError::InitEqualsHalt(_))
        ));
        assert!(matches!(
            Machine::new("qi", "qh", vec![]),
            Err(MachineError::InitTransitionCount { found: 0, .. })
        ));
        let two_out = vec![
            t("qi", OpKind::Inc, Counter::C1, "q1"),
            t("qi", OpKind::Inc, Counter::C2, "q1"),
        ];
        assert!(matches!(
            Machine::new("qi", "qh", two_out),
            Err(MachineError::InitTransitionCount { found: 2, .. })
        ));
        let from_halt = vec![
            t("qi", OpKind::Inc, Counter::C1, "q1"),
            t("qh", OpKind::Inc, Counter::C1, "q1"),
        ];
        assert!(matches!(
            Machine::new("qi", "qh", from_halt),
            Err(MachineError::TransitionFromHalt(_))
        ));
        let to_init = vec![
            t("qi", OpKind::Inc, Counter::C1, "q1"),
            t("q1", OpKind::Inc, Counter::C1, "qi"),
        ];
        assert!(matches!(
            Machine::new("qi", "qh", to_init),
            Err(MachineError::TransitionToInit(_))
        ));
        let dup = vec![
            t("qi", OpKind::Inc, Counter::C1, "q1"),
            t("q1", OpKind::Dec, Counter::C1, "q2"),
            t("q1", OpKind::Dec, Counter::C1, "q2"),
        ];
        assert!(matches!(
            Machine::new("qi", "qh", dup),
            Err(MachineError::DuplicateTransition(_))
        ));
    }

    #[test]
    fn guards() {
        let m = m1();
        let zero = Configuration::new("q1", 0u32, 0u32);
        // dec on an empty counter is blocked.
        assert!(step(&m, &zero).is_empty());
        let one = Configuration::new("q2", 1u32, 0u32);
        // zero test on a nonzero counter is blocked.
        assert!(step(&m, &one).is_empty());
    }

    #[test]
    fn m1_halts_with_expected_trace() {
        let comp = run(&m1(), 100).unwrap();
        let expected = vec![
            Configuration::new("qi", 0u32, 0u32),
            Configuration::new("q1", 1u32, 0u32),
            Configuration::new("q2", 0u32, 0u32),
            Configuration::new("qh", 0u32, 0u32),
        ];
        assert_eq!(comp, expected);
    }

    #[test]
    fn diverging_machine_returns_none() {
        // qi -> q1 -> q1 -> ... never reaches qh.
        let m = Machine::new(
            "qi",
            "qh",
            vec![
                t("qi", OpKind::Inc, Counter::C1, "q1"),
                t("q1", OpKind::Inc, Counter::C1, "q1"),
            ],
        )
        .unwrap();
        assert_eq!(run(&m, 50), None);
    }

    #[test]
    fn budget_monotonicity() {
        let m = m1();
        assert_eq!(run(&m, 2), None);
        assert!(run(&m, 3).is_some());
        assert_eq!(run(&m, 3), run(&m, 100));
    }

    #[test]
    fn shortest_run_wins_over_declaration_order() {
        // Two routes to qh: a 3-step detour declared first, a 2-step route
        // declared later. BFS must return the 2-step route.
        let m = Machine::new(
            "qi",
            "qh",
            vec![
                t("qi", OpKind::Inc, Counter::C1, "qa"),
                t("qa", OpKind::Inc, Counter::C1, "qb"),
                t("qb", OpKind::Inc, Counter::C1, "qh"),
                t("qa", OpKind::Zero, Counter::C2, "qh"),
            ],
        )
        .unwrap();
        let comp = run(&m, 10).unwrap();
        assert_eq!(comp.len(), 3);
        assert_eq!(comp.last().unwrap().location, "qh");
    }

    #[test]
    fn locations_order() {
        assert_eq!(m1().locations(), vec!["qi", "q1", "q2", "qh"]);
    }
}
