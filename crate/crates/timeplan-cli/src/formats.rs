//! File formats: JSON documents for domains and plans, a line format for
//! counter machines.
//!
//! Domains and plans are JSON objects keyed `variables`/`rules` and
//! `timelines`. Every rational is a string (`"7"`, `"39/10"`; exact decimal
//! literals such as `"3.9"` are accepted on input), never a float. Intervals
//! are bracket strings (`"[1, 4]"`, `"[2, inf["`) or comparison shorthand
//! (`">= 1"`). Serialization emits the canonical spelling of each, so
//! `parse(serialize(x)) == x` for every value built by this crate.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use timeplan::minsky::{Counter, Instruction, Machine, MachineError, OpKind, Transition};
use timeplan::model::{
    Atom, Domain, Event, ExistentialStatement, ModelError, MultiTimeline, Quantifier,
    StateVariable, SynchronizationRule, Timeline, Token, TokenName,
};
use timeplan::{Interval, Rational};

/// Errors from parsing or checking any of the three formats.
#[derive(Debug, Error)]
pub enum FormatError {
    /// Malformed JSON; the message carries line and column.
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    /// A bad line in the machine format.
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    /// A field inside an otherwise well-formed document.
    #[error("{path}: {message}")]
    Field { path: String, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Machine(#[from] MachineError),
}

fn field_err(path: impl Into<String>, message: impl ToString) -> FormatError {
    FormatError::Field {
        path: path.into(),
        message: message.to_string(),
    }
}

#[derive(Serialize, Deserialize)]
struct DomainDoc {
    variables: Vec<VariableDoc>,
    rules: Vec<RuleDoc>,
}

#[derive(Serialize, Deserialize)]
struct VariableDoc {
    name: String,
    values: Vec<String>,
    transitions: BTreeMap<String, Vec<String>>,
    durations: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
struct RuleDoc {
    /// Absent for trigger-less rules.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    trigger: Option<QuantifierDoc>,
    disjuncts: Vec<DisjunctDoc>,
}

#[derive(Serialize, Deserialize)]
struct QuantifierDoc {
    name: String,
    variable: String,
    value: String,
}

#[derive(Serialize, Deserialize)]
struct DisjunctDoc {
    #[serde(default)]
    quantifiers: Vec<QuantifierDoc>,
    #[serde(default)]
    atoms: Vec<AtomDoc>,
}

/// Atom shapes. Token events are strings `start(name)` or `end(name)`.
/// `interval` constrains `right - left`, `token-const` constrains
/// `bound - token`, `const-token` constrains `token - bound`.
#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum AtomDoc {
    Interval {
        left: String,
        right: String,
        interval: String,
    },
    TokenConst {
        token: String,
        bound: u64,
        interval: String,
    },
    ConstToken {
        bound: u64,
        token: String,
        interval: String,
    },
}

#[derive(Serialize, Deserialize)]
struct PlanDoc {
    timelines: Vec<TimelineDoc>,
}

#[derive(Serialize, Deserialize)]
struct TimelineDoc {
    variable: String,
    tokens: Vec<TokenDoc>,
}

#[derive(Serialize, Deserialize)]
struct TokenDoc {
    value: String,
    duration: String,
}

fn event_ref(name: &TokenName, event: Event) -> String {
    format!("{event}({name})")
}

fn parse_event_ref(text: &str, path: &str) -> Result<(TokenName, Event), FormatError> {
    let inner = |prefix: &str| {
        text.strip_prefix(prefix)
            .and_then(|rest| rest.strip_suffix(')'))
    };
    let (name, event) = if let Some(name) = inner("start(") {
        (name, Event::Start)
    } else if let Some(name) = inner("end(") {
        (name, Event::End)
    } else {
        return Err(field_err(
            path,
            format!("expected start(name) or end(name), got {text:?}"),
        ));
    };
    if name.is_empty() || name.contains(['(', ')']) {
        return Err(field_err(path, format!("bad token name in {text:?}")));
    }
    Ok((TokenName::new(name), event))
}

fn parse_interval(text: &str, path: &str) -> Result<Interval, FormatError> {
    text.parse::<Interval>()
        .map_err(|e| field_err(format!("{path}.interval"), e))
}

fn quantifier_doc(q: &Quantifier) -> QuantifierDoc {
    QuantifierDoc {
        name: q.name.as_str().to_owned(),
        variable: q.variable.clone(),
        value: q.value.clone(),
    }
}

fn quantifier_from_doc(doc: QuantifierDoc) -> Quantifier {
    Quantifier {
        name: TokenName::new(doc.name),
        variable: doc.variable,
        value: doc.value,
    }
}

fn atom_doc(atom: &Atom) -> AtomDoc {
    match atom {
        Atom::Interval {
            left,
            left_event,
            right,
            right_event,
            interval,
        } => AtomDoc::Interval {
            left: event_ref(left, *left_event),
            right: event_ref(right, *right_event),
            interval: interval.to_string(),
        },
        Atom::TokenConst {
            token,
            event,
            bound,
            interval,
        } => AtomDoc::TokenConst {
            token: event_ref(token, *event),
            bound: *bound,
            interval: interval.to_string(),
        },
        Atom::ConstToken {
            bound,
            token,
            event,
            interval,
        } => AtomDoc::ConstToken {
            bound: *bound,
            token: event_ref(token, *event),
            interval: interval.to_string(),
        },
    }
}

fn atom_from_doc(doc: AtomDoc, path: &str) -> Result<Atom, FormatError> {
    Ok(match doc {
        AtomDoc::Interval {
            left,
            right,
            interval,
        } => {
            let (left, left_event) = parse_event_ref(&left, &format!("{path}.left"))?;
            let (right, right_event) = parse_event_ref(&right, &format!("{path}.right"))?;
            Atom::Interval {
                left,
                left_event,
                right,
                right_event,
                interval: parse_interval(&interval, path)?,
            }
        }
        AtomDoc::TokenConst {
            token,
            bound,
            interval,
        } => {
            let (token, event) = parse_event_ref(&token, &format!("{path}.token"))?;
            Atom::TokenConst {
                token,
                event,
                bound,
                interval: parse_interval(&interval, path)?,
            }
        }
        AtomDoc::ConstToken {
            bound,
            token,
            interval,
        } => {
            let (token, event) = parse_event_ref(&token, &format!("{path}.token"))?;
            Atom::ConstToken {
                bound,
                token,
                event,
                interval: parse_interval(&interval, path)?,
            }
        }
    })
}

fn statement_doc(statement: &ExistentialStatement) -> DisjunctDoc {
    DisjunctDoc {
        quantifiers: statement.quantifiers.iter().map(quantifier_doc).collect(),
        atoms: statement.atoms.iter().map(atom_doc).collect(),
    }
}

fn statement_from_doc(doc: DisjunctDoc, path: &str) -> Result<ExistentialStatement, FormatError> {
    let atoms = doc
        .atoms
        .into_iter()
        .enumerate()
        .map(|(i, a)| atom_from_doc(a, &format!("{path}.atoms[{i}]")))
        .collect::<Result<_, _>>()?;
    Ok(ExistentialStatement {
        quantifiers: doc
            .quantifiers
            .into_iter()
            .map(quantifier_from_doc)
            .collect(),
        atoms,
    })
}

fn rule_doc(rule: &SynchronizationRule) -> RuleDoc {
    let trigger = match rule {
        SynchronizationRule::Trigger { trigger, .. } => Some(quantifier_doc(trigger)),
        SynchronizationRule::TriggerLess { .. } => None,
    };
    RuleDoc {
        trigger,
        disjuncts: rule.disjuncts().iter().map(statement_doc).collect(),
    }
}

fn rule_from_doc(doc: RuleDoc, index: usize) -> Result<SynchronizationRule, FormatError> {
    let disjuncts = doc
        .disjuncts
        .into_iter()
        .enumerate()
        .map(|(i, d)| statement_from_doc(d, &format!("rules[{index}].disjuncts[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(match doc.trigger {
        Some(t) => SynchronizationRule::Trigger {
            trigger: quantifier_from_doc(t),
            disjuncts,
        },
        None => SynchronizationRule::TriggerLess { disjuncts },
    })
}

/// Parses a domain document and runs every model well-formedness check.
pub fn parse_domain(text: &str) -> Result<Domain, FormatError> {
    let doc: DomainDoc = serde_json::from_str(text)?;
    let mut variables = Vec::with_capacity(doc.variables.len());
    for (i, v) in doc.variables.into_iter().enumerate() {
        let mut durations = BTreeMap::new();
        for (value, text) in v.durations {
            let interval = text
                .parse::<Interval>()
                .map_err(|e| field_err(format!("variables[{i}].durations[{value}]"), e))?;
            durations.insert(value, interval);
        }
        variables.push(StateVariable::new(
            v.name,
            v.values,
            v.transitions,
            durations,
        )?);
    }
    let rules = doc
        .rules
        .into_iter()
        .enumerate()
        .map(|(i, r)| rule_from_doc(r, i))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Domain::new(variables, rules)?)
}

pub fn serialize_domain(domain: &Domain) -> String {
    let doc = DomainDoc {
        variables: domain
            .variables()
            .iter()
            .map(|v| VariableDoc {
                name: v.name().to_owned(),
                values: v.values().to_vec(),
                transitions: v
                    .values()
                    .iter()
                    .map(|val| (val.clone(), v.successors(val).to_vec()))
                    .collect(),
                durations: v
                    .values()
                    .iter()
                    .map(|val| {
                        let d = v.duration(val).expect("every value has a duration");
                        (val.clone(), d.to_string())
                    })
                    .collect(),
            })
            .collect(),
        rules: domain.rules().iter().map(rule_doc).collect(),
    };
    to_pretty_json(&doc)
}

/// Parses a plan document without a domain: structure only, no value checks.
/// This is what `render` uses; validation paths should prefer [`parse_plan`].
pub fn parse_plan_loose(text: &str) -> Result<MultiTimeline, FormatError> {
    let doc: PlanDoc = serde_json::from_str(text)?;
    let mut timelines = Vec::with_capacity(doc.timelines.len());
    for (i, t) in doc.timelines.into_iter().enumerate() {
        let mut tokens = Vec::with_capacity(t.tokens.len());
        for (j, tok) in t.tokens.into_iter().enumerate() {
            let duration = tok
                .duration
                .parse::<Rational>()
                .map_err(|e| field_err(format!("timelines[{i}].tokens[{j}].duration"), e))?;
            tokens.push(Token::new(tok.value, duration));
        }
        timelines.push(Timeline::new(t.variable, tokens)?);
    }
    Ok(MultiTimeline::new(timelines)?)
}

/// Parses a plan document against a domain: every timeline must belong to a
/// declared variable and use only declared values. Whether the plan actually
/// satisfies the domain is the validator's question, not the parser's.
pub fn parse_plan(text: &str, domain: &Domain) -> Result<MultiTimeline, FormatError> {
    let plan = parse_plan_loose(text)?;
    for timeline in plan.timelines() {
        let variable = domain.variable(timeline.variable()).ok_or_else(|| {
            field_err(
                format!("timelines[{}]", timeline.variable()),
                "variable is not declared in the domain",
            )
        })?;
        for (j, token) in timeline.tokens().iter().enumerate() {
            if !variable.has_value(&token.value) {
                return Err(field_err(
                    format!("timelines[{}].tokens[{j}]", timeline.variable()),
                    format!("value {} is not declared", token.value),
                ));
            }
        }
    }
    Ok(plan)
}

pub fn serialize_plan(plan: &MultiTimeline) -> String {
    let doc = PlanDoc {
        timelines: plan
            .timelines()
            .map(|t| TimelineDoc {
                variable: t.variable().to_owned(),
                tokens: t
                    .tokens()
                    .iter()
                    .map(|tok| TokenDoc {
                        value: tok.value.clone(),
                        duration: tok.duration.to_string(),
                    })
                    .collect(),
            })
            .collect(),
    };
    to_pretty_json(&doc)
}

fn to_pretty_json(doc: &impl Serialize) -> String {
    let mut text = serde_json::to_string_pretty(doc).expect("document serialization");
    text.push('\n');
    text
}

/// Parses the machine line format: `init <loc>`, `halt <loc>`,
/// `trans <from> <inc|dec|zero> <1|2> <to>`. A `#` starts a comment.
pub fn parse_machine(text: &str) -> Result<Machine, FormatError> {
    let line_err = |line: usize, message: String| FormatError::Line { line, message };
    let mut init: Option<String> = None;
    let mut halt: Option<String> = None;
    let mut transitions = Vec::new();
    let mut last_line = 0;
    for (number, raw) in text.lines().enumerate() {
        let number = number + 1;
        last_line = number;
        let line = raw.split('#').next().unwrap_or("");
        let mut words = line.split_whitespace();
        let Some(keyword) = words.next() else {
            continue;
        };
        let rest: Vec<&str> = words.collect();
        match keyword {
            "init" | "halt" => {
                let [location] = rest.as_slice() else {
                    return Err(line_err(number, format!("{keyword} takes one location")));
                };
                let slot = if keyword == "init" {
                    &mut init
                } else {
                    &mut halt
                };
                if slot.is_some() {
                    return Err(line_err(number, format!("{keyword} given twice")));
                }
                *slot = Some((*location).to_owned());
            }
            "trans" => {
                let [from, op, counter, to] = rest.as_slice() else {
                    return Err(line_err(
                        number,
                        "trans takes: from, inc|dec|zero, 1|2, to".to_owned(),
                    ));
                };
                let kind = match *op {
                    "inc" => OpKind::Inc,
                    "dec" => OpKind::Dec,
                    "zero" => OpKind::Zero,
                    other => return Err(line_err(number, format!("unknown operation {other:?}"))),
                };
                let counter = counter
                    .parse::<u8>()
                    .ok()
                    .and_then(Counter::from_number)
                    .ok_or_else(|| {
                        line_err(number, format!("counter must be 1 or 2, got {counter:?}"))
                    })?;
                transitions.push(Transition {
                    from: (*from).to_owned(),
                    op: Instruction { kind, counter },
                    to: (*to).to_owned(),
                });
            }
            other => return Err(line_err(number, format!("unknown directive {other:?}"))),
        }
    }
    let init = init.ok_or_else(|| line_err(last_line, "missing init line".to_owned()))?;
    let halt = halt.ok_or_else(|| line_err(last_line, "missing halt line".to_owned()))?;
    Ok(Machine::new(init, halt, transitions)?)
}

pub fn serialize_machine(machine: &Machine) -> String {
    let mut out = String::new();
    out.push_str(&format!("init {}\n", machine.init()));
    out.push_str(&format!("halt {}\n", machine.halt()));
    for t in machine.transitions() {
        out.push_str(&format!(
            "trans {} {} {} {}\n",
            t.from, t.op.kind, t.op.counter, t.to
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use timeplan::reduction::compile;
    use timeplan::testing::{m1, sample_domain, sample_plan};

    #[test]
    fn domain_documents_round_trip() {
        for domain in [sample_domain(), compile(&m1())] {
            let text = serialize_domain(&domain);
            let back = parse_domain(&text).expect("serialized domain reparses");
            assert_eq!(back, domain);
            assert_eq!(serialize_domain(&back), text);
        }
    }

    #[test]
    fn plan_documents_round_trip_and_check_values() {
        let domain = sample_domain();
        let plan = sample_plan();
        let text = serialize_plan(&plan);
        assert_eq!(parse_plan(&text, &domain).expect("reparses"), plan);
        assert!(text.contains("39/10"), "durations stay rational: {text}");

        let renamed = text.replace("\"c\"", "\"zz\"");
        let err = parse_plan(&renamed, &domain).unwrap_err();
        assert!(err.to_string().contains("zz"), "{err}");
    }

    #[test]
    fn decimal_durations_are_exact_and_expressions_are_rejected() {
        let text = r#"{"timelines": [{"variable": "x", "tokens": [
            {"value": "a", "duration": "3.9"},
            {"value": "b", "duration": "0.1+0.2"}
        ]}]}"#;
        let err = parse_plan_loose(text).unwrap_err();
        assert!(err.to_string().contains("tokens[1].duration"), "{err}");

        let ok = text.replace("0.1+0.2", "1/2");
        let plan = parse_plan_loose(&ok).unwrap();
        let tokens = plan.get("x").unwrap().tokens();
        assert_eq!(tokens[0].duration, Rational::new(39, 10));
        assert_eq!(tokens[1].duration, Rational::new(1, 2));
    }

    #[test]
    fn comparison_shorthand_parses_into_canonical_intervals() {
        let domain = sample_domain();
        let text = serialize_domain(&domain).replace("\"[2, inf[\"", "\">= 2\"");
        let back = parse_domain(&text).expect("shorthand accepted");
        assert_eq!(back, domain);
    }

    #[test]
    fn undeclared_rule_values_are_named_in_errors() {
        let text =
            serialize_domain(&sample_domain()).replace("\"value\": \"c\"", "\"value\": \"ghost\"");
        let err = parse_domain(&text).unwrap_err();
        assert!(err.to_string().contains("ghost"), "{err}");
    }

    #[test]
    fn machine_lines_round_trip_and_report_positions() {
        let machine = m1();
        let text = serialize_machine(&machine);
        assert_eq!(parse_machine(&text).expect("reparses"), machine);

        let commented = format!("# shortest halting run has three steps\n{text}");
        assert_eq!(
            parse_machine(&commented).expect("comments ignored"),
            machine
        );

        let err = parse_machine("init a\nhalt b\ntrans a bump 1 b\n").unwrap_err();
        assert_eq!(err.to_string(), "line 3: unknown operation \"bump\"");
    }
}
