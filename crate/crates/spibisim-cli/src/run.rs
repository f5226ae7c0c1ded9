use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use spibisim::bisim::{bounded_distinguisher, check_relation, CheckConfig, UpToRule, Verdict};
use spibisim::bitrace::bitrace_consistent_bounded;
use spibisim::process::{bounded_traces, step, Process};
use spibisim::syntax::{
    parse_bitrace, parse_message, parse_message_set, parse_process, parse_relation, parse_theory, ParseError,
};
use spibisim::terms::Message;
use spibisim::theory::{
    compose_theories, is_consistent, is_consistent_oracle, normalize, prove_equiv, prove_synth,
    ObserverTheory,
};

use crate::args::Command;
use crate::error::CliError;

/// Exit code and text of one finished run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub code: u8,
    pub text: String,
}

impl Report {
    fn holds(text: String) -> Self {
        Report { code: 0, text }
    }

    fn fails(text: String) -> Self {
        Report { code: 1, text }
    }

    fn by(ok: bool, text: String) -> Self {
        Report {
            code: if ok { 0 } else { 1 },
            text,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_owned(),
        source,
    })
}

fn parsed<T>(origin: impl Into<String>, r: Result<T, ParseError>) -> Result<T, CliError> {
    r.map_err(|source| CliError::Parse {
        origin: origin.into(),
        source,
    })
}

fn load<T>(path: &Path, parse: fn(&str) -> Result<T, ParseError>) -> Result<T, CliError> {
    let text = read(path)?;
    parsed(path.display().to_string(), parse(&text))
}

fn flag_message(flag: &str, text: &str) -> Result<Message, CliError> {
    parsed(format!("--{flag}"), parse_message(text))
}

fn theory_lines(gamma: &ObserverTheory) -> String {
    gamma.iter().map(|(l, r)| format!("{l} <-> {r}\n")).collect()
}

pub fn run(command: &Command) -> Result<Report, CliError> {
    match command {
        Command::Prove {
            theory,
            left,
            right,
            emit_derivation,
        } => {
            let gamma = load(theory, parse_theory)?;
            let (m, n) = (flag_message("left", left)?, flag_message("right", right)?);
            let Some(d) = prove_equiv(&gamma, &m, &n) else {
                return Ok(Report::fails(format!("not derivable: {gamma} |- {m} <-> {n}\n")));
            };
            if let Some(path) = emit_derivation {
                fs::write(path, format!("{d}\n")).map_err(|source| CliError::Write {
                    path: path.clone(),
                    source,
                })?;
            }
            Ok(Report::holds(format!("{d}\n")))
        }
        Command::Synth { msgs, goal } => {
            let sigma = load(msgs, parse_message_set)?;
            let goal = flag_message("goal", goal)?;
            Ok(match prove_synth(&sigma, &goal) {
                Some(d) => Report::holds(format!("{d}\n")),
                None => Report::fails(format!("not derivable: {sigma} |- {goal}\n")),
            })
        }
        Command::Normalize { theory } => {
            let gamma = load(theory, parse_theory)?;
            Ok(Report::holds(theory_lines(&normalize(&gamma))))
        }
        Command::Consistent {
            theory,
            oracle,
            depth,
        } => {
            let gamma = load(theory, parse_theory)?;
            let verdict = is_consistent(&gamma);
            let mut text = match &verdict.violation {
                None => "consistent\n".to_string(),
                Some(v) => format!("inconsistent: {v}\n"),
            };
            if *oracle {
                let agrees = is_consistent_oracle(&gamma, *depth as usize) == verdict.is_consistent();
                let _ = writeln!(
                    text,
                    "oracle at depth {depth}: {}",
                    if agrees { "agrees" } else { "DISAGREES" }
                );
            }
            Ok(Report::by(verdict.is_consistent(), text))
        }
        Command::Compose { left, right } => {
            let (g1, g2) = (load(left, parse_theory)?, load(right, parse_theory)?);
            Ok(match compose_theories(&g1, &g2) {
                Some(g) => Report::holds(theory_lines(&g)),
                None => {
                    Report::fails("not composable: the middle components do not match one to one\n".into())
                }
            })
        }
        Command::Step { process } => {
            let p: Process = load(process, parse_process)?;
            let text = step(&p)
                .iter()
                .map(|(a, agent)| format!("{a} -> {agent}\n"))
                .collect();
            Ok(Report::holds(text))
        }
        Command::Traces { process, depth } => {
            let p = load(process, parse_process)?;
            let mut text = String::new();
            for trace in bounded_traces(&p, *depth as usize) {
                let events: Vec<String> = trace.iter().map(ToString::to_string).collect();
                let line = if events.is_empty() {
                    "<empty>".to_string()
                } else {
                    events.join(" . ")
                };
                let _ = writeln!(text, "{line}");
            }
            Ok(Report::holds(text))
        }
        Command::CheckBitrace { bitrace, subst_depth } => {
            let h = load(bitrace, parse_bitrace)?;
            let verdict = bitrace_consistent_bounded(&h, *subst_depth as usize);
            Ok(Report::by(verdict.is_consistent(), format!("{verdict}\n")))
        }
        Command::CheckBisim {
            relation,
            subst_depth,
            up_to,
            budget,
        } => {
            let r = load(relation, parse_relation)?;
            let cfg = CheckConfig {
                subst_depth: *subst_depth as usize,
                closure_budget: *budget as usize,
                ..CheckConfig::default()
            }
            .with_rules(UpToRule::parse_list(up_to)?);
            match check_relation(&r, &cfg) {
                v @ Verdict::RelationIllFormed { .. } => {
                    Err(CliError::IllFormed(format!("{}: {v}", relation.display())))
                }
                v => Ok(Report::by(v.is_verified(), format!("{v}\n"))),
            }
        }
        Command::Distinguish { left, right, depth } => {
            let (p, q) = (load(left, parse_process)?, load(right, parse_process)?);
            Ok(match bounded_distinguisher(&p, &q, *depth as usize) {
                None => Report::holds(format!("no distinguishing observer up to depth {depth}\n")),
                Some(d) => {
                    let trace: Vec<String> = d.trace.iter().map(ToString::to_string).collect();
                    Report::fails(format!(
                        "distinguished\n  observer: {}\n  barb: {}\n  observer trace: {}\n",
                        d.observer,
                        d.barb,
                        if trace.is_empty() {
                            "<empty>".to_string()
                        } else {
                            trace.join(" . ")
                        }
                    ))
                }
            })
        }
    }
}
