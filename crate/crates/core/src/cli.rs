//! Command-line front end. Thin: argument handling and report printing
//! only, with every number coming from the library.
//!
//! Output convention: lines starting with `#` are for humans; every other
//! line is machine-readable with a fixed field order. Probabilities and
//! amplitudes are printed with 12 significant digits, angle parameters
//! with 17.
//!
//! Exit codes: 0 success, 1 validation error (bad flags, unreadable file,
//! semantic circuit problems, unnormalized inputs), 2 syntax error in a
//! circuit file.

use std::collections::BTreeMap;
use std::io::Write;

use num_complex::Complex64;

use crate::circuit::{
    execute_circuit, parse_circuit, prepared_state, CircuitDescription, CircuitError, RunOutcome,
};
use crate::fock::{InputQutrit, StateVector};
use crate::measure::{sample_outcomes, MeasurementSpec};
use crate::nls::{canonical_theta, nls_gate, teleport_vacuum_two_photon, NlsReport};
use crate::optics::PhaseShifterElement;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_PARSE: i32 = 2;

const USAGE: &str = "\
focksim — exact Fock-state simulator for linear-optical circuits

USAGE:
    focksim nls --alpha <re[,im]> --beta <re[,im]> --gamma <re[,im]> [--theta <rad>]
    focksim run <file> [--postselect <pattern>]
    focksim sample <file> --shots <n> --seed <s>
    focksim teleport02 --alpha <re[,im]> --gamma <re[,im]>

Complex values are `re` or `re,im`; patterns are comma-separated photon
counts such as `2,0`. Lines starting with '#' are human-readable; all other
output lines are machine-readable with a fixed field order.

Exit codes: 0 success, 1 validation error, 2 parse error.";

struct Failure {
    code: i32,
    message: String,
    show_usage: bool,
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_VALIDATION,
            message: message.into(),
            show_usage: false,
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_VALIDATION,
            message: message.into(),
            show_usage: true,
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::validation(format!("i/o error: {e}"))
    }
}

impl From<CircuitError> for Failure {
    fn from(e: CircuitError) -> Self {
        Failure {
            code: match e {
                CircuitError::Syntax { .. } => EXIT_PARSE,
                CircuitError::Semantic { .. } => EXIT_VALIDATION,
            },
            message: e.to_string(),
            show_usage: false,
        }
    }
}

/// Dispatch a command line (without the program name). Reports go to `out`,
/// errors to `err`; the return value is the process exit code.
pub fn run_cli(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match dispatch(args, out) {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            let _ = writeln!(err, "error: {}", failure.message);
            if failure.show_usage {
                let _ = writeln!(err, "\n{USAGE}");
            }
            failure.code
        }
    }
}

fn dispatch(args: &[String], out: &mut dyn Write) -> Result<(), Failure> {
    match args.first().map(String::as_str) {
        Some("nls") => cmd_nls(&args[1..], out),
        Some("run") => cmd_run(&args[1..], out),
        Some("sample") => cmd_sample(&args[1..], out),
        Some("teleport02") => cmd_teleport02(&args[1..], out),
        Some("help") | Some("--help") | Some("-h") => {
            writeln!(out, "{USAGE}")?;
            Ok(())
        }
        Some(other) => Err(Failure::usage(format!("unknown command '{other}'"))),
        None => Err(Failure::usage("no command given")),
    }
}

/// `re` or `re,im`, scientific notation allowed.
fn parse_complex(text: &str) -> Result<Complex64, String> {
    let mut parts = text.splitn(2, ',');
    let re = parts.next().unwrap_or("");
    let re: f64 = re
        .trim()
        .parse()
        .map_err(|_| format!("invalid real part '{re}'"))?;
    let im: f64 = match parts.next() {
        Some(im) => im
            .trim()
            .parse()
            .map_err(|_| format!("invalid imaginary part '{im}'"))?,
        None => 0.0,
    };
    if !re.is_finite() || !im.is_finite() {
        return Err(format!("non-finite value '{text}'"));
    }
    Ok(Complex64::new(re, im))
}

fn parse_pattern(text: &str) -> Result<Vec<u32>, String> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<u32>()
                .map_err(|_| format!("invalid photon count '{part}' in pattern '{text}'"))
        })
        .collect()
}

/// Split `args` into flag values and positionals against a list of known
/// flags, each of which takes one value.
fn collect_args<'a>(
    args: &'a [String],
    known_flags: &[&str],
) -> Result<(BTreeMap<&'a str, &'a str>, Vec<&'a str>), Failure> {
    let mut flags = BTreeMap::new();
    let mut positionals = Vec::new();
    let mut iter = args.iter();
    while let Some(arg) = iter.next() {
        if let Some(name) = arg.strip_prefix("--") {
            if !known_flags.contains(&name) {
                return Err(Failure::usage(format!("unknown flag '--{name}'")));
            }
            let value = iter
                .next()
                .ok_or_else(|| Failure::usage(format!("flag '--{name}' needs a value")))?;
            if flags.insert(&arg[2..], value.as_str()).is_some() {
                return Err(Failure::usage(format!("flag '--{name}' given twice")));
            }
        } else {
            positionals.push(arg.as_str());
        }
    }
    Ok((flags, positionals))
}

fn required<'a>(
    flags: &BTreeMap<&str, &'a str>,
    name: &str,
) -> Result<&'a str, Failure> {
    flags
        .get(name)
        .copied()
        .ok_or_else(|| Failure::usage(format!("missing required flag '--{name}'")))
}

fn complex_flag(flags: &BTreeMap<&str, &str>, name: &str) -> Result<Complex64, Failure> {
    parse_complex(required(flags, name)?)
        .map_err(|e| Failure::usage(format!("flag '--{name}': {e}")))
}

// 12 significant digits for probabilities and amplitudes.
fn machine(value: f64) -> String {
    format!("{value:.11e}")
}

// 17 significant digits for parameters such as angles.
fn machine_param(value: f64) -> String {
    format!("{value:.16e}")
}

fn machine_complex(value: Complex64) -> String {
    format!("{},{}", machine(value.re), machine(value.im))
}

fn human_complex(value: Complex64) -> String {
    format!("{:.6}{:+.6}i", value.re, value.im)
}

fn pattern_token(pattern: &[u32]) -> String {
    pattern
        .iter()
        .map(|n| n.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn index_token(modes: &[usize]) -> String {
    modes
        .iter()
        .map(|m| m.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn correction_token(correction: &Option<PhaseShifterElement>) -> String {
    match correction {
        None => "none".to_owned(),
        Some(ps) => format!("ps:{}", machine_param(ps.phi)),
    }
}

fn correction_human(correction: &Option<PhaseShifterElement>) -> String {
    match correction {
        None => "none".to_owned(),
        Some(ps) => format!("phase shifter phi={:.6}", ps.phi),
    }
}

/// Normalize a qutrit for the gate drivers, printing a notice when the
/// input needed rescaling.
fn normalized_with_notice(
    q: InputQutrit,
    out: &mut dyn Write,
) -> Result<InputQutrit, Failure> {
    if q.is_normalized(1e-9) {
        return Ok(q);
    }
    let norm = q.norm_squared().sqrt();
    let q = q
        .normalized()
        .ok_or_else(|| Failure::validation("input amplitudes are all zero"))?;
    writeln!(out, "# note: input auto-normalized (norm was {norm})")?;
    Ok(q)
}

fn print_gate_report(
    out: &mut dyn Write,
    header: &str,
    report: &NlsReport,
) -> Result<(), Failure> {
    for branch in [&report.branch_2_0, &report.branch_0_2] {
        writeln!(
            out,
            "# herald ({}): probability {:.10}, correction {}",
            pattern_token(&branch.pattern),
            branch.probability,
            correction_human(&branch.correction),
        )?;
        writeln!(
            out,
            "#   output qutrit: ({}, {}, {})",
            human_complex(branch.amplitudes[0]),
            human_complex(branch.amplitudes[1]),
            human_complex(branch.amplitudes[2]),
        )?;
    }
    writeln!(
        out,
        "# total success probability {:.10}, failure {:.10}",
        report.total_success_probability, report.failure_probability,
    )?;
    writeln!(out, "{header}")?;
    for branch in [&report.branch_2_0, &report.branch_0_2] {
        writeln!(
            out,
            "branch pattern={} probability={} correction={} amp0={} amp1={} amp2={}",
            pattern_token(&branch.pattern),
            machine(branch.probability),
            correction_token(&branch.correction),
            machine_complex(branch.amplitudes[0]),
            machine_complex(branch.amplitudes[1]),
            machine_complex(branch.amplitudes[2]),
        )?;
    }
    writeln!(
        out,
        "total success={} failure={}",
        machine(report.total_success_probability),
        machine(report.failure_probability),
    )?;
    Ok(())
}

fn cmd_nls(args: &[String], out: &mut dyn Write) -> Result<(), Failure> {
    let (flags, positionals) = collect_args(args, &["alpha", "beta", "gamma", "theta"])?;
    if let Some(stray) = positionals.first() {
        return Err(Failure::usage(format!("unexpected argument '{stray}'")));
    }
    let theta = match flags.get("theta") {
        Some(text) => text
            .parse::<f64>()
            .ok()
            .filter(|t| t.is_finite())
            .ok_or_else(|| Failure::usage(format!("invalid --theta '{text}'")))?,
        None => canonical_theta(),
    };
    writeln!(out, "# nonlinear-sign gate, theta = {theta} rad")?;
    let q = InputQutrit::new(
        complex_flag(&flags, "alpha")?,
        complex_flag(&flags, "beta")?,
        complex_flag(&flags, "gamma")?,
    );
    let q = normalized_with_notice(q, out)?;
    writeln!(
        out,
        "# input qutrit: ({}, {}, {})",
        human_complex(q.alpha),
        human_complex(q.beta),
        human_complex(q.gamma),
    )?;
    let report = nls_gate(&q, theta).map_err(|e| Failure::validation(e.to_string()))?;
    print_gate_report(out, &format!("nls theta={}", machine_param(theta)), &report)
}

fn cmd_teleport02(args: &[String], out: &mut dyn Write) -> Result<(), Failure> {
    let (flags, positionals) = collect_args(args, &["alpha", "gamma"])?;
    if let Some(stray) = positionals.first() {
        return Err(Failure::usage(format!("unexpected argument '{stray}'")));
    }
    writeln!(out, "# vacuum/two-photon teleporter (symmetric ancilla splitter)")?;
    let q = InputQutrit::new(
        complex_flag(&flags, "alpha")?,
        Complex64::new(0.0, 0.0),
        complex_flag(&flags, "gamma")?,
    );
    let q = normalized_with_notice(q, out)?;
    writeln!(
        out,
        "# input: ({})|0> + ({})|2>",
        human_complex(q.alpha),
        human_complex(q.gamma),
    )?;
    let report = teleport_vacuum_two_photon(q.alpha, q.gamma)
        .map_err(|e| Failure::validation(e.to_string()))?;
    print_gate_report(out, "teleport02", &report)
}

fn load_circuit(path: &str) -> Result<CircuitDescription, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::validation(format!("cannot read '{path}': {e}")))?;
    Ok(parse_circuit(&text)?)
}

fn print_state(out: &mut dyn Write, state: &StateVector, prefix: &str) -> Result<(), Failure> {
    for (ket, amp) in state.terms() {
        writeln!(out, "{prefix} ket={ket} amp={}", machine_complex(*amp))?;
    }
    Ok(())
}

fn cmd_run(args: &[String], out: &mut dyn Write) -> Result<(), Failure> {
    let (flags, positionals) = collect_args(args, &["postselect"])?;
    let path = match positionals.as_slice() {
        [path] => *path,
        [] => return Err(Failure::usage("missing circuit file")),
        _ => return Err(Failure::usage("expected exactly one circuit file")),
    };
    let description = load_circuit(path)?;
    let override_pattern = flags
        .get("postselect")
        .map(|text| parse_pattern(text).map_err(Failure::usage))
        .transpose()?;

    let outcome = execute_circuit(&description, override_pattern.as_deref())
        .map_err(|e| Failure::validation(e.to_string()))?;
    match outcome {
        RunOutcome::FinalState(state) => {
            writeln!(
                out,
                "# final state on {} modes ({} terms)",
                state.mode_count(),
                state.term_count(),
            )?;
            writeln!(out, "state modes={} terms={}", state.mode_count(), state.term_count())?;
            print_state(out, &state, "term")?;
        }
        RunOutcome::Distribution(dist) => {
            writeln!(
                out,
                "# outcome distribution over detector modes [{}], {} patterns",
                index_token(dist.modes()),
                dist.entries().len(),
            )?;
            for (pattern, outcome) in dist.entries() {
                writeln!(out, "# ({pattern}): probability {:.10}", outcome.probability)?;
            }
            writeln!(
                out,
                "run modes={} patterns={}",
                index_token(dist.modes()),
                dist.entries().len(),
            )?;
            for (pattern, outcome) in dist.entries() {
                writeln!(
                    out,
                    "outcome pattern={pattern} probability={}",
                    machine(outcome.probability),
                )?;
            }
            for (pattern, outcome) in dist.entries() {
                print_state(out, &outcome.residual, &format!("residual pattern={pattern}"))?;
            }
        }
        RunOutcome::Postselected {
            pattern,
            probability,
            residual,
        } => {
            writeln!(
                out,
                "# post-selected on pattern ({pattern}): probability {probability:.10}",
            )?;
            writeln!(
                out,
                "postselect pattern={pattern} probability={}",
                machine(probability),
            )?;
            match residual {
                Some(state) => print_state(out, &state, "residual")?,
                None => writeln!(out, "# pattern has no support")?,
            }
        }
    }
    Ok(())
}

fn cmd_sample(args: &[String], out: &mut dyn Write) -> Result<(), Failure> {
    let (flags, positionals) = collect_args(args, &["shots", "seed"])?;
    let path = match positionals.as_slice() {
        [path] => *path,
        [] => return Err(Failure::usage("missing circuit file")),
        _ => return Err(Failure::usage("expected exactly one circuit file")),
    };
    let shots: u64 = required(&flags, "shots")?
        .parse()
        .map_err(|_| Failure::usage("--shots must be a positive integer"))?;
    let seed: u64 = required(&flags, "seed")?
        .parse()
        .map_err(|_| Failure::usage("--seed must be a non-negative integer"))?;

    let description = load_circuit(path)?;
    let Some(measure) = &description.measure else {
        return Err(Failure::validation(
            "circuit has no measure statement to sample from",
        ));
    };
    if measure.postselect.is_some() {
        writeln!(out, "# note: sampling the full distribution; the file's postselect pattern is ignored")?;
    }
    let state = prepared_state(&description);
    let spec = MeasurementSpec::new(measure.modes.clone()).expect("measure validated");
    let counts = sample_outcomes(&state, &spec, shots, seed)
        .map_err(|e| Failure::validation(e.to_string()))?;

    writeln!(
        out,
        "# sampled {shots} shots with seed {seed} on detector modes [{}]",
        index_token(measure.modes.as_slice()),
    )?;
    writeln!(
        out,
        "sample shots={shots} seed={seed} patterns={}",
        counts.len(),
    )?;
    for (pattern, count) in &counts {
        let frequency = *count as f64 / shots as f64;
        writeln!(
            out,
            "count pattern={pattern} count={count} frequency={}",
            machine(frequency),
        )?;
    }
    Ok(())
}
