//! Text format for circuit descriptions, plus the runner behind the CLI.
//!
//! The format is line oriented and strict: one statement per line, `#`
//! starts a comment, unknown keys are rejected. A full description:
//!
//! ```text
//! modes: 3
//! normalize: true
//! input: [0,1,1] 0.6 -0.8
//! element: bs [1,2] 0.5535743588970452
//! element: ps [0] 3.141592653589793
//! measure: [0,1] postselect [2,0]
//! ```
//!
//! `modes` is required and must appear once. `input` lines (at least one)
//! give a basis ket and its amplitude as `re [im]`. `element` lines apply in
//! file order. `measure` is optional, as is its `postselect` pattern.
//! Unless `normalize: true` is set, the input state must already have unit
//! norm within 1e-9. The full grammar lives in `docs/circuit-format.md`.

use num_complex::Complex64;
use thiserror::Error;

use crate::fock::{FockState, StateVector};
use crate::measure::{outcome_distribution, postselect, MeasurementSpec, OutcomeDistribution};
use crate::optics::{
    apply_beam_splitter, apply_phase_shifter, BeamSplitterElement, PhaseShifterElement,
};

/// Tolerance on the squared norm of a non-`normalize` input state.
pub const INPUT_NORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CircuitError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid circuit at {path}: {message}")]
    Semantic { path: String, message: String },
}

impl CircuitError {
    fn syntax(line: usize, column: usize, message: impl Into<String>) -> Self {
        CircuitError::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    fn semantic(path: impl Into<String>, message: impl Into<String>) -> Self {
        CircuitError::Semantic {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputTerm {
    pub occupations: Vec<u32>,
    pub amplitude: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CircuitElement {
    BeamSplitter(BeamSplitterElement),
    PhaseShifter(PhaseShifterElement),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureStatement {
    pub modes: Vec<usize>,
    pub postselect: Option<Vec<u32>>,
}

/// A parsed and validated circuit description.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitDescription {
    pub mode_count: usize,
    pub normalize: bool,
    pub input_terms: Vec<InputTerm>,
    pub elements: Vec<CircuitElement>,
    pub measure: Option<MeasureStatement>,
}

/// Character cursor over one statement line; columns are 1-based.
struct Cursor<'a> {
    line: usize,
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(line: usize, text: &'a str) -> Self {
        Cursor { line, text, pos: 0 }
    }

    fn col(&self) -> usize {
        self.pos + 1
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_ascii_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn error(&self, message: impl Into<String>) -> CircuitError {
        CircuitError::syntax(self.line, self.col(), message)
    }

    fn expect_char(&mut self, expected: char) -> Result<(), CircuitError> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c == expected => {
                self.pos += c.len_utf8();
                Ok(())
            }
            Some(c) => Err(self.error(format!("expected '{expected}', found '{c}'"))),
            None => Err(self.error(format!("expected '{expected}', found end of line"))),
        }
    }

    /// A bare word of ASCII alphanumerics or underscores.
    fn word(&mut self) -> &'a str {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        &self.text[start..self.pos]
    }

    /// Non-negative decimal integer.
    fn nat(&mut self) -> Result<u64, CircuitError> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(CircuitError::syntax(
                self.line,
                start + 1,
                "expected a non-negative integer",
            ));
        }
        self.text[start..self.pos].parse::<u64>().map_err(|_| {
            CircuitError::syntax(self.line, start + 1, "integer out of range")
        })
    }

    /// Finite decimal double; scientific notation allowed.
    fn number(&mut self) -> Result<f64, CircuitError> {
        self.skip_ws();
        let start = self.pos;
        while matches!(
            self.peek(),
            Some(c) if c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-')
        ) {
            self.pos += 1;
        }
        let token = &self.text[start..self.pos];
        if token.is_empty() {
            return Err(CircuitError::syntax(self.line, start + 1, "expected a number"));
        }
        let value: f64 = token
            .parse()
            .map_err(|_| CircuitError::syntax(self.line, start + 1, format!("invalid number '{token}'")))?;
        if !value.is_finite() {
            return Err(CircuitError::syntax(
                self.line,
                start + 1,
                format!("number '{token}' is out of the double range"),
            ));
        }
        Ok(value)
    }

    /// Bracketed list of non-negative integers: `[0,1,2]`.
    fn nat_list(&mut self) -> Result<Vec<u64>, CircuitError> {
        self.expect_char('[')?;
        let mut values = Vec::new();
        self.skip_ws();
        if self.peek() == Some(']') {
            self.pos += 1;
            return Ok(values);
        }
        loop {
            values.push(self.nat()?);
            self.skip_ws();
            match self.peek() {
                Some(',') => self.pos += 1,
                Some(']') => {
                    self.pos += 1;
                    return Ok(values);
                }
                Some(c) => return Err(self.error(format!("expected ',' or ']', found '{c}'"))),
                None => return Err(self.error("unclosed '['")),
            }
        }
    }

    fn expect_end(&mut self) -> Result<(), CircuitError> {
        self.skip_ws();
        match self.peek() {
            None => Ok(()),
            Some(c) => Err(self.error(format!("unexpected trailing '{c}'"))),
        }
    }
}

fn occupations_from(values: Vec<u64>, cursor: &Cursor) -> Result<Vec<u32>, CircuitError> {
    values
        .into_iter()
        .map(|v| {
            u32::try_from(v).map_err(|_| cursor.error(format!("occupation {v} out of range")))
        })
        .collect()
}

/// Parse a circuit description from text. Strict: unknown keys, duplicate
/// singleton statements, and trailing garbage are syntax errors with line
/// and column; structural problems (mode indices out of range, duplicate
/// detector modes, a norm off by more than 1e-9 without `normalize: true`)
/// are semantic errors naming the offending field.
pub fn parse_circuit(text: &str) -> Result<CircuitDescription, CircuitError> {
    let mut mode_count: Option<usize> = None;
    let mut normalize: Option<bool> = None;
    let mut input_terms: Vec<InputTerm> = Vec::new();
    let mut elements: Vec<CircuitElement> = Vec::new();
    let mut measure: Option<MeasureStatement> = None;

    for (index, raw_line) in text.lines().enumerate() {
        let line_no = index + 1;
        let content = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        if content.trim().is_empty() {
            continue;
        }
        let mut cursor = Cursor::new(line_no, content);
        let key_col = {
            cursor.skip_ws();
            cursor.col()
        };
        let key = cursor.word().to_owned();
        cursor.expect_char(':')?;

        match key.as_str() {
            "modes" => {
                if mode_count.is_some() {
                    return Err(CircuitError::syntax(line_no, key_col, "duplicate 'modes' statement"));
                }
                let value = cursor.nat()?;
                cursor.expect_end()?;
                mode_count = Some(value as usize);
            }
            "normalize" => {
                if normalize.is_some() {
                    return Err(CircuitError::syntax(line_no, key_col, "duplicate 'normalize' statement"));
                }
                let word_col = {
                    cursor.skip_ws();
                    cursor.col()
                };
                let value = match cursor.word() {
                    "true" => true,
                    "false" => false,
                    other => {
                        return Err(CircuitError::syntax(
                            line_no,
                            word_col,
                            format!("expected 'true' or 'false', found '{other}'"),
                        ))
                    }
                };
                cursor.expect_end()?;
                normalize = Some(value);
            }
            "input" => {
                let occupations = occupations_from(cursor.nat_list()?, &cursor)?;
                let re = cursor.number()?;
                cursor.skip_ws();
                let im = if cursor.peek().is_some() { cursor.number()? } else { 0.0 };
                cursor.expect_end()?;
                input_terms.push(InputTerm {
                    occupations,
                    amplitude: Complex64::new(re, im),
                });
            }
            "element" => {
                let kind_col = {
                    cursor.skip_ws();
                    cursor.col()
                };
                let kind = cursor.word().to_owned();
                match kind.as_str() {
                    "bs" => {
                        let modes = cursor.nat_list()?;
                        if modes.len() != 2 {
                            return Err(CircuitError::syntax(
                                line_no,
                                kind_col,
                                format!("'bs' takes exactly 2 modes, found {}", modes.len()),
                            ));
                        }
                        let theta = cursor.number()?;
                        cursor.expect_end()?;
                        elements.push(CircuitElement::BeamSplitter(BeamSplitterElement {
                            mode_a: modes[0] as usize,
                            mode_b: modes[1] as usize,
                            theta,
                        }));
                    }
                    "ps" => {
                        let modes = cursor.nat_list()?;
                        if modes.len() != 1 {
                            return Err(CircuitError::syntax(
                                line_no,
                                kind_col,
                                format!("'ps' takes exactly 1 mode, found {}", modes.len()),
                            ));
                        }
                        let phi = cursor.number()?;
                        cursor.expect_end()?;
                        elements.push(CircuitElement::PhaseShifter(PhaseShifterElement {
                            mode: modes[0] as usize,
                            phi,
                        }));
                    }
                    other => {
                        return Err(CircuitError::syntax(
                            line_no,
                            kind_col,
                            format!("unknown element kind '{other}' (expected 'bs' or 'ps')"),
                        ))
                    }
                }
            }
            "measure" => {
                if measure.is_some() {
                    return Err(CircuitError::syntax(line_no, key_col, "duplicate 'measure' statement"));
                }
                let modes: Vec<usize> =
                    cursor.nat_list()?.into_iter().map(|v| v as usize).collect();
                cursor.skip_ws();
                let postselect_pattern = if cursor.peek().is_some() {
                    let word_col = cursor.col();
                    match cursor.word() {
                        "postselect" => Some(occupations_from(cursor.nat_list()?, &cursor)?),
                        other => {
                            return Err(CircuitError::syntax(
                                line_no,
                                word_col,
                                format!("expected 'postselect', found '{other}'"),
                            ))
                        }
                    }
                } else {
                    None
                };
                cursor.expect_end()?;
                measure = Some(MeasureStatement {
                    modes,
                    postselect: postselect_pattern,
                });
            }
            "" => return Err(CircuitError::syntax(line_no, key_col, "expected a statement key")),
            other => {
                return Err(CircuitError::syntax(
                    line_no,
                    key_col,
                    format!("unknown key '{other}'"),
                ))
            }
        }
    }

    let description = CircuitDescription {
        mode_count: mode_count
            .ok_or_else(|| CircuitError::semantic("modes", "statement missing"))?,
        normalize: normalize.unwrap_or(false),
        input_terms,
        elements,
        measure,
    };
    validate(&description)?;
    Ok(description)
}

fn validate(c: &CircuitDescription) -> Result<(), CircuitError> {
    if c.mode_count == 0 {
        return Err(CircuitError::semantic("modes", "mode count must be positive"));
    }
    if c.input_terms.is_empty() {
        return Err(CircuitError::semantic("input", "at least one input term is required"));
    }
    for (i, term) in c.input_terms.iter().enumerate() {
        if term.occupations.len() != c.mode_count {
            return Err(CircuitError::semantic(
                format!("input[{i}].occupations"),
                format!("{} entries for {} modes", term.occupations.len(), c.mode_count),
            ));
        }
    }
    for (i, element) in c.elements.iter().enumerate() {
        match element {
            CircuitElement::BeamSplitter(bs) => {
                if bs.mode_a == bs.mode_b {
                    return Err(CircuitError::semantic(
                        format!("element[{i}].modes"),
                        format!("beam splitter addresses mode {} twice", bs.mode_a),
                    ));
                }
                for mode in [bs.mode_a, bs.mode_b] {
                    if mode >= c.mode_count {
                        return Err(CircuitError::semantic(
                            format!("element[{i}].modes"),
                            format!("mode {mode} out of range for {} modes", c.mode_count),
                        ));
                    }
                }
            }
            CircuitElement::PhaseShifter(ps) => {
                if ps.mode >= c.mode_count {
                    return Err(CircuitError::semantic(
                        format!("element[{i}].mode"),
                        format!("mode {} out of range for {} modes", ps.mode, c.mode_count),
                    ));
                }
            }
        }
    }
    if let Some(measure) = &c.measure {
        let mut seen = std::collections::BTreeSet::new();
        for &mode in &measure.modes {
            if mode >= c.mode_count {
                return Err(CircuitError::semantic(
                    "measure.modes",
                    format!("mode {mode} out of range for {} modes", c.mode_count),
                ));
            }
            if !seen.insert(mode) {
                return Err(CircuitError::semantic(
                    "measure.modes",
                    format!("mode {mode} listed twice"),
                ));
            }
        }
        if measure.modes.is_empty() {
            return Err(CircuitError::semantic("measure.modes", "no detector modes given"));
        }
        if let Some(pattern) = &measure.postselect {
            if pattern.len() != measure.modes.len() {
                return Err(CircuitError::semantic(
                    "measure.postselect",
                    format!("{} entries for {} detector modes", pattern.len(), measure.modes.len()),
                ));
            }
        }
    }

    let state = input_state(c);
    let norm_squared = state.norm_squared();
    if c.normalize {
        if norm_squared == 0.0 {
            return Err(CircuitError::semantic("input", "state has zero norm"));
        }
    } else if (norm_squared - 1.0).abs() > INPUT_NORM_TOLERANCE {
        return Err(CircuitError::semantic(
            "input",
            format!(
                "state squared norm is {norm_squared}, not 1 (set 'normalize: true' to let the runner rescale)"
            ),
        ));
    }
    Ok(())
}

fn input_state(c: &CircuitDescription) -> StateVector {
    StateVector::from_terms(
        c.mode_count,
        c.input_terms
            .iter()
            .map(|t| (FockState::new(t.occupations.clone()), t.amplitude)),
    )
    .expect("term lengths validated")
}

fn format_number(value: f64) -> String {
    // 17 significant digits: enough for bit-exact f64 round trips.
    format!("{value:.16e}")
}

fn format_index_list(values: &[usize]) -> String {
    let inner: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    format!("[{}]", inner.join(","))
}

fn format_occupation_list(values: &[u32]) -> String {
    let inner: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    format!("[{}]", inner.join(","))
}

/// Serialize to canonical form: statements in documented order, one per
/// line, numbers with 17 significant digits. `parse_circuit` of the result
/// reproduces the description exactly.
pub fn serialize_circuit(c: &CircuitDescription) -> String {
    let mut out = String::new();
    out.push_str(&format!("modes: {}\n", c.mode_count));
    if c.normalize {
        out.push_str("normalize: true\n");
    }
    for term in &c.input_terms {
        out.push_str(&format!(
            "input: {} {} {}\n",
            format_occupation_list(&term.occupations),
            format_number(term.amplitude.re),
            format_number(term.amplitude.im),
        ));
    }
    for element in &c.elements {
        match element {
            CircuitElement::BeamSplitter(bs) => out.push_str(&format!(
                "element: bs {} {}\n",
                format_index_list(&[bs.mode_a, bs.mode_b]),
                format_number(bs.theta),
            )),
            CircuitElement::PhaseShifter(ps) => out.push_str(&format!(
                "element: ps {} {}\n",
                format_index_list(&[ps.mode]),
                format_number(ps.phi),
            )),
        }
    }
    if let Some(measure) = &c.measure {
        out.push_str(&format!("measure: {}", format_index_list(&measure.modes)));
        if let Some(pattern) = &measure.postselect {
            out.push_str(&format!(" postselect {}", format_occupation_list(pattern)));
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RunError {
    #[error("a postselection pattern was given but the circuit has no measure statement")]
    PostselectWithoutMeasure,
    #[error("postselection pattern has {found} entries, measurement has {expected} modes")]
    PatternLength { expected: usize, found: usize },
}

/// What a circuit run produces.
#[derive(Debug, Clone, PartialEq)]
pub enum RunOutcome {
    /// No measure statement: the evolved state.
    FinalState(StateVector),
    /// Measured without postselection: the full outcome distribution.
    Distribution(OutcomeDistribution),
    /// Post-selected on one pattern; `residual` is `None` when the pattern
    /// has no support.
    Postselected {
        pattern: FockState,
        probability: f64,
        residual: Option<StateVector>,
    },
}

/// The state just before measurement: input terms (rescaled to unit norm if
/// `normalize` is set) with every element applied in file order.
pub fn prepared_state(c: &CircuitDescription) -> StateVector {
    let mut state = input_state(c);
    if c.normalize {
        let norm_squared = state.norm_squared();
        state = state.scaled(Complex64::new(1.0 / norm_squared.sqrt(), 0.0));
    }
    for element in &c.elements {
        state = match element {
            CircuitElement::BeamSplitter(bs) => {
                apply_beam_splitter(&state, bs).expect("element validated")
            }
            CircuitElement::PhaseShifter(ps) => {
                apply_phase_shifter(&state, ps).expect("element validated")
            }
        };
    }
    state
}

/// Execute a validated description. `postselect_override` replaces the
/// file's own postselect pattern when given.
pub fn execute_circuit(
    c: &CircuitDescription,
    postselect_override: Option<&[u32]>,
) -> Result<RunOutcome, RunError> {
    let state = prepared_state(c);
    let Some(measure) = &c.measure else {
        return match postselect_override {
            Some(_) => Err(RunError::PostselectWithoutMeasure),
            None => Ok(RunOutcome::FinalState(state)),
        };
    };
    let spec = MeasurementSpec::new(measure.modes.clone()).expect("measure validated");
    let pattern = postselect_override
        .map(|p| p.to_vec())
        .or_else(|| measure.postselect.clone());
    match pattern {
        Some(pattern) => {
            if pattern.len() != measure.modes.len() {
                return Err(RunError::PatternLength {
                    expected: measure.modes.len(),
                    found: pattern.len(),
                });
            }
            let pattern = FockState::new(pattern);
            let (probability, residual) =
                postselect(&state, &spec, &pattern).expect("pattern length checked");
            Ok(RunOutcome::Postselected {
                pattern,
                probability,
                residual,
            })
        }
        None => Ok(RunOutcome::Distribution(
            outcome_distribution(&state, &spec).expect("measure validated"),
        )),
    }
}
