//! Line-oriented circuit text format.
//!
//! ```text
//! # comment
//! dim 3
//! wires 3
//! input 0 psi
//! gate F 1
//! gate CX 1 2
//! measure 1 -> a_m
//! cgate XD^a_m 2
//! output 2 psi
//! ```
//!
//! `dim` and `wires` must come first, in that order. `input`/`output` lines
//! label a wire's declared boundary state (an integer basis value, `chi`, or
//! `psi`) and may appear anywhere after the header. `#` starts a comment.
//! [`serialize`] emits the canonical order: header, inputs sorted by wire,
//! instructions, outputs sorted by wire; parsing its output and serializing
//! again is the identity.

use std::fmt::Write as _;

use crate::gates::GateId;
use crate::types::{Circuit, Dimension, Instruction, StateLabel};

/// A diagnostic pointing at the offending token (1-based line and column).
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

type ParseResult<T> = std::result::Result<T, ParseError>;

/// Splits a line into (byte offset, token) pairs.
fn tokens_of(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out
}

struct LineCtx {
    line: usize,
}

impl LineCtx {
    fn err<T>(&self, col: usize, message: impl Into<String>) -> ParseResult<T> {
        Err(ParseError {
            line: self.line,
            col: col + 1,
            message: message.into(),
        })
    }
}

fn parse_usize(ctx: &LineCtx, tok: (usize, &str), what: &str) -> ParseResult<usize> {
    tok.1
        .parse::<usize>()
        .map_err(|_| ParseError {
            line: ctx.line,
            col: tok.0 + 1,
            message: format!("expected {what}, found '{}'", tok.1),
        })
}

fn expect_len(ctx: &LineCtx, toks: &[(usize, &str)], want: usize, form: &str) -> ParseResult<()> {
    if toks.len() < want {
        let (col, _) = *toks.last().unwrap();
        return ctx.err(col, format!("incomplete line, expected '{form}'"));
    }
    if toks.len() > want {
        let (col, extra) = toks[want];
        return ctx.err(col, format!("unexpected token '{extra}' after '{form}'"));
    }
    Ok(())
}

/// Parses circuit text. Structural validation (wire ranges, gate arities,
/// register discipline, dimension support) happens during parsing, so a
/// successful parse always yields a valid [`Circuit`].
pub fn parse_circuit(text: &str) -> ParseResult<Circuit> {
    let mut dim: Option<Dimension> = None;
    let mut circuit: Option<Circuit> = None;
    let mut last_line = 0;
    for (ln0, raw) in text.lines().enumerate() {
        let ctx = LineCtx { line: ln0 + 1 };
        last_line = ctx.line;
        let content = raw.split('#').next().unwrap_or("");
        let toks = tokens_of(content);
        if toks.is_empty() {
            continue;
        }
        let (kw_col, kw) = toks[0];
        if dim.is_none() && kw != "dim" {
            return ctx.err(kw_col, "expected 'dim <d>' as the first line");
        }
        if circuit.is_none() && !matches!(kw, "dim" | "wires") {
            return ctx.err(kw_col, "expected 'wires <n>' before this line");
        }
        match kw {
            "dim" => {
                if dim.is_some() {
                    return ctx.err(kw_col, "duplicate 'dim' line");
                }
                expect_len(&ctx, &toks, 2, "dim <d>")?;
                let d = parse_usize(&ctx, toks[1], "a dimension")?;
                match Dimension::new(d) {
                    Ok(v) => dim = Some(v),
                    Err(e) => return ctx.err(toks[1].0, e.to_string()),
                }
            }
            "wires" => {
                if circuit.is_some() {
                    return ctx.err(kw_col, "duplicate 'wires' line");
                }
                expect_len(&ctx, &toks, 2, "wires <n>")?;
                let n = parse_usize(&ctx, toks[1], "a wire count")?;
                match Circuit::new(dim.unwrap(), n) {
                    Ok(c) => circuit = Some(c),
                    Err(e) => return ctx.err(toks[1].0, e.to_string()),
                }
            }
            "gate" => {
                let c = circuit.as_mut().unwrap();
                if toks.len() < 2 {
                    return ctx.err(kw_col, "incomplete line, expected 'gate <M> <wire>...'");
                }
                let Some(gate) = GateId::parse(toks[1].1) else {
                    return ctx.err(toks[1].0, format!("unknown gate mnemonic '{}'", toks[1].1));
                };
                expect_len(
                    &ctx,
                    &toks,
                    2 + gate.arity(),
                    &format!("gate {} with {} wire(s)", gate.mnemonic(), gate.arity()),
                )?;
                let mut wires = Vec::with_capacity(gate.arity());
                for tok in &toks[2..] {
                    wires.push(parse_usize(&ctx, *tok, "a wire index")?);
                }
                if let Err(e) = c.push(Instruction::gate(gate, &wires)) {
                    return ctx.err(kw_col, e.to_string());
                }
            }
            "measure" => {
                let c = circuit.as_mut().unwrap();
                expect_len(&ctx, &toks, 4, "measure <wire> -> <register>")?;
                let wire = parse_usize(&ctx, toks[1], "a wire index")?;
                if toks[2].1 != "->" {
                    return ctx.err(toks[2].0, format!("expected '->', found '{}'", toks[2].1));
                }
                if let Err(e) = c.push(Instruction::measure(wire, toks[3].1)) {
                    return ctx.err(toks[3].0, e.to_string());
                }
            }
            "cgate" => {
                let c = circuit.as_mut().unwrap();
                expect_len(&ctx, &toks, 3, "cgate <M>^<register> <wire>")?;
                let (spec_col, spec) = toks[1];
                let Some(caret) = spec.find('^') else {
                    return ctx.err(spec_col, format!("expected '<M>^<register>', found '{spec}'"));
                };
                let Some(gate) = GateId::parse(&spec[..caret]) else {
                    return ctx.err(
                        spec_col,
                        format!("unknown gate mnemonic '{}'", &spec[..caret]),
                    );
                };
                if gate.arity() != 1 {
                    return ctx.err(
                        spec_col,
                        format!("classically controlled gate must act on one wire, {} does not", gate.mnemonic()),
                    );
                }
                let register = &spec[caret + 1..];
                let wire = parse_usize(&ctx, toks[2], "a wire index")?;
                if let Err(e) = c.push(Instruction::controlled(register, gate, wire)) {
                    return ctx.err(spec_col + caret + 1, e.to_string());
                }
            }
            "input" | "output" => {
                let c = circuit.as_mut().unwrap();
                expect_len(&ctx, &toks, 3, &format!("{kw} <wire> <state>"))?;
                let wire = parse_usize(&ctx, toks[1], "a wire index")?;
                let Some(label) = StateLabel::parse(toks[2].1) else {
                    return ctx.err(
                        toks[2].0,
                        format!(
                            "expected a basis value, 'chi', or 'psi', found '{}'",
                            toks[2].1
                        ),
                    );
                };
                let existing = if kw == "input" { c.input(wire) } else { c.output(wire) };
                if existing.is_some() {
                    return ctx.err(toks[1].0, format!("duplicate {kw} label for wire {wire}"));
                }
                let set = if kw == "input" {
                    c.set_input(wire, label)
                } else {
                    c.set_output(wire, label)
                };
                if let Err(e) = set {
                    return ctx.err(toks[1].0, e.to_string());
                }
            }
            other => {
                return ctx.err(kw_col, format!("unknown directive '{other}'"));
            }
        }
    }
    circuit.ok_or(ParseError {
        line: last_line + 1,
        col: 1,
        message: if dim.is_none() {
            "missing 'dim' line".to_string()
        } else {
            "missing 'wires' line".to_string()
        },
    })
}

/// Canonical text form: header, inputs, instructions, outputs.
pub fn serialize(circuit: &Circuit) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "dim {}", circuit.d());
    let _ = writeln!(out, "wires {}", circuit.n_wires());
    for (wire, label) in circuit.inputs() {
        let _ = writeln!(out, "input {wire} {label}");
    }
    for instr in circuit.instructions() {
        let _ = writeln!(out, "{instr}");
    }
    for (wire, label) in circuit.outputs() {
        let _ = writeln!(out, "output {wire} {label}");
    }
    out
}
