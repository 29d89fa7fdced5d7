//! OpenQASM 2.0 reader and canonical writer for the gate subset the compiler understands.

use std::fmt::Write as _;

use thiserror::Error;

use super::{Circuit, GateKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(u64),
    Real(f64),
    Str(String),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, column, message: String| ParseError {
        line,
        column,
        message,
    };
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if c.is_ascii_digit()
            || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            let mut real = false;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                real = true;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    real = true;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            if real {
                Tok::Real(
                    s.parse()
                        .map_err(|_| err(tl, tc, format!("bad number '{s}'")))?,
                )
            } else {
                Tok::Int(
                    s.parse()
                        .map_err(|_| err(tl, tc, format!("bad integer '{s}'")))?,
                )
            }
        } else if c == '"' {
            i += 1;
            while i < chars.len() && chars[i] != '"' && chars[i] != '\n' {
                i += 1;
            }
            if i >= chars.len() || chars[i] != '"' {
                return Err(err(tl, tc, "unterminated string".into()));
            }
            i += 1;
            Tok::Str(chars[start + 1..i - 1].iter().collect())
        } else {
            let sym = match c {
                ';' => ";",
                ',' => ",",
                '[' => "[",
                ']' => "]",
                '(' => "(",
                ')' => ")",
                '{' => "{",
                '}' => "}",
                '+' => "+",
                '*' => "*",
                '/' => "/",
                '^' => "^",
                '-' if chars.get(i + 1) == Some(&'>') => "->",
                '-' => "-",
                '=' if chars.get(i + 1) == Some(&'=') => "==",
                _ => return Err(err(tl, tc, format!("unexpected character '{c}'"))),
            };
            i += sym.len();
            Tok::Sym(sym)
        };
        col += i - start;
        out.push(Token {
            tok,
            line: tl,
            column: tc,
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    qreg: Option<(String, usize)>,
    cregs: Vec<String>,
    circuit: Circuit,
}

type Operand = (Option<u64>, usize, usize);

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, t: &Token, message: impl Into<String>) -> ParseError {
        ParseError {
            line: t.line,
            column: t.column,
            message: message.into(),
        }
    }

    fn expect_sym(&mut self, sym: &'static str) -> Result<Token, ParseError> {
        let t = self.next();
        if t.tok == Tok::Sym(sym) {
            Ok(t)
        } else {
            Err(self.error_at(&t, format!("expected '{sym}', found {}", describe(&t.tok))))
        }
    }

    fn eat_sym(&mut self, sym: &'static str) -> bool {
        if self.peek().tok == Tok::Sym(sym) {
            self.next();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<(String, Token), ParseError> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) => Ok((s.clone(), t.clone())),
            other => Err(self.error_at(
                &t,
                format!("expected identifier, found {}", describe(other)),
            )),
        }
    }

    fn int(&mut self) -> Result<u64, ParseError> {
        let t = self.next();
        match t.tok {
            Tok::Int(v) => Ok(v),
            ref other => {
                Err(self.error_at(&t, format!("expected integer, found {}", describe(other))))
            }
        }
    }

    fn program(&mut self) -> Result<(), ParseError> {
        if matches!(&self.peek().tok, Tok::Ident(s) if s == "OPENQASM") {
            self.next();
            let t = self.next();
            match t.tok {
                Tok::Real(v) if (v - 2.0).abs() < 1e-9 => {}
                Tok::Int(2) => {}
                _ => return Err(self.error_at(&t, "only OpenQASM 2.0 is supported")),
            }
            self.expect_sym(";")?;
        }
        while self.peek().tok != Tok::Eof {
            self.statement()?;
        }
        Ok(())
    }

    fn statement(&mut self) -> Result<(), ParseError> {
        let (word, at) = self.ident()?;
        match word.as_str() {
            "include" => {
                let t = self.next();
                if !matches!(t.tok, Tok::Str(_)) {
                    return Err(self.error_at(&t, "expected file name after include"));
                }
                self.expect_sym(";")?;
            }
            "qreg" | "creg" => {
                let (name, _) = self.ident()?;
                self.expect_sym("[")?;
                let size = self.int()? as usize;
                self.expect_sym("]")?;
                self.expect_sym(";")?;
                if word == "creg" {
                    self.cregs.push(name);
                } else if self.qreg.is_some() {
                    return Err(self.error_at(&at, "only one quantum register is supported"));
                } else {
                    self.circuit.num_qubits = size;
                    self.qreg = Some((name, size));
                }
            }
            "measure" => {
                self.operand(true)?;
                self.expect_sym("->")?;
                self.operand(true)?;
                self.expect_sym(";")?;
                log::warn!("{}:{}: measure ignored", at.line, at.column);
            }
            "barrier" => {
                self.operand_list(true)?;
                self.expect_sym(";")?;
                log::warn!("{}:{}: barrier ignored", at.line, at.column);
            }
            "gate" | "opaque" | "if" | "reset" | "U" | "CX" => {
                return Err(self.error_at(&at, format!("unsupported statement '{word}'")));
            }
            _ => self.gate(&word, &at)?,
        }
        Ok(())
    }

    fn gate(&mut self, name: &str, at: &Token) -> Result<(), ParseError> {
        let is_swap = name == "swap";
        let kind = match GateKind::from_name(name) {
            Some(k) => Some(k),
            None if is_swap => None,
            None => return Err(self.error_at(at, format!("unsupported gate '{name}'"))),
        };
        let mut params = Vec::new();
        if self.eat_sym("(") && !self.eat_sym(")") {
            loop {
                params.push(self.expr()?);
                if self.eat_sym(")") {
                    break;
                }
                self.expect_sym(",")?;
            }
        }
        let (n_params, n_qubits) = kind.map_or((0, 2), |k| (k.num_params(), k.num_qubits()));
        if params.len() != n_params {
            return Err(self.error_at(
                at,
                format!(
                    "'{name}' takes {n_params} parameter(s), got {}",
                    params.len()
                ),
            ));
        }
        let operands = self.operand_list(false)?;
        self.expect_sym(";")?;
        if operands.len() != n_qubits {
            return Err(self.error_at(
                at,
                format!(
                    "'{name}' takes {n_qubits} operand(s), got {}",
                    operands.len()
                ),
            ));
        }
        let size = self.qreg.as_ref().map_or(0, |q| q.1);
        let mut resolved = Vec::with_capacity(n_qubits);
        for (index, line, column) in &operands {
            match index {
                Some(i) => resolved.push(vec![*i as u32]),
                None if n_qubits == 1 => resolved.push((0..size as u32).collect()),
                None => {
                    return Err(ParseError {
                        line: *line,
                        column: *column,
                        message: "register broadcast is only supported for single-qubit gates"
                            .into(),
                    })
                }
            }
        }
        if n_qubits == 2 {
            let (a, b) = (resolved[0][0], resolved[1][0]);
            if a == b {
                return Err(self.error_at(at, format!("'{name}' has identical operands q[{a}]")));
            }
            match kind {
                Some(k) => {
                    self.circuit.push(k, &params, &[a, b]);
                }
                None => {
                    self.circuit.push(GateKind::Cx, &[], &[a, b]);
                    self.circuit.push(GateKind::Cx, &[], &[b, a]);
                    self.circuit.push(GateKind::Cx, &[], &[a, b]);
                }
            }
        } else {
            let k = kind.expect("single-qubit gates are named");
            for q in resolved.remove(0) {
                self.circuit.push(k, &params, &[q]);
            }
        }
        Ok(())
    }

    fn operand_list(&mut self, allow_creg: bool) -> Result<Vec<Operand>, ParseError> {
        let mut out = vec![self.operand(allow_creg)?];
        while self.eat_sym(",") {
            out.push(self.operand(allow_creg)?);
        }
        Ok(out)
    }

    /// `name` or `name[index]`; the index is checked against the quantum register.
    fn operand(&mut self, allow_creg: bool) -> Result<Operand, ParseError> {
        let (name, t) = self.ident()?;
        let index = if self.eat_sym("[") {
            let i = self.int()?;
            self.expect_sym("]")?;
            Some(i)
        } else {
            None
        };
        match &self.qreg {
            Some((q, size)) if *q == name => {
                if let Some(i) = index {
                    if i as usize >= *size {
                        return Err(
                            self.error_at(&t, format!("index {i} out of range for {name}[{size}]"))
                        );
                    }
                }
            }
            _ if allow_creg && self.cregs.contains(&name) => {}
            _ => return Err(self.error_at(&t, format!("unknown register '{name}'"))),
        }
        Ok((index, t.line, t.column))
    }

    fn expr(&mut self) -> Result<f64, ParseError> {
        let mut v = self.term()?;
        loop {
            if self.eat_sym("+") {
                v += self.term()?;
            } else if self.eat_sym("-") {
                v -= self.term()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> Result<f64, ParseError> {
        let mut v = self.unary()?;
        loop {
            if self.eat_sym("*") {
                v *= self.unary()?;
            } else if self.eat_sym("/") {
                v /= self.unary()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self) -> Result<f64, ParseError> {
        if self.eat_sym("-") {
            return Ok(-self.unary()?);
        }
        if self.eat_sym("+") {
            return self.unary();
        }
        let base = self.primary()?;
        if self.eat_sym("^") {
            return Ok(base.powf(self.unary()?));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<f64, ParseError> {
        let t = self.next();
        match &t.tok {
            Tok::Int(v) => Ok(*v as f64),
            Tok::Real(v) => Ok(*v),
            Tok::Sym("(") => {
                let v = self.expr()?;
                self.expect_sym(")")?;
                Ok(v)
            }
            Tok::Ident(s) if s == "pi" => Ok(std::f64::consts::PI),
            Tok::Ident(s) => {
                let f: fn(f64) -> f64 = match s.as_str() {
                    "sin" => f64::sin,
                    "cos" => f64::cos,
                    "tan" => f64::tan,
                    "exp" => f64::exp,
                    "ln" => f64::ln,
                    "sqrt" => f64::sqrt,
                    _ => {
                        return Err(
                            self.error_at(&t, format!("unknown identifier '{s}' in expression"))
                        )
                    }
                };
                self.expect_sym("(")?;
                let v = self.expr()?;
                self.expect_sym(")")?;
                Ok(f(v))
            }
            other => Err(self.error_at(
                &t,
                format!("expected expression, found {}", describe(other)),
            )),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Int(v) => format!("'{v}'"),
        Tok::Real(v) => format!("'{v}'"),
        Tok::Str(s) => format!("\"{s}\""),
        Tok::Sym(s) => format!("'{s}'"),
        Tok::Eof => "end of input".into(),
    }
}

/// Parses OpenQASM 2.0 text. `swap` is lowered to three `cx`; `measure` and `barrier` are
/// dropped with a warning.
pub fn parse_qasm(text: &str) -> Result<Circuit, ParseError> {
    let mut parser = Parser {
        toks: lex(text)?,
        pos: 0,
        qreg: None,
        cregs: Vec::new(),
        circuit: Circuit::default(),
    };
    parser.program()?;
    Ok(parser.circuit)
}

/// Canonical OpenQASM 2.0 text; parameters are written with round-trip precision.
pub fn emit_qasm(circuit: &Circuit) -> String {
    let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    let _ = writeln!(out, "qreg q[{}];", circuit.num_qubits);
    for g in &circuit.gates {
        out.push_str(g.kind.name());
        if !g.params.is_empty() {
            out.push('(');
            for (i, p) in g.params.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{p:?}");
            }
            out.push(')');
        }
        for (i, q) in g.qubits.iter().enumerate() {
            out.push_str(if i == 0 { " " } else { "," });
            let _ = write!(out, "q[{}]", q.0);
        }
        out.push_str(";\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::Qubit;

    #[test]
    fn minimal_program() {
        let c = parse_qasm("qreg q[2]; cx q[0],q[1];").unwrap();
        assert_eq!(c.num_qubits, 2);
        assert_eq!(c.gates.len(), 1);
        assert_eq!(c.two_qubit_gate_count(), 1);
    }

    #[test]
    fn identical_operands_rejected() {
        let e = parse_qasm("qreg q[2];\ncx q[0],q[0];").unwrap_err();
        assert_eq!((e.line, e.column), (2, 1));
        assert!(e.message.contains("identical"));
    }

    #[test]
    fn full_header_params_and_ignored_ops() {
        let text = r#"OPENQASM 2.0;
include "qelib1.inc";
qreg q[3];
creg c[3];
// comment
h q[0];
u3(pi/2, -pi/4, 3*pi/8) q[1];
rzz(0.25e1) q[1],q[2];
barrier q[0],q[1];
swap q[0],q[2];
measure q[0] -> c[0];
"#;
        let c = parse_qasm(text).unwrap();
        assert_eq!(c.gates.len(), 6);
        let u3 = &c.gates[1];
        assert_eq!(u3.kind, GateKind::U3);
        assert!((u3.params[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((u3.params[1] + std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert_eq!(c.gates[2].params[0], 2.5);
        let lowered: Vec<_> = c.gates[3..]
            .iter()
            .map(|g| (g.kind, g.qubits[0], g.qubits[1]))
            .collect();
        assert_eq!(
            lowered,
            vec![
                (GateKind::Cx, Qubit(0), Qubit(2)),
                (GateKind::Cx, Qubit(2), Qubit(0)),
                (GateKind::Cx, Qubit(0), Qubit(2))
            ]
        );
    }

    #[test]
    fn broadcast_single_qubit_gate() {
        let c = parse_qasm("qreg q[3]; h q;").unwrap();
        assert_eq!(c.gates.len(), 3);
    }

    #[test]
    fn error_positions() {
        let e = parse_qasm("qreg q[2];\nccx q[0],q[1],q[0];").unwrap_err();
        assert_eq!((e.line, e.column), (2, 1));
        assert!(e.message.contains("unsupported gate"));

        let e = parse_qasm("qreg q[2];\nqreg r[2];").unwrap_err();
        assert_eq!(e.line, 2);

        let e = parse_qasm("qreg q[2];\ncx q[0] q[1];").unwrap_err();
        assert_eq!((e.line, e.column), (2, 9));

        let e = parse_qasm("qreg q[2];\nh q[5];").unwrap_err();
        assert!(e.message.contains("out of range"));

        assert!(parse_qasm("OPENQASM 3.0;").is_err());
        assert!(parse_qasm("qreg q[1]; rz q[0];").is_err());
    }

    #[test]
    fn empty_program() {
        let c = parse_qasm("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n").unwrap();
        assert_eq!(c, Circuit::default());
    }

    #[test]
    fn emit_then_parse_is_identity() {
        let mut c = Circuit::new(3);
        c.push(GateKind::U3, &[0.1, -2.5e-9, std::f64::consts::PI], &[2])
            .push(GateKind::Cz, &[], &[2, 0])
            .push(GateKind::Rzz, &[1e21], &[0, 1]);
        assert_eq!(parse_qasm(&emit_qasm(&c)).unwrap(), c);
    }
}
