//! The locked netlist language.
//!
//! Accepts a structural subset of Verilog: one flat module, wire
//! declarations, instances of `and`, `or`, `not`, `xor`, `nand` and `dff`,
//! and operator-free `assign` aliases. Everything that can express
//! behavior (procedural blocks, operators, conditionals, parameters,
//! registers) is rejected with [`ParseErrorClass::BehavioralConstruct`].
//! The full grammar lives in `docs/FORMATS.md`.

mod extract;
mod lexer;
mod render;

pub use extract::extract_netlist_block;
pub use render::render;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::netlist::{
    validate, Direction, GateKind, NetId, NetKind, Netlist, NetlistBuilder, Port,
    StructuralViolation, ViolationClass,
};
use lexer::{is_operator, lex, TokKind, Token};

/// Untrusted netlist text plus where it came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceText {
    pub text: String,
    pub origin: String,
}

impl SourceText {
    pub fn new(text: impl Into<String>, origin: impl Into<String>) -> Self {
        SourceText {
            text: text.into(),
            origin: origin.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pos {
    pub line: u32,
    pub column: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParseErrorClass {
    Lex,
    Syntax,
    BehavioralConstruct,
    UnknownPrimitive,
    Arity,
    Width,
    DuplicateName,
    /// The text parsed but the circuit breaks an IR invariant.
    Structural(ViolationClass),
}

impl ParseErrorClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ParseErrorClass::Lex => "lex",
            ParseErrorClass::Syntax => "syntax",
            ParseErrorClass::BehavioralConstruct => "behavioral-construct",
            ParseErrorClass::UnknownPrimitive => "unknown-primitive",
            ParseErrorClass::Arity => "arity",
            ParseErrorClass::Width => "width",
            ParseErrorClass::DuplicateName => "duplicate-name",
            ParseErrorClass::Structural(v) => v.as_str(),
        }
    }
}

impl fmt::Display for ParseErrorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseError {
    pub class: ParseErrorClass,
    pub line: u32,
    pub column: u32,
    pub message: String,
    pub token: String,
}

impl ParseError {
    fn new(class: ParseErrorClass, pos: Pos, message: impl Into<String>, token: &str) -> Self {
        ParseError {
            class,
            line: pos.line,
            column: pos.column,
            message: message.into(),
            token: token.to_owned(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: [{}] {}",
            self.line, self.column, self.class, self.message
        )?;
        if !self.token.is_empty() {
            write!(f, " (at `{}`)", self.token)?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

/// Constructs that are legal HDL but banned in the locked language.
const BEHAVIORAL_KEYWORDS: &[&str] = &[
    "always",
    "always_comb",
    "always_ff",
    "always_latch",
    "initial",
    "final",
    "if",
    "else",
    "case",
    "casex",
    "casez",
    "endcase",
    "for",
    "while",
    "repeat",
    "forever",
    "begin",
    "end",
    "fork",
    "join",
    "function",
    "endfunction",
    "task",
    "endtask",
    "generate",
    "endgenerate",
    "genvar",
    "reg",
    "logic",
    "integer",
    "real",
    "time",
    "parameter",
    "localparam",
    "defparam",
    "specify",
    "endspecify",
    "posedge",
    "negedge",
    "wait",
    "disable",
    "force",
    "release",
    "deassign",
    "supply0",
    "supply1",
    "tri",
    "wand",
    "wor",
];

/// Human-readable list of the banned constructs, for prompts and docs.
pub fn banned_constructs() -> &'static [&'static str] {
    &[
        "always / initial blocks",
        "if / else",
        "case statements",
        "assign with any operator (&, |, ^, ~, !, +, -, *, ...)",
        "ternary ?: expressions",
        "arithmetic and comparison operators",
        "function / task definitions",
        "reg / integer / logic variables",
        "parameters, generate blocks and loops",
        "instances of modules or primitives other than and, or, not, xor, nand, dff",
        "gate delays (#n)",
    ]
}

fn is_behavioral_keyword(word: &str) -> bool {
    BEHAVIORAL_KEYWORDS.contains(&word)
}

#[derive(Clone, Debug)]
enum Conn {
    Net {
        name: String,
        index: Option<u32>,
        pos: Pos,
    },
    Const {
        value: u64,
        width: Option<u32>,
        pos: Pos,
    },
}

impl Conn {
    fn pos(&self) -> Pos {
        match self {
            Conn::Net { pos, .. } | Conn::Const { pos, .. } => *pos,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum DeclKind {
    Input,
    Output,
    Wire,
}

#[derive(Clone, Debug)]
struct Decl {
    kind: DeclKind,
    range: Option<(u32, u32)>,
    name: String,
    pos: Pos,
}

#[derive(Debug)]
struct GateStmt {
    kind: GateKind,
    name: Option<String>,
    conns: Vec<Conn>,
    pos: Pos,
    token: String,
}

#[derive(Debug)]
struct AssignStmt {
    lhs: Conn,
    rhs: Conn,
    pos: Pos,
}

#[derive(Debug, Default)]
struct Ast {
    name: String,
    header: Vec<(String, Pos)>,
    ansi: bool,
    decls: Vec<Decl>,
    gates: Vec<GateStmt>,
    assigns: Vec<AssignStmt>,
}

struct Parser {
    toks: Vec<Token>,
    i: usize,
    errors: Vec<ParseError>,
}

type Res<T> = Result<T, ()>;

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.i.min(self.toks.len() - 1)]
    }

    fn peek_at(&self, k: usize) -> &Token {
        &self.toks[(self.i + k).min(self.toks.len() - 1)]
    }

    fn bump(&mut self) -> Token {
        let t = self.peek().clone();
        if self.i < self.toks.len() - 1 {
            self.i += 1;
        }
        t
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek().kind, TokKind::Eof)
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(&self.peek().kind, TokKind::Sym(x) if *x == s)
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(&self.peek().kind, TokKind::Ident(x) if x == w)
    }

    fn err(&mut self, class: ParseErrorClass, tok: &Token, msg: impl Into<String>) {
        self.errors
            .push(ParseError::new(class, tok.pos, msg, &tok.text));
    }

    fn expect_sym(&mut self, s: &str) -> Res<Token> {
        if self.is_sym(s) {
            Ok(self.bump())
        } else {
            let t = self.peek().clone();
            self.unexpected(&t, &format!("expected `{s}`"));
            Err(())
        }
    }

    fn expect_ident(&mut self, what: &str) -> Res<(String, Pos)> {
        let t = self.peek().clone();
        match &t.kind {
            TokKind::Ident(w) if !is_behavioral_keyword(w) && !is_reserved(w) => {
                self.bump();
                Ok((w.clone(), t.pos))
            }
            _ => {
                self.unexpected(&t, &format!("expected {what}"));
                Err(())
            }
        }
    }

    /// Report an unexpected token, classifying banned constructs.
    fn unexpected(&mut self, t: &Token, msg: &str) {
        match &t.kind {
            TokKind::Sym(s) if is_operator(s) || *s == "\"" => self.err(
                ParseErrorClass::BehavioralConstruct,
                t,
                format!("operator `{}` is not allowed; express logic with gate instances", t.text),
            ),
            TokKind::Sym("{") => self.err(
                ParseErrorClass::BehavioralConstruct,
                t,
                "concatenation is not allowed; connect bits individually",
            ),
            TokKind::Ident(w) if is_behavioral_keyword(w) => self.err(
                ParseErrorClass::BehavioralConstruct,
                t,
                format!("`{w}` is a behavioral construct; only gate instances are allowed"),
            ),
            TokKind::SystemIdent(_) | TokKind::Directive(_) => self.err(
                ParseErrorClass::BehavioralConstruct,
                t,
                format!("`{}` is not allowed in a gate-level netlist", t.text),
            ),
            TokKind::Eof => self.err(ParseErrorClass::Syntax, t, format!("{msg}, found end of input")),
            _ => self.err(
                ParseErrorClass::Syntax,
                t,
                format!("{msg}, found `{}`", t.text),
            ),
        }
    }

    /// Skip to just past the next `;` at nesting depth zero, stopping
    /// before `endmodule`.
    fn sync(&mut self) {
        let mut depth = 0i32;
        while !self.at_eof() {
            if depth == 0 && self.is_word("endmodule") {
                return;
            }
            let t = self.bump();
            match &t.kind {
                TokKind::Sym("(" | "[" | "{") => depth += 1,
                TokKind::Sym(")" | "]" | "}") => depth = (depth - 1).max(0),
                TokKind::Sym(";") if depth == 0 => return,
                _ => {}
            }
        }
    }

    /// Skip one procedural statement: a `begin`/`case`/`fork` block up to its
    /// matching terminator, or tokens up to a top-level `;`. A trailing
    /// `else` branch is skipped too.
    fn skip_statement(&mut self) {
        loop {
            let mut depth = 0i32;
            let mut paren = 0i32;
            while !self.at_eof() {
                if depth == 0 && paren == 0 && self.is_word("endmodule") {
                    return;
                }
                let t = self.bump();
                match &t.kind {
                    TokKind::Ident(w) => match w.as_str() {
                        "begin" | "case" | "casex" | "casez" | "fork" | "function" | "task"
                        | "generate" | "specify" => depth += 1,
                        "end" | "endcase" | "join" | "endfunction" | "endtask" | "endgenerate"
                        | "endspecify" => {
                            depth -= 1;
                            if depth <= 0 && paren == 0 {
                                break;
                            }
                        }
                        _ => {}
                    },
                    TokKind::Sym("(" | "[" | "{") => paren += 1,
                    TokKind::Sym(")" | "]" | "}") => paren = (paren - 1).max(0),
                    TokKind::Sym(";") if depth == 0 && paren == 0 => break,
                    _ => {}
                }
            }
            if self.is_word("else") {
                self.bump();
                continue;
            }
            return;
        }
    }

    fn parse_range(&mut self) -> Res<Option<(u32, u32, Pos)>> {
        if !self.is_sym("[") {
            return Ok(None);
        }
        let open = self.bump();
        let msb = self.expect_number("range bound")?;
        self.expect_sym(":")?;
        let lsb = self.expect_number("range bound")?;
        self.expect_sym("]")?;
        Ok(Some((msb, lsb, open.pos)))
    }

    fn expect_number(&mut self, what: &str) -> Res<u32> {
        let t = self.peek().clone();
        match t.kind {
            TokKind::Number(v) if v <= u32::MAX as u64 => {
                self.bump();
                Ok(v as u32)
            }
            _ => {
                self.unexpected(&t, &format!("expected {what}"));
                Err(())
            }
        }
    }

    fn checked_range(&mut self, r: Option<(u32, u32, Pos)>, name: &str) -> Res<Option<(u32, u32)>> {
        match r {
            None => Ok(None),
            Some((msb, lsb, pos)) => {
                if msb < lsb {
                    self.errors.push(ParseError::new(
                        ParseErrorClass::Width,
                        pos,
                        format!("range of `{name}` must be written [msb:lsb] with msb >= lsb"),
                        name,
                    ));
                    Err(())
                } else if msb - lsb >= MAX_WIDTH {
                    self.errors.push(ParseError::new(
                        ParseErrorClass::Width,
                        pos,
                        format!("`{name}` is wider than {MAX_WIDTH} bits"),
                        name,
                    ));
                    Err(())
                } else {
                    Ok(Some((msb, lsb)))
                }
            }
        }
    }

    /// A net reference or a constant. Any operator is behavioral.
    fn parse_conn(&mut self) -> Res<Conn> {
        let t = self.peek().clone();
        let conn = match &t.kind {
            TokKind::Ident(w) if !is_behavioral_keyword(w) && !is_reserved(w) => {
                self.bump();
                let index = if self.is_sym("[") {
                    self.bump();
                    let idx = self.expect_number("bit index")?;
                    if self.is_sym(":") {
                        let c = self.peek().clone();
                        self.err(
                            ParseErrorClass::Width,
                            &c,
                            "part-selects are not allowed; use single-bit selects",
                        );
                        return Err(());
                    }
                    self.expect_sym("]")?;
                    Some(idx)
                } else {
                    None
                };
                Conn::Net {
                    name: w.clone(),
                    index,
                    pos: t.pos,
                }
            }
            TokKind::Number(v) => {
                self.bump();
                Conn::Const {
                    value: *v,
                    width: None,
                    pos: t.pos,
                }
            }
            TokKind::Based {
                width,
                base,
                digits,
            } => {
                self.bump();
                let radix = match base {
                    'b' => 2,
                    'o' => 8,
                    'd' => 10,
                    _ => 16,
                };
                match u64::from_str_radix(digits, radix) {
                    Ok(value) => Conn::Const {
                        value,
                        width: *width,
                        pos: t.pos,
                    },
                    Err(_) => {
                        let class = if digits
                            .chars()
                            .any(|c| matches!(c.to_ascii_lowercase(), 'x' | 'z' | '?'))
                        {
                            ParseErrorClass::Syntax
                        } else {
                            ParseErrorClass::Width
                        };
                        self.err(class, &t, "constant must be a plain two-state value");
                        return Err(());
                    }
                }
            }
            _ => {
                self.unexpected(&t, "expected a net name or constant");
                return Err(());
            }
        };
        // A following operator means the connection is an expression.
        if let TokKind::Sym(s) = &self.peek().kind {
            if is_operator(s) {
                let t = self.peek().clone();
                self.unexpected(&t, "");
                return Err(());
            }
        }
        Ok(conn)
    }

    fn parse_header(&mut self, ast: &mut Ast) -> Res<()> {
        if !self.is_sym("(") {
            return Ok(());
        }
        self.bump();
        if self.is_sym(")") {
            self.bump();
            return Ok(());
        }
        let mut current: Option<(DeclKind, Option<(u32, u32)>)> = None;
        loop {
            let t = self.peek().clone();
            match &t.kind {
                TokKind::Ident(w) if w == "input" || w == "output" => {
                    self.bump();
                    ast.ansi = true;
                    let kind = if w == "input" {
                        DeclKind::Input
                    } else {
                        DeclKind::Output
                    };
                    if self.is_word("wire") {
                        self.bump();
                    }
                    if self.is_word("reg") || self.is_word("logic") {
                        let r = self.peek().clone();
                        self.unexpected(&r, "");
                        return Err(());
                    }
                    let r = self.parse_range()?;
                    let (name, pos) = self.expect_ident("port name")?;
                    let range = self.checked_range(r, &name)?;
                    current = Some((kind, range));
                    ast.header.push((name.clone(), pos));
                    ast.decls.push(Decl {
                        kind,
                        range,
                        name,
                        pos,
                    });
                }
                TokKind::Ident(w) if w == "inout" => {
                    self.err(ParseErrorClass::Syntax, &t, "inout ports are not supported");
                    return Err(());
                }
                TokKind::Ident(_) => {
                    let (name, pos) = self.expect_ident("port name")?;
                    ast.header.push((name.clone(), pos));
                    if let Some((kind, range)) = current {
                        ast.decls.push(Decl {
                            kind,
                            range,
                            name,
                            pos,
                        });
                    }
                }
                _ => {
                    self.unexpected(&t, "expected a port declaration");
                    return Err(());
                }
            }
            if self.is_sym(",") {
                self.bump();
                continue;
            }
            self.expect_sym(")")?;
            return Ok(());
        }
    }

    fn parse_decl(&mut self, kind: DeclKind, ast: &mut Ast) -> Res<()> {
        if kind != DeclKind::Wire && self.is_word("wire") {
            self.bump();
        }
        if self.is_word("reg") || self.is_word("logic") {
            let t = self.peek().clone();
            self.unexpected(&t, "");
            return Err(());
        }
        let r = self.parse_range()?;
        loop {
            let (name, pos) = self.expect_ident("net name")?;
            let range = self.checked_range(r, &name)?;
            ast.decls.push(Decl {
                kind,
                range,
                name: name.clone(),
                pos,
            });
            if self.is_sym("=") {
                // `wire w = x;` is an alias, same rules as `assign`.
                let eq = self.bump();
                let rhs = self.parse_conn()?;
                ast.assigns.push(AssignStmt {
                    lhs: Conn::Net {
                        name,
                        index: None,
                        pos,
                    },
                    rhs,
                    pos: eq.pos,
                });
            }
            if self.is_sym(",") {
                self.bump();
                continue;
            }
            self.expect_sym(";")?;
            return Ok(());
        }
    }

    fn parse_assign(&mut self, ast: &mut Ast) -> Res<()> {
        loop {
            let lhs = self.parse_conn()?;
            let eq = self.expect_sym("=")?;
            let rhs = self.parse_conn()?;
            ast.assigns.push(AssignStmt {
                lhs,
                rhs,
                pos: eq.pos,
            });
            if self.is_sym(",") {
                self.bump();
                continue;
            }
            self.expect_sym(";")?;
            return Ok(());
        }
    }

    fn parse_gate(&mut self, kind: GateKind, kw: Token, ast: &mut Ast) -> Res<()> {
        if self.is_sym("#") {
            let t = self.peek().clone();
            self.err(
                ParseErrorClass::BehavioralConstruct,
                &t,
                "gate delays are not allowed",
            );
            return Err(());
        }
        let mut first = true;
        loop {
            let name = match &self.peek().kind {
                TokKind::Ident(_) => Some(self.expect_ident("instance name")?),
                _ => None,
            };
            let open = self.expect_sym("(")?;
            let mut conns = Vec::new();
            if self.is_sym(".") {
                let t = self.peek().clone();
                self.err(
                    ParseErrorClass::Syntax,
                    &t,
                    "named port connections are not supported; list (out, in1[, in2]) positionally",
                );
                return Err(());
            }
            if !self.is_sym(")") {
                loop {
                    conns.push(self.parse_conn()?);
                    if self.is_sym(",") {
                        self.bump();
                        continue;
                    }
                    break;
                }
            }
            self.expect_sym(")")?;
            let (name, pos) = match name {
                Some((n, p)) => (Some(n), p),
                None => (None, open.pos),
            };
            ast.gates.push(GateStmt {
                kind,
                name,
                conns,
                pos: if first { kw.pos } else { pos },
                token: kw.text.clone(),
            });
            first = false;
            if self.is_sym(",") {
                self.bump();
                continue;
            }
            self.expect_sym(";")?;
            return Ok(());
        }
    }

    /// One module item. Returns `false` at `endmodule`/EOF.
    fn parse_item(&mut self, ast: &mut Ast) -> bool {
        let t = self.peek().clone();
        let result = match &t.kind {
            TokKind::Eof => return false,
            TokKind::Ident(w) if w == "endmodule" => return false,
            TokKind::Ident(w) => match w.as_str() {
                "input" => {
                    self.bump();
                    self.parse_decl(DeclKind::Input, ast)
                }
                "output" => {
                    self.bump();
                    self.parse_decl(DeclKind::Output, ast)
                }
                "wire" => {
                    self.bump();
                    self.parse_decl(DeclKind::Wire, ast)
                }
                "inout" => {
                    self.err(ParseErrorClass::Syntax, &t, "inout ports are not supported");
                    Err(())
                }
                "assign" => {
                    self.bump();
                    self.parse_assign(ast)
                }
                "module" => {
                    self.err(
                        ParseErrorClass::Syntax,
                        &t,
                        "nested modules are not allowed; write one flat module",
                    );
                    Err(())
                }
                kw if is_behavioral_keyword(kw) => {
                    self.unexpected(&t, "");
                    self.bump();
                    match kw {
                        "reg" | "logic" | "integer" | "real" | "time" | "genvar" | "parameter"
                        | "localparam" | "defparam" | "supply0" | "supply1" | "tri" | "wand"
                        | "wor" => self.sync(),
                        "function" | "task" | "generate" | "specify" => {
                            self.i -= 1;
                            self.skip_statement();
                        }
                        _ => self.skip_statement(),
                    }
                    return true;
                }
                _ => match GateKind::from_keyword(w) {
                    Some(kind) => {
                        self.bump();
                        self.parse_gate(kind, t.clone(), ast)
                    }
                    None => {
                        let next = self.peek_at(1).kind.clone();
                        if matches!(next, TokKind::Ident(_) | TokKind::Sym("(" | "#")) {
                            self.err(
                                ParseErrorClass::UnknownPrimitive,
                                &t,
                                format!(
                                    "`{w}` is not a locked primitive; use only and, or, not, xor, nand, dff"
                                ),
                            );
                        } else {
                            self.unexpected(&t, "expected a declaration, gate instance or assign");
                        }
                        Err(())
                    }
                },
            },
            _ => {
                self.unexpected(&t, "expected a declaration, gate instance or assign");
                Err(())
            }
        };
        if result.is_err() {
            self.sync();
        }
        true
    }

    fn parse_module(&mut self) -> Option<Ast> {
        let mut ast = Ast::default();
        // Anything before `module` is noise we refuse to guess about.
        if !self.is_word("module") {
            let t = self.peek().clone();
            if matches!(t.kind, TokKind::Eof) {
                self.err(ParseErrorClass::Syntax, &t, "expected `module`, found end of input");
                return None;
            }
            self.unexpected(&t, "expected `module`");
            while !self.at_eof() && !self.is_word("module") {
                self.bump();
            }
            if self.at_eof() {
                return None;
            }
        }
        self.bump();
        match self.expect_ident("module name") {
            Ok((name, _)) => ast.name = name,
            Err(()) => {
                self.sync();
            }
        }
        if !ast.name.is_empty() {
            if self.parse_header(&mut ast).is_err() {
                self.sync();
            } else if self.expect_sym(";").is_err() {
                self.sync();
            }
        }
        while self.parse_item(&mut ast) {}
        if self.is_word("endmodule") {
            self.bump();
        } else {
            let t = self.peek().clone();
            self.err(ParseErrorClass::Syntax, &t, "missing `endmodule`");
        }
        if !self.at_eof() {
            let t = self.peek().clone();
            if matches!(&t.kind, TokKind::Ident(w) if w == "module") {
                self.err(
                    ParseErrorClass::Syntax,
                    &t,
                    "only one flat module is allowed per netlist",
                );
            } else {
                self.unexpected(&t, "expected end of input after `endmodule`");
            }
        }
        Some(ast)
    }
}

/// Widest bus the parser accepts.
pub const MAX_WIDTH: u32 = 256;

pub(crate) fn is_reserved(word: &str) -> bool {
    matches!(
        word,
        "module" | "endmodule" | "input" | "output" | "inout" | "wire" | "assign"
    ) || GateKind::from_keyword(word).is_some()
}

/// Parse locked netlist text into a validated [`Netlist`].
pub fn parse(src: &SourceText) -> Result<Netlist, Vec<ParseError>> {
    parse_str(&src.text)
}

/// Parse raw bytes; invalid UTF-8 is reported as lex errors, never a panic.
pub fn parse_bytes(bytes: &[u8]) -> Result<Netlist, Vec<ParseError>> {
    parse_str(&String::from_utf8_lossy(bytes))
}

pub fn parse_str(text: &str) -> Result<Netlist, Vec<ParseError>> {
    let mut errors = Vec::new();
    let toks = lex(text, &mut errors);
    let mut p = Parser {
        toks,
        i: 0,
        errors,
    };
    let ast = p.parse_module();
    let mut errors = p.errors;
    let result = ast.map(|ast| Resolver::default().resolve(ast, &mut errors));
    errors.sort_by_key(|e| (e.line, e.column));
    match result {
        Some(Some(n)) if errors.is_empty() => Ok(n),
        _ => {
            if errors.is_empty() {
                errors.push(ParseError::new(
                    ParseErrorClass::Syntax,
                    Pos::default(),
                    "no module found",
                    "",
                ));
            }
            Err(errors)
        }
    }
}

#[derive(Clone, Debug)]
struct Symbol {
    kind: DeclKind,
    range: Option<(u32, u32)>,
    base: usize,
    pos: Pos,
}

impl Symbol {
    fn width(&self) -> usize {
        self.range.map_or(1, |(m, l)| (m - l + 1) as usize)
    }
}

/// Slot 0 and 1 are the constants; every declared bit gets a slot, and
/// `assign` aliases union slots together.
#[derive(Default)]
struct Resolver {
    parent: Vec<usize>,
    slot_name: Vec<String>,
    slot_pos: Vec<Pos>,
    symbols: HashMap<String, Symbol>,
}

impl Resolver {
    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }

    fn new_slots(&mut self, name: &str, range: Option<(u32, u32)>, pos: Pos) -> usize {
        let base = self.parent.len();
        match range {
            None => {
                self.parent.push(base);
                self.slot_name.push(name.to_owned());
                self.slot_pos.push(pos);
            }
            Some((msb, lsb)) => {
                for i in lsb..=msb {
                    let s = self.parent.len();
                    self.parent.push(s);
                    self.slot_name.push(format!("{name}[{i}]"));
                    self.slot_pos.push(pos);
                }
            }
        }
        base
    }

    fn declare(&mut self, d: &Decl, errors: &mut Vec<ParseError>) {
        if let Some(prev) = self.symbols.get(&d.name).cloned() {
            // `output y; wire y;` re-declares a port as a net, which is legal.
            let redecl_ok = (d.kind == DeclKind::Wire) != (prev.kind == DeclKind::Wire)
                && d.range == prev.range;
            if redecl_ok {
                return;
            }
            errors.push(ParseError::new(
                ParseErrorClass::DuplicateName,
                d.pos,
                format!("`{}` is already declared at line {}", d.name, prev.pos.line),
                &d.name,
            ));
            return;
        }
        let base = self.new_slots(&d.name, d.range, d.pos);
        self.symbols.insert(
            d.name.clone(),
            Symbol {
                kind: d.kind,
                range: d.range,
                base,
                pos: d.pos,
            },
        );
    }

    /// Slots for a connection: one per bit (LSB first).
    fn slots(&mut self, c: &Conn, implicit: bool, errors: &mut Vec<ParseError>) -> Option<Vec<usize>> {
        match c {
            Conn::Const { value, width, pos } => {
                let w = width.unwrap_or(1).max(1);
                if w > MAX_WIDTH || (w < 64 && *value >> w != 0) {
                    errors.push(ParseError::new(
                        ParseErrorClass::Width,
                        *pos,
                        "constant does not fit its width",
                        &value.to_string(),
                    ));
                    return None;
                }
                if width.is_none() && *value > 1 {
                    errors.push(ParseError::new(
                        ParseErrorClass::Width,
                        *pos,
                        "unsized constants must be 0 or 1",
                        &value.to_string(),
                    ));
                    return None;
                }
                Some(
                    (0..w)
                        .map(|i| if i < 64 { ((value >> i) & 1) as usize } else { 0 })
                        .collect(),
                )
            }
            Conn::Net { name, index, pos } => {
                let sym = match self.symbols.get(name) {
                    Some(s) => s.clone(),
                    None if implicit && index.is_none() => {
                        let base = self.new_slots(name, None, *pos);
                        let s = Symbol {
                            kind: DeclKind::Wire,
                            range: None,
                            base,
                            pos: *pos,
                        };
                        self.symbols.insert(name.clone(), s.clone());
                        s
                    }
                    None => {
                        errors.push(ParseError::new(
                            ParseErrorClass::Syntax,
                            *pos,
                            format!("`{name}` is not declared"),
                            name,
                        ));
                        return None;
                    }
                };
                match (index, sym.range) {
                    (None, _) => Some((0..sym.width()).map(|i| sym.base + i).collect()),
                    (Some(i), Some((msb, lsb))) if *i >= lsb && *i <= msb => {
                        Some(vec![sym.base + (*i - lsb) as usize])
                    }
                    (Some(i), Some((msb, lsb))) => {
                        errors.push(ParseError::new(
                            ParseErrorClass::Width,
                            *pos,
                            format!("bit {i} is outside `{name}[{msb}:{lsb}]`"),
                            name,
                        ));
                        None
                    }
                    (Some(_), None) => {
                        errors.push(ParseError::new(
                            ParseErrorClass::Width,
                            *pos,
                            format!("`{name}` is a scalar and cannot be bit-selected"),
                            name,
                        ));
                        None
                    }
                }
            }
        }
    }

    fn scalar(&mut self, c: &Conn, errors: &mut Vec<ParseError>) -> Option<usize> {
        let s = self.slots(c, true, errors)?;
        if s.len() != 1 {
            let name = match c {
                Conn::Net { name, .. } => name.clone(),
                Conn::Const { value, .. } => value.to_string(),
            };
            errors.push(ParseError::new(
                ParseErrorClass::Width,
                c.pos(),
                format!("`{name}` is {} bits wide; gate pins take a single bit", s.len()),
                &name,
            ));
            return None;
        }
        Some(s[0])
    }

    fn resolve(mut self, ast: Ast, errors: &mut Vec<ParseError>) -> Option<Netlist> {
        let before = errors.len();
        // Constants.
        self.parent = vec![0, 1];
        self.slot_name = vec!["1'b0".into(), "1'b1".into()];
        self.slot_pos = vec![Pos::default(); 2];

        for d in &ast.decls {
            self.declare(d, errors);
        }
        let header: Vec<(String, Pos)> = ast.header.clone();
        let mut port_order = Vec::new();
        for (name, pos) in &header {
            if port_order.iter().any(|(n, _)| n == name) {
                errors.push(ParseError::new(
                    ParseErrorClass::DuplicateName,
                    *pos,
                    format!("port `{name}` listed twice"),
                    name,
                ));
                continue;
            }
            match self.symbols.get(name) {
                Some(s) if s.kind != DeclKind::Wire => port_order.push((name.clone(), s.clone())),
                _ => errors.push(ParseError::new(
                    ParseErrorClass::Syntax,
                    *pos,
                    format!("port `{name}` has no input/output declaration"),
                    name,
                )),
            }
        }
        for d in &ast.decls {
            if d.kind != DeclKind::Wire && !header.iter().any(|(n, _)| n == &d.name) {
                errors.push(ParseError::new(
                    ParseErrorClass::Syntax,
                    d.pos,
                    format!("`{}` is declared as a port but missing from the port list", d.name),
                    &d.name,
                ));
            }
        }

        let input_slots: Vec<usize> = port_order
            .iter()
            .filter(|(_, s)| s.kind == DeclKind::Input)
            .flat_map(|(_, s)| s.base..s.base + s.width())
            .collect();

        // Gates: resolve pins.
        struct Pending {
            kind: GateKind,
            name: String,
            out: usize,
            ins: Vec<usize>,
            pos: Pos,
        }
        let mut pending = Vec::new();
        let mut inst_names: HashMap<String, Pos> = HashMap::new();
        let mut auto = 0usize;
        for g in &ast.gates {
            let name = match &g.name {
                Some(n) => {
                    if let Some(prev) = inst_names.get(n) {
                        errors.push(ParseError::new(
                            ParseErrorClass::DuplicateName,
                            g.pos,
                            format!("instance `{n}` is already defined at line {}", prev.line),
                            n,
                        ));
                        continue;
                    }
                    n.clone()
                }
                None => loop {
                    auto += 1;
                    let n = format!("_u{auto}");
                    if !inst_names.contains_key(&n) && !ast.gates.iter().any(|x| x.name.as_deref() == Some(&n)) {
                        break n;
                    }
                },
            };
            inst_names.insert(name.clone(), g.pos);
            let want = g.kind.arity() + 1;
            if g.conns.len() != want {
                errors.push(ParseError::new(
                    ParseErrorClass::Arity,
                    g.pos,
                    format!(
                        "`{}` takes one output and {} input(s), found {} connection(s)",
                        g.kind.keyword(),
                        g.kind.arity(),
                        g.conns.len()
                    ),
                    &g.token,
                ));
                continue;
            }
            if matches!(g.conns[0], Conn::Const { .. }) {
                errors.push(ParseError::new(
                    ParseErrorClass::Syntax,
                    g.conns[0].pos(),
                    "a gate output cannot be a constant",
                    &g.token,
                ));
                continue;
            }
            let resolved: Vec<Option<usize>> =
                g.conns.iter().map(|c| self.scalar(c, errors)).collect();
            if resolved.iter().any(Option::is_none) {
                continue;
            }
            let slots: Vec<usize> = resolved.into_iter().flatten().collect();
            if g.kind == GateKind::Dff && !input_slots.contains(&slots[2]) {
                errors.push(ParseError::new(
                    ParseErrorClass::Syntax,
                    g.conns[2].pos(),
                    "the dff clock must be a declared input port bit",
                    &g.token,
                ));
                continue;
            }
            pending.push(Pending {
                kind: g.kind,
                name,
                out: slots[0],
                ins: slots[1..].to_vec(),
                pos: g.pos,
            });
        }

        // Aliases.
        for a in &ast.assigns {
            if matches!(a.lhs, Conn::Const { .. }) {
                errors.push(ParseError::new(
                    ParseErrorClass::Syntax,
                    a.pos,
                    "cannot assign to a constant",
                    "=",
                ));
                continue;
            }
            let Some(lhs) = self.slots(&a.lhs, true, errors) else {
                continue;
            };
            let rhs = match &a.rhs {
                Conn::Const { value, width, pos } if width.is_none() => {
                    // Unsized constant ties every bit of the target.
                    if *value > 1 && lhs.len() == 1 {
                        self.slots(&a.rhs, false, errors);
                        continue;
                    }
                    let w = lhs.len() as u32;
                    match self.slots(
                        &Conn::Const {
                            value: *value,
                            width: Some(w),
                            pos: *pos,
                        },
                        false,
                        errors,
                    ) {
                        Some(s) => s,
                        None => continue,
                    }
                }
                other => match self.slots(other, true, errors) {
                    Some(s) => s,
                    None => continue,
                },
            };
            if lhs.len() != rhs.len() {
                errors.push(ParseError::new(
                    ParseErrorClass::Width,
                    a.pos,
                    format!("assign connects {} bit(s) to {} bit(s)", lhs.len(), rhs.len()),
                    "=",
                ));
                continue;
            }
            for (l, r) in lhs.into_iter().zip(rhs) {
                self.union(l, r);
            }
        }

        // Structural checks on a partial program would only echo the
        // earlier errors (a dropped statement leaves its nets dangling).
        if !errors.is_empty() {
            return None;
        }

        // Each alias class becomes one net. Count the sources a class holds.
        let n_slots = self.parent.len();
        let mut class_sources: HashMap<usize, Vec<usize>> = HashMap::new();
        for s in 0..n_slots {
            if s < 2 || input_slots.contains(&s) {
                let r = self.find(s);
                class_sources.entry(r).or_default().push(s);
            }
        }
        let mut b = NetlistBuilder::new(ast.name.clone());
        let mut net_of: HashMap<usize, NetId> = HashMap::new();
        let mut net_pos: HashMap<NetId, Pos> = HashMap::new();
        let mut alias_conflicts = Vec::new();

        let mut net_for = |this: &mut Resolver, b: &mut NetlistBuilder, slot: usize| -> NetId {
            let r = this.find(slot);
            if let Some(&id) = net_of.get(&r) {
                return id;
            }
            let sources = class_sources.get(&r).cloned().unwrap_or_default();
            if sources.len() > 1 {
                alias_conflicts.push((r, sources.clone()));
            }
            let kind = match sources.first() {
                Some(0) => NetKind::Constant0,
                Some(1) => NetKind::Constant1,
                Some(_) => NetKind::PrimaryInput,
                None => NetKind::Internal,
            };
            let name = match kind {
                NetKind::Constant0 | NetKind::Constant1 => None,
                NetKind::PrimaryInput => Some(this.slot_name[sources[0]].clone()),
                NetKind::Internal => Some(this.slot_name[slot].clone()),
            };
            let id = b.add_net(name.as_deref(), kind);
            net_of.insert(r, id);
            net_pos.insert(id, this.slot_pos[slot]);
            id
        };

        // Ports first so their bit names win.
        for (name, sym) in &port_order {
            let bits: Vec<NetId> = (0..sym.width())
                .map(|i| net_for(&mut self, &mut b, sym.base + i))
                .collect();
            let direction = if sym.kind == DeclKind::Input {
                Direction::Input
            } else {
                Direction::Output
            };
            b.push_port(Port {
                name: name.clone(),
                direction,
                vector: sym.range.is_some(),
                lsb: sym.range.map_or(0, |(_, l)| l),
                bits,
            });
        }
        let mut gate_pos = Vec::new();
        for g in &pending {
            let out = net_for(&mut self, &mut b, g.out);
            let ins: Vec<NetId> = g.ins.iter().map(|&s| net_for(&mut self, &mut b, s)).collect();
            b.gate(g.kind, g.name.clone(), out, &ins);
            gate_pos.push(g.pos);
        }
        let netlist = b.build();

        for (r, sources) in &alias_conflicts {
            let names: Vec<String> = sources.iter().map(|s| self.slot_name[*s].clone()).collect();
            let _ = r;
            let pos = self.slot_pos[*sources.last().unwrap()];
            errors.push(ParseError::new(
                ParseErrorClass::Structural(ViolationClass::MultiDriver),
                pos,
                format!("assign ties together several sources: {}", names.join(", ")),
                &names.join(","),
            ));
        }
        for v in validate(&netlist) {
            let pos = match &v {
                StructuralViolation::Arity { gate, .. } => gate_pos[gate.index()],
                StructuralViolation::CombinationalLoop { cycle } => cycle
                    .first()
                    .map(|g| gate_pos[g.index()])
                    .unwrap_or_default(),
                StructuralViolation::DanglingNet { net } | StructuralViolation::MultiDriver { net, .. } => {
                    net_pos.get(net).copied().unwrap_or_default()
                }
            };
            if matches!(v, StructuralViolation::MultiDriver { .. }) && !alias_conflicts.is_empty() {
                // Already reported with better context.
                continue;
            }
            let token = match &v {
                StructuralViolation::DanglingNet { net } | StructuralViolation::MultiDriver { net, .. } => {
                    netlist.net_label(*net)
                }
                _ => String::new(),
            };
            errors.push(ParseError::new(
                ParseErrorClass::Structural(v.class()),
                pos,
                v.describe(&netlist),
                &token,
            ));
        }
        if errors.len() > before {
            None
        } else {
            Some(netlist)
        }
    }
}
