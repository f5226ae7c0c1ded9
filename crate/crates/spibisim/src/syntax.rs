//! Concrete syntax: messages, processes and the line-based file formats.
//!
//! In files, `#` followed by anything other than a letter starts a comment
//! that runs to the end of the line; `#a` is always a rigid name.

use std::fmt;

use thiserror::Error;

use crate::bisim::{TracedRelation, TracedTriple};
use crate::bitrace::{validate_bitrace, BiTrace, IOPair, Mark};
use crate::process::Process;
use crate::terms::{Message, Name, RigidName};
use crate::theory::{Derivation, Entry, MessageSet, ObserverTheory, Rule, Sequent};

/// A syntax error at a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Rigid(String),
    Zero,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Semi,
    Bar,
    Bang,
    Eq,
    Equiv,
    Turnstile,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Rigid(s) => write!(f, "`#{s}`"),
            Tok::Zero => f.write_str("`0`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Bar => f.write_str("`|`"),
            Tok::Bang => f.write_str("`!`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Equiv => f.write_str("`<->`"),
            Tok::Turnstile => f.write_str("`|-`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let mut end = (1, 1);
    let err = |line, column, message: String| ParseError {
        line,
        column,
        message,
    };
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let ident_at = |j: usize| -> usize {
            let mut k = j;
            while k < chars.len() && (chars[k].is_ascii_alphanumeric() || chars[k] == '_') {
                k += 1;
            }
            k
        };
        let mut advance = |n: usize, i: &mut usize| {
            *i += n;
            col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {
                advance(1, &mut i);
                continue;
            }
            '#' => {
                if i + 1 < chars.len() && chars[i + 1].is_ascii_alphabetic() {
                    let stop = ident_at(i + 1);
                    let id: String = chars[i + 1..stop].iter().collect();
                    let n = stop - i;
                    advance(n, &mut i);
                    out.push(Token {
                        tok: Tok::Rigid(id),
                        line: tl,
                        column: tc,
                    });
                    end = (line, col);
                } else {
                    while i < chars.len() && chars[i] != '\n' {
                        advance(1, &mut i);
                    }
                }
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                let stop = ident_at(i);
                let id: String = chars[i..stop].iter().collect();
                let n = stop - i;
                advance(n, &mut i);
                out.push(Token {
                    tok: Tok::Ident(id),
                    line: tl,
                    column: tc,
                });
                end = (line, col);
                continue;
            }
            _ => {}
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        let (tok, n) = if rest.starts_with("<->") {
            (Tok::Equiv, 3)
        } else if rest.starts_with("|-") {
            (Tok::Turnstile, 2)
        } else {
            let t = match c {
                '0' => Tok::Zero,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                ',' => Tok::Comma,
                '.' => Tok::Dot,
                ';' => Tok::Semi,
                '|' => Tok::Bar,
                '!' => Tok::Bang,
                '=' => Tok::Eq,
                other => return Err(err(tl, tc, format!("unexpected character `{other}`"))),
            };
            (t, 1)
        };
        advance(n, &mut i);
        out.push(Token {
            tok,
            line: tl,
            column: tc,
        });
        end = (line, col);
    }
    // End of input is reported just after the last token.
    out.push(Token {
        tok: Tok::Eof,
        line: end.0,
        column: end.1,
    });
    Ok(out)
}

const KEYWORDS: [&str; 8] = ["out", "in", "nu", "let", "case", "of", "pr", "enc"];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn error_here(&self, message: impl Into<String>) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError {
            line: t.line,
            column: t.column,
            message: message.into(),
        }
    }

    fn unexpected(&self, what: &str) -> ParseError {
        self.error_here(format!("expected {what}, found {}", self.peek()))
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&tok.to_string()))
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Ident(s) if s == kw => {
                self.bump();
                Ok(())
            }
            _ => Err(self.unexpected(&format!("`{kw}`"))),
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }

    fn binder(&mut self) -> Result<Name, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(Name::new(&s).expect("lexer yields valid identifiers"))
            }
            Tok::Rigid(_) => Err(self.error_here("binders must be names, not rigid names")),
            _ => Err(self.unexpected("a name")),
        }
    }

    fn message(&mut self) -> Result<Message, ParseError> {
        match self.peek().clone() {
            Tok::Rigid(s) => {
                self.bump();
                Ok(Message::Rigid(
                    RigidName::new(&s).expect("lexer yields valid identifiers"),
                ))
            }
            Tok::Ident(s) if (s == "pr" || s == "enc") && *self.peek_at(1) == Tok::LParen => {
                self.bump();
                self.bump();
                let a = self.message()?;
                self.expect(Tok::Comma)?;
                let b = self.message()?;
                self.expect(Tok::RParen)?;
                Ok(if s == "pr" {
                    Message::pair(a, b)
                } else {
                    Message::enc(a, b)
                })
            }
            Tok::Ident(_) => Ok(Message::Name(self.binder()?)),
            _ => Err(self.unexpected("a message")),
        }
    }

    fn process(&mut self) -> Result<Process, ParseError> {
        let mut p = self.prefixed()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            let q = self.prefixed()?;
            p = Process::par(p, q);
        }
        Ok(p)
    }

    fn prefixed(&mut self) -> Result<Process, ParseError> {
        match self.peek().clone() {
            Tok::Zero => {
                self.bump();
                Ok(Process::Nil)
            }
            Tok::LParen => {
                self.bump();
                let p = self.process()?;
                self.expect(Tok::RParen)?;
                Ok(p)
            }
            Tok::Bang => {
                self.bump();
                Ok(Process::bang(self.prefixed()?))
            }
            Tok::LBracket => {
                self.bump();
                let m1 = self.message()?;
                self.expect(Tok::Eq)?;
                let m2 = self.message()?;
                self.expect(Tok::RBracket)?;
                Ok(Process::matching(m1, m2, self.prefixed()?))
            }
            Tok::Ident(kw) => match kw.as_str() {
                "out" => {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    let chan = self.message()?;
                    self.expect(Tok::Comma)?;
                    let msg = self.message()?;
                    self.expect(Tok::RParen)?;
                    self.expect(Tok::Dot)?;
                    Ok(Process::output(chan, msg, self.prefixed()?))
                }
                "in" => {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    let chan = self.message()?;
                    self.expect(Tok::Comma)?;
                    let x = self.binder()?;
                    self.expect(Tok::RParen)?;
                    self.expect(Tok::Dot)?;
                    Ok(Process::input(chan, x, self.prefixed()?))
                }
                "nu" => {
                    self.bump();
                    let x = self.binder()?;
                    self.expect(Tok::Dot)?;
                    Ok(Process::restrict(x, self.prefixed()?))
                }
                "let" => {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    let x = self.binder()?;
                    self.expect(Tok::Comma)?;
                    let y = self.binder()?;
                    self.expect(Tok::RParen)?;
                    self.expect(Tok::Eq)?;
                    let src = self.message()?;
                    self.keyword("in")?;
                    Ok(Process::let_pair(x, y, src, self.prefixed()?))
                }
                "case" => {
                    self.bump();
                    let src = self.message()?;
                    self.keyword("of")?;
                    self.expect(Tok::LBrace)?;
                    let x = self.binder()?;
                    self.expect(Tok::RBrace)?;
                    let key = self.message()?;
                    self.keyword("in")?;
                    Ok(Process::case(src, x, key, self.prefixed()?))
                }
                _ => Err(self.unexpected("a process")),
            },
            _ => Err(self.unexpected("a process")),
        }
    }

    fn pair(&mut self) -> Result<(Message, Message), ParseError> {
        let l = self.message()?;
        self.expect(Tok::Equiv)?;
        let r = self.message()?;
        Ok((l, r))
    }

    fn derivation(&mut self) -> Result<Derivation, ParseError> {
        let rule = match self.peek().clone() {
            Tok::Ident(s) => match Rule::from_name(&s) {
                Some(r) => {
                    self.bump();
                    r
                }
                None => return Err(self.error_here(format!("unknown rule `{s}`"))),
            },
            _ => return Err(self.unexpected("a rule name")),
        };
        self.expect(Tok::LParen)?;
        let conclusion = self.sequent()?;
        let mut premises = Vec::new();
        if *self.peek() == Tok::Semi {
            self.bump();
            premises.push(self.derivation()?);
            while *self.peek() == Tok::Comma {
                self.bump();
                premises.push(self.derivation()?);
            }
        }
        self.expect(Tok::RParen)?;
        Ok(Derivation {
            rule,
            conclusion,
            premises,
            principal: None,
        })
    }

    fn sequent(&mut self) -> Result<Sequent, ParseError> {
        self.expect(Tok::LBrace)?;
        let mut entries = Vec::new();
        if *self.peek() != Tok::RBrace {
            entries.push(self.entry()?);
            while *self.peek() == Tok::Comma {
                self.bump();
                entries.push(self.entry()?);
            }
        }
        self.expect(Tok::RBrace)?;
        self.expect(Tok::Turnstile)?;
        let goal = self.entry()?;
        let mismatch = |p: &Parser| p.error_here("context and goal mix pairs and messages");
        match goal {
            Entry::Pair(left, right) => {
                let mut theory = ObserverTheory::new();
                for e in entries {
                    match e {
                        Entry::Pair(l, r) => theory.insert(l, r),
                        Entry::Msg(_) => return Err(mismatch(self)),
                    };
                }
                Ok(Sequent::Equiv { theory, left, right })
            }
            Entry::Msg(goal) => {
                let mut set = MessageSet::new();
                for e in entries {
                    match e {
                        Entry::Msg(m) => set.insert(m),
                        Entry::Pair(..) => return Err(mismatch(self)),
                    };
                }
                Ok(Sequent::Synth { set, goal })
            }
        }
    }

    fn entry(&mut self) -> Result<Entry, ParseError> {
        let m = self.message()?;
        if *self.peek() == Tok::Equiv {
            self.bump();
            Ok(Entry::Pair(m, self.message()?))
        } else {
            Ok(Entry::Msg(m))
        }
    }
}

fn whole<T>(text: &str, f: impl FnOnce(&mut Parser) -> Result<T, ParseError>) -> Result<T, ParseError> {
    let mut p = Parser::new(text)?;
    let out = f(&mut p)?;
    p.finish()?;
    Ok(out)
}

pub fn parse_message(text: &str) -> Result<Message, ParseError> {
    whole(text, Parser::message)
}

pub fn parse_process(text: &str) -> Result<Process, ParseError> {
    whole(text, Parser::process)
}

/// Parses the `rule(conclusion; premise, ...)` rendering of a derivation.
/// Principal entries are left for the validator to infer.
pub fn parse_derivation(text: &str) -> Result<Derivation, ParseError> {
    whole(text, Parser::derivation)
}

/// Text of `line` with everything outside `range` blanked, so positions
/// reported by the token parser are positions in the whole file.
fn masked(text: &str, spans: &[(usize, usize)]) -> String {
    text.char_indices()
        .map(|(i, c)| {
            if c == '\n' || spans.iter().any(|&(s, e)| i >= s && i < e) {
                c
            } else {
                ' '
            }
        })
        .collect()
}

/// Byte offset of each line start, and whether the line holds only a comment
/// or whitespace.
fn lines(text: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = 0;
    for l in text.split('\n') {
        out.push((start, l));
        start += l.len() + 1;
    }
    out
}

fn is_blank(line: &str) -> bool {
    let t = line.trim_start();
    t.is_empty() || (t.starts_with('#') && !t[1..].starts_with(|c: char| c.is_ascii_alphabetic()))
}

fn parse_span<T>(
    text: &str,
    span: (usize, usize),
    f: impl FnOnce(&mut Parser) -> Result<T, ParseError>,
) -> Result<T, ParseError> {
    whole(&masked(text, &[span]), f)
}

/// `.thy`: one `M <-> N` per line.
pub fn parse_theory(text: &str) -> Result<ObserverTheory, ParseError> {
    let mut out = ObserverTheory::new();
    for (start, l) in lines(text) {
        if !is_blank(l) {
            let (m, n) = parse_span(text, (start, start + l.len()), Parser::pair)?;
            out.insert(m, n);
        }
    }
    Ok(out)
}

/// One message per line.
pub fn parse_message_set(text: &str) -> Result<MessageSet, ParseError> {
    let mut out = MessageSet::new();
    for (start, l) in lines(text) {
        if !is_blank(l) {
            out.insert(parse_span(text, (start, start + l.len()), Parser::message)?);
        }
    }
    Ok(out)
}

fn parse_entry_line(text: &str, start: usize, l: &str) -> Result<IOPair, ParseError> {
    let body = l.trim_start();
    let indent = l.len() - body.len();
    let line_no = text[..start].matches('\n').count() + 1;
    let mark = match body.get(..2) {
        Some("i:") => Mark::Input,
        Some("o:") => Mark::Output,
        _ => {
            return Err(ParseError {
                line: line_no,
                column: indent + 1,
                message: "expected `i:` or `o:`".into(),
            })
        }
    };
    let (left, right) = parse_span(text, (start + indent + 2, start + l.len()), Parser::pair)?;
    Ok(IOPair { left, right, mark })
}

fn checked_trace(entries: Vec<IOPair>, line_of: &[usize]) -> Result<BiTrace, ParseError> {
    validate_bitrace(entries).map_err(|e| ParseError {
        line: line_of.get(e.index).copied().unwrap_or(1),
        column: 1,
        message: e.to_string(),
    })
}

/// `.bt`: one `i: M <-> N` or `o: M <-> N` per line, validated for output
/// scoping.
pub fn parse_bitrace(text: &str) -> Result<BiTrace, ParseError> {
    let mut entries = Vec::new();
    let mut line_of = Vec::new();
    for (no, (start, l)) in lines(text).into_iter().enumerate() {
        if !is_blank(l) {
            entries.push(parse_entry_line(text, start, l)?);
            line_of.push(no + 1);
        }
    }
    checked_trace(entries, &line_of)
}

#[derive(Default)]
struct Block {
    line: usize,
    entries: Vec<IOPair>,
    entry_lines: Vec<usize>,
    left: Option<Vec<(usize, usize)>>,
    right: Option<Vec<(usize, usize)>>,
}

/// `.rel`: blocks of `pair`, `bitrace:` with indented trace lines, then
/// `left:` and `right:` processes; a process may continue on further lines.
pub fn parse_relation(text: &str) -> Result<TracedRelation, ParseError> {
    #[derive(PartialEq)]
    enum Section {
        None,
        Trace,
        Left,
        Right,
    }
    let mut blocks: Vec<Block> = Vec::new();
    let mut section = Section::None;
    let err = |line: usize, column: usize, message: &str| ParseError {
        line,
        column,
        message: message.to_string(),
    };
    for (no, (start, l)) in lines(text).into_iter().enumerate() {
        let line_no = no + 1;
        if is_blank(l) {
            continue;
        }
        let body = l.trim_start();
        let indent = l.len() - body.len();
        let col = indent + 1;
        if body.trim_end() == "pair" {
            blocks.push(Block {
                line: line_no,
                ..Block::default()
            });
            section = Section::None;
            continue;
        }
        let Some(block) = blocks.last_mut() else {
            return Err(err(line_no, col, "expected `pair`"));
        };
        let keyed = |key: &str| body.strip_prefix(key).map(|_| start + indent + key.len());
        if body.trim_end() == "bitrace:" {
            section = Section::Trace;
        } else if let Some(from) = keyed("left:") {
            if block.left.is_some() {
                return Err(err(line_no, col, "duplicate `left:`"));
            }
            block.left = Some(vec![(from, start + l.len())]);
            section = Section::Left;
        } else if let Some(from) = keyed("right:") {
            if block.right.is_some() {
                return Err(err(line_no, col, "duplicate `right:`"));
            }
            block.right = Some(vec![(from, start + l.len())]);
            section = Section::Right;
        } else {
            match section {
                Section::Trace => {
                    block.entries.push(parse_entry_line(text, start, l)?);
                    block.entry_lines.push(line_no);
                }
                Section::Left => block.left.as_mut().expect("set").push((start, start + l.len())),
                Section::Right => block.right.as_mut().expect("set").push((start, start + l.len())),
                Section::None => return Err(err(line_no, col, "expected `bitrace:`, `left:` or `right:`")),
            }
        }
    }
    let mut triples = Vec::new();
    for b in blocks {
        let missing = |what: &str| err(b.line, 1, &format!("pair block lacks `{what}`"));
        let left = b.left.as_ref().ok_or_else(|| missing("left:"))?;
        let right = b.right.as_ref().ok_or_else(|| missing("right:"))?;
        let left = whole(&masked(text, left), Parser::process)?;
        let right = whole(&masked(text, right), Parser::process)?;
        let trace = checked_trace(b.entries, &b.entry_lines)?;
        triples.push(TracedTriple::new(trace, left, right));
    }
    Ok(TracedRelation::new(triples))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn messages() {
        assert_eq!(parse_message("pr( x , #a )").unwrap().to_string(), "pr(x,#a)");
        assert_eq!(
            parse_message("enc(enc(a,b),#k)").unwrap().to_string(),
            "enc(enc(a,b),#k)"
        );
        let e = parse_message("pr(x,").unwrap_err();
        assert_eq!((e.line, e.column), (1, 6));
        assert!(parse_message("x y").is_err());
    }

    #[test]
    fn precedence() {
        let p = parse_process("nu k. out(#a, enc(x,k)).0 | 0").unwrap();
        assert!(matches!(&p, Process::Par { left, right }
            if matches!(**left, Process::Restrict { .. }) && **right == Process::Nil));
        let p = parse_process("0 | 0 | 0").unwrap();
        assert!(matches!(&p, Process::Par { left, .. } if matches!(**left, Process::Par { .. })));
    }

    #[test]
    fn process_grammar() {
        let p = parse_process("in(#a,x).out(#a,x).0").unwrap();
        assert_eq!(p.to_string(), "in(#a,x).out(#a,x).0");
        for s in [
            "!in(a,x).0",
            "[x = #a]out(#a,x).0",
            "let (x,y) = pr(a,b) in 0",
            "case enc(a,k) of {x}k in 0",
        ] {
            assert_eq!(parse_process(s).unwrap().to_string(), s);
        }
        let e = parse_process("in(#a,#x).0").unwrap_err();
        assert!(e.message.contains("binders"));
        let e = parse_process("out(#a,b)\n.1").unwrap_err();
        assert_eq!((e.line, e.column), (2, 2));
    }

    #[test]
    fn comments_and_theories() {
        let t = parse_theory("# a comment\n#a <-> #b   # trailing\n\nx <-> x\n").unwrap();
        assert_eq!(t.len(), 2);
        let e = parse_theory("#a <-> #b\n#a <->\n").unwrap_err();
        assert_eq!(e.line, 2);
    }

    #[test]
    fn bitraces() {
        let h = parse_bitrace("i: x <-> x\no: enc(x,#k) <-> enc(x,#k)\n").unwrap();
        assert_eq!(h.len(), 2);
        let e = parse_bitrace("# header\no: enc(x,#k) <-> enc(x,#k)\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(parse_bitrace("x: a <-> a").is_err());
    }

    #[test]
    fn relations() {
        let text = "pair\n  bitrace:\n    o: #a <-> #a\n  left: out(#a,#a).0\n  right: 0\n\
                    pair\n  bitrace:\n  left: in(a,x).\n     0\n  right: 0\n";
        let r = parse_relation(text).unwrap();
        assert_eq!(r.triples().len(), 2);
        assert_eq!(r.triples()[1].left.to_string(), "in(a,x).0");
        let e = parse_relation("pair\n  left: 0\n  right: out(\n").unwrap_err();
        assert_eq!(e.line, 3);
        assert!(parse_relation("pair\n  left: 0\n").is_err());
    }

    #[test]
    fn derivations_round_trip() {
        let s = "pr({#a <-> #b} |- pr(#a,x) <-> pr(#b,x); id({#a <-> #b} |- #a <-> #b), \
                 var({#a <-> #b} |- x <-> x))";
        let d = parse_derivation(s).unwrap();
        assert_eq!(d.to_string(), s);
        d.validate().unwrap();
        let d = parse_derivation("var({} |- x)").unwrap();
        assert!(matches!(d.conclusion, Sequent::Synth { .. }));
    }
}
