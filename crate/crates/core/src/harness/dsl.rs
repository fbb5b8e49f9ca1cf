//! Instruction language.
//!
//! ```text
//! program  := stmt (';' stmt)* ';'?
//! stmt     := 'remove' objref
//!           | 'replace' objref 'with' attrs
//!           | 'insert' attrs 'at' 'left=' NUM 'm' ',' 'front=' NUM 'm' ('with' behaviors)?
//!           | 'behavior' objref ':' behaviors
//! objref   := 'ego' | 'id' INT | attrs (dir 'of' objref)?
//! attrs    := '[' attr (',' attr)* ']'
//! dir      := 'left' | 'right' | 'front' | 'back'
//! behaviors:= token (',' token)*
//! ```

use std::fmt;

use thiserror::Error;

use crate::behavior::{BehaviorSet, BehaviorToken};
use crate::scene_graph::{Direction, NodeId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObjRef {
    Ego,
    Id(NodeId),
    Query { attrs: Vec<String>, relation: Option<(Direction, Box<ObjRef>)> },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub left: f64,
    pub front: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Statement {
    Remove(ObjRef),
    Replace { target: ObjRef, attrs: Vec<String> },
    Insert { attrs: Vec<String>, placement: Placement, behavior: Option<BehaviorSet> },
    Behavior { target: ObjRef, behavior: BehaviorSet },
}

impl Statement {
    pub fn keyword(&self) -> &'static str {
        match self {
            Statement::Remove(_) => "remove",
            Statement::Replace { .. } => "replace",
            Statement::Insert { .. } => "insert",
            Statement::Behavior { .. } => "behavior",
        }
    }

    pub fn behavior(&self) -> Option<&BehaviorSet> {
        match self {
            Statement::Insert { behavior, .. } => behavior.as_ref(),
            Statement::Behavior { behavior, .. } => Some(behavior),
            _ => None,
        }
    }

    pub fn target(&self) -> Option<&ObjRef> {
        match self {
            Statement::Remove(r) | Statement::Replace { target: r, .. } | Statement::Behavior { target: r, .. } => Some(r),
            Statement::Insert { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EditProgram {
    pub statements: Vec<Statement>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("expected {expected}, found {found}")]
    Syntax { expected: String, found: String },
    #[error("unknown behavior token {0:?}")]
    UnknownToken(String),
    #[error("unknown direction {0:?}")]
    UnknownDirection(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    src: &'a str,
}

const DIRECTIONS: [&str; 4] = ["left", "right", "front", "back"];

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-'
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Self { chars: src.chars().collect(), pos: 0, src }
    }

    fn location(&self, pos: usize) -> (usize, usize) {
        let mut line = 1;
        let mut column = 1;
        for &c in &self.chars[..pos.min(self.chars.len())] {
            if c == '\n' {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
        }
        (line, column)
    }

    fn error_at(&self, pos: usize, kind: ParseErrorKind) -> ParseError {
        let (line, column) = self.location(pos);
        ParseError { line, column, kind }
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn describe_next(&self) -> String {
        match self.chars.get(self.pos) {
            None => "end of input".to_string(),
            Some(c) if is_word_char(*c) => {
                let end = (self.pos..self.chars.len()).find(|&i| !is_word_char(self.chars[i])).unwrap_or(self.chars.len());
                format!("{:?}", self.chars[self.pos..end].iter().collect::<String>())
            }
            Some(c) => format!("{c:?}"),
        }
    }

    fn syntax(&self, expected: &str) -> ParseError {
        self.error_at(self.pos, ParseErrorKind::Syntax { expected: expected.to_string(), found: self.describe_next() })
    }

    fn peek_char(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat_char(&mut self, c: char) -> bool {
        if self.peek_char() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_char(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat_char(c) {
            Ok(())
        } else {
            Err(self.syntax(&format!("{c:?}")))
        }
    }

    /// Next word without consuming it.
    fn peek_word(&mut self) -> Option<String> {
        self.skip_ws();
        let end = (self.pos..self.chars.len()).find(|&i| !is_word_char(self.chars[i])).unwrap_or(self.chars.len());
        (end > self.pos).then(|| self.chars[self.pos..end].iter().collect())
    }

    fn word(&mut self, expected: &str) -> Result<(usize, String), ParseError> {
        match self.peek_word() {
            Some(w) => {
                let start = self.pos;
                self.pos += w.chars().count();
                Ok((start, w))
            }
            None => Err(self.syntax(expected)),
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.peek_word().as_deref() == Some(kw) {
            self.pos += kw.len();
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(self.syntax(&format!("{kw:?}")))
        }
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let mut end = start;
        if matches!(self.chars.get(end), Some('-' | '+')) {
            end += 1;
        }
        while self.chars.get(end).is_some_and(|c| c.is_ascii_digit() || *c == '.' || *c == 'e' || *c == 'E') {
            // Allow a sign right after an exponent marker.
            end += 1;
            if matches!(self.chars.get(end - 1), Some('e' | 'E')) && matches!(self.chars.get(end), Some('-' | '+')) {
                end += 1;
            }
        }
        let text: String = self.chars[start..end].iter().collect();
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => {
                self.pos = end;
                Ok(v)
            }
            _ => Err(self.syntax("a number")),
        }
    }

    fn integer(&mut self) -> Result<NodeId, ParseError> {
        self.skip_ws();
        let end = (self.pos..self.chars.len()).find(|&i| !self.chars[i].is_ascii_digit()).unwrap_or(self.chars.len());
        let text: String = self.chars[self.pos..end].iter().collect();
        match text.parse::<NodeId>() {
            Ok(v) if end == self.pos || !self.chars.get(end).is_some_and(|c| is_word_char(*c)) => {
                self.pos = end;
                Ok(v)
            }
            _ => Err(self.syntax("an object id")),
        }
    }

    /// Words separated by single spaces, stopping at punctuation.
    fn phrase(&mut self, expected: &str) -> Result<(usize, String), ParseError> {
        let (start, first) = self.word(expected)?;
        let mut words = vec![first];
        while let Some(w) = self.peek_word() {
            self.pos += w.chars().count();
            words.push(w);
        }
        Ok((start, words.join(" ")))
    }

    fn attrs(&mut self) -> Result<Vec<String>, ParseError> {
        self.expect_char('[')?;
        let mut out = vec![self.phrase("an attribute")?.1];
        while self.eat_char(',') {
            out.push(self.phrase("an attribute")?.1);
        }
        self.expect_char(']')?;
        Ok(out)
    }

    fn objref(&mut self) -> Result<ObjRef, ParseError> {
        if self.eat_keyword("ego") {
            return Ok(ObjRef::Ego);
        }
        if self.eat_keyword("id") {
            return Ok(ObjRef::Id(self.integer()?));
        }
        if self.peek_char() != Some('[') {
            return Err(self.syntax("\"ego\", \"id\" or '['"));
        }
        let attrs = self.attrs()?;
        let relation = match self.peek_word() {
            Some(w) if w == "with" => None,
            Some(w) => {
                let start = self.pos;
                if !DIRECTIONS.contains(&w.as_str()) {
                    return Err(self.error_at(start, ParseErrorKind::UnknownDirection(w)));
                }
                self.pos += w.len();
                self.expect_keyword("of")?;
                let dir: Direction = w.parse().expect("listed direction");
                Some((dir, Box::new(self.objref()?)))
            }
            None => None,
        };
        Ok(ObjRef::Query { attrs, relation })
    }

    fn behaviors(&mut self) -> Result<BehaviorSet, ParseError> {
        let mut set = BehaviorSet::new();
        loop {
            let (start, text) = self.phrase("a behavior token")?;
            let token = BehaviorToken::from_text(&text).map_err(|_| self.error_at(start, ParseErrorKind::UnknownToken(text)))?;
            set.insert(token);
            if !self.eat_char(',') {
                return Ok(set);
            }
        }
    }

    fn assignment(&mut self, key: &str) -> Result<f64, ParseError> {
        self.expect_keyword(key)?;
        if self.chars.get(self.pos) != Some(&'=') {
            return Err(self.syntax("'='"));
        }
        self.pos += 1;
        let v = self.number()?;
        if self.chars.get(self.pos) != Some(&'m') || self.chars.get(self.pos + 1).is_some_and(|c| is_word_char(*c)) {
            return Err(self.syntax("the unit 'm'"));
        }
        self.pos += 1;
        Ok(v)
    }

    fn statement(&mut self) -> Result<Statement, ParseError> {
        let (start, kw) = self.word("a statement keyword")?;
        match kw.as_str() {
            "remove" => Ok(Statement::Remove(self.objref()?)),
            "replace" => {
                let target = self.objref()?;
                self.expect_keyword("with")?;
                Ok(Statement::Replace { target, attrs: self.attrs()? })
            }
            "insert" => {
                let attrs = self.attrs()?;
                self.expect_keyword("at")?;
                let left = self.assignment("left")?;
                self.expect_char(',')?;
                let front = self.assignment("front")?;
                let behavior = if self.eat_keyword("with") { Some(self.behaviors()?) } else { None };
                Ok(Statement::Insert { attrs, placement: Placement { left, front }, behavior })
            }
            "behavior" => {
                let target = self.objref()?;
                self.expect_char(':')?;
                Ok(Statement::Behavior { target, behavior: self.behaviors()? })
            }
            _ => {
                self.pos = start;
                Err(self.syntax("\"remove\", \"replace\", \"insert\" or \"behavior\""))
            }
        }
    }

    fn program(&mut self) -> Result<EditProgram, ParseError> {
        let mut statements = vec![self.statement()?];
        while self.eat_char(';') {
            if self.peek_char().is_none() {
                break;
            }
            statements.push(self.statement()?);
        }
        if self.peek_char().is_some() {
            return Err(self.syntax("';' or end of input"));
        }
        log::trace!("parsed {} statements from {:?}", statements.len(), self.src);
        Ok(EditProgram { statements })
    }
}

pub fn parse_instruction(text: &str) -> Result<EditProgram, ParseError> {
    Parser::new(text).program()
}

fn write_attrs(f: &mut fmt::Formatter<'_>, attrs: &[String]) -> fmt::Result {
    write!(f, "[{}]", attrs.join(", "))
}

impl fmt::Display for ObjRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjRef::Ego => f.write_str("ego"),
            ObjRef::Id(id) => write!(f, "id {id}"),
            ObjRef::Query { attrs, relation } => {
                write_attrs(f, attrs)?;
                if let Some((dir, inner)) = relation {
                    write!(f, " {dir} of {inner}")?;
                }
                Ok(())
            }
        }
    }
}

fn texts(set: &BehaviorSet) -> String {
    set.iter().map(BehaviorToken::text).collect::<Vec<_>>().join(", ")
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Remove(r) => write!(f, "remove {r}"),
            Statement::Replace { target, attrs } => {
                write!(f, "replace {target} with ")?;
                write_attrs(f, attrs)
            }
            Statement::Insert { attrs, placement, behavior } => {
                f.write_str("insert ")?;
                write_attrs(f, attrs)?;
                write!(f, " at left={}m, front={}m", placement.left, placement.front)?;
                match behavior {
                    Some(b) => write!(f, " with {}", texts(b)),
                    None => Ok(()),
                }
            }
            Statement::Behavior { target, behavior } => write!(f, "behavior {target}: {}", texts(behavior)),
        }
    }
}

impl fmt::Display for EditProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.statements.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(";\n"))
    }
}
