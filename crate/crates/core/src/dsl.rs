//! A small text format for posets, d-posets, truncation families and finite
//! spaces.
//!
//! ```text
//! # comments run to the end of the line
//! poset fig3 {
//!   elem 1 2 3 ω a;
//!   le 1 2 3 ω; le a ω;            # consecutive items are related
//!   chain 1 2 3 -> ω as ℕ;
//!   set ℕ = 1 2 3 tails ℕ;
//! }
//!
//! family fig1 level N {
//!   flags dcpo;
//!   elem [(m,k) | 1<=m<=N, 1<=k<=N] ⊤;
//!   le [(m,k) | 1<=k<=N] ⊤ for 1<=m<=N;
//!   chain [(m,k) | 1<=k<=N] -> ⊤ as col(m) for 1<=m<=N;
//!   set col(m) = [(m,k) | 1<=k<=N] tails col(m) at m for 1<=m<=N;
//! }
//!
//! space sierpinski { points 0 1; open 1; }
//! space fig3top from fig3;
//! ```
//!
//! Names are words, tuples `(e, ...)`, applications `f(e, ...)` or quoted
//! strings. Inside a family, a word bound to an index variable (or the level
//! variable) is replaced by its value; unbound words are literal. Index
//! variables range over the integers allowed by a conjunction of linear
//! (in)equalities; each must be bounded on both sides by earlier variables.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::corpus::{CorpusEntry, EntryFlags};
use crate::dposet::{DPoset, DPosetError, LimitDecl};
use crate::family::{FamilyFlags, Level, SchemaSet, TruncationFamily};
use crate::order::{FinPoset, RelationMode};
use crate::smyth::{FiniteSpace, Subset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Source position attached to syntax nodes. Ignored by equality, so a
/// reprinted document compares equal to the original.
#[derive(Debug, Clone, Copy, Default)]
pub struct At(pub Pos);

impl PartialEq for At {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for At {}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslError {
    #[error("{pos}: syntax error: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: {msg}")]
    Semantic { pos: Pos, msg: String },
}

impl DslError {
    pub fn pos(&self) -> Pos {
        match self {
            DslError::Syntax { pos, .. } | DslError::Semantic { pos, .. } => *pos,
        }
    }
}

fn semantic(pos: Pos, msg: impl Into<String>) -> DslError {
    DslError::Semantic {
        pos,
        msg: msg.into(),
    }
}

// ---------------------------------------------------------------- syntax tree

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Int(i64),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    /// Constant times expression; products of variables are rejected.
    Mul(i64, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
    Ne,
}

impl CmpOp {
    fn holds(self, a: i64, b: i64) -> bool {
        match self {
            CmpOp::Le => a <= b,
            CmpOp::Lt => a < b,
            CmpOp::Ge => a >= b,
            CmpOp::Gt => a > b,
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
        }
    }

    fn flip(self) -> CmpOp {
        match self {
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Ge => CmpOp::Le,
            CmpOp::Gt => CmpOp::Lt,
            op => op,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Le => "<=",
            CmpOp::Lt => "<",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
        }
    }
}

/// `e0 op0 e1 op1 e2 ...`, read as a conjunction of adjacent comparisons.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub exprs: Vec<Expr>,
    pub ops: Vec<CmpOp>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Template {
    /// A word or integer, optionally applied: `a`, `k`, `col(m)`.
    Atom { head: String, args: Option<Vec<Expr>> },
    Tuple(Vec<Expr>),
    Quoted(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ListItem {
    One(Template),
    /// `[T | constraints]`, expanded in lexicographic order of the fresh
    /// variables (first appearance order).
    Comprehension(Template, Vec<Constraint>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    Flags(Vec<String>),
    Elem(Vec<ListItem>),
    Le(Vec<ListItem>),
    Chain {
        items: Vec<ListItem>,
        limit: Template,
        id: Option<Template>,
    },
    Set {
        name: Template,
        items: Vec<ListItem>,
        tails: Vec<ListItem>,
        at: Option<Expr>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub domain: Vec<Constraint>,
    pub at: At,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub name: String,
    /// `Some(var)` for a `family`, `None` for a `poset`.
    pub level_var: Option<String>,
    pub stmts: Vec<Stmt>,
    pub at: At,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpaceBody {
    Explicit {
        points: Vec<ListItem>,
        opens: Vec<Vec<ListItem>>,
    },
    /// Alexandrov topology of a poset block (at level 1 for families).
    From(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceDef {
    pub name: String,
    pub body: SpaceBody,
    pub at: At,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Item {
    Block(Block),
    Space(SpaceDef),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DslDocument {
    pub items: Vec<Item>,
}

// --------------------------------------------------------------------- lexer

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Int(i64, String),
    Str(String),
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    pos: Pos,
    /// Whitespace or a comment precedes the token.
    spaced: bool,
}

const SYMBOLS: [&str; 19] = [
    "->", "<=", ">=", "!=", "(", ")", "[", "]", "{", "}", ",", ";", "|", "=", "<", ">", "+", "-",
    "*",
];

const KEYWORDS: [&str; 14] = [
    "poset", "family", "space", "level", "flags", "elem", "le", "chain", "set", "tails", "at", "as",
    "for", "from",
];

const STMT_KEYWORDS: [&str; 2] = ["points", "open"];

fn is_word_char(c: char) -> bool {
    !c.is_whitespace() && !"()[]{},;|=<>!+-*#\"".contains(c)
}

fn lex(text: &str) -> Result<Vec<Token>, DslError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let mut spaced = true;
    let syntax = |pos, msg: String| DslError::Syntax { pos, msg };
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            spaced = true;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            spaced = true;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            spaced = true;
            continue;
        }
        if c == '"' {
            let mut s = String::new();
            i += 1;
            col += 1;
            loop {
                match chars.get(i) {
                    None | Some('\n') => return Err(syntax(pos, "unterminated string".into())),
                    Some('"') => {
                        i += 1;
                        col += 1;
                        break;
                    }
                    Some('\\') => {
                        match chars.get(i + 1) {
                            Some(&e @ ('"' | '\\')) => s.push(e),
                            Some('n') => s.push('\n'),
                            _ => {
                                return Err(syntax(Pos { line, col }, "bad escape in string".into()))
                            }
                        }
                        i += 2;
                        col += 2;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                        col += 1;
                    }
                }
            }
            out.push(Token {
                tok: Tok::Str(s),
                pos,
                spaced,
            });
            spaced = false;
            continue;
        }
        if is_word_char(c) {
            let start = i;
            while i < chars.len() && is_word_char(chars[i]) {
                i += 1;
            }
            let w: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = if w.chars().all(|ch| ch.is_ascii_digit()) {
                let v = w
                    .parse::<i64>()
                    .map_err(|_| syntax(pos, format!("integer `{w}` out of range")))?;
                Tok::Int(v, w)
            } else {
                Tok::Word(w)
            };
            out.push(Token { tok, pos, spaced });
            spaced = false;
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        let Some(sym) = SYMBOLS.iter().find(|s| rest.starts_with(**s)) else {
            return Err(syntax(pos, format!("unexpected character `{c}`")));
        };
        let len = sym.chars().count();
        i += len;
        col += len;
        out.push(Token {
            tok: Tok::Sym(sym),
            pos,
            spaced,
        });
        spaced = false;
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, col },
        spaced: true,
    });
    Ok(out)
}

// -------------------------------------------------------------------- parser

struct Parser {
    toks: Vec<Token>,
    i: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.i]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, DslError> {
        Err(DslError::Syntax {
            pos: self.peek().pos,
            msg: msg.into(),
        })
    }

    fn describe(&self) -> String {
        match &self.peek().tok {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Int(_, raw) => format!("`{raw}`"),
            Tok::Str(s) => format!("\"{s}\""),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn at_sym(&self, s: &str) -> bool {
        matches!(self.peek().tok, Tok::Sym(t) if t == s)
    }

    fn at_word(&self, w: &str) -> bool {
        matches!(&self.peek().tok, Tok::Word(t) if t == w)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.at_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), DslError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", self.describe()))
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if self.at_word(w) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_word(&mut self, w: &str) -> Result<(), DslError> {
        if self.eat_word(w) {
            Ok(())
        } else {
            self.err(format!("expected `{w}`, found {}", self.describe()))
        }
    }

    /// A block or space name: any word, integer or string.
    fn name(&mut self) -> Result<String, DslError> {
        match self.peek().tok.clone() {
            Tok::Word(w) if !KEYWORDS.contains(&w.as_str()) => {
                self.bump();
                Ok(w)
            }
            Tok::Int(_, raw) => {
                self.bump();
                Ok(raw)
            }
            Tok::Str(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.err(format!("expected a name, found {}", self.describe())),
        }
    }

    fn document(&mut self) -> Result<DslDocument, DslError> {
        let mut items = Vec::new();
        while self.peek().tok != Tok::Eof {
            items.push(self.item()?);
        }
        if items.is_empty() {
            return self.err("empty document: expected `poset`, `family` or `space`");
        }
        Ok(DslDocument { items })
    }

    fn item(&mut self) -> Result<Item, DslError> {
        let at = At(self.peek().pos);
        if self.eat_word("poset") {
            let name = self.name()?;
            let stmts = self.block_body()?;
            Ok(Item::Block(Block {
                name,
                level_var: None,
                stmts,
                at,
            }))
        } else if self.eat_word("family") {
            let name = self.name()?;
            self.expect_word("level")?;
            let var = match self.peek().tok.clone() {
                Tok::Word(w) if !KEYWORDS.contains(&w.as_str()) => {
                    self.bump();
                    w
                }
                _ => return self.err(format!("expected a level variable, found {}", self.describe())),
            };
            let stmts = self.block_body()?;
            Ok(Item::Block(Block {
                name,
                level_var: Some(var),
                stmts,
                at,
            }))
        } else if self.eat_word("space") {
            let name = self.name()?;
            if self.eat_word("from") {
                let src = self.name()?;
                self.expect_sym(";")?;
                return Ok(Item::Space(SpaceDef {
                    name,
                    body: SpaceBody::From(src),
                    at,
                }));
            }
            self.expect_sym("{")?;
            let mut points = None;
            let mut opens = Vec::new();
            while !self.eat_sym("}") {
                if self.eat_word("points") {
                    if points.is_some() {
                        return self.err("`points` given twice");
                    }
                    points = Some(self.list()?);
                } else if self.eat_word("open") {
                    opens.push(self.list()?);
                } else {
                    return self.err(format!("expected `points` or `open`, found {}", self.describe()));
                }
                self.expect_sym(";")?;
            }
            let Some(points) = points else {
                return Err(DslError::Syntax {
                    pos: at.0,
                    msg: "space without `points`".into(),
                });
            };
            Ok(Item::Space(SpaceDef {
                name,
                body: SpaceBody::Explicit { points, opens },
                at,
            }))
        } else {
            self.err(format!("expected `poset`, `family` or `space`, found {}", self.describe()))
        }
    }

    fn block_body(&mut self) -> Result<Vec<Stmt>, DslError> {
        self.expect_sym("{")?;
        let mut stmts = Vec::new();
        while !self.eat_sym("}") {
            if self.peek().tok == Tok::Eof {
                return self.err("expected `}`, found end of input");
            }
            stmts.push(self.stmt()?);
        }
        Ok(stmts)
    }

    fn stmt(&mut self) -> Result<Stmt, DslError> {
        let at = At(self.peek().pos);
        let kind = if self.eat_word("flags") {
            let mut flags = Vec::new();
            while let Tok::Word(w) = self.peek().tok.clone() {
                if w == "for" {
                    break;
                }
                self.bump();
                flags.push(w);
            }
            StmtKind::Flags(flags)
        } else if self.eat_word("elem") {
            StmtKind::Elem(self.list()?)
        } else if self.eat_word("le") {
            StmtKind::Le(self.list()?)
        } else if self.eat_word("chain") {
            let items = self.list()?;
            self.expect_sym("->")?;
            let limit = self.template()?;
            let id = if self.eat_word("as") {
                Some(self.template()?)
            } else {
                None
            };
            StmtKind::Chain { items, limit, id }
        } else if self.eat_word("set") {
            let name = self.template()?;
            self.expect_sym("=")?;
            let items = self.list()?;
            let tails = if self.eat_word("tails") {
                self.list()?
            } else {
                Vec::new()
            };
            let at = if self.eat_word("at") {
                Some(self.expr()?)
            } else {
                None
            };
            StmtKind::Set {
                name,
                items,
                tails,
                at,
            }
        } else {
            return self.err(format!(
                "expected `elem`, `le`, `chain`, `set` or `flags`, found {}",
                self.describe()
            ));
        };
        let domain = if self.eat_word("for") {
            self.constraints()?
        } else {
            Vec::new()
        };
        self.expect_sym(";")?;
        Ok(Stmt { kind, domain, at })
    }

    fn at_list_end(&self) -> bool {
        match &self.peek().tok {
            Tok::Word(w) => ["for", "tails", "at", "as"].contains(&w.as_str()),
            Tok::Sym(s) => *s != "(" && *s != "[",
            Tok::Eof => true,
            _ => false,
        }
    }

    fn list(&mut self) -> Result<Vec<ListItem>, DslError> {
        let mut items = Vec::new();
        while !self.at_list_end() {
            if self.eat_sym("[") {
                let t = self.template()?;
                self.expect_sym("|")?;
                let cs = self.constraints()?;
                self.expect_sym("]")?;
                items.push(ListItem::Comprehension(t, cs));
            } else {
                items.push(ListItem::One(self.template()?));
            }
        }
        Ok(items)
    }

    fn template(&mut self) -> Result<Template, DslError> {
        match self.peek().tok.clone() {
            Tok::Str(s) => {
                self.bump();
                Ok(Template::Quoted(s))
            }
            Tok::Sym("(") => {
                self.bump();
                Ok(Template::Tuple(self.args()?))
            }
            Tok::Word(_) | Tok::Int(..) => {
                let head = match self.bump().tok {
                    Tok::Word(w) => w,
                    Tok::Int(_, raw) => raw,
                    _ => unreachable!(),
                };
                let next = self.peek();
                let args = if matches!(next.tok, Tok::Sym("(")) && !next.spaced {
                    self.bump();
                    Some(self.args()?)
                } else {
                    None
                };
                Ok(Template::Atom { head, args })
            }
            _ => self.err(format!("expected a name, found {}", self.describe())),
        }
    }

    /// Comma-separated expressions after an opening `(`, through `)`.
    fn args(&mut self) -> Result<Vec<Expr>, DslError> {
        let mut args = Vec::new();
        if self.eat_sym(")") {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if self.eat_sym(")") {
                return Ok(args);
            }
            self.expect_sym(",")?;
        }
    }

    fn constraints(&mut self) -> Result<Vec<Constraint>, DslError> {
        let mut cs = vec![self.constraint()?];
        while self.eat_sym(",") {
            cs.push(self.constraint()?);
        }
        Ok(cs)
    }

    fn cmp_op(&self) -> Option<CmpOp> {
        match self.peek().tok {
            Tok::Sym("<=") => Some(CmpOp::Le),
            Tok::Sym("<") => Some(CmpOp::Lt),
            Tok::Sym(">=") => Some(CmpOp::Ge),
            Tok::Sym(">") => Some(CmpOp::Gt),
            Tok::Sym("=") => Some(CmpOp::Eq),
            Tok::Sym("!=") => Some(CmpOp::Ne),
            _ => None,
        }
    }

    fn constraint(&mut self) -> Result<Constraint, DslError> {
        let mut exprs = vec![self.expr()?];
        let mut ops = Vec::new();
        while let Some(op) = self.cmp_op() {
            self.bump();
            ops.push(op);
            exprs.push(self.expr()?);
        }
        if ops.is_empty() {
            return self.err(format!("expected a comparison, found {}", self.describe()));
        }
        Ok(Constraint { exprs, ops })
    }

    fn expr(&mut self) -> Result<Expr, DslError> {
        let mut e = self.term()?;
        loop {
            if self.eat_sym("+") {
                e = Expr::Add(Box::new(e), Box::new(self.term()?));
            } else if self.eat_sym("-") {
                e = Expr::Sub(Box::new(e), Box::new(self.term()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, DslError> {
        let mut e = self.factor()?;
        while self.at_sym("*") {
            let pos = self.bump().pos;
            let rhs = self.factor()?;
            e = match (e, rhs) {
                (Expr::Int(c), r) => Expr::Mul(c, Box::new(r)),
                (l, Expr::Int(c)) => Expr::Mul(c, Box::new(l)),
                _ => {
                    return Err(DslError::Syntax {
                        pos,
                        msg: "only multiplication by an integer constant is allowed".into(),
                    })
                }
            };
        }
        Ok(e)
    }

    fn factor(&mut self) -> Result<Expr, DslError> {
        match self.peek().tok.clone() {
            Tok::Int(v, _) => {
                self.bump();
                Ok(Expr::Int(v))
            }
            Tok::Word(w) if !KEYWORDS.contains(&w.as_str()) => {
                self.bump();
                Ok(Expr::Var(w))
            }
            Tok::Sym("-") => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.factor()?)))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            _ => self.err(format!("expected an expression, found {}", self.describe())),
        }
    }
}

pub fn parse(text: &str) -> Result<DslDocument, DslError> {
    let toks = lex(text)?;
    Parser { toks, i: 0 }.document()
}

/// A whitespace- or comma-separated list of names, optionally in braces:
/// `{(1,1), (1,2)}`, `a b`, `{}`. Comprehensions are allowed.
pub fn parse_names(text: &str) -> Result<Vec<String>, DslError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, i: 0 };
    let braced = p.eat_sym("{");
    let mut items = Vec::new();
    loop {
        items.extend(p.list()?);
        if !p.eat_sym(",") {
            break;
        }
    }
    if braced {
        p.expect_sym("}")?;
    }
    if p.peek().tok != Tok::Eof {
        return p.err(format!("unexpected {}", p.describe()));
    }
    expand(&items, &[], Pos { line: 1, col: 1 })
}

// ------------------------------------------------------------------- printer

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let compound = |e: &Expr| matches!(e, Expr::Add(..) | Expr::Sub(..));
        match self {
            Expr::Int(v) => write!(f, "{v}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(e) if compound(e) || matches!(**e, Expr::Mul(..)) => write!(f, "-({e})"),
            Expr::Neg(e) => write!(f, "-{e}"),
            Expr::Add(a, b) if compound(b) => write!(f, "{a}+({b})"),
            Expr::Add(a, b) => write!(f, "{a}+{b}"),
            Expr::Sub(a, b) if compound(b) => write!(f, "{a}-({b})"),
            Expr::Sub(a, b) => write!(f, "{a}-{b}"),
            Expr::Mul(c, e) if compound(e) || matches!(**e, Expr::Mul(..) | Expr::Int(_)) => {
                write!(f, "{c}*({e})")
            }
            Expr::Mul(c, e) => write!(f, "{c}*{e}"),
        }
    }
}

fn join<T: fmt::Display>(xs: &[T], sep: &str) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.exprs[0])?;
        for (op, e) in self.ops.iter().zip(&self.exprs[1..]) {
            write!(f, "{}{e}", op.symbol())?;
        }
        Ok(())
    }
}

fn quoted(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Template::Atom { head, args: None } => write!(f, "{head}"),
            Template::Atom {
                head,
                args: Some(a),
            } => write!(f, "{head}({})", join(a, ",")),
            Template::Tuple(a) => write!(f, "({})", join(a, ",")),
            Template::Quoted(s) => write!(f, "{}", quoted(s)),
        }
    }
}

impl fmt::Display for ListItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ListItem::One(t) => write!(f, "{t}"),
            ListItem::Comprehension(t, cs) => write!(f, "[{t} | {}]", join(cs, ", ")),
        }
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, items: &[ListItem]) -> fmt::Result {
    for it in items {
        write!(f, " {it}")?;
    }
    Ok(())
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            StmtKind::Flags(fl) => {
                write!(f, "flags")?;
                for x in fl {
                    write!(f, " {x}")?;
                }
            }
            StmtKind::Elem(items) => {
                write!(f, "elem")?;
                write_list(f, items)?;
            }
            StmtKind::Le(items) => {
                write!(f, "le")?;
                write_list(f, items)?;
            }
            StmtKind::Chain { items, limit, id } => {
                write!(f, "chain")?;
                write_list(f, items)?;
                write!(f, " -> {limit}")?;
                if let Some(id) = id {
                    write!(f, " as {id}")?;
                }
            }
            StmtKind::Set {
                name,
                items,
                tails,
                at,
            } => {
                write!(f, "set {name} =")?;
                write_list(f, items)?;
                if !tails.is_empty() {
                    write!(f, " tails")?;
                    write_list(f, tails)?;
                }
                if let Some(at) = at {
                    write!(f, " at {at}")?;
                }
            }
        }
        if !self.domain.is_empty() {
            write!(f, " for {}", join(&self.domain, ", "))?;
        }
        write!(f, ";")
    }
}

/// Prints `name` so that it reads back as the same element name.
pub fn quote_name(name: &str) -> String {
    let plain = (|| {
        let toks = lex(name).ok()?;
        let mut p = Parser { toks, i: 0 };
        if let Tok::Word(w) = &p.peek().tok {
            if KEYWORDS.contains(&w.as_str()) || STMT_KEYWORDS.contains(&w.as_str()) {
                return None;
            }
        }
        let t = p.template().ok()?;
        (p.peek().tok == Tok::Eof).then_some(())?;
        (t.render(&[], Pos::default()).ok()? == name).then_some(())
    })();
    match plain {
        Some(()) => name.to_string(),
        None => quoted(name),
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.level_var {
            Some(v) => writeln!(f, "family {} level {v} {{", quote_name(&self.name))?,
            None => writeln!(f, "poset {} {{", quote_name(&self.name))?,
        }
        for s in &self.stmts {
            writeln!(f, "  {s}")?;
        }
        writeln!(f, "}}")
    }
}

impl fmt::Display for SpaceDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.body {
            SpaceBody::From(src) => {
                writeln!(f, "space {} from {};", quote_name(&self.name), quote_name(src))
            }
            SpaceBody::Explicit { points, opens } => {
                writeln!(f, "space {} {{", quote_name(&self.name))?;
                write!(f, "  points")?;
                write_list(f, points)?;
                writeln!(f, ";")?;
                for o in opens {
                    write!(f, "  open")?;
                    write_list(f, o)?;
                    writeln!(f, ";")?;
                }
                writeln!(f, "}}")
            }
        }
    }
}

impl fmt::Display for DslDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, item) in self.items.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            match item {
                Item::Block(b) => write!(f, "{b}")?,
                Item::Space(s) => write!(f, "{s}")?,
            }
        }
        Ok(())
    }
}

// ------------------------------------------------------------- instantiation

type Env = [(String, i64)];

fn lookup(env: &Env, v: &str) -> Option<i64> {
    env.iter().rev().find(|(n, _)| n == v).map(|(_, x)| *x)
}

impl Expr {
    fn eval(&self, env: &Env, pos: Pos) -> Result<i64, DslError> {
        let overflow = || semantic(pos, "arithmetic overflow");
        Ok(match self {
            Expr::Int(v) => *v,
            Expr::Var(v) => lookup(env, v).ok_or_else(|| semantic(pos, format!("unbound variable `{v}`")))?,
            Expr::Neg(e) => e.eval(env, pos)?.checked_neg().ok_or_else(overflow)?,
            Expr::Add(a, b) => a.eval(env, pos)?.checked_add(b.eval(env, pos)?).ok_or_else(overflow)?,
            Expr::Sub(a, b) => a.eval(env, pos)?.checked_sub(b.eval(env, pos)?).ok_or_else(overflow)?,
            Expr::Mul(c, e) => e.eval(env, pos)?.checked_mul(*c).ok_or_else(overflow)?,
        })
    }

    fn vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Int(_) => {}
            Expr::Var(v) => {
                if !out.contains(&v.as_str()) {
                    out.push(v);
                }
            }
            Expr::Neg(e) | Expr::Mul(_, e) => e.vars(out),
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                a.vars(out);
                b.vars(out);
            }
        }
    }

    /// Name component: an unbound bare word stands for itself.
    fn component(&self, env: &Env, pos: Pos) -> Result<String, DslError> {
        match self {
            Expr::Var(v) if lookup(env, v).is_none() => Ok(v.clone()),
            e => Ok(e.eval(env, pos)?.to_string()),
        }
    }
}

impl Template {
    fn render(&self, env: &Env, pos: Pos) -> Result<String, DslError> {
        let comps = |a: &[Expr]| -> Result<String, DslError> {
            Ok(a.iter()
                .map(|e| e.component(env, pos))
                .collect::<Result<Vec<_>, _>>()?
                .join(","))
        };
        Ok(match self {
            Template::Atom { head, args: None } => match lookup(env, head) {
                Some(v) => v.to_string(),
                None => head.clone(),
            },
            Template::Atom {
                head,
                args: Some(a),
            } => format!("{head}({})", comps(a)?),
            Template::Tuple(a) => format!("({})", comps(a)?),
            Template::Quoted(s) => s.clone(),
        })
    }
}

const MAX_ASSIGNMENTS: u64 = 1 << 22;

/// Calls `visit` with `env` extended by every assignment of the fresh
/// variables of `cs` that satisfies all of `cs`.
fn enumerate(
    cs: &[Constraint],
    env: &mut Vec<(String, i64)>,
    pos: Pos,
    visit: &mut dyn FnMut(&Env) -> Result<(), DslError>,
) -> Result<(), DslError> {
    let mut all = Vec::new();
    for c in cs {
        for e in &c.exprs {
            e.vars(&mut all);
        }
    }
    let fresh: Vec<String> = all
        .into_iter()
        .filter(|v| lookup(env, v).is_none())
        .map(str::to_string)
        .collect();
    let mut budget = MAX_ASSIGNMENTS;
    enumerate_from(cs, &fresh, env, pos, &mut budget, visit)
}

fn enumerate_from(
    cs: &[Constraint],
    fresh: &[String],
    env: &mut Vec<(String, i64)>,
    pos: Pos,
    budget: &mut u64,
    visit: &mut dyn FnMut(&Env) -> Result<(), DslError>,
) -> Result<(), DslError> {
    let Some((v, rest)) = fresh.split_first() else {
        for c in cs {
            for ((a, b), op) in c.exprs.iter().zip(&c.exprs[1..]).zip(&c.ops) {
                if !op.holds(a.eval(env, pos)?, b.eval(env, pos)?) {
                    return Ok(());
                }
            }
        }
        return visit(env);
    };
    let (mut lo, mut hi) = (None::<i64>, None::<i64>);
    for c in cs {
        for ((a, b), op) in c.exprs.iter().zip(&c.exprs[1..]).zip(&c.ops) {
            let (op, other) = match (a, b) {
                (Expr::Var(x), other) if x == v => (*op, other),
                (other, Expr::Var(x)) if x == v => (op.flip(), other),
                _ => continue,
            };
            let Ok(k) = other.eval(env, pos) else { continue };
            let (l, h) = match op {
                CmpOp::Le => (None, Some(k)),
                CmpOp::Lt => (None, Some(k - 1)),
                CmpOp::Ge => (Some(k), None),
                CmpOp::Gt => (Some(k + 1), None),
                CmpOp::Eq => (Some(k), Some(k)),
                CmpOp::Ne => (None, None),
            };
            if let Some(l) = l {
                lo = Some(lo.map_or(l, |x| x.max(l)));
            }
            if let Some(h) = h {
                hi = Some(hi.map_or(h, |x| x.min(h)));
            }
        }
    }
    let (Some(lo), Some(hi)) = (lo, hi) else {
        return Err(semantic(
            pos,
            format!("variable `{v}` needs a lower and an upper bound in terms of earlier variables"),
        ));
    };
    let mut x = lo;
    while x <= hi {
        if *budget == 0 {
            return Err(semantic(pos, "index ranges are too large"));
        }
        *budget -= 1;
        env.push((v.clone(), x));
        let r = enumerate_from(cs, rest, env, pos, budget, visit);
        env.pop();
        r?;
        x += 1;
    }
    Ok(())
}

fn expand(items: &[ListItem], env: &Env, pos: Pos) -> Result<Vec<String>, DslError> {
    let mut out = Vec::new();
    for it in items {
        match it {
            ListItem::One(t) => out.push(t.render(env, pos)?),
            ListItem::Comprehension(t, cs) => {
                let mut scope = env.to_vec();
                enumerate(cs, &mut scope, pos, &mut |e| {
                    out.push(t.render(e, pos)?);
                    Ok(())
                })?;
            }
        }
    }
    Ok(out)
}

/// Runs `f` once per point of the statement's `for` domain.
fn for_each_instance(
    stmt: &Stmt,
    env: &Env,
    mut f: impl FnMut(&Env) -> Result<(), DslError>,
) -> Result<(), DslError> {
    if stmt.domain.is_empty() {
        return f(env);
    }
    let mut scope = env.to_vec();
    enumerate(&stmt.domain, &mut scope, stmt.at.0, &mut f)
}

fn level_number(n: usize, pos: Pos) -> Result<i64, DslError> {
    i64::try_from(n).map_err(|_| semantic(pos, "level out of range"))
}

impl Block {
    pub fn is_family(&self) -> bool {
        self.level_var.is_some()
    }

    fn flags(&self) -> Result<FamilyFlags, DslError> {
        let mut flags = FamilyFlags {
            dcpo: !self.is_family(),
        };
        for s in &self.stmts {
            if let StmtKind::Flags(fl) = &s.kind {
                for x in fl {
                    match x.as_str() {
                        "dcpo" => flags.dcpo = true,
                        other => return Err(semantic(s.at.0, format!("unknown flag `{other}`"))),
                    }
                }
            }
        }
        Ok(flags)
    }

    /// The block's d-poset and schema sets at level `n` (ignored for a
    /// `poset` block).
    pub fn level(&self, n: usize) -> Result<Level, DslError> {
        let mut env = Vec::new();
        if let Some(v) = &self.level_var {
            env.push((v.clone(), level_number(n, self.at.0)?));
        }
        let mut names: Vec<String> = Vec::new();
        let mut index = std::collections::HashMap::new();
        for s in &self.stmts {
            if let StmtKind::Elem(items) = &s.kind {
                for_each_instance(s, &env, |e| {
                    for name in expand(items, e, s.at.0)? {
                        if index.insert(name.clone(), names.len()).is_some() {
                            return Err(semantic(s.at.0, format!("element `{name}` declared twice")));
                        }
                        names.push(name);
                    }
                    Ok(())
                })?;
            }
        }
        let find = |name: &str, pos: Pos| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| semantic(pos, format!("unknown element `{name}`")))
        };
        let mut pairs = Vec::new();
        for s in &self.stmts {
            if let StmtKind::Le(items) = &s.kind {
                for_each_instance(s, &env, |e| {
                    let xs = expand(items, e, s.at.0)?;
                    for w in xs.windows(2) {
                        find(&w[0], s.at.0)?;
                        find(&w[1], s.at.0)?;
                        pairs.push((w[0].clone(), w[1].clone()));
                    }
                    Ok(())
                })?;
            }
        }
        let base = FinPoset::build(&names, &pairs, RelationMode::Covers)
            .map_err(|e| semantic(self.at.0, format!("in `{}`: {e}", self.name)))?;
        let mut decls = Vec::new();
        let mut decl_pos = Vec::new();
        for s in &self.stmts {
            if let StmtKind::Chain { items, limit, id } = &s.kind {
                for_each_instance(s, &env, |e| {
                    let chain = expand(items, e, s.at.0)?
                        .iter()
                        .map(|c| find(c, s.at.0))
                        .collect::<Result<Vec<_>, _>>()?;
                    let limit = find(&limit.render(e, s.at.0)?, s.at.0)?;
                    let id = match id {
                        Some(t) => t.render(e, s.at.0)?,
                        None => format!("chain{}", decls.len() + 1),
                    };
                    decls.push(LimitDecl { id, chain, limit });
                    decl_pos.push(s.at.0);
                    Ok(())
                })?;
            }
        }
        let pos_of = |id: &str| {
            decls
                .iter()
                .position(|d| d.id == id)
                .map_or(self.at.0, |i| decl_pos[i])
        };
        let dposet = DPoset::new(base, decls.clone()).map_err(|e| {
            let pos = match &e {
                DPosetError::IncoherentDeclaration { decl, .. } | DPosetError::DuplicateDeclaration(decl) => {
                    pos_of(decl)
                }
                _ => self.at.0,
            };
            semantic(pos, e.to_string())
        })?;
        let mut schema = Vec::new();
        for s in &self.stmts {
            if let StmtKind::Set {
                name,
                items,
                tails,
                at,
            } = &s.kind
            {
                for_each_instance(s, &env, |e| {
                    let p = dposet.base();
                    let mut members = p.empty();
                    for m in expand(items, e, s.at.0)? {
                        members.insert(find(&m, s.at.0)?);
                    }
                    let tails_inside = expand(tails, e, s.at.0)?;
                    for t in &tails_inside {
                        if dposet.decl_by_id(t).is_none() {
                            return Err(semantic(s.at.0, format!("unknown chain `{t}`")));
                        }
                    }
                    let appears_at = match at {
                        Some(x) => usize::try_from(x.eval(e, s.at.0)?.max(1)).unwrap_or(1),
                        None => 1,
                    };
                    let name = name.render(e, s.at.0)?;
                    if schema.iter().any(|x: &SchemaSet| x.name == name) {
                        return Err(semantic(s.at.0, format!("set `{name}` defined twice")));
                    }
                    schema.push(SchemaSet {
                        name,
                        members,
                        tails_inside,
                        appears_at,
                    });
                    Ok(())
                })?;
            }
        }
        Ok(Level {
            level: n,
            dposet,
            schema,
        })
    }

    /// Instantiates the block. A `poset` becomes a constant family and must
    /// validate on its own; a `family` is checked for coherence and
    /// embedding on its first levels.
    pub fn family(&self) -> Result<TruncationFamily, DslError> {
        let flags = self.flags()?;
        if !self.is_family() {
            let lvl = self.level(1)?;
            lvl.dposet
                .validate()
                .map_err(|e| semantic(self.at.0, format!("in `{}`: {e}", self.name)))?;
            return Ok(TruncationFamily::constant(self.name.clone(), lvl.dposet, lvl.schema).with_flags(flags));
        }
        for n in 1..=4 {
            self.level(n)?;
        }
        let block = Arc::new(self.clone());
        let builder = {
            let block = block.clone();
            move |n| block.level(n).map_err(|e| DPosetError::Instantiation(e.to_string()))
        };
        let fam = TruncationFamily::new(self.name.clone(), flags, builder);
        for n in 1..=3 {
            fam.validate_level(n)
                .and_then(|_| fam.check_embedding(n))
                .map_err(|e| semantic(self.at.0, e.to_string()))?;
        }
        Ok(fam)
    }

    /// The block as a corpus entry without golden verdicts. Semilattice
    /// flags are read off levels 3 and 4.
    pub fn entry(&self) -> Result<CorpusEntry, DslError> {
        let family = self.family()?;
        let mut meet = true;
        let mut join = true;
        for n in [3, 4] {
            let lvl = family.level(n).map_err(|e| semantic(self.at.0, e.to_string()))?;
            let f = lvl.dposet.base().classify_semilattice();
            meet &= f.meet;
            join &= f.join;
        }
        Ok(CorpusEntry {
            flags: EntryFlags {
                dcpo: family.flags().dcpo,
                meet_semilattice: meet,
                join_semilattice: join,
            },
            family,
            golden: Vec::new(),
            provenance: "text description",
        })
    }
}

impl SpaceDef {
    fn build(&self, doc: &DslDocument) -> Result<FiniteSpace, DslError> {
        let pos = self.at.0;
        let err = |e: crate::smyth::SmythError| semantic(pos, format!("space `{}`: {e}", self.name));
        match &self.body {
            SpaceBody::From(src) => {
                let b = doc
                    .block(Some(src))
                    .ok_or_else(|| semantic(pos, format!("unknown poset `{src}`")))?;
                let lvl = b.level(1)?;
                FiniteSpace::alexandrov(lvl.dposet.base()).map_err(err)
            }
            SpaceBody::Explicit { points, opens } => {
                let names = expand(points, &[], pos)?;
                for (i, n) in names.iter().enumerate() {
                    if names[..i].contains(n) {
                        return Err(semantic(pos, format!("point `{n}` declared twice")));
                    }
                }
                let mut sub: Vec<Subset> = Vec::new();
                for o in opens {
                    let mut s: Subset = 0;
                    for n in expand(o, &[], pos)? {
                        let i = names
                            .iter()
                            .position(|x| *x == n)
                            .ok_or_else(|| semantic(pos, format!("unknown point `{n}`")))?;
                        if i >= 64 {
                            return Err(semantic(pos, "spaces are limited to 64 points"));
                        }
                        s |= 1 << i;
                    }
                    sub.push(s);
                }
                FiniteSpace::generated(names, &sub).map_err(err)
            }
        }
    }
}

impl DslDocument {
    pub fn blocks(&self) -> impl Iterator<Item = &Block> {
        self.items.iter().filter_map(|i| match i {
            Item::Block(b) => Some(b),
            Item::Space(_) => None,
        })
    }

    /// The named poset/family block, or the first one.
    pub fn block(&self, name: Option<&str>) -> Option<&Block> {
        let mut it = self.blocks();
        match name {
            Some(n) => it.find(|b| b.name == n),
            None => it.next(),
        }
    }

    fn require_block(&self, name: Option<&str>) -> Result<&Block, DslError> {
        self.block(name).ok_or_else(|| {
            semantic(
                Pos { line: 1, col: 1 },
                match name {
                    Some(n) => format!("no poset or family named `{n}`"),
                    None => "document has no poset or family".into(),
                },
            )
        })
    }

    pub fn family(&self, name: Option<&str>) -> Result<TruncationFamily, DslError> {
        self.require_block(name)?.family()
    }

    pub fn level(&self, name: Option<&str>, n: usize) -> Result<Level, DslError> {
        self.require_block(name)?.level(n)
    }

    /// The named space, the first space, or the Alexandrov topology of the
    /// first block (at level 1).
    pub fn space(&self, name: Option<&str>) -> Result<FiniteSpace, DslError> {
        let spaces: Vec<&SpaceDef> = self
            .items
            .iter()
            .filter_map(|i| match i {
                Item::Space(s) => Some(s),
                Item::Block(_) => None,
            })
            .collect();
        if let Some(s) = spaces.iter().find(|s| name.is_none_or(|n| n == s.name)) {
            return s.build(self);
        }
        let b = self.require_block(name)?;
        let lvl = b.level(1)?;
        FiniteSpace::alexandrov(lvl.dposet.base()).map_err(|e| semantic(b.at.0, e.to_string()))
    }

    /// Instantiates every item, reporting the first error.
    pub fn check(&self) -> Result<(), DslError> {
        for item in &self.items {
            match item {
                Item::Block(b) => {
                    b.family()?;
                }
                Item::Space(s) => {
                    s.build(self)?;
                }
            }
        }
        Ok(())
    }
}

// -------------------------------------------------------------------- export

fn wrap_names(out: &mut String, kw: &str, names: &[String]) {
    for chunk in names.chunks(10) {
        out.push_str("  ");
        out.push_str(kw);
        for n in chunk {
            out.push(' ');
            out.push_str(&quote_name(n));
        }
        out.push_str(";\n");
    }
}

/// A `poset` block describing one level exactly: elements, covering pairs,
/// declarations and schema sets.
pub fn export_level(name: &str, level: &Level) -> String {
    let d = &level.dposet;
    let p = d.base();
    let mut out = format!("poset {} {{\n", quote_name(name));
    if p.is_empty() {
        out.push_str("  elem;\n");
    }
    wrap_names(&mut out, "elem", p.names());
    for (a, b) in p.cover_pairs() {
        out.push_str(&format!("  le {} {};\n", quote_name(p.name(a)), quote_name(p.name(b))));
    }
    for decl in d.decls() {
        out.push_str("  chain");
        for &c in &decl.chain {
            out.push(' ');
            out.push_str(&quote_name(p.name(c)));
        }
        out.push_str(&format!(" -> {} as {};\n", quote_name(p.name(decl.limit)), quote_name(&decl.id)));
    }
    for s in &level.schema {
        out.push_str(&format!("  set {} =", quote_name(&s.name)));
        for i in s.members.iter() {
            out.push(' ');
            out.push_str(&quote_name(p.name(i)));
        }
        if !s.tails_inside.is_empty() {
            out.push_str(" tails");
            for t in &s.tails_inside {
                out.push(' ');
                out.push_str(&quote_name(t));
            }
        }
        if s.appears_at > 1 {
            out.push_str(&format!(" at {}", s.appears_at));
        }
        out.push_str(";\n");
    }
    out.push_str("}\n");
    out
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Hasse diagram in DOT: covering pairs as solid edges pointing up, and one
/// dashed edge from the top of each declared chain to its limit.
pub fn export_dot(name: &str, d: &DPoset) -> String {
    let p = d.base();
    let mut out = format!("digraph \"{}\" {{\n  rankdir=BT;\n  node [shape=plaintext];\n", dot_escape(name));
    for (i, n) in p.names().iter().enumerate() {
        out.push_str(&format!("  n{i} [label=\"{}\"];\n", dot_escape(n)));
    }
    for (a, b) in p.cover_pairs() {
        out.push_str(&format!("  n{a} -> n{b};\n"));
    }
    for decl in d.decls() {
        out.push_str(&format!(
            "  n{} -> n{} [style=dashed, label=\"{}\"];\n",
            decl.top(),
            decl.limit,
            dot_escape(&decl.id)
        ));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{fig1_level, fig3_level};

    const FIG3: &str = "poset fig3 {
  elem 1 2 3 ω a;
  le 1 2 3 ω; le a ω;
  chain 1 2 3 -> ω as ℕ; set ℕ = 1 2 3 tails ℕ;
}";

    #[test]
    fn fig3_source_matches_builtin_level() {
        assert_eq!(FIG3.lines().count(), 5);
        let doc = parse(FIG3).unwrap();
        let lvl = doc.level(None, 1).unwrap();
        let want = fig3_level(3).unwrap();
        assert_eq!(lvl.dposet, want.dposet);
        assert_eq!(lvl.schema, want.schema);
        doc.family(None).unwrap();
    }

    #[test]
    fn unknown_element_is_positioned() {
        let err = parse("poset p {\n  elem a;\n  le a b;\n}").unwrap().family(None).unwrap_err();
        assert!(matches!(&err, DslError::Semantic { pos: Pos { line: 3, col: 3 }, msg } if msg.contains("`b`")));
    }

    #[test]
    fn empty_input_is_a_syntax_error() {
        assert!(matches!(parse(""), Err(DslError::Syntax { .. })));
        assert!(matches!(parse("  # nothing\n"), Err(DslError::Syntax { .. })));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse("poset p {\n  elem a\n}").unwrap_err();
        assert_eq!(err.pos(), Pos { line: 3, col: 1 });
        let err = parse("poset p { elem a; le a ) ; }").unwrap_err();
        assert!(matches!(err, DslError::Syntax { .. }), "{err}");
        let err = parse("family f level N { elem [x | 1<=x<=N*N]; }").unwrap_err();
        assert!(err.to_string().contains("multiplication"), "{err}");
    }

    #[test]
    fn cycles_and_incoherent_chains_are_semantic_errors() {
        let err = parse("poset p { elem a b; le a b a; }").unwrap().family(None).unwrap_err();
        assert!(matches!(err, DslError::Semantic { .. }));
        assert!(err.to_string().contains("cycle"), "{err}");
        let err = parse("poset p {\n elem a b c;\n le a b c;\n chain a -> c as x;\n}")
            .unwrap()
            .family(None)
            .unwrap_err();
        assert!(err.to_string().contains("incoherent"), "{err}");
    }

    #[test]
    fn unbounded_variable_is_reported() {
        let err = parse("family f level N { elem [x | x>=1]; }")
            .unwrap()
            .family(None)
            .unwrap_err();
        assert!(err.to_string().contains("`x`"), "{err}");
    }

    #[test]
    fn comprehension_order_and_equalities() {
        let doc = parse("family f level N { elem [(i,j) | 1<=i<=N, j=i+1] [k | 1<=k<=2*N, k!=2]; }").unwrap();
        let lvl = doc.level(None, 2).unwrap();
        assert_eq!(lvl.dposet.base().names(), ["(1,2)", "(2,3)", "1", "3", "4"]);
    }

    #[test]
    fn fig1_template_matches_builtin() {
        let src = "family fig1 level N {
  flags dcpo;
  elem [(m,k) | 1<=m<=N, 1<=k<=N] ⊤;
  le [(m,k) | 1<=k<=N] ⊤ for 1<=m<=N;
  chain [(m,k) | 1<=k<=N] -> ⊤ as col(m) for 1<=m<=N;
  set col(m) = [(m,k) | 1<=k<=N] tails col(m) at m for 1<=m<=N;
  set row(k) = [(m,k) | 1<=m<=N] at k for 1<=k<=N;
  set diag = [(m,m) | 1<=m<=N];
}";
        let doc = parse(src).unwrap();
        for n in 1..=6 {
            let a = doc.level(None, n).unwrap();
            let b = fig1_level(n).unwrap();
            assert_eq!(a.dposet, b.dposet, "level {n}");
            assert_eq!(a.schema, b.schema, "level {n}");
        }
    }

    #[test]
    fn print_then_parse_is_identity() {
        let doc = parse(FIG3).unwrap();
        let printed = doc.to_string();
        assert_eq!(parse(&printed).unwrap(), doc);
        let src = "family f level N { elem [x | 1<=x<=N, -(x-1)<=2*(x+1)] \"odd name\" g(N,1);\
                   le 1 \"odd name\" for N>=1; }\nspace s { points a b; open a; open; }\nspace t from f;";
        let doc = parse(src).unwrap();
        assert_eq!(parse(&doc.to_string()).unwrap(), doc);
    }

    #[test]
    fn names_are_quoted_only_when_needed() {
        for plain in ["a", "(1,2)", "col(3)", "(2,ω)", "t0.1", "ℓ3", "⊤", "17"] {
            assert_eq!(quote_name(plain), plain);
        }
        assert_eq!(quote_name("for"), "\"for\"");
        assert_eq!(quote_name("a b"), "\"a b\"");
        assert_eq!(quote_name("(01,2)"), "\"(01,2)\"");
        assert_eq!(quote_name(""), "\"\"");
    }

    #[test]
    fn exported_level_reads_back() {
        for n in 1..=4 {
            let lvl = fig1_level(n).unwrap();
            let text = export_level("fig1", &lvl);
            let back = parse(&text).unwrap().level(None, 1).unwrap();
            assert_eq!(back.dposet, lvl.dposet);
            assert_eq!(back.schema, lvl.schema);
        }
    }

    fn edge_counts(dot: &str) -> (usize, usize, usize) {
        let nodes = dot.lines().filter(|l| l.contains("[label=") && !l.contains("->")).count();
        let dashed = dot.lines().filter(|l| l.contains("->") && l.contains("dashed")).count();
        let solid = dot.lines().filter(|l| l.contains("->")).count() - dashed;
        (nodes, solid, dashed)
    }

    #[test]
    fn dot_for_small_examples() {
        let d = parse(FIG3).unwrap().level(None, 1).unwrap().dposet;
        assert_eq!(edge_counts(&export_dot("fig3", &d)), (5, 4, 1));
        let single = parse("poset one { elem x; }").unwrap().level(None, 1).unwrap().dposet;
        assert_eq!(edge_counts(&export_dot("one", &single)), (1, 0, 0));
        let f1 = fig1_level(3).unwrap().dposet;
        let dot = export_dot("fig1", &f1);
        assert_eq!(edge_counts(&dot), (10, 9, 3));
        let top = f1.base().index_of("⊤").unwrap();
        for m in 1..=3 {
            let t = f1.base().index_of(&format!("({m},3)")).unwrap();
            assert!(dot.contains(&format!("n{t} -> n{top} [style=dashed")));
        }
    }

    #[test]
    fn name_lists() {
        assert_eq!(parse_names("{}").unwrap(), Vec::<String>::new());
        assert_eq!(parse_names("{(1,1), (1,2)}").unwrap(), ["(1,1)", "(1,2)"]);
        assert_eq!(parse_names("a b [k | 1<=k<=2]").unwrap(), ["a", "b", "1", "2"]);
        assert!(parse_names("{a").is_err());
    }

    #[test]
    fn spaces_from_text() {
        let doc = parse("space s { points 0 1; open 1; }\nposet p { elem a b; le a b; }\nspace q from p;").unwrap();
        let s = doc.space(Some("s")).unwrap();
        assert_eq!(s.opens().len(), 3);
        let q = doc.space(Some("q")).unwrap();
        assert_eq!(q.opens().len(), 3);
        assert!(doc.space(Some("nope")).is_err());
    }
}
