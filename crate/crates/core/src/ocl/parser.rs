//! Lexer, parser and type checker for OCL constraints.

use crate::datamodel::{AttrType, DataModel, VarDecl, VarType};
use crate::msfol::CmpOp;

use super::{BinOp, CollOp, IterKind, OclError, OclErrorKind, OclExpr, OclType};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i128),
    Str(String),
    Dot,
    Arrow,
    LParen,
    RParen,
    Bar,
    Colon,
    Comma,
    Minus,
    Op(&'static str),
    Eof,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

fn error(src: &str, offset: usize, kind: OclErrorKind, msg: impl Into<String>) -> OclError {
    let (line, col) = line_col(src, offset);
    OclError {
        kind,
        msg: msg.into(),
        line,
        col,
    }
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>, OclError> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let (t, p) = lx.next()?;
            let end = t == Tok::Eof;
            out.push((t, p));
            if end {
                return Ok(out);
            }
        }
    }

    fn next(&mut self) -> Result<(Tok, usize), OclError> {
        let rest = &self.src[self.pos..];
        let trimmed = rest.trim_start();
        self.pos += rest.len() - trimmed.len();
        // `--` starts a line comment.
        if trimmed.starts_with("--") {
            let len = trimmed.find('\n').unwrap_or(trimmed.len());
            self.pos += len;
            return self.next();
        }
        let start = self.pos;
        let Some(c) = trimmed.chars().next() else {
            return Ok((Tok::Eof, start));
        };
        let two: String = trimmed.chars().take(2).collect();
        let (tok, len) = match c {
            '-' if two == "->" => (Tok::Arrow, 2),
            '→' => (Tok::Arrow, c.len_utf8()),
            '.' => (Tok::Dot, 1),
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '|' => (Tok::Bar, 1),
            ':' => (Tok::Colon, 1),
            ',' => (Tok::Comma, 1),
            '-' => (Tok::Minus, 1),
            '=' => (Tok::Op("="), 1),
            '<' if two == "<>" => (Tok::Op("<>"), 2),
            '<' if two == "<=" => (Tok::Op("<="), 2),
            '<' => (Tok::Op("<"), 1),
            '>' if two == ">=" => (Tok::Op(">="), 2),
            '>' => (Tok::Op(">"), 1),
            '≥' => (Tok::Op(">="), c.len_utf8()),
            '≤' => (Tok::Op("<="), c.len_utf8()),
            '≠' => (Tok::Op("<>"), c.len_utf8()),
            '\'' => return self.string(start),
            c if c.is_ascii_digit() => {
                let len = trimmed
                    .find(|c: char| !c.is_ascii_digit())
                    .unwrap_or(trimmed.len());
                let n = trimmed[..len].parse::<i128>().map_err(|_| {
                    error(
                        self.src,
                        start,
                        OclErrorKind::Syntax,
                        "integer literal too large",
                    )
                })?;
                (Tok::Int(n), len)
            }
            c if c.is_alphabetic() || c == '_' => {
                let len = trimmed
                    .find(|c: char| !(c.is_alphanumeric() || c == '_'))
                    .unwrap_or(trimmed.len());
                (Tok::Ident(trimmed[..len].to_string()), len)
            }
            c => {
                return Err(error(
                    self.src,
                    start,
                    OclErrorKind::Syntax,
                    format!("unexpected character `{c}`"),
                ))
            }
        };
        self.pos += len;
        Ok((tok, start))
    }

    fn string(&mut self, start: usize) -> Result<(Tok, usize), OclError> {
        let mut out = String::new();
        let mut chars = self.src[start + 1..].char_indices();
        while let Some((i, c)) = chars.next() {
            match c {
                '\'' => {
                    self.pos = start + 1 + i + 1;
                    return Ok((Tok::Str(out), start));
                }
                '\\' => {
                    let esc = chars.next().map(|(_, c)| c);
                    out.push(match esc {
                        Some('n') => '\n',
                        Some('t') => '\t',
                        Some('r') => '\r',
                        Some(c @ ('\'' | '\\' | '"')) => c,
                        _ => {
                            return Err(error(
                                self.src,
                                start + 1 + i,
                                OclErrorKind::Syntax,
                                "bad escape sequence",
                            ))
                        }
                    });
                }
                c => out.push(c),
            }
        }
        Err(error(
            self.src,
            start,
            OclErrorKind::Syntax,
            "unterminated string literal",
        ))
    }
}

const KEYWORDS: &[&str] = &[
    "and", "or", "xor", "not", "implies", "true", "false", "null", "invalid", "if", "then", "else",
    "endif", "let", "in",
];

/// Untyped syntax tree, resolved by [`Checker`].
#[derive(Debug)]
enum Raw {
    Bool(bool),
    Int(i128),
    Str(String),
    Null,
    Invalid,
    Ident(String),
    /// `src.name` or `src.name()`.
    Dot(Box<Node>, String, bool),
    Iter(
        Box<Node>,
        IterKind,
        String,
        Option<(String, usize)>,
        Box<Node>,
    ),
    Arrow(Box<Node>, String, Vec<Node>),
    Not(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
}

#[derive(Debug)]
struct Node {
    raw: Raw,
    pos: usize,
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
    i: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn pos(&self) -> usize {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn err(&self, msg: impl Into<String>) -> OclError {
        error(self.src, self.pos(), OclErrorKind::Syntax, msg)
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), OclError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(self.err(format!("expected {what}, found {}", describe(self.peek()))))
        }
    }

    fn keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn ident(&mut self) -> Result<String, OclError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            t => Err(self.err(format!("expected an identifier, found {}", describe(&t)))),
        }
    }

    fn binary(&mut self, level: u8) -> Result<Node, OclError> {
        if level == 6 {
            return self.unary();
        }
        let mut lhs = self.binary(level + 1)?;
        loop {
            let pos = self.pos();
            let op = match (level, self.peek()) {
                (1, Tok::Ident(s)) if s == "implies" => BinOp::Implies,
                (2, Tok::Ident(s)) if s == "or" => BinOp::Or,
                (2, Tok::Ident(s)) if s == "xor" => BinOp::Xor,
                (3, Tok::Ident(s)) if s == "and" => BinOp::And,
                (4, Tok::Op("=")) => BinOp::Eq,
                (4, Tok::Op("<>")) => BinOp::Neq,
                (5, Tok::Op("<")) => BinOp::Cmp(CmpOp::Lt),
                (5, Tok::Op("<=")) => BinOp::Cmp(CmpOp::Le),
                (5, Tok::Op(">")) => BinOp::Cmp(CmpOp::Gt),
                (5, Tok::Op(">=")) => BinOp::Cmp(CmpOp::Ge),
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.binary(level + 1)?;
            lhs = Node {
                raw: Raw::Bin(op, Box::new(lhs), Box::new(rhs)),
                pos,
            };
        }
    }

    fn unary(&mut self) -> Result<Node, OclError> {
        let pos = self.pos();
        if self.keyword("not") {
            self.bump();
            let e = self.unary()?;
            return Ok(Node {
                raw: Raw::Not(Box::new(e)),
                pos,
            });
        }
        if *self.peek() == Tok::Minus {
            self.bump();
            return match self.bump() {
                Tok::Int(n) => self.postfix(Node {
                    raw: Raw::Int(-n),
                    pos,
                }),
                _ => Err(error(
                    self.src,
                    pos,
                    OclErrorKind::Unsupported,
                    "unary minus is only supported on integer literals",
                )),
            };
        }
        let p = self.primary()?;
        self.postfix(p)
    }

    fn primary(&mut self) -> Result<Node, OclError> {
        let pos = self.pos();
        let raw = match self.bump() {
            Tok::Int(n) => Raw::Int(n),
            Tok::Str(s) => Raw::Str(s),
            Tok::LParen => {
                let e = self.binary(1)?;
                self.expect(Tok::RParen, "`)`")?;
                return Ok(e);
            }
            Tok::Ident(s) => match s.as_str() {
                "true" => Raw::Bool(true),
                "false" => Raw::Bool(false),
                "null" => Raw::Null,
                "invalid" => Raw::Invalid,
                "if" | "let" => {
                    return Err(error(
                        self.src,
                        pos,
                        OclErrorKind::Unsupported,
                        format!("`{s}` expressions are not supported"),
                    ))
                }
                k if KEYWORDS.contains(&k) => {
                    return Err(error(
                        self.src,
                        pos,
                        OclErrorKind::Syntax,
                        format!("unexpected keyword `{k}`"),
                    ))
                }
                _ => Raw::Ident(s),
            },
            t => {
                return Err(error(
                    self.src,
                    pos,
                    OclErrorKind::Syntax,
                    format!("expected an expression, found {}", describe(&t)),
                ))
            }
        };
        Ok(Node { raw, pos })
    }

    fn postfix(&mut self, mut e: Node) -> Result<Node, OclError> {
        loop {
            match self.peek() {
                Tok::Dot => {
                    self.bump();
                    let pos = self.pos();
                    let name = self.ident()?;
                    let call = *self.peek() == Tok::LParen;
                    if call {
                        self.bump();
                        self.expect(Tok::RParen, "`)`")?;
                    }
                    e = Node {
                        raw: Raw::Dot(Box::new(e), name, call),
                        pos,
                    };
                }
                Tok::Arrow => {
                    self.bump();
                    let pos = self.pos();
                    let name = self.ident()?;
                    self.expect(Tok::LParen, "`(`")?;
                    let kind = match name.as_str() {
                        "forAll" => Some(IterKind::ForAll),
                        "exists" => Some(IterKind::Exists),
                        "select" => Some(IterKind::Select),
                        "reject" => Some(IterKind::Reject),
                        "collect" => Some(IterKind::Collect),
                        _ => None,
                    };
                    e = if let Some(kind) = kind {
                        let var = self.ident()?;
                        let ann = if *self.peek() == Tok::Colon {
                            self.bump();
                            let p = self.pos();
                            Some((self.ident()?, p))
                        } else {
                            None
                        };
                        self.expect(Tok::Bar, "`|` after the iterator variable")?;
                        let body = self.binary(1)?;
                        self.expect(Tok::RParen, "`)`")?;
                        Node {
                            raw: Raw::Iter(Box::new(e), kind, var, ann, Box::new(body)),
                            pos,
                        }
                    } else {
                        let mut args = Vec::new();
                        if *self.peek() != Tok::RParen {
                            args.push(self.binary(1)?);
                            while *self.peek() == Tok::Comma {
                                self.bump();
                                args.push(self.binary(1)?);
                            }
                        }
                        self.expect(Tok::RParen, "`)`")?;
                        Node {
                            raw: Raw::Arrow(Box::new(e), name, args),
                            pos,
                        }
                    };
                }
                _ => return Ok(e),
            }
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Int(n) => format!("`{n}`"),
        Tok::Str(_) => "a string literal".into(),
        Tok::Dot => "`.`".into(),
        Tok::Arrow => "`->`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Bar => "`|`".into(),
        Tok::Colon => "`:`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Op(o) => format!("`{o}`"),
        Tok::Eof => "end of input".into(),
    }
}

struct Checker<'a> {
    src: &'a str,
    dm: &'a DataModel,
    env: Vec<(String, OclType)>,
}

impl Checker<'_> {
    fn err(&self, pos: usize, kind: OclErrorKind, msg: impl Into<String>) -> OclError {
        error(self.src, pos, kind, msg)
    }

    fn lookup(&self, name: &str) -> Option<&OclType> {
        self.env
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
    }

    fn type_of_name(&self, name: &str, pos: usize) -> Result<OclType, OclError> {
        match name {
            "Integer" => Ok(OclType::Integer),
            "String" => Ok(OclType::String),
            "Boolean" => Ok(OclType::Boolean),
            c if self.dm.has_class(c) => Ok(OclType::Class(c.to_string())),
            c => Err(self.err(pos, OclErrorKind::Unknown, format!("unknown type `{c}`"))),
        }
    }

    fn boolean(&self, n: &Node) -> Result<OclExpr, OclError> {
        let e = self.check(n)?;
        if !e.ty().conforms_to(&OclType::Boolean) {
            return Err(self.err(
                n.pos,
                OclErrorKind::Type,
                format!("expected a Boolean expression, `{e}` has type {}", e.ty()),
            ));
        }
        Ok(e)
    }

    fn set(&self, n: &Node, what: &str) -> Result<OclExpr, OclError> {
        let e = self.check(n)?;
        if !e.ty().is_set() {
            return Err(self.err(
                n.pos,
                OclErrorKind::Type,
                format!(
                    "`{what}` needs a collection source, `{e}` has type {}",
                    e.ty()
                ),
            ));
        }
        Ok(e)
    }

    fn check(&self, n: &Node) -> Result<OclExpr, OclError> {
        Ok(match &n.raw {
            Raw::Bool(b) => OclExpr::Bool(*b),
            Raw::Int(i) => OclExpr::Int(i64::try_from(*i).map_err(|_| {
                self.err(n.pos, OclErrorKind::Syntax, "integer literal out of range")
            })?),
            Raw::Str(s) => OclExpr::Str(s.clone()),
            Raw::Null => OclExpr::Null,
            Raw::Invalid => OclExpr::Invalid,
            Raw::Ident(v) => match self.lookup(v) {
                Some(t) => OclExpr::Var(v.clone(), t.clone()),
                None if self.dm.has_class(v) => {
                    return Err(self.err(
                        n.pos,
                        OclErrorKind::Type,
                        format!("class `{v}` used as a value; did you mean `{v}.allInstances()`?"),
                    ))
                }
                None => {
                    return Err(self.err(
                        n.pos,
                        OclErrorKind::Unknown,
                        format!("undeclared variable `{v}`"),
                    ))
                }
            },
            Raw::Dot(src, name, call) => return self.dot(n, src, name, *call),
            Raw::Iter(src, kind, var, ann, body) => {
                let src_e = self.set(src, kind.name())?;
                let elem = src_e.ty().element().cloned().unwrap();
                if let Some((t, p)) = ann {
                    let declared = self.type_of_name(t, *p)?;
                    if declared != elem {
                        return Err(self.err(
                            *p,
                            OclErrorKind::Type,
                            format!("iterator `{var}` declared {declared} but ranges over {elem}"),
                        ));
                    }
                }
                if self.lookup(var).is_some() {
                    return Err(self.err(
                        n.pos,
                        OclErrorKind::Type,
                        format!("iterator variable `{var}` shadows an existing variable"),
                    ));
                }
                let mut inner = Checker {
                    src: self.src,
                    dm: self.dm,
                    env: self.env.clone(),
                };
                inner.env.push((var.clone(), elem.clone()));
                let body_e = match kind {
                    IterKind::Collect => {
                        let b = inner.check(body)?;
                        match b.ty() {
                            OclType::Integer | OclType::String | OclType::Class(_) => b,
                            t => {
                                return Err(self.err(
                                    body.pos,
                                    OclErrorKind::Unsupported,
                                    format!("collect bodies of type {t} are not supported"),
                                ))
                            }
                        }
                    }
                    _ => inner.boolean(body)?,
                };
                OclExpr::Iterate {
                    kind: *kind,
                    src: Box::new(src_e),
                    var: var.clone(),
                    var_ty: elem,
                    body: Box::new(body_e),
                }
            }
            Raw::Arrow(src, name, args) => {
                let op = match name.as_str() {
                    "isEmpty" => CollOp::IsEmpty,
                    "notEmpty" => CollOp::NotEmpty,
                    "including" => CollOp::Including,
                    "excluding" => CollOp::Excluding,
                    "union" => CollOp::Union,
                    "intersection" => CollOp::Intersection,
                    other => {
                        return Err(self.err(
                            n.pos,
                            OclErrorKind::Unsupported,
                            format!("collection operation `{other}` is not supported"),
                        ))
                    }
                };
                let src_e = self.set(src, name)?;
                let want = usize::from(op.takes_argument());
                if args.len() != want {
                    return Err(self.err(
                        n.pos,
                        OclErrorKind::Type,
                        format!("`{name}` takes {want} argument(s), got {}", args.len()),
                    ));
                }
                let arg = match args.first() {
                    None => None,
                    Some(a) => {
                        let ae = self.check(a)?;
                        let src_ty = src_e.ty();
                        let ok = match op {
                            CollOp::Including | CollOp::Excluding => {
                                ae.ty().conforms_to(src_ty.element().unwrap())
                                    && !matches!(ae.ty(), OclType::Set(_))
                            }
                            _ => ae.ty().is_set() && src_ty.join(&ae.ty()).is_some(),
                        };
                        if !ok {
                            return Err(self.err(
                                a.pos,
                                OclErrorKind::Type,
                                format!(
                                    "`{name}` on {src_ty} cannot take `{ae}` of type {}",
                                    ae.ty()
                                ),
                            ));
                        }
                        Some(Box::new(ae))
                    }
                };
                OclExpr::Coll {
                    op,
                    src: Box::new(src_e),
                    arg,
                }
            }
            Raw::Not(e) => OclExpr::Not(Box::new(self.boolean(e)?)),
            Raw::Bin(op, a, b) => {
                let (ae, be) = match op {
                    BinOp::And | BinOp::Or | BinOp::Xor | BinOp::Implies => {
                        (self.boolean(a)?, self.boolean(b)?)
                    }
                    BinOp::Eq | BinOp::Neq => {
                        let (ae, be) = (self.check(a)?, self.check(b)?);
                        if ae.ty().join(&be.ty()).is_none() {
                            return Err(self.err(
                                n.pos,
                                OclErrorKind::Type,
                                format!("cannot compare {} with {}", ae.ty(), be.ty()),
                            ));
                        }
                        (ae, be)
                    }
                    BinOp::Cmp(_) => {
                        let (ae, be) = (self.check(a)?, self.check(b)?);
                        for (e, node) in [(&ae, a), (&be, b)] {
                            if !e.ty().conforms_to(&OclType::Integer) {
                                return Err(self.err(
                                    node.pos,
                                    OclErrorKind::Type,
                                    format!("`{e}` has type {}, expected Integer", e.ty()),
                                ));
                            }
                        }
                        (ae, be)
                    }
                };
                OclExpr::Bin(*op, Box::new(ae), Box::new(be))
            }
        })
    }

    fn dot(&self, n: &Node, src: &Node, name: &str, call: bool) -> Result<OclExpr, OclError> {
        if call {
            return match name {
                "allInstances" => match &src.raw {
                    Raw::Ident(c) if self.dm.has_class(c) => Ok(OclExpr::AllInstances(c.clone())),
                    Raw::Ident(c) => Err(self.err(
                        src.pos,
                        OclErrorKind::Unknown,
                        format!("unknown class `{c}`"),
                    )),
                    _ => Err(self.err(
                        n.pos,
                        OclErrorKind::Syntax,
                        "`allInstances()` must follow a class name",
                    )),
                },
                "oclIsUndefined" => Ok(OclExpr::IsUndefined(Box::new(self.check(src)?))),
                other => Err(self.err(
                    n.pos,
                    OclErrorKind::Unsupported,
                    format!("operation `{other}()` is not supported"),
                )),
            };
        }
        let s = self.check(src)?;
        let class = match s.ty() {
            OclType::Class(c) => c,
            t => {
                return Err(self.err(
                    n.pos,
                    OclErrorKind::Type,
                    format!("`.{name}` needs an object, `{s}` has type {t}"),
                ))
            }
        };
        if let Some(a) = self.dm.attribute(&class, name) {
            let ty = match &a.ty {
                AttrType::Integer => OclType::Integer,
                AttrType::String => OclType::String,
                AttrType::Class(c) => OclType::Class(c.clone()),
            };
            return Ok(OclExpr::Attr {
                src: Box::new(s),
                class,
                attr: name.to_string(),
                ty,
            });
        }
        if let Some(nav) = self.dm.navigate(&class, name) {
            return Ok(OclExpr::Nav {
                src: Box::new(s),
                end: name.to_string(),
                assoc: nav.assoc.name.clone(),
                towards_right: nav.towards_right,
                target: nav.target.to_string(),
            });
        }
        Err(self.err(
            n.pos,
            OclErrorKind::Unknown,
            format!("class `{class}` has no attribute or association end `{name}`"),
        ))
    }
}

pub(crate) fn var_type(t: &VarType) -> OclType {
    match t {
        VarType::Integer => OclType::Integer,
        VarType::String => OclType::String,
        VarType::Boolean => OclType::Boolean,
        VarType::Class(c) => OclType::Class(c.clone()),
    }
}

/// Parses and type-checks `text` against `dm`, with `vars` in scope.
pub fn parse_ocl(text: &str, dm: &DataModel, vars: &[VarDecl]) -> Result<OclExpr, OclError> {
    let toks = Lexer::tokens(text)?;
    let mut p = Parser {
        src: text,
        toks,
        i: 0,
    };
    let node = p.binary(1)?;
    if *p.peek() != Tok::Eof {
        return Err(p.err(format!("unexpected {}", describe(p.peek()))));
    }
    let checker = Checker {
        src: text,
        dm,
        env: vars
            .iter()
            .map(|v| (v.name.clone(), var_type(&v.ty)))
            .collect(),
    };
    checker.check(&node)
}
