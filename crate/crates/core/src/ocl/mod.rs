//! The supported OCL subset: typed AST, parser, printer and a direct
//! four-valued evaluator.

mod eval;
mod parser;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub use eval::{eval_ocl, OclValue};
pub use parser::parse_ocl;

pub use crate::msfol::CmpOp;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OclType {
    Boolean,
    Integer,
    String,
    Class(String),
    Set(Box<OclType>),
    /// Type of the `null` literal; conforms to every type.
    Void,
    /// Type of the `invalid` literal; conforms to every type.
    Invalid,
}

impl OclType {
    pub fn is_set(&self) -> bool {
        matches!(self, OclType::Set(_))
    }

    pub fn element(&self) -> Option<&OclType> {
        match self {
            OclType::Set(t) => Some(t),
            _ => None,
        }
    }

    /// Whether a value of type `self` may be used where `other` is expected.
    pub fn conforms_to(&self, other: &OclType) -> bool {
        match (self, other) {
            (OclType::Void | OclType::Invalid, _) => true,
            (OclType::Set(a), OclType::Set(b)) => a.conforms_to(b),
            (a, b) => a == b,
        }
    }

    /// The more specific of two mutually conforming types.
    pub fn join(&self, other: &OclType) -> Option<OclType> {
        if self.conforms_to(other) {
            Some(other.clone())
        } else if other.conforms_to(self) {
            Some(self.clone())
        } else {
            None
        }
    }
}

impl fmt::Display for OclType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OclType::Boolean => f.write_str("Boolean"),
            OclType::Integer => f.write_str("Integer"),
            OclType::String => f.write_str("String"),
            OclType::Class(c) => f.write_str(c),
            OclType::Set(t) => write!(f, "Set({t})"),
            OclType::Void => f.write_str("OclVoid"),
            OclType::Invalid => f.write_str("OclInvalid"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IterKind {
    ForAll,
    Exists,
    Select,
    Reject,
    Collect,
}

impl IterKind {
    pub fn name(self) -> &'static str {
        match self {
            IterKind::ForAll => "forAll",
            IterKind::Exists => "exists",
            IterKind::Select => "select",
            IterKind::Reject => "reject",
            IterKind::Collect => "collect",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CollOp {
    IsEmpty,
    NotEmpty,
    Including,
    Excluding,
    Union,
    Intersection,
}

impl CollOp {
    pub fn name(self) -> &'static str {
        match self {
            CollOp::IsEmpty => "isEmpty",
            CollOp::NotEmpty => "notEmpty",
            CollOp::Including => "including",
            CollOp::Excluding => "excluding",
            CollOp::Union => "union",
            CollOp::Intersection => "intersection",
        }
    }

    pub fn takes_argument(self) -> bool {
        !matches!(self, CollOp::IsEmpty | CollOp::NotEmpty)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    And,
    Or,
    Xor,
    Implies,
    Eq,
    Neq,
    Cmp(CmpOp),
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::And => "and",
            BinOp::Or => "or",
            BinOp::Xor => "xor",
            BinOp::Implies => "implies",
            BinOp::Eq => "=",
            BinOp::Neq => "<>",
            BinOp::Cmp(c) => c.smt(),
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Implies => 1,
            BinOp::Or | BinOp::Xor => 2,
            BinOp::And => 3,
            BinOp::Eq | BinOp::Neq => 4,
            BinOp::Cmp(_) => 5,
        }
    }
}

/// A type-checked OCL expression.
///
/// Navigation and attribute nodes carry the resolved class information, so
/// the AST can be evaluated and translated without the data model.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum OclExpr {
    Bool(bool),
    Int(i64),
    Str(String),
    Null,
    Invalid,
    Var(String, OclType),
    Attr {
        src: Box<OclExpr>,
        class: String,
        attr: String,
        ty: OclType,
    },
    Nav {
        src: Box<OclExpr>,
        end: String,
        assoc: String,
        /// The source object sits at the association's left end.
        towards_right: bool,
        target: String,
    },
    AllInstances(String),
    Iterate {
        kind: IterKind,
        src: Box<OclExpr>,
        var: String,
        var_ty: OclType,
        body: Box<OclExpr>,
    },
    Coll {
        op: CollOp,
        src: Box<OclExpr>,
        arg: Option<Box<OclExpr>>,
    },
    IsUndefined(Box<OclExpr>),
    Not(Box<OclExpr>),
    Bin(BinOp, Box<OclExpr>, Box<OclExpr>),
}

impl OclExpr {
    pub fn ty(&self) -> OclType {
        match self {
            OclExpr::Bool(_) => OclType::Boolean,
            OclExpr::Int(_) => OclType::Integer,
            OclExpr::Str(_) => OclType::String,
            OclExpr::Null => OclType::Void,
            OclExpr::Invalid => OclType::Invalid,
            OclExpr::Var(_, t) => t.clone(),
            OclExpr::Attr { ty, .. } => ty.clone(),
            OclExpr::Nav { target, .. } => OclType::Set(Box::new(OclType::Class(target.clone()))),
            OclExpr::AllInstances(c) => OclType::Set(Box::new(OclType::Class(c.clone()))),
            OclExpr::Iterate {
                kind, src, body, ..
            } => match kind {
                IterKind::ForAll | IterKind::Exists => OclType::Boolean,
                IterKind::Select | IterKind::Reject => src.ty(),
                IterKind::Collect => OclType::Set(Box::new(body.ty())),
            },
            OclExpr::Coll { op, src, arg } => match op {
                CollOp::IsEmpty | CollOp::NotEmpty => OclType::Boolean,
                CollOp::Including | CollOp::Excluding => src.ty(),
                CollOp::Union | CollOp::Intersection => {
                    let other = arg.as_ref().map(|a| a.ty()).unwrap_or(OclType::Void);
                    src.ty().join(&other).unwrap_or_else(|| src.ty())
                }
            },
            OclExpr::IsUndefined(_) | OclExpr::Not(_) | OclExpr::Bin(..) => OclType::Boolean,
        }
    }

    /// Free variables with their types.
    pub fn free_vars(&self) -> BTreeSet<(String, OclType)> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free<'a>(&'a self, bound: &mut Vec<&'a str>, out: &mut BTreeSet<(String, OclType)>) {
        match self {
            OclExpr::Var(v, t) => {
                if !bound.contains(&v.as_str()) {
                    out.insert((v.clone(), t.clone()));
                }
            }
            OclExpr::Iterate { src, var, body, .. } => {
                src.collect_free(bound, out);
                bound.push(var);
                body.collect_free(bound, out);
                bound.pop();
            }
            _ => self.children().for_each(|c| c.collect_free(bound, out)),
        }
    }

    /// Direct subexpressions, in source order.
    pub fn children(&self) -> impl Iterator<Item = &OclExpr> {
        let v: Vec<&OclExpr> = match self {
            OclExpr::Attr { src, .. } | OclExpr::Nav { src, .. } => vec![src],
            OclExpr::Iterate { src, body, .. } => vec![src, body],
            OclExpr::Coll { src, arg, .. } => {
                std::iter::once(&**src).chain(arg.as_deref()).collect()
            }
            OclExpr::IsUndefined(e) | OclExpr::Not(e) => vec![e],
            OclExpr::Bin(_, a, b) => vec![a, b],
            _ => vec![],
        };
        v.into_iter()
    }

    fn precedence(&self) -> u8 {
        match self {
            OclExpr::Bin(op, ..) => op.precedence(),
            OclExpr::Not(_) => 6,
            OclExpr::Int(i) if *i < 0 => 6,
            _ => 8,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, ctx: u8) -> fmt::Result {
        let paren = self.precedence() < ctx;
        if paren {
            f.write_str("(")?;
        }
        match self {
            OclExpr::Bool(b) => write!(f, "{b}")?,
            OclExpr::Int(i) => write!(f, "{i}")?,
            OclExpr::Str(s) => {
                f.write_str("'")?;
                for c in s.chars() {
                    match c {
                        '\'' => f.write_str("\\'")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        '\t' => f.write_str("\\t")?,
                        '\r' => f.write_str("\\r")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("'")?;
            }
            OclExpr::Null => f.write_str("null")?,
            OclExpr::Invalid => f.write_str("invalid")?,
            OclExpr::Var(v, _) => f.write_str(v)?,
            OclExpr::Attr { src, attr, .. } => {
                src.fmt_prec(f, 7)?;
                write!(f, ".{attr}")?;
            }
            OclExpr::Nav { src, end, .. } => {
                src.fmt_prec(f, 7)?;
                write!(f, ".{end}")?;
            }
            OclExpr::AllInstances(c) => write!(f, "{c}.allInstances()")?,
            OclExpr::Iterate {
                kind,
                src,
                var,
                body,
                ..
            } => {
                src.fmt_prec(f, 7)?;
                write!(f, "->{}({var} | ", kind.name())?;
                body.fmt_prec(f, 0)?;
                f.write_str(")")?;
            }
            OclExpr::Coll { op, src, arg } => {
                src.fmt_prec(f, 7)?;
                write!(f, "->{}(", op.name())?;
                if let Some(a) = arg {
                    a.fmt_prec(f, 0)?;
                }
                f.write_str(")")?;
            }
            OclExpr::IsUndefined(e) => {
                e.fmt_prec(f, 7)?;
                f.write_str(".oclIsUndefined()")?;
            }
            OclExpr::Not(e) => {
                f.write_str("not ")?;
                e.fmt_prec(f, 6)?;
            }
            OclExpr::Bin(op, a, b) => {
                let p = op.precedence();
                a.fmt_prec(f, p)?;
                write!(f, " {} ", op.symbol())?;
                b.fmt_prec(f, p + 1)?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for OclExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OclErrorKind {
    Syntax,
    Type,
    Unknown,
    Unsupported,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct OclError {
    pub kind: OclErrorKind,
    pub msg: String,
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for OclError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            OclErrorKind::Syntax => "syntax",
            OclErrorKind::Type => "type",
            OclErrorKind::Unknown => "name",
            OclErrorKind::Unsupported => "unsupported-construct",
        };
        write!(
            f,
            "OCL {kind} error at line {}, column {}: {}",
            self.line, self.col, self.msg
        )
    }
}
