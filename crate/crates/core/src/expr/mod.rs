//! Stateless predicate and compute expressions.
//!
//! Expressions are a closed set of node kinds. A node's value on row `i`
//! depends only on row `i`'s cells, which is what lets evaluation split rows
//! into independent chunks.

mod eval;
mod like;

pub use eval::{
    apply_filter, apply_filter_with, eval_compute, eval_compute_with, eval_mask, eval_mask_with,
};
pub use like::{like_match, LikePattern};

use crate::error::{Error, Result};
use crate::value::{parse_date, LogicalDtype};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CmpOp::Eq => ord == Equal,
            CmpOp::Ne => ord != Equal,
            CmpOp::Lt => ord == Less,
            CmpOp::Le => ord != Greater,
            CmpOp::Gt => ord == Greater,
            CmpOp::Ge => ord != Less,
        }
    }

    /// Float comparison with IEEE semantics (NaN compares false except `≠`).
    pub fn holds_f64(self, a: f64, b: f64) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Bool(bool),
    I64(i64),
    F64(f64),
    /// Days since 1970-01-01.
    Date(i64),
    Str(String),
}

impl Literal {
    pub fn ty(&self) -> ExprType {
        match self {
            Literal::Bool(_) => ExprType::Bool,
            Literal::I64(_) => ExprType::Int,
            Literal::F64(_) => ExprType::Float,
            Literal::Date(_) => ExprType::Date,
            Literal::Str(_) => ExprType::Str,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Column(String),
    Lit(Literal),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Not(Box<Expr>),
    Arith(ArithOp, Box<Expr>, Box<Expr>),
    /// `lo <= e <= hi`.
    Between(Box<Expr>, Box<Expr>, Box<Expr>),
    InSet(Box<Expr>, Vec<Literal>),
    /// SQL LIKE with `%` and `_`.
    Like(Box<Expr>, String),
    StartsWith(Box<Expr>, String),
    EndsWith(Box<Expr>, String),
    Contains(Box<Expr>, String),
    /// Calendar year of a date.
    Year(Box<Expr>),
}

/// Static result type of an expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExprType {
    Bool,
    Int,
    Float,
    Date,
    Str,
}

impl ExprType {
    pub fn of_column(dtype: LogicalDtype) -> Self {
        match dtype {
            LogicalDtype::Int64 => ExprType::Int,
            LogicalDtype::Float64 => ExprType::Float,
            LogicalDtype::Date => ExprType::Date,
            LogicalDtype::DictCode | LogicalDtype::RawString => ExprType::Str,
        }
    }

    pub fn is_numeric(self) -> bool {
        matches!(self, ExprType::Int | ExprType::Float | ExprType::Date)
    }

    /// Int and Date compare as integers; anything involving Float as f64.
    pub fn integral(self) -> bool {
        matches!(self, ExprType::Int | ExprType::Date)
    }
}

pub fn col(name: &str) -> Expr {
    Expr::Column(name.to_owned())
}

pub fn lit_bool(v: bool) -> Expr {
    Expr::Lit(Literal::Bool(v))
}

pub fn lit_i64(v: i64) -> Expr {
    Expr::Lit(Literal::I64(v))
}

pub fn lit_f64(v: f64) -> Expr {
    Expr::Lit(Literal::F64(v))
}

pub fn lit_str(v: &str) -> Expr {
    Expr::Lit(Literal::Str(v.to_owned()))
}

/// Date literal from `yyyy-mm-dd`.
pub fn lit_date(s: &str) -> Result<Expr> {
    Ok(Expr::Lit(Literal::Date(parse_date(s)?)))
}

pub fn and(children: Vec<Expr>) -> Expr {
    Expr::And(children)
}

pub fn or(children: Vec<Expr>) -> Expr {
    Expr::Or(children)
}

impl Expr {
    fn cmp(self, op: CmpOp, rhs: Expr) -> Expr {
        Expr::Cmp(op, Box::new(self), Box::new(rhs))
    }

    fn arith(self, op: ArithOp, rhs: Expr) -> Expr {
        Expr::Arith(op, Box::new(self), Box::new(rhs))
    }

    pub fn equals(self, rhs: Expr) -> Expr {
        self.cmp(CmpOp::Eq, rhs)
    }

    pub fn not_equals(self, rhs: Expr) -> Expr {
        self.cmp(CmpOp::Ne, rhs)
    }

    pub fn lt(self, rhs: Expr) -> Expr {
        self.cmp(CmpOp::Lt, rhs)
    }

    pub fn le(self, rhs: Expr) -> Expr {
        self.cmp(CmpOp::Le, rhs)
    }

    pub fn gt(self, rhs: Expr) -> Expr {
        self.cmp(CmpOp::Gt, rhs)
    }

    pub fn ge(self, rhs: Expr) -> Expr {
        self.cmp(CmpOp::Ge, rhs)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(self, rhs: Expr) -> Expr {
        self.arith(ArithOp::Add, rhs)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(self, rhs: Expr) -> Expr {
        self.arith(ArithOp::Sub, rhs)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, rhs: Expr) -> Expr {
        self.arith(ArithOp::Mul, rhs)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn div(self, rhs: Expr) -> Expr {
        self.arith(ArithOp::Div, rhs)
    }

    pub fn and(self, rhs: Expr) -> Expr {
        Expr::And(vec![self, rhs])
    }

    pub fn or(self, rhs: Expr) -> Expr {
        Expr::Or(vec![self, rhs])
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Expr {
        Expr::Not(Box::new(self))
    }

    pub fn between(self, lo: Expr, hi: Expr) -> Expr {
        Expr::Between(Box::new(self), Box::new(lo), Box::new(hi))
    }

    pub fn in_set(self, values: Vec<Literal>) -> Expr {
        Expr::InSet(Box::new(self), values)
    }

    pub fn like(self, pattern: &str) -> Expr {
        Expr::Like(Box::new(self), pattern.to_owned())
    }

    pub fn starts_with(self, prefix: &str) -> Expr {
        Expr::StartsWith(Box::new(self), prefix.to_owned())
    }

    pub fn ends_with(self, suffix: &str) -> Expr {
        Expr::EndsWith(Box::new(self), suffix.to_owned())
    }

    pub fn contains(self, needle: &str) -> Expr {
        Expr::Contains(Box::new(self), needle.to_owned())
    }

    pub fn year(self) -> Expr {
        Expr::Year(Box::new(self))
    }

    /// Type-checks against a schema lookup.
    pub fn infer_type<F>(&self, schema: &F) -> Result<ExprType>
    where
        F: Fn(&str) -> Result<LogicalDtype>,
    {
        let comparable = |a: ExprType, b: ExprType, what: &str| -> Result<()> {
            if (a.is_numeric() && b.is_numeric()) || (a == ExprType::Str && b == ExprType::Str) {
                Ok(())
            } else {
                Err(Error::Expr(format!("cannot {what} {a:?} with {b:?}")))
            }
        };
        let string_arg = |e: &Expr| -> Result<ExprType> {
            match e.infer_type(schema)? {
                ExprType::Str => Ok(ExprType::Bool),
                t => Err(Error::Expr(format!("string predicate applied to {t:?}"))),
            }
        };
        match self {
            Expr::Column(name) => Ok(ExprType::of_column(schema(name)?)),
            Expr::Lit(l) => Ok(l.ty()),
            Expr::Cmp(_, a, b) => {
                comparable(a.infer_type(schema)?, b.infer_type(schema)?, "compare")?;
                Ok(ExprType::Bool)
            }
            Expr::And(cs) | Expr::Or(cs) => {
                for c in cs {
                    if c.infer_type(schema)? != ExprType::Bool {
                        return Err(Error::Expr("logical operand is not boolean".into()));
                    }
                }
                Ok(ExprType::Bool)
            }
            Expr::Not(c) => match c.infer_type(schema)? {
                ExprType::Bool => Ok(ExprType::Bool),
                t => Err(Error::Expr(format!("cannot negate {t:?}"))),
            },
            Expr::Arith(op, a, b) => arith_type(*op, a.infer_type(schema)?, b.infer_type(schema)?),
            Expr::Between(e, lo, hi) => {
                let t = e.infer_type(schema)?;
                comparable(t, lo.infer_type(schema)?, "compare")?;
                comparable(t, hi.infer_type(schema)?, "compare")?;
                Ok(ExprType::Bool)
            }
            Expr::InSet(e, values) => {
                let t = e.infer_type(schema)?;
                for v in values {
                    comparable(t, v.ty(), "compare")?;
                }
                Ok(ExprType::Bool)
            }
            Expr::Like(e, _)
            | Expr::StartsWith(e, _)
            | Expr::EndsWith(e, _)
            | Expr::Contains(e, _) => string_arg(e),
            Expr::Year(e) => match e.infer_type(schema)? {
                ExprType::Date => Ok(ExprType::Int),
                t => Err(Error::Expr(format!("year of {t:?}"))),
            },
        }
    }
}

/// Result type of arithmetic. `÷` and any Float operand give Float; Date
/// plus or minus Int stays a Date; Date minus Date is a day count.
pub fn arith_type(op: ArithOp, a: ExprType, b: ExprType) -> Result<ExprType> {
    use ExprType::*;
    if !a.is_numeric() || !b.is_numeric() {
        return Err(Error::Expr(format!("arithmetic on {a:?} and {b:?}")));
    }
    Ok(match (op, a, b) {
        (ArithOp::Add, Date, Int) | (ArithOp::Add, Int, Date) | (ArithOp::Sub, Date, Int) => Date,
        (ArithOp::Sub, Date, Date) => Int,
        (_, Date, _) | (_, _, Date) => {
            return Err(Error::Expr(format!("{op:?} is not defined on dates")));
        }
        (ArithOp::Div, _, _) | (_, Float, _) | (_, _, Float) => Float,
        _ => Int,
    })
}
