use super::{PlainTable, PlainType};
use crate::error::{Error, Result};
use crate::expr::{ArithOp, CmpOp, Expr, ExprType, Literal};
use crate::value::{year_of, Value};

/// Row value during interpretation; dates travel as day counts.
#[derive(Debug, Clone)]
enum V {
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
}

impl V {
    fn f64(&self) -> f64 {
        match self {
            V::Int(x) => *x as f64,
            V::Float(x) => *x,
            other => panic!("not numeric: {other:?}"),
        }
    }
}

/// Quadratic LIKE matcher over bytes.
pub fn naive_like(s: &str, pattern: &str) -> bool {
    let (s, p) = (s.as_bytes(), pattern.as_bytes());
    // ok[i][j]: s[..i] matches p[..j]
    let mut ok = vec![vec![false; p.len() + 1]; s.len() + 1];
    ok[0][0] = true;
    for i in 0..=s.len() {
        for j in 1..=p.len() {
            ok[i][j] = match p[j - 1] {
                b'%' => ok[i][j - 1] || (i > 0 && ok[i - 1][j]),
                b'_' => i > 0 && ok[i - 1][j - 1],
                c => i > 0 && ok[i - 1][j - 1] && s[i - 1] == c,
            };
        }
    }
    ok[s.len()][p.len()]
}

fn type_of(t: &PlainTable, e: &Expr) -> Result<ExprType> {
    e.infer_type(&|name: &str| Ok(t.types[t.position(name)?].dtype()))
}

fn compare(op: CmpOp, a: &V, b: &V) -> bool {
    use std::cmp::Ordering;
    let ord = match (a, b) {
        (V::Int(x), V::Int(y)) => x.cmp(y),
        (V::Str(x), V::Str(y)) => x.as_bytes().cmp(y.as_bytes()),
        _ => {
            let (x, y) = (a.f64(), b.f64());
            return match op {
                CmpOp::Eq => x == y,
                CmpOp::Ne => x != y,
                CmpOp::Lt => x < y,
                CmpOp::Le => x <= y,
                CmpOp::Gt => x > y,
                CmpOp::Ge => x >= y,
            };
        }
    };
    match op {
        CmpOp::Eq => ord == Ordering::Equal,
        CmpOp::Ne => ord != Ordering::Equal,
        CmpOp::Lt => ord == Ordering::Less,
        CmpOp::Le => ord != Ordering::Greater,
        CmpOp::Gt => ord == Ordering::Greater,
        CmpOp::Ge => ord != Ordering::Less,
    }
}

fn eval(t: &PlainTable, row: &[Value], e: &Expr) -> V {
    let text = |x: &Expr| match eval(t, row, x) {
        V::Str(s) => s,
        other => panic!("not a string: {other:?}"),
    };
    let truth = |x: &Expr| match eval(t, row, x) {
        V::Bool(b) => b,
        other => panic!("not a boolean: {other:?}"),
    };
    match e {
        Expr::Column(name) => match &row[t.position(name).expect("type-checked")] {
            Value::Int(x) | Value::Date(x) => V::Int(*x),
            Value::Float(x) => V::Float(*x),
            Value::Str(s) => V::Str(s.clone()),
        },
        Expr::Lit(l) => match l {
            Literal::Bool(b) => V::Bool(*b),
            Literal::I64(x) | Literal::Date(x) => V::Int(*x),
            Literal::F64(x) => V::Float(*x),
            Literal::Str(s) => V::Str(s.clone()),
        },
        Expr::Cmp(op, a, b) => V::Bool(compare(*op, &eval(t, row, a), &eval(t, row, b))),
        Expr::And(cs) => V::Bool(cs.iter().all(truth)),
        Expr::Or(cs) => V::Bool(cs.iter().any(truth)),
        Expr::Not(c) => V::Bool(!truth(c)),
        Expr::Arith(op, a, b) => {
            let (x, y) = (eval(t, row, a), eval(t, row, b));
            match (op, &x, &y) {
                (ArithOp::Add, V::Int(p), V::Int(q)) => V::Int(p.wrapping_add(*q)),
                (ArithOp::Sub, V::Int(p), V::Int(q)) => V::Int(p.wrapping_sub(*q)),
                (ArithOp::Mul, V::Int(p), V::Int(q)) => V::Int(p.wrapping_mul(*q)),
                _ => {
                    let (p, q) = (x.f64(), y.f64());
                    V::Float(match op {
                        ArithOp::Add => p + q,
                        ArithOp::Sub => p - q,
                        ArithOp::Mul => p * q,
                        ArithOp::Div => p / q,
                    })
                }
            }
        }
        Expr::Between(x, lo, hi) => {
            let v = eval(t, row, x);
            V::Bool(
                compare(CmpOp::Ge, &v, &eval(t, row, lo))
                    && compare(CmpOp::Le, &v, &eval(t, row, hi)),
            )
        }
        Expr::InSet(x, values) => {
            let v = eval(t, row, x);
            V::Bool(
                values
                    .iter()
                    .any(|l| compare(CmpOp::Eq, &v, &eval(t, row, &Expr::Lit(l.clone())))),
            )
        }
        Expr::Like(x, p) => V::Bool(naive_like(&text(x), p)),
        Expr::StartsWith(x, p) => V::Bool(text(x).as_bytes().starts_with(p.as_bytes())),
        Expr::EndsWith(x, p) => V::Bool(text(x).as_bytes().ends_with(p.as_bytes())),
        Expr::Contains(x, p) => {
            let (s, p) = (text(x), p.as_bytes());
            V::Bool(p.is_empty() || s.as_bytes().windows(p.len()).any(|w| w == p))
        }
        Expr::Year(x) => match eval(t, row, x) {
            V::Int(d) => V::Int(year_of(d)),
            other => panic!("not a date: {other:?}"),
        },
    }
}

/// Rows where `e` holds, in order.
pub fn naive_filter(t: &PlainTable, e: &Expr) -> Result<PlainTable> {
    match type_of(t, e)? {
        ExprType::Bool => {}
        other => return Err(Error::Expr(format!("filter expression yields {other:?}"))),
    }
    let mut out = PlainTable::new(t.names.clone(), t.types.clone());
    for row in &t.rows {
        if let V::Bool(true) = eval(t, row, e) {
            out.rows.push(row.clone());
        }
    }
    Ok(out)
}

/// Appends `e` evaluated on each row.
pub fn naive_compute(t: &PlainTable, e: &Expr, name: &str) -> Result<PlainTable> {
    let ty = match type_of(t, e)? {
        ExprType::Int => PlainType::Int,
        ExprType::Float => PlainType::Float,
        ExprType::Date => PlainType::Date,
        other => return Err(Error::Expr(format!("compute expression yields {other:?}"))),
    };
    if t.names.iter().any(|n| n == name) {
        return Err(Error::DuplicateName(name.to_owned()));
    }
    let mut out = t.clone();
    out.names.push(name.to_owned());
    out.types.push(ty);
    for (row, src) in out.rows.iter_mut().zip(&t.rows) {
        let v = match (ty, eval(t, src, e)) {
            (PlainType::Int, V::Int(x)) => Value::Int(x),
            (PlainType::Date, V::Int(x)) => Value::Date(x),
            (PlainType::Float, v) => Value::Float(v.f64()),
            (_, v) => panic!("unexpected {v:?}"),
        };
        row.push(v);
    }
    Ok(out)
}
