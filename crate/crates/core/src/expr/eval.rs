//! Chunked, column-at-a-time evaluation of bound expressions.

use rayon::prelude::*;

use super::{arith_type, ArithOp, CmpOp, Expr, ExprType, LikePattern, Literal};
use crate::encoding::Dictionary;
use crate::error::{Error, Result};
use crate::exec::ExecOptions;
use crate::frame::{ColumnData, Frame, StringPool};
use crate::value::{year_of, LogicalDtype};

/// Values of one node over one chunk. Int also carries dates.
enum Vals<'a> {
    Bool(Vec<bool>),
    Int(Vec<i64>),
    Float(Vec<f64>),
    Str(Vec<&'a str>),
}

impl<'a> Vals<'a> {
    fn into_bool(self) -> Vec<bool> {
        match self {
            Vals::Bool(v) => v,
            _ => unreachable!("type-checked boolean"),
        }
    }

    fn into_f64(self) -> Vec<f64> {
        match self {
            Vals::Float(v) => v,
            Vals::Int(v) => v.into_iter().map(|x| x as f64).collect(),
            _ => unreachable!("type-checked numeric"),
        }
    }

    fn into_i64(self) -> Vec<i64> {
        match self {
            Vals::Int(v) => v,
            _ => unreachable!("type-checked integral"),
        }
    }

    fn into_str(self) -> Vec<&'a str> {
        match self {
            Vals::Str(v) => v,
            _ => unreachable!("type-checked string"),
        }
    }
}

/// How two operands of a comparison are read.
#[derive(Clone, Copy)]
enum CmpKind {
    Int,
    Float,
    Str,
}

fn cmp_kind(a: ExprType, b: ExprType) -> CmpKind {
    if a == ExprType::Str {
        CmpKind::Str
    } else if a.integral() && b.integral() {
        CmpKind::Int
    } else {
        CmpKind::Float
    }
}

enum Bound<'a> {
    Cells(&'a [u64], ExprType),
    Dict(&'a [u64], &'a Dictionary),
    Pool(&'a StringPool),
    Lit(&'a Literal),
    /// A string predicate over a dictionary column, pre-evaluated per code.
    DictTable(&'a [u64], Vec<bool>),
    Cmp(CmpOp, CmpKind, Box<Bound<'a>>, Box<Bound<'a>>),
    And(Vec<Bound<'a>>),
    Or(Vec<Bound<'a>>),
    Not(Box<Bound<'a>>),
    Arith(ArithOp, ExprType, Box<Bound<'a>>, Box<Bound<'a>>),
    Like(Box<Bound<'a>>, LikePattern),
    StartsWith(Box<Bound<'a>>, &'a str),
    EndsWith(Box<Bound<'a>>, &'a str),
    Contains(Box<Bound<'a>>, &'a str),
    Year(Box<Bound<'a>>),
}

type StrPredicate<'a> = Box<dyn Fn(&str) -> bool + 'a>;

struct Binder<'a> {
    frame: &'a Frame,
}

impl<'a> Binder<'a> {
    fn schema(&self) -> impl Fn(&str) -> Result<LogicalDtype> + 'a {
        let f = self.frame;
        move |n| f.dtype(n)
    }

    fn ty(&self, e: &Expr) -> Result<ExprType> {
        e.infer_type(&self.schema())
    }

    fn dict_column(&self, e: &Expr) -> Option<(&'a [u64], &'a Dictionary)> {
        let Expr::Column(name) = e else { return None };
        let view = self.frame.column(name).ok()?;
        match (view.data, view.dict) {
            (ColumnData::Cells(c), Some(d)) => Some((c, d)),
            _ => None,
        }
    }

    /// Rewrites string predicates of one dictionary column against literals
    /// into a per-code lookup table.
    fn dict_pushdown(&self, e: &'a Expr) -> Option<Bound<'a>> {
        let lit_str = |e: &'a Expr| match e {
            Expr::Lit(Literal::Str(s)) => Some(s.as_str()),
            _ => None,
        };
        let (codes, dict, pred): (_, _, StrPredicate<'a>) = match e {
            Expr::Cmp(op, a, b) => {
                if let (Some((c, d)), Some(l)) = (self.dict_column(a), lit_str(b)) {
                    let op = *op;
                    (
                        c,
                        d,
                        Box::new(move |s: &str| op.holds(s.as_bytes().cmp(l.as_bytes()))),
                    )
                } else if let (Some(l), Some((c, d))) = (lit_str(a), self.dict_column(b)) {
                    let op = *op;
                    (
                        c,
                        d,
                        Box::new(move |s: &str| op.holds(l.as_bytes().cmp(s.as_bytes()))),
                    )
                } else {
                    return None;
                }
            }
            Expr::Between(a, lo, hi) => {
                let (c, d) = self.dict_column(a)?;
                let (lo, hi) = (lit_str(lo)?, lit_str(hi)?);
                (c, d, Box::new(move |s: &str| lo <= s && s <= hi))
            }
            Expr::InSet(a, values) => {
                let (c, d) = self.dict_column(a)?;
                let set: Vec<&str> = values
                    .iter()
                    .map(|v| match v {
                        Literal::Str(s) => Some(s.as_str()),
                        _ => None,
                    })
                    .collect::<Option<_>>()?;
                (c, d, Box::new(move |s: &str| set.contains(&s)))
            }
            Expr::Like(a, p) => {
                let (c, d) = self.dict_column(a)?;
                let p = LikePattern::new(p);
                (c, d, Box::new(move |s: &str| p.matches(s)))
            }
            Expr::StartsWith(a, p) => {
                let (c, d) = self.dict_column(a)?;
                (c, d, Box::new(move |s: &str| s.starts_with(p.as_str())))
            }
            Expr::EndsWith(a, p) => {
                let (c, d) = self.dict_column(a)?;
                (c, d, Box::new(move |s: &str| s.ends_with(p.as_str())))
            }
            Expr::Contains(a, p) => {
                let (c, d) = self.dict_column(a)?;
                (c, d, Box::new(move |s: &str| s.contains(p.as_str())))
            }
            _ => return None,
        };
        let table = dict.values().iter().map(|v| pred(v)).collect();
        Some(Bound::DictTable(codes, table))
    }

    fn bind(&self, e: &'a Expr) -> Result<Bound<'a>> {
        if let Some(b) = self.dict_pushdown(e) {
            return Ok(b);
        }
        let boxed = |x: &'a Expr| self.bind(x).map(Box::new);
        Ok(match e {
            Expr::Column(name) => {
                let view = self.frame.column(name)?;
                match (view.data, view.dict) {
                    (ColumnData::Pool(p), _) => Bound::Pool(p),
                    (ColumnData::Cells(c), Some(d)) => Bound::Dict(c, d),
                    (ColumnData::Cells(c), None) => {
                        Bound::Cells(c, ExprType::of_column(view.dtype))
                    }
                }
            }
            Expr::Lit(l) => Bound::Lit(l),
            Expr::Cmp(op, a, b) => Bound::Cmp(
                *op,
                cmp_kind(self.ty(a)?, self.ty(b)?),
                boxed(a)?,
                boxed(b)?,
            ),
            Expr::And(cs) => Bound::And(cs.iter().map(|c| self.bind(c)).collect::<Result<_>>()?),
            Expr::Or(cs) => Bound::Or(cs.iter().map(|c| self.bind(c)).collect::<Result<_>>()?),
            Expr::Not(c) => Bound::Not(boxed(c)?),
            Expr::Arith(op, a, b) => {
                let t = arith_type(*op, self.ty(a)?, self.ty(b)?)?;
                Bound::Arith(*op, t, boxed(a)?, boxed(b)?)
            }
            Expr::Between(a, lo, hi) => {
                let t = self.ty(a)?;
                Bound::And(vec![
                    Bound::Cmp(CmpOp::Ge, cmp_kind(t, self.ty(lo)?), boxed(a)?, boxed(lo)?),
                    Bound::Cmp(CmpOp::Le, cmp_kind(t, self.ty(hi)?), boxed(a)?, boxed(hi)?),
                ])
            }
            Expr::InSet(a, values) => {
                let t = self.ty(a)?;
                let arms = values
                    .iter()
                    .map(|v| {
                        Ok(Bound::Cmp(
                            CmpOp::Eq,
                            cmp_kind(t, v.ty()),
                            boxed(a)?,
                            Box::new(Bound::Lit(v)),
                        ))
                    })
                    .collect::<Result<_>>()?;
                Bound::Or(arms)
            }
            Expr::Like(a, p) => Bound::Like(boxed(a)?, LikePattern::new(p)),
            Expr::StartsWith(a, p) => Bound::StartsWith(boxed(a)?, p),
            Expr::EndsWith(a, p) => Bound::EndsWith(boxed(a)?, p),
            Expr::Contains(a, p) => Bound::Contains(boxed(a)?, p),
            Expr::Year(a) => Bound::Year(boxed(a)?),
        })
    }
}

fn broadcast<'a>(l: &'a Literal, n: usize) -> Vals<'a> {
    match l {
        Literal::Bool(b) => Vals::Bool(vec![*b; n]),
        Literal::I64(v) | Literal::Date(v) => Vals::Int(vec![*v; n]),
        Literal::F64(v) => Vals::Float(vec![*v; n]),
        Literal::Str(s) => Vals::Str(vec![s.as_str(); n]),
    }
}

fn str_map<'a>(b: &Bound<'a>, rows: &[usize], f: impl Fn(&str) -> bool) -> Vals<'a> {
    Vals::Bool(b.eval(rows).into_str().into_iter().map(f).collect())
}

impl<'a> Bound<'a> {
    fn eval(&self, rows: &[usize]) -> Vals<'a> {
        match self {
            Bound::Cells(c, ExprType::Float) => {
                Vals::Float(rows.iter().map(|&r| f64::from_bits(c[r])).collect())
            }
            Bound::Cells(c, _) => Vals::Int(rows.iter().map(|&r| c[r] as i64).collect()),
            Bound::Dict(c, d) => Vals::Str(
                rows.iter()
                    .map(|&r| d.value(c[r]).expect("codes validated on construction"))
                    .collect(),
            ),
            Bound::Pool(p) => Vals::Str(rows.iter().map(|&r| p.get(r)).collect()),
            Bound::Lit(l) => broadcast(l, rows.len()),
            Bound::DictTable(c, table) => {
                Vals::Bool(rows.iter().map(|&r| table[c[r] as usize]).collect())
            }
            Bound::Cmp(op, kind, a, b) => {
                let (a, b) = (a.eval(rows), b.eval(rows));
                Vals::Bool(match kind {
                    CmpKind::Int => {
                        let (a, b) = (a.into_i64(), b.into_i64());
                        a.iter().zip(&b).map(|(x, y)| op.holds(x.cmp(y))).collect()
                    }
                    CmpKind::Float => {
                        let (a, b) = (a.into_f64(), b.into_f64());
                        a.iter()
                            .zip(&b)
                            .map(|(&x, &y)| op.holds_f64(x, y))
                            .collect()
                    }
                    CmpKind::Str => {
                        let (a, b) = (a.into_str(), b.into_str());
                        a.iter()
                            .zip(&b)
                            .map(|(x, y)| op.holds(x.as_bytes().cmp(y.as_bytes())))
                            .collect()
                    }
                })
            }
            Bound::And(cs) => {
                let mut acc = vec![true; rows.len()];
                for c in cs {
                    for (a, v) in acc.iter_mut().zip(c.eval(rows).into_bool()) {
                        *a &= v;
                    }
                }
                Vals::Bool(acc)
            }
            Bound::Or(cs) => {
                let mut acc = vec![false; rows.len()];
                for c in cs {
                    for (a, v) in acc.iter_mut().zip(c.eval(rows).into_bool()) {
                        *a |= v;
                    }
                }
                Vals::Bool(acc)
            }
            Bound::Not(c) => Vals::Bool(c.eval(rows).into_bool().into_iter().map(|v| !v).collect()),
            Bound::Arith(op, ty, a, b) => {
                let (a, b) = (a.eval(rows), b.eval(rows));
                if *ty == ExprType::Float {
                    let (a, b) = (a.into_f64(), b.into_f64());
                    Vals::Float(
                        a.iter()
                            .zip(&b)
                            .map(|(&x, &y)| float_op(*op, x, y))
                            .collect(),
                    )
                } else {
                    let (a, b) = (a.into_i64(), b.into_i64());
                    Vals::Int(a.iter().zip(&b).map(|(&x, &y)| int_op(*op, x, y)).collect())
                }
            }
            Bound::Like(a, p) => str_map(a, rows, |s| p.matches(s)),
            Bound::StartsWith(a, p) => str_map(a, rows, |s| s.starts_with(p)),
            Bound::EndsWith(a, p) => str_map(a, rows, |s| s.ends_with(p)),
            Bound::Contains(a, p) => str_map(a, rows, |s| s.contains(p)),
            Bound::Year(a) => Vals::Int(a.eval(rows).into_i64().into_iter().map(year_of).collect()),
        }
    }
}

pub(crate) fn float_op(op: ArithOp, x: f64, y: f64) -> f64 {
    match op {
        ArithOp::Add => x + y,
        ArithOp::Sub => x - y,
        ArithOp::Mul => x * y,
        ArithOp::Div => x / y,
    }
}

/// Integer arithmetic wraps on overflow. Division never reaches here.
pub(crate) fn int_op(op: ArithOp, x: i64, y: i64) -> i64 {
    match op {
        ArithOp::Add => x.wrapping_add(y),
        ArithOp::Sub => x.wrapping_sub(y),
        ArithOp::Mul => x.wrapping_mul(y),
        ArithOp::Div => unreachable!("division is typed Float"),
    }
}

fn bind_checked<'a>(f: &'a Frame, e: &'a Expr, want_bool: bool) -> Result<(Bound<'a>, ExprType)> {
    let binder = Binder { frame: f };
    let ty = binder.ty(e)?;
    match (want_bool, ty) {
        (true, ExprType::Bool) => {}
        (true, t) => return Err(Error::Expr(format!("filter expression yields {t:?}"))),
        (false, ExprType::Int | ExprType::Float | ExprType::Date) => {}
        (false, t) => return Err(Error::Expr(format!("compute expression yields {t:?}"))),
    }
    Ok((binder.bind(e)?, ty))
}

/// Physical ids of the logical rows where `e` holds, in logical order.
pub fn eval_mask(f: &Frame, e: &Expr) -> Result<Vec<usize>> {
    eval_mask_with(f, e, &ExecOptions::default())
}

pub fn eval_mask_with(f: &Frame, e: &Expr, opts: &ExecOptions) -> Result<Vec<usize>> {
    let (bound, _) = bind_checked(f, e, true)?;
    let parts: Vec<Vec<usize>> = f
        .rows()
        .par_chunks(opts.chunk())
        .map(|rows| {
            let mask = bound.eval(rows).into_bool();
            rows.iter()
                .zip(mask)
                .filter(|(_, m)| *m)
                .map(|(&r, _)| r)
                .collect()
        })
        .collect();
    Ok(parts.concat())
}

/// Narrows the row indexer to the rows where `e` holds.
pub fn apply_filter(f: &Frame, e: &Expr) -> Result<Frame> {
    apply_filter_with(f, e, &ExecOptions::default())
}

pub fn apply_filter_with(f: &Frame, e: &Expr, opts: &ExecOptions) -> Result<Frame> {
    Ok(f.with_rows(eval_mask_with(f, e, opts)?))
}

/// Appends `e` evaluated per logical row as a new block column.
pub fn eval_compute(f: &Frame, e: &Expr, out_name: &str) -> Result<Frame> {
    eval_compute_with(f, e, out_name, &ExecOptions::default())
}

pub fn eval_compute_with(f: &Frame, e: &Expr, out_name: &str, opts: &ExecOptions) -> Result<Frame> {
    let (bound, ty) = bind_checked(f, e, false)?;
    let parts: Vec<Vec<u64>> = f
        .rows()
        .par_chunks(opts.chunk())
        .map(|rows| match bound.eval(rows) {
            Vals::Float(v) => v.into_iter().map(f64::to_bits).collect(),
            Vals::Int(v) => v.into_iter().map(|x| x as u64).collect(),
            _ => unreachable!("type-checked numeric"),
        })
        .collect();
    // Scatter back to physical positions so the view stays a view.
    let mut cells = vec![0u64; f.physical_rows()];
    for (&r, v) in f.rows().iter().zip(parts.into_iter().flatten()) {
        cells[r] = v;
    }
    let dtype = match ty {
        ExprType::Float => LogicalDtype::Float64,
        ExprType::Date => LogicalDtype::Date,
        _ => LogicalDtype::Int64,
    };
    f.with_block_column(out_name, dtype, cells, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{and, col, lit_bool, lit_date, lit_f64, lit_i64, lit_str};
    use crate::frame::FrameBuilder;
    use crate::value::Value;

    fn frame() -> Frame {
        FrameBuilder::new()
            .int64("qty", vec![10, 30, 24])
            .unwrap()
            .float64("price", vec![100.0, 50.0, 8.0])
            .unwrap()
            .float64("disc", vec![0.05, 0.0, 0.1])
            .unwrap()
            .strings("flag", ["R", "N", "R"], 0.9)
            .unwrap()
            .raw(
                "comment",
                ["special requests", "plain", "requests special"]
                    .into_iter()
                    .collect(),
            )
            .unwrap()
            .build()
            .unwrap()
    }

    #[test]
    fn simple_masks() {
        let f = frame();
        assert_eq!(eval_mask(&f, &col("qty").lt(lit_i64(24))).unwrap(), vec![0]);
        assert_eq!(
            eval_mask(&f, &col("qty").lt(lit_f64(24.5))).unwrap(),
            vec![0, 2]
        );
        let e = col("qty").gt(lit_i64(5));
        assert_eq!(
            eval_mask(&f, &and(vec![lit_bool(true), e.clone()])).unwrap(),
            eval_mask(&f, &e).unwrap()
        );
        assert_eq!(
            eval_mask(&f, &col("comment").like("%special%requests%")).unwrap(),
            vec![0]
        );
        assert_eq!(
            eval_mask(&f, &col("flag").equals(lit_str("R"))).unwrap(),
            vec![0, 2]
        );
        assert!(eval_mask(&f, &col("flag").equals(lit_str("Z")))
            .unwrap()
            .is_empty());
        assert_eq!(
            eval_mask(&f, &col("flag").not_equals(lit_str("Z"))).unwrap(),
            vec![0, 1, 2]
        );
    }

    #[test]
    fn filter_is_a_view() {
        let f = frame();
        let g = apply_filter(&f, &col("qty").ge(lit_i64(24))).unwrap();
        assert_eq!(g.rows(), &[1, 2]);
        assert_eq!(g.physical_rows(), 3);
        let none = apply_filter(&f, &lit_bool(false)).unwrap();
        assert_eq!((none.num_rows(), none.num_columns()), (0, 5));
    }

    #[test]
    fn errors_not_wrong_answers() {
        let f = frame();
        assert!(matches!(
            eval_mask(&f, &col("nope").lt(lit_i64(1))),
            Err(Error::Name(_))
        ));
        assert!(matches!(
            eval_mask(&f, &col("flag").lt(lit_i64(1))),
            Err(Error::Expr(_))
        ));
        assert!(matches!(eval_mask(&f, &col("qty")), Err(Error::Expr(_))));
        assert!(matches!(
            eval_compute(&f, &col("qty").gt(lit_i64(1)), "x"),
            Err(Error::Expr(_))
        ));
    }

    #[test]
    fn compute_columns() {
        let f = frame();
        let g = eval_compute(&f, &col("price").mul(lit_f64(1.0).sub(col("disc"))), "dp").unwrap();
        assert_eq!(g.value(0, 5), Value::Float(95.0));
        let g = eval_compute(&f, &col("qty"), "q2").unwrap();
        assert_eq!(g.dtype("q2").unwrap(), LogicalDtype::Int64);
        assert_eq!(g.value(2, 5), Value::Int(24));
        let g = eval_compute(&f, &col("price").div(lit_i64(0)), "inf").unwrap();
        assert_eq!(g.value(0, 5), Value::Float(f64::INFINITY));
        let filtered = apply_filter(&f, &col("qty").gt(lit_i64(20))).unwrap();
        let g = eval_compute(&filtered, &col("qty").mul(lit_i64(2)), "q2").unwrap();
        assert_eq!(g.num_rows(), 2);
        assert_eq!(g.value(1, 5), Value::Int(48));
    }

    #[test]
    fn dates_and_years() {
        let f = FrameBuilder::new()
            .date("d", vec![0, 9000, 9500])
            .unwrap()
            .build()
            .unwrap();
        let e = col("d").ge(lit_date("1994-01-01").unwrap());
        assert_eq!(eval_mask(&f, &e).unwrap(), vec![1, 2]);
        let g = eval_compute(&f, &col("d").year(), "y").unwrap();
        assert_eq!(g.value(0, 1), Value::Int(1970));
        assert_eq!(g.value(1, 1), Value::Int(1994));
    }
}
