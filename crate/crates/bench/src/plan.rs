//! Query plans as data, with two interpreters: the columnar engine and the
//! row-at-a-time reference engine. A catalog query is written once and both
//! sides execute the same operator sequence.

use std::collections::BTreeMap;

use cardframe::expr::{self, Expr};
use cardframe::groupby::{group_by, AggSpec};
use cardframe::join;
use cardframe::oracle::{
    naive_anti_join, naive_compute, naive_concat, naive_filter, naive_groupby, naive_join,
    naive_limit, naive_select, naive_sort, PlainTable,
};
use cardframe::{ExecOptions, Frame, Result, SortKey};

pub type Keys = Vec<(&'static str, &'static str)>;

#[derive(Debug, Clone)]
pub enum Plan {
    Scan {
        table: &'static str,
        columns: Vec<&'static str>,
    },
    Filter(Box<Plan>, Expr),
    Compute(Box<Plan>, Expr, &'static str),
    Select(Box<Plan>, Vec<&'static str>),
    Join(Box<Plan>, Box<Plan>, Keys),
    AntiJoin(Box<Plan>, Box<Plan>, Keys),
    GroupBy(Box<Plan>, Vec<&'static str>, Vec<AggSpec>),
    Sort(Box<Plan>, Vec<SortKey>),
    Limit(Box<Plan>, usize),
    Concat(Vec<Plan>),
}

pub fn scan(table: &'static str, columns: &[&'static str]) -> Plan {
    Plan::Scan {
        table,
        columns: columns.to_vec(),
    }
}

impl Plan {
    pub fn filter(self, e: Expr) -> Plan {
        Plan::Filter(Box::new(self), e)
    }

    pub fn compute(self, e: Expr, name: &'static str) -> Plan {
        Plan::Compute(Box::new(self), e, name)
    }

    pub fn select(self, columns: &[&'static str]) -> Plan {
        Plan::Select(Box::new(self), columns.to_vec())
    }

    pub fn join(self, right: Plan, keys: &[(&'static str, &'static str)]) -> Plan {
        Plan::Join(Box::new(self), Box::new(right), keys.to_vec())
    }

    pub fn anti_join(self, right: Plan, keys: &[(&'static str, &'static str)]) -> Plan {
        Plan::AntiJoin(Box::new(self), Box::new(right), keys.to_vec())
    }

    pub fn group_by(self, keys: &[&'static str], specs: Vec<AggSpec>) -> Plan {
        Plan::GroupBy(Box::new(self), keys.to_vec(), specs)
    }

    pub fn sort(self, keys: Vec<SortKey>) -> Plan {
        Plan::Sort(Box::new(self), keys)
    }

    pub fn limit(self, k: usize) -> Plan {
        Plan::Limit(Box::new(self), k)
    }

    /// Columns each table must supply, in first-use order.
    pub fn projections(&self) -> BTreeMap<&'static str, Vec<&'static str>> {
        let mut out = BTreeMap::new();
        self.collect_scans(&mut out);
        out
    }

    fn collect_scans(&self, out: &mut BTreeMap<&'static str, Vec<&'static str>>) {
        match self {
            Plan::Scan { table, columns } => {
                let cols: &mut Vec<&'static str> = out.entry(*table).or_default();
                for c in columns {
                    if !cols.contains(c) {
                        cols.push(c);
                    }
                }
            }
            Plan::Filter(p, _)
            | Plan::Compute(p, _, _)
            | Plan::Select(p, _)
            | Plan::GroupBy(p, _, _)
            | Plan::Sort(p, _)
            | Plan::Limit(p, _) => p.collect_scans(out),
            Plan::Join(l, r, _) | Plan::AntiJoin(l, r, _) => {
                l.collect_scans(out);
                r.collect_scans(out);
            }
            Plan::Concat(parts) => parts.iter().for_each(|p| p.collect_scans(out)),
        }
    }

    pub fn run(&self, tables: &BTreeMap<String, Frame>, opts: &ExecOptions) -> Result<Frame> {
        match self {
            Plan::Scan { table, columns } => tables
                .get(*table)
                .ok_or_else(|| cardframe::Error::Name(format!("table {table}")))?
                .select_columns(columns),
            Plan::Filter(p, e) => expr::apply_filter_with(&p.run(tables, opts)?, e, opts),
            Plan::Compute(p, e, name) => {
                expr::eval_compute_with(&p.run(tables, opts)?, e, name, opts)
            }
            Plan::Select(p, cols) => p.run(tables, opts)?.select_columns(cols),
            Plan::Join(l, r, keys) => {
                join::inner_join_with(&l.run(tables, opts)?, &r.run(tables, opts)?, keys, opts)
            }
            Plan::AntiJoin(l, r, keys) => {
                join::anti_join_with(&l.run(tables, opts)?, &r.run(tables, opts)?, keys, opts)
            }
            Plan::GroupBy(p, keys, specs) => group_by(&p.run(tables, opts)?, keys, specs, opts),
            Plan::Sort(p, keys) => p.run(tables, opts)?.sort_by(keys),
            Plan::Limit(p, k) => Ok(p.run(tables, opts)?.limit(*k)),
            Plan::Concat(parts) => {
                let frames = parts
                    .iter()
                    .map(|p| p.run(tables, opts))
                    .collect::<Result<Vec<_>>>()?;
                Frame::concat(&frames)
            }
        }
    }

    pub fn run_naive(&self, tables: &BTreeMap<String, PlainTable>) -> Result<PlainTable> {
        match self {
            Plan::Scan { table, columns } => naive_select(
                tables
                    .get(*table)
                    .ok_or_else(|| cardframe::Error::Name(format!("table {table}")))?,
                columns,
            ),
            Plan::Filter(p, e) => naive_filter(&p.run_naive(tables)?, e),
            Plan::Compute(p, e, name) => naive_compute(&p.run_naive(tables)?, e, name),
            Plan::Select(p, cols) => naive_select(&p.run_naive(tables)?, cols),
            Plan::Join(l, r, keys) => {
                naive_join(&l.run_naive(tables)?, &r.run_naive(tables)?, keys)
            }
            Plan::AntiJoin(l, r, keys) => {
                naive_anti_join(&l.run_naive(tables)?, &r.run_naive(tables)?, keys)
            }
            Plan::GroupBy(p, keys, specs) => naive_groupby(&p.run_naive(tables)?, keys, specs),
            Plan::Sort(p, keys) => naive_sort(&p.run_naive(tables)?, keys),
            Plan::Limit(p, k) => Ok(naive_limit(&p.run_naive(tables)?, *k)),
            Plan::Concat(parts) => {
                let tables = parts
                    .iter()
                    .map(|p| p.run_naive(tables))
                    .collect::<Result<Vec<_>>>()?;
                naive_concat(&tables)
            }
        }
    }
}
