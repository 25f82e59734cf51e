//! A small SELECT-query engine: basic graph patterns joined over the union
//! of all graphs, with GROUP BY, COUNT, ORDER BY and LIMIT.

mod parser;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use indexmap::{IndexMap, IndexSet};
use serde::{Deserialize, Serialize};

pub use parser::parse_query;

use crate::rdf::{Dataset, Term, Triple};

/// Steps ranked by how many plans reuse a derivation of them.
pub const STEP_REUSE_QUERY: &str = include_str!("stats/step_reuse.rq");
/// Steps ranked by how many recorded activities correspond to them.
pub const STEP_EXECUTIONS_QUERY: &str = include_str!("stats/step_executions.rq");
/// Plans ranked by their number of distinct steps.
pub const PLAN_SIZES_QUERY: &str = include_str!("stats/plan_sizes.rq");

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryErrorKind {
    Syntax(String),
    Unsupported(String),
    UndefinedPrefix(String),
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct QueryError {
    pub line: usize,
    pub column: usize,
    pub kind: QueryErrorKind,
}

impl fmt::Display for QueryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            QueryErrorKind::Syntax(m) => write!(f, "syntax error at {}:{}: {m}", self.line, self.column),
            QueryErrorKind::Unsupported(c) => write!(f, "unsupported construct {c} at {}:{}", self.line, self.column),
            QueryErrorKind::UndefinedPrefix(p) => write!(f, "undefined prefix {p:?} at {}:{}", self.line, self.column),
            QueryErrorKind::Invalid(m) => write!(f, "invalid query: {m}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PatternTerm {
    Var(String),
    Term(Term),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriplePattern {
    pub subject: PatternTerm,
    pub predicate: PatternTerm,
    pub object: PatternTerm,
}

impl TriplePattern {
    fn terms(&self) -> [&PatternTerm; 3] {
        [&self.subject, &self.predicate, &self.object]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Projection {
    Var(String),
    /// `var == None` counts solutions (`COUNT(*)`).
    Count { var: Option<String>, distinct: bool, alias: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Asc,
    Desc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub prefixes: BTreeMap<String, String>,
    /// Empty for `SELECT *`.
    pub projection: Vec<Projection>,
    pub distinct: bool,
    pub patterns: Vec<TriplePattern>,
    pub group_by: Vec<String>,
    pub order_by: Vec<(String, Order)>,
    pub limit: Option<usize>,
}

impl Query {
    /// Variables of the WHERE block in order of first appearance.
    pub fn pattern_vars(&self) -> Vec<&str> {
        let mut seen = IndexSet::new();
        for p in &self.patterns {
            for t in p.terms() {
                if let PatternTerm::Var(v) = t {
                    seen.insert(v.as_str());
                }
            }
        }
        seen.into_iter().collect()
    }

    pub fn is_aggregate(&self) -> bool {
        !self.group_by.is_empty() || self.projection.iter().any(|p| matches!(p, Projection::Count { .. }))
    }

    /// Output column names.
    pub fn columns(&self) -> Vec<String> {
        if self.projection.is_empty() {
            return self.pattern_vars().into_iter().map(String::from).collect();
        }
        self.projection
            .iter()
            .map(|p| match p {
                Projection::Var(v) => v.clone(),
                Projection::Count { alias, .. } => alias.clone(),
            })
            .collect()
    }

    fn check(&self) -> Result<(), String> {
        let vars: BTreeSet<&str> = self.pattern_vars().into_iter().collect();
        let has_count = self.projection.iter().any(|p| matches!(p, Projection::Count { .. }));
        if has_count && self.group_by.is_empty() {
            return Err("aggregates require GROUP BY".into());
        }
        if !self.group_by.is_empty() && self.projection.is_empty() {
            return Err("SELECT * cannot be combined with GROUP BY".into());
        }
        for g in &self.group_by {
            if !vars.contains(g.as_str()) {
                return Err(format!("GROUP BY variable ?{g} does not occur in the WHERE block"));
            }
        }
        let mut columns = BTreeSet::new();
        for p in &self.projection {
            match p {
                Projection::Var(v) => {
                    if !vars.contains(v.as_str()) {
                        return Err(format!("projected variable ?{v} does not occur in the WHERE block"));
                    }
                    if !self.group_by.is_empty() && !self.group_by.contains(v) {
                        return Err(format!("projected variable ?{v} is not grouped"));
                    }
                }
                Projection::Count { var, alias, .. } => {
                    if let Some(v) = var {
                        if !vars.contains(v.as_str()) {
                            return Err(format!("counted variable ?{v} does not occur in the WHERE block"));
                        }
                    }
                    if vars.contains(alias.as_str()) {
                        return Err(format!("alias ?{alias} is already a pattern variable"));
                    }
                }
            }
        }
        for c in self.columns() {
            if !columns.insert(c.clone()) {
                return Err(format!("duplicate output column ?{c}"));
            }
        }
        for (v, _) in &self.order_by {
            if !columns.contains(v) {
                return Err(format!("ORDER BY ?{v} must name an output column"));
            }
        }
        Ok(())
    }
}

/// Triples of every graph, deduplicated and indexed by position.
#[derive(Debug, Clone, Default)]
pub struct TripleStore {
    triples: IndexSet<Triple>,
    by_subject: HashMap<Term, Vec<usize>>,
    by_predicate: HashMap<Term, Vec<usize>>,
    by_object: HashMap<Term, Vec<usize>>,
}

impl TripleStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_dataset(d: &Dataset) -> Self {
        let mut s = Self::new();
        s.extend_from(d);
        s
    }

    pub fn extend_from(&mut self, d: &Dataset) {
        for q in d.iter() {
            self.insert(q.triple());
        }
    }

    pub fn insert(&mut self, t: Triple) -> bool {
        let (idx, added) = self.triples.insert_full(t);
        if added {
            let t = &self.triples[idx];
            self.by_subject.entry(t.subject.clone()).or_default().push(idx);
            self.by_predicate.entry(t.predicate.clone()).or_default().push(idx);
            self.by_object.entry(t.object.clone()).or_default().push(idx);
        }
        added
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    fn matches<'a>(&'a self, s: Option<&Term>, p: Option<&Term>, o: Option<&Term>) -> Box<dyn Iterator<Item = &'a Triple> + 'a> {
        let lists = [(s, &self.by_subject), (p, &self.by_predicate), (o, &self.by_object)];
        let mut best: Option<&Vec<usize>> = None;
        for (term, index) in lists {
            if let Some(term) = term {
                match index.get(term) {
                    None => return Box::new(std::iter::empty()),
                    Some(list) if best.is_none_or(|b| list.len() < b.len()) => best = Some(list),
                    Some(_) => {}
                }
            }
        }
        let (s, p, o) = (s.cloned(), p.cloned(), o.cloned());
        let keep = move |t: &&Triple| {
            s.as_ref().is_none_or(|x| &t.subject == x)
                && p.as_ref().is_none_or(|x| &t.predicate == x)
                && o.as_ref().is_none_or(|x| &t.object == x)
        };
        match best {
            Some(list) => Box::new(list.iter().map(|&i| &self.triples[i]).filter(keep)),
            None => Box::new(self.triples.iter().filter(keep)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Count(u64),
    /// Lexical value of an IRI or literal.
    Text(String),
}

impl Cell {
    fn cmp_value(&self, other: &Cell) -> Ordering {
        match (self, other) {
            (Cell::Count(a), Cell::Count(b)) => a.cmp(b),
            (Cell::Text(a), Cell::Text(b)) => a.cmp(b),
            (Cell::Count(_), Cell::Text(_)) => Ordering::Less,
            (Cell::Text(_), Cell::Count(_)) => Ordering::Greater,
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Count(n) => write!(f, "{n}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultTable {
    pub vars: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    /// Aligned plain-text rendering with a header row.
    pub fn render(&self) -> String {
        let mut widths: Vec<usize> = self.vars.iter().map(|v| v.chars().count()).collect();
        let rows: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(Cell::to_string).collect()).collect();
        for r in &rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |cells: &[String]| {
            let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            padded.join("  ").trim_end().to_string()
        };
        let mut out = line(&self.vars);
        out.push('\n');
        out.push_str(&widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  "));
        out.push('\n');
        for r in &rows {
            out.push_str(&line(r));
            out.push('\n');
        }
        out
    }
}

type Solution<'a> = Vec<Option<&'a Term>>;

fn solve<'a>(q: &Query, store: &'a TripleStore, vars: &IndexMap<&str, usize>) -> Vec<Solution<'a>> {
    let mut solutions: Vec<Solution<'a>> = vec![vec![None; vars.len()]];
    let mut remaining: Vec<&TriplePattern> = q.patterns.iter().collect();
    let mut bound: BTreeSet<&str> = BTreeSet::new();
    while !remaining.is_empty() && !solutions.is_empty() {
        // most-bound pattern first; earliest written wins ties
        let boundness = |p: &TriplePattern| {
            p.terms().iter().filter(|t| match t {
                PatternTerm::Term(_) => true,
                PatternTerm::Var(v) => bound.contains(v.as_str()),
            })
            .count()
        };
        let (pick, _) = remaining.iter().enumerate().max_by_key(|(i, p)| (boundness(p), std::cmp::Reverse(*i))).expect("non-empty");
        let pattern = remaining.remove(pick);
        let slots: Vec<Option<usize>> = pattern
            .terms()
            .iter()
            .map(|t| match t {
                PatternTerm::Var(v) => Some(vars[v.as_str()]),
                PatternTerm::Term(_) => None,
            })
            .collect();
        let mut next = Vec::new();
        for sol in &solutions {
            let fixed: Vec<Option<&Term>> = pattern
                .terms()
                .iter()
                .zip(&slots)
                .map(|(t, slot)| match (t, slot) {
                    (PatternTerm::Term(term), _) => Some(term),
                    (PatternTerm::Var(_), Some(i)) => sol[*i],
                    _ => None,
                })
                .collect();
            'candidates: for t in store.matches(fixed[0], fixed[1], fixed[2]) {
                let mut extended = sol.clone();
                for (value, slot) in [&t.subject, &t.predicate, &t.object].into_iter().zip(&slots) {
                    if let Some(i) = slot {
                        match extended[*i] {
                            Some(existing) if existing != value => continue 'candidates,
                            _ => extended[*i] = Some(value),
                        }
                    }
                }
                next.push(extended);
            }
        }
        solutions = next;
        for t in pattern.terms() {
            if let PatternTerm::Var(v) = t {
                bound.insert(v.as_str());
            }
        }
    }
    solutions
}

fn text(t: Option<&Term>) -> Cell {
    Cell::Text(t.map(|t| t.value().to_string()).unwrap_or_default())
}

/// Evaluates `q` over every triple in `store`.
pub fn evaluate(q: &Query, store: &TripleStore) -> ResultTable {
    let vars: IndexMap<&str, usize> = q.pattern_vars().into_iter().enumerate().map(|(i, v)| (v, i)).collect();
    let columns = q.columns();
    let solutions = solve(q, store, &vars);

    let mut rows: Vec<Vec<Cell>> = if q.is_aggregate() {
        let mut groups: IndexMap<Vec<Option<&Term>>, Vec<&Solution>> = IndexMap::new();
        for sol in &solutions {
            let key = q.group_by.iter().map(|g| sol[vars[g.as_str()]]).collect();
            groups.entry(key).or_default().push(sol);
        }
        groups
            .iter()
            .map(|(key, members)| {
                q.projection
                    .iter()
                    .map(|p| match p {
                        Projection::Var(v) => {
                            let pos = q.group_by.iter().position(|g| g == v).expect("checked: projected vars are grouped");
                            text(key[pos])
                        }
                        Projection::Count { var: None, .. } => Cell::Count(members.len() as u64),
                        Projection::Count { var: Some(v), distinct, .. } => {
                            let values = members.iter().filter_map(|s| s[vars[v.as_str()]]);
                            let n = if *distinct { values.collect::<BTreeSet<_>>().len() } else { values.count() };
                            Cell::Count(n as u64)
                        }
                    })
                    .collect()
            })
            .collect()
    } else {
        let idx: Vec<usize> = columns.iter().map(|c| vars[c.as_str()]).collect();
        solutions.iter().map(|sol| idx.iter().map(|&i| text(sol[i])).collect()).collect()
    };
    if q.distinct {
        let mut seen = BTreeSet::new();
        rows.retain(|r| seen.insert(r.iter().map(|c| (matches!(c, Cell::Count(_)), c.to_string())).collect::<Vec<_>>()));
    }

    let order: Vec<(usize, Order)> =
        q.order_by.iter().map(|(v, o)| (columns.iter().position(|c| c == v).expect("checked: order names a column"), *o)).collect();
    rows.sort_by(|a, b| {
        for &(i, o) in &order {
            let c = a[i].cmp_value(&b[i]);
            let c = if o == Order::Desc { c.reverse() } else { c };
            if c != Ordering::Equal {
                return c;
            }
        }
        a.iter().zip(b).map(|(x, y)| x.cmp_value(y)).find(|c| *c != Ordering::Equal).unwrap_or(Ordering::Equal)
    });
    if let Some(n) = q.limit {
        rows.truncate(n);
    }
    ResultTable { vars: columns, rows }
}

/// Parses and evaluates in one step.
pub fn run_query(text: &str, store: &TripleStore) -> Result<ResultTable, QueryError> {
    Ok(evaluate(&parse_query(text)?, store))
}
