//! DPLL-style compilation of DNF and CNF formulas into decision-DNNFs.
//!
//! A residual formula is a sorted list of literal groups (terms for a DNF,
//! clauses for a CNF) with repeated and absorbed groups removed. Each
//! residual becomes a sink, an AND over variable-disjoint factors, or a
//! decision on one variable. Residuals are cached by their canonical form.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::circuit::{self, CircuitDag, DagBuilder, Flavor, NodeId, Var};
use crate::error::Result;
use crate::formula::{DnfFormula, Formula, Lit};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Heuristic {
    /// Smallest variable index still present.
    #[default]
    FixedOrder,
    /// Variable with the most occurrences; ties go to the smaller index.
    MostFrequentVar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CompileOptions {
    pub heuristic: Heuristic,
    pub cache: bool,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            heuristic: Heuristic::FixedOrder,
            cache: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Dnf,
    Cnf,
}

type Groups = Vec<Vec<Lit>>;

enum Residual {
    Const(bool),
    Groups(Groups),
}

fn is_subset(small: &[Lit], big: &[Lit]) -> bool {
    let mut it = big.iter();
    small.iter().all(|l| it.any(|b| b == l))
}

/// Sorted, repeated groups dropped, supersets of other groups dropped.
fn canonical(mut groups: Groups) -> Groups {
    groups.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    groups.dedup();
    let mut kept: Groups = Vec::with_capacity(groups.len());
    for g in groups {
        if !kept.iter().any(|k| is_subset(k, &g)) {
            kept.push(g);
        }
    }
    kept.sort();
    kept
}

fn simplify(kind: Kind, groups: Groups) -> Residual {
    if groups.iter().any(Vec::is_empty) {
        return Residual::Const(kind == Kind::Dnf);
    }
    if groups.is_empty() {
        return Residual::Const(kind == Kind::Cnf);
    }
    Residual::Groups(canonical(groups))
}

/// Residual after setting `lit` true.
fn restrict(kind: Kind, groups: &Groups, lit: Lit) -> Residual {
    // A DNF term dies with a false literal; a CNF clause with a true one.
    let (kill, drop) = match kind {
        Kind::Dnf => (lit.negated(), lit),
        Kind::Cnf => (lit, lit.negated()),
    };
    let next = groups
        .iter()
        .filter(|g| !g.contains(&kill))
        .map(|g| g.iter().copied().filter(|&l| l != drop).collect())
        .collect();
    simplify(kind, next)
}

fn vars_of(groups: &Groups) -> BTreeSet<Var> {
    groups.iter().flatten().map(|l| l.var()).collect()
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.parent[a.max(b)] = a.min(b);
        }
    }

    fn classes(&mut self) -> Vec<Vec<usize>> {
        let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for x in 0..self.parent.len() {
            let r = self.find(x);
            by_root.entry(r).or_default().push(x);
        }
        by_root.into_values().collect()
    }
}

fn project(groups: &Groups, keep: &BTreeSet<Var>) -> BTreeSet<Vec<Lit>> {
    groups
        .iter()
        .map(|g| g.iter().copied().filter(|l| keep.contains(&l.var())).collect())
        .collect()
}

/// Clauses sharing a variable end up in the same component.
fn cnf_components(groups: &Groups) -> Vec<Groups> {
    let vars: Vec<Var> = vars_of(groups).into_iter().collect();
    let index: BTreeMap<Var, usize> = vars.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut uf = UnionFind::new(vars.len());
    for g in groups {
        for w in g.windows(2) {
            uf.union(index[&w[0].var()], index[&w[1].var()]);
        }
    }
    let mut parts: BTreeMap<usize, Groups> = BTreeMap::new();
    for g in groups {
        let root = uf.find(index[&g[0].var()]);
        parts.entry(root).or_default().push(g.clone());
    }
    parts.into_values().collect()
}

/// Splits a DNF into variable-disjoint factors whose term sets multiply out
/// to the input. Two variables whose joint projection is not the product of
/// their single projections must share a factor; each candidate split is
/// then checked against the full term set.
fn dnf_factors(groups: &Groups) -> Vec<Groups> {
    let vars: Vec<Var> = vars_of(groups).into_iter().collect();
    if vars.len() < 2 {
        return vec![groups.clone()];
    }
    let slot = |g: &[Lit], v: Var| g.iter().find(|l| l.var() == v).copied();
    let mut uf = UnionFind::new(vars.len());
    for i in 0..vars.len() {
        for j in i + 1..vars.len() {
            let mut joint = BTreeSet::new();
            let mut left = BTreeSet::new();
            let mut right = BTreeSet::new();
            for g in groups {
                let (a, b) = (slot(g, vars[i]), slot(g, vars[j]));
                joint.insert((a, b));
                left.insert(a);
                right.insert(b);
            }
            if joint.len() != left.len() * right.len() {
                uf.union(i, j);
            }
        }
    }
    let classes = uf.classes();
    if classes.len() < 2 {
        return vec![groups.clone()];
    }
    let mut factors = Vec::new();
    let mut rest = groups.clone();
    let mut rest_vars: BTreeSet<Var> = vars.iter().copied().collect();
    for class in &classes {
        let part: BTreeSet<Var> = class.iter().map(|&i| vars[i]).collect();
        if part.len() == rest_vars.len() {
            break;
        }
        let others: BTreeSet<Var> = rest_vars.difference(&part).copied().collect();
        let a = project(&rest, &part);
        let b = project(&rest, &others);
        if a.len() * b.len() == rest.len() {
            factors.push(a.into_iter().collect());
            rest = b.into_iter().collect();
            rest_vars = others;
        }
    }
    factors.push(rest);
    factors
}

struct Compiler {
    kind: Kind,
    heuristic: Heuristic,
    cache: Option<HashMap<Groups, NodeId>>,
    builder: DagBuilder,
    zero: NodeId,
    one: NodeId,
}

impl Compiler {
    fn new(kind: Kind, options: &CompileOptions) -> Compiler {
        let mut builder = DagBuilder::new();
        let zero = builder.sink(false);
        let one = builder.sink(true);
        Compiler {
            kind,
            heuristic: options.heuristic,
            cache: options.cache.then(HashMap::new),
            builder,
            zero,
            one,
        }
    }

    fn residual(&mut self, r: Residual) -> NodeId {
        match r {
            Residual::Const(true) => self.one,
            Residual::Const(false) => self.zero,
            Residual::Groups(g) => self.groups(g),
        }
    }

    fn groups(&mut self, groups: Groups) -> NodeId {
        if let Some(&hit) = self.cache.as_ref().and_then(|c| c.get(&groups)) {
            return hit;
        }
        let parts = match self.kind {
            Kind::Dnf => dnf_factors(&groups),
            Kind::Cnf => cnf_components(&groups),
        };
        let node = if parts.len() > 1 {
            let children: Vec<NodeId> = parts
                .into_iter()
                .map(|p| {
                    let r = simplify(self.kind, p);
                    self.residual(r)
                })
                .collect();
            self.and_chain(&children)
        } else {
            self.branch(&groups)
        };
        if let Some(cache) = self.cache.as_mut() {
            cache.insert(groups, node);
        }
        node
    }

    fn and_chain(&mut self, children: &[NodeId]) -> NodeId {
        match children {
            [only] => *only,
            [first, rest @ ..] => {
                let tail = self.and_chain(rest);
                self.builder.and(vec![*first, tail])
            }
            [] => self.one,
        }
    }

    fn pick(&self, groups: &Groups) -> Var {
        match self.heuristic {
            Heuristic::FixedOrder => groups
                .iter()
                .flatten()
                .map(|l| l.var())
                .min()
                .expect("residual has a variable"),
            Heuristic::MostFrequentVar => {
                let mut freq: BTreeMap<Var, usize> = BTreeMap::new();
                for l in groups.iter().flatten() {
                    *freq.entry(l.var()).or_default() += 1;
                }
                let best = freq.values().copied().max().expect("residual has a variable");
                freq.into_iter()
                    .find(|&(_, n)| n == best)
                    .map(|(v, _)| v)
                    .expect("maximum is attained")
            }
        }
    }

    fn branch(&mut self, groups: &Groups) -> NodeId {
        let x = self.pick(groups);
        let r0 = restrict(self.kind, groups, Lit::neg(x));
        let lo = self.residual(r0);
        let r1 = restrict(self.kind, groups, Lit::pos(x));
        let hi = self.residual(r1);
        if lo == hi {
            lo
        } else {
            self.builder.decision(x, lo, hi)
        }
    }
}

fn without_contradictions(groups: &[Vec<Lit>]) -> Groups {
    groups
        .iter()
        .filter(|g| !g.windows(2).any(|w| w[0].var() == w[1].var()))
        .cloned()
        .collect()
}

/// Compiles with the given heuristic and caching on.
pub fn compile(f: &Formula, heuristic: Heuristic) -> Result<CircuitDag> {
    compile_with(
        f,
        &CompileOptions {
            heuristic,
            cache: true,
        },
    )
}

/// Output is a normalized decision-DNNF over the formula's universe.
pub fn compile_with(f: &Formula, options: &CompileOptions) -> Result<CircuitDag> {
    // Contradictory terms are false; tautological clauses are true. Either
    // way the group can be dropped.
    let (kind, groups) = match f {
        Formula::Dnf(d) => (Kind::Dnf, without_contradictions(d.terms())),
        Formula::Cnf(c) => (Kind::Cnf, without_contradictions(c.clauses())),
    };
    let mut compiler = Compiler::new(kind, options);
    let r = simplify(kind, groups);
    let root = compiler.residual(r);
    let dag = compiler
        .builder
        .finish(root, f.universe().clone(), Flavor::DecisionDnnf)?;
    circuit::normalize(&dag)
}

/// `(monotone, k)` with `k` the widest term left after dropping terms that
/// contain another term.
pub fn is_monotone_kdnf(f: &DnfFormula) -> (bool, usize) {
    let terms = canonical(f.terms().to_vec());
    let k = terms.iter().map(Vec::len).max().unwrap_or(0);
    (f.is_monotone(), k)
}
