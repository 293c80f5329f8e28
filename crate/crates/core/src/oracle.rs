//! Brute-force ground truth over explicit assignments.
//!
//! Assignments over a universe are enumerated in lexicographic order with the
//! smallest variable most significant, so the all-zeros assignment comes first.
//! Enumeration is bit-parallel: one `u64` carries 64 consecutive assignments.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;

use crate::circuit::{CircuitDag, Node, NodeId, Var};
use crate::counting::ModelCount;
use crate::error::{Error, Result};
use crate::formula::{CnfFormula, DnfFormula, Lit};

pub const DEFAULT_CAP: usize = 24;

/// A total assignment over some set of variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    values: BTreeMap<Var, bool>,
}

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    /// The `index`-th assignment over `universe` in lexicographic order.
    pub fn from_index(universe: &[Var], index: u64) -> Assignment {
        let n = universe.len();
        let values = universe
            .iter()
            .enumerate()
            .map(|(j, &v)| (v, (index >> (n - 1 - j)) & 1 == 1))
            .collect();
        Assignment { values }
    }

    pub fn set(&mut self, var: Var, value: bool) {
        self.values.insert(var, value);
    }

    pub fn get(&self, var: Var) -> Option<bool> {
        self.values.get(&var).copied()
    }

    pub fn value(&self, var: Var) -> Result<bool> {
        self.get(var).ok_or(Error::VarOutsideUniverse(var))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, bool)> + '_ {
        self.values.iter().map(|(&v, &b)| (v, b))
    }
}

impl FromIterator<(Var, bool)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (Var, bool)>>(iter: I) -> Self {
        Assignment {
            values: iter.into_iter().collect(),
        }
    }
}

/// 64 assignments at once: lane `l` of word `w` is assignment `64·w + l`.
pub struct Lanes<'a> {
    universe: &'a [Var],
    masks: Vec<u64>,
    word: u64,
    valid: u64,
}

const LANE_PATTERN: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

impl<'a> Lanes<'a> {
    fn new(universe: &'a [Var]) -> Lanes<'a> {
        let width = universe.last().map_or(1, |v| v.index() as usize + 1);
        let n = universe.len();
        let valid = if n >= 6 { u64::MAX } else { (1u64 << (1u32 << n)) - 1 };
        Lanes {
            universe,
            masks: vec![0; width],
            word: 0,
            valid,
        }
    }

    fn word_count(&self) -> u64 {
        let n = self.universe.len();
        if n <= 6 {
            1
        } else {
            1u64 << (n - 6)
        }
    }

    fn load(&mut self, word: u64) {
        self.word = word;
        let n = self.universe.len();
        for (j, v) in self.universe.iter().enumerate() {
            let bit = n - 1 - j;
            self.masks[v.index() as usize] = if bit < 6 {
                LANE_PATTERN[bit]
            } else if (word >> (bit - 6)) & 1 == 1 {
                u64::MAX
            } else {
                0
            };
        }
    }

    /// Lane mask of `var`; variables outside the universe read as all-zero,
    /// callers check membership up front.
    pub fn mask(&self, var: Var) -> u64 {
        self.masks.get(var.index() as usize).copied().unwrap_or(0)
    }

    pub fn lit(&self, lit: Lit) -> u64 {
        let m = self.mask(lit.var());
        if lit.is_positive() {
            m
        } else {
            !m
        }
    }

    pub fn valid(&self) -> u64 {
        self.valid
    }

    pub fn assignment(&self, lane: u32) -> Assignment {
        Assignment::from_index(self.universe, self.word * 64 + u64::from(lane))
    }
}

/// A Boolean function the oracle can enumerate.
pub trait BoolFn {
    /// Every variable the function may read.
    fn vars(&self) -> BTreeSet<Var>;

    fn eval(&self, a: &Assignment) -> Result<bool>;

    /// Evaluates all lanes; bits outside `lanes.valid()` are ignored.
    fn eval_lanes(&self, lanes: &Lanes<'_>) -> Result<u64> {
        let mut out = 0u64;
        for lane in 0..64u32 {
            if (lanes.valid() >> lane) & 1 == 1 && self.eval(&lanes.assignment(lane))? {
                out |= 1 << lane;
            }
        }
        Ok(out)
    }
}

/// Value of the DAG under `a`. AND nodes conjoin, no-op nodes pass through.
pub fn eval(dag: &CircuitDag, a: &Assignment) -> Result<bool> {
    let order = dag.post_order()?;
    let mut value = vec![false; dag.len()];
    for id in order {
        value[id.0] = match dag.node(id) {
            Node::Sink(b) => *b,
            Node::Decision { var, children } => value[children[usize::from(a.value(*var)?)].0],
            Node::And(children) => children.iter().all(|c| value[c.0]),
            Node::NoOp(c) => value[c.0],
        };
    }
    Ok(value[dag.root().0])
}

/// A DAG prepared for repeated evaluation.
pub struct DagFn<'a> {
    dag: &'a CircuitDag,
    order: Vec<NodeId>,
    scratch: RefCell<Vec<u64>>,
}

impl<'a> DagFn<'a> {
    pub fn new(dag: &'a CircuitDag) -> Result<DagFn<'a>> {
        Ok(DagFn {
            dag,
            order: dag.post_order()?,
            scratch: RefCell::new(vec![0; dag.len()]),
        })
    }
}

impl BoolFn for DagFn<'_> {
    fn vars(&self) -> BTreeSet<Var> {
        self.order
            .iter()
            .filter_map(|&id| match self.dag.node(id) {
                Node::Decision { var, .. } => Some(*var),
                _ => None,
            })
            .collect()
    }

    fn eval(&self, a: &Assignment) -> Result<bool> {
        eval(self.dag, a)
    }

    fn eval_lanes(&self, lanes: &Lanes<'_>) -> Result<u64> {
        let mut value = self.scratch.borrow_mut();
        for &id in &self.order {
            value[id.0] = match self.dag.node(id) {
                Node::Sink(true) => u64::MAX,
                Node::Sink(false) => 0,
                Node::Decision { var, children } => {
                    let m = lanes.mask(*var);
                    (!m & value[children[0].0]) | (m & value[children[1].0])
                }
                Node::And(children) => children.iter().fold(u64::MAX, |acc, c| acc & value[c.0]),
                Node::NoOp(c) => value[c.0],
            };
        }
        Ok(value[self.dag.root().0])
    }
}

impl BoolFn for DnfFormula {
    fn vars(&self) -> BTreeSet<Var> {
        self.terms().iter().flatten().map(|l| l.var()).collect()
    }

    fn eval(&self, a: &Assignment) -> Result<bool> {
        for term in self.terms() {
            let mut sat = true;
            for lit in term {
                sat &= lit.eval(a.value(lit.var())?);
            }
            if sat {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn eval_lanes(&self, lanes: &Lanes<'_>) -> Result<u64> {
        Ok(self
            .terms()
            .iter()
            .map(|t| t.iter().fold(u64::MAX, |acc, &l| acc & lanes.lit(l)))
            .fold(0, |acc, t| acc | t))
    }
}

impl BoolFn for CnfFormula {
    fn vars(&self) -> BTreeSet<Var> {
        self.clauses().iter().flatten().map(|l| l.var()).collect()
    }

    fn eval(&self, a: &Assignment) -> Result<bool> {
        for clause in self.clauses() {
            let mut sat = false;
            for lit in clause {
                sat |= lit.eval(a.value(lit.var())?);
            }
            if !sat {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn eval_lanes(&self, lanes: &Lanes<'_>) -> Result<u64> {
        Ok(self
            .clauses()
            .iter()
            .map(|c| c.iter().fold(0, |acc, &l| acc | lanes.lit(l)))
            .fold(u64::MAX, |acc, c| acc & c))
    }
}

/// Black-box function given as a closure over assignments.
pub struct NativeFn<F> {
    vars: BTreeSet<Var>,
    f: F,
}

impl<F: Fn(&Assignment) -> bool> NativeFn<F> {
    pub fn new(vars: BTreeSet<Var>, f: F) -> NativeFn<F> {
        NativeFn { vars, f }
    }
}

impl<F: Fn(&Assignment) -> bool> BoolFn for NativeFn<F> {
    fn vars(&self) -> BTreeSet<Var> {
        self.vars.clone()
    }

    fn eval(&self, a: &Assignment) -> Result<bool> {
        Ok((self.f)(a))
    }
}

fn prepare(universe: &BTreeSet<Var>, cap: usize, fns: &[&dyn BoolFn]) -> Result<Vec<Var>> {
    if universe.len() > cap {
        return Err(Error::CapExceeded {
            size: universe.len(),
            cap,
        });
    }
    for f in fns {
        if let Some(&v) = f.vars().iter().find(|v| !universe.contains(v)) {
            return Err(Error::VarOutsideUniverse(v));
        }
    }
    Ok(universe.iter().copied().collect())
}

pub fn brute_count(f: &dyn BoolFn, universe: &BTreeSet<Var>) -> Result<ModelCount> {
    brute_count_capped(f, universe, DEFAULT_CAP)
}

pub fn brute_count_capped(f: &dyn BoolFn, universe: &BTreeSet<Var>, cap: usize) -> Result<ModelCount> {
    let vars = prepare(universe, cap, &[f])?;
    let mut lanes = Lanes::new(&vars);
    let mut total: u64 = 0;
    for w in 0..lanes.word_count() {
        lanes.load(w);
        total += u64::from((f.eval_lanes(&lanes)? & lanes.valid()).count_ones());
    }
    Ok(ModelCount {
        count: BigUint::from(total),
        universe_size: vars.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Equivalence {
    Equivalent,
    Counterexample(Assignment),
}

impl Equivalence {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Equivalence::Equivalent)
    }
}

pub fn equivalent(f: &dyn BoolFn, g: &dyn BoolFn, universe: &BTreeSet<Var>) -> Result<Equivalence> {
    equivalent_capped(f, g, universe, DEFAULT_CAP)
}

/// Returns the lexicographically first assignment on which `f` and `g`
/// differ, if any.
pub fn equivalent_capped(
    f: &dyn BoolFn,
    g: &dyn BoolFn,
    universe: &BTreeSet<Var>,
    cap: usize,
) -> Result<Equivalence> {
    let vars = prepare(universe, cap, &[f, g])?;
    let mut lanes = Lanes::new(&vars);
    for w in 0..lanes.word_count() {
        lanes.load(w);
        let diff = (f.eval_lanes(&lanes)? ^ g.eval_lanes(&lanes)?) & lanes.valid();
        if diff != 0 {
            return Ok(Equivalence::Counterexample(lanes.assignment(diff.trailing_zeros())));
        }
    }
    Ok(Equivalence::Equivalent)
}

/// Full truth table, one bool per assignment in lexicographic order.
pub fn truth_table(f: &dyn BoolFn, universe: &BTreeSet<Var>) -> Result<Vec<bool>> {
    let vars = prepare(universe, DEFAULT_CAP, &[f])?;
    let mut lanes = Lanes::new(&vars);
    let total = 1usize << vars.len();
    let mut table = Vec::with_capacity(total);
    for w in 0..lanes.word_count() {
        lanes.load(w);
        let bits = f.eval_lanes(&lanes)?;
        for lane in 0..64.min(total) {
            table.push((bits >> lane) & 1 == 1);
        }
    }
    Ok(table)
}
