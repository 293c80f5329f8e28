//! Model counting and weighted probability on FBDDs and decision-DNNFs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{Num, One, Zero};

use crate::circuit::{CircuitDag, Node, Var};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelCount {
    pub count: BigUint,
    pub universe_size: usize,
}

impl fmt::Display for ModelCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.count)
    }
}

/// Per-variable probability of being true.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMap<T> {
    p: BTreeMap<Var, T>,
}

impl<T> WeightMap<T> {
    pub fn get(&self, var: Var) -> Result<&T> {
        self.p.get(&var).ok_or(Error::MissingWeight(var))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, &T)> {
        self.p.iter().map(|(&v, w)| (v, w))
    }
}

impl<T: Num + Clone + PartialOrd> WeightMap<T> {
    pub fn new(p: BTreeMap<Var, T>) -> Result<WeightMap<T>> {
        for (var, w) in &p {
            if *w < T::zero() || *w > T::one() {
                return Err(Error::WeightOutOfRange(*var));
            }
        }
        Ok(WeightMap { p })
    }

    pub fn uniform<'a>(vars: impl IntoIterator<Item = &'a Var>, value: T) -> Result<WeightMap<T>> {
        WeightMap::new(vars.into_iter().map(|&v| (v, value.clone())).collect())
    }

    /// Copy with `var` set to `value`.
    pub fn with(&self, var: Var, value: T) -> Result<WeightMap<T>> {
        let mut p = self.p.clone();
        p.insert(var, value);
        WeightMap::new(p)
    }
}

fn probability<T: Num + Clone>(dag: &CircuitDag, w: &WeightMap<T>, allow_and: bool) -> Result<T> {
    let order = dag.post_order()?;
    let mut value: Vec<Option<T>> = vec![None; dag.len()];
    for id in order {
        let v = match dag.node(id) {
            Node::Sink(true) => T::one(),
            Node::Sink(false) => T::zero(),
            Node::Decision { var, children } => {
                let p = w.get(*var)?.clone();
                let lo = value[children[0].0].clone().expect("child evaluated first");
                let hi = value[children[1].0].clone().expect("child evaluated first");
                (T::one() - p.clone()) * lo + p * hi
            }
            Node::NoOp(c) => value[c.0].clone().expect("child evaluated first"),
            Node::And(children) => {
                if !allow_and {
                    return Err(Error::Unsupported("AND node in an FBDD".into()));
                }
                children.iter().fold(T::one(), |acc, c| {
                    acc * value[c.0].clone().expect("child evaluated first")
                })
            }
        };
        value[id.0] = Some(v);
    }
    Ok(value[dag.root().0].take().expect("root evaluated"))
}

/// Probability that an FBDD (possibly with no-op nodes) evaluates to 1 when
/// each variable is independently true with its weight. Linear in the DAG.
pub fn prob_fbdd<T: Num + Clone>(dag: &CircuitDag, w: &WeightMap<T>) -> Result<T> {
    probability(dag, w, false)
}

/// Same dynamic program with AND nodes multiplying their children, which is
/// exact when AND children share no variables.
pub fn prob_dnnf<T: Num + Clone>(dag: &CircuitDag, w: &WeightMap<T>) -> Result<T> {
    probability(dag, w, true)
}

fn check_universe(dag: &CircuitDag, universe: &BTreeSet<Var>) -> Result<()> {
    for v in dag.support()? {
        if !universe.contains(&v) {
            return Err(Error::VarOutsideUniverse(v));
        }
    }
    Ok(())
}

fn halve(sum: BigUint) -> Result<BigUint> {
    let (q, r) = sum.div_rem(&BigUint::from(2u8));
    if !r.is_zero() {
        return Err(Error::Invariant(
            "odd count under a decision node; the circuit is not read-once".into(),
        ));
    }
    Ok(q)
}

fn count(dag: &CircuitDag, universe: &BTreeSet<Var>, allow_and: bool) -> Result<ModelCount> {
    check_universe(dag, universe)?;
    let full = BigUint::one() << universe.len();
    let order = dag.post_order()?;
    let mut value: Vec<Option<BigUint>> = vec![None; dag.len()];
    for id in order {
        let c = match dag.node(id) {
            Node::Sink(true) => full.clone(),
            Node::Sink(false) => BigUint::zero(),
            Node::Decision { children, .. } => {
                let lo = value[children[0].0].as_ref().expect("child evaluated first");
                let hi = value[children[1].0].as_ref().expect("child evaluated first");
                halve(lo + hi)?
            }
            Node::NoOp(c) => value[c.0].clone().expect("child evaluated first"),
            Node::And(children) => {
                if !allow_and {
                    return Err(Error::Unsupported("AND node in an FBDD".into()));
                }
                let mut acc = full.clone();
                for c in children {
                    let prod = acc * value[c.0].as_ref().expect("child evaluated first");
                    let (q, r) = prod.div_rem(&full);
                    if !r.is_zero() {
                        return Err(Error::Invariant(
                            "inexact AND count; children are not variable-disjoint".into(),
                        ));
                    }
                    acc = q;
                }
                acc
            }
        };
        value[id.0] = Some(c);
    }
    Ok(ModelCount {
        count: value[dag.root().0].take().expect("root evaluated"),
        universe_size: universe.len(),
    })
}

/// Exact number of satisfying assignments over `universe`.
pub fn count_fbdd(dag: &CircuitDag, universe: &BTreeSet<Var>) -> Result<ModelCount> {
    count(dag, universe, false)
}

pub fn count_dnnf(dag: &CircuitDag, universe: &BTreeSet<Var>) -> Result<ModelCount> {
    count(dag, universe, true)
}
