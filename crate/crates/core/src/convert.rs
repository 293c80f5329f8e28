//! Decision-DNNF to FBDD translation.
//!
//! AND nodes are oriented so that the first ("light") child has no more AND
//! nodes below it than the second ("heavy") child. The FBDD is then built
//! over pairs `(u, s)` where `u` is a node of the decision-DNNF and `s` the
//! ordered set of light edges taken on the way to `u`:
//!
//! * a light edge `e = (u, v)` leads from `(u, s)` to `(v, s + e)`,
//! * a decision edge `(u, v)` leads from `(u, s)` to `(v, s)`,
//! * a 1-sink copy `(w, s)` with `s` non-empty becomes a no-op that jumps to
//!   `(v', s - e)`, where `e = (z, _)` is the last light edge of `s` and `v'`
//!   the heavy child of `z`.
//!
//! AND nodes become no-op nodes, which are contracted at the end.

use std::collections::{BTreeSet, HashMap, VecDeque};

use fixedbitset::FixedBitSet;
use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::circuit::{self, CircuitDag, Flavor, Node, NodeId, ValidationReport};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeClass {
    Light,
    Heavy,
    Neutral,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AndCounts {
    /// Number of AND nodes in the sub-DAG rooted at each node.
    pub below: Vec<usize>,
    /// Total number of AND nodes.
    pub total: usize,
    /// Largest number of light edges on a root-to-leaf path.
    pub light_depth: usize,
}

/// A normalized decision-DNNF with its AND children oriented light-first.
#[derive(Clone, Debug)]
pub struct Classified {
    dag: CircuitDag,
    counts: AndCounts,
}

impl Classified {
    pub fn dag(&self) -> &CircuitDag {
        &self.dag
    }

    pub fn counts(&self) -> &AndCounts {
        &self.counts
    }

    pub fn edge_class(&self, node: NodeId, slot: usize) -> EdgeClass {
        match self.dag.node(node) {
            Node::And(_) if slot == 0 => EdgeClass::Light,
            Node::And(_) => EdgeClass::Heavy,
            _ => EdgeClass::Neutral,
        }
    }

    pub fn light_child(&self, and: NodeId) -> Option<NodeId> {
        match self.dag.node(and) {
            Node::And(c) => Some(c[0]),
            _ => None,
        }
    }

    pub fn heavy_child(&self, and: NodeId) -> Option<NodeId> {
        match self.dag.node(and) {
            Node::And(c) => Some(c[1]),
            _ => None,
        }
    }
}

fn require_binary_dnnf(dag: &CircuitDag) -> Result<()> {
    let report = circuit::validate(&dag.clone().with_flavor(Flavor::DecisionDnnf));
    if !report.ok() {
        return Err(Error::Invalid(report));
    }
    if dag.nodes().iter().any(|n| matches!(n, Node::And(c) if c.len() != 2)) {
        return Err(Error::Unsupported("AND nodes must be binary; normalize first".into()));
    }
    Ok(())
}

/// Counts AND nodes below every node, orients each AND node so that its
/// first child carries no more AND nodes than its second (ties keep the
/// given order), and computes the light depth. Works on a private copy.
pub fn classify_and_order(dag: &CircuitDag) -> Result<Classified> {
    require_binary_dnnf(dag)?;

    let and_ids: Vec<usize> = (0..dag.len()).filter(|&i| dag.nodes()[i].is_and()).collect();
    let mut and_index = vec![usize::MAX; dag.len()];
    for (k, &i) in and_ids.iter().enumerate() {
        and_index[i] = k;
    }

    let order = dag.post_order_all()?;
    let mut reach: Vec<FixedBitSet> = vec![FixedBitSet::new(); dag.len()];
    for &id in &order {
        let mut acc = FixedBitSet::with_capacity(and_ids.len());
        for c in dag.node(id).children() {
            acc.union_with(&reach[c.0]);
        }
        if and_index[id.0] != usize::MAX {
            acc.insert(and_index[id.0]);
        }
        reach[id.0] = acc;
    }
    let below: Vec<usize> = reach.iter().map(|r| r.count_ones(..)).collect();
    drop(reach);

    let (mut nodes, root, universe, flavor) = dag.clone().into_parts();
    for node in nodes.iter_mut() {
        if let Node::And(c) = node {
            if below[c[0].0] > below[c[1].0] {
                c.swap(0, 1);
            }
        }
    }

    let mut light = vec![0usize; nodes.len()];
    for &id in &order {
        light[id.0] = match &nodes[id.0] {
            Node::And(c) => (light[c[0].0] + 1).max(light[c[1].0]),
            other => other.children().iter().map(|c| light[c.0]).max().unwrap_or(0),
        };
    }

    let reachable = dag.post_order()?;
    let total = reachable.iter().filter(|id| dag.node(**id).is_and()).count();
    let counts = AndCounts {
        total,
        light_depth: light[root.0],
        below,
    };
    Ok(Classified {
        dag: CircuitDag::from_parts_unchecked(nodes, root, universe, flavor),
        counts,
    })
}

/// Light edges in path order, each identified by the AND node it leaves.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LightEdgeSet(pub Vec<NodeId>);

impl LightEdgeSet {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn ands(&self) -> &[NodeId] {
        &self.0
    }

    pub fn sorted(&self) -> Vec<NodeId> {
        let mut v = self.0.clone();
        v.sort();
        v
    }
}

type SetId = u32;
const EMPTY_SET: SetId = 0;

struct SetEntry {
    prefix: SetId,
    last: Option<NodeId>,
}

/// Interned light-edge sequences forming a prefix trie.
struct SetTable {
    entries: Vec<SetEntry>,
    extend: HashMap<(SetId, NodeId), SetId>,
    by_content: HashMap<Vec<NodeId>, SetId>,
}

impl SetTable {
    fn new() -> SetTable {
        let mut by_content = HashMap::new();
        by_content.insert(Vec::new(), EMPTY_SET);
        SetTable {
            entries: vec![SetEntry {
                prefix: EMPTY_SET,
                last: None,
            }],
            extend: HashMap::new(),
            by_content,
        }
    }

    fn sequence(&self, mut id: SetId) -> Vec<NodeId> {
        let mut seq = Vec::new();
        while let Some(last) = self.entries[id as usize].last {
            seq.push(last);
            id = self.entries[id as usize].prefix;
        }
        seq.reverse();
        seq
    }

    fn push(&mut self, prefix: SetId, and: NodeId) -> Result<SetId> {
        if let Some(&id) = self.extend.get(&(prefix, and)) {
            return Ok(id);
        }
        let seq = {
            let mut s = self.sequence(prefix);
            if s.contains(&and) {
                return Err(Error::Invariant(format!(
                    "light edge of {and} taken twice on one path"
                )));
            }
            s.push(and);
            s
        };
        let mut content = seq.clone();
        content.sort();
        let id = SetId::try_from(self.entries.len())
            .map_err(|_| Error::Invariant("too many light-edge sets".into()))?;
        if let Some(&other) = self.by_content.get(&content) {
            return Err(Error::Invariant(format!(
                "light-edge set {:?} reached in two orders: {:?} and {:?}",
                content,
                self.sequence(other),
                seq
            )));
        }
        self.entries.push(SetEntry {
            prefix,
            last: Some(and),
        });
        self.extend.insert((prefix, and), id);
        self.by_content.insert(content, id);
        Ok(id)
    }
}

/// Serialized as a decimal string.
fn big_as_string<S: Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConvertReport {
    /// Nodes of the (normalized) decision-DNNF.
    #[serde(rename = "N")]
    pub nodes: usize,
    /// AND nodes.
    #[serde(rename = "M")]
    pub ands: usize,
    /// Light depth.
    #[serde(rename = "L")]
    pub light_depth: usize,
    pub out_nodes_with_noops: usize,
    pub out_nodes_final: usize,
    #[serde(serialize_with = "big_as_string")]
    pub bound: BigUint,
    #[serde(serialize_with = "big_as_string")]
    pub quasipoly_bound: BigUint,
    /// `N` times the number of light-edge sets of size at most `L`.
    #[serde(serialize_with = "big_as_string")]
    pub set_bound: BigUint,
}

impl ConvertReport {
    fn new(nodes: usize, ands: usize, light_depth: usize) -> ConvertReport {
        ConvertReport {
            nodes,
            ands,
            light_depth,
            out_nodes_with_noops: 0,
            out_nodes_final: 0,
            bound: size_bound(nodes, ands, light_depth),
            quasipoly_bound: quasipoly_bound(nodes),
            set_bound: set_bound(nodes, ands, light_depth),
        }
    }

    pub fn within_bound(&self) -> bool {
        BigUint::from(self.out_nodes_with_noops) <= self.bound
    }

    pub fn within_set_bound(&self) -> bool {
        BigUint::from(self.out_nodes_with_noops) <= self.set_bound
    }

    pub fn within_quasipoly_bound(&self) -> bool {
        BigUint::from(self.out_nodes_with_noops) <= self.quasipoly_bound
    }

    /// `2^L ≤ M + 1`.
    pub fn light_depth_ok(&self) -> bool {
        (BigUint::one() << self.light_depth) <= BigUint::from(self.ands) + 1u8
    }
}

/// `N · M^L`, with `0^0 = 1`.
pub fn size_bound(nodes: usize, ands: usize, light_depth: usize) -> BigUint {
    let l = u32::try_from(light_depth).expect("light depth fits in u32");
    BigUint::from(nodes) * BigUint::from(ands).pow(l)
}

/// `N · Σ_{i≤L} C(M, i)`. Each output node is a pair `(u, s)` with `s` a set
/// of at most `L` light edges, so this always holds. It exceeds `N · M^L`
/// when `L ≤ 1`.
pub fn set_bound(nodes: usize, ands: usize, light_depth: usize) -> BigUint {
    let mut sets = BigUint::zero();
    let mut binom = BigUint::one();
    for i in 0..=light_depth.min(ands) {
        sets += &binom;
        binom = binom * BigUint::from(ands - i) / BigUint::from(i + 1);
    }
    BigUint::from(nodes) * sets
}

/// `N · 2^⌊log₂² N⌋`. Rounding the exponent down keeps this at or below
/// the real-valued bound, so passing it implies passing the exact one.
pub fn quasipoly_bound(nodes: usize) -> BigUint {
    if nodes == 0 {
        return BigUint::zero();
    }
    let lg = (nodes as f64).log2();
    let mut exp = (lg * lg).floor() as usize;
    // Guard against the float landing one above the true floor.
    if (exp as f64) > lg * lg {
        exp -= 1;
    }
    BigUint::from(nodes) << exp
}

/// Output of the product construction, before no-op contraction.
#[derive(Clone, Debug)]
pub struct ProductFbdd {
    pub dag: CircuitDag,
    /// Source node `u` of every output node `(u, s)`.
    pub origin: Vec<NodeId>,
    sets: Vec<Vec<NodeId>>,
    set_of: Vec<SetId>,
}

impl ProductFbdd {
    pub fn light_set(&self, out: NodeId) -> LightEdgeSet {
        LightEdgeSet(self.sets[self.set_of[out.0] as usize].clone())
    }

    /// Number of copies `(u, s)` made of input node `u`.
    pub fn copies_of(&self, u: NodeId) -> usize {
        self.origin.iter().filter(|&&o| o == u).count()
    }
}

/// Builds the FBDD-with-no-ops over reachable `(u, s)` pairs, breadth-first
/// from `(root, ∅)`. Every 1-sink of the input must have a single incoming
/// edge.
pub fn to_fbdd(classified: &Classified) -> Result<(ProductFbdd, ConvertReport)> {
    let dag = classified.dag();
    if !circuit::is_normalized(dag) {
        return Err(Error::Unsupported(
            "input must be normalized (binary ANDs, unshared 1-sinks)".into(),
        ));
    }

    let mut table = SetTable::new();
    let mut memo: HashMap<(NodeId, SetId), NodeId> = HashMap::new();
    let mut nodes: Vec<Node> = Vec::new();
    let mut origin: Vec<NodeId> = Vec::new();
    let mut set_of: Vec<SetId> = Vec::new();
    let mut queue: VecDeque<NodeId> = VecDeque::new();

    let mut intern = |u: NodeId,
                      s: SetId,
                      nodes: &mut Vec<Node>,
                      origin: &mut Vec<NodeId>,
                      set_of: &mut Vec<SetId>,
                      queue: &mut VecDeque<NodeId>| {
        *memo.entry((u, s)).or_insert_with(|| {
            let id = NodeId(nodes.len());
            nodes.push(Node::Sink(false));
            origin.push(u);
            set_of.push(s);
            queue.push_back(id);
            id
        })
    };

    let root = intern(dag.root(), EMPTY_SET, &mut nodes, &mut origin, &mut set_of, &mut queue);
    while let Some(out) = queue.pop_front() {
        let (u, s) = (origin[out.0], set_of[out.0]);
        let node = match dag.node(u) {
            Node::Decision { var, children } => {
                let lo = intern(children[0], s, &mut nodes, &mut origin, &mut set_of, &mut queue);
                let hi = intern(children[1], s, &mut nodes, &mut origin, &mut set_of, &mut queue);
                Node::decision(*var, lo, hi)
            }
            Node::And(children) => {
                let extended = table.push(s, u)?;
                let next = intern(children[0], extended, &mut nodes, &mut origin, &mut set_of, &mut queue);
                Node::NoOp(next)
            }
            Node::Sink(false) => Node::Sink(false),
            Node::Sink(true) if s == EMPTY_SET => Node::Sink(true),
            Node::Sink(true) => {
                let entry = &table.entries[s as usize];
                let z = entry.last.expect("non-empty set has a last edge");
                let prefix = entry.prefix;
                let heavy = classified
                    .heavy_child(z)
                    .ok_or_else(|| Error::Invariant(format!("{z} is not an AND node")))?;
                let next = intern(heavy, prefix, &mut nodes, &mut origin, &mut set_of, &mut queue);
                Node::NoOp(next)
            }
            Node::NoOp(_) => {
                return Err(Error::Unsupported("no-op node in a decision-DNNF".into()));
            }
        };
        nodes[out.0] = node;
    }

    let mut report = ConvertReport::new(
        dag.reachable_count()?,
        classified.counts().total,
        classified.counts().light_depth,
    );
    report.out_nodes_with_noops = nodes.len();

    let sets = (0..table.entries.len() as SetId).map(|id| table.sequence(id)).collect();
    let out = CircuitDag::from_parts_unchecked(nodes, root, dag.universe().clone(), Flavor::FbddWithNoops);
    Ok((
        ProductFbdd {
            dag: out,
            origin,
            sets,
            set_of,
        },
        report,
    ))
}

/// Intermediate results of [`convert`], kept for inspection.
#[derive(Clone, Debug)]
pub struct Conversion {
    pub normalized: CircuitDag,
    pub classified: Classified,
    pub product: ProductFbdd,
    pub fbdd: CircuitDag,
    pub report: ConvertReport,
}

/// normalize → classify_and_order → to_fbdd → eliminate_noops.
pub fn convert(dag: &CircuitDag) -> Result<(CircuitDag, ConvertReport)> {
    let c = convert_detailed(dag)?;
    Ok((c.fbdd, c.report))
}

pub fn convert_detailed(dag: &CircuitDag) -> Result<Conversion> {
    let normalized = circuit::normalize(dag)?;
    let classified = classify_and_order(&normalized)?;
    let (product, mut report) = to_fbdd(&classified)?;
    let fbdd = circuit::eliminate_noops(&product.dag)?;
    report.out_nodes_final = fbdd.len();
    Ok(Conversion {
        normalized,
        classified,
        product,
        fbdd,
        report,
    })
}

/// Largest number of AND nodes on any root-to-leaf path.
pub fn max_ands_on_path(dag: &CircuitDag) -> Result<usize> {
    let report: ValidationReport = circuit::validate(&dag.clone().with_flavor(Flavor::DecisionDnnf));
    if report.has(circuit::Rule::Acyclic) {
        return Err(Error::Invalid(report));
    }
    let mut ands = vec![0usize; dag.len()];
    for id in dag.post_order()? {
        let node = dag.node(id);
        let below = node.children().iter().map(|c| ands[c.0]).max().unwrap_or(0);
        ands[id.0] = below + usize::from(node.is_and());
    }
    Ok(ands[dag.root().0])
}

/// Distinct light-edge sets among the output copies of `u`.
pub fn light_sets_of(product: &ProductFbdd, u: NodeId) -> BTreeSet<Vec<NodeId>> {
    product
        .origin
        .iter()
        .enumerate()
        .filter(|(_, &o)| o == u)
        .map(|(i, _)| product.light_set(NodeId(i)).sorted())
        .collect()
}
