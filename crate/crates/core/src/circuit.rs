//! Flat, index-based DAGs of decision, AND, no-op and sink nodes.
//!
//! The same representation backs FBDDs (with or without no-op nodes),
//! AND-FBDDs and decision-DNNFs; the [`Flavor`] tag says which node kinds are
//! allowed. Nodes reference their children by [`NodeId`], children may sit at
//! any index, and a DAG value is never mutated once built.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};

/// A Boolean variable, identified by a positive index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    pub fn new(index: u32) -> Result<Var> {
        if index == 0 {
            return Err(Error::ZeroVar);
        }
        Ok(Var(index))
    }

    /// Panics on index 0; meant for literals in code and tests.
    pub const fn from_index(index: u32) -> Var {
        assert!(index > 0, "variable indices start at 1");
        Var(index)
    }

    pub const fn index(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl NodeId {
    pub const fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    /// Tests `var`; `children[0]` is the 0-branch, `children[1]` the 1-branch.
    Decision { var: Var, children: [NodeId; 2] },
    /// Conjunction of the children. Binary after [`normalize`].
    And(Vec<NodeId>),
    /// Unlabeled pass-through node with exactly one child.
    NoOp(NodeId),
    Sink(bool),
}

impl Node {
    pub fn decision(var: Var, lo: NodeId, hi: NodeId) -> Node {
        Node::Decision {
            var,
            children: [lo, hi],
        }
    }

    pub fn children(&self) -> &[NodeId] {
        match self {
            Node::Decision { children, .. } => children,
            Node::And(children) => children,
            Node::NoOp(child) => std::slice::from_ref(child),
            Node::Sink(_) => &[],
        }
    }

    fn children_mut(&mut self) -> &mut [NodeId] {
        match self {
            Node::Decision { children, .. } => children,
            Node::And(children) => children,
            Node::NoOp(child) => std::slice::from_mut(child),
            Node::Sink(_) => &mut [],
        }
    }

    pub fn is_and(&self) -> bool {
        matches!(self, Node::And(_))
    }

    pub fn is_noop(&self) -> bool {
        matches!(self, Node::NoOp(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Flavor {
    Fbdd,
    FbddWithNoops,
    DecisionDnnf,
    AndFbdd,
}

impl Flavor {
    fn allows(self, node: &Node) -> bool {
        !matches!(
            (self, node),
            (Flavor::Fbdd, Node::And(_) | Node::NoOp(_))
                | (Flavor::FbddWithNoops, Node::And(_))
                | (Flavor::DecisionDnnf | Flavor::AndFbdd, Node::NoOp(_))
        )
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Flavor::Fbdd => "FBDD",
            Flavor::FbddWithNoops => "FBDD with no-op nodes",
            Flavor::DecisionDnnf => "decision-DNNF",
            Flavor::AndFbdd => "AND-FBDD",
        };
        f.write_str(name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircuitDag {
    nodes: Vec<Node>,
    root: NodeId,
    universe: BTreeSet<Var>,
    flavor: Flavor,
}

impl CircuitDag {
    /// Checks that every child reference and the root exist and that every
    /// tested variable belongs to `universe`. Cycles are accepted here and
    /// reported by [`validate`].
    pub fn new(
        nodes: Vec<Node>,
        root: NodeId,
        universe: BTreeSet<Var>,
        flavor: Flavor,
    ) -> Result<CircuitDag> {
        if root.0 >= nodes.len() {
            return Err(Error::BadRoot(root.0));
        }
        for (i, node) in nodes.iter().enumerate() {
            for child in node.children() {
                if child.0 >= nodes.len() {
                    return Err(Error::DanglingChild {
                        node: i,
                        child: child.0,
                    });
                }
            }
            if let Node::Decision { var, .. } = node {
                if !universe.contains(var) {
                    return Err(Error::VarOutsideUniverse(*var));
                }
            }
        }
        Ok(CircuitDag {
            nodes,
            root,
            universe,
            flavor,
        })
    }

    /// Like [`CircuitDag::new`], taking the universe to be the tested variables.
    pub fn with_tested_universe(nodes: Vec<Node>, root: NodeId, flavor: Flavor) -> Result<Self> {
        let universe = nodes
            .iter()
            .filter_map(|n| match n {
                Node::Decision { var, .. } => Some(*var),
                _ => None,
            })
            .collect();
        CircuitDag::new(nodes, root, universe, flavor)
    }

    pub fn constant(value: bool, universe: BTreeSet<Var>, flavor: Flavor) -> CircuitDag {
        CircuitDag {
            nodes: vec![Node::Sink(value)],
            root: NodeId(0),
            universe,
            flavor,
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn universe(&self) -> &BTreeSet<Var> {
        &self.universe
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn and_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_and()).count()
    }

    pub fn with_flavor(mut self, flavor: Flavor) -> CircuitDag {
        self.flavor = flavor;
        self
    }

    /// Replaces the universe; it must still cover every tested variable.
    pub fn with_universe(self, universe: BTreeSet<Var>) -> Result<CircuitDag> {
        CircuitDag::new(self.nodes, self.root, universe, self.flavor)
    }

    pub(crate) fn from_parts_unchecked(
        nodes: Vec<Node>,
        root: NodeId,
        universe: BTreeSet<Var>,
        flavor: Flavor,
    ) -> CircuitDag {
        debug_assert!(root.0 < nodes.len());
        CircuitDag {
            nodes,
            root,
            universe,
            flavor,
        }
    }

    pub(crate) fn into_parts(self) -> (Vec<Node>, NodeId, BTreeSet<Var>, Flavor) {
        (self.nodes, self.root, self.universe, self.flavor)
    }

    /// Variables tested by nodes reachable from the root.
    pub fn support(&self) -> Result<BTreeSet<Var>> {
        Ok(self
            .post_order()?
            .into_iter()
            .filter_map(|id| match self.node(id) {
                Node::Decision { var, .. } => Some(*var),
                _ => None,
            })
            .collect())
    }

    /// Nodes reachable from the root, children before parents.
    pub fn post_order(&self) -> Result<Vec<NodeId>> {
        let mut state = vec![Mark::New; self.nodes.len()];
        let mut order = Vec::new();
        self.dfs_from(self.root, &mut state, &mut order)
            .map_err(|cycle| Error::Cycle(cycle[0]))?;
        Ok(order)
    }

    /// Every node (reachable or not), children before parents.
    pub fn post_order_all(&self) -> Result<Vec<NodeId>> {
        let mut state = vec![Mark::New; self.nodes.len()];
        let mut order = Vec::with_capacity(self.nodes.len());
        for start in 0..self.nodes.len() {
            if state[start] == Mark::New {
                self.dfs_from(NodeId(start), &mut state, &mut order)
                    .map_err(|cycle| Error::Cycle(cycle[0]))?;
            }
        }
        Ok(order)
    }

    pub fn reachable_count(&self) -> Result<usize> {
        Ok(self.post_order()?.len())
    }

    /// Iterative DFS. On a back edge returns the cycle as a node path.
    fn dfs_from(
        &self,
        start: NodeId,
        state: &mut [Mark],
        order: &mut Vec<NodeId>,
    ) -> std::result::Result<(), Vec<NodeId>> {
        if state[start.0] != Mark::New {
            return Ok(());
        }
        let mut stack: Vec<(NodeId, usize)> = vec![(start, 0)];
        state[start.0] = Mark::Open;
        while let Some(&mut (id, ref mut next)) = stack.last_mut() {
            let children = self.nodes[id.0].children();
            if *next < children.len() {
                let child = children[*next];
                *next += 1;
                match state[child.0] {
                    Mark::New => {
                        state[child.0] = Mark::Open;
                        stack.push((child, 0));
                    }
                    Mark::Open => {
                        let pos = stack.iter().position(|(n, _)| *n == child).unwrap_or(0);
                        let mut cycle: Vec<NodeId> = stack[pos..].iter().map(|(n, _)| *n).collect();
                        cycle.push(child);
                        return Err(cycle);
                    }
                    Mark::Done => {}
                }
            } else {
                state[id.0] = Mark::Done;
                order.push(id);
                stack.pop();
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mark {
    New,
    Open,
    Done,
}

/// For each node, the set of variables tested in the sub-DAG below it.
#[derive(Clone, Debug)]
pub struct VarsBelow {
    sets: Vec<FixedBitSet>,
}

impl VarsBelow {
    pub fn contains(&self, node: NodeId, var: Var) -> bool {
        self.sets[node.0].contains(var.0 as usize)
    }

    pub fn vars(&self, node: NodeId) -> impl Iterator<Item = Var> + '_ {
        self.sets[node.0].ones().map(|i| Var(i as u32))
    }

    pub fn to_set(&self, node: NodeId) -> BTreeSet<Var> {
        self.vars(node).collect()
    }

    pub fn bits(&self, node: NodeId) -> &FixedBitSet {
        &self.sets[node.0]
    }

    pub fn len(&self, node: NodeId) -> usize {
        self.sets[node.0].count_ones(..)
    }

    pub fn is_empty(&self, node: NodeId) -> bool {
        self.sets[node.0].is_clear()
    }
}

pub fn vars_below(dag: &CircuitDag) -> Result<VarsBelow> {
    let width = dag.universe.iter().next_back().map_or(1, |v| v.0 as usize + 1);
    let order = dag.post_order_all()?;
    let mut sets = vec![FixedBitSet::with_capacity(width); dag.nodes.len()];
    for id in order {
        let mut acc = FixedBitSet::with_capacity(width);
        for child in dag.nodes[id.0].children() {
            acc.union_with(&sets[child.0]);
        }
        if let Node::Decision { var, .. } = &dag.nodes[id.0] {
            acc.insert(var.0 as usize);
        }
        sets[id.0] = acc;
    }
    Ok(VarsBelow { sets })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    Acyclic,
    NodeKind,
    ReadOnce,
    Decomposability,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Rule::Acyclic => "acyclicity",
            Rule::NodeKind => "node kind",
            Rule::ReadOnce => "read-once",
            Rule::Decomposability => "decomposability",
        };
        f.write_str(name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    Path(Vec<NodeId>),
    Nodes(NodeId, NodeId),
    Node(NodeId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub rule: Rule,
    pub witness: Witness,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, rule: Rule) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{} violated at ", v.rule)?;
            match &v.witness {
                Witness::Path(path) => {
                    let path: Vec<String> = path.iter().map(ToString::to_string).collect();
                    write!(f, "path {}", path.join(" -> "))?;
                }
                Witness::Nodes(a, b) => write!(f, "nodes {a} and {b}")?,
                Witness::Node(a) => write!(f, "node {a}")?,
            }
        }
        Ok(())
    }
}

/// Checks the DAG against the rules of its flavor. Only nodes reachable from
/// the root are inspected.
pub fn validate(dag: &CircuitDag) -> ValidationReport {
    let mut report = ValidationReport::default();

    let mut state = vec![Mark::New; dag.nodes.len()];
    let mut reachable = Vec::new();
    if let Err(cycle) = dag.dfs_from(dag.root, &mut state, &mut reachable) {
        report.violations.push(Violation {
            rule: Rule::Acyclic,
            witness: Witness::Path(cycle),
        });
        return report;
    }

    for &id in &reachable {
        if !dag.flavor.allows(dag.node(id)) {
            report.violations.push(Violation {
                rule: Rule::NodeKind,
                witness: Witness::Node(id),
            });
        }
    }

    let below = reachable_vars_below(dag, &reachable);

    for &id in &reachable {
        match dag.node(id) {
            Node::Decision { var, children } => {
                for &child in children {
                    if below.contains(child, *var) {
                        let mut path = vec![id];
                        path.extend(path_to_test(dag, &below, child, *var));
                        report.violations.push(Violation {
                            rule: Rule::ReadOnce,
                            witness: Witness::Path(path),
                        });
                        break;
                    }
                }
            }
            Node::And(children) if dag.flavor == Flavor::DecisionDnnf => {
                'pairs: for (i, &left) in children.iter().enumerate() {
                    for &right in &children[i + 1..] {
                        let mut shared = below.bits(left).clone();
                        shared.intersect_with(below.bits(right));
                        if let Some(bit) = shared.ones().next() {
                            let var = Var(bit as u32);
                            let a = *path_to_test(dag, &below, left, var).last().unwrap();
                            let b = *path_to_test(dag, &below, right, var).last().unwrap();
                            report.violations.push(Violation {
                                rule: Rule::Decomposability,
                                witness: Witness::Nodes(a, b),
                            });
                            break 'pairs;
                        }
                    }
                }
            }
            _ => {}
        }
    }
    report
}

fn reachable_vars_below(dag: &CircuitDag, post_order: &[NodeId]) -> VarsBelow {
    let width = dag.universe.iter().next_back().map_or(1, |v| v.0 as usize + 1);
    let mut sets = vec![FixedBitSet::new(); dag.nodes.len()];
    for &id in post_order {
        let mut acc = FixedBitSet::with_capacity(width);
        for child in dag.nodes[id.0].children() {
            acc.union_with(&sets[child.0]);
        }
        if let Node::Decision { var, .. } = &dag.nodes[id.0] {
            acc.insert(var.0 as usize);
        }
        sets[id.0] = acc;
    }
    VarsBelow { sets }
}

/// Path from `from` to some decision node on `var`; requires `var ∈ below(from)`.
fn path_to_test(dag: &CircuitDag, below: &VarsBelow, from: NodeId, var: Var) -> Vec<NodeId> {
    let mut path = vec![from];
    let mut at = from;
    loop {
        match dag.node(at) {
            Node::Decision { var: v, .. } if *v == var => return path,
            node => {
                let next = node
                    .children()
                    .iter()
                    .copied()
                    .find(|c| below.contains(*c, var))
                    .expect("variable recorded below node must be reachable through a child");
                path.push(next);
                at = next;
            }
        }
    }
}

/// Binarizes n-ary AND nodes into right-deep chains and gives every 1-sink
/// at most one incoming edge. Unreachable nodes are dropped; the surviving
/// nodes keep their relative order and new nodes are appended, so an already
/// normalized DAG comes back unchanged.
pub fn normalize(dag: &CircuitDag) -> Result<CircuitDag> {
    let report = validate(&dag.clone().with_flavor(Flavor::DecisionDnnf));
    if !report.ok() {
        return Err(Error::Invalid(report));
    }

    // And() is true, And(c) is c.
    let mut alias: Vec<NodeId> = (0..dag.nodes.len()).map(NodeId).collect();
    let order = dag.post_order()?;
    for &id in &order {
        if let Node::And(children) = dag.node(id) {
            if children.len() == 1 {
                alias[id.0] = alias[children[0].0];
            }
        }
    }
    let resolve = |id: NodeId| alias[id.0];

    let root = resolve(dag.root);
    let mut reachable = vec![false; dag.nodes.len()];
    let mut stack = vec![root];
    reachable[root.0] = true;
    while let Some(id) = stack.pop() {
        for &c in dag.node(id).children() {
            let c = resolve(c);
            if !reachable[c.0] {
                reachable[c.0] = true;
                stack.push(c);
            }
        }
    }

    let mut remap = vec![NodeId(usize::MAX); dag.nodes.len()];
    let mut nodes: Vec<Node> = Vec::new();
    for (i, node) in dag.nodes.iter().enumerate() {
        if reachable[i] {
            remap[i] = NodeId(nodes.len());
            nodes.push(match node {
                Node::And(children) if children.is_empty() => Node::Sink(true),
                other => other.clone(),
            });
        }
    }
    for node in nodes.iter_mut() {
        for c in node.children_mut() {
            *c = remap[resolve(*c).0];
        }
    }

    let kept = nodes.len();
    for i in 0..kept {
        if let Node::And(children) = &nodes[i] {
            if children.len() > 2 {
                let children = children.clone();
                let mut tail = children[children.len() - 1];
                for &c in children[1..children.len() - 1].iter().rev() {
                    nodes.push(Node::And(vec![c, tail]));
                    tail = NodeId(nodes.len() - 1);
                }
                nodes[i] = Node::And(vec![children[0], tail]);
            }
        }
    }

    let mut seen = vec![false; nodes.len()];
    for i in 0..nodes.len() {
        for slot in 0..nodes[i].children().len() {
            let c = nodes[i].children()[slot];
            if matches!(nodes[c.0], Node::Sink(true)) {
                if seen[c.0] {
                    nodes.push(Node::Sink(true));
                    let fresh = NodeId(nodes.len() - 1);
                    nodes[i].children_mut()[slot] = fresh;
                } else {
                    seen[c.0] = true;
                }
            }
        }
    }

    Ok(CircuitDag::from_parts_unchecked(
        nodes,
        remap[root.0],
        dag.universe.clone(),
        Flavor::DecisionDnnf,
    ))
}

/// True when every AND node is binary and every 1-sink has at most one
/// incoming edge.
pub fn is_normalized(dag: &CircuitDag) -> bool {
    let mut incoming = vec![0usize; dag.nodes.len()];
    for node in &dag.nodes {
        if let Node::And(children) = node {
            if children.len() != 2 {
                return false;
            }
        }
        for c in node.children() {
            incoming[c.0] += 1;
        }
    }
    dag.nodes
        .iter()
        .zip(&incoming)
        .all(|(n, &k)| !matches!(n, Node::Sink(true)) || k <= 1)
}

/// Contracts no-op nodes, redirecting each incoming edge to the first
/// non-no-op node below it, and drops unreachable nodes.
pub fn eliminate_noops(dag: &CircuitDag) -> Result<CircuitDag> {
    if dag.nodes.iter().any(Node::is_and) {
        return Err(Error::Unsupported(
            "no-op elimination expects an FBDD without AND nodes".into(),
        ));
    }
    const UNRESOLVED: usize = usize::MAX;
    let mut target = vec![UNRESOLVED; dag.nodes.len()];
    for start in 0..dag.nodes.len() {
        if target[start] != UNRESOLVED {
            continue;
        }
        let mut chain = Vec::new();
        let mut on_chain = HashMap::new();
        let mut at = start;
        let end = loop {
            if target[at] != UNRESOLVED {
                break target[at];
            }
            match &dag.nodes[at] {
                Node::NoOp(child) => {
                    if on_chain.insert(at, ()).is_some() {
                        return Err(Error::Cycle(NodeId(at)));
                    }
                    chain.push(at);
                    at = child.0;
                }
                _ => break at,
            }
        };
        for n in chain {
            target[n] = end;
        }
        if target[start] == UNRESOLVED {
            target[start] = end;
        }
    }

    let root = target[dag.root.0];
    let mut reachable = vec![false; dag.nodes.len()];
    let mut stack = vec![root];
    reachable[root] = true;
    while let Some(id) = stack.pop() {
        for c in dag.nodes[id].children() {
            let t = target[c.0];
            if !reachable[t] {
                reachable[t] = true;
                stack.push(t);
            }
        }
    }

    let mut remap = vec![usize::MAX; dag.nodes.len()];
    let mut nodes = Vec::new();
    for (i, node) in dag.nodes.iter().enumerate() {
        if reachable[i] {
            remap[i] = nodes.len();
            nodes.push(node.clone());
        }
    }
    for node in nodes.iter_mut() {
        for c in node.children_mut() {
            *c = NodeId(remap[target[c.0]]);
        }
    }
    let out = CircuitDag::from_parts_unchecked(
        nodes,
        NodeId(remap[root]),
        dag.universe.clone(),
        Flavor::Fbdd,
    );
    // Acyclicity of what remains.
    out.post_order()?;
    Ok(out)
}

/// Structural isomorphism of the parts reachable from the two roots: node
/// kinds, tested variables and child order must correspond under a bijection.
pub fn isomorphic(a: &CircuitDag, b: &CircuitDag) -> bool {
    let mut fwd: HashMap<NodeId, NodeId> = HashMap::new();
    let mut bwd: HashMap<NodeId, NodeId> = HashMap::new();
    let mut stack = vec![(a.root, b.root)];
    while let Some((x, y)) = stack.pop() {
        match (fwd.get(&x), bwd.get(&y)) {
            (Some(&fx), Some(&by)) => {
                if fx != y || by != x {
                    return false;
                }
                continue;
            }
            (None, None) => {}
            _ => return false,
        }
        fwd.insert(x, y);
        bwd.insert(y, x);
        let (nx, ny) = (a.node(x), b.node(y));
        let same_label = match (nx, ny) {
            (Node::Decision { var: v, .. }, Node::Decision { var: w, .. }) => v == w,
            (Node::And(c), Node::And(d)) => c.len() == d.len(),
            (Node::NoOp(_), Node::NoOp(_)) => true,
            (Node::Sink(s), Node::Sink(t)) => s == t,
            _ => false,
        };
        if !same_label {
            return false;
        }
        for (&cx, &cy) in nx.children().iter().zip(ny.children()) {
            stack.push((cx, cy));
        }
    }
    true
}

/// Incremental construction helper; nodes get consecutive ids.
#[derive(Clone, Debug, Default)]
pub struct DagBuilder {
    nodes: Vec<Node>,
}

impl DagBuilder {
    pub fn new() -> DagBuilder {
        DagBuilder::default()
    }

    pub fn add(&mut self, node: Node) -> NodeId {
        self.nodes.push(node);
        NodeId(self.nodes.len() - 1)
    }

    pub fn sink(&mut self, value: bool) -> NodeId {
        self.add(Node::Sink(value))
    }

    pub fn decision(&mut self, var: Var, lo: NodeId, hi: NodeId) -> NodeId {
        self.add(Node::decision(var, lo, hi))
    }

    pub fn and(&mut self, children: Vec<NodeId>) -> NodeId {
        self.add(Node::And(children))
    }

    pub fn noop(&mut self, child: NodeId) -> NodeId {
        self.add(Node::NoOp(child))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn finish(self, root: NodeId, universe: BTreeSet<Var>, flavor: Flavor) -> Result<CircuitDag> {
        CircuitDag::new(self.nodes, root, universe, flavor)
    }

    /// Finishes with the universe set to the tested variables.
    pub fn finish_tested(self, root: NodeId, flavor: Flavor) -> Result<CircuitDag> {
        CircuitDag::with_tested_universe(self.nodes, root, flavor)
    }
}
