//! Tuple-independent databases, unions of conjunctive queries, lineage
//! grounding and the hierarchical test.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::circuit::Var;
use crate::compiler::{self, Heuristic};
use crate::convert::{self, ConvertReport};
use crate::counting::{prob_dnnf, prob_fbdd, WeightMap};
use crate::error::{Error, Result};
use crate::formula::{DnfFormula, Lit};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Arg {
    Var(String),
    Const(String),
}

impl fmt::Display for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arg::Var(x) => f.write_str(x),
            Arg::Const(c) => write!(f, "'{c}'"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub relation: String,
    pub args: Vec<Arg>,
}

impl Atom {
    pub fn new(relation: impl Into<String>, args: Vec<Arg>) -> Atom {
        Atom {
            relation: relation.into(),
            args,
        }
    }

    fn mentions(&self, var: &str) -> bool {
        self.args.iter().any(|a| matches!(a, Arg::Var(x) if x == var))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args: Vec<String> = self.args.iter().map(ToString::to_string).collect();
        write!(f, "{}({})", self.relation, args.join(", "))
    }
}

/// `∃ vars. atoms[0] ∧ … ∧ atoms[m-1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cq {
    vars: Vec<String>,
    atoms: Vec<Atom>,
}

impl Cq {
    /// Every declared variable must occur in an atom and every variable in
    /// an atom must be declared.
    pub fn new(vars: Vec<String>, atoms: Vec<Atom>) -> Result<Cq> {
        let mut seen = BTreeSet::new();
        for x in &vars {
            if !seen.insert(x.as_str()) {
                return Err(Error::Query(format!("variable {x} declared twice")));
            }
            if !atoms.iter().any(|a| a.mentions(x)) {
                return Err(Error::Query(format!("variable {x} occurs in no atom")));
            }
        }
        for atom in &atoms {
            for arg in &atom.args {
                if let Arg::Var(x) = arg {
                    if !seen.contains(x.as_str()) {
                        return Err(Error::Query(format!("variable {x} is not quantified")));
                    }
                }
            }
        }
        Ok(Cq { vars, atoms })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Indices of the atoms containing `var`.
    pub fn at(&self, var: &str) -> BTreeSet<usize> {
        (0..self.atoms.len())
            .filter(|&i| self.atoms[i].mentions(var))
            .collect()
    }
}

impl fmt::Display for Cq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let atoms: Vec<String> = self.atoms.iter().map(ToString::to_string).collect();
        if self.vars.is_empty() {
            f.write_str(&atoms.join(", "))
        } else {
            write!(f, "exists {} : {}", self.vars.join(" "), atoms.join(", "))
        }
    }
}

/// Disjunction of conjunctive queries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ucq {
    pub disjuncts: Vec<Cq>,
}

impl Ucq {
    pub fn new(disjuncts: Vec<Cq>) -> Ucq {
        Ucq { disjuncts }
    }
}

impl From<Cq> for Ucq {
    fn from(q: Cq) -> Ucq {
        Ucq { disjuncts: vec![q] }
    }
}

impl fmt::Display for Ucq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.disjuncts.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(" | "))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tuple {
    pub relation: String,
    pub args: Vec<String>,
    pub var: Var,
    pub prob: Option<BigRational>,
    /// Display name of the tuple's variable in lineage output.
    pub name: Option<String>,
}

impl Tuple {
    pub fn display_name(&self) -> String {
        self.name
            .clone()
            .unwrap_or_else(|| format!("{}({})", self.relation, self.args.join(",")))
    }
}

/// Tuple `i` (0-based) carries variable `i + 1`. Tuples are ordered by
/// relation declaration, then by the domain positions of their fields.
#[derive(Clone, Debug, PartialEq)]
pub struct DatabaseInstance {
    domain: Vec<String>,
    schema: Vec<(String, usize)>,
    tuples: Vec<Tuple>,
    lookup: HashMap<(String, Vec<String>), usize>,
}

impl DatabaseInstance {
    pub fn domain(&self) -> &[String] {
        &self.domain
    }

    /// Relations with their arities, in declaration order.
    pub fn schema(&self) -> &[(String, usize)] {
        &self.schema
    }

    pub fn tuples(&self) -> &[Tuple] {
        &self.tuples
    }

    pub fn arity(&self, relation: &str) -> Option<usize> {
        self.schema
            .iter()
            .find(|(r, _)| r == relation)
            .map(|&(_, a)| a)
    }

    pub fn tuple_var(&self, relation: &str, args: &[String]) -> Option<Var> {
        self.lookup
            .get(&(relation.to_string(), args.to_vec()))
            .map(|&i| self.tuples[i].var)
    }

    pub fn tuple_of(&self, var: Var) -> Option<&Tuple> {
        self.tuples.get((var.index() as usize).checked_sub(1)?)
    }

    /// Probabilities of the tuples behind `vars`; fails on the first one
    /// without a probability.
    pub fn weights<'a>(&self, vars: impl IntoIterator<Item = &'a Var>) -> Result<WeightMap<BigRational>> {
        let mut p = BTreeMap::new();
        for &v in vars {
            let w = self
                .tuple_of(v)
                .and_then(|t| t.prob.clone())
                .ok_or(Error::MissingWeight(v))?;
            p.insert(v, w);
        }
        WeightMap::new(p)
    }
}

/// Relation, fields, probability and display name of a listed tuple.
type PendingTuple = (String, Vec<String>, Option<BigRational>, Option<String>);

#[derive(Clone, Debug, Default)]
pub struct DatabaseBuilder {
    domain: Vec<String>,
    domain_index: HashMap<String, usize>,
    schema: Vec<(String, usize)>,
    pending: Vec<PendingTuple>,
}

impl DatabaseBuilder {
    pub fn new() -> DatabaseBuilder {
        DatabaseBuilder::default()
    }

    /// Appends constants to the domain; later tuples add unseen constants
    /// in order of first appearance.
    pub fn domain<S: Into<String>>(&mut self, values: impl IntoIterator<Item = S>) -> &mut Self {
        for v in values {
            self.constant(v.into());
        }
        self
    }

    fn constant(&mut self, v: String) {
        if !self.domain_index.contains_key(&v) {
            self.domain_index.insert(v.clone(), self.domain.len());
            self.domain.push(v);
        }
    }

    pub fn relation(&mut self, name: impl Into<String>, arity: usize) -> Result<&mut Self> {
        let name = name.into();
        match self.schema.iter().find(|(r, _)| *r == name) {
            Some(&(_, a)) if a != arity => Err(Error::ArityMismatch {
                relation: name,
                expected: a,
                found: arity,
            }),
            Some(_) => Ok(self),
            None => {
                self.schema.push((name, arity));
                Ok(self)
            }
        }
    }

    /// Declares the relation on first use.
    pub fn tuple<S: Into<String>>(
        &mut self,
        relation: &str,
        args: impl IntoIterator<Item = S>,
        prob: Option<BigRational>,
        name: Option<String>,
    ) -> Result<&mut Self> {
        let args: Vec<String> = args.into_iter().map(Into::into).collect();
        self.relation(relation, args.len())?;
        if let Some(p) = &prob {
            if *p < BigRational::zero() || *p > BigRational::one() {
                return Err(Error::InvalidParameter(format!(
                    "probability {p} of {relation}({}) is outside [0, 1]",
                    args.join(",")
                )));
            }
        }
        for a in &args {
            self.constant(a.clone());
        }
        self.pending.push((relation.to_string(), args, prob, name));
        Ok(self)
    }

    pub fn build(&self) -> Result<DatabaseInstance> {
        let rel_order: HashMap<&str, usize> = self
            .schema
            .iter()
            .enumerate()
            .map(|(i, (r, _))| (r.as_str(), i))
            .collect();
        let mut keyed: BTreeMap<(usize, Vec<usize>), usize> = BTreeMap::new();
        for (i, (rel, args, prob, _)) in self.pending.iter().enumerate() {
            let key = (
                rel_order[rel.as_str()],
                args.iter().map(|a| self.domain_index[a]).collect(),
            );
            if let Some(&j) = keyed.get(&key) {
                if self.pending[j].2 != *prob {
                    return Err(Error::InvalidParameter(format!(
                        "tuple {rel}({}) listed with two probabilities",
                        args.join(",")
                    )));
                }
                continue;
            }
            keyed.insert(key, i);
        }
        let mut tuples = Vec::with_capacity(keyed.len());
        let mut lookup = HashMap::new();
        for (n, &i) in keyed.values().enumerate() {
            let (rel, args, prob, name) = &self.pending[i];
            let index = u32::try_from(n + 1)
                .map_err(|_| Error::InvalidParameter("too many tuples".into()))?;
            lookup.insert((rel.clone(), args.clone()), n);
            tuples.push(Tuple {
                relation: rel.clone(),
                args: args.clone(),
                var: Var::new(index)?,
                prob: prob.clone(),
                name: name.clone(),
            });
        }
        Ok(DatabaseInstance {
            domain: self.domain.clone(),
            schema: self.schema.clone(),
            tuples,
            lookup,
        })
    }
}

/// `R = [n]`, `S = [n] × [n]`, `T = [n]`, every tuple with probability 1/2.
pub fn gen_lemma62_db(n: usize) -> Result<DatabaseInstance> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let half = || Some(BigRational::new(1.into(), 2.into()));
    let mut b = DatabaseBuilder::new();
    b.domain((1..=n).map(|i| i.to_string()));
    b.relation("R", 1)?.relation("S", 2)?.relation("T", 1)?;
    for i in 1..=n {
        b.tuple("R", [i.to_string()], half(), None)?;
        b.tuple("T", [i.to_string()], half(), None)?;
        for j in 1..=n {
            b.tuple("S", [i.to_string(), j.to_string()], half(), None)?;
        }
    }
    b.build()
}

/// Grounded lineage with, per term, the tuples it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct Lineage {
    pub dnf: DnfFormula,
    /// `provenance[t]` lists tuple indices of term `t`, sorted.
    pub provenance: Vec<Vec<usize>>,
}

fn check_schema(q: &Ucq, db: &DatabaseInstance) -> Result<()> {
    for atom in q.disjuncts.iter().flat_map(|cq| cq.atoms.iter()) {
        let arity = db
            .arity(&atom.relation)
            .ok_or_else(|| Error::UnknownRelation(atom.relation.clone()))?;
        if arity != atom.args.len() {
            return Err(Error::ArityMismatch {
                relation: atom.relation.clone(),
                expected: arity,
                found: atom.args.len(),
            });
        }
    }
    Ok(())
}

struct Grounder<'a> {
    cq: &'a Cq,
    db: &'a DatabaseInstance,
    /// Atoms that become fully bound once variable `i` is assigned.
    ready: Vec<Vec<usize>>,
    binding: Vec<usize>,
    matched: Vec<usize>,
    out: Vec<Vec<usize>>,
}

impl<'a> Grounder<'a> {
    fn new(cq: &'a Cq, db: &'a DatabaseInstance) -> Grounder<'a> {
        let position: HashMap<&str, usize> = cq
            .vars
            .iter()
            .enumerate()
            .map(|(i, x)| (x.as_str(), i))
            .collect();
        let mut ready = vec![Vec::new(); cq.vars.len() + 1];
        for (a, atom) in cq.atoms.iter().enumerate() {
            let last = atom
                .args
                .iter()
                .filter_map(|arg| match arg {
                    Arg::Var(x) => Some(position[x.as_str()] + 1),
                    Arg::Const(_) => None,
                })
                .max()
                .unwrap_or(0);
            ready[last].push(a);
        }
        Grounder {
            cq,
            db,
            ready,
            binding: Vec::with_capacity(cq.vars.len()),
            matched: vec![0; cq.atoms.len()],
            out: Vec::new(),
        }
    }

    fn tuple_index(&self, atom: &Atom) -> Option<usize> {
        let args: Vec<String> = atom
            .args
            .iter()
            .map(|arg| match arg {
                Arg::Const(c) => c.clone(),
                Arg::Var(x) => {
                    let i = self.cq.vars.iter().position(|y| y == x).expect("declared");
                    self.db.domain[self.binding[i]].clone()
                }
            })
            .collect();
        self.db.lookup.get(&(atom.relation.clone(), args)).copied()
    }

    /// Matches the atoms completed at `depth`; false if one has no tuple.
    fn match_ready(&mut self, depth: usize) -> bool {
        for k in 0..self.ready[depth].len() {
            let a = self.ready[depth][k];
            match self.tuple_index(&self.cq.atoms[a]) {
                Some(t) => self.matched[a] = t,
                None => return false,
            }
        }
        true
    }

    fn run(&mut self) {
        if self.match_ready(0) {
            self.extend();
        }
    }

    fn extend(&mut self) {
        let depth = self.binding.len();
        if depth == self.cq.vars.len() {
            let mut term = self.matched.clone();
            term.sort_unstable();
            term.dedup();
            self.out.push(term);
            return;
        }
        for value in 0..self.db.domain.len() {
            self.binding.push(value);
            if self.match_ready(depth + 1) {
                self.extend();
            }
            self.binding.pop();
        }
    }
}

/// Grounds `q` over `db`: quantifiers range over the domain in order, atoms
/// over missing tuples are false, and repeated terms keep their first
/// occurrence. The universe is the set of tuple variables that occur.
pub fn ground(q: &Ucq, db: &DatabaseInstance) -> Result<Lineage> {
    check_schema(q, db)?;
    let mut seen = BTreeSet::new();
    let mut provenance = Vec::new();
    for cq in &q.disjuncts {
        let mut g = Grounder::new(cq, db);
        g.run();
        for term in g.out {
            if seen.insert(term.clone()) {
                provenance.push(term);
            }
        }
    }
    let terms: Vec<Vec<Lit>> = provenance
        .iter()
        .map(|t| t.iter().map(|&i| Lit::pos(db.tuples[i].var)).collect())
        .collect();
    let dnf = DnfFormula::from_terms(terms);
    let names = dnf
        .universe()
        .iter()
        .map(|&v| (v, db.tuple_of(v).expect("lineage var is a tuple").display_name()))
        .collect();
    Ok(Lineage {
        dnf: dnf.with_names(names),
        provenance,
    })
}

/// A conjunctive query failing the hierarchy condition on a variable pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Offending {
    pub disjunct: usize,
    pub pair: (String, String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hierarchy {
    /// First offending pair of each non-hierarchical disjunct.
    pub offending: Vec<Offending>,
}

impl Hierarchy {
    pub fn is_hierarchical(&self) -> bool {
        self.offending.is_empty()
    }
}

impl fmt::Display for Hierarchy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.offending.is_empty() {
            return f.write_str("hierarchical");
        }
        let pairs: Vec<String> = self
            .offending
            .iter()
            .map(|o| format!("({},{})", o.pair.0, o.pair.1))
            .collect();
        write!(f, "non-hierarchical: {}", pairs.join(" "))
    }
}

/// For every pair of variables in each disjunct, their atom sets must be
/// nested or disjoint. Pairs are scanned in declaration order.
pub fn hierarchical(q: &Ucq) -> Hierarchy {
    let mut offending = Vec::new();
    for (d, cq) in q.disjuncts.iter().enumerate() {
        let at: Vec<BTreeSet<usize>> = cq.vars.iter().map(|x| cq.at(x)).collect();
        'pairs: for i in 0..at.len() {
            for j in i + 1..at.len() {
                let (a, b) = (&at[i], &at[j]);
                if !(a.is_subset(b) || b.is_subset(a) || a.is_disjoint(b)) {
                    offending.push(Offending {
                        disjunct: d,
                        pair: (cq.vars[i].clone(), cq.vars[j].clone()),
                    });
                    break 'pairs;
                }
            }
        }
    }
    Hierarchy { offending }
}

#[derive(Clone, Debug)]
pub struct QueryProbability {
    pub exact: BigRational,
    pub approx: f64,
    pub lineage: Lineage,
    pub report: ConvertReport,
}

/// ground → compile → convert → FBDD probability, cross-checked against
/// the decision-DNNF probability of the compiled lineage.
pub fn query_prob(q: &Ucq, db: &DatabaseInstance) -> Result<QueryProbability> {
    let lineage = ground(q, db)?;
    let weights = db.weights(lineage.dnf.universe())?;
    let dnnf = compiler::compile(&lineage.dnf.clone().into(), Heuristic::FixedOrder)?;
    let (fbdd, report) = convert::convert(&dnnf)?;
    let exact = prob_fbdd(&fbdd, &weights)?;
    let check = prob_dnnf(&dnnf, &weights)?;
    if exact != check {
        return Err(Error::Invariant(format!(
            "FBDD probability {exact} differs from decision-DNNF probability {check}"
        )));
    }
    let mut approx_p = BTreeMap::new();
    for (v, w) in weights.iter() {
        approx_p.insert(v, w.to_f64().unwrap_or(f64::NAN));
    }
    let approx = prob_fbdd(&fbdd, &WeightMap::new(approx_p)?)?;
    Ok(QueryProbability {
        exact,
        approx,
        lineage,
        report,
    })
}
