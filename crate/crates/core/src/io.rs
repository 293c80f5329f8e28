//! Text formats: c2d-style NNF, FBDD listings, DIMACS CNF/DNF, weight CSV,
//! query text and database text.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::circuit::{CircuitDag, Flavor, Node, NodeId, Var};
use crate::counting::WeightMap;
use crate::error::{Error, Result};
use crate::formula::{CnfFormula, DnfFormula, Formula, Lit};
use crate::lineage::{Arg, Atom, Cq, DatabaseBuilder, DatabaseInstance, Ucq};

/// Non-blank lines that are not comments, with 1-based line numbers.
fn content_lines<'a>(
    text: &'a str,
    is_comment: impl Fn(&str) -> bool + 'a,
) -> impl Iterator<Item = (usize, &'a str)> + 'a {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(move |(_, l)| !l.is_empty() && !is_comment(l))
}

fn dimacs_comment(line: &str) -> bool {
    line == "c" || line.starts_with("c ") || line.starts_with("c\t")
}

fn int<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| Error::parse(line, format!("expected {what}, found `{tok}`")))
}

fn var_index(index: u32, line: usize) -> Result<Var> {
    Var::new(index).map_err(|_| Error::parse(line, "variable 0 is not allowed"))
}

fn universe_upto(max: u32) -> BTreeSet<Var> {
    (1..=max).map(Var::from_index).collect()
}

fn max_var(dag: &CircuitDag) -> Result<u32> {
    let support = dag.support()?;
    Ok(dag
        .universe()
        .iter()
        .chain(support.iter())
        .map(|v| v.index())
        .max()
        .unwrap_or(0))
}

/// Rebuilds a DAG keeping only nodes reachable from `root`, in order.
fn compact(nodes: Vec<Node>, root: NodeId, universe: BTreeSet<Var>, flavor: Flavor) -> Result<CircuitDag> {
    let full = CircuitDag::new(nodes, root, universe.clone(), flavor)?;
    let mut keep: Vec<NodeId> = full.post_order()?;
    keep.sort();
    let remap: HashMap<NodeId, NodeId> = keep
        .iter()
        .enumerate()
        .map(|(i, &old)| (old, NodeId(i)))
        .collect();
    let nodes = keep
        .iter()
        .map(|&id| match full.node(id) {
            Node::Decision { var, children } => {
                Node::decision(*var, remap[&children[0]], remap[&children[1]])
            }
            Node::And(c) => Node::And(c.iter().map(|x| remap[x]).collect()),
            Node::NoOp(c) => Node::NoOp(remap[c]),
            Node::Sink(b) => Node::Sink(*b),
        })
        .collect();
    CircuitDag::new(nodes, remap[&root], universe, flavor)
}

enum NnfLine {
    Lit(Lit),
    And(Vec<usize>),
    Or(u32, Vec<usize>),
}

fn nnf_children(toks: &[&str], count_at: usize, current: usize, line: usize) -> Result<Vec<usize>> {
    let k: usize = int(
        toks.get(count_at).ok_or_else(|| Error::parse(line, "missing child count"))?,
        line,
        "a child count",
    )?;
    let rest = &toks[count_at + 1..];
    if rest.len() != k {
        return Err(Error::parse(
            line,
            format!("declared {k} children, found {}", rest.len()),
        ));
    }
    rest.iter()
        .map(|t| {
            let c: usize = int(t, line, "a node index")?;
            if c >= current {
                return Err(Error::parse(
                    line,
                    format!("child {c} is not an earlier node"),
                ));
            }
            Ok(c)
        })
        .collect()
}

struct NnfBuilder<'a> {
    lines: &'a [(usize, NnfLine)],
    nodes: Vec<Node>,
    full: Vec<NodeId>,
}

impl NnfBuilder<'_> {
    fn push(&mut self, node: Node) -> NodeId {
        self.nodes.push(node);
        NodeId(self.nodes.len() - 1)
    }

    fn literal_of(&self, i: usize) -> Option<Lit> {
        match self.lines[i].1 {
            NnfLine::Lit(l) => Some(l),
            _ => None,
        }
    }

    /// Literals directly under branch `i` (the branch itself if a literal).
    fn branch_lits(&self, i: usize) -> Vec<Lit> {
        match &self.lines[i].1 {
            NnfLine::Lit(l) => vec![*l],
            NnfLine::And(c) => c.iter().filter_map(|&j| self.literal_of(j)).collect(),
            NnfLine::Or(..) => Vec::new(),
        }
    }

    /// Branch `i` with the decision literal removed.
    fn rest(&mut self, i: usize, lit: Lit) -> NodeId {
        let kept: Vec<usize> = match &self.lines[i].1 {
            NnfLine::And(c) => c
                .iter()
                .copied()
                .filter(|&j| self.literal_of(j) != Some(lit))
                .collect(),
            _ => Vec::new(),
        };
        match kept.as_slice() {
            [] => self.push(Node::Sink(true)),
            [only] => self.full[*only],
            _ => {
                let children = kept.iter().map(|&j| self.full[j]).collect();
                self.push(Node::And(children))
            }
        }
    }

    fn decision(&mut self, line: usize, hint: u32, a: usize, b: usize) -> Result<NodeId> {
        let (la, lb) = (self.branch_lits(a), self.branch_lits(b));
        let found = la
            .iter()
            .filter(|l| hint == 0 || l.var().index() == hint)
            .find(|l| lb.contains(&l.negated()))
            .copied();
        let Some(lit_a) = found else {
            return Err(Error::parse(
                line,
                "disjunction is not a decision on a single variable",
            ));
        };
        let (pos_branch, neg_branch) = if lit_a.is_positive() { (a, b) } else { (b, a) };
        let var = lit_a.var();
        let hi = self.rest(pos_branch, Lit::pos(var));
        let lo = self.rest(neg_branch, Lit::neg(var));
        Ok(self.push(Node::decision(var, lo, hi)))
    }

    fn line(&mut self, i: usize) -> Result<NodeId> {
        let line = self.lines[i].0;
        match &self.lines[i].1 {
            NnfLine::Lit(l) => {
                let s0 = self.push(Node::Sink(false));
                let s1 = self.push(Node::Sink(true));
                let (lo, hi) = if l.is_positive() { (s0, s1) } else { (s1, s0) };
                Ok(self.push(Node::decision(l.var(), lo, hi)))
            }
            NnfLine::And(c) if c.is_empty() => Ok(self.push(Node::Sink(true))),
            NnfLine::And(c) => {
                let children = c.iter().map(|&j| self.full[j]).collect();
                Ok(self.push(Node::And(children)))
            }
            NnfLine::Or(_, c) if c.is_empty() => Ok(self.push(Node::Sink(false))),
            NnfLine::Or(hint, c) if c.len() == 2 => {
                let (hint, a, b) = (*hint, c[0], c[1]);
                self.decision(line, hint, a, b)
            }
            NnfLine::Or(..) => Err(Error::parse(
                line,
                "disjunction is not a decision on a single variable",
            )),
        }
    }
}

/// Reads c2d-style NNF. OR nodes must have the decision shape
/// `(x ∧ A) ∨ (¬x ∧ B)`; they become decision nodes, and the decision
/// literal is dropped from both branches. The universe is `1..=v` from the
/// header.
pub fn parse_nnf(text: &str) -> Result<CircuitDag> {
    let mut lines = content_lines(text, dimacs_comment);
    let (hline, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "missing `nnf` header"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 4 || h[0] != "nnf" {
        return Err(Error::parse(hline, "expected `nnf <nodes> <edges> <vars>`"));
    }
    let declared: usize = int(h[1], hline, "a node count")?;
    let _edges: usize = int(h[2], hline, "an edge count")?;
    let vars: u32 = int(h[3], hline, "a variable count")?;

    let mut parsed: Vec<(usize, NnfLine)> = Vec::new();
    for (line, text) in lines {
        let toks: Vec<&str> = text.split_whitespace().collect();
        let current = parsed.len();
        let node = match toks[0] {
            "L" => {
                if toks.len() != 2 {
                    return Err(Error::parse(line, "expected `L <literal>`"));
                }
                let value: i64 = int(toks[1], line, "a literal")?;
                let lit = Lit::from_dimacs(value).map_err(|e| Error::parse(line, e.to_string()))?;
                if lit.var().index() > vars {
                    return Err(Error::parse(
                        line,
                        format!("variable {} exceeds the declared {vars}", lit.var().index()),
                    ));
                }
                NnfLine::Lit(lit)
            }
            "A" => NnfLine::And(nnf_children(&toks, 1, current, line)?),
            "O" => {
                let hint: u32 = int(
                    toks.get(1).ok_or_else(|| Error::parse(line, "missing decision variable"))?,
                    line,
                    "a variable",
                )?;
                NnfLine::Or(hint, nnf_children(&toks, 2, current, line)?)
            }
            other => return Err(Error::parse(line, format!("unknown node type `{other}`"))),
        };
        parsed.push((line, node));
    }
    if parsed.len() != declared {
        return Err(Error::parse(
            hline,
            format!("header declares {declared} nodes, found {}", parsed.len()),
        ));
    }
    if parsed.is_empty() {
        return Err(Error::parse(hline, "no nodes"));
    }
    let mut b = NnfBuilder {
        lines: &parsed,
        nodes: Vec::new(),
        full: Vec::with_capacity(parsed.len()),
    };
    for i in 0..parsed.len() {
        let id = b.line(i)?;
        b.full.push(id);
    }
    let root = *b.full.last().expect("at least one node");
    compact(b.nodes, root, universe_upto(vars), Flavor::DecisionDnnf)
}

/// Writes decisions as `O x 2` over `A 2 (L x) hi` and `A 2 (L -x) lo`.
pub fn write_nnf(dag: &CircuitDag) -> Result<String> {
    let mut lines: Vec<String> = Vec::new();
    let mut edges = 0usize;
    let mut at: HashMap<NodeId, usize> = HashMap::new();
    let mut lit_line: HashMap<Lit, usize> = HashMap::new();
    let emit = |lines: &mut Vec<String>, s: String| {
        lines.push(s);
        lines.len() - 1
    };
    for id in dag.post_order()? {
        let index = match dag.node(id) {
            Node::Sink(true) => emit(&mut lines, "A 0".into()),
            Node::Sink(false) => emit(&mut lines, "O 0 0".into()),
            Node::And(c) => {
                edges += c.len();
                let kids: Vec<String> = c.iter().map(|x| at[x].to_string()).collect();
                emit(&mut lines, format!("A {} {}", c.len(), kids.join(" ")))
            }
            Node::Decision { var, children } => {
                let mut branch = |lines: &mut Vec<String>, lit: Lit, child: NodeId| {
                    let l = *lit_line
                        .entry(lit)
                        .or_insert_with(|| emit(lines, format!("L {}", lit.to_dimacs())));
                    emit(lines, format!("A 2 {l} {}", at[&child]))
                };
                let hi = branch(&mut lines, Lit::pos(*var), children[1]);
                let lo = branch(&mut lines, Lit::neg(*var), children[0]);
                edges += 6;
                emit(&mut lines, format!("O {} 2 {hi} {lo}", var.index()))
            }
            Node::NoOp(_) => {
                return Err(Error::Unsupported("no-op nodes have no NNF form".into()));
            }
        };
        at.insert(id, index);
    }
    let mut out = format!("nnf {} {} {}\n", lines.len(), edges, max_var(dag)?);
    for l in lines {
        out.push_str(&l);
        out.push('\n');
    }
    Ok(out)
}

fn fbdd_comment(line: &str) -> bool {
    line.starts_with('#') || dimacs_comment(line)
}

/// One node per line, `D var lo hi` or `S 0|1`, children by 0-based node
/// index, root last. The universe is `1..=` the largest variable tested.
pub fn parse_fbdd(text: &str) -> Result<CircuitDag> {
    let mut nodes = Vec::new();
    let mut max = 0u32;
    let mut last_line = 1;
    for (line, text) in content_lines(text, fbdd_comment) {
        last_line = line;
        let toks: Vec<&str> = text.split_whitespace().collect();
        let child = |t: &str| -> Result<NodeId> {
            let c: usize = int(t, line, "a node index")?;
            if c >= nodes.len() {
                return Err(Error::parse(line, format!("node {c} is not defined above")));
            }
            Ok(NodeId(c))
        };
        let node = match toks.as_slice() {
            ["S", "0"] => Node::Sink(false),
            ["S", "1"] => Node::Sink(true),
            ["D", v, lo, hi] => {
                let var = var_index(int(v, line, "a variable")?, line)?;
                max = max.max(var.index());
                Node::decision(var, child(lo)?, child(hi)?)
            }
            _ => {
                return Err(Error::parse(
                    line,
                    format!("expected `D var lo hi` or `S 0|1`, found `{text}`"),
                ))
            }
        };
        nodes.push(node);
    }
    if nodes.is_empty() {
        return Err(Error::parse(last_line, "no nodes"));
    }
    let root = NodeId(nodes.len() - 1);
    CircuitDag::new(nodes, root, universe_upto(max), Flavor::Fbdd)
}

pub fn write_fbdd(dag: &CircuitDag) -> Result<String> {
    let mut out = String::new();
    let mut at: HashMap<NodeId, usize> = HashMap::new();
    for (i, id) in dag.post_order()?.into_iter().enumerate() {
        match dag.node(id) {
            Node::Sink(b) => writeln!(out, "S {}", u8::from(*b)).expect("string write"),
            Node::Decision { var, children } => writeln!(
                out,
                "D {} {} {}",
                var.index(),
                at[&children[0]],
                at[&children[1]]
            )
            .expect("string write"),
            Node::And(_) | Node::NoOp(_) => {
                return Err(Error::Unsupported(
                    "FBDD text holds only decision and sink nodes".into(),
                ))
            }
        }
        at.insert(id, i);
    }
    Ok(out)
}

/// Reads DIMACS `p cnf` or `p dnf`. `c var <index> <name>` comments name
/// variables of a DNF. The universe is `1..=vars` from the header.
pub fn parse_formula(text: &str) -> Result<Formula> {
    let mut names = BTreeMap::new();
    let mut header: Option<(bool, u32, usize, usize)> = None;
    let mut groups: Vec<Vec<Lit>> = Vec::new();
    let mut current: Vec<Lit> = Vec::new();
    let mut last_line = 1;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = raw.trim();
        if t.is_empty() || t == "%" {
            continue;
        }
        last_line = line;
        if dimacs_comment(t) {
            let toks: Vec<&str> = t.split_whitespace().collect();
            if let ["c", "var", index, name] = toks.as_slice() {
                let v = var_index(int(index, line, "a variable")?, line)?;
                names.insert(v, (*name).to_string());
            }
            continue;
        }
        if t.starts_with('p') {
            let toks: Vec<&str> = t.split_whitespace().collect();
            let dnf = match toks.as_slice() {
                ["p", "cnf", _, _] => false,
                ["p", "dnf", _, _] => true,
                _ => return Err(Error::parse(line, "expected `p cnf|dnf <vars> <count>`")),
            };
            if header.is_some() {
                return Err(Error::parse(line, "second problem line"));
            }
            header = Some((dnf, int(toks[2], line, "a variable count")?, int(toks[3], line, "a count")?, line));
            continue;
        }
        let Some((_, vars, _, _)) = header else {
            return Err(Error::parse(line, "data before the problem line"));
        };
        for tok in t.split_whitespace() {
            let value: i64 = int(tok, line, "a literal")?;
            if value == 0 {
                groups.push(std::mem::take(&mut current));
                continue;
            }
            let lit = Lit::from_dimacs(value).map_err(|e| Error::parse(line, e.to_string()))?;
            if lit.var().index() > vars {
                return Err(Error::parse(
                    line,
                    format!("variable {} exceeds the declared {vars}", lit.var().index()),
                ));
            }
            current.push(lit);
        }
    }
    let Some((dnf, vars, count, hline)) = header else {
        return Err(Error::parse(last_line, "missing problem line"));
    };
    if !current.is_empty() {
        return Err(Error::parse(last_line, "last group is not terminated by 0"));
    }
    if groups.len() != count {
        return Err(Error::parse(
            hline,
            format!("header declares {count} groups, found {}", groups.len()),
        ));
    }
    let universe = universe_upto(vars);
    Ok(if dnf {
        DnfFormula::new(groups, universe)?.with_names(names).into()
    } else {
        CnfFormula::new(groups, universe)?.into()
    })
}

fn write_groups(kind: &str, vars: u32, groups: &[Vec<Lit>], names: &BTreeMap<Var, String>) -> String {
    let mut out = String::new();
    for (v, name) in names {
        writeln!(out, "c var {} {name}", v.index()).expect("string write");
    }
    writeln!(out, "p {kind} {vars} {}", groups.len()).expect("string write");
    for g in groups {
        for l in g {
            write!(out, "{} ", l.to_dimacs()).expect("string write");
        }
        out.push_str("0\n");
    }
    out
}

fn max_index(universe: &BTreeSet<Var>, groups: &[Vec<Lit>]) -> u32 {
    universe
        .iter()
        .copied()
        .chain(groups.iter().flatten().map(|l| l.var()))
        .map(Var::index)
        .max()
        .unwrap_or(0)
}

pub fn write_formula(f: &Formula) -> String {
    match f {
        Formula::Dnf(d) => write_groups("dnf", max_index(d.universe(), d.terms()), d.terms(), d.names()),
        Formula::Cnf(c) => write_groups(
            "cnf",
            max_index(c.universe(), c.clauses()),
            c.clauses(),
            &BTreeMap::new(),
        ),
    }
}

/// Exact value of `0.25`, `.5`, `1`, or `1/3`.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let t = text.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (negative, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{whole}{frac}");
    let n: BigInt = digits.parse().ok()?;
    let d = num_traits::pow(BigInt::from(10u8), frac.len());
    let r = BigRational::new(n, d);
    Some(if negative { -r } else { r })
}

/// A rational in `[0, 1]`.
pub fn parse_probability(text: &str) -> Option<BigRational> {
    parse_rational(text).filter(|p| *p >= BigRational::zero() && *p <= BigRational::one())
}

fn weight_var(text: &str) -> Option<Var> {
    let t = text.trim();
    let digits = t.strip_prefix('x').unwrap_or(t);
    Var::new(digits.parse().ok()?).ok()
}

/// `var,probability` rows. A first row whose variable field does not parse
/// is taken as a header.
pub fn parse_weights(text: &str) -> Result<BTreeMap<Var, BigRational>> {
    let mut out = BTreeMap::new();
    for (n, (line, row)) in content_lines(text, |l| l.starts_with('#')).enumerate() {
        let Some((v, p)) = row.split_once(',') else {
            return Err(Error::parse(line, "expected `var,probability`"));
        };
        let Some(var) = weight_var(v) else {
            if n == 0 {
                continue;
            }
            return Err(Error::parse(line, format!("bad variable `{}`", v.trim())));
        };
        let p = parse_probability(p)
            .ok_or_else(|| Error::parse(line, format!("bad probability `{}`", p.trim())))?;
        if out.insert(var, p).is_some() {
            return Err(Error::parse(line, format!("{var} listed twice")));
        }
    }
    Ok(out)
}

/// Fills variables of `universe` missing from `given` with 1/2 and returns
/// them alongside the weights.
pub fn complete_weights(
    given: &BTreeMap<Var, BigRational>,
    universe: &BTreeSet<Var>,
) -> Result<(WeightMap<BigRational>, Vec<Var>)> {
    let half = BigRational::new(1.into(), 2.into());
    let mut p = given.clone();
    let mut defaulted = Vec::new();
    for &v in universe {
        p.entry(v).or_insert_with(|| {
            defaulted.push(v);
            half.clone()
        });
    }
    Ok((WeightMap::new(p)?, defaulted))
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Quoted(String),
    Punct(char),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let code = raw.split('#').next().unwrap_or("");
        let mut chars = code.chars().peekable();
        while let Some(&c) = chars.peek() {
            if c.is_whitespace() {
                chars.next();
            } else if c == '\'' || c == '"' {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some(d) if d == c => break,
                        Some(d) => s.push(d),
                        None => return Err(Error::parse(line, "unterminated quote")),
                    }
                }
                out.push((line, Tok::Quoted(s)));
            } else if c.is_alphanumeric() || c == '_' || c == '.' || c == '-' {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_alphanumeric() || d == '_' || d == '.' || d == '-' || d == '/' {
                        s.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push((line, Tok::Ident(s)));
            } else if "(),:|".contains(c) {
                chars.next();
                out.push((line, Tok::Punct(c)));
            } else {
                return Err(Error::parse(line, format!("unexpected character `{c}`")));
            }
        }
    }
    Ok(out)
}

struct Tokens {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Tokens {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn line(&self) -> usize {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map_or(1, |(l, _)| *l)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, c: char) -> Result<()> {
        let line = self.line();
        match self.next() {
            Some(Tok::Punct(d)) if d == c => Ok(()),
            other => Err(Error::parse(line, format!("expected `{c}`, found {other:?}"))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        let line = self.line();
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s),
            other => Err(Error::parse(line, format!("expected {what}, found {other:?}"))),
        }
    }

    /// `name(arg, …)`; `arg` maps identifiers and quoted strings.
    fn atom_parts<T>(&mut self, mut arg: impl FnMut(Tok, usize) -> Result<T>) -> Result<(String, Vec<T>)> {
        let name = self.ident("a relation name")?;
        self.expect('(')?;
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::Punct(')')) {
            self.next();
            return Ok((name, args));
        }
        loop {
            let line = self.line();
            let tok = self
                .next()
                .ok_or_else(|| Error::parse(line, "unexpected end of input"))?;
            args.push(arg(tok, line)?);
            let line = self.line();
            match self.next() {
                Some(Tok::Punct(',')) => continue,
                Some(Tok::Punct(')')) => break,
                other => return Err(Error::parse(line, format!("expected `,` or `)`, found {other:?}"))),
            }
        }
        Ok((name, args))
    }
}

fn query_arg(tok: Tok, line: usize) -> Result<Arg> {
    match tok {
        Tok::Quoted(s) => Ok(Arg::Const(s)),
        Tok::Ident(s) if s.starts_with(|c: char| c.is_ascii_digit()) => Ok(Arg::Const(s)),
        Tok::Ident(s) => Ok(Arg::Var(s)),
        Tok::Punct(c) => Err(Error::parse(line, format!("expected an argument, found `{c}`"))),
    }
}

fn parse_cq(t: &mut Tokens) -> Result<Cq> {
    let line = t.line();
    let mut vars = Vec::new();
    if t.peek() == Some(&Tok::Ident("exists".into())) {
        t.next();
        while let Some(Tok::Ident(_)) = t.peek() {
            vars.push(t.ident("a variable")?);
        }
        t.expect(':')?;
    }
    let mut atoms = Vec::new();
    loop {
        let (relation, args) = t.atom_parts(query_arg)?;
        atoms.push(Atom::new(relation, args));
        if t.peek() == Some(&Tok::Punct(',')) {
            t.next();
        } else {
            break;
        }
    }
    Cq::new(vars, atoms).map_err(|e| Error::parse(line, e.to_string()))
}

/// `exists x y : R(x), S(x, y), T(y) | …`; quoted or numeric arguments are
/// constants, other identifiers are variables; `#` starts a comment.
pub fn parse_query(text: &str) -> Result<Ucq> {
    let mut t = Tokens {
        toks: tokenize(text)?,
        pos: 0,
    };
    if t.peek().is_none() {
        return Err(Error::parse(1, "empty query"));
    }
    let mut disjuncts = vec![parse_cq(&mut t)?];
    while t.peek().is_some() {
        t.expect('|')?;
        disjuncts.push(parse_cq(&mut t)?);
    }
    Ok(Ucq::new(disjuncts))
}

/// One tuple per line: `R(a, b) [probability] [name]`. Also accepts
/// `domain c1 c2 …` and `relation R/2`; `#` starts a comment.
pub fn parse_db(text: &str) -> Result<DatabaseInstance> {
    let mut b = DatabaseBuilder::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let mut t = Tokens {
            toks: tokenize(raw)?
                .into_iter()
                .map(|(_, tok)| (line, tok))
                .collect(),
            pos: 0,
        };
        match t.peek() {
            None => continue,
            Some(Tok::Ident(k)) if k == "domain" && t.toks.get(1).map(|x| &x.1) != Some(&Tok::Punct('(')) => {
                t.next();
                let mut values = Vec::new();
                while let Some(tok) = t.next() {
                    match tok {
                        Tok::Ident(s) | Tok::Quoted(s) => values.push(s),
                        Tok::Punct(c) => return Err(Error::parse(line, format!("unexpected `{c}`"))),
                    }
                }
                b.domain(values);
            }
            Some(Tok::Ident(k)) if k == "relation" && t.toks.get(1).map(|x| &x.1) != Some(&Tok::Punct('(')) => {
                t.next();
                let decl = t.ident("`name/arity`")?;
                let (name, arity) = decl
                    .split_once('/')
                    .ok_or_else(|| Error::parse(line, "expected `relation name/arity`"))?;
                let arity: usize = int(arity, line, "an arity")?;
                b.relation(name, arity).map_err(|e| Error::parse(line, e.to_string()))?;
            }
            Some(_) => {
                let (relation, args) = t.atom_parts(|tok, line| match tok {
                    Tok::Ident(s) | Tok::Quoted(s) => Ok(s),
                    Tok::Punct(c) => Err(Error::parse(line, format!("unexpected `{c}`"))),
                })?;
                let mut prob = None;
                let mut name = None;
                while let Some(tok) = t.next() {
                    let text = match tok {
                        Tok::Ident(s) | Tok::Quoted(s) => s,
                        Tok::Punct(c) => return Err(Error::parse(line, format!("unexpected `{c}`"))),
                    };
                    if prob.is_none() && name.is_none() {
                        if let Some(p) = parse_rational(&text) {
                            prob = Some(parse_probability(&text).ok_or_else(|| {
                                Error::parse(line, format!("probability {p} is outside [0, 1]"))
                            })?);
                            continue;
                        }
                    }
                    if name.is_some() {
                        return Err(Error::parse(line, format!("unexpected `{text}`")));
                    }
                    name = Some(text);
                }
                b.tuple(&relation, args, prob, name)
                    .map_err(|e| Error::parse(line, e.to_string()))?;
            }
        }
    }
    b.build()
}

/// Database text that [`parse_db`] reads back to the same instance.
pub fn write_db(db: &DatabaseInstance) -> String {
    let quote = |s: &str| format!("'{s}'");
    let mut out = String::new();
    let domain: Vec<String> = db.domain().iter().map(|d| quote(d)).collect();
    writeln!(out, "domain {}", domain.join(" ")).expect("string write");
    for (r, a) in db.schema() {
        writeln!(out, "relation {r}/{a}").expect("string write");
    }
    for t in db.tuples() {
        let args: Vec<String> = t.args.iter().map(|a| quote(a)).collect();
        write!(out, "{}({})", t.relation, args.join(", ")).expect("string write");
        if let Some(p) = &t.prob {
            write!(out, " {p}").expect("string write");
        }
        if let Some(n) = &t.name {
            write!(out, " {}", quote(n)).expect("string write");
        }
        out.push('\n');
    }
    out
}
