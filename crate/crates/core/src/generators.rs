//! Formula families and the block-tree decision-DNNF used for size bounds.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::circuit::{CircuitDag, DagBuilder, Flavor, NodeId, Var};
use crate::error::{Error, Result};
use crate::formula::{CnfFormula, DnfFormula, Lit};
use crate::oracle::{Assignment, NativeFn};

/// Trial division.
pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Bipartite edge set on `[n] × [n]`, `n = p²`, 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeRelation {
    pub p: u64,
    pub n: usize,
    pairs: BTreeSet<(usize, usize)>,
}

impl EdgeRelation {
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.pairs.contains(&(i, j))
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// `(i+1, j+1)` for `i = a + bp`, `j = c + dp` with `c ≡ a + bd (mod p)`.
pub fn gen_en(p: u64) -> Result<EdgeRelation> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let pu = usize::try_from(p).map_err(|_| Error::InvalidParameter(format!("p = {p}")))?;
    let n = pu
        .checked_mul(pu)
        .ok_or_else(|| Error::InvalidParameter(format!("p = {p} is too large")))?;
    let mut pairs = BTreeSet::new();
    for i in 0..n {
        let (a, b) = (i % pu, i / pu);
        for d in 0..pu {
            let c = (a + b * d) % pu;
            pairs.insert((i + 1, c + d * pu + 1));
        }
    }
    Ok(EdgeRelation { p, n, pairs })
}

fn var(index: usize) -> Var {
    Var::from_index(u32::try_from(index).expect("variable index fits in u32"))
}

fn positive(vars: &[Var]) -> Vec<Lit> {
    vars.iter().copied().map(Lit::pos).collect()
}

/// X_i is variable `i`, Y_j is variable `n + j`.
fn psi_vars(n: usize) -> (BTreeSet<Var>, BTreeMap<Var, String>) {
    let mut names = BTreeMap::new();
    for i in 1..=n {
        names.insert(var(i), format!("X{i}"));
        names.insert(var(n + i), format!("Y{i}"));
    }
    (names.keys().copied().collect(), names)
}

/// `⋁_{(i,j)∈E} X_i Y_j`.
pub fn gen_psi(p: u64) -> Result<DnfFormula> {
    let e = gen_en(p)?;
    let (universe, names) = psi_vars(e.n);
    let terms = e.pairs().map(|(i, j)| positive(&[var(i), var(e.n + j)]));
    Ok(DnfFormula::new(terms, universe)?.with_names(names))
}

/// `⋀_{(i,j)∈E} (X_i ∨ Y_j)`.
pub fn gen_psi_dual(p: u64) -> Result<CnfFormula> {
    let e = gen_en(p)?;
    let (universe, _) = psi_vars(e.n);
    let clauses = e.pairs().map(|(i, j)| positive(&[var(i), var(e.n + j)]));
    CnfFormula::new(clauses, universe)
}

fn require_positive(n: usize, what: &str) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter(format!("{what} must be at least 1")));
    }
    Ok(())
}

/// Variable numbering of [`gen_phi`]: X_i, then Z_ij row-major, then Y_j.
pub fn phi_x(i: usize) -> Var {
    var(i)
}

pub fn phi_z(n: usize, i: usize, j: usize) -> Var {
    var(n + (i - 1) * n + j)
}

pub fn phi_y(n: usize, j: usize) -> Var {
    var(n + n * n + j)
}

/// `⋁_{i,j} X_i Z_ij Y_j`.
pub fn gen_phi(n: usize) -> Result<DnfFormula> {
    require_positive(n, "n")?;
    let mut names = BTreeMap::new();
    let mut terms = Vec::with_capacity(n * n);
    for i in 1..=n {
        names.insert(phi_x(i), format!("X{i}"));
        names.insert(phi_y(n, i), format!("Y{i}"));
        for j in 1..=n {
            names.insert(phi_z(n, i, j), format!("Z{i}{j}"));
            terms.push(positive(&[phi_x(i), phi_z(n, i, j), phi_y(n, j)]));
        }
    }
    let universe = names.keys().copied().collect();
    Ok(DnfFormula::new(terms, universe)?.with_names(names))
}

/// Z_ij is variable `(i-1)n + j`.
pub fn grid_var(n: usize, i: usize, j: usize) -> Var {
    var((i - 1) * n + j)
}

fn grid_names(n: usize, letter: &str) -> BTreeMap<Var, String> {
    let mut names = BTreeMap::new();
    for i in 1..=n {
        for j in 1..=n {
            names.insert(grid_var(n, i, j), format!("{letter}{i}{j}"));
        }
    }
    names
}

/// `⋁_{i,j,k} Z_ij Z_jk Z_ki`, with repeated literals collapsed and repeated
/// terms dropped.
pub fn gen_triangle(n: usize) -> Result<DnfFormula> {
    require_positive(n, "n")?;
    let mut terms = Vec::with_capacity(n * n * n);
    for i in 1..=n {
        for j in 1..=n {
            for k in 1..=n {
                terms.push(positive(&[
                    grid_var(n, i, j),
                    grid_var(n, j, k),
                    grid_var(n, k, i),
                ]));
            }
        }
    }
    let names = grid_names(n, "Z");
    let universe = names.keys().copied().collect();
    Ok(DnfFormula::new(terms, universe)?
        .dedup_terms()
        .with_names(names))
}

/// `f_n ∨ g_n`: even parity with an all-1 row, or odd parity with an all-1
/// column.
pub fn gamma_eval(matrix: &[Vec<bool>]) -> Result<bool> {
    let n = matrix.len();
    if matrix.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidParameter("matrix is not square".into()));
    }
    let ones = matrix.iter().flatten().filter(|&&b| b).count();
    if ones % 2 == 0 {
        Ok(matrix.iter().any(|row| row.iter().all(|&b| b)))
    } else {
        Ok((0..n).any(|j| matrix.iter().all(|row| row[j])))
    }
}

/// [`gamma_eval`] over the variables X_ij = `(i-1)n + j`.
pub fn gamma_fn(n: usize) -> NativeFn<impl Fn(&Assignment) -> bool> {
    let vars: BTreeSet<Var> = grid_names(n, "X").into_keys().collect();
    NativeFn::new(vars, move |a: &Assignment| {
        let matrix: Vec<Vec<bool>> = (1..=n)
            .map(|i| {
                (1..=n)
                    .map(|j| a.get(grid_var(n, i, j)).unwrap_or(false))
                    .collect()
            })
            .collect();
        gamma_eval(&matrix).expect("square by construction")
    })
}

/// Block-tree decision-DNNF with its named nodes.
#[derive(Clone, Debug)]
pub struct TightExample {
    pub dag: CircuitDag,
    pub p: u32,
    /// `2^p - 1`: the number of blocks, and of variables per block.
    pub m: usize,
    /// Blocks in breadth-first order; `""` is the root block.
    pub blocks: Vec<String>,
    /// `entries[b][i - 1]` is the decision node on X_{w,i} of block `b`.
    pub entries: Vec<Vec<NodeId>>,
    /// `ands[b][i - 1]` is the i-th AND node of block `b`, `1 ≤ i ≤ m + 1`.
    pub ands: Vec<Vec<NodeId>>,
}

impl TightExample {
    pub fn block(&self, w: &str) -> Option<usize> {
        self.blocks.iter().position(|b| b == w)
    }

    /// X_{0…0,m}: the last decision node of the leftmost bottom block.
    pub fn bottom_left(&self) -> NodeId {
        let w = "0".repeat(self.p as usize - 1);
        self.entries[self.block(&w).expect("bottom-left block exists")][self.m - 1]
    }
}

/// Blocks `w` with `|w| ≤ p - 1`, each with decisions X_{w,1..m} and AND
/// nodes A_{w,1..m+1}. X_{w,i} goes to X_{w,i+1} on 0 (A_{w,m+1} after the
/// last) and to A_{w,i} on 1. A_{w,i} joins the same entry of blocks `w0`
/// and `w1`; at the bottom level every AND joins two single-variable
/// decisions private to the block.
pub fn gen_tight_example(p: u32) -> Result<TightExample> {
    if p == 0 || p > 12 {
        return Err(Error::InvalidParameter(format!("p = {p} must be in 1..=12")));
    }
    let m = (1usize << p) - 1;
    let mut blocks = vec![String::new()];
    let mut level_start = 0;
    for _ in 1..p {
        let level_end = blocks.len();
        for b in level_start..level_end {
            let w = blocks[b].clone();
            blocks.push(format!("{w}0"));
            blocks.push(format!("{w}1"));
        }
        level_start = level_end;
    }
    let bottom = p as usize - 1;
    let mut universe = BTreeSet::new();
    let x_var = |b: usize, i: usize| var(b * m + i);
    let mut next_free = blocks.len() * m;

    let mut builder = DagBuilder::new();
    let zero = builder.sink(false);
    let one = builder.sink(true);
    let mut entries = vec![Vec::new(); blocks.len()];
    let mut ands = vec![Vec::new(); blocks.len()];
    for b in (0..blocks.len()).rev() {
        let w = &blocks[b];
        let block_ands: Vec<NodeId> = if w.len() == bottom {
            let mut boxes = [zero; 2];
            for slot in &mut boxes {
                next_free += 1;
                universe.insert(var(next_free));
                *slot = builder.decision(var(next_free), zero, one);
            }
            (0..=m).map(|_| builder.and(boxes.to_vec())).collect()
        } else {
            let left = blocks.iter().position(|c| *c == format!("{w}0")).expect("child");
            let right = blocks.iter().position(|c| *c == format!("{w}1")).expect("child");
            let mut v: Vec<NodeId> = (0..m)
                .map(|i| builder.and(vec![entries[left][i], entries[right][i]]))
                .collect();
            v.push(builder.and(vec![ands[left][m], ands[right][m]]));
            v
        };
        let mut xs = vec![zero; m];
        let mut lo = block_ands[m];
        for i in (0..m).rev() {
            universe.insert(x_var(b, i + 1));
            xs[i] = builder.decision(x_var(b, i + 1), lo, block_ands[i]);
            lo = xs[i];
        }
        entries[b] = xs;
        ands[b] = block_ands;
    }
    let root = entries[0][0];
    let dag = builder.finish(root, universe, Flavor::DecisionDnnf)?;
    Ok(TightExample {
        dag,
        p,
        m,
        blocks,
        entries,
        ands,
    })
}

/// `n_terms` samples of `k` distinct variables from `1..=n_vars`, with
/// repeated terms dropped. The universe is all of `1..=n_vars`.
pub fn gen_random_monotone_dnf(
    n_vars: usize,
    n_terms: usize,
    k: usize,
    seed: u64,
) -> Result<DnfFormula> {
    if k > n_vars {
        return Err(Error::InvalidParameter(format!(
            "term width {k} exceeds {n_vars} variables"
        )));
    }
    if u32::try_from(n_vars).is_err() {
        return Err(Error::InvalidParameter(format!("{n_vars} variables")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms: Vec<Vec<Lit>> = (0..n_terms)
        .map(|_| {
            sample(&mut rng, n_vars, k)
                .into_iter()
                .map(|i| Lit::pos(var(i + 1)))
                .collect()
        })
        .collect();
    let universe = (1..=n_vars).map(var).collect();
    Ok(DnfFormula::new(terms, universe)?.dedup_terms())
}
