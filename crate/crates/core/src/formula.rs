//! Flat DNF and CNF formulas over integer variables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::circuit::Var;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit {
    var: Var,
    positive: bool,
}

impl Lit {
    pub const fn pos(var: Var) -> Lit {
        Lit {
            var,
            positive: true,
        }
    }

    pub const fn neg(var: Var) -> Lit {
        Lit {
            var,
            positive: false,
        }
    }

    pub fn new(var: Var, positive: bool) -> Lit {
        Lit { var, positive }
    }

    pub fn var(self) -> Var {
        self.var
    }

    pub fn is_positive(self) -> bool {
        self.positive
    }

    pub fn negated(self) -> Lit {
        Lit {
            var: self.var,
            positive: !self.positive,
        }
    }

    /// DIMACS convention: `3` is x3, `-3` is ¬x3.
    pub fn from_dimacs(value: i64) -> Result<Lit> {
        let index = u32::try_from(value.unsigned_abs()).map_err(|_| {
            Error::InvalidParameter(format!("literal {value} is out of range"))
        })?;
        Ok(Lit::new(Var::new(index)?, value > 0))
    }

    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.var.index());
        if self.positive {
            v
        } else {
            -v
        }
    }

    /// Value of the literal when its variable is set to `value`.
    pub fn eval(self, value: bool) -> bool {
        value == self.positive
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.var)
        } else {
            write!(f, "¬{}", self.var)
        }
    }
}

fn sorted_unique(lits: impl IntoIterator<Item = Lit>) -> Vec<Lit> {
    let mut lits: Vec<Lit> = lits.into_iter().collect();
    lits.sort();
    lits.dedup();
    lits
}

fn check_universe(groups: &[Vec<Lit>], universe: &BTreeSet<Var>) -> Result<()> {
    for lit in groups.iter().flatten() {
        if !universe.contains(&lit.var) {
            return Err(Error::VarOutsideUniverse(lit.var));
        }
    }
    Ok(())
}

fn occurring(groups: &[Vec<Lit>]) -> BTreeSet<Var> {
    groups.iter().flatten().map(|l| l.var).collect()
}

/// Disjunction of terms; each term is a conjunction of literals kept sorted
/// with repeated literals collapsed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DnfFormula {
    terms: Vec<Vec<Lit>>,
    universe: BTreeSet<Var>,
    names: BTreeMap<Var, String>,
}

impl DnfFormula {
    pub fn new<T, L>(terms: T, universe: BTreeSet<Var>) -> Result<DnfFormula>
    where
        T: IntoIterator<Item = L>,
        L: IntoIterator<Item = Lit>,
    {
        let terms: Vec<Vec<Lit>> = terms
            .into_iter()
            .map(sorted_unique)
            .collect();
        check_universe(&terms, &universe)?;
        Ok(DnfFormula {
            terms,
            universe,
            names: BTreeMap::new(),
        })
    }

    /// Universe is the set of variables occurring in the terms.
    pub fn from_terms<T, L>(terms: T) -> DnfFormula
    where
        T: IntoIterator<Item = L>,
        L: IntoIterator<Item = Lit>,
    {
        let terms: Vec<Vec<Lit>> = terms.into_iter().map(sorted_unique).collect();
        DnfFormula {
            universe: occurring(&terms),
            terms,
            names: BTreeMap::new(),
        }
    }

    pub fn terms(&self) -> &[Vec<Lit>] {
        &self.terms
    }

    pub fn universe(&self) -> &BTreeSet<Var> {
        &self.universe
    }

    pub fn names(&self) -> &BTreeMap<Var, String> {
        &self.names
    }

    pub fn with_names(mut self, names: BTreeMap<Var, String>) -> DnfFormula {
        self.names = names;
        self
    }

    pub fn is_monotone(&self) -> bool {
        self.terms.iter().flatten().all(|l| l.positive)
    }

    /// Largest term size (the k of a k-DNF); 0 for an empty DNF.
    pub fn width(&self) -> usize {
        self.terms.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Drops contradictory terms and repeated terms, keeping first occurrences.
    pub fn dedup_terms(mut self) -> DnfFormula {
        let mut seen = BTreeSet::new();
        self.terms.retain(|t| {
            !t.windows(2).any(|w| w[0].var == w[1].var) && seen.insert(t.clone())
        });
        self
    }

    /// Renders terms with the attached variable names where present.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "⊥".into();
        }
        let lit = |l: &Lit| {
            let name = self
                .names
                .get(&l.var)
                .cloned()
                .unwrap_or_else(|| l.var.to_string());
            if l.positive {
                name
            } else {
                format!("¬{name}")
            }
        };
        self.terms
            .iter()
            .map(|t| {
                if t.is_empty() {
                    "⊤".to_string()
                } else {
                    t.iter().map(lit).collect::<Vec<_>>().join(" ")
                }
            })
            .collect::<Vec<_>>()
            .join(" ∨ ")
    }
}

impl fmt::Display for DnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Conjunction of clauses; each clause is a disjunction of literals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfFormula {
    clauses: Vec<Vec<Lit>>,
    universe: BTreeSet<Var>,
}

impl CnfFormula {
    pub fn new<C, L>(clauses: C, universe: BTreeSet<Var>) -> Result<CnfFormula>
    where
        C: IntoIterator<Item = L>,
        L: IntoIterator<Item = Lit>,
    {
        let clauses: Vec<Vec<Lit>> = clauses
            .into_iter()
            .map(sorted_unique)
            .collect();
        check_universe(&clauses, &universe)?;
        Ok(CnfFormula { clauses, universe })
    }

    pub fn from_clauses<C, L>(clauses: C) -> CnfFormula
    where
        C: IntoIterator<Item = L>,
        L: IntoIterator<Item = Lit>,
    {
        let clauses: Vec<Vec<Lit>> = clauses.into_iter().map(sorted_unique).collect();
        CnfFormula {
            universe: occurring(&clauses),
            clauses,
        }
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    pub fn universe(&self) -> &BTreeSet<Var> {
        &self.universe
    }
}

impl fmt::Display for CnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.clauses.is_empty() {
            return f.write_str("⊤");
        }
        let parts: Vec<String> = self
            .clauses
            .iter()
            .map(|c| {
                let lits: Vec<String> = c.iter().map(ToString::to_string).collect();
                format!("({})", lits.join(" ∨ "))
            })
            .collect();
        f.write_str(&parts.join(" ∧ "))
    }
}

/// Compiler input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula {
    Dnf(DnfFormula),
    Cnf(CnfFormula),
}

impl Formula {
    pub fn universe(&self) -> &BTreeSet<Var> {
        match self {
            Formula::Dnf(f) => f.universe(),
            Formula::Cnf(f) => f.universe(),
        }
    }
}

impl From<DnfFormula> for Formula {
    fn from(f: DnfFormula) -> Self {
        Formula::Dnf(f)
    }
}

impl From<CnfFormula> for Formula {
    fn from(f: CnfFormula) -> Self {
        Formula::Cnf(f)
    }
}
