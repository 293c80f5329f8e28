use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use kc_core::circuit::{is_normalized, isomorphic, normalize, validate};
use kc_core::compiler::{compile, is_monotone_kdnf, Heuristic};
use kc_core::convert::{convert, max_ands_on_path};
use kc_core::counting::{count_dnnf, count_fbdd, prob_dnnf, prob_fbdd, WeightMap};
use kc_core::io::{parse_fbdd, parse_formula, parse_nnf, write_fbdd, write_formula, write_nnf};
use kc_core::lineage::{hierarchical, Arg, Atom, Cq, Ucq};
use kc_core::oracle::{brute_count, equivalent, DagFn};
use kc_core::{CnfFormula, DnfFormula, Formula, Lit, Var};

const MAX_VARS: u32 = 9;

fn lit() -> impl Strategy<Value = Lit> {
    (1..=MAX_VARS, any::<bool>()).prop_map(|(v, pos)| Lit::new(Var::from_index(v), pos))
}

fn universe() -> BTreeSet<Var> {
    (1..=MAX_VARS).map(Var::from_index).collect()
}

fn formula() -> impl Strategy<Value = Formula> {
    let groups = prop::collection::vec(prop::collection::vec(lit(), 1..=4), 0..=8);
    (groups, any::<bool>()).prop_map(|(g, dnf)| {
        if dnf {
            DnfFormula::new(g, universe()).unwrap().into()
        } else {
            CnfFormula::new(g, universe()).unwrap().into()
        }
    })
}

fn monotone_dnf() -> impl Strategy<Value = DnfFormula> {
    let term = prop::collection::btree_set(1..=MAX_VARS, 1..=3)
        .prop_map(|s| s.into_iter().map(|v| Lit::new(Var::from_index(v), true)).collect::<Vec<_>>());
    prop::collection::vec(term, 1..=8).prop_map(|t| DnfFormula::new(t, universe()).unwrap())
}

fn heuristic() -> impl Strategy<Value = Heuristic> {
    prop_oneof![Just(Heuristic::FixedOrder), Just(Heuristic::MostFrequentVar)]
}

fn weights() -> impl Strategy<Value = WeightMap<BigRational>> {
    prop::collection::vec((0i64..=16, 1i64..=16), MAX_VARS as usize).prop_map(|ws| {
        let p = ws
            .into_iter()
            .enumerate()
            .map(|(i, (a, b))| {
                let (n, d) = (a.min(b), a.max(b));
                (Var::from_index(i as u32 + 1), BigRational::new(BigInt::from(n), BigInt::from(d.max(1))))
            })
            .collect();
        WeightMap::new(p).unwrap()
    })
}

fn query() -> impl Strategy<Value = Cq> {
    let names = ["x", "y", "z"];
    let atom = (0usize..3, prop::collection::vec(0usize..3, 1..=2))
        .prop_map(move |(r, args)| Atom::new(format!("R{r}_{}", args.len()), args.iter().map(|&a| Arg::Var(names[a].into())).collect()));
    prop::collection::vec(atom, 1..=4).prop_map(move |atoms| {
        let used: BTreeSet<String> = atoms
            .iter()
            .flat_map(|a| a.args.iter())
            .filter_map(|a| match a {
                Arg::Var(x) => Some(x.clone()),
                Arg::Const(_) => None,
            })
            .collect();
        Cq::new(used.into_iter().collect(), atoms).unwrap()
    })
}

/// Textbook check: every pair of variables has nested or disjoint atom sets.
fn nested_or_disjoint(q: &Cq) -> bool {
    let at: Vec<BTreeSet<usize>> = q
        .vars()
        .iter()
        .map(|v| {
            q.atoms()
                .iter()
                .enumerate()
                .filter(|(_, a)| a.args.contains(&Arg::Var(v.clone())))
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    at.iter().all(|a| {
        at.iter()
            .all(|b| a.is_disjoint(b) || a.is_subset(b) || b.is_subset(a))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn compiled_formula_is_equivalent(f in formula(), h in heuristic()) {
        let dag = compile(&f, h).unwrap();
        prop_assert!(validate(&dag).ok());
        let g = DagFn::new(&dag).unwrap();
        let reference: &dyn kc_core::oracle::BoolFn = match &f {
            Formula::Dnf(d) => d,
            Formula::Cnf(c) => c,
        };
        prop_assert!(equivalent(reference, &g, f.universe()).unwrap().is_equivalent());
    }

    #[test]
    fn normalize_is_idempotent(f in formula()) {
        let dag = compile(&f, Heuristic::FixedOrder).unwrap();
        let once = normalize(&dag).unwrap();
        prop_assert!(is_normalized(&once));
        prop_assert!(isomorphic(&once, &normalize(&once).unwrap()));
        let (a, b) = (DagFn::new(&dag).unwrap(), DagFn::new(&once).unwrap());
        prop_assert!(equivalent(&a, &b, dag.universe()).unwrap().is_equivalent());
    }

    #[test]
    fn conversion_preserves_function(f in formula(), h in heuristic()) {
        let dag = compile(&f, h).unwrap();
        let (fbdd, report) = convert(&dag).unwrap();
        prop_assert!(validate(&fbdd).ok());
        prop_assert!(report.within_set_bound());
        prop_assert!(report.within_quasipoly_bound());
        prop_assert!(report.light_depth_ok());
        let (a, b) = (DagFn::new(&dag).unwrap(), DagFn::new(&fbdd).unwrap());
        prop_assert!(equivalent(&a, &b, dag.universe()).unwrap().is_equivalent());
    }

    #[test]
    fn counts_agree(f in formula(), w in weights()) {
        let dag = compile(&f, Heuristic::MostFrequentVar).unwrap();
        let (fbdd, _) = convert(&dag).unwrap();
        let u = f.universe();
        let brute = brute_count(&DagFn::new(&dag).unwrap(), u).unwrap();
        prop_assert_eq!(&count_dnnf(&dag, u).unwrap(), &brute);
        prop_assert_eq!(&count_fbdd(&fbdd, u).unwrap(), &brute);
        prop_assert_eq!(prob_dnnf(&dag, &w).unwrap(), prob_fbdd(&fbdd, &w).unwrap());
    }

    #[test]
    fn monotone_compilation_respects_width(f in monotone_dnf()) {
        let (monotone, k) = is_monotone_kdnf(&f);
        prop_assert!(monotone);
        let dag = compile(&f.into(), Heuristic::FixedOrder).unwrap();
        prop_assert!(max_ands_on_path(&dag).unwrap() < k.max(1));
    }

    #[test]
    fn formats_round_trip(f in formula()) {
        let text = write_formula(&f);
        let back = parse_formula(&text).unwrap();
        prop_assert_eq!(write_formula(&back), text);
        let dag = compile(&f, Heuristic::FixedOrder).unwrap();
        prop_assert!(isomorphic(&dag, &parse_nnf(&write_nnf(&dag).unwrap()).unwrap()));
        let (fbdd, _) = convert(&dag).unwrap();
        prop_assert!(isomorphic(&fbdd, &parse_fbdd(&write_fbdd(&fbdd).unwrap()).unwrap()));
    }

    #[test]
    fn hierarchy_ignores_atom_order(q in query(), seed in any::<u64>()) {
        let verdict = hierarchical(&Ucq::from(q.clone())).is_hierarchical();
        prop_assert_eq!(verdict, nested_or_disjoint(&q));
        let mut atoms = q.atoms().to_vec();
        let n = atoms.len();
        atoms.rotate_left((seed % n as u64) as usize);
        atoms.reverse();
        let shuffled = Cq::new(q.vars().to_vec(), atoms).unwrap();
        prop_assert_eq!(hierarchical(&Ucq::from(shuffled)).is_hierarchical(), verdict);
    }
}
