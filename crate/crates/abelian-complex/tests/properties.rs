use abelian_complex::{
    build_class_complex, zeta_chain, AbelianLattice, ComplexError, LatticeChain, NilpotentGroupData, UniMatrix,
};
use proptest::prelude::*;

fn lattice_strategy() -> impl Strategy<Value = AbelianLattice> {
    (2usize..=5)
        .prop_flat_map(|d| (Just(d), 1..=d))
        .prop_flat_map(|(d, r)| (Just(d), prop::collection::vec(prop::collection::vec(-6i128..=6, d), r)))
        .prop_filter_map("rows must be independent", |(d, rows)| {
            let l = AbelianLattice::from_rows(d, &rows).ok()?;
            (l.rank() == rows.len()).then_some(l)
        })
}

/// Generator pool of `H3 ⊕ H3` in 6×6 block form: `x₁, y₁, z₁, x₂, y₂, z₂`,
/// the `x`, `y` raised to the given exponents.
fn pool(ex: &[i128; 4]) -> Vec<UniMatrix> {
    vec![
        UniMatrix::elementary(6, 0, 1, ex[0]),
        UniMatrix::elementary(6, 1, 2, ex[1]),
        UniMatrix::elementary(6, 0, 2, 1),
        UniMatrix::elementary(6, 3, 4, ex[2]),
        UniMatrix::elementary(6, 4, 5, ex[3]),
        UniMatrix::elementary(6, 3, 5, 1),
    ]
}

/// A chain `N₀ < … < N_k` given by nested nonempty subsets of the pool.
fn group_chain_strategy() -> impl Strategy<Value = Vec<NilpotentGroupData>> {
    (prop::array::uniform4(1i128..=2), Just((0..6).collect::<Vec<usize>>()).prop_shuffle(), 1usize..=4, 1usize..=6)
        .prop_map(|(ex, order, len, first)| {
            let gens = pool(&ex);
            (first..=(first + len - 1).min(6))
                .enumerate()
                .map(|(i, size)| {
                    let g = order[..size].iter().map(|&j| gens[j].clone()).collect();
                    NilpotentGroupData::new(format!("N{i}"), g).unwrap()
                })
                .collect()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn virtual_classes_ignore_finite_index(a in lattice_strategy()) {
        let class = a.virtual_class().unwrap();
        for m in [2, 3, 6] {
            prop_assert_eq!(a.scaled(m).unwrap().virtual_class().unwrap(), class.clone());
        }
        prop_assert_eq!(class.lattice().virtual_class().unwrap(), class);
    }

    #[test]
    fn zeta_is_abelian_and_monotone(chain in group_chain_strategy()) {
        let prefixes = match zeta_chain(&chain) {
            Err(ComplexError::CenterIncomplete { .. }) => return Err(TestCaseError::reject("center beyond the word ball")),
            r => r.unwrap(),
        };
        let top = prefixes.last().unwrap().generators().unwrap();
        for a in &top {
            for b in &top {
                prop_assert!(a.commutator(b).unwrap().is_identity());
            }
        }
        for w in prefixes.windows(2) {
            prop_assert!(w[1].contains(&w[0]).unwrap());
        }
        let mut lattices = prefixes;
        lattices.dedup();
        let model = build_class_complex(&[LatticeChain { name: "zeta".into(), lattices, model_dim: None }]).unwrap();
        prop_assert!(model.rank_violations().is_empty());
    }

    #[test]
    fn random_flags_satisfy_rank_bounds(
        d in 2usize..=5,
        steps in prop::collection::vec((prop::collection::vec(-4i128..=4, 5), 1i128..=3), 1..6),
    ) {
        let mut chain: Vec<AbelianLattice> = Vec::new();
        for (v, m) in steps {
            let row: Vec<i128> = v[..d].iter().map(|x| x * m).collect();
            if row.iter().all(|x| *x == 0) {
                continue;
            }
            let next = match chain.last() {
                None => AbelianLattice::from_rows(d, &[row]).unwrap(),
                Some(prev) => prev.join(&AbelianLattice::from_rows(d, &[row]).unwrap()).unwrap(),
            };
            if chain.last() != Some(&next) {
                chain.push(next);
            }
        }
        prop_assume!(!chain.is_empty());
        let model = build_class_complex(&[LatticeChain { name: "flag".into(), lattices: chain, model_dim: None }]).unwrap();
        prop_assert!(model.rank_violations().is_empty());
        prop_assert!(model.dimension < model.max_rank);
    }
}
