use std::collections::BTreeSet;

use proptest::prelude::*;

use bellscope::catalog::{load_catalog, lookup};
use bellscope::inequality::{
    are_equivalent, canonical_form, canonicalize, inclusion_digraph, includes, to_dot, BellInequality, Party,
    Transform,
};

fn inequality(max_m: usize) -> impl Strategy<Value = BellInequality> {
    (1..=max_m, 1..=max_m).prop_flat_map(|(m_a, m_b)| {
        (
            prop::collection::vec(-2i64..=2, m_a),
            prop::collection::vec(-2i64..=2, m_b),
            prop::collection::vec(prop::collection::vec(-2i64..=2, m_b), m_a),
            -2i64..=2,
        )
            .prop_map(|(a, b, j, bound)| BellInequality::new(a, b, j, bound).unwrap())
    })
}

/// A random group element acting on `m_a x m_b` inequalities.
fn transform(m_a: usize, m_b: usize) -> impl Strategy<Value = Transform> {
    any::<bool>().prop_flat_map(move |swap| {
        let (t_a, t_b) = if swap { (m_b, m_a) } else { (m_a, m_b) };
        (
            Just((0..t_a).collect::<Vec<usize>>()).prop_shuffle(),
            Just((0..t_b).collect::<Vec<usize>>()).prop_shuffle(),
            prop::collection::vec(any::<bool>(), t_a),
            prop::collection::vec(any::<bool>(), t_b),
        )
            .prop_map(move |(perm_a, perm_b, flip_a, flip_b)| Transform {
                swap_parties: swap,
                perm_a,
                perm_b,
                flip_a,
                flip_b,
            })
    })
}

fn with_transform(max_m: usize) -> impl Strategy<Value = (BellInequality, Transform)> {
    inequality(max_m).prop_flat_map(|x| {
        let t = transform(x.m_a(), x.m_b());
        (Just(x), t)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn flip_is_an_involution(x in inequality(4), pick in any::<prop::sample::Index>(), bob in any::<bool>()) {
        let party = if bob { Party::B } else { Party::A };
        let k = pick.index(x.settings(party));
        let twice = x.flip_outcome(party, k).unwrap().flip_outcome(party, k).unwrap();
        prop_assert_eq!(twice, x);
    }

    #[test]
    fn inverse_undoes_transform((x, t) in with_transform(4)) {
        let y = t.apply(&x).unwrap();
        prop_assert_eq!(t.inverse().apply(&y).unwrap(), x.clone());
        prop_assert!(t.then(&t.inverse()).unwrap().is_identity());
    }

    #[test]
    fn classical_gap_is_invariant((x, t) in with_transform(4)) {
        let y = t.apply(&x).unwrap();
        prop_assert_eq!(
            y.classical_max().unwrap() - y.bound(),
            x.classical_max().unwrap() - x.bound()
        );
    }

    #[test]
    fn canonical_form_is_a_class_invariant((x, t) in with_transform(3)) {
        let c = canonical_form(&x);
        prop_assert_eq!(canonical_form(&c), c.clone());
        prop_assert_eq!(canonical_form(&t.apply(&x).unwrap()), c);
    }

    #[test]
    fn equivalence_witness_is_valid((x, t) in with_transform(3)) {
        let y = t.apply(&x).unwrap();
        let w = are_equivalent(&x, &y).expect("transformed copies are equivalent");
        prop_assert_eq!(w.apply(&x).unwrap(), y.clone());
        let back = are_equivalent(&y, &x).expect("symmetric");
        prop_assert_eq!(back.apply(&y).unwrap(), x.clone());
        prop_assert!(are_equivalent(&x, &x).is_some());
    }

    #[test]
    fn equivalence_is_transitive((x, t) in with_transform(3), seed in any::<u64>()) {
        let y = t.apply(&x).unwrap();
        // a second, fixed-shape element built from the seed
        let (m_a, m_b) = (y.m_a(), y.m_b());
        let mut u = Transform::identity(m_a, m_b);
        u.perm_a.rotate_left(seed as usize % m_a);
        u.flip_b[seed as usize % m_b] = seed & 1 == 1;
        let z = u.apply(&y).unwrap();
        prop_assert!(are_equivalent(&x, &z).is_some());
    }

    #[test]
    fn xor_form_reconstructs(x in inequality(4)) {
        if let Some(c) = x.xor_game_form() {
            let back = BellInequality::from_xor_game(&c, x.bound()).unwrap();
            prop_assert_eq!(back, x.clone());
            for i in 0..x.m_a() {
                for j in 0..x.m_b() {
                    prop_assert_eq!(*c[i][j].numer() * 2 / *c[i][j].denom(), -x.joint(i, j));
                }
            }
        }
    }

    #[test]
    fn includes_is_reflexive_and_survives_transforms((x, t) in with_transform(3)) {
        let y = t.apply(&x).unwrap();
        prop_assert!(includes(&x, &x).is_some());
        let w = includes(&x, &y).expect("equivalent inequalities include each other");
        prop_assert!(w.verify(&x, &y));
    }

    #[test]
    fn truncations_are_included((x, t) in with_transform(3), n_a in 1usize..=3, n_b in 1usize..=3) {
        let n_a = n_a.min(x.m_a());
        let n_b = n_b.min(x.m_b());
        let small = t.apply(&x).unwrap();
        let small = small.truncated(n_a.min(small.m_a()), n_b.min(small.m_b())).unwrap();
        let w = includes(&t.apply(&x).unwrap(), &small).expect("a leading block is included");
        prop_assert!(w.verify(&t.apply(&x).unwrap(), &small));
    }
}

fn chsh() -> BellInequality {
    lookup("CHSH").unwrap().inequality
}

#[test]
fn switched_chsh_matches_reference() {
    let sw = chsh().flip_outcome(Party::A, 0).unwrap().flip_outcome(Party::B, 0).unwrap();
    let want = BellInequality::new(vec![0, 1], vec![0, 1], vec![vec![1, -1], vec![-1, -1]], 1).unwrap();
    assert_eq!(sw, want);
    assert_eq!(sw.classical_max().unwrap(), 1);
}

#[test]
fn switching_preserves_classical_gap_of_i3322() {
    let x = lookup("I3322").unwrap().inequality;
    let y = x.flip_outcome(Party::A, 1).unwrap();
    assert_eq!(y.classical_max().unwrap() - y.bound(), x.classical_max().unwrap() - x.bound());
}

#[test]
fn swap_of_chsh_is_equivalent() {
    let t = Transform {
        swap_parties: true,
        ..Transform::identity(2, 2)
    };
    let y = t.apply(&chsh()).unwrap();
    assert_eq!(y, chsh().transposed());
    assert!(are_equivalent(&chsh(), &y).is_some());
}

#[test]
fn a28_round_trip_and_a8_recovery() {
    let a28 = lookup("A28").unwrap().inequality;
    let t = Transform {
        swap_parties: true,
        perm_a: vec![3, 1, 4, 0, 2],
        perm_b: vec![2, 4, 0, 1, 3],
        flip_a: vec![true, false, true, false, false],
        flip_b: vec![false, false, false, true, true],
    };
    assert_eq!(t.inverse().apply(&t.apply(&a28).unwrap()).unwrap(), a28);

    let a8 = lookup("A8").unwrap().inequality;
    let u = Transform {
        swap_parties: false,
        perm_a: vec![2, 0, 3, 1],
        perm_b: vec![4, 2, 0, 3, 1],
        flip_a: vec![false, true, false, false],
        flip_b: vec![true, false, false, true, false],
    };
    let shuffled = u.apply(&a8).unwrap();
    let w = are_equivalent(&a8, &shuffled).unwrap();
    assert_eq!(w.apply(&a8).unwrap(), shuffled);
    let (canon, to_canon) = canonicalize(&shuffled);
    assert_eq!(to_canon.apply(&shuffled).unwrap(), canon);
}

#[test]
fn i3322_fixes_a3_and_b1_to_reach_chsh() {
    let w = includes(&lookup("I3322").unwrap().inequality, &chsh()).unwrap();
    let fixed = w.fixed_measurements();
    assert_eq!(fixed.len(), 2);
    let parties: BTreeSet<Party> = fixed.iter().map(|f| f.0).collect();
    assert_eq!(parties.len(), 2);
}

#[test]
fn includes_is_transitive_on_the_catalog() {
    let cat: Vec<BellInequality> = load_catalog().into_iter().map(|e| e.inequality).collect();
    let inc: Vec<Vec<bool>> = cat
        .iter()
        .map(|a| cat.iter().map(|b| includes(a, b).is_some()).collect())
        .collect();
    for i in 0..cat.len() {
        assert!(inc[i][i]);
        for j in 0..cat.len() {
            for k in 0..cat.len() {
                if inc[i][j] && inc[j][k] {
                    assert!(inc[i][k], "{i} -> {j} -> {k}");
                }
            }
        }
    }
}

#[test]
fn catalog_digraph_is_the_reduced_closure() {
    let cat: Vec<BellInequality> = load_catalog().into_iter().map(|e| e.inequality).collect();
    let names: Vec<String> = cat.iter().map(|x| x.name().unwrap().to_owned()).collect();
    let arcs = inclusion_digraph(&cat);
    let arc_set: BTreeSet<(String, String)> = arcs.iter().cloned().collect();
    assert!(arc_set.contains(&("A3_I3322".into(), "A2_CHSH".into())));
    assert!(!arc_set.contains(&("I4422_1".into(), "A2_CHSH".into())));
    assert!(!arc_set.contains(&("I4422_2".into(), "A2_CHSH".into())));

    // reachability through the reduced arcs equals pairwise inclusion
    let n = names.len();
    let idx = |s: &str| names.iter().position(|x| x == s).unwrap();
    let mut reach = vec![vec![false; n]; n];
    for (a, b) in &arcs {
        reach[idx(a)][idx(b)] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let direct = includes(&cat[i], &cat[j]).is_some() && includes(&cat[j], &cat[i]).is_none();
            if direct {
                assert!(reach[i][j], "{} -> {} missing", names[i], names[j]);
            }
        }
    }
    // no arc is implied by two others
    for (a, b) in &arcs {
        let (i, j) = (idx(a), idx(b));
        for k in 0..n {
            if k != i && k != j {
                assert!(!(reach[i][k] && reach[k][j]), "{a} -> {b} is transitive");
            }
        }
    }
    assert!(to_dot(&arcs).contains("\"A3_I3322\" -> \"A2_CHSH\";"));
}

#[test]
fn single_entry_digraph_is_empty() {
    assert!(inclusion_digraph(&[chsh()]).is_empty());
    let three = [
        lookup("I3322").unwrap().inequality,
        chsh(),
        lookup("A1").unwrap().inequality,
    ];
    let arcs = inclusion_digraph(&three);
    assert!(arcs.contains(&("A3_I3322".into(), "A2_CHSH".into())));
}
