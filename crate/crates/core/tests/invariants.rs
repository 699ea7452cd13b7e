use std::collections::{BTreeSet, HashMap};

use hdx_cover::covers::{
    build_cover, coboundary, connected_components, holonomy_subgroup, is_cocycle, pushforward_error, verify_cover,
    GroupLabeling, TreeKind,
};
use hdx_cover::groups::{
    cayley_clique_complex, is_subgroup, normal_subgroups, quotient_group, subgroup_closure, GenSet, GroupTable,
};
use hdx_cover::pruning::{triangle_condition, Pruner};
use hdx_cover::spectral::adjacency_spectrum;
use hdx_cover::{PureComplex, Vertex};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn all_triangles(n: u32) -> Vec<Vec<Vertex>> {
    let mut out = vec![];
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                out.push(vec![a, b, c]);
            }
        }
    }
    out
}

/// Random weighted 2-complex: a nonempty subset of K_n's triangles.
fn weighted_complex() -> impl Strategy<Value = PureComplex> {
    (4u32..8).prop_flat_map(|n| {
        let tris = all_triangles(n);
        let k = tris.len();
        (Just(tris), proptest::collection::vec((any::<bool>(), 0.1f64..5.0), k)).prop_filter_map(
            "empty",
            |(tris, picks)| {
                let faces: Vec<(Vec<Vertex>, f64)> =
                    tris.into_iter().zip(picks).filter(|(_, p)| p.0).map(|(t, p)| (t, p.1)).collect();
                if faces.is_empty() {
                    None
                } else {
                    PureComplex::build(2, faces).ok()
                }
            },
        )
    })
}

fn small_group() -> impl Strategy<Value = GroupTable> {
    prop_oneof![
        (2usize..9).prop_map(|n| GroupTable::cyclic(n).unwrap()),
        (3usize..6).prop_map(|n| GroupTable::dihedral(n).unwrap()),
        Just(GroupTable::symmetric(3).unwrap()),
        Just(GroupTable::product(&GroupTable::cyclic(2).unwrap(), &GroupTable::cyclic(4).unwrap()).unwrap()),
    ]
}

/// The seven-vertex torus.
fn torus() -> PureComplex {
    let faces = (0..7u32).flat_map(|i| [vec![i, (i + 1) % 7, (i + 3) % 7], vec![i, (i + 2) % 7, (i + 3) % 7]]);
    PureComplex::uniform(2, faces.collect()).unwrap()
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn level_measures_sum_to_one(x in weighted_complex()) {
        for l in 0..=2 {
            let total: f64 = x.faces(l).iter().map(|f| x.face_measure(f).unwrap()).sum();
            prop_assert!((total - 1.0).abs() < 1e-12, "level {} sums to {}", l, total);
        }
    }

    #[test]
    fn link_measure_is_conditional(x in weighted_complex()) {
        // Prob_{X_v}(t) = Prob(t ∪ v) / Prob(v), recomputed from top weights
        let total: f64 = x.weights().iter().sum();
        for &v in x.vertices().iter().take(3) {
            let link = x.link(&[v]).unwrap();
            for e in link.tops() {
                let mut top = e.clone();
                top.push(v);
                top.sort_unstable();
                let w_top = x.weights()[x.top_position(&top).unwrap()] / total;
                let w_v: f64 = x
                    .tops()
                    .iter()
                    .zip(x.weights())
                    .filter(|(t, _)| t.contains(&v))
                    .map(|(_, w)| w / total)
                    .sum();
                let got = link.face_measure(e).unwrap();
                prop_assert!((got - w_top / w_v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn coboundary_covers_split_into_copies(g in small_group(), n in 4usize..8, seed in any::<u64>()) {
        use rand::Rng;
        let x = PureComplex::complete(n, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h: HashMap<Vertex, u32> = x.vertices().into_iter().map(|v| (v, rng.gen_range(0..g.order() as u32))).collect();
        let f = coboundary(&x, &g, &h);
        prop_assert!(is_cocycle(&x, &g, &f));
        let cover = build_cover(&x, &g, &f).unwrap();
        prop_assert_eq!(connected_components(&cover.complex).0, g.order());
        prop_assert!(verify_cover(&cover.complex, &x, &|v| cover.phi(v)).pass);
        prop_assert!(pushforward_error(&cover, &x) <= 1e-12);
    }

    #[test]
    fn torus_cover_components_match_holonomy_index(k in 2usize..13, a in 0i64..12, b in 0i64..12) {
        // φ(x, y) = a·x + b·y mod k on steps (1,0), (-1,1), (0,1)
        let x = torus();
        let g = GroupTable::cyclic(k).unwrap();
        let step = |d: u32| -> i64 {
            match d {
                1 => a,
                2 => b - a,
                3 => b,
                _ => unreachable!(),
            }
        };
        let labels = x
            .faces(1)
            .iter()
            .map(|e| {
                let d = (e[1] + 7 - e[0]) % 7;
                let v = if d <= 3 { step(d) } else { -step(7 - d) };
                v.rem_euclid(k as i64) as u32
            })
            .collect();
        let f = GroupLabeling::new(&x, &g, labels).unwrap();
        prop_assert!(is_cocycle(&x, &g, &f));
        let h = holonomy_subgroup(&x, &g, &f, 0, TreeKind::Bfs).unwrap();
        let h2 = holonomy_subgroup(&x, &g, &f, 3, TreeKind::Dfs).unwrap();
        prop_assert_eq!(h.len(), h2.len());
        // the holonomy is φ of the lattice (7,0), (-3,1): generated by 7a, b − 3a
        let expect = k / gcd(k, gcd((7 * a).rem_euclid(k as i64) as usize, (b - 3 * a).rem_euclid(k as i64) as usize));
        prop_assert_eq!(h.len(), expect);
        let cover = build_cover(&x, &g, &f).unwrap();
        prop_assert_eq!(connected_components(&cover.complex).0, k / h.len());
        prop_assert!(verify_cover(&cover.complex, &x, &|v| cover.phi(v)).pass);
    }

    #[test]
    fn subgroup_closure_is_smallest_subgroup(g in small_group(), seeds in proptest::collection::vec(0u32..24, 0..3)) {
        let seeds: Vec<u32> = seeds.into_iter().map(|s| s % g.order() as u32).collect();
        let h = subgroup_closure(&g, &seeds);
        prop_assert!(is_subgroup(&g, &h));
        prop_assert!(seeds.iter().all(|s| h.contains(s)));
        // brute force: the closure of words of length ≤ |G|
        let mut words: BTreeSet<u32> = [0].into_iter().collect();
        loop {
            let next: BTreeSet<u32> =
                words.iter().flat_map(|&w| seeds.iter().map(move |&s| (w, s))).map(|(w, s)| g.mul(w, s)).chain(words.iter().copied()).collect();
            if next == words {
                break;
            }
            words = next;
        }
        prop_assert_eq!(h.iter().copied().collect::<BTreeSet<_>>(), words);
    }

    #[test]
    fn cyclic_closure_has_gcd_order(n in 2usize..30, a in 0usize..30) {
        let g = GroupTable::cyclic(n).unwrap();
        let a = a % n;
        prop_assert_eq!(subgroup_closure(&g, &[a as u32]).len(), n / gcd(n, a));
    }

    #[test]
    fn quotients_are_homomorphic_images(g in small_group()) {
        for nsub in normal_subgroups(&g) {
            let (q, proj) = quotient_group(&g, &nsub).unwrap();
            prop_assert_eq!(q.order() * nsub.len(), g.order());
            for a in g.elements() {
                for b in g.elements() {
                    prop_assert_eq!(proj[g.mul(a, b) as usize], q.mul(proj[a as usize], proj[b as usize]));
                }
            }
        }
    }

    #[test]
    fn spectrum_moments_match_traces(x in weighted_complex()) {
        // Σλ = tr(D^{-1}A) = 0 and Σλ² = Σ_{u,v} w(u,v)² / (ν(u)ν(v)) / 4
        let g = x.one_skeleton().unwrap();
        let spec = adjacency_spectrum(&g);
        prop_assert!((spec.eigenvalues.iter().sum::<f64>()).abs() < 1e-9);
        prop_assert!(spec.eigenvalues.iter().all(|&l| (-1.0 - 1e-9..=1.0 + 1e-9).contains(&l)));
        let m = g.vertex_mass();
        let second: f64 = g.edges().iter().map(|&(i, j, w)| 2.0 * (w / 2.0).powi(2) / (m[i] * m[j])).sum();
        let got: f64 = spec.eigenvalues.iter().map(|l| l * l).sum();
        prop_assert!((got - second).abs() < 1e-8, "{} vs {}", got, second);
    }

    #[test]
    fn satisfied_tops_match_direct_check(seed in any::<u64>(), n in 6usize..12) {
        let x = PureComplex::complete(n, 2).unwrap();
        let g = GroupTable::cyclic(5).unwrap();
        let s = GenSet::new(&g, &[1, 4, 2, 3]).unwrap();
        let p = Pruner::new(&x, &g, &s).unwrap();
        let f = p.sample_labeling(&mut ChaCha8Rng::seed_from_u64(seed));
        let sat: BTreeSet<usize> = p.satisfied_tops(&f).into_iter().collect();
        for (i, t) in x.tops().iter().enumerate() {
            // direct: every directed label lies in S and the two-step product agrees
            let lab = |u: Vertex, v: Vertex| p.dir(&f, u, v);
            let direct = (0..3).all(|a| (a + 1..3).all(|b| s.contains(lab(t[a], t[b]))))
                && g.mul(lab(t[0], t[1]), lab(t[1], t[2])) == lab(t[0], t[2]);
            prop_assert_eq!(sat.contains(&i), direct);
            prop_assert_eq!(triangle_condition(&g, t, lab), direct);
        }
    }
}

#[test]
fn cayley_triangles_match_clique_enumeration() {
    for n in 5usize..14 {
        let g = GroupTable::cyclic(n).unwrap();
        let s = GenSet::new(&g, &[1, (n - 1) as u32, 2, (n - 2) as u32]).unwrap();
        let c = cayley_clique_complex(&g, &s, 2).unwrap();
        let adj = |a: usize, b: usize| {
            let d = (b + n - a) % n;
            d == 1 || d == 2 || d == n - 1 || d == n - 2
        };
        let brute = (0..n)
            .flat_map(|a| (a + 1..n).flat_map(move |b| (b + 1..n).map(move |c| (a, b, c))))
            .filter(|&(a, b, c)| adj(a, b) && adj(b, c) && adj(a, c))
            .count();
        assert_eq!(c.complex.tops().len(), brute, "n = {n}");
        assert!(c.complex.faces(2).iter().any(|t| t == &vec![0, 1, 2]));
    }
}
