use num_bigint::BigUint;
use proptest::prelude::*;
use ramsey_core::bigtower::{fep_monochrome_search, star, FepCandidates, RuleColoring};
use ramsey_core::combinatorics::{fep, LargenessParams, WindowSet};
use ramsey_core::hjspace::{hj_search, phj_oplus, var_sets, CubeColoring, CubeShape, PhjPoint};
use ramsey_core::polyarith::PolyFamily;
use ramsey_core::search::{
    config_set_r, find_poly_config, pvdw_threshold, validate_witness, Coloring, Threshold, WitnessContext,
};
use ramsey_core::SearchConfig;

const CAP: u64 = 1 << 20;

fn families() -> impl Strategy<Value = PolyFamily> {
    prop::sample::select(vec!["d", "2*d", "d^2", "d,2*d", "d,d^2", "d,2*d,d^2"])
        .prop_map(|s| PolyFamily::parse_list(s).unwrap())
}

fn colorings() -> impl Strategy<Value = Coloring> {
    (1usize..=3, prop::collection::vec(0u8..3, 1..=24))
        .prop_map(|(r, v)| Coloring::new(r, v.into_iter().map(|c| c % r as u8).collect()).unwrap())
}

fn subset(a: &WindowSet, b: &WindowSet) -> bool {
    a.members().all(|m| b.contains(m as i64))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn found_configs_validate(c in colorings(), fam in families(), anchor in any::<bool>()) {
        if let Some(w) = find_poly_config(&c, &fam, anchor) {
            let v = validate_witness(&w, WitnessContext::Dense(&c));
            prop_assert!(v.valid, "{:?}", v.diagnostic);
        }
    }

    #[test]
    fn config_set_r_monotonicity(
        n in 1usize..=30,
        bits in prop::collection::vec(any::<bool>(), 30),
        add in 1usize..=30,
        fam in families(),
        g in 1usize..=3,
        l in 3usize..=8,
    ) {
        let a = WindowSet::from_fn(n, |i| bits[i - 1]);
        let mut b = a.clone();
        if add <= n { b.insert(add); }
        let p = |g, l| LargenessParams::new(g, l).unwrap();
        let r = config_set_r(&a, &fam, p(g, l));
        prop_assert!(subset(&r, &config_set_r(&b, &fam, p(g, l))));
        // Longer intervals are harder to find; longer gaps are easier to tolerate.
        prop_assert!(subset(&config_set_r(&a, &fam, p(g, l + 1)), &r));
        prop_assert!(subset(&r, &config_set_r(&a, &fam, p(g + 1, l.max(g + 1)))));
    }

    #[test]
    fn oplus_overwrites_exactly_gamma(
        n in 1usize..=3,
        q in 1u32..=3,
        seed in prop::collection::vec(1i64..=3, 12),
        xs in prop::collection::vec(1i64..=3, 2),
        pick in 0usize..7,
    ) {
        let levels = vec![
            (0..n).map(|i| (seed[i] - 1) % q as i64 + 1).collect::<Vec<_>>(),
            (0..n * n).map(|i| (seed[i + 3] - 1) % q as i64 + 1).collect(),
        ];
        let xs: Vec<i64> = xs.iter().map(|x| (x - 1) % q as i64 + 1).collect();
        let a = PhjPoint::new(q, n, levels).unwrap();
        let sets = var_sets(n);
        let gamma = &sets[pick % sets.len()];
        let b = phj_oplus(q, &a, gamma, &xs).unwrap();
        for (j, (lb, la)) in b.levels().iter().zip(a.levels()).enumerate() {
            for idx in 0..lb.len() {
                let comps = if j == 0 { vec![idx + 1] } else { vec![idx / n + 1, idx % n + 1] };
                let inside = comps.iter().all(|i| gamma.members().contains(i));
                prop_assert_eq!(lb[idx], if inside { xs[j] } else { la[idx] });
            }
        }
    }

    #[test]
    fn hj_lines_found_are_monochromatic(t in 2u32..=3, n in 1usize..=3, r in 1usize..=3, seed in any::<u64>()) {
        let shape = CubeShape::Hj { t, n };
        let col = CubeColoring::from_fn(shape, r, CAP, |p| {
            let h = p.iter().fold(seed, |h, &v| h.wrapping_mul(6364136223846793005).wrapping_add(v as u64));
            (h >> 33) as usize % r
        }).unwrap();
        if let Some(word) = hj_search(&col).unwrap() {
            let line = word.line().unwrap();
            let c0 = col.color(line[0].letters());
            prop_assert!(line.iter().all(|p| col.color(p.letters()) == c0));
        }
    }

    #[test]
    fn star_shift_law(n in 2u32..=5, a in 1u32..=4, b in 1u32..=4, c in 0u32..=4) {
        let big = BigUint::from;
        let lhs = star(&big(n), &big(a), &big(b), CAP).unwrap() * big(n).pow(c);
        prop_assert_eq!(lhs, star(&big(n), &big(a + c), &big(b), CAP).unwrap());
    }

    #[test]
    fn fep_search_results_are_monochromatic(
        rule in prop::sample::select(vec!["mod:2:0,1", "mod:3:0,1,1", "bits:3", "below:5,30", "mod:1:0"]),
        hi in 3u64..=7,
        size in 1usize..=2,
    ) {
        let col: RuleColoring = rule.parse().unwrap();
        let res = fep_monochrome_search(&FepCandidates::Range { lo: 2, hi }, size, &col, CAP, 1).unwrap();
        if let Some((seq, color)) = res.found {
            for v in fep(&seq, CAP).unwrap() {
                prop_assert_eq!(col.color(&v), color);
            }
        }
    }
}

#[test]
fn threshold_certificates_avoid_and_thresholds_are_monotone() {
    let cfg = SearchConfig::default();
    for fam in ["d,2*d", "d^2", "d", "2*d,d^2"] {
        let fam = PolyFamily::parse_list(fam).unwrap();
        for anchor in [true, false] {
            let rep = pvdw_threshold(&fam, anchor, 2, 14, &cfg).unwrap();
            let (n, avoiding) = match rep.result {
                Threshold::Found { n, avoiding } => (n, avoiding),
                Threshold::NotFound { n_max, avoiding } => (n_max + 1, avoiding),
                Threshold::Capped { .. } => panic!("capped"),
            };
            assert_eq!(avoiding.n(), n - 1);
            assert!(find_poly_config(&avoiding, &fam, anchor).is_none());
            // Truncations of an avoiding coloring avoid too.
            for m in 1..avoiding.n() {
                let prefix = Coloring::new(2, avoiding.assign()[..m].to_vec()).unwrap();
                assert!(find_poly_config(&prefix, &fam, anchor).is_none());
            }
        }
    }
}
