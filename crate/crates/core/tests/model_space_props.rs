mod common;

use affordance_kb::{
    FilterConfig, ModalityModel, ModalitySpace, Role, SpaceRole, SvoTriple, Weighting,
};
use proptest::prelude::*;

fn triples() -> impl Strategy<Value = Vec<SvoTriple>> {
    prop::collection::vec((0..5u8, 0..5u8, 0..5u8, 1..4u8), 1..40).prop_map(|xs| {
        xs.into_iter()
            .map(|(s, v, o, w)| {
                let mut t = SvoTriple::new(&format!("s{s}"), &format!("v{v}"), &format!("o{o}"));
                t.weight = f64::from(w);
                t
            })
            .collect()
    })
}

fn build(ts: &[SvoTriple], k: f64) -> ModalityModel {
    ModalityModel::build(ts, k, FilterConfig::default()).unwrap()
}

fn reversed(ts: &[SvoTriple]) -> Vec<SvoTriple> {
    ts.iter().map(SvoTriple::reversed).collect()
}

proptest! {
    #[test]
    fn joint_probabilities_normalize(ts in triples(), k in 0.01f64..3.0) {
        let m = build(&ts, 0.0);
        let observed: f64 = m.joint_entries().map(|(s, v, o, _)| m.joint_prob(s, v, o)).sum();
        prop_assert!((observed - 1.0).abs() < 1e-9);

        let m = build(&ts, k);
        let (ss, vs, os) = (m.vocab(Role::Subject), m.vocab(Role::Verb), m.vocab(Role::Object));
        let mut full = 0.0;
        for s in ss.entries() {
            for v in vs.entries() {
                for o in os.entries() {
                    full += m.joint_prob(s, v, o);
                }
            }
        }
        prop_assert!((full - 1.0).abs() < 1e-9, "{}", full);
    }

    #[test]
    fn active_is_the_object_marginal(ts in triples()) {
        let m = build(&ts, 0.0);
        for (s, v, _) in m.active_entries() {
            let sum: f64 = m.vocab(Role::Object).entries().iter().map(|o| m.joint_prob(s, v, o)).sum();
            prop_assert!((m.active_prob(s, v) - sum).abs() < 1e-12);
        }
    }

    #[test]
    fn reversal_swaps_tables_and_spaces(ts in triples()) {
        let a = build(&ts, 0.0);
        let b = build(&reversed(&ts), 0.0);
        let mut fwd: Vec<(String, String, f64)> =
            a.active_entries().map(|(s, v, c)| (s.into(), v.into(), c)).collect();
        let mut back: Vec<(String, String, f64)> =
            b.passive_entries().map(|(v, o, c)| (o.into(), v.into(), c)).collect();
        fwd.sort_by(|x, y| x.partial_cmp(y).unwrap());
        back.sort_by(|x, y| x.partial_cmp(y).unwrap());
        prop_assert_eq!(fwd, back);

        for w in [Weighting::Raw, Weighting::Ppmi] {
            let sa = ModalitySpace::build(&a, SpaceRole::Active, w).unwrap();
            let sb = ModalitySpace::build(&b, SpaceRole::Passive, w).unwrap();
            prop_assert_eq!(sa.row_vocab().entries(), sb.row_vocab().entries());
            prop_assert_eq!(sa.col_vocab().entries(), sb.col_vocab().entries());
            prop_assert_eq!(sa.dense(), sb.dense());
        }
    }

    #[test]
    fn conditionals_sum_to_one_per_entity(ts in triples()) {
        let m = build(&ts, 0.0);
        let verbs = m.vocab(Role::Verb).entries().to_vec();
        for s in m.vocab(Role::Subject).entries() {
            let total: f64 = verbs.iter().map(|v| m.can_do(s, v, 0.0).unwrap().confidence).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }
        for o in m.vocab(Role::Object).entries() {
            let cs: Vec<f64> = verbs.iter().map(|v| m.affords(o, v, 0.0).unwrap().confidence).collect();
            prop_assert!(cs.iter().all(|c| (0.0..=1.0).contains(c)));
            prop_assert!((cs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn filter_is_idempotent(ts in triples(), min_count in 0.0f64..4.0, pmi in prop::option::of(-1.0f64..1.0)) {
        let cfg = FilterConfig { min_count, min_pmi: pmi };
        let once = build(&ts, 0.0).filter_outliers(cfg).unwrap();
        prop_assert_eq!(once.filter_outliers(cfg).unwrap(), once);
    }

    #[test]
    fn merging_matches_concatenation(a in triples(), b in triples()) {
        let mut both = a.clone();
        both.extend(b.iter().cloned());
        prop_assert_eq!(build(&a, 0.0).merge(&build(&b, 0.0)), build(&both, 0.0));
    }

    #[test]
    fn model_json_round_trip(ts in triples(), k in 0.0f64..2.0) {
        let m = build(&ts, k);
        let text = serde_json::to_string(&m).unwrap();
        prop_assert_eq!(serde_json::from_str::<ModalityModel>(&text).unwrap(), m);
    }

    #[test]
    fn space_similarity_properties(ts in triples()) {
        let m = build(&ts, 0.0);
        for role in [SpaceRole::Active, SpaceRole::Passive] {
            let sp = ModalitySpace::build(&m, role, Weighting::Ppmi).unwrap();
            prop_assert!(sp.matrix().rows.iter().flatten().all(|&(_, w)| w >= 0.0));
            let nouns = sp.row_vocab().entries();
            for a in nouns {
                for b in nouns {
                    let d = sp.similarity(a, b).unwrap() - sp.similarity(b, a).unwrap();
                    prop_assert!(d.abs() <= 1e-12);
                }
                prop_assert_eq!(sp.neighbors(a, 3).unwrap(), sp.neighbors(a, 3).unwrap());
            }
        }
    }

    #[test]
    fn svd_factors_are_orthonormal_and_monotone(ts in triples(), seed in any::<u64>()) {
        let m = build(&ts, 0.0);
        let sp = ModalitySpace::build(&m, SpaceRole::Active, Weighting::Ppmi).unwrap();
        let max = sp.row_vocab().len().min(sp.col_vocab().len());
        let (rows, cols) = (sp.row_vocab().len(), sp.col_vocab().len());
        let mut last = f64::INFINITY;
        for k in 1..=max {
            let f = sp.truncated_svd(k, 100, seed).unwrap();
            let fac = f.factors().unwrap();
            for i in 0..k {
                for j in 0..k {
                    let uu: f64 = (0..rows).map(|r| fac.u[r * k + i] * fac.u[r * k + j]).sum();
                    let vv: f64 = (0..cols).map(|c| fac.vt[i * cols + c] * fac.vt[j * cols + c]).sum();
                    let id = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((uu - id).abs() < 1e-6, "UᵀU[{},{}] = {}", i, j, uu);
                    prop_assert!((vv - id).abs() < 1e-6, "VtVtᵀ[{},{}] = {}", i, j, vv);
                }
            }
            prop_assert!(fac.sigma.windows(2).all(|w| w[0] >= w[1]));
            let err = f.reconstruction_error();
            prop_assert!(err <= last + 1e-9, "rank {}: {} > {}", k, err, last);
            last = err;
        }
        prop_assert!(last < 1e-6);
    }
}
