//! Property tests for the structural invariants.

use std::collections::BTreeSet;

use proptest::prelude::*;

use retrace_core::classifier::{predict_proba, train, Hyperparams};
use retrace_core::encoding::{encode_simple, EncodingKind, FeatureOrigin, FeatureSpec};
use retrace_core::eventlog::{
    extract_prefixes, parse_csv, split_dataset, write_csv, EventLog, Label, Trace,
};
use retrace_core::fei::{m_score, Item};
use retrace_core::metrics::macro_f1;
use retrace_core::value::Value;

fn arb_activity() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["check in", "review", "approve", "deny", "archive"])
        .prop_map(str::to_string)
}

fn arb_trace(id: usize) -> impl Strategy<Value = Trace> {
    (
        prop::collection::vec(arb_activity(), 1..8),
        prop::option::of(18i64..90),
        any::<bool>(),
    )
        .prop_map(move |(acts, age, label)| {
            let refs: Vec<&str> = acts.iter().map(String::as_str).collect();
            let mut t = Trace::from_activities(format!("case_{id:03}"), &refs);
            if let Some(age) = age {
                t.trace_attributes.insert("age".into(), Value::Int(age));
            }
            t.label = Some(Label::from_bool(label));
            t
        })
}

fn arb_log(max_traces: usize) -> impl Strategy<Value = EventLog> {
    prop::collection::vec(any::<bool>(), 1..=max_traces).prop_flat_map(|mask| {
        let strategies: Vec<_> = (0..mask.len()).map(arb_trace).collect();
        strategies.prop_map(|traces| EventLog::new(traces).expect("generated traces are clean"))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn csv_round_trip_preserves_the_log(log in arb_log(12)) {
        let mut buf = Vec::new();
        write_csv(&log, &mut buf).unwrap();
        let reparsed = parse_csv(buf.as_slice(), None).unwrap();
        prop_assert_eq!(log, reparsed);
    }

    #[test]
    fn prefixing_is_idempotent(log in arb_log(12), n in 1usize..6) {
        let once = extract_prefixes(&log, n);
        let twice = extract_prefixes(&once, n);
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn split_partitions_every_log(log in arb_log(24), seed in any::<u64>()) {
        prop_assume!(log.len() >= 5);
        let (a, b, c, d) = split_dataset(&log, seed).unwrap();
        let mut seen = BTreeSet::new();
        for part in [&a, &b, &c, &d] {
            for t in part.traces() {
                prop_assert!(seen.insert(t.case_id.clone()), "trace assigned twice");
            }
        }
        prop_assert_eq!(seen.len(), log.len());
    }

    #[test]
    fn macro_f1_is_symmetric_under_class_swap(
        labels in prop::collection::vec((any::<bool>(), any::<bool>()), 1..50)
    ) {
        let gold: Vec<Label> = labels.iter().map(|(g, _)| Label::from_bool(*g)).collect();
        let pred: Vec<Label> = labels.iter().map(|(_, p)| Label::from_bool(*p)).collect();
        let flip = |ls: &[Label]| -> Vec<Label> {
            ls.iter().map(|l| Label::from_bool(!l.is_positive())).collect()
        };
        let a = macro_f1(&gold, &pred).unwrap();
        let b = macro_f1(&flip(&gold), &flip(&pred)).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn m_score_stays_within_the_unit_band(
        cells in prop::collection::vec(0i64..4, 6..30),
        split in prop::collection::vec(0u8..3, 6..30),
        target in 0i64..4,
    ) {
        let n = cells.len().min(split.len());
        let rows: Vec<Vec<Value>> = cells[..n].iter().map(|&v| vec![Value::Int(v)]).collect();
        let dataset = retrace_core::encoding::EncodedDataset {
            kind: EncodingKind::Simple,
            features: vec![FeatureSpec {
                name: "f".into(),
                origin: FeatureOrigin::StaticAttribute("f".into()),
                admissible_values: (0..4).map(Value::Int).collect(),
            }],
            rows,
            labels: vec![Label::Positive; n],
            trace_ids: (0..n).map(|i| format!("t{i:02}")).collect(),
        };
        let mut cl = BTreeSet::new();
        let mut not_cl = BTreeSet::new();
        for (i, &side) in split[..n].iter().enumerate() {
            match side {
                0 => { cl.insert(format!("t{i:02}")); }
                1 => { not_cl.insert(format!("t{i:02}")); }
                _ => {}
            }
        }
        prop_assume!(!cl.is_empty() && !not_cl.is_empty());
        let items: BTreeSet<Item> = [Item::new("f", Value::Int(target))].into_iter().collect();
        let score = m_score(&items, &cl, &not_cl, &dataset).unwrap();
        prop_assert!((-1.0..=1.0).contains(&score));
    }

    #[test]
    fn forest_probabilities_stay_in_unit_interval(log in arb_log(16), seed in any::<u64>()) {
        let prefixed = extract_prefixes(&log, 1);
        prop_assume!(prefixed.len() >= 2);
        let dataset = encode_simple(&prefixed, 1).unwrap();
        let hp = Hyperparams { n_trees: 5, max_depth: 3, min_leaf: 1, features_per_split: 1.0 };
        let model = train(&dataset, hp, seed).unwrap();
        for row in &dataset.rows {
            let p = predict_proba(&model, row).unwrap();
            prop_assert!((0.0..=1.0).contains(&p));
        }
    }
}
