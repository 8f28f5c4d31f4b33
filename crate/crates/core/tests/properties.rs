mod common;

use geist_core::axis::{
    gather, lift, make_identity_map, reindex, AxisMap, AxisTag, DatasetTag, IndexArray, TypedVec,
};
use geist_core::check::{analyze, check_program};
use geist_core::lang::{parse_source, pretty_print, Span};
use geist_core::registry::{MapRegistry, Registry};
use geist_core::runtime::data::MemorySource;
use geist_core::runtime::{evaluate, evaluate_unchecked};
use geist_core::typed::{Index, Map, Vector};
use geist_core::{axes, datasets};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

axes!(State, County);
datasets!(Survey);

/// `(parent size, map entries, parent values, observation rows)`.
fn two_level() -> impl Strategy<Value = (usize, Vec<usize>, Vec<f64>, Vec<usize>)> {
    (1usize..=30, 1usize..=30, 1usize..=200).prop_flat_map(|(p, c, n)| {
        (
            Just(p),
            prop::collection::vec(0..p, c),
            prop::collection::vec(-1e9f64..1e9, p),
            prop::collection::vec(0..c, n),
        )
    })
}

fn bits(xs: &[f64]) -> Vec<u64> {
    xs.iter().map(|x| x.to_bits()).collect()
}

fn within(span: Span, src: &str) -> bool {
    span.end() <= src.len() && span.line >= 1 && span.col >= 1
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn gather_after_lift_equals_gather_after_reindex((p, entries, values, rows) in two_level()) {
        let parent = AxisTag::new("County", p).unwrap();
        let child = AxisTag::new("Home", entries.len()).unwrap();
        let data = DatasetTag::new("Data", rows.len()).unwrap();
        let m = AxisMap::new(parent.clone(), child.clone(), data.clone(), entries).unwrap();
        let v = TypedVec::new(parent, values).unwrap();
        let i = IndexArray::new(child, data, rows).unwrap();
        let left = gather(&lift(&m, &v).unwrap(), &i).unwrap();
        let right = gather(&v, &reindex(&m, &i).unwrap()).unwrap();
        prop_assert_eq!(bits(left.values()), bits(right.values()));
    }

    #[test]
    fn phantom_layer_agrees_with_runtime_layer((p, entries, values, rows) in two_level()) {
        let c = entries.len();
        let m = Map::<State, County, Survey>::new(entries, p).unwrap();
        let v = Vector::<State>::new(values).unwrap();
        let i = Index::<County, Survey>::new(rows, c).unwrap();
        let typed = v.lift(&m).gather(&i);
        let untyped = gather(
            &lift(m.untyped(), v.untyped()).unwrap(),
            i.untyped(),
        ).unwrap();
        prop_assert_eq!(bits(typed.values()), bits(untyped.values()));
        prop_assert_eq!(bits(v.gather(&m.reindex(&i)).values()), bits(typed.values()));
    }

    #[test]
    fn identity_map_changes_nothing(
        (k, values, rows) in (1usize..=40, 1usize..=100).prop_flat_map(|(k, n)| (
            Just(k),
            prop::collection::vec(any::<f64>(), k),
            prop::collection::vec(0..k, n),
        ))
    ) {
        let axis = AxisTag::new("K", k).unwrap();
        let data = DatasetTag::new("D", rows.len()).unwrap();
        let id = make_identity_map(&axis, &data);
        let v = TypedVec::new(axis.clone(), values).unwrap();
        let i = IndexArray::new(axis, data, rows).unwrap();
        prop_assert_eq!(bits(lift(&id, &v).unwrap().values()), bits(v.values()));
        prop_assert_eq!(reindex(&id, &i).unwrap(), i);
    }

    #[test]
    fn auto_lift_equals_lifting_step_by_step(
        sizes in prop::collection::vec(1usize..=12, 2..=5),
        seed in any::<u64>(),
    ) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = DatasetTag::new("D", 1).unwrap();
        let axes: Vec<AxisTag> = sizes
            .iter()
            .enumerate()
            .map(|(k, &s)| AxisTag::new(format!("L{k}"), s).unwrap())
            .collect();
        let mut reg = MapRegistry::new(data.clone());
        let mut maps = Vec::new();
        for w in axes.windows(2) {
            let entries: Vec<usize> = (0..w[1].size()).map(|_| rng.random_range(0..w[0].size())).collect();
            reg.register_map(&w[0], &w[1], entries.clone()).unwrap();
            maps.push(AxisMap::new(w[0].clone(), w[1].clone(), data.clone(), entries).unwrap());
        }
        let values: Vec<f64> = (0..sizes[0]).map(|_| rng.random_range(-5.0..5.0)).collect();
        let v = TypedVec::new(axes[0].clone(), values).unwrap();
        let mut stepwise = v.clone();
        for m in &maps {
            stepwise = lift(m, &stepwise).unwrap();
        }
        let reg = reg.freeze();
        let auto = reg.auto_lift(&v, axes.last().unwrap()).unwrap();
        prop_assert_eq!(&auto, &stepwise);
        let path = reg.resolve_lift_path("L0", "L0").unwrap();
        prop_assert!(path.is_identity());
    }

    #[test]
    fn registry_stays_acyclic(
        n in 2usize..=12,
        attempts in prop::collection::vec((0usize..12, 0usize..12), 0..40),
    ) {
        let data = DatasetTag::new("D", 1).unwrap();
        let axes: Vec<AxisTag> = (0..n).map(|k| AxisTag::new(format!("X{k}"), 1).unwrap()).collect();
        let mut reg: Registry<()> = Registry::new(data);
        for (p, c) in attempts {
            let _ = reg.insert(&axes[p % n], &axes[c % n], ());
        }
        for a in &axes {
            for b in reg.reachable_from(a.name()) {
                if b != a.name() {
                    prop_assert!(!reg.reachable_from(&b).iter().any(|x| x == a.name()));
                }
            }
        }
    }

    #[test]
    fn generated_programs_check_evaluate_and_round_trip(seed in any::<u64>()) {
        let src = common::well_typed_program(&mut ChaCha8Rng::seed_from_u64(seed));
        let program = parse_source(&src).unwrap();
        prop_assert!(!analyze(&program).has_errors(), "{}", src);
        let empty = MemorySource::new();
        let checked = evaluate(&program, &empty).unwrap();
        let raw = evaluate_unchecked(&program, &empty).unwrap();
        prop_assert!(checked.bitwise_eq(&raw));
        let printed = pretty_print(&program);
        let again = parse_source(&printed).unwrap();
        prop_assert_eq!(again.without_spans(), program.without_spans());
    }

    #[test]
    fn diagnostics_point_inside_damaged_sources(
        file in 0usize..64,
        cut in any::<prop::sample::Index>(),
        len in 0usize..40,
        junk in "[ -~\n]{0,12}",
    ) {
        let files = common::corpus_files();
        let src = std::fs::read_to_string(&files[file % files.len()]).unwrap();
        let mut at = cut.index(src.len() + 1);
        while !src.is_char_boundary(at) {
            at -= 1;
        }
        let mut end = (at + len).min(src.len());
        while !src.is_char_boundary(end) {
            end -= 1;
        }
        let damaged = format!("{}{}{}", &src[..at], junk, &src[end..]);
        let spans: Vec<Span> = match parse_source(&damaged) {
            Err(errs) => errs.iter().map(|e| e.span()).collect(),
            Ok(program) => check_program(&program).iter().map(|d| d.span).collect(),
        };
        for span in spans {
            prop_assert!(within(span, &damaged), "{:?} outside {} bytes", span, damaged.len());
        }
    }
}
