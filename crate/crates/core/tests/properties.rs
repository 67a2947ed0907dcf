mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tdagate_core::landscape::{landscape_stack, trapezoid_area, LandscapeGrid};
use tdagate_core::persistence::{sublevel_diagram_of, PersistenceDiagram, PersistencePair};
use tdagate_core::reconstruction::{
    get_y_values, nonzero_levels, reconstruct_from_levels, LandscapePolyline, PolylineMode,
};
use tdagate_core::selection::{select_levels, significant_drops, DROP_FLOOR};
use tdagate_core::signal::{critical_points, ExtremumKind, Signal};

fn distinct_signal(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    (2..=max_len).prop_flat_map(|n| {
        any::<u64>()
            .prop_map(move |seed| common::distinct_values(&mut ChaCha8Rng::seed_from_u64(seed), n))
    })
}

fn diagram(max_pairs: usize) -> impl Strategy<Value = Vec<PersistencePair>> {
    prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 0..=max_pairs).prop_map(|v| {
        v.into_iter()
            .map(|(a, b)| PersistencePair::new(a.min(b), a.max(b)))
            .collect()
    })
}

fn as_diagram(pairs: Vec<PersistencePair>) -> PersistenceDiagram {
    PersistenceDiagram {
        pairs,
        essential_birth: 0.0,
    }
}

proptest! {
    #[test]
    fn diagram_matches_sweep_oracle(v in distinct_signal(14)) {
        let d = sublevel_diagram_of(&v);
        prop_assert_eq!(d.sorted_pairs(), common::brute_force_pairs(&v));
    }

    #[test]
    fn births_at_minima_deaths_at_maxima(v in distinct_signal(20)) {
        let crits = critical_points(&v);
        for p in sublevel_diagram_of(&v).pairs {
            prop_assert!(crits.iter().any(|c| c.y == p.birth && c.kind == ExtremumKind::Minimum));
            prop_assert!(crits.iter().any(|c| c.y == p.death && c.kind == ExtremumKind::Maximum));
        }
    }

    #[test]
    fn endpoint_padding_keeps_pairs(v in distinct_signal(16), front in 0usize..5, back in 0usize..5) {
        let mut padded = vec![v[0]; front];
        padded.extend(&v);
        padded.extend(std::iter::repeat_n(v[v.len() - 1], back));
        prop_assert_eq!(
            sublevel_diagram_of(&padded).sorted_pairs(),
            sublevel_diagram_of(&v).sorted_pairs()
        );
    }

    #[test]
    fn small_perturbations_move_pairs_little(v in distinct_signal(12), seed in any::<u64>()) {
        // Perturb by less than a quarter of the smallest value gap so the
        // order of samples, and hence the pairing, is preserved.
        let mut s = v.clone();
        s.sort_by(f64::total_cmp);
        let gap = s.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        let eps = gap / 4.0;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w: Vec<f64> = v.iter().map(|x| x + eps * (2.0 * rand::Rng::gen::<f64>(&mut rng) - 1.0)).collect();
        let (a, b) = (sublevel_diagram_of(&v).sorted_pairs(), sublevel_diagram_of(&w).sorted_pairs());
        prop_assert_eq!(a.len(), b.len());
        for (p, q) in a.iter().zip(&b) {
            prop_assert!((p.birth - q.birth).abs() <= eps && (p.death - q.death).abs() <= eps);
        }
    }

    #[test]
    fn critical_points_alternate_and_survive_standardizing(v in prop::collection::vec(-5.0..5.0f64, 2..30)) {
        let c = critical_points(&v);
        for w in c.windows(2) {
            prop_assert_ne!(w[0].kind, w[1].kind);
        }
        let s = Signal::new(v.clone()).unwrap();
        if !s.is_constant() {
            let key = |c: &[tdagate_core::signal::CriticalPoint]| {
                c.iter().map(|p| (p.index(), p.kind)).collect::<Vec<_>>()
            };
            prop_assert_eq!(key(&c), key(&s.standardize().critical_points()));
        }
        for i in 1..v.len() - 1 {
            let kind = if v[i] > v[i - 1] && v[i] > v[i + 1] {
                Some(ExtremumKind::Maximum)
            } else if v[i] < v[i - 1] && v[i] < v[i + 1] {
                Some(ExtremumKind::Minimum)
            } else {
                None
            };
            if let Some(kind) = kind {
                prop_assert!(c.iter().any(|p| p.index() == i && p.kind == kind));
            }
        }
    }

    #[test]
    fn stack_matches_sort_oracle(pairs in diagram(6), k in 1usize..5, m in 2usize..40) {
        let grid = LandscapeGrid::unit(m).unwrap();
        let stack = landscape_stack(&as_diagram(pairs.clone()), &grid, k).unwrap();
        let oracle = common::landscape_by_sort(&pairs, &grid, k);
        for (row, expected) in stack.rows().zip(&oracle) {
            for (a, b) in row.iter().zip(expected) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn levels_are_ordered_and_lipschitz(pairs in diagram(8)) {
        let grid = LandscapeGrid::unit(64).unwrap();
        let stack = landscape_stack(&as_diagram(pairs), &grid, 6).unwrap();
        let h = grid.spacing();
        for k in 0..6 {
            let row = stack.row(k);
            for j in 0..grid.points {
                if k + 1 < 6 {
                    prop_assert!(row[j] >= stack.row(k + 1)[j]);
                }
                if j + 1 < grid.points {
                    prop_assert!((row[j + 1] - row[j]).abs() <= h + 1e-12);
                }
            }
        }
    }

    #[test]
    fn pair_order_does_not_matter(pairs in diagram(8), seed in any::<u64>()) {
        let grid = LandscapeGrid::unit(50).unwrap();
        let shuffled = common::shuffled(&mut ChaCha8Rng::seed_from_u64(seed), &pairs);
        prop_assert_eq!(
            landscape_stack(&as_diagram(pairs), &grid, 5).unwrap(),
            landscape_stack(&as_diagram(shuffled), &grid, 5).unwrap()
        );
    }

    #[test]
    fn normalization_is_idempotent(pairs in diagram(6)) {
        let grid = LandscapeGrid::unit(100).unwrap();
        let once = landscape_stack(&as_diagram(pairs), &grid, 4).unwrap().normalize_area();
        let twice = once.clone().normalize_area();
        for (a, b) in once.as_slice().iter().zip(twice.as_slice()) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
        for row in once.rows() {
            let area = trapezoid_area(row, grid.spacing());
            prop_assert!(area == 0.0 || (area - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn drops_are_scale_free_but_floor_is_not(w in prop::collection::vec(0.001..1.0f64, 2..12), c in 0.01..=1.0f64) {
        let scaled: Vec<f64> = w.iter().map(|x| x * c).collect();
        prop_assert_eq!(significant_drops(&w), significant_drops(&scaled));
        let eligible = |v: &[f64]| {
            significant_drops(v).into_iter().filter(|&k| v[k - 2] > DROP_FLOOR).collect::<Vec<_>>()
        };
        // Scaling down can only remove drops from eligibility.
        let (before, after) = (eligible(&w), eligible(&scaled));
        prop_assert!(after.iter().all(|k| before.contains(k)));
    }

    #[test]
    fn selection_prefix_is_nonempty(w in prop::collection::vec(0.0001..1.0f64, 10)) {
        let r = select_levels(&w).unwrap();
        prop_assert!(!r.selected.is_empty());
        prop_assert_eq!(r.selected.clone(), (1..r.cut_index).collect::<Vec<_>>());
        let has_drop = significant_drops(&w).iter().any(|&k| w[k - 2] > DROP_FLOOR);
        if has_drop {
            prop_assert!(r.selected.len() < w.len());
        }
    }

    #[test]
    fn reselection_yields_a_prefix(w in prop::collection::vec(0.0001..1.0f64, 2..12)) {
        let first = select_levels(&w).unwrap();
        if first.selected.len() >= 2 {
            let restricted: Vec<f64> = first.rows().iter().map(|&i| w[i]).collect();
            let second = select_levels(&restricted).unwrap();
            prop_assert!(first.selected.starts_with(&second.selected));
        }
    }

    #[test]
    fn y_values_come_from_the_diagram(v in distinct_signal(16)) {
        let d = sublevel_diagram_of(&v);
        let values: Vec<f64> = d.pairs.iter().flat_map(|p| [p.birth, p.death]).collect();
        for k in 0..nonzero_levels(&d) {
            for y in get_y_values(&LandscapePolyline::exact(&d, k)) {
                prop_assert!(
                    values.iter().any(|&b| (b - y).abs() < 1e-9),
                    "level {} y {} not in {:?}", k, y, values
                );
            }
        }
    }

    #[test]
    fn more_levels_recover_more_points(v in distinct_signal(18)) {
        let s = Signal::new(v).unwrap().standardize();
        let depth = nonzero_levels(&sublevel_diagram_of(s.values()));
        let mut prev: Option<Vec<usize>> = None;
        for k in 1..=depth {
            let rows: Vec<usize> = (0..k).collect();
            let r = reconstruct_from_levels(&s, &rows, PolylineMode::Exact).unwrap();
            let xs: Vec<usize> = r.points.iter().map(|p| p.index()).collect();
            prop_assert!(xs.windows(2).all(|w| w[0] < w[1]));
            if let Some(p) = &prev {
                prop_assert!(p.iter().all(|x| xs.contains(x)));
            }
            prev = Some(xs);
        }
    }
}

#[test]
fn sweep_oracle_on_hand_example() {
    assert_eq!(
        common::brute_force_pairs(&[2.0, 5.0, 0.0, 4.0, 1.0, 3.0]),
        vec![
            PersistencePair::new(1.0, 4.0),
            PersistencePair::new(2.0, 5.0)
        ]
    );
}
