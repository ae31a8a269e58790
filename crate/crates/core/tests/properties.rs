use odt_core::efficiency::{generalized_cost, switching_points, GcCurve, GcPoint};
use odt_core::equity::{gini, lorenz, LorenzOrdering, ZonalOutcome};
use odt_core::ZoneId;
use proptest::prelude::*;

fn gini_equal_weights(outcomes: &[f64]) -> f64 {
    let z: Vec<ZonalOutcome> = outcomes
        .iter()
        .enumerate()
        .map(|(i, &o)| ZonalOutcome { zone: ZoneId(i as u32), outcome: Some(o), weight: 1.0, attribute: 0.0 })
        .collect();
    gini(&lorenz(&z, LorenzOrdering::PerCapita).unwrap())
}

fn curve(name: &str, gcs: &[f64]) -> GcCurve {
    let points = gcs
        .iter()
        .enumerate()
        .map(|(i, &gc)| GcPoint {
            system: name.into(),
            demand_level: 50 * (i as u32 + 1),
            density: 0.5 * (i + 1) as f64,
            gc,
            served_fraction: 1.0,
            capacity_exceeded: false,
        })
        .collect();
    GcCurve::new(name, points)
}

proptest! {
    /// Moving outcome from a better-off zone to a worse-off one, without
    /// reversing their order, never raises the Gini.
    #[test]
    fn transfer_to_poorer_zone_lowers_gini(
        mut v in prop::collection::vec(0.0f64..100.0, 2..15),
        i in any::<prop::sample::Index>(),
        j in any::<prop::sample::Index>(),
        share in 0.0f64..0.5,
    ) {
        let (i, j) = (i.index(v.len()), j.index(v.len()));
        prop_assume!(v[i] < v[j]);
        let before = gini_equal_weights(&v);
        let amount = (v[j] - v[i]) * share;
        v[i] += amount;
        v[j] -= amount;
        prop_assert!(gini_equal_weights(&v) <= before + 1e-12);
    }

    #[test]
    fn gc_rises_with_time_and_cost(
        walk in 0.0f64..30.0, wait in 0.0f64..60.0, ivtt in 0.0f64..90.0,
        served in 0.0f64..5000.0, vot in 0.0f64..50.0, nac in 0.0f64..1e7,
        extra in 0.0f64..20.0,
    ) {
        let gc = generalized_cost(walk, wait, ivtt, served, vot, nac);
        prop_assert!(gc >= nac);
        prop_assert!(generalized_cost(walk, wait + extra, ivtt, served, vot, nac) >= gc);
        prop_assert!(generalized_cost(walk + extra, wait, ivtt, served, vot, nac) >= gc);
        prop_assert!(generalized_cost(walk, wait, ivtt, served, vot, nac + extra) >= gc);
    }

    /// Adding one constant to both curves leaves the crossings where they are.
    #[test]
    fn crossings_ignore_common_shift(
        a in prop::collection::vec(1e3f64..1e6, 6),
        b in prop::collection::vec(1e3f64..1e6, 6),
        shift in 0.0f64..1e6,
    ) {
        let base = switching_points(&curve("a", &a), &curve("b", &b)).unwrap();
        let sa: Vec<f64> = a.iter().map(|x| x + shift).collect();
        let sb: Vec<f64> = b.iter().map(|x| x + shift).collect();
        let moved = switching_points(&curve("a", &sa), &curve("b", &sb)).unwrap();
        prop_assert_eq!(base.len(), moved.len());
        for (p, q) in base.iter().zip(&moved) {
            prop_assert!((p.density - q.density).abs() <= 1e-6, "{} vs {}", p.density, q.density);
            prop_assert_eq!((p.level_lo, p.level_hi), (q.level_lo, q.level_hi));
        }
    }
}
