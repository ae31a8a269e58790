use odt_core::demand::{generate_synthetic_demand, scale_demand, scaled_count};
use odt_core::network::generate_grid;
use statrs::distribution::{ChiSquared, ContinuousCDF};

const PROFILE: [f64; 24] = [
    1.0, 0.5, 0.5, 0.5, 1.0, 2.0, 4.0, 8.0, 9.0, 6.0, 5.0, 5.0, 6.0, 5.0, 5.0, 6.0, 8.0, 9.0, 7.0, 5.0, 4.0, 3.0, 2.0, 1.5,
];

#[test]
fn request_hours_follow_the_profile() {
    let net = generate_grid(6, 6, 300.0, 10.0, 1).unwrap();
    let mut counts = [0usize; 24];
    let mut total = 0;
    for seed in 0..100 {
        let d = generate_synthetic_demand(&net, 200, &PROFILE, seed).unwrap();
        for (c, h) in counts.iter_mut().zip(d.hourly_counts()) {
            *c += h;
        }
        total += d.len();
        assert!(d.requests().iter().all(|r| r.origin != r.destination));
        assert!(d.requests().windows(2).all(|w| w[0].time_s <= w[1].time_s));
    }
    let weight: f64 = PROFILE.iter().sum();
    let stat: f64 = counts
        .iter()
        .zip(PROFILE)
        .map(|(&obs, w)| {
            let expected = total as f64 * w / weight;
            (obs as f64 - expected).powi(2) / expected
        })
        .sum();
    let critical = ChiSquared::new(23.0).unwrap().inverse_cdf(0.95);
    assert!(stat < critical, "chi-square {stat} >= {critical}");
}

#[test]
fn scaling_hits_the_level_count() {
    let net = generate_grid(5, 5, 300.0, 10.0, 1).unwrap();
    let base = generate_synthetic_demand(&net, 137, &PROFILE, 4).unwrap();
    for level in [50, 100, 150, 250, 500] {
        let d = scale_demand(&base, level, 9).unwrap();
        assert_eq!(d.len(), scaled_count(137, level));
        assert_eq!(d.level_pct(), level);
        assert_eq!(d.base_count(), 137);
        assert_eq!(d.requests(), scale_demand(&base, level, 9).unwrap().requests());
    }
    assert_eq!(scaled_count(137, 100), 137);
    assert_eq!(scaled_count(100, 250), 250);
}
