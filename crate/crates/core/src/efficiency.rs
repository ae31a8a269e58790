//! Generalized cost, cost curves over a demand sweep, and where they cross.
//!
//! The generalized cost of a system adds the passengers' yearly travel time,
//! valued at the value of time, to the agency's net annual cost. Plotted
//! against demand density for several systems, the curve crossings are the
//! densities at which the cheapest system changes.

use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};

use crate::engine::Summary;
use crate::math::sqrt;
use crate::{Error, Result};

/// Value of time, CAD per hour.
pub const DEFAULT_VOT: f64 = 15.0;
/// Points serving a smaller fraction of requests are flagged as over capacity.
pub const DEFAULT_SERVED_THRESHOLD: f64 = 0.8;

/// Yearly generalized cost in CAD. Times are per-passenger minutes and
/// `nac` the yearly net annual cost.
pub fn generalized_cost(walk_min: f64, wait_min: f64, ivtt_min: f64, served_per_day: f64, vot: f64, nac: f64) -> f64 {
    (walk_min + wait_min + ivtt_min) / 60.0 * served_per_day * 365.0 * vot + nac
}

#[derive(Debug, Clone, PartialEq)]
pub struct GcPoint {
    pub system: String,
    pub demand_level: u32,
    /// Requests per km² per day.
    pub density: f64,
    pub gc: f64,
    pub served_fraction: f64,
    /// Served fraction below the threshold; kept in the curve but never
    /// used for crossings.
    pub capacity_exceeded: bool,
}

impl GcPoint {
    /// Builds a point from a run summary and the system's net annual cost.
    pub fn from_summary(
        system: &str,
        demand_level: u32,
        density: f64,
        summary: &Summary,
        nac: f64,
        vot: f64,
        threshold: f64,
    ) -> Self {
        let gc = generalized_cost(
            summary.avg_walk_min,
            summary.avg_wait_min,
            summary.avg_ivtt_min,
            summary.served as f64,
            vot,
            nac,
        );
        let served_fraction = summary.served_fraction();
        GcPoint {
            system: String::from(system),
            demand_level,
            density,
            gc,
            served_fraction,
            capacity_exceeded: served_fraction < threshold,
        }
    }
}

/// One system's points, ordered by demand level.
#[derive(Debug, Clone, PartialEq)]
pub struct GcCurve {
    pub system: String,
    pub points: Vec<GcPoint>,
}

impl GcCurve {
    pub fn new(system: &str, mut points: Vec<GcPoint>) -> Self {
        points.sort_by_key(|p| p.demand_level);
        GcCurve { system: String::from(system), points }
    }

    pub fn at(&self, level: u32) -> Option<&GcPoint> {
        self.points.iter().find(|p| p.demand_level == level)
    }

    /// Levels of `grid` with no point.
    pub fn gaps(&self, grid: &[u32]) -> Vec<u32> {
        grid.iter().copied().filter(|&l| self.at(l).is_none()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwitchingPoint {
    pub system_a: String,
    pub system_b: String,
    pub density: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub level_lo: u32,
    pub level_hi: u32,
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Densities where the two curves cross, by linear interpolation between
/// neighbouring demand levels.
///
/// Only levels present in both curves and not flagged in either are
/// compared, and no crossing is sought across a level missing or flagged in
/// either curve. Equal cost at a level reports that level's density; curves
/// equal everywhere have no crossing.
pub fn switching_points(a: &GcCurve, b: &GcCurve) -> Result<Vec<SwitchingPoint>> {
    let mut grid: Vec<u32> = a.points.iter().chain(&b.points).map(|p| p.demand_level).collect();
    grid.sort_unstable();
    grid.dedup();
    // (level, density, a - b, equal) per grid level, None where not comparable
    let cells: Vec<Option<(u32, f64, f64, bool)>> = grid
        .iter()
        .map(|&l| match (a.at(l), b.at(l)) {
            (Some(pa), Some(pb)) if !pa.capacity_exceeded && !pb.capacity_exceeded => {
                Some((l, pa.density, pa.gc - pb.gc, same(pa.gc, pb.gc)))
            }
            _ => None,
        })
        .collect();
    let comparable: Vec<_> = cells.iter().flatten().copied().collect();
    if comparable.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} and {} share {} comparable demand levels, need 2",
            a.system,
            b.system,
            comparable.len()
        )));
    }
    if comparable.iter().all(|c| c.3) {
        return Ok(vec![]);
    }
    let point = |density, lo: (u32, f64), hi: (u32, f64)| SwitchingPoint {
        system_a: a.system.clone(),
        system_b: b.system.clone(),
        density,
        bracket_lo: lo.1,
        bracket_hi: hi.1,
        level_lo: lo.0,
        level_hi: hi.0,
    };
    let mut out = Vec::new();
    for (i, cell) in cells.iter().enumerate() {
        let Some((l0, x0, d0, eq0)) = *cell else { continue };
        if eq0 {
            out.push(point(x0, (l0, x0), (l0, x0)));
            continue;
        }
        let Some(Some((l1, x1, d1, eq1))) = cells.get(i + 1).copied() else { continue };
        if !eq1 && (d0 < 0.0) != (d1 < 0.0) {
            let x = x0 + (x1 - x0) * d0 / (d0 - d1);
            out.push(point(x, (l0, x0), (l1, x1)));
        }
    }
    Ok(out)
}

/// Crossings among every pair of distinct curves, in input order. Pairs
/// without enough comparable levels are skipped.
pub fn all_switching_points(curves: &[GcCurve]) -> Vec<SwitchingPoint> {
    let mut out = Vec::new();
    for (i, a) in curves.iter().enumerate() {
        for b in &curves[i + 1..] {
            if let Ok(mut pts) = switching_points(a, b) {
                out.append(&mut pts);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTest {
    pub n: usize,
    pub mean_diff: f64,
    /// Sample standard deviation of the differences.
    pub sd_diff: f64,
    pub t: f64,
    /// Two-sided 95% critical value used.
    pub critical: f64,
    pub significant_95: bool,
}

/// Two-sided 97.5% quantiles of Student's t for 1..=30 degrees of freedom.
const T_975: [f64; 30] = [
    12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228, 2.201, 2.179, 2.160, 2.145, 2.131, 2.120,
    2.110, 2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042,
];

/// Critical |t| at 95% two-sided for a sample of `n` pairs. Above 30 pairs
/// the normal value 1.96 is used.
pub fn t_critical_95(n: usize) -> f64 {
    if n > 30 {
        1.96
    } else {
        T_975[n.saturating_sub(2).min(29)]
    }
}

/// Paired t-test of `a` against `b` (differences `a - b`).
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() != b.len() {
        return Err(Error::arg(format!("paired samples differ in length: {} vs {}", a.len(), b.len())));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!("paired t-test needs at least 2 pairs, got {n}")));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    let var = d.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    let sd = sqrt(var);
    let t = from_summary_stats(mean, sd, n);
    let critical = t_critical_95(n);
    Ok(TTest { n, mean_diff: mean, sd_diff: sd, t, critical, significant_95: t.abs() > critical })
}

/// t statistic from the mean and sample sd of `n` paired differences.
pub fn from_summary_stats(mean_diff: f64, sd_diff: f64, n: usize) -> f64 {
    if mean_diff == 0.0 {
        0.0
    } else if sd_diff == 0.0 {
        f64::INFINITY.copysign(mean_diff)
    } else {
        mean_diff / (sd_diff / sqrt(n as f64))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(name: &str, f: impl Fn(f64) -> f64) -> GcCurve {
        let pts = (0..=10)
            .map(|x| GcPoint {
                system: String::from(name),
                demand_level: x * 50,
                density: x as f64,
                gc: f(x as f64),
                served_fraction: 1.0,
                capacity_exceeded: false,
            })
            .collect();
        GcCurve::new(name, pts)
    }

    #[test]
    fn gc_examples() {
        assert_eq!(generalized_cost(1.0, 2.0, 3.0, 0.0, 15.0, 1234.0), 1234.0);
        assert!((generalized_cost(0.0, 8.0, 10.0, 177.0, 15.0, 500_000.0) - 790_722.5).abs() < 1e-6);
        let d = generalized_cost(0.0, 8.0, 10.0, 177.0, 16.0, 0.0) - generalized_cost(0.0, 8.0, 10.0, 177.0, 15.0, 0.0);
        assert!((d - 18.0 / 60.0 * 177.0 * 365.0).abs() < 1e-6);
    }

    #[test]
    fn linear_crossing() {
        let a = curve("a", |x| 100.0 + 10.0 * x);
        let b = curve("b", |_| 160.0);
        let pts = switching_points(&a, &b).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].density, 6.0);
        assert_eq!((pts[0].bracket_lo, pts[0].bracket_hi), (6.0, 6.0));

        let b = curve("b", |_| 155.0);
        let pts = switching_points(&a, &b).unwrap();
        assert!((pts[0].density - 5.5).abs() < 1e-12);
        assert_eq!((pts[0].level_lo, pts[0].level_hi), (250, 300));
    }

    #[test]
    fn identical_curves_never_cross() {
        let a = curve("a", |x| x * x);
        let b = curve("b", |x| x * x);
        assert!(switching_points(&a, &b).unwrap().is_empty());
    }

    #[test]
    fn flagged_points_break_the_curve() {
        let a = curve("a", |x| 100.0 + 10.0 * x);
        let mut b = curve("b", |_| 155.0);
        b.points[5].capacity_exceeded = true;
        b.points[6].capacity_exceeded = true;
        assert!(switching_points(&a, &b).unwrap().is_empty());
        let mut short = curve("c", |_| 0.0);
        short.points.truncate(1);
        assert!(matches!(switching_points(&a, &short), Err(Error::InsufficientData(_))));
        assert_eq!(short.gaps(&[0, 50, 100]), vec![50, 100]);
    }

    #[test]
    fn t_test() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let r = paired_t_test(&x, &x).unwrap();
        assert_eq!(r.t, 0.0);
        assert!(!r.significant_95);
        assert!((from_summary_stats(-0.60, 7.52, 170).abs() - 1.0403).abs() < 1e-3);
        assert!(paired_t_test(&x, &x[..3]).is_err());
        // differences 2, 4, 6 → mean 4, sd 2, t = 4 / (2 / √3)
        let r = paired_t_test(&[3.0, 6.0, 9.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!((r.t - 4.0 * sqrt(3.0) / 2.0).abs() < 1e-12);
        assert_eq!(r.critical, 4.303);
        assert!(!r.significant_95);
    }
}
