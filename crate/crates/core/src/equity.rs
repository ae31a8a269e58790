//! Distribution of service across zones: Lorenz curves and Gini coefficients.
//!
//! For a population group (seniors, single parents, ...) each zone is
//! weighted by its residents in that group, the group's share times the zone
//! population. Zones are ranked by outcome per group resident, so the curve
//! is convex and the Gini lies in [0, 1]. Population density is not a share;
//! for it zones are weighted by their whole population.
//!
//! Outcomes are attributed to the zone of the trip origin: the count of
//! served trips (usage), or the mean wait or in-vehicle time of those trips.

use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};
use core::cmp::Ordering;

use crate::engine::{TripOutcome, TripRecord};
use crate::math::mean;
use crate::network::{Attribute, Zone};
use crate::{Error, Result, ZoneId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Metric {
    Usage,
    Wait,
    Ivtt,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Usage, Metric::Wait, Metric::Ivtt];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Usage => "usage",
            Metric::Wait => "wait",
            Metric::Ivtt => "ivtt",
        }
    }
}

/// How zones are ranked along the curve.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum LorenzOrdering {
    /// Ascending outcome per weight; a proper Lorenz curve.
    #[default]
    PerCapita,
    /// Ascending attribute value; a concentration curve whose index can be
    /// negative.
    Attribute,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZonalOutcome {
    pub zone: ZoneId,
    /// `None` for a time metric in a zone with no served trips.
    pub outcome: Option<f64>,
    pub weight: f64,
    /// Attribute value, used by [`LorenzOrdering::Attribute`].
    pub attribute: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZonalOutcomes {
    pub outcomes: Vec<ZonalOutcome>,
    /// Served trips whose origin has no zone.
    pub unzoned_trips: usize,
    /// Zones without a value for the attribute, left out.
    pub zones_missing_attribute: usize,
}

/// Residents of zone `z` belonging to the group described by `attr`.
pub fn group_weight(z: &Zone, attr: Attribute) -> Option<f64> {
    let v = z.attribute(attr)?;
    Some(match attr {
        Attribute::PopDensity => z.population,
        _ => v * z.population,
    })
}

/// Aggregates served trips by origin zone.
pub fn zonal_outcomes(trips: &[TripRecord], zones: &[Zone], metric: Metric, attr: Attribute) -> ZonalOutcomes {
    let served: Vec<&TripRecord> = trips.iter().filter(|t| t.outcome == TripOutcome::Served).collect();
    let unzoned_trips = served.iter().filter(|t| t.origin_zone.is_none()).count();
    let mut outcomes = Vec::new();
    let mut missing = 0;
    for z in zones {
        let (Some(weight), Some(attribute)) = (group_weight(z, attr), z.attribute(attr)) else {
            missing += 1;
            continue;
        };
        let here = served.iter().filter(|t| t.origin_zone == Some(z.id));
        let outcome = match metric {
            Metric::Usage => Some(here.count() as f64),
            Metric::Wait | Metric::Ivtt => {
                let v: Vec<f64> = here
                    .filter_map(|t| if metric == Metric::Wait { t.wait_min } else { t.ivtt_min })
                    .collect();
                (!v.is_empty()).then(|| mean(&v))
            }
        };
        outcomes.push(ZonalOutcome { zone: z.id, outcome, weight, attribute });
    }
    ZonalOutcomes { outcomes, unzoned_trips, zones_missing_attribute: missing }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LorenzCurve {
    /// (cumulative weight share, cumulative outcome share), from (0, 0).
    pub points: Vec<(f64, f64)>,
    pub ordering: LorenzOrdering,
    /// Every outcome was zero; the curve is flat and carries no information.
    pub degenerate: bool,
}

fn per_capita_cmp(a: &ZonalOutcome, oa: f64, b: &ZonalOutcome, ob: f64) -> Ordering {
    // oa / wa vs ob / wb without dividing by a zero weight
    (oa * b.weight).total_cmp(&(ob * a.weight))
}

/// Lorenz (or concentration) curve of the zones with a defined outcome.
pub fn lorenz(outcomes: &[ZonalOutcome], ordering: LorenzOrdering) -> Result<LorenzCurve> {
    let mut zs: Vec<(ZonalOutcome, f64)> = outcomes.iter().filter_map(|z| z.outcome.map(|o| (*z, o))).collect();
    if let Some((z, o)) = zs.iter().find(|(z, o)| !(z.weight >= 0.0 && *o >= 0.0 && z.weight.is_finite() && o.is_finite())) {
        return Err(Error::arg(format!("zone {}: weight {} and outcome {o} must be finite and >= 0", z.zone, z.weight)));
    }
    let total_w: f64 = zs.iter().map(|(z, _)| z.weight).sum();
    let total_o: f64 = zs.iter().map(|(_, o)| o).sum();
    if !(total_w > 0.0) {
        return Err(Error::InsufficientData(String::from("zones carry no population weight")));
    }
    match ordering {
        LorenzOrdering::PerCapita => zs.sort_by(|(a, oa), (b, ob)| per_capita_cmp(a, *oa, b, *ob).then(a.zone.cmp(&b.zone))),
        LorenzOrdering::Attribute => zs.sort_by(|(a, _), (b, _)| a.attribute.total_cmp(&b.attribute).then(a.zone.cmp(&b.zone))),
    }
    let degenerate = total_o <= 0.0;
    let mut points = vec![(0.0, 0.0)];
    let (mut cw, mut co) = (0.0, 0.0);
    for (z, o) in &zs {
        cw += z.weight;
        co += o;
        points.push((cw / total_w, if degenerate { 0.0 } else { co / total_o }));
    }
    let last = points.len() - 1;
    points[last] = (1.0, if degenerate { 0.0 } else { 1.0 });
    Ok(LorenzCurve { points, ordering, degenerate })
}

/// One minus twice the trapezoid area under the curve.
pub fn gini(curve: &LorenzCurve) -> f64 {
    let area: f64 = curve.points.windows(2).map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0).sum();
    let g = 1.0 - 2.0 * area;
    match curve.ordering {
        LorenzOrdering::PerCapita => g.clamp(0.0, 1.0),
        LorenzOrdering::Attribute => g,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GiniResult {
    pub attribute: Attribute,
    pub metric: Metric,
    pub gini: f64,
    pub curve: LorenzCurve,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EquityReport {
    pub results: Vec<GiniResult>,
    pub unzoned_trips: usize,
    pub warnings: Vec<String>,
}

/// Gini of every (attribute, metric) pair. Attributes no zone carries and
/// metrics without any outcome are skipped with a warning.
pub fn equity_report(
    trips: &[TripRecord],
    zones: &[Zone],
    attributes: &[Attribute],
    ordering: LorenzOrdering,
) -> EquityReport {
    let mut report = EquityReport::default();
    for &attr in attributes {
        if zones.iter().all(|z| z.attribute(attr).is_none()) {
            report.warnings.push(format!("no zone has attribute {}; skipped", attr.name()));
            continue;
        }
        for metric in Metric::ALL {
            let z = zonal_outcomes(trips, zones, metric, attr);
            report.unzoned_trips = z.unzoned_trips;
            match lorenz(&z.outcomes, ordering) {
                Ok(curve) if curve.degenerate => report
                    .warnings
                    .push(format!("{} / {}: all outcomes zero; skipped", attr.name(), metric.as_str())),
                Ok(curve) => report.results.push(GiniResult { attribute: attr, metric, gini: gini(&curve), curve }),
                Err(e) => report.warnings.push(format!("{} / {}: {e}; skipped", attr.name(), metric.as_str())),
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zo(id: u32, outcome: f64, weight: f64) -> ZonalOutcome {
        ZonalOutcome { zone: ZoneId(id), outcome: Some(outcome), weight, attribute: id as f64 }
    }

    #[test]
    fn one_zone_takes_all() {
        let zs: Vec<_> = [0.0, 0.0, 0.0, 1.0].iter().enumerate().map(|(i, &o)| zo(i as u32, o, 1.0)).collect();
        let c = lorenz(&zs, LorenzOrdering::PerCapita).unwrap();
        assert_eq!(c.points, vec![(0.0, 0.0), (0.25, 0.0), (0.5, 0.0), (0.75, 0.0), (1.0, 1.0)]);
        assert!((gini(&c) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn two_zones() {
        let c = lorenz(&[zo(0, 3.0, 1.0), zo(1, 1.0, 1.0)], LorenzOrdering::PerCapita).unwrap();
        assert!((gini(&c) - 0.25).abs() < 1e-12);
        let eq = lorenz(&[zo(0, 2.0, 1.0), zo(1, 4.0, 2.0)], LorenzOrdering::PerCapita).unwrap();
        assert!(gini(&eq).abs() < 1e-12);
    }

    #[test]
    fn degenerate_and_errors() {
        let c = lorenz(&[zo(0, 0.0, 1.0), zo(1, 0.0, 1.0)], LorenzOrdering::PerCapita).unwrap();
        assert!(c.degenerate);
        assert!(lorenz(&[zo(0, 1.0, 0.0)], LorenzOrdering::PerCapita).is_err());
        assert!(lorenz(&[zo(0, -1.0, 1.0)], LorenzOrdering::PerCapita).is_err());
    }

    #[test]
    fn concentration_can_be_negative() {
        // attribute ordering puts the high-outcome zone first
        let zs = [zo(0, 3.0, 1.0), zo(1, 1.0, 1.0)];
        let c = lorenz(&zs, LorenzOrdering::Attribute).unwrap();
        assert!((gini(&c) + 0.25).abs() < 1e-12);
    }

    #[test]
    fn weights_from_shares() {
        let z = Zone::new(1, 1000.0).with_attribute(Attribute::Seniors, 0.2).with_attribute(Attribute::PopDensity, 55.0);
        assert_eq!(group_weight(&z, Attribute::Seniors), Some(200.0));
        assert_eq!(group_weight(&z, Attribute::PopDensity), Some(1000.0));
        assert_eq!(group_weight(&z, Attribute::Income), None);
    }
}
