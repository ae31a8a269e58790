use core::fmt;

use super::frt::{frt_board, FrtLoads, RouteSpec, Timetable};
use crate::demand::RideRequest;
use crate::network::Network;

/// Which service a trip is (or would be) carried by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ServiceTag {
    Crowdsourced,
    Dedicated,
    Frt,
}

impl ServiceTag {
    pub fn as_str(self) -> &'static str {
        match self {
            ServiceTag::Crowdsourced => "crowdsourced",
            ServiceTag::Dedicated => "dedicated",
            ServiceTag::Frt => "frt",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "crowdsourced" => Some(ServiceTag::Crowdsourced),
            "dedicated" => Some(ServiceTag::Dedicated),
            "frt" => Some(ServiceTag::Frt),
            _ => None,
        }
    }
}

impl fmt::Display for ServiceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The corridor service a hybrid design pairs with crowdsourced coverage.
#[derive(Debug, Clone, Copy)]
pub enum HybridMode<'a> {
    /// Fixed route inside its catchment and hours.
    FrtBased { timetable: &'a Timetable, loads: &'a FrtLoads },
    /// Dedicated on-demand fleet over the same catchment and hours.
    OdtBased { corridor: &'a RouteSpec },
}

/// Splits requests between the corridor service and crowdsourced ODT, which
/// covers the rest of the area during corridor hours and everything outside
/// them.
pub fn hybrid_route(request: &RideRequest, net: &Network, mode: &HybridMode<'_>) -> ServiceTag {
    match mode {
        HybridMode::FrtBased { timetable, loads } => match frt_board(request, timetable, net, loads) {
            Ok(_) => ServiceTag::Frt,
            Err(_) => ServiceTag::Crowdsourced,
        },
        HybridMode::OdtBased { corridor } => {
            if corridor.in_window(request.time_s)
                && corridor.covers(net, request.origin)
                && corridor.covers(net, request.destination)
            {
                ServiceTag::Dedicated
            } else {
                ServiceTag::Crowdsourced
            }
        }
    }
}
