use core::fmt;

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.fmt(f)
            }
        }

        impl From<u32> for $name {
            fn from(v: u32) -> Self {
                $name(v)
            }
        }
    };
}

id_type!(
    /// Road network node.
    NodeId
);
id_type!(
    /// Directed road segment.
    EdgeId
);
id_type!(
    /// Ride request, unique within a demand set.
    RequestId
);
id_type!(
    /// Vehicle, unique within one simulation run.
    VehicleId
);
id_type!(
    /// Census-style zone (dissemination area).
    ZoneId
);
