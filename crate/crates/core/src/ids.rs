//! 1-based identifiers for locations, robots and teams.

use std::fmt;

use serde::{Deserialize, Serialize};

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident, $prefix:literal) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub usize);

        impl $name {
            /// Zero-based storage index.
            pub fn index(self) -> usize {
                self.0 - 1
            }

            pub fn from_index(index: usize) -> Self {
                Self(index + 1)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

id_type!(
    /// Node of the mobility graph.
    LocationId,
    "l"
);
id_type!(
    /// Robot index `i`.
    RobotId,
    "r"
);
id_type!(
    /// Team index `m`.
    TeamId,
    "T"
);
