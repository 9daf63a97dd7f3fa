//! Identifier newtypes.

use std::fmt;

use serde::{Deserialize, Serialize};

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident($inner:ty), $prefix:literal) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub $inner);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }

        impl From<$inner> for $name {
            fn from(v: $inner) -> Self {
                Self(v)
            }
        }
    };
}

id_type!(
    /// Grid site.
    SiteId(u32), "site"
);
id_type!(
    /// Job, unique across a run.
    JobId(u64), "job"
);
id_type!(
    /// Burst of jobs submitted together.
    BurstId(u64), "burst"
);
id_type!(
    /// Submitting user.
    UserId(u32), "user"
);
id_type!(
    /// Dataset that a job reads as input.
    DatasetId(u32), "ds"
);
