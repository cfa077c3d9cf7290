//! Voting rules for participatory budgeting (PB) with approval ballots.
//!
//! The crate covers the whole pipeline needed to compare rules on welfare and
//! representation:
//!
//! * [`model`]: instances, approval profiles and bundles;
//! * [`scoring`]: social welfare, representation, PAV score and ratios;
//! * [`exact`]: exact AV / CC / PAV optimizers (branch and bound);
//! * [`sequential`]: sequential PAV, Rule X and its budget-exhausting variants;
//! * [`fairness`]: cohesive groups and an exact EJR violation search;
//! * [`adversarial`]: worst-case instance families with closed-form ratios;
//! * [`datagen`]: seeded Euclidean and party-list generators;
//! * [`pabulib`]: reader and writer for `.pb` approval files;
//! * [`samples`]: small hand-built instances.
//!
//! All money and score arithmetic is exact (big rationals).
//!
//! ```
//! use pb_core::model::{PbInstance, ApprovalProfile, Bundle};
//! use pb_core::scoring::{social_welfare, representation};
//!
//! let instance = PbInstance::from_costs(&[("a", 1), ("b", 1), ("c", 2)], 3).unwrap();
//! let profile = ApprovalProfile::from_ids(&instance, &[&["a", "b"][..], &["a"], &["c"]]).unwrap();
//! let bundle = Bundle::from_ids(&instance, &["a", "c"]).unwrap();
//! assert_eq!(social_welfare(&profile, &bundle).unwrap(), 3);
//! assert_eq!(representation(&profile, &bundle).unwrap(), 3);
//! ```

pub mod adversarial;
pub mod datagen;
pub mod error;
pub mod exact;
pub mod fairness;
pub mod model;
pub mod pabulib;
pub mod samples;
pub mod scoring;
pub mod sequential;

pub use error::{Error, Result};
pub use model::{ApprovalProfile, Bundle, PbInstance, Project, Rational};
