//! Capstone course management: intake, program balance, ballots, group
//! formation, advisors, surveys and the semester workflow.

pub mod advisors;
pub mod allocator;
pub mod balance;
pub mod ballots;
pub mod error;
pub mod intake;
pub mod model;
pub mod semester;
pub mod store;
pub mod surveys;
pub mod synth;
pub mod workflow;

pub use error::{Error, ErrorClass, Result};
pub use semester::Semester;
