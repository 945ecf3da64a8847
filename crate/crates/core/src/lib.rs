//! Expressive robot head: face kinematics, visual speech, facial-expression
//! features, multiple-kernel classification, and expression imitation.

pub mod codec;
pub mod diag;
pub mod error;
pub mod expression;
pub mod features;
pub mod imitation;
pub mod kinematics;
pub mod mkl;
pub mod viseme;

pub use diag::{Outcome, Warning};
pub use error::{Error, Result};
pub use expression::{Expression, Mode};
