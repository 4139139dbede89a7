//! Exact quantifier elimination over real closed fields.

pub mod cylinder;
pub mod elim;
pub mod formula;
pub mod hermite;
pub mod linalg;
pub mod oracle;
pub mod poly;
pub mod sign;
pub mod signdet;

pub use poly::{MPoly, QPoly};
pub use sign::{Sign, SignCondition};
