//! Separability checks for bipartite density matrices.
//!
//! The crate evaluates the positive-partial-transpose (PPT) test and the
//! realignment / computable cross norm (CCNR) criterion on arbitrary
//! bipartite states, with closed forms for the six-parameter family of
//! Bell-decomposable 2x3 states. In 2x3, PPT is equivalent to
//! separability, so the family contains entangled states that the
//! realignment criterion cannot detect; [`search`] enumerates them on a
//! rational grid.
//!
//! ```
//! use sepcrit::criteria::{bd_ccnr_closed_form, bd_ppt_residuals};
//! use sepcrit::states::BDParams;
//!
//! let p = BDParams::new([0.3, 0.0, 0.2, 0.1, 0.4, 0.0]).unwrap();
//! assert!(bd_ppt_residuals(&p).r1 < 0.0); // entangled
//! assert!(bd_ccnr_closed_form(&p).unwrap() < 1.0); // realignment test passes
//! ```

pub mod cli;
pub mod criteria;
pub mod error;
pub mod matrix;
pub mod numfmt;
pub mod search;
pub mod states;

pub use error::{Error, Result};
