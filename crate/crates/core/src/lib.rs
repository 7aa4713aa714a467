//! Counting disjoint complete N-ary subtrees rooted at the ancestor of a
//! Galton-Watson family tree.
//!
//! * [`offspring`]: offspring laws, pgf values and scaled derivatives.
//! * [`gfun`]: the band sums `G_N(x, y; j)`.
//! * [`series`]: truncated power series in the progeny variable.
//! * [`solver`]: `tau_N`, family equations, critical means.
//! * [`dist`]: the law of `V_N`, generically and in closed form.
//! * [`joint`]: the joint law of `(V_{N,n}, nu_n)`.
//! * [`mc`]: tree simulation and exhaustive enumeration.
//! * [`tables`]: the three reference tables for geometric, Poisson and
//!   one-or-many offspring with mean about 13.

pub mod dist;
pub mod error;
pub mod exec;
pub mod gfun;
pub mod joint;
pub mod mc;
pub mod offspring;
pub mod series;
pub mod solver;
pub mod special;
pub mod tables;

pub use error::{Error, Result};
pub use exec::Execution;
pub use offspring::{LawSpec, OffspringLaw};
