//! Build planning for powder-bed printer farms: part-to-job assignment,
//! orientation choice, and the trade-off between due-date deviation and
//! unused plate area.

pub mod datasets;
pub mod experiments;
pub mod geometry;
pub mod instance;
pub mod model;
pub mod oracle;
pub mod pareto;
pub mod schedule;
pub mod solver;
