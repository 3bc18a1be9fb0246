pub mod cli;
pub mod geom;
pub mod metric;
pub mod phase;
pub mod report;
pub mod search;
pub mod table;
pub mod variational;
