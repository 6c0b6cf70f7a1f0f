pub mod catalog;
pub mod gmatrix;
pub mod graph;
pub mod numeric;
pub mod persist;
pub mod rank;
pub mod extract;
pub mod merge;
pub mod analysis;
pub mod cultures;
pub mod pipeline;
pub mod synthetic;
