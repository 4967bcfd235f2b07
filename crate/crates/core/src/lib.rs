//! Exact modularity density maximization by column generation.
//!
//! The master problem is the LP relaxation of set partitioning over all
//! vertex subsets. Columns are priced first by a family of greedy peeling
//! passes and, when those find nothing, exactly by solving one 0-1 linear
//! program per subset size with branch-and-bound. Both the LP and the
//! branch-and-bound are implemented here.

pub mod colgen;
pub mod error;
pub mod gadgets;
pub mod graph;
pub mod lp;
pub mod objective;
pub mod oracles;
pub mod peeling;
pub mod pricing;
pub mod report;

pub use colgen::{run_colgen, ColGenConfig, ColGenReport, PrimalStatus, SolveStatus};
pub use error::{Error, Result};
pub use graph::{parse_edge_list, Graph, VertexSet};
pub use objective::{
    blended_objective, cluster_contribution, contribution, modularity_density, pricing_objective,
    DualSolution, Partition,
};
pub use peeling::{peel_densest, peel_pricing, PeelConfig};
pub use pricing::{enumerate_pricing, exact_pricing, solve_apk, ExactConfig, PricingResult};
