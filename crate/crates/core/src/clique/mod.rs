//! Congested Clique protocols: charged routing primitives, the +1 girth
//! approximation, and partition-tree subgraph listing.

pub mod girth;
pub mod listing;
pub mod net;
pub mod partition;
