//! Weighted persistent homology.
//!
//! Point clouds carry a radius function per point, so balls grow at
//! different rates. From such a cloud this crate builds weighted
//! Vietoris-Rips and weighted Čech filtrations, reduces them to persistence
//! diagrams over Z/2, compares diagrams with the bottleneck distance, and
//! audits the sandwich and stability bounds that relate all of these. The
//! [`mnist`] module applies weighted Rips persistence to detecting
//! handwritten eights.

// `!(x > 0.0)` rejects NaN along with nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audit;
pub mod error;
pub mod filtration;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod mnist;
pub mod persistence;

pub use error::{Error, Result};
pub use filtration::{
    build_linear_rips, build_weighted_cech, build_weighted_rips, cech_membership_value,
    edge_entry_time, verify_vr_lemma, Filtration, FiltrationEntry, FiltrationParams, Flavor,
    Simplex,
};
pub use geometry::{
    pairwise_distances, weighted_distance_matrix, DistanceMatrix, PointCloud, RadiusFunction,
    Region,
};
pub use metrics::{
    bottleneck_distance, entry_function, entry_sup_distance, stability_bound,
    verify_diagram_stability, Relation, StabilityBound,
};
pub use persistence::{
    betti_at, boundary_matrix, compute_diagram, diagram, reduce, Barcode, BoundaryMatrix,
    DiagramPoint, Pairing, PersistenceDiagram,
};
