//! GVD-guided autonomous exploration for 2D occupancy grids.
//!
//! The pipeline: binarize the known map, build a chamfer clearance field by
//! iterated offset max-pooling, take Laplacian ridges as the generalized
//! Voronoi diagram, fuse-extract frontiers from ridge nodes, and assign them
//! with a three-tier policy (real-time local, reserved local, global TSP over
//! clustered frontiers solved by ant colony optimization). Path costs are
//! measured on the GVD graph. A deterministic lidar simulator and benchmark
//! harness exercise the whole loop.

pub mod grid;
pub mod gvd;
pub mod frontiers;
pub mod gvd_path;
pub mod assignment;
pub mod sim;
pub mod harness;
