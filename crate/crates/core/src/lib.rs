//! Box-counting dimension of surfaces built from overlapping spheres.
//!
//! Two surface representations are provided: a voxelised point cloud sampled
//! from the union of spheres, and an exact classification of cubic boxes
//! against the sphere union. Both feed the same log-log slope fit.

pub mod bitgrid;
pub mod delaunay;
pub mod dimension;
pub mod dump;
pub mod error;
pub mod exact;
pub mod model;
pub mod neighbors;
pub mod pipeline;
pub mod radii;
pub mod surface;
pub mod synth;
pub mod voxel;
pub mod xyz;

pub use bitgrid::BinaryGrid;
pub use dimension::{dimension_from_counts, fit_slope, ols_log_log, BoxCountSeries, FitResult, OlsFit};
pub use error::{Error, Result};
pub use model::{bounding_box, Atom, BoundingBox, Structure, Vec3};
pub use neighbors::{build_neighbor_list, NeighborList};
pub use pipeline::{run_box_cnt, run_on_structure, RunConfig, RunReport};
pub use radii::{RadiiTable, RadiusType};
pub use surface::{find_surface_atoms, is_inner_side, InnerSide, SurfaceAlgorithm, SurfaceFlags};
pub use xyz::{load_xyz, parse_xyz};
