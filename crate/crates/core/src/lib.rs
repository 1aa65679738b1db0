//! Total-variation smoothing along an inverse scale space path.
//!
//! Starting from a blank image, a linearized Bregman iteration on a split
//! total-variation objective grows the set of "active" pixel differences from
//! the largest-scale edges to the finest. Projecting the iterate onto the
//! active set at an early stop yields an image that keeps large-scale
//! structure and discards small-scale detail.
//!
//! - [`lattice`]: pixel grid graph and difference operator
//! - [`dynamics`]: the iteration and its step-size control
//! - [`projection`]: O(p) projection by connected components
//! - [`path`]: early stopping and snapshots at sparsity levels
//! - [`oracle`]: dense reference solvers and the projection benchmark
//! - [`spectral`]: low/high frequency decomposition
//! - [`io`]: PNG and PNM reading and writing
//! - [`cli`]: batch jobs behind the `scalepath` binary
//! - [`synth`]: deterministic test images

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod lattice;
pub mod oracle;
pub mod path;
pub mod projection;
pub mod spectral;
pub mod synth;

pub use dynamics::{HyperParams, IterState, Smoother, StepSize};
pub use error::{Error, Result};
pub use io::ColorMode;
pub use lattice::{ColorImage, EdgeVector, Image, ImagePlane, LatticeGraph};
pub use path::{run_path, smooth_to_level, PathConfig, PathResult, Snapshot};
pub use projection::{find_components, project, ComponentPartition, SupportSet};
