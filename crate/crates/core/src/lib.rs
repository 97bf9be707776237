//! # totcorr
//!
//! Total-correlation entanglement measures for multipartite qudit states.
//!
//! - [`tensor`]: registers, Kronecker products, partial traces, Hermitian spectra.
//! - [`states`]: GHZ, W, W̄, cluster and EPR states, the two parametric
//!   families, ensembles, flagged mixtures and seeded random states.
//! - [`measures`]: entropies, mutual information and the pairwise `M`,
//!   global `O`, combined `S = (O + M)/2` and Meyer–Wallach-type `MW` measures.
//! - [`roof`]: convex-roof extension by minimization over decompositions,
//!   with the two-qubit entanglement-of-formation oracle.
//! - [`sweep`], [`verify`], [`io`]: data behind the CLI.
//!
//! ```
//! use totcorr::{measures, states};
//!
//! let ghz = states::ghz(4).unwrap();
//! let s = measures::measure_s(&ghz).unwrap();
//! assert!((s - 2.5).abs() < 1e-12);
//! ```

#![forbid(unsafe_code)]

pub mod error;
pub mod format;
pub mod io;
pub mod measures;
pub mod roof;
pub mod states;
pub mod sweep;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
pub use measures::{Measure, MeasureReport, QuantumState};
pub use roof::{RoofConfig, RoofResult, Strategy};

pub use states::{Ensemble, PureState, State};
pub use tensor::{CMatrix, DensityMatrix, RegisterShape, C64};
