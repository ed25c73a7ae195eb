//! Design and simulation of single-plane tetrahedron (SIC-POVM) tomography
//! for double-slit qubits with Gaussian slits.
//!
//! - [`wavefield`]: free propagation of the two slit modes, intensity
//!   envelope, measurement projectors and the Bloch curve on a plane.
//! - [`sicsearch`]: search for planes and detector positions whose Bloch
//!   vectors form a regular tetrahedron, slit balancing and POVM assembly.
//! - [`tomo`]: photon counting simulation and state reconstruction.
//! - [`labgeom`]: conversion between dimensionless designs and laboratory
//!   lengths.

pub mod bloch;
pub mod error;
pub mod labgeom;
pub mod quad;
pub mod sicsearch;
pub mod tomo;
pub mod wavefield;

pub use bloch::BlochState;
pub use error::{Error, Result};
pub use labgeom::PhysicalGeometry;
pub use sicsearch::{DetectorLayout, Povm4, PovmElement, SearchConfig, TetraSolution};
pub use tomo::{CountRecord, Method, ReconstructionReport};
pub use wavefield::{PlanePoint, SampledField, SlitConfig};
