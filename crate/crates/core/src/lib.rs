//! Certificates for free spectrahedra: inclusion, equality, polar duals and
//! Positivstellensatz membership, each backed by a checkable witness.

pub mod error;
pub mod gleich;
pub mod inclusion;
pub mod linalg;
pub mod lmi;
pub mod ncpoly;
pub mod pencil;
pub mod psatz;
pub mod univar;

pub use error::{Error, Result};
pub use inclusion::{check_inclusion, InclusionOptions, InclusionVerdict, KrausCertificate, Mode, ModeChoice};
pub use ncpoly::{basis_words, MatPoly, Word};
pub use pencil::{Boundedness, Membership, Pencil, SymTuple};
