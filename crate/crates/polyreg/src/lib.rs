//! Edge singular exponents, vertex spectral certificates, and weighted
//! regularity windows for the mixed Stokes problem on polyhedral domains.
//!
//! The crate answers three questions about a polyhedral domain with mixed
//! velocity/traction boundary conditions:
//!
//! 1. **Edge exponents.**  For each edge, the exponent `mu` that governs the
//!    admissible edge weights, computed from the zeros of the dihedral
//!    pencil's characteristic function ([`pencil`]), independently verified
//!    by a collocation discretization of the pencil itself ([`oracle`]).
//! 2. **Vertex certificates.**  Citable eigenvalue-free strips for the
//!    vertex pencils, from a rule table keyed on the boundary-condition
//!    configuration ([`certificates`]).
//! 3. **Regularity windows.**  Admissibility verdicts and exact `s`-range
//!    inversions for the solvability and regularity theorems, over exact
//!    rational arithmetic ([`windows`]).
//!
//! [`report`] drives the full pipeline over a parsed domain ([`geometry`])
//! and renders machine-readable and human-readable reports.

pub mod certificates;
pub mod exact;
pub mod geometry;
pub mod oracle;
pub mod pencil;
pub mod report;
pub mod verify;
pub mod windows;

pub use exact::Exact;
pub use geometry::{BcKind, DomainModel};
pub use pencil::{BcPair, MuBound, PencilConfig, PencilSpectrum, SearchBox};
pub use report::{analyze, AnalysisReport, AnalyzeError, RenderFormat};
pub use windows::{RegularityQuery, TheoremId, Verdict};
