//! Trace triples for nonnegative solutions of the heat equation on a
//! cylindrical domain Ω×(0,T).
//!
//! A nonnegative caloric field u on Q_T = Ω×(0,T) is determined by three
//! boundary measures: a bottom trace μ on Ω×{0} (finite δ-weighted mass),
//! a corner trace λ on ∂Ω×{0}, and a lateral trace ν on ∂Ω×(0,T) (finite
//! on every (0,T₁), T₁<T). The field is recovered from the triple by
//!
//! ```text
//! u(x,t) = ∫_Ω G(x,t;y,0) dμ(y)
//!        + ∫_∂Ω ∂G/∂N_y(x,t;y,0) dλ(y)
//!        + ∬_{∂Ω×(0,t)} ∂G/∂N_y(x,t;y,s) dν(y,s)
//! ```
//!
//! where G is the Dirichlet heat kernel of Ω. This crate evaluates the
//! formula forward ([`representation`]), extracts the triple back from a
//! field by shrinking-domain and Green-potential limit procedures
//! ([`traces`]), and checks the inequalities, identities and convergence
//! statements of the underlying theory against an independent
//! finite-difference oracle ([`verify`]).
//!
//! The fully supported domain is the interval (0,π) (any interval works by
//! rescaling); the rectangle is available as a tensor-product special case
//! for kernels and forward evaluation only.

pub mod cli;
pub mod domain;
pub mod kernels;
pub mod measures;
pub mod quadrature;
pub mod representation;
pub mod traces;
pub mod verify;

mod error;

pub use error::{Error, Result};

pub use domain::{BoundaryComponent, BoundaryPoint, BoundaryQuadrature, Domain, Point};
pub use kernels::{EllipticGreen, KernelEvaluator, KernelValue};
pub use measures::{CornerMeasure, InteriorMeasure, LateralMeasure, TraceTriple};
pub use quadrature::QuadratureResult;
pub use representation::{Field, FieldValue, SolutionField};
pub use traces::{ExtractionSchedule, TraceReport};
pub use verify::SuiteReport;
