//! Numerical laboratory for the transport theorem on nonconvecting evolving
//! domains in embedded manifolds.
//!
//! For a regularly evolving open set `O_t ⊂ M` whose boundary is the image of
//! a time-dependent Lipschitz immersion `f_t`, and a scalar field `φ`,
//!
//! ```text
//! d/dt ∫_{O_t} φ dH^m = ∫_{O_t} φ' dH^m + ∫_{∂*O_t} φ V∂ dH^{m-1},
//! ```
//!
//! where `V∂ = f'·n` is the scalar normal velocity of the boundary. The crate
//! computes every quantity in that statement (normals, normal velocity, the
//! space-time set `W` and its normal, the lateral Jacobian) and checks the
//! identity together with the lemmas that lead to it.
//!
//! Modules, bottom up:
//! - [`domain`]: manifold charts, boundary immersions, evolving domains, fields.
//! - [`geometry`]: pointwise geometry (`n`, `v`, `V∂`, Jacobians, projections).
//! - [`quadrature`] and [`integration`]: Gauss tensor rules and the area formula.
//! - [`spacetime`]: `W`, its lateral normal, Jacobian factorization, divergence theorem.
//! - [`lab`]: scenario registry, transport verification, sweeps, reports, config.

pub mod domain;
pub mod error;
pub mod geometry;
pub mod integration;
pub mod lab;
pub mod linalg;
pub mod quadrature;
pub mod spacetime;

pub use error::{Result, TransportError};
