//! Exact computations on one-parameter sncd degenerations over `K = Q(t)`:
//! monomial valuations, dual intersection complexes, weight functions of
//! pluricanonical forms with their Kontsevich–Soibelman and essential
//! skeleta, and the explicit retraction flow of the two-component model.

pub mod cli;
pub mod complex;
pub mod field;
pub mod flow;
pub mod monoval;
pub mod parse;
pub mod serial;
pub mod weight;

pub use complex::{build_complex, DualComplex, ModelDescription, MonomialPointData, SkeletonPoint, Subcomplex};
pub use field::{BaseElement, ExtendedValue, Q};
pub use flow::{BasicModel, FlowTime, RigidPoint};
pub use monoval::{MonomialWeights, MultivariatePoly};
pub use weight::{PluricanonicalForm, WeightValue};
