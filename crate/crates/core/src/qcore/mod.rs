//! Foundational quantum math: Fock amplitudes of displaced qubit states,
//! coherent-state algebra, small density matrices with negativity, and
//! adaptive Gauss-Legendre quadrature.

mod amplitudes;
mod coherent;
mod density;
pub mod fock;
pub mod quadrature;

pub use amplitudes::{default_kmax, displaced_amplitudes, Sign, NORM_TOLERANCE};
pub use coherent::{coherent_overlap, CoherentLabel};
pub use density::{negativity, DensityMatrix};
pub use quadrature::{gauss_quadrature, GaussLegendre, Interval, Quadrature};
