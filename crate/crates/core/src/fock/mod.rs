//! Truncated-Fock oracle: master-equation integration, Wigner extraction and
//! the operator-series solution.

pub mod lindblad;
pub mod ops;
pub mod series;
pub mod state;
pub mod wigner;

pub use lindblad::{integrate, lindblad_rhs, order_check, rotate_frame, Frame, FrameDirection, IntegratorConfig, OrderCheck, Trajectory};
pub use ops::{displacement, displacement_expm, ladder_operators, CMatrix};
pub use series::{series_propagate, SeriesTruncation};
pub use state::{FockDensityMatrix, Monitors};
pub use wigner::{transition_t0, weyl_quantize, wigner_grid, wigner_point};
