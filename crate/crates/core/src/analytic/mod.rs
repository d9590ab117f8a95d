//! Critical thresholds, eigenfunctions and closed-form bounds.
//!
//! `Q_θ` is an alternating sum of about `1/θ` terms whose magnitude dwarfs the
//! result once θ is small, so direct evaluation ([`q_theta_eval`]) loses every
//! significant digit near the root by θ ≈ 0.05. Root finding therefore uses
//! [`q_theta_sign_ln`], which evaluates the same quantity as
//! `f_{x,θ,1}(1+θ)` by stepping the delay equation `f'(u) = -(x/λ) f(u-θ)`
//! piece by piece with renormalisation.

mod bounds;
mod critical;
mod eigen;
pub mod exact;
mod poly;

pub use bounds::{
    cutset_first_moment_bound, lattice_first_moment_bound, lattice_nb_first_moment_bound,
    ln_path_increase_upper_bound, out_of_order_bound, out_of_order_sum, path_increase_upper_bound,
    regular_tree_first_moment_bound,
};
pub use critical::{m_critical, theta_bounds, theta_critical, BoundsReport, THETA_FLOOR};
pub use eigen::{
    eigen_char_poly, eigenfunction_eval, lead_eigenvalue, CharPoly, EigenFunction,
};
pub use poly::{
    floor_inv, neumaier_sum, q_theta_eval, q_theta_sign_ln, q_theta_stable, CriticalPolynomial,
};
