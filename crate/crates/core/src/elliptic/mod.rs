//! Executable forms of the discrete elliptic estimates: Dirichlet problems
//! on cubes (Poisson kernel, Green's function, integration by parts),
//! surface averages, maximum principles, Poincare, sub-mean value,
//! Moser-Harnack, Harnack, and the Chernoff-Hoeffding bound.
//!
//! Cubes here are genuine Z^d boxes with no torus wrap; torus fields enter
//! through window extraction.

mod checks;
mod chernoff;
mod cube;
mod kernels;

pub use checks::{
    harnack_check, max_principle_check, moser_harnack_ratio, poincare_check, submean_check,
    HarnackReport, MaxPrincipleReport, MoserHarnackReport, PoincareReport, SubmeanReport,
};
pub use chernoff::{chernoff_bound, kl_divergence};
pub use cube::{torus_window, CubeProblem, ZBox};
pub use kernels::{
    dirichlet_solve, ibp_residual, kernels, surface_averages, DirichletKernels, KernelCache,
    SurfaceAverages,
};
