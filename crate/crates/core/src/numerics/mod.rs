//! Numerical kernel shared by every other module: seeded random streams,
//! normal quantiles, chi-square tails, weighted distances, order-statistic
//! quantiles and a guarded symmetric solve.

mod distance;
mod linalg;
mod quantile;
mod seed;
mod special;

pub use distance::{weighted_distance, DistanceKind, WeightedDistanceSpec};
pub use linalg::{solve_spd, SpdSolution};
pub use quantile::{empirical_quantile, order_statistic_rank};
pub use seed::{SeedSpec, StreamRng};
pub use special::{chi_square_sf, std_normal_cdf, std_normal_quantile};
