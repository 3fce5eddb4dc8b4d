//! Comparator hypothesis tests and the distribution kernels they need.

pub mod contingency;
pub mod kernels;
pub mod survival;
pub mod two_sample;

pub use contingency::{chi_square_test, fisher_exact, ChiSquareResult, TwoByTwoTable};
pub use kernels::{
    chi2_cdf, chi2_sf, hypergeom_pmf, normal_cdf, normal_quantile, normal_sf, t_cdf, FisherNoncentralHypergeometric,
};
pub use survival::{log_rank_test, LogRankResult, SurvivalObs, SurvivalSample};
pub use two_sample::{t_test, TTestResult, TTestVariant};
