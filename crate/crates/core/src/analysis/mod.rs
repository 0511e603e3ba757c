//! Curve fitting for experiment records and closed-form models.

mod fit;
mod models;

pub use fit::{
    fit_cat_cut, fit_cosine, fit_decay, fit_exp_cos, fit_exponential, fit_gaussian, fit_proportional,
    least_squares, CatCutFit, FitParam, FitResult, LmOptions,
};
pub use models::{
    cat_decoherence_time, cat_parity_limit, cat_parity_vs_time, collapse_time, kerr_estimates,
    predicted_t2, t2_decomposition, thermal_dephasing_rate, DephasingBudget, KerrEstimates, Measured,
};
