use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameters (grid sizes, exponents, tolerances, coefficient data).
    #[error("configuration error: {0}")]
    Config(String),

    /// Arguments that cannot be combined, e.g. fields on different grids.
    #[error("usage error: {0}")]
    Usage(String),

    /// No candidate exponent satisfies `a0 · safety · ‖R0‖_p < 1`.
    #[error("no feasible exponent: {}", format_products(.products))]
    Infeasible { products: Vec<(f64, f64)> },

    #[error("{stage} did not converge after {iterations} iterations (last ratio {last_ratio:.3e}, last change {last_change:.3e})")]
    NonConvergence {
        stage: &'static str,
        iterations: usize,
        last_ratio: f64,
        last_change: f64,
        /// Per-iteration sup-norm changes, kept so callers can report divergence.
        history: Vec<f64>,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("polynomial fit residual {residual:.3e} exceeds {threshold:.3e}")]
    Approximation { residual: f64, threshold: f64 },

    #[error("ellipticity violated: sup |a| = {sup_a:.6} ≥ 1")]
    Ellipticity { sup_a: f64 },

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("consistency error: {0}")]
    Consistency(String),
}

fn format_products(products: &[(f64, f64)]) -> String {
    products.iter().map(|(p, prod)| format!("p={p}: a0·safety·‖R0‖_p={prod:.6}")).collect::<Vec<_>>().join(", ")
}
