//! Input documents for each subcommand. Unknown keys are rejected everywhere.

use jdisc_core::acstructure::{SampleSpec, StructureSpec};
use jdisc_core::beltrami::{CoefficientPair, MonomialTerm, SolverConfig};
use jdisc_core::morse::QuadraticData;
use jdisc_core::Complex64;
use serde::{Deserialize, Serialize};

fn half() -> f64 {
    0.5
}

fn fit_degree() -> u32 {
    3
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsInput {
    pub a_terms: Vec<MonomialTerm>,
    #[serde(default)]
    pub b_terms: Vec<MonomialTerm>,
    #[serde(default = "half")]
    pub gamma: f64,
    /// Declared bound on `|a|`; measured from samples when absent.
    #[serde(default)]
    pub a0: Option<f64>,
}

impl CoefficientsInput {
    pub fn build(&self) -> jdisc_core::Result<CoefficientPair> {
        match self.a0 {
            Some(a0) => CoefficientPair::new(self.a_terms.clone(), self.b_terms.clone(), self.gamma, a0),
            None => CoefficientPair::with_measured_a0(self.a_terms.clone(), self.b_terms.clone(), self.gamma),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureInput {
    pub spec: StructureSpec,
    #[serde(default)]
    pub sample: SampleSpec,
    #[serde(default = "fit_degree")]
    pub fit_degree: u32,
}

/// `solve`: exactly one of `coefficients` or `structure`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveInput {
    #[serde(default)]
    pub coefficients: Option<CoefficientsInput>,
    #[serde(default)]
    pub structure: Option<StructureInput>,
    #[serde(default)]
    pub solver: SolverConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeInput {
    pub structure: StructureInput,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyInput {
    pub n_radial: usize,
    pub n_angular: usize,
    pub seed: u64,
    pub probes: usize,
    pub norm_p: f64,
    pub norm_trials: usize,
}

impl Default for VerifyInput {
    fn default() -> Self {
        Self { n_radial: 32, n_angular: 128, seed: 0, probes: 10, norm_p: 3.0, norm_trials: 16 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TakagiInput {
    pub matrix: [[Complex64; 2]; 2],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorseInput {
    pub quadratic: QuadraticData,
    pub k: usize,
    #[serde(default = "MorseInput::default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "MorseInput::default_delta")]
    pub delta: f64,
    /// `c0` of the totally real set attached at the critical point.
    #[serde(default = "MorseInput::default_c0")]
    pub c0: f64,
}

impl MorseInput {
    fn default_epsilon() -> f64 {
        1e-12
    }

    fn default_delta() -> f64 {
        0.2
    }

    fn default_c0() -> f64 {
        1.0
    }
}
