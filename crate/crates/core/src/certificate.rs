//! The certificate record shared by every lower-bound producer.
//!
//! A certificate is a list of named steps. Each step carries the integers it
//! asserts and the running bound after it; a checker reruns the named
//! computation from `form` and `alpha` and compares. See [`crate::verify`].

use serde::{Deserialize, Serialize};

use crate::polyring::Form;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Derksen,
    Improved,
    RuledOut,
    Cactus,
    Construction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub name: String,
    pub values: Vec<i64>,
    /// Running bound after this step.
    pub bound: i64,
}

impl Step {
    pub fn new(name: &str, values: Vec<i64>, bound: i64) -> Self {
        Self { name: name.to_string(), values, bound }
    }
}

/// A sparse polynomial in the parameters of a linear form, as
/// `[[exponent...], "p/q"]` pairs.
pub type ParamPolyRepr = Vec<(Vec<u32>, String)>;

/// Nullstellensatz data for one degree of the parametric rule-out: the
/// multipliers `p_m` with `sum p_m * minor_m = 1`, in the order
/// `[g0, m_(0,0), m_(0,1), ...]` produced by [`crate::construct::ruleout`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NullstellensatzRecord {
    pub degree: u32,
    pub multiplier_degree: u32,
    pub multipliers: Vec<ParamPolyRepr>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleoutMode {
    ExactNullstellensatz,
    Randomized,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleoutRecord {
    pub mode: RuleoutMode,
    /// Index of the distinguished variable (the one `alpha` differentiates).
    pub var: usize,
    pub k: u32,
    /// Present in exact mode, one entry per checked degree.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nullstellensatz: Vec<NullstellensatzRecord>,
    /// Present in randomized mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionData {
    pub n: usize,
    pub d: u32,
    pub k: u32,
    pub s: u64,
    #[serde(rename = "G")]
    pub g: Form,
    #[serde(rename = "K")]
    pub k_form: Form,
    #[serde(rename = "F")]
    pub f: Form,
    pub psi: Form,
    pub rng_seed: u64,
    pub tries: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub form: String,
    pub nvars: usize,
    pub degree: u32,
    pub alpha: String,
    pub kind: BoundKind,
    pub steps: Vec<Step>,
    pub bound: i64,
    /// False when a step is only probabilistic (randomized rule-out).
    pub rigorous: bool,
    /// True for cactus bounds, whose hypothesis is not machine-checked.
    #[serde(default)]
    pub conditional: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ruleout: Option<RuleoutRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub construction: Option<ConstructionData>,
}

impl BoundCertificate {
    pub fn new(form: &Form, alpha: &Form, kind: BoundKind) -> Self {
        Self {
            form: form.to_primal_string(),
            nvars: form.nvars(),
            degree: form.degree(),
            alpha: alpha.to_dual_string(),
            kind,
            steps: Vec::new(),
            bound: 0,
            rigorous: true,
            conditional: false,
            ruleout: None,
            construction: None,
        }
    }

    /// Appends a step; the running bound never decreases.
    pub fn push(&mut self, name: &str, values: Vec<i64>, bound: i64) {
        self.bound = self.bound.max(bound);
        self.steps.push(Step::new(name, values, self.bound));
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("certificate serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}
