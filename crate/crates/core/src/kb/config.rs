use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::KbError;
use crate::dep::ParseMode;
use crate::extract::ExtractConfig;
use crate::mln::{SamplerConfig, StepConfig};
use crate::model::FilterConfig;
use crate::space::Weighting;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    #[default]
    Conllu,
    Sd,
}

/// Flat key-value pipeline settings, read from TOML. Every key is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub input_format: InputFormat,
    pub strict: bool,

    pub subject_labels: Vec<String>,
    pub object_labels: Vec<String>,
    pub passive_labels: Vec<String>,
    pub verb_stoplist: Vec<String>,
    pub noun_stoplist: Vec<String>,
    pub negation_labels: Vec<String>,
    pub conj_expansion: bool,
    pub strict_pos: bool,

    pub smoothing_k: f64,
    pub min_count: f64,
    pub min_pmi: Option<f64>,

    pub space_weighting: Weighting,
    /// 0 leaves the spaces sparse.
    pub svd_rank: usize,
    pub svd_iterations: usize,

    pub mln_train: bool,
    pub mln_l2: f64,
    pub mln_initial_step: f64,
    pub mln_max_iterations: usize,
    pub mln_tolerance: f64,
    pub gibbs_burn_in: usize,
    pub gibbs_samples: usize,

    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let e = ExtractConfig::default();
        let step = StepConfig::default();
        let sampler = SamplerConfig::default();
        PipelineConfig {
            input_format: InputFormat::Conllu,
            strict: false,
            subject_labels: e.subject_labels,
            object_labels: e.object_labels,
            passive_labels: e.passive_labels,
            verb_stoplist: e.verb_stoplist,
            noun_stoplist: e.noun_stoplist,
            negation_labels: e.negation_labels,
            conj_expansion: e.conj_expansion,
            strict_pos: e.strict_pos,
            smoothing_k: 0.0,
            min_count: 0.0,
            min_pmi: None,
            space_weighting: Weighting::Ppmi,
            svd_rank: 0,
            svd_iterations: 100,
            mln_train: false,
            mln_l2: 0.1,
            mln_initial_step: step.initial_step,
            mln_max_iterations: step.max_iterations,
            mln_tolerance: step.tolerance,
            gibbs_burn_in: sampler.burn_in,
            gibbs_samples: sampler.samples,
            seed: 42,
        }
    }
}

fn field(name: &str, message: impl Into<String>) -> KbError {
    KbError::Config {
        field: name.to_string(),
        message: message.into(),
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, KbError> {
        let config: PipelineConfig = toml::from_str(text).map_err(|e| {
            let message = e.message().to_string();
            let name = message
                .split('`')
                .nth(1)
                .filter(|_| message.contains("field"))
                .unwrap_or("config")
                .to_string();
            field(&name, message)
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), KbError> {
        let non_negative = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(field(name, format!("must be a finite value >= 0, got {v}")))
            }
        };
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(field(name, format!("must be > 0, got {v}")))
            }
        };
        non_negative("smoothing_k", self.smoothing_k)?;
        non_negative("min_count", self.min_count)?;
        if let Some(p) = self.min_pmi {
            if !p.is_finite() {
                return Err(field("min_pmi", "must be finite"));
            }
        }
        if self.svd_rank > 0 && self.svd_iterations == 0 {
            return Err(field("svd_iterations", "must be >= 1 when svd_rank > 0"));
        }
        non_negative("mln_l2", self.mln_l2)?;
        positive("mln_initial_step", self.mln_initial_step)?;
        positive("mln_tolerance", self.mln_tolerance)?;
        if self.gibbs_samples == 0 {
            return Err(field("gibbs_samples", "must be >= 1"));
        }
        for (name, labels) in [
            ("subject_labels", &self.subject_labels),
            ("object_labels", &self.object_labels),
        ] {
            if labels.is_empty() {
                return Err(field(name, "must list at least one label"));
            }
        }
        Ok(())
    }

    pub fn parse_mode(&self) -> ParseMode {
        if self.strict {
            ParseMode::Strict
        } else {
            ParseMode::Lenient
        }
    }

    pub fn extract_config(&self) -> ExtractConfig {
        let lower = |xs: &[String]| xs.iter().map(|x| x.to_lowercase()).collect();
        ExtractConfig {
            subject_labels: lower(&self.subject_labels),
            object_labels: lower(&self.object_labels),
            passive_labels: lower(&self.passive_labels),
            verb_stoplist: self.verb_stoplist.clone(),
            noun_stoplist: self.noun_stoplist.clone(),
            negation_labels: lower(&self.negation_labels),
            conj_expansion: self.conj_expansion,
            strict_pos: self.strict_pos,
        }
    }

    pub fn filter_config(&self) -> FilterConfig {
        FilterConfig {
            min_count: self.min_count,
            min_pmi: self.min_pmi,
        }
    }

    pub fn step_config(&self) -> StepConfig {
        StepConfig {
            initial_step: self.mln_initial_step,
            max_iterations: self.mln_max_iterations,
            tolerance: self.mln_tolerance,
        }
    }

    pub fn sampler_config(&self) -> SamplerConfig {
        SamplerConfig {
            burn_in: self.gibbs_burn_in,
            samples: self.gibbs_samples,
            seed: self.seed,
            ..SamplerConfig::default()
        }
    }

    /// SHA-256 of the canonical TOML rendering, hex encoded.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_toml().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_default() {
        assert_eq!(
            PipelineConfig::from_toml("").unwrap(),
            PipelineConfig::default()
        );
    }

    #[test]
    fn toml_round_trip() {
        let c = PipelineConfig {
            min_pmi: Some(0.25),
            input_format: InputFormat::Sd,
            ..PipelineConfig::default()
        };
        assert_eq!(PipelineConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn named_field_errors() {
        let err = PipelineConfig::from_toml("smoothing_k = -1.0").unwrap_err();
        assert!(err.to_string().contains("smoothing_k"), "{err}");
        let err = PipelineConfig::from_toml("smoothing = 1.0").unwrap_err();
        assert!(err.to_string().contains("smoothing"), "{err}");
        let err = PipelineConfig::from_toml("space_weighting = \"tfidf\"").unwrap_err();
        assert!(matches!(err, KbError::Config { .. }));
    }

    #[test]
    fn hash_ignores_formatting() {
        let a = PipelineConfig::from_toml("seed = 42\n").unwrap();
        let b = PipelineConfig::from_toml("# comment\nseed=42").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        let c = PipelineConfig::from_toml("seed = 43").unwrap();
        assert_ne!(a.hash(), c.hash());
    }
}
