//! Run configuration: one experiment, its parameters, seed and thread count.

use serde::{Deserialize, Serialize};

use crate::verifier::{
    almost_additivity_check, cantor_scaling, capacity_sanity, cauchy_independence_check, energy_identity_check,
    good_index_trials, main_lemma_check, mainc_check, marcinkiewicz_trials, opnorm_divergence_ex1,
    self_similarity_audit, AlmostAdditivityParams, CantorScalingParams, CapacitySanityParams,
    CauchyIndependenceParams, EnergyIdentityParams, ExperimentResult, GoodIndexParams, MainLemmaParams, MaincParams,
    MarcinkiewiczParams, OpnormDivergenceParams, SelfSimilarityParams,
};
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub seed: u64,
    #[serde(default = "one")]
    pub threads: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
    pub experiment: ExperimentSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ExperimentSpec {
    MarcinkiewiczCheck(MarcinkiewiczParams),
    MainLemmaCheck(MainLemmaParams),
    GoodIndexSelection(GoodIndexParams),
    MaincCheck(MaincParams),
    AlmostAdditivityCheck(AlmostAdditivityParams),
    #[serde(rename = "opnorm_divergence_ex1")]
    OpnormDivergenceEx1(OpnormDivergenceParams),
    CauchyIndependenceCheck(CauchyIndependenceParams),
    EnergyIdentity(EnergyIdentityParams),
    CantorScaling(CantorScalingParams),
    SelfSimilarity(SelfSimilarityParams),
    CapacitySanity(CapacitySanityParams),
}

impl ExperimentSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentSpec::MarcinkiewiczCheck(_) => "marcinkiewicz_check",
            ExperimentSpec::MainLemmaCheck(_) => "main_lemma_check",
            ExperimentSpec::GoodIndexSelection(_) => "good_index_selection",
            ExperimentSpec::MaincCheck(_) => "mainc_check",
            ExperimentSpec::AlmostAdditivityCheck(_) => "almost_additivity_check",
            ExperimentSpec::OpnormDivergenceEx1(_) => "opnorm_divergence_ex1",
            ExperimentSpec::CauchyIndependenceCheck(_) => "cauchy_independence_check",
            ExperimentSpec::EnergyIdentity(_) => "energy_identity",
            ExperimentSpec::CantorScaling(_) => "cantor_scaling",
            ExperimentSpec::SelfSimilarity(_) => "self_similarity",
            ExperimentSpec::CapacitySanity(_) => "capacity_sanity",
        }
    }

    pub fn run(&self, seed: u64) -> Result<ExperimentResult> {
        match self {
            ExperimentSpec::MarcinkiewiczCheck(p) => marcinkiewicz_trials(p, seed),
            ExperimentSpec::MainLemmaCheck(p) => main_lemma_check(p, seed),
            ExperimentSpec::GoodIndexSelection(p) => good_index_trials(p, seed),
            ExperimentSpec::MaincCheck(p) => mainc_check(p, seed),
            ExperimentSpec::AlmostAdditivityCheck(p) => almost_additivity_check(p, seed),
            ExperimentSpec::OpnormDivergenceEx1(p) => opnorm_divergence_ex1(p, seed),
            ExperimentSpec::CauchyIndependenceCheck(p) => cauchy_independence_check(p, seed),
            ExperimentSpec::EnergyIdentity(p) => energy_identity_check(p, seed),
            ExperimentSpec::CantorScaling(p) => cantor_scaling(p, seed),
            ExperimentSpec::SelfSimilarity(p) => self_similarity_audit(p, seed),
            ExperimentSpec::CapacitySanity(p) => capacity_sanity(p, seed),
        }
    }
}

impl RunConfig {
    /// Parses and validates a config. Errors carry `line:column`.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("line {} column {}: {e}", e.line(), e.column())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.threads == 0 {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        Ok(())
    }

    /// Compact JSON of the resolved config.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Runs the experiment on a pool of `threads` workers.
    pub fn run(&self) -> Result<ExperimentResult> {
        self.validate()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(|| self.experiment.run(self.seed))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const OK: &str = r#"{
        "schema_version": 1,
        "seed": 7,
        "experiment": { "name": "self_similarity", "n_max": 2 }
    }"#;

    #[test]
    fn parses_and_runs() {
        let cfg = RunConfig::from_json(OK).unwrap();
        assert_eq!(cfg.threads, 1);
        assert_eq!(cfg.experiment.name(), "self_similarity");
        let r = cfg.run().unwrap();
        assert!(r.passed());
        assert_eq!(r.seed, 7);
    }

    #[test]
    fn missing_seed_is_rejected() {
        let e = RunConfig::from_json(r#"{"schema_version":1,"experiment":{"name":"self_similarity"}}"#).unwrap_err();
        assert!(e.to_string().contains("seed"), "{e}");
    }

    #[test]
    fn unknown_fields_are_rejected_with_position() {
        let e = RunConfig::from_json(
            "{\"schema_version\":1,\"seed\":1,\n\"experiment\":{\"name\":\"self_similarity\",\"n_mx\":2}}",
        )
        .unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        assert!(RunConfig::from_json(r#"{"schema_version":1,"seed":1,"colour":2,"experiment":{"name":"self_similarity"}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"schema_version":1,"seed":1,"experiment":{"name":"nope"}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"schema_version":2,"seed":1,"experiment":{"name":"self_similarity"}}"#).is_err());
    }

    #[test]
    fn every_registered_name_parses() {
        for (name, _) in crate::verifier::EXPERIMENTS {
            let extra = match *name {
                "mainc_check" | "cauchy_independence_check" | "capacity_sanity" => {
                    r#","family":{"family":"segment","length":1}"#
                }
                _ => "",
            };
            let text = format!(r#"{{"schema_version":1,"seed":1,"experiment":{{"name":"{name}"{extra}}}}}"#);
            let cfg = RunConfig::from_json(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(cfg.experiment.name(), *name);
        }
    }

    #[test]
    fn roundtrip() {
        let cfg = RunConfig::from_json(OK).unwrap();
        assert_eq!(RunConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }
}
