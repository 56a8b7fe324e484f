//! Run configuration: a TOML file with sections for the scenario, solver,
//! sampler, ensemble and output, plus command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::experiment::{Scenario, TrueConductivity};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    /// "example1", "example2" or "constant".
    #[serde(default = "default_scenario_name")]
    pub name: String,
    /// Conductivity value for the "constant" scenario.
    pub k_value: Option<f64>,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_snr")]
    pub snr: f64,
}

fn default_scenario_name() -> String {
    "example1".into()
}

fn default_n() -> usize {
    10
}

fn default_snr() -> f64 {
    1e3
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_nr")]
    pub nr: usize,
    #[serde(default = "default_nt")]
    pub nt: usize,
}

fn default_nr() -> usize {
    crate::experiment::NR_DEFAULT
}

fn default_nt() -> usize {
    crate::experiment::NT_DEFAULT
}

impl Default for SolverSection {
    fn default() -> Self {
        Self { nr: default_nr(), nt: default_nt() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSection {
    #[serde(default = "default_steps")]
    pub steps: u64,
    /// Defaults to steps/5.
    pub burn_in: Option<u64>,
    #[serde(default = "default_thinning")]
    pub thinning: u64,
    /// Mandatory (here or via --seed); there is no wall-clock seeding.
    pub seed: Option<u64>,
}

fn default_steps() -> u64 {
    20_000
}

fn default_thinning() -> u64 {
    10
}

impl Default for SamplerSection {
    fn default() -> Self {
        Self {
            steps: default_steps(),
            burn_in: None,
            thinning: default_thinning(),
            seed: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagateSection {
    #[serde(default = "default_ensemble")]
    pub ensemble_size: usize,
    #[serde(default = "default_snr_list")]
    pub snr_list: Vec<f64>,
}

fn default_ensemble() -> usize {
    100
}

fn default_snr_list() -> Vec<f64> {
    vec![10.0, 1e3]
}

impl Default for PropagateSection {
    fn default() -> Self {
        Self {
            ensemble_size: default_ensemble(),
            snr_list: default_snr_list(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub sampler: SamplerSection,
    #[serde(default)]
    pub propagate: PropagateSection,
    #[serde(default)]
    pub output: OutputSection,
    /// Disables observation noise (SNR = ∞) in data generation.
    #[serde(default)]
    pub no_noise: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioSection {
                name: default_scenario_name(),
                k_value: None,
                n: default_n(),
                snr: default_snr(),
            },
            solver: SolverSection::default(),
            sampler: SamplerSection::default(),
            propagate: PropagateSection::default(),
            output: OutputSection::default(),
            no_noise: false,
        }
    }
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub steps: Option<u64>,
    pub snr: Option<f64>,
    pub out: Option<PathBuf>,
    pub no_noise: bool,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.span().map(|s| text[..s.start].lines().count()).unwrap_or(0),
            message: e.message().to_string(),
        })
    }

    pub fn apply(&mut self, ov: &Overrides) {
        if let Some(seed) = ov.seed {
            self.sampler.seed = Some(seed);
        }
        if let Some(steps) = ov.steps {
            self.sampler.steps = steps;
        }
        if let Some(snr) = ov.snr {
            self.scenario.snr = snr;
        }
        if let Some(out) = &ov.out {
            self.output.dir = Some(out.clone());
        }
        if ov.no_noise {
            self.no_noise = true;
        }
    }

    pub fn seed(&self) -> Result<u64> {
        self.sampler.seed.ok_or_else(|| {
            Error::InvalidInput("a seed is mandatory: set sampler.seed or pass --seed".into())
        })
    }

    pub fn burn_in(&self) -> u64 {
        self.sampler.burn_in.unwrap_or(self.sampler.steps / 5)
    }

    pub fn out_dir(&self) -> Result<&Path> {
        self.output
            .dir
            .as_deref()
            .ok_or_else(|| Error::InvalidInput("no output directory: set output.dir or pass --out".into()))
    }

    /// Builds the scenario with solver overrides applied.
    pub fn scenario(&self) -> Result<Scenario> {
        let kind = match self.scenario.name.as_str() {
            "example1" => TrueConductivity::Example1,
            "example2" => TrueConductivity::Example2,
            "constant" => {
                let k = self.scenario.k_value.ok_or_else(|| {
                    Error::InvalidInput("scenario.k_value is required for the constant scenario".into())
                })?;
                TrueConductivity::Constant(k)
            }
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown scenario '{other}' (expected example1, example2 or constant)"
                )))
            }
        };
        let mut scenario = match kind {
            TrueConductivity::Example1 => Scenario::example1(),
            TrueConductivity::Example2 => Scenario::example2(),
            TrueConductivity::Constant(k) => Scenario::constant(k),
        };
        scenario.n = self.scenario.n;
        scenario.snr = self.scenario.snr;
        scenario.pde.nr = self.solver.nr;
        scenario.pde.nt = self.solver.nt;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

/// Hash of everything that defines a dataset's provenance; embedded in the
/// dataset file and verified before inference.
pub fn scenario_hash(scenario: &Scenario) -> String {
    let canonical = format!(
        "kind={};n={};snr={};nr={};nt={};alpha={};rho={};cp={};h={};radius={};r0={};t0={};te={};beta={};t_f={};k0={}",
        scenario.kind.label(),
        scenario.n,
        scenario.snr,
        scenario.pde.nr,
        scenario.pde.nt,
        scenario.pde.alpha,
        scenario.pde.rho,
        scenario.pde.cp,
        scenario.pde.h,
        scenario.pde.radius,
        scenario.constraints.r0,
        scenario.pde.t0,
        scenario.pde.te,
        scenario.pde.beta,
        scenario.pde.t_f,
        scenario.constraints.k0,
    );
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    hex_string(&hasher.finalize())
}

pub fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
