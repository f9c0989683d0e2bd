//! Run configuration: one TOML document with `problem`, `sampling`,
//! `network`, `optimizer` and `paths` tables. Unknown keys are errors.
//! Omitted fields fall back to the family defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use sclon_core::net::{Activation, Head, LayerKind, LayerSpec, NetworkArch};
use sclon_core::optim::{AdamConfig, LbfgsConfig};
use sclon_core::problem::{Forcing, KseSymbol};
use sclon_core::sampling::{GrfSpec, InputSampler, SquaredExponentialSampler};
use sclon_core::trainer::OptimizerChoice;
use sclon_core::{Family, PdeProblem};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub network: NetworkConfig,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub paths: PathsConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub family: String,
    pub nu: Option<f64>,
    pub mu: Option<f64>,
    pub re: Option<f64>,
    pub n: Option<usize>,
    pub dt: Option<f64>,
    /// Checked against `dt · q · r` when given.
    pub t_final: Option<f64>,
    pub q: Option<usize>,
    pub r: Option<usize>,
    pub corrector: Option<bool>,
    pub dealias: Option<bool>,
    /// `derived` or `printed`.
    pub kse_symbol: Option<String>,
    /// `none` or `kolmogorov`.
    pub forcing: Option<String>,
    pub forcing_wavenumber: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    pub seed: Option<u64>,
    pub p_train: Option<usize>,
    pub p_test: Option<usize>,
    /// Sample index of the first test draw; training draws start at 0.
    pub test_offset: Option<u64>,
    pub sigma: Option<f64>,
    pub tau: Option<f64>,
    pub gamma: Option<f64>,
    /// Squared-exponential length scale (diffusion–reaction forcing).
    pub length_scale: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    /// `desk` (the default) or `appendix`.
    pub preset: Option<String>,
    pub width: Option<usize>,
    pub depth: Option<usize>,
    pub kernel: Option<usize>,
    /// `dense` or `grid`.
    pub head: Option<String>,
    pub init_seed: Option<u64>,
    pub input_scale: Option<f64>,
    pub output_scale: Option<f64>,
    pub anchor_skip: Option<bool>,
    pub anchor_input: Option<bool>,
    pub coords_input: Option<bool>,
    /// Explicit layer list; replaces width/depth/kernel/head.
    pub layers: Option<Vec<LayerConfig>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerConfig {
    pub kind: String,
    pub width: usize,
    #[serde(default = "one")]
    pub kernel: usize,
    #[serde(default = "swish")]
    pub activation: String,
}

fn one() -> usize {
    1
}

fn swish() -> String {
    "swish".into()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    /// `lbfgs` (default) or `adam`.
    pub method: Option<String>,
    pub memory: Option<usize>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub max_trials: Option<usize>,
    pub max_iters: Option<usize>,
    pub plateau_window: Option<usize>,
    pub plateau_eps: Option<f64>,
    pub divergence_factor: Option<f64>,
    pub lr: Option<f64>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsConfig {
    pub out_dir: Option<PathBuf>,
}

/// Sampling settings after defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct Sampling {
    pub seed: u64,
    pub p_train: usize,
    pub p_test: usize,
    pub test_offset: u64,
    pub grf: Option<GrfSpec>,
    pub length_scale: Option<f64>,
}

/// Everything a run needs, with defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub problem: PdeProblem,
    pub sampling: Sampling,
    pub arch: NetworkArch,
    pub init_seed: u64,
    pub optimizer: OptimizerChoice,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| CliError::config(format!("{}: {}", path.display(), e.message)))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn out_dir(&self) -> PathBuf {
        self.paths.out_dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn resolve(&self) -> Result<Resolved> {
        let problem = self.problem.resolve()?;
        let sampling = self.sampling.resolve(&problem)?;
        let (arch, init_seed) = self.network.resolve(&problem)?;
        let optimizer = self.optimizer.resolve()?;
        Ok(Resolved { problem, sampling, arch, init_seed, optimizer })
    }
}

impl ProblemConfig {
    pub fn resolve(&self) -> Result<PdeProblem> {
        let family: Family = self.family.parse()?;
        let mut p = PdeProblem::defaults(family);
        if let Some(v) = self.nu {
            p.nu = v;
        }
        if let Some(v) = self.mu {
            p.mu = v;
        }
        if let Some(re) = self.re {
            if family != Family::Nse2d {
                return Err(CliError::config(format!("re only applies to nse2d, not {family}")));
            }
            p.re = Some(re);
            if self.nu.is_none() {
                p.nu = 1.0 / re;
            }
        }
        if let Some(v) = self.n {
            p.n = v;
        }
        if let Some(v) = self.dt {
            p.dt = v;
        }
        if let Some(v) = self.q {
            p.q = v;
        }
        if let Some(v) = self.r {
            p.r = v;
        }
        if let Some(v) = self.corrector {
            p.corrector = v;
        }
        if let Some(v) = self.dealias {
            p.dealias = v;
        }
        if let Some(s) = &self.kse_symbol {
            p.kse_symbol = match s.as_str() {
                "derived" => KseSymbol::Derived,
                "printed" => KseSymbol::Printed,
                _ => return Err(CliError::config(format!("unknown kse_symbol `{s}`"))),
            };
        }
        match (self.forcing.as_deref(), self.forcing_wavenumber) {
            (None, None) => {}
            (Some("none"), None) => p.forcing = Forcing::None,
            (Some("kolmogorov") | None, k) => p.forcing = Forcing::Kolmogorov { n: k.unwrap_or(1) },
            (Some("none"), Some(_)) => return Err(CliError::config("forcing_wavenumber needs kolmogorov forcing")),
            (Some(s), _) => return Err(CliError::config(format!("unknown forcing `{s}`"))),
        }
        p.validate()?;
        if let Some(t) = self.t_final {
            p.check_final_time(t)?;
        }
        Ok(p)
    }
}

impl SamplingConfig {
    pub fn resolve(&self, problem: &PdeProblem) -> Result<Sampling> {
        let seed = self.seed.unwrap_or(0);
        let grf = match GrfSpec::for_family(problem.family, problem.n, seed) {
            Some(mut g) => {
                g.sigma = self.sigma.unwrap_or(g.sigma);
                g.tau = self.tau.unwrap_or(g.tau);
                g.gamma = self.gamma.unwrap_or(g.gamma);
                g.validate()?;
                Some(g)
            }
            None if self.sigma.is_some() || self.tau.is_some() || self.gamma.is_some() => {
                return Err(CliError::config(format!("{} inputs are not GRF draws", problem.family)))
            }
            None => None,
        };
        let length_scale = match (problem.family, self.length_scale) {
            (Family::DiffusionReaction, l) => Some(l.unwrap_or(SquaredExponentialSampler::DEFAULT_LENGTH_SCALE)),
            (_, None) => None,
            (f, Some(_)) => return Err(CliError::config(format!("length_scale does not apply to {f}"))),
        };
        let p_train = self.p_train.unwrap_or(50);
        let p_test = self.p_test.unwrap_or(20);
        let test_offset = self.test_offset.unwrap_or(1_000_000);
        if p_train == 0 {
            return Err(CliError::config("p_train must be positive"));
        }
        if (p_train as u64) > test_offset {
            return Err(CliError::config("training draws would overlap the test draws (p_train > test_offset)"));
        }
        Ok(Sampling { seed, p_train, p_test, test_offset, grf, length_scale })
    }
}

impl Sampling {
    pub fn sampler(&self, problem: &PdeProblem) -> Result<InputSampler> {
        let s = match self.length_scale {
            Some(l) => InputSampler::with_length_scale(problem, self.seed, l)?,
            None => InputSampler::new(problem, self.seed)?,
        };
        Ok(match &self.grf {
            Some(g) => s.with_grf(g.clone())?,
            None => s,
        })
    }
}

/// Depth column of the architecture table.
pub fn appendix_depth(family: Family) -> usize {
    match family {
        Family::Burgers => 3,
        Family::DiffusionReaction | Family::Advection | Family::ConvectionDiffusionBL => 5,
        Family::Kse2d | Family::Nse2d => 1,
    }
}

/// Input and output scales of the desk preset.
fn desk_scales(family: Family) -> (f64, f64) {
    match family {
        Family::DiffusionReaction => (0.05, 1.0),
        Family::ConvectionDiffusionBL => (1.0, 1.0),
        _ => (1.0, 0.1),
    }
}

impl NetworkConfig {
    pub fn resolve(&self, problem: &PdeProblem) -> Result<(NetworkArch, u64)> {
        let family = problem.family;
        let appendix = match self.preset.as_deref() {
            None | Some("desk") => false,
            Some("appendix") => true,
            Some(s) => return Err(CliError::config(format!("unknown network preset `{s}`"))),
        };
        let (width, depth, head) = if appendix {
            (problem.n, appendix_depth(family), Head::Dense)
        } else {
            (16, 3, Head::Grid)
        };
        let width = self.width.unwrap_or(width);
        let depth = self.depth.unwrap_or(depth);
        let kernel = self.kernel.unwrap_or(5);
        let head = match &self.head {
            Some(h) => Head::from_name(h).ok_or_else(|| CliError::config(format!("unknown head `{h}`")))?,
            None => head,
        };
        let mut arch = NetworkArch::with_head(problem, width, depth, kernel, head);
        if let Some(layers) = &self.layers {
            if self.width.is_some() || self.depth.is_some() || self.kernel.is_some() || self.head.is_some() {
                return Err(CliError::config("give either `layers` or width/depth/kernel/head, not both"));
            }
            arch.layers = layers.iter().map(LayerConfig::resolve).collect::<Result<_>>()?;
            arch.head = match arch.layers.last().map(|l| l.kind) {
                Some(LayerKind::Dense) | None => Head::Dense,
                Some(_) => Head::Grid,
            };
        }
        let (input_scale, output_scale) = if appendix { (1.0, 1.0) } else { desk_scales(family) };
        arch.input_scale = self.input_scale.unwrap_or(input_scale);
        arch.output_scale = self.output_scale.unwrap_or(output_scale);
        arch.anchor_skip = self.anchor_skip.unwrap_or(true);
        arch.anchor_input = self.anchor_input.unwrap_or(!appendix);
        // Position-blind convolutions cannot place a fixed forcing pattern.
        let positional = family.is_legendre() || problem.forcing != Forcing::None;
        arch.coords_input = self.coords_input.unwrap_or(!appendix && positional);
        arch.layout()?;
        Ok((arch, self.init_seed.unwrap_or(0)))
    }
}

impl LayerConfig {
    fn resolve(&self) -> Result<LayerSpec> {
        Ok(LayerSpec {
            kind: LayerKind::from_name(&self.kind)
                .ok_or_else(|| CliError::config(format!("unknown layer kind `{}`", self.kind)))?,
            width: self.width,
            kernel: self.kernel,
            activation: Activation::from_name(&self.activation)
                .ok_or_else(|| CliError::config(format!("unknown activation `{}`", self.activation)))?,
        })
    }
}

impl OptimizerConfig {
    pub fn resolve(&self) -> Result<OptimizerChoice> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(CliError::config(format!("optimizer {name} must be positive, got {v}")))
            }
        };
        match self.method.as_deref().unwrap_or("lbfgs") {
            "lbfgs" => {
                if self.lr.is_some() || self.beta1.is_some() || self.beta2.is_some() {
                    return Err(CliError::config("lr/beta1/beta2 only apply to adam"));
                }
                let d = LbfgsConfig::default();
                let cfg = LbfgsConfig {
                    memory: self.memory.unwrap_or(d.memory),
                    c1: positive("c1", self.c1.unwrap_or(d.c1))?,
                    c2: positive("c2", self.c2.unwrap_or(d.c2))?,
                    max_trials: self.max_trials.unwrap_or(d.max_trials),
                    max_iters: self.max_iters.unwrap_or(d.max_iters),
                    plateau_window: self.plateau_window.unwrap_or(d.plateau_window),
                    plateau_eps: self.plateau_eps.unwrap_or(d.plateau_eps),
                    divergence_factor: positive("divergence_factor", self.divergence_factor.unwrap_or(d.divergence_factor))?,
                };
                if !(cfg.c1 < cfg.c2 && cfg.c2 < 1.0) {
                    return Err(CliError::config(format!("Wolfe constants need 0 < c1 < c2 < 1, got {} and {}", cfg.c1, cfg.c2)));
                }
                if cfg.memory == 0 || cfg.max_trials == 0 {
                    return Err(CliError::config("memory and max_trials must be positive"));
                }
                Ok(OptimizerChoice::Lbfgs(cfg))
            }
            "adam" => {
                if self.memory.is_some() || self.c1.is_some() || self.c2.is_some() || self.max_trials.is_some() {
                    return Err(CliError::config("memory/c1/c2/max_trials only apply to lbfgs"));
                }
                let d = AdamConfig::default();
                Ok(OptimizerChoice::Adam(AdamConfig {
                    lr: positive("lr", self.lr.unwrap_or(d.lr))?,
                    beta1: self.beta1.unwrap_or(d.beta1),
                    beta2: self.beta2.unwrap_or(d.beta2),
                    max_iters: self.max_iters.unwrap_or(d.max_iters),
                    plateau_window: self.plateau_window.unwrap_or(d.plateau_window),
                    plateau_eps: self.plateau_eps.unwrap_or(d.plateau_eps),
                    divergence_factor: positive("divergence_factor", self.divergence_factor.unwrap_or(d.divergence_factor))?,
                    ..d
                }))
            }
            m => Err(CliError::config(format!("unknown optimizer `{m}`"))),
        }
    }
}

impl Resolved {
    /// SHA-256 over the resolved settings (paths excluded). Two configs that
    /// differ only in omitted-versus-explicit defaults hash the same.
    pub fn hash(&self) -> String {
        let text = format!("{:?}|{:?}|{:?}|{}|{:?}", self.problem, self.sampling, self.arch, self.init_seed, self.optimizer);
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = RunConfig::from_toml("[problem]\nfamily = \"burgers\"\n").unwrap();
        let r = c.resolve().unwrap();
        assert_eq!(r.problem, PdeProblem::defaults(Family::Burgers));
        assert_eq!(r.sampling.p_train, 50);
    }

    #[test]
    fn explicit_defaults_hash_like_omitted_ones() {
        let a = RunConfig::from_toml("[problem]\nfamily = \"burgers\"\n").unwrap();
        let b = RunConfig::from_toml("[problem]\nfamily = \"burgers\"\nnu = 0.5\ndt = 0.01\n[optimizer]\nmemory = 10\n").unwrap();
        assert_eq!(a.resolve().unwrap().hash(), b.resolve().unwrap().hash());
        let c = RunConfig::from_toml("[problem]\nfamily = \"burgers\"\nnu = 0.25\n").unwrap();
        assert_ne!(a.resolve().unwrap().hash(), c.resolve().unwrap().hash());
    }
}
