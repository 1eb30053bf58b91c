//! TOML experiment configs: ensemble descriptions, simulation scenarios,
//! and optimization problems.
//!
//! Probabilities and rates accept either plain numbers or fraction strings
//! (`"2/3"`), since published distributions are quoted both ways.

use std::fmt;
use std::path::Path;

use anyhow::{bail, Context, Result};
use csa_core::codes::LinearCode;
use csa_core::ensemble::{normalized_pmf, EnsembleStats, ExplicitEnsemble, RandomEnsemble};
use csa_core::optim::{Candidates, DeParams, OptProblem};
use csa_core::sim::SimEnsemble;
use serde::Deserialize;

/// A parsed experiment file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    /// Default RNG seed for this experiment (flag `--seed` wins).
    pub seed: Option<u64>,
    /// The code ensemble (analyze, threshold, simulate).
    pub ensemble: Option<EnsembleSection>,
    /// Threshold-computation knobs.
    pub threshold: Option<ThresholdSection>,
    /// Monte Carlo scenario (simulate).
    pub sim: Option<SimSection>,
    /// Optimization problem (optimize, verify).
    pub problem: Option<ProblemSection>,
    /// Distribution to re-score (verify).
    pub verify: Option<VerifySection>,
}

/// A probability/rate that may be written as a number or as `"p/q"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Rational {
    /// Plain floating-point literal.
    Num(f64),
    /// Fraction string such as `"2/3"`.
    Text(String),
}

impl Rational {
    /// Resolves to a float, parsing `"p/q"` when needed.
    pub fn value(&self) -> Result<f64> {
        match self {
            Rational::Num(x) => Ok(*x),
            Rational::Text(s) => {
                let parse = |t: &str| -> Result<f64> {
                    t.trim()
                        .parse::<f64>()
                        .with_context(|| format!("bad number `{t}` in `{s}`"))
                };
                match s.split_once('/') {
                    Some((num, den)) => {
                        let d = parse(den)?;
                        if d == 0.0 {
                            bail!("zero denominator in `{s}`");
                        }
                        Ok(parse(num)? / d)
                    }
                    None => parse(s),
                }
            }
        }
    }
}

/// How component codes are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Fixed generator matrices listed in the config.
    Explicit,
    /// Uniform random qualifying generator of the listed length.
    Random,
}

/// One `(code or length, probability)` row of an ensemble.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntrySection {
    /// Generator rows as comma-separated bit strings (explicit mode).
    pub matrix: Option<String>,
    /// Code length (random mode).
    pub length: Option<usize>,
    /// Selection probability.
    pub prob: Rational,
}

/// `[ensemble]` — a distribution over component codes.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    /// Label used in artifact records.
    pub id: Option<String>,
    /// Segments per burst.
    pub k: usize,
    /// Explicit matrices or the random-code model.
    pub mode: Mode,
    /// The component rows.
    pub entries: Vec<EntrySection>,
}

/// `[threshold]`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSection {
    /// Bisection tolerance (flag `--tol` wins).
    pub tol: Option<f64>,
}

/// `[sim]` — a throughput sweep.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    /// Slots per frame.
    pub n_slots: usize,
    /// Frames per load point.
    pub trials: usize,
    /// Explicit offered-load points.
    pub g_grid: Option<Vec<f64>>,
    /// Evenly spaced load range (alternative to `g_grid`).
    pub g_range: Option<RangeSection>,
}

/// Inclusive arithmetic progression of offered loads.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSection {
    /// First load.
    pub start: f64,
    /// Last load (included up to rounding).
    pub stop: f64,
    /// Increment.
    pub step: f64,
}

/// `[problem]` — what the optimizer searches over.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    /// Label used in artifact records.
    pub id: Option<String>,
    /// Segments per burst.
    pub k: usize,
    /// Candidate flavor.
    pub mode: Mode,
    /// Explicit candidate matrices (explicit mode).
    pub candidates: Option<Vec<String>>,
    /// Candidate lengths (random mode).
    pub lengths: Option<Vec<usize>>,
    /// Required overall rate `k / n̄`.
    pub rate: Rational,
    /// Floor on per-candidate local rates (default 1/6).
    pub min_local_rate: Option<Rational>,
    /// Search hyperparameters.
    pub de: Option<DeSection>,
}

/// `[problem.de]` — differential-evolution hyperparameters.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeSection {
    /// Population size (default 40).
    pub population: Option<usize>,
    /// Generations (default 500).
    pub generations: Option<usize>,
    /// Differential weight F (default 0.8).
    pub weight: Option<f64>,
    /// Crossover probability CR (default 0.9).
    pub crossover: Option<f64>,
    /// Seed (flag `--seed`, then `seed` key, then this, then 3162).
    pub seed: Option<u64>,
}

/// `[verify]`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    /// Distribution over the problem candidates to re-score.
    pub pmf: Vec<Rational>,
}

/// A fully built ensemble of either flavor, plus its label.
pub enum AnyEnsemble {
    /// Fixed generator matrices.
    Explicit(ExplicitEnsemble),
    /// Uniform random-code model.
    Random(RandomEnsemble),
}

impl AnyEnsemble {
    /// Segments per burst.
    pub fn k(&self) -> usize {
        match self {
            AnyEnsemble::Explicit(e) => e.k(),
            AnyEnsemble::Random(e) => e.k(),
        }
    }

    /// Statistics for density evolution.
    pub fn stats(&self) -> Result<EnsembleStats> {
        Ok(match self {
            AnyEnsemble::Explicit(e) => e.stats(),
            AnyEnsemble::Random(e) => e.stats()?,
        })
    }

    /// Borrowed view for the frame simulator.
    pub fn as_sim(&self) -> SimEnsemble<'_> {
        match self {
            AnyEnsemble::Explicit(e) => SimEnsemble::Explicit(e),
            AnyEnsemble::Random(e) => SimEnsemble::Random(e),
        }
    }
}

impl fmt::Debug for AnyEnsemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnyEnsemble::Explicit(e) => write!(f, "Explicit(k={}, {} codes)", e.k(), e.codes().len()),
            AnyEnsemble::Random(e) => write!(f, "Random(k={}, lengths {:?})", e.k(), e.lengths()),
        }
    }
}

/// Reads and parses a config file, with file/line context on errors.
pub fn load(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let cfg: ConfigFile = toml::from_str(&text)
        .with_context(|| format!("cannot parse config {}", path.display()))?;
    Ok(cfg)
}

impl ConfigFile {
    /// The config-level seed, if any.
    pub fn seed(&self) -> Option<u64> {
        self.seed
            .or_else(|| self.problem.as_ref().and_then(|p| p.de.as_ref()).and_then(|d| d.seed))
    }

    /// Builds the `[ensemble]` section, which must be present.
    pub fn build_ensemble(&self) -> Result<AnyEnsemble> {
        let section = self
            .ensemble
            .as_ref()
            .context("config has no [ensemble] section")?;
        section.build()
    }

    /// Builds the `[problem]` section, which must be present.
    pub fn build_problem(&self) -> Result<OptProblem> {
        let section = self
            .problem
            .as_ref()
            .context("config has no [problem] section")?;
        section.build()
    }
}

impl EnsembleSection {
    /// Label for artifact records.
    pub fn label(&self) -> &str {
        self.id.as_deref().unwrap_or("ensemble")
    }

    /// Validates and assembles the ensemble.
    pub fn build(&self) -> Result<AnyEnsemble> {
        if self.entries.is_empty() {
            bail!("[ensemble] lists no entries");
        }
        let mut probs = Vec::with_capacity(self.entries.len());
        for e in &self.entries {
            probs.push(e.prob.value()?);
        }
        let pmf = normalized_pmf(&probs).context("[ensemble] probabilities")?;
        match self.mode {
            Mode::Explicit => {
                let mut codes = Vec::with_capacity(self.entries.len());
                for (i, e) in self.entries.iter().enumerate() {
                    let text = e.matrix.as_deref().with_context(|| {
                        format!("entry {i}: explicit mode requires `matrix`")
                    })?;
                    if e.length.is_some() {
                        bail!("entry {i}: `length` is only for random mode");
                    }
                    let code: LinearCode = text
                        .parse()
                        .with_context(|| format!("entry {i}: matrix `{text}`"))?;
                    if code.k() != self.k {
                        bail!(
                            "entry {i}: matrix has k = {}, ensemble declares k = {}",
                            code.k(),
                            self.k
                        );
                    }
                    codes.push(code);
                }
                Ok(AnyEnsemble::Explicit(ExplicitEnsemble::new(codes, pmf)?))
            }
            Mode::Random => {
                let mut lengths = Vec::with_capacity(self.entries.len());
                for (i, e) in self.entries.iter().enumerate() {
                    if e.matrix.is_some() {
                        bail!("entry {i}: `matrix` is only for explicit mode");
                    }
                    lengths.push(
                        e.length
                            .with_context(|| format!("entry {i}: random mode requires `length`"))?,
                    );
                }
                Ok(AnyEnsemble::Random(RandomEnsemble::new(
                    self.k, lengths, pmf,
                )?))
            }
        }
    }
}

impl SimSection {
    /// The offered-load grid, from either `g_grid` or `g_range`.
    pub fn load_grid(&self) -> Result<Vec<f64>> {
        match (&self.g_grid, &self.g_range) {
            (Some(grid), None) => {
                if grid.is_empty() {
                    bail!("[sim] g_grid is empty");
                }
                Ok(grid.clone())
            }
            (None, Some(r)) => {
                if !(r.step > 0.0) || !r.start.is_finite() || r.stop < r.start {
                    bail!("[sim] g_range needs start <= stop and step > 0");
                }
                let count = ((r.stop - r.start) / r.step + 1.0 + 1e-9).floor() as usize;
                Ok((0..count).map(|i| r.start + i as f64 * r.step).collect())
            }
            (Some(_), Some(_)) => bail!("[sim] give g_grid or g_range, not both"),
            (None, None) => bail!("[sim] needs g_grid or g_range"),
        }
    }
}

impl ProblemSection {
    /// Label for artifact records.
    pub fn label(&self) -> &str {
        self.id.as_deref().unwrap_or("problem")
    }

    /// Validates and assembles the optimization problem (seed is resolved
    /// by the caller from flag/config precedence).
    pub fn build(&self) -> Result<OptProblem> {
        let candidates = match self.mode {
            Mode::Explicit => {
                let texts = self
                    .candidates
                    .as_ref()
                    .context("[problem] explicit mode requires `candidates`")?;
                if self.lengths.is_some() {
                    bail!("[problem] `lengths` is only for random mode");
                }
                let mut codes = Vec::with_capacity(texts.len());
                for (i, text) in texts.iter().enumerate() {
                    let code: LinearCode = text
                        .parse()
                        .with_context(|| format!("candidate {i}: matrix `{text}`"))?;
                    if code.k() != self.k {
                        bail!(
                            "candidate {i}: matrix has k = {}, problem declares k = {}",
                            code.k(),
                            self.k
                        );
                    }
                    codes.push(code);
                }
                Candidates::Explicit(codes)
            }
            Mode::Random => {
                if self.candidates.is_some() {
                    bail!("[problem] `candidates` is only for explicit mode");
                }
                Candidates::RandomLengths {
                    k: self.k,
                    lengths: self
                        .lengths
                        .clone()
                        .context("[problem] random mode requires `lengths`")?,
                }
            }
        };
        let rate = self.rate.value()?;
        let mut problem = OptProblem::new(candidates, rate)?;
        if let Some(floor) = &self.min_local_rate {
            problem.min_local_rate = floor.value()?;
            problem.validate()?;
        }
        if let Some(de) = &self.de {
            let defaults = DeParams::default();
            problem = problem.with_de(DeParams {
                population: de.population.unwrap_or(defaults.population),
                generations: de.generations.unwrap_or(defaults.generations),
                weight: de.weight.unwrap_or(defaults.weight),
                crossover: de.crossover.unwrap_or(defaults.crossover),
                seed: de.seed.unwrap_or(defaults.seed),
            });
            problem.validate()?;
        }
        Ok(problem)
    }
}

impl VerifySection {
    /// The distribution to re-score.
    pub fn pmf(&self) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.pmf.len());
        for p in &self.pmf {
            out.push(p.value()?);
        }
        Ok(normalized_pmf(&out).context("[verify] pmf")?)
    }
}
