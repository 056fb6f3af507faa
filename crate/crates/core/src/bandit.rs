//! Gaussian-linear Thompson Sampling over the four message actions.
//!
//! Each action keeps an independent posterior `N(theta; mu, Sigma)` over the
//! weights of a linear reward model `r ~ N(theta^T v, noise_var)`. Selection
//! samples one `theta` per action and plays the argmax of `theta^T v`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::env::{Action, EnvState};
use crate::error::{Error, Result};
use crate::rng::SimRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TsConfig {
    pub feature_map: FeatureMap,
    /// Every prior mean entry.
    pub prior_mean_scale: f64,
    /// Prior covariance is this times the identity.
    pub prior_cov_scale: f64,
    pub reward_noise_var: f64,
}

impl Default for TsConfig {
    fn default() -> Self {
        Self {
            feature_map: FeatureMap::Standard,
            prior_mean_scale: 0.0,
            prior_cov_scale: 100.0,
            reward_noise_var: 25.0 * 25.0,
        }
    }
}

impl TsConfig {
    pub fn feature_dim(&self) -> usize {
        self.feature_map.dim()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.prior_cov_scale > 0.0 && self.prior_cov_scale.is_finite()) {
            return Err(Error::param("prior_cov_scale", format!("{} must be > 0", self.prior_cov_scale)));
        }
        if !(self.reward_noise_var > 0.0 && self.reward_noise_var.is_finite()) {
            return Err(Error::param("reward_noise_var", format!("{} must be > 0", self.reward_noise_var)));
        }
        if !self.prior_mean_scale.is_finite() {
            return Err(Error::param("prior_mean_scale", "must be finite"));
        }
        Ok(())
    }
}

/// How the agent-observable state becomes a feature vector.
///
/// The true context and the walk state are hidden from the agent, so only
/// `p`, `h` and `d` are available.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMap {
    /// `[1, p, h, d]`.
    #[default]
    Standard,
}

impl FeatureMap {
    pub fn dim(self) -> usize {
        match self {
            FeatureMap::Standard => 4,
        }
    }

    pub fn apply(self, obs: &EnvState) -> FeatureVector {
        match self {
            FeatureMap::Standard => FeatureVector(DVector::from_vec(vec![1.0, obs.p, obs.h, obs.d])),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(pub DVector<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("feature vector has non-finite entries".into()));
        }
        Ok(Self(DVector::from_vec(values)))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }
}

pub fn featurize(obs: &EnvState) -> FeatureVector {
    FeatureMap::Standard.apply(obs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArmPosterior {
    pub mu: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl ArmPosterior {
    pub fn prior(cfg: &TsConfig) -> Self {
        let dim = cfg.feature_dim();
        Self {
            mu: DVector::from_element(dim, cfg.prior_mean_scale),
            cov: DMatrix::identity(dim, dim) * cfg.prior_cov_scale,
        }
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    fn cholesky(&self) -> Result<Cholesky<f64, Dyn>> {
        Cholesky::new(self.cov.clone())
            .ok_or_else(|| Error::Numerical("posterior covariance is not positive definite".into()))
    }

    /// One draw of the weight vector.
    pub fn sample(&self, rng: &mut SimRng) -> Result<DVector<f64>> {
        let chol = self.cholesky()?;
        let z = DVector::from_iterator(self.dim(), (0..self.dim()).map(|_| StandardNormal.sample(rng)));
        Ok(&self.mu + chol.l() * z)
    }

    pub fn is_positive_definite(&self) -> bool {
        let sym = (&self.cov - self.cov.transpose()).abs().max() <= 1e-9 * self.cov.abs().max().max(1.0);
        sym && Cholesky::new(self.cov.clone()).is_some()
    }
}

fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::Numerical(format!("feature dimension mismatch: expected {expected}, got {actual}")))
    }
}

/// Conjugate update of one arm after observing reward `r` at features `v`.
///
/// `Sigma' = s (v v^T + s Sigma^-1)^-1` and
/// `mu' = Sigma' (r v / s + Sigma^-1 mu)` with `s` the reward noise variance.
pub fn update_posterior(post: &ArmPosterior, v: &FeatureVector, r: f64, noise_var: f64) -> Result<ArmPosterior> {
    if !(noise_var > 0.0 && noise_var.is_finite()) {
        return Err(Error::param("reward_noise_var", format!("{noise_var} must be > 0")));
    }
    if !r.is_finite() {
        return Err(Error::Numerical(format!("reward {r} is not finite")));
    }
    check_dim(post.dim(), v.len())?;
    let v = &v.0;
    let precision = post.cholesky()?.inverse();
    let gram = v * v.transpose() + &precision * noise_var;
    let gram_chol = Cholesky::new(gram)
        .ok_or_else(|| Error::Numerical("updated precision is not positive definite".into()))?;
    let mut cov = gram_chol.inverse() * noise_var;
    cov = (&cov + cov.transpose()) * 0.5;
    let mu = &cov * (v * (r / noise_var) + &precision * &post.mu);
    Ok(ArmPosterior { mu, cov })
}

/// Samples one weight vector per arm and returns the arm with the largest
/// predicted reward. Ties go to the lowest action index.
pub fn select_action(posteriors: &[ArmPosterior], v: &FeatureVector, rng: &mut SimRng) -> Result<Action> {
    let scores = sample_scores(posteriors, v, rng)?;
    Ok(argmax_action(&scores))
}

pub fn sample_scores(posteriors: &[ArmPosterior], v: &FeatureVector, rng: &mut SimRng) -> Result<Vec<f64>> {
    if posteriors.len() != Action::COUNT {
        return Err(Error::Config(format!("expected {} arms, got {}", Action::COUNT, posteriors.len())));
    }
    posteriors
        .iter()
        .map(|post| {
            check_dim(post.dim(), v.len())?;
            Ok(post.sample(rng)?.dot(&v.0))
        })
        .collect()
}

pub fn argmax_action(scores: &[f64]) -> Action {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    Action::ALL[best]
}

/// The four per-action posteriors of one agent.
#[derive(Debug, Clone, PartialEq)]
pub struct ThompsonSampler {
    pub config: TsConfig,
    pub arms: Vec<ArmPosterior>,
    pub updates: usize,
}

impl ThompsonSampler {
    pub fn new(config: TsConfig) -> Result<Self> {
        config.validate()?;
        let arms = (0..Action::COUNT).map(|_| ArmPosterior::prior(&config)).collect();
        Ok(Self { config, arms, updates: 0 })
    }

    pub fn featurize(&self, obs: &EnvState) -> FeatureVector {
        self.config.feature_map.apply(obs)
    }

    pub fn select(&self, v: &FeatureVector, rng: &mut SimRng) -> Result<Action> {
        select_action(&self.arms, v, rng)
    }

    pub fn update(&mut self, action: Action, v: &FeatureVector, reward: f64) -> Result<()> {
        let arm = &mut self.arms[action.index()];
        *arm = update_posterior(arm, v, reward, self.config.reward_noise_var)?;
        self.updates += 1;
        Ok(())
    }

    pub fn snapshot(&self) -> PosteriorSnapshot {
        PosteriorSnapshot {
            reward_noise_var: self.config.reward_noise_var,
            arms: self.arms.iter().map(ArmSnapshot::from).collect(),
        }
    }

    pub fn restore(config: TsConfig, snapshot: &PosteriorSnapshot) -> Result<Self> {
        let mut sampler = Self::new(config)?;
        if snapshot.arms.len() != Action::COUNT {
            return Err(Error::Config(format!("snapshot has {} arms, expected {}", snapshot.arms.len(), Action::COUNT)));
        }
        sampler.arms = snapshot
            .arms
            .iter()
            .map(|a| a.to_posterior(sampler.config.feature_dim()))
            .collect::<Result<_>>()?;
        Ok(sampler)
    }
}

/// JSON shape of a saved posterior: `mu` per arm and `cov` flattened
/// row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSnapshot {
    pub reward_noise_var: f64,
    pub arms: Vec<ArmSnapshot>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmSnapshot {
    pub mu: Vec<f64>,
    pub cov: Vec<f64>,
}

impl From<&ArmPosterior> for ArmSnapshot {
    fn from(p: &ArmPosterior) -> Self {
        let dim = p.dim();
        let cov = (0..dim).flat_map(|i| (0..dim).map(move |j| (i, j))).map(|(i, j)| p.cov[(i, j)]).collect();
        Self { mu: p.mu.as_slice().to_vec(), cov }
    }
}

impl ArmSnapshot {
    pub fn to_posterior(&self, dim: usize) -> Result<ArmPosterior> {
        if self.mu.len() != dim || self.cov.len() != dim * dim {
            return Err(Error::Config(format!(
                "snapshot arm has mu length {} and cov length {}, expected {dim} and {}",
                self.mu.len(),
                self.cov.len(),
                dim * dim
            )));
        }
        let post = ArmPosterior {
            mu: DVector::from_column_slice(&self.mu),
            cov: DMatrix::from_row_slice(dim, dim, &self.cov),
        };
        if !post.is_positive_definite() {
            return Err(Error::Numerical("snapshot covariance is not symmetric positive definite".into()));
        }
        Ok(post)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::EnvParams;
    use crate::rng::seeded;
    use approx::assert_abs_diff_eq;

    fn obs(p: f64, h: f64, d: f64) -> EnvState {
        let mut s = EnvState::reset(&mut seeded(0), &EnvParams::default()).unwrap();
        s.p = p;
        s.h = h;
        s.d = d;
        s
    }

    #[test]
    fn featurize_examples() {
        assert_eq!(featurize(&obs(0.5, 0.0, 0.0)).as_slice(), &[1.0, 0.5, 0.0, 0.0]);
        assert_eq!(featurize(&obs(0.0, 0.0, 0.0)).as_slice(), &[1.0, 0.0, 0.0, 0.0]);
        let cfg = TsConfig::default();
        assert_eq!(featurize(&obs(0.3, 0.2, 0.9)).len(), cfg.feature_dim());
    }

    #[test]
    fn scalar_update_matches_closed_form() {
        let cfg = TsConfig { feature_map: FeatureMap::Standard, ..Default::default() };
        let prior = ArmPosterior {
            mu: DVector::from_vec(vec![0.0]),
            cov: DMatrix::from_element(1, 1, 100.0),
        };
        let post = update_posterior(&prior, &FeatureVector::new(vec![1.0]).unwrap(), 50.0, cfg.reward_noise_var).unwrap();
        assert_abs_diff_eq!(post.cov[(0, 0)], 86.206_896_551_724_14, epsilon = 1e-10);
        assert_abs_diff_eq!(post.mu[0], 6.896_551_724_137_93, epsilon = 1e-10);
    }

    #[test]
    fn zero_reward_keeps_zero_mean_and_shrinks() {
        let cfg = TsConfig::default();
        let prior = ArmPosterior::prior(&cfg);
        let v = featurize(&obs(0.7, 0.2, 0.1));
        let post = update_posterior(&prior, &v, 0.0, cfg.reward_noise_var).unwrap();
        assert!(post.mu.iter().all(|&m| m == 0.0));
        assert!(post.cov.trace() < prior.cov.trace());
        assert!(post.is_positive_definite());
    }

    #[test]
    fn update_rejects_bad_inputs() {
        let cfg = TsConfig::default();
        let prior = ArmPosterior::prior(&cfg);
        let v = featurize(&obs(0.7, 0.2, 0.1));
        assert!(update_posterior(&prior, &v, 1.0, 0.0).is_err());
        assert!(update_posterior(&prior, &FeatureVector::new(vec![1.0]).unwrap(), 1.0, 1.0).is_err());
        let singular = ArmPosterior { mu: DVector::zeros(4), cov: DMatrix::zeros(4, 4) };
        assert!(matches!(update_posterior(&singular, &v, 1.0, 1.0), Err(Error::Numerical(_))));
    }

    #[test]
    fn non_pd_covariance_surfaces_on_select() {
        let cfg = TsConfig::default();
        let mut arms: Vec<_> = (0..4).map(|_| ArmPosterior::prior(&cfg)).collect();
        arms[1].cov[(0, 0)] = -1.0;
        let v = featurize(&obs(0.5, 0.0, 0.0));
        assert!(matches!(select_action(&arms, &v, &mut seeded(0)), Err(Error::Numerical(_))));
    }

    #[test]
    fn degenerate_posteriors_pick_best_mean() {
        let mut arms: Vec<_> = (0..4)
            .map(|i| ArmPosterior {
                mu: DVector::from_element(4, i as f64 * 0.1),
                cov: DMatrix::identity(4, 4) * 1e-12,
            })
            .collect();
        arms[2].mu = DVector::from_element(4, 5.0);
        let v = featurize(&obs(0.5, 0.1, 0.1));
        let mut rng = seeded(8);
        for _ in 0..1000 {
            assert_eq!(select_action(&arms, &v, &mut rng).unwrap(), Action::TAILORED_0);
        }
    }

    #[test]
    fn identical_posteriors_select_uniformly() {
        let cfg = TsConfig::default();
        let arms: Vec<_> = (0..4).map(|_| ArmPosterior::prior(&cfg)).collect();
        let v = featurize(&obs(0.5, 0.2, 0.3));
        let mut rng = seeded(77);
        let n = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            counts[select_action(&arms, &v, &mut rng).unwrap().index()] += 1;
        }
        // 4 binomial standard errors around 1/4
        let tol = 4.0 * (0.25 * 0.75 / n as f64).sqrt();
        for c in counts {
            assert!((c as f64 / n as f64 - 0.25).abs() <= tol, "{counts:?}");
        }
    }

    #[test]
    fn selection_is_reproducible() {
        let cfg = TsConfig::default();
        let sampler = ThompsonSampler::new(cfg).unwrap();
        let v = featurize(&obs(0.4, 0.1, 0.0));
        let run = |seed| {
            let mut rng = seeded(seed);
            (0..50).map(|_| sampler.select(&v, &mut rng).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(run(5), run(5));
    }

    #[test]
    fn argmax_breaks_ties_low() {
        assert_eq!(argmax_action(&[1.0, 3.0, 3.0, 2.0]), Action::GENERIC);
        assert_eq!(argmax_action(&[0.0, 0.0, 0.0, 0.0]), Action::NONE);
    }

    #[test]
    fn snapshot_roundtrip_and_shape() {
        let mut s = ThompsonSampler::new(TsConfig::default()).unwrap();
        s.update(Action::TAILORED_1, &featurize(&obs(0.9, 0.1, 0.2)), 150.0).unwrap();
        let json = serde_json::to_value(s.snapshot()).unwrap();
        assert_eq!(json["arms"].as_array().unwrap().len(), 4);
        assert_eq!(json["arms"][3]["cov"].as_array().unwrap().len(), 16);
        let back: PosteriorSnapshot = serde_json::from_value(json).unwrap();
        let restored = ThompsonSampler::restore(TsConfig::default(), &back).unwrap();
        assert_eq!(restored.arms, s.arms);
    }

    #[test]
    fn snapshot_rejects_bad_shapes() {
        let bad = PosteriorSnapshot {
            reward_noise_var: 625.0,
            arms: vec![ArmSnapshot { mu: vec![0.0; 4], cov: vec![0.0; 15] }; 4],
        };
        assert!(ThompsonSampler::restore(TsConfig::default(), &bad).is_err());
    }
}
