//! Beliefs on the unknown world state and the processes that move them
//! toward a common belief: network averaging and conjugate Gaussian updates.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

const PSD_TOL: f64 = 1e-9;

/// A multivariate normal belief.
#[derive(Clone, Debug, PartialEq)]
pub struct Gaussian {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl Gaussian {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if cov.nrows() != d || cov.ncols() != d {
            return Err(Error::domain(format!("covariance is {}x{}, mean has {d} entries", cov.nrows(), cov.ncols())));
        }
        if (&cov - cov.transpose()).amax() > PSD_TOL {
            return Err(Error::domain("covariance is not symmetric"));
        }
        if d > 0 && SymmetricEigen::new(cov.clone()).eigenvalues.min() < -PSD_TOL {
            return Err(Error::domain("covariance is not positive semidefinite"));
        }
        Ok(Gaussian { mean, cov })
    }

    /// Independent coordinates with a common variance.
    pub fn isotropic(mean: &[f64], variance: f64) -> Result<Self> {
        let d = mean.len();
        Gaussian::new(DVector::from_column_slice(mean), DMatrix::identity(d, d) * variance)
    }

    pub fn point_mass(mean: &[f64]) -> Self {
        let d = mean.len();
        Gaussian { mean: DVector::from_column_slice(mean), cov: DMatrix::zeros(d, d) }
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// Agent belief on the world state `theta`, which is always a real vector
/// (length one for scalar states).
#[derive(Clone, Debug, PartialEq)]
pub enum StateBelief {
    /// Finitely supported belief: `probs[k]` on state `grid[k]`.
    Categorical { grid: Vec<Vec<f64>>, probs: Vec<f64> },
    Gaussian(Gaussian),
}

impl StateBelief {
    pub fn categorical(grid: Vec<Vec<f64>>, probs: Vec<f64>) -> Result<Self> {
        if grid.len() != probs.len() || grid.is_empty() {
            return Err(Error::domain("categorical grid and probabilities differ in length"));
        }
        let d = grid[0].len();
        if grid.iter().any(|s| s.len() != d) {
            return Err(Error::domain("categorical grid states differ in dimension"));
        }
        crate::strategy::Strategy::new(probs.clone())?;
        Ok(StateBelief::Categorical { grid, probs })
    }

    pub fn point(theta: &[f64]) -> Self {
        StateBelief::Categorical { grid: vec![theta.to_vec()], probs: vec![1.0] }
    }

    pub fn dim(&self) -> usize {
        match self {
            StateBelief::Categorical { grid, .. } => grid[0].len(),
            StateBelief::Gaussian(g) => g.dim(),
        }
    }

    pub fn mean(&self) -> Vec<f64> {
        match self {
            StateBelief::Categorical { grid, probs } => {
                let mut m = vec![0.0; grid[0].len()];
                for (s, p) in grid.iter().zip(probs) {
                    for (mi, si) in m.iter_mut().zip(s) {
                        *mi += p * si;
                    }
                }
                m
            }
            StateBelief::Gaussian(g) => g.mean.as_slice().to_vec(),
        }
    }

    /// Trace of the covariance matrix.
    pub fn cov_trace(&self) -> f64 {
        match self {
            StateBelief::Categorical { grid, probs } => {
                let m = self.mean();
                grid.iter()
                    .zip(probs)
                    .map(|(s, p)| p * s.iter().zip(&m).map(|(a, b)| (a - b).powi(2)).sum::<f64>())
                    .sum()
            }
            StateBelief::Gaussian(g) => g.cov.trace(),
        }
    }

    pub fn summary(&self) -> BeliefSummary {
        match self {
            StateBelief::Categorical { probs, .. } => BeliefSummary {
                kind: "categorical".into(),
                mean: self.mean(),
                probs: Some(probs.clone()),
                cov_trace: self.cov_trace(),
            },
            StateBelief::Gaussian(_) => BeliefSummary {
                kind: "gaussian".into(),
                mean: self.mean(),
                probs: None,
                cov_trace: self.cov_trace(),
            },
        }
    }
}

/// Serialized view of a belief: `{type, mean, probs?, cov_trace}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeliefSummary {
    #[serde(rename = "type")]
    pub kind: String,
    pub mean: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probs: Option<Vec<f64>>,
    pub cov_trace: f64,
}

/// How a game integrates its payoff against a Gaussian state belief when no
/// closed form is available.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GaussianIntegration {
    /// Evaluate at the mean (certainty equivalent).
    PlugInMean,
    /// Tensor-product Gauss-Hermite rule with the given nodes per dimension.
    GaussHermite(usize),
}

/// Weighted states `(weight, theta)` that represent `belief` for integration.
pub fn integration_nodes(belief: &StateBelief, rule: GaussianIntegration) -> Result<Vec<(f64, Vec<f64>)>> {
    match belief {
        StateBelief::Categorical { grid, probs } => {
            Ok(probs.iter().copied().zip(grid.iter().cloned()).filter(|(p, _)| *p > 0.0).collect())
        }
        StateBelief::Gaussian(g) => match rule {
            GaussianIntegration::PlugInMean => Ok(vec![(1.0, g.mean.as_slice().to_vec())]),
            GaussianIntegration::GaussHermite(k) => gauss_hermite_nodes(g, k),
        },
    }
}

/// Nodes and weights of the probabilists' Hermite rule (standard normal),
/// from the eigen-decomposition of the Jacobi matrix.
pub fn hermite_rule(k: usize) -> Vec<(f64, f64)> {
    assert!(k >= 1);
    let mut jacobi = DMatrix::zeros(k, k);
    for i in 1..k {
        let b = (i as f64).sqrt();
        jacobi[(i, i - 1)] = b;
        jacobi[(i - 1, i)] = b;
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut rule: Vec<(f64, f64)> = (0..k)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}

const MAX_QUADRATURE_NODES: usize = 100_000;

fn gauss_hermite_nodes(g: &Gaussian, k: usize) -> Result<Vec<(f64, Vec<f64>)>> {
    let d = g.dim();
    let count = (k as u128).saturating_pow(d as u32);
    if count > MAX_QUADRATURE_NODES as u128 {
        return Err(Error::Resource { what: "gauss-hermite nodes", needed: count, cap: MAX_QUADRATURE_NODES as u128 });
    }
    let rule = hermite_rule(k);
    // symmetric square root handles singular covariances
    let eig = SymmetricEigen::new(g.cov.clone());
    let sqrt_diag = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let root = &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_diag);

    let mut nodes = Vec::with_capacity(count as usize);
    let mut idx = vec![0usize; d];
    loop {
        let z = DVector::from_iterator(d, idx.iter().map(|&i| rule[i].0));
        let w: f64 = idx.iter().map(|&i| rule[i].1).product();
        let x = &g.mean + &root * z;
        nodes.push((w, x.as_slice().to_vec()));
        // odometer
        let mut pos = 0;
        loop {
            if pos == d {
                return Ok(nodes);
            }
            idx[pos] += 1;
            if idx[pos] < k {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Row-stochastic mixing matrix for belief averaging; row `i` holds the
/// weights agent `i` puts on itself and its neighbors.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMatrix(DMatrix<f64>);

impl WeightMatrix {
    pub fn new(w: DMatrix<f64>, g: &Graph) -> Result<Self> {
        let n = g.num_nodes();
        if w.nrows() != n || w.ncols() != n {
            return Err(Error::domain("weight matrix size differs from graph"));
        }
        for i in 0..n {
            let row_sum: f64 = w.row(i).sum();
            if (row_sum - 1.0).abs() > 1e-9 {
                return Err(Error::domain(format!("weight row {i} sums to {row_sum}")));
            }
            for j in 0..n {
                let x = w[(i, j)];
                if x < 0.0 {
                    return Err(Error::domain(format!("negative weight at ({i}, {j})")));
                }
                if x > 0.0 && i != j && !g.has_neighbor(i, j) {
                    return Err(Error::domain(format!("weight on non-neighbor ({i}, {j})")));
                }
            }
        }
        Ok(WeightMatrix(w))
    }

    /// Metropolis-Hastings weights: `1 / (1 + max(d_i, d_j))` on each edge and
    /// the remainder on the diagonal. Doubly stochastic on undirected graphs.
    pub fn metropolis(g: &Graph) -> Result<Self> {
        let n = g.num_nodes();
        let mut w = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in g.neighbors(i) {
                w[(i, j)] = 1.0 / (1.0 + g.degree(i).max(g.degree(j)) as f64);
            }
            w[(i, i)] = 1.0 - w.row(i).sum();
        }
        WeightMatrix::new(w, g)
    }

    pub fn identity(n: usize) -> Self {
        WeightMatrix(DMatrix::identity(n, n))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }
}

/// One synchronous round of belief averaging: every belief becomes the
/// weighted mix of its neighbors' previous beliefs. Categorical beliefs mix
/// pointwise; Gaussian beliefs mix means and covariances.
pub fn averaging_step(beliefs: &[StateBelief], weights: &WeightMatrix) -> Result<Vec<StateBelief>> {
    let n = beliefs.len();
    if weights.0.nrows() != n {
        return Err(Error::domain("weight matrix size differs from belief count"));
    }
    match &beliefs[0] {
        StateBelief::Categorical { grid, .. } => {
            let rows: Vec<&Vec<f64>> = beliefs
                .iter()
                .map(|b| match b {
                    StateBelief::Categorical { grid: g, probs } if g == grid => Ok(probs),
                    StateBelief::Categorical { .. } => Err(Error::domain("categorical beliefs on different grids")),
                    StateBelief::Gaussian(_) => Err(Error::domain("mixed belief representations")),
                })
                .collect::<Result<_>>()?;
            Ok((0..n)
                .map(|i| {
                    let mut probs = vec![0.0; grid.len()];
                    for (j, row) in rows.iter().enumerate() {
                        let w = weights.get(i, j);
                        if w != 0.0 {
                            probs.iter_mut().zip(row.iter()).for_each(|(p, q)| *p += w * q);
                        }
                    }
                    StateBelief::Categorical { grid: grid.clone(), probs }
                })
                .collect())
        }
        StateBelief::Gaussian(first) => {
            let gs: Vec<&Gaussian> = beliefs
                .iter()
                .map(|b| match b {
                    StateBelief::Gaussian(g) if g.dim() == first.dim() => Ok(g),
                    StateBelief::Gaussian(_) => Err(Error::domain("gaussian beliefs differ in dimension")),
                    StateBelief::Categorical { .. } => Err(Error::domain("mixed belief representations")),
                })
                .collect::<Result<_>>()?;
            let d = first.dim();
            Ok((0..n)
                .map(|i| {
                    let mut mean = DVector::zeros(d);
                    let mut cov = DMatrix::zeros(d, d);
                    for (j, g) in gs.iter().enumerate() {
                        let w = weights.get(i, j);
                        if w != 0.0 {
                            mean += &g.mean * w;
                            cov += &g.cov * w;
                        }
                    }
                    StateBelief::Gaussian(Gaussian { mean, cov })
                })
                .collect())
        }
    }
}

/// Conjugate update of a Gaussian prior with one observation
/// `obs ~ N(theta, noise_cov)`.
pub fn bayes_gaussian_update(prior: &Gaussian, obs: &[f64], noise_cov: &DMatrix<f64>) -> Result<Gaussian> {
    bayes_gaussian_update_batch(prior, &[obs.to_vec()], noise_cov)
}

/// Conjugate update with several i.i.d. observations at once.
pub fn bayes_gaussian_update_batch(prior: &Gaussian, obs: &[Vec<f64>], noise_cov: &DMatrix<f64>) -> Result<Gaussian> {
    let d = prior.dim();
    if noise_cov.nrows() != d || noise_cov.ncols() != d || obs.iter().any(|o| o.len() != d) {
        return Err(Error::domain("observation dimensions differ from the prior"));
    }
    let noise_prec = noise_cov
        .clone()
        .cholesky()
        .ok_or_else(|| Error::domain("noise covariance is not positive definite"))?
        .inverse();
    let k = obs.len() as f64;
    let mut obs_sum = DVector::zeros(d);
    for o in obs {
        obs_sum += DVector::from_column_slice(o);
    }
    // information form; a singular prior covariance is handled by working
    // through the prior covariance rather than its inverse
    let s = &prior.cov * &noise_prec * k;
    let lhs = DMatrix::identity(d, d) + &s;
    let lhs_inv = lhs
        .try_inverse()
        .ok_or_else(|| Error::domain("posterior system is singular"))?;
    let cov = &lhs_inv * &prior.cov;
    let cov = (&cov + cov.transpose()) * 0.5;
    let mean = &lhs_inv * (&prior.mean + &prior.cov * &noise_prec * obs_sum);
    Ok(Gaussian { mean, cov })
}

/// Posterior after observations with an uninformative prior: the sample
/// mean, with covariance `noise_cov / k`.
pub fn flat_prior_posterior(obs: &[Vec<f64>], noise_cov: &DMatrix<f64>) -> Result<Gaussian> {
    if obs.is_empty() {
        return Err(Error::domain("no observations"));
    }
    let d = obs[0].len();
    let k = obs.len() as f64;
    let mut mean = DVector::zeros(d);
    for o in obs {
        if o.len() != d {
            return Err(Error::domain("observation dimensions differ"));
        }
        mean += DVector::from_column_slice(o);
    }
    Gaussian::new(mean / k, noise_cov / k)
}

/// Total variation distance. Exact for categorical beliefs on a shared grid;
/// for Gaussians a bounded proxy,
/// `min(1, |dm| / (sqrt(2 pi) s_min) + ||dC||_F / s_min^2)`,
/// where `s_min^2` is the smaller of the two covariances' least eigenvalues.
pub fn total_variation(b1: &StateBelief, b2: &StateBelief) -> Result<f64> {
    match (b1, b2) {
        (StateBelief::Categorical { grid: g1, probs: p1 }, StateBelief::Categorical { grid: g2, probs: p2 }) => {
            if g1 != g2 {
                return Err(Error::domain("categorical beliefs on different grids"));
            }
            Ok(0.5 * p1.iter().zip(p2).map(|(a, b)| (a - b).abs()).sum::<f64>())
        }
        (StateBelief::Gaussian(a), StateBelief::Gaussian(b)) => {
            if a.dim() != b.dim() {
                return Err(Error::domain("gaussian beliefs differ in dimension"));
            }
            let mean_gap = (&a.mean - &b.mean).norm();
            let cov_gap = (&a.cov - &b.cov).norm();
            if mean_gap == 0.0 && cov_gap == 0.0 {
                return Ok(0.0);
            }
            let least = |c: &DMatrix<f64>| SymmetricEigen::new(c.clone()).eigenvalues.min();
            let var_min = least(&a.cov).min(least(&b.cov));
            if var_min <= 0.0 {
                return Ok(1.0);
            }
            let proxy = mean_gap / ((2.0 * std::f64::consts::PI).sqrt() * var_min.sqrt()) + cov_gap / var_min;
            Ok(proxy.min(1.0))
        }
        _ => Err(Error::domain("total variation between different representations")),
    }
}

/// Per-round maximum over agents of the distance to `reference`.
pub fn tv_rate_series(trajectory: &[Vec<StateBelief>], reference: &StateBelief) -> Result<Vec<(usize, f64)>> {
    trajectory
        .iter()
        .enumerate()
        .map(|(t, beliefs)| {
            let worst = beliefs
                .iter()
                .map(|b| total_variation(b, reference))
                .try_fold(0.0f64, |acc, tv| tv.map(|tv| acc.max(tv)))?;
            Ok((t + 1, worst))
        })
        .collect()
}

/// Additive Gaussian noise on every coordinate of the state.
#[derive(Clone, Debug, PartialEq)]
pub struct SignalModel {
    noise_std: Vec<f64>,
}

impl SignalModel {
    pub fn new(noise_std: Vec<f64>) -> Result<Self> {
        if noise_std.is_empty() || noise_std.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(Error::domain("signal noise must be positive"));
        }
        Ok(SignalModel { noise_std })
    }

    pub fn isotropic(dim: usize, std: f64) -> Result<Self> {
        SignalModel::new(vec![std; dim])
    }

    pub fn noise_std(&self) -> &[f64] {
        &self.noise_std
    }

    pub fn noise_cov(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_iterator(self.noise_std.len(), self.noise_std.iter().map(|s| s * s)))
    }

    pub fn observe<R: Rng + ?Sized>(&self, theta: &[f64], rng: &mut R) -> Vec<f64> {
        theta
            .iter()
            .zip(&self.noise_std)
            .map(|(t, s)| t + Normal::new(0.0, *s).expect("positive std").sample(rng))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gaussian_mean(b: &StateBelief) -> f64 {
        b.mean()[0]
    }

    #[test]
    fn averaging_complete_graph_meets_in_the_middle() {
        let g = Graph::complete(2);
        let w = WeightMatrix::new(DMatrix::from_element(2, 2, 0.5), &g).unwrap();
        let beliefs = vec![
            StateBelief::Gaussian(Gaussian::isotropic(&[80.0], 400.0).unwrap()),
            StateBelief::Gaussian(Gaussian::isotropic(&[100.0], 400.0).unwrap()),
        ];
        let next = averaging_step(&beliefs, &w).unwrap();
        assert!(next.iter().all(|b| (gaussian_mean(b) - 90.0).abs() < 1e-12));
    }

    #[test]
    fn averaging_identity_is_noop() {
        let beliefs = vec![
            StateBelief::categorical(vec![vec![0.0], vec![1.0]], vec![0.3, 0.7]).unwrap(),
            StateBelief::categorical(vec![vec![0.0], vec![1.0]], vec![0.9, 0.1]).unwrap(),
        ];
        assert_eq!(averaging_step(&beliefs, &WeightMatrix::identity(2)).unwrap(), beliefs);
    }

    #[test]
    fn averaging_star_reaches_the_average_like_matrix_powers() {
        let g = Graph::star(5).unwrap();
        let w = WeightMatrix::metropolis(&g).unwrap();
        let init = [80.0, 95.0, 100.0, 70.0, 120.0];
        let mut beliefs: Vec<_> = init
            .iter()
            .map(|m| StateBelief::Gaussian(Gaussian::isotropic(&[*m], 400.0).unwrap()))
            .collect();
        for _ in 0..200 {
            beliefs = averaging_step(&beliefs, &w).unwrap();
        }
        let means: Vec<f64> = beliefs.iter().map(gaussian_mean).collect();
        let spread = means.iter().cloned().fold(f64::MIN, f64::max) - means.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread < 1e-6);
        let avg = init.iter().sum::<f64>() / 5.0;
        assert!((means[0] - avg).abs() < 1e-6);
        // independent route: W^200 x
        let x = DVector::from_column_slice(&init);
        let powered = w.matrix().pow(200) * x;
        for (m, p) in means.iter().zip(powered.iter()) {
            assert!((m - p).abs() < 1e-9);
        }
    }

    #[test]
    fn averaging_rejects_mixed_representations() {
        let beliefs = vec![StateBelief::point(&[1.0]), StateBelief::Gaussian(Gaussian::point_mass(&[1.0]))];
        assert!(averaging_step(&beliefs, &WeightMatrix::identity(2)).is_err());
    }

    #[test]
    fn weights_must_be_stochastic_and_local() {
        let g = Graph::path(3).unwrap();
        let bad_sum = DMatrix::from_row_slice(3, 3, &[0.5, 0.4, 0.0, 0.5, 0.0, 0.5, 0.0, 0.5, 0.5]);
        assert!(WeightMatrix::new(bad_sum, &g).is_err());
        let non_local = DMatrix::from_row_slice(3, 3, &[0.5, 0.0, 0.5, 0.5, 0.0, 0.5, 0.0, 0.5, 0.5]);
        assert!(WeightMatrix::new(non_local, &g).is_err());
        let mh = WeightMatrix::metropolis(&g).unwrap();
        for j in 0..3 {
            assert!((mh.matrix().column(j).sum() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bayes_conjugate_identity() {
        let prior = Gaussian::isotropic(&[0.0], 1.0).unwrap();
        let post = bayes_gaussian_update(&prior, &[2.0], &DMatrix::identity(1, 1)).unwrap();
        assert!((post.mean()[0] - 1.0).abs() < 1e-12);
        assert!((post.cov()[(0, 0)] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bayes_uninformative_observation() {
        let prior = Gaussian::isotropic(&[3.0, -1.0], 2.0).unwrap();
        let noise = DMatrix::identity(2, 2) * 1e12;
        let post = bayes_gaussian_update(&prior, &[100.0, 100.0], &noise).unwrap();
        assert!((post.mean() - prior.mean()).amax() < 1e-6);
        assert!((post.cov() - prior.cov()).amax() < 1e-6);
    }

    #[test]
    fn bayes_rejects_singular_noise() {
        let prior = Gaussian::isotropic(&[0.0], 1.0).unwrap();
        assert!(bayes_gaussian_update(&prior, &[1.0], &DMatrix::zeros(1, 1)).is_err());
    }

    #[test]
    fn bayes_concentrates_like_sample_mean() {
        let theta = [1.0, -1.0];
        let signal = SignalModel::isotropic(2, 0.2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let obs: Vec<Vec<f64>> = (0..100).map(|_| signal.observe(&theta, &mut rng)).collect();
        let post = flat_prior_posterior(&obs, &signal.noise_cov()).unwrap();
        assert!((post.mean()[0] - 1.0).abs() < 0.1 && (post.mean()[1] + 1.0).abs() < 0.1);
        // sigma^2 / k per coordinate
        assert!((post.cov().trace() - 2.0 * 0.04 / 100.0).abs() < 1e-12);
        assert!(post.cov().trace() < 0.002);
    }

    #[test]
    fn tv_examples() {
        let grid = vec![vec![0.0], vec![1.0]];
        let a = StateBelief::categorical(grid.clone(), vec![0.6, 0.4]).unwrap();
        let b = StateBelief::categorical(grid.clone(), vec![0.4, 0.6]).unwrap();
        assert!((total_variation(&a, &b).unwrap() - 0.2).abs() < 1e-12);
        assert_eq!(total_variation(&a, &a).unwrap(), 0.0);
        let p0 = StateBelief::categorical(grid.clone(), vec![1.0, 0.0]).unwrap();
        let p1 = StateBelief::categorical(grid, vec![0.0, 1.0]).unwrap();
        assert_eq!(total_variation(&p0, &p1).unwrap(), 1.0);
        let other = StateBelief::categorical(vec![vec![0.0], vec![2.0]], vec![1.0, 0.0]).unwrap();
        assert!(total_variation(&p0, &other).is_err());
    }

    #[test]
    fn gaussian_tv_proxy_is_bounded_and_zero_on_equal() {
        let a = StateBelief::Gaussian(Gaussian::isotropic(&[90.0], 400.0).unwrap());
        let b = StateBelief::Gaussian(Gaussian::isotropic(&[91.0], 400.0).unwrap());
        assert_eq!(total_variation(&a, &a).unwrap(), 0.0);
        let tv = total_variation(&a, &b).unwrap();
        // 1 / (sqrt(2 pi) * 20)
        assert!((tv - 1.0 / (20.0 * (2.0 * std::f64::consts::PI).sqrt())).abs() < 1e-12);
        let far = StateBelief::Gaussian(Gaussian::isotropic(&[900.0], 400.0).unwrap());
        assert_eq!(total_variation(&a, &far).unwrap(), 1.0);
    }

    #[test]
    fn tv_series_constant_reference() {
        let r = StateBelief::point(&[1.0]);
        let traj = vec![vec![r.clone(), r.clone()]; 4];
        let s = tv_rate_series(&traj, &r).unwrap();
        assert_eq!(s.len(), 4);
        assert!(s.iter().all(|(_, v)| *v == 0.0));
    }

    #[test]
    fn averaging_tv_series_decays_on_a_connected_graph() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = loop {
            let (g, _) = Graph::random_geometric(50, 1.0, 0.3, &mut rng).unwrap();
            if g.is_strongly_connected() {
                break g;
            }
        };
        let w = WeightMatrix::metropolis(&g).unwrap();
        let grid: Vec<Vec<f64>> = (0..37).map(|k| vec![5.0 * k as f64]).collect();
        let mut beliefs: Vec<StateBelief> = (0..50)
            .map(|i| {
                let mut p = vec![0.0; 37];
                p[(i * 7) % 37] = 1.0;
                StateBelief::categorical(grid.clone(), p).unwrap()
            })
            .collect();
        // doubly stochastic averaging converges to the population average
        let mut avg = vec![0.0; 37];
        for b in &beliefs {
            if let StateBelief::Categorical { probs, .. } = b {
                avg.iter_mut().zip(probs).for_each(|(a, p)| *a += p / 50.0);
            }
        }
        let reference = StateBelief::categorical(grid, avg).unwrap();
        let mut traj = Vec::new();
        for _ in 0..500 {
            beliefs = averaging_step(&beliefs, &w).unwrap();
            traj.push(beliefs.clone());
        }
        let series = tv_rate_series(&traj, &reference).unwrap();
        assert!(series[499].1 < 1e-3);
        assert!(series.windows(2).skip(50).all(|p| p[1].1 <= p[0].1 + 1e-12));
    }

    #[test]
    fn hermite_rule_integrates_low_moments() {
        let rule = hermite_rule(5);
        let moment = |k: i32| rule.iter().map(|(x, w)| w * x.powi(k)).sum::<f64>();
        assert!((moment(0) - 1.0).abs() < 1e-12);
        assert!(moment(1).abs() < 1e-12);
        assert!((moment(2) - 1.0).abs() < 1e-12);
        assert!((moment(4) - 3.0).abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn tv_is_a_metric(a in prop::collection::vec(0.01f64..1.0, 4),
                          b in prop::collection::vec(0.01f64..1.0, 4),
                          c in prop::collection::vec(0.01f64..1.0, 4)) {
            let grid: Vec<Vec<f64>> = (0..4).map(|k| vec![k as f64]).collect();
            let mk = |v: &Vec<f64>| {
                let s: f64 = v.iter().sum();
                StateBelief::categorical(grid.clone(), v.iter().map(|x| x / s).collect()).unwrap()
            };
            let (a, b, c) = (mk(&a), mk(&b), mk(&c));
            let ab = total_variation(&a, &b).unwrap();
            prop_assert!((ab - total_variation(&b, &a).unwrap()).abs() < 1e-12);
            prop_assert!(total_variation(&a, &a).unwrap() < 1e-12);
            prop_assert!(ab <= total_variation(&a, &c).unwrap() + total_variation(&c, &b).unwrap() + 1e-12);
        }

        #[test]
        fn doubly_stochastic_averaging_preserves_population_mean(means in prop::collection::vec(0.0f64..180.0, 6)) {
            let g = Graph::ring(6).unwrap();
            let w = WeightMatrix::metropolis(&g).unwrap();
            let beliefs: Vec<_> = means.iter().map(|m| StateBelief::Gaussian(Gaussian::isotropic(&[*m], 1.0).unwrap())).collect();
            let next = averaging_step(&beliefs, &w).unwrap();
            let before: f64 = means.iter().sum();
            let after: f64 = next.iter().map(|b| b.mean()[0]).sum();
            prop_assert!((before - after).abs() < 1e-9);
        }

        #[test]
        fn batched_bayes_equals_sequential(obs in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 2), 1..8)) {
            let prior = Gaussian::isotropic(&[0.5, -0.5], 0.7).unwrap();
            let noise = DMatrix::from_row_slice(2, 2, &[0.3, 0.05, 0.05, 0.2]);
            let batch = bayes_gaussian_update_batch(&prior, &obs, &noise).unwrap();
            let mut seq = prior.clone();
            for o in &obs {
                seq = bayes_gaussian_update(&seq, o, &noise).unwrap();
            }
            prop_assert!((batch.mean() - seq.mean()).amax() < 1e-9);
            prop_assert!((batch.cov() - seq.cov()).amax() < 1e-9);
        }
    }
}
