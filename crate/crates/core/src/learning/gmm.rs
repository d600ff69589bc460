use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::sampling::RandomSource;

#[derive(Debug, Clone, PartialEq)]
pub struct GmmParams {
    pub weights: Vec<f64>,
    pub means: Vec<DVector<f64>>,
    pub covariances: Vec<DMatrix<f64>>,
}

impl GmmParams {
    pub fn k(&self) -> usize {
        self.weights.len()
    }

    fn validate(&self, dim: usize) -> Result<()> {
        let k = self.weights.len();
        if k == 0 || self.means.len() != k || self.covariances.len() != k {
            return Err(Error::Shape("weights, means and covariances must have one entry per component".into()));
        }
        if (self.weights.iter().sum::<f64>() - 1.0).abs() > 1e-12 || self.weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::Argument("mixing weights must lie on the simplex".into()));
        }
        for (m, c) in self.means.iter().zip(&self.covariances) {
            if m.len() != dim || c.nrows() != dim || c.ncols() != dim {
                return Err(Error::Shape(format!("components must have dimension {dim}")));
            }
            if c.clone().cholesky().is_none() {
                return Err(Error::Argument("covariances must be positive definite".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GmmInit {
    /// k-means++ seeding of the means, identity covariances, uniform weights.
    KMeansPlusPlus,
    Params(GmmParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmmOptions {
    pub k: usize,
    /// Stop once an iteration gains less than this in total log-likelihood.
    pub tol: f64,
    pub max_iters: usize,
    pub restarts: usize,
    pub init: GmmInit,
}

impl Default for GmmOptions {
    fn default() -> Self {
        GmmOptions { k: 2, tol: 1e-8, max_iters: 1000, restarts: 5, init: GmmInit::KMeansPlusPlus }
    }
}

#[derive(Debug, Clone)]
pub struct GmmFit {
    pub params: GmmParams,
    /// Total log-likelihood before each M-step and at the returned parameters.
    pub loglik_trace: Vec<f64>,
    pub responsibilities: Vec<Vec<f64>>,
    pub iterations: usize,
    pub converged: bool,
    pub restart: usize,
    /// Components reinitialized after their covariance fell below the floor.
    pub collapses: usize,
}

impl GmmFit {
    pub fn loglik(&self) -> f64 {
        *self.loglik_trace.last().expect("non-empty trace")
    }
}

/// log N(x; μ, Σ) via a Cholesky factor.
pub fn gaussian_log_density(x: &DVector<f64>, mean: &DVector<f64>, cov: &DMatrix<f64>) -> Result<f64> {
    let chol = cov.clone().cholesky().ok_or_else(|| Error::Argument("covariance is not positive definite".into()))?;
    Ok(log_density(x, mean, &chol.l()))
}

fn log_density(x: &DVector<f64>, mean: &DVector<f64>, l: &DMatrix<f64>) -> f64 {
    let d = x.len() as f64;
    let y = l.solve_lower_triangular(&(x - mean)).expect("nonsingular factor");
    let logdet: f64 = 2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>();
    -0.5 * (d * (2.0 * std::f64::consts::PI).ln() + logdet + y.norm_squared())
}

fn e_step(x: &[DVector<f64>], p: &GmmParams) -> (f64, Vec<Vec<f64>>) {
    let factors: Vec<DMatrix<f64>> =
        p.covariances.iter().map(|c| c.clone().cholesky().expect("kept positive definite").l()).collect();
    let mut total = 0.0;
    let mut resp = Vec::with_capacity(x.len());
    for xi in x {
        let logs: Vec<f64> = (0..p.k())
            .map(|k| if p.weights[k] > 0.0 { p.weights[k].ln() + log_density(xi, &p.means[k], &factors[k]) } else { f64::NEG_INFINITY })
            .collect();
        let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + logs.iter().map(|l| (l - m).exp()).sum::<f64>().ln();
        total += lse;
        resp.push(logs.iter().map(|l| (l - lse).exp()).collect());
    }
    (total, resp)
}

fn moments(x: &[DVector<f64>], w: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>) {
    let dim = x[0].len();
    let nk: f64 = w.iter().sum();
    let mut mean = DVector::zeros(dim);
    for (xi, wi) in x.iter().zip(w) {
        mean += xi * *wi;
    }
    mean /= nk;
    let mut cov = DMatrix::zeros(dim, dim);
    for (xi, wi) in x.iter().zip(w) {
        let c = xi - &mean;
        cov += (&c * c.transpose()) * *wi;
    }
    cov /= nk;
    cov = (&cov + cov.transpose()) * 0.5;
    (nk, mean, cov)
}

fn min_eigenvalue(c: &DMatrix<f64>) -> f64 {
    c.clone().symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

fn kmeans_pp(x: &[DVector<f64>], k: usize, dim: usize, rng: &mut RandomSource) -> GmmParams {
    let mut centers = vec![x[rng.index(x.len())].clone()];
    while centers.len() < k {
        let d2: Vec<f64> =
            x.iter().map(|xi| centers.iter().map(|c| (xi - c).norm_squared()).fold(f64::INFINITY, f64::min)).collect();
        let i = rng.categorical(&d2).unwrap_or_else(|| rng.index(x.len()));
        centers.push(x[i].clone());
    }
    GmmParams { weights: vec![1.0 / k as f64; k], means: centers, covariances: vec![DMatrix::identity(dim, dim); k] }
}

struct Run {
    params: GmmParams,
    trace: Vec<f64>,
    resp: Vec<Vec<f64>>,
    iterations: usize,
    converged: bool,
    collapses: usize,
}

fn run(x: &[DVector<f64>], mut params: GmmParams, opts: &GmmOptions, floor: f64, data_cov: &DMatrix<f64>, rng: &mut RandomSource) -> Run {
    let n = x.len() as f64;
    let mut trace = Vec::new();
    let mut collapses = 0;
    let mut iterations = 0;
    let (mut ll, mut resp) = e_step(x, &params);
    trace.push(ll);
    let mut converged = false;
    while iterations < opts.max_iters {
        for k in 0..params.k() {
            let w: Vec<f64> = resp.iter().map(|r| r[k]).collect();
            let (nk, mean, cov) = moments(x, &w);
            if !(nk > 0.0) || !(min_eigenvalue(&cov) >= floor) {
                log::warn!("component {k} collapsed (weight {nk}); reinitializing");
                collapses += 1;
                params.means[k] = x[rng.index(x.len())].clone();
                params.covariances[k] = data_cov.clone();
                params.weights[k] = 1.0 / params.k() as f64;
            } else {
                params.means[k] = mean;
                params.covariances[k] = cov;
                params.weights[k] = nk / n;
            }
        }
        let s: f64 = params.weights.iter().sum();
        params.weights.iter_mut().for_each(|w| *w /= s);
        iterations += 1;
        let prev = ll;
        (ll, resp) = e_step(x, &params);
        trace.push(ll);
        if ll - prev < opts.tol {
            converged = true;
            break;
        }
    }
    Run { params, trace, resp, iterations, converged, collapses }
}

/// Expectation-maximization for a Gaussian mixture; best of the restarts.
///
/// Covariances whose smallest eigenvalue drops below `1e-6·trace(Σ_data)/d`
/// count as collapsed and the component is reseeded at a random point.
pub fn em_gmm(data: &[Vec<f64>], opts: &GmmOptions, rng: &mut RandomSource) -> Result<GmmFit> {
    if opts.k == 0 {
        return Err(Error::Argument("need at least one component".into()));
    }
    if data.len() < opts.k {
        return Err(Error::InsufficientData(format!("{} points for {} components", data.len(), opts.k)));
    }
    let dim = data[0].len();
    if dim == 0 {
        return Err(Error::Shape("points must have at least one coordinate".into()));
    }
    for (r, row) in data.iter().enumerate() {
        if row.len() != dim {
            return Err(Error::Dataset { row: r, col: row.len().min(dim), message: format!("expected {dim} coordinates") });
        }
        if let Some(c) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::Dataset { row: r, col: c, message: "non-finite value".into() });
        }
    }
    let x: Vec<DVector<f64>> = data.iter().map(|r| DVector::from_column_slice(r)).collect();
    let (_, _, data_cov) = moments(&x, &vec![1.0; x.len()]);
    let floor = (1e-6 * data_cov.trace() / dim as f64).max(1e-300);
    let data_cov = &data_cov + DMatrix::identity(dim, dim) * floor;
    let restarts = match opts.init {
        GmmInit::Params(ref p) => {
            p.validate(dim)?;
            if p.k() != opts.k {
                return Err(Error::Shape(format!("initial parameters have {} components, expected {}", p.k(), opts.k)));
            }
            1
        }
        GmmInit::KMeansPlusPlus => opts.restarts.max(1),
    };
    let mut best: Option<GmmFit> = None;
    for restart in 0..restarts {
        let init = match &opts.init {
            GmmInit::Params(p) => p.clone(),
            GmmInit::KMeansPlusPlus => kmeans_pp(&x, opts.k, dim, rng),
        };
        let r = run(&x, init, opts, floor, &data_cov, rng);
        let fit = GmmFit {
            params: r.params,
            loglik_trace: r.trace,
            responsibilities: r.resp,
            iterations: r.iterations,
            converged: r.converged,
            restart,
            collapses: r.collapses,
        };
        if best.as_ref().map_or(true, |b| fit.loglik() > b.loglik()) {
            best = Some(fit);
        }
    }
    Ok(best.expect("at least one restart"))
}
