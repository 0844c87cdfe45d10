//! Diagonal-covariance Gaussian mixtures.

use serde::{Deserialize, Serialize};

use crate::scalar::{log_sum_exp, Scalar};

/// Mixture over `dim`-dimensional vectors with diagonal covariances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagGmm<T> {
    pub weights: Vec<T>,
    pub means: Vec<Vec<T>>,
    pub variances: Vec<Vec<T>>,
}

impl<T: Scalar> DiagGmm<T> {
    /// Single-component maximum-likelihood fit. `data` must be non-empty.
    pub fn fit_single(data: &[&[T]], var_floor: T) -> Self {
        assert!(!data.is_empty(), "cannot fit a Gaussian to no data");
        let dim = data[0].len();
        let n = T::from_usize_lossy(data.len());
        let mut mean = vec![T::zero(); dim];
        for x in data {
            for (m, &v) in mean.iter_mut().zip(x.iter()) {
                *m = *m + v;
            }
        }
        for m in &mut mean {
            *m = *m / n;
        }
        let mut var = vec![T::zero(); dim];
        for x in data {
            for ((s, &v), &m) in var.iter_mut().zip(x.iter()).zip(&mean) {
                let d = v - m;
                *s = *s + d * d;
            }
        }
        for s in &mut var {
            *s = (*s / n).max(var_floor);
        }
        Self {
            weights: vec![T::one()],
            means: vec![mean],
            variances: vec![var],
        }
    }

    pub fn n_components(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    fn component_log_density(&self, m: usize, x: &[T]) -> T {
        let two_pi = T::TAU();
        let half = T::lit(0.5);
        let mut acc = T::zero();
        for ((&v, &mu), &var) in x.iter().zip(&self.means[m]).zip(&self.variances[m]) {
            let d = v - mu;
            acc = acc + (two_pi * var).ln() + d * d / var;
        }
        -half * acc
    }

    /// Per-component `ln w_m + ln N(x; μ_m, Σ_m)`.
    fn weighted_log_densities(&self, x: &[T], out: &mut Vec<T>) {
        out.clear();
        out.extend((0..self.n_components()).map(|m| {
            let w = self.weights[m];
            if w > T::zero() {
                w.ln() + self.component_log_density(m, x)
            } else {
                T::neg_infinity()
            }
        }));
    }

    pub fn log_likelihood(&self, x: &[T]) -> T {
        let mut buf = Vec::with_capacity(self.n_components());
        self.weighted_log_densities(x, &mut buf);
        log_sum_exp(&buf)
    }

    pub fn total_log_likelihood(&self, data: &[&[T]]) -> T {
        data.iter().map(|x| self.log_likelihood(x)).sum()
    }

    /// One EM iteration starting from the current parameters.
    ///
    /// Components with no responsibility keep their mean and variance and
    /// drop to zero weight, so the data log-likelihood never decreases.
    pub fn em_step(&mut self, data: &[&[T]], var_floor: T) {
        if data.is_empty() {
            return;
        }
        let k = self.n_components();
        let dim = self.dim();
        let mut occ = vec![T::zero(); k];
        let mut sum = vec![vec![T::zero(); dim]; k];
        let mut sum_sq = vec![vec![T::zero(); dim]; k];
        let mut buf = Vec::with_capacity(k);
        for x in data {
            self.weighted_log_densities(x, &mut buf);
            let total = log_sum_exp(&buf);
            for m in 0..k {
                let r = (buf[m] - total).exp();
                if r == T::zero() {
                    continue;
                }
                occ[m] = occ[m] + r;
                for ((s, q), &v) in sum[m].iter_mut().zip(sum_sq[m].iter_mut()).zip(x.iter()) {
                    *s = *s + r * v;
                    *q = *q + r * v * v;
                }
            }
        }
        let n = T::from_usize_lossy(data.len());
        let tiny = T::lit(1e-10);
        for m in 0..k {
            self.weights[m] = occ[m] / n;
            if occ[m] <= tiny {
                continue;
            }
            for d in 0..dim {
                let mean = sum[m][d] / occ[m];
                let var = sum_sq[m][d] / occ[m] - mean * mean;
                self.means[m][d] = mean;
                self.variances[m][d] = var.max(var_floor);
            }
        }
        let wsum: T = self.weights.iter().copied().sum();
        for w in &mut self.weights {
            *w = *w / wsum;
        }
    }

    /// Splits the heaviest component into two, offset by ±0.2 σ.
    pub fn split_heaviest(&mut self) {
        let (m, _) = self
            .weights
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |best, (i, &w)| if w > best.1 { (i, w) } else { best });
        let offset = T::lit(0.2);
        let half = self.weights[m] / (T::one() + T::one());
        let var = self.variances[m].clone();
        let mean = self.means[m].clone();
        let plus: Vec<T> = mean.iter().zip(&var).map(|(&mu, &v)| mu + offset * v.sqrt()).collect();
        let minus: Vec<T> = mean.iter().zip(&var).map(|(&mu, &v)| mu - offset * v.sqrt()).collect();
        self.weights[m] = half;
        self.means[m] = minus;
        self.weights.push(half);
        self.means.push(plus);
        self.variances.push(var);
    }

    /// Fits from scratch, growing to `components` by repeated splitting.
    pub fn train(data: &[&[T]], components: usize, em_iterations: usize, var_floor: T) -> Self {
        let mut gmm = Self::fit_single(data, var_floor);
        while gmm.n_components() < components.max(1) {
            gmm.split_heaviest();
            for _ in 0..em_iterations {
                gmm.em_step(data, var_floor);
            }
        }
        gmm
    }

    pub fn weights_sum(&self) -> T {
        self.weights.iter().copied().sum()
    }
}
