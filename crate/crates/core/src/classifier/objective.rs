//! Regularized multinomial cross-entropy over sparse rows.
//!
//! ```text
//! J(W, b) = 1/N Σ_i [ logsumexp(W x_i + b) - (W x_i + b)_{y_i} ] + λ/(2N) ‖W‖²
//! ```
//!
//! Biases are not penalized. Parameters are a flat vector, feature-major so
//! each nonzero of a sparse row touches one contiguous block:
//! `theta[j * C + c]` is the weight of feature `j` for class `c`, and
//! `theta[F * C + c]` is the bias of class `c`.

use crate::pooling::PooledMatrix;

pub struct SoftmaxObjective<'a> {
    matrix: &'a PooledMatrix,
    labels: Vec<usize>,
    classes: usize,
    l2: f64,
}

impl<'a> SoftmaxObjective<'a> {
    /// Objective over the matrix's own labels and class count.
    pub fn new(matrix: &'a PooledMatrix, l2: f64) -> Self {
        Self::with_labels(matrix, matrix.labels.clone(), matrix.class_count(), l2)
    }

    /// Objective with relabelled targets; every label must be `< classes`.
    pub fn with_labels(matrix: &'a PooledMatrix, labels: Vec<usize>, classes: usize, l2: f64) -> Self {
        assert_eq!(labels.len(), matrix.len());
        assert!(labels.iter().all(|&l| l < classes));
        SoftmaxObjective { matrix, labels, classes, l2 }
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn features(&self) -> usize {
        self.matrix.width
    }

    pub fn param_len(&self) -> usize {
        (self.features() + 1) * self.classes
    }

    pub fn value(&self, theta: &[f64]) -> f64 {
        let mut scratch = vec![0.0; theta.len()];
        self.value_and_gradient(theta, &mut scratch)
    }

    /// Writes the gradient into `grad` and returns the objective.
    pub fn value_and_gradient(&self, theta: &[f64], grad: &mut [f64]) -> f64 {
        let c_count = self.classes;
        let f_count = self.features();
        assert_eq!(theta.len(), self.param_len());
        assert_eq!(grad.len(), theta.len());
        grad.fill(0.0);
        let bias_at = f_count * c_count;
        let n = self.matrix.len().max(1) as f64;
        let mut scores = vec![0.0; c_count];
        let mut loss = 0.0;
        for (i, &y) in self.labels.iter().enumerate() {
            scores.copy_from_slice(&theta[bias_at..]);
            for (j, v) in self.matrix.row(i) {
                let w = &theta[j * c_count..(j + 1) * c_count];
                for (s, &wc) in scores.iter_mut().zip(w) {
                    *s += v * wc;
                }
            }
            let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let target = scores[y] - max;
            let mut z = 0.0;
            for s in &mut scores {
                *s = (*s - max).exp();
                z += *s;
            }
            loss += z.ln() - target;
            for s in &mut scores {
                *s /= z;
            }
            scores[y] -= 1.0;
            for (j, v) in self.matrix.row(i) {
                let g = &mut grad[j * c_count..(j + 1) * c_count];
                for (gc, &r) in g.iter_mut().zip(&scores) {
                    *gc += v * r;
                }
            }
            for (gb, &r) in grad[bias_at..].iter_mut().zip(&scores) {
                *gb += r;
            }
        }
        let reg = self.l2 / n;
        let mut penalty = 0.0;
        for (g, &w) in grad[..bias_at].iter_mut().zip(&theta[..bias_at]) {
            *g = *g / n + reg * w;
            penalty += w * w;
        }
        for g in &mut grad[bias_at..] {
            *g /= n;
        }
        loss / n + 0.5 * reg * penalty
    }
}
