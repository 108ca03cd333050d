//! Minimal dense symmetric-matrix helpers (row-major square storage).

/// Square matrix stored row-major. Only what the margin distribution and the
/// Cholesky map need; not a general linear-algebra type.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SquareMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Elementwise (R + eps*I) / (1 + eps). Keeps the diagonal exactly one and
    /// preserves positive definiteness of R + eps*I.
    pub fn jittered_correlation(&self, eps: f64) -> SquareMatrix {
        let mut out = self.clone();
        let scale = 1.0 + eps;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let v = if i == j {
                    (self.get(i, j) + eps) / scale
                } else {
                    self.get(i, j) / scale
                };
                out.set(i, j, v);
            }
        }
        out
    }

    /// Lower-triangular Cholesky factor, or `None` if the matrix is not
    /// numerically positive definite.
    pub fn try_cholesky(&self) -> Option<SquareMatrix> {
        let n = self.dim;
        let mut l = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let mut sum = self.get(i, j);
                for k in 0..j {
                    sum -= l.get(i, k) * l.get(j, k);
                }
                if i == j {
                    if sum <= 0.0 {
                        return None;
                    }
                    l.set(i, j, sum.sqrt());
                } else {
                    l.set(i, j, sum / l.get(j, j));
                }
            }
        }
        Some(l)
    }

    /// max_ij |(L L^T)_ij - self_ij| for a lower-triangular factor L.
    pub fn reconstruction_error(&self, l: &SquareMatrix) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut v = 0.0;
                for k in 0..=i.min(j) {
                    v += l.get(i, k) * l.get(j, k);
                }
                worst = worst.max((v - self.get(i, j)).abs());
            }
        }
        worst
    }
}
