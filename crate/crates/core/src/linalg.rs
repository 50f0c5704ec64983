//! Banded matrices, banded LU with partial pivoting, and a Lanczos
//! eigensolver for the lowest eigenpairs of a symmetric operator.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Square band matrix with `kl` sub- and `ku` superdiagonals, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self { n, kl, ku, data: vec![0.0; n * (kl + ku + 1)] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kl(&self) -> usize {
        self.kl
    }

    pub fn ku(&self) -> usize {
        self.ku
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> Option<usize> {
        if j + self.kl < i || j > i + self.ku || i >= self.n || j >= self.n {
            None
        } else {
            Some(i * (self.kl + self.ku + 1) + (j + self.kl - i))
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.idx(i, j).map_or(0.0, |k| self.data[k])
    }

    /// Panics if (i, j) is outside the band.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let k = self.idx(i, j).expect("entry outside band");
        self.data[k] = value;
    }

    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        let k = self.idx(i, j).expect("entry outside band");
        self.data[k] += value;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        let w = self.kl + self.ku + 1;
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            let row = &self.data[i * w..(i + 1) * w];
            let mut acc = 0.0;
            for j in lo..=hi {
                acc += row[j + self.kl - i] * x[j];
            }
            y[i] = acc;
        }
    }

    /// Largest |A_ij − A_ji| over the band.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in i..=(i + self.ku.max(self.kl)).min(self.n - 1) {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn shifted(&self, sigma: f64) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            out.add(i, i, -sigma);
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn lu(&self) -> Result<BandLu> {
        BandLu::factor(self)
    }
}

/// LU factorization with partial pivoting of a band matrix. The upper
/// factor has bandwidth `kl + ku`.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
    piv: Vec<usize>,
}

impl BandLu {
    fn factor(a: &BandMatrix) -> Result<Self> {
        let (n, kl, ku) = (a.n, a.kl, a.ku);
        // row r stores columns r-kl ..= r+kl+ku
        let width = 2 * kl + ku + 1;
        let mut data = vec![0.0; n * width];
        for i in 0..n {
            let lo = i.saturating_sub(kl);
            let hi = (i + ku).min(n - 1);
            for j in lo..=hi {
                data[i * width + j + kl - i] = a.get(i, j);
            }
        }
        let at = |r: usize, c: usize| r * width + c + kl - r;
        let mut piv = vec![0; n];
        let scale = a.data.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = data[at(k, k)].abs();
            for r in k + 1..=last {
                let v = data[at(r, k)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            piv[k] = p;
            if best <= 1e-300 * scale || !best.is_finite() {
                return Err(Error::Singular(k));
            }
            let cmax = (k + kl + ku).min(n - 1);
            if p != k {
                for c in k..=cmax {
                    data.swap(at(k, c), at(p, c));
                }
            }
            let pivot = data[at(k, k)];
            for r in k + 1..=last {
                let l = data[at(r, k)] / pivot;
                data[at(r, k)] = l;
                if l != 0.0 {
                    for c in k + 1..=cmax {
                        data[at(r, c)] -= l * data[at(k, c)];
                    }
                }
            }
        }
        Ok(Self { n, kl, ku, width, data, piv })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let (n, kl, w) = (self.n, self.kl, self.width);
        let at = |r: usize, c: usize| r * w + c + kl - r;
        // forward: apply the row interchanges and multipliers in order
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            if xk != 0.0 {
                for r in k + 1..=(k + kl).min(n - 1) {
                    x[r] -= self.data[at(r, k)] * xk;
                }
            }
        }
        for k in (0..n).rev() {
            let cmax = (k + kl + self.ku).min(n - 1);
            let mut acc = x[k];
            for c in k + 1..=cmax {
                acc -= self.data[at(k, c)] * x[c];
            }
            x[k] = acc / self.data[at(k, k)];
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[derive(Debug, Clone)]
pub struct LanczosResult {
    /// Ritz values of the original operator, ascending.
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    /// Relative Ritz residuals of the shift-inverted operator per pair.
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

/// Lowest `k` eigenpairs of a symmetric operator through Lanczos with full
/// reorthogonalization on the shift-inverted operator `apply_inv`
/// (x ↦ (A − σ)⁻¹ x restricted to the subspace of interest). `project`
/// removes components outside that subspace and is applied to every
/// Krylov vector; pass the identity when no constraint applies.
pub fn lanczos_lowest(
    n: usize,
    k: usize,
    sigma: f64,
    mut apply_inv: impl FnMut(&[f64]) -> Vec<f64>,
    project: impl Fn(&mut [f64]),
    start: &[f64],
    tol: f64,
    max_dim: usize,
) -> Result<LanczosResult> {
    let max_dim = max_dim.min(n);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut q = start.to_vec();
    project(&mut q);
    let nq = norm(&q);
    if nq == 0.0 {
        return Err(Error::EigenNotConverged { message: "zero start vector".into(), trace: vec![] });
    }
    q.iter_mut().for_each(|x| *x /= nq);
    let mut trace = Vec::new();
    loop {
        let mut w = apply_inv(&q);
        project(&mut w);
        let a = dot(&q, &w);
        axpy(-a, &q, &mut w);
        if let Some(prev) = basis.last() {
            axpy(-beta[beta.len() - 1], prev, &mut w);
        }
        basis.push(q.clone());
        alpha.push(a);
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                axpy(-c, v, &mut w);
            }
        }
        let b = norm(&w);
        let m = basis.len();
        if m >= k {
            let t = DMatrix::from_fn(m, m, |i, j| {
                if i == j {
                    alpha[i]
                } else if i + 1 == j {
                    beta[i]
                } else if j + 1 == i {
                    beta[j]
                } else {
                    0.0
                }
            });
            let eig = SymmetricEigen::new(t);
            // largest eigenvalues of the inverse are the lowest of A
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
            let theta: Vec<f64> = order.iter().take(k).map(|&i| eig.eigenvalues[i]).collect();
            let res: Vec<f64> = order
                .iter()
                .take(k)
                .map(|&i| (b * eig.eigenvectors[(m - 1, i)]).abs())
                .collect();
            let worst = theta
                .iter()
                .zip(&res)
                .map(|(t, r)| r / t.abs().max(1e-300))
                .fold(0.0f64, f64::max);
            trace.push(worst);
            let stalled = b < 1e-14 * theta[0].abs().max(1e-300);
            if worst < tol || stalled || m >= max_dim {
                if worst >= tol && !stalled && m < n {
                    return Err(Error::EigenNotConverged {
                        message: format!("Lanczos reached dimension {m} with relative residual {worst:.3e}"),
                        trace,
                    });
                }
                let mut values = Vec::with_capacity(k);
                let mut vectors = Vec::with_capacity(k);
                let mut residuals = Vec::with_capacity(k);
                for (c, &i) in order.iter().take(k).enumerate() {
                    let th = eig.eigenvalues[i];
                    values.push(sigma + 1.0 / th);
                    let mut v = vec![0.0; n];
                    for (j, bj) in basis.iter().enumerate() {
                        axpy(eig.eigenvectors[(j, i)], bj, &mut v);
                    }
                    let nv = norm(&v);
                    v.iter_mut().for_each(|x| *x /= nv);
                    vectors.push(v);
                    residuals.push(res[c] / th);
                }
                let mut idx: Vec<usize> = (0..values.len()).collect();
                idx.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
                return Ok(LanczosResult {
                    values: idx.iter().map(|&i| values[i]).collect(),
                    vectors: idx.iter().map(|&i| vectors[i].clone()).collect(),
                    residuals: idx.iter().map(|&i| residuals[i]).collect(),
                    iterations: m,
                });
            }
        }
        if b == 0.0 {
            return Err(Error::EigenNotConverged {
                message: format!("invariant subspace of dimension {m} found before {k} pairs converged"),
                trace,
            });
        }
        beta.push(b);
        q = w.iter().map(|x| x / b).collect();
    }
}

/// Dense symmetric eigendecomposition, eigenvalues ascending.
pub fn dense_symmetric_eigen(a: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(a);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}
