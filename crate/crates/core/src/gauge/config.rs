//! SO(N) edge configurations and Haar sampling.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use super::lattice_box::{EdgeRef, LatticeBox};

pub type Matrix = DMatrix<f64>;

/// A Haar-distributed element of SO(N).
///
/// QR of a Gaussian matrix, columns rescaled so that R has a positive
/// diagonal, then one column negated when the determinant is −1.
pub fn haar_sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix {
    assert!(n >= 2, "SO(N) needs N >= 2");
    let g = Matrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

/// Pulls a nearly orthogonal matrix back onto SO(N).
pub fn reorthogonalize(q: &Matrix) -> Matrix {
    let qr = q.clone().qr();
    let r = qr.r();
    let mut out = qr.q();
    for j in 0..q.ncols() {
        if r[(j, j)] < 0.0 {
            out.column_mut(j).neg_mut();
        }
    }
    out
}

/// max(max |QᵀQ − I|, |det Q − 1|).
pub fn group_defect(q: &Matrix) -> f64 {
    let n = q.ncols();
    let g = q.transpose() * q - Matrix::identity(n, n);
    let orth = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    orth.max((q.determinant() - 1.0).abs())
}

/// One SO(N) matrix per positive edge of a box; Q_{e⁻¹} is the transpose.
#[derive(Clone, Debug)]
pub struct GaugeConfig {
    n: usize,
    links: Vec<Matrix>,
}

impl GaugeConfig {
    pub fn identity(lattice: &LatticeBox, n: usize) -> Self {
        GaugeConfig { n, links: vec![Matrix::identity(n, n); lattice.edges().len()] }
    }

    pub fn haar<R: Rng + ?Sized>(lattice: &LatticeBox, n: usize, rng: &mut R) -> Self {
        GaugeConfig { n, links: (0..lattice.edges().len()).map(|_| haar_sample(n, rng)).collect() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn links(&self) -> &[Matrix] {
        &self.links
    }

    pub fn link(&self, id: usize) -> &Matrix {
        &self.links[id]
    }

    pub fn link_mut(&mut self, id: usize) -> &mut Matrix {
        &mut self.links[id]
    }

    /// Ordered product of the matrices along `path`.
    pub fn product(&self, path: &[EdgeRef]) -> Matrix {
        let mut acc = Matrix::identity(self.n, self.n);
        let mut tmp = Matrix::zeros(self.n, self.n);
        for &(id, inv) in path {
            if inv {
                acc.mul_to(&self.links[id].transpose(), &mut tmp);
            } else {
                acc.mul_to(&self.links[id], &mut tmp);
            }
            std::mem::swap(&mut acc, &mut tmp);
        }
        acc
    }

    /// Tr of the ordered product, the Wilson loop variable W_l.
    pub fn wilson(&self, path: &[EdgeRef]) -> f64 {
        if path.is_empty() {
            return self.n as f64;
        }
        self.product(path).trace()
    }

    pub fn reorthogonalize(&mut self) {
        for q in &mut self.links {
            *q = reorthogonalize(q);
        }
    }

    pub fn max_group_defect(&self) -> f64 {
        self.links.iter().map(group_defect).fold(0.0, f64::max)
    }
}
