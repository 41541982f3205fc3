//! Metropolis updates for the Wilson action exp(Nβ Σ_{p∈𝒫⁺_Λ} Tr Q_p).

use rand::Rng;

use super::config::{GaugeConfig, Matrix};
use super::lattice_box::{EdgeRef, LatticeBox};

/// Precomputed staples for a box: for every positive edge `e` and every
/// plaquette through `e` or `e⁻¹`, the three other edges read so that the
/// plaquette trace equals `Tr(Q_e · staple)`.
#[derive(Clone, Debug)]
pub struct Metropolis {
    staples: Vec<Vec<[EdgeRef; 3]>>,
    plaquettes: Vec<[EdgeRef; 4]>,
    beta: f64,
}

impl Metropolis {
    pub fn new(lattice: &LatticeBox, beta: f64) -> Self {
        let mut staples = vec![Vec::new(); lattice.edges().len()];
        let flip = |r: EdgeRef| (r.0, !r.1);
        for p in lattice.plaquettes() {
            for j in 0..4 {
                let (id, inv) = p[j];
                let (a, b, c) = (p[(j + 1) % 4], p[(j + 2) % 4], p[(j + 3) % 4]);
                staples[id].push(if inv { [flip(c), flip(b), flip(a)] } else { [a, b, c] });
            }
        }
        Metropolis { staples, plaquettes: lattice.plaquettes().to_vec(), beta }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Σ_{p∈𝒫⁺_Λ} Tr Q_p.
    pub fn action(&self, cfg: &GaugeConfig) -> f64 {
        self.plaquettes.iter().map(|p| cfg.wilson(p)).sum()
    }

    /// Mean of Tr Q_p / N over the box plaquettes.
    pub fn mean_plaquette(&self, cfg: &GaugeConfig) -> f64 {
        if self.plaquettes.is_empty() {
            return 0.0;
        }
        self.action(cfg) / (self.plaquettes.len() as f64 * cfg.n() as f64)
    }

    fn staple_sum(&self, cfg: &GaugeConfig, id: usize) -> Matrix {
        let n = cfg.n();
        let mut s = Matrix::zeros(n, n);
        for st in &self.staples[id] {
            s += cfg.product(st);
        }
        s
    }

    /// One proposal per edge in id order; returns the acceptance rate.
    ///
    /// The proposal left-multiplies Q_e by a rotation in a uniformly chosen
    /// coordinate plane with angle uniform in (−step_size, step_size).
    pub fn sweep<R: Rng + ?Sized>(&self, cfg: &mut GaugeConfig, step_size: f64, rng: &mut R) -> f64 {
        let n = cfg.n();
        let nb = n as f64 * self.beta;
        let mut accepted = 0usize;
        for id in 0..self.staples.len() {
            let p0 = rng.random_range(0..n);
            let mut q0 = rng.random_range(0..n - 1);
            if q0 >= p0 {
                q0 += 1;
            }
            let (p, q) = (p0.min(q0), p0.max(q0));
            let theta = step_size * (2.0 * rng.random::<f64>() - 1.0);
            let u: f64 = rng.random();
            let (s, c) = theta.sin_cos();
            let delta = if nb == 0.0 || self.staples[id].is_empty() {
                0.0
            } else {
                let st = self.staple_sum(cfg, id);
                let qe = cfg.link(id);
                // M = Q_e S; only four entries are needed.
                let m = |r: usize, col: usize| qe.row(r).dot(&st.column(col).transpose());
                (c - 1.0) * (m(p, p) + m(q, q)) + s * (m(p, q) - m(q, p))
            };
            if u < (nb * delta).exp() {
                let qe = cfg.link_mut(id);
                for j in 0..n {
                    let (a, b) = (qe[(p, j)], qe[(q, j)]);
                    qe[(p, j)] = c * a - s * b;
                    qe[(q, j)] = s * a + c * b;
                }
                accepted += 1;
            }
        }
        if self.staples.is_empty() {
            1.0
        } else {
            accepted as f64 / self.staples.len() as f64
        }
    }
}

/// Multiplicative step-size update toward 50% acceptance.
pub fn tune_step_size(step_size: f64, acceptance: f64) -> f64 {
    (step_size * (2.0 * (acceptance - 0.5)).exp()).clamp(1e-4, std::f64::consts::PI)
}

/// Convenience wrapper performing a single sweep.
pub fn metropolis_sweep<R: Rng + ?Sized>(
    lattice: &LatticeBox,
    cfg: &mut GaugeConfig,
    beta: f64,
    step_size: f64,
    rng: &mut R,
) -> f64 {
    Metropolis::new(lattice, beta).sweep(cfg, step_size, rng)
}
