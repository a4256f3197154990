//! Seeded random instances shared by the integration tests.
#![allow(dead_code)]

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use sysid_core::linalg::spectral_radius;
use sysid_core::Matrix;

pub struct Rng(ChaCha8Rng);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `lo..=hi`.
    pub fn int(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.0.next_u64() % (hi - lo + 1) as u64) as usize
    }

    /// Standard normal by Box-Muller; test data only needs to be reproducible.
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    pub fn gaussian(&mut self, rows: usize, cols: usize) -> Matrix {
        Matrix::from_fn(rows, cols, |_, _| self.normal())
    }

    pub fn orthogonal(&mut self, n: usize) -> Matrix {
        self.gaussian(n, n).qr().q()
    }

    /// Matrix with orthonormal rows or columns scaled by singular values drawn
    /// from `[lo, hi]`.
    pub fn conditioned(&mut self, rows: usize, cols: usize, lo: f64, hi: f64) -> Matrix {
        let k = rows.min(cols);
        let left = self.orthogonal(rows);
        let right = self.orthogonal(cols);
        let mut s = Matrix::zeros(rows, cols);
        for i in 0..k {
            s[(i, i)] = self.range(lo, hi);
        }
        left * s * right.transpose()
    }

    /// Random `A` with spectral radius in `[0.2, 1]`.
    pub fn stable(&mut self, n: usize) -> Matrix {
        let a = self.gaussian(n, n);
        let rho = spectral_radius(&a);
        let target = self.range(0.2, 1.0);
        if rho > 0.0 {
            a * (target / rho)
        } else {
            a
        }
    }
}

/// A controllable pair built in rotated staircase form, together with the
/// block sizes it was built from.
pub struct StaircasePair {
    pub a: Matrix,
    pub h: Matrix,
    pub blocks: Vec<usize>,
}

/// Non-increasing block sizes with `r_1 <= 3` summing to `n`.
pub fn random_blocks(rng: &mut Rng, n: usize) -> Vec<usize> {
    let mut blocks = vec![rng.int(1, 3.min(n))];
    let mut total = blocks[0];
    while total < n {
        let r = rng.int(1, *blocks.last().unwrap()).min(n - total);
        blocks.push(r);
        total += r;
    }
    blocks
}

/// Staircase form with couplings whose singular values lie in `[0.4, 1]`,
/// rotated by a random orthogonal matrix.
pub fn random_controllable(rng: &mut Rng, n: usize) -> StaircasePair {
    let blocks = random_blocks(rng, n);
    let offsets: Vec<usize> = blocks
        .iter()
        .scan(0, |acc, &r| {
            let o = *acc;
            *acc += r;
            Some(o)
        })
        .collect();
    let mut at = Matrix::zeros(n, n);
    for (i, &ri) in blocks.iter().enumerate() {
        for (j, &rj) in blocks.iter().enumerate() {
            if i == j + 1 {
                let c = rng.conditioned(ri, rj, 0.4, 1.0);
                at.view_mut((offsets[i], offsets[j]), (ri, rj)).copy_from(&c);
            } else if i <= j {
                let g = rng.gaussian(ri, rj) * 0.3;
                at.view_mut((offsets[i], offsets[j]), (ri, rj)).copy_from(&g);
            }
        }
    }
    let r1 = blocks[0];
    let mut ht = Matrix::zeros(n, r1);
    ht.view_mut((0, 0), (r1, r1))
        .copy_from(&rng.conditioned(r1, r1, 0.4, 1.0));
    let q = rng.orthogonal(n);
    StaircasePair {
        a: &q * at * q.transpose(),
        h: q * ht,
        blocks,
    }
}
