use nalgebra::DMatrix;

use super::check_pair;
use crate::linalg::{sigma_min, sigma_min_complex, spectral_norm};
use crate::{Complex, Error, Matrix, Result};

/// Default grid step as a fraction of the search radius `||A|| + ||H||`.
pub const DEFAULT_GRID_FRACTION: f64 = 0.02;

const MAX_GRID_POINTS: usize = 4_000_000;
const SIMPLEX_MAX_ITER: usize = 2_000;
const SIMPLEX_TOL: f64 = 1e-13;

/// Estimate of the distance to uncontrollability
/// `d(A, H) = inf_{s in C} sigma_min([A - sI, H])`.
///
/// `value` is the pencil's least singular value at `minimizer_s`, so it is an
/// upper bound on `d(A, H)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceEstimate {
    pub value: f64,
    pub minimizer_s: Complex,
    pub grid_resolution: f64,
    pub refined: bool,
    /// Number of pencil evaluations spent.
    pub evaluations: usize,
}

impl DistanceEstimate {
    /// `DEFAULT_GRID_FRACTION * (||A|| + ||H||)`.
    pub fn default_resolution(a: &Matrix, h: &Matrix) -> f64 {
        DEFAULT_GRID_FRACTION * (spectral_norm(a) + spectral_norm(h))
    }
}

/// `sigma_min([A - sI, H])`.
pub fn sigma_min_pencil(a: &Matrix, h: &Matrix, s: Complex) -> f64 {
    let (n, r) = (a.nrows(), h.ncols());
    if s.im == 0.0 {
        let mut m = Matrix::zeros(n, n + r);
        m.columns_mut(0, n).copy_from(a);
        for i in 0..n {
            m[(i, i)] -= s.re;
        }
        m.columns_mut(n, r).copy_from(h);
        return sigma_min(&m);
    }
    let m = DMatrix::<Complex>::from_fn(n, n + r, |i, j| {
        if j < n {
            let v = Complex::new(a[(i, j)], 0.0);
            if i == j {
                v - s
            } else {
                v
            }
        } else {
            Complex::new(h[(i, j - n)], 0.0)
        }
    });
    sigma_min_complex(&m)
}

/// Grid search over the disk `|s| <= ||A|| + ||H||`, optionally followed by a
/// Nelder-Mead refinement started at the best grid point.
///
/// For real `(A, H)` the pencil satisfies `f(conj s) = f(s)`, so only the
/// closed upper half-disk is gridded. Grid points are visited in lexicographic
/// `(Re s, Im s)` order and only a strictly smaller value replaces the
/// incumbent, which fixes the tie-break.
pub fn distance_to_uncontrollability(
    a: &Matrix,
    h: &Matrix,
    grid_resolution: f64,
    refine: bool,
) -> Result<DistanceEstimate> {
    check_pair(a, h)?;
    if !(grid_resolution > 0.0) || !grid_resolution.is_finite() {
        return Err(Error::param("grid_resolution", "must be finite and > 0"));
    }
    let radius = spectral_norm(a) + spectral_norm(h);
    let f = |x: f64, y: f64| sigma_min_pencil(a, h, Complex::new(x, y.abs()));

    let steps = libm::ceil(radius / grid_resolution) as usize;
    if (2 * steps + 1) * (steps + 1) > MAX_GRID_POINTS {
        return Err(Error::param(
            "grid_resolution",
            "too fine for the search radius (more than 4e6 grid points)",
        ));
    }
    let r2 = radius * radius * (1.0 + 1e-12);
    let mut best = (0.0, 0.0);
    let mut best_val = f64::INFINITY;
    let mut evaluations = 0;
    let steps = steps as i64;
    for i in -steps..=steps {
        let x = i as f64 * grid_resolution;
        for j in 0..=steps {
            let y = j as f64 * grid_resolution;
            if x * x + y * y > r2 {
                break;
            }
            let v = f(x, y);
            evaluations += 1;
            if v < best_val {
                best_val = v;
                best = (x, y);
            }
        }
    }

    if refine && best_val > 0.0 {
        let (point, value, evals) = nelder_mead(&f, best, 0.5 * grid_resolution);
        evaluations += evals;
        if value < best_val {
            best_val = value;
            best = point;
        }
    }

    let s = Complex::new(best.0, best.1.abs());
    Ok(DistanceEstimate {
        value: sigma_min_pencil(a, h, s).min(best_val),
        minimizer_s: s,
        grid_resolution,
        refined: refine,
        evaluations,
    })
}

/// Plain Nelder-Mead on R^2 (reflection 1, expansion 2, contraction and
/// shrink 1/2).
fn nelder_mead(
    f: &impl Fn(f64, f64) -> f64,
    start: (f64, f64),
    step: f64,
) -> ((f64, f64), f64, usize) {
    let eval = |p: [f64; 2]| f(p[0], p[1]);
    let mut pts = [
        [start.0, start.1],
        [start.0 + step, start.1],
        [start.0, start.1 + step],
    ];
    let mut vals = [eval(pts[0]), eval(pts[1]), eval(pts[2])];
    let mut evals = 3;

    for _ in 0..SIMPLEX_MAX_ITER {
        // Order: best, middle, worst.
        let mut idx = [0, 1, 2];
        idx.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]).then(i.cmp(&j)));
        pts = [pts[idx[0]], pts[idx[1]], pts[idx[2]]];
        vals = [vals[idx[0]], vals[idx[1]], vals[idx[2]]];

        let diameter = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .map(|(i, j)| {
                let dx = pts[i][0] - pts[j][0];
                let dy = pts[i][1] - pts[j][1];
                libm::sqrt(dx * dx + dy * dy)
            })
            .fold(0.0, f64::max);
        if diameter < SIMPLEX_TOL {
            break;
        }

        let centroid = [
            0.5 * (pts[0][0] + pts[1][0]),
            0.5 * (pts[0][1] + pts[1][1]),
        ];
        let along = |t: f64| {
            [
                centroid[0] + t * (pts[2][0] - centroid[0]),
                centroid[1] + t * (pts[2][1] - centroid[1]),
            ]
        };

        let reflected = along(-1.0);
        let fr = eval(reflected);
        evals += 1;
        if fr < vals[0] {
            let expanded = along(-2.0);
            let fe = eval(expanded);
            evals += 1;
            if fe < fr {
                pts[2] = expanded;
                vals[2] = fe;
            } else {
                pts[2] = reflected;
                vals[2] = fr;
            }
            continue;
        }
        if fr < vals[1] {
            pts[2] = reflected;
            vals[2] = fr;
            continue;
        }
        let (contracted, fc) = if fr < vals[2] {
            let c = along(-0.5);
            (c, eval(c))
        } else {
            let c = along(0.5);
            (c, eval(c))
        };
        evals += 1;
        if fc < vals[2].min(fr) {
            pts[2] = contracted;
            vals[2] = fc;
            continue;
        }
        for k in 1..3 {
            pts[k] = [
                pts[0][0] + 0.5 * (pts[k][0] - pts[0][0]),
                pts[0][1] + 0.5 * (pts[k][1] - pts[0][1]),
            ];
            vals[k] = eval(pts[k]);
        }
        evals += 2;
    }

    let best = (0..3)
        .min_by(|&i, &j| vals[i].total_cmp(&vals[j]).then(i.cmp(&j)))
        .unwrap_or(0);
    ((pts[best][0], pts[best][1]), vals[best], evals)
}

/// Smallest eigenvalue of `T_s = [A - sI, H][A - sI, H]^*` for the perturbed
/// integrator `A = rho (I + S)`, `H = rho e_n`, via its tridiagonal Toeplitz
/// structure:
///
/// `|rho - s|^2 + rho^2 - 2 |rho| |rho - s| cos(pi / (n + 1))`.
pub fn toeplitz_sigma_min(rho: f64, s: Complex, n: usize) -> f64 {
    let gap = (Complex::new(rho, 0.0) - s).norm();
    let c = libm::cos(core::f64::consts::PI / (n as f64 + 1.0));
    gap * gap + rho * rho - 2.0 * rho.abs() * gap * c
}
