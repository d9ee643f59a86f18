//! Slow, independent reference computations for the test suites. Nothing in
//! here shares code with the library under test; inputs and outputs are
//! plain `f64` data or nalgebra types.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn mat(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(n, m, |i, j| rows[i][j])
}

pub fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

/// Raw data of a quadratic manipulation instance.
#[derive(Clone, Debug)]
pub struct GameData {
    pub u: Vec<f64>,
    pub r: Vec<f64>,
    pub h: Vec<Vec<f64>>,
    pub q: f64,
}

impl GameData {
    /// `H + 2qI + α(I − uuᵀ/‖u‖²)`
    pub fn k_alpha(&self, alpha: f64) -> DMatrix<f64> {
        let p = self.u.len();
        let u = DVector::from_vec(self.u.clone());
        let perp = DMatrix::identity(p, p) - &u * u.transpose() / u.norm_squared();
        mat(&self.h) + DMatrix::identity(p, p) * (2.0 * self.q) + perp * alpha
    }
}

pub fn gaussian_vec(rng: &mut ChaCha8Rng, p: usize) -> Vec<f64> {
    (0..p).map(|_| StandardNormal.sample(rng)).collect()
}

/// Random PSD matrix `AᵀA/p`, rank deficient about one time in four.
pub fn random_psd(rng: &mut ChaCha8Rng, p: usize) -> Vec<Vec<f64>> {
    let rank = if rng.gen_bool(0.25) && p > 1 { rng.gen_range(1..p) } else { p };
    let a: DMatrix<f64> = DMatrix::from_fn(rank, p, |_, _| StandardNormal.sample(rng));
    let h: DMatrix<f64> = a.transpose() * a / p as f64;
    let h = (&h + h.transpose()) * 0.5;
    rows(&h)
}

/// Random instance with curvature damping `q ∈ [0.05, 1]`.
pub fn random_game(rng: &mut ChaCha8Rng, p: usize) -> GameData {
    GameData {
        u: gaussian_vec(rng, p),
        r: gaussian_vec(rng, p),
        h: random_psd(rng, p),
        q: rng.gen_range(0.05..1.0),
    }
}

fn objective(g: &GameData, k: &DMatrix<f64>, z: &DVector<f64>) -> f64 {
    let r = DVector::from_vec(g.r.clone());
    r.dot(z) - 0.5 * z.dot(&(k * z))
}

fn project(u: &DVector<f64>, z: &DVector<f64>) -> DVector<f64> {
    let uz = u.dot(z);
    if uz > 0.0 {
        z - u * (uz / u.norm_squared())
    } else {
        z.clone()
    }
}

/// Result of an oracle search for `max G(z) − ½α‖P⊥z‖²` s.t. `uᵀz ≤ 0`.
#[derive(Clone, Debug)]
pub struct QpOptimum {
    pub z: Vec<f64>,
    pub value: f64,
}

/// Dense grid over `[−3‖K_α⁻¹r‖, 3‖K_α⁻¹r‖]^p` (61 points per axis, `p ≤ 3`)
/// or 64 random starts (`p ≥ 4`), each refined by Nelder–Mead on the
/// objective composed with projection onto the feasible half-space.
pub fn brute_force_qp(g: &GameData, alpha: f64, rng: &mut ChaCha8Rng) -> QpOptimum {
    let p = g.u.len();
    let k = g.k_alpha(alpha);
    let u = DVector::from_vec(g.u.clone());
    let r = DVector::from_vec(g.r.clone());
    let radius = 3.0 * k.clone().lu().solve(&r).map_or(1.0, |x| x.norm()).max(1e-6);
    let f = |z: &DVector<f64>| -objective(g, &k, &project(&u, z));

    let mut starts: Vec<DVector<f64>> = Vec::new();
    if p <= 3 {
        let pts = 61usize;
        let total = pts.pow(p as u32);
        let mut best = (f64::INFINITY, DVector::zeros(p));
        for idx in 0..total {
            let mut rem = idx;
            let z = DVector::from_fn(p, |_, _| {
                let t = rem % pts;
                rem /= pts;
                -radius + 2.0 * radius * t as f64 / (pts - 1) as f64
            });
            if u.dot(&z) > 0.0 {
                continue;
            }
            let v = f(&z);
            if v < best.0 {
                best = (v, z);
            }
        }
        starts.push(best.1);
    } else {
        for _ in 0..64 {
            starts.push(DVector::from_fn(p, |_, _| rng.gen_range(-radius..radius)));
        }
    }
    let mut best = (f64::INFINITY, DVector::zeros(p));
    for s in starts {
        let mut z = s;
        // Restarting shrinks the effect of simplex collapse.
        for round in 0..4 {
            z = nelder_mead(&f, &z, radius * 0.1f64.powi(round + 1), 4000);
        }
        let v = f(&z);
        if v < best.0 {
            best = (v, z);
        }
    }
    let z = project(&u, &best.1);
    QpOptimum { value: objective(g, &k, &z), z: z.iter().copied().collect() }
}

/// Projected gradient ascent with step `1/λ_max(K_α)`.
pub fn projected_gradient_qp(g: &GameData, alpha: f64) -> QpOptimum {
    let p = g.u.len();
    let k = g.k_alpha(alpha);
    let u = DVector::from_vec(g.u.clone());
    let r = DVector::from_vec(g.r.clone());
    let lmax = SymmetricEigen::new(k.clone()).eigenvalues.max();
    let step = 1.0 / lmax;
    let mut z = DVector::zeros(p);
    for _ in 0..2_000_000 {
        let next = project(&u, &(&z + (&r - &k * &z) * step));
        let moved = (&next - &z).norm();
        z = next;
        if moved < 1e-15 * (1.0 + z.norm()) {
            break;
        }
    }
    QpOptimum { value: objective(g, &k, &z), z: z.iter().copied().collect() }
}

/// Minimizes `f` by the Nelder–Mead simplex method.
pub fn nelder_mead(f: &impl Fn(&DVector<f64>) -> f64, x0: &DVector<f64>, scale: f64, max_iter: usize) -> DVector<f64> {
    let n = x0.len();
    let mut simplex: Vec<(f64, DVector<f64>)> = (0..=n)
        .map(|i| {
            let mut x = x0.clone();
            if i > 0 {
                x[i - 1] += scale;
            }
            (f(&x), x)
        })
        .collect();
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.0.total_cmp(&b.0));
        let spread = simplex[n].0 - simplex[0].0;
        let size = simplex.iter().map(|(_, x)| (x - &simplex[0].1).norm()).fold(0.0, f64::max);
        if spread.abs() < 1e-15 && size < 1e-12 {
            break;
        }
        let centroid = simplex[..n].iter().fold(DVector::zeros(n), |acc, (_, x)| acc + x) / n as f64;
        let worst = simplex[n].1.clone();
        let xr = &centroid + (&centroid - &worst);
        let fr = f(&xr);
        if fr < simplex[0].0 {
            let xe = &centroid + (&xr - &centroid) * 2.0;
            let fe = f(&xe);
            simplex[n] = if fe < fr { (fe, xe) } else { (fr, xr) };
        } else if fr < simplex[n - 1].0 {
            simplex[n] = (fr, xr);
        } else {
            let xc = if fr < simplex[n].0 {
                &centroid + (&xr - &centroid) * 0.5
            } else {
                &centroid + (&worst - &centroid) * 0.5
            };
            let fc = f(&xc);
            if fc < simplex[n].0.min(fr) {
                simplex[n] = (fc, xc);
            } else {
                let best = simplex[0].1.clone();
                for item in simplex.iter_mut().skip(1) {
                    let x = &best + (&item.1 - &best) * 0.5;
                    *item = (f(&x), x);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.0.total_cmp(&b.0));
    simplex.swap_remove(0).1
}

/// Smallest eigenvalue of a PSD matrix by inverse iteration on `A + I`,
/// finished with a Rayleigh quotient.
pub fn min_eigenvalue_inverse_iteration(a: &[Vec<f64>], rng: &mut ChaCha8Rng) -> f64 {
    let m = mat(a);
    let p = m.nrows();
    let shifted = &m + DMatrix::identity(p, p);
    let lu = shifted.lu();
    let mut x = DVector::from_vec(gaussian_vec(rng, p));
    x /= x.norm();
    let mut last = f64::INFINITY;
    for _ in 0..100_000 {
        let y = lu.solve(&x).expect("A + I is nonsingular for PSD A");
        x = &y / y.norm();
        let rq = x.dot(&(&m * &x));
        if (rq - last).abs() < 1e-15 * (1.0 + rq.abs()) {
            return rq;
        }
        last = rq;
    }
    last
}

pub fn sym_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(mat(a)).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Singular values, descending, padded with zeros to the column count.
pub fn singular_values(a: &[Vec<f64>]) -> Vec<f64> {
    let m = mat(a);
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.resize(m.ncols(), 0.0);
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Best coverage value over every budget-feasible subset, by bitmask.
pub fn brute_force_coverage(costs: &[f64], budget: f64, weights: &[f64], probs: &[Vec<f64>]) -> f64 {
    let m = costs.len();
    let mut best = 0.0f64;
    for mask in 0u32..(1 << m) {
        let cost: f64 = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| costs[i]).sum();
        if cost > budget {
            continue;
        }
        let value: f64 = weights
            .iter()
            .enumerate()
            .map(|(j, w)| {
                let miss: f64 = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| 1.0 - probs[i][j]).product();
                w * (1.0 - miss)
            })
            .sum();
        best = best.max(value);
    }
    best
}
