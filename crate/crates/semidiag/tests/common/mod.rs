//! Shared test oracles: quadrature, root finding, direct maximization,
//! and a compound Poisson-gamma sampler. All independent of the library's
//! evaluation paths.

#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Gamma as GammaDist, Poisson};

/// Composite Simpson quadrature with a fixed even panel count.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    assert!(panels % 2 == 0 && panels >= 2);
    let h = (b - a) / panels as f64;
    let mut acc = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson_3pt<F: Fn(f64) -> f64>(f: &F, a: f64, m: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
    }
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let left = simpson_3pt(f, a, 0.5 * (a + m), m);
        let right = simpson_3pt(f, m, 0.5 * (m + b), b);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            recurse(f, a, m, left, 0.5 * tol, depth - 1)
                + recurse(f, m, b, right, 0.5 * tol, depth - 1)
        }
    }
    let whole = simpson_3pt(&f, a, 0.5 * (a + b), b);
    recurse(&f, a, b, whole, tol, 48)
}

/// Composite trapezoid rule.
pub fn trapezoid<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut acc = 0.5 * (f(a) + f(b));
    for i in 1..panels {
        acc += f(a + i as f64 * h);
    }
    acc * h
}

/// Bisection root of f on [lo, hi]; f(lo) and f(hi) must differ in sign.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let flo = f(lo);
    assert!(
        flo * f(hi) <= 0.0,
        "bisect: no sign change on [{lo}, {hi}]"
    );
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (flo < 0.0) == (fm < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= tol {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Nelder-Mead minimization, for direct-maximization oracles against
/// closed-form fitting routines. Deliberately simple and derivative-free.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], step: f64, iters: usize) -> Vec<f64> {
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

    for _ in 0..iters {
        // Order best..worst
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
        let (best, worst, second_worst) = (idx[0], idx[n], idx[n - 1]);

        let mut centroid = vec![0.0; n];
        for (i, v) in simplex.iter().enumerate() {
            if i != worst {
                for j in 0..n {
                    centroid[j] += v[j] / n as f64;
                }
            }
        }

        let reflect: Vec<f64> = (0..n)
            .map(|j| centroid[j] + (centroid[j] - simplex[worst][j]))
            .collect();
        let fr = f(&reflect);

        if fr < values[best] {
            let expand: Vec<f64> = (0..n)
                .map(|j| centroid[j] + 2.0 * (centroid[j] - simplex[worst][j]))
                .collect();
            let fe = f(&expand);
            if fe < fr {
                simplex[worst] = expand;
                values[worst] = fe;
            } else {
                simplex[worst] = reflect;
                values[worst] = fr;
            }
        } else if fr < values[second_worst] {
            simplex[worst] = reflect;
            values[worst] = fr;
        } else {
            let contract: Vec<f64> = (0..n)
                .map(|j| centroid[j] + 0.5 * (simplex[worst][j] - centroid[j]))
                .collect();
            let fc = f(&contract);
            if fc < values[worst] {
                simplex[worst] = contract;
                values[worst] = fc;
            } else {
                let best_point = simplex[best].clone();
                for (i, v) in simplex.iter_mut().enumerate() {
                    if i != best {
                        for j in 0..n {
                            v[j] = best_point[j] + 0.5 * (v[j] - best_point[j]);
                        }
                    }
                }
                values = simplex.iter().map(|v| f(v)).collect();
            }
        }

        let spread = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        if spread.1 - spread.0 < 1e-13 {
            break;
        }
    }

    let mut idx: Vec<usize> = (0..=n).collect();
    idx.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
    simplex[idx[0]].clone()
}

/// Draw `n` compound Poisson-gamma variates: Poisson(lambda) count of
/// Gamma(shape, scale) jumps. Independent of the library's samplers.
pub fn sample_cpg(lambda: f64, shape: f64, scale: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let pois = Poisson::new(lambda).unwrap();
    let gamma = GammaDist::new(shape, scale).unwrap();
    (0..n)
        .map(|_| {
            let count = pois.sample(&mut rng) as u64;
            (0..count).map(|_| gamma.sample(&mut rng)).sum()
        })
        .collect()
}

/// Fraction of `samples` that are <= y.
pub fn ecdf_at(samples: &[f64], y: f64) -> f64 {
    samples.iter().filter(|&&s| s <= y).count() as f64 / samples.len() as f64
}

/// Kolmogorov-Smirnov distance between a sample and Uniform(0,1),
/// computed from scratch.
pub fn ks_uniform_naive(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let hi = (i as f64 + 1.0) / n - r;
            let lo = r - i as f64 / n;
            hi.max(lo)
        })
        .fold(0.0, f64::max)
}

/// Deterministic uniform draws for test instances.
pub fn uniform_vec(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(0.0..1.0)).collect()
}

// ------------------------------------------------------------------
// Data generators at the simulation-study parameter values, written
// directly against rand_distr so fitter tests do not depend on the
// library's own simulation module.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Bernoulli, Gamma, Normal, Uniform};

pub fn inv_logit(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// Two-part data: X₁ ~ N(0,1), X₂ ~ Bernoulli(0.4),
/// P(Y=0) = logit⁻¹(β₀ − 2X₁ − X₂), positive part gamma with mean
/// exp(−1 − X₁ − 2X₂) and dispersion 0.5 (shape 2).
pub fn two_part_gamma_data(n: usize, beta0_zero: f64, seed: u64) -> (DMatrix<f64>, DVector<f64>) {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let norm = Normal::new(0.0, 1.0).unwrap();
    let bern = Bernoulli::new(0.4).unwrap();
    let mut design = DMatrix::from_element(n, 3, 1.0);
    let mut y = DVector::zeros(n);
    for i in 0..n {
        let x1 = norm.sample(&mut rng);
        let x2: f64 = if bern.sample(&mut rng) { 1.0 } else { 0.0 };
        design[(i, 1)] = x1;
        design[(i, 2)] = x2;
        let p0 = inv_logit(beta0_zero - 2.0 * x1 - 1.0 * x2);
        if rng.gen::<f64>() < p0 {
            y[i] = 0.0;
        } else {
            let mean = (-1.0 - x1 - 2.0 * x2).exp();
            y[i] = Gamma::new(2.0, mean / 2.0).unwrap().sample(&mut rng);
        }
    }
    (design, y)
}

/// Only the positive part of the two-part generator above (every row
/// positive), for severity-fitter recovery checks.
pub fn severity_gamma_data(n: usize, seed: u64) -> (DMatrix<f64>, DVector<f64>) {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let norm = Normal::new(0.0, 1.0).unwrap();
    let bern = Bernoulli::new(0.4).unwrap();
    let mut design = DMatrix::from_element(n, 3, 1.0);
    let mut y = DVector::zeros(n);
    for i in 0..n {
        let x1 = norm.sample(&mut rng);
        let x2: f64 = if bern.sample(&mut rng) { 1.0 } else { 0.0 };
        design[(i, 1)] = x1;
        design[(i, 2)] = x2;
        let mean = (-1.0 - x1 - 2.0 * x2).exp();
        y[i] = Gamma::new(2.0, mean / 2.0).unwrap().sample(&mut rng);
    }
    (design, y)
}

/// Tobit data: X₁, X₂ ~ Unif(−halfwidth, halfwidth), latent
/// Y* = 2 + 2X₁ + 2X₂ + sd·N(0,1), observed Y = Y*·1(Y* ≥ 0).
pub fn tobit_data(n: usize, sd: f64, halfwidth: f64, seed: u64) -> (DMatrix<f64>, DVector<f64>) {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let unif = Uniform::new(-halfwidth, halfwidth);
    let norm = Normal::new(0.0, 1.0).unwrap();
    let mut design = DMatrix::from_element(n, 3, 1.0);
    let mut y = DVector::zeros(n);
    for i in 0..n {
        let x1 = unif.sample(&mut rng);
        let x2 = unif.sample(&mut rng);
        design[(i, 1)] = x1;
        design[(i, 2)] = x2;
        let latent = 2.0 + 2.0 * x1 + 2.0 * x2 + sd * norm.sample(&mut rng);
        y[i] = if latent < 0.0 { 0.0 } else { latent };
    }
    (design, y)
}

/// GB2 severity data with scale exp(b0 + b1·x) via inverse transform.
pub fn gb2_regression_data(
    n: usize,
    b0: f64,
    b1: f64,
    a: f64,
    p: f64,
    q: f64,
    seed: u64,
) -> (DMatrix<f64>, DVector<f64>) {
    use semidiag::special::{gb2_quantile, Gb2Params};
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let norm = Normal::new(0.0, 1.0).unwrap();
    let mut design = DMatrix::from_element(n, 2, 1.0);
    let mut y = DVector::zeros(n);
    for i in 0..n {
        let x = norm.sample(&mut rng);
        design[(i, 1)] = x;
        let scale = (b0 + b1 * x).exp();
        let params = Gb2Params::new(a, scale, p, q).unwrap();
        let u: f64 = rng.gen_range(0.0..1.0);
        y[i] = gb2_quantile(u, &params).unwrap();
    }
    (design, y)
}

/// Compound Poisson–gamma regression data with mean exp(b0 + b1·x),
/// x ~ N(0,1); sampled from the Poisson-sum definition.
pub fn tweedie_regression_data(
    n: usize,
    b0: f64,
    b1: f64,
    phi: f64,
    power: f64,
    seed: u64,
) -> (DMatrix<f64>, DVector<f64>) {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let norm = Normal::new(0.0, 1.0).unwrap();
    let alpha = (2.0 - power) / (power - 1.0);
    let mut design = DMatrix::from_element(n, 2, 1.0);
    let mut y = DVector::zeros(n);
    for i in 0..n {
        let x = norm.sample(&mut rng);
        design[(i, 1)] = x;
        let mu = (b0 + b1 * x).exp();
        let lambda = mu.powf(2.0 - power) / (phi * (2.0 - power));
        let theta = phi * (power - 1.0) * mu.powf(power - 1.0);
        let count = rand_distr::Poisson::new(lambda).unwrap().sample(&mut rng);
        y[i] = if count == 0.0 {
            0.0
        } else {
            Gamma::new(count * alpha, theta).unwrap().sample(&mut rng)
        };
    }
    (design, y)
}
