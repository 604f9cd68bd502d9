//! Monte Carlo cross-validation with random matrices.
//!
//! For integer t, the spectrum of the iterated product
//! M₁ = D₁, M_{k+1} = M_k^{1/2} (U_k D_k U_kᵀ) M_k^{1/2}
//! approximates μ^{⊠t} as the matrix size grows: each D_k is a diagonal of
//! i.i.d. μ-samples and each U_k is Haar-orthogonal. Orthogonal conjugation
//! suffices for the spectral statistics checked here.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Error;
use crate::measure::MeasureSpec;
use crate::regvar::{FitQuality, RegVarFit};
use crate::Result;

/// Documented seed split: replicate r uses splitmix64(seed ⊕ (r+1)·golden).
pub fn replicate_seed(seed: u64, rep: usize) -> u64 {
    splitmix64(seed ^ (rep as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Standard normal via Box–Muller (keeps the dependency set small and the
/// stream reproducible).
fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u1: f64 = rng.random();
        if u1 <= f64::MIN_POSITIVE {
            continue;
        }
        let u2: f64 = rng.random();
        return (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
    }
}

/// Haar-orthogonal matrix: QR of a Gaussian matrix with the R diagonal signs
/// pushed into Q.
fn haar_orthogonal<R: Rng>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| gaussian(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

/// Symmetric square root via eigendecomposition (eigenvalues clamped at 0).
fn sym_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    for v in eig.eigenvalues.iter() {
        if !v.is_finite() {
            return Err(Error::EigensolverFailure("non-finite eigenvalue".into()));
        }
    }
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        d[(i, i)] = eig.eigenvalues[i].max(0.0).sqrt();
    }
    Ok(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

/// Eigenvalues of the t-fold product for one replicate.
fn one_replicate(m: &MeasureSpec, t: usize, n: usize, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d1 = m.sample_with(n, &mut rng)?;
    if t == 1 {
        return Ok(d1);
    }
    // M₁ = D₁ is diagonal; its square root is free.
    let mut current = DMatrix::from_fn(n, n, |i, j| if i == j { d1[i] } else { 0.0 });
    for step in 2..=t {
        let dk = m.sample_with(n, &mut rng)?;
        let u = haar_orthogonal(n, &mut rng);
        // U D U^T.
        let mut ud = u.clone();
        for j in 0..n {
            for i in 0..n {
                ud[(i, j)] *= dk[j];
            }
        }
        let conj = &ud * u.transpose();
        let root = if step == 2 {
            // Diagonal shortcut.
            DMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    current[(i, i)].max(0.0).sqrt()
                } else {
                    0.0
                }
            })
        } else {
            sym_sqrt(&current)?
        };
        let prod = &root * conj * &root;
        current = (&prod + prod.transpose()) * 0.5;
    }
    let eig = current.symmetric_eigen();
    let mut out: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    for v in out.iter_mut() {
        if !v.is_finite() {
            return Err(Error::EigensolverFailure("non-finite eigenvalue".into()));
        }
        if *v < -1e-10 {
            return Err(Error::EigensolverFailure(format!(
                "eigenvalue {v} below the −1e−10 positivity floor"
            )));
        }
        *v = v.max(0.0);
    }
    Ok(out)
}

/// All N·reps eigenvalues of the t-fold product ensemble; deterministic for
/// a given seed, with replicates independent and run in parallel.
pub fn product_spectrum(
    m: &MeasureSpec,
    t: usize,
    n: usize,
    reps: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if t == 0 {
        return Err(Error::InvalidSpec("t must be >= 1".into()));
    }
    if n == 0 || reps == 0 {
        return Err(Error::InvalidSpec("need n >= 1 and reps >= 1".into()));
    }
    let results: Vec<Result<Vec<f64>>> = (0..reps)
        .into_par_iter()
        .map(|rep| one_replicate(m, t, n, replicate_seed(seed, rep)))
        .collect();
    let mut out = Vec::with_capacity(n * reps);
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

/// Hill estimate on the top-k order statistics, with the tail constant read
/// off as the median of (rank/n)·x^α̂ over the used statistics.
pub fn hill_fit(samples: &[f64], k: usize) -> Result<RegVarFit> {
    let mut xs: Vec<f64> = samples.iter().copied().filter(|&x| x > 0.0).collect();
    let n = xs.len();
    if k == 0 || k + 1 > n {
        return Err(Error::TooFewSamples { k, n });
    }
    xs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let threshold = xs[k]; // X_{(k+1)}
    if threshold <= 0.0 {
        return Err(Error::TooFewSamples { k, n });
    }
    let mean_log: f64 = xs[..k].iter().map(|&x| (x / threshold).ln()).sum::<f64>() / k as f64;
    if mean_log <= 0.0 {
        return Err(Error::NotRegularlyVarying(
            "top order statistics are ties".into(),
        ));
    }
    let alpha = 1.0 / mean_log;

    let mut consts: Vec<f64> = (0..k)
        .map(|i| ((i + 1) as f64 / n as f64) * xs[i].powf(alpha))
        .collect();
    consts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let constant = if k % 2 == 1 {
        consts[k / 2]
    } else {
        0.5 * (consts[k / 2 - 1] + consts[k / 2])
    };

    let residuals: Vec<f64> = (0..k)
        .map(|i| (((i + 1) as f64 / n as f64) * xs[i].powf(alpha) / constant).ln())
        .collect();
    let spread = residuals.iter().fold(0.0_f64, |a, r| a.max(r.abs()));
    Ok(RegVarFit {
        index: alpha,
        constant,
        residuals,
        grid: xs[..k].to_vec(),
        quality: if spread < 1.0 {
            FitQuality::Good
        } else {
            FitQuality::Degraded
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_mass_spectrum_is_one() {
        let m = MeasureSpec::point_mass(1.0).unwrap();
        for t in [1usize, 2, 3] {
            let eig = product_spectrum(&m, t, 16, 2, 7).unwrap();
            for v in eig {
                assert!((v - 1.0).abs() < 1e-10, "t={t}: {v}");
            }
        }
    }

    #[test]
    fn t1_is_the_raw_sample() {
        let m = MeasureSpec::pareto(3.0).unwrap();
        let eig = product_spectrum(&m, 1, 32, 1, 99).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(replicate_seed(99, 0));
        let direct = m.sample_with(32, &mut rng).unwrap();
        assert_eq!(eig, direct);
    }

    #[test]
    fn deterministic_per_seed() {
        let m = MeasureSpec::pareto(3.0).unwrap();
        let a = product_spectrum(&m, 2, 24, 3, 1234).unwrap();
        let b = product_spectrum(&m, 2, 24, 3, 1234).unwrap();
        assert_eq!(a, b);
        let c = product_spectrum(&m, 2, 24, 3, 1235).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn spectrum_nonnegative_and_trace_consistent() {
        // Mean eigenvalue of the t = 2 product ≈ m₁(μ)² when m₂ < ∞.
        let m = MeasureSpec::pareto(4.0).unwrap(); // m₁ = 4/3, m₂ = 2 < ∞
        let n = 48;
        let reps = 40;
        let eig = product_spectrum(&m, 2, n, reps, 5).unwrap();
        assert!(eig.iter().all(|&v| v >= 0.0));
        let rep_means: Vec<f64> = eig
            .chunks(n)
            .map(|c| c.iter().sum::<f64>() / n as f64)
            .collect();
        let mean = rep_means.iter().sum::<f64>() / reps as f64;
        let var = rep_means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        let se = (var / reps as f64).sqrt();
        let expect = (4.0f64 / 3.0).powi(2);
        assert!(
            (mean - expect).abs() < 3.0 * se.max(1e-6),
            "mean {mean} vs {expect} (se {se})"
        );
    }

    #[test]
    fn hill_on_exact_power_sample() {
        // xᵢ = (i/n)^{−1/2}: index 2 within 0.05 at n = 1e4, k = 500.
        let n = 10_000;
        let xs: Vec<f64> = (1..=n).map(|i| (i as f64 / n as f64).powf(-0.5)).collect();
        let fit = hill_fit(&xs, 500).unwrap();
        assert!((fit.index - 2.0).abs() < 0.05, "{}", fit.index);
        assert!((fit.constant - 1.0).abs() < 0.05, "{}", fit.constant);
    }

    #[test]
    fn hill_on_pareto_sample() {
        // Exact Pareto has no Hill bias; k = 4000 puts the sampling standard
        // error near 0.03, well inside the 0.1 band.
        let m = MeasureSpec::pareto(2.0).unwrap();
        let xs = m.sample(100_000, 31).unwrap();
        let fit = hill_fit(&xs, 4000).unwrap();
        assert!((fit.index - 2.0).abs() < 0.1, "{}", fit.index);
    }

    #[test]
    fn hill_rejects_k_too_large() {
        let xs = vec![1.0, 2.0, 3.0];
        assert!(matches!(hill_fit(&xs, 3), Err(Error::TooFewSamples { .. })));
        assert!(matches!(hill_fit(&xs, 0), Err(Error::TooFewSamples { .. })));
    }

    #[test]
    fn haar_matrix_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let q = haar_orthogonal(24, &mut rng);
        let qtq = q.transpose() * &q;
        for i in 0..24 {
            for j in 0..24 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((qtq[(i, j)] - expect).abs() < 1e-10);
            }
        }
    }
}
