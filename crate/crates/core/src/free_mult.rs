//! Free multiplicative combination of S-transforms.
//!
//! S_{μ⊠ν} = S_μ·S_ν extends to fractional convolution powers μ^{⊠t}, t ≥ 1,
//! with S_{μ^{⊠t}} = S_μ^t; a combination is any product ∏ S_i^{t_i}. The
//! combined handle evaluates in log space and exposes ψ of the combined
//! measure by inverting χ(w) = w·S(w)/(1+w).

use crate::error::Error;
use crate::regvar::{LogPowerSv, Regime, TailAsymptotic};
use crate::transforms::STransformHandle;
use crate::Result;

/// Combine parts into the handle of ⊠ᵢ μᵢ^{⊠tᵢ}; every exponent must be ≥ 1.
/// The domain of the result is (max δᵢ − 1, 0).
pub fn s_combine(parts: Vec<(STransformHandle, f64)>) -> Result<STransformHandle> {
    STransformHandle::product(parts)
}

/// Convolution power μ^{⊠t} of a single handle.
pub fn s_power(h: &STransformHandle, t: f64) -> Result<STransformHandle> {
    s_combine(vec![(h.clone(), t)])
}

/// ψ of the combined measure at z < 0: solves w·S(w)/(1+w) = z for w.
pub fn psi_of_combination(h: &STransformHandle, z: f64) -> Result<f64> {
    h.psi(z)
}

/// Breiman-type prediction: if μ̄(x) ~ c·x^{−α} and m₁(ν) < ∞, then
/// (μ⊠ν)((x,∞)) ~ m₁(ν)^α·μ̄(x).
pub fn breiman_predict(alpha: f64, tail_constant: f64, m1_nu: f64) -> Result<TailAsymptotic> {
    if !(alpha >= 0.0) {
        return Err(Error::RegimeMismatch(format!("index {alpha} < 0")));
    }
    if !(m1_nu.is_finite() && m1_nu > 0.0) {
        return Err(Error::RegimeMismatch(format!(
            "Breiman factor needs finite m₁(ν), got {m1_nu}"
        )));
    }
    let regime = if alpha == 0.0 {
        Regime::Slow
    } else if alpha < 1.0 {
        Regime::Alpha01
    } else if alpha == 1.0 {
        Regime::Alpha1Critical
    } else {
        Regime::FiniteMean
    };
    Ok(TailAsymptotic {
        index: alpha,
        sv: LogPowerSv::constant_fn(tail_constant * m1_nu.powf(alpha))?,
        regime,
        pi_ref: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::MeasureSpec;
    use crate::transforms::{psi_eval, ClosedFormTag};

    fn pm(a: f64) -> STransformHandle {
        STransformHandle::closed(ClosedFormTag::PointMass { a })
    }

    #[test]
    fn point_masses_multiply() {
        // δ_a ⊠ δ_b = δ_{ab}: S ≡ 1/(ab).
        let h = s_combine(vec![(pm(2.0), 1.0), (pm(3.0), 1.0)]).unwrap();
        for &w in &[-0.8, -0.5, -0.2] {
            assert!((h.s(w).unwrap() - 1.0 / 6.0).abs() < 1e-14);
        }
    }

    #[test]
    fn single_part_identity() {
        let base = STransformHandle::closed(ClosedFormTag::FreePoisson);
        let h = s_combine(vec![(base.clone(), 1.0)]).unwrap();
        for &w in &[-0.9, -0.5, -0.1] {
            assert_eq!(h.s(w).unwrap(), base.s(w).unwrap());
        }
    }

    #[test]
    fn free_poisson_squared() {
        let h = s_power(&STransformHandle::closed(ClosedFormTag::FreePoisson), 2.0).unwrap();
        let v = h.s(-0.5).unwrap();
        assert!((v - 4.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn rejects_exponent_below_one() {
        let r = s_power(&pm(2.0), 0.7);
        assert!(matches!(r, Err(Error::ExponentBelowOne(_))));
    }

    #[test]
    fn commutative_associative_pointwise() {
        let a = STransformHandle::closed(ClosedFormTag::FreePoisson);
        let b = pm(2.0);
        let c = STransformHandle::numeric(MeasureSpec::pareto(3.0).unwrap()).unwrap();
        let h1 = s_combine(vec![(a.clone(), 1.5), (b.clone(), 1.0), (c.clone(), 2.0)]).unwrap();
        let h2 = s_combine(vec![(c, 2.0), (a, 1.5), (b, 1.0)]).unwrap();
        for &w in &[-0.7, -0.3] {
            let x = h1.s(w).unwrap();
            let y = h2.s(w).unwrap();
            assert!((x - y).abs() <= 1e-12 * x.abs(), "{x} vs {y}");
        }
    }

    #[test]
    fn exponent_additivity() {
        let base = STransformHandle::numeric(MeasureSpec::pareto(2.0).unwrap()).unwrap();
        let nested = s_combine(vec![(base.clone(), 1.5), (base.clone(), 2.0)]).unwrap();
        let flat = s_power(&base, 3.5).unwrap();
        for &w in &[-0.6, -0.2] {
            let x = nested.s(w).unwrap();
            let y = flat.s(w).unwrap();
            assert!((x - y).abs() <= 1e-12 * x.abs(), "{x} vs {y}");
        }
    }

    #[test]
    fn psi_of_point_mass_power() {
        // δ₂ at t = 2 is δ₄: ψ(−1) = −4/5.
        let h = s_power(&pm(2.0), 2.0).unwrap();
        let v = psi_of_combination(&h, -1.0).unwrap();
        assert!((v + 0.8).abs() < 1e-10, "{v}");
    }

    #[test]
    fn psi_of_combination_roundtrips_at_t1() {
        let m = MeasureSpec::pareto(2.0).unwrap();
        let h = s_power(&STransformHandle::numeric(m.clone()).unwrap(), 1.0).unwrap();
        for &z in &[-0.1, -1.0] {
            let a = psi_of_combination(&h, z).unwrap();
            let b = psi_eval(&m, z).unwrap();
            assert!((a - b).abs() < 1e-9 * b.abs(), "z={z}: {a} vs {b}");
        }
    }

    #[test]
    fn psi_of_combination_increasing_and_in_range() {
        let base = STransformHandle::numeric(MeasureSpec::pareto(2.0).unwrap()).unwrap();
        let h = s_power(&base, 2.0).unwrap();
        let mut prev = -1.0;
        for &z in &[-10.0, -1.0, -0.1, -0.01] {
            let v = psi_of_combination(&h, z).unwrap();
            assert!(v > prev, "not increasing at z={z}");
            assert!(v > -1.0 && v < 0.0, "out of range at z={z}: {v}");
            prev = v;
        }
    }

    #[test]
    fn pareto_half_power_tail_slope() {
        // −ψ(−1/x) for Pareto(1/2)^{⊠2} decays like x^{−1/3} (the moving
        // exponent α_t = 1/3 seen through the moment transform).
        let base = STransformHandle::numeric(MeasureSpec::pareto(0.5).unwrap()).unwrap();
        let h = s_power(&base, 2.0).unwrap();
        let xs = [1e8, 1e12, 1e16];
        let mut pts = Vec::new();
        for &x in &xs {
            let v = -psi_of_combination(&h, -1.0 / x).unwrap();
            pts.push((x.ln(), v.ln()));
        }
        let slope = (pts[2].1 - pts[0].1) / (pts[2].0 - pts[0].0);
        assert!((slope + 1.0 / 3.0).abs() < 0.01, "slope {slope}");
    }

    #[test]
    fn breiman_examples() {
        let t = breiman_predict(1.5, 1.0, 1.5).unwrap();
        assert!((t.sv.constant() - 1.5f64.powf(1.5)).abs() < 1e-12);
        assert!((t.sv.constant() - 1.83712).abs() < 1e-5);
        assert_eq!(t.index, 1.5);
        // m₁(ν) = 1 leaves the constant unchanged (Marchenko–Pastur rate 1).
        let t = breiman_predict(2.0, 0.7, 1.0).unwrap();
        assert!((t.sv.constant() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn breiman_with_free_poisson_factor_is_neutral() {
        // ν = Marchenko–Pastur rate 1 has m₁ = 1, so μ ⊠ ν keeps the tail of
        // μ = Pareto(1.5) unchanged; the estimator should see constant ≈ 1.
        use crate::regvar::{estimate_tail_from_s, geometric_grid, EstimateMode};
        let mu = STransformHandle::numeric(MeasureSpec::pareto(1.5).unwrap()).unwrap();
        let nu = STransformHandle::closed(ClosedFormTag::FreePoisson);
        let prod = s_combine(vec![(mu, 1.0), (nu, 1.0)]).unwrap();
        let est =
            estimate_tail_from_s(&prod, &geometric_grid(8.0, 16.0, 9), EstimateMode::Auto)
                .unwrap();
        assert!((est.index - 1.5).abs() < 0.02, "index {}", est.index);
        assert!(
            (est.sv.constant() - 1.0).abs() < 0.1,
            "constant {}",
            est.sv.constant()
        );
    }
}
