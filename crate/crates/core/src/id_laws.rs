//! ⊠-infinitely-divisible laws.
//!
//! A law μ on [0,∞) is ⊠-infinitely divisible exactly when S_μ = exp(v) for
//!
//! ```text
//! v(z/(1−z)) = γ + σ({0})/z − σ({+∞})·z + ∫_{(0,∞)} (1+tz)/(z−t) dσ(t),
//! ```
//!
//! with γ real and σ a finite positive Borel measure on the compact [0,+∞].
//! Evaluating v at w ∈ (−1,0) therefore sets z = w/(1+w) ∈ (−∞,0). The
//! endpoint atoms enter through the explicit σ({0})/z − σ({+∞})z terms, so
//! quadrature only ever sees the open-interval part.
//!
//! The module also predicts the right tail of μ from the declared left tail
//! of σ (three regimes, split at α = 1) and implements the hat-duality
//! μ̂^{γ,σ} = μ^{−γ,σ̂}.

use serde_json::{json, Value};

use crate::error::Error;
use crate::measure::ExtendedMoment;
use crate::quad;
use crate::regvar::{self, LogPowerSv, Regime, TailAsymptotic};
use crate::transforms::STransformHandle;
use crate::Result;

/// The open-interval part of a Lévy measure.
#[derive(Debug, Clone, PartialEq)]
pub enum InteriorSigma {
    None,
    /// Atoms on (0, ∞).
    Atoms(Vec<(f64, f64)>),
    /// dσ = c·α·t^{α−1} dt on (0, d), i.e. σ([0,x)) = c·min(x^α, d^α).
    SigmaMin {
        c: f64,
        d: f64,
        alpha: f64,
    },
    /// Pushforward of an interior part by t ↦ 1/t.
    Inverted(Box<InteriorSigma>),
}

impl InteriorSigma {
    /// ∫ g dσ over (0, ∞).
    fn integrate(&self, g: &dyn Fn(f64) -> f64, eps: f64) -> Result<f64> {
        match self {
            InteriorSigma::None => Ok(0.0),
            InteriorSigma::Atoms(list) => Ok(list.iter().map(|&(t, w)| w * g(t)).sum()),
            InteriorSigma::SigmaMin { c, d, alpha } => {
                // t = s^{1/α} turns the density into the constant c.
                let h = |s: f64| g(s.powf(1.0 / alpha)) * c;
                quad::adaptive(&h, 0.0, d.powf(*alpha), 1e-300, eps)
            }
            InteriorSigma::Inverted(inner) => inner.integrate(&|t| g(1.0 / t), eps),
        }
    }

    fn invert(&self) -> InteriorSigma {
        match self {
            InteriorSigma::Inverted(inner) => (**inner).clone(),
            InteriorSigma::None => InteriorSigma::None,
            InteriorSigma::Atoms(list) => {
                InteriorSigma::Atoms(list.iter().map(|&(t, w)| (1.0 / t, w)).collect())
            }
            other => InteriorSigma::Inverted(Box::new(other.clone())),
        }
    }

    fn mass(&self) -> f64 {
        match self {
            InteriorSigma::None => 0.0,
            InteriorSigma::Atoms(list) => list.iter().map(|&(_, w)| w).sum(),
            InteriorSigma::SigmaMin { c, d, alpha } => c * d.powf(*alpha),
            InteriorSigma::Inverted(inner) => inner.mass(),
        }
    }

    /// ∫ t^p dσ over (0,∞), possibly +∞.
    fn moment(&self, p: f64) -> ExtendedMoment {
        match self {
            InteriorSigma::None => ExtendedMoment::Finite(0.0),
            InteriorSigma::Atoms(list) => {
                ExtendedMoment::Finite(list.iter().map(|&(t, w)| w * t.powf(p)).sum())
            }
            InteriorSigma::SigmaMin { c, d, alpha } => {
                if p > -alpha {
                    ExtendedMoment::Finite(c * alpha * d.powf(alpha + p) / (alpha + p))
                } else {
                    ExtendedMoment::Infinite
                }
            }
            InteriorSigma::Inverted(inner) => inner.moment(-p),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            InteriorSigma::None => Value::Null,
            InteriorSigma::Atoms(list) => json!({
                "family": "atoms",
                "params": { "atoms": list.iter().map(|&(t, w)| json!([t, w])).collect::<Vec<_>>() }
            }),
            InteriorSigma::SigmaMin { c, d, alpha } => json!({
                "family": "sigma_min",
                "params": { "c": c, "d": d, "alpha": alpha }
            }),
            InteriorSigma::Inverted(inner) => json!({
                "family": "inverted",
                "params": { "inner": inner.to_json() }
            }),
        }
    }

    fn from_json(v: &Value) -> Result<InteriorSigma> {
        if v.is_null() {
            return Ok(InteriorSigma::None);
        }
        let family = v
            .get("family")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::InvalidSpec("sigma: missing family".into()))?;
        let params = v.get("params").cloned().unwrap_or(json!({}));
        match family {
            "atoms" => {
                let arr = params
                    .get("atoms")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::InvalidSpec("sigma atoms: missing list".into()))?;
                let mut list = Vec::new();
                for pair in arr {
                    let p = pair
                        .as_array()
                        .filter(|p| p.len() == 2)
                        .ok_or_else(|| Error::InvalidSpec("sigma atoms: [t, w] pairs".into()))?;
                    let t = p[0].as_f64().unwrap_or(f64::NAN);
                    let w = p[1].as_f64().unwrap_or(f64::NAN);
                    if !(t > 0.0 && w > 0.0) {
                        return Err(Error::InvalidSpec("sigma atoms need t > 0, w > 0".into()));
                    }
                    list.push((t, w));
                }
                Ok(InteriorSigma::Atoms(list))
            }
            "sigma_min" => {
                let f = |k: &str| {
                    params
                        .get(k)
                        .and_then(Value::as_f64)
                        .ok_or_else(|| Error::InvalidSpec(format!("sigma_min: missing {k}")))
                };
                Ok(InteriorSigma::SigmaMin {
                    c: f("c")?,
                    d: f("d")?,
                    alpha: f("alpha")?,
                })
            }
            "inverted" => Ok(InteriorSigma::Inverted(Box::new(InteriorSigma::from_json(
                params
                    .get("inner")
                    .ok_or_else(|| Error::InvalidSpec("inverted: missing inner".into()))?,
            )?))),
            other => Err(Error::InvalidSpec(format!("sigma family \"{other}\""))),
        }
    }
}

/// (γ, σ) with σ a finite measure on [0,+∞]: explicit endpoint atom masses
/// plus the interior part.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyPair {
    pub gamma: f64,
    pub zero_mass: f64,
    pub inf_mass: f64,
    pub interior: InteriorSigma,
}

impl LevyPair {
    pub fn new(gamma: f64, zero_mass: f64, inf_mass: f64, interior: InteriorSigma) -> Result<Self> {
        if !(zero_mass >= 0.0 && inf_mass >= 0.0) {
            return Err(Error::InvalidSpec(
                "endpoint atom masses must be >= 0".into(),
            ));
        }
        if !interior.mass().is_finite() {
            return Err(Error::InvalidSpec("sigma must have finite mass".into()));
        }
        Ok(LevyPair {
            gamma,
            zero_mass,
            inf_mass,
            interior,
        })
    }

    fn check_domain(w: f64) -> Result<f64> {
        if !(w > -1.0 && w < 0.0) {
            return Err(Error::OutOfRange {
                arg: w,
                lo: -1.0,
                hi: 0.0,
            });
        }
        Ok(w / (1.0 + w))
    }

    /// v(w) = γ + σ({0})/z − σ({+∞})z + ∫ (1+tz)/(z−t) dσ(t), z = w/(1+w).
    pub fn v_eval(&self, w: f64) -> Result<f64> {
        let z = Self::check_domain(w)?;
        let head = self.gamma + self.zero_mass / z - self.inf_mass * z;
        // (1+tz)/(z−t) = t·z/(z−t) + 1/(z−t)... integrated as-is; bounded on
        // (0,∞) for z < 0 and → −z as t → ∞.
        let integral = self
            .interior
            .integrate(&|t| (1.0 + t * z) / (z - t), 1e-12)?;
        Ok(head + integral)
    }

    /// k-th derivative of v with respect to w (k ≤ 3), from the z-derivatives
    /// dᵏ/dzᵏ (1+tz)/(z−t) = (−1)ᵏ k! (1+t²)/(z−t)^{k+1} and the chain rule
    /// through z = w/(1+w).
    pub fn v_deriv(&self, w: f64, k: usize) -> Result<f64> {
        if k == 0 {
            return self.v_eval(w);
        }
        if k > 3 {
            return Err(Error::OrderTooHigh(k, 3));
        }
        let z = Self::check_domain(w)?;
        let vz = |n: usize| -> Result<f64> {
            let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
            let nf = (1..=n).map(|i| i as f64).product::<f64>();
            let atom0 = sign * nf * self.zero_mass / z.powi(n as i32 + 1);
            let atom_inf = if n == 1 { -self.inf_mass } else { 0.0 };
            let integral = self.interior.integrate(
                &|t| sign * nf * (1.0 + t * t) / (z - t).powi(n as i32 + 1),
                1e-12,
            )?;
            Ok(atom0 + atom_inf + integral)
        };
        let q = 1.0 + w;
        let z1 = q.powi(-2);
        let v1 = vz(1)?;
        if k == 1 {
            return Ok(v1 * z1);
        }
        let z2 = -2.0 * q.powi(-3);
        let v2 = vz(2)?;
        if k == 2 {
            return Ok(v2 * z1 * z1 + v1 * z2);
        }
        let z3 = 6.0 * q.powi(-4);
        let v3 = vz(3)?;
        Ok(v3 * z1.powi(3) + 3.0 * v2 * z1 * z2 + v1 * z3)
    }

    /// S(w) = exp(v(w)).
    pub fn s_eval(&self, w: f64) -> Result<f64> {
        Ok(self.v_eval(w)?.exp())
    }

    /// Handle integrating this law with the combination and estimation
    /// machinery.
    pub fn handle(&self) -> STransformHandle {
        STransformHandle::from_id_law(self.clone())
    }

    /// m₁ = exp(−v(0⁻)) = exp(−γ + m₋₁(σ)); infinite when σ({0}) > 0 or
    /// m₋₁(σ) diverges.
    pub fn m1(&self) -> ExtendedMoment {
        if self.zero_mass > 0.0 {
            return ExtendedMoment::Infinite;
        }
        match self.interior.moment(-1.0) {
            ExtendedMoment::Infinite => ExtendedMoment::Infinite,
            ExtendedMoment::Finite(mn1) => ExtendedMoment::Finite((-self.gamma + mn1).exp()),
        }
    }

    /// m₋₁ = exp(v(−1⁺)) = exp(γ + m₁(σ)); infinite when σ({+∞}) > 0 or
    /// m₁(σ) diverges.
    pub fn m_neg1(&self) -> ExtendedMoment {
        if self.inf_mass > 0.0 {
            return ExtendedMoment::Infinite;
        }
        match self.interior.moment(1.0) {
            ExtendedMoment::Infinite => ExtendedMoment::Infinite,
            ExtendedMoment::Finite(m1) => ExtendedMoment::Finite((self.gamma + m1).exp()),
        }
    }

    /// Hat-duality: μ̂^{γ,σ} = μ^{−γ,σ̂}, with σ̂ the 1/x pushforward swapping
    /// the endpoint atoms.
    pub fn id_hat(&self) -> LevyPair {
        LevyPair {
            gamma: -self.gamma,
            zero_mass: self.inf_mass,
            inf_mass: self.zero_mass,
            interior: self.interior.invert(),
        }
    }

    /// JSON document {gamma, sigma: {...}, atoms: {zero, inf}}.
    pub fn to_json(&self) -> Value {
        json!({
            "gamma": self.gamma,
            "sigma": self.interior.to_json(),
            "atoms": { "zero": self.zero_mass, "inf": self.inf_mass },
        })
    }

    pub fn from_json(v: &Value) -> Result<LevyPair> {
        let gamma = v
            .get("gamma")
            .and_then(Value::as_f64)
            .ok_or_else(|| Error::InvalidSpec("levy pair: missing gamma".into()))?;
        let atoms = v.get("atoms").cloned().unwrap_or(json!({}));
        let zero_mass = atoms.get("zero").and_then(Value::as_f64).unwrap_or(0.0);
        let inf_mass = atoms.get("inf").and_then(Value::as_f64).unwrap_or(0.0);
        let interior = match v.get("sigma") {
            None => InteriorSigma::None,
            Some(s) => InteriorSigma::from_json(s)?,
        };
        LevyPair::new(gamma, zero_mass, inf_mass, interior)
    }
}

/// Closed-form S(−w-argument) for the σ-min family with α = 1 and the given
/// (c, d, γ), from the elementary antiderivative
/// ∫₀^d (1+tz)/(z−t) dt = −zd − (1+z²) ln(1 − d/z):
///
/// ```text
/// S(w) = exp(γ + c[ |z| d − (1+z²) ln(1 + d/|z|) ]),   z = w/(1+w).
/// ```
///
/// At w = −1/x this is (1+d(x−1))^{−c(1+(x−1)^{−2})} e^{cd/(x−1)+γ}, and
/// asymptotically d^{−c} e^{γ} x^{−c}.
pub fn sigma_min_alpha1_closed_s(c: f64, d: f64, gamma: f64, w: f64) -> Result<f64> {
    let z = LevyPair::check_domain(w)?;
    let az = -z;
    // ln_1p: near w = −1 the ratio d/|z| is tiny and the log gets multiplied
    // by (1+z²) ~ z², so naive ln(1+x) would lose ~6 digits there.
    let v = gamma + c * (az * d - (1.0 + z * z) * (d / az).ln_1p());
    Ok(v.exp())
}

/// Declared left-tail of σ: σ([0,x)) ~ x^α · L(1/x) as x → 0⁺.
#[derive(Debug, Clone)]
pub struct SigmaLeftTail {
    pub alpha: f64,
    pub sv: LogPowerSv,
}

/// Predict the right tail of μ^{γ,σ} from the declared left tail of σ.
///
/// * α ∈ [0,1): slowly varying tail
///   (πα/sin πα)^{1/(1−α)} / (log^{1/(1−α)} x · L_α^♯(log^{1/(1−α)} x)),
///   L_α = L^{1/(1−α)};
/// * α = 1: regularly varying with index 1/(1+d), d = lim L — the tail
///   constant comes from inverting S(−1/x) ~ A·x^{−d} through the
///   α ∈ (0,1) dictionary (constant-L case);
/// * α > 1: index α with tail ~ m₁(μ)^α · L(x)/x^α, m₁ = exp(−γ + m₋₁(σ)).
pub fn id_tail_predict(pair: &LevyPair, left: &SigmaLeftTail) -> Result<TailAsymptotic> {
    let alpha = left.alpha;
    if !(alpha >= 0.0) {
        return Err(Error::RegimeMismatch(format!("σ-tail index {alpha} < 0")));
    }
    if alpha < 1.0 {
        // Thm-level formula needs L of log-power form; exact when L ≡ c.
        if !left.sv.is_constant() {
            return Err(Error::RegimeMismatch(
                "slow regime prediction implemented for constant slowly varying parts".into(),
            ));
        }
        let c = left.sv.constant();
        let e = 1.0 / (1.0 - alpha);
        let ratio = if alpha == 0.0 {
            1.0
        } else {
            std::f64::consts::PI * alpha / (std::f64::consts::PI * alpha).sin()
        };
        // tail ≈ (πα/sinπα)^{e} c^{e} (log x)^{−e}.
        let constant = ratio.powf(e) * c.powf(e);
        return Ok(TailAsymptotic {
            index: 0.0,
            sv: LogPowerSv::new(constant, vec![-e])?,
            regime: Regime::Slow,
            pi_ref: None,
        });
    }
    if alpha == 1.0 {
        let d = left
            .sv
            .limit()
            .ok_or_else(|| Error::MissingLimit("α = 1 needs lim L(x)".into()))?;
        if d == 0.0 {
            // Π_M(1) case: index 1, constant not identified at this level.
            return Ok(TailAsymptotic {
                index: 1.0,
                sv: LogPowerSv::new(1.0, vec![])?,
                regime: Regime::PiClass,
                pi_ref: None,
            });
        }
        if !d.is_finite() {
            // d = +∞: the tail is slowly varying; report the regime only.
            return Ok(TailAsymptotic {
                index: 0.0,
                sv: LogPowerSv::new(1.0, vec![])?,
                regime: Regime::Slow,
                pi_ref: None,
            });
        }
        // Index Λ = 1/(1+d). Extract A = lim S(−1/x)·x^d numerically and
        // invert S(−1/x) ~ A x^{1−1/Λ}: C = (sin πΛ/πΛ)·A^{−Λ}.
        let lambda = 1.0 / (1.0 + d);
        let x = 1e12;
        let a = (pair.v_eval(-1.0 / x)? + d * x.ln()).exp();
        let pl = std::f64::consts::PI * lambda;
        let constant = (pl.sin() / pl) * a.powf(-lambda);
        return Ok(TailAsymptotic {
            index: lambda,
            sv: LogPowerSv::new(constant, vec![])?,
            regime: Regime::Alpha01,
            pi_ref: None,
        });
    }
    // α > 1: need m₁ finite.
    let m1 = match pair.m1() {
        ExtendedMoment::Finite(v) => v,
        ExtendedMoment::Infinite => {
            return Err(Error::RegimeMismatch(
                "α > 1 σ-tail with infinite m₁(μ): inconsistent declaration".into(),
            ))
        }
    };
    Ok(TailAsymptotic {
        index: alpha,
        sv: left.sv.scaled(m1.powf(alpha)),
        regime: Regime::FiniteMean,
        pi_ref: None,
    })
}

/// Convenience: the SigmaMinFamily(c, d_param, α) left tail is
/// σ([0,x)) = c·x^α for x < d_param, so L ≡ c.
pub fn sigma_min_left_tail(c: f64, alpha: f64) -> Result<SigmaLeftTail> {
    Ok(SigmaLeftTail {
        alpha,
        sv: LogPowerSv::new(c, vec![])?,
    })
}

pub use regvar::estimate_tail_from_s;

#[cfg(test)]
mod tests {
    use super::*;

    fn sigma_min_pair(c: f64, d: f64, alpha: f64, gamma: f64) -> LevyPair {
        LevyPair::new(gamma, 0.0, 0.0, InteriorSigma::SigmaMin { c, d, alpha }).unwrap()
    }

    #[test]
    fn v_of_zero_sigma_is_gamma() {
        let p = LevyPair::new(1.3, 0.0, 0.0, InteriorSigma::None).unwrap();
        for &w in &[-0.9, -0.5, -0.1] {
            assert_eq!(p.v_eval(w).unwrap(), 1.3);
            assert!((p.s_eval(w).unwrap() - 1.3f64.exp()).abs() < 1e-12);
        }
        // σ = 0, γ: S ≡ e^γ is the point mass at e^{−γ}.
        assert_eq!(p.m1(), ExtendedMoment::Finite((-1.3f64).exp()));
    }

    #[test]
    fn v_unit_atom_example() {
        // σ = δ₁, γ = 0, w = −1/2 (z = −1): (1+z)/(z−1) = 0.
        let p = LevyPair::new(0.0, 0.0, 0.0, InteriorSigma::Atoms(vec![(1.0, 1.0)])).unwrap();
        let v = p.v_eval(-0.5).unwrap();
        assert!(v.abs() < 1e-14, "{v}");
    }

    #[test]
    fn v_matches_sigma_min_alpha1_closed_form() {
        let p = sigma_min_pair(1.0, 1.0, 1.0, 0.0);
        // Exact value at w = −1/2 (z = −1): 1 − 2 ln 2.
        let v = p.v_eval(-0.5).unwrap();
        let exact = 1.0 - 2.0 * std::f64::consts::LN_2;
        assert!((v - exact).abs() < 1e-12, "{v} vs {exact}");
        // Against the closed form across the domain.
        for k in 1..40 {
            let w = -(k as f64) / 40.0;
            let s_num = p.s_eval(w).unwrap();
            let s_closed = sigma_min_alpha1_closed_s(1.0, 1.0, 0.0, w).unwrap();
            assert!(
                (s_num - s_closed).abs() <= 1e-8 * s_closed.max(1.0),
                "w={w}: {s_num} vs {s_closed}"
            );
        }
    }

    #[test]
    fn v_decreasing_on_domain() {
        for pair in [
            sigma_min_pair(1.0, 1.0, 1.0, 0.0),
            sigma_min_pair(0.5, 2.0, 0.5, -1.0),
            LevyPair::new(0.7, 0.2, 0.1, InteriorSigma::Atoms(vec![(2.0, 0.4)])).unwrap(),
        ] {
            let mut prev = f64::INFINITY;
            for k in 1..40 {
                let w = -1.0 + (k as f64) / 41.0;
                let v = pair.v_eval(w).unwrap();
                assert!(v < prev, "v not decreasing at w = {w}");
                prev = v;
            }
        }
    }

    #[test]
    fn v_deriv_matches_finite_differences() {
        let p = sigma_min_pair(1.0, 1.0, 1.0, 0.3);
        for &w in &[-0.7, -0.3] {
            let eps = 1e-6;
            let d1 = p.v_deriv(w, 1).unwrap();
            let fd1 = (p.v_eval(w + eps).unwrap() - p.v_eval(w - eps).unwrap()) / (2.0 * eps);
            assert!(((d1 - fd1) / fd1).abs() < 1e-7, "w={w}: {d1} vs {fd1}");
            let d2 = p.v_deriv(w, 2).unwrap();
            let fd2 = (p.v_eval(w + eps).unwrap() - 2.0 * p.v_eval(w).unwrap()
                + p.v_eval(w - eps).unwrap())
                / (eps * eps);
            assert!(((d2 - fd2) / fd2).abs() < 1e-3, "w={w}: {d2} vs {fd2}");
        }
    }

    #[test]
    fn hat_is_involution_and_swaps_atoms() {
        let p = LevyPair::new(
            0.4,
            0.25,
            0.0,
            InteriorSigma::Atoms(vec![(0.5, 0.3), (2.0, 0.7)]),
        )
        .unwrap();
        let hat = p.id_hat();
        assert_eq!(hat.gamma, -0.4);
        assert_eq!(hat.zero_mass, 0.0);
        assert_eq!(hat.inf_mass, 0.25);
        assert_eq!(hat.id_hat(), p);
    }

    #[test]
    fn hat_duality_at_s_level() {
        // S_{μ̂}(w) = 1/S_μ(−1−w), via Lemma-level v relation.
        let p = sigma_min_pair(1.0, 1.0, 1.0, 0.2);
        let hat = p.id_hat();
        for &w in &[-0.8, -0.5, -0.2] {
            let lhs = hat.s_eval(w).unwrap();
            let rhs = 1.0 / p.s_eval(-1.0 - w).unwrap();
            assert!(
                (lhs - rhs).abs() <= 1e-8 * rhs.abs().max(1.0),
                "w={w}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn moments_of_id_law() {
        // (c=d=1, α=2, γ=0): m₋₁(σ) = 2, so m₁(μ) = e².
        let p = sigma_min_pair(1.0, 1.0, 2.0, 0.0);
        let m1 = p.m1().finite().unwrap();
        assert!((m1 - 2.0f64.exp()).abs() < 1e-12, "{m1}");
        // α = 1: m₋₁(σ) = ∞, so m₁(μ) = ∞.
        let p = sigma_min_pair(1.0, 1.0, 1.0, 0.0);
        assert_eq!(p.m1(), ExtendedMoment::Infinite);
        // m₋₁(μ) = exp(γ + m₁(σ)); m₁(σ) = 1/2 here.
        let m = p.m_neg1().finite().unwrap();
        assert!((m - 0.5f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn predict_examples() {
        // (c=1, d=1, α=1, γ=0) → index 1/2; constant 2/π from inverting
        // S(−1/x) ~ x^{−1} through the dictionary.
        let p = sigma_min_pair(1.0, 1.0, 1.0, 0.0);
        let t = id_tail_predict(&p, &sigma_min_left_tail(1.0, 1.0).unwrap()).unwrap();
        assert!((t.index - 0.5).abs() < 1e-9);
        let c = t.sv.constant();
        assert!(
            (c - 2.0 / std::f64::consts::PI).abs() < 1e-6,
            "constant {c}"
        );

        // α = 2 variant: index 2 and constant m₁^α·c = e⁴.
        let p = sigma_min_pair(1.0, 1.0, 2.0, 0.0);
        let t = id_tail_predict(&p, &sigma_min_left_tail(1.0, 2.0).unwrap()).unwrap();
        assert_eq!(t.index, 2.0);
        let c = t.sv.constant();
        assert!((c - 4.0f64.exp()).abs() < 1e-9, "constant {c}");

        // α = 0.5: slow regime with leading factor (π/2)²/log² x.
        let p = sigma_min_pair(1.0, 1.0, 0.5, 0.7);
        let t = id_tail_predict(&p, &sigma_min_left_tail(1.0, 0.5).unwrap()).unwrap();
        assert_eq!(t.regime, Regime::Slow);
        assert_eq!(t.index, 0.0);
        let expect = (std::f64::consts::FRAC_PI_2).powi(2);
        assert!((t.sv.constant() - expect).abs() < 1e-12);
        assert_eq!(t.sv.exponents(), &[-2.0]);
    }

    #[test]
    fn levy_pair_json_roundtrip() {
        let pairs = vec![
            sigma_min_pair(1.0, 2.0, 1.5, -0.3),
            LevyPair::new(0.1, 0.2, 0.3, InteriorSigma::Atoms(vec![(1.5, 0.5)])).unwrap(),
            LevyPair::new(
                0.0,
                0.0,
                0.0,
                InteriorSigma::SigmaMin {
                    c: 1.0,
                    d: 1.0,
                    alpha: 1.0,
                }
                .invert(),
            )
            .unwrap(),
        ];
        for p in pairs {
            let v = p.to_json();
            let back = LevyPair::from_json(&v).unwrap();
            assert_eq!(p, back);
        }
    }
}
