//! The moment transform ψ, its inverse χ, and the S-transform, as real
//! functions on the negative axis.
//!
//! For a measure μ on [0,∞) with δ = μ({0}) < 1,
//!
//! ```text
//! ψ(z) = ∫ zt/(1−zt) dμ(t)          increasing bijection (−∞,0) → (δ−1,0)
//! χ    = ψ^{⟨−1⟩}
//! S(w) = (1+w)/w · χ(w)             positive, decreasing on (δ−1,0)
//! ```
//!
//! Derivatives of S are propagated from derivatives of ψ through the inverse
//! function, but not in the naive χ-plus-Leibniz arrangement: at w = −1/x with
//! x large, χ′(w)/w and χ(w)/w² agree to O(1/w) and their difference is the
//! whole answer, so that route loses a digit per decade of x. Instead we work
//! in ζ = χ(w) coordinates with the single-signed integrals
//!
//! ```text
//! B_k(ζ) = ∫ (ζt/(1−ζt))^k dμ(t),   ζ B_k′ = k (B_k + B_{k+1}),
//! ```
//!
//! which give ψ^{(k)}(ζ) = k!(B_k + B_{k+1})/ζ^k and, for S̃(ζ) = S(ψ(ζ)),
//!
//! ```text
//! S̃′   = 1 − B₂/B₁²
//! S̃″   = 2 (B₂² − B₁B₃) / (ζ B₁³)
//! S̃‴   = −6 (B₂³ − 2B₁B₂B₃ + B₁²B₄) / (ζ² B₁⁴)
//! ```
//!
//! The divergent-in-1/w pieces cancel identically in these expressions, so
//! the large-x regimes the tail dictionary needs stay at full precision.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::Error;
use crate::id_laws::LevyPair;
use crate::measure::{ExtendedMoment, Integrand, MeasureSpec};
use crate::Result;

/// Default relative tolerance for ψ-type quadratures.
const PSI_EPS: f64 = 1e-12;
/// Relative tolerance on w for the χ root-find.
const CHI_TOL: f64 = 1e-12;

// ----------------------------------------------------------------------
// Numeric ψ, its derivatives, and B_k for a measure
// ----------------------------------------------------------------------

fn require_negative(z: f64) -> Result<()> {
    if z < 0.0 && z.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            arg: z,
            lo: f64::NEG_INFINITY,
            hi: 0.0,
        })
    }
}

/// ∫ (zt/(1−zt))^k dμ(t) by quadrature (exact sums for atomic measures).
fn b_k(m: &MeasureSpec, z: f64, k: u32, eps: f64) -> Result<f64> {
    require_negative(z)?;
    let f = move |t: f64| (z * t / (1.0 - z * t)).powi(k as i32);
    let df = move |t: f64| {
        let base = z * t / (1.0 - z * t);
        k as f64 * base.powi(k as i32 - 1) * z / (1.0 - z * t).powi(2)
    };
    let env = |_t: f64| 1.0;
    m.integrate_dmu(
        &Integrand {
            f: &f,
            df: &df,
            envelope: &env,
            scale: 1.0 / z.abs(),
        },
        eps,
    )
}

/// ψ(z) = ∫ zt/(1−zt) dμ(t) for z < 0, by quadrature (relative error ≤ 1e−10).
pub fn psi_eval(m: &MeasureSpec, z: f64) -> Result<f64> {
    require_negative(z)?;
    match m {
        MeasureSpec::MuAlphaBeta { .. } => {
            // No quadrature representation; invert the closed-form χ instead.
            STransformHandle::from_measure(m.clone())?.psi(z)
        }
        MeasureSpec::SymmetricWrapper(_) => Err(Error::NotAvailable(
            "ψ of a symmetric law is imaginary-argument only; use symmetric_square".into(),
        )),
        _ => b_k(m, z, 1, PSI_EPS),
    }
}

/// k-th derivative of ψ at z < 0 (k ≤ 4), by direct quadrature of
/// k! ∫ t^k/(1−zt)^{k+1} dμ(t).
pub fn psi_deriv(m: &MeasureSpec, z: f64, k: usize) -> Result<f64> {
    require_negative(z)?;
    if k == 0 {
        return psi_eval(m, z);
    }
    if k > 4 {
        return Err(Error::OrderTooHigh(k, 4));
    }
    match m {
        MeasureSpec::MuAlphaBeta { .. } => {
            STransformHandle::from_measure(m.clone())?.psi_deriv_via_chi(z, k)
        }
        MeasureSpec::SymmetricWrapper(_) => Err(Error::NotAvailable(
            "ψ of a symmetric law is imaginary-argument only".into(),
        )),
        _ => {
            let kf = factorial(k);
            let ki = k as i32;
            let f = move |t: f64| kf * t.powi(ki) / (1.0 - z * t).powi(ki + 1);
            let df = move |t: f64| {
                let d = 1.0 - z * t;
                kf * (k as f64 * t.powi(ki - 1) * d + (k as f64 + 1.0) * z * t.powi(ki))
                    / d.powi(ki + 2)
            };
            // The integrand decreases past its peak at t ≈ k/((k+1)|z|).
            let peak = k as f64 / ((k as f64 + 1.0) * z.abs());
            let env = move |t: f64| {
                let s = t.max(peak);
                kf * s.powi(ki) / (1.0 - z * s).powi(ki + 1)
            };
            m.integrate_dmu(
                &Integrand {
                    f: &f,
                    df: &df,
                    envelope: &env,
                    scale: 1.0 / z.abs(),
                },
                PSI_EPS,
            )
        }
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Solve g(x) = target for strictly increasing g with negative values,
/// x = −e^u: bracket by exponential stepping in u, then secant with a
/// bisection safeguard on (u, ln(−g)).
fn solve_monotone_log(
    eval: &dyn Fn(f64) -> Result<f64>,
    target: f64,
    u_init: f64,
    u_min: f64,
    u_max: f64,
    rel_tol: f64,
) -> Result<f64> {
    debug_assert!(target < 0.0);
    let y_target = (-target).ln();
    let y_of = |u: f64| -> Result<f64> {
        let g = eval(u)?;
        if !(g < 0.0) {
            return Err(Error::NoBracket(format!("g({u}) = {g} not negative")));
        }
        Ok((-g).ln())
    };

    // −g increases with u (g is increasing in x = −e^u, i.e. decreasing in u).
    let mut a = u_init;
    let mut b = u_init;
    let mut ya = y_of(a)? - y_target;
    let mut yb = ya;
    if ya < 0.0 {
        let mut step = 1.0;
        loop {
            a = b;
            ya = yb;
            b = (b + step).min(u_max);
            yb = y_of(b)? - y_target;
            if yb >= 0.0 {
                break;
            }
            if b >= u_max {
                return Err(Error::NoBracket(format!(
                    "target {target:e} beyond the u_max cap (gap {yb:.3e})"
                )));
            }
            step *= 2.0;
        }
    } else {
        let mut step = 1.0;
        loop {
            b = a;
            yb = ya;
            a = (a - step).max(u_min);
            ya = y_of(a)? - y_target;
            if ya <= 0.0 {
                break;
            }
            if a <= u_min {
                return Err(Error::NoBracket(format!(
                    "target {target:e} beyond the u_min cap (gap {ya:.3e})"
                )));
            }
            step *= 2.0;
        }
    }

    if ya == 0.0 {
        return Ok(-a.exp());
    }
    if yb == 0.0 {
        return Ok(-b.exp());
    }
    let mut best = (0.5 * (a + b), f64::INFINITY);
    for iter in 0..120 {
        let mut u = if (yb - ya).abs() > 1e-300 {
            a - ya * (b - a) / (yb - ya)
        } else {
            0.5 * (a + b)
        };
        let width = b - a;
        if !(u > a && u < b) || iter % 4 == 3 {
            u = 0.5 * (a + b);
        }
        let g = eval(u)?;
        if (g - target).abs() <= rel_tol * target.abs() {
            return Ok(-u.exp());
        }
        let y = (-g).ln() - y_target;
        if y.abs() < best.1 {
            best = (u, y.abs());
        }
        if y < 0.0 {
            a = u;
            ya = y;
        } else {
            b = u;
            yb = y;
        }
        if width < 4e-16 * (1.0 + a.abs()) {
            return Ok(-(0.5 * (a + b)).exp());
        }
    }
    // Quadrature noise can hold the residual just above the target; accept
    // the best point if it is within a modest factor.
    if best.1 < rel_tol * 1e4 {
        return Ok(-best.0.exp());
    }
    Err(Error::NoBracket(format!(
        "inversion stalled at log-residual {:.3e} for target {target:e}",
        best.1
    )))
}

/// χ(w): the unique z < 0 with ψ(z) = w, for w ∈ (δ−1, 0).
///
/// Bracketing starts from z = −1 and doubles/halves |z| until ψ straddles w;
/// ψ's monotonicity guarantees termination.
pub fn chi_eval(m: &MeasureSpec, w: f64) -> Result<f64> {
    let delta = m.delta();
    if !(w > delta - 1.0 && w < 0.0) {
        return Err(Error::OutOfRange {
            arg: w,
            lo: delta - 1.0,
            hi: 0.0,
        });
    }
    let eval = |u: f64| psi_eval(m, -u.exp());
    solve_monotone_log(&eval, w, 0.0, -707.0, 707.0, CHI_TOL)
}

/// S(w) = (1+w)/w · χ(w) for w ∈ (δ−1, 0).
pub fn s_eval(m: &MeasureSpec, w: f64) -> Result<f64> {
    match m {
        MeasureSpec::MuAlphaBeta { .. } | MeasureSpec::PointMass { .. } => {
            STransformHandle::from_measure(m.clone())?.s(w)
        }
        _ => {
            let chi = chi_eval(m, w)?;
            Ok((1.0 + w) / w * chi)
        }
    }
}

// ----------------------------------------------------------------------
// Closed forms
// ----------------------------------------------------------------------

/// Families with a closed-form S-transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedFormTag {
    PointMass {
        a: f64,
    },
    FreePoisson,
    MuAlphaBeta {
        alpha: f64,
        beta: f64,
    },
    /// (δ_{−1}+δ_{+1})/2; its S-transform is purely imaginary.
    SymmetricBernoulli,
}

impl FromStr for ClosedFormTag {
    type Err = Error;

    /// Parses `point_mass:a`, `free_poisson`, `mu_alpha_beta:α,β`,
    /// `symmetric_bernoulli`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = match s.split_once(':') {
            Some((n, a)) => (n, a),
            None => (s, ""),
        };
        let nums: Vec<f64> = if args.is_empty() {
            vec![]
        } else {
            args.split(',')
                .map(|p| p.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::UnknownTag(s.to_string()))?
        };
        match (name, nums.as_slice()) {
            ("point_mass", [a]) => Ok(ClosedFormTag::PointMass { a: *a }),
            ("free_poisson", []) => Ok(ClosedFormTag::FreePoisson),
            ("mu_alpha_beta", [alpha, beta]) => Ok(ClosedFormTag::MuAlphaBeta {
                alpha: *alpha,
                beta: *beta,
            }),
            ("symmetric_bernoulli", []) => Ok(ClosedFormTag::SymmetricBernoulli),
            _ => Err(Error::UnknownTag(s.to_string())),
        }
    }
}

/// An S-transform value that may be purely imaginary (symmetric laws).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SValue {
    /// Modulus of S(w).
    pub value: f64,
    /// Set when the value is i·value rather than value.
    pub imaginary: bool,
}

/// Closed-form S(w) for the tagged families; symmetric_bernoulli returns the
/// modulus √((1+w)/(−w)) with the imaginary flag set.
pub fn closed_form_s(tag: ClosedFormTag, w: f64) -> Result<SValue> {
    if !(w > -1.0 && w < 0.0) {
        return Err(Error::OutOfRange {
            arg: w,
            lo: -1.0,
            hi: 0.0,
        });
    }
    let v = match tag {
        ClosedFormTag::PointMass { a } => SValue {
            value: 1.0 / a,
            imaginary: false,
        },
        ClosedFormTag::FreePoisson => SValue {
            value: 1.0 / (1.0 + w),
            imaginary: false,
        },
        ClosedFormTag::MuAlphaBeta { alpha, beta } => SValue {
            value: (-w).powf(beta) / (1.0 + w).powf(alpha),
            imaginary: false,
        },
        ClosedFormTag::SymmetricBernoulli => SValue {
            value: ((1.0 + w) / (-w)).sqrt(),
            imaginary: true,
        },
    };
    Ok(v)
}

// ----------------------------------------------------------------------
// Handles
// ----------------------------------------------------------------------

enum Source {
    /// ψ-inversion backed.
    Numeric(MeasureSpec),
    /// Analytic S.
    Closed(ClosedFormTag),
    /// S = exp(v) of a ⊠-infinitely-divisible law.
    IdLaw(LevyPair),
    /// S = ∏ S_i^{t_i}, evaluated in log space.
    Product(Vec<(STransformHandle, f64)>),
    /// Ŝ(w) = 1/S(−1−w) (left-tail dual; requires δ = 0 inside).
    Hat(STransformHandle),
}

/// Evaluator for S(w) on (δ−1, 0) with derivative orders 1..=3, the
/// inverse pair ψ/χ, and cached first and minus-first moments.
#[derive(Clone)]
pub struct STransformHandle {
    inner: Arc<HandleInner>,
}

struct HandleInner {
    source: Source,
    delta: f64,
    m1: ExtendedMoment,
    m_neg1: Option<ExtendedMoment>,
}

impl fmt::Debug for STransformHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.inner.source {
            Source::Numeric(m) => write!(f, "STransformHandle::Numeric({m:?})"),
            Source::Closed(t) => write!(f, "STransformHandle::Closed({t:?})"),
            Source::IdLaw(_) => write!(f, "STransformHandle::IdLaw"),
            Source::Product(parts) => {
                write!(f, "STransformHandle::Product[")?;
                for (h, t) in parts {
                    write!(f, "({h:?})^{t} ")?;
                }
                write!(f, "]")
            }
            Source::Hat(h) => write!(f, "STransformHandle::Hat({h:?})"),
        }
    }
}

impl STransformHandle {
    /// Handle for a measure; closed-form families get the analytic source,
    /// everything else goes through ψ-inversion.
    pub fn from_measure(m: MeasureSpec) -> Result<Self> {
        match &m {
            MeasureSpec::PointMass { a } => Ok(Self::closed(ClosedFormTag::PointMass { a: *a })),
            MeasureSpec::FreePoisson => Ok(Self::closed(ClosedFormTag::FreePoisson)),
            MeasureSpec::MuAlphaBeta { alpha, beta } => {
                Ok(Self::closed(ClosedFormTag::MuAlphaBeta {
                    alpha: *alpha,
                    beta: *beta,
                }))
            }
            MeasureSpec::SigmaMinFamily { .. } => Err(Error::NotAvailable(
                "the σ-min family is a Lévy measure; build an id-law handle".into(),
            )),
            MeasureSpec::SymmetricWrapper(_) => Err(Error::NotAvailable(
                "symmetric laws have imaginary S; use closed_form_s or symmetric_square".into(),
            )),
            _ => Self::numeric(m),
        }
    }

    /// Quadrature-backed handle (also for families that have closed forms,
    /// to cross-check the closed expressions).
    pub fn numeric(m: MeasureSpec) -> Result<Self> {
        match &m {
            MeasureSpec::MuAlphaBeta { .. }
            | MeasureSpec::SigmaMinFamily { .. }
            | MeasureSpec::SymmetricWrapper(_) => {
                return Err(Error::NotAvailable(format!(
                    "no quadrature representation for {m:?}"
                )))
            }
            _ => {}
        }
        if !m.is_probability() {
            return Err(Error::InvalidSpec(format!(
                "handle needs a probability law, got mass {}",
                m.total_mass()
            )));
        }
        let delta = m.delta();
        if delta >= 1.0 {
            return Err(Error::InvalidSpec("measure is δ₀".into()));
        }
        let m1 = m.moment(1.0)?;
        let m_neg1 = m.moment(-1.0).ok();
        Ok(STransformHandle {
            inner: Arc::new(HandleInner {
                source: Source::Numeric(m),
                delta,
                m1,
                m_neg1,
            }),
        })
    }

    pub fn closed(tag: ClosedFormTag) -> Self {
        use ExtendedMoment::*;
        let (m1, m_neg1) = match tag {
            ClosedFormTag::PointMass { a } => (Finite(a), Some(Finite(1.0 / a))),
            ClosedFormTag::FreePoisson => (Finite(1.0), Some(Infinite)),
            ClosedFormTag::MuAlphaBeta { alpha, beta } => (
                if beta == 0.0 { Finite(1.0) } else { Infinite },
                Some(if alpha == 0.0 { Finite(1.0) } else { Infinite }),
            ),
            ClosedFormTag::SymmetricBernoulli => (Finite(0.0), None),
        };
        STransformHandle {
            inner: Arc::new(HandleInner {
                source: Source::Closed(tag),
                delta: 0.0,
                m1,
                m_neg1,
            }),
        }
    }

    pub(crate) fn from_id_law(pair: LevyPair) -> Self {
        let m1 = pair.m1();
        let m_neg1 = Some(pair.m_neg1());
        STransformHandle {
            inner: Arc::new(HandleInner {
                source: Source::IdLaw(pair),
                delta: 0.0,
                m1,
                m_neg1,
            }),
        }
    }

    pub(crate) fn product(parts: Vec<(STransformHandle, f64)>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidSpec("empty combination".into()));
        }
        for (_, t) in &parts {
            if !(*t >= 1.0) {
                return Err(Error::ExponentBelowOne(*t));
            }
        }
        let delta = parts.iter().map(|(h, _)| h.delta()).fold(0.0_f64, f64::max);
        // m₁(⊠ᵢ μᵢ^{tᵢ}) = ∏ m₁ᵢ^{tᵢ}; same shape for m₋₁.
        let fold = |get: &dyn Fn(&STransformHandle) -> Option<ExtendedMoment>| {
            let mut acc = 1.0_f64;
            for (h, t) in &parts {
                match get(h)? {
                    ExtendedMoment::Infinite => return Some(ExtendedMoment::Infinite),
                    ExtendedMoment::Finite(v) => acc *= v.powf(*t),
                }
            }
            Some(ExtendedMoment::Finite(acc))
        };
        let m1 = fold(&|h| Some(h.m1())).unwrap();
        let m_neg1 = fold(&|h| h.m_neg1());
        Ok(STransformHandle {
            inner: Arc::new(HandleInner {
                source: Source::Product(parts),
                delta,
                m1,
                m_neg1,
            }),
        })
    }

    /// Left-tail dual handle with Ŝ(w) = 1/S(−1−w). Needs δ = 0.
    pub fn hat(&self) -> Result<STransformHandle> {
        if self.delta() > 0.0 {
            return Err(Error::AtomAtZero(self.delta()));
        }
        let m1 = self
            .m_neg1()
            .ok_or_else(|| Error::NotAvailable("m₋₁ unknown; cannot form the dual".into()))?;
        let m_neg1 = Some(self.m1());
        Ok(STransformHandle {
            inner: Arc::new(HandleInner {
                source: Source::Hat(self.clone()),
                delta: 0.0,
                m1,
                m_neg1,
            }),
        })
    }

    pub fn delta(&self) -> f64 {
        self.inner.delta
    }

    /// Domain (δ−1, 0) of S.
    pub fn domain(&self) -> (f64, f64) {
        (self.inner.delta - 1.0, 0.0)
    }

    pub fn m1(&self) -> ExtendedMoment {
        self.inner.m1
    }

    pub fn m_neg1(&self) -> Option<ExtendedMoment> {
        self.inner.m_neg1
    }

    fn check_domain(&self, w: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        if w > lo && w < hi {
            Ok(())
        } else {
            Err(Error::OutOfRange { arg: w, lo, hi })
        }
    }

    /// S(w), positive and decreasing on (δ−1, 0).
    pub fn s(&self, w: f64) -> Result<f64> {
        Ok(self.ln_s(w)?.exp())
    }

    /// ln S(w); products and convolution powers accumulate here so that S
    /// spanning many decades cannot overflow.
    pub fn ln_s(&self, w: f64) -> Result<f64> {
        self.check_domain(w)?;
        match &self.inner.source {
            Source::Closed(tag) => match tag {
                ClosedFormTag::PointMass { a } => Ok(-a.ln()),
                ClosedFormTag::FreePoisson => Ok(-(1.0 + w).ln()),
                ClosedFormTag::MuAlphaBeta { alpha, beta } => {
                    Ok(beta * (-w).ln() - alpha * (1.0 + w).ln())
                }
                ClosedFormTag::SymmetricBernoulli => Err(Error::NotAvailable(
                    "imaginary-valued S; use closed_form_s".into(),
                )),
            },
            Source::Numeric(m) => {
                let chi = chi_eval(m, w)?;
                Ok(((1.0 + w) / w * chi).ln())
            }
            Source::IdLaw(pair) => pair.v_eval(w),
            Source::Product(parts) => {
                let mut acc = 0.0;
                for (h, t) in parts {
                    acc += t * h.ln_s(w)?;
                }
                Ok(acc)
            }
            Source::Hat(h) => Ok(-h.ln_s(-1.0 - w)?),
        }
    }

    /// χ(w) = w·S(w)/(1+w).
    pub fn chi(&self, w: f64) -> Result<f64> {
        match &self.inner.source {
            Source::Numeric(m) => chi_eval(m, w),
            _ => Ok(w / (1.0 + w) * self.s(w)?),
        }
    }

    /// ψ(z) for z < 0: the w with χ(w) = z (consistent with `psi_eval` when
    /// the handle wraps a plain measure).
    pub fn psi(&self, z: f64) -> Result<f64> {
        require_negative(z)?;
        match &self.inner.source {
            Source::Numeric(m) => psi_eval(m, z),
            Source::Closed(ClosedFormTag::PointMass { a }) => Ok(z * a / (1.0 - z * a)),
            Source::Closed(ClosedFormTag::FreePoisson) => {
                Ok((1.0 - 2.0 * z - (1.0 - 4.0 * z).sqrt()) / (2.0 * z))
            }
            _ => {
                // Root-find χ(w) = z over w ∈ (δ−1, 0); χ is increasing.
                let eval = |u: f64| self.chi(-u.exp());
                // u = ln(−w) ranges over (−∞, ln(1−δ)); stay strictly inside.
                let u_max = (1.0 - self.inner.delta).ln() - 1e-12;
                solve_monotone_log(&eval, z, u_max.min(-1.0), -707.0, u_max, CHI_TOL).map_err(|e| {
                    match e {
                        Error::NoBracket(msg) => Error::NoBracket(format!(
                            "χ not numerically invertible on ({}, 0): {msg}",
                            self.inner.delta - 1.0
                        )),
                        other => other,
                    }
                })
            }
        }
    }

    /// p-th derivative of S at w, p ∈ 1..=3.
    pub fn s_deriv(&self, w: f64, p: usize) -> Result<f64> {
        self.check_domain(w)?;
        if p == 0 {
            return self.s(w);
        }
        if p > 3 {
            return Err(Error::OrderTooHigh(p, 3));
        }
        match &self.inner.source {
            Source::Closed(tag) => closed_s_deriv(*tag, w, p),
            Source::Numeric(m) => numeric_s_deriv(m, w, p),
            Source::IdLaw(pair) => {
                // S = e^v: assemble from the derivatives of v.
                let s = self.s(w)?;
                let l1 = pair.v_deriv(w, 1)?;
                match p {
                    1 => Ok(s * l1),
                    2 => {
                        let l2 = pair.v_deriv(w, 2)?;
                        Ok(s * (l1 * l1 + l2))
                    }
                    _ => {
                        let l2 = pair.v_deriv(w, 2)?;
                        let l3 = pair.v_deriv(w, 3)?;
                        Ok(s * (l1 * l1 * l1 + 3.0 * l1 * l2 + l3))
                    }
                }
            }
            Source::Product(parts) => {
                // (ln S)^{(k)} = Σ tᵢ (ln Sᵢ)^{(k)}.
                let s = self.s(w)?;
                let mut lam = [0.0_f64; 3];
                for (h, t) in parts {
                    let ld = h.log_derivs(w, p)?;
                    for k in 0..p {
                        lam[k] += t * ld[k];
                    }
                }
                Ok(match p {
                    1 => s * lam[0],
                    2 => s * (lam[0] * lam[0] + lam[1]),
                    _ => s * (lam[0].powi(3) + 3.0 * lam[0] * lam[1] + lam[2]),
                })
            }
            Source::Hat(h) => {
                // ln Ŝ(w) = −ln S(u), u = −1−w; each d/dw brings a factor −1,
                // so (ln Ŝ)^{(k)}(w) = (−1)^{k+1} (ln S)^{(k)}(u).
                let u = -1.0 - w;
                let ld = h.log_derivs(u, p)?;
                let s = self.s(w)?;
                let l1 = ld[0];
                Ok(match p {
                    1 => s * l1,
                    2 => {
                        let l2 = -ld[1];
                        s * (l1 * l1 + l2)
                    }
                    _ => {
                        let l2 = -ld[1];
                        let l3 = ld[2];
                        s * (l1 * l1 * l1 + 3.0 * l1 * l2 + l3)
                    }
                })
            }
        }
    }

    /// (ln S)′, (ln S)″, (ln S)‴ up to order p.
    fn log_derivs(&self, w: f64, p: usize) -> Result<[f64; 3]> {
        let s = self.s(w)?;
        let mut out = [0.0; 3];
        let d1 = self.s_deriv(w, 1)?;
        out[0] = d1 / s;
        if p >= 2 {
            let d2 = self.s_deriv(w, 2)?;
            out[1] = d2 / s - (d1 / s).powi(2);
        }
        if p >= 3 {
            let d2 = self.s_deriv(w, 2)?;
            let d3 = self.s_deriv(w, 3)?;
            let r1 = d1 / s;
            out[2] = d3 / s - 3.0 * (d2 / s) * r1 + 2.0 * r1.powi(3);
        }
        Ok(out)
    }

    /// Derivatives of ψ recovered from χ derivatives by the inverse-function
    /// relations (the MuAlphaBeta family has no quadrature representation).
    fn psi_deriv_via_chi(&self, z: f64, k: usize) -> Result<f64> {
        let w = self.psi(z)?;
        let s = self.s(w)?;
        let ds = [
            self.s_deriv(w, 1)?,
            self.s_deriv(w, 2)?,
            self.s_deriv(w, 3)?,
        ];
        // χ = r·S with r(w) = w/(1+w): r′ = (1+w)^{−2}, r″ = −2(1+w)^{−3},
        // r‴ = 6(1+w)^{−4}, r⁗ = −24(1+w)^{−5}.
        let q = 1.0 + w;
        let r = [
            w / q,
            q.powi(-2),
            -2.0 * q.powi(-3),
            6.0 * q.powi(-4),
            -24.0 * q.powi(-5),
        ];
        let binom: [&[f64]; 5] = [
            &[1.0],
            &[1.0, 1.0],
            &[1.0, 2.0, 1.0],
            &[1.0, 3.0, 3.0, 1.0],
            &[1.0, 4.0, 6.0, 4.0, 1.0],
        ];
        let chi_d = |n: usize| -> f64 {
            let mut acc = 0.0;
            for j in 0..=n {
                let sj = if n == j { s } else { ds[n - j - 1] };
                acc += binom[n][j] * r[j] * sj;
            }
            acc
        };
        let c1 = chi_d(1);
        let p1 = 1.0 / c1;
        if k == 1 {
            return Ok(p1);
        }
        let c2 = chi_d(2);
        let p2 = -c2 * p1.powi(3);
        if k == 2 {
            return Ok(p2);
        }
        let c3 = chi_d(3);
        let p3 = (3.0 * c2 * c2 - c1 * c3) / c1.powi(5);
        if k == 3 {
            return Ok(p3);
        }
        let c4 = chi_d(4);
        // One order up in the same Faà di Bruno shape, roles of ψ/χ swapped.
        let p4 =
            -(c4 * p1.powi(4) + 6.0 * c3 * p1 * p1 * p2 + 3.0 * c2 * p2 * p2 + 4.0 * c2 * p1 * p3)
                * p1;
        Ok(p4)
    }

    /// Sampled (w, S(w)) table as CSV, for debugging.
    pub fn table_csv(&self, ws: &[f64]) -> Result<String> {
        let mut out = String::from("w,s\n");
        for &w in ws {
            out.push_str(&format!("{w},{}\n", self.s(w)?));
        }
        Ok(out)
    }
}

/// Analytic derivatives for the closed-form tags.
fn closed_s_deriv(tag: ClosedFormTag, w: f64, p: usize) -> Result<f64> {
    match tag {
        ClosedFormTag::PointMass { .. } => Ok(0.0),
        ClosedFormTag::FreePoisson => {
            let q = 1.0 + w;
            Ok(match p {
                1 => -q.powi(-2),
                2 => 2.0 * q.powi(-3),
                _ => -6.0 * q.powi(-4),
            })
        }
        ClosedFormTag::MuAlphaBeta { alpha, beta } => {
            let s = (-w).powf(beta) / (1.0 + w).powf(alpha);
            let q = 1.0 + w;
            let l1 = beta / w - alpha / q;
            let l2 = -beta / (w * w) + alpha / (q * q);
            let l3 = 2.0 * beta / (w * w * w) - 2.0 * alpha / (q * q * q);
            Ok(match p {
                1 => s * l1,
                2 => s * (l1 * l1 + l2),
                _ => s * (l1 * l1 * l1 + 3.0 * l1 * l2 + l3),
            })
        }
        ClosedFormTag::SymmetricBernoulli => Err(Error::NotAvailable(
            "imaginary-valued S has no real derivative here".into(),
        )),
    }
}

/// ζ-space derivative propagation for quadrature-backed handles.
fn numeric_s_deriv(m: &MeasureSpec, w: f64, p: usize) -> Result<f64> {
    let zeta = chi_eval(m, w)?;
    let b1 = b_k(m, zeta, 1, PSI_EPS)?;
    let b2 = b_k(m, zeta, 2, PSI_EPS)?;
    let p1 = (b1 + b2) / zeta;
    let t1 = 1.0 - b2 / (b1 * b1);
    if p == 1 {
        return Ok(t1 / p1);
    }
    let b3 = b_k(m, zeta, 3, PSI_EPS)?;
    let p2 = 2.0 * (b2 + b3) / (zeta * zeta);
    let t2 = 2.0 * (b2 * b2 - b1 * b3) / (zeta * b1.powi(3));
    if p == 2 {
        return Ok((t2 * p1 - t1 * p2) / p1.powi(3));
    }
    let b4 = b_k(m, zeta, 4, PSI_EPS)?;
    let p3 = 6.0 * (b3 + b4) / zeta.powi(3);
    let t3 = -6.0 * (b2.powi(3) - 2.0 * b1 * b2 * b3 + b1 * b1 * b4) / (zeta * zeta * b1.powi(4));
    Ok(t3 / p1.powi(3) - 3.0 * t2 * p2 / p1.powi(4) + t1 * (3.0 * p2 * p2 - p1 * p3) / p1.powi(5))
}
