//! Measures on [0, ∞) (and symmetric measures on ℝ via |X|).
//!
//! A [`MeasureSpec`] describes a measure well enough to compute moments,
//! tails μ((x,∞)), pushforwards, samples, and — in [`crate::transforms`] —
//! the moment transform ψ and everything derived from it. Probability
//! variants have total mass 1; `SigmaMinFamily` is the finite measure
//! σ([0,x)) = c·min(x^α, d^α) used as a Lévy measure.
//!
//! All values are immutable after construction and safe to share.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::Error;
use crate::quad;
use crate::Result;

/// A nonnegative moment value that may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedMoment {
    Finite(f64),
    Infinite,
}

impl ExtendedMoment {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedMoment::Finite(_))
    }

    /// Finite value, or +∞.
    pub fn as_f64(&self) -> f64 {
        match self {
            ExtendedMoment::Finite(v) => *v,
            ExtendedMoment::Infinite => f64::INFINITY,
        }
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            ExtendedMoment::Finite(v) => Some(*v),
            ExtendedMoment::Infinite => None,
        }
    }
}

impl fmt::Display for ExtendedMoment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedMoment::Finite(v) => write!(f, "{v}"),
            ExtendedMoment::Infinite => write!(f, "+inf"),
        }
    }
}

/// Declared analytic continuation of a density grid beyond its last node.
///
/// `Power` means μ((x,∞)) = coeff·x^{−alpha}; `Exp` means
/// μ((x,∞)) = coeff·exp(−rate·x). The ψ-quadrature needs the full half-line,
/// and for heavy tails the region beyond any finite grid dominates ψ near 0⁻.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailExt {
    Power { alpha: f64, coeff: f64 },
    Exp { rate: f64, coeff: f64 },
}

impl TailExt {
    /// μ((x,∞)) under the extension.
    pub fn tail(&self, x: f64) -> f64 {
        match *self {
            TailExt::Power { alpha, coeff } => coeff * x.powf(-alpha),
            TailExt::Exp { rate, coeff } => coeff * (-rate * x).exp(),
        }
    }

    /// Density of the extension at x (derivative of the tail, negated).
    fn density(&self, x: f64) -> f64 {
        match *self {
            TailExt::Power { alpha, coeff } => coeff * alpha * x.powf(-alpha - 1.0),
            TailExt::Exp { rate, coeff } => coeff * rate * (-rate * x).exp(),
        }
    }

    /// Smallest T ≥ from with tail(T) ≤ bound (capped at 1e300).
    fn truncation_point(&self, from: f64, bound: f64) -> f64 {
        let t = match *self {
            TailExt::Power { alpha, coeff } => {
                if coeff <= bound {
                    from
                } else {
                    (coeff / bound).powf(1.0 / alpha)
                }
            }
            TailExt::Exp { rate, coeff } => {
                if coeff <= bound {
                    from
                } else {
                    (coeff / bound).ln() / rate
                }
            }
        };
        t.clamp(from, 1e300)
    }
}

/// Shared callable tail for the `TailFunction` variant.
pub type TailFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Tagged description of a measure.
#[derive(Clone)]
pub enum MeasureSpec {
    /// Purely atomic measure: list of (location ≥ 0, weight > 0).
    Atoms(Vec<(f64, f64)>),
    /// Piecewise-linear density on `nodes` (trapezoid rule), with a declared
    /// analytic tail beyond the last node.
    DensityGrid {
        nodes: Vec<f64>,
        values: Vec<f64>,
        tail: Option<TailExt>,
    },
    /// Density α x^{−α−1} on [1, ∞); tail x^{−α}.
    Pareto { alpha: f64 },
    /// δ_a with a > 0.
    PointMass { a: f64 },
    /// Free Poisson (Marchenko–Pastur) law with rate 1: density
    /// √((4−t)/t)/(2π) on (0, 4].
    FreePoisson,
    /// The family with S(z) = (−z)^β/(1+z)^α; defined through its S-transform,
    /// no explicit distribution function.
    MuAlphaBeta { alpha: f64, beta: f64 },
    /// Finite measure with σ([0,x)) = c·min(x^α, d^α); total mass c·d^α.
    /// Used as a Lévy measure, not a probability law.
    SigmaMinFamily { c: f64, d: f64, alpha: f64 },
    /// Measure given by its (nonincreasing) tail function x ↦ μ((x,∞)).
    TailFunction {
        tail: TailFn,
        /// Atom mass at zero.
        delta: f64,
        /// Support lower edge (tail is constant below it).
        support_lo: f64,
        /// Optional finite support upper edge (tail vanishes beyond it).
        support_hi: Option<f64>,
    },
    /// Law of a symmetric real variable X described through the law of |X|.
    SymmetricWrapper(Box<MeasureSpec>),
}

impl fmt::Debug for MeasureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureSpec::Atoms(a) => f.debug_tuple("Atoms").field(a).finish(),
            MeasureSpec::DensityGrid { nodes, tail, .. } => f
                .debug_struct("DensityGrid")
                .field("n_nodes", &nodes.len())
                .field("tail", tail)
                .finish(),
            MeasureSpec::Pareto { alpha } => write!(f, "Pareto({alpha})"),
            MeasureSpec::PointMass { a } => write!(f, "PointMass({a})"),
            MeasureSpec::FreePoisson => write!(f, "FreePoisson"),
            MeasureSpec::MuAlphaBeta { alpha, beta } => write!(f, "MuAlphaBeta({alpha},{beta})"),
            MeasureSpec::SigmaMinFamily { c, d, alpha } => {
                write!(f, "SigmaMinFamily(c={c},d={d},alpha={alpha})")
            }
            MeasureSpec::TailFunction {
                delta, support_lo, ..
            } => f
                .debug_struct("TailFunction")
                .field("delta", delta)
                .field("support_lo", support_lo)
                .finish(),
            MeasureSpec::SymmetricWrapper(inner) => {
                f.debug_tuple("SymmetricWrapper").field(inner).finish()
            }
        }
    }
}

impl MeasureSpec {
    // ------------------------------------------------------------------
    // Constructors
    // ------------------------------------------------------------------

    pub fn atoms(list: Vec<(f64, f64)>) -> Result<Self> {
        if list.is_empty() {
            return Err(Error::InvalidSpec("empty atom list".into()));
        }
        for &(loc, w) in &list {
            if !(loc >= 0.0) || !(w > 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "atom (loc={loc}, w={w}) needs loc >= 0 and w > 0"
                )));
            }
        }
        let mut list = list;
        list.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        Ok(MeasureSpec::Atoms(list))
    }

    pub fn point_mass(a: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::InvalidSpec(format!("point mass at {a}, need a > 0")));
        }
        Ok(MeasureSpec::PointMass { a })
    }

    pub fn pareto(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::InvalidSpec(format!("Pareto index {alpha} <= 0")));
        }
        Ok(MeasureSpec::Pareto { alpha })
    }

    pub fn free_poisson() -> Self {
        MeasureSpec::FreePoisson
    }

    pub fn mu_alpha_beta(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha >= 0.0) || !(beta >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "mu_alpha_beta needs alpha, beta >= 0 (got {alpha}, {beta})"
            )));
        }
        Ok(MeasureSpec::MuAlphaBeta { alpha, beta })
    }

    pub fn sigma_min_family(c: f64, d: f64, alpha: f64) -> Result<Self> {
        if !(c > 0.0 && d > 0.0 && alpha >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "sigma_min needs c, d > 0 and alpha >= 0 (got c={c}, d={d}, alpha={alpha})"
            )));
        }
        Ok(MeasureSpec::SigmaMinFamily { c, d, alpha })
    }

    /// Piecewise-linear density on strictly increasing nodes, optionally
    /// extended by a declared analytic tail. Total mass must come out within
    /// 1e-3 of 1 (the measure is used as a probability law).
    pub fn density_grid(nodes: Vec<f64>, values: Vec<f64>, tail: Option<TailExt>) -> Result<Self> {
        let m = Self::density_grid_unchecked(nodes, values, tail)?;
        let mass = m.total_mass();
        if (mass - 1.0).abs() > 1e-3 {
            return Err(Error::InvalidSpec(format!(
                "density grid mass {mass} too far from 1"
            )));
        }
        Ok(m)
    }

    /// Grid constructor without the probability-mass check (pushforwards of
    /// grids may legitimately lose a little mass near a singular endpoint).
    pub fn density_grid_unchecked(
        nodes: Vec<f64>,
        values: Vec<f64>,
        tail: Option<TailExt>,
    ) -> Result<Self> {
        if nodes.len() < 2 || nodes.len() != values.len() {
            return Err(Error::InvalidSpec(
                "density grid needs >= 2 nodes and matching values".into(),
            ));
        }
        if nodes[0] < 0.0 {
            return Err(Error::InvalidSpec("grid nodes must be >= 0".into()));
        }
        for w in nodes.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidSpec("grid nodes must increase".into()));
            }
        }
        if values.iter().any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(Error::InvalidSpec(
                "grid values must be finite, >= 0".into(),
            ));
        }
        if let Some(t) = &tail {
            let x0 = *nodes.last().unwrap();
            match t {
                TailExt::Power { alpha, coeff } => {
                    if !(*alpha > 0.0 && *coeff >= 0.0) {
                        return Err(Error::InvalidSpec("bad power tail parameters".into()));
                    }
                    if x0 <= 0.0 {
                        return Err(Error::InvalidSpec("power tail needs last node > 0".into()));
                    }
                }
                TailExt::Exp { rate, coeff } => {
                    if !(*rate > 0.0 && *coeff >= 0.0) {
                        return Err(Error::InvalidSpec("bad exp tail parameters".into()));
                    }
                }
            }
        }
        Ok(MeasureSpec::DensityGrid {
            nodes,
            values,
            tail,
        })
    }

    /// Measure described by its tail function, with a declared atom at zero
    /// and support edges. The tail must be nonincreasing with
    /// tail(support_lo) = 1 − delta for probability use.
    pub fn tail_function(
        tail: TailFn,
        delta: f64,
        support_lo: f64,
        support_hi: Option<f64>,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::InvalidSpec(format!("delta = {delta} outside [0,1)")));
        }
        Ok(MeasureSpec::TailFunction {
            tail,
            delta,
            support_lo,
            support_hi,
        })
    }

    pub fn symmetric(inner: MeasureSpec) -> Result<Self> {
        if matches!(inner, MeasureSpec::SymmetricWrapper(_)) {
            return Err(Error::InvalidSpec("nested symmetric wrapper".into()));
        }
        Ok(MeasureSpec::SymmetricWrapper(Box::new(inner)))
    }

    /// Symmetric Bernoulli (δ_{-1} + δ_{+1})/2, i.e. |X| = 1.
    pub fn symmetric_bernoulli() -> Self {
        MeasureSpec::SymmetricWrapper(Box::new(MeasureSpec::PointMass { a: 1.0 }))
    }

    // ------------------------------------------------------------------
    // Basic queries
    // ------------------------------------------------------------------

    /// Atom mass at zero, δ = μ({0}).
    pub fn delta(&self) -> f64 {
        match self {
            MeasureSpec::Atoms(list) => list
                .iter()
                .filter(|&&(loc, _)| loc == 0.0)
                .map(|&(_, w)| w)
                .sum(),
            MeasureSpec::TailFunction { delta, .. } => *delta,
            MeasureSpec::SymmetricWrapper(inner) => inner.delta(),
            _ => 0.0,
        }
    }

    /// Total mass (1 for probability variants, c·d^α for the σ-min family).
    pub fn total_mass(&self) -> f64 {
        match self {
            MeasureSpec::Atoms(list) => list.iter().map(|&(_, w)| w).sum(),
            MeasureSpec::DensityGrid {
                nodes,
                values,
                tail,
            } => {
                let grid: f64 = nodes
                    .windows(2)
                    .zip(values.windows(2))
                    .map(|(n, v)| 0.5 * (v[0] + v[1]) * (n[1] - n[0]))
                    .sum();
                grid + tail.map_or(0.0, |t| t.tail(*nodes.last().unwrap()))
            }
            MeasureSpec::SigmaMinFamily { c, d, alpha } => c * d.powf(*alpha),
            MeasureSpec::TailFunction {
                tail,
                delta,
                support_lo,
                ..
            } => delta + tail(*support_lo),
            _ => 1.0,
        }
    }

    /// True for the variants meant to be probability laws.
    pub fn is_probability(&self) -> bool {
        !matches!(self, MeasureSpec::SigmaMinFamily { .. })
            && (self.total_mass() - 1.0).abs() < 1e-3
    }

    /// (lower, upper) support hints; upper may be +∞.
    pub(crate) fn support(&self) -> (f64, f64) {
        match self {
            MeasureSpec::Atoms(list) => (list[0].0, list.last().unwrap().0),
            MeasureSpec::DensityGrid { nodes, tail, .. } => {
                let hi = if tail.is_some() {
                    f64::INFINITY
                } else {
                    *nodes.last().unwrap()
                };
                (nodes[0], hi)
            }
            MeasureSpec::Pareto { .. } => (1.0, f64::INFINITY),
            MeasureSpec::PointMass { a } => (*a, *a),
            MeasureSpec::FreePoisson => (0.0, 4.0),
            MeasureSpec::MuAlphaBeta { .. } => (0.0, f64::INFINITY),
            MeasureSpec::SigmaMinFamily { d, .. } => (0.0, *d),
            MeasureSpec::TailFunction {
                support_lo,
                support_hi,
                ..
            } => (*support_lo, support_hi.unwrap_or(f64::INFINITY)),
            MeasureSpec::SymmetricWrapper(inner) => inner.support(),
        }
    }

    /// Density at x, where a density representation exists.
    pub fn density(&self, x: f64) -> Option<f64> {
        match self {
            MeasureSpec::Pareto { alpha } => Some(if x < 1.0 {
                0.0
            } else {
                alpha * x.powf(-alpha - 1.0)
            }),
            MeasureSpec::FreePoisson => Some(if x <= 0.0 || x >= 4.0 {
                0.0
            } else {
                ((4.0 - x) / x).sqrt() / (2.0 * std::f64::consts::PI)
            }),
            MeasureSpec::DensityGrid {
                nodes,
                values,
                tail,
            } => {
                let x_last = *nodes.last().unwrap();
                if x > x_last {
                    return Some(tail.map_or(0.0, |t| t.density(x)));
                }
                if x < nodes[0] {
                    return Some(0.0);
                }
                let i = match nodes.binary_search_by(|n| n.partial_cmp(&x).unwrap()) {
                    Ok(i) => return Some(values[i]),
                    Err(i) => i - 1,
                };
                let frac = (x - nodes[i]) / (nodes[i + 1] - nodes[i]);
                Some(values[i] + frac * (values[i + 1] - values[i]))
            }
            MeasureSpec::SigmaMinFamily { c, d, alpha } => Some(if x <= 0.0 || x >= *d {
                0.0
            } else {
                c * alpha * x.powf(alpha - 1.0)
            }),
            _ => None,
        }
    }

    // ------------------------------------------------------------------
    // Tail
    // ------------------------------------------------------------------

    /// μ((x,∞)) for x ≥ 0. For the symmetric wrapper this is P(X > x),
    /// i.e. half the tail of |X|.
    pub fn tail(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return Err(Error::OutOfRange {
                arg: x,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        match self {
            MeasureSpec::Atoms(list) => Ok(list
                .iter()
                .filter(|&&(loc, _)| loc > x)
                .map(|&(_, w)| w)
                .sum()),
            MeasureSpec::PointMass { a } => Ok(if *a > x { 1.0 } else { 0.0 }),
            MeasureSpec::Pareto { alpha } => Ok(if x <= 1.0 { 1.0 } else { x.powf(-alpha) }),
            MeasureSpec::FreePoisson => {
                if x >= 4.0 {
                    Ok(0.0)
                } else if x <= 0.0 {
                    Ok(1.0)
                } else {
                    // ∫ cos²θ over the mapped region, in closed form.
                    let theta = (x.sqrt() / 2.0).asin();
                    Ok(1.0 - (2.0 * theta + (2.0 * theta).sin()) / std::f64::consts::PI)
                }
            }
            MeasureSpec::MuAlphaBeta { .. } => Err(Error::NotAvailable(
                "MuAlphaBeta has no explicit distribution function".into(),
            )),
            MeasureSpec::SigmaMinFamily { c, d, alpha } => {
                Ok((c * d.powf(*alpha) - c * x.min(*d).powf(*alpha)).max(0.0))
            }
            MeasureSpec::DensityGrid {
                nodes,
                values,
                tail,
            } => {
                let x_last = *nodes.last().unwrap();
                if x >= x_last {
                    return Ok(tail.map_or(0.0, |t| t.tail(x)));
                }
                let ext = tail.map_or(0.0, |t| t.tail(x_last));
                // Exact integral of the piecewise-linear density over (x, x_last).
                let mut acc = ext;
                for i in (0..nodes.len() - 1).rev() {
                    let (a, b) = (nodes[i], nodes[i + 1]);
                    if b <= x {
                        break;
                    }
                    if a >= x {
                        acc += 0.5 * (values[i] + values[i + 1]) * (b - a);
                    } else {
                        let frac = (x - a) / (b - a);
                        let vx = values[i] + frac * (values[i + 1] - values[i]);
                        acc += 0.5 * (vx + values[i + 1]) * (b - x);
                    }
                }
                Ok(acc)
            }
            MeasureSpec::TailFunction { tail, .. } => Ok(tail(x)),
            MeasureSpec::SymmetricWrapper(inner) => Ok(0.5 * inner.tail(x)?),
        }
    }

    // ------------------------------------------------------------------
    // Moments
    // ------------------------------------------------------------------

    /// m_p(μ) = ∫ t^p μ(dt), +∞ marker when divergent.
    pub fn moment(&self, p: f64) -> Result<ExtendedMoment> {
        use ExtendedMoment::*;
        if p == 0.0 {
            return Ok(Finite(self.total_mass()));
        }
        match self {
            MeasureSpec::Atoms(list) => {
                let mut sum = 0.0;
                for &(loc, w) in list {
                    if loc == 0.0 {
                        if p < 0.0 {
                            return Ok(Infinite);
                        }
                        continue;
                    }
                    sum += w * loc.powf(p);
                }
                Ok(Finite(sum))
            }
            MeasureSpec::PointMass { a } => Ok(Finite(a.powf(p))),
            MeasureSpec::Pareto { alpha } => {
                if p < *alpha {
                    Ok(Finite(alpha / (alpha - p)))
                } else {
                    Ok(Infinite)
                }
            }
            MeasureSpec::FreePoisson => {
                if p <= -0.5 {
                    return Ok(Infinite);
                }
                // ∫ (4 sin²θ)^p (4/π) cos²θ dθ; smooth except the integrable
                // endpoint for p ∈ (−1/2, 0).
                let g = |theta: f64| {
                    let t = 4.0 * theta.sin().powi(2);
                    t.powf(p) * (4.0 / std::f64::consts::PI) * theta.cos().powi(2)
                };
                let v = quad::adaptive(&g, 1e-14, std::f64::consts::FRAC_PI_2, 0.0, 1e-11)?;
                Ok(Finite(v))
            }
            MeasureSpec::MuAlphaBeta { alpha, beta } => {
                // m₁ and m₋₁ come from the S-transform range; other moments
                // have no closed form here.
                if p == 1.0 {
                    Ok(if *beta == 0.0 { Finite(1.0) } else { Infinite })
                } else if p == -1.0 {
                    Ok(if *alpha == 0.0 { Finite(1.0) } else { Infinite })
                } else if (p > 1.0 && *beta > 0.0) || (p < -1.0 && *alpha > 0.0) {
                    Ok(Infinite)
                } else {
                    Err(Error::NotAvailable(format!(
                        "moment p={p} of MuAlphaBeta({alpha},{beta})"
                    )))
                }
            }
            MeasureSpec::SigmaMinFamily { c, d, alpha } => {
                if p > -alpha {
                    Ok(Finite(c * alpha * d.powf(alpha + p) / (alpha + p)))
                } else {
                    Ok(Infinite)
                }
            }
            MeasureSpec::DensityGrid {
                nodes,
                values,
                tail,
            } => {
                let mut acc = 0.0;
                for i in 0..nodes.len() - 1 {
                    let (a, b) = (nodes[i], nodes[i + 1]);
                    let (va, vb) = (values[i], values[i + 1]);
                    // Density positive at 0 makes negative moments diverge
                    // at p ≤ −1; at p ∈ (−1, 0) the singularity integrates.
                    if p <= -1.0 && a == 0.0 && va > 0.0 {
                        return Ok(Infinite);
                    }
                    let f = |t: f64| {
                        let frac = (t - a) / (b - a);
                        t.powf(p) * (va + frac * (vb - va))
                    };
                    let lo = if a == 0.0 && p < 0.0 { 1e-300 } else { a };
                    acc += quad::adaptive(&f, lo, b, 1e-300, 1e-12)?;
                }
                let x0 = *nodes.last().unwrap();
                match tail {
                    None => {}
                    Some(TailExt::Power { alpha, coeff }) => {
                        if p >= *alpha {
                            return Ok(Infinite);
                        }
                        acc += coeff * alpha / (alpha - p) * x0.powf(p - alpha);
                    }
                    Some(t @ TailExt::Exp { .. }) => {
                        let floor = 1e-18 * acc.abs().max(1e-30);
                        let hi = t.truncation_point(x0, floor);
                        if hi > x0 {
                            acc += quad::adaptive_log(
                                &|x| x.powf(p) * t.density(x),
                                x0,
                                hi,
                                floor,
                                1e-12,
                                &[],
                            )?;
                        }
                    }
                }
                Ok(Finite(acc))
            }
            MeasureSpec::TailFunction {
                tail,
                delta,
                support_lo,
                support_hi,
            } => {
                // ∫ t^p dμ over (lo, ∞) = lo^p tail(lo) + p ∫ t^{p-1} tail(t) dt.
                if p < 0.0 && *support_lo <= 0.0 {
                    // Cannot rule out divergence near 0 from the tail alone.
                    return Err(Error::NotAvailable(
                        "negative moment of a tail function supported down to 0".into(),
                    ));
                }
                if *delta > 0.0 && p < 0.0 {
                    return Ok(Infinite);
                }
                let lo = support_lo.max(1e-300);
                let head = if *support_lo > 0.0 {
                    support_lo.powf(p) * tail(*support_lo)
                } else {
                    0.0
                };
                let hi = match support_hi {
                    Some(h) => *h,
                    None => {
                        // Geometric search for the 1e-14 tail cutoff.
                        let mut t = lo.max(1.0);
                        let mut steps = 0;
                        while tail(t) * t.powf(p.max(0.0)) > 1e-14 && steps < 4000 {
                            t *= 1.5;
                            steps += 1;
                        }
                        if steps >= 4000 {
                            return Ok(Infinite);
                        }
                        t
                    }
                };
                if hi <= lo {
                    return Ok(Finite(head));
                }
                let integral =
                    quad::adaptive_log(&|t| t.powf(p - 1.0) * tail(t), lo, hi, 1e-300, 1e-11, &[])?;
                Ok(Finite(head + p * integral))
            }
            MeasureSpec::SymmetricWrapper(_) => Err(Error::NotAvailable(
                "moments of the signed variable; take symmetric_square first".into(),
            )),
        }
    }

    // ------------------------------------------------------------------
    // Pushforwards
    // ------------------------------------------------------------------

    /// Pushforward by x ↦ 1/x. Requires μ({0}) = 0.
    pub fn pushforward_inverse(&self) -> Result<MeasureSpec> {
        let d = self.delta();
        if d > 0.0 {
            return Err(Error::AtomAtZero(d));
        }
        match self {
            MeasureSpec::Atoms(list) => {
                MeasureSpec::atoms(list.iter().map(|&(loc, w)| (1.0 / loc, w)).collect())
            }
            MeasureSpec::PointMass { a } => MeasureSpec::point_mass(1.0 / a),
            // The inverse map sends the free Poisson law to the HaM13 family
            // member with S(z) = −z (free stable 1/2).
            MeasureSpec::FreePoisson => Ok(MeasureSpec::MuAlphaBeta {
                alpha: 0.0,
                beta: 1.0,
            }),
            // S_{μ̂}(z) = 1/S_μ(−1−z) swaps the two exponents.
            MeasureSpec::MuAlphaBeta { alpha, beta } => Ok(MeasureSpec::MuAlphaBeta {
                alpha: *beta,
                beta: *alpha,
            }),
            MeasureSpec::Pareto { alpha } => {
                // Support (0, 1], tail(x) = 1 − x^α for x ≤ 1.
                let a = *alpha;
                MeasureSpec::tail_function(
                    Arc::new(move |x: f64| {
                        if x >= 1.0 {
                            0.0
                        } else if x <= 0.0 {
                            1.0
                        } else {
                            1.0 - x.powf(a)
                        }
                    }),
                    0.0,
                    0.0,
                    Some(1.0),
                )
            }
            MeasureSpec::SymmetricWrapper(inner) => Ok(MeasureSpec::SymmetricWrapper(Box::new(
                inner.pushforward_inverse()?,
            ))),
            MeasureSpec::SigmaMinFamily { .. } => Err(Error::NotAvailable(
                "pushforward of the Lévy family is handled by id_laws::id_hat".into(),
            )),
            other => {
                // Generic route through the tail: μ̂((x,∞)) = μ([0,1/x)).
                let inner = other.clone();
                let mass = inner.total_mass();
                let (lo, hi) = inner.support();
                let new_lo = if hi.is_finite() { 1.0 / hi } else { 0.0 };
                let new_hi = if lo > 0.0 { Some(1.0 / lo) } else { None };
                MeasureSpec::tail_function(
                    Arc::new(move |x: f64| {
                        if x <= 0.0 {
                            return mass;
                        }
                        (mass - inner.tail(1.0 / x).unwrap_or(0.0)).max(0.0)
                    }),
                    0.0,
                    new_lo,
                    new_hi,
                )
            }
        }
    }

    /// Law of X² for a symmetric wrapper; tails satisfy
    /// μ((x,∞)) = ½ μ²((x²,∞)).
    pub fn symmetric_square(&self) -> Result<MeasureSpec> {
        let inner = match self {
            MeasureSpec::SymmetricWrapper(inner) => inner,
            _ => {
                return Err(Error::InvalidSpec(
                    "symmetric_square needs a symmetric wrapper".into(),
                ))
            }
        };
        match inner.as_ref() {
            MeasureSpec::Atoms(list) => {
                MeasureSpec::atoms(list.iter().map(|&(loc, w)| (loc * loc, w)).collect())
            }
            MeasureSpec::PointMass { a } => MeasureSpec::point_mass(a * a),
            // P(X² > x) = P(|X| > √x) = x^{-α/2}.
            MeasureSpec::Pareto { alpha } => MeasureSpec::pareto(alpha / 2.0),
            MeasureSpec::DensityGrid {
                nodes,
                values,
                tail,
            } => {
                // Change of variables u = x², density ρ(√u)/(2√u).
                let mut new_nodes = Vec::with_capacity(nodes.len());
                let mut new_values = Vec::with_capacity(nodes.len());
                for (&x, &v) in nodes.iter().zip(values) {
                    if x == 0.0 {
                        // The u-density may blow up at 0; the dropped sliver
                        // carries O(x₁·ρ(0)) mass and no tail contribution.
                        continue;
                    }
                    new_nodes.push(x * x);
                    new_values.push(v / (2.0 * x));
                }
                let new_tail = match tail {
                    None => None,
                    Some(TailExt::Power { alpha, coeff }) => Some(TailExt::Power {
                        alpha: alpha / 2.0,
                        coeff: *coeff,
                    }),
                    Some(TailExt::Exp { .. }) => {
                        return Err(Error::NotAvailable(
                            "square of an exp-tailed grid: use a tail function".into(),
                        ))
                    }
                };
                MeasureSpec::density_grid_unchecked(new_nodes, new_values, new_tail)
            }
            other => {
                let inner = other.clone();
                let delta = inner.delta();
                let (lo, hi) = inner.support();
                MeasureSpec::tail_function(
                    Arc::new(move |x: f64| inner.tail(x.max(0.0).sqrt()).unwrap_or(0.0)),
                    delta,
                    lo * lo,
                    if hi.is_finite() { Some(hi * hi) } else { None },
                )
            }
        }
    }

    // ------------------------------------------------------------------
    // Sampling
    // ------------------------------------------------------------------

    /// Deterministic sample of size n for the given seed.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(n, &mut rng)
    }

    pub(crate) fn sample_with<R: Rng>(&self, n: usize, rng: &mut R) -> Result<Vec<f64>> {
        match self {
            MeasureSpec::PointMass { a } => Ok(vec![*a; n]),
            MeasureSpec::Atoms(list) => {
                let total: f64 = list.iter().map(|&(_, w)| w).sum();
                let mut cum = Vec::with_capacity(list.len());
                let mut acc = 0.0;
                for &(loc, w) in list {
                    acc += w / total;
                    cum.push((acc, loc));
                }
                Ok((0..n)
                    .map(|_| {
                        let u: f64 = rng.random();
                        cum.iter()
                            .find(|&&(c, _)| u <= c)
                            .map(|&(_, loc)| loc)
                            .unwrap_or(list.last().unwrap().0)
                    })
                    .collect())
            }
            MeasureSpec::Pareto { alpha } => Ok((0..n)
                .map(|_| {
                    let u: f64 = rng.random();
                    (1.0 - u).powf(-1.0 / alpha)
                })
                .collect()),
            MeasureSpec::DensityGrid { .. } => {
                let inv = GridInverseCdf::build(self)?;
                Ok((0..n).map(|_| inv.invert(rng.random())).collect())
            }
            MeasureSpec::FreePoisson => Ok((0..n)
                .map(|_| {
                    let u: f64 = rng.random();
                    // Invert the closed-form tail by bisection on [0, 4].
                    let target = 1.0 - u;
                    let (mut lo, mut hi) = (0.0_f64, 4.0_f64);
                    for _ in 0..64 {
                        let mid = 0.5 * (lo + hi);
                        if self.tail(mid).unwrap() > target {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    0.5 * (lo + hi)
                })
                .collect()),
            MeasureSpec::TailFunction {
                tail,
                delta,
                support_lo,
                support_hi,
            } => {
                let hi0 = support_hi.unwrap_or(f64::MAX);
                Ok((0..n)
                    .map(|_| {
                        let u: f64 = rng.random();
                        if u < *delta {
                            return 0.0;
                        }
                        let target = 1.0 - u; // tail level
                        let mut lo = *support_lo;
                        let mut hi = if hi0 == f64::MAX {
                            let mut h = lo.max(1.0);
                            while tail(h) > target && h < 1e300 {
                                h *= 2.0;
                            }
                            h
                        } else {
                            hi0
                        };
                        for _ in 0..80 {
                            let mid = 0.5 * (lo + hi);
                            if tail(mid) > target {
                                lo = mid;
                            } else {
                                hi = mid;
                            }
                        }
                        0.5 * (lo + hi)
                    })
                    .collect())
            }
            MeasureSpec::SymmetricWrapper(inner) => {
                let magnitudes = inner.sample_with(n, rng)?;
                Ok(magnitudes
                    .into_iter()
                    .map(|m| if rng.random::<bool>() { m } else { -m })
                    .collect())
            }
            MeasureSpec::MuAlphaBeta { .. } | MeasureSpec::SigmaMinFamily { .. } => {
                Err(Error::NotAvailable(format!("sampling from {:?}", self)))
            }
        }
    }

    // ------------------------------------------------------------------
    // JSON
    // ------------------------------------------------------------------

    /// JSON document {"family": ..., "params": {...}}.
    pub fn to_json(&self) -> Result<Value> {
        let (family, params) = match self {
            MeasureSpec::Atoms(list) => (
                "atoms",
                json!({ "atoms": list.iter().map(|&(l, w)| json!([l, w])).collect::<Vec<_>>() }),
            ),
            MeasureSpec::DensityGrid {
                nodes,
                values,
                tail,
            } => {
                let tail_json = match tail {
                    None => Value::Null,
                    Some(TailExt::Power { alpha, coeff }) => {
                        json!({"kind": "power", "alpha": alpha, "coeff": coeff})
                    }
                    Some(TailExt::Exp { rate, coeff }) => {
                        json!({"kind": "exp", "rate": rate, "coeff": coeff})
                    }
                };
                (
                    "density_grid",
                    json!({"nodes": nodes, "values": values, "tail": tail_json}),
                )
            }
            MeasureSpec::Pareto { alpha } => ("pareto", json!({ "alpha": alpha })),
            MeasureSpec::PointMass { a } => ("point_mass", json!({ "a": a })),
            MeasureSpec::FreePoisson => ("free_poisson", json!({})),
            MeasureSpec::MuAlphaBeta { alpha, beta } => {
                ("mu_alpha_beta", json!({"alpha": alpha, "beta": beta}))
            }
            MeasureSpec::SigmaMinFamily { c, d, alpha } => {
                ("sigma_min", json!({"c": c, "d": d, "alpha": alpha}))
            }
            MeasureSpec::SymmetricWrapper(inner) => {
                ("symmetric", json!({ "inner": inner.to_json()? }))
            }
            MeasureSpec::TailFunction { .. } => {
                return Err(Error::NotAvailable(
                    "tail-function measures are in-process only".into(),
                ))
            }
        };
        Ok(json!({"family": family, "params": params}))
    }

    pub fn from_json(v: &Value) -> Result<MeasureSpec> {
        let family = v
            .get("family")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::InvalidSpec("missing \"family\"".into()))?;
        let params = v.get("params").cloned().unwrap_or(json!({}));
        let num = |key: &str| -> Result<f64> {
            params
                .get(key)
                .and_then(Value::as_f64)
                .ok_or_else(|| Error::InvalidSpec(format!("missing numeric \"{key}\"")))
        };
        match family {
            "atoms" => {
                let arr = params
                    .get("atoms")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::InvalidSpec("atoms: missing list".into()))?;
                let mut list = Vec::with_capacity(arr.len());
                for pair in arr {
                    let p = pair
                        .as_array()
                        .filter(|p| p.len() == 2)
                        .ok_or_else(|| Error::InvalidSpec("atoms: expect [loc, w] pairs".into()))?;
                    list.push((
                        p[0].as_f64()
                            .ok_or_else(|| Error::InvalidSpec("bad atom loc".into()))?,
                        p[1].as_f64()
                            .ok_or_else(|| Error::InvalidSpec("bad atom weight".into()))?,
                    ));
                }
                MeasureSpec::atoms(list)
            }
            "density_grid" => {
                let take = |key: &str| -> Result<Vec<f64>> {
                    params
                        .get(key)
                        .and_then(Value::as_array)
                        .map(|a| a.iter().filter_map(Value::as_f64).collect())
                        .ok_or_else(|| Error::InvalidSpec(format!("missing array \"{key}\"")))
                };
                let tail = match params.get("tail") {
                    None | Some(Value::Null) => None,
                    Some(t) => {
                        let kind = t.get("kind").and_then(Value::as_str).unwrap_or("");
                        let f = |k: &str| t.get(k).and_then(Value::as_f64);
                        match kind {
                            "power" => Some(TailExt::Power {
                                alpha: f("alpha")
                                    .ok_or_else(|| Error::InvalidSpec("tail alpha".into()))?,
                                coeff: f("coeff")
                                    .ok_or_else(|| Error::InvalidSpec("tail coeff".into()))?,
                            }),
                            "exp" => Some(TailExt::Exp {
                                rate: f("rate")
                                    .ok_or_else(|| Error::InvalidSpec("tail rate".into()))?,
                                coeff: f("coeff")
                                    .ok_or_else(|| Error::InvalidSpec("tail coeff".into()))?,
                            }),
                            other => {
                                return Err(Error::InvalidSpec(format!("tail kind \"{other}\"")))
                            }
                        }
                    }
                };
                MeasureSpec::density_grid(take("nodes")?, take("values")?, tail)
            }
            "pareto" => MeasureSpec::pareto(num("alpha")?),
            "point_mass" => MeasureSpec::point_mass(num("a")?),
            "free_poisson" => Ok(MeasureSpec::FreePoisson),
            "mu_alpha_beta" => MeasureSpec::mu_alpha_beta(num("alpha")?, num("beta")?),
            "sigma_min" => MeasureSpec::sigma_min_family(num("c")?, num("d")?, num("alpha")?),
            "symmetric" => {
                let inner = params
                    .get("inner")
                    .ok_or_else(|| Error::InvalidSpec("symmetric: missing inner".into()))?;
                MeasureSpec::symmetric(MeasureSpec::from_json(inner)?)
            }
            other => Err(Error::InvalidSpec(format!("unknown family \"{other}\""))),
        }
    }
}

/// Piecewise-linear inverse CDF over a density grid (plus its tail extension).
struct GridInverseCdf {
    nodes: Vec<f64>,
    cdf: Vec<f64>,
    values: Vec<f64>,
    tail: Option<TailExt>,
    total: f64,
}

impl GridInverseCdf {
    fn build(m: &MeasureSpec) -> Result<Self> {
        let (nodes, values, tail) = match m {
            MeasureSpec::DensityGrid {
                nodes,
                values,
                tail,
            } => (nodes, values, tail),
            _ => return Err(Error::InvalidSpec("not a density grid".into())),
        };
        let mut cdf = Vec::with_capacity(nodes.len());
        cdf.push(0.0);
        let mut acc = 0.0;
        for i in 0..nodes.len() - 1 {
            acc += 0.5 * (values[i] + values[i + 1]) * (nodes[i + 1] - nodes[i]);
            cdf.push(acc);
        }
        let total = acc + tail.map_or(0.0, |t| t.tail(*nodes.last().unwrap()));
        Ok(GridInverseCdf {
            nodes: nodes.clone(),
            cdf,
            values: values.clone(),
            tail: *tail,
            total,
        })
    }

    fn invert(&self, u: f64) -> f64 {
        let target = u * self.total;
        let grid_mass = *self.cdf.last().unwrap();
        if target > grid_mass {
            // Tail extension: solve tail(x) = total − target analytically.
            let remaining = (self.total - target).max(1e-300);
            let x0 = *self.nodes.last().unwrap();
            return match self.tail {
                Some(TailExt::Power { alpha, coeff }) => {
                    (coeff / remaining).powf(1.0 / alpha).max(x0)
                }
                Some(TailExt::Exp { rate, coeff }) => ((coeff / remaining).ln() / rate).max(x0),
                None => x0,
            };
        }
        let i = match self
            .cdf
            .binary_search_by(|c| c.partial_cmp(&target).unwrap())
        {
            Ok(i) => return self.nodes[i.min(self.nodes.len() - 1)],
            Err(0) => return self.nodes[0],
            Err(i) => i - 1,
        };
        // Solve the quadratic piece of the CDF on [nodes[i], nodes[i+1]].
        let (a, b) = (self.nodes[i], self.nodes[i + 1]);
        let (va, vb) = (self.values[i], self.values[i + 1]);
        let need = target - self.cdf[i];
        let h = b - a;
        let slope = (vb - va) / h;
        if slope.abs() < 1e-300 {
            if va <= 0.0 {
                return a;
            }
            return a + need / va;
        }
        let disc = (va * va + 2.0 * slope * need).max(0.0);
        a + (disc.sqrt() - va) / slope
    }
}

// ----------------------------------------------------------------------
// Integration against the measure (shared with the transforms module)
// ----------------------------------------------------------------------

/// An integrand with the extra structure the measure integrator needs.
pub(crate) struct Integrand<'a> {
    /// f(t), bounded on the support.
    pub f: &'a dyn Fn(f64) -> f64,
    /// f′(t), used for measures represented by their tail function.
    pub df: &'a dyn Fn(f64) -> f64,
    /// Nonincreasing envelope: sup_{t ≥ T} |f(t)| ≤ envelope(T).
    pub envelope: &'a dyn Fn(f64) -> f64,
    /// Transition scale of f (breakpoint hint), e.g. 1/|z|.
    pub scale: f64,
}

impl MeasureSpec {
    /// ∫ f dμ with relative tolerance `eps_rel`.
    ///
    /// Truncates the half-line using the measure's declared tail and the
    /// integrand's envelope; far-tail mass is integrated in log coordinates so
    /// transition scales like 1/|z| ~ 1e30 stay resolvable.
    pub(crate) fn integrate_dmu(&self, ig: &Integrand<'_>, eps_rel: f64) -> Result<f64> {
        match self {
            MeasureSpec::Atoms(list) => Ok(list.iter().map(|&(loc, w)| w * (ig.f)(loc)).sum()),
            MeasureSpec::PointMass { a } => Ok((ig.f)(*a)),
            MeasureSpec::FreePoisson => {
                let g = |theta: f64| {
                    let t = 4.0 * theta.sin().powi(2);
                    (ig.f)(t) * (4.0 / std::f64::consts::PI) * theta.cos().powi(2)
                };
                quad::adaptive(&g, 0.0, std::f64::consts::FRAC_PI_2, 1e-300, eps_rel)
            }
            MeasureSpec::SigmaMinFamily { c, d, alpha } => {
                // Substitution t = s^{1/α} turns the density into c·ds.
                let g = |s: f64| (ig.f)(s.powf(1.0 / alpha)) * c;
                quad::adaptive(&g, 0.0, d.powf(*alpha), 1e-300, eps_rel)
            }
            MeasureSpec::Pareto { alpha } => {
                let density = |t: f64| alpha * t.powf(-alpha - 1.0);
                let h = |t: f64| (ig.f)(t) * density(t);
                let coarse = quad::adaptive_log(
                    &h,
                    1.0,
                    64.0 * ig.scale.max(1.0),
                    1e-300,
                    1e-4,
                    &[ig.scale],
                )?;
                let floor = 0.05 * eps_rel * coarse.abs().max(1e-280);
                let ext = TailExt::Power {
                    alpha: *alpha,
                    coeff: 1.0,
                };
                let hi = self.envelope_cut(&ext, 1.0, floor, ig);
                quad::adaptive_log(&h, 1.0, hi, floor, eps_rel, &[ig.scale])
            }
            MeasureSpec::DensityGrid {
                nodes,
                values,
                tail,
            } => {
                // Grid part: 5-point Gauss per interval (density is linear).
                let mut acc = gauss5_piecewise(nodes, values, ig.f);
                if let Some(ext) = tail {
                    let x0 = *nodes.last().unwrap();
                    let h = |t: f64| (ig.f)(t) * ext.density(t);
                    let coarse = quad::adaptive_log(
                        &h,
                        x0,
                        (64.0 * ig.scale.max(1.0)).max(x0 * 4.0),
                        1e-300,
                        1e-4,
                        &[ig.scale],
                    )?;
                    let floor = 0.05 * eps_rel * (acc.abs() + coarse.abs()).max(1e-280);
                    let hi = self.envelope_cut(ext, x0, floor, ig);
                    acc += quad::adaptive_log(&h, x0, hi, floor, eps_rel, &[ig.scale])?;
                }
                Ok(acc)
            }
            MeasureSpec::TailFunction {
                tail,
                delta,
                support_lo,
                support_hi,
            } => {
                // ∫ f dμ = f(0)(δ + tail(lo)) + ∫ f′(t) tail(t) dt over (lo, hi).
                let head = (ig.f)(0.0) * (delta + tail(*support_lo));
                let lo = *support_lo;
                let hi = match support_hi {
                    Some(h) => *h,
                    None => {
                        let mut t = lo.max(ig.scale.max(1.0));
                        let mut steps = 0;
                        while tail(t) * (ig.envelope)(t) > 1e-16 && steps < 4000 {
                            t *= 1.5;
                            steps += 1;
                        }
                        t
                    }
                };
                if hi <= lo {
                    return Ok(head);
                }
                let g = |t: f64| (ig.df)(t) * tail(t);
                let small = lo.max(1e-12 * ig.scale.min(1.0)).min(hi);
                let mut acc = head;
                if small > lo {
                    acc += quad::adaptive(&g, lo, small, 1e-300, eps_rel)?;
                }
                if hi > small.max(1e-300) {
                    acc += quad::adaptive_log(
                        &g,
                        small.max(1e-300),
                        hi,
                        1e-300,
                        eps_rel,
                        &[ig.scale],
                    )?;
                }
                Ok(acc)
            }
            MeasureSpec::MuAlphaBeta { .. } => Err(Error::NotAvailable(
                "MuAlphaBeta integrates only through its S-transform".into(),
            )),
            MeasureSpec::SymmetricWrapper(_) => Err(Error::NotAvailable(
                "symmetric laws integrate through symmetric_square".into(),
            )),
        }
    }

    /// Truncation point where declared-tail mass times the integrand envelope
    /// drops below `floor`.
    fn envelope_cut(&self, ext: &TailExt, from: f64, floor: f64, ig: &Integrand<'_>) -> f64 {
        let mut hi = ext.truncation_point(from, floor);
        // The envelope can only shrink the requirement; expand while the
        // product bound is still above the floor (defended by the 1e300 cap).
        let mut guard = 0;
        while ext.tail(hi) * (ig.envelope)(hi) > floor && hi < 1e300 && guard < 200 {
            hi *= 8.0;
            guard += 1;
        }
        hi.max(from * (1.0 + 1e-12))
    }
}

/// Σ over intervals of 5-point Gauss–Legendre applied to f × (linear density).
fn gauss5_piecewise(nodes: &[f64], values: &[f64], f: &dyn Fn(f64) -> f64) -> f64 {
    // Gauss–Legendre 5 on [-1, 1].
    const X: [f64; 5] = [
        -0.906179845938664,
        -0.538469310105683,
        0.0,
        0.538469310105683,
        0.906179845938664,
    ];
    const W: [f64; 5] = [
        0.236926885056189,
        0.478628670499366,
        0.568888888888889,
        0.478628670499366,
        0.236926885056189,
    ];
    let mut acc = 0.0;
    for i in 0..nodes.len() - 1 {
        let (a, b) = (nodes[i], nodes[i + 1]);
        let (va, vb) = (values[i], values[i + 1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut s = 0.0;
        for k in 0..5 {
            let t = mid + half * X[k];
            let rho = va + (t - a) / (b - a) * (vb - va);
            s += W[k] * f(t) * rho;
        }
        acc += s * half;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pareto_grid(alpha: f64, x_max: f64, n: usize) -> MeasureSpec {
        // Geometric nodes on [1, x_max] sampling the Pareto density, plus the
        // exact power tail beyond.
        let ratio = (x_max.ln() / (n as f64 - 1.0)).exp();
        let mut nodes = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n);
        let mut x = 1.0_f64;
        for _ in 0..n {
            nodes.push(x);
            values.push(alpha * x.powf(-alpha - 1.0));
            x *= ratio;
        }
        // Exact Pareto continuation: tail(x) = x^{-alpha}.
        MeasureSpec::density_grid(nodes, values, Some(TailExt::Power { alpha, coeff: 1.0 }))
            .unwrap()
    }

    #[test]
    fn pareto_tail_examples() {
        let m = MeasureSpec::pareto(2.0).unwrap();
        assert_eq!(m.tail(2.0).unwrap(), 0.25);
        let pm = MeasureSpec::point_mass(2.0).unwrap();
        assert_eq!(pm.tail(1.0).unwrap(), 1.0);
        assert_eq!(pm.tail(3.0).unwrap(), 0.0);
    }

    #[test]
    fn density_grid_tail_matches_pareto() {
        let m = pareto_grid(1.5, 1e6, 4000);
        let t = m.tail(10.0).unwrap();
        let exact = 10f64.powf(-1.5);
        assert!((t - exact).abs() < 1e-6, "grid tail {t} vs exact {exact}");
    }

    #[test]
    fn moments() {
        let m = MeasureSpec::pareto(2.0).unwrap();
        assert_eq!(m.moment(1.0).unwrap(), ExtendedMoment::Finite(2.0));
        assert_eq!(m.moment(2.0).unwrap(), ExtendedMoment::Infinite);
        let pm = MeasureSpec::point_mass(3.0).unwrap();
        assert_eq!(pm.moment(2.0).unwrap(), ExtendedMoment::Finite(9.0));
        // m₁ of the free Poisson law is 1, m₂ = 2 (Catalan numbers).
        let fp = MeasureSpec::free_poisson();
        let m1 = fp.moment(1.0).unwrap().finite().unwrap();
        let m2 = fp.moment(2.0).unwrap().finite().unwrap();
        assert!((m1 - 1.0).abs() < 1e-9, "m1 = {m1}");
        assert!((m2 - 2.0).abs() < 1e-9, "m2 = {m2}");
        assert_eq!(fp.moment(-1.0).unwrap(), ExtendedMoment::Infinite);
        // σ-min family: m₋₁ = cα d^{α−1}/(α−1) for α > 1.
        let s = MeasureSpec::sigma_min_family(1.0, 1.0, 2.0).unwrap();
        assert!((s.moment(-1.0).unwrap().finite().unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(s.total_mass(), 1.0);
    }

    #[test]
    fn moment_zero_is_mass() {
        for m in [
            MeasureSpec::pareto(0.7).unwrap(),
            MeasureSpec::free_poisson(),
            MeasureSpec::atoms(vec![(1.0, 0.5), (2.0, 0.5)]).unwrap(),
        ] {
            assert!((m.moment(0.0).unwrap().finite().unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pushforward_inverse_atoms_involution() {
        let m = MeasureSpec::atoms(vec![(2.0, 1.0)]).unwrap();
        let inv = m.pushforward_inverse().unwrap();
        match &inv {
            MeasureSpec::Atoms(list) => assert_eq!(list[0], (0.5, 1.0)),
            other => panic!("expected atoms, got {other:?}"),
        }
        let back = inv.pushforward_inverse().unwrap();
        match &back {
            MeasureSpec::Atoms(list) => assert_eq!(list[0], (2.0, 1.0)),
            other => panic!("expected atoms, got {other:?}"),
        }
    }

    #[test]
    fn pushforward_inverse_rejects_atom_at_zero() {
        let m = MeasureSpec::atoms(vec![(0.0, 0.3), (1.0, 0.7)]).unwrap();
        assert!(matches!(m.pushforward_inverse(), Err(Error::AtomAtZero(_))));
    }

    #[test]
    fn pushforward_inverse_pareto_support() {
        let m = MeasureSpec::pareto(1.5).unwrap();
        let inv = m.pushforward_inverse().unwrap();
        assert_eq!(inv.tail(1.0).unwrap(), 0.0);
        assert_eq!(inv.tail(2.0).unwrap(), 0.0);
        // m₁(μ̂) = m₋₁(μ) = α/(α+1).
        let m1 = inv.moment(1.0).unwrap().finite().unwrap();
        assert!((m1 - 1.5 / 2.5).abs() < 1e-9, "m1 = {m1}");
        // The tail-function sampler agrees with the tail it wraps.
        let s = inv.sample(100_000, 3).unwrap();
        let emp = s.iter().filter(|&&x| x > 0.5).count() as f64 / s.len() as f64;
        let exact = inv.tail(0.5).unwrap();
        assert!((emp - exact).abs() < 5e-3, "{emp} vs {exact}");
    }

    #[test]
    fn exponential_tail_extension_paths() {
        // Uniform density on [0,1) carrying e^{−x} mass beyond x = 1:
        // total 0.9 + 0.1, m₁ = 0.45 + 0.1(1+1/r)e^{−r}·e^{r} scaled below.
        let rate = 1.0;
        let coeff = 0.1 * 1.0f64.exp(); // tail(1) = 0.1
        let m = MeasureSpec::density_grid(
            vec![0.0, 1.0],
            vec![0.9, 0.9],
            Some(TailExt::Exp { rate, coeff }),
        )
        .unwrap();
        assert!((m.total_mass() - 1.0).abs() < 1e-12);
        assert!((m.tail(2.0).unwrap() - 0.1 * (-1.0f64).exp()).abs() < 1e-12);
        // m₁ = ∫₀¹ 0.9 t dt + ∫₁^∞ t·coeff·e^{−t} dt = 0.45 + 0.1·2 = 0.65.
        let m1 = m.moment(1.0).unwrap().finite().unwrap();
        assert!((m1 - 0.65).abs() < 1e-9, "{m1}");
        // Sampling splits between the grid and the analytic tail.
        let s = m.sample(200_000, 9).unwrap();
        let emp = s.iter().filter(|&&x| x > 1.0).count() as f64 / s.len() as f64;
        assert!((emp - 0.1).abs() < 5e-3, "{emp}");
        // ψ and the handle go through the exp-tail quadrature.
        let h = crate::transforms::STransformHandle::numeric(m).unwrap();
        let s_small = h.s(-1e-6).unwrap();
        assert!((s_small - 1.0 / 0.65).abs() < 1e-2, "{s_small}");
    }

    #[test]
    fn symmetric_square_cases() {
        // Symmetric Bernoulli ±1 → δ₁.
        let b = MeasureSpec::symmetric_bernoulli();
        match b.symmetric_square().unwrap() {
            MeasureSpec::PointMass { a } => assert_eq!(a, 1.0),
            other => panic!("expected point mass, got {other:?}"),
        }
        // Wrapper of Pareto(2): P(X > x) = ½ x^{-2}.
        let w = MeasureSpec::symmetric(MeasureSpec::pareto(2.0).unwrap()).unwrap();
        assert!((w.tail(2.0).unwrap() - 0.125).abs() < 1e-15);
        let sq = w.symmetric_square().unwrap();
        // Tail identity μ((x,∞)) = ½ μ²((x²,∞)).
        for x in [1.5, 2.0, 5.0] {
            let lhs = w.tail(x).unwrap();
            let rhs = 0.5 * sq.tail(x * x).unwrap();
            assert!((lhs - rhs).abs() < 1e-14, "x={x}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn symmetric_square_triangular_density() {
        // |X| with density 2(1−x) on [0,1]; X² has density (1−√u)/√u.
        let n = 2001;
        let nodes: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let values: Vec<f64> = nodes.iter().map(|&x| 2.0 * (1.0 - x)).collect();
        let halfnorm = MeasureSpec::density_grid(nodes, values, None).unwrap();
        let sym = MeasureSpec::symmetric(halfnorm).unwrap();
        let sq = sym.symmetric_square().unwrap();
        let d = sq.density(0.25).unwrap();
        assert!((d - 1.0).abs() < 1e-6, "density at 0.25 = {d}");
    }

    #[test]
    fn sampling_deterministic_and_calibrated() {
        let pm = MeasureSpec::point_mass(3.0).unwrap();
        assert_eq!(pm.sample(5, 1).unwrap(), vec![3.0; 5]);

        let p = MeasureSpec::pareto(2.0).unwrap();
        let a = p.sample(100_000, 42).unwrap();
        let b = p.sample(100_000, 42).unwrap();
        assert_eq!(a, b);
        let mean = a.iter().sum::<f64>() / a.len() as f64;
        assert!((mean - 2.0).abs() < 0.1, "empirical mean {mean}");
    }

    #[test]
    fn grid_sampling_matches_grid_tail() {
        let g = pareto_grid(2.5, 1e4, 800);
        let s = g.sample(200_000, 7).unwrap();
        let emp = s.iter().filter(|&&x| x > 3.0).count() as f64 / s.len() as f64;
        let exact = g.tail(3.0).unwrap();
        assert!((emp - exact).abs() < 5e-3, "{emp} vs {exact}");
    }

    #[test]
    fn specs_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<MeasureSpec>();
        assert_send_sync::<crate::transforms::STransformHandle>();
        assert_send_sync::<crate::id_laws::LevyPair>();
    }

    #[test]
    fn probability_tail_invariants() {
        // Nonincreasing, tail(0) = 1 − δ, tail(x) → 0.
        let specs: Vec<MeasureSpec> = vec![
            MeasureSpec::pareto(0.7).unwrap(),
            MeasureSpec::pareto(2.0).unwrap(),
            MeasureSpec::free_poisson(),
            MeasureSpec::point_mass(3.0).unwrap(),
            MeasureSpec::atoms(vec![(0.0, 0.25), (1.0, 0.5), (4.0, 0.25)]).unwrap(),
            pareto_grid(1.5, 1e6, 2000),
            MeasureSpec::pareto(1.2)
                .unwrap()
                .pushforward_inverse()
                .unwrap(),
        ];
        for m in specs {
            let delta = m.delta();
            let mass = m.total_mass();
            // Discretized variants carry their declared O(h²) mass error;
            // tail(0) = mass − δ holds exactly for all of them.
            assert!((mass - 1.0).abs() < 1e-3, "{m:?}: mass {mass}");
            let t0 = m.tail(0.0).unwrap();
            assert!(
                (t0 - (mass - delta)).abs() < 1e-9,
                "{m:?}: tail(0) = {t0}, mass − δ = {}",
                mass - delta
            );
            let mut prev = t0 + 1e-15;
            for k in 0..40 {
                let x = 10f64.powf(-2.0 + 0.2 * k as f64);
                let t = m.tail(x).unwrap();
                assert!(t <= prev + 1e-12, "{m:?}: tail not nonincreasing at {x}");
                prev = t;
            }
            assert!(m.tail(1e12).unwrap() < 1e-6, "{m:?}: tail does not vanish");
        }
    }

    #[test]
    fn json_roundtrip() {
        let specs = vec![
            MeasureSpec::pareto(0.5).unwrap(),
            MeasureSpec::point_mass(2.0).unwrap(),
            MeasureSpec::free_poisson(),
            MeasureSpec::mu_alpha_beta(0.0, 1.0).unwrap(),
            MeasureSpec::sigma_min_family(1.0, 1.0, 1.0).unwrap(),
            MeasureSpec::atoms(vec![(1.0, 0.5), (2.0, 0.5)]).unwrap(),
            MeasureSpec::symmetric_bernoulli(),
        ];
        for m in specs {
            let v = m.to_json().unwrap();
            let back = MeasureSpec::from_json(&v).unwrap();
            assert_eq!(format!("{m:?}"), format!("{back:?}"));
        }
    }

    #[test]
    fn integrate_dmu_pareto_psi_value() {
        // ψ_μ(−1) for Pareto(2): antiderivative of 2 t^{-2}/(1+t) gives
        // −2(1 − ln 2).
        let m = MeasureSpec::pareto(2.0).unwrap();
        let z = -1.0;
        let f = move |t: f64| z * t / (1.0 - z * t);
        let df = move |t: f64| z / (1.0 - z * t).powi(2);
        let env = |_t: f64| 1.0;
        let v = m
            .integrate_dmu(
                &Integrand {
                    f: &f,
                    df: &df,
                    envelope: &env,
                    scale: 1.0,
                },
                1e-11,
            )
            .unwrap();
        let exact = -2.0 * (1.0 - std::f64::consts::LN_2);
        assert!((v - exact).abs() < 1e-10, "{v} vs {exact}");
    }
}
