//! Extremal densities on a normalized window `[0, 1)`.
//!
//! Each solver maximizes the mass `∫_R f` a density puts on a target set `R`
//! over a class of densities whose variation `α(f) = sup f / inf f - 1` is at
//! most `ε`. The per-window linear solution drives tilted jitter.

mod piecewise;

pub use piecewise::{piecewise_approx, PiecewiseApprox};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{JitterError, Result};
use crate::intervals::IntervalSet;
use crate::rng::{purpose, RngStream};
use crate::window::WindowPartition;

/// Points in the grid used to locate the extremes of a basis expansion.
const EXTREME_GRID: usize = 2001;

/// `|∫_R (2x - 1)|` below this counts as zero.
const MOMENT_TOL: f64 = 1e-14;

/// Zero-mean functions on `[0, 1]` used to build basis expansions `1 + Σ a_k h_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Basis {
    /// `2x - 1`
    Linear,
    /// `cos(2π k x)`
    Cos { k: u32 },
    /// `sin(2π k x)`
    Sin { k: u32 },
    /// `x^n - 1/(n+1)`
    Poly { n: u32 },
}

impl Basis {
    pub fn value(&self, x: f64) -> f64 {
        use std::f64::consts::TAU;
        match *self {
            Basis::Linear => 2.0 * x - 1.0,
            Basis::Cos { k } => (TAU * k as f64 * x).cos(),
            Basis::Sin { k } => (TAU * k as f64 * x).sin(),
            Basis::Poly { n } => x.powi(n as i32) - 1.0 / (n as f64 + 1.0),
        }
    }

    /// An antiderivative.
    pub fn primitive(&self, x: f64) -> f64 {
        use std::f64::consts::TAU;
        match *self {
            Basis::Linear => x * x - x,
            Basis::Cos { k } => (TAU * k as f64 * x).sin() / (TAU * k as f64),
            Basis::Sin { k } => -(TAU * k as f64 * x).cos() / (TAU * k as f64),
            Basis::Poly { n } => x.powi(n as i32 + 1) / (n as f64 + 1.0) - x / (n as f64 + 1.0),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Basis::Cos { k: 0 } | Basis::Sin { k: 0 } | Basis::Poly { n: 0 } => {
                Err(JitterError::param("basis", "degenerate (identically zero) basis function"))
            }
            _ => Ok(()),
        }
    }
}

/// A probability density on `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Density {
    Uniform,
    /// `1 + θ (x - 1/2)`, `|θ| <= 2`.
    Linear { theta: f64 },
    /// Piecewise constant: `values[i]` on `[breaks[i], breaks[i+1])`, with
    /// `breaks[0] = 0` and `breaks.last() = 1`.
    Step { breaks: Vec<f64>, values: Vec<f64> },
    /// `1 + Σ coeffs[k] basis[k](x)`.
    Expansion { basis: Vec<Basis>, coeffs: Vec<f64> },
}

impl Density {
    pub fn value(&self, x: f64) -> f64 {
        match self {
            Density::Uniform => 1.0,
            Density::Linear { theta } => 1.0 + theta * (x - 0.5),
            Density::Step { breaks, values } => {
                let i = breaks.partition_point(|&b| b <= x).clamp(1, values.len());
                values[i - 1]
            }
            Density::Expansion { basis, coeffs } => {
                1.0 + basis.iter().zip(coeffs).map(|(h, a)| a * h.value(x)).sum::<f64>()
            }
        }
    }

    /// `∫_R f`, in closed form.
    pub fn mass(&self, r: &IntervalSet) -> f64 {
        match self {
            Density::Uniform => r.measure(),
            Density::Linear { theta } => r.measure() + 0.5 * theta * r.linear_moment(),
            Density::Step { breaks, values } => values
                .iter()
                .enumerate()
                .map(|(i, v)| v * r.clip(breaks[i], breaks[i + 1]).measure())
                .sum(),
            Density::Expansion { basis, coeffs } => {
                r.measure() + basis.iter().zip(coeffs).map(|(h, a)| a * r.integrate_with(|x| h.primitive(x))).sum::<f64>()
            }
        }
    }

    /// `(inf f, sup f)` over `[0, 1]`.
    pub fn range(&self) -> (f64, f64) {
        match self {
            Density::Uniform => (1.0, 1.0),
            Density::Linear { theta } => {
                let h = 0.5 * theta.abs();
                (1.0 - h, 1.0 + h)
            }
            Density::Step { values, .. } => values
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v))),
            Density::Expansion { basis, coeffs } => {
                let g = |x: f64| basis.iter().zip(coeffs).map(|(h, a)| a * h.value(x)).sum::<f64>();
                let (lo, hi) = extremes(&g);
                (1.0 + lo, 1.0 + hi)
            }
        }
    }

    /// `α(f) = sup f / inf f - 1`; infinite when `inf f <= 0`.
    pub fn variation(&self) -> f64 {
        let (lo, hi) = self.range();
        if lo <= 0.0 {
            f64::INFINITY
        } else {
            hi / lo - 1.0
        }
    }
}

/// `(min g, max g)` on `[0, 1]`: a grid scan including both endpoints, then a
/// golden-section refinement around the best grid points.
fn extremes(g: &dyn Fn(f64) -> f64) -> (f64, f64) {
    let n = EXTREME_GRID - 1;
    let vals: Vec<f64> = (0..=n).map(|i| g(i as f64 / n as f64)).collect();
    let (mut imin, mut imax) = (0, 0);
    for (i, &v) in vals.iter().enumerate() {
        if v < vals[imin] {
            imin = i;
        }
        if v > vals[imax] {
            imax = i;
        }
    }
    let bracket = |i: usize| ((i.max(1) - 1) as f64 / n as f64, ((i + 1).min(n)) as f64 / n as f64);
    let (a, b) = bracket(imax);
    let hi = golden_max(g, a, b).max(vals[imax]);
    let neg = |x: f64| -g(x);
    let (a, b) = bracket(imin);
    let lo = (-golden_max(&neg, a, b)).min(vals[imin]);
    (lo, hi)
}

fn golden_max(g: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (g(c), g(d));
    for _ in 0..60 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = g(d);
        }
    }
    fc.max(fd)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremalKind {
    Unconstrained,
    Mixture,
    Basis,
    Linear,
}

/// A solution `f*` together with the problem it solves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalDensity {
    pub kind: ExtremalKind,
    pub epsilon: f64,
    pub target: IntervalSet,
    pub density: Density,
    /// `∫_R f*`
    pub mass: f64,
    /// For mixtures, the chosen component.
    pub component: Option<usize>,
    pub warnings: Vec<String>,
}

impl ExtremalDensity {
    fn build(kind: ExtremalKind, epsilon: f64, target: &IntervalSet, density: Density) -> Self {
        let mass = density.mass(target);
        ExtremalDensity { kind, epsilon, target: target.clone(), density, mass, component: None, warnings: Vec::new() }
    }

    /// Slope parameter `θ` of a linear solution.
    pub fn theta(&self) -> Option<f64> {
        match self.density {
            Density::Linear { theta } => Some(theta),
            Density::Uniform => Some(0.0),
            _ => None,
        }
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(JitterError::param("epsilon", format!("must be finite and >= 0, got {epsilon}")));
    }
    Ok(())
}

fn unit_target(r: &IntervalSet) -> IntervalSet {
    r.clip(0.0, 1.0)
}

/// Largest admissible `|θ|` for linear densities with variation `<= ε`.
pub fn theta_bound(epsilon: f64) -> f64 {
    2.0 * epsilon / (epsilon + 2.0)
}

/// Best density with `α(f) <= ε` overall: `(1 + ε 1_R) / (1 + ε |R|)`.
pub fn fstar_unconstrained(r: &IntervalSet, epsilon: f64) -> Result<ExtremalDensity> {
    check_epsilon(epsilon)?;
    let r = unit_target(r);
    let m = r.measure();
    if epsilon == 0.0 || m <= 0.0 || m >= 1.0 {
        return Ok(ExtremalDensity::build(ExtremalKind::Unconstrained, epsilon, &r, Density::Uniform));
    }
    let norm = 1.0 + epsilon * m;
    let mut breaks = vec![0.0];
    let mut values = Vec::new();
    let mut cursor = 0.0;
    for &(a, b) in r.parts() {
        if a > cursor {
            breaks.push(a);
            values.push(1.0 / norm);
        }
        breaks.push(b);
        values.push((1.0 + epsilon) / norm);
        cursor = b;
    }
    if cursor < 1.0 {
        breaks.push(1.0);
        values.push(1.0 / norm);
    }
    let mut out = ExtremalDensity::build(ExtremalKind::Unconstrained, epsilon, &r, Density::Step { breaks, values });
    // closed form, equal to the piecewise integral up to rounding
    out.mass = (1.0 + epsilon) * m / norm;
    Ok(out)
}

/// Best linear density `1 + θ(x - 1/2)` with `|θ| <= 2ε/(ε+2)`: the slope
/// takes the sign of `∫_R (2x - 1)`, and is zero when that integral vanishes.
pub fn fstar_linear(r: &IntervalSet, epsilon: f64) -> Result<ExtremalDensity> {
    check_epsilon(epsilon)?;
    let r = unit_target(r);
    let h = r.linear_moment();
    let theta = if h.abs() < MOMENT_TOL || epsilon == 0.0 { 0.0 } else { h.signum() * theta_bound(epsilon) };
    let density = if theta == 0.0 { Density::Uniform } else { Density::Linear { theta } };
    Ok(ExtremalDensity::build(ExtremalKind::Linear, epsilon, &r, density))
}

/// Best of finitely many candidate densities (ties go to the lowest index).
pub fn fstar_mixture(r: &IntervalSet, components: &[Density], epsilon: f64) -> Result<ExtremalDensity> {
    check_epsilon(epsilon)?;
    if components.is_empty() {
        return Err(JitterError::NoComponents);
    }
    let r = unit_target(r);
    for (k, g) in components.iter().enumerate() {
        let total = g.mass(&IntervalSet::interval(0.0, 1.0)?);
        if (total - 1.0).abs() > 1e-9 {
            return Err(JitterError::param("components", format!("component {k} integrates to {total}")));
        }
        let a = g.variation();
        if !(a <= epsilon + 1e-10) {
            return Err(JitterError::param("components", format!("component {k} has variation {a} > {epsilon}")));
        }
    }
    let mut best = 0;
    let mut best_mass = components[0].mass(&r);
    for (k, g) in components.iter().enumerate().skip(1) {
        let m = g.mass(&r);
        if m > best_mass {
            best = k;
            best_mass = m;
        }
    }
    let mut out = ExtremalDensity::build(ExtremalKind::Mixture, epsilon, &r, components[best].clone());
    out.component = Some(best);
    Ok(out)
}

/// Boundary of the feasible coefficient set along direction `d`: the largest
/// `t` with `α(1 + t Σ d_k h_k) <= ε`, i.e. `ε / (max g - (1+ε) min g)`.
fn boundary_radius(basis: &[Basis], d: &[f64], epsilon: f64) -> f64 {
    let g = |x: f64| basis.iter().zip(d).map(|(h, a)| a * h.value(x)).sum::<f64>();
    let (lo, hi) = extremes(&g);
    let denom = hi - (1.0 + epsilon) * lo;
    if denom <= 1e-300 {
        0.0
    } else {
        epsilon / denom
    }
}

fn normalize(d: &mut [f64]) -> bool {
    let n = d.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n == 0.0 || !n.is_finite() {
        return false;
    }
    d.iter_mut().for_each(|x| *x /= n);
    true
}

/// Best density `1 + Σ a_k h_k` with `α <= ε`.
///
/// The feasible set of coefficients is convex and the objective `a·H`,
/// `H_k = ∫_R h_k`, is linear, so the optimum lies on the boundary and any local
/// maximum over boundary directions is global. Directions are searched from a
/// set of starting candidates and refined by a shrinking pattern search.
pub fn fstar_basis(r: &IntervalSet, basis: &[Basis], epsilon: f64) -> Result<ExtremalDensity> {
    check_epsilon(epsilon)?;
    if basis.is_empty() {
        return Err(JitterError::NoComponents);
    }
    for h in basis {
        h.validate()?;
    }
    let r = unit_target(r);
    let m = basis.len();
    let h_vec: Vec<f64> = basis.iter().map(|h| r.integrate_with(|x| h.primitive(x))).collect();
    let uniform = |warn: Option<&str>| {
        let mut out = ExtremalDensity::build(
            ExtremalKind::Basis,
            epsilon,
            &r,
            Density::Expansion { basis: basis.to_vec(), coeffs: vec![0.0; m] },
        );
        out.mass = r.measure();
        if let Some(w) = warn {
            out.warnings.push(w.to_string());
        }
        out
    };
    if epsilon == 0.0 {
        return Ok(uniform(Some("feasible set is only the uniform density (epsilon = 0)")));
    }
    if h_vec.iter().all(|&x| x.abs() < MOMENT_TOL) {
        return Ok(uniform(None));
    }
    let score = |d: &[f64]| {
        let dot: f64 = d.iter().zip(&h_vec).map(|(a, b)| a * b).sum();
        if dot <= 0.0 {
            dot
        } else {
            boundary_radius(basis, d, epsilon) * dot
        }
    };
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    for k in 0..m {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; m];
            e[k] = s;
            candidates.push(e);
        }
    }
    if m > 1 {
        let mut hn = h_vec.clone();
        if normalize(&mut hn) {
            candidates.push(hn);
        }
        let mut rng = RngStream::new(0).derive_path(&[purpose::SOLVER, m as u64]).rng();
        for _ in 0..16 * m {
            let mut d: Vec<f64> = (0..m).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            if normalize(&mut d) {
                candidates.push(d);
            }
        }
    }
    let (mut best, mut best_score) = (candidates[0].clone(), score(&candidates[0]));
    for c in &candidates[1..] {
        let s = score(c);
        if s > best_score {
            best = c.clone();
            best_score = s;
        }
    }
    if m > 1 {
        let mut step = 0.5;
        while step > 1e-11 {
            let mut improved = false;
            for k in 0..m {
                for s in [step, -step] {
                    let mut d = best.clone();
                    d[k] += s;
                    if !normalize(&mut d) {
                        continue;
                    }
                    let v = score(&d);
                    if v > best_score {
                        best = d;
                        best_score = v;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
    }
    if best_score <= 0.0 {
        return Ok(uniform(Some("no feasible direction improves on the uniform density")));
    }
    let t = boundary_radius(basis, &best, epsilon);
    let coeffs: Vec<f64> = best.iter().map(|x| x * t).collect();
    let density = Density::Expansion { basis: basis.to_vec(), coeffs };
    Ok(ExtremalDensity::build(ExtremalKind::Basis, epsilon, &r, density))
}

/// The linear worst-case density of one jitter window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TiltedWindow {
    pub index: usize,
    pub start: f64,
    /// `C ∩ Ω_k`, mapped onto `[0, 1)`.
    pub target: IntervalSet,
    pub theta: f64,
    /// `|C ∩ Ω_k| / Δ`
    pub p_uniform: f64,
    /// `∫_{C ∩ Ω_k} f_k*`
    pub p_star: f64,
}

/// Per-window tilts maximizing the mass on a target set `C`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TiltedWindowPlan {
    pub delta: f64,
    pub epsilon: f64,
    pub theta_bound: f64,
    pub windows: Vec<TiltedWindow>,
}

impl TiltedWindowPlan {
    pub fn new(target: &IntervalSet, part: &WindowPartition, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        let delta = part.delta();
        let windows = (0..part.full_windows())
            .map(|k| {
                let start = part.window_start(k);
                let local = target.normalized(start, delta);
                let sol = fstar_linear(&local, epsilon)?;
                Ok(TiltedWindow {
                    index: k,
                    start,
                    p_uniform: local.measure(),
                    theta: sol.theta().unwrap_or(0.0),
                    p_star: sol.mass,
                    target: local,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TiltedWindowPlan { delta, epsilon, theta_bound: theta_bound(epsilon), windows })
    }

    pub fn thetas(&self) -> Vec<f64> {
        self.windows.iter().map(|w| w.theta).collect()
    }
}

/// Inverse CDF of `1 + θ(u - 1/2)` on `[0, 1)`, evaluated at `v ∈ [0, 1)`.
pub fn tilted_quantile(theta: f64, v: f64) -> f64 {
    let a = 0.5 * theta;
    if a == 0.0 {
        return v;
    }
    // root of a u² + (1-a) u - v = 0, written to avoid cancellation
    let b = 1.0 - a;
    2.0 * v / (b + (b * b + 4.0 * a * v).sqrt())
}
