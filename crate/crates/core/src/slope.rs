//! Floating-point log-norm functionals along arcs and their slopes
//! against log|z|⁻¹.
//!
//! Norms are Euclidean in the canonical basis; the norm of a matrix is the
//! norm of its image of the identity in the matrix representation, i.e.
//! the Frobenius norm.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arcs::ArcMatrix;
use crate::error::{Error, Result};
use crate::lp::Rational;
use crate::parallel::{try_par_map, Execution};
use crate::repr::{act, GroupElement, RepVector, TorusData};
use crate::stability::{check_commutes, reduced_norm, Pair};

/// |z| ∈ {10^-2, 10^-2.5, …, 10^-5}.
pub fn default_samples() -> Vec<f64> {
    (0..7).map(|i| 10f64.powf(-2.0 - 0.5 * i as f64)).collect()
}

/// log √(Σ e^{2 a_k}), stable for large and tiny magnitudes.
fn log_norm_of_logs(logs: impl Iterator<Item = f64> + Clone) -> f64 {
    let top = logs.clone().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    top + 0.5 * logs.map(|a| (2.0 * (a - top)).exp()).sum::<f64>().ln()
}

fn log_abs(c: &Complex64) -> f64 {
    c.re.hypot(c.im).ln()
}

/// A sampled arc ρ(z) with ρ⁻¹(z) taken from the exact inverse series.
///
/// Dual factors act through the inverse, and inverting ρ(z) numerically
/// loses every digit once the condition number nears 1/ε.
#[derive(Clone, Debug)]
pub struct Evaluated {
    pub g: DMatrix<Complex64>,
    pub inverse: DMatrix<Complex64>,
}

impl GroupElement for Evaluated {
    type Scalar = Complex64;
    fn group_dim(&self) -> usize {
        self.g.nrows()
    }
    fn entry_at(&self, i: usize, j: usize) -> Complex64 {
        self.g[(i, j)]
    }
    fn group_inverse(&self) -> Result<Self> {
        Ok(Self { g: self.inverse.clone(), inverse: self.g.clone() })
    }
}

/// An arc and its inverse series, ready to be evaluated.
struct Sampler<'a> {
    rho: &'a ArcMatrix,
    inverse: ArcMatrix,
}

impl<'a> Sampler<'a> {
    fn new(rho: &'a ArcMatrix) -> Result<Self> {
        Ok(Self { rho, inverse: rho.inverse()? })
    }

    fn at(&self, r: f64) -> Result<Evaluated> {
        Ok(Evaluated { g: at(self.rho, r)?, inverse: at(&self.inverse, r)? })
    }
}

/// log of the Euclidean norm of the coordinates of g·v.
pub fn log_norm<G: GroupElement<Scalar = Complex64> + Clone>(g: &G, v: &RepVector) -> Result<f64> {
    let coords = act(g, v)?;
    if let Some(c) = coords.values().find(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite coordinate {c}")));
    }
    Ok(log_norm_of_logs(coords.values().map(log_abs)))
}

/// log of the Frobenius norm of g.
pub fn log_matrix_norm(g: &DMatrix<Complex64>) -> f64 {
    log_norm_of_logs(g.iter().filter(|c| c.norm_sqr() > 0.0).map(log_abs))
}

/// Samples of a functional f(z) and the least-squares line through
/// (log|z|⁻¹, f).
#[derive(Clone, Debug, PartialEq)]
pub struct SlopeFit {
    pub magnitudes: Vec<f64>,
    pub values: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute deviation of a sample from the fitted line.
    pub residual: f64,
}

impl SlopeFit {
    pub fn new(magnitudes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_samples(&magnitudes)?;
        if values.len() != magnitudes.len() {
            return Err(Error::DimensionMismatch { expected: magnitudes.len(), found: values.len() });
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite sample value {v}")));
        }
        let xs: Vec<f64> = magnitudes.iter().map(|r| -r.ln()).collect();
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = values.iter().sum::<f64>() / n;
        let sxy: f64 = xs.iter().zip(&values).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let residual = xs.iter().zip(&values).map(|(x, y)| (y - intercept - slope * x).abs()).fold(0.0, f64::max);
        Ok(Self { magnitudes, values, slope, intercept, residual })
    }

    pub fn log_inverse_magnitudes(&self) -> Vec<f64> {
        self.magnitudes.iter().map(|r| -r.ln()).collect()
    }

    /// Two whitespace-separated columns, log|z|⁻¹ and f, one sample per line.
    pub fn plot_data(&self) -> String {
        let mut out = String::from("# log|z|^-1 f\n");
        for (x, y) in self.log_inverse_magnitudes().iter().zip(&self.values) {
            let _ = writeln!(out, "{x:.12e} {y:.12e}");
        }
        out
    }
}

fn check_samples(zs: &[f64]) -> Result<()> {
    if zs.len() < 4 {
        return Err(Error::InvalidInput(format!("need at least 4 samples, got {}", zs.len())));
    }
    if zs.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidInput("sample magnitudes must be positive".into()));
    }
    if zs.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidInput("sample magnitudes must be strictly decreasing".into()));
    }
    Ok(())
}

fn sample<F>(zs: &[f64], exec: Execution, f: F) -> Result<SlopeFit>
where
    F: Fn(f64) -> Result<f64> + Sync + Send,
{
    check_samples(zs)?;
    let values = try_par_map(exec, zs, |&r| f(r))?;
    SlopeFit::new(zs.to_vec(), values)
}

fn at(rho: &ArcMatrix, r: f64) -> Result<DMatrix<Complex64>> {
    rho.eval(Complex64::new(r, 0.0))
}

/// Slope of log|ρ(z).v| − log|ρ(z).w|, which tends to ν(ρ, [v, w]).
pub fn fit_slope(rho: &ArcMatrix, p: &Pair, zs: &[f64], exec: Execution) -> Result<SlopeFit> {
    let s = Sampler::new(rho)?;
    sample(zs, exec, |r| {
        let g = s.at(r)?;
        Ok(log_norm(&g, p.v())? - log_norm(&g, p.w())?)
    })
}

/// Slope of log|ρ(z)|.
pub fn fit_matrix_slope(rho: &ArcMatrix, zs: &[f64], exec: Execution) -> Result<SlopeFit> {
    sample(zs, exec, |r| Ok(log_matrix_norm(&at(rho, r)?)))
}

/// Slope of deg V · log|ρ(z)| − log|ρ(z).v|, which tends to the norm.
pub fn fit_norm_slope(rho: &ArcMatrix, p: &Pair, zs: &[f64], exec: Execution) -> Result<SlopeFit> {
    let d = p.deg_v()? as f64;
    let s = Sampler::new(rho)?;
    sample(zs, exec, |r| {
        let g = s.at(r)?;
        Ok(d * log_matrix_norm(&g.g) - log_norm(&g, p.v())?)
    })
}

/// Log-magnitudes and torus weights of the coordinates of one vector.
#[derive(Clone, Debug)]
struct Weighted {
    logs: Vec<f64>,
    weights: Vec<Vec<f64>>,
}

impl Weighted {
    fn of(coords: impl Iterator<Item = (Vec<i64>, Complex64)>) -> Self {
        let (mut logs, mut weights) = (Vec::new(), Vec::new());
        for (w, c) in coords {
            if c.norm_sqr() > 0.0 {
                logs.push(log_abs(&c));
                weights.push(w.into_iter().map(|x| x as f64).collect());
            }
        }
        Self { logs, weights }
    }

    /// log|t.x| and its gradient in the torus log-coordinates u.
    fn value_grad(&self, u: &[f64]) -> (f64, Vec<f64>) {
        let shifted: Vec<f64> = self
            .logs
            .iter()
            .zip(&self.weights)
            .map(|(a, w)| a + w.iter().zip(u).map(|(x, y)| x * y).sum::<f64>())
            .collect();
        let value = log_norm_of_logs(shifted.iter().copied());
        let mut grad = vec![0.0; u.len()];
        for (s, w) in shifted.iter().zip(&self.weights) {
            let p = (2.0 * (s - value)).exp();
            for (g, x) in grad.iter_mut().zip(w) {
                *g += p * x;
            }
        }
        (value, grad)
    }
}

/// The analytic norm functional u ↦ deg V·log|t(u).g| − log|t(u).g.v| on
/// the torus, where t(u) scales weight-χ vectors by e^{⟨χ, u⟩}.
#[derive(Clone, Debug)]
pub struct TorusFunctional {
    deg: f64,
    matrix: Weighted,
    vector: Weighted,
    rank: usize,
}

impl TorusFunctional {
    pub fn new<G: GroupElement<Scalar = Complex64> + Clone>(g: &G, p: &Pair, t: &TorusData) -> Result<Self> {
        let m = g.group_dim();
        if t.group_dim() != m {
            return Err(Error::DimensionMismatch { expected: m, found: t.group_dim() });
        }
        let matrix = Weighted::of((0..m * m).map(|idx| (t.ambient[idx / m].clone(), g.entry_at(idx / m, idx % m))));
        let weights = p.v().rep().basis_weights(&t.ambient);
        let vector = Weighted::of(act(g, p.v())?.into_iter().map(|(i, c)| (weights[i].clone(), c)));
        if vector.logs.is_empty() {
            return Err(Error::Domain("g.v vanishes numerically".into()));
        }
        Ok(Self { deg: p.deg_v()? as f64, matrix, vector, rank: t.rank })
    }

    pub fn value_grad(&self, u: &[f64]) -> (f64, Vec<f64>) {
        let (a, ga) = self.matrix.value_grad(u);
        let (b, gb) = self.vector.value_grad(u);
        let grad = ga.iter().zip(&gb).map(|(x, y)| self.deg * x - y).collect();
        (self.deg * a - b, grad)
    }

    pub fn value(&self, u: &[f64]) -> f64 {
        self.value_grad(u).0
    }
}

#[derive(Clone, Debug)]
pub struct DescentOptions {
    pub max_iterations: usize,
    /// Stop once a step improves the value by less than this.
    pub value_tolerance: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for DescentOptions {
    fn default() -> Self {
        Self { max_iterations: 20_000, value_tolerance: 1e-10, restarts: 4, seed: 7 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TorusMinimum {
    pub value: f64,
    /// Torus log-coordinates of the minimizer.
    pub point: Vec<f64>,
    pub iterations: usize,
}

/// Gradient descent with backtracking; `None` when the cap is hit while
/// the value is still decreasing by more than the tolerance.
fn descend(f: &TorusFunctional, start: Vec<f64>, opts: &DescentOptions) -> Option<(f64, Vec<f64>, usize)> {
    let mut x = start;
    let (mut fx, mut g) = f.value_grad(&x);
    let mut step = 1.0;
    for it in 0..opts.max_iterations {
        let gg: f64 = g.iter().map(|v| v * v).sum();
        if gg < 1e-24 {
            return Some((fx, x, it));
        }
        loop {
            let y: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - step * b).collect();
            let (fy, gy) = f.value_grad(&y);
            if fy <= fx - 0.5 * step * gg {
                let improvement = fx - fy;
                x = y;
                fx = fy;
                g = gy;
                step *= 2.0;
                if improvement < opts.value_tolerance {
                    return Some((fx, x, it + 1));
                }
                break;
            }
            step *= 0.5;
            if step < 1e-16 {
                return Some((fx, x, it + 1));
            }
        }
    }
    None
}

/// Infimum of the analytic norm functional over the real torus.
pub fn torus_infimum<G: GroupElement<Scalar = Complex64> + Clone>(
    g: &G,
    p: &Pair,
    t: &TorusData,
    opts: &DescentOptions,
) -> Result<TorusMinimum> {
    let f = TorusFunctional::new(g, p, t)?;
    if f.rank == 0 {
        return Ok(TorusMinimum { value: f.value(&[]), point: Vec::new(), iterations: 0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts = vec![vec![0.0; f.rank]];
    for _ in 0..opts.restarts {
        starts.push((0..f.rank).map(|_| rng.gen_range(-5.0..5.0)).collect());
    }
    let mut best: Option<TorusMinimum> = None;
    let mut total = 0;
    for s in starts {
        let (value, point, its) =
            descend(&f, s, opts).ok_or(Error::NotConverged { iterations: opts.max_iterations })?;
        total += its;
        if best.as_ref().is_none_or(|b| value < b.value) {
            best = Some(TorusMinimum { value, point, iterations: total });
        }
    }
    let mut best = best.expect("at least one start");
    best.iterations = total;
    Ok(best)
}

/// Fitted slope of the torus-infimized functional next to the exact
/// reduced norm it should approach.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedSlopeCheck {
    pub fit: SlopeFit,
    pub exact: Rational,
}

impl ReducedSlopeCheck {
    pub fn deviation(&self) -> f64 {
        use num_traits::ToPrimitive;
        (self.fit.slope - self.exact.to_f64().unwrap_or(f64::NAN)).abs()
    }
}

pub fn verify_reduced_slope(
    rho: &ArcMatrix,
    p: &Pair,
    t: &TorusData,
    zs: &[f64],
    exec: Execution,
) -> Result<ReducedSlopeCheck> {
    let exact = reduced_norm(rho, p, t)?.value;
    check_commutes(rho, t)?;
    let opts = DescentOptions::default();
    let s = Sampler::new(rho)?;
    let fit = sample(zs, exec, |r| Ok(torus_infimum(&s.at(r)?, p, t, &opts)?.value))?;
    Ok(ReducedSlopeCheck { fit, exact })
}

/// Slope of log|t.ρ(z).v| − log|t.ρ(z).w| with t = |z|^ξ, which tends to
/// the twisted weight at ξ.
pub fn fit_twisted_slope(
    rho: &ArcMatrix,
    xi: &[f64],
    p: &Pair,
    t: &TorusData,
    zs: &[f64],
    exec: Execution,
) -> Result<SlopeFit> {
    check_commutes(rho, t)?;
    if xi.len() != t.rank {
        return Err(Error::DimensionMismatch { expected: t.rank, found: xi.len() });
    }
    let wv = p.v().rep().basis_weights(&t.ambient);
    let ww = p.w().rep().basis_weights(&t.ambient);
    let s = Sampler::new(rho)?;
    sample(zs, exec, |r| {
        let g = s.at(r)?;
        let u: Vec<f64> = xi.iter().map(|x| x * r.ln()).collect();
        let side = |v: &RepVector, w: &[Vec<i64>]| -> Result<f64> {
            let c = act(&g, v)?;
            let weighted = Weighted::of(c.into_iter().map(|(i, x)| (w[i].clone(), x)));
            Ok(weighted.value_grad(&u).0)
        };
        Ok(side(p.v(), &wv)? - side(p.w(), &ww)?)
    })
}
