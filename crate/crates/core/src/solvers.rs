//! Iterations for `min { f(x) = −xᵀΣx : x ∈ Ω }`.
//!
//! Every method keeps the current iterate together with `Σx`, so one
//! iteration costs one matvec (the monotone Newton method pays one more per
//! backtracking trial) plus a truncation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::linops::{axpy, dot};
use crate::sphere::{SparseSphere, UnitSparseVector};
use crate::{Error, Result, SymmetricOperator};

/// Magnitude range for BB curvature estimates.
pub const ALPHA_MAG_MIN: f64 = 1e-12;
pub const ALPHA_MAG_MAX: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Gradient projection, `x₊ = P_Ω(x − s g)`.
    Gpu,
    /// Truncated power method, `x₊ = T_κ(Σx)/‖T_κ(Σx)‖`.
    Tpower,
    /// Nonmonotone approximate Newton with the BB curvature.
    Gpbb,
    /// Approximate Newton with backtracking on the curvature.
    #[serde(rename = "mnewton")]
    MonotoneNewton,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Gpu,
        Method::Tpower,
        Method::Gpbb,
        Method::MonotoneNewton,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Gpu => "gpu",
            Method::Tpower => "tpower",
            Method::Gpbb => "gpbb",
            Method::MonotoneNewton => "mnewton",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gpu" => Ok(Method::Gpu),
            "tpower" | "congradu" => Ok(Method::Tpower),
            "gpbb" => Ok(Method::Gpbb),
            "mnewton" | "monotone" | "monotone-newton" => Ok(Method::MonotoneNewton),
            other => Err(Error::InvalidConfig(format!("unknown method {other:?}"))),
        }
    }
}

/// How the scalar Hessian surrogate is formed from `s̄ = x − x_prev` and
/// `ȳ = g − g_prev`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BbVariant {
    /// `s̄ᵀȳ / s̄ᵀs̄`; lies in `[−2λ_max, −2λ_min]` for this objective.
    #[default]
    SignedRayleigh,
    /// `−‖ȳ‖² / ‖s̄‖²`.
    MagnitudeNegated,
}

impl FromStr for BbVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "signed-rayleigh" | "signed" | "rayleigh" => Ok(BbVariant::SignedRayleigh),
            "magnitude-negated" | "magnitude" => Ok(BbVariant::MagnitudeNegated),
            other => Err(Error::InvalidConfig(format!("unknown BB variant {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    pub method: Method,
    /// Fixed step `s` for GPU; also the step used by the stationarity gap.
    pub step_size: f64,
    pub bb_variant: BbVariant,
    /// Backtracking factor of the monotone method.
    pub sigma: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    /// Relative objective change regarded as stagnation.
    pub tol: f64,
    /// Consecutive stagnant iterations before stopping.
    pub stagnation_window: usize,
    pub max_iter: usize,
    pub max_backtracks: usize,
    /// `c` in `Σ + cI`; the iteration runs on the shifted operator while
    /// reported objective values stay unshifted.
    pub shift: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: Method::Gpbb,
            step_size: 1.0,
            bb_variant: BbVariant::SignedRayleigh,
            sigma: 0.25,
            alpha_min: -ALPHA_MAG_MAX,
            alpha_max: -ALPHA_MAG_MIN,
            tol: 1e-12,
            stagnation_window: 5,
            max_iter: 1000,
            max_backtracks: 200,
            shift: 0.0,
        }
    }
}

impl SolverConfig {
    pub fn new(method: Method) -> Self {
        SolverConfig {
            method,
            ..Default::default()
        }
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return bad(format!("step size {} must be positive", self.step_size));
        }
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return bad(format!("sigma {} must lie in (0, 1)", self.sigma));
        }
        if !(self.alpha_min <= self.alpha_max && self.alpha_max < 0.0 && self.alpha_min.is_finite())
        {
            return bad(format!(
                "[alpha_min, alpha_max] = [{}, {}] must be a subset of (-inf, 0)",
                self.alpha_min, self.alpha_max
            ));
        }
        if !(self.tol >= 0.0) {
            return bad(format!("tol {} must be nonnegative", self.tol));
        }
        if self.stagnation_window == 0 {
            return bad("stagnation window must be at least 1".into());
        }
        if !(self.shift >= 0.0 && self.shift.is_finite()) {
            return bad(format!("shift {} must be nonnegative", self.shift));
        }
        Ok(())
    }
}

/// `f(x) = −xᵀΣx` and its gradient `g(x) = −2Σx`.
#[derive(Debug, Clone)]
pub struct Objective {
    op: SymmetricOperator,
}

impl Objective {
    pub fn new(op: SymmetricOperator) -> Self {
        Objective { op }
    }

    pub fn op(&self) -> &SymmetricOperator {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        let sx = self.op.matvec(x)?;
        Ok(-dot(x, &sx))
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut g = self.op.matvec(x)?;
        g.iter_mut().for_each(|v| *v *= -2.0);
        Ok(g)
    }
}

/// Previous iterate and gradient for the BB formula.
#[derive(Debug, Clone)]
pub struct BbState {
    pub x_prev: Vec<f64>,
    pub g_prev: Vec<f64>,
    pub alpha: f64,
}

/// Scalar curvature estimate from the last two iterates.
///
/// The result is clamped to magnitudes in `[1e-12, 1e12]`, keeping its sign;
/// an exact zero becomes `−1e-12`.
pub fn bb_alpha(state: &BbState, x: &[f64], g: &[f64], variant: BbVariant) -> Result<f64> {
    if x.len() != state.x_prev.len() || g.len() != state.g_prev.len() || x.len() != g.len() {
        return Err(Error::DimensionMismatch {
            expected: state.x_prev.len(),
            found: x.len(),
        });
    }
    let mut ss = 0.0;
    let mut sy = 0.0;
    let mut yy = 0.0;
    for i in 0..x.len() {
        let s = x[i] - state.x_prev[i];
        let y = g[i] - state.g_prev[i];
        ss += s * s;
        sy += s * y;
        yy += y * y;
    }
    if ss == 0.0 {
        return Err(Error::ZeroStep);
    }
    let raw = match variant {
        BbVariant::SignedRayleigh => sy / ss,
        BbVariant::MagnitudeNegated => -yy / ss,
    };
    Ok(safeguard_alpha(raw))
}

fn safeguard_alpha(alpha: f64) -> f64 {
    if alpha == 0.0 || alpha.is_nan() {
        return -ALPHA_MAG_MIN;
    }
    alpha.signum() * alpha.abs().clamp(ALPHA_MAG_MIN, ALPHA_MAG_MAX)
}

/// Result of a single iteration.
#[derive(Debug, Clone)]
pub struct Step {
    pub next: UnitSparseVector,
    /// The truncated point was zero; `next` is the previous iterate.
    pub degenerate: bool,
}

impl Step {
    fn from(result: Result<UnitSparseVector>, prev: &UnitSparseVector) -> Result<Step> {
        match result {
            Ok(next) => Ok(Step {
                next,
                degenerate: false,
            }),
            Err(Error::DegenerateProjection | Error::DegenerateAntiProjection) => Ok(Step {
                next: prev.clone(),
                degenerate: true,
            }),
            Err(e) => Err(e),
        }
    }
}

/// `P_Ω(x − s g) = T_κ(x + 2sΣx)/‖·‖`.
pub fn gpu_step(obj: &Objective, x: &UnitSparseVector, s: f64, sphere: &SparseSphere) -> Result<Step> {
    let sx = obj.op.matvec(x.as_slice())?;
    Step::from(project_gradient_point(x.as_slice(), &sx, s, sphere), x)
}

/// `T_κ(Σx)/‖T_κ(Σx)‖`.
pub fn tpower_step(obj: &Objective, x: &UnitSparseVector, sphere: &SparseSphere) -> Result<Step> {
    let sx = obj.op.matvec(x.as_slice())?;
    Step::from(sphere.project(&sx), x)
}

/// Minimizer over `Ω` of the model `∇f(x)(y − x) + (α/2)‖y − x‖²`.
///
/// With `z = x − g/α` this is `Q_Ω(z)` for `α < 0` and `P_Ω(z)` for `α > 0`.
pub fn gpbb_step(
    obj: &Objective,
    x: &UnitSparseVector,
    alpha: f64,
    sphere: &SparseSphere,
) -> Result<Step> {
    let sx = obj.op.matvec(x.as_slice())?;
    Step::from(model_point(x.as_slice(), &sx, alpha, sphere), x)
}

/// `−∇f(x)(y − x)` with `y = P_Ω(x − s g(x))`.
///
/// Never negative up to rounding; zero is the first-order certificate at a
/// limit of the gradient projection iteration.
pub fn stationarity_gap(
    obj: &Objective,
    x: &[f64],
    s: f64,
    sphere: &SparseSphere,
) -> Result<f64> {
    let sx = obj.op.matvec(x)?;
    gap_from_product(x, &sx, s, sphere)
}

fn gap_from_product(x: &[f64], sx: &[f64], s: f64, sphere: &SparseSphere) -> Result<f64> {
    let y = project_gradient_point(x, sx, s, sphere)?;
    // −∇f(x)(y − x) = 2 (Σx)ᵀ(y − x)
    Ok(2.0 * (dot(sx, y.as_slice()) - dot(sx, x)))
}

fn project_gradient_point(
    x: &[f64],
    sx: &[f64],
    s: f64,
    sphere: &SparseSphere,
) -> Result<UnitSparseVector> {
    let mut z = x.to_vec();
    axpy(2.0 * s, sx, &mut z);
    sphere.project(&z)
}

fn model_point(x: &[f64], sx: &[f64], alpha: f64, sphere: &SparseSphere) -> Result<UnitSparseVector> {
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(Error::InvalidConfig(format!("model curvature {alpha} must be finite and nonzero")));
    }
    // z = x − g/α = x + 2Σx/α
    let mut z = x.to_vec();
    axpy(2.0 / alpha, sx, &mut z);
    if alpha < 0.0 {
        sphere.antiproject(&z)
    } else {
        sphere.project(&z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Stagnation,
    MaxIter,
    Degenerate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceEntry {
    pub k: usize,
    /// Unshifted objective `f(x_k)`.
    pub f: f64,
    /// Stationarity gap at `x_k`; absent when its projection degenerates.
    pub gap: Option<f64>,
    /// Step or curvature that produced `x_k` (none for `k = 0` and Tpower).
    pub alpha: Option<f64>,
    /// Backtracking trials rejected before `x_k` was accepted.
    pub backtracks: usize,
    pub support_size: usize,
    /// FNV-1a hash of the sorted support indices.
    pub support_hash: String,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub method: Method,
    pub kappa: usize,
    pub x_final: UnitSparseVector,
    pub iterations: usize,
    pub trace: Vec<TraceEntry>,
    pub termination: Termination,
    /// Objective evaluations, one matvec each.
    pub evaluations: usize,
}

impl SolveReport {
    pub fn final_objective(&self) -> f64 {
        self.trace.last().map(|t| t.f).unwrap_or(f64::NAN)
    }
}

fn support_hash(support: &[usize]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &i in support {
        for b in (i as u64).to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    format!("{h:016x}")
}

/// Runs the configured method from `e_i`, `i` the largest diagonal index of
/// `Σ`.
pub fn solve(obj: &Objective, sphere: &SparseSphere, config: &SolverConfig) -> Result<SolveReport> {
    let start = sphere.basis(obj.op.largest_diag_index())?;
    solve_from(obj, sphere, config, start)
}

/// Runs the configured method from `start`.
///
/// Stops when the support is unchanged and
/// `|f_k − f_{k+1}| ≤ tol·max(1, |f_k|)` for `stagnation_window`
/// consecutive iterations, when `max_iter` iterations are done, or when a
/// truncation degenerates to zero.
pub fn solve_from(
    obj: &Objective,
    sphere: &SparseSphere,
    config: &SolverConfig,
    start: UnitSparseVector,
) -> Result<SolveReport> {
    config.validate()?;
    if obj.dim() != sphere.dim() {
        return Err(Error::DimensionMismatch {
            expected: sphere.dim(),
            found: obj.dim(),
        });
    }
    let start = sphere.point(start.into_inner())?;
    let shift = config.shift;
    let op = if shift > 0.0 {
        obj.op.shifted(shift)
    } else {
        obj.op.clone()
    };
    let mut run = Run {
        op,
        sphere: *sphere,
        config,
        evaluations: 0,
    };

    let mut x = start;
    let mut sx = run.product(x.as_slice());
    // shifted value: −xᵀ(Σ + cI)x = f(x) − c on the unit sphere
    let mut f = -dot(x.as_slice(), &sx) + shift;
    let mut supp = x.support();
    let mut trace = vec![run.entry(0, &x, &sx, f, None, 0, &supp)];
    let mut bb: Option<BbState> = None;
    let mut stagnant = 0;
    let mut termination = Termination::MaxIter;

    for k in 0..config.max_iter {
        let g: Vec<f64> = sx.iter().map(|v| -2.0 * v).collect();
        let outcome = match config.method {
            Method::Gpu => run.fixed_step(&x, &sx, config.step_size, Some(config.step_size))?,
            Method::Tpower => match run.sphere.project(&sx) {
                Ok(next) => Outcome::Moved(run.accept(next, None, 0)),
                Err(Error::DegenerateProjection) => Outcome::Stop(Termination::Degenerate),
                Err(e) => return Err(e),
            },
            Method::Gpbb => match &bb {
                None => run.fixed_step(&x, &sx, 1.0, Some(1.0))?,
                Some(state) => match bb_alpha(state, x.as_slice(), &g, config.bb_variant) {
                    Ok(alpha) => match model_point(x.as_slice(), &sx, alpha, &run.sphere) {
                        Ok(next) => Outcome::Moved(run.accept(next, Some(alpha), 0)),
                        Err(Error::DegenerateProjection | Error::DegenerateAntiProjection) => {
                            Outcome::Stop(Termination::Degenerate)
                        }
                        Err(e) => return Err(e),
                    },
                    Err(Error::ZeroStep) => Outcome::Stop(Termination::Stagnation),
                    Err(e) => return Err(e),
                },
            },
            Method::MonotoneNewton => match &bb {
                None => run.fixed_step(&x, &sx, 1.0, Some(1.0))?,
                Some(state) => match bb_alpha(state, x.as_slice(), &g, config.bb_variant) {
                    Ok(beta) => run.backtrack(k, &x, &sx, f, beta)?,
                    Err(Error::ZeroStep) => Outcome::Stop(Termination::Stagnation),
                    Err(e) => return Err(e),
                },
            },
        };
        let accepted = match outcome {
            Outcome::Stop(reason) => {
                termination = reason;
                break;
            }
            Outcome::Moved(a) => a,
        };

        let next_supp = accepted.x.support();
        let f_next = accepted.f_shifted + shift;
        if next_supp == supp && (f - f_next).abs() <= config.tol * f.abs().max(1.0) {
            stagnant += 1;
        } else {
            stagnant = 0;
        }
        bb = Some(BbState {
            x_prev: x.into_inner(),
            g_prev: g,
            alpha: accepted.alpha.unwrap_or(f64::NAN),
        });
        x = accepted.x;
        sx = accepted.sx;
        f = f_next;
        supp = next_supp;
        trace.push(run.entry(k + 1, &x, &sx, f, accepted.alpha, accepted.backtracks, &supp));
        if stagnant >= config.stagnation_window {
            termination = Termination::Stagnation;
            break;
        }
    }

    Ok(SolveReport {
        method: config.method,
        kappa: sphere.kappa(),
        iterations: trace.len() - 1,
        x_final: x,
        trace,
        termination,
        evaluations: run.evaluations,
    })
}

struct Accepted {
    x: UnitSparseVector,
    sx: Vec<f64>,
    f_shifted: f64,
    alpha: Option<f64>,
    backtracks: usize,
}

enum Outcome {
    Moved(Accepted),
    Stop(Termination),
}

struct Run<'a> {
    op: SymmetricOperator,
    sphere: SparseSphere,
    config: &'a SolverConfig,
    evaluations: usize,
}

impl Run<'_> {
    fn product(&mut self, x: &[f64]) -> Vec<f64> {
        self.evaluations += 1;
        // dimensions were checked on entry
        self.op.matvec(x).expect("operator and iterate dimensions agree")
    }

    fn accept(&mut self, x: UnitSparseVector, alpha: Option<f64>, backtracks: usize) -> Accepted {
        let sx = self.product(x.as_slice());
        let f_shifted = -dot(x.as_slice(), &sx);
        Accepted {
            x,
            sx,
            f_shifted,
            alpha,
            backtracks,
        }
    }

    fn fixed_step(
        &mut self,
        x: &UnitSparseVector,
        sx: &[f64],
        s: f64,
        alpha: Option<f64>,
    ) -> Result<Outcome> {
        match project_gradient_point(x.as_slice(), sx, s, &self.sphere) {
            Ok(next) => Ok(Outcome::Moved(self.accept(next, alpha, 0))),
            Err(Error::DegenerateProjection) => Ok(Outcome::Stop(Termination::Degenerate)),
            Err(e) => Err(e),
        }
    }

    /// Tries `α = σʲβ`, `j = 0, 1, …`, until
    /// `f(x₊) ≤ f(x) + α‖x₊ − x‖²` with `x₊ = Q_Ω(x − g/α)`.
    fn backtrack(
        &mut self,
        k: usize,
        x: &UnitSparseVector,
        sx: &[f64],
        f: f64,
        beta: f64,
    ) -> Result<Outcome> {
        let cfg = self.config;
        let beta = beta.clamp(cfg.alpha_min, cfg.alpha_max);
        let shift = cfg.shift;
        let f_shifted = f - shift;
        // rounding in −xᵀΣx for the acceptance comparison
        let slack = 8.0 * f64::EPSILON * f_shifted.abs().max(1.0);
        let mut alpha = beta;
        for j in 0..=cfg.max_backtracks {
            let trial = match model_point(x.as_slice(), sx, alpha, &self.sphere) {
                Ok(t) => t,
                Err(Error::DegenerateAntiProjection) => return Ok(Outcome::Stop(Termination::Stagnation)),
                Err(e) => return Err(e),
            };
            let moved: f64 = trial
                .as_slice()
                .iter()
                .zip(x.as_slice())
                .map(|(a, b)| (a - b).powi(2))
                .sum();
            let candidate = self.accept(trial, Some(alpha), j);
            let bound = f_shifted + alpha * moved;
            if candidate.f_shifted <= bound {
                return Ok(Outcome::Moved(candidate));
            }
            if candidate.f_shifted <= bound + slack {
                // the decrease demanded is below rounding: x is numerically stationary
                return Ok(Outcome::Stop(Termination::Stagnation));
            }
            alpha *= cfg.sigma;
        }
        Err(Error::BacktrackingFailed {
            iteration: k,
            trials: cfg.max_backtracks + 1,
        })
    }

    fn entry(
        &self,
        k: usize,
        x: &UnitSparseVector,
        sx: &[f64],
        f: f64,
        alpha: Option<f64>,
        backtracks: usize,
        supp: &[usize],
    ) -> TraceEntry {
        TraceEntry {
            k,
            f,
            gap: gap_from_product(x.as_slice(), sx, self.config.step_size, &self.sphere).ok(),
            alpha,
            backtracks,
            support_size: supp.len(),
            support_hash: support_hash(supp),
        }
    }
}
