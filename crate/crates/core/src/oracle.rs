//! Dense reference solvers and the projection benchmark.
//!
//! Everything here is deliberately naive: dense matrices, closed forms and
//! exact alternating minimization on tiny images. These routines exist to
//! cross-check the O(p) machinery, not to be fast.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};

use crate::dynamics::{HyperParams, Smoother};
use crate::error::{Error, Result};
use crate::lattice::{EdgeVector, Image, LatticeGraph};
use crate::projection::{find_components, project, SupportSet};
use crate::synth;

/// Largest image handled by the tiny-instance oracles.
pub const TINY_PIXELS: usize = 64;

/// Largest image for which the dense projection is attempted in benchmarks.
pub const DENSE_PIXELS: usize = 10_000;

fn require_tiny(p: usize) -> Result<()> {
    if p > TINY_PIXELS {
        return Err(Error::Parameter(format!(
            "oracle limited to {TINY_PIXELS} pixels, got {p}"
        )));
    }
    Ok(())
}

/// Dense `D` restricted to the edges where `keep[e]` is true.
fn difference_rows(lattice: &LatticeGraph, keep: impl Fn(usize) -> bool) -> Mat<f64> {
    let rows: Vec<(usize, usize)> = lattice
        .edges()
        .iter()
        .enumerate()
        .filter(|(e, _)| keep(*e))
        .map(|(_, &ij)| ij)
        .collect();
    let mut d = Mat::<f64>::zeros(rows.len(), lattice.pixel_count());
    for (r, &(i, j)) in rows.iter().enumerate() {
        d[(r, i)] = 1.0;
        d[(r, j)] = -1.0;
    }
    d
}

fn column(v: &[f64]) -> Mat<f64> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

/// Closed-form projection `(I - D_c^+ D_c) u`, with `D_c` the rows of `D`
/// outside the support and `^+` the Moore-Penrose pseudo-inverse.
pub fn dense_projection(
    lattice: &LatticeGraph,
    u: &[f64],
    support: &SupportSet,
) -> Result<Vec<f64>> {
    let p = lattice.pixel_count();
    require_tiny(p)?;
    if support.edge_count() != lattice.edge_count() {
        return Err(Error::mismatch(
            "support flags",
            lattice.edge_count(),
            support.edge_count(),
        ));
    }
    if u.len() % p != 0 {
        return Err(Error::mismatch("projection input", p, u.len()));
    }
    let dc = difference_rows(lattice, |e| !support.contains(e));
    if dc.nrows() == 0 {
        return Ok(u.to_vec());
    }
    let svd = dc
        .thin_svd()
        .map_err(|e| Error::Parameter(format!("svd failed: {e:?}")))?;
    let pinv = svd.pseudoinverse();
    let projector = Mat::<f64>::identity(p, p) - &pinv * &dc;
    let mut out = Vec::with_capacity(u.len());
    for chunk in u.chunks_exact(p) {
        let proj = &projector * column(chunk);
        out.extend((0..p).map(|i| proj[(i, 0)]));
    }
    Ok(out)
}

/// `1/2 |u - x|^2 + beta |D u - gamma|^2 + lambda |gamma|_1`.
pub fn scale_space_objective(
    lattice: &LatticeGraph,
    x: &[f64],
    u: &[f64],
    gamma: &[f64],
    lambda: f64,
    beta: f64,
) -> f64 {
    let du = lattice.apply_d(u).expect("shape checked by caller");
    let fit: f64 = u.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum();
    let split: f64 = du
        .values()
        .iter()
        .zip(gamma)
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    // written so that lambda = 0 or inf with a zero gamma costs nothing
    let norm1: f64 = gamma.iter().map(|g| g.abs()).sum();
    let l1 = if lambda == 0.0 || norm1 == 0.0 {
        0.0
    } else {
        lambda * norm1
    };
    0.5 * fit + beta * split + l1
}

/// Minimizer of the scale-space objective by exact alternating minimization.
///
/// The `u` block solves `(I + 2 beta D^T D) u = x + 2 beta D^T gamma`; the
/// `gamma` block soft-thresholds `D u` at `lambda / (2 beta)`. Iterates until
/// the objective changes by less than `tol`. `lambda = inf` is accepted.
pub fn solve_scale_space(
    lattice: &LatticeGraph,
    x: &[f64],
    lambda: f64,
    beta: f64,
    tol: f64,
) -> Result<(Vec<f64>, EdgeVector)> {
    const MAX_SWEEPS: usize = 1_000_000;
    let p = lattice.pixel_count();
    let m = lattice.edge_count();
    require_tiny(p)?;
    if x.len() != p {
        return Err(Error::mismatch("scale-space input", p, x.len()));
    }
    if lambda.is_nan() || lambda < 0.0 || !(beta > 0.0) || !(tol > 0.0) {
        return Err(Error::Parameter(format!(
            "need lambda >= 0, beta > 0, tol > 0; got {lambda}, {beta}, {tol}"
        )));
    }
    let d = difference_rows(lattice, |_| true);
    let system = Mat::<f64>::identity(p, p) + (2.0 * beta) * (d.transpose() * &d);
    let llt = system
        .llt(Side::Lower)
        .map_err(|e| Error::Parameter(format!("cholesky failed: {e:?}")))?;
    let threshold = lambda / (2.0 * beta);

    let mut gamma = vec![0.0; m];
    let mut u = vec![0.0; p];
    let mut previous = f64::INFINITY;
    for _ in 0..MAX_SWEEPS {
        let mut rhs = column(x);
        for (e, &(i, j)) in lattice.edges().iter().enumerate() {
            rhs[(i, 0)] += 2.0 * beta * gamma[e];
            rhs[(j, 0)] -= 2.0 * beta * gamma[e];
        }
        let sol = llt.solve(&rhs);
        u.iter_mut().enumerate().for_each(|(i, v)| *v = sol[(i, 0)]);
        for (e, &(i, j)) in lattice.edges().iter().enumerate() {
            let du = u[i] - u[j];
            gamma[e] = du.signum() * (du.abs() - threshold).max(0.0);
        }
        let objective = scale_space_objective(lattice, x, &u, &gamma, lambda, beta);
        if (previous - objective).abs() < tol {
            return Ok((u, EdgeVector::from_values(m, 1, gamma)?));
        }
        previous = objective;
    }
    Err(Error::OracleNonConvergence {
        iterations: MAX_SWEEPS,
    })
}

/// Projection by eigendecomposition of the dense Laplacian `D_c^T D_c` of the
/// unsupported subgraph: `u` is projected onto the eigenvectors with zero
/// eigenvalue, which is `(I - D_c^+ D_c) u`.
pub fn dense_laplacian_projection(
    lattice: &LatticeGraph,
    u: &[f64],
    support: &SupportSet,
) -> Result<Vec<f64>> {
    const ZERO_EIGENVALUE: f64 = 1e-9;
    let p = lattice.pixel_count();
    let mut lap = Mat::<f64>::zeros(p, p);
    for (e, &(i, j)) in lattice.edges().iter().enumerate() {
        if !support.contains(e) {
            lap[(i, i)] += 1.0;
            lap[(j, j)] += 1.0;
            lap[(i, j)] -= 1.0;
            lap[(j, i)] -= 1.0;
        }
    }
    let evd = lap
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Parameter(format!("eigendecomposition failed: {e:?}")))?;
    let values = evd.S().column_vector();
    let vectors = evd.U();
    let kernel: Vec<usize> = (0..p)
        .filter(|&k| values[k].abs() < ZERO_EIGENVALUE)
        .collect();
    let mut out = vec![0.0; u.len()];
    for (uc, oc) in u.chunks_exact(p).zip(out.chunks_exact_mut(p)) {
        for &k in &kernel {
            let coef: f64 = (0..p).map(|i| vectors[(i, k)] * uc[i]).sum();
            for (i, o) in oc.iter_mut().enumerate() {
                *o += coef * vectors[(i, k)];
            }
        }
    }
    Ok(out)
}

/// Projection through an iterative least-squares solve: `v` is the
/// minimum-norm solution of `D_c v = D_c u` computed by LSQR from zero, and
/// the projection is `u - v`.
pub fn lsqr_projection(
    lattice: &LatticeGraph,
    u: &[f64],
    support: &SupportSet,
) -> Result<Vec<f64>> {
    let p = lattice.pixel_count();
    let rows: Vec<(usize, usize)> = lattice
        .edges()
        .iter()
        .enumerate()
        .filter(|(e, _)| !support.contains(*e))
        .map(|(_, &ij)| ij)
        .collect();
    let mut out = Vec::with_capacity(u.len());
    for uc in u.chunks_exact(p) {
        let b: Vec<f64> = rows.iter().map(|&(i, j)| uc[i] - uc[j]).collect();
        let v = lsqr(&rows, p, &b, 1e-14, 20 * p + 100);
        out.extend(uc.iter().zip(&v).map(|(a, c)| a - c));
    }
    Ok(out)
}

/// LSQR (Paige and Saunders) for the incidence matrix given by `rows`.
fn lsqr(rows: &[(usize, usize)], n: usize, b: &[f64], tol: f64, max_iters: usize) -> Vec<f64> {
    let apply = |x: &[f64], out: &mut [f64]| {
        for (o, &(i, j)) in out.iter_mut().zip(rows) {
            *o = x[i] - x[j];
        }
    };
    let apply_t = |y: &[f64], out: &mut [f64]| {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (&v, &(i, j)) in y.iter().zip(rows) {
            out[i] += v;
            out[j] -= v;
        }
    };
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();

    let mut x = vec![0.0; n];
    let mut u = b.to_vec();
    let mut beta = norm(&u);
    if beta == 0.0 {
        return x;
    }
    u.iter_mut().for_each(|v| *v /= beta);
    let mut v = vec![0.0; n];
    apply_t(&u, &mut v);
    let mut alpha = norm(&v);
    if alpha == 0.0 {
        return x;
    }
    v.iter_mut().for_each(|e| *e /= alpha);
    let mut w = v.clone();
    let mut phi_bar = beta;
    let mut rho_bar = alpha;
    let b_norm = beta;
    let mut av = vec![0.0; rows.len()];
    let mut atu = vec![0.0; n];

    for _ in 0..max_iters {
        apply(&v, &mut av);
        u.iter_mut()
            .zip(&av)
            .for_each(|(ui, a)| *ui = a - alpha * *ui);
        beta = norm(&u);
        if beta > 0.0 {
            u.iter_mut().for_each(|e| *e /= beta);
            apply_t(&u, &mut atu);
            v.iter_mut()
                .zip(&atu)
                .for_each(|(vi, a)| *vi = a - beta * *vi);
            alpha = norm(&v);
            if alpha > 0.0 {
                v.iter_mut().for_each(|e| *e /= alpha);
            }
        }
        let rho = rho_bar.hypot(beta);
        let c = rho_bar / rho;
        let s = beta / rho;
        let theta = s * alpha;
        rho_bar = -c * alpha;
        let phi = c * phi_bar;
        phi_bar *= s;
        for i in 0..n {
            x[i] += (phi / rho) * w[i];
            w[i] = v[i] - (theta / rho) * w[i];
        }
        // phi_bar is the residual norm of the consistent system
        if phi_bar <= tol * b_norm || beta == 0.0 || alpha == 0.0 {
            break;
        }
    }
    x
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProjectionMethod {
    Graph,
    Dense,
    Lsqr,
}

impl ProjectionMethod {
    pub fn name(self) -> &'static str {
        match self {
            ProjectionMethod::Graph => "graph",
            ProjectionMethod::Dense => "dense",
            ProjectionMethod::Lsqr => "lsq",
        }
    }

    pub fn project(
        self,
        lattice: &LatticeGraph,
        u: &[f64],
        support: &SupportSet,
    ) -> Result<Vec<f64>> {
        match self {
            ProjectionMethod::Graph => project(u, &find_components(lattice, support)?),
            ProjectionMethod::Dense => dense_laplacian_projection(lattice, u, support),
            ProjectionMethod::Lsqr => lsqr_projection(lattice, u, support),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MethodTiming {
    /// Wall time of the whole loop, iterations included.
    pub total: Duration,
    /// Wall time spent inside the projections.
    pub projection: Duration,
    /// Projection of the final iterate.
    pub output: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub height: usize,
    pub width: usize,
    pub iters: usize,
    pub projection_events: usize,
    pub final_sparsity: f64,
    pub graph: MethodTiming,
    /// `None` when the image is too large for a dense factorization.
    pub dense: Option<MethodTiming>,
    pub lsq: MethodTiming,
    /// Largest absolute deviation of the dense and LSQR outputs from the
    /// graph output.
    pub max_abs_diff: f64,
}

/// Agreement threshold between projection strategies.
pub const EQUIVALENCE_TOL: f64 = 1e-8;

impl BenchReport {
    pub fn equivalent(&self) -> bool {
        self.max_abs_diff < EQUIVALENCE_TOL
    }

    /// `dense_time / graph_time`, when the dense run happened.
    pub fn dense_speedup(&self) -> Option<f64> {
        self.dense
            .as_ref()
            .map(|d| d.total.as_secs_f64() / self.graph.total.as_secs_f64())
    }

    /// `key=value` lines.
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let secs = |d: Duration| d.as_secs_f64();
        let _ = writeln!(s, "height={}", self.height);
        let _ = writeln!(s, "width={}", self.width);
        let _ = writeln!(s, "iters={}", self.iters);
        let _ = writeln!(s, "projection_events={}", self.projection_events);
        let _ = writeln!(s, "final_sparsity={:.6}", self.final_sparsity);
        let _ = writeln!(s, "graph_time={:.6}", secs(self.graph.total));
        let _ = writeln!(
            s,
            "graph_projection_time={:.6}",
            secs(self.graph.projection)
        );
        match &self.dense {
            Some(d) => {
                let _ = writeln!(s, "dense_time={:.6}", secs(d.total));
                let _ = writeln!(s, "dense_projection_time={:.6}", secs(d.projection));
            }
            None => {
                let _ = writeln!(s, "dense_time=skipped");
                let _ = writeln!(s, "dense_projection_time=skipped");
            }
        }
        let _ = writeln!(s, "lsq_time={:.6}", secs(self.lsq.total));
        let _ = writeln!(s, "lsq_projection_time={:.6}", secs(self.lsq.projection));
        match self.dense_speedup() {
            Some(r) => {
                let _ = writeln!(s, "dense_over_graph={r:.3}");
            }
            None => {
                let _ = writeln!(s, "dense_over_graph=skipped");
            }
        }
        let _ = writeln!(
            s,
            "lsq_over_graph={:.3}",
            secs(self.lsq.total) / secs(self.graph.total)
        );
        let _ = writeln!(s, "max_abs_diff={:e}", self.max_abs_diff);
        let _ = writeln!(s, "equivalent={}", self.equivalent());
        s
    }
}

/// Iterations after which a projection is computed: `events` points spread
/// evenly over `1..=iters`, always including the last iteration.
pub fn projection_schedule(iters: usize, events: usize) -> Vec<usize> {
    let events = events.clamp(1, iters.max(1));
    (1..=events).map(|j| (iters * j).div_ceil(events)).collect()
}

/// Times the three projection strategies inside identical iteration loops on
/// a synthetic `height x width` grayscale scene with default hyperparameters.
pub fn timing_benchmark(
    height: usize,
    width: usize,
    iters: usize,
    events: usize,
) -> Result<BenchReport> {
    if iters == 0 {
        return Err(Error::Parameter("iters must be positive".into()));
    }
    let x = Image::Gray(synth::scene(height, width, 0)?);
    let smoother = Smoother::new(&x, &HyperParams::default())?;
    let schedule = projection_schedule(iters, events);
    let lattice = smoother.lattice().clone();

    let run = |method: ProjectionMethod| -> Result<(MethodTiming, f64)> {
        let mut s = smoother.clone();
        let mut state = s.initial_state();
        let mut projection = Duration::ZERO;
        let mut output = Vec::new();
        let mut next = schedule.iter().peekable();
        let start = Instant::now();
        while state.iteration() < iters {
            s.advance(&mut state)?;
            if next.next_if(|&&k| k == state.iteration()).is_some() {
                let t = Instant::now();
                let support = SupportSet::from_gamma(state.gamma());
                output = method.project(&lattice, state.u(), &support)?;
                projection += t.elapsed();
            }
        }
        let total = start.elapsed();
        log::info!(
            "{} loop finished in {:.3}s",
            method.name(),
            total.as_secs_f64()
        );
        let level = SupportSet::from_gamma(state.gamma()).sparsity_level();
        Ok((
            MethodTiming {
                total,
                projection,
                output,
            },
            level,
        ))
    };

    let (graph, final_sparsity) = run(ProjectionMethod::Graph)?;
    let dense = if lattice.pixel_count() <= DENSE_PIXELS {
        Some(run(ProjectionMethod::Dense)?.0)
    } else {
        log::warn!(
            "dense projection skipped for {} pixels",
            lattice.pixel_count()
        );
        None
    };
    let (lsq, _) = run(ProjectionMethod::Lsqr)?;

    let diff = |other: &MethodTiming| {
        graph
            .output
            .iter()
            .zip(&other.output)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    };
    let max_abs_diff = dense.as_ref().map_or(0.0, diff).max(diff(&lsq));
    Ok(BenchReport {
        height,
        width,
        iters,
        projection_events: schedule.len(),
        final_sparsity,
        graph,
        dense,
        lsq,
        max_abs_diff,
    })
}
