//! The discretized inverse scale space iteration.
//!
//! The split objective is
//!
//! ```text
//! L(u, gamma) = 1/2 |u - x|^2 + beta |D u - gamma|^2
//! ```
//!
//! and one step of the iteration reads
//!
//! ```text
//! u'     = u - kappa * alpha * grad_u L(u, gamma)
//! z'     = z - alpha * grad_gamma L(u, gamma)
//! gamma' = kappa * prox(z')
//! ```
//!
//! where `prox` is the unit soft threshold for grayscale images and the
//! per-edge group soft threshold across the three channels of a color image.
//! Starting from `u = z = gamma = 0`, edges enter the support of `gamma` in
//! order of decreasing scale.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::{EdgeVector, Image, LatticeGraph};

/// Absolute slack allowed on the loss when checking descent.
pub const DESCENT_SLACK: f64 = 1e-12;

/// Largest eigenvalue of `D^T D` on any 4-connected grid is below 8.
const LAPLACIAN_BOUND: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepSize {
    /// `alpha = 1 / (kappa * |H|)`.
    Auto,
    Explicit(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct HyperParams {
    /// Elastic-net scale; larger values track the pure l1 path more closely.
    pub kappa: f64,
    /// Weight of the splitting term `|D u - gamma|^2`.
    pub beta: f64,
    pub alpha: StepSize,
    pub max_iters: usize,
    /// Verify `L(u', gamma') <= L(u, gamma)` after every step. Costs one
    /// extra pass over the lattice per step.
    pub check_descent: bool,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            kappa: 5.0,
            beta: 1.0,
            alpha: StepSize::Auto,
            max_iters: 50_000,
            check_descent: false,
        }
    }
}

impl HyperParams {
    /// Validates the parameters against `lattice` and fixes the step size.
    pub fn resolve(&self, lattice: &LatticeGraph) -> Result<StepParams> {
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(Error::Parameter(format!(
                "kappa must be positive, got {}",
                self.kappa
            )));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::Parameter(format!(
                "beta must be positive, got {}",
                self.beta
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::Parameter("max_iters must be positive".into()));
        }
        let hessian = estimate_hessian_norm(lattice, self.beta);
        let limit = 2.0 / (self.kappa * hessian.value);
        let alpha = match self.alpha {
            StepSize::Auto => 1.0 / (self.kappa * hessian.value),
            StepSize::Explicit(a) if a.is_finite() && a > 0.0 && a < limit => a,
            StepSize::Explicit(a) => {
                return Err(Error::Parameter(format!(
                    "alpha must lie in (0, {limit:.6e}), got {a}"
                )))
            }
        };
        Ok(StepParams {
            kappa: self.kappa,
            beta: self.beta,
            alpha,
            hessian,
            check_descent: self.check_descent,
        })
    }
}

/// Hyperparameters with the step size fixed for a particular lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct StepParams {
    pub kappa: f64,
    pub beta: f64,
    pub alpha: f64,
    pub hessian: HessianNorm,
    pub check_descent: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HessianNorm {
    pub value: f64,
    pub iterations: usize,
    /// Power iteration hit its cap and `value` is the analytic upper bound.
    pub fallback: bool,
}

/// Spectral norm of the (constant) joint Hessian of the split objective in
/// `(u, gamma)`:
///
/// ```text
/// H = [ I + 2 beta D^T D   -2 beta D^T ]
///     [ -2 beta D           2 beta I   ]
/// ```
///
/// Results are memoized per lattice shape and `beta`.
pub fn estimate_hessian_norm(lattice: &LatticeGraph, beta: f64) -> HessianNorm {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize, u64), HessianNorm>>> = OnceLock::new();
    let key = (lattice.height(), lattice.width(), beta.to_bits());
    let cache = CACHE.get_or_init(Default::default);
    if let Some(&h) = cache.lock().expect("cache poisoned").get(&key) {
        return h;
    }
    let h = estimate_hessian_norm_with(lattice, beta, 1 << 20, 5e-5);
    cache.lock().expect("cache poisoned").insert(key, h);
    h
}

/// Power iteration with explicit cap and tolerance.
///
/// The Rayleigh quotient of a PSD operator approaches the top eigenvalue from
/// below with error roughly proportional to `1/k` when the spectrum is
/// clustered, so convergence is declared once the quotient moves by less than
/// `tol` (relative) between iteration `k/2` and `k`.
pub fn estimate_hessian_norm_with(
    lattice: &LatticeGraph,
    beta: f64,
    max_iters: usize,
    tol: f64,
) -> HessianNorm {
    let p = lattice.pixel_count();
    let m = lattice.edge_count();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v: Vec<f64> = (0..p + m).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut hv = vec![0.0; p + m];
    let mut r = vec![0.0; m];
    let mut dt = vec![0.0; p];
    normalize(&mut v);

    let mut checkpoint = f64::NAN;
    let mut next_check = 1;
    for k in 1..=max_iters {
        // hv = H v
        let (a, b) = v.split_at(p);
        lattice.apply_d_into(a, &mut r);
        r.iter_mut().zip(b).for_each(|(ri, bi)| *ri -= bi);
        lattice.apply_dt_into(&r, &mut dt);
        let (ha, hb) = hv.split_at_mut(p);
        for i in 0..p {
            ha[i] = a[i] + 2.0 * beta * dt[i];
        }
        for e in 0..m {
            hb[e] = -2.0 * beta * r[e];
        }
        let rq: f64 = v.iter().zip(&hv).map(|(x, y)| x * y).sum();
        if k == next_check {
            if (rq - checkpoint).abs() <= tol * rq {
                return HessianNorm {
                    value: rq,
                    iterations: k,
                    fallback: false,
                };
            }
            checkpoint = rq;
            next_check *= 2;
        }
        std::mem::swap(&mut v, &mut hv);
        if normalize(&mut v) == 0.0 {
            // H v = 0 only when v lies in the kernel; the norm is still 1 from
            // the identity block, which the fidelity term always contributes.
            break;
        }
    }
    log::warn!("power iteration did not converge; using analytic Hessian bound");
    HessianNorm {
        value: 1.0 + 2.0 * beta * (LAPLACIAN_BOUND + 1.0),
        iterations: max_iters,
        fallback: true,
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Full state of the iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct IterState {
    u: Vec<f64>,
    z: EdgeVector,
    gamma: EdgeVector,
    k: usize,
    support: usize,
}

impl IterState {
    /// The blank start: `u = 0`, `z = 0`, `gamma = 0`.
    pub fn zero(lattice: &LatticeGraph, channels: usize) -> Self {
        IterState {
            u: vec![0.0; channels * lattice.pixel_count()],
            z: EdgeVector::zeros(lattice.edge_count(), channels),
            gamma: EdgeVector::zeros(lattice.edge_count(), channels),
            k: 0,
            support: 0,
        }
    }

    /// Builds a state from `u` and `z`; `gamma` is derived as `kappa * prox(z)`.
    pub fn from_parts(
        lattice: &LatticeGraph,
        u: Vec<f64>,
        z: EdgeVector,
        k: usize,
        kappa: f64,
    ) -> Result<Self> {
        let c = z.channels();
        if z.edge_count() != lattice.edge_count() {
            return Err(Error::mismatch(
                "state z",
                lattice.edge_count(),
                z.edge_count(),
            ));
        }
        if u.len() != c * lattice.pixel_count() {
            return Err(Error::mismatch(
                "state u",
                c * lattice.pixel_count(),
                u.len(),
            ));
        }
        let mut gamma = EdgeVector::zeros(z.edge_count(), c);
        let support = shrink_into(z.values(), gamma.values_mut(), z.edge_count(), c, kappa);
        Ok(IterState {
            u,
            z,
            gamma,
            k,
            support,
        })
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn z(&self) -> &EdgeVector {
        &self.z
    }

    pub fn gamma(&self) -> &EdgeVector {
        &self.gamma
    }

    pub fn iteration(&self) -> usize {
        self.k
    }

    pub fn channels(&self) -> usize {
        self.z.channels()
    }

    /// Number of edges (edge groups for color) where `gamma` is nonzero.
    pub fn support_count(&self) -> usize {
        self.support
    }
}

/// `kappa * prox(z)` into `out`, returning the number of nonzero edges.
fn shrink_into(z: &[f64], out: &mut [f64], m: usize, channels: usize, kappa: f64) -> usize {
    if channels == 3 {
        let mut count = 0;
        for e in 0..m {
            let g = [z[e], z[m + e], z[2 * m + e]];
            let norm = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
            if norm >= 1.0 {
                let s = kappa * (1.0 - 1.0 / norm);
                for c in 0..3 {
                    out[c * m + e] = s * g[c];
                }
                if s != 0.0 {
                    count += 1;
                }
            } else {
                for c in 0..3 {
                    out[c * m + e] = 0.0;
                }
            }
        }
        count
    } else {
        for (o, &v) in out.iter_mut().zip(z) {
            *o = kappa * soft(v);
        }
        if channels == 1 {
            out.iter().filter(|&&v| v != 0.0).count()
        } else {
            (0..m)
                .filter(|&e| (0..channels).any(|c| out[c * m + e] != 0.0))
                .count()
        }
    }
}

#[inline]
fn soft(v: f64) -> f64 {
    v.signum() * (v.abs() - 1.0).max(0.0)
}

/// Elementwise `sign(z) * max(|z| - 1, 0)`.
pub fn prox_l1(z: &EdgeVector) -> EdgeVector {
    let values = z.values().iter().map(|&v| soft(v)).collect();
    EdgeVector::from_values(z.edge_count(), z.channels(), values).expect("same shape")
}

/// Group soft threshold over the three channels of each edge:
/// `(1 - 1/|z_e|) z_e` when `|z_e| >= 1`, zero otherwise.
pub fn prox_group(z: &EdgeVector) -> Result<EdgeVector> {
    if z.channels() != 3 {
        return Err(Error::mismatch("prox_group channels", 3, z.channels()));
    }
    let mut out = EdgeVector::zeros(z.edge_count(), 3);
    shrink_into(z.values(), out.values_mut(), z.edge_count(), 3, 1.0);
    Ok(out)
}

/// The split objective `1/2 |u - x|^2 + beta |D u - gamma|^2`.
pub fn split_loss(
    lattice: &LatticeGraph,
    x: &[f64],
    u: &[f64],
    gamma: &EdgeVector,
    beta: f64,
) -> Result<f64> {
    check_shapes(lattice, x, u, gamma)?;
    let mut r = vec![0.0; gamma.values().len()];
    residual_into(lattice, u, gamma.values(), &mut r);
    Ok(loss_from_residual(x, u, &r, beta))
}

fn loss_from_residual(x: &[f64], u: &[f64], r: &[f64], beta: f64) -> f64 {
    let fit: f64 = u.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
    let split: f64 = r.iter().map(|v| v * v).sum();
    0.5 * fit + beta * split
}

fn residual_into(lattice: &LatticeGraph, u: &[f64], gamma: &[f64], r: &mut [f64]) {
    lattice.apply_d_into(u, r);
    r.iter_mut().zip(gamma).for_each(|(ri, gi)| *ri -= gi);
}

fn check_shapes(lattice: &LatticeGraph, x: &[f64], u: &[f64], gamma: &EdgeVector) -> Result<()> {
    let c = gamma.channels();
    let p = lattice.pixel_count();
    if gamma.edge_count() != lattice.edge_count() {
        return Err(Error::mismatch(
            "gamma",
            lattice.edge_count(),
            gamma.edge_count(),
        ));
    }
    if u.len() != c * p {
        return Err(Error::mismatch("u", c * p, u.len()));
    }
    if x.len() != c * p {
        return Err(Error::mismatch("x", c * p, x.len()));
    }
    Ok(())
}

/// `(u - x) + 2 beta D^T (D u - gamma)`.
pub fn grad_u(lattice: &LatticeGraph, x: &[f64], state: &IterState, beta: f64) -> Result<Vec<f64>> {
    check_shapes(lattice, x, &state.u, &state.gamma)?;
    let mut r = vec![0.0; state.gamma.values().len()];
    residual_into(lattice, &state.u, state.gamma.values(), &mut r);
    let mut g = vec![0.0; state.u.len()];
    lattice.apply_dt_into(&r, &mut g);
    for ((gi, ui), xi) in g.iter_mut().zip(&state.u).zip(x) {
        *gi = (ui - xi) + 2.0 * beta * *gi;
    }
    Ok(g)
}

/// `-2 beta (D u - gamma)`.
pub fn grad_gamma(lattice: &LatticeGraph, state: &IterState, beta: f64) -> Result<EdgeVector> {
    let c = state.channels();
    if state.u.len() != c * lattice.pixel_count()
        || state.gamma.edge_count() != lattice.edge_count()
    {
        return Err(Error::mismatch(
            "grad_gamma",
            c * lattice.pixel_count(),
            state.u.len(),
        ));
    }
    let mut r = vec![0.0; state.gamma.values().len()];
    residual_into(lattice, &state.u, state.gamma.values(), &mut r);
    r.iter_mut().for_each(|v| *v *= -2.0 * beta);
    EdgeVector::from_values(lattice.edge_count(), c, r)
}

/// Runs the iteration for one target image, reusing scratch buffers.
#[derive(Clone, Debug)]
pub struct Smoother {
    lattice: LatticeGraph,
    x: Vec<f64>,
    channels: usize,
    params: StepParams,
    residual: Vec<f64>,
    grad: Vec<f64>,
}

impl Smoother {
    pub fn new(x: &Image, hp: &HyperParams) -> Result<Self> {
        let lattice = LatticeGraph::new(x.height(), x.width())?;
        let params = hp.resolve(&lattice)?;
        Self::with_params(lattice, x.to_planar(), x.channel_count(), params)
    }

    /// Builds a smoother from planar data and already resolved parameters.
    pub fn with_params(
        lattice: LatticeGraph,
        x: Vec<f64>,
        channels: usize,
        params: StepParams,
    ) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::Parameter(format!(
                "unsupported channel count {channels}"
            )));
        }
        if x.len() != channels * lattice.pixel_count() {
            return Err(Error::mismatch(
                "target image",
                channels * lattice.pixel_count(),
                x.len(),
            ));
        }
        Ok(Smoother {
            residual: vec![0.0; channels * lattice.edge_count()],
            grad: vec![0.0; x.len()],
            lattice,
            x,
            channels,
            params,
        })
    }

    pub fn lattice(&self) -> &LatticeGraph {
        &self.lattice
    }

    pub fn params(&self) -> &StepParams {
        &self.params
    }

    pub fn target(&self) -> &[f64] {
        &self.x
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn initial_state(&self) -> IterState {
        IterState::zero(&self.lattice, self.channels)
    }

    pub fn loss(&self, state: &IterState) -> f64 {
        let mut r = vec![0.0; state.gamma.values().len()];
        residual_into(&self.lattice, &state.u, state.gamma.values(), &mut r);
        loss_from_residual(&self.x, &state.u, &r, self.params.beta)
    }

    /// One step from `state`, returning the successor.
    pub fn step(&self, state: &IterState) -> Result<IterState> {
        let mut scratch = self.clone();
        let mut next = state.clone();
        scratch.advance(&mut next)?;
        Ok(next)
    }

    /// One step in place.
    pub fn advance(&mut self, state: &mut IterState) -> Result<()> {
        self.check_state(state)?;
        let StepParams {
            kappa, beta, alpha, ..
        } = self.params;
        let m = self.lattice.edge_count();

        residual_into(
            &self.lattice,
            &state.u,
            state.gamma.values(),
            &mut self.residual,
        );
        let before = self
            .params
            .check_descent
            .then(|| loss_from_residual(&self.x, &state.u, &self.residual, beta));

        self.lattice.apply_dt_into(&self.residual, &mut self.grad);
        let u_rate = kappa * alpha;
        for ((ui, gi), xi) in state.u.iter_mut().zip(&self.grad).zip(&self.x) {
            *ui -= u_rate * ((*ui - xi) + 2.0 * beta * gi);
        }
        let z_rate = 2.0 * alpha * beta;
        for (zi, ri) in state.z.values_mut().iter_mut().zip(&self.residual) {
            *zi += z_rate * ri;
        }
        state.support = shrink_into(
            state.z.values(),
            state.gamma.values_mut(),
            m,
            self.channels,
            kappa,
        );
        state.k += 1;

        if let Some(before) = before {
            residual_into(
                &self.lattice,
                &state.u,
                state.gamma.values(),
                &mut self.residual,
            );
            let after = loss_from_residual(&self.x, &state.u, &self.residual, beta);
            if after > before + DESCENT_SLACK {
                return Err(Error::StepSize {
                    iteration: state.k,
                    before,
                    after,
                });
            }
        }
        Ok(())
    }

    fn check_state(&self, state: &IterState) -> Result<()> {
        if state.channels() != self.channels {
            return Err(Error::mismatch(
                "state channels",
                self.channels,
                state.channels(),
            ));
        }
        if state.u.len() != self.x.len() {
            return Err(Error::mismatch("state u", self.x.len(), state.u.len()));
        }
        if state.z.edge_count() != self.lattice.edge_count() {
            return Err(Error::mismatch(
                "state z",
                self.lattice.edge_count(),
                state.z.edge_count(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::ImagePlane;

    fn ev(values: &[f64], channels: usize) -> EdgeVector {
        EdgeVector::from_values(values.len() / channels, channels, values.to_vec()).unwrap()
    }

    #[test]
    fn soft_threshold_cases() {
        let out = prox_l1(&ev(&[0.5, 2.0, -3.0, 1.0, -1.0, 0.0], 1));
        assert_eq!(out.values(), &[0.0, 1.0, -2.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn group_threshold_cases() {
        // three edges, channel-planar
        let z = ev(&[0.5, 2.0, 3.0, 0.5, 0.0, 4.0, 0.5, 0.0, 0.0], 3);
        let out = prox_group(&z).unwrap();
        assert_eq!(
            [out.get(0, 0), out.get(0, 1), out.get(0, 2)],
            [0.0, 0.0, 0.0]
        );
        assert_eq!(
            [out.get(1, 0), out.get(1, 1), out.get(1, 2)],
            [1.0, 0.0, 0.0]
        );
        let g = [out.get(2, 0), out.get(2, 1), out.get(2, 2)];
        assert!((g[0] - 2.4).abs() < 1e-15 && (g[1] - 3.2).abs() < 1e-15 && g[2] == 0.0);
        // unit norm sits on the boundary
        let out = prox_group(&ev(&[0.6, 0.8, 0.0], 3)).unwrap();
        assert!(out.values().iter().all(|&v| v.abs() < 1e-15));
        assert!(prox_group(&ev(&[1.0, 2.0], 2)).is_err());
    }

    #[test]
    fn gradients_vanish_at_stationary_point() {
        let g = LatticeGraph::new(2, 3).unwrap();
        // dyadic values keep kappa * prox(z) == D x exact
        let x = vec![0.25, 0.5, 0.75, 0.0, 1.0, 0.5];
        let dx = g.apply_d(&x).unwrap();
        let kappa = 4.0;
        let z: Vec<f64> = dx
            .values()
            .iter()
            .map(|&d| {
                if d == 0.0 {
                    0.0
                } else {
                    d.signum() * (d.abs() / kappa + 1.0)
                }
            })
            .collect();
        let state = IterState::from_parts(&g, x.clone(), ev(&z, 1), 0, kappa).unwrap();
        assert_eq!(state.gamma(), &dx);
        assert!(grad_u(&g, &x, &state, 1.0)
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
        assert!(grad_gamma(&g, &state, 1.0)
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == 0.0));

        let hp = HyperParams {
            kappa,
            ..HyperParams::default()
        };
        let params = hp.resolve(&g).unwrap();
        let s = Smoother::with_params(g.clone(), x.clone(), 1, params).unwrap();
        let next = s.step(&state).unwrap();
        assert_eq!(next.u(), state.u());
        assert_eq!(next.z(), state.z());
        assert_eq!(next.gamma(), state.gamma());
        assert_eq!(next.iteration(), 1);
    }

    #[test]
    fn gradients_from_blank_state() {
        let g = LatticeGraph::new(3, 2).unwrap();
        let x = vec![0.1, 0.9, 0.3, 0.4, 0.0, 1.0];
        let state = IterState::zero(&g, 1);
        let gu = grad_u(&g, &x, &state, 1.0).unwrap();
        assert_eq!(gu, x.iter().map(|v| -v).collect::<Vec<_>>());
        assert!(grad_gamma(&g, &state, 1.0)
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn hessian_norm_without_splitting_term() {
        let g = LatticeGraph::new(3, 3).unwrap();
        let h = estimate_hessian_norm(&g, 0.0);
        assert!((h.value - 1.0).abs() < 1e-12);
        assert!(!h.fallback);
        let single = estimate_hessian_norm(&LatticeGraph::new(1, 1).unwrap(), 1.0);
        assert!((single.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hessian_fallback_flagged() {
        let g = LatticeGraph::new(6, 6).unwrap();
        let h = estimate_hessian_norm_with(&g, 1.0, 3, 0.0);
        assert!(h.fallback);
        assert_eq!(h.value, 19.0);
    }

    #[test]
    fn step_size_validation() {
        let g = LatticeGraph::new(4, 4).unwrap();
        let auto = HyperParams::default().resolve(&g).unwrap();
        assert!((auto.alpha * auto.kappa * auto.hessian.value - 1.0).abs() < 1e-12);
        let too_big = HyperParams {
            alpha: StepSize::Explicit(2.0 / (5.0 * auto.hessian.value) * 1.01),
            ..HyperParams::default()
        };
        assert!(matches!(too_big.resolve(&g), Err(Error::Parameter(_))));
        let bad_kappa = HyperParams {
            kappa: -1.0,
            ..HyperParams::default()
        };
        assert!(bad_kappa.resolve(&g).is_err());
    }

    #[test]
    fn constant_image_keeps_gamma_zero() {
        let x = Image::Gray(ImagePlane::constant(3, 3, 0.4).unwrap());
        let mut s = Smoother::new(&x, &HyperParams::default()).unwrap();
        let mut state = s.initial_state();
        s.advance(&mut state).unwrap();
        let ka = s.params().kappa * s.params().alpha;
        assert!(state.u().iter().all(|&v| (v - ka * 0.4).abs() < 1e-15));
        assert!(state.z().values().iter().all(|&v| v == 0.0));
        for _ in 0..200 {
            s.advance(&mut state).unwrap();
        }
        assert_eq!(state.support_count(), 0);
        assert!(state.gamma().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn one_step_on_two_pixels() {
        let x = Image::Gray(ImagePlane::new(1, 2, vec![1.0, 0.0]).unwrap());
        let s = Smoother::new(&x, &HyperParams::default()).unwrap();
        let ka = s.params().kappa * s.params().alpha;
        let next = s.step(&s.initial_state()).unwrap();
        assert_eq!(next.u(), &[ka, 0.0]);
        assert_eq!(next.z().values(), &[0.0]);
        assert_eq!(next.gamma().values(), &[0.0]);
    }

    #[test]
    fn oversized_step_is_caught() {
        let x = Image::Gray(ImagePlane::new(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap());
        let g = LatticeGraph::new(2, 2).unwrap();
        let mut params = HyperParams {
            check_descent: true,
            ..HyperParams::default()
        }
        .resolve(&g)
        .unwrap();
        params.alpha *= 3.0;
        let mut s = Smoother::with_params(g, x.to_planar(), 1, params).unwrap();
        let mut state = s.initial_state();
        let err = (0..50).find_map(|_| s.advance(&mut state).err());
        assert!(matches!(err, Some(Error::StepSize { .. })));
    }
}
