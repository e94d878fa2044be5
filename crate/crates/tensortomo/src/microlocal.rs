//! Pointwise symbol calculus for the normal operator.
//!
//! Symbol matrices act on symmetric-tensor coefficient vectors expressed in
//! the *weighted orthonormal* coordinates `u~ = W^{1/2} u`, where `W` is the
//! diagonal of multiplicities `m!/alpha!`. In these coordinates the
//! multiplicity-weighted inner product is the standard dot product, so the
//! normal-operator symbol is an ordinary symmetric positive semidefinite
//! matrix and the solenoidal projector is an orthogonal projector. Apply a
//! symbol to a raw coefficient vector as `W^{-1/2} M W^{1/2} u`.

use crate::geometry::{
    hyperplane_intersections, CovectorClass, Curve, GeometryError, GeometryOpts, WavefrontElement,
};
use crate::symtensor::{sym_dim, sym_power_into, tuy_rank, SymBasis, SymTensor};
use crate::vecn::VecN;
use crate::xray::{normal_at_point, Grid, LineGeometry, TensorField};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, thiserror::Error)]
pub enum MicrolocalError {
    #[error("covector has a tangential intersection; not in the transversal set")]
    NotInXiDelta,
    #[error("hyperplane misses the curve; symbol undefined")]
    NoIntersections,
    #[error("symbol rank deficient: eigenvalue {lambda_l:.3e} at cut index {l} below tolerance (max {lambda_max:.3e})")]
    RankDeficient { l: usize, lambda_l: f64, lambda_max: f64 },
    #[error("eigenvalue gap {gap:.2e} below required {required:.2e}; genericity ambiguous at this covector")]
    GapTooSmall { gap: f64, required: f64 },
    #[error("oscillatory probe fit residual {residual:.3e} exceeds {max:.3e}; grid too coarse for the sweep")]
    InsufficientDecay { residual: f64, max: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A symbol evaluated at one covector, stored in weighted orthonormal
/// coordinates (see module docs).
#[derive(Clone, Debug)]
pub struct SymbolMatrix {
    pub n: usize,
    pub m: usize,
    pub entries: DMatrix<f64>,
    pub x: VecN,
    pub xi: VecN,
}

impl SymbolMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Apply to a raw coefficient vector: `W^{-1/2} M W^{1/2} u`.
    pub fn apply(&self, u: &SymTensor) -> SymTensor {
        let basis = SymBasis::get(self.n, self.m);
        let d = basis.dim();
        let mut tilde = DVector::<f64>::zeros(d);
        for k in 0..d {
            tilde[k] = basis.sqrt_mult[k] * u.coeffs[k];
        }
        let out = &self.entries * tilde;
        let mut coeffs = vec![0.0; d];
        for k in 0..d {
            coeffs[k] = out[k] / basis.sqrt_mult[k];
        }
        SymTensor::from_coeffs(self.n, self.m, coeffs)
    }

    pub fn max_symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim() {
            for j in 0..i {
                worst = worst.max((self.entries[(i, j)] - self.entries[(j, i)]).abs());
            }
        }
        worst
    }
}

/// Controls for symbol assembly and eigen-truncation.
#[derive(Clone, Copy, Debug)]
pub struct SymbolOpts {
    pub geometry: GeometryOpts,
    /// Relative eigenvalue tolerance for declaring rank deficiency.
    pub tol_rank: f64,
    /// Required ratio `lambda_L / lambda_{L+1}` when trailing eigenvalues
    /// are not negligible.
    pub min_gap: f64,
}

impl Default for SymbolOpts {
    fn default() -> Self {
        SymbolOpts { geometry: GeometryOpts::default(), tol_rank: 1e-10, min_gap: 1e3 }
    }
}

/// Principal symbol of the normal operator at `(x, xi)`:
/// `A0 = Σ_q c_q w_q w_q^T` over the hyperplane–curve intersections, with
/// `w_q` the weighted coefficient vector of `ω(t_q)^{⊙m}`,
/// `ω(t_q) = (x - γ(t_q)) / |x - γ(t_q)|` and
/// `c_q = 2π / (|ξ| |γ'(t_q)·ξ̂| |γ(t_q) - x|^{n-2})`.
pub fn symbol_a0(
    curve: &Curve,
    x: &VecN,
    xi: &VecN,
    m: usize,
    opts: &SymbolOpts,
) -> Result<SymbolMatrix, MicrolocalError> {
    let n = curve.dim();
    let basis = SymBasis::get(n, m);
    let d = basis.dim();
    let inters = hyperplane_intersections(curve, x, xi, &opts.geometry)?;
    if inters.is_empty() {
        return Err(MicrolocalError::NoIntersections);
    }
    if inters.iter().any(|p| p.tangential) {
        return Err(MicrolocalError::NotInXiDelta);
    }
    let xi_norm = xi.norm();
    let mut a0 = DMatrix::<f64>::zeros(d, d);
    let mut wq = vec![0.0; d];
    for ip in &inters {
        let sep = x.sub(&ip.point);
        let r = sep.norm();
        let omega = match sep.unit() {
            Some(u) => u,
            None => continue,
        };
        let c = 2.0 * std::f64::consts::PI
            / (xi_norm * ip.transversality.abs() * r.powi(n as i32 - 2));
        sym_power_into(&basis, omega.as_slice(), &mut wq);
        for k in 0..d {
            wq[k] *= basis.sqrt_mult[k];
        }
        for i in 0..d {
            for j in 0..d {
                a0[(i, j)] += c * wq[i] * wq[j];
            }
        }
    }
    Ok(SymbolMatrix { n, m, entries: a0, x: *x, xi: *xi })
}

/// Principal symbol of the solenoidal projector: the orthogonal projector
/// (weighted inner product) onto `{u : contract(u, xi) = 0}`, computed as
/// `I - Q` with `Q` the projector onto the range of `v -> xi ⊙ v`.
pub fn solenoidal_symbol(xi: &VecN, n: usize, m: usize) -> SymbolMatrix {
    let basis = SymBasis::get(n, m);
    let d = basis.dim();
    if m == 0 {
        // scalars have no potential part
        return SymbolMatrix { n, m, entries: DMatrix::identity(1, 1), x: VecN::zeros(n), xi: *xi };
    }
    let xi_hat = xi.unit().expect("solenoidal symbol needs a nonzero covector");
    let d_lower = sym_dim(n, m - 1);
    let xi_t = SymTensor::make_order1(xi_hat.as_slice());
    let mut b = DMatrix::<f64>::zeros(d, d_lower);
    for j in 0..d_lower {
        let mut coeffs = vec![0.0; d_lower];
        coeffs[j] = 1.0;
        let v = SymTensor::from_coeffs(n, m - 1, coeffs);
        let col = crate::symtensor::sym_product(&xi_t, &v);
        for i in 0..d {
            b[(i, j)] = basis.sqrt_mult[i] * col.coeffs[i];
        }
    }
    // orthogonal projector onto range(b) via thin SVD
    let svd = b.svd(true, false);
    let u = svd.u.as_ref().expect("svd with u");
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let mut q = DMatrix::<f64>::zeros(d, d);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > 1e-12 * smax {
            let col = u.column(k);
            for i in 0..d {
                for j in 0..d {
                    q[(i, j)] += col[i] * col[j];
                }
            }
        }
    }
    let entries = DMatrix::identity(d, d) - q;
    SymbolMatrix { n, m, entries, x: VecN::zeros(n), xi: *xi }
}

/// Parametrix symbol `B0 = σ(S) P D⁻ Pᵀ`: eigendecompose `A0`, invert
/// exactly the top `L(n,m)` eigenvalues, zero the rest, and compose with the
/// solenoidal projector.
pub fn parametrix_symbol_b0(
    a0: &SymbolMatrix,
    xi: &VecN,
    opts: &SymbolOpts,
) -> Result<SymbolMatrix, MicrolocalError> {
    let d = a0.dim();
    let l = tuy_rank(a0.n, a0.m);
    let eig = a0.entries.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
    let lambda_max = eig.eigenvalues[order[0]].max(0.0);
    let lambda_l = eig.eigenvalues[order[l - 1]];
    if lambda_l <= opts.tol_rank * lambda_max {
        return Err(MicrolocalError::RankDeficient { l, lambda_l, lambda_max });
    }
    if l < d {
        let lambda_next = eig.eigenvalues[order[l]].max(0.0);
        // trailing eigenvalues at roundoff level count as exact zeros
        if lambda_next > opts.tol_rank * lambda_max {
            let gap = lambda_l / lambda_next;
            if gap < opts.min_gap {
                return Err(MicrolocalError::GapTooSmall { gap, required: opts.min_gap });
            }
        }
    }
    let mut pinv = DMatrix::<f64>::zeros(d, d);
    for &k in order.iter().take(l) {
        let col = eig.eigenvectors.column(k);
        let inv = 1.0 / eig.eigenvalues[k];
        for i in 0..d {
            for j in 0..d {
                pinv[(i, j)] += inv * col[i] * col[j];
            }
        }
    }
    let sigma_s = solenoidal_symbol(xi, a0.n, a0.m);
    let entries = &sigma_s.entries * pinv;
    Ok(SymbolMatrix { n: a0.n, m: a0.m, entries, x: a0.x, xi: *xi })
}

/// Smooth cutoff configuration for the parametrix symbol.
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct SymbolCutoffConfig {
    /// Σ-distance at which the window reaches 1.
    pub delta_sigma: f64,
    /// Roll-off width below `delta_sigma` (0 < width <= delta_sigma).
    pub transition_width: f64,
    pub xi_min: f64,
    pub xi_max: f64,
    /// Relative band roll-off fraction at the xi_min / xi_max edges.
    pub band_rolloff: f64,
}

impl SymbolCutoffConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.transition_width > 0.0 && self.transition_width <= self.delta_sigma) {
            return Err("need 0 < transition_width <= delta_sigma".into());
        }
        if !(self.xi_min >= 0.0 && self.xi_max > self.xi_min) {
            return Err("need 0 <= xi_min < xi_max".into());
        }
        Ok(())
    }

    /// Quintic-smoothstep window value for a classified covector.
    pub fn window(&self, cls: CovectorClass, sigma_distance: f64, xi_norm: f64) -> f64 {
        if cls != CovectorClass::InXiDelta {
            return 0.0;
        }
        let roll = smoothstep((sigma_distance - (self.delta_sigma - self.transition_width)) / self.transition_width);
        let w = self.band_rolloff;
        let lo = smoothstep((xi_norm - self.xi_min) / (self.xi_min * w).max(1e-12));
        let hi = smoothstep((self.xi_max - xi_norm) / (self.xi_max * w).max(1e-12));
        roll * lo * hi
    }
}

/// C² quintic step: 0 below 0, 1 above 1.
pub fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
}

/// The cutoff parametrix symbol `b0`: `B0` scaled by the smooth window, the
/// zero matrix away from the transversal set.
pub fn cutoff_b0(
    b0: &SymbolMatrix,
    wf: &WavefrontElement,
    cfg: &SymbolCutoffConfig,
) -> SymbolMatrix {
    let w = cfg.window(wf.cls, wf.sigma_distance, wf.xi.norm());
    SymbolMatrix { n: b0.n, m: b0.m, entries: &b0.entries * w, x: b0.x, xi: b0.xi }
}

/// Configuration for the oscillatory symbol probe.
#[derive(Clone, Debug)]
pub struct ProbeOpts {
    /// Gaussian window width of the stimulus, in physical units.
    pub window_sigma: f64,
    /// Curve quadrature samples.
    pub n_t: usize,
    pub geom: LineGeometry,
    /// Divide per-λ responses by the trilinear interpolation transfer
    /// `Π_d sinc²(λ ξ̂_d h_d / 2)` of the sampled stimulus.
    pub compensate_interpolation: bool,
    /// Maximum admissible RMS log-residual of the power-law fit.
    pub max_fit_residual: f64,
    pub symbol: SymbolOpts,
}

impl Default for ProbeOpts {
    fn default() -> Self {
        ProbeOpts {
            window_sigma: 0.16,
            n_t: 512,
            geom: LineGeometry::default(),
            compensate_interpolation: true,
            max_fit_residual: 0.25,
            symbol: SymbolOpts::default(),
        }
    }
}

/// Result of the oscillatory probe at one covector.
#[derive(Clone, Debug)]
pub struct ProbeResult {
    /// Estimated symbol matrix (weighted coordinates), least squares over
    /// the λ sweep.
    pub estimated: DMatrix<f64>,
    /// Reference `A0` at the same covector.
    pub reference: DMatrix<f64>,
    /// Fitted power of λ (should be ≈ -1).
    pub fitted_power: f64,
    /// Relative Frobenius error of `estimated` against `reference`.
    pub rel_frobenius_error: f64,
    /// Per-λ Frobenius norms of the compensated response matrices.
    pub lambda_norms: Vec<(f64, f64)>,
}

/// Independent oracle for [`symbol_a0`]: applies the discrete normal
/// operator (direct kernel route) to windowed oscillatory stimuli
/// `χ(x) cos/sin(λ (x-x0)·ξ̂0) u` over each coefficient basis tensor `u`,
/// demodulates the response at `x0` and extracts the `λ^{-1}` coefficient by
/// least squares over the sweep.
pub fn oscillatory_probe(
    curve: &Curve,
    grid: &Grid,
    x0: &VecN,
    xi0: &VecN,
    m: usize,
    lambdas: &[f64],
    opts: &ProbeOpts,
) -> Result<ProbeResult, MicrolocalError> {
    let n = grid.n();
    let basis = SymBasis::get(n, m);
    let d = basis.dim();
    let xi_hat = xi0.unit().expect("probe covector must be nonzero");
    let a0 = symbol_a0(curve, x0, &xi_hat, m, &opts.symbol)?;

    // responses[l] = compensated demodulated response matrix at lambdas[l]
    let mut responses: Vec<DMatrix<f64>> = Vec::with_capacity(lambdas.len());
    for &lam in lambdas {
        let mut resp = DMatrix::<f64>::zeros(d, d);
        let comp = if opts.compensate_interpolation {
            (0..n)
                .map(|dd| {
                    let u = lam * xi_hat[dd] * grid.spacing[dd] / 2.0;
                    let s = if u.abs() < 1e-12 { 1.0 } else { u.sin() / u };
                    s * s
                })
                .product::<f64>()
        } else {
            1.0
        };
        for j in 0..d {
            let rc = probe_response(curve, grid, x0, &xi_hat, m, j, lam, false, opts);
            let rs = probe_response(curve, grid, x0, &xi_hat, m, j, lam, true, opts);
            // in-phase (cosine) part of the demodulated complex response
            for i in 0..d {
                let re = basis.sqrt_mult[i] * rc.coeffs[i];
                let _im = basis.sqrt_mult[i] * rs.coeffs[i];
                resp[(i, j)] += re / (comp * basis.sqrt_mult[j]);
            }
        }
        responses.push(resp);
    }

    // least squares of resp ≈ (1/λ) M  =>  M = Σ resp/λ / Σ 1/λ²
    let mut num = DMatrix::<f64>::zeros(d, d);
    let mut den = 0.0;
    for (l, &lam) in lambdas.iter().enumerate() {
        num += &responses[l] * (1.0 / lam);
        den += 1.0 / (lam * lam);
    }
    let estimated = num / den;

    // power-law fit on Frobenius norms
    let mut lambda_norms = Vec::with_capacity(lambdas.len());
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (l, &lam) in lambdas.iter().enumerate() {
        let norm = responses[l].norm();
        lambda_norms.push((lam, norm));
        let (x, y) = (lam.ln(), norm.ln());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let k = lambdas.len() as f64;
    let slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    let intercept = (sy - slope * sx) / k;
    let mut residual = 0.0;
    for &(lam, norm) in &lambda_norms {
        let pred = intercept + slope * lam.ln();
        residual += (norm.ln() - pred).powi(2);
    }
    let residual = (residual / k).sqrt();
    if residual > opts.max_fit_residual {
        return Err(MicrolocalError::InsufficientDecay { residual, max: opts.max_fit_residual });
    }

    let diff = &estimated - &a0.entries;
    let rel = diff.norm() / a0.entries.norm();
    Ok(ProbeResult {
        estimated,
        reference: a0.entries,
        fitted_power: slope,
        rel_frobenius_error: rel,
        lambda_norms,
    })
}

#[allow(clippy::too_many_arguments)]
fn probe_response(
    curve: &Curve,
    grid: &Grid,
    x0: &VecN,
    xi_hat: &VecN,
    m: usize,
    comp_idx: usize,
    lam: f64,
    quadrature_phase: bool,
    opts: &ProbeOpts,
) -> SymTensor {
    let n = grid.n();
    let d = sym_dim(n, m);
    let mut f = TensorField::zeros(grid.clone(), m);
    let inv2s2 = 1.0 / (2.0 * opts.window_sigma * opts.window_sigma);
    for vox in 0..grid.num_voxels() {
        let x = grid.voxel_center(vox);
        let dx = x.sub(x0);
        let phase = lam * dx.dot(xi_hat);
        let chi = (-dx.dot(&dx) * inv2s2).exp();
        let osc = if quadrature_phase { phase.sin() } else { phase.cos() };
        f.data[vox * d + comp_idx] = chi * osc;
    }
    normal_at_point(&f, curve, &opts.geom, opts.n_t, x0)
}
