//! Discrete restricted ray transform: forward line integration over the
//! curve's line complex, the matching backprojection (adjoint), the normal
//! operator by composition or by direct kernel evaluation, and the
//! symmetrized derivative that generates potential (kernel) fields.
//!
//! Measure convention: the line complex is parametrized by curve parameter t
//! and a full-sphere direction table, which covers every line twice (ω and
//! -ω give the same line). Sinogram inner products therefore carry the
//! weight `(1/2) Δt ΔS`, and the backprojection averages the two antipodal
//! samples. On data in the range of the forward transform the average
//! reduces to the one-sided kernel `g(t, ω(t,x)) ω(t,x)^{⊙m}`, and the
//! composition `adjoint ∘ forward` has the principal symbol assembled by
//! [`crate::microlocal::symbol_a0`]. The pairing `<Rf, g> = <f, R*g>` holds
//! exactly in the continuum for arbitrary `g`.

use crate::geometry::{Curve, CurveSample};
use crate::symtensor::{sym_dim, sym_power_into, SymBasis};
use crate::vecn::VecN;
use rayon::prelude::*;
use std::sync::Arc;

#[derive(Debug, thiserror::Error)]
pub enum XrayError {
    #[error("geometry mismatch: {0}")]
    GeometryMismatch(String),
    #[error("field support within {margin} voxels of the grid boundary (max variation {max_var:.3e})")]
    SupportTooClose { margin: usize, max_var: f64 },
    #[error("dimension {0} not supported by the transform modules (n must be 2 or 3)")]
    UnsupportedDimension(usize),
}

/// Uniform box grid. `origin` is the center of the first voxel.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub dims: Vec<usize>,
    pub origin: Vec<f64>,
    pub spacing: Vec<f64>,
}

impl Grid {
    pub fn new(dims: Vec<usize>, origin: Vec<f64>, spacing: Vec<f64>) -> Self {
        assert_eq!(dims.len(), origin.len());
        assert_eq!(dims.len(), spacing.len());
        assert!(dims.iter().all(|&d| d >= 2));
        assert!(spacing.iter().all(|&h| h > 0.0));
        Grid { dims, origin, spacing }
    }

    /// Cube grid centered on `center` with physical side length `side`.
    pub fn cube(n: usize, dim: usize, center: &[f64], side: f64) -> Self {
        let h = side / dim as f64;
        let origin = (0..n).map(|d| center[d] - side / 2.0 + h / 2.0).collect();
        Grid::new(vec![dim; n], origin, vec![h; n])
    }

    pub fn n(&self) -> usize {
        self.dims.len()
    }

    pub fn num_voxels(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn voxel_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Low/high corners of the physical box (voxel faces, not centers).
    pub fn bounds(&self) -> (VecN, VecN) {
        let n = self.n();
        let mut lo = VecN::zeros(n);
        let mut hi = VecN::zeros(n);
        for d in 0..n {
            lo[d] = self.origin[d] - 0.5 * self.spacing[d];
            hi[d] = self.origin[d] + (self.dims[d] as f64 - 0.5) * self.spacing[d];
        }
        (lo, hi)
    }

    pub fn center(&self) -> VecN {
        let (lo, hi) = self.bounds();
        lo.add(&hi).scale(0.5)
    }

    /// Center of the voxel with C-order flat index `idx`.
    pub fn voxel_center(&self, mut idx: usize) -> VecN {
        let n = self.n();
        let mut coord = VecN::zeros(n);
        for d in (0..n).rev() {
            let i = idx % self.dims[d];
            idx /= self.dims[d];
            coord[d] = self.origin[d] + i as f64 * self.spacing[d];
        }
        coord
    }

    /// Entry/exit parameters of the line `p + s ω` against the physical box
    /// (slab clipping); `None` when the line misses the box.
    pub fn clip_line(&self, p: &VecN, omega: &VecN) -> Option<(f64, f64)> {
        let (lo, hi) = self.bounds();
        let mut s0 = f64::NEG_INFINITY;
        let mut s1 = f64::INFINITY;
        for d in 0..self.n() {
            if omega[d].abs() < 1e-14 {
                if p[d] < lo[d] || p[d] > hi[d] {
                    return None;
                }
            } else {
                let a = (lo[d] - p[d]) / omega[d];
                let b = (hi[d] - p[d]) / omega[d];
                s0 = s0.max(a.min(b));
                s1 = s1.min(a.max(b));
            }
        }
        (s0 < s1).then_some((s0, s1))
    }
}

/// Gridded symmetric tensor field, voxel-major and component-minor:
/// `data[vox * D + c]`.
#[derive(Clone, Debug)]
pub struct TensorField {
    pub grid: Grid,
    pub m: usize,
    pub data: Vec<f64>,
}

impl TensorField {
    pub fn zeros(grid: Grid, m: usize) -> Self {
        let len = grid.num_voxels() * sym_dim(grid.n(), m);
        TensorField { grid, m, data: vec![0.0; len] }
    }

    pub fn components(&self) -> usize {
        sym_dim(self.grid.n(), self.m)
    }

    pub fn voxel(&self, idx: usize) -> &[f64] {
        let d = self.components();
        &self.data[idx * d..(idx + 1) * d]
    }

    pub fn voxel_mut(&mut self, idx: usize) -> &mut [f64] {
        let d = self.components();
        &mut self.data[idx * d..(idx + 1) * d]
    }

    /// Multilinear interpolation of all components at a physical point.
    /// Points outside the grid read as zero.
    pub fn interp(&self, p: &VecN, out: &mut [f64]) {
        let n = self.grid.n();
        let d = self.components();
        out[..d].fill(0.0);
        let mut base = [0isize; 8];
        let mut frac = [0.0f64; 8];
        for dd in 0..n {
            let g = (p[dd] - self.grid.origin[dd]) / self.grid.spacing[dd];
            let f = g.floor();
            base[dd] = f as isize;
            frac[dd] = g - f;
        }
        let corners = 1usize << n;
        for c in 0..corners {
            let mut w = 1.0;
            let mut flat = 0usize;
            let mut ok = true;
            for dd in 0..n {
                let bit = (c >> dd) & 1;
                let i = base[dd] + bit as isize;
                if i < 0 || i >= self.grid.dims[dd] as isize {
                    ok = false;
                    break;
                }
                w *= if bit == 1 { frac[dd] } else { 1.0 - frac[dd] };
                flat = flat * self.grid.dims[dd] + i as usize;
            }
            if !ok || w == 0.0 {
                continue;
            }
            let src = &self.data[flat * d..flat * d + d];
            for k in 0..d {
                out[k] += w * src[k];
            }
        }
    }

    /// Weighted L² norm: voxel volume times the multiplicity-weighted fiber
    /// norm.
    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn inner(&self, other: &TensorField) -> f64 {
        assert_eq!(self.grid, other.grid);
        assert_eq!(self.m, other.m);
        let basis = SymBasis::get(self.grid.n(), self.m);
        let d = self.components();
        let vol = self.grid.voxel_volume();
        let acc: f64 = self
            .data
            .chunks_exact(d)
            .zip(other.data.chunks_exact(d))
            .map(|(a, b)| {
                let mut s = 0.0;
                for k in 0..d {
                    s += basis.mult[k] * a[k] * b[k];
                }
                s
            })
            .sum();
        vol * acc
    }

    pub fn scaled_add(&mut self, c: f64, other: &TensorField) {
        assert_eq!(self.data.len(), other.data.len());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    pub fn scale(&mut self, c: f64) {
        for a in self.data.iter_mut() {
            *a *= c;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, &v| acc.max(v.abs()))
    }
}

/// Equal-area direction table on the unit sphere. For n = 3 the cells are a
/// uniform grid in (z, φ) = (cos θ, azimuth), which has constant solid angle
/// and supports bilinear interpolation; for n = 2 a uniform angle grid.
#[derive(Clone, Debug)]
pub struct DirectionSet {
    pub n: usize,
    pub n_z: usize,
    pub n_phi: usize,
    pub dirs: Vec<VecN>,
}

impl DirectionSet {
    pub fn equal_area(n: usize, n_dir: usize) -> Result<Self, XrayError> {
        match n {
            2 => {
                let n_phi = n_dir.max(4);
                let dirs = (0..n_phi)
                    .map(|j| {
                        let phi = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / n_phi as f64;
                        VecN::from_slice(&[phi.cos(), phi.sin()])
                    })
                    .collect();
                Ok(DirectionSet { n, n_z: 1, n_phi, dirs })
            }
            3 => {
                // aspect 2:1 in (φ, z) keeps cells near-square
                let n_z = ((n_dir as f64 / 2.0).sqrt().round() as usize).max(2);
                let n_phi = (n_dir / n_z).max(4);
                let mut dirs = Vec::with_capacity(n_z * n_phi);
                for i in 0..n_z {
                    let z = -1.0 + 2.0 * (i as f64 + 0.5) / n_z as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    for j in 0..n_phi {
                        let phi = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / n_phi as f64;
                        dirs.push(VecN::from_slice(&[r * phi.cos(), r * phi.sin(), z]));
                    }
                }
                Ok(DirectionSet { n, n_z, n_phi, dirs })
            }
            d => Err(XrayError::UnsupportedDimension(d)),
        }
    }

    pub fn from_parts(n: usize, n_z: usize, n_phi: usize, dirs: Vec<VecN>) -> Self {
        DirectionSet { n, n_z, n_phi, dirs }
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    /// Solid-angle weight per direction cell (constant by construction).
    pub fn cell_weight(&self) -> f64 {
        match self.n {
            2 => 2.0 * std::f64::consts::PI / self.n_phi as f64,
            _ => 4.0 * std::f64::consts::PI / (self.n_z * self.n_phi) as f64,
        }
    }

    /// Bilinear interpolation of one sinogram row at an arbitrary unit
    /// direction (φ periodic, z clamped at the poles).
    pub fn interp_row(&self, row: &[f64], omega: &VecN) -> f64 {
        match self.n {
            2 => {
                let phi = omega[1].atan2(omega[0]).rem_euclid(2.0 * std::f64::consts::PI);
                let g = phi / (2.0 * std::f64::consts::PI) * self.n_phi as f64 - 0.5;
                let j0 = g.floor();
                let f = g - j0;
                let a = row[(j0.rem_euclid(self.n_phi as f64)) as usize % self.n_phi];
                let b = row[((j0 + 1.0).rem_euclid(self.n_phi as f64)) as usize % self.n_phi];
                a * (1.0 - f) + b * f
            }
            _ => {
                let z = omega[2].clamp(-1.0, 1.0);
                let phi = omega[1].atan2(omega[0]).rem_euclid(2.0 * std::f64::consts::PI);
                let gz = (z + 1.0) / 2.0 * self.n_z as f64 - 0.5;
                let gp = phi / (2.0 * std::f64::consts::PI) * self.n_phi as f64 - 0.5;
                let iz = gz.floor();
                let fz = (gz - iz).clamp(0.0, 1.0);
                let i0 = (iz.max(0.0) as usize).min(self.n_z - 1);
                let i1 = ((iz + 1.0).max(0.0) as usize).min(self.n_z - 1);
                let jp = gp.floor();
                let fp = gp - jp;
                let j0 = (jp.rem_euclid(self.n_phi as f64)) as usize % self.n_phi;
                let j1 = (j0 + 1) % self.n_phi;
                let v00 = row[i0 * self.n_phi + j0];
                let v01 = row[i0 * self.n_phi + j1];
                let v10 = row[i1 * self.n_phi + j0];
                let v11 = row[i1 * self.n_phi + j1];
                (v00 * (1.0 - fp) + v01 * fp) * (1.0 - fz) + (v10 * (1.0 - fp) + v11 * fp) * fz
            }
        }
    }
}

/// Quadrature controls for line integrals.
#[derive(Clone, Copy, Debug)]
pub struct LineGeometry {
    /// Trapezoid step as a fraction of the minimum voxel spacing.
    pub s_step_rel: f64,
    /// Optional fixed arclength window; must cover the box clip of every
    /// line, otherwise `GeometryMismatch`. `None` clips per line.
    pub s_range: Option<(f64, f64)>,
    /// Extra steps appended on both ends of the clipped interval.
    pub pad_steps: usize,
}

impl Default for LineGeometry {
    fn default() -> Self {
        LineGeometry { s_step_rel: 0.5, s_range: None, pad_steps: 2 }
    }
}

/// Sampled restricted-transform data: `data[t_index * n_dir + dir_index]`.
#[derive(Clone, Debug)]
pub struct Sinogram {
    pub samples: Vec<CurveSample>,
    pub directions: DirectionSet,
    pub data: Vec<f64>,
}

impl Sinogram {
    pub fn zeros(samples: Vec<CurveSample>, directions: DirectionSet) -> Self {
        let len = samples.len() * directions.len();
        Sinogram { samples, directions, data: vec![0.0; len] }
    }

    pub fn row(&self, it: usize) -> &[f64] {
        let nd = self.directions.len();
        &self.data[it * nd..(it + 1) * nd]
    }

    /// Line-complex inner product: weight `(1/2) Δt ΔS` per sample (each
    /// geometric line appears twice in the full-sphere table).
    pub fn inner(&self, other: &Sinogram) -> f64 {
        assert_eq!(self.data.len(), other.data.len());
        let cell = self.directions.cell_weight();
        let nd = self.directions.len();
        let mut acc = 0.0;
        for (it, s) in self.samples.iter().enumerate() {
            let w = 0.5 * s.weight * cell;
            let a = &self.data[it * nd..(it + 1) * nd];
            let b = &other.data[it * nd..(it + 1) * nd];
            acc += w * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        }
        acc
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, &v| acc.max(v.abs()))
    }
}

/// Full line integral of `<f, ω^{⊙m}>` along `p + s ω` by composite
/// trapezoid over the box clip of the line.
pub fn forward_line(field: &TensorField, p: &VecN, omega: &VecN, geom: &LineGeometry) -> Result<f64, XrayError> {
    let basis = SymBasis::get(field.grid.n(), field.m);
    let d = basis.dim();
    let mut wvec = vec![0.0; d];
    sym_power_into(&basis, omega.as_slice(), &mut wvec);
    for k in 0..d {
        wvec[k] *= basis.mult[k];
    }
    forward_line_weighted(field, p, omega, geom, &wvec)
}

fn forward_line_weighted(
    field: &TensorField,
    p: &VecN,
    omega: &VecN,
    geom: &LineGeometry,
    weight: &[f64],
) -> Result<f64, XrayError> {
    let clip = match field.grid.clip_line(p, omega) {
        Some(c) => c,
        None => return Ok(0.0),
    };
    let step = geom.s_step_rel * field.grid.min_spacing();
    let pad = geom.pad_steps as f64 * step;
    let (mut s0, mut s1) = (clip.0 - pad, clip.1 + pad);
    if let Some((a, b)) = geom.s_range {
        if a > clip.0 || b < clip.1 {
            return Err(XrayError::GeometryMismatch(format!(
                "s_range [{a}, {b}] does not cover the box clip [{:.4}, {:.4}]",
                clip.0, clip.1
            )));
        }
        s0 = a;
        s1 = b;
    }
    let count = ((s1 - s0) / step).ceil() as usize + 1;
    let ds = (s1 - s0) / (count - 1) as f64;
    let d = weight.len();
    let mut buf = vec![0.0; d];
    let mut acc = 0.0;
    for j in 0..count {
        let s = s0 + j as f64 * ds;
        let pt = p.add(&omega.scale(s));
        field.interp(&pt, &mut buf);
        let mut v = 0.0;
        for k in 0..d {
            v += weight[k] * buf[k];
        }
        let w = if j == 0 || j == count - 1 { 0.5 } else { 1.0 };
        acc += w * v;
    }
    Ok(acc * ds)
}

/// Forward restricted ray transform over `n_t` curve samples and the
/// direction table.
pub fn forward(
    field: &TensorField,
    curve: &Curve,
    geom: &LineGeometry,
    directions: &DirectionSet,
    n_t: usize,
) -> Result<Sinogram, XrayError> {
    if field.grid.n() != curve.dim() {
        return Err(XrayError::GeometryMismatch("field and curve dimensions differ".into()));
    }
    let samples = curve.samples(n_t);
    let basis = SymBasis::get(field.grid.n(), field.m);
    let d = basis.dim();
    // per-direction weight vectors (mult * ω^alpha), shared across t
    let dir_weights: Vec<Vec<f64>> = directions
        .dirs
        .iter()
        .map(|omega| {
            let mut w = vec![0.0; d];
            sym_power_into(&basis, omega.as_slice(), &mut w);
            for k in 0..d {
                w[k] *= basis.mult[k];
            }
            w
        })
        .collect();

    let nd = directions.len();
    let positions: Vec<VecN> = samples.iter().map(|s| curve.eval(s.component, s.t).0).collect();
    let data: Vec<f64> = (0..samples.len() * nd)
        .into_par_iter()
        .map(|idx| {
            let it = idx / nd;
            let id = idx % nd;
            forward_line_weighted(field, &positions[it], &directions.dirs[id], geom, &dir_weights[id])
                .unwrap_or(0.0)
        })
        .collect();
    // surface any geometry mismatch deterministically
    if let Some((a, b)) = geom.s_range {
        for pos in &positions {
            for omega in &directions.dirs {
                if let Some(clip) = field.grid.clip_line(pos, omega) {
                    if a > clip.0 || b < clip.1 {
                        return Err(XrayError::GeometryMismatch(format!(
                            "s_range [{a}, {b}] does not cover a line clip"
                        )));
                    }
                }
            }
        }
    }
    Ok(Sinogram { samples, directions: directions.clone(), data })
}

/// Backprojection diagnostics.
#[derive(Clone, Copy, Debug, Default)]
pub struct AdjointStats {
    /// Voxel–curve encounters closer than one voxel spacing, skipped.
    pub singular_skips: u64,
}

/// Adjoint of [`forward`] under the line-complex measure: for every voxel x
/// and curve sample t, average the two antipodal direction samples
/// `(1/2) [g(t, ω̂) ω̂^{⊙m} + g(t, -ω̂) (-ω̂)^{⊙m}]` with the Jacobian weight
/// `|x - γ(t)|^{1-n} Δt`.
pub fn adjoint(sino: &Sinogram, curve: &Curve, grid: &Grid, m: usize) -> (TensorField, AdjointStats) {
    let n = grid.n();
    let basis = SymBasis::get(n, m);
    let d = basis.dim();
    let positions: Vec<VecN> =
        sino.samples.iter().map(|s| curve.eval(s.component, s.t).0).collect();
    let min_h = grid.min_spacing();
    let nd = sino.directions.len();
    let parity = if m % 2 == 0 { 1.0 } else { -1.0 };

    let results: Vec<(Vec<f64>, u64)> = (0..grid.num_voxels())
        .into_par_iter()
        .map(|vox| {
            let x = grid.voxel_center(vox);
            let mut acc = vec![0.0; d];
            let mut skips = 0u64;
            let mut wbuf = vec![0.0; d];
            for (it, s) in sino.samples.iter().enumerate() {
                let sep = x.sub(&positions[it]);
                let r = sep.norm();
                if r < min_h {
                    skips += 1;
                    continue;
                }
                let omega = sep.scale(1.0 / r);
                let row = &sino.data[it * nd..(it + 1) * nd];
                let g_plus = sino.directions.interp_row(row, &omega);
                let g_minus = sino.directions.interp_row(row, &omega.scale(-1.0));
                let g = 0.5 * (g_plus + parity * g_minus);
                if g == 0.0 {
                    continue;
                }
                let jac = r.powi(-(n as i32 - 1));
                sym_power_into(&basis, omega.as_slice(), &mut wbuf);
                let c = g * jac * s.weight;
                for k in 0..d {
                    acc[k] += c * wbuf[k];
                }
            }
            (acc, skips)
        })
        .collect();

    let mut field = TensorField::zeros(grid.clone(), m);
    let mut stats = AdjointStats::default();
    for (vox, (acc, skips)) in results.into_iter().enumerate() {
        field.voxel_mut(vox).copy_from_slice(&acc);
        stats.singular_skips += skips;
    }
    (field, stats)
}

/// Route selector for the normal operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormalRoute {
    /// `adjoint(forward(f))` through the sinogram and direction table.
    Composed,
    /// Direct kernel: per voxel, integrate f along the line joining the
    /// voxel to each curve sample (no direction table).
    DirectKernel,
}

/// The normal operator `R* R`.
pub fn normal(
    field: &TensorField,
    curve: &Curve,
    geom: &LineGeometry,
    directions: &DirectionSet,
    n_t: usize,
    route: NormalRoute,
) -> Result<TensorField, XrayError> {
    match route {
        NormalRoute::Composed => {
            let sino = forward(field, curve, geom, directions, n_t)?;
            Ok(adjoint(&sino, curve, &field.grid, field.m).0)
        }
        NormalRoute::DirectKernel => {
            let samples = curve.samples(n_t);
            let positions: Vec<VecN> =
                samples.iter().map(|s| curve.eval(s.component, s.t).0).collect();
            let grid = field.grid.clone();
            let out: Vec<Vec<f64>> = (0..grid.num_voxels())
                .into_par_iter()
                .map(|vox| {
                    let x = grid.voxel_center(vox);
                    normal_kernel_at(field, &samples, &positions, &x, geom)
                })
                .collect();
            let mut res = TensorField::zeros(grid, field.m);
            for (vox, acc) in out.into_iter().enumerate() {
                res.voxel_mut(vox).copy_from_slice(&acc);
            }
            Ok(res)
        }
    }
}

/// Direct-kernel normal operator evaluated at a single point (used by the
/// oscillatory symbol probe; no direction table involved).
pub fn normal_at_point(
    field: &TensorField,
    curve: &Curve,
    geom: &LineGeometry,
    n_t: usize,
    x: &VecN,
) -> crate::symtensor::SymTensor {
    let samples = curve.samples(n_t);
    let positions: Vec<VecN> = samples.iter().map(|s| curve.eval(s.component, s.t).0).collect();
    let coeffs = normal_kernel_at(field, &samples, &positions, x, geom);
    crate::symtensor::SymTensor::from_coeffs(field.grid.n(), field.m, coeffs)
}

fn normal_kernel_at(
    field: &TensorField,
    samples: &[CurveSample],
    positions: &[VecN],
    x: &VecN,
    geom: &LineGeometry,
) -> Vec<f64> {
    let n = field.grid.n();
    let basis = SymBasis::get(n, field.m);
    let d = basis.dim();
    let min_h = field.grid.min_spacing();
    let mut acc = vec![0.0; d];
    let mut wvec = vec![0.0; d];
    let mut pbuf = vec![0.0; d];
    for (it, s) in samples.iter().enumerate() {
        let sep = x.sub(&positions[it]);
        let r = sep.norm();
        if r < min_h {
            continue;
        }
        let omega = sep.scale(1.0 / r);
        sym_power_into(&basis, omega.as_slice(), &mut pbuf);
        for k in 0..d {
            wvec[k] = basis.mult[k] * pbuf[k];
        }
        let ray = match forward_line_weighted(field, &positions[it], &omega, geom, &wvec) {
            Ok(v) => v,
            Err(_) => continue,
        };
        let c = ray * r.powi(-(n as i32 - 1)) * s.weight;
        for k in 0..d {
            acc[k] += c * pbuf[k];
        }
    }
    acc
}

/// Symmetrized derivative `d`: maps an order-(m-1) field to the order-m
/// potential field `(dv)_gamma = (1/m) Σ_k gamma_k ∂_k v_{gamma - e_k}` by
/// central differences. Errors when the field varies within two voxels of
/// the boundary (the one-sided stencil there would alias).
pub fn symmetrized_derivative(v: &TensorField) -> Result<TensorField, XrayError> {
    let n = v.grid.n();
    let m_out = v.m + 1;
    check_support_margin(v, 2)?;
    let basis_out = SymBasis::get(n, m_out);
    let basis_in = SymBasis::get(n, v.m);
    let d_out = basis_out.dim();
    let d_in = basis_in.dim();
    let grid = v.grid.clone();
    let dims = grid.dims.clone();
    let strides = c_strides(&dims);

    let out_data: Vec<f64> = (0..grid.num_voxels())
        .into_par_iter()
        .flat_map_iter(|vox| {
            let mut idx = vec![0usize; n];
            let mut rem = vox;
            for dd in 0..n {
                idx[dd] = rem / strides[dd];
                rem %= strides[dd];
            }
            let interior = (0..n).all(|dd| idx[dd] >= 1 && idx[dd] + 1 < dims[dd]);
            let mut out = vec![0.0; d_out];
            if interior {
                for (i, gamma) in basis_out.indices.iter().enumerate() {
                    let mut acc = 0.0;
                    for k in 0..n {
                        if gamma[k] == 0 {
                            continue;
                        }
                        let j = basis_out.lower(i, k).unwrap();
                        let plus = (vox + strides[k]) * d_in + j;
                        let minus = (vox - strides[k]) * d_in + j;
                        let deriv = (v.data[plus] - v.data[minus]) / (2.0 * grid.spacing[k]);
                        acc += gamma[k] as f64 * deriv;
                    }
                    out[i] = acc / m_out as f64;
                }
            }
            out.into_iter()
        })
        .collect();

    Ok(TensorField { grid, m: m_out, data: out_data })
}

fn c_strides(dims: &[usize]) -> Vec<usize> {
    let n = dims.len();
    let mut strides = vec![1usize; n];
    for d in (0..n - 1).rev() {
        strides[d] = strides[d + 1] * dims[d + 1];
    }
    strides
}

/// Support-margin precondition: the field must not *vary* within `margin`
/// voxels of the boundary (a globally constant field is fine).
fn check_support_margin(v: &TensorField, margin: usize) -> Result<(), XrayError> {
    let n = v.grid.n();
    let dims = &v.grid.dims;
    let strides = c_strides(dims);
    let d = v.components();
    let mut max_var = 0.0f64;
    let mut global_max = 0.0f64;
    for vox in 0..v.grid.num_voxels() {
        let mut rem = vox;
        let mut shell = false;
        for dd in 0..n {
            let i = rem / strides[dd];
            rem %= strides[dd];
            if i < margin || i + margin >= dims[dd] {
                shell = true;
            }
        }
        for k in 0..d {
            global_max = global_max.max(v.data[vox * d + k].abs());
        }
        if !shell {
            continue;
        }
        // compare against axis neighbors (clamped)
        let mut idx = vec![0usize; n];
        let mut rem2 = vox;
        for dd in 0..n {
            idx[dd] = rem2 / strides[dd];
            rem2 %= strides[dd];
        }
        for dd in 0..n {
            if idx[dd] + 1 < dims[dd] {
                let nb = vox + strides[dd];
                for k in 0..d {
                    max_var = max_var.max((v.data[vox * d + k] - v.data[nb * d + k]).abs());
                }
            }
        }
    }
    if max_var > 1e-12 * global_max.max(1e-300) {
        return Err(XrayError::SupportTooClose { margin, max_var });
    }
    Ok(())
}
