//! Source curves and the covector geometry of the restricted transform:
//! hyperplane–curve intersections, genericity ranks, Kirillov-Tuy sampling,
//! classification into the transversal/tangential covector sets and the
//! artifact flowout predictor.

use crate::symtensor::{sym_dim, tuy_rank, SymBasis, sym_power_into};
use crate::vecn::VecN;
use nalgebra::DMatrix;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, thiserror::Error)]
pub enum GeometryError {
    #[error("root refinement failed: {0}")]
    RootRefinement(String),
    #[error("curve component {component} lies inside the hyperplane (g ≡ 0); covector is degenerate")]
    ContainedComponent { component: usize },
    #[error("more than {cap} hyperplane intersections; curve violates the uniform intersection bound")]
    TooManyIntersections { cap: usize },
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
}

/// One smooth parametrized piece of a source curve.
#[derive(Clone, Debug)]
pub enum CurveComponent {
    /// `gamma(t) = point + t * dir`, `t in [t0, t1]`.
    Line { point: VecN, dir: VecN, t0: f64, t1: f64 },
    /// `gamma(t) = center + r (cos t e1 + sin t e2)`, `t in [t0, t1]`.
    Circle { center: VecN, e1: VecN, e2: VecN, radius: f64, t0: f64, t1: f64 },
    /// `gamma(t) = center + r cos t e1 + r sin t e2 + (pitch t / 2π) axis`.
    Helix { center: VecN, e1: VecN, e2: VecN, axis: VecN, radius: f64, pitch: f64, t0: f64, t1: f64 },
    /// Natural cubic spline through knots, parametrized by knot index.
    Spline(CubicSpline),
}

impl CurveComponent {
    pub fn domain(&self) -> (f64, f64) {
        match self {
            CurveComponent::Line { t0, t1, .. } => (*t0, *t1),
            CurveComponent::Circle { t0, t1, .. } => (*t0, *t1),
            CurveComponent::Helix { t0, t1, .. } => (*t0, *t1),
            CurveComponent::Spline(s) => (0.0, (s.knots.len() - 1) as f64),
        }
    }

    /// Position, first and second derivative at parameter `t`.
    pub fn eval(&self, t: f64) -> (VecN, VecN, VecN) {
        match self {
            CurveComponent::Line { point, dir, .. } => {
                (point.add(&dir.scale(t)), *dir, VecN::zeros(point.len()))
            }
            CurveComponent::Circle { center, e1, e2, radius, .. } => {
                let (s, c) = t.sin_cos();
                let pos = center.add(&e1.scale(radius * c)).add(&e2.scale(radius * s));
                let d1 = e1.scale(-radius * s).add(&e2.scale(radius * c));
                let d2 = e1.scale(-radius * c).add(&e2.scale(-radius * s));
                (pos, d1, d2)
            }
            CurveComponent::Helix { center, e1, e2, axis, radius, pitch, .. } => {
                let (s, c) = t.sin_cos();
                let lift = pitch / (2.0 * std::f64::consts::PI);
                let pos = center
                    .add(&e1.scale(radius * c))
                    .add(&e2.scale(radius * s))
                    .add(&axis.scale(lift * t));
                let d1 = e1.scale(-radius * s).add(&e2.scale(radius * c)).add(&axis.scale(lift));
                let d2 = e1.scale(-radius * c).add(&e2.scale(-radius * s));
                (pos, d1, d2)
            }
            CurveComponent::Spline(s) => s.eval(t),
        }
    }
}

/// Natural cubic spline through a list of knots, one polynomial piece per
/// unit parameter interval.
#[derive(Clone, Debug)]
pub struct CubicSpline {
    pub knots: Vec<VecN>,
    /// Second derivatives at knots, per coordinate (knot-major).
    second: Vec<VecN>,
}

impl CubicSpline {
    pub fn natural(knots: Vec<VecN>) -> Result<Self, GeometryError> {
        let k = knots.len();
        if k < 3 {
            return Err(GeometryError::InvalidCurve("spline needs at least 3 knots".into()));
        }
        let n = knots[0].len();
        // tridiagonal solve for natural spline second derivatives (h = 1)
        let mut second = vec![VecN::zeros(n); k];
        for d in 0..n {
            let mut a = vec![0.0; k];
            let mut b = vec![2.0; k];
            let mut c = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            for i in 1..k - 1 {
                a[i] = 0.5;
                c[i] = 0.5;
                rhs[i] = 3.0 * (knots[i + 1][d] - 2.0 * knots[i][d] + knots[i - 1][d]);
            }
            // forward sweep
            for i in 1..k {
                let w = a[i] / b[i - 1];
                b[i] -= w * c[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            let mut x = vec![0.0; k];
            x[k - 1] = rhs[k - 1] / b[k - 1];
            for i in (0..k - 1).rev() {
                x[i] = (rhs[i] - c[i] * x[i + 1]) / b[i];
            }
            for i in 0..k {
                second[i][d] = x[i];
            }
        }
        Ok(CubicSpline { knots, second })
    }

    fn eval(&self, t: f64) -> (VecN, VecN, VecN) {
        let k = self.knots.len();
        let i = (t.floor() as usize).min(k - 2);
        let u = t - i as f64;
        let n = self.knots[0].len();
        let (mut pos, mut d1, mut d2) = (VecN::zeros(n), VecN::zeros(n), VecN::zeros(n));
        for d in 0..n {
            let (y0, y1) = (self.knots[i][d], self.knots[i + 1][d]);
            let (m0, m1) = (self.second[i][d], self.second[i + 1][d]);
            let a = y1 - y0 - (2.0 * m0 + m1) / 6.0;
            pos[d] = y0 + a * u + m0 * u * u / 2.0 + (m1 - m0) * u * u * u / 6.0;
            d1[d] = a + m0 * u + (m1 - m0) * u * u / 2.0;
            d2[d] = m0 + (m1 - m0) * u;
        }
        (pos, d1, d2)
    }
}

/// A source curve: one or more smooth regular components with disjoint
/// global parameter intervals.
#[derive(Clone, Debug)]
pub struct Curve {
    pub components: Vec<CurveComponent>,
    /// Global parameter offset of each component (components are
    /// concatenated end to end on the global axis).
    offsets: Vec<f64>,
    n: usize,
}

/// A quadrature sample on the curve.
#[derive(Clone, Copy, Debug)]
pub struct CurveSample {
    pub component: usize,
    pub t: f64,
    pub global_t: f64,
    /// Parameter quadrature weight (uniform Δt within the component).
    pub weight: f64,
}

impl Curve {
    pub fn new(components: Vec<CurveComponent>) -> Result<Self, GeometryError> {
        if components.is_empty() {
            return Err(GeometryError::InvalidCurve("curve has no components".into()));
        }
        let n = match &components[0] {
            CurveComponent::Line { point, .. } => point.len(),
            CurveComponent::Circle { center, .. } => center.len(),
            CurveComponent::Helix { center, .. } => center.len(),
            CurveComponent::Spline(s) => s.knots[0].len(),
        };
        let mut offsets = Vec::with_capacity(components.len());
        let mut acc = 0.0;
        for comp in &components {
            let (t0, t1) = comp.domain();
            if !(t1 > t0) {
                return Err(GeometryError::InvalidCurve("empty parameter interval".into()));
            }
            offsets.push(acc - t0);
            acc += t1 - t0;
        }
        Ok(Curve { components, offsets, n })
    }

    /// Union of lines through the origin in the given directions, each with
    /// parameter range `[-t_max, -gap] ∪ [gap, t_max]`. The gap around the
    /// common origin keeps the components free of mutual intersections.
    pub fn union_of_lines(directions: &[VecN], t_max: f64, gap: f64) -> Result<Self, GeometryError> {
        let mut comps = Vec::new();
        for d in directions {
            let dir = d
                .unit()
                .ok_or_else(|| GeometryError::InvalidCurve("zero line direction".into()))?;
            let origin = VecN::zeros(dir.len());
            if gap > 0.0 {
                comps.push(CurveComponent::Line { point: origin, dir, t0: -t_max, t1: -gap });
                comps.push(CurveComponent::Line { point: origin, dir, t0: gap, t1: t_max });
            } else {
                comps.push(CurveComponent::Line { point: origin, dir, t0: -t_max, t1: t_max });
            }
        }
        Curve::new(comps)
    }

    /// Full circle of the given radius centered at `center`, in the plane
    /// normal to `normal` (n = 3).
    pub fn circle(center: VecN, radius: f64, normal: VecN) -> Result<Self, GeometryError> {
        let n = center.len();
        if n != 3 {
            return Err(GeometryError::InvalidCurve("circle-by-normal requires n = 3".into()));
        }
        let nu = normal
            .unit()
            .ok_or_else(|| GeometryError::InvalidCurve("zero circle normal".into()))?;
        // any unit vector not parallel to nu seeds the in-plane frame
        let seed = if nu[0].abs() < 0.9 { VecN::basis(3, 0) } else { VecN::basis(3, 1) };
        let e1 = seed.sub(&nu.scale(seed.dot(&nu))).unit().unwrap();
        let e2 = VecN::from_slice(&[
            nu[1] * e1[2] - nu[2] * e1[1],
            nu[2] * e1[0] - nu[0] * e1[2],
            nu[0] * e1[1] - nu[1] * e1[0],
        ]);
        Curve::new(vec![CurveComponent::Circle {
            center,
            e1,
            e2,
            radius,
            t0: 0.0,
            t1: 2.0 * std::f64::consts::PI,
        }])
    }

    pub fn helix(
        center: VecN,
        radius: f64,
        pitch: f64,
        turns: f64,
    ) -> Result<Self, GeometryError> {
        if center.len() != 3 {
            return Err(GeometryError::InvalidCurve("helix requires n = 3".into()));
        }
        Curve::new(vec![CurveComponent::Helix {
            center,
            e1: VecN::basis(3, 0),
            e2: VecN::basis(3, 1),
            axis: VecN::basis(3, 2),
            radius,
            pitch,
            t0: 0.0,
            t1: 2.0 * std::f64::consts::PI * turns,
        }])
    }

    pub fn from_spline_knots(knots: Vec<VecN>) -> Result<Self, GeometryError> {
        Ok(Curve::new(vec![CurveComponent::Spline(CubicSpline::natural(knots)?)])?)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Total length of the parameter domain (sum over components).
    pub fn param_length(&self) -> f64 {
        self.components
            .iter()
            .map(|c| {
                let (a, b) = c.domain();
                b - a
            })
            .sum()
    }

    pub fn eval(&self, component: usize, t: f64) -> (VecN, VecN, VecN) {
        self.components[component].eval(t)
    }

    /// Map a global parameter back to (component, local t).
    pub fn locate_global(&self, global_t: f64) -> (usize, f64) {
        for (i, comp) in self.components.iter().enumerate() {
            let (t0, t1) = comp.domain();
            let hi = self.offsets[i] + t1;
            if global_t <= hi || i == self.components.len() - 1 {
                return (i, (global_t - self.offsets[i]).clamp(t0, t1));
            }
        }
        unreachable!()
    }

    pub fn global_of(&self, component: usize, t: f64) -> f64 {
        self.offsets[component] + t
    }

    /// `n_total` midpoint quadrature samples distributed over the components
    /// proportionally to parameter length.
    pub fn samples(&self, n_total: usize) -> Vec<CurveSample> {
        let total = self.param_length();
        let mut out = Vec::with_capacity(n_total);
        for (i, comp) in self.components.iter().enumerate() {
            let (t0, t1) = comp.domain();
            let span = t1 - t0;
            let count = ((n_total as f64) * span / total).round().max(1.0) as usize;
            let dt = span / count as f64;
            for j in 0..count {
                let t = t0 + (j as f64 + 0.5) * dt;
                out.push(CurveSample { component: i, t, global_t: self.global_of(i, t), weight: dt });
            }
        }
        out
    }

    /// Regularity and self-intersection checks on a coarse sample grid.
    pub fn validate(&self, samples_per_component: usize, tol: f64) -> Result<(), GeometryError> {
        let mut pts: Vec<(usize, f64, VecN)> = Vec::new();
        for (ci, comp) in self.components.iter().enumerate() {
            let (t0, t1) = comp.domain();
            for j in 0..samples_per_component {
                let t = t0 + (t1 - t0) * (j as f64 + 0.5) / samples_per_component as f64;
                let (pos, d1, _) = comp.eval(t);
                if d1.norm() <= tol {
                    return Err(GeometryError::InvalidCurve(format!(
                        "curve is not regular at component {ci}, t = {t}"
                    )));
                }
                pts.push((ci, t, pos));
            }
        }
        // pairwise separation for parameter-distant samples
        for (a, &(ci, ti, ref pi)) in pts.iter().enumerate() {
            let (t0, t1) = self.components[ci].domain();
            let res = 4.0 * (t1 - t0) / samples_per_component as f64;
            for &(cj, tj, ref pj) in pts.iter().skip(a + 1) {
                let same = ci == cj && (ti - tj).abs() < res;
                if !same && pi.sub(pj).norm() <= tol {
                    return Err(GeometryError::InvalidCurve(format!(
                        "self-intersection near components {ci},{cj} at t = {ti:.4},{tj:.4}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Tolerances and sampling controls for intersection finding and
/// classification.
#[derive(Clone, Copy, Debug)]
pub struct GeometryOpts {
    /// Dense samples per curve component for root bracketing.
    pub samples_per_component: usize,
    /// Hyperplane residual tolerance, relative to `|xi| * scale`.
    pub tol_plane: f64,
    /// Tangency threshold on `|gamma'(t) . xi_hat|`.
    pub tol_tangent: f64,
    /// Relative rank tolerance for genericity tests.
    pub tol_rank: f64,
    /// Hard cap on the number of intersections.
    pub max_intersections: usize,
    pub max_bisection_iters: usize,
}

impl Default for GeometryOpts {
    fn default() -> Self {
        GeometryOpts {
            samples_per_component: 4096,
            tol_plane: 1e-9,
            tol_tangent: 1e-6,
            tol_rank: 1e-10,
            max_intersections: 64,
            max_bisection_iters: 200,
        }
    }
}

/// A refined hyperplane–curve intersection.
#[derive(Clone, Copy, Debug)]
pub struct IntersectionPoint {
    pub component: usize,
    pub t: f64,
    pub global_t: f64,
    pub point: VecN,
    /// `gamma'(t) . xi_hat` (xi_hat the unit covector).
    pub transversality: f64,
    pub tangential: bool,
    /// `gamma''(t) . xi_hat`.
    pub curvature_pairing: f64,
}

/// All intersections of the hyperplane `{y : (y - x) . xi = 0}` with the
/// curve, found by dense sampling, sign-change bracketing and bisection;
/// tangencies (double roots) are recovered from roots of `g'` with `|g|`
/// below the plane tolerance.
pub fn hyperplane_intersections(
    curve: &Curve,
    x: &VecN,
    xi: &VecN,
    opts: &GeometryOpts,
) -> Result<Vec<IntersectionPoint>, GeometryError> {
    let xi_norm = xi.norm();
    assert!(xi_norm > 0.0, "covector must be nonzero");
    let xi_hat = xi.scale(1.0 / xi_norm);

    let mut roots: Vec<(usize, f64)> = Vec::new();
    for (ci, comp) in curve.components.iter().enumerate() {
        let (t0, t1) = comp.domain();
        let ns = opts.samples_per_component;
        let dt = (t1 - t0) / ns as f64;
        let g = |t: f64| comp.eval(t).0.sub(x).dot(&xi_hat);
        let dg = |t: f64| comp.eval(t).1.dot(&xi_hat);

        let mut scale: f64 = 0.0;
        let mut gs = Vec::with_capacity(ns + 1);
        for j in 0..=ns {
            let t = t0 + j as f64 * dt;
            let val = g(t);
            scale = scale.max(comp.eval(t).0.sub(x).norm());
            gs.push((t, val));
        }
        let plane_tol = opts.tol_plane * scale.max(1e-30);
        if gs.iter().all(|&(_, v)| v.abs() <= plane_tol) {
            return Err(GeometryError::ContainedComponent { component: ci });
        }

        let mut comp_roots: Vec<f64> = Vec::new();
        // simple roots: sign changes of g
        for w in gs.windows(2) {
            let (ta, va) = w[0];
            let (tb, vb) = w[1];
            if va == 0.0 {
                comp_roots.push(ta);
            } else if va * vb < 0.0 {
                comp_roots.push(bisect(&g, ta, tb, opts.max_bisection_iters));
            }
        }
        if gs.last().unwrap().1 == 0.0 {
            comp_roots.push(t1);
        }
        // double roots: sign changes of g' where g is at plane tolerance
        let mut prev = (t0, dg(t0));
        for j in 1..=ns {
            let t = t0 + j as f64 * dt;
            let d = dg(t);
            if prev.1 * d < 0.0 {
                let tc = bisect(&dg, prev.0, t, opts.max_bisection_iters);
                if g(tc).abs() <= plane_tol.max(opts.tol_plane * xi_norm) {
                    comp_roots.push(tc);
                }
            }
            prev = (t, d);
        }
        comp_roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        comp_roots.dedup_by(|a, b| (*a - *b).abs() < dt);
        for t in comp_roots {
            if g(t).abs() > plane_tol.max(1e-12 * scale) {
                return Err(GeometryError::RootRefinement(format!(
                    "residual {} above tolerance at component {ci}, t = {t}",
                    g(t).abs()
                )));
            }
            roots.push((ci, t));
        }
    }

    if roots.len() > opts.max_intersections {
        return Err(GeometryError::TooManyIntersections { cap: opts.max_intersections });
    }

    let mut out: Vec<IntersectionPoint> = roots
        .into_iter()
        .map(|(ci, t)| {
            let (pos, d1, d2) = curve.eval(ci, t);
            let trans = d1.dot(&xi_hat);
            IntersectionPoint {
                component: ci,
                t,
                global_t: curve.global_of(ci, t),
                point: pos,
                transversality: trans,
                tangential: trans.abs() < opts.tol_tangent,
                curvature_pairing: d2.dot(&xi_hat),
            }
        })
        .collect();
    out.sort_by(|a, b| a.global_t.partial_cmp(&b.global_t).unwrap());
    Ok(out)
}

fn bisect(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let mut fa = f(a);
    for _ in 0..iters {
        let mid = 0.5 * (a + b);
        if b - a <= f64::EPSILON * (1.0 + mid.abs()) {
            return mid;
        }
        let fm = f(mid);
        if fa * fm <= 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// Result of a genericity rank test on a collection of direction vectors.
#[derive(Clone, Debug)]
pub struct GenericityResult {
    /// Numerical rank of the (multiplicity-weighted) symmetric power matrix.
    pub rank: usize,
    pub is_generic: bool,
    /// Singular values, descending.
    pub singular_values: Vec<f64>,
    /// Dimension of the linear span of the input vectors.
    pub span_dim: usize,
}

/// Numerical rank of the matrix whose columns are the m-th symmetric powers
/// of the given vectors, in the multiplicity-weighted inner product.
///
/// When the vectors lie in a common hyperplane (span dimension `s <= d-1`),
/// genericity means rank equal to `C(s+m-1, m)` — the symmetric tensor
/// dimension of the spanned subspace, which is `L(d, m)` for a full
/// hyperplane. Otherwise genericity means full rank `min(k, D(d, m))`.
pub fn genericity_rank(vectors: &[VecN], m: usize, tol: f64) -> GenericityResult {
    assert!(!vectors.is_empty());
    let d = vectors[0].len();
    let k = vectors.len();
    let basis = SymBasis::get(d, m);
    let dim = basis.dim();

    let mut mat = DMatrix::<f64>::zeros(dim, k);
    let mut buf = vec![0.0; dim];
    for (j, v) in vectors.iter().enumerate() {
        sym_power_into(&basis, v.as_slice(), &mut buf);
        for i in 0..dim {
            mat[(i, j)] = basis.sqrt_mult[i] * buf[i];
        }
    }
    let sv = mat.singular_values();
    let mut singular_values: Vec<f64> = sv.iter().copied().collect();
    singular_values.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let smax = singular_values.first().copied().unwrap_or(0.0);
    let rank = singular_values.iter().filter(|&&s| s > tol * smax).count();

    // span of the raw vectors
    let mut vmat = DMatrix::<f64>::zeros(d, k);
    for (j, v) in vectors.iter().enumerate() {
        for i in 0..d {
            vmat[(i, j)] = v[i];
        }
    }
    let vsv = vmat.singular_values();
    let vmax = vsv.iter().cloned().fold(0.0_f64, f64::max);
    let span_dim = vsv.iter().filter(|&&s| s > tol * vmax).count();

    let target = if span_dim + 1 <= d {
        // vectors confined to a proper subspace: symmetric dimension there
        sym_dim(span_dim.max(1), m)
    } else {
        dim.min(k)
    };
    GenericityResult { rank, is_generic: rank == target && k >= target, singular_values, span_dim }
}

/// Sampling controls for [`kirillov_tuy_check`].
#[derive(Clone, Copy, Debug)]
pub struct KtSampling {
    pub hyperplanes: usize,
    pub points_per_hyperplane: usize,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct KtFailure {
    /// Unit normal of the failing hyperplane.
    pub normal: VecN,
    /// Plane offset along the normal.
    pub offset: f64,
    pub x: VecN,
    pub rank: usize,
    pub intersections: usize,
}

#[derive(Clone, Debug)]
pub struct KtReport {
    pub fraction_pass: f64,
    pub samples: usize,
    pub failures: Vec<KtFailure>,
}

/// Monte-Carlo verification of the Kirillov-Tuy condition of order `m` for a
/// ball: sample hyperplanes meeting the ball and points inside, and test
/// whether the directions to the curve intersections contain a generic
/// `L(n,m)`-subset.
pub fn kirillov_tuy_check(
    curve: &Curve,
    ball_center: &VecN,
    ball_radius: f64,
    m: usize,
    sampling: &KtSampling,
    opts: &GeometryOpts,
) -> KtReport {
    let n = curve.dim();
    let needed = tuy_rank(n, m);
    let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
    // pre-draw everything so the evaluation order cannot perturb the stream
    struct PlaneSample {
        nu: VecN,
        offset: f64,
        points: Vec<VecN>,
    }
    let mut planes = Vec::with_capacity(sampling.hyperplanes);
    for _ in 0..sampling.hyperplanes {
        let nu = random_unit(&mut rng, n);
        let c_proj = ball_center.dot(&nu);
        let offset = c_proj + ball_radius * rng.gen_range(-1.0..1.0);
        // orthonormal frame of nu^perp
        let frame = hyperplane_frame(&nu);
        let foot = nu.scale(offset).add(&ball_center.sub(&nu.scale(c_proj)));
        let disk_r2 = ball_radius * ball_radius - (offset - c_proj) * (offset - c_proj);
        let disk_r = disk_r2.max(0.0).sqrt();
        let mut points = Vec::with_capacity(sampling.points_per_hyperplane);
        for _ in 0..sampling.points_per_hyperplane {
            // uniform in the (n-1)-disk H ∩ B
            let u = random_ball(&mut rng, n - 1).scale(disk_r);
            let mut p = foot;
            for (i, e) in frame.iter().enumerate() {
                p = p.add(&e.scale(u[i]));
            }
            points.push(p);
        }
        planes.push(PlaneSample { nu, offset, points });
    }

    let mut passes = 0usize;
    let mut total = 0usize;
    let mut failures = Vec::new();
    for plane in &planes {
        let anchor = plane.nu.scale(plane.offset);
        let inters = match hyperplane_intersections(curve, &anchor, &plane.nu, opts) {
            Ok(v) => v,
            Err(_) => Vec::new(),
        };
        for x in &plane.points {
            total += 1;
            let dirs: Vec<VecN> = inters
                .iter()
                .filter_map(|ip| ip.point.sub(x).unit())
                .collect();
            if dirs.len() < needed {
                failures.push(KtFailure {
                    normal: plane.nu,
                    offset: plane.offset,
                    x: *x,
                    rank: 0,
                    intersections: dirs.len(),
                });
                continue;
            }
            let res = genericity_rank(&dirs, m, opts.tol_rank);
            if res.rank >= needed {
                passes += 1;
            } else {
                failures.push(KtFailure {
                    normal: plane.nu,
                    offset: plane.offset,
                    x: *x,
                    rank: res.rank,
                    intersections: dirs.len(),
                });
            }
        }
    }
    KtReport { fraction_pass: passes as f64 / total.max(1) as f64, samples: total, failures }
}

pub(crate) fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> VecN {
    loop {
        let mut v = VecN::zeros(n);
        for k in 0..n {
            v[k] = rng.sample::<f64, _>(rand_distr::StandardNormal);
        }
        if let Some(u) = v.unit() {
            return u;
        }
    }
}

fn random_ball(rng: &mut ChaCha8Rng, n: usize) -> VecN {
    assert!(n >= 1);
    let u = random_unit(rng, n);
    let r: f64 = rng.gen::<f64>().powf(1.0 / n as f64);
    u.scale(r)
}

/// Orthonormal basis of the hyperplane normal to `nu` (Gram-Schmidt on the
/// coordinate axes).
pub fn hyperplane_frame(nu: &VecN) -> Vec<VecN> {
    let n = nu.len();
    let mut frame: Vec<VecN> = Vec::with_capacity(n - 1);
    for k in 0..n {
        let mut v = VecN::basis(n, k);
        v = v.sub(&nu.scale(v.dot(nu)));
        for e in &frame {
            v = v.sub(&e.scale(v.dot(e)));
        }
        if let Some(u) = v.unit() {
            frame.push(u);
            if frame.len() == n - 1 {
                break;
            }
        }
    }
    frame
}

/// Classification of a covector against the transversal/tangential sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum CovectorClass {
    /// All intersections transversal and the direction set passes the
    /// independence and genericity requirements.
    InXiDelta,
    /// At least one tangential intersection, each with nonvanishing
    /// curvature pairing.
    InXiLambda,
    /// Tangency with degenerate curvature pairing, or transversal
    /// intersections failing the membership checks in a recoverable way.
    InXiOnly,
    Outside,
}

/// A classified covector `(x, xi)`.
#[derive(Clone, Debug)]
pub struct WavefrontElement {
    pub x: VecN,
    pub xi: VecN,
    pub cls: CovectorClass,
    /// `min_q |gamma'(t_q) . xi_hat|` over the intersections; infinite when
    /// the hyperplane misses the curve.
    pub sigma_distance: f64,
    pub n_intersections: usize,
    /// Every (n-1)-subset of the intersection directions is linearly
    /// independent.
    pub subsets_independent: bool,
    /// Some `L(n,m)`-subset of the directions has generic symmetric powers.
    pub generic: bool,
}

/// Classify `(x, xi)` against the covector sets for order `m`.
pub fn classify_covector(
    curve: &Curve,
    x: &VecN,
    xi: &VecN,
    m: usize,
    opts: &GeometryOpts,
) -> Result<WavefrontElement, GeometryError> {
    let n = curve.dim();
    let inters = hyperplane_intersections(curve, x, xi, opts)?;
    let sigma_distance = inters
        .iter()
        .map(|p| p.transversality.abs())
        .fold(f64::INFINITY, f64::min);

    if inters.is_empty() {
        return Ok(WavefrontElement {
            x: *x,
            xi: *xi,
            cls: CovectorClass::Outside,
            sigma_distance,
            n_intersections: 0,
            subsets_independent: false,
            generic: false,
        });
    }

    let dirs: Vec<VecN> = inters.iter().filter_map(|p| p.point.sub(x).unit()).collect();
    let needed = tuy_rank(n, m);
    let generic = dirs.len() >= needed && genericity_rank(&dirs, m, opts.tol_rank).rank >= needed;
    let subsets_independent =
        dirs.len() >= n - 1 && all_subsets_independent(&dirs, n - 1, opts.tol_rank);

    let tangential: Vec<&IntersectionPoint> = inters.iter().filter(|p| p.tangential).collect();
    let cls = if tangential.is_empty() {
        if generic && subsets_independent && dirs.len() >= needed {
            CovectorClass::InXiDelta
        } else {
            CovectorClass::Outside
        }
    } else if tangential.iter().all(|p| p.curvature_pairing.abs() > opts.tol_tangent) {
        CovectorClass::InXiLambda
    } else {
        CovectorClass::InXiOnly
    };

    Ok(WavefrontElement {
        x: *x,
        xi: *xi,
        cls,
        sigma_distance,
        n_intersections: inters.len(),
        subsets_independent,
        generic,
    })
}

fn all_subsets_independent(dirs: &[VecN], size: usize, tol: f64) -> bool {
    let k = dirs.len();
    if size == 0 || k < size {
        return size == 0;
    }
    let mut combo: Vec<usize> = (0..size).collect();
    loop {
        let d = dirs[0].len();
        let mut mat = DMatrix::<f64>::zeros(d, size);
        for (j, &c) in combo.iter().enumerate() {
            for i in 0..d {
                mat[(i, j)] = dirs[c][i];
            }
        }
        let sv = mat.singular_values();
        let smax = sv.iter().cloned().fold(0.0_f64, f64::max);
        let rank = sv.iter().filter(|&&s| s > tol * smax).count();
        if rank < size {
            return false;
        }
        // advance combination
        let mut i = size;
        loop {
            if i == 0 {
                return true;
            }
            i -= 1;
            if combo[i] != i + k - size {
                combo[i] += 1;
                for j in i + 1..size {
                    combo[j] = combo[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// One sample of the artifact flowout Lagrangian.
#[derive(Clone, Copy, Debug)]
pub struct FlowoutSample {
    /// Curve parameter of the tangential intersection.
    pub t: f64,
    pub component: usize,
    pub tilde_tau: f64,
    pub y: VecN,
    pub eta: VecN,
}

/// Flowout grid controls.
#[derive(Clone, Copy, Debug)]
pub struct FlowoutOpts {
    pub tilde_tau_min: f64,
    pub tilde_tau_max: f64,
    pub count: usize,
}

impl Default for FlowoutOpts {
    fn default() -> Self {
        FlowoutOpts { tilde_tau_min: 0.05, tilde_tau_max: 3.0, count: 64 }
    }
}

/// Predicted artifact locations for `(x, xi)`: for each tangential
/// intersection `gamma(t)`, the ray `y = gamma(t) + tilde_tau * theta` with
/// covector `eta = (tau / tilde_tau) xi`, where `theta` is the unit vector
/// from `gamma(t)` to `x` and `tau = |x - gamma(t)|`. Empty when every
/// intersection is transversal.
pub fn artifact_flowout(
    curve: &Curve,
    x: &VecN,
    xi: &VecN,
    opts: &GeometryOpts,
    flow: &FlowoutOpts,
) -> Result<Vec<FlowoutSample>, GeometryError> {
    let inters = hyperplane_intersections(curve, x, xi, opts)?;
    let mut out = Vec::new();
    for ip in inters.iter().filter(|p| p.tangential) {
        let sep = x.sub(&ip.point);
        let tau = sep.norm();
        let theta = match sep.unit() {
            Some(u) => u,
            None => continue,
        };
        for j in 0..flow.count {
            let tilde =
                flow.tilde_tau_min + (flow.tilde_tau_max - flow.tilde_tau_min) * j as f64 / (flow.count - 1).max(1) as f64;
            if tilde.abs() < 1e-12 {
                continue;
            }
            out.push(FlowoutSample {
                t: ip.t,
                component: ip.component,
                tilde_tau: tilde,
                y: ip.point.add(&theta.scale(tilde)),
                eta: xi.scale(tau / tilde),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_line_curve() -> Curve {
        let u = VecN::from_slice(&[1.0, 1.0, 0.0]);
        let w = VecN::from_slice(&[1.0, -1.0, 0.0]);
        Curve::union_of_lines(&[u, w], 4.0, 1e-3).unwrap()
    }

    #[test]
    fn two_line_intersections() {
        let curve = two_line_curve();
        let x = VecN::from_slice(&[1.0, 0.0, 0.0]);
        let xi = VecN::basis(3, 0);
        let pts = hyperplane_intersections(&curve, &x, &xi, &GeometryOpts::default()).unwrap();
        assert_eq!(pts.len(), 2);
        let mut found: Vec<Vec<f64>> = pts.iter().map(|p| p.point.as_slice().to_vec()).collect();
        found.sort_by(|a, b| a[1].partial_cmp(&b[1]).unwrap());
        for (p, expect) in found.iter().zip([[1.0, -1.0, 0.0], [1.0, 1.0, 0.0]]) {
            for (a, b) in p.iter().zip(expect) {
                assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
        }
        assert!(pts.iter().all(|p| !p.tangential));
        for p in &pts {
            assert!((p.transversality.abs() - 1.0 / 2.0_f64.sqrt()).abs() < 1e-9);
        }
    }

    #[test]
    fn missing_plane_is_empty() {
        let curve = two_line_curve();
        // lines live in the z = 0 plane; a high horizontal plane misses them
        let x = VecN::from_slice(&[0.0, 0.0, 5.0]);
        let xi = VecN::basis(3, 2);
        let pts = hyperplane_intersections(&curve, &x, &xi, &GeometryOpts::default()).unwrap();
        assert!(pts.is_empty());
    }

    #[test]
    fn circle_tangency_detected() {
        // circle radius 2 in the z=0 plane; engineered tangent plane at t=0
        let curve = Curve::circle(VecN::zeros(3), 2.0, VecN::basis(3, 2)).unwrap();
        let x = VecN::from_slice(&[0.25, 0.0, 0.3]);
        // xi = (a, 0, c) with a*R = a*x1 + c*x3  =>  tangency at gamma(0)
        let a = 1.0;
        let c = a * (2.0 - x[0]) / x[2];
        let xi = VecN::from_slice(&[a, 0.0, c]);
        let pts = hyperplane_intersections(&curve, &x, &xi, &GeometryOpts::default()).unwrap();
        assert_eq!(pts.len(), 1, "single tangential contact expected");
        assert!(pts[0].tangential);
        assert!((pts[0].point.as_slice()[0] - 2.0).abs() < 1e-6);
        assert!(pts[0].curvature_pairing.abs() > 0.1);
    }

    #[test]
    fn genericity_planar_m3() {
        // 4 pairwise-independent vectors in a plane, m = 3: rank 4 = L(3,3)
        let vecs: Vec<VecN> = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, -1.0]]
            .iter()
            .map(|v| VecN::from_slice(v))
            .collect();
        let res = genericity_rank(&vecs, 3, 1e-10);
        assert_eq!(res.rank, 4);
        assert!(res.is_generic);
        // embedded in a hyperplane of R^3 the rank target is the same
        let vecs3: Vec<VecN> = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0], [1.0, -1.0, 0.0]]
            .iter()
            .map(|v| VecN::from_slice(v))
            .collect();
        let res3 = genericity_rank(&vecs3, 3, 1e-10);
        assert_eq!(res3.rank, 4);
        assert!(res3.is_generic);
    }

    #[test]
    fn genericity_six_vectors_m2() {
        let vecs: Vec<VecN> = [
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [1.0, 1.0, 1.0],
            [1.0, 2.0, 3.0],
            [2.0, -1.0, 1.0],
        ]
        .iter()
        .map(|v| VecN::from_slice(v))
        .collect();
        let res = genericity_rank(&vecs, 2, 1e-10);
        assert_eq!(res.rank, 6);
        assert!(res.is_generic);
    }

    #[test]
    fn genericity_prime_counterexample() {
        let primes = [2.0, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0];
        let mut vecs = vec![
            VecN::from_slice(&[1.0, 0.0, 0.0, 0.0]),
            VecN::from_slice(&[0.0, 1.0, 0.0, 0.0]),
            VecN::from_slice(&[0.0, 0.0, 1.0, 0.0]),
        ];
        for p in primes {
            vecs.push(VecN::from_slice(&[1.0, p, p * p, 0.0]));
        }
        let res = genericity_rank(&vecs, 3, 1e-10);
        assert_eq!(res.rank, 8);
        assert!(!res.is_generic);
        // exact rank drop: wide singular value gap
        assert!(res.singular_values[7] / res.singular_values[8] > 1e6);
        // and any three of them ARE linearly independent
        assert!(all_subsets_independent(&vecs, 3, 1e-10));
    }

    #[test]
    fn genericity_scale_and_rotation_invariant() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let vecs: Vec<VecN> = (0..5)
            .map(|_| {
                VecN::from_slice(&[
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ])
            })
            .collect();
        let base = genericity_rank(&vecs, 2, 1e-10);
        let scaled: Vec<VecN> = vecs.iter().enumerate().map(|(i, v)| v.scale(1.0 + i as f64)).collect();
        assert_eq!(genericity_rank(&scaled, 2, 1e-10).rank, base.rank);
        // random rotation via QR of a Gaussian matrix
        let g = DMatrix::<f64>::from_fn(3, 3, |_, _| rng.gen_range(-1.0..1.0));
        let q = g.qr().q();
        let rotated: Vec<VecN> = vecs
            .iter()
            .map(|v| {
                let x = q.clone() * nalgebra::DVector::from_column_slice(v.as_slice());
                VecN::from_slice(x.as_slice())
            })
            .collect();
        assert_eq!(genericity_rank(&rotated, 2, 1e-10).rank, base.rank);
    }

    #[test]
    fn planar_genericity_equals_pairwise_independence() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for m in 1..=3usize {
            for _ in 0..50 {
                let vecs: Vec<VecN> = (0..=m)
                    .map(|_| VecN::from_slice(&[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]))
                    .collect();
                let pairwise = (0..vecs.len()).all(|i| {
                    (i + 1..vecs.len()).all(|j| {
                        (vecs[i][0] * vecs[j][1] - vecs[i][1] * vecs[j][0]).abs() > 1e-6
                    })
                });
                let generic = genericity_rank(&vecs, m, 1e-8).is_generic;
                assert_eq!(pairwise, generic, "m={m} vecs={vecs:?}");
                // forcing a dependent pair kills genericity
                let mut dep = vecs.clone();
                dep[m] = dep[0].scale(-2.5);
                assert!(!genericity_rank(&dep, m, 1e-8).is_generic);
            }
        }
    }

    #[test]
    fn kt_check_union_of_lines_passes() {
        // L(3,1) = 2 long lines satisfy Kirillov-Tuy of order 1 almost surely;
        // line extent must dominate the ball so near-parallel planes still hit
        let u = VecN::from_slice(&[1.0, 1.0, 0.0]);
        let w = VecN::from_slice(&[1.0, -1.0, 0.0]);
        let curve = Curve::union_of_lines(&[u, w], 500.0, 1e-3).unwrap();
        let report = kirillov_tuy_check(
            &curve,
            &VecN::zeros(3),
            0.6,
            1,
            &KtSampling { hyperplanes: 60, points_per_hyperplane: 5, seed: 7 },
            &GeometryOpts { samples_per_component: 2048, ..Default::default() },
        );
        assert!(report.fraction_pass >= 0.99, "fraction {}", report.fraction_pass);
    }

    #[test]
    fn kt_check_single_line_fails() {
        let curve =
            Curve::union_of_lines(&[VecN::from_slice(&[1.0, 1.0, 0.0])], 500.0, 1e-3).unwrap();
        let report = kirillov_tuy_check(
            &curve,
            &VecN::zeros(3),
            0.6,
            1,
            &KtSampling { hyperplanes: 40, points_per_hyperplane: 4, seed: 11 },
            &GeometryOpts { samples_per_component: 2048, ..Default::default() },
        );
        assert!(report.fraction_pass <= 0.05, "fraction {}", report.fraction_pass);
    }

    #[test]
    fn kt_check_circle_matches_dense_oracle() {
        let curve = Curve::circle(VecN::zeros(3), 2.0, VecN::basis(3, 2)).unwrap();
        let opts = GeometryOpts { samples_per_component: 1024, ..Default::default() };
        // dense oracle on fixed hyperplanes: a plane meets the circle in
        // <= 2 points; order 1 needs exactly 2 independent directions
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut oracle_pass = 0usize;
        let mut checked = 0usize;
        for _ in 0..10 {
            let nu = random_unit(&mut rng, 3);
            let offset = rng.gen_range(-0.5..0.5);
            let anchor = nu.scale(offset);
            let inters = hyperplane_intersections(&curve, &anchor, &nu, &opts).unwrap();
            // dense count oracle: sign changes of g over 20000 samples
            let mut count = 0;
            let mut prev: Option<f64> = None;
            for j in 0..=20000 {
                let t = 2.0 * std::f64::consts::PI * j as f64 / 20000.0;
                let g = curve.eval(0, t).0.sub(&anchor).dot(&nu);
                if let Some(p) = prev {
                    if p * g < 0.0 {
                        count += 1;
                    }
                }
                prev = Some(g);
            }
            assert_eq!(
                inters.iter().filter(|p| !p.tangential).count(),
                count,
                "transversal intersection count disagrees with dense oracle"
            );
            checked += 1;
            if count == 2 {
                oracle_pass += 1;
            }
        }
        assert!(checked == 10 && oracle_pass > 0);
    }

    #[test]
    fn classify_two_line_delta() {
        let curve = two_line_curve();
        let x = VecN::from_slice(&[1.0, 0.3, 0.2]);
        let xi = VecN::basis(3, 0);
        let wf = classify_covector(&curve, &x, &xi, 1, &GeometryOpts::default()).unwrap();
        assert_eq!(wf.cls, CovectorClass::InXiDelta);
        assert!(wf.subsets_independent);
        assert!(wf.generic);
        assert_eq!(wf.n_intersections, 2);
    }

    #[test]
    fn classify_circle_tangency_lambda() {
        let curve = Curve::circle(VecN::zeros(3), 2.0, VecN::basis(3, 2)).unwrap();
        let x = VecN::from_slice(&[0.25, 0.0, 0.3]);
        let c = (2.0 - x[0]) / x[2];
        let xi = VecN::from_slice(&[1.0, 0.0, c]);
        let wf = classify_covector(&curve, &x, &xi, 1, &GeometryOpts::default()).unwrap();
        assert_eq!(wf.cls, CovectorClass::InXiLambda);
        assert!(wf.sigma_distance < 1e-6);
    }

    #[test]
    fn classify_missing_plane_outside() {
        let curve = two_line_curve();
        let x = VecN::from_slice(&[0.0, 0.0, 5.0]);
        let xi = VecN::basis(3, 2);
        let wf = classify_covector(&curve, &x, &xi, 1, &GeometryOpts::default()).unwrap();
        assert_eq!(wf.cls, CovectorClass::Outside);
        assert!(wf.sigma_distance.is_infinite());
    }

    #[test]
    fn classification_is_scale_invariant() {
        let curve = two_line_curve();
        let opts = GeometryOpts::default();
        let x = VecN::from_slice(&[1.0, 0.3, 0.2]);
        for xi in [
            VecN::basis(3, 0),
            VecN::from_slice(&[0.3, 1.0, 0.4]),
            VecN::from_slice(&[-0.2, 0.5, 1.0]),
        ] {
            let a = classify_covector(&curve, &x, &xi, 1, &opts).unwrap();
            let b = classify_covector(&curve, &x, &xi.scale(3.7), &opts).unwrap();
            assert_eq!(a.cls, b.cls);
            assert!((a.sigma_distance - b.sigma_distance).abs() < 1e-9);
        }
    }

    #[test]
    fn delta_lambda_mutually_exclusive() {
        // classification never reports Delta when a tangency exists and
        // never Lambda when all intersections are transversal, by a sweep
        let curve = Curve::circle(VecN::zeros(3), 2.0, VecN::basis(3, 2)).unwrap();
        let x = VecN::from_slice(&[0.25, 0.0, 0.3]);
        let opts = GeometryOpts::default();
        for j in 0..40 {
            let c = 0.2 + 0.3 * j as f64;
            let xi = VecN::from_slice(&[1.0, 0.1, c]);
            if let Ok(wf) = classify_covector(&curve, &x, &xi, 1, &opts) {
                let inters = hyperplane_intersections(&curve, &x, &xi, &opts).unwrap();
                let has_tangent = inters.iter().any(|p| p.tangential);
                match wf.cls {
                    CovectorClass::InXiDelta => assert!(!has_tangent),
                    CovectorClass::InXiLambda => assert!(has_tangent),
                    _ => {}
                }
            }
        }
    }

    #[test]
    fn flowout_empty_without_tangency() {
        let curve = two_line_curve();
        let x = VecN::from_slice(&[1.0, 0.3, 0.2]);
        let xi = VecN::basis(3, 0);
        let fl = artifact_flowout(&curve, &x, &xi, &GeometryOpts::default(), &FlowoutOpts::default())
            .unwrap();
        assert!(fl.is_empty());
    }

    #[test]
    fn flowout_circle_samples() {
        let curve = Curve::circle(VecN::zeros(3), 2.0, VecN::basis(3, 2)).unwrap();
        let x = VecN::from_slice(&[0.25, 0.0, 0.3]);
        let c = (2.0 - x[0]) / x[2];
        let xi = VecN::from_slice(&[1.0, 0.0, c]);
        let tau = x.sub(&VecN::from_slice(&[2.0, 0.0, 0.0])).norm();
        let flow = FlowoutOpts { tilde_tau_min: tau, tilde_tau_max: 2.0 * tau, count: 2 };
        let fl = artifact_flowout(&curve, &x, &xi, &GeometryOpts::default(), &flow).unwrap();
        assert_eq!(fl.len(), 2);
        // tilde_tau = tau reproduces (x, xi) itself
        assert!(fl[0].y.sub(&x).norm() < 1e-6);
        assert!(fl[0].eta.sub(&xi).norm() < 1e-6);
        // tilde_tau = 2 tau halves the covector and stays on the ray
        assert!(fl[1].eta.sub(&xi.scale(0.5)).norm() < 1e-6);
        let gamma0 = VecN::from_slice(&[2.0, 0.0, 0.0]);
        let d1 = fl[1].y.sub(&gamma0).unit().unwrap();
        let d2 = x.sub(&gamma0).unit().unwrap();
        assert!(d1.sub(&d2).norm() < 1e-6, "flowout point leaves the tangent ray");
        // the tangency condition itself: gamma'(t) . xi = 0 at the root
        let (_, d1c, _) = curve.eval(0, fl[0].t);
        assert!(d1c.dot(&xi).abs() / xi.norm() < 1e-5);
    }

    #[test]
    fn spline_curve_evaluates_smoothly() {
        let knots: Vec<VecN> = (0..8)
            .map(|i| {
                let t = i as f64 / 7.0 * std::f64::consts::PI;
                VecN::from_slice(&[2.0 * t.cos(), 2.0 * t.sin(), 0.3 * t])
            })
            .collect();
        let curve = Curve::from_spline_knots(knots.clone()).unwrap();
        // interpolates the knots
        for (i, k) in knots.iter().enumerate() {
            let (p, _, _) = curve.eval(0, i as f64);
            assert!(p.sub(k).norm() < 1e-9);
        }
        curve.validate(128, 1e-9).unwrap();
        // derivative consistent with finite differences
        let (p0, d1, _) = curve.eval(0, 3.3);
        let (p1, _, _) = curve.eval(0, 3.3 + 1e-6);
        let fd = p1.sub(&p0).scale(1e6);
        assert!(fd.sub(&d1).norm() < 1e-4);
    }

    #[test]
    fn validate_rejects_self_intersection() {
        // two crossing lines with no gap share the origin
        let u = VecN::from_slice(&[1.0, 1.0, 0.0]);
        let w = VecN::from_slice(&[1.0, -1.0, 0.0]);
        let curve = Curve::union_of_lines(&[u, w], 4.0, 0.0).unwrap();
        assert!(curve.validate(256, 1e-6).is_err());
        // with the origin gap the union validates
        let gapped = Curve::union_of_lines(&[u, w], 4.0, 0.05).unwrap();
        gapped.validate(256, 1e-6).unwrap();
    }
}
