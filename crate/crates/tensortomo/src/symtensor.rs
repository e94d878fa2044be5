//! Algebra of symmetric m-tensors on R^n stored by distinct components.
//!
//! A symmetric tensor is determined by one value per multiset of indices,
//! encoded here as the exponent vector `alpha` of the multiset (`alpha[k]` =
//! number of occurrences of coordinate `k`, `|alpha| = m`). The basis is
//! enumerated in strict lexicographic *descending* order on `alpha`, which is
//! the fixed component ordering used everywhere in this crate, including the
//! binary file formats and symbol matrices.
//!
//! The fiber inner product carries the multinomial multiplicities
//! `m!/alpha!`, so that it equals the full-tensor inner product and the
//! symmetric-product/contraction adjointness
//! `inner(xi ⊙ v, u) = inner(v, contract(u, xi))` holds with constant
//! exactly 1. Symmetric products are symmetrization *averages* (`1/m!` times
//! the sum over permutations), so `v ⊙ v ⊙ … ⊙ v = sym_power(v, m)`.

use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// Exponent vector of an index multiset: `alpha[k]` counts occurrences of
/// coordinate direction `k`; the tensor order is `|alpha| = sum(alpha)`.
pub type MultiIndex = Vec<u32>;

/// Number of distinct components of a symmetric m-tensor on R^n,
/// `D(n, m) = C(n+m-1, m)`.
pub fn sym_dim(n: usize, m: usize) -> usize {
    binomial(n + m - 1, m)
}

/// Dimension of symmetric m-tensors on a hyperplane of R^n,
/// `L(n, m) = C(n+m-2, m)`; the number of generic directions required by the
/// Kirillov-Tuy condition of order m.
pub fn tuy_rank(n: usize, m: usize) -> usize {
    if n == 1 {
        return if m == 0 { 1 } else { 0 };
    }
    binomial(n + m - 2, m)
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

fn factorial(k: u32) -> f64 {
    (1..=k as u64).map(|v| v as f64).product()
}

/// Enumerated multi-index basis for symmetric m-tensors on R^n, with
/// multiplicities and index-shift tables. Cached per `(n, m)`.
pub struct SymBasis {
    pub n: usize,
    pub m: usize,
    /// Exponent vectors in lexicographic descending order.
    pub indices: Vec<MultiIndex>,
    /// `m!/alpha!` per basis entry.
    pub mult: Vec<f64>,
    /// `sqrt(m!/alpha!)` per basis entry.
    pub sqrt_mult: Vec<f64>,
    position: HashMap<MultiIndex, usize>,
    /// `lower[i][k]` = position of `alpha - e_k` in the order-(m-1) basis,
    /// or `usize::MAX` when `alpha[k] = 0`.
    lower: Vec<Vec<usize>>,
}

impl SymBasis {
    /// The cached basis for `(n, m)`.
    pub fn get(n: usize, m: usize) -> Arc<SymBasis> {
        static CACHE: Lazy<Mutex<HashMap<(usize, usize), Arc<SymBasis>>>> =
            Lazy::new(|| Mutex::new(HashMap::new()));
        let mut cache = CACHE.lock().unwrap();
        cache
            .entry((n, m))
            .or_insert_with(|| Arc::new(SymBasis::build(n, m)))
            .clone()
    }

    fn build(n: usize, m: usize) -> SymBasis {
        assert!(n >= 1, "dimension must be at least 1");
        let indices = enumerate_multi_indices(n, m);
        let mult: Vec<f64> = indices
            .iter()
            .map(|a| {
                let denom: f64 = a.iter().map(|&e| factorial(e)).product();
                factorial(m as u32) / denom
            })
            .collect();
        let sqrt_mult = mult.iter().map(|&w| w.sqrt()).collect();
        let position: HashMap<MultiIndex, usize> = indices
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, a)| (a, i))
            .collect();
        let lower = if m == 0 {
            vec![vec![usize::MAX; n]; 1]
        } else {
            let below = enumerate_multi_indices(n, m - 1);
            let below_pos: HashMap<&MultiIndex, usize> =
                below.iter().enumerate().map(|(i, a)| (a, i)).collect();
            indices
                .iter()
                .map(|a| {
                    (0..n)
                        .map(|k| {
                            if a[k] == 0 {
                                usize::MAX
                            } else {
                                let mut b = a.clone();
                                b[k] -= 1;
                                below_pos[&b]
                            }
                        })
                        .collect()
                })
                .collect()
        };
        SymBasis { n, m, indices, mult, sqrt_mult, position, lower }
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    /// Flat index of the exponent vector `alpha`.
    pub fn position(&self, alpha: &[u32]) -> Option<usize> {
        self.position.get(alpha).copied()
    }

    /// Position of `alpha - e_k` in the order-(m-1) basis.
    pub fn lower(&self, i: usize, k: usize) -> Option<usize> {
        match self.lower[i][k] {
            usize::MAX => None,
            p => Some(p),
        }
    }
}

/// All exponent vectors with `|alpha| = m` on n letters, lexicographically
/// descending. This is the component ordering contract for the whole crate.
pub fn enumerate_multi_indices(n: usize, m: usize) -> Vec<MultiIndex> {
    let mut out = Vec::with_capacity(sym_dim(n, m));
    let mut cur = vec![0u32; n];
    fn rec(k: usize, rem: u32, n: usize, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if k == n - 1 {
            cur[k] = rem;
            out.push(cur.clone());
            return;
        }
        for a in (0..=rem).rev() {
            cur[k] = a;
            rec(k + 1, rem - a, n, cur, out);
        }
    }
    rec(0, m as u32, n, &mut cur, &mut out);
    out
}

/// A symmetric m-tensor on R^n stored as its distinct components in the
/// [`SymBasis`] ordering.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTensor {
    pub n: usize,
    pub m: usize,
    pub coeffs: Vec<f64>,
}

impl SymTensor {
    pub fn zeros(n: usize, m: usize) -> Self {
        SymTensor { n, m, coeffs: vec![0.0; sym_dim(n, m)] }
    }

    pub fn from_coeffs(n: usize, m: usize, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), sym_dim(n, m), "coefficient length mismatch");
        SymTensor { n, m, coeffs }
    }

    /// Order-1 tensor with components `v`.
    pub fn make_order1(v: &[f64]) -> Self {
        SymTensor { n: v.len(), m: 1, coeffs: v.to_vec() }
    }

    /// m-th symmetric power `v^{⊙m}`: component at `alpha` is
    /// `prod_k v_k^{alpha_k}`.
    pub fn sym_power(v: &[f64], m: usize) -> Self {
        let n = v.len();
        let basis = SymBasis::get(n, m);
        let mut coeffs = vec![0.0; basis.dim()];
        sym_power_into(&basis, v, &mut coeffs);
        SymTensor { n, m, coeffs }
    }

    /// Evaluation `f(v) = <f, v^{⊙m}>` (multiplicity-weighted).
    pub fn evaluate(&self, v: &[f64]) -> f64 {
        assert_eq!(v.len(), self.n);
        let basis = SymBasis::get(self.n, self.m);
        let mut acc = 0.0;
        for (i, alpha) in basis.indices.iter().enumerate() {
            let mut p = basis.mult[i] * self.coeffs[i];
            if p == 0.0 {
                continue;
            }
            for k in 0..self.n {
                p *= powi(v[k], alpha[k]);
            }
            acc += p;
        }
        acc
    }

    /// Contraction `(i_xi f)_{beta} = sum_k xi_k f_{beta + e_k}`, order m-1.
    pub fn contract(&self, xi: &[f64]) -> SymTensor {
        assert!(self.m >= 1, "contract requires order >= 1");
        assert_eq!(xi.len(), self.n);
        let basis = SymBasis::get(self.n, self.m);
        let mut out = SymTensor::zeros(self.n, self.m - 1);
        for (i, _) in basis.indices.iter().enumerate() {
            let c = self.coeffs[i];
            if c == 0.0 {
                continue;
            }
            for k in 0..self.n {
                if let Some(j) = basis.lower(i, k) {
                    out.coeffs[j] += xi[k] * c;
                }
            }
        }
        out
    }
}

#[inline]
fn powi(x: f64, e: u32) -> f64 {
    let mut p = 1.0;
    for _ in 0..e {
        p *= x;
    }
    p
}

/// `sym_power` writing into a caller-provided buffer (hot-path variant).
pub fn sym_power_into(basis: &SymBasis, v: &[f64], out: &mut [f64]) {
    debug_assert_eq!(v.len(), basis.n);
    debug_assert_eq!(out.len(), basis.dim());
    for (i, alpha) in basis.indices.iter().enumerate() {
        let mut p = 1.0;
        for k in 0..basis.n {
            p *= powi(v[k], alpha[k]);
        }
        out[i] = p;
    }
}

/// Multiplicity-weighted fiber inner product
/// `<f, g> = sum_alpha (m!/alpha!) f_alpha g_alpha`.
pub fn inner(f: &SymTensor, g: &SymTensor) -> f64 {
    assert_eq!((f.n, f.m), (g.n, g.m), "inner: shape mismatch");
    let basis = SymBasis::get(f.n, f.m);
    let mut acc = 0.0;
    for i in 0..basis.dim() {
        acc += basis.mult[i] * f.coeffs[i] * g.coeffs[i];
    }
    acc
}

/// Symmetric product of tensors of orders a and b: the symmetrization
/// average of `f ⊗ g` in distinct components,
/// `(f⊙g)_gamma = a!b!/(a+b)! * sum_{alpha<=gamma} prod_k C(gamma_k, alpha_k)
///  f_alpha g_{gamma-alpha}`.
pub fn sym_product(f: &SymTensor, g: &SymTensor) -> SymTensor {
    assert_eq!(f.n, g.n, "sym_product: dimension mismatch");
    let n = f.n;
    let (a, b) = (f.m, g.m);
    let basis_f = SymBasis::get(n, a);
    let basis_g = SymBasis::get(n, b);
    let basis_out = SymBasis::get(n, a + b);
    let norm = factorial(a as u32) * factorial(b as u32) / factorial((a + b) as u32);
    let mut out = SymTensor::zeros(n, a + b);
    for (i, gamma) in basis_out.indices.iter().enumerate() {
        let mut acc = 0.0;
        'alpha: for (ia, alpha) in basis_f.indices.iter().enumerate() {
            let fa = f.coeffs[ia];
            if fa == 0.0 {
                continue;
            }
            let mut beta = vec![0u32; n];
            let mut weight = 1.0;
            for k in 0..n {
                if alpha[k] > gamma[k] {
                    continue 'alpha;
                }
                beta[k] = gamma[k] - alpha[k];
                weight *= binomial(gamma[k] as usize, alpha[k] as usize) as f64;
            }
            let ib = basis_g.position(&beta).expect("complement index in basis");
            acc += weight * fa * g.coeffs[ib];
        }
        out.coeffs[i] = norm * acc;
    }
    out
}
