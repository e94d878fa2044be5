//! Small fixed-capacity vector for points and covectors in R^n, n <= 8.
//!
//! Geometric code in this crate is dimension-generic at runtime; `VecN` keeps
//! the hot loops allocation-free.

/// Maximum spatial dimension supported by the geometric modules.
pub const MAX_DIM: usize = 8;

/// A point, direction or covector in R^n with n <= [`MAX_DIM`].
#[derive(Clone, Copy, PartialEq)]
pub struct VecN {
    len: usize,
    data: [f64; MAX_DIM],
}

impl VecN {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1 && n <= MAX_DIM, "dimension {n} out of range 1..={MAX_DIM}");
        VecN { len: n, data: [0.0; MAX_DIM] }
    }

    pub fn from_slice(v: &[f64]) -> Self {
        let mut out = Self::zeros(v.len());
        out.data[..v.len()].copy_from_slice(v);
        out
    }

    /// Standard basis vector e_k in R^n.
    pub fn basis(n: usize, k: usize) -> Self {
        let mut out = Self::zeros(n);
        out.data[k] = 1.0;
        out
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data[..self.len]
    }

    #[inline]
    pub fn dot(&self, other: &VecN) -> f64 {
        debug_assert_eq!(self.len, other.len);
        let mut s = 0.0;
        for k in 0..self.len {
            s += self.data[k] * other.data[k];
        }
        s
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    #[inline]
    pub fn add(&self, other: &VecN) -> VecN {
        debug_assert_eq!(self.len, other.len);
        let mut out = *self;
        for k in 0..self.len {
            out.data[k] += other.data[k];
        }
        out
    }

    #[inline]
    pub fn sub(&self, other: &VecN) -> VecN {
        debug_assert_eq!(self.len, other.len);
        let mut out = *self;
        for k in 0..self.len {
            out.data[k] -= other.data[k];
        }
        out
    }

    #[inline]
    pub fn scale(&self, c: f64) -> VecN {
        let mut out = *self;
        for k in 0..self.len {
            out.data[k] *= c;
        }
        out
    }

    /// Unit vector in the same direction; `None` for (numerically) zero input.
    pub fn unit(&self) -> Option<VecN> {
        let r = self.norm();
        if r <= f64::EPSILON * (self.len as f64) {
            None
        } else {
            Some(self.scale(1.0 / r))
        }
    }
}

impl std::ops::Index<usize> for VecN {
    type Output = f64;
    #[inline]
    fn index(&self, i: usize) -> &f64 {
        &self.data[..self.len][i]
    }
}

impl std::ops::IndexMut<usize> for VecN {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.data[..self.len][i]
    }
}

impl std::fmt::Debug for VecN {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "VecN{:?}", self.as_slice())
    }
}

impl From<[f64; 2]> for VecN {
    fn from(v: [f64; 2]) -> Self {
        Self::from_slice(&v)
    }
}

impl From<[f64; 3]> for VecN {
    fn from(v: [f64; 3]) -> Self {
        Self::from_slice(&v)
    }
}

impl From<[f64; 4]> for VecN {
    fn from(v: [f64; 4]) -> Self {
        Self::from_slice(&v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        let a = VecN::from_slice(&[1.0, 2.0, 3.0]);
        let b = VecN::from_slice(&[-1.0, 0.5, 2.0]);
        assert_eq!(a.dot(&b), -1.0 + 1.0 + 6.0);
        assert_eq!(a.add(&b).as_slice(), &[0.0, 2.5, 5.0]);
        assert_eq!(a.sub(&b).as_slice(), &[2.0, 1.5, 1.0]);
        assert_eq!(a.scale(2.0).as_slice(), &[2.0, 4.0, 6.0]);
        let u = a.unit().unwrap();
        assert!((u.norm() - 1.0).abs() < 1e-15);
        assert!(VecN::zeros(3).unit().is_none());
    }
}
