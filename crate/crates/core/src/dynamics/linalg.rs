//! Dense complex kernels on split real/imaginary storage.
//!
//! nalgebra only routes real `f64` products through a blocked GEMM, so large
//! complex products are done as four real ones.

use nalgebra::{DMatrix, DVector};

use crate::hilbert::C64;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SplitMatrix {
    re: DMatrix<f64>,
    im: DMatrix<f64>,
}

impl SplitMatrix {
    pub fn from_complex(m: &DMatrix<C64>) -> Self {
        Self { re: m.map(|z| z.re), im: m.map(|z| z.im) }
    }

    pub fn identity(n: usize) -> Self {
        Self { re: DMatrix::identity(n, n), im: DMatrix::zeros(n, n) }
    }

    pub fn to_complex(&self) -> DMatrix<C64> {
        self.re.zip_map(&self.im, C64::new)
    }

    pub fn mul(&self, rhs: &SplitMatrix) -> SplitMatrix {
        let re = &self.re * &rhs.re - &self.im * &rhs.im;
        let im = &self.re * &rhs.im + &self.im * &rhs.re;
        SplitMatrix { re, im }
    }

    pub fn scale(&self, z: C64) -> SplitMatrix {
        SplitMatrix {
            re: &self.re * z.re - &self.im * z.im,
            im: &self.re * z.im + &self.im * z.re,
        }
    }

    pub fn add_identity(mut self) -> SplitMatrix {
        for i in 0..self.re.nrows().min(self.re.ncols()) {
            self.re[(i, i)] += 1.0;
        }
        self
    }

    pub fn mul_vec(&self, v: &DVector<C64>) -> DVector<C64> {
        let vr = v.map(|z| z.re);
        let vi = v.map(|z| z.im);
        let re = &self.re * &vr - &self.im * &vi;
        let im = &self.re * &vi + &self.im * &vr;
        re.zip_map(&im, C64::new)
    }

    /// `Aⁿ` by repeated squaring.
    pub fn pow(&self, mut n: u64) -> SplitMatrix {
        let mut result = SplitMatrix::identity(self.re.nrows());
        let mut base = self.clone();
        let mut first = true;
        while n > 0 {
            if n & 1 == 1 {
                result = if first { base.clone() } else { result.mul(&base) };
                first = false;
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    pub fn norm1(&self) -> f64 {
        (0..self.re.ncols())
            .map(|c| (0..self.re.nrows()).map(|r| self.re[(r, c)].hypot(self.im[(r, c)])).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Matrix exponential `e^A` by scaling and squaring around a Taylor series.
pub(crate) fn expm(a: &DMatrix<C64>) -> DMatrix<C64> {
    let n = a.nrows();
    let a = SplitMatrix::from_complex(a);
    let norm = a.norm1();
    let squarings = if norm > 0.25 { (norm / 0.25).log2().ceil() as u32 } else { 0 };
    let scaled = a.scale(C64::new(0.5f64.powi(squarings as i32), 0.0));
    // Horner form of Σ Xᵏ/k! up to k = 18; truncation < 0.25¹⁹/19! ≈ 1e-29
    let mut acc = SplitMatrix::identity(n);
    for k in (1..=18).rev() {
        acc = scaled.mul(&acc).scale(C64::new(1.0 / k as f64, 0.0)).add_identity();
    }
    for _ in 0..squarings {
        acc = acc.mul(&acc);
    }
    acc.to_complex()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rand_matrix(n: usize, seed: u64) -> DMatrix<C64> {
        // Small LCG keeps the test free of extra dependencies.
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        DMatrix::from_fn(n, n, |_, _| C64::new(next(), next()))
    }

    #[test]
    fn split_product_matches_complex_product() {
        let a = rand_matrix(7, 1);
        let b = rand_matrix(7, 2);
        let want = &a * &b;
        let got = SplitMatrix::from_complex(&a).mul(&SplitMatrix::from_complex(&b)).to_complex();
        assert!((want - got).camax() < 1e-14);
    }

    #[test]
    fn power_matches_repeated_product() {
        let a = rand_matrix(5, 3) * C64::new(0.5, 0.0);
        let mut want = DMatrix::<C64>::identity(5, 5);
        for _ in 0..13 {
            want = &want * &a;
        }
        let got = SplitMatrix::from_complex(&a).pow(13).to_complex();
        assert!((want - got).camax() < 1e-13);
        assert_eq!(SplitMatrix::from_complex(&a).pow(0), SplitMatrix::identity(5));
    }

    #[test]
    fn expm_of_rotation_generator() {
        // exp(-iθσx) = cos θ − i sin θ σx
        let theta = 2.7;
        let gen = DMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(0.0, -theta), C64::new(0.0, -theta), C64::new(0.0, 0.0)]);
        let u = expm(&gen);
        assert_relative_eq!(u[(0, 0)].re, theta.cos(), epsilon = 1e-14);
        assert_relative_eq!(u[(0, 1)].im, -theta.sin(), epsilon = 1e-14);
        assert!(u[(0, 0)].im.abs() < 1e-14);
    }

    #[test]
    fn expm_of_diagonal_decay() {
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![C64::new(-30.0, 4.0), C64::new(0.3, -1.0)]));
        let u = expm(&d);
        let want0 = C64::new(-30.0, 4.0).exp();
        assert!((u[(0, 0)] - want0).norm() < 1e-25);
        assert!((u[(1, 1)] - C64::new(0.3, -1.0).exp()).norm() < 1e-13);
    }
}
