//! Small dense complex linear algebra: Pauli operators, 2x2 eigendecomposition
//! and matrix exponentials.

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Matrix2 = SMatrix<C64, 2, 2>;
pub type Matrix4 = SMatrix<C64, 4, 4>;
pub type State2 = SVector<C64, 2>;
pub type State4 = SVector<C64, 4>;

/// Eigenvector condition number above which the eigendecomposition route is
/// abandoned in favour of the series evaluation.
pub const CONDITION_LIMIT: f64 = 1e12;

pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn identity2() -> Matrix2 {
    Matrix2::identity()
}

pub fn sigma_x() -> Matrix2 {
    Matrix2::new(re(0.0), re(1.0), re(1.0), re(0.0))
}

pub fn sigma_y() -> Matrix2 {
    Matrix2::new(re(0.0), -I, I, re(0.0))
}

pub fn sigma_z() -> Matrix2 {
    Matrix2::new(re(1.0), re(0.0), re(0.0), re(-1.0))
}

pub fn ket0() -> State2 {
    State2::new(re(1.0), re(0.0))
}

pub fn ket1() -> State2 {
    State2::new(re(0.0), re(1.0))
}

/// Largest entry modulus of `m - m†`.
pub fn hermiticity_defect<const D: usize>(m: &SMatrix<C64, D, D>) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs<const R: usize, const K: usize>(m: &SMatrix<C64, R, K>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigenvalues and unit-norm right eigenvectors (as columns) of a general
/// complex 2x2 matrix, together with the 2-norm condition number of the
/// eigenvector matrix.
#[derive(Debug, Clone, Copy)]
pub struct Eigen2 {
    pub values: [C64; 2],
    pub vectors: Matrix2,
    pub condition: f64,
}

pub fn eig2(m: &Matrix2) -> Eigen2 {
    let (p, q, r, s) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let mean = (p + s) * 0.5;
    let half_gap = (p - s) * 0.5;
    let root = (half_gap * half_gap + q * r).sqrt();
    let values = [mean + root, mean - root];

    let scale = max_abs(m).max(f64::MIN_POSITIVE);
    let mut vectors = Matrix2::zeros();
    for (k, mu) in values.iter().enumerate() {
        // Two candidate null vectors of (m - mu); take the better conditioned one.
        let a = State2::new(q, mu - p);
        let b = State2::new(mu - s, r);
        let v = if a.norm() >= b.norm() { a } else { b };
        let v = if v.norm() <= 1e-14 * scale {
            // m is (numerically) scalar: any basis diagonalises it.
            if k == 0 {
                ket0()
            } else {
                ket1()
            }
        } else {
            v / re(v.norm())
        };
        vectors.set_column(k, &v);
    }

    let det = vectors.determinant().norm();
    let gram = vectors.adjoint() * vectors;
    let tr = (gram[(0, 0)] + gram[(1, 1)]).re;
    let gdet = gram.determinant().re.max(0.0);
    let lmax = 0.5 * (tr + (tr * tr - 4.0 * gdet).max(0.0).sqrt());
    let condition = if det > 0.0 { lmax / det } else { f64::INFINITY };

    Eigen2 {
        values,
        vectors,
        condition,
    }
}

/// How a propagator was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpmMethod {
    Eigen,
    /// Used when the generator is numerically defective (exceptional point).
    Series,
}

#[derive(Debug, Clone, Copy)]
pub struct Propagator2 {
    pub matrix: Matrix2,
    pub method: ExpmMethod,
    pub condition: f64,
}

/// `exp(-i h t)` for an arbitrary (possibly non-Hermitian) 2x2 generator.
pub fn propagator2(h: &Matrix2, t: f64) -> Propagator2 {
    let eig = eig2(h);
    if eig.condition.is_finite() && eig.condition <= CONDITION_LIMIT {
        if let Some(inv) = eig.vectors.try_inverse() {
            let phases = Matrix2::from_diagonal(&State2::new(
                (-I * eig.values[0] * t).exp(),
                (-I * eig.values[1] * t).exp(),
            ));
            return Propagator2 {
                matrix: eig.vectors * phases * inv,
                method: ExpmMethod::Eigen,
                condition: eig.condition,
            };
        }
    }
    Propagator2 {
        matrix: expm_series(&(h * (-I * t))),
        method: ExpmMethod::Series,
        condition: eig.condition,
    }
}

fn norm1<const D: usize>(a: &SMatrix<C64, D, D>) -> f64 {
    (0..D)
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Scaling-and-squaring Taylor evaluation of `exp(a)`.
pub fn expm_series<const D: usize>(a: &SMatrix<C64, D, D>) -> SMatrix<C64, D, D> {
    let norm = norm1(a);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let b = a / re(2f64.powi(squarings));

    let mut sum = SMatrix::<C64, D, D>::identity();
    let mut term = SMatrix::<C64, D, D>::identity();
    for k in 1..=40 {
        term = term * b / re(k as f64);
        sum += term;
        if norm1(&term) <= 1e-18 * norm1(&sum) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

/// `exp(-i h t)` for a Hermitian 4x4 `h`, through its spectral decomposition.
pub fn hermitian_propagator(h: &Matrix4, t: f64) -> Matrix4 {
    // Symmetrise so round-off in assembly cannot leak an anti-Hermitian part.
    let herm = (h + h.adjoint()) * re(0.5);
    let eig = herm.symmetric_eigen();
    let phases = eig.eigenvalues.map(|e| (-I * e * t).exp());
    eig.eigenvectors * Matrix4::from_diagonal(&phases) * eig.eigenvectors.adjoint()
}
