//! Small dense linear algebra: closed-form spectra of 1×1 to 3×3 matrices,
//! cyclic Jacobi diagonalization of symmetric matrices, and a few helpers
//! (determinants, condition estimates) used by the cycle and sweep code.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative band inside which a cubic discriminant counts as zero
/// (repeated root).
pub const REPEATED_ROOT_TOL: f64 = 1e-12;

const POLISH_ITERATIONS: usize = 8;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Coefficients `(a2, a1, a0)` of the monic characteristic polynomial
/// `λ³ + a2 λ² + a1 λ + a0` of a 3×3 matrix.
pub fn characteristic_cubic(m: &DMatrix<f64>) -> (f64, f64, f64) {
    debug_assert_eq!(m.shape(), (3, 3));
    let trace = m[(0, 0)] + m[(1, 1)] + m[(2, 2)];
    let minors = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)])
        + (m[(0, 0)] * m[(2, 2)] - m[(0, 2)] * m[(2, 0)])
        + (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)]);
    (-trace, minors, -det3(m))
}

/// Determinant of a 3×3 matrix by cofactor expansion.
pub fn det3(m: &DMatrix<f64>) -> f64 {
    debug_assert_eq!(m.shape(), (3, 3));
    m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
        - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
        + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
}

/// Eigenvalues of a 1×1, 2×2 or 3×3 real matrix from its characteristic
/// polynomial.
///
/// The cubic case takes one real root in closed form (Cardano or the
/// trigonometric form), polishes it with Newton's method, and deflates to a
/// quadratic. Complex roots come back as exact conjugate pairs. The result
/// is sorted by decreasing modulus, positive imaginary part first on ties.
pub fn eigenvalues_small(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(Error::InvalidArgument(format!(
            "eigenvalues need a square matrix, got {rows}×{cols}"
        )));
    }
    let mut roots = match rows {
        1 => vec![Complex64::new(m[(0, 0)], 0.0)],
        2 => {
            let trace = m[(0, 0)] + m[(1, 1)];
            let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
            quadratic_roots(-trace, det).to_vec()
        }
        3 => {
            let (a2, a1, a0) = characteristic_cubic(m);
            cubic_roots(a2, a1, a0).to_vec()
        }
        n => {
            return Err(Error::InvalidArgument(format!(
                "closed-form eigenvalues support at most 3×3 blocks, got {n}×{n}"
            )))
        }
    };
    sort_spectrum(&mut roots);
    Ok(roots)
}

/// Eigenvalues of any square real matrix: the closed form up to 3×3, a real
/// Schur decomposition beyond.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    if m.nrows() <= 3 {
        return eigenvalues_small(m);
    }
    if !m.is_square() {
        return Err(Error::InvalidArgument("eigenvalues need a square matrix".into()));
    }
    let mut roots: Vec<Complex64> = m
        .complex_eigenvalues()
        .iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect();
    // Schur 2×2 blocks already yield conjugate pairs; make them bit-exact.
    for i in 0..roots.len() {
        if roots[i].im > 0.0 {
            if let Some(j) = (0..roots.len()).find(|&j| {
                j != i && roots[j].im < 0.0 && (roots[j].conj() - roots[i]).norm() <= 1e-12 * (1.0 + roots[i].norm())
            }) {
                roots[j] = roots[i].conj();
            }
        }
    }
    sort_spectrum(&mut roots);
    Ok(roots)
}

fn sort_spectrum(roots: &mut [Complex64]) {
    roots.sort_by(|a, b| {
        b.norm()
            .total_cmp(&a.norm())
            .then(b.re.total_cmp(&a.re))
            .then(b.im.total_cmp(&a.im))
    });
}

/// Roots of `λ² + b λ + c`.
pub fn quadratic_roots(b: f64, c: f64) -> [Complex64; 2] {
    let disc = b * b - 4.0 * c;
    if disc >= 0.0 {
        let s = disc.sqrt();
        // Stable form: avoid subtracting nearly equal quantities.
        let q = -0.5 * (b + s.copysign(b));
        if q == 0.0 {
            return [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
        }
        [Complex64::new(q, 0.0), Complex64::new(c / q, 0.0)]
    } else {
        let re = -0.5 * b;
        let im = 0.5 * (-disc).sqrt();
        [Complex64::new(re, im), Complex64::new(re, -im)]
    }
}

/// Roots of the monic cubic `λ³ + a2 λ² + a1 λ + a0`.
pub fn cubic_roots(a2: f64, a1: f64, a0: f64) -> [Complex64; 3] {
    let eval = |z: Complex64| ((z + a2) * z + a1) * z + a0;
    let slope = |z: Complex64| (3.0 * z + 2.0 * a2) * z + a1;

    let shift = a2 / 3.0;
    let p = a1 - a2 * shift;
    let q = 2.0 * shift * shift * shift - shift * a1 + a0;
    let half_q = 0.5 * q;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;
    let scale = half_q * half_q + third_p.abs().powi(3);

    if scale == 0.0 {
        let r = Complex64::new(-shift, 0.0);
        return [r, r, r];
    }

    if disc.abs() <= REPEATED_ROOT_TOL * scale {
        // Repeated root: simple root 3q/p, double root -3q/(2p).
        let simple = Complex64::new(3.0 * q / p - shift, 0.0);
        let double = Complex64::new(-1.5 * q / p - shift, 0.0);
        let simple = polish(simple, &eval, &slope);
        return [simple, double, double];
    }

    if disc < 0.0 {
        // Three distinct real roots, trigonometric form.
        let radius = 2.0 * (-third_p).sqrt();
        let arg = ((3.0 * q / (2.0 * p)) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (k, slot) in out.iter_mut().enumerate() {
            let t = radius * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos();
            *slot = polish(Complex64::new(t - shift, 0.0), &eval, &slope);
        }
        return out;
    }

    // One real root (Cardano), then deflate to the conjugate pair.
    let s = disc.sqrt();
    let u = (-half_q - s.copysign(half_q)).cbrt();
    let t = if u == 0.0 { 0.0 } else { u - third_p / u };
    let real = polish(Complex64::new(t - shift, 0.0), &eval, &slope).re;
    let b = a2 + real;
    let c = if real.abs() > 1.0 { -a0 / real } else { a1 + real * b };
    let [z1, _] = quadratic_roots(b, c);
    let mut z = polish(z1, &eval, &slope);
    if z.im < 0.0 {
        z = z.conj();
    }
    [Complex64::new(real, 0.0), z, z.conj()]
}

/// Guarded Newton polish: a step is kept only if it reduces |p(z)|.
fn polish(
    mut z: Complex64,
    eval: &impl Fn(Complex64) -> Complex64,
    slope: &impl Fn(Complex64) -> Complex64,
) -> Complex64 {
    let mut value = eval(z).norm();
    for _ in 0..POLISH_ITERATIONS {
        if value == 0.0 {
            break;
        }
        let d = slope(z);
        if d.norm() == 0.0 {
            break;
        }
        let next = z - eval(z) / d;
        let next_value = eval(next).norm();
        if !(next_value < value) {
            break;
        }
        z = next;
        value = next_value;
    }
    if z.im == 0.0 {
        z.im = 0.0;
    }
    z
}

/// Spectral decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns `(q, mu)` with `a = qᵀ · diag(mu) · q`, `q` orthogonal (rows are
/// eigenvectors) and `mu` ascending.
pub fn jacobi_eigen(a: &DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let n = a.nrows();
    if !a.is_square() || n == 0 {
        return Err(Error::InvalidArgument("Jacobi needs a nonempty square matrix".into()));
    }
    let mut s = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let total: f64 = s.iter().map(|x| x * x).sum::<f64>().sqrt();

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| s[(i, j)] * s[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = s[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (s[(q, q)] - s[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let skp = s[(k, p)];
                    let skq = s[(k, q)];
                    s[(k, p)] = c * skp - sn * skq;
                    s[(k, q)] = sn * skp + c * skq;
                }
                for k in 0..n {
                    let spk = s[(p, k)];
                    let sqk = s[(q, k)];
                    s[(p, k)] = c * spk - sn * sqk;
                    s[(q, k)] = sn * spk + c * sqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[(i, i)].total_cmp(&s[(j, j)]));
    let mu: Vec<f64> = order.iter().map(|&i| s[(i, i)]).collect();
    let q = DMatrix::from_fn(n, n, |r, c| v[(c, order[r])]);
    Ok((q, mu))
}

/// 2-norm condition number from the singular values.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Largest absolute entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}
