//! Crate-internal dense complex linear algebra for small n (n <= 4 at desk
//! scale, but nothing here assumes a fixed bound). Row-major `Vec<Complex64>`
//! matrices throughout.

use num_complex::Complex64;

pub type C64 = Complex64;

pub fn mat_mul(n: usize, a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

pub fn mat_vec(n: usize, a: &[C64], v: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n];
    for i in 0..n {
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..n {
            acc += a[i * n + j] * v[j];
        }
        out[i] = acc;
    }
    out
}

pub fn identity(n: usize) -> Vec<C64> {
    let mut m = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        m[i * n + i] = C64::new(1.0, 0.0);
    }
    m
}

pub fn max_entry_norm(m: &[C64]) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Determinant by LU with partial pivoting.
pub fn det(n: usize, m: &[C64]) -> C64 {
    let mut a = m.to_vec();
    let mut d = C64::new(1.0, 0.0);
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].norm();
        for r in col + 1..n {
            let v = a[r * n + col].norm();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return C64::new(0.0, 0.0);
        }
        if piv != col {
            for j in 0..n {
                a.swap(col * n + j, piv * n + j);
            }
            d = -d;
        }
        let p = a[col * n + col];
        d *= p;
        for r in col + 1..n {
            let f = a[r * n + col] / p;
            for j in col..n {
                let v = a[col * n + j];
                a[r * n + j] -= f * v;
            }
        }
    }
    d
}

/// Inverse by Gauss–Jordan with partial pivoting. Returns `None` when the
/// matrix is numerically singular.
pub fn inverse(n: usize, m: &[C64]) -> Option<Vec<C64>> {
    let mut a = m.to_vec();
    let mut inv = identity(n);
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].norm();
        for r in col + 1..n {
            let v = a[r * n + col].norm();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best < 1e-300 {
            return None;
        }
        if piv != col {
            for j in 0..n {
                a.swap(col * n + j, piv * n + j);
                inv.swap(col * n + j, piv * n + j);
            }
        }
        let p = a[col * n + col];
        for j in 0..n {
            a[col * n + j] /= p;
            inv[col * n + j] /= p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[r * n + col];
            if f.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..n {
                let av = a[col * n + j];
                let iv = inv[col * n + j];
                a[r * n + j] -= f * av;
                inv[r * n + j] -= f * iv;
            }
        }
    }
    Some(inv)
}

/// Coefficients of the characteristic polynomial
/// `lambda^n + c[0] lambda^(n-1) + ... + c[n-1]` via Faddeev–LeVerrier.
pub fn char_poly(n: usize, m: &[C64]) -> Vec<C64> {
    let mut coeffs = Vec::with_capacity(n);
    let mut mk = m.to_vec();
    for k in 1..=n {
        let tr: C64 = (0..n).map(|i| mk[i * n + i]).sum();
        let ck = -tr / (k as f64);
        coeffs.push(ck);
        if k == n {
            break;
        }
        let mut shifted = mk.clone();
        for i in 0..n {
            shifted[i * n + i] += ck;
        }
        mk = mat_mul(n, m, &shifted);
    }
    coeffs
}

/// All roots of a monic polynomial by Durand–Kerner iteration.
pub fn poly_roots(coeffs: &[C64]) -> Vec<C64> {
    let n = coeffs.len();
    if n == 0 {
        return Vec::new();
    }
    let eval = |z: C64| -> C64 {
        let mut acc = C64::new(1.0, 0.0);
        for &c in coeffs {
            acc = acc * z + c;
        }
        acc
    };
    // Start on a circle whose radius bounds the root moduli.
    let radius = 1.0 + coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut roots: Vec<C64> = (0..n)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / (n as f64);
            C64::from_polar(radius, ang)
        })
        .collect();
    for _ in 0..200 {
        let mut max_step = 0.0f64;
        for i in 0..n {
            let mut denom = C64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            if denom.norm() < 1e-300 {
                continue;
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step < 1e-13 * radius.max(1.0) {
            break;
        }
    }
    roots
}

/// Eigenvalue moduli, sorted descending.
pub fn eigenvalue_moduli(n: usize, m: &[C64]) -> Vec<f64> {
    let mut mods: Vec<f64> = poly_roots(&char_poly(n, m)).iter().map(|z| z.norm()).collect();
    mods.sort_by(|a, b| b.partial_cmp(a).unwrap());
    mods
}

/// Largest singular value. Closed form for 2x2, power iteration on A^H A
/// otherwise (deterministic start, plenty of iterations for n <= 4).
pub fn operator_norm(n: usize, m: &[C64]) -> f64 {
    if n == 2 {
        let f2: f64 = m.iter().map(|z| z.norm_sqr()).sum();
        let d = det(2, m).norm();
        let disc = (f2 * f2 - 4.0 * d * d).max(0.0);
        return ((f2 + disc.sqrt()) / 2.0).sqrt();
    }
    // A^H A
    let mut h = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                acc += m[k * n + i].conj() * m[k * n + j];
            }
            h[i * n + j] = acc;
        }
    }
    let mut v: Vec<C64> = (0..n)
        .map(|i| C64::new(1.0 + 0.1 * i as f64, 0.3 - 0.05 * i as f64))
        .collect();
    let mut lambda = 0.0;
    for _ in 0..200 {
        let w = mat_vec(n, &h, &v);
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm;
        v = w.iter().map(|z| z / norm).collect();
        if (next - lambda).abs() < 1e-14 * next.max(1.0) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda.sqrt()
}

/// Modified Gram–Schmidt on the columns of `m`. Returns (Q, diag(R)) where
/// Q has orthonormal columns and diag(R) holds the positive column norms
/// after projection. `None` when a column collapses (degenerate frame).
pub fn qr_columns(n: usize, m: &[C64]) -> Option<(Vec<C64>, Vec<f64>)> {
    let mut q = m.to_vec();
    let mut rdiag = vec![0.0f64; n];
    for j in 0..n {
        for k in 0..j {
            // proj = <q_k, q_j>
            let mut proj = C64::new(0.0, 0.0);
            for i in 0..n {
                proj += q[i * n + k].conj() * q[i * n + j];
            }
            for i in 0..n {
                let qk = q[i * n + k];
                q[i * n + j] -= proj * qk;
            }
        }
        let norm: f64 = (0..n).map(|i| q[i * n + j].norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return None;
        }
        rdiag[j] = norm;
        for i in 0..n {
            q[i * n + j] /= norm;
        }
    }
    Some((q, rdiag))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn det_and_inverse_2x2() {
        let m = vec![c(1.0, 1.0), c(2.0, 0.0), c(0.5, -1.0), c(3.0, 0.2)];
        let d = det(2, &m);
        let expect = m[0] * m[3] - m[1] * m[2];
        assert!((d - expect).norm() < 1e-12);
        let inv = inverse(2, &m).unwrap();
        let prod = mat_mul(2, &m, &inv);
        let id = identity(2);
        for (a, b) in prod.iter().zip(id.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn inverse_of_singular_is_none() {
        let m = vec![c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)];
        assert!(inverse(2, &m).is_none());
    }

    #[test]
    fn char_poly_roots_match_diagonal() {
        let m = vec![
            c(3.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 2.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(-1.0, 0.0),
        ];
        let mut mods = eigenvalue_moduli(3, &m);
        mods.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!((mods[0] - 3.0).abs() < 1e-9);
        assert!((mods[1] - 2.0).abs() < 1e-9);
        assert!((mods[2] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn eigenvalue_moduli_of_jordan_block() {
        // [[1,1],[0,1]]: double eigenvalue 1.
        let m = vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let mods = eigenvalue_moduli(2, &m);
        for v in mods {
            assert!((v - 1.0).abs() < 1e-6, "modulus {v}");
        }
    }

    #[test]
    fn operator_norm_diag() {
        let m = vec![c(3.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)];
        assert!((operator_norm(2, &m) - 3.0).abs() < 1e-12);
        // 3x3 path
        let m3 = vec![
            c(2.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, -5.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(1.0, 0.0),
        ];
        assert!((operator_norm(3, &m3) - 5.0).abs() < 1e-9);
    }

    #[test]
    fn qr_orthonormal_columns() {
        let m = vec![c(1.0, 0.5), c(2.0, -1.0), c(0.0, 1.0), c(1.0, 1.0)];
        let (q, r) = qr_columns(2, &m).unwrap();
        for j in 0..2 {
            assert!(r[j] > 0.0);
            for k in 0..=j {
                let mut dot = C64::new(0.0, 0.0);
                for i in 0..2 {
                    dot += q[i * 2 + k].conj() * q[i * 2 + j];
                }
                let expect = if k == j { 1.0 } else { 0.0 };
                assert!((dot.norm() - expect).abs() < 1e-12);
            }
        }
    }
}
