//! Independent reference computations for verification.
//!
//! Nothing here calls the element kernels: these routines depend only on the
//! mesh data model and plain linear algebra.

use nalgebra::{DMatrix, DVector, Matrix3};

use crate::error::{Error, Result};
use crate::mesh::SurfaceMesh;

/// Central-difference gradient.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], step: f64) -> Vec<f64> {
    let mut p = x.to_vec();
    (0..x.len())
        .map(|i| {
            p[i] = x[i] + step;
            let fp = f(&p);
            p[i] = x[i] - step;
            let fm = f(&p);
            p[i] = x[i];
            (fp - fm) / (2.0 * step)
        })
        .collect()
}

/// Central-difference Jacobian, `J[(i, j)] = d f_i / d x_j`.
pub fn fd_jacobian(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64], step: f64) -> DMatrix<f64> {
    let mut p = x.to_vec();
    let mut cols = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        p[j] = x[j] + step;
        let fp = f(&p);
        p[j] = x[j] - step;
        let fm = f(&p);
        p[j] = x[j];
        cols.push(DVector::from_iterator(
            fp.len(),
            fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * step)),
        ));
    }
    DMatrix::from_columns(&cols)
}

/// Exact catenoid spanning two coaxial rings of radius `radius` at heights
/// `+-half_height`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Catenoid {
    /// Waist radius: the larger root of `a cosh(h / a) = R`.
    pub a: f64,
    pub area: f64,
    /// `|a cosh(h / a) - R|` at the returned root.
    pub residual: f64,
}

/// Solves `a cosh(h / a) = R` for the stable (larger) root by bisection
/// bracketing followed by Newton polishing.
pub fn catenoid_reference(radius: f64, half_height: f64) -> Result<Catenoid> {
    if !(radius > 0.0 && half_height > 0.0) {
        return Err(Error::Parameter("catenoid needs positive radius and half height".into()));
    }
    let h = half_height;
    let g = |a: f64| a * (h / a).cosh() - radius;
    let dg = |a: f64| (h / a).cosh() - (h / a) * (h / a).sinh();
    // g is minimal where t tanh t = 1 with t = h / a
    let mut t = 1.2_f64;
    for _ in 0..60 {
        t -= (t * t.tanh() - 1.0) / (t.tanh() + t / t.cosh().powi(2));
    }
    let a_min = h / t;
    if g(a_min) > 0.0 {
        return Err(Error::IllPosed(format!(
            "no catenoid spans rings of radius {radius} at separation {}",
            2.0 * h
        )));
    }
    // g increases on [a_min, R] and g(R) >= 0
    let (mut lo, mut hi) = (a_min, radius);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-12 * radius {
            break;
        }
    }
    let mut a = 0.5 * (lo + hi);
    for _ in 0..20 {
        let d = dg(a);
        if d.abs() < f64::EPSILON {
            break;
        }
        let next = a - g(a) / d;
        if !(lo..=hi).contains(&next) || (next - a).abs() <= 1e-17 * a {
            break;
        }
        a = next;
    }
    let area = 2.0 * std::f64::consts::PI * a * (h + 0.5 * a * (2.0 * h / a).sinh());
    Ok(Catenoid {
        a,
        area,
        residual: g(a).abs(),
    })
}

/// Least-squares convergence order of `e ~ C h^p`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceFit {
    pub h: Vec<f64>,
    pub errors: Vec<f64>,
    pub order: f64,
    pub r_squared: f64,
    /// Levels used by the fit (the finest half, rounded up).
    pub fitted_levels: usize,
    /// Errors do not decrease monotonically with `h`.
    pub non_monotone: bool,
}

/// Fits the slope of `log e` against `log h` over the finest half of the
/// levels. Needs at least three levels.
pub fn fit_order(h: &[f64], errors: &[f64]) -> Result<ConvergenceFit> {
    if h.len() != errors.len() {
        return Err(Error::Fit("size and error lists differ in length".into()));
    }
    if h.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 levels, got {}", h.len())));
    }
    if h.iter().chain(errors).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Fit("sizes and errors must be positive".into()));
    }
    let mut idx: Vec<usize> = (0..h.len()).collect();
    idx.sort_by(|&a, &b| h[b].total_cmp(&h[a]));
    let non_monotone = idx.windows(2).any(|w| errors[w[1]] >= errors[w[0]]);
    let k = h.len().div_ceil(2).max(2);
    let used = &idx[idx.len() - k..];
    let xs: Vec<f64> = used.iter().map(|&i| h[i].ln()).collect();
    let ys: Vec<f64> = used.iter().map(|&i| errors[i].ln()).collect();
    let n = k as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("mesh sizes are not distinct".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let order = sxy / sxx;
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - my - order * (x - mx)).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(ConvergenceFit {
        h: h.to_vec(),
        errors: errors.to_vec(),
        order,
        r_squared,
        fitted_levels: k,
        non_monotone,
    })
}

#[allow(clippy::too_many_arguments)]
fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(&f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Area of the spheroid `(x^2 + y^2) / a^2 + z^2 / c^2 = 1` as a surface of
/// revolution, `2 pi int a cos t sqrt(a^2 sin^2 t + c^2 cos^2 t) dt`.
pub fn spheroid_area(a: f64, c: f64) -> f64 {
    let half = std::f64::consts::FRAC_PI_2;
    2.0 * std::f64::consts::PI
        * adaptive_simpson(
            |t| a * t.cos() * (a * a * t.sin().powi(2) + c * c * t.cos().powi(2)).sqrt(),
            -half,
            half,
            1e-14,
        )
}

/// Cotangent Laplacian weights of a linear triangle mesh: for each edge
/// `(i, j)` with `i < j`, `(cot alpha + cot beta) / 2` over the opposite
/// angles, plus diagonal entries that make every row sum to zero.
pub fn cotangent_laplacian(mesh: &SurfaceMesh) -> DMatrix<f64> {
    let n = mesh.num_nodes();
    let mut l = DMatrix::zeros(n, n);
    for el in mesh.elements() {
        for k in 0..3 {
            let (o, i, j) = (el[k], el[(k + 1) % 3], el[(k + 2) % 3]);
            let x = mesh.nodes();
            let (u, v) = (x[i] - x[o], x[j] - x[o]);
            let cot = u.dot(&v) / u.cross(&v).norm();
            l[(i, j)] -= 0.5 * cot;
            l[(j, i)] -= 0.5 * cot;
            l[(i, i)] += 0.5 * cot;
            l[(j, j)] += 0.5 * cot;
        }
    }
    l
}

/// Plane-stress Lame parameter `2 lambda mu / (lambda + 2 mu)`.
pub fn plane_stress_lambda(lambda: f64, mu: f64) -> f64 {
    2.0 * lambda * mu / (lambda + 2.0 * mu)
}

/// Isotropic in-plane elasticity `lambda* d_ij d_kl + mu (d_ik d_jl + d_il d_jk)`
/// for indices in the plane orthogonal to `e3`, as `C[(2 i + j, 2 k + l)]`.
pub fn plane_stress_hooke(lambda: f64, mu: f64) -> nalgebra::Matrix4<f64> {
    let ls = plane_stress_lambda(lambda, mu);
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    nalgebra::Matrix4::from_fn(|r, c| {
        let (i, j, k, l) = (r / 2, r % 2, c / 2, c % 2);
        ls * d(i, j) * d(k, l) + mu * (d(i, k) * d(j, l) + d(i, l) * d(j, k))
    })
}

/// Closed-form constant-strain triangle stiffness for a flat element in the
/// `z = 0` plane with plane-stress moduli. Rows/columns ordered
/// `(node, component)` over the three in-plane-and-normal components; the
/// normal rows are zero.
pub fn cst_stiffness(p: [[f64; 2]; 3], lambda: f64, mu: f64, thickness: f64) -> DMatrix<f64> {
    let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
    // b_i = y_j - y_k, c_i = x_k - x_j (cyclic)
    let mut grad = [[0.0; 2]; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        grad[i] = [(p[j][1] - p[k][1]) / (2.0 * area), (p[k][0] - p[j][0]) / (2.0 * area)];
    }
    let ls = plane_stress_lambda(lambda, mu);
    // D in Voigt form (xx, yy, xy with engineering shear)
    let d = Matrix3::new(ls + 2.0 * mu, ls, 0.0, ls, ls + 2.0 * mu, 0.0, 0.0, 0.0, mu);
    let mut b = DMatrix::zeros(3, 9);
    for i in 0..3 {
        let [gx, gy] = grad[i];
        b[(0, 3 * i)] = gx;
        b[(1, 3 * i + 1)] = gy;
        b[(2, 3 * i)] = gy;
        b[(2, 3 * i + 1)] = gx;
    }
    let dd = DMatrix::from_column_slice(3, 3, d.as_slice());
    b.transpose() * dd * b * (thickness * area)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fd_gradient_of_quadratic() {
        let x0 = [0.3, -1.2, 2.0];
        let g = fd_gradient(|x| 0.5 * x.iter().map(|v| v * v).sum::<f64>(), &x0, 1e-3);
        for (a, b) in g.iter().zip(&x0) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn fd_jacobian_of_linear_map() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, -4.0, 5.0, 0.5]);
        let j = fd_jacobian(
            |x| (&a * DVector::from_column_slice(x)).as_slice().to_vec(),
            &[0.1, 0.2, 0.3],
            1e-4,
        );
        assert!((j - &a).amax() < 1e-10);
    }

    #[test]
    fn catenoid_roots() {
        let c = catenoid_reference(0.5, 0.3).unwrap();
        assert!(c.residual <= 1e-14);
        assert!(c.a > 0.3 / 1.2 && c.a < 0.5);
        let thin = catenoid_reference(1.0, 1e-4).unwrap();
        assert!((thin.a - 1.0).abs() < 1e-7);
        let cyl = 2.0 * std::f64::consts::PI * 2e-4;
        assert!((thin.area - cyl).abs() < 1e-9);
        let deep = catenoid_reference(0.5, 0.32).unwrap();
        assert!(deep.a < c.a);
        assert!(catenoid_reference(0.5, 0.34).is_err());
    }

    #[test]
    fn exact_power_laws() {
        let h = [0.4, 0.2, 0.1, 0.05];
        for p in [2.0, 4.0] {
            let e: Vec<f64> = h.iter().map(|x: &f64| 3.0 * x.powf(p)).collect();
            let fit = fit_order(&h, &e).unwrap();
            assert!((fit.order - p).abs() < 1e-12);
            assert!(!fit.non_monotone);
            assert_eq!(fit.fitted_levels, 2);
        }
    }

    #[test]
    fn degenerate_fits() {
        assert!(fit_order(&[0.1, 0.2], &[1.0, 2.0]).is_err());
        assert!(fit_order(&[0.1, 0.2, 0.3], &[1.0, 0.0, 2.0]).is_err());
        assert!(fit_order(&[0.1, 0.1, 0.1], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn sphere_area() {
        assert!((spheroid_area(1.0, 1.0) - 4.0 * std::f64::consts::PI).abs() < 1e-12);
        // oblate closed form
        let (a, c) = (1.0_f64, 0.5_f64);
        let e = (1.0 - c * c / (a * a)).sqrt();
        let exact = 2.0 * std::f64::consts::PI * a * a * (1.0 + (1.0 - e * e) / e * e.atanh());
        assert!((spheroid_area(a, c) - exact).abs() < 1e-12);
    }

    #[test]
    fn cotangent_rows_sum_to_zero() {
        let nodes = vec![
            nalgebra::Vector3::zeros(),
            nalgebra::Vector3::x(),
            nalgebra::Vector3::y(),
        ];
        let mesh = SurfaceMesh::new(nodes, vec![0, 1, 2], 1).unwrap();
        let l = cotangent_laplacian(&mesh);
        for r in 0..3 {
            assert!(l.row(r).sum().abs() < 1e-15);
        }
        // right angle at node 0: edge (1, 2) weight 0
        assert!(l[(1, 2)].abs() < 1e-15);
        assert!((l[(0, 1)] + 0.5).abs() < 1e-15);
    }
}
