//! KdV `u_t + 6 u u_x + u_xxx = 0` on a periodic interval, written as
//! `u_t = ∂_x p`, `p = -u_xx - 3u^2 = ∇E(u)` with
//! `E[u] = ∫ (u_x^2 / 2 - u^3) dx`, discretized by continuous P^l elements.

use nalgebra::{DMatrix, LU, Dyn};

use crate::error::{check_dim, Error, Result};
use crate::polybasis::{gauss_legendre, NodalBasis};
use crate::specfun::{elliptic_k, jacobi_cn};
use crate::system::{GradientSystem, OpStructure};

/// Periodic uniform mesh with Lagrange P^l elements on equispaced local nodes.
#[derive(Clone, Debug)]
pub struct KdvAssembly {
    domain_length: f64,
    cells: usize,
    degree: usize,
    h: f64,
    mass: SparseMatrix,
    skew: SparseMatrix,
    stiffness: SparseMatrix,
    local_basis: NodalBasis,
    // cell quadrature on [0, 1]: weights and shape values phi[q][a]
    quad_weights: Vec<f64>,
    quad_shapes: Vec<Vec<f64>>,
}

impl KdvAssembly {
    pub fn new(cells: usize, degree: usize, domain_length: f64) -> Result<Self> {
        if cells < 3 {
            return Err(Error::InvalidArgument(format!("need at least 3 cells, got {cells}")));
        }
        if degree < 1 {
            return Err(Error::InvalidArgument("element degree must be at least 1".into()));
        }
        if !(domain_length > 0.0 && domain_length.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "domain length must be positive, got {domain_length}"
            )));
        }
        let h = domain_length / cells as f64;
        let local_nodes: Vec<f64> = (0..=degree).map(|a| a as f64 / degree as f64).collect();
        let local_basis = NodalBasis::with_nodes(local_nodes)?;
        // exact for the degree-3l cubic term and all bilinear forms
        let points = (3 * degree + 1).div_ceil(2) + 1;
        let rule = gauss_legendre(points)?;
        let quad_shapes: Vec<Vec<f64>> = rule.nodes().iter().map(|&s| local_basis.eval(s)).collect();
        let quad_derivs: Vec<Vec<f64>> = rule.nodes().iter().map(|&s| local_basis.deriv(s)).collect();

        let n = degree + 1;
        let mut m_loc = vec![vec![0.0; n]; n];
        let mut d_loc = vec![vec![0.0; n]; n];
        let mut s_loc = vec![vec![0.0; n]; n];
        for (q, &w) in rule.weights().iter().enumerate() {
            let (phi, dphi) = (&quad_shapes[q], &quad_derivs[q]);
            for i in 0..n {
                for j in 0..n {
                    m_loc[i][j] += w * h * phi[i] * phi[j];
                    // (∂x φ_j, φ_i): the 1/h of the derivative cancels the Jacobian
                    d_loc[i][j] += w * dphi[j] * phi[i];
                    s_loc[i][j] += w * dphi[i] * dphi[j] / h;
                }
            }
        }

        let dof = degree * cells;
        let mut m = DMatrix::<f64>::zeros(dof, dof);
        let mut d = DMatrix::<f64>::zeros(dof, dof);
        let mut s = DMatrix::<f64>::zeros(dof, dof);
        for c in 0..cells {
            let g = |a: usize| (c * degree + a) % dof;
            for i in 0..n {
                for j in 0..n {
                    m[(g(i), g(j))] += m_loc[i][j];
                    d[(g(i), g(j))] += d_loc[i][j];
                    s[(g(i), g(j))] += s_loc[i][j];
                }
            }
        }
        // Exact (anti)symmetry, entry by entry.
        let m = DMatrix::from_fn(dof, dof, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
        let s = DMatrix::from_fn(dof, dof, |i, j| 0.5 * (s[(i, j)] + s[(j, i)]));
        let d = DMatrix::from_fn(dof, dof, |i, j| 0.5 * (d[(i, j)] - d[(j, i)]));

        Ok(Self {
            domain_length,
            cells,
            degree,
            h,
            mass: SparseMatrix::from_dense(&m),
            skew: SparseMatrix::from_dense(&d),
            stiffness: SparseMatrix::from_dense(&s),
            local_basis,
            quad_weights: rule.weights().to_vec(),
            quad_shapes,
        })
    }

    pub fn domain_length(&self) -> f64 {
        self.domain_length
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn dof(&self) -> usize {
        self.degree * self.cells
    }

    pub fn mass(&self) -> &SparseMatrix {
        &self.mass
    }

    pub fn skew(&self) -> &SparseMatrix {
        &self.skew
    }

    pub fn stiffness(&self) -> &SparseMatrix {
        &self.stiffness
    }

    /// Position of global node `g`.
    pub fn node_position(&self, g: usize) -> f64 {
        g as f64 * self.h / self.degree as f64
    }

    fn global(&self, cell: usize, local: usize) -> usize {
        (cell * self.degree + local) % self.dof()
    }

    /// Evaluates the finite-element function with coordinates `u` at `x`
    /// (wrapped periodically).
    pub fn eval(&self, u: &[f64], x: f64) -> f64 {
        let x = x.rem_euclid(self.domain_length);
        let cell = ((x / self.h).floor() as usize).min(self.cells - 1);
        let s = (x / self.h - cell as f64).clamp(0.0, 1.0);
        self.local_basis
            .eval(s)
            .iter()
            .enumerate()
            .map(|(a, phi)| phi * u[self.global(cell, a)])
            .sum()
    }

    /// `∫ f(u_h(x), v_h(x)) dx` by cell quadrature.
    fn integrate_pointwise(&self, u: &[f64], v: &[f64], f: impl Fn(f64, f64) -> f64) -> f64 {
        let mut total = 0.0;
        for c in 0..self.cells {
            for (w, phi) in self.quad_weights.iter().zip(&self.quad_shapes) {
                let (mut uq, mut vq) = (0.0, 0.0);
                for (a, pa) in phi.iter().enumerate() {
                    let g = self.global(c, a);
                    uq += pa * u[g];
                    vq += pa * v[g];
                }
                total += w * self.h * f(uq, vq);
            }
        }
        total
    }

    /// `(f(u_h, v_h), φ_i)` for every global basis function.
    fn load_pointwise(&self, u: &[f64], v: &[f64], f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dof()];
        for c in 0..self.cells {
            for (w, phi) in self.quad_weights.iter().zip(&self.quad_shapes) {
                let (mut uq, mut vq) = (0.0, 0.0);
                for (a, pa) in phi.iter().enumerate() {
                    let g = self.global(c, a);
                    uq += pa * u[g];
                    vq += pa * v[g];
                }
                let fq = w * self.h * f(uq, vq);
                for (a, pa) in phi.iter().enumerate() {
                    out[self.global(c, a)] += fq * pa;
                }
            }
        }
        out
    }
}

/// Row-compressed storage for the banded periodic FE matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut row_start = vec![0];
        let (mut cols, mut values) = (Vec::new(), Vec::new());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v != 0.0 {
                    cols.push(j);
                    values.push(v);
                }
            }
            row_start.push(cols.len());
        }
        Self {
            n: m.ncols(),
            row_start,
            cols,
            values,
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.row_start
            .windows(2)
            .map(|r| (r[0]..r[1]).map(|e| self.values[e] * x[self.cols[e]]).sum())
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.row_start.len() - 1, self.n);
        for (i, r) in self.row_start.windows(2).enumerate() {
            for e in r[0]..r[1] {
                m[(i, self.cols[e])] = self.values[e];
            }
        }
        m
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }
}

pub(crate) fn csr_apply(a: &SparseMatrix, x: &[f64]) -> Vec<f64> {
    a.apply(x)
}

/// The semidiscrete KdV gradient system on `S_h` with the `L^2` inner product.
#[derive(Clone, Debug)]
pub struct KdvProblem {
    assembly: KdvAssembly,
    mass_lu: LU<f64, Dyn, Dyn>,
}

/// Assembles the periodic P^l problem on `cells` uniform cells.
pub fn build_kdv_problem(cells: usize, degree: usize, domain_length: f64) -> Result<KdvProblem> {
    KdvProblem::new(KdvAssembly::new(cells, degree, domain_length)?)
}

impl KdvProblem {
    pub fn new(assembly: KdvAssembly) -> Result<Self> {
        let mass_lu = assembly.mass().to_dense().lu();
        Ok(Self { assembly, mass_lu })
    }

    pub fn assembly(&self) -> &KdvAssembly {
        &self.assembly
    }

    /// `∫ u_h dx`.
    pub fn mass_integral(&self, u: &[f64]) -> f64 {
        csr_apply(self.assembly.mass(), u).iter().sum()
    }
}

impl GradientSystem for KdvProblem {
    fn dim(&self) -> usize {
        self.assembly.dof()
    }

    fn gram_apply(&self, a: &[f64]) -> Vec<f64> {
        csr_apply(&self.assembly.mass, a)
    }

    fn gram_solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), rhs.len())?;
        let b = nalgebra::DVector::from_column_slice(rhs);
        self.mass_lu
            .solve(&b)
            .map(|x| x.as_slice().to_vec())
            .ok_or_else(|| Error::Domain("singular mass matrix".into()))
    }

    fn energy(&self, u: &[f64]) -> Result<f64> {
        check_dim(self.dim(), u.len())?;
        let su = csr_apply(&self.assembly.stiffness, u);
        let quadratic: f64 = 0.5 * su.iter().zip(u).map(|(a, b)| a * b).sum::<f64>();
        let cubic = self.assembly.integrate_pointwise(u, u, |x, _| x * x * x);
        Ok(quadratic - cubic)
    }

    fn grad_weak(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), u.len())?;
        let su = csr_apply(&self.assembly.stiffness, u);
        let load = self.assembly.load_pointwise(u, u, |x, _| 3.0 * x * x);
        Ok(su.iter().zip(&load).map(|(a, b)| a - b).collect())
    }

    fn op_weak(&self, _u_ctx: &[f64], p: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), p.len())?;
        Ok(csr_apply(&self.assembly.skew, p))
    }

    /// `((a_x + b_x) / 2, φ_i,x) - (a^2 + a b + b^2, φ_i)`.
    fn dgrad_weak(&self, a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), a.len())?;
        check_dim(self.dim(), b.len())?;
        let avg: Vec<f64> = a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect();
        let s_avg = csr_apply(&self.assembly.stiffness, &avg);
        let load = self.assembly.load_pointwise(a, b, |x, y| x * x + x * y + y * y);
        Ok(s_avg.iter().zip(&load).map(|(s, l)| s - l).collect())
    }

    fn op_structure(&self) -> OpStructure {
        OpStructure::SkewSymmetric
    }

    /// `<∇_d E(a, b), a - b>`, exact because the cell quadrature integrates
    /// the cubic term exactly.
    fn energy_difference(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        let dg = self.dgrad_weak(a, b)?;
        Ok(dg.iter().zip(a.iter().zip(b)).map(|(g, (x, y))| g * (x - y)).sum())
    }
}

/// Coordinates of the nodal interpolant of `f`.
pub fn interpolate_initial(problem: &KdvProblem, mut f: impl FnMut(f64) -> f64) -> Vec<f64> {
    let asm = problem.assembly();
    (0..asm.dof()).map(|g| f(asm.node_position(g))).collect()
}

/// Cnoidal traveling wave `α + 2κ²k² cn²(κ(x - ct) | k²)`,
/// `c = 6α + 4(2k² - 1)κ²`, where `k` is the elliptic modulus.
#[derive(Clone, Copy, Debug)]
pub struct CnoidalWave {
    pub modulus: f64,
    pub kappa: f64,
    pub alpha: f64,
}

impl Default for CnoidalWave {
    fn default() -> Self {
        Self {
            modulus: 0.9f64.sqrt(),
            kappa: 1.0,
            alpha: 0.0,
        }
    }
}

impl CnoidalWave {
    /// Elliptic parameter `k²` passed to `K` and `cn`.
    pub fn parameter(&self) -> f64 {
        self.modulus * self.modulus
    }

    pub fn speed(&self) -> f64 {
        6.0 * self.alpha + 4.0 * (2.0 * self.parameter() - 1.0) * self.kappa * self.kappa
    }

    /// `2 K(k²) / κ`.
    pub fn spatial_period(&self) -> Result<f64> {
        Ok(2.0 * elliptic_k(self.parameter())? / self.kappa)
    }

    /// Time for the wave to travel one spatial period.
    pub fn temporal_period(&self) -> Result<f64> {
        let c = self.speed();
        if c == 0.0 {
            return Err(Error::Domain("stationary cnoidal wave has no temporal period".into()));
        }
        Ok(self.spatial_period()? / c.abs())
    }

    pub fn eval(&self, x: f64, t: f64) -> Result<f64> {
        let period = self.spatial_period()?;
        let xi = (x - self.speed() * t).rem_euclid(period);
        let cn = jacobi_cn(self.kappa * xi, self.parameter())?;
        Ok(self.alpha + 2.0 * self.kappa * self.kappa * self.parameter() * cn * cn)
    }
}

/// Free-function form of [`CnoidalWave::eval`]; `m_paper` is the modulus.
pub fn cnoidal_exact(x: f64, t: f64, modulus: f64, kappa: f64, alpha: f64) -> Result<f64> {
    CnoidalWave { modulus, kappa, alpha }.eval(x, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_mass_matrix_is_periodic_tridiagonal() {
        let asm = KdvAssembly::new(6, 1, 3.0).unwrap();
        let h = asm.h();
        let m = asm.mass().to_dense();
        for i in 0..6 {
            for j in 0..6 {
                let gap = (i as isize - j as isize).rem_euclid(6);
                let want = match gap {
                    0 => 2.0 * h / 3.0,
                    1 | 5 => h / 6.0,
                    _ => 0.0,
                };
                assert!((m[(i, j)] - want).abs() < 1e-15, "({i},{j})");
            }
        }
    }

    #[test]
    fn structural_identities() {
        for l in 1..=4 {
            let asm = KdvAssembly::new(8, l, 5.0).unwrap();
            let ones = vec![1.0; asm.dof()];
            let m = asm.mass().to_dense();
            let d = asm.skew().to_dense();
            let s = asm.stiffness().to_dense();
            assert_eq!(d.clone() + d.transpose(), DMatrix::zeros(asm.dof(), asm.dof()));
            assert_eq!(m, m.transpose());
            assert_eq!(s, s.transpose());
            assert!((m.sum() - 5.0).abs() < 1e-12);
            for v in csr_apply(asm.skew(), &ones) {
                assert!(v.abs() < 1e-12);
            }
            for v in csr_apply(asm.stiffness(), &ones) {
                assert!(v.abs() < 1e-11);
            }
            // 1ᵀD = -(D 1)ᵀ by skewness
            for j in 0..asm.dof() {
                assert!(d.column(j).sum().abs() < 1e-12);
            }
            assert!(m.clone().cholesky().is_some(), "mass must be SPD for l={l}");
        }
    }

    #[test]
    fn invalid_sizes() {
        assert!(KdvAssembly::new(2, 1, 1.0).is_err());
        assert!(KdvAssembly::new(8, 0, 1.0).is_err());
        assert!(KdvAssembly::new(8, 1, -1.0).is_err());
    }

    #[test]
    fn cnoidal_paper_parameters() {
        let wave = CnoidalWave::default();
        assert!((wave.speed() - 3.2).abs() < 1e-14);
        assert!((wave.eval(0.0, 0.0).unwrap() - 1.8).abs() < 1e-14);
        let period = wave.spatial_period().unwrap();
        for i in 0..20 {
            let x = 0.37 * i as f64;
            let a = wave.eval(x + period, 0.3).unwrap();
            let b = wave.eval(x, 0.3).unwrap();
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn interpolation_reproduces_constants() {
        let p = build_kdv_problem(5, 2, 2.0).unwrap();
        let u = interpolate_initial(&p, |_| 0.75);
        assert!(u.iter().all(|&v| v == 0.75));
        for i in 0..40 {
            assert!((p.assembly().eval(&u, 0.05 * i as f64) - 0.75).abs() < 1e-14);
        }
    }

    #[test]
    fn weak_discrete_gradient_is_symmetric() {
        let p = build_kdv_problem(7, 2, 3.0).unwrap();
        let a: Vec<f64> = (0..p.dim()).map(|i| (i as f64 * 0.7).sin()).collect();
        let b: Vec<f64> = (0..p.dim()).map(|i| (i as f64 * 0.3).cos()).collect();
        let ab = p.dgrad_weak(&a, &b).unwrap();
        let ba = p.dgrad_weak(&b, &a).unwrap();
        for (x, y) in ab.iter().zip(&ba) {
            assert!((x - y).abs() < 1e-13);
        }
    }
}
