//! Collocation boundary-element solver for the induced-surface-charge
//! integral equation and its nonlinear boundary-condition variant.
//!
//! Panels carry piecewise-constant σ collocated at centroids.  The diagonal
//! of the field operator is closed by the row-sum rule `K_jj = ½ − Σ_k K_jk`,
//! which pins the constant-density eigenvalue of a closed surface and carries
//! the local curvature contribution a flat self-panel drops.

mod mesh;

pub use mesh::{icosphere, SurfaceMesh};

use nalgebra::{DMatrix, DVector, Vector3};
use rayon::prelude::*;
use std::f64::consts::PI;
use std::path::Path;

use crate::error::{Error, Result};
use crate::units::UnitSystem;

/// A point charge inside the surface: position in Å, charge in e₀.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointCharge {
    pub position: Vector3<f64>,
    pub charge: f64,
}

/// Parse a plain-text charge file, one `x y z q` line per charge.
pub fn load_charges(path: &Path) -> Result<Vec<PointCharge>> {
    let text = std::fs::read_to_string(path)?;
    let mut charges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<f64> = line
            .split_whitespace()
            .map(|t| {
                t.parse().map_err(|_| Error::Parse {
                    path: path.display().to_string(),
                    line: i + 1,
                    message: format!("cannot parse '{t}' as a number"),
                })
            })
            .collect::<Result<_>>()?;
        if fields.len() != 4 {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: i + 1,
                message: format!("expected 'x y z q', got {} fields", fields.len()),
            });
        }
        charges.push(PointCharge {
            position: Vector3::new(fields[0], fields[1], fields[2]),
            charge: fields[3],
        });
    }
    Ok(charges)
}

/// Result of a linear or nonlinear solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// Per-panel induced surface charge density, e₀/Å².
    pub sigma: Vec<f64>,
    /// Per-panel reduced normal field at the solution.
    pub e_n: Vec<f64>,
    pub iterations: usize,
    /// Relative residual of the (non)linear system at the solution.
    pub residual: f64,
}

const QUAD_POINTS: usize = 16;
const NEAR_FACTOR: f64 = 2.0;
const LINEAR_TOL: f64 = 1e-12;
const NONLINEAR_TOL: f64 = 1e-8;
const MAX_OUTER: usize = 50;
const MAX_KRYLOV: usize = 250;

/// 16-point triangle rule: centroids of a uniform 4×4 subdivision, equal
/// weights.
fn quad_barycentric() -> [(f64, f64); QUAD_POINTS] {
    let mut pts = [(0.0, 0.0); QUAD_POINTS];
    let mut idx = 0;
    for i in 0..4 {
        for j in 0..4 - i {
            pts[idx] = ((3 * i + 1) as f64 / 12.0, (3 * j + 1) as f64 / 12.0);
            idx += 1;
            if i + j < 3 {
                pts[idx] = ((3 * i + 2) as f64 / 12.0, (3 * j + 2) as f64 / 12.0);
                idx += 1;
            }
        }
    }
    debug_assert_eq!(idx, QUAD_POINTS);
    pts
}

/// The assembled panel problem.
#[derive(Debug, Clone)]
pub struct PanelSystem {
    pub mesh: SurfaceMesh,
    pub charges: Vec<PointCharge>,
    pub eps_in: f64,
    pub eps_out: f64,
    /// Boundary-condition perturbation strength, Å.
    pub alpha: f64,
    /// Dense field operator with row-sum diagonal.
    k_matrix: DMatrix<f64>,
    /// Σ_i q_i ∂G/∂n at each collocation point.
    field_rhs: DVector<f64>,
    /// Quadrature nodes, `QUAD_POINTS` per panel.
    quad_nodes: Vec<Vector3<f64>>,
}

impl PanelSystem {
    pub fn new(
        mesh: SurfaceMesh,
        charges: Vec<PointCharge>,
        eps_in: f64,
        eps_out: f64,
        alpha: f64,
    ) -> Result<Self> {
        if alpha < 0.0 {
            return Err(Error::Domain(format!("alpha must be >= 0, got {alpha}")));
        }
        if eps_out < eps_in {
            return Err(Error::Domain(format!(
                "need eps_out >= eps_in, got {eps_out} < {eps_in}"
            )));
        }
        if !mesh.is_closed() {
            return Err(Error::Validation(format!(
                "mesh is not closed (area-weighted normal defect {:.3e})",
                mesh.closedness_defect()
            )));
        }
        for (i, c) in charges.iter().enumerate() {
            if !mesh.contains(&c.position) {
                return Err(Error::Validation(format!(
                    "charge {i} at {:?} is not strictly inside the surface",
                    (c.position.x, c.position.y, c.position.z)
                )));
            }
        }

        let bary = quad_barycentric();
        let n = mesh.panel_count();
        let mut quad_nodes = Vec::with_capacity(n * QUAD_POINTS);
        for tri in &mesh.triangles {
            let (a, b, c) = (
                mesh.vertices[tri[0]],
                mesh.vertices[tri[1]],
                mesh.vertices[tri[2]],
            );
            for &(u, v) in &bary {
                quad_nodes.push(a + (b - a) * u + (c - a) * v);
            }
        }

        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|j| {
                let cj = mesh.centroids[j];
                let nj = mesh.normals[j];
                let mut row = vec![0.0; n];
                let mut offdiag = 0.0;
                for k in 0..n {
                    if k == j {
                        continue;
                    }
                    let dist = (cj - mesh.centroids[k]).norm();
                    let val = if dist < NEAR_FACTOR * mesh.diameters[k] {
                        let mut acc = 0.0;
                        for q in 0..QUAD_POINTS {
                            let d = cj - quad_nodes[k * QUAD_POINTS + q];
                            let r = d.norm();
                            acc += nj.dot(&d) / (4.0 * PI * r * r * r);
                        }
                        acc / QUAD_POINTS as f64 * mesh.areas[k]
                    } else {
                        let d = cj - mesh.centroids[k];
                        let r = d.norm();
                        nj.dot(&d) / (4.0 * PI * r * r * r) * mesh.areas[k]
                    };
                    row[k] = val;
                    offdiag += val;
                }
                row[j] = 0.5 - offdiag;
                row
            })
            .collect();
        let mut k_matrix = DMatrix::zeros(n, n);
        for (j, row) in rows.into_iter().enumerate() {
            for (k, v) in row.into_iter().enumerate() {
                k_matrix[(j, k)] = v;
            }
        }

        let mut field_rhs = DVector::zeros(n);
        for j in 0..n {
            let cj = mesh.centroids[j];
            let nj = mesh.normals[j];
            let mut acc = 0.0;
            for c in &charges {
                let d = cj - c.position;
                let r = d.norm();
                acc += -c.charge * nj.dot(&d) / (4.0 * PI * r * r * r);
            }
            field_rhs[j] = acc;
        }

        Ok(Self {
            mesh,
            charges,
            eps_in,
            eps_out,
            alpha,
            k_matrix,
            field_rhs,
            quad_nodes,
        })
    }

    fn contrast(&self) -> f64 {
        (self.eps_out - self.eps_in) / self.eps_out
    }

    /// Apply the field operator K to a panel density.
    pub fn apply_k(&self, sigma: &[f64]) -> Vec<f64> {
        let v = DVector::from_column_slice(sigma);
        (&self.k_matrix * v).as_slice().to_vec()
    }

    /// Reduced per-panel normal field E_n = 4π(Σ q ∂G/∂n − Kσ).
    pub fn normal_field(&self, sigma: &DVector<f64>) -> DVector<f64> {
        let k_sigma = &self.k_matrix * sigma;
        4.0 * PI * (&self.field_rhs - k_sigma)
    }

    /// System matvec (diag(1+h) + ε̂(−½I + K))·x.
    fn matvec(&self, x: &DVector<f64>, h: &DVector<f64>) -> DVector<f64> {
        let e_hat = self.contrast();
        let kx = &self.k_matrix * x;
        let mut out = kx * e_hat;
        for j in 0..x.len() {
            out[j] += (1.0 + h[j] - 0.5 * e_hat) * x[j];
        }
        out
    }

    fn rhs(&self) -> DVector<f64> {
        self.contrast() * &self.field_rhs
    }

    fn solution_from(&self, sigma: DVector<f64>, iterations: usize, residual: f64) -> Solution {
        let e_n = self.normal_field(&sigma);
        Solution {
            sigma: sigma.as_slice().to_vec(),
            e_n: e_n.as_slice().to_vec(),
            iterations,
            residual,
        }
    }

    /// Solve the linear boundary integral equation.
    pub fn solve_linear(&self) -> Result<Solution> {
        let b = self.rhs();
        let h = DVector::zeros(b.len());
        if b.norm() == 0.0 {
            return Ok(self.solution_from(DVector::zeros(b.len()), 0, 0.0));
        }
        let x0 = DVector::zeros(b.len());
        let (x, iters, res) = gmres(|v| self.matvec(v, &h), &b, &x0, LINEAR_TOL, MAX_KRYLOV)?;
        Ok(self.solution_from(x, iters, res))
    }

    /// Solve the nonlinear equation by an outer Picard loop that freezes the
    /// perturbation term and re-solves the linear system.
    pub fn solve_nonlinear(&self) -> Result<Solution> {
        let n = self.mesh.panel_count();
        let b = self.rhs();
        if b.norm() == 0.0 {
            return Ok(self.solution_from(DVector::zeros(n), 0, 0.0));
        }
        let mut h = DVector::zeros(n);
        let mut sigma = DVector::zeros(n);
        let mut best_res = f64::INFINITY;
        for outer in 0..MAX_OUTER {
            let (x, _, _) = gmres(|v| self.matvec(v, &h), &b, &sigma, LINEAR_TOL, MAX_KRYLOV)?;
            sigma = x;
            let e_n = self.normal_field(&sigma);
            let mut h_new = DVector::zeros(n);
            for j in 0..n {
                h_new[j] = self.alpha * e_n[j].abs().sqrt();
            }
            let res = (self.matvec(&sigma, &h_new) - &b).norm() / b.norm();
            if res <= NONLINEAR_TOL {
                return Ok(self.solution_from(sigma, outer + 1, res));
            }
            if res > best_res {
                // Oscillation: under-relax the perturbation update.
                h_new = 0.5 * (h + h_new);
            }
            best_res = best_res.min(res);
            h = h_new;
        }
        let e_n = self.normal_field(&sigma);
        let mut h_final = DVector::zeros(n);
        for j in 0..n {
            h_final[j] = self.alpha * e_n[j].abs().sqrt();
        }
        let res = (self.matvec(&sigma, &h_final) - &b).norm() / b.norm();
        Err(Error::NoConvergence {
            context: "nonlinear boundary condition (Picard)".into(),
            iterations: MAX_OUTER,
            residual: res,
        })
    }

    /// Reaction free energy ½ Σ q_i φ(r_i) from a panel density, kJ/mol.
    pub fn reaction_energy(&self, sigma: &[f64], units: &UnitSystem) -> f64 {
        let mut phi_q = 0.0;
        for c in &self.charges {
            let mut phi = 0.0;
            for k in 0..self.mesh.panel_count() {
                let dist = (c.position - self.mesh.centroids[k]).norm();
                let integral = if dist < NEAR_FACTOR * self.mesh.diameters[k] {
                    let mut acc = 0.0;
                    for q in 0..QUAD_POINTS {
                        let r = (c.position - self.quad_nodes[k * QUAD_POINTS + q]).norm();
                        acc += 1.0 / (4.0 * PI * r);
                    }
                    acc / QUAD_POINTS as f64 * self.mesh.areas[k]
                } else {
                    self.mesh.areas[k] / (4.0 * PI * dist)
                };
                phi += sigma[k] * integral;
            }
            phi_q += c.charge * phi;
        }
        0.5 * units.charge_potential_to_energy() * phi_q
    }

    /// Total induced charge Σ σ_k·A_k in e₀.
    pub fn total_charge(&self, sigma: &[f64]) -> f64 {
        sigma
            .iter()
            .zip(&self.mesh.areas)
            .map(|(s, a)| s * a)
            .sum()
    }
}

/// Full-orthogonalization GMRES with Givens rotations.
fn gmres(
    matvec: impl Fn(&DVector<f64>) -> DVector<f64>,
    b: &DVector<f64>,
    x0: &DVector<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<(DVector<f64>, usize, f64)> {
    let b_norm = b.norm();
    let mut r = b - matvec(x0);
    let r_norm = r.norm();
    if r_norm / b_norm <= tol {
        return Ok((x0.clone(), 0, r_norm / b_norm));
    }
    let m = max_iter.min(b.len());
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(m + 1);
    r /= r_norm;
    basis.push(r);
    let mut hess = vec![vec![0.0; m]; m + 1];
    let mut cs = vec![0.0; m];
    let mut sn = vec![0.0; m];
    let mut g = vec![0.0; m + 1];
    g[0] = r_norm;
    let mut k_done = 0;
    let mut rel = r_norm / b_norm;
    for k in 0..m {
        let mut w = matvec(&basis[k]);
        for i in 0..=k {
            let hik = w.dot(&basis[i]);
            hess[i][k] = hik;
            w -= hik * &basis[i];
        }
        let wn = w.norm();
        hess[k + 1][k] = wn;
        // Apply existing rotations.
        for i in 0..k {
            let t = cs[i] * hess[i][k] + sn[i] * hess[i + 1][k];
            hess[i + 1][k] = -sn[i] * hess[i][k] + cs[i] * hess[i + 1][k];
            hess[i][k] = t;
        }
        let denom = (hess[k][k] * hess[k][k] + wn * wn).sqrt();
        cs[k] = hess[k][k] / denom;
        sn[k] = wn / denom;
        hess[k][k] = denom;
        g[k + 1] = -sn[k] * g[k];
        g[k] *= cs[k];
        k_done = k + 1;
        rel = g[k + 1].abs() / b_norm;
        if rel <= tol || wn == 0.0 {
            break;
        }
        basis.push(w / wn);
    }
    // Back substitution.
    let mut y = vec![0.0; k_done];
    for i in (0..k_done).rev() {
        let mut s = g[i];
        for j in i + 1..k_done {
            s -= hess[i][j] * y[j];
        }
        y[i] = s / hess[i][i];
    }
    let mut x = x0.clone();
    for (i, yi) in y.iter().enumerate() {
        x += *yi * &basis[i];
    }
    if rel > tol {
        return Err(Error::NoConvergence {
            context: "gmres".into(),
            iterations: k_done,
            residual: rel,
        });
    }
    Ok((x, k_done, rel))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::UnitSystem;
    use approx::assert_relative_eq;

    fn centered_unit_charge() -> Vec<PointCharge> {
        vec![PointCharge {
            position: Vector3::zeros(),
            charge: 1.0,
        }]
    }

    #[test]
    fn quad_rule_is_a_partition() {
        let pts = quad_barycentric();
        assert_eq!(pts.len(), 16);
        // All points strictly inside the reference triangle.
        for &(u, v) in &pts {
            assert!(u > 0.0 && v > 0.0 && u + v < 1.0);
        }
        // Rule integrates linears exactly: mean barycentric = centroid.
        let (su, sv): (f64, f64) = pts.iter().fold((0.0, 0.0), |(a, b), &(u, v)| (a + u, b + v));
        assert_relative_eq!(su / 16.0, 1.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(sv / 16.0, 1.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn constant_density_eigenvalue() {
        let mesh = icosphere(1.0, 2).unwrap();
        let system = PanelSystem::new(mesh, centered_unit_charge(), 1.0, 80.0, 0.0).unwrap();
        let n = system.mesh.panel_count();
        let k1 = system.apply_k(&vec![1.0; n]);
        for v in k1 {
            assert_relative_eq!(v, 0.5, max_relative = 1e-12);
        }
        let zero = system.apply_k(&vec![0.0; n]);
        assert!(zero.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn no_contrast_means_no_charge() {
        let mesh = icosphere(1.0, 1).unwrap();
        let system = PanelSystem::new(mesh, centered_unit_charge(), 1.0, 1.0, 0.0).unwrap();
        let sol = system.solve_linear().unwrap();
        assert!(sol.sigma.iter().all(|&s| s == 0.0));
        let u = UnitSystem::default();
        assert_eq!(system.reaction_energy(&sol.sigma, &u), 0.0);
    }

    #[test]
    fn alpha_zero_nonlinear_equals_linear() {
        let mesh = icosphere(1.0, 1).unwrap();
        let system = PanelSystem::new(mesh, centered_unit_charge(), 1.0, 78.283, 0.0).unwrap();
        let lin = system.solve_linear().unwrap();
        let non = system.solve_nonlinear().unwrap();
        for (a, b) in lin.sigma.iter().zip(&non.sigma) {
            assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
        }
    }

    #[test]
    fn sign_flip_symmetry() {
        let mesh = icosphere(1.0, 1).unwrap();
        let charges = vec![PointCharge {
            position: Vector3::new(0.0, 0.0, 0.3),
            charge: 1.0,
        }];
        let flipped = vec![PointCharge {
            position: Vector3::new(0.0, 0.0, 0.3),
            charge: -1.0,
        }];
        let u = UnitSystem::default();
        let s1 = PanelSystem::new(mesh.clone(), charges, 1.0, 78.283, 0.7).unwrap();
        let s2 = PanelSystem::new(mesh, flipped, 1.0, 78.283, 0.7).unwrap();
        let a = s1.solve_nonlinear().unwrap();
        let b = s2.solve_nonlinear().unwrap();
        for (x, y) in a.sigma.iter().zip(&b.sigma) {
            assert_relative_eq!(*x, -*y, max_relative = 1e-8, epsilon = 1e-14);
        }
        assert_relative_eq!(
            s1.reaction_energy(&a.sigma, &u),
            s2.reaction_energy(&b.sigma, &u),
            max_relative = 1e-8
        );
    }

    #[test]
    fn charge_outside_surface_rejected() {
        let mesh = icosphere(1.0, 1).unwrap();
        let charges = vec![PointCharge {
            position: Vector3::new(2.0, 0.0, 0.0),
            charge: 1.0,
        }];
        assert!(PanelSystem::new(mesh, charges, 1.0, 80.0, 0.0).is_err());
    }

    #[test]
    fn charge_file_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("q.txt");
        std::fs::write(&path, "# demo\n0 0 0 1.0\n0.1 -0.2 0.3 -1\n\n").unwrap();
        let charges = load_charges(&path).unwrap();
        assert_eq!(charges.len(), 2);
        assert_eq!(charges[1].charge, -1.0);
        std::fs::write(&path, "0 0 1\n").unwrap();
        assert!(load_charges(&path).is_err());
    }

    #[test]
    fn gmres_solves_small_dense_system() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0]);
        let b = DVector::from_column_slice(&[1.0, 2.0, 3.0]);
        let x0 = DVector::zeros(3);
        let (x, _, res) = gmres(|v| &a * v, &b, &x0, 1e-12, 10).unwrap();
        assert!(res <= 1e-12);
        assert!((&a * &x - &b).norm() <= 1e-10);
    }
}
