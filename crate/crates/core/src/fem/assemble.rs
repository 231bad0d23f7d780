use super::FemError;
use crate::config::BoundaryCondition;
use std::ops::Range;

/// Tridiagonal matrix stored by diagonals; `lower[i]` sits at `(i+1, i)` and
/// `upper[i]` at `(i, i+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn symmetric(diag: Vec<f64>, off: Vec<f64>) -> Self {
        Self {
            lower: off.clone(),
            diag,
            upper: off,
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `out = self · x`.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let n = self.len();
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.lower[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += self.upper[i] * x[i + 1];
            }
            out[i] = s;
        }
    }

    /// `self + s · other`.
    pub fn plus_scaled(&self, other: &Tridiagonal, s: f64) -> Tridiagonal {
        let zip = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + s * y).collect();
        Tridiagonal {
            lower: zip(&self.lower, &other.lower),
            diag: zip(&self.diag, &other.diag),
            upper: zip(&self.upper, &other.upper),
        }
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        let mut s = self.diag[i];
        if i > 0 {
            s += self.lower[i - 1];
        }
        if i + 1 < self.len() {
            s += self.upper[i];
        }
        s
    }

    /// Thomas factorisation, reused for every right-hand side.
    pub fn factor(&self) -> Result<TridiagonalLu, FemError> {
        let n = self.len();
        let mut inv_pivot = vec![0.0; n];
        let mut c = vec![0.0; n.saturating_sub(1)];
        let mut prev_c = 0.0;
        for i in 0..n {
            let pivot = self.diag[i]
                - if i > 0 {
                    self.lower[i - 1] * prev_c
                } else {
                    0.0
                };
            if !(pivot.abs() > f64::MIN_POSITIVE) || !pivot.is_finite() {
                return Err(FemError::SingularSystem { row: i });
            }
            inv_pivot[i] = 1.0 / pivot;
            if i + 1 < n {
                prev_c = self.upper[i] * inv_pivot[i];
                c[i] = prev_c;
            }
        }
        Ok(TridiagonalLu {
            lower: self.lower.clone(),
            inv_pivot,
            c,
        })
    }
}

#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    lower: Vec<f64>,
    inv_pivot: Vec<f64>,
    c: Vec<f64>,
}

impl TridiagonalLu {
    /// Solves in place.
    pub fn solve(&self, rhs: &mut [f64]) {
        let n = self.inv_pivot.len();
        rhs[0] *= self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.lower[i - 1] * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.c[i] * rhs[i + 1];
        }
    }
}

/// Linear-element matrices on the uniform mesh `x_j = j δx`, `j = 0..=M`.
#[derive(Debug, Clone)]
pub struct FemMatrices {
    pub bc: BoundaryCondition,
    pub m_elements: usize,
    pub dx: f64,
    /// Mass matrix over every mesh node; loads are its action on nodal
    /// values of the nonlinearity.
    pub mass_full: Tridiagonal,
    /// Mass and stiffness restricted to the unknowns.
    pub mass: Tridiagonal,
    pub stiffness: Tridiagonal,
    /// `β_c` at the two end nodes (Robin), zero otherwise.
    pub boundary_load: Vec<f64>,
    /// Mesh nodes carrying unknowns: all for Robin, interior for Dirichlet.
    pub unknowns: Range<usize>,
}

impl FemMatrices {
    pub fn assemble(
        m: usize,
        bc: BoundaryCondition,
        beta: f64,
        beta_c: f64,
    ) -> Result<Self, FemError> {
        if m < 3 {
            return Err(FemError::TooFewElements(m));
        }
        let dx = 1.0 / m as f64;
        let nodes = m + 1;
        let mut mass_diag = vec![2.0 * dx / 3.0; nodes];
        mass_diag[0] = dx / 3.0;
        mass_diag[m] = dx / 3.0;
        let mass_full = Tridiagonal::symmetric(mass_diag, vec![dx / 6.0; m]);
        let mut stiff_diag = vec![2.0 / dx; nodes];
        stiff_diag[0] = 1.0 / dx;
        stiff_diag[m] = 1.0 / dx;
        let stiff_full = Tridiagonal::symmetric(stiff_diag, vec![-1.0 / dx; m]);

        let (mass, mut stiffness, boundary_load, unknowns) = match bc {
            BoundaryCondition::Robin => {
                let mut load = vec![0.0; nodes];
                load[0] = beta_c;
                load[m] = beta_c;
                (mass_full.clone(), stiff_full, load, 0..nodes)
            }
            BoundaryCondition::Dirichlet => {
                let r = 1..m;
                (
                    restrict(&mass_full, r.clone()),
                    restrict(&stiff_full, r.clone()),
                    vec![0.0; m - 1],
                    r,
                )
            }
        };
        if bc == BoundaryCondition::Robin {
            stiffness.diag[0] += beta;
            stiffness.diag[m] += beta;
        }
        Ok(Self {
            bc,
            m_elements: m,
            dx,
            mass_full,
            mass,
            stiffness,
            boundary_load,
            unknowns,
        })
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.m_elements).map(|j| j as f64 * self.dx).collect()
    }

    /// Factorised `A + δt B`.
    pub fn system(&self, dt: f64) -> Result<TridiagonalLu, FemError> {
        self.mass.plus_scaled(&self.stiffness, dt).factor()
    }

    /// One implicit Euler step of the linear heat problem with the assembled
    /// boundary terms: `(A + δt B) a' = A a + δt b`. `u` holds all mesh nodes.
    pub(crate) fn heat_step(
        &self,
        lu: &TridiagonalLu,
        dt: f64,
        u: &mut [f64],
        scratch: &mut [f64],
    ) {
        self.mass_full.apply(u, scratch);
        let r = self.unknowns.clone();
        let rhs = &mut scratch[r.clone()];
        for (v, b) in rhs.iter_mut().zip(&self.boundary_load) {
            *v += dt * b;
        }
        lu.solve(rhs);
        u[r.clone()].copy_from_slice(rhs);
    }
}

fn restrict(t: &Tridiagonal, r: Range<usize>) -> Tridiagonal {
    let n = r.len();
    Tridiagonal {
        lower: t.lower[r.start..r.start + n - 1].to_vec(),
        diag: t.diag[r.clone()].to_vec(),
        upper: t.upper[r.start..r.start + n - 1].to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_mesh_dirichlet_entries() {
        let m = FemMatrices::assemble(4, BoundaryCondition::Dirichlet, 1.0, 0.0).unwrap();
        assert_eq!(m.mass.len(), 3);
        assert!((m.mass.diag[1] - 2.0 * 0.25 / 3.0).abs() < 1e-15);
        assert!((m.mass.upper[0] - 0.25 / 6.0).abs() < 1e-15);
        assert!((m.stiffness.diag[1] - 8.0).abs() < 1e-13);
        assert!((m.stiffness.lower[0] + 4.0).abs() < 1e-13);
    }

    #[test]
    fn interior_row_sums() {
        let m = FemMatrices::assemble(10, BoundaryCondition::Robin, 2.0, 2.0).unwrap();
        for i in 1..10 {
            assert!((m.mass.row_sum(i) - 0.1).abs() < 1e-15);
            assert!(m.stiffness.row_sum(i).abs() < 1e-12);
        }
        // Robin ends pick up β.
        assert!((m.stiffness.row_sum(0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_elements() {
        assert!(matches!(
            FemMatrices::assemble(2, BoundaryCondition::Robin, 1.0, 1.0),
            Err(FemError::TooFewElements(2))
        ));
    }

    #[test]
    fn thomas_solves_random_diagonally_dominant_system() {
        let t = Tridiagonal {
            lower: vec![1.0, -0.5, 0.25],
            diag: vec![4.0, 5.0, 3.0, 6.0],
            upper: vec![0.5, 1.5, -1.0],
        };
        let x = [1.0, -2.0, 0.5, 3.0];
        let mut b = [0.0; 4];
        t.apply(&x, &mut b);
        t.factor().unwrap().solve(&mut b);
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn robin_steady_state_is_constant_forcing_balance() {
        // With β_c = β the constant 1 is a fixed point of the heat step.
        let m = FemMatrices::assemble(20, BoundaryCondition::Robin, 1.5, 1.5).unwrap();
        let lu = m.system(0.01).unwrap();
        let mut u = vec![1.0; 21];
        let mut s = vec![0.0; 21];
        m.heat_step(&lu, 0.01, &mut u, &mut s);
        assert!(u.iter().all(|v| (v - 1.0).abs() < 1e-13));
    }
}
