use super::linalg::BandedSym;
use super::problem::{GridFunction, QrmProblem};
use crate::error::Result;

/// One squared term `weight · (Σ coef·u[k] + offset)²` over the unknowns.
#[derive(Debug, Clone)]
struct Term {
    weight: f64,
    coefs: Vec<(usize, f64)>,
    offset: f64,
    /// Offset of the same term written in `w = u − G`.
    correction_offset: f64,
}

impl Term {
    fn value(&self, u: &[f64]) -> f64 {
        let s: f64 = self.coefs.iter().map(|&(k, c)| c * u[k]).sum::<f64>() + self.offset;
        self.weight * s * s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Part {
    Pde,
    Penalty,
}

/// Regularized least-squares functional of the grid function `u`.
///
/// `J(u) = Σ (P_h u)²·h_x·h_t + β·Σ [(u − G)² + (D_xx(u − G))² + (D_tt(u − G))²]·h_x·h_t`
///
/// `P_h` is a forward difference in time plus the central second difference
/// in space. Nodes on `x = 0`, `x = 1` and `t = 0` carry the Dirichlet and
/// initial data (equal to `G` there) and are eliminated; the unknowns are the
/// interior nodes of every later time level, including the final one. The
/// normal equations `A u = b` are stored in banded form, time-level major.
#[derive(Debug, Clone)]
pub struct QuadraticForm {
    nx: usize,
    nt: usize,
    background: GridFunction,
    terms: Vec<(Part, Term)>,
    matrix: BandedSym,
    rhs: Vec<f64>,
    /// Right-hand side of `A w = b_w` for the correction `w = u − G`,
    /// assembled from `P_h G` so that consistent data give exactly zero.
    correction_rhs: Vec<f64>,
    constant: f64,
}

impl QuadraticForm {
    pub fn n_unknowns(&self) -> usize {
        self.rhs.len()
    }

    /// Unknowns per time level.
    pub fn level_size(&self) -> usize {
        self.nx - 2
    }

    pub fn matrix(&self) -> &BandedSym {
        &self.matrix
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn background(&self) -> &GridFunction {
        &self.background
    }

    pub fn correction_rhs(&self) -> &[f64] {
        &self.correction_rhs
    }

    /// Position of node `(i, j)` in the unknown vector, if it is free.
    pub fn unknown_index(&self, i: usize, j: usize) -> Option<usize> {
        unknown(self.nx, i, j)
    }

    /// Values of `u` at the free nodes.
    pub fn unknowns(&self, u: &GridFunction) -> Vec<f64> {
        let mut v = vec![0.0; self.n_unknowns()];
        for j in 1..self.nt {
            for i in 1..self.nx - 1 {
                v[unknown(self.nx, i, j).unwrap()] = u.at(i, j);
            }
        }
        v
    }

    /// Grid function with free nodes from `v` and fixed nodes from the data.
    pub fn grid_from_unknowns(&self, v: &[f64]) -> GridFunction {
        let mut u = self.background.clone();
        for j in 1..self.nt {
            for i in 1..self.nx - 1 {
                u.set(i, j, v[unknown(self.nx, i, j).unwrap()]);
            }
        }
        u
    }

    /// `J(u)` summed term by term. Fixed nodes are taken from the data.
    pub fn evaluate(&self, u: &GridFunction) -> f64 {
        let v = self.unknowns(u);
        self.terms.iter().map(|(_, t)| t.value(&v)).sum()
    }

    /// `J` through the normal equations: `vᵀAv − 2bᵀv + c`.
    pub fn evaluate_normal(&self, v: &[f64]) -> f64 {
        let mut av = vec![0.0; v.len()];
        self.matrix.mul_vec(v, &mut av);
        let quad: f64 = v.iter().zip(&av).map(|(a, b)| a * b).sum();
        let lin: f64 = v.iter().zip(&self.rhs).map(|(a, b)| a * b).sum();
        quad - 2.0 * lin + self.constant
    }

    /// Discrete L2 norm of `P_h u` over the stencil nodes.
    pub fn residual_norm(&self, u: &GridFunction) -> f64 {
        let v = self.unknowns(u);
        self.terms
            .iter()
            .filter(|(p, _)| *p == Part::Pde)
            .map(|(_, t)| t.value(&v))
            .sum::<f64>()
            .sqrt()
    }

    /// Relative residual `‖Au − b‖/‖b‖` of the normal equations.
    pub fn normal_residual(&self, u: &GridFunction) -> f64 {
        self.matrix.relative_residual(&self.unknowns(u), &self.rhs)
    }
}

fn unknown(nx: usize, i: usize, j: usize) -> Option<usize> {
    (j >= 1 && i >= 1 && i + 1 < nx).then(|| (j - 1) * (nx - 2) + (i - 1))
}

/// Builds the functional for `problem`.
pub fn assemble_functional(problem: &QrmProblem) -> Result<QuadraticForm> {
    problem.validate()?;
    let (nx, nt) = (problem.nx, problem.nt);
    let (hx, ht) = (problem.hx(), problem.ht());
    let cell = hx * ht;
    let beta = problem.beta;
    let g = problem.background_grid();
    let m = nx - 2;
    let n = m * (nt - 1);

    // Splits a stencil applied to (u − shift) into free coefficients and a
    // constant: fixed nodes hold G, `shifted` says whether shift = G.
    let term = |weight: f64, stencil: &[(usize, usize, f64)], shifted: bool| {
        let mut coefs = Vec::with_capacity(stencil.len());
        let mut offset = 0.0;
        let correction_offset = if shifted {
            0.0
        } else {
            stencil.iter().map(|&(i, j, c)| c * g.at(i, j)).sum()
        };
        for &(i, j, c) in stencil {
            match unknown(nx, i, j) {
                Some(k) => {
                    coefs.push((k, c));
                    if shifted {
                        offset -= c * g.at(i, j);
                    }
                }
                None if !shifted => offset += c * g.at(i, j),
                None => {}
            }
        }
        Term {
            weight,
            coefs,
            offset,
            correction_offset,
        }
    };

    let mut terms: Vec<(Part, Term)> = Vec::new();
    for j in 0..nt - 1 {
        for i in 1..nx - 1 {
            let a = problem.diffusion(i) / (hx * hx);
            let stencil = [
                (i, j + 1, 1.0 / ht),
                (i, j, -1.0 / ht - 2.0 * a),
                (i - 1, j, a),
                (i + 1, j, a),
            ];
            terms.push((Part::Pde, term(cell, &stencil, false)));
        }
    }
    let cx = 1.0 / (hx * hx);
    let ct = 1.0 / (ht * ht);
    for j in 1..nt {
        for i in 1..nx - 1 {
            terms.push((Part::Penalty, term(beta * cell, &[(i, j, 1.0)], true)));
            let dxx = [(i - 1, j, cx), (i, j, -2.0 * cx), (i + 1, j, cx)];
            terms.push((Part::Penalty, term(beta * cell, &dxx, true)));
            if j + 1 < nt {
                let dtt = [(i, j - 1, ct), (i, j, -2.0 * ct), (i, j + 1, ct)];
                terms.push((Part::Penalty, term(beta * cell, &dtt, true)));
            }
        }
    }

    let mut matrix = BandedSym::zeros(n, 2 * m);
    let mut rhs = vec![0.0; n];
    let mut correction_rhs = vec![0.0; n];
    let mut constant = 0.0;
    for (_, t) in &terms {
        for (a, &(p, cp)) in t.coefs.iter().enumerate() {
            rhs[p] -= t.weight * t.offset * cp;
            correction_rhs[p] -= t.weight * t.correction_offset * cp;
            // one update per unordered pair; the band stores A[p][q] = A[q][p] once
            for &(q, cq) in &t.coefs[..=a] {
                matrix.add(p, q, t.weight * cp * cq);
            }
        }
        constant += t.weight * t.offset * t.offset;
    }

    Ok(QuadraticForm {
        nx,
        nt,
        background: g,
        terms,
        matrix,
        rhs,
        correction_rhs,
        constant,
    })
}
