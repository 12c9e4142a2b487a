//! Exact ℓ∞-nearest point in the nullspace of a rational matrix.
//!
//! `linf_kernel_project` solves `min ‖x − u‖∞ over {u : A·u = 0}` as the
//! linear program `min t, A·u = 0, −t ≤ x_i − u_i ≤ t`, with a dense
//! exact-rational two-phase simplex under Bland's rule. A combinatorial
//! vertex-enumeration oracle double-checks the optimum on small instances.

use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rat;

/// Dense matrix of exact rationals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalMatrix {
    pub rows: usize,
    pub cols: usize,
    #[serde(with = "crate::rational::rat_string_mat")]
    pub entries: Vec<Vec<Rat>>,
}

impl RationalMatrix {
    pub fn new(entries: Vec<Vec<Rat>>) -> Result<Self> {
        let rows = entries.len();
        let cols = entries.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(Error::Empty("matrix needs positive dimensions"));
        }
        if entries.iter().any(|r| r.len() != cols) {
            return Err(Error::Precondition("ragged matrix rows".into()));
        }
        Ok(RationalMatrix { rows, cols, entries })
    }

    pub fn from_integers(entries: &[Vec<i64>]) -> Result<Self> {
        Self::new(
            entries
                .iter()
                .map(|r| r.iter().map(|&e| crate::rational::rat_int(e)).collect())
                .collect(),
        )
    }

    /// `A · v` for a vector of length `cols`.
    pub fn apply(&self, v: &[Rat]) -> Result<Vec<Rat>> {
        if v.len() != self.cols {
            return Err(Error::Precondition(format!(
                "vector length {} does not match {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok(self
            .entries
            .iter()
            .map(|row| row.iter().zip(v).map(|(a, x)| a * x).fold(Rat::zero(), |s, t| s + t))
            .collect())
    }
}

/// Solution of the ℓ∞ kernel projection.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelProjection {
    #[serde(with = "crate::rational::rat_string_vec")]
    pub u: Vec<Rat>,
    #[serde(with = "crate::rational::rat_string")]
    pub t: Rat,
    /// Indices of tight deviation bounds at the solution: `i < n` means
    /// `x_i − u_i = t`, and `i ≥ n` means `u_{i−n} − x_{i−n} = t`.
    pub basis_certificate: Vec<usize>,
}

pub fn sup_norm(v: &[Rat]) -> Rat {
    v.iter().map(Rat::abs).max().unwrap_or_else(Rat::zero)
}

/// Exact minimizer of `‖x − u‖∞` over the nullspace of `A`.
pub fn linf_kernel_project(a: &RationalMatrix, x: &[Rat]) -> Result<KernelProjection> {
    if x.len() != a.cols {
        return Err(Error::Precondition(format!(
            "vector length {} does not match {} columns",
            x.len(),
            a.cols
        )));
    }
    let n = a.cols;
    let m = a.rows;

    // Standard form over nonnegative variables
    //   z = (u⁺_0..u⁺_{n-1}, u⁻_0..u⁻_{n-1}, t, s_0..s_{2n-1}):
    //   A u⁺ − A u⁻                    = 0
    //   −u⁺_i + u⁻_i − t + s_i        = −x_i      (x_i − u_i ≤ t)
    //   u⁺_i − u⁻_i − t + s_{n+i}     = x_i       (u_i − x_i ≤ t)
    let cols = 4 * n + 1;
    let t_col = 2 * n;
    let mut rows: Vec<Vec<Rat>> = Vec::with_capacity(m + 2 * n);
    let mut rhs: Vec<Rat> = Vec::with_capacity(m + 2 * n);
    for r in 0..m {
        let mut row = vec![Rat::zero(); cols];
        for j in 0..n {
            row[j] = a.entries[r][j].clone();
            row[n + j] = -a.entries[r][j].clone();
        }
        rows.push(row);
        rhs.push(Rat::zero());
    }
    for i in 0..n {
        let mut row = vec![Rat::zero(); cols];
        row[i] = -Rat::one();
        row[n + i] = Rat::one();
        row[t_col] = -Rat::one();
        row[t_col + 1 + i] = Rat::one();
        rows.push(row);
        rhs.push(-x[i].clone());

        let mut row = vec![Rat::zero(); cols];
        row[i] = Rat::one();
        row[n + i] = -Rat::one();
        row[t_col] = -Rat::one();
        row[t_col + 1 + n + i] = Rat::one();
        rows.push(row);
        rhs.push(x[i].clone());
    }
    let mut objective = vec![Rat::zero(); cols];
    objective[t_col] = Rat::one();

    let solution = simplex_two_phase(rows, rhs, objective)?;
    let u: Vec<Rat> = (0..n).map(|i| &solution[i] - &solution[n + i]).collect();
    let t = solution[t_col].clone();

    let mut basis_certificate = Vec::new();
    for i in 0..n {
        if &x[i] - &u[i] == t {
            basis_certificate.push(i);
        }
        if &u[i] - &x[i] == t {
            basis_certificate.push(n + i);
        }
    }
    basis_certificate.sort_unstable();
    basis_certificate.dedup();

    Ok(KernelProjection { u, t, basis_certificate })
}

/// Two-phase dense simplex with Bland's rule. Rows are equality constraints
/// over nonnegative variables; returns an optimal solution vector.
fn simplex_two_phase(
    mut rows: Vec<Vec<Rat>>,
    mut rhs: Vec<Rat>,
    objective: Vec<Rat>,
) -> Result<Vec<Rat>> {
    let m = rows.len();
    let n = objective.len();

    for i in 0..m {
        if rhs[i].is_negative() {
            for v in rows[i].iter_mut() {
                *v = -v.clone();
            }
            rhs[i] = -rhs[i].clone();
        }
    }

    // Append artificial columns forming the phase-one basis.
    for (i, row) in rows.iter_mut().enumerate() {
        for k in 0..m {
            row.push(if k == i { Rat::one() } else { Rat::zero() });
        }
    }
    let total = n + m;
    let mut basis: Vec<usize> = (n..total).collect();

    // Phase-one reduced costs: w_j = −Σ_i rows[i][j], value = −Σ rhs.
    let mut cost = vec![Rat::zero(); total];
    for j in 0..total {
        let mut s = Rat::zero();
        for i in 0..m {
            s += &rows[i][j];
        }
        cost[j] = -s;
    }
    for j in n..total {
        cost[j] = Rat::zero();
    }
    let mut value = -rhs.iter().fold(Rat::zero(), |a, b| a + b);
    run_simplex(&mut rows, &mut rhs, &mut cost, &mut value, &mut basis, total)?;
    if !value.is_zero() {
        return Err(Error::Precondition("linear program is infeasible".into()));
    }

    // Drive artificial variables out of the basis; drop redundant rows.
    let mut keep = vec![true; m];
    for i in 0..m {
        if basis[i] < n {
            continue;
        }
        match (0..n).find(|&j| !rows[i][j].is_zero()) {
            Some(j) => pivot_slice(&mut rows, &mut rhs, &mut cost, &mut value, &mut basis, i, j),
            None => keep[i] = false,
        }
    }
    let mut filtered_rows = Vec::new();
    let mut filtered_rhs = Vec::new();
    let mut filtered_basis = Vec::new();
    for i in 0..m {
        if keep[i] {
            filtered_rows.push(rows[i][..n].to_vec());
            filtered_rhs.push(rhs[i].clone());
            filtered_basis.push(basis[i]);
        }
    }
    let mut rows = filtered_rows;
    let mut rhs = filtered_rhs;
    let mut basis = filtered_basis;

    // Phase-two reduced costs for the real objective.
    let mut cost = objective;
    let mut value = Rat::zero();
    for (i, &b) in basis.iter().enumerate() {
        if !cost[b].is_zero() {
            let factor = cost[b].clone();
            for j in 0..n {
                let adj = &factor * &rows[i][j];
                cost[j] -= adj;
            }
            value -= &factor * &rhs[i];
        }
    }
    run_simplex(&mut rows, &mut rhs, &mut cost, &mut value, &mut basis, n)?;

    let mut solution = vec![Rat::zero(); n];
    for (i, &b) in basis.iter().enumerate() {
        solution[b] = rhs[i].clone();
    }
    Ok(solution)
}

fn run_simplex(
    rows: &mut [Vec<Rat>],
    rhs: &mut [Rat],
    cost: &mut [Rat],
    value: &mut Rat,
    basis: &mut [usize],
    enterable: usize,
) -> Result<()> {
    loop {
        // Bland: smallest-index column with negative reduced cost.
        let Some(entering) = (0..enterable).find(|&j| cost[j].is_negative()) else {
            return Ok(());
        };
        // Ratio test; ties broken by smallest basic variable index.
        let mut leaving: Option<(usize, Rat)> = None;
        for i in 0..rows.len() {
            if rows[i][entering].is_positive() {
                let ratio = &rhs[i] / &rows[i][entering];
                let better = match &leaving {
                    None => true,
                    Some((li, lr)) => &ratio < lr || (&ratio == lr && basis[i] < basis[*li]),
                };
                if better {
                    leaving = Some((i, ratio));
                }
            }
        }
        let Some((leave_row, _)) = leaving else {
            return Err(Error::Precondition("linear program is unbounded".into()));
        };
        pivot_slice(rows, rhs, cost, value, basis, leave_row, entering);
    }
}

fn pivot_slice(
    rows: &mut [Vec<Rat>],
    rhs: &mut [Rat],
    cost: &mut [Rat],
    value: &mut Rat,
    basis: &mut [usize],
    leave_row: usize,
    entering: usize,
) {
    let pivot_value = rows[leave_row][entering].clone();
    for v in rows[leave_row].iter_mut() {
        *v /= &pivot_value;
    }
    rhs[leave_row] /= &pivot_value;

    for i in 0..rows.len() {
        if i == leave_row || rows[i][entering].is_zero() {
            continue;
        }
        let factor = rows[i][entering].clone();
        for j in 0..rows[i].len() {
            let adj = &factor * &rows[leave_row][j];
            rows[i][j] -= adj;
        }
        let adj = &factor * &rhs[leave_row];
        rhs[i] -= adj;
    }
    if !cost[entering].is_zero() {
        let factor = cost[entering].clone();
        for j in 0..cost.len() {
            let adj = &factor * &rows[leave_row][j];
            cost[j] -= adj;
        }
        let adj = &factor * &rhs[leave_row];
        *value -= adj;
    }
    basis[leave_row] = entering;
}

/// Brute-force optimum of the projection LP by enumerating basic points:
/// every choice of `n + 1` active constraints among the `m` kernel equations
/// and the `2n` deviation bounds. Budget-limited to `m + n ≤ 14`.
pub fn kernel_project_oracle(a: &RationalMatrix, x: &[Rat]) -> Result<Rat> {
    let n = a.cols;
    let m = a.rows;
    if m + n > 14 {
        return Err(Error::Budget {
            what: "kernel projection oracle",
            limit: 14,
        });
    }
    if x.len() != n {
        return Err(Error::Precondition("vector length mismatch".into()));
    }

    // Constraints over (u, t) ∈ ℝ^{n+1}:
    //   kernel rows   A_r·u = 0
    //   upper bounds  u_i + t ≥ x_i
    //   lower bounds  −u_i + t ≥ −x_i
    let dim = n + 1;
    let mut normals: Vec<Vec<Rat>> = Vec::new();
    let mut offsets: Vec<Rat> = Vec::new();
    let mut is_equality: Vec<bool> = Vec::new();
    for r in 0..m {
        let mut v = a.entries[r].clone();
        v.push(Rat::zero());
        normals.push(v);
        offsets.push(Rat::zero());
        is_equality.push(true);
    }
    for i in 0..n {
        let mut v = vec![Rat::zero(); dim];
        v[i] = Rat::one();
        v[n] = Rat::one();
        normals.push(v);
        offsets.push(x[i].clone());
        is_equality.push(false);

        let mut v = vec![Rat::zero(); dim];
        v[i] = -Rat::one();
        v[n] = Rat::one();
        normals.push(v);
        offsets.push(-x[i].clone());
        is_equality.push(false);
    }

    let total = normals.len();
    let mut best: Option<Rat> = None;
    let mut subset: Vec<usize> = (0..dim).collect();
    loop {
        if let Some(point) = solve_square(&normals, &offsets, &subset) {
            let feasible = (0..total).all(|c| {
                let lhs: Rat = normals[c]
                    .iter()
                    .zip(&point)
                    .map(|(a, z)| a * z)
                    .fold(Rat::zero(), |s, t| s + t);
                if is_equality[c] {
                    lhs == offsets[c]
                } else {
                    lhs >= offsets[c]
                }
            });
            if feasible {
                let t = point[n].clone();
                if best.as_ref().map_or(true, |b| &t < b) {
                    best = Some(t);
                }
            }
        }
        if !next_combination(&mut subset, total) {
            break;
        }
    }
    best.ok_or_else(|| Error::Precondition("no basic feasible point found".into()))
}

/// Solves the square system `normals[S] · z = offsets[S]`; `None` if singular.
fn solve_square(normals: &[Vec<Rat>], offsets: &[Rat], subset: &[usize]) -> Option<Vec<Rat>> {
    let dim = subset.len();
    let mut mat: Vec<Vec<Rat>> = subset.iter().map(|&c| normals[c].clone()).collect();
    let mut rhs: Vec<Rat> = subset.iter().map(|&c| offsets[c].clone()).collect();

    for col in 0..dim {
        let pivot_row = (col..dim).find(|&r| !mat[r][col].is_zero())?;
        mat.swap(col, pivot_row);
        rhs.swap(col, pivot_row);
        let pv = mat[col][col].clone();
        for v in mat[col].iter_mut() {
            *v /= &pv;
        }
        rhs[col] /= &pv;
        for r in 0..dim {
            if r != col && !mat[r][col].is_zero() {
                let factor = mat[r][col].clone();
                for j in 0..dim {
                    let adj = &factor * &mat[col][j];
                    mat[r][j] -= adj;
                }
                let adj = &factor * &rhs[col];
                rhs[r] -= adj;
            }
        }
    }
    Some(rhs)
}

fn next_combination(subset: &mut [usize], total: usize) -> bool {
    let k = subset.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if subset[i] < total - (k - i) {
            subset[i] += 1;
            for j in (i + 1)..k {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Largest observed ratio `‖x − u(x)‖∞ / ‖A·x‖∞` over sample vectors; an
/// empirical stand-in for the operator-norm constant of the kernel
/// approximation bound. Samples inside the kernel are skipped.
pub fn empirical_constant(a: &RationalMatrix, samples: &[Vec<Rat>]) -> Result<Rat> {
    let mut best: Option<Rat> = None;
    for x in samples {
        let ax = sup_norm(&a.apply(x)?);
        if ax.is_zero() {
            continue;
        }
        let proj = linf_kernel_project(a, x)?;
        let deviation: Vec<Rat> = x.iter().zip(&proj.u).map(|(a, b)| a - b).collect();
        let ratio = sup_norm(&deviation) / ax;
        if best.as_ref().map_or(true, |b| &ratio > b) {
            best = Some(ratio);
        }
    }
    best.ok_or(Error::UndefinedConstant)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    fn vec_int(v: &[i64]) -> Vec<Rat> {
        v.iter().map(|&e| rat_int(e)).collect()
    }

    #[test]
    fn trivial_kernel() {
        let a = RationalMatrix::from_integers(&[vec![5]]).unwrap();
        let p = linf_kernel_project(&a, &vec_int(&[3])).unwrap();
        assert_eq!(p.u, vec_int(&[0]));
        assert_eq!(p.t, rat_int(3));
        assert_eq!(kernel_project_oracle(&a, &vec_int(&[3])).unwrap(), rat_int(3));
    }

    #[test]
    fn full_kernel() {
        let a = RationalMatrix::from_integers(&[vec![0, 0]]).unwrap();
        let x = vec_int(&[1, 7]);
        let p = linf_kernel_project(&a, &x).unwrap();
        assert_eq!(p.u, x);
        assert!(p.t.is_zero());
    }

    #[test]
    fn diagonal_balance() {
        let a = RationalMatrix::from_integers(&[vec![1, 1]]).unwrap();
        let x = vec_int(&[1, 0]);
        let p = linf_kernel_project(&a, &x).unwrap();
        assert_eq!(p.t, rat(1, 2));
        assert_eq!(p.u, vec![rat(1, 2), rat(-1, 2)]);
        assert_eq!(kernel_project_oracle(&a, &x).unwrap(), rat(1, 2));
        assert!(!p.basis_certificate.is_empty());
    }

    #[test]
    fn skewed_balance() {
        let a = RationalMatrix::from_integers(&[vec![2, -3]]).unwrap();
        let x = vec_int(&[1, 0]);
        let oracle = kernel_project_oracle(&a, &x).unwrap();
        assert_eq!(oracle, rat(2, 5));
        let p = linf_kernel_project(&a, &x).unwrap();
        assert_eq!(p.t, rat(2, 5));
        assert_eq!(a.apply(&p.u).unwrap(), vec![rat_int(0)]);
    }

    #[test]
    fn empirical_constant_examples() {
        let a = RationalMatrix::from_integers(&[vec![5]]).unwrap();
        let samples = vec![vec_int(&[1]), vec_int(&[-4]), vec_int(&[7])];
        assert_eq!(empirical_constant(&a, &samples).unwrap(), rat(1, 5));

        let all_kernel = RationalMatrix::from_integers(&[vec![0]]).unwrap();
        assert!(matches!(
            empirical_constant(&all_kernel, &[vec_int(&[2])]),
            Err(Error::UndefinedConstant)
        ));
    }

    #[test]
    fn residual_is_exactly_zero() {
        let a = RationalMatrix::from_integers(&[vec![3, -1, 2], vec![1, 1, 1]]).unwrap();
        let x = vec![rat(7, 3), rat(-2, 5), rat_int(4)];
        let p = linf_kernel_project(&a, &x).unwrap();
        for r in a.apply(&p.u).unwrap() {
            assert!(r.is_zero());
        }
        let deviation: Vec<Rat> = x.iter().zip(&p.u).map(|(a, b)| a - b).collect();
        assert_eq!(sup_norm(&deviation), p.t);
        assert!(p.t <= sup_norm(&x));
    }
}
