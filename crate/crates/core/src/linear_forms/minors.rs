//! Extended vectors, minor vectors and the determinants `D_ν` with their gradients.

use serde::Serialize;

use super::LinearFormsError;

pub const ORTHONORMAL_TOLERANCE: f64 = 1e-10;

/// Largest grid accepted by [`minor_sup_on_ball`] and [`ball_grid`].
pub const MAX_GRID_POINTS: u128 = 1 << 24;

/// Floating point `M×N` matrix; also a point of `ℝ^H` in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealMatrix {
    pub m: usize,
    pub n: usize,
    pub data: Vec<f64>,
}

impl RealMatrix {
    pub fn new(m: usize, n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), m * n, "matrix data length");
        RealMatrix { m, n, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn l(&self) -> usize {
        self.m + self.n
    }

    /// `self + t·dir` with `dir ∈ ℝ^H`.
    pub fn offset(&self, dir: &[f64], t: f64) -> RealMatrix {
        RealMatrix::new(self.m, self.n, self.data.iter().zip(dir).map(|(a, d)| a + t * d).collect())
    }
}

/// `A_i = (γ_i1, …, γ_iN, e_i)` and `B_j = (γ_1j, …, γ_Mj, e_j)`, all in `ℝ^L`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedVectors {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
}

impl ExtendedVectors {
    pub fn new(g: &RealMatrix) -> Self {
        let (m, n) = (g.m, g.n);
        let a = (0..m)
            .map(|i| {
                let mut v: Vec<f64> = (0..n).map(|j| g.get(i, j)).collect();
                v.extend((0..m).map(|k| if k == i { 1.0 } else { 0.0 }));
                v
            })
            .collect();
        let b = (0..n)
            .map(|j| {
                let mut v: Vec<f64> = (0..m).map(|i| g.get(i, j)).collect();
                v.extend((0..n).map(|k| if k == j { 1.0 } else { 0.0 }));
                v
            })
            .collect();
        ExtendedVectors { a, b }
    }
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Fails when `ys` are not orthonormal vectors of length `l`.
pub fn check_orthonormal(ys: &[Vec<f64>], l: usize) -> Result<(), LinearFormsError> {
    let mut worst = 0.0f64;
    for (a, ya) in ys.iter().enumerate() {
        if ya.len() != l {
            return Err(LinearFormsError::Dimension {
                expected: l,
                got: ya.len(),
            });
        }
        for (b, yb) in ys.iter().enumerate().skip(a) {
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((dot(ya, yb) - target).abs());
        }
    }
    if worst > ORTHONORMAL_TOLERANCE || worst.is_nan() {
        return Err(LinearFormsError::NotOrthonormal(worst));
    }
    Ok(())
}

/// `(B_i·Y_j)` with `i < N`, `j < ys.len()`.
pub fn pairing_matrix(g: &RealMatrix, ys: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let ext = ExtendedVectors::new(g);
    ext.b.iter().map(|b| ys.iter().map(|y| dot(b, y)).collect()).collect()
}

fn pairing_matrix_primed(g: &RealMatrix, ys: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let ext = ExtendedVectors::new(g);
    ext.a.iter().map(|a| ys.iter().map(|y| dot(a, y)).collect()).collect()
}

/// Determinant by Gaussian elimination with partial pivoting.
pub(crate) fn det(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut sign = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .expect("nonempty range");
        if a[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            a.swap(pivot, col);
            sign = -sign;
        }
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    sign * (0..n).map(|i| a[i][i]).product::<f64>()
}

fn submatrix(p: &[Vec<f64>], rows: &[usize], cols: &[usize]) -> Vec<Vec<f64>> {
    rows.iter().map(|&i| cols.iter().map(|&j| p[i][j]).collect()).collect()
}

/// Signed cofactor of entry `(r, c)` of a square matrix.
fn cofactor(sub: &[Vec<f64>], r: usize, c: usize) -> f64 {
    let minor: Vec<Vec<f64>> = sub
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != r)
        .map(|(_, row)| row.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, &v)| v).collect())
        .collect();
    let s = if (r + c).is_multiple_of(2) { 1.0 } else { -1.0 };
    s * det(minor)
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    (0..k.min(n - k)).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// `max_{0≤ν≤n} C(n, ν)`.
pub fn max_binomial(n: usize) -> u64 {
    binomial(n, n / 2)
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub(crate) fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Absolute `ν×ν` minors, lexicographic in `(rows, cols)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinorVector {
    pub nu: usize,
    pub entries: Vec<f64>,
}

impl MinorVector {
    pub fn unit(nu: usize) -> Self {
        MinorVector { nu, entries: vec![1.0] }
    }

    /// Euclidean length.
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_entry(&self) -> f64 {
        self.entries.iter().copied().fold(0.0, f64::max)
    }
}

fn minors_of(p: &[Vec<f64>], size: usize, nu: usize) -> MinorVector {
    if nu == 0 {
        return MinorVector::unit(0);
    }
    let sets = subsets(size, nu);
    let mut entries = Vec::with_capacity(sets.len() * sets.len());
    for rows in &sets {
        for cols in &sets {
            entries.push(det(submatrix(p, rows, cols)).abs());
        }
    }
    MinorVector { nu, entries }
}

fn check_frame(g: &RealMatrix, ys: &[Vec<f64>], count: usize, nu: usize) -> Result<(), LinearFormsError> {
    if ys.len() != count {
        return Err(LinearFormsError::Dimension {
            expected: count,
            got: ys.len(),
        });
    }
    if nu > count {
        return Err(LinearFormsError::Order { nu, max: count });
    }
    check_orthonormal(ys, g.l())
}

/// `M⃗_ν(A)` for an orthonormal frame `Y_1, …, Y_N`; `ν = 0` gives `(1)`.
pub fn minor_vector(g: &RealMatrix, ys: &[Vec<f64>], nu: usize) -> Result<MinorVector, LinearFormsError> {
    check_frame(g, ys, g.n, nu)?;
    Ok(minors_of(&pairing_matrix(g, ys), g.n, nu))
}

/// `M⃗'_ν(A)` built from the `A_i` and a frame `Y_1, …, Y_M`.
pub fn minor_vector_primed(g: &RealMatrix, ys: &[Vec<f64>], nu: usize) -> Result<MinorVector, LinearFormsError> {
    check_frame(g, ys, g.m, nu)?;
    Ok(minors_of(&pairing_matrix_primed(g, ys), g.m, nu))
}

/// `det(B_i·Y_j)` over the given row and column index sets.
pub fn d_nu_indexed(g: &RealMatrix, ys: &[Vec<f64>], rows: &[usize], cols: &[usize]) -> f64 {
    debug_assert_eq!(rows.len(), cols.len());
    det(submatrix(&pairing_matrix(g, ys), rows, cols))
}

/// `D_ν(A) = det(B_i·Y_j)_{1≤i,j≤ν}`.
pub fn d_nu(g: &RealMatrix, ys: &[Vec<f64>], nu: usize) -> f64 {
    let idx: Vec<usize> = (0..nu).collect();
    d_nu_indexed(g, ys, &idx, &idx)
}

/// Gradient of [`d_nu_indexed`] with respect to `γ`, row-major in `ℝ^H`.
///
/// `∂/∂γ_ki det = Σ_j cof(i, j)·Y_j[k]`, since `B_i·Y_j = Σ_k γ_ki Y_j[k] + Y_j[M+i]`.
pub fn grad_d_nu_indexed(g: &RealMatrix, ys: &[Vec<f64>], rows: &[usize], cols: &[usize]) -> Vec<f64> {
    let sub = submatrix(&pairing_matrix(g, ys), rows, cols);
    let mut grad = vec![0.0; g.m * g.n];
    for (r, &i) in rows.iter().enumerate() {
        for (c, &j) in cols.iter().enumerate() {
            let cof = cofactor(&sub, r, c);
            for k in 0..g.m {
                grad[k * g.n + i] += cof * ys[j][k];
            }
        }
    }
    grad
}

pub fn grad_d_nu(g: &RealMatrix, ys: &[Vec<f64>], nu: usize) -> Vec<f64> {
    let idx: Vec<usize> = (0..nu).collect();
    grad_d_nu_indexed(g, ys, &idx, &idx)
}

/// Grid `center + r·k/2^depth`, `k ∈ [-2^depth, 2^depth]^H`, restricted to the ball.
pub fn ball_grid(center: &RealMatrix, radius: f64, depth: u32) -> Result<Vec<RealMatrix>, LinearFormsError> {
    let h = center.data.len();
    let steps = 1i64 << depth;
    let side = (2 * steps + 1) as u128;
    let total = side.checked_pow(h as u32).unwrap_or(u128::MAX);
    if total > MAX_GRID_POINTS {
        return Err(LinearFormsError::Overflow(total, MAX_GRID_POINTS));
    }
    if radius == 0.0 {
        return Ok(vec![center.clone()]);
    }
    let limit = (steps * steps) as i128;
    let mut out = Vec::new();
    let mut k = vec![-steps; h];
    loop {
        let norm: i128 = k.iter().map(|&v| (v as i128) * (v as i128)).sum();
        if norm <= limit {
            let data = center
                .data
                .iter()
                .zip(&k)
                .map(|(c, &v)| c + radius * v as f64 / steps as f64)
                .collect();
            out.push(RealMatrix::new(center.m, center.n, data));
        }
        let mut pos = 0;
        loop {
            if pos == h {
                return Ok(out);
            }
            if k[pos] < steps {
                k[pos] += 1;
                break;
            }
            k[pos] = -steps;
            pos += 1;
        }
    }
}

/// Grid estimate of `M_ν(B) = max_{A∈B} |M⃗_ν(A)|` with a Lipschitz gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinorSup {
    /// Largest sampled value; a lower bound for `M_ν(B)`.
    pub estimate: f64,
    /// `upper − estimate`.
    pub gap: f64,
    /// Upper bound for `M_ν(B)`.
    pub upper: f64,
    pub samples: usize,
}

/// Every point of the ball lies within `h√H` of a grid point inside it, and
/// `|M⃗_ν|` is Lipschitz with constant `N·max C(N,·)·M_{ν-1}(B)` for an
/// orthonormal frame, so `estimate + h√H·N·max C(N,·)·upper_{ν-1}` bounds `M_ν(B)`.
pub fn minor_sup_on_ball(
    center: &RealMatrix,
    radius: f64,
    ys: &[Vec<f64>],
    nu: usize,
    grid_depth: u32,
) -> Result<MinorSup, LinearFormsError> {
    check_frame(center, ys, center.n, nu)?;
    let grid = ball_grid(center, radius, grid_depth)?;
    let lip = center.n as f64 * max_binomial(center.n) as f64;
    let spacing = radius / (1u64 << grid_depth) as f64 * (center.data.len() as f64).sqrt();
    let mut upper_prev = 1.0;
    let mut result = MinorSup {
        estimate: 1.0,
        gap: 0.0,
        upper: 1.0,
        samples: grid.len(),
    };
    for k in 1..=nu {
        let estimate = grid
            .iter()
            .map(|g| minors_of(&pairing_matrix(g, ys), center.n, k).norm())
            .fold(0.0, f64::max);
        let gap = spacing * lip * upper_prev;
        result = MinorSup {
            estimate,
            gap,
            upper: estimate + gap,
            samples: grid.len(),
        };
        upper_prev = result.upper;
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_frame(m: usize, n: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|j| (0..m + n).map(|k| if k == m + j { 1.0 } else { 0.0 }).collect())
            .collect()
    }

    #[test]
    fn extended_vectors_layout() {
        let g = RealMatrix::new(2, 3, vec![1., 2., 3., 4., 5., 6.]);
        let e = ExtendedVectors::new(&g);
        assert_eq!(e.a[1], vec![4., 5., 6., 0., 1.]);
        assert_eq!(e.b[2], vec![3., 6., 0., 0., 1.]);
    }

    #[test]
    fn order_zero_and_identity_block() {
        let g = RealMatrix::new(2, 2, vec![0.3, -1.2, 0.7, 2.0]);
        let ys = identity_frame(2, 2);
        assert_eq!(minor_vector(&g, &ys, 0).unwrap().entries, vec![1.0]);
        let top = minor_vector(&g, &ys, 2).unwrap();
        assert_eq!(top.entries, vec![1.0]);
        assert_eq!(d_nu(&g, &ys, 2), 1.0);
        assert!(grad_d_nu(&g, &ys, 2).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn order_one_entries_are_pairings() {
        let g = RealMatrix::new(1, 2, vec![0.4, -0.9]);
        let s = 0.5f64.sqrt();
        let ys = vec![vec![s, s, 0.0], vec![0.0, 0.0, 1.0]];
        let mv = minor_vector(&g, &ys, 1).unwrap();
        let p = pairing_matrix(&g, &ys);
        let direct: Vec<f64> = p.iter().flatten().map(|v| v.abs()).collect();
        assert_eq!(mv.entries, direct);
    }

    #[test]
    fn rejects_bad_frames() {
        let g = RealMatrix::new(1, 1, vec![0.5]);
        assert!(matches!(
            minor_vector(&g, &[vec![1.0, 1.0]], 1),
            Err(LinearFormsError::NotOrthonormal(_))
        ));
        assert!(minor_vector(&g, &[vec![1.0, 0.0]], 2).is_err());
        assert!(minor_vector(&g, &[vec![1.0]], 1).is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(max_binomial(4), 6);
        assert_eq!(max_binomial(1), 1);
        assert_eq!(subsets(4, 2).len(), 6);
        assert_eq!(subsets(3, 0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn sup_on_degenerate_ball_and_refinement() {
        let g = RealMatrix::new(1, 2, vec![0.2, 0.6]);
        let s = 0.5f64.sqrt();
        let ys = vec![vec![s, 0.0, s], vec![0.0, 1.0, 0.0]];
        let exact = minor_vector(&g, &ys, 2).unwrap().norm();
        let point = minor_sup_on_ball(&g, 0.0, &ys, 2, 2).unwrap();
        assert_eq!(point.estimate, exact);
        assert_eq!(minor_sup_on_ball(&g, 0.3, &ys, 0, 2).unwrap().estimate, 1.0);
        let mut prev = 0.0;
        for d in 0..5 {
            let e = minor_sup_on_ball(&g, 0.3, &ys, 1, d).unwrap();
            assert!(e.estimate >= prev);
            assert!(e.upper >= e.estimate);
            prev = e.estimate;
        }
    }
}
