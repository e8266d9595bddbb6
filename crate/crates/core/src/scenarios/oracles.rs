//! Reference computations for the scenarios.
//!
//! These work on plain `Vec<f64>` / arrays with textbook algorithms and share
//! no code with the solver paths they are compared against.

/// Gaussian elimination with partial pivoting on a square, possibly singular
/// but consistent system. Pivots below `1e-12` times the largest entry are
/// treated as zero and the matching unknowns set to zero.
pub fn solve_consistent(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let mut pivot_cols = Vec::new();
    let mut row = 0;
    for col in 0..n {
        if row == n {
            break;
        }
        let best = (row..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("nonempty range");
        if a[best][col].abs() <= 1e-12 * scale {
            continue;
        }
        a.swap(row, best);
        b.swap(row, best);
        for i in 0..n {
            if i != row {
                let f = a[i][col] / a[row][col];
                if f != 0.0 {
                    for k in col..n {
                        a[i][k] -= f * a[row][k];
                    }
                    b[i] -= f * b[row];
                }
            }
        }
        pivot_cols.push((row, col));
        row += 1;
    }
    let mut x = vec![0.0; n];
    for (r, c) in pivot_cols {
        x[c] = b[r] / a[r][c];
    }
    x
}

/// Point nearest to `x0` satisfying `rows · x = rhs` (assumed consistent),
/// via the normal equations `C Cᵀ y = rhs - C x0`, `x = x0 + Cᵀ y`.
pub fn nearest_solution(rows: &[Vec<f64>], rhs: &[f64], x0: &[f64]) -> Vec<f64> {
    let m = rows.len();
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    let gram: Vec<Vec<f64>> = (0..m).map(|i| (0..m).map(|j| dot(&rows[i], &rows[j])).collect()).collect();
    let r: Vec<f64> = (0..m).map(|i| rhs[i] - dot(&rows[i], x0)).collect();
    let y = solve_consistent(gram, r);
    let mut x = x0.to_vec();
    for (i, row) in rows.iter().enumerate() {
        for (k, c) in row.iter().enumerate() {
            x[k] += c * y[i];
        }
    }
    x
}

/// Largest residual `|rows · x - rhs|`.
pub fn constraint_residual(rows: &[Vec<f64>], rhs: &[f64], x: &[f64]) -> f64 {
    rows.iter()
        .zip(rhs)
        .map(|(r, b)| (r.iter().zip(x).map(|(a, c)| a * c).sum::<f64>() - b).abs())
        .fold(0.0, f64::max)
}

/// Affine forward operator `x ↦ Lx + b` paired with the normal cone of an
/// affine subspace `U = {x : normals · x = offsets}` whose direction space is
/// spanned by `directions`.
pub struct AffineNormalData {
    pub l: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub normals: Vec<Vec<f64>>,
    pub offsets: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
}

impl AffineNormalData {
    /// Nearest point to `x0` of the perturbed solution set: points with
    /// `x - v ∈ U` and `Lx + b - v` orthogonal to the direction space of `U`.
    pub fn nearest_perturbed_solution(&self, v: &[f64], x0: &[f64]) -> Vec<f64> {
        let (rows, rhs) = self.perturbed_constraints(v);
        nearest_solution(&rows, &rhs, x0)
    }

    pub fn perturbed_constraints(&self, v: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
        let n = self.b.len();
        let dot = |u: &[f64], w: &[f64]| u.iter().zip(w).map(|(a, c)| a * c).sum::<f64>();
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for (nrm, off) in self.normals.iter().zip(&self.offsets) {
            rows.push(nrm.clone());
            rhs.push(off + dot(nrm, v));
        }
        for d in &self.directions {
            // dᵀ L x = dᵀ (v - b)
            let row: Vec<f64> = (0..n).map(|k| (0..n).map(|i| d[i] * self.l[i][k]).sum()).collect();
            rows.push(row);
            let vb: Vec<f64> = v.iter().zip(&self.b).map(|(a, c)| a - c).collect();
            rhs.push(dot(d, &vb));
        }
        (rows, rhs)
    }
}

/// Nearest point of `{(t, 1/t) : t > 0}` to `(a, b)` by a grid over
/// `t ∈ (0, 100]` followed by bisection on the derivative of the squared
/// distance.
pub fn hyperbola_nearest(a: f64, b: f64) -> (f64, f64) {
    let f = |t: f64| (t - a).powi(2) + (1.0 / t - b).powi(2);
    let df = |t: f64| 2.0 * (t - a) - 2.0 * (1.0 / t - b) / (t * t);
    let n = 100_000;
    let h = 100.0 / n as f64;
    let mut best = (h, f(h));
    for i in 2..=n {
        let t = i as f64 * h;
        let v = f(t);
        if v < best.1 {
            best = (t, v);
        }
    }
    let (mut lo, mut hi) = ((best.0 - h).max(1e-12), best.0 + h);
    if df(lo) > 0.0 || df(hi) < 0.0 {
        return (best.0, 1.0 / best.0);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if df(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    (t, 1.0 / t)
}

/// Eigenvalues of a real 2×2 matrix with real spectrum, largest first.
pub fn eigenvalues_2x2(m: [[f64; 2]; 2]) -> (f64, f64) {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    (tr / 2.0 + disc, tr / 2.0 - disc)
}

/// Matrix of `P_V P_U` for lines through the origin with unit directions
/// `u` and `v`.
pub fn line_projector_product(u: [f64; 2], v: [f64; 2]) -> [[f64; 2]; 2] {
    let outer = |d: [f64; 2]| [[d[0] * d[0], d[0] * d[1]], [d[1] * d[0], d[1] * d[1]]];
    let (pu, pv) = (outer(u), outer(v));
    let mut m = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = pv[i][0] * pu[0][j] + pv[i][1] * pu[1][j];
        }
    }
    m
}

/// Nearest points of two disjoint balls `(c1, r1)` and `(c2, r2)`.
pub fn ball_gap_points(c1: &[f64], r1: f64, c2: &[f64], r2: f64) -> (Vec<f64>, Vec<f64>) {
    let d: Vec<f64> = c2.iter().zip(c1).map(|(a, b)| a - b).collect();
    let len = d.iter().map(|x| x * x).sum::<f64>().sqrt();
    let p1 = c1.iter().zip(&d).map(|(c, e)| c + r1 * e / len).collect();
    let p2 = c2.iter().zip(&d).map(|(c, e)| c - r2 * e / len).collect();
    (p1, p2)
}
