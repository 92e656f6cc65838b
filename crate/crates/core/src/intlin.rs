//! Exact linear algebra over the integers and over prime fields.
//!
//! Integer systems go through a Smith normal form `P·A·Q = D`; the unimodular
//! `Q` also yields a basis of the integer kernel. Prime-field systems use
//! plain row reduction.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Dense integer matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Vec<BigInt>>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![vec![BigInt::zero(); cols]; rows] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i][i] = BigInt::one();
        }
        m
    }

    pub fn from_rows<T: Into<BigInt> + Copy>(rows: &[Vec<T>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        IntMatrix {
            rows: rows.len(),
            cols,
            data: rows.iter().map(|r| r.iter().map(|&v| v.into()).collect()).collect(),
        }
    }

    /// Builds a matrix from sparse columns of `(row, value)` pairs.
    pub fn from_sparse_columns(rows: usize, columns: &[Vec<(usize, i32)>]) -> Self {
        let mut m = IntMatrix::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            for &(i, v) in col {
                m.data[i][j] += v;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i][j]
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i]
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        self.data.iter().map(|r| r[j].clone()).collect()
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.data[i][k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    if !other.data[k][j].is_zero() {
                        out.data[i][j] += a * &other.data[k][j];
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, x.len());
        self.data
            .iter()
            .map(|row| {
                row.iter()
                    .zip(x)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }
}

/// `P·A·Q = D` with `P`, `Q` unimodular and `D` diagonal, `d_1 | d_2 | … | d_r`.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub p: IntMatrix,
    pub q: IntMatrix,
    /// Nonzero invariant factors, all positive.
    pub diagonal: Vec<BigInt>,
}

impl SmithForm {
    pub fn rank(&self) -> usize {
        self.diagonal.len()
    }
}

struct Reduction {
    a: Vec<Vec<BigInt>>,
    /// Receives every row operation (identity for `P`, right-hand sides for solving).
    follow: Vec<Vec<BigInt>>,
    /// Receives every column operation; `None` when not needed.
    q: Option<Vec<Vec<BigInt>>>,
    rows: usize,
    cols: usize,
}

impl Reduction {
    fn swap_rows(&mut self, i: usize, j: usize) {
        if i != j {
            self.a.swap(i, j);
            self.follow.swap(i, j);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for row in &mut self.a {
            row.swap(i, j);
        }
        if let Some(q) = &mut self.q {
            for row in q.iter_mut() {
                row.swap(i, j);
            }
        }
    }

    /// `row_i -= k · row_t`
    fn row_axpy(&mut self, i: usize, t: usize, k: &BigInt) {
        let (src, dst) = pick_two(&mut self.a, t, i);
        for (d, s) in dst.iter_mut().zip(src.iter()) {
            if !s.is_zero() {
                *d -= k * s;
            }
        }
        let (src, dst) = pick_two(&mut self.follow, t, i);
        for (d, s) in dst.iter_mut().zip(src.iter()) {
            if !s.is_zero() {
                *d -= k * s;
            }
        }
    }

    /// `col_j -= k · col_t`
    fn col_axpy(&mut self, j: usize, t: usize, k: &BigInt) {
        for row in &mut self.a {
            if !row[t].is_zero() {
                let delta = k * &row[t];
                row[j] -= delta;
            }
        }
        if let Some(q) = &mut self.q {
            for row in q.iter_mut() {
                if !row[t].is_zero() {
                    let delta = k * &row[t];
                    row[j] -= delta;
                }
            }
        }
    }

    fn negate_row(&mut self, t: usize) {
        for v in self.a[t].iter_mut().chain(self.follow[t].iter_mut()) {
            *v = -std::mem::take(v);
        }
    }

    fn min_in_submatrix(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize, BigInt)> = None;
        for i in t..self.rows {
            for j in t..self.cols {
                let v = &self.a[i][j];
                if v.is_zero() {
                    continue;
                }
                if v.is_one() || (-v).is_one() {
                    return Some((i, j));
                }
                let abs = v.abs();
                if best.as_ref().is_none_or(|b| abs < b.2) {
                    best = Some((i, j, abs));
                }
            }
        }
        best.map(|(i, j, _)| (i, j))
    }

    fn diagonalize(&mut self, full_smith: bool) -> Vec<BigInt> {
        let mut diagonal = Vec::new();
        let limit = self.rows.min(self.cols);
        let mut t = 0;
        while t < limit {
            let Some((pi, pj)) = self.min_in_submatrix(t) else { break };
            self.swap_rows(t, pi);
            self.swap_cols(t, pj);
            loop {
                let mut clean = true;
                for i in t + 1..self.rows {
                    if self.a[i][t].is_zero() {
                        continue;
                    }
                    let k = &self.a[i][t] / &self.a[t][t];
                    if !k.is_zero() {
                        self.row_axpy(i, t, &k);
                    }
                    if !self.a[i][t].is_zero() {
                        clean = false;
                    }
                }
                if !clean {
                    let i = (t..self.rows)
                        .filter(|&i| !self.a[i][t].is_zero())
                        .min_by_key(|&i| self.a[i][t].abs())
                        .expect("column has a nonzero entry");
                    self.swap_rows(t, i);
                    continue;
                }
                for j in t + 1..self.cols {
                    if self.a[t][j].is_zero() {
                        continue;
                    }
                    let k = &self.a[t][j] / &self.a[t][t];
                    if !k.is_zero() {
                        self.col_axpy(j, t, &k);
                    }
                    if !self.a[t][j].is_zero() {
                        clean = false;
                    }
                }
                if !clean {
                    let j = (t..self.cols)
                        .filter(|&j| !self.a[t][j].is_zero())
                        .min_by_key(|&j| self.a[t][j].abs())
                        .expect("row has a nonzero entry");
                    self.swap_cols(t, j);
                    continue;
                }
                if full_smith {
                    let d = self.a[t][t].clone();
                    let offender = (t + 1..self.rows)
                        .find(|&i| (t + 1..self.cols).any(|j| !self.a[i][j].is_multiple_of(&d)));
                    if let Some(i) = offender {
                        // row_t += row_i brings a non-multiple into row t
                        self.row_axpy(t, i, &BigInt::from(-1));
                        continue;
                    }
                }
                break;
            }
            if self.a[t][t].is_negative() {
                self.negate_row(t);
            }
            diagonal.push(self.a[t][t].clone());
            t += 1;
        }
        diagonal
    }
}

fn pick_two<T>(v: &mut [T], src: usize, dst: usize) -> (&T, &mut T) {
    assert_ne!(src, dst);
    if src < dst {
        let (lo, hi) = v.split_at_mut(dst);
        (&lo[src], &mut hi[0])
    } else {
        let (lo, hi) = v.split_at_mut(src);
        (&hi[0], &mut lo[dst])
    }
}

pub fn smith_normal_form(a: &IntMatrix) -> SmithForm {
    let mut red = Reduction {
        a: a.data.clone(),
        follow: IntMatrix::identity(a.rows).data,
        q: Some(IntMatrix::identity(a.cols).data),
        rows: a.rows,
        cols: a.cols,
    };
    let diagonal = red.diagonalize(true);
    SmithForm {
        p: IntMatrix { rows: a.rows, cols: a.rows, data: red.follow },
        q: IntMatrix { rows: a.cols, cols: a.cols, data: red.q.unwrap() },
        diagonal,
    }
}

/// An integer solution of `A·x = b`, or `None` if there is none.
pub fn solve_integer(a: &IntMatrix, b: &[BigInt]) -> Option<Vec<BigInt>> {
    assert_eq!(a.rows, b.len());
    let mut red = Reduction {
        a: a.data.clone(),
        follow: b.iter().map(|v| vec![v.clone()]).collect(),
        q: Some(IntMatrix::identity(a.cols).data),
        rows: a.rows,
        cols: a.cols,
    };
    // a diagonal form is enough for solvability; divisibility is not needed
    let diagonal = red.diagonalize(false);
    let c: Vec<BigInt> = red.follow.into_iter().map(|mut r| r.pop().unwrap()).collect();
    let rank = diagonal.len();
    if c[rank..].iter().any(|v| !v.is_zero()) {
        return None;
    }
    let mut y = vec![BigInt::zero(); a.cols];
    for i in 0..rank {
        let (quot, rem) = c[i].div_rem(&diagonal[i]);
        if !rem.is_zero() {
            return None;
        }
        y[i] = quot;
    }
    let q = IntMatrix { rows: a.cols, cols: a.cols, data: red.q.unwrap() };
    Some(q.mul_vec(&y))
}

/// Lattice basis in row-echelon form: row `i` has its first nonzero entry
/// (positive) at column `pivots[i]`, and pivots strictly increase.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EchelonBasis {
    pub rows: Vec<Vec<BigInt>>,
    pub pivots: Vec<usize>,
}

impl EchelonBasis {
    pub fn rank(&self) -> usize {
        self.rows.len()
    }
}

/// Basis of the integer kernel `{x ∈ Z^n : A·x = 0}` in echelon form.
pub fn integer_kernel(a: &IntMatrix) -> EchelonBasis {
    let mut red = Reduction {
        a: a.data.clone(),
        follow: vec![Vec::new(); a.rows],
        q: Some(IntMatrix::identity(a.cols).data),
        rows: a.rows,
        cols: a.cols,
    };
    let rank = red.diagonalize(false).len();
    let q = red.q.unwrap();
    let basis: Vec<Vec<BigInt>> = (rank..a.cols).map(|j| q.iter().map(|row| row[j].clone()).collect()).collect();
    echelonize(basis, a.cols)
}

/// Row-echelon (Hermite-style) form of the lattice spanned by `rows`.
pub fn echelonize(mut rows: Vec<Vec<BigInt>>, ncols: usize) -> EchelonBasis {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r == rows.len() {
            break;
        }
        loop {
            let Some(best) = (r..rows.len())
                .filter(|&i| !rows[i][col].is_zero())
                .min_by_key(|&i| rows[i][col].abs())
            else {
                break;
            };
            rows.swap(r, best);
            let mut clean = true;
            for i in r + 1..rows.len() {
                if rows[i][col].is_zero() {
                    continue;
                }
                let k = &rows[i][col] / &rows[r][col];
                axpy(&mut rows, i, r, &k);
                if !rows[i][col].is_zero() {
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
        if r < rows.len() && !rows[r][col].is_zero() {
            if rows[r][col].is_negative() {
                for v in rows[r].iter_mut() {
                    *v = -std::mem::take(v);
                }
            }
            for i in 0..r {
                let k = rows[i][col].div_floor(&rows[r][col]);
                if !k.is_zero() {
                    axpy(&mut rows, i, r, &k);
                }
            }
            pivots.push(col);
            r += 1;
        }
    }
    rows.truncate(r);
    EchelonBasis { rows, pivots }
}

fn axpy(rows: &mut [Vec<BigInt>], dst: usize, src: usize, k: &BigInt) {
    let (s, d) = pick_two(rows, src, dst);
    for (x, y) in d.iter_mut().zip(s.iter()) {
        if !y.is_zero() {
            *x -= k * y;
        }
    }
}

fn inv_mod(a: u64, p: u64) -> u64 {
    // Fermat: a^(p-2) mod p
    let mut result = 1u64;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    result
}

fn to_residue(v: &BigInt, p: u64) -> u64 {
    let r = v.mod_floor(&BigInt::from(p));
    r.try_into().expect("residue fits in u64")
}

struct FieldReduction {
    a: Vec<Vec<u64>>,
    b: Vec<u64>,
    pivots: Vec<usize>,
    p: u64,
}

fn row_reduce_mod_p(a: &IntMatrix, b: Option<&[BigInt]>, p: u32) -> FieldReduction {
    let p = p as u64;
    let mut m: Vec<Vec<u64>> = a.data.iter().map(|r| r.iter().map(|v| to_residue(v, p)).collect()).collect();
    let mut rhs: Vec<u64> = match b {
        Some(b) => b.iter().map(|v| to_residue(v, p)).collect(),
        None => vec![0; a.rows],
    };
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..a.cols {
        if r == a.rows {
            break;
        }
        let Some(pr) = (r..a.rows).find(|&i| m[i][col] != 0) else { continue };
        m.swap(r, pr);
        rhs.swap(r, pr);
        let inv = inv_mod(m[r][col], p);
        for v in m[r].iter_mut() {
            *v = *v * inv % p;
        }
        rhs[r] = rhs[r] * inv % p;
        for i in 0..a.rows {
            if i == r || m[i][col] == 0 {
                continue;
            }
            let k = m[i][col];
            let (src, dst) = pick_two(&mut m, r, i);
            for (d, s) in dst.iter_mut().zip(src.iter()) {
                if *s != 0 {
                    *d = (*d + p - k * s % p) % p;
                }
            }
            rhs[i] = (rhs[i] + p - k * rhs[r] % p) % p;
        }
        pivots.push(col);
        r += 1;
    }
    FieldReduction { a: m, b: rhs, pivots, p }
}

/// A solution of `A·x = b` over `Z/pZ` (free variables set to zero).
pub fn solve_mod_p(a: &IntMatrix, b: &[BigInt], p: u32) -> Option<Vec<u64>> {
    assert_eq!(a.rows, b.len());
    let red = row_reduce_mod_p(a, Some(b), p);
    let rank = red.pivots.len();
    if red.b[rank..].iter().any(|&v| v != 0) {
        return None;
    }
    let mut x = vec![0u64; a.cols];
    for (i, &c) in red.pivots.iter().enumerate() {
        x[c] = red.b[i];
    }
    Some(x)
}

/// Basis of the kernel of `A` over `Z/pZ`, one vector per free column.
pub fn kernel_mod_p(a: &IntMatrix, p: u32) -> Vec<Vec<u64>> {
    let red = row_reduce_mod_p(a, None, p);
    let pivot_set: std::collections::BTreeSet<usize> = red.pivots.iter().copied().collect();
    (0..a.cols)
        .filter(|c| !pivot_set.contains(c))
        .map(|free| {
            let mut v = vec![0u64; a.cols];
            v[free] = 1;
            for (i, &pc) in red.pivots.iter().enumerate() {
                v[pc] = (red.p - red.a[i][free]) % red.p;
            }
            v
        })
        .collect()
}

/// Rank of `A` over `Z/pZ`.
pub fn rank_mod_p(a: &IntMatrix, p: u32) -> usize {
    row_reduce_mod_p(a, None, p).pivots.len()
}
