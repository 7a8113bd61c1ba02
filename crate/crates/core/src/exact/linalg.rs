//! Exact dense linear algebra over Z and Q at desk scale: Smith normal form,
//! Gaussian elimination, determinants, kernels and characteristic polynomials.

use num::rational::BigRational;
use num::{BigInt, Integer, One, Signed, Zero};

/// Row-major rational matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QMat {
    pub rows: usize,
    pub cols: usize,
    pub a: Vec<BigRational>,
}

impl QMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMat {
            rows,
            cols,
            a: vec![BigRational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigRational::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> BigRational) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn mul(&self, other: &QMat) -> QMat {
        assert_eq!(self.cols, other.rows);
        let mut out = QMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self[(i, k)].is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let t = &self[(i, k)] * &other[(k, j)];
                    out[(i, j)] += t;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| &self[(i, j)] * &v[j])
                    .fold(BigRational::zero(), |a, b| a + b)
            })
            .collect()
    }

    /// Determinant by fraction-aware Gaussian elimination.
    pub fn det(&self) -> BigRational {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        let mut det = BigRational::one();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !m[(r, col)].is_zero());
            let pivot = match pivot {
                Some(p) => p,
                None => return BigRational::zero(),
            };
            if pivot != col {
                for j in 0..n {
                    let t = m[(pivot, j)].clone();
                    m[(pivot, j)] = m[(col, j)].clone();
                    m[(col, j)] = t;
                }
                det = -det;
            }
            let pv = m[(col, col)].clone();
            det *= pv.clone();
            for r in col + 1..n {
                if m[(r, col)].is_zero() {
                    continue;
                }
                let f = &m[(r, col)] / &pv;
                for j in col..n {
                    let t = &f * &m[(col, j)];
                    m[(r, j)] -= t;
                }
            }
        }
        det
    }

    /// Solve A x = b; `None` when the system is singular or inconsistent.
    pub fn solve(&self, b: &[BigRational]) -> Option<Vec<BigRational>> {
        assert_eq!(self.rows, b.len());
        let (rows, cols) = (self.rows, self.cols);
        let mut m = self.clone();
        let mut rhs = b.to_vec();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..cols {
            let p = (row..rows).find(|&r| !m[(r, col)].is_zero());
            let p = match p {
                Some(p) => p,
                None => continue,
            };
            if p != row {
                for j in 0..cols {
                    let t = m[(p, j)].clone();
                    m[(p, j)] = m[(row, j)].clone();
                    m[(row, j)] = t;
                }
                rhs.swap(p, row);
            }
            let pv = m[(row, col)].clone();
            for r in 0..rows {
                if r == row || m[(r, col)].is_zero() {
                    continue;
                }
                let f = &m[(r, col)] / &pv;
                for j in col..cols {
                    let t = &f * &m[(row, j)];
                    m[(r, j)] -= t;
                }
                let t = &f * &rhs[row];
                rhs[r] -= t;
            }
            pivots.push((row, col));
            row += 1;
            if row == rows {
                break;
            }
        }
        // inconsistency check
        for r in row..rows {
            if !rhs[r].is_zero() {
                return None;
            }
        }
        if pivots.len() < cols {
            return None; // underdetermined; caller wanted a unique solution
        }
        let mut x = vec![BigRational::zero(); cols];
        for (r, c) in pivots {
            x[c] = &rhs[r] / &m[(r, c)];
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<QMat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut out = QMat::zeros(n, n);
        for j in 0..n {
            let mut e = vec![BigRational::zero(); n];
            e[j] = BigRational::one();
            let col = self.solve(&e)?;
            for i in 0..n {
                out[(i, j)] = col[i].clone();
            }
        }
        Some(out)
    }

    /// Basis of the right kernel.
    pub fn kernel(&self) -> Vec<Vec<BigRational>> {
        let (rows, cols) = (self.rows, self.cols);
        let mut m = self.clone();
        let mut pivots: Vec<(usize, usize)> = Vec::new();
        let mut row = 0;
        for col in 0..cols {
            let p = (row..rows).find(|&r| !m[(r, col)].is_zero());
            let p = match p {
                Some(p) => p,
                None => continue,
            };
            if p != row {
                for j in 0..cols {
                    let t = m[(p, j)].clone();
                    m[(p, j)] = m[(row, j)].clone();
                    m[(row, j)] = t;
                }
            }
            let pv = m[(row, col)].clone();
            for r in 0..rows {
                if r == row || m[(r, col)].is_zero() {
                    continue;
                }
                let f = &m[(r, col)] / &pv;
                for j in col..cols {
                    let t = &f * &m[(row, j)];
                    m[(r, j)] -= t;
                }
            }
            pivots.push((row, col));
            row += 1;
            if row == rows {
                break;
            }
        }
        let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
        let free_cols: Vec<usize> = (0..cols).filter(|c| !pivot_cols.contains(c)).collect();
        let mut basis = Vec::new();
        for &fc in &free_cols {
            let mut v = vec![BigRational::zero(); cols];
            v[fc] = BigRational::one();
            for &(r, c) in &pivots {
                v[c] = -&m[(r, fc)] / &m[(r, c)];
            }
            basis.push(v);
        }
        basis
    }

    /// Characteristic polynomial det(xI - A), monic, by Faddeev-LeVerrier.
    /// Returned coefficients are ascending: c[0] + c[1] x + ... + x^n.
    pub fn char_poly(&self) -> Vec<BigRational> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut coeffs = vec![BigRational::zero(); n + 1];
        coeffs[n] = BigRational::one();
        let mut m = QMat::identity(n);
        for k in 1..=n {
            m = self.mul(&m);
            let tr: BigRational = (0..n)
                .map(|i| m[(i, i)].clone())
                .fold(BigRational::zero(), |a, b| a + b);
            let c = -tr / BigRational::from(BigInt::from(k as i64));
            coeffs[n - k] = c.clone();
            for i in 0..n {
                m[(i, i)] += c.clone();
            }
        }
        coeffs
    }
}

impl std::ops::Index<(usize, usize)> for QMat {
    type Output = BigRational;
    fn index(&self, (i, j): (usize, usize)) -> &BigRational {
        &self.a[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigRational {
        &mut self.a[i * self.cols + j]
    }
}

/// Smith normal form of an integer matrix: returns (U, S, V) with
/// U * A * V = S, U and V unimodular, S diagonal with s_1 | s_2 | ... >= 0.
pub struct Smith {
    pub u: Vec<Vec<BigInt>>,
    pub s: Vec<Vec<BigInt>>,
    pub v: Vec<Vec<BigInt>>,
}

pub fn smith_normal_form(a: &[Vec<BigInt>]) -> Smith {
    let rows = a.len();
    let cols = if rows > 0 { a[0].len() } else { 0 };
    let mut s: Vec<Vec<BigInt>> = a.to_vec();
    let mut u: Vec<Vec<BigInt>> = (0..rows)
        .map(|i| {
            (0..rows)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect();
    let mut v: Vec<Vec<BigInt>> = (0..cols)
        .map(|i| {
            (0..cols)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect();

    let n = rows.min(cols);
    for t in 0..n {
        // find a nonzero pivot with minimal absolute value
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if !s[i][j].is_zero()
                        && best
                            .map(|(bi, bj)| s[i][j].abs() < s[bi][bj].abs())
                            .unwrap_or(true)
                    {
                        best = Some((i, j));
                    }
                }
            }
            let (pi, pj) = match best {
                Some(b) => b,
                None => return normalize_divisibility(Smith { u, s, v }, n),
            };
            s.swap(t, pi);
            u.swap(t, pi);
            if pj != t {
                for row in s.iter_mut() {
                    row.swap(t, pj);
                }
                v.swap(t, pj); // v stored row-wise as V^T; see application below
            }
            let mut clean = true;
            for i in t + 1..rows {
                if !s[i][t].is_zero() {
                    let q = div_round(&s[i][t], &s[t][t]);
                    for j in 0..cols {
                        let d = &q * &s[t][j];
                        s[i][j] -= d;
                    }
                    for j in 0..rows {
                        let d = &q * &u[t][j];
                        u[i][j] -= d;
                    }
                    if !s[i][t].is_zero() {
                        clean = false;
                    }
                }
            }
            for j in t + 1..cols {
                if !s[t][j].is_zero() {
                    let q = div_round(&s[t][j], &s[t][t]);
                    for i in 0..rows {
                        let d = &q * &s[i][t];
                        s[i][j] -= d;
                    }
                    for i in 0..cols {
                        let d = &q * &v[t][i];
                        v[j][i] -= d;
                    }
                    if !s[t][j].is_zero() {
                        clean = false;
                    }
                }
            }
            if clean {
                // pivot must also divide the remaining block for true SNF
                let mut divides_all = true;
                'outer: for i in t + 1..rows {
                    for j in t + 1..cols {
                        if !(&s[i][j] % &s[t][t]).is_zero() {
                            // mix row i into row t to force a smaller pivot later
                            for jj in 0..cols {
                                let add = s[i][jj].clone();
                                s[t][jj] += add;
                            }
                            for jj in 0..rows {
                                let add = u[i][jj].clone();
                                u[t][jj] += add;
                            }
                            divides_all = false;
                            break 'outer;
                        }
                    }
                }
                if divides_all {
                    break;
                }
            }
        }
        if s[t][t].is_negative() {
            for j in 0..cols {
                s[t][j] = -s[t][j].clone();
            }
            for j in 0..rows {
                u[t][j] = -u[t][j].clone();
            }
        }
    }
    normalize_divisibility(Smith { u, s, v }, n)
}

fn normalize_divisibility(mut sm: Smith, n: usize) -> Smith {
    // v was accumulated as rows of V^T; transpose so that U*A*V = S holds
    // with ordinary matrix products.
    let cols = sm.v.len();
    let mut vt = vec![vec![BigInt::zero(); cols]; cols];
    for i in 0..cols {
        for j in 0..cols {
            vt[i][j] = sm.v[j][i].clone();
        }
    }
    sm.v = vt;
    for i in 0..n {
        if sm.s[i][i].is_negative() {
            sm.s[i][i] = -sm.s[i][i].clone();
            for j in 0..sm.u[i].len() {
                sm.u[i][j] = -sm.u[i][j].clone();
            }
        }
    }
    sm
}

fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    // nearest-integer division keeps entries small during reduction
    let (q, r) = a.div_rem(b);
    let two_r = BigInt::from(2) * r.abs();
    if two_r > b.abs() {
        if (a.sign() == b.sign()) || a.is_zero() {
            q + 1
        } else {
            q - 1
        }
    } else {
        q
    }
}

/// Diagonal entries of the Smith form (invariant factors, zeros last).
pub fn invariant_factors(a: &[Vec<BigInt>]) -> Vec<BigInt> {
    let sm = smith_normal_form(a);
    let n = a.len().min(if a.is_empty() { 0 } else { a[0].len() });
    (0..n).map(|i| sm.s[i][i].clone()).collect()
}

/// Primitive integer kernel vectors of an integer matrix (content 1 each).
pub fn integer_kernel(a: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let rows = a.len();
    let cols = if rows > 0 { a[0].len() } else { 0 };
    let q = QMat::from_fn(rows, cols, |i, j| BigRational::from(a[i][j].clone()));
    q.kernel()
        .into_iter()
        .map(|v| {
            let lcm = v
                .iter()
                .map(|x| x.denom().clone())
                .fold(BigInt::one(), |a, b| a.lcm(&b));
            let ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
            let content = ints
                .iter()
                .fold(BigInt::zero(), |a, b| a.gcd(b));
            if content.is_zero() {
                ints
            } else {
                ints.iter().map(|x| x / &content).collect()
            }
        })
        .collect()
}
