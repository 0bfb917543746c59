//! Compressed-row complex operator over an enumerated basis.

use nalgebra::DMatrix;
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl OperatorMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, row_ptr: vec![0; dim + 1], cols: Vec::new(), vals: Vec::new() }
    }

    /// Builds from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, Complex64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; dim + 1];
        let mut cols: Vec<usize> = Vec::with_capacity(triplets.len());
        let mut vals: Vec<Complex64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "triplet ({r}, {c}) out of range for dimension {dim}");
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self { dim, row_ptr, cols, vals }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let triplets = diag.iter().enumerate().map(|(i, &d)| (i, i, Complex64::new(d, 0.0))).collect();
        Self::from_triplets(diag.len(), triplets)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[span.clone()].binary_search(&c) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// y += scale · A x
    pub fn mul_add(&self, scale: Complex64, x: &[Complex64], y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.dim);
        for (r, yr) in y.iter_mut().enumerate().take(self.dim) {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *yr += scale * acc;
        }
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        self.mul_add(Complex64::new(1.0, 0.0), x, &mut y);
        y
    }

    /// a·self + b·other. A zero coefficient drops that operand's entries.
    pub fn linear_combination(&self, a: Complex64, other: &OperatorMatrix, b: Complex64) -> Self {
        assert_eq!(self.dim, other.dim);
        let scaled = |m: &OperatorMatrix, k: Complex64| -> Vec<_> {
            if k == Complex64::new(0.0, 0.0) {
                return Vec::new();
            }
            m.iter().map(|(r, c, v)| (r, c, k * v)).collect()
        };
        let mut triplets = scaled(self, a);
        triplets.extend(scaled(other, b));
        Self::from_triplets(self.dim, triplets)
    }

    pub fn add(&self, other: &OperatorMatrix) -> Self {
        let one = Complex64::new(1.0, 0.0);
        self.linear_combination(one, other, one)
    }

    pub fn adjoint(&self) -> Self {
        let triplets = self.iter().map(|(r, c, v)| (c, r, v.conj())).collect();
        Self::from_triplets(self.dim, triplets)
    }

    /// max |A − A†| over all entries.
    pub fn hermiticity_defect(&self) -> f64 {
        self.iter()
            .map(|(r, c, v)| (v - self.get(c, r).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.iter() {
            m[(r, c)] += v;
        }
        m
    }

    /// ⟨x| A |x⟩
    pub fn expectation(&self, x: &[Complex64]) -> Complex64 {
        self.iter().map(|(r, c, v)| x[r].conj() * v * x[c]).sum()
    }
}
