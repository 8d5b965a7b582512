//! Dense GF(2) matrices packed into 64-bit words, row-major.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
    row_labels: Option<Vec<String>>,
    col_labels: Option<Vec<String>>,
}

#[inline]
pub fn words_for(cols: usize) -> usize {
    cols.div_ceil(64)
}

#[inline]
pub fn get_bit(words: &[u64], c: usize) -> bool {
    words[c / 64] >> (c % 64) & 1 == 1
}

#[inline]
pub fn flip_bit(words: &mut [u64], c: usize) {
    words[c / 64] ^= 1 << (c % 64);
}

#[inline]
pub fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

pub fn weight(words: &[u64]) -> usize {
    words.iter().map(|w| w.count_ones() as usize).sum()
}

pub fn support(words: &[u64]) -> Vec<usize> {
    let mut out = Vec::new();
    for (wi, &w) in words.iter().enumerate() {
        let mut w = w;
        while w != 0 {
            let t = w.trailing_zeros() as usize;
            out.push(wi * 64 + t);
            w &= w - 1;
        }
    }
    out
}

pub fn words_from_support(cols: usize, supp: &[usize]) -> Vec<u64> {
    let mut v = vec![0u64; words_for(cols)];
    for &c in supp {
        assert!(c < cols, "column {c} out of range {cols}");
        flip_bit(&mut v, c);
    }
    v
}

pub fn dot(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum::<u32>() & 1 == 1
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        BitMatrix { rows, cols, stride, data: vec![0; rows * stride], row_labels: None, col_labels: None }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Rows given by their supports.
    pub fn from_supports(cols: usize, rows: &[Vec<usize>]) -> Self {
        let mut m = Self::zeros(rows.len(), cols);
        for (r, supp) in rows.iter().enumerate() {
            for &c in supp {
                assert!(c < cols, "column {c} out of range {cols}");
                m.set(r, c, true);
            }
        }
        m
    }

    /// Rows given as 0/1 slices.
    pub fn from_dense(rows: &[Vec<u8>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged dense matrix");
            for (c, &v) in row.iter().enumerate() {
                if v & 1 == 1 {
                    m.set(r, c, true);
                }
            }
        }
        m
    }

    /// Rows given as packed words.
    pub fn from_row_words(cols: usize, rows: &[Vec<u64>]) -> Self {
        let mut m = Self::zeros(rows.len(), cols);
        for (r, w) in rows.iter().enumerate() {
            let stride = m.stride;
            m.row_mut(r).copy_from_slice(&w[..stride]);
        }
        m.mask_tail();
        m
    }

    fn mask_tail(&mut self) {
        if !self.cols.is_multiple_of(64) && self.stride > 0 {
            let mask = (1u64 << (self.cols % 64)) - 1;
            for r in 0..self.rows {
                self.data[r * self.stride + self.stride - 1] &= mask;
            }
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols);
        get_bit(self.row(r), c)
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        assert!(r < self.rows && c < self.cols);
        let w = &mut self.data[r * self.stride + c / 64];
        if v {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    pub fn flip(&mut self, r: usize, c: usize) {
        assert!(r < self.rows && c < self.cols);
        self.data[r * self.stride + c / 64] ^= 1 << (c % 64);
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn row_support(&self, r: usize) -> Vec<usize> {
        support(self.row(r))
    }

    pub fn row_weight(&self, r: usize) -> usize {
        weight(self.row(r))
    }

    pub fn row_weights(&self) -> Vec<usize> {
        (0..self.rows).map(|r| self.row_weight(r)).collect()
    }

    pub fn col_weights(&self) -> Vec<usize> {
        let mut w = vec![0usize; self.cols];
        for r in 0..self.rows {
            for c in self.row_support(r) {
                w[c] += 1;
            }
        }
        w
    }

    pub fn col_support(&self, c: usize) -> Vec<usize> {
        (0..self.rows).filter(|&r| self.get(r, c)).collect()
    }

    pub fn supports(&self) -> Vec<Vec<usize>> {
        (0..self.rows).map(|r| self.row_support(r)).collect()
    }

    pub fn count_ones(&self) -> usize {
        weight(&self.data)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    pub fn row_labels(&self) -> Option<&[String]> {
        self.row_labels.as_deref()
    }

    pub fn col_labels(&self) -> Option<&[String]> {
        self.col_labels.as_deref()
    }

    pub fn set_row_labels(&mut self, labels: Option<Vec<String>>) {
        if let Some(l) = &labels {
            assert_eq!(l.len(), self.rows, "row label count mismatch");
        }
        self.row_labels = labels;
    }

    pub fn set_col_labels(&mut self, labels: Option<Vec<String>>) {
        if let Some(l) = &labels {
            assert_eq!(l.len(), self.cols, "column label count mismatch");
        }
        self.col_labels = labels;
    }

    pub fn with_labels(mut self, rows: Option<Vec<String>>, cols: Option<Vec<String>>) -> Self {
        self.set_row_labels(rows);
        self.set_col_labels(cols);
        self
    }

    /// Same bits, no labels.
    pub fn unlabeled(&self) -> Self {
        BitMatrix { row_labels: None, col_labels: None, ..self.clone() }
    }

    pub fn same_bits(&self, other: &BitMatrix) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.data == other.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in self.row_support(r) {
                t.set(c, r, true);
            }
        }
        t.row_labels = self.col_labels.clone();
        t.col_labels = self.row_labels.clone();
        t
    }

    /// `self · other`.
    pub fn mul(&self, other: &BitMatrix) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let supp = self.row_support(r);
            let dst = &mut out.data[r * out.stride..(r + 1) * out.stride];
            for k in supp {
                xor_into(dst, other.row(k));
            }
        }
        out
    }

    /// `self · otherᵀ`, i.e. pairwise row inner products.
    pub fn mul_transpose(&self, other: &BitMatrix) -> Self {
        assert_eq!(self.cols, other.cols, "dimension mismatch in product");
        self.mul(&other.transpose().unlabeled())
    }

    /// `M · v` for a packed column vector `v`.
    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        let mut out = vec![0u64; words_for(self.rows)];
        for r in 0..self.rows {
            if dot(self.row(r), v) {
                flip_bit(&mut out, r);
            }
        }
        out
    }

    /// True iff `self · otherᵀ = 0`.
    pub fn orthogonal_to(&self, other: &BitMatrix) -> bool {
        self.cols == other.cols && self.mul_transpose(other).is_zero()
    }

    pub fn hstack(&self, other: &BitMatrix) -> Self {
        assert_eq!(self.rows, other.rows, "hstack needs equal row counts");
        let mut out = Self::zeros(self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in self.row_support(r) {
                out.set(r, c, true);
            }
            for c in other.row_support(r) {
                out.set(r, self.cols + c, true);
            }
        }
        out.row_labels = self.row_labels.clone();
        out.col_labels = concat_labels(&self.col_labels, &other.col_labels);
        out
    }

    pub fn vstack(&self, other: &BitMatrix) -> Self {
        assert_eq!(self.cols, other.cols, "vstack needs equal column counts");
        let mut out = Self::zeros(self.rows + other.rows, self.cols);
        out.data[..self.data.len()].copy_from_slice(&self.data);
        out.data[self.data.len()..].copy_from_slice(&other.data);
        out.row_labels = concat_labels(&self.row_labels, &other.row_labels);
        out.col_labels = self.col_labels.clone();
        out
    }

    pub fn block_diag(&self, other: &BitMatrix) -> Self {
        let top = self.hstack_zero_right(other.cols);
        let bottom = other.hstack_zero_left(self.cols);
        let mut out = top.vstack(&bottom);
        out.row_labels = concat_labels(&self.row_labels, &other.row_labels);
        out.col_labels = concat_labels(&self.col_labels, &other.col_labels);
        out
    }

    fn hstack_zero_right(&self, extra: usize) -> Self {
        let mut out = Self::zeros(self.rows, self.cols + extra);
        for r in 0..self.rows {
            for c in self.row_support(r) {
                out.set(r, c, true);
            }
        }
        out
    }

    fn hstack_zero_left(&self, extra: usize) -> Self {
        let mut out = Self::zeros(self.rows, self.cols + extra);
        for r in 0..self.rows {
            for c in self.row_support(r) {
                out.set(r, extra + c, true);
            }
        }
        out
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut out = Self::zeros(rows.len(), self.cols);
        for (i, &r) in rows.iter().enumerate() {
            out.row_mut(i).copy_from_slice(self.row(r));
        }
        out.row_labels = self.row_labels.as_ref().map(|l| rows.iter().map(|&r| l[r].clone()).collect());
        out.col_labels = self.col_labels.clone();
        out
    }

    pub fn select_cols(&self, cols: &[usize]) -> Self {
        let mut out = Self::zeros(self.rows, cols.len());
        for r in 0..self.rows {
            let row = self.row(r);
            for (j, &c) in cols.iter().enumerate() {
                if get_bit(row, c) {
                    out.set(r, j, true);
                }
            }
        }
        out.row_labels = self.row_labels.clone();
        out.col_labels = self.col_labels.as_ref().map(|l| cols.iter().map(|&c| l[c].clone()).collect());
        out
    }

    /// Appends zero columns with optional labels.
    pub fn add_zero_cols(&self, extra: usize, labels: Option<Vec<String>>) -> Self {
        let mut out = self.hstack_zero_right(extra);
        out.row_labels = self.row_labels.clone();
        out.col_labels = match (&self.col_labels, labels) {
            (Some(a), Some(b)) => Some(a.iter().cloned().chain(b).collect()),
            (Some(a), None) => Some(a.iter().cloned().chain((self.cols..self.cols + extra).map(|i| format!("q{i}"))).collect()),
            _ => None,
        };
        out
    }

    /// Appends one row; a label is required iff the matrix has row labels.
    pub fn push_row(&mut self, words: &[u64], label: Option<String>) {
        assert_eq!(words.len(), self.stride);
        self.data.extend_from_slice(words);
        self.rows += 1;
        if let Some(l) = &mut self.row_labels {
            l.push(label.unwrap_or_else(|| format!("r{}", self.rows - 1)));
        }
        self.mask_tail();
    }

    pub fn remove_rows(&self, remove: &[usize]) -> Self {
        let mut gone = vec![false; self.rows];
        for &r in remove {
            gone[r] = true;
        }
        let keep: Vec<usize> = (0..self.rows).filter(|&r| !gone[r]).collect();
        self.select_rows(&keep)
    }

    pub fn remove_cols(&self, remove: &[usize]) -> Self {
        let mut gone = vec![false; self.cols];
        for &c in remove {
            gone[c] = true;
        }
        let keep: Vec<usize> = (0..self.cols).filter(|&c| !gone[c]).collect();
        self.select_cols(&keep)
    }

    /// Rank over GF(2) by elimination on a private copy.
    pub fn rank(&self) -> usize {
        let mut m = self.data.clone();
        let stride = self.stride;
        let mut rank = 0usize;
        let rows = self.rows;
        for c in 0..self.cols {
            if rank == rows {
                break;
            }
            let wi = c / 64;
            let bit = 1u64 << (c % 64);
            let Some(p) = (rank..rows).find(|&r| m[r * stride + wi] & bit != 0) else { continue };
            if p != rank {
                for w in 0..stride {
                    m.swap(p * stride + w, rank * stride + w);
                }
            }
            let (head, tail) = m.split_at_mut((rank + 1) * stride);
            let pivot = &head[rank * stride + wi..(rank + 1) * stride];
            for r in 0..rows - rank - 1 {
                let row = &mut tail[r * stride..(r + 1) * stride];
                if row[wi] & bit != 0 {
                    xor_into(&mut row[wi..], pivot);
                }
            }
            rank += 1;
        }
        rank
    }

    /// Reduced row echelon form (zero rows dropped) and pivot columns.
    pub fn rref(&self) -> (BitMatrix, Vec<usize>) {
        let mut m = self.unlabeled();
        let stride = self.stride;
        let mut pivots = Vec::new();
        let mut rank = 0usize;
        for c in 0..self.cols {
            if rank == m.rows {
                break;
            }
            let wi = c / 64;
            let bit = 1u64 << (c % 64);
            let Some(p) = (rank..m.rows).find(|&r| m.data[r * stride + wi] & bit != 0) else { continue };
            if p != rank {
                for w in 0..stride {
                    m.data.swap(p * stride + w, rank * stride + w);
                }
            }
            let pivot: Vec<u64> = m.row(rank).to_vec();
            for r in 0..m.rows {
                if r != rank && m.data[r * stride + wi] & bit != 0 {
                    xor_into(&mut m.data[r * stride..(r + 1) * stride], &pivot);
                }
            }
            pivots.push(c);
            rank += 1;
        }
        m.data.truncate(rank * stride);
        m.rows = rank;
        (m, pivots)
    }

    /// Basis of `{v : M v = 0}` as rows.
    pub fn kernel_basis(&self) -> BitMatrix {
        let (r, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let free: Vec<usize> = (0..self.cols).filter(|&c| !is_pivot[c]).collect();
        let mut out = Self::zeros(free.len(), self.cols);
        for (i, &f) in free.iter().enumerate() {
            out.set(i, f, true);
            for (pr, &pc) in pivots.iter().enumerate() {
                if r.get(pr, f) {
                    out.set(i, pc, true);
                }
            }
        }
        out
    }

    /// True iff `v` (packed, `cols` bits) lies in the row space.
    pub fn in_row_space(&self, v: &[u64]) -> bool {
        RowSpace::new(self).contains(v)
    }

    /// Dense 0/1 rows, for debugging and small fixtures.
    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        (0..self.rows).map(|r| (0..self.cols).map(|c| self.get(r, c) as u8).collect()).collect()
    }

    /// Raw word storage (row-major, `words_for(cols)` words per row).
    pub fn words(&self) -> &[u64] {
        &self.data
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    /// Checks label consistency; used after deserialization.
    pub fn validate(&self) -> Result<()> {
        if self.row_labels.as_ref().is_some_and(|l| l.len() != self.rows) {
            return Err(Error::Format("row label count mismatch".into()));
        }
        if self.col_labels.as_ref().is_some_and(|l| l.len() != self.cols) {
            return Err(Error::Format("column label count mismatch".into()));
        }
        Ok(())
    }
}

fn concat_labels(a: &Option<Vec<String>>, b: &Option<Vec<String>>) -> Option<Vec<String>> {
    match (a, b) {
        (Some(a), Some(b)) => Some(a.iter().chain(b).cloned().collect()),
        _ => None,
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        if self.rows <= 64 && self.cols <= 128 {
            for r in 0..self.rows {
                let line: String = (0..self.cols).map(|c| if self.get(r, c) { '1' } else { '.' }).collect();
                writeln!(f, "  {line}")?;
            }
        }
        Ok(())
    }
}

/// Echelon basis of a row space with pivot lookup, for repeated membership
/// tests and reductions.
#[derive(Clone, Debug)]
pub struct RowSpace {
    cols: usize,
    basis: Vec<Vec<u64>>,
    pivots: Vec<usize>,
}

impl RowSpace {
    pub fn new(m: &BitMatrix) -> Self {
        let (r, pivots) = m.rref();
        let basis = (0..r.rows()).map(|i| r.row(i).to_vec()).collect();
        RowSpace { cols: m.cols(), basis, pivots }
    }

    pub fn empty(cols: usize) -> Self {
        RowSpace { cols, basis: Vec::new(), pivots: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Reduces `v` against the basis in place; zero result means membership.
    pub fn reduce(&self, v: &mut [u64]) {
        for (b, &p) in self.basis.iter().zip(&self.pivots) {
            if get_bit(v, p) {
                xor_into(v, b);
            }
        }
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        let mut w = v.to_vec();
        self.reduce(&mut w);
        w.iter().all(|&x| x == 0)
    }

    /// Adds `v` if independent; returns whether it was added. Keeps the basis
    /// fully reduced.
    pub fn insert(&mut self, v: &[u64]) -> bool {
        let mut w = v.to_vec();
        self.reduce(&mut w);
        let Some(p) = (0..self.cols).find(|&c| get_bit(&w, c)) else { return false };
        for b in &mut self.basis {
            if get_bit(b, p) {
                xor_into(b, &w);
            }
        }
        self.basis.push(w);
        self.pivots.push(p);
        true
    }
}
