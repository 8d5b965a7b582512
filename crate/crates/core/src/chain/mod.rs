//! GF(2) chain complexes built from Bruhat layers.

mod bitmatrix;
pub mod io;

pub use bitmatrix::{
    dot, flip_bit, get_bit, support, weight, words_for, words_from_support, xor_into, BitMatrix, RowSpace,
};

use crate::bruhat::{BruhatInterval, LayeredSubposet};
use crate::error::{Error, Result};

/// Cover-relation matrix between ranks `q − 1` (rows) and `q` (columns) of
/// an interval, labeled by reduced words.
pub fn interval_boundary(iv: &BruhatInterval, q: usize) -> Result<BitMatrix> {
    if q == 0 || q <= iv.min_rank() || q > iv.max_rank() {
        return Err(Error::RankBounds(format!("no layers {} and {q} in the interval", q.saturating_sub(1))));
    }
    let lower = iv.layer(q - 1);
    let upper = iv.layer(q);
    let mut m = BitMatrix::zeros(lower.len(), upper.len());
    for (i, j) in iv.covers(q) {
        m.set(i as usize, j as usize, true);
    }
    let rows = lower.iter().map(|e| e.to_string()).collect();
    let cols = upper.iter().map(|e| e.to_string()).collect();
    Ok(m.with_labels(Some(rows), Some(cols)))
}

/// Boundary matrix `B_q` of a layered subposet: rows = layer `q − 1`,
/// columns = layer `q`.
pub fn boundary_matrix(sub: &LayeredSubposet<'_>, q: usize) -> Result<BitMatrix> {
    if q == 0 || !sub.contains_rank(q) || !sub.contains_rank(q - 1) {
        return Err(Error::RankBounds(format!(
            "layers {} and {q} not both in the subposet [{}, {}]",
            q.saturating_sub(1),
            sub.min_rank(),
            sub.max_rank()
        )));
    }
    interval_boundary(sub.interval(), q)
}

/// A finite complex `C_hi → … → C_lo` of GF(2) modules.
///
/// `maps[i]` is the boundary `C_{lo+i+1} → C_{lo+i}`, stored with rows indexed
/// by the lower module.
#[derive(Clone, Debug)]
pub struct ChainComplex {
    maps: Vec<BitMatrix>,
    dims: Vec<usize>,
    offset: usize,
}

impl ChainComplex {
    /// Validates shapes and `∂∘∂ = 0`.
    pub fn new(maps: Vec<BitMatrix>, offset: usize) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::ChainComplex("a complex needs at least one map".into()));
        }
        let mut dims = vec![maps[0].rows()];
        for (i, m) in maps.iter().enumerate() {
            if m.rows() != dims[i] {
                return Err(Error::ChainComplex(format!(
                    "map {i} has {} rows but module has dimension {}",
                    m.rows(),
                    dims[i]
                )));
            }
            dims.push(m.cols());
        }
        for i in 0..maps.len() - 1 {
            if !maps[i].mul(&maps[i + 1]).is_zero() {
                return Err(Error::ChainComplex(format!("d∘d ≠ 0 between degrees {} and {}", offset + i + 2, offset + i)));
            }
        }
        Ok(ChainComplex { maps, dims, offset })
    }

    /// A single module with zero maps on both sides.
    pub fn single_module(dim: usize, offset: usize) -> Self {
        ChainComplex { maps: Vec::new(), dims: vec![dim], offset }
    }

    /// Complex of the consecutive ranks `lo..=hi` of an interval.
    pub fn from_interval(iv: &BruhatInterval, lo: usize, hi: usize) -> Result<Self> {
        if hi <= lo {
            return Err(Error::ChainComplex("need at least two layers".into()));
        }
        let maps = (lo + 1..=hi).map(|q| interval_boundary(iv, q)).collect::<Result<Vec<_>>>()?;
        Self::new(maps, lo)
    }

    /// Module dimensions from the lowest degree up.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn maps(&self) -> &[BitMatrix] {
        &self.maps
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    /// Number of maps.
    pub fn length(&self) -> usize {
        self.maps.len()
    }

    /// `∂_q : C_q → C_{q−1}` for an absolute degree `q`.
    pub fn boundary(&self, q: usize) -> Option<&BitMatrix> {
        q.checked_sub(self.offset + 1).and_then(|i| self.maps.get(i))
    }
}

pub fn to_chain_complex(sub: &LayeredSubposet<'_>) -> Result<ChainComplex> {
    if sub.half_width() == 0 {
        return Err(Error::ChainComplex("a single layer has no boundary maps".into()));
    }
    ChainComplex::from_interval(sub.interval(), sub.min_rank(), sub.max_rank())
}

pub fn rank_gf2(m: &BitMatrix) -> usize {
    m.rank()
}

pub fn kernel_basis(m: &BitMatrix) -> BitMatrix {
    m.kernel_basis()
}

pub fn in_row_space(m: &BitMatrix, v: &[u64]) -> bool {
    m.in_row_space(v)
}

/// `β_q = dim C_q − rank ∂_q − rank ∂_{q+1}`, with zero maps beyond both ends.
pub fn compute_betti(c: &ChainComplex) -> Vec<usize> {
    let ranks: Vec<usize> = c.maps.iter().map(BitMatrix::rank).collect();
    (0..c.dims.len())
        .map(|i| {
            let below = if i == 0 { 0 } else { ranks[i - 1] };
            let above = ranks.get(i).copied().unwrap_or(0);
            c.dims[i] - below - above
        })
        .collect()
}

/// Betti numbers of the open interval `(w_b, w_t)` viewed as a cell complex.
pub fn open_interval_betti(iv: &BruhatInterval) -> Result<Vec<usize>> {
    let lo = iv.min_rank() + 1;
    let hi = iv.max_rank().checked_sub(1).filter(|&h| h >= lo).ok_or_else(|| Error::ChainComplex("interval too short".into()))?;
    if hi == lo {
        return Ok(vec![iv.layer(lo).len()]);
    }
    Ok(compute_betti(&ChainComplex::from_interval(iv, lo, hi)?))
}
