//! Minimum distance: exhaustive search over small kernels, exhaustive search
//! by increasing weight, a seeded random-information-set upper bound, and a
//! greedy bound from the logical basis.
//!
//! `d_X` is the least weight of a vector in `ker H_Z` outside the row space of
//! `H_X` (an X-type logical operator); `d_Z` swaps the roles.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{support, weight, words_from_support, xor_into, BitMatrix, RowSpace};
use crate::codes::{logical_count, CheckSide, CssCode};
use crate::error::{Error, Result};
use crate::rng::stream_rng;

pub const DEFAULT_DIM_CAP: usize = 28;

/// Environment variable holding the worker count for parallel sampling.
pub const WORKERS_ENV: &str = "BRUHAT_WORKERS";

/// `(kernel of, modulo)` for logicals of type `side`.
fn matrices(code: &CssCode, side: CheckSide) -> (&BitMatrix, &BitMatrix) {
    match side {
        CheckSide::X => (code.hz(), code.hx()),
        CheckSide::Z => (code.hx(), code.hz()),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub weight: usize,
    /// Support of the logical operator.
    pub support: Vec<usize>,
}

/// Exhaustive minimum over `ker H` minus the opposing row space, by a
/// Gray-code walk over a kernel basis whose leading vectors span the
/// stabilizers. Fails when the kernel dimension exceeds `dim_cap`.
pub fn exact_distance(code: &CssCode, side: CheckSide, dim_cap: usize) -> Result<usize> {
    exact_witness(code, side, dim_cap).map(|w| w.weight)
}

pub fn exact_witness(code: &CssCode, side: CheckSide, dim_cap: usize) -> Result<Witness> {
    let (h, modulo) = matrices(code, side);
    let ker = h.kernel_basis();
    let dim = ker.rows();
    if dim > dim_cap || dim >= 63 {
        return Err(Error::KernelCap { dim, cap: dim_cap.min(62) });
    }
    let mut rs = RowSpace::new(modulo);
    let stab_dim = rs.dim();
    let mut logical = Vec::new();
    for r in 0..ker.rows() {
        if rs.insert(ker.row(r)) {
            logical.push(ker.row(r).to_vec());
        }
    }
    if logical.is_empty() {
        return Err(Error::NoLogicals);
    }
    // Stabilizer basis in rref form (first `stab_dim` rows of `rs`), then logicals.
    let stabs = modulo.rref().0;
    let mut basis: Vec<Vec<u64>> = (0..stabs.rows()).map(|r| stabs.row(r).to_vec()).collect();
    debug_assert_eq!(basis.len(), stab_dim);
    basis.extend(logical);
    let k = basis.len() - stab_dim;
    let stride = h.stride();
    let mut v = vec![0u64; stride];
    let mut best = usize::MAX;
    let mut best_v = Vec::new();
    // Logical coordinates occupy the high bits, so `g >> stab_dim != 0`
    // identifies vectors outside the stabilizer space.
    let total: u64 = 1u64 << basis.len();
    for g in 1..total {
        let bit = g.trailing_zeros() as usize;
        xor_into(&mut v, &basis[bit]);
        let gray = g ^ (g >> 1);
        if gray >> stab_dim == 0 {
            continue;
        }
        let w = weight(&v);
        if w < best {
            best = w;
            best_v = v.clone();
        }
    }
    debug_assert!(k > 0);
    Ok(Witness { weight: best, support: support(&best_v) })
}

/// Searches all supports of weight `1..=max_weight` in increasing order. The
/// first logical found has minimum weight, so a `Some` result is exact;
/// `None` means the distance exceeds `max_weight`. `budget` bounds the number
/// of partial supports visited; exceeding it returns `Ok(None)` with
/// `exhausted = false`.
pub fn low_weight_search(code: &CssCode, side: CheckSide, max_weight: usize, budget: u64) -> Result<LowWeightResult> {
    let (h, modulo) = matrices(code, side);
    if logical_count(code) == 0 {
        return Err(Error::NoLogicals);
    }
    let n = h.cols();
    let ht = h.transpose();
    let stride = ht.stride();
    let mut by_syndrome: HashMap<Vec<u64>, Vec<usize>> = HashMap::new();
    for c in 0..n {
        by_syndrome.entry(ht.row(c).to_vec()).or_default().push(c);
    }
    let rs = RowSpace::new(modulo);
    let mut visited = 0u64;
    for w in 1..=max_weight.min(n) {
        let mut search = Search { ht: &ht, by_syndrome: &by_syndrome, rs: &rs, n, target: w, visited: &mut visited, budget, chosen: Vec::new() };
        let mut syn = vec![0u64; stride];
        match search.dfs(0, &mut syn) {
            Step::Found(s) => return Ok(LowWeightResult { witness: Some(Witness { weight: w, support: s }), exhausted: true, searched_up_to: w }),
            Step::OutOfBudget => return Ok(LowWeightResult { witness: None, exhausted: false, searched_up_to: w - 1 }),
            Step::Continue => {}
        }
    }
    Ok(LowWeightResult { witness: None, exhausted: true, searched_up_to: max_weight.min(n) })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LowWeightResult {
    pub witness: Option<Witness>,
    /// Whether every weight up to `searched_up_to` was covered.
    pub exhausted: bool,
    pub searched_up_to: usize,
}

enum Step {
    Found(Vec<usize>),
    OutOfBudget,
    Continue,
}

struct Search<'a> {
    ht: &'a BitMatrix,
    by_syndrome: &'a HashMap<Vec<u64>, Vec<usize>>,
    rs: &'a RowSpace,
    n: usize,
    target: usize,
    visited: &'a mut u64,
    budget: u64,
    chosen: Vec<usize>,
}

impl Search<'_> {
    fn is_logical(&self, cols: &[usize]) -> bool {
        !self.rs.contains(&words_from_support(self.n, cols))
    }

    fn dfs(&mut self, start: usize, syn: &mut Vec<u64>) -> Step {
        *self.visited += 1;
        if *self.visited > self.budget {
            return Step::OutOfBudget;
        }
        if self.chosen.len() + 1 == self.target {
            // The last column must cancel the syndrome.
            if let Some(cols) = self.by_syndrome.get(syn.as_slice()) {
                for &c in cols.iter().filter(|&&c| c >= start) {
                    let mut s = self.chosen.clone();
                    s.push(c);
                    if self.is_logical(&s) {
                        return Step::Found(s);
                    }
                }
            }
            return Step::Continue;
        }
        let need = self.target - self.chosen.len();
        for c in start..=self.n.saturating_sub(need) {
            xor_into(syn, self.ht.row(c));
            self.chosen.push(c);
            let r = self.dfs(c + 1, syn);
            self.chosen.pop();
            xor_into(syn, self.ht.row(c));
            if !matches!(r, Step::Continue) {
                return r;
            }
        }
        Step::Continue
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideReport {
    pub upper: usize,
    pub exact: bool,
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub d_x_upper: Option<usize>,
    pub d_z_upper: Option<usize>,
    pub exact_x: bool,
    pub exact_z: bool,
    pub trials: usize,
    pub seed: u64,
    pub witness_x: Option<Witness>,
    pub witness_z: Option<Witness>,
}

impl DistanceReport {
    fn empty(trials: usize, seed: u64) -> Self {
        DistanceReport { d_x_upper: None, d_z_upper: None, exact_x: false, exact_z: false, trials, seed, witness_x: None, witness_z: None }
    }

    pub fn set(&mut self, side: CheckSide, r: SideReport) {
        match side {
            CheckSide::X => {
                self.d_x_upper = Some(r.upper);
                self.exact_x = r.exact;
                self.witness_x = r.witness;
            }
            CheckSide::Z => {
                self.d_z_upper = Some(r.upper);
                self.exact_z = r.exact;
                self.witness_z = r.witness;
            }
        }
    }

    pub fn side(&self, side: CheckSide) -> Option<SideReport> {
        let (u, e, w) = match side {
            CheckSide::X => (self.d_x_upper, self.exact_x, &self.witness_x),
            CheckSide::Z => (self.d_z_upper, self.exact_z, &self.witness_z),
        };
        u.map(|upper| SideReport { upper, exact: e, witness: w.clone() })
    }

    /// `min(d_X, d_Z)` over the sides present.
    pub fn d(&self) -> Option<usize> {
        match (self.d_x_upper, self.d_z_upper) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    /// Both sides exact.
    pub fn is_exact(&self) -> bool {
        self.exact_x && self.exact_z
    }
}

/// Worker pool sized by `BRUHAT_WORKERS` when set; results never depend on it.
pub fn worker_pool() -> Option<rayon::ThreadPool> {
    let n: usize = std::env::var(WORKERS_ENV).ok()?.parse().ok()?;
    rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build().ok()
}

/// Minimum-weight logical seen in one trial: RREF of the kernel generator
/// under a random column order, rows outside the opposing row space.
fn ris_trial(gen: &BitMatrix, rs: &RowSpace, seed: u64, trial: u64) -> Option<Witness> {
    let n = gen.cols();
    let mut rng = stream_rng(seed, trial);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let (r, _) = gen.select_cols(&perm).rref();
    let mut best: Option<Witness> = None;
    for i in 0..r.rows() {
        let w = r.row_weight(i);
        if best.as_ref().is_some_and(|b| b.weight <= w) {
            continue;
        }
        let mut supp: Vec<usize> = r.row_support(i).into_iter().map(|c| perm[c]).collect();
        supp.sort_unstable();
        if !rs.contains(&words_from_support(n, &supp)) {
            best = Some(Witness { weight: w, support: supp });
        }
    }
    best
}

/// Random-information-set upper bound on one side. Trials are independent
/// streams of the master seed; the minimum is taken with ties broken by trial
/// index, so the result does not depend on scheduling.
pub fn ris_side(code: &CssCode, side: CheckSide, trials: usize, seed: u64) -> Result<SideReport> {
    if logical_count(code) == 0 {
        return Err(Error::NoLogicals);
    }
    let (h, modulo) = matrices(code, side);
    let gen = h.kernel_basis();
    let rs = RowSpace::new(modulo);
    let run = || {
        (0..trials as u64)
            .into_par_iter()
            .filter_map(|t| ris_trial(&gen, &rs, seed, t).map(|w| (w.weight, t, w)))
            .min_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)))
    };
    let found = match worker_pool() {
        Some(pool) => pool.install(run),
        None => run(),
    };
    Ok(match found {
        Some((w, _, witness)) => SideReport { upper: w, exact: false, witness: Some(witness) },
        None => SideReport { upper: code.n(), exact: false, witness: None },
    })
}

/// RIS bound for one side (`Some`) or both (`None`).
pub fn ris_upper_bound(code: &CssCode, side: Option<CheckSide>, trials: usize, seed: u64) -> Result<DistanceReport> {
    let mut rep = DistanceReport::empty(trials, seed);
    for s in sides(side) {
        rep.set(s, ris_side(code, s, trials, seed)?);
    }
    Ok(rep)
}

fn sides(side: Option<CheckSide>) -> Vec<CheckSide> {
    match side {
        Some(s) => vec![s],
        None => vec![CheckSide::X, CheckSide::Z],
    }
}

/// Greedy bound: each logical basis vector is lowered by adding stabilizer
/// rows while that helps; the lightest result is returned.
pub fn min_logical_weight(code: &CssCode, side: CheckSide) -> Result<usize> {
    let logical = code.logical_basis(side);
    if logical.rows() == 0 {
        return Err(Error::NoLogicals);
    }
    let (_, modulo) = matrices(code, side);
    let stabs: Vec<Vec<u64>> = (0..modulo.rows()).map(|r| modulo.row(r).to_vec()).collect();
    let mut best = usize::MAX;
    for i in 0..logical.rows() {
        let mut v = logical.row(i).to_vec();
        let mut w = weight(&v);
        loop {
            let mut improved = false;
            for s in &stabs {
                xor_into(&mut v, s);
                let nw = weight(&v);
                if nw < w {
                    w = nw;
                    improved = true;
                } else {
                    xor_into(&mut v, s);
                }
            }
            if !improved {
                break;
            }
        }
        best = best.min(w);
    }
    Ok(best)
}

/// Settings for [`analyze`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct DistanceSettings {
    /// Kernel dimension up to which the Gray-code walk is used.
    pub exact_cap: usize,
    pub ris_trials: usize,
    /// Partial supports the low-weight search may visit to confirm an RIS
    /// bound; 0 disables confirmation.
    pub confirm_budget: u64,
}

impl Default for DistanceSettings {
    fn default() -> Self {
        DistanceSettings { exact_cap: DEFAULT_DIM_CAP, ris_trials: 1000, confirm_budget: 20_000_000 }
    }
}

/// Per side: exact walk when the kernel is small enough; otherwise an RIS
/// bound, confirmed as exact when a low-weight search below it finishes.
pub fn analyze(code: &CssCode, settings: &DistanceSettings, seed: u64) -> Result<DistanceReport> {
    let mut rep = DistanceReport::empty(settings.ris_trials, seed);
    if logical_count(code) == 0 {
        return Err(Error::NoLogicals);
    }
    for side in [CheckSide::X, CheckSide::Z] {
        let (h, _) = matrices(code, side);
        let kdim = h.cols() - h.rank();
        if kdim <= settings.exact_cap {
            let w = exact_witness(code, side, settings.exact_cap)?;
            rep.set(side, SideReport { upper: w.weight, exact: true, witness: Some(w) });
            continue;
        }
        let mut r = ris_side(code, side, settings.ris_trials, seed)?;
        if settings.confirm_budget > 0 && r.upper > 1 {
            let lw = low_weight_search(code, side, r.upper - 1, settings.confirm_budget)?;
            if let Some(w) = lw.witness {
                r = SideReport { upper: w.weight, exact: true, witness: Some(w) };
            } else if lw.exhausted {
                r.exact = true;
            }
        }
        rep.set(side, r);
    }
    Ok(rep)
}

/// Checks a witness: in the right kernel and outside the opposing row space.
pub fn verify_witness(code: &CssCode, side: CheckSide, w: &Witness) -> bool {
    let (h, modulo) = matrices(code, side);
    let v = words_from_support(code.n(), &w.support);
    w.support.len() == w.weight && h.mul_vec(&v).iter().all(|&x| x == 0) && !modulo.in_row_space(&v)
}
