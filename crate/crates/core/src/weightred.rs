//! Stabilizer weight reduction by bridged star graphs.
//!
//! A check `v` of weight `m` is replaced by `b + 1` checks (the arms) joined by
//! `b` new bridge qubits. Arm `i` holds the columns `P_i` plus the bridges on
//! either side of it, so `m = Σ m_i − 2b`. Bridge `i` is added to every dual
//! check `j` whose overlap with `P_1 ∪ … ∪ P_i` is odd; this is the only
//! choice that keeps every new check orthogonal to every dual check.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::chain::BitMatrix;
use crate::codes::{logical_count, CheckSide, CssCode};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BridgePlan {
    pub side: CheckSide,
    pub row: usize,
    /// Partition of the row support (column indices) into arms, in bridge order.
    pub arms: Vec<Vec<usize>>,
    /// For each bridge, the dual-side rows that receive it.
    pub bridges: Vec<Vec<usize>>,
}

/// How one dual check's overlap is cut by a bridge: the columns before the
/// bridge and the columns after it. Both are odd exactly when the dual check
/// receives the bridge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OddSplit {
    pub bridge: usize,
    pub dual_row: usize,
    pub before: Vec<usize>,
    pub after: Vec<usize>,
}

fn wr(msg: impl Into<String>) -> Error {
    Error::WeightReduction(msg.into())
}

/// Overlaps `E_j` of a row with every dual row, indexed by dual row.
fn overlaps(code: &CssCode, side: CheckSide, row: usize) -> Vec<Vec<usize>> {
    let h = code.checks(side);
    let dual = code.checks(side.other());
    let supp = h.row_support(row);
    (0..dual.rows()).map(|j| supp.iter().copied().filter(|&c| dual.get(j, c)).collect()).collect()
}

fn parity_targets(arms: &[Vec<usize>], e: &[Vec<usize>], cols: usize) -> Vec<Vec<usize>> {
    let mut arm_of = vec![usize::MAX; cols];
    for (i, a) in arms.iter().enumerate() {
        for &c in a {
            arm_of[c] = i;
        }
    }
    (0..arms.len() - 1)
        .map(|b| (0..e.len()).filter(|&j| e[j].iter().filter(|&&c| arm_of[c] <= b).count() % 2 == 1).collect())
        .collect()
}

impl BridgePlan {
    /// Builds a plan from an arm partition; the bridge targets follow from it.
    pub fn from_arms(code: &CssCode, side: CheckSide, row: usize, arms: Vec<Vec<usize>>) -> Result<Self> {
        if row >= code.checks(side).rows() {
            return Err(wr(format!("{side:?} row {row} does not exist")));
        }
        let e = overlaps(code, side, row);
        let mut plan = BridgePlan { side, row, arms, bridges: Vec::new() };
        plan.check_partition(code)?;
        plan.bridges = parity_targets(&plan.arms, &e, code.n());
        plan.check_bridges()?;
        Ok(plan)
    }

    /// Star sizes `m_i`, counting bridge edges.
    pub fn arm_sizes(&self) -> Vec<usize> {
        let last = self.arms.len() - 1;
        self.arms.iter().enumerate().map(|(i, a)| a.len() + if i == 0 || i == last { 1 } else { 2 }).collect()
    }

    pub fn num_bridges(&self) -> usize {
        self.arms.len().saturating_sub(1)
    }

    fn check_partition(&self, code: &CssCode) -> Result<()> {
        if self.arms.len() < 2 {
            return Err(wr("a plan needs at least two arms"));
        }
        let mut cols: Vec<usize> = self.arms.iter().flatten().copied().collect();
        cols.sort_unstable();
        let before = cols.len();
        cols.dedup();
        if cols.len() != before || cols != code.checks(self.side).row_support(self.row) {
            return Err(wr("arms do not partition the row support"));
        }
        if let Some(m) = self.arm_sizes().into_iter().find(|&m| m < 3) {
            return Err(wr(format!("arm of size {m} is below 3")));
        }
        Ok(())
    }

    fn check_bridges(&self) -> Result<()> {
        if self.bridges.len() != self.num_bridges() {
            return Err(wr("one target list per bridge is required"));
        }
        if let Some(i) = self.bridges.iter().position(Vec::is_empty) {
            return Err(wr(format!("bridge {i} touches no dual check")));
        }
        Ok(())
    }

    /// The odd splits of every dual check receiving a bridge.
    pub fn odd_splits(&self, code: &CssCode) -> Vec<OddSplit> {
        let e = overlaps(code, self.side, self.row);
        let mut out = Vec::new();
        for (b, targets) in self.bridges.iter().enumerate() {
            let before_cols: Vec<usize> = self.arms[..=b].iter().flatten().copied().collect();
            for &j in targets {
                let (before, after) = e[j].iter().partition(|c| before_cols.contains(c));
                out.push(OddSplit { bridge: b, dual_row: j, before, after });
            }
        }
        out
    }
}

/// Column sizes `|P_i|` implied by star sizes `m_i`.
fn part_sizes(arm_sizes: &[usize]) -> Vec<usize> {
    let last = arm_sizes.len() - 1;
    arm_sizes.iter().enumerate().map(|(i, &m)| m.saturating_sub(if i == 0 || i == last { 1 } else { 2 })).collect()
}

/// Default deterministic plan. The anchor is the lowest dual row with a
/// nonempty overlap: its first column goes to the first arm and the rest to
/// the last arm. Remaining columns are placed in ascending order, each next to
/// already placed columns of the same dual check when there is room, otherwise
/// in the first arm with room.
pub fn propose_split(code: &CssCode, side: CheckSide, row: usize, arm_sizes: &[usize]) -> Result<BridgePlan> {
    let h = code.checks(side);
    if row >= h.rows() {
        return Err(wr(format!("{side:?} row {row} does not exist")));
    }
    let supp = h.row_support(row);
    let m = supp.len();
    if arm_sizes.len() < 2 {
        return Err(wr("need at least two arms"));
    }
    if arm_sizes.iter().any(|&a| a < 3) {
        return Err(wr("arm sizes must be at least 3"));
    }
    let b = arm_sizes.len() - 1;
    if arm_sizes.iter().sum::<usize>() != m + 2 * b {
        return Err(wr(format!("arm sizes {arm_sizes:?} do not match weight {m} with {b} bridges")));
    }
    let e = overlaps(code, side, row);
    if m == 4 && e.iter().any(|x| x.len() >= 4) {
        return Err(wr("weight-4 check shares all four columns with one dual check"));
    }
    let caps = part_sizes(arm_sizes);
    let mut arms: Vec<Vec<usize>> = vec![Vec::new(); b + 1];
    let mut placed = vec![usize::MAX; code.n()];
    let put = |arms: &mut Vec<Vec<usize>>, placed: &mut Vec<usize>, c: usize, a: usize| {
        arms[a].push(c);
        placed[c] = a;
    };
    let anchor = e.iter().position(|x| !x.is_empty()).ok_or_else(|| wr("row shares no column with any dual check"))?;
    put(&mut arms, &mut placed, e[anchor][0], 0);
    for &c in &e[anchor][1..] {
        let a = (0..=b).rev().find(|&a| arms[a].len() < caps[a]).ok_or_else(|| wr("no room for anchor columns"))?;
        put(&mut arms, &mut placed, c, a);
    }
    let mut duals_of: Vec<Vec<usize>> = vec![Vec::new(); code.n()];
    for (j, x) in e.iter().enumerate() {
        for &c in x {
            duals_of[c].push(j);
        }
    }
    for &c in &supp {
        if placed[c] != usize::MAX {
            continue;
        }
        let preferred = duals_of[c].iter().flat_map(|&j| e[j].iter()).map(|&d| placed[d]).filter(|&a| a != usize::MAX && arms[a].len() < caps[a]).min();
        let a = preferred.or_else(|| (0..=b).find(|&a| arms[a].len() < caps[a])).ok_or_else(|| wr("arm capacities exhausted"))?;
        put(&mut arms, &mut placed, c, a);
    }
    for a in &mut arms {
        a.sort_unstable();
    }
    BridgePlan::from_arms(code, side, row, arms)
}

/// Replaces the planned row by its arms and appends one qubit per bridge.
/// The first arm takes the row's place; further arms are appended in order.
pub fn apply_bridge(code: &CssCode, plan: &BridgePlan) -> Result<CssCode> {
    plan.check_partition(code)?;
    plan.check_bridges()?;
    let n = code.n();
    let b = plan.num_bridges();
    let dual_rows = code.checks(plan.side.other()).rows();
    if plan.bridges.iter().flatten().any(|&j| j >= dual_rows) {
        return Err(wr("bridge target out of range"));
    }
    let labels: Vec<String> = (n..n + b).map(|i| format!("q{i}")).collect();
    let h = code.checks(plan.side).add_zero_cols(b, Some(labels.clone()));
    let mut dual = code.checks(plan.side.other()).add_zero_cols(b, Some(labels));
    for (i, targets) in plan.bridges.iter().enumerate() {
        for &j in targets {
            dual.set(j, n + i, true);
        }
    }
    let base_label = h.row_labels().map(|l| l[plan.row].clone()).unwrap_or_else(|| format!("r{}", plan.row));
    let arm_row = |i: usize| {
        let mut cols = plan.arms[i].clone();
        if i > 0 {
            cols.push(n + i - 1);
        }
        if i < b {
            cols.push(n + i);
        }
        cols
    };
    let mut h = h;
    let first = BitMatrix::from_supports(n + b, &[arm_row(0)]);
    h.row_mut(plan.row).copy_from_slice(first.row(0));
    let mut row_labels: Vec<String> = h.row_labels().map(<[String]>::to_vec).unwrap_or_default();
    if !row_labels.is_empty() {
        row_labels[plan.row] = format!("{base_label}.1");
        h.set_row_labels(Some(row_labels));
    }
    for i in 1..=b {
        let r = BitMatrix::from_supports(n + b, &[arm_row(i)]);
        h.push_row(r.row(0), Some(format!("{base_label}.{}", i + 1)));
    }
    let (hx, hz) = match plan.side {
        CheckSide::X => (h, dual),
        CheckSide::Z => (dual, h),
    };
    let out = code.replace(hx, hz).map_err(|e| wr(format!("plan breaks orthogonality: {e}")))?;
    if logical_count(&out) != logical_count(code) {
        return Err(wr("bridge changed the number of logical qubits"));
    }
    Ok(out.with_log("bridge", json!(plan)))
}

/// Star sizes for splitting weight `m` into as few arms of size at most
/// `w_max` as possible, as even as possible.
pub fn balanced_arms(m: usize, w_max: usize) -> Option<Vec<usize>> {
    if w_max < 4 || m <= w_max {
        return None;
    }
    let mut b = 1;
    while 2 * (w_max - 1) + (b - 1) * (w_max - 2) < m {
        b += 1;
    }
    // Spread the m + 2b star edges evenly; end arms own one bridge edge each.
    let total = m + 2 * b;
    let k = b + 1;
    let mut sizes: Vec<usize> = (0..k).map(|i| total / k + usize::from(i < total % k)).collect();
    sizes.sort_unstable();
    if sizes.iter().any(|&s| s < 3 || s > w_max) {
        return None;
    }
    Some(sizes)
}

#[derive(Clone, Debug, Serialize)]
pub struct HeavyRow {
    pub side: CheckSide,
    pub row: usize,
    pub weight: usize,
}

#[derive(Clone, Debug)]
pub struct ReductionReport {
    pub code: CssCode,
    pub plans: Vec<BridgePlan>,
    pub iterations: usize,
    /// Rows still above the threshold, heaviest first.
    pub residual: Vec<HeavyRow>,
    /// Rows for which no valid plan was found.
    pub failed: Vec<HeavyRow>,
}

fn heavy_rows(code: &CssCode, w_max: usize) -> Vec<HeavyRow> {
    let mut out = Vec::new();
    for side in [CheckSide::X, CheckSide::Z] {
        for (row, weight) in code.checks(side).row_weights().into_iter().enumerate() {
            if weight > w_max {
                out.push(HeavyRow { side, row, weight });
            }
        }
    }
    out.sort_by(|a, b| b.weight.cmp(&a.weight).then((a.side as u8).cmp(&(b.side as u8))).then(a.row.cmp(&b.row)));
    out
}

/// Repeatedly splits the heaviest row above `w_max` with balanced arms until
/// no row exceeds `w_max` or `max_iters` splits were made. Rows without a
/// valid plan are skipped and reported.
pub fn reduce_to_threshold(code: &CssCode, w_max: usize, max_iters: usize) -> Result<ReductionReport> {
    if w_max < 4 {
        return Err(wr("threshold must be at least 4"));
    }
    let mut cur = code.clone();
    let mut plans = Vec::new();
    let mut failed: Vec<HeavyRow> = Vec::new();
    let mut iterations = 0;
    while iterations < max_iters {
        let candidates = heavy_rows(&cur, w_max);
        let next = candidates.into_iter().find(|h| !failed.iter().any(|f| f.side == h.side && f.row == h.row));
        let Some(h) = next else { break };
        let sizes = balanced_arms(h.weight, w_max).ok_or_else(|| wr("no arm sizes fit the threshold"))?;
        let mut attempt = propose_split(&cur, h.side, h.row, &sizes);
        if attempt.is_err() {
            let rev: Vec<usize> = sizes.iter().rev().copied().collect();
            attempt = propose_split(&cur, h.side, h.row, &rev);
        }
        match attempt {
            Ok(plan) => {
                cur = apply_bridge(&cur, &plan)?;
                plans.push(plan);
                iterations += 1;
            }
            Err(_) => failed.push(h),
        }
    }
    let residual = heavy_rows(&cur, w_max);
    Ok(ReductionReport { code: cur, plans, iterations, residual, failed })
}
