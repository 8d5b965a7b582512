//! S⁰ (diamond), S¹ (crown) and S² substructures of layered subposets.
//!
//! Every record addresses elements by (absolute rank, index within the layer)
//! of the parent interval.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bruhat::{BruhatInterval, LayeredSubposet};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrownSide {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SphereKind {
    Diamond,
    Crown { k: usize, side: CrownSide },
    S2,
}

/// A closed interval `[b̂, t̂]` whose open part is a sphere.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SphereRecord {
    pub kind: SphereKind,
    pub bottom_rank: usize,
    pub bottom: u32,
    pub top_rank: usize,
    pub top: u32,
    /// Open-interval members, one sorted index list per rank
    /// `bottom_rank + 1 ..= top_rank − 1`.
    pub members: Vec<Vec<u32>>,
}

impl SphereRecord {
    pub fn members_at(&self, rank: usize) -> &[u32] {
        &self.members[rank - self.bottom_rank - 1]
    }

    /// Check rows this structure splices: the lower middle layer of a left
    /// crown, the upper middle layer of a right crown, and for S² the 0-cells.
    pub fn splice_rows(&self) -> &[u32] {
        match self.kind {
            SphereKind::Crown { side: CrownSide::Right, .. } => &self.members[1],
            SphereKind::Diamond => &[],
            _ => &self.members[0],
        }
    }

    /// `(V, E, F)` for S² records.
    pub fn cells(&self) -> Option<(usize, usize, usize)> {
        (self.kind == SphereKind::S2).then(|| (self.members[0].len(), self.members[1].len(), self.members[2].len()))
    }

    /// 0-cells (lower layer) and 2-cells (upper layer) of an S² record.
    pub fn s2_rows(&self) -> (&[u32], &[u32]) {
        (&self.members[0], &self.members[2])
    }
}

/// Outcome of a structural verification, with a reason code on failure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verification {
    pub ok: bool,
    pub reason: Option<String>,
}

impl Verification {
    fn pass() -> Self {
        Verification { ok: true, reason: None }
    }

    fn fail(reason: impl Into<String>) -> Self {
        Verification { ok: false, reason: Some(reason.into()) }
    }
}

/// All closed intervals `[b, t]` with `b` at `rank`, `t` at `rank + len`.
fn intervals_from(iv: &BruhatInterval, rank: usize, len: usize) -> Vec<(u32, u32, Vec<Vec<u32>>)> {
    let mut out = Vec::new();
    for b in 0..iv.layer(rank).len() {
        // Upward closure layer by layer.
        let mut ups: Vec<Vec<u32>> = vec![vec![b as u32]];
        for r in rank..rank + len {
            let mut next: Vec<u32> = ups.last().unwrap().iter().flat_map(|&i| iv.up(r, i as usize).iter().copied()).collect();
            next.sort_unstable();
            next.dedup();
            ups.push(next);
        }
        for &t in &ups[len] {
            let sub = iv.subinterval(rank, b, rank + len, t as usize);
            let members = sub[1..len].to_vec();
            out.push((b as u32, t, members));
        }
    }
    out
}

fn require_ranks(sub: &LayeredSubposet<'_>, lo: usize, hi: usize) -> Result<()> {
    if lo < sub.min_rank() || hi > sub.max_rank() {
        return Err(Error::RankBounds(format!("layers {lo}..={hi} not inside the subposet")));
    }
    Ok(())
}

/// Diamonds `[x, z]` with `x ∈ l_{p−1}`, `z ∈ l_{p+1}`.
pub fn enumerate_diamonds(sub: &LayeredSubposet<'_>, p: usize) -> Result<Vec<SphereRecord>> {
    if p == 0 {
        return Err(Error::RankBounds("p must be at least 1".into()));
    }
    require_ranks(sub, p - 1, p + 1)?;
    let iv = sub.interval();
    let mut out = Vec::new();
    for (b, t, members) in intervals_from(iv, p - 1, 2) {
        if members[0].len() != 2 {
            return Err(Error::Structural(format!(
                "length-2 interval between l_{}[{b}] and l_{}[{t}] has {} middle elements",
                p - 1,
                p + 1,
                members[0].len()
            )));
        }
        out.push(SphereRecord { kind: SphereKind::Diamond, bottom_rank: p - 1, bottom: b, top_rank: p + 1, top: t, members });
    }
    Ok(out)
}

/// Left crowns (`b̂ ∈ l_{p−2}`, `t̂ ∈ l_{p+1}`) or right crowns
/// (`b̂ ∈ l_{p−1}`, `t̂ ∈ l_{p+2}`) of a 5-layer subposet centered at `p`.
pub fn enumerate_crowns(sub: &LayeredSubposet<'_>, side: CrownSide) -> Result<Vec<SphereRecord>> {
    let p = sub.center();
    if p < 2 {
        return Err(Error::RankBounds("crowns need p ≥ 2".into()));
    }
    let lo = match side {
        CrownSide::Left => p - 2,
        CrownSide::Right => p - 1,
    };
    require_ranks(sub, lo, lo + 3)?;
    let mut out = Vec::new();
    for (b, t, members) in intervals_from(sub.interval(), lo, 3) {
        let k = members[0].len();
        let rec = SphereRecord {
            kind: SphereKind::Crown { k, side },
            bottom_rank: lo,
            bottom: b,
            top_rank: lo + 3,
            top: t,
            members,
        };
        let v = verify_crown(&rec, sub);
        if !v.ok {
            return Err(Error::Structural(format!("interval l_{lo}[{b}]..l_{}[{t}] is not a crown: {}", lo + 3, v.reason.unwrap())));
        }
        out.push(rec);
    }
    Ok(out)
}

/// S² intervals `[b̂, t̂]` with `b̂ ∈ l_{p−2}`, `t̂ ∈ l_{p+2}`.
pub fn enumerate_s2(sub: &LayeredSubposet<'_>) -> Result<Vec<SphereRecord>> {
    let p = sub.center();
    if p < 2 {
        return Err(Error::RankBounds("S² records need p ≥ 2".into()));
    }
    require_ranks(sub, p - 2, p + 2)?;
    let mut out = Vec::new();
    for (b, t, members) in intervals_from(sub.interval(), p - 2, 4) {
        let rec = SphereRecord { kind: SphereKind::S2, bottom_rank: p - 2, bottom: b, top_rank: p + 2, top: t, members };
        let v = verify_s2(&rec, sub);
        if !v.ok {
            return Err(Error::Structural(format!("interval l_{}[{b}]..l_{}[{t}] is not an S²: {}", p - 2, p + 2, v.reason.unwrap())));
        }
        out.push(rec);
    }
    Ok(out)
}

fn check_membership(rec: &SphereRecord, sub: &LayeredSubposet<'_>, len: usize) -> Option<Verification> {
    let iv = sub.interval();
    if rec.top_rank != rec.bottom_rank + len || rec.members.len() != len - 1 {
        return Some(Verification::fail("wrong-length"));
    }
    if !sub.contains_rank(rec.bottom_rank) || !sub.contains_rank(rec.top_rank) {
        return Some(Verification::fail("outside-subposet"));
    }
    if rec.bottom as usize >= iv.layer(rec.bottom_rank).len() || rec.top as usize >= iv.layer(rec.top_rank).len() {
        return Some(Verification::fail("index-out-of-range"));
    }
    let actual = iv.subinterval(rec.bottom_rank, rec.bottom as usize, rec.top_rank, rec.top as usize);
    if actual[0].is_empty() {
        return Some(Verification::fail("not-comparable"));
    }
    if actual[1..len] != rec.members[..] {
        return Some(Verification::fail("members-differ-from-interval"));
    }
    None
}

/// Number of covers of `x` (at `rank`) inside `set` (at `rank − 1`).
fn down_degree(iv: &BruhatInterval, rank: usize, x: u32, set: &[u32]) -> usize {
    iv.down(rank, x as usize).iter().filter(|d| set.binary_search(d).is_ok()).count()
}

fn up_degree(iv: &BruhatInterval, rank: usize, x: u32, set: &[u32]) -> usize {
    iv.up(rank, x as usize).iter().filter(|d| set.binary_search(d).is_ok()).count()
}

/// Middle layers form a single `2k`-cycle with `k ≥ 2`.
pub fn verify_crown(rec: &SphereRecord, sub: &LayeredSubposet<'_>) -> Verification {
    if let Some(f) = check_membership(rec, sub, 3) {
        return f;
    }
    let iv = sub.interval();
    let (lo, hi) = (&rec.members[0], &rec.members[1]);
    let k = lo.len();
    if k < 2 || hi.len() != k {
        return Verification::fail("middle-layer-sizes");
    }
    if let SphereKind::Crown { k: rk, .. } = rec.kind {
        if rk != k {
            return Verification::fail("recorded-k-mismatch");
        }
    }
    let r = rec.bottom_rank + 1;
    if lo.iter().any(|&a| up_degree(iv, r, a, hi) != 2) || hi.iter().any(|&c| down_degree(iv, r + 1, c, lo) != 2) {
        return Verification::fail("degree-not-two");
    }
    // Walk the cycle from lo[0]; a single cycle visits all 2k vertices.
    let mut visited = 0usize;
    let mut prev_hi: Option<u32> = None;
    let mut cur = lo[0];
    loop {
        let ups: Vec<u32> = iv.up(r, cur as usize).iter().copied().filter(|d| hi.binary_search(d).is_ok()).collect();
        let next_hi = if Some(ups[0]) == prev_hi { ups[1] } else { ups[0] };
        let downs: Vec<u32> = iv.down(r + 1, next_hi as usize).iter().copied().filter(|d| lo.binary_search(d).is_ok()).collect();
        let next_lo = if downs[0] == cur { downs[1] } else { downs[0] };
        visited += 2;
        prev_hi = Some(next_hi);
        cur = next_lo;
        if cur == lo[0] {
            break;
        }
        if visited > 2 * k {
            return Verification::fail("not-a-cycle");
        }
    }
    if visited != 2 * k {
        return Verification::fail("multiple-cycles");
    }
    Verification::pass()
}

/// Euler characteristic 2, every edge on two vertices and in two faces,
/// connected 1-skeleton.
pub fn verify_s2(rec: &SphereRecord, sub: &LayeredSubposet<'_>) -> Verification {
    if let Some(f) = check_membership(rec, sub, 4) {
        return f;
    }
    let iv = sub.interval();
    let (v, e, f) = (&rec.members[0], &rec.members[1], &rec.members[2]);
    if v.len() + f.len() != e.len() + 2 {
        return Verification::fail("euler-characteristic");
    }
    let r = rec.bottom_rank + 2;
    if e.iter().any(|&x| down_degree(iv, r, x, v) != 2) {
        return Verification::fail("edge-vertex-count");
    }
    if e.iter().any(|&x| up_degree(iv, r, x, f) != 2) {
        return Verification::fail("edge-face-count");
    }
    // Union-find over vertices joined by edges.
    let mut parent: Vec<usize> = (0..v.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut x = x;
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &x in e {
        let ends: Vec<usize> = iv.down(r, x as usize).iter().filter_map(|d| v.binary_search(d).ok()).collect();
        let (a, b) = (find(&mut parent, ends[0]), find(&mut parent, ends[1]));
        parent[a] = b;
    }
    let root = find(&mut parent, 0);
    if (0..v.len()).any(|i| find(&mut parent, i) != root) {
        return Verification::fail("disconnected-1-skeleton");
    }
    Verification::pass()
}

/// Counts of structures by kind, crown side and size, and S² cell counts.
#[derive(Clone, Debug, Default, Serialize)]
pub struct SphereCensus {
    pub diamonds: usize,
    pub left_crowns: BTreeMap<usize, usize>,
    pub right_crowns: BTreeMap<usize, usize>,
    /// Keyed by `"V,E,F"`.
    pub s2: BTreeMap<String, usize>,
}

impl SphereCensus {
    pub fn add(&mut self, recs: &[SphereRecord]) {
        for r in recs {
            match r.kind {
                SphereKind::Diamond => self.diamonds += 1,
                SphereKind::Crown { k, side: CrownSide::Left } => *self.left_crowns.entry(k).or_default() += 1,
                SphereKind::Crown { k, side: CrownSide::Right } => *self.right_crowns.entry(k).or_default() += 1,
                SphereKind::S2 => {
                    let (v, e, f) = r.cells().unwrap();
                    *self.s2.entry(format!("{v},{e},{f}")).or_default() += 1;
                }
            }
        }
    }

    /// Census of a 5-layer subposet.
    pub fn of_subposet(sub: &LayeredSubposet<'_>) -> Result<Self> {
        let mut c = SphereCensus::default();
        c.add(&enumerate_diamonds(sub, sub.center())?);
        c.add(&enumerate_crowns(sub, CrownSide::Left)?);
        c.add(&enumerate_crowns(sub, CrownSide::Right)?);
        c.add(&enumerate_s2(sub)?);
        Ok(c)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("census serializes")
    }
}
