//! Bruhat intervals as graded posets.
//!
//! Intervals are enumerated downward from the top element by deleting letters
//! of reduced words (strong exchange), so only `[id, w_t]` is ever touched,
//! which keeps infinite groups tractable. The result is then restricted to the
//! elements above `w_b`.

use std::collections::HashMap;
use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::Serialize;

use crate::coxeter::{format_word, parse_word, CoxeterSystem, ElemKey, GroupElement};
use crate::error::{Error, Result};

pub const DEFAULT_SIZE_CAP: usize = 5_000_000;

/// All `u ⋖ w`, sorted by canonical key.
pub fn lower_covers(sys: &CoxeterSystem, w: &GroupElement) -> Vec<GroupElement> {
    sys.lower_covers(w)
}

/// A closed Bruhat interval `[w_b, w_t]` with its Hasse diagram.
///
/// Layers are indexed by absolute rank (group length); `down[r][i]` lists the
/// indices in layer `r − 1` covered by element `i` of layer `r`.
#[derive(Clone, Debug)]
pub struct BruhatInterval {
    system: CoxeterSystem,
    bottom: GroupElement,
    top: GroupElement,
    bottom_word_reduced: bool,
    top_word_reduced: bool,
    layers: Vec<Vec<GroupElement>>,
    down: Vec<Vec<Vec<u32>>>,
    up: Vec<Vec<Vec<u32>>>,
}

impl BruhatInterval {
    /// Builds the interval from (not necessarily reduced) words.
    pub fn from_words(sys: &CoxeterSystem, wb: &[u8], wt: &[u8], cap: usize) -> Result<Self> {
        let b = sys.reduce_word(wb)?;
        let t = sys.reduce_word(wt)?;
        let mut iv = build_interval_capped(sys, &b, &t, cap)?;
        iv.bottom_word_reduced = b.length() == wb.len();
        iv.top_word_reduced = t.length() == wt.len();
        if !iv.top_word_reduced {
            log::warn!("top word {} is not reduced (length {} < {})", format_word(wt), t.length(), wt.len());
        }
        Ok(iv)
    }

    /// Convenience: parse the words with the word grammar.
    pub fn from_word_text(sys: &CoxeterSystem, wb: &str, wt: &str) -> Result<Self> {
        let b = parse_word(sys, wb)?;
        let t = parse_word(sys, wt)?;
        Self::from_words(sys, &b, &t, DEFAULT_SIZE_CAP)
    }

    pub fn system(&self) -> &CoxeterSystem {
        &self.system
    }

    pub fn bottom(&self) -> &GroupElement {
        &self.bottom
    }

    pub fn top(&self) -> &GroupElement {
        &self.top
    }

    pub fn top_word_reduced(&self) -> bool {
        self.top_word_reduced
    }

    pub fn bottom_word_reduced(&self) -> bool {
        self.bottom_word_reduced
    }

    pub fn min_rank(&self) -> usize {
        self.bottom.length()
    }

    pub fn max_rank(&self) -> usize {
        self.top.length()
    }

    /// `ℓ(w_t) − ℓ(w_b)`.
    pub fn length(&self) -> usize {
        self.max_rank() - self.min_rank()
    }

    pub fn len(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        self.layers.iter().map(Vec::len).collect()
    }

    fn idx(&self, rank: usize) -> usize {
        assert!(rank >= self.min_rank() && rank <= self.max_rank(), "rank {rank} outside the interval");
        rank - self.min_rank()
    }

    pub fn layer(&self, rank: usize) -> &[GroupElement] {
        &self.layers[self.idx(rank)]
    }

    /// Indices in layer `rank − 1` covered by `layer(rank)[i]`.
    pub fn down(&self, rank: usize, i: usize) -> &[u32] {
        &self.down[self.idx(rank)][i]
    }

    /// Indices in layer `rank + 1` covering `layer(rank)[i]`.
    pub fn up(&self, rank: usize, i: usize) -> &[u32] {
        &self.up[self.idx(rank)][i]
    }

    /// Cover edges `(lower index, upper index)` between ranks `rank − 1` and `rank`.
    pub fn covers(&self, rank: usize) -> Vec<(u32, u32)> {
        let r = self.idx(rank);
        let mut out = Vec::new();
        for (j, ds) in self.down[r].iter().enumerate() {
            for &i in ds {
                out.push((i, j as u32));
            }
        }
        out
    }

    pub fn position(&self, rank: usize, key: &ElemKey) -> Option<usize> {
        self.layer(rank).iter().position(|e| e.key() == key)
    }

    /// Members of the closed subinterval `[x, z]` for `x` at `rank_x` and `z` at
    /// `rank_z`, one sorted index list per rank (from `rank_x` to `rank_z`).
    /// Empty when `x ≰ z`.
    pub fn subinterval(&self, rank_x: usize, x: usize, rank_z: usize, z: usize) -> Vec<Vec<u32>> {
        assert!(rank_x <= rank_z);
        // Downward closure from z, then keep what is reachable upward from x.
        let mut below: Vec<Vec<u32>> = vec![vec![z as u32]];
        for r in (rank_x..rank_z).rev() {
            let mut next: Vec<u32> = below.last().unwrap().iter().flat_map(|&i| self.down(r + 1, i as usize).iter().copied()).collect();
            next.sort_unstable();
            next.dedup();
            below.push(next);
        }
        below.reverse();
        if !below[0].contains(&(x as u32)) {
            return vec![Vec::new(); rank_z - rank_x + 1];
        }
        let mut out: Vec<Vec<u32>> = vec![vec![x as u32]];
        for (step, r) in (rank_x..rank_z).enumerate() {
            let mut next: Vec<u32> = out
                .last()
                .unwrap()
                .iter()
                .flat_map(|&i| self.up(r, i as usize).iter().copied())
                .filter(|j| below[step + 1].binary_search(j).is_ok())
                .collect();
            next.sort_unstable();
            next.dedup();
            out.push(next);
        }
        out
    }

    /// `x ≤ z` for elements addressed by (rank, index).
    pub fn leq(&self, rank_x: usize, x: usize, rank_z: usize, z: usize) -> bool {
        if rank_x > rank_z {
            return false;
        }
        let mut frontier = vec![z as u32];
        for r in (rank_x..rank_z).rev() {
            let mut next: Vec<u32> = frontier.iter().flat_map(|&i| self.down(r + 1, i as usize).iter().copied()).collect();
            next.sort_unstable();
            next.dedup();
            frontier = next;
        }
        frontier.contains(&(x as u32))
    }

    pub fn layered_subposet(&self, p: usize, k: usize) -> Result<LayeredSubposet<'_>> {
        LayeredSubposet::new(self, p, k)
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct IntervalJson {
            group: String,
            bottom: String,
            top: String,
            min_rank: usize,
            layer_sizes: Vec<usize>,
            layers: Vec<Vec<String>>,
            covers: Vec<[usize; 2]>,
        }
        let mut offsets = vec![0usize];
        for l in &self.layers {
            offsets.push(offsets.last().unwrap() + l.len());
        }
        let mut covers = Vec::new();
        for r in 1..self.layers.len() {
            for (j, ds) in self.down[r].iter().enumerate() {
                for &i in ds {
                    covers.push([offsets[r - 1] + i as usize, offsets[r] + j]);
                }
            }
        }
        serde_json::to_value(IntervalJson {
            group: self.system.spec().to_string(),
            bottom: self.bottom.to_string(),
            top: self.top.to_string(),
            min_rank: self.min_rank(),
            layer_sizes: self.layer_sizes(),
            layers: self.layers.iter().map(|l| l.iter().map(|e| e.to_string()).collect()).collect(),
            covers,
        })
        .expect("interval serializes")
    }

    /// Cache key for the binary format.
    pub fn cache_key(&self) -> String {
        format!("{}|{}|{}", self.system.spec(), self.bottom, self.top)
    }

    /// Compact binary cache: words per layer and downward adjacency.
    pub fn write_cache<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(CACHE_MAGIC)?;
        let key = self.cache_key();
        w.write_u32::<LittleEndian>(key.len() as u32)?;
        w.write_all(key.as_bytes())?;
        w.write_u8(self.bottom_word_reduced as u8 | (self.top_word_reduced as u8) << 1)?;
        w.write_u32::<LittleEndian>(self.layers.len() as u32)?;
        for (r, layer) in self.layers.iter().enumerate() {
            w.write_u32::<LittleEndian>(layer.len() as u32)?;
            for (i, e) in layer.iter().enumerate() {
                w.write_u16::<LittleEndian>(e.word().len() as u16)?;
                w.write_all(e.word())?;
                let ds = &self.down[r][i];
                w.write_u32::<LittleEndian>(ds.len() as u32)?;
                for &d in ds {
                    w.write_u32::<LittleEndian>(d)?;
                }
            }
        }
        Ok(())
    }

    /// Reads a cache written by [`write_cache`](Self::write_cache); the stored
    /// key must match `(system, w_b, w_t)` exactly.
    pub fn read_cache<R: Read>(sys: &CoxeterSystem, wb: &GroupElement, wt: &GroupElement, mut r: R) -> Result<Self> {
        let bad = |m: &str| Error::Format(format!("interval cache: {m}"));
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(bad("bad magic"));
        }
        let klen = r.read_u32::<LittleEndian>()? as usize;
        let mut kbuf = vec![0u8; klen];
        r.read_exact(&mut kbuf)?;
        let want = format!("{}|{}|{}", sys.spec(), wb, wt);
        if kbuf != want.as_bytes() {
            return Err(bad("key mismatch"));
        }
        let flags = r.read_u8()?;
        let nlayers = r.read_u32::<LittleEndian>()? as usize;
        if wb.length() > wt.length() || nlayers != wt.length() - wb.length() + 1 {
            return Err(bad("layer count mismatch"));
        }
        let mut layers = Vec::with_capacity(nlayers);
        let mut down = Vec::with_capacity(nlayers);
        for li in 0..nlayers {
            let n = r.read_u32::<LittleEndian>()? as usize;
            let mut layer = Vec::with_capacity(n);
            let mut ds = Vec::with_capacity(n);
            for _ in 0..n {
                let wl = r.read_u16::<LittleEndian>()? as usize;
                let mut word = vec![0u8; wl];
                r.read_exact(&mut word)?;
                let e = sys.reduce_word(&word)?;
                if e.length() != wb.length() + li || e.word() != word.as_slice() {
                    return Err(bad("stored word is not canonical"));
                }
                layer.push(e);
                let dn = r.read_u32::<LittleEndian>()? as usize;
                let mut d = Vec::with_capacity(dn);
                for _ in 0..dn {
                    let v = r.read_u32::<LittleEndian>()?;
                    if li == 0 || v as usize >= layers.last().map_or(0, |l: &Vec<GroupElement>| l.len()) {
                        return Err(bad("cover index out of range"));
                    }
                    d.push(v);
                }
                ds.push(d);
            }
            layers.push(layer);
            down.push(ds);
        }
        let up = invert_adjacency(&layers, &down);
        Ok(BruhatInterval {
            system: sys.clone(),
            bottom: wb.clone(),
            top: wt.clone(),
            bottom_word_reduced: flags & 1 != 0,
            top_word_reduced: flags & 2 != 0,
            layers,
            down,
            up,
        })
    }
}

const CACHE_MAGIC: &[u8; 4] = b"BRI1";

fn invert_adjacency(layers: &[Vec<GroupElement>], down: &[Vec<Vec<u32>>]) -> Vec<Vec<Vec<u32>>> {
    let mut up: Vec<Vec<Vec<u32>>> = layers.iter().map(|l| vec![Vec::new(); l.len()]).collect();
    for r in 1..layers.len() {
        for (j, ds) in down[r].iter().enumerate() {
            for &i in ds {
                up[r - 1][i as usize].push(j as u32);
            }
        }
    }
    up
}

pub fn build_interval(sys: &CoxeterSystem, wb: &GroupElement, wt: &GroupElement) -> Result<BruhatInterval> {
    build_interval_capped(sys, wb, wt, DEFAULT_SIZE_CAP)
}

/// Downward BFS from `w_t` to rank `ℓ(w_b)`, then restriction to `≥ w_b`.
///
/// Children of each parent are appended in canonical-key order, so the layer
/// order is a pure function of the inputs.
pub fn build_interval_capped(sys: &CoxeterSystem, wb: &GroupElement, wt: &GroupElement, cap: usize) -> Result<BruhatInterval> {
    let not_below = || Error::NotBelow { wb: wb.to_string(), wt: wt.to_string() };
    if wb.length() > wt.length() {
        return Err(not_below());
    }
    let lb = wb.length();
    let lt = wt.length();
    // Layers from the top down; reversed at the end.
    let mut rev_layers: Vec<Vec<GroupElement>> = vec![vec![wt.clone()]];
    let mut rev_down: Vec<Vec<Vec<u32>>> = Vec::new();
    let mut total = 1usize;
    for rank in (lb..lt).rev() {
        let parents = rev_layers.last().unwrap();
        let mut index: HashMap<ElemKey, u32> = HashMap::new();
        let mut layer: Vec<GroupElement> = Vec::new();
        let mut down: Vec<Vec<u32>> = Vec::with_capacity(parents.len());
        for w in parents {
            let mut keys = sys.lower_cover_keys(w);
            keys.sort();
            let mut ds = Vec::with_capacity(keys.len());
            for k in keys {
                let id = match index.get(&k) {
                    Some(&id) => id,
                    None => {
                        let id = layer.len() as u32;
                        index.insert(k.clone(), id);
                        layer.push(sys.element_from_key(k, rank));
                        total += 1;
                        if total > cap {
                            return Err(Error::SizeCap { cap });
                        }
                        id
                    }
                };
                ds.push(id);
            }
            ds.sort_unstable();
            down.push(ds);
        }
        rev_down.push(down);
        rev_layers.push(layer);
    }
    // Restrict to elements above w_b.
    let bottom_layer = rev_layers.last().unwrap();
    let b = bottom_layer.iter().position(|e| e == wb).ok_or_else(not_below)?;
    let nl = rev_layers.len();
    let mut keep: Vec<Vec<bool>> = rev_layers.iter().map(|l| vec![false; l.len()]).collect();
    keep[nl - 1][b] = true;
    for li in (0..nl - 1).rev() {
        // layer li is one rank above layer li + 1; rev_down[li] maps li → li + 1.
        for (j, ds) in rev_down[li].iter().enumerate() {
            if ds.iter().any(|&d| keep[li + 1][d as usize]) {
                keep[li][j] = true;
            }
        }
    }
    let mut layers = Vec::with_capacity(nl);
    let mut remap: Vec<Vec<u32>> = Vec::with_capacity(nl);
    for (li, layer) in rev_layers.into_iter().enumerate() {
        let mut map = vec![u32::MAX; layer.len()];
        let mut kept = Vec::new();
        for (i, e) in layer.into_iter().enumerate() {
            if keep[li][i] {
                map[i] = kept.len() as u32;
                kept.push(e);
            }
        }
        layers.push(kept);
        remap.push(map);
    }
    let mut down: Vec<Vec<Vec<u32>>> = Vec::with_capacity(nl);
    for li in 0..nl {
        if li == nl - 1 {
            down.push(vec![Vec::new(); layers[li].len()]);
            continue;
        }
        let mut d = Vec::with_capacity(layers[li].len());
        for (j, ds) in rev_down[li].iter().enumerate() {
            if remap[li][j] == u32::MAX {
                continue;
            }
            let mapped: Vec<u32> = ds.iter().map(|&x| remap[li + 1][x as usize]).filter(|&x| x != u32::MAX).collect();
            d.push(mapped);
        }
        down.push(d);
    }
    layers.reverse();
    down.reverse();
    let up = invert_adjacency(&layers, &down);
    Ok(BruhatInterval {
        system: sys.clone(),
        bottom: wb.clone(),
        top: wt.clone(),
        bottom_word_reduced: true,
        top_word_reduced: true,
        layers,
        down,
        up,
    })
}

/// The `2k + 1` consecutive layers centered at rank `p`.
#[derive(Clone, Copy, Debug)]
pub struct LayeredSubposet<'a> {
    interval: &'a BruhatInterval,
    p: usize,
    k: usize,
}

impl<'a> LayeredSubposet<'a> {
    pub fn new(interval: &'a BruhatInterval, p: usize, k: usize) -> Result<Self> {
        if p < k || p - k < interval.min_rank() || p + k > interval.max_rank() {
            return Err(Error::RankBounds(format!(
                "need {} <= p - k and p + k <= {} (p = {p}, k = {k})",
                interval.min_rank(),
                interval.max_rank()
            )));
        }
        Ok(LayeredSubposet { interval, p, k })
    }

    pub fn interval(&self) -> &'a BruhatInterval {
        self.interval
    }

    pub fn center(&self) -> usize {
        self.p
    }

    pub fn half_width(&self) -> usize {
        self.k
    }

    pub fn min_rank(&self) -> usize {
        self.p - self.k
    }

    pub fn max_rank(&self) -> usize {
        self.p + self.k
    }

    pub fn contains_rank(&self, rank: usize) -> bool {
        rank >= self.min_rank() && rank <= self.max_rank()
    }

    pub fn layer(&self, rank: usize) -> Result<&'a [GroupElement]> {
        if !self.contains_rank(rank) {
            return Err(Error::RankBounds(format!("layer {rank} outside [{}, {}]", self.min_rank(), self.max_rank())));
        }
        Ok(self.interval.layer(rank))
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        (self.min_rank()..=self.max_rank()).map(|r| self.interval.layer(r).len()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coxeter::parse_group_spec;

    fn full(spec: &str, wt: &str) -> BruhatInterval {
        let sys = parse_group_spec(spec).unwrap();
        BruhatInterval::from_word_text(&sys, "id", wt).unwrap()
    }

    #[test]
    fn a3_layers() {
        let iv = full("A3", "s1s2s3s1s2s1");
        assert_eq!(iv.layer_sizes(), vec![1, 3, 5, 6, 5, 3, 1]);
        assert_eq!(iv.len(), 24);
        assert_eq!(iv.layered_subposet(3, 1).unwrap().layer_sizes(), vec![5, 6, 5]);
        assert!(iv.layered_subposet(1, 3).is_err());
    }

    #[test]
    fn boolean_layers() {
        let iv = full("C2^4", "s1s2s3s4");
        assert_eq!(iv.layer_sizes(), vec![1, 4, 6, 4, 1]);
        let iv8 = full("C2^8", "s1s2s3s4s5s6s7s8");
        assert_eq!(iv8.layered_subposet(4, 2).unwrap().layer_sizes(), vec![28, 56, 70, 56, 28]);
    }

    #[test]
    fn lower_covers_examples() {
        let a3 = parse_group_spec("A3").unwrap();
        let s1 = a3.reduce_word(&[0]).unwrap();
        assert_eq!(lower_covers(&a3, &s1), vec![a3.identity()]);
        let w0 = a3.longest_element().unwrap();
        assert_eq!(lower_covers(&a3, &w0).len(), 3);
        let c = parse_group_spec("C2^4").unwrap();
        assert_eq!(lower_covers(&c, &c.reduce_word(&[0, 1, 2, 3]).unwrap()).len(), 4);
    }

    #[test]
    fn short_interval() {
        let a3 = parse_group_spec("A3").unwrap();
        let iv = BruhatInterval::from_word_text(&a3, "s1", "s1s2s1").unwrap();
        assert_eq!(iv.length(), 2);
        assert_eq!(iv.layer_sizes(), vec![1, 2, 1]);
    }

    #[test]
    fn not_below_is_an_error() {
        let a3 = parse_group_spec("A3").unwrap();
        assert!(matches!(BruhatInterval::from_word_text(&a3, "s3", "s1s2"), Err(Error::NotBelow { .. })));
    }

    #[test]
    fn size_cap() {
        let sys = parse_group_spec("A4").unwrap();
        let w0 = sys.longest_element().unwrap();
        assert!(matches!(build_interval_capped(&sys, &sys.identity(), &w0, 50), Err(Error::SizeCap { .. })));
    }

    #[test]
    fn cache_roundtrip() {
        let sys = parse_group_spec("triangle 2 3 7").unwrap();
        let iv = BruhatInterval::from_word_text(&sys, "s1", "(s1s2s3)^3").unwrap();
        let mut buf = Vec::new();
        iv.write_cache(&mut buf).unwrap();
        let back = BruhatInterval::read_cache(&sys, iv.bottom(), iv.top(), buf.as_slice()).unwrap();
        assert_eq!(back.layer_sizes(), iv.layer_sizes());
        for r in iv.min_rank()..=iv.max_rank() {
            assert_eq!(back.layer(r), iv.layer(r));
            assert_eq!(back.covers(r), iv.covers(r));
        }
        let other = sys.reduce_word(&[1]).unwrap();
        assert!(BruhatInterval::read_cache(&sys, &other, iv.top(), buf.as_slice()).is_err());
    }
}
