//! Code-producing transformations: row splicing, crown and S² splicing,
//! random splicing, diamond removal, and folding of longer chain complexes.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use log::{debug, warn};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bruhat::LayeredSubposet;
use crate::chain::{to_chain_complex, xor_into, BitMatrix, ChainComplex};
use crate::codes::{prune_decoupled_qubits, CheckSide, CssCode, SideConvention};
use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::spheres::{CrownSide, SphereKind, SphereRecord};

/// Probability of drawing a left crown in each coin flip.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BiasRepr", into = "BiasRepr")]
pub enum Bias {
    /// Fraction of left crowns among all crowns.
    Auto,
    /// `|l_{p−1}| / (|l_{p−1}| + |l_{p+1}|)`.
    Layers,
    Fixed(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BiasRepr {
    Num(f64),
    Name(String),
}

impl TryFrom<BiasRepr> for Bias {
    type Error = String;

    fn try_from(r: BiasRepr) -> std::result::Result<Self, String> {
        match r {
            BiasRepr::Num(x) => Ok(Bias::Fixed(x)),
            BiasRepr::Name(s) => s.parse(),
        }
    }
}

impl From<Bias> for BiasRepr {
    fn from(b: Bias) -> Self {
        match b {
            Bias::Fixed(x) => BiasRepr::Num(x),
            other => BiasRepr::Name(other.to_string()),
        }
    }
}

impl FromStr for Bias {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "auto" => Ok(Bias::Auto),
            "layers" => Ok(Bias::Layers),
            t => t.parse::<f64>().map(Bias::Fixed).map_err(|_| format!("bias must be `auto`, `layers` or a probability, got `{t}`")),
        }
    }
}

impl fmt::Display for Bias {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bias::Auto => f.write_str("auto"),
            Bias::Layers => f.write_str("layers"),
            Bias::Fixed(x) => write!(f, "{x}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpliceConfig {
    pub kappa: usize,
    pub lambda: usize,
    pub cutoff: usize,
    #[serde(default = "default_bias")]
    pub bias: Bias,
    #[serde(default)]
    pub seed: u64,
}

fn default_bias() -> Bias {
    Bias::Auto
}

impl Default for SpliceConfig {
    fn default() -> Self {
        SpliceConfig { kappa: 1, lambda: 0, cutoff: 10, bias: Bias::Auto, seed: 0 }
    }
}

impl SpliceConfig {
    /// `κ = 0` is accepted and means "no splicing".
    pub fn validate(&self) -> Result<()> {
        if self.cutoff == 0 {
            return Err(Error::InvalidArgument("cutoff must be at least 1".into()));
        }
        if let Bias::Fixed(x) = self.bias {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::InvalidArgument(format!("bias {x} is not a probability")));
            }
        }
        Ok(())
    }
}

/// Replaces the rows in `rows` by their sum, appended last.
pub fn splice_rows(h: &BitMatrix, rows: &[usize]) -> Result<BitMatrix> {
    splice_groups(h, &[rows.to_vec()])
}

/// Splices several groups at once. Each new row is the sum of the original
/// rows of its group; rows belonging to any group are removed once; untouched
/// rows keep their order and the new rows follow in group order.
pub fn splice_groups(h: &BitMatrix, groups: &[Vec<usize>]) -> Result<BitMatrix> {
    let mut grouped = vec![false; h.rows()];
    for g in groups {
        if g.is_empty() {
            return Err(Error::InvalidArgument("empty splice group".into()));
        }
        for &r in g {
            if r >= h.rows() {
                return Err(Error::InvalidArgument(format!("row {r} out of range (matrix has {} rows)", h.rows())));
            }
            grouped[r] = true;
        }
    }
    let keep: Vec<usize> = (0..h.rows()).filter(|&r| !grouped[r]).collect();
    let mut out = h.select_rows(&keep);
    for g in groups {
        let mut sum = vec![0u64; h.stride()];
        let mut uniq = g.clone();
        uniq.sort_unstable();
        uniq.dedup();
        for &r in &uniq {
            xor_into(&mut sum, h.row(r));
        }
        let label = h.row_labels().map(|l| uniq.iter().map(|&r| l[r].as_str()).collect::<Vec<_>>().join("+"));
        out.push_row(&sum, label);
    }
    Ok(out)
}

/// Splices row groups on both sides of a code.
pub fn splice_code(code: &CssCode, x_groups: &[Vec<usize>], z_groups: &[Vec<usize>]) -> Result<CssCode> {
    let hx = if x_groups.is_empty() { code.hx().clone() } else { splice_groups(code.hx(), x_groups)? };
    let hz = if z_groups.is_empty() { code.hz().clone() } else { splice_groups(code.hz(), z_groups)? };
    code.replace(hx, hz)
}

/// Left-crown fraction; 0.5 when there are no crowns at all.
pub fn bias_probability(crowns: &[SphereRecord]) -> f64 {
    let (l, r) = count_sides(crowns);
    if l + r == 0 {
        0.5
    } else {
        l as f64 / (l + r) as f64
    }
}

/// `|l_{p−1}| / (|l_{p−1}| + |l_{p+1}|)` read off the unpruned triple code.
pub fn layer_bias(code: &CssCode, convention: SideConvention) -> f64 {
    let lower = code.checks(convention.lower()).rows();
    let upper = code.checks(convention.lower().other()).rows();
    if lower + upper == 0 {
        0.5
    } else {
        lower as f64 / (lower + upper) as f64
    }
}

pub fn resolve_bias(bias: Bias, crowns: &[SphereRecord], code: &CssCode, convention: SideConvention) -> f64 {
    match bias {
        Bias::Auto => bias_probability(crowns),
        Bias::Layers => layer_bias(code, convention),
        Bias::Fixed(x) => x,
    }
}

fn count_sides(crowns: &[SphereRecord]) -> (usize, usize) {
    let mut l = 0;
    let mut r = 0;
    for c in crowns {
        match c.kind {
            SphereKind::Crown { side: CrownSide::Left, .. } => l += 1,
            SphereKind::Crown { side: CrownSide::Right, .. } => r += 1,
            _ => {}
        }
    }
    (l, r)
}

fn check_rows(rows: &[u32], code: &CssCode, side: CheckSide) -> Result<Vec<usize>> {
    let n = code.checks(side).rows();
    rows.iter()
        .map(|&r| {
            let r = r as usize;
            if r < n {
                Ok(r)
            } else {
                Err(Error::InvalidArgument(format!("record refers to {side:?} row {r}, code has {n}")))
            }
        })
        .collect()
}

fn overlap(rows: &[usize], used: &HashSet<usize>) -> usize {
    rows.iter().filter(|r| used.contains(r)).count()
}

fn side_groups(convention: SideConvention, lower: Vec<Vec<usize>>, upper: Vec<Vec<usize>>) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    match convention.lower() {
        CheckSide::X => (lower, upper),
        CheckSide::Z => (upper, lower),
    }
}

/// Crown splicing of a triple code. Each of `κ` iterations flips the biased
/// coin, draws an unused crown of that side and accepts it when it shares at
/// most `λ` rows with the rows already claimed on that side; after `c`
/// rejected draws the iteration is skipped. Accepted crowns are spliced
/// together at the end, then decoupled qubits are pruned.
///
/// Row indices of the records are layer indices of `l_{p−1}` (left crowns) and
/// `l_{p+1}` (right crowns), i.e. rows of the unpruned triple code.
pub fn crown_splice(code: &CssCode, crowns: &[SphereRecord], convention: SideConvention, config: &SpliceConfig, trial: u64) -> Result<CssCode> {
    config.validate()?;
    if config.kappa == 0 {
        return Ok(code.clone());
    }
    let lower_side = convention.lower();
    let mut pools: [Vec<(usize, Vec<usize>)>; 2] = [Vec::new(), Vec::new()];
    for (i, c) in crowns.iter().enumerate() {
        match c.kind {
            SphereKind::Crown { side: CrownSide::Left, .. } => pools[0].push((i, check_rows(c.splice_rows(), code, lower_side)?)),
            SphereKind::Crown { side: CrownSide::Right, .. } => {
                pools[1].push((i, check_rows(c.splice_rows(), code, lower_side.other())?))
            }
            _ => return Err(Error::InvalidArgument("crown_splice received a non-crown record".into())),
        }
    }
    let p = resolve_bias(config.bias, crowns, code, convention);
    let mut rng = stream_rng(config.seed, trial);
    let mut taken = vec![false; crowns.len()];
    let mut used: [HashSet<usize>; 2] = [HashSet::new(), HashSet::new()];
    let mut groups: [Vec<Vec<usize>>; 2] = [Vec::new(), Vec::new()];
    let mut accepted = Vec::new();
    let mut draws = Vec::new();
    let mut skipped = 0usize;
    for m in 0..config.kappa {
        let mut ok = false;
        for _ in 0..config.cutoff {
            let s = if rng.random_bool(p) { 0 } else { 1 };
            let unused: Vec<usize> = (0..pools[s].len()).filter(|&j| !taken[pools[s][j].0]).collect();
            if unused.is_empty() {
                draws.push(json!({"m": m, "side": side_name(s), "crown": null}));
                continue;
            }
            let (idx, rows) = &pools[s][unused[rng.random_range(0..unused.len())]];
            let ov = overlap(rows, &used[s]);
            let accept = ov <= config.lambda;
            draws.push(json!({"m": m, "side": side_name(s), "crown": idx, "overlap": ov, "accepted": accept}));
            if accept {
                taken[*idx] = true;
                used[s].extend(rows.iter().copied());
                groups[s].push(rows.clone());
                accepted.push(*idx);
                ok = true;
                break;
            }
        }
        if !ok {
            debug!("crown splice: iteration {m} skipped after {} rejected draws", config.cutoff);
            skipped += 1;
        }
    }
    let detail = json!({
        "config": config,
        "trial": trial,
        "bias": p,
        "draws": draws,
        "accepted": accepted,
        "skipped_iterations": skipped,
    });
    if accepted.is_empty() {
        warn!("crown splice: no crown accepted, code unchanged");
        return Ok(code.clone().with_log("crown-splice", detail));
    }
    let [lower, upper] = groups;
    let (xg, zg) = side_groups(convention, lower, upper);
    let spliced = splice_code(code, &xg, &zg)?.with_log("crown-splice", detail);
    Ok(prune_decoupled_qubits(&spliced))
}

fn side_name(s: usize) -> &'static str {
    if s == 0 {
        "left"
    } else {
        "right"
    }
}

/// S² splicing: each accepted record splices its 0-cells (rows of the lower
/// side) into one row and its 2-cells (rows of the upper side) into another.
/// A draw is accepted when both overlaps are at most `λ`.
pub fn s2_splice(code: &CssCode, records: &[SphereRecord], convention: SideConvention, config: &SpliceConfig, trial: u64) -> Result<CssCode> {
    config.validate()?;
    if config.kappa == 0 {
        return Ok(code.clone());
    }
    let lower_side = convention.lower();
    let mut pool = Vec::with_capacity(records.len());
    for r in records {
        if r.kind != SphereKind::S2 {
            return Err(Error::InvalidArgument("s2_splice received a non-S² record".into()));
        }
        let (v, f) = r.s2_rows();
        pool.push([check_rows(v, code, lower_side)?, check_rows(f, code, lower_side.other())?]);
    }
    let mut rng = stream_rng(config.seed, trial);
    let mut taken = vec![false; pool.len()];
    let mut used: [HashSet<usize>; 2] = [HashSet::new(), HashSet::new()];
    let mut groups: [Vec<Vec<usize>>; 2] = [Vec::new(), Vec::new()];
    let mut accepted = Vec::new();
    let mut draws = Vec::new();
    let mut skipped = 0usize;
    for m in 0..config.kappa {
        let mut ok = false;
        for _ in 0..config.cutoff {
            let unused: Vec<usize> = (0..pool.len()).filter(|&j| !taken[j]).collect();
            if unused.is_empty() {
                draws.push(json!({"m": m, "record": null}));
                continue;
            }
            let idx = unused[rng.random_range(0..unused.len())];
            let ov = [overlap(&pool[idx][0], &used[0]), overlap(&pool[idx][1], &used[1])];
            let accept = ov[0] <= config.lambda && ov[1] <= config.lambda;
            draws.push(json!({"m": m, "record": idx, "overlap": ov, "accepted": accept}));
            if accept {
                taken[idx] = true;
                for s in 0..2 {
                    used[s].extend(pool[idx][s].iter().copied());
                    groups[s].push(pool[idx][s].clone());
                }
                accepted.push(idx);
                ok = true;
                break;
            }
        }
        if !ok {
            debug!("S² splice: iteration {m} skipped after {} rejected draws", config.cutoff);
            skipped += 1;
        }
    }
    let detail = json!({
        "config": config,
        "trial": trial,
        "draws": draws,
        "accepted": accepted,
        "skipped_iterations": skipped,
    });
    if accepted.is_empty() {
        warn!("S² splice: no record accepted, code unchanged");
        return Ok(code.clone().with_log("s2-splice", detail));
    }
    let [lower, upper] = groups;
    let (xg, zg) = side_groups(convention, lower, upper);
    let spliced = splice_code(code, &xg, &zg)?.with_log("s2-splice", detail);
    Ok(prune_decoupled_qubits(&spliced))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpliceSides {
    X,
    Z,
    #[default]
    Both,
}

impl SpliceSides {
    fn includes(self, side: CheckSide) -> bool {
        matches!((self, side), (SpliceSides::Both, _) | (SpliceSides::X, CheckSide::X) | (SpliceSides::Z, CheckSide::Z))
    }
}

impl FromStr for SpliceSides {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(SpliceSides::X),
            "z" => Ok(SpliceSides::Z),
            "both" | "xz" => Ok(SpliceSides::Both),
            _ => Err(format!("sides must be x, z or both, got `{s}`")),
        }
    }
}

/// Uniformly random perfect matching of the rows of each chosen side; each
/// matched pair is spliced. With an odd row count one uniformly chosen row
/// stays single.
pub fn random_splice(code: &CssCode, sides: SpliceSides, seed: u64, trial: u64) -> Result<CssCode> {
    let mut rng = stream_rng(seed, trial);
    let mut all: [Vec<Vec<usize>>; 2] = [Vec::new(), Vec::new()];
    let mut single: [Option<usize>; 2] = [None, None];
    for (i, side) in [CheckSide::X, CheckSide::Z].into_iter().enumerate() {
        if !sides.includes(side) {
            continue;
        }
        let mut order: Vec<usize> = (0..code.checks(side).rows()).collect();
        order.shuffle(&mut rng);
        if order.len() % 2 == 1 {
            single[i] = order.pop();
        }
        all[i] = order.chunks_exact(2).map(|c| c.to_vec()).collect();
    }
    let detail = json!({"sides": sides, "seed": seed, "trial": trial, "x_pairs": all[0], "z_pairs": all[1], "unmatched": single});
    let spliced = splice_code(code, &all[0], &all[1])?.with_log("random-splice", detail);
    Ok(prune_decoupled_qubits(&spliced))
}

/// Removes `count` randomly chosen diamonds, no two sharing a check row: the
/// bottom (row of the lower side) and top (row of the upper side) of each are
/// deleted.
pub fn diamond_removal(
    code: &CssCode,
    diamonds: &[SphereRecord],
    convention: SideConvention,
    count: usize,
    seed: u64,
    trial: u64,
) -> Result<CssCode> {
    if count == 0 {
        return Ok(code.clone());
    }
    let lower_side = convention.lower();
    let mut pairs = Vec::with_capacity(diamonds.len());
    for d in diamonds {
        if d.kind != SphereKind::Diamond {
            return Err(Error::InvalidArgument("diamond_removal received a non-diamond record".into()));
        }
        let lo = check_rows(&[d.bottom], code, lower_side)?[0];
        let hi = check_rows(&[d.top], code, lower_side.other())?[0];
        pairs.push((lo, hi));
    }
    let mut rng = stream_rng(seed, trial);
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.shuffle(&mut rng);
    let mut used_lo = HashSet::new();
    let mut used_hi = HashSet::new();
    let mut chosen = Vec::new();
    for i in order {
        let (lo, hi) = pairs[i];
        if used_lo.contains(&lo) || used_hi.contains(&hi) {
            continue;
        }
        used_lo.insert(lo);
        used_hi.insert(hi);
        chosen.push(i);
        if chosen.len() == count {
            break;
        }
    }
    if chosen.len() < count {
        return Err(Error::InvalidArgument(format!(
            "only {} row-disjoint diamonds found, {count} requested",
            chosen.len()
        )));
    }
    let lo_rows: Vec<usize> = chosen.iter().map(|&i| pairs[i].0).collect();
    let hi_rows: Vec<usize> = chosen.iter().map(|&i| pairs[i].1).collect();
    let (xr, zr) = match lower_side {
        CheckSide::X => (lo_rows, hi_rows),
        CheckSide::Z => (hi_rows, lo_rows),
    };
    let detail = json!({"count": count, "seed": seed, "trial": trial, "diamonds": chosen});
    let out = code.replace(code.hx().remove_rows(&xr), code.hz().remove_rows(&zr))?.with_log("diamond-removal", detail);
    Ok(prune_decoupled_qubits(&out))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FoldVariant {
    /// The outermost map is the direct sum `K_{p−k+1} ⊕ K_{p+k}ᵀ`.
    #[default]
    Single,
    /// The outermost map fuses the two end modules row by row.
    Fused,
}

impl FromStr for FoldVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "single" => Ok(FoldVariant::Single),
            "fused" => Ok(FoldVariant::Fused),
            _ => Err(format!("fold variant must be single or fused, got `{s}`")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FoldResult {
    /// Folded complex, lowest module first: `[H_X, H_Zᵀ]` or `[M, H_X, H_Zᵀ]`.
    pub complex: ChainComplex,
    pub code: CssCode,
    pub metacheck: Option<BitMatrix>,
    pub variant: FoldVariant,
    /// Center rank of the original complex.
    pub p: usize,
}

fn outer_map(a: &BitMatrix, b_t: &BitMatrix, variant: FoldVariant) -> Result<BitMatrix> {
    match variant {
        FoldVariant::Single => Ok(a.block_diag(b_t)),
        FoldVariant::Fused => {
            if a.rows() != b_t.rows() {
                return Err(Error::InvalidArgument(format!(
                    "fused folding needs equal end modules, got {} and {}",
                    a.rows(),
                    b_t.rows()
                )));
            }
            let labels = match (a.row_labels(), b_t.row_labels()) {
                (Some(x), Some(y)) => Some(x.iter().zip(y).map(|(u, v)| format!("{u}|{v}")).collect()),
                _ => None,
            };
            let mut m = a.hstack(b_t);
            m.set_row_labels(labels);
            Ok(m)
        }
    }
}

/// Folds a length-4 complex into a CSS code, or a length-6 complex into a
/// CSS code with a metacheck. The variant applies to the outermost map.
pub fn fold(c: &ChainComplex, variant: FoldVariant) -> Result<FoldResult> {
    let maps = c.maps();
    let half = match maps.len() {
        4 => 2,
        6 => 3,
        l => return Err(Error::InvalidArgument(format!("folding needs a complex of length 4 or 6, got {l}"))),
    };
    let p = c.offset() + half;
    // maps[i] is K_{p−half+1+i}.
    let k = |q: usize| &maps[q + half - 1 - p];
    let hz_t = k(p).vstack(&k(p + 1).transpose());
    let inner_l = k(p - 1);
    let inner_r = k(p + 2).transpose();
    if !inner_l.mul(k(p)).is_zero() || !inner_r.mul(&k(p + 1).transpose()).is_zero() {
        return Err(Error::ChainComplex("folded blocks do not vanish separately".into()));
    }
    let (hx, metacheck) = if half == 2 {
        (outer_map(inner_l, &inner_r, variant)?, None)
    } else {
        let hx = inner_l.block_diag(&inner_r);
        (hx, Some(outer_map(k(p - 2), &k(p + 3).transpose(), variant)?))
    };
    let mut folded = vec![hx.clone(), hz_t.clone()];
    if let Some(m) = &metacheck {
        folded.insert(0, m.clone());
    }
    let complex = ChainComplex::new(folded, 0)?;
    let code = CssCode::new(hx, hz_t.transpose())?.with_log(
        "fold",
        json!({"length": maps.len(), "p": p, "variant": variant, "pairing": "frozen layer order"}),
    );
    Ok(FoldResult { complex, code, metacheck, variant, p })
}

/// Folds the full chain complex of a 5- or 7-layer subposet.
pub fn fold_subposet(sub: &LayeredSubposet<'_>, variant: FoldVariant) -> Result<FoldResult> {
    let mut r = fold(&to_chain_complex(sub)?, variant)?;
    let iv = sub.interval();
    r.code.log(
        "source",
        json!({"group": iv.system().spec(), "bottom": iv.bottom().to_string(), "top": iv.top().to_string(), "p": sub.center(), "layers": sub.layer_sizes()}),
    );
    Ok(r)
}

/// The code carried by the upper part of a folded length-6 complex: qubits
/// are the X-syndrome bits of the main code, X checks are the metacheck rows
/// and Z checks are the columns of the main `H_X`.
pub fn extract_metacheck_code(fr: &FoldResult) -> Result<CssCode> {
    let m = fr.metacheck.as_ref().ok_or_else(|| Error::InvalidArgument("fold result has no metacheck".into()))?;
    let hz = fr.code.hx().transpose();
    let hx = m.clone();
    Ok(CssCode::new(hx, hz)?.with_log("metacheck-code", json!({"p": fr.p, "variant": fr.variant})))
}

/// Provenance detail of the last entry with the given op, if any.
pub fn last_log<'a>(code: &'a CssCode, op: &str) -> Option<&'a Value> {
    code.provenance().iter().rev().find(|e| e.op == op).map(|e| &e.detail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bruhat::BruhatInterval;
    use crate::codes::{css_from_triple, logical_count};
    use crate::coxeter::parse_group_spec;
    use crate::spheres::{enumerate_crowns, enumerate_diamonds, enumerate_s2};

    fn full(spec: &str, wt: &str) -> BruhatInterval {
        BruhatInterval::from_word_text(&parse_group_spec(spec).unwrap(), "id", wt).unwrap()
    }

    #[test]
    fn splice_basics() {
        let h = BitMatrix::from_supports(4, &[vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 1]]);
        let s = splice_rows(&h, &[1]).unwrap();
        assert_eq!(s.supports(), vec![vec![0, 1], vec![2, 3], vec![0, 1], vec![1, 2]]);
        let s = splice_rows(&h, &[0, 3]).unwrap();
        assert_eq!(s.row_weight(2), 0);
        let s = splice_groups(&h, &[vec![0, 1], vec![1, 2]]).unwrap();
        assert_eq!(s.supports(), vec![vec![0, 1], vec![0, 2], vec![1, 3]]);
        assert!(splice_rows(&h, &[4]).is_err());
        assert!(splice_rows(&h, &[]).is_err());
    }

    #[test]
    fn splicing_the_two_z_checks_of_422() {
        // X: 1111; Z: 1100, 0011 (the [4,2,2] code with split Z checks).
        let c = CssCode::from_supports(4, &[vec![0, 1, 2, 3]], &[vec![0, 1], vec![2, 3]]).unwrap();
        let s = splice_code(&c, &[], &[vec![0, 1]]).unwrap();
        assert_eq!(s.hz().supports(), vec![vec![0, 1, 2, 3]]);
        assert_eq!(logical_count(&s), logical_count(&c) + 1);
    }

    #[test]
    fn bias() {
        let iv = full("A4", "w0");
        let sub = iv.layered_subposet(5, 2).unwrap();
        let mut crowns = enumerate_crowns(&sub, CrownSide::Left).unwrap();
        let l = crowns.len();
        crowns.extend(enumerate_crowns(&sub, CrownSide::Right).unwrap());
        let b = bias_probability(&crowns);
        assert!(b > 0.0 && b < 1.0);
        assert_eq!(bias_probability(&crowns[..l]), 1.0);
        assert_eq!(bias_probability(&[]), 0.5);
        assert_eq!("auto".parse::<Bias>().unwrap(), Bias::Auto);
        assert_eq!(serde_json::to_string(&Bias::Fixed(0.25)).unwrap(), "0.25");
        assert_eq!(serde_json::from_str::<Bias>("\"layers\"").unwrap(), Bias::Layers);
    }

    #[test]
    fn crown_splicing_is_deterministic_and_valid() {
        let iv = full("A4", "w0");
        let code = css_from_triple(&iv.layered_subposet(5, 1).unwrap(), SideConvention::LowerX).unwrap();
        let sub = iv.layered_subposet(5, 2).unwrap();
        let mut crowns = enumerate_crowns(&sub, CrownSide::Left).unwrap();
        crowns.extend(enumerate_crowns(&sub, CrownSide::Right).unwrap());
        let cfg = SpliceConfig { kappa: 6, lambda: 1, cutoff: 20, bias: Bias::Auto, seed: 11 };
        let a = crown_splice(&code, &crowns, SideConvention::LowerX, &cfg, 3).unwrap();
        let b = crown_splice(&code, &crowns, SideConvention::LowerX, &cfg, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.is_valid());
        let zero = SpliceConfig { kappa: 0, ..cfg.clone() };
        assert_eq!(crown_splice(&code, &crowns, SideConvention::LowerX, &zero, 0).unwrap(), code);
    }

    #[test]
    fn lambda_zero_rejects_overlapping_crowns() {
        let iv = full("A3", "w0");
        let code = css_from_triple(&iv.layered_subposet(3, 1).unwrap(), SideConvention::LowerX).unwrap();
        let sub = iv.layered_subposet(3, 2).unwrap();
        let crowns = enumerate_crowns(&sub, CrownSide::Left).unwrap();
        let cfg = SpliceConfig { kappa: crowns.len(), lambda: 0, cutoff: 50, bias: Bias::Fixed(1.0), seed: 5 };
        let out = crown_splice(&code, &crowns, SideConvention::LowerX, &cfg, 0).unwrap();
        let log = last_log(&out, "crown-splice").unwrap();
        let accepted: Vec<usize> = serde_json::from_value(log["accepted"].clone()).unwrap();
        let mut seen = HashSet::new();
        for i in accepted {
            for &r in crowns[i].splice_rows() {
                assert!(seen.insert(r), "row {r} used twice with λ = 0");
            }
        }
    }

    #[test]
    fn s2_and_random_and_diamonds() {
        let iv = full("C2^8", "s1s2s3s4s5s6s7s8");
        let code = css_from_triple(&iv.layered_subposet(4, 1).unwrap(), SideConvention::LowerX).unwrap();
        let sub = iv.layered_subposet(4, 2).unwrap();
        let s2 = enumerate_s2(&sub).unwrap();
        let cfg = SpliceConfig { kappa: 5, lambda: 0, cutoff: 20, bias: Bias::Auto, seed: 1 };
        let out = s2_splice(&code, &s2, SideConvention::LowerX, &cfg, 0).unwrap();
        assert!(out.is_valid());
        assert_eq!(out.hx().rows(), code.hx().rows() - 5 * 3);

        let r = random_splice(&code, SpliceSides::Z, 9, 0).unwrap();
        assert_eq!(r.hz().rows() + 28, code.hz().rows());
        assert!(r.hx().same_bits(code.hx()));
        assert!(r.is_valid());

        let d = enumerate_diamonds(&iv.layered_subposet(4, 1).unwrap(), 4).unwrap();
        let out = diamond_removal(&code, &d, SideConvention::LowerX, 4, 2, 0).unwrap();
        assert_eq!(out.hx().rows(), code.hx().rows() - 4);
        assert!(diamond_removal(&code, &d, SideConvention::LowerX, 1000, 2, 0).is_err());
        assert_eq!(diamond_removal(&code, &d, SideConvention::LowerX, 0, 2, 0).unwrap(), code);
    }

    #[test]
    fn random_splice_odd_rows() {
        let c = CssCode::from_supports(4, &[vec![0, 1], vec![2, 3], vec![0, 1, 2, 3]], &[vec![0, 1, 2, 3]]).unwrap();
        let r = random_splice(&c, SpliceSides::X, 0, 0).unwrap();
        assert!(r.is_valid());
        assert!(r.hx().rows() <= 2);
    }

    #[test]
    fn folding_small() {
        let iv = full("C2^8", "s1s2s3s4s5s6s7s8");
        let sub = iv.layered_subposet(4, 2).unwrap();
        for v in [FoldVariant::Single, FoldVariant::Fused] {
            let f = fold_subposet(&sub, v).unwrap();
            assert_eq!(f.code.n(), 112);
            assert!(f.code.is_valid());
            assert_eq!(f.complex.length(), 2);
        }
        let a3 = full("A3", "w0");
        assert!(fold_subposet(&a3.layered_subposet(3, 1).unwrap(), FoldVariant::Single).is_err());
        // l_1 and l_5 of A3 both have three elements.
        let f = fold_subposet(&a3.layered_subposet(3, 2).unwrap(), FoldVariant::Fused).unwrap();
        assert_eq!(f.code.hx().rows(), 3);
        let f7 = fold_subposet(&iv.layered_subposet(4, 3).unwrap(), FoldVariant::Fused).unwrap();
        assert_eq!(f7.complex.length(), 3);
        let mc = extract_metacheck_code(&f7).unwrap();
        assert_eq!(mc.n(), 28 + 28);
        assert!(mc.is_valid());
        assert!(extract_metacheck_code(&fold_subposet(&sub, FoldVariant::Single).unwrap()).is_err());
    }
}
