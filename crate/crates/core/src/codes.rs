//! CSS codes: construction from 3-layer subposets, analysis, pruning and
//! bundle serialization.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bruhat::LayeredSubposet;
use crate::chain::{boundary_matrix, io, BitMatrix, RowSpace};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CheckSide {
    X,
    Z,
}

impl CheckSide {
    pub fn other(self) -> Self {
        match self {
            CheckSide::X => CheckSide::Z,
            CheckSide::Z => CheckSide::X,
        }
    }
}

/// Which of the two outer layers of a triple becomes the X checks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SideConvention {
    /// `l_{p−1}` → X checks, `l_{p+1}` → Z checks.
    #[default]
    LowerX,
    /// `l_{p−1}` → Z checks, `l_{p+1}` → X checks.
    LowerZ,
}

impl SideConvention {
    /// Side of the checks coming from the lower layer.
    pub fn lower(self) -> CheckSide {
        match self {
            SideConvention::LowerX => CheckSide::X,
            SideConvention::LowerZ => CheckSide::Z,
        }
    }
}

impl std::str::FromStr for SideConvention {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "lower-x" | "x" => Ok(SideConvention::LowerX),
            "lower-z" | "z" => Ok(SideConvention::LowerZ),
            _ => Err(format!("side convention must be lower-x or lower-z, got `{s}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceEntry {
    pub op: String,
    pub detail: Value,
}

/// A pair of check matrices with `H_X H_Zᵀ = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct CssCode {
    hx: BitMatrix,
    hz: BitMatrix,
    provenance: Vec<ProvenanceEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideStats {
    pub rows: usize,
    pub max: usize,
    pub mean: f64,
    /// Row weight → number of rows.
    pub histogram: BTreeMap<usize, usize>,
    /// First row attaining the maximum.
    pub argmax: Option<usize>,
}

impl SideStats {
    pub fn of(m: &BitMatrix) -> Self {
        let w = m.row_weights();
        let mut histogram = BTreeMap::new();
        for &x in &w {
            *histogram.entry(x).or_insert(0) += 1;
        }
        let max = w.iter().copied().max().unwrap_or(0);
        let mean = if w.is_empty() { 0.0 } else { w.iter().sum::<usize>() as f64 / w.len() as f64 };
        SideStats { rows: w.len(), max, mean, histogram, argmax: w.iter().position(|&x| x == max && !w.is_empty()) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightStats {
    pub x: SideStats,
    pub z: SideStats,
}

impl WeightStats {
    pub fn max(&self) -> usize {
        self.x.max.max(self.z.max)
    }
}

fn default_col_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("q{i}")).collect()
}

impl CssCode {
    /// Validates shapes and orthogonality. Column labels of `hx` win when both
    /// are present; missing labels are filled with defaults.
    pub fn new(hx: BitMatrix, hz: BitMatrix) -> Result<Self> {
        if hx.cols() != hz.cols() {
            return Err(Error::InvalidArgument(format!("H_X has {} columns, H_Z has {}", hx.cols(), hz.cols())));
        }
        if !hx.orthogonal_to(&hz) {
            return Err(Error::Orthogonality("H_X H_Z^T != 0".into()));
        }
        let n = hx.cols();
        let cols = hx.col_labels().or(hz.col_labels()).map(<[String]>::to_vec).unwrap_or_else(|| default_col_labels(n));
        let xr = hx.row_labels().map(<[String]>::to_vec).unwrap_or_else(|| (0..hx.rows()).map(|i| format!("x{i}")).collect());
        let zr = hz.row_labels().map(<[String]>::to_vec).unwrap_or_else(|| (0..hz.rows()).map(|i| format!("z{i}")).collect());
        let hx = hx.with_labels(Some(xr), Some(cols.clone()));
        let hz = hz.with_labels(Some(zr), Some(cols));
        Ok(CssCode { hx, hz, provenance: Vec::new() })
    }

    pub fn from_supports(n: usize, x: &[Vec<usize>], z: &[Vec<usize>]) -> Result<Self> {
        Self::new(BitMatrix::from_supports(n, x), BitMatrix::from_supports(n, z))
    }

    pub fn hx(&self) -> &BitMatrix {
        &self.hx
    }

    pub fn hz(&self) -> &BitMatrix {
        &self.hz
    }

    pub fn checks(&self, side: CheckSide) -> &BitMatrix {
        match side {
            CheckSide::X => &self.hx,
            CheckSide::Z => &self.hz,
        }
    }

    pub fn qubit_labels(&self) -> &[String] {
        self.hx.col_labels().expect("codes always carry column labels")
    }

    pub fn provenance(&self) -> &[ProvenanceEntry] {
        &self.provenance
    }

    pub fn log(&mut self, op: &str, detail: Value) {
        self.provenance.push(ProvenanceEntry { op: op.into(), detail });
    }

    pub fn with_log(mut self, op: &str, detail: Value) -> Self {
        self.log(op, detail);
        self
    }

    /// Replaces the matrices, re-validating orthogonality and keeping the log.
    pub fn replace(&self, hx: BitMatrix, hz: BitMatrix) -> Result<Self> {
        let mut c = Self::new(hx, hz)?;
        c.provenance = self.provenance.clone();
        Ok(c)
    }

    pub fn n(&self) -> usize {
        self.hx.cols()
    }

    pub fn rank_x(&self) -> usize {
        self.hx.rank()
    }

    pub fn rank_z(&self) -> usize {
        self.hz.rank()
    }

    pub fn is_valid(&self) -> bool {
        self.hx.cols() == self.hz.cols() && self.hx.orthogonal_to(&self.hz)
    }

    pub fn weight_stats(&self) -> WeightStats {
        WeightStats { x: SideStats::of(&self.hx), z: SideStats::of(&self.hz) }
    }

    /// Logical representatives of type `side`: vectors in the kernel of the
    /// opposite check matrix, independent modulo the row space of the same
    /// side. `Z` logicals lie in `ker H_X` modulo `rowspace H_Z`.
    pub fn logical_basis(&self, side: CheckSide) -> BitMatrix {
        let (kernel_of, modulo) = match side {
            CheckSide::Z => (&self.hx, &self.hz),
            CheckSide::X => (&self.hz, &self.hx),
        };
        let ker = kernel_of.kernel_basis();
        let mut rs = RowSpace::new(modulo);
        let mut out = BitMatrix::zeros(0, self.n());
        for r in 0..ker.rows() {
            if rs.insert(ker.row(r)) {
                out.push_row(ker.row(r), None);
            }
        }
        out
    }

    /// `(X̄, Z̄)` bases with `k` rows each.
    pub fn logical_operators(&self) -> Result<(BitMatrix, BitMatrix)> {
        if logical_count(self) == 0 {
            return Err(Error::NoLogicals);
        }
        Ok((self.logical_basis(CheckSide::X), self.logical_basis(CheckSide::Z)))
    }

    fn header(&self) -> Value {
        json!({
            "format": BUNDLE_FORMAT,
            "n": self.n(),
            "k": logical_count(self),
            "provenance": self.provenance,
            "seeds": self.seeds(),
            "qubit_labels": self.qubit_labels(),
            "x_labels": self.hx.row_labels(),
            "z_labels": self.hz.row_labels(),
        })
    }

    /// Header + two alist blocks; labels and provenance travel in the header.
    pub fn to_bundle(&self) -> String {
        format!("{}\n# H_X\n{}# H_Z\n{}", self.header(), io::write_alist(&self.hx), io::write_alist(&self.hz))
    }

    /// Seeds recorded anywhere in the provenance log.
    pub fn seeds(&self) -> Vec<u64> {
        self.provenance.iter().filter_map(|p| p.detail.get("seed").and_then(Value::as_u64)).collect()
    }

    pub fn from_bundle(text: &str) -> Result<Self> {
        let (header, rest) = text.split_once('\n').ok_or_else(|| bundle_err("missing header"))?;
        let (xa, za) = split_blocks(rest, "# H_X\n", "# H_Z\n")?;
        Self::from_parts(Some(serde_json::from_str(header)?), io::read_alist(xa)?, io::read_alist(za)?)
    }

    pub fn export(&self, format: CodeFormat) -> String {
        match format {
            CodeFormat::Bundle => self.to_bundle(),
            CodeFormat::Alist => format!("# {}\n{}", self.header(), self.to_bundle().split_once('\n').unwrap().1),
            CodeFormat::Mtx => {
                format!("% {}\n% H_X\n{}% H_Z\n{}", self.header(), io::write_mtx(&self.hx), io::write_mtx(&self.hz))
            }
        }
    }

    /// Reads any of the three formats. Alist and mtx files without a header
    /// line get default labels and an empty log.
    pub fn import(text: &str) -> Result<Self> {
        match CodeFormat::detect(text)? {
            CodeFormat::Bundle => Self::from_bundle(text),
            CodeFormat::Alist => {
                let (header, rest) = match text.strip_prefix("# {") {
                    Some(_) => {
                        let (h, r) = text.split_once('\n').ok_or_else(|| bundle_err("missing H_X block"))?;
                        (Some(serde_json::from_str(&h[2..])?), r)
                    }
                    None => (None, text),
                };
                let (xa, za) = split_blocks(rest, "# H_X\n", "# H_Z\n")?;
                Self::from_parts(header, io::read_alist(xa)?, io::read_alist(za)?)
            }
            CodeFormat::Mtx => {
                let (header, rest) = match text.strip_prefix("% {") {
                    Some(_) => {
                        let (h, r) = text.split_once('\n').ok_or_else(|| bundle_err("missing H_X block"))?;
                        (Some(serde_json::from_str(&h[2..])?), r)
                    }
                    None => (None, text),
                };
                let (xa, za) = split_blocks(rest, "% H_X\n", "% H_Z\n")?;
                Self::from_parts(header, io::read_mtx(xa)?, io::read_mtx(za)?)
            }
        }
    }

    fn from_parts(header: Option<Value>, hx: BitMatrix, hz: BitMatrix) -> Result<Self> {
        let Some(h) = header else { return CssCode::new(hx, hz) };
        if h.get("format").and_then(Value::as_str) != Some(BUNDLE_FORMAT) {
            return Err(bundle_err("unknown format tag"));
        }
        let labels = |key: &str| -> Result<Vec<String>> {
            Ok(serde_json::from_value(h.get(key).cloned().ok_or_else(|| bundle_err(&format!("missing {key}")))?)?)
        };
        let cols = labels("qubit_labels")?;
        let xl = labels("x_labels")?;
        let zl = labels("z_labels")?;
        if cols.len() != hx.cols() || xl.len() != hx.rows() || zl.len() != hz.rows() {
            return Err(bundle_err("label counts do not match the matrices"));
        }
        let hx = hx.with_labels(Some(xl), Some(cols.clone()));
        let hz = hz.with_labels(Some(zl), Some(cols));
        let mut code = CssCode::new(hx, hz)?;
        code.provenance = serde_json::from_value(h["provenance"].clone())?;
        if h.get("n").and_then(Value::as_u64) != Some(code.n() as u64) {
            return Err(bundle_err("n does not match"));
        }
        Ok(code)
    }
}

fn bundle_err(m: &str) -> Error {
    Error::Format(format!("code file: {m}"))
}

fn split_blocks<'a>(text: &'a str, x: &str, z: &str) -> Result<(&'a str, &'a str)> {
    let rest = text.strip_prefix(x).ok_or_else(|| bundle_err("missing H_X block"))?;
    rest.split_once(z).ok_or_else(|| bundle_err("missing H_Z block"))
}

/// On-disk code formats.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodeFormat {
    Alist,
    Mtx,
    #[default]
    Bundle,
}

impl CodeFormat {
    pub fn detect(text: &str) -> Result<Self> {
        let first = text.lines().next().unwrap_or("");
        if first.starts_with('{') {
            Ok(CodeFormat::Bundle)
        } else if first.starts_with("# ") {
            Ok(CodeFormat::Alist)
        } else if first.starts_with("% ") {
            Ok(CodeFormat::Mtx)
        } else {
            Err(bundle_err("unrecognized format"))
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            CodeFormat::Alist => "alist",
            CodeFormat::Mtx => "mtx",
            CodeFormat::Bundle => "bundle",
        }
    }
}

impl std::str::FromStr for CodeFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "alist" => Ok(CodeFormat::Alist),
            "mtx" => Ok(CodeFormat::Mtx),
            "bundle" | "json" => Ok(CodeFormat::Bundle),
            _ => Err(format!("format must be alist, mtx or bundle, got `{s}`")),
        }
    }
}

const BUNDLE_FORMAT: &str = "bruhat-css-bundle/1";

/// `k = n − rank H_X − rank H_Z`.
pub fn logical_count(code: &CssCode) -> usize {
    code.n() - code.rank_x() - code.rank_z()
}

pub fn weight_stats(code: &CssCode) -> WeightStats {
    code.weight_stats()
}

/// CSS code of the layers `l_{p−1}, l_p, l_{p+1}`: the lower layer checks are
/// `B_p`, the upper layer checks are `B_{p+1}ᵀ`.
pub fn css_from_triple(sub: &LayeredSubposet<'_>, convention: SideConvention) -> Result<CssCode> {
    let p = sub.center();
    if p == 0 {
        return Err(Error::RankBounds("p must be at least 1".into()));
    }
    let lower = boundary_matrix(sub, p)?;
    let upper = boundary_matrix(sub, p + 1)?.transpose();
    let (hx, hz) = match convention {
        SideConvention::LowerX => (lower, upper),
        SideConvention::LowerZ => (upper, lower),
    };
    let iv = sub.interval();
    let code = CssCode::new(hx, hz)?;
    Ok(code.with_log(
        "triple",
        json!({
            "group": iv.system().spec(),
            "bottom": iv.bottom().to_string(),
            "top": iv.top().to_string(),
            "p": p,
            "convention": convention,
        }),
    ))
}

/// Removes qubits with no X check or no Z check, then all-zero rows.
pub fn prune_decoupled_qubits(code: &CssCode) -> CssCode {
    let xw = code.hx.col_weights();
    let zw = code.hz.col_weights();
    let drop: Vec<usize> = (0..code.n()).filter(|&c| xw[c] == 0 || zw[c] == 0).collect();
    let both = drop.iter().filter(|&&c| xw[c] == 0 && zw[c] == 0).count();
    let hx = code.hx.remove_cols(&drop);
    let hz = code.hz.remove_cols(&drop);
    let zx: Vec<usize> = (0..hx.rows()).filter(|&r| hx.row_weight(r) == 0).collect();
    let zz: Vec<usize> = (0..hz.rows()).filter(|&r| hz.row_weight(r) == 0).collect();
    if drop.is_empty() && zx.is_empty() && zz.is_empty() {
        return code.clone();
    }
    let labels = code.qubit_labels();
    let detail = json!({
        "removed_qubits": drop.iter().map(|&c| labels[c].clone()).collect::<Vec<_>>(),
        "removed_in_both": both,
        "removed_x_rows": zx.iter().map(|&r| hx.row_labels().unwrap()[r].clone()).collect::<Vec<_>>(),
        "removed_z_rows": zz.iter().map(|&r| hz.row_labels().unwrap()[r].clone()).collect::<Vec<_>>(),
    });
    let hx = hx.remove_rows(&zx);
    let hz = hz.remove_rows(&zz);
    let mut out = code.replace(hx, hz).expect("pruning preserves orthogonality");
    out.log("prune", detail);
    out
}

/// Checks the subcode hypothesis: every chosen pair `x ∈ l_{p−1}`,
/// `z ∈ l_{p+1}` has its open interval either inside the qubit set or
/// disjoint from it. `qubits = None` means the whole middle layer.
pub fn validate_subcode_selection(sub: &LayeredSubposet<'_>, x_subset: &[u32], z_subset: &[u32], qubits: Option<&[u32]>) -> Result<bool> {
    let p = sub.center();
    if p == 0 || !sub.contains_rank(p - 1) || !sub.contains_rank(p + 1) {
        return Err(Error::RankBounds("need layers p − 1 and p + 1".into()));
    }
    let iv = sub.interval();
    let mut q: Option<Vec<u32>> = qubits.map(<[u32]>::to_vec);
    if let Some(q) = &mut q {
        q.sort_unstable();
    }
    for &x in x_subset {
        for &z in z_subset {
            let si = iv.subinterval(p - 1, x as usize, p + 1, z as usize);
            let middle = &si[1];
            if let Some(q) = &q {
                let inside = middle.iter().filter(|m| q.binary_search(m).is_ok()).count();
                if inside != 0 && inside != middle.len() {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}
