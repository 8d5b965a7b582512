//! Coxeter systems and exact group-element arithmetic.
//!
//! Three backends share one interface: one-line permutations for type `A_n`,
//! bit masks for direct products of `C_2`, and the geometric (Tits)
//! representation over `Z[2cos(π/N)]` for everything else.

mod field;
mod parse;

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

pub use field::{minimal_polynomial_2cos, FieldElem, NumberField};
pub use parse::{format_word, parse_group_spec, parse_word};

use crate::error::{Error, Result};

/// Symmetric Coxeter matrix; `0` encodes `∞`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoxeterMatrix {
    size: usize,
    entries: Vec<u32>,
}

impl CoxeterMatrix {
    pub fn new(rows: Vec<Vec<u32>>) -> Result<Self> {
        let size = rows.len();
        if size == 0 {
            return Err(Error::InvalidMatrix("empty matrix".into()));
        }
        let mut entries = Vec::with_capacity(size * size);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != size {
                return Err(Error::InvalidMatrix(format!("row {i} has {} entries, expected {size}", row.len())));
            }
            entries.extend_from_slice(row);
        }
        let m = CoxeterMatrix { size, entries };
        for i in 0..size {
            if m.get(i, i) != 1 {
                return Err(Error::InvalidMatrix(format!("m[{i}][{i}] = {} (must be 1)", m.get(i, i))));
            }
            for j in 0..size {
                if m.get(i, j) != m.get(j, i) {
                    return Err(Error::InvalidMatrix(format!("not symmetric at ({i},{j})")));
                }
                if i != j && m.get(i, j) == 1 {
                    return Err(Error::InvalidMatrix(format!("m[{i}][{j}] = 1 off the diagonal")));
                }
            }
        }
        Ok(m)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Entry `m_ij`, with `0` meaning `∞`.
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.entries[i * self.size + j]
    }

    pub fn rows(&self) -> Vec<Vec<u32>> {
        self.entries.chunks(self.size).map(|r| r.to_vec()).collect()
    }

    fn is_type_a(&self) -> bool {
        (0..self.size).all(|i| {
            (0..self.size).all(|j| {
                let want = if i == j {
                    1
                } else if i.abs_diff(j) == 1 {
                    3
                } else {
                    2
                };
                self.get(i, j) == want
            })
        })
    }

    fn is_c2_power(&self) -> bool {
        (0..self.size).all(|i| (0..self.size).all(|j| i == j || self.get(i, j) == 2))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Permutation,
    Bitvector,
    Geometric,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// Backend-specific exact encoding of a group element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElemKey {
    Perm(Vec<u8>),
    Bits(u64),
    /// Row-major `n × n` matrix of field elements, each `degree` coefficients.
    Geo(Vec<i64>),
}

/// A group element with its length and canonical reduced word.
#[derive(Clone, Debug)]
pub struct GroupElement {
    key: ElemKey,
    length: usize,
    word: Vec<u8>,
}

impl GroupElement {
    pub fn key(&self) -> &ElemKey {
        &self.key
    }

    pub fn length(&self) -> usize {
        self.length
    }

    /// Canonical reduced word (0-based generator indices).
    pub fn word(&self) -> &[u8] {
        &self.word
    }

    pub fn is_identity(&self) -> bool {
        self.length == 0
    }
}

impl PartialEq for GroupElement {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}

impl Eq for GroupElement {}

impl Hash for GroupElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key.hash(state)
    }
}

impl PartialOrd for GroupElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GroupElement {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.cmp(&other.key)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_word(&self.word))
    }
}

#[derive(Clone, Debug)]
enum Coef {
    Zero,
    Int(i64),
    Field(FieldElem),
}

#[derive(Clone, Debug)]
struct Geometry {
    field: NumberField,
    /// `c[i][j] = 2cos(π/m_ij)` for `i ≠ j`.
    coef: Vec<Vec<Coef>>,
}

/// A Coxeter system together with its arithmetic backend.
#[derive(Clone, Debug)]
pub struct CoxeterSystem {
    spec: String,
    matrix: CoxeterMatrix,
    names: Vec<String>,
    backend: Backend,
    geometry: Option<Geometry>,
}

#[derive(Serialize, Deserialize)]
struct SystemJson {
    spec: String,
    generators: Vec<String>,
    matrix: Vec<Vec<u32>>,
    backend: Backend,
}

impl CoxeterSystem {
    /// Builds a system with the best backend for the matrix.
    pub fn new(spec: impl Into<String>, matrix: CoxeterMatrix) -> Result<Self> {
        let backend = if matrix.is_type_a() && matrix.size() < 255 {
            Backend::Permutation
        } else if matrix.is_c2_power() && matrix.size() <= 64 {
            Backend::Bitvector
        } else {
            Backend::Geometric
        };
        Self::with_backend(spec, matrix, backend)
    }

    pub fn with_backend(spec: impl Into<String>, matrix: CoxeterMatrix, backend: Backend) -> Result<Self> {
        match backend {
            Backend::Permutation if !matrix.is_type_a() || matrix.size() >= 255 => {
                return Err(Error::InvalidArgument("permutation backend requires an A_n matrix".into()))
            }
            Backend::Bitvector if !matrix.is_c2_power() || matrix.size() > 64 => {
                return Err(Error::InvalidArgument("bitvector backend requires C2^n with n <= 64".into()))
            }
            _ => {}
        }
        let n = matrix.size();
        let names = (1..=n).map(|i| format!("s{i}")).collect();
        let geometry = (backend == Backend::Geometric).then(|| Self::geometry(&matrix));
        Ok(CoxeterSystem { spec: spec.into(), matrix, names, backend, geometry })
    }

    fn geometry(matrix: &CoxeterMatrix) -> Geometry {
        let n = matrix.size();
        // cos(π/2) = 0, so m = 2 does not enlarge the field.
        let mut big_n = 1u64;
        for i in 0..n {
            for j in 0..n {
                let m = matrix.get(i, j) as u64;
                if i != j && m >= 3 {
                    big_n = field::lcm(big_n, m);
                }
            }
        }
        let field = NumberField::new(big_n.max(1));
        let coef = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            return Coef::Zero;
                        }
                        let e = field.two_cos_pi_over(matrix.get(i, j) as u64);
                        if NumberField::is_zero(&e) {
                            Coef::Zero
                        } else if e[1..].iter().all(|&c| c == 0) {
                            Coef::Int(e[0])
                        } else {
                            Coef::Field(e)
                        }
                    })
                    .collect()
            })
            .collect();
        Geometry { field, coef }
    }

    pub fn spec(&self) -> &str {
        &self.spec
    }

    pub fn matrix(&self) -> &CoxeterMatrix {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.matrix.size()
    }

    pub fn generator_names(&self) -> &[String] {
        &self.names
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn number_field(&self) -> Option<&NumberField> {
        self.geometry.as_ref().map(|g| &g.field)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(SystemJson {
            spec: self.spec.clone(),
            generators: self.names.clone(),
            matrix: self.matrix.rows(),
            backend: self.backend,
        })
        .expect("system serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let s: SystemJson = serde_json::from_value(v.clone())?;
        let matrix = CoxeterMatrix::new(s.matrix)?;
        let mut sys = Self::with_backend(s.spec, matrix, s.backend)?;
        if s.generators.len() != sys.rank() {
            return Err(Error::Format("generator count does not match matrix".into()));
        }
        sys.names = s.generators;
        Ok(sys)
    }

    fn degree(&self) -> usize {
        self.geometry.as_ref().map_or(1, |g| g.field.degree())
    }

    pub fn identity_key(&self) -> ElemKey {
        let n = self.rank();
        match self.backend {
            Backend::Permutation => ElemKey::Perm((0..=n as u8).collect()),
            Backend::Bitvector => ElemKey::Bits(0),
            Backend::Geometric => {
                let d = self.degree();
                let mut m = vec![0i64; n * n * d];
                for i in 0..n {
                    m[(i * n + i) * d] = 1;
                }
                ElemKey::Geo(m)
            }
        }
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement { key: self.identity_key(), length: 0, word: Vec::new() }
    }

    /// True iff `ℓ(w s_i) < ℓ(w)`.
    pub fn key_right_descent(&self, key: &ElemKey, i: usize) -> bool {
        match key {
            ElemKey::Perm(p) => p[i] > p[i + 1],
            ElemKey::Bits(b) => b >> i & 1 == 1,
            ElemKey::Geo(m) => self.column_negative(m, i),
        }
    }

    /// Column `i` of `M_w` is `w(α_i)`; a root is negative iff any coefficient is.
    fn column_negative(&self, m: &[i64], i: usize) -> bool {
        let g = self.geometry.as_ref().expect("geometric backend");
        let n = self.rank();
        let d = g.field.degree();
        for r in 0..n {
            let e = &m[(r * n + i) * d..(r * n + i + 1) * d];
            match g.field.sign(e) {
                Ordering::Less => return true,
                Ordering::Greater => return false,
                Ordering::Equal => {}
            }
        }
        unreachable!("image of a simple root is nonzero")
    }

    /// Raw right multiplication `w ↦ w s_i` of keys.
    pub fn key_mul_right(&self, key: &mut ElemKey, i: usize) {
        match key {
            ElemKey::Perm(p) => p.swap(i, i + 1),
            ElemKey::Bits(b) => *b ^= 1 << i,
            ElemKey::Geo(m) => self.geo_mul_right(m, i),
        }
    }

    /// Raw left multiplication `w ↦ s_i w` of keys.
    pub fn key_mul_left(&self, key: &mut ElemKey, i: usize) {
        match key {
            ElemKey::Perm(p) => {
                let a = p.iter().position(|&v| v as usize == i).unwrap();
                let b = p.iter().position(|&v| v as usize == i + 1).unwrap();
                p.swap(a, b);
            }
            ElemKey::Bits(b) => *b ^= 1 << i,
            ElemKey::Geo(m) => self.geo_mul_left(m, i),
        }
    }

    fn axpy(field: &NumberField, dst: &mut [i64], c: &Coef, src: &[i64]) {
        match c {
            Coef::Zero => {}
            Coef::Int(c) => {
                for (x, &y) in dst.iter_mut().zip(src) {
                    *x = y.checked_mul(*c).and_then(|t| x.checked_add(t)).expect("matrix coefficient overflow");
                }
            }
            Coef::Field(c) => {
                let prod = field.mul(c, src);
                field.add_assign(dst, &prod);
            }
        }
    }

    fn geo_mul_right(&self, m: &mut [i64], i: usize) {
        let g = self.geometry.as_ref().expect("geometric backend");
        let n = self.rank();
        let d = g.field.degree();
        let mut col_i = vec![0i64; d];
        for r in 0..n {
            col_i.copy_from_slice(&m[(r * n + i) * d..(r * n + i + 1) * d]);
            for j in 0..n {
                if j != i {
                    Self::axpy(&g.field, &mut m[(r * n + j) * d..(r * n + j + 1) * d], &g.coef[i][j], &col_i);
                }
            }
            for x in &mut m[(r * n + i) * d..(r * n + i + 1) * d] {
                *x = -*x;
            }
        }
    }

    fn geo_mul_left(&self, m: &mut [i64], i: usize) {
        let g = self.geometry.as_ref().expect("geometric backend");
        let n = self.rank();
        let d = g.field.degree();
        let mut row = vec![0i64; n * d];
        for (x, &y) in row.iter_mut().zip(&m[i * n * d..(i + 1) * n * d]) {
            *x = -y;
        }
        for j in 0..n {
            if j == i {
                continue;
            }
            let src: Vec<i64> = m[j * n * d..(j + 1) * n * d].to_vec();
            for c in 0..n {
                Self::axpy(&g.field, &mut row[c * d..(c + 1) * d], &g.coef[i][j], &src[c * d..(c + 1) * d]);
            }
        }
        m[i * n * d..(i + 1) * n * d].copy_from_slice(&row);
    }

    /// Canonical reduced word: repeatedly strip the smallest-index right descent.
    pub fn canonical_word(&self, key: &ElemKey, length: usize) -> Vec<u8> {
        let mut k = key.clone();
        let mut word = Vec::with_capacity(length);
        for _ in 0..length {
            let i = (0..self.rank())
                .find(|&i| self.key_right_descent(&k, i))
                .expect("nonidentity element has a right descent");
            self.key_mul_right(&mut k, i);
            word.push(i as u8);
        }
        debug_assert_eq!(k, self.identity_key());
        word.reverse();
        word
    }

    pub(crate) fn element_from_key(&self, key: ElemKey, length: usize) -> GroupElement {
        let word = self.canonical_word(&key, length);
        GroupElement { key, length, word }
    }

    /// Multiplies `word` letter by letter, tracking the length with descent tests.
    pub fn reduce_word(&self, word: &[u8]) -> Result<GroupElement> {
        let (key, length) = self.walk(word)?;
        Ok(self.element_from_key(key, length))
    }

    fn walk(&self, word: &[u8]) -> Result<(ElemKey, usize)> {
        let mut key = self.identity_key();
        let mut length = 0usize;
        for &a in word {
            let a = a as usize;
            if a >= self.rank() {
                return Err(Error::InvalidArgument(format!("generator index {a} out of range")));
            }
            if self.key_right_descent(&key, a) {
                length -= 1;
            } else {
                length += 1;
            }
            self.key_mul_right(&mut key, a);
        }
        Ok((key, length))
    }

    /// True iff multiplying by `s_i` on `side` shortens `elem`.
    pub fn descent_test(&self, elem: &GroupElement, i: usize, side: Side) -> bool {
        match side {
            Side::Right => self.key_right_descent(&elem.key, i),
            Side::Left => self.left_descent(elem, i),
        }
    }

    fn left_descent(&self, elem: &GroupElement, i: usize) -> bool {
        match &elem.key {
            ElemKey::Perm(p) => {
                let a = p.iter().position(|&v| v as usize == i).unwrap();
                let b = p.iter().position(|&v| v as usize == i + 1).unwrap();
                b < a
            }
            ElemKey::Bits(b) => b >> i & 1 == 1,
            ElemKey::Geo(_) => {
                // ℓ(s_i w) < ℓ(w) iff w^{-1} has right descent i.
                let rev: Vec<u8> = elem.word.iter().rev().copied().collect();
                let (inv, _) = self.walk(&rev).expect("stored word is valid");
                self.key_right_descent(&inv, i)
            }
        }
    }

    pub fn apply_generator(&self, elem: &GroupElement, i: usize, side: Side) -> GroupElement {
        assert!(i < self.rank(), "generator index out of range");
        let shorter = self.descent_test(elem, i, side);
        let mut key = elem.key.clone();
        match side {
            Side::Right => self.key_mul_right(&mut key, i),
            Side::Left => self.key_mul_left(&mut key, i),
        }
        let length = if shorter { elem.length - 1 } else { elem.length + 1 };
        self.element_from_key(key, length)
    }

    pub fn multiply(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        let mut word = a.word.clone();
        word.extend_from_slice(&b.word);
        self.reduce_word(&word).expect("stored words are valid")
    }

    /// Longest element of a finite group.
    pub fn longest_element(&self) -> Result<GroupElement> {
        if self.classify().kind != GroupKind::Finite {
            return Err(Error::InvalidArgument(format!("{} is not finite; w0 does not exist", self.spec)));
        }
        let mut key = self.identity_key();
        let mut length = 0;
        while let Some(i) = (0..self.rank()).find(|&i| !self.key_right_descent(&key, i)) {
            self.key_mul_right(&mut key, i);
            length += 1;
        }
        Ok(self.element_from_key(key, length))
    }

    /// Reduced deletion products: every `u ⋖ w` as `(key, ℓ(w) − 1)`, unsorted and deduplicated.
    pub(crate) fn lower_cover_keys(&self, w: &GroupElement) -> Vec<ElemKey> {
        if let ElemKey::Bits(b) = w.key {
            return (0..self.rank()).filter(|&i| b >> i & 1 == 1).map(|i| ElemKey::Bits(b & !(1 << i))).collect();
        }
        let word = &w.word;
        let mut out: Vec<ElemKey> = Vec::with_capacity(word.len());
        let mut prefix = self.identity_key();
        for j in 0..word.len() {
            let mut k = prefix.clone();
            let mut reduced = true;
            for &a in &word[j + 1..] {
                if self.key_right_descent(&k, a as usize) {
                    reduced = false;
                    break;
                }
                self.key_mul_right(&mut k, a as usize);
            }
            if reduced && !out.contains(&k) {
                out.push(k);
            }
            self.key_mul_right(&mut prefix, word[j] as usize);
        }
        out
    }

    pub fn lower_covers(&self, w: &GroupElement) -> Vec<GroupElement> {
        let mut v: Vec<GroupElement> =
            self.lower_cover_keys(w).into_iter().map(|k| self.element_from_key(k, w.length - 1)).collect();
        v.sort();
        v
    }

    pub fn classify(&self) -> ClassificationResult {
        classify_matrix(&self.matrix)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupKind {
    Finite,
    Affine,
    Indefinite,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub kind: GroupKind,
    /// Determinants of the leading principal minors of the Schläfli matrix.
    pub leading_minors: Vec<f64>,
    pub min_eigenvalue: f64,
    pub tolerance: f64,
    /// Set when the smallest eigenvalue is within the tolerance of zero.
    pub near_singular: bool,
}

pub const CLASSIFY_TOLERANCE: f64 = 1e-9;

pub fn schlafli_matrix(m: &CoxeterMatrix) -> nalgebra::DMatrix<f64> {
    let n = m.size();
    nalgebra::DMatrix::from_fn(n, n, |i, j| match m.get(i, j) {
        0 => -1.0,
        v => -(std::f64::consts::PI / v as f64).cos(),
    })
}

pub fn classify_matrix(m: &CoxeterMatrix) -> ClassificationResult {
    let s = schlafli_matrix(m);
    let n = m.size();
    let leading_minors = (1..=n).map(|k| s.view((0, 0), (k, k)).determinant()).collect();
    let eig = nalgebra::SymmetricEigen::new(s);
    let min_eigenvalue = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = CLASSIFY_TOLERANCE;
    let kind = if min_eigenvalue > tol {
        GroupKind::Finite
    } else if min_eigenvalue >= -tol {
        GroupKind::Affine
    } else {
        GroupKind::Indefinite
    };
    ClassificationResult { kind, leading_minors, min_eigenvalue, tolerance: tol, near_singular: min_eigenvalue.abs() <= tol }
}
