//! Symbolic representations of a matrix group and their exact action.
//!
//! Canonical bases: `Std` uses e1…em; `Sym` uses monomials of the child
//! basis in lexicographic order with the first variable's exponent
//! descending (e1², e1e2, e2², …); `Tensor` uses row-major pairs;
//! `DirectSum` lists the left summand first; `MatrixRep` uses row-major
//! entries E_ij. `Sym` coordinates are monomial coordinates, so
//! (ax + by)² has cross coordinate 2ab.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::rc::Rc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::arcs::ArcMatrix;
use crate::error::{Error, Result};
use crate::gaussian::GaussianRational;
use crate::laurent::LaurentSeries;
use crate::literal::ParseError;
use crate::lp::{hull_vertices, rat, Rational};

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum RepExpr {
    Std(usize),
    Triv,
    /// m×m matrices with the group acting by left multiplication.
    MatrixRep(usize),
    Sym(u32, Box<RepExpr>),
    Dual(Box<RepExpr>),
    Tensor(Box<RepExpr>, Box<RepExpr>),
    DirectSum(Box<RepExpr>, Box<RepExpr>),
}

impl RepExpr {
    pub fn sym(k: u32, child: RepExpr) -> Self {
        RepExpr::Sym(k, Box::new(child))
    }

    pub fn dual(child: RepExpr) -> Self {
        RepExpr::Dual(Box::new(child))
    }

    pub fn tensor(a: RepExpr, b: RepExpr) -> Self {
        RepExpr::Tensor(Box::new(a), Box::new(b))
    }

    pub fn direct_sum(a: RepExpr, b: RepExpr) -> Self {
        RepExpr::DirectSum(Box::new(a), Box::new(b))
    }

    /// `self^{⊗k}`, left-nested; `Triv` for k = 0.
    pub fn tensor_power(&self, k: u32) -> Self {
        (1..k).fold(if k == 0 { RepExpr::Triv } else { self.clone() }, |acc, _| RepExpr::tensor(acc, self.clone()))
    }

    /// Dimension m of the ambient group; `None` when only `Triv` leaves occur.
    pub fn ambient_dim(&self) -> Result<Option<usize>> {
        fn merge(a: Option<usize>, b: Option<usize>) -> Result<Option<usize>> {
            match (a, b) {
                (Some(x), Some(y)) if x != y => Err(Error::DimensionMismatch { expected: x, found: y }),
                (Some(x), _) | (_, Some(x)) => Ok(Some(x)),
                (None, None) => Ok(None),
            }
        }
        match self {
            RepExpr::Std(m) | RepExpr::MatrixRep(m) => Ok(Some(*m)),
            RepExpr::Triv => Ok(None),
            RepExpr::Sym(_, c) | RepExpr::Dual(c) => c.ambient_dim(),
            RepExpr::Tensor(a, b) | RepExpr::DirectSum(a, b) => merge(a.ambient_dim()?, b.ambient_dim()?),
        }
    }

    /// Dimension of the represented space. Rejects mixed ambient dimensions.
    pub fn dim(&self) -> Result<usize> {
        self.ambient_dim()?;
        let d = self.dim_u128();
        usize::try_from(d).map_err(|_| Error::DimensionOverflow { dim: d, cap: usize::MAX as u128 })
    }

    /// Dimension with saturating arithmetic; no ambient check.
    pub fn dim_u128(&self) -> u128 {
        match self {
            RepExpr::Std(m) => *m as u128,
            RepExpr::Triv => 1,
            RepExpr::MatrixRep(m) => (*m as u128).saturating_mul(*m as u128),
            RepExpr::Sym(k, c) => binomial(c.dim_u128() + *k as u128 - 1, *k as u128),
            RepExpr::Dual(c) => c.dim_u128(),
            RepExpr::Tensor(a, b) => a.dim_u128().saturating_mul(b.dim_u128()),
            RepExpr::DirectSum(a, b) => a.dim_u128().saturating_add(b.dim_u128()),
        }
    }

    /// Name of a canonical basis element, as used in vector literals.
    pub fn basis_name(&self, idx: usize) -> String {
        match self {
            RepExpr::Std(_) => format!("e{}", idx + 1),
            RepExpr::Triv => "1".into(),
            RepExpr::MatrixRep(m) => format!("E{}_{}", idx / m + 1, idx % m + 1),
            RepExpr::Sym(k, c) => {
                let n = c.dim_u128() as usize;
                let alpha = &monomials(n, *k)[idx];
                let factors: Vec<String> = alpha
                    .iter()
                    .enumerate()
                    .filter(|(_, &a)| a > 0)
                    .map(|(i, &a)| {
                        let name = c.atom_name(i);
                        if a == 1 {
                            name
                        } else {
                            format!("{name}^{a}")
                        }
                    })
                    .collect();
                if factors.is_empty() {
                    "1".into()
                } else {
                    factors.join("*")
                }
            }
            RepExpr::Dual(c) => format!("~{}", c.atom_name(idx)),
            RepExpr::Tensor(a, b) => {
                let db = b.dim_u128() as usize;
                format!("{}(x){}", a.basis_name(idx / db), b.basis_name(idx % db))
            }
            RepExpr::DirectSum(a, b) => {
                let da = a.dim_u128() as usize;
                if idx < da {
                    format!("L.{}", a.basis_name(idx))
                } else {
                    format!("R.{}", b.basis_name(idx - da))
                }
            }
        }
    }

    fn atom_name(&self, idx: usize) -> String {
        match self {
            RepExpr::Std(_) | RepExpr::MatrixRep(_) | RepExpr::Triv => self.basis_name(idx),
            _ => format!("[{}]", self.basis_name(idx)),
        }
    }

    /// Index of the basis element called `name` (or `#idx`).
    pub fn basis_index(&self, name: &str) -> Option<usize> {
        let name: String = name.chars().filter(|c| !c.is_whitespace()).collect();
        let dim = self.dim().ok()?;
        if let Some(n) = name.strip_prefix('#') {
            return n.parse().ok().filter(|&i| i < dim);
        }
        (0..dim).find(|&i| self.basis_name(i) == name)
    }

    /// Torus weight of every canonical basis element, given the weights of
    /// e1…em in the standard representation.
    pub fn basis_weights(&self, ambient: &[Vec<i64>]) -> Vec<Vec<i64>> {
        let rank = ambient.first().map_or(0, |w| w.len());
        let add = |a: &[i64], b: &[i64]| a.iter().zip(b).map(|(x, y)| x + y).collect::<Vec<_>>();
        match self {
            RepExpr::Std(_) => ambient.to_vec(),
            RepExpr::Triv => vec![vec![0; rank]],
            RepExpr::MatrixRep(m) => (0..m * m).map(|idx| ambient[idx / m].clone()).collect(),
            RepExpr::Sym(k, c) => {
                let child = c.basis_weights(ambient);
                monomials(child.len(), *k)
                    .iter()
                    .map(|alpha| {
                        let mut w = vec![0; rank];
                        for (i, &a) in alpha.iter().enumerate() {
                            for (x, y) in w.iter_mut().zip(&child[i]) {
                                *x += a as i64 * y;
                            }
                        }
                        w
                    })
                    .collect()
            }
            RepExpr::Dual(c) => {
                c.basis_weights(ambient).into_iter().map(|w| w.into_iter().map(|x| -x).collect()).collect()
            }
            RepExpr::Tensor(a, b) => {
                let (wa, wb) = (a.basis_weights(ambient), b.basis_weights(ambient));
                wa.iter().flat_map(|x| wb.iter().map(move |y| add(x, y))).collect()
            }
            RepExpr::DirectSum(a, b) => {
                let mut w = a.basis_weights(ambient);
                w.extend(b.basis_weights(ambient));
                w
            }
        }
    }

    /// Weights under the diagonal torus of GL(m).
    pub fn diagonal_weights(&self) -> Result<Vec<Vec<i64>>> {
        let m = self.ambient_dim()?.unwrap_or(0);
        Ok(self.basis_weights(&TorusData::diagonal(m).ambient))
    }

    /// Smallest d ≥ 1 with every diagonal-torus weight in d·Δ_m, the simplex
    /// {x ≥ 0, Σx ≤ d}.
    pub fn deg(&self) -> Result<u32> {
        let w = self.diagonal_weights()?;
        if let Some(bad) = w.iter().find(|x| x.iter().any(|&c| c < 0)) {
            return Err(Error::UnnormalizableWeights(format!("weight {bad:?} has a negative coordinate")));
        }
        Ok(w.iter().map(|x| x.iter().sum::<i64>()).max().unwrap_or(0).max(1) as u32)
    }

    /// [`deg`](Self::deg) after tensoring with `det^shift`, the smallest
    /// power making every weight nonnegative.
    pub fn normalized_deg(&self) -> Result<NormalizedDegree> {
        let w = self.diagonal_weights()?;
        let m = self.ambient_dim()?.unwrap_or(0) as i64;
        let shift = w.iter().flatten().map(|&c| -c).max().unwrap_or(0).max(0);
        let top = w.iter().map(|x| x.iter().sum::<i64>()).max().unwrap_or(0) + shift * m;
        Ok(NormalizedDegree { degree: top.max(1) as u32, det_shift: shift as u32 })
    }

    pub fn weight_table(&self, torus: &TorusData) -> Result<WeightTable> {
        self.check_torus(torus)?;
        Ok(WeightTable::from_weights(torus.rank, &self.basis_weights(&torus.ambient)))
    }

    /// Vertices of the convex hull of the weights occurring in the representation.
    pub fn weight_polytope(&self, torus: &TorusData) -> Result<Vec<Vec<Rational>>> {
        self.check_torus(torus)?;
        if torus.rank > MAX_POLYTOPE_RANK {
            return Err(Error::RankTooLarge { rank: torus.rank, max: MAX_POLYTOPE_RANK });
        }
        Ok(polytope(&self.basis_weights(&torus.ambient)))
    }

    fn check_torus(&self, torus: &TorusData) -> Result<()> {
        if let Some(m) = self.ambient_dim()? {
            if m != torus.ambient.len() {
                return Err(Error::DimensionMismatch { expected: m, found: torus.ambient.len() });
            }
        }
        Ok(())
    }
}

pub const MAX_POLYTOPE_RANK: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NormalizedDegree {
    pub degree: u32,
    /// Power of the determinant tensored on before measuring the degree.
    pub det_shift: u32,
}

fn polytope(weights: &[Vec<i64>]) -> Vec<Vec<Rational>> {
    let pts: Vec<Vec<Rational>> = weights.iter().map(|w| w.iter().map(|&x| rat(x)).collect()).collect();
    hull_vertices(&pts)
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n.saturating_sub(k));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Exponent vectors of degree-`k` monomials in `n` variables, canonical order.
pub fn monomials(n: usize, k: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, k: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == n {
            prefix.push(k);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for a in (0..=k).rev() {
            prefix.push(a);
            rec(n, k - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        if k == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(n, k, &mut Vec::with_capacity(n), &mut out);
    out
}

impl fmt::Display for RepExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RepExpr::Std(m) => write!(f, "std({m})"),
            RepExpr::Triv => f.write_str("triv"),
            RepExpr::MatrixRep(m) => write!(f, "mat({m})"),
            RepExpr::Sym(k, c) => write!(f, "sym({k},{c})"),
            RepExpr::Dual(c) => write!(f, "dual({c})"),
            RepExpr::Tensor(a, b) => write!(f, "({a} (x) {b})"),
            RepExpr::DirectSum(a, b) => write!(f, "({a} (+) {b})"),
        }
    }
}

impl fmt::Debug for RepExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Parses the representation grammar: `std(m)`, `triv`, `mat(m)`,
/// `sym(k,R)`, `dual(R)`, `R (x) S`, `R (+) S` and parentheses. `(x)` binds
/// tighter than `(+)`; both associate to the left.
pub fn parse_rep(src: &str) -> std::result::Result<RepExpr, ParseError> {
    let mut p = RepParser { chars: src.chars().collect(), pos: 0 };
    let rep = p.sum()?;
    p.skip_ws();
    if p.pos < p.chars.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(rep)
}

impl std::str::FromStr for RepExpr {
    type Err = ParseError;
    fn from_str(s: &str) -> std::result::Result<Self, ParseError> {
        parse_rep(s)
    }
}

struct RepParser {
    chars: Vec<char>,
    pos: usize,
}

impl RepParser {
    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn error(&self, message: &str) -> ParseError {
        let token: String =
            self.chars[self.pos.min(self.chars.len())..].iter().take_while(|c| !c.is_whitespace()).take(12).collect();
        ParseError {
            column: self.pos + 1,
            token: if token.is_empty() { "end of input".into() } else { token },
            message: message.into(),
        }
    }

    fn eat(&mut self, lit: &str) -> bool {
        self.skip_ws();
        let n = lit.chars().count();
        if self.chars.len() >= self.pos + n && self.chars[self.pos..self.pos + n].iter().copied().eq(lit.chars()) {
            self.pos += n;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, lit: &str) -> std::result::Result<(), ParseError> {
        if self.eat(lit) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{lit}`")))
        }
    }

    fn number(&mut self) -> std::result::Result<u64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let digits: String = self.chars[start..self.pos].iter().collect();
        digits.parse().map_err(|_| {
            self.pos = start;
            self.error("expected a nonnegative integer")
        })
    }

    fn sum(&mut self) -> std::result::Result<RepExpr, ParseError> {
        let mut acc = self.product()?;
        while self.eat("(+)") {
            acc = RepExpr::direct_sum(acc, self.product()?);
        }
        Ok(acc)
    }

    fn product(&mut self) -> std::result::Result<RepExpr, ParseError> {
        let mut acc = self.atom()?;
        while self.eat("(x)") {
            acc = RepExpr::tensor(acc, self.atom()?);
        }
        Ok(acc)
    }

    fn atom(&mut self) -> std::result::Result<RepExpr, ParseError> {
        self.skip_ws();
        let rest: String = self.chars[self.pos..].iter().take(3).collect();
        if rest.starts_with("(x)") || rest.starts_with("(+)") {
            return Err(self.error("expected a representation"));
        }
        if self.eat("(") {
            let r = self.sum()?;
            self.expect(")")?;
            return Ok(r);
        }
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_alphabetic()) {
            self.pos += 1;
        }
        let word: String = self.chars[start..self.pos].iter().collect();
        let dim = |p: &mut Self| -> std::result::Result<usize, ParseError> {
            p.expect("(")?;
            let at = p.pos;
            let m = p.number()?;
            if m == 0 {
                p.pos = at;
                return Err(p.error("dimension must be positive"));
            }
            p.expect(")")?;
            Ok(m as usize)
        };
        match word.as_str() {
            "std" => Ok(RepExpr::Std(dim(self)?)),
            "mat" => Ok(RepExpr::MatrixRep(dim(self)?)),
            "triv" => Ok(RepExpr::Triv),
            "sym" => {
                self.expect("(")?;
                let k = self.number()?;
                let k = u32::try_from(k).map_err(|_| self.error("symmetric power too large"))?;
                self.expect(",")?;
                let c = self.sum()?;
                self.expect(")")?;
                Ok(RepExpr::sym(k, c))
            }
            "dual" => {
                self.expect("(")?;
                let c = self.sum()?;
                self.expect(")")?;
                Ok(RepExpr::dual(c))
            }
            _ => {
                self.pos = start;
                Err(self.error("unknown representation"))
            }
        }
    }
}

/// A commuting torus, given by the integer weights (in ℤ^rank) of e1…em.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorusData {
    pub rank: usize,
    pub ambient: Vec<Vec<i64>>,
}

impl TorusData {
    pub fn new(rank: usize, ambient: Vec<Vec<i64>>) -> Result<Self> {
        if let Some(w) = ambient.iter().find(|w| w.len() != rank) {
            return Err(Error::DimensionMismatch { expected: rank, found: w.len() });
        }
        Ok(Self { rank, ambient })
    }

    /// The full diagonal torus of GL(m): e_j has weight the j-th unit vector.
    pub fn diagonal(m: usize) -> Self {
        let ambient = (0..m).map(|j| (0..m).map(|i| i64::from(i == j)).collect()).collect();
        Self { rank: m, ambient }
    }

    /// Rank-0 torus acting on an m-dimensional space.
    pub fn trivial(m: usize) -> Self {
        Self { rank: 0, ambient: vec![Vec::new(); m] }
    }

    pub fn group_dim(&self) -> usize {
        self.ambient.len()
    }

    /// Cocharacter arc `diag(z^{⟨μ_j, λ⟩})` for λ ∈ ℤ^rank.
    pub fn cocharacter(&self, lambda: &[i64]) -> ArcMatrix {
        let exps: Vec<i64> = self.ambient.iter().map(|mu| dot(mu, lambda)).collect();
        ArcMatrix::from_cocharacter(&exps)
    }
}

pub(crate) fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Canonical basis indices grouped by torus weight, weights in increasing order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightTable {
    pub rank: usize,
    pub entries: Vec<(Vec<i64>, Vec<usize>)>,
}

impl WeightTable {
    pub fn from_weights(rank: usize, weights: &[Vec<i64>]) -> Self {
        let mut map: BTreeMap<Vec<i64>, Vec<usize>> = BTreeMap::new();
        for (i, w) in weights.iter().enumerate() {
            map.entry(w.clone()).or_default().push(i);
        }
        Self { rank, entries: map.into_iter().collect() }
    }

    pub fn len(&self) -> usize {
        self.entries.iter().map(|e| e.1.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// An exact vector in the canonical basis of a representation.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RepVector {
    rep: RepExpr,
    coords: BTreeMap<usize, GaussianRational>,
}

impl RepVector {
    pub fn new(rep: RepExpr, coords: BTreeMap<usize, GaussianRational>) -> Result<Self> {
        let dim = rep.dim()?;
        if let Some((&i, _)) = coords.iter().find(|(&i, _)| i >= dim) {
            return Err(Error::InvalidInput(format!("basis index {i} out of range for dimension {dim}")));
        }
        let coords = coords.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Ok(Self { rep, coords })
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, GaussianRational)>>(rep: RepExpr, pairs: I) -> Result<Self> {
        let mut coords = BTreeMap::new();
        for (i, c) in pairs {
            let slot: &mut GaussianRational = coords.entry(i).or_default();
            *slot = &*slot + &c;
        }
        Self::new(rep, coords)
    }

    pub fn basis(rep: RepExpr, idx: usize) -> Result<Self> {
        Self::from_pairs(rep, [(idx, GaussianRational::one())])
    }

    /// Vector from `(basis name, coefficient)` pairs, names as in
    /// [`RepExpr::basis_name`] or `#idx`.
    pub fn from_names<'a, I>(rep: RepExpr, named: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, GaussianRational)>,
    {
        let mut pairs = Vec::new();
        for (name, c) in named {
            let idx = rep
                .basis_index(name)
                .ok_or_else(|| Error::InvalidInput(format!("unknown basis element `{name}` of {rep}")))?;
            pairs.push((idx, c));
        }
        Self::from_pairs(rep, pairs)
    }

    pub fn rep(&self) -> &RepExpr {
        &self.rep
    }

    pub fn coords(&self) -> &BTreeMap<usize, GaussianRational> {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let db = other.rep.dim_u128() as usize;
        let coords =
            self.coords.iter().flat_map(|(a, x)| other.coords.iter().map(move |(b, y)| (a * db + b, x * y))).collect();
        Self { rep: RepExpr::tensor(self.rep.clone(), other.rep.clone()), coords }
    }

    pub fn tensor_power(&self, k: u32) -> Self {
        if k == 0 {
            return Self::basis(RepExpr::Triv, 0).unwrap();
        }
        (1..k).fold(self.clone(), |acc, _| acc.tensor(self))
    }

    /// This vector placed in the left summand of `self.rep ⊕ right`.
    pub fn inject_left(&self, right: &RepExpr) -> Self {
        Self { rep: RepExpr::direct_sum(self.rep.clone(), right.clone()), coords: self.coords.clone() }
    }

    /// This vector placed in the right summand of `left ⊕ self.rep`.
    pub fn inject_right(&self, left: &RepExpr) -> Self {
        let off = left.dim_u128() as usize;
        Self {
            rep: RepExpr::direct_sum(left.clone(), self.rep.clone()),
            coords: self.coords.iter().map(|(i, c)| (i + off, c.clone())).collect(),
        }
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        Self::from_pairs(self.rep.clone(), self.coords.iter().map(|(i, x)| (*i, x * c))).unwrap()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rep != other.rep {
            return Err(Error::InvalidInput("adding vectors of different representations".into()));
        }
        Self::from_pairs(self.rep.clone(), self.coords.iter().chain(&other.coords).map(|(i, c)| (*i, c.clone())))
    }

    /// Torus weights occurring in the support.
    pub fn support_weights(&self, torus: &TorusData) -> Vec<Vec<i64>> {
        let w = self.rep.basis_weights(&torus.ambient);
        self.coords.keys().map(|&i| w[i].clone()).collect()
    }

    /// Vertices of the weight polytope of this vector.
    pub fn weight_polytope(&self, torus: &TorusData) -> Result<Vec<Vec<Rational>>> {
        self.rep.check_torus(torus)?;
        if torus.rank > MAX_POLYTOPE_RANK {
            return Err(Error::RankTooLarge { rank: torus.rank, max: MAX_POLYTOPE_RANK });
        }
        Ok(polytope(&self.support_weights(torus)))
    }

    pub fn display_with_names(&self) -> String {
        if self.coords.is_empty() {
            return "0".into();
        }
        self.coords.iter().map(|(i, c)| format!("{}:{}", self.rep.basis_name(*i), c)).collect::<Vec<_>>().join(", ")
    }
}

/// Scalars a group element can act with.
pub trait Scalar: Clone {
    fn zero() -> Self;
    fn one() -> Self;
    /// Exactly zero; such coordinates are dropped.
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn from_gaussian(c: &GaussianRational) -> Self;
}

impl Scalar for LaurentSeries {
    fn zero() -> Self {
        LaurentSeries::zero()
    }
    fn one() -> Self {
        LaurentSeries::one()
    }
    fn is_zero(&self) -> bool {
        self.is_exact_zero()
    }
    fn add(&self, other: &Self) -> Self {
        LaurentSeries::add(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        LaurentSeries::mul(self, other)
    }
    fn from_gaussian(c: &GaussianRational) -> Self {
        LaurentSeries::constant(c.clone())
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        *self == Complex64::new(0.0, 0.0)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn from_gaussian(c: &GaussianRational) -> Self {
        c.to_complex()
    }
}

/// A square matrix acting on the standard representation.
pub trait GroupElement: Sized {
    type Scalar: Scalar;
    fn group_dim(&self) -> usize;
    fn entry_at(&self, i: usize, j: usize) -> Self::Scalar;
    fn group_inverse(&self) -> Result<Self>;
}

impl GroupElement for ArcMatrix {
    type Scalar = LaurentSeries;
    fn group_dim(&self) -> usize {
        self.dim()
    }
    fn entry_at(&self, i: usize, j: usize) -> LaurentSeries {
        self.entry(i, j).clone()
    }
    fn group_inverse(&self) -> Result<Self> {
        self.inverse()
    }
}

impl GroupElement for DMatrix<Complex64> {
    type Scalar = Complex64;
    fn group_dim(&self) -> usize {
        self.nrows()
    }
    fn entry_at(&self, i: usize, j: usize) -> Complex64 {
        self[(i, j)]
    }
    fn group_inverse(&self) -> Result<Self> {
        self.clone().try_inverse().ok_or(Error::SingularMatrix)
    }
}

/// Sparse coordinates, exact zeros omitted.
pub type Coordinates<S> = BTreeMap<usize, S>;

type Column<S> = Rc<Vec<(usize, S)>>;

struct Action<'r, G: GroupElement> {
    g: G,
    inverse: Option<Box<Action<'r, G>>>,
    columns: RefCell<HashMap<(*const RepExpr, usize), Column<G::Scalar>>>,
    dual_rows: RefCell<HashMap<*const RepExpr, Rc<Vec<Vec<(usize, G::Scalar)>>>>>,
    monomial_index: RefCell<HashMap<(usize, u32), Rc<HashMap<Vec<u32>, usize>>>>,
    _rep: std::marker::PhantomData<&'r RepExpr>,
}

impl<'r, G: GroupElement> Action<'r, G> {
    fn new(g: G) -> Self {
        Self {
            g,
            inverse: None,
            columns: RefCell::new(HashMap::new()),
            dual_rows: RefCell::new(HashMap::new()),
            monomial_index: RefCell::new(HashMap::new()),
            _rep: std::marker::PhantomData,
        }
    }

    fn inverse_action(&mut self) -> Result<&mut Action<'r, G>> {
        if self.inverse.is_none() {
            self.inverse = Some(Box::new(Action::new(self.g.group_inverse()?)));
        }
        Ok(self.inverse.as_mut().unwrap())
    }

    /// Image of basis element `idx` of `rep`.
    fn column(&mut self, rep: &'r RepExpr, idx: usize) -> Result<Column<G::Scalar>> {
        let key = (rep as *const RepExpr, idx);
        if let Some(c) = self.columns.borrow().get(&key) {
            return Ok(c.clone());
        }
        let col: Vec<(usize, G::Scalar)> = match rep {
            RepExpr::Std(m) => (0..*m).map(|i| (i, self.g.entry_at(i, idx))).filter(|(_, x)| !x.is_zero()).collect(),
            RepExpr::Triv => vec![(0, G::Scalar::one())],
            RepExpr::MatrixRep(m) => {
                let (i, j) = (idx / m, idx % m);
                (0..*m).map(|k| (k * m + j, self.g.entry_at(k, i))).filter(|(_, x)| !x.is_zero()).collect()
            }
            RepExpr::Sym(k, c) => self.sym_column(c, *k, idx)?,
            RepExpr::Dual(c) => {
                let rows = self.dual_rows(c)?;
                rows[idx].clone()
            }
            RepExpr::Tensor(a, b) => {
                let db = b.dim_u128() as usize;
                let ca = self.column(a, idx / db)?;
                let cb = self.column(b, idx % db)?;
                let mut out = Vec::with_capacity(ca.len() * cb.len());
                for (i, x) in ca.iter() {
                    for (j, y) in cb.iter() {
                        let p = x.mul(y);
                        if !p.is_zero() {
                            out.push((i * db + j, p));
                        }
                    }
                }
                out
            }
            RepExpr::DirectSum(a, b) => {
                let da = a.dim_u128() as usize;
                if idx < da {
                    self.column(a, idx)?.as_ref().clone()
                } else {
                    self.column(b, idx - da)?.iter().map(|(i, x)| (i + da, x.clone())).collect()
                }
            }
        };
        let col = Rc::new(col);
        self.columns.borrow_mut().insert(key, col.clone());
        Ok(col)
    }

    // rows of ρ_c(g⁻¹): entry (b, j) is the b-th coordinate of g⁻¹·basis_j
    fn dual_rows(&mut self, c: &'r RepExpr) -> Result<Rc<Vec<Vec<(usize, G::Scalar)>>>> {
        let key = c as *const RepExpr;
        if let Some(r) = self.dual_rows.borrow().get(&key) {
            return Ok(r.clone());
        }
        let n = c.dim_u128() as usize;
        let inv = self.inverse_action()?;
        let mut rows: Vec<Vec<(usize, G::Scalar)>> = vec![Vec::new(); n];
        for j in 0..n {
            for (b, x) in inv.column(c, j)?.iter() {
                rows[*b].push((j, x.clone()));
            }
        }
        let rows = Rc::new(rows);
        self.dual_rows.borrow_mut().insert(key, rows.clone());
        Ok(rows)
    }

    fn sym_column(&mut self, c: &'r RepExpr, k: u32, idx: usize) -> Result<Vec<(usize, G::Scalar)>> {
        let n = c.dim_u128() as usize;
        let index = self.monomial_index(n, k);
        let alpha = monomials(n, k).swap_remove(idx);
        // product of the images of the variables, as exponent-vector polynomials
        let mut poly: BTreeMap<Vec<u32>, G::Scalar> = BTreeMap::new();
        poly.insert(vec![0; n], G::Scalar::one());
        for (var, &a) in alpha.iter().enumerate() {
            if a == 0 {
                continue;
            }
            let col = self.column(c, var)?;
            for _ in 0..a {
                let mut next: BTreeMap<Vec<u32>, G::Scalar> = BTreeMap::new();
                for (mono, x) in &poly {
                    for (j, y) in col.iter() {
                        let mut m2 = mono.clone();
                        m2[*j] += 1;
                        let p = x.mul(y);
                        next.entry(m2).and_modify(|s| *s = s.add(&p)).or_insert(p);
                    }
                }
                poly = next;
            }
        }
        let mut out: Vec<(usize, G::Scalar)> =
            poly.into_iter().filter(|(_, x)| !x.is_zero()).map(|(mono, x)| (index[&mono], x)).collect();
        out.sort_by_key(|e| e.0);
        Ok(out)
    }

    fn monomial_index(&self, n: usize, k: u32) -> Rc<HashMap<Vec<u32>, usize>> {
        self.monomial_index
            .borrow_mut()
            .entry((n, k))
            .or_insert_with(|| Rc::new(monomials(n, k).into_iter().enumerate().map(|(i, m)| (m, i)).collect()))
            .clone()
    }
}

fn check_group_dim<G: GroupElement>(g: &G, rep: &RepExpr) -> Result<()> {
    if let Some(m) = rep.ambient_dim()? {
        if m != g.group_dim() {
            return Err(Error::DimensionMismatch { expected: m, found: g.group_dim() });
        }
    }
    Ok(())
}

/// Coordinates of `g·v` in the canonical basis of `v.rep()`.
pub fn act<G: GroupElement + Clone>(g: &G, v: &RepVector) -> Result<Coordinates<G::Scalar>> {
    check_group_dim(g, &v.rep)?;
    let mut action = Action::new(g.clone());
    let mut out: Coordinates<G::Scalar> = BTreeMap::new();
    for (&b, c) in &v.coords {
        let c = G::Scalar::from_gaussian(c);
        for (i, x) in action.column(&v.rep, b)?.iter() {
            let t = c.mul(x);
            out.entry(*i).and_modify(|s| *s = s.add(&t)).or_insert(t);
        }
    }
    out.retain(|_, x| !x.is_zero());
    Ok(out)
}

/// Dense matrix of `g` acting on `rep`, columns indexed by the canonical basis.
pub fn representation_matrix<G: GroupElement + Clone>(g: &G, rep: &RepExpr) -> Result<Vec<Vec<G::Scalar>>> {
    check_group_dim(g, rep)?;
    let n = rep.dim()?;
    let mut action = Action::new(g.clone());
    let mut m = vec![vec![G::Scalar::zero(); n]; n];
    for j in 0..n {
        for (i, x) in action.column(rep, j)?.iter() {
            m[*i][j] = x.clone();
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::literal::parse_series;

    fn std2() -> RepExpr {
        RepExpr::Std(2)
    }

    fn q(n: i64) -> GaussianRational {
        GaussianRational::from_integer(n)
    }

    fn arc(rows: &[&[&str]]) -> ArcMatrix {
        ArcMatrix::from_rows(rows.iter().map(|r| r.iter().map(|s| parse_series(s).unwrap()).collect()).collect())
            .unwrap()
    }

    #[test]
    fn dimensions() {
        assert_eq!(RepExpr::sym(2, std2()).dim(), Ok(3));
        assert!(matches!(RepExpr::tensor(std2(), RepExpr::Std(3)).dim(), Err(Error::DimensionMismatch { .. })));
        let r = RepExpr::direct_sum(RepExpr::sym(3, std2()), RepExpr::sym(1, std2()));
        assert_eq!(r.dim(), Ok(6));
        assert_eq!(RepExpr::MatrixRep(3).dim(), Ok(9));
        assert_eq!(RepExpr::sym(0, std2()).dim(), Ok(1));
    }

    #[test]
    fn basis_names_round_trip() {
        let reps = [
            RepExpr::sym(3, std2()),
            RepExpr::tensor(RepExpr::MatrixRep(2), RepExpr::sym(2, std2())),
            RepExpr::direct_sum(RepExpr::Triv, RepExpr::dual(std2())),
            RepExpr::sym(2, RepExpr::sym(2, std2())),
        ];
        for r in reps {
            for i in 0..r.dim().unwrap() {
                assert_eq!(r.basis_index(&r.basis_name(i)), Some(i), "{r} #{i}");
            }
        }
        assert_eq!(RepExpr::sym(3, std2()).basis_name(1), "e1^2*e2");
        assert_eq!(RepExpr::sym(2, std2()).basis_index("#2"), Some(2));
    }

    #[test]
    fn cocharacter_on_sym_square() {
        // (z^-1 e2)(z^-1 e2) = z^-2 e2²
        let g = ArcMatrix::from_cocharacter(&[1, -1]);
        let v = RepVector::basis(RepExpr::sym(2, std2()), 2).unwrap();
        let out = act(&g, &v).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[&2], LaurentSeries::z_pow(-2));
    }

    #[test]
    fn identity_acts_trivially() {
        let rep = RepExpr::tensor(RepExpr::sym(2, std2()), RepExpr::dual(std2()));
        let v = RepVector::from_pairs(rep, [(0, q(3)), (4, q(-1))]).unwrap();
        let out = act(&ArcMatrix::identity(2), &v).unwrap();
        let expected: Coordinates<LaurentSeries> =
            v.coords().iter().map(|(i, c)| (*i, LaurentSeries::constant(c.clone()))).collect();
        assert_eq!(out, expected);
    }

    #[test]
    fn unipotent_on_sym_square() {
        // (z^-1 e1 + e2)² = z^-2 e1² + 2 z^-1 e1e2 + e2²
        let g = arc(&[&["1", "z^-1"], &["0", "1"]]);
        let v = RepVector::basis(RepExpr::sym(2, std2()), 2).unwrap();
        let out = act(&g, &v).unwrap();
        assert_eq!(out[&0], LaurentSeries::z_pow(-2));
        assert_eq!(out[&1], parse_series("2*z^-1").unwrap());
        assert_eq!(out[&2], LaurentSeries::one());
    }

    #[test]
    fn matrix_rep_is_left_multiplication() {
        let g = arc(&[&["1", "z^-1"], &["z", "2"]]);
        let e = RepVector::from_pairs(RepExpr::MatrixRep(2), [(0, q(1)), (3, q(1))]).unwrap();
        let out = act(&g, &e).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(out.get(&(i * 2 + j)).cloned().unwrap_or_default(), g.entry(i, j).clone());
            }
        }
    }

    #[test]
    fn dual_is_inverse_transpose() {
        let g = ArcMatrix::from_cocharacter(&[3, -1]);
        let v = RepVector::basis(RepExpr::dual(std2()), 0).unwrap();
        assert_eq!(act(&g, &v).unwrap()[&0], LaurentSeries::z_pow(-3));
    }

    #[test]
    fn weight_tables() {
        let t = TorusData::diagonal(2);
        let wt = RepExpr::sym(2, std2()).weight_table(&t).unwrap();
        let ws: Vec<_> = RepExpr::sym(2, std2()).basis_weights(&t.ambient);
        assert_eq!(ws, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(wt.len(), 3);
        assert_eq!(RepExpr::Triv.basis_weights(&t.ambient), vec![vec![0, 0]]);
        assert_eq!(RepExpr::dual(std2()).basis_weights(&t.ambient), vec![vec![-1, 0], vec![0, -1]]);
    }

    #[test]
    fn degrees() {
        for m in 1..4 {
            for k in 1..4 {
                assert_eq!(RepExpr::sym(k, RepExpr::Std(m)).deg(), Ok(k));
            }
            assert_eq!(RepExpr::Std(m).deg(), Ok(1));
        }
        let t = RepExpr::tensor(RepExpr::sym(2, std2()), RepExpr::sym(3, std2()));
        assert_eq!(t.deg(), Ok(5));
        assert!(matches!(RepExpr::dual(std2()).deg(), Err(Error::UnnormalizableWeights(_))));
        assert_eq!(RepExpr::dual(std2()).normalized_deg(), Ok(NormalizedDegree { degree: 1, det_shift: 1 }));
        assert_eq!(RepExpr::Triv.deg(), Ok(1));
    }

    #[test]
    fn polytopes() {
        let t = TorusData::diagonal(2);
        let seg = RepExpr::sym(2, std2()).weight_polytope(&t).unwrap();
        assert_eq!(seg, vec![vec![rat(0), rat(2)], vec![rat(2), rat(0)]]);
        assert_eq!(RepExpr::Triv.weight_polytope(&t).unwrap(), vec![vec![rat(0), rat(0)]]);
        let sq = RepExpr::direct_sum(std2(), RepExpr::dual(std2())).weight_polytope(&t).unwrap();
        assert_eq!(sq.len(), 4);
        assert!(matches!(RepExpr::Std(5).weight_polytope(&TorusData::diagonal(5)), Err(Error::RankTooLarge { .. })));
    }

    #[test]
    fn complex_action_matches_exact_action_at_a_point() {
        let g = arc(&[&["1+z", "z^-1"], &["2", "1-z^2"]]);
        let rep = RepExpr::tensor(RepExpr::sym(2, std2()), RepExpr::dual(std2()));
        let v = RepVector::from_pairs(rep, [(0, q(1)), (3, q(2)), (5, q(-1))]).unwrap();
        let z = Complex64::new(0.05, 0.0);
        let exact = act(&g, &v).unwrap();
        let numeric = act(&g.eval(z).unwrap(), &v).unwrap();
        for (i, x) in &exact {
            let a = x.eval(z).unwrap();
            let b = numeric[i];
            assert!((a - b).norm() <= 1e-9 * (1.0 + a.norm()), "{i}: {a} vs {b}");
        }
    }

    #[test]
    fn rep_grammar() {
        let r = parse_rep("sym(2, std(2)) (x) dual(std(2)) (+) triv").unwrap();
        assert_eq!(
            r,
            RepExpr::direct_sum(RepExpr::tensor(RepExpr::sym(2, std2()), RepExpr::dual(std2())), RepExpr::Triv)
        );
        for r in [r, RepExpr::sym(3, RepExpr::direct_sum(std2(), RepExpr::MatrixRep(2))), RepExpr::Triv] {
            assert_eq!(parse_rep(&r.to_string()).unwrap(), r);
        }
        let err = parse_rep("sym(2, foo(2))").unwrap_err();
        assert_eq!(err.column, 8);
        assert!(err.token.starts_with("foo"));
        assert!(parse_rep("std(0)").is_err());
        assert!(parse_rep("std(2) (x)").is_err());
    }
}
