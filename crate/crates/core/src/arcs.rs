//! Square matrices over the Laurent field: arcs, their inverses, equivalence
//! modulo the valuation-ring group, and the Cartan–Iwahori factorisation
//! (Smith normal form over ℂ[[z]]).

use std::fmt;
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::GaussianRational;
use crate::laurent::{min_ord, LaurentSeries, DEFAULT_PRECISION};

#[derive(Clone)]
pub struct ArcMatrix {
    dim: usize,
    // row-major
    entries: Vec<LaurentSeries>,
    // relative precision used by `inverse`; not part of the value
    inverse_precision: u32,
    inverse_cache: Arc<OnceLock<ArcMatrix>>,
}

impl PartialEq for ArcMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.entries == other.entries
    }
}

impl Eq for ArcMatrix {}

impl std::hash::Hash for ArcMatrix {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.dim.hash(state);
        self.entries.hash(state);
    }
}

/// `input = u · diag(z^exponents) · v` with `u`, `v` in the valuation-ring group.
#[derive(Clone, Debug)]
pub struct SnfDecomposition {
    pub u: ArcMatrix,
    pub exponents: Vec<i64>,
    pub v: ArcMatrix,
}

/// Which product must land in the valuation-ring group for two arcs to be
/// equivalent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum EquivalenceConvention {
    /// `b ∘ a⁻¹ ∈ G(ℂ[[z]])`.
    #[default]
    LeftQuotient,
    /// `a ∘ b ∈ G(ℂ[[z]])`, the reading without an inverse.
    Literal,
}

impl ArcMatrix {
    pub fn from_rows(rows: Vec<Vec<LaurentSeries>>) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
            }
            entries.extend(row);
        }
        if dim == 0 {
            return Err(Error::InvalidInput("matrix of dimension 0".into()));
        }
        Ok(Self { dim, entries, inverse_precision: DEFAULT_PRECISION, inverse_cache: Default::default() })
    }

    /// As [`from_rows`](Self::from_rows), additionally checking that the
    /// determinant has finite valuation.
    pub fn arc(rows: Vec<Vec<LaurentSeries>>) -> Result<Self> {
        let a = Self::from_rows(rows)?;
        a.determinant()?.ord()?.ok_or(Error::SingularMatrix)?;
        Ok(a)
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(LaurentSeries::one(), dim)
    }

    pub fn scalar(s: LaurentSeries, dim: usize) -> Self {
        Self::diagonal(vec![s; dim])
    }

    pub fn diagonal(diag: Vec<LaurentSeries>) -> Self {
        let dim = diag.len();
        let mut entries = vec![LaurentSeries::zero(); dim * dim];
        for (i, d) in diag.into_iter().enumerate() {
            entries[i * dim + i] = d;
        }
        Self { dim, entries, inverse_precision: DEFAULT_PRECISION, inverse_cache: Default::default() }
    }

    /// The arc `diag(z^w_1, …, z^w_m)` of a one-parameter subgroup.
    pub fn from_cocharacter(weights: &[i64]) -> Self {
        Self::diagonal(weights.iter().map(|&w| LaurentSeries::z_pow(w)).collect())
    }

    /// Matrix with constant entries.
    pub fn constant(rows: Vec<Vec<GaussianRational>>) -> Result<Self> {
        Self::from_rows(rows.into_iter().map(|r| r.into_iter().map(LaurentSeries::constant).collect()).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> &LaurentSeries {
        &self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[LaurentSeries] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<LaurentSeries>> {
        self.entries.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let m = self.dim;
        let mut entries = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                let mut acc = LaurentSeries::zero();
                for k in 0..m {
                    let (a, b) = (self.entry(i, k), other.entry(k, j));
                    if a.is_exact_zero() || b.is_exact_zero() {
                        continue;
                    }
                    acc = acc.add(&a.mul(b));
                }
                entries.push(acc);
            }
        }
        Ok(Self {
            dim: m,
            entries,
            inverse_precision: self.inverse_precision.max(other.inverse_precision),
            inverse_cache: Default::default(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self {
            dim: self.dim,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a.sub(b)).collect(),
            inverse_precision: self.inverse_precision.max(other.inverse_precision),
            inverse_cache: Default::default(),
        })
    }

    pub fn map(&self, f: impl Fn(&LaurentSeries) -> LaurentSeries) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(f).collect(),
            inverse_precision: self.inverse_precision,
            inverse_cache: Default::default(),
        }
    }

    /// Equal to `other` modulo both precision windows.
    pub fn approx_eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.entries.iter().zip(&other.entries).all(|(a, b)| a.approx_eq(b))
    }

    /// Minimum order over the nonzero entries.
    pub fn min_entry_ord(&self) -> Result<i64> {
        min_ord(&self.entries)?.ok_or_else(|| Error::InvalidInput("zero matrix".into()))
    }

    /// Relative precision for elimination: `base + |min_entry_ord|·m`.
    pub fn working_precision(&self, base: u32) -> Result<u32> {
        let spread = self.min_entry_ord()?.unsigned_abs() as u32;
        Ok(base + spread * self.dim as u32)
    }

    /// Every entry has order ≥ 0.
    pub fn is_integral(&self) -> Result<bool> {
        for e in &self.entries {
            if e.is_exact_zero() {
                continue;
            }
            match e.lead() {
                Some(l) if l < 0 => return Ok(false),
                Some(_) => {}
                None => {
                    // vanishing to z^p: ord ≥ p
                    let p = e.abs_precision().unwrap();
                    if p < 0 {
                        return Err(Error::PrecisionExhausted(format!("entry known only modulo z^{p}")));
                    }
                }
            }
        }
        Ok(true)
    }

    /// Membership in the valuation-ring group: integral with integral inverse.
    pub fn is_integral_unit(&self) -> Result<bool> {
        if !self.is_integral()? {
            return Ok(false);
        }
        self.inverse()?.is_integral()
    }

    pub fn determinant(&self) -> Result<LaurentSeries> {
        let m = self.dim;
        if m <= MINOR_EXPANSION_MAX {
            let all: Vec<usize> = (0..m).collect();
            return Ok(minor(&self.rows(), &all, &all));
        }
        let prec = self.working_precision(DEFAULT_PRECISION)?;
        let m = self.dim;
        let mut a = self.rows();
        let mut det = LaurentSeries::one();
        for k in 0..m {
            let Some(r) = pivot_row(&a, k) else {
                return Ok(if a[k..].iter().all(|row| row[k].is_exact_zero()) {
                    LaurentSeries::zero()
                } else {
                    // vanishing to known precision, not certifiably zero
                    a[k..].iter().map(|row| row[k].clone()).find(|s| !s.is_exact_zero()).unwrap()
                });
            };
            if r != k {
                a.swap(r, k);
                det = det.neg();
            }
            let piv = a[k][k].clone();
            det = det.mul(&piv);
            let inv = piv.invert_with_precision(prec)?;
            for i in k + 1..m {
                if a[i][k].is_exact_zero() {
                    continue;
                }
                let c = a[i][k].mul(&inv);
                for j in k + 1..m {
                    let t = c.mul(&a[k][j]);
                    a[i][j] = a[i][j].sub(&t);
                }
                a[i][k] = LaurentSeries::zero();
            }
        }
        Ok(det)
    }

    /// Relative precision `inverse` and `snf` work to; defaults to
    /// [`DEFAULT_PRECISION`].
    pub fn with_inverse_precision(mut self, base: u32) -> Self {
        if base != self.inverse_precision {
            self.inverse_precision = base;
            self.inverse_cache = Default::default();
        }
        self
    }

    pub fn inverse_precision(&self) -> u32 {
        self.inverse_precision
    }

    /// Inverse at the configured working precision.
    pub fn inverse(&self) -> Result<Self> {
        if let Some(inv) = self.inverse_cache.get() {
            return Ok(inv.clone());
        }
        let inv = self.inverse_with_precision(self.inverse_precision)?;
        Ok(self.inverse_cache.get_or_init(|| inv).clone())
    }

    /// Gauss–Jordan elimination on `[A | I]`, pivoting on the entry of least
    /// valuation in each column. Pivot rows are scaled by the pivot's inverse
    /// series, so entries stay within the working precision.
    pub fn inverse_with_precision(&self, base: u32) -> Result<Self> {
        let prec = self.working_precision(base)?;
        let m = self.dim;
        if m <= MINOR_EXPANSION_MAX {
            return self.adjugate_inverse(prec);
        }
        let mut a = self.rows();
        let mut b = Self::identity(m).rows();
        for k in 0..m {
            let r = pivot_row(&a, k).ok_or(Error::SingularMatrix)?;
            a.swap(r, k);
            b.swap(r, k);
            let d = a[k][k].invert_with_precision(prec)?;
            for j in 0..m {
                a[k][j] = a[k][j].mul(&d);
                b[k][j] = b[k][j].mul(&d);
            }
            for i in 0..m {
                if i == k || a[i][k].is_exact_zero() {
                    continue;
                }
                let f = a[i][k].clone();
                for j in 0..m {
                    a[i][j] = a[i][j].sub(&f.mul(&a[k][j]));
                    b[i][j] = b[i][j].sub(&f.mul(&b[k][j]));
                }
                a[i][k] = LaurentSeries::zero();
            }
        }
        Ok(Self::from_rows(b)?.with_inverse_precision(self.inverse_precision))
    }

    /// adj(A)/det A; the cofactors are exact whenever the entries are.
    fn adjugate_inverse(&self, prec: u32) -> Result<Self> {
        let m = self.dim;
        let a = self.rows();
        let all: Vec<usize> = (0..m).collect();
        let det = minor(&a, &all, &all);
        if det.lead().is_none() {
            return Err(Error::SingularMatrix);
        }
        let d = det.invert_with_precision(prec)?;
        let mut b = vec![vec![LaurentSeries::zero(); m]; m];
        for i in 0..m {
            let rows: Vec<usize> = (0..m).filter(|&r| r != i).collect();
            for j in 0..m {
                let cols: Vec<usize> = (0..m).filter(|&c| c != j).collect();
                let c = minor(&a, &rows, &cols).mul(&d);
                b[j][i] = if (i + j) % 2 == 0 { c } else { c.neg() };
            }
        }
        Ok(Self::from_rows(b)?.with_inverse_precision(self.inverse_precision))
    }

    /// Cartan–Iwahori factorisation by valuation-pivot elimination. Pivots
    /// are the entries of least valuation in the remaining block, ties broken
    /// by smallest (row, column).
    pub fn snf(&self) -> Result<SnfDecomposition> {
        self.snf_with_precision(self.inverse_precision)
    }

    pub fn snf_with_precision(&self, base: u32) -> Result<SnfDecomposition> {
        let prec = self.working_precision(base)?;
        let m = self.dim;
        let mut a = self.rows();
        // self = u · a · v throughout
        let mut u = Self::identity(m).rows();
        let mut v = Self::identity(m).rows();
        let mut exponents = Vec::with_capacity(m);
        for k in 0..m {
            let (pi, pj, e) = snf_pivot(&a, k)?;
            a.swap(k, pi);
            for row in u.iter_mut() {
                row.swap(k, pi);
            }
            for row in a.iter_mut() {
                row.swap(k, pj);
            }
            v.swap(k, pj);

            let piv_inv = a[k][k].invert_with_precision(prec)?;
            for i in k + 1..m {
                if a[i][k].is_exact_zero() {
                    continue;
                }
                let c = a[i][k].mul(&piv_inv);
                for j in k + 1..m {
                    let t = c.mul(&a[k][j]);
                    a[i][j] = a[i][j].sub(&t);
                }
                a[i][k] = LaurentSeries::zero();
                // u ← u·(I + c e_i e_kᵀ)
                for row in u.iter_mut() {
                    let t = c.mul(&row[i]);
                    row[k] = row[k].add(&t);
                }
            }
            for j in k + 1..m {
                if a[k][j].is_exact_zero() {
                    continue;
                }
                let c = a[k][j].mul(&piv_inv);
                a[k][j] = LaurentSeries::zero();
                // v ← (I + c e_k e_jᵀ)·v
                let (head, tail) = v.split_at_mut(j);
                for (x, y) in head[k].iter_mut().zip(&tail[0]) {
                    *x = x.add(&c.mul(y));
                }
            }
            // a[k][k] = z^e · unit; move the unit into u
            let unit = a[k][k].shift(-e);
            for row in u.iter_mut() {
                row[k] = row[k].mul(&unit);
            }
            a[k][k] = LaurentSeries::z_pow(e);
            exponents.push(e);
        }
        Ok(SnfDecomposition { u: Self::from_rows(u)?, exponents, v: Self::from_rows(v)? })
    }

    /// Entrywise evaluation at `z`.
    pub fn eval(&self, z: Complex64) -> Result<DMatrix<Complex64>> {
        let vals = self.entries.iter().map(|e| e.eval(z)).collect::<Result<Vec<_>>>()?;
        Ok(DMatrix::from_row_slice(self.dim, self.dim, &vals))
    }

    pub fn commutes_with(&self, other: &Self) -> Result<bool> {
        Ok(self.compose(other)?.approx_eq(&other.compose(self)?))
    }
}

/// Largest dimension for which determinants and inverses expand minors
/// instead of eliminating.
const MINOR_EXPANSION_MAX: usize = 6;

/// Determinant of the submatrix on `rows` × `cols` by expansion along the
/// last row, with the minors on each column subset computed once.
fn minor(a: &[Vec<LaurentSeries>], rows: &[usize], cols: &[usize]) -> LaurentSeries {
    let k = cols.len();
    let mut dets = vec![LaurentSeries::zero(); 1 << k];
    dets[0] = LaurentSeries::one();
    for mask in 1usize..1 << k {
        let row = &a[rows[mask.count_ones() as usize - 1]];
        let mut acc = LaurentSeries::zero();
        for j in 0..k {
            if mask >> j & 1 == 0 || row[cols[j]].is_exact_zero() || dets[mask ^ 1 << j].is_exact_zero() {
                continue;
            }
            let t = row[cols[j]].mul(&dets[mask ^ 1 << j]);
            acc = if (mask >> (j + 1)).count_ones() % 2 == 0 { acc.add(&t) } else { acc.sub(&t) };
        }
        dets[mask] = acc;
    }
    dets.pop().unwrap()
}

/// Row in `k..` whose entry in column `k` is certified nonzero with least
/// valuation; ties go to the smallest row.
fn pivot_row(a: &[Vec<LaurentSeries>], k: usize) -> Option<usize> {
    let mut best: Option<(i64, usize)> = None;
    for (i, row) in a.iter().enumerate().skip(k) {
        if let Some(l) = row[k].lead() {
            if best.is_none_or(|(b, _)| l < b) {
                best = Some((l, i));
            }
        }
    }
    best.map(|(_, i)| i)
}

fn snf_pivot(a: &[Vec<LaurentSeries>], k: usize) -> Result<(usize, usize, i64)> {
    let block: Vec<&LaurentSeries> = a.iter().skip(k).flat_map(|row| row.iter().skip(k)).collect();
    let e = min_ord(block.iter().copied())?.ok_or(Error::SingularMatrix)?;
    for (i, row) in a.iter().enumerate().skip(k) {
        for (j, x) in row.iter().enumerate().skip(k) {
            if x.lead() == Some(e) {
                return Ok((i, j, e));
            }
        }
    }
    unreachable!("certified minimum is attained")
}

/// Whether `a` and `b` define the same model, i.e. differ by an element of
/// the valuation-ring group under `convention`.
pub fn is_equivalent(a: &ArcMatrix, b: &ArcMatrix, convention: EquivalenceConvention) -> Result<bool> {
    let q = match convention {
        EquivalenceConvention::LeftQuotient => b.compose(&a.inverse()?)?,
        EquivalenceConvention::Literal => a.compose(b)?,
    };
    q.is_integral_unit()
}

impl fmt::Display for ArcMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, row) in self.entries.chunks(self.dim).enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str("[")?;
            for (j, x) in row.iter().enumerate() {
                if j > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{x}")?;
            }
            f.write_str("]")?;
        }
        f.write_str("]")
    }
}

impl fmt::Debug for ArcMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::literal::parse_series;

    fn m(rows: &[&[&str]]) -> ArcMatrix {
        ArcMatrix::from_rows(rows.iter().map(|r| r.iter().map(|s| parse_series(s).unwrap()).collect()).collect())
            .unwrap()
    }

    fn unipotent() -> ArcMatrix {
        m(&[&["1", "z^-1"], &["0", "1"]])
    }

    #[test]
    fn compose_examples() {
        let a = ArcMatrix::from_cocharacter(&[1, -1]);
        let b = ArcMatrix::from_cocharacter(&[-1, 1]);
        assert_eq!(a.compose(&b).unwrap(), ArcMatrix::identity(2));
        assert_eq!(unipotent().compose(&ArcMatrix::identity(2)).unwrap(), unipotent());
        assert_eq!(unipotent().compose(&unipotent()).unwrap(), m(&[&["1", "2*z^-1"], &["0", "1"]]));
        assert!(matches!(a.compose(&ArcMatrix::identity(3)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn inverse_examples() {
        let d = ArcMatrix::from_cocharacter(&[2, -1]);
        assert_eq!(d.inverse().unwrap(), ArcMatrix::from_cocharacter(&[-2, 1]));
        assert_eq!(unipotent().inverse().unwrap(), m(&[&["1", "-z^-1"], &["0", "1"]]));
        assert_eq!(ArcMatrix::identity(3).inverse().unwrap(), ArcMatrix::identity(3));
    }

    #[test]
    fn inverse_of_dense_arc() {
        let a = m(&[&["1+z", "z^-1", "2"], &["3*z^2", "1-z", "z^-2"], &["1", "0", "1+z^3"]]);
        let inv = a.inverse().unwrap();
        assert!(a.compose(&inv).unwrap().approx_eq(&ArcMatrix::identity(3)));
        assert!(inv.compose(&a).unwrap().approx_eq(&ArcMatrix::identity(3)));
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = m(&[&["1", "z"], &["z^-1", "1"]]);
        assert_eq!(a.inverse(), Err(Error::SingularMatrix));
        assert_eq!(ArcMatrix::arc(a.rows()), Err(Error::SingularMatrix));
    }

    #[test]
    fn cocharacter_examples() {
        assert_eq!(ArcMatrix::from_cocharacter(&[0, 0, 0]), ArcMatrix::identity(3));
        assert_eq!(ArcMatrix::from_cocharacter(&[1, -1]), m(&[&["z", "0"], &["0", "z^-1"]]));
        assert_eq!(ArcMatrix::from_cocharacter(&[2, 2]), ArcMatrix::scalar(LaurentSeries::z_pow(2), 2));
    }

    #[test]
    fn snf_examples() {
        let d = ArcMatrix::from_cocharacter(&[2, -1]).snf().unwrap();
        assert_eq!(d.exponents, vec![-1, 2]);
        let s = unipotent().snf().unwrap();
        assert_eq!(s.exponents, vec![-1, 1]);
        let id = ArcMatrix::identity(3).snf().unwrap();
        assert_eq!(id.exponents, vec![0, 0, 0]);
        assert_eq!(id.u, ArcMatrix::identity(3));
        assert_eq!(id.v, ArcMatrix::identity(3));
    }

    #[test]
    fn snf_reconstructs_input() {
        let a = m(&[&["1+z", "z^-1", "2"], &["3*z^2", "1-z", "z^-2"], &["1", "0", "1+z^3"]]);
        let s = a.snf().unwrap();
        let d = ArcMatrix::from_cocharacter(&s.exponents);
        let back = s.u.compose(&d).unwrap().compose(&s.v).unwrap();
        assert!(back.approx_eq(&a));
        assert!(s.u.is_integral_unit().unwrap());
        assert!(s.v.is_integral_unit().unwrap());
        let det = a.determinant().unwrap().ord().unwrap().unwrap();
        assert_eq!(s.exponents.iter().sum::<i64>(), det);
    }

    #[test]
    fn min_entry_ord_examples() {
        assert_eq!(unipotent().min_entry_ord(), Ok(-1));
        assert_eq!(ArcMatrix::identity(2).min_entry_ord(), Ok(0));
        assert_eq!(ArcMatrix::scalar(LaurentSeries::z_pow(3), 2).min_entry_ord(), Ok(3));
    }

    #[test]
    fn equivalence_examples() {
        let conv = EquivalenceConvention::LeftQuotient;
        assert!(is_equivalent(&unipotent(), &unipotent(), conv).unwrap());
        let id = ArcMatrix::identity(2);
        assert!(is_equivalent(&id, &m(&[&["1", "z"], &["0", "1"]]), conv).unwrap());
        assert!(!is_equivalent(&id, &ArcMatrix::from_cocharacter(&[1, 0]), conv).unwrap());
    }

    #[test]
    fn literal_convention_differs_from_left_quotient() {
        let a = ArcMatrix::from_cocharacter(&[1, 0]);
        // a·a⁻¹ is the identity, but a·a is not integral-invertible
        assert!(is_equivalent(&a, &a, EquivalenceConvention::LeftQuotient).unwrap());
        assert!(!is_equivalent(&a, &a, EquivalenceConvention::Literal).unwrap());
        let b = ArcMatrix::from_cocharacter(&[-1, 0]);
        assert!(is_equivalent(&a, &b, EquivalenceConvention::Literal).unwrap());
    }

    #[test]
    fn determinant_of_unipotent_is_one() {
        assert!(unipotent().determinant().unwrap().approx_eq(&LaurentSeries::one()));
    }
}
