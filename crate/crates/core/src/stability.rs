//! Weights of arcs on pairs, norms, torus twists and the numerical
//! stability checks built from them.
//!
//! For an arc ρ and a pair (v, w), write m_v = −min ord(ρ.v) and
//! m_w = −min ord(ρ.w). The weight is ν = m_v − m_w. The norm is the slope
//! of `deg V · log|g| − log|g.v|`, i.e. `deg V · m_e − m_v` with
//! m_e = −min ord of the entries of ρ.

use std::fmt;

use num_traits::{Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arcs::ArcMatrix;
use crate::error::{Error, Result};
use crate::laurent::{min_ord, LaurentSeries};
use crate::lp::{rat, LinearProgram, LpOutcome, Rational, Relation};
use crate::parallel::{try_par_map, Execution};
use crate::repr::{act, dot, Coordinates, RepExpr, RepVector, TorusData, MAX_POLYTOPE_RANK};

/// A point (v, w) of V ⊕ W with both components nonzero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pair {
    v: RepVector,
    w: RepVector,
    deg_v: Option<u32>,
}

impl Pair {
    /// Builds the pair; `deg V` is computed when V has nonnegative weights.
    pub fn new(v: RepVector, w: RepVector) -> Result<Self> {
        let deg_v = match v.rep().deg() {
            Ok(d) => Some(d),
            Err(Error::UnnormalizableWeights(_)) => None,
            Err(e) => return Err(e),
        };
        Self::build(v, w, deg_v)
    }

    pub fn with_degree(v: RepVector, w: RepVector, deg_v: u32) -> Result<Self> {
        if deg_v == 0 {
            return Err(Error::InvalidInput("deg V must be positive".into()));
        }
        Self::build(v, w, Some(deg_v))
    }

    fn build(v: RepVector, w: RepVector, deg_v: Option<u32>) -> Result<Self> {
        if v.is_zero() || w.is_zero() {
            return Err(Error::InvalidInput("both components of a pair must be nonzero".into()));
        }
        let dv = v.rep().ambient_dim()?;
        let dw = w.rep().ambient_dim()?;
        if let (Some(a), Some(b)) = (dv, dw) {
            if a != b {
                return Err(Error::DimensionMismatch { expected: a, found: b });
            }
        }
        Ok(Self { v, w, deg_v })
    }

    pub fn v(&self) -> &RepVector {
        &self.v
    }

    pub fn w(&self) -> &RepVector {
        &self.w
    }

    pub fn deg_v(&self) -> Result<u32> {
        self.deg_v
            .ok_or_else(|| Error::UnnormalizableWeights(format!("{} has negative diagonal weights", self.v.rep())))
    }

    /// Ambient group dimension, if any non-trivial leaf fixes it.
    pub fn group_dim(&self) -> Option<usize> {
        self.v.rep().ambient_dim().ok().flatten().or(self.w.rep().ambient_dim().ok().flatten())
    }

    /// (w, v), with deg taken from W where possible.
    pub fn swapped(&self) -> Result<Self> {
        Self::new(self.w.clone(), self.v.clone())
    }

    fn check_arc(&self, rho: &ArcMatrix) -> Result<()> {
        match self.group_dim() {
            Some(m) if m != rho.dim() => Err(Error::DimensionMismatch { expected: m, found: rho.dim() }),
            _ => Ok(()),
        }
    }
}

/// −min ord over the coordinates of an arc-translated nonzero vector.
fn pole_order(coords: &Coordinates<LaurentSeries>) -> Result<i64> {
    match min_ord(coords.values())? {
        Some(o) => Ok(-o),
        None => Err(Error::Domain("arc sent a nonzero vector to zero".into())),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WeightParts {
    pub nu: i64,
    pub m_v: i64,
    pub m_w: i64,
}

pub fn weight_parts(rho: &ArcMatrix, p: &Pair) -> Result<WeightParts> {
    p.check_arc(rho)?;
    let m_v = pole_order(&act(rho, &p.v)?)?;
    let m_w = pole_order(&act(rho, &p.w)?)?;
    Ok(WeightParts { nu: m_v - m_w, m_v, m_w })
}

/// ν(ρ, [v, w]) = min ord(ρ.w) − min ord(ρ.v).
pub fn weight(rho: &ArcMatrix, p: &Pair) -> Result<i64> {
    Ok(weight_parts(rho, p)?.nu)
}

/// The degree m with z^m·c integral and nonzero at z = 0, i.e. the order of
/// the pole of the limit point of [c] in projective space.
pub fn specialization_degree(coords: &Coordinates<LaurentSeries>) -> Result<i64> {
    let lowest = coords.values().filter_map(|s| s.lead()).min();
    let Some(lowest) = lowest else {
        return Err(Error::PrecisionExhausted("no coordinate has a known nonzero coefficient".into()));
    };
    let m = -lowest;
    let mut limit_nonzero = false;
    for s in coords.values() {
        let shifted = s.shift(m);
        if let Some(b) = shifted.abs_precision() {
            if b <= 0 && !s.is_exact_zero() {
                return Err(Error::PrecisionExhausted(format!("a coordinate is only known modulo z^{}", b - m)));
            }
        }
        match shifted.coeff(0) {
            Some(c) if !c.is_zero() => limit_nonzero = true,
            _ => {}
        }
    }
    debug_assert!(limit_nonzero);
    Ok(m)
}

/// ν computed as the difference of the two specialization degrees.
pub fn weight_via_specialization(rho: &ArcMatrix, p: &Pair) -> Result<i64> {
    p.check_arc(rho)?;
    let m_v = specialization_degree(&act(rho, &p.v)?)?;
    let m_w = specialization_degree(&act(rho, &p.w)?)?;
    Ok(m_v - m_w)
}

/// Which slot the matrix factor occupies when a norm is read as a weight.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum SlotOrder {
    /// `deg V · m_e − m_v`, the slope of `deg V · log|g| − log|g.v|`.
    #[default]
    Analytic,
    /// ν(ρ, [v, e^{⊗deg V}]) read literally, which is the negative.
    Paper,
}

impl fmt::Display for SlotOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SlotOrder::Analytic => "analytic",
            SlotOrder::Paper => "paper",
        })
    }
}

impl std::str::FromStr for SlotOrder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(SlotOrder::Analytic),
            "paper" => Ok(SlotOrder::Paper),
            _ => Err(Error::InvalidInput(format!("unknown slot order `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NormParts {
    pub deg_v: u32,
    pub m_e: i64,
    pub m_v: i64,
}

impl NormParts {
    pub fn value(&self, order: SlotOrder) -> i64 {
        let n = self.deg_v as i64 * self.m_e - self.m_v;
        match order {
            SlotOrder::Analytic => n,
            SlotOrder::Paper => -n,
        }
    }
}

pub fn norm_parts(rho: &ArcMatrix, p: &Pair) -> Result<NormParts> {
    p.check_arc(rho)?;
    let deg_v = p.deg_v()?;
    let m_e = -rho.min_entry_ord()?;
    let m_v = pole_order(&act(rho, &p.v)?)?;
    Ok(NormParts { deg_v, m_e, m_v })
}

pub fn norm(rho: &ArcMatrix, p: &Pair, order: SlotOrder) -> Result<i64> {
    Ok(norm_parts(rho, p)?.value(order))
}

/// One linear piece: a torus weight and the least order among the
/// coordinates carrying it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub weight: Vec<i64>,
    pub ord: i64,
}

/// The data entering twisted weights and twisted norms of one arc.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistProfile {
    pub rank: usize,
    pub deg_v: Option<u32>,
    /// Entries of ρ, i.e. the coordinates of ρ.e in the matrix representation.
    pub entries: Vec<Piece>,
    pub v: Vec<Piece>,
    pub w: Vec<Piece>,
}

/// Errors unless every nonzero entry ρ_ij joins basis vectors of equal torus weight.
pub fn check_commutes(rho: &ArcMatrix, t: &TorusData) -> Result<()> {
    let m = rho.dim();
    if t.group_dim() != m {
        return Err(Error::DimensionMismatch { expected: m, found: t.group_dim() });
    }
    for i in 0..m {
        for j in 0..m {
            if !rho.entry(i, j).is_exact_zero() && t.ambient[i] != t.ambient[j] {
                return Err(Error::NonCommutingTorus);
            }
        }
    }
    Ok(())
}

fn pieces<'a>(items: impl Iterator<Item = (Vec<i64>, &'a LaurentSeries)>) -> Result<Vec<Piece>> {
    let mut groups: std::collections::BTreeMap<Vec<i64>, Vec<&LaurentSeries>> = Default::default();
    for (w, s) in items {
        if !s.is_exact_zero() {
            groups.entry(w).or_default().push(s);
        }
    }
    let mut out = Vec::with_capacity(groups.len());
    for (weight, series) in groups {
        match min_ord(series)? {
            Some(ord) => out.push(Piece { weight, ord }),
            None => continue,
        }
    }
    Ok(out)
}

impl TwistProfile {
    pub fn new(rho: &ArcMatrix, p: &Pair, t: &TorusData) -> Result<Self> {
        p.check_arc(rho)?;
        check_commutes(rho, t)?;
        let m = rho.dim();
        let entries = pieces((0..m * m).map(|idx| (t.ambient[idx / m].clone(), rho.entry(idx / m, idx % m))))?;
        let side = |vec: &RepVector| -> Result<Vec<Piece>> {
            let weights = vec.rep().basis_weights(&t.ambient);
            let coords = act(rho, vec)?;
            let ps = pieces(coords.iter().map(|(i, s)| (weights[*i].clone(), s)))?;
            if ps.is_empty() {
                return Err(Error::Domain("arc sent a nonzero vector to zero".into()));
            }
            Ok(ps)
        };
        Ok(Self { rank: t.rank, deg_v: p.deg_v, entries, v: side(&p.v)?, w: side(&p.w)? })
    }

    fn deg(&self) -> Result<Rational> {
        self.deg_v.map(|d| rat(d as i64)).ok_or_else(|| Error::UnnormalizableWeights("deg V is undefined".into()))
    }

    fn check_xi(&self, len: usize) -> Result<()> {
        if len != self.rank {
            return Err(Error::DimensionMismatch { expected: self.rank, found: len });
        }
        Ok(())
    }

    /// min_i(ord b_i + ⟨χ_i, ξ⟩) − min_i(ord a_i + ⟨χ_i, ξ⟩).
    pub fn twisted_weight(&self, xi: &[Rational]) -> Result<Rational> {
        self.check_xi(xi.len())?;
        Ok(min_shifted(&self.w, xi) - min_shifted(&self.v, xi))
    }

    pub fn twisted_weight_real(&self, xi: &[f64]) -> Result<f64> {
        self.check_xi(xi.len())?;
        Ok(min_shifted_f64(&self.w, xi) - min_shifted_f64(&self.v, xi))
    }

    /// N(ξ) = deg V · max_j(−ord e_j − ⟨μ_j, ξ⟩) − max_i(−ord a_i − ⟨λ_i, ξ⟩).
    pub fn twisted_norm(&self, xi: &[Rational]) -> Result<Rational> {
        self.check_xi(xi.len())?;
        Ok(self.deg()? * -min_shifted(&self.entries, xi) + min_shifted(&self.v, xi))
    }

    pub fn twisted_norm_real(&self, xi: &[f64]) -> Result<f64> {
        self.check_xi(xi.len())?;
        let d = self.deg()?.to_f64().unwrap_or(f64::NAN);
        Ok(-d * min_shifted_f64(&self.entries, xi) + min_shifted_f64(&self.v, xi))
    }

    /// Growth rate of N along the ray through η.
    pub fn recession(&self, eta: &[Rational]) -> Result<Rational> {
        self.check_xi(eta.len())?;
        let d = self.deg()?;
        let me = self.entries.iter().map(|p| -pair_q(&p.weight, eta)).max().unwrap_or_default();
        let mv = self.v.iter().map(|p| -pair_q(&p.weight, eta)).max().unwrap_or_default();
        Ok(d * me - mv)
    }

    fn recession_f64(&self, eta: &[f64]) -> f64 {
        let d = self.deg_v.unwrap_or(0) as f64;
        let me = self.entries.iter().map(|p| -pair_f(&p.weight, eta)).fold(f64::NEG_INFINITY, f64::max);
        let mv = self.v.iter().map(|p| -pair_f(&p.weight, eta)).fold(f64::NEG_INFINITY, f64::max);
        d * me - mv
    }

    /// Decides whether N is proper, i.e. its recession function is
    /// positive off the origin. Exact up to rank [`MAX_POLYTOPE_RANK`],
    /// sampled above it.
    pub fn properness(&self) -> Result<Properness> {
        let d = self.deg()?;
        let r = self.rank;
        if r == 0 {
            return Ok(Properness { proper: true, certified: true, witness: None });
        }
        if r > MAX_POLYTOPE_RANK {
            return Ok(self.sampled_properness());
        }
        // min over each piece i and orthant s of
        //   d·t + ⟨λ_i, η⟩,  t ≥ −⟨μ_j, η⟩,  s_k η_k ≥ 0,  Σ s_k η_k = 1
        for piece in &self.v {
            for signs in 0..(1u32 << r) {
                let sign = |k: usize| if signs >> k & 1 == 1 { rat(-1) } else { rat(1) };
                let mut obj: Vec<Rational> = piece.weight.iter().map(|&x| rat(x)).collect();
                obj.push(d.clone());
                let mut lp = LinearProgram::new(r + 1).minimize(obj);
                for e in &self.entries {
                    let mut row: Vec<Rational> = e.weight.iter().map(|&x| rat(x)).collect();
                    row.push(rat(1));
                    lp.constrain(row, Relation::Ge, rat(0));
                }
                for k in 0..r {
                    let mut row = vec![rat(0); r + 1];
                    row[k] = sign(k);
                    lp.constrain(row, Relation::Ge, rat(0));
                }
                let mut row: Vec<Rational> = (0..r).map(sign).collect();
                row.push(rat(0));
                lp.constrain(row, Relation::Eq, rat(1));
                match lp.solve() {
                    LpOutcome::Optimal { value, point } if !value.is_positive() => {
                        return Ok(Properness { proper: false, certified: true, witness: Some(point[..r].to_vec()) });
                    }
                    LpOutcome::Optimal { .. } => {}
                    LpOutcome::Infeasible => unreachable!("the orthant slice is never empty"),
                    LpOutcome::Unbounded { .. } => {
                        unreachable!("t is bounded below on a compact slice")
                    }
                }
            }
        }
        Ok(Properness { proper: true, certified: true, witness: None })
    }

    fn sampled_properness(&self) -> Properness {
        let r = self.rank;
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut rays: Vec<Vec<f64>> = Vec::new();
        for k in 0..r {
            for s in [1.0, -1.0] {
                let mut e = vec![0.0; r];
                e[k] = s;
                rays.push(e);
            }
        }
        for _ in 0..4096 {
            rays.push((0..r).map(|_| rng.gen_range(-1.0..1.0)).collect());
        }
        for eta in rays {
            if self.recession_f64(&eta) <= 1e-12 {
                let witness = eta.iter().map(|&x| Rational::from_float(x).unwrap_or_default()).collect();
                return Properness { proper: false, certified: false, witness: Some(witness) };
            }
        }
        Properness { proper: true, certified: false, witness: None }
    }

    /// Exact infimum of N over ℝ^r.
    ///
    /// N is the minimum over the pieces i of the convex functions
    /// `deg V · T(ξ) + ord a_i + ⟨λ_i, ξ⟩`, so the infimum is the least of one
    /// LP per piece. A bounded polyhedral minimum is always attained.
    pub fn reduced_norm(&self) -> Result<ReducedNorm> {
        let d = self.deg()?;
        let r = self.rank;
        let properness = self.properness()?;
        let mut best: Option<(Rational, Vec<Rational>)> = None;
        for piece in &self.v {
            let mut obj: Vec<Rational> = piece.weight.iter().map(|&x| rat(x)).collect();
            obj.push(d.clone());
            let mut lp = LinearProgram::new(r + 1).minimize(obj);
            for e in &self.entries {
                let mut row: Vec<Rational> = e.weight.iter().map(|&x| rat(x)).collect();
                row.push(rat(1));
                lp.constrain(row, Relation::Ge, rat(-e.ord));
            }
            match lp.solve() {
                LpOutcome::Optimal { value, point } => {
                    let value = value + rat(piece.ord);
                    if best.as_ref().is_none_or(|(b, _)| value < *b) {
                        best = Some((value, point[..r].to_vec()));
                    }
                }
                LpOutcome::Unbounded { direction } => {
                    return Err(Error::NotProper { direction: direction[..r].iter().map(|x| x.to_string()).collect() });
                }
                LpOutcome::Infeasible => unreachable!("t can always be taken large"),
            }
        }
        let (value, minimizer) = best.expect("a pair has at least one V-piece");
        Ok(ReducedNorm { value, minimizer, attained: true, properness })
    }
}

fn pair_q(weight: &[i64], xi: &[Rational]) -> Rational {
    weight.iter().zip(xi).map(|(&a, x)| rat(a) * x).sum()
}

fn pair_f(weight: &[i64], xi: &[f64]) -> f64 {
    weight.iter().zip(xi).map(|(&a, x)| a as f64 * x).sum()
}

fn min_shifted(pieces: &[Piece], xi: &[Rational]) -> Rational {
    pieces.iter().map(|p| rat(p.ord) + pair_q(&p.weight, xi)).min().expect("nonempty piece list")
}

fn min_shifted_f64(pieces: &[Piece], xi: &[f64]) -> f64 {
    pieces.iter().map(|p| p.ord as f64 + pair_f(&p.weight, xi)).fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Properness {
    pub proper: bool,
    /// False when decided by sampling rays rather than by exact LPs.
    pub certified: bool,
    /// A direction along which N does not grow, when not proper.
    pub witness: Option<Vec<Rational>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedNorm {
    pub value: Rational,
    pub minimizer: Vec<Rational>,
    pub attained: bool,
    pub properness: Properness,
}

pub fn twisted_weight(rho: &ArcMatrix, xi: &[Rational], p: &Pair, t: &TorusData) -> Result<Rational> {
    TwistProfile::new(rho, p, t)?.twisted_weight(xi)
}

pub fn twisted_norm(rho: &ArcMatrix, xi: &[Rational], p: &Pair, t: &TorusData) -> Result<Rational> {
    TwistProfile::new(rho, p, t)?.twisted_norm(xi)
}

pub fn reduced_norm(rho: &ArcMatrix, p: &Pair, t: &TorusData) -> Result<ReducedNorm> {
    TwistProfile::new(rho, p, t)?.reduced_norm()
}

pub fn is_proper(rho: &ArcMatrix, p: &Pair, t: &TorusData) -> Result<Properness> {
    TwistProfile::new(rho, p, t)?.properness()
}

/// The arc twisted by the integral cocharacter ξ of `t`.
pub fn twisted_arc(rho: &ArcMatrix, xi: &[i64], t: &TorusData) -> Result<ArcMatrix> {
    if xi.len() != t.rank {
        return Err(Error::DimensionMismatch { expected: t.rank, found: xi.len() });
    }
    rho.compose(&t.cocharacter(xi))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedArc {
    pub name: String,
    pub arc: ArcMatrix,
}

impl NamedArc {
    pub fn new(name: impl Into<String>, arc: ArcMatrix) -> Self {
        Self { name: name.into(), arc }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CheckKind {
    Semistable,
    Stable,
    Polystable,
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckKind::Semistable => "semistable",
            CheckKind::Stable => "stable",
            CheckKind::Polystable => "polystable",
        })
    }
}

/// The outcome of testing finitely many arcs. Absence of a violation
/// among the supplied arcs says nothing about the arcs not supplied.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    NoViolationFound,
    Destabilized { arc: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArcRecord {
    pub arc: String,
    pub weight: i64,
    pub m_v: i64,
    pub m_w: i64,
    pub norm: Option<i64>,
    pub reduced_norm: Option<Rational>,
    pub minimizer: Option<Vec<Rational>>,
    /// The right-hand side the weight is compared against.
    pub threshold: Rational,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilityReport {
    pub kind: CheckKind,
    pub epsilon: Option<Rational>,
    pub slot_order: SlotOrder,
    pub records: Vec<ArcRecord>,
    pub verdict: Verdict,
}

impl StabilityReport {
    fn assemble(kind: CheckKind, epsilon: Option<Rational>, slot_order: SlotOrder, records: Vec<ArcRecord>) -> Self {
        let verdict = Self::verdict_of(&records);
        Self { kind, epsilon, slot_order, records, verdict }
    }

    /// The verdict implied by the records: the first failing arc, if any.
    pub fn verdict_of(records: &[ArcRecord]) -> Verdict {
        match records.iter().find(|r| !r.holds) {
            Some(r) => Verdict::Destabilized { arc: r.arc.clone() },
            None => Verdict::NoViolationFound,
        }
    }

    /// Whether every record and the verdict follow from the recorded numbers.
    pub fn is_consistent(&self) -> bool {
        self.records.iter().all(|r| (rat(r.weight) >= r.threshold) == r.holds)
            && self.verdict == Self::verdict_of(&self.records)
    }

    pub fn violated(&self) -> bool {
        self.verdict != Verdict::NoViolationFound
    }
}

/// ε = 1/(k+1).
pub fn epsilon_from_k(k: u32) -> Result<Rational> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    Ok(Rational::new(1.into(), (k as i64 + 1).into()))
}

fn base_record(a: &NamedArc, p: &Pair) -> Result<ArcRecord> {
    let wp = weight_parts(&a.arc, p)?;
    Ok(ArcRecord {
        arc: a.name.clone(),
        weight: wp.nu,
        m_v: wp.m_v,
        m_w: wp.m_w,
        norm: None,
        reduced_norm: None,
        minimizer: None,
        threshold: rat(0),
        holds: wp.nu >= 0,
    })
}

/// Tests ν(ρ, [v, w]) ≥ 0 on each supplied arc.
pub fn check_semistable(p: &Pair, arcs: &[NamedArc], exec: Execution) -> Result<StabilityReport> {
    let records = try_par_map(exec, arcs, |a| base_record(a, p))?;
    Ok(StabilityReport::assemble(CheckKind::Semistable, None, SlotOrder::Analytic, records))
}

/// Tests ν ≥ ε·‖ρ‖ on each supplied arc.
pub fn check_stable(
    p: &Pair,
    arcs: &[NamedArc],
    epsilon: &Rational,
    order: SlotOrder,
    exec: Execution,
) -> Result<StabilityReport> {
    let records = try_par_map(exec, arcs, |a| {
        let mut r = base_record(a, p)?;
        let n = norm(&a.arc, p, order)?;
        r.norm = Some(n);
        r.threshold = epsilon * rat(n);
        r.holds = rat(r.weight) >= r.threshold;
        Ok(r)
    })?;
    Ok(StabilityReport::assemble(CheckKind::Stable, Some(epsilon.clone()), order, records))
}

/// Tests ν ≥ ε·‖ρ‖_T on each supplied arc, with the reduced norm taken over
/// the torus `t`. Non-proper functionals are rejected unless `allow_improper`.
pub fn check_polystable(
    p: &Pair,
    arcs: &[NamedArc],
    epsilon: &Rational,
    t: &TorusData,
    allow_improper: bool,
    exec: Execution,
) -> Result<StabilityReport> {
    let records = try_par_map(exec, arcs, |a| {
        let mut r = base_record(a, p)?;
        let profile = TwistProfile::new(&a.arc, p, t)?;
        let red = profile.reduced_norm()?;
        if !red.properness.proper && !allow_improper {
            let dir = red.properness.witness.unwrap_or_default();
            return Err(Error::NotProper { direction: dir.iter().map(|x| x.to_string()).collect() });
        }
        r.norm = Some(norm(&a.arc, p, SlotOrder::Analytic)?);
        r.threshold = epsilon * &red.value;
        r.holds = rat(r.weight) >= r.threshold;
        r.reduced_norm = Some(red.value);
        r.minimizer = Some(red.minimizer);
        Ok(r)
    })?;
    Ok(StabilityReport::assemble(CheckKind::Polystable, Some(epsilon.clone()), SlotOrder::Analytic, records))
}

pub const DEFAULT_DIM_CAP: u128 = 1_000_000;

/// The identity element of the m×m matrix representation.
pub fn identity_vector(m: usize) -> RepVector {
    let one = crate::gaussian::GaussianRational::one();
    RepVector::from_pairs(RepExpr::MatrixRep(m), (0..m).map(|i| (i * m + i, one.clone()))).unwrap()
}

/// The pair whose weight tests stability at level k.
///
/// Paper order: [e^{⊗d} ⊗ v^{⊗k}, w^{⊗(k+1)}], weight (k+1)ν + N.
/// Analytic order: [v^{⊗(k+2)}, e^{⊗d} ⊗ w^{⊗(k+1)}], weight (k+1)ν − N.
/// Here d = deg V and N is the analytic norm.
pub fn augmented_pair(p: &Pair, k: u32, order: SlotOrder, dim_cap: u128) -> Result<Pair> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    let m =
        p.group_dim().ok_or_else(|| Error::InvalidInput("the group dimension is not determined by V or W".into()))?;
    let d = p.deg_v()?;
    let e = identity_vector(m).tensor_power(d);
    let (v2, w2) = match order {
        SlotOrder::Paper => (e.tensor(&p.v.tensor_power(k)), p.w.tensor_power(k + 1)),
        SlotOrder::Analytic => (p.v.tensor_power(k + 2), e.tensor(&p.w.tensor_power(k + 1))),
    };
    for r in [v2.rep(), w2.rep()] {
        let dim = r.dim_u128();
        if dim > dim_cap {
            return Err(Error::DimensionOverflow { dim, cap: dim_cap });
        }
    }
    Pair::new(v2, w2)
}

/// The weight the augmented pair must have: (k+1)ν ± N.
pub fn augmented_weight(nu: i64, norm_analytic: i64, k: u32, order: SlotOrder) -> i64 {
    let base = (k as i64 + 1) * nu;
    match order {
        SlotOrder::Paper => base + norm_analytic,
        SlotOrder::Analytic => base - norm_analytic,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanResult {
    pub box_size: u32,
    pub trace_zero: bool,
    pub count: usize,
    pub min_weight: i64,
    /// First minimizing cocharacter in lexicographic order.
    pub argmin: Vec<i64>,
}

/// Weight of the cocharacter arc `diag(z^λ)` from the diagonal weight tables.
pub fn cocharacter_weight(p: &Pair, lambda: &[i64]) -> i64 {
    let ambient = TorusData::diagonal(lambda.len()).ambient;
    let side = |vec: &RepVector| {
        let w = vec.rep().basis_weights(&ambient);
        vec.coords().keys().map(|&i| dot(&w[i], lambda)).min().expect("nonzero vector")
    };
    side(&p.w) - side(&p.v)
}

/// Minimum weight over the cocharacters λ ∈ ℤ^m with |λ_i| ≤ B, optionally
/// only those with Σλ_i = 0. A nonnegative minimum does not certify
/// semistability.
pub fn scan_1ps(p: &Pair, box_size: u32, trace_zero: bool, exec: Execution) -> Result<ScanResult> {
    if box_size == 0 {
        return Err(Error::InvalidInput("scan box must be at least 1".into()));
    }
    let m =
        p.group_dim().ok_or_else(|| Error::InvalidInput("the group dimension is not determined by V or W".into()))?;
    let b = box_size as i64;
    let mut lambdas: Vec<Vec<i64>> = vec![Vec::new()];
    for _ in 0..m {
        lambdas = lambdas
            .into_iter()
            .flat_map(|l| {
                (-b..=b).map(move |x| {
                    let mut l = l.clone();
                    l.push(x);
                    l
                })
            })
            .collect();
    }
    if trace_zero {
        lambdas.retain(|l| l.iter().sum::<i64>() == 0);
    }
    let weights = crate::parallel::par_map(exec, &lambdas, |l| cocharacter_weight(p, l));
    let (pos, &min_weight) = weights.iter().enumerate().min_by_key(|(i, w)| (**w, *i)).expect("the box is nonempty");
    Ok(ScanResult { box_size, trace_zero, count: lambdas.len(), min_weight, argmin: lambdas[pos].clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::GaussianRational;
    use crate::literal::parse_series;

    fn q(n: i64) -> GaussianRational {
        GaussianRational::from_integer(n)
    }

    fn sym2() -> RepExpr {
        RepExpr::sym(2, RepExpr::Std(2))
    }

    fn vec_of(rep: RepExpr, named: &[(&str, i64)]) -> RepVector {
        RepVector::from_names(rep, named.iter().map(|(n, c)| (*n, q(*c)))).unwrap()
    }

    fn one() -> RepVector {
        vec_of(RepExpr::Triv, &[("1", 1)])
    }

    fn arc(rows: &[&[&str]]) -> ArcMatrix {
        ArcMatrix::from_rows(rows.iter().map(|r| r.iter().map(|s| parse_series(s).unwrap()).collect()).collect())
            .unwrap()
    }

    fn unipotent() -> ArcMatrix {
        arc(&[&["1", "z^-1"], &["0", "1"]])
    }

    fn xi(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| rat(x)).collect()
    }

    #[test]
    fn weight_examples() {
        let rho = ArcMatrix::from_cocharacter(&[1, -1]);
        let p = Pair::new(one(), vec_of(sym2(), &[("e1^2", 1), ("e2^2", 1)])).unwrap();
        assert_eq!(weight(&rho, &p), Ok(-2));
        assert_eq!(weight_via_specialization(&rho, &p), Ok(-2));
        let p = Pair::new(one(), vec_of(sym2(), &[("e1*e2", 1)])).unwrap();
        assert_eq!(weight(&rho, &p), Ok(0));
        assert_eq!(weight_via_specialization(&rho, &p), Ok(0));
        let v = vec_of(sym2(), &[("e1^2", 1), ("e1*e2", 3)]);
        let p = Pair::new(v.clone(), v).unwrap();
        assert_eq!(weight(&unipotent(), &p), Ok(0));
    }

    #[test]
    fn scalar_arc_specialization() {
        let rho = ArcMatrix::scalar(LaurentSeries::z_pow(1), 2);
        let p = Pair::new(vec_of(sym2(), &[("e1^2", 1)]), one()).unwrap();
        let coords = act(&rho, p.v()).unwrap();
        assert_eq!(specialization_degree(&coords), Ok(-2));
        assert_eq!(weight_via_specialization(&rho, &p), Ok(-2));
        assert_eq!(weight(&rho, &p), Ok(-2));
    }

    #[test]
    fn norm_examples() {
        let v = vec_of(sym2(), &[("e1^2", 1)]);
        let p = Pair::new(v, one()).unwrap();
        assert_eq!(norm(&unipotent(), &p, SlotOrder::Analytic), Ok(2));
        assert_eq!(norm(&unipotent(), &p, SlotOrder::Paper), Ok(-2));
        assert_eq!(norm(&ArcMatrix::identity(2), &p, SlotOrder::Analytic), Ok(0));
        let p = Pair::new(vec_of(sym2(), &[("e2^2", 1)]), one()).unwrap();
        assert_eq!(norm(&unipotent(), &p, SlotOrder::Analytic), Ok(0));
    }

    #[test]
    fn twisted_weight_examples() {
        let t = TorusData::diagonal(2);
        let p = Pair::new(one(), vec_of(sym2(), &[("e1^2", 1), ("e2^2", 1)])).unwrap();
        let id = ArcMatrix::identity(2);
        assert_eq!(twisted_weight(&id, &xi(&[1, 0]), &p, &t), Ok(rat(0)));
        let rho = ArcMatrix::from_cocharacter(&[2, -1]);
        assert_eq!(twisted_weight(&rho, &xi(&[0, 0]), &p, &t).unwrap(), rat(weight(&rho, &p).unwrap()));
        for x in [[1, 2], [-3, 1], [0, -2]] {
            let twisted = twisted_arc(&rho, &x, &t).unwrap();
            assert_eq!(twisted_weight(&rho, &xi(&x), &p, &t).unwrap(), rat(weight(&twisted, &p).unwrap()));
        }
        assert_eq!(twisted_weight(&unipotent(), &xi(&[0, 0]), &p, &t), Err(Error::NonCommutingTorus));
    }

    #[test]
    fn reduced_norm_examples() {
        let t = TorusData::diagonal(2);
        let p = Pair::new(vec_of(sym2(), &[("e1*e2", 1)]), one()).unwrap();
        let red = reduced_norm(&ArcMatrix::identity(2), &p, &t).unwrap();
        assert_eq!(red.value, rat(0));
        assert_eq!(red.minimizer[0], red.minimizer[1]);
        assert!(!red.properness.proper);
        assert!(red.properness.certified);

        let p = Pair::new(vec_of(sym2(), &[("e1^2", 1)]), one()).unwrap();
        let rho = ArcMatrix::from_cocharacter(&[1, -1]);
        let red = reduced_norm(&rho, &p, &t).unwrap();
        assert_eq!(red.value, rat(0));
        let profile = TwistProfile::new(&rho, &p, &t).unwrap();
        assert_eq!(profile.twisted_norm(&red.minimizer).unwrap(), rat(0));
        for a in -5..=5 {
            for b in -5..=5 {
                assert!(profile.twisted_norm(&xi(&[a, b])).unwrap() >= rat(0));
            }
        }

        let trivial = TorusData::trivial(2);
        let red = reduced_norm(&rho, &p, &trivial).unwrap();
        assert_eq!(red.value, rat(norm(&rho, &p, SlotOrder::Analytic).unwrap()));
        assert!(red.properness.proper);
    }

    #[test]
    fn properness_examples() {
        let t = TorusData::diagonal(2);
        let p = Pair::new(vec_of(sym2(), &[("e1^2", 1), ("e1*e2", 1), ("e2^2", 1)]), one()).unwrap();
        // the centre of GL(2) scales every coordinate of Sym² and of e alike
        let pr = is_proper(&ArcMatrix::identity(2), &p, &t).unwrap();
        assert!(!pr.proper);
        let profile = TwistProfile::new(&ArcMatrix::identity(2), &p, &t).unwrap();
        assert!(profile.recession(&pr.witness.unwrap()).unwrap() <= rat(0));
        assert_eq!(profile.recession(&xi(&[1, 1])).unwrap(), rat(0));
        let sl = TorusData::new(1, vec![vec![1], vec![-1]]).unwrap();
        assert!(!is_proper(&ArcMatrix::identity(2), &p, &sl).unwrap().proper);
        let interior = Pair::new(vec_of(sym2(), &[("e1*e2", 1)]), one()).unwrap();
        assert!(is_proper(&ArcMatrix::identity(2), &interior, &sl).unwrap().proper);
        assert!(is_proper(&ArcMatrix::identity(2), &p, &TorusData::trivial(2)).unwrap().proper);
    }

    #[test]
    fn non_proper_unbounded_is_reported() {
        let t = TorusData::diagonal(2);
        let p = Pair::new(one(), one()).unwrap();
        let r = reduced_norm(&ArcMatrix::from_cocharacter(&[1, -1]), &p, &t);
        assert!(matches!(r, Err(Error::NotProper { .. })));
    }

    #[test]
    fn semistable_examples() {
        let p = Pair::new(one(), vec_of(sym2(), &[("e1^2", 1)])).unwrap();
        let arcs = [NamedArc::new("lambda", ArcMatrix::from_cocharacter(&[-1, 1]))];
        let rep = check_semistable(&p, &arcs, Execution::Sequential).unwrap();
        assert_eq!(rep.records[0].weight, -2);
        assert_eq!(rep.verdict, Verdict::Destabilized { arc: "lambda".into() });
        assert!(rep.is_consistent());

        let p = Pair::new(one(), vec_of(sym2(), &[("e1*e2", 1)])).unwrap();
        let arcs: Vec<NamedArc> = (-3..=3)
            .flat_map(|a| (-3..=3).map(move |b| (a, b)))
            .filter(|(a, b)| a + b == 0)
            .map(|(a, b)| NamedArc::new(format!("{a},{b}"), ArcMatrix::from_cocharacter(&[a, b])))
            .collect();
        let rep = check_semistable(&p, &arcs, Execution::Parallel).unwrap();
        assert_eq!(rep.records.iter().map(|r| r.weight).min(), Some(0));
        assert_eq!(rep.verdict, Verdict::NoViolationFound);
        assert_eq!(check_semistable(&p, &[], Execution::Parallel).unwrap().verdict, Verdict::NoViolationFound);
    }

    #[test]
    fn stable_examples() {
        let v = vec_of(sym2(), &[("e1^2", 1)]);
        let p = Pair::new(v.clone(), v).unwrap();
        for k in 1..5 {
            let eps = epsilon_from_k(k).unwrap();
            let rep =
                check_stable(&p, &[NamedArc::new("u", unipotent())], &eps, SlotOrder::Analytic, Execution::Sequential)
                    .unwrap();
            assert_eq!(rep.records[0].weight, 0);
            assert_eq!(rep.records[0].norm, Some(2));
            assert!(rep.violated());
            let rep = check_stable(
                &p,
                &[NamedArc::new("id", ArcMatrix::identity(2))],
                &eps,
                SlotOrder::Analytic,
                Execution::Sequential,
            )
            .unwrap();
            assert!(!rep.violated());
        }
        assert!(epsilon_from_k(0).is_err());
    }

    #[test]
    fn polystable_examples() {
        let t = TorusData::diagonal(2);
        let p = Pair::new(vec_of(sym2(), &[("e1^2", 1), ("e2^2", 2)]), vec_of(sym2(), &[("e1*e2", 1)])).unwrap();
        let arcs = [NamedArc::new("lambda", ArcMatrix::from_cocharacter(&[1, -1]))];
        let eps = epsilon_from_k(1).unwrap();
        assert!(matches!(
            check_polystable(&p, &arcs, &eps, &t, false, Execution::Sequential),
            Err(Error::NotProper { .. })
        ));
        let rep = check_polystable(&p, &arcs, &eps, &t, true, Execution::Sequential).unwrap();
        assert_eq!(rep.records[0].reduced_norm, Some(rat(0)));
        assert_eq!(rep.records[0].threshold, rat(0));
        assert_eq!(rep.records[0].holds, rep.records[0].weight >= 0);

        let trivial = TorusData::trivial(2);
        let arcs = [NamedArc::new("u", unipotent()), NamedArc::new("id", ArcMatrix::identity(2))];
        let poly = check_polystable(&p, &arcs, &eps, &trivial, false, Execution::Sequential).unwrap();
        let stable = check_stable(&p, &arcs, &eps, SlotOrder::Analytic, Execution::Sequential).unwrap();
        assert_eq!(poly.verdict, stable.verdict);
        assert_eq!(
            poly.records.iter().map(|r| r.holds).collect::<Vec<_>>(),
            stable.records.iter().map(|r| r.holds).collect::<Vec<_>>()
        );
    }

    #[test]
    fn augmented_weights() {
        let v = vec_of(sym2(), &[("e1^2", 1), ("e2^2", -1)]);
        let w = vec_of(RepExpr::Std(2), &[("e2", 1)]);
        let p = Pair::new(v, w).unwrap();
        for rho in [unipotent(), ArcMatrix::from_cocharacter(&[2, -1]), arc(&[&["z", "1"], &["0", "z^-2"]])] {
            let nu = weight(&rho, &p).unwrap();
            let n = norm(&rho, &p, SlotOrder::Analytic).unwrap();
            for k in 1..3 {
                for order in [SlotOrder::Paper, SlotOrder::Analytic] {
                    let aug = augmented_pair(&p, k, order, DEFAULT_DIM_CAP).unwrap();
                    assert_eq!(weight(&rho, &aug).unwrap(), augmented_weight(nu, n, k, order), "{order} k={k}");
                }
            }
        }
        assert!(matches!(augmented_pair(&p, 8, SlotOrder::Paper, 1000), Err(Error::DimensionOverflow { .. })));
    }

    #[test]
    fn scans() {
        let p = Pair::new(one(), vec_of(sym2(), &[("e1*e2", 1)])).unwrap();
        let s = scan_1ps(&p, 3, true, Execution::Parallel).unwrap();
        assert_eq!((s.count, s.min_weight), (7, 0));
        let p = Pair::new(one(), vec_of(sym2(), &[("e1^2", 1)])).unwrap();
        let s = scan_1ps(&p, 1, true, Execution::Parallel).unwrap();
        assert_eq!((s.min_weight, s.argmin.clone()), (-2, vec![-1, 1]));
        assert_eq!(scan_1ps(&p, 3, false, Execution::Sequential).unwrap().count, 49);
        assert!(scan_1ps(&p, 0, true, Execution::Sequential).is_err());
    }

    #[test]
    fn pair_invariants() {
        assert!(Pair::new(RepVector::new(sym2(), Default::default()).unwrap(), one()).is_err());
        let bad = Pair::new(vec_of(RepExpr::Std(2), &[("e1", 1)]), vec_of(RepExpr::Std(3), &[("e1", 1)]));
        assert!(matches!(bad, Err(Error::DimensionMismatch { .. })));
    }
}
