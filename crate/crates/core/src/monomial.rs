//! Exact monomials over channel symbols.
//!
//! A modulation pseudo-vector is a product of channel coefficients raised to
//! small integer powers. Representing it by its exponent map lets alignment
//! be checked by set identity instead of by comparing floating-point values.
//! Exponent maps are stored sparsely, sorted by symbol, with no zero
//! entries, so structural equality is monomial equality and set ordering is
//! deterministic.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelRealization, CompoundChannelConfig};
use crate::error::{Error, Result};
use crate::field::{lex_cmp, Scalar};

/// Default cap on the number of monomials a single enumeration may produce.
pub const DEFAULT_MONOMIAL_CAP: u128 = 10_000_000;

/// A variable that can appear in a monomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymbolId {
    /// Channel coefficient `h[receiver][antenna][state]`.
    ChannelCoeff {
        receiver: u32,
        antenna: u32,
        state: u32,
    },
    /// Effective gain `g[receiver][column][state]` of a zero-forcing column
    /// seen by the last receiver.
    HybridG {
        receiver: u32,
        column: u32,
        state: u32,
    },
    /// The random base whose powers carry the last receiver's streams.
    HybridBeta,
    /// Gain `h_r · v_i^{[r]}` of a zero-forcing column at its own receiver.
    HybridHv { receiver: u32, column: u32 },
    /// Gain `h_M^{state} · v_M` of the last receiver's precoder.
    HybridMv { state: u32 },
}

impl SymbolId {
    pub fn h(receiver: usize, antenna: usize, state: usize) -> Self {
        SymbolId::ChannelCoeff {
            receiver: receiver as u32,
            antenna: antenna as u32,
            state: state as u32,
        }
    }

    pub fn g(receiver: usize, column: usize, state: usize) -> Self {
        SymbolId::HybridG {
            receiver: receiver as u32,
            column: column as u32,
            state: state as u32,
        }
    }

    pub fn hv(receiver: usize, column: usize) -> Self {
        SymbolId::HybridHv {
            receiver: receiver as u32,
            column: column as u32,
        }
    }

    pub fn mv(state: usize) -> Self {
        SymbolId::HybridMv {
            state: state as u32,
        }
    }
}

impl fmt::Display for SymbolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SymbolId::ChannelCoeff {
                receiver,
                antenna,
                state,
            } => write!(f, "h[{receiver},{antenna},{state}]"),
            SymbolId::HybridG {
                receiver,
                column,
                state,
            } => write!(f, "g[{receiver},{column},{state}]"),
            SymbolId::HybridBeta => f.write_str("beta"),
            SymbolId::HybridHv { receiver, column } => write!(f, "hv[{receiver},{column}]"),
            SymbolId::HybridMv { state } => write!(f, "hmv[{state}]"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    terms: Vec<(SymbolId, u32)>,
}

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn symbol(sym: SymbolId, exponent: u32) -> Self {
        Self::from_terms([(sym, exponent)])
    }

    /// Builds the canonical form: duplicate symbols are merged and zero
    /// exponents dropped.
    pub fn from_terms<I: IntoIterator<Item = (SymbolId, u32)>>(terms: I) -> Self {
        let mut map: BTreeMap<SymbolId, u32> = BTreeMap::new();
        for (sym, e) in terms {
            *map.entry(sym).or_insert(0) += e;
        }
        Self {
            terms: map.into_iter().filter(|&(_, e)| e > 0).collect(),
        }
    }

    pub fn terms(&self) -> &[(SymbolId, u32)] {
        &self.terms
    }

    pub fn exponent(&self, sym: SymbolId) -> u32 {
        match self.terms.binary_search_by(|(s, _)| s.cmp(&sym)) {
            Ok(i) => self.terms[i].1,
            Err(_) => 0,
        }
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|&(_, e)| e).sum()
    }

    /// This monomial multiplied by one more factor of `sym`.
    pub fn times(&self, sym: SymbolId) -> Self {
        let mut terms = self.terms.clone();
        match terms.binary_search_by(|(s, _)| s.cmp(&sym)) {
            Ok(i) => terms[i].1 += 1,
            Err(i) => terms.insert(i, (sym, 1)),
        }
        Self { terms }
    }

    pub fn mul(&self, other: &Monomial) -> Self {
        Self::from_terms(self.terms.iter().chain(other.terms.iter()).copied())
    }

    pub fn evaluate<V: SymbolValues + ?Sized>(&self, values: &V) -> Result<Scalar> {
        let mut acc = Scalar::new(1.0, 0.0);
        for &(sym, e) in &self.terms {
            let v = values
                .value(sym)
                .ok_or_else(|| Error::UnresolvableSymbol(sym.to_string()))?;
            acc *= v.powu(e);
        }
        Ok(acc)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("1");
        }
        for (i, (sym, e)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            if *e == 1 {
                write!(f, "{sym}")?;
            } else {
                write!(f, "{sym}^{e}")?;
            }
        }
        Ok(())
    }
}

impl Serialize for Monomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Source of numeric values for symbols.
pub trait SymbolValues {
    fn value(&self, sym: SymbolId) -> Option<Scalar>;
}

impl SymbolValues for ChannelRealization {
    fn value(&self, sym: SymbolId) -> Option<Scalar> {
        match sym {
            SymbolId::ChannelCoeff {
                receiver,
                antenna,
                state,
            } => self
                .coeff(receiver as usize, antenna as usize, state as usize)
                .ok(),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SymbolTable(BTreeMap<SymbolId, Scalar>);

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, sym: SymbolId, value: Scalar) {
        self.0.insert(sym, value);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl SymbolValues for SymbolTable {
    fn value(&self, sym: SymbolId) -> Option<Scalar> {
        self.0.get(&sym).copied()
    }
}

/// Looks a symbol up in the first source, then in the second.
pub struct Chained<'a, A: ?Sized, B: ?Sized>(pub &'a A, pub &'a B);

impl<A: SymbolValues + ?Sized, B: SymbolValues + ?Sized> SymbolValues for Chained<'_, A, B> {
    fn value(&self, sym: SymbolId) -> Option<Scalar> {
        self.0.value(sym).or_else(|| self.1.value(sym))
    }
}

/// Numeric value of `m` with channel coefficients taken from `ch` and any
/// other symbol from `extra`.
pub fn evaluate(m: &Monomial, ch: &ChannelRealization, extra: &SymbolTable) -> Result<Scalar> {
    m.evaluate(&Chained(ch, extra))
}

pub type MonomialSet = BTreeSet<Monomial>;

/// Antenna count and per-receiver state counts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub antennas: usize,
    pub states: Vec<usize>,
}

impl Dims {
    pub fn new(antennas: usize, states: Vec<usize>) -> Result<Self> {
        let dims = Self { antennas, states };
        dims.validate()?;
        Ok(dims)
    }

    pub fn validate(&self) -> Result<()> {
        if self.antennas == 0 || self.states.is_empty() || self.states.contains(&0) {
            return Err(Error::Config(format!(
                "dimensions need M ≥ 1, K ≥ 1 and every J ≥ 1 (got M = {}, J = {:?})",
                self.antennas, self.states
            )));
        }
        Ok(())
    }

    pub fn receivers(&self) -> usize {
        self.states.len()
    }

    pub fn total_states(&self) -> usize {
        self.states.iter().sum()
    }

    fn check_receiver(&self, r: usize) -> Result<()> {
        if r >= self.receivers() {
            return Err(Error::IndexOutOfRange {
                what: "receiver",
                index: r,
                limit: self.receivers(),
            });
        }
        Ok(())
    }

    /// Number of channel symbols a basis for receiver `r` ranges over:
    /// `M·(ΣJ − J_r)`.
    pub fn foreign_symbol_count(&self, r: usize) -> Result<u32> {
        self.check_receiver(r)?;
        Ok((self.antennas * (self.total_states() - self.states[r])) as u32)
    }
}

impl From<&CompoundChannelConfig> for Dims {
    fn from(c: &CompoundChannelConfig) -> Self {
        Self {
            antennas: c.antennas,
            states: c.states.clone(),
        }
    }
}

/// The modulation pseudo-vectors used for one receiver's sub-streams: every
/// product of `symbols` with each exponent in `[1, n]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PseudoVectorBasis {
    pub receiver: usize,
    pub n: u32,
    pub symbols: Vec<SymbolId>,
    pub elements: Vec<Monomial>,
}

fn checked_pow(base: u128, exp: u32, what: &'static str) -> Result<u128> {
    base.checked_pow(exp).ok_or(Error::SizeCap {
        what,
        required: u128::MAX,
        cap: u128::MAX,
    })
}

impl PseudoVectorBasis {
    /// Enumerates `[1, n]^symbols` in lexicographic exponent order.
    pub fn product(receiver: usize, symbols: Vec<SymbolId>, n: u32, cap: u128) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("exponent cap n must be at least 1".into()));
        }
        let size = checked_pow(n as u128, symbols.len() as u32, "pseudo-vector basis")?;
        if size > cap {
            return Err(Error::SizeCap {
                what: "pseudo-vector basis",
                required: size,
                cap,
            });
        }
        let elements = enumerate_box(&symbols, &vec![(1, n); symbols.len()]);
        Ok(Self {
            receiver,
            n,
            symbols,
            elements,
        })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn as_set(&self) -> MonomialSet {
        self.elements.iter().cloned().collect()
    }

    /// The smallest exponent box containing `∪_{sym ∈ shifted} sym·B`: the
    /// shifted symbols range over `[1, n+1]`, the others over `[1, n]`. Its
    /// size is `n^{|symbols| − |shifted|}·(n+1)^{|shifted|}`.
    pub fn alignment_envelope(&self, shifted: &[SymbolId], cap: u128) -> Result<Vec<Monomial>> {
        for s in shifted {
            if !self.symbols.contains(s) {
                return Err(Error::Config(format!(
                    "envelope symbol {s} is not a basis symbol"
                )));
            }
        }
        let ranges: Vec<(u32, u32)> = self
            .symbols
            .iter()
            .map(|s| {
                if shifted.contains(s) {
                    (1, self.n + 1)
                } else {
                    (1, self.n)
                }
            })
            .collect();
        let size = ranges
            .iter()
            .try_fold(1u128, |acc, &(lo, hi)| {
                acc.checked_mul((hi - lo + 1) as u128)
            })
            .unwrap_or(u128::MAX);
        if size > cap {
            return Err(Error::SizeCap {
                what: "alignment envelope",
                required: size,
                cap,
            });
        }
        Ok(enumerate_box(&self.symbols, &ranges))
    }
}

fn enumerate_box(symbols: &[SymbolId], ranges: &[(u32, u32)]) -> Vec<Monomial> {
    let mut exps: Vec<u32> = ranges.iter().map(|&(lo, _)| lo).collect();
    let total: usize = ranges
        .iter()
        .map(|&(lo, hi)| (hi - lo + 1) as usize)
        .product();
    let mut out = Vec::with_capacity(total);
    loop {
        out.push(Monomial::from_terms(
            symbols.iter().copied().zip(exps.iter().copied()),
        ));
        // odometer, last symbol fastest
        let mut k = symbols.len();
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if exps[k] < ranges[k].1 {
                exps[k] += 1;
                break;
            }
            exps[k] = ranges[k].0;
        }
    }
}

/// Channel symbols a basis for receiver `r` ranges over: every
/// `h[r'][t][s]` with `r' ≠ r`.
pub fn basis_symbols(dims: &Dims, r: usize) -> Result<Vec<SymbolId>> {
    dims.check_receiver(r)?;
    let mut out = Vec::new();
    for (rp, &j) in dims.states.iter().enumerate() {
        if rp == r {
            continue;
        }
        for s in 0..j {
            for t in 0..dims.antennas {
                out.push(SymbolId::h(rp, t, s));
            }
        }
    }
    out.sort();
    Ok(out)
}

pub fn build_basis(dims: &Dims, r: usize, n: u32) -> Result<PseudoVectorBasis> {
    build_basis_capped(dims, r, n, DEFAULT_MONOMIAL_CAP)
}

pub fn build_basis_capped(dims: &Dims, r: usize, n: u32, cap: u128) -> Result<PseudoVectorBasis> {
    dims.validate()?;
    PseudoVectorBasis::product(r, basis_symbols(dims, r)?, n, cap)
}

/// Multiplies every monomial in `set` by `sym`.
pub fn scale<'a, I>(set: I, sym: SymbolId) -> MonomialSet
where
    I: IntoIterator<Item = &'a Monomial>,
{
    set.into_iter().map(|m| m.times(sym)).collect()
}

pub fn union_size(sets: &[MonomialSet]) -> usize {
    let mut all: BTreeSet<&Monomial> = BTreeSet::new();
    for s in sets {
        all.extend(s.iter());
    }
    all.len()
}

/// `L_r = n^{M(ΣJ − J_r)}`.
pub fn basis_size(n: u32, dims: &Dims, r: usize) -> Result<u128> {
    checked_pow(n as u128, dims.foreign_symbol_count(r)?, "basis size")
}

/// Closed-form merged-interference count
/// `κ_r̂ = n^{M(ΣJ − J_r̂ − 1)}·(n+1)^M`. This is the size of the alignment
/// envelope, which contains the interference union from receiver `r̂`'s
/// sub-streams at any other receiver. It exceeds the exact union size; see
/// [`exact_interference_count`].
pub fn kappa(n: u32, dims: &Dims, r_hat: usize) -> Result<u128> {
    let foreign = dims.foreign_symbol_count(r_hat)?;
    let m = dims.antennas as u32;
    if foreign < m {
        return Err(Error::Config(format!(
            "receiver {r_hat} has no interfering coefficients (ΣJ − J = 0)"
        )));
    }
    let fixed = checked_pow(n as u128, foreign - m, "kappa")?;
    let shifted = checked_pow(n as u128 + 1, m, "kappa")?;
    fixed.checked_mul(shifted).ok_or(Error::SizeCap {
        what: "kappa",
        required: u128::MAX,
        cap: u128::MAX,
    })
}

/// Exact size of `∪_t h[r][t][ŝ]·B_r̂` for any `r ≠ r̂`:
/// `n^{M(ΣJ − J_r̂ − 1)}·(n^M + M·n^{M−1} − 1)`.
///
/// The `M` shifted exponents form the union of `M` unit translates of the
/// cube `[1,n]^M`; that union misses the all-ones corner and every point
/// with two or more coordinates equal to `n+1`.
pub fn exact_interference_count(n: u32, dims: &Dims, r_hat: usize) -> Result<u128> {
    let foreign = dims.foreign_symbol_count(r_hat)?;
    let m = dims.antennas as u32;
    if foreign < m {
        return Err(Error::Config(format!(
            "receiver {r_hat} has no interfering coefficients (ΣJ − J = 0)"
        )));
    }
    let n = n as u128;
    let fixed = checked_pow(n, foreign - m, "interference count")?;
    let shifted = checked_pow(n, m, "interference count")? + m as u128 * n.pow(m - 1) - 1;
    Ok(fixed * shifted)
}

/// `ξ = max_r (Σ_{r̂≠r} κ_r̂ + M·L_r)`: the largest number of distinct
/// received coefficients at any receiver.
pub fn xi(dims: &Dims, n_list: &[u32]) -> Result<u128> {
    if n_list.len() != dims.receivers() {
        return Err(Error::Config(format!(
            "need one exponent cap per receiver ({} given, K = {})",
            n_list.len(),
            dims.receivers()
        )));
    }
    let k = dims.receivers();
    let kappas: Vec<u128> = if k > 1 {
        (0..k)
            .map(|r| kappa(n_list[r], dims, r))
            .collect::<Result<_>>()?
    } else {
        vec![0]
    };
    let total: u128 = kappas.iter().sum();
    (0..k)
        .map(|r| -> Result<u128> {
            Ok(total - kappas[r] + dims.antennas as u128 * basis_size(n_list[r], dims, r)?)
        })
        .try_fold(0u128, |acc, v| Ok(acc.max(v?)))
}

/// Largest `n ≥ 1` with `n^{M(ΣJ − J_r)} ≤ target`.
pub fn choose_n(target: u128, dims: &Dims, r: usize) -> Result<u32> {
    let exp = dims.foreign_symbol_count(r)?;
    if target == 0 {
        return Err(Error::Config("target basis size must be at least 1".into()));
    }
    if exp == 0 {
        return Ok(1);
    }
    let mut guess = (target as f64).powf(1.0 / exp as f64).floor().max(1.0) as u128;
    while guess > 1 && guess.checked_pow(exp).is_none_or(|v| v > target) {
        guess -= 1;
    }
    while (guess + 1).checked_pow(exp).is_some_and(|v| v <= target) {
        guess += 1;
    }
    Ok(guess.min(u32::MAX as u128) as u32)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InterferenceUnion {
    pub from_receiver: usize,
    /// Exact `|∪_t h[r][t][ŝ]·B_r̂|`.
    pub union_size: usize,
    /// Closed form `κ_r̂`.
    pub kappa: u128,
    /// Closed form of the exact union size.
    pub exact_count: u128,
    pub envelope_size: usize,
    /// Whether the union lies inside the alignment envelope.
    pub contained: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlignmentReport {
    pub receiver: usize,
    pub state: usize,
    pub basis_size: usize,
    pub favorite_union: usize,
    pub favorite_expected: u128,
    /// Property (1): the `M` favorite sets are pairwise disjoint.
    pub favorites_distinct: bool,
    pub interference_unions: Vec<InterferenceUnion>,
    /// Property (2): favorites share no monomial with any interference set
    /// or envelope.
    pub disjoint: bool,
    /// Property (3): every interference union lies in an envelope of size
    /// `κ_r̂`, and envelopes of different receivers are disjoint.
    pub aligned_within_kappa: bool,
    /// Whether every union has exactly `κ_r̂` elements.
    pub unions_equal_kappa: bool,
    /// Distinct received monomials whose numeric values coincide.
    pub numeric_collisions: usize,
    pub violations: Vec<String>,
}

impl AlignmentReport {
    pub fn holds(&self) -> bool {
        self.favorites_distinct && self.disjoint && self.aligned_within_kappa
    }
}

/// Checks the alignment properties at receiver `r` in state `state` by
/// exact set algebra, then separately counts numeric coefficient collisions
/// on the given channel.
pub fn verify_alignment(
    ch: &ChannelRealization,
    bases: &[PseudoVectorBasis],
    r: usize,
    state: usize,
) -> Result<AlignmentReport> {
    let dims = Dims::from(ch.config());
    dims.check_receiver(r)?;
    if state >= dims.states[r] {
        return Err(Error::IndexOutOfRange {
            what: "state",
            index: state,
            limit: dims.states[r],
        });
    }
    if bases.len() != dims.receivers() {
        return Err(Error::Config(format!(
            "expected {} bases, got {}",
            dims.receivers(),
            bases.len()
        )));
    }
    let m = dims.antennas;
    let shifts: Vec<SymbolId> = (0..m).map(|t| SymbolId::h(r, t, state)).collect();
    let mut violations = Vec::new();

    let own = &bases[r];
    let favorite_sets: Vec<MonomialSet> = shifts.iter().map(|&s| scale(&own.elements, s)).collect();
    let favorite_union = union_size(&favorite_sets);
    let favorite_expected = m as u128 * own.len() as u128;
    let favorites_distinct = favorite_union as u128 == favorite_expected;
    if !favorites_distinct {
        violations.push(format!(
            "property 1: favorite union has {favorite_union} elements, expected {favorite_expected}"
        ));
    }
    let favorites: MonomialSet = favorite_sets.into_iter().flatten().collect();

    let mut interference_unions = Vec::new();
    let mut interference_all: MonomialSet = MonomialSet::new();
    let mut envelopes: Vec<MonomialSet> = Vec::new();
    let mut unions_equal_kappa = true;
    let mut aligned = true;
    for (rh, basis) in bases.iter().enumerate() {
        if rh == r {
            continue;
        }
        let sets: Vec<MonomialSet> = shifts.iter().map(|&s| scale(&basis.elements, s)).collect();
        let size = union_size(&sets);
        let union: MonomialSet = sets.into_iter().flatten().collect();
        let envelope: MonomialSet = basis
            .alignment_envelope(&shifts, DEFAULT_MONOMIAL_CAP)?
            .into_iter()
            .collect();
        let contained = union.is_subset(&envelope);
        let kappa_value = kappa(basis.n, &dims, rh)?;
        let exact = exact_interference_count(basis.n, &dims, rh)?;
        if !contained || envelope.len() as u128 != kappa_value {
            aligned = false;
            violations.push(format!(
                "property 3: interference from receiver {rh} escapes its envelope"
            ));
        }
        if size as u128 != kappa_value {
            unions_equal_kappa = false;
        }
        interference_unions.push(InterferenceUnion {
            from_receiver: rh,
            union_size: size,
            kappa: kappa_value,
            exact_count: exact,
            envelope_size: envelope.len(),
            contained,
        });
        interference_all.extend(union);
        envelopes.push(envelope);
    }

    let disjoint = favorites.is_disjoint(&interference_all)
        && envelopes.iter().all(|e| favorites.is_disjoint(e));
    if !disjoint {
        violations.push("property 2: favorite and interference monomials overlap".into());
    }
    for i in 0..envelopes.len() {
        for j in i + 1..envelopes.len() {
            if !envelopes[i].is_disjoint(&envelopes[j]) {
                aligned = false;
                violations.push(format!("property 3: envelopes {i} and {j} overlap"));
            }
        }
    }

    let mut received: Vec<&Monomial> = favorites.iter().collect();
    for e in &envelopes {
        received.extend(e.iter());
    }
    let values = received
        .iter()
        .map(|m| m.evaluate(ch))
        .collect::<Result<Vec<_>>>()?;
    let numeric_collisions = count_numeric_collisions(&values, 1e-12);

    Ok(AlignmentReport {
        receiver: r,
        state,
        basis_size: own.len(),
        favorite_union,
        favorite_expected,
        favorites_distinct,
        interference_unions,
        disjoint,
        aligned_within_kappa: aligned,
        unions_equal_kappa,
        numeric_collisions,
        violations,
    })
}

/// Number of value pairs closer than `rel_tol` times the largest magnitude.
pub fn count_numeric_collisions(values: &[Scalar], rel_tol: f64) -> usize {
    let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let tol = rel_tol * scale.max(f64::MIN_POSITIVE);
    let mut sorted = values.to_vec();
    sorted.sort_by(lex_cmp);
    let mut count = 0;
    for i in 0..sorted.len() {
        for j in i + 1..sorted.len() {
            if sorted[j].re - sorted[i].re >= tol {
                break;
            }
            if (sorted[j] - sorted[i]).norm() < tol {
                count += 1;
            }
        }
    }
    count
}
