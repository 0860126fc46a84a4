//! Exact combinatorics of theta characteristics over Z_2.
//!
//! A characteristic is a pair of length-g bit vectors [eps|delta], stored as
//! two machine-word bit masks (bit k-1 holds coordinate k). Parity, azygetic
//! tuples, reduction signs, the subset <-> characteristic bijection attached
//! to a fundamental system, and the predicted vanishing sets of the
//! hyperelliptic locus all live here. Everything is pure bit arithmetic.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Maximum supported genus (bit masks are u32; combinatorics cap out far earlier).
pub const MAX_GENUS: usize = 16;

/// Parity of a characteristic: even iff <eps, delta> = 0 mod 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn bit(self) -> u32 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }
}

/// A theta characteristic [eps|delta] with eps, delta in Z_2^g.
///
/// Coordinate k of the mathematical vector (1-indexed) is bit k-1 of the mask,
/// so `e_k` has exactly bit k-1 set and `s_k` has bits 0..k-1 set.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Characteristic {
    genus: usize,
    eps: u32,
    delta: u32,
}

impl fmt::Debug for Characteristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self)
    }
}

impl fmt::Display for Characteristic {
    /// Text form "e1e2...eg|d1d2...dg", e.g. "0101|1111".
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..self.genus {
            write!(f, "{}", (self.eps >> k) & 1)?;
        }
        write!(f, "|")?;
        for k in 0..self.genus {
            write!(f, "{}", (self.delta >> k) & 1)?;
        }
        Ok(())
    }
}

impl serde::Serialize for Characteristic {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Inner product of two bit masks mod 2.
#[inline]
pub fn dot2(a: u32, b: u32) -> u32 {
    (a & b).count_ones() & 1
}

impl Characteristic {
    pub fn new(genus: usize, eps: u32, delta: u32) -> Result<Self> {
        if genus == 0 || genus > MAX_GENUS {
            return Err(Error::InvalidGenus(genus, "genus must be in 1..=16"));
        }
        let mask = Self::mask(genus);
        if eps & !mask != 0 || delta & !mask != 0 {
            return Err(Error::InvalidInput(
                "characteristic bits out of range".into(),
            ));
        }
        Ok(Self { genus, eps, delta })
    }

    #[inline]
    fn mask(genus: usize) -> u32 {
        if genus == 32 {
            u32::MAX
        } else {
            (1u32 << genus) - 1
        }
    }

    /// Build from 0/1 slices (coordinate 1 first).
    pub fn from_bits(eps: &[u8], delta: &[u8]) -> Result<Self> {
        if eps.len() != delta.len() {
            return Err(Error::LengthMismatch {
                expected: eps.len(),
                got: delta.len(),
            });
        }
        let g = eps.len();
        let pack = |v: &[u8]| -> Result<u32> {
            let mut m = 0u32;
            for (k, &b) in v.iter().enumerate() {
                if b > 1 {
                    return Err(Error::InvalidInput("bits must be 0 or 1".into()));
                }
                m |= (b as u32) << k;
            }
            Ok(m)
        };
        Self::new(g, pack(eps)?, pack(delta)?)
    }

    /// Parse the text form "0101|1111".
    pub fn parse(s: &str) -> Result<Self> {
        let (e, d) = s
            .split_once('|')
            .ok_or_else(|| Error::InvalidInput(format!("missing '|' in characteristic '{s}'")))?;
        let to_bits = |t: &str| -> Result<Vec<u8>> {
            t.chars()
                .map(|c| match c {
                    '0' => Ok(0u8),
                    '1' => Ok(1u8),
                    _ => Err(Error::InvalidInput(format!("bad bit '{c}' in '{s}'"))),
                })
                .collect()
        };
        Self::from_bits(&to_bits(e)?, &to_bits(d)?)
    }

    pub fn zero(genus: usize) -> Self {
        Self::new(genus, 0, 0).expect("valid genus")
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn eps(&self) -> u32 {
        self.eps
    }

    pub fn delta(&self) -> u32 {
        self.delta
    }

    pub fn eps_bits(&self) -> Vec<u8> {
        (0..self.genus)
            .map(|k| ((self.eps >> k) & 1) as u8)
            .collect()
    }

    pub fn delta_bits(&self) -> Vec<u8> {
        (0..self.genus)
            .map(|k| ((self.delta >> k) & 1) as u8)
            .collect()
    }

    /// e_k: the k-th natural basis vector as mask (1 <= k <= g+1, with e_{g+1} = 0).
    pub fn e_mask(genus: usize, k: usize) -> u32 {
        debug_assert!(k >= 1 && k <= genus + 1);
        if k == genus + 1 {
            0
        } else {
            1 << (k - 1)
        }
    }

    /// s_k = e_1 + ... + e_k as mask (s_0 = 0).
    pub fn s_mask(genus: usize, k: usize) -> u32 {
        debug_assert!(k <= genus);
        (1u32 << k) - 1
    }

    /// Bitwise mod-2 sum (reduction sign discarded).
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.genus != other.genus {
            return Err(Error::GenusMismatch(self.genus, other.genus));
        }
        Ok(Self {
            genus: self.genus,
            eps: self.eps ^ other.eps,
            delta: self.delta ^ other.delta,
        })
    }

    pub fn parity(&self) -> Parity {
        if dot2(self.eps, self.delta) == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn is_even(&self) -> bool {
        self.parity() == Parity::Even
    }

    /// All 2^{2g} characteristics in (delta-major, eps-minor) binary counting order.
    pub fn all(genus: usize) -> impl Iterator<Item = Characteristic> {
        let n = 1u32 << genus;
        (0..n).flat_map(move |eps| (0..n).map(move |delta| Characteristic { genus, eps, delta }))
    }
}

/// Parity of a characteristic.
pub fn parity(m: &Characteristic) -> Parity {
    m.parity()
}

/// Reduce integer characteristic vectors to Z_2 and return the attached sign.
///
/// theta[eps + 2e'; delta + 2d'] = (-1)^{<eps, d'>} theta[eps; delta], so the
/// sign is determined by the reduced eps and the halved remainder of delta.
pub fn reduce(eps: &[i64], delta: &[i64]) -> Result<(Characteristic, i32)> {
    if eps.len() != delta.len() {
        return Err(Error::LengthMismatch {
            expected: eps.len(),
            got: delta.len(),
        });
    }
    let g = eps.len();
    let mut e_red = vec![0u8; g];
    let mut d_red = vec![0u8; g];
    let mut sign_exp = 0i64;
    for k in 0..g {
        e_red[k] = eps[k].rem_euclid(2) as u8;
        d_red[k] = delta[k].rem_euclid(2) as u8;
        let d_half = (delta[k] - d_red[k] as i64) / 2;
        sign_exp += (e_red[k] as i64) * d_half;
    }
    let sign = if sign_exp.rem_euclid(2) == 0 { 1 } else { -1 };
    Ok((Characteristic::from_bits(&e_red, &d_red)?, sign))
}

/// True iff the triple is azygetic: the four parity bits (including the bit of
/// the mod-2 sum) add up to 1 mod 2.
pub fn is_azygetic_triple(
    m: &Characteristic,
    m2: &Characteristic,
    m3: &Characteristic,
) -> Result<bool> {
    let s = m.add(m2)?.add(m3)?;
    let total = m.parity().bit() + m2.parity().bit() + m3.parity().bit() + s.parity().bit();
    Ok(total & 1 == 1)
}

/// True iff every 3-subset of the sequence is azygetic.
pub fn is_azygetic_tuple(seq: &[Characteristic]) -> Result<bool> {
    for i in 0..seq.len() {
        for j in (i + 1)..seq.len() {
            for k in (j + 1)..seq.len() {
                if !is_azygetic_triple(&seq[i], &seq[j], &seq[k])? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Index of the point at infinity inside B = {1, ..., 2g+1, oo}.
/// B is encoded as a bit mask: bit j-1 for the finite label j, bit 2g+1 for oo.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, serde::Serialize, serde::Deserialize)]
pub enum BIndex {
    Finite(usize),
    Infinity,
}

impl BIndex {
    fn bit(self, genus: usize) -> u32 {
        match self {
            BIndex::Finite(j) => {
                debug_assert!(j >= 1 && j <= 2 * genus + 1);
                1u32 << (j - 1)
            }
            BIndex::Infinity => 1u32 << (2 * genus + 1),
        }
    }
}

/// An even-cardinality subset of B = {1, ..., 2g+1, oo}, canonicalized so that
/// the representative of the pair {T, CT} is the one not containing oo.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct SubsetLabel {
    genus: usize,
    members: u32,
}

impl SubsetLabel {
    /// Build from labels; canonicalizes to the representative without oo.
    pub fn new(genus: usize, labels: &[BIndex]) -> Result<Self> {
        let mut members = 0u32;
        for &l in labels {
            if let BIndex::Finite(j) = l {
                if j == 0 || j > 2 * genus + 1 {
                    return Err(Error::InvalidInput(format!("label {j} outside B")));
                }
            }
            let b = l.bit(genus);
            if members & b != 0 {
                return Err(Error::InvalidInput("repeated label in subset".into()));
            }
            members |= b;
        }
        if members.count_ones() % 2 != 0 {
            return Err(Error::InvalidInput(
                "subset must have even cardinality".into(),
            ));
        }
        Ok(Self { genus, members }.canonicalize())
    }

    fn full_mask(genus: usize) -> u32 {
        (1u32 << (2 * genus + 2)) - 1
    }

    fn canonicalize(self) -> Self {
        let inf_bit = 1u32 << (2 * self.genus + 1);
        if self.members & inf_bit != 0 {
            Self {
                genus: self.genus,
                members: self.members ^ Self::full_mask(self.genus),
            }
        } else {
            self
        }
    }

    /// Canonical even subset directly from a member mask (used by enumeration).
    fn from_mask(genus: usize, mask: u32) -> Self {
        debug_assert_eq!(mask.count_ones() % 2, 0);
        Self {
            genus,
            members: mask,
        }
        .canonicalize()
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn cardinality(&self) -> usize {
        self.members.count_ones() as usize
    }

    pub fn contains(&self, l: BIndex) -> bool {
        self.members & l.bit(self.genus) != 0
    }

    pub fn members(&self) -> Vec<BIndex> {
        let mut v = Vec::new();
        for j in 1..=(2 * self.genus + 1) {
            if self.members & (1 << (j - 1)) != 0 {
                v.push(BIndex::Finite(j));
            }
        }
        if self.members & (1 << (2 * self.genus + 1)) != 0 {
            v.push(BIndex::Infinity);
        }
        v
    }

    /// Symmetric difference T o S = (T \ S) u (S \ T), canonicalized.
    pub fn sym_diff(&self, other: &Self) -> Self {
        debug_assert_eq!(self.genus, other.genus);
        Self::from_mask(self.genus, self.members ^ other.members)
    }

    /// Raw symmetric-difference cardinality #(T o S) without canonicalization.
    pub fn sym_diff_card(&self, other: &Self) -> usize {
        (self.members ^ other.members).count_ones() as usize
    }

    /// Enumerate all canonical even subsets (2^{2g} of them: even subsets of
    /// the 2g+1 finite labels).
    pub fn all_canonical_even(genus: usize) -> impl Iterator<Item = SubsetLabel> {
        let n_fin = 2 * genus + 1;
        (0u32..(1 << n_fin))
            .filter(|m| m.count_ones() % 2 == 0)
            .map(move |m| SubsetLabel { genus, members: m })
    }
}

/// The index set U = {g+1, ..., 2g+1} as a subset label is odd-cardinality and
/// therefore not a `SubsetLabel`; it is kept as a raw mask inside the
/// fundamental system and exposed through `u_subset_mask`.
///
/// An ordered azygetic (2g+2)-tuple m_1, ..., m_{2g+1}, m_oo together with the
/// distinguished index set U.
#[derive(Clone, Debug)]
pub struct FundamentalSystem {
    genus: usize,
    chars: Vec<Characteristic>,
    u_mask: u32,
}

impl FundamentalSystem {
    /// The standard special fundamental system:
    /// m_k = [s_k|e_k] (k=1..g), m_{g+k} = [s_{k-1}|e_k] (k=1..g),
    /// m_{2g+1} = [s_g|0], m_oo = [0|0], with U = {g+1, ..., 2g+1}.
    pub fn standard(genus: usize) -> Result<Self> {
        if genus == 0 || genus > MAX_GENUS {
            return Err(Error::InvalidGenus(genus, "genus must be in 1..=16"));
        }
        let mut chars = Vec::with_capacity(2 * genus + 2);
        for k in 1..=genus {
            chars.push(Characteristic::new(
                genus,
                Characteristic::s_mask(genus, k),
                Characteristic::e_mask(genus, k),
            )?);
        }
        for k in 1..=genus {
            chars.push(Characteristic::new(
                genus,
                Characteristic::s_mask(genus, k - 1),
                Characteristic::e_mask(genus, k),
            )?);
        }
        chars.push(Characteristic::new(
            genus,
            Characteristic::s_mask(genus, genus),
            0,
        )?);
        chars.push(Characteristic::zero(genus));
        let mut u_mask = 0u32;
        for j in (genus + 1)..=(2 * genus + 1) {
            u_mask |= 1 << (j - 1);
        }
        Ok(Self {
            genus,
            chars,
            u_mask,
        })
    }

    /// Build from an explicit ordered tuple; validates length, azygeticity and
    /// the parity pattern (first g odd, last g+2 even).
    pub fn from_chars(chars: Vec<Characteristic>, u_labels: &[usize]) -> Result<Self> {
        if chars.is_empty() {
            return Err(Error::InvalidInput("empty fundamental system".into()));
        }
        let genus = chars[0].genus();
        if chars.len() != 2 * genus + 2 {
            return Err(Error::LengthMismatch {
                expected: 2 * genus + 2,
                got: chars.len(),
            });
        }
        for m in &chars {
            if m.genus() != genus {
                return Err(Error::GenusMismatch(genus, m.genus()));
            }
        }
        for (i, m) in chars.iter().enumerate() {
            let want = if i < genus { Parity::Odd } else { Parity::Even };
            if m.parity() != want {
                return Err(Error::InvalidInput(format!(
                    "parity pattern broken at index {i}"
                )));
            }
        }
        if !is_azygetic_tuple(&chars)? {
            return Err(Error::InvalidInput("tuple is not azygetic".into()));
        }
        let mut u_mask = 0u32;
        for &j in u_labels {
            if j == 0 || j > 2 * genus + 1 {
                return Err(Error::InvalidInput(format!("U label {j} outside range")));
            }
            u_mask |= 1 << (j - 1);
        }
        Ok(Self {
            genus,
            chars,
            u_mask,
        })
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    /// m_j for a label j in B (1..=2g+1 or oo).
    pub fn char_at(&self, l: BIndex) -> &Characteristic {
        match l {
            BIndex::Finite(j) => &self.chars[j - 1],
            BIndex::Infinity => &self.chars[2 * self.genus + 1],
        }
    }

    /// The ordered tuple m_1, ..., m_{2g+1}, m_oo.
    pub fn chars(&self) -> &[Characteristic] {
        &self.chars
    }

    /// All labels of B in order 1, ..., 2g+1, oo.
    pub fn b_labels(&self) -> Vec<BIndex> {
        let mut v: Vec<BIndex> = (1..=(2 * self.genus + 1)).map(BIndex::Finite).collect();
        v.push(BIndex::Infinity);
        v
    }

    /// U as a raw bit mask over the finite labels.
    pub fn u_subset_mask(&self) -> u32 {
        self.u_mask
    }

    /// +1 if j is in U, -1 otherwise.
    pub fn epsilon_u(&self, l: BIndex) -> i32 {
        match l {
            BIndex::Finite(j) if self.u_mask & (1 << (j - 1)) != 0 => 1,
            _ => -1,
        }
    }

    /// #(T o U) for a canonical even subset T.
    pub fn sym_diff_card_with_u(&self, t: &SubsetLabel) -> usize {
        (t.members ^ self.u_mask).count_ones() as usize
    }
}

/// m_T = sum of m_j over j in T (mod-2 class; reduction signs discarded).
pub fn subset_to_char(t: &SubsetLabel, fs: &FundamentalSystem) -> Characteristic {
    let mut acc = Characteristic::zero(fs.genus());
    for l in t.members() {
        acc = acc.add(fs.char_at(l)).expect("same genus");
    }
    acc
}

/// Precomputed inverse of `subset_to_char`: the canonical even T with m_T = m.
pub struct SubsetTable {
    map: HashMap<Characteristic, SubsetLabel>,
}

impl SubsetTable {
    pub fn build(fs: &FundamentalSystem) -> Self {
        let mut map = HashMap::with_capacity(1 << (2 * fs.genus()));
        for t in SubsetLabel::all_canonical_even(fs.genus()) {
            map.insert(subset_to_char(&t, fs), t);
        }
        Self { map }
    }

    pub fn char_to_subset(&self, m: &Characteristic) -> Option<SubsetLabel> {
        self.map.get(m).copied()
    }

    pub fn is_bijective(&self, genus: usize) -> bool {
        self.map.len() == 1usize << (2 * genus)
    }
}

/// The unique canonical even T with m_T = m (table built per call; use
/// `SubsetTable` for repeated queries).
pub fn char_to_subset(m: &Characteristic, fs: &FundamentalSystem) -> Result<SubsetLabel> {
    SubsetTable::build(fs)
        .char_to_subset(m)
        .ok_or_else(|| Error::InvalidInput("no subset maps to this characteristic".into()))
}

/// Parity of m_T from the subset side: even iff (#(T o U) - g - 1)/2 is even.
pub fn subset_parity(t: &SubsetLabel, fs: &FundamentalSystem) -> Result<Parity> {
    let g = fs.genus() as i64;
    let d = fs.sym_diff_card_with_u(t) as i64 - g - 1;
    if d.rem_euclid(2) != 0 {
        return Err(Error::ParityFormulaInapplicable(d));
    }
    Ok(if (d / 2).rem_euclid(2) == 0 {
        Parity::Even
    } else {
        Parity::Odd
    })
}

/// All even m_T predicted to vanish on the (normalized) hyperelliptic locus:
/// those with #(T o U) != g+1. Sorted for determinism.
pub fn predicted_vanishing_set(genus: usize) -> Result<Vec<Characteristic>> {
    let fs = FundamentalSystem::standard(genus)?;
    let mut out = Vec::new();
    for t in SubsetLabel::all_canonical_even(genus) {
        if fs.sym_diff_card_with_u(&t) != genus + 1 && subset_parity(&t, &fs)? == Parity::Even {
            out.push(subset_to_char(&t, &fs));
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Combinatorial count behind `predicted_vanishing_set`:
/// 2^{g-1}(2^g+1) - C(2g+2, g+1)/2.
pub fn predicted_vanishing_count(genus: usize) -> usize {
    let evens = (1usize << (genus - 1)) * ((1usize << genus) + 1);
    let mut binom = 1usize;
    for i in 0..(genus + 1) {
        binom = binom * (2 * genus + 2 - i) / (i + 1);
    }
    evens - binom / 2
}

/// Which Varley-Debarre characteristic set to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarleyDebarreVariant {
    /// The explicitly listed n_1..n_10.
    ExplicitN,
    /// The ten [0|alpha] with alpha of Hamming weight 2 or 3.
    WeightTwoThree,
}

/// The two genus-4 Varley-Debarre vanishing sets.
pub fn varley_debarre_sets(variant: VarleyDebarreVariant) -> Result<Vec<Characteristic>> {
    let g = 4;
    match variant {
        VarleyDebarreVariant::ExplicitN => {
            let listed = [
                ("0000", "0000"),
                ("1010", "0000"),
                ("0101", "0000"),
                ("1111", "0000"),
                ("0101", "1010"),
                ("1010", "0101"),
                ("0000", "1010"),
                ("0000", "0101"),
                ("0000", "1111"),
                ("1111", "1111"),
            ];
            listed
                .iter()
                .map(|(e, d)| Characteristic::parse(&format!("{e}|{d}")))
                .collect()
        }
        VarleyDebarreVariant::WeightTwoThree => {
            let mut out = Vec::new();
            for alpha in 1u32..(1 << g) {
                let w = alpha.count_ones();
                if w == 2 || w == 3 {
                    out.push(Characteristic::new(g, 0, alpha)?);
                }
            }
            Ok(out)
        }
    }
}

/// Affine Z_2-span of a characteristic set, as masks eps | (delta << g).
fn affine_span_masks(set: &[Characteristic]) -> Vec<u32> {
    let g = set[0].genus();
    let base = set[0].eps() | (set[0].delta() << g);
    let dirs: Vec<u32> = set[1..]
        .iter()
        .map(|m| (m.eps() | (m.delta() << g)) ^ base)
        .collect();
    // Gaussian elimination over Z_2 to extract a basis.
    let mut basis: Vec<u32> = Vec::new();
    for mut v in dirs {
        for b in &basis {
            v = v.min(v ^ b);
        }
        if v != 0 {
            basis.push(v);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    let mut span = vec![0u32];
    for b in &basis {
        let mut next = span.clone();
        for s in &span {
            next.push(s ^ b);
        }
        span = next;
    }
    span.iter().map(|s| s ^ base).collect()
}

/// The six characteristics complementary to the Varley-Debarre ten inside
/// the affine span, sorted; their mod-2 sum is asserted by tests to vanish.
pub fn varley_debarre_complement(set: &[Characteristic]) -> Result<Vec<Characteristic>> {
    let g = set[0].genus();
    let span = affine_span_masks(set);
    let in_set: Vec<u32> = set.iter().map(|m| m.eps() | (m.delta() << g)).collect();
    let mut out = Vec::new();
    for v in span {
        if !in_set.contains(&v) {
            out.push(Characteristic::new(g, v & ((1 << g) - 1), v >> g)?);
        }
    }
    out.sort();
    Ok(out)
}
