//! Finite groups given by multiplication tables, normal forms for words in
//! the free product `A_1 * ... * A_n * F_k`, and the signature-level formulas
//! (dimension, edge number, number of ends).

use std::cmp::Ordering;
use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("invalid letter: {0}")]
    InvalidLetter(String),
    #[error("unsupported signature: {0}")]
    UnsupportedSignature(String),
    #[error("invalid group table: {0}")]
    InvalidTable(String),
}

/// A finite group stored as a full multiplication table. Element 0 is the identity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FiniteGroupTable {
    order: usize,
    product: Vec<usize>,
    inverse: Vec<usize>,
}

impl FiniteGroupTable {
    /// The cyclic group of order `m`, element `i` standing for the `i`-th power of a generator.
    pub fn cyclic(m: usize) -> Result<Self, AlgebraError> {
        if m == 0 {
            return Err(AlgebraError::InvalidTable("cyclic group of order 0".into()));
        }
        let rows = (0..m)
            .map(|i| (0..m).map(|j| (i + j) % m).collect())
            .collect();
        Self::from_rows(rows)
    }

    /// The dihedral group of order `2m`; element `i + m*j` is `r^i s^j`.
    pub fn dihedral(m: usize) -> Result<Self, AlgebraError> {
        if m < 2 {
            return Err(AlgebraError::InvalidTable("dihedral group needs m >= 2".into()));
        }
        let n = 2 * m;
        let mut rows = vec![vec![0; n]; n];
        for (x, row) in rows.iter_mut().enumerate() {
            let (a, b) = (x % m, x / m);
            for (y, cell) in row.iter_mut().enumerate() {
                let (c, d) = (y % m, y / m);
                let rot = if b == 0 { (a + c) % m } else { (a + m - c) % m };
                *cell = rot + m * ((b + d) % 2);
            }
        }
        Self::from_rows(rows)
    }

    /// Validates a multiplication table: square, identity at index 0, a latin
    /// square, and associative.
    pub fn from_rows(rows: Vec<Vec<usize>>) -> Result<Self, AlgebraError> {
        let m = rows.len();
        if m == 0 {
            return Err(AlgebraError::InvalidTable("empty table".into()));
        }
        let mut product = Vec::with_capacity(m * m);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(AlgebraError::InvalidTable(format!(
                    "row {i} has {} entries, expected {m}",
                    row.len()
                )));
            }
            for &x in row {
                if x >= m {
                    return Err(AlgebraError::InvalidTable(format!("entry {x} out of range")));
                }
                product.push(x);
            }
        }
        for i in 0..m {
            if product[i] != i || product[i * m] != i {
                return Err(AlgebraError::InvalidTable("element 0 is not the identity".into()));
            }
        }
        let mut inverse = vec![usize::MAX; m];
        for i in 0..m {
            let mut seen_row = vec![false; m];
            let mut seen_col = vec![false; m];
            for j in 0..m {
                let r = product[i * m + j];
                let c = product[j * m + i];
                if seen_row[r] || seen_col[c] {
                    return Err(AlgebraError::InvalidTable("not a latin square".into()));
                }
                seen_row[r] = true;
                seen_col[c] = true;
                if r == 0 {
                    inverse[i] = j;
                }
            }
        }
        for a in 0..m {
            for b in 0..m {
                let ab = product[a * m + b];
                for c in 0..m {
                    if product[ab * m + c] != product[a * m + product[b * m + c]] {
                        return Err(AlgebraError::InvalidTable(format!(
                            "not associative at ({a},{b},{c})"
                        )));
                    }
                }
            }
        }
        Ok(Self { order: m, product, inverse })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.product[a * self.order + b]
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn rows(&self) -> Vec<Vec<usize>> {
        self.product.chunks(self.order).map(<[usize]>::to_vec).collect()
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (0..a).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    /// `x -> c x c^{-1}`.
    pub fn conjugate(&self, c: usize, x: usize) -> usize {
        self.mul(self.mul(c, x), self.inv(c))
    }

    fn generators(&self) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut span = vec![false; self.order];
        span[0] = true;
        for g in 1..self.order {
            if !span[g] {
                gens.push(g);
                span = self.closure(&gens);
            }
        }
        gens
    }

    fn closure(&self, gens: &[usize]) -> Vec<bool> {
        let mut seen = vec![false; self.order];
        seen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.mul(x, g);
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        seen
    }

    /// All automorphisms, each as a permutation of element indices, sorted.
    pub fn automorphisms(&self) -> Vec<Vec<usize>> {
        let gens = self.generators();
        let orders: Vec<usize> = gens.iter().map(|&g| self.element_order(g)).collect();
        let candidates: Vec<Vec<usize>> = orders
            .iter()
            .map(|&o| (0..self.order).filter(|&x| self.element_order(x) == o).collect())
            .collect();
        let mut out = Vec::new();
        let mut choice = vec![0usize; gens.len()];
        loop {
            let images: Vec<usize> = choice.iter().zip(&candidates).map(|(&c, v)| v[c]).collect();
            if let Some(map) = self.extend_hom(&gens, &images) {
                out.push(map);
            }
            let mut i = 0;
            loop {
                if i == choice.len() {
                    out.sort();
                    out.dedup();
                    return out;
                }
                choice[i] += 1;
                if choice[i] < candidates[i].len() {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
        }
    }

    fn extend_hom(&self, gens: &[usize], images: &[usize]) -> Option<Vec<usize>> {
        let mut map = vec![usize::MAX; self.order];
        map[0] = 0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for (&g, &h) in gens.iter().zip(images) {
                let y = self.mul(x, g);
                let fy = self.mul(map[x], h);
                if map[y] == usize::MAX {
                    map[y] = fy;
                    queue.push_back(y);
                } else if map[y] != fy {
                    return None;
                }
            }
        }
        let mut hit = vec![false; self.order];
        for &v in &map {
            if hit[v] {
                return None;
            }
            hit[v] = true;
        }
        for a in 0..self.order {
            for b in 0..self.order {
                if map[self.mul(a, b)] != self.mul(map[a], map[b]) {
                    return None;
                }
            }
        }
        Some(map)
    }
}

/// The free product data: finite factors (in order) and the free rank.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FactorSignature {
    factors: Vec<FiniteGroupTable>,
    names: Vec<String>,
    free_rank: usize,
}

impl FactorSignature {
    pub fn new(factors: Vec<FiniteGroupTable>, free_rank: usize) -> Result<Self, AlgebraError> {
        let names = (1..=factors.len()).map(|i| format!("A{i}")).collect();
        Self::with_names(factors, names, free_rank)
    }

    pub fn with_names(
        factors: Vec<FiniteGroupTable>,
        names: Vec<String>,
        free_rank: usize,
    ) -> Result<Self, AlgebraError> {
        if names.len() != factors.len() {
            return Err(AlgebraError::UnsupportedSignature("one name per factor".into()));
        }
        if let Some(i) = factors.iter().position(|f| f.order() < 2) {
            return Err(AlgebraError::UnsupportedSignature(format!(
                "factor {} is trivial",
                names[i]
            )));
        }
        Ok(Self { factors, names, free_rank })
    }

    /// Convenience constructor with cyclic factors of the given orders.
    pub fn cyclic(orders: &[usize], free_rank: usize) -> Result<Self, AlgebraError> {
        let factors = orders
            .iter()
            .map(|&m| FiniteGroupTable::cyclic(m))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(factors, free_rank)
    }

    pub fn n(&self) -> usize {
        self.factors.len()
    }

    pub fn k(&self) -> usize {
        self.free_rank
    }

    pub fn factor(&self, i: usize) -> &FiniteGroupTable {
        &self.factors[i]
    }

    pub fn factors(&self) -> &[FiniteGroupTable] {
        &self.factors
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn factor_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// A letter of the free product alphabet. The derived order puts every
/// finite-factor letter before every free letter, which is the total order used
/// for canonical rotations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Letter {
    Factor { factor: usize, elem: usize },
    Free { gen: usize, inverse: bool },
}

impl Letter {
    pub fn free(gen: usize) -> Self {
        Letter::Free { gen, inverse: false }
    }

    pub fn free_inv(gen: usize) -> Self {
        Letter::Free { gen, inverse: true }
    }

    pub fn factor(factor: usize, elem: usize) -> Self {
        Letter::Factor { factor, elem }
    }

    pub fn validate(&self, sig: &FactorSignature) -> Result<(), AlgebraError> {
        match *self {
            Letter::Factor { factor, elem } => {
                if factor >= sig.n() {
                    Err(AlgebraError::InvalidLetter(format!("no factor A{}", factor + 1)))
                } else if elem == 0 {
                    Err(AlgebraError::InvalidLetter(format!("A{}:0 is the identity", factor + 1)))
                } else if elem >= sig.factor(factor).order() {
                    Err(AlgebraError::InvalidLetter(format!(
                        "element {elem} out of range for A{}",
                        factor + 1
                    )))
                } else {
                    Ok(())
                }
            }
            Letter::Free { gen, .. } => {
                if gen >= sig.k() {
                    Err(AlgebraError::InvalidLetter(format!("no free generator s{}", gen + 1)))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn inverse(&self, sig: &FactorSignature) -> Letter {
        match *self {
            Letter::Factor { factor, elem } => Letter::Factor {
                factor,
                elem: sig.factor(factor).inv(elem),
            },
            Letter::Free { gen, inverse } => Letter::Free { gen, inverse: !inverse },
        }
    }

    pub fn parse(token: &str) -> Result<Letter, AlgebraError> {
        let bad = || AlgebraError::InvalidLetter(format!("cannot parse letter `{token}`"));
        if let Some(rest) = token.strip_prefix('A') {
            let (f, e) = rest.split_once(':').ok_or_else(bad)?;
            let f: usize = f.parse().map_err(|_| bad())?;
            let e: usize = e.parse().map_err(|_| bad())?;
            if f == 0 {
                return Err(bad());
            }
            Ok(Letter::Factor { factor: f - 1, elem: e })
        } else if let Some(rest) = token.strip_prefix('s') {
            let (g, inverse) = match rest.strip_suffix("^-1") {
                Some(g) => (g, true),
                None => (rest, false),
            };
            let g: usize = g.parse().map_err(|_| bad())?;
            if g == 0 {
                return Err(bad());
            }
            Ok(Letter::Free { gen: g - 1, inverse })
        } else {
            Err(bad())
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Letter::Factor { factor, elem } => write!(f, "A{}:{}", factor + 1, elem),
            Letter::Free { gen, inverse: false } => write!(f, "s{}", gen + 1),
            Letter::Free { gen, inverse: true } => write!(f, "s{}^-1", gen + 1),
        }
    }
}

/// An element of the free product in normal form.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word(Vec<Letter>);

/// Appends `l` to a normal-form stack, multiplying or cancelling at the end.
fn push_reduced(sig: &FactorSignature, out: &mut Vec<Letter>, l: Letter) {
    match (out.last().copied(), l) {
        (
            Some(Letter::Factor { factor: f1, elem: e1 }),
            Letter::Factor { factor: f2, elem: e2 },
        ) if f1 == f2 => {
            let p = sig.factor(f1).mul(e1, e2);
            out.pop();
            if p != 0 {
                out.push(Letter::Factor { factor: f1, elem: p });
            }
        }
        (Some(Letter::Free { gen: g1, inverse: i1 }), Letter::Free { gen: g2, inverse: i2 })
            if g1 == g2 && i1 != i2 =>
        {
            out.pop();
        }
        _ => out.push(l),
    }
}

/// Normal form of a raw letter sequence.
pub fn reduce_word(sig: &FactorSignature, letters: &[Letter]) -> Result<Word, AlgebraError> {
    for l in letters {
        l.validate(sig)?;
    }
    let mut out = Vec::with_capacity(letters.len());
    for &l in letters {
        push_reduced(sig, &mut out, l);
    }
    Ok(Word(out))
}

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn letter(l: Letter) -> Self {
        Word(vec![l])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Builds a word from letters that are already valid for `sig`, reducing them.
    pub fn from_letters(sig: &FactorSignature, letters: &[Letter]) -> Word {
        let mut out = Vec::with_capacity(letters.len());
        for &l in letters {
            push_reduced(sig, &mut out, l);
        }
        Word(out)
    }

    pub fn mul(&self, sig: &FactorSignature, other: &Word) -> Word {
        let mut out = self.0.clone();
        for &l in &other.0 {
            push_reduced(sig, &mut out, l);
        }
        Word(out)
    }

    pub fn inverse(&self, sig: &FactorSignature) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse(sig)).collect())
    }

    pub fn parse(sig: &FactorSignature, text: &str) -> Result<Word, AlgebraError> {
        let letters = text
            .split(|c: char| c.is_whitespace() || c == '.')
            .filter(|t| !t.is_empty() && *t != "1")
            .map(Letter::parse)
            .collect::<Result<Vec<_>, _>>()?;
        reduce_word(sig, &letters)
    }

    /// Dotted serialization, usable as a single token (`1` for the identity).
    pub fn key(&self) -> String {
        if self.0.is_empty() {
            return "1".into();
        }
        self.0.iter().map(ToString::to_string).collect::<Vec<_>>().join(".")
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// A cyclically reduced word in its least rotation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CyclicWord(Vec<Letter>);

impl CyclicWord {
    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Conjugacy classes of length at least two are exactly the infinite-order ones.
    pub fn is_hyperbolic(&self) -> bool {
        !matches!(self.0.as_slice(), [] | [Letter::Factor { .. }])
    }
}

pub fn cyclic_normal_form(sig: &FactorSignature, w: &Word) -> CyclicWord {
    let mut v: VecDeque<Letter> = w.0.iter().copied().collect();
    while v.len() >= 2 {
        let first = v[0];
        let last = v[v.len() - 1];
        match (last, first) {
            (Letter::Factor { factor: f1, elem: e1 }, Letter::Factor { factor: f2, elem: e2 })
                if f1 == f2 =>
            {
                v.pop_back();
                v.pop_front();
                let p = sig.factor(f1).mul(e1, e2);
                if p != 0 {
                    v.push_front(Letter::Factor { factor: f1, elem: p });
                }
            }
            (Letter::Free { gen: g1, inverse: i1 }, Letter::Free { gen: g2, inverse: i2 })
                if g1 == g2 && i1 != i2 =>
            {
                v.pop_back();
                v.pop_front();
            }
            _ => break,
        }
    }
    let v: Vec<Letter> = v.into_iter().collect();
    CyclicWord(least_rotation(&v))
}

/// Lexicographically least rotation (quadratic scan; words here are short).
pub fn least_rotation<T: Ord + Clone>(v: &[T]) -> Vec<T> {
    let n = v.len();
    if n == 0 {
        return Vec::new();
    }
    let mut best = 0;
    for r in 1..n {
        let cmp = (0..n)
            .map(|i| v[(r + i) % n].cmp(&v[(best + i) % n]))
            .find(|c| *c != Ordering::Equal)
            .unwrap_or(Ordering::Equal);
        if cmp == Ordering::Less {
            best = r;
        }
    }
    (0..n).map(|i| v[(best + i) % n].clone()).collect()
}

/// The standard word set: `a_i a_j` (i < j, nontrivial), `s_i a_j` and `a_j s_i`
/// (all `a_j`, the identity giving `s_i`), and `s_i s_j`, `s_i s_j^{-1}` for
/// `i != j`. Duplicates are removed by word equality; first-occurrence order is kept.
pub fn build_standard_w(sig: &FactorSignature) -> Result<Vec<Word>, AlgebraError> {
    let (n, k) = (sig.n(), sig.k());
    if n == 0 {
        return Err(AlgebraError::UnsupportedSignature(
            "at least one finite factor is required".into(),
        ));
    }
    if n == 1 && k <= 1 {
        return Err(AlgebraError::UnsupportedSignature(format!(
            "A1{} has finite outer automorphism group",
            if k == 1 { "*F1" } else { "" }
        )));
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut add = |w: Word| {
        if seen.insert(w.clone()) {
            out.push(w);
        }
    };
    for i in 0..n {
        for j in i + 1..n {
            for a in 1..sig.factor(i).order() {
                for b in 1..sig.factor(j).order() {
                    add(Word(vec![Letter::factor(i, a), Letter::factor(j, b)]));
                }
            }
        }
    }
    for i in 0..k {
        for j in 0..n {
            for a in 0..sig.factor(j).order() {
                let s = Letter::free(i);
                if a == 0 {
                    add(Word(vec![s]));
                } else {
                    let x = Letter::factor(j, a);
                    add(Word(vec![s, x]));
                    add(Word(vec![x, s]));
                }
            }
        }
    }
    for i in 0..k {
        for j in 0..k {
            if i != j {
                add(Word(vec![Letter::free(i), Letter::free(j)]));
                add(Word(vec![Letter::free(i), Letter::free_inv(j)]));
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Ends {
    Zero,
    Infinite,
    One,
}

impl fmt::Display for Ends {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ends::Zero => "ZERO",
            Ends::Infinite => "INFINITE",
            Ends::One => "ONE",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub n: usize,
    pub k: usize,
    pub dim_l: i64,
    pub edge_number: i64,
    pub ends: Ends,
}

pub fn classify(n: usize, k: usize) -> Classification {
    let (ni, ki) = (n as i64, k as i64);
    let dim_l = if n >= 2 { 2 * ki + ni - 2 } else { (2 * ki + ni - 3).max(0) };
    let ends = if (n <= 1 && k <= 1) || (n, k) == (2, 0) {
        Ends::Zero
    } else if matches!((n, k), (3, 0) | (2, 1) | (0, 2)) {
        Ends::Infinite
    } else {
        Ends::One
    };
    Classification { n, k, dim_l, edge_number: 2 * ki + ni - 1, ends }
}

pub fn classify_signature(sig: &FactorSignature) -> Classification {
    classify(sig.n(), sig.k())
}
