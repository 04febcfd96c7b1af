//! Automorphisms of `F = A1 * A2 * <t>` and machine verification of a
//! generator/relation catalog for `Out(F)`, including the involutions `θ` on
//! each holomorph and `θ̃` on `F`.
//!
//! Automorphisms act on the left and `compose(φ, ψ) = φ ∘ ψ`. A relation
//! `x_1 ... x_r = y_1 ... y_s` is read as an equality of composites.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{AlgebraError, FactorSignature, FiniteGroupTable, Letter, Word};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PresentationError {
    #[error("signature mismatch")]
    SignatureMismatch,
    #[error("relation {item} failed: {relation}\n{trace}")]
    RelationFailed { item: String, relation: String, trace: String },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// An automorphism of `A1 * A2 * <t>` stored by the images of every element
/// of each factor and of `t`, together with the images of its inverse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FPAutomorphism {
    sig: FactorSignature,
    fwd: Images,
    inv: Images,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Images {
    factors: [Vec<Word>; 2],
    t: Word,
}

impl Images {
    fn identity(sig: &FactorSignature) -> Self {
        let f = |i: usize| {
            (0..sig.factor(i).order())
                .map(|e| if e == 0 { Word::identity() } else { Word::letter(Letter::factor(i, e)) })
                .collect()
        };
        Images { factors: [f(0), f(1)], t: Word::letter(Letter::free(0)) }
    }

    fn apply(&self, sig: &FactorSignature, w: &Word) -> Word {
        let mut out = Word::identity();
        for l in w.letters() {
            let img = match *l {
                Letter::Factor { factor, elem } => self.factors[factor][elem].clone(),
                Letter::Free { inverse: false, .. } => self.t.clone(),
                Letter::Free { inverse: true, .. } => self.t.inverse(sig),
            };
            out = out.mul(sig, &img);
        }
        out
    }

    /// `self ∘ other`.
    fn after(&self, sig: &FactorSignature, other: &Images) -> Images {
        Images {
            factors: [0, 1].map(|i| other.factors[i].iter().map(|w| self.apply(sig, w)).collect()),
            t: self.apply(sig, &other.t),
        }
    }
}

fn t_letter() -> Letter {
    Letter::free(0)
}

fn t_word() -> Word {
    Word::letter(t_letter())
}

fn elem(i: usize, e: usize) -> Word {
    if e == 0 {
        Word::identity()
    } else {
        Word::letter(Letter::factor(i, e))
    }
}

impl FPAutomorphism {
    pub fn identity(sig: &FactorSignature) -> Result<Self, PresentationError> {
        if sig.n() != 2 || sig.k() != 1 {
            return Err(PresentationError::SignatureMismatch);
        }
        let id = Images::identity(sig);
        Ok(Self { sig: sig.clone(), fwd: id.clone(), inv: id })
    }

    pub fn sig(&self) -> &FactorSignature {
        &self.sig
    }

    pub fn apply(&self, w: &Word) -> Word {
        self.fwd.apply(&self.sig, w)
    }

    pub fn image_of_t(&self) -> &Word {
        &self.fwd.t
    }

    pub fn image_of(&self, factor: usize, e: usize) -> &Word {
        &self.fwd.factors[factor][e]
    }

    pub fn inverse(&self) -> Self {
        Self { sig: self.sig.clone(), fwd: self.inv.clone(), inv: self.fwd.clone() }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Result<Self, PresentationError> {
        if self.sig != other.sig {
            return Err(PresentationError::SignatureMismatch);
        }
        Ok(Self {
            sig: self.sig.clone(),
            fwd: self.fwd.after(&self.sig, &other.fwd),
            inv: other.inv.after(&self.sig, &self.inv),
        })
    }

    fn generators(&self) -> Vec<Word> {
        let mut g = vec![t_word()];
        for i in 0..2 {
            g.extend((1..self.sig.factor(i).order()).map(|e| elem(i, e)));
        }
        g
    }

    /// Checks that the factor images are homomorphisms and that the stored
    /// inverse really inverts on generators.
    pub fn is_consistent(&self) -> bool {
        for i in 0..2 {
            let a = self.sig.factor(i);
            for x in 0..a.order() {
                for y in 0..a.order() {
                    let lhs = self.fwd.factors[i][a.mul(x, y)].clone();
                    let rhs = self.fwd.factors[i][x].mul(&self.sig, &self.fwd.factors[i][y]);
                    if lhs != rhs {
                        return false;
                    }
                }
            }
        }
        self.generators().iter().all(|g| {
            self.inv.apply(&self.sig, &self.fwd.apply(&self.sig, g)) == *g
                && self.fwd.apply(&self.sig, &self.inv.apply(&self.sig, g)) == *g
        })
    }

    /// Returns `g` with `self(x) = g x g^{-1}` on every generator, if any.
    pub fn inner_conjugator(&self) -> Option<Word> {
        let sig = &self.sig;
        let img = self.fwd.t.letters();
        // self(t) must be u t u^{-1} with u not ending in t^{±1}.
        if img.len().is_multiple_of(2) {
            return None;
        }
        let h = img.len() / 2;
        if img[h] != t_letter() {
            return None;
        }
        let u = Word::from_letters(sig, &img[..h]);
        if Word::from_letters(sig, &img[h + 1..]) != u.inverse(sig) {
            return None;
        }
        // g = u t^m; read m off the image of a nontrivial element of A1.
        let a = elem(0, 1);
        let probe = u.inverse(sig).mul(sig, &self.fwd.apply(sig, &a)).mul(sig, &u);
        let ls = probe.letters();
        if ls.len().is_multiple_of(2) || ls[ls.len() / 2] != Letter::factor(0, 1) {
            return None;
        }
        let m = ls.len() / 2;
        let power: Vec<Letter> = ls[..m].to_vec();
        let g = u.mul(sig, &Word::from_letters(sig, &power));
        let gi = g.inverse(sig);
        self.generators()
            .iter()
            .all(|x| self.apply(x) == g.mul(sig, x).mul(sig, &gi))
            .then_some(g)
    }

    pub fn is_inner(&self) -> bool {
        self.inner_conjugator().is_some()
    }

    pub fn equal_in_aut(&self, other: &Self) -> bool {
        self.fwd == other.fwd
    }

    /// True iff `self ∘ other^{-1}` is inner.
    pub fn equal_in_out(&self, other: &Self) -> Result<bool, PresentationError> {
        Ok(self.compose(&other.inverse())?.is_inner())
    }

    /// One-line rendering of the images of `t` and of a generator of each factor.
    pub fn describe(&self) -> String {
        let mut parts = vec![format!("t -> {}", render(&self.fwd.t))];
        for i in 0..2 {
            for e in 1..self.sig.factor(i).order() {
                parts.push(format!("a{}:{} -> {}", i + 1, e, render(&self.fwd.factors[i][e])));
            }
        }
        parts.join(", ")
    }
}

/// Renders a word of `A1 * A2 * <t>` with `t` for the free letter.
pub fn render(w: &Word) -> String {
    if w.is_empty() {
        return "1".into();
    }
    w.letters()
        .iter()
        .map(|l| match *l {
            Letter::Factor { factor, elem } => format!("a{}:{}", factor + 1, elem),
            Letter::Free { inverse: false, .. } => "t".into(),
            Letter::Free { inverse: true, .. } => "t^-1".into(),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// A named generator. Factor indices are 0-based; `gamma` is an element of
/// `A_i` and `aut` a permutation of `A_i` that is an automorphism.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Gen {
    Phi { i: usize, aut: Vec<usize> },
    /// Partial conjugation of `A_j` by `gamma ∈ A_i`: `a_j -> γ^{-1} a_j γ`.
    Alpha { i: usize, gamma: usize },
    /// `a_i -> t^{-1} a_i t`.
    AlphaT { i: usize },
    Rho { i: usize, gamma: usize },
    Lambda { i: usize, gamma: usize },
    Tau,
    ThetaTilde,
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gen::Phi { i, aut } => write!(f, "phi{}{:?}", i + 1, aut),
            Gen::Alpha { i, gamma } => write!(f, "alpha{}{}({})", i + 1, 2 - i, gamma),
            Gen::AlphaT { i } => write!(f, "alpha_t{}", i + 1),
            Gen::Rho { i, gamma } => write!(f, "rho{}({})", i + 1, gamma),
            Gen::Lambda { i, gamma } => write!(f, "lambda{}({})", i + 1, gamma),
            Gen::Tau => write!(f, "tau"),
            Gen::ThetaTilde => write!(f, "theta~"),
        }
    }
}

/// The pair of factor tables that fixes `F`.
#[derive(Clone, Debug)]
pub struct FreeProduct {
    sig: FactorSignature,
}

impl FreeProduct {
    pub fn new(a1: FiniteGroupTable, a2: FiniteGroupTable) -> Result<Self, PresentationError> {
        Ok(Self { sig: FactorSignature::new(vec![a1, a2], 1)? })
    }

    pub fn sig(&self) -> &FactorSignature {
        &self.sig
    }

    pub fn table(&self, i: usize) -> &FiniteGroupTable {
        self.sig.factor(i)
    }

    pub fn identity(&self) -> FPAutomorphism {
        FPAutomorphism::identity(&self.sig).expect("two factors and rank one")
    }

    fn build(&self, fwd: impl Fn(&mut Images), inv: impl Fn(&mut Images)) -> FPAutomorphism {
        let mut a = Images::identity(&self.sig);
        let mut b = a.clone();
        fwd(&mut a);
        inv(&mut b);
        FPAutomorphism { sig: self.sig.clone(), fwd: a, inv: b }
    }

    fn conj_factor(&self, img: &mut Images, j: usize, g: &Word) {
        let s = &self.sig;
        let gi = g.inverse(s);
        for e in 1..s.factor(j).order() {
            img.factors[j][e] = gi.mul(s, &elem(j, e)).mul(s, g);
        }
    }

    pub fn generator(&self, g: &Gen) -> FPAutomorphism {
        let s = &self.sig;
        let t = t_word();
        match g {
            Gen::Phi { i, aut } => {
                let a = s.factor(*i);
                let mut back = vec![0; a.order()];
                for (x, &y) in aut.iter().enumerate() {
                    back[y] = x;
                }
                self.build(
                    |m| m.factors[*i] = aut.iter().map(|&y| elem(*i, y)).collect(),
                    |m| m.factors[*i] = back.iter().map(|&y| elem(*i, y)).collect(),
                )
            }
            Gen::Alpha { i, gamma } => {
                let j = 1 - i;
                let c = elem(*i, *gamma);
                let ci = elem(*i, s.factor(*i).inv(*gamma));
                self.build(|m| self.conj_factor(m, j, &c), |m| self.conj_factor(m, j, &ci))
            }
            Gen::AlphaT { i } => {
                let ti = t.inverse(s);
                self.build(|m| self.conj_factor(m, *i, &t), |m| self.conj_factor(m, *i, &ti))
            }
            Gen::Rho { i, gamma } => {
                let g = elem(*i, *gamma);
                let gi = g.inverse(s);
                self.build(|m| m.t = t.mul(s, &g), |m| m.t = t.mul(s, &gi))
            }
            Gen::Lambda { i, gamma } => {
                let g = elem(*i, *gamma);
                let gi = g.inverse(s);
                self.build(|m| m.t = g.mul(s, &t), |m| m.t = gi.mul(s, &t))
            }
            Gen::Tau => {
                let ti = t.inverse(s);
                self.build(|m| m.t = ti.clone(), |m| m.t = ti.clone())
            }
            Gen::ThetaTilde => self.generator(&Gen::Tau).compose(&self.generator(&Gen::AlphaT { i: 1 })).unwrap(),
        }
    }

    /// Composite of a word in generators, leftmost factor applied last.
    pub fn eval(&self, word: &[(Gen, bool)]) -> FPAutomorphism {
        word.iter().fold(self.identity(), |acc, (g, inv)| {
            let a = self.generator(g);
            acc.compose(&if *inv { a.inverse() } else { a }).unwrap()
        })
    }

    /// The automorphism `x -> γ^{-1} x γ` of `A_i` as a permutation.
    pub fn inner_aut(&self, i: usize, gamma: usize) -> Vec<usize> {
        let a = self.table(i);
        (0..a.order()).map(|x| a.conjugate(a.inv(gamma), x)).collect()
    }
}

/// One instantiated relation `lhs = rhs`.
#[derive(Clone, Debug)]
pub struct RelationInstance {
    pub item: String,
    pub lhs: Vec<(Gen, bool)>,
    pub rhs: Vec<(Gen, bool)>,
}

fn show(word: &[(Gen, bool)]) -> String {
    if word.is_empty() {
        return "1".into();
    }
    word.iter()
        .map(|(g, inv)| if *inv { format!("{g}^-1") } else { g.to_string() })
        .collect::<Vec<_>>()
        .join(" ")
}

impl RelationInstance {
    pub fn text(&self) -> String {
        format!("{} = {}", show(&self.lhs), show(&self.rhs))
    }

    pub fn check(&self, fp: &FreeProduct) -> Result<(), PresentationError> {
        let l = fp.eval(&self.lhs);
        let r = fp.eval(&self.rhs);
        if l.equal_in_out(&r)? {
            return Ok(());
        }
        Err(PresentationError::RelationFailed {
            item: self.item.clone(),
            relation: self.text(),
            trace: format!(
                "  lhs: {}\n  rhs: {}\n  lhs∘rhs^-1: {}",
                l.describe(),
                r.describe(),
                l.compose(&r.inverse())?.describe()
            ),
        })
    }
}

fn g(x: Gen) -> (Gen, bool) {
    (x, false)
}

fn gi(x: Gen) -> (Gen, bool) {
    (x, true)
}

fn rel(item: &str, lhs: Vec<(Gen, bool)>, rhs: Vec<(Gen, bool)>) -> RelationInstance {
    RelationInstance { item: item.into(), lhs, rhs }
}

/// Every instance of the catalog relations, in catalog order, over all
/// parameter values. Items are keyed `0`–`5`, `12`–`16`, `19`–`23`.
pub fn catalog(fp: &FreeProduct) -> Vec<RelationInstance> {
    use Gen::*;
    let auts = [fp.table(0).automorphisms(), fp.table(1).automorphisms()];
    let elems = |i: usize| 0..fp.table(i).order();
    let phi = |i: usize, a: &Vec<usize>| Phi { i, aut: a.clone() };
    let mut out = Vec::new();

    for i in 0..2 {
        for c in elems(i) {
            let lhs = vec![
                g(phi(i, &fp.inner_aut(i, c))),
                g(Alpha { i, gamma: c }),
                g(Rho { i, gamma: c }),
                gi(Lambda { i, gamma: c }),
            ];
            out.push(rel("0", lhs, vec![]));
        }
    }
    out.push(rel("0", vec![g(AlphaT { i: 0 }), g(AlphaT { i: 1 })], vec![]));

    for a in &auts[0] {
        for b in &auts[1] {
            out.push(rel("1", vec![g(phi(0, a)), g(phi(1, b))], vec![g(phi(1, b)), g(phi(0, a))]));
        }
    }
    for i in 0..2 {
        let j = 1 - i;
        for a in &auts[i] {
            out.push(rel("2", vec![g(phi(i, a)), g(AlphaT { i: j })], vec![g(AlphaT { i: j }), g(phi(i, a))]));
        }
    }
    for i in 0..2 {
        for a in &auts[i] {
            for c in elems(i) {
                out.push(rel(
                    "3",
                    vec![g(phi(i, a)), g(Alpha { i, gamma: c })],
                    vec![g(Alpha { i, gamma: a[c] }), g(phi(i, a))],
                ));
            }
        }
    }
    out.push(rel("4", vec![g(AlphaT { i: 0 }), g(AlphaT { i: 1 })], vec![g(AlphaT { i: 1 }), g(AlphaT { i: 0 })]));
    for i in 0..2 {
        let j = 1 - i;
        for c in elems(i) {
            out.push(rel(
                "5",
                vec![g(AlphaT { i }), g(Alpha { i, gamma: c }), gi(AlphaT { i })],
                vec![gi(AlphaT { i: j }), g(Alpha { i, gamma: c }), g(AlphaT { i: j })],
            ));
        }
    }

    for i in 0..2 {
        for j in 0..2 {
            for c in elems(i) {
                for d in elems(j) {
                    out.push(rel(
                        "12",
                        vec![g(Lambda { i, gamma: c }), g(Rho { i: j, gamma: d })],
                        vec![g(Rho { i: j, gamma: d }), g(Lambda { i, gamma: c })],
                    ));
                }
            }
        }
        for c in elems(i) {
            let ci = fp.table(i).inv(c);
            out.push(rel("12", vec![g(Tau), g(Lambda { i, gamma: c })], vec![g(Rho { i, gamma: ci }), g(Tau)]));
        }
    }
    for i in 0..2 {
        for c in elems(i) {
            out.push(rel("13", vec![g(Alpha { i, gamma: c }), g(Tau)], vec![g(Tau), g(Alpha { i, gamma: c })]));
        }
    }
    for i in 0..2 {
        out.push(rel("14", vec![g(AlphaT { i }), g(Tau)], vec![g(Tau), gi(AlphaT { i })]));
    }
    for i in 0..2 {
        let j = 1 - i;
        for c in elems(i) {
            for a in &auts[j] {
                out.push(rel(
                    "15",
                    vec![g(Rho { i, gamma: c }), g(phi(j, a))],
                    vec![g(phi(j, a)), g(Rho { i, gamma: c })],
                ));
            }
        }
    }
    for i in 0..2 {
        for a in &auts[i] {
            for c in elems(i) {
                out.push(rel(
                    "16",
                    vec![g(Rho { i, gamma: a[c] }), g(phi(i, a))],
                    vec![g(phi(i, a)), g(Rho { i, gamma: c })],
                ));
            }
        }
    }

    for i in 0..2 {
        let j = 1 - i;
        for c in elems(i) {
            out.push(rel(
                "19",
                vec![g(Rho { i, gamma: c }), g(Alpha { i, gamma: c })],
                vec![g(Alpha { i, gamma: c }), g(Rho { i, gamma: c })],
            ));
            out.push(rel(
                "20",
                vec![g(Rho { i, gamma: c }), g(AlphaT { i: j })],
                vec![g(AlphaT { i: j }), g(Rho { i, gamma: c }), g(Alpha { i, gamma: c })],
            ));
            for d in elems(j) {
                out.push(rel(
                    "21",
                    vec![
                        gi(Rho { i, gamma: c }),
                        g(Rho { i: j, gamma: d }),
                        g(Rho { i, gamma: c }),
                        g(Alpha { i, gamma: c }),
                    ],
                    vec![g(Alpha { i, gamma: c }), g(Rho { i: j, gamma: d })],
                ));
            }
            out.push(rel(
                "22",
                vec![g(AlphaT { i }), g(Rho { i, gamma: c })],
                vec![g(Lambda { i, gamma: c }), g(AlphaT { i }), g(phi(i, &fp.inner_aut(i, c)))],
            ));
        }
        for a in &auts[i] {
            out.push(rel("23", vec![g(Tau), g(phi(i, a))], vec![g(phi(i, a)), g(Tau)]));
        }
    }
    out
}

/// The catalog with one relation corrupted by swapping a `ρ` for a `λ`.
/// Every nontrivial instance must fail.
pub fn corrupted_catalog(fp: &FreeProduct) -> Vec<RelationInstance> {
    catalog(fp)
        .into_iter()
        .filter(|r| r.item == "16")
        .filter_map(|mut r| match r.lhs[0].0 {
            Gen::Rho { i, gamma } if gamma != 0 => {
                r.item = "16 (rho -> lambda)".into();
                r.lhs[0].0 = Gen::Lambda { i, gamma };
                Some(r)
            }
            _ => None,
        })
        .collect()
}

/// An element `(a, ψ)` of `Hol(A) = A ⋊ Aut(A)`, multiplied by
/// `(a, ψ)(b, χ) = (a ψ(b), ψχ)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HolElement {
    pub a: usize,
    pub psi: Vec<usize>,
}

pub fn hol_mul(t: &FiniteGroupTable, x: &HolElement, y: &HolElement) -> HolElement {
    HolElement { a: t.mul(x.a, x.psi[y.a]), psi: y.psi.iter().map(|&v| x.psi[v]).collect() }
}

/// `θ(a, ψ) = (a^{-1}, ι ψ)` with `ι: x -> a x a^{-1}`.
pub fn hol_theta(t: &FiniteGroupTable, x: &HolElement) -> HolElement {
    let ai = t.inv(x.a);
    HolElement { a: ai, psi: x.psi.iter().map(|&v| t.conjugate(x.a, v)).collect() }
}

pub fn holomorph(t: &FiniteGroupTable) -> Vec<HolElement> {
    let auts = t.automorphisms();
    (0..t.order())
        .flat_map(|a| auts.iter().map(move |p| HolElement { a, psi: p.clone() }))
        .collect()
}

impl FreeProduct {
    /// `Hol(A1)` acts through left transvections and `Hol(A2)` through right
    /// ones: `(a, ψ) -> λ1(a^{-1}) φ1(ψ)` and `(b, χ) -> ρ2(b) φ2(χ)`.
    pub fn embed_hol(&self, h1: &HolElement, h2: &HolElement) -> FPAutomorphism {
        self.eval(&[
            g(Gen::Lambda { i: 0, gamma: self.table(0).inv(h1.a) }),
            g(Gen::Phi { i: 0, aut: h1.psi.clone() }),
            g(Gen::Rho { i: 1, gamma: h2.a }),
            g(Gen::Phi { i: 1, aut: h2.psi.clone() }),
        ])
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ItemResult {
    pub item: String,
    pub instances: usize,
    pub passed: usize,
    /// Up to three failing instances with their traces.
    pub witnesses: Vec<String>,
}

impl ItemResult {
    pub fn ok(&self) -> bool {
        self.passed == self.instances
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CatalogReport {
    pub a1_order: usize,
    pub a2_order: usize,
    pub items: Vec<ItemResult>,
    /// Structural checks: `θ̃` facts, holomorph involutions, commuting wings.
    pub checks: Vec<ItemResult>,
    /// The corrupted control; `passed` counts instances correctly rejected.
    pub negative_control: ItemResult,
}

impl CatalogReport {
    pub fn all_pass(&self) -> bool {
        self.items.iter().chain(&self.checks).all(ItemResult::ok)
            && self.negative_control.ok()
            && self.negative_control.instances > 0
    }

    pub fn failures(&self) -> impl Iterator<Item = &ItemResult> {
        self.items.iter().chain(&self.checks).filter(|r| !r.ok())
    }
}

fn tally(item: &str, outcomes: Vec<Result<(), String>>) -> ItemResult {
    let instances = outcomes.len();
    let failed: Vec<String> = outcomes.into_iter().filter_map(Result::err).collect();
    ItemResult {
        item: item.into(),
        instances,
        passed: instances - failed.len(),
        witnesses: failed.into_iter().take(3).collect(),
    }
}

fn check_theta_tilde(fp: &FreeProduct) -> Vec<ItemResult> {
    let tt = fp.generator(&Gen::ThetaTilde);
    let tt2 = tt.compose(&tt).unwrap();
    let square = tally("theta~^2 = 1", vec![tt2.equal_in_out(&fp.identity()).unwrap().then_some(()).ok_or_else(|| tt2.describe())]);

    let mut hol_involution = Vec::new();
    for i in 0..2 {
        let t = fp.table(i);
        let hol = holomorph(t);
        for x in &hol {
            let tx = hol_theta(t, x);
            if hol_theta(t, &tx) != *x {
                hol_involution.push(Err(format!("A{}: theta^2 moves {x:?}", i + 1)));
                continue;
            }
            let hom = hol.iter().all(|y| hol_theta(t, &hol_mul(t, x, y)) == hol_mul(t, &tx, &hol_theta(t, y)));
            hol_involution.push(if hom { Ok(()) } else { Err(format!("A{}: theta not multiplicative at {x:?}", i + 1)) });
        }
    }
    let hol_involution = tally("theta on Hol(A_i) is an involutive automorphism", hol_involution);

    let (h1, h2) = (holomorph(fp.table(0)), holomorph(fp.table(1)));
    let pairs: Vec<(&HolElement, &HolElement)> = h1.iter().flat_map(|x| h2.iter().map(move |y| (x, y))).collect();
    let conj: Vec<Result<(), String>> = pairs
        .par_iter()
        .map(|(x, y)| {
            let e = fp.embed_hol(x, y);
            let lhs = tt.compose(&e).unwrap().compose(&tt.inverse()).unwrap();
            let rhs = fp.embed_hol(&hol_theta(fp.table(0), x), &hol_theta(fp.table(1), y));
            if lhs.equal_in_out(&rhs).unwrap() {
                Ok(())
            } else {
                Err(format!("({x:?}, {y:?}): {} vs {}", lhs.describe(), rhs.describe()))
            }
        })
        .collect();
    let conj = tally("theta~ conjugation = theta x theta on Hol(A1) x Hol(A2)", conj);

    let embed_hom: Vec<Result<(), String>> = pairs
        .par_iter()
        .flat_map_iter(|(x, y)| pairs.iter().map(move |(u, v)| (*x, *y, *u, *v)))
        .map(|(x, y, u, v)| {
            let prod = fp.embed_hol(&hol_mul(fp.table(0), x, u), &hol_mul(fp.table(1), y, v));
            let comp = fp.embed_hol(x, y).compose(&fp.embed_hol(u, v)).unwrap();
            if prod.equal_in_aut(&comp) {
                Ok(())
            } else {
                Err(format!("({x:?}, {y:?}) * ({u:?}, {v:?})"))
            }
        })
        .collect();
    let embed_hom = tally("Hol(A1) x Hol(A2) embeds", embed_hom);

    let mut injective = Vec::new();
    for (x, y) in &pairs {
        let e = fp.embed_hol(x, y);
        let trivial = x.a == 0 && y.a == 0 && x.psi.iter().enumerate().all(|(k, &v)| k == v)
            && y.psi.iter().enumerate().all(|(k, &v)| k == v);
        injective.push(if e.is_inner() == trivial { Ok(()) } else { Err(format!("({x:?}, {y:?}) is inner")) });
        let et = tt.compose(&e).unwrap();
        injective.push(if et.is_inner() { Err(format!("theta~ ({x:?}, {y:?}) is inner")) } else { Ok(()) });
    }
    let injective = tally("finite subgroup meets Inn(F) trivially", injective);

    let mut wings = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            for c in 0..fp.table(i).order() {
                for d in 0..fp.table(j).order() {
                    let l = fp.generator(&Gen::Lambda { i, gamma: c });
                    let r = fp.generator(&Gen::Rho { i: j, gamma: d });
                    let ok = l.compose(&r).unwrap().equal_in_aut(&r.compose(&l).unwrap());
                    wings.push(if ok { Ok(()) } else { Err(format!("lambda{}({c}) vs rho{}({d})", i + 1, j + 1)) });
                }
            }
        }
    }
    let wings = tally("left and right wings of H0 commute", wings);

    // Relation 22 with the opposite inner automorphism x -> γ x γ^{-1}.
    let mut variant = Vec::new();
    for i in 0..2 {
        for c in 0..fp.table(i).order() {
            let r = rel(
                "22 with phi_i: x -> gamma x gamma^-1",
                vec![g(Gen::AlphaT { i }), g(Gen::Rho { i, gamma: c })],
                vec![
                    g(Gen::Lambda { i, gamma: c }),
                    g(Gen::AlphaT { i }),
                    g(Gen::Phi { i, aut: fp.inner_aut(i, fp.table(i).inv(c)) }),
                ],
            );
            variant.push(r.check(fp).map_err(|e| e.to_string()));
        }
    }
    let variant = tally("22 with phi_i: x -> gamma x gamma^-1", variant);

    vec![square, hol_involution, embed_hom, conj, injective, wings, variant]
}

pub fn catalog_report(a1: &FiniteGroupTable, a2: &FiniteGroupTable) -> Result<CatalogReport, PresentationError> {
    let fp = FreeProduct::new(a1.clone(), a2.clone())?;
    let mut rels = catalog(&fp);
    rels.sort_by_key(|r| r.item.parse::<u32>().unwrap_or(u32::MAX));
    let outcomes: Vec<Result<(), String>> = rels.par_iter().map(|r| r.check(&fp).map_err(|e| e.to_string())).collect();
    let mut items: Vec<ItemResult> = Vec::new();
    let mut start = 0;
    while start < rels.len() {
        let key = &rels[start].item;
        let end = start + rels[start..].iter().take_while(|r| &r.item == key).count();
        items.push(tally(key, outcomes[start..end].to_vec()));
        start = end;
    }
    let bad = corrupted_catalog(&fp);
    let control: Vec<Result<(), String>> = bad
        .par_iter()
        .map(|r| match r.check(&fp) {
            Err(_) => Ok(()),
            Ok(()) => Err(format!("corruption not detected: {}", r.text())),
        })
        .collect();
    Ok(CatalogReport {
        a1_order: a1.order(),
        a2_order: a2.order(),
        items,
        checks: check_theta_tilde(&fp),
        negative_control: tally("negative control", control),
    })
}

/// Verifies the whole catalog, failing with the first broken relation.
pub fn verify_catalog(a1: &FiniteGroupTable, a2: &FiniteGroupTable) -> Result<CatalogReport, PresentationError> {
    let fp = FreeProduct::new(a1.clone(), a2.clone())?;
    for r in catalog(&fp) {
        r.check(&fp)?;
    }
    let report = catalog_report(a1, a2)?;
    if let Some(f) = report.failures().next() {
        return Err(PresentationError::RelationFailed {
            item: f.item.clone(),
            relation: f.item.clone(),
            trace: f.witnesses.join("\n"),
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests;
