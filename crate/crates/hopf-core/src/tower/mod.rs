//! Group towers: finite tables, free and free-abelian groups, free
//! products and HNN extensions, with uniform word-problem operations.
//!
//! Every node carries its generator list and a complete relator set for
//! its presentation. Equality is decided structurally — multiplication
//! tables at the leaves, syllable normal forms in free products, Britton
//! reduction in HNN extensions — never by enumerating the whole group,
//! so the same operations work on infinite nodes.

mod free_product;
mod hnn;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde_json::json;
use thiserror::Error;

use crate::coset::{CosetError, MultiplicationTable};
use crate::word::{GeneratorId, Word, WordError};

pub use free_product::Syllable;

#[derive(Debug, Error)]
pub enum TowerError {
    #[error("generator {gen:?} is not a generator of group {group}")]
    UnknownGenerator { gen: GeneratorId, group: String },
    #[error("generator {0:?} declared twice")]
    DuplicateGenerator(GeneratorId),
    #[error("free factors of {group} share generator {gen:?}")]
    OverlappingFactors { group: String, gen: GeneratorId },
    #[error("{op} requires a free product, but {group} is not one")]
    NotAFreeProduct { group: String, op: &'static str },
    #[error("stable-letter relation of {group} is invalid: {detail}")]
    AssocValidation { group: String, detail: String },
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Coset(#[from] CosetError),
}

/// Order of a group element.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElementOrder {
    Finite(u64),
    Infinite,
}

impl ElementOrder {
    pub fn is_infinite(&self) -> bool {
        matches!(self, ElementOrder::Infinite)
    }
}

impl fmt::Display for ElementOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementOrder::Finite(n) => write!(f, "{n}"),
            ElementOrder::Infinite => write!(f, "infinite"),
        }
    }
}

/// How an HNN stable letter `t` acts: `t^-1 a t = phi(a)` on the
/// associated subgroup.
#[derive(Clone, Debug)]
pub enum AssocSpec {
    /// Associated subgroups are the cyclic subgroups generated by `lhs`
    /// and `rhs`; the isomorphism sends `lhs^n` to `rhs^n`. Both
    /// endpoints must have infinite order in the base, which makes the
    /// map an isomorphism for free.
    Cyclic { lhs: Word, rhs: Word },
    /// Associated subgroups are the whole base; `forward` gives the
    /// image of each base generator under the automorphism, `backward`
    /// under its inverse.
    Automorphism {
        forward: BTreeMap<GeneratorId, Word>,
        backward: BTreeMap<GeneratorId, Word>,
    },
}

#[derive(Clone, Debug)]
pub enum NodeKind {
    /// Concrete finite group with a closed multiplication table.
    Finite(Arc<MultiplicationTable>),
    /// Free group on the node's generators.
    Free,
    /// Free abelian group on the node's generators.
    FreeAbelian,
    /// Free product of two existing nodes with disjoint generators.
    FreeProduct {
        left: Arc<GroupNode>,
        right: Arc<GroupNode>,
    },
    /// HNN extension of `base` by the stable letter.
    Hnn {
        base: Arc<GroupNode>,
        stable: GeneratorId,
        assoc: AssocSpec,
    },
}

impl NodeKind {
    pub fn label(&self) -> &'static str {
        match self {
            NodeKind::Finite(_) => "finite",
            NodeKind::Free => "free",
            NodeKind::FreeAbelian => "free-abelian",
            NodeKind::FreeProduct { .. } => "free-product",
            NodeKind::Hnn { .. } => "hnn",
        }
    }
}

/// One group in a tower of constructions.
#[derive(Clone, Debug)]
pub struct GroupNode {
    name: Arc<str>,
    kind: NodeKind,
    gens: Vec<GeneratorId>,
    gen_set: HashSet<GeneratorId>,
    relators: Vec<Word>,
}

impl GroupNode {
    fn assemble(
        name: &str,
        kind: NodeKind,
        gens: Vec<GeneratorId>,
        relators: Vec<Word>,
    ) -> Result<Arc<Self>, TowerError> {
        let mut gen_set = HashSet::new();
        for g in &gens {
            if !gen_set.insert(g.clone()) {
                return Err(TowerError::DuplicateGenerator(g.clone()));
            }
        }
        Ok(Arc::new(GroupNode {
            name: Arc::from(name),
            kind,
            gens,
            gen_set,
            relators,
        }))
    }

    /// Wraps a closed multiplication table as a leaf node.
    pub fn finite(name: &str, table: Arc<MultiplicationTable>) -> Result<Arc<Self>, TowerError> {
        let gens = table.presentation().generators().to_vec();
        let relators = table.presentation().relators().to_vec();
        Self::assemble(name, NodeKind::Finite(table), gens, relators)
    }

    /// Free group; generators are scoped to this node's name.
    pub fn free(name: &str, gen_names: &[&str]) -> Result<Arc<Self>, TowerError> {
        let gens = gen_names
            .iter()
            .map(|g| GeneratorId::new(g, name))
            .collect::<Result<Vec<_>, _>>()?;
        Self::assemble(name, NodeKind::Free, gens, Vec::new())
    }

    /// Free abelian group; relators are all pairwise commutators.
    pub fn free_abelian(name: &str, gen_names: &[&str]) -> Result<Arc<Self>, TowerError> {
        let gens = gen_names
            .iter()
            .map(|g| GeneratorId::new(g, name))
            .collect::<Result<Vec<_>, _>>()?;
        let mut relators = Vec::new();
        for i in 0..gens.len() {
            for j in i + 1..gens.len() {
                relators.push(Word::commutator(
                    &Word::generator(gens[i].clone()),
                    &Word::generator(gens[j].clone()),
                )?);
            }
        }
        Self::assemble(name, NodeKind::FreeAbelian, gens, relators)
    }

    /// Free product of two nodes; generator sets must be disjoint.
    pub fn free_product(
        name: &str,
        left: Arc<GroupNode>,
        right: Arc<GroupNode>,
    ) -> Result<Arc<Self>, TowerError> {
        if let Some(g) = left.gens.iter().find(|g| right.gen_set.contains(g)) {
            return Err(TowerError::OverlappingFactors {
                group: name.to_string(),
                gen: g.clone(),
            });
        }
        let gens = left.gens.iter().chain(right.gens.iter()).cloned().collect();
        let relators = left
            .relators
            .iter()
            .chain(right.relators.iter())
            .cloned()
            .collect();
        Self::assemble(name, NodeKind::FreeProduct { left, right }, gens, relators)
    }

    /// HNN extension with cyclic associated subgroups: the new stable
    /// letter `t` satisfies `t^-1 lhs t = rhs`. Both endpoints must be
    /// of infinite order in the base, so `lhs^n -> rhs^n` is an
    /// isomorphism of infinite cyclic subgroups.
    pub fn hnn_cyclic(
        name: &str,
        base: Arc<GroupNode>,
        stable_name: &str,
        lhs: Word,
        rhs: Word,
    ) -> Result<Arc<Self>, TowerError> {
        let stable = GeneratorId::new(stable_name, name).map_err(TowerError::Word)?;
        base.validate_word(&lhs)?;
        base.validate_word(&rhs)?;
        for (side, w) in [("left", &lhs), ("right", &rhs)] {
            match base.order(w)? {
                ElementOrder::Infinite => {}
                ElementOrder::Finite(n) => {
                    return Err(TowerError::AssocValidation {
                        group: name.to_string(),
                        detail: format!(
                            "{side} endpoint {w} has order {n} in {}; an infinite-order element is required",
                            base.name
                        ),
                    });
                }
            }
        }
        let mut relators = base.relators.clone();
        let t = Word::generator(stable.clone());
        relators.push(
            t.inverse()
                .concat(&lhs)?
                .concat(&t)?
                .concat(&rhs.inverse())?,
        );
        let mut gens = base.gens.clone();
        gens.push(stable.clone());
        Self::assemble(
            name,
            NodeKind::Hnn {
                base,
                stable,
                assoc: AssocSpec::Cyclic { lhs, rhs },
            },
            gens,
            relators,
        )
    }

    /// HNN extension whose associated subgroups are the whole base:
    /// `t^-1 h t = phi(h)` for an automorphism `phi` given on generators
    /// by `forward`, with inverse given by `backward`. Both maps are
    /// verified (relators map to the identity, compositions fix every
    /// generator) before the node is built.
    pub fn hnn_automorphism(
        name: &str,
        base: Arc<GroupNode>,
        stable_name: &str,
        forward: BTreeMap<GeneratorId, Word>,
        backward: BTreeMap<GeneratorId, Word>,
    ) -> Result<Arc<Self>, TowerError> {
        let stable = GeneratorId::new(stable_name, name).map_err(TowerError::Word)?;
        let fail = |detail: String| TowerError::AssocValidation {
            group: name.to_string(),
            detail,
        };
        for (label, map) in [("forward", &forward), ("backward", &backward)] {
            for g in &base.gens {
                let img = map
                    .get(g)
                    .ok_or_else(|| fail(format!("{label} map gives no image for {g:?}")))?;
                base.validate_word(img)?;
            }
            for g in map.keys() {
                if !base.gen_set.contains(g) {
                    return Err(fail(format!(
                        "{label} map names {g:?}, which is not a generator of {}",
                        base.name
                    )));
                }
            }
            for r in &base.relators {
                let image = r.substitute(|g| map.get(g))?;
                if !base.is_identity(&image)? {
                    return Err(fail(format!(
                        "{label} map does not preserve the relation {r} of {}",
                        base.name
                    )));
                }
            }
        }
        for g in &base.gens {
            let gw = Word::generator(g.clone());
            let round = gw
                .substitute(|h| forward.get(h))?
                .substitute(|h| backward.get(h))?;
            let back_round = gw
                .substitute(|h| backward.get(h))?
                .substitute(|h| forward.get(h))?;
            if !base.are_equal(&round, &gw)? || !base.are_equal(&back_round, &gw)? {
                return Err(fail(format!(
                    "forward and backward maps are not mutually inverse on {g:?}"
                )));
            }
        }
        let mut relators = base.relators.clone();
        let t = Word::generator(stable.clone());
        for g in &base.gens {
            let img = forward.get(g).expect("checked above");
            relators.push(
                t.inverse()
                    .concat(&Word::generator(g.clone()))?
                    .concat(&t)?
                    .concat(&img.inverse())?,
            );
        }
        let mut gens = base.gens.clone();
        gens.push(stable.clone());
        Self::assemble(
            name,
            NodeKind::Hnn {
                base,
                stable,
                assoc: AssocSpec::Automorphism { forward, backward },
            },
            gens,
            relators,
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &NodeKind {
        &self.kind
    }

    pub fn generators(&self) -> &[GeneratorId] {
        &self.gens
    }

    /// Complete relator set of this node's presentation.
    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn contains_generator(&self, g: &GeneratorId) -> bool {
        self.gen_set.contains(g)
    }

    /// The stable letter, when this node is an HNN extension.
    pub fn stable_letter(&self) -> Option<&GeneratorId> {
        match &self.kind {
            NodeKind::Hnn { stable, .. } => Some(stable),
            _ => None,
        }
    }

    pub fn validate_word(&self, w: &Word) -> Result<(), TowerError> {
        for l in w.letters() {
            if !self.gen_set.contains(&l.gen) {
                return Err(TowerError::UnknownGenerator {
                    gen: l.gen.clone(),
                    group: self.name.to_string(),
                });
            }
        }
        Ok(())
    }

    /// Canonical-ish form of the element: table representative for
    /// finite nodes, exponent-sorted form for free abelian ones,
    /// syllable normal form in free products, Britton-reduced form (with
    /// normalized base segments) in HNN extensions. The identity always
    /// normalizes to the empty word.
    pub fn normalize(&self, w: &Word) -> Result<Word, TowerError> {
        self.validate_word(w)?;
        match &self.kind {
            NodeKind::Finite(table) => Ok(table.representative(table.evaluate(w)?).clone()),
            NodeKind::Free => Ok(w.clone()),
            NodeKind::FreeAbelian => self.normalize_abelian(w),
            NodeKind::FreeProduct { .. } => {
                let sylls = free_product::syllables(self, w)?;
                let mut out = Word::identity();
                for s in sylls {
                    out = out.concat(&s.word)?;
                }
                Ok(out)
            }
            NodeKind::Hnn { .. } => hnn::normalize(self, w),
        }
    }

    fn normalize_abelian(&self, w: &Word) -> Result<Word, TowerError> {
        let mut sums: BTreeMap<usize, i64> = BTreeMap::new();
        for l in w.letters() {
            let idx = self
                .gens
                .iter()
                .position(|g| g == &l.gen)
                .expect("validated");
            *sums.entry(idx).or_insert(0) += l.exp;
        }
        let mut out = Word::identity();
        for (idx, e) in sums {
            if e != 0 {
                out = out.concat(&Word::letter(self.gens[idx].clone(), e))?;
            }
        }
        Ok(out)
    }

    /// Does the word represent the identity element?
    pub fn is_identity(&self, w: &Word) -> Result<bool, TowerError> {
        self.validate_word(w)?;
        match &self.kind {
            NodeKind::Finite(table) => Ok(table.evaluate(w)? == 0),
            NodeKind::Free => Ok(w.is_empty()),
            NodeKind::FreeAbelian => Ok(self.normalize_abelian(w)?.is_empty()),
            NodeKind::FreeProduct { .. } => Ok(free_product::syllables(self, w)?.is_empty()),
            NodeKind::Hnn { .. } => Ok(hnn::normalize(self, w)?.is_empty()),
        }
    }

    /// Do the two words represent the same element?
    pub fn are_equal(&self, u: &Word, v: &Word) -> Result<bool, TowerError> {
        self.is_identity(&u.concat(&v.inverse())?)
    }

    /// Order of the element the word represents.
    pub fn order(&self, w: &Word) -> Result<ElementOrder, TowerError> {
        self.validate_word(w)?;
        match &self.kind {
            NodeKind::Finite(table) => Ok(ElementOrder::Finite(table.element_order(w)?)),
            NodeKind::Free => Ok(if w.is_empty() {
                ElementOrder::Finite(1)
            } else {
                ElementOrder::Infinite
            }),
            NodeKind::FreeAbelian => Ok(if self.normalize_abelian(w)?.is_empty() {
                ElementOrder::Finite(1)
            } else {
                ElementOrder::Infinite
            }),
            NodeKind::FreeProduct { .. } => free_product::order(self, w),
            NodeKind::Hnn { .. } => hnn::order(self, w),
        }
    }

    /// Membership in the cyclic subgroup generated by `gamma`: returns
    /// some exponent `n` with `gamma^n = w` when one exists.
    pub fn cyclic_member(&self, gamma: &Word, w: &Word) -> Result<Option<i64>, TowerError> {
        self.validate_word(gamma)?;
        self.validate_word(w)?;
        if self.is_identity(gamma)? {
            return Ok(if self.is_identity(w)? { Some(0) } else { None });
        }
        match &self.kind {
            NodeKind::Finite(table) => {
                let target = table.evaluate(w)?;
                let ord = table.element_order(gamma)?;
                let mut cur = 0usize;
                for n in 0..ord {
                    if cur == target {
                        return Ok(Some(n as i64));
                    }
                    cur = table.apply_word(cur, gamma)?;
                }
                Ok(None)
            }
            NodeKind::Free => self.free_cyclic_member(gamma, w),
            NodeKind::FreeAbelian => self.abelian_cyclic_member(gamma, w),
            NodeKind::FreeProduct { .. } => free_product::cyclic_member(self, gamma, w),
            NodeKind::Hnn { .. } => hnn::cyclic_member(self, gamma, w),
        }
    }

    fn free_cyclic_member(&self, gamma: &Word, w: &Word) -> Result<Option<i64>, TowerError> {
        let (c, core) = gamma.cyclically_reduce();
        let conj = c.inverse().concat(w)?.concat(&c)?;
        if conj.is_empty() {
            return Ok(Some(0));
        }
        let total = conj.letter_len();
        let step = core.letter_len();
        debug_assert!(step > 0, "gamma is nontrivial");
        if total % step != 0 {
            return Ok(None);
        }
        let n = (total / step) as i64;
        if conj == core.pow(n)? {
            Ok(Some(n))
        } else if conj == core.pow(-n)? {
            Ok(Some(-n))
        } else {
            Ok(None)
        }
    }

    fn abelian_cyclic_member(&self, gamma: &Word, w: &Word) -> Result<Option<i64>, TowerError> {
        let vector = |word: &Word| -> BTreeMap<GeneratorId, i64> {
            let mut v = BTreeMap::new();
            for l in word.letters() {
                *v.entry(l.gen.clone()).or_insert(0) += l.exp;
            }
            v.retain(|_, e| *e != 0);
            v
        };
        let gv = vector(gamma);
        let wv = vector(w);
        let (pivot, &ge) = gv.iter().next().expect("gamma is nontrivial");
        let we = wv.get(pivot).copied().unwrap_or(0);
        if we % ge != 0 {
            return Ok(None);
        }
        let n = we / ge;
        let keys: HashSet<_> = gv.keys().chain(wv.keys()).collect();
        for k in keys {
            let g = gv.get(k).copied().unwrap_or(0);
            let target = wv.get(k).copied().unwrap_or(0);
            if g.checked_mul(n) != Some(target) {
                return Ok(None);
            }
        }
        Ok(Some(n))
    }

    /// Syllable normal form; only meaningful for free-product nodes.
    pub fn syllables(&self, w: &Word) -> Result<Vec<Syllable>, TowerError> {
        match &self.kind {
            NodeKind::FreeProduct { .. } => {
                self.validate_word(w)?;
                free_product::syllables(self, w)
            }
            _ => Err(TowerError::NotAFreeProduct {
                group: self.name.to_string(),
                op: "syllable decomposition",
            }),
        }
    }

    /// Conjugator plus cyclically reduced syllable sequence of `w`, so that
    /// `w = c . sylls . c^-1`; only meaningful for free-product nodes.
    pub fn cyclically_reduced_syllables(
        &self,
        w: &Word,
    ) -> Result<(Word, Vec<Syllable>), TowerError> {
        match &self.kind {
            NodeKind::FreeProduct { .. } => {
                self.validate_word(w)?;
                let (conj, sylls) = free_product::cyclic_reduce(self, w)?;
                Ok((conj, sylls.into()))
            }
            _ => Err(TowerError::NotAFreeProduct {
                group: self.name.to_string(),
                op: "cyclic syllable reduction",
            }),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut j = json!({
            "name": self.name.as_ref(),
            "kind": self.kind.label(),
            "generators": self.gens.iter().map(|g| g.name().to_string()).collect::<Vec<_>>(),
            "relators": self.relators.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
        });
        if let NodeKind::Finite(table) = &self.kind {
            j["order"] = json!(table.order());
        }
        j
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coset::{enumerate, FinitePresentation};
    use crate::word::Letter;

    fn gid(name: &str, scope: &str) -> GeneratorId {
        GeneratorId::new(name, scope).unwrap()
    }

    fn w(node: &GroupNode, pairs: &[(&str, i64)]) -> Word {
        Word::from_letters(pairs.iter().map(|(n, e)| {
            let gen = node
                .generators()
                .iter()
                .find(|g| g.name() == *n)
                .unwrap_or_else(|| panic!("no generator {n} in {}", node.name()))
                .clone();
            Letter::new(gen, *e)
        }))
        .unwrap()
    }

    /// Order-18 semidirect product of a cyclic group of order 9 by the
    /// inverting involution, as a finite leaf.
    fn base_18() -> Arc<GroupNode> {
        let b = gid("b", "H0");
        let c = gid("c", "H0");
        let pres = FinitePresentation::new(
            vec![b.clone(), c.clone()],
            vec![
                Word::letter(b.clone(), 2),
                Word::letter(c.clone(), 9),
                Word::from_letters([
                    Letter::new(b.clone(), -1),
                    Letter::new(c.clone(), 1),
                    Letter::new(b.clone(), 1),
                    Letter::new(c.clone(), 1),
                ])
                .unwrap(),
            ],
        )
        .unwrap();
        GroupNode::finite("H0", Arc::new(enumerate(&pres, 1000).unwrap())).unwrap()
    }

    /// `H1 = <H0, s | s^-1 b s = b c^-3, s^-1 c s = c>`.
    fn tower_h1() -> Arc<GroupNode> {
        let h0 = base_18();
        let b = gid("b", "H0");
        let c = gid("c", "H0");
        let fwd: BTreeMap<_, _> = [
            (
                b.clone(),
                Word::from_letters([Letter::new(b.clone(), 1), Letter::new(c.clone(), -3)])
                    .unwrap(),
            ),
            (c.clone(), Word::generator(c.clone())),
        ]
        .into();
        let bwd: BTreeMap<_, _> = [
            (
                b.clone(),
                Word::from_letters([Letter::new(b.clone(), 1), Letter::new(c.clone(), 3)]).unwrap(),
            ),
            (c.clone(), Word::generator(c.clone())),
        ]
        .into();
        GroupNode::hnn_automorphism("H1", h0, "s", fwd, bwd).unwrap()
    }

    /// `H = <H1, k | k^-1 s k = s^3>`.
    fn tower_h() -> Arc<GroupNode> {
        let h1 = tower_h1();
        let s = gid("s", "H1");
        GroupNode::hnn_cyclic("H", h1, "k", Word::generator(s.clone()), Word::letter(s, 3)).unwrap()
    }

    #[test]
    fn finite_node_basics() {
        let h0 = base_18();
        assert_eq!(
            h0.order(&w(&h0, &[("c", 1)])).unwrap(),
            ElementOrder::Finite(9)
        );
        assert_eq!(
            h0.order(&w(&h0, &[("c", 3)])).unwrap(),
            ElementOrder::Finite(3)
        );
        assert!(h0.is_identity(&w(&h0, &[("c", 9)])).unwrap());
        assert!(h0
            .are_equal(
                &w(&h0, &[("b", -1), ("c", 1), ("b", 1)]),
                &w(&h0, &[("c", -1)])
            )
            .unwrap());
        assert_eq!(
            h0.cyclic_member(&w(&h0, &[("c", 1)]), &w(&h0, &[("c", 3)]))
                .unwrap(),
            Some(3)
        );
        assert_eq!(
            h0.cyclic_member(&w(&h0, &[("c", 1)]), &w(&h0, &[("b", 1)]))
                .unwrap(),
            None
        );
    }

    #[test]
    fn free_node_basics() {
        let f = GroupNode::free("F", &["a", "b"]).unwrap();
        let ab = w(&f, &[("a", 1), ("b", 1)]);
        assert_eq!(f.order(&ab).unwrap(), ElementOrder::Infinite);
        assert!(!f.are_equal(&ab, &w(&f, &[("b", 1), ("a", 1)])).unwrap());
        assert_eq!(f.cyclic_member(&ab, &ab.pow(4).unwrap()).unwrap(), Some(4));
        assert_eq!(
            f.cyclic_member(&ab, &ab.pow(-3).unwrap()).unwrap(),
            Some(-3)
        );
        assert_eq!(
            f.cyclic_member(&ab, &w(&f, &[("a", 2), ("b", 1)])).unwrap(),
            None
        );
        // Conjugate generator: membership sees through the conjugation.
        let conj = w(&f, &[("a", 1), ("b", 2), ("a", -1)]);
        assert_eq!(
            f.cyclic_member(&conj, &w(&f, &[("a", 1), ("b", 6), ("a", -1)]))
                .unwrap(),
            Some(3)
        );
    }

    #[test]
    fn free_abelian_node_basics() {
        let z2 = GroupNode::free_abelian("Z2", &["a", "b"]).unwrap();
        let ab = w(&z2, &[("a", 1), ("b", 1)]);
        let ba = w(&z2, &[("b", 1), ("a", 1)]);
        assert!(z2.are_equal(&ab, &ba).unwrap());
        assert_eq!(z2.order(&ab).unwrap(), ElementOrder::Infinite);
        assert_eq!(
            z2.cyclic_member(&w(&z2, &[("a", 2)]), &w(&z2, &[("a", -6)]))
                .unwrap(),
            Some(-3)
        );
        assert_eq!(
            z2.cyclic_member(&w(&z2, &[("a", 2)]), &w(&z2, &[("a", 3)]))
                .unwrap(),
            None
        );
        assert_eq!(
            z2.cyclic_member(&w(&z2, &[("a", 2)]), &w(&z2, &[("a", 2), ("b", 1)]))
                .unwrap(),
            None
        );
        assert_eq!(
            z2.cyclic_member(&ab, &w(&z2, &[("a", 5), ("b", 5)]))
                .unwrap(),
            Some(5)
        );
    }

    #[test]
    fn automorphism_extension_relations_hold() {
        let h1 = tower_h1();
        // s^-1 b s = b c^-3 and its inverse direction s b s^-1 = b c^3.
        assert!(h1
            .are_equal(
                &w(&h1, &[("s", -1), ("b", 1), ("s", 1)]),
                &w(&h1, &[("b", 1), ("c", -3)])
            )
            .unwrap());
        assert!(h1
            .are_equal(
                &w(&h1, &[("s", 1), ("b", 1), ("s", -1)]),
                &w(&h1, &[("b", 1), ("c", 3)])
            )
            .unwrap());
        assert!(h1
            .are_equal(
                &w(&h1, &[("s", -1), ("c", 1), ("s", 1)]),
                &w(&h1, &[("c", 1)])
            )
            .unwrap());
        // Iterated twist: s^-2 b s^2 = b c^-6.
        assert!(h1
            .are_equal(
                &w(&h1, &[("s", -2), ("b", 1), ("s", 2)]),
                &w(&h1, &[("b", 1), ("c", -6)])
            )
            .unwrap());
        assert_eq!(
            h1.order(&w(&h1, &[("s", 1)])).unwrap(),
            ElementOrder::Infinite
        );
        assert_eq!(
            h1.order(&w(&h1, &[("b", 1)])).unwrap(),
            ElementOrder::Finite(2)
        );
        assert_eq!(
            h1.order(&w(&h1, &[("c", 3)])).unwrap(),
            ElementOrder::Finite(3)
        );
        // Normal form pushes stable letters to the front.
        let n = h1
            .normalize(&w(&h1, &[("b", 1), ("s", 2), ("c", 1)]))
            .unwrap();
        let first = n.letters().first().unwrap();
        assert_eq!(first.gen.name(), "s");
        assert_eq!(first.exp, 2);
    }

    #[test]
    fn bad_automorphism_is_rejected() {
        let h0 = base_18();
        let b = gid("b", "H0");
        let c = gid("c", "H0");
        // b -> c cannot extend: it maps the relation b^2 to c^2 != 1.
        let fwd: BTreeMap<_, _> = [
            (b.clone(), Word::generator(c.clone())),
            (c.clone(), Word::generator(c.clone())),
        ]
        .into();
        let bwd = fwd.clone();
        let err = GroupNode::hnn_automorphism("X", h0, "s", fwd, bwd).unwrap_err();
        assert!(matches!(err, TowerError::AssocValidation { .. }));
    }

    #[test]
    fn incomplete_automorphism_map_is_rejected() {
        let h0 = base_18();
        let c = gid("c", "H0");
        let fwd: BTreeMap<_, _> = [(c.clone(), Word::generator(c.clone()))].into();
        let err = GroupNode::hnn_automorphism("X", h0, "s", fwd.clone(), fwd).unwrap_err();
        assert!(matches!(err, TowerError::AssocValidation { .. }));
    }

    #[test]
    fn cyclic_extension_relations_hold() {
        let h = tower_h();
        // k^-1 s k = s^3, k^-1 s^2 k = s^6, k s^3 k^-1 = s.
        assert!(h
            .are_equal(
                &w(&h, &[("k", -1), ("s", 1), ("k", 1)]),
                &w(&h, &[("s", 3)])
            )
            .unwrap());
        assert!(h
            .are_equal(
                &w(&h, &[("k", -1), ("s", 2), ("k", 1)]),
                &w(&h, &[("s", 6)])
            )
            .unwrap());
        assert!(h
            .are_equal(
                &w(&h, &[("k", 1), ("s", 3), ("k", -1)]),
                &w(&h, &[("s", 1)])
            )
            .unwrap());
        // k s k^-1 is Britton-reduced: s is not a power of s^3.
        let r = h
            .normalize(&w(&h, &[("k", 1), ("s", 1), ("k", -1)]))
            .unwrap();
        assert!(r.letters().iter().any(|l| l.gen.name() == "k"));
        for n in -3..=3 {
            assert!(!h
                .are_equal(
                    &w(&h, &[("k", 1), ("s", 1), ("k", -1)]),
                    &w(&h, &[("s", n)])
                )
                .unwrap());
        }
        assert_eq!(
            h.order(&w(&h, &[("k", 1)])).unwrap(),
            ElementOrder::Infinite
        );
        // Finite-order base elements keep their order in the extension.
        assert_eq!(
            h.order(&w(&h, &[("c", 3)])).unwrap(),
            ElementOrder::Finite(3)
        );
        assert_eq!(
            h.order(&w(&h, &[("b", 1)])).unwrap(),
            ElementOrder::Finite(2)
        );
        // Conjugates of stable letters have infinite order.
        assert_eq!(
            h.order(&w(&h, &[("c", 3), ("k", 1)])).unwrap(),
            ElementOrder::Infinite
        );
        assert_eq!(
            h.order(&w(&h, &[("s", 1), ("k", 1), ("s", -1)])).unwrap(),
            ElementOrder::Infinite
        );
    }

    #[test]
    fn cyclic_membership_in_extensions() {
        let h = tower_h();
        let s3 = w(&h, &[("s", 3)]);
        assert_eq!(h.cyclic_member(&s3, &w(&h, &[("s", 6)])).unwrap(), Some(2));
        assert_eq!(h.cyclic_member(&s3, &w(&h, &[("s", 4)])).unwrap(), None);
        assert_eq!(
            h.cyclic_member(&s3, &w(&h, &[("s", -9)])).unwrap(),
            Some(-3)
        );
        let k = w(&h, &[("k", 1)]);
        assert_eq!(h.cyclic_member(&k, &w(&h, &[("k", 5)])).unwrap(), Some(5));
        assert_eq!(
            h.cyclic_member(&k, &w(&h, &[("k", 2), ("s", 1)])).unwrap(),
            None
        );
        // Membership sees through the defining relation: k^-1 s k = s^3.
        assert_eq!(
            h.cyclic_member(&s3, &w(&h, &[("k", -1), ("s", 1), ("k", 1)]))
                .unwrap(),
            Some(1)
        );
    }

    #[test]
    fn trivial_endpoint_is_rejected() {
        let f = GroupNode::free("F", &["a"]).unwrap();
        let err = GroupNode::hnn_cyclic(
            "X",
            f.clone(),
            "t",
            Word::generator(gid("a", "F")),
            Word::identity(),
        )
        .unwrap_err();
        assert!(matches!(err, TowerError::AssocValidation { .. }));
    }

    #[test]
    fn finite_order_endpoint_is_rejected() {
        let h0 = base_18();
        let c = Word::generator(gid("c", "H0"));
        let err = GroupNode::hnn_cyclic("X", h0, "t", c.clone(), c).unwrap_err();
        assert!(matches!(err, TowerError::AssocValidation { .. }));
    }

    #[test]
    fn free_product_basics() {
        let fa = GroupNode::free("FA", &["a"]).unwrap();
        let fb = GroupNode::free("FB", &["b"]).unwrap();
        let p = GroupNode::free_product("P", fa, fb).unwrap();
        let a = w(&p, &[("a", 1)]);
        let b = w(&p, &[("b", 1)]);
        let ab = a.concat(&b).unwrap();
        assert_eq!(p.syllables(&ab).unwrap().len(), 2);
        assert_eq!(
            p.syllables(&w(&p, &[("a", 1), ("b", 1), ("b", -1), ("a", 2)]))
                .unwrap()
                .len(),
            1
        );
        assert_eq!(p.order(&ab).unwrap(), ElementOrder::Infinite);
        assert_eq!(
            p.order(&w(&p, &[("a", 1), ("b", 2), ("a", -1)])).unwrap(),
            ElementOrder::Infinite
        );
        assert!(p
            .is_identity(&w(&p, &[("a", 1), ("b", 1), ("b", -1), ("a", -1)]))
            .unwrap());
        assert_eq!(p.cyclic_member(&ab, &ab.pow(3).unwrap()).unwrap(), Some(3));
        assert_eq!(
            p.cyclic_member(&ab, &ab.pow(-2).unwrap()).unwrap(),
            Some(-2)
        );
        assert_eq!(
            p.cyclic_member(&ab, &w(&p, &[("a", 2), ("b", 1)])).unwrap(),
            None
        );
        // Single-syllable membership recurses into the factor through a
        // conjugator.
        let gamma = w(&p, &[("a", 1), ("b", 1), ("a", -1)]);
        assert_eq!(
            p.cyclic_member(&gamma, &w(&p, &[("a", 1), ("b", 4), ("a", -1)]))
                .unwrap(),
            Some(4)
        );
        assert_eq!(p.cyclic_member(&gamma, &b).unwrap(), None);
    }

    #[test]
    fn free_product_with_finite_factor_drops_trivial_syllables() {
        let h0 = base_18();
        let fb = GroupNode::free("E", &["e"]).unwrap();
        let p = GroupNode::free_product("P", h0, fb).unwrap();
        // c^9 is trivial in the finite factor, so it vanishes entirely.
        let sylls = p.syllables(&w(&p, &[("c", 9), ("e", 1)])).unwrap();
        assert_eq!(sylls.len(), 1);
        assert_eq!(sylls[0].word.to_string(), "e");
        // c^3 e c^-3 e^-1 stays length 4; c^3 has order 3, not 1.
        assert_eq!(
            p.syllables(&w(&p, &[("c", 3), ("e", 1), ("c", -3), ("e", -1)]))
                .unwrap()
                .len(),
            4
        );
        // b c b c collapses: b c b c = b^2 (b^-1 c b) c = c^-1 c = 1.
        assert!(p
            .is_identity(&w(&p, &[("b", 1), ("c", 1), ("b", 1), ("c", 1)]))
            .unwrap());
        // Finite-order elements of a factor keep finite order in the product.
        assert_eq!(
            p.order(&w(&p, &[("c", 3)])).unwrap(),
            ElementOrder::Finite(3)
        );
        assert_eq!(
            p.order(&w(&p, &[("e", 1), ("b", 1), ("e", -1)])).unwrap(),
            ElementOrder::Finite(2)
        );
        assert_eq!(
            p.order(&w(&p, &[("c", 3), ("e", 1)])).unwrap(),
            ElementOrder::Infinite
        );
    }

    #[test]
    fn overlapping_factors_are_rejected() {
        let fa = GroupNode::free("FA", &["a"]).unwrap();
        let err = GroupNode::free_product("P", fa.clone(), fa).unwrap_err();
        assert!(matches!(err, TowerError::OverlappingFactors { .. }));
    }

    #[test]
    fn syllables_require_free_product() {
        let f = GroupNode::free("F", &["a"]).unwrap();
        assert!(matches!(
            f.syllables(&Word::identity()),
            Err(TowerError::NotAFreeProduct { .. })
        ));
    }

    #[test]
    fn unknown_generators_are_reported() {
        let f = GroupNode::free("F", &["a"]).unwrap();
        let foreign = Word::generator(gid("z", "Q"));
        assert!(matches!(
            f.is_identity(&foreign),
            Err(TowerError::UnknownGenerator { .. })
        ));
    }

    #[test]
    fn hnn_over_free_product_pinches_through_conjugated_cycles() {
        // P = F(a) * F(b), t^-1 (a b a^-1) t = b; exercises free-product
        // membership inside Britton reduction.
        let fa = GroupNode::free("FA", &["a"]).unwrap();
        let fb = GroupNode::free("FB", &["b"]).unwrap();
        let p = GroupNode::free_product("P", fa, fb).unwrap();
        let a = Word::generator(gid("a", "FA"));
        let b = Word::generator(gid("b", "FB"));
        let gamma = a.concat(&b).unwrap().concat(&a.inverse()).unwrap();
        let g = GroupNode::hnn_cyclic("G", p, "t", gamma.clone(), b.clone()).unwrap();
        let t = Word::generator(gid("t", "G"));
        // t^-1 (a b^2 a^-1) t = b^2.
        let lhs = t
            .inverse()
            .concat(&a)
            .unwrap()
            .concat(&b.pow(2).unwrap())
            .unwrap()
            .concat(&a.inverse())
            .unwrap()
            .concat(&t)
            .unwrap();
        assert!(g.are_equal(&lhs, &b.pow(2).unwrap()).unwrap());
        // t^-1 b t is Britton-reduced (b is not in <a b a^-1>).
        let red = g
            .normalize(&t.inverse().concat(&b).unwrap().concat(&t).unwrap())
            .unwrap();
        assert!(red.letters().iter().any(|l| l.gen.name() == "t"));
    }

    #[test]
    fn node_json_shape() {
        let h = tower_h();
        let j = h.to_json();
        assert_eq!(j["kind"], "hnn");
        assert_eq!(j["name"], "H");
        assert!(j["generators"].as_array().unwrap().iter().any(|g| g == "k"));
    }
}
