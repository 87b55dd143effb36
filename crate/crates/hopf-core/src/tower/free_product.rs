//! Word problem machinery for free products.
//!
//! Elements of a free product have a unique normal form as an
//! alternating sequence of nontrivial *syllables*, each lying in one
//! factor. The stack algorithm below builds that form in one pass,
//! popping syllables that collapse to the identity of their factor so
//! that cancellation can propagate across factor boundaries.

use std::collections::VecDeque;

use super::{ElementOrder, GroupNode, NodeKind, TowerError};
use crate::word::Word;

/// One maximal factor-alternating block of a free-product word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Syllable {
    /// True when the syllable lies in the left factor.
    pub left: bool,
    /// Normalized, nontrivial word over that factor's generators.
    pub word: Word,
}

struct Parts<'a> {
    left: &'a GroupNode,
    right: &'a GroupNode,
}

impl<'a> Parts<'a> {
    fn factor(&self, left: bool) -> &'a GroupNode {
        if left {
            self.left
        } else {
            self.right
        }
    }
}

fn parts(node: &GroupNode) -> Parts<'_> {
    match &node.kind {
        NodeKind::FreeProduct { left, right } => Parts { left, right },
        _ => unreachable!("free-product operations are dispatched on free-product nodes only"),
    }
}

/// Syllable normal form of `w`.
pub(super) fn syllables(node: &GroupNode, w: &Word) -> Result<Vec<Syllable>, TowerError> {
    let p = parts(node);
    let mut stack: Vec<Syllable> = Vec::new();
    for l in w.letters() {
        let left = p.left.contains_generator(&l.gen);
        let lw = Word::letter(l.gen.clone(), l.exp);
        match stack.last_mut() {
            Some(top) if top.left == left => {
                top.word = top.word.concat(&lw)?;
                if p.factor(left).is_identity(&top.word)? {
                    stack.pop();
                }
            }
            _ => {
                if !p.factor(left).is_identity(&lw)? {
                    stack.push(Syllable { left, word: lw });
                }
            }
        }
    }
    for s in &mut stack {
        s.word = p.factor(s.left).normalize(&s.word)?;
    }
    Ok(stack)
}

/// Conjugate the syllable sequence into cyclically reduced form:
/// returns `(c, sylls)` with `w = c . sylls . c^-1` and either at most
/// one syllable or first and last syllables in different factors.
pub(super) fn cyclic_reduce(
    node: &GroupNode,
    w: &Word,
) -> Result<(Word, VecDeque<Syllable>), TowerError> {
    let p = parts(node);
    let mut sylls: VecDeque<Syllable> = syllables(node, w)?.into();
    let mut conj = Word::identity();
    while sylls.len() >= 2 && sylls.front().unwrap().left == sylls.back().unwrap().left {
        let f = sylls.pop_front().unwrap();
        let b = sylls.pop_back().unwrap();
        conj = conj.concat(&f.word)?;
        let factor = p.factor(f.left);
        let merged = factor.normalize(&b.word.concat(&f.word)?)?;
        if !factor.is_identity(&merged)? {
            sylls.push_back(Syllable {
                left: f.left,
                word: merged,
            });
            break;
        }
    }
    Ok((conj, sylls))
}

pub(super) fn order(node: &GroupNode, w: &Word) -> Result<ElementOrder, TowerError> {
    let p = parts(node);
    let (_, sylls) = cyclic_reduce(node, w)?;
    match sylls.len() {
        0 => Ok(ElementOrder::Finite(1)),
        1 => {
            let s = &sylls[0];
            p.factor(s.left).order(&s.word)
        }
        // A cyclically reduced word of syllable length >= 2 has powers
        // whose syllable length grows linearly; none is trivial.
        _ => Ok(ElementOrder::Infinite),
    }
}

pub(super) fn cyclic_member(
    node: &GroupNode,
    gamma: &Word,
    w: &Word,
) -> Result<Option<i64>, TowerError> {
    let p = parts(node);
    let (c, g_sylls) = cyclic_reduce(node, gamma)?;
    match g_sylls.len() {
        0 => {
            // gamma is trivial; the dispatcher handles this case, but be
            // safe under direct calls.
            Ok(if node.is_identity(w)? { Some(0) } else { None })
        }
        1 => {
            // <gamma> = c <g0> c^-1 with g0 inside one factor, so strip
            // the conjugator and recurse into the factor.
            let g0 = &g_sylls[0];
            let wconj = c.inverse().concat(w)?.concat(&c)?;
            let ws = syllables(node, &wconj)?;
            match ws.as_slice() {
                [] => Ok(Some(0)),
                [s] if s.left == g0.left => p.factor(g0.left).cyclic_member(&g0.word, &s.word),
                _ => Ok(None),
            }
        }
        len => {
            // Powers of the cyclically reduced core have syllable count
            // exactly |n|*len; the conjugator can absorb at most its own
            // syllables on each side.
            let w_count = syllables(node, w)?.len();
            let c_count = syllables(node, &c)?.len();
            let bound = ((w_count + 2 * c_count) / len + 2) as i64;
            for n in -bound..=bound {
                if node.are_equal(w, &gamma.pow(n)?)? {
                    return Ok(Some(n));
                }
            }
            Ok(None)
        }
    }
}
