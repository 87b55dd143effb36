//! Shared corpus builders, an independent finite-group oracle, and seeded
//! randomized self-checks.
//!
//! Unit tests across the crate and the acceptance suite of the CLI both need
//! the same handful of towers, self-maps, and certificates; they live here so
//! every consumer exercises identical fixtures. The randomized suites return
//! `Err` with a human-readable counterexample instead of panicking, so a
//! harness can report them as ordinary failures.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coset::{enumerate, FinitePresentation, MultiplicationTable};
use crate::morphism::{Endomorphism, QuotientCertificate};
use crate::recipe::{
    certify_hyperbolic, extension_commutator_generator, extension_stable_letter, RecipeError,
    RecipeInput,
};
use crate::tower::{ElementOrder, GroupNode};
use crate::word::{display_word, GeneratorId, Letter, Word};

// ---------------------------------------------------------------------------
// Word-building helpers
// ---------------------------------------------------------------------------

fn gid(name: &str, scope: &str) -> GeneratorId {
    GeneratorId::new(name, scope).unwrap()
}

/// The generator of `node` with the given name; panics if absent or shadowed.
pub fn named(node: &GroupNode, name: &str) -> GeneratorId {
    let mut hits = node.generators().iter().filter(|g| g.name() == name);
    let first = hits
        .next()
        .unwrap_or_else(|| panic!("no generator {name} in {}", node.name()));
    assert!(
        hits.next().is_none(),
        "generator name {name} is ambiguous in {}",
        node.name()
    );
    first.clone()
}

/// A word over `node`'s generators, written as (name, exponent) pairs.
pub fn word_in(node: &GroupNode, pairs: &[(&str, i64)]) -> Word {
    Word::from_letters(pairs.iter().map(|(n, e)| Letter::new(named(node, n), *e))).unwrap()
}

/// The commutator of two words given as (name, exponent) pairs.
pub fn commutator_in(node: &GroupNode, lhs: &[(&str, i64)], rhs: &[(&str, i64)]) -> Word {
    Word::commutator(&word_in(node, lhs), &word_in(node, rhs)).unwrap()
}

/// A uniformly random word of 1..=max_letters unit letters over `node`.
pub fn random_word(node: &GroupNode, rng: &mut impl Rng, max_letters: usize) -> Word {
    let gens = node.generators();
    let len = rng.gen_range(1..=max_letters.max(1));
    Word::from_letters((0..len).map(|_| {
        let g = gens[rng.gen_range(0..gens.len())].clone();
        let exp = if rng.gen_bool(0.5) { 1 } else { -1 };
        Letter::new(g, exp)
    }))
    .unwrap()
}

// ---------------------------------------------------------------------------
// The order-18 leaf and its independent oracle
// ---------------------------------------------------------------------------

/// Order-18 leaf: cyclic of order 9 extended by the inverting involution,
/// presented on generators b (the involution) and c (the rotation).
pub fn order18_leaf() -> Arc<GroupNode> {
    Arc::clone(order18_leaf_cached())
}

fn order18_leaf_cached() -> &'static Arc<GroupNode> {
    use std::sync::OnceLock;
    static NODE: OnceLock<Arc<GroupNode>> = OnceLock::new();
    NODE.get_or_init(|| {
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
                    Letter::new(b, 1),
                    Letter::new(c, 1),
                ])
                .unwrap(),
            ],
        )
        .unwrap();
        GroupNode::finite("H0", Arc::new(enumerate(&pres, 1000).unwrap())).unwrap()
    })
}

/// Hand-rolled model of the same order-18 group: pairs (rotation mod 9,
/// flip bit) with the flip inverting rotations. Deliberately shares no code
/// with the coset machinery so it can serve as an independent oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct OracleElement {
    pub rotation: u8,
    pub flipped: bool,
}

pub struct SemidirectOracle;

impl SemidirectOracle {
    pub const IDENTITY: OracleElement = OracleElement {
        rotation: 0,
        flipped: false,
    };

    pub fn order(&self) -> usize {
        18
    }

    pub fn elements(&self) -> Vec<OracleElement> {
        let mut out = Vec::with_capacity(18);
        for flipped in [false, true] {
            for rotation in 0..9 {
                out.push(OracleElement { rotation, flipped });
            }
        }
        out
    }

    pub fn mul(&self, lhs: OracleElement, rhs: OracleElement) -> OracleElement {
        let twisted = if lhs.flipped {
            (9 - rhs.rotation) % 9
        } else {
            rhs.rotation
        };
        OracleElement {
            rotation: (lhs.rotation + twisted) % 9,
            flipped: lhs.flipped ^ rhs.flipped,
        }
    }

    pub fn inverse(&self, e: OracleElement) -> OracleElement {
        let rotation = if e.flipped {
            e.rotation
        } else {
            (9 - e.rotation) % 9
        };
        OracleElement {
            rotation,
            flipped: e.flipped,
        }
    }

    /// Evaluates a word over generators named `b` and `c`, by name only.
    pub fn evaluate(&self, w: &Word) -> Result<OracleElement, String> {
        let b = OracleElement {
            rotation: 0,
            flipped: true,
        };
        let c = OracleElement {
            rotation: 1,
            flipped: false,
        };
        let mut acc = Self::IDENTITY;
        for l in w.letters() {
            let base = match l.gen.name() {
                "b" => b,
                "c" => c,
                other => return Err(format!("oracle knows no generator named {other}")),
            };
            let step = if l.exp >= 0 { base } else { self.inverse(base) };
            for _ in 0..l.exp.unsigned_abs() {
                acc = self.mul(acc, step);
            }
        }
        Ok(acc)
    }
}

/// Checks that a multiplication table is the order-18 group element for
/// element: the representative map must be a bijective homomorphism onto the
/// oracle's model.
pub fn oracle_agreement(table: &MultiplicationTable) -> Result<(), String> {
    let oracle = SemidirectOracle;
    if table.order() != oracle.order() {
        return Err(format!(
            "table order {} differs from oracle order {}",
            table.order(),
            oracle.order()
        ));
    }
    let phi: Vec<OracleElement> = table
        .representatives()
        .iter()
        .map(|w| oracle.evaluate(w))
        .collect::<Result<_, _>>()?;
    if phi[0] != SemidirectOracle::IDENTITY {
        return Err("index 0 does not map to the oracle identity".into());
    }
    let mut seen = phi.clone();
    seen.sort();
    seen.dedup();
    if seen.len() != table.order() {
        return Err("representative map is not injective into the oracle".into());
    }
    for (index, &image) in phi.iter().enumerate() {
        for (col, g) in table.presentation().generators().iter().enumerate() {
            let gen_image = oracle.evaluate(&Word::generator(g.clone()))?;
            for sign in [1i64, -1] {
                let stepped = table.apply_generator(index, col, sign);
                let expected = if sign >= 0 {
                    oracle.mul(image, gen_image)
                } else {
                    oracle.mul(image, oracle.inverse(gen_image))
                };
                if phi[stepped] != expected {
                    return Err(format!(
                        "multiplication disagrees at index {index}, generator {}^{sign}",
                        g.name()
                    ));
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Corpus: the conjugated tower (order-18 leaf, two stable letters)
// ---------------------------------------------------------------------------

/// Three-level tower over the order-18 leaf: s acts by the automorphism
/// b -> b c^-3, c -> c, then k conjugates s to s^3.
pub fn order18_tower() -> Arc<GroupNode> {
    let h0 = order18_leaf();
    let b = gid("b", "H0");
    let c = gid("c", "H0");
    let fwd: BTreeMap<_, _> = [
        (
            b.clone(),
            Word::from_letters([Letter::new(b.clone(), 1), Letter::new(c.clone(), -3)]).unwrap(),
        ),
        (c.clone(), Word::generator(c.clone())),
    ]
    .into();
    let bwd: BTreeMap<_, _> = [
        (
            b.clone(),
            Word::from_letters([Letter::new(b.clone(), 1), Letter::new(c.clone(), 3)]).unwrap(),
        ),
        (c.clone(), Word::generator(c)),
    ]
    .into();
    let h1 = GroupNode::hnn_automorphism("H1", h0, "s", fwd, bwd).unwrap();
    let s = gid("s", "H1");
    GroupNode::hnn_cyclic("H", h1, "k", Word::generator(s.clone()), Word::letter(s, 3)).unwrap()
}

/// The verified self-map b -> b, c -> c^3, s -> s^3, k -> k.
pub fn order18_tower_endo(h: &Arc<GroupNode>) -> Endomorphism {
    let images: BTreeMap<_, _> = [
        (named(h, "b"), word_in(h, &[("b", 1)])),
        (named(h, "c"), word_in(h, &[("c", 3)])),
        (named(h, "s"), word_in(h, &[("s", 3)])),
        (named(h, "k"), word_in(h, &[("k", 1)])),
    ]
    .into();
    let mut psi = Endomorphism::new(h.clone(), images).unwrap();
    let check = psi.verify().unwrap();
    assert!(
        check.ok,
        "cubing map fails relators: {:?}",
        check.failing_relators
    );
    psi
}

/// Order-6 quotient certificate: s and k die, c^3 dies, b survives.
pub fn order18_tower_cert(h: &Arc<GroupNode>) -> QuotientCertificate {
    let tb = gid("b", "D6");
    let tc = gid("c", "D6");
    let pres = FinitePresentation::new(
        vec![tb.clone(), tc.clone()],
        vec![
            Word::letter(tb.clone(), 2),
            Word::letter(tc.clone(), 3),
            Word::from_letters([
                Letter::new(tb.clone(), -1),
                Letter::new(tc.clone(), 1),
                Letter::new(tb.clone(), 1),
                Letter::new(tc.clone(), 1),
            ])
            .unwrap(),
        ],
    )
    .unwrap();
    let table = Arc::new(enumerate(&pres, 1000).unwrap());
    let projection: BTreeMap<_, _> = [
        (named(h, "b"), Word::generator(tb)),
        (named(h, "c"), Word::generator(tc)),
        (named(h, "s"), Word::identity()),
        (named(h, "k"), Word::identity()),
    ]
    .into();
    QuotientCertificate::new(h.clone(), table, projection).unwrap()
}

/// The designated kernel seed for the conjugated tower.
pub fn order18_tower_u(h: &Arc<GroupNode>) -> Word {
    word_in(h, &[("c", 3)])
}

/// The designated outside-the-image element: a k-conjugated s sandwiched
/// between b and c b^-1.
pub fn order18_tower_v(h: &Arc<GroupNode>) -> Word {
    word_in(
        h,
        &[
            ("k", 1),
            ("s", -1),
            ("k", -1),
            ("b", 1),
            ("k", 1),
            ("s", 1),
            ("k", -1),
            ("c", 1),
            ("b", -1),
        ],
    )
}

/// Surjectivity witnesses for the extension named `recipe` over the
/// conjugated tower: b and k are fixed; s pulls back through one k-conjugate;
/// c pulls back through the stable letter and the adjoined free letter.
pub fn order18_tower_witnesses(h: &Arc<GroupNode>, recipe: &str) -> BTreeMap<GeneratorId, Word> {
    let x = extension_commutator_generator(recipe).unwrap();
    let t = extension_stable_letter(recipe).unwrap();
    let b = named(h, "b");
    let c = named(h, "c");
    let s = named(h, "s");
    let k = named(h, "k");
    let tcx = Word::commutator(&Word::generator(c.clone()), &Word::generator(x))
        .unwrap()
        .conjugate_by(&Word::generator(t))
        .unwrap();
    let c_witness = Word::from_letters([
        Letter::new(k.clone(), 2),
        Letter::new(s.clone(), -1),
        Letter::new(k.clone(), -2),
        Letter::new(b.clone(), -1),
        Letter::new(k.clone(), 2),
        Letter::new(s.clone(), 1),
        Letter::new(k.clone(), -2),
    ])
    .unwrap()
    .concat(&tcx)
    .unwrap()
    .concat(&Word::generator(b.clone()))
    .unwrap();
    let s_witness = Word::from_letters([
        Letter::new(k.clone(), 1),
        Letter::new(s.clone(), 1),
        Letter::new(k.clone(), -1),
    ])
    .unwrap();
    [
        (b.clone(), Word::generator(b)),
        (c, c_witness),
        (s, s_witness),
        (k.clone(), Word::generator(k)),
    ]
    .into()
}

/// The full witness-run input for the conjugated tower.
pub fn order18_tower_recipe() -> RecipeInput {
    let h = order18_tower();
    order18_tower_recipe_with_u(&order18_tower_u(&h))
}

/// Same input with a caller-chosen kernel seed; the preimage witness stays
/// the standard one, so hypothesis failures surface in the report.
pub fn order18_tower_recipe_with_u(u: &Word) -> RecipeInput {
    let h = order18_tower();
    RecipeInput::new(
        "G",
        h.clone(),
        order18_tower_endo(&h),
        u.clone(),
        order18_tower_v(&h),
        word_in(&h, &[("c", 1)]),
        order18_tower_cert(&h),
        order18_tower_witnesses(&h, "G"),
        None,
    )
    .unwrap()
}

/// Same input with one surjectivity witness replaced by a base word.
pub fn order18_tower_recipe_with_witness(gen: &str, pairs: &[(&str, i64)]) -> RecipeInput {
    let h = order18_tower();
    let mut witnesses = order18_tower_witnesses(&h, "G");
    witnesses.insert(named(&h, gen), word_in(&h, pairs));
    RecipeInput::new(
        "G",
        h.clone(),
        order18_tower_endo(&h),
        order18_tower_u(&h),
        order18_tower_v(&h),
        word_in(&h, &[("c", 1)]),
        order18_tower_cert(&h),
        witnesses,
        None,
    )
    .unwrap()
}

// ---------------------------------------------------------------------------
// Corpus: the doubling tower (free abelian leaf, one stable letter)
// ---------------------------------------------------------------------------

/// Free abelian rank-2 leaf on a and b.
pub fn doubling_leaf() -> Arc<GroupNode> {
    GroupNode::free_abelian("AB", &["a", "b"]).unwrap()
}

/// One stable letter over the free abelian leaf: s conjugates a^2 to a^4.
pub fn doubling_tower() -> Arc<GroupNode> {
    let ab = doubling_leaf();
    let a = gid("a", "AB");
    GroupNode::hnn_cyclic(
        "Hab",
        ab,
        "s",
        Word::letter(a.clone(), 2),
        Word::letter(a, 4),
    )
    .unwrap()
}

/// The verified self-map a -> a^2, b -> b, s -> s.
pub fn doubling_tower_endo(h: &Arc<GroupNode>) -> Endomorphism {
    let images: BTreeMap<_, _> = [
        (named(h, "a"), word_in(h, &[("a", 2)])),
        (named(h, "b"), word_in(h, &[("b", 1)])),
        (named(h, "s"), word_in(h, &[("s", 1)])),
    ]
    .into();
    let mut psi = Endomorphism::new(h.clone(), images).unwrap();
    let check = psi.verify().unwrap();
    assert!(
        check.ok,
        "doubling map fails relators: {:?}",
        check.failing_relators
    );
    psi
}

/// Order-6 abelian quotient certificate: a^2 and b^3 die, s dies.
pub fn doubling_tower_cert(h: &Arc<GroupNode>) -> QuotientCertificate {
    let ta = gid("a", "Z6");
    let tb = gid("b", "Z6");
    let pres = FinitePresentation::new(
        vec![ta.clone(), tb.clone()],
        vec![
            Word::letter(ta.clone(), 2),
            Word::letter(tb.clone(), 3),
            Word::commutator(&Word::generator(ta.clone()), &Word::generator(tb.clone())).unwrap(),
        ],
    )
    .unwrap();
    let table = Arc::new(enumerate(&pres, 1000).unwrap());
    let projection: BTreeMap<_, _> = [
        (named(h, "a"), Word::generator(ta)),
        (named(h, "b"), Word::generator(tb)),
        (named(h, "s"), Word::identity()),
    ]
    .into();
    QuotientCertificate::new(h.clone(), table, projection).unwrap()
}

/// Kernel seed for the doubling tower: the commutator of a conjugated square
/// with b, or with b^2 in the doubled variant.
pub fn doubling_tower_u(h: &Arc<GroupNode>, doubled: bool) -> Word {
    let b_exp = if doubled { 2 } else { 1 };
    commutator_in(h, &[("s", 1), ("a", 2), ("s", -1)], &[("b", b_exp)])
}

/// Outside-the-image element for the doubling tower.
pub fn doubling_tower_v(h: &Arc<GroupNode>) -> Word {
    word_in(h, &[("s", -1), ("a", 1), ("s", 1), ("a", -2)])
}

/// The full witness-run input for the doubling tower. The `doubled` flag
/// selects the variant whose kernel seed commutes against b^2 instead of b;
/// both satisfy every hypothesis, and running the pair documents that the
/// pipeline's verdict does not hinge on the choice.
pub fn doubling_tower_recipe(doubled: bool) -> RecipeInput {
    let h = doubling_tower();
    let name = if doubled { "G2" } else { "G" };
    let b_exp = if doubled { 2 } else { 1 };
    let x = extension_commutator_generator(name).unwrap();
    let t = extension_stable_letter(name).unwrap();
    let y = commutator_in(&h, &[("s", 1), ("a", 1), ("s", -1)], &[("b", b_exp)]);
    // a = psi~( s t [y, x] t^-1 a s^-1 ): the sandwich evaluates to v, and
    // s v a^2 s^-1 collapses to a.
    let a_witness = Word::generator(named(&h, "s"))
        .concat(
            &Word::commutator(&y, &Word::generator(x))
                .unwrap()
                .conjugate_by(&Word::generator(t))
                .unwrap(),
        )
        .unwrap()
        .concat(&word_in(&h, &[("a", 1), ("s", -1)]))
        .unwrap();
    let witnesses: BTreeMap<_, _> = [
        (named(&h, "a"), a_witness),
        (named(&h, "b"), Word::generator(named(&h, "b"))),
        (named(&h, "s"), Word::generator(named(&h, "s"))),
    ]
    .into();
    RecipeInput::new(
        name,
        h.clone(),
        doubling_tower_endo(&h),
        doubling_tower_u(&h, doubled),
        doubling_tower_v(&h),
        y,
        doubling_tower_cert(&h),
        witnesses,
        None,
    )
    .unwrap()
}

// ---------------------------------------------------------------------------
// Corpus: the eleven-node witness tower
// ---------------------------------------------------------------------------

/// The staged tower culminating in an eleven-node group: the order-18 leaf,
/// two stable letters, a rank-2 free factor, a rank-1 free factor, and four
/// more stable letters tying designated elements together.
pub struct TheoremTower {
    pub h0: Arc<GroupNode>,
    pub h1: Arc<GroupNode>,
    pub h2: Arc<GroupNode>,
    pub ef: Arc<GroupNode>,
    pub h: Arc<GroupNode>,
    pub a: Arc<GroupNode>,
    pub ha: Arc<GroupNode>,
    pub k1: Arc<GroupNode>,
    pub k: Arc<GroupNode>,
    pub g1: Arc<GroupNode>,
    pub g: Arc<GroupNode>,
}

impl TheoremTower {
    pub fn nodes(&self) -> Vec<&Arc<GroupNode>> {
        vec![
            &self.h0, &self.h1, &self.h2, &self.ef, &self.h, &self.a, &self.ha, &self.k1, &self.k,
            &self.g1, &self.g,
        ]
    }
}

pub fn theorem_tower() -> TheoremTower {
    let h0 = order18_leaf();
    let b = gid("b", "H0");
    let c = gid("c", "H0");
    let fwd: BTreeMap<_, _> = [
        (
            b.clone(),
            Word::from_letters([Letter::new(b.clone(), 1), Letter::new(c.clone(), -3)]).unwrap(),
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
    let h1 = GroupNode::hnn_automorphism("H1", h0.clone(), "s", fwd, bwd).unwrap();
    let s = gid("s", "H1");
    let h2 = GroupNode::hnn_cyclic(
        "H2",
        h1.clone(),
        "t",
        Word::generator(s.clone()),
        Word::letter(s.clone(), 3),
    )
    .unwrap();
    let ef = GroupNode::free("EF", &["e", "f"]).unwrap();
    let h = GroupNode::free_product("H", h2.clone(), ef.clone()).unwrap();
    let a_node = GroupNode::free("A", &["a"]).unwrap();
    let ha = GroupNode::free_product("HA", h.clone(), a_node.clone()).unwrap();

    let a = gid("a", "A");
    let bacb = Word::from_letters([
        Letter::new(b.clone(), 1),
        Letter::new(a.clone(), 1),
        Letter::new(c.clone(), 1),
        Letter::new(b.clone(), -1),
    ])
    .unwrap();
    let k1 =
        GroupNode::hnn_cyclic("K1", ha.clone(), "u", bacb, Word::generator(a.clone())).unwrap();

    let t = gid("t", "H2");
    let tst = Word::generator(s.clone())
        .conjugate_by(&Word::generator(t))
        .unwrap();
    let k = GroupNode::hnn_cyclic("K", k1.clone(), "v", Word::generator(a), tst).unwrap();

    let e = gid("e", "EF");
    let f = gid("f", "EF");
    let c3ec3e = Word::from_letters([
        Letter::new(c.clone(), 3),
        Letter::new(e.clone(), 1),
        Letter::new(c.clone(), 3),
        Letter::new(e, -1),
    ])
    .unwrap();
    let u_letter = Word::generator(gid("u", "K1"));
    let g1 = GroupNode::hnn_cyclic("G1", k.clone(), "x", u_letter, c3ec3e).unwrap();

    let c3fc3f = Word::from_letters([
        Letter::new(c.clone(), 3),
        Letter::new(f.clone(), 1),
        Letter::new(c, 3),
        Letter::new(f, -1),
    ])
    .unwrap();
    let v_letter = Word::generator(gid("v", "K"));
    let g = GroupNode::hnn_cyclic("G", g1.clone(), "y", v_letter, c3fc3f).unwrap();

    TheoremTower {
        h0,
        h1,
        h2,
        ef,
        h,
        a: a_node,
        ha,
        k1,
        k,
        g1,
        g,
    }
}

// ---------------------------------------------------------------------------
// Seeded randomized suites
// ---------------------------------------------------------------------------

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Free-reduction laws on the canonical word form: idempotence, inverse
/// cancellation, inverse involution, and power/concat agreement.
pub fn suite_free_reduction(seed: u64, cases: usize) -> Result<(), String> {
    let node = GroupNode::free("F", &["p", "q", "r", "z"]).map_err(|e| e.to_string())?;
    let mut rng = rng_for(seed);
    for case in 0..cases {
        let w = random_word(&node, &mut rng, 24);
        let recanon = Word::from_letters(w.letters().iter().cloned()).map_err(|e| e.to_string())?;
        if recanon != w {
            return Err(format!(
                "case {case}: canonical form not idempotent for {}",
                display_word(&w)
            ));
        }
        let cancelled = w.concat(&w.inverse()).map_err(|e| e.to_string())?;
        if !cancelled.is_empty() {
            return Err(format!(
                "case {case}: w w^-1 = {} did not freely cancel",
                display_word(&cancelled)
            ));
        }
        if w.inverse().inverse() != w {
            return Err(format!(
                "case {case}: double inverse broke {}",
                display_word(&w)
            ));
        }
        let squared = w.pow(2).map_err(|e| e.to_string())?;
        let doubled = w.concat(&w).map_err(|e| e.to_string())?;
        if squared != doubled {
            return Err(format!(
                "case {case}: pow(2) != w.w for {}",
                display_word(&w)
            ));
        }
        if w.pow(-1).map_err(|e| e.to_string())? != w.inverse() {
            return Err(format!(
                "case {case}: pow(-1) != inverse for {}",
                display_word(&w)
            ));
        }
    }
    Ok(())
}

/// In every corpus group, w w^-1 is the identity and equality is reflexive
/// and consistent with triviality.
pub fn suite_triviality(seed: u64, cases: usize) -> Result<(), String> {
    let towers = theorem_tower();
    let nodes: Vec<Arc<GroupNode>> = vec![
        order18_leaf(),
        order18_tower(),
        doubling_tower(),
        towers.g.clone(),
    ];
    let mut rng = rng_for(seed);
    let per_node = cases.div_ceil(nodes.len());
    for node in &nodes {
        for case in 0..per_node {
            let w = random_word(node, &mut rng, 8);
            let cancelled = w.concat(&w.inverse()).map_err(|e| e.to_string())?;
            let trivial = node.is_identity(&cancelled).map_err(|e| e.to_string())?;
            if !trivial {
                return Err(format!(
                    "{} case {case}: w w^-1 nontrivial for w = {}",
                    node.name(),
                    display_word(&w)
                ));
            }
            if !node.are_equal(&w, &w).map_err(|e| e.to_string())? {
                return Err(format!(
                    "{} case {case}: equality not reflexive for {}",
                    node.name(),
                    display_word(&w)
                ));
            }
            let is_id = node.is_identity(&w).map_err(|e| e.to_string())?;
            let eq_id = node
                .are_equal(&w, &Word::identity())
                .map_err(|e| e.to_string())?;
            if is_id != eq_id {
                return Err(format!(
                    "{} case {case}: is_identity and are_equal disagree on {}",
                    node.name(),
                    display_word(&w)
                ));
            }
        }
    }
    Ok(())
}

/// Table-backed triviality agrees with the hand-rolled oracle on random words
/// over the order-18 leaf.
pub fn suite_finite_oracle(seed: u64, cases: usize) -> Result<(), String> {
    let node = order18_leaf();
    let oracle = SemidirectOracle;
    let mut rng = rng_for(seed);
    for case in 0..cases {
        let w = random_word(&node, &mut rng, 12);
        let ours = node.is_identity(&w).map_err(|e| e.to_string())?;
        let theirs = oracle.evaluate(&w)? == SemidirectOracle::IDENTITY;
        if ours != theirs {
            return Err(format!(
                "case {case}: table says trivial={ours}, oracle says trivial={theirs} for {}",
                display_word(&w)
            ));
        }
        let w2 = random_word(&node, &mut rng, 12);
        let ours_eq = node.are_equal(&w, &w2).map_err(|e| e.to_string())?;
        let theirs_eq = oracle.evaluate(&w)? == oracle.evaluate(&w2)?;
        if ours_eq != theirs_eq {
            return Err(format!(
                "case {case}: equality disagreement between {} and {}",
                display_word(&w),
                display_word(&w2)
            ));
        }
    }
    Ok(())
}

/// Order computations honor their defining power contracts up to exponent 8.
pub fn suite_order_contracts(seed: u64, cases: usize) -> Result<(), String> {
    let nodes: Vec<Arc<GroupNode>> = vec![order18_leaf(), order18_tower(), doubling_tower()];
    let mut rng = rng_for(seed);
    let per_node = cases.div_ceil(nodes.len());
    for node in &nodes {
        for case in 0..per_node {
            let w = random_word(node, &mut rng, 6);
            match node.order(&w).map_err(|e| e.to_string())? {
                ElementOrder::Finite(n) => {
                    let wn = w.pow(n as i64).map_err(|e| e.to_string())?;
                    if !node.is_identity(&wn).map_err(|e| e.to_string())? {
                        return Err(format!(
                            "{} case {case}: w^{n} nontrivial though order(w) = {n}, w = {}",
                            node.name(),
                            display_word(&w)
                        ));
                    }
                    let upper = n.saturating_sub(1).min(8);
                    for m in 1..=upper {
                        let wm = w.pow(m as i64).map_err(|e| e.to_string())?;
                        if node.is_identity(&wm).map_err(|e| e.to_string())? {
                            return Err(format!(
                                "{} case {case}: w^{m} trivial though order(w) = {n}, w = {}",
                                node.name(),
                                display_word(&w)
                            ));
                        }
                    }
                }
                ElementOrder::Infinite => {
                    for m in 1..=8 {
                        let wm = w.pow(m).map_err(|e| e.to_string())?;
                        if node.is_identity(&wm).map_err(|e| e.to_string())? {
                            return Err(format!(
                                "{} case {case}: w^{m} trivial though order(w) = infinite, w = {}",
                                node.name(),
                                display_word(&w)
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// Cyclic-subgroup membership: true powers are always recognized, and every
/// claimed exponent reproduces the element.
pub fn suite_cyclic_member_contracts(seed: u64, cases: usize) -> Result<(), String> {
    let nodes: Vec<Arc<GroupNode>> = vec![order18_leaf(), order18_tower(), doubling_tower()];
    let mut rng = rng_for(seed);
    let per_node = cases.div_ceil(nodes.len());
    for node in &nodes {
        for case in 0..per_node {
            let gamma = random_word(node, &mut rng, 4);
            if node.is_identity(&gamma).map_err(|e| e.to_string())? {
                continue;
            }
            let n = rng.gen_range(-6i64..=6);
            let power = gamma.pow(n).map_err(|e| e.to_string())?;
            match node
                .cyclic_member(&gamma, &power)
                .map_err(|e| e.to_string())?
            {
                Some(m) => {
                    let gm = gamma.pow(m).map_err(|e| e.to_string())?;
                    if !node.are_equal(&gm, &power).map_err(|e| e.to_string())? {
                        return Err(format!(
                            "{} case {case}: claimed gamma^{m} = gamma^{n} fails for gamma = {}",
                            node.name(),
                            display_word(&gamma)
                        ));
                    }
                }
                None => {
                    return Err(format!(
                        "{} case {case}: gamma^{n} not recognized as a power of gamma = {}",
                        node.name(),
                        display_word(&gamma)
                    ));
                }
            }
            let probe = random_word(node, &mut rng, 6);
            if let Some(m) = node
                .cyclic_member(&gamma, &probe)
                .map_err(|e| e.to_string())?
            {
                let gm = gamma.pow(m).map_err(|e| e.to_string())?;
                if !node.are_equal(&gm, &probe).map_err(|e| e.to_string())? {
                    return Err(format!(
                        "{} case {case}: membership claimed exponent {m} but gamma^{m} != probe, \
                         gamma = {}, probe = {}",
                        node.name(),
                        display_word(&gamma),
                        display_word(&probe)
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Nontrivial words of a base stay nontrivial in towers built on it, and
/// equality is preserved and reflected.
pub fn suite_embedding(seed: u64, cases_per_pair: usize) -> Result<(), String> {
    let pairs: Vec<(Arc<GroupNode>, Arc<GroupNode>)> = vec![
        (order18_leaf(), order18_tower()),
        (doubling_leaf(), doubling_tower()),
    ];
    let mut rng = rng_for(seed);
    for (base, ext) in &pairs {
        let mut checked = 0usize;
        while checked < cases_per_pair {
            let w = random_word(base, &mut rng, 8);
            if base.is_identity(&w).map_err(|e| e.to_string())? {
                continue;
            }
            checked += 1;
            if ext.is_identity(&w).map_err(|e| e.to_string())? {
                return Err(format!(
                    "word {} nontrivial in {} but trivial in {}",
                    display_word(&w),
                    base.name(),
                    ext.name()
                ));
            }
            let w2 = random_word(base, &mut rng, 8);
            let below = base.are_equal(&w, &w2).map_err(|e| e.to_string())?;
            let above = ext.are_equal(&w, &w2).map_err(|e| e.to_string())?;
            if below != above {
                return Err(format!(
                    "equality of {} and {} differs between {} ({below}) and {} ({above})",
                    display_word(&w),
                    display_word(&w2),
                    base.name(),
                    ext.name()
                ));
            }
        }
    }
    Ok(())
}

/// The corpus self-maps are multiplicative on random word pairs.
pub fn suite_endo_multiplicativity(seed: u64, cases: usize) -> Result<(), String> {
    let h = order18_tower();
    let hab = doubling_tower();
    let setups = [
        (h.clone(), order18_tower_endo(&h)),
        (hab.clone(), doubling_tower_endo(&hab)),
    ];
    let mut rng = rng_for(seed);
    let per_setup = cases.div_ceil(setups.len());
    for (node, psi) in &setups {
        for case in 0..per_setup {
            let u = random_word(node, &mut rng, 6);
            let v = random_word(node, &mut rng, 6);
            let uv = u.concat(&v).map_err(|e| e.to_string())?;
            let lhs = psi.apply(&uv).map_err(|e| e.to_string())?;
            let rhs = psi
                .apply(&u)
                .map_err(|e| e.to_string())?
                .concat(&psi.apply(&v).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            if !node.are_equal(&lhs, &rhs).map_err(|e| e.to_string())? {
                return Err(format!(
                    "{} case {case}: psi(uv) != psi(u)psi(v) for u = {}, v = {}",
                    node.name(),
                    display_word(&u),
                    display_word(&v)
                ));
            }
        }
    }
    Ok(())
}

/// Adjoining a free letter always makes [w, x] hyperbolic for nontrivial w,
/// and the certificate refuses trivial seeds.
pub fn suite_hyperbolicity(seed: u64, cases: usize) -> Result<(), String> {
    let nodes: Vec<Arc<GroupNode>> = vec![order18_tower(), doubling_tower()];
    let mut rng = rng_for(seed);
    let per_node = cases.div_ceil(nodes.len());
    for node in &nodes {
        for case in 0..per_node {
            let w = random_word(node, &mut rng, 5);
            let trivial = node.is_identity(&w).map_err(|e| e.to_string())?;
            match certify_hyperbolic(node, &w) {
                Ok(cert) => {
                    if trivial {
                        return Err(format!(
                            "{} case {case}: trivial seed {} was certified",
                            node.name(),
                            display_word(&w)
                        ));
                    }
                    if !cert.hyperbolic || cert.syllable_count != 4 {
                        return Err(format!(
                            "{} case {case}: [w, x] should have 4 cyclically reduced syllables, \
                             got {} for w = {}",
                            node.name(),
                            cert.syllable_count,
                            display_word(&w)
                        ));
                    }
                }
                Err(RecipeError::TrivialU) => {
                    if !trivial {
                        return Err(format!(
                            "{} case {case}: nontrivial seed {} rejected as trivial",
                            node.name(),
                            display_word(&w)
                        ));
                    }
                }
                Err(other) => return Err(format!("{} case {case}: {other}", node.name())),
            }
        }
    }
    Ok(())
}

/// Runs every suite at the given scale with derived seeds; used by the
/// acceptance harness.
pub fn run_all_suites(seed: u64) -> Result<(), String> {
    suite_free_reduction(seed, 1000).map_err(|e| format!("free reduction: {e}"))?;
    suite_triviality(seed.wrapping_add(1), 1000).map_err(|e| format!("triviality: {e}"))?;
    suite_finite_oracle(seed.wrapping_add(2), 1000).map_err(|e| format!("finite oracle: {e}"))?;
    suite_order_contracts(seed.wrapping_add(3), 1000).map_err(|e| format!("order: {e}"))?;
    suite_cyclic_member_contracts(seed.wrapping_add(4), 1000)
        .map_err(|e| format!("cyclic membership: {e}"))?;
    suite_embedding(seed.wrapping_add(5), 200).map_err(|e| format!("embedding: {e}"))?;
    suite_endo_multiplicativity(seed.wrapping_add(6), 500)
        .map_err(|e| format!("multiplicativity: {e}"))?;
    suite_hyperbolicity(seed.wrapping_add(7), 100).map_err(|e| format!("hyperbolicity: {e}"))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_matches_the_enumerated_table() {
        let node = order18_leaf();
        let crate::tower::NodeKind::Finite(table) = node.kind() else {
            panic!("leaf must be table-backed");
        };
        oracle_agreement(table).unwrap();
    }

    #[test]
    fn oracle_relations_hold() {
        let oracle = SemidirectOracle;
        let b = OracleElement {
            rotation: 0,
            flipped: true,
        };
        let c = OracleElement {
            rotation: 1,
            flipped: false,
        };
        // b^2 = 1
        assert_eq!(oracle.mul(b, b), SemidirectOracle::IDENTITY);
        // c^9 = 1
        let mut c9 = SemidirectOracle::IDENTITY;
        for _ in 0..9 {
            c9 = oracle.mul(c9, c);
        }
        assert_eq!(c9, SemidirectOracle::IDENTITY);
        // b^-1 c b = c^-1
        let conj = oracle.mul(oracle.mul(oracle.inverse(b), c), b);
        assert_eq!(conj, oracle.inverse(c));
        assert_eq!(oracle.elements().len(), 18);
    }

    #[test]
    fn theorem_tower_builds_and_collects_generators() {
        let towers = theorem_tower();
        assert_eq!(towers.nodes().len(), 11);
        let names: Vec<&str> = towers.g.generators().iter().map(|g| g.name()).collect();
        assert_eq!(
            names,
            ["b", "c", "s", "t", "e", "f", "a", "u", "v", "x", "y"]
        );
    }

    #[test]
    fn theorem_tower_smoke_identities() {
        let towers = theorem_tower();
        // s^-1 b s = b c^-3 one level up.
        let lhs = word_in(&towers.h1, &[("s", -1), ("b", 1), ("s", 1)]);
        let rhs = word_in(&towers.h1, &[("b", 1), ("c", -3)]);
        assert!(towers.h1.are_equal(&lhs, &rhs).unwrap());
        // t^-1 s t = s^3 two levels up.
        let lhs = word_in(&towers.h2, &[("t", -1), ("s", 1), ("t", 1)]);
        let rhs = word_in(&towers.h2, &[("s", 3)]);
        assert!(towers.h2.are_equal(&lhs, &rhs).unwrap());
        // u^-1 (b a c b^-1) u = a after the first designated junction.
        let lhs = word_in(
            &towers.k,
            &[("u", -1), ("b", 1), ("a", 1), ("c", 1), ("b", -1), ("u", 1)],
        );
        let rhs = word_in(&towers.k, &[("a", 1)]);
        assert!(towers.k.are_equal(&lhs, &rhs).unwrap());
        // y^-1 v y = c^3 f c^3 f^-1 at the top.
        let lhs = word_in(&towers.g, &[("y", -1), ("v", 1), ("y", 1)]);
        let rhs = word_in(&towers.g, &[("c", 3), ("f", 1), ("c", 3), ("f", -1)]);
        assert!(towers.g.are_equal(&lhs, &rhs).unwrap());
    }

    #[test]
    fn randomized_suites_pass_at_reduced_scale() {
        suite_free_reduction(11, 200).unwrap();
        suite_triviality(12, 120).unwrap();
        suite_finite_oracle(13, 300).unwrap();
        suite_order_contracts(14, 90).unwrap();
        suite_cyclic_member_contracts(15, 90).unwrap();
        suite_embedding(16, 60).unwrap();
        suite_endo_multiplicativity(17, 120).unwrap();
        suite_hyperbolicity(18, 40).unwrap();
    }
}
