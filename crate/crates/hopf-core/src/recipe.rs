//! The witness pipeline.
//!
//! Given a base tower `H`, a verified self-map `psi`, a pair of words `u`,
//! `v`, a preimage witness for `u`, a non-membership certificate for `v`, and
//! per-generator surjectivity witnesses, this module:
//!
//! 1. checks the element hypotheses (`u`, `v` nontrivial, `u^2` nontrivial,
//!    `v` of infinite order, both in the kernel of `psi`, `u` in its image,
//!    `v` certified outside it),
//! 2. adjoins a free letter `x` and a stable letter `t` with the relation
//!    `t^-1 v t = [u, x]` to build the extension group,
//! 3. extends `psi` over the extension by fixing `x` and `t`,
//! 4. certifies that `[u, x]` is a hyperbolic element of the free product
//!    and searches a bounded ball for violations of the claim that its
//!    centralizing/inverting elements are exactly its own cyclic subgroup,
//! 5. verifies surjectivity witnesses and the nontrivial-kernel property,
//!    and assembles the resulting witness: a surjective, non-injective
//!    self-map of the extension.
//!
//! Every step lands in a report entry; the witness is only emitted when all
//! non-assumed entries pass.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use thiserror::Error;

use crate::morphism::{Endomorphism, MorphismError, NonMembershipOutcome, QuotientCertificate};
use crate::report::{ReportEntry, Status, VerificationReport};
use crate::tower::{GroupNode, TowerError};
use crate::word::{display_word, GeneratorId, Letter, Word, WordError};

#[derive(Debug, Error)]
pub enum RecipeError {
    #[error("hypothesis checks did not all pass; the extension must not be built")]
    HypothesesNotChecked,
    #[error("the extended map fails relator checking: {0}")]
    HomomorphismCheckFailed(String),
    #[error("u reduces to the identity; nothing to certify")]
    TrivialU,
    #[error("surjectivity witness failed: {0}")]
    SurjectivityWitnessFailed(String),
    #[error("non-injectivity check failed: {0}")]
    NonInjectivityFailed(String),
    #[error("stage {id} did not pass: {evidence}")]
    StageFailed { id: String, evidence: String },
    #[error("the self-map must be verified before it enters a recipe")]
    UnverifiedEndomorphism,
    #[error("{part} is defined over {got}, but the recipe base is {want}")]
    DomainMismatch {
        part: &'static str,
        got: String,
        want: String,
    },
    #[error("no surjectivity witness for generator {0}")]
    MissingWitness(GeneratorId),
    #[error("surjectivity witness given for {0}, which is not a base generator")]
    ExtraWitness(GeneratorId),
    #[error("witness for {gen} uses {letter}, which is neither a base generator nor an extension letter")]
    ForeignWitnessLetter {
        gen: GeneratorId,
        letter: GeneratorId,
    },
    #[error("base generator {0} clashes with a reserved extension letter name")]
    ReservedGeneratorName(GeneratorId),
    #[error(transparent)]
    Tower(#[from] TowerError),
    #[error(transparent)]
    Morphism(#[from] MorphismError),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// Default bounds for [`elementary_search`].
pub const DEFAULT_MAX_LEN: u32 = 4;
pub const DEFAULT_MAX_POW: u32 = 2;

/// Evidence string for claims recorded on cited authority when the input
/// supplies none.
pub const DEFAULT_HOPFIAN_CITATION: &str =
    "Hopficity of the base group is taken from the literature, not machine-checked";

/// The free letter adjoined to the base before the stable letter; scoped to
/// a synthetic node name derived from the recipe name.
pub fn extension_commutator_generator(recipe: &str) -> Result<GeneratorId, WordError> {
    GeneratorId::new("x", &format!("{recipe}_x"))
}

/// The stable letter of the extension; scoped to the extension node itself.
pub fn extension_stable_letter(recipe: &str) -> Result<GeneratorId, WordError> {
    GeneratorId::new("t", recipe)
}

/// Everything a witness run consumes, validated at construction.
#[derive(Clone, Debug)]
pub struct RecipeInput {
    name: String,
    base: Arc<GroupNode>,
    psi: Endomorphism,
    u: Word,
    v: Word,
    preimage_witness: Word,
    cert: QuotientCertificate,
    surjectivity_witnesses: BTreeMap<GeneratorId, Word>,
    hopfian_citation: String,
}

impl RecipeInput {
    /// Structural validation only: words over the right scopes, maps total,
    /// the self-map verified. Whether the hypotheses HOLD is the pipeline's
    /// business, not the constructor's.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: &str,
        base: Arc<GroupNode>,
        psi: Endomorphism,
        u: Word,
        v: Word,
        preimage_witness: Word,
        cert: QuotientCertificate,
        surjectivity_witnesses: BTreeMap<GeneratorId, Word>,
        hopfian_citation: Option<String>,
    ) -> Result<Self, RecipeError> {
        let x = extension_commutator_generator(name)?;
        let t = extension_stable_letter(name)?;
        if !Arc::ptr_eq(psi.domain(), &base) {
            return Err(RecipeError::DomainMismatch {
                part: "the self-map",
                got: psi.domain().name().to_string(),
                want: base.name().to_string(),
            });
        }
        if !Arc::ptr_eq(cert.domain(), &base) {
            return Err(RecipeError::DomainMismatch {
                part: "the certificate",
                got: cert.domain().name().to_string(),
                want: base.name().to_string(),
            });
        }
        if !psi.is_verified() {
            return Err(RecipeError::UnverifiedEndomorphism);
        }
        base.validate_word(&u)?;
        base.validate_word(&v)?;
        base.validate_word(&preimage_witness)?;
        for g in base.generators() {
            if g.name() == x.name() || g.name() == t.name() {
                return Err(RecipeError::ReservedGeneratorName(g.clone()));
            }
            let witness = surjectivity_witnesses
                .get(g)
                .ok_or_else(|| RecipeError::MissingWitness(g.clone()))?;
            for l in witness.letters() {
                if !(base.contains_generator(&l.gen) || l.gen == x || l.gen == t) {
                    return Err(RecipeError::ForeignWitnessLetter {
                        gen: g.clone(),
                        letter: l.gen.clone(),
                    });
                }
            }
        }
        for g in surjectivity_witnesses.keys() {
            if !base.contains_generator(g) {
                return Err(RecipeError::ExtraWitness(g.clone()));
            }
        }
        Ok(RecipeInput {
            name: name.to_string(),
            base,
            psi,
            u,
            v,
            preimage_witness,
            cert,
            surjectivity_witnesses,
            hopfian_citation: hopfian_citation
                .unwrap_or_else(|| DEFAULT_HOPFIAN_CITATION.to_string()),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn base(&self) -> &Arc<GroupNode> {
        &self.base
    }

    pub fn psi(&self) -> &Endomorphism {
        &self.psi
    }

    pub fn u(&self) -> &Word {
        &self.u
    }

    pub fn v(&self) -> &Word {
        &self.v
    }

    pub fn preimage_witness(&self) -> &Word {
        &self.preimage_witness
    }

    pub fn cert(&self) -> &QuotientCertificate {
        &self.cert
    }

    pub fn surjectivity_witnesses(&self) -> &BTreeMap<GeneratorId, Word> {
        &self.surjectivity_witnesses
    }

    pub fn hopfian_citation(&self) -> &str {
        &self.hopfian_citation
    }
}

/// The eight element hypotheses as report entries.
#[derive(Clone, Debug)]
pub struct HypothesisReport {
    pub entries: Vec<ReportEntry>,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.status == Status::Pass)
    }
}

fn fallible(body: impl FnOnce() -> Result<(Status, String), String>) -> (Status, String) {
    body().unwrap_or_else(|msg| (Status::Fail, format!("check could not run: {msg}")))
}

/// Checks the element hypotheses over the base tower. Failures are entries,
/// never errors, so a report is produced for any structurally valid input.
pub fn check_hypotheses(input: &RecipeInput) -> HypothesisReport {
    let h = &input.base;
    let psi = &input.psi;
    let eid = |suffix: &str| format!("recipe.{}.hyp.{suffix}", input.name);
    let mut entries = Vec::new();

    entries.push(ReportEntry::timed(
        eid("u-nontrivial"),
        "u is nontrivial in the base group",
        || {
            fallible(|| {
                let trivial = h.is_identity(&input.u).map_err(|e| e.to_string())?;
                Ok(if trivial {
                    (Status::Fail, "u reduces to the identity".into())
                } else {
                    (Status::Pass, format!("u = {}", display_word(&input.u)))
                })
            })
        },
    ));

    entries.push(ReportEntry::timed(
        eid("u-squared"),
        "u^2 is nontrivial in the base group",
        || {
            fallible(|| {
                let u2 = input.u.pow(2).map_err(|e| e.to_string())?;
                let trivial = h.is_identity(&u2).map_err(|e| e.to_string())?;
                Ok(if trivial {
                    (Status::Fail, "u^2 reduces to the identity".into())
                } else {
                    (
                        Status::Pass,
                        format!("u^2 = {} is nontrivial", display_word(&u2)),
                    )
                })
            })
        },
    ));

    entries.push(ReportEntry::timed(
        eid("v-nontrivial"),
        "v is nontrivial in the base group",
        || {
            fallible(|| {
                let trivial = h.is_identity(&input.v).map_err(|e| e.to_string())?;
                Ok(if trivial {
                    (Status::Fail, "v reduces to the identity".into())
                } else {
                    (Status::Pass, format!("v = {}", display_word(&input.v)))
                })
            })
        },
    ));

    entries.push(ReportEntry::timed(
        eid("v-infinite"),
        "v has infinite order in the base group",
        || {
            fallible(|| {
                let order = h.order(&input.v).map_err(|e| e.to_string())?;
                let reduced = h.normalize(&input.v).map_err(|e| e.to_string())?;
                Ok(if order.is_infinite() {
                    (
                        Status::Pass,
                        format!(
                            "order(v) = infinite; reduced form {}",
                            display_word(&reduced)
                        ),
                    )
                } else {
                    (Status::Fail, format!("order(v) = {order}"))
                })
            })
        },
    ));

    entries.push(ReportEntry::timed(
        eid("u-in-kernel"),
        "u lies in the kernel of the self-map",
        || {
            fallible(|| {
                let image = psi.apply(&input.u).map_err(|e| e.to_string())?;
                let in_ker = h.is_identity(&image).map_err(|e| e.to_string())?;
                Ok(if in_ker {
                    (
                        Status::Pass,
                        format!("psi(u) = {} reduces to the identity", display_word(&image)),
                    )
                } else {
                    (
                        Status::Fail,
                        format!("psi(u) = {} is nontrivial", display_word(&image)),
                    )
                })
            })
        },
    ));

    entries.push(ReportEntry::timed(
        eid("v-in-kernel"),
        "v lies in the kernel of the self-map",
        || {
            fallible(|| {
                let image = psi.apply(&input.v).map_err(|e| e.to_string())?;
                let in_ker = h.is_identity(&image).map_err(|e| e.to_string())?;
                Ok(if in_ker {
                    (
                        Status::Pass,
                        format!("psi(v) = {} reduces to the identity", display_word(&image)),
                    )
                } else {
                    (
                        Status::Fail,
                        format!("psi(v) = {} is nontrivial", display_word(&image)),
                    )
                })
            })
        },
    ));

    entries.push(ReportEntry::timed(
        eid("u-in-image"),
        "the witness y maps onto u",
        || {
            fallible(|| {
                let ok = psi
                    .verify_preimage(&input.u, &input.preimage_witness)
                    .map_err(|e| e.to_string())?;
                Ok(if ok {
                    (
                        Status::Pass,
                        format!(
                            "psi(y) = u with y = {}",
                            display_word(&input.preimage_witness)
                        ),
                    )
                } else {
                    (
                        Status::Fail,
                        format!(
                            "psi(y) differs from u for y = {}",
                            display_word(&input.preimage_witness)
                        ),
                    )
                })
            })
        },
    ));

    entries.push(ReportEntry::timed(
        eid("v-outside-image"),
        "the certificate places v outside the image of the self-map",
        || {
            fallible(|| {
                let subgroup: Vec<Word> = h
                    .generators()
                    .iter()
                    .map(|g| input.psi.images()[g].clone())
                    .collect();
                let outcome = input
                    .cert
                    .verify_nonmembership(&subgroup, &input.v)
                    .map_err(|e| e.to_string())?;
                Ok(match outcome {
                    NonMembershipOutcome::Certified {
                        element_index,
                        subgroup_order,
                        target_order,
                    } => (
                        Status::Pass,
                        format!(
                            "in the order-{target_order} quotient, v lands at index \
                             {element_index}, outside the projected image subgroup of order \
                             {subgroup_order}"
                        ),
                    ),
                    NonMembershipOutcome::Inconclusive { subgroup_order, .. } => (
                        Status::Inconclusive,
                        format!(
                            "v projects into the projected image subgroup (order \
                             {subgroup_order}); the certificate cannot separate them"
                        ),
                    ),
                })
            })
        },
    ));

    HypothesisReport { entries }
}

/// The constructed extension, together with the adjoined letters.
#[derive(Clone, Debug)]
pub struct Extension {
    pub group: Arc<GroupNode>,
    pub free_product: Arc<GroupNode>,
    pub x: GeneratorId,
    pub t: GeneratorId,
    pub commutator: Word,
}

/// Adjoins the free letter and the stable letter: the extension is the HNN
/// node over `base * <x>` whose stable letter conjugates `v` to `[u, x]`.
/// Construction-time association validation requires both of those words to
/// have infinite order, which is exactly the isomorphism obligation between
/// the two cyclic subgroups.
pub fn build_extension(
    input: &RecipeInput,
    hypotheses: &HypothesisReport,
) -> Result<Extension, RecipeError> {
    if !hypotheses.all_pass() {
        return Err(RecipeError::HypothesesNotChecked);
    }
    let x_node = GroupNode::free(&format!("{}_x", input.name), &["x"])?;
    let x = x_node.generators()[0].clone();
    let free_product =
        GroupNode::free_product(&format!("{}_fp", input.name), input.base.clone(), x_node)?;
    let commutator = Word::commutator(&input.u, &Word::generator(x.clone()))?;
    let group = GroupNode::hnn_cyclic(
        &input.name,
        free_product.clone(),
        "t",
        input.v.clone(),
        commutator.clone(),
    )?;
    let t = extension_stable_letter(&input.name)?;
    Ok(Extension {
        group,
        free_product,
        x,
        t,
        commutator,
    })
}

/// Extends the base self-map over the extension by fixing `x` and `t`, then
/// verifies it against the extension's full relator list — including the new
/// relation, whose preservation is precisely what the kernel hypotheses buy.
pub fn extend_endomorphism(
    input: &RecipeInput,
    ext: &Extension,
) -> Result<Endomorphism, RecipeError> {
    let mut images = input.psi.images().clone();
    images.insert(ext.x.clone(), Word::generator(ext.x.clone()));
    images.insert(ext.t.clone(), Word::generator(ext.t.clone()));
    let mut tilde = Endomorphism::new(ext.group.clone(), images)?;
    let check = tilde.verify()?;
    if !check.ok {
        let list = check
            .failing_relators
            .iter()
            .map(display_word)
            .collect::<Vec<_>>()
            .join(", ");
        return Err(RecipeError::HomomorphismCheckFailed(list));
    }
    Ok(tilde)
}

/// Whether `[u, x]` is a hyperbolic element of `base * <x>`, decided by its
/// cyclically reduced syllable length.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HyperbolicityCertificate {
    pub hyperbolic: bool,
    pub syllable_count: usize,
}

fn probe_product(
    base: &Arc<GroupNode>,
    tag: &str,
) -> Result<(Arc<GroupNode>, GeneratorId), RecipeError> {
    let x_node = GroupNode::free(&format!("{}_{tag}_x", base.name()), &["x"])?;
    let x = x_node.generators()[0].clone();
    let fp = GroupNode::free_product(&format!("{}_{tag}", base.name()), base.clone(), x_node)?;
    Ok((fp, x))
}

/// Certifies that `[u, x]` neither is trivial nor conjugates into a free
/// factor: its cyclically reduced form must keep at least two syllables.
pub fn certify_hyperbolic(
    base: &Arc<GroupNode>,
    u: &Word,
) -> Result<HyperbolicityCertificate, RecipeError> {
    base.validate_word(u)?;
    if base.is_identity(u)? {
        return Err(RecipeError::TrivialU);
    }
    let (fp, x) = probe_product(base, "probe")?;
    let commutator = Word::commutator(u, &Word::generator(x))?;
    let (_, sylls) = fp.cyclically_reduced_syllables(&commutator)?;
    Ok(HyperbolicityCertificate {
        hyperbolic: sylls.len() >= 2,
        syllable_count: sylls.len(),
    })
}

/// Bounded search for violations of the claim that the only elements
/// conjugating a power of `[u, x]` to a power of itself are the powers of
/// `[u, x]`.
///
/// Enumerates, in length-lexicographic order, every freely reduced word `f`
/// of letter-length at most `max_len` over the generators of `base * <x>`,
/// skips those lying in the cyclic subgroup of `[u, x]`, and reports any
/// survivor with `f [u,x]^n f^-1 = [u,x]^{+-n}` for some `1 <= n <= max_pow`.
/// An empty result means no counterexample exists at this scale.
pub fn elementary_search(
    base: &Arc<GroupNode>,
    u: &Word,
    max_len: u32,
    max_pow: u32,
) -> Result<Vec<Word>, RecipeError> {
    base.validate_word(u)?;
    if base.is_identity(u)? {
        return Err(RecipeError::TrivialU);
    }
    let (fp, x) = probe_product(base, "search")?;
    let commutator = Word::commutator(u, &Word::generator(x))?;
    let powers: Vec<Word> = (1..=i64::from(max_pow))
        .map(|n| commutator.pow(n))
        .collect::<Result<_, _>>()?;
    let alphabet: Vec<Letter> = fp
        .generators()
        .iter()
        .flat_map(|g| [Letter::new(g.clone(), 1), Letter::new(g.clone(), -1)])
        .collect();

    fn visit_reduced(
        alphabet: &[Letter],
        current: &mut Vec<Letter>,
        length: u32,
        sink: &mut dyn FnMut(&[Letter]) -> Result<(), RecipeError>,
    ) -> Result<(), RecipeError> {
        if length == 0 {
            return sink(current);
        }
        for l in alphabet {
            if let Some(last) = current.last() {
                if last.gen == l.gen && last.exp == -l.exp {
                    continue;
                }
            }
            current.push(l.clone());
            visit_reduced(alphabet, current, length - 1, sink)?;
            current.pop();
        }
        Ok(())
    }

    let mut found = Vec::new();
    for length in 1..=max_len {
        let mut current = Vec::new();
        visit_reduced(&alphabet, &mut current, length, &mut |letters| {
            let f = Word::from_letters(letters.iter().cloned())?;
            if fp.cyclic_member(&commutator, &f)?.is_some() {
                return Ok(());
            }
            for c_n in &powers {
                let conjugated = c_n.conjugate_by(&f)?;
                if fp.are_equal(&conjugated, c_n)? || fp.are_equal(&conjugated, &c_n.inverse())? {
                    found.push(f);
                    break;
                }
            }
            Ok(())
        })?;
    }
    Ok(found)
}

/// A surjective self-map with nontrivial kernel, plus the report that
/// justifies it.
#[derive(Clone, Debug)]
pub struct NonHopfWitness {
    pub group: Arc<GroupNode>,
    pub psi_tilde: Endomorphism,
    pub kernel_element: Word,
    pub checks: VerificationReport,
    pub hopfian_assumption: String,
}

/// The report entries of one pipeline run, plus the witness when every
/// non-assumed entry passed.
#[derive(Clone, Debug)]
pub struct RecipeOutcome {
    pub entries: Vec<ReportEntry>,
    pub witness: Option<NonHopfWitness>,
}

fn staged<T>(
    entries: &mut Vec<ReportEntry>,
    id: String,
    description: &str,
    body: impl FnOnce() -> Result<(T, String), String>,
) -> Option<T> {
    let start = Instant::now();
    let (value, status, evidence) = match body() {
        Ok((value, evidence)) => (Some(value), Status::Pass, evidence),
        Err(evidence) => (None, Status::Fail, evidence),
    };
    let mut entry = ReportEntry::new(id, description, status, evidence);
    entry.elapsed_ms = start.elapsed().as_millis() as u64;
    entries.push(entry);
    value
}

/// Runs the full pipeline, emitting entries in a fixed order. Stages whose
/// inputs failed to materialize are skipped behind a single aborted entry.
pub fn run_recipe(input: &RecipeInput, max_len: u32, max_pow: u32) -> RecipeOutcome {
    let rid = |suffix: &str| format!("recipe.{}.{suffix}", input.name);
    let hypotheses = check_hypotheses(input);
    let hypotheses_pass = hypotheses.all_pass();
    let mut entries = hypotheses.entries.clone();

    let abort = |entries: &mut Vec<ReportEntry>, stage: &str| {
        entries.push(ReportEntry::new(
            rid("aborted"),
            "remaining stages skipped",
            Status::Fail,
            format!("{stage} did not pass; the witness cannot be assembled"),
        ));
    };

    if !hypotheses_pass {
        abort(&mut entries, "hypothesis checking");
        return RecipeOutcome {
            entries,
            witness: None,
        };
    }

    let ext = staged(
        &mut entries,
        rid("extension"),
        "the extension group is constructed over the base",
        || {
            build_extension(input, &hypotheses)
                .map(|ext| {
                    let evidence = format!(
                        "t^-1 ({}) t = {} over {}; both sides of infinite order",
                        display_word(&input.v),
                        display_word(&ext.commutator),
                        ext.free_product.name(),
                    );
                    (ext, evidence)
                })
                .map_err(|e| e.to_string())
        },
    );
    let Some(ext) = ext else {
        abort(&mut entries, "extension construction");
        return RecipeOutcome {
            entries,
            witness: None,
        };
    };

    staged(
        &mut entries,
        rid("hyperbolic"),
        "[u, x] is a hyperbolic element of the free product",
        || match certify_hyperbolic(&input.base, &input.u) {
            Ok(cert) if cert.hyperbolic => Ok((
                (),
                format!("cyclically reduced syllable count {}", cert.syllable_count),
            )),
            Ok(cert) => Err(format!(
                "cyclically reduced syllable count {} < 2",
                cert.syllable_count
            )),
            Err(e) => Err(e.to_string()),
        },
    );

    staged(
        &mut entries,
        rid("elementary-search"),
        "no short word outside <[u,x]> conjugates a power of [u,x] to a power of [u,x]",
        || {
            match elementary_search(&input.base, &input.u, max_len, max_pow) {
            Ok(found) if found.is_empty() => Ok((
                (),
                format!("no counterexample among freely reduced words of length <= {max_len} with powers <= {max_pow}"),
            )),
            Ok(found) => Err(format!(
                "conjugating words found outside the cyclic subgroup: {}",
                found.iter().map(display_word).collect::<Vec<_>>().join(", ")
            )),
            Err(e) => Err(e.to_string()),
        }
        },
    );

    let tilde = staged(
        &mut entries,
        rid("endo-extends"),
        "the self-map extends over the extension, fixing x and t",
        || {
            extend_endomorphism(input, &ext)
                .map(|tilde| {
                    let evidence = format!(
                        "all {} relators preserved, including the new relation",
                        ext.group.relators().len()
                    );
                    (tilde, evidence)
                })
                .map_err(|e| e.to_string())
        },
    );
    let Some(tilde) = tilde else {
        abort(&mut entries, "endomorphism extension");
        return RecipeOutcome {
            entries,
            witness: None,
        };
    };

    staged(
        &mut entries,
        rid("image-contains-v"),
        "v lies in the image of the extended map",
        || {
            let err = |e: &dyn std::fmt::Display| e.to_string();
            let bracket =
                Word::commutator(&input.preimage_witness, &Word::generator(ext.x.clone()))
                    .map_err(|e| err(&e))?;
            let conjugated = bracket
                .conjugate_by(&Word::generator(ext.t.clone()))
                .map_err(|e| err(&e))?;
            let image = tilde.apply(&conjugated).map_err(|e| err(&e))?;
            if ext.group.are_equal(&image, &input.v).map_err(|e| err(&e))? {
                Ok((
                    (),
                    format!(
                        "the extended map sends t [y, x] t^-1 to v, with y = {}",
                        display_word(&input.preimage_witness)
                    ),
                ))
            } else {
                Err(format!(
                    "the extended map sends t [y, x] t^-1 to {}, not to v",
                    display_word(&image)
                ))
            }
        },
    );

    for g in ext.group.generators() {
        let witness_word = if *g == ext.x || *g == ext.t {
            Word::generator(g.clone())
        } else {
            input.surjectivity_witnesses[g].clone()
        };
        staged(
            &mut entries,
            format!("recipe.{}.surjective.{}", input.name, g.name()),
            &format!("{} lies in the image of the extended map", g.name()),
            || {
                let err = |e: &dyn std::fmt::Display| e.to_string();
                let image = tilde.apply(&witness_word).map_err(|e| err(&e))?;
                let target = Word::generator(g.clone());
                if ext.group.are_equal(&image, &target).map_err(|e| err(&e))? {
                    Ok(((), format!("preimage {}", display_word(&witness_word))))
                } else {
                    Err(format!(
                        "the claimed preimage {} maps to {} instead",
                        display_word(&witness_word),
                        display_word(&image)
                    ))
                }
            },
        );
    }

    staged(
        &mut entries,
        rid("kernel-nontrivial"),
        "u is a nontrivial element of the kernel of the extended map",
        || {
            let err = |e: &dyn std::fmt::Display| e.to_string();
            let in_kernel = tilde.in_kernel(&input.u).map_err(|e| err(&e))?;
            let trivial = ext.group.is_identity(&input.u).map_err(|e| err(&e))?;
            match (in_kernel, trivial) {
                (true, false) => Ok((
                    (),
                    format!(
                        "the extended map kills u = {}, which is nontrivial in the extension",
                        display_word(&input.u)
                    ),
                )),
                (false, _) => Err("the image of u under the extended map is nontrivial".into()),
                (_, true) => Err("u itself reduces to the identity in the extension".into()),
            }
        },
    );

    entries.push(ReportEntry::new(
        rid("relative-hyperbolicity"),
        "the extension is hyperbolic relative to the base group",
        Status::Assumed,
        "theorem-backed: relative hyperbolicity of the free product, hyperbolically embedded \
         cyclic subgroup, and the HNN combination over infinite cyclic associated subgroups; \
         premises checked above, conclusion cited",
    ));
    entries.push(ReportEntry::new(
        rid("base-hopfian"),
        "the base group is Hopfian",
        Status::Assumed,
        input.hopfian_citation.clone(),
    ));

    let clean = entries
        .iter()
        .all(|e| matches!(e.status, Status::Pass | Status::Assumed));
    let witness = clean.then(|| NonHopfWitness {
        group: ext.group.clone(),
        psi_tilde: tilde.clone(),
        kernel_element: input.u.clone(),
        checks: VerificationReport::assemble(input.name.clone(), entries.clone(), true),
        hopfian_assumption: input.hopfian_citation.clone(),
    });
    RecipeOutcome { entries, witness }
}

/// Runs the pipeline and insists on a witness, converting the first failing
/// entry into the matching error otherwise.
pub fn assemble_nonhopf(
    input: &RecipeInput,
    max_len: u32,
    max_pow: u32,
) -> Result<NonHopfWitness, RecipeError> {
    let outcome = run_recipe(input, max_len, max_pow);
    if let Some(witness) = outcome.witness {
        return Ok(witness);
    }
    let first_bad = outcome
        .entries
        .iter()
        .find(|e| matches!(e.status, Status::Fail | Status::Inconclusive))
        .cloned();
    Err(match first_bad {
        Some(e) if e.id.contains(".hyp.") => RecipeError::HypothesesNotChecked,
        Some(e) if e.id.ends_with(".endo-extends") => {
            RecipeError::HomomorphismCheckFailed(e.evidence)
        }
        Some(e) if e.id.contains(".surjective.") => {
            RecipeError::SurjectivityWitnessFailed(e.evidence)
        }
        Some(e) if e.id.ends_with(".kernel-nontrivial") => {
            RecipeError::NonInjectivityFailed(e.evidence)
        }
        Some(e) => RecipeError::StageFailed {
            id: e.id,
            evidence: e.evidence,
        },
        None => RecipeError::StageFailed {
            id: "recipe".into(),
            evidence: "no witness produced".into(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selftest;

    #[test]
    fn conjugated_tower_recipe_passes_end_to_end() {
        let input = selftest::order18_tower_recipe();
        let outcome = run_recipe(&input, DEFAULT_MAX_LEN, DEFAULT_MAX_POW);
        for e in &outcome.entries {
            assert!(
                matches!(e.status, Status::Pass | Status::Assumed),
                "entry {} unexpectedly {:?}: {}",
                e.id,
                e.status,
                e.evidence
            );
        }
        let witness = outcome.witness.expect("witness must be emitted");
        assert!(witness.psi_tilde.is_verified());
        // Six base surjectivity entries plus x and t.
        let surjective = outcome
            .entries
            .iter()
            .filter(|e| e.id.contains(".surjective."))
            .count();
        assert_eq!(surjective, 6);
    }

    #[test]
    fn doubling_tower_recipe_passes_in_both_variants() {
        for doubled in [false, true] {
            let input = selftest::doubling_tower_recipe(doubled);
            let outcome = run_recipe(&input, DEFAULT_MAX_LEN, DEFAULT_MAX_POW);
            for e in &outcome.entries {
                assert!(
                    matches!(e.status, Status::Pass | Status::Assumed),
                    "variant doubled={doubled}: entry {} unexpectedly {:?}: {}",
                    e.id,
                    e.status,
                    e.evidence
                );
            }
            assert!(outcome.witness.is_some());
        }
    }

    #[test]
    fn trivial_u_fails_the_first_hypothesis_and_aborts() {
        let input = selftest::order18_tower_recipe_with_u(&Word::identity());
        let outcome = run_recipe(&input, DEFAULT_MAX_LEN, DEFAULT_MAX_POW);
        let first = &outcome.entries[0];
        assert!(first.id.ends_with("hyp.u-nontrivial"));
        assert_eq!(first.status, Status::Fail);
        assert!(outcome.witness.is_none());
        assert!(outcome.entries.iter().any(|e| e.id.ends_with(".aborted")));
        assert!(matches!(
            assemble_nonhopf(&input, DEFAULT_MAX_LEN, DEFAULT_MAX_POW),
            Err(RecipeError::HypothesesNotChecked)
        ));
    }

    #[test]
    fn torsion_u_fails_the_square_hypothesis() {
        let h = selftest::order18_tower();
        let b = selftest::word_in(&h, &[("b", 1)]);
        let input = selftest::order18_tower_recipe_with_u(&b);
        let outcome = run_recipe(&input, DEFAULT_MAX_LEN, DEFAULT_MAX_POW);
        let squared = outcome
            .entries
            .iter()
            .find(|e| e.id.ends_with("hyp.u-squared"))
            .unwrap();
        assert_eq!(squared.status, Status::Fail);
        // u = b is fixed by the self-map, so the kernel hypothesis fails too.
        let kernel = outcome
            .entries
            .iter()
            .find(|e| e.id.ends_with("hyp.u-in-kernel"))
            .unwrap();
        assert_eq!(kernel.status, Status::Fail);
        assert!(outcome.witness.is_none());
    }

    #[test]
    fn extension_refuses_to_build_on_failed_hypotheses() {
        let input = selftest::order18_tower_recipe_with_u(&Word::identity());
        let hyp = check_hypotheses(&input);
        assert!(!hyp.all_pass());
        assert!(matches!(
            build_extension(&input, &hyp),
            Err(RecipeError::HypothesesNotChecked)
        ));
    }

    #[test]
    fn kernel_violations_surface_as_relator_failures() {
        // Force u = b (not in the kernel): the extension itself builds, but
        // the extended map must fail on the new relation.
        let h = selftest::order18_tower();
        let b = selftest::word_in(&h, &[("b", 1)]);
        let input = selftest::order18_tower_recipe_with_u(&b);

        let x_node = GroupNode::free(&format!("{}_x", input.name()), &["x"]).unwrap();
        let x = x_node.generators()[0].clone();
        let fp =
            GroupNode::free_product(&format!("{}_fp", input.name()), h.clone(), x_node).unwrap();
        let commutator = Word::commutator(input.u(), &Word::generator(x.clone())).unwrap();
        let group = GroupNode::hnn_cyclic(
            input.name(),
            fp.clone(),
            "t",
            input.v().clone(),
            commutator.clone(),
        )
        .unwrap();
        let ext = Extension {
            group,
            free_product: fp,
            x,
            t: extension_stable_letter(input.name()).unwrap(),
            commutator,
        };
        match extend_endomorphism(&input, &ext) {
            Err(RecipeError::HomomorphismCheckFailed(detail)) => {
                assert!(detail.contains("t^-1"), "failing relator listed: {detail}");
            }
            other => panic!("expected relator failure, got {other:?}"),
        }
    }

    #[test]
    fn hyperbolicity_certificate_counts_syllables() {
        let h = selftest::order18_tower();
        let u = selftest::word_in(&h, &[("c", 3)]);
        let cert = certify_hyperbolic(&h, &u).unwrap();
        assert!(cert.hyperbolic);
        assert_eq!(cert.syllable_count, 4);
        assert!(matches!(
            certify_hyperbolic(&h, &Word::identity()),
            Err(RecipeError::TrivialU)
        ));
        // A group-trivial word is rejected even when it is not the empty word.
        let c9 = selftest::word_in(&h, &[("c", 9)]);
        assert!(matches!(
            certify_hyperbolic(&h, &c9),
            Err(RecipeError::TrivialU)
        ));
    }

    #[test]
    fn elementary_search_finds_nothing_at_default_bounds() {
        let h = selftest::order18_tower();
        let u = selftest::word_in(&h, &[("c", 3)]);
        assert_eq!(elementary_search(&h, &u, 3, 2).unwrap(), vec![]);

        let hab = selftest::doubling_tower();
        let u2 = selftest::commutator_in(&hab, &[("s", 1), ("a", 2), ("s", -1)], &[("b", 1)]);
        assert_eq!(elementary_search(&hab, &u2, 3, 2).unwrap(), vec![]);
    }

    #[test]
    fn elementary_search_reports_planted_counterexamples() {
        // With u = b of order two, b [b,x] b^-1 works out to [b,x]^-1, so b
        // is a genuine inverting conjugator outside <[b,x]>. This is exactly
        // the degeneracy the u^2 hypothesis exists to exclude, and the search
        // must surface it.
        let h0 = selftest::order18_leaf();
        let b = selftest::word_in(&h0, &[("b", 1)]);
        let found = elementary_search(&h0, &b, 1, 1).unwrap();
        assert_eq!(
            found.len(),
            2,
            "b and b^-1 both conjugate [b,x] to its inverse"
        );
        assert!(found.contains(&b));

        // A primitive u of odd order admits none at this radius.
        let c3 = selftest::word_in(&h0, &[("c", 3)]);
        assert!(elementary_search(&h0, &c3, 2, 1).unwrap().is_empty());
    }

    #[test]
    fn image_contains_v_matches_the_relation() {
        let input = selftest::order18_tower_recipe();
        let hyp = check_hypotheses(&input);
        let ext = build_extension(&input, &hyp).unwrap();
        let tilde = extend_endomorphism(&input, &ext).unwrap();
        let bracket =
            Word::commutator(input.preimage_witness(), &Word::generator(ext.x.clone())).unwrap();
        let conjugated = bracket
            .conjugate_by(&Word::generator(ext.t.clone()))
            .unwrap();
        let image = tilde.apply(&conjugated).unwrap();
        assert!(ext.group.are_equal(&image, input.v()).unwrap());
    }

    #[test]
    fn broken_surjectivity_witness_fails_its_entry() {
        let input = selftest::order18_tower_recipe_with_witness("c", &[("b", 1)]);
        let outcome = run_recipe(&input, DEFAULT_MAX_LEN, DEFAULT_MAX_POW);
        let entry = outcome
            .entries
            .iter()
            .find(|e| e.id.ends_with(".surjective.c"))
            .unwrap();
        assert_eq!(entry.status, Status::Fail);
        assert!(outcome.witness.is_none());
        assert!(matches!(
            assemble_nonhopf(&input, DEFAULT_MAX_LEN, DEFAULT_MAX_POW),
            Err(RecipeError::SurjectivityWitnessFailed(_))
        ));
    }

    #[test]
    fn input_validation_rejects_structural_mistakes() {
        let h = selftest::order18_tower();
        let psi = selftest::order18_tower_endo(&h);
        let cert = selftest::order18_tower_cert(&h);
        let u = selftest::word_in(&h, &[("c", 3)]);
        let v = selftest::order18_tower_v(&h);
        let y = selftest::word_in(&h, &[("c", 1)]);
        let mut witnesses = selftest::order18_tower_witnesses(&h, "G");

        // Missing witness for one generator.
        let partial = {
            let mut m = witnesses.clone();
            m.remove(&selftest::named(&h, "k"));
            m
        };
        assert!(matches!(
            RecipeInput::new(
                "G",
                h.clone(),
                psi.clone(),
                u.clone(),
                v.clone(),
                y.clone(),
                cert.clone(),
                partial,
                None
            ),
            Err(RecipeError::MissingWitness(_))
        ));

        // Witness letters must come from the base or the extension letters.
        let foreign = GeneratorId::new("q", "elsewhere").unwrap();
        witnesses.insert(selftest::named(&h, "b"), Word::generator(foreign));
        assert!(matches!(
            RecipeInput::new("G", h.clone(), psi, u, v, y, cert, witnesses, None),
            Err(RecipeError::ForeignWitnessLetter { .. })
        ));
    }
}
