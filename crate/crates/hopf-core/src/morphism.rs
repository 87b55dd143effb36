//! Generator-image endomorphisms and finite-quotient membership certificates.
//!
//! An [`Endomorphism`] is a map from a tower's generators into words over the
//! same tower. It starts out unverified; [`Endomorphism::verify`] checks every
//! relator of every tower level and flips the flag, and application is gated
//! on that flag so a map that fails relator checking can never be used as if
//! it were a homomorphism.
//!
//! A [`QuotientCertificate`] projects the tower onto a finite group. Because
//! the projection respects all relators (checked at construction), an element
//! whose image falls outside the projected subgroup closure is certified to
//! lie outside the subgroup itself. The converse direction is never claimed:
//! an image inside the closure yields an explicitly inconclusive outcome.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::json;
use thiserror::Error;

use crate::coset::{CosetError, MultiplicationTable};
use crate::tower::{GroupNode, TowerError};
use crate::word::{display_word, GeneratorId, Word, WordError};

#[derive(Debug, Error)]
pub enum MorphismError {
    #[error("no image supplied for generator {0}")]
    UnmappedGenerator(GeneratorId),
    #[error("image supplied for {0}, which is not a generator of the domain")]
    ExtraImage(GeneratorId),
    #[error("endomorphism used before verification; call verify() first")]
    Unverified,
    #[error(
        "certificate projection does not kill domain relator {}",
        display_word(relator)
    )]
    InvalidCertificate { relator: Word },
    #[error(transparent)]
    Tower(#[from] TowerError),
    #[error(transparent)]
    Coset(#[from] CosetError),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// Outcome of relator checking for a candidate generator-image map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomomorphismCheck {
    pub ok: bool,
    /// Relators whose image is nontrivial, verbatim from the presentation.
    pub failing_relators: Vec<Word>,
}

fn check_images_total(
    domain: &GroupNode,
    images: &BTreeMap<GeneratorId, Word>,
) -> Result<(), MorphismError> {
    for g in domain.generators() {
        if !images.contains_key(g) {
            return Err(MorphismError::UnmappedGenerator(g.clone()));
        }
    }
    for g in images.keys() {
        if !domain.contains_generator(g) {
            return Err(MorphismError::ExtraImage(g.clone()));
        }
    }
    Ok(())
}

/// Checks whether the generator-image map extends to a homomorphism of the
/// tower: every relator of every level must map to the identity.
pub fn verify_homomorphism(
    domain: &GroupNode,
    images: &BTreeMap<GeneratorId, Word>,
) -> Result<HomomorphismCheck, MorphismError> {
    check_images_total(domain, images)?;
    for img in images.values() {
        domain.validate_word(img)?;
    }
    let mut failing = Vec::new();
    for relator in domain.relators() {
        let image = relator.substitute(|g| images.get(g))?;
        if !domain.is_identity(&image)? {
            failing.push(relator.clone());
        }
    }
    Ok(HomomorphismCheck {
        ok: failing.is_empty(),
        failing_relators: failing,
    })
}

/// A self-map of a tower given by generator images.
#[derive(Clone, Debug)]
pub struct Endomorphism {
    domain: Arc<GroupNode>,
    images: BTreeMap<GeneratorId, Word>,
    verified: bool,
}

impl Endomorphism {
    /// Builds an unverified endomorphism. Totality and image validity are
    /// checked here; relator preservation is deferred to [`Self::verify`].
    pub fn new(
        domain: Arc<GroupNode>,
        images: BTreeMap<GeneratorId, Word>,
    ) -> Result<Self, MorphismError> {
        check_images_total(&domain, &images)?;
        for img in images.values() {
            domain.validate_word(img)?;
        }
        Ok(Endomorphism {
            domain,
            images,
            verified: false,
        })
    }

    pub fn domain(&self) -> &Arc<GroupNode> {
        &self.domain
    }

    pub fn images(&self) -> &BTreeMap<GeneratorId, Word> {
        &self.images
    }

    pub fn is_verified(&self) -> bool {
        self.verified
    }

    /// Runs relator checking; the endomorphism becomes usable only if every
    /// relator maps to the identity.
    pub fn verify(&mut self) -> Result<HomomorphismCheck, MorphismError> {
        let check = verify_homomorphism(&self.domain, &self.images)?;
        self.verified = check.ok;
        Ok(check)
    }

    /// Image of `w`: generator-wise substitution, freely reduced but not
    /// pushed to a normal form, so callers can inspect the raw image word.
    pub fn apply(&self, w: &Word) -> Result<Word, MorphismError> {
        if !self.verified {
            return Err(MorphismError::Unverified);
        }
        self.domain.validate_word(w)?;
        Ok(w.substitute(|g| self.images.get(g))?)
    }

    /// Whether `w` maps to the identity.
    pub fn in_kernel(&self, w: &Word) -> Result<bool, MorphismError> {
        let image = self.apply(w)?;
        Ok(self.domain.is_identity(&image)?)
    }

    /// Whether `witness` maps onto `target`, i.e. `target` is in the image.
    pub fn verify_preimage(&self, target: &Word, witness: &Word) -> Result<bool, MorphismError> {
        self.domain.validate_word(target)?;
        let image = self.apply(witness)?;
        Ok(self.domain.are_equal(&image, target)?)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "domain": self.domain.name(),
            "verified": self.verified,
            "images": self
                .images
                .iter()
                .map(|(g, w)| json!({"generator": g.name(), "image": display_word(w)}))
                .collect::<Vec<_>>(),
        })
    }
}

/// Result of a certificate query: either a sound proof of non-membership in
/// the finite quotient, or an explicit refusal to conclude anything.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NonMembershipOutcome {
    /// The element's image lies outside the projected subgroup, so the
    /// element lies outside the subgroup in the domain.
    Certified {
        element_index: usize,
        subgroup_order: usize,
        target_order: usize,
    },
    /// The images collide inside the quotient; nothing follows.
    Inconclusive {
        element_index: usize,
        subgroup_order: usize,
    },
}

impl NonMembershipOutcome {
    pub fn certified(&self) -> bool {
        matches!(self, NonMembershipOutcome::Certified { .. })
    }
}

/// A relator-respecting projection of a tower onto a finite group, usable to
/// certify that elements avoid finitely generated subgroups.
#[derive(Clone, Debug)]
pub struct QuotientCertificate {
    domain: Arc<GroupNode>,
    target: Arc<MultiplicationTable>,
    projection: BTreeMap<GeneratorId, Word>,
}

impl QuotientCertificate {
    /// Validates the projection at construction: images must be total over
    /// the domain generators, written over the target's generators, and must
    /// kill every relator of every tower level. A certificate that fails any
    /// of these cannot exist, which keeps later queries sound by fiat.
    pub fn new(
        domain: Arc<GroupNode>,
        target: Arc<MultiplicationTable>,
        projection: BTreeMap<GeneratorId, Word>,
    ) -> Result<Self, MorphismError> {
        check_images_total(&domain, &projection)?;
        let target_gens = target.presentation().generators();
        for img in projection.values() {
            for l in img.letters() {
                if !target_gens.contains(&l.gen) {
                    return Err(MorphismError::Coset(CosetError::ForeignGenerator(
                        l.gen.clone(),
                    )));
                }
            }
        }
        let cert = QuotientCertificate {
            domain,
            target,
            projection,
        };
        for relator in cert.domain.relators() {
            if cert.project(relator)? != 0 {
                return Err(MorphismError::InvalidCertificate {
                    relator: relator.clone(),
                });
            }
        }
        Ok(cert)
    }

    pub fn domain(&self) -> &Arc<GroupNode> {
        &self.domain
    }

    pub fn target(&self) -> &Arc<MultiplicationTable> {
        &self.target
    }

    pub fn projection(&self) -> &BTreeMap<GeneratorId, Word> {
        &self.projection
    }

    /// Index of the element of the finite target that `w` projects to.
    pub fn project(&self, w: &Word) -> Result<usize, MorphismError> {
        self.domain.validate_word(w)?;
        let image = w.substitute(|g| self.projection.get(g))?;
        Ok(self.target.evaluate(&image)?)
    }

    /// Tests whether the certificate proves `element` lies outside the
    /// subgroup of the domain generated by `subgroup_gens`.
    ///
    /// The projected subgroup is closed exhaustively inside the finite
    /// target, so a miss is a proof; a hit proves nothing and is reported as
    /// [`NonMembershipOutcome::Inconclusive`]. The identity element always
    /// comes back inconclusive, as it must: it belongs to every subgroup.
    pub fn verify_nonmembership(
        &self,
        subgroup_gens: &[Word],
        element: &Word,
    ) -> Result<NonMembershipOutcome, MorphismError> {
        let element_index = self.project(element)?;
        let generator_indices: Vec<usize> = subgroup_gens
            .iter()
            .map(|w| self.project(w))
            .collect::<Result<_, _>>()?;
        let closure = self.target.subgroup_closure(&generator_indices);
        let subgroup_order = closure.len();
        if closure.binary_search(&element_index).is_ok() {
            Ok(NonMembershipOutcome::Inconclusive {
                element_index,
                subgroup_order,
            })
        } else {
            Ok(NonMembershipOutcome::Certified {
                element_index,
                subgroup_order,
                target_order: self.target.order(),
            })
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "domain": self.domain.name(),
            "target_order": self.target.order(),
            "projection": self
                .projection
                .iter()
                .map(|(g, w)| json!({"generator": g.name(), "image": display_word(w)}))
                .collect::<Vec<_>>(),
        })
    }
}
