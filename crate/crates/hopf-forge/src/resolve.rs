//! Elaborates a parsed plan into verified core objects.
//!
//! Resolution is eager: coset enumeration runs, HNN associations are
//! validated, endomorphisms are relator-checked and certificates are
//! projection-checked here, before any report entry is produced. A plan
//! that fails resolution never reaches the runner.

use std::collections::BTreeMap;
use std::sync::Arc;

use hopf_core::coset::{enumerate_with_budget, FinitePresentation, MultiplicationTable};
use hopf_core::morphism::{Endomorphism, QuotientCertificate};
use hopf_core::recipe::{extension_commutator_generator, extension_stable_letter, RecipeInput};
use hopf_core::tower::{GroupNode, NodeKind};
use hopf_core::word::{GeneratorId, Word};
use thiserror::Error;

use crate::ast::*;

/// Default ceiling on live cosets during enumeration.
pub const DEFAULT_MAX_COSETS: usize = 100_000;
/// Per-enumeration work budget (defined-coset events), scaled off the ceiling.
const WORK_BUDGET_FACTOR: u64 = 200;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("resolve error at {line}:{col}: {message}")]
pub struct ResolveError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

#[derive(Clone, Copy, Debug)]
pub struct ResolveOptions {
    pub max_cosets: usize,
}

impl Default for ResolveOptions {
    fn default() -> Self {
        ResolveOptions {
            max_cosets: DEFAULT_MAX_COSETS,
        }
    }
}

/// A check whose words are already flattened against its group.
#[derive(Clone, Debug)]
pub struct ResolvedCheck {
    pub label: String,
    pub group: String,
    pub assertion: ResolvedAssertion,
}

#[derive(Clone, Debug)]
pub enum ResolvedAssertion {
    Identity {
        word: Word,
    },
    NotIdentity {
        word: Word,
    },
    Equal {
        lhs: Word,
        rhs: Word,
    },
    NotEqual {
        lhs: Word,
        rhs: Word,
    },
    Order {
        word: Word,
        expected: OrderExpectation,
    },
    Member {
        gamma: Word,
        word: Word,
        expected: MemberExpectation,
    },
    GroupOrder {
        expected: u64,
    },
}

/// One unit of work for the runner, in declaration order.
#[derive(Clone, Debug)]
pub enum ScheduleItem {
    Group(String),
    Endo(String),
    Cert(String),
    Recipe(String),
    Check { index: usize, check: ResolvedCheck },
}

/// Everything a plan declares, fully constructed and validated.
#[derive(Clone, Debug, Default)]
pub struct Environment {
    pub groups: BTreeMap<String, Arc<GroupNode>>,
    pub endos: BTreeMap<String, Endomorphism>,
    pub certs: BTreeMap<String, QuotientCertificate>,
    pub recipes: BTreeMap<String, RecipeInput>,
    pub schedule: Vec<ScheduleItem>,
}

/// Generator-name lookup for one group; a name mapping to more than one id
/// (possible after a free product of groups reusing a name) is ambiguous and
/// unusable in words.
pub type GenLookup = BTreeMap<String, Vec<GeneratorId>>;

pub fn generator_lookup(node: &GroupNode) -> GenLookup {
    let mut map: GenLookup = BTreeMap::new();
    for g in node.generators() {
        map.entry(g.name().to_string()).or_default().push(g.clone());
    }
    map
}

fn err<T>(span: Span, message: impl Into<String>) -> Result<T, ResolveError> {
    Err(ResolveError {
        line: span.line,
        col: span.col,
        message: message.into(),
    })
}

/// Turns surface word syntax into a core word over `lookup`'s generators.
pub fn flatten_word(raw: &RawWord, lookup: &GenLookup, span: Span) -> Result<Word, ResolveError> {
    let oops = |e: hopf_core::WordError| ResolveError {
        line: span.line,
        col: span.col,
        message: e.to_string(),
    };
    let mut acc = Word::identity();
    for atom in raw {
        let base = match &atom.base {
            RawBase::Name(n) => match lookup.get(n).map(Vec::as_slice) {
                Some([id]) => Word::generator(id.clone()),
                Some(_) => {
                    return err(
                        span,
                        format!("generator name `{n}` is ambiguous in this group"),
                    )
                }
                None => return err(span, format!("unknown generator `{n}`")),
            },
            RawBase::Group(inner) => flatten_word(inner, lookup, span)?,
            RawBase::Commutator(lhs, rhs) => Word::commutator(
                &flatten_word(lhs, lookup, span)?,
                &flatten_word(rhs, lookup, span)?,
            )
            .map_err(oops)?,
            RawBase::Empty => Word::identity(),
        };
        acc = acc
            .concat(&base.pow(atom.exp).map_err(oops)?)
            .map_err(oops)?;
    }
    Ok(acc)
}

pub fn resolve(plan: &PlanFile, opts: &ResolveOptions) -> Result<Environment, ResolveError> {
    let mut env = Environment::default();
    // Declaration order of groups, for certificate domain inference.
    let mut group_order: Vec<String> = Vec::new();
    let mut lookups: BTreeMap<String, GenLookup> = BTreeMap::new();
    let mut check_index = 0usize;

    for decl in &plan.declarations {
        let span = decl.span;
        match &decl.kind {
            DeclKind::Group(g) => {
                if env.groups.contains_key(&g.name) {
                    return err(span, format!("group `{}` is declared twice", g.name));
                }
                if env.recipes.contains_key(&g.name) {
                    return err(
                        span,
                        format!("group `{}` collides with a recipe of the same name", g.name),
                    );
                }
                let node = build_group(g, span, &env, &lookups, opts)?;
                lookups.insert(g.name.clone(), generator_lookup(&node));
                group_order.push(g.name.clone());
                env.groups.insert(g.name.clone(), node);
                env.schedule.push(ScheduleItem::Group(g.name.clone()));
            }
            DeclKind::Endo(e) => {
                if env.endos.contains_key(&e.name) {
                    return err(span, format!("endo `{}` is declared twice", e.name));
                }
                let domain = match env.groups.get(&e.domain) {
                    Some(d) => d.clone(),
                    None => return err(span, format!("unknown group `{}`", e.domain)),
                };
                let lookup = &lookups[&e.domain];
                let images = resolve_map_entries(&e.maps, lookup, lookup, span, "endo")?;
                let mut endo = Endomorphism::new(domain, images).map_err(|m| ResolveError {
                    line: span.line,
                    col: span.col,
                    message: format!("endo `{}`: {m}", e.name),
                })?;
                let check = endo.verify().map_err(|m| ResolveError {
                    line: span.line,
                    col: span.col,
                    message: format!("endo `{}`: {m}", e.name),
                })?;
                if !check.ok {
                    let broken = check
                        .failing_relators
                        .iter()
                        .map(|r| format!("{r}"))
                        .collect::<Vec<_>>()
                        .join(", ");
                    return err(
                        span,
                        format!(
                            "endo `{}` does not respect the relations: image of {broken} is \
                             nontrivial",
                            e.name
                        ),
                    );
                }
                env.endos.insert(e.name.clone(), endo);
                env.schedule.push(ScheduleItem::Endo(e.name.clone()));
            }
            DeclKind::Cert(c) => {
                if env.certs.contains_key(&c.name) {
                    return err(span, format!("cert `{}` is declared twice", c.name));
                }
                let cert = build_cert(c, span, &env, &group_order, &lookups)?;
                env.certs.insert(c.name.clone(), cert);
                env.schedule.push(ScheduleItem::Cert(c.name.clone()));
            }
            DeclKind::Recipe(r) => {
                if env.recipes.contains_key(&r.name) {
                    return err(span, format!("recipe `{}` is declared twice", r.name));
                }
                if env.groups.contains_key(&r.name) {
                    return err(
                        span,
                        format!("recipe `{}` collides with a group of the same name", r.name),
                    );
                }
                let input = build_recipe(r, span, &env, &lookups)?;
                env.recipes.insert(r.name.clone(), input);
                env.schedule.push(ScheduleItem::Recipe(r.name.clone()));
            }
            DeclKind::Check(c) => {
                let check = build_check(c, span, &env, &lookups)?;
                env.schedule.push(ScheduleItem::Check {
                    index: check_index,
                    check,
                });
                check_index += 1;
            }
        }
    }
    Ok(env)
}

fn scoped_gens(
    names: &[String],
    scope: &str,
    span: Span,
) -> Result<Vec<GeneratorId>, ResolveError> {
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for n in names {
        if !seen.insert(n.clone()) {
            return err(span, format!("generator `{n}` is listed twice"));
        }
        match GeneratorId::new(n, scope) {
            Ok(id) => out.push(id),
            Err(e) => return err(span, e.to_string()),
        }
    }
    Ok(out)
}

fn build_group(
    g: &GroupDecl,
    span: Span,
    env: &Environment,
    lookups: &BTreeMap<String, GenLookup>,
    opts: &ResolveOptions,
) -> Result<Arc<GroupNode>, ResolveError> {
    let tower_err = |e: hopf_core::tower::TowerError| ResolveError {
        line: span.line,
        col: span.col,
        message: format!("group `{}`: {e}", g.name),
    };
    match &g.construction {
        Construction::Presentation { gens, rels } => {
            let ids = scoped_gens(gens, &g.name, span)?;
            let mut lookup: GenLookup = BTreeMap::new();
            for id in &ids {
                lookup
                    .entry(id.name().to_string())
                    .or_default()
                    .push(id.clone());
            }
            let relators = rels
                .iter()
                .map(|r| flatten_word(r, &lookup, span))
                .collect::<Result<Vec<_>, _>>()?;
            let pres = FinitePresentation::new(ids, relators).map_err(|e| ResolveError {
                line: span.line,
                col: span.col,
                message: format!("group `{}`: {e}", g.name),
            })?;
            let budget = (opts.max_cosets as u64).saturating_mul(WORK_BUDGET_FACTOR);
            let table = enumerate_with_budget(&pres, opts.max_cosets, budget).map_err(|e| {
                ResolveError {
                    line: span.line,
                    col: span.col,
                    message: format!("group `{}`: {e}", g.name),
                }
            })?;
            GroupNode::finite(&g.name, Arc::new(table)).map_err(tower_err)
        }
        Construction::Free { gens } => {
            scoped_gens(gens, &g.name, span)?; // duplicate/charset validation
            let names: Vec<&str> = gens.iter().map(String::as_str).collect();
            GroupNode::free(&g.name, &names).map_err(tower_err)
        }
        Construction::FreeAbelian { gens } => {
            scoped_gens(gens, &g.name, span)?;
            let names: Vec<&str> = gens.iter().map(String::as_str).collect();
            GroupNode::free_abelian(&g.name, &names).map_err(tower_err)
        }
        Construction::FreeProduct { left, right } => {
            let l = env
                .groups
                .get(left)
                .ok_or_else(|| ResolveError {
                    line: span.line,
                    col: span.col,
                    message: format!("unknown group `{left}`"),
                })?
                .clone();
            let r = env
                .groups
                .get(right)
                .ok_or_else(|| ResolveError {
                    line: span.line,
                    col: span.col,
                    message: format!("unknown group `{right}`"),
                })?
                .clone();
            GroupNode::free_product(&g.name, l, r).map_err(tower_err)
        }
        Construction::Hnn {
            base,
            stable,
            assoc,
        } => {
            let base_node = env
                .groups
                .get(base)
                .ok_or_else(|| ResolveError {
                    line: span.line,
                    col: span.col,
                    message: format!("unknown group `{base}`"),
                })?
                .clone();
            let lookup = &lookups[base];
            if lookup.contains_key(stable) {
                return err(
                    span,
                    format!("stable letter `{stable}` collides with a generator of `{base}`"),
                );
            }
            match assoc {
                Assoc::Cyclic { lhs, rhs } => {
                    let lhs = flatten_word(lhs, lookup, span)?;
                    let rhs = flatten_word(rhs, lookup, span)?;
                    GroupNode::hnn_cyclic(&g.name, base_node, stable, lhs, rhs).map_err(tower_err)
                }
                Assoc::Auto { maps } => {
                    let forward = resolve_map_entries(maps, lookup, lookup, span, "auto assoc")?;
                    let backward = invert_auto(&base_node, &forward, span, &g.name)?;
                    GroupNode::hnn_automorphism(&g.name, base_node, stable, forward, backward)
                        .map_err(tower_err)
                }
            }
        }
    }
}

/// Derives the inverse of a generator map on a finite base by inverting the
/// permutation it induces on the multiplication table.
fn invert_auto(
    base: &Arc<GroupNode>,
    forward: &BTreeMap<GeneratorId, Word>,
    span: Span,
    group: &str,
) -> Result<BTreeMap<GeneratorId, Word>, ResolveError> {
    let fail = |message: String| ResolveError {
        line: span.line,
        col: span.col,
        message,
    };
    let NodeKind::Finite(table) = base.kind() else {
        return Err(fail(format!(
            "group `{group}`: auto associations need a finite base so the inverse map can be \
             derived; `{}` is not finite",
            base.name()
        )));
    };
    let table: &Arc<MultiplicationTable> = table;
    let n = table.order();
    let image_of = (0..n)
        .map(|i| {
            let mapped = table
                .representative(i)
                .substitute(|g| forward.get(g))
                .map_err(|e| fail(format!("group `{group}`: {e}")))?;
            table
                .evaluate(&mapped)
                .map_err(|e| fail(format!("group `{group}`: {e}")))
        })
        .collect::<Result<Vec<usize>, _>>()?;
    let mut preimage_of = vec![usize::MAX; n];
    for (i, &j) in image_of.iter().enumerate() {
        if preimage_of[j] != usize::MAX {
            return Err(fail(format!(
                "group `{group}`: auto map is not injective on the base (elements {} and {} \
                 collide)",
                preimage_of[j], i
            )));
        }
        preimage_of[j] = i;
    }
    let mut backward = BTreeMap::new();
    for g in base.generators() {
        let idx = table
            .evaluate(&Word::generator(g.clone()))
            .map_err(|e| fail(format!("group `{group}`: {e}")))?;
        backward.insert(g.clone(), table.representative(preimage_of[idx]).clone());
    }
    Ok(backward)
}

/// Resolves `name -> word` entries: keys against `key_lookup`, images against
/// `image_lookup`. Duplicate keys are rejected.
fn resolve_map_entries(
    entries: &[(String, RawWord)],
    key_lookup: &GenLookup,
    image_lookup: &GenLookup,
    span: Span,
    what: &str,
) -> Result<BTreeMap<GeneratorId, Word>, ResolveError> {
    let mut out = BTreeMap::new();
    for (name, raw) in entries {
        let id = match key_lookup.get(name).map(Vec::as_slice) {
            Some([id]) => id.clone(),
            Some(_) => {
                return err(
                    span,
                    format!("{what}: generator name `{name}` is ambiguous"),
                )
            }
            None => return err(span, format!("{what}: unknown generator `{name}`")),
        };
        let image = flatten_word(raw, image_lookup, span)?;
        if out.insert(id, image).is_some() {
            return err(span, format!("{what}: generator `{name}` is mapped twice"));
        }
    }
    Ok(out)
}

/// Certificate domains are inferred: the unique declared group whose
/// generator names are exactly the map's keys.
fn build_cert(
    c: &CertDecl,
    span: Span,
    env: &Environment,
    group_order: &[String],
    lookups: &BTreeMap<String, GenLookup>,
) -> Result<QuotientCertificate, ResolveError> {
    let keys: std::collections::BTreeSet<&str> = c.maps.iter().map(|(n, _)| n.as_str()).collect();
    let mut candidates = Vec::new();
    for name in group_order {
        let gen_names: std::collections::BTreeSet<&str> =
            lookups[name].keys().map(String::as_str).collect();
        if gen_names == keys {
            candidates.push(name.clone());
        }
    }
    let domain_name = match candidates.as_slice() {
        [one] => one.clone(),
        [] => {
            return err(
                span,
                format!(
                    "cert `{}`: no declared group has exactly the generators {{{}}}",
                    c.name,
                    keys.iter().copied().collect::<Vec<_>>().join(", ")
                ),
            )
        }
        many => {
            return err(
                span,
                format!(
                    "cert `{}`: domain is ambiguous; groups {} share the generator set",
                    c.name,
                    many.join(", ")
                ),
            )
        }
    };
    let domain = env.groups[&domain_name].clone();
    let target_node = match env.groups.get(&c.target) {
        Some(t) => t.clone(),
        None => return err(span, format!("unknown group `{}`", c.target)),
    };
    let NodeKind::Finite(table) = target_node.kind() else {
        return err(
            span,
            format!(
                "cert `{}`: target `{}` is not a finite (presentation-backed) group",
                c.name, c.target
            ),
        );
    };
    let target_lookup = &lookups[&c.target];
    let domain_lookup = &lookups[&domain_name];
    let projection = resolve_map_entries(&c.maps, domain_lookup, target_lookup, span, "cert map")?;
    QuotientCertificate::new(domain, table.clone(), projection).map_err(|m| ResolveError {
        line: span.line,
        col: span.col,
        message: format!("cert `{}`: {m}", c.name),
    })
}

fn build_recipe(
    r: &RecipeDecl,
    span: Span,
    env: &Environment,
    lookups: &BTreeMap<String, GenLookup>,
) -> Result<RecipeInput, ResolveError> {
    let base = match env.groups.get(&r.base) {
        Some(b) => b.clone(),
        None => return err(span, format!("unknown group `{}`", r.base)),
    };
    let psi = match env.endos.get(&r.psi) {
        Some(p) => p.clone(),
        None => return err(span, format!("unknown endo `{}`", r.psi)),
    };
    let cert = match env.certs.get(&r.cert) {
        Some(c) => c.clone(),
        None => return err(span, format!("unknown cert `{}`", r.cert)),
    };
    let base_lookup = &lookups[&r.base];
    let u = flatten_word(&r.u, base_lookup, span)?;
    let v = flatten_word(&r.v, base_lookup, span)?;
    let y = flatten_word(&r.y, base_lookup, span)?;

    // Witness images live in the extension: base generators plus the fresh
    // commutator generator and stable letter.
    let word_err = |e: hopf_core::WordError| ResolveError {
        line: span.line,
        col: span.col,
        message: e.to_string(),
    };
    let x = extension_commutator_generator(&r.name).map_err(word_err)?;
    let t = extension_stable_letter(&r.name).map_err(word_err)?;
    let mut witness_lookup = base_lookup.clone();
    witness_lookup
        .entry(x.name().to_string())
        .or_default()
        .push(x);
    witness_lookup
        .entry(t.name().to_string())
        .or_default()
        .push(t);
    let witnesses =
        resolve_map_entries(&r.witnesses, base_lookup, &witness_lookup, span, "witness")?;

    RecipeInput::new(
        &r.name,
        base,
        psi,
        u,
        v,
        y,
        cert,
        witnesses,
        r.hopfian.clone(),
    )
    .map_err(|m| ResolveError {
        line: span.line,
        col: span.col,
        message: format!("recipe `{}`: {m}", r.name),
    })
}

fn build_check(
    c: &CheckDecl,
    span: Span,
    env: &Environment,
    lookups: &BTreeMap<String, GenLookup>,
) -> Result<ResolvedCheck, ResolveError> {
    let group_name = match &c.assertion {
        Assertion::Identity { group, .. }
        | Assertion::NotIdentity { group, .. }
        | Assertion::Equal { group, .. }
        | Assertion::NotEqual { group, .. }
        | Assertion::Order { group, .. }
        | Assertion::Member { group, .. }
        | Assertion::GroupOrder { group, .. } => group.clone(),
    };
    if !env.groups.contains_key(&group_name) {
        return err(span, format!("unknown group `{group_name}`"));
    }
    let lookup = &lookups[&group_name];
    let assertion = match &c.assertion {
        Assertion::Identity { word, .. } => ResolvedAssertion::Identity {
            word: flatten_word(word, lookup, span)?,
        },
        Assertion::NotIdentity { word, .. } => ResolvedAssertion::NotIdentity {
            word: flatten_word(word, lookup, span)?,
        },
        Assertion::Equal { lhs, rhs, .. } => ResolvedAssertion::Equal {
            lhs: flatten_word(lhs, lookup, span)?,
            rhs: flatten_word(rhs, lookup, span)?,
        },
        Assertion::NotEqual { lhs, rhs, .. } => ResolvedAssertion::NotEqual {
            lhs: flatten_word(lhs, lookup, span)?,
            rhs: flatten_word(rhs, lookup, span)?,
        },
        Assertion::Order { word, expected, .. } => ResolvedAssertion::Order {
            word: flatten_word(word, lookup, span)?,
            expected: *expected,
        },
        Assertion::Member {
            gamma,
            word,
            expected,
            ..
        } => ResolvedAssertion::Member {
            gamma: flatten_word(gamma, lookup, span)?,
            word: flatten_word(word, lookup, span)?,
            expected: *expected,
        },
        Assertion::GroupOrder { expected, .. } => ResolvedAssertion::GroupOrder {
            expected: *expected,
        },
    };
    Ok(ResolvedCheck {
        label: c.label.clone(),
        group: group_name,
        assertion,
    })
}
