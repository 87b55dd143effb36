//! Plan-file syntax tree and its canonical printer.
//!
//! Words are kept as the syntax the user wrote (names, parenthesized
//! subwords, bracketed commutators, caret exponents) rather than flattened
//! letter strings, so that printing a parsed file and re-parsing it yields a
//! structurally identical tree.

use std::fmt::Write as _;

/// Line/column position of a declaration, 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanFile {
    pub declarations: Vec<Declaration>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Declaration {
    pub span: Span,
    pub kind: DeclKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DeclKind {
    Group(GroupDecl),
    Endo(EndoDecl),
    Cert(CertDecl),
    Recipe(RecipeDecl),
    Check(CheckDecl),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupDecl {
    pub name: String,
    pub construction: Construction,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Construction {
    Presentation {
        gens: Vec<String>,
        rels: Vec<RawWord>,
    },
    Free {
        gens: Vec<String>,
    },
    FreeAbelian {
        gens: Vec<String>,
    },
    FreeProduct {
        left: String,
        right: String,
    },
    Hnn {
        base: String,
        stable: String,
        assoc: Assoc,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Assoc {
    Cyclic { lhs: RawWord, rhs: RawWord },
    Auto { maps: Vec<(String, RawWord)> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EndoDecl {
    pub name: String,
    pub domain: String,
    pub maps: Vec<(String, RawWord)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertDecl {
    pub name: String,
    pub target: String,
    pub maps: Vec<(String, RawWord)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecipeDecl {
    pub name: String,
    pub base: String,
    pub psi: String,
    pub u: RawWord,
    pub v: RawWord,
    pub y: RawWord,
    pub cert: String,
    pub witnesses: Vec<(String, RawWord)>,
    pub hopfian: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckDecl {
    pub label: String,
    pub assertion: Assertion,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Assertion {
    Identity {
        group: String,
        word: RawWord,
    },
    NotIdentity {
        group: String,
        word: RawWord,
    },
    Equal {
        group: String,
        lhs: RawWord,
        rhs: RawWord,
    },
    NotEqual {
        group: String,
        lhs: RawWord,
        rhs: RawWord,
    },
    Order {
        group: String,
        word: RawWord,
        expected: OrderExpectation,
    },
    Member {
        group: String,
        gamma: RawWord,
        word: RawWord,
        expected: MemberExpectation,
    },
    GroupOrder {
        group: String,
        expected: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderExpectation {
    Finite(u64),
    Infinite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MemberExpectation {
    Exponent(i64),
    None,
}

/// A word as written: a sequence of exponentiated atoms.
pub type RawWord = Vec<RawAtom>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawAtom {
    pub base: RawBase,
    pub exp: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RawBase {
    /// A generator reference.
    Name(String),
    /// A parenthesized subword.
    Group(RawWord),
    /// `[lhs, rhs]`, shorthand for lhs rhs lhs^-1 rhs^-1.
    Commutator(RawWord, RawWord),
    /// `()`, the empty word.
    Empty,
}

// ---------------------------------------------------------------------------
// Canonical printer
// ---------------------------------------------------------------------------

pub fn print_plan(plan: &PlanFile) -> String {
    let mut out = String::new();
    for decl in &plan.declarations {
        print_decl(&mut out, &decl.kind);
        out.push('\n');
    }
    out
}

fn print_decl(out: &mut String, kind: &DeclKind) {
    match kind {
        DeclKind::Group(g) => {
            let _ = write!(out, "group {} = ", g.name);
            match &g.construction {
                Construction::Presentation { gens, rels } => {
                    let _ = write!(out, "presentation {{ gens {}; rels ", gens.join(" "));
                    print_word_list(out, rels);
                    out.push_str("; }");
                }
                Construction::Free { gens } => {
                    let _ = write!(out, "free({})", gens.join(", "));
                }
                Construction::FreeAbelian { gens } => {
                    let _ = write!(out, "free_abelian({})", gens.join(", "));
                }
                Construction::FreeProduct { left, right } => {
                    let _ = write!(out, "free_product({left}, {right})");
                }
                Construction::Hnn {
                    base,
                    stable,
                    assoc,
                } => {
                    let _ = write!(out, "hnn({base}, {stable}, ");
                    match assoc {
                        Assoc::Cyclic { lhs, rhs } => {
                            out.push_str("cyclic { ");
                            out.push_str(&print_word(lhs));
                            out.push_str(" -> ");
                            out.push_str(&print_word(rhs));
                            out.push_str(" }");
                        }
                        Assoc::Auto { maps } => {
                            out.push_str("auto { ");
                            print_maps(out, maps);
                            out.push('}');
                        }
                    }
                    out.push(')');
                }
            }
        }
        DeclKind::Endo(e) => {
            let _ = write!(out, "endo {} : {} {{ ", e.name, e.domain);
            print_maps(out, &e.maps);
            out.push('}');
        }
        DeclKind::Cert(c) => {
            let _ = write!(out, "cert {} {{ target {}; map {{ ", c.name, c.target);
            print_maps(out, &c.maps);
            out.push_str("} }");
        }
        DeclKind::Recipe(r) => {
            let _ = write!(out, "recipe {} {{ H {}; psi {}; ", r.name, r.base, r.psi);
            let _ = write!(out, "u {}; ", print_word(&r.u));
            let _ = write!(out, "v {}; ", print_word(&r.v));
            let _ = write!(out, "y {}; ", print_word(&r.y));
            let _ = write!(out, "cert {}; witness {{ ", r.cert);
            print_maps(out, &r.witnesses);
            out.push('}');
            if let Some(citation) = &r.hopfian {
                let _ = write!(out, " hopfian {};", print_string(citation));
            }
            out.push_str(" }");
        }
        DeclKind::Check(c) => {
            let _ = write!(out, "check {} {{ ", print_string(&c.label));
            match &c.assertion {
                Assertion::Identity { group, word } => {
                    let _ = write!(out, "identity {group} {}", print_word(word));
                }
                Assertion::NotIdentity { group, word } => {
                    let _ = write!(out, "not_identity {group} {}", print_word(word));
                }
                Assertion::Equal { group, lhs, rhs } => {
                    let _ = write!(
                        out,
                        "equal {group} {}, {}",
                        print_word(lhs),
                        print_word(rhs)
                    );
                }
                Assertion::NotEqual { group, lhs, rhs } => {
                    let _ = write!(
                        out,
                        "not_equal {group} {}, {}",
                        print_word(lhs),
                        print_word(rhs)
                    );
                }
                Assertion::Order {
                    group,
                    word,
                    expected,
                } => {
                    let shown = match expected {
                        OrderExpectation::Finite(n) => n.to_string(),
                        OrderExpectation::Infinite => "infinite".to_string(),
                    };
                    let _ = write!(out, "order {group} {} = {shown}", print_word(word));
                }
                Assertion::Member {
                    group,
                    gamma,
                    word,
                    expected,
                } => {
                    let shown = match expected {
                        MemberExpectation::Exponent(n) => n.to_string(),
                        MemberExpectation::None => "none".to_string(),
                    };
                    let _ = write!(
                        out,
                        "member {group} {}, {} = {shown}",
                        print_word(gamma),
                        print_word(word)
                    );
                }
                Assertion::GroupOrder { group, expected } => {
                    let _ = write!(out, "group_order {group} = {expected}");
                }
            }
            out.push_str(" }");
        }
    }
}

fn print_maps(out: &mut String, maps: &[(String, RawWord)]) {
    for (name, word) in maps {
        let _ = write!(out, "{name} -> {}; ", print_word(word));
    }
}

fn print_word_list(out: &mut String, words: &[RawWord]) {
    let rendered: Vec<String> = words.iter().map(print_word).collect();
    out.push_str(&rendered.join(", "));
}

pub fn print_word(word: &RawWord) -> String {
    let mut parts = Vec::with_capacity(word.len());
    for atom in word {
        let base = match &atom.base {
            RawBase::Name(n) => n.clone(),
            RawBase::Group(w) => format!("({})", print_word(w)),
            RawBase::Commutator(l, r) => format!("[{}, {}]", print_word(l), print_word(r)),
            RawBase::Empty => "()".to_string(),
        };
        if atom.exp == 1 {
            parts.push(base);
        } else {
            parts.push(format!("{base}^{}", atom.exp));
        }
    }
    parts.join(" ")
}

fn print_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            other => out.push(other),
        }
    }
    out.push('"');
    out
}
