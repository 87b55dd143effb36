//! Recursive-descent parser for plan files.

use crate::ast::*;
use crate::lexer::{lex, SyntaxError, Token, TokenKind};

/// Parenthesis/bracket nesting deeper than this is rejected.
const MAX_WORD_DEPTH: u32 = 64;
/// Largest exponent magnitude accepted in word syntax.
const MAX_EXPONENT: i64 = 1_000_000;

pub fn parse(text: &str) -> Result<PlanFile, SyntaxError> {
    let tokens = lex(text)?;
    let mut p = Parser {
        tokens: &tokens,
        pos: 0,
        depth: 0,
    };
    let mut declarations = Vec::new();
    while !p.at_end() {
        declarations.push(p.parse_declaration()?);
    }
    Ok(PlanFile { declarations })
}

/// Parses a standalone word, as used by the ad-hoc commands. Empty input is
/// the empty word.
pub fn parse_word_text(text: &str) -> Result<RawWord, SyntaxError> {
    let tokens = lex(text)?;
    if tokens.is_empty() {
        return Ok(Vec::new());
    }
    let mut p = Parser {
        tokens: &tokens,
        pos: 0,
        depth: 0,
    };
    let word = p.parse_word()?;
    if !p.at_end() {
        return Err(p.error_here("end of word"));
    }
    Ok(word)
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
    depth: u32,
}

impl<'t> Parser<'t> {
    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn peek(&self) -> Option<&'t TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn here(&self) -> (u32, u32) {
        match self.tokens.get(self.pos) {
            Some(t) => (t.line, t.col),
            None => self
                .tokens
                .last()
                .map(|t| (t.line, t.col + 1))
                .unwrap_or((1, 1)),
        }
    }

    fn error_here(&self, expected: &str) -> SyntaxError {
        let (line, col) = self.here();
        let found = match self.peek() {
            Some(kind) => format!("{kind}"),
            None => "end of input".to_string(),
        };
        SyntaxError {
            line,
            col,
            message: format!("expected {expected}, found {found}"),
        }
    }

    fn expect(&mut self, kind: &TokenKind, expected: &str) -> Result<(), SyntaxError> {
        if self.peek() == Some(kind) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error_here(expected))
        }
    }

    fn expect_name(&mut self, expected: &str) -> Result<String, SyntaxError> {
        match self.peek() {
            Some(TokenKind::Name(n)) => {
                self.pos += 1;
                Ok(n.clone())
            }
            _ => Err(self.error_here(expected)),
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), SyntaxError> {
        match self.peek() {
            Some(TokenKind::Name(n)) if n == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.error_here(&format!("`{kw}`"))),
        }
    }

    fn expect_string(&mut self, expected: &str) -> Result<String, SyntaxError> {
        match self.peek() {
            Some(TokenKind::Str(s)) => {
                self.pos += 1;
                Ok(s.clone())
            }
            _ => Err(self.error_here(expected)),
        }
    }

    fn expect_int(&mut self, expected: &str) -> Result<i64, SyntaxError> {
        match self.peek() {
            Some(TokenKind::Int(n)) => {
                self.pos += 1;
                Ok(*n)
            }
            _ => Err(self.error_here(expected)),
        }
    }

    fn parse_declaration(&mut self) -> Result<Declaration, SyntaxError> {
        let (line, col) = self.here();
        let span = Span { line, col };
        let kind = match self.peek() {
            Some(TokenKind::Name(n)) => match n.as_str() {
                "group" => DeclKind::Group(self.parse_group()?),
                "endo" => DeclKind::Endo(self.parse_endo()?),
                "cert" => DeclKind::Cert(self.parse_cert()?),
                "recipe" => DeclKind::Recipe(self.parse_recipe()?),
                "check" => DeclKind::Check(self.parse_check()?),
                _ => {
                    return Err(self.error_here(
                        "a declaration (`group`, `endo`, `cert`, `recipe`, or `check`)",
                    ))
                }
            },
            _ => {
                return Err(self
                    .error_here("a declaration (`group`, `endo`, `cert`, `recipe`, or `check`)"))
            }
        };
        Ok(Declaration { span, kind })
    }

    fn parse_group(&mut self) -> Result<GroupDecl, SyntaxError> {
        self.expect_keyword("group")?;
        let name = self.expect_name("a group name")?;
        self.expect(&TokenKind::Eq, "`=`")?;
        let ctor =
            self.expect_name("`presentation`, `free`, `free_abelian`, `free_product`, or `hnn`")?;
        let construction = match ctor.as_str() {
            "presentation" => {
                self.expect(&TokenKind::LBrace, "`{`")?;
                self.expect_keyword("gens")?;
                let mut gens = Vec::new();
                while let Some(TokenKind::Name(_)) = self.peek() {
                    gens.push(self.expect_name("a generator name")?);
                }
                if gens.is_empty() {
                    return Err(self.error_here("at least one generator name"));
                }
                self.expect(&TokenKind::Semi, "`;` after the generator list")?;
                self.expect_keyword("rels")?;
                let rels = self.parse_word_list()?;
                self.expect(&TokenKind::Semi, "`;` after the relator list")?;
                self.expect(&TokenKind::RBrace, "`}`")?;
                Construction::Presentation { gens, rels }
            }
            "free" => Construction::Free {
                gens: self.parse_name_tuple()?,
            },
            "free_abelian" => Construction::FreeAbelian {
                gens: self.parse_name_tuple()?,
            },
            "free_product" => {
                self.expect(&TokenKind::LParen, "`(`")?;
                let left = self.expect_name("a group name")?;
                self.expect(&TokenKind::Comma, "`,`")?;
                let right = self.expect_name("a group name")?;
                self.expect(&TokenKind::RParen, "`)`")?;
                Construction::FreeProduct { left, right }
            }
            "hnn" => {
                self.expect(&TokenKind::LParen, "`(`")?;
                let base = self.expect_name("the base group name")?;
                self.expect(&TokenKind::Comma, "`,`")?;
                let stable = self.expect_name("the stable letter name")?;
                self.expect(&TokenKind::Comma, "`,`")?;
                let which = self.expect_name("`cyclic` or `auto`")?;
                let assoc = match which.as_str() {
                    "cyclic" => {
                        self.expect(&TokenKind::LBrace, "`{`")?;
                        let lhs = self.parse_word()?;
                        self.expect(&TokenKind::Arrow, "`->`")?;
                        let rhs = self.parse_word()?;
                        self.expect(&TokenKind::RBrace, "`}`")?;
                        Assoc::Cyclic { lhs, rhs }
                    }
                    "auto" => {
                        self.expect(&TokenKind::LBrace, "`{`")?;
                        let maps = self.parse_map_block_body()?;
                        Assoc::Auto { maps }
                    }
                    _ => return Err(self.error_here("`cyclic` or `auto`")),
                };
                self.expect(&TokenKind::RParen, "`)`")?;
                Construction::Hnn {
                    base,
                    stable,
                    assoc,
                }
            }
            _ => {
                return Err(self.error_here(
                    "`presentation`, `free`, `free_abelian`, `free_product`, or `hnn`",
                ))
            }
        };
        Ok(GroupDecl { name, construction })
    }

    /// `( NAME (","? NAME)* )` — commas between names are optional.
    fn parse_name_tuple(&mut self) -> Result<Vec<String>, SyntaxError> {
        self.expect(&TokenKind::LParen, "`(`")?;
        let mut names = vec![self.expect_name("a generator name")?];
        loop {
            match self.peek() {
                Some(TokenKind::Comma) => {
                    self.pos += 1;
                    names.push(self.expect_name("a generator name")?);
                }
                Some(TokenKind::Name(_)) => {
                    names.push(self.expect_name("a generator name")?);
                }
                _ => break,
            }
        }
        self.expect(&TokenKind::RParen, "`)`")?;
        Ok(names)
    }

    fn parse_endo(&mut self) -> Result<EndoDecl, SyntaxError> {
        self.expect_keyword("endo")?;
        let name = self.expect_name("an endomorphism name")?;
        self.expect(&TokenKind::Colon, "`:`")?;
        let domain = self.expect_name("the domain group name")?;
        self.expect(&TokenKind::LBrace, "`{`")?;
        let maps = self.parse_map_block_body()?;
        Ok(EndoDecl { name, domain, maps })
    }

    fn parse_cert(&mut self) -> Result<CertDecl, SyntaxError> {
        self.expect_keyword("cert")?;
        let name = self.expect_name("a certificate name")?;
        self.expect(&TokenKind::LBrace, "`{`")?;
        self.expect_keyword("target")?;
        let target = self.expect_name("the target group name")?;
        self.expect(&TokenKind::Semi, "`;`")?;
        self.expect_keyword("map")?;
        self.expect(&TokenKind::LBrace, "`{`")?;
        let maps = self.parse_map_block_body()?;
        self.expect(&TokenKind::RBrace, "`}` closing the cert block")?;
        Ok(CertDecl { name, target, maps })
    }

    fn parse_recipe(&mut self) -> Result<RecipeDecl, SyntaxError> {
        self.expect_keyword("recipe")?;
        let name = self.expect_name("a recipe name")?;
        self.expect(&TokenKind::LBrace, "`{`")?;
        self.expect_keyword("H")?;
        let base = self.expect_name("the base group name")?;
        self.expect(&TokenKind::Semi, "`;`")?;
        self.expect_keyword("psi")?;
        let psi = self.expect_name("the endomorphism name")?;
        self.expect(&TokenKind::Semi, "`;`")?;
        self.expect_keyword("u")?;
        let u = self.parse_word()?;
        self.expect(&TokenKind::Semi, "`;`")?;
        self.expect_keyword("v")?;
        let v = self.parse_word()?;
        self.expect(&TokenKind::Semi, "`;`")?;
        self.expect_keyword("y")?;
        let y = self.parse_word()?;
        self.expect(&TokenKind::Semi, "`;`")?;
        self.expect_keyword("cert")?;
        let cert = self.expect_name("the certificate name")?;
        self.expect(&TokenKind::Semi, "`;`")?;
        self.expect_keyword("witness")?;
        self.expect(&TokenKind::LBrace, "`{`")?;
        let witnesses = self.parse_map_block_body()?;
        let hopfian = if let Some(TokenKind::Name(n)) = self.peek() {
            if n == "hopfian" {
                self.pos += 1;
                let citation = self.expect_string("a citation string")?;
                self.expect(&TokenKind::Semi, "`;`")?;
                Some(citation)
            } else {
                None
            }
        } else {
            None
        };
        self.expect(&TokenKind::RBrace, "`}` closing the recipe block")?;
        Ok(RecipeDecl {
            name,
            base,
            psi,
            u,
            v,
            y,
            cert,
            witnesses,
            hopfian,
        })
    }

    fn parse_check(&mut self) -> Result<CheckDecl, SyntaxError> {
        self.expect_keyword("check")?;
        let label = self.expect_string("a label string")?;
        self.expect(&TokenKind::LBrace, "`{`")?;
        let which = self.expect_name(
            "`identity`, `not_identity`, `equal`, `not_equal`, `order`, `member`, or \
             `group_order`",
        )?;
        let assertion = match which.as_str() {
            "identity" | "not_identity" => {
                let group = self.expect_name("a group name")?;
                let word = self.parse_word()?;
                if which == "identity" {
                    Assertion::Identity { group, word }
                } else {
                    Assertion::NotIdentity { group, word }
                }
            }
            "equal" | "not_equal" => {
                let group = self.expect_name("a group name")?;
                let lhs = self.parse_word()?;
                self.expect(&TokenKind::Comma, "`,` between the two words")?;
                let rhs = self.parse_word()?;
                if which == "equal" {
                    Assertion::Equal { group, lhs, rhs }
                } else {
                    Assertion::NotEqual { group, lhs, rhs }
                }
            }
            "order" => {
                let group = self.expect_name("a group name")?;
                let word = self.parse_word()?;
                self.expect(&TokenKind::Eq, "`=`")?;
                let expected = match self.peek() {
                    Some(TokenKind::Int(n)) if *n >= 1 => {
                        let n = *n as u64;
                        self.pos += 1;
                        OrderExpectation::Finite(n)
                    }
                    Some(TokenKind::Name(n)) if n == "infinite" => {
                        self.pos += 1;
                        OrderExpectation::Infinite
                    }
                    _ => return Err(self.error_here("a positive integer or `infinite`")),
                };
                Assertion::Order {
                    group,
                    word,
                    expected,
                }
            }
            "member" => {
                let group = self.expect_name("a group name")?;
                let gamma = self.parse_word()?;
                self.expect(&TokenKind::Comma, "`,` between the two words")?;
                let word = self.parse_word()?;
                self.expect(&TokenKind::Eq, "`=`")?;
                let expected = match self.peek() {
                    Some(TokenKind::Int(n)) => {
                        let n = *n;
                        self.pos += 1;
                        MemberExpectation::Exponent(n)
                    }
                    Some(TokenKind::Name(n)) if n == "none" => {
                        self.pos += 1;
                        MemberExpectation::None
                    }
                    _ => return Err(self.error_here("an integer exponent or `none`")),
                };
                Assertion::Member {
                    group,
                    gamma,
                    word,
                    expected,
                }
            }
            "group_order" => {
                let group = self.expect_name("a group name")?;
                self.expect(&TokenKind::Eq, "`=`")?;
                let n = self.expect_int("a positive integer")?;
                if n < 1 {
                    return Err(self.error_here("a positive integer"));
                }
                Assertion::GroupOrder {
                    group,
                    expected: n as u64,
                }
            }
            _ => {
                return Err(self.error_here(
                    "`identity`, `not_identity`, `equal`, `not_equal`, `order`, `member`, or \
                     `group_order`",
                ))
            }
        };
        self.expect(&TokenKind::RBrace, "`}` closing the check block")?;
        Ok(CheckDecl { label, assertion })
    }

    /// `(NAME -> word ;)+ }` — consumes the closing brace.
    fn parse_map_block_body(&mut self) -> Result<Vec<(String, RawWord)>, SyntaxError> {
        let mut maps = Vec::new();
        loop {
            match self.peek() {
                Some(TokenKind::RBrace) => {
                    self.pos += 1;
                    break;
                }
                Some(TokenKind::Name(_)) => {
                    let lhs = self.expect_name("a generator name")?;
                    self.expect(&TokenKind::Arrow, "`->`")?;
                    let rhs = self.parse_word()?;
                    self.expect(&TokenKind::Semi, "`;` after the image word")?;
                    maps.push((lhs, rhs));
                }
                _ => return Err(self.error_here("a generator name or `}`")),
            }
        }
        if maps.is_empty() {
            return Err(self.error_here("at least one `name -> word;` entry"));
        }
        Ok(maps)
    }

    fn parse_word_list(&mut self) -> Result<Vec<RawWord>, SyntaxError> {
        let mut words = vec![self.parse_word()?];
        while self.peek() == Some(&TokenKind::Comma) {
            self.pos += 1;
            words.push(self.parse_word()?);
        }
        Ok(words)
    }

    fn parse_word(&mut self) -> Result<RawWord, SyntaxError> {
        let mut atoms = vec![self.parse_atom()?];
        while matches!(
            self.peek(),
            Some(TokenKind::Name(_) | TokenKind::LParen | TokenKind::LBracket)
        ) {
            atoms.push(self.parse_atom()?);
        }
        Ok(atoms)
    }

    fn parse_atom(&mut self) -> Result<RawAtom, SyntaxError> {
        let base = match self.peek() {
            Some(TokenKind::Name(_)) => RawBase::Name(self.expect_name("a generator name")?),
            Some(TokenKind::LParen) => {
                self.enter_depth()?;
                self.pos += 1;
                let base = if self.peek() == Some(&TokenKind::RParen) {
                    RawBase::Empty
                } else {
                    RawBase::Group(self.parse_word()?)
                };
                self.expect(&TokenKind::RParen, "`)`")?;
                self.depth -= 1;
                base
            }
            Some(TokenKind::LBracket) => {
                self.enter_depth()?;
                self.pos += 1;
                let lhs = self.parse_word()?;
                self.expect(&TokenKind::Comma, "`,` inside the commutator")?;
                let rhs = self.parse_word()?;
                self.expect(&TokenKind::RBracket, "`]`")?;
                self.depth -= 1;
                RawBase::Commutator(lhs, rhs)
            }
            _ => return Err(self.error_here("a word")),
        };
        let exp = if self.peek() == Some(&TokenKind::Caret) {
            self.pos += 1;
            let n = self.expect_int("an exponent")?;
            if n.unsigned_abs() > MAX_EXPONENT as u64 {
                let (line, col) = self.here();
                return Err(SyntaxError {
                    line,
                    col,
                    message: format!("exponent magnitude exceeds {MAX_EXPONENT}"),
                });
            }
            n
        } else {
            1
        };
        Ok(RawAtom { base, exp })
    }

    fn enter_depth(&mut self) -> Result<(), SyntaxError> {
        self.depth += 1;
        if self.depth > MAX_WORD_DEPTH {
            let (line, col) = self.here();
            return Err(SyntaxError {
                line,
                col,
                message: format!("word nesting exceeds depth {MAX_WORD_DEPTH}"),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::print_plan;

    #[test]
    fn presentation_group_parses() {
        let plan =
            parse("group H0 = presentation { gens b c; rels b^2, c^9, b^-1 c b c; }").unwrap();
        assert_eq!(plan.declarations.len(), 1);
        let DeclKind::Group(g) = &plan.declarations[0].kind else {
            panic!("expected group");
        };
        assert_eq!(g.name, "H0");
        let Construction::Presentation { gens, rels } = &g.construction else {
            panic!("expected presentation");
        };
        assert_eq!(gens, &["b", "c"]);
        assert_eq!(rels.len(), 3);
    }

    #[test]
    fn hnn_with_cyclic_assoc_parses() {
        let plan = parse("group H = hnn(H1, k, cyclic { s -> s^3 })").unwrap();
        let DeclKind::Group(g) = &plan.declarations[0].kind else {
            panic!("expected group");
        };
        let Construction::Hnn {
            base,
            stable,
            assoc,
        } = &g.construction
        else {
            panic!("expected hnn");
        };
        assert_eq!(base, "H1");
        assert_eq!(stable, "k");
        assert!(matches!(assoc, Assoc::Cyclic { .. }));
    }

    #[test]
    fn empty_file_is_an_empty_plan() {
        assert_eq!(parse("").unwrap().declarations.len(), 0);
        assert_eq!(parse("# only a comment\n").unwrap().declarations.len(), 0);
    }

    #[test]
    fn recipe_block_with_citation_parses() {
        let text = r#"
            recipe G {
              H H; psi psi;
              u c^3;
              v (k s^-1 k^-1) b (k s k^-1) c b^-1;
              y c;
              cert lowdim;
              witness { b -> b; c -> t [c, x] t^-1; }
              hopfian "cited elsewhere";
            }
        "#;
        let plan = parse(text).unwrap();
        let DeclKind::Recipe(r) = &plan.declarations[0].kind else {
            panic!("expected recipe");
        };
        assert_eq!(r.name, "G");
        assert_eq!(r.hopfian.as_deref(), Some("cited elsewhere"));
        assert_eq!(r.witnesses.len(), 2);
    }

    #[test]
    fn check_assertions_parse() {
        let text = r#"
            check "a" { identity H b^2 }
            check "b" { equal H1 s^-1 b s, b c^-3 }
            check "c" { order H c^3 = 3 }
            check "d" { order H s = infinite }
            check "e" { member H c^3, c^6 = 2 }
            check "f" { member H c^3, b = none }
            check "g" { group_order H0 = 18 }
        "#;
        let plan = parse(text).unwrap();
        assert_eq!(plan.declarations.len(), 7);
    }

    #[test]
    fn empty_word_and_commutator_atoms_parse() {
        let plan = parse("endo psi : H { s -> (); k -> [a, b]^2; }").unwrap();
        let DeclKind::Endo(e) = &plan.declarations[0].kind else {
            panic!("expected endo");
        };
        assert_eq!(
            e.maps[0].1,
            vec![RawAtom {
                base: RawBase::Empty,
                exp: 1
            }]
        );
        assert!(matches!(
            &e.maps[1].1[0],
            RawAtom {
                base: RawBase::Commutator(_, _),
                exp: 2
            }
        ));
    }

    #[test]
    fn depth_and_exponent_bombs_are_rejected() {
        let deep = format!("{}a{}", "(".repeat(80), ")".repeat(80));
        let err = parse(&format!("check \"x\" {{ identity H {deep} }}")).unwrap_err();
        assert!(err.message.contains("depth"));
        let err = parse("check \"x\" { identity H a^9999999 }").unwrap_err();
        assert!(err.message.contains("exponent"));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse("group H =").unwrap_err();
        assert_eq!(err.line, 1);
        assert!(err.message.contains("expected"));
        let err = parse("group H = hnn(H1 k, cyclic { s -> s })").unwrap_err();
        assert!(err.message.contains("`,`"));
    }

    #[test]
    fn word_text_round_trips_through_the_printer() {
        let word = parse_word_text("(k^2 s^-1 k^-2) b^-1 [c, x]^3 ()").unwrap();
        let printed = crate::ast::print_word(&word);
        assert_eq!(parse_word_text(&printed).unwrap(), word);
        assert_eq!(parse_word_text("").unwrap(), Vec::new());
    }

    mod generative {
        use super::*;
        use proptest::prelude::*;

        fn arb_base() -> impl Strategy<Value = RawBase> {
            let leaf = prop_oneof![
                4 => "[a-z][a-z0-9_]{0,4}".prop_map(RawBase::Name),
                1 => Just(RawBase::Empty),
            ];
            leaf.prop_recursive(3, 16, 4, |inner| {
                let atom = (inner, -9i64..=9).prop_map(|(base, exp)| RawAtom { base, exp });
                let word = proptest::collection::vec(atom, 1..4);
                prop_oneof![
                    word.clone().prop_map(RawBase::Group),
                    (word.clone(), word).prop_map(|(l, r)| RawBase::Commutator(l, r)),
                ]
            })
        }

        fn arb_word() -> impl Strategy<Value = RawWord> {
            proptest::collection::vec(
                (arb_base(), -1_000_000i64..=1_000_000)
                    .prop_map(|(base, exp)| RawAtom { base, exp }),
                1..6,
            )
        }

        proptest! {
            #[test]
            fn printed_words_reparse_to_the_same_structure(word in arb_word()) {
                let printed = crate::ast::print_word(&word);
                let reparsed = parse_word_text(&printed)
                    .map_err(|e| TestCaseError::fail(format!("{e} in `{printed}`")))?;
                prop_assert_eq!(reparsed, word);
            }

            #[test]
            fn arbitrary_ascii_never_panics_the_parser(text in "[ -~\\n]{0,200}") {
                let _ = parse(&text);
                let _ = parse_word_text(&text);
            }
        }
    }

    #[test]
    fn plans_round_trip_through_the_printer() {
        let text = r#"
            group H0 = presentation { gens b c; rels b^2, c^9, b^-1 c b c; }
            group H1 = hnn(H0, s, auto { b -> b c^-3; c -> c; })
            group H = hnn(H1, k, cyclic { s -> s^3 })
            group EF = free(e, f)
            group AB = free_abelian(a, b)
            group P = free_product(H, EF)
            endo psi : H { b -> b; c -> c^3; s -> s^3; k -> k; }
            cert lowdim { target H0; map { b -> b; c -> c; s -> (); k -> (); } }
            recipe G {
              H H; psi psi; u c^3; v b c; y c; cert lowdim;
              witness { b -> b; c -> t [c, x] t^-1 b; s -> k s k^-1; k -> k; }
              hopfian "with a \"quoted\" phrase";
            }
            check "relation" { equal H1 s^-1 b s, b c^-3 }
            check "leaf size" { group_order H0 = 18 }
        "#;
        let plan = parse(text).unwrap();
        let printed = print_plan(&plan);
        let reparsed = parse(&printed).unwrap();
        let kinds: Vec<_> = plan.declarations.iter().map(|d| &d.kind).collect();
        let rekinds: Vec<_> = reparsed.declarations.iter().map(|d| &d.kind).collect();
        assert_eq!(kinds, rekinds);
    }
}
