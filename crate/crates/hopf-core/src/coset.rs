//! Coset enumeration for finite presentations.
//!
//! [`enumerate`] runs a relator-table Todd-Coxeter pass over the trivial
//! subgroup: relator traces are filled eagerly, deductions propagate at once,
//! and coincidences are merged through a union-find with path compression.
//! A closed run is compacted into a [`MultiplicationTable`] whose rows are
//! renumbered breadth-first from the identity, so representative words come
//! out shortest-first with ties broken by generator declaration order.

use std::collections::VecDeque;

use serde_json::json;
use thiserror::Error;

use crate::word::{GeneratorId, Letter, Word, WordError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CosetError {
    #[error("presentation has no generators")]
    EmptyPresentation,
    #[error("duplicate generator {0} in presentation")]
    DuplicateGenerator(GeneratorId),
    #[error("relator uses generator {0} that the presentation does not declare")]
    UnknownGenerator(GeneratorId),
    #[error("enumeration exceeded {0}: presentation may define an infinite group")]
    Overflow(String),
    #[error("word uses generator {0} outside the table's presentation")]
    ForeignGenerator(GeneratorId),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// Generators plus relator words; the input to enumeration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinitePresentation {
    generators: Vec<GeneratorId>,
    relators: Vec<Word>,
}

impl FinitePresentation {
    /// Relators are cyclically reduced on the way in; a conjugated relator
    /// has the same normal closure.
    pub fn new(generators: Vec<GeneratorId>, relators: Vec<Word>) -> Result<Self, CosetError> {
        if generators.is_empty() {
            return Err(CosetError::EmptyPresentation);
        }
        for (i, g) in generators.iter().enumerate() {
            if generators[..i].contains(g) {
                return Err(CosetError::DuplicateGenerator(g.clone()));
            }
        }
        let mut reduced = Vec::new();
        for r in relators {
            for l in r.letters() {
                if !generators.contains(&l.gen) {
                    return Err(CosetError::UnknownGenerator(l.gen.clone()));
                }
            }
            let (_, core) = r.cyclically_reduce();
            if !core.is_empty() {
                reduced.push(core);
            }
        }
        Ok(FinitePresentation {
            generators,
            relators: reduced,
        })
    }

    pub fn generators(&self) -> &[GeneratorId] {
        &self.generators
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }
}

/// Work ceiling for a single enumeration, counting individual table steps.
/// Generous for genuinely finite corpus groups, finite for hostile input.
pub const DEFAULT_WORK_BUDGET: u64 = 50_000_000;

/// Default ceiling on simultaneously live cosets.
pub const DEFAULT_MAX_COSETS: usize = 100_000;

const UNDEF: u32 = u32::MAX;

struct Enumerator {
    ncols: usize,
    /// `table[c][col]`: target coset, or UNDEF. Column 2i is generator i,
    /// column 2i+1 its inverse.
    table: Vec<Vec<u32>>,
    parent: Vec<u32>,
    pending: VecDeque<(u32, u32)>,
    live: usize,
    max_cosets: usize,
    work: u64,
    budget: u64,
}

impl Enumerator {
    fn new(ncols: usize, max_cosets: usize, budget: u64) -> Self {
        Enumerator {
            ncols,
            table: vec![vec![UNDEF; ncols]],
            parent: vec![0],
            pending: VecDeque::new(),
            live: 1,
            max_cosets,
            work: 0,
            budget,
        }
    }

    fn spend(&mut self, amount: u64) -> Result<(), CosetError> {
        self.work += amount;
        if self.work > self.budget {
            return Err(CosetError::Overflow(format!(
                "work budget of {} steps",
                self.budget
            )));
        }
        Ok(())
    }

    fn find(&mut self, mut c: u32) -> u32 {
        while self.parent[c as usize] != c {
            let p = self.parent[c as usize];
            self.parent[c as usize] = self.parent[p as usize];
            c = self.parent[c as usize];
        }
        c
    }

    fn define(&mut self) -> Result<u32, CosetError> {
        if self.live >= self.max_cosets {
            return Err(CosetError::Overflow(format!(
                "limit of {} cosets",
                self.max_cosets
            )));
        }
        let id = self.table.len() as u32;
        self.table.push(vec![UNDEF; self.ncols]);
        self.parent.push(id);
        self.live += 1;
        Ok(id)
    }

    /// Records `a . col = b` in both directions, queueing a coincidence when
    /// a slot is already filled with a different coset.
    fn deduce(&mut self, a: u32, col: usize, b: u32) -> Result<(), CosetError> {
        self.spend(1)?;
        let a = self.find(a);
        let b = self.find(b);
        let cur = self.table[a as usize][col];
        if cur != UNDEF {
            let cur = self.find(cur);
            if cur != b {
                self.pending.push_back((cur, b));
            }
            return Ok(());
        }
        self.table[a as usize][col] = b;
        let back = self.table[b as usize][col ^ 1];
        if back == UNDEF {
            self.table[b as usize][col ^ 1] = a;
        } else {
            let back = self.find(back);
            if back != a {
                self.pending.push_back((back, a));
            }
        }
        Ok(())
    }

    fn process_coincidences(&mut self) -> Result<(), CosetError> {
        while let Some((x, y)) = self.pending.pop_front() {
            self.spend(1)?;
            let x = self.find(x);
            let y = self.find(y);
            if x == y {
                continue;
            }
            // Smaller id survives; keeps numbering stable under merges.
            let (keep, drop) = if x < y { (x, y) } else { (y, x) };
            self.parent[drop as usize] = keep;
            self.live -= 1;
            let row = std::mem::replace(&mut self.table[drop as usize], vec![UNDEF; self.ncols]);
            for (col, tgt) in row.into_iter().enumerate() {
                if tgt != UNDEF {
                    self.deduce(keep, col, tgt)?;
                }
            }
        }
        Ok(())
    }

    /// Traces one relator from `c`, filling any gap with fresh cosets.
    fn scan_and_fill(&mut self, c: u32, relator: &[usize]) -> Result<(), CosetError> {
        let mut f = self.find(c);
        let mut i = 0;
        while i < relator.len() {
            self.spend(1)?;
            let next = self.table[f as usize][relator[i]];
            if next == UNDEF {
                break;
            }
            f = self.find(next);
            i += 1;
        }
        if i == relator.len() {
            let c = self.find(c);
            if f != c {
                self.pending.push_back((f, c));
                self.process_coincidences()?;
            }
            return Ok(());
        }
        // Trace backwards from c: b must satisfy b . relator[j..] = c.
        let mut b = self.find(c);
        let mut j = relator.len();
        while j > i + 1 {
            self.spend(1)?;
            let prev = self.table[b as usize][relator[j - 1] ^ 1];
            if prev == UNDEF {
                break;
            }
            b = self.find(prev);
            j -= 1;
        }
        // Fill the remaining gap f --relator[i..j]--> b with new cosets.
        while j > i + 1 {
            let n = self.define()?;
            self.deduce(f, relator[i], n)?;
            self.process_coincidences()?;
            f = self.find(n);
            i += 1;
        }
        self.deduce(f, relator[i], b)?;
        self.process_coincidences()
    }
}

/// Right multiplication table of a finite group, closed and verified.
#[derive(Clone, Debug)]
pub struct MultiplicationTable {
    presentation: FinitePresentation,
    order: usize,
    action: Vec<u32>,
    inverse_action: Vec<u32>,
    representatives: Vec<Word>,
}

impl MultiplicationTable {
    pub fn presentation(&self) -> &FinitePresentation {
        &self.presentation
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn representative(&self, index: usize) -> &Word {
        &self.representatives[index]
    }

    pub fn representatives(&self) -> &[Word] {
        &self.representatives
    }

    fn column(&self, gen: &GeneratorId) -> Result<usize, CosetError> {
        self.presentation
            .generators
            .iter()
            .position(|g| g == gen)
            .ok_or_else(|| CosetError::ForeignGenerator(gen.clone()))
    }

    pub fn apply_generator(&self, index: usize, gen_col: usize, exp_sign: i64) -> usize {
        let n = self.presentation.generators.len();
        if exp_sign >= 0 {
            self.action[index * n + gen_col] as usize
        } else {
            self.inverse_action[index * n + gen_col] as usize
        }
    }

    /// Index reached from `index` by right-multiplying the word.
    pub fn apply_word(&self, index: usize, w: &Word) -> Result<usize, CosetError> {
        let mut cur = index;
        for l in w.letters() {
            let col = self.column(&l.gen)?;
            for _ in 0..l.exp.unsigned_abs() {
                cur = self.apply_generator(cur, col, l.exp.signum());
            }
        }
        Ok(cur)
    }

    /// Index of the element the word evaluates to.
    pub fn evaluate(&self, w: &Word) -> Result<usize, CosetError> {
        self.apply_word(0, w)
    }

    /// Multiplicative order of the element the word evaluates to.
    pub fn element_order(&self, w: &Word) -> Result<u64, CosetError> {
        let mut cur = self.apply_word(0, w)?;
        let mut n = 1u64;
        while cur != 0 {
            cur = self.apply_word(cur, w)?;
            n += 1;
            debug_assert!(n <= self.order as u64);
        }
        Ok(n)
    }

    /// Sorted indices of the subgroup generated by the given element indices.
    ///
    /// Closure under right multiplication alone is enough: in a finite group
    /// every inverse is a positive power, so the closed set is a subgroup.
    pub fn subgroup_closure(&self, generating_indices: &[usize]) -> Vec<usize> {
        let mut member = vec![false; self.order];
        member[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(e) = queue.pop_front() {
            for &g in generating_indices {
                let next = self
                    .apply_word(e, &self.representatives[g])
                    .expect("representatives stay inside the presentation");
                if !member[next] {
                    member[next] = true;
                    queue.push_back(next);
                }
            }
        }
        (0..self.order).filter(|&i| member[i]).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "order": self.order,
            "generators": self
                .presentation
                .generators
                .iter()
                .map(|g| json!({"name": g.name(), "scope": g.scope()}))
                .collect::<Vec<_>>(),
            "action": self.action,
            "inverse_action": self.inverse_action,
            "representatives": self
                .representatives
                .iter()
                .map(|w| w.to_string())
                .collect::<Vec<_>>(),
        })
    }
}

/// Enumerates the cosets of the trivial subgroup, i.e. the group elements.
pub fn enumerate(
    pres: &FinitePresentation,
    max_cosets: usize,
) -> Result<MultiplicationTable, CosetError> {
    enumerate_with_budget(pres, max_cosets, DEFAULT_WORK_BUDGET)
}

pub fn enumerate_with_budget(
    pres: &FinitePresentation,
    max_cosets: usize,
    budget: u64,
) -> Result<MultiplicationTable, CosetError> {
    let ngens = pres.generators.len();
    let ncols = 2 * ngens;
    let col_of = |gen: &GeneratorId, sign: i64| -> usize {
        let i = pres
            .generators
            .iter()
            .position(|g| g == gen)
            .expect("relators validated at construction");
        2 * i + if sign >= 0 { 0 } else { 1 }
    };
    let relator_cols: Vec<Vec<usize>> = pres
        .relators
        .iter()
        .map(|r| {
            r.unit_letters()
                .iter()
                .map(|l| col_of(&l.gen, l.exp))
                .collect()
        })
        .collect();

    let mut e = Enumerator::new(ncols, max_cosets, budget);
    let mut current: u32 = 0;
    while (current as usize) < e.table.len() {
        if e.find(current) != current {
            current += 1;
            continue;
        }
        for r in &relator_cols {
            e.scan_and_fill(current, r)?;
            if e.find(current) != current {
                break;
            }
        }
        if e.find(current) == current {
            for col in 0..ncols {
                if e.table[current as usize][col] == UNDEF {
                    let n = e.define()?;
                    e.deduce(current, col, n)?;
                    e.process_coincidences()?;
                }
            }
        }
        current += 1;
    }

    compact(pres, &mut e)
}

/// Renumbers live cosets breadth-first from the identity and verifies the
/// resulting table: totality, per-generator bijectivity, trivial relator
/// action, and representative round-trips.
fn compact(
    pres: &FinitePresentation,
    e: &mut Enumerator,
) -> Result<MultiplicationTable, CosetError> {
    let ngens = pres.generators.len();
    let root = e.find(0);
    let mut renumber = vec![UNDEF; e.table.len()];
    let mut reps: Vec<Word> = Vec::new();
    let mut queue = VecDeque::new();
    renumber[root as usize] = 0;
    reps.push(Word::identity());
    queue.push_back(root);
    let mut bfs_order = vec![root];
    while let Some(c) = queue.pop_front() {
        for col in 0..2 * ngens {
            let t = e.table[c as usize][col];
            debug_assert_ne!(t, UNDEF, "closed table has no gaps");
            let t = e.find(t);
            if renumber[t as usize] == UNDEF {
                renumber[t as usize] = bfs_order.len() as u32;
                let letter = Letter::new(
                    pres.generators[col / 2].clone(),
                    if col % 2 == 0 { 1 } else { -1 },
                );
                let rep = reps[renumber[c as usize] as usize]
                    .concat(&Word::letter(letter.gen, letter.exp))?;
                reps.push(rep);
                bfs_order.push(t);
                queue.push_back(t);
            }
        }
    }
    let order = bfs_order.len();
    debug_assert_eq!(order, e.live, "all live cosets reachable from identity");

    let mut action = vec![0u32; order * ngens];
    let mut inverse_action = vec![0u32; order * ngens];
    for (new_c, &old_c) in bfs_order.iter().enumerate() {
        for g in 0..ngens {
            let fwd = e.find(e.table[old_c as usize][2 * g]);
            let bwd = e.find(e.table[old_c as usize][2 * g + 1]);
            action[new_c * ngens + g] = renumber[fwd as usize];
            inverse_action[new_c * ngens + g] = renumber[bwd as usize];
        }
    }

    let table = MultiplicationTable {
        presentation: pres.clone(),
        order,
        action,
        inverse_action,
        representatives: reps,
    };

    // Verification pass: the invariants below are cheap and catch any slip
    // in coincidence handling.
    for g in 0..ngens {
        let mut seen_f = vec![false; order];
        let mut seen_b = vec![false; order];
        for c in 0..order {
            let f = table.action[c * ngens + g] as usize;
            let b = table.inverse_action[c * ngens + g] as usize;
            assert!(!seen_f[f] && !seen_b[b], "generator action is a bijection");
            seen_f[f] = true;
            seen_b[b] = true;
            assert_eq!(
                table.inverse_action[f * ngens + g] as usize,
                c,
                "actions are mutually inverse"
            );
        }
    }
    for r in pres.relators() {
        for c in 0..order {
            assert_eq!(
                table.apply_word(c, r)?,
                c,
                "every relator acts trivially on every coset"
            );
        }
    }
    for (i, rep) in table.representatives.iter().enumerate() {
        assert_eq!(table.evaluate(rep)?, i, "representatives round-trip");
    }

    Ok(table)
}
