//! Language-preserving grammar clean-up.

use std::collections::HashMap;

use super::earley::Recognizer;
use super::{Grammar, NtId, Symbol};

/// Applies the rewrite rules below until none fires:
///
/// 1. inline a non-start nonterminal with a single production of length one;
/// 2. drop duplicate productions;
/// 3. drop unreachable nonterminals and unit self-loops `A → A`;
/// 4. merge nonterminals whose alternative sets coincide (lower id survives,
///    the start symbol always survives);
/// 5. drop an alternative `A → α` when `A` still derives `α` without it.
pub fn simplify(g: &Grammar) -> Grammar {
    let mut g = g.clone();
    simplify_in_place(&mut g);
    g
}

pub fn simplify_in_place(g: &mut Grammar) {
    loop {
        let mut changed = false;
        changed |= inline_unit_singletons(g);
        changed |= dedup_productions(g);
        changed |= prune(g);
        changed |= merge_identical(g);
        changed |= remove_redundant_alternatives(g);
        if !changed {
            break;
        }
    }
}

/// Rules 1–4 only; cheap enough to run after every candidate merge.
pub fn simplify_structural(g: &mut Grammar) {
    loop {
        let mut changed = false;
        changed |= inline_unit_singletons(g);
        changed |= dedup_productions(g);
        changed |= prune(g);
        changed |= merge_identical(g);
        if !changed {
            break;
        }
    }
}

fn substitute(g: &mut Grammar, from: NtId, to: &Symbol) {
    for nt in g.nonterminals().collect::<Vec<_>>() {
        for rhs in g.alternatives_mut(nt).iter_mut() {
            for s in rhs.iter_mut() {
                if *s == Symbol::Nt(from) {
                    *s = to.clone();
                }
            }
        }
    }
}

fn inline_unit_singletons(g: &mut Grammar) -> bool {
    let mut changed = false;
    for nt in g.nonterminals().collect::<Vec<_>>() {
        if nt == g.start() {
            continue;
        }
        let alts = g.alternatives(nt);
        if alts.len() != 1 || alts[0].len() != 1 || alts[0][0] == Symbol::Nt(nt) {
            continue;
        }
        let target = alts[0][0].clone();
        substitute(g, nt, &target);
        g.alternatives_mut(nt).clear();
        changed = true;
    }
    if changed {
        prune(g);
    }
    changed
}

fn dedup_productions(g: &mut Grammar) -> bool {
    let mut changed = false;
    for nt in g.nonterminals().collect::<Vec<_>>() {
        let alts = g.alternatives_mut(nt);
        let before = alts.len();
        let mut kept: Vec<Vec<Symbol>> = Vec::with_capacity(before);
        for rhs in alts.drain(..) {
            if !kept.contains(&rhs) {
                kept.push(rhs);
            }
        }
        *alts = kept;
        changed |= alts.len() != before;
    }
    changed
}

fn prune(g: &mut Grammar) -> bool {
    let mut changed = false;
    for nt in g.nonterminals().collect::<Vec<_>>() {
        let unit = vec![Symbol::Nt(nt)];
        let alts = g.alternatives_mut(nt);
        let before = alts.len();
        alts.retain(|rhs| *rhs != unit);
        changed |= alts.len() != before;
    }
    // nonterminals left without productions cannot contribute to the language
    let mut keep = g.reachable();
    for nt in g.nonterminals() {
        if nt != g.start() && g.alternatives(nt).is_empty() {
            keep[nt.index()] = false;
        }
    }
    if keep.iter().all(|&k| k) {
        return changed;
    }
    g.retain_nonterminals(&keep);
    true
}

fn merge_identical(g: &mut Grammar) -> bool {
    let mut changed = false;
    loop {
        let mut by_key: HashMap<Vec<Vec<Symbol>>, NtId> = HashMap::new();
        let mut found = None;
        for nt in g.nonterminals() {
            let mut key = g.alternatives(nt).to_vec();
            key.sort();
            match by_key.get(&key) {
                Some(&first) => {
                    found = Some(if nt == g.start() { (nt, first) } else { (first, nt) });
                    break;
                }
                None => {
                    by_key.insert(key, nt);
                }
            }
        }
        let Some((keep, drop)) = found else { break };
        substitute(g, drop, &Symbol::Nt(keep));
        g.alternatives_mut(drop).clear();
        prune(g);
        dedup_productions(g);
        changed = true;
    }
    changed
}

fn remove_redundant_alternatives(g: &mut Grammar) -> bool {
    let mut changed = false;
    let mut nt_idx = 0;
    while nt_idx < g.nt_count() {
        let nt = NtId(nt_idx as u32);
        let mut alt = 0;
        while alt < g.alternatives(nt).len() {
            let rhs = g.alternatives(nt)[alt].clone();
            let rec = Recognizer::rooted(g, nt, Some((nt, alt)));
            if g.alternatives(nt).len() > 1 && rec.derives_form(&rhs) {
                g.alternatives_mut(nt).remove(alt);
                changed = true;
            } else {
                alt += 1;
            }
        }
        nt_idx += 1;
    }
    if changed {
        prune(g);
    }
    changed
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfg::format::{parse, to_text};

    #[test]
    fn unit_singleton_is_inlined() {
        let g = parse("%start s\ns : n1 \";\" ;\nn1 : \"a\" ;\n").unwrap();
        assert_eq!(to_text(&simplify(&g)), "%start s\ns : \"a\" \";\" ;\n");
    }

    #[test]
    fn duplicates_are_removed() {
        let mut g = Grammar::new("s");
        g.alternatives_mut(g.start()).push(vec![Symbol::lit("a")]);
        g.alternatives_mut(g.start()).push(vec![Symbol::lit("a")]);
        assert_eq!(to_text(&simplify(&g)), "%start s\ns : \"a\" ;\n");
    }

    #[test]
    fn identical_nonterminals_merge_into_lower_id() {
        let g = parse("%start s\ns : a \"+\" b ;\na : \"x\" | \"y\" ;\nb : \"y\" | \"x\" ;\n").unwrap();
        assert_eq!(to_text(&simplify(&g)), "%start s\ns : a \"+\" a ;\na : \"x\" | \"y\" ;\n");
    }

    #[test]
    fn redundant_alternative_is_dropped() {
        let g = parse("%start e\ne : e \"+\" e | \"x\" | \"x\" \"+\" \"x\" ;\n").unwrap();
        assert_eq!(to_text(&simplify(&g)), "%start e\ne : e \"+\" e | \"x\" ;\n");
    }

    #[test]
    fn idempotent_on_examples() {
        for src in [
            "%start s\ns : n1 \";\" ;\nn1 : \"a\" ;\n",
            "%start s\ns : s s | \"(\" s \")\" | \"(\" \")\" ;\n",
            "%start s\ns : a | b ;\na : \"x\" a | ;\nb : \"x\" b | ;\n",
        ] {
            let once = simplify(&parse(src).unwrap());
            assert_eq!(simplify(&once), once);
        }
    }
}
