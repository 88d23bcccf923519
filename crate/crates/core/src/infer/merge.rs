//! Uniting a bubble set into one fresh nonterminal.

use std::collections::BTreeMap;

use super::bubble::Bubble;
use crate::cfg::simplify::simplify_in_place;
use crate::cfg::{Grammar, NtId, Symbol};

fn nested(inner: (usize, usize), outer: (usize, usize)) -> bool {
    outer.0 <= inner.0 && inner.1 <= outer.1 && inner != outer
}

fn crossing(a: (usize, usize), b: (usize, usize)) -> bool {
    a.0 < b.1 && b.0 < a.1 && !nested(a, b) && !nested(b, a) && a != b
}

/// `rhs[lo..hi]` with every maximal span strictly inside replaced by `n`.
fn rewrite(rhs: &[Symbol], lo: usize, hi: usize, spans: &[(usize, usize)], n: NtId) -> Vec<Symbol> {
    let mut out = Vec::new();
    let mut i = lo;
    while i < hi {
        let inner = spans
            .iter()
            .filter(|&&s| s.0 == i && nested(s, (lo, hi)))
            .filter(|&&s| !spans.iter().any(|&o| nested(s, o) && nested(o, (lo, hi))))
            .max_by_key(|s| s.1);
        match inner {
            Some(&(_, e)) => {
                out.push(Symbol::Nt(n));
                i = e;
            }
            None => {
                out.push(rhs[i].clone());
                i += 1;
            }
        }
    }
    out
}

/// Merges without simplifying. Returns `None` for a set that cannot change
/// the grammar (a single usable bubble).
pub fn merge_raw(g: &Grammar, bubbles: &[Bubble]) -> Option<Grammar> {
    let mut hosts: BTreeMap<(NtId, usize), Vec<(usize, usize)>> = BTreeMap::new();
    for b in bubbles {
        let span = (b.start, b.end);
        let list = hosts.entry((b.lhs, b.alt)).or_default();
        if list.contains(&span) {
            continue;
        }
        if list.iter().any(|&o| crossing(o, span)) {
            log::debug!("bubble {}..{} of {} crosses another; skipped", b.start, b.end, g.name(b.lhs));
            continue;
        }
        list.push(span);
    }
    if hosts.values().map(Vec::len).sum::<usize>() < 2 {
        return None;
    }
    let mut out = g.clone();
    let n = out.fresh_nonterminal();
    let mut bodies: Vec<Vec<Symbol>> = Vec::new();
    let mut rewritten: BTreeMap<(NtId, usize), Vec<Symbol>> = BTreeMap::new();
    for (&(lhs, alt), spans) in &hosts {
        let rhs = &g.alternatives(lhs)[alt];
        for &(s, e) in spans {
            let body = rewrite(rhs, s, e, spans, n);
            if !bodies.contains(&body) {
                bodies.push(body);
            }
        }
        let host = if spans.contains(&(0, rhs.len())) {
            vec![Symbol::Nt(n)]
        } else {
            rewrite(rhs, 0, rhs.len(), spans, n)
        };
        rewritten.insert((lhs, alt), host);
    }
    for nt in g.nonterminals() {
        let alts: Vec<Vec<Symbol>> = g
            .alternatives(nt)
            .iter()
            .enumerate()
            .map(|(i, rhs)| rewritten.get(&(nt, i)).cloned().unwrap_or_else(|| rhs.clone()))
            .collect();
        let slot = out.alternatives_mut(nt);
        slot.clear();
        for rhs in alts {
            if !slot.contains(&rhs) {
                slot.push(rhs);
            }
        }
    }
    for body in bodies {
        out.add_production(n, body);
    }
    Some(out)
}

/// Replaces every bubble by a fresh nonterminal deriving all bubble
/// contents, then simplifies. Nested bubbles inside another bubble become
/// recursive references; a bubble crossing an earlier one is skipped.
pub fn merge_bubbles(g: &Grammar, bubbles: &[Bubble]) -> Grammar {
    let mut out = merge_raw(g, bubbles).unwrap_or_else(|| g.clone());
    simplify_in_place(&mut out);
    out
}
