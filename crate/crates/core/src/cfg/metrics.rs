use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Grammar, LexAtom, Symbol};

/// Size measures of a grammar. Both the syntactic rules and the lexical
/// layer are counted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrammarMetrics {
    pub nt_count: usize,
    pub terminal_count: usize,
    pub alternatives: usize,
    pub avg_rule_len: f64,
    pub size_sum: usize,
}

impl GrammarMetrics {
    pub fn of(g: &Grammar) -> Self {
        let mut terminals: BTreeSet<String> = BTreeSet::new();
        let mut alternatives = 0;
        let mut size_sum = 0;
        for (_, _, rhs) in g.productions() {
            alternatives += 1;
            size_sum += rhs.len().max(1);
            for s in rhs {
                match s {
                    Symbol::Lit(_) | Symbol::Class(_) => {
                        terminals.insert(g.symbol_display(s));
                    }
                    _ => {}
                }
            }
        }
        for def in g.tokens() {
            for alt in &def.alts {
                alternatives += 1;
                size_sum += alt.len().max(1);
                for a in alt {
                    terminals.insert(match a {
                        LexAtom::Lit(s) => super::format::escape_literal(s),
                        LexAtom::Class(c) => c.to_string(),
                    });
                }
            }
        }
        Self {
            nt_count: g.nt_count() + g.tokens().len(),
            terminal_count: terminals.len(),
            alternatives,
            avg_rule_len: if alternatives == 0 { 0.0 } else { size_sum as f64 / alternatives as f64 },
            size_sum,
        }
    }
}
