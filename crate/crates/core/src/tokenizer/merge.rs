use std::collections::{BTreeSet, HashMap};

use super::{LexClass, MergeWitness, PreToken, TokenEntry, TokenTable, TokenizeError, TokenizedCorpus};
use crate::cfg::yields::join_lexemes;
use crate::cfg::Tok;
use crate::oracle::Oracle;

const SWAP_EXAMPLES: usize = 5;
/// Members of a component a new value is swap-tested against (plus its least value).
const MEMBER_CHECKS: usize = 10;

/// Groups interchangeable identifier/number/string values into tokens.
///
/// Two values are swappable when exchanging every occurrence of one with the
/// other (in the shortest examples containing either) keeps all of those
/// examples accepted. A value joins the first component whose first members
/// and least value it is swappable with; otherwise it starts a new one.
pub fn merge_tokens(pre: &[Vec<PreToken>], sensitive: bool, oracle: &Oracle) -> Result<TokenizedCorpus, TokenizeError> {
    let mut values: Vec<(String, LexClass)> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut occurs: Vec<BTreeSet<usize>> = Vec::new();
    for (ex, toks) in pre.iter().enumerate() {
        for t in toks {
            if t.class.merge_group().is_none() {
                continue;
            }
            let i = *index.entry(t.text.clone()).or_insert_with(|| {
                values.push((t.text.clone(), t.class));
                occurs.push(BTreeSet::new());
                values.len() - 1
            });
            occurs[i].insert(ex);
        }
    }
    let lens: Vec<usize> = pre.iter().map(|ts| ts.iter().map(|t| t.text.len()).sum()).collect();
    let shortest: Vec<Vec<usize>> = occurs
        .iter()
        .map(|exs| {
            let mut v: Vec<usize> = exs.iter().copied().collect();
            v.sort_by_key(|&e| (lens[e], e));
            v.truncate(SWAP_EXAMPLES);
            v
        })
        .collect();

    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut merges = Vec::new();
    for v in 0..values.len() {
        let mut joined = false;
        for comp in members.iter_mut() {
            let rep = comp[0];
            if values[v].1.merge_group() != values[rep].1.merge_group() {
                continue;
            }
            let least = *comp.iter().min_by_key(|&&m| &values[m].0).expect("non-empty component");
            let mut partners: Vec<usize> = comp.iter().copied().take(MEMBER_CHECKS).collect();
            if !partners.contains(&least) {
                partners.push(least);
            }
            let mut witnesses = Vec::new();
            let mut ok = true;
            for &w in &partners {
                match swap_probes(pre, &values, &shortest, &lens, v, w, sensitive, oracle)? {
                    Some(w) => witnesses.push(w),
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                log::debug!("merged token value {:?} into component of {:?}", values[v].0, values[rep].0);
                comp.push(v);
                merges.extend(witnesses);
                joined = true;
                break;
            }
        }
        if !joined {
            members.push(vec![v]);
        }
    }

    let mut entries: Vec<TokenEntry> = Vec::with_capacity(members.len());
    let mut id_of = vec![0u32; values.len()];
    for (id, comp) in members.iter().enumerate() {
        for &m in comp {
            id_of[m] = id as u32;
        }
        entries.push(TokenEntry {
            name: crate::cfg::TokId(id as u32).default_name(),
            lex_class: values[comp[0]].1,
            values: comp.iter().map(|&m| values[m].0.clone()).collect(),
            classes: Vec::new(),
            repeatable: false,
            repeatable_classes: Vec::new(),
            class_witnesses: Vec::new(),
        });
    }
    let sequences = pre
        .iter()
        .map(|toks| {
            toks.iter()
                .map(|t| match index.get(&t.text) {
                    Some(&i) if t.class.merge_group().is_some() => Tok::Id(id_of[i]),
                    _ => Tok::Lit(t.text.clone()),
                })
                .collect()
        })
        .collect();
    Ok(TokenizedCorpus {
        sequences,
        sources: (0..pre.len()).collect(),
        table: TokenTable {
            entries,
            whitespace_sensitive: sensitive,
            merges,
        },
    })
}


#[allow(clippy::too_many_arguments)]
fn swap_probes(
    pre: &[Vec<PreToken>],
    values: &[(String, LexClass)],
    shortest: &[Vec<usize>],
    lens: &[usize],
    v: usize,
    w: usize,
    sensitive: bool,
    oracle: &Oracle,
) -> Result<Option<MergeWitness>, TokenizeError> {
    let (u, x) = (&values[w].0, &values[v].0);
    let mut exs: Vec<usize> = shortest[v].iter().chain(&shortest[w]).copied().collect();
    exs.sort_by_key(|&e| (lens[e], e));
    exs.dedup();
    let mut probes = Vec::with_capacity(exs.len());
    for &e in &exs {
        let swapped: Vec<&str> = pre[e]
            .iter()
            .map(|t| {
                if t.text == *u {
                    x.as_str()
                } else if t.text == *x {
                    u.as_str()
                } else {
                    t.text.as_str()
                }
            })
            .collect();
        let probe = join_lexemes(&swapped, sensitive);
        if !oracle.check(&probe)? {
            return Ok(None);
        }
        probes.push(probe);
    }
    Ok(Some(MergeWitness {
        left: u.clone(),
        right: x.clone(),
        probes,
    }))
}
