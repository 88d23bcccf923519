//! Anchored reduction of tokenized examples into small valid fragments.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cfg::{Tok, TokenSequence};
use crate::oracle::Oracle;
use crate::tokenizer::{TokenTable, TokenizeError, TokenizedCorpus};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecomposedCorpus {
    /// sorted by length, then token order; no duplicates
    pub sequences: Vec<TokenSequence>,
    /// `(example, anchor index)` pairs that produced each sequence
    pub provenance: Vec<Vec<(usize, usize)>>,
}

/// Sequence under reduction, with the original index of every kept token.
struct Work {
    toks: Vec<Tok>,
    origin: Vec<usize>,
}

fn accepted(table: &TokenTable, toks: &[Tok], oracle: &Oracle) -> Result<bool, TokenizeError> {
    Ok(oracle.check(&table.render(toks)?)?)
}

/// One left-to-right sweep for every run length `len/2, len/4, …, 1`.
/// Returns whether anything was deleted.
fn deletion_pass(w: &mut Work, anchor: usize, table: &TokenTable, oracle: &Oracle) -> Result<bool, TokenizeError> {
    let mut changed = false;
    let mut run = (w.toks.len() / 2).max(1);
    loop {
        let mut i = 0;
        while i + run <= w.toks.len() {
            if w.origin[i..i + run].contains(&anchor) {
                i += 1;
                continue;
            }
            let mut cand = Vec::with_capacity(w.toks.len() - run);
            cand.extend_from_slice(&w.toks[..i]);
            cand.extend_from_slice(&w.toks[i + run..]);
            if accepted(table, &cand, oracle)? {
                w.toks = cand;
                w.origin.drain(i..i + run);
                changed = true;
            } else {
                i += 1;
            }
        }
        if run == 1 {
            break;
        }
        run /= 2;
    }
    Ok(changed)
}

/// Reduces `seq` while keeping the token at `anchor`, to a fixpoint.
/// Returns the reduced sequence and the original indices it kept.
pub fn reduce_anchored(
    seq: &[Tok],
    anchor: usize,
    table: &TokenTable,
    oracle: &Oracle,
) -> Result<(TokenSequence, Vec<usize>), TokenizeError> {
    let mut w = Work {
        toks: seq.to_vec(),
        origin: (0..seq.len()).collect(),
    };
    while deletion_pass(&mut w, anchor, table, oracle)? {}
    Ok((w.toks, w.origin))
}

/// Whether a deletion pass anchored at `anchor` removes nothing.
pub fn is_one_minimal(seq: &[Tok], anchor: usize, table: &TokenTable, oracle: &Oracle) -> Result<bool, TokenizeError> {
    let mut w = Work {
        toks: seq.to_vec(),
        origin: (0..seq.len()).collect(),
    };
    Ok(!deletion_pass(&mut w, anchor, table, oracle)?)
}

/// Whether some position of `seq` anchors a pass that removes nothing.
pub fn is_anchored_minimal(seq: &[Tok], table: &TokenTable, oracle: &Oracle) -> Result<bool, TokenizeError> {
    for p in 0..seq.len() {
        if is_one_minimal(seq, p, table, oracle)? {
            return Ok(true);
        }
    }
    Ok(seq.is_empty())
}

/// Decomposes every example into anchored minimal fragments.
///
/// An anchor whose token was already kept by an earlier reduction of the
/// same example continues reducing from that fragment instead of from the
/// whole example.
pub fn decompose(corpus: &TokenizedCorpus, oracle: &Oracle) -> Result<DecomposedCorpus, TokenizeError> {
    let table = &corpus.table;
    let mut found: BTreeMap<(usize, TokenSequence), Vec<(usize, usize)>> = BTreeMap::new();
    for (k, seq) in corpus.sequences.iter().enumerate() {
        let example = corpus.sources.get(k).copied().unwrap_or(k);
        if !accepted(table, seq, oracle)? {
            log::warn!("example {example} is not accepted after rendering; skipped");
            continue;
        }
        let mut kept: Vec<(TokenSequence, Vec<usize>)> = Vec::new();
        for anchor in 0..seq.len() {
            let prior = kept.iter().find(|(_, origin)| origin.contains(&anchor)).cloned();
            let result = match prior {
                Some((frag, origin)) => {
                    let pos = origin.iter().position(|&o| o == anchor).expect("anchor kept");
                    let (s, sub) = reduce_anchored(&frag, pos, table, oracle)?;
                    if s.len() < frag.len() {
                        kept.push((s.clone(), sub.into_iter().map(|i| origin[i]).collect()));
                    }
                    s
                }
                None => {
                    let (s, origin) = reduce_anchored(seq, anchor, table, oracle)?;
                    kept.push((s.clone(), origin));
                    s
                }
            };
            found.entry((result.len(), result)).or_default().push((example, anchor));
        }
    }
    let mut sequences = Vec::with_capacity(found.len());
    let mut provenance = Vec::with_capacity(found.len());
    for ((_, s), mut p) in found {
        p.sort_unstable();
        sequences.push(s);
        provenance.push(p);
    }
    Ok(DecomposedCorpus { sequences, provenance })
}
