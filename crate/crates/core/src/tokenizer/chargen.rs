use super::{ClassKind, TokenizeError, TokenizedCorpus};
use crate::cfg::yields::join_lexemes;
use crate::cfg::Tok;
use crate::oracle::Oracle;

/// Probes each token's witnessed character classes in one context: the first
/// sequence containing the token, with that occurrence replaced by the class
/// representative. A class is kept when its probe is accepted, and marked
/// repeatable when its representative repeated twice and four times is also
/// accepted.
pub fn generalize_characters(corpus: &mut TokenizedCorpus, oracle: &Oracle) -> Result<(), TokenizeError> {
    let sensitive = corpus.table.whitespace_sensitive;
    for id in 0..corpus.table.entries.len() {
        let Some((seq, pos)) = corpus.sequences.iter().find_map(|s| {
            s.iter().position(|t| *t == Tok::Id(id as u32)).map(|p| (s, p))
        }) else {
            continue;
        };
        let entry = &corpus.table.entries[id];
        let quote = entry.quote();
        let mut witnessed: Vec<ClassKind> = Vec::new();
        for v in &entry.values {
            let body = match quote {
                Some(q) => v.strip_prefix(q).and_then(|s| s.strip_suffix(q)).unwrap_or(v),
                None => v,
            };
            for c in body.chars() {
                if let Some(k) = ClassKind::of(c) {
                    if !witnessed.contains(&k) {
                        witnessed.push(k);
                    }
                }
            }
        }
        witnessed.sort();
        let render_with = |text: &str| -> String {
            let pieces: Vec<&str> = seq
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    if i == pos {
                        text
                    } else {
                        match t {
                            Tok::Id(j) => corpus.table.entries[*j as usize].least(),
                            Tok::Lit(s) => s.as_str(),
                        }
                    }
                })
                .collect();
            join_lexemes(&pieces, sensitive)
        };
        let wrap = |body: String| match quote {
            Some(q) => format!("{q}{body}{q}"),
            None => body,
        };
        let mut classes = Vec::new();
        let mut witnesses = Vec::new();
        for k in witnessed {
            let probe = render_with(&wrap(k.representative().to_string()));
            if oracle.check(&probe)? {
                classes.push(k);
                witnesses.push((k, probe));
            }
        }
        let mut repeatable_classes = Vec::new();
        for k in &classes {
            let mut ok = true;
            for n in [2, 4] {
                let probe = render_with(&wrap(k.representative().to_string().repeat(n)));
                if !oracle.check(&probe)? {
                    ok = false;
                    break;
                }
            }
            if ok {
                repeatable_classes.push(*k);
            }
        }
        let entry = &mut corpus.table.entries[id];
        entry.repeatable = !classes.is_empty() && repeatable_classes.len() == classes.len();
        entry.classes = classes;
        entry.class_witnesses = witnesses;
        entry.repeatable_classes = repeatable_classes;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenizer::{merge_tokens, pretokenize};

    fn corpus(xs: &[&str], o: &Oracle) -> TokenizedCorpus {
        let pre: Vec<_> = xs.iter().map(|e| pretokenize(e, false)).collect();
        let mut c = merge_tokens(&pre, false, o).unwrap();
        generalize_characters(&mut c, o).unwrap();
        c
    }

    #[test]
    fn tinyc_atoms_generalize_to_letters_and_digits() {
        let o = Oracle::from_spec("builtin:tinyc", false, crate::oracle::DEFAULT_TIMEOUT).unwrap();
        let c = corpus(&["a+3;", "3<3;"], &o);
        let t = &c.table.entries[0];
        assert_eq!(t.classes, [ClassKind::Lowercase, ClassKind::Digit]);
        assert_eq!(t.class_witnesses[0].1, "q+3;");
        assert_eq!(t.class_witnesses[1].1, "7+3;");
        assert!(t.repeatable);
        for (_, w) in &t.class_witnesses {
            assert!(o.check(w).unwrap());
        }
    }

    #[test]
    fn keyword_gets_no_class() {
        let o = Oracle::from_spec("builtin:while", false, crate::oracle::DEFAULT_TIMEOUT).unwrap();
        let c = corpus(&["while x<3 do{skip}"], &o);
        let kw = c.table.entries.iter().find(|e| e.least() == "while").unwrap();
        assert!(kw.classes.is_empty());
        assert!(!kw.repeatable);
    }

    #[test]
    fn class_without_repetition() {
        let g = crate::cfg::format::parse("%start s\n%token d = [0-9] ;\ns : d \";\" ;\n").unwrap();
        let o = Oracle::builtin_from_grammar(&g).unwrap();
        let c = corpus(&["4;"], &o);
        let t = &c.table.entries[0];
        assert_eq!(t.classes, [ClassKind::Digit]);
        assert!(!t.repeatable);
        assert_eq!(t.expanded_def().alts.len(), 1);
        assert_eq!(crate::cfg::format::to_text(&crate::cfg::Grammar::with_tokens(vec![t.expanded_def()], false)).lines().nth(1).unwrap(), "%token t1 = [0-9] ;");
    }
}
