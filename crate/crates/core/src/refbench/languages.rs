use crate::cfg::format::parse;
use crate::cfg::Grammar;

/// A bundled reference language.
#[derive(Debug)]
pub struct Language {
    pub name: &'static str,
    pub short: &'static str,
    pub source: &'static str,
    /// training corpus size
    pub train_size: usize,
}

impl Language {
    pub fn grammar(&self) -> Grammar {
        parse(self.source).expect("bundled grammars parse")
    }
}

pub const LANGUAGES: &[Language] = &[
    Language {
        name: "arith",
        short: "arith",
        source: include_str!("grammars/arith.gram"),
        train_size: 17,
    },
    Language {
        name: "lisp-subset",
        short: "lisp",
        source: include_str!("grammars/lisp.gram"),
        train_size: 26,
    },
    Language {
        name: "xml-subset",
        short: "xml",
        source: include_str!("grammars/xml.gram"),
        train_size: 40,
    },
    Language {
        name: "while",
        short: "while",
        source: include_str!("grammars/while.gram"),
        train_size: 10,
    },
    Language {
        name: "json-subset",
        short: "json",
        source: include_str!("grammars/json.gram"),
        train_size: 71,
    },
    Language {
        name: "turtle-like",
        short: "turtle",
        source: include_str!("grammars/turtle.gram"),
        train_size: 33,
    },
    Language {
        name: "tinyc-subset",
        short: "tinyc",
        source: include_str!("grammars/tinyc.gram"),
        train_size: 25,
    },
];

/// Looks a language up by full or short name.
pub fn language(name: &str) -> Option<&'static Language> {
    LANGUAGES.iter().find(|l| l.name == name || l.short == name)
}
