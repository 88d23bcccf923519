//! The accept/reject authority, with memoization and query accounting.

mod subprocess;

use std::collections::HashMap;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cfg::earley::Recognizer;
use crate::cfg::yields::{ShortestYields, YieldMode};
use crate::cfg::{Grammar, GrammarError};

pub use subprocess::{escape_line, OneShot, Persistent};

pub const TIMEOUT_ENV: &str = "GRAMFORGE_ORACLE_TIMEOUT_MS";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("failed to start oracle `{command}`: {source}")]
    Spawn {
        command: String,
        #[source]
        source: std::io::Error,
    },
    #[error("oracle did not answer within {0:?}")]
    Timeout(Duration),
    #[error("oracle protocol error: {0}")]
    Protocol(String),
    #[error("oracle i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid oracle: {0}")]
    Config(String),
    #[error(transparent)]
    Grammar(#[from] GrammarError),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OracleStats {
    pub queries: u64,
    pub cache_hits: u64,
    /// seconds spent inside the backend
    pub oracle_time: f64,
}

/// Something that can decide membership of a candidate string.
pub trait Backend: Send + Sync {
    fn check(&self, candidate: &str) -> Result<bool, OracleError>;
}

struct Builtin(Recognizer);

impl Backend for Builtin {
    fn check(&self, candidate: &str) -> Result<bool, OracleError> {
        Ok(self.0.accepts_str(candidate))
    }
}

struct FnBackend<F>(F);

impl<F: Fn(&str) -> bool + Send + Sync> Backend for FnBackend<F> {
    fn check(&self, candidate: &str) -> Result<bool, OracleError> {
        Ok((self.0)(candidate))
    }
}

#[derive(Default)]
struct Counters {
    queries: u64,
    cache_hits: u64,
    time: Duration,
}

/// Memoizing wrapper around a [`Backend`].
pub struct Oracle {
    backend: Box<dyn Backend>,
    cache: Mutex<HashMap<String, bool>>,
    counters: Mutex<Counters>,
}

/// Timeout from the environment, or the default.
pub fn timeout_from_env() -> Duration {
    parse_timeout(std::env::var(TIMEOUT_ENV).ok().as_deref())
}

fn parse_timeout(ms: Option<&str>) -> Duration {
    ms.and_then(|v| v.trim().parse::<u64>().ok())
        .map_or(DEFAULT_TIMEOUT, Duration::from_millis)
}

impl Oracle {
    pub fn new(backend: Box<dyn Backend>) -> Self {
        Self {
            backend,
            cache: Mutex::new(HashMap::new()),
            counters: Mutex::new(Counters::default()),
        }
    }

    pub fn from_fn(f: impl Fn(&str) -> bool + Send + Sync + 'static) -> Self {
        Self::new(Box::new(FnBackend(f)))
    }

    /// Membership in a reference grammar, at the character level.
    pub fn builtin_from_grammar(reference: &Grammar) -> Result<Self, OracleError> {
        reference.validate()?;
        if !ShortestYields::compute(reference, YieldMode::Char).productive(reference.start()) {
            return Err(GrammarError::Unproductive(reference.name(reference.start()).to_string()).into());
        }
        Ok(Self::new(Box::new(Builtin(Recognizer::new(reference)))))
    }

    /// One process per query: candidate on stdin, exit status 0 accepts.
    pub fn subprocess(command: &str, timeout: Duration) -> Result<Self, OracleError> {
        Ok(Self::new(Box::new(OneShot::new(command, timeout)?)))
    }

    /// A long-lived process answering one line per query.
    pub fn persistent(command: &str, timeout: Duration) -> Result<Self, OracleError> {
        Ok(Self::new(Box::new(Persistent::spawn(command, timeout)?)))
    }

    /// `builtin:NAME` for a bundled reference language, otherwise a command line.
    pub fn from_spec(spec: &str, persistent: bool, timeout: Duration) -> Result<Self, OracleError> {
        if let Some(name) = spec.strip_prefix("builtin:") {
            let lang = crate::refbench::language(name)
                .ok_or_else(|| OracleError::Config(format!("unknown builtin language `{name}`")))?;
            Self::builtin_from_grammar(&lang.grammar())
        } else if persistent {
            Self::persistent(spec, timeout)
        } else {
            Self::subprocess(spec, timeout)
        }
    }

    pub fn check(&self, candidate: &str) -> Result<bool, OracleError> {
        if let Some(&v) = self.cache.lock().expect("cache lock").get(candidate) {
            self.counters.lock().expect("stats lock").cache_hits += 1;
            return Ok(v);
        }
        let t0 = Instant::now();
        let verdict = self.backend.check(candidate);
        let elapsed = t0.elapsed();
        {
            let mut c = self.counters.lock().expect("stats lock");
            c.queries += 1;
            c.time += elapsed;
        }
        let verdict = verdict?;
        log::trace!("oracle {verdict} {candidate:?}");
        self.cache.lock().expect("cache lock").insert(candidate.to_string(), verdict);
        Ok(verdict)
    }

    /// The cached verdict, without counting or querying.
    pub fn peek(&self, candidate: &str) -> Option<bool> {
        self.cache.lock().expect("cache lock").get(candidate).copied()
    }

    pub fn stats(&self) -> OracleStats {
        let c = self.counters.lock().expect("stats lock");
        OracleStats {
            queries: c.queries,
            cache_hits: c.cache_hits,
            oracle_time: c.time.as_secs_f64(),
        }
    }
}
