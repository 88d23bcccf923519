use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use super::{Backend, OracleError};

fn split_command(command: &str) -> Result<Vec<String>, OracleError> {
    let argv = shell_words::split(command).map_err(|e| OracleError::Config(format!("{command}: {e}")))?;
    if argv.is_empty() {
        return Err(OracleError::Config("empty oracle command".into()));
    }
    Ok(argv)
}

fn kill(child: &mut Child) {
    let _ = child.kill();
    let _ = child.wait();
}

/// Runs the command once per candidate.
pub struct OneShot {
    argv: Vec<String>,
    timeout: Duration,
}

impl OneShot {
    pub fn new(command: &str, timeout: Duration) -> Result<Self, OracleError> {
        Ok(Self {
            argv: split_command(command)?,
            timeout,
        })
    }
}

impl Backend for OneShot {
    fn check(&self, candidate: &str) -> Result<bool, OracleError> {
        let mut child = Command::new(&self.argv[0])
            .args(&self.argv[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|source| OracleError::Spawn {
                command: self.argv.join(" "),
                source,
            })?;
        if let Some(mut stdin) = child.stdin.take() {
            // a parser may exit before reading everything; that is its verdict, not an error
            let _ = stdin.write_all(candidate.as_bytes());
        }
        let deadline = Instant::now() + self.timeout;
        let mut pause = Duration::from_micros(50);
        loop {
            if let Some(status) = child.try_wait()? {
                return Ok(status.success());
            }
            if Instant::now() >= deadline {
                kill(&mut child);
                return Err(OracleError::Timeout(self.timeout));
            }
            thread::sleep(pause);
            pause = (pause * 2).min(Duration::from_millis(5));
        }
    }
}

/// Escapes a candidate into a single protocol line.
pub fn escape_line(candidate: &str) -> String {
    let mut out = String::with_capacity(candidate.len() + 1);
    for c in candidate.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

struct Session {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
    broken: bool,
}

/// One long-running process; each query is a line, each answer `1` or `0`.
pub struct Persistent {
    session: Mutex<Session>,
    timeout: Duration,
}

impl Persistent {
    pub fn spawn(command: &str, timeout: Duration) -> Result<Self, OracleError> {
        let argv = split_command(command)?;
        let mut child = Command::new(&argv[0])
            .args(&argv[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|source| OracleError::Spawn {
                command: argv.join(" "),
                source,
            })?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Self {
            session: Mutex::new(Session {
                child,
                stdin,
                lines: rx,
                broken: false,
            }),
            timeout,
        })
    }
}

impl Backend for Persistent {
    fn check(&self, candidate: &str) -> Result<bool, OracleError> {
        let mut s = self.session.lock().expect("oracle session lock");
        if s.broken {
            return Err(OracleError::Protocol("oracle process is no longer usable".into()));
        }
        let line = escape_line(candidate) + "\n";
        if let Err(e) = s.stdin.write_all(line.as_bytes()).and_then(|_| s.stdin.flush()) {
            s.broken = true;
            return Err(e.into());
        }
        let answer = match s.lines.recv_timeout(self.timeout) {
            Ok(Ok(a)) => a,
            Ok(Err(e)) => {
                s.broken = true;
                return Err(e.into());
            }
            Err(RecvTimeoutError::Timeout) => {
                s.broken = true;
                kill(&mut s.child);
                return Err(OracleError::Timeout(self.timeout));
            }
            Err(RecvTimeoutError::Disconnected) => {
                s.broken = true;
                return Err(OracleError::Protocol("oracle process closed its output".into()));
            }
        };
        match answer.trim_end_matches('\r') {
            "1" => Ok(true),
            "0" => Ok(false),
            other => {
                s.broken = true;
                Err(OracleError::Protocol(format!("expected `1` or `0`, got {other:?}")))
            }
        }
    }
}

impl Drop for Persistent {
    fn drop(&mut self) {
        if let Ok(s) = self.session.get_mut() {
            kill(&mut s.child);
        }
    }
}
