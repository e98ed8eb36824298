//! Output plumbing: quiet mode and optional ANSI color.
//!
//! Color is off unless the environment sets `POTX_COLOR=1`, so default
//! output is byte-deterministic and diff-friendly.

use std::io::Write;

/// Prints one line; when the reader has closed the pipe (`potx ... |
/// head`) the process stops quietly instead of panicking.
fn emit(line: &str) {
    let mut stdout = std::io::stdout().lock();
    if writeln!(stdout, "{line}").is_err() {
        std::process::exit(0);
    }
}

pub struct Writer {
    quiet: bool,
    machine: bool,
    color: bool,
}

impl Writer {
    pub fn new(quiet: bool, machine: bool) -> Writer {
        let color = std::env::var("POTX_COLOR").is_ok_and(|v| v == "1");
        Writer { quiet, machine, color }
    }

    /// Commentary: suppressed by --quiet and in machine format.
    pub fn info(&self, line: &str) {
        if !self.quiet && !self.machine {
            emit(line);
        }
    }

    /// Primary result: always printed.
    pub fn result(&self, line: &str) {
        emit(line);
    }

    /// Machine-protocol line: printed only in machine format.
    pub fn machine(&self, line: &str) {
        if self.machine {
            emit(line);
        }
    }

    pub fn is_machine(&self) -> bool {
        self.machine
    }

    /// Wraps `text` in an ANSI color when POTX_COLOR=1.
    pub fn paint(&self, text: &str, code: &str) -> String {
        if self.color {
            format!("\x1b[{code}m{text}\x1b[0m")
        } else {
            text.to_string()
        }
    }

    pub fn green(&self, text: &str) -> String {
        self.paint(text, "32")
    }

    pub fn red(&self, text: &str) -> String {
        self.paint(text, "31")
    }

    pub fn yellow(&self, text: &str) -> String {
        self.paint(text, "33")
    }
}
