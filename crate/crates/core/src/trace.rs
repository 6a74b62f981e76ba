//! Plain-text MAC event log: one `time_us node event detail` line per event.

use std::fmt::Display;

use crate::kernel::{NodeId, SimTime};

#[derive(Debug, Clone, Default)]
pub struct Trace {
    lines: Vec<String>,
}

impl Trace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, time: SimTime, node: NodeId, event: &str, detail: impl Display) {
        let detail = detail.to_string();
        if detail.is_empty() {
            self.lines.push(format!("{time} {node} {event} -"));
        } else {
            self.lines.push(format!("{time} {node} {event} {detail}"));
        }
    }

    pub fn lines(&self) -> &[String] {
        &self.lines
    }

    pub fn render(&self) -> String {
        let mut out = String::with_capacity(self.lines.iter().map(|l| l.len() + 1).sum());
        for l in &self.lines {
            out.push_str(l);
            out.push('\n');
        }
        out
    }
}
