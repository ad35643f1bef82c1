//! Human-readable lines or `key=value` records, one per result.

use sheafbar::Barcode;

use crate::config::Format;

pub struct Output {
    format: Format,
}

fn quote(value: &str) -> String {
    if !value.is_empty() && !value.contains(|c: char| c.is_whitespace() || c == '"' || c == '=') {
        return value.to_string();
    }
    format!("\"{}\"", value.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn record_line(kind: &str, fields: &[(&str, String)]) -> String {
    let mut line = format!("kind={}", quote(kind));
    for (key, value) in fields {
        line.push_str(&format!(" {key}={}", quote(value)));
    }
    line
}

impl Output {
    pub fn new(format: Format) -> Self {
        Output { format }
    }

    pub fn is_human(&self) -> bool {
        self.format == Format::Human
    }

    pub fn human(&self, line: impl AsRef<str>) {
        if self.format == Format::Human {
            println!("{}", line.as_ref());
        }
    }

    pub fn record(&self, kind: &str, fields: &[(&str, String)]) {
        if self.format == Format::Machine {
            println!("{}", record_line(kind, fields));
        }
    }

    /// The barcode in file format for humans, one `bar` record per bar otherwise.
    pub fn barcode(&self, b: &Barcode) {
        match self.format {
            Format::Human => print!("{}", b.to_text()),
            Format::Machine => {
                for bar in b.bars() {
                    self.record(
                        "bar",
                        &[
                            ("degree", bar.degree.to_string()),
                            ("lo", bar.lo().to_string()),
                            ("hi", bar.hi().to_string()),
                        ],
                    );
                }
            }
        }
    }
}
