//! Structured command reports with text, JSON and CSV renderings.
//!
//! Every value is carried as a string, so the three renderings agree on
//! values by construction (and a test pins that).

use serde::Serialize;

pub const REPORT_VERSION: &str = "1";

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub name: String,
    pub value: String,
    /// None for informational rows; Some(_) marks a verification.
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Section {
    pub title: String,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportDocument {
    pub report_version: String,
    pub command: String,
    pub inputs: Vec<(String, String)>,
    pub registry_version: String,
    pub sections: Vec<Section>,
    pub cache_events: Vec<String>,
    pub timing_ms: u128,
}

impl ReportDocument {
    pub fn new(command: impl Into<String>, registry_version: impl Into<String>) -> Self {
        Self {
            report_version: REPORT_VERSION.to_string(),
            command: command.into(),
            inputs: Vec::new(),
            registry_version: registry_version.into(),
            sections: Vec::new(),
            cache_events: Vec::new(),
            timing_ms: 0,
        }
    }

    pub fn input(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.inputs.push((key.into(), value.into()));
    }

    pub fn push_section(&mut self, title: impl Into<String>) -> &mut Section {
        self.sections.push(Section {
            title: title.into(),
            rows: Vec::new(),
        });
        self.sections.last_mut().unwrap()
    }

    pub fn cache_event(&mut self, event: impl Into<String>) {
        self.cache_events.push(event.into());
    }

    /// True when every verification row passed.
    pub fn passed(&self) -> bool {
        self.sections
            .iter()
            .flat_map(|s| &s.rows)
            .all(|r| r.pass != Some(false))
    }

    pub fn failing_rows(&self) -> Vec<(String, String)> {
        self.sections
            .iter()
            .flat_map(|s| s.rows.iter().map(move |r| (s.title.clone(), r)))
            .filter(|(_, r)| r.pass == Some(false))
            .map(|(t, r)| (t, r.name.clone()))
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        fn esc(s: &str) -> String {
            if s.contains(',') || s.contains('"') || s.contains('\n') {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.to_string()
            }
        }
        let mut out = String::from("section,name,value,pass\n");
        for s in &self.sections {
            for r in &s.rows {
                let pass = match r.pass {
                    None => "",
                    Some(true) => "true",
                    Some(false) => "false",
                };
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    esc(&s.title),
                    esc(&r.name),
                    esc(&r.value),
                    pass
                ));
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# {} (registry v{}, {} ms)\n",
            self.command, self.registry_version, self.timing_ms
        ));
        for (k, v) in &self.inputs {
            out.push_str(&format!("input {k} = {v}\n"));
        }
        for e in &self.cache_events {
            out.push_str(&format!("cache: {e}\n"));
        }
        for s in &self.sections {
            out.push_str(&format!("\n== {} ==\n", s.title));
            for r in &s.rows {
                let mark = match r.pass {
                    None => "      ",
                    Some(true) => "[pass]",
                    Some(false) => "[FAIL]",
                };
                out.push_str(&format!("{mark} {}: {}\n", r.name, r.value));
            }
        }
        let verdict = if self.passed() { "ok" } else { "FAILED" };
        out.push_str(&format!("\nresult: {verdict}\n"));
        out
    }
}

/// Splits one CSV line produced by [`ReportDocument::to_csv`] back into
/// fields (quote-aware).
pub fn parse_csv_line(line: &str) -> Vec<String> {
    let mut fields = Vec::new();
    let mut cur = String::new();
    let mut chars = line.chars().peekable();
    let mut quoted = false;
    while let Some(c) = chars.next() {
        match c {
            '"' if quoted => {
                if chars.peek() == Some(&'"') {
                    chars.next();
                    cur.push('"');
                } else {
                    quoted = false;
                }
            }
            '"' if cur.is_empty() => quoted = true,
            ',' if !quoted => {
                fields.push(std::mem::take(&mut cur));
            }
            c => cur.push(c),
        }
    }
    fields.push(cur);
    fields
}

impl Section {
    pub fn row(&mut self, name: impl Into<String>, value: impl Into<String>) {
        self.rows.push(Row {
            name: name.into(),
            value: value.into(),
            pass: None,
        });
    }

    pub fn check(&mut self, name: impl Into<String>, value: impl Into<String>, pass: bool) {
        self.rows.push(Row {
            name: name.into(),
            value: value.into(),
            pass: Some(pass),
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ReportDocument {
        let mut doc = ReportDocument::new("demo", "1");
        doc.input("expr", "xi(0,0)");
        let s = doc.push_section("values");
        s.row("order", "50030759116800");
        s.check("identity, holds", "true", true);
        doc
    }

    #[test]
    fn pass_logic() {
        let mut doc = sample();
        assert!(doc.passed());
        doc.push_section("more").check("broken", "0", false);
        assert!(!doc.passed());
        assert_eq!(doc.failing_rows(), vec![("more".into(), "broken".into())]);
    }

    #[test]
    fn json_and_csv_values_agree() {
        let doc = sample();
        let json: serde_json::Value = serde_json::from_str(&doc.to_json()).unwrap();
        let mut json_values: Vec<String> = Vec::new();
        for s in json["sections"].as_array().unwrap() {
            for r in s["rows"].as_array().unwrap() {
                json_values.push(r["value"].as_str().unwrap().to_string());
            }
        }
        let csv = doc.to_csv();
        let csv_values: Vec<String> = csv
            .lines()
            .skip(1)
            .map(|line| parse_csv_line(line)[2].clone())
            .collect();
        assert_eq!(json_values, csv_values);
    }

    #[test]
    fn csv_escapes_commas() {
        let mut doc = ReportDocument::new("demo", "1");
        doc.push_section("s").row("label", "Phi(0,0)(B_1)");
        let csv = doc.to_csv();
        assert!(csv.contains("\"Phi(0,0)(B_1)\""));
    }
}
