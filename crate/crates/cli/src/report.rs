use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Json,
    Latex,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Error => 2,
        }
    }

    pub fn from_pass(ok: bool) -> Status {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs: Value,
    pub outputs: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u128>,
    pub status: Status,
    pub details: Vec<String>,
}

impl Report {
    pub fn render(&self, fmt: OutFormat) -> String {
        match fmt {
            OutFormat::Json => serde_json::to_string_pretty(self).expect("report serializes"),
            OutFormat::Text => self.render_text(),
            OutFormat::Latex => self.render_latex(),
        }
    }

    fn render_text(&self) -> String {
        let mut out = format!("command: {}\nstatus: {}\n", self.command, status_word(self.status));
        if let Some(ms) = self.elapsed_ms {
            out += &format!("elapsed: {ms} ms\n");
        }
        text_fields(&mut out, "inputs", &self.inputs);
        text_fields(&mut out, "outputs", &self.outputs);
        for d in &self.details {
            out += &format!("note: {d}\n");
        }
        out
    }

    fn render_latex(&self) -> String {
        let mut out = String::from("\\begin{description}\n");
        out += &format!("\\item[command] \\texttt{{{}}}\n", escape(&self.command));
        out += &format!("\\item[status] {}\n", status_word(self.status));
        if let Some(ms) = self.elapsed_ms {
            out += &format!("\\item[elapsed] {ms} ms\n");
        }
        for (name, v) in [("inputs", &self.inputs), ("outputs", &self.outputs)] {
            out += &format!("\\item[{name}] {}\n", latex_value(v));
        }
        for d in &self.details {
            out += &format!("\\item[note] {}\n", escape(d));
        }
        out + "\\end{description}\n"
    }
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Fail => "fail",
        Status::Error => "error",
    }
}

fn compact(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn text_fields(out: &mut String, section: &str, v: &Value) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                out.push_str(&format!("{section}.{k}: {}\n", compact(x)));
            }
        }
        Value::Null => {}
        other => out.push_str(&format!("{section}: {}\n", compact(other))),
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\textbackslash{}")
        .replace('_', "\\_")
        .replace('&', "\\&")
        .replace('%', "\\%")
        .replace('#', "\\#")
}

fn is_matrix(v: &[Value]) -> bool {
    !v.is_empty()
        && v.iter().all(|r| matches!(r, Value::Array(row) if !row.is_empty() && row.iter().all(|x| !x.is_array() && !x.is_object())))
}

fn latex_scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn latex_value(v: &Value) -> String {
    match v {
        Value::Object(map) => {
            let mut out = String::from("\n\\begin{description}\n");
            for (k, x) in map {
                out += &format!("\\item[{}] {}\n", escape(k), latex_value(x));
            }
            out + "\\end{description}"
        }
        Value::Array(rows) if is_matrix(rows) => {
            let body: Vec<String> = rows
                .iter()
                .map(|r| {
                    r.as_array()
                        .expect("matrix row")
                        .iter()
                        .map(latex_scalar)
                        .collect::<Vec<_>>()
                        .join(" & ")
                })
                .collect();
            format!("$\\begin{{pmatrix}} {} \\end{{pmatrix}}$", body.join(" \\\\ "))
        }
        Value::Array(items) if items.iter().any(|x| x.is_object()) => {
            let mut out = String::from("\n\\begin{enumerate}\n");
            for x in items {
                out += &format!("\\item {}\n", latex_value(x));
            }
            out + "\\end{enumerate}"
        }
        Value::Array(items) => format!("$({})$", items.iter().map(latex_scalar).collect::<Vec<_>>().join(", ")),
        Value::String(s) => format!("${s}$"),
        Value::Null => "--".into(),
        other => format!("${other}$"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn sample() -> Report {
        Report {
            command: "toric biresidues".into(),
            inputs: json!({"k": 1}),
            outputs: json!({"matrix": [[0, 1], [-1, 0]], "label": "x^{2}"}),
            elapsed_ms: None,
            status: Status::Pass,
            details: vec!["a_b".into()],
        }
    }

    #[test]
    fn latex_has_matrix() {
        let s = sample().render(OutFormat::Latex);
        assert!(s.contains("\\begin{pmatrix} 0 & 1 \\\\ -1 & 0 \\end{pmatrix}"));
        assert!(s.contains("a\\_b"));
    }

    #[test]
    fn text_lists_fields() {
        let s = sample().render(OutFormat::Text);
        assert!(s.contains("outputs.matrix: [[0,1],[-1,0]]"));
        assert!(s.contains("status: pass"));
    }

    #[test]
    fn json_omits_elapsed() {
        let s = sample().render(OutFormat::Json);
        assert!(!s.contains("elapsed"));
        let v: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["status"], "pass");
    }
}
