//! Machine-readable report files.
//!
//! Reports are a single JSON document written by a handwritten serializer:
//! every floating-point number is printed with 17 significant digits in a
//! fixed format, so identical runs produce byte-identical files regardless
//! of thread count.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::identities::IdentityReport;
use crate::scan::ScanShapeReport;

/// Tool version embedded in every report.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// 17-significant-digit floating-point formatting (round-trips f64 exactly).
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        // Reports never contain non-finite numbers; JSON has no encoding
        // for them, so fall back to null.
        "null".into()
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out
}

fn json_str(s: &str) -> String {
    format!("\"{}\"", escape(s))
}

fn json_f64_list(xs: &[f64]) -> String {
    let items: Vec<String> = xs.iter().map(|&x| fmt_f64(x)).collect();
    format!("[{}]", items.join(", "))
}

fn json_usize_list(xs: &[usize]) -> String {
    let items: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
    format!("[{}]", items.join(", "))
}

fn json_str_list(xs: &[String]) -> String {
    let items: Vec<String> = xs.iter().map(|s| json_str(s)).collect();
    format!("[{}]", items.join(", "))
}

fn identity_report_json(r: &IdentityReport, indent: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{indent}{{");
    let _ = writeln!(s, "{indent}  \"identity\": {},", json_str(&r.identity));
    let _ = writeln!(s, "{indent}  \"shape\": {},", json_str(&r.shape));
    match &r.a {
        Some(a) => {
            let _ = writeln!(s, "{indent}  \"a\": {},", json_f64_list(a));
            let _ = writeln!(s, "{indent}  \"a_inner\": {},", fmt_f64(r.a_inner.unwrap_or(1.0)));
        }
        None => {
            let _ = writeln!(s, "{indent}  \"a\": null,");
            let _ = writeln!(s, "{indent}  \"a_inner\": null,");
        }
    }
    match r.m {
        Some(m) => {
            let _ = writeln!(s, "{indent}  \"m\": {m},");
        }
        None => {
            let _ = writeln!(s, "{indent}  \"m\": null,");
        }
    }
    let _ = writeln!(s, "{indent}  \"lhs\": {},", fmt_f64(r.lhs));
    let _ = writeln!(s, "{indent}  \"rhs\": {},", fmt_f64(r.rhs));
    let _ = writeln!(s, "{indent}  \"abs_err\": {},", fmt_f64(r.abs_err));
    let _ = writeln!(s, "{indent}  \"rel_err\": {},", fmt_f64(r.rel_err));
    let _ = writeln!(s, "{indent}  \"scale\": {},", fmt_f64(r.scale));
    let _ = writeln!(
        s,
        "{indent}  \"quadrature_error_proxy\": {},",
        fmt_f64(r.quadrature_error_proxy)
    );
    let _ = writeln!(s, "{indent}  \"nodes\": {},", json_usize_list(&r.nodes));
    let _ = writeln!(s, "{indent}  \"pass\": {},", r.pass);
    let _ = writeln!(s, "{indent}  \"notes\": {}", json_str_list(&r.notes));
    let _ = write!(s, "{indent}}}");
    s
}

/// Full output of a `verify` run.
#[derive(Debug, Clone)]
pub struct RunReport {
    /// Canonical echo of the resolved configuration (excludes thread count,
    /// which must not affect report bytes).
    pub config: String,
    pub seed: Option<u64>,
    /// Gauss-Bonnet constants in effect, when any identity used them.
    pub constants: Option<Vec<f64>>,
    pub reports: Vec<IdentityReport>,
}

impl RunReport {
    pub fn all_pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = String::new();
        s.push_str("{\n");
        let _ = writeln!(s, "  \"tool\": {},", json_str(&format!("spaceform {TOOL_VERSION}")));
        let _ = writeln!(s, "  \"config\": {},", json_str(&self.config));
        match self.seed {
            Some(seed) => {
                let _ = writeln!(s, "  \"seed\": {seed},");
            }
            None => {
                let _ = writeln!(s, "  \"seed\": null,");
            }
        }
        match &self.constants {
            Some(c) => {
                let _ = writeln!(s, "  \"constants\": {},", json_f64_list(c));
            }
            None => {
                let _ = writeln!(s, "  \"constants\": null,");
            }
        }
        let _ = writeln!(s, "  \"pass\": {},", self.all_pass());
        s.push_str("  \"reports\": [\n");
        for (i, r) in self.reports.iter().enumerate() {
            s.push_str(&identity_report_json(r, "    "));
            s.push_str(if i + 1 < self.reports.len() { ",\n" } else { "\n" });
        }
        s.push_str("  ]\n}\n");
        s
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// Output of a pointwise-residual scan.
#[derive(Debug, Clone)]
pub struct ScanRunReport {
    pub config: String,
    pub seed: u64,
    pub tolerance: f64,
    pub shapes: Vec<ScanShapeReport>,
}

impl ScanRunReport {
    pub fn all_pass(&self) -> bool {
        self.shapes.iter().all(|s| s.worst_residual() <= self.tolerance)
    }

    pub fn to_json(&self) -> String {
        let mut s = String::new();
        s.push_str("{\n");
        let _ = writeln!(s, "  \"tool\": {},", json_str(&format!("spaceform {TOOL_VERSION}")));
        let _ = writeln!(s, "  \"config\": {},", json_str(&self.config));
        let _ = writeln!(s, "  \"seed\": {},", self.seed);
        let _ = writeln!(s, "  \"tolerance\": {},", fmt_f64(self.tolerance));
        let _ = writeln!(s, "  \"pass\": {},", self.all_pass());
        s.push_str("  \"shapes\": [\n");
        for (i, sh) in self.shapes.iter().enumerate() {
            s.push_str("    {\n");
            let _ = writeln!(s, "      \"shape\": {},", json_str(&sh.shape));
            let _ = writeln!(s, "      \"points\": {},", sh.points);
            let _ = writeln!(s, "      \"validate_failures\": {},", sh.validate_failures);
            let _ = writeln!(s, "      \"max_gauss_formula\": {},", fmt_f64(sh.max_gauss_formula));
            let _ = writeln!(s, "      \"max_weingarten\": {},", fmt_f64(sh.max_weingarten));
            let _ = writeln!(s, "      \"max_reilly_position\": {},", fmt_f64(sh.max_reilly_position));
            let _ = writeln!(s, "      \"max_newton_tn\": {},", fmt_f64(sh.max_newton_tn));
            let _ = writeln!(s, "      \"max_trace_tr\": {},", fmt_f64(sh.max_trace_tr));
            let _ = writeln!(s, "      \"max_trace_btr\": {},", fmt_f64(sh.max_trace_btr));
            let _ = writeln!(s, "      \"pass\": {}", sh.worst_residual() <= self.tolerance);
            s.push_str("    }");
            s.push_str(if i + 1 < self.shapes.len() { ",\n" } else { "\n" });
        }
        s.push_str("  ]\n}\n");
        s
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// Constants file: `{"n": 4, "k-independent": true, "c": [c1, c2]}`.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ConstantsFile {
    pub n: usize,
    #[serde(rename = "k-independent")]
    pub k_independent: bool,
    pub c: Vec<f64>,
}

impl ConstantsFile {
    pub fn new(n: usize, c: Vec<f64>) -> Self {
        ConstantsFile {
            n,
            k_independent: true,
            c,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Deterministic serialization with 17-digit constants.
    pub fn to_json(&self) -> String {
        let items: Vec<String> = self.c.iter().map(|&x| fmt_f64(x)).collect();
        format!(
            "{{\"n\": {}, \"k-independent\": {}, \"c\": [{}]}}\n",
            self.n,
            self.k_independent,
            items.join(", ")
        )
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}
