//! Verdicts, per-check results and the JSON report writer.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }

    /// Fail dominates inconclusive, which dominates pass.
    pub fn combine<I: IntoIterator<Item = Verdict>>(it: I) -> Verdict {
        let mut out = Verdict::Pass;
        for v in it {
            match v {
                Verdict::Fail => return Verdict::Fail,
                Verdict::Inconclusive => out = Verdict::Inconclusive,
                Verdict::Pass => {}
            }
        }
        out
    }

    /// Process exit status: 0 pass, 1 fail, 2 inconclusive.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Inconclusive => 2,
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// One verified condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    /// Short label of the verified condition, e.g. `PMP3`.
    pub tag: String,
    pub verdict: Verdict,
    pub residual: Option<f64>,
    pub tolerance: Option<f64>,
    pub witnesses: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl CheckResult {
    pub fn new(name: &str, tag: &str, verdict: Verdict) -> Self {
        CheckResult {
            name: name.to_string(),
            tag: tag.to_string(),
            verdict,
            residual: None,
            tolerance: None,
            witnesses: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn residual(mut self, residual: f64, tolerance: f64) -> Self {
        self.residual = Some(residual);
        self.tolerance = Some(tolerance);
        self
    }

    pub fn witness(mut self, key: &str, value: f64) -> Self {
        self.witnesses.insert(key.to_string(), value);
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub grid_nodes: usize,
    pub t_max: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub problem: String,
    pub params: BTreeMap<String, f64>,
    pub suites: Vec<String>,
    pub checks: Vec<CheckResult>,
    pub summary: Verdict,
    pub provenance: Provenance,
}

impl VerificationReport {
    pub fn new(
        problem: &str,
        params: BTreeMap<String, f64>,
        suites: Vec<String>,
        checks: Vec<CheckResult>,
        provenance: Provenance,
    ) -> Self {
        let summary = Verdict::combine(checks.iter().map(|c| c.verdict));
        VerificationReport {
            problem: problem.to_string(),
            params,
            suites,
            checks,
            summary,
            provenance,
        }
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Pretty JSON formatter that writes every float with 17 significant digits.
struct Sig17<'a> {
    inner: serde_json::ser::PrettyFormatter<'a>,
}

macro_rules! delegate {
    ($($name:ident($($arg:ident : $ty:ty),*)),* $(,)?) => {
        $(fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.inner.$name(w $(, $arg)*)
        })*
    };
}

impl serde_json::ser::Formatter for Sig17<'_> {
    delegate!(
        begin_array(),
        end_array(),
        begin_array_value(first: bool),
        end_array_value(),
        begin_object(),
        end_object(),
        begin_object_key(first: bool),
        begin_object_value(),
        end_object_value(),
    );

    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{}", format_sig17(value))
    }
}

/// Formats a finite float with 17 significant digits in scientific notation.
pub fn format_sig17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Serializes `value` as pretty JSON with 17-significant-digit floats.
/// Non-finite floats become `null`.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let fmt = Sig17 {
        inner: serde_json::ser::PrettyFormatter::with_indent(b"  "),
    };
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
    value
        .serialize(&mut ser)
        .expect("serializing report structures cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combine_precedence() {
        use Verdict::*;
        assert_eq!(Verdict::combine([Pass, Pass]), Pass);
        assert_eq!(Verdict::combine([Pass, Inconclusive]), Inconclusive);
        assert_eq!(Verdict::combine([Inconclusive, Fail, Pass]), Fail);
        assert_eq!(Verdict::combine([]), Pass);
    }

    #[test]
    fn floats_have_17_significant_digits() {
        let c = CheckResult::new("x", "T", Verdict::Pass).residual(0.1, 1e-6);
        let s = to_json(&c);
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        assert!(s.contains("9.9999999999999995e-7"), "{s}");
        let back: CheckResult = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
    }
}
