//! The report every command produces, and JSON helpers for library types.

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use stablefrac::characterize::{Counterexample, HullCertificate, VerifyReport};
use stablefrac::polytope::{ConstraintReport, Sense, Violation};
use stablefrac::rotations::{ReducedProfile, Rotation};
use stablefrac::strongstab::PairCondition;
use stablefrac::{Decomposition, FractionalMatching, Market, Matching, Rational};

pub struct Report {
    pub command: &'static str,
    pub inputs: Map<String, Value>,
    pub result: Value,
    pub diagnostics: Vec<String>,
    /// Human-readable rendering of `result`.
    pub text: String,
    /// Whether the checked property holds; false maps to exit code 1.
    pub holds: bool,
}

impl Report {
    pub fn new(command: &'static str) -> Self {
        Report {
            command,
            inputs: Map::new(),
            result: Value::Null,
            diagnostics: Vec::new(),
            text: String::new(),
            holds: true,
        }
    }

    pub fn digest(&mut self, name: &str, bytes: &[u8]) {
        let hash = hex::encode(Sha256::digest(bytes));
        self.inputs
            .insert(name.to_string(), json!(format!("sha256:{hash}")));
    }

    pub fn to_json(&self) -> Value {
        json!({
            "command": self.command,
            "inputs": self.inputs,
            "result": self.result,
            "diagnostics": self.diagnostics,
        })
    }
}

pub fn rational(v: &Rational) -> Value {
    json!(v.to_string())
}

pub fn matching(m: &Market, mu: &Matching) -> Value {
    Value::Array(
        m.firms()
            .map(|f| {
                let workers: Vec<&str> = mu
                    .ranked_workers(m, f)
                    .into_iter()
                    .map(|w| m.worker_name(w))
                    .collect();
                json!({ "firm": m.firm_name(f), "workers": workers })
            })
            .collect(),
    )
}

pub fn matrix(x: &FractionalMatching) -> Value {
    Value::Array(
        x.rows()
            .iter()
            .map(|row| Value::Array(row.iter().map(rational).collect()))
            .collect(),
    )
}

pub fn pair_condition(m: &Market, p: &PairCondition) -> Value {
    json!({
        "firm": m.firm_name(p.firm),
        "worker": m.worker_name(p.worker),
        "firm_factor": rational(&p.firm_factor),
        "worker_factor": rational(&p.worker_factor),
        "product": rational(&p.product),
    })
}

pub fn violation(m: &Market, v: &Violation) -> Value {
    let sense = match v.sense {
        Sense::AtMost => "<=",
        Sense::AtLeast => ">=",
        Sense::Equal => "=",
    };
    json!({
        "constraint": v.id.describe(m),
        "family": v.id.family(),
        "lhs": rational(&v.lhs),
        "sense": sense,
        "rhs": rational(&v.rhs),
    })
}

pub fn describe_violation(m: &Market, v: &Violation) -> String {
    let sense = match v.sense {
        Sense::AtMost => "<=",
        Sense::AtLeast => ">=",
        Sense::Equal => "=",
    };
    format!("{}: {} {} {} fails", v.id.describe(m), v.lhs, sense, v.rhs)
}

pub fn constraint_report(m: &Market, r: &ConstraintReport) -> Value {
    json!({
        "feasible": r.is_feasible(),
        "violations": r.violations.iter().map(|v| violation(m, v)).collect::<Vec<_>>(),
        "tight": r.tight.iter().map(|id| id.describe(m)).collect::<Vec<_>>(),
    })
}

pub fn rotation(m: &Market, r: &Rotation) -> Value {
    json!({
        "firms": r.firms().iter().map(|f| m.firm_name(*f)).collect::<Vec<_>>(),
        "workers": r.workers().iter().map(|w| m.worker_name(*w)).collect::<Vec<_>>(),
    })
}

pub fn decomposition(m: &Market, d: &Decomposition) -> Value {
    Value::Array(
        d.terms
            .iter()
            .map(|t| json!({ "matching": matching(m, &t.matching), "weight": rational(&t.weight) }))
            .collect(),
    )
}

pub fn certificate(m: &Market, c: &HullCertificate) -> Value {
    json!({
        "base": matching(m, &c.base),
        "rotations": c.phi.iter().map(|r| rotation(m, r)).collect::<Vec<_>>(),
        "terms": c.terms.iter().map(|t| json!({
            "rotations": t.rotations,
            "weight": rational(&t.weight),
        })).collect::<Vec<_>>(),
    })
}

pub fn reduced_profile(m: &Market, rp: &ReducedProfile) -> Value {
    json!({
        "firms": m.firms().map(|f| json!({
            "firm": m.firm_name(f),
            "list": rp.firm_list(f).iter().map(|w| m.worker_name(*w)).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "workers": m.workers().map(|w| json!({
            "worker": m.worker_name(w),
            "list": rp.worker_list(w).iter().map(|f| m.firm_name(*f)).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

pub fn counterexample(c: &Counterexample) -> Value {
    json!({
        "kind": format!("{:?}", c.kind),
        "point": matrix(&c.point),
        "detail": c.detail,
    })
}

pub fn verify_report(r: &VerifyReport) -> Value {
    json!({
        "stable_matchings": r.stable_matchings,
        "rotations": r.rotations,
        "positives": r.positives,
        "negatives": r.negatives,
        "candidates_in_hull": r.candidates_in_hull,
        "vertices": r.vertices,
        "fractional_vertices": r.fractional_vertices,
        "counterexamples": r.counterexamples.iter().map(counterexample).collect::<Vec<_>>(),
    })
}

/// Rows of `x` as a right-aligned table.
pub fn matrix_text(m: &Market, x: &FractionalMatching) -> String {
    let cells: Vec<Vec<String>> = x
        .rows()
        .iter()
        .map(|row| row.iter().map(|v| v.to_string()).collect())
        .collect();
    let width = cells
        .iter()
        .flatten()
        .map(String::len)
        .chain(m.worker_names().iter().map(String::len))
        .max()
        .unwrap_or(1);
    let name_width = m.firm_names().iter().map(String::len).max().unwrap_or(1);
    let mut out = format!("{:name_width$}", "");
    for w in m.worker_names() {
        out.push_str(&format!(" {w:>width$}"));
    }
    out.push('\n');
    for (f, row) in m.firm_names().iter().zip(&cells) {
        out.push_str(&format!("{f:name_width$}"));
        for v in row {
            out.push_str(&format!(" {v:>width$}"));
        }
        out.push('\n');
    }
    out
}
