//! Output records and their CSV/JSON rendering.
//!
//! Records are flat so the same struct serves both formats. Floats use the
//! shortest round-trip representation, so output is byte-stable.

use serde::Serialize;

use crate::config::Format;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Force or force integrand. Column order is fixed: kappa, Fx, Fy, Fz,
/// error_estimate, L_max, mode, then metadata.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForceRecord {
    /// μm⁻¹; empty for an integrated force.
    pub kappa: Option<f64>,
    #[serde(rename = "Fx")]
    pub fx: f64,
    #[serde(rename = "Fy")]
    pub fy: f64,
    #[serde(rename = "Fz")]
    pub fz: f64,
    pub error_estimate: Option<f64>,
    #[serde(rename = "L_max")]
    pub lmax: usize,
    pub mode: String,
    pub target: usize,
    /// Kelvin.
    pub temperature: f64,
    pub unit: &'static str,
    pub evaluations: Option<usize>,
    pub config_hash: String,
    pub version: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRecord {
    #[serde(rename = "L_max")]
    pub lmax: usize,
    pub mode: String,
    #[serde(rename = "Fx")]
    pub fx: f64,
    #[serde(rename = "Fy")]
    pub fy: f64,
    #[serde(rename = "Fz")]
    pub fz: f64,
    /// Norm of the change from the previous L_max in the same mode.
    pub difference: Option<f64>,
    pub target: usize,
    pub temperature: f64,
    pub unit: &'static str,
    pub config_hash: String,
    pub version: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopRecord {
    pub rank: usize,
    /// Sphere indices joined by `-`, e.g. `0-1-0`.
    pub sequence: String,
    pub hop_count: usize,
    /// μm.
    pub total_length: f64,
    pub winding: usize,
    pub weight: f64,
    pub kappa: f64,
    pub target: usize,
    pub config_hash: String,
    pub version: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Report {
    Force(Vec<ForceRecord>),
    Spectrum(Vec<ForceRecord>),
    Convergence(Vec<ConvergenceRecord>),
    Loops(Vec<LoopRecord>),
}

#[derive(Serialize)]
struct Document<'a, T> {
    command: &'static str,
    records: &'a [T],
}

impl Report {
    pub fn command(&self) -> &'static str {
        match self {
            Report::Force(_) => "force",
            Report::Spectrum(_) => "spectrum",
            Report::Convergence(_) => "convergence",
            Report::Loops(_) => "loops",
        }
    }

    pub fn render(&self, format: Format) -> String {
        match self {
            Report::Force(r) | Report::Spectrum(r) => render(self.command(), r, format),
            Report::Convergence(r) => render(self.command(), r, format),
            Report::Loops(r) => render(self.command(), r, format),
        }
    }
}

fn render<T: Serialize>(command: &'static str, records: &[T], format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&Document { command, records }).expect("records serialize");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in records {
                w.serialize(r).expect("records serialize");
            }
            let bytes = w.into_inner().expect("in-memory writer");
            String::from_utf8(bytes).expect("csv output is utf-8")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record() -> ForceRecord {
        ForceRecord {
            kappa: None,
            fx: 0.0,
            fy: -0.0,
            fz: -1.25e-7,
            error_estimate: Some(3e-14),
            lmax: 4,
            mode: "closed".into(),
            target: 0,
            temperature: 0.0,
            unit: "hbar_c/um^2",
            evaluations: Some(45),
            config_hash: "ab".into(),
            version: VERSION,
        }
    }

    #[test]
    fn csv_header_order() {
        let out = Report::Force(vec![record()]).render(Format::Csv);
        let mut lines = out.lines();
        assert_eq!(
            lines.next().unwrap(),
            "kappa,Fx,Fy,Fz,error_estimate,L_max,mode,target,temperature,unit,evaluations,config_hash,version"
        );
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[0], "");
        assert_eq!(row[3].parse::<f64>().unwrap(), -1.25e-7);
        assert_eq!(row[6], "closed");
    }

    #[test]
    fn json_document() {
        let out = Report::Force(vec![record()]).render(Format::Json);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["command"], "force");
        assert_eq!(v["records"][0]["Fz"], -1.25e-7);
        assert_eq!(v["records"][0]["version"], VERSION);
        assert!(v["records"][0]["kappa"].is_null());
    }

    #[test]
    fn empty_csv_is_empty() {
        assert_eq!(Report::Loops(vec![]).render(Format::Csv), "");
    }
}
