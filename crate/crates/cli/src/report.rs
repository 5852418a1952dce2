//! Machine-readable command reports.

use serde::{Deserialize, Serialize};

use crate::problem::{Kind, FORMAT_VERSION};

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// Smallest 12-significant-digit number not below `x`.
pub fn round12_up(x: f64) -> f64 {
    if !x.is_finite() || x <= 0.0 {
        return x.max(0.0);
    }
    let mut y = x;
    loop {
        let r = round12(y);
        if r >= x {
            return r;
        }
        y += x * 5e-12;
    }
}

pub fn round_all(v: &[f64]) -> Vec<f64> {
    v.iter().copied().map(round12).collect()
}

/// Rewrites very small or very large float literals of a TOML document in
/// exponent form; values are unchanged.
pub(crate) fn compact_floats(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut in_string = false;
    let mut escaped = false;
    let mut token = String::new();
    let flush = |token: &mut String, out: &mut String| {
        if token.contains('.') {
            if let Ok(v) = token.parse::<f64>() {
                let a = v.abs();
                if a != 0.0 && !(1e-4..1e15).contains(&a) {
                    out.push_str(&format!("{v:e}"));
                    token.clear();
                    return;
                }
            }
        }
        out.push_str(token);
        token.clear();
    };
    for c in text.chars() {
        if in_string {
            out.push(c);
            match (escaped, c) {
                (true, _) => escaped = false,
                (false, '\\') => escaped = true,
                (false, '"') => in_string = false,
                _ => {}
            }
            continue;
        }
        let continues = !token.is_empty() && matches!(c, '.' | '-' | '+' | 'e' | 'E' | '_');
        if c.is_ascii_digit() || continues || (c == '-' && token.is_empty()) {
            token.push(c);
            continue;
        }
        flush(&mut token, &mut out);
        if c == '"' {
            in_string = true;
        }
        out.push(c);
    }
    flush(&mut token, &mut out);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub format: u32,
    pub command: String,
    pub kind: Kind,
    /// Norm exponents the command ran with.
    pub p: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure: Option<StructureSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<RateSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub solutions: Vec<SolutionSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub verifications: Vec<VerifySection>,
}

impl Report {
    pub fn new(command: &str, kind: Kind, p: Vec<f64>) -> Self {
        Self {
            format: FORMAT_VERSION,
            command: command.to_string(),
            kind,
            p,
            warnings: Vec::new(),
            structure: None,
            search: None,
            rate: None,
            solutions: Vec::new(),
            verifications: Vec::new(),
        }
    }

    pub fn to_toml(&self) -> String {
        compact_floats(&toml::to_string(self).expect("reports always serialize"))
    }

    /// Whether any verification in the report failed.
    pub fn verification_failed(&self) -> bool {
        self.verifications.iter().any(|v| !v.passed)
    }
}

/// Structural verdicts; an absent verdict was skipped (see `skipped`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weakly_irreducible: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub irreducible: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weakly_primitive: Option<bool>,
    /// Primitivity of the di-graph of the map the solver iterates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map_primitive: Option<bool>,
    /// Cyclicity of a strongly connected but periodic di-graph.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map_cyclicity: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monotone: Option<bool>,
    /// 0-based witnesses of failed verdicts, e.g. `irreducible: [0, 3]`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionSection {
    /// Solution of the system: unit-norm blocks (tensor) or `||x||_p = a`.
    pub x: Vec<f64>,
    pub block_sizes: Vec<usize>,
    pub lambda: f64,
    pub mu: f64,
    /// Eigenvector of `F` with `psi^T u = 1`.
    pub u: Vec<f64>,
    /// Largest system residual or norm deviation at the printed `x` and
    /// `lambda`, rounded up.
    pub residual: f64,
    /// `||F(u) - mu u||_inf / ||F(u)||_inf`.
    pub fixed_point_residual: f64,
    pub route: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attracting: Option<bool>,
    /// Starts that reached this solution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hits: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cw: Option<CwSection>,
}

/// Collatz-Wielandt bracket summary of a power run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CwSection {
    pub first: [f64; 2],
    pub last: [f64; 2],
    pub relative_width: f64,
    /// Every recorded bracket contains the final `mu`.
    pub contains_mu: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSection {
    pub starts: usize,
    pub seed: u64,
    pub damping: f64,
    pub distinct: usize,
    pub damped_converged: usize,
    pub newton_converged: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSection {
    pub lambda_m: f64,
    pub second_modulus: f64,
    pub rate: f64,
    pub empirical_rate: f64,
    pub ratios_used: usize,
    pub within_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySection {
    pub candidate: usize,
    pub residual: f64,
    pub norm_deviation: f64,
    pub lambda: f64,
    pub tol: f64,
    pub passed: bool,
}

/// A candidate to verify: a report's solutions, or a bare `x`.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
pub struct CandidateFile {
    #[serde(default)]
    pub solutions: Vec<Candidate>,
    #[serde(default)]
    pub x: Option<Vec<f64>>,
    #[serde(default)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Candidate {
    pub x: Vec<f64>,
    #[serde(default)]
    pub lambda: Option<f64>,
    /// Tolerance to verify at when no `--tol` is given.
    #[serde(default)]
    pub residual: Option<f64>,
}

impl CandidateFile {
    pub fn candidates(self) -> Vec<Candidate> {
        let mut out = self.solutions;
        if let Some(x) = self.x {
            out.push(Candidate {
                x,
                lambda: self.lambda,
                residual: None,
            });
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round12(1.0 / 3.0), 0.333333333333);
        assert_eq!(round12(0.0), 0.0);
        let x = 1.23456789012345e-7;
        assert!(round12_up(x) >= x);
        assert_eq!(round12_up(x), 1.23456789013e-7);
        assert_eq!(round12_up(0.0), 0.0);
    }

    #[test]
    fn compact_floats_keeps_values() {
        let src = "a = 0.0000000000679409861704\nb = [1.5, 0.00001, -0.0000002]\nc = \"0.0000001 x\"\nd = 12\n";
        let out = compact_floats(src);
        assert_eq!(
            out,
            "a = 6.79409861704e-11\nb = [1.5, 1e-5, -2e-7]\nc = \"0.0000001 x\"\nd = 12\n"
        );
        let v: toml::Table = toml::from_str(&out).unwrap();
        assert_eq!(v["a"].as_float(), Some(6.79409861704e-11));
    }
}
