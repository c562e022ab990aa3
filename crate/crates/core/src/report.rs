//! Test reports: the result object of every procedure, with a plain-text
//! rendering and a JSON form carrying the same fields.

use std::fmt;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::chi2mix::ApproxParams;

/// A named test statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Statistic {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    /// Short identifier, e.g. `zgzc2020`.
    pub test: String,
    /// Long test name.
    pub method: String,
    pub statistic: Statistic,
    pub p_value: f64,
    /// Approximation parameters followed by auxiliary values such as `cpn`.
    #[serde(serialize_with = "ser_named", deserialize_with = "de_named")]
    pub parameters: Vec<(String, f64)>,
    /// How the null distribution was approximated.
    pub estimation_method: String,
    pub approximation: ApproxParams,
    /// Group sizes.
    pub n: Vec<usize>,
    /// Dimension.
    pub p: usize,
    pub null: String,
    pub alternative: String,
    pub data_name: String,
}

impl TestReport {
    pub fn parameter(&self, name: &str) -> Option<f64> {
        self.parameters
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| *v)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

fn ser_named<S: Serializer>(v: &[(String, f64)], s: S) -> Result<S::Ok, S::Error> {
    let mut map = s.serialize_map(Some(v.len()))?;
    for (k, x) in v {
        map.serialize_entry(k, x)?;
    }
    map.end()
}

fn de_named<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<(String, f64)>, D::Error> {
    struct V;
    impl<'de> Visitor<'de> for V {
        type Value = Vec<(String, f64)>;
        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a map of parameter names to numbers")
        }
        fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Self::Value, A::Error> {
            let mut out = Vec::new();
            while let Some((k, v)) = map.next_entry::<String, f64>()? {
                out.push((k, v));
            }
            Ok(out)
        }
    }
    d.deserialize_map(V)
}

/// Mantissa/exponent notation with a signed two-digit exponent, e.g.
/// `2.965057e+10`.
pub fn format_sci(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{v:.digits$e}");
    let (mant, exp) = s.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mant}e{sign}{:02}", exp.abs())
}

/// Four decimals for O(1) magnitudes, scientific notation otherwise.
pub fn format_value(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        "0".to_string()
    } else if (1e-3..1e4).contains(&a) {
        format!("{v:.4}")
    } else {
        format_sci(v, 6)
    }
}

/// Seven significant digits, fixed or scientific as appropriate.
pub fn format_pvalue(p: f64) -> String {
    if p == 0.0 || p == 1.0 {
        return format!("{p}");
    }
    if p.abs() < 1e-4 {
        return format_sci(p, 6);
    }
    let decimals = (6 - p.abs().log10().floor() as i32).max(0) as usize;
    let s = format!("{p:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn display_name(key: &str) -> &str {
    match key {
        "cpn" => "Adjustment coefficient",
        other => other,
    }
}

const LABEL_WIDTH: usize = 33;

fn write_field(f: &mut fmt::Formatter<'_>, label: &str, lines: &[String]) -> fmt::Result {
    for (i, line) in lines.iter().enumerate() {
        let head = if i == 0 { label } else { "" };
        writeln!(f, "{head:<LABEL_WIDTH$}{line}")?;
    }
    writeln!(f)
}

impl fmt::Display for TestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f)?;
        writeln!(f, "Results of Hypothesis Test")?;
        writeln!(f, "--------------------------")?;
        writeln!(f)?;
        write_field(f, "Test name:", std::slice::from_ref(&self.method))?;
        write_field(f, "Null Hypothesis:", std::slice::from_ref(&self.null))?;
        write_field(f, "Alternative Hypothesis:", std::slice::from_ref(&self.alternative))?;
        write_field(f, "Data:", std::slice::from_ref(&self.data_name))?;
        let sizes: Vec<String> = self
            .n
            .iter()
            .enumerate()
            .map(|(i, n)| format!("n{} = {}", i + 1, n))
            .collect();
        write_field(f, "Sample Sizes:", &sizes)?;
        write_field(f, "Sample Dimension:", &[self.p.to_string()])?;
        write_field(
            f,
            "Test Statistic:",
            &[format!("{} = {}", self.statistic.name, format_value(self.statistic.value))],
        )?;
        writeln!(f, "{:<LABEL_WIDTH$}{}", "Approximation method to the", self.estimation_method)?;
        writeln!(f, "null distribution of {}: ", self.statistic.name)?;
        writeln!(f)?;
        if !self.parameters.is_empty() {
            let names: Vec<&str> = self.parameters.iter().map(|(k, _)| display_name(k)).collect();
            let values: Vec<String> = self.parameters.iter().map(|(_, v)| format_value(*v)).collect();
            let wn = names.iter().map(|s| s.len()).max().unwrap_or(0);
            let wv = values.iter().map(String::len).max().unwrap_or(0);
            let lines: Vec<String> = names
                .iter()
                .zip(&values)
                .map(|(k, v)| format!("{k:<wn$} = {v:>wv$}"))
                .collect();
            write_field(f, "Approximation parameter(s):", &lines)?;
        }
        writeln!(f, "{:<LABEL_WIDTH$}{}", "P-value:", format_pvalue(self.p_value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> TestReport {
        TestReport {
            test: "zgzc2020".into(),
            method: "example test".into(),
            statistic: Statistic {
                name: "T[ZGZC]".into(),
                value: 228_972_526_332.0,
            },
            p_value: 0.037_712_77,
            parameters: vec![("df".into(), 2.6054), ("beta".into(), 2.965057e10)],
            estimation_method: "2-c matched chi^2-approximation".into(),
            approximation: ApproxParams::Ws {
                beta: 2.965057e10,
                df: 2.6054,
            },
            n: vec![24, 62],
            p: 20460,
            null: "Difference between two mean vectors is 0".into(),
            alternative: "Difference between two mean vectors is not 0".into(),
            data_name: "a and b".into(),
        }
    }

    #[test]
    fn formatting() {
        assert_eq!(format_sci(2.965057e10, 6), "2.965057e+10");
        assert_eq!(format_sci(1.416134e-8, 6), "1.416134e-08");
        assert_eq!(format_value(2.6054), "2.6054");
        assert_eq!(format_value(-6.36352e10), "-6.363520e+10");
        assert_eq!(format_pvalue(0.03771277), "0.03771277");
        assert_eq!(format_pvalue(0.0002577084), "0.0002577084");
        assert_eq!(format_pvalue(1.416134e-08), "1.416134e-08");
        assert_eq!(format_pvalue(0.7353797), "0.7353797");
        assert_eq!(format_pvalue(1.0), "1");
    }

    #[test]
    fn text_layout() {
        let text = sample().to_string();
        assert!(text.contains("Results of Hypothesis Test"));
        assert!(text.contains("Test Statistic:                  T[ZGZC] = 2.289725e+11"));
        assert!(text.contains("Approximation parameter(s):      df   =       2.6054\n"));
        assert!(text.contains("                                 beta = 2.965057e+10\n"));
        assert!(text.contains("Sample Sizes:                    n1 = 24\n                                 n2 = 62"));
        assert!(text.trim_end().ends_with("P-value:                         0.03771277"));
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        let json = r.to_json();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["statistic"]["name"], "T[ZGZC]");
        assert_eq!(v["parameters"]["df"], 2.6054);
        assert_eq!(TestReport::from_json(&json).unwrap(), r);
    }
}
