//! Built-in datasets, the `group,value` two-column format and the flat
//! `simulate` config file.

use std::fs;
use std::path::Path;

use crate::distributions::DistributionSpec;
use crate::simulation::{CriticalSource, SimConfig, DEFAULT_FRESH_PERMS};
use crate::{Error, Result, TwoSample};

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub name: &'static str,
    pub x_label: &'static str,
    pub y_label: &'static str,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub note: &'static str,
}

impl Dataset {
    pub fn sample(&self) -> TwoSample {
        TwoSample::new(self.x.clone(), self.y.clone()).expect("built-in data is valid")
    }
}

pub const DATASETS: [&str; 4] = ["platelet", "hormone", "thyroid", "sleep"];

pub fn builtin_dataset(name: &str) -> Result<Dataset> {
    let d = match name.trim().to_ascii_lowercase().as_str() {
        "platelet" => Dataset {
            name: "platelet",
            x_label: "treated",
            y_label: "control",
            x: vec![120.0, 124.0, 215.0, 90.0, 67.0, 126.0, 95.0, 190.0, 180.0, 135.0, 399.0, 65.0],
            y: vec![12.0, 20.0, 112.0, 32.0, 60.0, 40.0, 18.0],
            note: "platelet counts of newborn infants per cubic millimeter",
        },
        "hormone" => Dataset {
            name: "hormone",
            x_label: "type-a",
            y_label: "type-b",
            x: vec![3.6, 2.6, 4.7, 8.0, 3.1, 8.8, 4.6, 5.8, 4.0, 4.6],
            y: vec![16.2, 17.4, 8.5, 15.6, 5.4, 9.8, 14.9, 16.6, 15.9, 5.3, 10.5],
            note: "peak plasma growth hormone after arginine hydrochloride infusion",
        },
        "thyroid" => Dataset {
            name: "thyroid",
            x_label: "control",
            y_label: "treatment",
            x: vec![0.7, 1.2, 1.4, 2.3, 1.6, 0.9, 1.3],
            y: vec![4.1, 4.4, 3.3, 2.1, 3.5, 2.9, 2.8, 4.3],
            note: "juvenile mouse weight gain in grams, thyroxine vs control",
        },
        "sleep" => Dataset {
            name: "sleep",
            x_label: "dose-1",
            y_label: "dose-2",
            x: vec![0.7, -1.6, -0.2, -1.2, -1.0, 3.4, 3.7, 0.8, 0.0, 2.0],
            y: vec![1.9, 0.8, 1.1, 0.1, -0.1, 4.4, 5.5, 1.6, 4.6, 3.4],
            note: "extra hours of sleep under two soporific doses (Student, 1908)",
        },
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown dataset `{other}`, expected one of {}",
                DATASETS.join(", ")
            )))
        }
    };
    Ok(d)
}

/// A sample read from a two-column file, with its group labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Labeled {
    pub x_label: String,
    pub y_label: String,
    pub sample: TwoSample,
}

pub fn load_two_column(path: &Path, x_label: Option<&str>) -> Result<Labeled> {
    let text = fs::read_to_string(path)?;
    parse_two_column(&text, &path.display().to_string(), x_label)
}

/// Parses `group,value` lines. A leading `group,value` header, blank lines and
/// `#` comments are skipped. The first label seen is `X` unless `x_label`
/// names the other one.
pub fn parse_two_column(text: &str, source: &str, x_label: Option<&str>) -> Result<Labeled> {
    let err = |line: usize, message: String| Error::Parse {
        path: source.to_string(),
        line,
        message,
    };
    let mut groups: Vec<(String, Vec<f64>)> = Vec::new();
    let mut last_line = 0;
    let mut seen_content = false;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let first = !seen_content;
        seen_content = true;
        let Some((label, value)) = line.split_once(',') else {
            return Err(err(line_no, format!("expected `group,value`, got `{line}`")));
        };
        let (label, value) = (label.trim(), value.trim());
        if first && label.eq_ignore_ascii_case("group") && value.eq_ignore_ascii_case("value") {
            continue;
        }
        if label.is_empty() {
            return Err(err(line_no, "empty group label".into()));
        }
        let v: f64 = value
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| err(line_no, format!("`{value}` is not a finite number")))?;
        match groups.iter().position(|(l, _)| l == label) {
            Some(k) => groups[k].1.push(v),
            None if groups.len() == 2 => {
                return Err(err(
                    line_no,
                    format!(
                        "third group label `{label}`; the file already has `{}` and `{}`",
                        groups[0].0, groups[1].0
                    ),
                ))
            }
            None => groups.push((label.to_string(), vec![v])),
        }
    }
    if groups.len() < 2 {
        return Err(err(
            last_line,
            format!("expected exactly two groups, found {}", groups.len()),
        ));
    }
    if let Some(want) = x_label {
        match groups.iter().position(|(l, _)| l == want) {
            Some(0) => {}
            Some(_) => groups.swap(0, 1),
            None => {
                return Err(err(
                    last_line,
                    format!("x label `{want}` is not one of `{}`, `{}`", groups[0].0, groups[1].0),
                ))
            }
        }
    }
    for (label, values) in &groups {
        if values.len() < TwoSample::MIN_SIZE {
            return Err(err(
                last_line,
                format!(
                    "group `{label}` has {} value(s), at least {} are required",
                    values.len(),
                    TwoSample::MIN_SIZE
                ),
            ));
        }
    }
    let [(x_label, x), (y_label, y)]: [(String, Vec<f64>); 2] = groups.try_into().expect("two groups");
    Ok(Labeled {
        x_label,
        y_label,
        sample: TwoSample::new(x, y)?,
    })
}

pub fn format_two_column(sample: &TwoSample, x_label: &str, y_label: &str) -> String {
    let mut out = String::from("group,value\n");
    for (label, values) in [(x_label, sample.x()), (y_label, sample.y())] {
        for v in values {
            out.push_str(&format!("{label},{v}\n"));
        }
    }
    out
}

pub fn write_two_column(path: &Path, sample: &TwoSample, x_label: &str, y_label: &str) -> Result<()> {
    fs::write(path, format_two_column(sample, x_label, y_label))?;
    Ok(())
}

const CONFIG_KEYS: [&str; 11] = [
    "f_family",
    "f_params",
    "g_family",
    "g_params",
    "m",
    "n",
    "replications",
    "alpha",
    "critical",
    "perms",
    "seed",
];

/// Reads a flat TOML `simulate` config.
///
/// ```toml
/// f_family = "chisq_ls"
/// f_params = [0, 1]
/// g_family = "chisq_ls"
/// g_params = [1, 1]
/// m = 10
/// n = 10
/// replications = 10000
/// alpha = 0.05
/// critical = "permutation_table"   # asymptotic | fresh_permutation | auto | a number
/// perms = 100000                    # fresh_permutation only
/// seed = 1
/// ```
pub fn parse_sim_config(text: &str) -> Result<SimConfig> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config {
        key: "<document>".into(),
        message: e.message().to_string(),
    })?;
    let bad = |key: &str, message: String| Error::Config {
        key: key.into(),
        message,
    };
    if let Some(key) = table.keys().find(|k| !CONFIG_KEYS.contains(&k.as_str())) {
        return Err(bad(key, format!("unknown key, expected one of {}", CONFIG_KEYS.join(", "))));
    }
    let number = |key: &str, v: &toml::Value| match v {
        toml::Value::Integer(i) => Ok(*i as f64),
        toml::Value::Float(f) => Ok(*f),
        other => Err(bad(key, format!("expected a number, got {}", other.type_str()))),
    };
    let count = |key: &str| -> Result<Option<u64>> {
        match table.get(key) {
            None => Ok(None),
            Some(toml::Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(other) => Err(bad(key, format!("expected a nonnegative integer, got {other}"))),
        }
    };
    let family = |prefix: &str| -> Result<DistributionSpec> {
        let fkey = format!("{prefix}_family");
        let pkey = format!("{prefix}_params");
        let name = match table.get(&fkey) {
            Some(toml::Value::String(s)) => s.clone(),
            Some(other) => return Err(bad(&fkey, format!("expected a string, got {}", other.type_str()))),
            None => return Err(bad(&fkey, "missing required key".into())),
        };
        let params = match table.get(&pkey) {
            None => Vec::new(),
            Some(toml::Value::Array(items)) => items
                .iter()
                .map(|v| number(&pkey, v))
                .collect::<Result<Vec<f64>>>()?,
            Some(other) => return Err(bad(&pkey, format!("expected an array, got {}", other.type_str()))),
        };
        DistributionSpec::from_family(&name, &params).map_err(|e| bad(&pkey, e.to_string()))
    };
    let required = |key: &str| count(key)?.ok_or_else(|| bad(key, "missing required key".into()));

    let mut cfg = SimConfig::new(family("f")?, family("g")?, required("m")? as usize, required("n")? as usize);
    if let Some(r) = count("replications")? {
        cfg.replications = r as usize;
    }
    if let Some(v) = table.get("alpha") {
        cfg.alpha = number("alpha", v)?;
    }
    if let Some(s) = count("seed")? {
        cfg.seed = s;
    }
    let perms = count("perms")?.map(|p| p as usize);
    cfg.critical = match table.get("critical") {
        None => CriticalSource::Auto,
        Some(toml::Value::String(s)) => match s.as_str() {
            "permutation_table" => CriticalSource::PermutationTable,
            "asymptotic" => CriticalSource::Asymptotic,
            "auto" => CriticalSource::Auto,
            "fresh_permutation" => CriticalSource::FreshPermutation {
                perms: perms.unwrap_or(DEFAULT_FRESH_PERMS),
            },
            other => {
                return Err(bad(
                    "critical",
                    format!("unknown source `{other}`, expected permutation_table, asymptotic, fresh_permutation, auto or a number"),
                ))
            }
        },
        Some(v) => CriticalSource::Fixed(number("critical", v)?),
    };
    if perms.is_some() && !matches!(cfg.critical, CriticalSource::FreshPermutation { .. }) {
        return Err(bad("perms", "only meaningful with critical = \"fresh_permutation\"".into()));
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_sim_config(path: &Path) -> Result<SimConfig> {
    parse_sim_config(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn datasets() {
        let t = builtin_dataset("thyroid").unwrap();
        assert_eq!(t.x, vec![0.7, 1.2, 1.4, 2.3, 1.6, 0.9, 1.3]);
        assert_eq!((t.x.len(), t.y.len()), (7, 8));
        let s = builtin_dataset("sleep").unwrap();
        assert!(s.x.contains(&-1.6) && s.x.contains(&3.7));
        let p = builtin_dataset("Platelet").unwrap();
        assert!(p.x.contains(&399.0));
        assert_eq!((p.x.len(), p.y.len()), (12, 7));
        let h = builtin_dataset("hormone").unwrap();
        assert_eq!((h.x.len(), h.y.len()), (10, 11));
        let e = builtin_dataset("iris").unwrap_err().to_string();
        assert!(e.contains("platelet") && e.contains("sleep"));
    }

    #[test]
    fn parse_basic_and_override() {
        let text = "group,value\nctl,1\nctl,2\ntrt,3.5\n\n# note\ntrt,4\ntrt,5\n";
        let l = parse_two_column(text, "mem", None).unwrap();
        assert_eq!((l.sample.m(), l.sample.n()), (2, 3));
        assert_eq!(l.x_label, "ctl");
        let l = parse_two_column(text, "mem", Some("trt")).unwrap();
        assert_eq!(l.sample.x(), &[3.5, 4.0, 5.0]);
        assert!(parse_two_column(text, "mem", Some("zzz")).is_err());
    }

    #[test]
    fn parse_errors_name_line() {
        let e = parse_two_column("group,value\na,1\na,NA\nb,2\nb,3\n", "f.csv", None).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e}");
        assert!(e.to_string().starts_with("f.csv:3:"));
        let e = parse_two_column("a,1\na,2\na,3\n", "f", None).unwrap_err();
        assert!(e.to_string().contains("two groups"));
        let e = parse_two_column("a,1\na,2\nb,3\nc,4\n", "f", None).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 4, .. }));
        let e = parse_two_column("a,1\na,2\nb,3\n", "f", None).unwrap_err();
        assert!(e.to_string().contains("`b` has 1"));
        assert!(parse_two_column("a 1\n", "f", None).is_err());
    }

    #[test]
    fn round_trip() {
        let s = TwoSample::new(vec![0.1, 1e-300, -2.5e10], vec![1.0 / 3.0, 7.0]).unwrap();
        let back = parse_two_column(&format_two_column(&s, "a", "b"), "mem", None).unwrap();
        assert_eq!(back.sample, s);
    }

    #[test]
    fn config_parsing() {
        let cfg = parse_sim_config(
            "f_family = \"chisq_ls\"\nf_params = [0, 1]\ng_family = \"chisq_ls\"\ng_params = [1, 1.0]\nm = 10\nn = 10\ncritical = \"permutation_table\"\nseed = 3\n",
        )
        .unwrap();
        assert_eq!(cfg.g_spec, DistributionSpec::ChisqLs { shift: 1.0, scale: 1.0 });
        assert_eq!(cfg.replications, 10_000);
        assert_eq!(cfg.critical, CriticalSource::PermutationTable);

        let base = "f_family = \"normal\"\ng_family = \"normal\"\nm = 10\nn = 10\n";
        let key_of = |extra: &str| match parse_sim_config(&format!("{base}{extra}")) {
            Err(Error::Config { key, .. }) => key,
            other => panic!("expected config error, got {other:?}"),
        };
        assert_eq!(key_of("reps = 5\n"), "reps");
        assert_eq!(key_of("replications = 5\n"), "replications");
        assert_eq!(key_of("alpha = \"x\"\n"), "alpha");
        assert_eq!(key_of("critical = \"table\"\n"), "critical");
        assert_eq!(key_of("perms = 10\n"), "perms");
        assert_eq!(key_of("g_params = [0, -1]\n"), "g_params");
        let cfg = parse_sim_config(&format!("{base}critical = 7.5\n")).unwrap();
        assert_eq!(cfg.critical, CriticalSource::Fixed(7.5));
    }
}
