//! Manifest files: sectioned key-value text describing a chart, a metric,
//! a Reeb field (or its dual 1-form), sampling controls, and an optional
//! orbit. Parse errors carry line numbers.
//!
//! ```text
//! [chart]
//! coords = x,y,z
//! domain = -1..1, -1..1, -1..1
//! [metric]
//! g11 = "1 + y^2"
//! g13 = "-y"
//! g22 = "1"
//! g33 = "1"
//! [structure]
//! xi = "0","0","1"
//! orientation = +1
//! [sampling]
//! grid = 5
//! tol = 1e-8
//! exclude = -0.2..0.2, -0.2..0.2, -1..1
//! [orbit]
//! x0 = 0.1, 0.2, 0.3
//! t = 0..1.5
//! steps = 300
//! ```
//!
//! Off-diagonal metric components default to 0; `#` starts a comment;
//! sections may appear in any order. Exactly one of `xi` / `eta` must be
//! present.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use crate::expr::{parse_expression, Expr, Params};
use crate::frame::ReebSpec;
use crate::grid::DomainBox;

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("cannot read {0}: {1}")]
    Io(String, std::io::Error),
    #[error("line {0}: {1}")]
    Parse(usize, String),
    #[error("line {0}: expression error in `{1}`: {2}")]
    Expression(usize, String, String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone)]
pub struct OrbitSection {
    pub x0: [f64; 3],
    pub t_end: f64,
    pub steps: Option<usize>,
}

/// A fully compiled manifest.
#[derive(Debug, Clone)]
pub struct Manifest {
    pub name: String,
    pub digest: String,
    pub coords: [String; 3],
    pub domain: DomainBox,
    pub params: Params,
    pub metric: [Expr; 6],
    pub reeb: ReebSpec,
    pub orientation: i8,
    pub grid_n: usize,
    pub tol: f64,
    pub excluded: Vec<DomainBox>,
    pub orbit: Option<OrbitSection>,
}

pub fn load_manifest(path: &Path) -> Result<Manifest, ManifestError> {
    let bytes = std::fs::read(path)
        .map_err(|e| ManifestError::Io(path.display().to_string(), e))?;
    let text = String::from_utf8_lossy(&bytes);
    let name = path
        .file_name()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_default();
    parse_manifest(&text, &name, &digest_hex(&bytes))
}

pub fn digest_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let out = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for b in out {
        hex.push_str(&format!("{:02x}", b));
    }
    hex
}

struct Entry {
    line: usize,
    value: String,
}

pub fn parse_manifest(text: &str, name: &str, digest: &str) -> Result<Manifest, ManifestError> {
    // section -> key -> entries (exclude is repeatable)
    let mut sections: BTreeMap<String, BTreeMap<String, Vec<Entry>>> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw.find('#') {
            Some(cut) => &raw[..cut],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(stripped) = line.strip_prefix('[') {
            let sect = stripped
                .strip_suffix(']')
                .ok_or_else(|| ManifestError::Parse(lineno, "unterminated section header".into()))?
                .trim()
                .to_string();
            current = Some(sect.clone());
            sections.entry(sect).or_default();
            continue;
        }
        let sect = current
            .clone()
            .ok_or_else(|| ManifestError::Parse(lineno, "key outside any [section]".into()))?;
        let (key, value) = line.split_once('=').ok_or_else(|| {
            ManifestError::Parse(lineno, format!("expected `key = value`, got `{line}`"))
        })?;
        sections
            .get_mut(&sect)
            .unwrap()
            .entry(key.trim().to_string())
            .or_default()
            .push(Entry {
                line: lineno,
                value: value.trim().to_string(),
            });
    }

    for sect in sections.keys() {
        if !["chart", "params", "metric", "structure", "sampling", "orbit"].contains(&sect.as_str())
        {
            return Err(ManifestError::Invalid(format!("unknown section [{sect}]")));
        }
    }

    let single = |sect: &str, key: &str| -> Result<Option<(usize, String)>, ManifestError> {
        match sections.get(sect).and_then(|s| s.get(key)) {
            None => Ok(None),
            Some(entries) if entries.len() == 1 => {
                Ok(Some((entries[0].line, entries[0].value.clone())))
            }
            Some(entries) => Err(ManifestError::Parse(
                entries[1].line,
                format!("duplicate key `{key}` in [{sect}]"),
            )),
        }
    };
    let required = |sect: &str, key: &str| -> Result<(usize, String), ManifestError> {
        single(sect, key)?.ok_or_else(|| {
            ManifestError::Invalid(format!("missing `{key}` in [{sect}] section"))
        })
    };

    // chart
    let (cline, coords_str) = required("chart", "coords")?;
    let coord_names: Vec<String> = coords_str.split(',').map(|s| s.trim().to_string()).collect();
    if coord_names.len() != 3 || coord_names.iter().any(|c| c.is_empty()) {
        return Err(ManifestError::Parse(cline, "coords needs three names".into()));
    }
    let coords: [String; 3] = [
        coord_names[0].clone(),
        coord_names[1].clone(),
        coord_names[2].clone(),
    ];
    let (dline, domain_str) = required("chart", "domain")?;
    let domain = parse_box(&domain_str).map_err(|e| ManifestError::Parse(dline, e))?;
    if domain.is_degenerate() {
        return Err(ManifestError::Parse(dline, "domain box is degenerate".into()));
    }

    // params
    let mut params = Params::new();
    let mut param_names: Vec<String> = Vec::new();
    if let Some(sect) = sections.get("params") {
        for (key, entries) in sect {
            let e = &entries[0];
            if entries.len() > 1 {
                return Err(ManifestError::Parse(
                    entries[1].line,
                    format!("duplicate parameter `{key}`"),
                ));
            }
            let v: f64 = e.value.parse().map_err(|_| {
                ManifestError::Parse(e.line, format!("parameter `{key}` is not a number"))
            })?;
            params.insert(Arc::from(key.as_str()), v);
            param_names.push(key.clone());
        }
    }
    let reserved = ["sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh", "tanh"];
    for n in coord_names.iter().chain(param_names.iter()) {
        if reserved.contains(&n.as_str()) {
            return Err(ManifestError::Invalid(format!(
                "name `{n}` collides with a built-in function"
            )));
        }
    }

    let coord_refs: Vec<&str> = coords.iter().map(|s| s.as_str()).collect();
    let param_refs: Vec<&str> = param_names.iter().map(|s| s.as_str()).collect();
    let compile = |line: usize, src: &str| -> Result<Expr, ManifestError> {
        let unquoted = unquote(src)
            .ok_or_else(|| ManifestError::Parse(line, format!("expected quoted expression, got `{src}`")))?;
        parse_expression(&unquoted, &coord_refs, &param_refs)
            .map_err(|e| ManifestError::Expression(line, unquoted.clone(), e.message()))
    };

    // metric
    let mut metric: [Expr; 6] = Default::default();
    let keys = ["g11", "g12", "g13", "g22", "g23", "g33"];
    let diagonal = ["g11", "g22", "g33"];
    for (i, key) in keys.iter().enumerate() {
        match single("metric", key)? {
            Some((line, v)) => metric[i] = compile(line, &v)?,
            None if diagonal.contains(key) => {
                return Err(ManifestError::Invalid(format!(
                    "missing diagonal metric component `{key}`"
                )))
            }
            None => metric[i] = Expr::zero(),
        }
    }
    if let Some(sect) = sections.get("metric") {
        for (key, entries) in sect {
            if !keys.contains(&key.as_str()) {
                return Err(ManifestError::Parse(
                    entries[0].line,
                    format!("unknown metric key `{key}` (use g11..g33, upper triangle)"),
                ));
            }
        }
    }

    // structure
    let xi = single("structure", "xi")?;
    let eta = single("structure", "eta")?;
    let reeb = match (xi, eta) {
        (Some((line, v)), None) => ReebSpec::Xi(parse_triple_exprs(&v, line, &compile)?),
        (None, Some((line, v))) => ReebSpec::Eta(parse_triple_exprs(&v, line, &compile)?),
        (Some(_), Some((line, _))) => {
            return Err(ManifestError::Parse(
                line,
                "give either `xi` or `eta`, not both".into(),
            ))
        }
        (None, None) => {
            return Err(ManifestError::Invalid(
                "missing `xi` or `eta` in [structure] section".into(),
            ))
        }
    };
    let orientation = match single("structure", "orientation")? {
        None => 1,
        Some((line, v)) => match v.as_str() {
            "+1" | "1" => 1,
            "-1" => -1,
            other => {
                return Err(ManifestError::Parse(
                    line,
                    format!("orientation must be +1 or -1, got `{other}`"),
                ))
            }
        },
    };

    // sampling
    let grid_n = match single("sampling", "grid")? {
        None => 5,
        Some((line, v)) => {
            let n: usize = v
                .parse()
                .map_err(|_| ManifestError::Parse(line, "grid must be an integer".into()))?;
            if n < 2 {
                return Err(ManifestError::Parse(line, "grid must be >= 2 per axis".into()));
            }
            n
        }
    };
    let tol = match single("sampling", "tol")? {
        None => 1e-8,
        Some((line, v)) => {
            let t: f64 = v
                .parse()
                .map_err(|_| ManifestError::Parse(line, "tol must be a number".into()))?;
            if !(t > 0.0) {
                return Err(ManifestError::Parse(line, "tol must be positive".into()));
            }
            t
        }
    };
    let mut excluded = Vec::new();
    if let Some(entries) = sections.get("sampling").and_then(|s| s.get("exclude")) {
        for e in entries {
            excluded.push(parse_box(&e.value).map_err(|m| ManifestError::Parse(e.line, m))?);
        }
    }

    // orbit
    let orbit = if sections.contains_key("orbit") {
        let (xline, x0_str) = required("orbit", "x0")?;
        let x0 = parse_triple_numbers(&x0_str).map_err(|m| ManifestError::Parse(xline, m))?;
        let (tline, t_str) = required("orbit", "t")?;
        let (t0, t1) = parse_range(&t_str).map_err(|m| ManifestError::Parse(tline, m))?;
        if t0 != 0.0 {
            return Err(ManifestError::Parse(tline, "orbit time must start at 0".into()));
        }
        let steps = match single("orbit", "steps")? {
            None => None,
            Some((line, v)) => Some(v.parse().map_err(|_| {
                ManifestError::Parse(line, "steps must be a positive integer".into())
            })?),
        };
        Some(OrbitSection { x0, t_end: t1, steps })
    } else {
        None
    };

    Ok(Manifest {
        name: name.to_string(),
        digest: digest.to_string(),
        coords,
        domain,
        params,
        metric,
        reeb,
        orientation,
        grid_n,
        tol,
        excluded,
        orbit,
    })
}

fn unquote(s: &str) -> Option<String> {
    let t = s.trim();
    if t.len() >= 2 && t.starts_with('"') && t.ends_with('"') {
        Some(t[1..t.len() - 1].to_string())
    } else {
        None
    }
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected `lo..hi`, got `{s}`"))?;
    let lo: f64 = a.trim().parse().map_err(|_| format!("bad number `{}`", a.trim()))?;
    let hi: f64 = b.trim().parse().map_err(|_| format!("bad number `{}`", b.trim()))?;
    Ok((lo, hi))
}

fn parse_box(s: &str) -> Result<DomainBox, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected three ranges, got `{s}`"));
    }
    let mut lo = [0.0; 3];
    let mut hi = [0.0; 3];
    for (i, p) in parts.iter().enumerate() {
        let (a, b) = parse_range(p)?;
        lo[i] = a;
        hi[i] = b;
    }
    Ok(DomainBox::new(lo, hi))
}

fn parse_triple_numbers(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected three numbers, got `{s}`"));
    }
    let mut out = [0.0; 3];
    for (i, p) in parts.iter().enumerate() {
        out[i] = p.trim().parse().map_err(|_| format!("bad number `{}`", p.trim()))?;
    }
    Ok(out)
}

fn parse_triple_exprs(
    s: &str,
    line: usize,
    compile: &dyn Fn(usize, &str) -> Result<Expr, ManifestError>,
) -> Result<[Expr; 3], ManifestError> {
    // split on commas that sit between quoted strings
    let mut parts = Vec::new();
    let mut depth_quote = false;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '"' => {
                depth_quote = !depth_quote;
                cur.push(c);
            }
            ',' if !depth_quote => {
                parts.push(cur.trim().to_string());
                cur = String::new();
            }
            _ => cur.push(c),
        }
    }
    parts.push(cur.trim().to_string());
    if parts.len() != 3 {
        return Err(ManifestError::Parse(
            line,
            format!("expected three quoted components, got {}", parts.len()),
        ));
    }
    let mut out: [Expr; 3] = Default::default();
    for (i, p) in parts.iter().enumerate() {
        out[i] = compile(line, p)?;
    }
    Ok(out)
}
