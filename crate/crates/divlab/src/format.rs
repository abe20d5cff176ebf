//! Plain-text family files.
//!
//! ```text
//! # Fano plane
//! n=7 k=3
//! 1,2,4
//! 2,3,5
//! ```
//!
//! The header gives the ground size and the uniformity (`-` when absent).
//! Each further line is one set with ascending, comma-separated elements;
//! `{}` stands for the empty set. Blank lines and `#` comments are skipped.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use divlab_core::Family;

pub fn write_family<W: Write>(fam: &Family, mut out: W) -> Result<()> {
    out.write_all(to_text(fam).as_bytes())?;
    Ok(())
}

pub fn to_text(fam: &Family) -> String {
    let mut s = String::new();
    let k = fam.k().map_or_else(|| "-".to_string(), |k| k.to_string());
    let _ = writeln!(s, "n={} k={}", fam.n(), k);
    for set in fam.members() {
        if set.is_empty() {
            s.push_str("{}\n");
            continue;
        }
        let line: Vec<String> = set.elements().map(|e| e.to_string()).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

pub fn save(fam: &Family, path: &Path) -> Result<()> {
    std::fs::write(path, to_text(fam)).with_context(|| format!("writing {}", path.display()))
}

pub fn load(path: &Path) -> Result<Family> {
    let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_family(std::io::BufReader::new(file)).with_context(|| format!("parsing {}", path.display()))
}

pub fn read_family<R: BufRead>(input: R) -> Result<Family> {
    let mut header: Option<(usize, Option<usize>)> = None;
    let mut sets: Vec<Vec<usize>> = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        match header {
            None => header = Some(parse_header(content).with_context(|| format!("line {}", lineno + 1))?),
            Some(_) => sets.push(parse_set(content).with_context(|| format!("line {}", lineno + 1))?),
        }
    }
    let (n, k) = header.ok_or_else(|| anyhow!("missing `n=<n> k=<k|->` header"))?;
    Ok(Family::from_sets(n, k, &sets)?)
}

pub fn parse_family(text: &str) -> Result<Family> {
    read_family(text.as_bytes())
}

fn parse_header(line: &str) -> Result<(usize, Option<usize>)> {
    let mut n = None;
    let mut k = None;
    for field in line.split_whitespace() {
        match field.split_once('=') {
            Some(("n", v)) => n = Some(v.parse::<usize>().context("bad n")?),
            Some(("k", "-")) => k = Some(None),
            Some(("k", v)) => k = Some(Some(v.parse::<usize>().context("bad k")?)),
            _ => bail!("unexpected header field `{field}`"),
        }
    }
    match (n, k) {
        (Some(n), Some(k)) => Ok((n, k)),
        _ => bail!("header must read `n=<n> k=<k|->`"),
    }
}

fn parse_set(line: &str) -> Result<Vec<usize>> {
    if line == "{}" {
        return Ok(Vec::new());
    }
    let elements = line
        .split(',')
        .map(|t| t.trim().parse::<usize>().with_context(|| format!("bad element `{}`", t.trim())))
        .collect::<Result<Vec<_>>>()?;
    if elements.windows(2).any(|w| w[0] >= w[1]) {
        bail!("elements must be strictly ascending");
    }
    Ok(elements)
}

#[cfg(test)]
mod tests {
    use super::*;
    use divlab_core::constructions::fano_plane;

    #[test]
    fn fano_round_trip() {
        let f = fano_plane();
        let text = to_text(&f);
        assert!(text.starts_with("n=7 k=3\n"));
        assert_eq!(parse_family(&text).unwrap(), f);
    }

    #[test]
    fn comments_blanks_and_empty_set() {
        let text = "# header next\n\nn=4 k=-\n{}\n1,3  # trailing\n\n2\n";
        let f = parse_family(text).unwrap();
        assert_eq!(f.len(), 3);
        assert_eq!(f.k(), None);
        assert_eq!(parse_family(&to_text(&f)).unwrap(), f);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_family("1,2\n").is_err());
        assert!(parse_family("n=4 k=2\n2,1\n").is_err());
        assert!(parse_family("n=4 k=2\n1,5\n").is_err());
        assert!(parse_family("n=4 k=2\n1,2,3\n").is_err());
        assert!(parse_family("n=4\n").is_err());
        assert!(parse_family("").is_err());
    }
}
