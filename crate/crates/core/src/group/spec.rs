use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::Error;

/// Textual description of a finite group: `A5`, `S4`, `C5`, `D4`, `Q8`,
/// `PSL2(7)`, products such as `C2xC2`, or `table:<path>`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GroupSpec {
    Cyclic(usize),
    Symmetric(usize),
    Alternating(usize),
    Dihedral(usize),
    Quaternion,
    Psl2(u32),
    Table(PathBuf),
    Product(Vec<GroupSpec>),
}

fn parse_index(spec: &str, digits: &str) -> Result<usize, Error> {
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::GroupSpec(spec.to_string()));
    }
    digits
        .parse()
        .map_err(|_| Error::GroupSpec(spec.to_string()))
}

fn parse_factor(spec: &str, s: &str) -> Result<GroupSpec, Error> {
    if s == "Q8" {
        return Ok(GroupSpec::Quaternion);
    }
    if let Some(rest) = s.strip_prefix("PSL2(") {
        let inner = rest
            .strip_suffix(')')
            .ok_or_else(|| Error::GroupSpec(spec.to_string()))?;
        let p = parse_index(spec, inner)?;
        return Ok(GroupSpec::Psl2(p as u32));
    }
    let (head, digits) = s.split_at(s.len().min(1));
    let n = parse_index(spec, digits)?;
    match head {
        "C" if n >= 1 => Ok(GroupSpec::Cyclic(n)),
        "S" if n >= 1 => Ok(GroupSpec::Symmetric(n)),
        "A" if n >= 1 => Ok(GroupSpec::Alternating(n)),
        "D" if n >= 3 => Ok(GroupSpec::Dihedral(n)),
        "C" | "S" | "A" | "D" => Err(Error::Unsupported(format!("{s}: index too small"))),
        _ => Err(Error::GroupSpec(spec.to_string())),
    }
}

impl FromStr for GroupSpec {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self, Error> {
        let s = spec.trim();
        if let Some(path) = s.strip_prefix("table:") {
            if path.is_empty() {
                return Err(Error::GroupSpec(spec.to_string()));
            }
            return Ok(GroupSpec::Table(PathBuf::from(path)));
        }
        let factors = s
            .split('x')
            .map(|f| parse_factor(spec, f.trim()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(match factors.len() {
            1 => factors.into_iter().next().unwrap(),
            _ => GroupSpec::Product(factors),
        })
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::Cyclic(n) => write!(f, "C{n}"),
            GroupSpec::Symmetric(n) => write!(f, "S{n}"),
            GroupSpec::Alternating(n) => write!(f, "A{n}"),
            GroupSpec::Dihedral(n) => write!(f, "D{n}"),
            GroupSpec::Quaternion => write!(f, "Q8"),
            GroupSpec::Psl2(p) => write!(f, "PSL2({p})"),
            GroupSpec::Table(path) => write!(f, "table:{}", path.display()),
            GroupSpec::Product(factors) => {
                for (i, factor) in factors.iter().enumerate() {
                    if i > 0 {
                        f.write_str("x")?;
                    }
                    write!(f, "{factor}")?;
                }
                Ok(())
            }
        }
    }
}
