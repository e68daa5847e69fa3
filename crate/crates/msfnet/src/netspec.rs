//! Network argument grammar: `complete:N`, `ring:N:k`, `er:N:p:seed`,
//! `file:PATH`, or a bare CSV path. Feedback arguments also accept `zero`.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use msfnet_core::design::SweepFamily;
use msfnet_core::graphs::NetworkSpec;

#[derive(Clone, Debug, PartialEq)]
pub enum NetworkArg {
    Generated(NetworkSpec),
    File(PathBuf),
    Zero,
}

fn field<T: FromStr>(parts: &[&str], idx: usize, what: &str, whole: &str) -> Result<T, String> {
    parts
        .get(idx)
        .ok_or_else(|| format!("`{whole}`: missing {what}"))?
        .parse()
        .map_err(|_| format!("`{whole}`: bad {what} `{}`", parts[idx]))
}

impl FromStr for NetworkArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "zero" {
            return Ok(NetworkArg::Zero);
        }
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(NetworkArg::File(PathBuf::from(path)));
        }
        let parts: Vec<&str> = s.split(':').collect();
        let expect_len = |n: usize| {
            if parts.len() == n {
                Ok(())
            } else {
                Err(format!("`{s}`: expected {n} colon-separated fields"))
            }
        };
        let spec = match parts[0] {
            "complete" => {
                expect_len(2)?;
                NetworkSpec::Complete { n: field(&parts, 1, "N", s)? }
            }
            "ring" => {
                expect_len(3)?;
                NetworkSpec::Ring {
                    n: field(&parts, 1, "N", s)?,
                    k: field(&parts, 2, "k", s)?,
                }
            }
            "er" => {
                expect_len(4)?;
                NetworkSpec::ErdosRenyi {
                    n: field(&parts, 1, "N", s)?,
                    p: field(&parts, 2, "p", s)?,
                    seed: field(&parts, 3, "seed", s)?,
                }
            }
            _ if parts.len() == 1 => return Ok(NetworkArg::File(PathBuf::from(s))),
            other => return Err(format!("unknown network kind `{other}`")),
        };
        Ok(NetworkArg::Generated(spec))
    }
}

impl fmt::Display for NetworkArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetworkArg::Generated(NetworkSpec::Complete { n }) => write!(f, "complete:{n}"),
            NetworkArg::Generated(NetworkSpec::Ring { n, k }) => write!(f, "ring:{n}:{k}"),
            NetworkArg::Generated(NetworkSpec::ErdosRenyi { n, p, seed }) => write!(f, "er:{n}:{p}:{seed}"),
            NetworkArg::File(p) => write!(f, "file:{}", p.display()),
            NetworkArg::Zero => write!(f, "zero"),
        }
    }
}

/// `ring:k` or `complete`.
pub fn parse_family(s: &str) -> Result<SweepFamily, String> {
    match s.split(':').collect::<Vec<_>>().as_slice() {
        ["complete"] => Ok(SweepFamily::Complete),
        ["ring", k] => k
            .parse()
            .map(|k| SweepFamily::Ring { k })
            .map_err(|_| format!("`{s}`: bad ring degree")),
        _ => Err(format!("`{s}`: expected `ring:k` or `complete`")),
    }
}

/// `er:N:p` family for Monte Carlo runs.
pub fn parse_er_family(s: &str) -> Result<(usize, f64), String> {
    match s.split(':').collect::<Vec<_>>().as_slice() {
        ["er", n, p] => Ok((
            n.parse().map_err(|_| format!("`{s}`: bad N"))?,
            p.parse().map_err(|_| format!("`{s}`: bad p"))?,
        )),
        _ => Err(format!("`{s}`: expected `er:N:p`")),
    }
}

/// `a:b` with `a < b`, both finite. Negative bounds are allowed.
pub fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("`{s}`: expected `lo:hi`"))?;
    let lo: f64 = a.parse().map_err(|_| format!("`{s}`: bad lower bound"))?;
    let hi: f64 = b.parse().map_err(|_| format!("`{s}`: bad upper bound"))?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(format!("`{s}`: need finite lo < hi"));
    }
    Ok((lo, hi))
}

/// Integer range `a:b`, inclusive, `a <= b`.
pub fn parse_size_range(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("`{s}`: expected `lo:hi`"))?;
    let lo: usize = a.parse().map_err(|_| format!("`{s}`: bad lower bound"))?;
    let hi: usize = b.parse().map_err(|_| format!("`{s}`: bad upper bound"))?;
    if lo > hi {
        return Err(format!("`{s}`: need lo <= hi"));
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn network_grammar() {
        assert_eq!(
            "complete:8".parse::<NetworkArg>().unwrap(),
            NetworkArg::Generated(NetworkSpec::Complete { n: 8 })
        );
        assert_eq!(
            "ring:6:4".parse::<NetworkArg>().unwrap(),
            NetworkArg::Generated(NetworkSpec::Ring { n: 6, k: 4 })
        );
        assert_eq!(
            "er:8:0.5:42".parse::<NetworkArg>().unwrap(),
            NetworkArg::Generated(NetworkSpec::ErdosRenyi { n: 8, p: 0.5, seed: 42 })
        );
        assert_eq!("file:a/b.csv".parse::<NetworkArg>().unwrap(), NetworkArg::File("a/b.csv".into()));
        assert_eq!("B.csv".parse::<NetworkArg>().unwrap(), NetworkArg::File("B.csv".into()));
        assert_eq!("zero".parse::<NetworkArg>().unwrap(), NetworkArg::Zero);
        for bad in ["ring:6", "complete:x", "er:8:0.5", "torus:4:4"] {
            assert!(bad.parse::<NetworkArg>().is_err(), "{bad}");
        }
        for s in ["complete:8", "ring:6:4", "er:8:0.5:42", "zero"] {
            assert_eq!(s.parse::<NetworkArg>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn ranges_and_families() {
        assert_eq!(parse_range("-50:50").unwrap(), (-50.0, 50.0));
        assert_eq!(parse_range("-10:-2.5").unwrap(), (-10.0, -2.5));
        assert!(parse_range("5:5").is_err());
        assert!(parse_range("5").is_err());
        assert_eq!(parse_size_range("5:50").unwrap(), (5, 50));
        assert!(parse_size_range("9:5").is_err());
        assert_eq!(parse_family("ring:4").unwrap(), SweepFamily::Ring { k: 4 });
        assert_eq!(parse_family("complete").unwrap(), SweepFamily::Complete);
        assert!(parse_family("er:4:0.1").is_err());
        assert_eq!(parse_er_family("er:8:0.5").unwrap(), (8, 0.5));
    }
}
