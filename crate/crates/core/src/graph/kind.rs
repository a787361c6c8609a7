use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{generate_geometric, generate_random_regular, generate_sbm, load_edge_list, Graph};
use crate::error::{Error, Result};

/// Recipe for a graph, written as `sbm:k=5,n=1000,p=0.1,q=0.01`,
/// `geometric:n=1000,r=0.1`, `regular:n=500,d=8` or `edgelist:PATH`.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphKind {
    Sbm { k: usize, n: usize, p: f64, q: f64 },
    Geometric { n: usize, r: f64 },
    Regular { n: usize, d: usize },
    EdgeList(PathBuf),
}

impl GraphKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            GraphKind::Sbm { k, n, p, q } => {
                if k == 0 || n < k {
                    return Err(Error::Parameter(format!("sbm needs 1 <= k <= n, got k={k}, n={n}")));
                }
                if !(0.0 <= q && q <= p && p <= 1.0) {
                    return Err(Error::Parameter(format!(
                        "sbm needs 0 <= q <= p <= 1, got p={p}, q={q}"
                    )));
                }
            }
            GraphKind::Geometric { n, r } => {
                if n == 0 || !(r > 0.0 && r.is_finite()) {
                    return Err(Error::Parameter(format!("geometric needs n >= 1, r > 0, got n={n}, r={r}")));
                }
            }
            GraphKind::Regular { n, d } => {
                if d >= n || !(n * d).is_multiple_of(2) {
                    return Err(Error::Parameter(format!("no {d}-regular graph on {n} nodes")));
                }
            }
            GraphKind::EdgeList(_) => {}
        }
        Ok(())
    }

    /// Materializes the graph; `seed` is ignored for edge lists.
    pub fn build(&self, seed: u64) -> Result<Graph> {
        match self {
            &GraphKind::Sbm { k, n, p, q } => generate_sbm(k, n, p, q, seed),
            &GraphKind::Geometric { n, r } => generate_geometric(n, r, seed),
            &GraphKind::Regular { n, d } => generate_random_regular(n, d, seed),
            GraphKind::EdgeList(path) => load_edge_list(path),
        }
    }

    pub fn is_random(&self) -> bool {
        !matches!(self, GraphKind::EdgeList(_))
    }

    /// Short label for CSV `graph` columns.
    pub fn label(&self) -> String {
        match self {
            GraphKind::EdgeList(path) => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
            other => other.to_string(),
        }
    }
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphKind::Sbm { k, n, p, q } => write!(f, "sbm:k={k},n={n},p={p},q={q}"),
            GraphKind::Geometric { n, r } => write!(f, "geometric:n={n},r={r}"),
            GraphKind::Regular { n, d } => write!(f, "regular:n={n},d={d}"),
            GraphKind::EdgeList(path) => write!(f, "edgelist:{}", path.display()),
        }
    }
}

impl FromStr for GraphKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (tag, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Parameter(format!("graph spec `{s}` lacks a `kind:` prefix")))?;
        if tag == "edgelist" {
            if rest.is_empty() {
                return Err(Error::Parameter("edgelist spec needs a path".into()));
            }
            return Ok(GraphKind::EdgeList(PathBuf::from(rest)));
        }

        let mut params = Params::parse(rest)?;
        let kind = match tag {
            "sbm" => GraphKind::Sbm {
                k: params.take("k")?,
                n: params.take("n")?,
                p: params.take("p")?,
                q: params.take("q")?,
            },
            "geometric" => GraphKind::Geometric {
                n: params.take("n")?,
                r: params.take("r")?,
            },
            "regular" => GraphKind::Regular {
                n: params.take("n")?,
                d: params.take("d")?,
            },
            other => return Err(Error::Parameter(format!("unknown graph kind `{other}`"))),
        };
        params.finish()?;
        kind.validate()?;
        Ok(kind)
    }
}

struct Params<'a>(Vec<(&'a str, &'a str)>);

impl<'a> Params<'a> {
    fn parse(s: &'a str) -> Result<Self> {
        s.split(',')
            .filter(|kv| !kv.trim().is_empty())
            .map(|kv| {
                kv.split_once('=')
                    .map(|(k, v)| (k.trim(), v.trim()))
                    .ok_or_else(|| Error::Parameter(format!("expected key=value, found `{kv}`")))
            })
            .collect::<Result<_>>()
            .map(Params)
    }

    fn take<T: FromStr>(&mut self, key: &str) -> Result<T> {
        let pos = self
            .0
            .iter()
            .position(|(k, _)| *k == key)
            .ok_or_else(|| Error::Parameter(format!("missing parameter `{key}`")))?;
        let (_, value) = self.0.remove(pos);
        value
            .parse()
            .map_err(|_| Error::Parameter(format!("invalid value `{value}` for `{key}`")))
    }

    fn finish(self) -> Result<()> {
        match self.0.first() {
            Some((k, _)) => Err(Error::Parameter(format!("unexpected parameter `{k}`"))),
            None => Ok(()),
        }
    }
}

impl Serialize for GraphKind {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GraphKind {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_displays() {
        for spec in [
            "sbm:k=5,n=1000,p=0.1,q=0.01",
            "geometric:n=1000,r=0.1",
            "regular:n=100,d=4",
            "edgelist:data/nyu.txt",
        ] {
            let kind: GraphKind = spec.parse().unwrap();
            assert_eq!(kind.to_string(), spec);
        }
        let kind: GraphKind = "sbm:n=10,q=0.1,k=2,p=0.5".parse().unwrap();
        assert_eq!(kind, GraphKind::Sbm { k: 2, n: 10, p: 0.5, q: 0.1 });
    }

    #[test]
    fn rejects_bad_specs() {
        for spec in [
            "sbm:k=5,n=1000,p=0.1",
            "sbm:k=5,n=1000,p=0.01,q=0.1",
            "sbm:k=5,n=1000,p=0.1,q=0.01,z=3",
            "geometric:n=10,r=0",
            "geometric:n=ten,r=0.1",
            "ring:n=4",
            "nocolon",
            "edgelist:",
        ] {
            assert!(spec.parse::<GraphKind>().is_err(), "{spec}");
        }
    }

    #[test]
    fn serde_uses_spec_string() {
        let kind = GraphKind::Geometric { n: 10, r: 0.25 };
        let json = serde_json::to_string(&kind).unwrap();
        assert_eq!(json, "\"geometric:n=10,r=0.25\"");
        assert_eq!(serde_json::from_str::<GraphKind>(&json).unwrap(), kind);
    }

    #[test]
    fn label_uses_file_stem() {
        let kind: GraphKind = "edgelist:/tmp/fb/Stanford3.txt".parse().unwrap();
        assert_eq!(kind.label(), "Stanford3");
    }
}
