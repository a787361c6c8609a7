use std::fmt::Write as _;
use std::path::Path;

use super::Graph;
use crate::error::{Error, Result};

/// Reads a whitespace-separated edge list (`u v` or `u v w` per line).
///
/// Lines starting with `#` and blank lines are skipped. Ids are 0-based if
/// any id equals 0, otherwise 1-based and shifted down.
pub fn load_edge_list(path: impl AsRef<Path>) -> Result<Graph> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(&text, path)
}

/// Parses edge-list text; `origin` is only used in error messages.
pub fn parse_edge_list(text: &str, origin: &Path) -> Result<Graph> {
    let parse_err = |line: usize, column: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        column,
        message,
    };

    let mut raw: Vec<(usize, usize, f64)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens = tokens_with_columns(line);
        if !(2..=3).contains(&tokens.len()) {
            return Err(parse_err(
                lineno,
                1,
                format!("expected `u v` or `u v w`, found {} fields", tokens.len()),
            ));
        }
        let mut ids = [0usize; 2];
        for (slot, &(col, tok)) in ids.iter_mut().zip(&tokens) {
            *slot = tok
                .parse()
                .map_err(|_| parse_err(lineno, col, format!("invalid node id `{tok}`")))?;
        }
        let weight = match tokens.get(2) {
            Some(&(col, tok)) => {
                let w: f64 = tok
                    .parse()
                    .map_err(|_| parse_err(lineno, col, format!("invalid weight `{tok}`")))?;
                if !w.is_finite() || w < 0.0 {
                    return Err(parse_err(lineno, col, format!("negative or non-finite weight {tok}")));
                }
                if w == 0.0 {
                    return Err(parse_err(lineno, col, "zero weight".into()));
                }
                w
            }
            None => 1.0,
        };
        raw.push((ids[0], ids[1], weight));
    }

    if raw.is_empty() {
        return Err(Error::EmptyInput {
            path: origin.to_path_buf(),
        });
    }
    let zero_based = raw.iter().any(|&(u, v, _)| u == 0 || v == 0);
    let shift = usize::from(!zero_based);
    let n = raw.iter().map(|&(u, v, _)| u.max(v)).max().unwrap() + 1 - shift;
    Graph::from_edges(n, raw.into_iter().map(|(u, v, w)| (u - shift, v - shift, w)))
}

fn tokens_with_columns(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (idx, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(idx),
            (true, Some(s)) => {
                out.push((s, &line[s..idx]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter()
        .map(|(byte, tok)| (line[..byte].chars().count() + 1, tok))
        .collect()
}

/// Writes `node,x,y` rows for a graph with coordinates.
pub fn write_coordinates_csv(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let coords = g
        .coordinates()
        .ok_or_else(|| Error::Precondition("graph has no node coordinates".into()))?;
    let mut out = String::from("node,x,y\n");
    for (i, c) in coords.iter().enumerate() {
        writeln!(out, "{i},{},{}", c[0], c[1]).unwrap();
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::validate;

    fn parse(text: &str) -> Result<Graph> {
        parse_edge_list(text, Path::new("test.txt"))
    }

    #[test]
    fn path_graph() {
        let g = parse("0 1\n1 2\n").unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.degrees(), &[1.0, 2.0, 1.0]);
    }

    #[test]
    fn opposite_orientations_sum() {
        let g = parse("0 1 2.0\n1 0 3.0\n").unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.degrees(), &[5.0, 5.0]);
    }

    #[test]
    fn self_loop_line() {
        let g = parse("0 0 1.0\n").unwrap();
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.degrees(), &[1.0]);
        assert_eq!(g.neighbors(0).0, &[0]);
        assert!(!validate(&g).bipartite);
    }

    #[test]
    fn one_based_ids_shift_down() {
        let g = parse("# header comment\n1 2\n\n2 3\n").unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.degrees(), &[1.0, 2.0, 1.0]);
    }

    #[test]
    fn tabs_and_trailing_space() {
        let g = parse("0\t1\t0.5  \n").unwrap();
        assert_eq!(g.degrees(), &[0.5, 0.5]);
    }

    #[test]
    fn malformed_line_reports_position() {
        match parse("0 1\n1 x\n") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 3)),
            other => panic!("unexpected {other:?}"),
        }
        match parse("0 1 2 3\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negative_weight_rejected() {
        match parse("0 1 -2\n") {
            Err(Error::Parse { column, message, .. }) => {
                assert_eq!(column, 5);
                assert!(message.contains("negative"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_file_rejected() {
        assert!(matches!(parse(""), Err(Error::EmptyInput { .. })));
        assert!(matches!(parse("# only a comment\n"), Err(Error::EmptyInput { .. })));
    }

    #[test]
    fn load_from_disk_and_coordinates_export() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.txt");
        std::fs::write(&p, "0 1\n").unwrap();
        assert_eq!(load_edge_list(&p).unwrap().edge_count(), 1);
        assert!(matches!(
            load_edge_list(dir.path().join("missing.txt")),
            Err(Error::Io { .. })
        ));

        let g = crate::graph::generate_geometric(3, 0.5, 1).unwrap();
        let out = dir.path().join("coords.csv");
        write_coordinates_csv(&g, &out).unwrap();
        let text = std::fs::read_to_string(out).unwrap();
        assert!(text.starts_with("node,x,y\n0,"));
        assert_eq!(text.lines().count(), 4);
    }
}
