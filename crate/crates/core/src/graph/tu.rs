//! Reader and writer for the TU benchmark text format.
//!
//! A dataset `DS` is three files: `DS_A.txt` (one `u, v` edge per line with
//! 1-based global node ids), `DS_graph_indicator.txt` (line `i` holds the
//! 1-based graph id of node `i`) and `DS_graph_labels.txt` (one label per graph).

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::{Dataset, Graph};

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect())
}

fn parse_int(file: &Path, line: usize, tok: &str) -> Result<i64> {
    tok.trim().parse::<i64>().map_err(|_| Error::Parse {
        file: file.display().to_string(),
        line,
        msg: format!("expected integer, got '{tok}'"),
    })
}

/// Locates the `<prefix>_A.txt` file: prefers the directory's own name,
/// otherwise the unique `*_A.txt` inside it.
fn dataset_prefix(dir: &Path) -> Result<String> {
    if let Some(name) = dir.file_name().and_then(|n| n.to_str()) {
        if dir.join(format!("{name}_A.txt")).is_file() {
            return Ok(name.to_string());
        }
    }
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut prefixes: Vec<String> = entries
        .filter_map(|e| e.ok())
        .filter_map(|e| e.file_name().to_str().map(String::from))
        .filter_map(|n| n.strip_suffix("_A.txt").map(String::from))
        .collect();
    prefixes.sort();
    match prefixes.len() {
        1 => Ok(prefixes.remove(0)),
        0 => Err(Error::Dataset(format!(
            "no *_A.txt edge file in {}",
            dir.display()
        ))),
        _ => Err(Error::Dataset(format!(
            "ambiguous TU directory {}: {prefixes:?}",
            dir.display()
        ))),
    }
}

fn required(dir: &Path, prefix: &str, suffix: &str) -> Result<PathBuf> {
    let path = dir.join(format!("{prefix}_{suffix}"));
    if !path.is_file() {
        return Err(Error::Dataset(format!("missing file {}", path.display())));
    }
    Ok(path)
}

/// Loads a TU-format dataset. Raw labels are remapped to `{0, 1}` by ascending order.
pub fn load_tu_dataset(dir: &Path) -> Result<Dataset> {
    let prefix = dataset_prefix(dir)?;
    let a_path = required(dir, &prefix, "A.txt")?;
    let ind_path = required(dir, &prefix, "graph_indicator.txt")?;
    let lab_path = required(dir, &prefix, "graph_labels.txt")?;

    let raw_labels: Vec<i64> = read_lines(&lab_path)?
        .iter()
        .enumerate()
        .map(|(i, l)| parse_int(&lab_path, i + 1, l))
        .collect::<Result<_>>()?;
    let distinct: BTreeSet<i64> = raw_labels.iter().copied().collect();
    if distinct.len() != 2 {
        return Err(Error::Dataset(format!(
            "expected a binary label set, found {distinct:?}"
        )));
    }
    let sorted: Vec<i64> = distinct.into_iter().collect();
    let n_graphs = raw_labels.len();

    // node -> (graph index, local index)
    let indicator = read_lines(&ind_path)?;
    let mut node_graph = Vec::with_capacity(indicator.len());
    let mut sizes = vec![0usize; n_graphs];
    for (i, l) in indicator.iter().enumerate() {
        let gid = parse_int(&ind_path, i + 1, l)?;
        if gid < 1 || gid as usize > n_graphs {
            return Err(Error::Parse {
                file: ind_path.display().to_string(),
                line: i + 1,
                msg: format!("graph id {gid} outside 1..={n_graphs}"),
            });
        }
        let g = gid as usize - 1;
        node_graph.push((g, sizes[g]));
        sizes[g] += 1;
    }

    let mut edges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n_graphs];
    for (i, l) in read_lines(&a_path)?.iter().enumerate() {
        let mut toks = l.split(',');
        let (Some(a), Some(b), None) = (toks.next(), toks.next(), toks.next()) else {
            return Err(Error::Parse {
                file: a_path.display().to_string(),
                line: i + 1,
                msg: "expected 'u, v'".into(),
            });
        };
        let u = parse_int(&a_path, i + 1, a)?;
        let v = parse_int(&a_path, i + 1, b)?;
        let lookup = |x: i64| -> Result<(usize, usize)> {
            if x < 1 || x as usize > node_graph.len() {
                return Err(Error::Dataset(format!(
                    "{} line {}: dangling node id {x}",
                    a_path.display(),
                    i + 1
                )));
            }
            Ok(node_graph[x as usize - 1])
        };
        let (gu, lu) = lookup(u)?;
        let (gv, lv) = lookup(v)?;
        if gu != gv {
            return Err(Error::Dataset(format!(
                "{} line {}: edge ({u}, {v}) spans graphs {} and {}",
                a_path.display(),
                i + 1,
                gu + 1,
                gv + 1
            )));
        }
        if lu != lv {
            edges[gu].push((lu, lv));
        }
    }

    let graphs = edges
        .into_iter()
        .enumerate()
        .map(|(g, es)| {
            let label = sorted.binary_search(&raw_labels[g]).expect("label in set");
            Graph::new(g, sizes[g], es, label)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Dataset {
        name: prefix,
        class_names: [sorted[0].to_string(), sorted[1].to_string()],
        graphs,
        source_ids: None,
    })
}

/// Writes `ds` as TU text files named after `ds.name` into `dir`.
/// Labels are written as the class index.
pub fn write_tu_dataset(ds: &Dataset, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let open = |suffix: &str| -> Result<(PathBuf, fs::File)> {
        let path = dir.join(format!("{}_{suffix}", ds.name));
        let f = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        Ok((path, f))
    };
    let (a_path, mut a) = open("A.txt")?;
    let (i_path, mut ind) = open("graph_indicator.txt")?;
    let (l_path, mut lab) = open("graph_labels.txt")?;

    let mut offset = 0usize;
    for g in &ds.graphs {
        for _ in 0..g.n_nodes {
            writeln!(ind, "{}", g.id + 1).map_err(|e| Error::io(&i_path, e))?;
        }
        for &(u, v) in &g.edges {
            writeln!(a, "{}, {}", offset + u + 1, offset + v + 1).map_err(|e| Error::io(&a_path, e))?;
            writeln!(a, "{}, {}", offset + v + 1, offset + u + 1).map_err(|e| Error::io(&a_path, e))?;
        }
        writeln!(lab, "{}", g.label).map_err(|e| Error::io(&l_path, e))?;
        offset += g.n_nodes;
    }
    Ok(())
}
