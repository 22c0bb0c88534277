//! Dataset readers and instance construction.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use fedsubmax::objectives::{Coverage, FacilityLocation};
use fedsubmax::synthetic::{generate_synthetic, Instance};

use crate::config::ObjectiveConfig;
use crate::error::{CliError, Result};

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn data_error(path: &Path, line: u64, message: impl Into<String>) -> CliError {
    CliError::Data {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Reads `client_id,facility_id,score` rows. A leading header row is
/// skipped; pairs that never appear score 0.
pub fn read_facility_csv(reader: impl Read, path: &Path) -> Result<FacilityLocation> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut entries: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (idx, rec) in rdr.records().enumerate() {
        let line = idx as u64 + 1;
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(line, |p| p.line());
            data_error(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(line, |p| p.line());
        if rec.len() != 3 {
            return Err(data_error(path, line, format!("expected 3 fields, found {}", rec.len())));
        }
        if idx == 0 && rec[0].parse::<usize>().is_err() {
            continue;
        }
        let client: usize = rec[0]
            .parse()
            .map_err(|_| data_error(path, line, format!("client_id `{}` is not an index", &rec[0])))?;
        let facility: usize = rec[1]
            .parse()
            .map_err(|_| data_error(path, line, format!("facility_id `{}` is not an index", &rec[1])))?;
        let score: f64 = rec[2]
            .parse()
            .map_err(|_| data_error(path, line, format!("score `{}` is not a number", &rec[2])))?;
        if !(score >= 0.0 && score.is_finite()) {
            return Err(data_error(path, line, format!("score {score} must be finite and nonnegative")));
        }
        if entries.insert((client, facility), score).is_some() {
            return Err(data_error(path, line, format!("pair ({client}, {facility}) appears twice")));
        }
    }
    if entries.is_empty() {
        return Err(data_error(path, 0, "no score rows"));
    }
    let clients = entries.keys().map(|k| k.0).max().unwrap_or(0) + 1;
    let facilities = entries.keys().map(|k| k.1).max().unwrap_or(0) + 1;
    let mut scores = vec![vec![0.0; facilities]; clients];
    for ((i, j), s) in entries {
        scores[i][j] = s;
    }
    Ok(FacilityLocation::new(scores)?)
}

/// Reads `<group_id>: <client ids>` lines, ids separated by whitespace or
/// commas. Groups never listed are empty.
pub fn read_coverage_groups(reader: impl Read, path: &Path, clients: Option<usize>) -> Result<Coverage> {
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let no = idx as u64 + 1;
        let line = line.map_err(|e| data_error(path, no, e.to_string()))?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (head, rest) = body
            .split_once(':')
            .ok_or_else(|| data_error(path, no, "expected `<group_id>: <client ids>`"))?;
        let group: usize = head
            .trim()
            .parse()
            .map_err(|_| data_error(path, no, format!("group id `{}` is not an index", head.trim())))?;
        let members = rest
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| data_error(path, no, format!("client id `{t}` is not an index")))
            })
            .collect::<Result<Vec<_>>>()?;
        if groups.insert(group, members).is_some() {
            return Err(data_error(path, no, format!("group {group} listed twice")));
        }
    }
    let n = groups.keys().max().map_or(0, |g| g + 1);
    if n == 0 {
        return Err(data_error(path, 0, "no groups"));
    }
    let seen = groups.values().flatten().max().map_or(0, |c| c + 1);
    let clients = clients.unwrap_or(seen);
    let mut all = vec![Vec::new(); n];
    for (g, members) in groups {
        all[g] = members;
    }
    Ok(Coverage::new(all, clients)?)
}

/// Builds the objective a config describes.
pub fn build_instance(objective: &ObjectiveConfig, seed: u64) -> Result<Instance> {
    Ok(match objective {
        ObjectiveConfig::Facility { path: Some(p), .. } => {
            Instance::Facility(read_facility_csv(open(p)?, p)?)
        }
        ObjectiveConfig::Facility {
            scores: Some(scores),
            ..
        } => Instance::Facility(FacilityLocation::new(scores.clone())?),
        ObjectiveConfig::Coverage {
            path: Some(p),
            clients,
            ..
        } => Instance::Coverage(read_coverage_groups(open(p)?, p, *clients)?),
        ObjectiveConfig::Coverage {
            groups: Some(groups),
            clients,
            ..
        } => {
            let clients =
                clients.unwrap_or_else(|| groups.iter().flatten().max().map_or(0, |c| c + 1));
            Instance::Coverage(Coverage::new(groups.clone(), clients)?)
        }
        ObjectiveConfig::Synthetic {
            generator,
            seed: own,
        } => generate_synthetic(generator, own.unwrap_or(seed))?,
        _ => {
            return Err(CliError::validation(
                "objective",
                "exactly one data source is required",
            ))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use fedsubmax::objectives::Weighting;
    use fedsubmax::Subset;

    #[test]
    fn facility_csv_fills_missing_pairs_with_zero() {
        let text = "client_id,facility_id,score\n0,0,3\n0,1,1\n1,1,2\n";
        let f = read_facility_csv(text.as_bytes(), Path::new("s.csv")).unwrap();
        assert_eq!((f.clients(), f.facilities()), (2, 2));
        assert_eq!(f.score(1, 0), 0.0);
        let pop = f.population();
        assert_eq!(pop.value(&Subset::full(2), Weighting::Unit), 5.0);
    }

    #[test]
    fn facility_csv_errors_carry_lines() {
        let err = read_facility_csv("0,0,3\n0,1,-1\n".as_bytes(), Path::new("s.csv")).unwrap_err();
        let CliError::Data { line, .. } = err else { panic!() };
        assert_eq!(line, 2);
        assert!(read_facility_csv("0,0,3\n0,0,4\n".as_bytes(), Path::new("s.csv")).is_err());
        assert!(read_facility_csv("0,0\n".as_bytes(), Path::new("s.csv")).is_err());
    }

    #[test]
    fn coverage_text_matches_inline_groups() {
        let text = "# COV-3\n0: 0, 1\n1: 1 2\n2: 3\n";
        let c = read_coverage_groups(text.as_bytes(), Path::new("g.txt"), None).unwrap();
        assert_eq!(c.groups(), &[vec![0, 1], vec![1, 2], vec![3]]);
        assert_eq!(c.clients(), 4);
        let s = Subset::from_ids(3, &[0, 1]).unwrap();
        assert_eq!(c.population().value(&s, Weighting::Weighted), 0.75);
    }

    #[test]
    fn coverage_text_errors() {
        let p = Path::new("g.txt");
        assert!(read_coverage_groups("0 1 2\n".as_bytes(), p, None).is_err());
        assert!(read_coverage_groups("0: x\n".as_bytes(), p, None).is_err());
        assert!(read_coverage_groups("0: 1\n0: 2\n".as_bytes(), p, None).is_err());
        assert!(read_coverage_groups("# nothing\n".as_bytes(), p, None).is_err());
        let sparse = read_coverage_groups("2: 0\n".as_bytes(), p, Some(3)).unwrap();
        assert_eq!(sparse.groups().len(), 3);
        assert_eq!(sparse.clients(), 3);
    }
}
