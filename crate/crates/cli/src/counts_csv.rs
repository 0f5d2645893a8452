//! CSV form of a counts table: header `setting,outcome,count`, one row per
//! (setting, outcome), e.g. `ZX,+-,2481`.

use std::collections::BTreeMap;
use std::io::Read;

use ssbmeasure::tomography::{CountsTable, PauliSetting, SettingCounts};

use crate::error::CliError;

pub const HEADER: [&str; 3] = ["setting", "outcome", "count"];

pub fn write_counts(table: &CountsTable) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(HEADER).expect("in-memory write");
    for (setting, outcome, count) in table.records() {
        w.write_record([setting, outcome, count.to_string()]).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii")
}

/// Parses and validates a counts CSV. Row errors carry their line number.
pub fn read_counts<R: Read>(input: R) -> Result<CountsTable, CliError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = rdr
        .headers()
        .map_err(|e| CliError::Data(format!("line 1: {e}")))?
        .clone();
    if header.iter().collect::<Vec<_>>() != HEADER {
        return Err(CliError::Data(format!(
            "line 1: header must be `{}`",
            HEADER.join(",")
        )));
    }
    // Settings in order of first appearance.
    let mut order: Vec<PauliSetting> = Vec::new();
    let mut rows: BTreeMap<PauliSetting, Vec<Option<u64>>> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            CliError::Data(format!("line {line}: {e}"))
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let bad = |msg: String| CliError::Data(format!("line {line}: {msg}"));
        if rec.len() != 3 {
            return Err(bad(format!("expected 3 fields, found {}", rec.len())));
        }
        let setting: PauliSetting = rec[0].parse().map_err(|e| bad(format!("{e}")))?;
        let outcome = setting.parse_outcome(&rec[1]).map_err(|e| bad(format!("{e}")))?;
        let count: u64 = rec[2]
            .parse()
            .map_err(|_| bad(format!("count `{}` is not a non-negative integer", &rec[2])))?;
        if let Some(first) = order.first() {
            if first.nqubits() != setting.nqubits() {
                return Err(bad(format!("setting {setting} mixes qubit counts with {first}")));
            }
        }
        let slot = rows.entry(setting.clone()).or_insert_with(|| {
            order.push(setting.clone());
            vec![None; 1 << setting.nqubits()]
        });
        if slot[outcome].replace(count).is_some() {
            return Err(bad(format!("duplicate row for {setting} {}", &rec[1])));
        }
    }
    if order.is_empty() {
        return Err(CliError::Data("counts table has no rows".into()));
    }
    let settings = order
        .into_iter()
        .map(|s| {
            let counts = rows[&s].iter().map(|c| c.unwrap_or(0)).collect();
            SettingCounts { setting: s, counts }
        })
        .collect();
    CountsTable::new(settings).map_err(|e| CliError::Data(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = "setting,outcome,count\nZ,+,3\nZ,-,1\nX,+,2\nX,-,2\n";
        let t = read_counts(text.as_bytes()).unwrap();
        assert_eq!(t.shots_per_setting(), 4);
        assert_eq!(write_counts(&t), text);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("setting,outcome,count\nZ,+,3\nZ,?,1\n", "line 3"),
            ("setting,outcome,count\nZ,+,3\nQ,+,1\n", "line 3"),
            ("setting,outcome,count\nZ,+,x\n", "line 2"),
            ("setting,outcome,count\nZ,+,1\nZ,+,1\n", "line 3"),
            ("setting,outcome,count\nZ,+,1\nZZ,++,1\n", "line 3"),
            ("setting,outcome,count\nZ,+\n", "line 2"),
            ("a,b,c\n", "line 1"),
        ];
        for (text, want) in cases {
            let err = read_counts(text.as_bytes()).unwrap_err().to_string();
            assert!(err.contains(want), "{text:?}: {err}");
        }
    }

    #[test]
    fn missing_outcome_rows_count_as_zero() {
        let t = read_counts("setting,outcome,count\nZ,+,5\nX,+,2\nX,-,3\n".as_bytes()).unwrap();
        assert_eq!(t.rows()[0].counts, vec![5, 0]);
    }
}
