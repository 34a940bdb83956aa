use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::LazyLock;

use super::{DatasetSplit, Finger, GraspSample, Label, Orientation, SplitKind, MAX_READING};
use crate::error::{Error, Result};
use crate::sensor_graph::TAXEL_COUNT;

/// Header of the native schema: `object,orientation,label,i01..i24,m01..m24,t01..t24`.
pub static NATIVE_COLUMNS: LazyLock<Vec<String>> = LazyLock::new(|| {
    let mut cols = vec!["object".to_string(), "orientation".into(), "label".into()];
    for finger in Finger::ALL {
        for e in 1..=TAXEL_COUNT {
            cols.push(format!("{}{e:02}", finger.column_prefix()));
        }
    }
    cols
});

/// Adapts a foreign CSV layout to the native schema.
///
/// The mapping file holds one `ours=theirs` pair per line (`#` comments and
/// blank lines ignored):
///
/// * `i01=ff_elec_1` reads native column `i01` from the file column `ff_elec_1`;
/// * `orientation=@down` gives every row the same value when the file has no
///   such column (one file per orientation);
/// * `label.slippery=1` / `orientation.45=palm45` declare the file's tokens for
///   a native label or orientation value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ColumnMapping {
    columns: HashMap<String, String>,
    constants: HashMap<String, String>,
    label_tokens: HashMap<String, Label>,
    orientation_tokens: HashMap<String, Orientation>,
}

impl ColumnMapping {
    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Parse {
            source_name: source_name.to_string(),
            line,
            msg,
        };
        let mut mapping = ColumnMapping::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((ours, theirs)) = content.split_once('=') else {
                return Err(err(line, "expected `ours=theirs`".into()));
            };
            let (ours, theirs) = (ours.trim(), theirs.trim());
            if theirs.is_empty() {
                return Err(err(line, format!("empty mapping for `{ours}`")));
            }
            if let Some(value) = ours.strip_prefix("label.") {
                let label = Label::from_token(value)
                    .ok_or_else(|| err(line, format!("unknown label `{value}`")))?;
                mapping.label_tokens.insert(theirs.to_string(), label);
            } else if let Some(value) = ours.strip_prefix("orientation.") {
                let o = Orientation::from_token(value)
                    .ok_or_else(|| err(line, format!("unknown orientation `{value}`")))?;
                mapping.orientation_tokens.insert(theirs.to_string(), o);
            } else if NATIVE_COLUMNS.iter().any(|c| c == ours) {
                if let Some(constant) = theirs.strip_prefix('@') {
                    mapping.constants.insert(ours.to_string(), constant.to_string());
                } else {
                    mapping.columns.insert(ours.to_string(), theirs.to_string());
                }
            } else {
                return Err(err(line, format!("`{ours}` is not a native column")));
            }
        }
        Ok(mapping)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    fn parse_label(&self, token: &str) -> Option<Label> {
        self.label_tokens
            .get(token)
            .copied()
            .or_else(|| Label::from_token(&token.to_ascii_lowercase()))
    }

    fn parse_orientation(&self, token: &str) -> Option<Orientation> {
        self.orientation_tokens
            .get(token)
            .copied()
            .or_else(|| Orientation::from_token(&token.to_ascii_lowercase()))
    }
}

enum Source {
    Column(usize),
    Constant(String),
}

pub fn load_csv(path: &Path, mapping: Option<&ColumnMapping>, kind: SplitKind) -> Result<DatasetSplit> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, mapping, kind)
}

/// Reads a split from any reader. Row numbers in errors are file line numbers
/// (the header is line 1).
pub fn read_csv<R: Read>(reader: R, mapping: Option<&ColumnMapping>, kind: SplitKind) -> Result<DatasetSplit> {
    let default_mapping = ColumnMapping::default();
    let mapping = mapping.unwrap_or(&default_mapping);
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();

    let sources: Vec<Source> = NATIVE_COLUMNS
        .iter()
        .map(|ours| {
            if let Some(c) = mapping.constants.get(ours) {
                return Ok(Source::Constant(c.clone()));
            }
            let theirs = mapping.columns.get(ours).unwrap_or(ours);
            headers
                .iter()
                .position(|h| h == theirs)
                .map(Source::Column)
                .ok_or_else(|| {
                    if theirs == ours {
                        Error::MissingColumn(ours.clone())
                    } else {
                        Error::MissingColumn(format!("{theirs} (mapped from {ours})"))
                    }
                })
        })
        .collect::<Result<_>>()?;

    let mut samples = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| -> Result<&str> {
            match &sources[i] {
                Source::Constant(c) => Ok(c.as_str()),
                Source::Column(c) => record.get(*c).ok_or_else(|| Error::Row {
                    row,
                    msg: format!("missing field for `{}`", NATIVE_COLUMNS[i]),
                }),
            }
        };

        let object_id = field(0)?.to_string();
        let orientation_token = field(1)?;
        let orientation = mapping.parse_orientation(orientation_token).ok_or_else(|| Error::Row {
            row,
            msg: format!("unknown orientation `{orientation_token}`"),
        })?;
        let label_token = field(2)?;
        let label = mapping.parse_label(label_token).ok_or_else(|| Error::Row {
            row,
            msg: format!("unknown label `{label_token}`"),
        })?;

        let mut readings = [0i64; 3 * TAXEL_COUNT];
        for (j, slot) in readings.iter_mut().enumerate() {
            let col = 3 + j;
            let text = field(col)?;
            let value: i64 = text.parse().map_err(|_| Error::Row {
                row,
                msg: format!("`{}` = `{text}` is not an integer", NATIVE_COLUMNS[col]),
            })?;
            if !(0..=MAX_READING).contains(&value) {
                return Err(Error::Row {
                    row,
                    msg: format!("`{}` = {value} outside [0, {MAX_READING}]", NATIVE_COLUMNS[col]),
                });
            }
            *slot = value;
        }
        samples.push(GraspSample {
            object_id,
            orientation,
            readings,
            label,
        });
    }
    Ok(DatasetSplit::new(samples, kind))
}

/// Writes the native schema.
pub fn write_csv<W: Write>(split: &DatasetSplit, writer: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().from_writer(writer);
    wtr.write_record(NATIVE_COLUMNS.iter())?;
    for s in &split.samples {
        let mut rec = Vec::with_capacity(NATIVE_COLUMNS.len());
        rec.push(s.object_id.clone());
        rec.push(s.orientation.token().to_string());
        rec.push(s.label.token().to_string());
        rec.extend(s.readings.iter().map(|r| r.to_string()));
        wtr.write_record(&rec)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header() -> String {
        NATIVE_COLUMNS.join(",")
    }

    fn row(object: &str, o: &str, label: &str, fill: i64) -> String {
        let mut fields = vec![object.to_string(), o.to_string(), label.to_string()];
        fields.extend((0..72).map(|_| fill.to_string()));
        fields.join(",")
    }

    #[test]
    fn native_header_shape() {
        assert_eq!(NATIVE_COLUMNS.len(), 75);
        assert_eq!(NATIVE_COLUMNS[3], "i01");
        assert_eq!(NATIVE_COLUMNS[26], "i24");
        assert_eq!(NATIVE_COLUMNS[27], "m01");
        assert_eq!(NATIVE_COLUMNS[74], "t24");
    }

    #[test]
    fn empty_file_with_header_is_empty_split() {
        let split = read_csv(format!("{}\n", header()).as_bytes(), None, SplitKind::Train).unwrap();
        assert!(split.is_empty());
    }

    #[test]
    fn parses_rows() {
        let text = format!(
            "{}\n{}\n{}\n",
            header(),
            row("mug", "down", "stable", 10),
            row("ball", "45", "slippery", 4095)
        );
        let split = read_csv(text.as_bytes(), None, SplitKind::Test).unwrap();
        assert_eq!(split.len(), 2);
        assert_eq!(split.samples[0].orientation, Orientation::PalmDown);
        assert_eq!(split.samples[1].label, Label::Slippery);
        assert_eq!(split.samples[1].readings[71], 4095);
        assert_eq!(split.kind, SplitKind::Test);
    }

    #[test]
    fn missing_column_is_named() {
        let text = header().replace(",m07", "");
        let err = read_csv(text.as_bytes(), None, SplitKind::Train).unwrap_err();
        assert!(matches!(&err, Error::MissingColumn(c) if c == "m07"), "{err}");
    }

    #[test]
    fn row_errors_carry_line_numbers() {
        let bad_int = format!("{}\n{}\n{}\n", header(), row("a", "down", "stable", 1), row("a", "down", "stable", 1).replacen(",1,", ",x,", 1));
        match read_csv(bad_int.as_bytes(), None, SplitKind::Train).unwrap_err() {
            Error::Row { row, .. } => assert_eq!(row, 3),
            other => panic!("unexpected {other:?}"),
        }
        let out_of_range = format!("{}\n{}\n", header(), row("a", "down", "stable", 4096));
        assert!(matches!(
            read_csv(out_of_range.as_bytes(), None, SplitKind::Train),
            Err(Error::Row { row: 2, .. })
        ));
        let bad_label = format!("{}\n{}\n", header(), row("a", "down", "wobbly", 1));
        assert!(matches!(
            read_csv(bad_label.as_bytes(), None, SplitKind::Train),
            Err(Error::Row { row: 2, .. })
        ));
        let bad_orientation = format!("{}\n{}\n", header(), row("a", "up", "stable", 1));
        assert!(matches!(
            read_csv(bad_orientation.as_bytes(), None, SplitKind::Train),
            Err(Error::Row { row: 2, .. })
        ));
    }

    #[test]
    fn mapping_renames_columns_and_tokens() {
        let mut cols: Vec<String> = vec!["obj".into(), "slipped".into()];
        let mut mapping_text = String::from("object=obj\nlabel=slipped\norientation=@side\nlabel.stable=0\nlabel.slippery=1\n");
        for (j, ours) in NATIVE_COLUMNS[3..].iter().enumerate() {
            cols.push(format!("e{j}"));
            mapping_text.push_str(&format!("{ours}=e{j}\n"));
        }
        let mapping = ColumnMapping::parse(&mapping_text, "map").unwrap();
        let mut data = vec!["cup".to_string(), "1".into()];
        data.extend((0..72).map(|j| j.to_string()));
        let text = format!("{}\n{}\n", cols.join(","), data.join(","));
        let split = read_csv(text.as_bytes(), Some(&mapping), SplitKind::Train).unwrap();
        let s = &split.samples[0];
        assert_eq!(s.object_id, "cup");
        assert_eq!(s.label, Label::Slippery);
        assert_eq!(s.orientation, Orientation::PalmSide);
        assert_eq!(s.readings[5], 5);
    }

    #[test]
    fn mapping_parse_errors() {
        assert!(matches!(ColumnMapping::parse("nonsense\n", "m"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(ColumnMapping::parse("# c\nfoo=bar\n", "m"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(ColumnMapping::parse("label.wobbly=2\n", "m"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn write_then_read_round_trips() {
        let text = format!("{}\n{}\n{}\n", header(), row("a", "side", "stable", 7), row("b", "45", "slippery", 0));
        let split = read_csv(text.as_bytes(), None, SplitKind::Train).unwrap();
        let mut buf = Vec::new();
        write_csv(&split, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), text);
        assert_eq!(read_csv(buf.as_slice(), None, SplitKind::Train).unwrap(), split);
    }
}
