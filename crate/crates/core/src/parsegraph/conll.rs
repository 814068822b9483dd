//! Tab-separated dependency parse files.
//!
//! Rows are `index form head relation` (full ten-column CoNLL-U rows are
//! accepted too; columns 7 and 8 are used). Sentences are separated by blank
//! lines and keyed by `# report_id = ...` and `# sentence_index = ...`
//! comments. Multiword-token ranges (`3-4`) and empty nodes (`5.1`) are
//! skipped.

use std::collections::HashMap;
use std::io::BufRead;

use super::{ParseError, ParseNode};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseRecord {
    pub report_id: Option<String>,
    pub sentence_index: Option<usize>,
    pub nodes: Vec<ParseNode>,
}

/// Parses keyed by `(report_id, sentence_index)`.
pub type ParseStore = HashMap<(String, usize), ParseRecord>;

/// Parses one sentence block. `first_line` is used for diagnostics.
pub fn parse_block(text: &str, first_line: usize) -> Result<ParseRecord, ParseError> {
    let mut record = ParseRecord {
        report_id: None,
        sentence_index: None,
        nodes: Vec::new(),
    };
    for (k, raw) in text.lines().enumerate() {
        let line = first_line + k;
        let row = raw.trim_end_matches('\r');
        if row.trim().is_empty() {
            continue;
        }
        if let Some(comment) = row.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                let value = value.trim();
                match key.trim() {
                    "report_id" => record.report_id = Some(value.to_owned()),
                    "sentence_index" => {
                        record.sentence_index = Some(value.parse().map_err(|_| ParseError::Malformed {
                            line,
                            message: format!("bad sentence_index '{value}'"),
                        })?)
                    }
                    _ => {}
                }
            }
            continue;
        }
        let cols: Vec<&str> = row.split('\t').collect();
        let (head_col, rel_col) = match cols.len() {
            4 => (2, 3),
            n if n >= 8 => (6, 7),
            n => {
                return Err(ParseError::Malformed {
                    line,
                    message: format!("expected 4 or 10 tab-separated columns, found {n}"),
                })
            }
        };
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let index = cols[0].parse().map_err(|_| ParseError::Malformed {
            line,
            message: format!("bad token index '{}'", cols[0]),
        })?;
        let head = cols[head_col].parse().map_err(|_| ParseError::Malformed {
            line,
            message: format!("bad head '{}'", cols[head_col]),
        })?;
        record.nodes.push(ParseNode {
            index,
            form: cols[1].to_owned(),
            head,
            relation: cols[rel_col].to_owned(),
        });
    }
    Ok(record)
}

/// Reads a whole parse file. Blocks that fail to parse or lack their keys
/// are reported in the returned diagnostics and skipped.
pub fn read_parses(reader: impl BufRead) -> std::io::Result<(ParseStore, Vec<String>)> {
    let mut store = ParseStore::new();
    let mut diagnostics = Vec::new();
    let mut block = String::new();
    let mut block_start = 1;
    let mut lines = reader.lines();
    let mut line_no = 0;
    loop {
        let next = lines.next().transpose()?;
        line_no += 1;
        let blank = next.as_deref().is_none_or(|l| l.trim().is_empty());
        if blank {
            if !block.trim().is_empty() {
                match parse_block(&block, block_start) {
                    Ok(rec) => match (rec.report_id.clone(), rec.sentence_index) {
                        (Some(r), Some(s)) => {
                            if store.contains_key(&(r.clone(), s)) {
                                diagnostics.push(format!(
                                    "line {block_start}: duplicate parse for {r}#{s}, keeping the first"
                                ));
                            } else {
                                store.insert((r, s), rec);
                            }
                        }
                        _ => diagnostics.push(format!(
                            "line {block_start}: parse block lacks report_id or sentence_index"
                        )),
                    },
                    Err(e) => diagnostics.push(e.to_string()),
                }
            }
            block.clear();
            block_start = line_no + 1;
            if next.is_none() {
                break;
            }
        } else if let Some(l) = next {
            block.push_str(&l);
            block.push('\n');
        }
    }
    Ok((store, diagnostics))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO: &str = "# report_id = r1\n# sentence_index = 0\n1\tNo\t2\tneg\n2\teffusion\t0\troot\n\n# report_id = r1\n# sentence_index = 1\n1\tStable\t0\troot\n";

    #[test]
    fn reads_keyed_blocks() {
        let (store, diags) = read_parses(TWO.as_bytes()).unwrap();
        assert!(diags.is_empty(), "{diags:?}");
        assert_eq!(store.len(), 2);
        let r = &store[&("r1".to_string(), 0)];
        assert_eq!(r.nodes.len(), 2);
        assert_eq!(r.nodes[1].relation, "root");
    }

    #[test]
    fn ten_column_rows() {
        let rec = parse_block("1\tNo\tno\tDET\t_\t_\t2\tdet\t_\t_\n2\teffusion\teffusion\tNOUN\t_\t_\t0\troot\t_\t_\n1-2\tx\t_\t_\t_\t_\t_\t_\t_\t_\n", 1).unwrap();
        assert_eq!(rec.nodes.len(), 2);
        assert_eq!(rec.nodes[0].head, 2);
        assert_eq!(rec.nodes[0].relation, "det");
    }

    #[test]
    fn bad_rows_become_diagnostics() {
        let text = "# report_id = r1\n# sentence_index = 0\n1\tNo\tx\tneg\n\n1\tlonely\t0\troot\n";
        let (store, diags) = read_parses(text.as_bytes()).unwrap();
        assert!(store.is_empty());
        assert_eq!(diags.len(), 2);
        assert!(diags[0].contains("line 3"), "{diags:?}");
    }
}
