use crate::error::{Error, Result};

/// Split a delimiter-encoded table into trimmed cells. Trailing empty rows
/// are dropped; every row must have as many cells as the header.
pub fn split_table(raw: &str, cell_delim: &str, row_delim: &str) -> Result<Vec<Vec<String>>> {
    if cell_delim.is_empty() || row_delim.is_empty() {
        return Err(Error::arg("table delimiters must be non-empty"));
    }
    let mut lines: Vec<&str> = raw
        .split(row_delim)
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .collect();
    while lines.last().is_some_and(|l| l.trim().is_empty()) {
        lines.pop();
    }
    if lines.is_empty() {
        return Err(Error::arg("empty table"));
    }
    let rows: Vec<Vec<String>> = lines
        .iter()
        .map(|l| l.split(cell_delim).map(|c| c.trim().to_string()).collect())
        .collect();
    let width = rows[0].len();
    for (i, row) in rows.iter().enumerate().skip(1) {
        if row.len() != width {
            return Err(Error::Structure(format!(
                "row {i} has {} cells, expected {width}",
                row.len()
            )));
        }
    }
    Ok(rows)
}

/// One `header: cell; header: cell` line per data row.
pub fn linearize_table(raw: &str, cell_delim: &str, row_delim: &str) -> Result<String> {
    let rows = split_table(raw, cell_delim, row_delim)?;
    let header = &rows[0];
    let lines: Vec<String> = rows[1..]
        .iter()
        .map(|row| {
            header
                .iter()
                .zip(row)
                .map(|(h, c)| format!("{h}: {c}"))
                .collect::<Vec<_>>()
                .join("; ")
        })
        .collect();
    Ok(lines.join("\n"))
}

/// [`linearize_table`] with `|` cells and newline rows.
pub fn linearize(raw: &str) -> Result<String> {
    linearize_table(raw, "|", "\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linearizes_rows() {
        assert_eq!(linearize("rank|nation\n1|SWE").unwrap(), "rank: 1; nation: SWE");
        assert_eq!(linearize("rank|name|wins\n1|jack|3\n").unwrap(), "rank: 1; name: jack; wins: 3");
        assert_eq!(linearize(" a | b \n 1 |2\n3| 4").unwrap(), "a: 1; b: 2\na: 3; b: 4");
    }

    #[test]
    fn header_only_is_empty() {
        assert_eq!(linearize("a|b").unwrap(), "");
    }

    #[test]
    fn ragged_row_names_index() {
        let err = linearize("a|b\n1|2\n3").unwrap_err();
        assert!(matches!(err, Error::Structure(_)));
        assert_eq!(err.to_string(), "structural error: row 2 has 1 cells, expected 2");
    }

    #[test]
    fn empty_input_rejected() {
        assert!(matches!(linearize(""), Err(Error::Argument(_))));
        assert!(matches!(linearize("\n\n"), Err(Error::Argument(_))));
    }

    #[test]
    fn custom_delimiters() {
        assert_eq!(linearize_table("x,y;1,2", ",", ";").unwrap(), "x: 1; y: 2");
    }
}
