use std::path::Path;

use cdsp_core::{BivariateSample, CdspError, Result};

fn tokens(line: &str) -> Vec<&str> {
    line.split(|c: char| c == ',' || c == ';' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .collect()
}

/// Two numeric columns separated by whitespace, commas or semicolons.
/// A single non-numeric first line is taken as a header; `#` starts a comment.
pub fn read_two_columns(path: &Path) -> Result<BivariateSample> {
    let text = std::fs::read_to_string(path).map_err(|e| CdspError::InvalidInput(format!("{}: {e}", path.display())))?;
    let err = |line: usize, msg: String| CdspError::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    let mut seen_content = false;
    for (k, raw) in text.lines().enumerate() {
        let lineno = k + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks = tokens(line);
        let parsed: Vec<Option<f64>> = toks.iter().map(|t| t.parse::<f64>().ok()).collect();
        if !seen_content && parsed.iter().any(Option::is_none) {
            seen_content = true;
            if toks.len() != 2 {
                return Err(err(lineno, format!("expected 2 columns, found {}", toks.len())));
            }
            continue;
        }
        seen_content = true;
        if toks.len() != 2 {
            return Err(err(lineno, format!("expected 2 columns, found {}", toks.len())));
        }
        for (t, p) in toks.iter().zip(&parsed) {
            match p {
                Some(v) if v.is_finite() => {}
                _ => return Err(err(lineno, format!("not a finite number: {t:?}"))),
            }
        }
        xs.push(parsed[0].unwrap_or_default());
        ys.push(parsed[1].unwrap_or_default());
    }
    if xs.is_empty() {
        return Err(CdspError::InvalidInput(format!("{}: no data rows", path.display())));
    }
    BivariateSample::new(xs, ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(text: &str) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.txt");
        std::fs::write(&p, text).unwrap();
        (dir, p)
    }

    #[test]
    fn accepts_header_and_mixed_separators() {
        let (_d, p) = write("x,y\n1,2\n3 4\n5;6\n# note\n\n7\t8\n");
        let s = read_two_columns(&p).unwrap();
        assert_eq!(s.xs(), &[1.0, 3.0, 5.0, 7.0]);
        assert_eq!(s.ys(), &[2.0, 4.0, 6.0, 8.0]);
    }

    #[test]
    fn reports_line_of_bad_token() {
        let (_d, p) = write("1 2\n3 4\n5 abc\n");
        match read_two_columns(&p) {
            Err(CdspError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_wrong_width_and_empty() {
        let (_d, p) = write("1 2 3\n4 5 6\n7 8 9\n");
        assert!(read_two_columns(&p).is_err());
        let (_d, p) = write("");
        assert!(read_two_columns(&p).is_err());
    }
}
