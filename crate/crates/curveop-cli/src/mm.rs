//! Matrix Market coordinate writer/reader (real general, 1-based indices,
//! 17 significant digits for lossless round trips).

use std::io::Write;
use std::path::Path;

pub struct Triplets {
    pub nrows: usize,
    pub ncols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

pub fn write_matrix(path: &Path, t: &Triplets) -> std::io::Result<()> {
    let file = std::fs::File::create(path)?;
    let mut out = std::io::BufWriter::new(file);
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{} {} {}", t.nrows, t.ncols, t.entries.len())?;
    for &(i, j, v) in &t.entries {
        writeln!(out, "{} {} {:.16e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<Triplets, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {}", path.display(), e))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or("empty file")?;
    if !header.starts_with("%%MatrixMarket matrix coordinate real general") {
        return Err(format!("unsupported header: {}", header));
    }
    let mut lines = lines.skip_while(|l| l.starts_with('%'));
    let size = lines.next().ok_or("missing size line")?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse().map_err(|e| format!("bad size entry: {}", e)))
        .collect::<Result<_, _>>()?;
    if dims.len() != 3 {
        return Err("size line needs rows cols nnz".into());
    }
    let mut entries = Vec::with_capacity(dims[2]);
    for line in lines {
        if line.starts_with('%') {
            continue;
        }
        let mut it = line.split_whitespace();
        let i: usize = it
            .next()
            .ok_or("missing row")?
            .parse()
            .map_err(|e| format!("bad row: {}", e))?;
        let j: usize = it
            .next()
            .ok_or("missing col")?
            .parse()
            .map_err(|e| format!("bad col: {}", e))?;
        let v: f64 = it
            .next()
            .ok_or("missing value")?
            .parse()
            .map_err(|e| format!("bad value: {}", e))?;
        if i == 0 || j == 0 || i > dims[0] || j > dims[1] {
            return Err(format!("entry ({}, {}) out of bounds", i, j));
        }
        entries.push((i - 1, j - 1, v));
    }
    if entries.len() != dims[2] {
        return Err(format!(
            "expected {} entries, found {}",
            dims[2],
            entries.len()
        ));
    }
    Ok(Triplets {
        nrows: dims[0],
        ncols: dims[1],
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_exact() {
        let t = Triplets {
            nrows: 4,
            ncols: 3,
            entries: vec![
                (0, 0, 1.0 / 3.0),
                (2, 1, -7.125e-13),
                (3, 2, 1.2345678901234567),
            ],
        };
        let dir = std::env::temp_dir().join("curveop-mm-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("t.mtx");
        write_matrix(&path, &t).unwrap();
        let back = read_matrix(&path).unwrap();
        assert_eq!(back.nrows, 4);
        assert_eq!(back.ncols, 3);
        assert_eq!(back.entries.len(), 3);
        for (a, b) in t.entries.iter().zip(&back.entries) {
            assert_eq!(a.0, b.0);
            assert_eq!(a.1, b.1);
            assert_eq!(a.2, b.2, "value must round trip bit-exactly");
        }
    }
}
