//! Text vector files: a `<count> <dim>` header, then one `key<TAB>v1 v2 ...`
//! record per line. Contextual stores encode token position as a `#i` key
//! suffix.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::StoreError;

/// Streams the records of a vector file, checking the header count and that
/// every record has the declared dimension.
pub fn read_vector_file<F>(path: &Path, mut record: F) -> Result<usize, StoreError>
where
    F: FnMut(&str, Vec<f64>) -> Result<(), StoreError>,
{
    let file = File::open(path).map_err(|e| StoreError::io(path, e))?;
    read_vectors(BufReader::new(file), path, &mut record)
}

pub(crate) fn read_vectors<R: BufRead, F>(reader: R, path: &Path, record: &mut F) -> Result<usize, StoreError>
where
    F: FnMut(&str, Vec<f64>) -> Result<(), StoreError>,
{
    let at = |line: usize, msg: String| StoreError::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(h) => h.map_err(|e| StoreError::io(path, e))?,
        None => return Err(at(1, "missing header".into())),
    };
    let mut parts = header.split_whitespace();
    let (count, dim) = match (parts.next(), parts.next(), parts.next()) {
        (Some(c), Some(d), None) => (
            c.parse::<usize>().map_err(|_| at(1, format!("bad count `{c}`")))?,
            d.parse::<usize>().map_err(|_| at(1, format!("bad dimension `{d}`")))?,
        ),
        _ => return Err(at(1, "header must be `<count> <dim>`".into())),
    };
    if dim == 0 {
        return Err(at(1, "dimension must be positive".into()));
    }
    let mut seen = 0;
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line.map_err(|e| StoreError::io(path, e))?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.is_empty() {
            continue;
        }
        let (key, values) = line.rsplit_once('\t').ok_or_else(|| at(line_no, "missing tab".into()))?;
        let values: Vec<f64> = values
            .split(' ')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|_| at(line_no, format!("bad number `{s}`"))))
            .collect::<Result<_, _>>()?;
        if values.len() != dim {
            return Err(StoreError::Dimension {
                path: path.to_path_buf(),
                line: line_no,
                expected: dim,
                found: values.len(),
            });
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(at(line_no, format!("non-finite value {bad}")));
        }
        record(key, values)?;
        seen += 1;
    }
    if seen != count {
        return Err(StoreError::Count {
            path: path.to_path_buf(),
            declared: count,
            found: seen,
        });
    }
    Ok(dim)
}

/// Writes records in the given order with shortest round-trip float formatting.
pub fn write_vector_file<'a, I, V>(path: &Path, dim: usize, records: I) -> Result<(), StoreError>
where
    I: IntoIterator<Item = (&'a str, V)>,
    V: AsRef<[f64]>,
{
    let records: Vec<(&str, V)> = records.into_iter().collect();
    let file = File::create(path).map_err(|e| StoreError::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_vectors(&mut w, dim, &records).map_err(|e| StoreError::io(path, e))?;
    w.flush().map_err(|e| StoreError::io(path, e))
}

fn write_vectors<W: Write, V: AsRef<[f64]>>(w: &mut W, dim: usize, records: &[(&str, V)]) -> std::io::Result<()> {
    writeln!(w, "{} {}", records.len(), dim)?;
    for (key, values) in records {
        let values = values.as_ref();
        if key.contains(['\t', '\n', '\r']) || values.len() != dim {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidInput,
                format!("record `{key}` cannot be written (tab/newline in key or wrong dimension)"),
            ));
        }
        w.write_all(key.as_bytes())?;
        w.write_all(b"\t")?;
        for (i, v) in values.iter().enumerate() {
            if i > 0 {
                w.write_all(b" ")?;
            }
            write!(w, "{v}")?;
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Token vocabulary with one vector per token.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticStore {
    dim: usize,
    vectors: HashMap<String, Vec<f32>>,
}

impl StaticStore {
    pub fn new(dim: usize) -> Self {
        Self { dim, vectors: HashMap::new() }
    }

    pub fn load(path: &Path) -> Result<Self, StoreError> {
        let mut vectors = HashMap::new();
        let dim = read_vector_file(path, |key, v| {
            vectors.insert(key.to_string(), v.into_iter().map(|x| x as f32).collect());
            Ok(())
        })?;
        Ok(Self { dim, vectors })
    }

    pub fn insert(&mut self, token: &str, vector: &[f64]) -> Result<(), StoreError> {
        if vector.len() != self.dim {
            return Err(StoreError::Mismatch {
                expected: self.dim,
                found: vector.len(),
            });
        }
        self.vectors.insert(token.to_string(), vector.iter().map(|&x| x as f32).collect());
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<Vec<f64>> {
        self.vectors.get(token).map(|v| v.iter().map(|&x| f64::from(x)).collect())
    }

    pub fn save(&self, path: &Path) -> Result<(), StoreError> {
        let mut keys: Vec<&String> = self.vectors.keys().collect();
        keys.sort();
        let rows: Vec<(&str, Vec<f64>)> = keys.iter().map(|k| (k.as_str(), self.get(k).expect("key present"))).collect();
        write_vector_file(path, self.dim, rows.iter().map(|(k, v)| (*k, v)))
    }
}

/// Per-string token vector sequences, keyed by the exact input string.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextualStore {
    dim: usize,
    sequences: HashMap<String, Vec<Vec<f32>>>,
}

impl ContextualStore {
    pub fn new(dim: usize) -> Self {
        Self { dim, sequences: HashMap::new() }
    }

    pub fn load(path: &Path) -> Result<Self, StoreError> {
        let mut partial: HashMap<String, BTreeMap<usize, Vec<f32>>> = HashMap::new();
        let dim = read_vector_file(path, |key, v| {
            let (text, index) = split_position_key(key).ok_or_else(|| StoreError::Key {
                path: path.to_path_buf(),
                key: key.to_string(),
            })?;
            let slot = partial.entry(text.to_string()).or_default();
            if slot.insert(index, v.into_iter().map(|x| x as f32).collect()).is_some() {
                return Err(StoreError::Key {
                    path: path.to_path_buf(),
                    key: key.to_string(),
                });
            }
            Ok(())
        })?;
        let mut sequences = HashMap::with_capacity(partial.len());
        for (text, positions) in partial {
            if positions.keys().enumerate().any(|(i, &p)| i != p) {
                return Err(StoreError::Gap { path: path.to_path_buf(), key: text });
            }
            sequences.insert(text, positions.into_values().collect());
        }
        Ok(Self { dim, sequences })
    }

    pub fn insert(&mut self, text: &str, vectors: &[Vec<f64>]) -> Result<(), StoreError> {
        if vectors.is_empty() {
            return Err(StoreError::EmptySequence(text.to_string()));
        }
        if let Some(v) = vectors.iter().find(|v| v.len() != self.dim) {
            return Err(StoreError::Mismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        self.sequences.insert(
            text.to_string(),
            vectors.iter().map(|v| v.iter().map(|&x| x as f32).collect()).collect(),
        );
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn get(&self, text: &str) -> Option<Vec<Vec<f64>>> {
        self.sequences
            .get(text)
            .map(|seq| seq.iter().map(|v| v.iter().map(|&x| f64::from(x)).collect()).collect())
    }

    pub fn save(&self, path: &Path) -> Result<(), StoreError> {
        let mut keys: Vec<&String> = self.sequences.keys().collect();
        keys.sort();
        let mut rows: Vec<(String, Vec<f64>)> = Vec::new();
        for k in keys {
            for (i, v) in self.get(k).expect("key present").into_iter().enumerate() {
                rows.push((format!("{k}#{i}"), v));
            }
        }
        write_vector_file(path, self.dim, rows.iter().map(|(k, v)| (k.as_str(), v)))
    }
}

/// Splits `text#i` at the last `#`.
fn split_position_key(key: &str) -> Option<(&str, usize)> {
    let (text, index) = key.rsplit_once('#')?;
    Some((text, index.parse().ok()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn parse(text: &str) -> Result<Vec<(String, Vec<f64>)>, StoreError> {
        let mut out = Vec::new();
        read_vectors(Cursor::new(text), Path::new("mem"), &mut |k: &str, v| {
            out.push((k.to_string(), v));
            Ok(())
        })?;
        Ok(out)
    }

    #[test]
    fn parses_header_and_records() {
        let r = parse("2 3\na\t1 2 3\nb c\t0.5 -1 1e-3\n").unwrap();
        assert_eq!(r[1].0, "b c");
        assert_eq!(r[1].1, vec![0.5, -1.0, 0.001]);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(matches!(parse("1 3\na\t1 2\n"), Err(StoreError::Dimension { line: 2, .. })));
        assert!(matches!(parse("2 2\na\t1 2\n"), Err(StoreError::Count { declared: 2, found: 1, .. })));
        assert!(matches!(parse("x 2\n"), Err(StoreError::Parse { line: 1, .. })));
        assert!(matches!(parse("1 2\na 1 2\n"), Err(StoreError::Parse { line: 2, .. })));
        assert!(matches!(parse("1 1\na\tNaN\n"), Err(StoreError::Parse { .. })));
        assert!(matches!(parse(""), Err(StoreError::Parse { .. })));
    }

    #[test]
    fn contextual_round_trip_and_gaps() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ctx.vec");
        let mut s = ContextualStore::new(2);
        s.insert("battle of aden #2", &[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.25]]).unwrap();
        s.insert("doha", &[vec![0.125, 2.0]]).unwrap();
        s.save(&path).unwrap();
        let back = ContextualStore::load(&path).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.get("battle of aden #2").unwrap().len(), 3);

        std::fs::write(&path, "2 1\nx#0\t1\nx#2\t1\n").unwrap();
        assert!(matches!(ContextualStore::load(&path), Err(StoreError::Gap { .. })));
        std::fs::write(&path, "1 1\nx\t1\n").unwrap();
        assert!(matches!(ContextualStore::load(&path), Err(StoreError::Key { .. })));
    }

    #[test]
    fn static_round_trip_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("a.vec");
        let p2 = dir.path().join("b.vec");
        let mut s = StaticStore::new(3);
        s.insert("doha", &[0.1, -0.2, 0.3]).unwrap();
        s.insert("2010", &[1.0, 0.0, 0.0]).unwrap();
        s.save(&p1).unwrap();
        StaticStore::load(&p1).unwrap().save(&p2).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
        assert!(s.insert("bad", &[1.0]).is_err());
    }
}
