//! Checkpoint files: a text manifest followed by raw parameter blocks.
//!
//! ```text
//! sbd-checkpoint 1
//! key=value            (any number, in order)
//! block <name> <rows> <cols>
//! vocab <n>            (optional, followed by n lines, one word each)
//! end
//! <little-endian f64 data of every block, in manifest order>
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::tensor::Tensor2;
use crate::error::{Error, Result};

const MAGIC: &str = "sbd-checkpoint 1";

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Checkpoint {
    pub meta: Vec<(String, String)>,
    pub blocks: Vec<(String, Tensor2)>,
    pub vocab: Vec<String>,
}

impl Checkpoint {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn block(&self, name: &str) -> Option<&Tensor2> {
        self.blocks.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_to(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "{MAGIC}")?;
        for (k, v) in &self.meta {
            writeln!(w, "{k}={v}")?;
        }
        for (name, t) in &self.blocks {
            writeln!(w, "block {name} {} {}", t.rows(), t.cols())?;
        }
        if !self.vocab.is_empty() {
            writeln!(w, "vocab {}", self.vocab.len())?;
            for word in &self.vocab {
                writeln!(w, "{word}")?;
            }
        }
        writeln!(w, "end")?;
        for (_, t) in &self.blocks {
            for x in t.as_slice() {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = BufReader::new(file);
        let ctx = path.display().to_string();
        let mut line = String::new();
        let mut lineno = 0;
        let mut next_line = |r: &mut BufReader<File>, line: &mut String| -> Result<usize> {
            line.clear();
            let n = r.read_line(line).map_err(|e| Error::io(path, e))?;
            lineno += 1;
            if n == 0 {
                return Err(Error::format(&ctx, lineno, "unexpected end of manifest"));
            }
            if line.ends_with('\n') {
                line.pop();
            }
            Ok(lineno)
        };
        let n = next_line(&mut r, &mut line)?;
        if line != MAGIC {
            return Err(Error::format(&ctx, n, "not a checkpoint file"));
        }
        let mut ck = Checkpoint::default();
        let mut shapes: Vec<(String, usize, usize)> = Vec::new();
        loop {
            let n = next_line(&mut r, &mut line)?;
            if line == "end" {
                break;
            }
            if let Some(rest) = line.strip_prefix("block ") {
                let parts: Vec<&str> = rest.split(' ').collect();
                match parts.as_slice() {
                    [name, rows, cols] => match (rows.parse(), cols.parse()) {
                        (Ok(rows), Ok(cols)) => shapes.push((name.to_string(), rows, cols)),
                        _ => return Err(Error::format(&ctx, n, format!("bad block shape in {line:?}"))),
                    },
                    _ => return Err(Error::format(&ctx, n, format!("malformed block line {line:?}"))),
                }
            } else if let Some(count) = line.strip_prefix("vocab ") {
                let count: usize = count
                    .parse()
                    .map_err(|_| Error::format(&ctx, n, format!("bad vocabulary size in {line:?}")))?;
                for _ in 0..count {
                    let n = next_line(&mut r, &mut line)?;
                    if line.is_empty() || line.contains(char::is_whitespace) {
                        return Err(Error::format(&ctx, n, "invalid vocabulary entry"));
                    }
                    ck.vocab.push(line.clone());
                }
            } else if let Some((k, v)) = line.split_once('=') {
                ck.meta.push((k.to_owned(), v.to_owned()));
            } else {
                return Err(Error::format(&ctx, n, format!("unrecognized manifest line {line:?}")));
            }
        }
        for (name, rows, cols) in shapes {
            let count = rows
                .checked_mul(cols)
                .and_then(|c| c.checked_mul(8))
                .ok_or_else(|| Error::format(&ctx, lineno, format!("block {name} is too large")))?;
            let mut bytes = vec![0u8; count];
            r.read_exact(&mut bytes)
                .map_err(|_| Error::format(&ctx, lineno, format!("truncated data for block {name}")))?;
            let data: Vec<f64> = bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
                .collect();
            let t = Tensor2::from_vec(rows, cols, data)
                .map_err(|e| Error::format(&ctx, lineno, format!("block {name}: {e}")))?;
            ck.blocks.push((name, t));
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest).map_err(|e| Error::io(path, e))? != 0 {
            return Err(Error::format(&ctx, lineno, "trailing bytes after the last block"));
        }
        Ok(ck)
    }
}
