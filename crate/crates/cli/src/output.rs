use std::fs;
use std::io::{self, Write};
use std::path::Path;

use rmf_core::numfmt::sig17;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{Map, Value};

/// Pretty JSON with every float written to 17 significant digits.
struct Sig17<'a>(PrettyFormatter<'a>);

impl Formatter for Sig17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        if v.is_finite() {
            w.write_all(sig17(v).as_bytes())
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json_bytes(value: &Value) -> Vec<u8> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17(PrettyFormatter::with_indent(b"  ")));
    serde::Serialize::serialize(value, &mut ser).expect("serializing a Value into memory cannot fail");
    buf.push(b'\n');
    buf
}

/// Replay header shared by every output.
pub struct Echo {
    pub command: &'static str,
    pub seed: u64,
    pub params: Value,
}

impl Echo {
    /// `{"command", "version", "seed", "params", ...results}`.
    pub fn json(&self, results: Value) -> Value {
        let mut obj = Map::new();
        obj.insert("command".into(), self.command.into());
        obj.insert("version".into(), rmf_core::VERSION.into());
        obj.insert("seed".into(), self.seed.into());
        obj.insert("params".into(), self.params.clone());
        match results {
            Value::Object(m) => obj.extend(m),
            other => {
                obj.insert("result".into(), other);
            }
        }
        Value::Object(obj)
    }

    /// `#` comment lines carrying the same header, for CSV output.
    pub fn csv_header(&self) -> String {
        let params = String::from_utf8(compact(&self.params)).expect("JSON is UTF-8");
        format!(
            "# command={} version={} seed={}\n# params={}\n",
            self.command,
            rmf_core::VERSION,
            self.seed,
            params
        )
    }
}

fn compact(v: &Value) -> Vec<u8> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17Compact);
    serde::Serialize::serialize(v, &mut ser).expect("in-memory serialization");
    buf
}

struct Sig17Compact;

impl Formatter for Sig17Compact {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        if v.is_finite() {
            w.write_all(sig17(v).as_bytes())
        } else {
            w.write_all(b"null")
        }
    }
}

/// Writes `bytes` to `path` via a temporary sibling and a rename, so a
/// failed run never leaves a partial file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name"))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}
