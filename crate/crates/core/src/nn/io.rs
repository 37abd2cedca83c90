//! Model file: an ASCII header terminated by a line `end`, followed by every
//! parameter as little-endian f64 in declaration order, then the optional
//! standardization statistics.
//!
//! ```text
//! umapmix-model 1
//! embed mlp relu 100,50
//! head relu -
//! d_x 8
//! d_z 50
//! d_y 1
//! scaler 8 1
//! param embed.0.weight 8 100
//! ...
//! end
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::activation::Activation;
use super::model::{EmbedSpec, HeadSpec, ModelSpec, SplitModel};
use crate::autodiff::Tensor;
use crate::data::Scaler;
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "umapmix-model";

fn widths(ws: &[usize]) -> String {
    if ws.is_empty() {
        "-".to_string()
    } else {
        ws.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
    }
}

pub fn to_bytes(model: &SplitModel) -> Vec<u8> {
    let mut h = String::new();
    let spec = model.spec();
    writeln!(h, "{MAGIC} {FORMAT_VERSION}").unwrap();
    match &spec.embed {
        EmbedSpec::Mlp { widths: ws, activation } => {
            writeln!(h, "embed mlp {activation} {}", widths(ws)).unwrap()
        }
        EmbedSpec::Lstm { input_size, hidden } => writeln!(h, "embed lstm {input_size} {hidden}").unwrap(),
    }
    writeln!(h, "head {} {}", spec.head.activation, widths(&spec.head.hidden)).unwrap();
    writeln!(h, "d_x {}", model.d_x()).unwrap();
    writeln!(h, "d_z {}", model.d_z()).unwrap();
    writeln!(h, "d_y {}", model.d_y()).unwrap();
    match model.scaler() {
        Some(_) => writeln!(h, "scaler {} {}", model.d_x(), model.d_y()).unwrap(),
        None => writeln!(h, "scaler none").unwrap(),
    }
    for p in model.params() {
        let dims: Vec<String> = p.value.shape().iter().map(usize::to_string).collect();
        writeln!(h, "param {} {}", p.name, dims.join(" ")).unwrap();
    }
    writeln!(h, "end").unwrap();

    let mut out = h.into_bytes();
    let mut put = |xs: &[f64]| {
        for x in xs {
            out.extend_from_slice(&x.to_le_bytes());
        }
    };
    for p in model.params() {
        put(p.value.data());
    }
    if let Some(s) = model.scaler() {
        put(&s.x_mean);
        put(&s.x_std);
        put(&s.y_mean);
        put(&s.y_std);
    }
    out
}

pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<SplitModel> {
    let bad = |msg: String| Error::Format {
        path: path.to_path_buf(),
        msg,
    };
    let end = bytes
        .windows(5)
        .position(|w| w == b"\nend\n")
        .ok_or_else(|| bad("missing header terminator".into()))?;
    let header = std::str::from_utf8(&bytes[..end]).map_err(|_| bad("header is not UTF-8".into()))?;
    let mut payload = &bytes[end + 5..];

    let mut lines = header.lines();
    let mut next = |what: &str| -> Result<Vec<&str>> {
        let line = lines.next().ok_or_else(|| bad(format!("missing `{what}` line")))?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.first() != Some(&what) {
            return Err(bad(format!("expected `{what}`, found `{line}`")));
        }
        Ok(parts)
    };
    let int = |s: Option<&&str>, what: &str| -> Result<usize> {
        s.and_then(|v| v.parse().ok())
            .ok_or_else(|| bad(format!("bad integer for {what}")))
    };
    let list = |s: Option<&&str>| -> Result<Vec<usize>> {
        match s {
            Some(&"-") => Ok(Vec::new()),
            Some(v) => v
                .split(',')
                .map(|w| w.parse().map_err(|_| bad(format!("bad width list `{v}`"))))
                .collect(),
            None => Err(bad("missing width list".into())),
        }
    };

    let magic = next(MAGIC)?;
    let version = int(magic.get(1), "version")?;
    if version != FORMAT_VERSION as usize {
        return Err(bad(format!("unsupported format version {version}")));
    }
    let embed = next("embed")?;
    let embed = match embed.get(1) {
        Some(&"mlp") => EmbedSpec::Mlp {
            activation: embed.get(2).ok_or_else(|| bad("missing activation".into()))?.parse()?,
            widths: list(embed.get(3))?,
        },
        Some(&"lstm") => EmbedSpec::Lstm {
            input_size: int(embed.get(2), "lstm input size")?,
            hidden: int(embed.get(3), "lstm hidden size")?,
        },
        other => return Err(bad(format!("unknown embedding kind {other:?}"))),
    };
    let head = next("head")?;
    let head = HeadSpec {
        activation: head
            .get(1)
            .ok_or_else(|| bad("missing head activation".into()))?
            .parse::<Activation>()?,
        hidden: list(head.get(2))?,
    };
    let d_x = int(next("d_x")?.get(1), "d_x")?;
    let d_z = int(next("d_z")?.get(1), "d_z")?;
    let d_y = int(next("d_y")?.get(1), "d_y")?;
    let has_scaler = next("scaler")?.get(1) != Some(&"none");

    let mut take = |n: usize| -> Result<Vec<f64>> {
        if payload.len() < 8 * n {
            return Err(bad("truncated parameter payload".into()));
        }
        let (head, rest) = payload.split_at(8 * n);
        payload = rest;
        Ok(head
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    };

    let mut values = Vec::new();
    for line in lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.first() != Some(&"param") || parts.len() < 3 {
            return Err(bad(format!("bad parameter line `{line}`")));
        }
        let dims = parts[2..]
            .iter()
            .map(|d| d.parse::<usize>().map_err(|_| bad(format!("bad dims in `{line}`"))))
            .collect::<Result<Vec<_>>>()?;
        let n = dims.iter().product();
        values.push(Tensor::new(&dims, take(n)?)?);
    }
    let scaler = if has_scaler {
        Some(Scaler {
            x_mean: take(d_x)?,
            x_std: take(d_x)?,
            y_mean: take(d_y)?,
            y_std: take(d_y)?,
        })
    } else {
        None
    };
    if !payload.is_empty() {
        return Err(bad(format!("{} trailing bytes", payload.len())));
    }
    let model = SplitModel::from_parts(ModelSpec { embed, head }, d_x, d_y, values, scaler)?;
    if model.d_z() != d_z {
        return Err(bad(format!("header d_z {d_z} disagrees with layer specs ({})", model.d_z())));
    }
    Ok(model)
}

impl SplitModel {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, to_bytes(self)).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        from_bytes(&bytes, path)
    }
}
