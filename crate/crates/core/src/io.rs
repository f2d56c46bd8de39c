//! Line-oriented text format for models.
//!
//! ```text
//! OGMTEXT 1 minsum
//! variables 2 2 2
//! function 0 explicit 1 2 0.20000000000000001 0.80000000000000004
//! function 1 potts 2 2 0 0.29999999999999999
//! factor 0 1 0
//! factor 1 2 0 1
//! x-author anything after an x- keyword is kept verbatim
//! ```
//!
//! Function payloads:
//!
//! * `explicit <k> <shape…> <values…>` (row-major)
//! * `potts <n1> <n2> <value_equal> <value_unequal>`
//! * `truncated-abs-diff <n1> <n2> <weight> <truncation>`
//! * `sparse <k> <shape…> <default> <m> (<coords…> <value>)×m`
//!
//! Reals are written with 17 significant digits, which round-trips every
//! `f64`. Blank lines and lines starting with `#` are ignored. Extension lines
//! are written back after the factor records, in their original order.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::algebra::{Semiring, Value};
use crate::error::{Error, Result};
use crate::model::{FunctionEncoding, GraphicalModel, LabelSpace, Labeling};

pub const FORMAT_NAME: &str = "OGMTEXT";
pub const FORMAT_VERSION: u32 = 1;

/// Formats `x` like C's `%.17g`, with `inf` / `-inf` for infinities.
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent in scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..17).contains(&exp) {
        format!("{}e{exp}", strip_zeros(mantissa))
    } else {
        let fixed = format!("{x:.*}", (16 - exp) as usize);
        strip_zeros(&fixed).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn parse_real(token: &str) -> Option<f64> {
    let v: f64 = token.parse().ok()?;
    (!v.is_nan()).then_some(v)
}

/// A loaded model together with the extension lines found in its file.
#[derive(Debug, Clone)]
pub struct ModelFile {
    pub model: GraphicalModel,
    pub extensions: Vec<String>,
}

impl ModelFile {
    pub fn new(model: GraphicalModel) -> Self {
        ModelFile {
            model,
            extensions: Vec::new(),
        }
    }
}

pub fn write_model<W: Write + ?Sized>(
    out: &mut W,
    model: &GraphicalModel,
    extensions: &[String],
) -> Result<()> {
    writeln!(out, "{FORMAT_NAME} {FORMAT_VERSION} {}", model.semiring())?;
    write!(out, "variables {}", model.num_variables())?;
    for &c in model.space().counts() {
        write!(out, " {c}")?;
    }
    writeln!(out)?;
    for (id, f) in model.functions().iter().enumerate() {
        write!(out, "function {id} {}", f.kind())?;
        match f {
            FunctionEncoding::ExplicitDense { shape, values } => {
                write_shape(out, shape)?;
                for &v in values {
                    write!(out, " {}", format_real(v))?;
                }
            }
            FunctionEncoding::Potts {
                n1,
                n2,
                value_equal,
                value_unequal,
            } => write!(
                out,
                " {n1} {n2} {} {}",
                format_real(*value_equal),
                format_real(*value_unequal)
            )?,
            FunctionEncoding::TruncatedAbsDiff {
                n1,
                n2,
                weight,
                truncation,
            } => write!(
                out,
                " {n1} {n2} {} {}",
                format_real(*weight),
                format_real(*truncation)
            )?,
            FunctionEncoding::Sparse {
                shape,
                default,
                entries,
            } => {
                write_shape(out, shape)?;
                write!(out, " {} {}", format_real(*default), entries.len())?;
                for (coords, &v) in entries {
                    for c in coords {
                        write!(out, " {c}")?;
                    }
                    write!(out, " {}", format_real(v))?;
                }
            }
        }
        writeln!(out)?;
    }
    for factor in model.factors() {
        write!(
            out,
            "factor {} {}",
            factor.function().index(),
            factor.arity()
        )?;
        for v in factor.variables() {
            write!(out, " {v}")?;
        }
        writeln!(out)?;
    }
    for line in extensions {
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn write_shape<W: Write + ?Sized>(out: &mut W, shape: &[usize]) -> Result<()> {
    write!(out, " {}", shape.len())?;
    for n in shape {
        write!(out, " {n}")?;
    }
    Ok(())
}

pub fn to_string(model: &GraphicalModel, extensions: &[String]) -> String {
    let mut buf = Vec::new();
    write_model(&mut buf, model, extensions).expect("writing to memory");
    String::from_utf8(buf).expect("format is ASCII")
}

pub fn save(path: impl AsRef<Path>, model: &GraphicalModel, extensions: &[String]) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    match write_model(&mut out, model, extensions) {
        Err(Error::Stream(e)) => return Err(io_err(e)),
        other => other?,
    }
    out.flush().map_err(io_err)
}

pub fn load(path: impl AsRef<Path>) -> Result<ModelFile> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::open(path).map_err(io_err)?;
    match read_model(BufReader::new(file)) {
        Err(Error::Stream(e)) => Err(io_err(e)),
        other => other,
    }
}

pub fn from_str(text: &str) -> Result<ModelFile> {
    read_model(text.as_bytes())
}

/// Cursor over the whitespace-separated tokens of one record.
struct Tokens<'a> {
    line: usize,
    iter: std::str::SplitWhitespace<'a>,
}

impl<'a> Tokens<'a> {
    fn next(&mut self, what: &str) -> Result<&'a str> {
        self.iter
            .next()
            .ok_or_else(|| Error::parse(self.line, format!("missing {what}")))
    }

    fn usize(&mut self, what: &str) -> Result<usize> {
        let tok = self.next(what)?;
        tok.parse()
            .map_err(|_| Error::parse(self.line, format!("expected {what}, found `{tok}`")))
    }

    fn real(&mut self, what: &str) -> Result<f64> {
        let tok = self.next(what)?;
        parse_real(tok)
            .ok_or_else(|| Error::parse(self.line, format!("expected {what}, found `{tok}`")))
    }

    fn shape(&mut self) -> Result<Vec<usize>> {
        let k = self.usize("arity")?;
        (0..k).map(|_| self.usize("shape entry")).collect()
    }

    fn finish(mut self) -> Result<()> {
        match self.iter.next() {
            None => Ok(()),
            Some(tok) => Err(Error::parse(
                self.line,
                format!("unexpected trailing token `{tok}`"),
            )),
        }
    }
}

fn at_line(line: usize, e: Error) -> Error {
    Error::Record {
        line,
        source: Box::new(e),
    }
}

pub fn read_model<R: BufRead>(input: R) -> Result<ModelFile> {
    let mut semiring: Option<Semiring> = None;
    let mut model: Option<GraphicalModel> = None;
    let mut extensions = Vec::new();
    let mut last_line = 0;

    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        last_line = lineno;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = Tokens {
            line: lineno,
            iter: trimmed.split_whitespace(),
        };
        let keyword = tokens.next("keyword")?;

        let Some(s) = semiring else {
            if keyword != FORMAT_NAME {
                return Err(Error::parse(
                    lineno,
                    format!("expected `{FORMAT_NAME}` header"),
                ));
            }
            let version = tokens.next("format version")?;
            if version != FORMAT_VERSION.to_string() {
                return Err(Error::UnsupportedVersion {
                    found: version.to_string(),
                    expected: FORMAT_VERSION,
                });
            }
            let name = tokens.next("semi-ring")?;
            semiring = Some(
                name.parse()
                    .map_err(|_| Error::parse(lineno, format!("unknown semi-ring `{name}`")))?,
            );
            tokens.finish()?;
            continue;
        };

        if keyword.starts_with("x-") {
            extensions.push(line.trim_end_matches('\r').to_string());
            continue;
        }

        if keyword == "variables" {
            if model.is_some() {
                return Err(Error::parse(lineno, "duplicate `variables` record"));
            }
            let n = tokens.usize("variable count")?;
            let counts: Vec<usize> = (0..n)
                .map(|_| tokens.usize("label count"))
                .collect::<Result<_>>()?;
            tokens.finish()?;
            model = Some(if counts.is_empty() {
                GraphicalModel::empty(s)
            } else {
                let space =
                    LabelSpace::new(counts).map_err(|e| Error::parse(lineno, e.to_string()))?;
                GraphicalModel::new(space, s)?
            });
            continue;
        }

        let Some(m) = model.as_mut() else {
            return Err(Error::parse(
                lineno,
                format!("`{keyword}` before `variables` record"),
            ));
        };
        match keyword {
            "function" => {
                let id = tokens.usize("function id")?;
                if id != m.num_functions() {
                    return Err(Error::parse(
                        lineno,
                        format!(
                            "function id {id} out of sequence (expected {})",
                            m.num_functions()
                        ),
                    ));
                }
                let encoding = read_encoding(&mut tokens)?;
                tokens.finish()?;
                m.add_function(encoding).map_err(|e| at_line(lineno, e))?;
            }
            "factor" => {
                let fid = tokens.usize("function id")?;
                let k = tokens.usize("factor arity")?;
                let vars: Vec<usize> = (0..k)
                    .map(|_| tokens.usize("variable index"))
                    .collect::<Result<_>>()?;
                tokens.finish()?;
                let id = m
                    .function_id(fid)
                    .ok_or(Error::NotFound(fid))
                    .map_err(|e| at_line(lineno, e))?;
                m.add_factor(&id, &vars).map_err(|e| at_line(lineno, e))?;
            }
            other => return Err(Error::parse(lineno, format!("unknown record `{other}`"))),
        }
    }

    if semiring.is_none() {
        return Err(Error::parse(
            last_line + 1,
            format!("missing `{FORMAT_NAME}` header"),
        ));
    }
    let model = model.ok_or_else(|| Error::parse(last_line + 1, "missing `variables` record"))?;
    Ok(ModelFile { model, extensions })
}

fn read_encoding(tokens: &mut Tokens<'_>) -> Result<FunctionEncoding> {
    let kind = tokens.next("function kind")?;
    Ok(match kind {
        "explicit" => {
            let shape = tokens.shape()?;
            let len: usize = shape.iter().product();
            let values = (0..len)
                .map(|_| tokens.real("table value"))
                .collect::<Result<_>>()?;
            FunctionEncoding::ExplicitDense { shape, values }
        }
        "potts" => FunctionEncoding::Potts {
            n1: tokens.usize("label count")?,
            n2: tokens.usize("label count")?,
            value_equal: tokens.real("value")?,
            value_unequal: tokens.real("value")?,
        },
        "truncated-abs-diff" => FunctionEncoding::TruncatedAbsDiff {
            n1: tokens.usize("label count")?,
            n2: tokens.usize("label count")?,
            weight: tokens.real("weight")?,
            truncation: tokens.real("truncation")?,
        },
        "sparse" => {
            let shape = tokens.shape()?;
            let default = tokens.real("default value")?;
            let m = tokens.usize("entry count")?;
            let mut entries = BTreeMap::new();
            for _ in 0..m {
                let coords: Vec<usize> = (0..shape.len())
                    .map(|_| tokens.usize("entry coordinate"))
                    .collect::<Result<_>>()?;
                let v = tokens.real("entry value")?;
                if entries.insert(coords, v).is_some() {
                    return Err(Error::parse(tokens.line, "duplicate sparse entry"));
                }
            }
            FunctionEncoding::Sparse {
                shape,
                default,
                entries,
            }
        }
        other => {
            return Err(Error::parse(
                tokens.line,
                format!("unknown function kind `{other}`"),
            ))
        }
    })
}

/// Reads a labeling written one label per line.
pub fn read_labeling<R: BufRead>(input: R) -> Result<Labeling> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        out.push(
            t.parse()
                .map_err(|_| Error::parse(i + 1, format!("expected a label, found `{t}`")))?,
        );
    }
    Ok(out)
}

pub fn write_labeling<W: Write + ?Sized>(out: &mut W, labeling: &[usize]) -> Result<()> {
    for l in labeling {
        writeln!(out, "{l}")?;
    }
    Ok(())
}

/// Formats a sequence of values separated by single spaces.
pub fn format_values(values: &[Value]) -> String {
    values
        .iter()
        .map(|&v| format_real(v))
        .collect::<Vec<_>>()
        .join(" ")
}
