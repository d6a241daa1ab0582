//! Plot-ready CSV and JSON writers. Every float is printed with 17
//! significant digits so that files round-trip exactly.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::Formatter;

use crate::characteristics::CharTrace;
use crate::dynamics::State;
use crate::integrator::SeriesRecord;

pub const SERIES_HEADER: &str =
    "t,Hs_u,Hs_sigma,L2_u,L2_sigma,Linf_u,Linf_sigma,inf_ux,sup_ux,m_chi";

/// `x` in scientific notation with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn row(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| fmt_f64(*v))
        .collect::<Vec<_>>()
        .join(",")
}

fn create(path: &Path) -> io::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

pub fn write_series(path: &Path, series: &[SeriesRecord]) -> io::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{SERIES_HEADER}")?;
    for r in series {
        let v = [
            r.t,
            r.hs_u,
            r.hs_sigma,
            r.l2_u,
            r.l2_sigma,
            r.linf_u,
            r.linf_sigma,
            r.inf_ux,
            r.sup_ux,
            r.m_chi,
        ];
        writeln!(w, "{}", row(&v))?;
    }
    w.flush()
}

/// Long format: one row per (frame, grid point).
pub fn write_frames(path: &Path, frames: &[State]) -> io::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "t,x,u,sigma")?;
    for f in frames {
        let grid = f.grid();
        for (j, (u, s)) in f.u.values().iter().zip(f.sigma.values()).enumerate() {
            writeln!(w, "{}", row(&[f.t, grid.x(j), *u, *s]))?;
        }
    }
    w.flush()
}

pub fn write_traces(path: &Path, trace: &CharTrace) -> io::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "seed,t,position,jacobian,jacobian_fd")?;
    for (i, seed) in trace.seeds.iter().enumerate() {
        for (k, t) in trace.times.iter().enumerate() {
            let v = [
                *seed,
                *t,
                trace.positions[i][k],
                trace.jacobians[i][k],
                trace.jacobians_fd[i][k],
            ];
            writeln!(w, "{}", row(&v))?;
        }
    }
    w.flush()
}

/// Generic table with a caller-supplied header.
pub fn write_table(path: &Path, header: &str, rows: &[Vec<f64>]) -> io::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{header}")?;
    for r in rows {
        writeln!(w, "{}", row(r))?;
    }
    w.flush()
}

/// Pretty JSON formatter that prints floats with 17 significant digits.
struct FullPrecision<'a>(serde_json::ser::PrettyFormatter<'a>);

macro_rules! forward {
    ($($name:ident),*) => {
        $(fn $name<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
            self.0.$name(w)
        })*
    };
}

impl Formatter for FullPrecision<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    forward!(
        begin_array,
        end_array,
        end_array_value,
        begin_object,
        end_object
    );
    forward!(begin_object_value, end_object_value);
}

pub fn to_json_string<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let fmt = FullPrecision(serde_json::ser::PrettyFormatter::new());
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let text = to_json_string(value).map_err(io::Error::other)?;
    std::fs::write(path, text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
        }
    }

    #[test]
    fn json_uses_full_precision() {
        #[derive(Serialize)]
        struct S {
            a: f64,
            b: Vec<f64>,
            c: Option<f64>,
        }
        let text = to_json_string(&S {
            a: 0.1,
            b: vec![1.0, f64::INFINITY],
            c: None,
        })
        .unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["a"].as_f64(), Some(0.1));
        assert!(text.contains("1.0000000000000001e-1"));
        assert!(v["b"][1].is_null());
    }
}
