//! CSV writers.

use std::io::Write;

use edgeinfer_core::sweep::{SweepRow, SweepVar};

pub const HEADER: [&str; 13] = [
    "sweep_var",
    "value",
    "scheme",
    "decoder",
    "comp_s",
    "dec_s",
    "comm_s",
    "total_s",
    "total_norm",
    "param1",
    "param2",
    "param3",
    "ci95_norm",
];

fn value_field(var: SweepVar, v: f64) -> String {
    match var {
        SweepVar::K => format!("{}", v as u64),
        SweepVar::Beta => format!("{v}"),
    }
}

/// Writes `rows` with the fixed header, plus a trailing `warn_binary_mds`
/// column when `warn` is set.
pub fn write_rows<W: Write>(out: W, rows: &[SweepRow], warn: bool) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = HEADER.to_vec();
    if warn {
        header.push("warn_binary_mds");
    }
    w.write_record(&header)?;
    for r in rows {
        let l = &r.latency;
        let [p1, p2, p3] = r.design_fields();
        let mut rec = vec![
            r.var.name().to_string(),
            value_field(r.var, r.value),
            r.kind.name().to_string(),
            r.decoder.name().to_string(),
            l.comp.to_string(),
            l.dec.to_string(),
            l.comm.to_string(),
            l.total.to_string(),
            l.normalized.to_string(),
            p1,
            p2,
            p3,
            r.ci95_normalized.to_string(),
        ];
        if warn {
            rec.push(r.warn_binary_mds.to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
