//! CSV writers. Every file opens with a `# manifest_sha256=<hash>` comment line when a hash is
//! given, followed by a header row.

use std::io::Write;

use serde::Serialize;

use crate::ansatz::ShiftRecord;
use crate::diagnostics::{ConvergenceRow, EnergyBreakdown, InteractionKind, InteractionReport};
use crate::error::Result;
use crate::scalar::Scalar;
use crate::waves::{ApproxRarefaction, ShockProfile};
use crate::weight::WeightAlgebraReport;

fn start<W: Write>(mut out: W, manifest_hash: Option<&str>) -> Result<csv::Writer<W>> {
    if let Some(h) = manifest_hash {
        writeln!(out, "# manifest_sha256={}", h)?;
    }
    Ok(csv::Writer::from_writer(out))
}

/// Shortest round-trip form; scientific outside `[1e-4, 1e15)` so tiny tails stay short.
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn num<T: Scalar>(v: T) -> String {
    format_number(v.as_f64())
}

fn finish<W: Write>(mut w: csv::Writer<W>) -> Result<()> {
    w.flush()?;
    Ok(())
}

/// Columns `xi, U, U_xi` at the given positions.
pub fn write_profile<T: Scalar, W: Write>(out: W, manifest_hash: Option<&str>, profile: &ShockProfile<T>, xs: &[T]) -> Result<()> {
    let mut w = start(out, manifest_hash)?;
    w.write_record(["xi", "U", "U_xi"])?;
    let mut guess = None;
    for &xi in xs {
        let s = match guess {
            Some(g) => profile.s_of_xi_from(xi, g)?,
            None => profile.s_of_xi(xi)?,
        };
        guess = Some(s);
        let p = profile.sample_at_s(s);
        w.write_record([num(xi), num(p.u), num(p.u_xi)])?;
    }
    finish(w)
}

/// Columns `t, x, uR, uR_x` on the tensor product of `times` and `xs`.
pub fn write_rarefaction<T: Scalar, W: Write>(
    out: W,
    manifest_hash: Option<&str>,
    rare: &ApproxRarefaction<T>,
    times: &[T],
    xs: &[T],
) -> Result<()> {
    let mut w = start(out, manifest_hash)?;
    w.write_record(["t", "x", "uR", "uR_x"])?;
    for &t in times {
        let mut guess = None;
        for &x in xs {
            let z = rare.foot_point_from(t, x, guess)?;
            guess = Some(z);
            let s = rare.sample_at_foot(t, z)?;
            w.write_record([num(t), num(x), num(s.u), num(s.u_x)])?;
        }
    }
    finish(w)
}

/// Columns `uS, w, w1, w2, H1, H2, H1plusH2, poincare_factor`.
pub fn write_weight<T: Scalar, W: Write>(out: W, manifest_hash: Option<&str>, report: &WeightAlgebraReport<T>) -> Result<()> {
    let mut w = start(out, manifest_hash)?;
    w.write_record(["uS", "w", "w1", "w2", "H1", "H2", "H1plusH2", "poincare_factor"])?;
    for r in &report.rows {
        w.write_record([
            num(r.u_s),
            num(r.w),
            num(r.w1),
            num(r.w2),
            num(r.h1),
            num(r.h2),
            num(r.h_sum),
            num(r.poincare_factor),
        ])?;
    }
    finish(w)
}

/// Columns `t, X, Xdot`.
pub fn write_shift<T: Scalar, W: Write>(out: W, manifest_hash: Option<&str>, history: &[ShiftRecord<T>]) -> Result<()> {
    let mut w = start(out, manifest_hash)?;
    w.write_record(["t", "X", "Xdot"])?;
    for r in history {
        w.write_record([num(r.t), num(r.x), num(r.xdot)])?;
    }
    finish(w)
}

/// Columns `t, xi, u, phi`, one block per snapshot.
pub fn write_snapshots<T: Scalar, W: Write>(out: W, manifest_hash: Option<&str>, nodes: &[T], snapshots: &[(T, Vec<T>, Vec<T>)]) -> Result<()> {
    let mut w = start(out, manifest_hash)?;
    w.write_record(["t", "xi", "u", "phi"])?;
    for (t, u, phi) in snapshots {
        for ((xi, u), p) in nodes.iter().zip(u).zip(phi) {
            w.write_record([num(*t), num(*xi), num(*u), num(*p)])?;
        }
    }
    finish(w)
}

/// One row per sample time with every breakdown field.
pub fn write_diagnostics<T: Scalar + Serialize, W: Write>(out: W, manifest_hash: Option<&str>, rows: &[EnergyBreakdown<T>]) -> Result<()> {
    let mut w = start(out, manifest_hash)?;
    for r in rows {
        w.serialize(r)?;
    }
    finish(w)
}

/// Columns `t, sup_error, xdot, x_over_t`.
pub fn write_convergence<T: Scalar + Serialize, W: Write>(out: W, manifest_hash: Option<&str>, rows: &[ConvergenceRow<T>]) -> Result<()> {
    let mut w = start(out, manifest_hash)?;
    for r in rows {
        w.serialize(r)?;
    }
    finish(w)
}

/// Fitted `exponent, prefactor, R²` per integral.
pub fn write_interaction_fits<T: Scalar, W: Write>(out: W, manifest_hash: Option<&str>, report: &InteractionReport<T>) -> Result<()> {
    let mut w = start(out, manifest_hash)?;
    w.write_record(["integral", "target_exponent", "exponent", "prefactor", "r_squared", "conclusive", "log_constant"])?;
    for f in &report.fits {
        w.write_record([
            f.kind.label().to_string(),
            num(f.target_exponent),
            num(f.exponent),
            num(f.prefactor),
            num(f.r_squared),
            f.conclusive.to_string(),
            f.log_constant.map(num).unwrap_or_default(),
        ])?;
    }
    finish(w)
}

/// Raw integral values, one row per time.
pub fn write_interaction_series<T: Scalar, W: Write>(out: W, manifest_hash: Option<&str>, report: &InteractionReport<T>) -> Result<()> {
    let mut w = start(out, manifest_hash)?;
    let mut header = vec!["t".to_string()];
    header.extend(InteractionKind::ALL.iter().map(|k| k.label().to_string()));
    w.write_record(&header)?;
    for r in &report.rows {
        let mut rec = vec![num(r.t)];
        rec.extend(r.values.iter().map(|v| num(*v)));
        w.write_record(&rec)?;
    }
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waves::{ProfileOrigin, WaveParameters};

    #[test]
    fn profile_csv_has_manifest_line_and_header() {
        let params = WaveParameters::pure_shock(-2.0, 1.0).unwrap();
        let p = ShockProfile::build(params, ProfileOrigin::ZeroCrossing, 1e-12).unwrap();
        let mut buf = Vec::new();
        write_profile(&mut buf, Some("abc"), &p, &[-1.0, 0.0, 1.0]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# manifest_sha256=abc"));
        assert_eq!(lines.next(), Some("xi,U,U_xi"));
        assert_eq!(lines.nth(1).unwrap().split(',').nth(1), Some("0"));
    }
}
