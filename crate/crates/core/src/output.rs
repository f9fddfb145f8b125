//! Plain-text serialisation of trajectories and orbit diagrams.

use std::fmt::Write as _;

use crate::bifurcation::OrbitDiagram;
use crate::dynamics::TrajectoryRecord;

/// Shortest representation that parses back to the same `f64`.
pub fn format_f64(x: f64) -> String {
    format!("{x:?}")
}

/// `x` rounded to `digits` significant digits with trailing zeros removed,
/// e.g. `0.0037999999999999995` → `"0.0038"` for four digits.
pub fn format_significant(x: f64, digits: usize) -> String {
    if !x.is_finite() || x == 0.0 || digits == 0 {
        return format_f64(x);
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = digits as i64 - 1 - magnitude;
    let mut s = if decimals > 0 {
        format!("{:.*}", decimals as usize, x)
    } else {
        let scale = 10f64.powi((-decimals) as i32);
        format!("{}", (x / scale).round() * scale)
    };
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

/// Header `t,m_1..m_n,v_1..v_n,w_1..w_n` and one row per recorded state.
pub fn trajectory_csv(record: &TrajectoryRecord) -> String {
    let n = record.objective.dim();
    let mut out = String::from("t");
    for block in ["m", "v", "w"] {
        for i in 1..=n {
            let _ = write!(out, ",{block}_{i}");
        }
    }
    out.push('\n');
    for (t, x) in &record.states {
        out.push_str(&t.to_string());
        for value in x.components() {
            out.push(',');
            out.push_str(&format_f64(value));
        }
        out.push('\n');
    }
    out
}

/// Header `alpha,w_sample,period_label`, one row per sampled weight
/// component, and a `# predicted_bifurcation=` footer. A diverged sample
/// contributes one row with an empty weight and the label `diverged`.
pub fn sweep_csv(diagram: &OrbitDiagram) -> String {
    let mut out = String::from("alpha,w_sample,period_label\n");
    for sample in &diagram.samples {
        let alpha = format_f64(sample.param_value);
        let label = match sample.period {
            Some(period) if !sample.diverged => period.label(),
            _ => "diverged".to_string(),
        };
        if sample.diverged {
            let _ = writeln!(out, "{alpha},,{label}");
            continue;
        }
        for w in &sample.w_samples {
            for value in w {
                let _ = writeln!(out, "{alpha},{},{label}", format_f64(*value));
            }
        }
    }
    let footer = diagram.predicted_bifurcation.map_or_else(|| "none".to_string(), |a| format_significant(a, 4));
    let _ = writeln!(out, "# predicted_bifurcation={footer}");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_significant(0.0037999999999999995, 4), "0.0038");
        assert_eq!(format_significant(0.00075000054, 4), "0.00075");
        assert_eq!(format_significant(0.6, 4), "0.6");
        assert_eq!(format_significant(123456.0, 4), "123500");
        assert_eq!(format_significant(-2.5e-7, 2), "-0.00000025");
    }

    #[test]
    fn round_trip_formatting() {
        for x in [0.1, 1.0 / 3.0, 2.220446049250313e-16, -1.281144718e-5, 1e300, 0.0] {
            assert_eq!(format_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
