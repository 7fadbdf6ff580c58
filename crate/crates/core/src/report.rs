//! Text and CSV renderings of slot reports, verdicts and cost sheets.

use std::io::{self, Write};

use crate::cost::CostSheet;
use crate::harness::{CellResult, Verdict};
use crate::num::Count;
use crate::pqueue::{Diagnostics, SlotReport};
use crate::trace::format_event;

fn id_or_dash<T: std::fmt::Display>(x: Option<T>) -> String {
    x.map_or_else(|| "-".to_string(), |v| v.to_string())
}

/// `<t> D <id|-> L <id|-> G <inflow per group, comma separated>`
pub fn slot_line(r: &SlotReport) -> String {
    let inflow: Vec<String> = r.inflow.iter().map(|n| n.to_string()).collect();
    format!("{} D {} L {} G {}", r.t, id_or_dash(r.departure), id_or_dash(r.loss), inflow.join(","))
}

/// Slot lines followed by a `#`-prefixed summary block.
pub fn write_slot_reports<W: Write>(mut w: W, reports: &[SlotReport], diag: &Diagnostics) -> io::Result<()> {
    for r in reports {
        writeln!(w, "{}", slot_line(r))?;
    }
    let departures = reports.iter().filter(|r| r.departure.is_some()).count();
    let losses = reports.iter().filter(|r| r.loss.is_some()).count();
    writeln!(w, "# summary")?;
    writeln!(w, "# slots {}", reports.len())?;
    writeln!(w, "# departures {departures}")?;
    writeln!(w, "# losses {losses}")?;
    writeln!(w, "# max_inflow {}", diag.max_inflow)?;
    writeln!(w, "# max_spread {}", diag.max_spread)?;
    writeln!(w, "# rank_checks {}", diag.rank_checks)?;
    writeln!(w, "# drift_checks {}", diag.drift_checks)?;
    writeln!(w, "# violations {}", diag.violations())?;
    Ok(())
}

pub const VERDICT_CSV_HEADER: &str =
    "m,mode,pattern,seed,slots,verdict,max_inflow,max_spread,violations,wall_ms";

pub fn verdict_csv_row(r: &CellResult) -> String {
    let rep = &r.report;
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        r.cell.setup.m,
        r.cell.setup.kind,
        r.cell.spec.pattern,
        r.cell.spec.seed,
        rep.slots,
        rep.verdict,
        rep.tallies.max_inflow,
        rep.tallies.max_spread,
        rep.tallies.violations(),
        rep.wall.as_millis()
    )
}

/// One `cell` line per result, plus `divergence` and `counterexample`
/// lines under divergent cells.
pub fn write_verdicts_text<W: Write>(mut w: W, results: &[CellResult]) -> io::Result<()> {
    for r in results {
        let rep = &r.report;
        let t = &rep.tallies;
        let mutation = r.cell.setup.mutation.map_or_else(|| "none".to_string(), |m| m.to_string());
        writeln!(
            w,
            "cell m={} mode={} mutation={} pattern={} p_arrival={} p_control={} seed={} slots={} verdict={} \
             max_inflow={} max_spread={} rank_checks={} drift_checks={} rank_window_violations={} \
             drift_violations={} mux_losses={} violations={} wall_ms={}",
            r.cell.setup.m,
            r.cell.setup.kind,
            mutation,
            r.cell.spec.pattern,
            r.cell.spec.p_arrival,
            r.cell.spec.p_control,
            r.cell.spec.seed,
            rep.slots,
            rep.verdict,
            t.max_inflow,
            t.max_spread,
            t.rank_checks,
            t.drift_checks,
            t.rank_window_violations,
            t.drift_violations,
            t.mux_losses,
            t.violations(),
            rep.wall.as_millis()
        )?;
        if let Some(d) = &rep.divergence {
            writeln!(
                w,
                "  divergence slot={} expected=\"{}\" actual=\"{}\" reason=\"{}\"",
                d.slot,
                d.expected,
                d.actual.map_or_else(|| "fault".to_string(), |a| a.to_string()),
                d.reason
            )?;
        }
        if let Some(ce) = &r.counterexample {
            writeln!(w, "  counterexample slots={}", ce.len())?;
            for ev in ce {
                writeln!(w, "    {}", format_event(ev))?;
            }
        }
    }
    Ok(())
}

pub fn write_verdicts_csv<W: Write>(mut w: W, results: &[CellResult]) -> io::Result<()> {
    writeln!(w, "{VERDICT_CSV_HEADER}")?;
    for r in results {
        writeln!(w, "{}", verdict_csv_row(r))?;
    }
    Ok(())
}

/// Totals line for a sweep: cell counts per verdict.
pub fn sweep_summary(results: &[CellResult]) -> String {
    let exact = results.iter().filter(|r| r.report.verdict == Verdict::Exact).count();
    let max_inflow = results.iter().map(|r| r.report.tallies.max_inflow).max().unwrap_or(0);
    let max_spread = results.iter().map(|r| r.report.tallies.max_spread).max().unwrap_or(0);
    format!(
        "summary cells={} exact={} divergent={} max_inflow={} max_spread={}",
        results.len(),
        exact,
        results.len() - exact,
        max_inflow,
        max_spread
    )
}

pub const COST_CSV_HEADER: &str =
    "m,main_switch,small_switch_size,small_switch_count,fibers,combined_switch,combined_fibers";

/// One CSV row per small-switch size.
pub fn write_cost_csv<W: Write, T: Count>(mut w: W, sheets: &[CostSheet<T>]) -> io::Result<()> {
    writeln!(w, "{COST_CSV_HEADER}")?;
    for s in sheets {
        for (size, count) in &s.small_switches {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                s.m, s.main_switch_size, size, count, s.fiber_count, s.combined.switch_size, s.combined.fiber_count
            )?;
        }
    }
    Ok(())
}

pub fn write_cost_table<W: Write, T: Count>(mut w: W, sheets: &[CostSheet<T>]) -> io::Result<()> {
    for s in sheets {
        writeln!(w, "m = {}", s.m)?;
        writeln!(w, "  main switch          {0}x{0}", s.main_switch_size)?;
        for (size, count) in &s.small_switches {
            writeln!(w, "  small switches       {count} x ({size}x{size})")?;
        }
        writeln!(w, "  fiber delay lines    {}", s.fiber_count)?;
        writeln!(w, "  combined switch      {0}x{0}", s.combined.switch_size)?;
        writeln!(w, "  combined fibers      {}", s.combined.fiber_count)?;
    }
    Ok(())
}
