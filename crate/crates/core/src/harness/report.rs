use std::io::Write;

use super::experiment::RunSummary;
use super::stats::sig6;
use crate::filters::CycleDiagnostics;

pub const REPLICATE_HEADER: &str = "filter,param,replicate,rmse,eval_per_cycle,gamma_activations";
pub const SUMMARY_HEADER: &str = "filter,param,median,mean,std,q1,q3,n_replicates,n_failed";

/// One row per replicate. Failed replicates carry `nan` RMSE.
pub fn write_replicates_csv<W: Write>(out: &mut W, runs: &[RunSummary]) -> std::io::Result<()> {
    writeln!(out, "{REPLICATE_HEADER}")?;
    for run in runs {
        for r in &run.replicates {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                run.filter,
                run.param,
                r.replicate,
                r.rmse.map_or_else(|| "nan".to_string(), sig6),
                sig6(r.eval_per_cycle),
                r.gamma_activations
            )?;
        }
    }
    Ok(())
}

/// One row per experiment; `n_replicates` counts successful replicates.
pub fn write_summary_csv<W: Write>(out: &mut W, runs: &[RunSummary]) -> std::io::Result<()> {
    writeln!(out, "{SUMMARY_HEADER}")?;
    for run in runs {
        let n_ok = run.replicates.len() - run.n_failed;
        match &run.stats {
            Some(s) => writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                run.filter,
                run.param,
                sig6(s.median),
                sig6(s.mean),
                sig6(s.std),
                sig6(s.q1),
                sig6(s.q3),
                n_ok,
                run.n_failed
            )?,
            None => writeln!(out, "{},{},nan,nan,nan,nan,nan,0,{}", run.filter, run.param, run.n_failed)?,
        }
    }
    Ok(())
}

/// `step,x1,..,xn` rows.
pub fn write_trajectory_csv<W: Write>(out: &mut W, trajectory: &[Vec<f64>]) -> std::io::Result<()> {
    let n = trajectory.first().map_or(0, Vec::len);
    let header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    writeln!(out, "step,{}", header.join(","))?;
    for (k, x) in trajectory.iter().enumerate() {
        let row: Vec<String> = x.iter().map(|&v| sig6(v)).collect();
        writeln!(out, "{k},{}", row.join(","))?;
    }
    Ok(())
}

/// Per-cycle diagnostics with the instantaneous analysis error.
pub fn write_cycles_csv<W: Write>(
    out: &mut W,
    analysis: &[Vec<f64>],
    truth: &[Vec<f64>],
    diagnostics: &[CycleDiagnostics],
) -> std::io::Result<()> {
    writeln!(out, "cycle,error,gamma,chol_jitter,evaluations,innovation_norm")?;
    for (k, d) in diagnostics.iter().enumerate() {
        let (a, t) = (&analysis[k + 1], &truth[k + 1]);
        let err = (a.iter().zip(t).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64).sqrt();
        writeln!(
            out,
            "{},{},{},{},{},{}",
            k + 1,
            sig6(err),
            sig6(d.gamma),
            sig6(d.chol_jitter),
            d.evaluations,
            sig6(d.innovation_norm)
        )?;
    }
    Ok(())
}
