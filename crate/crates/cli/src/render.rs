use std::collections::HashMap;
use std::io::Write;

use anyhow::Result;
use archgraph_core::feed::FeedItem;
use archgraph_service::ops::{
    AnalyticsReport, CommunityReport, DiffusionReport, HistogramReport, ImpactReport, ScoreRow, Subject,
};
use clap::ValueEnum;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

fn json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn csv_rows<const N: usize>(out: &mut dyn Write, header: [&str; N], rows: Vec<[String; N]>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

/// Left-aligned columns padded to the widest cell.
fn table<const N: usize>(out: &mut dyn Write, header: [&str; N], rows: Vec<[String; N]>) -> Result<()> {
    let mut widths = header.map(str::len);
    for r in &rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_owned()
    };
    writeln!(out, "{}", line(header.to_vec()))?;
    for r in &rows {
        writeln!(out, "{}", line(r.iter().map(String::as_str).collect()))?;
    }
    Ok(())
}

fn subject(s: &Subject) -> String {
    match s {
        Subject::Node { id } => id.to_string(),
        Subject::Edge { source, target } => format!("{source} -- {target}"),
    }
}

pub fn analytics(out: &mut dyn Write, report: &AnalyticsReport, format: Format) -> Result<()> {
    let row = |r: &ScoreRow, precise: bool| {
        let score = if precise { r.score.to_string() } else { format!("{:.6}", r.score) };
        [r.rank.to_string(), subject(&r.subject), score]
    };
    match format {
        Format::Json => json(out, report),
        Format::Csv => csv_rows(out, ["rank", "subject", "score"], report.results.iter().map(|r| row(r, true)).collect()),
        Format::Table => {
            writeln!(out, "{} (revision {})", report.metric, report.revision)?;
            table(out, ["rank", "subject", "score"], report.results.iter().map(|r| row(r, false)).collect())
        }
    }
}

pub fn histogram(out: &mut dyn Write, report: &HistogramReport, format: Format) -> Result<()> {
    let rows = report
        .histogram
        .buckets
        .iter()
        .map(|(d, n)| [d.to_string(), n.to_string()])
        .collect();
    match format {
        Format::Json => json(out, report),
        Format::Csv => csv_rows(out, ["degree", "components"], rows),
        Format::Table => {
            table(out, ["degree", "components"], rows)?;
            writeln!(out, "skew: {:?}", report.histogram.skew)?;
            Ok(())
        }
    }
}

pub fn communities(out: &mut dyn Write, report: &CommunityReport, format: Format) -> Result<()> {
    match format {
        Format::Json => json(out, report),
        Format::Csv => {
            let rows = report
                .communities
                .iter()
                .flat_map(|c| {
                    c.members.iter().map(move |m| {
                        [c.id.to_string(), m.id.to_string(), m.name.clone(), m.competency_id.clone(), m.accountability.to_string()]
                    })
                })
                .collect();
            csv_rows(out, ["community", "id", "name", "competency", "accountability"], rows)
        }
        Format::Table => {
            writeln!(
                out,
                "{} communities, modularity {:.6} (revision {})",
                report.count, report.modularity, report.revision
            )?;
            for c in &report.communities {
                let comps: Vec<&str> = c.competencies.iter().map(String::as_str).collect();
                let accs: Vec<String> = c.accountabilities.iter().map(|a| a.to_string()).collect();
                writeln!(
                    out,
                    "\ncommunity {} ({} members; competencies: {}; accountability: {})",
                    c.id,
                    c.members.len(),
                    comps.join(", "),
                    accs.join(", ")
                )?;
                let rows = c
                    .members
                    .iter()
                    .map(|m| [m.id.to_string(), m.name.clone(), m.competency_id.clone(), m.accountability.to_string()])
                    .collect();
                table(out, ["id", "name", "competency", "accountability"], rows)?;
            }
            Ok(())
        }
    }
}

fn impact_rows(report: &DiffusionReport, top: usize, precise: bool) -> Vec<[String; 3]> {
    report
        .impact
        .top(top)
        .into_iter()
        .enumerate()
        .map(|(k, (id, s))| {
            let score = if precise { s.to_string() } else { format!("{s:.6}") };
            [(k + 1).to_string(), id.to_string(), score]
        })
        .collect()
}

fn diffusion_header(out: &mut dyn Write, report: &DiffusionReport) -> Result<()> {
    write!(out, "{} kernel", report.kernel)?;
    if let Some(a) = report.parameters.alpha {
        write!(out, ", alpha {a}")?;
    }
    if let Some(a) = report.alpha_max {
        write!(out, " (alpha_max {a:.6})")?;
    }
    if let Some(c) = report.parameters.restart {
        write!(out, ", restart {c}")?;
    }
    writeln!(out, " (revision {})", report.revision)?;
    Ok(())
}

pub fn diffusion(out: &mut dyn Write, report: &DiffusionReport, top: usize, format: Format) -> Result<()> {
    match format {
        Format::Json => json(out, report),
        Format::Csv => csv_rows(out, ["rank", "component", "impact"], impact_rows(report, top, true)),
        Format::Table => {
            diffusion_header(out, report)?;
            table(out, ["rank", "component", "impact"], impact_rows(report, top, false))
        }
    }
}

pub fn impact(out: &mut dyn Write, report: &ImpactReport, items: &[FeedItem], top: usize, format: Format) -> Result<()> {
    let titles: HashMap<&str, &str> = items.iter().map(|i| (i.id.as_str(), i.title.as_str())).collect();
    let signal_rows = |precise: bool| {
        report
            .scoring
            .signals
            .iter()
            .take(top)
            .map(|s| {
                let num = |x: f64| if precise { x.to_string() } else { format!("{x:.4}") };
                [
                    s.component_id.to_string(),
                    format!("{:?}", s.sentiment),
                    num(s.sentiment_score),
                    num(s.relevance),
                    num(s.importance),
                    titles.get(s.item_id.as_str()).copied().unwrap_or(&s.item_id).to_owned(),
                ]
            })
            .collect()
    };
    let header = ["component", "sentiment", "score", "relevance", "importance", "item"];
    match format {
        Format::Json => json(out, report),
        Format::Csv => csv_rows(out, header, signal_rows(true)),
        Format::Table => {
            writeln!(
                out,
                "{} items, {} signals (revision {})",
                report.items,
                report.scoring.signals.len(),
                report.revision
            )?;
            table(out, header, signal_rows(false))?;
            if let Some(d) = &report.diffusion {
                writeln!(out)?;
                diffusion_header(out, d)?;
                table(out, ["rank", "component", "impact"], impact_rows(d, top, false))?;
            }
            Ok(())
        }
    }
}
