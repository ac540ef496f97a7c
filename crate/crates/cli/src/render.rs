//! Plain-text report tables, one row per campaign, metrics shown as
//! percent mean +- std over folds.

use gaitctx::eval::{MeanStd, MetricsReport};

fn cell(ms: Option<&MeanStd>) -> String {
    match ms {
        Some(ms) => format!("{:.1} \u{00b1} {:.1}", ms.mean * 100.0, ms.std * 100.0),
        None => "-".to_string(),
    }
}

pub fn render_table(reports: &[MetricsReport]) -> String {
    let mut rows: Vec<[String; 7]> = vec![[
        "campaign".into(),
        "model".into(),
        "strategy".into(),
        "accuracy".into(),
        "precision".into(),
        "recall".into(),
        "f1-score".into(),
    ]];
    for r in reports {
        rows.push([
            r.campaign_id.clone(),
            r.model.clone(),
            r.strategy.clone(),
            cell(Some(&r.aggregate.accuracy)),
            cell(r.aggregate.macro_precision.as_ref()),
            cell(r.aggregate.macro_recall.as_ref()),
            cell(r.aggregate.macro_f1.as_ref()),
        ]);
    }
    let mut widths = [0usize; 7];
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    for (i, row) in rows.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            out.push_str(cell);
            for _ in cell.chars().count()..widths[j] + 2 {
                out.push(' ');
            }
        }
        out.push('\n');
        if i == 0 {
            let total: usize = widths.iter().map(|w| w + 2).sum();
            out.push_str(&"-".repeat(total));
            out.push('\n');
        }
    }
    out
}
