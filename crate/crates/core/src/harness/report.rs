use super::grid::ExperimentReport;

pub const CSV_HEADER: [&str; 6] = ["feature", "feature_params", "classifier", "classifier_params", "accuracy", "seconds"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

/// Renders the best-of cells. Wall times vary between runs, so the
/// `seconds` column is `-` unless `timings` is set.
pub fn emit_report(report: &ExperimentReport, format: ReportFormat, timings: bool) -> String {
    match format {
        ReportFormat::Csv => csv_report(report, timings),
        ReportFormat::Markdown => markdown_report(report),
    }
}

fn csv_report(report: &ExperimentReport, timings: bool) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for cell in &report.cells {
        let seconds = if timings { format!("{:.3}", cell.seconds) } else { "-".into() };
        w.write_record([
            cell.feature.name(),
            &cell.feature.params(),
            cell.classifier,
            &cell.classifier_params(),
            &format!("{:.2}", cell.accuracy),
            &seconds,
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

fn column_title(classifier: &str, label: &str) -> String {
    match classifier {
        "knn" => format!("KNN k={label}"),
        "pnn" => format!("PNN spread {label}"),
        "fbpn" => format!("FBPN hidden {label}"),
        other => format!("{other} {label}"),
    }
}

fn markdown_report(report: &ExperimentReport) -> String {
    let mut out = String::from("| Feature | Parameters |");
    for (c, label) in &report.columns {
        out.push_str(&format!(" {} |", column_title(c, label)));
    }
    out.push_str("\n|---|---|");
    out.push_str(&"---:|".repeat(report.columns.len()));
    out.push('\n');
    for feature in &report.features {
        let (family, label) = feature.display();
        out.push_str(&format!("| {family} | {label} |"));
        for (c, sub) in &report.columns {
            match report.cell(feature, c, sub) {
                Some(cell) => out.push_str(&format!(" {:.2} |", cell.accuracy)),
                None => out.push_str(" - |"),
            }
        }
        out.push('\n');
    }
    if !report.features.is_empty() {
        out.push_str(&format!(
            "\nDataset `{}`: {} classes, {} training and {} test samples, seed {}.\n",
            report.dataset.name, report.dataset.classes, report.dataset.train, report.dataset.test, report.seed
        ));
    }
    out
}
