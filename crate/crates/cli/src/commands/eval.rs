use wlda_core::wlda::load_model;

use super::{load_input, read_topics, reference_topics, score_topics, write_file};
use crate::args::{EvalArgs, ReportFormat};
use crate::failure::{CmdResult, Failure, ResultExt};
use wlda_core::metrics::MetricsReport;

pub fn render_report(report: &MetricsReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => report.to_text(),
        ReportFormat::Csv => format!("{}\n{}\n", MetricsReport::CSV_HEADER, report.to_csv_row()),
        ReportFormat::Json => format!("{}\n", report.to_json()),
    }
}

pub fn eval(args: &EvalArgs) -> CmdResult {
    let corpus = load_input(&args.input)?;
    let topics = match (&args.topics, &args.model) {
        (Some(path), _) => read_topics(path)?,
        (None, Some(path)) => {
            let model = load_model(path).with_context(|| format!("reading model {}", path.display()))?;
            if model.vocab_size() != corpus.vocab_size() {
                return Err(Failure::data(format!(
                    "model vocabulary has {} words but the corpus has {}",
                    model.vocab_size(),
                    corpus.vocab_size()
                )));
            }
            model.extract_topics(args.top_words)?
        }
        (None, None) => return Err(Failure::usage("either --topics or --model is required")),
    };
    if let Some(&w) = topics.distinct_words().last() {
        if w >= corpus.vocab_size() {
            return Err(Failure::data(format!(
                "topic word id {w} is outside the corpus vocabulary of {}",
                corpus.vocab_size()
            )));
        }
    }
    let truth = reference_topics(args.truth.as_ref(), &corpus, topics.words_per_topic())?;
    let report = score_topics(&topics, &corpus, truth.as_ref())?;
    let rendered = render_report(&report, args.format);
    print!("{rendered}");
    if let Some(out) = &args.out {
        write_file(out, rendered)?;
    }
    Ok(())
}
