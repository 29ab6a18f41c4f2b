use serde::{Deserialize, Serialize};

use super::{Evaluation, Verdict};

/// Appended to every rendered report.
pub const FOOTER: &str = "Accuracies come from the heuristic backends on synthetic corpora. \
They are not comparable to numbers obtained with fine-tuned models on real data.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub matches: usize,
    pub samples: usize,
}

impl Cell {
    pub fn accuracy(&self) -> f64 {
        if self.samples == 0 {
            0.0
        } else {
            self.matches as f64 / self.samples as f64
        }
    }
}

/// Variants as rows, datasets as columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub variants: Vec<String>,
    pub datasets: Vec<String>,
    pub cells: Vec<Vec<Cell>>,
    pub verdicts: Vec<Vec<Vec<Verdict>>>,
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Line<'a> {
    Cell { variant: &'a str, dataset: &'a str, matches: usize, samples: usize, accuracy: f64 },
    Verdict { variant: &'a str, dataset: &'a str, #[serde(flatten)] verdict: &'a Verdict },
    Footer { text: &'a str },
}

#[derive(Deserialize)]
struct ParsedLine {
    kind: String,
    #[serde(default)]
    variant: String,
    #[serde(default)]
    dataset: String,
    #[serde(default)]
    matches: usize,
    #[serde(default)]
    samples: usize,
}

impl EvalReport {
    pub fn new(variants: Vec<String>, datasets: Vec<String>) -> EvalReport {
        EvalReport { variants, datasets, cells: Vec::new(), verdicts: Vec::new() }
    }

    pub(crate) fn push_row(&mut self, row: Vec<Evaluation>) {
        self.cells.push(row.iter().map(|e| Cell { matches: e.matches, samples: e.samples }).collect());
        self.verdicts.push(row.into_iter().map(|e| e.verdicts).collect());
    }

    pub fn cell(&self, variant: usize, dataset: usize) -> Cell {
        self.cells[variant][dataset]
    }

    pub fn render_text(&self) -> String {
        let body: Vec<Vec<String>> = self
            .cells
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| format!("{:.1}% ({}/{})", 100.0 * c.accuracy(), c.matches, c.samples))
                    .collect()
            })
            .collect();
        let first = self.variants.iter().map(String::len).chain([7]).max().unwrap_or(7);
        let widths: Vec<usize> = self
            .datasets
            .iter()
            .enumerate()
            .map(|(j, d)| body.iter().map(|r| r[j].len()).chain([d.len()]).max().unwrap_or(0))
            .collect();
        let mut out = format!("{:<first$}", "variant");
        for (d, w) in self.datasets.iter().zip(&widths) {
            out.push_str(&format!("  {d:>w$}"));
        }
        out.push('\n');
        for (name, row) in self.variants.iter().zip(&body) {
            out.push_str(&format!("{name:<first$}"));
            for (cell, w) in row.iter().zip(&widths) {
                out.push_str(&format!("  {cell:>w$}"));
            }
            out.push('\n');
        }
        out.push('\n');
        out.push_str(FOOTER);
        out.push('\n');
        out
    }

    /// One JSON object per line: every cell, then every verdict, then the
    /// footer.
    pub fn render_jsonl(&self) -> String {
        let mut lines = Vec::new();
        for (vi, v) in self.variants.iter().enumerate() {
            for (di, d) in self.datasets.iter().enumerate() {
                let c = self.cells[vi][di];
                lines.push(Line::Cell {
                    variant: v,
                    dataset: d,
                    matches: c.matches,
                    samples: c.samples,
                    accuracy: c.accuracy(),
                });
            }
        }
        for (vi, v) in self.variants.iter().enumerate() {
            for (di, d) in self.datasets.iter().enumerate() {
                for verdict in &self.verdicts[vi][di] {
                    lines.push(Line::Verdict { variant: v, dataset: d, verdict });
                }
            }
        }
        lines.push(Line::Footer { text: FOOTER });
        lines
            .iter()
            .map(|l| serde_json::to_string(l).expect("report lines serialize") + "\n")
            .collect()
    }

    /// Rebuilds the cell grid from [`render_jsonl`](Self::render_jsonl)
    /// output; verdicts are not restored.
    pub fn cells_from_jsonl(text: &str) -> Result<EvalReport, serde_json::Error> {
        let mut report = EvalReport::new(Vec::new(), Vec::new());
        let mut grid: Vec<(String, String, Cell)> = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let l: ParsedLine = serde_json::from_str(line)?;
            if l.kind != "cell" {
                continue;
            }
            if !report.variants.contains(&l.variant) {
                report.variants.push(l.variant.clone());
            }
            if !report.datasets.contains(&l.dataset) {
                report.datasets.push(l.dataset.clone());
            }
            grid.push((l.variant, l.dataset, Cell { matches: l.matches, samples: l.samples }));
        }
        for v in &report.variants {
            let row = report
                .datasets
                .iter()
                .map(|d| {
                    grid.iter()
                        .find(|(gv, gd, _)| gv == v && gd == d)
                        .map(|(_, _, c)| *c)
                        .unwrap_or(Cell { matches: 0, samples: 0 })
                })
                .collect();
            report.cells.push(row);
            report.verdicts.push(vec![Vec::new(); report.datasets.len()]);
        }
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report() -> EvalReport {
        let mut r = EvalReport::new(vec!["full".into(), "no-ner".into()], vec!["initial".into(), "typo".into()]);
        let e = |m, n| Evaluation { matches: m, samples: n, verdicts: Vec::new() };
        r.push_row(vec![e(3, 4), e(2, 2)]);
        r.push_row(vec![e(4, 4), e(0, 2)]);
        r
    }

    #[test]
    fn text_layout() {
        let text = report().render_text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "variant       initial          typo");
        assert_eq!(lines[1], "full      75.0% (3/4)  100.0% (2/2)");
        assert_eq!(lines[2], "no-ner   100.0% (4/4)    0.0% (0/2)");
        assert!(text.contains(FOOTER));
    }

    #[test]
    fn jsonl_round_trip_of_cells() {
        let r = report();
        let back = EvalReport::cells_from_jsonl(&r.render_jsonl()).unwrap();
        assert_eq!(back.cells, r.cells);
        assert_eq!(back.variants, r.variants);
        assert_eq!(back.datasets, r.datasets);
    }
}
