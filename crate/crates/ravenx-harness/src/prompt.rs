//! Prompt rendering and answer retrieval.
//!
//! Two prompt styles cover the evaluation protocol: `Plain` renders each
//! panel as a bare integer tuple over modal values; `Probabilistic` renders
//! each attribute as a `<p::v,...>` distribution with two-decimal
//! probabilities. Rendering is byte-deterministic; the answer is retrieved
//! from the fixed declaration format, defaulting to panel #0 when absent.

use std::sync::OnceLock;

use regex::Regex;
use thiserror::Error;

use ravenx_core::pmf::SparsePmf;
use ravenx_core::puzzle::{Panel, Puzzle};

#[derive(Debug, Error, PartialEq)]
pub enum PromptError {
    #[error("plain style requires degenerate value distributions")]
    PlainOnSmoothed,
    #[error("probabilistic style requires non-degenerate value distributions")]
    ProbabilisticOnClean,
}

/// How puzzle panels are written into the prompt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PromptStyle {
    Plain,
    Probabilistic,
}

impl PromptStyle {
    /// The style a puzzle calls for: probabilistic exactly when any value
    /// distribution is non-degenerate.
    pub fn for_puzzle(p: &Puzzle) -> PromptStyle {
        if has_smoothing(p) {
            PromptStyle::Probabilistic
        } else {
            PromptStyle::Plain
        }
    }
}

fn has_smoothing(p: &Puzzle) -> bool {
    p.panels().any(|panel| panel.attrs().any(|pmf| !pmf.is_degenerate()))
}

const ANSWER_FORMAT: &str = "Finally, give your answer in the following format: My Answer: Answer #<your answer>";

fn plain_preamble(uncertain: bool) -> String {
    let select = if uncertain { "best matching" } else { "correct" };
    format!(
        "Complete the Raven's progressive matrix. Your task is to select the {select} Answer \
         from the Answer set. Please decide carefully. Take a deep breath and think \
         step-by-step. {ANSWER_FORMAT}"
    )
}

fn probabilistic_preamble(grid_cols: u32) -> String {
    format!(
        "Complete the Raven's progressive matrix. You are given a context matrix of 3 rows and \
         {grid_cols} colums. Each element in the matrix has multiply attributes, embedded in \
         round brackets (). Each attribute is described with a probability distribution, e.g., \
         <p_a::v_a, p_b::v_b> describes that the attribute has value v_a with probability p_a \
         and value v_b with probability p_b. Your task is to select the best matching Answer \
         from the Answer set. Please decide carefully. Take a deep breath and think \
         step-by-step. {ANSWER_FORMAT}"
    )
}

fn format_pmf(pmf: &SparsePmf) -> String {
    let entries: Vec<String> = pmf
        .entries()
        .iter()
        .map(|&(v, p)| format!("{p:.2}::{v}"))
        .collect();
    format!("<{}>", entries.join(","))
}

fn format_panel(panel: &Panel, style: PromptStyle) -> String {
    let attrs: Vec<String> = match style {
        PromptStyle::Plain => panel.attrs().map(|pmf| pmf.mode().to_string()).collect(),
        PromptStyle::Probabilistic => panel.attrs().map(format_pmf).collect(),
    };
    let sep = match style {
        PromptStyle::Plain => ",",
        PromptStyle::Probabilistic => ", ",
    };
    format!("({})", attrs.join(sep))
}

/// Render a puzzle into the model prompt, byte-exactly.
pub fn render_prompt(p: &Puzzle, style: PromptStyle) -> Result<String, PromptError> {
    let smoothed = has_smoothing(p);
    match style {
        PromptStyle::Plain if smoothed => return Err(PromptError::PlainOnSmoothed),
        PromptStyle::Probabilistic if !smoothed => return Err(PromptError::ProbabilisticOnClean),
        _ => {}
    }
    let uncertain = smoothed || p.n_confounders() > 0;
    let mut out = match style {
        PromptStyle::Plain => plain_preamble(uncertain),
        PromptStyle::Probabilistic => probabilistic_preamble(p.grid_cols()),
    };
    out.push('\n');
    for row in 0..3 {
        let panels: Vec<String> = p.row(row).iter().map(|panel| format_panel(panel, style)).collect();
        let terminator = if row == 2 { ',' } else { ';' };
        out.push_str(&format!("row {}: {}{}\n", row + 1, panels.join(", "), terminator));
    }
    out.push_str("Answer set:\n");
    for (j, cand) in p.candidates().iter().enumerate() {
        out.push_str(&format!("Answer #{}: {}\n", j, format_panel(cand, style)));
    }
    Ok(out)
}

/// Retrieve the declared answer: the last occurrence of the declaration
/// format wins. Absent or out-of-range answers fall back to panel #0 with
/// the failure flag set.
pub fn parse_answer(response: &str) -> (u8, bool) {
    static PATTERN: OnceLock<Regex> = OnceLock::new();
    let re = PATTERN
        .get_or_init(|| Regex::new(r"My Answer:\s*Answer\s*#\s*(\d+)").expect("pattern compiles"));
    let last = re
        .captures_iter(response)
        .filter_map(|c| c[1].parse::<u64>().ok())
        .last();
    match last {
        Some(idx) if idx <= 7 => (idx as u8, false),
        _ => (0, true),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ravenx_core::fixtures::fixture_3x3;
    use ravenx_core::generator::{generate_puzzle, GenConfig};
    use ravenx_core::uncertainty::{apply_uncertainty, Smoothing, UncertaintyConfig};

    #[test]
    fn plain_render_matches_reference_bytes() {
        let expected = "\
Complete the Raven's progressive matrix. Your task is to select the correct Answer from the Answer set. Please decide carefully. Take a deep breath and think step-by-step. Finally, give your answer in the following format: My Answer: Answer #<your answer>
row 1: (3,5,5), (6,5,5), (4,5,5);
row 2: (4,3,1), (3,3,1), (6,3,1);
row 3: (6,1,7), (4,1,7),
Answer set:
Answer #0: (3,2,7)
Answer #1: (7,1,5)
Answer #2: (7,2,5)
Answer #3: (7,2,7)
Answer #4: (7,1,7)
Answer #5: (3,1,7)
Answer #6: (3,2,5)
Answer #7: (3,1,5)
";
        let rendered = render_prompt(&fixture_3x3(), PromptStyle::Plain).unwrap();
        assert_eq!(rendered, expected);
    }

    #[test]
    fn style_mismatch_errors() {
        let clean = fixture_3x3();
        assert_eq!(
            render_prompt(&clean, PromptStyle::Probabilistic),
            Err(PromptError::ProbabilisticOnClean)
        );
        let noisy = apply_uncertainty(
            &clean,
            &UncertaintyConfig::new(0, Smoothing::Bins { p_l: 0.7 }, 1),
        )
        .unwrap();
        assert_eq!(render_prompt(&noisy, PromptStyle::Plain), Err(PromptError::PlainOnSmoothed));
        assert_eq!(PromptStyle::for_puzzle(&noisy), PromptStyle::Probabilistic);
    }

    #[test]
    fn confounder_prompt_has_wide_tuples_and_best_matching() {
        let p = generate_puzzle(&GenConfig::new(10, 1000, 1, 9), 0).unwrap();
        let noisy =
            apply_uncertainty(&p, &UncertaintyConfig::new(10, Smoothing::None, 4)).unwrap();
        let prompt = render_prompt(&noisy, PromptStyle::Plain).unwrap();
        assert!(prompt.contains("select the best matching Answer"));
        let first_panel = prompt
            .lines()
            .find(|l| l.starts_with("row 1:"))
            .and_then(|l| l.split(", (").next())
            .unwrap()
            .to_string();
        let commas = first_panel.matches(',').count();
        assert_eq!(commas, 12, "13-tuples expected: {first_panel}");
    }

    #[test]
    fn probabilistic_render_uses_two_decimals() {
        let p = generate_puzzle(&GenConfig::new(10, 1000, 1, 10), 0).unwrap();
        let noisy = apply_uncertainty(
            &p,
            &UncertaintyConfig::new(0, Smoothing::Bins { p_l: 0.51 }, 5),
        )
        .unwrap();
        let prompt = render_prompt(&noisy, PromptStyle::Probabilistic).unwrap();
        assert!(prompt.contains("3 rows and 10 colums"));
        let re = Regex::new(r"<(\d\.\d{2}::\d+,)+\d\.\d{2}::\d+>").unwrap();
        assert!(re.is_match(&prompt), "{prompt}");
        assert!(!prompt.contains("-0.00"));
    }

    #[test]
    fn parse_closure_and_defaults() {
        for j in 0..8u8 {
            assert_eq!(parse_answer(&format!("My Answer: Answer #{j}")), (j, false));
        }
        assert_eq!(parse_answer("no idea"), (0, true));
        assert_eq!(parse_answer("My Answer: Answer #9"), (0, true));
        assert_eq!(
            parse_answer("My Answer: Answer #2 ... My Answer: Answer #6"),
            (6, false)
        );
    }

    #[test]
    fn render_is_deterministic() {
        let p = fixture_3x3();
        assert_eq!(
            render_prompt(&p, PromptStyle::Plain).unwrap(),
            render_prompt(&p, PromptStyle::Plain).unwrap()
        );
    }
}
