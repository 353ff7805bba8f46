use super::Span;

/// Splits `text` into trimmed, non-empty sentence spans.
///
/// A boundary falls after every `'\n'`, and after `.`, `?` or `!` when the
/// next character is whitespace. There is no abbreviation handling.
pub fn split_sentences(text: &str) -> Vec<Span> {
    let mut spans = Vec::new();
    let mut seg_start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        let boundary = match c {
            '\n' => true,
            '.' | '?' | '!' => matches!(chars.peek(), Some((_, n)) if n.is_whitespace()),
            _ => false,
        };
        if boundary {
            let end = i + c.len_utf8();
            push_trimmed(text, seg_start, end, &mut spans);
            seg_start = end;
        }
    }
    push_trimmed(text, seg_start, text.len(), &mut spans);
    spans
}

fn push_trimmed(text: &str, start: usize, end: usize, out: &mut Vec<Span>) {
    let seg = &text[start..end];
    let lead = seg.len() - seg.trim_start().len();
    let trimmed = seg.trim();
    if !trimmed.is_empty() {
        let s = start + lead;
        out.push(Span::new(s, s + trimmed.len()));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn slices<'a>(text: &'a str, spans: &[Span]) -> Vec<&'a str> {
        spans.iter().map(|s| &text[s.start..s.end]).collect()
    }

    #[test]
    fn empty_input() {
        assert!(split_sentences("").is_empty());
        assert!(split_sentences(" \n\t\n ").is_empty());
    }

    #[test]
    fn terminal_punctuation_followed_by_space() {
        let text = "He was admitted. He improved.";
        let spans = split_sentences(text);
        assert_eq!(spans, vec![Span::new(0, 16), Span::new(17, 29)]);
        assert_eq!(slices(text, &spans), vec!["He was admitted.", "He improved."]);
    }

    #[test]
    fn newline_always_splits() {
        let text = "Line one\nLine two";
        assert_eq!(slices(text, &split_sentences(text)), vec!["Line one", "Line two"]);
    }

    #[test]
    fn no_split_inside_decimals_or_without_whitespace() {
        let text = "Dose 2.5 mg given!Then stop? ok";
        assert_eq!(slices(text, &split_sentences(text)), vec!["Dose 2.5 mg given!Then stop?", "ok"]);
    }

    #[test]
    fn multibyte_text() {
        let text = "Fièvre à 39°C. Traité.";
        assert_eq!(slices(text, &split_sentences(text)), vec!["Fièvre à 39°C.", "Traité."]);
    }

    proptest! {
        #[test]
        fn spans_are_in_bounds_sorted_and_idempotent(text in "[a-c .?!\n\t]{0,60}") {
            let spans = split_sentences(&text);
            let mut prev_end = 0;
            for s in &spans {
                prop_assert!(s.start < s.end && s.end <= text.len());
                prop_assert!(s.start >= prev_end);
                prev_end = s.end;
                let piece = &text[s.start..s.end];
                prop_assert_eq!(piece.trim(), piece);
                prop_assert_eq!(split_sentences(piece), vec![Span::new(0, piece.len())]);
            }
            // Everything outside the spans is whitespace or a removed separator.
            let mut covered = vec![false; text.len()];
            for s in &spans {
                covered[s.start..s.end].iter_mut().for_each(|c| *c = true);
            }
            for (i, b) in text.bytes().enumerate() {
                if !covered[i] {
                    prop_assert!(b.is_ascii_whitespace());
                }
            }
            prop_assert_eq!(split_sentences(&text), spans);
        }
    }
}
