use unicode_normalization::UnicodeNormalization;

/// Matching key: NFC, lowercase, single spaces, trimmed.
pub fn normalize_label(text: &str) -> String {
    let lowered: String = text.nfc().collect::<String>().to_lowercase();
    lowered.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn collapses_case_and_space() {
        assert_eq!(normalize_label("Machine  Learning "), "machine learning");
        assert_eq!(normalize_label("machine learning"), "machine learning");
        assert_eq!(normalize_label("\tA\n b"), "a b");
    }

    #[test]
    fn composed_and_decomposed_agree() {
        assert_eq!(normalize_label("Caf\u{00E9}"), normalize_label("Cafe\u{0301}"));
        assert_eq!(normalize_label("Cafe\u{0301}"), "caf\u{00E9}");
    }

    proptest! {
        #[test]
        fn idempotent(s in "\\PC{0,30}") {
            let once = normalize_label(&s);
            prop_assert_eq!(normalize_label(&once), once);
        }
    }
}
