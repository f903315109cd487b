//! String similarity primitives for the string-match feature class.

/// Jaro similarity, textbook definition: matching window
/// `max(|a|,|b|)/2 - 1`, transpositions counted over matched characters.
pub fn jaro(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    if a == b {
        return 1.0;
    }
    let window = (a.len().max(b.len()) / 2).saturating_sub(1);
    let mut a_match = vec![false; a.len()];
    let mut b_match = vec![false; b.len()];
    let mut matches = 0usize;
    for i in 0..a.len() {
        let lo = i.saturating_sub(window);
        let hi = (i + window + 1).min(b.len());
        for j in lo..hi {
            if !b_match[j] && a[i] == b[j] {
                a_match[i] = true;
                b_match[j] = true;
                matches += 1;
                break;
            }
        }
    }
    if matches == 0 {
        return 0.0;
    }
    let mut transpositions = 0usize;
    let mut j = 0usize;
    for i in 0..a.len() {
        if a_match[i] {
            while !b_match[j] {
                j += 1;
            }
            if a[i] != b[j] {
                transpositions += 1;
            }
            j += 1;
        }
    }
    let m = matches as f64;
    (m / a.len() as f64 + m / b.len() as f64 + (m - transpositions as f64 / 2.0) / m) / 3.0
}

/// Levenshtein distance normalized by the longer length (0 = identical).
pub fn normalized_edit_distance(a: &str, b: &str) -> f64 {
    weighted_edit_distance(a, b, |_, _| 1.0)
}

/// Edit distance where replacements between easily confusable characters
/// (vowels among themselves, c/k, s/z, i/y) cost 0.5, normalized by the
/// longer length.
pub fn vowel_discounted_edit_distance(a: &str, b: &str) -> f64 {
    weighted_edit_distance(a, b, |x, y| {
        let vowels = "aeiouy";
        let confusable = |p: char, q: char| {
            (vowels.contains(p) && vowels.contains(q))
                || matches!((p, q), ('c', 'k') | ('k', 'c') | ('s', 'z') | ('z', 's'))
        };
        if confusable(x.to_ascii_lowercase(), y.to_ascii_lowercase()) {
            0.5
        } else {
            1.0
        }
    })
}

fn weighted_edit_distance(a: &str, b: &str, sub_cost: impl Fn(char, char) -> f64) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let mut prev: Vec<f64> = (0..=b.len()).map(|j| j as f64).collect();
    let mut cur = vec![0.0; b.len() + 1];
    for i in 1..=a.len() {
        cur[0] = i as f64;
        for j in 1..=b.len() {
            let sub = if a[i - 1] == b[j - 1] {
                prev[j - 1]
            } else {
                prev[j - 1] + sub_cost(a[i - 1], b[j - 1])
            };
            cur[j] = sub.min(prev[j] + 1.0).min(cur[j - 1] + 1.0);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()] / a.len().max(b.len()) as f64
}

/// Acronym check: the initials of the long chunk's words (capitalized words
/// when any exist, otherwise all words) spell the short form.
pub fn acronym_match(long_words: &[&str], short: &str) -> bool {
    if long_words.len() < 2 || short.len() < 2 {
        return false;
    }
    let capitalized: Vec<&str> = long_words
        .iter()
        .copied()
        .filter(|w| w.chars().next().map(|c| c.is_uppercase()).unwrap_or(false))
        .collect();
    let source: &[&str] = if capitalized.is_empty() { long_words } else { &capitalized };
    if source.len() < 2 {
        return false;
    }
    let initials: String = source
        .iter()
        .filter_map(|w| w.chars().next())
        .flat_map(|c| c.to_uppercase())
        .collect();
    initials == short.to_uppercase()
}

const NATIONALITY_SUFFIXES: [&str; 6] = ["ese", "ian", "ish", "an", "n", "i"];

/// Suffix-derived nationality match: strips a common nationality suffix
/// from one word and requires the stem to be a prefix of the other word
/// covering at least its first half. Symmetric.
pub fn nationality_match(a: &str, b: &str) -> bool {
    let a = a.to_lowercase();
    let b = b.to_lowercase();
    if a == b {
        return false;
    }
    nationality_one_way(&a, &b) || nationality_one_way(&b, &a)
}

fn nationality_one_way(base: &str, derived: &str) -> bool {
    for suffix in NATIONALITY_SUFFIXES {
        if derived.len() > suffix.len() && derived.ends_with(suffix) {
            let stem = &derived[..derived.len() - suffix.len()];
            if stem.len() >= 3 && base.starts_with(stem) && stem.len() * 2 >= base.len() {
                return true;
            }
        }
    }
    false
}

/// Suffix-stripping stemmer. Rules, applied once, longest first:
/// `sses -> ss`, `ies -> y`, `ing -> `(stem len >= 3), `ed -> ` (>= 3),
/// `ly -> ` (>= 3), final `s` dropped unless the word ends in `ss`/`us`.
pub fn stem(word: &str) -> String {
    let w = word.to_lowercase();
    if let Some(base) = w.strip_suffix("sses") {
        return format!("{base}ss");
    }
    if let Some(base) = w.strip_suffix("ies") {
        return format!("{base}y");
    }
    for (suffix, min_stem) in [("ing", 3), ("ed", 3), ("ly", 3)] {
        if let Some(base) = w.strip_suffix(suffix) {
            if base.len() >= min_stem {
                return base.to_string();
            }
        }
    }
    if w.ends_with('s') && !w.ends_with("ss") && !w.ends_with("us") && w.len() >= 4 {
        return w[..w.len() - 1].to_string();
    }
    w
}

/// Collapsed character-class shape: uppercase -> X, lowercase -> x,
/// digit -> 9, other -> `-`, consecutive repeats collapsed.
pub fn shape(word: &str) -> String {
    let mut out = String::new();
    let mut last = '\0';
    for c in word.chars() {
        let class = if c.is_uppercase() {
            'X'
        } else if c.is_lowercase() {
            'x'
        } else if c.is_ascii_digit() {
            '9'
        } else {
            '-'
        };
        if class != last {
            out.push(class);
            last = class;
        }
    }
    out
}

/// Coarse case class of a token.
pub fn case_class(word: &str) -> &'static str {
    let mut has_upper = false;
    let mut has_lower = false;
    let mut has_digit = false;
    let mut has_other = false;
    for c in word.chars() {
        if c.is_uppercase() {
            has_upper = true;
        } else if c.is_lowercase() {
            has_lower = true;
        } else if c.is_ascii_digit() {
            has_digit = true;
        } else {
            has_other = true;
        }
    }
    let first_upper = word.chars().next().map(|c| c.is_uppercase()).unwrap_or(false);
    match (has_upper, has_lower, has_digit, has_other) {
        (true, false, false, false) => "allcaps",
        (true, true, _, _) if first_upper => "initcap",
        (false, true, false, false) => "lower",
        (false, false, true, false) => "digits",
        _ => "mixed",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jaro_textbook_example() {
        // hand-computed from the definition: m=6, t=1
        assert!((jaro("MARTHA", "MARHTA") - 0.9444444444).abs() < 1e-9);
        assert_eq!(jaro("", ""), 1.0);
        assert_eq!(jaro("a", ""), 0.0);
        assert_eq!(jaro("same", "same"), 1.0);
        // DWAYNE/DUANE from the same textbook family: m=4, t=0
        let expected = (4.0 / 6.0 + 4.0 / 5.0 + 1.0) / 3.0;
        assert!((jaro("DWAYNE", "DUANE") - expected).abs() < 1e-9);
    }

    #[test]
    fn edit_distances() {
        assert_eq!(normalized_edit_distance("abc", "abc"), 0.0);
        assert!((normalized_edit_distance("abc", "abd") - 1.0 / 3.0).abs() < 1e-9);
        assert_eq!(normalized_edit_distance("", ""), 0.0);
        // vowel replacement discounted to half
        assert!((vowel_discounted_edit_distance("bat", "bet") - 0.5 / 3.0).abs() < 1e-9);
        assert!((vowel_discounted_edit_distance("bat", "brt") - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn acronyms() {
        assert!(acronym_match(&["International", "Business", "Machines"], "IBM"));
        assert!(acronym_match(&["the", "World", "Health", "Organization"], "WHO"));
        assert!(!acronym_match(&["International", "Business"], "IBM"));
        assert!(!acronym_match(&["International"], "I"));
    }

    #[test]
    fn nationality_examples() {
        assert!(nationality_match("Israel", "Israeli"));
        assert!(nationality_match("Israeli", "Israel"));
        assert!(nationality_match("Russia", "Russian"));
        assert!(nationality_match("England", "English"));
        assert!(nationality_match("Sudan", "Sudanese"));
        assert!(!nationality_match("Netherlands", "Dutch"));
        assert!(!nationality_match("Russia", "Russia"));
    }

    #[test]
    fn stems_and_shapes() {
        assert_eq!(stem("walking"), "walk");
        assert_eq!(stem("parties"), "party");
        assert_eq!(stem("glasses"), "glass");
        assert_eq!(stem("speeches"), "speeche");
        assert_eq!(stem("plans"), "plan");
        assert_eq!(stem("bus"), "bus");
        assert_eq!(shape("Bill"), "Xx");
        assert_eq!(shape("IBM"), "X");
        assert_eq!(shape("A380-X"), "X9-X");
        assert_eq!(case_class("Bill"), "initcap");
        assert_eq!(case_class("IBM"), "allcaps");
        assert_eq!(case_class("x3"), "mixed");
    }
}
