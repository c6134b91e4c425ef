use super::DetectorConfig;
use crate::tagging::ScriptProfile;

/// Ratios behind an unrelated verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnrelatedScreen {
    /// Other-script characters (e.g. kana) over the segment's non-neutral ones.
    pub other_script_ratio: f64,
    /// Characters in garbled tokens over all non-whitespace context characters.
    pub garbled_ratio: f64,
    pub unrelated: bool,
}

impl UnrelatedScreen {
    /// The ratio that triggered the verdict, used as its confidence.
    pub fn strength(&self) -> f64 {
        self.other_script_ratio.max(self.garbled_ratio).min(1.0)
    }
}

fn is_prose_punct(c: char) -> bool {
    matches!(
        c,
        '.' | ',' | ';' | ':' | '!' | '?' | '\'' | '"' | '(' | ')' | '[' | ']' | '-' | '/'
            | '–' | '—' | '…' | '‘' | '’' | '“' | '”'
    ) || matches!(c as u32, 0x3000..=0x303F | 0xFF01..=0xFF0F | 0xFF1A..=0xFF1F)
}

fn is_symbol(c: char) -> bool {
    !c.is_alphanumeric() && !c.is_whitespace() && !is_prose_punct(c)
}

/// Whether a whitespace-delimited token looks like noise: after stripping
/// surrounding prose punctuation it contains a symbol, or mixes ASCII
/// letters with digits.
fn is_garbled_token(token: &str) -> bool {
    let core = token.trim_matches(is_prose_punct);
    if core.is_empty() {
        return false;
    }
    let has_symbol = core.chars().any(is_symbol);
    let has_letter = core.chars().any(|c| c.is_ascii_alphabetic());
    let has_digit = core.chars().any(|c| c.is_ascii_digit());
    has_symbol || (has_letter && has_digit)
}

pub fn garbled_ratio(text: &str) -> f64 {
    let mut total = 0usize;
    let mut garbled = 0usize;
    for token in text.split_whitespace() {
        let n = token.chars().count();
        total += n;
        if is_garbled_token(token) {
            garbled += n;
        }
    }
    if total == 0 {
        0.0
    } else {
        garbled as f64 / total as f64
    }
}

/// Screens a segment for unrelated material.
///
/// `segment` is the segment text; `context` is the sentence containing it
/// (for sentence-level segments both are the same text). Unrelated when
/// other-script characters reach `unrelated_other_script_ratio` of the
/// segment's non-neutral characters, or garbled tokens reach
/// `unrelated_symbol_ratio` of the context's characters.
pub fn screen(
    segment: &str,
    context: &str,
    profile: &ScriptProfile,
    cfg: &DetectorConfig,
) -> UnrelatedScreen {
    let counts = profile.counts(segment);
    let other_script_ratio = if counts.non_neutral() == 0 {
        0.0
    } else {
        counts.other as f64 / counts.non_neutral() as f64
    };
    let garbled_ratio = garbled_ratio(context);
    let unrelated = (counts.other > 0 && other_script_ratio >= cfg.unrelated_other_script_ratio)
        || (garbled_ratio > 0.0 && garbled_ratio >= cfg.unrelated_symbol_ratio);
    UnrelatedScreen {
        other_script_ratio,
        garbled_ratio,
        unrelated,
    }
}

/// Boolean form of [`screen`] for a stand-alone segment.
pub fn screen_unrelated(segment: &str, profile: &ScriptProfile, cfg: &DetectorConfig) -> bool {
    screen(segment, segment, profile, cfg).unrelated
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zh() -> ScriptProfile {
        ScriptProfile::builtin("en-zh").unwrap()
    }

    #[test]
    fn kana_dominated_is_unrelated() {
        let cfg = DetectorConfig::default();
        assert!(screen_unrelated("お客様、こちらのブラウスですと", &zh(), &cfg));
        assert!(screen_unrelated(
            "◇ お客様、こちらのブラウスですと、いまお召しのスーツにもよく合いますが。",
            &zh(),
            &cfg
        ));
    }

    #[test]
    fn plain_cjk_is_related() {
        let cfg = DetectorConfig::default();
        assert!(!screen_unrelated("贴春联", &zh(), &cfg));
        assert!(!screen_unrelated("剃须刀、字典、镜子、毛巾、冰箱、微波炉、电脑", &zh(), &cfg));
    }

    #[test]
    fn garbled_text_is_unrelated() {
        let cfg = DetectorConfig::default();
        assert!(screen_unrelated("X$Gx17{0 水利图书 F'} q A\t^8t2G", &zh(), &cfg));
        assert!(screen_unrelated("X$Gx17{0 水利图书 F'} q A\\t^8t2G", &zh(), &cfg));
        assert!(screen_unrelated("zxx520llc发表于: 2个月前#9", &zh(), &cfg));
    }

    #[test]
    fn ordinary_prose_is_clean() {
        assert_eq!(
            garbled_ratio("You can use the above picture and add some related words, such as 剃须刀 and 书橱."),
            0.0
        );
        assert!(garbled_ratio("As a result, our GPT-4 training run was stable.") < 0.2);
    }

    #[test]
    fn thresholds_are_respected() {
        let strict = DetectorConfig {
            unrelated_other_script_ratio: 1.0,
            unrelated_symbol_ratio: 1.0,
            ..DetectorConfig::default()
        };
        assert!(!screen_unrelated("お客様", &zh(), &strict));
    }
}
