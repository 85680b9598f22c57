//! Morphological complexity of a training sample: five normalized metrics in
//! `[0, 1]` and their unweighted mean (MC).

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::conllu::Sentence;
use crate::error::{Error, Result};

/// Form and lemma comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseHandling {
    /// Byte-exact comparison.
    #[default]
    Exact,
    Lowercase,
}

/// Counts the complexity metrics are computed from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VocabProfile {
    pub form_counts: BTreeMap<String, u64>,
    /// Lemma to the set of forms seen with it. Tokens without a lemma (`_`)
    /// are left out.
    pub lemma_to_forms: BTreeMap<String, BTreeSet<String>>,
    /// Delexicalized word (`UPOS|feats`) to the UPOS tags of its heads.
    pub delex_head_tags: BTreeMap<String, BTreeMap<String, u64>>,
    pub missing_lemma_tokens: u64,
}

impl VocabProfile {
    pub fn from_sentences(sentences: &[Sentence], case: CaseHandling) -> Self {
        let fold = |s: &str| match case {
            CaseHandling::Exact => s.to_string(),
            CaseHandling::Lowercase => s.to_lowercase(),
        };
        let mut profile = VocabProfile::default();
        for sentence in sentences {
            let tokens = sentence.tokens();
            for t in tokens {
                let form = fold(&t.form);
                *profile.form_counts.entry(form.clone()).or_default() += 1;
                if t.lemma.is_empty() || t.lemma == "_" {
                    profile.missing_lemma_tokens += 1;
                } else {
                    profile
                        .lemma_to_forms
                        .entry(fold(&t.lemma))
                        .or_default()
                        .insert(form);
                }
                // Root attachments have no head tag.
                if t.head != 0 {
                    let delex = format!("{}|{}", t.upos, t.canonical_feats());
                    let head_tag = tokens[t.head - 1].upos.clone();
                    *profile
                        .delex_head_tags
                        .entry(delex)
                        .or_default()
                        .entry(head_tag)
                        .or_default() += 1;
                }
            }
        }
        profile
    }

    pub fn total_tokens(&self) -> u64 {
        self.form_counts.values().sum()
    }

    pub fn vocab_size(&self) -> usize {
        self.form_counts.len()
    }

    /// Share of tokens that had no lemma.
    pub fn missing_lemma_fraction(&self) -> f64 {
        let total = self.total_tokens();
        if total == 0 {
            0.0
        } else {
            self.missing_lemma_tokens as f64 / total as f64
        }
    }
}

fn entropy_bits<'a>(counts: impl Iterator<Item = &'a u64> + Clone) -> f64 {
    let total: u64 = counts.clone().sum();
    let total = total as f64;
    counts
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum()
}

/// Word entropy divided by `log2 |V|`.
pub fn word_entropy_norm(profile: &VocabProfile) -> Result<f64> {
    let v = profile.vocab_size();
    if v < 2 {
        return Err(Error::Degenerate(format!(
            "word entropy needs at least two word types, found {v}"
        )));
    }
    Ok(entropy_bits(profile.form_counts.values()) / (v as f64).log2())
}

pub fn type_token_ratio(profile: &VocabProfile) -> Result<f64> {
    let t = profile.total_tokens();
    if t == 0 {
        return Err(Error::Degenerate(
            "type-token ratio of an empty sample".into(),
        ));
    }
    Ok(profile.vocab_size() as f64 / t as f64)
}

/// `1 - 1 / (mean number of forms per lemma)`.
pub fn form_lemma_ratio_norm(profile: &VocabProfile) -> Result<f64> {
    let lemmas = profile.lemma_to_forms.len();
    if lemmas == 0 {
        return Err(Error::Degenerate("no lemmas in sample".into()));
    }
    let forms: usize = profile.lemma_to_forms.values().map(BTreeSet::len).sum();
    Ok(1.0 - lemmas as f64 / forms as f64)
}

/// Normalized inflected form/lemma ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InflectedRatio {
    pub value: f64,
    /// No lemma had two or more forms; `value` is 0 by convention.
    pub degenerate: bool,
}

/// `1 - 1 / (mean forms per lemma)` over lemmas with at least two forms.
pub fn inflected_form_lemma_ratio_norm(profile: &VocabProfile) -> InflectedRatio {
    let inflected: Vec<usize> = profile
        .lemma_to_forms
        .values()
        .map(BTreeSet::len)
        .filter(|&n| n >= 2)
        .collect();
    if inflected.is_empty() {
        return InflectedRatio {
            value: 0.0,
            degenerate: true,
        };
    }
    let forms: usize = inflected.iter().sum();
    InflectedRatio {
        value: 1.0 - inflected.len() as f64 / forms as f64,
        degenerate: false,
    }
}

/// `1 - mean_d HPE_d / log2 |T_d|`. Types only ever headed by a single tag
/// contribute zero entropy. An empty profile scores 1.
pub fn head_pos_entropy_norm(profile: &VocabProfile) -> f64 {
    if profile.delex_head_tags.is_empty() {
        return 1.0;
    }
    let total: f64 = profile
        .delex_head_tags
        .values()
        .map(|tags| {
            if tags.len() < 2 {
                0.0
            } else {
                entropy_bits(tags.values()) / (tags.len() as f64).log2()
            }
        })
        .sum();
    1.0 - total / profile.delex_head_tags.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexityScores {
    pub h_word_norm: f64,
    pub ttr: f64,
    pub f_l_norm: f64,
    pub f_il_norm: f64,
    pub hpe_norm: f64,
    pub mc: f64,
    pub f_il_degenerate: bool,
    pub missing_lemma_fraction: f64,
}

impl ComplexityScores {
    pub fn components(&self) -> [f64; 5] {
        [
            self.h_word_norm,
            self.ttr,
            self.f_l_norm,
            self.f_il_norm,
            self.hpe_norm,
        ]
    }
}

/// Unweighted mean of the five normalized metrics.
pub fn aggregate_mc(scores: &[f64; 5]) -> f64 {
    scores.iter().sum::<f64>() / 5.0
}

pub fn complexity_scores(profile: &VocabProfile) -> Result<ComplexityScores> {
    let inflected = inflected_form_lemma_ratio_norm(profile);
    let components = [
        word_entropy_norm(profile)?,
        type_token_ratio(profile)?,
        form_lemma_ratio_norm(profile)?,
        inflected.value,
        head_pos_entropy_norm(profile),
    ];
    Ok(ComplexityScores {
        h_word_norm: components[0],
        ttr: components[1],
        f_l_norm: components[2],
        f_il_norm: components[3],
        hpe_norm: components[4],
        mc: aggregate_mc(&components),
        f_il_degenerate: inflected.degenerate,
        missing_lemma_fraction: profile.missing_lemma_fraction(),
    })
}

/// Scores of a training sample.
pub fn score_sentences(sentences: &[Sentence], case: CaseHandling) -> Result<ComplexityScores> {
    complexity_scores(&VocabProfile::from_sentences(sentences, case))
}

/// Treebanks whose MC is strictly above the mean MC, and the rest.
pub fn complexity_split(
    scores: &BTreeMap<String, f64>,
) -> Result<(BTreeSet<String>, BTreeSet<String>)> {
    if scores.len() < 2 {
        return Err(Error::InvalidInput(
            "complexity split needs at least two treebanks".into(),
        ));
    }
    let mean = scores.values().sum::<f64>() / scores.len() as f64;
    let (complex, simple): (Vec<_>, Vec<_>) = scores.iter().partition(|(_, &mc)| mc > mean);
    Ok((
        complex.into_iter().map(|(k, _)| k.clone()).collect(),
        simple.into_iter().map(|(k, _)| k.clone()).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn forms(counts: &[(&str, u64)]) -> VocabProfile {
        VocabProfile {
            form_counts: counts.iter().map(|(f, c)| (f.to_string(), *c)).collect(),
            ..Default::default()
        }
    }

    fn lemmas(spec: &[(&str, usize)]) -> VocabProfile {
        let mut p = VocabProfile::default();
        for (lemma, n) in spec {
            let set = (0..*n).map(|i| format!("{lemma}{i}")).collect();
            p.lemma_to_forms.insert(lemma.to_string(), set);
        }
        p
    }

    fn heads(spec: &[(&str, &[(&str, u64)])]) -> VocabProfile {
        let mut p = VocabProfile::default();
        for (d, tags) in spec {
            p.delex_head_tags.insert(
                d.to_string(),
                tags.iter().map(|(t, c)| (t.to_string(), *c)).collect(),
            );
        }
        p
    }

    #[test]
    fn uniform_vocabulary_has_unit_entropy() {
        let p = forms(&[
            ("a", 2),
            ("b", 2),
            ("c", 2),
            ("d", 2),
            ("e", 2),
            ("f", 2),
            ("g", 2),
            ("h", 2),
        ]);
        assert!((word_entropy_norm(&p).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_form_entropy_is_degenerate() {
        assert!(word_entropy_norm(&forms(&[("a", 10)])).is_err());
    }

    #[test]
    fn skewed_two_form_entropy() {
        // H = -(3/4 log2 3/4 + 1/4 log2 1/4) = 2 - 3/4 log2 3
        let expected = 2.0 - 0.75 * 3f64.log2();
        let h = word_entropy_norm(&forms(&[("a", 3), ("b", 1)])).unwrap();
        assert!((h - expected).abs() < 1e-12);
        assert!((h - 0.8113).abs() < 1e-4);
    }

    #[test]
    fn ttr_values() {
        assert_eq!(
            type_token_ratio(&forms(&[("a", 1), ("b", 1), ("c", 1)])).unwrap(),
            1.0
        );
        assert_eq!(
            type_token_ratio(&forms(&[("a", 3), ("b", 1)])).unwrap(),
            0.5
        );
    }

    #[test]
    fn form_lemma_ratio_values() {
        assert_eq!(
            form_lemma_ratio_norm(&lemmas(&[("x", 1), ("y", 1)])).unwrap(),
            0.0
        );
        assert_eq!(
            form_lemma_ratio_norm(&lemmas(&[("x", 2), ("y", 2)])).unwrap(),
            0.5
        );
        assert_eq!(
            form_lemma_ratio_norm(&lemmas(&[("x", 3), ("y", 1)])).unwrap(),
            0.5
        );
        assert!(form_lemma_ratio_norm(&VocabProfile::default()).is_err());
    }

    #[test]
    fn inflected_ratio_values() {
        let two = inflected_form_lemma_ratio_norm(&lemmas(&[("x", 2), ("y", 2), ("z", 1)]));
        assert_eq!(
            two,
            InflectedRatio {
                value: 0.5,
                degenerate: false
            }
        );
        let none = inflected_form_lemma_ratio_norm(&lemmas(&[("x", 1)]));
        assert_eq!(
            none,
            InflectedRatio {
                value: 0.0,
                degenerate: true
            }
        );
        let mixed = inflected_form_lemma_ratio_norm(&lemmas(&[("x", 4), ("y", 2), ("z", 1)]));
        assert!((mixed.value - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn head_entropy_extremes() {
        let fixed = heads(&[("NOUN|_", &[("VERB", 5)]), ("DET|_", &[("NOUN", 3)])]);
        assert_eq!(head_pos_entropy_norm(&fixed), 1.0);
        let uniform = heads(&[("ADJ|_", &[("A", 2), ("B", 2), ("C", 2), ("D", 2)])]);
        assert!(head_pos_entropy_norm(&uniform).abs() < 1e-15);
    }

    #[test]
    fn head_entropy_two_types() {
        // Type 1: {A:3, B:1} over 2 tags -> H/log2(2) = 0.811278...
        // Type 2: {A:1, B:1, C:2} over 3 tags -> 1.5 / log2(3).
        let p = heads(&[
            ("X|_", &[("A", 3), ("B", 1)]),
            ("Y|_", &[("A", 1), ("B", 1), ("C", 2)]),
        ]);
        let h1 = 2.0 - 0.75 * 3f64.log2();
        let h2 = 1.5 / 3f64.log2();
        let expected = 1.0 - (h1 + h2) / 2.0;
        assert!((head_pos_entropy_norm(&p) - expected).abs() < 1e-12);
    }

    #[test]
    fn mc_is_the_mean() {
        assert_eq!(aggregate_mc(&[0.0; 5]), 0.0);
        assert_eq!(aggregate_mc(&[1.0; 5]), 1.0);
        assert!((aggregate_mc(&[0.1, 0.2, 0.3, 0.4, 0.5]) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn complexity_split_uses_strict_inequality() {
        let equal: BTreeMap<String, f64> = [("a".to_string(), 0.5), ("b".to_string(), 0.5)].into();
        let (complex, simple) = complexity_split(&equal).unwrap();
        assert!(complex.is_empty());
        assert_eq!(simple.len(), 2);

        let scores: BTreeMap<String, f64> = [
            ("Portuguese-GSD".to_string(), 0.60),
            ("Portuguese-Bosque".to_string(), 0.52),
            ("Galician-TreeGal".to_string(), 0.55),
            ("Other".to_string(), 0.61),
        ]
        .into();
        let (complex, _) = complexity_split(&scores).unwrap();
        assert_eq!(
            complex,
            ["Other".to_string(), "Portuguese-GSD".to_string()].into()
        );
        assert!(complexity_split(&BTreeMap::from([("a".to_string(), 1.0)])).is_err());
    }

    #[test]
    fn profile_from_sentences_skips_root_head_tags() {
        use crate::conllu::{parse_str, Strictness};
        let text = "1\tDie\tder\tDET\t_\tCase=Nom\t2\tdet\t_\t_
2\tHunde\tHund\tNOUN\t_\tNumber=Plur|Case=Nom\t3\tnsubj\t_\t_
3\tbellen\tbellen\tVERB\t_\t_\t0\troot\t_\t_
";
        let s = parse_str(text, Strictness::Strict).unwrap();
        let p = VocabProfile::from_sentences(&s, CaseHandling::Exact);
        assert_eq!(p.total_tokens(), 3);
        assert_eq!(p.delex_head_tags.len(), 2);
        assert_eq!(p.delex_head_tags["NOUN|Case=Nom|Number=Plur"]["VERB"], 1);
        assert_eq!(p.delex_head_tags["DET|Case=Nom"]["NOUN"], 1);
    }
}
