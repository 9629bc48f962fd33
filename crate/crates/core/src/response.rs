//! Parsing of tagged yes/no model answers and their conversion into likelihood records.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::LabelSpace;
use crate::likelihood::{LikelihoodRecord, PairHandling, PROBABILITY_FLOOR};

/// One model answer to a single (instance, label) question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawResponse {
    pub id: String,
    pub label: String,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Yes,
    No,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseStatus {
    Ok,
    MissingAnswer,
    MalformedConfidence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedAnswer {
    pub answer: Option<Answer>,
    pub confidence: Option<u8>,
    pub status: ParseStatus,
}

/// Content of the last complete `<tag>...</tag>` pair.
fn last_tag<'a>(text: &'a str, tag: &str) -> Option<&'a str> {
    let open = format!("<{tag}>");
    let close = format!("</{tag}>");
    let end = text.rfind(&close)?;
    let start = text[..end].rfind(&open)? + open.len();
    Some(&text[start..end])
}

/// Extracts the final `<answer>` and `<confidence>` tags. Never fails; problems are
/// reported through [`ParseStatus`].
pub fn parse_response(text: &str) -> ParsedAnswer {
    let answer = last_tag(text, "answer").and_then(|a| {
        let a = a.trim();
        if a.eq_ignore_ascii_case("yes") {
            Some(Answer::Yes)
        } else if a.eq_ignore_ascii_case("no") {
            Some(Answer::No)
        } else {
            None
        }
    });
    let confidence = last_tag(text, "confidence").map(|c| match c.trim().parse::<u8>() {
        Ok(n @ 1..=5) => Some(n),
        _ => None,
    });
    let status = match (answer, confidence) {
        (None, _) => ParseStatus::MissingAnswer,
        (Some(_), Some(None)) => ParseStatus::MalformedConfidence,
        _ => ParseStatus::Ok,
    };
    ParsedAnswer {
        answer,
        confidence: confidence.flatten(),
        status,
    }
}

/// Treatment of (id, label) questions with no usable answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FillPolicy {
    #[default]
    Error,
    /// Substitute the uninformative pair (0.5, 0.5).
    Neutral,
}

/// Likelihood pair for a hard yes/no decision.
pub fn hard_decision_pair(answer: Answer) -> (f64, f64) {
    match answer {
        Answer::Yes => (1.0 - PROBABILITY_FLOOR, PROBABILITY_FLOOR),
        Answer::No => (PROBABILITY_FLOOR, 1.0 - PROBABILITY_FLOOR),
    }
}

/// Groups responses by id (first-appearance order) into one record per id.
pub fn responses_to_records(
    responses: &[RawResponse],
    space: &LabelSpace,
    fill: FillPolicy,
) -> Result<Vec<LikelihoodRecord>> {
    let l = space.len();
    let mut order: Vec<String> = Vec::new();
    let mut slots: HashMap<String, Vec<Option<ParsedAnswer>>> = HashMap::new();
    for r in responses {
        let i = space.index_of(&r.label)?;
        let entry = slots.entry(r.id.clone()).or_insert_with(|| {
            order.push(r.id.clone());
            vec![None; l]
        });
        if entry[i].is_some() {
            return Err(Error::DuplicateResponse {
                id: r.id.clone(),
                label: r.label.clone(),
            });
        }
        entry[i] = Some(parse_response(&r.text));
    }

    let mut records = Vec::with_capacity(order.len());
    for id in order {
        let parsed = &slots[&id];
        let mut pairs = Vec::with_capacity(l);
        let mut confidence = Vec::with_capacity(l);
        for (i, p) in parsed.iter().enumerate() {
            match p.and_then(|p| p.answer.map(|a| (a, p.confidence))) {
                Some((answer, conf)) => {
                    pairs.push(hard_decision_pair(answer));
                    confidence.push(conf);
                }
                None => match fill {
                    FillPolicy::Error => {
                        return Err(Error::MissingResponse {
                            id,
                            label: space.names()[i].clone(),
                        })
                    }
                    FillPolicy::Neutral => {
                        pairs.push((0.5, 0.5));
                        confidence.push(None);
                    }
                },
            }
        }
        records.push(
            LikelihoodRecord::from_pairs(id, space.clone(), &pairs, PairHandling::Preserve)?
                .with_confidence(confidence),
        );
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::LabelVector;
    use crate::likelihood::threshold_decode;

    #[test]
    fn parse_examples() {
        let p = parse_response("Reasoning here.<confidence>4</confidence><answer>yes</answer>");
        assert_eq!(p, ParsedAnswer { answer: Some(Answer::Yes), confidence: Some(4), status: ParseStatus::Ok });

        let p = parse_response("...<answer>No</answer>");
        assert_eq!(p, ParsedAnswer { answer: Some(Answer::No), confidence: None, status: ParseStatus::Ok });

        let p = parse_response("I think the answer is yes.");
        assert_eq!(p, ParsedAnswer { answer: None, confidence: None, status: ParseStatus::MissingAnswer });
    }

    #[test]
    fn last_occurrence_wins() {
        let p = parse_response(
            "Draft: <answer>yes</answer> <confidence>2</confidence>. Final: <confidence>5</confidence> <answer> NO </answer>",
        );
        assert_eq!(p.answer, Some(Answer::No));
        assert_eq!(p.confidence, Some(5));
    }

    #[test]
    fn malformed_content() {
        let p = parse_response("<confidence>7</confidence><answer>yes</answer>");
        assert_eq!(p.status, ParseStatus::MalformedConfidence);
        assert_eq!(p.answer, Some(Answer::Yes));
        assert_eq!(p.confidence, None);

        let p = parse_response("<confidence>high</confidence><answer>maybe</answer>");
        assert_eq!(p.status, ParseStatus::MissingAnswer);
        assert_eq!(p.answer, None);

        let p = parse_response("<answer>yes");
        assert_eq!(p.status, ParseStatus::MissingAnswer);
    }

    fn resp(id: &str, label: &str, text: &str) -> RawResponse {
        RawResponse { id: id.into(), label: label.into(), text: text.into() }
    }

    #[test]
    fn assembles_full_record() {
        let space = LabelSpace::plutchik();
        let responses: Vec<_> = space
            .names()
            .iter()
            .enumerate()
            .map(|(i, name)| {
                let ans = if i % 3 == 0 { "yes" } else { "no" };
                resp("s1", name, &format!("<confidence>3</confidence><answer>{ans}</answer>"))
            })
            .collect();
        let records = responses_to_records(&responses, &space, FillPolicy::Error).unwrap();
        assert_eq!(records.len(), 1);
        let rec = &records[0];
        assert_eq!(rec.confidence, vec![Some(3); 8]);
        let decoded = threshold_decode(rec);
        let expected: Vec<bool> = (0..8).map(|i| i % 3 == 0).collect();
        assert_eq!(decoded, LabelVector::from_bools(&expected));
    }

    #[test]
    fn missing_and_duplicate_responses() {
        let space = LabelSpace::new(["joy", "anger"]).unwrap();
        let partial = vec![resp("a", "joy", "<answer>yes</answer>")];
        assert!(matches!(
            responses_to_records(&partial, &space, FillPolicy::Error),
            Err(Error::MissingResponse { label, .. }) if label == "anger"
        ));
        let rec = &responses_to_records(&partial, &space, FillPolicy::Neutral).unwrap()[0];
        assert_eq!((rec.p1()[1], rec.p0()[1]), (0.5, 0.5));

        let unparseable = vec![resp("a", "joy", "<answer>yes</answer>"), resp("a", "anger", "no idea")];
        assert!(responses_to_records(&unparseable, &space, FillPolicy::Error).is_err());

        let dup = vec![resp("a", "joy", "<answer>yes</answer>"), resp("a", "joy", "<answer>no</answer>")];
        assert!(matches!(
            responses_to_records(&dup, &space, FillPolicy::Neutral),
            Err(Error::DuplicateResponse { .. })
        ));
        let unknown = vec![resp("a", "awe", "<answer>yes</answer>")];
        assert!(matches!(
            responses_to_records(&unknown, &space, FillPolicy::Neutral),
            Err(Error::UnknownLabel(_))
        ));
    }

    #[test]
    fn hard_pairs_are_floored() {
        assert_eq!(hard_decision_pair(Answer::Yes), (1.0 - 1e-9, 1e-9));
        assert_eq!(hard_decision_pair(Answer::No), (1e-9, 1.0 - 1e-9));
    }
}
