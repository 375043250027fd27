use engage_core::codebook::{category_of, Appeal, Category, Decision, Frame, MessageAnnotation, Span};
use engage_core::corpus::{default_group_registry, Corpus, Grade, Segment, Transcript, Trimester};
use engage_core::keyness::KeywordList;
use engage_core::reliability::AnnotationSet;

pub fn segment(index: usize, text: impl Into<String>, token_count: usize) -> Segment {
    Segment {
        id: format!("s{index:05}"),
        index,
        text: text.into(),
        token_count,
        silence: false,
        start_ms: None,
        end_ms: None,
    }
}

pub fn transcript(id: &str, grade: u8, trimester: u8, segments: Vec<Segment>) -> Transcript {
    Transcript {
        id: id.into(),
        teacher_id: format!("teacher-{id}"),
        group_id: format!("group-{id}"),
        grade: Grade::new(grade).expect("valid grade"),
        trimester: Trimester::new(trimester).expect("valid trimester"),
        academic_year: "2021-22".into(),
        segments,
    }
}

pub fn annotation(id: &str, coder: &str, transcript: &str, span: Span, decision: Decision) -> MessageAnnotation {
    MessageAnnotation {
        id: id.into(),
        coder_id: coder.into(),
        transcript_id: transcript.into(),
        span,
        decision,
        note: None,
        created_at: 0,
    }
}

/// Per grade (rows 9..=12) and trimester (columns 1..=3) message counts whose
/// margins are 302/176/157/221 by grade and 353/331/172 by trimester.
pub const GRADE_BY_TRIMESTER: [[usize; 3]; 4] = [[125, 117, 60], [73, 68, 35], [65, 61, 31], [90, 85, 46]];

/// A corpus with one transcript per grade and trimester, and a single
/// adjudicated annotation per message. Categories cycle through the codebook.
pub fn analytics_fixture() -> (Corpus, Vec<MessageAnnotation>) {
    let mut transcripts = Vec::new();
    let mut annotations = Vec::new();
    for (gi, row) in GRADE_BY_TRIMESTER.iter().enumerate() {
        for (ti, &n) in row.iter().enumerate() {
            let id = format!("g{}-t{}", gi + 9, ti + 1);
            let segments = (0..n + 5).map(|i| segment(i, "vamos a trabajar", 3)).collect();
            transcripts.push(transcript(&id, gi as u8 + 9, ti as u8 + 1, segments));
            for i in 0..n {
                let c = Category::from_ordinal(annotations.len() % Category::COUNT).expect("ordinal < 8");
                let aid = format!("m{:04}", annotations.len());
                annotations.push(annotation(&aid, "adjudicated", &id, Span::single(i), Decision::Message(c)));
            }
        }
    }
    let corpus = Corpus::new(transcripts, default_group_registry()).expect("fixture corpus is valid");
    (corpus, annotations)
}

pub struct ReductionFixture {
    pub corpus: Corpus,
    pub list: KeywordList,
    pub gold: Vec<MessageAnnotation>,
}

/// 750 page-equivalents at 300 words per page, of which a one-word list
/// retains exactly 75. Segment lengths vary; every tenth segment by token
/// mass carries the keyword.
pub fn reduction_fixture() -> ReductionFixture {
    let filler = ["clase", "hoy", "vemos", "tema", "nuevo", "libro"];
    let sentence = |n: usize, keyword: bool| {
        let mut words: Vec<&str> = (0..n).map(|i| filler[i % filler.len()]).collect();
        if keyword {
            words[n / 2] = "aprobar";
        }
        words.join(" ")
    };
    // Each block of ten segments totals 3000 tokens; its keyword segment has 300.
    let block = [300usize, 250, 350, 200, 400, 300, 280, 320, 310, 290];
    let mut transcripts = Vec::new();
    let mut gold = Vec::new();
    for t in 0..15 {
        let id = format!("r{t:02}");
        let mut segments = Vec::new();
        for b in 0..5 {
            for (k, &n) in block.iter().enumerate() {
                let index = b * block.len() + k;
                let keyword = k == 0;
                segments.push(segment(index, sentence(n, keyword), n));
                if keyword {
                    let span = Span::new(index, index + 1);
                    let c = category_of(Frame::Loss, Appeal::Extrinsic);
                    gold.push(annotation(&format!("{id}-m{b}"), "gold", &id, span, Decision::Message(c)));
                }
            }
        }
        transcripts.push(transcript(&id, 9 + (t % 4) as u8, 1 + (t % 3) as u8, segments));
    }
    ReductionFixture {
        corpus: Corpus::new(transcripts, default_group_registry()).expect("fixture corpus is valid"),
        list: KeywordList::new("fixture", vec!["aprobar".into()]).expect("single keyword"),
        gold,
    }
}

fn pair_sets(pairs: Vec<(Decision, Option<Decision>)>, extra_b: Vec<Decision>) -> (AnnotationSet, AnnotationSet) {
    let mut a = Vec::new();
    let mut b = Vec::new();
    let transcript_of = |i: usize| format!("t{}", i % 4);
    let mut i = 0;
    for (da, db) in pairs {
        let span = Span::new((i / 4) * 4, (i / 4) * 4 + 1);
        a.push(annotation(&format!("a{i:04}"), "coder-a", &transcript_of(i), span, da));
        if let Some(db) = db {
            b.push(annotation(&format!("b{i:04}"), "coder-b", &transcript_of(i), span, db));
        }
        i += 1;
    }
    for db in extra_b {
        let span = Span::new((i / 4) * 4, (i / 4) * 4 + 1);
        b.push(annotation(&format!("b{i:04}"), "coder-b", &transcript_of(i), span, db));
        i += 1;
    }
    let set = |annotations| AnnotationSet {
        corpus_id: "fixture".into(),
        annotations,
    };
    (set(a), set(b))
}

/// Message identification by two coders over 233 units: 230 agreements, one
/// matched pair where only one coder saw a message, and one message found by
/// each coder alone. Percent agreement is 230/233 = 98.71%.
pub fn identification_fixture() -> (AnnotationSet, AnnotationSet) {
    let m = |n: usize| Decision::Message(Category::from_ordinal(n % Category::COUNT).expect("ordinal < 8"));
    let mut pairs: Vec<_> = (0..230).map(|n| (m(n), Some(m(n)))).collect();
    pairs.push((m(3), Some(Decision::NotAMessage)));
    pairs.push((m(5), None));
    pair_sets(pairs, vec![m(6)])
}

/// Category coding where the intrinsic appeal agrees on 54 of 55 units
/// (98.18%) and the identified appeal on 93 of 125 (74.40%).
pub fn coding_fixture() -> (AnnotationSet, AnnotationSet) {
    let d = |f, a| Decision::Message(category_of(f, a));
    let mut pairs = Vec::new();
    for n in 0..54 {
        let f = if n % 2 == 0 { Frame::Gain } else { Frame::Loss };
        pairs.push((d(f, Appeal::Intrinsic), Some(d(f, Appeal::Intrinsic))));
    }
    pairs.push((d(Frame::Gain, Appeal::Intrinsic), Some(d(Frame::Gain, Appeal::Extrinsic))));
    for n in 0..93 {
        let f = if n % 3 == 0 { Frame::Loss } else { Frame::Gain };
        pairs.push((d(f, Appeal::Identified), Some(d(f, Appeal::Identified))));
    }
    for n in 0..32 {
        let f = if n % 2 == 0 { Frame::Gain } else { Frame::Loss };
        pairs.push((d(f, Appeal::Identified), Some(d(f, Appeal::Introjected))));
    }
    for _ in 0..40 {
        pairs.push((d(Frame::Gain, Appeal::Extrinsic), Some(d(Frame::Gain, Appeal::Extrinsic))));
    }
    pair_sets(pairs, vec![])
}
