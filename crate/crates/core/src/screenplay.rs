//! Screenplay parsing in the usual screenwriting markup (scene headings,
//! transitions, character cues with dialogue blocks), pair-run dialogue
//! extraction, and the classic three-rule test.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gender::{Gender, ReferenceLexicon};
use crate::metrics::{Dialogue, DialogueSet, Origin};

const HEADING_PREFIXES: &[&str] = &["INT.", "EXT.", "EST.", "INT/EXT", "INT./EXT.", "I/E"];
const MAX_CUE_CHARS: usize = 40;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptLine {
    pub character_cue: String,
    pub utterance: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Scene {
    /// Heading or transition that opened the scene; empty for text before
    /// the first one.
    pub heading: String,
    pub lines: Vec<ScriptLine>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ScriptDocument {
    pub title: String,
    pub scenes: Vec<Scene>,
}

impl ScriptDocument {
    pub fn line_count(&self) -> usize {
        self.scenes.iter().map(|s| s.lines.len()).sum()
    }

    /// Canonical text form: optional title page line, then each heading and
    /// each cue/utterance block separated by blank lines. Parsing the result
    /// gives back an equal document.
    pub fn render(&self) -> String {
        let mut out = String::new();
        if !self.title.is_empty() {
            out.push_str("Title: ");
            out.push_str(&self.title);
            out.push_str("\n\n");
        }
        for scene in &self.scenes {
            if !scene.heading.is_empty() {
                out.push_str(&scene.heading);
                out.push_str("\n\n");
            }
            for line in &scene.lines {
                out.push_str(&line.character_cue);
                out.push('\n');
                out.push_str(&line.utterance);
                out.push_str("\n\n");
            }
        }
        out
    }
}

/// Character name in canonical form: parentheticals such as `(V.O.)`,
/// `(O.S.)` or `(CONT'D)` and the dual-dialogue caret removed, whitespace
/// collapsed, uppercased.
pub fn normalize_cue(raw: &str) -> String {
    let mut kept = String::with_capacity(raw.len());
    let mut depth = 0usize;
    for c in raw.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            '^' => {}
            _ if depth == 0 => kept.push(c),
            _ => {}
        }
    }
    kept.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_uppercase()
}

fn is_transition(line: &str) -> bool {
    if line.chars().any(char::is_lowercase) {
        return false;
    }
    line.ends_with("TO:")
        || line.starts_with("FADE IN")
        || line.starts_with("FADE OUT")
        || line.starts_with("FADE TO BLACK")
        || line.starts_with("CUT TO BLACK")
}

/// Scene heading (`INT.`, `EXT.`, `EST.` …, any case) or transition.
pub fn is_scene_cut(line: &str) -> bool {
    let upper = line.to_uppercase();
    HEADING_PREFIXES.iter().any(|p| upper.starts_with(p)) || is_transition(line)
}

fn is_parenthetical(line: &str) -> bool {
    line.starts_with('(') && line.ends_with(')')
}

fn is_cue(line: &str) -> bool {
    if is_scene_cut(line) || is_parenthetical(line) || line.ends_with(':') {
        return false;
    }
    let cue = normalize_cue(line);
    !cue.is_empty()
        && cue.chars().count() <= MAX_CUE_CHARS
        && cue.chars().any(char::is_alphabetic)
        && !line.chars().filter(|c| !c.is_whitespace()).any(char::is_lowercase)
}

fn title_of(line: &str) -> Option<&str> {
    let (key, value) = line.split_once(':')?;
    key.trim().eq_ignore_ascii_case("title").then(|| value.trim())
}

/// Parses a plain-text screenplay.
///
/// A character cue is an uppercase line preceded by a blank line (or a
/// heading, or the start of the text) and followed directly by dialogue.
/// Parenthetical lines inside the dialogue block are skipped; everything else
/// that is neither a cue block nor a scene cut is action and discarded.
pub fn parse_script(text: &str) -> Result<ScriptDocument> {
    let lines: Vec<&str> = text.lines().map(str::trim).collect();
    let mut doc = ScriptDocument::default();
    let mut i = 0;

    while i < lines.len() && lines[i].is_empty() {
        i += 1;
    }
    if let Some(title) = lines.get(i).and_then(|l| title_of(l)) {
        doc.title = title.to_string();
        i += 1;
    }

    let mut scene = Scene::default();
    let mut boundary = true;
    while i < lines.len() {
        let line = lines[i];
        if line.is_empty() {
            boundary = true;
            i += 1;
            continue;
        }
        if is_scene_cut(line) {
            if !scene.heading.is_empty() || !scene.lines.is_empty() {
                doc.scenes.push(std::mem::take(&mut scene));
            }
            scene.heading = line.to_string();
            boundary = true;
            i += 1;
            continue;
        }
        let next_has_text = lines.get(i + 1).is_some_and(|l| !l.is_empty());
        if boundary && next_has_text && is_cue(line) {
            let mut parts = Vec::new();
            let mut j = i + 1;
            while j < lines.len() && !lines[j].is_empty() && !is_scene_cut(lines[j]) {
                if !is_parenthetical(lines[j]) {
                    parts.push(lines[j]);
                }
                j += 1;
            }
            if !parts.is_empty() {
                scene.lines.push(ScriptLine {
                    character_cue: normalize_cue(line),
                    utterance: parts.join(" "),
                });
            }
            boundary = false;
            i = j;
            continue;
        }
        boundary = false;
        i += 1;
    }
    if !scene.heading.is_empty() || !scene.lines.is_empty() {
        doc.scenes.push(scene);
    }
    if doc.line_count() == 0 {
        return Err(Error::NotAScreenplay);
    }
    Ok(doc)
}

/// Character genders for one movie; unlisted cues are `U`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CastGenders(BTreeMap<String, Gender>);

impl CastGenders {
    pub fn new(map: BTreeMap<String, Gender>) -> Self {
        CastGenders(map.into_iter().map(|(k, v)| (normalize_cue(&k), v)).collect())
    }

    pub fn gender(&self, cue: &str) -> Gender {
        self.0.get(cue).copied().unwrap_or(Gender::U)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Gender)> {
        self.0.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn swapped(&self) -> CastGenders {
        CastGenders(self.0.iter().map(|(k, g)| (k.clone(), g.swapped())).collect())
    }
}

impl FromIterator<(String, Gender)> for CastGenders {
    fn from_iter<I: IntoIterator<Item = (String, Gender)>>(iter: I) -> Self {
        CastGenders::new(iter.into_iter().collect())
    }
}

struct Run<'a> {
    speakers: Vec<&'a str>,
    lines: Vec<(usize, &'a ScriptLine)>,
}

impl<'a> Run<'a> {
    fn new() -> Self {
        Run {
            speakers: Vec::with_capacity(2),
            lines: Vec::new(),
        }
    }

    /// Adds the line if its speaker fits the run's (at most two) speakers.
    fn accept(&mut self, idx: usize, line: &'a ScriptLine) -> bool {
        let cue = line.character_cue.as_str();
        if !self.speakers.contains(&cue) {
            if self.speakers.len() == 2 {
                return false;
            }
            self.speakers.push(cue);
        }
        self.lines.push((idx, line));
        true
    }
}

/// Splits every scene into maximal runs of lines spoken by exactly one pair
/// of characters and turns each two-speaker run into a dialogue.
///
/// A line whose speaker is outside the current pair closes the run and opens
/// the next one; scene cuts close runs too. Single-speaker runs are dropped.
/// `g1` is the gender of the run's first speaker.
pub fn build_script_dialogues(
    movie_id: &str,
    doc: &ScriptDocument,
    cast: &CastGenders,
    refdet: &ReferenceLexicon,
) -> DialogueSet {
    let mut out = Vec::new();
    let mut close = |run: Run, scene_idx: usize| {
        if run.speakers.len() != 2 {
            return;
        }
        let text: Vec<&str> = run.lines.iter().map(|(_, l)| l.utterance.as_str()).collect();
        let sources = run
            .lines
            .iter()
            .map(|(i, _)| format!("s{scene_idx}:l{i}"))
            .collect();
        let (a, b) = (run.speakers[0], run.speakers[1]);
        out.push(
            Dialogue::from_text(cast.gender(a), cast.gender(b), &text.join("\n"), refdet)
                .with_participants(a, b)
                .with_sources(sources)
                .with_origin(Origin::Movie(movie_id.to_string())),
        );
    };
    for (si, scene) in doc.scenes.iter().enumerate() {
        let mut run = Run::new();
        for (li, line) in scene.lines.iter().enumerate() {
            if !run.accept(li, line) {
                close(std::mem::replace(&mut run, Run::new()), si);
                run.accept(li, line);
            }
        }
        close(run, si);
    }
    DialogueSet::new(movie_id, out)
}

/// Which characters count as women for the first rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CharacterScope {
    /// Every cast entry with gender F.
    #[default]
    Cast,
    /// Only characters taking part in at least one dialogue.
    Speaking,
}

/// Number of rules passed (0–3): at least two female characters; a dialogue
/// between two of them; such a dialogue without male references.
pub fn classic_bechdel(ds: &DialogueSet, cast: &CastGenders, scope: CharacterScope) -> u8 {
    let women: BTreeSet<&str> = match scope {
        CharacterScope::Cast => cast
            .iter()
            .filter(|(_, g)| *g == Gender::F)
            .map(|(c, _)| c)
            .collect(),
        CharacterScope::Speaking => ds
            .dialogues()
            .iter()
            .flat_map(|d| [(&d.participants.0, d.g1), (&d.participants.1, d.g2)])
            .filter(|(_, g)| *g == Gender::F)
            .map(|(c, _)| c.as_str())
            .collect(),
    };
    if women.len() < 2 {
        return 0;
    }
    let ff: Vec<&Dialogue> = ds
        .dialogues()
        .iter()
        .filter(|d| d.g1 == Gender::F && d.g2 == Gender::F)
        .collect();
    if ff.is_empty() {
        return 1;
    }
    if ff.iter().all(|d| d.m) {
        return 2;
    }
    3
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gender::{GenderLexicon, References};

    fn refdet() -> ReferenceLexicon {
        ReferenceLexicon::with_default_words(GenderLexicon::default())
    }

    fn line(cue: &str, text: &str) -> ScriptLine {
        ScriptLine {
            character_cue: cue.into(),
            utterance: text.into(),
        }
    }

    #[test]
    fn minimal_scene() {
        let doc = parse_script("INT. ROOM\n\nALICE\nHello.\n\nBOB\nHi.").unwrap();
        assert_eq!(doc.scenes.len(), 1);
        assert_eq!(doc.scenes[0].heading, "INT. ROOM");
        assert_eq!(doc.scenes[0].lines, vec![line("ALICE", "Hello."), line("BOB", "Hi.")]);
    }

    #[test]
    fn cue_extensions_stripped() {
        let doc = parse_script("ALICE (V.O.)\nHello.").unwrap();
        assert_eq!(doc.scenes[0].lines[0].character_cue, "ALICE");
        assert_eq!(normalize_cue("  bob  (cont'd) ^"), "BOB");
        assert_eq!(normalize_cue("MARY JANE (O.S.)"), "MARY JANE");
    }

    #[test]
    fn prose_is_not_a_screenplay() {
        let err = parse_script("It was a dark and stormy night.\nThe end.").unwrap_err();
        assert!(matches!(err, Error::NotAScreenplay));
        assert!(matches!(parse_script(""), Err(Error::NotAScreenplay)));
    }

    #[test]
    fn parentheticals_actions_and_transitions() {
        let text = "\
Title: Test Movie

FADE IN:

EXT. STREET - NIGHT

Rain falls. ALICE runs.

ALICE
(breathless)
Wait!
Please wait.

CUT TO:

int. car - continuous

BOB
(beat)

BOB
No.
";
        let doc = parse_script(text).unwrap();
        assert_eq!(doc.title, "Test Movie");
        let headings: Vec<&str> = doc.scenes.iter().map(|s| s.heading.as_str()).collect();
        assert_eq!(headings, vec!["FADE IN:", "EXT. STREET - NIGHT", "CUT TO:", "int. car - continuous"]);
        assert_eq!(doc.scenes[1].lines, vec![line("ALICE", "Wait! Please wait.")]);
        assert_eq!(doc.scenes[3].lines, vec![line("BOB", "No.")]);
    }

    #[test]
    fn action_paragraph_lines_are_not_cues() {
        let text = "INT. HALL\n\nThe door opens.\nNOBODY\nis there.\n\nALICE\nHello?";
        let doc = parse_script(text).unwrap();
        assert_eq!(doc.scenes[0].lines, vec![line("ALICE", "Hello?")]);
    }

    fn scene_of(cues: &[&str]) -> ScriptDocument {
        ScriptDocument {
            title: String::new(),
            scenes: vec![Scene {
                heading: "INT. X".into(),
                lines: cues.iter().map(|c| line(c, "words")).collect(),
            }],
        }
    }

    fn pairs(ds: &DialogueSet) -> Vec<(String, String, usize)> {
        ds.dialogues()
            .iter()
            .map(|d| (d.participants.0.clone(), d.participants.1.clone(), d.source_ids.len()))
            .collect()
    }

    #[test]
    fn alternating_pair_is_one_dialogue() {
        let ds = build_script_dialogues("m", &scene_of(&["A", "B", "A", "B"]), &CastGenders::default(), &refdet());
        assert_eq!(pairs(&ds), vec![("A".into(), "B".into(), 4)]);
    }

    #[test]
    fn third_speaker_breaks_the_pair() {
        let ds = build_script_dialogues("m", &scene_of(&["A", "B", "C", "B"]), &CastGenders::default(), &refdet());
        assert_eq!(pairs(&ds), vec![("A".into(), "B".into(), 2), ("C".into(), "B".into(), 2)]);
        let ds = build_script_dialogues("m", &scene_of(&["A", "B", "A", "C", "A"]), &CastGenders::default(), &refdet());
        assert_eq!(pairs(&ds), vec![("A".into(), "B".into(), 3), ("C".into(), "A".into(), 2)]);
    }

    #[test]
    fn monologues_and_scene_cuts() {
        let mut doc = scene_of(&["A", "A", "A"]);
        doc.scenes.push(Scene {
            heading: "EXT. Y".into(),
            lines: vec![line("A", "x"), line("B", "y")],
        });
        doc.scenes.push(Scene {
            heading: "EXT. Z".into(),
            lines: vec![line("B", "z")],
        });
        let ds = build_script_dialogues("m", &doc, &CastGenders::default(), &refdet());
        assert_eq!(pairs(&ds), vec![("A".into(), "B".into(), 2)]);
        assert_eq!(ds.dialogues()[0].source_ids, vec!["s1:l0", "s1:l1"]);
    }

    #[test]
    fn genders_and_references() {
        let cast: CastGenders = [("ANN".to_string(), Gender::F), ("BEA".to_string(), Gender::F)]
            .into_iter()
            .collect();
        let doc = ScriptDocument {
            title: String::new(),
            scenes: vec![Scene {
                heading: String::new(),
                lines: vec![line("ANN", "Did you see him?"), line("BEA", "Yes."), line("CARL", "Hi.")],
            }],
        };
        let ds = build_script_dialogues("m", &doc, &cast, &refdet());
        let d = &ds.dialogues()[0];
        assert_eq!((d.g1, d.g2, d.references()), (Gender::F, Gender::F, References { m: true, f: false }));
        assert_eq!(d.origin, Origin::Movie("m".into()));
    }

    fn ff(m: bool) -> Dialogue {
        Dialogue::new(Gender::F, Gender::F, References { m, f: false }).with_participants("A", "B")
    }

    #[test]
    fn classic_ladder() {
        let men: CastGenders = [("X".to_string(), Gender::M), ("Y".to_string(), Gender::M)].into_iter().collect();
        let women: CastGenders = [("A".to_string(), Gender::F), ("B".to_string(), Gender::F)].into_iter().collect();
        let mm = Dialogue::new(Gender::M, Gender::M, References::default());
        assert_eq!(classic_bechdel(&DialogueSet::new("m", vec![mm.clone()]), &men, CharacterScope::Cast), 0);
        assert_eq!(classic_bechdel(&DialogueSet::new("m", vec![]), &women, CharacterScope::Cast), 1);
        assert_eq!(classic_bechdel(&DialogueSet::new("m", vec![ff(true)]), &women, CharacterScope::Cast), 2);
        assert_eq!(
            classic_bechdel(&DialogueSet::new("m", vec![ff(true), ff(false)]), &women, CharacterScope::Cast),
            3
        );
        // speaking scope ignores silent cast members
        assert_eq!(classic_bechdel(&DialogueSet::new("m", vec![mm]), &women, CharacterScope::Speaking), 0);
    }

    #[test]
    fn render_round_trip_example() {
        let doc = parse_script("Title: T\n\nINT. ROOM\n\nALICE\nHello there.\n(beat)\nFriend.\n\nBOB\nHi.").unwrap();
        assert_eq!(parse_script(&doc.render()).unwrap(), doc);
    }
}
