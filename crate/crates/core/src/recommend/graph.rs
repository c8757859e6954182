//! Learning-content ontology: contents with grade and level attributes,
//! linked by prerequisite edges.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{RankLevel, RecommendError};

/// Difficulty level of a content within its grade.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ContentLevel {
    Elementary,
    Intermediate,
    HighIntermediate,
    Advanced,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContentNode {
    pub id: String,
    pub title: String,
    pub category: String,
    pub grade: i32,
    pub level: ContentLevel,
    #[serde(default)]
    pub prerequisites: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject: Option<String>,
}

#[derive(Deserialize)]
struct GraphFile {
    nodes: Vec<ContentNode>,
}

#[derive(Serialize)]
struct GraphFileRef<'a> {
    nodes: &'a [ContentNode],
}

/// An acyclic prerequisite graph. Node order is the order of the source
/// document and is used to break ties.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ContentGraph {
    nodes: Vec<ContentNode>,
    index: HashMap<String, usize>,
}

const SAMPLE_GRAPH: &str = include_str!("sample_graph.json");

impl ContentGraph {
    /// Checks that ids are unique, every prerequisite resolves and there
    /// are no cycles.
    pub fn new(nodes: Vec<ContentNode>) -> Result<Self, RecommendError> {
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            if index.insert(n.id.clone(), i).is_some() {
                return Err(RecommendError::DuplicateContent(n.id.clone()));
            }
        }
        for n in &nodes {
            if let Some(p) = n.prerequisites.iter().find(|p| !index.contains_key(p.as_str())) {
                return Err(RecommendError::UnknownPrerequisite {
                    content: n.id.clone(),
                    prerequisite: p.clone(),
                });
            }
        }
        let graph = Self { nodes, index };
        graph.check_acyclic()?;
        Ok(graph)
    }

    /// Number-line and groups-of-numbers contents for grades 3 to 5.
    pub fn sample() -> Self {
        Self::from_json(SAMPLE_GRAPH).expect("bundled graph is valid")
    }

    pub fn from_json(text: &str) -> Result<Self, RecommendError> {
        let file: GraphFile = serde_json::from_str(text).map_err(|e| RecommendError::Json(e.to_string()))?;
        Self::new(file.nodes)
    }

    pub fn read(path: &Path) -> Result<Self, RecommendError> {
        let text = std::fs::read_to_string(path).map_err(|e| RecommendError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&GraphFileRef { nodes: &self.nodes }).expect("graph is serializable")
    }

    pub fn nodes(&self) -> &[ContentNode] {
        &self.nodes
    }

    pub fn get(&self, id: &str) -> Option<&ContentNode> {
        self.index.get(id).map(|&i| &self.nodes[i])
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn check_acyclic(&self) -> Result<(), RecommendError> {
        // 0 = unvisited, 1 = on the stack, 2 = done.
        let mut state = vec![0u8; self.nodes.len()];
        for start in 0..self.nodes.len() {
            if state[start] != 0 {
                continue;
            }
            let mut stack = vec![(start, 0usize)];
            state[start] = 1;
            while let Some(&mut (node, ref mut next)) = stack.last_mut() {
                if let Some(p) = self.nodes[node].prerequisites.get(*next) {
                    *next += 1;
                    let j = self.index[p.as_str()];
                    match state[j] {
                        0 => {
                            state[j] = 1;
                            stack.push((j, 0));
                        }
                        1 => return Err(RecommendError::Cycle(p.clone())),
                        _ => {}
                    }
                } else {
                    state[node] = 2;
                    stack.pop();
                }
            }
        }
        Ok(())
    }

    /// Appends `i` after its not-yet-emitted, unmastered prerequisites.
    fn emit(&self, i: usize, mastered: &BTreeSet<String>, emitted: &mut [bool], out: &mut Vec<usize>) {
        if emitted[i] || mastered.contains(&self.nodes[i].id) {
            return;
        }
        emitted[i] = true;
        for p in &self.nodes[i].prerequisites {
            self.emit(self.index[p.as_str()], mastered, emitted, out);
        }
        out.push(i);
    }
}

/// Contents matching `level` relative to `current_grade`, each preceded by
/// its prerequisites. See [`recommend_contents_with`].
pub fn recommend_contents(
    graph: &ContentGraph,
    level: RankLevel,
    current_grade: i32,
) -> Result<Vec<&ContentNode>, RecommendError> {
    recommend_contents_with(graph, level, current_grade, &BTreeSet::new())
}

/// Like [`recommend_contents`], but contents whose ids are in `mastered`
/// (and the prerequisites reached only through them) are left out.
///
/// The result is prerequisite-closed, topologically sorted and free of
/// duplicates; targets appear in graph order.
pub fn recommend_contents_with<'g>(
    graph: &'g ContentGraph,
    level: RankLevel,
    current_grade: i32,
    mastered: &BTreeSet<String>,
) -> Result<Vec<&'g ContentNode>, RecommendError> {
    let grade = current_grade + level.grade_offset();
    if !graph.nodes.iter().any(|n| n.grade == grade) {
        return Err(RecommendError::UnknownGrade(grade));
    }
    let mut emitted = vec![false; graph.nodes.len()];
    let mut out = Vec::new();
    for (i, n) in graph.nodes.iter().enumerate() {
        if n.grade == grade && n.level == level.content_level() {
            graph.emit(i, mastered, &mut emitted, &mut out);
        }
    }
    Ok(out.into_iter().map(|i| &graph.nodes[i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(id: &str, grade: i32, level: ContentLevel, prereqs: &[&str]) -> ContentNode {
        ContentNode {
            id: id.into(),
            title: id.into(),
            category: "Number and Calculation".into(),
            grade,
            level,
            prerequisites: prereqs.iter().map(|s| s.to_string()).collect(),
            area: None,
            subject: None,
        }
    }

    fn ids(nodes: &[&ContentNode]) -> Vec<String> {
        nodes.iter().map(|n| n.id.clone()).collect()
    }

    #[test]
    fn sample_is_valid() {
        let g = ContentGraph::sample();
        assert_eq!(g.len(), 15);
        assert_eq!(ContentGraph::from_json(&g.to_json()).unwrap(), g);
    }

    #[test]
    fn number_line_chain() {
        let g = ContentGraph::sample();
        let got = recommend_contents(&g, RankLevel::Cgil, 4).unwrap();
        let ids = ids(&got);
        assert_eq!(ids[..3], ["positive-integer", "positive-number", "number-line"]);
    }

    #[test]
    fn next_grade_elementary() {
        let g = ContentGraph::sample();
        let got = recommend_contents(&g, RankLevel::Ngel, 4).unwrap();
        let targets: Vec<_> = got
            .iter()
            .filter(|n| n.grade == 5 && n.level == ContentLevel::Elementary)
            .map(|n| n.id.as_str())
            .collect();
        assert_eq!(targets, ["negative-number", "decimals-on-line"]);
        assert!(got.iter().all(|n| n.grade < 5 || n.level == ContentLevel::Elementary));
        assert_eq!(got.last().unwrap().id, "decimals-on-line");
    }

    #[test]
    fn mastered_contents_are_skipped() {
        let g = ContentGraph::sample();
        let mastered: BTreeSet<String> = ["number-line".to_string()].into();
        let got = recommend_contents_with(&g, RankLevel::Ngel, 4, &mastered).unwrap();
        assert_eq!(
            ids(&got),
            ["negative-number", "fractions-on-line", "decimals-on-line"]
        );
    }

    #[test]
    fn unknown_grade() {
        let empty = ContentGraph::default();
        assert_eq!(
            recommend_contents(&empty, RankLevel::Cgel, 4),
            Err(RecommendError::UnknownGrade(4))
        );
        let g = ContentGraph::sample();
        assert_eq!(
            recommend_contents(&g, RankLevel::Ngil, 5),
            Err(RecommendError::UnknownGrade(6))
        );
    }

    #[test]
    fn invalid_graphs() {
        use ContentLevel::*;
        let cyclic = vec![node("a", 4, Elementary, &["b"]), node("b", 4, Elementary, &["a"])];
        assert!(matches!(ContentGraph::new(cyclic), Err(RecommendError::Cycle(_))));
        let self_loop = vec![node("a", 4, Elementary, &["a"])];
        assert!(matches!(ContentGraph::new(self_loop), Err(RecommendError::Cycle(_))));
        let dangling = vec![node("a", 4, Elementary, &["zz"])];
        assert!(matches!(
            ContentGraph::new(dangling),
            Err(RecommendError::UnknownPrerequisite { .. })
        ));
        let dup = vec![node("a", 4, Elementary, &[]), node("a", 5, Advanced, &[])];
        assert_eq!(ContentGraph::new(dup), Err(RecommendError::DuplicateContent("a".into())));
        assert!(matches!(ContentGraph::from_json("{\"nodes\": 3}"), Err(RecommendError::Json(_))));
    }

    #[test]
    fn output_is_closed_sorted_and_unique() {
        let g = ContentGraph::sample();
        for level in RankLevel::ALL {
            for grade in 3..=5 {
                let Ok(got) = recommend_contents(&g, level, grade) else {
                    continue;
                };
                let pos: HashMap<&str, usize> = got.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();
                assert_eq!(pos.len(), got.len());
                for (i, n) in got.iter().enumerate() {
                    for p in &n.prerequisites {
                        assert!(pos[p.as_str()] < i, "{} before {}", p, n.id);
                    }
                }
            }
        }
    }
}
