//! Declarative QCCD device description and its structural validation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ArchError;

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident, $prefix:literal) => {
        $(#[$meta])*
        #[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

id_type!(
    /// User-facing trap identifier.
    TrapId,
    "T"
);
id_type!(
    /// User-facing junction identifier.
    JunctionId,
    "J"
);
id_type!(
    /// User-facing segment identifier.
    SegmentId,
    "S"
);

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrapKind {
    /// Gates may run on ions held here.
    Executable,
    /// Ions may be parked here but no gates run.
    Storage,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrapSpec {
    pub id: TrapId,
    pub capacity: usize,
    pub kind: TrapKind,
    /// Segment attached to slot 0 and to slot `capacity - 1`, respectively.
    #[serde(default)]
    pub ends: [Option<SegmentId>; 2],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JunctionSpec {
    pub id: JunctionId,
    pub segments: Vec<SegmentId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentSpec {
    pub id: SegmentId,
}

/// A QCCD device: linear traps joined by single-ion segments that meet at junctions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchitectureSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub traps: Vec<TrapSpec>,
    #[serde(default)]
    pub junctions: Vec<JunctionSpec>,
    #[serde(default)]
    pub segments: Vec<SegmentSpec>,
}

/// One end of a segment after resolution.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Endpoint {
    /// `(trap, end)` where `end` is 0 for slot 0 and 1 for the last slot.
    TrapEnd(TrapId, usize),
    Junction(JunctionId),
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::TrapEnd(t, e) => write!(f, "{t}.end{e}"),
            Endpoint::Junction(j) => write!(f, "{j}"),
        }
    }
}

impl ArchitectureSpec {
    pub fn from_json(text: &str) -> Result<Self, ArchError> {
        serde_json::from_str(text).map_err(|e| ArchError::Format(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("architecture serializes")
    }

    pub fn total_capacity(&self) -> usize {
        self.traps.iter().map(|t| t.capacity).sum()
    }

    pub fn max_executable_capacity(&self) -> usize {
        self.traps
            .iter()
            .filter(|t| t.kind == TrapKind::Executable)
            .map(|t| t.capacity)
            .max()
            .unwrap_or(0)
    }

    /// Checks every structural invariant and returns each segment's two endpoints, keyed by
    /// segment id.
    pub fn validate(&self) -> Result<BTreeMap<SegmentId, [Endpoint; 2]>, ArchError> {
        if self.traps.is_empty() {
            return Err(ArchError::Empty);
        }
        let mut trap_ids = BTreeSet::new();
        for trap in &self.traps {
            if !trap_ids.insert(trap.id) {
                return Err(ArchError::DuplicateId(trap.id.to_string()));
            }
            if trap.capacity == 0 {
                return Err(ArchError::ZeroCapacity(trap.id));
            }
        }
        let mut junction_ids = BTreeSet::new();
        for junction in &self.junctions {
            if !junction_ids.insert(junction.id) {
                return Err(ArchError::DuplicateId(junction.id.to_string()));
            }
        }
        let mut endpoints: BTreeMap<SegmentId, Vec<Endpoint>> = BTreeMap::new();
        for segment in &self.segments {
            if endpoints.insert(segment.id, Vec::new()).is_some() {
                return Err(ArchError::DuplicateId(segment.id.to_string()));
            }
        }
        let mut attach = |seg: SegmentId, ep: Endpoint| -> Result<(), ArchError> {
            let list = endpoints.get_mut(&seg).ok_or(ArchError::DanglingSegment {
                segment: seg,
                endpoint: ep.to_string(),
            })?;
            if list.contains(&ep) {
                return Err(ArchError::DuplicateAttachment {
                    segment: seg,
                    endpoint: ep.to_string(),
                });
            }
            list.push(ep);
            Ok(())
        };
        for trap in &self.traps {
            for (end, seg) in trap.ends.iter().enumerate() {
                if let Some(seg) = seg {
                    attach(*seg, Endpoint::TrapEnd(trap.id, end))?;
                }
            }
            if trap.capacity == 1 && trap.ends[0].is_some() && trap.ends[0] == trap.ends[1] {
                return Err(ArchError::DuplicateAttachment {
                    segment: trap.ends[0].unwrap(),
                    endpoint: trap.id.to_string(),
                });
            }
        }
        for junction in &self.junctions {
            if junction.segments.len() < 2 {
                return Err(ArchError::JunctionDegree {
                    junction: junction.id,
                    degree: junction.segments.len(),
                });
            }
            for seg in &junction.segments {
                attach(*seg, Endpoint::Junction(junction.id))?;
            }
        }
        let mut resolved = BTreeMap::new();
        for (seg, list) in endpoints {
            if list.len() != 2 {
                return Err(ArchError::SegmentEndpoints {
                    segment: seg,
                    count: list.len(),
                });
            }
            resolved.insert(seg, [list[0], list[1]]);
        }
        if !self.traps.iter().any(|t| t.kind == TrapKind::Executable) {
            return Err(ArchError::NoExecutableTrap);
        }
        self.check_connected(&resolved)?;
        Ok(resolved)
    }

    fn check_connected(
        &self,
        resolved: &BTreeMap<SegmentId, [Endpoint; 2]>,
    ) -> Result<(), ArchError> {
        // Union-find over traps and junctions; segments glue their two endpoints together.
        let mut index = BTreeMap::new();
        for t in &self.traps {
            let n = index.len();
            index.insert(Endpoint::TrapEnd(t.id, 0), n);
        }
        for j in &self.junctions {
            let n = index.len();
            index.insert(Endpoint::Junction(j.id), n);
        }
        let component = |ep: &Endpoint| match ep {
            Endpoint::TrapEnd(t, _) => index[&Endpoint::TrapEnd(*t, 0)],
            Endpoint::Junction(_) => index[ep],
        };
        let mut parent: Vec<usize> = (0..index.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for [a, b] in resolved.values() {
            let (ra, rb) = (
                find(&mut parent, component(a)),
                find(&mut parent, component(b)),
            );
            parent[ra] = rb;
        }
        let root = find(&mut parent, 0);
        for i in 0..parent.len() {
            if find(&mut parent, i) != root {
                return Err(ArchError::Disconnected);
            }
        }
        Ok(())
    }
}

/// Named device layouts.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Preset {
    /// Four traps hanging off two Y-junctions joined by one segment.
    H,
    /// Six traps: the H layout with a third column, the middle junction becoming an X-junction.
    G2x3,
    /// Two traps joined through a single degree-2 junction.
    Mini,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::H, Preset::G2x3, Preset::Mini];

    pub fn name(self) -> &'static str {
        match self {
            Preset::H => "H",
            Preset::G2x3 => "G2x3",
            Preset::Mini => "MINI",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, ArchError> {
        Self::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(name))
            .ok_or_else(|| ArchError::UnknownPreset(name.to_owned()))
    }

    pub fn build(self, capacity: usize) -> Result<ArchitectureSpec, ArchError> {
        if capacity == 0 {
            return Err(ArchError::ZeroCapacity(TrapId(0)));
        }
        // Each entry lists, per junction, the traps hanging off it; consecutive junctions are
        // chained by one junction-junction segment.
        let columns: &[&[u32]] = match self {
            Preset::H => &[&[0, 1], &[2, 3]],
            Preset::G2x3 => &[&[0, 1], &[2, 3], &[4, 5]],
            Preset::Mini => &[&[0, 1]],
        };
        Ok(junction_chain(self.name(), capacity, columns))
    }
}

pub fn preset(name: &str, capacity: usize) -> Result<ArchitectureSpec, ArchError> {
    Preset::from_name(name)?.build(capacity)
}

/// Builds a chain of junctions, each with its own set of leaf traps attached by slot 0.
/// Trap-junction segments are numbered first (in trap order), junction-junction segments after.
pub fn junction_chain(name: &str, capacity: usize, columns: &[&[u32]]) -> ArchitectureSpec {
    let mut traps = Vec::new();
    let mut junctions = Vec::new();
    let mut next_segment = 0u32;
    for (j, column) in columns.iter().enumerate() {
        let mut segments = Vec::new();
        for &t in column.iter() {
            let seg = SegmentId(next_segment);
            next_segment += 1;
            traps.push(TrapSpec {
                id: TrapId(t),
                capacity,
                kind: TrapKind::Executable,
                ends: [Some(seg), None],
            });
            segments.push(seg);
        }
        junctions.push(JunctionSpec {
            id: JunctionId(j as u32),
            segments,
        });
    }
    for j in 1..junctions.len() {
        let seg = SegmentId(next_segment);
        next_segment += 1;
        junctions[j - 1].segments.push(seg);
        junctions[j].segments.push(seg);
    }
    ArchitectureSpec {
        name: Some(name.to_owned()),
        traps,
        junctions,
        segments: (0..next_segment)
            .map(|s| SegmentSpec { id: SegmentId(s) })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_have_documented_shape() {
        let h = preset("H", 3).unwrap();
        assert_eq!(
            (h.traps.len(), h.junctions.len(), h.segments.len()),
            (4, 2, 5)
        );
        assert!(h.junctions.iter().all(|j| j.segments.len() == 3));

        let g = preset("g2x3", 3).unwrap();
        assert_eq!(
            (g.traps.len(), g.junctions.len(), g.segments.len()),
            (6, 3, 8)
        );
        let degrees: Vec<_> = g.junctions.iter().map(|j| j.segments.len()).collect();
        assert_eq!(degrees, vec![3, 4, 3]);

        let mini = preset("MINI", 2).unwrap();
        assert_eq!(
            (mini.traps.len(), mini.junctions.len(), mini.segments.len()),
            (2, 1, 2)
        );
        for spec in [h, g, mini] {
            spec.validate().unwrap();
        }
    }

    #[test]
    fn unknown_preset_is_rejected() {
        assert!(matches!(
            preset("ring", 3),
            Err(ArchError::UnknownPreset(_))
        ));
    }

    #[test]
    fn dangling_and_duplicate_attachments() {
        let mut spec = preset("MINI", 2).unwrap();
        spec.traps[0].ends[1] = Some(SegmentId(9));
        assert!(matches!(
            spec.validate(),
            Err(ArchError::DanglingSegment { .. })
        ));

        let mut spec = preset("MINI", 2).unwrap();
        spec.junctions[0].segments.push(SegmentId(0));
        assert!(matches!(
            spec.validate(),
            Err(ArchError::DuplicateAttachment { .. })
        ));

        let mut spec = preset("MINI", 2).unwrap();
        spec.traps[1].ends = [Some(SegmentId(0)), None];
        assert!(matches!(
            spec.validate(),
            Err(ArchError::SegmentEndpoints { .. })
        ));
    }

    #[test]
    fn structural_errors() {
        let mut spec = preset("H", 2).unwrap();
        spec.traps
            .iter_mut()
            .for_each(|t| t.kind = TrapKind::Storage);
        assert_eq!(spec.validate(), Err(ArchError::NoExecutableTrap));

        let spec = ArchitectureSpec {
            name: None,
            traps: vec![
                TrapSpec {
                    id: TrapId(0),
                    capacity: 2,
                    kind: TrapKind::Executable,
                    ends: [None, None],
                },
                TrapSpec {
                    id: TrapId(1),
                    capacity: 2,
                    kind: TrapKind::Executable,
                    ends: [None, None],
                },
            ],
            junctions: vec![],
            segments: vec![],
        };
        assert_eq!(spec.validate(), Err(ArchError::Disconnected));

        let mut spec = preset("MINI", 2).unwrap();
        spec.junctions[0].segments.truncate(1);
        assert!(matches!(
            spec.validate(),
            Err(ArchError::JunctionDegree { .. })
        ));
    }

    #[test]
    fn json_shape_round_trips() {
        let spec = preset("G2x3", 4).unwrap();
        let text = spec.to_json();
        assert!(text.contains("\"ends\""));
        assert!(text.contains("\"executable\""));
        assert_eq!(ArchitectureSpec::from_json(&text).unwrap(), spec);

        let minimal = r#"{"traps":[{"id":0,"capacity":1,"kind":"executable","ends":[null,null]}]}"#;
        let spec = ArchitectureSpec::from_json(minimal).unwrap();
        assert!(spec.validate().unwrap().is_empty());
    }
}
