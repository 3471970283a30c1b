//! Feature toggles for the automaton construction.

use serde::{Deserialize, Serialize};

/// Which simplification rules and allowances are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Features {
    /// Extra size-loop allowance for states that start like a line.
    pub line_like: bool,
    /// Extra allowance for oversized states with nothing to simplify.
    pub lacking_simpl: bool,
    pub small_bridges: bool,
    pub large_bridges: bool,
    pub small_loops: bool,
    /// Recompute children against the final state set.
    pub two_pass: bool,
    /// Children lists start with the candidates found without the two
    /// allowances, followed by those found with them.
    pub staged_children: bool,
    /// Pruning of moves that enter a region closed off around `A`.
    pub planar_a: bool,
    /// Pruning of moves that wall in `B`.
    pub planar_b: bool,
}

impl Default for Features {
    fn default() -> Self {
        Features::all_on()
    }
}

impl Features {
    /// The main configuration: everything on except staged children.
    pub fn all_on() -> Self {
        Features {
            line_like: true,
            lacking_simpl: true,
            small_bridges: true,
            large_bridges: true,
            small_loops: true,
            two_pass: true,
            staged_children: false,
            planar_a: true,
            planar_b: true,
        }
    }

    /// Plain oldest-vertex erasure with no pruning: the automaton then
    /// accepts exactly the walks free of short loops.
    pub fn erasure_only() -> Self {
        Features {
            line_like: false,
            lacking_simpl: false,
            small_bridges: false,
            large_bridges: false,
            small_loops: false,
            two_pass: false,
            staged_children: false,
            planar_a: false,
            planar_b: false,
        }
    }

    /// Simplifications and planar pruning, but neither allowance and a
    /// single pass.
    pub fn baseline() -> Self {
        Features {
            line_like: false,
            lacking_simpl: false,
            two_pass: false,
            ..Features::all_on()
        }
    }

    /// Same toggles with both allowance rules switched off.
    pub fn without_allowances(self) -> Self {
        Features {
            line_like: false,
            lacking_simpl: false,
            ..self
        }
    }

    pub fn to_bits(self) -> u32 {
        [
            self.line_like,
            self.lacking_simpl,
            self.small_bridges,
            self.large_bridges,
            self.small_loops,
            self.two_pass,
            self.staged_children,
            self.planar_a,
            self.planar_b,
        ]
        .iter()
        .enumerate()
        .fold(0, |acc, (i, &on)| acc | (u32::from(on) << i))
    }

    pub fn from_bits(bits: u32) -> Option<Self> {
        if bits >> 9 != 0 {
            return None;
        }
        let bit = |i: u32| bits >> i & 1 == 1;
        Some(Features {
            line_like: bit(0),
            lacking_simpl: bit(1),
            small_bridges: bit(2),
            large_bridges: bit(3),
            small_loops: bit(4),
            two_pass: bit(5),
            staged_children: bit(6),
            planar_a: bit(7),
            planar_b: bit(8),
        })
    }

    /// Short label such as `line+lack+2p`, used in ablation tables.
    pub fn label(self) -> String {
        let mut parts = Vec::new();
        if self.line_like {
            parts.push("line");
        }
        if self.lacking_simpl {
            parts.push("lack");
        }
        if self.two_pass {
            parts.push("2p");
        }
        if self.staged_children {
            parts.push("staged");
        }
        if parts.is_empty() {
            "baseline".to_owned()
        } else {
            parts.join("+")
        }
    }
}
