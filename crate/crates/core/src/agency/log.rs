use std::fmt::{self, Write as _};

use crate::netsim::{NodeId, SimTime};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AgentKind {
    ContextAgent,
    NodeManager,
    SinkManager,
    FusingAgent,
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AgentKind::ContextAgent => "CA",
            AgentKind::NodeManager => "NMA",
            AgentKind::SinkManager => "SMA",
            AgentKind::FusingAgent => "FA",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgentLogEntry {
    pub at: SimTime,
    pub agent: AgentKind,
    pub action: &'static str,
    pub node: NodeId,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AgentLog {
    pub entries: Vec<AgentLogEntry>,
}

impl AgentLog {
    pub fn push(
        &mut self,
        at: SimTime,
        agent: AgentKind,
        action: &'static str,
        node: NodeId,
        detail: impl Into<String>,
    ) {
        self.entries.push(AgentLogEntry {
            at,
            agent,
            action,
            node,
            detail: detail.into(),
        });
    }

    pub fn actions(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.iter().map(|e| e.action)
    }

    /// `time_ms, agent_kind, action, node_id, detail`, tab-separated.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("time_ms\tagent_kind\taction\tnode_id\tdetail\n");
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{}.{:03}\t{}\t{}\t{}\t{}",
                e.at / 1000,
                e.at % 1000,
                e.agent,
                e.action,
                e.node,
                e.detail
            );
        }
        out
    }
}
