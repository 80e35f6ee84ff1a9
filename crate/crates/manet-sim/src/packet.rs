//! Packet frames shared by both protocols.

pub type NodeId = usize;

/// Frame kind plus the kind-specific fields.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PacketKind {
    Data,
    /// Single-hop neighbor probe broadcast by the random-walk protocol.
    Probe {
        probe_id: u64,
    },
    /// Unicast answer to a probe, carrying the replier's address.
    ProbeReply {
        probe_id: u64,
        replier: NodeId,
    },
    /// AODV route request, flooded with dedup on `(origin, rreq_id)`.
    Rreq {
        rreq_id: u64,
        origin_seq: u64,
    },
    /// AODV route reply travelling the reverse path back to the
    /// discovery originator. `route_dst` is the data destination the
    /// reply installs routes toward.
    Rrep {
        route_dst: NodeId,
        dst_seq: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Packet {
    pub kind: PacketKind,
    pub origin: NodeId,
    pub final_dst: NodeId,
    /// Unique per injected DATA packet; control packets carry the uid of
    /// the DATA packet or discovery they serve.
    pub uid: u64,
    /// Remaining hop budget.
    pub ttl: u32,
    /// Incremented by exactly one per successful transmission.
    pub hops_taken: u32,
    pub payload_size: u32,
}

impl Packet {
    pub fn data(origin: NodeId, final_dst: NodeId, uid: u64, ttl: u32, payload_size: u32) -> Self {
        Packet {
            kind: PacketKind::Data,
            origin,
            final_dst,
            uid,
            ttl,
            hops_taken: 0,
            payload_size,
        }
    }
}
