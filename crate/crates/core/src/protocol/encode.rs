//! Fixed-width byte encoding of global states.
//!
//! Layout: one byte `n`, then `n` node records of
//! `vid, mode<<4|pc, id2, id3, inbox`, where the inbox is one byte for slot
//! variants and `len` followed by `n` padded bytes for FIFO variants. Unset
//! temporaries, empty slots and queue padding use [`UNSET_BYTE`].

use super::{GlobalState, Inbox, LocalState, Mode, Pc, Protocol, Uid};
use std::collections::VecDeque;

pub const UNSET_BYTE: u8 = 0xFF;

const VID: usize = 0;
const MODE_PC: usize = 1;
const ID2: usize = 2;
const ID3: usize = 3;
const INBOX: usize = 4;

impl Protocol {
    pub fn record_width(&self, n: usize) -> usize {
        if self.variant.uses_fifo() {
            INBOX + 1 + n
        } else {
            INBOX + 1
        }
    }

    /// Encoded size of any state of an `n`-node ring.
    pub fn encoded_width(&self, n: usize) -> usize {
        1 + n * self.record_width(n)
    }

    pub fn encode(&self, g: &GlobalState) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_width(g.n()));
        self.encode_into(g, &mut out);
        out
    }

    /// Appends the encoding of `g` to `out`.
    pub fn encode_into(&self, g: &GlobalState, out: &mut Vec<u8>) {
        let n = g.n();
        out.push(n as u8);
        for node in g.nodes() {
            out.push(node.vid.0);
            let mode = match node.mode {
                Mode::Active => 0u8,
                Mode::Relay => 1u8,
            };
            out.push(mode << 4 | node.pc.code());
            out.push(node.id2.map_or(UNSET_BYTE, |u| u.0));
            out.push(node.id3.map_or(UNSET_BYTE, |u| u.0));
            match &node.inbox {
                Inbox::Slot(s) => out.push(s.map_or(UNSET_BYTE, |u| u.0)),
                Inbox::Fifo(q) => {
                    out.push(q.len() as u8);
                    out.extend(q.iter().map(|u| u.0));
                    out.extend(std::iter::repeat_n(UNSET_BYTE, n - q.len()));
                }
            }
        }
    }

    /// Inverse of [`Protocol::encode`]; `None` for byte strings that are not
    /// the encoding of a state of this variant.
    pub fn decode(&self, bytes: &[u8]) -> Option<GlobalState> {
        let view = self.view(bytes)?;
        let nodes = (0..view.n())
            .map(|i| {
                let v = view.node(i);
                Some(LocalState {
                    vid: Uid(v.vid()),
                    mode: v.mode()?,
                    pc: v.pc()?,
                    id2: v.id2(),
                    id3: v.id3(),
                    inbox: if self.variant.uses_fifo() {
                        Inbox::Fifo(v.queue()?.into_iter().map(Uid).collect::<VecDeque<_>>())
                    } else {
                        Inbox::Slot(v.slot().map(Uid))
                    },
                })
            })
            .collect::<Option<Vec<_>>>()?;
        Some(GlobalState { nodes })
    }

    pub fn view<'a>(&self, bytes: &'a [u8]) -> Option<EncodedState<'a>> {
        let n = *bytes.first()? as usize;
        if n == 0 || n == UNSET_BYTE as usize || bytes.len() != self.encoded_width(n) {
            return None;
        }
        Some(EncodedState {
            bytes,
            n,
            record: self.record_width(n),
        })
    }
}

/// Borrowed view of an encoded state.
#[derive(Debug, Clone, Copy)]
pub struct EncodedState<'a> {
    bytes: &'a [u8],
    n: usize,
    record: usize,
}

impl<'a> EncodedState<'a> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn node(&self, i: usize) -> NodeView<'a> {
        let start = 1 + i * self.record;
        NodeView {
            bytes: &self.bytes[start..start + self.record],
        }
    }

    pub fn is_leader(&self, i: usize) -> bool {
        self.node(i).pc() == Some(Pc::Lead)
    }

    pub fn leader_count(&self) -> usize {
        (0..self.n).filter(|&i| self.is_leader(i)).count()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NodeView<'a> {
    bytes: &'a [u8],
}

impl NodeView<'_> {
    pub fn vid(&self) -> u8 {
        self.bytes[VID]
    }

    pub fn mode(&self) -> Option<Mode> {
        match self.bytes[MODE_PC] >> 4 {
            0 => Some(Mode::Active),
            1 => Some(Mode::Relay),
            _ => None,
        }
    }

    pub fn pc(&self) -> Option<Pc> {
        Pc::from_code(self.bytes[MODE_PC] & 0x0F)
    }

    pub fn id2(&self) -> Option<Uid> {
        unset(self.bytes[ID2])
    }

    pub fn id3(&self) -> Option<Uid> {
        unset(self.bytes[ID3])
    }

    fn slot(&self) -> Option<u8> {
        unset(self.bytes[INBOX]).map(|u| u.0)
    }

    fn queue(&self) -> Option<Vec<u8>> {
        let len = self.bytes[INBOX] as usize;
        let cells = &self.bytes[INBOX + 1..];
        if len > cells.len() {
            return None;
        }
        Some(cells[..len].to_vec())
    }
}

fn unset(b: u8) -> Option<Uid> {
    (b != UNSET_BYTE).then_some(Uid(b))
}
