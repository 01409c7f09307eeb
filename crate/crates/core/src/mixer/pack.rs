use serde::{Deserialize, Serialize};

use super::views::{DocumentView, ViewKind};
use crate::compressors::ProxyCompressor;
use crate::error::{Error, Result};
use crate::vocab::{byte_to_symbol, Sentinel, SymbolId, VocabLayout};

/// The part of one view that landed in one context.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Boundary {
    pub start: usize,
    pub end: usize,
    pub doc_id: String,
    pub kind: ViewKind,
    /// The view started in an earlier context.
    pub continued: bool,
    /// The view goes on in the next context.
    pub continues: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackedContext {
    pub symbols: Vec<SymbolId>,
    pub boundaries: Vec<Boundary>,
    /// Real symbols; the rest is `DocSep` padding.
    pub fill: usize,
}

/// Greedy packer: views are appended in order and split at context edges.
#[derive(Debug)]
pub struct ContextPacker {
    context_len: usize,
    current: Vec<SymbolId>,
    boundaries: Vec<Boundary>,
}

impl ContextPacker {
    pub fn new(context_len: usize) -> Result<Self> {
        if context_len < 2 {
            return Err(Error::invalid(format!(
                "context length {context_len} is below 2"
            )));
        }
        Ok(Self {
            context_len,
            current: Vec::with_capacity(context_len),
            boundaries: Vec::new(),
        })
    }

    /// Adds a view and returns any contexts it completed.
    pub fn push(&mut self, view: &DocumentView) -> Vec<PackedContext> {
        let mut done = Vec::new();
        let mut rest = &view.symbols[..];
        let mut continued = false;
        while !rest.is_empty() {
            let room = self.context_len - self.current.len();
            let take = room.min(rest.len());
            let start = self.current.len();
            self.current.extend_from_slice(&rest[..take]);
            rest = &rest[take..];
            self.boundaries.push(Boundary {
                start,
                end: start + take,
                doc_id: view.doc_id.clone(),
                kind: view.kind,
                continued,
                continues: !rest.is_empty(),
            });
            continued = true;
            if self.current.len() == self.context_len {
                done.push(self.take_context());
            }
        }
        done
    }

    /// Pads and returns the partial context, if any.
    pub fn finish(mut self) -> Option<PackedContext> {
        (!self.current.is_empty()).then(|| self.take_context())
    }

    fn take_context(&mut self) -> PackedContext {
        let fill = self.current.len();
        let mut symbols =
            std::mem::replace(&mut self.current, Vec::with_capacity(self.context_len));
        symbols.resize(self.context_len, Sentinel::DocSep.id());
        PackedContext {
            symbols,
            boundaries: std::mem::take(&mut self.boundaries),
            fill,
        }
    }
}

pub fn pack_contexts<'a, I>(views: I, context_len: usize) -> Result<Vec<PackedContext>>
where
    I: IntoIterator<Item = &'a DocumentView>,
{
    let mut packer = ContextPacker::new(context_len)?;
    let mut out = Vec::new();
    for v in views {
        out.extend(packer.push(v));
    }
    out.extend(packer.finish());
    Ok(out)
}

/// `[comp] p' s' [/comp] [raw] p` where primes denote compressed forms. The
/// raw span is left open for the model to continue.
pub fn build_oracle_translation_prompt(
    problem: &[u8],
    solution: &[u8],
    compressor: &dyn ProxyCompressor,
    layout: &VocabLayout,
) -> Result<Vec<SymbolId>> {
    if problem.is_empty() || solution.is_empty() {
        return Err(Error::EmptyInput("oracle-translation prompt"));
    }
    let mut out = vec![Sentinel::CompOpen.id()];
    for part in [problem, solution] {
        for s in compressor.compress(part)? {
            out.push(layout.comp_to_symbol(s)?);
        }
    }
    out.push(Sentinel::CompClose.id());
    out.push(Sentinel::RawOpen.id());
    out.extend(problem.iter().map(|&b| byte_to_symbol(b)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compressors::ByteIdentity;
    use proptest::prelude::*;

    fn view(id: &str, len: usize) -> DocumentView {
        DocumentView {
            ordinal: 0,
            doc_id: id.into(),
            kind: ViewKind::Raw,
            step: 0,
            symbols: (0..len as u32).map(|i| 64 + i % 256).collect(),
        }
    }

    #[test]
    fn two_views_fill_one_context() {
        let ctx = pack_contexts(&[view("a", 4), view("b", 4)], 8).unwrap();
        assert_eq!(ctx.len(), 1);
        assert_eq!(ctx[0].fill, 8);
        assert_eq!(ctx[0].boundaries.len(), 2);
        assert_eq!(
            (ctx[0].boundaries[1].start, ctx[0].boundaries[1].end),
            (4, 8)
        );
    }

    #[test]
    fn long_view_splits() {
        let ctx = pack_contexts(&[view("a", 10)], 8).unwrap();
        assert_eq!(ctx.len(), 2);
        assert_eq!(ctx[1].fill, 2);
        assert!(ctx[0].boundaries[0].continues && ctx[1].boundaries[0].continued);
        assert!(ctx[1].symbols[2..]
            .iter()
            .all(|&s| s == Sentinel::DocSep.id()));
        assert!(pack_contexts(&[view("a", 1)], 1).is_err());
    }

    #[test]
    fn prompt_layout() {
        let layout = VocabLayout::for_comp_vocab(256);
        let p = build_oracle_translation_prompt(b"add", b"a+b", &ByteIdentity, &layout).unwrap();
        assert_eq!(p.len(), 3 + 3 + 3 + 3);
        assert_eq!(p[0], Sentinel::CompOpen.id());
        assert_eq!(p[7], Sentinel::CompClose.id());
        assert_eq!(p[8], Sentinel::RawOpen.id());
        assert_eq!(*p.last().unwrap(), byte_to_symbol(b'd'));
        assert!(build_oracle_translation_prompt(b"", b"x", &ByteIdentity, &layout).is_err());
    }

    proptest! {
        #[test]
        fn boundaries_tile_the_fill(lens in proptest::collection::vec(1usize..40, 1..30), ctx_len in 2usize..32) {
            let views: Vec<DocumentView> = lens.iter().enumerate().map(|(i, &l)| view(&i.to_string(), l)).collect();
            let ctx = pack_contexts(&views, ctx_len).unwrap();
            let mut rebuilt = Vec::new();
            for c in &ctx {
                prop_assert_eq!(c.symbols.len(), ctx_len);
                let mut at = 0;
                for b in &c.boundaries {
                    prop_assert_eq!(b.start, at);
                    prop_assert!(b.end > b.start);
                    at = b.end;
                    rebuilt.extend_from_slice(&c.symbols[b.start..b.end]);
                }
                prop_assert_eq!(at, c.fill);
            }
            let flat: Vec<u32> = views.iter().flat_map(|v| v.symbols.clone()).collect();
            prop_assert_eq!(rebuilt, flat);
        }
    }
}
