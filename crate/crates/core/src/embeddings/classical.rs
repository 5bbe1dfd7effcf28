use std::sync::Arc;

use super::{coordinate_marginals, embed_bits, power_probs, verify_invariance, EmbeddingSpec};
use crate::classical::{
    ClassicalProtocol, MessageArgs, MessageFn, OutputFn, Party, Randomness, Round,
};
use crate::error::{Error, Result};
use crate::inputs::InputDistribution;

/// Classical embedded protocol `Π′`: the set index is public, the outside
/// coordinates are private randomness, and `p` is run on the embedded inputs.
///
/// Randomness layout (most significant first): public `(s, r)`, Alice
/// `(x_{S̄}, r_A)`, Bob `(y_{S̄}, r_B)`.
pub fn classical_embed(
    p: &ClassicalProtocol,
    spec: &EmbeddingSpec,
    mu1: &InputDistribution,
) -> Result<ClassicalProtocol> {
    let (n, t) = (spec.n(), spec.t());
    if p.x_size() != 1 << n || p.y_size() != 1 << n {
        return Err(Error::DomainMismatch(format!(
            "protocol inputs {}x{}, embedding needs {n}-bit inputs",
            p.x_size(),
            p.y_size()
        )));
    }
    verify_invariance(spec, mu1)?;
    let (mx, my) = coordinate_marginals(mu1)?;
    let sets = Randomness::new(spec.sets().iter().map(|s| s.prob).collect())?;
    let public = sets.product(p.public());
    let alice = Randomness::new(power_probs(&mx, n - t))?.product(p.alice_private());
    let bob = Randomness::new(power_probs(&my, n - t))?.product(p.bob_private());

    let inner = Arc::new(p.clone());
    let spec = Arc::new(spec.clone());
    let rounds = p
        .rounds()
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let inner = Arc::clone(&inner);
            let spec = Arc::clone(&spec);
            let party = Party::of_round(i);
            let msg = move |a: MessageArgs| {
                let pr = inner.public().size();
                let own = match party {
                    Party::Alice => inner.alice_private().size(),
                    Party::Bob => inner.bob_private().size(),
                };
                let set = &spec.sets()[(a.public / pr) as usize];
                let perm = match party {
                    Party::Alice => &set.perm_a,
                    Party::Bob => &set.perm_b,
                };
                let input = embed_bits(spec.n(), &set.coords, perm.apply(a.input), a.private / own);
                // Out-of-width sentinel turns an inner failure into an error.
                inner
                    .message(
                        i,
                        MessageArgs {
                            input,
                            private: a.private % own,
                            public: a.public % pr,
                            prefix: a.prefix,
                        },
                    )
                    .unwrap_or(u64::MAX)
            };
            Round {
                width: r.width,
                message: MessageFn::Func(Arc::new(msg)),
            }
        })
        .collect();
    let out = Arc::clone(&inner);
    ClassicalProtocol::new(
        1 << t,
        1 << t,
        public,
        alice,
        bob,
        rounds,
        OutputFn::Func(Arc::new(move |tr| out.output(tr))),
    )
}
