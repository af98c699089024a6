"""The six classic channel-type reductions of the realisation circuit.

Running each gallery entry draws a random deterministic supermap of the
named type, realises it, and prints which structural features survive:
which classical wires collapse, which outputs are classical, and how the
memory bound specialises.
"""

from supermap_forge.gallery import DEMOS, run_demo

for name in DEMOS:
    result = run_demo(name)
    r = result.realisation
    print(f"== {name}: {result.description}")
    print(f"   A={list(r.a.dims)} B={list(r.b.dims)} C={list(r.c.dims)} D={list(r.d.dims)}"
          f"  p_dim={r.p_dim} (bound {r.p_bound})")
    for text, flag in result.assertions:
        print(f"   [{'ok' if flag else 'FAIL'}] {text}")
    print(f"   round-trip deviation {result.roundtrip_deviation:.3e}")
    assert result.ok
