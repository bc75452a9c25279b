#!/usr/bin/env python3
"""Tour of the boundary combinatorics for 5-marked rational curves.

Enumerates dual trees, shows a degenerate cross-ratio evaluation, and
prints the blowup schedule that resolves the quotient step by step.
"""

from artifact import curves, strata, trees


def main():
    ts = trees.enumerate_trees(5)
    print("5-marked dual trees:", len(ts))
    by_edges = {}
    for t in ts:
        by_edges.setdefault(len(t.edges), []).append(t)
    for k in sorted(by_edges):
        print("  with %d nodes: %d trees" % (k, len(by_edges[k])))

    # a maximally degenerate curve: two nodes
    t = by_edges[2][0]
    c = curves.sample_curve(t, 20, "demo")
    print("\nsampled curve on a 2-node tree; some cross ratios:")
    for q in [(1, 2, 3, 4), (1, 2, 3, 5), (2, 3, 4, 5)]:
        print("  CR%s = %s" % (q, curves.cross_ratio_q(c, q).serialize()))

    print("\nblowup schedule for l=5 (complex):")
    for step in strata.schedule(5).steps:
        print("  blow up", sorted(step.label.rho), "-", step.blowup_type)


if __name__ == "__main__":
    main()
