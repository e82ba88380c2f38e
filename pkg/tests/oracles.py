"""Independent reference implementations used to freeze expected values.

Nothing here imports the code under test's partition arithmetic.
"""

import numpy as np


def enumerate_neurons(totals, names):
    """Brute-force neuron table: one (locals..., slot) tuple per neuron, in
    hierarchy-major order, by splitting explicit index arrays.

    ``np.array_split`` gives the first ``n % k`` pieces one extra element,
    the same balanced rule the codec claims to follow.
    """
    depth = len(totals) - 1
    children = []
    for d in range(1, len(totals)):
        children.append(np.array_split(np.arange(totals[d]), totals[d - 1]))
    rows = []

    # ``unit`` is a global index at level ``level - 1``.
    def walk(level, unit, prefix):
        kids = children[level - 1][unit]
        if level == depth:
            for slot in range(len(kids)):
                rows.append(tuple(prefix) + (slot,))
            return
        for local, kid in enumerate(kids):
            walk(level + 1, int(kid), prefix + [local])

    for h in range(totals[0]):
        walk(1, h, [h])
    return rows


def format_row(row, hemis, regions, layers):
    h, r, c, m, l, slot = row
    last = layers[l] if layers is not None else str(l + 1)
    return f"{hemis[h]}/{regions[r]}/{c + 1}/{m + 1}/{last}", slot
