"""Boolean relation-matrix kernels.

A relation on an n-element universe is a boolean array of shape (..., n, n)
with ``r[..., x, y]`` true iff x R y.  Every kernel broadcasts over the
leading batch axes, so the same code checks one structure or a stack of
thousands.

``*_violations`` functions return the tensor of offending index tuples (used
for witnesses); ``*_ok`` functions return one flag per batch entry and are
computed through boolean matrix products, which is much cheaper in bulk.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np


def compose(r: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Left-to-right composition: (x, z) in r;s iff x r y and y s z for some y."""
    n = r.shape[-1]
    dt = np.uint8 if n < 256 else np.int32
    return np.matmul(r.astype(dt), s.astype(dt)) > 0


def closure(r: np.ndarray) -> np.ndarray:
    """Transitive closure (Warshall)."""
    r = np.array(r, dtype=bool, copy=True)
    for k in range(r.shape[-1]):
        r |= r[..., :, k : k + 1] & r[..., k : k + 1, :]
    return r


def diag(r: np.ndarray) -> np.ndarray:
    return np.diagonal(r, axis1=-2, axis2=-1)


def transpose(r: np.ndarray) -> np.ndarray:
    return np.swapaxes(r, -1, -2)


def eye_like(r: np.ndarray) -> np.ndarray:
    return np.eye(r.shape[-1], dtype=bool)


def subset_ok(r: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Per-batch flag: r is contained in s."""
    return ~(r & ~s).any(axis=(-2, -1))


# -- violation tensors -------------------------------------------------------


def transitivity_violations(r):
    """(x, y, z) with x r y, y r z and not x r z."""
    return r[..., :, :, None] & r[..., None, :, :] & ~r[..., :, None, :]


def reflexive_violations(r):
    return ~diag(r)


def antireflexive_violations(r):
    return diag(r).copy()


def antisymmetric_violations(r):
    return r & transpose(r) & ~eye_like(r)


def symmetric_violations(r):
    return r & ~transpose(r)


def containment_violations(r, s):
    """Pairs of r missing from s."""
    return r & ~s


def a1_violations(leq, ll):
    """(w, x, y) with w <= x << y and not w << y."""
    return leq[..., :, :, None] & ll[..., None, :, :] & ~ll[..., :, None, :]


def a2_violations(leq, ll):
    """(x, y, z) with x << y <= z and not x << z."""
    return ll[..., :, :, None] & leq[..., None, :, :] & ~ll[..., :, None, :]


def urquhart_violations(leq, ll):
    return leq & ll & ~eye_like(leq)


def _incomparable(leq):
    return ~leq & ~transpose(leq)


def union_of_chains_violations(leq):
    """(x, y, z) with z <= x, z <= y and x, y incomparable."""
    up = transpose(leq)  # up[x, z] iff z <= x
    return up[..., :, None, :] & up[..., None, :, :] & _incomparable(leq)[..., :, :, None]


def union_of_chains_dual_violations(leq):
    """(x, y, z) with x <= z, y <= z and x, y incomparable."""
    return leq[..., :, None, :] & leq[..., None, :, :] & _incomparable(leq)[..., :, :, None]


def antichain_subsets(n: int, size: int) -> np.ndarray:
    return np.array(list(combinations(range(n), size)), dtype=np.intp).reshape(-1, size)


def antichain_violations(leq, size: int) -> np.ndarray:
    """Flags over ``antichain_subsets(n, size)``: the subset is an antichain."""
    n = leq.shape[-1]
    subs = antichain_subsets(n, size)
    inc = _incomparable(leq)
    flags = np.ones(leq.shape[:-2] + (len(subs),), dtype=bool)
    for i, j in combinations(range(size), 2):
        flags &= inc[..., subs[:, i], subs[:, j]]
    return flags


def preservation_violations(r, f) -> np.ndarray:
    """(x, y) with x r y but not f(x) r f(y); ``f`` is an index array."""
    f = np.asarray(f, dtype=np.intp)
    return r & ~r[..., f[:, None], f[None, :]]


# -- cheap per-batch flags ---------------------------------------------------


def transitive_ok(r):
    return subset_ok(compose(r, r), r)


def reflexive_ok(r):
    return diag(r).all(axis=-1)


def antireflexive_ok(r):
    return ~diag(r).any(axis=-1)


def antisymmetric_ok(r):
    return ~antisymmetric_violations(r).any(axis=(-2, -1))


def symmetric_ok(r):
    return subset_ok(r, transpose(r))


def a1_ok(leq, ll):
    return subset_ok(compose(leq, ll), ll)


def a2_ok(leq, ll):
    return subset_ok(compose(ll, leq), ll)


def first_index(t: np.ndarray) -> tuple[int, ...] | None:
    """Lexicographically least index tuple where ``t`` is true, or None."""
    hits = np.argwhere(t)
    if len(hits) == 0:
        return None
    return tuple(int(i) for i in hits[0])
