"""Vectorised evaluation of formulas on integer boxes.

A grid is a boolean ndarray of shape ``(hi - lo,) * arity`` whose cell
``[i1, ..., ik]`` says whether the tuple ``(lo + i1, ..., lo + ik)`` satisfies
a formula.  Index residues modulo d coincide with value residues up to a fixed
shift, so residue-class slicing can be done directly in index space.
"""

from __future__ import annotations

import numpy as np

from .formula import And, Cmp, Literal, Not


def grid_eval(formula, arity, lo, hi):
    """Boolean grid of the formula over ``[lo, hi)^arity``."""
    width = hi - lo
    axes = []
    for i in range(arity):
        shape = [1] * arity
        shape[i] = width
        axes.append(np.arange(lo, hi, dtype=np.int64).reshape(shape))

    def rec(node):
        if isinstance(node, Literal):
            a = axes[node.lhs]
            b = axes[node.rhs] + node.offset
            if node.cmp is Cmp.LEQ:
                return a <= b
            if node.cmp is Cmp.LT:
                return a < b
            if node.cmp is Cmp.EQ:
                return a == b
            return a != b
        if isinstance(node, Not):
            return ~rec(node.part)
        if isinstance(node, And):
            out = np.ones((), dtype=bool)
            for p in node.parts:
                out = out & rec(p)
            return out
        out = np.zeros((), dtype=bool)
        for p in node.parts:
            out = out | rec(p)
        return out

    full = np.broadcast_to(rec(formula.root), (width,) * arity)
    return np.ascontiguousarray(full)


def accumulate_leq_mod(arr, axis, d):
    """OR over all same-residue positions at or below each index, per axis."""
    out = arr.copy()
    moved = np.moveaxis(out, axis, -1)
    width = moved.shape[-1]
    for phase in range(min(d, width)):
        sub = moved[..., phase::d]
        np.logical_or.accumulate(sub, axis=-1, out=sub)
    return out


def other_residue_any(arr, axis, d):
    """OR over all positions whose index residue differs from the cell's own."""
    if d == 1:
        return np.zeros_like(arr)
    moved = np.moveaxis(arr, axis, -1)
    width = moved.shape[-1]
    nphases = min(d, width)
    anys = [moved[..., p::d].any(axis=-1) for p in range(nphases)]
    total = np.zeros_like(anys[0])
    for a in anys:
        total = total | a
    out = np.empty_like(arr)
    out_moved = np.moveaxis(out, axis, -1)
    for p in range(nphases):
        others = np.zeros_like(anys[p])
        for q in range(nphases):
            if q != p:
                others = others | anys[q]
        out_moved[..., p::d] = others[..., None]
    return out
