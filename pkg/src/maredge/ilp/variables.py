"""Dense index over every decision and auxiliary variable of the program."""

from __future__ import annotations

from ..workload import Instance

# family order used for the index (and for lexicographic tie-breaking)
FAMILIES = ("x", "y", "p", "h", "e", "z", "q", "alpha", "beta", "lambda", "phi", "psi", "xi", "w", "c", "omega")


class VariableIndex:
    """Bijection between subscript tuples such as ``("x", r, i)`` and column numbers.

    Keys by family::

        x      (r, i)        function eta of request r runs at node i
        y      (r, j)        function rho of request r runs at EC j
        p      (s, j)        model s pre-cached at EC j
        h      (r, s, l)     ARO l of model s pre-cached for request r
        e      (r, g)        request r transmits at the g-th rate
        z, q   (r, j)        cache hit / miss of request r at EC j
        alpha  (r, s, j)     p_sj * y_rj
        beta   (r, s, l, j)  p_sj * h_rsl
        lambda (r, s, l, j)  alpha_rsj * beta_rslj
        phi    (r, s, g)     e_rg * [model s cached anywhere]
        psi    (r, j)        z_rj * y_rj
        xi     (r, i, j)     x_ri * y_rj
        w      (r, s, j)     every target ARO of (r, s) sits at j
        c      (s,)          model s pre-cached at some EC
        omega  (r, s, j)     w_rsj * y_rj, a hit through model s at the storage EC
    """

    def __init__(self, inst: Instance, terminals: bool = True) -> None:
        self.terminals = terminals
        self.keys: list[tuple] = []
        self._pos: dict[tuple, int] = {}
        R = range(len(inst.requests))
        J = inst.ec_nodes
        G = range(len(inst.rate_table))
        reqs = inst.requests

        for r in R:
            for i in inst.compute_nodes(r, terminals):
                self._add(("x", r, i))
        for r in R:
            for j in J:
                self._add(("y", r, j))
        for s in inst.model_ids:
            for j in J:
                self._add(("p", s, j))
        for r in R:
            for m in reqs[r].models:
                for l in m.aro_ids:
                    self._add(("h", r, m.id, l))
        for r in R:
            for g in G:
                self._add(("e", r, g))
        for fam in ("z", "q"):
            for r in R:
                for j in J:
                    self._add((fam, r, j))
        for r in R:
            for m in reqs[r].models:
                for j in J:
                    self._add(("alpha", r, m.id, j))
        for fam in ("beta", "lambda"):
            for r in R:
                for m in reqs[r].models:
                    for l in m.aro_ids:
                        for j in J:
                            self._add((fam, r, m.id, l, j))
        for r in R:
            for m in reqs[r].models:
                for g in G:
                    self._add(("phi", r, m.id, g))
        for r in R:
            for j in J:
                self._add(("psi", r, j))
        for r in R:
            for i in inst.compute_nodes(r, terminals):
                for j in J:
                    self._add(("xi", r, i, j))
        for r in R:
            for m in reqs[r].models:
                for j in J:
                    self._add(("w", r, m.id, j))
        for s in inst.model_ids:
            self._add(("c", s))
        for r in R:
            for m in reqs[r].models:
                for j in J:
                    self._add(("omega", r, m.id, j))

    def _add(self, key: tuple) -> None:
        if key in self._pos:
            raise ValueError(f"duplicate variable {key}")
        self._pos[key] = len(self.keys)
        self.keys.append(key)

    def __getitem__(self, key: tuple) -> int:
        return self._pos[key]

    def __contains__(self, key: tuple) -> bool:
        return key in self._pos

    def get(self, key: tuple) -> int | None:
        return self._pos.get(key)

    def __len__(self) -> int:
        return len(self.keys)

    def family(self, name: str) -> list[tuple[tuple, int]]:
        return [(k, i) for i, k in enumerate(self.keys) if k[0] == name]

    def names(self) -> tuple[str, ...]:
        return tuple("_".join(map(str, k)) for k in self.keys)
