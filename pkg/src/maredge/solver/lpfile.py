"""Read and write programs in the CPLEX LP text format.

Only the subset needed for 0-1 programs is produced: one objective row
(with an optional constant), named constraint rows and a ``Binaries``
section. Coefficients are written with ``repr`` so a round trip is exact.
"""

from __future__ import annotations

import re

from ..ilp.program import Constraint, LinearProgram

_SENSE_OUT = {"<=": "<=", ">=": ">=", "==": "="}
_SENSE_IN = {"<=": "<=", "=<": "<=", "<": "<=", ">=": ">=", "=>": ">=", ">": ">=", "=": "=="}
TERMS_PER_LINE = 6


class LPFormatError(ValueError):
    pass


def _num(v: float) -> str:
    return repr(float(v))


def _terms(coeffs, names) -> list[str]:
    out = []
    for k, (i, c) in enumerate(coeffs):
        sign = "-" if c < 0 else "+"
        if k == 0 and sign == "+":
            out.append(f"{_num(abs(c))} {names[i]}")
        else:
            out.append(f"{sign} {_num(abs(c))} {names[i]}")
    return out


def _wrap(head: str, parts: list[str]) -> list[str]:
    lines = []
    for k in range(0, max(len(parts), 1), TERMS_PER_LINE):
        chunk = " ".join(parts[k : k + TERMS_PER_LINE])
        lines.append((head if k == 0 else "   ") + chunk)
    return lines


def export_program(lp: LinearProgram) -> str:
    names = lp.names
    lines = ["\\ 0-1 program", "Minimize"]
    obj = _terms(sorted((i, c) for i, c in lp.objective.items() if c), names)
    if lp.objective_offset:
        sign = "-" if lp.objective_offset < 0 else "+"
        obj.append(f"{sign} {_num(abs(lp.objective_offset))}" if obj else _num(lp.objective_offset))
    if not obj:
        obj = ["0"]
    lines += _wrap(" obj: ", obj)
    lines.append("Subject To")
    for con in lp.constraints:
        parts = _terms(con.coeffs, names) or ["0"]
        parts += [_SENSE_OUT[con.sense], _num(con.rhs)]
        lines += _wrap(f" {con.name}: ", parts)
    lines.append("Binaries")
    for k in range(0, len(names), 10):
        lines.append(" " + " ".join(names[k : k + 10]))
    lines.append("End")
    return "\n".join(lines) + "\n"


_TOKEN = re.compile(
    r"[<>=]+|[+-]|(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?(?![\w.])|[^\s+\-<>=:]+:|[^\s+\-<>=]+"
)


def _parse_expr(tokens: list[str], pos: dict[str, int]):
    """Sum of ``[sign] [coef] name`` terms and bare constants."""
    coeffs: dict[int, float] = {}
    constant = 0.0
    sign, coef = 1.0, None
    for tok in tokens:
        if tok in "+-":
            if coef is not None:
                constant += sign * coef
                coef = None
            sign = -1.0 if tok == "-" else 1.0
            continue
        try:
            val = float(tok)
        except ValueError:
            if tok not in pos:
                raise LPFormatError(f"unknown variable {tok!r}") from None
            i = pos[tok]
            coeffs[i] = coeffs.get(i, 0.0) + sign * (1.0 if coef is None else coef)
            sign, coef = 1.0, None
            continue
        if coef is not None:
            raise LPFormatError("two numbers in a row")
        coef = val
    if coef is not None:
        constant += sign * coef
    return coeffs, constant


def _split_family(name: str) -> tuple[str, tuple[int, ...]]:
    family, *rest = name.split(".")
    try:
        return family, tuple(int(v) for v in rest)
    except ValueError:
        return name, ()


def parse_program(text: str) -> LinearProgram:
    sections: dict[str, list[str]] = {}
    current = None
    heads = {
        "minimize": "obj", "minimum": "obj", "min": "obj",
        "subject to": "rows", "such that": "rows", "st": "rows", "s.t.": "rows",
        "binaries": "bin", "binary": "bin", "bin": "bin",
        "bounds": "bounds", "end": "end",
    }
    for raw in text.splitlines():
        line = raw.split("\\", 1)[0].strip()
        if not line:
            continue
        key = heads.get(line.lower())
        if key == "end":
            break
        if key is not None:
            current = key
            sections.setdefault(key, [])
            continue
        if current is None:
            raise LPFormatError(f"text before the objective section: {line!r}")
        sections[current].append(line)
    if "obj" not in sections:
        raise LPFormatError("missing objective section")

    names = tuple(" ".join(sections.get("bin", [])).split())
    pos = {nm: k for k, nm in enumerate(names)}
    if len(pos) != len(names):
        raise LPFormatError("duplicate binary declaration")

    obj_toks = _TOKEN.findall(" ".join(sections["obj"]))
    if obj_toks and obj_toks[0].endswith(":"):
        obj_toks = obj_toks[1:]
    objective, offset = _parse_expr(obj_toks, pos)

    constraints = []
    rows_text = " ".join(sections.get("rows", []))
    toks = _TOKEN.findall(rows_text)
    k = 0
    while k < len(toks):
        if not toks[k].endswith(":"):
            raise LPFormatError(f"unnamed constraint near {toks[k]!r}")
        name = toks[k][:-1]
        k += 1
        body = []
        while k < len(toks) and toks[k] not in _SENSE_IN:
            body.append(toks[k])
            k += 1
        if k >= len(toks):
            raise LPFormatError(f"constraint {name} has no comparator")
        sense = _SENSE_IN[toks[k]]
        k += 1
        rhs_sign = 1.0
        if toks[k] in "+-":
            rhs_sign = -1.0 if toks[k] == "-" else 1.0
            k += 1
        rhs = rhs_sign * float(toks[k])
        k += 1
        coeffs, const = _parse_expr(body, pos)
        family, label = _split_family(name)
        constraints.append(
            Constraint(family, label, tuple(sorted((i, c) for i, c in coeffs.items() if c)), sense, rhs - const)
        )
    return LinearProgram(
        names=names,
        constraints=constraints,
        objective={i: c for i, c in sorted(objective.items()) if c},
        objective_offset=offset,
    )
