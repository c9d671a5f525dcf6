"""Plain-text instance files.

Example::

    [group]
    setting = amalgamated
    factors = cyclic:4 cyclic:6
    free_rank = 0
    amalgam = cyclic:2
    embed = 1: 0 2
    embed = 2: 0 3

    [subgroup.H]
    gen = f1:1 f2:1

    [subgroup.K]
    gen = f1:1 f2:1 f1:1 f2:1

    [budgets]
    L = 8
    R = 3

    [seed]
    value = 7

Groups are ``cyclic:n``, ``sym:n``, ``dihedral:n`` or ``table:name`` with a
``[table.name]`` section of ``row = ...`` lines. Elements are integer indices.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .ambient import AMALGAMATED, PLAIN, AmbientSpec, WordError, amalgamated, format_word, parse_word, plain
from .config import DEFAULT_L, DEFAULT_R
from .finite import EmbeddingMap, GroupError, descriptor_of, make_group


class InstanceError(ValueError):
    def __init__(self, message, line=None, column=None):
        self.line, self.column = line, column
        where = ""
        if line is not None:
            where = f"line {line}, column {column or 1}: "
        super().__init__(where + message)


@dataclass
class Instance:
    spec: AmbientSpec
    H: list = field(default_factory=list)
    K: list = field(default_factory=list)
    budgets: dict = field(default_factory=lambda: dict(L=DEFAULT_L, R=DEFAULT_R))
    seed: int | None = None
    has_K: bool = False


_ALLOWED = {
    "group": {"setting", "factors", "free_rank", "amalgam", "embed"},
    "subgroup": {"gen"},
    "table": {"row"},
    "budgets": {"L", "R"},
    "seed": {"value"},
}
_REPEATABLE = {"embed", "gen", "row"}
_SECTION = re.compile(r"^\[([A-Za-z_]+)(?:\.([A-Za-z0-9_]+))?\]$")


def _raw_sections(text):
    """[(name, sub, line, {key: [(value, line, col)]})]"""
    sections = []
    cur = None
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        stripped = line.strip()
        if not stripped:
            continue
        indent = len(line) - len(line.lstrip())
        if stripped.startswith("["):
            m = _SECTION.match(stripped)
            if not m:
                raise InstanceError(f"malformed section header {stripped!r}", n, indent + 1)
            name, sub = m.group(1), m.group(2)
            if name not in _ALLOWED:
                raise InstanceError(f"unknown section [{name}]", n, indent + 1)
            if name in ("subgroup", "table") and not sub:
                raise InstanceError(f"section [{name}] needs a name, e.g. [{name}.H]", n, indent + 1)
            if name == "subgroup" and sub not in ("H", "K"):
                raise InstanceError(f"unknown subgroup {sub!r}; expected H or K", n, indent + 3 + len(name))
            if any(s[0] == name and s[1] == sub for s in sections):
                raise InstanceError(f"duplicate section {stripped}", n, indent + 1)
            cur = (name, sub, n, {})
            sections.append(cur)
            continue
        if cur is None:
            raise InstanceError("key outside of any section", n, indent + 1)
        if "=" not in stripped:
            raise InstanceError("expected 'key = value'", n, indent + 1)
        key, _, value = line.partition("=")
        key = key.strip()
        vcol = line.index("=") + 2 + (len(value) - len(value.lstrip()))
        if key not in _ALLOWED[cur[0]]:
            raise InstanceError(f"unknown key {key!r} in [{cur[0]}]", n, indent + 1)
        if key in cur[3] and key not in _REPEATABLE:
            raise InstanceError(f"duplicate key {key!r}", n, indent + 1)
        cur[3].setdefault(key, []).append((value.strip(), n, vcol))
    return sections


def _one(sec, key, required=True):
    vals = sec[3].get(key)
    if not vals:
        if required:
            raise InstanceError(f"missing key {key!r} in [{sec[0]}]", sec[2], 1)
        return None
    return vals[0]


def _int(val, what):
    text, n, col = val
    try:
        return int(text)
    except ValueError:
        raise InstanceError(f"{what} must be an integer, got {text!r}", n, col) from None


def parse_instance(text: str) -> Instance:
    sections = _raw_sections(text)
    by_name = {(s[0], s[1]): s for s in sections}
    tables = {}
    for s in sections:
        if s[0] == "table":
            rows = []
            for value, n, col in s[3].get("row", []):
                try:
                    rows.append([int(x) for x in value.split()])
                except ValueError:
                    raise InstanceError("table rows are integers", n, col) from None
            tables[s[1]] = rows
    group = by_name.get(("group", None))
    if group is None:
        raise InstanceError("missing [group] section", 1, 1)

    def grp(val):
        text_, n, col = val
        try:
            return make_group(text_, tables)
        except GroupError as exc:
            raise InstanceError(str(exc), n, col) from None

    setting, sn, scol = _one(group, "setting")
    if setting not in (PLAIN, AMALGAMATED):
        raise InstanceError(f"setting must be '{PLAIN}' or '{AMALGAMATED}'", sn, scol)
    fval = _one(group, "factors", required=False)
    factors = []
    if fval is not None and fval[0]:
        col = fval[2]
        for m in re.finditer(r"\S+", fval[0]):
            factors.append(grp((m.group(), fval[1], col + m.start())))
    rv = _one(group, "free_rank", required=False)
    free_rank = _int(rv, "free_rank") if rv else 0
    try:
        if setting == PLAIN:
            for key in ("amalgam", "embed"):
                if key in group[3]:
                    v = group[3][key][0]
                    raise InstanceError(f"key {key!r} only applies to the amalgamated setting", v[1], 1)
            spec = plain(factors, free_rank)
        else:
            A = grp(_one(group, "amalgam"))
            images = [None] * len(factors)
            for value, n, col in group[3].get("embed", []):
                head, sep, rest = value.partition(":")
                if not sep:
                    raise InstanceError("embed expects '<factor>: <images>'", n, col)
                try:
                    k = int(head) - 1
                    imgs = tuple(int(x) for x in rest.split())
                except ValueError:
                    raise InstanceError("embed entries are integers", n, col) from None
                if not 0 <= k < len(factors):
                    raise InstanceError(f"embed refers to factor {k + 1}, which does not exist", n, col)
                if images[k] is not None:
                    raise InstanceError(f"factor {k + 1} embedded twice", n, col)
                try:
                    images[k] = EmbeddingMap(A, factors[k], imgs)
                except GroupError as exc:
                    raise InstanceError(str(exc), n, col) from None
            if any(im is None for im in images):
                raise InstanceError("every factor needs an embed line", group[2], 1)
            spec = amalgamated(factors, A, images, free_rank)
    except GroupError as exc:
        raise InstanceError(str(exc), group[2], 1) from None

    inst = Instance(spec)
    for tag in ("H", "K"):
        sec = by_name.get(("subgroup", tag))
        if sec is None:
            continue
        gens = []
        for value, n, col in sec[3].get("gen", []):
            try:
                w = parse_word(spec, value)
            except WordError as exc:
                m = re.match(r"column (\d+): (.*)", str(exc))
                if m:
                    raise InstanceError(m.group(2), n, col + int(m.group(1)) - 1) from None
                raise InstanceError(str(exc), n, col) from None
            gens.append(w)
        setattr(inst, tag, gens)
        if tag == "K":
            inst.has_K = True
    sec = by_name.get(("budgets", None))
    if sec is not None:
        for key in ("L", "R"):
            v = _one(sec, key, required=False)
            if v is not None:
                inst.budgets[key] = _int(v, key)
    sec = by_name.get(("seed", None))
    if sec is not None:
        inst.seed = _int(_one(sec, "value"), "seed")
    return inst


def load_instance(path) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())


def _group_text(G, tables):
    d = descriptor_of(G)
    if d.startswith("table:"):
        name = d[len("table:"):]
        name = re.sub(r"[^A-Za-z0-9_]", "_", name) or "T"
        while name in tables and tables[name] != G.mult:
            name += "_"
        tables[name] = G.mult
        return f"table:{name}"
    return d


def format_instance(inst: Instance) -> str:
    spec = inst.spec
    tables = {}
    lines = ["[group]", f"setting = {spec.setting}"]
    lines.append("factors = " + " ".join(_group_text(G, tables) for G in spec.factors))
    lines.append(f"free_rank = {spec.free_rank}")
    if spec.setting == AMALGAMATED:
        lines.append(f"amalgam = {_group_text(spec.A, tables)}")
        for k, im in enumerate(spec.img):
            lines.append(f"embed = {k + 1}: " + " ".join(map(str, im)))
    for name, mult in tables.items():
        lines += ["", f"[table.{name}]"] + ["row = " + " ".join(map(str, r)) for r in mult]
    for tag in ("H", "K"):
        gens = getattr(inst, tag)
        if gens or (tag == "K" and inst.has_K) or tag == "H":
            lines += ["", f"[subgroup.{tag}]"] + [f"gen = {format_word(w)}" for w in gens]
    lines += ["", "[budgets]", f"L = {inst.budgets.get('L', DEFAULT_L)}", f"R = {inst.budgets.get('R', DEFAULT_R)}"]
    if inst.seed is not None:
        lines += ["", "[seed]", f"value = {inst.seed}"]
    return "\n".join(lines) + "\n"
