"""Fine-grained semantic change extraction for Java revision pairs.

Both sides of a :class:`~maintscope.vcs.RevisionPair` are parsed with
``javalang`` and compared declaration by declaration:

* types are matched by qualified name,
* methods by signature, then by name, then by body similarity (renames),
* fields by name,
* statements inside matched methods by a longest-common-subsequence
  alignment of the statement lists, recursing into matched compound
  statements.

Only the 20 change types of :class:`ChangeType` are reported.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import javalang
from javalang import tree as jt

from .vcs import EMPTY, RevisionPair

TAXONOMY_VERSION = "1"
RENAME_SIMILARITY = 0.6


class ChangeType(str, enum.Enum):
    STATEMENT_INSERT = "statement_insert"
    STATEMENT_DELETE = "statement_delete"
    STATEMENT_UPDATE = "statement_update"
    STATEMENT_ORDERING_CHANGE = "statement_ordering_change"
    ADDITIONAL_CLASS = "additional_class"
    REMOVED_CLASS = "removed_class"
    ADDITIONAL_FUNCTIONALITY = "additional_functionality"
    REMOVED_FUNCTIONALITY = "removed_functionality"
    METHOD_RENAMING = "method_renaming"
    RETURN_TYPE_CHANGE = "return_type_change"
    RETURN_TYPE_INSERT = "return_type_insert"
    RETURN_TYPE_DELETE = "return_type_delete"
    PARAMETER_INSERT = "parameter_insert"
    PARAMETER_DELETE = "parameter_delete"
    PARAMETER_RENAMING = "parameter_renaming"
    PARAMETER_TYPE_CHANGE = "parameter_type_change"
    ATTRIBUTE_INSERT = "attribute_insert"
    ATTRIBUTE_DELETE = "attribute_delete"
    ATTRIBUTE_TYPE_CHANGE = "attribute_type_change"
    CONDITION_EXPRESSION_CHANGE = "condition_expression_change"

    def __str__(self) -> str:
        return self.value


CT = ChangeType


class ParseError(Exception):
    """A side of a revision pair could not be parsed."""

    def __init__(self, side: str, file_path: str = "", detail: str = ""):
        super().__init__(f"cannot parse {side} side of {file_path}: {detail}".strip())
        self.side = side
        self.file_path = file_path


@dataclass(frozen=True, order=True)
class SemanticChange:
    change_type: ChangeType
    commit_id: str
    file_path: str
    entity: str

    def to_line(self) -> str:
        return f"{self.commit_id}\t{self.file_path}\t{self.change_type.value}\t{self.entity}"

    @classmethod
    def from_line(cls, line: str) -> "SemanticChange":
        commit_id, file_path, label, entity = line.rstrip("\n").split("\t")
        return cls(ChangeType(label), commit_id, file_path, entity)


# --------------------------------------------------------------------------
# AST normalisation

def _fingerprint(node):
    """Hashable, position-free structural key of an AST subtree."""
    if isinstance(node, jt.Node):
        return (type(node).__name__,) + tuple(
            _fingerprint(getattr(node, a)) for a in node.attrs if a != "documentation")
    if isinstance(node, (list, tuple)):
        return tuple(_fingerprint(n) for n in node)
    if isinstance(node, (set, frozenset)):
        return tuple(sorted(str(n) for n in node))
    return node


def _leaves(fp, out: list):
    if isinstance(fp, tuple):
        for item in fp:
            _leaves(item, out)
    elif fp is not None and fp != "" and fp != ():
        out.append(str(fp))
    return out


def type_name(t) -> str:
    """Source-like rendering of a javalang type node; ``None`` is ``void``."""
    if t is None:
        return "void"
    if isinstance(t, jt.BasicType):
        s = t.name
    else:
        s = t.name
        if getattr(t, "arguments", None):
            args = []
            for a in t.arguments:
                if a.type is None:
                    args.append("?")
                elif a.pattern_type:
                    args.append(f"? {a.pattern_type} {type_name(a.type)}")
                else:
                    args.append(type_name(a.type))
            s += "<" + ",".join(args) + ">"
        if getattr(t, "sub_type", None) is not None:
            s += "." + type_name(t.sub_type)
    return s + "[]" * len(t.dimensions or [])


@dataclass
class _Method:
    name: str
    params: list[tuple[str, str]]
    return_type: str | None  # None for constructors
    body: list
    index: int
    owner: str
    _tokens: list[str] | None = field(default=None, repr=False)

    @property
    def is_ctor(self) -> bool:
        return self.return_type is None

    @property
    def key(self) -> tuple:
        return (self.name, tuple(t for _, t in self.params), self.is_ctor)

    @property
    def entity(self) -> str:
        return f"{self.owner}#{self.name}({','.join(t for _, t in self.params)})"

    def tokens(self) -> list[str]:
        if self._tokens is None:
            self._tokens = _leaves(_fingerprint(self.body), [])
        return self._tokens


@dataclass
class _TypeDecl:
    name: str
    fields: dict[str, str]
    methods: list[_Method]


def parse_unit(text: str | None, side: str = "after", file_path: str = ""):
    """Parse Java source; ``EMPTY`` yields ``None`` (an empty compilation unit)."""
    if text is EMPTY:
        return None
    try:
        return javalang.parse.parse(text)
    except RecursionError as exc:
        raise ParseError(side, file_path, "nesting too deep") from exc
    except Exception as exc:  # javalang raises several unrelated error types
        raise ParseError(side, file_path, f"{type(exc).__name__} {exc}") from exc


def _member_list(decl) -> list:
    body = decl.body
    if isinstance(body, jt.EnumBody):
        return list(body.declarations or [])
    return list(body or [])


def _collect_types(unit) -> dict[str, _TypeDecl]:
    types: dict[str, _TypeDecl] = {}
    if unit is None:
        return types
    prefix = unit.package.name + "." if unit.package is not None else ""

    def visit(decl, qname):
        members = _member_list(decl)
        fields: dict[str, str] = {}
        methods: list[_Method] = []
        nested = []
        for m in members:
            if isinstance(m, jt.FieldDeclaration):
                for d in m.declarators:
                    fields[d.name] = type_name(m.type) + "[]" * len(d.dimensions or [])
            elif isinstance(m, (jt.MethodDeclaration, jt.ConstructorDeclaration)):
                params = [(p.name, type_name(p.type) + ("..." if p.varargs else ""))
                          for p in m.parameters]
                rtype = type_name(m.return_type) if isinstance(m, jt.MethodDeclaration) else None
                methods.append(_Method(m.name, params, rtype, list(m.body or []),
                                       len(methods), qname))
            elif isinstance(m, (jt.ClassDeclaration, jt.InterfaceDeclaration,
                                jt.EnumDeclaration)):
                nested.append(m)
        types[qname] = _TypeDecl(qname, fields, methods)
        for n in nested:
            visit(n, f"{qname}.{n.name}")

    for decl in unit.types or []:
        if isinstance(decl, (jt.ClassDeclaration, jt.InterfaceDeclaration, jt.EnumDeclaration)):
            visit(decl, prefix + decl.name)
    return types


# --------------------------------------------------------------------------
# similarity and alignment helpers

def dice_similarity(a: Sequence[str], b: Sequence[str]) -> float:
    """Dice coefficient over token-bigram multisets; 0.0 when either side is empty."""
    ba = Counter(zip(a, a[1:]))
    bb = Counter(zip(b, b[1:]))
    total = sum(ba.values()) + sum(bb.values())
    if not ba or not bb:
        return 0.0
    return 2.0 * sum((ba & bb).values()) / total


def lcs_pairs(a: Sequence, b: Sequence) -> list[tuple[int, int]]:
    """Index pairs of one longest common subsequence of ``a`` and ``b``."""
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        return []
    table = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        row, nxt = table[i], table[i + 1]
        for j in range(m - 1, -1, -1):
            row[j] = nxt[j + 1] + 1 if a[i] == b[j] else max(nxt[j], row[j + 1])
    pairs = []
    i = j = 0
    while i < n and j < m:
        if a[i] == b[j]:
            pairs.append((i, j))
            i += 1
            j += 1
        elif table[i + 1][j] >= table[i][j + 1]:
            i += 1
        else:
            j += 1
    return pairs


# --------------------------------------------------------------------------
# entity matching

@dataclass
class EntityMap:
    """Correspondence between declarations of two compilation units.

    ``types`` holds ``(before_name, after_name)`` tuples where either side may
    be ``None``; ``methods`` and ``fields`` are keyed by matched type pairs.
    """
    types: list[tuple[str | None, str | None]]
    methods: dict[tuple[str, str], list[tuple[_Method | None, _Method | None]]]
    fields: dict[tuple[str, str], list[tuple[str | None, str | None]]]


def _match_methods(before: list[_Method], after: list[_Method],
                   threshold: float) -> list[tuple[_Method | None, _Method | None]]:
    left = list(before)
    right = list(after)
    pairs: list[tuple[_Method | None, _Method | None]] = []

    # 1. identical signatures
    by_key: dict[tuple, list[_Method]] = {}
    for m in right:
        by_key.setdefault(m.key, []).append(m)
    for m in list(left):
        cands = by_key.get(m.key)
        if cands:
            other = cands.pop(0)
            pairs.append((m, other))
            left.remove(m)
            right.remove(other)

    # 2. same name, different parameters; 3. renames above the similarity threshold
    def greedy(accept):
        scored = []
        for b in left:
            for a in right:
                if b.is_ctor != a.is_ctor:
                    continue
                ok, sim = accept(b, a)
                if ok:
                    scored.append((-sim, b.index, a.index, b, a))
        scored.sort(key=lambda s: s[:3])
        used_b, used_a = set(), set()
        for _, bi, ai, b, a in scored:
            if bi in used_b or ai in used_a:
                continue
            used_b.add(bi)
            used_a.add(ai)
            pairs.append((b, a))
            left.remove(b)
            right.remove(a)

    greedy(lambda b, a: (b.name == a.name, dice_similarity(b.tokens(), a.tokens())))

    def rename(b, a):
        if b.is_ctor or b.name == a.name:
            return False, 0.0
        sim = dice_similarity(b.tokens(), a.tokens())
        return sim >= threshold, sim

    greedy(rename)
    pairs.extend((m, None) for m in left)
    pairs.extend((None, m) for m in right)
    return pairs


def _match_units(before: dict[str, _TypeDecl], after: dict[str, _TypeDecl],
                 threshold: float) -> EntityMap:
    types = [(n, n if n in after else None) for n in sorted(before)]
    types += [(None, n) for n in sorted(after) if n not in before]
    methods, fields = {}, {}
    for b, a in types:
        if b is None or a is None:
            continue
        tb, ta = before[b], after[a]
        methods[(b, a)] = _match_methods(tb.methods, ta.methods, threshold)
        names = sorted(set(tb.fields) | set(ta.fields))
        fields[(b, a)] = [(n if n in tb.fields else None, n if n in ta.fields else None)
                          for n in names]
    return EntityMap(types, methods, fields)


def match_entities(before_ast, after_ast, threshold: float = RENAME_SIMILARITY) -> EntityMap:
    """Match types, methods and fields of two parsed units (``None`` = empty unit)."""
    return _match_units(_collect_types(before_ast), _collect_types(after_ast), threshold)


# --------------------------------------------------------------------------
# statement differencing

_CONDITION_KINDS = (jt.IfStatement, jt.WhileStatement, jt.DoStatement,
                    jt.ForStatement, jt.SwitchStatement)


def _as_list(stmt) -> list:
    if stmt is None:
        return []
    if isinstance(stmt, jt.BlockStatement):
        return list(stmt.statements or [])
    if isinstance(stmt, list):
        return stmt
    return [stmt]


def _compound(stmt):
    """``(header_fingerprint, {slot: statements})`` or ``None`` for simple statements."""
    if isinstance(stmt, jt.IfStatement):
        return _fingerprint(stmt.condition), {"then": _as_list(stmt.then_statement),
                                              "else": _as_list(stmt.else_statement)}
    if isinstance(stmt, (jt.WhileStatement, jt.DoStatement)):
        return _fingerprint(stmt.condition), {"body": _as_list(stmt.body)}
    if isinstance(stmt, jt.ForStatement):
        return _fingerprint(stmt.control), {"body": _as_list(stmt.body)}
    if isinstance(stmt, jt.SwitchStatement):
        slots = {}
        for case in stmt.cases or []:
            slots.setdefault(("case", _fingerprint(case.case)), []).extend(case.statements or [])
        return _fingerprint(stmt.expression), slots
    if isinstance(stmt, jt.BlockStatement):
        return None, {"block": list(stmt.statements or [])}
    if isinstance(stmt, jt.TryStatement):
        slots = {"try": list(stmt.block or []), "finally": list(stmt.finally_block or [])}
        for catch in stmt.catches or []:
            slots[("catch", _fingerprint(catch.parameter))] = list(catch.block or [])
        return _fingerprint(stmt.resources), slots
    if isinstance(stmt, jt.SynchronizedStatement):
        return _fingerprint(stmt.lock), {"block": list(stmt.block or [])}
    return None


def _diff_compound(b, a, emit):
    hb, slots_b = _compound(b)
    ha, slots_a = _compound(a)
    if hb != ha:
        emit(CT.CONDITION_EXPRESSION_CHANGE if isinstance(b, _CONDITION_KINDS)
             else CT.STATEMENT_UPDATE)
    keys = list(slots_b) + [k for k in slots_a if k not in slots_b]
    for k in keys:
        diff_statements(slots_b.get(k, []), slots_a.get(k, []), emit)


def diff_statements(before: list, after: list, emit) -> None:
    """Align two statement lists and report statement-level changes through ``emit``."""
    fb = [_fingerprint(s) for s in before]
    fa = [_fingerprint(s) for s in after]
    anchors = lcs_pairs(fb, fa) + [(len(before), len(after))]

    gaps = []
    pi = pj = 0
    for i, j in anchors:
        gaps.append((list(range(pi, i)), list(range(pj, j))))
        pi, pj = i + 1, j + 1

    # moved statements: deleted in one place, re-inserted verbatim in another
    pending = {}
    for _, ins in gaps:
        for j in ins:
            pending.setdefault(fa[j], []).append(j)
    moved_b, moved_a = set(), set()
    for dels, _ in gaps:
        for i in dels:
            js = pending.get(fb[i])
            if js:
                moved_b.add(i)
                moved_a.add(js.pop(0))
                emit(CT.STATEMENT_ORDERING_CHANGE)

    for dels, ins in gaps:
        dels = [i for i in dels if i not in moved_b]
        ins = [j for j in ins if j not in moved_a]
        kinds_b = [type(before[i]).__name__ for i in dels]
        kinds_a = [type(after[j]).__name__ for j in ins]
        paired = lcs_pairs(kinds_b, kinds_a)
        used_b = {p for p, _ in paired}
        used_a = {q for _, q in paired}
        for p, q in paired:
            b, a = before[dels[p]], after[ins[q]]
            if _compound(b) is not None:
                _diff_compound(b, a, emit)
            else:
                emit(CT.STATEMENT_UPDATE)
        for p in range(len(dels)):
            if p not in used_b:
                emit(CT.STATEMENT_DELETE)
        for q in range(len(ins)):
            if q not in used_a:
                emit(CT.STATEMENT_INSERT)


# --------------------------------------------------------------------------
# member-level differencing

def _diff_params(b: _Method, a: _Method, emit) -> None:
    bnames = {n: (i, t) for i, (n, t) in enumerate(b.params)}
    anames = {n: (i, t) for i, (n, t) in enumerate(a.params)}
    for n in bnames.keys() & anames.keys():
        if bnames[n][1] != anames[n][1]:
            emit(CT.PARAMETER_TYPE_CHANGE)
    lost = {i: t for n, (i, t) in bnames.items() if n not in anames}
    gained = {i: t for n, (i, t) in anames.items() if n not in bnames}
    for i in sorted(lost.keys() & gained.keys()):
        if lost[i] == gained[i]:
            emit(CT.PARAMETER_RENAMING)
            del lost[i], gained[i]
    for _ in lost:
        emit(CT.PARAMETER_DELETE)
    for _ in gained:
        emit(CT.PARAMETER_INSERT)


def _diff_method(b: _Method, a: _Method, emit) -> None:
    if b.name != a.name:
        emit(CT.METHOD_RENAMING)
    if not b.is_ctor and b.return_type != a.return_type:
        if b.return_type == "void":
            emit(CT.RETURN_TYPE_INSERT)
        elif a.return_type == "void":
            emit(CT.RETURN_TYPE_DELETE)
        else:
            emit(CT.RETURN_TYPE_CHANGE)
    _diff_params(b, a, emit)
    diff_statements(b.body, a.body, emit)


def _added_type(t: _TypeDecl, emit_at, added: bool) -> None:
    emit_at(CT.ADDITIONAL_CLASS if added else CT.REMOVED_CLASS, t.name)
    for m in t.methods:
        emit_at(CT.ADDITIONAL_FUNCTIONALITY if added else CT.REMOVED_FUNCTIONALITY, m.entity)
    for f in sorted(t.fields):
        emit_at(CT.ATTRIBUTE_INSERT if added else CT.ATTRIBUTE_DELETE, f"{t.name}#{f}")


def distill_units(before_ast, after_ast, commit_id: str = "", file_path: str = "",
                  threshold: float = RENAME_SIMILARITY) -> list[SemanticChange]:
    tb, ta = _collect_types(before_ast), _collect_types(after_ast)
    emap = _match_units(tb, ta, threshold)
    out: list[SemanticChange] = []

    def emit_at(ct: ChangeType, entity: str):
        out.append(SemanticChange(ct, commit_id, file_path, entity))

    for b, a in emap.types:
        if a is None:
            _added_type(tb[b], emit_at, added=False)
            continue
        if b is None:
            _added_type(ta[a], emit_at, added=True)
            continue
        for mb, ma in emap.methods[(b, a)]:
            if mb is None:
                emit_at(CT.ADDITIONAL_FUNCTIONALITY, ma.entity)
            elif ma is None:
                emit_at(CT.REMOVED_FUNCTIONALITY, mb.entity)
            else:
                entity = ma.entity
                _diff_method(mb, ma, lambda ct, e=entity: emit_at(ct, e))
        for fb, fa in emap.fields[(b, a)]:
            if fb is None:
                emit_at(CT.ATTRIBUTE_INSERT, f"{a}#{fa}")
            elif fa is None:
                emit_at(CT.ATTRIBUTE_DELETE, f"{b}#{fb}")
            elif tb[b].fields[fb] != ta[a].fields[fa]:
                emit_at(CT.ATTRIBUTE_TYPE_CHANGE, f"{a}#{fa}")
    return sorted(out, key=lambda c: (c.entity, c.change_type.value))


def distill(pair: RevisionPair, threshold: float = RENAME_SIMILARITY) -> list[SemanticChange]:
    """Semantic changes between the two sides of ``pair``.

    Raises :class:`ParseError` naming the side that failed to parse.
    """
    if pair.before == pair.after:
        return []
    before = parse_unit(pair.before, "before", pair.file_path)
    after = parse_unit(pair.after, "after", pair.file_path)
    return distill_units(before, after, pair.commit_id, pair.file_path, threshold)


def change_counts(changes: Iterable[SemanticChange]) -> Counter:
    return Counter(c.change_type for c in changes)
