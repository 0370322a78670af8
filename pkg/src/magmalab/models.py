"""Finite models given by three Cayley tables, and identity checking on them."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

import numpy as np

from .errors import ModelFormatError, ModelSizeError, UnboundVariableError
from .terms import Identity, Operator, Term, Theory, Var, parse_identity

MAX_SIZE = 64

# row-major table order; also the cell order used by the model search
OPERATORS = (Operator.MUL, Operator.LDIV, Operator.RDIV)
TABLE_NAMES = {Operator.MUL: "mul", Operator.LDIV: "ldiv", Operator.RDIV: "rdiv"}


def _as_table(rows, n: int, label: str) -> np.ndarray:
    try:
        arr = np.array(rows, dtype=np.int64)
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"{label}: not an integer table ({exc})") from None
    if arr.shape != (n, n):
        raise ModelFormatError(f"{label}: expected {n}x{n} table, got shape {arr.shape}")
    if arr.size and (arr.min() < 0 or arr.max() >= n):
        raise ModelFormatError(f"{label}: entries must lie in 0..{n - 1}")
    arr.setflags(write=False)
    return arr


class Model:
    """An algebra on {0..n-1}; ``table[i, j]`` holds ``i op j``.

    Tables are stored as read-only numpy arrays; a Model never changes.
    """

    __slots__ = ("size", "mul", "ldiv", "rdiv")

    def __init__(self, mul, ldiv, rdiv, size: Optional[int] = None):
        n = size if size is not None else len(mul)
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise ModelSizeError("model size must be a positive integer")
        if n > MAX_SIZE:
            raise ModelSizeError(f"model size {n} exceeds the maximum of {MAX_SIZE}")
        object.__setattr__(self, "size", int(n))
        object.__setattr__(self, "mul", _as_table(mul, n, "mul"))
        object.__setattr__(self, "ldiv", _as_table(ldiv, n, "ldiv"))
        object.__setattr__(self, "rdiv", _as_table(rdiv, n, "rdiv"))

    def __setattr__(self, key, value):
        raise AttributeError("Model is immutable")

    def __reduce__(self):
        return (Model, (self.mul, self.ldiv, self.rdiv))

    def table(self, op: Operator) -> np.ndarray:
        return getattr(self, TABLE_NAMES[op])

    def stacked(self) -> np.ndarray:
        """The (3, n, n) array of mul, ldiv, rdiv."""
        return np.stack([self.mul, self.ldiv, self.rdiv])

    def __eq__(self, other):
        if not isinstance(other, Model):
            return NotImplemented
        return self.size == other.size and np.array_equal(self.stacked(), other.stacked())

    def __hash__(self):
        return hash((self.size, self.stacked().tobytes()))

    def __repr__(self):
        return f"Model(size={self.size})"

    def to_dict(self) -> dict:
        return {
            "size": self.size,
            "mul": self.mul.tolist(),
            "ldiv": self.ldiv.tolist(),
            "rdiv": self.rdiv.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Model":
        if not isinstance(data, Mapping):
            raise ModelFormatError("model must be an object")
        missing = {"size", "mul", "ldiv", "rdiv"} - set(data)
        if missing:
            raise ModelFormatError(f"model is missing fields: {sorted(missing)}")
        n = data["size"]
        if isinstance(n, bool) or not isinstance(n, int):
            raise ModelFormatError("size must be an integer")
        return cls(data["mul"], data["ldiv"], data["rdiv"], size=n)

    @classmethod
    def from_array(cls, tables) -> "Model":
        tables = np.asarray(tables)
        return cls(tables[0], tables[1], tables[2])


def dumps_model(m: Model) -> str:
    """Model file text: one JSON object, one table row per line."""

    def table(rows):
        body = ",\n".join("    [" + ", ".join(str(v) for v in row) + "]" for row in rows)
        return "[\n" + body + "\n  ]"

    return (
        "{\n"
        f'  "size": {m.size},\n'
        f'  "mul": {table(m.mul.tolist())},\n'
        f'  "ldiv": {table(m.ldiv.tolist())},\n'
        f'  "rdiv": {table(m.rdiv.tolist())}\n'
        "}\n"
    )


def loads_model(text: str) -> Model:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"model file is not valid JSON: {exc}") from None
    return Model.from_dict(data)


# --------------------------------------------------------------- evaluation


def eval_term(t: Term, m: Model, assignment: Mapping[str, int]) -> int:
    if isinstance(t, Var):
        try:
            return int(assignment[t.name])
        except KeyError:
            raise UnboundVariableError(t.name) from None
    a = eval_term(t.left, m, assignment)
    b = eval_term(t.right, m, assignment)
    return int(m.table(t.op)[a, b])


def _eval_vectorized(t: Term, tables: Mapping[Operator, np.ndarray], env: Mapping[str, np.ndarray]):
    if isinstance(t, Var):
        return env[t.name]
    a = _eval_vectorized(t.left, tables, env)
    b = _eval_vectorized(t.right, tables, env)
    return tables[t.op][a, b]


@dataclass(frozen=True)
class Verdict:
    name: str
    holds: bool
    witness: Optional[dict] = field(default=None)

    def __post_init__(self):
        if self.holds != (self.witness is None):
            raise ValueError("witness must be present exactly when the identity fails")


_CHUNK = 1 << 20


def satisfies(m: Model, ident: Identity) -> Verdict:
    """Check ``ident`` on every assignment of its variables into ``m``.

    On failure the witness is the lexicographically first violating
    assignment: variables by first occurrence (lhs, then rhs), values
    ascending.
    """
    names = ident.variables()
    n, k = m.size, len(names)
    tables = {op: m.table(op) for op in OPERATORS}
    if k == 0:
        # ground identities cannot occur in this signature, kept for safety
        return Verdict(ident.name, True)
    # split on leading variables so no block exceeds _CHUNK assignments
    lead = 0
    while lead < k and n ** (k - lead) > _CHUNK:
        lead += 1
    tail = k - lead
    grid = np.indices((n,) * tail).reshape(tail, -1) if tail else np.zeros((0, 1), dtype=int)
    block = grid.shape[1]
    for prefix_index in range(n**lead):
        prefix = np.unravel_index(prefix_index, (n,) * lead) if lead else ()
        env = {}
        for pos, name in enumerate(names):
            if pos < lead:
                env[name] = np.full(block, prefix[pos], dtype=np.int64)
            else:
                env[name] = grid[pos - lead]
        lhs = np.broadcast_to(_eval_vectorized(ident.lhs, tables, env), (block,))
        rhs = np.broadcast_to(_eval_vectorized(ident.rhs, tables, env), (block,))
        bad = lhs != rhs
        if bad.any():
            idx = int(np.argmax(bad))
            witness = {name: int(env[name][idx]) for name in names}
            return Verdict(ident.name, False, witness)
    return Verdict(ident.name, True)


def satisfies_theory(m: Model, theory: Iterable[Identity]) -> list[Verdict]:
    return [satisfies(m, ident) for ident in theory]


def holds_all(m: Model, theory: Iterable[Identity]) -> bool:
    return all(satisfies(m, ident).holds for ident in theory)


# ------------------------------------------------------------ constructions


def direct_product(a: Model, b: Model) -> Model:
    """Coordinatewise product; the pair (i, j) is encoded as ``i * b.size + j``."""
    n = a.size * b.size
    if n > MAX_SIZE:
        raise ModelSizeError(f"product size {n} exceeds the maximum of {MAX_SIZE}")
    tables = []
    for op in OPERATORS:
        ta, tb = a.table(op), b.table(op)
        # out[(i1,j1),(i2,j2)] = ta[i1,i2] * nb + tb[j1,j2]
        out = ta[:, None, :, None] * b.size + tb[None, :, None, :]
        tables.append(out.reshape(n, n))
    return Model(*tables)


def dual_model(m: Model) -> Model:
    return Model(m.mul.T, m.rdiv.T, m.ldiv.T)


def model_from_mul(mul) -> Model:
    """Quasigroup from a Latin square, with its induced division tables."""
    mul = np.asarray(mul, dtype=np.int64)
    n = len(mul)
    ldiv = np.zeros((n, n), dtype=np.int64)
    rdiv = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            ldiv[i, mul[i, j]] = j
            rdiv[mul[i, j], j] = i
    return Model(mul, ldiv, rdiv)


def band_model(mul) -> Model:
    """Band-style model with ldiv = rdiv = mul."""
    return Model(mul, mul, mul)


def left_zero(n: int) -> Model:
    return band_model([[i] * n for i in range(n)])


def right_zero(n: int) -> Model:
    return band_model([list(range(n)) for _ in range(n)])


def cyclic_group(n: int) -> Model:
    return model_from_mul([[(i + j) % n for j in range(n)] for i in range(n)])


def trivial_model() -> Model:
    return Model([[0]], [[0]], [[0]])


# -------------------------------------------------------------- recognizers


def _theory(*lines) -> Theory:
    return Theory(parse_identity(line) for line in lines)


QUASIGROUP_IDENTITIES = _theory(
    "D1: x \\ (x * y) = y",
    "D2: (x * y) / y = x",
    "D3: x * (x \\ y) = y",
    "D4: (x / y) * y = x",
)
LOOP_IDENTITY = parse_identity("LP: x \\ x = y / y")
RECT_BAND_IDENTITIES = _theory(
    "B1: x * x = x",
    "B2: (x * y) * z = x * (y * z)",
    "B3: (x * y) * (z * w) = x * w",
)


def is_quasigroup(m: Model) -> bool:
    return holds_all(m, QUASIGROUP_IDENTITIES)


def is_loop(m: Model) -> bool:
    return is_quasigroup(m) and satisfies(m, LOOP_IDENTITY).holds


def is_rectangular_band(m: Model) -> bool:
    if not (np.array_equal(m.ldiv, m.mul) and np.array_equal(m.rdiv, m.mul)):
        return False
    return holds_all(m, RECT_BAND_IDENTITIES)
