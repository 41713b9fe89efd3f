"""Circuit genome: four-branch loops, capacitively coupled chains, file format.

A loop has four branches with fixed incidence::

    B0: ground -- node0     B1: node0 -- node1
    B2: node1  -- node2     B3: node2 -- ground

Each branch is a capacitor, an inductor, a Josephson junction (with its own
junction capacitance) or absent. An absent branch is a plain wire.
"""
from __future__ import annotations

import enum
import itertools
import json
import math
from dataclasses import dataclass, field, replace
from typing import Iterator, Sequence


class BranchKind(enum.Enum):
    CAPACITOR = "C"
    INDUCTOR = "L"
    JUNCTION = "JJ"
    ABSENT = "none"

    @property
    def onehot(self) -> tuple[int, int, int]:
        """The (alpha, beta, gamma) triple of this kind."""
        return _ONEHOT[self]


_ONEHOT = {
    BranchKind.CAPACITOR: (1, 0, 0),
    BranchKind.INDUCTOR: (0, 1, 0),
    BranchKind.JUNCTION: (0, 0, 1),
    BranchKind.ABSENT: (0, 0, 0),
}

# parameter names carried by each kind, in genome order
PARAMETERS = {
    BranchKind.CAPACITOR: ("C",),
    BranchKind.INDUCTOR: ("L",),
    BranchKind.JUNCTION: ("CJ", "EJ"),
    BranchKind.ABSENT: (),
}

BRANCH_NODES = ((None, 0), (0, 1), (1, 2), (2, None))


class CircuitError(ValueError):
    """Invalid circuit description.

    ``code`` is one of ``MalformedSyntax``, ``UnknownKind``, ``NegativeValue``,
    ``MissingValue`` or ``BadStructure``; ``location`` names the offending line
    or field.
    """

    def __init__(self, code: str, message: str, location: str = ""):
        self.code = code
        self.location = location
        where = f" at {location}" if location else ""
        super().__init__(f"{code}{where}: {message}")


@dataclass(frozen=True)
class Branch:
    """One two-terminal element. Values in SI units, ``EJ`` in hertz."""

    kind: BranchKind
    C: float | None = None
    L: float | None = None
    CJ: float | None = None
    EJ: float | None = None

    def __post_init__(self):
        required = PARAMETERS[self.kind]
        for name in ("C", "L", "CJ", "EJ"):
            value = getattr(self, name)
            if name in required:
                if value is None:
                    raise CircuitError("MissingValue", f"{self.kind.value} branch needs {name}", name)
                if not math.isfinite(value) or value <= 0:
                    raise CircuitError("NegativeValue", f"{name} must be positive, got {value}", name)
            elif value is not None:
                raise CircuitError("BadStructure", f"{self.kind.value} branch cannot carry {name}", name)

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in PARAMETERS[self.kind])

    def with_values(self, values: Sequence[float]) -> Branch:
        names = PARAMETERS[self.kind]
        if len(values) != len(names):
            raise ValueError(f"expected {len(names)} values, got {len(values)}")
        return replace(self, **dict(zip(names, (float(v) for v in values))))

    @classmethod
    def capacitor(cls, C: float) -> Branch:
        return cls(BranchKind.CAPACITOR, C=C)

    @classmethod
    def inductor(cls, L: float) -> Branch:
        return cls(BranchKind.INDUCTOR, L=L)

    @classmethod
    def junction(cls, CJ: float, EJ: float) -> Branch:
        return cls(BranchKind.JUNCTION, CJ=CJ, EJ=EJ)

    @classmethod
    def absent(cls) -> Branch:
        return cls(BranchKind.ABSENT)


ABSENT = Branch.absent()


@dataclass(frozen=True)
class Loop:
    """Four branches threaded by the reduced external flux ``phi_x`` (radians)."""

    branches: tuple[Branch, Branch, Branch, Branch]
    phi_x: float = 0.0

    def __post_init__(self):
        if len(self.branches) != 4:
            raise CircuitError("BadStructure", f"a loop has 4 branches, got {len(self.branches)}", "branches")
        object.__setattr__(self, "branches", tuple(self.branches))

    @property
    def kinds(self) -> tuple[BranchKind, ...]:
        return tuple(b.kind for b in self.branches)

    @property
    def alpha(self) -> tuple[int, ...]:
        return tuple(k.onehot[0] for k in self.kinds)

    @property
    def beta(self) -> tuple[int, ...]:
        return tuple(k.onehot[1] for k in self.kinds)

    @property
    def gamma(self) -> tuple[int, ...]:
        return tuple(k.onehot[2] for k in self.kinds)

    def with_flux(self, phi_x: float) -> Loop:
        return replace(self, phi_x=float(phi_x))

    def parameter_vector(self) -> list[float]:
        """Packed component values; absent branches contribute nothing."""
        return [v for b in self.branches for v in b.values]

    def with_parameters(self, values: Sequence[float]) -> Loop:
        values = list(values)
        if len(values) != len(self.parameter_vector()):
            raise ValueError("parameter vector length does not match the topology")
        branches = []
        for b in self.branches:
            n = len(PARAMETERS[b.kind])
            branches.append(b.with_values(values[:n]))
            values = values[n:]
        return replace(self, branches=tuple(branches))


@dataclass(frozen=True)
class Chain:
    """Loops in a line, neighbours joined by coupling capacitors."""

    loops: tuple[Loop, ...]
    couplings: tuple[float, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "loops", tuple(self.loops))
        object.__setattr__(self, "couplings", tuple(float(c) for c in self.couplings))
        if not self.loops:
            raise CircuitError("BadStructure", "a chain needs at least one loop", "loops")
        if len(self.couplings) != len(self.loops) - 1:
            raise CircuitError(
                "BadStructure",
                f"{len(self.loops)} loops need {len(self.loops) - 1} couplings, got {len(self.couplings)}",
                "couplings",
            )
        for i, c in enumerate(self.couplings):
            if not math.isfinite(c) or c <= 0:
                raise CircuitError("NegativeValue", f"coupling must be positive, got {c}", f"couplings[{i}]")

    def __len__(self) -> int:
        return len(self.loops)

    def parameter_vector(self) -> list[float]:
        return [v for loop in self.loops for v in loop.parameter_vector()] + list(self.couplings)

    def with_parameters(self, values: Sequence[float]) -> Chain:
        values = list(values)
        loops = []
        for loop in self.loops:
            n = len(loop.parameter_vector())
            loops.append(loop.with_parameters(values[:n]))
            values = values[n:]
        return Chain(tuple(loops), tuple(values))

    def with_flux(self, phi_x: float) -> Chain:
        return replace(self, loops=tuple(loop.with_flux(phi_x) for loop in self.loops))


def as_chain(circuit: Loop | Chain) -> Chain:
    return circuit if isinstance(circuit, Chain) else Chain((circuit,), ())


@dataclass(frozen=True)
class ValidityReport:
    valid: bool
    reason: str  # "Valid", "OnlyCapacitive", "OnlyInductive" or "AllAbsent"


def validate_topology(topology: Loop | Sequence[BranchKind]) -> ValidityReport:
    """Reject loops that cannot carry a quantum Hamiltonian."""
    kinds = topology.kinds if isinstance(topology, Loop) else tuple(topology)
    if len(kinds) != 4:
        raise CircuitError("BadStructure", "a loop has 4 branches", "branches")
    present = {k for k in kinds if k is not BranchKind.ABSENT}
    if not present:
        return ValidityReport(False, "AllAbsent")
    if present == {BranchKind.CAPACITOR}:
        return ValidityReport(False, "OnlyCapacitive")
    if present == {BranchKind.INDUCTOR}:
        return ValidityReport(False, "OnlyInductive")
    return ValidityReport(True, "Valid")


def all_kind_assignments() -> Iterator[tuple[BranchKind, ...]]:
    return itertools.product(list(BranchKind), repeat=4)


def enumerate_single_loop_topologies(
    template: dict[BranchKind, Branch] | None = None, phi_x: float = 0.0
) -> list[Loop]:
    """All valid single-loop topologies (225 of the 256 kind assignments).

    ``template`` supplies the branch used for each kind; by default every
    component gets a placeholder value of one SI unit.
    """
    template = template or DEFAULT_TEMPLATE
    loops = []
    for kinds in all_kind_assignments():
        if validate_topology(kinds).valid:
            loops.append(Loop(tuple(template.get(k, ABSENT) for k in kinds), phi_x))
    return loops


DEFAULT_TEMPLATE = {
    BranchKind.CAPACITOR: Branch.capacitor(1.0),
    BranchKind.INDUCTOR: Branch.inductor(1.0),
    BranchKind.JUNCTION: Branch.junction(1.0, 1.0),
    BranchKind.ABSENT: ABSENT,
}


def loop_from_kinds(kinds: Sequence[BranchKind], template: dict[BranchKind, Branch], phi_x: float = 0.0) -> Loop:
    return Loop(tuple(template[k] if k is not BranchKind.ABSENT else ABSENT for k in kinds), phi_x)


# --- file format -----------------------------------------------------------

_KINDS = {k.value: k for k in BranchKind}


def circuit_to_dict(circuit: Loop | Chain) -> dict:
    chain = as_chain(circuit)
    loops = []
    for loop in chain.loops:
        branches = []
        for b in loop.branches:
            entry: dict = {"kind": b.kind.value}
            for name in PARAMETERS[b.kind]:
                entry[name] = getattr(b, name)
            branches.append(entry)
        loops.append({"phi_x": loop.phi_x, "branches": branches})
    return {"loops": loops, "couplings": list(chain.couplings)}


def serialize_circuit(circuit: Loop | Chain) -> bytes:
    return (json.dumps(circuit_to_dict(circuit), indent=2) + "\n").encode("utf-8")


def _number(value, where: str, positive: bool = True) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise CircuitError("MalformedSyntax", f"expected a number, got {value!r}", where)
    value = float(value)
    if not math.isfinite(value):
        raise CircuitError("MalformedSyntax", "non-finite number", where)
    if positive and value <= 0:
        raise CircuitError("NegativeValue", f"value must be positive, got {value}", where)
    return value


def circuit_from_dict(data) -> Chain:
    if not isinstance(data, dict) or "loops" not in data:
        raise CircuitError("BadStructure", "top level must be an object with 'loops'", "$")
    raw_loops = data["loops"]
    if not isinstance(raw_loops, list) or not raw_loops:
        raise CircuitError("BadStructure", "'loops' must be a non-empty list", "loops")
    loops = []
    for i, raw in enumerate(raw_loops):
        where = f"loops[{i}]"
        if not isinstance(raw, dict) or not isinstance(raw.get("branches"), list):
            raise CircuitError("BadStructure", "loop needs a 'branches' list", where)
        if len(raw["branches"]) != 4:
            raise CircuitError("BadStructure", "a loop has exactly 4 branches", f"{where}.branches")
        phi_x = _number(raw.get("phi_x", 0.0), f"{where}.phi_x", positive=False)
        branches = []
        for j, rb in enumerate(raw["branches"]):
            bwhere = f"{where}.branches[{j}]"
            if not isinstance(rb, dict):
                raise CircuitError("BadStructure", "branch must be an object", bwhere)
            kind = _KINDS.get(rb.get("kind"))
            if kind is None:
                raise CircuitError("UnknownKind", f"unknown element kind {rb.get('kind')!r}", f"{bwhere}.kind")
            values = {}
            for name in ("C", "L", "CJ", "EJ"):
                if rb.get(name) is None:
                    continue
                if name not in PARAMETERS[kind]:
                    raise CircuitError("BadStructure", f"{kind.value} branch cannot carry {name}", f"{bwhere}.{name}")
                values[name] = _number(rb[name], f"{bwhere}.{name}")
            try:
                branches.append(Branch(kind, **values))
            except CircuitError as exc:
                raise CircuitError(exc.code, str(exc), f"{bwhere}.{exc.location}") from None
        loops.append(Loop(tuple(branches), phi_x))
    raw_c = data.get("couplings", [])
    if not isinstance(raw_c, list):
        raise CircuitError("BadStructure", "'couplings' must be a list", "couplings")
    couplings = tuple(_number(c, f"couplings[{k}]") for k, c in enumerate(raw_c))
    return Chain(tuple(loops), couplings)


def parse_circuit(text: bytes | str) -> Chain:
    """Parse the JSON circuit format into a :class:`Chain`."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CircuitError("MalformedSyntax", "file is not UTF-8", f"byte {exc.start}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CircuitError("MalformedSyntax", exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    return circuit_from_dict(data)


def load_circuit(path) -> Chain:
    with open(path, "rb") as fh:
        return parse_circuit(fh.read())
