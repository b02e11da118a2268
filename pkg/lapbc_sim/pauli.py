"""Signed Pauli algebra, the currency of every rotation and measurement.

A SignedPauli is a Hermitian Pauli string with a +1/-1 sign. The operator part
is packed into two integer bitmasks (bit q of `xs` / `zs` set when qubit q
carries an X / Z component; both set means Y), which keeps products and
commutation checks to a handful of integer operations even on 144 qubits.

Everything here is pure and immutable:
  - multiply / commutes: the group operations
  - push_right: conjugation of a later axis by a π/4 rotation that moves past it
  - clifford_as_quarters: H, S, S†, CX and CZ as sequences of π/4 rotations
"""

from __future__ import annotations

from dataclasses import dataclass
import re
from typing import TYPE_CHECKING, Iterator, Mapping

if TYPE_CHECKING:  # pragma: no cover
    from .circuit import Gate


QUARTER = "quarter"
EIGHTH = "eighth"
ROTATION_KINDS = (QUARTER, EIGHTH)

AXES = ("X", "Y", "Z")
_AXIS_BITS = {"X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_AXIS = {(1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_I_POWERS = (1 + 0j, 1j, -1 + 0j, -1j)
_TERM_RE = re.compile(r"([XYZ])(\d+)")


class PauliError(ValueError):
    """Raised when a Pauli string or rotation is malformed."""


def iter_bits(mask: int) -> Iterator[int]:
    """Yield the indices of set bits in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class SignedPauli:
    sign: int = 1
    xs: int = 0
    zs: int = 0

    def __post_init__(self) -> None:
        """Validate the sign and masks."""
        if self.sign not in (1, -1):
            raise PauliError(f"Pauli sign must be +1 or -1, got {self.sign!r}.")
        if self.xs < 0 or self.zs < 0:
            raise PauliError("Pauli bitmasks must be non-negative.")

    @staticmethod
    def from_axes(axes: Mapping[int, str], sign: int = 1) -> "SignedPauli":
        """Build a Pauli from a qubit -> axis map; identity entries are skipped."""
        xs = 0
        zs = 0
        for qubit, axis in axes.items():
            if qubit < 0:
                raise PauliError(f"Qubit index must be non-negative, got {qubit}.")
            if axis == "I":
                continue
            if axis not in _AXIS_BITS:
                raise PauliError(f"Unknown Pauli axis {axis!r} on qubit {qubit}.")
            x_bit, z_bit = _AXIS_BITS[axis]
            xs |= x_bit << qubit
            zs |= z_bit << qubit
        return SignedPauli(sign=sign, xs=xs, zs=zs)

    @staticmethod
    def single(qubit: int, axis: str, sign: int = 1) -> "SignedPauli":
        """Build a weight-1 Pauli."""
        return SignedPauli.from_axes({qubit: axis}, sign=sign)

    @staticmethod
    def parse(text: str) -> "SignedPauli":
        """Parse `+X0Z1`, `-Y3` or `+I` (sign optional, defaults to +)."""
        raw = text.strip()
        if not raw:
            raise PauliError("Empty Pauli string.")
        sign = 1
        if raw[0] in "+-":
            sign = -1 if raw[0] == "-" else 1
            raw = raw[1:]
        if raw == "I":
            return SignedPauli(sign=sign)
        axes: dict[int, str] = {}
        position = 0
        for match in _TERM_RE.finditer(raw):
            if match.start() != position:
                raise PauliError(f"Malformed Pauli string: {text!r}")
            qubit = int(match.group(2))
            if qubit in axes:
                raise PauliError(f"Qubit {qubit} repeated in Pauli string {text!r}.")
            axes[qubit] = match.group(1)
            position = match.end()
        if position != len(raw) or not axes:
            raise PauliError(f"Malformed Pauli string: {text!r}")
        return SignedPauli.from_axes(axes, sign=sign)

    @property
    def axes(self) -> dict[int, str]:
        """Qubit -> axis map over the support, in ascending qubit order."""
        return {qubit: self.axis_of(qubit) for qubit in iter_bits(self.xs | self.zs)}

    @property
    def weight(self) -> int:
        """Number of non-identity sites."""
        return (self.xs | self.zs).bit_count()

    @property
    def is_identity(self) -> bool:
        """True when no site carries a Pauli."""
        return not (self.xs | self.zs)

    def support(self) -> frozenset[int]:
        """Qubits acted on non-trivially."""
        return frozenset(iter_bits(self.xs | self.zs))

    def axis_of(self, qubit: int) -> str | None:
        """Axis on `qubit`, or None for identity."""
        bits = ((self.xs >> qubit) & 1, (self.zs >> qubit) & 1)
        return _BITS_AXIS.get(bits)

    def unsigned(self) -> "SignedPauli":
        """Same operator with sign +1."""
        return SignedPauli(sign=1, xs=self.xs, zs=self.zs)

    def with_sign(self, sign: int) -> "SignedPauli":
        """Same operator with the given sign."""
        return SignedPauli(sign=sign, xs=self.xs, zs=self.zs)

    def negate(self) -> "SignedPauli":
        """Flip the sign."""
        return SignedPauli(sign=-self.sign, xs=self.xs, zs=self.zs)

    def __str__(self) -> str:
        """Render as `+X0Z1`."""
        prefix = "+" if self.sign == 1 else "-"
        if self.is_identity:
            return prefix + "I"
        return prefix + "".join(f"{axis}{qubit}" for qubit, axis in self.axes.items())


@dataclass(frozen=True)
class Rotation:
    """exp(iπ/4·axis) for a quarter, exp(iπ/8·axis) for an eighth."""

    kind: str
    axis: SignedPauli

    def __post_init__(self) -> None:
        """Validate the rotation kind."""
        if self.kind not in ROTATION_KINDS:
            raise PauliError(f"Unknown rotation kind {self.kind!r}.")
        if self.axis.is_identity:
            raise PauliError("Rotation axis cannot be the identity.")


@dataclass(frozen=True)
class PauliMeasurement:
    """Measurement along a signed axis; sign -1 flips the recorded bit."""

    axis: SignedPauli


def _product(p: SignedPauli, q: SignedPauli) -> tuple[int, SignedPauli]:
    """Return (k, r) with p·q = i^k · r, where r carries sign +1."""
    x1, z1, x2, z2 = p.xs, p.zs, q.xs, q.zs
    y1 = x1 & z1
    x_only = x1 & ~z1
    z_only = z1 & ~x1
    plus = (y1 & z2 & ~x2) | (x_only & x2 & z2) | (z_only & x2 & ~z2)
    minus = (y1 & x2 & ~z2) | (x_only & z2 & ~x2) | (z_only & x2 & z2)
    k = (plus.bit_count() - minus.bit_count()) % 4
    if p.sign * q.sign == -1:
        k = (k + 2) % 4
    return k, SignedPauli(sign=1, xs=x1 ^ x2, zs=z1 ^ z2)


def multiply(p: SignedPauli, q: SignedPauli) -> tuple[complex, SignedPauli]:
    """Operator product p·q as (phase, r) with phase in {±1, ±i} and r signed +1."""
    k, r = _product(p, q)
    return _I_POWERS[k], r


def hermitian_product(p: SignedPauli, q: SignedPauli, *, extra: int = 0) -> SignedPauli:
    """Fold i^extra · p·q into a signed Pauli; the total phase must be real."""
    k, r = _product(p, q)
    k = (k + extra) % 4
    if k % 2:
        raise PauliError(f"Product of {p} and {q} is not Hermitian.")
    return r.with_sign(1 if k == 0 else -1)


def commutes(p: SignedPauli, q: SignedPauli) -> bool:
    """True iff p·q = q·p."""
    return ((p.xs & q.zs).bit_count() + (p.zs & q.xs).bit_count()) % 2 == 0


def push_right(quarter: Rotation, later: SignedPauli) -> SignedPauli:
    """Axis of `later` after the quarter rotation is moved past it.

    Returns exp(-iπ/4·P) · later · exp(+iπ/4·P): unchanged when P and `later`
    commute, otherwise the Hermitian resolution of (-i)·P·later.
    """
    if quarter.kind != QUARTER:
        raise PauliError("push_right expects a quarter rotation.")
    if commutes(quarter.axis, later):
        return later
    return hermitian_product(quarter.axis, later, extra=3)


def clifford_as_quarters(gate: "Gate") -> tuple[Rotation, ...]:
    """Decompose H, S, S†, CX or CZ into quarter rotations, first-applied first."""
    kind = gate.kind
    if kind == "h":
        (qubit,) = gate.qubits
        z = SignedPauli.single(qubit, "Z")
        x = SignedPauli.single(qubit, "X")
        return (Rotation(QUARTER, z), Rotation(QUARTER, x), Rotation(QUARTER, z))
    if kind == "s":
        (qubit,) = gate.qubits
        return (Rotation(QUARTER, SignedPauli.single(qubit, "Z", sign=-1)),)
    if kind == "sdg":
        (qubit,) = gate.qubits
        return (Rotation(QUARTER, SignedPauli.single(qubit, "Z")),)
    if kind == "cx":
        control, target = gate.qubits
        return (
            Rotation(QUARTER, SignedPauli.single(target, "X", sign=-1)),
            Rotation(QUARTER, SignedPauli.single(control, "Z", sign=-1)),
            Rotation(QUARTER, SignedPauli.from_axes({control: "Z", target: "X"})),
        )
    if kind == "cz":
        a, b = gate.qubits
        return (
            Rotation(QUARTER, SignedPauli.single(a, "Z", sign=-1)),
            Rotation(QUARTER, SignedPauli.single(b, "Z", sign=-1)),
            Rotation(QUARTER, SignedPauli.from_axes({a: "Z", b: "Z"})),
        )
    raise PauliError(f"Gate {kind!r} is not a supported Clifford.")
