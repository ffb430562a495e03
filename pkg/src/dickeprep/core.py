"""Quantum-number arithmetic and shared configuration types.

Angular momentum quantum numbers are stored as doubled integers
(``two_j``, ``two_m``) so that half-integer spins (odd qubit number) are
represented exactly and never compared through floats.  For a register of
``n`` qubits, ``two_j = n`` and the Hamming weight of the corresponding
Dicke state is ``w = (two_j - two_m) / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


class DickePrepError(Exception):
    """Base class for all package-specific errors."""


class ParityMismatch(DickePrepError, ValueError):
    """two_m does not have the same parity as two_j."""


class OutOfRange(DickePrepError, ValueError):
    """A quantum number or backend argument is outside its valid range."""


class DomainError(DickePrepError, ValueError):
    """A real-valued argument is outside the mathematical domain."""


class BackendOverflow(DickePrepError, ArithmeticError):
    """The log-sum d-matrix backend lost too much precision to cancellation."""


class NormDrift(DickePrepError, ArithmeticError):
    """A propagated state's norm drifted beyond tolerance (stability bug)."""


class SingularSystem(DickePrepError, ArithmeticError):
    """The (I - Q) system is numerically singular: chain is not absorbing."""


class RegimeViolation(DickePrepError, ValueError):
    """Parameters violate a regime assumption (e.g. dispersive limit)."""


class ParseError(DickePrepError, ValueError):
    """A configuration file could not be parsed (unknown/malformed keys)."""


class ValidationError(DickePrepError, ValueError):
    """A parsed configuration violates invariants; lists offending keys."""


@dataclass(frozen=True)
class SpinSpec:
    """A (j, m) pair stored as doubled integers.

    Invariants (enforced on construction): two_j >= 0, |two_m| <= two_j, and
    two_m has the same parity as two_j.
    """

    two_j: int
    two_m: int

    def __post_init__(self) -> None:
        if not isinstance(self.two_j, int) or not isinstance(self.two_m, int):
            raise OutOfRange("two_j and two_m must be integers")
        if self.two_j < 0:
            raise OutOfRange(f"two_j must be >= 0, got {self.two_j}")
        if (self.two_m - self.two_j) % 2 != 0:
            raise ParityMismatch(
                f"two_m={self.two_m} must have the same parity as two_j={self.two_j}"
            )
        if abs(self.two_m) > self.two_j:
            raise OutOfRange(f"|two_m|={abs(self.two_m)} exceeds two_j={self.two_j}")

    @property
    def j(self) -> float:
        return self.two_j / 2.0

    @property
    def m(self) -> float:
        return self.two_m / 2.0

    @property
    def n(self) -> int:
        """Qubit count of the register this spin lives on."""
        return self.two_j

    @property
    def weight(self) -> int:
        """Hamming weight w = j - m of the corresponding Dicke state."""
        return (self.two_j - self.two_m) // 2

    @classmethod
    def from_weight(cls, n: int, w: int) -> "SpinSpec":
        """Inverse of (n, weight): exact round trip with the properties above."""
        return cls(two_j=n, two_m=n - 2 * w)


def validate_spin(two_j: int, two_m: int) -> SpinSpec:
    """Validate a doubled-integer (j, m) pair.

    Raises ParityMismatch or OutOfRange; returns the SpinSpec otherwise.
    """
    return SpinSpec(two_j, two_m)


def ring_radius(spec: SpinSpec) -> float:
    """Radius r_m = sqrt(j(j+1) - m^2) of the Dicke ring on the collective
    Bloch sphere of radius sqrt(j(j+1))."""
    j = spec.j
    m = spec.m
    return math.sqrt(j * (j + 1.0) - m * m)


# ---------------------------------------------------------------------------
# protocol configuration


class AnglePolicy:
    """Rotation-angle policy names (string constants, JSON-stable)."""

    GEOMETRIC = "geometric"            # tangency formula, any target
    APPROX_MT0 = "approx_mt0"          # arcsin(m/j), target m_t = 0 only
    NUMERIC_OPTIMAL = "numeric_optimal"  # grid + golden-section maximization

    ALL = (GEOMETRIC, APPROX_MT0, NUMERIC_OPTIMAL)


@dataclass(frozen=True)
class ResetPolicy:
    """When to return the register to the all-up state after a measurement.

    kind is one of "none", "sqrt_j", "custom"; "custom" carries a threshold t
    and resets whenever the measured |m| > t.  "sqrt_j" resets when |m| >
    sqrt(j), evaluated exactly on doubled integers: (two_m)^2 > 2*two_j.
    """

    kind: str = "none"
    threshold: float | None = None

    NONE = "none"
    SQRT_J = "sqrt_j"
    CUSTOM = "custom"

    def __post_init__(self) -> None:
        if self.kind not in ("none", "sqrt_j", "custom"):
            raise ValidationError(f"unknown reset policy kind {self.kind!r}")
        if self.kind == "custom":
            if self.threshold is None or not math.isfinite(self.threshold) or self.threshold < 0:
                raise ValidationError("custom reset policy needs a finite threshold >= 0")
        elif self.threshold is not None:
            raise ValidationError(f"reset policy {self.kind!r} takes no threshold")

    def triggers(self, two_j: int, two_m: int) -> bool:
        """Whether measuring two_m fires a reset under this policy."""
        if self.kind == "none":
            return False
        if self.kind == "sqrt_j":
            # |m| > sqrt(j)  <=>  m^2 > j  <=>  (two_m)^2 > 2*two_j, exactly
            return two_m * two_m > 2 * two_j
        return abs(two_m) / 2.0 > self.threshold


def default_max_iterations(two_j: int) -> int:
    """Safety cap for trajectory loops: 10*ceil(log2(j+2)) + 100.

    The expected number of protocol steps is logarithmic in j, so exceeding
    this cap is reported as a failure rather than silently truncated.
    """
    j = two_j / 2.0
    return 10 * math.ceil(math.log2(j + 2.0)) + 100


@dataclass(frozen=True)
class Angle:
    """A rotation angle canonicalized to [-pi, pi]."""

    radians: float

    def __post_init__(self) -> None:
        r = self.radians
        if not math.isfinite(r):
            raise DomainError(f"angle must be finite, got {r}")
        if r > math.pi or r < -math.pi:
            r = math.remainder(r, 2.0 * math.pi)  # lands in [-pi, pi]
            object.__setattr__(self, "radians", r)

    def __float__(self) -> float:
        return self.radians


def _as_radians(angle) -> float:
    """Accept an Angle or a plain number wherever an angle is expected."""
    return float(angle)


@dataclass(frozen=True)
class ProtocolConfig:
    """Full configuration of one preparation protocol run.

    Mirrors the JSON configuration schema: keys two_j, target_two_mt,
    angle_policy, reset_policy, max_iterations, seed.
    """

    two_j: int
    target_two_mt: int = 0
    angle_policy: str = AnglePolicy.GEOMETRIC
    reset_policy: ResetPolicy = field(default_factory=ResetPolicy)
    max_iterations: int | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        validate_spin(self.two_j, self.target_two_mt)
        if self.angle_policy not in AnglePolicy.ALL:
            raise ValidationError(
                f"angle_policy must be one of {AnglePolicy.ALL}, got {self.angle_policy!r}"
            )
        if self.angle_policy == AnglePolicy.APPROX_MT0 and self.target_two_mt != 0:
            raise ValidationError("approx_mt0 angle policy requires target_two_mt = 0")
        if self.max_iterations is None:
            object.__setattr__(self, "max_iterations", default_max_iterations(self.two_j))
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be >= 1")
        if not isinstance(self.seed, int):
            raise ValidationError("seed must be an integer")

    @property
    def spin(self) -> SpinSpec:
        """Initial spin of the protocol: the all-up state m = j."""
        return SpinSpec(self.two_j, self.two_j)

    @property
    def j(self) -> float:
        return self.two_j / 2.0

    @property
    def target_index(self) -> int:
        """Index of the target state in the m' = -j..j amplitude ordering."""
        return (self.target_two_mt + self.two_j) // 2
