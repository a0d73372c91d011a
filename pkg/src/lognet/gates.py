"""Binary logic gates and the layered pairwise fingerprint encoder."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .data import BinaryFingerprint
from .errors import BoundsError, ConfigError, ValidationError


class GateType(Enum):
    AND = "and"
    OR = "or"
    NAND = "nand"
    NOR = "nor"
    XOR = "xor"
    XNOR = "xnor"

    @classmethod
    def from_name(cls, name: str) -> "GateType":
        try:
            return cls(name.strip().lower())
        except ValueError:
            valid = ", ".join(g.value for g in cls)
            raise ConfigError(f"unknown gate '{name}'; expected one of: {valid}") from None


# Four-row truth tables indexed by 2*x + y, i.e. rows (0,0), (0,1), (1,0), (1,1).
TRUTH_TABLES: dict[GateType, tuple[int, int, int, int]] = {
    GateType.AND: (0, 0, 0, 1),
    GateType.OR: (0, 1, 1, 1),
    GateType.NAND: (1, 1, 1, 0),
    GateType.NOR: (1, 0, 0, 0),
    GateType.XOR: (0, 1, 1, 0),
    GateType.XNOR: (1, 0, 0, 1),
}

# The same gates as closed-form expressions. `x + y` is the Boolean sum, which
# saturates at 1, so OR and NOR stay within {0, 1}.
GATE_FORMULAS = {
    GateType.AND: lambda x, y: x * y,
    GateType.OR: lambda x, y: min(x + y, 1),
    GateType.NAND: lambda x, y: 1 - x * y,
    GateType.NOR: lambda x, y: 1 - min(x + y, 1),
    GateType.XOR: lambda x, y: x * (1 - y) + (1 - x) * y,
    GateType.XNOR: lambda x, y: x * y + (1 - x) * (1 - y),
}


def apply_gate(x: int, y: int, gate: GateType) -> int:
    """Evaluate one gate on a bit pair via its truth table."""
    if x not in (0, 1) or y not in (0, 1):
        raise ValidationError(f"gate inputs must be bits, got ({x}, {y})")
    return TRUTH_TABLES[gate][2 * x + y]


def gate_arithmetic(x: int, y: int, gate: GateType) -> int:
    """Evaluate one gate through its closed-form expression."""
    if x not in (0, 1) or y not in (0, 1):
        raise ValidationError(f"gate inputs must be bits, got ({x}, {y})")
    return GATE_FORMULAS[gate](x, y)


_ONE = np.uint8(1)


def _gate_columns(left: np.ndarray, right: np.ndarray, gate: GateType) -> np.ndarray:
    """Vectorized gate over aligned uint8 bit arrays."""
    if gate is GateType.AND:
        return left & right
    if gate is GateType.OR:
        return left | right
    if gate is GateType.NAND:
        return (left & right) ^ _ONE
    if gate is GateType.NOR:
        return (left | right) ^ _ONE
    if gate is GateType.XOR:
        return left ^ right
    if gate is GateType.XNOR:
        return (left ^ right) ^ _ONE
    raise ConfigError(f"unknown gate {gate!r}")


def encode_layer(bits: np.ndarray, gate: GateType) -> np.ndarray:
    """Apply one gate pairwise over adjacent, non-overlapping bit pairs.

    A vector of odd length gets a single 0 appended before pairing, so the
    output length is always ceil(len/2).
    """
    arr = np.asarray(bits)
    if arr.ndim != 1 or arr.size == 0:
        raise ValidationError("encode_layer requires a non-empty 1-D bit vector")
    if not np.all((arr == 0) | (arr == 1)):
        raise ValidationError("encode_layer input must contain only 0 and 1")
    arr = arr.astype(np.uint8)
    if arr.size % 2 != 0:
        arr = np.append(arr, np.uint8(0))
    pairs = arr.reshape(-1, 2)
    return _gate_columns(pairs[:, 0], pairs[:, 1], gate)


def encode_layer_matrix(bits: np.ndarray, gate: GateType) -> np.ndarray:
    """One encoder layer applied row-wise over a (samples, width) bit matrix."""
    arr = np.asarray(bits, dtype=np.uint8)
    if arr.ndim != 2 or arr.shape[1] == 0:
        raise ValidationError("encode_layer_matrix requires a non-empty 2-D bit matrix")
    if arr.shape[1] % 2 != 0:
        pad = np.zeros((arr.shape[0], 1), dtype=np.uint8)
        arr = np.hstack([arr, pad])
    pairs = arr.reshape(arr.shape[0], -1, 2)
    return _gate_columns(pairs[:, :, 0], pairs[:, :, 1], gate)


def ceil_chain(length: int, depth: int) -> int:
    """Apply L -> ceil(L/2) `depth` times."""
    if length < 1:
        raise ValidationError(f"length must be positive, got {length}")
    if depth < 0:
        raise ValidationError(f"depth must be non-negative, got {depth}")
    for _ in range(depth):
        length = (length + 1) // 2
    return length


@dataclass(frozen=True)
class LogicEncoderConfig:
    """Fixed gate type, binarization threshold and number of logic layers."""

    gate: GateType
    threshold: float = 0.5
    hidden_layers: int = 1

    def __post_init__(self):
        if not isinstance(self.gate, GateType):
            raise ConfigError(f"gate must be a GateType, got {self.gate!r}")
        if not 0.0 < self.threshold < 1.0:
            raise ConfigError(f"threshold must lie in (0, 1), got {self.threshold}")
        if self.hidden_layers < 1:
            raise ConfigError(f"hidden_layers must be >= 1, got {self.hidden_layers}")


@dataclass(frozen=True, eq=False)
class LatentCode:
    """Binary latent vector emitted after all logic layers."""

    bits: np.ndarray
    depth: int
    input_len: int

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if not np.all((bits == 0) | (bits == 1)):
            raise ValidationError("latent bits must contain only 0 and 1")
        expected = ceil_chain(self.input_len, self.depth)
        if bits.size != expected:
            raise ValidationError(
                f"latent of depth {self.depth} over {self.input_len} inputs "
                f"must have {expected} bits, got {bits.size}"
            )
        bits = bits.astype(np.uint8)
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    def __len__(self) -> int:
        return int(self.bits.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LatentCode):
            return NotImplemented
        return (
            self.depth == other.depth
            and self.input_len == other.input_len
            and np.array_equal(self.bits, other.bits)
        )


def encode(bf: BinaryFingerprint, cfg: LogicEncoderConfig) -> LatentCode:
    """Run the layered encoder over one binary fingerprint."""
    bits = bf.bits
    for _ in range(cfg.hidden_layers):
        bits = encode_layer(bits, cfg.gate)
    return LatentCode(bits, cfg.hidden_layers, bf.source_ap_count)


def encode_matrix(bits: np.ndarray, gate: GateType, hidden_layers: int) -> np.ndarray:
    """Run the layered encoder over a (samples, aps) bit matrix."""
    if hidden_layers < 1:
        raise ConfigError(f"hidden_layers must be >= 1, got {hidden_layers}")
    out = np.asarray(bits, dtype=np.uint8)
    for _ in range(hidden_layers):
        out = encode_layer_matrix(out, gate)
    return out


def trace_bit_to_aps(bit_index: int, depth: int, input_len: int) -> range:
    """Input AP window that can influence one latent bit.

    Latent bit j at depth h depends on no input outside the half-open window
    [j * 2**h, (j + 1) * 2**h) intersected with the real input range [0, n);
    positions beyond n are zero padding.
    """
    latent_len = ceil_chain(input_len, depth)
    if not 0 <= bit_index < latent_len:
        raise BoundsError(
            f"bit_index {bit_index} out of range for latent length {latent_len}"
        )
    span = 1 << depth
    start = bit_index * span
    stop = min((bit_index + 1) * span, input_len)
    return range(start, stop)
