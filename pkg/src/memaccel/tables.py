"""Lookup tables filled by running a computation-only oracle over every key.

Two concrete tables back the accelerated Viterbi decoder:

* the ACS table, keyed ``group | dibit | 4 predecessor metrics`` and holding
  four new metrics plus four decision bits for one butterfly group;
* the min-select table, keyed by four 4-bit metrics and holding the
  first-wins argmin and the minimum.

Metric fields always occupy the low-order key bits, so keys that differ only
in the first metric are adjacent entries.

File format (little-endian)::

    b"MATB" | u16 version | u8 key_bits | u8 value_bytes | 32-byte digest | payload
"""

from __future__ import annotations

import hashlib
import json
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np

from memaccel.errors import BudgetExceeded, FormatMismatch, SpecDigestMismatch, TruncatedFile
from memaccel.trellis import CodeSpec
from memaccel.viterbi_ref import METRIC_BITS, acs_group, acs_group_array

MAGIC = b"MATB"
FORMAT_VERSION = 1
HEADER = struct.Struct("<4sHBB32s")
DEFAULT_BUDGET = 1 << 30

_DTYPES = {1: np.dtype("<u1"), 2: np.dtype("<u2"), 4: np.dtype("<u4"), 8: np.dtype("<u8")}


@dataclass(frozen=True)
class TableSpec:
    key_bits: int
    value_bytes: int

    def __post_init__(self):
        if not 0 < self.key_bits <= 32:
            raise ValueError("key_bits must be in 1..32")
        if self.value_bytes not in _DTYPES:
            raise ValueError(f"value_bytes must be one of {sorted(_DTYPES)}")

    @property
    def entry_count(self) -> int:
        return 1 << self.key_bits

    @property
    def total_bytes(self) -> int:
        return self.entry_count * self.value_bytes

    @property
    def dtype(self) -> np.dtype:
        return _DTYPES[self.value_bytes]


@dataclass(frozen=True, eq=False)
class LookupTable:
    spec: TableSpec
    values: np.ndarray
    digest: bytes = bytes(32)
    kind: str = "generic"

    def __post_init__(self):
        if self.values.shape != (self.spec.entry_count,):
            raise ValueError("values do not match the table spec")
        self.values.flags.writeable = False

    def __len__(self):
        return self.spec.entry_count

    def __getitem__(self, key):
        return self.values[key]

    @cached_property
    def scalar(self) -> memoryview:
        """Indexable view returning plain ints, for per-item lookups."""
        return memoryview(self.values)

    def payload(self) -> bytes:
        return self.values.astype(self.spec.dtype, copy=False).tobytes()


def build_table(
    spec: TableSpec,
    oracle: Callable,
    *,
    budget: int = DEFAULT_BUDGET,
    vectorized: bool = False,
    workers: int = 1,
    chunk_bits: int = 16,
    digest: bytes = bytes(32),
    kind: str = "generic",
) -> LookupTable:
    """Fill ``table[k] = oracle(k)`` for every key.

    With ``vectorized=True`` the oracle receives an int64 array of keys and
    returns the matching array of values.  Disjoint key ranges may be filled
    concurrently; the result does not depend on fill order.
    """
    if spec.total_bytes > budget:
        raise BudgetExceeded(f"table needs {spec.total_bytes} B, budget is {budget} B")
    values = np.zeros(spec.entry_count, dtype=spec.dtype)
    step = 1 << min(chunk_bits, spec.key_bits)
    limit = (1 << (8 * spec.value_bytes)) - 1

    def fill(start: int) -> None:
        keys = np.arange(start, start + step, dtype=np.int64)
        if vectorized:
            out = np.asarray(oracle(keys))
        else:
            out = np.fromiter((oracle(int(k)) for k in keys), dtype=np.int64, count=step)
        if out.shape != keys.shape:
            raise ValueError("oracle returned the wrong number of values")
        if out.min(initial=0) < 0 or out.max(initial=0) > limit:
            raise ValueError(f"oracle value does not fit in {spec.value_bytes} bytes")
        values[start:start + step] = out

    starts = range(0, spec.entry_count, step)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            list(pool.map(fill, starts))
    else:
        for s in starts:
            fill(s)
    return LookupTable(spec, values, digest, kind)


# --- digests -------------------------------------------------------------


def _digest(payload: dict) -> bytes:
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).digest()


def acs_digest(code: CodeSpec) -> bytes:
    return _digest({
        "kind": "acs",
        "code": code.as_dict(),
        "metric_bits": METRIC_BITS,
        "saturating": True,
        "tie_break": "lower-index",
        "key_layout": "group|dibit|m(2j),m(2j+h),m(2j+1),m(2j+1+h)",
    })


def minselect_digest() -> bytes:
    return _digest({"kind": "minselect", "metric_bits": METRIC_BITS, "tie_break": "first-wins"})


# --- ACS table -----------------------------------------------------------


def acs_table_spec(code: CodeSpec) -> TableSpec:
    group_bits = code.constraint_length - 3
    return TableSpec(key_bits=group_bits + 2 + 4 * METRIC_BITS, value_bytes=4)


def pack_metrics4(m0: int, m1: int, m2: int, m3: int) -> int:
    return m0 | (m1 << 4) | (m2 << 8) | (m3 << 12)


def unpack_metrics4(packed: int):
    return packed & 15, (packed >> 4) & 15, (packed >> 8) & 15, (packed >> 12) & 15


def acs_key(group: int, dibit: int, metrics4: int) -> int:
    return (group << 18) | (dibit << 16) | metrics4


def pack_acs_value(new4, dec4) -> int:
    return pack_metrics4(*new4) | (dec4[0] << 16) | (dec4[1] << 17) | (dec4[2] << 18) | (dec4[3] << 19)


def acs_oracle(code: CodeSpec) -> Callable[[int], int]:
    """Scalar key -> packed value, straight from the reference ACS."""

    def oracle(key: int) -> int:
        new, dec = acs_group(code, key >> 18, (key >> 16) & 3, unpack_metrics4(key & 0xFFFF))
        return pack_acs_value(new, dec)

    return oracle


def acs_oracle_array(code: CodeSpec) -> Callable[[np.ndarray], np.ndarray]:
    def oracle(keys: np.ndarray) -> np.ndarray:
        m = np.stack([(keys >> s) & 15 for s in (0, 4, 8, 12)], axis=-1)
        new, dec = acs_group_array(code, keys >> 18, (keys >> 16) & 3, m)
        out = new[:, 0] | (new[:, 1] << 4) | (new[:, 2] << 8) | (new[:, 3] << 12)
        for i in range(4):
            out |= dec[:, i] << (16 + i)
        return out

    return oracle


def build_acs_table(code: CodeSpec, *, budget: int = DEFAULT_BUDGET, workers: int = 1) -> LookupTable:
    return build_table(
        acs_table_spec(code),
        acs_oracle_array(code),
        budget=budget,
        vectorized=True,
        workers=workers,
        digest=acs_digest(code),
        kind="acs",
    )


def acs_lookup(table: LookupTable, group: int, dibit: int, metrics4: int):
    """Return ``(new_metrics4, decisions4)`` for one butterfly group."""
    v = table.scalar[(group << 18) | (dibit << 16) | metrics4]
    return v & 0xFFFF, v >> 16


# --- min-select table ----------------------------------------------------

MINSELECT_SPEC = TableSpec(key_bits=4 * METRIC_BITS, value_bytes=1)


def minselect_oracle(key: int) -> int:
    """Packed ``min | argmin << 4`` by linear scan, first index wins."""
    fields = unpack_metrics4(key)
    best = 0
    for i in range(1, 4):
        if fields[i] < fields[best]:
            best = i
    return fields[best] | (best << 4)


def build_minselect_table(*, budget: int = DEFAULT_BUDGET) -> LookupTable:
    return build_table(
        MINSELECT_SPEC, minselect_oracle, budget=budget, digest=minselect_digest(), kind="minselect"
    )


def minselect_lookup(table: LookupTable, metrics4: int):
    """Return ``(argmin, min)`` of the four packed metrics."""
    v = table.scalar[metrics4]
    return v >> 4, v & 15


# --- persistence ---------------------------------------------------------


def save_table(table: LookupTable, path: Union[str, Path]) -> None:
    header = HEADER.pack(MAGIC, FORMAT_VERSION, table.spec.key_bits, table.spec.value_bytes, table.digest)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(table.payload())



def load_table(
    path: Union[str, Path],
    *,
    expected_digest: Optional[bytes] = None,
    kind: str = "generic",
) -> LookupTable:
    data = Path(path).read_bytes()
    if len(data) < HEADER.size:
        raise TruncatedFile(f"{path}: header is {len(data)} of {HEADER.size} bytes")
    magic, version, key_bits, value_bytes, digest = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatMismatch(f"{path}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise FormatMismatch(f"{path}: unsupported version {version}")
    try:
        spec = TableSpec(key_bits, value_bytes)
    except ValueError as exc:
        raise FormatMismatch(f"{path}: {exc}") from None
    body = memoryview(data)[HEADER.size:]
    if len(body) < spec.total_bytes:
        raise TruncatedFile(f"{path}: payload is {len(body)} of {spec.total_bytes} bytes")
    if len(body) > spec.total_bytes:
        raise FormatMismatch(f"{path}: {len(body) - spec.total_bytes} trailing bytes")
    if expected_digest is not None and digest != expected_digest:
        raise SpecDigestMismatch(f"{path}: table digest {digest.hex()[:16]}... does not match")
    values = np.frombuffer(body, dtype=spec.dtype).astype(spec.dtype.newbyteorder("="))
    return LookupTable(spec, values, digest, kind)


def load_acs_table(path: Union[str, Path], code: CodeSpec) -> LookupTable:
    return load_table(path, expected_digest=acs_digest(code), kind="acs")


def load_minselect_table(path: Union[str, Path]) -> LookupTable:
    return load_table(path, expected_digest=minselect_digest(), kind="minselect")
