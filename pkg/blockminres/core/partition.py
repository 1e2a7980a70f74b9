"""
Block partitions of the unknowns.

A partition is an ordered list of labelled, disjoint index sets covering
0..n-1. Index sets need not be contiguous; contiguous ones are stored as a
slice so gathers become views.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from blockminres.core.exceptions import InputError, PartitionError
from blockminres.core.vectors import as_vector
from blockminres.utils.logging_config import get_logger

logger = get_logger("core.partition")

IndexSpec = Union[Sequence[int], np.ndarray, range, slice]


@dataclass(frozen=True, eq=False)
class Block:
    """One labelled index set of a partition."""

    label: str
    indices: np.ndarray  # sorted, read-only int64
    span: Optional[slice] = field(default=None)  # set when indices are contiguous

    @property
    def size(self) -> int:
        return int(self.indices.shape[0])

    @property
    def selector(self) -> Union[slice, np.ndarray]:
        """Object usable as x[selector] to gather this block."""
        return self.span if self.span is not None else self.indices

    def take(self, x: np.ndarray) -> np.ndarray:
        return x[self.selector]

    def describe(self) -> str:
        """Compact text form, e.g. "0:100" or "0,2,5"."""
        if self.span is not None and self.size > 1:
            return f"{self.span.start}:{self.span.stop}"
        return ",".join(str(i) for i in self.indices)


def _make_block(label: str, spec: IndexSpec, n: Optional[int]) -> Block:
    if isinstance(spec, slice):
        if n is None and spec.stop is None:
            raise InputError(f"block '{label}': open slice needs the dimension n")
        spec = range(*spec.indices(n if n is not None else spec.stop))

    indices = np.asarray(list(spec) if isinstance(spec, range) else spec)
    if indices.ndim != 1:
        raise InputError(f"block '{label}': index set must be one-dimensional")
    if indices.size and not np.issubdtype(indices.dtype, np.integer):
        rounded = np.rint(indices)
        if not np.array_equal(rounded, indices):
            raise InputError(f"block '{label}': indices must be integers")
        indices = rounded
    indices = np.sort(indices.astype(np.int64))

    span = None
    if indices.size and indices[-1] - indices[0] + 1 == indices.size:
        span = slice(int(indices[0]), int(indices[-1]) + 1)

    indices.setflags(write=False)
    return Block(label=str(label), indices=indices, span=span)


class BlockPartition:
    """
    Ordered, disjoint and covering partition of {0, ..., n-1}.

    Immutable after construction; safe to share between threads.
    """

    def __init__(self, blocks: Sequence[Tuple[str, IndexSpec]], n: Optional[int] = None):
        """
        Build and validate a partition.

        Args:
            blocks: Ordered (label, index set) pairs. Index sets may be lists,
                arrays, ranges or slices.
            n: Total dimension. Inferred as 1 + largest index when None.

        Raises:
            InputError: On duplicate labels or empty blocks.
            PartitionError: On overlapping indices, gaps or out-of-range indices.
        """
        if not blocks:
            raise InputError("a partition needs at least one block")

        built: List[Block] = []
        seen_labels = set()
        for label, spec in blocks:
            block = _make_block(label, spec, n)
            if block.label in seen_labels:
                raise InputError(f"duplicate block label '{block.label}'")
            if block.size == 0:
                raise InputError(f"block '{block.label}' is empty")
            seen_labels.add(block.label)
            built.append(block)

        all_indices = np.concatenate([b.indices for b in built])
        if all_indices.min() < 0:
            negative = sorted(set(all_indices[all_indices < 0].tolist()))
            raise PartitionError(f"negative indices in partition: {negative}", negative)

        if n is None:
            n = int(all_indices.max()) + 1
        elif all_indices.max() >= n:
            outside = sorted(set(all_indices[all_indices >= n].tolist()))
            raise PartitionError(f"indices outside 0..{n - 1}: {_preview(outside)}", outside)

        counts = np.bincount(all_indices, minlength=n)
        overlap = np.flatnonzero(counts > 1)
        if overlap.size:
            raise PartitionError(
                f"blocks overlap at index {_preview(overlap.tolist())}", overlap.tolist()
            )
        gaps = np.flatnonzero(counts == 0)
        if gaps.size:
            raise PartitionError(
                f"indices not covered by any block: {_preview(gaps.tolist())}", gaps.tolist()
            )

        self._blocks: Tuple[Block, ...] = tuple(built)
        self._n = int(n)
        self._by_label: Dict[str, int] = {b.label: i for i, b in enumerate(built)}

        logger.debug(f"Partition built: {self}")

    @classmethod
    def from_sizes(cls, sizes: Sequence[Tuple[str, int]]) -> "BlockPartition":
        """
        Contiguous partition from (label, size) pairs in order.

        Example:
            BlockPartition.from_sizes([("u", 100), ("p", 30)])
        """
        blocks = []
        start = 0
        for label, size in sizes:
            blocks.append((label, range(start, start + int(size))))
            start += int(size)
        return cls(blocks, n=start)

    @property
    def n(self) -> int:
        return self._n

    @property
    def blocks(self) -> Tuple[Block, ...]:
        return self._blocks

    @property
    def labels(self) -> List[str]:
        return [b.label for b in self._blocks]

    @property
    def sizes(self) -> List[int]:
        return [b.size for b in self._blocks]

    def __len__(self) -> int:
        return len(self._blocks)

    def __iter__(self) -> Iterator[Block]:
        return iter(self._blocks)

    def __getitem__(self, key: Union[int, str]) -> Block:
        if isinstance(key, str):
            return self._blocks[self._by_label[key]]
        return self._blocks[key]

    def __repr__(self) -> str:
        parts = ", ".join(f"{b.label}[{b.size}]" for b in self._blocks)
        return f"BlockPartition(n={self._n}: {parts})"

    def split(self, x: np.ndarray) -> List[np.ndarray]:
        """Gather the block subvectors of x, in partition order."""
        self._check(x, "x")
        return [b.take(x) for b in self._blocks]

    def assemble(self, parts: Sequence[np.ndarray]) -> np.ndarray:
        """Scatter block subvectors back into a full vector."""
        if len(parts) != len(self._blocks):
            raise InputError(f"expected {len(self._blocks)} subvectors, got {len(parts)}")
        x = np.empty(self._n, dtype=np.float64)
        for block, part in zip(self._blocks, parts):
            part = np.asarray(part, dtype=np.float64)
            if part.shape != (block.size,):
                raise InputError(
                    f"subvector for block '{block.label}' has shape {part.shape}, expected ({block.size},)"
                )
            x[block.selector] = part
        return x

    def inner(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Per-block inner products <x_b, y_b>."""
        return np.array([np.dot(b.take(x), b.take(y)) for b in self._blocks])

    def to_text(self) -> str:
        """Serialize in the partition file format (one "<label> <spec>" per line)."""
        return "".join(f"{b.label} {b.describe()}\n" for b in self._blocks)

    def _check(self, x: np.ndarray, name: str) -> None:
        if x.shape != (self._n,):
            raise InputError(f"{name} has shape {x.shape}, partition expects ({self._n},)")


def partitioned_inner(part: BlockPartition, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """
    Per-block inner products; the entries sum to <x, y>.

    Args:
        part: Partition of the unknowns.
        x: First vector, dimension part.n.
        y: Second vector, dimension part.n.

    Returns:
        Array with <x_b, y_b> for each block b, in partition order.

    Raises:
        InputError: On dimension mismatch.
    """
    x = as_vector(x, part.n, "x")
    y = as_vector(y, part.n, "y")
    return part.inner(x, y)


def _preview(values: List[int], limit: int = 10) -> str:
    shown = ", ".join(str(v) for v in values[:limit])
    if len(values) > limit:
        shown += f", ... ({len(values)} total)"
    return shown
