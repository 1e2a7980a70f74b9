"""
Partition text files.

One block per line: "<label> <spec>", where spec is a comma-separated list
of 0-based indices and/or half-open ranges "a:b". Blank lines and lines
starting with "#" are ignored.

    u 0:100
    p 100:130
"""

import os
from typing import List, Optional, Tuple, Union

from blockminres.core.exceptions import ParseError
from blockminres.core.partition import BlockPartition
from blockminres.utils.logging_config import get_logger

logger = get_logger("io.partition")

PathLike = Union[str, os.PathLike]


def _parse_spec(spec: str, path: Optional[str], number: int) -> List[int]:
    indices: List[int] = []
    for item in spec.split(","):
        item = item.strip()
        if not item:
            raise ParseError(f"empty item in index list '{spec}'", path, number)
        try:
            if ":" in item:
                start, stop = (int(t) for t in item.split(":", 1))
            else:
                start = int(item)
                stop = start + 1
        except ValueError:
            raise ParseError(f"invalid index item '{item}'", path, number) from None
        if stop < start:
            raise ParseError(f"range '{item}' is reversed", path, number)
        indices.extend(range(start, stop))
    return indices


def parse_partition(text: str, path: Optional[str] = None, n: Optional[int] = None) -> BlockPartition:
    """
    Parse partition text.

    Args:
        text: File contents.
        path: File name used in error messages.
        n: Expected dimension, inferred when None.

    Raises:
        ParseError: On malformed lines.
        PartitionError: If the blocks overlap, leave gaps or exceed n.
    """
    blocks: List[Tuple[str, List[int]]] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split(None, 1)
        if len(fields) != 2:
            raise ParseError(f"expected '<label> <indices>', got '{line}'", path, number)
        label, spec = fields
        blocks.append((label, _parse_spec(spec.replace(" ", ""), path, number)))
    if not blocks:
        raise ParseError("no blocks defined", path)
    return BlockPartition(blocks, n=n)


def read_partition(path: PathLike, n: Optional[int] = None) -> BlockPartition:
    """Read a partition file."""
    path = os.fspath(path)
    with open(path, "r", encoding="utf-8") as f:
        part = parse_partition(f.read(), path, n)
    logger.info(f"Read partition {path}: {part}")
    return part


def write_partition(path: PathLike, part: BlockPartition) -> None:
    path = os.fspath(path)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(part.to_text())
    logger.debug(f"Wrote partition {path}")
