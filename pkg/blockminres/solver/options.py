"""
Solver options.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from blockminres.core.exceptions import InputError
from blockminres.core.partition import BlockPartition


@dataclass
class SolverOptions:
    """
    Options for the monitored MINRES solver.

    Attributes:
        rel_tol: Stop when |eta_j| / |eta_0| <= rel_tol.
        max_iter: Iteration cap.
        per_block_tol: Optional absolute tolerances, one per partition block;
            the solver also stops once every |eta_{j,b}| <= per_block_tol[b].
        monitor: Track the per-block residual norms.
        store_residual_history: Keep every iterate x^(j) for the oracle.
        breakdown_tol: Lucky breakdown when gamma_{j+1} <= breakdown_tol * gamma_1.
    """

    rel_tol: float = 1e-6
    max_iter: int = 1000
    per_block_tol: Optional[List[float]] = None
    monitor: bool = True
    store_residual_history: bool = False
    breakdown_tol: float = 1e-14

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise InputError(f"rel_tol must be positive, got {self.rel_tol}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise InputError(f"max_iter must be an integer >= 1, got {self.max_iter}")
        self.max_iter = int(self.max_iter)
        if self.breakdown_tol < 0:
            raise InputError(f"breakdown_tol must be non-negative, got {self.breakdown_tol}")
        if self.per_block_tol is not None:
            self.per_block_tol = [float(t) for t in self.per_block_tol]
            if any(not t >= 0 for t in self.per_block_tol):
                raise InputError(f"per_block_tol entries must be non-negative, got {self.per_block_tol}")
            if not self.monitor:
                raise InputError("per_block_tol requires monitor=True")

    def validate_for(self, part: BlockPartition) -> None:
        """Check the options against a partition."""
        if self.per_block_tol is not None and len(self.per_block_tol) != len(part):
            raise InputError(
                f"per_block_tol has {len(self.per_block_tol)} entries, partition has {len(part)} blocks"
            )

    @classmethod
    def from_config(cls, config: Dict[str, Any], **overrides) -> "SolverOptions":
        """
        Build options from the "solver" section of the configuration.

        Args:
            config: Full configuration dictionary (see blockminres.config).
            **overrides: Values that win over the config, None values ignored.
        """
        section = dict(config.get("solver", {}))
        values = {
            "rel_tol": float(section.get("rel_tol", 1e-6)),
            "max_iter": int(section.get("max_iter", 1000)),
            "breakdown_tol": float(section.get("breakdown_tol", 1e-14)),
            "monitor": bool(section.get("monitor", True)),
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "rel_tol": self.rel_tol,
            "max_iter": self.max_iter,
            "per_block_tol": list(self.per_block_tol) if self.per_block_tol is not None else None,
            "monitor": self.monitor,
            "store_residual_history": self.store_residual_history,
            "breakdown_tol": self.breakdown_tol,
        }
