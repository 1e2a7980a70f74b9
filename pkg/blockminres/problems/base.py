"""
Problem generator interface and registry.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
import importlib
import inspect
import pkgutil
from typing import Any, Dict, List, Optional, Type

import numpy as np

from blockminres.core.exceptions import InputError
from blockminres.core.operator import SaddleOperator
from blockminres.core.partition import BlockPartition
from blockminres.core.preconditioner import BlockDiagPreconditioner
from blockminres.utils.logging_config import get_logger

logger = get_logger("problems")


@dataclass
class GeneratedProblem:
    """
    A saddle-point test system with its named preconditioners.

    Attributes:
        operator: K with explicit blocks.
        rhs: Right-hand side f.
        partition: u/p partition matching the blocks of K.
        preconditioners: Named preconditioners; "P1" is always the identity.
        metadata: Generator name, parameters and seed.
    """

    operator: SaddleOperator
    rhs: np.ndarray = field(repr=False)
    partition: BlockPartition
    preconditioners: Dict[str, BlockDiagPreconditioner]
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.operator.n

    def preconditioner(self, name: str) -> BlockDiagPreconditioner:
        if name not in self.preconditioners:
            raise InputError(
                f"unknown preconditioner '{name}', available: {', '.join(self.preconditioners)}"
            )
        return self.preconditioners[name]


class ProblemGenerator(ABC):
    """
    Abstract base class for problem generators.

    Subclasses set name, description and parameters (name -> default) and
    implement generate.
    """

    name = "base_generator"
    description = "Base class for all problem generators"
    parameters: Dict[str, Any] = {}

    def __init__(self, **kwargs):
        """
        Args:
            **kwargs: Defaults overriding the class-level parameters
                (for example values taken from the configuration).
        """
        self.config = kwargs

    @abstractmethod
    def generate(self, **kwargs) -> GeneratedProblem:
        """
        Build a problem.

        Args:
            **kwargs: Generator parameters; missing ones take their defaults.

        Returns:
            The generated problem.
        """

    def resolve_parameters(self, **kwargs) -> Dict[str, Any]:
        """Merge class defaults, instance config and call arguments (None ignored)."""
        unknown = set(kwargs) - set(self.parameters)
        if unknown:
            raise InputError(f"generator '{self.name}' has no parameter(s): {', '.join(sorted(unknown))}")
        params = dict(self.parameters)
        params.update({k: v for k, v in self.config.items() if k in self.parameters})
        params.update({k: v for k, v in kwargs.items() if v is not None})
        return params

    def validate_input(self, **kwargs) -> bool:
        """
        Check parameters without generating.

        Returns:
            True if the parameters are valid, False otherwise.
        """
        try:
            self.resolve_parameters(**kwargs)
            return True
        except InputError:
            return False

    def get_schema(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "description": self.description,
            "parameters": dict(self.parameters),
        }


class ProblemCollection:
    """
    Registry of problem generators with discovery.
    """

    def __init__(self):
        self.generators: Dict[str, ProblemGenerator] = {}
        self.generator_classes: Dict[str, Type[ProblemGenerator]] = {}

    def register_generator(self, generator: ProblemGenerator) -> None:
        self.generators[generator.name] = generator
        logger.debug(f"Registered generator: {generator.name}")

    def register_generator_class(self, generator_class: Type[ProblemGenerator]) -> None:
        name = getattr(generator_class, "name", generator_class.__name__.lower())
        self.generator_classes[name] = generator_class
        logger.debug(f"Registered generator class: {name}")

    def get_generator(self, name: str) -> Optional[ProblemGenerator]:
        """
        Get a generator by name, instantiating its class on first use.

        Returns:
            The generator, or None if no generator has that name.
        """
        if name in self.generators:
            return self.generators[name]
        if name in self.generator_classes:
            generator = self.generator_classes[name]()
            self.register_generator(generator)
            return generator
        return None

    def generate(self, name: str, **kwargs) -> GeneratedProblem:
        """
        Run a generator by name.

        Raises:
            InputError: For an unknown generator or invalid parameters.
        """
        generator = self.get_generator(name)
        if generator is None:
            raise InputError(f"unknown generator '{name}', available: {', '.join(self.names())}")
        problem = generator.generate(**kwargs)
        logger.info(
            f"Generated {name}: n={problem.n}, blocks="
            + ", ".join(f"{l}[{s}]" for l, s in zip(problem.partition.labels, problem.partition.sizes))
        )
        return problem

    def names(self) -> List[str]:
        return sorted(set(self.generators) | set(self.generator_classes))

    def list_generators(self) -> List[Dict[str, Any]]:
        """Name, description and parameter defaults of every generator."""
        info = []
        for name in self.names():
            source = self.generators.get(name) or self.generator_classes[name]
            info.append({
                "name": name,
                "description": getattr(source, "description", "No description available"),
                "parameters": dict(getattr(source, "parameters", {})),
            })
        return info

    def discover_generators(self, package_name: str = "blockminres.problems") -> int:
        """
        Register every ProblemGenerator subclass found in a package.

        Returns:
            The number of generator classes registered.
        """
        count = 0
        package = importlib.import_module(package_name)
        for _, module_name, is_pkg in pkgutil.iter_modules(package.__path__, package.__name__ + "."):
            if is_pkg:
                count += self.discover_generators(module_name)
                continue
            module = importlib.import_module(module_name)
            for attr_name in dir(module):
                attr = getattr(module, attr_name)
                if (
                    inspect.isclass(attr)
                    and issubclass(attr, ProblemGenerator)
                    and not inspect.isabstract(attr)
                    and attr.__module__ == module.__name__
                ):
                    self.register_generator_class(attr)
                    count += 1
        return count


def default_collection() -> ProblemCollection:
    """A collection holding every generator shipped with blockminres."""
    collection = ProblemCollection()
    collection.discover_generators()
    return collection
