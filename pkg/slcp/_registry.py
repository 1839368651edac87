import importlib
import inspect
import pkgutil
from dataclasses import dataclass
from functools import lru_cache
from types import ModuleType
from typing import TYPE_CHECKING, Callable, Dict, Iterable, List, Optional, Set

from ._exceptions import UnknownBenchmarkError

if TYPE_CHECKING:  # pragma: no cover
    from .problems import BenchmarkDef


@dataclass(frozen=True)
class BenchmarkInfo:
    id: str
    builder: Callable[[], "BenchmarkDef"]
    description: str = ""
    order: int = 0


def benchmark(id: str, *, description: str = "", order: int = 0):
    """
    Registers a builder function under a benchmark id.

    Builders are discovered by :func:`benchmark_scan`; they take no arguments
    and return a :class:`BenchmarkDef`.
    """

    def wrap_builder(fn):
        fn._benchmark_info = BenchmarkInfo(id, fn, description or (fn.__doc__ or "").strip(), order)
        return fn

    return wrap_builder


def get_benchmark_info(fn) -> Optional[BenchmarkInfo]:
    return getattr(fn, "_benchmark_info", None)


class FunctionScanner:
    def __init__(self, root_module):
        if not inspect.ismodule(root_module):
            raise TypeError(f"Expected a module, got {type(root_module)}")
        self.root_module = root_module

    def _get_functions(self) -> Iterable[Callable]:
        for _, fn in inspect.getmembers(self.root_module, inspect.isfunction):
            if fn.__module__ == self.root_module.__name__:
                yield fn

        path = getattr(self.root_module, "__path__", [])
        prefix = self.root_module.__name__ + "."

        for _, modname, _ in pkgutil.walk_packages(path, prefix):
            sub_module = importlib.import_module(modname)
            for _, fn in inspect.getmembers(sub_module, inspect.isfunction):
                if fn.__module__ == sub_module.__name__:
                    yield fn

    def get_functions(self) -> Iterable[Callable]:
        seen: Set[str] = set()
        for fn in self._get_functions():
            key = f"{fn.__module__}.{fn.__qualname__}"
            if key not in seen:
                seen.add(key)
                yield fn


def benchmark_scan(root_module: ModuleType) -> List[BenchmarkInfo]:
    scanner = FunctionScanner(root_module)
    infos = (get_benchmark_info(fn) for fn in scanner.get_functions())
    return sorted((i for i in infos if i is not None), key=lambda i: (i.order, i.id))


@lru_cache(maxsize=None)
def _registry() -> Dict[str, BenchmarkInfo]:
    from . import problems

    registry: Dict[str, BenchmarkInfo] = {}
    for info in benchmark_scan(problems):
        if info.id in registry:
            raise ValueError(f"Benchmark id '{info.id}' registered twice")
        registry[info.id] = info
    return registry


def benchmark_ids() -> List[str]:
    return list(_registry())


def benchmark_description(id: str) -> str:
    return _lookup(id).description


def _lookup(id: str) -> BenchmarkInfo:
    registry = _registry()
    try:
        return registry[id]
    except KeyError:
        raise UnknownBenchmarkError(
            f"Unknown benchmark '{id}', expected one of: {', '.join(registry)}"
        )


@lru_cache(maxsize=None)
def get_benchmark(id: str) -> "BenchmarkDef":
    """
    Builds the benchmark once per process.

    :raises UnknownBenchmarkError: listing the registered ids if ``id`` is unknown.
    """
    return _lookup(id).builder()
