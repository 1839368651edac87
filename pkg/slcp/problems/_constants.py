"""
Loader for the ``name = value  # citation`` constants files shipped with each benchmark.

Keys prefixed with ``start.`` form the nominal design point of the benchmark.
"""
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Mapping, Union

from .._exceptions import ConstantsError

DATA_DIR = Path(__file__).parent / "data"
START_PREFIX = "start."


@dataclass(frozen=True)
class Constants(Mapping[str, float]):
    path: Path
    values: Dict[str, float]
    start: Dict[str, float] = field(default_factory=dict)

    def __getitem__(self, key: str) -> float:
        try:
            return self.values[key]
        except KeyError:
            raise ConstantsError(f"Constant '{key}' is not defined in {self.path.name}")

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)


def parse_constants(text: str, source: str = "<string>") -> Dict[str, float]:
    values: Dict[str, float] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        name, sep, value = line.partition("=")
        name, value = name.strip(), value.strip()
        if not sep or not name or not value:
            raise ConstantsError(f"{source}:{number}: expected 'name = value', got {raw.strip()!r}")
        try:
            parsed = float(value)
        except ValueError:
            raise ConstantsError(f"{source}:{number}: value {value!r} of '{name}' is not a number")
        if not math.isfinite(parsed):
            raise ConstantsError(f"{source}:{number}: value of '{name}' is not finite")
        if name in values:
            raise ConstantsError(f"{source}:{number}: '{name}' is defined twice")
        values[name] = parsed
    return values


def load_constants(
    name_or_path: Union[str, Path], required: Iterable[str] = ()
) -> Constants:
    """
    Reads a constants file from the package data directory (or an explicit path).

    :param name_or_path: A file stem such as ``"hoburg"`` or a path.
    :param required: Keys that must be present.
    :raises ConstantsError: if the file is missing, malformed or lacks required keys.
    """
    path = Path(name_or_path)
    if path.suffix != ".txt":
        path = DATA_DIR / f"{name_or_path}.txt"
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConstantsError(f"Cannot read constants file {path}") from e
    parsed = parse_constants(text, path.name)
    values = {k: v for k, v in parsed.items() if not k.startswith(START_PREFIX)}
    start = {k[len(START_PREFIX) :]: v for k, v in parsed.items() if k.startswith(START_PREFIX)}
    missing = sorted(set(required) - set(values))
    if missing:
        raise ConstantsError(f"Constants file {path.name} is missing keys: {', '.join(missing)}")
    return Constants(path, values, start)
