"""JSON fractal configurations.

Rationals are written as ``"num/den"`` strings.  Floats are only accepted
for Cartesian vertices (used for drawing and distances) or in tolerance
mode.
"""

from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
import json
from pathlib import Path

from .adjacency import EquivalenceRules, WordSpace
from .chain import MarkovChain, MassDistribution, MassError
from .ifs import DEFAULT_TOLERANCE, IFS, IfsError, Similitude, validate
from .words import InvalidWord, parse_word


class ConfigError(ValueError):
    pass


@dataclass
class FractalConfig:
    name: str
    ifs: IFS
    rules: EquivalenceRules
    masses: MassDistribution
    renderable: bool = True

    def space(self) -> WordSpace:
        return WordSpace(self.ifs, self.rules)

    def chain(self, space: WordSpace = None) -> MarkovChain:
        return MarkovChain(space or self.space(), self.masses)


def fixture_names() -> list:
    return sorted(p.name[:-5] for p in resources.files("fractal_martin.fixtures").iterdir() if p.name.endswith(".json"))


def fixture_path(name: str) -> Path:
    return Path(str(resources.files("fractal_martin.fixtures").joinpath(f"{name}.json")))


def load(source, preset: str = None) -> FractalConfig:
    """Load a config from a path, a fixture name, or an already parsed dict.

    ``"gasket-2d:uniform"`` selects a mass preset of a fixture; ``preset``
    does the same for any source.
    """
    if isinstance(source, dict):
        return parse(source, preset)
    path = Path(source)
    text = str(source)
    if not path.exists():
        name, _, tail = text.partition(":")
        if name in fixture_names():
            path = fixture_path(name)
            preset = preset or tail or None
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {source}: {exc}") from None
    return parse(doc, preset)


def _scalar(x, exact, what):
    if isinstance(x, bool):
        raise ConfigError(f"{what}: expected a number, got {x!r}")
    if exact:
        if isinstance(x, float):
            raise ConfigError(f"{what}: floats are not allowed in exact mode, write \"num/den\"")
        try:
            return Fraction(x)
        except (ValueError, TypeError):
            raise ConfigError(f"{what}: cannot parse {x!r} as a rational") from None
    try:
        return float(Fraction(x)) if isinstance(x, str) else float(x)
    except (ValueError, TypeError):
        raise ConfigError(f"{what}: cannot parse {x!r}") from None


def _vector(xs, exact, what):
    if not isinstance(xs, (list, tuple)):
        raise ConfigError(f"{what}: expected a list")
    return tuple(_scalar(x, exact, what) for x in xs)


def _cartesian(x):
    # Cartesian vertices may be irrational; keep exact values when given as rationals
    if isinstance(x, float):
        return x
    return Fraction(x)


def _map(entry, k, n, dim, coords, vertices, exact):
    what = f"maps[{k}]"
    one = Fraction(1) if exact else 1.0
    if not isinstance(entry, dict):
        raise ConfigError(f"{what}: expected an object")
    if "fixed_vertex" in entry or "fixed_point" in entry:
        if "ratio" not in entry:
            raise ConfigError(f"{what}: ratio required with a fixed point")
        r = _scalar(entry["ratio"], exact, what)
        if "fixed_vertex" in entry:
            i = int(entry["fixed_vertex"]) - 1
            if coords == "barycentric":
                q = tuple(one if j == i else one - one for j in range(dim))
            else:
                if vertices is None or not 0 <= i < len(vertices):
                    raise ConfigError(f"{what}: fixed_vertex needs declared vertices")
                q = _vector(vertices[i], exact, what)
        else:
            q = _vector(entry["fixed_point"], exact, what)
        if len(q) != dim:
            raise ConfigError(f"{what}: fixed point has wrong dimension")
        return Similitude.homothety(r, q)
    if "matrix" in entry:
        mat = tuple(_vector(row, exact, what) for row in entry["matrix"])
        if coords == "barycentric":
            # rows are the barycentric images of the simplex vertices
            lin = tuple(zip(*mat))
            t = tuple(one - one for _ in range(dim))
        else:
            lin = mat
            t = _vector(entry.get("translation", [0] * dim), exact, what)
        if "ratio" in entry:
            r = _scalar(entry["ratio"], exact, what)
        elif coords == "cartesian":
            r = _sqrt(sum(row[0] * row[0] for row in lin), exact)
        else:
            raise ConfigError(f"{what}: ratio required for barycentric matrices")
        if len(lin) != dim or any(len(row) != dim for row in lin):
            raise ConfigError(f"{what}: matrix must be {dim}x{dim}")
        return Similitude(lin, t, r)
    raise ConfigError(f"{what}: need ratio+fixed_point, ratio+fixed_vertex, or matrix")


def _sqrt(c2, exact):
    if exact:
        n, d = c2.numerator, c2.denominator
        rn, rd = round(n**0.5), round(d**0.5)
        if rn * rn == n and rd * rd == d:
            return Fraction(rn, rd)
        raise ConfigError("contraction ratio is irrational; give \"ratio\" or use tolerance mode")
    return float(c2) ** 0.5


def _rules(entry, n):
    if entry in (None, "geometric"):
        return EquivalenceRules()
    if isinstance(entry, str):
        raise ConfigError(f"unknown equivalence {entry!r}")
    if not isinstance(entry, dict):
        raise ConfigError("equivalence must be \"geometric\" or an object")
    pairs = []
    try:
        for a, b in entry.get("rules", []):
            pairs.append((parse_word(a, n), parse_word(b, n)))
    except (InvalidWord, ValueError, TypeError) as exc:
        raise ConfigError(f"bad rule: {exc}") from None
    mode = entry.get("mode", "geometric-plus-rules" if pairs else "geometric")
    try:
        return EquivalenceRules(mode=mode, contact=int(entry.get("contact", 0)), rules=tuple(pairs))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def parse(doc: dict, preset: str = None) -> FractalConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    mass_list = doc.get("masses")
    if preset is not None:
        presets = doc.get("mass_presets") or {}
        if preset not in presets:
            raise ConfigError(f"unknown mass preset {preset!r}; known: {', '.join(sorted(presets)) or 'none'}")
        mass_list = presets[preset]
    arith = doc.get("arithmetic", "exact")
    if arith == "exact":
        tol = None
    elif isinstance(arith, dict) and "tolerance" in arith:
        tol = float(arith["tolerance"] or DEFAULT_TOLERANCE)
    else:
        raise ConfigError("arithmetic must be \"exact\" or {\"tolerance\": eps}")
    exact = tol is None
    coords = doc.get("coordinates", "cartesian")
    try:
        map_list = doc["maps"]
    except KeyError:
        raise ConfigError("config has no maps") from None
    n = int(doc.get("N", len(map_list)))
    if len(map_list) != n:
        raise ConfigError(f"N={n} but {len(map_list)} maps given")
    vertices = doc.get("vertices")
    if coords == "barycentric":
        if vertices is None:
            raise ConfigError("barycentric mode needs vertices")
        dim = len(vertices)
    else:
        dim = int(doc.get("dimension", len(vertices[0]) if vertices else 0))
        if dim <= 0:
            raise ConfigError("dimension missing")
    if "dimension" in doc and vertices and int(doc["dimension"]) != len(vertices[0]):
        raise ConfigError("dimension does not match the vertices")
    maps = tuple(_map(s, k, n, dim, coords, vertices, exact) for k, s in enumerate(map_list))
    cart_vertices = tuple(tuple(_cartesian(c) for c in v) for v in vertices) if vertices else None
    open_set = doc.get("open_set")
    if open_set is not None:
        open_set = tuple(_vector(p, exact, "open_set") for p in open_set)
    box = doc.get("box")
    if box is not None:
        box = (_vector(box[0], exact, "box"), _vector(box[1], exact, "box"))
    try:
        ifs = IFS(
            maps,
            coordinates=coords,
            vertices=cart_vertices,
            open_set=open_set,
            tolerance=tol,
            intersection=doc.get("intersection", "vertices"),
            box=box,
            name=doc.get("name", "fractal"),
        )
        validate(ifs)
    except IfsError as exc:
        raise ConfigError(str(exc)) from None
    try:
        if mass_list is not None and any(isinstance(m, float) for m in mass_list) and exact:
            raise ConfigError("masses: floats are not allowed in exact mode, write \"num/den\"")
        masses = MassDistribution(mass_list or [Fraction(1, n)] * n)
    except (MassError, ValueError, TypeError, ZeroDivisionError) as exc:
        raise ConfigError(str(exc)) from None
    if masses.n_letters != n:
        raise ConfigError("one mass per map required")
    rules = _rules(doc.get("equivalence"), n)
    renderable = bool(doc.get("render", True)) and (dim - (coords == "barycentric")) == 2
    return FractalConfig(doc.get("name", "fractal"), ifs, rules, masses, renderable)
