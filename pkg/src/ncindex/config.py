"""TOML model configuration.

Spatial directions are numbered from 1 in configuration files and on the
command line, and from 0 in the library.  A minimal Hofstadter file::

    name = "hofstadter"

    [model]
    d = 2
    q = 1
    hoppings = [
        { r = [1, 0], amplitude = [[1.0]] },
        { r = [0, 1], amplitude = [[1.0]] },
    ]

    [flux]
    matrix = [["0", "1/3"], ["-1/3", "0"]]

    [geometry]
    L = [24, 24]

    [run]
    mu = -1.2
    dirs = [1, 2]

Complex matrix entries are numbers or strings such as ``"0.5-1j"``.  Flux
entries must be integers or rational strings; floats are rejected so the
flux stays exact.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from .boundary import CylinderGeometry
from .errors import ConfigError, ValidationError
from .lattice import DisorderLaw, ModelSpec, TorusGeometry, TwistCocycle

SECTIONS = {"name", "model", "flux", "geometry", "disorder", "run", "cylinder"}


@dataclass
class RunConfig:
    spec: ModelSpec
    twist: TwistCocycle
    geometry: Optional[TorusGeometry]
    cylinder: Optional[CylinderGeometry]
    seed: Optional[int]
    run: dict = field(default_factory=dict)
    digest: str = ""
    source: str = ""


def _require(table, key, path, kind=None):
    if key not in table:
        raise ConfigError("missing required key", f"{path}.{key}" if path else key)
    val = table[key]
    if kind is not None and not isinstance(val, kind):
        raise ConfigError(f"expected {_kind_name(kind)}, got {type(val).__name__}",
                          f"{path}.{key}" if path else key)
    return val


def _kind_name(kind):
    if isinstance(kind, tuple):
        return " or ".join(k.__name__ for k in kind)
    return kind.__name__


def _check_keys(table, allowed, path):
    for key in table:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r}", f"{path}.{key}" if path else key)


def _int(val, path):
    if isinstance(val, bool) or not isinstance(val, int):
        raise ConfigError(f"expected an integer, got {val!r}", path)
    return val


def _complex(val, path) -> complex:
    if isinstance(val, bool):
        raise ConfigError(f"expected a number, got {val!r}", path)
    if isinstance(val, (int, float)):
        return complex(val)
    if isinstance(val, str):
        try:
            return complex(val.replace(" ", ""))
        except ValueError:
            pass
    raise ConfigError(f"cannot read {val!r} as a complex number", path)


def _matrix(val, n, path) -> np.ndarray:
    if not isinstance(val, list) or len(val) != n or any(not isinstance(r, list) or len(r) != n for r in val):
        raise ConfigError(f"expected a {n} x {n} matrix", path)
    return np.array([[_complex(x, f"{path}[{i}][{j}]") for j, x in enumerate(row)]
                     for i, row in enumerate(val)])


def _rational(val, path) -> Fraction:
    if isinstance(val, bool) or isinstance(val, float):
        raise ConfigError(f"flux must be an integer or a rational string like \"1/3\", got {val!r}", path)
    if isinstance(val, int):
        return Fraction(val)
    if isinstance(val, str):
        try:
            return Fraction(val.strip())
        except (ValueError, ZeroDivisionError):
            pass
    raise ConfigError(f"cannot read {val!r} as a rational number", path)


def _int_list(val, n, path, minimum=None):
    if not isinstance(val, list) or (n is not None and len(val) != n):
        raise ConfigError(f"expected a list of {n} integers" if n else "expected a list of integers", path)
    out = [_int(x, f"{path}[{i}]") for i, x in enumerate(val)]
    if minimum is not None:
        for i, x in enumerate(out):
            if x < minimum:
                raise ConfigError(f"must be at least {minimum}, got {x}", f"{path}[{i}]")
    return out


def parse_directions(val, d, path="dirs") -> tuple:
    """1-based direction list (or comma string) to a 0-based tuple."""
    if isinstance(val, str):
        items = [s for s in val.replace(" ", "").split(",") if s]
        try:
            val = [int(s) for s in items]
        except ValueError:
            raise ConfigError(f"cannot read directions {val!r}", path) from None
    dirs = _int_list(val, None, path)
    for i, j in enumerate(dirs):
        if not 1 <= j <= d:
            raise ConfigError(f"direction {j} out of range 1..{d}", f"{path}[{i}]")
    return tuple(j - 1 for j in dirs)


def _model(tab, disorder) -> ModelSpec:
    _check_keys(tab, {"d", "q", "hoppings", "onsite", "chiral_grading"}, "model")
    d = _int(_require(tab, "d", "model"), "model.d")
    q = _int(_require(tab, "q", "model"), "model.q")
    if d < 1 or q < 1:
        raise ConfigError("d and q must be positive", "model")
    hops = []
    for n, h in enumerate(tab.get("hoppings", [])):
        path = f"model.hoppings[{n}]"
        if not isinstance(h, dict):
            raise ConfigError("expected a table with keys r and amplitude", path)
        _check_keys(h, {"r", "amplitude"}, path)
        r = _int_list(_require(h, "r", path), d, f"{path}.r")
        hops.append((tuple(r), _matrix(_require(h, "amplitude", path), q, f"{path}.amplitude")))
    onsite = _matrix(tab["onsite"], q, "model.onsite") if "onsite" in tab else None
    grading = _matrix(tab["chiral_grading"], q, "model.chiral_grading") if "chiral_grading" in tab else None
    try:
        return ModelSpec(d, q, tuple(hops), onsite, disorder, grading)
    except ValidationError as exc:
        raise ConfigError(str(exc), "model") from exc


def load_config(path) -> RunConfig:
    """Read and validate a model file; every error names the offending key."""
    with open(path, "rb") as fh:
        data = fh.read()
    return parse_config(data, str(path))


def parse_config(data: bytes | str, source: str = "<string>") -> RunConfig:
    raw = data.encode() if isinstance(data, str) else data
    try:
        tab = tomllib.loads(raw.decode())
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"not valid TOML: {exc}", source) from exc
    _check_keys(tab, SECTIONS, "")
    model = _require(tab, "model", "", dict)
    for key in SECTIONS - {"name", "model"}:
        if key in tab and not isinstance(tab[key], dict):
            raise ConfigError(f"expected a table, got {type(tab[key]).__name__}", key)

    dis_tab = tab.get("disorder", {})
    _check_keys(dis_tab, {"strength", "channels", "family", "seed"}, "disorder")
    strength = dis_tab.get("strength", 0.0)
    if isinstance(strength, bool) or not isinstance(strength, (int, float)) or strength < 0:
        raise ConfigError("expected a non-negative number", "disorder.strength")
    channels = dis_tab.get("channels")
    if channels is not None:
        channels = _int_list(channels, None, "disorder.channels", 0)
    try:
        law = DisorderLaw(float(strength), channels, dis_tab.get("family", "uniform"))
    except ValidationError as exc:
        raise ConfigError(str(exc), "disorder") from exc
    seed = dis_tab.get("seed")
    if seed is not None:
        seed = _int(seed, "disorder.seed")
        if not 0 <= seed < 2 ** 64:
            raise ConfigError("seed must fit in 64 unsigned bits", "disorder.seed")

    spec = _model(model, law)
    spec = ModelSpec(spec.d, spec.q, spec.hoppings, spec.onsite, law, spec.chiral_grading,
                     str(tab.get("name", "")))
    d = spec.d

    flux_tab = tab.get("flux", {})
    _check_keys(flux_tab, {"matrix", "gauge"}, "flux")
    gauge = flux_tab.get("gauge", "landau")
    if "matrix" in flux_tab:
        m = flux_tab["matrix"]
        if not isinstance(m, list) or len(m) != d or any(not isinstance(r, list) or len(r) != d for r in m):
            raise ConfigError(f"expected a {d} x {d} matrix", "flux.matrix")
        mat = [[_rational(x, f"flux.matrix[{i}][{j}]") for j, x in enumerate(row)] for i, row in enumerate(m)]
        for i in range(d):
            for j in range(d):
                if mat[i][j] != -mat[j][i]:
                    raise ConfigError("flux matrix must be antisymmetric", f"flux.matrix[{i}][{j}]")
    else:
        mat = [[Fraction(0)] * d for _ in range(d)]
    try:
        twist = TwistCocycle.from_matrix(mat, gauge)
    except ValidationError as exc:
        raise ConfigError(str(exc), "flux.gauge") from exc

    geom = None
    if "geometry" in tab:
        g = tab["geometry"]
        _check_keys(g, {"L"}, "geometry")
        L = _int_list(_require(g, "L", "geometry"), d, "geometry.L", 3)
        geom = TorusGeometry(tuple(L))

    cyl = None
    if "cylinder" in tab:
        c = tab["cylinder"]
        _check_keys(c, {"L", "open_dim"}, "cylinder")
        L = _int_list(_require(c, "L", "cylinder"), d, "cylinder.L", 3)
        od = _int(_require(c, "open_dim", "cylinder"), "cylinder.open_dim")
        if not 1 <= od <= d:
            raise ConfigError(f"open_dim must be in 1..{d}", "cylinder.open_dim")
        cyl = CylinderGeometry(tuple(L), od - 1)

    run = dict(tab.get("run", {}))
    _check_keys(run, {"mu", "dirs", "ensemble", "grid", "margin", "band_count"}, "run")
    if "mu" in run and (isinstance(run["mu"], bool) or not isinstance(run["mu"], (int, float))):
        raise ConfigError("expected a number", "run.mu")
    if "dirs" in run:
        run["dirs"] = parse_directions(run["dirs"], d, "run.dirs")
    for key in ("ensemble", "grid", "band_count"):
        if key in run:
            _int(run[key], f"run.{key}")
    return RunConfig(spec, twist, geom, cyl, seed, run, hashlib.sha256(raw).hexdigest(), source)

