"""Run configuration: a small INI schema with exhaustive validation."""

import configparser
from dataclasses import dataclass, field

from .errors import ConfigError

_SCHEMA = {
    "domain": {"name", "params"},
    "index": {"refractive_index"},
    "mesh": {"h", "refinements"},
    "solve": {"k_min", "k_max", "count", "sigma", "tol"},
    "analysis": {"radii", "features", "fields"},
    "output": {"directory"},
}
_REQUIRED = {("domain", "name"), ("index", "refractive_index"), ("mesh", "h"),
             ("solve", "k_max"), ("output", "directory")}
_DOMAINS = {"equilateral_triangle", "right_triangle", "arrow", "moon",
            "unit_square", "isosceles", "sector", "disk", "cube"}
_FIELDS = ("u0", "u", "diff")


@dataclass(frozen=True)
class RunConfig:
    """Validated inputs of one experiment."""
    domain_name: str
    domain_params: tuple
    index_text: str
    h: float
    refinements: int
    k_min: object            # 'auto' or float
    k_max: float
    count: int
    sigma: object            # None (auto) or float
    tol: float
    radii: object            # None (auto) or tuple of float
    features: object         # 'auto' or tuple of raw feature strings
    fields: tuple
    outdir: str
    source_text: str = field(default="", repr=False)


def _floats(text):
    return tuple(float(t) for t in text.replace(",", " ").split())


def parse_config(path) -> RunConfig:
    """Read and validate a configuration file.

    Unknown sections or keys are rejected; all numeric ranges are checked
    here so later stages can assume a sane configuration.
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            text = fh.read()
        cp.read_string(text, source=str(path))
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc

    for section in cp.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key in cp[section]:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
    for section, key in _REQUIRED:
        if not cp.has_option(section, key):
            raise ConfigError(f"missing required key {key!r} in section [{section}]")

    get = cp.get
    name = get("domain", "name").strip()
    if name not in _DOMAINS:
        raise ConfigError(f"unknown domain {name!r}; choose from {sorted(_DOMAINS)}")
    try:
        params = _floats(get("domain", "params", fallback=""))
        h = float(get("mesh", "h"))
        refinements = int(get("mesh", "refinements", fallback="0"))
        k_min_raw = get("solve", "k_min", fallback="auto").strip()
        k_min = "auto" if k_min_raw == "auto" else float(k_min_raw)
        k_max = float(get("solve", "k_max"))
        count = int(get("solve", "count", fallback="6"))
        sigma_raw = get("solve", "sigma", fallback="auto").strip()
        sigma = None if sigma_raw == "auto" else float(sigma_raw)
        tol = float(get("solve", "tol", fallback="1e-8"))
        radii_raw = get("analysis", "radii", fallback="auto").strip()
        radii = None if radii_raw == "auto" else _floats(radii_raw)
        features_raw = get("analysis", "features", fallback="auto").strip()
        if features_raw == "auto":
            features = "auto"
        elif features_raw == "none":
            features = ()
        else:
            features = tuple(t.strip() for t in features_raw.split(";") if t.strip())
        fields_raw = get("analysis", "fields", fallback="u0,u,diff")
        fields = tuple(t.strip() for t in fields_raw.split(",") if t.strip())
    except ValueError as exc:
        raise ConfigError(f"bad value: {exc}") from exc

    if h <= 0:
        raise ConfigError("mesh h must be positive")
    if refinements < 0 or refinements > 6:
        raise ConfigError("refinements must be in 0..6")
    if k_max <= 0:
        raise ConfigError("k_max must be positive")
    if k_min != "auto" and not (0 < k_min < k_max):
        raise ConfigError("need 0 < k_min < k_max")
    if count < 1:
        raise ConfigError("count must be positive")
    if tol <= 0:
        raise ConfigError("tol must be positive")
    if radii is not None:
        if len(radii) < 1 or any(r <= 0 for r in radii):
            raise ConfigError("radii must be positive")
        if list(radii) != sorted(radii, reverse=True):
            raise ConfigError("radii must be strictly decreasing")
    for f in fields:
        if f not in _FIELDS:
            raise ConfigError(f"unknown field {f!r}; choose from {_FIELDS}")
    if not fields:
        raise ConfigError("fields cannot be empty")
    outdir = get("output", "directory").strip()
    if not outdir:
        raise ConfigError("output directory cannot be empty")

    return RunConfig(domain_name=name, domain_params=params,
                     index_text=get("index", "refractive_index").strip(),
                     h=h, refinements=refinements, k_min=k_min, k_max=k_max,
                     count=count, sigma=sigma, tol=tol, radii=radii,
                     features=features, fields=fields, outdir=outdir,
                     source_text=text)
