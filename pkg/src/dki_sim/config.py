"""Line-oriented ``key = value`` run configuration.

Keys carry a dotted section prefix (``channel.gamma``), ``#`` starts a
comment, and list values are comma separated. The same syntax is echoed as
``# key = value`` comment lines at the top of every CSV, and
:func:`load` accepts such a CSV back, so a run can be reproduced from its
own output.
"""

from __future__ import annotations

from .errors import ConfigError

# key -> (type, default text); "" means unset
_INT, _FLOAT, _STR = int, float, str
SCHEMA = {
    "code.n": ("intlist", None),
    "code.kappa": ("floatlist", "0"),
    "code.b": (_FLOAT, "0.5"),
    "code.theta": (_FLOAT, ""),
    "channel.A": (_FLOAT, None),
    "channel.sigma2": (_FLOAT, None),
    "channel.gamma": (_FLOAT, None),
    "channel.g_max": (_FLOAT, ""),
    "fading.kind": (_STR, "constant"),
    "fading.scale": (_FLOAT, "1"),
    "grid.points": (_INT, "5"),
    "packing.saturation_T": (_INT, "5000"),
    "packing.max_codewords": (_INT, ""),
    "packing.memory_cap": (_INT, "100000"),
    "packing.coverage_samples": (_INT, "100000"),
    "codebook.path": (_STR, ""),
    "sim.seed": (_INT, "0"),
    "sim.trials": (_INT, "10000"),
    "sim.experiments": ("strlist", "type1,type2"),
    "sim.message": (_INT, "0"),
    "sim.target": ("intlist", ""),
    "sim.target_policy": (_STR, "nearest"),
    "sim.K": (_INT, ""),
    "sim.shared_streams": ("bool", "true"),
    "converse.distances": ("floatlist", ""),
    "converse.points": (_INT, "5"),
}

REQUIRED = ("code.n", "channel.A", "channel.sigma2", "channel.gamma")


def _convert(key, kind, text, where):
    try:
        if text == "":
            return None
        if kind == "intlist":
            return [int(t) for t in text.split(",") if t.strip()]
        if kind == "floatlist":
            return [float(t) for t in text.split(",") if t.strip()]
        if kind == "strlist":
            return [t.strip() for t in text.split(",") if t.strip()]
        if kind == "bool":
            low = text.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(text)
            return low in ("true", "1", "yes")
        return kind(text)
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {key} = {text!r}") from None


def parse(text, source="<config>", *, check_required=True):
    """Parse config text into a dict of raw strings keyed by dotted name."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        key, sep, value = body.partition("=")
        key, value = key.strip(), value.strip()
        where = f"{source}:{lineno}"
        if not sep or not key:
            raise ConfigError(f"{where}: expected 'key = value', got {line.strip()!r}")
        if key not in SCHEMA:
            raise ConfigError(f"{where}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"{where}: duplicate key {key!r}")
        _convert(key, SCHEMA[key][0], value, where)
        raw[key] = value
    if check_required:
        for key in REQUIRED:
            if key not in raw or raw[key] == "":
                raise ConfigError(f"{source}: missing required field {key!r}")
    return raw


def _echo_lines(text):
    out = []
    for line in text.splitlines():
        if not line.startswith("#"):
            break
        out.append(line[1:].strip())
    return "\n".join(out)


def load(path):
    with open(path) as fh:
        text = fh.read()
    if path.endswith(".csv"):
        text = _echo_lines(text)
    return parse(text, source=path)


class Config:
    """Resolved configuration: defaults filled in, values typed."""

    def __init__(self, raw):
        self.raw = {k: raw.get(k, SCHEMA[k][1]) for k in SCHEMA}
        for key in REQUIRED:
            if self.raw[key] in (None, ""):
                raise ConfigError(f"missing required field {key!r}")

    def override(self, key, value):
        if value is not None:
            self.raw[key] = str(value)

    def __getitem__(self, key):
        return _convert(key, SCHEMA[key][0], self.raw[key], "config")

    def echo(self):
        """``key = value`` lines for every key, defaults included."""
        return [f"{k} = {self.raw[k]}" for k in sorted(self.raw)]
