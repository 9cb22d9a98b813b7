"""Run configuration: defaults, flat key-value config files, validation."""
from dataclasses import dataclass, field
from pathlib import Path

from .simulation import MODEL_KINDS, ModelSpec

DEFAULT_ALPHAS = tuple(i / 20 for i in range(1, 21))
CLI_METHODS = ("bh", "us", "ss-screen", "ms-screen", "split-ss", "split-ms")

# config-file key -> (type, default)
_KEYS = {
    "model": (str, None),
    "regime": (str, "equal"),
    "m": (int, 2000),
    "n1": (int, 100),
    "n2": (int, 100),
    "noise": (str, "gaussian"),
    "noise-df": (float, None),
    "theta": (float, None),
    "beta": (float, None),
    "methods": (str, "bh,us"),
    "alpha": (str, None),
    "n-reps": (int, 500),
    "n-grid": (int, 10),
    "seed": (int, 0),
    "fixed-lambda": (bool, False),
    "n-screen": (int, None),
    "output-dir": (str, "results"),
    "workers": (int, None),
}


class ConfigError(ValueError):
    """Invalid or missing configuration value; ``key`` names the offender."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


@dataclass(frozen=True)
class RunConfig:
    model: ModelSpec
    methods: tuple
    alphas: tuple = DEFAULT_ALPHAS
    n_reps: int = 500
    n_grid: int = 10
    master_seed: int = 0
    fixed_lambda: bool = False
    n_screen: int | None = None
    output_dir: Path = field(default_factory=lambda: Path("results"))
    workers: int | None = None

    @property
    def engine_methods(self):
        """Method ids as the simulation engine knows them."""
        if not self.fixed_lambda:
            return self.methods
        return tuple(f"{m}-fixed" if m in ("ss-screen", "ms-screen") else m
                     for m in self.methods)


def read_config_file(path):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}", "expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("_", "-")
        if key not in _KEYS:
            raise ConfigError(key, "unknown config key")
        values[key] = value
    return values


def _convert(key, value):
    kind, _ = _KEYS[key]
    if value is None or isinstance(value, kind) and kind is not str:
        return value
    if kind is bool:
        text = str(value).strip().lower()
        if text in ("1", "true", "yes", "on"):
            return True
        if text in ("0", "false", "no", "off"):
            return False
        raise ConfigError(key, f"expected a boolean, got {value!r}")
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(key, f"expected {kind.__name__}, got {value!r}") from None


def parse_alphas(text):
    try:
        alphas = sorted({float(a) for a in str(text).split(",") if a.strip()})
    except ValueError:
        raise ConfigError("alpha", f"not a comma-separated list of numbers: {text!r}") from None
    if not alphas:
        raise ConfigError("alpha", "empty alpha list")
    if alphas[0] <= 0 or alphas[-1] > 1:
        raise ConfigError("alpha", "every alpha must lie in (0, 1]")
    return tuple(alphas)


def build_config(values):
    """RunConfig from a mapping of config keys (flag names) to raw values."""
    for key in values:
        if key not in _KEYS:
            raise ConfigError(key, "unknown config key")
    v = {key: _convert(key, values.get(key, default)) for key, (_, default) in _KEYS.items()}
    if not v["model"]:
        raise ConfigError("model", f"missing; choose one of {', '.join(MODEL_KINDS)}")
    if v["regime"] not in ("equal", "unequal"):
        raise ConfigError("regime", "must be 'equal' or 'unequal'")
    methods = tuple(dict.fromkeys(m.strip() for m in v["methods"].split(",") if m.strip()))
    if not methods:
        raise ConfigError("methods", "at least one method is required")
    for method in methods:
        if method not in CLI_METHODS:
            raise ConfigError("methods", f"unknown method {method!r}; expected {CLI_METHODS}")
    alphas = DEFAULT_ALPHAS if v["alpha"] is None else parse_alphas(v["alpha"])
    if v["n-reps"] < 1:
        raise ConfigError("n-reps", "must be >= 1")
    if v["n-grid"] < 1:
        raise ConfigError("n-grid", "must be >= 1")
    if v["workers"] is not None and v["workers"] < 1:
        raise ConfigError("workers", "must be >= 1")
    try:
        spec = ModelSpec(
            kind=v["model"], m=v["m"], n1=v["n1"], n2=v["n2"], regime=v["regime"],
            noise=v["noise"], noise_df=v["noise-df"], theta=v["theta"], beta=v["beta"],
        )
    except ValueError as exc:
        raise ConfigError("model", str(exc)) from None
    if v["n-screen"] is not None and not 2 <= v["n-screen"] <= min(spec.n1, spec.n2) - 2:
        raise ConfigError("n-screen", "must leave >= 2 samples per group on both sides")
    return RunConfig(
        model=spec,
        methods=methods,
        alphas=alphas,
        n_reps=v["n-reps"],
        n_grid=v["n-grid"],
        master_seed=v["seed"],
        fixed_lambda=v["fixed-lambda"],
        n_screen=v["n-screen"],
        output_dir=Path(v["output-dir"]),
        workers=v["workers"],
    )


def parse_config(flags, config_file=None):
    """Merge a config file (if any) with command-line flags; flags win.

    ``flags`` maps config keys to values, ``None`` meaning "not given".
    """
    values = read_config_file(config_file) if config_file else {}
    values.update({k: val for k, val in flags.items() if val is not None})
    return build_config(values)
