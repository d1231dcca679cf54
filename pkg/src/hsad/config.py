"""Run configuration: every exposed knob, loadable from key=value text."""

from __future__ import annotations

from dataclasses import dataclass, field, fields

from .qnet import TrainConfig


class ConfigError(ValueError):
    """A configuration key failed validation; the message names the key."""


@dataclass
class RunConfig:
    mode: str = "fused"  # classical | quantum | fused
    ops: str = "einstein"  # einstein | minmax
    n_components: int = 3
    n_endmembers: int = 4
    blur_sigma: float = 5.0
    area_threshold: int | None = None  # None -> 0.1% of pixels, min 4
    e1: float = 0.2
    e2: float = 0.2
    gf_radius: int = 4
    gf_eps: float = 1e-3
    gdm_init_alpha: float = 1.0
    gdm_lr: float = 2.0
    gdm_max_iter: int = 10_000
    seed: int = 0
    snr_db: float | None = None
    train: TrainConfig = field(default_factory=TrainConfig)

    def validate(self) -> "RunConfig":
        if self.mode not in ("classical", "quantum", "fused"):
            raise ConfigError(f"mode: expected classical|quantum|fused, got {self.mode!r}")
        if self.ops not in ("einstein", "minmax"):
            raise ConfigError(f"ops: expected einstein|minmax, got {self.ops!r}")
        if self.n_components < 1:
            raise ConfigError(f"n_components: must be >= 1, got {self.n_components}")
        if self.n_endmembers < 2:
            raise ConfigError(f"n_endmembers: must be >= 2, got {self.n_endmembers}")
        if self.blur_sigma <= 0:
            raise ConfigError(f"blur_sigma: must be positive, got {self.blur_sigma}")
        if self.area_threshold is not None and self.area_threshold < 1:
            raise ConfigError(f"area_threshold: must be >= 1, got {self.area_threshold}")
        for name in ("e1", "e2"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name}: must lie in [0, 1], got {v}")
        if self.gf_radius < 1:
            raise ConfigError(f"gf_radius: must be >= 1, got {self.gf_radius}")
        if self.gf_eps <= 0:
            raise ConfigError(f"gf_eps: must be positive, got {self.gf_eps}")
        if self.gdm_init_alpha < 0:
            raise ConfigError(f"gdm_init_alpha: must be >= 0, got {self.gdm_init_alpha}")
        if self.gdm_lr <= 0:
            raise ConfigError(f"gdm_lr: must be positive, got {self.gdm_lr}")
        if self.gdm_max_iter < 1:
            raise ConfigError(f"gdm_max_iter: must be >= 1, got {self.gdm_max_iter}")
        try:
            TrainConfig(**{f.name: getattr(self.train, f.name) for f in fields(TrainConfig)})
        except ValueError as exc:
            raise ConfigError(f"train: {exc}") from exc
        return self


_BOOL_WORDS = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}

# key -> (section, field, parser)
_KEY_TABLE = {
    "mode": ("run", "mode", str),
    "ops": ("run", "ops", str),
    "n_components": ("run", "n_components", int),
    "n_endmembers": ("run", "n_endmembers", int),
    "blur_sigma": ("run", "blur_sigma", float),
    "area_threshold": ("run", "area_threshold", int),
    "e1": ("run", "e1", float),
    "e2": ("run", "e2", float),
    "gf_radius": ("run", "gf_radius", int),
    "gf_eps": ("run", "gf_eps", float),
    "gdm_init_alpha": ("run", "gdm_init_alpha", float),
    "gdm_lr": ("run", "gdm_lr", float),
    "gdm_max_iter": ("run", "gdm_max_iter", int),
    "seed": ("run", "seed", int),
    "snr_db": ("run", "snr_db", float),
    "epochs": ("train", "epochs", int),
    "lr": ("train", "lr", float),
    "lambda_tv": ("train", "lambda_tv", float),
    "e3": ("train", "e3", float),
    "e4": ("train", "e4", float),
    "train_seed": ("train", "seed", int),
    "use_hesitancy": ("train", "use_hesitancy", "bool"),
}


def apply_key(cfg: RunConfig, key: str, value: str) -> None:
    """Set one key=value pair, raising :class:`ConfigError` on bad input."""
    key = key.strip().lower()
    if key not in _KEY_TABLE:
        raise ConfigError(f"{key}: unknown configuration key")
    section, attr, parser = _KEY_TABLE[key]
    raw = value.strip()
    if raw.lower() == "none":
        parsed = None
    elif parser == "bool":
        if raw.lower() not in _BOOL_WORDS:
            raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
        parsed = _BOOL_WORDS[raw.lower()]
    else:
        try:
            parsed = parser(raw)
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from exc
    target = cfg if section == "run" else cfg.train
    setattr(target, attr, parsed)


def load_config(path: str, base: RunConfig | None = None) -> RunConfig:
    """Parse a key = value file ('#' starts a comment) over a base config."""
    cfg = base or RunConfig()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
            key, _, value = line.partition("=")
            apply_key(cfg, key, value)
    return cfg.validate()


def config_items(cfg: RunConfig) -> list[tuple[str, str]]:
    """Flat (key, value) echo of the configuration, for manifests."""
    items = []
    for key, (section, attr, _) in _KEY_TABLE.items():
        target = cfg if section == "run" else cfg.train
        items.append((key, str(getattr(target, attr))))
    return items
