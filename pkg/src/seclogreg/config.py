"""Run configuration: INI file with sections, loaded through configparser.

Example::

    [run]
    method = protocol1
    mode = strict
    seed = 7

    [codec]
    modulus_bits = 128
    frac_bits = 24

    [protocol1]
    L = 200

The environment variable ``SECLOGREG_CONFIG`` names a default file.
"""
from __future__ import annotations

import configparser
import os
from dataclasses import asdict, dataclass, fields

from .protocol1 import Protocol1Config
from .protocol2 import Protocol2Config
from .ring import FixedPointCodec

METHODS = ("exact_nr", "hesslb_clear", "protocol1", "protocol2")
ENV_VAR = "SECLOGREG_CONFIG"

# field -> (section, type)
_LAYOUT = {
    "method": ("run", str), "mode": ("run", str), "seed": ("run", int),
    "modulus_bits": ("codec", int), "frac_bits": ("codec", int),
    "parties": ("partition", int), "scheme": ("partition", str), "partition_seed": ("partition", int),
    "L": ("protocol1", int), "eps_conv": ("protocol1", float), "hessian_mode": ("protocol1", str),
    "max_outer": ("run", int), "inv_eps": ("run", float),
    "k": ("protocol2", int), "b_threshold": ("protocol2", float), "radius": ("protocol2", float),
    "tau_floor": ("protocol2", float),
    "clear_eps": ("clear", float), "clear_max_iter": ("clear", int),
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    method: str = "protocol1"
    mode: str = "trace"
    seed: int = 0
    modulus_bits: int = 128
    frac_bits: int = 24
    parties: int = 2
    scheme: str = "horizontal"
    partition_seed: int = 0
    L: int = 200
    eps_conv: float | None = None
    hessian_mode: str = "hessian_lb"
    max_outer: int | None = None
    inv_eps: float = 1e-5
    k: int = 10
    b_threshold: float | None = None
    radius: float | None = None
    tau_floor: float = 1e-3
    clear_eps: float = 1e-12
    clear_max_iter: int = 10000

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.mode not in ("strict", "trace"):
            raise ConfigError(f"mode must be 'strict' or 'trace', got {self.mode!r}")

    @property
    def codec(self) -> FixedPointCodec:
        return FixedPointCodec(self.modulus_bits, self.frac_bits)

    def protocol1(self) -> Protocol1Config:
        extra = {} if self.max_outer is None else {"max_outer": self.max_outer}
        return Protocol1Config(L=self.L, eps_conv=self.eps_conv, hessian_mode=self.hessian_mode,
                               seed=self.seed, inv_eps=self.inv_eps, mode=self.mode, **extra)

    def protocol2(self) -> Protocol2Config:
        extra = {} if self.max_outer is None else {"max_outer": self.max_outer}
        return Protocol2Config(k=self.k, b_threshold=self.b_threshold, radius=self.radius,
                               tau_floor=self.tau_floor, seed=self.seed, inv_eps=self.inv_eps,
                               mode=self.mode, **extra)

    def to_text(self) -> str:
        cp = configparser.ConfigParser()
        cp.optionxform = str
        for name, value in asdict(self).items():
            if value is None:
                continue
            section = _LAYOUT[name][0]
            if not cp.has_section(section):
                cp.add_section(section)
            cp[section][name] = repr(value) if isinstance(value, float) else str(value)
        from io import StringIO
        buf = StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str, **overrides) -> "RunConfig":
        cp = configparser.ConfigParser()
        cp.optionxform = str
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"unreadable config: {exc}") from None
        values = {}
        for section in cp.sections():
            for key, raw in cp[section].items():
                if key not in _LAYOUT:
                    raise ConfigError(f"unknown key {key!r} in [{section}]")
                want, typ = _LAYOUT[key]
                if want != section:
                    raise ConfigError(f"key {key!r} belongs in [{want}], found in [{section}]")
                try:
                    values[key] = typ(raw)
                except ValueError:
                    raise ConfigError(f"bad value for {key}: {raw!r}") from None
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    @classmethod
    def load(cls, path=None, **overrides) -> "RunConfig":
        path = path or os.environ.get(ENV_VAR)
        if not path:
            return cls(**{k: v for k, v in overrides.items() if v is not None})
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_text(text, **overrides)


FIELD_NAMES = tuple(f.name for f in fields(RunConfig))
