"""Flat `section.key = value` run configuration with strict validation.

Unknown keys are hard errors (with a did-you-mean hint for prior family
names); command-line `--section.key=value` flags override file values.
The fully resolved configuration is what the run manifest records, so a
manifest can be replayed as a config file byte-for-byte.
"""

from __future__ import annotations

import difflib
import hashlib
from dataclasses import dataclass, field

import numpy as np

from .engine import SamplerPlan
from .priors import FAMILIES, PriorSpec
from .quantile import DEFAULT_LEVELS, QuantileSpec

__all__ = ["RunConfig", "ConfigError", "parse_config", "config_lines", "config_hash"]


class ConfigError(ValueError):
    pass


# section.key -> (type, default); None default means "unset"
_SCHEMA = {
    "prior.family": (str, "horseshoe_ms"),
    "prior.scaling": (str, ""),
    # family hyperparameters, forwarded into PriorSpec.hyper when present
    **{f"prior.{k}": (float, None) for k in (
        "rho", "xi", "r", "delta", "r1", "delta1", "r2", "delta2", "lam",
        "gamma_sq", "alpha", "a", "b", "tau0_sq", "tau1_sq", "theta", "c", "d",
        "c1", "c2", "lambda0", "lambda1", "lambda1_sq", "lambda2_sq", "tau_sq", "pj")},
    "prior.groups": (str, None),    # comma-separated group index per column
    "sampler.iterations": (int, 5000),
    "sampler.burn_in": (int, 1000),
    "sampler.thin": (int, 1),
    "sampler.chains": (int, 2),
    "sampler.seed": (int, 0),
    "sampler.kernel": (str, "auto"),
    "sampler.block_mode": (str, "three_block"),
    "sampler.sigma2_a0": (float, 0.0),
    "sampler.sigma2_b0": (float, 0.0),
    "sampler.legacy_dof": (bool, False),
    "data.path": (str, None),
    "data.response": (str, "y"),
    "data.standardize": (bool, True),
    "output.directory": (str, "."),
    "output.write_binary": (bool, False),
    "quantile.levels": (str, ",".join(str(v) for v in DEFAULT_LEVELS)),
    "quantile.prior_tau": (float, 100.0),
    "quantile.n0": (float, 1.0),
    "quantile.s0": (float, 1.0),
    "simulate.study": (str, "ssvs_lasso_table"),
    "simulate.p": (int, 50),
    "simulate.n": (int, 100),
    "simulate.r2_pop": (float, 0.8),
    "simulate.replications": (int, 20),
    "evidence.v0": (float, 2.0),
    "evidence.s0": (float, 2.0),
    "evidence.prior_variance": (float, 100.0),
    "evidence.g_rule": (str, "ratio"),
    "evidence.g": (float, None),
    "evidence.model_prior_pi0": (float, 0.5),
}

_PRIOR_HYPER_KEYS = {k.split(".", 1)[1] for k in _SCHEMA if k.startswith("prior.")} - {
    "family", "scaling", "groups"}


def _coerce(key: str, raw, typ):
    if isinstance(raw, typ) and not isinstance(raw, str):
        return raw
    text = str(raw).strip()
    try:
        if typ is bool:
            if text.lower() in ("true", "1", "yes", "on"):
                return True
            if text.lower() in ("false", "0", "no", "off"):
                return False
            raise ValueError(text)
        return typ(text)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {typ.__name__}") from None


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        merged = {k: v for k, (_, v) in _SCHEMA.items()}
        merged.update(self.values)
        self.values = merged

    def __getitem__(self, key):
        return self.values[key]

    def prior_spec(self) -> PriorSpec:
        family = self.values["prior.family"]
        if family not in FAMILIES:
            close = difflib.get_close_matches(family, FAMILIES, n=3)
            hint = f"; did you mean: {', '.join(close)}" if close else ""
            raise ConfigError(f"unknown prior family '{family}'{hint}")
        hyper = {k: self.values[f"prior.{k}"] for k in _PRIOR_HYPER_KEYS
                 if self.values.get(f"prior.{k}") is not None}
        groups = None
        if self.values.get("prior.groups"):
            groups = np.array([int(t) for t in str(self.values["prior.groups"]).split(",")])
        try:
            return PriorSpec(family, self.values["prior.scaling"], hyper, groups)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def sampler_plan(self, prior: PriorSpec | None = None) -> SamplerPlan:
        v = self.values
        if v["sampler.burn_in"] >= v["sampler.iterations"]:
            raise ConfigError(
                f"burn_in >= iterations ({v['sampler.burn_in']} >= {v['sampler.iterations']})")
        try:
            return SamplerPlan(
                prior=prior or self.prior_spec(),
                mvn_kernel=v["sampler.kernel"],
                block_mode=v["sampler.block_mode"],
                iterations=v["sampler.iterations"],
                burn_in=v["sampler.burn_in"],
                thin=v["sampler.thin"],
                chains=v["sampler.chains"],
                seed=v["sampler.seed"],
                sigma2_a0=v["sampler.sigma2_a0"],
                sigma2_b0=v["sampler.sigma2_b0"],
                legacy_dof=v["sampler.legacy_dof"],
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def quantile_spec(self) -> QuantileSpec:
        levels = tuple(float(t) for t in str(self.values["quantile.levels"]).split(","))
        try:
            return QuantileSpec(levels=levels, prior_tau=self.values["quantile.prior_tau"],
                                n0=self.values["quantile.n0"], s0=self.values["quantile.s0"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


def _parse_lines(lines, source: str) -> dict:
    out = {}
    for i, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigError(f"{source}:{i}: expected 'section.key = value', got {line!r}")
        key, raw = (t.strip() for t in text.split("=", 1))
        if key not in _SCHEMA:
            close = difflib.get_close_matches(key, _SCHEMA, n=3)
            hint = f"; did you mean: {', '.join(close)}" if close else ""
            raise ConfigError(f"{source}:{i}: unknown key '{key}'{hint}")
        out[key] = _coerce(key, raw, _SCHEMA[key][0])
    return out


def parse_config(path=None, overrides: dict | None = None) -> RunConfig:
    """Build a validated RunConfig from an optional file plus overrides
    (flag values win over file values)."""
    values = {}
    if path is not None:
        with open(path) as fh:
            values.update(_parse_lines(fh, str(path)))
    for key, raw in (overrides or {}).items():
        if key not in _SCHEMA:
            close = difflib.get_close_matches(key, _SCHEMA, n=3)
            hint = f"; did you mean: {', '.join(close)}" if close else ""
            raise ConfigError(f"unknown key '{key}'{hint}")
        values[key] = _coerce(key, raw, _SCHEMA[key][0])
    cfg = RunConfig(values)
    cfg.prior_spec()       # fail fast on constraint violations
    cfg.sampler_plan()
    return cfg


def config_lines(cfg: RunConfig) -> list:
    """The fully resolved configuration as replayable config-file lines."""
    out = []
    for key in sorted(cfg.values):
        val = cfg.values[key]
        if val is None:
            continue
        out.append(f"{key} = {val}")
    return out


def config_hash(cfg: RunConfig) -> str:
    text = "\n".join(config_lines(cfg))
    return hashlib.sha256(text.encode()).hexdigest()[:16]
