# core/config.py
import logging
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import yaml
from dotenv import load_dotenv

PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

logger = logging.getLogger(__name__)

_ENV_OVERRIDES = {
    "crossing_bound": ("GFRSIM_CROSSING_BOUND", int),
    "step_budget_factor": ("GFRSIM_STEP_BUDGET_FACTOR", int),
    "memory_constant": ("GFRSIM_MEMORY_CONSTANT", int),
    "log_level": ("GFRSIM_LOG_LEVEL", str),
}


def load_settings(path: Optional[str] = None) -> dict:
    load_dotenv(os.path.join(PROJECT_ROOT, ".env"))

    cfg_path = path or os.path.join(PROJECT_ROOT, "config", "settings.yaml")
    with open(cfg_path, "r") as f:
        cfg = yaml.safe_load(f) or {}

    for key, (env_name, cast) in _ENV_OVERRIDES.items():
        raw = os.getenv(env_name)
        if not raw:
            continue
        try:
            cfg[key] = cast(raw)
        except ValueError:
            logger.warning("ignoring %s=%r: not a valid %s", env_name, raw, cast.__name__)

    return cfg


@dataclass(frozen=True)
class SimSettings:
    crossing_bound: int = 16
    step_budget_factor: int = 64
    memory_constant: int = 16
    detour_clearance: Fraction = Fraction(21, 20)
    grid_denominator: int = 65536
    portal_leg_factor: int = 2
    generation_retries: int = 400
    log_level: str = "INFO"

    @classmethod
    def from_config(cls, cfg: dict) -> "SimSettings":
        return cls(
            crossing_bound=int(cfg.get("crossing_bound", 16)),
            step_budget_factor=int(cfg.get("step_budget_factor", 64)),
            memory_constant=int(cfg.get("memory_constant", 16)),
            detour_clearance=Fraction(str(cfg.get("detour_clearance", "21/20"))),
            grid_denominator=int(cfg.get("grid_denominator", 65536)),
            portal_leg_factor=int(cfg.get("portal_leg_factor", 2)),
            generation_retries=int(cfg.get("generation_retries", 400)),
            log_level=str(cfg.get("log_level", "INFO")).upper(),
        )

    def step_budget(self, genus: int, nodes: int) -> int:
        d = self.crossing_bound
        return self.step_budget_factor * (genus + 1) ** 2 * (nodes + 1) ** 2 * d * d


_default: Optional[SimSettings] = None


def default_settings() -> SimSettings:
    """Settings from config/settings.yaml, read once per process."""
    global _default
    if _default is None:
        try:
            _default = SimSettings.from_config(load_settings())
        except FileNotFoundError:
            logger.warning("config/settings.yaml not found; using built-in defaults")
            _default = SimSettings()
    return _default
