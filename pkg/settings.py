"""
Configuration for the fusion/cohomology toolkit.

Defaults live in DEFAULTS; environment variables override them and the CLI
overrides both through configure(). The environment is read once; configure()
and reset() rebuild the frozen Box that current() hands out, so every size
cap is still read at call time.
"""

import os

from box import Box


DEFAULTS = {
    'max_elements': 50_000,
    'max_subgroup_order': 64,
    'max_columns': 500_000,
    'max_cochain_dim': 5_000,
    'batch_rows': 64,
    'report_timings': False,
    'max_degree': None,
}

# env var -> (config key, converter)
ENV_VARS = {
    'MISLIN_MAX_ELEMENTS': ('max_elements', int),
    'MISLIN_MAX_SUBGROUP_ORDER': ('max_subgroup_order', int),
    'MISLIN_MAX_COLUMNS': ('max_columns', int),
    'MISLIN_MAX_COCHAIN_DIM': ('max_cochain_dim', int),
    'MISLIN_BATCH_ROWS': ('batch_rows', int),
    'MISLIN_REPORT_TIMINGS': ('report_timings', lambda v: v.lower() in ('1', 'true', 'yes', 'on')),
    'MISLIN_MAX_DEGREE': ('max_degree', int),
}

_overrides = {}
_active = None  # env plus overrides; rebuilt after configure() or reset()


class CapExceeded(RuntimeError):
    """A configured size cap would be exceeded."""

    def __init__(self, what, size, limit):
        self.what, self.size, self.limit = what, size, limit
        super().__init__(f"{what}: size {size} exceeds cap {limit}")


def get_config_from_env():
    """Defaults overridden by MISLIN_* environment variables."""
    config = Box(DEFAULTS)
    for var, (key, conv) in ENV_VARS.items():
        raw = os.environ.get(var)
        if raw is None or raw == '':
            continue
        try:
            config[key] = conv(raw)
        except ValueError as e:
            raise ValueError(f"bad value for {var}: {raw!r}") from e
    return config


def configure(**overrides):
    """Apply overrides (None values are ignored) on top of the environment."""
    for key, value in overrides.items():
        if key not in DEFAULTS:
            raise KeyError(f"unknown setting {key!r}")
        if value is not None:
            _overrides[key] = value
    _invalidate()


def reset():
    """Drop overrides and re-read the environment."""
    _overrides.clear()
    _invalidate()


def _invalidate():
    global _active
    _active = None


def current():
    global _active
    if _active is None:
        config = get_config_from_env()
        config.update(_overrides)
        _active = Box(config, frozen_box=True)
    return _active


def check_cap(what, size, key):
    limit = current()[key]
    if size > limit:
        raise CapExceeded(what, size, limit)
